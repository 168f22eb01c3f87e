"""Effective dynamics on the space of colored Dyck paths.

The chain Hamiltonian, projected onto uniform superpositions of all
flat-step insertions of a Dyck path, becomes a small symmetric operator
whose matrix elements close over the Dyck paths alone.  A similarity
transform with the square root of its ground-state weights turns that
operator into a reversible stochastic matrix whose spectral gap equals
the projected gap up to a known factor.  This module builds those
objects, certifies the gap from below with canonical paths routed
through a peak-removal tree, and assembles the one-dimensional hopping
chain that governs the walk of an unmatched letter.

Levels, trees, and matchings here are indexed by the half length ``m``
of a path (a path of length ``2m`` sits at level ``m``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import networkx as nx
import numpy as np
import scipy.sparse as sp

from .errors import (
    InvalidSpec,
    MatchingInfeasible,
    NegativeEntry,
    SizeExceeded,
)
from .walks import (
    DOWN,
    UP,
    Walk,
    binomial,
    catalan_number,
    down,
    enumerate_walks,
    flat,
    motzkin_number,
    up,
)

BASIS_GUARD = 2 * 10**5
OPERATOR_GUARD = 10**5
PAIR_GUARD = 10**8

STOCHASTIC_TOL = 1e-12


# ---------------------------------------------------------------------------
# Basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DyckBasis:
    """All colored Dyck paths of length ``0, 2, ..., 2n`` in canonical order.

    Canonical order is by length first, then lexicographically on the token
    encoding, which keeps basis indices stable across runs.  ``level_of[i]``
    is the half length of ``paths[i]`` and ``peak_count[i]`` its number of
    peaks (an up step immediately closed by its down step).
    """

    n: int
    s: int
    paths: tuple[Walk, ...]
    index: dict[Walk, int]
    level_of: np.ndarray
    level_offsets: tuple[int, ...]
    peak_count: np.ndarray

    @property
    def size(self) -> int:
        return len(self.paths)

    def level_slice(self, m: int) -> slice:
        if not 0 <= m <= self.n:
            raise InvalidSpec(f"level {m} outside 0..{self.n}")
        return slice(self.level_offsets[m], self.level_offsets[m + 1])

    def level_paths(self, m: int) -> tuple[Walk, ...]:
        return self.paths[self.level_slice(m)]


def basis_size(n: int, s: int) -> int:
    """Number of colored Dyck paths of length up to ``2n``."""
    return sum(s**m * catalan_number(m) for m in range(n + 1))


def peak_positions(walk: Walk) -> list[int]:
    """Indices ``i`` where step ``i`` is an up immediately closed at ``i+1``."""
    out = []
    for i in range(len(walk) - 1):
        if walk[i].kind == UP and walk[i + 1].kind == DOWN:
            out.append(i)
    return out


def remove_peak(walk: Walk, i: int) -> Walk:
    """Drop the up/down pair at positions ``i`` and ``i+1``."""
    if i < 0 or i + 1 >= len(walk):
        raise InvalidSpec(f"no peak at position {i}")
    if walk[i].kind != UP or walk[i + 1].kind != DOWN:
        raise InvalidSpec(f"steps {i},{i + 1} of {walk.text()!r} are not a peak")
    return Walk(walk.steps[:i] + walk.steps[i + 2 :])


def insert_peak(walk: Walk, i: int, color: int) -> Walk:
    """Insert an up/down pair of the given color before position ``i``."""
    if i < 0 or i > len(walk):
        raise InvalidSpec(f"insertion point {i} outside walk")
    return Walk(walk.steps[:i] + (up(color), down(color)) + walk.steps[i:])


def dyck_basis(n: int, s: int) -> DyckBasis:
    if n < 0 or s < 1:
        raise InvalidSpec("need n >= 0 and s >= 1")
    total = basis_size(n, s)
    if total > BASIS_GUARD:
        raise SizeExceeded(
            f"{total} colored Dyck paths exceed the basis guard {BASIS_GUARD:.0e}"
        )
    paths: list[Walk] = []
    offsets = [0]
    for m in range(n + 1):
        level = list(enumerate_walks(2 * m, s, "dyck"))
        if len(level) != s**m * catalan_number(m):
            raise RuntimeError("level size disagrees with the colored Catalan count")
        paths.extend(level)
        offsets.append(len(paths))
    index = {p: i for i, p in enumerate(paths)}
    level_of = np.empty(total, dtype=np.int64)
    for m in range(n + 1):
        level_of[offsets[m] : offsets[m + 1]] = m
    peaks = np.array([len(peak_positions(p)) for p in paths], dtype=np.int64)
    return DyckBasis(
        n=n,
        s=s,
        paths=tuple(paths),
        index=index,
        level_of=level_of,
        level_offsets=tuple(offsets),
        peak_count=peaks,
    )


# ---------------------------------------------------------------------------
# Embedding into the spin chain
# ---------------------------------------------------------------------------


def embed_uniform(path: Walk, two_n: int) -> dict[Walk, float]:
    """Uniform superposition over all flat-step insertions of a Dyck path.

    Returns the amplitude of every length ``two_n`` string whose letter
    subsequence equals ``path``; each carries ``1/sqrt(binom(2n, 2m))``.
    The images of distinct paths use disjoint strings, so the embedding
    is an isometry.
    """
    two_m = len(path)
    if two_m > two_n:
        raise InvalidSpec(f"path of length {two_m} does not fit in {two_n} sites")
    if any(step.kind not in (UP, DOWN) for step in path):
        raise InvalidSpec("only flat-free paths can be embedded")
    amplitude = 1.0 / math.sqrt(binomial(two_n, two_m))
    out: dict[Walk, float] = {}
    for positions in combinations(range(two_n), two_m):
        steps = [flat()] * two_n
        for letter, pos in zip(path, positions):
            steps[pos] = letter
        out[Walk(tuple(steps))] = amplitude
    return out


# ---------------------------------------------------------------------------
# Projected Hamiltonian and transition matrix
# ---------------------------------------------------------------------------


def _mult_table(basis: DyckBasis) -> dict[tuple[int, int], int]:
    """How many distinct peak removals connect each (shorter, longer) pair."""
    table: dict[tuple[int, int], int] = {}
    for t_idx, walk in enumerate(basis.paths):
        if len(walk) == 0:
            continue
        for i in peak_positions(walk):
            u_idx = basis.index[remove_peak(walk, i)]
            key = (u_idx, t_idx)
            table[key] = table.get(key, 0) + 1
    return table


def build_heff(two_n: int, s: int) -> tuple[DyckBasis, sp.csr_matrix]:
    """Symmetric projected interaction operator on the Dyck basis.

    The diagonal entry of a level ``m`` path with ``p`` peaks is

        [ (s/2)(2n-1) binom(2n-2, 2m) + (p/2) binom(2n-1, 2m-1) ] / binom(2n, 2m)

    and the only off-diagonal entries couple paths related by one peak,
    with weight -(1/2) mult binom(2n-1, 2m+1) / sqrt(binom(2n,2m) binom(2n,2m+2))
    where ``mult`` counts the distinct removals connecting the pair.  Both
    follow from averaging the two-site pair projectors over all flat-step
    placements: adjacent flat pairs contribute the first diagonal term,
    adjacently placed peaks the second, and a peak adjacent to a flat pair
    the off-diagonal one.
    """
    if two_n < 2 or two_n % 2:
        raise InvalidSpec("two_n must be even and >= 2")
    n = two_n // 2
    total = basis_size(n, s)
    if total > OPERATOR_GUARD:
        raise SizeExceeded(
            f"operator dimension {total} exceeds the guard {OPERATOR_GUARD:.0e}"
        )
    basis = dyck_basis(n, s)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for i in range(basis.size):
        m = int(basis.level_of[i])
        denom = binomial(two_n, 2 * m)
        diag = (s / 2.0) * (two_n - 1) * binomial(two_n - 2, 2 * m) / denom
        if m:
            diag += 0.5 * basis.peak_count[i] * binomial(two_n - 1, 2 * m - 1) / denom
        rows.append(i)
        cols.append(i)
        vals.append(diag)
    for (u_idx, t_idx), mult in _mult_table(basis).items():
        m = int(basis.level_of[u_idx])
        weight = (
            -0.5
            * mult
            * binomial(two_n - 1, 2 * m + 1)
            / math.sqrt(binomial(two_n, 2 * m) * binomial(two_n, 2 * m + 2))
        )
        rows.extend((u_idx, t_idx))
        cols.extend((t_idx, u_idx))
        vals.extend((weight, weight))
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(basis.size, basis.size))
    return basis, matrix.tocsr()


def ground_weights(basis: DyckBasis) -> np.ndarray:
    """Squared ground-state amplitude of each basis path.

    A path at level ``m`` carries weight ``binom(2n, 2m) / M_{2n,s}`` where
    the normalizer is the total number of colored Motzkin strings; these
    weights sum to one and are the stationary distribution of the walk.
    """
    two_n = 2 * basis.n
    normalizer = motzkin_number(two_n, basis.s)
    weights = np.array(
        [binomial(two_n, 2 * int(m)) / normalizer for m in basis.level_of],
        dtype=float,
    )
    return weights


@dataclass
class TransitionMatrix:
    """Reversible stochastic matrix over a Dyck basis."""

    basis: DyckBasis
    matrix: np.ndarray
    stationary: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, tol: float = STOCHASTIC_TOL) -> None:
        row_defect = np.abs(self.matrix.sum(axis=1) - 1.0).max()
        if row_defect > tol:
            raise NegativeEntry(f"row sums deviate from 1 by {row_defect:.3e}")
        flow = self.stationary[:, None] * self.matrix
        balance = np.abs(flow - flow.T).max()
        if balance > tol:
            raise NegativeEntry(f"detailed balance violated by {balance:.3e}")

    def second_eigenvalue(self) -> float:
        values = np.sort(np.linalg.eigvals(self.matrix).real)
        return float(values[-2])


def build_transition(two_n: int, s: int) -> TransitionMatrix:
    """Stochastic walk whose generator is the projected interaction.

    ``P = I - H_eff, conjugated by sqrt of the stationary weights, over
    s(2n-1)``.  Entries of the result are nonnegative for this
    construction; any negative entry signals a construction bug and
    raises :class:`NegativeEntry`.
    """
    basis, heff = build_heff(two_n, s)
    pi = ground_weights(basis)
    scale = 1.0 / (s * (two_n - 1))
    sqrt_pi = np.sqrt(pi)
    dense = heff.toarray()
    matrix = np.eye(basis.size) - scale * (dense / sqrt_pi[:, None]) * sqrt_pi[None, :]
    negative = matrix.min()
    if negative < -STOCHASTIC_TOL:
        raise NegativeEntry(f"transition entry {negative:.3e} below zero")
    np.clip(matrix, 0.0, None, out=matrix)
    result = TransitionMatrix(basis=basis, matrix=matrix, stationary=pi)
    result.validate()
    return result


def heff_kernel_vector(basis: DyckBasis) -> np.ndarray:
    """The unit vector with amplitude ``sqrt(binom(2n,2m)/M_{2n,s})`` per path."""
    return np.sqrt(ground_weights(basis))


# ---------------------------------------------------------------------------
# Fractional matching between consecutive levels
# ---------------------------------------------------------------------------

Shape = tuple[int, ...]


def _shape_of(walk: Walk) -> Shape:
    return tuple(step.rise for step in walk)


def _last_return(shape: Shape) -> int:
    """Start of the final arch: the last prefix of height zero."""
    h = 0
    last = 0
    for i, rise in enumerate(shape[:-1]):
        h += rise
        if h == 0:
            last = i + 1
    return last


@lru_cache(maxsize=None)
def block_split_weights(m: int) -> tuple[Fraction, ...]:
    """Weights ``u_a`` steering the level ``m`` matching between sub-blocks.

    A path of length ``2m`` splits at its last return to height zero into a
    prefix block of half length ``a`` and a final arch enclosing a block of
    half length ``m - 1 - a``.  Sending fraction ``u_a`` of the path's unit
    of matching mass into the prefix block (and the rest into the enclosed
    block) makes every level ``m-1`` path receive the same total mass
    ``C_m / C_{m-1}``.  The recurrence below is exactly that equal-mass
    condition; ``u_0 = 0`` and ``u_{m-1} = 1`` come out automatically, so
    the one-sided splits never put weight on a missing block.
    """
    if m < 1:
        raise InvalidSpec("levels start at 1")
    ratio = lambda k: Fraction(catalan_number(k), catalan_number(k - 1))
    target = ratio(m)
    u = [Fraction(0)]
    for a in range(m - 1):
        nxt = (target - (1 - u[a]) * ratio(m - 1 - a)) / ratio(a + 1)
        u.append(nxt)
    if u[-1] != 1 or any(w < 0 or w > 1 for w in u):
        raise MatchingInfeasible(f"block weights for level {m} left [0,1]: {u}")
    return tuple(u)


@lru_cache(maxsize=None)
def fractional_peak_weights(shape: Shape) -> tuple[tuple[int, Fraction], ...]:
    """Fractional matching mass each peak of ``shape`` sends one level down.

    The weights are positive, sum to one, and distribute over peaks by the
    recursive block split of :func:`block_split_weights`; the peak of the
    final arch itself carries mass only in the base case of a lone arch.
    """
    m = len(shape) // 2
    if m == 0:
        raise InvalidSpec("the empty path has no matching")
    if m == 1:
        return ((0, Fraction(1)),)
    split = _last_return(shape)
    prefix = shape[:split]
    inner = shape[split + 1 : -1]
    a = len(prefix) // 2
    u = block_split_weights(m)[a]
    out: list[tuple[int, Fraction]] = []
    if prefix and u:
        out.extend((i, u * w) for i, w in fractional_peak_weights(prefix))
    if inner and u != 1:
        offset = split + 1
        out.extend((offset + i, (1 - u) * w) for i, w in fractional_peak_weights(inner))
    return tuple(out)


def _uncolored_level(m: int) -> list[Shape]:
    return [_shape_of(w) for w in enumerate_walks(2 * m, 1, "dyck")]


def fractional_matching_level(m: int) -> dict[Shape, dict[Shape, Fraction]]:
    """Aggregated peak mass from each level ``m`` shape to its sub-shapes.

    Validates the two defining properties exactly in rational arithmetic:
    every row sums to one and every level ``m-1`` shape receives the same
    column total ``C_m / C_{m-1}``.
    """
    if m < 1:
        raise InvalidSpec("levels start at 1")
    rows: dict[Shape, dict[Shape, Fraction]] = {}
    column_totals: dict[Shape, Fraction] = {}
    for shape in _uncolored_level(m):
        row: dict[Shape, Fraction] = {}
        for i, weight in fractional_peak_weights(shape):
            parent = shape[:i] + shape[i + 2 :]
            row[parent] = row.get(parent, Fraction(0)) + weight
            column_totals[parent] = column_totals.get(parent, Fraction(0)) + weight
        if sum(row.values()) != 1:
            raise MatchingInfeasible(f"row mass of {shape} is not one")
        rows[shape] = row
    expected = Fraction(catalan_number(m), catalan_number(m - 1))
    parents = _uncolored_level(m - 1)
    if any(column_totals.get(p, Fraction(0)) != expected for p in parents):
        raise MatchingInfeasible(f"column totals at level {m} are unequal")
    return rows


@lru_cache(maxsize=None)
def rounded_matching_level(m: int) -> dict[Shape, tuple[Shape, int]]:
    """Integral parent choice per level ``m`` shape, rounded from the matching.

    Solves a min-cost flow that gives every shape exactly one parent while
    keeping each parent's child count between the floor and ceiling of the
    fractional column total ``C_m / C_{m-1}``; costs prefer heavy fractional
    mass.  Returns, per shape, its parent and the lowest peak index whose
    removal realizes it.
    """
    rows = fractional_matching_level(m)
    shapes = list(rows)
    parents = _uncolored_level(m - 1)
    ratio = Fraction(catalan_number(m), catalan_number(m - 1))
    lo = ratio.numerator // ratio.denominator
    hi = lo if ratio == lo else lo + 1
    graph = nx.DiGraph()
    graph.add_node("source", demand=-len(shapes))
    graph.add_node("sink", demand=len(shapes) - lo * len(parents))
    for j, parent in enumerate(parents):
        graph.add_node(("col", j), demand=lo)
        graph.add_edge(("col", j), "sink", capacity=hi - lo, weight=0)
    parent_pos = {p: j for j, p in enumerate(parents)}
    for i, shape in enumerate(shapes):
        graph.add_node(("row", i))
        graph.add_edge("source", ("row", i), capacity=1, weight=0)
        for parent, mass in rows[shape].items():
            cost = -round(10**6 * mass)
            graph.add_edge(
                ("row", i), ("col", parent_pos[parent]), capacity=1, weight=cost
            )
    try:
        flow = nx.min_cost_flow(graph)
    except nx.NetworkXUnfeasible as exc:
        raise MatchingInfeasible(f"level {m} rounding has no integral point") from exc
    out: dict[Shape, tuple[Shape, int]] = {}
    for i, shape in enumerate(shapes):
        chosen = [j for j, units in flow[("row", i)].items() if units]
        if len(chosen) != 1:
            raise MatchingInfeasible(f"shape {shape} left unassigned")
        parent = parents[chosen[0][1]]
        peak = next(
            i_
            for i_ in peak_positions_shape(shape)
            if shape[:i_] + shape[i_ + 2 :] == parent
        )
        out[shape] = (parent, peak)
    return out


def peak_positions_shape(shape: Shape) -> list[int]:
    return [
        i for i in range(len(shape) - 1) if shape[i] == 1 and shape[i + 1] == -1
    ]


# ---------------------------------------------------------------------------
# Canonical tree and routing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalTree:
    """Peak-removal ancestry over every colored Dyck path of length <= 2n.

    ``parent[i]`` is the basis index of the path one peak shorter (or -1 at
    the root) and ``parent_peak[i]`` the step index of the removed peak.
    Colors extend the uncolored assignment uniformly, so every node's child
    count is ``s`` times its shape's uncolored child count, which the
    rounding keeps within ``[1, 4]``.
    """

    basis: DyckBasis
    parent: np.ndarray
    parent_peak: np.ndarray
    children: tuple[tuple[int, ...], ...]

    def child_counts(self) -> np.ndarray:
        return np.array([len(c) for c in self.children], dtype=np.int64)

    def ancestors(self, i: int) -> list[int]:
        """Indices from ``i`` down to the root, inclusive."""
        chain = [i]
        while self.parent[chain[-1]] >= 0:
            chain.append(int(self.parent[chain[-1]]))
        return chain


def build_canonical_tree(n: int, s: int) -> CanonicalTree:
    basis = dyck_basis(n, s)
    parent = np.full(basis.size, -1, dtype=np.int64)
    parent_peak = np.full(basis.size, -1, dtype=np.int64)
    children: list[list[int]] = [[] for _ in range(basis.size)]
    for m in range(1, n + 1):
        assignment = rounded_matching_level(m)
        for i in range(*basis.level_slice(m).indices(basis.size)):
            walk = basis.paths[i]
            _, peak = assignment[_shape_of(walk)]
            up_idx = basis.index[remove_peak(walk, peak)]
            parent[i] = up_idx
            parent_peak[i] = peak
            children[up_idx].append(i)
    return CanonicalTree(
        basis=basis,
        parent=parent,
        parent_peak=parent_peak,
        children=tuple(tuple(c) for c in children),
    )


def canonical_path(tree: CanonicalTree, start: int, goal: int) -> list[int]:
    """Route between two basis paths through tree ancestry.

    Alternates between cutting the designated peak of the shrinking start
    remnant and inserting the next peak of the growing goal prefix; the
    longer endpoint moves first.  Consecutive states differ by exactly one
    peak and the route has at most ``level(start) + level(goal)`` edges.
    """
    states, _ = canonical_path_with_moves(tree, start, goal)
    return states


def canonical_path_with_moves(
    tree: CanonicalTree, start: int, goal: int
) -> tuple[list[int], list[tuple[int, int, int]]]:
    """Route plus per-edge bookkeeping.

    Each move is ``(a, b, peak)`` for the transition from state ``a`` to
    state ``b``, where ``peak`` is the step index of the changed peak inside
    the longer of the two states.
    """
    basis = tree.basis
    if not 0 <= start < basis.size or not 0 <= goal < basis.size:
        raise InvalidSpec("endpoints must be basis indices")
    if start == goal:
        return [start], []
    shrink_chain = [basis.paths[j] for j in tree.ancestors(start)]
    grow_ancestry = tree.ancestors(goal)[::-1]
    grow_chain = [basis.paths[j] for j in grow_ancestry]
    grow_peaks = [int(tree.parent_peak[j]) for j in grow_ancestry]

    remnant = shrink_chain[0]
    shrink_pos = 0
    grow_pos = 0
    prefix: Walk = grow_chain[0]
    current = remnant
    states = [start]
    moves: list[tuple[int, int, int]] = []
    turn_shrink = basis.level_of[start] >= basis.level_of[goal]
    while shrink_pos < len(shrink_chain) - 1 or grow_pos < len(grow_chain) - 1:
        can_shrink = shrink_pos < len(shrink_chain) - 1
        can_grow = grow_pos < len(grow_chain) - 1
        do_shrink = can_shrink if turn_shrink else not can_grow
        a_idx = states[-1]
        if do_shrink:
            peak = int(tree.parent_peak[basis.index[remnant]])
            remnant = shrink_chain[shrink_pos + 1]
            shrink_pos += 1
            longer_peak = peak
        else:
            grow_pos += 1
            prefix = grow_chain[grow_pos]
            longer_peak = len(remnant) + grow_peaks[grow_pos]
        current = Walk(remnant.steps + prefix.steps)
        b_idx = basis.index[current]
        states.append(b_idx)
        moves.append((a_idx, b_idx, longer_peak))
        turn_shrink = not turn_shrink
    return states, moves


@dataclass
class EdgeLoadResult:
    """Canonical-path congestion certificate for the Dyck walk."""

    dim: int
    rho: float
    max_edge: tuple[int, int, int]
    path_length_max: int
    gap_bound: float
    lambda2: float
    gap_true: float

    def certified(self) -> bool:
        return self.gap_bound <= self.gap_true + 1e-12


def edge_load(tree: CanonicalTree, transition: TransitionMatrix) -> EdgeLoadResult:
    """Exact maximum edge load over all ordered endpoint pairs.

    Each directed transition between paths related by one peak may be
    realized by several distinct peaks; routing tracks which peak a path
    uses, and every such parallel way carries an equal share of the
    aggregate transition probability.  The load of a way divided by its
    probability flow bounds the relaxation: ``1 - lambda_2 >= 1/(rho L)``.
    """
    basis = tree.basis
    if basis.size**2 > PAIR_GUARD:
        raise SizeExceeded(
            f"{basis.size}**2 ordered pairs exceed the guard {PAIR_GUARD:.0e}"
        )
    if transition.basis is not basis and transition.basis.paths != basis.paths:
        raise InvalidSpec("tree and transition use different bases")
    pi = transition.stationary
    loads: dict[tuple[int, int, int], float] = {}
    longest = 0
    for a in range(basis.size):
        for b in range(basis.size):
            if a == b:
                continue
            _, moves = canonical_path_with_moves(tree, a, b)
            longest = max(longest, len(moves))
            weight = pi[a] * pi[b]
            for move in moves:
                loads[move] = loads.get(move, 0.0) + weight
    mult: dict[tuple[int, int], int] = {}
    for t_idx, walk in enumerate(basis.paths):
        for i in peak_positions(walk):
            u_idx = basis.index[remove_peak(walk, i)]
            mult[(u_idx, t_idx)] = mult.get((u_idx, t_idx), 0) + 1
    rho = 0.0
    argmax = (-1, -1, -1)
    for (a, b, peak), load in loads.items():
        ways = mult[(a, b) if basis.level_of[a] < basis.level_of[b] else (b, a)]
        per_way = transition.matrix[a, b] / ways
        value = load / (pi[a] * per_way)
        if value > rho:
            rho = value
            argmax = (a, b, peak)
    lambda2 = transition.second_eigenvalue()
    gap_true = 1.0 - lambda2
    gap_bound = 1.0 / (rho * longest) if rho > 0 and longest else math.inf
    return EdgeLoadResult(
        dim=basis.size,
        rho=rho,
        max_edge=argmax,
        path_length_max=longest,
        gap_bound=gap_bound,
        lambda2=lambda2,
        gap_true=gap_true,
    )


def level_fraction(two_n: int, s: int, w: int) -> float:
    """Share of colored Motzkin strings whose letters form a level ``w`` path."""
    return (
        s**w
        * catalan_number(w)
        * binomial(two_n, 2 * w)
        / motzkin_number(two_n, s)
    )


def level_weight_ratio(w: int, s: int) -> float:
    """How closely ``(4s)^w`` times a path's stationary weight tracks the level share.

    A single level ``w`` path has stationary weight ``binom(2n,2w)/M_{2n,s}``
    and the whole level holds ``s^w C_w`` such paths, so the ratio

        (4s)^w (path weight) / (sqrt(pi) w^{3/2} level share)

    equals ``4^w / (C_w sqrt(pi) w^{3/2})`` independently of the chain length
    and tends to one as the Catalan asymptotic takes hold.
    """
    if w < 1:
        raise InvalidSpec("need w >= 1")
    return 4.0**w / (catalan_number(w) * math.sqrt(math.pi) * w**1.5)


# ---------------------------------------------------------------------------
# Hopping chain of one unmatched letter
# ---------------------------------------------------------------------------


@dataclass
class UnbalancedChain:
    """Position-space chain felt by a single surplus letter.

    ``matrix`` is the full operator including the left-edge penalty;
    ``hopping`` is the penalty-free sum of rank-one hopping terms, which
    annihilates ``ground``.  ``rate_up[j]`` and ``rate_down[j]`` are the
    walk rates off site ``j+1`` (0-based storage of 1-based sites).
    """

    two_n: int
    s: int
    matrix: np.ndarray
    hopping: np.ndarray
    ground: np.ndarray
    alpha_sq: np.ndarray
    beta_sq: np.ndarray
    lambda1: float
    pi_first: float

    @property
    def rate_up(self) -> np.ndarray:
        return self.alpha_sq

    @property
    def rate_down(self) -> np.ndarray:
        return self.beta_sq


def build_unbalanced_chain(two_n: int, s: int) -> UnbalancedChain:
    """Assemble the surplus-letter chain from plain Motzkin-number ratios.

    Site ``j`` hops to ``j+1`` with squared amplitude
    ``M_{2n-j-1}/(2s M_{2n-j})`` and back with ``M_{j-1}/(2s M_j)``; the
    rank-one combination of each neighboring pair annihilates the vector
    with components ``sqrt(M_{j-1} M_{2n-j})``, so that vector is the
    ground state of the hopping part, and the extra ``|1><1|`` penalty
    lifts it to a positive energy reported as ``lambda1``.
    """
    if two_n < 2 or two_n % 2:
        raise InvalidSpec("two_n must be even and >= 2")
    if s < 1:
        raise InvalidSpec("need s >= 1")
    counts = [motzkin_number(k, 1) for k in range(two_n)]
    alpha_sq = np.array(
        [counts[two_n - j - 1] / (2 * s * counts[two_n - j]) for j in range(1, two_n)]
    )
    beta_sq = np.array(
        [counts[j - 1] / (2 * s * counts[j]) for j in range(1, two_n)]
    )
    hopping = np.zeros((two_n, two_n))
    for j in range(two_n - 1):
        vec = np.zeros(two_n)
        vec[j] = math.sqrt(alpha_sq[j])
        vec[j + 1] = -math.sqrt(beta_sq[j])
        hopping += np.outer(vec, vec)
    matrix = hopping.copy()
    matrix[0, 0] += 1.0
    ground = np.array(
        [
            s ** (two_n // 2) / math.sqrt(s)
            * math.sqrt(counts[j - 1] * counts[two_n - j])
            for j in range(1, two_n + 1)
        ]
    )
    ground /= np.linalg.norm(ground)
    lambda1 = float(np.linalg.eigvalsh(matrix)[0])
    return UnbalancedChain(
        two_n=two_n,
        s=s,
        matrix=matrix,
        hopping=hopping,
        ground=ground,
        alpha_sq=alpha_sq,
        beta_sq=beta_sq,
        lambda1=lambda1,
        pi_first=float(ground[0] ** 2),
    )
