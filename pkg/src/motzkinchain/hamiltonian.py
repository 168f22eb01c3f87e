"""Frustration-free chain Hamiltonian whose ground state is the uniform
superposition of colored Motzkin walks.

Sites carry ``d = 2s + 1`` states: one flat letter, ``s`` left letters, and
``s`` right letters.  A basis configuration is the base-``d`` integer whose
most significant digit is site 1; digit ``0`` is flat, digits ``1..s`` are
the left colors, digits ``s+1..2s`` the right colors.

The energy is a sum of local projectors.  On each neighboring pair the three
move families project onto antisymmetrized combinations

    |0 r>  - |r 0>,     |0 l> - |l 0>,     |0 0> - |l r>   (per color),

cross-color ``|l^k r^i>`` pairs are penalized directly for ``k != i``, and
the Motzkin boundary penalizes a right letter on site 1 or a left letter on
the last site.  Open and periodic variants drop the boundary term; a weak
external field adds ``(eps0 / two_n)`` times the non-flat letter count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidSpec, NoConvergence, SizeExceeded
from .walks import Walk, enumerate_walks

DIMENSION_GUARD = 2 * 10**7
DEGENERACY_TOL = 1e-8
DEFAULT_SEED = 42

BOUNDARIES = ("motzkin", "open", "periodic")


@dataclass(frozen=True)
class ChainSpec:
    """Parameters selecting one chain Hamiltonian."""

    two_n: int
    s: int
    boundary: str = "motzkin"
    field_epsilon0: float = 0.0

    def __post_init__(self):
        if self.two_n < 2 or self.two_n % 2:
            raise InvalidSpec("two_n must be an even integer >= 2")
        if self.s < 1:
            raise InvalidSpec("color count s must be >= 1")
        if self.boundary not in BOUNDARIES:
            raise InvalidSpec(f"boundary must be one of {BOUNDARIES}")
        if not (self.field_epsilon0 >= 0.0):
            raise InvalidSpec("field_epsilon0 must be >= 0")

    @property
    def d(self) -> int:
        return 2 * self.s + 1

    @property
    def dim(self) -> int:
        return self.d**self.two_n

    def check_size(self) -> None:
        if self.dim > DIMENSION_GUARD:
            raise SizeExceeded(
                f"dimension {self.d}**{self.two_n} exceeds the guard {DIMENSION_GUARD:.0e}"
            )


@dataclass
class SparseOperator:
    """A real symmetric operator with its assembly metadata."""

    matrix: sp.csr_matrix
    name: str

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def norm_inf(self) -> float:
        """Max absolute row sum; upper-bounds the spectral norm."""
        return float(np.max(np.abs(self.matrix).sum(axis=1))) if self.matrix.nnz else 0.0

    def symmetry_defect(self) -> float:
        delta = self.matrix - self.matrix.T
        return float(np.max(np.abs(delta.data))) if delta.nnz else 0.0


# ---------------------------------------------------------------------------
# Local blocks
# ---------------------------------------------------------------------------


def _pair_vectors(s: int) -> list[tuple[str, np.ndarray]]:
    """The rank-one projector directions on a neighboring pair of sites."""
    d = 2 * s + 1
    out = []
    for k in range(1, s + 1):
        right = np.zeros(d * d)
        right[0 * d + s + k] = 1.0 / math.sqrt(2.0)
        right[(s + k) * d + 0] = -1.0 / math.sqrt(2.0)
        out.append((f"shift-right-{k}", right))
        left = np.zeros(d * d)
        left[0 * d + k] = 1.0 / math.sqrt(2.0)
        left[k * d + 0] = -1.0 / math.sqrt(2.0)
        out.append((f"shift-left-{k}", left))
        pair = np.zeros(d * d)
        pair[0] = 1.0 / math.sqrt(2.0)
        pair[k * d + s + k] = -1.0 / math.sqrt(2.0)
        out.append((f"create-pair-{k}", pair))
    return out


def _cross_indices(s: int) -> list[int]:
    d = 2 * s + 1
    return [k * d + s + i for k in range(1, s + 1) for i in range(1, s + 1) if i != k]


def pair_block(s: int, include_moves: bool = True, include_cross: bool = True) -> np.ndarray:
    """Dense ``d**2 x d**2`` two-site energy block."""
    d = 2 * s + 1
    block = np.zeros((d * d, d * d))
    if include_moves:
        for _, vec in _pair_vectors(s):
            block += np.outer(vec, vec)
    if include_cross:
        for idx in _cross_indices(s):
            block[idx, idx] += 1.0
    return block


def move_block(s: int, families: str = "all") -> np.ndarray:
    """Two-site block restricted to chosen move families.

    ``families`` is ``"all"``, ``"shift"`` (letter-flat exchanges only), or
    ``"pair"`` (creation and annihilation of a colored pair only).
    """
    if families not in ("all", "shift", "pair"):
        raise InvalidSpec(f"unknown family selector {families!r}")
    d = 2 * s + 1
    block = np.zeros((d * d, d * d))
    for name, vec in _pair_vectors(s):
        if families == "shift" and name.startswith("create-pair"):
            continue
        if families == "pair" and not name.startswith("create-pair"):
            continue
        block += np.outer(vec, vec)
    return block


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


def _place_pair(block: np.ndarray, j: int, two_n: int, d: int) -> sp.coo_matrix:
    """Embed a two-site block on sites ``(j, j+1)``, 1-based."""
    left = sp.identity(d ** (j - 1), format="coo")
    right = sp.identity(d ** (two_n - j - 1), format="coo")
    return sp.kron(sp.kron(left, sp.coo_matrix(block)), right)

def _place_wrap(block: np.ndarray, two_n: int, d: int) -> sp.coo_matrix:
    """Embed a two-site block on the wrap-around pair (site 2n, site 1)."""
    mid = d ** (two_n - 2)
    mids = np.arange(mid, dtype=np.int64) * d
    rows, cols, vals = [], [], []
    nz = np.argwhere(np.abs(block) > 0)
    for (rc, cc) in nz:
        a, b = divmod(int(rc), d)      # a on site 2n, b on site 1
        a2, b2 = divmod(int(cc), d)
        rows.append(b * d ** (two_n - 1) + mids + a)
        cols.append(b2 * d ** (two_n - 1) + mids + a2)
        vals.append(np.full(mid, block[rc, cc]))
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(d**two_n, d**two_n),
    )


def _site_digits(dim: int, site: int, two_n: int, d: int) -> np.ndarray:
    """Digit of every configuration at a 1-based site."""
    stride = d ** (two_n - site)
    return (np.arange(dim, dtype=np.int64) // stride) % d


def boundary_diagonal(two_n: int, s: int) -> np.ndarray:
    """Penalty vector: right letter on site 1 plus left letter on site 2n."""
    d = 2 * s + 1
    dim = d**two_n
    first = _site_digits(dim, 1, two_n, d)
    last = _site_digits(dim, two_n, two_n, d)
    return ((first > s).astype(float)) + (((last >= 1) & (last <= s)).astype(float))


def field_diagonal(two_n: int, s: int) -> np.ndarray:
    """Non-flat letter count of every configuration."""
    d = 2 * s + 1
    dim = d**two_n
    out = np.zeros(dim)
    for site in range(1, two_n + 1):
        out += (_site_digits(dim, site, two_n, d) > 0).astype(float)
    return out


def _bulk_pairs(spec: ChainSpec) -> range:
    return range(1, spec.two_n)


def build_hamiltonian(spec: ChainSpec) -> SparseOperator:
    """Assemble the full chain Hamiltonian for ``spec`` as a CSR matrix."""
    spec.check_size()
    d = spec.d
    block = pair_block(spec.s)
    total = sp.coo_matrix((spec.dim, spec.dim))
    for j in _bulk_pairs(spec):
        total += _place_pair(block, j, spec.two_n, d)
    if spec.boundary == "periodic":
        total += _place_wrap(block, spec.two_n, d)
    total = total.tocsr()
    if spec.boundary == "motzkin":
        total += sp.diags(boundary_diagonal(spec.two_n, spec.s))
    if spec.field_epsilon0 > 0.0:
        total += sp.diags(
            (spec.field_epsilon0 / spec.two_n) * field_diagonal(spec.two_n, spec.s)
        )
    op = SparseOperator(matrix=total.tocsr(), name=f"H[{spec.boundary}]")
    defect = op.symmetry_defect()
    if defect > 1e-14:
        raise InvalidSpec(f"assembled operator lost symmetry (defect {defect:g})")
    return op


def build_move_part(spec: ChainSpec) -> SparseOperator:
    """Only the letter-flat exchange projectors, on every bulk pair."""
    spec.check_size()
    block = move_block(spec.s, families="shift")
    total = sp.coo_matrix((spec.dim, spec.dim))
    for j in _bulk_pairs(spec):
        total += _place_pair(block, j, spec.two_n, spec.d)
    if spec.boundary == "periodic":
        total += _place_wrap(block, spec.two_n, spec.d)
    return SparseOperator(matrix=total.tocsr(), name="H[move]")


def build_interaction_part(spec: ChainSpec) -> SparseOperator:
    """Only the pair creation/annihilation projectors, on every bulk pair."""
    spec.check_size()
    block = move_block(spec.s, families="pair")
    total = sp.coo_matrix((spec.dim, spec.dim))
    for j in _bulk_pairs(spec):
        total += _place_pair(block, j, spec.two_n, spec.d)
    if spec.boundary == "periodic":
        total += _place_wrap(block, spec.two_n, spec.d)
    return SparseOperator(matrix=total.tocsr(), name="H[interaction]")


def iter_projector_terms(spec: ChainSpec) -> Iterator[tuple[str, sp.csr_matrix]]:
    """Yield every individual projector term of the Hamiltonian."""
    spec.check_size()
    d = spec.d
    for j in _bulk_pairs(spec):
        for name, vec in _pair_vectors(spec.s):
            yield f"pair({j},{j + 1}):{name}", _place_pair(
                np.outer(vec, vec), j, spec.two_n, d
            ).tocsr()
        cross = np.zeros((d * d, d * d))
        for idx in _cross_indices(spec.s):
            cross[idx, idx] = 1.0
        if spec.s > 1:
            yield f"pair({j},{j + 1}):cross", _place_pair(cross, j, spec.two_n, d).tocsr()
    if spec.boundary == "periodic":
        for name, vec in _pair_vectors(spec.s):
            yield f"wrap:{name}", _place_wrap(np.outer(vec, vec), spec.two_n, d).tocsr()
        if spec.s > 1:
            cross = np.zeros((d * d, d * d))
            for idx in _cross_indices(spec.s):
                cross[idx, idx] = 1.0
            yield "wrap:cross", _place_wrap(cross, spec.two_n, d).tocsr()
    if spec.boundary == "motzkin":
        yield "boundary", sp.diags(boundary_diagonal(spec.two_n, spec.s)).tocsr()


# ---------------------------------------------------------------------------
# Matrix-free backend
# ---------------------------------------------------------------------------


def matvec_operator(spec: ChainSpec) -> spla.LinearOperator:
    """Matrix-free application of the same Hamiltonian.

    Agrees with the assembled matrix to near machine precision; useful when
    the triplet assembly is the memory bottleneck.
    """
    spec.check_size()
    d = spec.d
    dim = spec.dim
    block = pair_block(spec.s)
    block4 = block.reshape(d, d, d, d)
    diag = np.zeros(dim)
    if spec.boundary == "motzkin":
        diag += boundary_diagonal(spec.two_n, spec.s)
    if spec.field_epsilon0 > 0.0:
        diag += (spec.field_epsilon0 / spec.two_n) * field_diagonal(spec.two_n, spec.s)

    def apply(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v).reshape(dim)
        out = diag * v
        for j in _bulk_pairs(spec):
            left = d ** (j - 1)
            right = d ** (spec.two_n - j - 1)
            v3 = v.reshape(left, d * d, right)
            out += np.einsum("pq,lqr->lpr", block, v3).reshape(dim)
        if spec.boundary == "periodic":
            v3 = v.reshape(d, d ** (spec.two_n - 2), d)
            out += np.einsum("abcd,dmc->bma", block4, v3).reshape(dim)
        return out

    return spla.LinearOperator((dim, dim), matvec=apply, dtype=float)


# ---------------------------------------------------------------------------
# Ground state
# ---------------------------------------------------------------------------


def walk_to_index(walk: Walk, s: int) -> int:
    """Map a walk to its basis configuration (site 1 most significant)."""
    d = 2 * s + 1
    idx = 0
    for step in walk:
        if step.kind == "0":
            digit = 0
        elif step.kind == "u":
            digit = step.color
        else:
            digit = s + step.color
        if step.color > s:
            raise InvalidSpec(f"walk uses color {step.color} > s = {s}")
        idx = idx * d + digit
    return idx


def motzkin_indices(two_n: int, s: int) -> np.ndarray:
    """Sorted basis indices of all colored Motzkin configurations."""
    idx = [walk_to_index(w, s) for w in enumerate_walks(two_n, s, "motzkin")]
    return np.array(sorted(idx), dtype=np.int64)


def state_vector(two_n: int, s: int) -> np.ndarray:
    """Normalized uniform superposition over colored Motzkin configurations."""
    spec = ChainSpec(two_n=two_n, s=s)
    spec.check_size()
    idx = motzkin_indices(two_n, s)
    vec = np.zeros(spec.dim)
    vec[idx] = 1.0 / math.sqrt(len(idx))
    return vec


def restrict_to_indices(op: SparseOperator, indices: np.ndarray) -> np.ndarray:
    """Dense restriction of an operator to a basis-index subset."""
    sub = op.matrix[indices][:, indices]
    return np.asarray(sub.todense())


# ---------------------------------------------------------------------------
# Eigensolving
# ---------------------------------------------------------------------------


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    ground_degeneracy: int
    norm_bound: float
    method: str

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def gap(self) -> float:
        if self.eigenvalues.size < 2:
            raise InvalidSpec("need at least two eigenvalues for a gap")
        return float(self.eigenvalues[1] - self.eigenvalues[0])


_DENSE_CUTOFF = 2048


def lowest_spectrum(
    op: SparseOperator | sp.spmatrix,
    k: int = 2,
    seed: int = DEFAULT_SEED,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> SpectrumResult:
    """The ``k`` smallest eigenvalues with certified residuals.

    Small problems are solved densely; larger ones use a Lanczos solve with
    a seeded deterministic start vector and growing subspace sizes.  Each
    returned pair must satisfy ``|H v - lambda v| <= 1e-9 * |H|_inf``, else
    :class:`NoConvergence` is raised with the best residual seen.
    """
    matrix = op.matrix if isinstance(op, SparseOperator) else sp.csr_matrix(op)
    dim = matrix.shape[0]
    if k < 1:
        raise InvalidSpec("k must be >= 1")
    k = min(k, dim)
    norm = float(np.max(np.abs(matrix).sum(axis=1))) if matrix.nnz else 0.0
    threshold = 1e-9 * max(norm, 1.0)

    def certify(values: np.ndarray, vectors: np.ndarray, method: str) -> SpectrumResult:
        order = np.argsort(values)
        values = values[order]
        vectors = vectors[:, order]
        residuals = np.array(
            [
                float(np.linalg.norm(matrix @ vectors[:, i] - values[i] * vectors[:, i]))
                for i in range(values.size)
            ]
        )
        if np.any(residuals > threshold):
            raise NoConvergence(
                f"residual {residuals.max():.3e} above {threshold:.3e}",
                best_residual=float(residuals.max()),
            )
        degeneracy = int(np.sum(values <= values[0] + degeneracy_tol))
        return SpectrumResult(
            eigenvalues=values,
            residuals=residuals,
            ground_degeneracy=degeneracy,
            norm_bound=norm,
            method=method,
        )

    if dim <= _DENSE_CUTOFF or k >= dim - 1:
        dense = matrix.toarray()
        values, vectors = np.linalg.eigh(dense)
        return certify(values[:k], vectors[:, :k], "dense")

    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim)
    v0 /= np.linalg.norm(v0)
    last_error: Exception | None = None
    for ncv in (max(2 * k + 1, 40), 80, 160):
        if ncv >= dim:
            break
        try:
            values, vectors = spla.eigsh(
                matrix, k=k, which="SA", v0=v0, ncv=ncv, maxiter=40000, tol=0
            )
            return certify(values, vectors, f"lanczos(ncv={ncv})")
        except (spla.ArpackNoConvergence, NoConvergence) as err:
            last_error = err
    best = getattr(last_error, "best_residual", None)
    raise NoConvergence(f"eigensolve failed for {dim}-dim operator: {last_error}", best)


@dataclass
class GapScanResult:
    rows: list[dict]
    slope: float
    stderr: float


def gap_scan(
    sizes: Sequence[int],
    s: int,
    boundary: str = "motzkin",
    seed: int = DEFAULT_SEED,
) -> GapScanResult:
    """Gap versus size, with the least-squares exponent of ``gap ~ n**(-nu)``.

    ``slope`` is the fitted coefficient of ``ln(gap)`` against ``ln(n)`` with
    ``n = two_n / 2``; ``stderr`` is its standard error.
    """
    if len(sizes) < 2:
        raise InvalidSpec("gap scans need at least two sizes")
    rows = []
    for two_n in sizes:
        spec = ChainSpec(two_n=two_n, s=s, boundary=boundary)
        result = lowest_spectrum(build_hamiltonian(spec), k=2, seed=seed)
        rows.append(
            {
                "two_n": two_n,
                "s": s,
                "lambda1": float(result.eigenvalues[0]),
                "lambda2": float(result.eigenvalues[1]),
                "gap": result.gap,
                "max_residual": float(result.residuals.max()),
            }
        )
    x = np.log([row["two_n"] / 2.0 for row in rows])
    y = np.log([row["gap"] for row in rows])
    if len(rows) > 2:
        coeffs, cov = np.polyfit(x, y, 1, cov=True)
        stderr = float(math.sqrt(cov[0, 0]))
    else:
        # two points determine the line exactly; no residual to scale by
        coeffs = np.polyfit(x, y, 1)
        stderr = 0.0
    return GapScanResult(rows=rows, slope=float(coeffs[0]), stderr=stderr)


# ---------------------------------------------------------------------------
# Local move classes
# ---------------------------------------------------------------------------


@dataclass
class MoveClasses:
    """Partition of all configurations under the local moves."""

    two_n: int
    s: int
    class_id: np.ndarray
    members: list[np.ndarray]
    labels: list[tuple[int, int] | None]

    @property
    def count(self) -> int:
        return len(self.members)


def _reduced_word(digits: Sequence[int], s: int) -> tuple[int, ...]:
    """Drop flats and cancel adjacent same-color up-down pairs."""
    out: list[int] = []
    for digit in digits:
        if digit == 0:
            continue
        if digit > s and out and out[-1] == digit - s:
            out.pop()
        else:
            out.append(digit)
    return tuple(out)


def _word_label(word: Sequence[int], s: int) -> tuple[int, int] | None:
    """(right-excess, left-excess) when the word is rights then lefts."""
    p = 0
    while p < len(word) and word[p] > s:
        p += 1
    if all(1 <= digit <= s for digit in word[p:]):
        return (p, len(word) - p)
    return None


def local_move_classes(two_n: int, s: int, periodic: bool = False) -> MoveClasses:
    """Union-find closure of the letter-flat and pair-creation moves."""
    spec = ChainSpec(two_n=two_n, s=s)
    spec.check_size()
    d = spec.d
    dim = spec.dim
    parent = np.arange(dim, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    # per-pair moves expressed on the two local digits
    swaps = []
    for k in range(1, s + 1):
        swaps.append((0 * d + s + k, (s + k) * d + 0))
        swaps.append((0 * d + k, k * d + 0))
        swaps.append((0 * d + 0, k * d + s + k))
    pair_positions = list(range(1, two_n)) + ([two_n] if periodic else [])
    for j in pair_positions:
        if j < two_n:
            hi = d ** (two_n - j)
            lo = d ** (two_n - j - 1)
            for config in range(dim):
                a = (config // hi) % d
                b = (config // lo) % d
                local = a * d + b
                base = config - a * hi - b * lo
                for x, y in swaps:
                    if local == x:
                        union(config, base + (y // d) * hi + (y % d) * lo)
                    elif local == y:
                        union(config, base + (x // d) * hi + (x % d) * lo)
        else:
            hi = d ** (two_n - 1)
            for config in range(dim):
                a = config % d               # site 2n
                b = config // hi             # site 1
                local = a * d + b
                base = config - a - b * hi
                for x, y in swaps:
                    if local == x:
                        union(config, base + (y // d) + (y % d) * hi)
                    elif local == y:
                        union(config, base + (x // d) + (x % d) * hi)
    roots = np.array([find(int(x)) for x in range(dim)], dtype=np.int64)
    unique_roots, class_id = np.unique(roots, return_inverse=True)
    members = [np.flatnonzero(class_id == c) for c in range(unique_roots.size)]
    labels = []
    base_digits = [
        [(int(rep) // d ** (two_n - site)) % d for site in range(1, two_n + 1)]
        for rep in unique_roots
    ]
    for digits in base_digits:
        labels.append(_word_label(_reduced_word(digits, s), s))
    return MoveClasses(two_n=two_n, s=s, class_id=class_id, members=members, labels=labels)


def reduced_word_of_config(config: int, two_n: int, s: int) -> tuple[int, ...]:
    d = 2 * s + 1
    digits = [(config // d ** (two_n - site)) % d for site in range(1, two_n + 1)]
    return _reduced_word(digits, s)


# ---------------------------------------------------------------------------
# Frustration-freeness report
# ---------------------------------------------------------------------------


@dataclass
class FrustrationReport:
    lambda1: float
    ground_degeneracy: int
    max_term_energy: float
    overlap_with_walk_state: float
    passed: bool
    term_energies: dict = field(default_factory=dict)


def verify_frustration_free(spec: ChainSpec, seed: int = DEFAULT_SEED) -> FrustrationReport:
    """Check that the walk superposition is annihilated term by term and is
    the unique ground state at zero energy."""
    if spec.boundary != "motzkin" or spec.field_epsilon0:
        raise InvalidSpec("frustration-freeness is checked for the bare motzkin chain")
    psi = state_vector(spec.two_n, spec.s)
    term_energies = {}
    for label, term in iter_projector_terms(spec):
        term_energies[label] = float(psi @ (term @ psi))
    op = build_hamiltonian(spec)
    result = lowest_spectrum(op, k=2, seed=seed)
    # eigsh returns the eigenvector of the smallest eigenvalue deterministically
    if op.dim <= _DENSE_CUTOFF:
        dense = op.matrix.toarray()
        _, vectors = np.linalg.eigh(dense)
        ground = vectors[:, 0]
    else:
        _, vectors = spla.eigsh(
            op.matrix, k=1, which="SA",
            v0=np.random.default_rng(seed).standard_normal(op.dim), tol=0
        )
        ground = vectors[:, 0]
    overlap = abs(float(ground @ psi))
    max_term = max(abs(v) for v in term_energies.values())
    passed = (
        abs(result.lambda1) <= 1e-10
        and result.ground_degeneracy == 1
        and max_term <= 1e-12
        and overlap > 1.0 - 1e-9
    )
    return FrustrationReport(
        lambda1=result.lambda1,
        ground_degeneracy=result.ground_degeneracy,
        max_term_energy=max_term,
        overlap_with_walk_state=overlap,
        passed=passed,
        term_energies=term_energies,
    )
