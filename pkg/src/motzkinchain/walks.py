"""Colored Motzkin walk combinatorics.

A walk is a string of flat, up, and down steps on the half line.  Up and down
steps carry a color from ``1..s``; a walk is a (colored) Motzkin walk when it
never dips below zero, ends at zero, and every down step closes the most
recent still-open up step of the same color.  Dyck walks are the flat-free
special case.

The module offers two arithmetic routes for the counting functions:

* exact arbitrary-precision integers, used for half-chain lengths up to
  ``EXACT_LIMIT``;
* natural-log floating point built on ``gammaln`` with log-sum-exp
  accumulation, usable far beyond that.

``CountTable`` bundles both and is the input to the Schmidt-spectrum and
external-field modules.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InvalidSpec, ParseError, SizeExceeded

EXACT_LIMIT = 300
ENUMERATION_GUARD = 10**8

FLAT = "0"
UP = "u"
DOWN = "d"


@dataclass(frozen=True, order=True)
class Step:
    """One walk step: ``kind`` is '0', 'u', or 'd'; color is 0 for flat steps.

    The field order makes tuple comparison coincide with the canonical token
    ordering used throughout the package: flat before down before up, colors
    ascending within a kind.
    """

    kind: str
    color: int = 0

    def __post_init__(self):
        if self.kind not in (FLAT, UP, DOWN):
            raise InvalidSpec(f"unknown step kind {self.kind!r}")
        if self.kind == FLAT and self.color != 0:
            raise InvalidSpec("flat steps carry no color")
        if self.kind != FLAT and self.color < 1:
            raise InvalidSpec("step colors are 1-based")

    def token(self) -> str:
        if self.kind == FLAT:
            return "0"
        return f"{self.kind}{self.color}"

    @property
    def rise(self) -> int:
        if self.kind == UP:
            return 1
        if self.kind == DOWN:
            return -1
        return 0


@lru_cache(maxsize=None)
def _cached_step(kind: str, color: int) -> Step:
    return Step(kind, color)


def flat() -> Step:
    return _cached_step(FLAT, 0)


def up(color: int) -> Step:
    return _cached_step(UP, color)


def down(color: int) -> Step:
    return _cached_step(DOWN, color)


@dataclass(frozen=True)
class Walk:
    """An immutable sequence of steps."""

    steps: tuple[Step, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    @classmethod
    def from_text(cls, text: str) -> "Walk":
        return decode_walk(text)

    def text(self) -> str:
        return encode_walk(self)


def encode_walk(walk: Walk) -> str:
    """Render a walk as space-separated tokens, e.g. ``"u2 0 d2"``."""
    return " ".join(step.token() for step in walk)


def decode_walk(text: str) -> Walk:
    """Parse the token format produced by :func:`encode_walk`.

    Raises :class:`ParseError` carrying the byte offset of the first bad
    token.  Empty input decodes to the empty walk.
    """
    steps: list[Step] = []
    offset = 0
    n = len(text)
    while offset < n:
        if text[offset] == " ":
            offset += 1
            continue
        end = text.find(" ", offset)
        if end == -1:
            end = n
        token = text[offset:end]
        if token == "0":
            steps.append(flat())
        elif token[0] in (UP, DOWN) and token[1:].isdigit():
            color = int(token[1:])
            if color < 1:
                raise ParseError(f"color in token {token!r} must be >= 1", offset)
            steps.append(Step(token[0], color))
        else:
            raise ParseError(f"unrecognized token {token!r}", offset)
        offset = end
    return Walk(tuple(steps))


def heights(walk: Walk) -> tuple[int, ...]:
    """Height after each step; the walk starts at height zero."""
    out = []
    h = 0
    for step in walk:
        h += step.rise
        out.append(h)
    return tuple(out)


def end_height(walk: Walk) -> int:
    return sum(step.rise for step in walk)


def walk_area(walk: Walk) -> int:
    """Area under the walk: the sum of heights after each step."""
    return sum(heights(walk))


def _scan(walk: Walk) -> tuple[bool, list[int]]:
    """Stack-discipline scan.  Returns (valid, open colors bottom to top)."""
    stack: list[int] = []
    for step in walk:
        if step.kind == UP:
            stack.append(step.color)
        elif step.kind == DOWN:
            if not stack or stack[-1] != step.color:
                return False, stack
            stack.pop()
    return True, stack


def is_valid_prefix(walk: Walk) -> bool:
    """True when the walk never dips below zero and every down step closes an
    open up step of its own color."""
    ok, _ = _scan(walk)
    return ok


def is_motzkin(walk: Walk) -> bool:
    """True for a complete colored Motzkin walk (valid prefix ending at 0)."""
    ok, stack = _scan(walk)
    return ok and not stack


def is_dyck(walk: Walk) -> bool:
    """True for a colored Dyck walk: a Motzkin walk with no flat steps."""
    return all(step.kind != FLAT for step in walk) and is_motzkin(walk)


def _alphabet(colors: int, with_flat: bool) -> list[Step]:
    steps = [flat()] if with_flat else []
    steps += [down(c) for c in range(1, colors + 1)]
    steps += [up(c) for c in range(1, colors + 1)]
    return sorted(steps)


def enumerate_walks(
    length: int,
    colors: int,
    kind: str = "all",
    target_height: int | None = None,
) -> Iterator[Walk]:
    """Yield walks of the given length in canonical lexicographic order.

    ``kind`` selects the family:

    * ``"all"``: every string over the (2s+1)-letter alphabet;
    * ``"motzkin"``: complete colored Motzkin walks;
    * ``"dyck"``: complete colored Dyck walks (no flat steps);
    * ``"end-height"``: valid prefixes ending at ``target_height``.

    Filtered kinds are generated by depth-first search that prunes invalid
    prefixes, so only viable walks are visited.  The guard therefore bounds
    the number of walks the request would yield, not the raw candidate
    space; counts beyond ``ENUMERATION_GUARD`` raise :class:`SizeExceeded`.
    """
    if length < 0 or colors < 1:
        raise InvalidSpec("length must be >= 0 and colors >= 1")
    if kind not in ("all", "motzkin", "dyck", "end-height"):
        raise InvalidSpec(f"unknown walk family {kind!r}")
    if kind == "end-height":
        if target_height is None:
            raise InvalidSpec("end-height enumeration needs target_height")
        if target_height < 0:
            raise InvalidSpec("target_height must be >= 0")
    elif target_height is not None:
        raise InvalidSpec(f"target_height does not apply to kind {kind!r}")
    if kind == "all":
        yield_count = (2 * colors + 1) ** length
    elif kind == "dyck":
        yield_count = (
            0 if length % 2 else colors ** (length // 2) * catalan_number(length // 2)
        )
    elif kind == "motzkin":
        yield_count = motzkin_number(length, colors)
    else:
        yield_count = colored_halfwalk_count(length, target_height, colors)
    if yield_count > ENUMERATION_GUARD:
        raise SizeExceeded(
            f"{yield_count} walks of kind {kind!r} exceed the enumeration "
            f"guard {ENUMERATION_GUARD:.0e}"
        )

    if kind == "all":
        alphabet = _alphabet(colors, with_flat=True)
        prefix: list[Step] = []

        def rec_all(remaining: int) -> Iterator[Walk]:
            if remaining == 0:
                yield Walk(tuple(prefix))
                return
            for step in alphabet:
                prefix.append(step)
                yield from rec_all(remaining - 1)
                prefix.pop()

        yield from rec_all(length)
        return

    goal = 0 if kind in ("motzkin", "dyck") else target_height
    use_flat = kind != "dyck"
    alphabet = _alphabet(colors, with_flat=use_flat)
    prefix = []
    stack: list[int] = []

    def rec(remaining: int) -> Iterator[Walk]:
        if remaining == 0:
            if len(stack) == goal:
                yield Walk(tuple(prefix))
            return
        # the walk cannot come back far enough, or cannot climb high enough
        if len(stack) - remaining > goal or len(stack) + remaining < goal:
            return
        for step in alphabet:
            if step.kind == DOWN and (not stack or stack[-1] != step.color):
                continue
            if step.kind == UP:
                stack.append(step.color)
            elif step.kind == DOWN:
                stack.pop()
            prefix.append(step)
            yield from rec(remaining - 1)
            prefix.pop()
            if step.kind == UP:
                stack.pop()
            elif step.kind == DOWN:
                stack.append(step.color)

    yield from rec(length)


# ---------------------------------------------------------------------------
# Exact integer counting
# ---------------------------------------------------------------------------

_PASCAL: list[list[int]] = [[1]]


def binomial(n: int, k: int) -> int:
    """Binomial coefficient from a row-cached Pascal triangle."""
    if k < 0 or k > n:
        return 0
    while len(_PASCAL) <= n:
        prev = _PASCAL[-1]
        row = [1] + [prev[i] + prev[i + 1] for i in range(len(prev) - 1)] + [1]
        _PASCAL.append(row)
    return _PASCAL[n][k]


def catalan_number(w: int) -> int:
    if w < 0:
        raise DomainError("Catalan numbers need w >= 0")
    return binomial(2 * w, w) - binomial(2 * w, w - 1)


def ballot_count(length: int, m: int) -> int:
    """Number of one-colored nonnegative up/down walks from 0 to ``m``.

    Nonzero only when ``length`` and ``m`` have equal parity and
    ``0 <= m <= length``; with ``length = 2i + m`` the count is
    ``C(2i+m, i) - C(2i+m, i-1)`` by the reflection principle.
    """
    if m < 0 or m > length or (length - m) % 2:
        return 0
    i = (length - m) // 2
    return binomial(length, i) - binomial(length, i - 1)


def colored_halfwalk_count(n: int, m: int, s: int) -> int:
    """Count length-``n`` colored Motzkin prefixes ending at height ``m``.

    Interior matched pairs contribute a free color choice each (factor
    ``s``); the colors of the ``m`` still-open up steps are not counted.
    The sum runs over the number ``i`` of matched pairs:

        sum_i  C(n, 2i+m) * ballot(2i+m, m) * s**i
    """
    if s < 1:
        raise InvalidSpec("color count s must be >= 1")
    if m < 0 or m > n:
        return 0
    total = 0
    for i in range((n - m) // 2 + 1):
        total += binomial(n, 2 * i + m) * ballot_count(2 * i + m, m) * s**i
    return total


def motzkin_number(length: int, s: int = 1) -> int:
    """Count complete s-colored Motzkin walks of the given length.

    Sums over the number ``w`` of matched pairs: choose the 2w non-flat
    positions, a Dyck shape on them, and a color per pair:

        sum_w  s**w * Catalan(w) * C(length, 2w)
    """
    if s < 1:
        raise InvalidSpec("color count s must be >= 1")
    if length < 0:
        raise DomainError("length must be >= 0")
    return sum(
        s**w * catalan_number(w) * binomial(length, 2 * w)
        for w in range(length // 2 + 1)
    )


def halfwalk_table(max_length: int, s: int) -> list[list[int]]:
    """DP table ``T[L][h]`` of colored prefix counts, heights ``0..max_length``.

    Independent route from :func:`colored_halfwalk_count`: the transfer
    recurrence, read off the final step of the prefix, is

        T[L][h] = T[L-1][h] + T[L-1][h-1] + s * T[L-1][h+1]

    (flat, fresh unmatched up, and a down completing a colored pair).
    """
    if s < 1:
        raise InvalidSpec("color count s must be >= 1")
    table = [[0] * (max_length + 2) for _ in range(max_length + 1)]
    table[0][0] = 1
    for L in range(1, max_length + 1):
        prev = table[L - 1]
        row = table[L]
        for h in range(L + 1):
            val = prev[h] + s * prev[h + 1]
            if h:
                val += prev[h - 1]
            row[h] = val
    return [row[: L + 1] for L, row in enumerate(table)]


def full_walk_count(n: int, s: int) -> int:
    """Count colored Motzkin walks of length ``2n`` by glueing half-walks.

    A walk splits at midpoint height ``m`` into a prefix whose ``m`` open
    colors are free and a suffix whose closing colors are forced, giving
    ``sum_m s**m * M(n,m,s)**2``.
    """
    total = 0
    for m in range(n + 1):
        half = colored_halfwalk_count(n, m, s)
        total += s**m * half * half
    return total


def dyck_area_total(length: int) -> int:
    """Total area under strictly positive Motzkin excursions.

    The excursions counted here have ``length + 2`` steps: they leave zero
    immediately, stay strictly positive, and return on the final step; the
    area is the sum of all post-step heights.  The total satisfies
    ``A(L+1) = 2 A(L) + 3 A(L-1)`` and closes to ``(3**(L+1) + (-1)**L)/4``.
    """
    if length < 1:
        raise DomainError("area totals start at interior length 1")
    return (3 ** (length + 1) + (-1) ** length) // 4


# ---------------------------------------------------------------------------
# Log-space counting
# ---------------------------------------------------------------------------


def _logsumexp(values: np.ndarray) -> float:
    if values.size == 0:
        return -math.inf
    peak = float(np.max(values))
    if peak == -math.inf:
        return -math.inf
    return peak + math.log(float(np.sum(np.exp(values - peak))))


class _LogFactorials:
    """Cached ``log(k!)`` lookups backed by ``gammaln``."""

    def __init__(self):
        self._table = gammaln(np.arange(2, dtype=float) + 1.0)

    def grow(self, n: int) -> np.ndarray:
        if n >= self._table.size:
            self._table = gammaln(np.arange(max(n + 1, 2 * self._table.size), dtype=float) + 1.0)
        return self._table


_LOG_FACT = _LogFactorials()


def log_binomial(n: np.ndarray | int, k: np.ndarray | int) -> np.ndarray | float:
    """Natural log of C(n, k), vectorized over both arguments; -inf outside range."""
    n_arr, k_arr = np.broadcast_arrays(np.asarray(n), np.asarray(k))
    table = _LOG_FACT.grow(int(np.max(n_arr, initial=1)))
    out = np.full(n_arr.shape, -math.inf)
    ok = (k_arr >= 0) & (k_arr <= n_arr)
    nn, kk = n_arr[ok], k_arr[ok]
    out[ok] = table[nn] - table[kk] - table[nn - kk]
    if np.isscalar(n) and np.isscalar(k):
        return float(out)
    return out


def log_colored_halfwalk_count(n: int, m: int, s: int) -> float:
    """Log-space version of :func:`colored_halfwalk_count`.

    The ballot difference is folded into the positive factor
    ``(m+1)/(i+m+1)`` so no cancellation occurs.
    """
    if s < 1:
        raise InvalidSpec("color count s must be >= 1")
    if m < 0 or m > n:
        return -math.inf
    i = np.arange((n - m) // 2 + 1)
    terms = (
        log_binomial(n, 2 * i + m)
        + log_binomial(2 * i + m, i)
        + np.log((m + 1.0) / (i + m + 1.0))
        + i * math.log(s)
    )
    return _logsumexp(terms)


# ---------------------------------------------------------------------------
# CountTable
# ---------------------------------------------------------------------------


@dataclass
class CountTable:
    """Half-walk counts for one ``(n, s)``: exact integers where feasible,
    natural logs always.

    ``halfwalk[m]`` is the count of length-``n`` prefixes ending at height
    ``m`` with open-step colors not counted; ``total`` is the full-walk count
    ``sum_m s**m halfwalk[m]**2`` for the doubled chain.
    """

    n: int
    s: int
    log_halfwalk: np.ndarray
    log_total: float
    halfwalk: list[int] | None = None
    total: int | None = None

    @classmethod
    def build(cls, n: int, s: int, mode: str = "auto") -> "CountTable":
        """``mode`` is ``"auto"`` (exact up to EXACT_LIMIT), ``"exact"``, or ``"log"``."""
        if n < 0:
            raise DomainError("n must be >= 0")
        if s < 1:
            raise InvalidSpec("color count s must be >= 1")
        if mode not in ("auto", "exact", "log"):
            raise InvalidSpec(f"unknown CountTable mode {mode!r}")
        if mode == "exact" and n > EXACT_LIMIT:
            raise SizeExceeded(f"exact tables stop at n = {EXACT_LIMIT}")
        exact = mode == "exact" or (mode == "auto" and n <= EXACT_LIMIT)
        if exact:
            counts = halfwalk_table(n, s)[n]
            total = sum(s**m * c * c for m, c in enumerate(counts))
            logs = np.array(
                [math.log(c) if c else -math.inf for c in counts], dtype=float
            )
            return cls(
                n=n,
                s=s,
                log_halfwalk=logs,
                log_total=math.log(total),
                halfwalk=counts,
                total=total,
            )
        log_s = math.log(s)
        logs = np.array(
            [log_colored_halfwalk_count(n, m, s) for m in range(n + 1)], dtype=float
        )
        m_arr = np.arange(n + 1)
        log_total = _logsumexp(m_arr * log_s + 2.0 * logs)
        return cls(n=n, s=s, log_halfwalk=logs, log_total=log_total)

    def log_schmidt_weight(self) -> np.ndarray:
        """Log of ``s**m * p_m`` for each ``m``; the weights sum to one."""
        m = np.arange(self.n + 1)
        return m * math.log(self.s) + 2.0 * self.log_halfwalk - self.log_total

    def schmidt_probability(self, m: int) -> Fraction:
        """Exact Schmidt coefficient ``halfwalk[m]**2 / total`` (exact mode only)."""
        if self.halfwalk is None:
            raise InvalidSpec("exact Schmidt probabilities need an exact table")
        return Fraction(self.halfwalk[m] ** 2, self.total)

    def to_csv(self, path: str | os.PathLike) -> None:
        """Write rows ``n,m,s,count_log_e,count_exact_or_empty`` atomically."""
        rows = []
        for m in range(self.n + 1):
            exact = str(self.halfwalk[m]) if self.halfwalk is not None else ""
            rows.append([self.n, m, self.s, f"{self.log_halfwalk[m]:.17g}", exact])
        write_csv_atomic(path, ["n", "m", "s", "count_log_e", "count_exact_or_empty"], rows)


def write_csv_atomic(
    path: str | os.PathLike, header: Sequence[str], rows: Sequence[Sequence]
) -> None:
    """Write a CSV with LF line endings via a temp file and atomic rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
