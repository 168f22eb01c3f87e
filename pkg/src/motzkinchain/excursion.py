"""Brownian-excursion area tools and the phase-twisted trial state.

The area under a standard Brownian excursion has a density expressible
through the zeros of the Airy function and a confluent hypergeometric
factor, with moments generated by a simple rational recursion.  Both are
implemented here and cross-validated against each other by quadrature.

The same area statistic controls a variational estimate on the spin
chain: multiplying each Motzkin string's ground-state amplitude by a
phase proportional to the area under its walk costs an energy that can
be computed exactly by prefix/suffix transfer sums, without enumerating
strings.  That energy, doubled, upper-bounds the spectral gap whenever
the twisted state keeps at most half its weight on the ground state.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import airy, hyperu

from .errors import (
    DomainError,
    InvalidSpec,
    NoConvergence,
    OverlapTooLarge,
    SizeExceeded,
)
from .walks import Walk, is_motzkin, motzkin_number, walk_area

DEFAULT_ZERO_COUNT = 40
SERIES_TOL = 1e-12
QUADRATURE_RANGE = (1e-3, 3.0)

# Largest sizes the exact trial-state sums accept, per color count; other
# color counts fall back to a cap on the Motzkin string count itself.
TRIAL_SIZE_LIMITS = {1: 18, 2: 12}
TRIAL_COUNT_GUARD = 10**7

# The twist angle that balances phase decay against energy cost scales as
# sqrt(3)/(2 sqrt(5/3 - pi/2)) times n^{-3/2}.
TWIST_CONSTANT = math.sqrt(3.0) / (2.0 * math.sqrt(5.0 / 3.0 - math.pi / 2.0))


def _ai(x: float) -> float:
    return float(airy(x)[0])


def airy_zeros(count: int = DEFAULT_ZERO_COUNT) -> np.ndarray:
    """First ``count`` zeros of Ai on the negative axis, descending.

    Each zero is bracketed between midpoints of the classical estimates
    ``-(3 pi (4j - 1)/8)^{2/3}`` for neighboring indices and refined by
    bisection until the interval closes to 1e-13, which leaves the
    residual |Ai| comfortably below 1e-10.
    """
    if count < 1:
        raise InvalidSpec("need at least one zero")
    estimates = [0.0] + [
        -((3.0 * math.pi * (4 * j - 1) / 8.0) ** (2.0 / 3.0))
        for j in range(1, count + 2)
    ]
    zeros = []
    for j in range(1, count + 1):
        hi = 0.5 * (estimates[j - 1] + estimates[j])
        lo = 0.5 * (estimates[j] + estimates[j + 1])
        f_lo, f_hi = _ai(lo), _ai(hi)
        if f_lo * f_hi > 0:
            raise RuntimeError(f"zero {j} escaped its bracket [{lo}, {hi}]")
        while hi - lo > 1e-13:
            mid = 0.5 * (lo + hi)
            f_mid = _ai(mid)
            if f_mid == 0.0:
                lo = hi = mid
                break
            if f_lo * f_mid < 0:
                hi, f_hi = mid, f_mid
            else:
                lo, f_lo = mid, f_mid
        zeros.append(0.5 * (lo + hi))
    return np.array(zeros)


@dataclass
class ExcursionDensity:
    """Area density of the standard Brownian excursion.

    ``truncation_tol`` stops the zero series once a term falls below that
    fraction of the running sum; ``last_truncation_error`` records the
    size of the first omitted term from the most recent evaluation.
    """

    zeros: np.ndarray
    truncation_tol: float = SERIES_TOL
    last_truncation_error: float = 0.0

    def __call__(self, x):
        scalar = np.isscalar(x)
        values = np.atleast_1d(np.asarray(x, dtype=float))
        if (values <= 0).any():
            raise DomainError("the excursion area density lives on x > 0")
        v = 2.0 * np.abs(self.zeros[None, :]) ** 3 / (27.0 * values[:, None] ** 2)
        terms = v ** (2.0 / 3.0) * np.exp(-v) * hyperu(-5.0 / 6.0, 4.0 / 3.0, v)
        running = np.cumsum(terms, axis=1)
        count = terms.shape[1]
        small = np.abs(terms) < self.truncation_tol * np.abs(running)
        stop = np.where(small.any(axis=1), small.argmax(axis=1), count)
        rows = np.arange(len(values))
        summed = running[rows, np.maximum(stop, 1) - 1]
        dropped = np.where(stop < count, np.abs(terms[rows, np.minimum(stop, count - 1)]), 0.0)
        self.last_truncation_error = float(dropped.max(initial=0.0))
        out = 2.0 * math.sqrt(6.0) / values**2 * summed
        return float(out[0]) if scalar else out


def excursion_density(zero_count: int = DEFAULT_ZERO_COUNT) -> ExcursionDensity:
    return ExcursionDensity(zeros=airy_zeros(zero_count))


@lru_cache(maxsize=None)
def _area_constants(k_max: int) -> tuple[Fraction, ...]:
    """The rational constants driving the area-moment recursion.

    K_0 = -1/2 and K_k = ((3k-4)/4) K_{k-1} + sum_{j=1}^{k-1} K_j K_{k-j}.
    """
    values = [Fraction(-1, 2)]
    for k in range(1, k_max + 1):
        acc = Fraction(3 * k - 4, 4) * values[k - 1]
        acc += sum(
            (values[j] * values[k - j] for j in range(1, k)), Fraction(0)
        )
        values.append(acc)
    return tuple(values)


def excursion_moments(k_max: int) -> list[float]:
    """Moments E[B^k] of the excursion area for k = 0..k_max.

    The k-th moment is ``4 sqrt(pi) 2^{-k/2} k! K_k / Gamma((3k-1)/2)``
    with the rational K_k from :func:`_area_constants`; evaluation runs in
    log space so large k stay finite.
    """
    if not 0 <= k_max <= 30:
        raise InvalidSpec("moment order must lie in 0..30")
    constants = _area_constants(max(k_max, 1))
    out = [1.0]
    for k in range(1, k_max + 1):
        log_mag = (
            math.log(4.0 * math.sqrt(math.pi))
            - 0.5 * k * math.log(2.0)
            + math.lgamma(k + 1)
            - math.lgamma((3 * k - 1) / 2.0)
        )
        kk = constants[k]
        log_mag += math.log(kk.numerator) - math.log(kk.denominator)
        out.append(math.exp(log_mag))
    return out


def moment_asymptotic(k: int) -> float:
    """Large-order growth law ``3 sqrt(2) k (k/12e)^{k/2}``."""
    if k < 1:
        raise InvalidSpec("need k >= 1")
    return 3.0 * math.sqrt(2.0) * k * (k / (12.0 * math.e)) ** (k / 2.0)


def area_std() -> float:
    """Standard deviation of the excursion area, ``sqrt(5/12 - pi/8)``."""
    return math.sqrt(5.0 / 12.0 - math.pi / 8.0)


# ---------------------------------------------------------------------------
# Oscillatory transforms of the density
# ---------------------------------------------------------------------------


def _panel_nodes(count: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(count)


def integrate_density(
    density: ExcursionDensity,
    weight=None,
    lo: float = QUADRATURE_RANGE[0],
    hi: float = QUADRATURE_RANGE[1],
    max_panel_width: float = 0.1,
    tol: float = 1e-7,
):
    """Panel Gauss quadrature of ``density * weight`` with error control.

    Doubles the panel count until two successive refinements agree within
    ``tol``; the last change is the reported error estimate.
    """
    nodes, gauss_w = _panel_nodes(16)
    panels = max(8, int(math.ceil((hi - lo) / max_panel_width)))
    previous = None
    for _ in range(8):
        edges = np.linspace(lo, hi, panels + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1] - edges[0])
        points = (mids[:, None] + half * nodes[None, :]).ravel()
        values = density(points)
        if weight is not None:
            values = values * weight(points)
        total = half * (values.reshape(panels, -1) @ gauss_w).sum()
        if previous is not None and abs(total - previous) < tol:
            return total, abs(total - previous)
        previous = total
        panels *= 2
    return previous, math.inf


def characteristic_FA(theta: float, density: ExcursionDensity | None = None) -> complex:
    """Fourier transform ``int f_A(x) exp(2 pi i x theta) dx``.

    Resolves the oscillation by capping panel widths at ``1/(4|theta|)``
    and refining until the estimated error drops below 1e-6.
    """
    if abs(theta) > 100:
        raise InvalidSpec("|theta| above 100 is outside the supported range")
    if density is None:
        density = _shared_density()
    width = 0.1 if theta == 0 else min(0.1, 1.0 / (4.0 * abs(theta)))
    real, err_r = integrate_density(
        density, lambda x: np.cos(2.0 * math.pi * x * theta), max_panel_width=width
    )
    imag, err_i = integrate_density(
        density, lambda x: np.sin(2.0 * math.pi * x * theta), max_panel_width=width
    )
    if max(err_r, err_i) > 1e-6:
        raise NoConvergence(
            "oscillatory quadrature failed to reach 1e-6", max(err_r, err_i)
        )
    return complex(real, imag)


@lru_cache(maxsize=1)
def _shared_density() -> ExcursionDensity:
    return excursion_density()


@dataclass
class RectanglePair:
    """Equal-density points one standard deviation apart."""

    x1: float
    x2: float
    height: float
    transform_modulus: float
    bound: float

    def satisfied(self) -> bool:
        return self.transform_modulus <= self.bound + 1e-9


def rectangle_level_pair(
    density: ExcursionDensity | None = None, width: float | None = None
) -> RectanglePair:
    """Find x1 < x2 with f(x1) = f(x2) and x2 - x1 equal to ``width``.

    The density is unimodal, so the pair straddling the mode is unique;
    bisection on the left abscissa locates it.  The returned record also
    evaluates the transform at frequency ``1/width`` together with the
    rectangle bound ``1 - height * width`` it must not exceed.
    """
    if density is None:
        density = _shared_density()
    if width is None:
        width = area_std()
    grid = np.linspace(0.2, 1.2, 2001)
    mode = float(grid[np.argmax(density(grid))])
    lo, hi = 0.05, mode
    gap = lambda x1: density(x1 + width) - density(x1)
    g_lo = gap(lo)
    if g_lo <= 0:
        raise RuntimeError("no sign change for the level pair bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    x1 = 0.5 * (lo + hi)
    height = float(density(x1))
    modulus = abs(characteristic_FA(1.0 / width, density))
    return RectanglePair(
        x1=x1,
        x2=x1 + width,
        height=height,
        transform_modulus=modulus,
        bound=1.0 - height * width,
    )


# ---------------------------------------------------------------------------
# Phase-twisted trial state on the spin chain
# ---------------------------------------------------------------------------


def _check_trial_size(two_n: int, s: int) -> None:
    if two_n < 2 or two_n % 2:
        raise InvalidSpec("two_n must be even and >= 2")
    if s < 1:
        raise InvalidSpec("need s >= 1")
    limit = TRIAL_SIZE_LIMITS.get(s)
    if limit is not None:
        if two_n > limit:
            raise SizeExceeded(
                f"two_n={two_n} exceeds the exact trial-state limit {limit} for s={s}"
            )
    elif motzkin_number(two_n, s) > TRIAL_COUNT_GUARD:
        raise SizeExceeded(
            f"{motzkin_number(two_n, s)} strings exceed the trial guard "
            f"{TRIAL_COUNT_GUARD:.0e}"
        )


def twist_angle(two_n: int) -> float:
    """The reference twist for a chain of ``two_n`` sites.

    Scales as the inverse 3/2 power of the chain length, so the phase
    accumulated over a typical walk area stays of order one while the
    per-move phase shrinks.  With this normalization the trial energy
    decays roughly quadratically in the chain length over the sizes
    that exact enumeration can reach.
    """
    return TWIST_CONSTANT * two_n ** (-1.5)


def _prefix_counts(two_n: int, s: int) -> list[list[int]]:
    """F[j][h]: color-weighted valid prefixes of length j ending at height h."""
    n = two_n // 2
    table = [[0] * (n + 2) for _ in range(two_n + 1)]
    table[0][0] = 1
    for j in range(1, two_n + 1):
        prev = table[j - 1]
        row = table[j]
        for h in range(min(j, n) + 1):
            acc = prev[h]
            if h:
                acc += s * prev[h - 1]
            acc += prev[h + 1]
            row[h] = acc
    return table


def _suffix_counts(two_n: int, s: int) -> list[list[int]]:
    """G[j][h]: color-weighted closings of length j descending from height h.

    Down steps carry weight one because their colors are forced by the
    letters already open.
    """
    n = two_n // 2
    table = [[0] * (n + 2) for _ in range(two_n + 1)]
    table[0][0] = 1
    for j in range(1, two_n + 1):
        prev = table[j - 1]
        row = table[j]
        for h in range(n + 1):
            acc = prev[h] + s * prev[h + 1]
            if h:
                acc += prev[h - 1]
            row[h] = acc
    return table


def move_pair_count(two_n: int, s: int) -> int:
    """Number of (string, position, move) triples counted from one side.

    A move is a letter hopping over an adjacent flat site, or a matched
    pair materializing on two adjacent flat sites (one triple per color);
    each unordered pair of strings joined by a move is counted exactly
    once, from its flat-first representative.
    """
    _check_trial_size(two_n, s)
    F = _prefix_counts(two_n, s)
    G = _suffix_counts(two_n, s)
    n = two_n // 2
    total = 0
    for j in range(1, two_n):
        left = F[j - 1]
        right = G[two_n - j - 1]
        for h in range(n + 1):
            if not left[h]:
                continue
            contributions = s * right[h + 1] + s * right[h]
            if h:
                contributions += right[h - 1]
            total += left[h] * contributions
    return total


def area_histogram(two_n: int, s: int) -> dict[int, int]:
    """How many colored Motzkin strings carry each walk area.

    The area convention is the sum of the heights after every step; the
    transfer update adds the post-step height as each step is placed, so
    the histogram doubles as the incremental-area cross-check.
    """
    _check_trial_size(two_n, s)
    n = two_n // 2
    max_area = n * n + 1
    current = {(0, 0): 1}
    for _ in range(two_n):
        nxt: dict[tuple[int, int], int] = {}
        for (h, a), count in current.items():
            nxt[(h, a + h)] = nxt.get((h, a + h), 0) + count
            if h < n:
                key = (h + 1, a + h + 1)
                nxt[key] = nxt.get(key, 0) + s * count
            if h:
                key = (h - 1, a + h - 1)
                nxt[key] = nxt.get(key, 0) + count
        current = {k: v for k, v in nxt.items() if k[1] <= max_area}
    out: dict[int, int] = {}
    for (h, a), count in current.items():
        if h == 0:
            out[a] = out.get(a, 0) + count
    return out


def trial_energy_exact(
    two_n: int, s: int, theta_tilde: float
) -> tuple[complex, float]:
    """Ground-state overlap and exact energy of the phase-twisted state.

    Every move flips the walk area by exactly one, so each of the
    :func:`move_pair_count` pairs costs ``(1 - cos 2 pi theta)`` over the
    string count, and the overlap is the phase average over the area
    histogram.  Both are exact transfer sums; no strings are enumerated.
    """
    _check_trial_size(two_n, s)
    total = motzkin_number(two_n, s)
    histogram = area_histogram(two_n, s)
    overlap = (
        sum(
            count * cmath.exp(2j * math.pi * theta_tilde * area)
            for area, count in histogram.items()
        )
        / total
    )
    energy = (1.0 - math.cos(2.0 * math.pi * theta_tilde)) * (
        move_pair_count(two_n, s) / total
    )
    return overlap, energy


@dataclass(frozen=True)
class TrialState:
    """Uniform-modulus state with an area-proportional phase twist."""

    two_n: int
    s: int
    theta_tilde: float

    def __post_init__(self):
        _check_trial_size(self.two_n, self.s)

    @property
    def string_count(self) -> int:
        return motzkin_number(self.two_n, self.s)

    def amplitude(self, area: int) -> complex:
        return cmath.exp(2j * math.pi * self.theta_tilde * area) / math.sqrt(
            self.string_count
        )

    def amplitude_of(self, walk: Walk) -> complex:
        if len(walk) != self.two_n or not is_motzkin(walk):
            raise InvalidSpec("amplitudes are defined on complete strings only")
        return self.amplitude(walk_area(walk))


@dataclass
class VariationalBound:
    """Certified gap upper bound from the twisted trial state."""

    two_n: int
    s: int
    theta_tilde: float
    scale_factor: int
    overlap_sq: float
    energy: float
    bound: float


def variational_gap_bound(two_n: int, s: int) -> VariationalBound:
    """Upper bound on the spectral gap from the twisted state.

    Starting from the reference twist, doubles the angle until the
    twisted state keeps at most half its weight on the ground state;
    twice its energy then dominates the gap.  Gives up once the angle
    passes ten times the reference value.
    """
    base = twist_angle(two_n)
    factor = 1
    while factor <= 10:
        theta = base * factor
        overlap, energy = trial_energy_exact(two_n, s, theta)
        weight = abs(overlap) ** 2
        if weight <= 0.5:
            return VariationalBound(
                two_n=two_n,
                s=s,
                theta_tilde=theta,
                scale_factor=factor,
                overlap_sq=weight,
                energy=energy,
                bound=2.0 * energy,
            )
        factor *= 2
    raise OverlapTooLarge(
        f"no twist up to 10x the reference pushed the ground weight below "
        f"1/2 at two_n={two_n}, s={s}"
    )
