"""Schmidt spectrum and entanglement entropy of the colored Motzkin state.

Cutting the uniform superposition over colored Motzkin walks at the middle
of a ``2n``-site chain gives Schmidt values indexed by the midpoint height
``m`` and the colors of the ``m`` open up steps: each height contributes the
probability ``p_m = M(n,m,s)**2 / N`` with multiplicity ``s**m``, where
``M(n,m,s)`` counts half-walks and ``N`` normalizes.  The entropy therefore
grows like ``sqrt(n)`` for two or more colors and logarithmically for one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .walks import CountTable, EXACT_LIMIT

EULER_GAMMA = 0.5772156649015329

# entropy terms whose weight is below exp(TRUNCATION_LOG_CUTOFF) of the peak
# weight are dropped; the discarded tail is below 1e-20 for n up to 1e6
TRUNCATION_LOG_CUTOFF = -80.0


def sigma(s: int) -> float:
    """Peak-location constant ``sqrt(s) / (2 sqrt(s) + 1)``."""
    if s < 1:
        raise InvalidSpec("color count s must be >= 1")
    r = math.sqrt(s)
    return r / (2.0 * r + 1.0)


def alpha_peak(s: int) -> float:
    """The Schmidt weight over heights peaks near ``alpha_peak(s) * sqrt(n)``."""
    return math.sqrt(2.0 * sigma(s))


def schmidt_rank(n: int, s: int) -> int:
    """Number of distinct Schmidt vectors: ``1 + s + ... + s**n``."""
    if n < 0:
        raise InvalidSpec("n must be >= 0")
    if s < 1:
        raise InvalidSpec("color count s must be >= 1")
    if s == 1:
        return n + 1
    return (s ** (n + 1) - 1) // (s - 1)


@dataclass
class SchmidtSpectrum:
    """Midpoint-height resolved Schmidt data for one ``(n, s)``.

    ``log_probability[m]`` is ``ln p_m``; the full spectrum lists ``p_m``
    with multiplicity ``s**m``, so ``sum_m s**m p_m = 1``.
    """

    n: int
    s: int
    log_probability: np.ndarray
    rank: int

    def log_weight(self) -> np.ndarray:
        """Log of the multiplicity-weighted probabilities ``s**m p_m``."""
        m = np.arange(self.n + 1)
        return m * math.log(self.s) + self.log_probability

    def normalization_defect(self) -> float:
        return abs(float(np.exp(self.log_weight()).sum()) - 1.0)


def schmidt_spectrum(table: CountTable) -> SchmidtSpectrum:
    logp = 2.0 * table.log_halfwalk - table.log_total
    return SchmidtSpectrum(
        n=table.n,
        s=table.s,
        log_probability=logp,
        rank=schmidt_rank(table.n, table.s),
    )


def entropy_exact(
    n: int, s: int, base: str = "nats", table: CountTable | None = None
) -> float:
    """Entanglement entropy ``-sum_m s**m p_m ln p_m`` across the middle cut.

    Works from exact counts up to ``n = EXACT_LIMIT`` and from the log-space
    table beyond; ``base`` is ``"nats"`` or ``"bits"``.
    """
    if base not in ("nats", "bits"):
        raise InvalidSpec(f"unknown entropy base {base!r}")
    if table is None:
        table = CountTable.build(n, s)
    elif (table.n, table.s) != (n, s):
        raise InvalidSpec("table does not match the requested (n, s)")
    logw = table.log_schmidt_weight()
    logp = 2.0 * table.log_halfwalk - table.log_total
    keep = logw >= np.max(logw) + TRUNCATION_LOG_CUTOFF
    entropy = -float(np.sum(np.exp(logw[keep]) * logp[keep]))
    if base == "bits":
        entropy /= math.log(2.0)
    return entropy


def entropy_asymptotic(n: int, s: int, base: str = "nats") -> float:
    """Large-``n`` entropy: ``2 ln(s) sqrt(2 sigma / pi) sqrt(n) + (1/2) ln n + c``.

    The additive constant is ``gamma - 1/2 + (ln 2 + ln pi + ln sigma)/2``.
    For one color the leading term vanishes and the logarithm dominates.
    """
    if base not in ("nats", "bits"):
        raise InvalidSpec(f"unknown entropy base {base!r}")
    if n < 1:
        raise InvalidSpec("n must be >= 1")
    sig = sigma(s)
    value = (
        2.0 * math.log(s) * math.sqrt(2.0 * sig / math.pi) * math.sqrt(n)
        + 0.5 * math.log(n)
        + EULER_GAMMA
        - 0.5
        + 0.5 * (math.log(2.0) + math.log(math.pi) + math.log(sig))
    )
    if base == "bits":
        value /= math.log(2.0)
    return value


def entropy_constant_bits() -> float:
    """The ``n``-independent part of the one-color entropy, in bits."""
    return (EULER_GAMMA - 0.5) / math.log(2.0) + 0.5 * (
        1.0 + math.log2(math.pi) + math.log2(sigma(1))
    )


def saddle_point(n: int, m: int, s: int) -> float:
    """Saddle location of the pair-count sum inside ``M(n,m,s)``.

    The dominant number of matched pairs sits at

        sigma*n - m/2 + (m/(8 sqrt(s))) (m/n)
                 + ((4s-1) m / (128 s sqrt(s))) (m/n)**3

    with corrections of order ``n (m/n)**5``.
    """
    if n < 1 or m < 0 or m > n:
        raise InvalidSpec("need 0 <= m <= n with n >= 1")
    r = math.sqrt(s)
    x = m / n
    return (
        sigma(s) * n
        - m / 2.0
        + (m / (8.0 * r)) * x
        + ((4.0 * s - 1.0) * m / (128.0 * s * r)) * x**3
    )


def halfwalk_term_argmax(n: int, m: int, s: int) -> int:
    """Index ``i`` (number of matched pairs) maximizing the summand of
    ``M(n,m,s)``; the saddle-point formula approximates this."""
    from .walks import ballot_count, binomial, log_binomial

    i_max = (n - m) // 2
    if n <= EXACT_LIMIT:
        best, best_val = 0, -1
        for i in range(i_max + 1):
            val = binomial(n, 2 * i + m) * ballot_count(2 * i + m, m) * s**i
            if val > best_val:
                best, best_val = i, val
        return best
    i = np.arange(i_max + 1)
    terms = (
        log_binomial(n, 2 * i + m)
        + log_binomial(2 * i + m, i)
        + np.log((m + 1.0) / (i + m + 1.0))
        + i * math.log(s)
    )
    return int(np.argmax(terms))


def schmidt_weight_argmax(table: CountTable) -> int:
    """Height ``m`` carrying the largest Schmidt weight ``s**m p_m``."""
    return int(np.argmax(table.log_schmidt_weight()))


def expected_mid_height(n: int, s: int = 1) -> tuple[float, float]:
    """Mean midpoint height of a random one-color Motzkin walk.

    Returns ``(exact, asymptotic)`` where the exact value is
    ``sum_m m M(n,m)**2 / sum_m M(n,m)**2`` and the asymptotic one is
    ``2 sqrt(2/(3 pi)) sqrt(n)``.  Only the one-color case is supported;
    the asymptotic constant is specific to it.
    """
    if s != 1:
        raise InvalidSpec("expected_mid_height is defined for s = 1")
    table = CountTable.build(n, 1)
    logw = table.log_schmidt_weight()
    peak = float(np.max(logw))
    w = np.exp(logw - peak)
    exact = float(np.sum(np.arange(n + 1) * w) / np.sum(w))
    asymptotic = 2.0 * math.sqrt(2.0 / (3.0 * math.pi)) * math.sqrt(n)
    return exact, asymptotic
