"""Boundary-free chain in a weak diagonal field.

Dropping the boundary projectors leaves the local moves conserving the
number of unmatched letters of each kind, so the zero-energy space splits
into sectors labeled by the reduced word ``r^p l^q`` that a configuration
shrinks to.  A field that counts non-flat letters, applied at strength
``epsilon0 / two_n``, lifts the degeneracy at first order; the shift of a
sector depends only on the total imbalance ``m = p + q`` and equals the
field strength times the mean non-flat count over the sector.

The mean non-flat count has a closed form as a ratio of two sums over the
number of matched pairs, evaluated exactly in integers for short chains
and in log space for long ones.  The module also builds the explicit
tensor-product ground state of the one-color boundary-free chain and a
small-system check that sector-restricted diagonalization reproduces the
first-order energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, InvalidSpec, SizeExceeded
from .hamiltonian import (
    ChainSpec,
    build_interaction_part,
    build_move_part,
    field_diagonal,
    local_move_classes,
)
from .schmidt import sigma
from .walks import EXACT_LIMIT, ballot_count, binomial, log_binomial

LOG_LIMIT = 2000


def _check_height_args(n: int, m: int, s: int) -> None:
    if s < 1:
        raise InvalidSpec("color count s must be >= 1")
    if n < 0:
        raise DomainError("walk length must be >= 0")
    if m < 0 or m > n:
        raise DomainError(f"no length-{n} walk ends at height {m}")


def field_expectation_exact(n: int, m: int, s: int) -> float:
    """Mean non-flat step count over colored prefixes of length ``n``
    ending at height ``m``.

    A prefix with ``i`` matched pairs has ``m + 2i`` non-flat steps, so the
    mean is ``m + 2 * sum_i i T_i / sum_i T_i`` with
    ``T_i = C(n, 2i+m) ballot(2i+m, m) s**i``.  Exact integer arithmetic up
    to ``n = EXACT_LIMIT``; log space beyond that, up to ``n = LOG_LIMIT``.
    """
    _check_height_args(n, m, s)
    pairs_max = (n - m) // 2
    if n <= EXACT_LIMIT:
        num = 0
        den = 0
        for i in range(pairs_max + 1):
            term = binomial(n, 2 * i + m) * ballot_count(2 * i + m, m) * s**i
            num += i * term
            den += term
        return m + float(Fraction(2 * num, den))
    if n > LOG_LIMIT:
        raise SizeExceeded(f"log-space sums stop at n = {LOG_LIMIT}")
    i = np.arange(pairs_max + 1)
    log_terms = (
        log_binomial(n, 2 * i + m)
        + log_binomial(2 * i + m, i)
        + np.log((m + 1.0) / (i + m + 1.0))
        + i * math.log(s)
    )
    if pairs_max == 0:
        return float(m)
    log_den = logsumexp(log_terms)
    log_num = logsumexp(log_terms[1:] + np.log(i[1:]))
    return m + 2.0 * math.exp(log_num - log_den)


def field_expectation_asymptotic(n: int, m: int, s: int) -> float:
    """Large-``n`` expansion of the mean non-flat count at height ``m``.

    Two correction orders in ``m / n`` beyond the extensive term
    ``2 sigma n``; accurate to better than a percent once ``n`` reaches a
    few hundred and ``m`` stays near or below ``2 sqrt(n)``.
    """
    _check_height_args(n, m, s)
    root = math.sqrt(s)
    ratio = m / n
    return (
        2.0 * sigma(s) * n
        + (m / (4.0 * root)) * ratio
        + ((4.0 * s - 1.0) * m / (64.0 * s * root)) * ratio**3
    )


@dataclass(frozen=True)
class FieldReport:
    """First-order energies of the boundary-free chain in the field.

    ``energies[m]`` is the shift of the ``m``-imbalance sector on the
    length-``2n`` chain, ``exact_expectations[m]`` the underlying mean
    non-flat count, and ``ground_energy`` the leading asymptotic value
    ``2 sigma epsilon0`` that the ``m = 0`` shift approaches.
    """

    n: int
    s: int
    epsilon0: float
    energies: dict[int, float]
    ground_energy: float
    exact_expectations: dict[int, float]


def field_energies(n: int, s: int, epsilon0: float, m_max: int | None = None) -> FieldReport:
    """First-order sector energies on the chain of ``2n`` sites.

    The sector with ``m`` total unmatched letters shifts by
    ``(epsilon0 / 2n)`` times the mean non-flat count at height ``m``.
    Every shift lies in ``(0, epsilon0]`` and grows with ``m``; both
    facts are re-checked here before the report is returned.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0.0 < epsilon0 < 1.0:
        raise DomainError("epsilon0 must lie in (0, 1)")
    two_n = 2 * n
    if m_max is None:
        m_max = two_n
    if not 0 <= m_max <= two_n:
        raise DomainError(f"m_max must lie in [0, {two_n}]")
    expectations: dict[int, float] = {}
    energies: dict[int, float] = {}
    previous = 0.0
    for m in range(m_max + 1):
        mean = field_expectation_exact(two_n, m, s)
        shift = epsilon0 / two_n * mean
        if not 0.0 < shift <= epsilon0 * (1.0 + 1e-12):
            raise InvalidSpec(f"sector shift {shift:g} escaped (0, epsilon0]")
        if shift < previous - 1e-15:
            raise InvalidSpec(f"sector shifts decreased at m = {m}")
        expectations[m] = mean
        energies[m] = shift
        previous = shift
    return FieldReport(
        n=n,
        s=s,
        epsilon0=epsilon0,
        energies=energies,
        ground_energy=2.0 * sigma(s) * epsilon0,
        exact_expectations=expectations,
    )


def product_ground_state(two_n: int, alpha: float) -> np.ndarray:
    """Tensor-product zero mode of the one-color boundary-free chain.

    Each site carries ``alpha |l> + |0> + (1/alpha) |r>`` up to
    normalization.  Every bulk projector annihilates the product for any
    nonzero real ``alpha``: the exchange directions see identical
    amplitude on both orderings, and the pair direction sees amplitude
    ``1 * 1`` on ``|0 0>`` against ``alpha / alpha`` on ``|l r>``.
    """
    if not math.isfinite(alpha) or alpha == 0.0:
        raise DomainError("alpha must be a nonzero finite real")
    spec = ChainSpec(two_n=two_n, s=1, boundary="open")
    spec.check_size()
    site = np.array([1.0, alpha, 1.0 / alpha])
    site /= np.linalg.norm(site)
    vec = np.array([1.0])
    for _ in range(two_n):
        vec = np.kron(vec, site)
    return vec


def product_state_norm_factor(two_n: int, alpha: float) -> float:
    """Norm of the unnormalized product state, ``(1 + a^2 + a^-2)^(n)``."""
    if not math.isfinite(alpha) or alpha == 0.0:
        raise DomainError("alpha must be a nonzero finite real")
    return float((1.0 + alpha**2 + alpha**-2) ** (two_n / 2))


@dataclass(frozen=True)
class SectorCheck:
    """Outcome of sector-restricted diagonalization against first order.

    ``worst_deviation`` is the largest gap between a sector's lowest
    eigenvalue under the field and the first-order prediction;
    ``equal_energy_spread`` the largest spread among sectors sharing an
    imbalance; ``multiplicities_ok`` records whether imbalance ``m``
    appeared in exactly ``m + 1`` sectors.
    """

    two_n: int
    epsilon0: float
    class_count: int
    worst_deviation: float
    equal_energy_spread: float
    multiplicities_ok: bool


def sector_first_order_check(two_n: int, epsilon0: float = 1e-3) -> SectorCheck:
    """Diagonalize the one-color boundary-free chain plus field per sector.

    The bulk projectors never connect different sectors and the field is
    diagonal, so the full operator block-diagonalizes over the move
    classes.  The lowest eigenvalue of each block is compared with the
    field strength times the mean non-flat count at the block's imbalance.
    """
    if not 0.0 < epsilon0 < 1.0:
        raise DomainError("epsilon0 must lie in (0, 1)")
    spec = ChainSpec(two_n=two_n, s=1, boundary="open")
    bulk = (build_move_part(spec).matrix + build_interaction_part(spec).matrix).tocsr()
    eps = epsilon0 / two_n
    diag = eps * field_diagonal(two_n, 1)
    classes = local_move_classes(two_n, 1)
    by_imbalance: dict[int, list[float]] = {}
    worst = 0.0
    for members, label in zip(classes.members, classes.labels):
        if label is None:
            raise InvalidSpec("a one-color sector failed to reduce to rights-then-lefts")
        m = label[0] + label[1]
        block = bulk[members][:, members].toarray() + np.diag(diag[members])
        lowest = float(np.linalg.eigvalsh(block)[0])
        predicted = eps * field_expectation_exact(two_n, m, 1)
        worst = max(worst, abs(lowest - predicted))
        by_imbalance.setdefault(m, []).append(lowest)
    spread = max(max(v) - min(v) for v in by_imbalance.values())
    multiplicities_ok = all(
        len(by_imbalance.get(m, [])) == m + 1 for m in range(two_n + 1)
    )
    return SectorCheck(
        two_n=two_n,
        epsilon0=epsilon0,
        class_count=classes.count,
        worst_deviation=worst,
        equal_energy_spread=spread,
        multiplicities_ok=multiplicities_ok,
    )
