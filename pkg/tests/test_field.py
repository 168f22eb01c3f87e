"""Uniform-field energy shift tests.

The exact height-resolved expectation is compared against direct string
enumeration at small sizes and against an independent exact-rational sum
on the log-space branch.  Sector diagonalization then confirms the
first-order shifts on the actual chain operator.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import iter_matched_digit_strings
from motzkinchain.errors import DomainError, InvalidSpec, SizeExceeded
from motzkinchain.field import (
    field_energies,
    field_expectation_asymptotic,
    field_expectation_exact,
    product_ground_state,
    product_state_norm_factor,
    sector_first_order_check,
)
from motzkinchain.hamiltonian import ChainSpec, build_hamiltonian
from motzkinchain.schmidt import sigma


# ---------------------------------------------------------------------------
# Exact expectation
# ---------------------------------------------------------------------------


def test_hand_checked_examples():
    assert field_expectation_exact(1, 1, 1) == 1.0
    # length two at height zero: the flat-flat string and the matched pair
    assert field_expectation_exact(2, 0, 1) == 1.0
    # at full height every step is a letter
    assert field_expectation_exact(6, 6, 1) == 6.0


@pytest.mark.parametrize("s", [1, 2])
def test_expectation_matches_enumeration(s):
    for n in range(1, 7):
        for m in range(n + 1):
            strings = list(iter_matched_digit_strings(n, s, end_opens=m))
            if not strings:
                continue
            mean = sum(
                sum(1 for d in digits if d != 0) for digits in strings
            ) / len(strings)
            assert field_expectation_exact(n, m, s) == pytest.approx(mean, rel=1e-13)


def _rational_expectation(n, m, s):
    """Independent exact-rational mean over the pair-count distribution."""
    num = Fraction(0)
    den = Fraction(0)
    for i in range((n - m) // 2 + 1):
        ballot = Fraction(math.comb(2 * i + m, i) * (m + 1), i + m + 1)
        term = math.comb(n, 2 * i + m) * ballot * s**i
        num += i * term
        den += term
    return m + 2 * num / den


def test_log_space_branch_against_rational_sum():
    for n, m, s in [(350, 0, 1), (350, 7, 1), (500, 3, 2), (2000, 40, 2)]:
        expected = float(_rational_expectation(n, m, s))
        assert field_expectation_exact(n, m, s) == pytest.approx(expected, rel=1e-12)


def test_expectation_validation():
    with pytest.raises(InvalidSpec):
        field_expectation_exact(4, 0, 0)
    with pytest.raises(DomainError):
        field_expectation_exact(-1, 0, 1)
    with pytest.raises(DomainError):
        field_expectation_exact(4, 5, 1)
    with pytest.raises(SizeExceeded):
        field_expectation_exact(2001, 0, 1)


# ---------------------------------------------------------------------------
# Asymptotic expansion
# ---------------------------------------------------------------------------


def test_asymptotic_base_term():
    assert field_expectation_asymptotic(100, 0, 1) == pytest.approx(200.0 / 3.0, rel=1e-15)
    assert field_expectation_asymptotic(50, 0, 2) == pytest.approx(
        2.0 * sigma(2) * 50, rel=1e-15
    )


def test_asymptotic_tracks_exact_to_a_fraction_of_a_percent():
    for m in (0, 10, 50, 63):
        exact = field_expectation_exact(2000, m, 2)
        asym = field_expectation_asymptotic(2000, m, 2)
        assert abs(exact - asym) / exact < 0.01


# ---------------------------------------------------------------------------
# Sector energies
# ---------------------------------------------------------------------------


def test_field_energies_structure():
    report = field_energies(6, 1, 0.01)
    shifts = [report.energies[m] for m in range(13)]
    assert all(0.0 < e <= 0.01 * (1 + 1e-12) for e in shifts)
    assert all(a <= b + 1e-15 for a, b in zip(shifts, shifts[1:]))
    assert report.energies[12] == pytest.approx(0.01, rel=1e-14)
    assert report.ground_energy == pytest.approx(2.0 * sigma(1) * 0.01, rel=1e-15)
    assert report.exact_expectations[0] == pytest.approx(
        field_expectation_exact(12, 0, 1), rel=1e-15
    )


def test_ground_sector_shift_approaches_asymptote():
    report = field_energies(1000, 2, 1e-3, m_max=0)
    rel = abs(report.energies[0] - report.ground_energy) / report.ground_energy
    assert rel < 1e-3


def test_first_two_sectors_split_like_inverse_square():
    eps0 = 1e-3
    deltas = {}
    for n in (200, 800):
        r = field_energies(n, 1, eps0, m_max=1)
        deltas[n] = r.energies[1] - r.energies[0]
    ratio = deltas[200] / deltas[800]
    assert ratio == pytest.approx(16.0, rel=0.02)


def test_sector_split_prefactor_frozen_points():
    # the scaled split (E_1 - E_0) * 16 sqrt(s) n^2 / eps0 drifts toward 3
    eps0 = 1e-3
    for n, expected in [(50, 2.9704341947657875), (1000, 2.9985044378011416)]:
        r = field_energies(n, 1, eps0, m_max=1)
        scaled = (r.energies[1] - r.energies[0]) * 16 * n**2 / eps0
        assert scaled == pytest.approx(expected, rel=1e-9)


def test_field_energies_validation():
    with pytest.raises(DomainError):
        field_energies(0, 1, 0.01)
    with pytest.raises(DomainError):
        field_energies(4, 1, 0.0)
    with pytest.raises(DomainError):
        field_energies(4, 1, 1.5)
    with pytest.raises(DomainError):
        field_energies(4, 1, 0.01, m_max=9)


# ---------------------------------------------------------------------------
# Product zero modes of the boundary-free chain
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [1.0, 2.0, -1.5, 0.3])
def test_product_state_is_annihilated_without_boundaries(alpha):
    spec = ChainSpec(two_n=4, s=1, boundary="open")
    H = build_hamiltonian(spec).matrix
    vec = product_ground_state(4, alpha)
    assert np.linalg.norm(vec) == pytest.approx(1.0, rel=1e-14)
    assert np.max(np.abs(H @ vec)) < 1e-12


def test_product_state_norm_factor_matches_direct_product():
    for alpha in (1.0, 2.0, 0.5):
        site = np.array([1.0, alpha, 1.0 / alpha])
        raw = np.array([1.0])
        for _ in range(4):
            raw = np.kron(raw, site)
        assert product_state_norm_factor(4, alpha) == pytest.approx(
            float(np.linalg.norm(raw)), rel=1e-13
        )


def test_product_state_rejects_degenerate_mixing():
    with pytest.raises(DomainError):
        product_ground_state(4, 0.0)
    with pytest.raises(DomainError):
        product_state_norm_factor(4, math.inf)


# ---------------------------------------------------------------------------
# Sector-resolved diagonalization
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(("two_n", "frozen_worst"), [(4, 1.1113783604012068e-07), (6, 8.212636109128542e-08)])
def test_sector_diagonalization_confirms_first_order(two_n, frozen_worst):
    eps0 = 1e-3
    check = sector_first_order_check(two_n, eps0)
    assert check.class_count == (two_n + 1) * (two_n // 2 + 1)
    assert check.multiplicities_ok
    assert check.worst_deviation <= 10.0 * eps0**2
    assert check.worst_deviation == pytest.approx(frozen_worst, rel=1e-6)
    assert check.equal_energy_spread < 1e-12


def test_sector_check_validation():
    with pytest.raises(DomainError):
        sector_first_order_check(4, 0.0)
