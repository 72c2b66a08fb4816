"""
Tests for the witness inequalities and the PPT checks.
"""
import numpy as np
import pytest

from app.core.errors import InvalidArgumentError, NumericalError
from app.services import entanglement, states
from app.services.entanglement import (
    max_violation_analytic,
    ppt_all_cuts,
    ppt_check,
    witness,
    witness_from_expectations,
)

TABLE_VALUES = {
    0.04: 2.3115,
    0.08: 1.8677,
    0.12: 1.5574,
    0.16: 1.3275,
    0.20: 1.1498,
}


def test_b_zero_witness_value():
    report = witness(states.sigma_b(0.0))
    assert report.max_value == pytest.approx(3.0, abs=1e-12)
    assert report.violated


def test_witness_at_first_table_point():
    assert witness(states.sigma_b(0.04)).max_value == pytest.approx(2.311, abs=1e-3)


@pytest.mark.parametrize("b, expected", sorted(TABLE_VALUES.items()))
def test_table_values(b, expected):
    direct = witness(states.sigma_b(b)).max_value
    assert direct == pytest.approx(expected, abs=5e-4)
    assert direct == pytest.approx(max_violation_analytic(b), abs=1e-12)


def test_witness_matches_closed_form(b_grid_101):
    for b in b_grid_101:
        assert witness(states.sigma_b(b)).max_value == pytest.approx(max_violation_analytic(b), abs=1e-12)


def test_detection_window_boundary():
    edge = entanglement.detection_window()
    assert edge == pytest.approx(1 / np.sqrt(17))
    assert max_violation_analytic(edge) == pytest.approx(1.0, abs=1e-10)
    assert witness(states.sigma_b(0.24)).violated
    assert not witness(states.sigma_b(0.25)).violated


def test_violation_exactly_below_window_on_fine_grid():
    grid = np.linspace(0.0, 1.0, 1001)
    values = np.array([max_violation_analytic(b) for b in grid])
    np.testing.assert_array_equal(values > 1.0, grid < entanglement.detection_window())

    k = int(np.argmax(values <= 1.0))
    lo, hi = grid[k - 1], grid[k]
    crossing = lo + (values[k - 1] - 1.0) / (values[k - 1] - values[k]) * (hi - lo)
    assert crossing == pytest.approx(0.24254, abs=5e-4)


def test_witness_decreases_on_grid(b_grid_101):
    values = [max_violation_analytic(b) for b in b_grid_101]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))


def test_b_one_gives_zero():
    assert max_violation_analytic(1.0) == pytest.approx(0.0, abs=1e-15)
    assert witness(states.sigma_b(1.0)).max_value == pytest.approx(0.0, abs=1e-12)


def test_maximally_mixed_is_not_violated():
    report = witness(states.maximally_mixed())
    assert report.four_values == pytest.approx([0.0] * 4, abs=1e-15)
    assert not report.violated


def test_four_value_ordering():
    report = witness_from_expectations(0.5, 0.25, -0.125)
    assert report.four_values == pytest.approx([0.625, 0.875, 0.125, 0.375])
    assert report.max_signs == (1, -1)
    assert not report.violated


def test_ties_pick_first_sign_choice():
    report = witness_from_expectations(1.0, 0.0, 0.0)
    assert report.max_signs == (1, 1)


def test_verdict_threshold_uses_tolerance():
    assert not witness_from_expectations(1.0 + 1e-12, 0.0, 0.0).violated
    assert witness_from_expectations(1.0 + 1e-6, 0.0, 0.0).violated


def test_product_states_never_violate(rng):
    worst = 0.0
    for _ in range(10_000):
        worst = max(worst, witness(entanglement.random_product_state(rng=rng)).max_value)
    assert worst <= 1.0 + 1e-9


def test_separable_mixtures_never_violate():
    for seed in range(1_000):
        assert not witness(entanglement.random_separable_mixture(seed)).violated


def test_expectation_rejects_complex_values():
    o = entanglement.Observable(matrix=np.diag([1j] + [0] * 7), label="iP")
    with pytest.raises(NumericalError):
        entanglement.expectation(states.pure_density(states.basis_state("000")), o)


def test_statistical_verdict():
    assert entanglement.statistically_violated(1.3, 0.1, k=2.0)
    assert not entanglement.statistically_violated(1.15, 0.1, k=2.0)


def test_sigma_b_is_ppt_as_qubit_ququart(b_grid_101):
    for b in b_grid_101:
        report = ppt_check(states.sigma_b(b), (2, 4), 0)
        assert report.min_eigenvalue >= -1e-10, f"b={b}"
        assert report.is_ppt


def test_ppt_bell_state_fails():
    bell = np.zeros(8, dtype=complex)
    bell[0b000] = bell[0b101] = 1 / np.sqrt(2)
    report = ppt_check(states.pure_density(bell), (2, 2, 2), 0)
    assert report.min_eigenvalue == pytest.approx(-0.5, abs=1e-12)
    assert not report.is_ppt
    assert report.bipartition == "1|23"


def test_sigma_0_cuts():
    reports = ppt_all_cuts(states.sigma_b(0.0))
    assert set(reports) == {"2|4", "1|23", "2|13", "3|12"}
    assert reports["2|4"].is_ppt
    assert reports["1|23"].is_ppt
    assert reports["3|12"].min_eigenvalue == pytest.approx(-0.5, abs=1e-12)
    assert not reports["3|12"].is_ppt


def test_ppt_check_defaults_to_state_view():
    rho = states.sigma_b(0.1, dims=(2, 4))
    report = ppt_check(rho)
    assert report.dims == [2, 4]
    assert report.bipartition == "2|4"


def test_labels_follow_qubit_grouping():
    rho = states.sigma_b(0.0)
    two_plus_one = ppt_check(rho, (4, 2), 0)
    assert two_plus_one.bipartition == "12|3"
    assert ppt_check(rho, (4, 2), 1).bipartition == "3|12"
    # transposing qubits 1,2 has the same spectrum as transposing qubit 3
    assert two_plus_one.min_eigenvalue == pytest.approx(-0.5, abs=1e-12)
    assert ppt_check(rho, (2, 4), 1).bipartition == "4|2"


def test_labels_reject_non_qubit_factors():
    with pytest.raises(InvalidArgumentError):
        ppt_check(states.maximally_mixed(), (1, 8), 1)
