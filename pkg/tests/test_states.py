"""
Tests for the sigma_b family, pseudo-pure states and fidelity.
"""
import numpy as np
import pytest

from app.core.errors import InvalidArgumentError, NumericalError
from app.services import qlinalg, states
from app.services.entanglement import observables


def test_psi_components():
    psi1 = states.psi_k(1)
    expected = np.zeros(8)
    expected[[0, 5]] = 1 / np.sqrt(2)
    np.testing.assert_allclose(psi1, expected)
    assert abs(np.vdot(states.psi_k(1), states.psi_k(2))) == 0.0
    with pytest.raises(InvalidArgumentError):
        states.psi_k(4)


def test_psi3_is_bell_pair_on_qubits_1_and_3():
    reduced = qlinalg.partial_trace(states.projector(states.psi_k(3)), [2, 2, 2], {0, 2})
    bell = np.zeros((4, 4))
    bell[np.ix_([0, 3], [0, 3])] = 0.5
    np.testing.assert_allclose(reduced, bell, atol=1e-14)


def test_phi_b_amplitudes():
    phi0 = states.phi_b(0.0)
    assert phi0[4] == pytest.approx(1 / np.sqrt(2))
    assert phi0[7] == pytest.approx(1 / np.sqrt(2))

    phi1 = states.phi_b(1.0)
    np.testing.assert_allclose(phi1, states.basis_state("100"), atol=1e-15)

    phi = states.phi_b(0.04)
    assert phi[4] == pytest.approx(np.sqrt(1.04) / np.sqrt(2), abs=1e-15)
    assert phi[7] == pytest.approx(np.sqrt(0.96) / np.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("bad", [-0.01, 1.01, float("nan")])
def test_b_out_of_range(bad):
    with pytest.raises(InvalidArgumentError):
        states.phi_b(bad)


def test_mixture_weights():
    assert states.mixture_weights(0.0).as_tuple() == (0.0, 0.0, 0.0, 0.0, 1.0)
    np.testing.assert_allclose(states.mixture_weights(1.0).as_tuple(), (0.25, 0.25, 0.25, 0.125, 0.125))
    for b in np.linspace(0, 1, 11):
        assert sum(states.mixture_weights(b).as_tuple()) == pytest.approx(1.0, abs=1e-12)


def test_sigma_b_matrix_entries():
    b = 0.3
    m = states.sigma_b_matrix(b).matrix
    assert m[4, 4] == pytest.approx((1 + b) / 2 / (1 + 7 * b))
    assert m[4, 7] == pytest.approx(np.sqrt(1 - b * b) / 2 / (1 + 7 * b))

    m0 = states.sigma_b_matrix(0.0).matrix
    nonzero = set(zip(*np.nonzero(np.abs(m0) > 0)))
    assert nonzero == {(4, 4), (4, 7), (7, 4), (7, 7)}
    for ij in nonzero:
        assert m0[ij] == pytest.approx(0.5)


def test_sigma_b_mixture_at_zero_is_phi0():
    np.testing.assert_allclose(
        states.sigma_b_mixture(0.0).matrix, states.projector(states.phi_b(0.0)), atol=1e-15
    )


def test_dual_construction(b_grid_101):
    for b in b_grid_101:
        d = qlinalg.frobenius_distance(states.sigma_b_mixture(b).matrix, states.sigma_b_matrix(b).matrix)
        assert d <= 1e-12, f"b={b}: distance {d}"


def test_sigma_b_validity(b_grid_101):
    for b in b_grid_101:
        m = states.sigma_b(b).matrix
        assert qlinalg.is_hermitian(m, 1e-12)
        assert abs(np.trace(m) - 1) <= 1e-12
        assert np.linalg.eigvalsh(m)[0] >= -1e-10


def test_sigma_0_structure():
    sigma0 = states.sigma_b(0.0).matrix
    reduced = qlinalg.partial_trace(sigma0, [2, 2, 2], {0})
    np.testing.assert_allclose(reduced, qlinalg.P1, atol=1e-15)


def test_density_operator_validation():
    with pytest.raises(NumericalError):
        states.DensityOperator(matrix=np.eye(8))
    with pytest.raises(InvalidArgumentError):
        states.DensityOperator(matrix=np.eye(4) / 4)
    rho = states.sigma_b(0.1)
    assert rho.view((2, 4)).dims == (2, 4)
    np.testing.assert_array_equal(rho.view((2, 4)).matrix, rho.matrix)


def test_pps_limits():
    pure = states.sigma_b(0.04)
    np.testing.assert_allclose(states.pps(1.0, pure).matrix, pure.matrix)
    near_mixed = states.pps(1e-12, pure).matrix
    np.testing.assert_allclose(near_mixed, np.eye(8) / 8, atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        states.pps(0.0, pure)
    with pytest.raises(InvalidArgumentError):
        states.pps(1.5, pure)


@pytest.mark.parametrize("epsilon", [states.THERMAL_EPSILON, 0.5, 1.0])
def test_pps_linearity_for_traceless_observables(epsilon):
    sigma = states.sigma_b(0.12)
    mixed = states.pps(epsilon, sigma)
    for o in observables():
        assert abs(mixed.expect(o.matrix) - epsilon * sigma.expect(o.matrix)) <= 1e-12


def test_fidelity_examples():
    rho = states.sigma_b(0.12)
    assert states.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    zero = states.pure_density(states.basis_state("000"))
    other = states.pure_density(states.basis_state("011"))
    assert states.fidelity(zero, other) == pytest.approx(0.0, abs=1e-9)


def test_fidelity_of_pure_states_is_overlap(rng):
    for _ in range(20):
        a = rng.normal(size=8) + 1j * rng.normal(size=8)
        c = rng.normal(size=8) + 1j * rng.normal(size=8)
        a, c = a / np.linalg.norm(a), c / np.linalg.norm(c)
        f = states.fidelity(states.pure_density(a), states.pure_density(c))
        assert f == pytest.approx(abs(np.vdot(a, c)) ** 2, abs=1e-6)


def test_fidelity_bounds_and_symmetry(rng):
    for _ in range(100):
        rho = states.random_density_operator(rng=rng)
        sigma = states.random_density_operator(rng=rng)
        f = states.fidelity(rho, sigma)
        assert 0.0 <= f <= 1.0 + 1e-9
        assert f == pytest.approx(states.fidelity(sigma, rho), abs=1e-9)


def test_fidelity_rejects_raw_matrices():
    with pytest.raises(NumericalError):
        states.fidelity(np.eye(8) / 8, states.maximally_mixed())
