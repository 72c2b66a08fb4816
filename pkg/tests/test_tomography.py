"""
Tests for the seven-setting tomography readout and reconstruction.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import InvalidArgumentError
from app.services import qlinalg, states, tomography
from app.services.entanglement import witness
from app.services.tomography import SETTINGS, TomoDataset


def test_transition_layout():
    t = tomography.transitions()
    assert len(t) == 12
    assert [spin for spin, _, _ in t] == [1] * 4 + [2] * 4 + [3] * 4
    for spin, m, n in t:
        assert bin(m ^ n).count("1") == 1
        assert m ^ n == 1 << (3 - spin)
        assert m < n


def test_design_matrix_shape_and_rank():
    a = tomography.design_matrix()
    assert a.shape == (168, 64)
    np.testing.assert_allclose(a[:, 0], np.zeros(168), atol=1e-15)
    assert tomography.design_rank() == 63


def test_design_matrix_is_read_only():
    with pytest.raises(ValueError):
        tomography.design_matrix()[0, 0] = 1.0


def test_setting_unitary():
    np.testing.assert_allclose(tomography.setting_unitary("III"), np.eye(8))
    assert qlinalg.is_unitary(tomography.setting_unitary("XYX"))
    with pytest.raises(InvalidArgumentError):
        tomography.setting_unitary("ZZZ")


def test_readout_of_identity_is_zero():
    record = tomography.simulate_readout(states.maximally_mixed(), "XXY")
    np.testing.assert_allclose(record.amplitudes(), np.zeros(12), atol=1e-15)


@pytest.mark.parametrize("b", [0.0, 0.04, 0.12, 0.5, 1.0])
def test_noiseless_round_trip(b):
    sigma = states.sigma_b(b)
    result = tomography.reconstruct(tomography.simulate_dataset(sigma))
    assert np.max(np.abs(result.rho_est.matrix - sigma.matrix)) <= 1e-8
    assert result.residual_norm <= 1e-8


def test_round_trip_random_states(rng):
    for _ in range(100):
        rho = states.random_density_operator(rng=rng)
        result = tomography.reconstruct(tomography.simulate_dataset(rho))
        assert np.max(np.abs(result.rho_est.matrix - rho.matrix)) <= 1e-8
        assert not result.projected


def test_tomography_witness_matches_direct():
    sigma = states.sigma_b(0.08)
    tomo = tomography.witness_from_tomography(tomography.simulate_dataset(sigma))
    assert tomo.max_value == pytest.approx(witness(sigma).max_value, abs=1e-8)


def test_error_scales_as_inverse_sqrt_shots():
    sigma = states.sigma_b(0.04)
    shot_grid = [10_000, 100_000, 1_000_000]
    mean_errors = []
    for shots in shot_grid:
        errors = []
        for seed in range(30):
            raw = tomography.reconstruct(tomography.simulate_dataset(sigma, shots, seed)).raw_matrix
            errors.append(qlinalg.frobenius_distance(raw, sigma.matrix))
        mean_errors.append(np.mean(errors))
    slope = np.polyfit(np.log10(shot_grid), np.log10(mean_errors), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.15)


def test_low_shot_estimate_is_projected():
    result = tomography.reconstruct(tomography.simulate_dataset(states.sigma_b(0.04), shots=10, seed=1))
    assert result.projected
    assert np.linalg.eigvalsh(result.rho_est.matrix)[0] >= -1e-10
    assert np.trace(result.rho_est.matrix).real == pytest.approx(1.0, abs=1e-12)


def test_simulated_dataset_is_reproducible():
    sigma = states.sigma_b(0.2)
    a = tomography.simulate_dataset(sigma, shots=500, seed=42)
    b = tomography.simulate_dataset(sigma, shots=500, seed=42)
    assert a == b


def test_dataset_requires_every_setting():
    full = tomography.simulate_dataset(states.sigma_b(0.1))
    with pytest.raises(ValidationError):
        TomoDataset(records=full.records[:-1])
    with pytest.raises(ValidationError):
        TomoDataset(records=full.records + [full.records[0]])


def test_record_requires_all_transitions():
    record = tomography.simulate_readout(states.sigma_b(0.1), "III")
    with pytest.raises(ValidationError):
        tomography.ReadoutRecord(setting="III", transitions=record.transitions[:11])


def test_dataset_json_round_trip(tmp_path):
    data = tomography.simulate_dataset(states.sigma_b(0.16), shots=1_000, seed=3)
    path = tmp_path / "nested" / "tomo.json"
    data.save_json(path)
    loaded = TomoDataset.load_json(path)
    assert [r.setting for r in loaded.records] == list(SETTINGS)
    np.testing.assert_allclose(
        tomography.reconstruct(loaded).rho_est.matrix,
        tomography.reconstruct(data).rho_est.matrix,
        atol=1e-12,
    )


def test_rows_carry_setting_and_indices():
    rows = tomography.simulate_dataset(states.sigma_b(0.1)).to_rows()
    assert len(rows) == 7 * 12
    assert set(rows[0]) == {"setting", "spin", "bra_index", "ket_index", "re", "im"}


def test_load_rejects_malformed_files(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(InvalidArgumentError):
        TomoDataset.load_json(path)

    rows = tomography.simulate_dataset(states.sigma_b(0.1)).to_rows()
    del rows[5]["setting"]
    with pytest.raises(InvalidArgumentError):
        TomoDataset.from_rows(rows)
    with pytest.raises(InvalidArgumentError):
        TomoDataset.from_rows({"setting": "III"})


def test_shot_noise_needs_a_seed():
    sigma = states.sigma_b(0.1)
    with pytest.raises(InvalidArgumentError):
        tomography.simulate_readout(sigma, "III", shots=100)
    with pytest.raises(InvalidArgumentError):
        tomography.simulate_dataset(sigma, shots=100)
    seeded = tomography.simulate_readout(sigma, "III", shots=100, rng=np.random.default_rng(4))
    assert seeded.shots == 100
