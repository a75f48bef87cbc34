import json
import math

import numpy as np
import pytest

from scatterspin.couplings import (
    CouplingMatrix,
    ModeData,
    couplings_from_modes,
    equal_couplings,
    load_couplings,
    load_modes,
    save_couplings,
    save_modes,
)
from scatterspin.errors import ResonanceError, ValidationError


def test_equal_couplings_basic():
    cp = equal_couplings(4, 1.0)
    assert cp.n == 4
    assert cp.pair_values().tolist() == [1.0] * 6
    assert cp.variance_j == 0.0
    assert cp.mean_j == 1.0


def test_equal_couplings_zero_and_negative():
    assert np.all(equal_couplings(2, 0.0).j == 0.0)
    cp = equal_couplings(3, -0.5)
    assert cp.mean_j == -0.5
    assert cp.variance_j == 0.0


def test_equal_couplings_needs_two_ions():
    with pytest.raises(ValidationError):
        equal_couplings(1, 1.0)


def test_matrix_validation():
    with pytest.raises(ValidationError):
        CouplingMatrix(2, np.array([[0.0, 1.0], [2.0, 0.0]]))  # asymmetric
    with pytest.raises(ValidationError):
        CouplingMatrix(2, np.array([[0.5, 1.0], [1.0, 0.0]]))  # diagonal
    with pytest.raises(ValidationError):
        CouplingMatrix(2, np.array([[0.0, np.nan], [np.nan, 0.0]]))


def test_single_mode_uniform():
    n, eta, omega_r, omega_m, mu = 3, 0.05, 2.0e4, 2 * math.pi * 1.0e6, 2 * math.pi * 1.01e6
    modes = ModeData(
        n=n,
        omegas=[omega_m],
        etas=[[eta]] * n,
        omegas_rabi=[omega_r] * n,
        mu=mu,
    )
    cp = couplings_from_modes(modes)
    expected = n * omega_r**2 * eta**2 * omega_m / (mu**2 - omega_m**2)
    off = cp.pair_values()
    assert np.allclose(off, expected, rtol=1e-13)
    assert cp.variance_j == 0.0


def test_zero_etas():
    modes = ModeData(2, [1.0e6], [[0.0], [0.0]], [1e4, 1e4], 1.1e6)
    assert np.all(couplings_from_modes(modes).j == 0.0)


def test_two_modes_hand_sum():
    omegas = [1.0e6, 1.3e6]
    etas = [[0.03, 0.01], [0.02, -0.04]]
    rabi = [1.5e4, 2.5e4]
    mu = 1.05e6
    modes = ModeData(2, omegas, etas, rabi, mu)
    cp = couplings_from_modes(modes)
    expected = 2 * rabi[0] * rabi[1] * sum(
        etas[0][m] * etas[1][m] * omegas[m] / (mu**2 - omegas[m] ** 2) for m in range(2)
    )
    assert cp.j[0, 1] == pytest.approx(expected, rel=1e-13)


def test_mode_permutation_invariance(rng):
    n, n_modes = 4, 5
    omegas = np.sort(rng.uniform(0.9e6, 1.4e6, n_modes))
    etas = rng.normal(0, 0.05, (n, n_modes))
    rabi = rng.uniform(1e4, 3e4, n)
    mu = 1.45e6
    cp1 = couplings_from_modes(ModeData(n, omegas, etas, rabi, mu))
    perm = rng.permutation(n_modes)
    cp2 = couplings_from_modes(ModeData(n, omegas[perm], etas[:, perm], rabi, mu))
    assert np.allclose(cp1.j, cp2.j, rtol=1e-12, atol=1e-20)


def test_resonance_rejected():
    with pytest.raises(ResonanceError):
        ModeData(2, [1.0e6], [[0.1], [0.1]], [1e4, 1e4], 1.0e6)


# ----------------------------------------------------------------------
# file round trips
# ----------------------------------------------------------------------


def test_upper_triangle_load(tmp_path):
    doc = {"n": 3, "upper": [[0, 1, 1.5], [0, 2, -0.5], [1, 2, 2.25]]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    cp = load_couplings(path)
    assert cp.j[1, 0] == 1.5 and cp.j[2, 0] == -0.5 and cp.j[2, 1] == 2.25


def test_couplings_round_trip_bit_identical(tmp_path, rng):
    from conftest import random_symmetric_couplings

    cp = random_symmetric_couplings(5, rng)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_couplings(cp, p1)
    loaded = load_couplings(p1)
    assert np.array_equal(loaded.j, cp.j)
    save_couplings(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_nan_rejected_with_location(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 2, "upper": [[0, 1, NaN]]}')
    with pytest.raises(ValidationError, match=r"upper\[0,1\]"):
        load_couplings(path)


def test_full_matrix_asymmetry_rejected():
    doc = {"n": 2, "matrix": [[0.0, 1.0], [1.0 + 1e-9, 0.0]]}
    with pytest.raises(ValidationError, match="asymmetric"):
        load_couplings(doc)


def test_full_matrix_small_asymmetry_mirrored():
    doc = {"n": 2, "matrix": [[0.0, 1.0], [1.0 + 1e-14, 0.0]]}
    cp = load_couplings(doc)
    assert cp.j[0, 1] == cp.j[1, 0]


def test_hz_units_key():
    doc = {"n": 2, "units": "hz", "upper": [[0, 1, 1.0]]}
    assert load_couplings(doc).j[0, 1] == pytest.approx(2 * math.pi)


def test_modes_round_trip(tmp_path, rng):
    modes = ModeData(
        3,
        rng.uniform(1e6, 2e6, 4),
        rng.normal(0, 0.05, (3, 4)),
        rng.uniform(1e4, 2e4, 3),
        2.5e6,
    )
    p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
    save_modes(modes, p1)
    loaded = load_modes(p1)
    assert np.array_equal(loaded.etas, modes.etas)
    assert np.array_equal(loaded.omegas, modes.omegas)
    assert loaded.mu == modes.mu
    save_modes(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_missing_file():
    with pytest.raises(ValidationError, match="cannot read"):
        load_couplings("/nonexistent/path.json")


def test_mean_variance_recomputable(rng):
    from conftest import random_symmetric_couplings

    cp = random_symmetric_couplings(6, rng)
    pairs = cp.pair_values()
    assert cp.mean_j == pytest.approx(pairs.mean(), rel=1e-13)
    assert cp.variance_j == pytest.approx(np.mean((pairs - cp.mean_j) ** 2), rel=1e-12)
    assert cp.variance_j >= 0.0
