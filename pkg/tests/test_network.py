import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density, random_hermitian
from noisetransport.network import (
    FMO_HAMILTONIAN_CM,
    ExcitonState,
    NetworkSpec,
    SpecError,
    build_generator,
    fcn_preset,
    fmo_preset,
    load_network,
    save_network,
    spec_from_json,
)


def _two_site(alpha, gamma=0.7):
    deph = gamma * np.array([[1.0, alpha], [alpha, 1.0]])
    return NetworkSpec(np.zeros((2, 2)), np.zeros(2), deph, sink_site=2, sink_rate=0.0)


ANTISYMMETRIC = ExcitonState.pure([1.0, -1.0])


def test_fcn_preset_layout():
    spec = fcn_preset(10)
    h = spec.hamiltonian.real
    assert np.all(np.diag(h) == 0)
    assert np.all(h[~np.eye(10, dtype=bool)] == 1)
    assert spec.sink_site == 10 and spec.sink_rate == 1.0


def test_fcn_preset_minimal_and_rejects_single_site():
    assert fcn_preset(2).n_sites == 2
    with pytest.raises(SpecError):
        fcn_preset(1)


def test_fcn_preset_uniform_dephasing():
    spec = fcn_preset(5, gamma=0.3)
    np.testing.assert_array_equal(spec.dephasing, 0.3 * np.eye(5))


def test_fmo_preset_constants():
    spec = fmo_preset()
    assert spec.hamiltonian[0, 1].real == pytest.approx(-104.1)
    assert spec.hamiltonian[4, 4].real == pytest.approx(450.0)
    assert spec.sink_site == 3
    assert spec.sink_rate == pytest.approx(6.283, abs=0.03)
    # lifetime of about a nanosecond
    assert 2 * spec.dissipation[0] == pytest.approx(1.0e-3, rel=0.01)
    np.testing.assert_array_equal(spec.hamiltonian.real, FMO_HAMILTONIAN_CM)


def test_generator_initial_derivative_fcn3():
    gen = build_generator(fcn_preset(3))
    d = gen(ExcitonState.localized(3, 1))
    assert d.rho[0, 0] == 0
    # -i[H, rho] with rho = |1><1|: d rho_12 = i J rho_11
    assert d.rho[0, 1] == pytest.approx(1j)
    assert d.rho[1, 0] == pytest.approx(-1j)


def test_two_site_symmetric_correlation_freezes_antisymmetric_state():
    d = build_generator(_two_site(1.0))(ANTISYMMETRIC)
    assert np.linalg.norm(d.rho) < 1e-14


@pytest.mark.parametrize("alpha, rate", [(0.0, 2.0), (-1.0, 4.0), (0.5, 1.0)])
def test_two_site_coherence_decay_rate(alpha, rate):
    gamma = 0.7
    d = build_generator(_two_site(alpha, gamma))(ANTISYMMETRIC)
    assert d.rho[0, 1] / ANTISYMMETRIC.rho[0, 1] == pytest.approx(-rate * gamma)
    # populations are untouched by pure dephasing
    assert abs(d.rho[0, 0]) < 1e-15


def test_non_psd_dephasing_rejected_with_eigenvalue():
    spec = _two_site(1.5)
    with pytest.raises(SpecError, match="-0.35"):
        spec.validate()
    with pytest.raises(SpecError):
        build_generator(spec)
    build_generator(spec, check=False)


def test_non_hermitian_hamiltonian_rejected():
    h = np.array([[0, 1], [2, 0]], dtype=float)
    spec = NetworkSpec(h, np.zeros(2), 0.0, sink_site=2, sink_rate=1.0)
    with pytest.raises(SpecError, match="Hermitian"):
        spec.validate()


def test_negative_rates_rejected():
    with pytest.raises(SpecError):
        NetworkSpec(np.zeros((2, 2)), [-1.0, 0.0], 0.0, 2, 1.0).validate()
    with pytest.raises(SpecError):
        NetworkSpec(np.zeros((2, 2)), 0.0, 0.0, 2, -1.0).validate()


def test_bad_sink_site():
    with pytest.raises(SpecError):
        NetworkSpec(np.zeros((3, 3)), 0.0, 0.0, 4, 1.0)


def test_diagonal_dephasing_matches_local_form(rng):
    rates = rng.uniform(0, 2, 4)
    a = fcn_preset(4).with_dephasing(rates)
    b = fcn_preset(4).with_dephasing(np.diag(rates))
    state = ExcitonState(random_density(rng, 4))
    da, db = build_generator(a)(state), build_generator(b)(state)
    np.testing.assert_array_equal(da.rho, db.rho)
    off = ~np.eye(4, dtype=bool)
    # local pure dephasing damps rho_ij at gamma_i + gamma_j
    da0 = build_generator(fcn_preset(4))(state)
    expected = -(rates[:, None] + rates[None, :]) * state.rho
    np.testing.assert_allclose((da.rho - da0.rho)[off], expected[off], atol=1e-14)


@st.composite
def random_problem(draw):
    n = draw(st.integers(2, 6))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    spec = NetworkSpec(
        random_hermitian(rng, n),
        rng.uniform(0, 1, n),
        a @ a.conj().T * draw(st.floats(0, 2)),
        sink_site=draw(st.integers(1, n)),
        sink_rate=draw(st.floats(0, 5)),
    )
    state = ExcitonState(random_density(rng, n, 0.6), p_ground=0.1, p_sink=0.3)
    return spec, state


@given(random_problem())
def test_generator_conserves_probability(problem):
    spec, state = problem
    d = build_generator(spec)(state)
    assert abs(np.trace(d.rho).real + d.p_ground + d.p_sink) < 1e-12 * max(1.0, np.abs(d.rho).max())


@given(random_problem())
def test_generator_preserves_hermiticity(problem):
    spec, state = problem
    d = build_generator(spec)(state).rho
    assert np.abs(d - d.conj().T).max() < 1e-12 * max(1.0, np.abs(d).max())


@given(random_problem())
def test_superoperator_matches_direct_action(problem):
    spec, state = problem
    gen = build_generator(spec)
    direct = gen(state)
    via_matrix = gen.unpack(gen.superoperator() @ gen.pack(state))
    np.testing.assert_allclose(via_matrix.rho, direct.rho, atol=1e-12)
    assert via_matrix.p_sink == pytest.approx(direct.p_sink, abs=1e-12)
    assert via_matrix.p_ground == pytest.approx(direct.p_ground, abs=1e-12)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.floats(0.01, 1.0))
def test_psd_rejection_property(n, seed, depth):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    evals = rng.uniform(0, 1, n)
    evals[0] = -depth
    spec = fcn_preset(n).with_dephasing(q @ np.diag(evals) @ q.T)
    with pytest.raises(SpecError):
        spec.validate()


def test_json_round_trip(tmp_path, rng):
    spec = fmo_preset().with_dephasing(np.eye(7) * 2.0)
    path = tmp_path / "fmo.json"
    save_network(spec, path)
    again = load_network(path)
    np.testing.assert_array_equal(again.hamiltonian, spec.hamiltonian)
    np.testing.assert_array_equal(again.dephasing, spec.dephasing)
    assert again.sink_rate == spec.sink_rate and again.unit_system == "cm_inverse_ps"


def test_json_complex_pairs_and_diagonal_list():
    data = {
        "n_sites": 2,
        "hamiltonian": [[[0, 0], [1, 0.5]], [[1, -0.5], [0, 0]]],
        "dephasing": [0.1, 0.2],
        "sink_site": 2,
        "sink_rate": 1.0,
    }
    spec = spec_from_json(data)
    assert spec.hamiltonian[0, 1] == 1 + 0.5j
    np.testing.assert_array_equal(spec.dephasing, np.diag([0.1, 0.2]))


def test_json_errors(tmp_path):
    with pytest.raises(SpecError, match="sink_rate"):
        spec_from_json({"hamiltonian": [[0, 1], [1, 0]], "sink_site": 2})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(json.JSONDecodeError):
        load_network(bad)


def test_state_validation():
    ExcitonState.localized(3, 2).validate()
    with pytest.raises(SpecError):
        ExcitonState.localized(3, 4)
    with pytest.raises(SpecError):
        ExcitonState(np.diag([0.5, 0.2])).validate()
