"""Typicality state preparation: reproducibility, projection, weights and
the effective-dimension estimators."""

import numpy as np
import pytest

from spinbath import chebyshev, model, typicality


def _bath_sectors(l=2):
    lat = model.LatticeSpec(l)
    cpl = model.CouplingSpec()
    hb = model.build_bath_hamiltonian(lat, cpl)
    sectors = model.enumerate_sectors(lat.N)
    hb_sec = {s.n_up: model.restrict_to_sector(hb, s) for s in sectors}
    return lat, hb, sectors, hb_sec


def test_haar_vector_reproducible():
    a = typicality.draw_haar_vector(64, 5)
    b = typicality.draw_haar_vector(64, 5)
    c = typicality.draw_haar_vector(64, 6)
    t = typicality.draw_haar_vector(64, (5, 2))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, t)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-12
    with pytest.raises(model.ModelError):
        typicality.draw_haar_vector(0, 1)


def test_project_system_up():
    lat, hb, sectors, hb_sec = _bath_sectors()
    sec = sectors[3]
    v = typicality.draw_haar_vector(sec.dim, 1)
    p = typicality.project_system_up(v, sec)
    down = (sec.states & 1) == 0
    assert np.all(p[down] == 0)
    assert np.array_equal(p[~down], v[~down])


def test_prepare_ensemble_weights():
    lat, hb, sectors, hb_sec = _bath_sectors()
    spec = typicality.InitialStateSpec(E=-0.9, delta=0.1, seed=3)
    ens = typicality.prepare_ensemble(sectors, spec, hb_sec)
    weights = [m.weight for m in ens.members]
    assert abs(sum(weights) - 1.0) < 1e-12
    assert all(w > 0 for w in weights)
    assert all(m.sector.n_up > 0 for m in ens.members)
    for m in ens.members:
        assert abs(np.linalg.norm(m.state) - 1.0) < 1e-10
    # deterministic for a fixed seed
    ens2 = typicality.prepare_ensemble(sectors, spec, hb_sec)
    assert np.array_equal(ens.members[0].state, ens2.members[0].state)


def test_prepared_state_sits_in_window():
    lat, hb, sectors, hb_sec = _bath_sectors()
    spec = typicality.InitialStateSpec(E=-0.9, delta=0.1, seed=1)
    ens = typicality.prepare_ensemble(sectors, spec, hb_sec)
    e_mean = sum(m.weight * chebyshev.expectation(hb_sec[m.sector.n_up],
                                                  m.state)
                 for m in ens.members)
    assert abs(e_mean - spec.E) < 0.25


def test_invalid_delta():
    with pytest.raises(model.ModelError):
        typicality.InitialStateSpec(E=0.0, delta=0.0)


def test_window_energy_scaling():
    assert typicality.InitialStateSpec.window_energy(10) == \
        pytest.approx(-1.35)
    assert typicality.InitialStateSpec.window_energy(13) == \
        pytest.approx(-1.8)


def test_exact_effective_dimension_against_full_space():
    lat, hb, sectors, hb_sec = _bath_sectors()
    spec = typicality.InitialStateSpec(E=-0.9, delta=0.1)
    d_eff = typicality.exact_effective_dimension(spec, sectors, hb_sec)
    # independent route: full-space density (system up) x g^2(H_bath)
    evals, evecs = np.linalg.eigh(hb.dense())
    g2 = np.exp(-((evals - spec.E) ** 2) / spec.delta)
    up = (np.arange(hb.dim) & 1) != 0
    pop = np.sum(np.abs(evecs[up, :]) ** 2, axis=0)  # <k|pi_up|k>
    tr_p = np.sum(pop * g2)
    # pi_up commutes with H_bath, so P^2 = pi_up g^4
    tr_p2 = np.sum(pop * g2 ** 2)
    assert abs(d_eff - tr_p ** 2 / tr_p2) < 1e-8 * d_eff


def test_effective_dimension_stochastic_matches_exact():
    lat, hb, sectors, hb_sec = _bath_sectors()
    spec = typicality.InitialStateSpec(E=-0.9, delta=0.1, seed=2)
    exact = typicality.exact_effective_dimension(spec, sectors, hb_sec)
    est, stderr = typicality.effective_dimension(spec, sectors, hb_sec,
                                                 n_samples=24)
    assert abs(est - exact) < max(5 * stderr, 0.25 * exact)


def test_error_scaling_structure():
    lat, hb, sectors, hb_sec = _bath_sectors()
    cpl = model.CouplingSpec()
    hs = model.build_system_hamiltonian(cpl, n_spins=lat.N)
    hi = model.build_interaction_hamiltonian(lat)
    h = model.assemble_total(hs, hb, hi, 0.2)
    h_sec = {s.n_up: model.restrict_to_sector(h, s) for s in sectors}
    sz = model.build_sz(0, lat.N)
    sz_sec = {s.n_up: model.restrict_to_sector(sz, s) for s in sectors}
    spec = typicality.InitialStateSpec(E=-0.9, delta=0.1, seed=1)
    res = typicality.typicality_error_scaling(
        spec, sectors, hb_sec, h_sec, sz_sec, deltas=[0.1, 0.4],
        probe_time=5.0, n_seeds=10)
    assert len(res) == 2
    for delta, d_eff, err in res:
        assert d_eff > 1
        assert err.std > 0
        assert err.n_draws == 10
        assert abs(err.mean) < 0.5
    with pytest.raises(model.ModelError):
        typicality.typicality_error_scaling(
            spec, sectors, hb_sec, h_sec, sz_sec, deltas=[0.1],
            probe_time=1.0, n_seeds=3)


def test_manifest_roundtrip(tmp_path):
    import json
    lat, hb, sectors, hb_sec = _bath_sectors()
    spec = typicality.InitialStateSpec(E=-0.9, delta=0.1, seed=3)
    ens = typicality.prepare_ensemble(sectors, spec, hb_sec)
    path = tmp_path / "manifest.json"
    typicality.save_manifest(path, ens, spec)
    data = json.loads(path.read_text())
    assert data["E"] == -0.9
    assert abs(sum(s["weight"] for s in data["sectors"]) - 1.0) < 1e-12
