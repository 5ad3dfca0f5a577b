"""Variational solver: config, energy, AOS pieces, and full solves."""

import numpy as np
import pytest

import helpers
from contrastseg import (Annotations, SolverConfig, ValidationError,
                         binarize_supervision, cvm_energy, edge_map,
                         normalize_minmax, region_means, run_cvm, solve_cvm,
                         threshold)
from contrastseg.variational import SolveReport, _aos_axis, _thomas


def test_config_defaults():
    cfg = SolverConfig()
    assert (cfg.lam, cfg.iota, cfg.tau) == (5.0, 1000.0, 0.25)
    assert (cfg.max_iters, cfg.tol, cfg.grad_reg, cfg.gamma) == (200, 1e-4, 1e-4, 0.5)


def test_config_mapping_uses_lambda_key():
    cfg = SolverConfig(lam=2.5, max_iters=10)
    mapping = cfg.to_mapping()
    assert mapping["lambda"] == 2.5
    assert "lam" not in mapping
    back = SolverConfig.from_mapping(mapping)
    assert back == cfg


def test_config_from_mapping_ignores_foreign_keys():
    cfg = SolverConfig.from_mapping({"lambda": 3.0, "eta": 0.4, "theta": 9.0})
    assert cfg.lam == 3.0
    assert cfg.iota == 1000.0


@pytest.mark.parametrize("kw", [
    {"lam": 0.0}, {"iota": -1.0}, {"tau": 0.0}, {"max_iters": 0},
    {"tol": 0.0}, {"grad_reg": 0.0}, {"gamma": 0.0}, {"gamma": 1.0},
])
def test_config_validation(kw):
    with pytest.raises(ValidationError):
        SolverConfig(**kw).validate()


def test_report_mapping_keys():
    rep = SolveReport(iterations_used=2, final_max_delta=0.5,
                      energy_trace=[3.0, 2.0, 1.0], converged=True,
                      stop_reason="tolerance")
    mapping = rep.to_mapping()
    assert set(mapping) == {"iterations_used", "final_max_delta", "energy_trace",
                            "converged", "stop_reason"}
    assert mapping["energy_trace"] == [3.0, 2.0, 1.0]


def test_edge_map_constant_is_one():
    np.testing.assert_array_equal(edge_map(np.full((4, 5), 0.3), 1000.0),
                                  np.ones((4, 5)))


def test_edge_map_matches_loop_reference():
    z = np.random.default_rng(0).random((6, 7))
    np.testing.assert_allclose(edge_map(z, 250.0),
                               helpers.edge_map_loops(z, 250.0), rtol=1e-13)
    with pytest.raises(ValidationError):
        edge_map(z, 0.0)


def test_region_means_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(200):
        z = rng.random((5, 4))
        u = rng.random((5, 4))
        c1, c2 = region_means(z, u)
        b1, b2 = helpers.region_means_loops(z, u)
        assert abs(c1 - b1) <= 1e-12 and abs(c2 - b2) <= 1e-12


def test_region_means_degenerate_sides():
    z = np.array([[0.1, 0.9], [0.4, 0.6]])
    c1, c2 = region_means(z, np.zeros((2, 2)))
    assert c1 == z.mean() and c2 == z.mean()
    c1, c2 = region_means(z, np.ones((2, 2)))
    assert c1 == z.mean() and c2 == z.mean()
    with pytest.raises(ValidationError):
        region_means(z, np.zeros((3, 2)))


def test_cvm_energy_matches_loop_reference():
    rng = np.random.default_rng(2)
    cfg = SolverConfig(lam=4.0, iota=300.0)
    for _ in range(20):
        z = rng.random((5, 6))
        u = rng.random((5, 6))
        c1, c2 = region_means(z, u)
        got = cvm_energy(u, z, c1, c2, cfg)
        ref = helpers.energy_loops(u, z, cfg.lam, cfg.iota)
        assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref))


def test_cvm_energy_extra_term():
    rng = np.random.default_rng(3)
    z = rng.random((4, 4))
    u = rng.random((4, 4))
    extra = rng.random((4, 4))
    cfg = SolverConfig()
    c1, c2 = region_means(z, u)
    base = cvm_energy(u, z, c1, c2, cfg)
    with_extra = cvm_energy(u, z, c1, c2, cfg, extra=extra)
    assert with_extra == pytest.approx(base + float((extra * u).sum()), abs=1e-12)


def test_thomas_matches_dense_solver():
    rng = np.random.default_rng(4)
    for n in (1, 2, 3, 8):
        lower = rng.random((5, max(n - 1, 1)))
        upper = rng.random((5, max(n - 1, 1)))
        diag = 2.0 + rng.random((5, n))  # diagonally dominant
        rhs = rng.random((5, n))
        got = _thomas(lower, diag, upper, rhs)
        for row in range(5):
            full = np.diag(diag[row])
            if n > 1:
                full += np.diag(lower[row, :n - 1], -1) + np.diag(upper[row, :n - 1], 1)
            np.testing.assert_allclose(got[row], np.linalg.solve(full, rhs[row]),
                                       rtol=1e-10)


def test_aos_axis_solves_semi_implicit_system():
    # (I - 2 tau A) x = b with Neumann A built from half-grid diffusivities.
    rng = np.random.default_rng(5)
    d = rng.random((3, 6)) + 0.1
    b = rng.random((3, 6))
    tau = 0.25
    x = _aos_axis(d, b, tau)
    w = 2.0 * tau * 0.5 * (d[:, :-1] + d[:, 1:])
    for row in range(3):
        mat = np.zeros((6, 6))
        for i in range(5):
            mat[i, i] += w[row, i]
            mat[i + 1, i + 1] += w[row, i]
            mat[i, i + 1] -= w[row, i]
            mat[i + 1, i] -= w[row, i]
        sys = np.eye(6) + mat
        np.testing.assert_allclose(x[row], np.linalg.solve(sys, b[row]), rtol=1e-10)


def test_aos_axis_single_column_is_identity():
    b = np.array([[0.3], [0.7]])
    np.testing.assert_array_equal(_aos_axis(np.ones((2, 1)), b, 0.25), b)


def test_solve_constant_field_is_degenerate():
    u, rep = solve_cvm(np.full((5, 5), 0.4))
    np.testing.assert_array_equal(u, np.zeros((5, 5)))
    assert rep.stop_reason == "degenerate"
    assert rep.converged
    assert rep.iterations_used == 0
    assert rep.energy_trace == [0.0]


def test_solve_recovers_two_valued_majority():
    rng = np.random.default_rng(6)
    cfg = SolverConfig(lam=5.0, iota=1e-30, tau=0.25, max_iters=500,
                       tol=1e-6, grad_reg=1.0)
    z = helpers.two_valued_field(rng, 4)
    u, rep = solve_cvm(z, cfg)
    np.testing.assert_array_equal(threshold(u, 0.5), (z == z.max()).astype(np.uint8))
    assert 0.0 <= u.min() and u.max() <= 1.0


def test_solve_report_invariants():
    rng = np.random.default_rng(7)
    for _ in range(10):
        z = rng.random((8, 9))
        cfg = SolverConfig(max_iters=int(rng.integers(1, 40)))
        u, rep = solve_cvm(z, cfg)
        assert len(rep.energy_trace) == rep.iterations_used + 1
        assert rep.stop_reason in ("tolerance", "max_iters", "energy_increase",
                                   "degenerate")
        assert rep.converged == (rep.stop_reason in ("tolerance", "degenerate"))
        trace = np.array(rep.energy_trace)
        assert np.all(np.diff(trace) <= 1e-12 * np.maximum(1.0, np.abs(trace[:-1])))
        assert u.min() >= 0.0 and u.max() <= 1.0


def test_solve_huge_tolerance_stops_immediately():
    z = np.random.default_rng(8).random((6, 6))
    u, rep = solve_cvm(z, SolverConfig(tol=10.0))
    assert rep.stop_reason == "tolerance"
    assert rep.iterations_used == 1
    assert rep.converged


def test_solve_max_iters_cap():
    z = np.random.default_rng(9).random((6, 6))
    u, rep = solve_cvm(z, SolverConfig(max_iters=1, tol=1e-15))
    assert rep.iterations_used <= 1
    if rep.stop_reason == "max_iters":
        assert not rep.converged


def test_solve_rejects_bad_input():
    with pytest.raises(ValidationError):
        solve_cvm(np.array([[0.0, 2.0]]))
    with pytest.raises(ValidationError):
        solve_cvm(np.random.default_rng(10).random((3, 3)),
                  SolverConfig(tau=-1.0))


def _synth_run(seed=0, jobs=1, eta=0.6):
    rng = np.random.default_rng(seed)
    gt = np.zeros((12, 12))
    gt[3:9, 3:9] = 1.0
    centers = np.where(gt[None] == 1.0, [[[1.0]], [[0.0]]], [[[0.0]], [[1.0]]])
    features = centers + 0.05 * rng.normal(size=(2, 12, 12))
    ann = Annotations(image_width=12, image_height=12, reduction_factor=1,
                      in_target=[(5, 5), (4, 6)],
                      out_of_target=[(0, 0), (11, 11)]).validate()
    return features, ann, run_cvm(features, ann, eta=eta, jobs=jobs)


def test_run_cvm_aggregation_formula():
    _, _, (u, per_point, reports) = _synth_run()
    assert len(per_point) == 2 and len(reports) == 2
    np.testing.assert_array_equal(
        u, normalize_minmax(np.mean(np.stack(per_point), axis=0)))


def test_run_cvm_jobs_bitwise_identical():
    _, _, (u1, pp1, _) = _synth_run(jobs=1)
    _, _, (u4, pp4, _) = _synth_run(jobs=4)
    np.testing.assert_array_equal(u1, u4)
    for a, b in zip(pp1, pp4):
        np.testing.assert_array_equal(a, b)


def test_binarize_supervision_is_threshold():
    u = np.random.default_rng(11).random((5, 5))
    np.testing.assert_array_equal(binarize_supervision(u, 0.3), threshold(u, 0.3))
    np.testing.assert_array_equal(binarize_supervision(u), threshold(u, 0.5))
