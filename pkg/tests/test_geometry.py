import json

import numpy as np
import pytest

import curveflow as cf
from curveflow.geometry import (
    ClosureProjectionError,
    IntrinsicState,
    closure_project,
    closure_residual,
    kappa_sign_changes,
    make_named_curve,
    reconstruct_embedding,
    reconstruction_consistency_error,
    total_length,
    write_curve_csv,
)
from curveflow.grid import ParamGrid

from conftest import fitted_order


def oracle_closure(kappa_fn, g_fn, n=2048):
    """Closure residual by high-resolution quadrature, independent of the
    library path (left-point rule on a fine grid with spectral-accuracy
    via periodicity)."""
    s = np.arange(n) / n
    kappa = kappa_fn(s)
    g = g_fn(s)
    theta = np.concatenate([[0.0], np.cumsum((kappa * g)[:-1] + (kappa * g)[1:]) / (2 * n)])
    theta = np.concatenate([theta, [theta[-1] + (kappa[-1] * g[-1] + kappa[0] * g[0]) / (2 * n)]])
    tau = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    gw = np.concatenate([g, g[:1]])
    jump = np.array([
        np.sum((tau[:-1, 0] * gw[:-1] + tau[1:, 0] * gw[1:]) / (2 * n)),
        np.sum((tau[:-1, 1] * gw[:-1] + tau[1:, 1] * gw[1:]) / (2 * n)),
    ])
    jt = np.mean(kappa * g) - 2 * np.pi
    return jump, jt


class TestParamGrid:
    def test_rejects_small_or_odd(self):
        with pytest.raises(ValueError):
            ParamGrid(8)
        with pytest.raises(ValueError):
            ParamGrid(33)

    def test_state_rejects_negative_metric(self):
        grid = ParamGrid(32)
        with pytest.raises(ValueError):
            IntrinsicState(kappa=np.ones(32), g=-np.ones(32), grid=grid)


class TestReconstruction:
    def test_circle_traces_circle(self):
        st = make_named_curve("circle", 256, radius=2.0)
        emb = reconstruct_embedding(st)
        s = st.grid.s_values
        assert np.allclose(emb.theta, 2 * np.pi * s, atol=1e-12)
        # cumulative trapezoid is O(n^-2) pointwise
        radii = np.linalg.norm(emb.gamma - emb.gamma.mean(axis=0), axis=1)
        assert np.allclose(radii, 2.0, atol=1e-3)

    def test_unit_frames_and_orthogonality(self, trillium_256):
        emb = reconstruct_embedding(trillium_256)
        assert np.allclose(np.linalg.norm(emb.tau, axis=1), 1.0, atol=1e-14)
        assert np.allclose(np.linalg.norm(emb.normal, axis=1), 1.0, atol=1e-14)
        assert np.allclose(np.sum(emb.tau * emb.normal, axis=1), 0.0, atol=1e-14)

    def test_rigid_motion_equivariance(self, trillium_256):
        base = reconstruct_embedding(trillium_256)
        th, off = 0.7, np.array([0.3, -1.2])
        moved = reconstruct_embedding(trillium_256, theta0=th, gamma0=off)
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        assert np.allclose(moved.gamma, base.gamma @ rot.T + off, atol=1e-12)
        assert np.allclose(moved.theta, base.theta + th, atol=1e-12)

    def test_consistency_error_second_order(self):
        errs, hs = [], []
        for n in (64, 128, 256, 512):
            st = make_named_curve("trillium", n)
            errs.append(reconstruction_consistency_error(st))
            hs.append(1.0 / n)
        assert fitted_order(hs, errs) > 1.8

    def test_rejects_nonfinite_anchor(self, circle_256):
        with pytest.raises(ValueError):
            reconstruct_embedding(circle_256, theta0=np.nan)


class TestClosure:
    @pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
    def test_circle_residual_vanishes(self, radius):
        st = make_named_curve("circle", 256, radius=radius)
        assert closure_residual(st).norm < 1e-12

    def test_short_circle_theta_jump(self):
        # kappa = 1/R with only half the circumference: theta jump is -pi
        grid = ParamGrid(128)
        st = IntrinsicState(kappa=np.ones(128), g=np.full(128, np.pi), grid=grid)
        res = closure_residual(st)
        assert abs(res.jump_theta + np.pi) < 1e-12

    def test_single_mode_perturbation_closes_by_symmetry(self):
        # any single-frequency (m >= 2) perturbed circle closes exactly: the
        # m-fold symmetry sums the tangent over rotations by 2 pi / m
        grid = ParamGrid(256)
        s = grid.s_values
        st = IntrinsicState(kappa=1.0 + 0.3 * np.cos(2 * 2 * np.pi * s),
                            g=np.full(256, 2 * np.pi), grid=grid)
        res = closure_residual(st)
        jump, jt = oracle_closure(lambda u: 1.0 + 0.3 * np.cos(4 * np.pi * u),
                                  lambda u: np.full_like(u, 2 * np.pi))
        assert np.linalg.norm(jump) < 1e-12
        assert res.norm == pytest.approx(0.0, abs=1e-10)
        assert abs(res.jump_theta - jt) < 1e-12

    def test_mixed_mode_perturbation_breaks_closure(self):
        grid = ParamGrid(256)
        s = grid.s_values
        kfn = lambda u: 1.0 + 0.1 * np.cos(2 * np.pi * u) + 0.2 * np.cos(4 * np.pi * u)
        st = IntrinsicState(kappa=kfn(s), g=np.full(256, 2 * np.pi), grid=grid)
        res = closure_residual(st)
        jump, _ = oracle_closure(kfn, lambda u: np.full_like(u, 2 * np.pi), n=2048)
        assert np.linalg.norm(jump) > 1e-3
        # agreement limited by the library's O(n^-2) cumulative quadrature
        assert np.allclose(res.jump_gamma, jump, atol=1e-4)


class TestClosureProjection:
    def test_admissible_state_is_fixed_point(self, circle_256):
        out = closure_project(circle_256)
        assert np.array_equal(out.kappa, circle_256.kappa)

    def test_small_mode_one_perturbation_projects(self):
        grid = ParamGrid(256)
        s = grid.s_values
        st = IntrinsicState(kappa=1.0 + 1e-3 * np.cos(2 * np.pi * s),
                            g=np.full(256, 2 * np.pi), grid=grid)
        out = closure_project(st)
        assert closure_residual(out).norm <= 1e-10

    def test_idempotent(self, trillium_256):
        once = closure_project(trillium_256, tol=1e-12)
        twice = closure_project(once, tol=1e-12)
        assert np.max(np.abs(twice.kappa - once.kappa)) <= 1e-12

    def test_far_state_fails(self):
        grid = ParamGrid(64)
        s = grid.s_values
        # order-one closure defect: theta turns by ~6 pi
        st = IntrinsicState(kappa=np.full(64, 3.0) + np.cos(2 * np.pi * s),
                            g=np.full(64, 2 * np.pi), grid=grid)
        with pytest.raises(ClosureProjectionError) as err:
            closure_project(st, max_iter=5)
        assert err.value.residual_norm > 0


class TestNamedCurves:
    def test_circle_fields(self):
        st = make_named_curve("circle", 64, radius=1.0)
        assert np.allclose(st.kappa, 1.0)
        assert np.allclose(st.g, 2 * np.pi)

    def test_perturbed_circle_admissible(self):
        st = make_named_curve("perturbed_circle", 256, radius=1.0, mode=2, amplitude=0.3)
        assert closure_residual(st).norm < 1e-10
        assert abs(cf.integrate_dsigma(st.kappa, st) - 2 * np.pi) < 1e-10

    def test_trillium_nonconvex_three_lobed(self, trillium_256):
        assert closure_residual(trillium_256).norm < 1e-10
        assert kappa_sign_changes(trillium_256) == 6

    def test_unknown_family_and_params_rejected(self):
        with pytest.raises(ValueError):
            make_named_curve("square", 64)
        with pytest.raises(ValueError):
            make_named_curve("circle", 64, wiggle=1.0)


class TestTotalLength:
    def test_circle(self):
        st = make_named_curve("circle", 64, radius=1.0)
        assert total_length(st) == pytest.approx(2 * np.pi, abs=1e-13)

    def test_constant_metric(self):
        grid = ParamGrid(32)
        st = IntrinsicState(kappa=np.full(32, 2 * np.pi / 3.5), g=np.full(32, 3.5), grid=grid)
        assert total_length(st) == pytest.approx(3.5, abs=1e-14)

    def test_matches_fine_quadrature(self, trillium_256):
        # oracle: 8x resolution trapezoid of the interpolated metric; g is
        # constant for the named curves so agreement is exact
        fine = np.mean(np.interp(np.arange(2048) / 2048,
                                 np.concatenate([trillium_256.grid.s_values, [1.0]]),
                                 np.concatenate([trillium_256.g, trillium_256.g[:1]])))
        assert total_length(trillium_256) == pytest.approx(fine, rel=1e-10)


def test_curve_csv_export(tmp_path, trillium_256):
    path = write_curve_csv(trillium_256, tmp_path / "curve.csv")
    header = open(path).readline().strip().split(",")
    assert header == ["s", "kappa", "g", "gamma_x", "gamma_y", "theta"]
    sidecar = json.loads(open(str(path) + ".json").read())
    assert sidecar["n_points"] == 256
    assert sidecar["gauge"] == "scaled_arclength"
    assert sidecar["closure_residual"]["norm"] < 1e-9
