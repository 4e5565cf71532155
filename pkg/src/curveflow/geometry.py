"""Intrinsic representation of closed planar curves.

A curve is stored as curvature and arc-length-metric samples U = (kappa, g)
on the reference grid.  The embedding (gamma, theta, tangent, normal) is
reconstructed by integrating theta' = kappa*g and gamma' = tau(theta)*g; a
state is admissible when the three closure conditions vanish: the position
jump of gamma over one period (2 components) and the tangent-angle jump
minus 2*pi.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .derivatives import (
    DEFAULT_SCHEME,
    cumulative_trapezoid,
    d_ds,
    periodic_mean,
)
from .grid import ParamGrid, frozen_array


class ClosureProjectionError(RuntimeError):
    """Newton projection onto the closure constraints failed to converge."""

    def __init__(self, message, residual_norm, iterations):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


@dataclass(frozen=True)
class IntrinsicState:
    """Curvature and metric samples (kappa, g) on a ParamGrid.

    In the scaled-arc-length gauge g is spatially constant; general g arrays
    are accepted (needed for co-moving right-hand-side evaluation).
    """

    kappa: np.ndarray
    g: np.ndarray
    grid: ParamGrid

    def __post_init__(self):
        n = self.grid.n_points
        object.__setattr__(self, "kappa", frozen_array(self.kappa, n))
        object.__setattr__(self, "g", frozen_array(self.g, n))
        if np.any(self.g <= 0.0):
            raise ValueError("metric g must be strictly positive")

    @property
    def n(self):
        return self.grid.n_points

    @property
    def is_scaled_arclength(self):
        return float(np.ptp(self.g)) == 0.0

    def with_kappa(self, kappa):
        return IntrinsicState(kappa=kappa, g=self.g, grid=self.grid)

    def with_g(self, g):
        return IntrinsicState(kappa=self.kappa, g=frozen_array(g, self.n), grid=self.grid)


@dataclass(frozen=True)
class CurveEmbedding:
    """Reconstructed embedding samples: positions, tangent angle, frames."""

    gamma: np.ndarray   # (n, 2)
    theta: np.ndarray   # (n,)
    tau: np.ndarray     # (n, 2) unit tangent
    normal: np.ndarray  # (n, 2) outward unit normal

    def __post_init__(self):
        for name in ("gamma", "theta", "tau", "normal"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class ClosureResidual:
    """The three closure defects: gamma jump (2-vector) and theta jump - 2*pi."""

    jump_gamma: np.ndarray
    jump_theta: float

    def as_vector(self):
        return np.array([self.jump_gamma[0], self.jump_gamma[1], self.jump_theta])

    @property
    def norm(self):
        return float(np.linalg.norm(self.as_vector()))


def tangent_from_angle(theta):
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def normal_from_angle(theta):
    return np.stack([np.sin(theta), -np.cos(theta)], axis=-1)


def total_length(state):
    """Total curve length: the full-period quadrature of g."""
    return periodic_mean(state.g)


def reconstruct_embedding(state, theta0=0.0, gamma0=(0.0, 0.0)):
    """Integrate the frame ODE to recover the embedding from U = (kappa, g).

    theta(s) = theta0 + cumulative integral of kappa dsigma and
    gamma(s) = gamma0 + cumulative integral of tau(theta) dsigma, both by
    cumulative trapezoid on the uniform grid.  theta0/gamma0 fix the rigid
    motion left free by the intrinsic representation.
    """
    theta0 = float(theta0)
    gamma0 = np.asarray(gamma0, dtype=float)
    if not (np.isfinite(theta0) and np.all(np.isfinite(gamma0))):
        raise ValueError("theta0 and gamma0 must be finite")
    theta = theta0 + cumulative_trapezoid(state.kappa * state.g)[:-1]
    tau = tangent_from_angle(theta)
    nrm = normal_from_angle(theta)
    gx = gamma0[0] + cumulative_trapezoid(tau[:, 0] * state.g)[:-1]
    gy = gamma0[1] + cumulative_trapezoid(tau[:, 1] * state.g)[:-1]
    return CurveEmbedding(gamma=np.stack([gx, gy], axis=-1), theta=theta, tau=tau, normal=nrm)


def closure_residual(state, theta0=0.0):
    """Evaluate the jump functional by full-period quadrature.

    The gamma jump integrates tau(theta) over one period; when the theta
    jump itself is off 2*pi the wrap sample tau(theta_n) differs from
    tau(theta_0) and the trapezoid rule accounts for it.
    """
    theta_full = float(theta0) + cumulative_trapezoid(state.kappa * state.g)
    jump_theta = theta_full[-1] - theta_full[0] - 2.0 * np.pi
    tau = tangent_from_angle(theta_full)
    gw = np.concatenate([state.g, state.g[:1]])
    fx = tau[:, 0] * gw
    fy = tau[:, 1] * gw
    n = state.n
    jump = np.array([
        (0.5 * fx[0] + fx[1:-1].sum() + 0.5 * fx[-1]) / n,
        (0.5 * fy[0] + fy[1:-1].sum() + 0.5 * fy[-1]) / n,
    ])
    return ClosureResidual(jump_gamma=jump, jump_theta=float(jump_theta))


def _closure_directions(state):
    """Gradient directions of the closure constraints with respect to kappa.

    The jump-theta gradient in the dsigma pairing is the constant 1; the
    gamma-jump gradients are minus the tail integrals of the normal
    components, evaluated from the current reconstruction.
    """
    emb = reconstruct_embedding(state)
    n = state.n
    w3 = np.ones(n)
    c1 = cumulative_trapezoid(emb.normal[:, 0] * state.g)
    c2 = cumulative_trapezoid(emb.normal[:, 1] * state.g)
    w1 = -(c1[-1] - c1[:-1])
    w2 = -(c2[-1] - c2[:-1])
    return w1, w2, w3


def closure_project(state, tol=1e-10, max_iter=30):
    """Project U onto the admissible set by Newton in a 3-parameter family.

    The curvature is corrected along the three quadrature-adjoint gradient
    directions of the jump functional (the minimal least-squares correction
    to first order); g is untouched, and in the scaled-arc-length gauge any
    g adjustment would be a uniform rescale.  Raises
    :class:`ClosureProjectionError` outside the Newton basin.
    """
    res = closure_residual(state)
    if res.norm <= tol:
        return state
    current = state
    for iteration in range(1, max_iter + 1):
        w1, w2, w3 = _closure_directions(current)
        directions = (w1, w2, w3)
        r0 = closure_residual(current).as_vector()
        jac = np.empty((3, 3))
        h = 1e-6 / max(1.0, float(np.max(np.abs(current.kappa))))
        for j, w in enumerate(directions):
            rp = closure_residual(current.with_kappa(current.kappa + h * w)).as_vector()
            rm = closure_residual(current.with_kappa(current.kappa - h * w)).as_vector()
            jac[:, j] = (rp - rm) / (2.0 * h)
        try:
            coeffs = np.linalg.solve(jac, -r0)
        except np.linalg.LinAlgError as exc:
            raise ClosureProjectionError(
                f"singular closure Jacobian after {iteration} iterations",
                float(np.linalg.norm(r0)), iteration) from exc
        kappa_new = current.kappa + sum(c * w for c, w in zip(coeffs, directions))
        current = current.with_kappa(kappa_new)
        r_norm = closure_residual(current).norm
        if r_norm <= tol:
            return current
        if not np.isfinite(r_norm) or r_norm > 10.0 * (1.0 + res.norm):
            break
    raise ClosureProjectionError(
        f"closure projection did not reach {tol:g} after {max_iter} iterations",
        closure_residual(current).norm, max_iter)


NAMED_CURVES = ("circle", "perturbed_circle", "trillium")


def make_named_curve(name, n_points=256, **params):
    """Build an admissible state from one of the named families.

    circle(radius) is exact; perturbed_circle(radius, mode, amplitude) and
    trillium(radius, amplitude, asymmetry) are closure-projected.  The
    trillium is kappa = (2*pi/L)(1 + a cos(3*2*pi*s) + asym cos(2*pi*s)),
    g = L = 2*pi*radius; the defaults give a non-convex, slightly
    asymmetric three-lobe curve.
    """
    grid = ParamGrid(n_points)
    s = grid.s_values
    if name == "circle":
        radius = float(params.pop("radius", 1.0))
        _reject_unknown(params, name)
        if radius <= 0:
            raise ValueError("radius must be positive")
        return IntrinsicState(kappa=np.full(n_points, 1.0 / radius),
                              g=np.full(n_points, 2.0 * np.pi * radius), grid=grid)
    if name == "perturbed_circle":
        radius = float(params.pop("radius", 1.0))
        mode = int(params.pop("mode", 2))
        amplitude = float(params.pop("amplitude", 0.3))
        _reject_unknown(params, name)
        if radius <= 0:
            raise ValueError("radius must be positive")
        kappa = (1.0 + amplitude * np.cos(mode * 2.0 * np.pi * s)) / radius
        state = IntrinsicState(kappa=kappa, g=np.full(n_points, 2.0 * np.pi * radius), grid=grid)
        return closure_project(state)
    if name == "trillium":
        radius = float(params.pop("radius", 1.0))
        amplitude = float(params.pop("amplitude", 1.2))
        asymmetry = float(params.pop("asymmetry", 0.1))
        _reject_unknown(params, name)
        length = 2.0 * np.pi * radius
        kappa = (2.0 * np.pi / length) * (1.0 + amplitude * np.cos(3.0 * 2.0 * np.pi * s)
                                          + asymmetry * np.cos(2.0 * np.pi * s))
        state = IntrinsicState(kappa=kappa, g=np.full(n_points, length), grid=grid)
        return closure_project(state)
    raise ValueError(f"unknown curve family {name!r}; expected one of {NAMED_CURVES}")


def _reject_unknown(params, name):
    if params:
        raise ValueError(f"unknown parameters for {name}: {sorted(params)}")


def kappa_sign_changes(state):
    """Count sign changes of kappa over one period (6 for the default trillium)."""
    signs = np.sign(state.kappa)
    signs = signs[signs != 0]
    return int(np.sum(signs != np.roll(signs, 1)))


def write_curve_csv(state, path, theta0=0.0, gamma0=(0.0, 0.0), metadata=None):
    """Export s, kappa, g, gamma_x, gamma_y, theta plus a JSON metadata sidecar."""
    emb = reconstruct_embedding(state, theta0, gamma0)
    res = closure_residual(state)
    path = str(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "kappa", "g", "gamma_x", "gamma_y", "theta"])
        for j, s in enumerate(state.grid.s_values):
            writer.writerow([f"{v:.17e}" for v in
                             (s, state.kappa[j], state.g[j],
                              emb.gamma[j, 0], emb.gamma[j, 1], emb.theta[j])])
    sidecar = {
        "n_points": state.n,
        "gauge": "scaled_arclength" if state.is_scaled_arclength else "general",
        "total_length": total_length(state),
        "closure_residual": {
            "jump_gamma": [res.jump_gamma[0], res.jump_gamma[1]],
            "jump_theta": res.jump_theta,
            "norm": res.norm,
        },
    }
    if metadata:
        sidecar.update(metadata)
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
    return path


def reconstruction_consistency_error(state, scheme=DEFAULT_SCHEME):
    """Max-norm defect of recovering kappa from the reconstructed theta.

    theta winds by 2*pi per period, so the periodic stencil acts on the
    periodic part theta - 2*pi*s.
    """
    emb = reconstruct_embedding(state)
    s = state.grid.s_values
    kappa_rec = (d_ds(emb.theta - 2.0 * np.pi * s, scheme) + 2.0 * np.pi) / state.g
    return float(np.max(np.abs(kappa_rec - state.kappa)))
