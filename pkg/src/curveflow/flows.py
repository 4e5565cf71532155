"""Time integration of the curve/density flow families.

The three families (phase separation, penalized incompressible, reduced
incompressible) plus the length-penalized Willmore comparison flow share a
first-order IMEX stepper: the stiffest constant-coefficient terms are
solved implicitly per block (circulant symbols in the scaled-arc-length
gauge, a dense -H/eps block for the membrane density), the remainder is
explicit, and the nonlinear part is formed as N(y) = f(y) - A y so the
scheme is consistent with the assembled right-hand side for any A.  Error
control is by step doubling; the accepted state is the locally
extrapolated 2 y_half - y_full.

The agent density is stepped in the conservative variable q = rho g, whose
discrete right-hand side is an exact divergence, so the total agent mass
is conserved to roundoff regardless of the step size.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .calculus import (
    HelmholtzOperator,
    grad_s,
    helmholtz_solve,
    hs_norm,
    incompressibility_apply,
    inner_dsigma,
    integrate_dsigma,
    laplace_s,
)
from .derivatives import DEFAULT_SCHEME, d_ds, d_ds_symbol, d_ds_matrix
from .energies import DoubleWell, EnergyModel
from .geometry import IntrinsicState, closure_project, closure_residual, total_length
from .kinematics import (
    ExtrinsicVelocity,
    IntrinsicVelocity,
    apply_M,
    gauge_scaled_arclength,
    geometry_operator,
    gradient_normal_velocity,
)


@dataclass(frozen=True)
class FlowState:
    """Intrinsic state plus the optional embedded densities at time t."""

    state: IntrinsicState
    rho: Optional[np.ndarray] = None
    rho_m: Optional[np.ndarray] = None
    t: float = 0.0

    def __post_init__(self):
        for name in ("rho", "rho_m"):
            val = getattr(self, name)
            if val is not None:
                arr = np.array(val, dtype=float)
                if arr.shape != (self.state.n,):
                    raise ValueError(f"{name} does not match the grid")
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)


@dataclass
class StepController:
    dt: float = 1e-6
    dt_min: float = 1e-14
    dt_max: float = 1.0
    rtol: float = 1e-6
    atol: float = 1e-9
    safety: float = 0.9

    def __post_init__(self):
        if not (0.0 < self.dt_min <= self.dt <= self.dt_max):
            raise ValueError("require 0 < dt_min <= dt <= dt_max")
        if self.rtol <= 0.0 or self.atol <= 0.0:
            raise ValueError("rtol and atol must be positive")


class FlowIntegrationError(RuntimeError):
    """Integration failure; carries the partial trajectory for post-mortems."""

    def __init__(self, message, partial_run=None):
        super().__init__(message)
        self.partial_run = partial_run


@dataclass
class FlowRun:
    """Time-stamped trajectory with per-step diagnostics."""

    family: str
    times: np.ndarray
    diagnostics: dict
    snapshots: list
    final: FlowState
    status: str
    n_accepted: int
    n_rejected: int
    extras: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# IMEX stepping core
# ---------------------------------------------------------------------------

def _imex_euler(problem, blocks, dt, ops):
    f = problem.rhs_blocks(blocks)
    out = {}
    for name, y in blocks.items():
        fy = f[name]
        op = ops.get(name)
        if op is None:
            out[name] = y + dt * fy
        elif op[0] == "sym":
            sym = op[1]
            yh = np.fft.rfft(y)
            fh = np.fft.rfft(fy)
            out[name] = np.fft.irfft((yh + dt * (fh - sym * yh)) / (1.0 - dt * sym), y.shape[0])
        elif op[0] == "dense":
            mat = op[1]
            lu = problem._dense_lu(name, mat, dt)
            out[name] = scipy.linalg.lu_solve(lu, y + dt * (fy - mat @ y))
        else:  # pragma: no cover - guarded by family construction
            raise ValueError(f"unknown implicit op {op[0]!r}")
    return out


def _error_norm(a, b, rtol, atol):
    total, count = 0.0, 0
    for name in a:
        err = a[name] - b[name]
        scale = atol + rtol * np.maximum(np.abs(a[name]), np.abs(b[name]))
        total += float(np.sum((err / scale) ** 2))
        count += err.size
    return np.sqrt(total / count)


def attempt_step(problem, blocks, dt, controller):
    """One step-doubled IMEX attempt; returns (advanced, err, accepted)."""
    problem._lu_cache = {}
    ops = problem.implicit_ops(blocks)
    full = _imex_euler(problem, blocks, dt, ops)
    half = _imex_euler(problem, blocks, 0.5 * dt, ops)
    half2 = _imex_euler(problem, half, 0.5 * dt, ops)
    finite = all(np.all(np.isfinite(v)) for v in half2.values()) and \
        all(np.all(np.isfinite(v)) for v in full.values())
    if not finite:
        return None, np.inf, False
    err = _error_norm(half2, full, controller.rtol, controller.atol)
    if not np.isfinite(err) or err > 1.0:
        return None, err, False
    advanced = {name: 2.0 * half2[name] - full[name] for name in blocks}
    return advanced, err, True


def _next_dt(dt, err, controller):
    factor = controller.safety * (1.0 / max(err, 1e-12)) ** 0.5
    return float(np.clip(dt * np.clip(factor, 0.2, 4.0), controller.dt_min, controller.dt_max))


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseVelocity:
    """Normal-velocity provider for the incompressibility machinery.

    ``model`` is set when the velocity is the gradient velocity of an
    energy (then the dissipation identity applies).
    """

    name: str
    velocity: Callable
    model: Optional[EnergyModel] = None


def willmore_paper_base(scheme=DEFAULT_SCHEME):
    from .energies import willmore_family_velocity

    return BaseVelocity(
        name="willmore_paper",
        velocity=lambda st: willmore_family_velocity(st, form="paper", scheme=scheme))


def gradient_base(model, scheme=DEFAULT_SCHEME):
    return BaseVelocity(
        name=f"{model.name}_gradient",
        velocity=lambda st: gradient_normal_velocity(st, None, model, scheme),
        model=model)


class _Family:
    """Shared plumbing: packing, gauge, dense-LU cache."""

    name = "family"

    def __init__(self, grid, scheme=DEFAULT_SCHEME):
        self.grid = grid
        self.scheme = scheme
        self._s1_param = (d_ds_symbol(grid.n_points, scheme) ** 2).real
        self._lu_cache = {}

    def _dense_lu(self, name, mat, dt):
        key = (name, float(dt))
        if key not in self._lu_cache:
            self._lu_cache[key] = scipy.linalg.lu_factor(
                np.eye(mat.shape[0]) - dt * mat)
        return self._lu_cache[key]

    def state_of(self, blocks):
        g = float(blocks["g"][0])
        return IntrinsicState(kappa=blocks["kappa"], g=np.full(self.grid.n_points, g),
                              grid=self.grid)

    def implicit_ops(self, blocks):
        return {}

    def diagnostics(self, fs):
        return {}

    def guard(self, fs):
        return None


class PhaseSepFamily(_Family):
    """Conserved-density phase separation flow of the coupled energy."""

    name = "phase_sep"

    def __init__(self, grid, params, nodal, well=DoubleWell(), scheme=DEFAULT_SCHEME):
        super().__init__(grid, scheme)
        from .energies import phase_sep_model
        self.params = params
        self.nodal = nodal
        self.well = well
        self.model = phase_sep_model(params, nodal, well, scheme)
        d1m = d_ds_matrix(grid.n_points, scheme)
        self._m2 = d1m @ d1m
        self._m4 = self._m2 @ self._m2

    def pack(self, fs):
        if fs.rho is None:
            raise ValueError("phase separation flow needs an agent density rho")
        g0 = float(fs.state.g[0])
        return {"kappa": fs.state.kappa.copy(),
                "q": fs.rho * g0,
                "g": np.array([g0])}

    def unpack(self, blocks, t):
        state = self.state_of(blocks)
        return FlowState(state=state, rho=blocks["q"] / float(blocks["g"][0]), t=t)

    def _velocities(self, state, rho):
        dk, dg, dr = self.model.variations(state, rho)
        V = (-geometry_operator(state, dk, self.scheme)
             - state.g * state.kappa * dg + state.kappa * rho * dr)
        W = gauge_scaled_arclength(state, V, self.scheme)
        return V, W, dr

    def rhs_blocks(self, blocks):
        state = self.state_of(blocks)
        g0 = float(blocks["g"][0])
        rho = blocks["q"] / g0
        V, W, dr = self._velocities(state, rho)
        kdot = (geometry_operator(state, V, self.scheme)
                + grad_s(state.kappa, state, self.scheme) * W)
        gdot = integrate_dsigma(state.kappa * V, state)
        qdot = d_ds(d_ds(dr, self.scheme) / g0 + W * rho, self.scheme)
        return {"kappa": kdot, "q": qdot, "g": np.array([gdot])}

    def implicit_ops(self, blocks):
        """kappa: circulant 6th/4th-order dissipation of the exact f-chain;
        q: dense linearization of the conserved-density block, including
        the sign-indefinite spinodal reaction (a worst-case damping bound
        there would freeze the dynamics without tripping step doubling)."""
        g0 = float(blocks["g"][0])
        state = self.state_of(blocks)
        rho = blocks["q"] / g0
        s1 = self._s1_param / g0 ** 2
        p = self.params
        a_kappa = p.delta * s1 ** 3 - s1 ** 2 / p.delta
        from .energies import phase_sep_density_hessian
        pot_rr = phase_sep_density_hessian(state, rho, p, self.nodal, self.well)
        a_q = (-p.epsilon * self._m4 / g0 ** 4
               + self._m2 * (pot_rr / g0 ** 2)[None, :])
        return {"kappa": ("sym", a_kappa), "q": ("dense", a_q)}

    def energy(self, fs):
        return self.model.energy(fs.state, fs.rho)

    def contract_rhs(self, fs):
        """Spec-form right-hand side: intrinsic velocity and rho_t."""
        state, rho = fs.state, fs.rho
        V, W, dr = self._velocities(state, rho)
        vel = ExtrinsicVelocity(V=V, W=W)
        ivel = apply_M(state, vel, self.scheme)
        drho_dt_material = laplace_s(dr, state, self.scheme)
        rho_t = (drho_dt_material - state.kappa * V * rho
                 + W * grad_s(rho, state, self.scheme))
        return ivel, rho_t

    def diagnostics(self, fs):
        return {"agent_mass": integrate_dsigma(fs.rho, fs.state)}


class WillmoreBetaFamily(_Family):
    """Length-penalized Willmore comparison flow (paper form velocity)."""

    name = "willmore_beta"

    def __init__(self, grid, beta=0.0, gamma0_length=None, form="paper",
                 scheme=DEFAULT_SCHEME):
        super().__init__(grid, scheme)
        self.beta = beta
        self.gamma0_length = gamma0_length
        self.form = form

    def pack(self, fs):
        return {"kappa": fs.state.kappa.copy(), "g": np.array([float(fs.state.g[0])])}

    def unpack(self, blocks, t):
        return FlowState(state=self.state_of(blocks), t=t)

    def normal_velocity(self, state):
        from .energies import willmore_family_velocity
        return willmore_family_velocity(state, form=self.form, beta=self.beta,
                                        gamma0_length=self.gamma0_length,
                                        scheme=self.scheme)

    def rhs_blocks(self, blocks):
        state = self.state_of(blocks)
        V = self.normal_velocity(state)
        W = gauge_scaled_arclength(state, V, self.scheme)
        kdot = (geometry_operator(state, V, self.scheme)
                + grad_s(state.kappa, state, self.scheme) * W)
        gdot = integrate_dsigma(state.kappa * V, state)
        return {"kappa": kdot, "g": np.array([gdot])}

    def implicit_ops(self, blocks):
        g0 = float(blocks["g"][0])
        s1 = self._s1_param / g0 ** 2
        c2 = 3.0 * float(np.max(blocks["kappa"] ** 2)) + abs(self.beta)
        return {"kappa": ("sym", -s1 ** 2 + c2 * s1)}

    def energy(self, fs):
        val = integrate_dsigma(0.5 * fs.state.kappa ** 2, fs.state)
        if self.beta and self.gamma0_length is not None:
            val += 0.5 * self.beta * (total_length(fs.state) - self.gamma0_length) ** 2
        return val


class IncompressibleFamily(_Family):
    """Locally length-preserving flow V = I_op(base velocity)."""

    name = "incompressible"

    def __init__(self, grid, base, scheme=DEFAULT_SCHEME):
        super().__init__(grid, scheme)
        self.base = base

    def pack(self, fs):
        return {"kappa": fs.state.kappa.copy(), "g": np.array([float(fs.state.g[0])])}

    def unpack(self, blocks, t):
        return FlowState(state=self.state_of(blocks), t=t)

    def normal_velocity(self, state):
        return incompressibility_apply(state, self.base.velocity(state))

    def rhs_blocks(self, blocks):
        state = self.state_of(blocks)
        V = self.normal_velocity(state)
        W = gauge_scaled_arclength(state, V, self.scheme)
        kdot = (geometry_operator(state, V, self.scheme)
                + grad_s(state.kappa, state, self.scheme) * W)
        gdot = integrate_dsigma(state.kappa * V, state)
        return {"kappa": kdot, "g": np.array([gdot])}

    def implicit_ops(self, blocks):
        g0 = float(blocks["g"][0])
        s1 = self._s1_param / g0 ** 2
        c2 = 3.0 * float(np.max(blocks["kappa"] ** 2))
        return {"kappa": ("sym", -s1 ** 2 + c2 * s1)}

    def energy(self, fs):
        if self.base.model is not None:
            return self.base.model.energy(fs.state, None)
        return integrate_dsigma(0.5 * fs.state.kappa ** 2, fs.state)


class PenalizedFamily(_Family):
    """Compressibility-penalized flow of (U, rho_m)."""

    name = "penalized"

    def __init__(self, grid, eps, base, rho_m_floor=0.1, scheme=DEFAULT_SCHEME):
        super().__init__(grid, scheme)
        self.eps = eps
        self.base = base
        self.rho_m_floor = rho_m_floor
        d1m = d_ds_matrix(grid.n_points, scheme)
        self._m2 = d1m @ d1m

    def pack(self, fs):
        if fs.rho_m is None:
            raise ValueError("penalized flow needs a membrane density rho_m")
        return {"kappa": fs.state.kappa.copy(), "rho_m": fs.rho_m.copy(),
                "g": np.array([float(fs.state.g[0])])}

    def unpack(self, blocks, t):
        return FlowState(state=self.state_of(blocks), rho_m=blocks["rho_m"], t=t)

    def normal_velocity(self, state, rho_m):
        return (self.base.velocity(state)
                + state.kappa * (rho_m ** 2 - 1.0) / (2.0 * self.eps))

    def rhs_blocks(self, blocks):
        state = self.state_of(blocks)
        rho_m = blocks["rho_m"]
        V = self.normal_velocity(state, rho_m)
        W = gauge_scaled_arclength(state, V, self.scheme)
        kdot = (geometry_operator(state, V, self.scheme)
                + grad_s(state.kappa, state, self.scheme) * W)
        gdot = integrate_dsigma(state.kappa * V, state)
        rdot = (laplace_s(rho_m, state, self.scheme) / self.eps
                - state.kappa * V * rho_m + W * grad_s(rho_m, state, self.scheme))
        return {"kappa": kdot, "rho_m": rdot, "g": np.array([gdot])}

    def implicit_ops(self, blocks):
        g0 = float(blocks["g"][0])
        kappa = blocks["kappa"]
        rho_m = blocks["rho_m"]
        s1 = self._s1_param / g0 ** 2
        c2 = (3.0 * float(np.max(kappa ** 2))
              + float(np.max(np.abs(rho_m ** 2 - 1.0))) / (2.0 * self.eps))
        a_kappa = -s1 ** 2 + c2 * s1
        dense = (self._m2 / g0 ** 2 - np.diag(kappa ** 2)) / self.eps
        return {"kappa": ("sym", a_kappa), "rho_m": ("dense", dense)}

    def energy(self, fs):
        pen = integrate_dsigma((fs.rho_m - 1.0) ** 2 / (2.0 * self.eps), fs.state)
        if self.base.model is not None:
            return self.base.model.energy(fs.state, None) + pen
        return integrate_dsigma(0.5 * fs.state.kappa ** 2, fs.state) + pen

    def contract_rhs(self, fs):
        state, rho_m = fs.state, fs.rho_m
        if np.any(rho_m <= 0.0):
            raise FlowIntegrationError("membrane density lost positivity")
        V = self.normal_velocity(state, rho_m)
        W = gauge_scaled_arclength(state, V, self.scheme)
        vel = ExtrinsicVelocity(V=V, W=W)
        ivel = apply_M(state, vel, self.scheme)
        rho_m_t = (laplace_s(rho_m, state, self.scheme) / self.eps
                   - state.kappa * V * rho_m + W * grad_s(rho_m, state, self.scheme))
        return ivel, rho_m_t

    def guard(self, fs):
        low = float(np.min(fs.rho_m))
        if low < self.rho_m_floor:
            return f"membrane density reached {low:.3g} < floor {self.rho_m_floor}"
        return None

    def diagnostics(self, fs):
        op = HelmholtzOperator(fs.state)
        out = {"rho_m_min": float(np.min(fs.rho_m)), "rho_m_max": float(np.max(fs.rho_m)),
               "d_m": manifold_distance(fs, self.eps, self.base, self.scheme, operator=op)}
        v_r, _ = residual_velocity(fs, self.eps, self.base, self.scheme, operator=op)
        out["v_resid_h2"] = hs_norm(v_r, fs.state, 2, self.scheme)
        return out


# ---------------------------------------------------------------------------
# manifold machinery
# ---------------------------------------------------------------------------

def excess_density(state, base, operator=None):
    """Excess membrane density sustaining the incompressible motion.

    Solves H rho_bar = -kappa Vhat with the dense Helmholtz operator.
    """
    if operator is None:
        operator = HelmholtzOperator(state)
    vhat = base.velocity(state)
    return helmholtz_solve(operator, -state.kappa * vhat)


def manifold_distance(fs, eps, base, scheme=DEFAULT_SCHEME, operator=None):
    """H^2 distance of (U, rho_m) to the incompressible manifold graph."""
    if fs.rho_m is None:
        raise ValueError("manifold distance needs a membrane density")
    rho_bar = excess_density(fs.state, base, operator)
    return hs_norm(fs.rho_m - (1.0 + eps * rho_bar), fs.state, 2, scheme)


def residual_velocity(fs, eps, base, scheme=DEFAULT_SCHEME, operator=None):
    """Extrinsic velocity residual against the reduced incompressible flow.

    V_R = V(U, rho_m) - I_op Vhat(U); W_R through the scaled-arc-length
    gauge relation (linear in V).
    """
    state = fs.state
    if operator is None:
        operator = HelmholtzOperator(state)
    vhat = base.velocity(state)
    v_full = vhat + state.kappa * (fs.rho_m ** 2 - 1.0) / (2.0 * eps)
    v_inc = incompressibility_apply(state, vhat, operator)
    v_r = v_full - v_inc
    w_r = gauge_scaled_arclength(state, v_r, scheme)
    return v_r, w_r


def residual_velocity_expansion(fs, eps, base):
    """The same residual from the manifold expansion: kappa w + eps/2 kappa (rho_bar+w)^2."""
    state = fs.state
    rho_bar = excess_density(state, base)
    w = (fs.rho_m - 1.0 - eps * rho_bar) / eps
    return state.kappa * w + 0.5 * eps * state.kappa * (rho_bar + w) ** 2


def well_prepared_rho_m(state, eps, base, w=None):
    """Membrane density 1 + eps rho_bar(U) + eps w on the manifold graph."""
    rho_bar = excess_density(state, base)
    out = 1.0 + eps * rho_bar
    if w is not None:
        out = out + eps * np.asarray(w, dtype=float)
    return out


# ---------------------------------------------------------------------------
# spec-surface right-hand sides
# ---------------------------------------------------------------------------

def rhs_phase_sep(fs, params, nodal, well=DoubleWell(), scheme=DEFAULT_SCHEME):
    fam = PhaseSepFamily(fs.state.grid, params, nodal, well, scheme)
    return fam.contract_rhs(fs)


def rhs_penalized(fs, eps, base, scheme=DEFAULT_SCHEME):
    fam = PenalizedFamily(fs.state.grid, eps, base, scheme=scheme)
    return fam.contract_rhs(fs)


def rhs_incompressible(fs, base, scheme=DEFAULT_SCHEME):
    fam = IncompressibleFamily(fs.state.grid, base, scheme=scheme)
    state = fs.state
    V = fam.normal_velocity(state)
    W = gauge_scaled_arclength(state, V, scheme)
    return apply_M(state, ExtrinsicVelocity(V=V, W=W), scheme)


def make_family(name, grid, params):
    """Family factory used by run_flow and the harness."""
    scheme = params.get("scheme", DEFAULT_SCHEME)
    if name == "phase_sep":
        return PhaseSepFamily(grid, params["params"], params["nodal"],
                              params.get("well", DoubleWell()), scheme)
    if name == "willmore_beta":
        return WillmoreBetaFamily(grid, params.get("beta", 0.0),
                                  params.get("gamma0_length"),
                                  params.get("form", "paper"), scheme)
    if name == "incompressible":
        return IncompressibleFamily(grid, params["base"], scheme)
    if name == "penalized":
        return PenalizedFamily(grid, params["eps"], params["base"],
                               params.get("rho_m_floor", 0.1), scheme)
    raise ValueError(f"unknown flow family {name!r}")


def step_adaptive(fs, family, controller):
    """One attempted adaptive step; returns (state, accepted, err_estimate).

    On acceptance the controller dt is advanced by the safety-factor rule;
    on rejection it is halved.  dt underflow raises FlowIntegrationError.
    """
    blocks = family.pack(fs)
    advanced, err, accepted = attempt_step(family, blocks, controller.dt, controller)
    if accepted:
        new_fs = family.unpack(advanced, fs.t + controller.dt)
        controller.dt = _next_dt(controller.dt, err, controller)
        return new_fs, True, err
    controller.dt = 0.5 * controller.dt
    if controller.dt < controller.dt_min:
        raise FlowIntegrationError(
            f"time step underflow at t={fs.t:.6g} (err={err:.3g})")
    return fs, False, err


def _rhs_sup_norm(family, fs):
    blocks = family.pack(fs)
    f = family.rhs_blocks(blocks)
    worst = 0.0
    for name, y in blocks.items():
        scale = 1.0 + float(np.max(np.abs(y)))
        worst = max(worst, float(np.max(np.abs(f[name]))) / scale)
    return worst


def run_flow(initial, family, t_end=None, stall_tol=None, controller=None,
             k_proj=10, snapshot_stride=0, max_steps=2_000_000,
             closure_tol=1e-10):
    """Integrate a flow family with diagnostics at every accepted step.

    Stops at ``t_end`` or when the scaled sup-norm of the right-hand side
    drops below ``stall_tol``; the closure constraints are re-projected
    every ``k_proj`` accepted steps and the pre-projection drift is logged.
    """
    if t_end is None and stall_tol is None:
        raise ValueError("need a stopping rule: t_end and/or stall_tol")
    controller = controller or StepController()
    fs = initial
    times = [fs.t]
    diag: dict = {}
    snapshots = [(fs.t, fs)]
    n_acc = n_rej = 0
    status = "max_steps"

    def record(fs_now):
        row = {
            "energy": family.energy(fs_now),
            "length": total_length(fs_now.state),
            "closure_norm": closure_residual(fs_now.state).norm,
        }
        row.update(family.diagnostics(fs_now))
        for key, val in row.items():
            diag.setdefault(key, [np.nan] * (len(times) - 1)).append(val)
        for key in diag:
            if key not in row:
                diag[key].append(np.nan)

    record(fs)

    def partial(status_now):
        return FlowRun(family=family.name, times=np.asarray(times),
                       diagnostics={k: np.asarray(v) for k, v in diag.items()},
                       snapshots=snapshots, final=fs, status=status_now,
                       n_accepted=n_acc, n_rejected=n_rej)

    for _ in range(max_steps):
        if t_end is not None and fs.t >= t_end * (1.0 - 1e-12):
            status = "t_end"
            break
        dt_cap = controller.dt
        if t_end is not None:
            dt_cap = min(dt_cap, t_end - fs.t)
        saved = controller.dt
        controller.dt = dt_cap
        try:
            new_fs, accepted, err = step_adaptive(fs, family, controller)
        except FlowIntegrationError as exc:
            raise FlowIntegrationError(str(exc), partial("failed")) from None
        if not accepted:
            n_rej += 1
            continue
        if dt_cap < saved:
            controller.dt = max(controller.dt, min(saved, controller.dt_max))
        n_acc += 1
        fs = new_fs
        guard_msg = family.guard(fs)
        if guard_msg:
            raise FlowIntegrationError(guard_msg, partial("failed"))
        if k_proj and n_acc % k_proj == 0:
            projected = closure_project(fs.state, tol=closure_tol)
            fs = replace(fs, state=projected)
        times.append(fs.t)
        record(fs)
        if snapshot_stride and n_acc % snapshot_stride == 0:
            snapshots.append((fs.t, fs))
        if stall_tol is not None and _rhs_sup_norm(family, fs) < stall_tol:
            status = "stalled"
            break
    else:
        status = "max_steps"

    if snapshots[-1][0] != fs.t:
        snapshots.append((fs.t, fs))
    return FlowRun(family=family.name, times=np.asarray(times),
                   diagnostics={k: np.asarray(v) for k, v in diag.items()},
                   snapshots=snapshots, final=fs, status=status,
                   n_accepted=n_acc, n_rejected=n_rej)
