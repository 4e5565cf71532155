"""Energy functionals, their variational derivatives, and sharp-interface objects.

Discrete energies are trapezoid quadratures of the continuum densities with
|grad_s f|^2 = (g^-1 f')^2, and the registered variational derivatives are
their exact discrete duals in the dsigma pairing (Laplacians appear in the
divergence-form composition).  Central-difference checks of the gradients
therefore hold to roundoff, not just to discretization order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.integrate
import scipy.optimize

from .calculus import grad_s, integrate_dsigma, laplace_s
from .derivatives import DEFAULT_SCHEME, cumulative_integral_em, periodic_interp
from .geometry import reconstruct_embedding, total_length
from .kinematics import geometry_operator


# ---------------------------------------------------------------------------
# nodal model and double well
# ---------------------------------------------------------------------------

def _sign_change_brackets(x, h, zero_tol=1e-9):
    """Bracketing intervals of the sign changes of samples h(x).

    Samples with |h| <= zero_tol are treated as on-the-root and merged with
    the adjacent run, so a root landing exactly on a sample counts once.
    """
    signs = np.where(np.abs(h) <= zero_tol, 0.0, np.sign(h))
    brackets = []
    last_idx = None
    for i, s in enumerate(signs):
        if s == 0.0:
            continue
        if last_idx is not None and s != signs[last_idx]:
            brackets.append((x[last_idx], x[i]))
        last_idx = i
    return brackets


def _polyval(coeffs, x):
    out = np.zeros_like(np.asarray(x, dtype=float))
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _polyder(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:] or [0.0]


@dataclass(frozen=True)
class NodalModel:
    """Nodal-line data of the coupled potentials.

    kappa0_coeffs: polynomial kappa0(rho); rho_minus/rho_plus_coeffs:
    polynomials rho_-(kappa), rho_+(kappa), ascending order.  The gap
    P(kappa) = rho_+ - rho_- must stay positive on the working range and
    each density branch must cross the kappa0 graph exactly once there.
    """

    kappa0_coeffs: tuple
    rho_minus_coeffs: tuple
    rho_plus_coeffs: tuple
    kappa_range: tuple = (-2.0, 3.0)
    gap_floor: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "kappa0_coeffs", tuple(float(c) for c in self.kappa0_coeffs))
        object.__setattr__(self, "rho_minus_coeffs", tuple(float(c) for c in self.rho_minus_coeffs))
        object.__setattr__(self, "rho_plus_coeffs", tuple(float(c) for c in self.rho_plus_coeffs))
        object.__setattr__(self, "kappa_range", (float(self.kappa_range[0]), float(self.kappa_range[1])))
        self._validate()

    def kappa0(self, rho):
        return _polyval(self.kappa0_coeffs, rho)

    def kappa0_prime(self, rho):
        return _polyval(_polyder(list(self.kappa0_coeffs)), rho)

    def rho_minus(self, kappa):
        return _polyval(self.rho_minus_coeffs, kappa)

    def rho_plus(self, kappa):
        return _polyval(self.rho_plus_coeffs, kappa)

    def rho_minus_prime(self, kappa):
        return _polyval(_polyder(list(self.rho_minus_coeffs)), kappa)

    def rho_plus_prime(self, kappa):
        return _polyval(_polyder(list(self.rho_plus_coeffs)), kappa)

    def gap(self, kappa):
        return self.rho_plus(kappa) - self.rho_minus(kappa)

    def gap_prime(self, kappa):
        return self.rho_plus_prime(kappa) - self.rho_minus_prime(kappa)

    def _validate(self):
        lo, hi = self.kappa_range
        kk = np.linspace(lo, hi, 2001)
        rm, rp = self.rho_minus(kk), self.rho_plus(kk)
        if np.any(rm < -1e-12) or np.any(rp > 1.0 + 1e-12):
            raise ValueError("nodal branches must satisfy 0 <= rho_- and rho_+ <= 1")
        if np.any(rp - rm <= self.gap_floor):
            raise ValueError(f"nodal gap drops below the floor {self.gap_floor} on the working range")
        for branch, label in ((rm, "rho_-"), (rp, "rho_+")):
            h = self.kappa0(branch) - kk
            crossings = len(_sign_change_brackets(kk, h))
            if crossings != 1:
                raise ValueError(f"kappa0 graph must cross the {label} graph exactly once "
                                 f"(found {crossings} crossings)")

    def double_nodal_points(self):
        """The two (rho, kappa) crossings of kappa0 with rho_-/rho_+."""
        lo, hi = self.kappa_range
        points = []
        for branch in (self.rho_minus, self.rho_plus):
            fun = lambda k: float(self.kappa0(branch(k)) - k)
            kk = np.linspace(lo, hi, 2001)
            h = np.array([fun(k) for k in kk])
            a, b = _sign_change_brackets(kk, h)[0]
            k_star = scipy.optimize.brentq(fun, a, b, xtol=1e-14)
            points.append((float(branch(k_star)), k_star))
        return tuple(points)

    def to_dict(self):
        return {
            "kappa0": list(self.kappa0_coeffs),
            "rho_minus": list(self.rho_minus_coeffs),
            "rho_plus": list(self.rho_plus_coeffs),
            "kappa_range": list(self.kappa_range),
            "gap_floor": self.gap_floor,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(kappa0_coeffs=data["kappa0"],
                   rho_minus_coeffs=data["rho_minus"],
                   rho_plus_coeffs=data["rho_plus"],
                   kappa_range=tuple(data.get("kappa_range", (-2.0, 3.0))),
                   gap_floor=float(data.get("gap_floor", 0.05)))


def default_nodal_model(shape=0.8):
    """Quadratic nodal lines through the two double-nodal points.

    kappa0 passes through (0.19, 1.3) and (0.95, -0.7) with curvature set
    by ``shape``; rho_- is a parabola in kappa with vertex at (1.3, 0.19),
    rho_+ one with vertex at (-0.7, 0.95) — non-monotone branches with the
    required crossings.
    """
    slope = (-0.7 - 1.3) / (0.95 - 0.19)
    # expand 1.3 + slope (r - 0.19) + shape (r - 0.19)(r - 0.95)
    c0 = 1.3 - slope * 0.19 + shape * 0.19 * 0.95
    c1 = slope - shape * (0.19 + 0.95)
    c2 = shape
    rm = (0.19 + 0.02 * 1.3 ** 2, -0.04 * 1.3, 0.02)     # 0.19 + 0.02 (k-1.3)^2
    rp = (0.95 - 0.01 * 0.7 ** 2, -0.02 * 0.7, -0.01)    # 0.95 - 0.01 (k+0.7)^2
    return NodalModel(kappa0_coeffs=(c0, c1, c2), rho_minus_coeffs=rm, rho_plus_coeffs=rp)


@dataclass(frozen=True)
class DoubleWell:
    """Scaled quartic well A r^2 (r-1)^2 of the reduced density variable.

    The default amplitude 8 fixes the transition constants to
    theta1 = sqrt(2)/3 and sigma1 = 1/3.
    """

    amplitude: float = 8.0

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * r ** 2 * (r - 1.0) ** 2

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * 2.0 * r * (r - 1.0) * (2.0 * r - 1.0)

    def sqrt_value(self, r):
        r = np.asarray(r, dtype=float)
        return math.sqrt(self.amplitude) * np.abs(r * (1.0 - r))

    @property
    def is_standard_quartic(self):
        return True


def heteroclinic_profile(well, z):
    """The 0 -> 1 standing front: phi' = sqrt(2 F0(phi)), phi(0) = 1/2.

    Closed logistic form for the quartic family; high-accuracy ODE
    integration for other registered wells.
    """
    z = np.asarray(z, dtype=float)
    if getattr(well, "is_standard_quartic", False):
        rate = math.sqrt(2.0 * well.amplitude)
        out = 1.0 / (1.0 + np.exp(-rate * z))
        return float(out) if out.ndim == 0 else out

    def rhs(_, y):
        return [math.sqrt(max(2.0 * float(well.value(y[0])), 0.0))]

    zz = np.atleast_1d(z)
    out = np.empty_like(zz)
    order = np.argsort(np.abs(zz))
    for idx in order:
        target = zz[idx]
        if target == 0.0:
            out[idx] = 0.5
            continue
        sol = scipy.integrate.solve_ivp(rhs, (0.0, target), [0.5],
                                        rtol=1e-12, atol=1e-14, dense_output=True)
        out[idx] = sol.y[0, -1]
    return float(out[0]) if np.asarray(z).ndim == 0 else out


def surface_tension_constants(well=DoubleWell()):
    """(sigma1_st, theta1) of a registered well, by independent quadratures.

    theta1 = ∫_0^1 sqrt(F0); sigma1 = theta1/sqrt(2), cross-checked against
    the profile integral (1/2)∫|phi'|^2 dz.
    """
    theta1, _ = scipy.integrate.quad(lambda t: float(well.sqrt_value(t)), 0.0, 1.0,
                                     epsabs=1e-14, epsrel=1e-13)
    sigma1 = theta1 / math.sqrt(2.0)
    zz = np.linspace(-12.0, 12.0, 20001)
    phi = heteroclinic_profile(well, zz)
    phi_p = np.sqrt(2.0 * np.clip(well.value(phi), 0.0, None))
    sigma1_profile = 0.5 * np.trapezoid(phi_p ** 2, zz)
    if abs(sigma1_profile - sigma1) > 1e-8 * max(1.0, sigma1):
        raise RuntimeError("surface-tension cross-check failed: "
                           f"{sigma1_profile} vs {sigma1}")
    return sigma1, theta1


# ---------------------------------------------------------------------------
# energy models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyModel:
    """An energy with its variational derivatives on the grid.

    ``energy(state, rho)`` returns a float; ``variations(state, rho)``
    returns (dF/dkappa, dF/dg, dF/drho-or-None) as dsigma gradients.  The
    closures must be pure.
    """

    name: str
    energy: Callable
    variations: Callable
    uses_density: bool = False


_REGISTRY: dict = {}


def register_energy_model(model):
    _REGISTRY[model.name] = model
    return model


def registered_energy_models():
    return dict(_REGISTRY)


@dataclass(frozen=True)
class PhaseSepParams:
    epsilon: float
    delta: float
    beta: float
    sigma1_len: float
    gamma0_length: float

    def __post_init__(self):
        for name in ("epsilon", "delta", "beta", "sigma1_len", "gamma0_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def _potentials(kappa, rho, nodal, well):
    """f, F and their partials at (kappa, rho)."""
    k0 = nodal.kappa0(rho)
    diff = kappa - k0
    f = 0.5 * diff ** 2
    f_k = diff
    f_r = -diff * nodal.kappa0_prime(rho)
    rm, rp = nodal.rho_minus(kappa), nodal.rho_plus(kappa)
    a, b = rho - rm, rho - rp
    amp = well.amplitude
    F = amp * a ** 2 * b ** 2
    F_r = 2.0 * amp * a * b * (a + b)
    F_k = -2.0 * amp * a * b * (nodal.rho_minus_prime(kappa) * b
                                + nodal.rho_plus_prime(kappa) * a)
    return f, f_k, f_r, F, F_r, F_k


def phase_sep_energy(state, rho, params, nodal, well=DoubleWell(), scheme=DEFAULT_SCHEME):
    """Coupled curvature/density energy with the soft total-length term."""
    rho = np.asarray(rho, dtype=float)
    f, _, _, F, _, _ = _potentials(state.kappa, rho, nodal, well)
    gk = grad_s(state.kappa, state, scheme)
    gr = grad_s(rho, state, scheme)
    density = (0.5 * params.delta * gk ** 2 + f / params.delta
               + 0.5 * params.epsilon * gr ** 2 + F / params.epsilon)
    excess = total_length(state) - params.sigma1_len * params.gamma0_length
    return integrate_dsigma(density, state) + 0.5 * params.beta * excess ** 2


def phase_sep_variations(state, rho, params, nodal, well=DoubleWell(), scheme=DEFAULT_SCHEME):
    """Exact discrete dsigma gradients of :func:`phase_sep_energy`."""
    rho = np.asarray(rho, dtype=float)
    f, f_k, f_r, F, F_r, F_k = _potentials(state.kappa, rho, nodal, well)
    lap_k = laplace_s(state.kappa, state, scheme)
    lap_r = laplace_s(rho, state, scheme)
    gk = grad_s(state.kappa, state, scheme)
    gr = grad_s(rho, state, scheme)
    excess = total_length(state) - params.sigma1_len * params.gamma0_length
    d_kappa = -params.delta * lap_k + f_k / params.delta + F_k / params.epsilon
    d_rho = -params.epsilon * lap_r + f_r / params.delta + F_r / params.epsilon
    d_g = (-0.5 * params.delta * gk ** 2 + f / params.delta
           - 0.5 * params.epsilon * gr ** 2 + F / params.epsilon
           + params.beta * excess) / state.g
    return d_kappa, d_g, d_rho


def phase_sep_density_hessian(state, rho, params, nodal, well=DoubleWell()):
    """Pointwise d^2/drho^2 of f/delta + F/eps at the current state.

    Used for the semi-implicit linearization of the conserved-density
    block; the sign-indefinite spinodal region must enter the implicit
    operator as-is, not as a worst-case damping bound.
    """
    rho = np.asarray(rho, dtype=float)
    kappa = state.kappa
    k0 = nodal.kappa0(rho)
    k0p = nodal.kappa0_prime(rho)
    k0pp = _polyval(_polyder(_polyder(list(nodal.kappa0_coeffs))), rho)
    f_rr = k0p ** 2 - (kappa - k0) * k0pp
    a = rho - nodal.rho_minus(kappa)
    b = rho - nodal.rho_plus(kappa)
    F_rr = 2.0 * well.amplitude * ((a + b) ** 2 + 2.0 * a * b)
    return f_rr / params.delta + F_rr / params.epsilon


def phase_sep_model(params, nodal, well=DoubleWell(), scheme=DEFAULT_SCHEME):
    return EnergyModel(
        name="phase_sep",
        energy=lambda st, rho: phase_sep_energy(st, rho, params, nodal, well, scheme),
        variations=lambda st, rho: phase_sep_variations(st, rho, params, nodal, well, scheme),
        uses_density=True,
    )


def quadratic_curvature_model(beta=0.0, gamma0_length=None, scheme=DEFAULT_SCHEME):
    """Willmore-type energy ∮ kappa^2/2 dsigma (+ beta/2 (|Gamma|-|Gamma0|)^2)."""

    def energy(state, rho=None):
        val = integrate_dsigma(0.5 * state.kappa ** 2, state)
        if beta:
            val += 0.5 * beta * (total_length(state) - gamma0_length) ** 2
        return val

    def variations(state, rho=None):
        d_k = state.kappa.copy()
        d_g = 0.5 * state.kappa ** 2 / state.g
        if beta:
            d_g = d_g + beta * (total_length(state) - gamma0_length) / state.g
        return d_k, d_g, None

    return EnergyModel(name="willmore_quadratic", energy=energy, variations=variations)


def length_model():
    return EnergyModel(
        name="length",
        energy=lambda st, rho=None: total_length(st),
        variations=lambda st, rho=None: (np.zeros(st.n), 1.0 / st.g, None),
    )


def membrane_penalty_model(eps):
    """Compressibility penalty ∮ (rho_m - 1)^2 / (2 eps) dsigma (density = rho_m)."""

    def energy(state, rho_m):
        rho_m = np.asarray(rho_m, dtype=float)
        return integrate_dsigma((rho_m - 1.0) ** 2 / (2.0 * eps), state)

    def variations(state, rho_m):
        rho_m = np.asarray(rho_m, dtype=float)
        d_rm = (rho_m - 1.0) / eps
        d_g = (rho_m - 1.0) ** 2 / (2.0 * eps * state.g)
        return np.zeros(state.n), d_g, d_rm

    return EnergyModel(name="membrane_penalty", energy=energy, variations=variations,
                       uses_density=True)


def penalized_willmore_model(eps, scheme=DEFAULT_SCHEME):
    """Quadratic-curvature base plus the compressibility penalty (density = rho_m)."""
    base = quadratic_curvature_model(scheme=scheme)
    pen = membrane_penalty_model(eps)

    def energy(state, rho_m):
        return base.energy(state, None) + pen.energy(state, rho_m)

    def variations(state, rho_m):
        bk, bg, _ = base.variations(state, None)
        pk, pg, pr = pen.variations(state, rho_m)
        return bk + pk, bg + pg, pr

    return EnergyModel(name="penalized_willmore", energy=energy, variations=variations,
                       uses_density=True)


def willmore_family_velocity(state, form="paper", beta=0.0, gamma0_length=None,
                             F=None, F_prime=None, scheme=DEFAULT_SCHEME):
    """Normal velocity of the Willmore-type flows.

    form="paper": V = -G kappa + kappa^3/2 - kappa beta (|Gamma|-|Gamma0|),
    the comparison flow of the length-band experiments (not induced by an
    energy; the beta sign is the length-stabilizing one).
    form="gradient": V = -G F'(kappa) - kappa F(kappa), the true
    L2(dsigma)-gradient velocity of ∮ F(kappa) dsigma, with the default
    F = kappa^2/2.
    """
    kappa = state.kappa
    if form == "paper":
        V = -geometry_operator(state, kappa, scheme) + 0.5 * kappa ** 3
        if beta:
            V = V - kappa * beta * (total_length(state) - gamma0_length)
        return V
    if form == "gradient":
        if F is None:
            F = lambda k: 0.5 * k ** 2
            F_prime = lambda k: k
        V = -geometry_operator(state, F_prime(kappa), scheme) - kappa * F(kappa)
        if beta:
            V = V - kappa * beta * (total_length(state) - gamma0_length)
        return V
    raise ValueError(f"unknown Willmore form {form!r}")


# ---------------------------------------------------------------------------
# sharp-interface objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionSet:
    """Sorted transition points on the reference circle with a side flag.

    ``first_side_plus`` marks whether [points[0], points[1]) belongs to the
    high-density phase; with no points the whole circle is one phase.
    """

    points: tuple
    first_side_plus: bool = True

    def __post_init__(self):
        pts = tuple(float(p) % 1.0 for p in self.points)
        if list(pts) != sorted(pts):
            raise ValueError("transition points must be sorted")
        if len(pts) % 2 != 0:
            raise ValueError("a two-phase partition of the circle needs an even count")
        object.__setattr__(self, "points", pts)

    def indicator_plus(self, s):
        """chi_+ sampled at s (1 on the high-density side)."""
        s = np.asarray(s, dtype=float) % 1.0
        if not self.points:
            return np.full_like(s, 1.0 if self.first_side_plus else 0.0)
        idx = np.searchsorted(self.points, s, side="right")
        parity = (idx - 1) % 2
        start = 1.0 if self.first_side_plus else 0.0
        return np.where(parity == 0, start, 1.0 - start)

    def signed_distance(self, s, state):
        """Sawtooth z(s): alternating-sign arc-length distance to the set."""
        if not self.points:
            raise ValueError("signed distance needs a nonempty transition set")
        s = np.asarray(s, dtype=float) % 1.0
        arclen = cumulative_integral_em(state.g)
        sigma_of = lambda x: np.interp(np.asarray(x) % 1.0,
                                       np.linspace(0.0, 1.0, state.n + 1), arclen)
        L = arclen[-1]
        sig_s = sigma_of(s)
        sig_t = np.array([sigma_of(p) for p in self.points])
        d = np.abs(sig_s[..., None] - sig_t[None, :])
        d = np.minimum(d, L - d)
        chi = self.indicator_plus(s)
        return np.where(chi > 0.5, 1.0, -1.0) * d.min(axis=-1)


def slaved_density(state, transitions, nodal):
    """The limiting density: rho_+ on the plus phase, rho_- elsewhere."""
    chi = transitions.indicator_plus(state.grid.s_values)
    return (chi * nodal.rho_plus(state.kappa)
            + (1.0 - chi) * nodal.rho_minus(state.kappa))


def gamma_limit_energy(state, transitions, delta, nodal, well=DoubleWell(),
                       scheme=DEFAULT_SCHEME):
    """Sharp-interface limit energy: curvature bulk plus cubic jump costs.

    ∮ delta/2 |grad_s kappa|^2 + f(kappa, rho_hat)/delta dsigma
    + sqrt(2) theta1 sum_i P^3(kappa(s_i)), with kappa at off-grid
    transition points by 4th-order periodic interpolation.
    """
    rho_hat = slaved_density(state, transitions, nodal)
    diff = state.kappa - nodal.kappa0(rho_hat)
    gk = grad_s(state.kappa, state, scheme)
    bulk = integrate_dsigma(0.5 * delta * gk ** 2 + 0.5 * diff ** 2 / delta, state)
    _, theta1 = surface_tension_constants(well)
    jump = 0.0
    for p in transitions.points:
        k_at = periodic_interp(state.kappa, p)
        jump += float(nodal.gap(k_at)) ** 3
    return bulk + math.sqrt(2.0) * theta1 * jump


def recovery_sequence(state, transitions, eps, nodal, well=DoubleWell(),
                      min_gap_ratio=8.0):
    """Diffuse recovery density for the sharp-interface limit.

    rho_bar(s) = phi(z(s) P(kappa)/eps) with the sawtooth z; returns
    (rho_bar, rho) with rho = P rho_bar + rho_- the unscaled density.
    Raises when the transition spacing is not large against eps.
    """
    pts = transitions.points
    if len(pts) < 2:
        raise ValueError("recovery sequence needs at least one transition pair")
    arclen = cumulative_integral_em(state.g)
    sig = np.interp(np.asarray(pts), np.linspace(0.0, 1.0, state.n + 1), arclen)
    L = arclen[-1]
    gaps = np.diff(np.concatenate([sig, [sig[0] + L]]))
    if gaps.min() < min_gap_ratio * eps:
        raise ValueError(f"transition gap {gaps.min():.3g} is not large against eps={eps:.3g}")
    z = transitions.signed_distance(state.grid.s_values, state)
    P = nodal.gap(state.kappa)
    rho_bar = heteroclinic_profile(well, z * P / eps)
    rho = P * rho_bar + nodal.rho_minus(state.kappa)
    return rho_bar, rho


def detect_transitions(state, rho, nodal):
    """Half-level crossings of the reduced density, by linear interpolation."""
    rho_bar = (np.asarray(rho, dtype=float) - nodal.rho_minus(state.kappa)) / nodal.gap(state.kappa)
    f = rho_bar - 0.5
    s = state.grid.s_values
    n = state.n
    pts = []
    for j in range(n):
        a, b = f[j], f[(j + 1) % n]
        if a == 0.0:
            pts.append(float(s[j]))
        elif a * b < 0.0:
            frac = a / (a - b)
            pts.append(float((s[j] + frac / n) % 1.0))
    tset = TransitionSet(points=tuple(sorted(pts)), first_side_plus=True)
    if pts and bool(tset.indicator_plus(0.0) > 0.5) != bool(f[0] > 0):
        tset = TransitionSet(points=tset.points, first_side_plus=False)
    elif not pts:
        tset = TransitionSet(points=(), first_side_plus=bool(f[0] > 0))
    return tset, len(pts)


def el_residual(state, transitions, lam, delta, nodal, well=DoubleWell(),
                scheme=DEFAULT_SCHEME, theta0=0.0, gamma0=(0.0, 0.0)):
    """Residual of the sharp-interface Euler-Lagrange system.

    Bulk (per interval): -delta^2 lap_s kappa + f_kappa + f_rho drho/dkappa
    - delta (lam1 gamma1 + lam2 gamma2 + lam3 + lam4 drho/dkappa), nonlocal
    through the reconstructed gamma.  Per transition, the two nonlinear-Robin
    conditions on grad_s kappa and the kappa-continuity defect.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (4,):
        raise ValueError("lam must have four components")
    emb = reconstruct_embedding(state, theta0, gamma0)
    rho_hat = slaved_density(state, transitions, nodal)
    chi = transitions.indicator_plus(state.grid.s_values)
    drho_dk = np.where(chi > 0.5, nodal.rho_plus_prime(state.kappa),
                       nodal.rho_minus_prime(state.kappa))
    diff = state.kappa - nodal.kappa0(rho_hat)
    f_k = diff
    f_r = -diff * nodal.kappa0_prime(rho_hat)
    bulk = (-delta ** 2 * laplace_s(state.kappa, state, scheme) + f_k + f_r * drho_dk
            - delta * (lam[0] * emb.gamma[:, 0] + lam[1] * emb.gamma[:, 1]
                       + lam[2] + lam[3] * drho_dk))
    _, theta1 = surface_tension_constants(well)
    grad_kappa = grad_s(state.kappa, state, scheme)
    robin = []
    for p in transitions.points:
        k_i = periodic_interp(state.kappa, p)
        gap = float(nodal.gap(k_i))
        gap_p = float(nodal.gap_prime(k_i))
        forcing = 1.5 * theta1 * gap ** 2 * gap_p / delta
        right = _one_sided_value(grad_kappa, p, state.n, side=+1)
        left = _one_sided_value(grad_kappa, p, state.n, side=-1)
        k_right = _one_sided_value(state.kappa, p, state.n, side=+1)
        k_left = _one_sided_value(state.kappa, p, state.n, side=-1)
        robin.append(np.array([right - (-1.0 + forcing),
                               left - (-1.0 - forcing),
                               k_right - k_left]))
    return bulk, robin


def _one_sided_value(values, s, n, side):
    """Cubic extrapolation to s from grid nodes strictly on one side."""
    x = (s % 1.0) * n
    if side > 0:
        base = int(np.ceil(x))
        if base == x:
            base += 1
        nodes = np.arange(base, base + 4)
    else:
        base = int(np.floor(x))
        if base == x:
            base -= 1
        nodes = np.arange(base - 3, base + 1)
    t = np.asarray(values, dtype=float)[nodes % n]
    w = np.ones(4)
    for a in range(4):
        for b in range(4):
            if a != b:
                w[a] *= (x - nodes[b]) / (nodes[a] - nodes[b])
    return float(np.dot(w, t))
