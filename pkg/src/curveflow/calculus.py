"""Discrete surface operators and the Helmholtz/incompressibility solvers.

The surface gradient is grad_s = g^-1 d/ds and the Laplace-Beltrami
operator is kept in divergence form grad_s(grad_s .), which makes it
exactly self-adjoint in the dsigma inner product and exactly conservative
on the discrete grid for any metric.

The dense Helmholtz operator H = -laplace_s + kappa^2 > 0 and the
incompressibility relaxation I - kappa H^-1 (kappa .) are assembled with
the spectral Laplacian by default: on a circle their eigenvalues then
reproduce the exact Fourier symbols (k/R)^2 + 1/R^2 and k^2/(1+k^2) to
roundoff, which the finite-difference symbol cannot do.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .derivatives import (
    DEFAULT_SCHEME,
    d2_ds2_symbol,
    circulant_from_symbol,
    d_ds,
)


def integrate_dsigma(values, state):
    """Full-period surface integral (trapezoid in s with weight g)."""
    return float(np.mean(np.asarray(values, dtype=float) * state.g))


def inner_dsigma(a, b, state):
    """L2(dsigma) inner product."""
    return float(np.mean(np.asarray(a, dtype=float) * np.asarray(b, dtype=float) * state.g))


def grad_s(values, state, scheme=DEFAULT_SCHEME):
    """Surface gradient g^-1 d/ds."""
    return d_ds(values, scheme) / state.g


def laplace_s(values, state, scheme=DEFAULT_SCHEME):
    """Laplace-Beltrami operator in divergence form grad_s(grad_s f)."""
    return d_ds(d_ds(values, scheme) / state.g, scheme) / state.g


def hs_norm(values, state, order=2, scheme=DEFAULT_SCHEME):
    """Metric-dependent Sobolev norm: sqrt( ∮ |grad_s^k u|^2 + |u|^2 dsigma )."""
    u = np.asarray(values, dtype=float)
    du = u
    for _ in range(order):
        du = grad_s(du, state, scheme)
    return float(np.sqrt(integrate_dsigma(du * du + u * u, state)))


def _laplace_dense(state, scheme):
    n = state.n
    if state.is_scaled_arclength:
        g0 = float(state.g[0])
        if scheme == "spectral":
            sym = d2_ds2_symbol(n, "spectral")
        else:
            # divergence-form composition, matching laplace_s
            from .derivatives import d_ds_symbol
            d1 = d_ds_symbol(n, scheme)
            sym = (d1 * d1).real
        return circulant_from_symbol(sym.astype(complex), n).real / g0 ** 2
    from .derivatives import d_ds_matrix
    d1m = d_ds_matrix(n, scheme)
    ginv = 1.0 / state.g
    return (ginv[:, None] * d1m) @ (ginv[:, None] * d1m)


class HelmholtzOperator:
    """Dense assembly of H = -laplace_s + kappa^2 with a factorization cache.

    Symmetric in the dsigma inner product; strictly positive for admissible
    states (the closure condition forces kappa != 0 somewhere).
    """

    def __init__(self, state, scheme="spectral"):
        self.state = state
        self.scheme = scheme
        self.matrix = -_laplace_dense(state, scheme) + np.diag(state.kappa ** 2)
        self.matrix.setflags(write=False)
        self._lu = None

    @property
    def n(self):
        return self.state.n

    def _factorization(self):
        if self._lu is None:
            try:
                self._lu = scipy.linalg.lu_factor(self.matrix)
            except (scipy.linalg.LinAlgError, ValueError) as exc:
                raise HelmholtzSolveError(
                    "Helmholtz factorization failed", helmholtz_min_eig(self)) from exc
        return self._lu

    def apply(self, values):
        return self.matrix @ np.asarray(values, dtype=float)

    def weighted_symmetric(self):
        """Similarity transform sqrt(g) H sqrt(g)^-1: symmetric ordinary matrix."""
        w = np.sqrt(self.state.g)
        mat = (w[:, None] * self.matrix) / w[None, :]
        return 0.5 * (mat + mat.T)


class HelmholtzSolveError(RuntimeError):
    def __init__(self, message, min_eigenvalue):
        super().__init__(f"{message} (min eigenvalue {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


def helmholtz_solve(operator, rhs):
    """Solve H u = rhs by the cached dense factorization."""
    rhs = np.asarray(rhs, dtype=float)
    u = scipy.linalg.lu_solve(operator._factorization(), rhs)
    resid = np.linalg.norm(operator.apply(u) - rhs)
    scale = np.linalg.norm(rhs)
    if scale > 0 and resid > 1e-8 * scale:
        raise HelmholtzSolveError("Helmholtz solve lost accuracy",
                                  helmholtz_min_eig(operator))
    return u


def helmholtz_min_eig(operator):
    """Smallest eigenvalue of the dsigma-weighted symmetric eigenproblem."""
    vals = scipy.linalg.eigvalsh(operator.weighted_symmetric())
    return float(vals[0])


def helmholtz_spectrum(operator):
    return np.sort(scipy.linalg.eigvalsh(operator.weighted_symmetric()))


def helmholtz_h2_bound(operator, scheme=DEFAULT_SCHEME):
    """Coercivity constant nu_2 = min ||H u||_L2 / ||u||_H2 (dsigma norms).

    Computed as the smallest generalized singular value of H against the
    H^2 Gram matrix; positivity quantifies the norm-bounded inverse
    H^-1 : L2 -> H2.
    """
    state = operator.state
    n = state.n
    w = state.g / n
    from .derivatives import d_ds_matrix
    d1m = d_ds_matrix(n, scheme) / state.g[:, None]
    lap2 = d1m @ d1m
    gram = lap2.T @ (w[:, None] * lap2) + np.diag(w)
    lhs = operator.matrix.T @ (w[:, None] * operator.matrix)
    vals = scipy.linalg.eigvalsh(lhs, 0.5 * (gram + gram.T))
    return float(np.sqrt(max(vals[0], 0.0)))


def incompressibility_apply(state, values, operator=None):
    """Apply the incompressibility relaxation: v - kappa H^-1 (kappa v)."""
    if operator is None:
        operator = HelmholtzOperator(state)
    v = np.asarray(values, dtype=float)
    return v - state.kappa * helmholtz_solve(operator, state.kappa * v)


def incompressibility_matrix(state, operator=None):
    if operator is None:
        operator = HelmholtzOperator(state)
    n = state.n
    hinv = scipy.linalg.lu_solve(operator._factorization(), np.eye(n))
    return np.eye(n) - state.kappa[:, None] * hinv * state.kappa[None, :]


def incompressibility_spectrum(state, operator=None):
    """Sorted eigenvalues of the relaxation in the dsigma inner product.

    Non-negative with a one-dimensional kernel spanned by kappa; the
    spectrum accumulates at 1 (compact perturbation of the identity).
    """
    mat = incompressibility_matrix(state, operator)
    w = np.sqrt(state.g)
    sym = (w[:, None] * mat) / w[None, :]
    return np.sort(scipy.linalg.eigvalsh(0.5 * (sym + sym.T)))
