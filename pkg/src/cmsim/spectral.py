"""Structured-reservoir side of the model equivalences.

Spectral densities, the exact memory-kernel (Volterra) equation for a
single excitation decaying into a structured reservoir,

    eps'(t) = -int_0^t K(t - s) eps(s) ds,
    K(dt)   = int dw J(w) e^{i (w0 - w) dt},

and the Fourier-sine pair linking a pure-dephasing rate gamma(t) to its
spectral density J(w).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate

_MAX_SERIES_TERMS = 100000


@dataclass(frozen=True)
class LorentzianSum:
    """J(w) = sum_k weight_k * hw_k^2 / ((w - center_k)^2 + hw_k^2).

    Each term peaks at its (signed) weight; the term integral over the
    real line is weight * pi * hw.  Individual weights may be negative
    as long as the sum stays nonnegative, which is checked on a grid
    spanning every term at construction."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(w), float(c), float(h)) for (w, c, h) in self.terms)
        object.__setattr__(self, "terms", terms)
        for _, _, h in terms:
            if h <= 0.0:
                raise ValueError("half-widths must be positive")
        if terms:
            grids = [
                np.linspace(c - 10.0 * h, c + 10.0 * h, 401)
                for (_, c, h) in terms
            ]
            omega = np.concatenate(grids)
            scale = max(abs(w) for (w, _, _) in terms)
            if np.min(eval_sd(self, omega)) < -1e-12 * max(scale, 1.0):
                raise ValueError("spectral density is negative on the grid")


@dataclass(frozen=True)
class DephasingSeries:
    """Equivalent spectral density of the overdamped pure-dephasing
    model: an infinite sum of zero-centered Lorentzians

        J(w) = sum_{m>=1} kc r^m (2 kc m)^2 / (w^2 + (2 kc m)^2),
        kc = sqrt(gamma^2 - 4 G^2),  r = (gamma - kc)/(gamma + kc),

    defined for gamma > 2 G (kc real, r < 1)."""

    gamma: float
    big_g: float
    truncation_tol: float = 1e-12

    def __post_init__(self):
        if self.gamma <= 2.0 * self.big_g:
            raise ValueError("DephasingSeries requires gamma > 2 G")

    @property
    def kappa(self) -> float:
        return float(np.sqrt(self.gamma**2 - 4.0 * self.big_g**2))

    @property
    def ratio(self) -> float:
        return (self.gamma - self.kappa) / (self.gamma + self.kappa)

    def lorentzian_terms(self):
        """(weight, center=0, half_width) terms until the geometric
        weights fall below truncation_tol relative to the first."""
        kc, r = self.kappa, self.ratio
        if r == 0.0:
            return
        first = kc * r
        weight = first
        m = 1
        while m <= _MAX_SERIES_TERMS:
            yield (weight, 0.0, 2.0 * kc * m)
            m += 1
            weight *= r
            if abs(weight) < self.truncation_tol * abs(first):
                return


def _iter_terms(j):
    if isinstance(j, LorentzianSum):
        return j.terms
    if isinstance(j, DephasingSeries):
        return j.lorentzian_terms()
    raise TypeError(f"unsupported spectral density {type(j).__name__}")


def eval_sd(j, omega):
    """Pointwise J(omega); omega may be an array."""
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    for w, c, h in _iter_terms(j):
        out = out + w * h**2 / ((omega - c) ** 2 + h**2)
    return out if out.shape else float(out)


def memory_kernel(j, dt, omega0=0.0):
    """K(dt) = int dw J(w) e^{i (w0 - w) dt} for dt >= 0.

    Every supported variant is a sum of Lorentzians, for which contour
    integration gives the closed form
    weight * pi * hw * e^{i (w0 - center) dt - hw dt} per term."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    out = 0.0 + 0.0j
    for w, c, h in _iter_terms(j):
        out += w * np.pi * h * np.exp(1j * (omega0 - c) * dt - h * dt)
    return out


def memory_kernel_quadrature(j, dt, omega0=0.0):
    """Adaptive-quadrature evaluation of the kernel integral over the
    real frequency line; cross-check oracle for the closed form.

    Each Lorentzian term is shifted to its center, where the transform
    reduces to the even integral 2 w h^2 int_0^inf cos(x dt)/(x^2+h^2)
    dx, handled by oscillatory-weight quadrature plus an O(1/L^2)
    analytic-tail-free cutoff."""
    out = 0.0 + 0.0j
    for w, c, h in _iter_terms(j):
        if dt == 0.0:
            val, _ = scipy.integrate.quad(
                lambda x: 1.0 / (x**2 + h**2), 0.0, np.inf
            )
        else:
            cut = max(1000.0 * h, np.sqrt(2.0 / (dt * 1e-13)) )
            val, _ = scipy.integrate.quad(
                lambda x: 1.0 / (x**2 + h**2),
                0.0,
                cut,
                weight="cos",
                wvar=dt,
                limit=5000,
                epsabs=1e-13,
                epsrel=1e-11,
            )
        out += np.exp(1j * (omega0 - c) * dt) * 2.0 * w * h**2 * val
    return out


def solve_volterra(j, omega0, t_grid, method="auto"):
    """eps(t) samples of eps' = -int_0^t K(t-s) eps(s) ds, eps(0) = 1.

    method 'trapezoid': implicit product-integration on the uniform
    grid, global error O(h^2).  method 'pseudo_mode': each Lorentzian
    term becomes one damped auxiliary amplitude, turning the equation
    into a small linear ODE system integrated adaptively (exact up to
    integrator tolerance).  'auto' picks pseudo_mode."""
    t_grid = np.asarray(t_grid, dtype=float)
    h = np.diff(t_grid)
    if t_grid[0] != 0.0 or len(t_grid) < 2:
        raise ValueError("t_grid must start at 0 with at least two points")
    if np.max(np.abs(h - h[0])) > 1e-9 * h[0]:
        raise ValueError("t_grid must be uniform")
    if method == "auto":
        method = "pseudo_mode"
    if method == "pseudo_mode":
        return _volterra_pseudo_mode(j, omega0, t_grid)
    if method == "trapezoid":
        return _volterra_trapezoid(j, omega0, t_grid)
    raise ValueError("method must be 'auto', 'trapezoid' or 'pseudo_mode'")


def _volterra_trapezoid(j, omega0, t_grid):
    n = len(t_grid)
    h = t_grid[1] - t_grid[0]
    kernel = np.array([memory_kernel(j, m * h, omega0) for m in range(n)])
    eps = np.empty(n, dtype=complex)
    deriv = np.empty(n, dtype=complex)
    eps[0] = 1.0
    deriv[0] = 0.0
    k0 = kernel[0]
    for m in range(1, n):
        # Trapezoidal quadrature of the memory integral at t_m, with
        # the unknown eps[m] entering only through the j = m endpoint.
        weights = np.full(m + 1, h, dtype=float)
        weights[0] = weights[m] = 0.5 * h
        partial = np.dot(weights[:m] * kernel[m:0:-1], eps[:m])
        # eps[m] = eps[m-1] + h/2 (deriv[m-1] + deriv[m]) with
        # deriv[m] = -(partial + h/2 K(0) eps[m]).
        rhs = eps[m - 1] + 0.5 * h * (deriv[m - 1] - partial)
        eps[m] = rhs / (1.0 + 0.25 * h**2 * k0)
        deriv[m] = -(partial + 0.5 * h * k0 * eps[m])
    return eps


def _volterra_pseudo_mode(j, omega0, t_grid):
    terms = list(_iter_terms(j))
    n_aux = len(terms)
    if n_aux == 0:
        return np.ones(len(t_grid), dtype=complex)
    strengths = np.array([w * np.pi * h for (w, _, h) in terms])
    poles = np.array([-1j * (c - omega0) - h for (_, c, h) in terms])

    def rhs(_t, y):
        eps = y[0]
        z = y[1:]
        return np.concatenate(
            [[-np.dot(strengths, z)], poles * z + eps * np.ones(n_aux)]
        )

    y0 = np.zeros(n_aux + 1, dtype=complex)
    y0[0] = 1.0
    sol = scipy.integrate.solve_ivp(
        rhs,
        (0.0, float(t_grid[-1])),
        y0,
        t_eval=t_grid,
        method="DOP853",
        rtol=1e-12,
        atol=1e-12,
    )
    if not sol.success:
        raise RuntimeError(f"pseudo-mode integration failed: {sol.message}")
    return sol.y[0]


def map_lorentzian_to_cm(gamma0, kappa, delta, tau):
    """Collision-model parameters associated with a single Lorentzian
    of strength gamma0, half-width kappa and center offset delta:
    G = sqrt(gamma0 kappa)/2 and g = sqrt(2 kappa / tau), so that the
    collision rate g^2 tau equals 2 kappa exactly.

    Note: matching the memory kernel of this module's Lorentzian
    normalization instead requires G = sqrt(gamma0 kappa / 2); see the
    README discussion of the two amplitude conventions."""
    from .lossy_cavity import LossyCavityParams

    if gamma0 <= 0 or kappa <= 0 or tau <= 0:
        raise ValueError("gamma0, kappa and tau must be positive")
    return LossyCavityParams(
        delta=float(delta),
        big_g=float(np.sqrt(gamma0 * kappa) / 2.0),
        small_g=float(np.sqrt(2.0 * kappa / tau)),
        tau=float(tau),
    )


def dephasing_rate_from_sd(j, t):
    """gamma(t) = (2/pi) int_0^inf sin(w t) J(w)/w dw.

    For zero-centered Lorentzian terms the integral is elementary:
    each term contributes weight * (1 - e^{-hw t}).  Terms with
    nonzero centers fall back to adaptive quadrature."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 0.0
    out = 0.0
    for w, c, h in _iter_terms(j):
        if c == 0.0:
            out += w * (1.0 - np.exp(-h * t))
        else:
            term = LorentzianSum(((w, c, h),))

            def integrand(omega):
                return eval_sd(term, omega) * np.sin(omega * t) / omega

            cutoff = abs(c) + 60.0 * h
            val, _ = scipy.integrate.quad(
                integrand, 0.0, cutoff, limit=800, epsabs=1e-12, epsrel=1e-10
            )
            out += (2.0 / np.pi) * val
    return out


def sd_from_dephasing_rate(gamma_fn, omega, t_max):
    """J(omega) = omega * int_0^inf sin(omega t) gamma(t) dt, evaluated
    as an Abel-regularized truncated transform.

    gamma(t) is assumed to settle to a constant by t_max; the constant
    contributes its exact limit value to J, the remainder is integrated
    on [0, t_max] with oscillatory quadrature, and an exponential-tail
    model fitted near t_max corrects the truncation."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    gamma_inf = gamma_fn(t_max)
    samples = np.array([gamma_fn(x * t_max) for x in (0.7, 0.8, 0.9)])
    residuals = samples - gamma_inf
    scale = max(abs(gamma_inf), float(np.max(np.abs(samples))), 1e-300)
    if abs(residuals[-1]) > 1e-2 * scale:
        raise ValueError(
            "gamma(t) has not settled by t_max; increase the cutoff"
        )

    integral, _ = scipy.integrate.quad(
        lambda t: gamma_fn(t) - gamma_inf,
        0.0,
        t_max,
        weight="sin",
        wvar=omega,
        limit=2000,
        epsabs=1e-13,
        epsrel=1e-11,
    )

    # Exponential-tail correction A e^{-b t} beyond t_max, fitted from
    # the last two residual samples when they are meaningfully nonzero.
    tail = 0.0
    r1, r2 = residuals[1], residuals[2]
    if abs(r2) > 1e-14 * scale and abs(r1) > abs(r2):
        b = np.log(abs(r1) / abs(r2)) / (0.1 * t_max)
        a = r2 * np.exp(b * 0.9 * t_max)
        decay = np.exp(-b * t_max)
        tail = (
            a
            * decay
            * (b * np.sin(omega * t_max) + omega * np.cos(omega * t_max))
            / (b**2 + omega**2)
        )
    return gamma_inf + omega * (integral + tail)
