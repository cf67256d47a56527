"""Coherent-population-trapping steady state and the adiabaticity monitor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ._validation import check_nonnegative, check_positive
from .model import PulseShape, rabi_pulse


class PulseVanished(ArithmeticError):
    """The Rabi rate underflowed, so ``eta = lambda / Omega`` is unbounded."""


@dataclass(frozen=True)
class CptPoint:
    R: float
    omega_over_lambda: float
    n_ab_s: float


def cpt_steady_state(R, omega_over_lambda):
    """Dark-state product fraction ``N_ab = N_b`` for initial ratio ``R``.

    Vectorizes over both arguments.
    """
    R = np.asarray(R, dtype=float)
    x = np.asarray(omega_over_lambda, dtype=float)
    if np.any(R <= 0):
        raise ValueError("R must be > 0")
    if np.any(x < 0):
        raise ValueError("omega_over_lambda must be >= 0")
    root = np.sqrt((1.0 - 2.0 * R) ** 2 + 8.0 * R * x ** 2)
    out = 2.0 * R / ((1.0 + R) * (1.0 + 2.0 * R + root))
    return out if out.ndim else float(out)


def cpt_point(R, omega_over_lambda):
    return CptPoint(R, omega_over_lambda, cpt_steady_state(R, omega_over_lambda))


def optimal_ratio(omega_over_lambda, r_max=1e3, xtol=1e-9):
    """Initial ratio maximizing the steady-state product fraction.

    A log-spaced pre-scan brackets the peak, then a bounded Brent search
    refines it. Returns ``(R_star, N_s(R_star))``.
    """
    check_nonnegative(omega_over_lambda, "omega_over_lambda")
    grid = np.geomspace(1e-6, r_max, 2001)
    vals = cpt_steady_state(grid, omega_over_lambda)
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(lambda r: -cpt_steady_state(r, omega_over_lambda),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": xtol, "maxiter": 500})
    r_star = float(res.x)
    return r_star, float(cpt_steady_state(r_star, omega_over_lambda))


def adiabaticity_monitor(params, t):
    """Nonadiabatic loss parameter ``|d eta/dt| / ((1 + eta) 4 lambda)``, ``eta = lambda / Omega``.

    The dark state is followed faithfully while this stays much smaller
    than one.
    """
    omega = rabi_pulse(params, t)
    if not omega > 0 or not np.isfinite(params.lam / omega):
        raise PulseVanished(f"Rabi rate {omega!r} at t={t} leaves eta unbounded")
    eta = params.lam / omega
    if params.pulse is PulseShape.CONSTANT:
        eta_dot = 0.0
    else:
        u = (t - params.t0) / params.tau
        eta_dot = (params.lam / params.omega0) * np.sinh(u) / params.tau
    check_positive(params.lam, "lam")
    return float(abs(eta_dot) / ((1.0 + eta) * 4.0 * params.lam))
