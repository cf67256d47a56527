"""Compiled inner loops: mean-field right-hand side and the DOPRI5 stepper.

Everything here works on flat float arrays so numba can compile it in
nopython mode and release the GIL. The state vector holds the real parts of
the five amplitudes followed by their imaginary parts.
"""

import numpy as np
from numba import njit

# layout of the packed parameter vector
P_LAM = 0
P_OMEGA0 = 1
P_TAU = 2
P_T0 = 3
P_DELTA = 4
P_DDELTA = 5
P_GAMMA = 6
P_PULSE = 7  # 0 = sech, 1 = constant
N_PARAMS = 8

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NONFINITE = 2
STATUS_MAXSTEPS = 3

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth-order weights minus embedded fourth-order weights
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0


@njit(cache=True, nogil=True)
def pulse(prm, t):
    if prm[P_PULSE] == 1.0:
        return prm[P_OMEGA0]
    return prm[P_OMEGA0] / np.cosh((t - prm[P_T0]) / prm[P_TAU])


@njit(cache=True, nogil=True)
def rhs(t, y, prm, chi, kin, out):
    """Mean-field equations of motion, species order (a, b, b2, ab, t)."""
    a = complex(y[0], y[5])
    b = complex(y[1], y[6])
    b2 = complex(y[2], y[7])
    ab = complex(y[3], y[8])
    tt = complex(y[4], y[9])
    n0 = a.real * a.real + a.imag * a.imag
    n1 = b.real * b.real + b.imag * b.imag
    n2 = b2.real * b2.real + b2.imag * b2.imag
    n3 = ab.real * ab.real + ab.imag * ab.imag
    n4 = tt.real * tt.real + tt.imag * tt.imag

    lam = prm[P_LAM]
    om = pulse(prm, t)
    delta = prm[P_DELTA]

    ph = np.empty(5)
    for i in range(5):
        ph[i] = 2.0 * (chi[i, 0] * n0 + chi[i, 1] * n1 + chi[i, 2] * n2
                       + chi[i, 3] * n3 + chi[i, 4] * n4)
    # degeneracy-pressure replacement of the fermionic self terms
    if kin[1] != 0.0:
        ph[1] += 2.0 * kin[1] * n1 ** (2.0 / 3.0)
    if kin[3] != 0.0:
        ph[3] += 2.0 * kin[3] * n3 ** (2.0 / 3.0)

    da = 1j * ph[0] * a + 1j * lam * b2.conjugate() * tt
    db = 1j * ph[1] * b - 1j * om * ab.conjugate() * tt
    db2 = 1j * ph[2] * b2 + 1j * lam * a.conjugate() * tt
    dab = (1j * ph[3] * ab - 1j * om * b.conjugate() * tt
           + 1j * (prm[P_DDELTA] + delta) * ab)
    dt_ = (1j * ph[4] * tt + (1j * delta - prm[P_GAMMA]) * tt
           + 1j * lam * a * b2 - 1j * om * b * ab)

    out[0] = da.real
    out[1] = db.real
    out[2] = db2.real
    out[3] = dab.real
    out[4] = dt_.real
    out[5] = da.imag
    out[6] = db.imag
    out[7] = db2.imag
    out[8] = dab.imag
    out[9] = dt_.imag


@njit(cache=True, nogil=True)
def _all_finite(y):
    for i in range(y.shape[0]):
        if not np.isfinite(y[i]):
            return False
    return True


@njit(cache=True, nogil=True)
def dopri5(y0, grid, prm, chi, kin, rtol, atol, max_step, fixed_step):
    """Propagate ``y0`` from ``grid[0]`` over ``grid`` (monotone, either direction).

    Returns ``(out, status, t_reached, n_accepted, n_rejected)``. ``out`` holds
    the state at every grid instant; rows past a failure are left as NaN.
    Steps are clipped to land on each grid instant, so no interpolation is
    involved. With ``fixed_step > 0`` the controller is disabled and every
    step has that magnitude apart from such landings.
    """
    n = y0.shape[0]
    m = grid.shape[0]
    out = np.full((m, n), np.nan)
    for i in range(n):
        out[0, i] = y0[i]

    t = grid[0]
    t_end = grid[m - 1]
    direction = 1.0 if t_end >= t else -1.0
    span = abs(t_end - t)
    if span == 0.0:
        for j in range(1, m):
            for i in range(n):
                out[j, i] = y0[i]
        return out, STATUS_OK, t, 0, 0

    y = y0.copy()
    ynew = np.empty(n)
    ytmp = np.empty(n)
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)

    rhs(t, y, prm, chi, kin, k1)

    hmax = max_step if max_step > 0.0 else span
    if fixed_step > 0.0:
        h = fixed_step
    else:
        # Hairer-Wanner starting step heuristic
        d0 = 0.0
        d1 = 0.0
        for i in range(n):
            sc = atol + rtol * abs(y[i])
            d0 += (y[i] / sc) ** 2
            d1 += (k1[i] / sc) ** 2
        d0 = np.sqrt(d0 / n)
        d1 = np.sqrt(d1 / n)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * d0 / d1
        h0 = min(h0, hmax)
        for i in range(n):
            ytmp[i] = y[i] + direction * h0 * k1[i]
        rhs(t + direction * h0, ytmp, prm, chi, kin, k2)
        d2 = 0.0
        for i in range(n):
            sc = atol + rtol * abs(y[i])
            d2 += ((k2[i] - k1[i]) / sc) ** 2
        d2 = np.sqrt(d2 / n) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** 0.2
        h = min(100.0 * h0, h1, hmax)

    beta = 0.04
    alpha = 0.2 - 0.75 * beta
    err_old = 1e-4
    safety = 0.9
    n_acc = 0
    n_rej = 0
    j = 1
    rejected_last = False
    max_total = 50_000_000
    h_prop = h

    while j < m:
        if n_acc + n_rej > max_total:
            return out, STATUS_MAXSTEPS, t, n_acc, n_rej
        # every report instant is hit exactly by a step
        target = grid[j]
        remaining = abs(target - t)
        h_prop = h
        landing = False
        if h >= remaining or remaining - h <= 1e-10 * h:
            h = remaining
            landing = True
        hmin = 1e-14 * max(abs(t), 1.0)
        if h < hmin:
            return out, STATUS_UNDERFLOW, t, n_acc, n_rej
        hs = direction * h

        for i in range(n):
            ytmp[i] = y[i] + hs * A21 * k1[i]
        rhs(t + C2 * hs, ytmp, prm, chi, kin, k2)
        for i in range(n):
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i])
        rhs(t + C3 * hs, ytmp, prm, chi, kin, k3)
        for i in range(n):
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        rhs(t + C4 * hs, ytmp, prm, chi, kin, k4)
        for i in range(n):
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        rhs(t + C5 * hs, ytmp, prm, chi, kin, k5)
        for i in range(n):
            ytmp[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                   + A64 * k4[i] + A65 * k5[i])
        rhs(t + hs, ytmp, prm, chi, kin, k6)
        for i in range(n):
            ynew[i] = y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                   + B5 * k5[i] + B6 * k6[i])
        t_new = target if landing else t + hs
        rhs(t_new, ynew, prm, chi, kin, k7)

        if not _all_finite(ynew) or not _all_finite(k7):
            if fixed_step > 0.0:
                return out, STATUS_NONFINITE, t, n_acc, n_rej
            h *= 0.25
            n_rej += 1
            rejected_last = True
            continue

        err = 0.0
        if fixed_step <= 0.0:
            for i in range(n):
                sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
                e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                          + E6 * k6[i] + E7 * k7[i])
                err += (e / sc) ** 2
            err = np.sqrt(err / n)

        if err <= 1.0:
            t = t_new
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = k7[i]
            if landing:
                for i in range(n):
                    out[j, i] = y[i]
                j += 1
            n_acc += 1
            if fixed_step > 0.0:
                h = fixed_step
                continue
            # PI step-size control (Gustafsson)
            err_c = max(err, 1e-10)
            fac = safety * err_c ** (-alpha) * err_old ** beta
            fac = min(5.0, max(0.2, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            err_old = max(err, 1e-4)
            h = h * fac
            if landing:
                # a clipped landing step says nothing about the natural step size
                h = max(h, h_prop)
            h = min(h, hmax)
            rejected_last = False
        else:
            if not _all_finite(np.array([err])):
                err = 1e10
            fac = max(0.2, safety * err ** (-0.2))
            h *= fac
            n_rej += 1
            rejected_last = True

    return out, STATUS_OK, t, n_acc, n_rej
