"""Adaptive Dormand-Prince propagation of a :class:`FieldState`."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .model import A_CONTENT, B_CONTENT, SPECIES, FieldState


class IntegrationError(RuntimeError):
    """Integration aborted; carries the last good time and step counts."""

    def __init__(self, message, t_reached=None, n_accepted=0, n_rejected=0,
                 partial=None):
        super().__init__(message)
        self.t_reached = t_reached
        self.n_accepted = n_accepted
        self.n_rejected = n_rejected
        self.partial = partial


class StepSizeUnderflow(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and reporting grid.

    Charge drift scales like ``100 * rel_tol`` over a 100/lambda run, so the
    defaults are set to keep it below 1e-8.
    ``max_step = 0`` means unbounded. ``fixed_step > 0`` switches the step
    controller off (used for order checks).
    """

    rel_tol: float = 1e-11
    abs_tol: float = 1e-11
    t_end: float = 100.0
    report_points: int = 1001
    max_step: float = 0.0
    fixed_step: float = 0.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be > 0")
        if int(self.report_points) != self.report_points or self.report_points < 2:
            raise ValueError("report_points must be an integer >= 2")
        if not np.isfinite(self.t_end):
            raise ValueError("t_end must be finite")
        if self.max_step < 0 or self.fixed_step < 0:
            raise ValueError("max_step and fixed_step must be >= 0")

    def tightened(self, factor=10.0):
        return replace(self, rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)


@dataclass(frozen=True)
class TrajectoryResult:
    times: np.ndarray
    populations: np.ndarray  # (5, n_times), species order as SPECIES
    amplitudes: np.ndarray  # (5, n_times) complex
    final_state: FieldState
    n_accepted: int = 0
    n_rejected: int = 0

    def population(self, species):
        return self.populations[SPECIES.index(species)]

    @property
    def q_A(self):
        return A_CONTENT @ self.populations

    @property
    def q_B(self):
        return B_CONTENT @ self.populations

    @property
    def charges(self):
        return self.q_A, self.q_B


def report_grid(t_start, cfg):
    return np.linspace(t_start, cfg.t_end, int(cfg.report_points))


def integrate(initial, params, cfg=IntegratorConfig()):
    """Integrate the mean-field equations from ``initial.t`` to ``cfg.t_end``.

    The right-hand side follows ``params.statistics``. Integration runs
    backward in time when ``cfg.t_end < initial.t``.

    Raises
    ------
    StepSizeUnderflow
        The controller needed a step below roundoff level.
    NonFiniteState
        The state or its derivative became NaN/Inf.
    """
    if cfg.t_end == initial.t:
        raise ValueError("t_end must differ from the initial time")
    grid = report_grid(initial.t, cfg)
    prm, chi, kin = params.packed()
    out, status, t_reached, n_acc, n_rej = _kernels.dopri5(
        initial.to_real(), grid, prm, chi, kin, float(cfg.rel_tol), float(cfg.abs_tol),
        float(cfg.max_step), float(cfg.fixed_step))
    if status != _kernels.STATUS_OK:
        kind = {
            _kernels.STATUS_UNDERFLOW: StepSizeUnderflow,
            _kernels.STATUS_NONFINITE: NonFiniteState,
        }.get(status, IntegrationError)
        good = np.isfinite(out).all(axis=1)
        raise kind(f"{kind.__name__} at t={t_reached:.6g} after {n_acc} accepted "
                   f"and {n_rej} rejected steps", t_reached=t_reached,
                   n_accepted=n_acc, n_rejected=n_rej, partial=(grid[good], out[good]))
    amp = (out[:, :5] + 1j * out[:, 5:]).T
    return TrajectoryResult(
        times=grid,
        populations=np.abs(amp) ** 2,
        amplitudes=amp,
        final_state=FieldState.from_amplitudes(amp[:, -1], t=grid[-1]),
        n_accepted=int(n_acc),
        n_rejected=int(n_rej),
    )


def convergence_probe(initial, params, cfg=IntegratorConfig(), factor=10.0):
    """Largest population change on the grid when tolerances are tightened by ``factor``."""
    coarse = integrate(initial, params, cfg)
    fine = integrate(initial, params, cfg.tightened(factor))
    return float(np.max(np.abs(coarse.populations - fine.populations)))
