"""Dormand-Prince 5(4) with an H211b digital-filter step-size controller."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .gas import AdmissibilityError

log = logging.getLogger(__name__)

# Butcher tableau (7 stages, first-same-as-last)
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.zeros((7, 7))
A[1, :1] = [1 / 5]
A[2, :2] = [3 / 40, 9 / 40]
A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
B5 = A[6].copy()
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
               187 / 2100, 1 / 40])
B_ERR = B5 - B4


@dataclass(frozen=True)
class Tolerances:
    atol: float = 1e-8
    rtol: float = 1e-8
    dt_min: float = 1e-14
    dt_max: float = math.inf
    max_steps: int = 1_000_000
    safety: float = 0.9
    fac_min: float = 0.2
    fac_max: float = 5.0
    # before the first accepted step dt is an unvalidated guess, so an
    # inadmissible stage there is retried with dt * fac_min this many times;
    # after that any inadmissible stage is a blow-up
    stage_retries: int = 3

    def __post_init__(self):
        if self.atol <= 0 or self.rtol < 0:
            raise ValueError("need atol > 0 and rtol >= 0")
        if not 0 < self.fac_min < 1 < self.fac_max:
            raise ValueError("step-ratio clamp must bracket 1")


ACCURACY = Tolerances(1e-8, 1e-8)
ROBUSTNESS = Tolerances(1e-6, 1e-6)


@dataclass
class StepOutcome:
    accepted: bool
    t: float                  # time after the step (unchanged if rejected)
    dt: float                 # step size attempted
    dt_new: float             # proposal for the next step
    error: float
    y: Optional[np.ndarray] = None
    k_last: Optional[np.ndarray] = None
    blowup: bool = False
    blowup_info: Optional[dict] = None


@dataclass
class H211b:
    """dt_{n+1} = dt_n (1/e_n)^{b1} (1/e_{n-1})^{b2} (dt_n/dt_{n-1})^{-a2}."""
    order: int = 5            # k: error estimator order + 1
    b: float = 4.0
    err_prev: float = 1.0
    dt_prev: Optional[float] = None

    def accept(self, err, dt, tol: Tolerances):
        beta = 1.0 / (self.b * self.order)
        e = max(err, 1e-10)
        fac = (1.0 / e) ** beta * (1.0 / max(self.err_prev, 1e-10)) ** beta
        if self.dt_prev is not None:
            fac *= (dt / self.dt_prev) ** (-1.0 / self.b)
        fac = min(tol.fac_max, max(tol.fac_min, tol.safety * fac))
        self.err_prev, self.dt_prev = e, dt
        return dt * fac

    def reject(self, err, dt, tol: Tolerances):
        fac = tol.safety * max(err, 1e-10) ** (-1.0 / self.order) if math.isfinite(err) else 0.0
        self.dt_prev = None
        self.err_prev = 1.0
        return dt * min(0.9, max(tol.fac_min, fac))


def error_norm(y, y_new, err_vec, tol: Tolerances):
    scale = tol.atol + tol.rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err_vec / scale) ** 2)))


def _admissible(y):
    return bool(np.all(np.isfinite(y)))


def step(rhs: Callable, y, t, dt, tol: Tolerances = ACCURACY, k1=None) -> StepOutcome:
    """One attempted DP5(4) step.  Inadmissible stages become a blow-up outcome."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k = [None] * 7
    try:
        k[0] = rhs(y, t) if k1 is None else k1
        for s in range(1, 7):
            ys = y + dt * sum(A[s, j] * k[j] for j in range(s) if A[s, j] != 0.0)
            if not _admissible(ys):
                raise AdmissibilityError("non-finite stage value", time=t + C[s] * dt)
            k[s] = rhs(ys, t + C[s] * dt)
            if not _admissible(k[s]):
                raise AdmissibilityError("non-finite stage derivative", time=t + C[s] * dt)
    except AdmissibilityError as err:
        info = {"time": err.time if err.time is not None else t, "message": str(err),
                "location": getattr(err, "location", None)}
        return StepOutcome(False, t, dt, dt, math.inf, blowup=True, blowup_info=info)
    y_new = ys                       # FSAL: stage 7 is the fifth-order solution
    err_vec = dt * sum(B_ERR[j] * k[j] for j in range(7) if B_ERR[j] != 0.0)
    err = error_norm(y, y_new, err_vec, tol)
    if not math.isfinite(err):
        return StepOutcome(False, t, dt, dt * tol.fac_min, err)
    return StepOutcome(err <= 1.0, t + dt if err <= 1.0 else t, dt, dt, err,
                       y=y_new if err <= 1.0 else None,
                       k_last=k[6] if err <= 1.0 else None)


@dataclass
class AdvanceResult:
    y: np.ndarray
    t: float
    status: str               # finished | blowup | max_steps | dt_underflow | deadline
    n_steps: int
    n_rejected: int
    n_rhs: int
    log: list = field(default_factory=list)
    blowup_info: Optional[dict] = None

    @property
    def finished(self):
        return self.status == "finished"


def initial_step(rhs, y, t, tol: Tolerances, f0=None, order=5):
    """Standard starting-step heuristic from two derivative samples."""
    f0 = rhs(y, t) if f0 is None else f0
    scale = tol.atol + tol.rtol * np.abs(y)
    d0 = float(np.sqrt(np.mean((y / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    try:
        f1 = rhs(y + h0 * f0, t + h0)
    except AdmissibilityError:
        return h0
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        return math.inf        # stationary start: the controller cuts back if needed
    return min(100 * h0, (0.01 / max(d1, d2)) ** (1.0 / order))


def advance(rhs: Callable, y0, t0, tf, tol: Tolerances = ACCURACY, dt0=None,
            monitor: Optional[Callable] = None, log_every: int = 1,
            deadline: Optional[float] = None) -> AdvanceResult:
    """Integrate from t0 to tf.  *monitor(step, t, y, k)* may return a dict of
    extra diagnostics that is merged into the per-step log record.  With a
    *deadline* (a time.perf_counter() value) the run stops with status
    "deadline" once it is passed."""
    if not tf > t0:
        raise ValueError("tf must exceed t0")
    y = np.array(y0, dtype=float, copy=True)
    t = float(t0)
    n_rhs = [0]

    def f(yy, tt):
        n_rhs[0] += 1
        return rhs(yy, tt)

    records = []
    try:
        k1 = f(y, t)
        dt = initial_step(f, y, t, tol, k1) if dt0 is None else float(dt0)
    except AdmissibilityError as err:
        return AdvanceResult(y, t, "blowup", 0, 0, n_rhs[0], records,
                             {"time": t, "message": str(err),
                              "location": getattr(err, "location", None)})
    dt = min(dt, tol.dt_max, tf - t)
    ctrl = H211b()
    n_acc = n_rej = retries = 0
    while True:
        if n_acc + n_rej >= tol.max_steps:
            return AdvanceResult(y, t, "max_steps", n_acc, n_rej, n_rhs[0], records)
        if deadline is not None and time.perf_counter() > deadline:
            return AdvanceResult(y, t, "deadline", n_acc, n_rej, n_rhs[0], records)
        last = t + dt >= tf - 1e-13 * max(1.0, abs(tf))
        if last:
            dt = tf - t
        out = step(f, y, t, dt, tol, k1)
        if out.blowup and n_acc == 0 and retries < tol.stage_retries:
            retries += 1
            n_rej += 1
            dt *= tol.fac_min
            ctrl.reject(math.inf, dt, tol)
            continue
        if out.blowup:
            log.info("blow-up at t=%.6g: %s", out.blowup_info["time"], out.blowup_info["message"])
            return AdvanceResult(y, t, "blowup", n_acc, n_rej, n_rhs[0], records,
                                 out.blowup_info)
        if not out.accepted:
            n_rej += 1
            dt = ctrl.reject(out.error, dt, tol)
            if dt < tol.dt_min:
                return AdvanceResult(y, t, "dt_underflow", n_acc, n_rej, n_rhs[0], records)
            continue
        n_acc += 1
        y, k1 = out.y, out.k_last
        t = tf if last else out.t
        dt_next = ctrl.accept(out.error, dt, tol)
        if n_acc % log_every == 0 or last:
            rec = {"step": n_acc, "t": t, "dt": dt, "err_estimate": out.error}
            if monitor is not None:
                rec.update(monitor(n_acc, t, y, k1) or {})
            records.append(rec)
        if last:
            return AdvanceResult(y, t, "finished", n_acc, n_rej, n_rhs[0], records)
        dt = min(dt_next, tol.dt_max, tf - t)
