"""PACA and the comparison methods (SSPM, MCSP, CARMprod).

All four methods build the same perturbed subgradient displacements

    v_i = max(0, f_i(x) + eps) / |u_i|^2 * u_i,   u_i a subgradient of f_i at x,

and differ in how they turn them into a step:

* PACA      x+ = x - alpha * w, w = mean(v_i), alpha = mean(|v_i|^2) / |w|^2
* SSPM      x+ = x - w
* MCSP      x+ = x - relaxation * v_{k mod m}
* CARMprod  PACA with eps = 0 throughout
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ZeroSubgradientAtViolation
from .problem import CfpInstance
from .schedules import PerturbationSchedule, PowerLaw, Zero, epsilon

ZERO_W_THRESHOLD = 1e-14


class Algorithm(str, enum.Enum):
    PACA = "paca"
    SSPM = "sspm"
    MCSP = "mcsp"
    CARMPROD = "carmprod"


class Status(str, enum.Enum):
    FEASIBLE_EXACT = "FeasibleExact"
    FEASIBLE_WITHIN_TOL = "FeasibleWithinTol"
    MAX_ITER_REACHED = "MaxIterReached"

    @property
    def solved(self) -> bool:
        return self is not Status.MAX_ITER_REACHED


@dataclass(frozen=True)
class SolverConfig:
    """Run configuration.

    `schedule` defaults to ``PowerLaw(1, 1)``, or `Zero` for CARMprod (which
    always runs unperturbed). `feasibility_tol` defaults to 0 for the
    perturbed methods and 1e-6 for CARMprod. ``trace_every=0`` disables
    tracing; ``trace_every=j`` keeps every j-th step.
    """

    algorithm: Algorithm = Algorithm.PACA
    schedule: PerturbationSchedule | None = None
    feasibility_tol: float | None = None
    max_iter: int = 100_000
    zero_w_threshold: float = ZERO_W_THRESHOLD
    mcsp_relaxation: float = 1.0
    mcsp_harmonic: bool = False
    trace_every: int = 1

    def __post_init__(self):
        algo = Algorithm(self.algorithm)
        object.__setattr__(self, "algorithm", algo)
        if algo is Algorithm.CARMPROD:
            object.__setattr__(self, "schedule", Zero())
        elif self.schedule is None:
            object.__setattr__(self, "schedule", PowerLaw(1.0, 1.0))
        if self.feasibility_tol is None:
            object.__setattr__(self, "feasibility_tol", 1e-6 if algo is Algorithm.CARMPROD else 0.0)
        if self.feasibility_tol < 0:
            raise ValueError("feasibility_tol must be nonnegative")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if self.trace_every < 0:
            raise ValueError("trace_every must be nonnegative")
        if not self.mcsp_relaxation > 0:
            raise ValueError("mcsp_relaxation must be positive")


@dataclass
class StepRecord:
    """Quantities of one iteration taken at the iterate `x` (= x^k).

    For MCSP, `v` holds only the displacement of the visited set,
    `active_index`. `alpha` is None when the step was skipped because w
    vanished.
    """

    k: int
    eps: float
    x: np.ndarray
    v: np.ndarray
    w: np.ndarray
    alpha: float | None
    step_norm: float
    max_violation: float
    active_index: int | None = None

    def to_dict(self):
        return {
            "k": self.k,
            "eps": self.eps,
            "alpha": self.alpha,
            "w_norm": float(np.linalg.norm(self.w)),
            "step_norm": self.step_norm,
            "max_violation": self.max_violation,
        }


@dataclass
class SolveReport:
    status: Status
    x: np.ndarray
    iterations: int
    wall_time_s: float
    max_violation: float
    algorithm: Algorithm
    schedule: str
    trace: list[StepRecord] = field(default_factory=list)

    def to_dict(self, include_trace=False):
        out = {
            "status": self.status.value,
            "algorithm": self.algorithm.value,
            "schedule": self.schedule,
            "iterations": self.iterations,
            "wall_time_s": self.wall_time_s,
            "max_violation": self.max_violation,
            "final_point": self.x.tolist(),
        }
        if include_trace:
            out["trace"] = [r.to_dict() for r in self.trace]
        return out

    def to_json(self, include_trace=False) -> str:
        return json.dumps(self.to_dict(include_trace), indent=1)


def _displacements(vals, grads, eps):
    """Rows ``v_i`` and their squared norms for every constraint."""
    viol = vals + eps
    active = viol > 0.0
    gnorm2 = np.einsum("ij,ij->i", grads, grads)
    bad = np.flatnonzero(active & (gnorm2 == 0.0))
    if bad.size:
        i = int(bad[0])
        raise ZeroSubgradientAtViolation(i, float(viol[i]))
    coef = np.zeros_like(vals)
    coef[active] = viol[active] / gnorm2[active]
    return coef[:, None] * grads, coef * coef * gnorm2


def _averaged_update(x, V, vnorm2, eta, extrapolate):
    w = V.mean(axis=0)
    vmax2 = float(vnorm2.max())
    w2 = float(w @ w)
    if vmax2 == 0.0 or w2 <= eta * eta * vmax2:
        return x, w, None
    alpha = float(vnorm2.mean()) / w2 if extrapolate else 1.0
    return x - alpha * w, w, alpha


def _check_point(inst, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise DimensionMismatch(f"expected a point of dimension {inst.n}, got shape {x.shape}")
    return x


def paca_step(inst: CfpInstance, x, eps: float, *, k: int = 0, eta: float = ZERO_W_THRESHOLD):
    """One PACA iteration from `x`. Returns ``(x_next, StepRecord)``."""
    x = _check_point(inst, x)
    vals, grads = inst.evaluate(x)
    V, vnorm2 = _displacements(vals, grads, eps)
    x_next, w, alpha = _averaged_update(x, V, vnorm2, eta, extrapolate=True)
    rec = StepRecord(k, eps, x, V, w, alpha, float(np.linalg.norm(x_next - x)), float(vals.max()))
    return x_next, rec


def simultaneous_step(inst: CfpInstance, x, eps: float, *, k: int = 0, eta: float = ZERO_W_THRESHOLD):
    """One SSPM iteration: the equal-weight average of the perturbed projections."""
    x = _check_point(inst, x)
    vals, grads = inst.evaluate(x)
    V, vnorm2 = _displacements(vals, grads, eps)
    x_next, w, alpha = _averaged_update(x, V, vnorm2, eta, extrapolate=False)
    rec = StepRecord(k, eps, x, V, w, alpha, float(np.linalg.norm(x_next - x)), float(vals.max()))
    return x_next, rec


def _cyclic_update(x, vals, grads, eps, k, relaxation):
    i = k % vals.size
    V, _ = _displacements(vals[i : i + 1], grads[i : i + 1], eps)
    v = V[0]
    if not v.any():
        return x, V, v, None, i
    return x - relaxation * v, V, v, relaxation, i


def cyclic_step(inst: CfpInstance, x, eps: float, k: int, relaxation: float = 1.0):
    """One MCSP iteration: a perturbed subgradient projection onto set ``k mod m``."""
    x = _check_point(inst, x)
    vals, grads = inst.evaluate(x)
    x_next, V, v, alpha, i = _cyclic_update(x, vals, grads, eps, k, relaxation)
    rec = StepRecord(k, eps, x, V, v, alpha, float(np.linalg.norm(x_next - x)), float(vals.max()), i)
    return x_next, rec


def run(cfg: SolverConfig, inst: CfpInstance, x0) -> SolveReport:
    """Iterate the configured method from `x0` until feasible or `max_iter` steps.

    Feasibility (``max_i f_i(x^k) <= feasibility_tol``) is tested before each
    step, so a feasible `x0` returns after zero steps.
    """
    x = _check_point(inst, x0).copy()
    algo = cfg.algorithm
    sched = cfg.schedule
    tol = cfg.feasibility_tol
    eta = cfg.zero_w_threshold
    every = cfg.trace_every
    trace = []

    t0 = time.perf_counter()
    k = 0
    while True:
        vals, grads = inst.evaluate(x)
        viol = float(vals.max())
        if viol <= tol:
            status = Status.FEASIBLE_EXACT if viol <= 0.0 else Status.FEASIBLE_WITHIN_TOL
            break
        if k >= cfg.max_iter:
            status = Status.MAX_ITER_REACHED
            break
        eps = epsilon(sched, k)
        active = None
        if algo is Algorithm.MCSP:
            relax = cfg.mcsp_relaxation / (k + 1) if cfg.mcsp_harmonic else cfg.mcsp_relaxation
            x_next, V, w, alpha, active = _cyclic_update(x, vals, grads, eps, k, relax)
        else:
            V, vnorm2 = _displacements(vals, grads, eps)
            x_next, w, alpha = _averaged_update(x, V, vnorm2, eta, extrapolate=algo is not Algorithm.SSPM)
        if every and k % every == 0:
            step = float(np.linalg.norm(x_next - x))
            trace.append(StepRecord(k, eps, x, V, w, alpha, step, viol, active))
        x = x_next
        k += 1
    wall = time.perf_counter() - t0

    return SolveReport(
        status=status,
        x=x,
        iterations=k,
        wall_time_s=wall,
        max_violation=viol,
        algorithm=algo,
        schedule=str(sched),
        trace=trace,
    )
