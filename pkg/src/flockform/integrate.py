"""Time integration of the closed-loop swarm with singularity-aware step control.

The default method is an embedded Dormand-Prince 4(5) pair with the classic
halving/growing controller plus one extra cap: no agent may travel more than
half the current minimum pairwise distance in a single step, so the stepper
cannot jump across the kernel singularity between error checks.  A fixed-step
classical RK4 is provided for convergence studies.

Runs terminate early with a recorded event when the swarm numerically
collides (minimum distance under ``collision_eps``) or when the controller
demands a step below ``dt_min``.  Near misses are recorded without stopping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticsRecord, compute_record
from .model import (
    KERNEL_REGULAR,
    FormationSpec,
    ModelParams,
    SingularityError,
    SwarmState,
    accel,
    distance_matrix,
)

METHOD_DOPRI45 = "dopri45"
METHOD_RK4 = "rk4"

EVENT_NEAR_COLLISION = "near-collision"
EVENT_NUMERICAL_COLLISION = "numerical-collision"
EVENT_STEP_FLOOR = "step-floor"

STATUS_COMPLETED = "completed"
STATUS_COLLISION = "numerical-collision"
STATUS_STEP_FLOOR = "step-floor"

# Dormand-Prince 5(4): seven stages, order-5 propagation, embedded order-4
# error estimate.  FSAL is not exploited.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_ERR = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

_RK4_C = (0.0, 0.5, 0.5, 1.0)


class NumericalBlowUpError(RuntimeError):
    """The state left the range of finite doubles; the run is aborted."""

    def __init__(self, t, step):
        super().__init__(f"non-finite state at t = {t:g} (accepted step {step})")
        self.t = t
        self.step = step


@dataclass
class IntegratorConfig:
    """Stepper selection, tolerances, horizon, and event thresholds.

    ``collision_eps`` and ``near_eps`` default to 1e-7 and 0.1 times the
    initial minimum pairwise distance when left unset.
    """

    method: str = METHOD_DOPRI45
    dt_init: float = 1e-3
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    dt_min: float = 1e-12
    collision_eps: float | None = None
    near_eps: float | None = None
    t_end: float = 10.0
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.method not in (METHOD_DOPRI45, METHOD_RK4):
            raise ValueError(f"unknown method {self.method!r}")
        for name in ("dt_init", "rel_tol", "abs_tol", "dt_min", "t_end"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("collision_eps", "near_eps"):
            val = getattr(self, name)
            if val is not None and val <= 0:
                raise ValueError(f"{name} must be positive when set")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass
class Event:
    kind: str
    t: float
    agents: tuple          # (i, j), zero-based, i < j
    min_distance: float


@dataclass
class Trajectory:
    """Accepted samples with per-step diagnostics, plus any events.

    Sample times are strictly increasing; the last sample sits at t_end
    unless an event terminated the run.  Instances are not mutated after
    simulate() returns.
    """

    samples: list = field(default_factory=list)   # [(SwarmState, DiagnosticsRecord)]
    events: list = field(default_factory=list)
    status: str = STATUS_COMPLETED
    n_accepted: int = 0
    n_rejected: int = 0
    collision_eps: float = 0.0   # resolved thresholds actually used by the run
    near_eps: float = 0.0

    @property
    def states(self):
        return [s for s, _ in self.samples]

    @property
    def records(self):
        return [r for _, r in self.samples]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s, _ in self.samples])

    @property
    def final_state(self) -> SwarmState:
        return self.samples[-1][0]

    @property
    def final_record(self) -> DiagnosticsRecord:
        return self.samples[-1][1]

    def event_count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)


def min_pairwise_distance(state: SwarmState):
    """Minimum over i < j of r_ij with the attaining pair.

    Ties break toward the lexicographically smallest (i, j).
    """
    r = distance_matrix(state.x)
    iu = np.triu_indices(state.n, k=1)
    vals = r[iu]
    k = int(np.argmin(vals))  # row-major scan: first minimum is lexicographic
    return float(vals[k]), (int(iu[0][k]), int(iu[1][k]))


def step_controller(error_norm: float, dt: float, cfg: IntegratorConfig, dt_cap: float = np.inf):
    """Accept/reject a step and propose the next size.

    A step is accepted iff the scaled error norm is at most one.  The next
    step is dt * clamp(0.9 * norm**(-1/5), 0.2, 5.0), additionally limited by
    ``dt_cap`` (the singularity guard).  Callers must compare the result
    against cfg.dt_min and raise the step-floor event themselves.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    accept = error_norm <= 1.0
    if error_norm == 0.0:
        factor = 5.0
    else:
        factor = min(5.0, max(0.2, 0.9 * error_norm ** -0.2))
    return accept, min(dt * factor, dt_cap)


def _error_norm(err, y_old, y_new, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _dp_stages(f, t, y, dt):
    k = np.empty((7, y.size))
    k[0] = f(t, y)
    for i in range(1, 7):
        yi = y.copy()
        a = _DP_A[i]
        for j in range(i):
            if a[j] != 0.0:
                yi += (dt * a[j]) * k[j]
        k[i] = f(t + _DP_C[i] * dt, yi)
    y_new = y + dt * (_DP_B5 @ k)
    err = dt * (_DP_ERR @ k)
    return y_new, err


def _rk4_step(f, t, y, dt):
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(
    initial: SwarmState,
    params: ModelParams,
    spec: FormationSpec,
    cfg: IntegratorConfig,
) -> Trajectory:
    """Advance the closed-loop system from ``initial`` to cfg.t_end.

    Every accepted step is recorded together with its diagnostics.  The run
    stops early with a numerical-collision event when the minimum pairwise
    distance falls under collision_eps, or with a step-floor event when the
    controller wants dt < dt_min.  Non-finite states raise
    NumericalBlowUpError; initial states closer than collision_eps are a
    precondition violation.  The adaptive method retries at half the step
    when a stage lands on the kernel singularity; the fixed-step method has
    no such freedom and propagates the SingularityError.
    """
    spec.check_against(initial, params)
    n, d = initial.n, initial.d
    nd = n * d
    md0, _ = min_pairwise_distance(initial)
    collision_eps = cfg.collision_eps if cfg.collision_eps is not None else 1e-7 * md0
    near_eps = cfg.near_eps if cfg.near_eps is not None else 0.1 * md0
    if md0 <= collision_eps:
        raise ValueError(
            f"initial minimum distance {md0:g} is not above collision_eps {collision_eps:g}"
        )
    t_end = cfg.t_end
    if initial.t >= t_end:
        raise ValueError(f"initial time {initial.t:g} is not before t_end {t_end:g}")

    z = spec.z

    def f(t, y):
        x = y[:nd].reshape(n, d)
        v = y[nd:].reshape(n, d)
        out = np.empty_like(y)
        out[:nd] = y[nd:]
        out[nd:] = accel(x, v, params, z).ravel()
        return out

    # The displacement guard exists to keep steps from jumping across the
    # kernel singularity; the regular kernel has none, and crossings through
    # r = 0 are benign there and must not throttle the step.
    guarded = params.K > 0.0 and params.kernel != KERNEL_REGULAR

    def guard_cap(rec):
        # singularity guard: no agent displaces more than half the current
        # minimum pairwise distance in one step
        top = float(np.sqrt(np.einsum("ij,ij->i", state.v, state.v).max()))
        return np.inf if top == 0.0 else 0.5 * rec.min_dist / top

    t = initial.t
    y = np.concatenate([initial.x.ravel(), initial.v.ravel()])
    state = initial
    rec = compute_record(initial, params, spec)
    traj = Trajectory(samples=[(initial, rec)],
                      collision_eps=collision_eps, near_eps=near_eps)
    armed = rec.min_dist > near_eps
    adaptive = cfg.method == METHOD_DOPRI45
    cap = guard_cap(rec) if adaptive and guarded else np.inf
    dt = min(cfg.dt_init, cap)

    while t < t_end:
        if traj.n_accepted + traj.n_rejected >= cfg.max_steps:
            raise RuntimeError(f"exceeded max_steps = {cfg.max_steps} before t_end")
        dt = min(dt, t_end - t)
        hit_end = dt == t_end - t

        if adaptive:
            try:
                y_new, err = _dp_stages(f, t, y, dt)
            except SingularityError:
                # a stage stepped onto the singularity: retry at half the step
                traj.n_rejected += 1
                dt = 0.5 * dt
                if dt < cfg.dt_min:
                    traj.events.append(Event(EVENT_STEP_FLOOR, t, min_pairwise_distance(state)[1], rec.min_dist))
                    traj.status = STATUS_STEP_FLOOR
                    break
                continue
            accept, dt_next = step_controller(_error_norm(err, y, y_new, cfg), dt, cfg)
        else:
            y_new = _rk4_step(f, t, y, dt)
            accept, dt_next = True, cfg.dt_init

        if accept:
            traj.n_accepted += 1
            t = t_end if hit_end else t + dt
            y = y_new
            if not np.isfinite(y).all():
                raise NumericalBlowUpError(t, traj.n_accepted)
            state = SwarmState(t, y[:nd].reshape(n, d).copy(), y[nd:].reshape(n, d).copy())
            try:
                rec = compute_record(state, params, spec)
            except SingularityError:
                # exact overlap on an accepted state (fixed-step path only:
                # the adaptive stages already evaluated this state)
                traj.events.append(Event(EVENT_NUMERICAL_COLLISION, t,
                                         min_pairwise_distance(state)[1], 0.0))
                traj.status = STATUS_COLLISION
                break
            traj.samples.append((state, rec))
            md = rec.min_dist
            if md < collision_eps:
                traj.events.append(Event(EVENT_NUMERICAL_COLLISION, t, min_pairwise_distance(state)[1], md))
                traj.status = STATUS_COLLISION
                break
            if armed and md < near_eps:
                traj.events.append(Event(EVENT_NEAR_COLLISION, t, min_pairwise_distance(state)[1], md))
                armed = False
            elif not armed and md > 1.05 * near_eps:
                armed = True
            if adaptive and guarded:
                cap = guard_cap(rec)
        else:
            traj.n_rejected += 1

        if t >= t_end:
            break
        dt = min(dt_next, cap)
        if adaptive and dt < cfg.dt_min:
            traj.events.append(Event(EVENT_STEP_FLOOR, t, min_pairwise_distance(state)[1], rec.min_dist))
            traj.status = STATUS_STEP_FLOOR
            break

    return traj
