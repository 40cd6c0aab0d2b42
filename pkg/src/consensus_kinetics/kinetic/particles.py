"""Interacting-particle Monte Carlo of the kinetic equation.

Each agent drifts toward the current ensemble mean at rate alpha and, at
the event times of its own rate-beta Poisson clock, jumps to
(1-q)x + q X(t)(1+delta).

Per step the drift is applied first, exactly (the ensemble mean does not move
under the drift, so x -> s + (x - s) e^{-alpha dt}), followed by every jump
whose time falls in the step; m jumps in one step compose to
Y + (1-q)^m (x - Y) with Y the premium-adjusted index at mid-step. The jump
clocks are drawn up front and each step touches only its jumpers. The
common drift is an affine map shared by all agents and is kept symbolically
as x = A*r + B over stored coordinates r.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidTimeStep
from .distribution import ParticleEnsemble
from .params import KineticParams
from .paths import ForcingPath, as_time_grid

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ParticleRun:
    times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    mean_se: np.ndarray
    variance_se: np.ndarray
    final: ParticleEnsemble
    snapshots: list[ParticleEnsemble] = field(default_factory=list)


def jump_schedule(n_particles: int, n_steps: int, dt: float, rate: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Step index (1-based) and particle index of every jump, sorted by step.

    Exponential gaps are drawn in rounds of one variate per particle from a
    single Philox stream, so the schedule depends only on the arguments and
    not on how the per-step arithmetic is scheduled. A particle appears once
    per jump, possibly several times in one step.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    horizon = n_steps * dt
    clock = np.zeros(n_particles)
    steps, who = [], []
    ids = np.arange(n_particles)
    while True:
        clock += rng.exponential(1.0 / rate, n_particles)
        hit = clock < horizon
        if not hit.any():
            break
        steps.append(np.minimum(np.floor(clock[hit] / dt).astype(np.int64) + 1, n_steps))
        who.append(ids[hit])
    if not steps:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    steps_a = np.concatenate(steps)
    who_a = np.concatenate(who)
    order = np.argsort(steps_a, kind="stable")
    return steps_a[order], who_a[order]


def particle_simulate(
    params: KineticParams,
    X: ForcingPath,
    ensemble0: ParticleEnsemble,
    t_grid,
    seed: int = 0,
    record_every: int = 1,
    keep_snapshots: bool = False,
) -> ParticleRun:
    """Simulate on the uniform step grid ``t_grid`` and record moments.

    Records are taken at t_grid[0] and every ``record_every`` steps after it
    (plus the final step). Mean and variance are the ensemble's; their
    Monte Carlo standard errors are sd/sqrt(N) and sqrt((m4 - V^2)/N).
    """
    t = as_time_grid(t_grid)
    if t.size < 2:
        raise InvalidTimeStep("need at least one time step")
    dt = float(t[1] - t[0])
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0.0):
        raise InvalidTimeStep("particle simulation needs a uniform time grid")
    if params.beta * dt > 0.1:
        log.warning("beta*dt = %.3g > 0.1; jump splitting error may be visible", params.beta * dt)
    if record_every < 1:
        raise InvalidTimeStep("record_every must be >= 1")
    X.check_covers(t)

    n = len(ensemble0)
    n_steps = t.size - 1
    jump_steps, jump_who = jump_schedule(n, n_steps, dt, params.beta, seed)
    bounds = np.searchsorted(jump_steps, np.arange(1, n_steps + 2), side="left")
    targets = X(t[:-1] + 0.5 * dt) * (1.0 + params.delta)

    r = ensemble0.positions.copy()
    A, B = 1.0, 0.0
    sum_r = float(r.sum())
    keep = math.exp(-params.alpha * dt)
    shrink = 1.0 - params.q

    rec_idx = sorted(set(range(0, n_steps + 1, record_every)) | {n_steps})
    rec_set = set(rec_idx)
    out_mean, out_var, out_mse, out_vse, snaps = [], [], [], [], []

    def record(step: int) -> None:
        x = A * r + B
        m = float(x.mean())
        c = x - m
        c2 = c * c
        v = float(c2.mean())
        m4 = float(np.mean(c2 * c2))
        out_mean.append(m)
        out_var.append(v)
        out_mse.append(math.sqrt(v / n))
        out_vse.append(math.sqrt(max(m4 - v * v, 0.0) / n))
        if keep_snapshots:
            snaps.append(ParticleEnsemble(np.maximum(x, 0.0), float(t[step]), seed))

    record(0)
    for step in range(1, n_steps + 1):
        s = A * sum_r / n + B
        A, B = keep * A, keep * B + (1.0 - keep) * s
        lo, hi = bounds[step - 1], bounds[step]
        if hi > lo:
            idx, m = np.unique(jump_who[lo:hi], return_counts=True)
            y = targets[step - 1]
            x_old = A * r[idx] + B
            r_new = (y + shrink**m * (x_old - y) - B) / A
            sum_r += float(np.sum(r_new - r[idx]))
            r[idx] = r_new
        if step in rec_set:
            record(step)
        if step in rec_set or A < 0.5:
            # fold the affine map back into the stored coordinates
            r = A * r + B
            A, B = 1.0, 0.0
            sum_r = float(r.sum())

    final = ParticleEnsemble(np.maximum(r * A + B, 0.0), float(t[-1]), seed)
    return ParticleRun(
        times=t[rec_idx],
        mean=np.array(out_mean),
        variance=np.array(out_var),
        mean_se=np.array(out_mse),
        variance_se=np.array(out_vse),
        final=final,
        snapshots=snaps,
    )
