"""Classical stochastic models of the engine load and the autonomous clock.

The load of an absorption engine performs a biased random walk on its ladder
with rates gamma_up and gamma_down. A clock is the same walk on a finite
ladder whose top level emits a tick and resets the walker to the ground level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .thermo import diagonal_ergotropy

BATCH = 16384  # paths per independent RNG stream


@dataclass(frozen=True)
class WalkParams:
    """Rates of the load walk; ``d`` is the number of ladder levels (None: unbounded)."""

    gamma_up: float
    gamma_down: float
    d: int | None = None
    omega_w: float = 1.0

    def __post_init__(self):
        if not (self.gamma_up > 0 and self.gamma_down >= 0):
            raise ValueError("walk needs gamma_up > 0 and gamma_down >= 0")
        if self.d is not None and self.d < 2:
            raise ValueError("a finite ladder needs at least 2 levels")
        if not self.omega_w > 0:
            raise ValueError("level spacing must be positive")

    @property
    def drift(self) -> float:
        return self.gamma_up - self.gamma_down

    @property
    def total_rate(self) -> float:
        return self.gamma_up + self.gamma_down

    @property
    def bias(self) -> float:
        """-beta_v omega_w = ln(gamma_up / gamma_down); positive for population inversion."""
        if self.gamma_down == 0:
            return math.inf
        return math.log(self.gamma_up / self.gamma_down)


@dataclass(frozen=True)
class ClockThermo:
    q_h: float
    q_c: float
    entropy_per_tick: float


@dataclass
class TickRecord:
    tick_times: np.ndarray
    waiting_times: np.ndarray
    t_tick: float
    dt_tick: float
    nu: float
    accuracy: float
    seed: int
    completed: bool = True
    n_requested: int = 0

    @property
    def n_ticks(self) -> int:
        return len(self.waiting_times)

    def standard_errors(self):
        """(se of t_tick, se of dt_tick) from the sample moments."""
        w = self.waiting_times
        n = len(w)
        se_mean = float(np.std(w, ddof=1) / math.sqrt(n))
        m4 = float(np.mean((w - w.mean()) ** 4))
        var = float(np.var(w, ddof=1))
        se_var = math.sqrt(max(m4 - var**2, 0.0) / n)
        se_std = se_var / (2.0 * math.sqrt(var)) if var > 0 else 0.0
        return se_mean, se_std


def _gibbs_excited(omega, t):
    """Excited-state population of a qubit at temperature t."""
    return 1.0 / (1.0 + math.exp(omega / t))


def walk_params_from_machine(omega_c, omega_h, t_c, t_h, gamma_eff, d=None) -> WalkParams:
    """Load rates after eliminating two fast qubits held at their bath temperatures.

    gamma_up = gamma_eff p(0_c) p(1_h) and gamma_down = gamma_eff p(1_c) p(0_h).
    """
    if not (t_c > 0 and t_h > 0):
        raise ValueError("temperatures must be positive")
    if not gamma_eff > 0:
        raise ValueError("gamma_eff must be positive")
    if not 0 < omega_c < omega_h:
        raise ValueError(f"need 0 < omega_c < omega_h, got {omega_c}, {omega_h}")
    pc1 = _gibbs_excited(omega_c, t_c)
    ph1 = _gibbs_excited(omega_h, t_h)
    up = gamma_eff * (1.0 - pc1) * ph1
    down = gamma_eff * pc1 * (1.0 - ph1)
    return WalkParams(up, down, d, omega_h - omega_c)


def beta_v_omega_w(omega_c, omega_h, t_c, t_h) -> float:
    """beta_v omega_w = beta_h omega_h - beta_c omega_c; negative in the engine regime."""
    return omega_h / t_h - omega_c / t_c


def _child_seeds(seed, n_batches):
    return np.random.SeedSequence(seed).spawn(n_batches)


def _walk_batch(rng, p: WalkParams, times, n_paths, n0):
    lam = p.total_rate
    p_up = p.gamma_up / lam
    top = None if p.d is None else p.d - 1
    n = np.full(n_paths, n0, dtype=np.int64)
    out = np.empty((len(times), n_paths), dtype=np.int64)
    t_prev = 0.0
    for k, t in enumerate(times):
        # uniformization: Poisson clock at the total rate, self-loops where a move is blocked
        counts = rng.poisson(lam * (t - t_prev), size=n_paths)
        for j in range(int(counts.max(initial=0))):
            active = counts > j
            up = rng.random(n_paths) < p_up
            step = np.where(up, 1, -1)
            step[~active] = 0
            step[(n == 0) & (step < 0)] = 0
            if top is not None:
                step[(n == top) & (step > 0)] = 0
            n += step
        out[k] = n
        t_prev = t
    return out


def simulate_walk(p: WalkParams, times, seed: int, n_paths: int = 100_000, n0: int = 0):
    """Levels of ``n_paths`` independent walkers at each time in ``times``.

    Reflecting boundary at level 0 (exit rate gamma_up only) and, for a finite
    ladder, at the top level. Returns an int array of shape (len(times), n_paths).
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times <= 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be positive and non-decreasing")
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    if n0 < 0 or (p.d is not None and n0 >= p.d):
        raise ValueError("initial level outside the ladder")
    n_batches = -(-n_paths // BATCH)
    parts = []
    for b, ss in enumerate(_child_seeds(seed, n_batches)):
        size = min(BATCH, n_paths - b * BATCH)
        parts.append(_walk_batch(np.random.default_rng(ss), p, times, size, n0))
    return np.concatenate(parts, axis=1)


def walk_distribution(p: WalkParams, t: float, n_levels: int, n0: int = 0) -> np.ndarray:
    """Exact level distribution at time t on a ladder truncated to n_levels states."""
    if p.d is not None:
        n_levels = p.d
    if n0 >= n_levels:
        raise ValueError("initial level outside the truncated ladder")
    up = np.full(n_levels - 1, p.gamma_up)
    down = np.full(n_levels - 1, p.gamma_down)
    out_rate = np.zeros(n_levels)
    out_rate[:-1] += up
    out_rate[1:] += down
    # column-stochastic generator: q[i+1, i] = up, q[i, i+1] = down
    q = scipy.sparse.diags([up, -out_rate, down], [-1, 0, 1], format="csc")
    p0 = np.zeros(n_levels)
    p0[n0] = 1.0
    return scipy.sparse.linalg.expm_multiply(q * t, p0)


def gaussian_asymptotics(p: WalkParams, t: float):
    """(mean, variance, valid) of the load level at time t for large t.

    ``valid`` flags mean >= 3 standard deviations, where the walker rarely
    feels the reflecting ground level.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    mean = p.drift * t
    var = p.total_rate * t
    return mean, var, bool(mean >= 3.0 * math.sqrt(var))


def engine_energy_ratio(omega_c, omega_h) -> float:
    if not 0 < omega_c < omega_h:
        raise ValueError(f"need 0 < omega_c < omega_h, got {omega_c}, {omega_h}")
    return 1.0 - omega_c / omega_h


def n_cycle_efficiency(n_cycles, beta_v_omega_w, ratio) -> float:
    """Efficiency of ergotropy delivery after N cycles of a fluctuating load.

    Tends to ``ratio`` as N grows; may be negative for small N.
    """
    if n_cycles < 1:
        raise ValueError("need at least one cycle")
    if not beta_v_omega_w < 0:
        raise ValueError("beta_v omega_w must be negative (engine regime)")
    b = -beta_v_omega_w
    coth = 1.0 / math.tanh(b / 2.0) if b < 700 else 1.0
    return (1.0 - math.sqrt(2.0 * coth / (math.pi * n_cycles))) * ratio


def ergotropy_rate_mc(p: WalkParams, n_cycles: int, seed: int, n_paths: int = 100_000, half_width: int = 10):
    """Monte Carlo ergotropy gain per cycle at cycle N, by a central difference.

    The walk is sampled at t_{N-K} and t_{N+K} on the same paths; the ergotropy
    of each empirical ladder distribution is computed exactly. Returns dW/dN in
    units of the level spacing.
    """
    if p.drift <= 0:
        raise ValueError("walk has no upward drift")
    k = min(half_width, n_cycles - 1)
    dt = 1.0 / p.drift
    levels = simulate_walk(p, [(n_cycles - k) * dt, (n_cycles + k) * dt], seed, n_paths)
    w = []
    for row in levels:
        counts = np.bincount(row)
        prob = counts / counts.sum()
        w.append(diagonal_ergotropy(prob, np.arange(len(prob), dtype=float)))
    return (w[1] - w[0]) / (2 * k)


def clock_thermo(d, omega_c, omega_h, t_c, t_h) -> ClockThermo:
    if d < 2:
        raise ValueError("clock ladder needs at least 2 levels")
    if not 0 < omega_c < omega_h:
        raise ValueError(f"need 0 < omega_c < omega_h, got {omega_c}, {omega_h}")
    if not (t_c > 0 and t_h > 0):
        raise ValueError("temperatures must be positive")
    q_c = (d - 1) * omega_c
    q_h = (d - 1) * omega_h
    return ClockThermo(q_h, q_c, q_c / t_c - q_h / t_h)


def clock_accuracy_formula(d, entropy_per_tick) -> float:
    if d < 2:
        raise ValueError("clock ladder needs at least 2 levels")
    if not entropy_per_tick > 0:
        raise ValueError("entropy per tick must be positive")
    return d * math.tanh(entropy_per_tick / (2.0 * d))


def clock_resolution_formula(d, p: WalkParams) -> float:
    if not p.drift > 0:
        raise ValueError("clock does not tick: gamma_up <= gamma_down")
    return p.drift / d


def first_passage_moments(p: WalkParams, decay_rate=None):
    """Exact mean and variance of the time to climb from level 0 to level d-1.

    Solves the backward equations of the absorbed chain; an optional finite
    decay rate adds an exponential emission delay.
    """
    if p.d is None or p.d < 2:
        raise ValueError("first passage needs a finite ladder")
    m = p.d - 1  # transient levels 0..d-2
    # tridiagonal generator of the absorbed chain in banded storage
    ab = np.zeros((3, m))
    ab[0, 1:] = -p.gamma_up
    ab[1, :] = p.gamma_up + p.gamma_down
    ab[1, 0] = p.gamma_up
    ab[2, :-1] = -p.gamma_down
    t1 = scipy.linalg.solve_banded((1, 1), ab, np.ones(m))
    t2 = 2.0 * scipy.linalg.solve_banded((1, 1), ab, t1)
    mean = float(t1[0])
    var = float(t2[0] - t1[0] ** 2)
    if decay_rate is not None:
        mean += 1.0 / decay_rate
        var += 1.0 / decay_rate**2
    return mean, var


def _clock_batch(rng, p: WalkParams, n, decay_rate, max_time):
    top = p.d - 1
    level = np.zeros(n, dtype=np.int64)
    t = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    while alive.any():
        idx = np.flatnonzero(alive)
        lv = level[idx]
        rate = np.where(lv == 0, p.gamma_up, p.gamma_up + p.gamma_down)
        t[idx] += rng.exponential(1.0, size=len(idx)) / rate
        up = rng.random(len(idx)) * rate < p.gamma_up
        level[idx] = lv + np.where(up, 1, -1)
        done = level[idx] == top
        alive[idx[done]] = False
        late = t[idx] > max_time
        alive[idx[late & ~done]] = False
        if late.any():
            t[idx[late & ~done]] = np.nan
    if decay_rate is not None:
        t += rng.exponential(1.0 / decay_rate, size=n)
    return t


def simulate_clock(p: WalkParams, n_ticks: int, seed: int, decay_rate=None, max_time=None) -> TickRecord:
    """Tick sequence of a clock whose walker resets to level 0 after reaching the top.

    Waiting times are independent first-passage times 0 -> d-1. A waiting time
    exceeding ``max_time`` (default 1e3 x the exact mean) marks the run as not
    completed; such ticks are dropped from the statistics.
    """
    if p.d is None or p.d < 3:
        raise ValueError("clock needs a finite ladder with d >= 3")
    if n_ticks < 2:
        raise ValueError("need at least 2 ticks")
    if max_time is None:
        max_time = 1e3 * first_passage_moments(p, decay_rate)[0]
    n_batches = -(-n_ticks // BATCH)
    parts = []
    for b, ss in enumerate(_child_seeds(seed, n_batches)):
        size = min(BATCH, n_ticks - b * BATCH)
        parts.append(_clock_batch(np.random.default_rng(ss), p, size, decay_rate, max_time))
    w = np.concatenate(parts)
    completed = bool(np.all(np.isfinite(w)))
    w = w[np.isfinite(w)]
    if len(w) < 2:
        raise RuntimeError("clock produced fewer than 2 ticks within the time limit")
    mean = float(w.mean())
    std = float(w.std(ddof=1))
    return TickRecord(
        tick_times=np.cumsum(w),
        waiting_times=w,
        t_tick=mean,
        dt_tick=std,
        nu=1.0 / mean,
        accuracy=(mean / std) ** 2,
        seed=int(seed),
        completed=completed,
        n_requested=int(n_ticks),
    )


def lag1_autocorrelation(x) -> float:
    x = np.asarray(x, dtype=float) - np.mean(x)
    return float(np.dot(x[:-1], x[1:]) / np.dot(x, x))
