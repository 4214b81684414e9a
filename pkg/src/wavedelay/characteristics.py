"""Exact simulator for the delayed-feedback string via d'Alembert's formula.

The displacement is ``v(t, x) = alpha(ct + x) - alpha(ct - x)``. The trace
density ``alpha'`` is stored as cell values on a uniform lattice of size
``dx = 2L/N`` starting at ``-L``. Every shift in the boundary recursions is a
whole number of cells, so extending the trace is exact array arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from wavedelay import kernels
from wavedelay.model import DelaySchedule, ScheduleError


class TraceRangeError(ValueError):
    """A query needs the trace beyond its current extension frontier."""


@dataclass(frozen=True)
class TraceDensity:
    L: float
    n: int  # cells per 2L
    values: np.ndarray
    alpha_anchor: float  # alpha(-L)

    @property
    def cell_size(self):
        return 2 * self.L / self.n

    @property
    def x_max(self):
        return -self.L + len(self.values) * self.cell_size

    @cached_property
    def _prefix(self):
        out = np.zeros(len(self.values) + 1)
        np.cumsum(self.values * self.cell_size, out=out[1:])
        return out

    def _cell(self, y):
        y = np.asarray(y, dtype=float)
        k = np.floor((y + self.L) / self.cell_size).astype(np.int64)
        bad = (k < 0) | (y > self.x_max)
        if np.any(bad):
            raise TraceRangeError(
                f"trace covers [{-self.L}, {self.x_max}); query at {np.asarray(y)[bad].ravel()[:3]}"
            )
        return np.minimum(k, len(self.values) - 1)

    def density(self, y):
        """``alpha'(y)``, right-continuous at cell edges (left limit at the frontier)."""
        return self.values[self._cell(y)]

    def alpha(self, y):
        """``alpha(y)``: piecewise linear, continuous by construction."""
        y = np.asarray(y, dtype=float)
        k = self._cell(y)
        edge = -self.L + k * self.cell_size
        return self.alpha_anchor + self._prefix[k] + (y - edge) * self.values[k]

    def refined(self, factor):
        """Same piecewise-constant density on a lattice ``factor`` times finer."""
        return TraceDensity(self.L, self.n * factor, np.repeat(self.values, factor), self.alpha_anchor)

    def square_integral(self, a, b):
        """Exact ``int_a^b alpha'(x)^2 dx`` for the piecewise-constant density."""
        if a < -self.L or b > self.x_max * (1 + 1e-15) + 1e-15:
            raise TraceRangeError(f"trace covers [{-self.L}, {self.x_max}); need [{a}, {b}]")
        dx = self.cell_size
        ka = int(math.floor((a + self.L) / dx))
        kb = int(math.floor((b + self.L) / dx))
        v = self.values
        if ka == kb:
            return (b - a) * v[ka] ** 2
        head = (-self.L + (ka + 1) * dx - a) * v[ka] ** 2
        mid = dx * float(np.dot(v[ka + 1:kb], v[ka + 1:kb]))
        tail = (b - (-self.L + kb * dx)) * v[kb] ** 2 if kb < len(v) else 0.0
        return head + mid + tail


def init_trace(cfg, init, N):
    """Trace density on ``[-L, L)`` from the initial state.

    Right of 0 the density is ``y0'/2 + y1/(2c)``, left of 0 it is
    ``y0'(-x)/2 - y1(-x)/(2c)``. The ``y0'`` part is taken as exact cell
    averages (node differences of ``y0``), so ``v(0, x) = y0(x)`` holds at
    every node; ``y1`` is sampled at cell midpoints, so ``v_t(0, x) = y1(x)``
    holds at every midpoint.
    """
    if isinstance(N, bool) or int(N) != N or N < 2 or N % 2:
        raise ValueError(f"grid resolution N must be an even integer >= 2, got {N}")
    N = int(N)
    init.check(cfg.L)
    L, c = cfg.L, cfg.c
    dx = 2 * L / N
    half = N // 2
    nodes = np.arange(half + 1) * dx  # 0 .. L
    nodes[-1] = L
    y0 = np.asarray(init.y0(nodes), dtype=float)
    mids = (np.arange(half) + 0.5) * dx
    y1 = np.asarray(init.y1(mids), dtype=float)
    slope = np.diff(y0) / dx
    right = 0.5 * slope + y1 / (2 * c)
    left = (0.5 * slope - y1 / (2 * c))[::-1]
    anchor = -0.5 * y0[-1] + dx * float(np.sum(y1)) / (2 * c)
    return TraceDensity(L=L, n=N, values=np.concatenate([left, right]), alpha_anchor=anchor)


def feedback_lags(cfg, schedule, n, start, stop):
    """Feedback delay in cells for cells ``start .. stop-1``.

    Cell ``i`` has left edge ``x = -L + i dx``; its delay is read at the
    boundary time ``(x - L)/c``, i.e. ``i - n`` in cell units.
    """
    dx = 2 * cfg.L / n
    s_cells, d_cells = schedule.lattice_cells(dx, cfg.c)
    tau = np.arange(start, stop, dtype=np.int64) - n
    idx = np.clip(np.searchsorted(s_cells, tau, side="right") - 1, 0, None)
    lag = d_cells[idx]
    onset = (1 + 2 * cfg.iota) * n
    active = np.arange(start, stop) >= onset
    if np.any(active & (lag != 0) & (lag < n)):
        raise ScheduleError("feedback delays below 2L/c are not supported")
    return np.ascontiguousarray(lag, dtype=np.int64)


def extend_trace(trace, cfg, schedule, x_target):
    """Extend the density to the first segment boundary ``-L + 2mL >= x_target``.

    On ``[L, L + 4 iota L)`` the reflection ``a(x) = -a(x - 2L)`` applies,
    beyond it ``a(x) = -a(x-2L) + f a(x - c delta) - f a(x - 2L - c delta)``.
    """
    n = trace.n
    start = len(trace.values)
    if x_target <= trace.x_max:
        return trace
    if cfg.iota == 0 and cfg.f == 1.0:
        raise ValueError("undelayed feedback with f = 1 is singular")
    m = math.ceil((x_target + cfg.L) / (2 * cfg.L) - 1e-12)
    stop = m * n
    values = np.empty(stop)
    values[:start] = trace.values
    lag = feedback_lags(cfg, schedule, n, start, stop)
    kernels.extend_cells(values, start, stop, n, cfg.f, (1 + 2 * cfg.iota) * n, lag)
    return TraceDensity(trace.L, n, values, trace.alpha_anchor)


def evaluate_state(trace, cfg, t, x):
    """``(v, v_t, v_x)`` at (broadcast) times ``t`` and positions ``x`` in ``[0, L]``."""
    t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    if np.any(x < 0) or np.any(x > cfg.L) or np.any(t < 0):
        raise ValueError("states are defined for t >= 0 and 0 <= x <= L")
    p = cfg.c * t + x
    m = cfg.c * t - x
    v = trace.alpha(p) - trace.alpha(m)
    ap, am = trace.density(p), trace.density(m)
    return v, cfg.c * (ap - am), ap + am


def energy(trace, cfg, t):
    """``E(t) = int_{ct-L}^{ct+L} alpha'^2``, the string energy at time ``t``."""
    ct = cfg.c * t
    return trace.square_integral(ct - cfg.L, ct + cfg.L)


def energy_window(trace, cfg, t):
    """``E1(t) = sum_{j=0}^{4} E(t + 2jL/c)``."""
    return sum(energy(trace, cfg, t + j * cfg.period) for j in range(5))


@dataclass
class EnergyTrace:
    times: np.ndarray
    E: np.ndarray
    E1: np.ndarray
    h: float
    transient_periods: int = 0

    def rows(self):
        return zip(self.times.tolist(), self.E.tolist(), self.E1.tolist())


def energy_trace(trace, cfg, times):
    times = np.asarray(times, dtype=float)
    E = np.array([energy(trace, cfg, t) for t in times])
    E1 = np.array([energy_window(trace, cfg, t) for t in times])
    return EnergyTrace(times, E, E1, cfg.period, transient_periods=4 * cfg.iota)


@dataclass
class DecayFit:
    per_period_factor: float
    mu: float
    C1: float
    C2: float
    lambda_period: float
    samples: int
    status: str = "ok"

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("per_period_factor", "mu", "C1", "C2", "lambda_period", "samples", "status")}


def decay_fit(trace, discard=None, use="E1", stop=None):
    """Exponential decay constants from samples spaced by one period.

    Fits ``ln E1(t0 + jh)`` against ``j`` by least squares after dropping the
    first ``discard`` samples (default: the ``4 iota`` transient periods).
    ``C2`` is the smallest constant with ``E_j <= q^j C2 E_0`` on all samples,
    and ``C1 = C2 exp(h mu)`` converts it to the continuous-time bound.
    """
    vals = np.asarray(trace.E1 if use == "E1" else trace.E, dtype=float)
    times = np.asarray(trace.times, dtype=float)
    h = trace.h
    if len(times) > 1 and not np.allclose(np.diff(times), h, rtol=1e-9, atol=1e-12):
        raise ValueError("decay_fit needs samples spaced by exactly one period 2L/c")
    if discard is None:
        discard = trace.transient_periods
    sel = slice(discard, stop)
    j = np.arange(len(vals))[sel]
    y = vals[sel]
    if len(y) < 10:
        raise ValueError(f"decay_fit needs at least 10 samples after the transient, got {len(y)}")
    if np.all(vals == 0) or np.any(y <= 0):
        return DecayFit(0.0, math.inf, 0.0, 0.0, h, len(y), status="already_decayed")
    slope = float(np.polyfit(j, np.log(y), 1)[0])
    q = math.exp(slope)
    mu = -slope / h
    C2 = float(np.max(vals / (q ** np.arange(len(vals)) * vals[0])))
    return DecayFit(q, mu, C2 * math.exp(h * mu), C2, h, len(y),
                    status="ok" if q < 1 else "no_decay")


def envelope_constant(values, rate):
    """Smallest ``C`` with ``values[j] <= C rate^j values[0]`` for all ``j``."""
    values = np.asarray(values, dtype=float)
    return float(np.max(values / (rate ** np.arange(len(values)) * values[0])))


@dataclass
class CharacteristicsRun:
    cfg: object
    schedule: DelaySchedule
    trace: TraceDensity
    solver: str = field(default="characteristics")

    def state(self, t, x):
        return evaluate_state(self.trace, self.cfg, t, x)

    def sample(self, t, x):
        return self.state(t, x)[0]

    def energy(self, t):
        return energy(self.trace, self.cfg, t)

    def energy_trace(self, periods, t0=0.0):
        return energy_trace(self.trace, self.cfg, t0 + self.cfg.period * np.arange(periods + 1))


def simulate(cfg, schedule, init, N, t_end, window=True):
    """Initialize and extend the trace so that ``E1`` (or ``E``) is defined up to ``t_end``."""
    trace = init_trace(cfg, init, N)
    reach = cfg.c * t_end + (9 if window else 1) * cfg.L
    return CharacteristicsRun(cfg, schedule, extend_trace(trace, cfg, schedule, reach))


def boundary_residuals(run, times):
    """Max Dirichlet residual ``|v(t, 0)|`` and delayed-feedback residual at ``x = L``.

    The feedback residual ``|c v_x(t, L) - f v_t(t - delta(t), L)|`` is taken
    over the given times past the onset; before it, ``|v_x(t, L)|``.
    """
    cfg = run.cfg
    times = np.asarray(times, dtype=float)
    v0 = run.state(times, 0.0)[0]
    _, _, vx = run.state(times, cfg.L)
    post = times > cfg.onset
    res = np.abs(vx[~post]) if np.any(~post) else np.zeros(0)
    if np.any(post):
        tp = times[post]
        delayed = tp - run.schedule.delay_at(tp)
        _, vt_d, _ = run.state(delayed, cfg.L)
        res = np.concatenate([res, np.abs(cfg.c * vx[post] - cfg.f * vt_d)])
    return float(np.max(np.abs(v0))), float(np.max(res)) if res.size else 0.0
