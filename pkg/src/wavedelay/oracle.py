"""Independent checks of the characteristics simulator.

``fd_simulate`` discretizes the same boundary value problem with a leapfrog
scheme and a ghost-point Neumann condition fed from a ring buffer of past
boundary velocities. ``weak_residual`` tests any solution against smooth
bump functions supported inside the space-time domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from wavedelay import kernels
from wavedelay.characteristics import CharacteristicsRun


@dataclass(frozen=True)
class FDGrid:
    """Spatial nodes ``nx`` on ``[0, L]`` and a CFL upper bound.

    The time step is ``dt = (L/c)/M`` with the smallest integer ``M`` keeping
    ``c dt / dx <= cfl``, so every multiple of ``L/c`` is a whole step.
    """

    nx: int = 2001
    cfl: float = 0.999

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1] for a stable leapfrog scheme, got {self.cfl}")
        if self.nx < 3:
            raise ValueError("need at least 3 spatial nodes")

    def steps_per_unit(self):
        return math.ceil((self.nx - 1) / self.cfl - 1e-9)

    def spacing(self, cfg):
        dx = cfg.L / (self.nx - 1)
        dt = cfg.L / (cfg.c * self.steps_per_unit())
        return dx, dt

    def history_depth(self, cfg, schedule):
        _, dt = self.spacing(cfg)
        return math.ceil(schedule.max_delay / dt - 1e-9) + 2


@dataclass
class FDRun:
    cfg: object
    schedule: object
    x: np.ndarray
    times: np.ndarray
    u: np.ndarray
    vt: np.ndarray
    E: np.ndarray
    dt: float
    solver: str = field(default="fd")

    def _index(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)) + 0.5 * self.dt:
            raise ValueError(f"time {t} was not recorded")
        return i

    def sample(self, t, x):
        return np.interp(x, self.x, self.u[self._index(t)])

    def energy(self, t):
        return float(self.E[self._index(t)])

    def state(self, t, x):
        """``(v, v_t, v_x)`` interpolated linearly between recorded steps and nodes."""
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        pos = np.interp(t, self.times, np.arange(len(self.times)))
        i0 = np.clip(np.floor(pos).astype(int), 0, len(self.times) - 2)
        w = pos - i0
        dx = self.x[1] - self.x[0]
        k = np.clip(np.floor(x / dx).astype(int), 0, len(self.x) - 2)
        s = x / dx - k
        out = []
        for field_ in (self.u, self.vt):
            a = field_[i0, k] * (1 - s) + field_[i0, k + 1] * s
            b = field_[i0 + 1, k] * (1 - s) + field_[i0 + 1, k + 1] * s
            out.append(a * (1 - w) + b * w)
        ux0 = (self.u[i0, k + 1] - self.u[i0, k]) / dx
        ux1 = (self.u[i0 + 1, k + 1] - self.u[i0 + 1, k]) / dx
        return out[0], out[1], ux0 * (1 - w) + ux1 * w


def fd_energy(u, vt, dx, c):
    grad = np.diff(u) / dx
    kin = (vt / c) ** 2
    return 0.5 * (np.sum(grad**2) * dx + (np.sum(kin) - 0.5 * (kin[0] + kin[-1])) * dx)


def fd_simulate(cfg, schedule, init, grid, t_end, record_times=None):
    """Leapfrog solution recorded at ``record_times`` (default: every ``L/c``).

    Before ``4 iota L / c`` the end ``x = L`` is homogeneous Neumann; after it,
    ``v_x(t, L) = (f/c) v_t(t - delta(t), L)`` with the delayed velocity read
    from the boundary history (linear interpolation between steps).
    """
    dx, dt = grid.spacing(cfg)
    r = cfg.c * dt / dx
    x = np.linspace(0.0, cfg.L, grid.nx)
    if record_times is None:
        record_times = np.arange(0.0, t_end + 0.5 * cfg.L / cfg.c, cfg.L / cfg.c)
    steps = np.unique(np.rint(np.asarray(record_times, dtype=float) / dt).astype(np.int64))
    if steps.size and steps[-1] * dt > t_end * (1 + 1e-12) + dt:
        raise ValueError("record times beyond t_end")
    u0 = np.asarray(init.y0(x), dtype=float)
    u0[0] = 0.0
    y1 = np.asarray(init.y1(x), dtype=float)
    onset_step = int(round(cfg.onset / dt))
    if abs(onset_step * dt - cfg.onset) > 1e-9 * max(1.0, cfg.onset):
        raise ValueError("feedback onset is not a whole number of time steps")
    nsteps = int(steps[-1]) + 1 if steps.size else 1
    step_times = np.arange(nsteps + 1) * dt
    lag = np.zeros(nsteps + 1)
    active = np.arange(nsteps + 1) >= onset_step
    lag[active] = schedule.delay_at(step_times[active]) / dt
    lag = np.where(np.abs(lag - np.rint(lag)) < 1e-9, np.rint(lag), lag)

    g0 = cfg.f / cfg.c * y1[-1] if onset_step == 0 and lag[0] == 0 else 0.0
    lap = np.empty_like(u0)
    lap[1:-1] = u0[2:] - 2 * u0[1:-1] + u0[:-2]
    lap[-1] = 2 * u0[-2] - 2 * u0[-1] + 2 * dx * g0
    lap[0] = 0.0
    u1 = u0 + dt * y1 + 0.5 * r * r * lap
    u1[0] = 0.0

    depth = max(2, grid.history_depth(cfg, schedule))
    ring = np.zeros(depth)
    rec_pos = np.ascontiguousarray(steps[steps >= 1], dtype=np.int64)
    out_u = np.zeros((len(rec_pos), grid.nx))
    out_vt = np.zeros((len(rec_pos), grid.nx))
    kernels.leapfrog(u0, u1, r * r, r * cfg.f, r * r * 2 * dx * cfg.f / cfg.c, dt, onset_step,
                     lag, ring, float(y1[-1]), nsteps, rec_pos, out_u, out_vt)
    if steps.size and steps[0] == 0:
        out_u = np.vstack([u0[None, :], out_u])
        out_vt = np.vstack([y1[None, :], out_vt])
    E = np.array([fd_energy(a, b, dx, cfg.c) for a, b in zip(out_u, out_vt)])
    return FDRun(cfg, schedule, x, steps * dt, out_u, out_vt, E, dt)


@dataclass
class DiscrepancyReport:
    sup_v: float
    max_rel_energy: float
    times: np.ndarray
    rel_energy: np.ndarray


def compare_traces(reference, candidate, times=None, x=None, after=None):
    """Sup-norm displacement gap and relative energy gap between two runs.

    Energies are compared only at times ``>= after`` (default: feedback onset).
    """
    if reference.cfg != candidate.cfg or reference.schedule != candidate.schedule:
        raise ValueError("runs use different string configurations or delay schedules")
    if times is None:
        times = getattr(candidate, "times", None)
        if times is None:
            times = getattr(reference, "times")
    if x is None:
        x = getattr(candidate, "x", getattr(reference, "x", None))
        if x is None:
            x = np.linspace(0, reference.cfg.L, 201)
    after = reference.cfg.onset if after is None else after
    times = np.asarray(times, dtype=float)
    sup = 0.0
    rel = []
    for t in times:
        sup = max(sup, float(np.max(np.abs(reference.sample(t, x) - candidate.sample(t, x)))))
        if t >= after:
            e_ref = reference.energy(t)
            rel.append(abs(candidate.energy(t) - e_ref) / e_ref if e_ref > 0 else 0.0)
    rel = np.array(rel)
    return DiscrepancyReport(sup, float(rel.max()) if rel.size else 0.0, times, rel)


class BumpTestFunction:
    """``phi = B(s) B(y) P(s, y)`` on a rectangle, zero outside it.

    ``s`` and ``y`` map ``[t1, t2]`` and ``[x1, x2]`` to ``[-1, 1]``;
    ``B(s) = (1 - s^2)^3`` makes ``phi`` vanish with its first two
    derivatives on the rectangle boundary; ``P`` is a random quadratic.
    """

    def __init__(self, rect, coeffs):
        self.rect = tuple(float(v) for v in rect)
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def random(cls, rect, rng):
        return cls(rect, np.concatenate([[1.0], rng.uniform(-1, 1, 5)]) * rng.choice([-1, 1]))

    @classmethod
    def zero(cls, rect):
        return cls(rect, np.zeros(6))

    def grad(self, t, x):
        t1, t2, x1, x2 = self.rect
        s = (2 * t - t1 - t2) / (t2 - t1)
        y = (2 * x - x1 - x2) / (x2 - x1)
        inside = (np.abs(s) < 1) & (np.abs(y) < 1)
        a = self.coeffs
        P = a[0] + a[1] * s + a[2] * y + a[3] * s * y + a[4] * s * s + a[5] * y * y
        Ps = a[1] + a[3] * y + 2 * a[4] * s
        Py = a[2] + a[3] * s + 2 * a[5] * y
        Bs, By = (1 - s * s) ** 3, (1 - y * y) ** 3
        dBs, dBy = -6 * s * (1 - s * s) ** 2, -6 * y * (1 - y * y) ** 2
        phi_t = (dBs * By * P + Bs * By * Ps) * 2 / (t2 - t1)
        phi_x = (Bs * dBy * P + Bs * By * Py) * 2 / (x2 - x1)
        return np.where(inside, phi_t, 0.0), np.where(inside, phi_x, 0.0)


@dataclass
class Quadrature:
    t: np.ndarray
    x: np.ndarray
    w: np.ndarray
    cells: int


def _gauss_cells(edges, order):
    g, gw = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    pts = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g[None, :]
    wts = 0.5 * (hi - lo) * gw[None, :]
    return pts.ravel(), wts.ravel()


def _check_rect(rect, L):
    t1, t2, x1, x2 = rect
    if not (0 < t1 < t2 and 0 < x1 < x2 < L):
        raise ValueError(f"rectangle {rect} must lie strictly inside (0, inf) x (0, {L})")


def tensor_quadrature(rect, cells=(100, 100), order=4):
    """Composite Gauss-Legendre rule on a (t, x) rectangle."""
    t1, t2, x1, x2 = rect
    tp, tw = _gauss_cells(np.linspace(t1, t2, cells[0] + 1), order)
    xp, xw = _gauss_cells(np.linspace(x1, x2, cells[1] + 1), order)
    T, X = np.meshgrid(tp, xp, indexing="ij")
    return Quadrature(T.ravel(), X.ravel(), np.outer(tw, xw).ravel(), cells[0] * cells[1])


def characteristic_quadrature(rect, c, dx, origin, refine=1, order=8):
    """Composite Gauss rule in ``xi = ct + x``, ``eta = ct - x``, aligned to a lattice.

    Cell edges are the lattice ``origin + k dx`` (split ``refine`` times) in
    both coordinates, so a piecewise-constant trace density is constant on
    every quadrature cell. Only points inside the rectangle are kept.
    """
    t1, t2, x1, x2 = rect

    def edges(lo, hi):
        k0 = math.floor((lo - origin) / dx + 1e-9)
        k1 = math.ceil((hi - origin) / dx - 1e-9)
        return origin + np.arange(k0 * refine, k1 * refine + 1) * (dx / refine)

    ex = edges(c * t1 + x1, c * t2 + x2)
    ee = edges(c * t1 - x2, c * t2 - x1)
    xp, xw = _gauss_cells(ex, order)
    ep, ew = _gauss_cells(ee, order)
    XI, ETA = np.meshgrid(xp, ep, indexing="ij")
    W = np.outer(xw, ew) / (2 * c)
    T, X = (XI + ETA) / (2 * c), (XI - ETA) / 2
    keep = (T > t1) & (T < t2) & (X > x1) & (X < x2)
    return Quadrature(T[keep], X[keep], W[keep], (len(ex) - 1) * (len(ee) - 1))


def weak_form_residual(grad_v, phi, quad, c, v_grad=None):
    """Normalized ``|int v_t phi_t - c^2 int v_x phi_x|``; zero for a zero test function.

    ``v_grad`` optionally supplies ``(v_t, v_x)`` already evaluated at the
    quadrature points.
    """
    pt, px = phi.grad(quad.t, quad.x)
    if not (np.any(pt) or np.any(px)):
        return 0.0
    vt, vx = grad_v(quad.t, quad.x) if v_grad is None else v_grad
    a = vt * pt * quad.w
    b = c * c * vx * px * quad.w
    scale = np.sum(np.abs(a)) + np.sum(np.abs(b))
    return float(abs(np.sum(a) - np.sum(b)) / scale) if scale > 0 else 0.0


@dataclass
class WeakResidualReport:
    test_function_count: int
    max_residual: float
    residuals: np.ndarray
    cells: int


def weak_residual(grad_v, cfg, rect, n_test=20, seed=0, quad=None):
    """Weak-form residuals of a solution given by ``grad_v(t, x) -> (v_t, v_x)``."""
    _check_rect(rect, cfg.L)
    if quad is None:
        quad = tensor_quadrature(rect)
    rng = np.random.default_rng(seed)
    v_grad = grad_v(quad.t, quad.x)
    res = np.array([weak_form_residual(grad_v, BumpTestFunction.random(rect, rng), quad, cfg.c, v_grad)
                    for _ in range(n_test)])
    return WeakResidualReport(n_test, float(res.max()) if res.size else 0.0, res, quad.cells)


def weak_residual_run(run, rect, n_test=20, seed=0, refine=1, order=8):
    """Weak residual of a solver run, with a lattice-aligned rule for the exact solver."""
    _check_rect(rect, run.cfg.L)
    if isinstance(run, CharacteristicsRun):
        tr = run.trace
        quad = characteristic_quadrature(rect, run.cfg.c, tr.cell_size, -tr.L, refine, order)
    else:
        quad = tensor_quadrature(rect, cells=(100 * refine, 100 * refine))

    def grad_v(t, x):
        _, vt, vx = run.state(t, x)
        return vt, vx

    return weak_residual(grad_v, run.cfg, rect, n_test, seed, quad)
