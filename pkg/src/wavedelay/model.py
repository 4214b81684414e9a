"""String parameters, delay schedules and initial states."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class ScheduleError(ValueError):
    """A delay schedule violates its mode or lattice constraints."""


@dataclass(frozen=True)
class StringConfig:
    """String of length ``L``, wave speed ``c``, feedback gain ``f``.

    Feedback at ``x = L`` starts at ``4 iota L / c``; before that the end is
    a homogeneous Neumann boundary.
    """

    L: float = 1.0
    c: float = 1.0
    f: float = 0.0
    iota: int = 1

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"string length L must be positive, got {self.L}")
        if not self.c > 0:
            raise ValueError(f"wave speed c must be positive, got {self.c}")
        if isinstance(self.iota, bool) or int(self.iota) != self.iota or self.iota < 0:
            raise ValueError(f"iota must be a non-negative integer, got {self.iota}")
        object.__setattr__(self, "iota", int(self.iota))
        object.__setattr__(self, "f", float(self.f))

    @property
    def period(self):
        """Time step ``h = 2L/c`` between consecutive reflections."""
        return 2 * self.L / self.c

    @property
    def onset(self):
        return 4 * self.iota * self.L / self.c


@dataclass(frozen=True)
class DelaySchedule:
    """Piecewise-constant delay given as ``(start_time, delay)`` segments."""

    mode: str
    segments: tuple

    def __post_init__(self):
        if self.mode not in ("constant", "switching", "lattice"):
            raise ScheduleError(f"unknown schedule mode {self.mode!r}")
        segs = tuple((float(t), float(d)) for t, d in self.segments)
        if not segs:
            raise ScheduleError("schedule needs at least one segment")
        if segs[0][0] != 0.0:
            raise ScheduleError("first segment must start at t = 0")
        starts = [t for t, _ in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ScheduleError("switch times must be strictly increasing")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, cfg):
        return cls("constant", ((0.0, 4 * cfg.iota * cfg.L / cfg.c),))

    @classmethod
    def switching(cls, cfg, switches):
        if cfg.iota != 2:
            raise ScheduleError("switching between 4L/c and 8L/c requires iota = 2")
        allowed = (4 * cfg.L / cfg.c, 8 * cfg.L / cfg.c)
        segs = []
        for t, d in switches:
            match = [a for a in allowed if math.isclose(d, a, rel_tol=1e-12)]
            if not match:
                raise ScheduleError(f"switching delay {d} is neither 4L/c nor 8L/c")
            segs.append((t, match[0]))
        return cls("switching", tuple(segs))

    @classmethod
    def lattice(cls, cfg, switches):
        lo, hi = 2 * cfg.L / cfg.c, 4 * cfg.iota * cfg.L / cfg.c
        for _, d in switches:
            if not (lo * (1 - 1e-12) <= d <= hi * (1 + 1e-12)):
                raise ScheduleError(f"delay {d} outside [2L/c, 4 iota L/c] = [{lo}, {hi}]")
        return cls("lattice", tuple(switches))

    @classmethod
    def random_switching(cls, cfg, t_end, mean_dwell, seed):
        """Alternating 4L/c / 8L/c delays with exponential dwell times snapped to ``2L/c``."""
        rng = np.random.default_rng(seed)
        h = cfg.period
        values = (4 * cfg.L / cfg.c, 8 * cfg.L / cfg.c)
        k = int(rng.integers(2))
        t = 0.0
        switches = []
        n = 0
        while t <= t_end:
            switches.append((n * h, values[k]))
            dwell = max(1, int(round(rng.exponential(mean_dwell) / h)))
            n += dwell
            t = n * h
            k = 1 - k
        return cls.switching(cfg, switches)

    @property
    def max_delay(self):
        return max(d for _, d in self.segments)

    def delay_at(self, t):
        starts = np.array([s for s, _ in self.segments])
        vals = np.array([d for _, d in self.segments])
        idx = np.searchsorted(starts, np.asarray(t, dtype=float), side="right") - 1
        return vals[np.clip(idx, 0, None)]

    def lattice_cells(self, dx, c):
        """Switch times and delays as whole numbers of cells ``c t / dx``.

        Raises ``ScheduleError`` if any of them is off the cell lattice.
        """
        starts, delays = [], []
        for t, d in self.segments:
            for name, val in (("switch time", t), ("delay", d)):
                q = c * val / dx
                if abs(q - round(q)) > 1e-9 * max(1.0, abs(q)):
                    raise ScheduleError(
                        f"{name} {val} is not on the lattice: c*{name}/dx = {q} must be an integer "
                        f"(cell size dx = {dx})"
                    )
            starts.append(int(round(c * t / dx)))
            delays.append(int(round(c * d / dx)))
        return np.array(starts, dtype=np.int64), np.array(delays, dtype=np.int64)


@dataclass(frozen=True)
class InitialState:
    """Initial displacement ``y0`` (with ``y0(0) = 0``) and velocity ``y1`` on ``[0, L]``."""

    y0: Callable
    y1: Callable
    name: str = "custom"

    @classmethod
    def from_samples(cls, x, y0, y1):
        x = np.asarray(x, dtype=float)
        y0 = np.asarray(y0, dtype=float)
        y1 = np.asarray(y1, dtype=float)
        return cls(lambda s: np.interp(s, x, y0), lambda s: np.interp(s, x, y1), "samples")

    def check(self, L, tol=1e-12):
        scale = max(1.0, float(np.max(np.abs(self.y0(np.linspace(0, L, 33))))))
        v0 = float(self.y0(np.array([0.0]))[0])
        if abs(v0) > tol * scale:
            raise ValueError(f"initial displacement must vanish at x = 0, got y0(0) = {v0}")


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def sine_state(L, amplitude=1.0):
    """``y0 = A sin(pi x / 2L)``, ``y1 = 0``."""
    return InitialState(lambda x: amplitude * np.sin(np.pi * np.asarray(x) / (2 * L)), _zero, "sine")


def pluck_state(L, amplitude=1.0):
    """Triangular displacement peaking at ``L/2``, at rest."""

    def y0(x):
        x = np.asarray(x, dtype=float)
        return amplitude * np.where(x <= L / 2, 2 * x / L, 2 * (L - x) / L)

    return InitialState(y0, _zero, "pluck")


def random_state(L, c=1.0, seed=0, modes=8):
    """Band-limited Fourier sum of ``sin((k - 1/2) pi x / L)`` modes with random weights."""
    rng = np.random.default_rng(seed)
    k = np.arange(1, modes + 1)
    a = rng.normal(size=modes) / k
    b = c * rng.normal(size=modes) / k

    def basis(x):
        x = np.asarray(x, dtype=float)
        return np.sin(np.multiply.outer(x, (k - 0.5) * np.pi / L))

    return InitialState(lambda x: basis(x) @ a, lambda x: basis(x) @ b, "random")


PRESETS = {"sine": sine_state, "pluck": pluck_state, "random": random_state}


def preset_state(name, L, c=1.0, **params):
    if name not in PRESETS:
        raise ValueError(f"unknown initial preset {name!r}; choose from {sorted(PRESETS)}")
    if name == "random":
        return random_state(L, c=c, **params)
    return PRESETS[name](L, **params)
