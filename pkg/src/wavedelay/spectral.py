"""Characteristic polynomial of the delayed recursion and its root geometry.

The polynomial is ``p_f(t) = t^(2j+1) + t^(2j) - f t + f``. Its roots decide
whether the trace recursion with constant delay ``4 j L / c`` contracts.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

MARGINAL_BAND = 1e-12


class RootFindingError(RuntimeError):
    """Simultaneous iteration did not reach the requested residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class FeedbackPolynomial:
    j: int
    f: float
    coeffs: tuple  # highest degree first

    @property
    def degree(self):
        return 2 * self.j + 1

    def __call__(self, t):
        # grouped as t^2j (t + 1) + f (1 - t): exact at t = 1 and t = -1
        t = np.asarray(t)
        return t ** (2 * self.j) * (t + 1) + self.f * (1 - t)

    def derivative(self, t):
        return np.polyval(np.polyder(self.coeffs), t)


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residual_tol: float
    iterations: int = 0

    def __len__(self):
        return len(self.roots)

    @property
    def moduli(self):
        return np.abs(self.roots)

    def records(self):
        """Structured-text form: one ``{re, im, modulus}`` mapping per root."""
        return [{"re": float(z.real), "im": float(z.imag), "modulus": float(abs(z))} for z in self.roots]


@dataclass
class StabilityReport:
    max_modulus: float
    schur_stable: bool
    marginal: bool = False
    real_root_brackets: list = field(default_factory=list)
    code: str = "ok"
    checks: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "max_modulus": self.max_modulus,
            "schur_stable": self.schur_stable,
            "marginal": self.marginal,
            "real_root_brackets": [list(b) for b in self.real_root_brackets],
            "code": self.code,
            "checks": dict(self.checks),
        }


def build_char_poly(j, f):
    """Coefficients ``[1, 1, 0, ..., 0, -f, f]`` of ``p_f`` with half-degree ``j``."""
    if isinstance(j, bool) or not isinstance(j, (int, np.integer)) or j < 1:
        raise ValueError(f"half-degree j must be a positive integer, got {j!r}")
    j = int(j)
    f = float(f)
    coeffs = [1.0, 1.0] + [0.0] * (2 * j - 2) + [-f, f]
    return FeedbackPolynomial(j=j, f=f, coeffs=tuple(coeffs))


def _horner(coeffs, z):
    p = np.full_like(z, coeffs[0])
    dp = np.zeros_like(z)
    for a in coeffs[1:]:
        dp = dp * z + p
        p = p * z + a
    return p, dp


def _order(roots):
    mod = np.round(np.abs(roots), 12)
    return roots[np.lexsort((-roots.imag, -mod))]


def find_roots(poly, tol=1e-12, max_iter=500, radius=1.1):
    """All roots of a monic polynomial by Aberth-Ehrlich simultaneous iteration.

    Parameters
    ----------
    poly : FeedbackPolynomial or sequence
        Polynomial, or its coefficients with the highest degree first.
    tol : float
        Accepted bound on ``max |p(z_i)|``.

    Returns
    -------
    RootSet
        Roots sorted by descending modulus, conjugates adjacent (positive
        imaginary part first).
    """
    coeffs = np.asarray(poly.coeffs if isinstance(poly, FeedbackPolynomial) else poly, dtype=float)
    if coeffs[0] != 1.0:
        raise ValueError("leading coefficient must be 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = len(coeffs) - 1
    # the angular offset keeps starting points off the real axis
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    eye = np.eye(n, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        p, dp = _horner(coeffs, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(p == 0, 0.0, p / dp)
            diff = z[:, None] - z[None, :]
            diff[eye] = 1.0
            s = (1.0 / diff).sum(axis=1) - 1.0
            w = np.where(p == 0, 0.0, ratio / (1.0 - ratio * s))
        w = np.nan_to_num(w, nan=0.0, posinf=0.0, neginf=0.0)
        z = z - w
        if np.max(np.abs(w)) <= 4 * np.finfo(float).eps * max(1.0, np.max(np.abs(z))):
            break
    scale = max(1.0, np.max(np.abs(z)))
    real = np.abs(z.imag) <= 1e-13 * scale
    z = np.where(real, z.real + 0j, z)
    residual = float(np.max(np.abs(np.polyval(coeffs, z))))
    if residual > tol:
        raise RootFindingError(
            f"root iteration stopped after {it} steps with residual {residual:.3e} > {tol:.1e}", residual
        )
    return RootSet(roots=_order(z), residual_tol=residual, iterations=it)


def stability_report(roots, eps_strict=0.0):
    """Schur classification from a root set."""
    m = float(np.max(np.abs(roots.roots)))
    marginal = abs(m - 1.0) <= MARGINAL_BAND
    return StabilityReport(max_modulus=m, schur_stable=bool(m < 1.0 - eps_strict), marginal=marginal)


def localization_bound(j):
    """Lower bound on ``f`` under which three real roots are bracketed."""
    return -(1.0 / (2 * j)) * ((2 * j - 1) / (2 * j + 1)) ** (2 * j)


def localization_report(j, f, lam=0.2):
    """Real-root brackets and the pointwise sign checks behind them.

    For ``localization_bound(j) < f < 0`` the three brackets
    ``(-1, -(2j-1)/(2j+1))``, ``(-(2j|f|)^(1/2j), -|f|^(1/2j))`` and
    ``((|f|/2j)^(1/2j), 1)`` each hold a sign change of ``p_f``. ``checks``
    also records the exclusion radius around -1 outside of which roots lie in
    the unit disk, and ``p_f((lam |f|)^(1/(2j+1)))``.
    """
    poly = build_char_poly(j, f)
    roots = find_roots(poly)
    rep = stability_report(roots)
    af = abs(f)
    checks = {}
    if f < 0:
        t0 = -(2 * j - 1) / (2 * j + 1)
        checks["p(-(2j-1)/(2j+1))"] = float(poly(t0))
        checks["p(-(2j|f|)^(1/2j))"] = float(poly(-((2 * j * af) ** (1 / (2 * j)))))
        checks["p(-|f|^(1/2j))"] = float(poly(-(af ** (1 / (2 * j)))))
        checks["p((|f|/2j)^(1/2j))"] = float(poly((af / (2 * j)) ** (1 / (2 * j))))
        checks["p(-f)"] = float(poly(-f))
        checks["positivity_lambda"] = lam
        checks["p((lam|f|)^(1/(2j+1)))"] = float(poly((lam * af) ** (1 / (2 * j + 1))))
        if af < 1:
            radius = 2 * af / (1 - af)
            checks["exclusion_radius"] = radius
            outside = np.abs(roots.roots + 1) > radius
            checks["outside_roots_in_disk"] = bool(np.all(np.abs(roots.roots[outside]) < 1))
    if f >= 0:
        rep.code = "f_not_negative"
        return _with(rep, checks)
    if f <= localization_bound(j):
        rep.code = "f_below_bound"
        return _with(rep, checks)
    brackets = [
        (-1.0, -(2 * j - 1) / (2 * j + 1)),
        (-((2 * j * af) ** (1 / (2 * j))), -(af ** (1 / (2 * j)))),
        ((af / (2 * j)) ** (1 / (2 * j)), 1.0),
    ]
    for lo, hi in brackets:
        if not poly(lo) * poly(hi) <= 0:
            rep.code = "sign_check_failed"
            return _with(rep, checks)
    rep.real_root_brackets = brackets
    return _with(rep, checks)


def _with(rep, checks):
    rep.checks = checks
    return rep


def is_schur_stable(j, f):
    return stability_report(find_roots(build_char_poly(j, f))).schur_stable


def stability_margin(j, tol=1e-8, step=1e-3, f_max=10.0):
    """Smallest ``|f|`` (``f < 0``) at which the largest root reaches the unit circle.

    A coarse scan over ``f = -k * step`` locates the first unstable gain, then
    bisection narrows it to ``tol``. If nothing up to ``f_max`` is unstable,
    ``f_max`` is returned as a lower bound with a warning.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    k = 1
    while k * step <= f_max:
        if not is_schur_stable(j, -k * step):
            break
        k += 1
    else:
        warnings.warn(f"no instability found for |f| <= {f_max}; returning a lower bound", stacklevel=2)
        return f_max
    lo, hi = (k - 1) * step, k * step
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid > 0 and is_schur_stable(j, -mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class QuinticFactorization:
    a: float
    q: float
    R: float
    f: float
    b: float
    c: float
    d: float
    quadratic_roots: tuple
    cubic_roots: tuple

    @property
    def roots(self):
        return np.array(self.quadratic_roots + self.cubic_roots, dtype=complex)

    def expand(self):
        """Coefficients of ``(z^2 - 2a z + R)(z^3 + b z^2 + c z + d)``."""
        return np.polymul([1.0, -2 * self.a, self.R], [1.0, self.b, self.c, self.d])

    def to_dict(self):
        def cx(zs):
            return [{"re": float(np.real(z)), "im": float(np.imag(z))} for z in zs]

        return {
            "a": self.a, "q": self.q, "R": self.R, "f": self.f,
            "b": self.b, "c": self.c, "d": self.d,
            "quadratic_roots": cx(self.quadratic_roots),
            "cubic_roots": cx(self.cubic_roots),
        }


def cubic_roots(b, c, d):
    """Closed-form roots of ``z^3 + b z^2 + c z + d``."""
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = -(4.0 * p**3 + 27.0 * q * q)
    if p < 0 and disc >= 0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        ts = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
        return tuple(complex(t + shift) for t in ts)
    s = math.sqrt(max(q * q / 4.0 + p**3 / 27.0, 0.0))
    u = math.copysign(abs(-q / 2.0 + s) ** (1 / 3), -q / 2.0 + s)
    v = math.copysign(abs(-q / 2.0 - s) ** (1 / 3), -q / 2.0 - s)
    re = -(u + v) / 2.0 + shift
    im = math.sqrt(3.0) / 2.0 * (u - v)
    return (complex(u + v + shift), complex(re, im), complex(re, -im))


def explicit_quintic(a):
    """Gain ``f`` for which ``p_f`` (j = 2) has the roots ``a +- sqrt(R - a^2) i``.

    The quintic splits as ``(z^2 - 2a z + R)(z^3 + b z^2 + c z + d)`` with
    ``q = (a + 4a^2 + 2a^3)/(1 + 2a)``, ``R = q + sqrt(q^2 - 4a^3)``,
    ``f = (8a^3 + 4a^2) R - (1 + 4a) R^2``, ``b = 1 + 2a``, ``c = 2ab - R`` and
    ``d = 2ac - Rb``.
    """
    a = float(a)
    if a < 0:
        raise ValueError("a must be non-negative")
    q = (a + 4 * a**2 + 2 * a**3) / (1 + 2 * a)
    disc = q * q - 4 * a**3
    if disc < 0:
        raise ValueError(f"q^2 - 4a^3 = {disc:.3e} < 0: R would be complex")
    R = q + math.sqrt(disc)
    f = (8 * a**3 + 4 * a**2) * R - (1 + 4 * a) * R**2
    b = 1 + 2 * a
    c = 2 * a * b - R
    d = 2 * a * c - R * b
    im = np.sqrt(complex(R - a * a))
    quad = (complex(a + 1j * im), complex(a - 1j * im))
    return QuinticFactorization(a=a, q=q, R=R, f=f, b=b, c=c, d=d,
                                quadratic_roots=quad, cubic_roots=cubic_roots(b, c, d))


def f0():
    """The certified switching gain, ``explicit_quintic(1/36).f``."""
    return explicit_quintic(1.0 / 36.0).f
