"""Five-lag companion matrices for the switching delays 4L/c and 8L/c.

The lag state ``(a(x-2L), a(x-4L), a(x-6L), a(x-8L), a(x-10L))`` of the
trace density ``a = alpha'`` advances by one period with ``B1`` when the
delay is 4L/c and with ``B2`` when it is 8L/c. In the eigenbasis of ``B2``
both maps are contractions in the induced 1-norm at the certified gain.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from wavedelay.spectral import build_char_poly, find_roots

DISTINCT_GAP = 1e-8
ILL_CONDITIONED = 1e12


class DelayKind(enum.Enum):
    FOUR_L = "4L"
    EIGHT_L = "8L"


class EigenvalueCollisionError(ValueError):
    """The eigenvalues of B2 are not distinct, so V2 is not invertible."""


@dataclass(frozen=True)
class DelayMatrix:
    kind: DelayKind
    f: float
    entries: np.ndarray

    def char_poly(self):
        return char_poly(self.entries)


def char_poly(m):
    """Characteristic polynomial coefficients (highest first) by Faddeev-LeVerrier.

    Exact enough for small matrices with O(1) entries and, unlike
    ``np.poly``, insensitive to defective eigenvalues.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    coeffs = [1.0]
    mk = np.zeros_like(m)
    for k in range(1, n + 1):
        mk = m @ mk + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(m @ mk) / k)
    return np.array(coeffs)


def build_delay_matrix(kind, f):
    kind = DelayKind(kind)
    entries = np.zeros((5, 5))
    entries[1:, :4] = np.eye(4)
    if kind is DelayKind.EIGHT_L:
        entries[0] = [-1.0, 0.0, 0.0, f, -f]
    else:
        entries[0] = [-1.0, f, -f, 0.0, 0.0]
    return DelayMatrix(kind=kind, f=float(f), entries=entries)


@dataclass(frozen=True)
class EigenBasis:
    eigenvalues: np.ndarray
    V2: np.ndarray
    inverse_V2: np.ndarray
    residual: float


def eigen_basis(B2):
    """Normalized eigenvectors ``(l^4, l^3, l^2, l, 1) / norm`` of ``B2``.

    Eigenvalues come from the roots of ``p_f`` with half-degree 2 and are
    checked against ``B2`` by residual.
    """
    if B2.kind is not DelayKind.EIGHT_L:
        raise ValueError("eigen_basis expects the 8L/c matrix")
    lam = find_roots(build_char_poly(2, B2.f)).roots
    gaps = np.abs(lam[:, None] - lam[None, :]) + np.eye(5)
    if gaps.min() <= DISTINCT_GAP:
        raise EigenvalueCollisionError(f"eigenvalues closer than {DISTINCT_GAP:g}: {lam}")
    powers = np.arange(4, -1, -1)
    V = lam[None, :] ** powers[:, None]
    V = V / np.sqrt((np.abs(lam)[None, :] ** (2 * powers[:, None])).sum(axis=0))
    resid = float(np.max(np.abs(B2.entries @ V - V * lam[None, :])))
    if resid > 1e-10:
        raise RuntimeError(f"eigenvector residual {resid:.3e} exceeds 1e-10")
    return EigenBasis(eigenvalues=lam, V2=V, inverse_V2=np.linalg.inv(V), residual=resid)


def norm1(m):
    """Induced 1-norm: the largest absolute column sum."""
    return float(np.abs(m).sum(axis=0).max())


@dataclass(frozen=True)
class SwitchedSystem:
    f: float
    B1: DelayMatrix
    B2: DelayMatrix
    basis: EigenBasis | None
    D2: np.ndarray
    H1: np.ndarray | None
    norm_D2: float
    norm_H1: float
    note: str = ""

    @property
    def L0(self):
        return max(self.norm_D2, self.norm_H1)

    @property
    def certified(self):
        return self.L0 < 1.0

    def matrix(self, kind):
        return self.D2 if DelayKind(kind) is DelayKind.EIGHT_L else self.H1

    def to_dict(self):
        def cx(m):
            if m is None:
                return None
            m = np.asarray(m, dtype=complex)
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        return {
            "f": self.f,
            "B1": self.B1.entries.tolist(),
            "B2": self.B2.entries.tolist(),
            "V2": cx(self.basis.V2) if self.basis else None,
            "D2": cx(self.D2),
            "H1": cx(self.H1),
            "norm_D2": self.norm_D2,
            "norm_H1": self.norm_H1,
            "L0": self.L0,
            "certified": self.certified,
            "note": self.note,
        }


def switched_system(f):
    """Transformed pair ``D2 = V2^-1 B2 V2`` and ``H1 = V2^-1 B1 V2`` with their 1-norms.

    When the eigenvalues of ``B2`` collide (e.g. ``f = 0``) no eigenbasis
    exists; the result then carries only ``D2`` and reports no certificate.
    """
    B1 = build_delay_matrix(DelayKind.FOUR_L, f)
    B2 = build_delay_matrix(DelayKind.EIGHT_L, f)
    try:
        basis = eigen_basis(B2)
    except EigenvalueCollisionError as exc:
        lam = find_roots(build_char_poly(2, f)).roots
        D2 = np.diag(lam)
        return SwitchedSystem(f=float(f), B1=B1, B2=B2, basis=None, D2=D2, H1=None,
                              norm_D2=norm1(D2), norm_H1=float("inf"), note=str(exc))
    D2 = np.diag(basis.eigenvalues)
    H1 = basis.inverse_V2 @ B1.entries @ basis.V2
    return SwitchedSystem(f=float(f), B1=B1, B2=B2, basis=basis, D2=D2, H1=H1,
                          norm_D2=norm1(D2), norm_H1=norm1(H1))


@dataclass
class SwitchedTrajectory:
    gamma: np.ndarray  # (steps + 1, 5)
    switching: list
    norms: np.ndarray
    bounds: np.ndarray

    @property
    def bound_holds(self):
        return bool(np.all(self.norms <= self.bounds * (1 + 1e-12) + 1e-300))


def propagate_switched(sys, switching, gamma0=None):
    """Iterate ``gamma_{j+1} = M(kind_j) gamma_j`` and the bound ``L0^j |gamma_0|_1``."""
    kinds = [DelayKind(k) for k in switching]
    g = np.ones(5, dtype=complex) if gamma0 is None else np.asarray(gamma0, dtype=complex)
    out = np.empty((len(kinds) + 1, 5), dtype=complex)
    out[0] = g
    for i, k in enumerate(kinds):
        m = sys.matrix(k)
        if m is None:
            raise ValueError("switched system has no eigenbasis; cannot apply the 4L/c map")
        g = m @ g
        out[i + 1] = g
    norms = np.abs(out).sum(axis=1)
    bounds = sys.L0 ** np.arange(len(kinds) + 1) * norms[0]
    return SwitchedTrajectory(gamma=out, switching=kinds, norms=norms, bounds=bounds)


@dataclass
class ModalDecomposition:
    roots: np.ndarray
    coeffs: np.ndarray
    condition: float
    warning: str | None = None

    def predict(self, j):
        """Trace density ``j`` periods after the window start: ``sum_i c_i z_i^j``."""
        zj = self.roots ** j
        return np.real(np.tensordot(zj, self.coeffs, axes=(0, 0)))

    def bound(self, j):
        """Modal envelope ``M0^j sum_i |c_i|``."""
        return np.max(np.abs(self.roots)) ** j * np.abs(self.coeffs).sum(axis=0)


def modal_decompose(lags, roots):
    """Solve the Vandermonde system ``sum_i c_i z_i^k = lags[k]``.

    ``lags`` holds ``(a(s), a(s+h), ..., a(s+(n-1)h))`` along its first axis;
    extra axes are treated as independent right-hand sides.
    """
    z = np.asarray(getattr(roots, "roots", roots), dtype=complex)
    lags = np.asarray(lags, dtype=float)
    n = len(z)
    if lags.shape[0] != n:
        raise ValueError(f"need {n} lag values, got {lags.shape[0]}")
    gaps = np.abs(z[:, None] - z[None, :]) + np.eye(n)
    if gaps.min() <= DISTINCT_GAP:
        raise EigenvalueCollisionError("roots must be pairwise distinct")
    V = z[None, :] ** np.arange(n)[:, None]
    cond = float(np.linalg.cond(V))
    msg = None
    if cond > ILL_CONDITIONED:
        msg = f"Vandermonde condition estimate {cond:.2e} exceeds {ILL_CONDITIONED:g}"
        warnings.warn(msg, stacklevel=2)
    coeffs = np.linalg.solve(V, lags.astype(complex))
    return ModalDecomposition(roots=z, coeffs=coeffs, condition=cond, warning=msg)
