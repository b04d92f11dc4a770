"""Truncated Jacobi operators of the model and the linear algebra on them.

Two families are built from the entry generators in :mod:`.special`:

* ``j0(mu)``: real symmetric, diagonal ``(2n+1) mu``, off-diagonal ``d_n``;
* ``jlambda(mu, lam)``: complex symmetric, diagonal ``2 mu y_n(lam)``.

Operators are immutable descriptors (kind, strip, size); entries are
generated on demand and never stored densely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import ConvergenceError, DomainError, NotSymmetricError, SingularMatrixError
from ._tail import frozen_tail_ratio, tail_ratio
from .special import SpectralPoint, d_entry, y_entry

DEFAULT_TOL_EIG = 1e-10
_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class OperatorKind:
    """Which operator: ``lam is None`` means the real operator J0(mu)."""

    mu: float
    lam: SpectralPoint | None = None

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")

    @property
    def name(self) -> str:
        return "J0" if self.lam is None else "JLambda"

    def diagonal(self, n):
        n = np.asarray(n)
        if self.lam is None:
            return 2.0 * self.mu * (n + 0.5)
        y = y_entry(n, self.lam)
        if self.lam.is_real():
            return 2.0 * self.mu * np.real(y)
        return 2.0 * self.mu * y


def j0(mu) -> OperatorKind:
    return OperatorKind(float(mu))


def jlambda(mu, lam) -> OperatorKind:
    return OperatorKind(float(mu), SpectralPoint.of(lam))


@dataclass(frozen=True)
class TridiagonalOperator:
    """Rows/columns ``strip .. strip+size-1`` of a Jacobi operator.

    The coupling ``d_strip`` into the removed rows is dropped, and the
    coupling ``d_{strip+size}`` to the discarded tail is dropped too
    (plain cutoff).
    """

    kind: OperatorKind
    strip: int = 0
    size: int = 1

    def __post_init__(self):
        if self.size < 1:
            raise DomainError("size must be >= 1")
        if self.strip < 0:
            raise DomainError("strip must be >= 0")
        if self.kind.lam is not None and not self.kind.lam.below_cut(self.strip):
            # eager check so that build() reports cut problems
            self.kind.diagonal(np.arange(self.strip, self.strip + self.size))

    @property
    def indices(self):
        return np.arange(self.strip, self.strip + self.size)

    @property
    def is_real(self) -> bool:
        return self.kind.lam is None or self.kind.lam.is_real()

    def diagonal(self):
        return self.kind.diagonal(self.indices)

    def off_diagonal(self):
        return d_entry(np.arange(self.strip + 1, self.strip + self.size))

    def tail_coupling(self):
        """The dropped entry d_{strip+size}."""
        return float(d_entry(self.strip + self.size))

    def matvec(self, x, shift=0.0):
        x = np.asarray(x)
        b = self.diagonal() - shift
        d = self.off_diagonal()
        y = b * x
        y[:-1] += d * x[1:]
        y[1:] += d * x[:-1]
        return y

    def to_dense(self):
        a = np.diag(self.diagonal()).astype(complex if not self.is_real else float)
        d = self.off_diagonal()
        a += np.diag(d, 1) + np.diag(d, -1)
        return a


def build(kind: OperatorKind, strip: int = 0, size: int = 1) -> TridiagonalOperator:
    return TridiagonalOperator(kind, int(strip), int(size))


@dataclass(frozen=True)
class EigenvalueBatch:
    values: np.ndarray
    truncation: int
    residual_bound: float


def _real_entries(op):
    if not op.is_real:
        raise NotSymmetricError("operator has a complex diagonal; use solve or "
                                "smallest_singular_value instead")
    diag = np.ascontiguousarray(op.diagonal(), dtype=float)
    off2 = np.ascontiguousarray(op.off_diagonal() ** 2, dtype=float)
    pivmin = _TINY * max(1.0, float(off2.max()) if off2.size else 1.0)
    return diag, off2, pivmin


def gershgorin(op):
    diag = np.real(op.diagonal())
    d = op.off_diagonal()
    r = np.zeros_like(diag)
    r[:-1] += np.abs(d)
    r[1:] += np.abs(d)
    return float((diag - r).min()), float((diag + r).max())


def count_below(op: TridiagonalOperator, threshold: float) -> int:
    """Number of eigenvalues of the truncation strictly below ``threshold``
    (Sturm count of the LDL^T pivots; zero pivots are pushed to -pivmin)."""
    diag, off2, pivmin = _real_entries(op)
    return int(K.sturm_count(diag, off2, float(threshold), pivmin))


def eigenvalues_sym(op: TridiagonalOperator, lo=-math.inf, hi=math.inf,
                    tol=DEFAULT_TOL_EIG) -> EigenvalueBatch:
    """All eigenvalues of the real symmetric truncation in ``[lo, hi)``,
    by bisection on Sturm counts to absolute tolerance ``tol``."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    diag, off2, pivmin = _real_entries(op)
    glo, ghi = gershgorin(op)
    pad = 2 * _EPS * max(abs(glo), abs(ghi), 1.0)
    a = max(lo, glo - pad)
    b = min(hi, ghi + pad)
    if not a < b:
        return EigenvalueBatch(np.zeros(0), op.size, 0.0)
    k0 = int(K.sturm_count(diag, off2, a, pivmin))
    k1 = int(K.sturm_count(diag, off2, b, pivmin))
    idx = np.arange(k0, k1, dtype=np.int64)
    vals = K.bisect_eigenvalues(diag, off2, idx, a, b, tol, pivmin) if idx.size else np.zeros(0)
    bound = tol + 4 * _EPS * max(abs(glo), abs(ghi))
    return EigenvalueBatch(np.sort(vals), op.size, bound)


def lowest_eigenvalues(op: TridiagonalOperator, k: int, tol=DEFAULT_TOL_EIG) -> EigenvalueBatch:
    """The ``k`` smallest eigenvalues of a real symmetric truncation."""
    diag, off2, pivmin = _real_entries(op)
    glo, ghi = gershgorin(op)
    pad = 2 * _EPS * max(abs(glo), abs(ghi), 1.0)
    idx = np.arange(min(k, op.size), dtype=np.int64)
    vals = K.bisect_eigenvalues(diag, off2, idx, glo - pad, ghi + pad, tol, pivmin)
    return EigenvalueBatch(vals, op.size, tol + 4 * _EPS * max(abs(glo), abs(ghi)))


class Factorization:
    """Tridiagonal LU with partial pivoting of ``op - shift`` (plus an
    optional correction on the last diagonal entry)."""

    def __init__(self, op: TridiagonalOperator, shift=0.0, last_correction=0.0):
        b = op.diagonal() - shift
        b = b.astype(complex) if (np.iscomplexobj(b) or np.iscomplexobj(shift)
                                  or np.iscomplexobj(last_correction)) else b.astype(float)
        b[-1] += last_correction
        d = op.off_diagonal().astype(b.dtype)
        self.op = op
        self.diag = b
        self.off = d
        self._lu = K.gt_factor(np.ascontiguousarray(d), np.ascontiguousarray(b),
                               np.ascontiguousarray(d.copy()))
        info = self._lu[5]
        if info >= 0:
            raise SingularMatrixError(int(info))

    def solve(self, rhs):
        rhs = np.ascontiguousarray(rhs, dtype=np.result_type(self.diag, rhs, float))
        return K.gt_solve(*self._lu[:5], rhs)

    def solve_adjoint(self, rhs):
        # the matrix is complex symmetric, so A^H = conj(A)
        return np.conj(self.solve(np.conj(np.asarray(rhs, dtype=complex))))

    def matvec(self, x):
        y = self.diag * x
        y[:-1] += self.off * x[1:]
        y[1:] += self.off * x[:-1]
        return y


def closure_correction(op: TridiagonalOperator, shift=0.0, closure="dirichlet", side=None):
    """Correction to the last diagonal entry that replaces the plain cutoff.

    ``'dirichlet'`` drops the tail (correction 0). ``'asymptotic'`` adds
    ``d_N r`` where r estimates C_N / C_{N-1} for the decaying solution of
    the discarded rows, so that the truncation acts like the infinite
    matrix on vectors that continue as that solution.
    """
    if closure == "dirichlet":
        return 0.0
    if closure != "asymptotic":
        raise DomainError(f"unknown closure {closure!r}")
    n_last = op.strip + op.size
    b_next = complex(op.kind.diagonal(n_last) - shift)
    if side is None:
        side = 1 if b_next.imag <= 0 else -1
    d_cur, d_next = float(d_entry(n_last)), float(d_entry(n_last + 1))
    lam = op.kind.lam
    if lam is None:
        r = tail_ratio("j0", op.kind.mu, complex(shift), n_last, d_cur, b_next, d_next, side)
    elif shift == 0:
        r = tail_ratio("channel", op.kind.mu, lam.value, n_last, d_cur, b_next, d_next, side)
    else:
        r = frozen_tail_ratio(d_cur, b_next, d_next, side)
    return d_cur * r


def solve(op: TridiagonalOperator, rhs, shift=0.0, closure="dirichlet"):
    """Solve ``(op - shift) x = rhs``.

    Returns
    -------
    x : ndarray
    residual : float
        ``||(op - shift) x - rhs|| / ||rhs||`` (0 for a zero right side).
    """
    rhs = np.asarray(rhs)
    if rhs.shape != (op.size,):
        raise DomainError(f"rhs has shape {rhs.shape}, expected ({op.size},)")
    fac = Factorization(op, shift, closure_correction(op, shift, closure))
    x = fac.solve(rhs)
    nb = np.linalg.norm(rhs)
    res = float(np.linalg.norm(fac.matvec(x) - rhs) / nb) if nb > 0 else 0.0
    return x, res


def resolvent_element_00(op: TridiagonalOperator, z, closure="dirichlet") -> complex:
    """Top-left entry of ``(op - z)^{-1}``."""
    e0 = np.zeros(op.size, dtype=complex)
    e0[0] = 1.0
    x, _ = solve(op, e0, shift=complex(z), closure=closure)
    return complex(x[0])


@dataclass
class SingularValueEstimate:
    value: float
    iterations: int
    vector: np.ndarray = field(repr=False)


def smallest_singular_value(op: TridiagonalOperator, rtol=1e-11, maxiter=20000,
                            seed=0, full_output=False):
    """Smallest singular value of the truncation by inverse iteration on
    the normal equations, x <- A^{-1} A^{-H} x, with the Rayleigh quotient
    ||A x|| of the normalized iterate as the estimate.

    Raises ConvergenceError if the estimate has not settled to ``rtol``
    after ``maxiter`` sweeps. An exactly singular truncation returns 0.
    """
    try:
        fac = Factorization(op)
    except SingularMatrixError:
        return SingularValueEstimate(0.0, 0, np.zeros(op.size)) if full_output else 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.size) + 1j * rng.standard_normal(op.size)
    x /= np.linalg.norm(x)
    sigma = np.linalg.norm(fac.matvec(x))
    for it in range(1, maxiter + 1):
        x = fac.solve(fac.solve_adjoint(x))
        nx = np.linalg.norm(x)
        if not np.isfinite(nx) or nx == 0:
            raise ConvergenceError("inverse iteration broke down")
        x /= nx
        new = np.linalg.norm(fac.matvec(x))
        if abs(new - sigma) <= rtol * new:
            sigma = new
            break
        sigma = new
    else:
        raise ConvergenceError(f"smallest singular value not converged after {maxiter} sweeps")
    if full_output:
        return SingularValueEstimate(float(sigma), it, x)
    return float(sigma)
