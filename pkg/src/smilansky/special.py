"""Scalar sequences of the model: the channel square roots, the Jacobi
entries, the decaying channel solutions, normalized Hermite functions and
the coupling-to-Jacobi parameter map.

Every function here accepts a scalar index ``n`` or an integer array and
broadcasts. The spectral parameter may be a :class:`SpectralPoint` or any
Python/numpy number.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BranchCutError, DomainError, HermiteUnderflowWarning

SQRT2 = math.sqrt(2.0)
# relative tolerance for treating mu as exactly critical
CRITICAL_RTOL = 1e-12


class Location(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    REAL_BELOW_CUT = "real-below-cut"
    ON_CUT = "on-cut"


@dataclass(frozen=True)
class SpectralPoint:
    """Complex spectral parameter with half-plane bookkeeping.

    For real points, ``n0`` is the first channel whose branch point
    ``n0 + 1/2`` lies strictly above ``re``; channels ``n < n0`` have the
    point on their cut. A real point sitting exactly on a branch point is
    ``ON_CUT``.
    """

    re: float
    im: float = 0.0

    @classmethod
    def of(cls, value) -> "SpectralPoint":
        if isinstance(value, SpectralPoint):
            return value
        z = complex(value)
        return cls(float(z.real), float(z.imag))

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def n0(self) -> int | None:
        if self.im != 0.0:
            return None
        return max(0, math.floor(self.re - 0.5) + 1)

    @property
    def location(self) -> Location:
        if self.im > 0:
            return Location.UPPER
        if self.im < 0:
            return Location.LOWER
        if self.re >= 0.5 and (self.re - 0.5) == math.floor(self.re - 0.5):
            return Location.ON_CUT
        return Location.REAL_BELOW_CUT

    def is_real(self) -> bool:
        return self.im == 0.0

    def below_cut(self, n) -> bool:
        """True if every channel index in ``n`` is off its cut."""
        if self.im != 0.0:
            return True
        return bool(np.all(self.re < np.asarray(n) + 0.5))

    def conjugate(self) -> "SpectralPoint":
        return SpectralPoint(self.re, -self.im)


def _point_and_index(n, lam):
    lam = SpectralPoint.of(lam)
    n = np.asarray(n)
    if np.any(n < 0):
        raise DomainError("channel index must be non-negative")
    if not lam.below_cut(n):
        raise BranchCutError(
            f"Lambda={lam.re} is real and on the cut [n+1/2, oo) of channel "
            f"{int(np.min(n[lam.re >= n + 0.5]))}")
    return n, lam


def _ret(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


def d_entry(n):
    """Off-diagonal Jacobi entry d_n = n^(1/2) (n^2 - 1/4)^(1/4), d_0 = 0."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise DomainError("index must be non-negative")
    out = np.sqrt(n) * np.sqrt(np.sqrt(np.maximum(n * n - 0.25, 0.0)))
    return _ret(np.where(n == 0, 0.0, out))


def zeta(n, lam):
    """Branch of sqrt(n + 1/2 - Lambda) analytic off [n + 1/2, oo).

    The principal square root is exactly the required branch: its argument
    leaves the negative real axis precisely when Lambda leaves the cut, and
    then Re zeta > 0 with Im zeta of the opposite sign to Im Lambda.
    """
    n, lam = _point_and_index(n, lam)
    w = (n + 0.5) - lam.value
    if lam.is_real():
        return _ret(np.sqrt(np.real(w)).astype(float) + 0j)
    return _ret(np.sqrt(w))


def y_entry(n, lam):
    # sqrt((n+1/2) w) has the branch of sqrt(w) since n+1/2 > 0, and is
    # exactly n+1/2 at Lambda = 0
    n, lam = _point_and_index(n, lam)
    w = (n + 0.5) * ((n + 0.5) - lam.value)
    if lam.is_real():
        return _ret(np.sqrt(np.real(w)).astype(float) + 0j)
    return _ret(np.sqrt(w))


def psi_entry(n, lam):
    """psi_n = y_n - (n + 1/2 - Lambda/2), evaluated cancellation-free as
    -Lambda^2 / (4 (y_n + n + 1/2 - Lambda/2)); it is O(1/n)."""
    n, lam = _point_and_index(n, lam)
    z = lam.value
    a = (n + 0.5) - z / 2
    return _ret(-(z * z) / (4.0 * (y_entry(n, lam) + a)))


def eta(n, x, lam):
    """Decaying channel solution (n + 1/2)^(1/4) exp(-zeta_n |x|)."""
    n, lam = _point_and_index(n, lam)
    x = np.asarray(x, dtype=float)
    return _ret((n + 0.5) ** 0.25 * np.exp(-zeta(n, lam) * np.abs(x)))


def eta_jump(n, lam):
    """eta_n'(0+) - eta_n'(0-)."""
    n, lam = _point_and_index(n, lam)
    return _ret(-2.0 * (n + 0.5) ** 0.25 * zeta(n, lam))


def eta_norm_sq(n, lam):
    """Squared L2 norm of eta_n(.; Lambda) on the line."""
    n, lam = _point_and_index(n, lam)
    return _ret(np.sqrt(n + 0.5) / np.real(zeta(n, lam)))


_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)


def hermite_table(nmax, q):
    """Normalized Hermite functions chi_0..chi_nmax at the points ``q``.

    Uses the upward normalized recurrence
    chi_{n+1} = (sqrt(2) q chi_n - sqrt(n) chi_{n-1}) / sqrt(n+1),
    carried in scaled form so that the Gaussian factor of chi_0 cannot
    underflow the whole table for large |q|.

    Returns an array of shape ``(nmax + 1,) + q.shape``.
    """
    if nmax < 0:
        raise DomainError("nmax must be non-negative")
    q = np.asarray(q, dtype=float)
    flat = q.ravel()
    log_scale = -0.5 * flat * flat - 0.25 * math.log(math.pi)
    out = np.empty((nmax + 1, flat.size))
    prev = np.zeros_like(flat)
    cur = np.ones_like(flat)
    out[0] = cur * np.exp(log_scale)
    for n in range(nmax):
        nxt = (SQRT2 * flat * cur - math.sqrt(n) * prev) / math.sqrt(n + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            prev[big] /= _RESCALE
            cur[big] /= _RESCALE
            log_scale[big] += _LOG_RESCALE
        out[n + 1] = cur * np.exp(log_scale)
    if flat.size and not np.any(out) and np.any(flat != 0):
        warnings.warn("all Hermite function values underflowed to zero",
                      HermiteUnderflowWarning, stacklevel=2)
    return out.reshape((nmax + 1,) + q.shape)


def hermite_chi(n, q):
    """n-th normalized harmonic-oscillator eigenfunction at ``q``."""
    if n < 0:
        raise DomainError("n must be non-negative")
    return _ret(hermite_table(int(n), q)[int(n)])


def mu_from_alpha(alpha, bonds=2):
    """Jacobi parameter mu = bonds / (alpha sqrt 2) for a star graph."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if bonds < 1:
        raise DomainError("bonds must be >= 1")
    return bonds / (alpha * SQRT2)


def alpha_from_mu(mu, bonds=2):
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    return bonds / (mu * SQRT2)


def regime(mu) -> str:
    """'sub' (mu < 1), 'critical' (mu = 1) or 'super' (mu > 1)."""
    if math.isclose(mu, 1.0, rel_tol=CRITICAL_RTOL, abs_tol=0.0):
        return "critical"
    return "sub" if mu < 1 else "super"


@dataclass(frozen=True)
class ModelParameters:
    """Coupling ``alpha`` of the transmission condition on a star graph
    with ``bonds`` half-lines (the line is ``bonds=2``)."""

    alpha: float
    bonds: int = 2

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.bonds < 1:
            raise DomainError("bonds must be >= 1")

    @classmethod
    def from_mu(cls, mu, bonds=2) -> "ModelParameters":
        return cls(alpha_from_mu(mu, bonds), bonds)

    @property
    def mu(self) -> float:
        return mu_from_alpha(self.alpha, self.bonds)

    @property
    def borderline(self) -> bool:
        """alpha >= bonds/sqrt(2), equivalently mu <= 1."""
        return regime(self.mu) != "super"
