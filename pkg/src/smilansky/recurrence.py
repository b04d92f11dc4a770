"""Three-term recurrences of the model and their asymptotics.

Two recurrences are supported, both of the form

    d_{n+1} C_{n+1} + P_n C_n + d_n C_{n-1} = 0,   n >= 0, d_0 = 0,

* ``channel``: P_n = 2 mu y_n(Lambda), the kernel equation of J(Lambda; mu);
* ``j0``: P_n = (2n+1) mu - z, the eigenvalue equation of J0(mu).

The second is the first with Lambda = z/mu to leading order, which is how
:func:`predict_asymptotics` treats it.

Solutions are stored as base-2 scaled mantissas so that geometric growth
over 10^4 or more steps does not overflow.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import ConvergenceError, DegenerateFitError, DomainError, NoMinimalSolutionWarning
from ._tail import tail_ratio
from .special import SpectralPoint, d_entry, regime, y_entry

LN2 = math.log(2.0)


class RecurrenceKind(enum.Enum):
    CHANNEL = "channel"
    J0 = "j0"


class Method(enum.Enum):
    FORWARD = "forward"
    MILLER = "miller-backward"


@dataclass(frozen=True)
class Recurrence:
    kind: RecurrenceKind
    mu: float
    param: complex  # Lambda for CHANNEL, z for J0

    @classmethod
    def channel(cls, mu, lam) -> "Recurrence":
        lam = SpectralPoint.of(lam)
        return cls(RecurrenceKind.CHANNEL, float(mu), lam.value)

    @classmethod
    def j0(cls, mu, z) -> "Recurrence":
        return cls(RecurrenceKind.J0, float(mu), complex(z))

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")

    @property
    def effective_lambda(self) -> complex:
        """Lambda entering the large-n coefficient expansion."""
        if self.kind is RecurrenceKind.J0:
            return self.param / self.mu
        return self.param

    @property
    def side(self) -> int:
        """+1 if the diagonal approaches the real axis from below."""
        return 1 if self.param.imag >= 0 else -1

    def tail_ratio(self, n, d_cur, p_cur, d_next):
        """Estimate of C_n / C_{n-1} for the decaying solution."""
        return tail_ratio(self.kind.value, self.mu, self.param, n, d_cur, p_cur, d_next, self.side)

    def diag(self, n):
        n = np.asarray(n)
        if self.kind is RecurrenceKind.J0:
            return (2.0 * self.mu * (n + 0.5) - self.param).astype(complex)
        return (2.0 * self.mu * y_entry(n, SpectralPoint.of(self.param))).astype(complex)

    def off(self, n):
        return d_entry(n)

    def arrays(self, n_max):
        """(d_0..d_{n_max+1}, P_0..P_{n_max}) as contiguous arrays."""
        d = np.ascontiguousarray(self.off(np.arange(n_max + 2)), dtype=float)
        p = np.ascontiguousarray(self.diag(np.arange(n_max + 1)), dtype=complex)
        return d, p


@dataclass
class SolutionSequence:
    """C_0..C_N stored as ``mantissa * 2**exponent``."""

    mantissa: np.ndarray
    exponent: np.ndarray
    method: Method
    recurrence: Recurrence
    normalization: str = "C0=1"
    converged: bool = True
    minimal: bool | None = None
    info: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.mantissa.shape[0] - 1

    @property
    def values(self):
        """Unscaled values; may overflow to inf or underflow to 0."""
        with np.errstate(over="ignore", under="ignore"):
            return self.mantissa * np.ldexp(1.0, self.exponent)

    def log_abs(self):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mantissa)) + self.exponent * LN2

    def scaled(self, lo=0, hi=None):
        """Values on ``lo..hi`` rescaled by a common power of two so the
        largest one is O(1); returns (values, exponent)."""
        hi = self.N if hi is None else hi
        e = self.exponent[lo:hi + 1]
        m = self.mantissa[lo:hi + 1]
        nz = m != 0
        emax = int(e[nz].max()) if nz.any() else 0
        with np.errstate(under="ignore"):
            return m * np.ldexp(1.0, e - emax), emax

    def recurrence_residual(self, rows=None):
        """Max over interior rows of the relative row defect
        |d_{n+1}C_{n+1} + P_n C_n + d_n C_{n-1}| / (sum of moduli)."""
        n_all = np.arange(1, self.N)
        rows = n_all if rows is None else np.asarray(rows)
        if rows.size == 0:
            return 0.0
        d, p = self.recurrence.arrays(self.N)
        e = self.exponent
        m = self.mantissa
        with np.errstate(under="ignore", invalid="ignore"):
            up = d[rows + 1] * m[rows + 1] * np.ldexp(1.0, e[rows + 1] - e[rows])
            mid = p[rows] * m[rows]
            dn = d[rows] * m[rows - 1] * np.ldexp(1.0, e[rows - 1] - e[rows])
            den = np.abs(up) + np.abs(mid) + np.abs(dn)
            rel = np.where(den > 0, np.abs(up + mid + dn) / np.where(den > 0, den, 1.0), 0.0)
        return float(rel.max())


def forward_solve(rec: Recurrence, c0=1.0, N: int = 100) -> SolutionSequence:
    """Solution satisfying every row n >= 0, started from C_0 = ``c0``."""
    if N < 1:
        raise DomainError("N must be >= 1")
    d, p = rec.arrays(N)
    c0 = complex(c0)
    c1 = -p[0] * c0 / d[1]
    m, e = K.forward_scaled(d, p, c0, c1, N)
    return SolutionSequence(m, e, Method.FORWARD, rec, normalization=f"C0={c0}")


def solve_rows_from_one(rec: Recurrence, c0, c1, N: int) -> SolutionSequence:
    """Solution of the rows n >= 1 with arbitrary initial pair (C_0, C_1)."""
    d, p = rec.arrays(N)
    m, e = K.forward_scaled(d, p, complex(c0), complex(c1), N)
    return SolutionSequence(m, e, Method.FORWARD, rec, normalization="initial pair")


class Regime(enum.Enum):
    SUB = "SubCritical"
    CRITICAL = "Critical"
    SUPER = "SuperCritical"


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Leading-order Birkhoff-Adams behaviour C_n^+- ~ ratio^n n^power
    (mu != 1) or (-1)^n exp(+-rate sqrt n) n^(-1/4) (mu = 1).

    ``ratio_or_rate`` and ``power`` describe the minimal (decaying) branch
    when there is one, and the ``+`` branch otherwise.
    """

    regime: Regime
    ratio_or_rate: complex
    power: complex
    ratios: tuple
    powers: tuple
    minimal_branch: str | None

    def squared_modulus_exponents(self):
        """Exponents of n in |C^+-|^2 for mu != 1."""
        return tuple(2.0 * complex(p).real for p in self.powers)


def predict_asymptotics(mu, lam) -> AsymptoticPrediction:
    """Birkhoff-Adams prediction for C_{n+1} + (a0 + a1/n) C_n + (b0 + b1/n) C_{n-1} = 0
    with a0 = 2 mu, a1 = -mu (1 + Lambda), b0 = 1, b1 = -1.

    For the J0 eigenvalue recurrence pass ``lam = z / mu``.
    """
    if not mu > 0:
        raise DomainError("mu must be positive")
    lam = complex(lam)
    reg = regime(mu)
    if reg == "critical":
        rate = 2.0 * np.sqrt(complex(-lam))
        on_cut = lam.imag == 0 and lam.real >= 0
        return AsymptoticPrediction(Regime.CRITICAL, complex(rate), -0.25 + 0j,
                                    (-1.0 + 0j, -1.0 + 0j), (-0.25 + 0j, -0.25 + 0j),
                                    None if on_cut else "-")
    a0, a1, b1 = 2.0 * mu, -mu * (1.0 + lam), -1.0
    s = np.sqrt(complex(mu * mu - 1.0))
    lp, lm = -mu + s, -mu - s
    dp = (a1 * lp + b1) / (a0 * lp + 2.0)
    dm = (a1 * lm + b1) / (a0 * lm + 2.0)
    if reg == "super":
        branch = "+"
    elif lam.imag > 0:
        branch = "-"
    elif lam.imag < 0:
        branch = "+"
    else:
        branch = None
    ratio, power = (lm, dm) if branch == "-" else (lp, dp)
    return AsymptoticPrediction(Regime.SUPER if reg == "super" else Regime.SUB,
                                complex(ratio), complex(power), (complex(lp), complex(lm)),
                                (complex(dp), complex(dm)), branch)


def _ratios_to_sequence(r, n_out):
    """C_0 = 1, C_n = C_{n-1} r_n, in scaled form via cumulative logs."""
    logs = np.concatenate(([0j], np.cumsum(np.log(r[1:n_out + 1].astype(complex)))))
    e = np.floor(logs.real / LN2).astype(np.int64)
    m = np.exp(logs - e * LN2)
    return m, e


def miller_minimal(rec: Recurrence, N: int, buffer: int | None = None, seed="zero",
                   tol=1e-10, max_depth=2 ** 22) -> SolutionSequence:
    """Minimal solution of the rows n >= 1, normalized to C_0 = 1.

    Backward ratio recursion from index ``N + buffer``; the buffer doubles
    until C_0..C_N move by less than ``tol`` relative. ``seed='zero'`` is
    the classical start (C_{K+1}, C_K) = (0, 1); ``seed='asymptotic'``
    starts from an asymptotic estimate of the decaying ratio instead, which
    is needed when the two branches separate only by a power of n.

    The result does not in general satisfy row 0; it is the solution that
    is square-summable (or dominated) at infinity. If the recurrence has no
    minimal solution a NoMinimalSolutionWarning is emitted and the result is
    flagged ``minimal=False``. If the start index would exceed
    ``max_depth``, the last iterate is returned with ``converged=False``.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    if seed not in ("zero", "asymptotic"):
        raise DomainError(f"unknown seed {seed!r}")
    pred = predict_asymptotics(rec.mu, rec.effective_lambda)
    minimal = pred.minimal_branch is not None
    if not minimal:
        warnings.warn(f"no minimal solution for mu={rec.mu}, parameter={rec.param}: "
                      "both branches have the same size", NoMinimalSolutionWarning, stacklevel=2)
    buffer = max(64, N // 4) if buffer is None else int(buffer)
    prev = None
    converged = False
    change = math.inf
    while True:
        k = N + buffer
        if k > max_depth and prev is not None:
            break
        d, p = rec.arrays(k + 1)
        if seed == "zero":
            s = 0j
        else:
            s = rec.tail_ratio(k + 1, d[k + 1], p[k + 1], d[k + 2])
        r = K.backward_ratios(d[:k + 2], p[:k + 1], complex(s))
        m, e = _ratios_to_sequence(r, N)
        used = k
        if prev is not None:
            pm, pe = prev
            with np.errstate(under="ignore", invalid="ignore", over="ignore"):
                ratio = m / pm * np.ldexp(1.0, e - pe)
            change = float(np.nanmax(np.abs(ratio - 1.0)))
            if change < tol:
                converged = True
                break
        prev = (m, e)
        buffer *= 2
    seq = SolutionSequence(m, e, Method.MILLER, rec, converged=converged, minimal=minimal,
                           info={"start": used, "seed": seed, "last_change": change})
    return seq


@dataclass(frozen=True)
class FitRecord:
    model: str
    coefficients: tuple
    rate: float
    residual: float
    window: tuple


def _window(seq, window):
    lo, hi = window
    if hi - lo < 100:
        raise DegenerateFitError("fit window must contain at least 100 indices")
    if lo < 0 or hi > seq.N:
        raise DomainError(f"window {window} outside 0..{seq.N}")
    return np.arange(lo, hi + 1)


def _lstsq(cols, y):
    a = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    res = float(np.sqrt(np.mean((a @ coef - y) ** 2)))
    return coef, res


def fit_growth(seq: SolutionSequence, window, model=None) -> FitRecord:
    """Least-squares growth fit of a solution over ``window = (lo, hi)``.

    Models
    ------
    geometric
        log|C_n| = a + b n; ``rate`` is exp(b), the ratio modulus.
    critical
        log|C_n| = a + b sqrt(n) + c log n; ``rate`` is b.
    power
        log|C_n| = a + p log n; ``rate`` is p. For non-oscillating
        algebraic solutions.
    envelope
        log|Q_n| = a + q log n with Q_n = C_{n+1}^2 + 2 mu C_n C_{n+1} + C_n^2,
        the product of the two first-order factors of the frozen
        recurrence; ``rate`` is q/2, the envelope power of |C_n|. For
        oscillating solutions when mu < 1 and the parameter is real.

    The default is chosen from the regime of the recurrence.
    """
    n = _window(seq, window)
    if model is None:
        reg = regime(seq.recurrence.mu)
        if reg == "super":
            model = "geometric"
        elif reg == "critical":
            model = "critical"
        else:
            model = "envelope" if np.imag(seq.recurrence.param) == 0 else "power"
    if model == "envelope":
        if n[-1] == seq.N:
            n = n[:-1]
        vals, _ = seq.scaled(n[0], n[-1] + 1)
        c, c1 = vals[:-1], vals[1:]
        q = c1 * c1 + 2.0 * seq.recurrence.mu * c * c1 + c * c
        with np.errstate(divide="ignore"):
            y = np.log(np.abs(q))
    else:
        y = seq.log_abs()[n]
    if not np.all(np.isfinite(y)):
        raise DegenerateFitError("sequence underflowed, overflowed or vanished in the window")
    nf = n.astype(float)
    one = np.ones_like(nf)
    if model == "geometric":
        coef, res = _lstsq([one, nf], y)
        rate = math.exp(coef[1])
    elif model == "critical":
        coef, res = _lstsq([one, np.sqrt(nf), np.log(nf)], y)
        rate = coef[1]
    elif model == "power":
        coef, res = _lstsq([one, np.log(nf)], y)
        rate = coef[1]
    elif model == "envelope":
        coef, res = _lstsq([one, np.log(nf)], y)
        rate = coef[1] / 2.0
    else:
        raise DomainError(f"unknown model {model!r}")
    return FitRecord(model, tuple(float(c) for c in coef), float(rate), res,
                     (int(n[0]), int(n[-1])))


@dataclass(frozen=True)
class IdentityRecord:
    lhs: float
    rhs: float
    boundary: float
    tail: float
    relative_residual: float


def weighted_sum_identity_check(seq: SolutionSequence, N: int | None = None,
                                start: int | None = None) -> IdentityRecord:
    """Check sum_{n=start}^N |C_n|^2 Im P_n = -d_{N+1} Im(C_{N+1} conj C_N) + boundary.

    For a solution of every row (``start=0``) the boundary term vanishes.
    For a solution of rows n >= 1 only (e.g. from :func:`miller_minimal`)
    use ``start=1``; the boundary term is -d_1 Im(C_0 conj C_1).
    Everything is evaluated under one common power-of-two scale, so the
    returned sides are relative to that scale.
    """
    N = seq.N - 1 if N is None else int(N)
    if N + 1 > seq.N:
        raise DomainError("the sequence must extend to N+1")
    if start is None:
        start = 0 if seq.method is Method.FORWARD and seq.normalization != "initial pair" else 1
    c, _ = seq.scaled(0, N + 1)
    d, p = seq.recurrence.arrays(N + 1)
    lhs = float(np.sum(np.abs(c[start:N + 1]) ** 2 * p[start:N + 1].imag))
    tail = float(-d[N + 1] * (c[N + 1] * np.conj(c[N])).imag)
    boundary = float(-d[1] * (c[0] * np.conj(c[1])).imag) if start == 1 else 0.0
    rhs = tail + boundary
    scale = max(abs(lhs), abs(rhs))
    rel = abs(lhs - rhs) / scale if scale > 0 else 0.0
    return IdentityRecord(lhs, rhs, boundary, tail, rel)
