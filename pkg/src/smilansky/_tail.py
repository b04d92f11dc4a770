"""Tail ratios R_n = C_n / C_{n-1} of the decaying solution of the model
recurrences, used to close continued fractions and truncated systems.

Two estimates are available. The frozen root solves the quadratic obtained
by freezing the coefficients at n. The series estimate expands R_n in
powers of t = n^(-1/2) and solves the Riccati equation

    d_{n+1} R_{n+1} R_n + P_n R_n + d_n = 0

order by order (Gauss-Newton on the truncated coefficient system). Half
powers are needed at mu = 1 where the two characteristic roots coincide.
"""
import math

import numpy as np

from . import _kernels as K
from .special import d_entry, regime, y_entry

SERIES_ORDER = 10
_L = SERIES_ORDER + 3


def frozen_tail_ratio(d_cur, b, d_next, side=1):
    """Decaying root r of ``d_next r^2 + b r + d_cur = 0``.

    When the two roots have equal modulus (oscillatory regime, real ``b``)
    the root is the limit from the side ``Im b -> 0-`` for ``side > 0`` and
    ``0+`` otherwise.
    """
    b = complex(b)
    disc = np.sqrt(complex(b * b - 4.0 * d_cur * d_next))
    if (b.conjugate() * disc).real < 0:
        disc = -disc
    q = -0.5 * (b + disc)
    if q == 0:
        return 0j
    r1, r2 = q / d_next, d_cur / q
    a1, a2 = abs(r1), abs(r2)
    if abs(a1 - a2) > 1e-9 * max(a1, a2):
        return r1 if a1 < a2 else r2
    if (r1.imag < 0) == (side > 0):
        return r1
    return r2


# truncated power series in t, stored as coefficient arrays of length _L

def _mul(a, b):
    return np.convolve(a, b)[:_L]


def _pow1p(a, p):
    """(a)^p for a series with a[0] = 1."""
    b = np.zeros(_L, dtype=complex)
    b[0] = 1.0
    for k in range(1, _L):
        j = np.arange(1, k + 1)
        b[k] = np.sum(((p + 1) * j - k) * a[j] * b[k - j]) / k
    return b


def _tshift(a, k):
    """t^k a(t)."""
    out = np.zeros(_L, dtype=complex)
    out[k:] = a[:_L - k]
    return out


def _poly(*coef):
    a = np.zeros(_L, dtype=complex)
    a[:len(coef)] = coef
    return a


_ONE_T2 = _poly(1, 0, 1)
_D0 = _pow1p(_poly(1, 0, 0, 0, -0.25), 0.25)                      # d_n / n
_D1 = _mul(_ONE_T2, _pow1p(_poly(1) - 0.25 * _tshift(_pow1p(_ONE_T2, -2), 4),
                           0.25))                                 # d_{n+1} / n
_SHIFT = [_pow1p(_ONE_T2, -k / 2) for k in range(_L)]             # (1 + t^2)^(-k/2)


def diag_series(kind, mu, param):
    """P_n / n as a series in t."""
    if kind == "j0":
        return _poly(2 * mu, 0, mu - param)
    # 2 mu sqrt((n + 1/2)(n + 1/2 - Lambda)) / n
    inner = _mul(_poly(1, 0, 0.5), _poly(1, 0, 0.5 - param))
    return 2 * mu * _pow1p(inner, 0.5)


def _residual(r, pser):
    shifted = np.zeros(_L, dtype=complex)
    for k in range(r.size):
        shifted += r[k] * _tshift(_SHIFT[k], k)
    rr = np.zeros(_L, dtype=complex)
    rr[:r.size] = r
    return _mul(_mul(_D1, shifted), rr) + _mul(pser, rr) + _D0


def ratio_series(kind, mu, param, branch_guess):
    """Coefficients r_0..r_M of R_n = sum r_k n^(-k/2), or None if the
    Gauss-Newton iteration does not settle."""
    m = SERIES_ORDER
    pser = diag_series(kind, mu, complex(param))
    r = np.zeros(m + 1, dtype=complex)
    r[:len(branch_guess)] = branch_guess
    neq = m + 2
    for _ in range(60):
        f = _residual(r, pser)[:neq]
        jac = np.empty((neq, m + 1), dtype=complex)
        for k in range(m + 1):
            h = 1e-7 * max(1.0, abs(r[k]))
            rp = r.copy()
            rp[k] += h
            jac[:, k] = (_residual(rp, pser)[:neq] - f) / h
        step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        r = r + step
        if np.max(np.abs(step)) < 1e-14 * max(1.0, np.max(np.abs(r))):
            break
    if not np.all(np.isfinite(r)) or np.max(np.abs(_residual(r, pser)[:neq])) > 1e-8:
        return None
    return r


def _guess(kind, mu, param):
    lam = param / mu if kind == "j0" else param
    reg = regime(mu)
    if reg == "critical":
        delta = 2 * np.sqrt(complex(-lam))
        if delta.real < 0:
            delta = -delta
        return [-1.0, delta / 2, -delta * delta / 8 + 0.25]
    s = np.sqrt(complex(mu * mu - 1))
    a1 = -mu * (1 + lam)
    roots = (-mu + s, -mu - s)
    powers = [(a1 * l - 1) / (2 * mu * l + 2) for l in roots]
    if reg == "super":
        i = 0 if abs(roots[0]) < abs(roots[1]) else 1
    elif lam.imag == 0:
        return None
    else:
        # the branch with the smaller real power decays
        i = 0 if powers[0].real < powers[1].real else 1
    return [roots[i], 0.0, roots[i] * powers[i]]


_cache = {}


def _diag(kind, mu, param, n):
    if kind == "j0":
        return 2.0 * mu * (n + 0.5) - param
    return 2.0 * mu * np.asarray(y_entry(n, complex(param)), dtype=complex)


def _series_start(r, n, cap=2 ** 22):
    while n <= cap:
        terms = np.abs(r * n ** (-0.5 * np.arange(r.size)))
        if terms[-1] + terms[-2] < 1e-15 * abs(r[0]):
            return n
        n *= 2
    return None


def tail_ratio(kind, mu, param, n, d_cur, b, d_next, side=1):
    """Best available estimate of R_n for the decaying solution.

    Where the series is accurate at ``n`` it is summed directly; otherwise
    it is summed at the first n' = 2^k n where it is, and the exact
    recurrence is run backward from n' to n (stable for the decaying
    solution). ``d_cur``, ``b``, ``d_next`` are d_n, P_n, d_{n+1} for the
    frozen-root fallback, used when there is no decaying branch (real
    parameter with mu < 1) or when the series does not converge.
    """
    key = (kind, float(mu), complex(param))
    if key not in _cache:
        guess = _guess(kind, mu, complex(param))
        _cache[key] = None if guess is None else ratio_series(kind, mu, complex(param), guess)
        if len(_cache) > 4096:
            _cache.clear()
    r = _cache[key]
    if r is not None:
        top = _series_start(r, n)
        if top is not None:
            seed = complex(np.sum(r * (top + 1) ** (-0.5 * np.arange(r.size))))
            if top == n:
                return complex(np.sum(r * n ** (-0.5 * np.arange(r.size))))
            idx = np.arange(n - 1, top + 2)
            d = np.ascontiguousarray(d_entry(idx), dtype=float)
            p = np.ascontiguousarray(_diag(kind, mu, param, idx[:-1]), dtype=complex)
            return complex(K.backward_ratio_first(d, p, seed))
    return frozen_tail_ratio(d_cur, b, d_next, side)
