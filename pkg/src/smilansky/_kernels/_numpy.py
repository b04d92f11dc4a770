"""Reference kernels on numpy/scipy only.

Sturm counting and bisection are vectorized across shifts, tridiagonal
factorizations go to LAPACK ``?gttrf``/``?gttrs``, and the exponential
sweep is a first-order IIR filter. The two three-term recurrence kernels
are inherently sequential and run as plain loops.
"""
import numpy as np
from scipy.linalg import lapack
from scipy.signal import lfilter

_SCALE_EXP = 512
_BIG = 2.0 ** _SCALE_EXP
_SMALL = 2.0 ** -_SCALE_EXP
_GRAM_BIG = 2.0 ** 200
_GRAM_SMALL = 2.0 ** -200


def sturm_counts(diag, off2, shifts, pivmin):
    shifts = np.asarray(shifts, dtype=float)
    q = diag[0] - shifts
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(np.int64)
    for k in range(1, diag.shape[0]):
        q = diag[k] - shifts - off2[k - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def sturm_count(diag, off2, shift, pivmin):
    return int(sturm_counts(diag, off2, np.array([shift]), pivmin)[0])


def bisect_eigenvalues(diag, off2, indices, lo, hi, tol, pivmin):
    indices = np.asarray(indices)
    a = np.full(indices.shape[0], float(lo))
    b = np.full(indices.shape[0], float(hi))
    while True:
        width = b - a
        active = width > tol + 2.0 * 2.2e-16 * np.maximum(np.abs(a), np.abs(b))
        c = 0.5 * (a + b)
        active &= (c != a) & (c != b)
        if not active.any():
            break
        above = sturm_counts(diag, off2, c[active], pivmin) > indices[active]
        ia = np.flatnonzero(active)
        b[ia[above]] = c[active][above]
        a[ia[~above]] = c[active][~above]
    return 0.5 * (a + b)


def _gttrf(dtype):
    return lapack.zgttrf if np.iscomplexobj(np.empty(0, dtype)) else lapack.dgttrf


def _gttrs(dtype):
    return lapack.zgttrs if np.iscomplexobj(np.empty(0, dtype)) else lapack.dgttrs


def gt_factor(dl, d, du):
    n = d.shape[0]
    if n == 1:
        info = 0 if d[0] == 0 else -1
        return dl.copy(), d.copy(), du.copy(), np.zeros(0, d.dtype), np.zeros(1, np.int64), info
    if n == 2:
        # the scipy wrapper cannot size du2 for n = 2; append a decoupled unit row
        z = np.zeros(1, dl.dtype)
        dl, du = np.concatenate((dl, z)), np.concatenate((du, z))
        d = np.concatenate((d, np.ones(1, d.dtype)))
    dl, d, du, du2, ipiv, info = _gttrf(d.dtype)(dl, d, du)
    ipiv = ipiv.astype(np.int64) - 1
    return dl, d, du, du2, ipiv, (info - 1 if info > 0 else -1)


def gt_solve(dl, d, du, du2, ipiv, b):
    if d.shape[0] == 1:
        return b / d[0]
    if d.shape[0] == b.shape[0] + 1:
        return gt_solve(dl, d, du, du2, ipiv, np.concatenate((b, np.zeros(1, b.dtype))))[:-1]
    dtype = np.result_type(d, b)
    x, _ = _gttrs(dtype)(dl.astype(dtype), d.astype(dtype), du.astype(dtype),
                         du2.astype(dtype), (ipiv + 1).astype(np.int32), b.astype(dtype))
    return x


def forward_scaled(d, diag, c0, c1, n_max):
    m = np.zeros(n_max + 1, dtype=np.complex128)
    e = np.zeros(n_max + 1, dtype=np.int64)
    prev, cur, expo = complex(c0), complex(c1), 0
    m[0] = prev
    if n_max >= 1:
        m[1] = cur
    for n in range(1, n_max):
        prev, cur = cur, -(diag[n] * cur + d[n] * prev) / d[n + 1]
        a = abs(cur)
        if a > _BIG:
            prev *= _SMALL
            cur *= _SMALL
            expo += _SCALE_EXP
        elif 0.0 < a < _SMALL:
            prev *= _BIG
            cur *= _BIG
            expo -= _SCALE_EXP
        m[n + 1] = cur
        e[n + 1] = expo
    return m, e


def backward_ratios(d, diag, seed):
    k = diag.shape[0] - 1
    r = np.empty(k + 1, dtype=np.complex128)
    r[0] = np.nan
    nxt = complex(seed)
    for n in range(k, 0, -1):
        den = diag[n] + d[n + 1] * nxt
        if den == 0:
            den = 1e-300
        nxt = -d[n] / den
        r[n] = nxt
    return r


def backward_ratio_first(d, diag, seed):
    return backward_ratios(d, diag, seed)[1]


def exp_sweep(q, inc):
    return lfilter(np.array([1.0 + 0j]), np.array([1.0 + 0j, -q]),
                   np.asarray(inc, dtype=np.complex128))


def pair_gram(d, diag, u0, u1, v0, v1, n_max, checkpoints):
    nc = checkpoints.shape[0]
    guu = np.zeros(nc)
    gvv = np.zeros(nc)
    guv = np.zeros(nc, dtype=np.complex128)
    suu = abs(u0) ** 2 + abs(u1) ** 2
    svv = abs(v0) ** 2 + abs(v1) ** 2
    suv = u0 * np.conj(v0) + u1 * np.conj(v1)
    up, uc, vp, vc = u0, u1, v0, v1
    ic = 0
    while ic < nc and checkpoints[ic] <= 2:
        guu[ic], gvv[ic], guv[ic] = suu, svv, suv
        ic += 1
    for n in range(1, n_max):
        un = -(diag[n] * uc + d[n] * up) / d[n + 1]
        vn = -(diag[n] * vc + d[n] * vp) / d[n + 1]
        up, uc, vp, vc = uc, un, vc, vn
        suu += abs(un) ** 2
        svv += abs(vn) ** 2
        suv += un * np.conj(vn)
        if max(abs(uc), abs(vc)) > _GRAM_BIG:
            up *= _GRAM_SMALL
            uc *= _GRAM_SMALL
            vp *= _GRAM_SMALL
            vc *= _GRAM_SMALL
            suu = suu * _GRAM_SMALL * _GRAM_SMALL
            svv = svv * _GRAM_SMALL * _GRAM_SMALL
            suv = suv * _GRAM_SMALL * _GRAM_SMALL
        while ic < nc and checkpoints[ic] == n + 2:
            guu[ic], gvv[ic], guv[ic] = suu, svv, suv
            ic += 1
    return guu, gvv, guv
