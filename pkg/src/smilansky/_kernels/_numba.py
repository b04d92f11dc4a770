"""Compiled kernels. Every function here has a twin in ``_numpy`` with the
same signature and the same results up to rounding."""
import numpy as np
from numba import njit

_SCALE_EXP = 512
_BIG = 2.0 ** _SCALE_EXP
_SMALL = 2.0 ** -_SCALE_EXP
# squared magnitudes are accumulated in pair_gram
_GRAM_BIG = 2.0 ** 200
_GRAM_SMALL = 2.0 ** -200


@njit(cache=True, nogil=True)
def sturm_count(diag, off2, shift, pivmin):
    n = diag.shape[0]
    count = 0
    q = diag[0] - shift
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for k in range(1, n):
        q = diag[k] - shift - off2[k - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True, nogil=True)
def sturm_counts(diag, off2, shifts, pivmin):
    out = np.empty(shifts.shape[0], dtype=np.int64)
    for i in range(shifts.shape[0]):
        out[i] = sturm_count(diag, off2, shifts[i], pivmin)
    return out


@njit(cache=True, nogil=True)
def bisect_eigenvalues(diag, off2, indices, lo, hi, tol, pivmin):
    """Eigenvalues with the given ascending indices, all inside [lo, hi]."""
    out = np.empty(indices.shape[0])
    for i in range(indices.shape[0]):
        k = indices[i]
        a = lo
        b = hi
        while b - a > tol + 2.0 * 2.2e-16 * max(abs(a), abs(b)):
            c = 0.5 * (a + b)
            if c == a or c == b:
                break
            if sturm_count(diag, off2, c, pivmin) > k:
                b = c
            else:
                a = c
        out[i] = 0.5 * (a + b)
    return out


@njit(cache=True, nogil=True)
def gt_factor(dl, d, du):
    """LU factorization with partial pivoting of a tridiagonal matrix
    (the LAPACK ``gttrf`` algorithm). Inputs are copied."""
    n = d.shape[0]
    dl = dl.copy()
    d = d.copy()
    du = du.copy()
    du2 = np.zeros(max(n - 2, 0), dtype=d.dtype)
    ipiv = np.arange(n)
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] != 0:
                fact = dl[i] / d[i]
                dl[i] = fact
                d[i + 1] = d[i + 1] - fact * du[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = temp - fact * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            ipiv[i] = i + 1
    info = -1
    for i in range(n):
        if d[i] == 0:
            info = i
            break
    return dl, d, du, du2, ipiv, info


@njit(cache=True, nogil=True)
def gt_solve(dl, d, du, du2, ipiv, b):
    n = d.shape[0]
    x = b.copy()
    for i in range(n - 1):
        if ipiv[i] == i:
            x[i + 1] = x[i + 1] - dl[i] * x[i]
        else:
            temp = x[i]
            x[i] = x[i + 1]
            x[i + 1] = temp - dl[i] * x[i]
    x[n - 1] = x[n - 1] / d[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
    return x


@njit(cache=True, nogil=True)
def forward_scaled(d, diag, c0, c1, n_max):
    """Run d[n+1] C[n+1] + diag[n] C[n] + d[n] C[n-1] = 0 upward from
    (C0, C1). Returns mantissas and base-2 exponents, C[n] = m[n] 2**e[n]."""
    m = np.zeros(n_max + 1, dtype=np.complex128)
    e = np.zeros(n_max + 1, dtype=np.int64)
    prev = c0
    cur = c1
    expo = 0
    m[0] = c0
    if n_max >= 1:
        m[1] = c1
    for n in range(1, n_max):
        nxt = -(diag[n] * cur + d[n] * prev) / d[n + 1]
        prev = cur
        cur = nxt
        a = abs(cur)
        if a > _BIG:
            prev *= _SMALL
            cur *= _SMALL
            expo += _SCALE_EXP
        elif a < _SMALL and a != 0.0:
            prev *= _BIG
            cur *= _BIG
            expo -= _SCALE_EXP
        m[n + 1] = cur
        e[n + 1] = expo
    return m, e


@njit(cache=True, nogil=True)
def backward_ratios(d, diag, seed):
    """Ratios R[n] = C[n]/C[n-1], n = K..1, from the rows n >= 1 with the
    tail value R[K+1] = seed. ``diag`` has length K+1, ``d`` length K+2."""
    k = diag.shape[0] - 1
    r = np.empty(k + 1, dtype=np.complex128)
    r[0] = np.nan
    nxt = seed
    for n in range(k, 0, -1):
        den = diag[n] + d[n + 1] * nxt
        if den == 0:
            den = 1e-300
        nxt = -d[n] / den
        r[n] = nxt
    return r


@njit(cache=True, nogil=True)
def backward_ratio_first(d, diag, seed):
    k = diag.shape[0] - 1
    nxt = seed
    for n in range(k, 0, -1):
        den = diag[n] + d[n + 1] * nxt
        if den == 0:
            den = 1e-300
        nxt = -d[n] / den
    return nxt


@njit(cache=True, nogil=True)
def exp_sweep(q, inc):
    out = np.empty(inc.shape[0], dtype=np.complex128)
    acc = 0.0 + 0.0j
    for k in range(inc.shape[0]):
        acc = q * acc + inc[k]
        out[k] = acc
    return out


@njit(cache=True, nogil=True)
def pair_gram(d, diag, u0, u1, v0, v1, n_max, checkpoints):
    """Propagate two solutions with a shared scale and return the partial
    Gram entries (uu, vv, uv) summed over n < L for each checkpoint L."""
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
        guu[ic] = suu
        gvv[ic] = svv
        guv[ic] = suv
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
            guu[ic] = suu
            gvv[ic] = svv
            guv[ic] = suv
            ic += 1
    return guu, gvv, guv
