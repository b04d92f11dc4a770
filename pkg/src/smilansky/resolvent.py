"""Resolvent of the model operator in the oscillator basis, checked as a
residual statement.

For F = sum f_n(x) chi_n(q) the resolvent U = sum u_n(x) chi_n(q) is

    u_n = u0_n + C_n eta_n,    C_n = X_n - J_n / (2 y_n),

where u0_n is the free (whole-line) resolvent of -d^2/dx^2 + n + 1/2 - Lambda,
J_n = int eta_n f_n, and X solves J(Lambda; mu) X = mu J. With these C_n the
values u_n(0) = X_n (n + 1/2)^(1/4) satisfy the matching conditions

    mu (u_n'(0+) - u_n'(0-)) = sqrt(n+1) u_{n+1}(0) + sqrt(n) u_{n-1}(0).

:func:`assemble_resolvent` builds u_n on a grid and measures how well the
ODEs, the matching conditions and continuity at 0 hold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _kernels as K
from .errors import DomainError, QuadratureError
from .jacobi import build, jlambda, solve
from .special import ModelParameters, SpectralPoint, eta, hermite_table, y_entry, zeta

_GAUSS = {p: leggauss(p) for p in (8, 12)}


@dataclass
class GridFunctionBundle:
    """Components on a uniform grid of [-X, X] whose node 0 is doubled.

    ``x`` is ``[-X, ..., -h, 0 | 0, h, ..., X]``: the first ``K+1`` entries
    form the left branch and the last ``K+1`` the right branch, so the two
    one-sided limits at 0 sit at indices ``K`` and ``K+1``.
    ``values`` has shape ``(M, 2K+2)``. ``sources`` optionally keeps the
    callables the values came from (used for quadrature).
    """

    x: np.ndarray
    values: np.ndarray
    h: float
    X: float
    sources: list | None = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def K(self) -> int:
        return (self.x.size - 2) // 2

    def left(self):
        return self.values[:, :self.K + 1]

    def right(self):
        return self.values[:, self.K + 1:]

    @classmethod
    def from_callables(cls, funcs, X=20.0, h=1e-3):
        x = doubled_grid(X, h)
        vals = np.array([np.asarray(f(x), dtype=complex) for f in funcs])
        return cls(x, vals, h, X, list(funcs))


def doubled_grid(X, h):
    k = int(round(X / h))
    if not math.isclose(k * h, X, rel_tol=1e-12):
        raise DomainError("X must be an integer multiple of h")
    half = h * np.arange(k + 1)
    return np.concatenate((-half[::-1], half))


def _cells(X, h):
    k = int(round(X / h))
    nodes = h * np.arange(-k, k + 1)
    return nodes


def _cell_integrals(f, nodes, kernel_right, kernel_left, qtol):
    """For each cell [a, b] return int e^{-zeta (b - t)} f and
    int e^{-zeta (t - a)} f (through ``kernel_*`` of the offset), by Gauss
    rules of order 8 and 12; their disagreement is the error estimate."""
    a, b = nodes[:-1], nodes[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    res = []
    for p in (8, 12):
        xi, w = _GAUSS[p]
        t = mid[:, None] + half[:, None] * xi[None, :]
        ft = np.asarray(f(t), dtype=complex)
        fr = (ft * kernel_right(b[:, None] - t) * w) @ np.ones(p) * half
        fl = (ft * kernel_left(t - a[:, None]) * w) @ np.ones(p) * half
        res.append((fr, fl))
    (r8, l8), (r12, l12) = res
    scale = max(np.abs(r12).max(), np.abs(l12).max(), 1e-300)
    err = max(np.abs(r8 - r12).max(), np.abs(l8 - l12).max()) / scale
    if err > qtol:
        raise QuadratureError(f"cell quadrature orders 8 and 12 differ by {err:.2e}")
    return r12, l12


def free_resolvent_component(n, lam, f, X=20.0, h=1e-3, qtol=1e-10):
    """Whole-line solution of -u'' + (n + 1/2 - Lambda) u = f that decays
    at infinity, on the doubled grid of [-X, X].

    u(x) = (1 / 2 zeta) [int_{-X}^x e^{-zeta (x-t)} f + int_x^X e^{-zeta (t-x)} f]
    evaluated by two exponential sweeps over cell integrals. ``f`` is a
    vectorized callable assumed negligible outside [-X, X].
    """
    lam = SpectralPoint.of(lam)
    z = complex(zeta(n, lam))
    nodes = _cells(X, h)
    ker = lambda s: np.exp(-z * s)
    inc_r, inc_l = _cell_integrals(f, nodes, ker, ker, qtol)
    q = complex(np.exp(-z * h))
    fwd = np.concatenate(([0j], K.exp_sweep(q, np.ascontiguousarray(inc_r))))
    bwd = np.concatenate((K.exp_sweep(q, np.ascontiguousarray(inc_l[::-1]))[::-1], [0j]))
    u = (fwd + bwd) / (2 * z)
    k = nodes.size // 2
    return np.concatenate((u[:k + 1], u[k:]))


def channel_projection(n, lam, f, X=20.0, h=1e-3, qtol=1e-10):
    """J_n = int eta_n(t; Lambda) f(t) dt (bilinear, no conjugation)."""
    lam = SpectralPoint.of(lam)
    z = complex(zeta(n, lam))
    a = (n + 0.5) ** 0.25
    nodes = _cells(X, h)
    left = nodes[:-1] < 0
    # e^{-zeta |t|} factorizes over each cell relative to its endpoint nearer to 0
    kr = lambda s: np.exp(-z * s)
    r, l = _cell_integrals(f, nodes, kr, kr, qtol)
    # cell [x_k, x_k+1] left of 0: e^{-zeta|t|} = e^{-zeta |x_k+1|} e^{-zeta (x_k+1 - t)}
    total = np.sum(r[left] * np.exp(-z * np.abs(nodes[1:][left])))
    total += np.sum(l[~left] * np.exp(-z * np.abs(nodes[:-1][~left])))
    return a * total


_D1_RIGHT = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def one_sided_derivatives(bundle: GridFunctionBundle):
    """(u'(0-), u'(0+)) per component from fourth-order one-sided stencils."""
    k, h = bundle.K, bundle.h
    right = bundle.values[:, k + 1:k + 6] @ _D1_RIGHT / h
    left = -(bundle.values[:, k - 4:k + 1][:, ::-1] @ _D1_RIGHT) / h
    return left, right


@dataclass
class ResolventCheckReport:
    ode_residual: float
    matching_residual: float
    continuity_residual: float
    rhs_norm: float
    solve_residual: float = 0.0
    tail_ratio: float = 0.0
    components: int = 0
    X_coefficients: np.ndarray = field(default=None, repr=False)


def _ode_residual(bundle, lam, rhs_vals):
    k, h = bundle.K, bundle.h
    worst = 0.0
    for n in range(bundle.M):
        c = n + 0.5 - lam.value
        for sl in (slice(0, k + 1), slice(k + 1, 2 * k + 2)):
            u = bundle.values[n, sl]
            f = rhs_vals[n, sl]
            upp = (u[:-2] - 2 * u[1:-1] + u[2:]) / (h * h)
            r = -upp + c * u[1:-1] - f[1:-1]
            scale = max(np.abs(f).max(), np.abs(c * u).max(), 1e-300)
            worst = max(worst, float(np.abs(r).max() / scale))
    return worst


def assemble_resolvent(params: ModelParameters, lam, F: GridFunctionBundle, N_jacobi=None,
                       closure="asymptotic", qtol=1e-10):
    """Apply the resolvent of the model operator at ``lam`` to ``F``.

    ``F`` must carry its source callables (see
    :meth:`GridFunctionBundle.from_callables`); components n < F.M are
    the nonzero ones. The output has F.M + 1 components, the last one
    carrying the correction alone, so that the matching condition can be
    checked for every n < F.M.

    Residuals are relative: the ODE defect (second differences away from 0)
    against max(|f_n|, |(n + 1/2 - Lambda) u_n|) per component; the
    matching defect against the largest term of any matching equation;
    continuity as |u_n(0+) - u_n(0-)| against max |u_n(0)|.

    ``closure`` selects how the Jacobi system is truncated (see
    :func:`smilansky.jacobi.solve`).
    """
    lam = SpectralPoint.of(lam)
    mu = params.mu
    M = F.M
    if M > 64:
        raise DomainError("at most 64 source components")
    if F.sources is None:
        raise DomainError("F needs its source callables for quadrature")
    N_jacobi = 4 * M if N_jacobi is None else int(N_jacobi)
    if N_jacobi < 4 * M:
        raise DomainError("N_jacobi must be >= 4 M")
    X, h, x = F.X, F.h, F.x
    u0 = np.array([free_resolvent_component(n, lam, F.sources[n], X, h, qtol) for n in range(M)])
    Jn = np.array([channel_projection(n, lam, F.sources[n], X, h, qtol) for n in range(M)])
    rhs = np.zeros(N_jacobi, dtype=complex)
    rhs[:M] = mu * Jn
    Xc, sres = solve(build(jlambda(mu, lam), 0, N_jacobi), rhs, closure=closure)
    m_out = M + 1
    C = Xc[:m_out].copy()
    C[:M] -= Jn / (2.0 * y_entry(np.arange(M), lam))
    vals = np.zeros((m_out, x.size), dtype=complex)
    vals[:M] = u0
    for n in range(m_out):
        vals[n] += C[n] * eta(n, x, lam)
    out = GridFunctionBundle(x, vals, h, X)
    rhs_vals = np.zeros_like(vals)
    rhs_vals[:M] = F.values
    k = out.K
    u_left0, u_right0 = vals[:, k], vals[:, k + 1]
    dl, dr = one_sided_derivatives(out)
    u_at0 = 0.5 * (u_left0 + u_right0)
    n = np.arange(M)
    lhs = mu * (dr[:M] - dl[:M])
    up = np.sqrt(n + 1) * u_at0[1:M + 1]
    down = np.sqrt(n) * np.concatenate(([0j], u_at0[:M - 1]))
    scale = max(np.abs(lhs).max(), np.abs(up).max(), np.abs(down).max(), 1e-300)
    matching = float(np.abs(lhs - up - down).max() / scale)
    cont = float(np.abs(u_right0 - u_left0).max() / max(np.abs(u_at0).max(), 1e-300))
    report = ResolventCheckReport(
        ode_residual=_ode_residual(out, lam, rhs_vals),
        matching_residual=matching,
        continuity_residual=cont,
        rhs_norm=float(np.abs(F.values).max()),
        solve_residual=sres,
        tail_ratio=float(np.abs(Xc[-1]) / max(np.abs(Xc).max(), 1e-300)),
        components=m_out,
        X_coefficients=Xc,
    )
    return out, report


def grid_convergence_order(params, lam, funcs, X=20.0, h=1e-3, **kw):
    """Observed order of the ODE residual under h -> h/2."""
    r1 = assemble_resolvent(params, lam, GridFunctionBundle.from_callables(funcs, X, h), **kw)[1]
    r2 = assemble_resolvent(params, lam, GridFunctionBundle.from_callables(funcs, X, h / 2), **kw)[1]
    return math.log2(r1.ode_residual / r2.ode_residual), r1, r2


@dataclass(frozen=True)
class TransmissionRecord:
    residual: float
    scale: float
    relative_residual: float
    tail_bound: float


def transmission_reduction_check(M, q_grid, mu=1.0, seed=0, coefficients=None,
                                 perturb_index=None, perturb_by=1.0) -> TransmissionRecord:
    """Check that matching data for the oscillator components reproduce the
    transmission condition U_x(0+, q) - U_x(0-, q) = alpha q U(0, q).

    Values a_n = u_n(0), n < M, are random (or ``coefficients``); the jumps
    are set from the matching conditions, j_n = (sqrt(n+1) a_{n+1} + sqrt(n)
    a_{n-1}) / mu for n <= M, and both sides are summed as Hermite series on
    ``q_grid`` with alpha = sqrt(2) / mu. ``perturb_index`` adds
    ``perturb_by`` to one jump (a negative control). ``tail_bound`` is the
    size of the neglected part of q U(0, q), which is zero here since the
    jump series is carried to index M.
    """
    if not 0 <= M <= 60:
        raise DomainError("M must be in 0..60")
    q = np.asarray(q_grid, dtype=float)
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(M) if coefficients is None else np.asarray(coefficients, dtype=float)
    if a.shape != (M,):
        raise DomainError("coefficients must have length M")
    ap = np.concatenate((a, [0.0, 0.0]))
    n = np.arange(M + 1)
    j = (np.sqrt(n + 1) * ap[1:M + 2] + np.sqrt(n) * np.concatenate(([0.0], ap[:M]))) / mu
    if perturb_index is not None:
        j[perturb_index] += perturb_by
    chi = hermite_table(M + 1, q)
    U0 = a @ chi[:M] if M else np.zeros_like(q)
    jump = j @ chi[:M + 1]
    alpha = math.sqrt(2.0) / mu
    rhs = alpha * q * U0
    res = float(np.abs(jump - rhs).max())
    scale = float(max(np.abs(rhs).max(), np.abs(jump).max()))
    return TransmissionRecord(res, scale, res / scale if scale > 0 else res, 0.0)
