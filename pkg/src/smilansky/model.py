"""Spectral statements about the full model operator.

Eigenvalues below 1/2 are the energies E for which J(E; mu) has a
square-summable kernel vector. They are located by two independent
routes on a truncation and then filtered by localization of the kernel
vector, which separates genuine eigenvalues from crossings produced by
the cutoff.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import DomainError, MethodDisagreement, SingularMatrixError, TruncationUnstable
from .jacobi import (Factorization, build, count_below, jlambda, j0, lowest_eigenvalues,
                     smallest_singular_value, solve)
from .recurrence import Recurrence
from .special import ModelParameters, regime
from .weyl import DEFAULT_LADDER, tau_density

THRESHOLD = 0.5


@dataclass
class PointSpectrumResult:
    params: ModelParameters
    eigenvalues: np.ndarray
    count: int
    truncation: int
    method_agreement: float
    crossings: np.ndarray = field(repr=False, default=None)
    tail_fractions: np.ndarray = field(repr=False, default=None)
    checked_truncation: int | None = None


def _count(mu, E, N):
    return count_below(build(jlambda(mu, E), 0, N), 0.0)


def _count_jumps(mu, N, lo, hi, tol):
    """Energies where the Sturm count of J_N(E) increases, by bisection."""
    c_lo, c_hi = _count(mu, lo, N), _count(mu, hi, N)
    out = []
    for k in range(c_lo, c_hi):
        a, b = lo, hi
        while b - a > tol:
            c = 0.5 * (a + b)
            if _count(mu, c, N) > k:
                b = c
            else:
                a = c
        out.append(0.5 * (a + b))
    return np.array(out), c_lo, c_hi


def _det_sign(mu, E, N):
    """Sign of C_N(E) for the solution of rows 0..N-1 with C_0 = 1; it
    vanishes exactly when det J_N(E) = 0."""
    rec = Recurrence.channel(mu, E)
    d, p = rec.arrays(N)
    c1 = -p[0] / d[1]
    m, _ = K.forward_scaled(d, p, 1.0 + 0j, complex(c1), N)
    return float(np.sign(m[N].real))


def _det_roots(mu, N, lo, hi, grid, tol):
    es = np.linspace(lo, hi, grid)
    signs = np.array([_det_sign(mu, e, N) for e in es])
    out = []
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
        a, b, sa = es[i], es[i + 1], signs[i]
        while b - a > tol:
            c = 0.5 * (a + b)
            sc = _det_sign(mu, c, N)
            if sc == sa:
                a = c
            else:
                b = c
        out.append(0.5 * (a + b))
    return np.array(out)


def kernel_tail_fraction(mu, E, N, iterations=4, seed=0):
    """Fraction of the squared norm of the (near) kernel vector of J_N(E)
    that lives on indices n >= N/2. Small values mean a localized vector."""
    op = build(jlambda(mu, E), 0, N)
    fac = None
    shift = 0.0
    for bump in (0.0, 1e-13, -1e-13, 1e-11):
        try:
            fac = Factorization(op, shift=bump)
            shift = bump
            break
        except SingularMatrixError:
            continue
    if fac is None:
        raise SingularMatrixError(-1, "could not factor near-singular truncation")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(N)
    for _ in range(iterations):
        v = fac.solve(v)
        v /= np.linalg.norm(v)
    w = np.abs(v) ** 2
    return float(w[N // 2:].sum() / w.sum())


def _locate(mu, N, grid, delta, tol):
    lo, hi = delta, THRESHOLD - delta
    jumps, c_lo, c_hi = _count_jumps(mu, N, lo, hi, tol)
    roots = _det_roots(mu, N, lo, hi, grid, tol)
    if jumps.size != roots.size:
        raise MethodDisagreement(f"Sturm count finds {jumps.size} crossings, determinant "
                                 f"scan finds {roots.size} (mu={mu}, N={N})")
    es = np.linspace(lo, hi, grid)
    counts = np.array([_count(mu, e, N) for e in es])
    if np.any(np.diff(counts) < 0):
        raise MethodDisagreement(f"Sturm count decreases in E (mu={mu}, N={N})")
    agree = float(np.max(np.abs(jumps - roots))) if jumps.size else 0.0
    return jumps, roots, agree


def point_spectrum(params: ModelParameters, N=4096, grid=2000, delta=1e-6, tol=1e-10,
                   localization_tol=1e-8, location_tol=1e-8) -> PointSpectrumResult:
    """Eigenvalues of the model operator in (0, 1/2).

    Route (a) bisects the jumps of the Sturm count of J_N(E) in E; route
    (b) scans the sign of the determinant (through the forward recurrence)
    on ``grid`` points and bisects each sign change. Both must report the
    same crossings; ``method_agreement`` is the largest distance between
    matched crossings. A crossing is an eigenvalue when the kernel vector
    of J_N(E) at it keeps less than ``localization_tol`` of its squared
    norm on n >= N/2. Everything is repeated at 2N.

    Raises
    ------
    MethodDisagreement
        The two routes find different numbers of crossings, or the count
        is not monotone in E.
    TruncationUnstable
        The eigenvalues at N and 2N differ in number or by more than
        ``location_tol``.
    """
    mu = params.mu
    results = []
    for n in (N, 2 * N):
        jumps, roots, agree = _locate(mu, n, grid, delta, tol)
        frac = np.array([kernel_tail_fraction(mu, e, n) for e in jumps])
        keep = frac < localization_tol
        results.append((jumps, roots, agree, frac, keep))
    (j1, _, a1, f1, k1), (j2, _, a2, _, k2) = results
    e1, e2 = j1[k1], j2[k2]
    if e1.size != e2.size or (e1.size and np.max(np.abs(e1 - e2)) > location_tol):
        raise TruncationUnstable(f"eigenvalues change from N={N} ({e1.size}) to "
                                 f"N={2 * N} ({e2.size}) at mu={mu}")
    if np.any((e1 <= 0) | (e1 >= THRESHOLD)):
        raise DomainError("eigenvalue outside (0, 1/2)")
    return PointSpectrumResult(params, e1, int(e1.size), N, max(a1, a2), j1, f1, 2 * N)


def counting_asymptotics(params: ModelParameters) -> float:
    """Leading-order number of eigenvalues below 1/2, 1 / (4 sqrt(2 (mu - 1)))."""
    mu = params.mu
    if mu <= 1 or regime(mu) == "critical":
        raise DomainError(f"counting asymptotics need mu > 1, got {mu}")
    return 1.0 / (4.0 * math.sqrt(2.0 * (mu - 1.0)))


@dataclass(frozen=True)
class MultiplicityMap:
    E: float
    base: int
    extra: int
    total: int | None
    boundary_flag: bool


def predicted_multiplicity(E, params: ModelParameters) -> MultiplicityMap:
    """Absolutely continuous multiplicity of the model operator at ``E``:
    2n from the free channels on (n - 1/2, n + 1/2), n >= 1, plus one
    extra channel from J0(mu) where its spectrum is absolutely continuous
    (everywhere for mu < 1, on (0, oo) for mu = 1, nowhere for mu > 1).
    """
    E = float(E)
    reg = regime(params.mu)
    half = E - 0.5
    on_half = half >= 0 and half == math.floor(half)
    boundary = on_half or (reg == "critical" and E == 0.0)
    base = 0 if E < 0.5 else 2 * int(math.floor(E + 0.5))
    extra = 1 if reg == "sub" or (reg == "critical" and E > 0) else 0
    return MultiplicityMap(E, base, extra, None if boundary else base + extra, boundary)


@dataclass
class DeficiencyReport:
    mu: float
    sizes: tuple
    sigma_min: tuple
    floor: float
    passed: bool


def deficiency_probe(mu, N_list=(256, 512, 1024, 2048, 4096, 8192, 16384), floor_tol=1e-3,
                     max_drop=0.5) -> DeficiencyReport:
    """Smallest singular values of J(i; mu) truncations as N grows.

    Passes when the minimum over N stays above ``floor_tol`` and the value
    at the largest N is at least ``max_drop`` times the value at the
    smallest N (no kernel forming).
    """
    sig = tuple(smallest_singular_value(build(jlambda(mu, 1j), 0, n)) for n in N_list)
    floor = min(sig)
    ok = floor > floor_tol and sig[-1] >= max_drop * sig[0]
    return DeficiencyReport(float(mu), tuple(N_list), sig, floor, bool(ok))


@dataclass
class NormDecayReport:
    mu: float
    taus: tuple
    norms: tuple
    slope: float
    passed: bool


def norm_decay_probe(mu, taus=(10.0, 100.0, 1000.0, 10000.0), N=10000,
                     max_slope=-0.45) -> NormDecayReport:
    """Fit log ||J(-i tau; mu)^{-1} e_0|| against log tau."""
    e0 = np.zeros(N)
    e0[0] = 1.0
    norms = []
    for t in taus:
        x, _ = solve(build(jlambda(mu, -1j * t), 0, N), e0)
        norms.append(float(np.linalg.norm(x)))
    slope = float(np.polyfit(np.log(taus), np.log(norms), 1)[0])
    return NormDecayReport(float(mu), tuple(taus), tuple(norms), slope, slope <= max_slope)


@dataclass
class StrippedReport:
    mu: float
    strip: int
    E_grid: tuple
    positive_base: tuple
    positive_stripped: tuple
    discrete_converged: bool | None
    passed: bool


def _positive(est, pos_tol):
    return bool(est.trusted and est.tau > pos_tol)


def stripped_spectrum_check(mu, m, E_grid, eps_ladder=DEFAULT_LADDER, pos_tol=1e-8,
                            N=2048, k=20, eig_tol=1e-8) -> StrippedReport:
    """Compare where the spectral density is (trusted) positive for J0(mu)
    and for J0(mu) with its first ``m`` rows and columns removed.

    For mu > 1 the lowest ``k`` eigenvalues of the stripped operator must
    also agree between truncations N and 2N to ``eig_tol``.
    """
    if not 0 <= m <= 8:
        raise DomainError("strip must be in 0..8")
    base = tuple(_positive(tau_density(mu, e, eps_ladder), pos_tol) for e in E_grid)
    strp = tuple(_positive(tau_density(mu, e, eps_ladder, strip=m), pos_tol) for e in E_grid)
    disc = None
    if regime(mu) == "super":
        a = lowest_eigenvalues(build(j0(mu), m, N), k).values
        b = lowest_eigenvalues(build(j0(mu), m, 2 * N), k).values
        disc = bool(np.max(np.abs(a - b)) <= eig_tol)
    ok = base == strp and disc is not False
    return StrippedReport(float(mu), int(m), tuple(float(e) for e in E_grid), base, strp, disc, ok)
