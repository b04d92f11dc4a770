"""Weyl function of J0(mu) with row/column 0 removed, the spectral density
of e_0, and a subordinacy probe for the J0 eigenvalue recurrence.

Convention: ``weyl_m(mu, z)`` is the ratio C_1/C_0 of the square-summable
solution of rows n >= 1 of (J0(mu) - z) C = 0, so that

    ((J0(mu) - z)^{-1} e_0, e_0) = 1 / (mu - z + d_1 weyl_m(mu, z)).

With this normalization Im weyl_m and Im z have opposite signs.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import ConvergenceError, DomainError, HerglotzViolation
from .recurrence import Recurrence
from .special import d_entry

D1 = float(d_entry(1))
DEFAULT_LADDER = (1e-2, 1e-3, 1e-4)


def _cf_first_ratio(rec: Recurrence, depth: int, tail: str, strip=0):
    # descend from index strip+depth to the ratio C_{strip+1}/C_strip
    top = strip + depth
    d, p = rec.arrays(top + 1)
    if tail == "zero":
        seed = 0j
    else:
        seed = rec.tail_ratio(top + 1, d[top + 1], p[top + 1], d[top + 2])
    return complex(K.backward_ratio_first(d[strip:top + 2], p[strip:top + 1], complex(seed)))


def weyl_m(mu, z, depth=1024, rtol=1e-12, max_depth=2 ** 22, tail="asymptotic",
           full_output=False, strip=0):
    """Weyl function by backward continued-fraction descent.

    With ``strip = m`` the function belongs to J0(mu) with its first m
    rows and columns removed: it is the ratio C_{m+1}/C_m of the
    square-summable solution of the rows n >= m+1.

    The descent starts at ``depth`` and the depth doubles until two
    successive values agree to ``rtol``. ``tail='asymptotic'`` seeds the
    descent with an asymptotic expansion of the decaying ratio at the start
    index; ``tail='zero'`` is the plain finite continued fraction, which for
    mu <= 1 converges only algebraically in the depth.

    Raises
    ------
    ConvergenceError
        The depth would exceed ``max_depth``.
    HerglotzViolation
        Im m * Im z >= 0 for non-real z.
    """
    if not mu > 0:
        raise DomainError("mu must be positive")
    if depth < 1:
        raise DomainError("depth must be >= 1")
    if tail not in ("asymptotic", "zero"):
        raise DomainError(f"unknown tail {tail!r}")
    z = complex(z)
    rec = Recurrence.j0(mu, z)
    prev = _cf_first_ratio(rec, depth, tail, strip)
    while True:
        depth *= 2
        if depth > max_depth:
            raise ConvergenceError(f"continued fraction not stable to {rtol} "
                                   f"at depth {max_depth} (mu={mu}, z={z})")
        cur = _cf_first_ratio(rec, depth, tail, strip)
        if abs(cur - prev) <= rtol * abs(cur):
            break
        prev = cur
    if z.imag != 0 and not cur.imag * z.imag < 0:
        raise HerglotzViolation(f"Im m(z) has the wrong sign at z={z}: m={cur}")
    if full_output:
        return cur, depth
    return cur


def resolvent_00(mu, z, strip=0, **kw) -> complex:
    """Top-left resolvent entry of J0(mu) (rows >= ``strip``) from the
    Weyl function: 1 / (b_m - z + d_{m+1} m(z))."""
    z = complex(z)
    b = (2 * strip + 1) * mu
    return 1.0 / (b - z + float(d_entry(strip + 1)) * weyl_m(mu, z, strip=strip, **kw))


@dataclass(frozen=True)
class DensityEstimate:
    E: float
    tau: float
    eps_ladder: tuple
    stability: float
    trusted: bool
    extrapolated: float


def tau_density(mu, E, eps_ladder=DEFAULT_LADDER, stability_tol=0.05, strip=0,
                **kw) -> DensityEstimate:
    """Density of the spectral measure of e_0 for J0(mu) at ``E`` (for the
    operator with ``strip`` leading rows removed if given).

    Evaluates (1/pi) Im G00(E + i eps) down ``eps_ladder`` and extrapolates
    linearly in eps through the last two rungs. ``stability`` compares that
    value with the extrapolation through the two rungs before:
    |t_last - t_prev| / max(|t_last|, 1e-12). With only two rungs it falls
    back to the relative change of the raw values. The estimate is
    ``trusted`` when ``stability <= stability_tol``. A negative
    extrapolation is clipped to zero.
    """
    eps = [float(e) for e in eps_ladder]
    if len(eps) < 2:
        raise DomainError("eps ladder needs at least two rungs")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError("eps ladder must be strictly decreasing")
    if eps[-1] < 1e-8:
        raise DomainError("smallest eps must be >= 1e-8")
    raw = [resolvent_00(mu, complex(E, e), strip=strip, **kw).imag / math.pi for e in eps]
    def richardson(i):
        e1, e2, r1, r2 = eps[i - 1], eps[i], raw[i - 1], raw[i]
        return (e1 * r2 - e2 * r1) / (e1 - e2)

    extrap = richardson(len(eps) - 1)
    ref = richardson(len(eps) - 2) if len(eps) >= 3 else raw[-2]
    stability = abs(extrap - ref) / max(abs(extrap), 1e-12)
    return DensityEstimate(float(E), max(extrap, 0.0), tuple(zip(eps, raw)), stability,
                           stability <= stability_tol, extrap)


class Verdict(enum.Enum):
    NO_SUBORDINATE = "NoSubordinate"
    SUBORDINATE_FOUND = "SubordinateFound"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class SubordinacyReport:
    E: float
    cutoffs: np.ndarray
    norm_ratio_curve: np.ndarray
    gram_ratio_curve: np.ndarray
    verdict: Verdict
    degenerate: bool = False
    notes: list = field(default_factory=list)


def subordinacy_probe(mu, E, L_max=10 ** 5, initial=((1.0, 0.0), (0.0, 1.0)), rho=10.0,
                      points=41, gram_floor=1e-6) -> SubordinacyReport:
    """Compare two solutions of the J0 eigenvalue recurrence at real ``E``.

    The two solutions of rows n >= 1 start from the pairs in ``initial``.
    For cutoffs L up to ``L_max`` the report holds ||u||_L / ||v||_L and
    the Gram ratio sqrt(lambda_min / lambda_max) of the 2x2 Gram matrix of
    (u, v) truncated at L. Changing the initial pair moves the Gram ratio
    by at most the condition number of the change of basis, and it tends
    to 0 exactly when some combination is subordinate.

    Verdicts over the last decade of cutoffs:

    * NoSubordinate: Gram ratio >= 1/rho and norm ratio in [1/rho, rho];
    * SubordinateFound: Gram ratio at L_max below 1/rho, and either below
      its value at L_max/10 by at least a factor rho or under the
      resolution floor ``gram_floor`` (the ratio is computed from a
      determinant and cannot resolve values much below sqrt(eps));
    * Inconclusive otherwise, or when the initial pairs are dependent.
    """
    (u0, u1), (v0, v1) = initial
    cut = np.unique(np.geomspace(10, L_max, points).astype(np.int64))
    det = u0 * v1 - u1 * v0
    if abs(det) <= 1e-14 * math.hypot(abs(u0), abs(u1)) * math.hypot(abs(v0), abs(v1)):
        ones = np.ones(cut.size)
        return SubordinacyReport(float(E), cut, ones, np.zeros(cut.size), Verdict.INCONCLUSIVE,
                                 degenerate=True, notes=["initial data are linearly dependent"])
    rec = Recurrence.j0(mu, float(E))
    d, p = rec.arrays(int(cut[-1]) + 1)
    guu, gvv, guv = K.pair_gram(d, p, complex(u0), complex(u1), complex(v0), complex(v1),
                                int(cut[-1]), cut)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm_ratio = np.sqrt(guu / gvv)
        tr = guu + gvv
        det_g = np.maximum(guu * gvv - np.abs(guv) ** 2, 0.0)
        disc = np.sqrt(np.maximum(tr * tr / 4 - det_g, 0.0))
        lmax = tr / 2 + disc
        lmin = det_g / lmax
        gram = np.sqrt(lmin / lmax)
    last = cut >= cut[-1] / 10
    g_last = gram[last]
    r_last = norm_ratio[last]
    notes = []
    if np.all(g_last >= 1 / rho) and np.all((r_last >= 1 / rho) & (r_last <= rho)):
        verdict = Verdict.NO_SUBORDINATE
    elif g_last[-1] < 1 / rho and (g_last[-1] * rho <= g_last[0] or g_last[-1] <= gram_floor):
        verdict = Verdict.SUBORDINATE_FOUND
    else:
        verdict = Verdict.INCONCLUSIVE
        notes.append("ratio curves did not settle over the last decade")
    return SubordinacyReport(float(E), cut, norm_ratio, gram, verdict, notes=notes)
