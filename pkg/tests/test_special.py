import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial.hermite import hermgauss

from smilansky.errors import BranchCutError, DomainError, HermiteUnderflowWarning
from smilansky.special import (Location, ModelParameters, SpectralPoint, alpha_from_mu, d_entry,
                               eta, eta_jump, eta_norm_sq, hermite_chi, hermite_table,
                               mu_from_alpha, psi_entry, regime, y_entry, zeta)

# 30-digit mpmath evaluations, frozen
D1 = 0.930604859102099598941218746983
D2 = 1.96798967126543041853922720428
ZETA0_I = 0.899453719973933636130613791812 - 0.555892970251421171992048047898j
Y0_I = 0.636009824757034482126211230869 - 0.393075688878711643034779292921j
ETA_1_1_0 = 0.325179287677789749717062041656
MU_13 = 1.08785658644084230807011656457
CHI0_0 = 0.751125544464942482858703004776
PSI3 = 0.158755088282999917180838034026 - 0.108031456121053722441674282926j
CHI5_13 = -0.399391462813750734573320503893
CHI40_2 = 0.145960242060810098479658525285

off_real = st.complex_numbers(min_magnitude=1e-3, max_magnitude=50, allow_nan=False,
                              allow_infinity=False).filter(lambda z: abs(z.imag) > 1e-6)


def test_d_entry_values():
    assert d_entry(0) == 0.0
    assert d_entry(1) == pytest.approx(D1, rel=1e-15)
    assert d_entry(2) == pytest.approx(D2, rel=1e-15)
    assert d_entry(2) == pytest.approx(1.968000, rel=1e-5)
    np.testing.assert_allclose(d_entry(np.arange(3)), [0, D1, D2], rtol=1e-15)


def test_d_entry_rejects_negative():
    with pytest.raises(DomainError):
        d_entry(-1)


def test_zeta_values():
    assert zeta(0, 0) == pytest.approx(math.sqrt(0.5))
    assert zeta(3, 2) == pytest.approx(math.sqrt(1.5))
    z = zeta(0, 1j)
    assert z == pytest.approx(ZETA0_I, rel=1e-15)
    assert z * z == pytest.approx(0.5 - 1j, rel=1e-15)
    assert z.real > 0 and z.imag < 0


def test_y_entry_values():
    assert y_entry(0, 1j) == pytest.approx(Y0_I, rel=1e-15)
    n = np.arange(50)
    np.testing.assert_array_equal(y_entry(n, 0), n + 0.5)
    assert y_entry(5, -100j).imag > 0


def test_psi_entry():
    assert psi_entry(7, 0) == 0
    assert psi_entry(3, 1 + 2j) == pytest.approx(PSI3, rel=1e-13)
    n = 10 ** 4
    assert n * psi_entry(n, 1).real == pytest.approx(-0.125, rel=1e-2)
    lam = 1j
    direct = -(lam ** 2) / (4 * y_entry(0, lam) + 4 * (0.5 - lam / 2))
    assert psi_entry(0, lam) == pytest.approx(direct, rel=1e-15)


@pytest.mark.parametrize("lam", [1.0, 0.3 + 0.7j, -2 - 1j])
def test_psi_tail_law(lam):
    errs = [abs(n * psi_entry(n, lam) + lam ** 2 / 8) for n in 2 ** np.arange(8, 21)]
    assert errs[-1] < 1e-5
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_psi_quotient_matches_difference_in_extended_precision():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    for lam in (0.3 + 0.2j, -1.5 + 2j, 0.25):
        for n in range(0, 101, 7):
            L = mp.mpc(lam)
            ref = mp.sqrt((n + 0.5) * (n + 0.5 - L)) - (n + 0.5 - L / 2)
            got = psi_entry(n, lam)
            assert abs(got - complex(ref)) <= 1e-10 * abs(complex(ref))


def test_eta_values():
    assert eta(0, 0.0, 0.3 + 0.1j) == pytest.approx(0.5 ** 0.25)
    assert eta(1, 1.0, 0) == pytest.approx(ETA_1_1_0, rel=1e-14)
    assert eta(1, 1.0, 0) == pytest.approx(0.325190, rel=1e-4)
    assert eta(2, -1.3, 1j) == eta(2, 1.3, 1j)


def test_eta_jump_matches_finite_difference():
    n, lam, h = 2, 0.4 + 0.3j, 1e-6
    e0 = eta(n, 0.0, lam)
    fd = ((eta(n, h, lam) - e0) - (e0 - eta(n, -h, lam))) / h
    assert eta_jump(n, lam) == pytest.approx(fd, rel=1e-5)


def test_eta_norm_matches_quadrature():
    x = np.linspace(-60, 60, 600001)
    for n, lam in ((0, 1j), (4, -1 + 0.5j), (2, 0.2)):
        w = np.abs(eta(n, x, lam)) ** 2
        quad = np.trapezoid(w, x)
        assert eta_norm_sq(n, lam) == pytest.approx(quad, rel=1e-6)


@pytest.mark.parametrize("lam", [1j, 0.2, -3 + 0.1j])
def test_eta_norm_bounded_in_n(lam):
    v = eta_norm_sq(np.arange(1, 10 ** 5), lam)
    assert v.min() > 0.5 and v.max() < 5


def test_branch_cut_rejected():
    with pytest.raises(BranchCutError):
        zeta(0, 0.5)
    with pytest.raises(BranchCutError):
        y_entry(np.arange(5), 3.0)
    with pytest.raises(BranchCutError):
        eta(1, 0.0, 2.0)
    # below the cut of channel 3 but on the cut of channel 2
    zeta(3, 3.0)
    with pytest.raises(BranchCutError):
        zeta(2, 3.0)


def test_spectral_point_location():
    assert SpectralPoint.of(1j).location is Location.UPPER
    assert SpectralPoint.of(-1j).location is Location.LOWER
    assert SpectralPoint.of(0.3).location is Location.REAL_BELOW_CUT
    assert SpectralPoint.of(1.5).location is Location.ON_CUT
    assert SpectralPoint.of(1.7).n0 == 2
    assert SpectralPoint.of(0.2).n0 == 0
    assert SpectralPoint.of(1j).conjugate() == SpectralPoint(0.0, -1.0)


@given(off_real, st.integers(0, 1000))
def test_zeta_branch(lam, n):
    z = zeta(n, lam)
    assert z.real > 0
    assert z.imag * lam.imag < 0
    w = n + 0.5 - lam
    assert abs(z * z - w) <= 1e-13 * abs(w)


@given(off_real, st.integers(0, 1000))
def test_conjugation_symmetry(lam, n):
    c = lam.conjugate()
    assert zeta(n, c) == np.conj(zeta(n, lam))
    assert y_entry(n, c) == np.conj(y_entry(n, lam))
    assert psi_entry(n, c) == pytest.approx(np.conj(psi_entry(n, lam)), rel=1e-14, abs=1e-300)
    assert eta(n, 0.7, c) == pytest.approx(np.conj(eta(n, 0.7, lam)), rel=1e-14, abs=1e-300)


def test_hermite_values():
    assert hermite_chi(0, 0.0) == pytest.approx(CHI0_0, rel=1e-15)
    assert hermite_chi(1, 0.0) == 0.0
    assert hermite_chi(5, 1.3) == pytest.approx(CHI5_13, rel=1e-13)
    assert hermite_chi(40, 2.0) == pytest.approx(CHI40_2, rel=1e-12)


def test_hermite_recurrence_residual():
    q = np.linspace(-8, 8, 401)
    t = hermite_table(60, q)
    n = np.arange(1, 60)[:, None]
    res = np.sqrt(n + 1) * t[2:] - math.sqrt(2) * q * t[1:-1] + np.sqrt(n) * t[:-2]
    assert np.abs(res).max() < 1e-12


def test_hermite_orthonormality():
    # Gauss-Hermite with weight e^{-q^2} integrates chi_m chi_n e^{q^2} exactly
    x, w = hermgauss(80)
    t = hermite_table(30, x) * np.exp(x * x / 2)
    gram = (t * w) @ t.T
    np.testing.assert_allclose(gram, np.eye(31), atol=1e-8)


def test_hermite_orthonormality_on_window():
    q = np.linspace(-20, 20, 8001)
    t = hermite_table(30, q)
    gram = np.trapezoid(t[:, None, :] * t[None, :, :], q, axis=-1)
    np.testing.assert_allclose(gram, np.eye(31), atol=1e-8)


def test_hermite_large_argument_does_not_underflow_whole_table():
    t = hermite_table(1200, np.array([45.0]))
    assert t[-1, 0] != 0.0
    with pytest.warns(HermiteUnderflowWarning):
        hermite_table(3, np.array([100.0]))


def test_parameter_map():
    assert mu_from_alpha(math.sqrt(2)) == pytest.approx(1.0, rel=1e-15)
    assert mu_from_alpha(1.3) == pytest.approx(MU_13, rel=1e-15)
    for m in (1, 2, 3, 5):
        assert mu_from_alpha(m / math.sqrt(2), m) == pytest.approx(1.0, rel=1e-15)
    assert alpha_from_mu(mu_from_alpha(0.77)) == pytest.approx(0.77, rel=1e-15)
    with pytest.raises(DomainError):
        mu_from_alpha(0.0)


def test_model_parameters():
    p = ModelParameters(1.0)
    assert p.mu == pytest.approx(math.sqrt(2))
    assert not p.borderline
    assert ModelParameters(math.sqrt(2)).borderline
    assert ModelParameters(2.0).borderline
    assert ModelParameters.from_mu(1.5).mu == pytest.approx(1.5, rel=1e-15)
    with pytest.raises(DomainError):
        ModelParameters(-1.0)


def test_regime():
    assert regime(0.5) == "sub"
    assert regime(1.0) == "critical"
    assert regime(mu_from_alpha(math.sqrt(2))) == "critical"
    assert regime(1.00125) == "super"
