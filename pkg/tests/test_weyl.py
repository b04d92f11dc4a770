import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smilansky.errors import ConvergenceError, DomainError
from smilansky.jacobi import build, eigenvalues_sym, j0, resolvent_element_00
from smilansky.special import d_entry
from smilansky.weyl import (D1, Verdict, resolvent_00, subordinacy_probe, tau_density, weyl_m)

off_axis = st.tuples(st.floats(-6, 6), st.floats(0.01, 4), st.booleans()).map(
    lambda t: complex(t[0], t[1] if t[2] else -t[1]))


def test_cross_check_with_truncation():
    g = resolvent_element_00(build(j0(1.5), 0, 10 ** 4), 1j)
    assert 1 / (1.5 - 1j + D1 * weyl_m(1.5, 1j)) == pytest.approx(g, rel=1e-8)


@pytest.mark.parametrize("mu", [0.5, 1.0, 1.5])
def test_conjugation(mu):
    z = 0.7 + 0.3j
    assert weyl_m(mu, z.conjugate()) == pytest.approx(np.conj(weyl_m(mu, z)), rel=1e-12)


def test_sub_critical_value_is_finite_and_matches_closed_truncation():
    mu, z = 0.5, 0.3 + 0.1j
    m = weyl_m(mu, z)
    assert np.isfinite(m)
    # the ratio convention puts Im m on the opposite side of Im z
    assert m.imag < 0
    g = resolvent_element_00(build(j0(mu), 0, 10 ** 4), z, closure="asymptotic")
    assert (1 / g - mu + z) / D1 == pytest.approx(m, rel=1e-10)


@pytest.mark.parametrize("mu", [0.3, 0.5, 1.0, 1.5])
@given(z=off_axis)
def test_sign_property(mu, z):
    m = weyl_m(mu, z)
    assert m.imag * z.imag < 0
    assert resolvent_00(mu, z).imag * z.imag > 0


def test_zero_tail_converges_for_super_critical():
    a = weyl_m(1.5, 0.2 + 0.5j, tail="zero")
    b = weyl_m(1.5, 0.2 + 0.5j)
    assert a == pytest.approx(b, rel=1e-12)


def test_depth_cap():
    with pytest.raises(ConvergenceError):
        weyl_m(0.5, 0.3 + 1e-3j, tail="zero", depth=8, max_depth=64)


def test_strip_matches_truncated_block():
    mu, z, m = 1.2, 0.4 + 0.8j, 3
    g = resolvent_element_00(build(j0(mu), m, 5000), z)
    assert resolvent_00(mu, z, strip=m) == pytest.approx(g, rel=1e-10)


def test_tau_below_spectrum_at_critical():
    est = tau_density(1.0, -1.0)
    assert abs(est.tau) < 1e-4


def test_tau_positive_sub_critical():
    est = tau_density(0.5, 0.0)
    assert est.trusted and est.tau > 0


def test_tau_vanishes_between_eigenvalues():
    mu = 1.5
    ev = eigenvalues_sym(build(j0(mu), 0, 2000), -1, 10).values
    E = 0.5 * (ev[0] + ev[1])
    vals = [tau_density(mu, E, (e, e / 2)).extrapolated for e in (1e-2, 1e-3, 1e-4)]
    assert abs(vals[-1]) < abs(vals[0])
    assert abs(vals[-1]) < 1e-6


def test_ladder_validation():
    with pytest.raises(DomainError):
        tau_density(1.0, 0.5, (1e-3, 1e-2))
    with pytest.raises(DomainError):
        tau_density(1.0, 0.5, (1e-2,))
    with pytest.raises(DomainError):
        tau_density(1.0, 0.5, (1e-2, 1e-9))


@pytest.mark.parametrize("mu, expected", [(0.5, 1.0), (1.0, 1.0)])
def test_measure_mass(mu, expected):
    E = np.linspace(-20, 20, 401)
    tau = np.array([tau_density(mu, e).tau for e in E])
    mass = np.trapezoid(tau, E)
    assert mass <= expected + 1e-6
    assert mass == pytest.approx(expected, rel=0.05)


def test_subordinacy_verdicts():
    assert subordinacy_probe(0.5, 0.7).verdict is Verdict.NO_SUBORDINATE
    assert subordinacy_probe(1.5, 0.7).verdict is Verdict.SUBORDINATE_FOUND


def test_subordinacy_degenerate():
    r = subordinacy_probe(0.5, 0.7, initial=((1.0, 2.0), (1.0, 2.0)))
    assert r.verdict is Verdict.INCONCLUSIVE and r.degenerate
    np.testing.assert_array_equal(r.norm_ratio_curve, 1.0)


def test_subordinacy_gram_ratio_independent_of_basis():
    a = subordinacy_probe(0.5, -1.3, L_max=10 ** 4)
    b = subordinacy_probe(0.5, -1.3, L_max=10 ** 4, initial=((1.0, 1.0), (1.0, -2.0)))
    np.testing.assert_allclose(a.gram_ratio_curve[-5:], b.gram_ratio_curve[-5:], rtol=0.5)
    assert a.verdict is b.verdict is Verdict.NO_SUBORDINATE


def test_d1_constant():
    assert D1 == d_entry(1)
