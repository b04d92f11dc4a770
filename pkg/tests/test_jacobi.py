import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smilansky.errors import BranchCutError, NotSymmetricError, SingularMatrixError
from smilansky.jacobi import (build, count_below, eigenvalues_sym, j0, jlambda, lowest_eigenvalues,
                              resolvent_element_00, smallest_singular_value, solve)
from smilansky.special import d_entry, y_entry
from smilansky.weyl import resolvent_00

mus = st.floats(0.2, 3.0)


def test_build_j0_entries():
    op = build(j0(1.5), 0, 3)
    np.testing.assert_allclose(op.diagonal(), [1.5, 4.5, 7.5])
    np.testing.assert_allclose(op.off_diagonal(), [0.930605, 1.968000], rtol=1e-5)
    assert op.is_real


def test_jlambda_at_zero_is_j0():
    a = build(jlambda(0.8, 0.0), 0, 50)
    b = build(j0(0.8), 0, 50)
    np.testing.assert_allclose(a.diagonal(), b.diagonal(), rtol=1e-15)
    np.testing.assert_array_equal(a.off_diagonal(), b.off_diagonal())


def test_strip_is_lower_block():
    m, n = 3, 40
    full = build(j0(1.2), 0, n + m).to_dense()
    strip = build(j0(1.2), m, n)
    assert strip.diagonal()[0] == pytest.approx(7 * 1.2)
    np.testing.assert_array_equal(strip.to_dense(), full[m:, m:])


def test_jlambda_real_below_cut_is_real_symmetric():
    op = build(jlambda(1.1, 0.3), 0, 20)
    assert op.is_real
    assert not build(jlambda(1.1, 0.3 + 1e-3j), 0, 20).is_real


def test_build_propagates_branch_cut():
    with pytest.raises(BranchCutError):
        build(jlambda(1.0, 2.0), 0, 10)
    build(jlambda(1.0, 2.0), 2, 10)


@given(st.floats(0.1, 3), st.integers(0, 2000),
       st.complex_numbers(max_magnitude=100).filter(lambda z: z.imag > 1e-9))
def test_dissipative_diagonal(mu, n, lam):
    assert (2 * mu * y_entry(n, lam)).imag < 0


def test_eigenvalues_small_cases():
    assert eigenvalues_sym(build(j0(0.7), 0, 1)).values == pytest.approx([0.7])
    a = build(j0(1.3), 0, 60)
    ref = np.linalg.eigvalsh(a.to_dense())
    got = eigenvalues_sym(a, tol=1e-12).values
    np.testing.assert_allclose(got, ref, atol=1e-9)


def test_eigenvalues_window():
    a = build(j0(0.6), 0, 200)
    ref = np.linalg.eigvalsh(a.to_dense())
    got = eigenvalues_sym(a, -3.0, 2.0).values
    np.testing.assert_allclose(got, ref[(ref >= -3) & (ref < 2)], atol=1e-9)


def test_complex_operator_rejected_by_symmetric_routines():
    op = build(jlambda(1.0, 1j), 0, 10)
    with pytest.raises(NotSymmetricError):
        eigenvalues_sym(op)
    with pytest.raises(NotSymmetricError):
        count_below(op, 0.0)


def test_j0_positive_definite_above_critical():
    op = build(j0(1.5), 0, 2000)
    assert lowest_eigenvalues(op, 1).values[0] > 0
    assert count_below(op, 0.0) == 0


@pytest.mark.parametrize("mu", [1.2, 1.5, 2.0])
def test_lowest_eigenvalues_converge(mu):
    a = lowest_eigenvalues(build(j0(mu), 0, 2048), 20).values
    b = lowest_eigenvalues(build(j0(mu), 0, 4096), 20).values
    assert np.all(np.diff(a) > 0)
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_count_below_trivial_cases():
    op = build(j0(0.9), 0, 1)
    assert count_below(op, 0.8) == 0
    assert count_below(op, 1.0) == 1


def test_count_below_matches_enumeration(rng):
    for _ in range(100):
        mu = rng.uniform(0.3, 2.5)
        n = int(rng.integers(1, 120))
        t = rng.uniform(-20, 60)
        op = build(j0(mu), int(rng.integers(0, 4)), n)
        ref = np.linalg.eigvalsh(op.to_dense())
        assert count_below(op, t) == np.sum(ref < t)
        assert count_below(op, t) == eigenvalues_sym(op, -math.inf, t).values.size


def test_solve_consistency(rng):
    op = build(jlambda(0.8, -1 + 0.5j), 0, 300)
    e0 = np.zeros(300, dtype=complex)
    e0[0] = 1
    x, res = solve(op, op.matvec(e0))
    np.testing.assert_allclose(x, e0, atol=1e-12)
    assert res < 1e-14


def test_solve_vs_dense(rng):
    op = build(jlambda(0.9, 0.4 + 0.3j), 2, 50)
    b = rng.normal(size=50) + 1j * rng.normal(size=50)
    x, res = solve(op, b)
    np.testing.assert_allclose(x, np.linalg.solve(op.to_dense(), b), rtol=1e-11)
    assert res < 1e-13


def test_solve_singular():
    op = build(jlambda(1.0, 0.0), 0, 1)
    with pytest.raises(SingularMatrixError):
        solve(op, np.ones(1), shift=1.0)


def test_resolvent_element_small():
    assert resolvent_element_00(build(j0(1.3), 0, 1), 0.2 + 1j) == pytest.approx(
        1 / (1.3 - 0.2 - 1j))


def test_resolvent_element_matches_continued_fraction():
    mu, z = 1.5, 1j
    g = resolvent_element_00(build(j0(mu), 0, 10 ** 4), z)
    assert g == pytest.approx(resolvent_00(mu, z), rel=1e-8)


@given(mus, st.floats(-5, 5), st.floats(0.01, 5))
def test_resolvent_element_herglotz(mu, x, y):
    assert resolvent_element_00(build(j0(mu), 0, 400), complex(x, y)).imag > 0


def test_asymptotic_closure_beats_cutoff():
    mu, z = 0.5, 0.3 + 0.1j
    ref = resolvent_00(mu, z)
    cut = resolvent_element_00(build(j0(mu), 0, 4096), z)
    closed = resolvent_element_00(build(j0(mu), 0, 4096), z, closure="asymptotic")
    assert abs(closed - ref) < 1e-10 * abs(ref)
    assert abs(cut - ref) > 1e3 * abs(closed - ref)


def test_smallest_singular_value():
    assert smallest_singular_value(build(j0(0.8), 0, 1)) == pytest.approx(0.8)
    op = build(jlambda(0.7, 1j), 0, 40)
    ref = np.linalg.svd(op.to_dense(), compute_uv=False).min()
    assert smallest_singular_value(op) == pytest.approx(ref, rel=1e-8)


def test_smallest_singular_value_stays_away_from_zero():
    vals = [smallest_singular_value(build(jlambda(0.7, 1j), 0, n)) for n in (256, 1024, 4096)]
    assert min(vals) > 0.5


def test_norm_bound_decay():
    N = 10 ** 4
    e0 = np.zeros(N)
    e0[0] = 1
    taus = np.array([10.0, 1e2, 1e3, 1e4])
    norms = [np.linalg.norm(solve(build(jlambda(0.8, -1j * t), 0, N), e0)[0]) for t in taus]
    slope = np.polyfit(np.log(taus), np.log(norms), 1)[0]
    assert slope <= -0.45


def test_off_diagonal_positive():
    assert np.all(build(j0(1.0), 5, 100).off_diagonal() > 0)
    assert build(j0(1.0), 5, 100).off_diagonal()[0] == pytest.approx(d_entry(6))
