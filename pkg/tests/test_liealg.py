import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poissonlab import liealg as la
from poissonlab.errors import CompatibilityError, DimensionError

seeds = st.integers(min_value=0, max_value=2**32 - 1)
E = np.eye(3)


def change_basis(g: la.LieAlgebra, P: np.ndarray, name: str = "") -> la.LieAlgebra:
    """Constants of ``g`` in the basis ``f_i = sum_a P[a, i] e_a``."""
    Pinv = np.linalg.inv(P)
    c = np.einsum("ka,abc,bi,cj->kij", Pinv, g.constants, P, P)
    c = 0.5 * (c - np.swapaxes(c, 1, 2))
    return la.LieAlgebra(name or g.name, c)


def change_bialgebra(b: la.LieBialgebra, P: np.ndarray) -> la.LieBialgebra:
    # the dual basis transforms by the inverse transpose
    return la.LieBialgebra(change_basis(b.g, P), change_basis(b.gstar, np.linalg.inv(P).T))


def well_conditioned(rng, n=3):
    while True:
        P = rng.normal(size=(n, n))
        if np.linalg.cond(P) < 20:
            return P


# -- brackets ----------------------------------------------------------------------------------


def test_so3_basis_bracket():
    np.testing.assert_array_equal(la.bracket(la.so3(), E[0], E[1]), E[2])


def test_sl2_h_e():
    np.testing.assert_array_equal(la.bracket(la.sl2(), E[0], E[1]), 2 * E[1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.sampled_from(sorted(la.CATALOG)))
def test_self_bracket_vanishes(x, name):
    assert np.all(la.bracket(la.get_algebra(name), x, x) == 0.0)


def test_non_antisymmetric_constants_rejected():
    c = np.zeros((2, 2, 2))
    c[0, 0, 1] = 1.0
    with pytest.raises(ValueError):
        la.LieAlgebra("bad", c)


def test_from_triples_index_check():
    with pytest.raises(ValueError):
        la.from_triples("bad", 2, [(0, 2, 1, 1.0)])


# -- Jacobi ----------------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(la.CATALOG))
def test_catalog_satisfies_jacobi(name):
    g = la.get_algebra(name)
    assert la.antisymmetry_defect(g) == 0.0
    assert la.jacobi_residual(g) < 1e-12


def test_broken_algebra_residual_is_one():
    # cyclic sum for (e1, e2, e3) leaves exactly e3's coefficient 1
    assert la.jacobi_residual(la.broken()) == pytest.approx(1.0, abs=1e-15)


def test_abelian_jacobi_zero():
    assert la.jacobi_residual(la.abelian(4)) == 0.0


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(["so3", "sl2", "h3"]))
def test_jacobi_invariant_under_basis_change(seed, name):
    g = la.get_algebra(name)
    P = well_conditioned(np.random.default_rng(seed))
    assert la.jacobi_residual(change_basis(g, P)) < 1e-9


def test_opposite_negates_bracket():
    g = la.so3()
    np.testing.assert_array_equal(la.bracket(g.opposite(), E[0], E[1]), -E[2])


# -- coadjoint -----------------------------------------------------------------------------------


def test_coadjoint_abelian_is_zero():
    np.testing.assert_array_equal(la.coadjoint_inf(la.abelian(3), [1, 2, 3], [4, 5, 6]), 0.0)


def test_coadjoint_so3_basis_value():
    # <ad*_{e3} eps1, e2> = -<eps1, [e3, e2]> = -<eps1, -e1> = +1
    np.testing.assert_array_equal(la.coadjoint_inf(la.so3(), E[2], E[0]), E[1])


@settings(max_examples=50, deadline=None)
@given(seeds, st.sampled_from(sorted(la.CATALOG)))
def test_coadjoint_defining_pairing(seed, name):
    g = la.get_algebra(name)
    x, phi, y = np.random.default_rng(seed).uniform(-1, 1, (3, 3))
    assert abs(la.coadjoint_inf(g, x, phi) @ y + phi @ la.bracket(g, x, y)) < 1e-14


# -- multivectors and the Schouten bracket ---------------------------------------------------------------


def test_basis_ordering_sign():
    a = la.Multivector.basis(3, 0, 1)
    b = la.Multivector.basis(3, 1, 0)
    np.testing.assert_array_equal(a.coeffs, -b.coeffs)
    assert la.Multivector.basis(3, 1, 1).norm_inf() == 0.0


def test_wedge_of_vectors():
    w = la.wedge(la.Multivector.vector(E[0]), la.Multivector.vector(E[2]))
    assert w.components() == {(0, 1): 0.0, (0, 2): 1.0, (1, 2): 0.0}


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_wedge_graded_commutative(seed):
    rng = np.random.default_rng(seed)
    x, y = (la.Multivector.vector(v) for v in rng.normal(size=(2, 4)))
    p = la.Multivector(2, 4, rng.normal(size=6))
    np.testing.assert_allclose(la.wedge(x, y).coeffs, -la.wedge(y, x).coeffs, atol=1e-14)
    np.testing.assert_allclose(la.wedge(x, p).coeffs, la.wedge(p, x).coeffs, atol=1e-14)
    # tensor round trip
    np.testing.assert_allclose(la.Multivector.from_tensor(p.to_tensor(), 4).coeffs, p.coeffs)


def test_schouten_expands_derivation_rule():
    g = la.so3()
    out = la.schouten(g, la.Multivector.vector(E[0]), la.Multivector.basis(3, 0, 1))
    np.testing.assert_allclose(out.coeffs, la.Multivector.basis(3, 0, 2).coeffs)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(sorted(la.CATALOG)))
def test_schouten_degree_one_is_bracket(seed, name):
    g = la.get_algebra(name)
    x, y = np.random.default_rng(seed).normal(size=(2, 3))
    out = la.schouten(g, la.Multivector.vector(x), la.Multivector.vector(y))
    np.testing.assert_allclose(out.coeffs, la.bracket(g, x, y), atol=1e-13)


def test_schouten_abelian_zero():
    g = la.abelian(3)
    out = la.schouten(g, la.Multivector.vector([1, 2, 3]), la.Multivector.basis(3, 0, 2))
    assert out.norm_inf() == 0.0


def test_schouten_unsupported_degree():
    with pytest.raises(DimensionError):
        la.schouten(la.so3(), la.Multivector.basis(3, 0, 1), la.Multivector.basis(3, 1, 2))


# -- dual differential and bialgebras -------------------------------------------------------------------------


def test_dual_differential_zero_for_abelian_dual():
    b = la.LieBialgebra(la.so3(), la.abelian(3))
    for v in E:
        assert la.ce_differential(b, la.Multivector.vector(v)).norm_inf() == 0.0


def test_dual_differential_two_dimensional_example():
    cbar = np.zeros((2, 2, 2))
    cbar[0, 0, 1], cbar[0, 1, 0] = 1.0, -1.0  # [eps1, eps2]_* = eps1
    b = la.LieBialgebra(la.abelian(2), la.LieAlgebra("g*", cbar))
    d = la.ce_differential(b, la.Multivector.vector([1.0, 0.0]))
    assert d.components() == {(0, 1): -1.0}


@pytest.mark.parametrize("b", [la.sl2_coboundary_bialgebra(), la.LieBialgebra(la.heisenberg(), la.so3())], ids=["sl2-coboundary", "h3+so3"])
def test_dual_differential_squares_to_zero(b):
    for v in E:
        dd = la.ce_differential(b, la.ce_differential(b, la.Multivector.vector(v)))
        assert dd.norm_inf() < 1e-12


def test_zero_cobracket_is_compatible():
    assert la.bialgebra_residual(la.LieBialgebra(la.sl2(), la.abelian(3))) == 0.0


def test_coboundary_cobracket_is_compatible():
    assert la.bialgebra_residual(la.sl2_coboundary_bialgebra()) < 1e-12


def test_mismatched_pair_detected():
    assert la.bialgebra_residual(la.LieBialgebra(la.so3(), la.so3())) > 0.5


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_bialgebra_residual_basis_invariant(seed):
    P = well_conditioned(np.random.default_rng(seed))
    b = change_bialgebra(la.sl2_coboundary_bialgebra(), P)
    assert la.bialgebra_residual(b) < 1e-9
    bad = change_bialgebra(la.LieBialgebra(la.so3(), la.so3()), P)
    assert la.bialgebra_residual(bad) > 1e-3


# -- Drinfel'd double -------------------------------------------------------------------------------------------------


def test_semidirect_double():
    d = la.drinfeld_double(la.LieBialgebra(la.so3(), la.abelian(3)))
    assert d.dim == 6
    assert la.jacobi_residual(d) < 1e-12
    # g* is an abelian ideal
    np.testing.assert_array_equal(d.constants[:, 3:, 3:], 0.0)


def test_coboundary_double():
    d = la.drinfeld_double(la.sl2_coboundary_bialgebra())
    assert la.jacobi_residual(d) < 1e-12
    rng = np.random.default_rng(11)
    assert la.pairing_invariance_residual(d, rng.uniform(-1, 1, (100, 3, 6))) < 1e-12


def test_double_refuses_incompatible_pair():
    with pytest.raises(CompatibilityError) as info:
        la.drinfeld_double(la.LieBialgebra(la.so3(), la.so3()))
    assert info.value.residual > 0.5


def test_coboundary_constants_satisfy_jacobi():
    gstar = la.sl2_coboundary_bialgebra().gstar
    assert la.jacobi_residual(gstar) < 1e-12
