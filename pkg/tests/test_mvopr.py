from fractions import Fraction as F

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from mvdarboux.block_linalg import block_cholesky, identity_matrix, max_abs
from mvdarboux.graded_basis import GradedBasis
from mvdarboux.measures import BoxMeasure, DiscreteMeasure
from mvdarboux.mvopr import (
    MVOPRFamily,
    apply_poly_to_shift,
    build_family,
    build_jacobi,
    build_shift,
    commutator_violation,
    monomial_derivative_vector,
    monomial_vector,
    orthogonality_violation,
    polynomial_derivative_stack,
    shift_symmetry_violation,
    symmetry_violation,
    tridiagonal_violation,
)
from mvdarboux.poly import Direction, MPoly, parse_poly

BOX = BoxMeasure([(-1, 1), (-1, 1)])


@pytest.fixture(scope="module")
def box_family():
    return build_family(BOX, 5)


def monic_legendre(n):
    """Oracle: sympy's Legendre polynomial rescaled to leading coefficient one."""
    t = sympy.Symbol("x1")
    p = sympy.Poly(sympy.legendre(n, t), t)
    lead = p.LC()
    return MPoly(1, {m: F(int((c / lead).p), int((c / lead).q)) for m, c in p.terms()})


def test_polynomial_block_examples(box_family):
    assert box_family.polynomial_block(0) == [MPoly.constant(2, 1)]
    assert box_family.polynomial_block(1) == [parse_poly("x", 2), parse_poly("y", 2)]
    assert box_family.polynomial_block(2) == [parse_poly("x^2 - 1/3", 2), parse_poly("x*y", 2),
                                              parse_poly("y^2 - 1/3", 2)]


def test_polynomials_monic_by_blocks(box_family):
    basis = box_family.basis
    for k in range(box_family.degree + 1):
        for alpha, p in zip(basis.block(k), box_family.polynomial_block(k)):
            assert p.homogeneous_part(k) == MPoly.monomial(alpha)


def test_eval_stack_examples(box_family):
    assert list(box_family.eval_stack((0, 0), 0, 1)) == [1, 0, 0]
    assert list(box_family.eval_stack((F(3, 7), -2), 0, 0)) == [1]
    assert list(box_family.eval_stack((1, 1), 2, 2)) == [F(2, 3), 1, F(2, 3)]


def test_eval_stack_matches_polynomials(box_family):
    x = (F(-2, 5), F(7, 3))
    stack = box_family.eval_stack(x, 1, 4)
    assert list(stack) == [p(x) for p in box_family.polynomials(1, 4)]


def test_derivative_stack_two_paths(box_family):
    x = (F(1, 2), F(-3, 4))
    n = Direction.from_terms(2, 2, {(2, 0): 1, (1, 1): F(-2, 3)})
    a = box_family.derivative_stack(x, n, 0, 5)
    b = polynomial_derivative_stack(box_family.polynomials(0, 5), x, n)
    assert list(a) == b


def test_legendre_one_dimensional():
    fam = build_family(BoxMeasure([(-1, 1)]), 6)
    for n in range(7):
        assert fam.polynomial_block(n) == [monic_legendre(n)]


def test_product_measure_is_product_of_univariate(box_family):
    uni = build_family(BoxMeasure([(-1, 1)]), 5)
    lift = lambda p, axis: MPoly(2, {tuple(e if i == axis else 0 for i in range(2)): c
                                     for (e,), c in p.terms.items()})
    basis = box_family.basis
    for k in range(6):
        for (a, b), p in zip(basis.block(k), box_family.polynomial_block(k)):
            expected = lift(uni.polynomial_block(a)[0], 0) * lift(uni.polynomial_block(b)[0], 1)
            assert p == expected


def test_weighted_product_measure():
    w = parse_poly("(1 + x)*(2 - y)", 2)
    fam = build_family(BoxMeasure([(-1, 1), (0, 1)], w), 4)
    ux = build_family(BoxMeasure([(-1, 1)], parse_poly("1 + x", 1)), 4)
    uy = build_family(BoxMeasure([(0, 1)], parse_poly("2 - x", 1)), 4)
    for k in range(5):
        for (a, b), p in zip(fam.basis.block(k), fam.polynomial_block(k)):
            px = MPoly(2, {(e, 0): c for (e,), c in ux.polynomial_block(a)[0].terms.items()})
            py = MPoly(2, {(0, e): c for (e,), c in uy.polynomial_block(b)[0].terms.items()})
            assert p == px * py


def test_shift_examples():
    basis = GradedBasis(2, 3)
    lam = build_shift(basis)
    one = apply_poly_to_shift(MPoly.constant(2, 1), lam)
    assert (one.data == identity_matrix(basis).data).all()
    x = apply_poly_to_shift(parse_poly("x", 2), lam)
    assert (x.data == lam[0].data).all()
    assert set(lam[0].data.flatten()) <= {0, 1}
    assert lam[0].block_band_violation(1, 1, basis.max_degree) == 0


@settings(max_examples=25, deadline=None)
@given(st.fractions(-3, 3, max_denominator=7), st.fractions(-3, 3, max_denominator=7))
def test_spectral_property(a, b):
    basis = GradedBasis(2, 5)
    q = parse_poly("(2 - x)*(2 - y)", 2)
    QL = apply_poly_to_shift(q, build_shift(basis))
    chi = monomial_vector(basis, (a, b))
    rows = basis.block_offsets[QL.valid_degree + 1]
    assert QL.valid_degree == 3
    assert max_abs(QL.data.dot(chi)[:rows] - q((a, b)) * chi[:rows]) == 0


def test_shift_direct_construction():
    """Q(Lambda) row beta must hold the coefficients of x^beta Q."""
    basis = GradedBasis(2, 5)
    q = parse_poly("x^2 - 3*x*y + 1/2*y - 2", 2)
    QL = apply_poly_to_shift(q, build_shift(basis))
    for i, beta in enumerate(basis.multiindex_at):
        if sum(beta) + q.degree <= basis.max_degree:
            assert list(QL.data[i]) == (MPoly.monomial(beta) * q).to_vector(basis)


def test_shift_commute_and_symmetry(box_family):
    lam = build_shift(box_family.basis)
    assert commutator_violation(lam[0], lam[1]) == 0
    for l in lam:
        assert shift_symmetry_violation(l, box_family.G) == 0


def test_orthogonality(box_family):
    assert orthogonality_violation(box_family) == 0


def test_jacobi_structure(box_family):
    J = build_jacobi(box_family)
    H = box_family.chol.H_matrix()
    for j in J:
        assert j.valid_degree == box_family.degree - 1
        assert tridiagonal_violation(j) == 0
        assert symmetry_violation(j, H) == 0
    assert commutator_violation(J[0], J[1]) == 0


def test_jacobi_legendre_recurrence():
    fam = build_family(BoxMeasure([(-1, 1)]), 7)
    J = build_jacobi(fam)[0]
    for k in range(1, J.valid_degree + 1):
        from_h = fam.H[k][0, 0] / fam.H[k - 1][0, 0]
        assert J.data[k, k - 1] == from_h == F(k * k, 4 * k * k - 1)
        assert J.data[k, k] == 0
        assert J.data[k - 1, k] == 1


def test_identity_moment_matrix_gives_shifts():
    basis = GradedBasis(2, 4)
    fam = MVOPRFamily(None, block_cholesky(identity_matrix(basis)))
    lam = build_shift(basis)
    for j, l in zip(build_jacobi(fam), lam):
        rows = basis.block_offsets[j.valid_degree + 1]
        assert max_abs(j.data[:rows] - l.data[:rows]) == 0


def test_jacobi_general_measure():
    pts = [(F(i, 4) - 1, F(i * i % 7, 3) - 1) for i in range(9)] + [(F(1, 9), F(-2, 5)), (F(3, 11), F(1, 13))]
    pts += [(F(-i, 5), F(i, 6)) for i in range(1, 12)]
    fam = build_family(DiscreteMeasure(pts, [1] * len(pts)), 4)
    H = fam.chol.H_matrix()
    for j in build_jacobi(fam):
        assert tridiagonal_violation(j) == 0
        assert symmetry_violation(j, H) == 0


def test_float_family_close_to_exact():
    exact = build_family(BOX, 5)
    approx = build_family(BOX, 5, "float")
    assert np.allclose(approx.S.data.astype(float), exact.S.data.astype(float), atol=1e-12)


def test_monomial_derivative_closed_form():
    basis = GradedBasis(2, 3)
    v = monomial_derivative_vector(basis, (2, 5), Direction.partial(2, 0))
    # 1 | x y | x2 xy y2 | x3 x2y xy2 y3, differentiated in x at (2, 5)
    assert list(v) == [0, 1, 0, 4, 5, 0, 12, 20, 25, 0]


def test_listing_and_dict(box_family):
    lines = box_family.listing()
    assert lines[0] == "P[0, 0] = 1"
    doc = box_family.to_dict()
    assert doc["polynomials"] == lines
