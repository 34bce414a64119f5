import json
import random
from fractions import Fraction as F

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from mvdarboux.block_linalg import (
    BlockMatrix,
    SingularBlock,
    SingularLeadingBlock,
    as_mode,
    block_cholesky,
    build_moment_matrix,
    cholesky_from_dict,
    cholesky_to_dict,
    det,
    identity,
    identity_matrix,
    invert_unitriangular,
    last_quasi_determinant,
    max_abs,
    slice_S,
)
from mvdarboux.graded_basis import GradedBasis
from mvdarboux.measures import BoxMeasure, DiscreteMeasure
from mvdarboux.poly import parse_poly

BOX = BoxMeasure([(-1, 1), (-1, 1)])


def fr(rows):
    return as_mode(np.array(rows, dtype=object), "rational")


def gram_schmidt_H(L):
    """Oracle: Gram-Schmidt of monomials against lower-degree ones under the box inner product."""
    x, y = sympy.symbols("x y")
    basis = GradedBasis(2, L)
    inner = lambda p, q: sympy.integrate(p * q, (x, -1, 1), (y, -1, 1))
    mons = [x ** a * y ** b for a, b in basis.multiindex_at]
    done = []
    H = []
    for k in range(L + 1):
        block = []
        for mono in mons[basis.block_slice(k)]:
            p = mono - sum(inner(mono, q) / inner(q, q) * q for q in done) if done else mono
            block.append(sympy.expand(p))
        H.append([[inner(p, q) for q in block] for p in block])
        done.extend(block)
    return H


def test_moment_matrix_examples():
    G0 = build_moment_matrix(BOX, 0)
    assert G0.data.shape == (1, 1) and G0.data[0, 0] == 4
    G1 = build_moment_matrix(BOX, 1)
    assert (G1.block(1, 1) == fr([[F(4, 3), 0], [0, F(4, 3)]])).all()
    point = build_moment_matrix(DiscreteMeasure([(0, 0)], [1]), 1)
    assert point.data[0, 0] == 1
    from mvdarboux.block_linalg import rank
    assert rank(point.data) == 1


def test_cholesky_identity():
    basis = GradedBasis(2, 3)
    chol = block_cholesky(identity_matrix(basis))
    assert (chol.S.data == identity(len(basis))).all()
    for k, h in enumerate(chol.H):
        assert (h == identity(h.shape[0])).all()


def test_cholesky_box_against_gram_schmidt():
    chol = block_cholesky(build_moment_matrix(BOX, 2))
    oracle = gram_schmidt_H(2)
    assert chol.H[0][0, 0] == 4
    for k in range(3):
        expected = [[F(int(v.p), int(v.q)) for v in row] for row in oracle[k]]
        assert (chol.H[k] == fr(expected)).all()
    assert (chol.H[1] == fr([[F(4, 3), 0], [0, F(4, 3)]])).all()


def test_cholesky_too_few_points():
    # 4 points cannot support the 6-dimensional space of degree <= 2
    m = DiscreteMeasure([(0, 0), (1, 0), (0, 1), (1, 1)], [1, 1, 1, 1])
    with pytest.raises(SingularBlock) as info:
        block_cholesky(build_moment_matrix(m, 2))
    assert info.value.degree <= 2


def test_float_singular_block():
    m = DiscreteMeasure([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [1.0, 1.0, 1.0])
    with pytest.raises(SingularBlock):
        block_cholesky(build_moment_matrix(m, 2))


def test_last_quasi_determinant_examples():
    assert last_quasi_determinant(fr([[1, 0], [0, 7]]), 1)[0, 0] == 7
    assert last_quasi_determinant(fr([[2, 1], [1, 1]]), 1)[0, 0] == F(1, 2)
    G = build_moment_matrix(BOX, 3)
    chol = block_cholesky(G)
    assert (last_quasi_determinant(G.truncation(2), 1) == chol.H[1]).all()
    with pytest.raises(SingularLeadingBlock):
        last_quasi_determinant(fr([[0, 1], [1, 1]]), 1)


def random_unitriangular(basis, rng):
    S = identity_matrix(basis)
    for k in range(basis.max_degree + 1):
        for l in range(k):
            blk = fr([[F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in basis.block(l)] for _ in basis.block(k)])
            S.set_block(k, l, blk)
    return S


def test_invert_unitriangular_examples():
    basis = GradedBasis(2, 3)
    I = identity_matrix(basis)
    assert (invert_unitriangular(I).data == I.data).all()
    S = identity_matrix(basis)
    B = fr([[F(2, 3)], [-5]])
    S.set_block(1, 0, B)
    inv = invert_unitriangular(S)
    assert (inv.block(1, 0) == -B).all()
    R = random_unitriangular(basis, random.Random(1))
    assert (R.data.dot(invert_unitriangular(R).data) == identity(len(basis))).all()


def test_invert_rejects_non_unitriangular():
    basis = GradedBasis(1, 2)
    S = identity_matrix(basis)
    S.data[0, 0] = F(2)
    with pytest.raises(ValueError):
        invert_unitriangular(S)


def test_slice_S_examples():
    chol = block_cholesky(build_moment_matrix(BOX, 4))
    s0 = slice_S(chol, 0, 2)
    assert s0.shape == (3, 3) and (s0 == chol.S.data[:3, :3]).all()
    assert all(s0[i, i] == 1 for i in range(3))
    s11 = slice_S(chol, 1, 1)
    assert (s11 == fr([[0, 1, 0], [0, 0, 1]])).all()
    ident = block_cholesky(identity_matrix(GradedBasis(2, 3)))
    assert (slice_S(ident, 1, 2) == np.hstack([fr([[0]] * 5), identity(5)])).all()
    with pytest.raises(IndexError):
        slice_S(chol, 3, 3)


def measures():
    yield BOX
    yield BoxMeasure([(0, 1), (-1, 2)], parse_poly("1 + x + y^2", 2))
    rng = random.Random(2)
    pts = [(F(rng.randint(-20, 20), 20), F(rng.randint(-20, 20), 20)) for _ in range(30)]
    yield DiscreteMeasure(pts, [F(rng.randint(1, 4)) for _ in pts])
    yield BoxMeasure([(-1, 1)])
    yield BoxMeasure([(-1, 1), (0, 1), (0, 2)])


@pytest.mark.parametrize("measure", list(measures()), ids=range(5))
def test_reconstruction_and_quasideterminants(measure):
    L = 4 if measure.dim < 3 else 3
    G = build_moment_matrix(measure, L)
    chol = block_cholesky(G)
    assert (chol.reconstruct() == G.data).all()
    for k in range(L + 1):
        lead = G.basis.block_offsets[k]
        assert (last_quasi_determinant(G.truncation(k + 1), lead) == chol.H[k]).all()
        h = chol.H[k]
        assert (h == h.T).all()
        assert all(det(h[:i, :i]) > 0 for i in range(1, h.shape[0] + 1))


@pytest.mark.parametrize("measure", list(measures()), ids=range(5))
def test_float_reconstruction(measure):
    L = 5 if measure.dim < 3 else 3
    G = build_moment_matrix(measure, L, "float")
    chol = block_cholesky(G)
    assert np.abs(chol.reconstruct() - G.data).max() <= 1e-12 * np.abs(G.data).max()


def test_block_permutation_invariance_of_det_H():
    L = 3
    G = build_moment_matrix(BoxMeasure([(0, 1), (-1, 2)], parse_poly("1 + x + y^2", 2)), L)
    base = block_cholesky(G)
    rng = random.Random(4)
    perm = []
    for k in range(L + 1):
        idx = list(range(G.basis.block_offsets[k], G.basis.block_offsets[k + 1]))
        rng.shuffle(idx)
        perm.extend(idx)
    permuted = BlockMatrix(G.data[np.ix_(perm, perm)], G.basis)
    other = block_cholesky(permuted)
    for h1, h2 in zip(base.H, other.H):
        assert det(h1) == det(h2)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.tuples(st.fractions(-2, 2, max_denominator=5), st.fractions(-2, 2, max_denominator=5)),
                min_size=12, max_size=16, unique=True))
def test_reconstruction_property(points):
    m = DiscreteMeasure(points, [1] * len(points))
    G = build_moment_matrix(m, 2)
    try:
        chol = block_cholesky(G)
    except SingularBlock:
        return  # points on a conic
    assert (chol.reconstruct() == G.data).all()


def test_serialisation_round_trip():
    chol = block_cholesky(build_moment_matrix(BOX, 3))
    doc = json.loads(json.dumps(cholesky_to_dict(chol)))
    assert doc["ordering"] == "graded-lex-desc" and doc["dimension"] == 2 and doc["degree"] == 3
    back = cholesky_from_dict(doc)
    assert (back.S.data == chol.S.data).all()
    assert all((a == b).all() for a, b in zip(back.H, chol.H))
    fchol = block_cholesky(build_moment_matrix(BOX, 3, "float"))
    fback = cholesky_from_dict(json.loads(json.dumps(cholesky_to_dict(fchol))))
    assert np.array_equal(fback.S.data, fchol.S.data)


def test_band_metadata_of_products():
    basis = GradedBasis(2, 4)
    chol = block_cholesky(build_moment_matrix(BOX, 4))
    assert chol.S.band == (-4, 0)
    assert max_abs(chol.S.data - np.tril(chol.S.data)) == 0
