import numpy as np
import pytest

from pntwist.dga import (BimoduleMap, DgAlgebra, cohomology_dims, direct_sum, identity_map, is_quasi_iso, shift,
                         tensor_maps)
from pntwist.exact import Field
from pntwist.twisted import (TTA, MaurerCartanError, TwistedComplex, check_equivalence_data, diagonal,
                             homotopy_defect, is_one_sided, make_one_sided, replace, tensor_powers, tta_compare)

from generators import rand_complex, rand_map, replacement_instance, tta_tuple


def two_term(F, rng):
    X0, _, _ = rand_complex(F, rng, pieces=2)
    X1, _, _ = rand_complex(F, rng, pieces=2)
    X1 = rewrap(X1, X0)
    return X0, X1


def rewrap(M, like):
    from pntwist.dga import DgBimodule
    return DgBimodule(like.left, like.right, M.degs, M.lam, M.rho, M.d)


@pytest.mark.parametrize("p", [5, 0])
def test_convolution_of_two_terms_is_a_cone(p):
    F = Field(p)
    rng = np.random.default_rng(1)
    X0, X1 = two_term(F, rng)
    f = rand_map(F, X0, X1, 0, rng, closed=True)
    # the total complex shifts X_{-1} by one, so it is cone(f)
    tc = TwistedComplex({-1: X0, 0: X1}, {(-1, 0): f})
    from pntwist.dga import cone
    assert cohomology_dims(tc.total) == cohomology_dims(cone(f))


def test_maurer_cartan_is_checked():
    F = Field(5)
    rng = np.random.default_rng(2)
    X0, X1 = two_term(F, rng)
    g = rand_map(F, X0, X1, 0, rng)
    while g.is_closed():
        g = rand_map(F, X0, X1, 0, rng)
    with pytest.raises(MaurerCartanError):
        TwistedComplex({-1: X0, 0: X1}, {(-1, 0): BimoduleMap(X0, X1, 0, g.matrix)})


def test_tta_with_zero_sigma_has_zero_differential():
    F = Field(5)
    A = DgAlgebra.truncated_polynomial(F, 1, 1, "e")
    Ad = diagonal(A)
    H = direct_sum([shift(Ad, 1), Ad])
    sigma = BimoduleMap(H, Ad, 1, F.zeros((Ad.dim, H.dim)))
    T = TTA(H, sigma, 3)
    dims = [p.dim for p in tensor_powers(H, 3)]
    assert T.Qn.dim == sum(dims)
    assert F.is_zero(T.Qn.d) == F.is_zero(H.d)
    # the unit is the inclusion of A
    assert T.unit().is_closed()
    with pytest.raises(ValueError):
        TTA(H, sigma, 0)


@pytest.mark.parametrize("p", [2, 5, 65521])
def test_tta_compare_small(p):
    F = Field(p)
    rng = np.random.default_rng(p)
    for n in (1, 2):
        H, s, s2, f, b = tta_tuple(F, rng)
        T1, T2 = TTA(H, s, n), TTA(H, s2, n)
        iota = tta_compare(T1, T2, f, b)
        assert iota.is_closed() and is_quasi_iso(iota)
        assert np.array_equal((iota @ T1.unit()).matrix, T2.unit().matrix)
        N, inc = T1.truncated_square
        assert (T1.multiplication_defect() @ inc).is_zero()


@pytest.mark.parametrize("p", [5, 0])
def test_replacement_identities(p):
    F = Field(p)
    rng = np.random.default_rng(10 + p)
    for _ in range(5):
        E, qidx, P, a, b, tq, tp, ph = replacement_instance(F, rng)
        assert check_equivalence_data(a.target, P, a, b, tq, tp, ph)
        res = replace(E, qidx, P, a, b, tq, tp, ph)
        assert F.is_zero(F.matmul(res.module.d, res.module.d))
        assert res.forward.is_closed() and is_quasi_iso(res.forward)
        r1, r2 = homotopy_defect(res)
        assert F.is_zero(r1) and F.is_zero(r2)


def test_replacement_rejects_bad_data():
    F = Field(5)
    rng = np.random.default_rng(3)
    E, qidx, P, a, b, tq, tp, ph = replacement_instance(F, rng)
    bad = BimoduleMap(tq.source, tq.target, -1, F.zeros(tq.matrix.shape))
    if not check_equivalence_data(a.target, P, a, b, bad, tp, ph):
        with pytest.raises(Exception):
            replace(E, qidx, P, a, b, bad, tp, ph)


def test_make_one_sided():
    F = Field(0)
    rng = np.random.default_rng(4)
    X0, X1 = two_term(F, rng)
    f = rand_map(F, X0, X1, 0, rng, closed=True)
    X = TwistedComplex({-1: X0, 0: X1}, {(-1, 0): f})
    # a map X -> X perturbed by a boundary that points the wrong way
    h = np.zeros((X.total.dim, X.total.dim), dtype=object)
    h = F.coerce(h)
    h[np.ix_(X.block(-1), X.block(0))] = rand_map(F, X1, shift(X0, 1), -1, rng).matrix
    hb = BimoduleMap(X.total, X.total, -1, h)
    g = BimoduleMap(X.total, X.total, 0, F.reduce(F.eye(X.total.dim) + hb.differential().matrix))
    g2, H = make_one_sided(X, X, g)
    assert is_one_sided(X, X, g2)
    assert np.array_equal(g2.matrix, F.reduce(g.matrix - H.differential().matrix))


def test_tta_compare_property():
    # 200 random instances, lengths 1 and 2, all finite test fields
    fields = [Field(2), Field(5), Field(65521)]
    for i in range(200):
        F = fields[i % 3]
        H, s, s2, f, b = tta_tuple(F, np.random.default_rng(7000 + i))
        n = 1 + i % 2
        iota = tta_compare(TTA(H, s, n), TTA(H, s2, n), f, b)
        assert iota.is_closed() and is_quasi_iso(iota)
