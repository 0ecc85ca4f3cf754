import numpy as np
import pytest

from pntwist.dga import (BimoduleMap, DgAlgebra, DgBimodule, InvalidStructure, NotProjective, cohomology_dims,
                         cone, cone_maps, direct_sum, dual_right, factor_through, hom_complex, identity_map,
                         is_acyclic, is_projective, is_quasi_iso, map_space, nullhomotopy, search_quasi_iso, shift,
                         tensor_maps, tensor_over, zero_map)
from pntwist.exact import Field
from pntwist.twisted import diagonal

from generators import rand_complex, rand_map

FIELDS = [2, 5, 65521, 0]


def naive_cohomology(F, M):
    # dim H^k = dim ker d_k - rank d_{k-1}, from the raw differential
    out = {}
    for k in sorted(set(M.degs.tolist())):
        src = np.flatnonzero(M.degs == k)
        nxt = np.flatnonzero(M.degs == k + 1)
        prv = np.flatnonzero(M.degs == k - 1)
        dk = M.d[np.ix_(nxt, src)]
        dprev = M.d[np.ix_(src, prv)]
        h = len(src) - (F.rank(dk) if dk.size else 0) - (F.rank(dprev) if dprev.size else 0)
        if h:
            out[k] = h
    return out


def test_truncated_polynomial_is_valid():
    A = DgAlgebra.truncated_polynomial(Field(5), 3, 2)
    assert A.dim == 4 and A.degs.tolist() == [0, 2, 4, 6]
    A.validate()


def test_nonassociative_algebra_rejected():
    F = Field(0)
    c = np.zeros((2, 2, 2), dtype=object)
    c[0, 0, 0] = c[0, 1, 1] = c[1, 0, 1] = 1
    c[1, 1, 0] = 1
    c[1, 1, 1] = 1
    DgAlgebra(F, [0, 0], c)  # x^2 = 1 + x is fine
    bad = c.copy()
    bad[0, 1, 1] = 0
    with pytest.raises(InvalidStructure):
        DgAlgebra(F, [0, 0], bad)


@pytest.mark.parametrize("p", FIELDS)
def test_cohomology_matches_naive_count(p):
    F = Field(p)
    rng = np.random.default_rng(p + 1)
    for _ in range(10):
        M, _, _ = rand_complex(F, rng, pieces=4)
        assert cohomology_dims(M) == naive_cohomology(F, M)


@pytest.mark.parametrize("p", FIELDS)
def test_shift_and_cone(p):
    F = Field(p)
    rng = np.random.default_rng(7)
    M, _, _ = rand_complex(F, rng, pieces=3)
    S = shift(M, 2)
    assert {k + 2: v for k, v in cohomology_dims(S).items()} == cohomology_dims(M)
    assert np.array_equal(shift(M, 1).d, F.reduce(-M.d))
    C = cone(identity_map(M))
    assert is_acyclic(C)
    inc, pr = cone_maps(identity_map(M), C)
    assert inc.is_closed() and pr.is_closed()
    with pytest.raises(InvalidStructure):
        cone(BimoduleMap(M, M, 1, F.zeros((M.dim, M.dim))))


@pytest.mark.parametrize("p", FIELDS)
def test_map_space_gives_closed_bilinear_maps(p):
    F = Field(p)
    A = DgAlgebra.truncated_polynomial(F, 1, 1, "e")
    Ad = diagonal(A)
    H = direct_sum([shift(Ad, 1), Ad])
    for deg in (-1, 0, 1):
        sp = map_space(H, Ad, deg, closed=True)
        for j in range(sp.shape[0]):
            f = BimoduleMap(H, Ad, deg, sp[j])
            assert f.is_bilinear() and f.is_closed()


@pytest.mark.parametrize("p", FIELDS)
def test_nullhomotopy_solves_dh_equals_f(p):
    F = Field(p)
    rng = np.random.default_rng(11)
    M, _, _ = rand_complex(F, rng, pieces=3)
    N, _, _ = rand_complex(F, rng, pieces=3)
    g = rand_map(F, M, N, -1, rng)
    f = g.differential()
    h = nullhomotopy(f)
    assert h is not None and np.array_equal(h.differential().matrix, f.matrix)
    k = DgBimodule.free_ground(F, [0])
    assert nullhomotopy(identity_map(k)) is None


@pytest.mark.parametrize("p", [5, 0])
def test_factor_through(p):
    F = Field(p)
    rng = np.random.default_rng(2)
    X, _, _ = rand_complex(F, rng, pieces=2)
    Y, _, _ = rand_complex(F, rng, pieces=2)
    Z, _, _ = rand_complex(F, rng, pieces=2)
    g = rand_map(F, X, Y, 0, rng, closed=True)
    u = rand_map(F, Y, Z, 0, rng, closed=True)
    f = u @ g
    u0, hom, h0 = factor_through(g, f)
    lhs = (u0 @ g).matrix
    rhs = F.reduce(f.matrix + h0.differential().matrix)
    assert np.array_equal(lhs, rhs)
    for m in hom:
        assert BimoduleMap(Y, Z, 0, m).is_closed()


@pytest.mark.parametrize("p", [5, 0])
def test_tensor_over_algebra_is_identity(p):
    F = Field(p)
    A = DgAlgebra.truncated_polynomial(F, 2, 2)
    Ad = diagonal(A)
    M = direct_sum([Ad, shift(Ad, 3)])
    T = tensor_over(Ad, M)
    assert T.dim == M.dim and cohomology_dims(T) == cohomology_dims(M)
    T.validate()


def test_tensor_over_ground_field_multiplies():
    F = Field(0)
    rng = np.random.default_rng(4)
    M, _, _ = rand_complex(F, rng, pieces=2)
    N, _, _ = rand_complex(F, rng, pieces=2)
    T = tensor_over(M, N)
    assert T.dim == M.dim * N.dim
    hm, hn, ht = cohomology_dims(M), cohomology_dims(N), cohomology_dims(T)
    want = {}
    for a, x in hm.items():
        for b, y in hn.items():
            want[a + b] = want.get(a + b, 0) + x * y
    assert ht == want  # Kunneth over a field
    f = rand_map(F, M, M, 0, rng, closed=True)
    g = rand_map(F, N, N, 0, rng, closed=True)
    assert tensor_maps(f, g).is_closed()


def test_projectivity():
    F = Field(5)
    A = DgAlgebra.truncated_polynomial(F, 1, 1, "e")
    Ad = diagonal(A)
    assert is_projective(Ad, "left")[0] and is_projective(Ad, "right")[0]
    k = DgAlgebra.ground(F)
    # k as a right A-module via e -> 0
    simple = DgBimodule(k, A, [0], F.coerce(np.ones((1, 1, 1), dtype=int)),
                        F.coerce(np.array([[[1]], [[0]]])), F.zeros((1, 1)))
    assert not is_projective(simple, "right")[0]
    with pytest.raises(NotProjective):
        tensor_over(simple, DgBimodule(A, k, [0], F.coerce(np.array([[[1]], [[0]]])),
                                       F.coerce(np.ones((1, 1, 1), dtype=int)), F.zeros((1, 1))))


def test_hom_differential_convention():
    F = Field(0)
    rng = np.random.default_rng(5)
    M, _, _ = rand_complex(F, rng, pieces=2)
    N0, _, _ = rand_complex(F, rng, pieces=2)
    N = DgBimodule(M.left, M.right, N0.degs, N0.lam, N0.rho, N0.d)
    f = rand_map(F, M, N, 1, rng)
    want = F.reduce(F.matmul(N.d, f.matrix) + F.matmul(f.matrix, M.d))
    assert np.array_equal(f.differential().matrix, want)
    Hm = hom_complex(M, N)
    hm, hn = cohomology_dims(M), cohomology_dims(N)
    want = {}
    for a, x in hm.items():
        for b, y in hn.items():
            want[b - a] = want.get(b - a, 0) + x * y
    assert cohomology_dims(Hm) == want


def test_dual_right_of_free_module():
    F = Field(5)
    A = DgAlgebra.truncated_polynomial(F, 1, 2, "e")
    Ad = diagonal(A)
    D = dual_right(shift(Ad, 2))
    assert D.dim == A.dim
    # Hom_A(A[2], A) is A[-2], so classes sit in degrees 2 and 4
    assert cohomology_dims(D) == {2: 1, 4: 1}


def test_search_quasi_iso_verdicts():
    F = Field(65521)
    rng = np.random.default_rng(0)
    M, _, _ = rand_complex(F, rng, pieces=3)
    r = search_quasi_iso(M, M)
    assert r.verdict == "Pass" and is_quasi_iso(r.witness)
    k0 = DgBimodule.free_ground(F, [0])
    k1 = DgBimodule.free_ground(F, [1])
    assert search_quasi_iso(k0, k1).verdict == "Fail"
    r = search_quasi_iso(k0, k0, family=[])
    assert r.verdict == "Fail"
    z = zero_map(k0, k0)
    assert not is_quasi_iso(z)
