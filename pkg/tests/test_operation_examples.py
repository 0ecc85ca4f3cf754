"""Worked examples for individual operations, each checked against an
independent computation (sympy, brute force, or a hand count)."""
from fractions import Fraction

import numpy as np
import pytest
import sympy

from pntwist import companion as cp
from pntwist import dga
from pntwist import examples as ex
from pntwist import pnfun as pf
from pntwist import twisted as tw
from pntwist.dga import (BimoduleMap, DgAlgebra, DgBimodule, cohomology_dims, cone, dual_right,
                         hom_right, identity_map, is_projective, is_quasi_iso, shift, tensor_over,
                         zero_map)
from pntwist.exact import ExactMatrix, Field, companion_matrix, kernel_basis, kron, rank, solve

GF5, GF7, GF101, BIG, QQ = Field(5), Field(7), Field(101), Field(65521), Field(0)


def sym_rank(rows, p=None):
    M = sympy.Matrix(rows)
    if p:
        from sympy.polys.matrices import DomainMatrix
        from sympy import GF
        return DomainMatrix.from_Matrix(M).convert_to(GF(p)).rank()
    return M.rank()


# ---------------------------------------------------------------- exact

def test_commutator_rank_of_nilpotent_companion():
    A = companion_matrix([0, 0, 0, 1], GF5)
    I = ExactMatrix.identity(GF5, 3)
    K = kron(A, I) - kron(I, A)
    assert rank(K) == 6
    assert sym_rank(K.tolist(), 5) == 6


def test_kernel_of_row_of_ones_over_q():
    ker = kernel_basis(ExactMatrix(QQ, [[1, 1]]))
    assert len(ker) == 1
    v = [Fraction(x) for x in np.asarray(ker[0].tolist()).reshape(-1)]
    assert v[0] == -v[1] != 0


def test_solve_recovers_point_over_f101():
    rng = np.random.default_rng(101)
    while True:
        m = GF101.random((4, 4), rng, 0, 100)
        if GF101.rank(m) == 4:
            break
    x0 = GF101.random((4, 1), rng, 0, 100)
    b = GF101.matmul(m, x0)
    x = solve(ExactMatrix(GF101, m), ExactMatrix(GF101, b))
    assert list(x.a.reshape(-1)) == list(x0.reshape(-1))


def test_kron_of_identities():
    K = kron(ExactMatrix.identity(GF7, 2), ExactMatrix.identity(GF7, 3))
    assert K.tolist() == ExactMatrix.identity(GF7, 6).tolist()


def test_small_companion_matrices():
    assert companion_matrix([1, 0, 1], QQ).a.tolist() == [[0, -1], [1, 0]]
    assert companion_matrix([-4, 1], GF7).a.tolist() == [[4]]


@pytest.mark.parametrize("F", [GF5, BIG, QQ])
def test_rank_of_kron_is_multiplicative(F):
    rng = np.random.default_rng(20)
    for _ in range(20):
        a = F.random(tuple(rng.integers(1, 4, size=2)), rng, -1, 2)
        b = F.random(tuple(rng.integers(1, 4, size=2)), rng, -1, 2)
        assert F.rank(F.kron(a, b)) == F.rank(a) * F.rank(b)


def test_prime_and_rational_ranks_agree_on_sign_matrices():
    # for 5x5 entries in {-1,0,1}, |minor| <= 5^(5/2) < 65521
    rng = np.random.default_rng(3)
    for _ in range(40):
        rows = rng.integers(-1, 2, size=(5, 5)).tolist()
        r = QQ.rank(QQ.array(rows))
        assert r == BIG.rank(BIG.array(rows)) == sym_rank(rows)


# ---------------------------------------------------------------- dga

@pytest.fixture(scope="module")
def cubic():
    B = DgAlgebra.truncated_polynomial(BIG, 2, 2)
    return B, DgBimodule.diagonal(B)


def test_endomorphisms_of_truncated_polynomial(cubic):
    B, Bd = cubic
    assert cohomology_dims(hom_right(Bd, Bd)) == {0: 1, 2: 1, 4: 1}
    Z = DgBimodule.zero(B, B)
    assert hom_right(Z, Bd).dim == 0


def test_tensor_with_diagonal(cubic):
    B, Bd = cubic
    assert cohomology_dims(tensor_over(Bd, Bd)) == {0: 1, 2: 1, 4: 1}


@pytest.mark.parametrize("d", [1, 2, 3])
def test_double_dual_of_dual_numbers(d):
    B = DgAlgebra.truncated_polynomial(BIG, 1, d, var="e")
    Bd = DgBimodule.diagonal(B)
    assert cohomology_dims(dual_right(dual_right(Bd))) == {0: 1, d: 1}


def test_cone_of_zero_map_is_sum(cubic):
    B, Bd = cubic
    C = cone(zero_map(Bd, Bd))
    want = {}
    for k, v in list(cohomology_dims(shift(Bd, 1)).items()) + list(cohomology_dims(Bd).items()):
        want[k] = want.get(k, 0) + v
    assert cohomology_dims(C) == want


def test_cone_of_multiplication_by_h(cubic):
    # kernel of h. on B is span(h^2), cokernel is span(1): two classes in total
    B, Bd = cubic
    h = B.basis_vector(1)
    f = BimoduleMap(shift(Bd, -2), Bd, 0, B.left(h), check=True)
    assert f.is_closed()
    Lh = np.asarray(B.left(h), dtype=np.int64)
    r = sym_rank(Lh.tolist(), 65521)
    assert sum(cohomology_dims(cone(f)).values()) == (3 - r) + (3 - r) == 2
    assert cohomology_dims(cone(f)) == {0: 1, 5: 1}


def test_projectivity_examples():
    B = DgAlgebra.truncated_polynomial(GF7, 1, 1, var="e")
    A = DgAlgebra.ground(GF7)
    free = DgBimodule(A, B, np.concatenate([B.degs, B.degs]), GF7.eye(4).reshape(1, 4, 4),
                      np.stack([ex._bdiag(GF7, B.rho[b], B.rho[b]) for b in range(2)]),
                      GF7.zeros((4, 4)))
    assert is_projective(free, "right")[0]
    rho = GF7.zeros((2, 1, 1))
    rho[0] = GF7.eye(1)
    simple = DgBimodule(A, B, [0], GF7.eye(1).reshape(1, 1, 1), rho, GF7.zeros((1, 1)))
    assert not is_projective(simple, "right")[0]


def test_identity_and_zero_quasi_isos(cubic):
    _, Bd = cubic
    assert is_quasi_iso(identity_map(Bd))
    assert not is_quasi_iso(zero_map(Bd, Bd))
    assert dga.nullhomotopy(identity_map(Bd)) is None
    assert dga.nullhomotopy(zero_map(Bd, Bd)) is not None


# ---------------------------------------------------------------- twisted

def test_single_object_convolves_to_itself(cubic):
    _, Bd = cubic
    T = tw.TwistedComplex({0: Bd})
    assert T.total.dim == Bd.dim
    assert np.array_equal(T.total.degs, Bd.degs)


@pytest.fixture(scope="module")
def p2():
    return ex.pn_object(2, 2, BIG)


def test_coextension_maps(p2):
    Fd, S = p2
    C = S.coext
    F = Fd.field
    for i in range(1, C.n + 1):
        comp = F.matmul(C.mu_i(i).matrix, C.iota_i(i).matrix)
        assert F.is_zero(comp)
        assert C.iota_i(i).is_closed() and C.mu_i(i).is_closed()
    assert F.is_zero(F.matmul(C.kappa().matrix, C.iota().matrix))
    assert is_quasi_iso(C.cone_iota_to_J())


@pytest.mark.parametrize("m", [1, 2, 3])
def test_tta_with_zero_sigma_matches_pn_monad(m):
    F = BIG
    A = DgAlgebra.ground(F)
    H = ex.one_dim(A, m)
    T = tw.TTA(H, zero_map(H, tw.diagonal(A), 1), 2)
    Fd, _ = ex.pn_object(2, m, F)
    # graded pieces sit in degrees 0, m, 2m, the grading of RF = k[h]/h^3
    assert cohomology_dims(T.Qn) == cohomology_dims(Fd.RF) == {0: 1, m: 1, 2 * m: 1}


def test_tta_multiplication_associative_when_sigma_zero():
    F = BIG
    A = DgAlgebra.ground(F)
    H = ex.one_dim(A, 2)
    T = tw.TTA(H, zero_map(H, tw.diagonal(A), 1), 2)
    assert T.multiplication().is_closed()
    # pieces are one dimensional: e_k e_l = e_{k+l} up to n, so check the table
    mu = T.multiplication()
    Q = T.Qn
    S = T.square
    e = [T.tc.block(-k)[0] for k in range(3)]
    for a in range(3):
        for b in range(3):
            v = dga.tensor_element(S, _pair(F, Q, e[a], e[b]))
            out = F.matmul(mu.matrix, v.reshape(-1, 1)).reshape(-1)
            want = F.zeros(Q.dim)
            if a + b <= 2:
                want[e[a + b]] = F.scalar(1)
            assert list(out) == list(want)


def _pair(F, Q, x, y):
    X = F.zeros((1, Q.dim, Q.dim))
    X[0, x, y] = F.scalar(1)
    return X


def test_tta_compare_identity():
    F = BIG
    A = DgAlgebra.ground(F)
    H = ex.one_dim(A, 2)
    sig = zero_map(H, tw.diagonal(A), 1)
    T = tw.TTA(H, sig, 2)
    g = tw.tta_compare(T, T, identity_map(H), zero_map(H, tw.diagonal(A), 0))
    assert F.is_zero(F.reduce(g.matrix - F.eye(T.Qn.dim)))


# ---------------------------------------------------------------- pnfun

@pytest.mark.parametrize("n,m", [(2, 2), (4, 3)])
def test_monad_of_pn_object(n, m):
    Fd, _ = ex.pn_object(n, m, BIG)
    mon = pf.monad(Fd)
    assert cohomology_dims(mon["RF"]) == {m * i: 1 for i in range(n + 1)}
    assert all(pf.monad_laws(Fd).values())


def test_identity_functor_monad():
    B = DgAlgebra.truncated_polynomial(BIG, 1, 1)
    Fd = ex.diagonal_object(B)
    assert Fd.RF.dim == B.dim
    assert is_quasi_iso(Fd.unit)
    assert is_quasi_iso(Fd.trace)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_check_pn_on_pn_objects(n):
    Fd, S = ex.pn_object(n, 2, BIG)
    rep = pf.check_pn(Fd, S, rng=np.random.default_rng(n))
    assert rep.verdict == pf.PASS


def test_perturbed_algebra_fails_strong_monad_at_first_step():
    Fd, S = ex.perturbed_object(BIG)
    rep = pf.check_strong_monad(Fd, S, rng=np.random.default_rng(0))
    assert rep.verdict == pf.FAIL
    assert pf.verify_pp_unit(Fd, S).verdict in (pf.FAIL, pf.INDETERMINATE)


def test_spherical_check_examples():
    assert pf.spherical_check(ex.spherical_object(2, BIG)).verdict == pf.PASS
    B = DgAlgebra.truncated_polynomial(BIG, 2, 2)
    assert pf.spherical_check(ex.algebra_kernel(B)).verdict == pf.FAIL
    A = DgAlgebra.ground(BIG)
    Fd0 = pf.FunctorData(A, B, DgBimodule.zero(A, B))
    rep = pf.spherical_check(Fd0)
    assert any("zero kernel" in n for n in rep.notes)
    assert rep.evidence["T_cohomology"] == cohomology_dims(DgBimodule.diagonal(B))


def test_spherical_object_rejects_zero_degree():
    with pytest.raises(pf.PreconditionError):
        ex.spherical_object(0)


def test_pff_on_p2_object(p2):
    Fd, S = p2
    rep = pf.verify_pff(Fd, S, rng=np.random.default_rng(0))
    assert rep.verdict == pf.PASS
    assert rep.evidence["shift"] == 4
    assert sum(rep.evidence["PF_cohomology"].values()) == 3


# ---------------------------------------------------------------- companion

def _inst(Q, h):
    return cp.AlgebraInstance(Q, Q.field.coerce(h))


def test_central_h_gives_zero_map():
    Q = cp.monogenic_algebra(GF7, [1, 2, 3, 1])
    for h in ([0, 0, 0], [1, 0, 0]):
        assert GF7.is_zero(cp.f_h_matrix(_inst(Q, h)))


def test_square_zero_in_two_variables():
    Q = cp.staircase_algebra(GF7, [(0, 0), (1, 0), (0, 1)])
    inst = _inst(Q, [0, 1, 0])
    assert cp.kernel_dim(inst) == 5
    assert sym_rank(np.asarray(cp.f_h_matrix(inst), dtype=np.int64).tolist(), 7) == 4


def test_product_of_fields_with_distinct_eigenvalues():
    Q = cp.product_algebra(GF7, 3)
    # h = 1*e0 + 2*e1 + 3*e2 in the basis (1, e1, e2)
    inst = _inst(Q, [1, 1, 2])
    assert cp.kernel_dim(inst) == 3 and cp.is_monogenic(inst)


def test_upper_triangular_strict_generator_is_not_monogenic():
    Q = cp.upper_triangular_algebra(GF7, 2)
    inst = _inst(Q, [0, 1, 0])
    assert not cp.is_monogenic(inst)
    assert cp.verify_theorem(inst)["agrees"]


def test_full_matrix_algebra_with_diagonal_h():
    Q = cp.full_matrix_algebra(GF7, 2)
    # basis 1, E01, E10, E11; diag(1, 2) = 1 + E11
    inst = _inst(Q, [1, 0, 0, 1])
    r = cp.verify_theorem(inst)
    assert not r["monogenic"] and r["kernel_dim"] > 4 and r["agrees"]


def test_random_algebra_families_are_as_built():
    inst = cp.random_algebra(4, "monogenic", 1, 7)
    assert cp.minimal_polynomial_degree(_inst(inst.Q, inst.Q.basis_vector(1))) == 4
    inst = cp.random_algebra(4, "full", 1, 7)
    Q = inst.Q
    F = Q.field
    comm = np.concatenate([F.reduce(Q.left(Q.basis_vector(i)) - Q.right(Q.basis_vector(i)))
                           for i in range(Q.dim)])
    assert Q.dim - F.rank(comm) == 1


def test_kernel_dim_invariant_under_basis_change():
    rng = np.random.default_rng(50)
    for t in range(50):
        inst = cp.random_algebra(3 if t % 2 else 4, "upper" if t % 2 else "group", t, 7, change=False)
        P = cp.random_basis_change(GF7, inst.n, rng)
        Q2 = cp.change_basis(inst.Q, P)
        h2 = GF7.solve(P, inst.h.reshape(-1, 1))[:, 0]
        assert cp.kernel_dim(inst) == cp.kernel_dim(_inst(Q2, h2))


# ---------------------------------------------------------------- examples

def test_double_cover_dimensions():
    cc = ex.cyclic_cover(1, 4, GF5)
    assert sum(cc["eigenspaces"]["dims"]) == 8
    assert cc["eigenspaces"]["dims"] == [4, 4]
