import numpy as np
import pytest
from sympy import GF, QQ
from sympy.polys.matrices import DomainMatrix

from pntwist import companion as cp
from pntwist.exact import Field


def sympy_kernel_dim(inst):
    F = inst.field
    n = inst.n
    # build f_h from the structure constants directly: a (x) b -> a h (x) b - a (x) h b
    c = inst.Q.c
    h = inst.h
    dom = QQ if F.char == 0 else GF(F.char)
    conv = (lambda x: QQ(int(x.numerator), int(x.denominator))) if F.char == 0 else (lambda x: dom(int(x)))
    rows = [[dom(0)] * (n * n) for _ in range(n * n)]
    for i in range(n):
        for j in range(n):
            col = i * n + j
            for k in range(n):
                ah = sum((c[i, t, k] * h[t] for t in range(n)), 0 * h[0])
                hb = sum((h[t] * c[t, j, k] for t in range(n)), 0 * h[0])
                rows[k * n + j][col] += conv(ah)
                rows[i * n + k][col] -= conv(hb)
    return n * n - DomainMatrix(rows, (n * n, n * n), dom).rank()


@pytest.mark.parametrize("p", [2, 5, 65521, 0])
def test_kernel_dim_matches_sympy(p):
    F = Field(p)
    for seed in range(8):
        for fam in ("monogenic", "truncated", "group", "product"):
            inst = cp.random_algebra(3 + seed % 3, fam, seed, F)
            assert cp.kernel_dim(inst) == sympy_kernel_dim(inst)


@pytest.mark.parametrize("dim", range(1, 7))
def test_families_build_valid_algebras(dim):
    F = Field(5)
    for fam in cp.families_for(dim):
        inst = cp.random_algebra(dim, fam, dim, F)
        inst.Q.validate()
        assert inst.n == dim


def test_incompatible_family_rejected():
    with pytest.raises(ValueError):
        cp.random_algebra(5, "full", 0, 5)
    with pytest.raises(ValueError):
        cp.random_algebra(3, "bogus", 0, 5)


def test_monogenic_x_cubed():
    F = Field(0)
    Q = cp.monogenic_algebra(F, [0, 0, 0, 1])
    inst = cp.AlgebraInstance(Q, [0, 1, 0])
    assert cp.is_monogenic(inst) and cp.kernel_dim(inst) == 3
    # the square of x does not generate
    inst2 = cp.AlgebraInstance(Q, [0, 0, 1])
    assert not cp.is_monogenic(inst2) and cp.kernel_dim(inst2) > 3
    assert cp.verify_theorem(inst2)["agrees"]


def test_corrupted_oracle_is_caught():
    # k[x, y]/(x, y)^2 has dimension 3 and is never monogenic
    F = Field(5)
    Q = cp.staircase_algebra(F, [(0, 0), (1, 0), (0, 1)])
    inst = cp.AlgebraInstance(Q, [0, 1, 1])
    r = cp.verify_theorem(inst, oracle=lambda i: True)
    assert not r["agrees"] and r["kernel_dim"] > 3


@pytest.mark.parametrize("p", [2, 7, 0])
def test_block_reduction(p):
    F = Field(p)
    rng = np.random.default_rng(p)
    for n in range(2, 6):
        coeffs = [int(x) for x in rng.integers(-3, 4, size=n)] + [1]
        top, r, rr, pA = cp.block_reduction(coeffs, F)
        assert r == rr == n * n - n
        assert all(F.is_zero(b) for b in top[:-1])
        assert F.is_zero(pA)


def test_sweep_is_deterministic_and_splittable():
    fields = [Field(2), Field(0)]
    a = cp.sweep([2, 3, 4], 30, 9, fields)
    b = cp.sweep([2, 3, 4], 30, 9, fields, ids=range(10, 30))
    assert [r["kernel_dim"] for r in a[10:]] == [r["kernel_dim"] for r in b]
    s = cp.summarize(a)
    assert s["agree"] == 30 and s["lower_bound_ok"] and not s["counterexamples"]


def test_commutative_lower_bound():
    F = Field(65521)
    for seed in range(20):
        inst = cp.random_algebra(4, "truncated", seed, F)
        assert cp.is_commutative(inst.Q)
        assert cp.kernel_dim(inst) >= cp.proof_lower_bound(inst) >= inst.n


def test_parse_dims():
    assert cp.parse_dims("2..4") == [2, 3, 4]
    assert cp.parse_dims("2,5") == [2, 5]
