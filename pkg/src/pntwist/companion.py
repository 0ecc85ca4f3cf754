"""Kernel dimension of the commutator map f_h on Q (x)_k Q.

For a finite dimensional algebra Q and h in Q, f_h(q1 (x) q2) = q1 h (x) q2 -
q1 (x) h q2.  Its kernel has dimension at most dim Q exactly when h
generates Q.  This module builds f_h from multiplication operators, computes
the kernel dimension, and tests that against an independent monogenicity
oracle on randomly generated algebras.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dga import DgAlgebra
from .exact import Field, NoSolution, companion_matrix, poly_eval_matrix

FAMILIES = ("monogenic", "product", "truncated", "upper", "full", "group")


@dataclass
class AlgebraInstance:
    Q: DgAlgebra
    h: np.ndarray
    family: str = "custom"
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.Q.degs != 0) or not self.Q.field.is_zero(self.Q.d):
            raise ValueError("the algebra must sit in degree 0 with zero differential")
        self.h = self.Q.field.coerce(np.asarray(self.h)).reshape(self.Q.dim)

    @property
    def n(self):
        return self.Q.dim

    @property
    def field(self):
        return self.Q.field


def f_h_matrix(inst):
    """Matrix of f_h on the basis q_i (x) q_j, index i*n + j."""
    F = inst.field
    n = inst.n
    Rh = inst.Q.right(inst.h)
    Lh = inst.Q.left(inst.h)
    I = F.eye(n)
    return F.reduce(F.kron(Rh, I) - F.kron(I, Lh))


def kernel_dim(inst):
    n = inst.n
    return n * n - inst.field.rank(f_h_matrix(inst))


def power_matrix(inst):
    """Columns 1, h, ..., h^(n-1)."""
    F = inst.field
    n = inst.n
    cols = [inst.Q.unit_vector()]
    Lh = inst.Q.left(inst.h)
    for _ in range(n - 1):
        cols.append(F.matmul(Lh, cols[-1]))
    return np.stack(cols, axis=1)


def is_monogenic(inst):
    """True iff the powers of h span Q."""
    return inst.field.rank(power_matrix(inst)) == inst.n


def minimal_polynomial_degree(inst):
    """dim k[h] inside Q."""
    F = inst.field
    n = inst.n
    cols = [inst.Q.unit_vector()]
    Lh = inst.Q.left(inst.h)
    for _ in range(n):
        cols.append(F.matmul(Lh, cols[-1]))
        if F.rank(np.stack(cols, axis=1)) < len(cols):
            return len(cols) - 1
    return n


def verify_theorem(inst, oracle=None):
    kd = kernel_dim(inst)
    mono = (oracle or is_monogenic)(inst)
    return {"agrees": (kd <= inst.n) == mono, "kernel_dim": kd, "monogenic": mono, "n": inst.n}


def block_reduction(coeffs, field):
    """Row reduce A (x) I - I (x) A for the companion matrix A of p by blocks.

    Returns (top_row_blocks, rank, reduced_rank, p_of_A).  After replacing the
    top block row R_1 by R_1 + A R_2 + ... + A^(n-1) R_n the top row is zero
    except its last block, which is p(A).
    """
    F = field if isinstance(field, Field) else Field(field)
    A = companion_matrix(coeffs, F).a
    n = A.shape[0]
    I = F.eye(n)
    # first tensor factor varies fastest, so block (r, c) = delta A - A[r, c] I
    M = F.reduce(F.kron(I, A) - F.kron(A, I))
    blocks = [[M[r * n:(r + 1) * n, c * n:(c + 1) * n] for c in range(n)] for r in range(n)]
    top = [b.copy() for b in blocks[0]]
    P = F.eye(n)
    for r in range(1, n):
        P = F.matmul(P, A)
        for c in range(n):
            top[c] = F.reduce(top[c] + F.matmul(P, blocks[r][c]))
    reduced = np.concatenate([np.concatenate(top, axis=1)] + [np.concatenate(b, axis=1) for b in blocks[1:]], axis=0)
    return top, F.rank(M), F.rank(reduced), poly_eval_matrix(F, [F.scalar(c) for c in coeffs], A)


# ----------------------------------------------------------------------
# algebra constructors


def algebra_from_matrices(field, mats, labels=None):
    """The algebra spanned by matrices mats (mats[0] the identity), closed
    under products; structure constants found by solving."""
    F = field
    n = len(mats)
    B = np.stack([m.reshape(-1) for m in mats], axis=1)
    c = F.zeros((n, n, n))
    prods = np.stack([F.matmul(mats[a], mats[b]).reshape(-1) for a in range(n) for b in range(n)], axis=1)
    try:
        x = F.solve(B, prods)
    except NoSolution:
        raise ValueError("matrices do not span a subalgebra")
    c[:] = x.T.reshape(n, n, n)
    return DgAlgebra(F, [0] * n, c, labels=labels)


def monogenic_algebra(field, coeffs, var="x"):
    """k[x]/(p) with basis 1, x, ..., x^(n-1); coeffs low first, monic."""
    F = field
    A = companion_matrix(coeffs, F).a
    n = A.shape[0]
    mats = [F.eye(n)]
    for _ in range(n - 1):
        mats.append(F.matmul(A, mats[-1]))
    labels = ["1"] + [f"{var}^{i}" if i > 1 else var for i in range(1, n)]
    return algebra_from_matrices(F, mats, labels)


def product_algebra(field, n):
    F = field
    # basis: 1 = sum of idempotents, then e_1, ..., e_{n-1}
    mats = []
    for i in range(n):
        m = F.zeros((n, n))
        m[i, i] = F.scalar(1)
        mats.append(m)
    mats = [F.eye(n)] + mats[1:]
    return algebra_from_matrices(F, mats, ["1"] + [f"e{i}" for i in range(1, n)])


def staircase_algebra(field, monomials):
    """k[x_1..x_r]/I for a monomial ideal with standard monomials given."""
    F = field
    mons = [tuple(m) for m in monomials]
    idx = {m: i for i, m in enumerate(mons)}
    n = len(mons)
    zero = tuple(0 for _ in mons[0])
    if mons[0] != zero:
        raise ValueError("the first standard monomial must be 1")
    for m in mons:
        for v in range(len(m)):
            if m[v] and tuple(m[u] - (u == v) for u in range(len(m))) not in idx:
                raise ValueError("standard monomials must form an order ideal")
    c = F.zeros((n, n, n))
    for a, b in itertools.product(range(n), repeat=2):
        s = tuple(x + y for x, y in zip(mons[a], mons[b]))
        if s in idx:
            c[a, b, idx[s]] = F.scalar(1)
    labels = ["*".join(f"x{v}^{e}" for v, e in enumerate(m) if e) or "1" for m in mons]
    return DgAlgebra(F, [0] * n, c, labels=labels)


def random_staircase(n, nvars, rng):
    """A random order ideal of n monomials in nvars variables."""
    mons = [tuple([0] * nvars)]
    while len(mons) < n:
        cands = set()
        have = set(mons)
        for m in mons:
            for v in range(nvars):
                up = tuple(m[u] + (u == v) for u in range(nvars))
                if up in have:
                    continue
                if all(tuple(up[u] - (u == w) for u in range(nvars)) in have for w in range(nvars) if up[w]):
                    cands.add(up)
        cands = sorted(cands)
        mons.append(cands[int(rng.integers(len(cands)))])
    return mons


def upper_triangular_algebra(field, k):
    F = field
    mats = [F.eye(k)]
    for i in range(k):
        for j in range(i, k):
            if (i, j) == (0, 0):
                continue
            m = F.zeros((k, k))
            m[i, j] = F.scalar(1)
            mats.append(m)
    return algebra_from_matrices(F, mats)


def full_matrix_algebra(field, k):
    F = field
    mats = [F.eye(k)]
    for i in range(k):
        for j in range(k):
            if (i, j) == (0, 0):
                continue
            m = F.zeros((k, k))
            m[i, j] = F.scalar(1)
            mats.append(m)
    return algebra_from_matrices(F, mats)


def group_algebra(field, orders):
    """k[Z/o_1 x ... x Z/o_r]."""
    F = field
    elems = list(itertools.product(*[range(o) for o in orders]))
    idx = {g: i for i, g in enumerate(elems)}
    n = len(elems)
    c = F.zeros((n, n, n))
    for a, b in itertools.product(range(n), repeat=2):
        s = tuple((x + y) % o for x, y, o in zip(elems[a], elems[b], orders))
        c[a, b, idx[s]] = F.scalar(1)
    return DgAlgebra(F, [0] * n, c, labels=["g" + "".join(map(str, g)) for g in elems])


def change_basis(Q, P):
    """Q in the basis given by the columns of P (P[:, 0] must be the unit)."""
    F = Q.field
    n = Q.dim
    Pinv = F.inv(P)
    # c'[a, b] = P^-1 (p_a p_b)
    cols = [Q.mul(P[:, a], P[:, b]) for a in range(n) for b in range(n)]
    prods = np.stack(cols, axis=1)
    c = F.matmul(Pinv, prods).T.reshape(n, n, n)
    return DgAlgebra(F, Q.degs, c, unit=0)


def random_basis_change(field, n, rng):
    F = field
    P = F.eye(n)
    if n == 1:
        return P
    if F.char == 0:
        # unitriangular factors with small entries keep the rationals tame
        L = F.eye(n - 1)
        U = F.eye(n - 1)
        for i in range(n - 1):
            for j in range(n - 1):
                v = F.scalar(int(rng.integers(-1, 2)))
                if i > j:
                    L[i, j] = v
                elif i < j:
                    U[i, j] = v
        G = F.matmul(L, U)
    else:
        while True:
            G = F.random((n - 1, n - 1), rng)
            if F.rank(G) == n - 1:
                break
    P[1:, 1:] = G
    P[0, 1:] = F.random((n - 1,), rng, -1, 1) if F.char == 0 else F.random((n - 1,), rng)
    return P


def compatible(family, dim):
    if family == "upper":
        return dim in (1, 3, 6)
    if family == "full":
        return dim in (1, 4)
    return dim >= 1


def _random_monic(F, n, rng):
    if F.char == 0:
        return [F.scalar(int(x)) for x in rng.integers(-3, 4, size=n)] + [F.scalar(1)]
    return [F.scalar(int(x)) for x in rng.integers(0, F.char, size=n)] + [F.scalar(1)]


def _group_orders(dim, rng):
    # a random factorisation of dim into cyclic orders
    opts = [[dim]]
    for a in range(2, dim):
        if dim % a == 0:
            b = dim // a
            if a <= b:
                opts.append([a, b])
    if dim == 8:
        opts.append([2, 2, 2])
    return opts[int(rng.integers(len(opts)))]


def random_algebra(dim, family, seed, field, include_central=False, change=True):
    """A random AlgebraInstance of the given family, basis-changed, with a
    random h (outside k*1 unless include_central)."""
    F = field if isinstance(field, Field) else Field(field)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if not compatible(family, dim):
        raise ValueError(f"family {family!r} has no algebra of dimension {dim}")
    rng = np.random.default_rng(seed)
    meta = {"family": family, "dim": dim, "seed": seed}
    if family == "monogenic":
        coeffs = _random_monic(F, dim, rng)
        Q = monogenic_algebra(F, coeffs)
        meta["poly"] = [F.to_str(c) for c in coeffs]
    elif family == "product":
        Q = product_algebra(F, dim)
    elif family == "truncated":
        nv = int(rng.integers(2, 4))
        mons = random_staircase(dim, nv, rng)
        Q = staircase_algebra(F, mons)
        meta["monomials"] = [list(m) for m in mons]
    elif family == "upper":
        Q = upper_triangular_algebra(F, {1: 1, 3: 2, 6: 3}[dim])
    elif family == "full":
        Q = full_matrix_algebra(F, {1: 1, 4: 2}[dim])
    else:
        orders = _group_orders(dim, rng)
        Q = group_algebra(F, orders)
        meta["orders"] = orders
    if change and dim > 1:
        Q = change_basis(Q, random_basis_change(F, dim, rng))
    while True:
        if F.char == 0:
            h = F.array(rng.integers(-2, 3, size=dim))
        else:
            h = F.random((dim,), rng)
        if include_central or dim == 1 or np.any(h[1:] != 0):
            break
    return AlgebraInstance(Q, h, family, meta)


def families_for(dim):
    return [f for f in FAMILIES if compatible(f, dim)]


def parse_dims(spec):
    """'2..6' or '2,3,5' into a list of ints."""
    spec = str(spec)
    if ".." in spec:
        a, b = spec.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in spec.split(",") if x]


def sweep(dims, count, seed, fields, families=None, oracle=None, keep=False, ids=None):
    """Run verify_theorem on count generated instances.

    Instances cycle through the dims, their compatible families and the
    fields deterministically; seeds derive from the master seed.  ids
    restricts the run to some instance numbers (for splitting work).
    """
    ss = np.random.SeedSequence(seed)
    child = ss.spawn(count)
    combos = []
    for d in dims:
        for fam in families_for(d):
            if families is None or fam in families:
                combos.append((d, fam))
    if not combos:
        raise ValueError("no compatible (dim, family) pairs")
    fields = [f if isinstance(f, Field) else Field(f) for f in fields]
    results = []
    for i in (range(count) if ids is None else ids):
        d, fam = combos[i % len(combos)]
        F = fields[(i // len(combos)) % len(fields)]
        s = int(child[i].generate_state(1)[0])
        inst = random_algebra(d, fam, s, F)
        r = verify_theorem(inst, oracle)
        r.update({"id": i, "family": fam, "field": str(F), "seed": s})
        if keep or not r["agrees"]:
            r["instance"] = inst
        results.append(r)
    return results


def summarize(results):
    agree = sum(r["agrees"] for r in results)
    hist = Counter((r["n"], r["kernel_dim"]) for r in results)
    return {
        "count": len(results),
        "agree": agree,
        "lower_bound_ok": all(r["kernel_dim"] >= r["n"] for r in results),
        "histogram": {f"n={n},ker={k}": v for (n, k), v in sorted(hist.items())},
        "counterexamples": [r["id"] for r in results if not r["agrees"]],
    }


def proof_lower_bound(inst):
    """n + (n - m0) with m0 = dim k[h]: the bound from the cyclic block
    decomposition, valid for commutative Q."""
    return 2 * inst.n - minimal_polynomial_degree(inst)


def is_commutative(Q):
    return np.array_equal(Q.c, Q.c.transpose(1, 0, 2))
