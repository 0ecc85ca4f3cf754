"""Constructors for the worked instances.

pn_object(n, m)        E = B = k[h]/h^(n+1) (deg h = m) as a (k, B)-bimodule
spherical_object(d)    the n = 1 case, B = k[e]/e^2
perturbed_object()     B = <1, h, g>, all products of h and g zero: End(E)
                       has the right dimensions but the wrong ring
split_monad_data       scalar tables c[i, j, k] of split monads
cyclic_cover(n, N)     A = R[t]/(t^(n+1) - w) over R = k[w]/w^N
"""

from __future__ import annotations

import itertools

import numpy as np

from .dga import BimoduleMap, DgAlgebra, DgBimodule
from .exact import Field
from .pnfun import FunctorData, PnStructure, PreconditionError, structure_from_gammas, table_conditions

DEFAULT_FIELD = 65521


def _field(field):
    if field is None:
        return Field(DEFAULT_FIELD)
    return field if isinstance(field, Field) else Field(field)


def algebra_kernel(B, label=""):
    """B as a (k, B)-bimodule: the kernel of k -> B, V -> V (x) B."""
    F = B.field
    A = DgAlgebra.ground(F)
    n = B.dim
    lam = F.eye(n).reshape(1, n, n)
    E = DgBimodule(A, B, B.degs, lam, B.rho, B.d, labels=B.labels)
    return FunctorData(A, B, E, label=label)


def one_dim(A, deg):
    """k[-deg] as an (A, A)-bimodule for A = k."""
    F = A.field
    one = F.eye(1).reshape(1, 1, 1)
    return DgBimodule(A, A, [deg], one, one.copy(), F.zeros((1, 1)))


def left_mult_gamma(Fd, H, elt):
    """H = k[-deg] -> RF sending the generator to left multiplication by elt."""
    B = Fd.B
    v = Fd.rf_element(B.left(Fd.field.coerce(elt)))
    return BimoduleMap(H, Fd.RF, 0, v.reshape(-1, 1))


def algebra_structure(Fd, deg, elements, label=""):
    """Split structure with H = k[-deg] and gamma(H^i) = left multiplication
    by elements[i - 1]; H^i is one dimensional."""
    A = Fd.A
    H = one_dim(A, deg)
    n = len(elements)
    from .twisted import tensor_powers
    powers = tensor_powers(H, n)
    gammas = [None] + [left_mult_gamma(Fd, powers[i], elements[i - 1]) for i in range(1, n + 1)]
    S = structure_from_gammas(Fd, H, gammas)
    S.label = label
    return S


def pn_object(n, m, field=None):
    """E = k[h]/h^(n+1), deg h = m, with gamma(H^i) = h^i."""
    if n < 1 or m < 1:
        raise PreconditionError("pn_object needs n >= 1 and m >= 1")
    F = _field(field)
    B = DgAlgebra.truncated_polynomial(F, n, m)
    Fd = algebra_kernel(B, label=f"pn_object({n},{m})")
    els = [B.basis_vector(i) for i in range(1, n + 1)]
    return Fd, algebra_structure(Fd, m, els, label=Fd.label)


def spherical_object(d, field=None):
    """B = k[e]/e^2 with deg e = d, E = B."""
    if d < 1:
        raise PreconditionError("spherical_object needs d >= 1")
    F = _field(field)
    B = DgAlgebra.truncated_polynomial(F, 1, d, var="e")
    return algebra_kernel(B, label=f"spherical({d})")


def perturbed_algebra(field=None, m=2):
    """<1, h, g> with deg h = m, deg g = 2m and every product of h, g zero."""
    F = _field(field)
    c = F.zeros((3, 3, 3))
    for i in range(3):
        c[0, i, i] = F.scalar(1)
        c[i, 0, i] = F.scalar(1)
    return DgAlgebra(F, [0, m, 2 * m], c, labels=["1", "h", "g"])


def perturbed_object(field=None, m=2):
    """n = 2 data on the perturbed algebra with gamma(H) = h, gamma(H^2) = g.
    All structural checks pass, the monad condition does not."""
    B = perturbed_algebra(field, m)
    Fd = algebra_kernel(B, label="perturbed")
    return Fd, algebra_structure(Fd, m, [B.basis_vector(1), B.basis_vector(2)], label="perturbed")


def product_object(d, field=None):
    """B = k x k[e]/e^2, E = e_2 B: spherical, with B not local."""
    F = _field(field)
    c2 = F.zeros((3, 3, 3))
    # basis u = e1 + e2, e2, e
    prods = {(0, 0): [1, 0, 0], (0, 1): [0, 1, 0], (1, 0): [0, 1, 0], (1, 1): [0, 1, 0],
             (0, 2): [0, 0, 1], (2, 0): [0, 0, 1], (1, 2): [0, 0, 1], (2, 1): [0, 0, 1]}
    for (i, j), v in prods.items():
        c2[i, j] = F.coerce(v)
    B = DgAlgebra(F, [0, 0, d], c2, labels=["1", "e2", "e"])
    A = DgAlgebra.ground(F)
    # E = e2 B = span(e2, e)
    rho = F.zeros((3, 2, 2))
    rho[0] = F.eye(2)
    rho[1] = F.eye(2)
    rho[2][1, 0] = F.scalar(1)
    E = DgBimodule(A, B, [0, d], F.eye(2).reshape(1, 2, 2), rho, F.zeros((2, 2)))
    return FunctorData(A, B, E, label=f"product({d})")


def double_object(m=1, field=None):
    """E = B + B[1] over B = k[h]/h^2: End(E) is too big."""
    F = _field(field)
    B = DgAlgebra.truncated_polynomial(F, 1, m)
    A = DgAlgebra.ground(F)
    degs = np.concatenate([B.degs, B.degs - 1])
    rho = np.stack([_bdiag(F, B.rho[b], B.rho[b]) for b in range(B.dim)])
    E = DgBimodule(A, B, degs, F.eye(4).reshape(1, 4, 4), rho, F.zeros((4, 4)))
    return FunctorData(A, B, E, label="double")


def _bdiag(F, a, b):
    out = F.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]))
    out[:a.shape[0], :a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def diagonal_object(B):
    """E = B over (B, B): F is the identity."""
    from .twisted import diagonal
    E = DgBimodule.diagonal(B)
    return FunctorData(B, B, E, label="identity")


# ----------------------------------------------------------------------
# split monad scalar tables


def algebra_table(F, coeffs, basis):
    """Structure constants of k[h]/(p) in the given basis.

    coeffs: p = h^(n+1) + sum coeffs[i] h^i; basis: columns are the new
    basis vectors in monomial coordinates.
    """
    n = len(coeffs) - 1
    N = n + 1
    mono = F.zeros((N, N, N))
    red = _reduction(F, coeffs)
    for i in range(N):
        for j in range(N):
            mono[i, j] = red[i + j]
    Pinv = F.inv(basis)
    c = F.zeros((N, N, N))
    for i in range(N):
        for j in range(N):
            x = F.reduce(np.outer(basis[:, i], basis[:, j])).reshape(1, N * N)
            prod = F.matmul(x, mono.reshape(N * N, N))[0]
            c[i, j] = F.matmul(Pinv, prod.reshape(-1, 1))[:, 0]
    return c


def _reduction(F, coeffs):
    """h^k mod p as coordinate vectors for k = 0..2n."""
    N = len(coeffs)
    out = []
    for k in range(2 * N - 1):
        v = F.zeros(N)
        if k < N:
            v[k] = F.scalar(1)
        else:
            prev = out[k - 1]
            # h * prev: shift up, fold the top coefficient
            top = prev[N - 1]
            v[1:] = prev[:-1]
            v = F.reduce(v - top * F.coerce(coeffs))
        out.append(v)
    return out


def split_monad_data(n, m=0, seed=0, field=None, rescale=True):
    """A random associative split table satisfying the strong condition.

    Built from k[h]/(p) for a random monic p of degree n+1 (p = h^(n+1) when
    m > 0, since a grading forces homogeneity), in a basis e_i = u^i h^i +
    lower terms.  Returns (c, info).
    """
    if n < 1:
        raise PreconditionError("n must be at least 1")
    F = _field(field)
    rng = np.random.default_rng(seed)
    N = n + 1
    coeffs = F.zeros(N)
    if m == 0:
        coeffs = F.random((N,), rng)
    units = [x for x in range(2, 6) if F.scalar(x) != 0] or [1]
    u = F.scalar(units[int(rng.integers(len(units)))]) if rescale else F.scalar(1)
    # e_1 = u h + t, e_i = e_1^i + lower terms (ungraded), e_i = u^i h^i (graded)
    P = F.zeros((N, N))
    P[0, 0] = F.scalar(1)
    if m == 0:
        t = F.random((1,), rng)[0]
        e1 = F.zeros(N)
        e1[0] = t
        e1[1] = u
        red = _reduction(F, coeffs)
        cur = P[:, 0].copy()
        for i in range(1, N):
            cur = _poly_mul(F, red, cur, e1)
            low = F.random((N,), rng)
            low[i:] = 0
            P[:, i] = F.reduce(cur + low) if i > 1 else cur
    else:
        for i in range(1, N):
            P[i, i] = F.scalar(u ** i) if F.is_rational else pow(int(u), i, F.p)
    c = algebra_table(F, coeffs, P)
    cond = table_conditions(c)
    return c, {"field": F, "coeffs": coeffs, "basis": P, "degree": m, "conditions": cond}


def _poly_mul(F, red, x, y):
    N = len(x)
    out = F.zeros(N)
    for i in range(N):
        if x[i] == 0:
            continue
        for j in range(N):
            if y[j] == 0:
                continue
            out = F.reduce(out + x[i] * y[j] * red[i + j])
    return out


def split_instance(info, field=None):
    """(FunctorData, PnStructure) realising a split_monad_data table: B is
    k[h]/(p) in the monomial basis and gamma(H^i) is left multiplication by
    the basis vector e_i."""
    F = info["field"]
    coeffs, P, m = info["coeffs"], info["basis"], info["degree"]
    N = len(coeffs)
    red = _reduction(F, coeffs)
    c = F.zeros((N, N, N))
    for i in range(N):
        for j in range(N):
            c[i, j] = red[i + j]
    B = DgAlgebra(F, [m * i for i in range(N)], c, labels=["1"] + [f"h^{i}" for i in range(1, N)])
    Fd = algebra_kernel(B, label="split")
    S = algebra_structure(Fd, m, [P[:, i] for i in range(1, N)], label="split")
    return Fd, S


# ----------------------------------------------------------------------
# cyclic covers


def root_of_unity(F, order):
    """A primitive root of unity of the given order in F, by search."""
    if F.is_rational:
        if order in (1, 2):
            return F.scalar(1 if order == 1 else -1)
        raise PreconditionError(f"Q has no primitive root of unity of order {order}")
    if (F.p - 1) % order:
        raise PreconditionError(f"GF({F.p}) has no primitive root of unity of order {order}")
    for z in range(2, F.p) if order > 1 else [1]:
        if pow(z, order, F.p) == 1 and all(pow(z, order // q, F.p) != 1 for q in _prime_factors(order)):
            return z
    raise PreconditionError("no root of unity found")


def _prime_factors(n):
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


class MonomialRing:
    """k[t_1..t_r]/(t_1^M, t_i^e - t_1^e): every t_i^e equals w = t_1^e and
    w^N = 0.  Basis: monomials with exponent < M on t_1 and < e elsewhere."""

    def __init__(self, F, nvars, e, N):
        self.F, self.r, self.e, self.M = F, nvars, e, e * N
        ranges = [range(self.M)] + [range(e)] * (nvars - 1)
        self.monos = list(itertools.product(*ranges))
        self.index = {m: i for i, m in enumerate(self.monos)}
        self.dim = len(self.monos)

    def mono_times(self, a, b):
        ex = [x + y for x, y in zip(a, b)]
        for i in range(1, self.r):
            if ex[i] >= self.e:
                ex[i] -= self.e
                ex[0] += self.e
        if ex[0] >= self.M:
            return None
        return self.index[tuple(ex)]

    def var(self, i, power=1):
        v = self.F.zeros(self.dim)
        ex = [0] * self.r
        ex[i] = power
        # reduce through the relations
        j = self.mono_times(tuple([0] * self.r), tuple(ex)) if ex[i] < (self.M if i == 0 else self.e) else None
        if j is None:
            q, rem = divmod(power, self.e) if i else (0, power)
            ex = [0] * self.r
            ex[i] = rem
            ex[0] += q * self.e
            if ex[0] >= self.M:
                return v
            j = self.index[tuple(ex)]
        v[j] = self.F.scalar(1)
        return v

    def one(self):
        return self.var(0, 0)

    def mult_matrix(self, x):
        """Matrix of multiplication by x."""
        F = self.F
        m = F.zeros((self.dim, self.dim))
        for a, xa in enumerate(x):
            if xa == 0:
                continue
            for b, mb in enumerate(self.monos):
                k = self.mono_times(self.monos[a], mb)
                if k is not None:
                    m[k, b] = F.reduce(m[k, b] + xa)
        return m

    def mul(self, x, y):
        return self.F.matmul(self.mult_matrix(x), y.reshape(-1, 1))[:, 0]

    def lin(self, *terms):
        """sum c * vector."""
        F = self.F
        out = F.zeros(self.dim)
        for c, v in terms:
            out = F.reduce(out + F.scalar(c) * v) if not F.is_rational else out + F.scalar(c) * v
        return out

    def ideal(self, gens):
        """Basis (columns) of the ideal generated by gens."""
        F = self.F
        if not gens:
            return F.zeros((self.dim, 0))
        cols = np.concatenate([self.mult_matrix(g) for g in gens], axis=1)
        basis, _ = F.column_space(cols)
        return basis


def _twisted_diagonal_product(Rg, x, y, zeta, ks):
    """prod over k in ks of (y - zeta^k x) for ring variables x, y."""
    F = Rg.F
    out = Rg.one()
    for k in ks:
        z = F.scalar(pow(int(zeta), k, F.p)) if not F.is_rational else F.scalar(zeta) ** k
        f = Rg.lin((1, Rg.var(y)), (F.reduce(-z) if not F.is_rational else -z, Rg.var(x)))
        out = Rg.mul(out, f)
    return out


def _rank(F, m):
    return F.rank(m) if m.size else 0


def _span_equal(F, a, b):
    ra, rb = _rank(F, a), _rank(F, b)
    return ra == rb == _rank(F, np.concatenate([a, b], axis=1))


def cyclic_cover(n, N, field=None):
    """Verification bundle for the degree n+1 cyclic cover over R = k[w]/w^N.

    A = R[t]/(t^(n+1) - w) = k[t]/t^((n+1)N) carries the action t -> zeta t.
    Reports
      eigenspaces   dims of the eigenprojections of A, each free of rank 1
                    over R on t^i, and their products t^i t^j = w^e t^(i+j-e(n+1))
      cofiltration  D = A (x)_R A modulo the twisted diagonal ideals
                    I_k = prod_{j<=k} (t' - zeta^j t); the kernel of
                    D/I_k -> D/I_(k-1) is free of rank one over A and restricts
                    onto t^k A on the graph t' = zeta^k t.  The restriction
                    loses exactly the k-dimensional annihilator of t^k, an
                    effect of truncating w
      comult        for 0 <= k < n: D/I_(k+1) -> D/I_1 (x)_A D/I_k is well
                    defined and bijective on the ideal pieces
    """
    F = _field(field)
    e = n + 1
    if n < 1:
        raise PreconditionError("n must be at least 1")
    if not F.is_rational and F.p % e == 0:
        raise PreconditionError("the characteristic divides n + 1")
    zeta = root_of_unity(F, e)
    notes = []
    if N < 2:
        notes.append("N = 1: w = 0, the cover is fully ramified over a point (boundary case)")
    out = {"n": n, "N": N, "field": F, "zeta": zeta, "notes": notes}
    zpow = [F.scalar(pow(int(zeta), k, F.p)) if not F.is_rational else F.scalar(zeta) ** k for k in range(e)]

    # A and its eigenspaces
    A1 = MonomialRing(F, 1, e, N)
    dimA = A1.dim
    sigma = F.zeros((dimA, dimA))
    for a in range(dimA):
        sigma[a, a] = zpow[a % e]
    inv_e = F.inv_scalar(F.scalar(e))
    eig = []
    for i in range(e):
        P = F.zeros((dimA, dimA))
        sk = F.eye(dimA)
        for k in range(e):
            P = F.reduce(P + F.reduce(sk * F.scalar(zpow[(-i * k) % e])))
            sk = F.matmul(sigma, sk)
        P = F.reduce(P * inv_e)
        eig.append(P)
    eig_dims = [_rank(F, P) for P in eig]
    w = A1.var(0, e)
    free = []
    for i in range(e):
        gens = [A1.var(0, i)]
        for _ in range(N - 1):
            gens.append(A1.mul(w, gens[-1]))
        Gm = np.stack(gens, axis=1)
        free.append(_rank(F, Gm) == N and _span_equal(F, Gm, F.column_space(eig[i])[0]))
    mult_ok = True
    for i in range(e):
        for j in range(e):
            prod = A1.mul(A1.var(0, i), A1.var(0, j))
            s = i + j
            expect = A1.var(0, s) if s < e else A1.mul(w, A1.var(0, s - e))
            mult_ok &= bool(np.array_equal(prod, expect)) and bool(F.is_zero(F.matmul(eig[s % e], prod.reshape(-1, 1)) - prod.reshape(-1, 1)))
    out["eigenspaces"] = {"dims": eig_dims, "expected": [N] * e, "free_rank_one": free, "multiplication": mult_ok}

    # D = A (x)_R A with variables t (0), t' (1)
    D = MonomialRing(F, 2, e, N)
    out["D_dim"] = D.dim
    full = _twisted_diagonal_product(D, 0, 1, zeta, range(e))
    out["full_product_zero"] = bool(F.is_zero(full))
    I = {}
    for k in range(-1, e):
        I[k] = D.ideal([_twisted_diagonal_product(D, 0, 1, zeta, range(k + 1))]) if k >= 0 else F.eye(D.dim)
    levels = []
    for k in range(e):
        # kernel of D/I_k -> D/I_(k-1) is I_(k-1)/I_k
        kdim = _rank(F, I[k - 1]) - _rank(F, I[k])
        # restriction to the graph t' = zeta^k t: D -> A
        res = F.zeros((dimA, D.dim))
        for col, (a, b) in enumerate(D.monos):
            tot = a + b
            if tot < dimA:
                res[tot, col] = F.scalar(zpow[(k * b) % e])
        gk = _twisted_diagonal_product(D, 0, 1, zeta, range(k))
        # the kernel piece is free of rank one over A on g_k
        gen = np.concatenate([D.ideal([gk]), I[k]], axis=1)
        free1 = kdim == dimA and _rank(F, gen) == _rank(F, I[k - 1])
        r = F.matmul(res, gk.reshape(-1, 1))[:, 0]
        unit_tk = bool(r[k] != 0 and F.is_zero(np.delete(r, k))) if k < dimA else False
        img = F.matmul(res, I[k - 1])
        kernel = kdim - _rank(F, img)
        tk = A1.ideal([A1.var(0, k)])
        levels.append({"k": k, "kernel_dim": kdim, "free_rank_one": bool(free1), "generator_to_unit_t^k": unit_tk,
                       "image_is_t^kA": bool(_span_equal(F, img, tk)), "restriction_kernel_dim": kernel,
                       "truncation_defect_expected": k})
    out["cofiltration"] = levels

    # comultiplication on three variables t1 (0), t2 (1), t3 (2)
    T = MonomialRing(F, 3, e, N)
    emb = F.zeros((T.dim, D.dim))
    for col, (a, c) in enumerate(D.monos):
        emb[T.index[(a, 0, c)], col] = F.scalar(1)
    comult = []
    for k in range(n):
        J = T.ideal([_twisted_diagonal_product(T, 0, 1, zeta, range(2)),
                     _twisted_diagonal_product(T, 1, 2, zeta, range(k + 1))])
        Ik1 = I[k + 1]
        # well defined: I_(k+1) maps into J
        filt = _span_equal(F, np.concatenate([J, F.matmul(emb, Ik1)], axis=1), J) if Ik1.shape[1] else True
        # ideal pieces: I_k / I_(k+1) and the ideal g O, g = (t2 - t1) prod_{b<k} (t3 - zeta^b t2)
        g = T.mul(_twisted_diagonal_product(T, 0, 1, zeta, range(1)),
                  _twisted_diagonal_product(T, 1, 2, zeta, range(k)))
        G = T.ideal([g])
        src = np.concatenate([I[k], Ik1], axis=1)
        src_dim = _rank(F, src) - _rank(F, Ik1)
        tgt_dim = _rank(F, np.concatenate([G, J], axis=1)) - _rank(F, J)
        img = F.matmul(emb, I[k])
        img_dim = _rank(F, np.concatenate([img, J], axis=1)) - _rank(F, J)
        inside = _span_equal(F, np.concatenate([img, G, J], axis=1), np.concatenate([G, J], axis=1))
        bij = bool(filt and inside and src_dim == img_dim == tgt_dim)
        comult.append({"k": k, "filters": bool(filt), "source_dim": src_dim, "target_dim": tgt_dim,
                       "image_dim": img_dim, "bijective": bij})
    out["comult"] = comult

    # the pushforward kernel: A as an (A, R)-bimodule, RF = End_R(A)
    Fd = cover_functor(A1, N)
    out["monad_dim"] = Fd.RF.dim
    out["monad_dim_expected"] = e * e * N
    out["ok"] = bool(all(d == N for d in eig_dims) and all(free) and mult_ok and out["full_product_zero"]
                     and all(l["free_rank_one"] and l["generator_to_unit_t^k"] and l["image_is_t^kA"]
                             and l["restriction_kernel_dim"] == l["truncation_defect_expected"] for l in levels)
                     and all(c["bijective"] for c in comult) and out["monad_dim"] == out["monad_dim_expected"])
    return out


def _ring_algebra(Rg, labels=None):
    F = Rg.F
    n = Rg.dim
    c = F.zeros((n, n, n))
    for a, ma in enumerate(Rg.monos):
        for b, mb in enumerate(Rg.monos):
            k = Rg.mono_times(ma, mb)
            if k is not None:
                c[a, b, k] = F.scalar(1)
    return DgAlgebra(F, [0] * n, c, labels=labels)


def cover_functor(A1, N):
    """F = - (x)_A A_R for the cover ring A1 over R = k[w]/w^N, w = t^e."""
    F = A1.F
    e = A1.e
    A = _ring_algebra(A1, labels=[f"t^{a}" for a in range(A1.dim)])
    Rr = MonomialRing(F, 1, 1, N)
    R = _ring_algebra(Rr, labels=[f"w^{a}" for a in range(N)])
    n = A1.dim
    rho = F.zeros((N, n, n))
    for j in range(N):
        rho[j] = A1.mult_matrix(A1.var(0, e * j))
    E = DgBimodule(A, R, [0] * n, A.lam, rho, F.zeros((n, n)))
    return FunctorData(A, R, E, label="cover")


def free_sum_kernel(B, r, label=""):
    """E = B^r as a (k, B)-bimodule."""
    F = B.field
    A = DgAlgebra.ground(F)
    n = B.dim
    degs = np.tile(B.degs, r)
    rho = np.stack([_blocks(F, [B.rho[b]] * r) for b in range(n)])
    E = DgBimodule(A, B, degs, F.eye(n * r).reshape(1, n * r, n * r), rho, F.zeros((n * r, n * r)))
    return FunctorData(A, B, E, label=label or f"free_sum({r})")


def _blocks(F, mats):
    out = mats[0]
    for m in mats[1:]:
        out = _bdiag(F, out, m)
    return out


def indeterminate_fixture(r=3):
    """Weak adjoints data over GF(2) whose closed map family is too large
    to enumerate and holds no quasi-isomorphism: E = B^r on the perturbed
    algebra, n = 2.  Only H and n of the structure are meaningful here."""
    F = Field(2)
    B = perturbed_algebra(F)
    Fd = free_sum_kernel(B, r, label="indeterminate")
    H = one_dim(Fd.A, 2)
    zero = BimoduleMap(H, Fd.RF, 0, F.zeros((Fd.RF.dim, 1)))
    from .twisted import tensor_powers
    pw = tensor_powers(H, 2)
    gammas = [None, zero, BimoduleMap(pw[2], Fd.RF, 0, F.zeros((Fd.RF.dim, 1)))]
    return Fd, structure_from_gammas(Fd, H, gammas)
