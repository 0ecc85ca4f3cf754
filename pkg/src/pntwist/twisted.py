"""One-sided twisted complexes of DG bimodules and their convolutions.

Index convention: a twisted complex has objects X_i and components
a_ij: X_i -> X_j for i < j of degree i - j + 1.  Its convolution is
the sum of the X_i[-i] in increasing index order, with differential
(-1)^i d_i on the diagonal and a_ij as raw matrices below it.  In this
convention the Maurer-Cartan identity reads

    (-1)^j d(a_ij) + sum_{i<k<j} a_kj a_ik = 0.

The subcomplexes are the tails X_{>=t}; the quotients are X_{<t}.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

from . import dga
from .dga import BimoduleMap, DgBimodule, InvalidStructure, LeafArray, direct_sum, shift, tensor_over
from .exact import Coordinates, NoSolution, block_diag


class MaurerCartanError(InvalidStructure):
    pass


def restrict(M, idx, struct=None):
    """The bimodule spanned by the basis vectors idx of M.

    Valid when the span is preserved by the actions and the restricted
    differential squares to zero (sub-objects and quotients by tails).
    """
    F = M.field
    idx = np.asarray(idx, dtype=np.int64)
    ix = np.ix_(idx, idx)
    lam = M.lam[(slice(None),) + ix] if M.dim else M.lam
    rho = M.rho[(slice(None),) + ix] if M.dim else M.rho
    return DgBimodule(M.left, M.right, M.degs[idx], lam, rho, M.d[ix], check=False, struct=struct)


class TwistedComplex:
    """Objects X_i (dict index -> bimodule) with components a_ij (dict)."""

    def __init__(self, objects, components=None, check=True):
        self.objects = dict(sorted(objects.items()))
        self.indices = list(self.objects)
        first = next(iter(self.objects.values()))
        self.left, self.right = first.left, first.right
        self.field = first.field
        self.components = {}
        for (i, j), a in (components or {}).items():
            if not i < j:
                raise InvalidStructure("twisted complexes here are one-sided: components need i < j")
            if not isinstance(a, BimoduleMap):
                a = BimoduleMap(self.objects[i], self.objects[j], i - j + 1, a)
            if a.degree != i - j + 1:
                raise InvalidStructure(f"component ({i},{j}) must have degree {i - j + 1}")
            if not a.is_zero():
                self.components[(i, j)] = a
        if check:
            bad = self.maurer_cartan_defect()
            if bad is not None:
                raise MaurerCartanError(f"Maurer-Cartan identity fails at {bad}")

    def __repr__(self):
        return f"TwistedComplex(indices={self.indices}, components={sorted(self.components)})"

    def component(self, i, j):
        a = self.components.get((i, j))
        if a is None:
            return dga.zero_map(self.objects[i], self.objects[j], i - j + 1)
        return a

    def maurer_cartan_defect(self):
        F = self.field
        for i, j in itertools.combinations(self.indices, 2):
            a = self.component(i, j)
            lhs = F.reduce(F.sign(j) * a.differential().matrix)
            for k in self.indices:
                if i < k < j and (i, k) in self.components and (k, j) in self.components:
                    lhs = F.reduce(lhs + F.matmul(self.components[(k, j)].matrix, self.components[(i, k)].matrix))
            if not F.is_zero(lhs):
                return (i, j)
            if not a.is_bilinear():
                return (i, j)
        return None

    @cached_property
    def offsets(self):
        off, pos = {}, 0
        for i in self.indices:
            off[i] = pos
            pos += self.objects[i].dim
        return off

    def block(self, i):
        o = self.offsets[i]
        return np.arange(o, o + self.objects[i].dim)

    def blocks(self, indices):
        idx = [self.block(i) for i in indices]
        return np.concatenate(idx) if idx else np.zeros(0, dtype=np.int64)

    @cached_property
    def total(self):
        return self.convolve()

    def convolve(self):
        F = self.field
        pieces = [shift(self.objects[i], -i) for i in self.indices]
        S = direct_sum(pieces)
        d = S.d.copy()
        for (i, j), a in self.components.items():
            d[np.ix_(self.block(j), self.block(i))] = a.matrix
        C = DgBimodule(S.left, S.right, S.degs, S.lam, S.rho, d, check=False, struct=S.struct)
        if not F.is_zero(F.matmul(C.d, C.d)):
            raise MaurerCartanError("convolution differential does not square to zero")
        C.twisted = self
        return C

    def piece(self, i):
        """X_i[-i] as it sits in the convolution."""
        return shift(self.objects[i], -i)

    def truncate(self, lo=None, hi=None):
        """The twisted complex on indices in [lo, hi]."""
        keep = [i for i in self.indices if (lo is None or i >= lo) and (hi is None or i <= hi)]
        comps = {k: v for k, v in self.components.items() if k[0] in keep and k[1] in keep}
        return TwistedComplex({i: self.objects[i] for i in keep}, comps, check=False)

    def inclusion(self, sub):
        """Inclusion of the convolution of a tail sub = self.truncate(lo)."""
        F = self.field
        m = F.zeros((self.total.dim, sub.total.dim))
        for i in sub.indices:
            m[np.ix_(self.block(i), sub.block(i))] = F.eye(self.objects[i].dim)
        return BimoduleMap(sub.total, self.total, 0, m)

    def projection(self, quo):
        """Projection onto the convolution of quo = self.truncate(hi=...)."""
        F = self.field
        m = F.zeros((quo.total.dim, self.total.dim))
        for i in quo.indices:
            m[np.ix_(quo.block(i), self.block(i))] = F.eye(self.objects[i].dim)
        return BimoduleMap(self.total, quo.total, 0, m)

    def piece_inclusion(self, i):
        F = self.field
        m = F.zeros((self.total.dim, self.objects[i].dim))
        m[self.block(i)] = F.eye(self.objects[i].dim)
        return m

    def map_matrix(self, other, comps):
        """Assemble a map of convolutions self -> other from raw components
        {(a, b): matrix X_a -> Y_b}."""
        F = self.field
        m = F.zeros((other.total.dim, self.total.dim))
        for (a, b), c in comps.items():
            mat = c.matrix if isinstance(c, BimoduleMap) else c
            m[np.ix_(other.block(b), self.block(a))] = F.reduce(m[np.ix_(other.block(b), self.block(a))] + mat)
        return m


# ----------------------------------------------------------------------
# cyclic coextensions


class CyclicCoextension:
    """A twisted complex with X_{-k} = H^k[-k] for k = 0..n (X_0 = A).

    powers[k] is the bimodule H^k (powers[0] the diagonal A).  The tails
    give Q_i (indices >= -i); J_n is the quotient by X_0.
    """

    def __init__(self, tc: TwistedComplex, powers, n, label=""):
        self.tc = tc
        self.powers = powers
        self.n = n
        self.label = label
        if tc.indices != list(range(-n, 1)):
            raise InvalidStructure("a cyclic coextension has indices -n..0")

    @property
    def Qn(self):
        return self.tc.total

    def Q(self, i):
        """The tail Q_i (indices >= -i), cached so its total is a fixed object."""
        if i >= self.n:
            return self.tc
        cache = self.__dict__.setdefault("_Q", {})
        if i not in cache:
            cache[i] = self.tc.truncate(lo=-i)
        return cache[i]

    @cached_property
    def J(self):
        return self.tc.truncate(hi=-1)

    def iota_i(self, i):
        """Q_{i-1} -> Q_i."""
        return self.Q(i).inclusion(self.Q(i - 1))

    def mu_i(self, i):
        """Q_i -> H^i, the projection onto the bottom piece.  The piece
        X_{-i}[i] carries the same data as powers[i], so the map lands in
        the tensor power itself and leaf operations apply to it."""
        Qi = self.Q(i)
        F = self.tc.field
        m = F.zeros((self.powers[i].dim, Qi.total.dim))
        m[:, Qi.block(-i)] = F.eye(self.powers[i].dim)
        return BimoduleMap(Qi.total, self.powers[i], 0, m)

    def iota(self):
        """A -> Q_n."""
        Qn = self.tc
        F = Qn.field
        return BimoduleMap(self.tc.piece(0), Qn.total, 0, Qn.piece_inclusion(0))

    def kappa(self):
        return self.tc.projection(self.J)

    def lam(self):
        """J_n -> A of degree 1, the connecting map of the triangle."""
        tc = self.tc
        F = tc.field
        A0 = tc.piece(0)
        m = F.zeros((A0.dim, self.J.total.dim))
        for i in self.J.indices:
            if (i, 0) in tc.components:
                m[:, self.J.block(i)] = tc.components[(i, 0)].matrix
        return BimoduleMap(self.J.total, A0, 1, m)

    def cone_iota_to_J(self):
        """cone(iota) -> J_n, zero on A[1] and kappa on Q_n."""
        i = self.iota()
        C = dga.cone(i)
        F = self.tc.field
        k = self.kappa().matrix
        m = F.zeros((self.J.total.dim, C.dim))
        m[:, i.source.dim:] = k
        return BimoduleMap(C, self.J.total, 0, m)

    def maps(self):
        out = {"iota": self.iota(), "kappa": self.kappa(), "lambda": self.lam()}
        for i in range(1, self.n + 1):
            out[f"iota_{i}"] = self.iota_i(i)
            out[f"mu_{i}"] = self.mu_i(i)
        return out


def tensor_powers(H, n):
    """[A, H, H (x) H, ...] built left-associatively."""
    A = DgBimodule.diagonal(H.left)
    out = [A, H]
    for _ in range(2, n + 1):
        out.append(tensor_over(out[-1], H))
    return out[: n + 1]


# ----------------------------------------------------------------------
# leaf helpers for maps between tensor powers


def merge_algebra_leaves(la, target_mods):
    """Absorb every diagonal-algebra leaf into a neighbour by the action."""
    while True:
        pos = next((p for p, m in enumerate(la.mods) if getattr(m, "is_diagonal", False)), None)
        if pos is None or len(la.mods) == 1:
            return la
        M = la.mods[pos]
        if pos > 0:
            nb = la.mods[pos - 1]
            la = la.apply(pos - 1, _right_action(nb))
        else:
            nb = la.mods[pos + 1]
            la = la.apply(pos, _left_action(nb))


_action_cache = {}


def _right_action(U):
    key = (id(U), "r")
    if key not in _action_cache:
        _action_cache[key] = (U, dga.action_map(U, "right"))
    return _action_cache[key][1]


def _left_action(U):
    key = (id(U), "l")
    if key not in _action_cache:
        _action_cache[key] = (U, dga.action_map(U, "left"))
    return _action_cache[key][1]


def diagonal(A):
    D = getattr(A, "_diag", None)
    if D is None:
        D = DgBimodule.diagonal(A)
        D.is_diagonal = True
        A._diag = D
    return D


def apply_per_leaf(source_power, maps, target):
    """phi_0 (x) ... (x) phi_{L-1} on H^L with Koszul signs, A-leaves merged,
    landing in target.  maps[j] is a BimoduleMap out of H."""
    la = LeafArray.basis_of(source_power) if source_power.dim else None
    if la is None:
        F = target.field
        return F.zeros((target.dim, 0))
    # apply from the right so earlier positions keep their index and the
    # Koszul sign sees the untouched leaves before each position
    for j in reversed(range(len(maps))):
        la = la.apply(j, maps[j])
    la = merge_algebra_leaves(la, None)
    return la.to(target).T


# ----------------------------------------------------------------------
# truncated twisted tensor algebras


class TTA(CyclicCoextension):
    """Truncated twisted tensor algebra of (H, sigma) of length n."""

    def __init__(self, H, sigma, n):
        if n < 1:
            raise ValueError("n must be positive")
        if sigma.degree != 1 or not sigma.is_closed():
            raise InvalidStructure("sigma must be a closed degree 1 map H -> A")
        A = H.left
        Ad = diagonal(A)
        sig = BimoduleMap(H, Ad, 1, sigma.matrix)
        powers = [Ad] + tensor_powers(H, n)[1:]
        self.H, self.sigma, self.A = H, sig, A
        objects = {-k: shift(powers[k], -k) for k in range(n + 1)}
        comps = {}
        for k in range(n):
            # xi_{k+1}: H^{k+1} -> H^k, sum over positions of sigma
            src, tgt = powers[k + 1], powers[k]
            F = H.field
            m = F.zeros((tgt.dim, src.dim))
            ident = dga.identity_map(H)
            for i in range(k + 1):
                maps = [ident] * (k + 1)
                maps[i] = sig
                m = F.reduce(m + apply_per_leaf(src, maps, tgt))
            comps[(-(k + 1), -k)] = BimoduleMap(objects[-(k + 1)], objects[-k], 0, m)
        tc = TwistedComplex(objects, comps, check=True)
        super().__init__(tc, powers, n, "tta")

    def unit(self):
        return self.iota()

    @cached_property
    def square(self):
        return tensor_over(self.Qn, self.Qn)

    def multiplication(self):
        """Q (x)_A Q -> Q: concatenation H^k (x) H^l -> H^{k+l}, zero past n."""
        F = self.tc.field
        Q = self.Qn
        T = F.zeros((Q.dim, Q.dim, Q.dim))
        for k in range(self.n + 1):
            for l in range(self.n + 1 - k):
                c = concat_tensor(self.powers, k, l)
                T[np.ix_(self.tc.block(-k), self.tc.block(-l), self.tc.block(-(k + l)))] = c
        return dga.bilinear_map(self.square, Q, T)


    def multiplication_defect(self):
        """d(mu); nonzero only on pieces H^k (x) H^l with k + l = n + 1."""
        return self.multiplication().differential()

    @cached_property
    def truncated_square(self):
        """The subcomplex of Q (x) Q spanned by H^k (x) H^l with k + l <= n,
        with its inclusion.  The multiplication is a chain map on it."""
        F = self.tc.field
        S = self.square
        t = S.struct[1]
        Q = self.Qn
        reps = []
        for k in range(self.n + 1):
            for l in range(self.n + 1 - k):
                for x in self.tc.block(-k):
                    for y in self.tc.block(-l):
                        E = F.zeros((1, Q.dim, Q.dim))
                        E[0, x, y] = F.scalar(1)
                        reps.append(E)
        coords = t.project1(np.concatenate(reps)) if reps else F.zeros((0, S.dim))
        return submodule(S, coords.T)


def submodule(M, vectors):
    """Sub-bimodule spanned by homogeneous columns; returns (N, inclusion).

    The span must be closed under d and the actions."""
    F = M.field
    cols = []
    degs = []
    for dg in sorted(set(M.degs.tolist())):
        idx = np.flatnonzero(M.degs == dg)
        V = F.zeros((M.dim, vectors.shape[1]))
        V[idx] = vectors[idx]  # homogeneous parts; the span must be graded
        B, _ = F.column_space(V)
        if B.shape[1]:
            cols.append(B)
            degs.extend([dg] * B.shape[1])
    basis = np.concatenate(cols, axis=1) if cols else F.zeros((M.dim, 0))
    co = Coordinates(F, basis)

    def restrict_op(op):
        img = F.matmul(op, basis)
        out = co(img)
        if not np.array_equal(F.matmul(basis, out), img):
            raise InvalidStructure("span is not a sub-bimodule")
        return out

    lam = np.stack([restrict_op(M.lam[a]) for a in range(M.left.dim)]) if basis.shape[1] else F.zeros((M.left.dim, 0, 0))
    rho = np.stack([restrict_op(M.rho[b]) for b in range(M.right.dim)]) if basis.shape[1] else F.zeros((M.right.dim, 0, 0))
    d = restrict_op(M.d) if basis.shape[1] else F.zeros((0, 0))
    N = DgBimodule(M.left, M.right, degs, lam, rho, d, check=False)
    return N, BimoduleMap(N, M, 0, basis)


def concat_tensor(powers, k, l):
    """Tensor (dim H^k, dim H^l, dim H^{k+l}) of the identification
    H^k (x)_A H^l = H^{k+l}."""
    Hk, Hl, Hkl = powers[k], powers[l], powers[k + l]
    F = Hk.field
    S = tensor_over(Hk, Hl)
    la = LeafArray.basis_of(S)
    la = merge_algebra_leaves(la, None)
    img = la.to(Hkl)  # (dim S, dim Hkl)
    # basis pair (x, y) -> element of S: project outer products
    E = F.zeros((Hk.dim * Hl.dim, Hk.dim, Hl.dim))
    for x in range(Hk.dim):
        for y in range(Hl.dim):
            E[x * Hl.dim + y, x, y] = F.scalar(1)
    coords = S.struct[1].project1(E)  # (Hk*Hl, dim S)
    return F.matmul(coords, img).reshape(Hk.dim, Hl.dim, Hkl.dim)


def tta_compare(T1: TTA, T2: TTA, f: BimoduleMap, beta: BimoduleMap, check=True):
    """The comparison map between truncated twisted tensor algebras.

    f: H -> H' closed degree 0, beta: H -> A degree 0 with
    sigma = sigma' f + d(beta).  The component H^{i+k} -> H'^i is the sum
    over k-subsets of positions of phi_0 (x) ... with beta at the subset
    and f elsewhere.
    """
    F = f.field
    n = T1.n
    Ad = diagonal(T1.A)
    b = BimoduleMap(T1.H, Ad, 0, beta.matrix)
    if check:
        lhs = T1.sigma.matrix
        rhs = F.reduce(F.matmul(T2.sigma.matrix, f.matrix) + b.differential().matrix)
        if not np.array_equal(lhs, rhs):
            raise InvalidStructure("relation sigma = sigma' f + d(beta) fails")
        if not f.is_closed() or f.degree != 0:
            raise InvalidStructure("f must be closed of degree 0")
    comps = {}
    for L in range(n + 1):
        for i in range(L + 1):
            k = L - i
            src, tgt = T1.powers[L], T2.powers[i]
            m = F.zeros((tgt.dim, src.dim))
            if L == 0:
                m = F.eye(src.dim)
            else:
                for S in itertools.combinations(range(L), k):
                    maps = [b if j in S else f for j in range(L)]
                    m = F.reduce(m + apply_per_leaf(src, maps, tgt))
            comps[(-L, -i)] = m
    mat = T1.tc.map_matrix(T2.tc, comps)
    return BimoduleMap(T1.Qn, T2.Qn, 0, mat)


# ----------------------------------------------------------------------
# the replacement lemma


class ReplacementResult:
    def __init__(self, module, forward, backward, homotopies):
        self.module = module
        self.forward = forward
        self.backward = backward
        self.homotopies = homotopies


def check_equivalence_data(Q, P, alpha, beta, theta_Q, theta_P, phi):
    """The relations d(tQ) = 1 - a b, d(tP) = b a - 1, d(phi) = b tQ + tP b."""
    F = Q.field
    dm = lambda f: f.differential().matrix
    mm = F.matmul
    ok = (alpha.is_closed() and beta.is_closed()
          and np.array_equal(dm(theta_Q), F.reduce(F.eye(Q.dim) - mm(alpha.matrix, beta.matrix)))
          and np.array_equal(dm(theta_P), F.reduce(mm(beta.matrix, alpha.matrix) - F.eye(P.dim)))
          and np.array_equal(dm(phi), F.reduce(mm(beta.matrix, theta_Q.matrix) + mm(theta_P.matrix, beta.matrix))))
    return bool(ok)


def replace(E, qidx, P, alpha, beta, theta_Q, theta_P, phi, check=True, verify=True):
    """Swap the summand Q of E (basis positions qidx) for a homotopy
    equivalent P.

    E's differential in the splitting Q + R is [[d_Q, eta], [zeta, delta]];
    the result is P + R with [[d_P, beta eta], [zeta alpha, delta - zeta tQ eta]].
    """
    F = E.field
    qidx = np.asarray(qidx, dtype=np.int64)
    ridx = np.setdiff1d(np.arange(E.dim), qidx)
    Q = restrict(E, qidx)
    R = restrict(E, ridx)
    if not F.is_zero(F.matmul(Q.d, Q.d)):
        raise InvalidStructure("d_Q must square to zero")
    if check and not check_equivalence_data(Q, P, alpha, beta, theta_Q, theta_P, phi):
        raise InvalidStructure("homotopy equivalence relations fail")
    D = E.d
    eta = D[np.ix_(qidx, ridx)]
    zeta = D[np.ix_(ridx, qidx)]
    delta = D[np.ix_(ridx, ridx)]
    a, b, tQ, tP, ph = alpha.matrix, beta.matrix, theta_Q.matrix, theta_P.matrix, phi.matrix
    mm = F.mul
    nP, nR, nQ = P.dim, R.dim, Q.dim
    newd = np.concatenate([
        np.concatenate([P.d, mm(b, eta)], axis=1),
        np.concatenate([mm(zeta, a), F.reduce(delta - mm(zeta, tQ, eta))], axis=1),
    ], axis=0)
    S = direct_sum([P, R])
    out = DgBimodule(E.left, E.right, S.degs, S.lam, S.rho, newd, check=check)
    # forward Q + R -> P + R and backward, written in E's own basis order
    perm = np.concatenate([qidx, ridx])
    fwd = np.concatenate([
        np.concatenate([b, F.zeros((nP, nR))], axis=1),
        np.concatenate([F.reduce(-mm(zeta, tQ)), F.eye(nR)], axis=1),
    ], axis=0)
    bwd = np.concatenate([
        np.concatenate([a, F.reduce(-mm(tQ, eta))], axis=1),
        np.concatenate([F.zeros((nR, nP)), F.eye(nR)], axis=1),
    ], axis=0)
    inv = np.argsort(perm)
    fwd = fwd[:, inv]
    bwd = bwd[inv, :]
    forward = BimoduleMap(E, out, 0, fwd)
    backward = BimoduleMap(out, E, 0, bwd)
    # homotopies: backward o forward = 1 - d(K1); forward o backward = 1 - d(K2)
    K1 = F.zeros((E.dim, E.dim))
    K1[np.ix_(qidx, qidx)] = tQ
    psi = F.reduce(mm(a, ph, a) + mm(tQ, tQ, a) + mm(a, tP, tP) + mm(tQ, a, tP))
    G = F.reduce(mm(a, ph, tQ) + mm(tQ, a, ph) + mm(a, tP, ph) + mm(tQ, tQ, tQ))
    K2 = np.concatenate([
        np.concatenate([F.reduce(-tP), mm(ph, eta)], axis=1),
        np.concatenate([F.reduce(-mm(zeta, psi)), mm(zeta, G, eta)], axis=1),
    ], axis=0)
    homs = {"backward_forward": BimoduleMap(E, E, -1, K1), "forward_backward": BimoduleMap(out, out, -1, K2)}
    res = ReplacementResult(out, forward, backward, homs)
    if verify:
        if not (forward.is_closed() and backward.is_closed()):
            raise InvalidStructure("replacement maps are not closed")
        if not dga.is_quasi_iso(forward):
            raise InvalidStructure("forward replacement map is not a quasi-isomorphism")
    return res


def homotopy_defect(res):
    """Residuals of the two homotopy identities (zero matrices when exact)."""
    F = res.module.field
    E = res.forward.source
    out = res.module
    bf = (res.backward @ res.forward).matrix
    fb = (res.forward @ res.backward).matrix
    r1 = F.reduce(bf - F.eye(E.dim) + res.homotopies["backward_forward"].differential().matrix)
    r2 = F.reduce(fb - F.eye(out.dim) + res.homotopies["forward_backward"].differential().matrix)
    return r1, r2


# ----------------------------------------------------------------------
# one-sided normalisation of maps between convolutions


def make_one_sided(X: TwistedComplex, Y: TwistedComplex, f: BimoduleMap, witnesses=None):
    """Replace a closed degree 0 map f: {X} -> {Y} by a homotopic map with
    no component from X_a to Y_b for b < a.

    Returns (g, h) with g = f - d(h).  Raises NoSolution if some required
    homotopy does not exist.
    """
    F = f.field
    g = f.matrix.copy()
    H = F.zeros(g.shape)
    witnesses = witnesses or {}
    for m in Y.indices:
        tail = [a for a in X.indices if a >= m + 1]
        if not tail:
            continue
        rows = Y.block(m)
        cols = X.blocks(tail)
        comp = g[np.ix_(rows, cols)]
        if F.is_zero(comp):
            continue
        Xt = X.truncate(lo=m + 1)
        Ym = restrict(Y.total, rows)
        cmap = BimoduleMap(Xt.total, Ym, 0, comp)
        h = witnesses.get(m)
        if h is None:
            h = dga.nullhomotopy(cmap)
        if h is None:
            raise NoSolution(f"no homotopy removes the components into index {m}")
        ht = F.zeros(g.shape)
        ht[np.ix_(rows, cols)] = h.matrix
        dh = BimoduleMap(X.total, Y.total, -1, ht).differential().matrix
        g = F.reduce(g - dh)
        H = F.reduce(H + ht)
    return BimoduleMap(X.total, Y.total, 0, g), BimoduleMap(X.total, Y.total, -1, H)


def is_one_sided(X, Y, f):
    F = f.field
    for a in X.indices:
        for b in Y.indices:
            if b < a and not F.is_zero(f.matrix[np.ix_(Y.block(b), X.block(a))]):
                return False
    return True
