"""Finite dimensional DG algebras and DG bimodules.

Conventions, fixed once and used everywhere:

* vectors are columns; a map M -> N is an (dim N, dim M) matrix.
* a bimodule stores lam[a] (v -> e_a v) and rho[b] (v -> v e_b).
* shift M[k]: degrees drop by k, d becomes (-1)^k d, lam[a] picks up
  (-1)^(k|a|), rho is unchanged.  A map keeps its matrix when source or
  target is replaced by a shift.
* a bimodule map of degree p satisfies f(a m b) = (-1)^(p|a|) a f(m) b.
* Hom differential: d(f) = d f - (-1)^|f| f d.
* tensor differential: d(m (x) n) = dm (x) n + (-1)^|m| m (x) dn, and
  (f (x) g)(m (x) n) = (-1)^(|g||m|) f(m) (x) g(n).
* cone(f: M -> N) = M[1] + N with differential [[-d_M, 0], [f, d_N]].
"""

from __future__ import annotations

import itertools

import numpy as np

from .exact import Coordinates, Field, NoSolution, block_diag


class NotProjective(ValueError):
    """A one-sided projectivity witness does not exist."""


class InvalidStructure(ValueError):
    pass


def _parity(degs):
    return np.asarray(degs, dtype=np.int64) % 2


def _signs(field, degs, k=1):
    """Vector of (-1)^(k*deg) as field scalars."""
    par = (_parity(degs) * (k % 2)) % 2
    out = field.zeros(len(par))
    one, mone = field.scalar(1), field.scalar(-1)
    for i, s in enumerate(par):
        out[i] = mone if s else one
    return out


def _scale_rows(field, v, a):
    return field.reduce(v[:, None] * a)


def _scale_cols(field, a, v):
    return field.reduce(a * v[None, :])


class DgAlgebra:
    """A finite dimensional DG algebra given by structure constants.

    mult[a, b, k] is the coefficient of e_k in e_a e_b; diff is the matrix of
    the differential acting on column vectors.
    """

    def __init__(self, field, degs, mult, diff=None, unit=0, labels=None, check=True):
        F = field if isinstance(field, Field) else Field(field)
        self.field = F
        self.degs = np.array(degs, dtype=np.int64).reshape(-1)
        n = len(self.degs)
        self.dim = n
        c = np.asarray(mult)
        if c.ndim == 2 and c.shape[-1] == 4:
            cc = F.zeros((n, n, n))
            for i, j, k, v in c.tolist():
                cc[int(i), int(j), int(k)] = F.reduce(cc[int(i), int(j), int(k)] + F.from_str(v))
            c = cc
        elif c.size == 0 and n:
            c = F.zeros((n, n, n))
        else:
            c = F.coerce(c).reshape(n, n, n)
        self.c = c
        self.d = F.zeros((n, n)) if diff is None else F.coerce(np.asarray(diff)).reshape(n, n)
        self.unit = int(unit)
        self.labels = list(labels) if labels is not None else [f"e{i}" for i in range(n)]
        self.lam = np.ascontiguousarray(c.transpose(0, 2, 1))
        self.rho = np.ascontiguousarray(c.transpose(1, 2, 0))
        self._gens = None
        if check and n:
            self.validate()

    def __repr__(self):
        return f"DgAlgebra(dim={self.dim}, degs={self.degs.tolist()}, {self.field})"

    @classmethod
    def ground(cls, field):
        F = field if isinstance(field, Field) else Field(field)
        c = F.zeros((1, 1, 1))
        c[0, 0, 0] = F.scalar(1)
        return cls(F, [0], c, labels=["1"], check=False)

    @classmethod
    def truncated_polynomial(cls, field, n, m, var="h"):
        """k[h]/h^(n+1) with deg h = m and zero differential."""
        F = field if isinstance(field, Field) else Field(field)
        c = F.zeros((n + 1, n + 1, n + 1))
        for i in range(n + 1):
            for j in range(n + 1 - i):
                c[i, j, i + j] = F.scalar(1)
        labels = ["1"] + [f"{var}^{i}" if i > 1 else var for i in range(1, n + 1)]
        return cls(F, [m * i for i in range(n + 1)], c, labels=labels)

    @property
    def is_ground(self):
        return self.dim == 1 and self.degs[0] == 0

    def unit_vector(self):
        u = self.field.zeros(self.dim)
        u[self.unit] = self.field.scalar(1)
        return u

    def basis_vector(self, i):
        u = self.field.zeros(self.dim)
        u[i] = self.field.scalar(1)
        return u

    def mul(self, x, y):
        F = self.field
        n = self.dim
        xy = F.reduce(np.outer(x, y)).reshape(1, n * n)
        return F.matmul(xy, self.c.reshape(n * n, n))[0]

    def left(self, x):
        """Matrix of left multiplication by the element x."""
        n = self.dim
        return self.field.matmul(x.reshape(1, n), self.lam.reshape(n, n * n)).reshape(n, n)

    def right(self, y):
        n = self.dim
        return self.field.matmul(y.reshape(1, n), self.rho.reshape(n, n * n)).reshape(n, n)

    def generators(self):
        """Basis indices generating the algebra; chosen greedily by degree."""
        if self._gens is None:
            F = self.field
            order = sorted(range(self.dim), key=lambda i: (abs(int(self.degs[i])), i))
            gens = []
            span = self._closure(gens)
            for i in order:
                if i == self.unit:
                    continue
                v = self.basis_vector(i).reshape(-1, 1)
                if F.rank(np.concatenate([span, v], axis=1)) > span.shape[1]:
                    gens.append(i)
                    span = self._closure(gens)
                    if span.shape[1] == self.dim:
                        break
            self._gens = gens
        return self._gens

    def _closure(self, gens):
        F = self.field
        span = self.unit_vector().reshape(-1, 1)
        while True:
            new = [span] + [F.matmul(self.lam[g], span) for g in gens]
            cand, _ = F.column_space(np.concatenate(new, axis=1))
            if cand.shape[1] == span.shape[1]:
                return cand
            span = cand

    def validate(self):
        F = self.field
        n = self.dim
        e = self.unit
        for a in range(n):
            if not (np.array_equal(self.c[e, a], self.basis_vector(a))
                    and np.array_equal(self.c[a, e], self.basis_vector(a))):
                raise InvalidStructure("unit is not a two sided identity")
        if self.degs[e] != 0:
            raise InvalidStructure("unit must have degree 0")
        for a, b in itertools.product(range(n), range(n)):
            nz = np.flatnonzero(self.c[a, b])
            if np.any(self.degs[nz] != self.degs[a] + self.degs[b]):
                raise InvalidStructure("multiplication does not respect degrees")
        # (e_a e_b) e_c = e_a (e_b e_c)
        lhs = F.matmul(self.c.reshape(n * n, n), self.c.reshape(n, n * n)).reshape(n, n, n, n)
        rhs = F.matmul(self.c.reshape(n * n, n), self.c.transpose(1, 0, 2).reshape(n, n * n))
        rhs = rhs.reshape(n, n, n, n).transpose(2, 0, 1, 3)
        if not np.array_equal(F.reduce(lhs), F.reduce(rhs)):
            raise InvalidStructure("multiplication is not associative")
        d = self.d
        if not F.is_zero(F.matmul(d, d)):
            raise InvalidStructure("d^2 != 0")
        if not F.is_zero(d[:, e]):
            raise InvalidStructure("d(1) != 0")
        for a in range(n):
            nz = np.flatnonzero(d[:, a])
            if np.any(self.degs[nz] != self.degs[a] + 1):
                raise InvalidStructure("differential must have degree +1")
        # d(ab) = d(a) b + (-1)^|a| a d(b), checked as operators: d lam[a] = lam[da] + (-1)^|a| lam[a] d
        for a in range(n):
            lhs = F.matmul(d, self.lam[a])
            rhs = F.reduce(self.left(d[:, a]) + F.sign(self.degs[a]) * F.matmul(self.lam[a], d))
            if not np.array_equal(lhs, rhs):
                raise InvalidStructure("differential is not a derivation")
        return True

    def opposite_signs(self, k):
        """Vector of (-1)^(k|a|) over the basis."""
        return _signs(self.field, self.degs, k)


class Witness:
    """Splitting data showing a module is one-sided projective.

    gens: (dim M, r) generator vectors; C: (r, dim Alg, dim M) so that
    C[l][:, j] is the coefficient c_l(m_j).  For side 'left',
    m = sum_l c_l(m) g_l; for side 'right', m = sum_l g_l c_l(m).
    """

    def __init__(self, side, gens, gdegs, C):
        self.side = side
        self.gens = gens
        self.gdegs = np.asarray(gdegs, dtype=np.int64)
        self.C = C

    @property
    def r(self):
        return self.gens.shape[1]


class DgBimodule:
    """A finite dimensional DG (A, B)-bimodule."""

    def __init__(self, left, right, degs, lam, rho, d, labels=None, check=True, struct=None):
        self.left = left
        self.right = right
        self.field = left.field
        F = self.field
        self.degs = np.array(degs, dtype=np.int64).reshape(-1)
        n = len(self.degs)
        self.dim = n
        self.lam = _as_field(F, lam).reshape(left.dim, n, n)
        self.rho = _as_field(F, rho).reshape(right.dim, n, n)
        self.d = _as_field(F, d).reshape(n, n)
        self.labels = labels
        self.struct = struct
        self._witness = {}
        self.name = None
        if check:
            self.quick_check()

    def __repr__(self):
        return f"DgBimodule(dim={self.dim}, degs={degree_table(self)})"

    # constructors

    @classmethod
    def diagonal(cls, A):
        """A as an (A, A)-bimodule."""
        return cls(A, A, A.degs, A.lam, A.rho, A.d, labels=A.labels, check=False)

    @classmethod
    def zero(cls, A, B):
        F = A.field
        return cls(A, B, [], F.zeros((A.dim, 0, 0)), F.zeros((B.dim, 0, 0)), F.zeros((0, 0)), check=False)

    @classmethod
    def free_ground(cls, field, degs, d=None):
        """A complex of vector spaces viewed as a (k, k)-bimodule."""
        F = field if isinstance(field, Field) else Field(field)
        k = DgAlgebra.ground(F)
        n = len(degs)
        I = F.eye(n).reshape(1, n, n)
        return cls(k, k, degs, I, I.copy(), F.zeros((n, n)) if d is None else F.coerce(d))

    # basic structure

    def act_left(self, x):
        n = self.dim
        return self.field.matmul(x.reshape(1, -1), self.lam.reshape(self.left.dim, n * n)).reshape(n, n)

    def act_right(self, y):
        n = self.dim
        return self.field.matmul(y.reshape(1, -1), self.rho.reshape(self.right.dim, n * n)).reshape(n, n)

    def degree_indices(self, k):
        return np.flatnonzero(self.degs == k)

    def quick_check(self):
        """d^2 = 0, degree +1, Leibniz and commuting actions on generators."""
        F = self.field
        d = self.d
        if self.dim == 0:
            return True
        if not F.is_zero(F.matmul(d, d)):
            raise InvalidStructure("d^2 != 0")
        r, c = np.nonzero(d)
        if np.any(self.degs[r] != self.degs[c] + 1):
            raise InvalidStructure("differential must have degree +1")
        A, B = self.left, self.right
        for a in A.generators():
            lhs = F.matmul(d, self.lam[a])
            rhs = F.reduce(self.act_left(A.d[:, a]) + F.sign(A.degs[a]) * F.matmul(self.lam[a], d))
            if not np.array_equal(lhs, rhs):
                raise InvalidStructure("left Leibniz rule fails")
        for b in B.generators():
            lhs = F.matmul(d, self.rho[b])
            # d(m b) = dm b + (-1)^|m| m db
            sm = _signs(F, self.degs)
            rhs = F.reduce(F.matmul(self.rho[b], d) + _scale_cols(F, self.act_right(B.d[:, b]), sm))
            if not np.array_equal(lhs, rhs):
                raise InvalidStructure("right Leibniz rule fails")
        for a in A.generators():
            for b in B.generators():
                if not np.array_equal(F.matmul(self.lam[a], self.rho[b]), F.matmul(self.rho[b], self.lam[a])):
                    raise InvalidStructure("left and right actions do not commute")
        return True

    def validate(self):
        """Exhaustive check of all bimodule axioms."""
        F = self.field
        A, B = self.left, self.right
        self.quick_check()
        n = self.dim
        if n == 0:
            return True
        I = F.eye(n)
        if not np.array_equal(self.lam[A.unit], I) or not np.array_equal(self.rho[B.unit], I):
            raise InvalidStructure("actions are not unital")
        for a, b in itertools.product(range(A.dim), repeat=2):
            if not np.array_equal(F.matmul(self.lam[a], self.lam[b]), self.act_left(A.c[a, b])):
                raise InvalidStructure("left action is not associative")
        for a, b in itertools.product(range(B.dim), repeat=2):
            if not np.array_equal(F.matmul(self.rho[b], self.rho[a]), self.act_right(B.c[a, b])):
                raise InvalidStructure("right action is not associative")
        for a in range(A.dim):
            r, c = np.nonzero(self.lam[a])
            if np.any(self.degs[r] != self.degs[c] + A.degs[a]):
                raise InvalidStructure("left action does not respect degrees")
            for b in range(B.dim):
                if not np.array_equal(F.matmul(self.lam[a], self.rho[b]), F.matmul(self.rho[b], self.lam[a])):
                    raise InvalidStructure("left and right actions do not commute")
        for b in range(B.dim):
            r, c = np.nonzero(self.rho[b])
            if np.any(self.degs[r] != self.degs[c] + B.degs[b]):
                raise InvalidStructure("right action does not respect degrees")
        sm = _signs(F, self.degs)
        for a in range(A.dim):
            lhs = F.matmul(self.d, self.lam[a])
            rhs = F.reduce(self.act_left(A.d[:, a]) + F.sign(A.degs[a]) * F.matmul(self.lam[a], self.d))
            if not np.array_equal(lhs, rhs):
                raise InvalidStructure("left Leibniz rule fails")
        for b in range(B.dim):
            lhs = F.matmul(self.d, self.rho[b])
            rhs = F.reduce(F.matmul(self.rho[b], self.d) + _scale_cols(F, self.act_right(B.d[:, b]), sm))
            if not np.array_equal(lhs, rhs):
                raise InvalidStructure("right Leibniz rule fails")
        return True

    # leaves: tensor products expand into their factors

    def leaves(self):
        if self.struct is not None and self.struct[0] == "tensor":
            t = self.struct[1]
            return t.M.leaves() + t.N.leaves()
        return [self]

    def leafdims(self):
        return tuple(l.dim for l in self.leaves())

    def lift(self, X):
        """Coordinates (batch, dim) to representatives (batch, *leafdims)."""
        if self.struct is None or self.struct[0] != "tensor":
            return X
        t = self.struct[1]
        return t.lift_leaves(X)

    def project(self, X):
        """Representatives (batch, *leafdims) to coordinates (batch, dim)."""
        if self.struct is None or self.struct[0] != "tensor":
            return X
        t = self.struct[1]
        return t.project_leaves(X)

    # shifts and sums

    def shift(self, k=1):
        return shift(self, k)

    def __getitem__(self, k):
        return shift(self, k)


def _as_field(F, a):
    if isinstance(a, np.ndarray) and a.dtype == F.dtype:
        return a
    return F.coerce(np.asarray(a))


def degree_table(M):
    """Graded dimensions as a dict {degree: dim}."""
    vals, counts = np.unique(M.degs, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def shift(M, k=1):
    if k == 0:
        return M
    F = M.field
    sa = M.left.opposite_signs(k)
    lam = F.reduce(M.lam * sa[:, None, None])
    d = F.reduce(F.sign(k) * M.d) if k % 2 else M.d
    out = DgBimodule(M.left, M.right, M.degs - k, lam, M.rho, d, labels=M.labels, check=False,
                     struct=("shift", M, k))
    return out


def direct_sum(mods):
    mods = list(mods)
    A, B = mods[0].left, mods[0].right
    F = A.field
    degs = np.concatenate([m.degs for m in mods]) if mods else np.zeros(0, dtype=np.int64)
    lam = np.stack([block_diag(F, [m.lam[a] for m in mods]) for a in range(A.dim)])
    rho = np.stack([block_diag(F, [m.rho[b] for m in mods]) for b in range(B.dim)])
    d = block_diag(F, [m.d for m in mods])
    return DgBimodule(A, B, degs, lam, rho, d, check=False, struct=("sum", mods))


class BimoduleMap:
    """A graded bimodule map of a fixed degree, as a matrix."""

    def __init__(self, source, target, degree, matrix, check=False):
        self.source = source
        self.target = target
        self.degree = int(degree)
        F = source.field
        self.field = F
        self.matrix = _as_field(F, matrix).reshape(target.dim, source.dim)
        if check and not self.is_bilinear():
            raise InvalidStructure("map is not a bimodule map of the stated degree")

    def __repr__(self):
        return f"BimoduleMap({self.source.dim}->{self.target.dim}, deg={self.degree})"

    @property
    def m(self):
        return self.matrix

    def differential(self):
        F = self.field
        s = F.sign(self.degree)
        mat = F.reduce(F.matmul(self.target.d, self.matrix) - s * F.matmul(self.matrix, self.source.d))
        return BimoduleMap(self.source, self.target, self.degree + 1, mat)

    def is_closed(self):
        return self.field.is_zero(self.differential().matrix)

    def is_bilinear(self):
        F = self.field
        M, N, p = self.source, self.target, self.degree
        f = self.matrix
        r, c = np.nonzero(f)
        if np.any(N.degs[r] != M.degs[c] + p):
            return False
        for a in range(M.left.dim):
            s = F.sign(p * M.left.degs[a])
            if not np.array_equal(F.matmul(f, M.lam[a]), F.reduce(s * F.matmul(N.lam[a], f))):
                return False
        for b in range(M.right.dim):
            if not np.array_equal(F.matmul(f, M.rho[b]), F.matmul(N.rho[b], f)):
                return False
        return True

    def __matmul__(self, other):
        """Composition self o other."""
        return BimoduleMap(other.source, self.target, self.degree + other.degree,
                           self.field.matmul(self.matrix, other.matrix))

    def __add__(self, other):
        if other.degree != self.degree:
            raise ValueError("adding maps of different degrees")
        return BimoduleMap(self.source, self.target, self.degree, self.field.reduce(self.matrix + other.matrix))

    def __sub__(self, other):
        if other.degree != self.degree:
            raise ValueError("subtracting maps of different degrees")
        return BimoduleMap(self.source, self.target, self.degree, self.field.reduce(self.matrix - other.matrix))

    def __neg__(self):
        return BimoduleMap(self.source, self.target, self.degree, self.field.reduce(-self.matrix))

    def scale(self, s):
        return BimoduleMap(self.source, self.target, self.degree, self.field.reduce(self.matrix * self.field.scalar(s)))

    def is_zero(self):
        return self.field.is_zero(self.matrix)


def identity_map(M):
    return BimoduleMap(M, M, 0, M.field.eye(M.dim))


def zero_map(M, N, degree=0):
    return BimoduleMap(M, N, degree, M.field.zeros((N.dim, M.dim)))


def shifted_map(f, source, target):
    """f with source/target replaced by shifts; the degree is adjusted so the
    matrix is unchanged."""
    ds = _shift_amount(source, f.source)
    dt = _shift_amount(target, f.target)
    return BimoduleMap(source, target, f.degree + ds - dt, f.matrix)


def _shift_amount(new, old):
    if new.dim == 0:
        return 0
    return int(old.degs[0] - new.degs[0])


# ----------------------------------------------------------------------
# linear systems over spaces of bimodule maps


class _System:
    """Sparse assembly of a linear system over blocks of matrix entries."""

    def __init__(self, field):
        self.field = field
        self.nvars = 0
        self.keys = []
        self.cols = []
        self.vals = []
        self.rhs_keys = []
        self.rhs_vals = []
        self.ngroups = 0

    def variables(self, rows_deg, cols_deg, p):
        """Unknown matrix entries (i, j) with rows_deg[i] - cols_deg[j] == p."""
        I, J = np.nonzero(np.asarray(rows_deg)[:, None] - np.asarray(cols_deg)[None, :] == p)
        off = self.nvars
        self.nvars += len(I)
        return _Var(off, I, J, len(rows_deg), len(cols_deg))

    def group(self, shape):
        g = self.ngroups
        self.ngroups += 1
        return (g, shape)

    def add(self, group, var, L=None, R=None, alpha=1):
        """Add alpha * L X R for the unknown X (L or R None means identity)."""
        F = self.field
        g, (nr, nc) = group
        P = len(var.I)
        if P == 0:
            return
        if L is not None and R is not None:
            raise ValueError("use one side at a time")
        t = np.arange(P)
        if L is not None:
            Ls = L[:, var.I]
            r, tt = np.nonzero(Ls)
            c = var.J[tt]
            v = Ls[r, tt]
        elif R is not None:
            Rs = R[var.J, :]
            tt, c = np.nonzero(Rs)
            r = var.I[tt]
            v = Rs[tt, c]
        else:
            r, c, tt = var.I, var.J, t
            v = F.zeros(P) + F.scalar(1)
        if alpha != 1:
            v = F.reduce(v * F.scalar(alpha))
        self.keys.append(g * (1 << 40) + r.astype(np.int64) * nc + c.astype(np.int64))
        self.cols.append(var.off + tt)
        self.vals.append(v)

    def rhs(self, group, mat):
        g, (nr, nc) = group
        r, c = np.nonzero(mat)
        self.rhs_keys.append(g * (1 << 40) + r.astype(np.int64) * nc + c.astype(np.int64))
        self.rhs_vals.append(mat[r, c])

    def build(self):
        F = self.field
        keys = np.concatenate(self.keys + self.rhs_keys) if (self.keys or self.rhs_keys) else np.zeros(0, dtype=np.int64)
        uk, inv = np.unique(keys, return_inverse=True)
        nrow = len(uk)
        A = F.zeros((nrow, self.nvars))
        b = F.zeros(nrow)
        pos = 0
        for cols, vals in zip(self.cols, self.vals):
            k = len(cols)
            rows = inv[pos:pos + k]
            pos += k
            np.add.at(A, (rows, cols), vals)
        for vals in self.rhs_vals:
            k = len(vals)
            rows = inv[pos:pos + k]
            pos += k
            np.add.at(b, rows, vals)
        return F.reduce(A), F.reduce(b)


class _Var:
    def __init__(self, off, I, J, nr, nc):
        self.off = off
        self.I = I
        self.J = J
        self.shape = (nr, nc)

    def __len__(self):
        return len(self.I)

    def to_matrix(self, field, x):
        m = field.zeros(self.shape)
        m[self.I, self.J] = x[self.off:self.off + len(self.I)]
        return m


def _add_bilinear(sys, var, M, N, p):
    """Equations making the unknown (N x M, degree p) a bimodule map."""
    F = sys.field
    for a in M.left.generators():
        g = sys.group((N.dim, M.dim))
        sys.add(g, var, R=M.lam[a])
        sys.add(g, var, L=N.lam[a], alpha=-1 if (p * M.left.degs[a]) % 2 == 0 else 1)
    for b in M.right.generators():
        g = sys.group((N.dim, M.dim))
        sys.add(g, var, R=M.rho[b])
        sys.add(g, var, L=N.rho[b], alpha=-1)


def _add_differential(sys, group, var, M, N, p, alpha=1):
    """Add alpha * d(X) for X of degree p: d_N X - (-1)^p X d_M."""
    sys.add(group, var, L=N.d, alpha=alpha)
    sys.add(group, var, R=M.d, alpha=-alpha if p % 2 == 0 else alpha)


def map_space(M, N, p, closed=False):
    """Basis of bimodule maps M -> N of degree p (closed ones if asked).

    Returns an array of shape (k, dim N, dim M).
    """
    F = M.field
    sys = _System(F)
    var = sys.variables(N.degs, M.degs, p)
    _add_bilinear(sys, var, M, N, p)
    if closed:
        g = sys.group((N.dim, M.dim))
        _add_differential(sys, g, var, M, N, p)
    A, _ = sys.build()
    if len(var) == 0:
        return F.zeros((0, N.dim, M.dim))
    K = F.kernel(A) if A.shape[0] else F.eye(len(var))
    out = F.zeros((K.shape[1], N.dim, M.dim))
    for j in range(K.shape[1]):
        out[j] = var.to_matrix(F, K[:, j])
    return out


def nullhomotopy(f: BimoduleMap):
    """Some h of degree deg f - 1 with d(h) = f, or None."""
    M, N, p = f.source, f.target, f.degree
    F = f.field
    if f.is_zero():
        return zero_map(M, N, p - 1)
    sys = _System(F)
    var = sys.variables(N.degs, M.degs, p - 1)
    _add_bilinear(sys, var, M, N, p - 1)
    g = sys.group((N.dim, M.dim))
    _add_differential(sys, g, var, M, N, p - 1)
    sys.rhs(g, f.matrix)
    A, b = sys.build()
    try:
        x = F.solve(A, b)
    except NoSolution:
        return None
    return BimoduleMap(M, N, p - 1, var.to_matrix(F, x))


def is_boundary(f):
    return nullhomotopy(f) is not None


def factor_through(g: BimoduleMap, f: BimoduleMap, closed=True):
    """Solve u o g = f + d(h) for a degree-0 map u: target(g) -> target(f).

    Returns (u0, homogeneous, h0): a particular solution, a basis of the
    solutions of the homogeneous system (u parts), and the homotopy.  Raises
    NoSolution if no u exists.
    """
    X, Y, Z = g.source, g.target, f.target
    F = g.field
    q = f.degree - g.degree
    sys = _System(F)
    u = sys.variables(Z.degs, Y.degs, q)
    h = sys.variables(Z.degs, X.degs, f.degree - 1)
    _add_bilinear(sys, u, Y, Z, q)
    if closed:
        gc = sys.group((Z.dim, Y.dim))
        _add_differential(sys, gc, u, Y, Z, q)
    _add_bilinear(sys, h, X, Z, f.degree - 1)
    ge = sys.group((Z.dim, X.dim))
    sys.add(ge, u, R=g.matrix)
    _add_differential(sys, ge, h, X, Z, f.degree - 1, alpha=-1)
    sys.rhs(ge, f.matrix)
    A, b = sys.build()
    x = F.solve(A, b)
    K = F.kernel(A) if A.shape[0] else F.eye(sys.nvars)
    u0 = BimoduleMap(Y, Z, q, u.to_matrix(F, x))
    h0 = BimoduleMap(X, Z, f.degree - 1, h.to_matrix(F, x))
    hom = []
    seen = None
    for j in range(K.shape[1]):
        um = u.to_matrix(F, K[:, j])
        if F.is_zero(um):
            continue
        hom.append(um)
    if hom:
        stack = np.stack([m.reshape(-1) for m in hom], axis=1)
        basis, _ = F.column_space(stack)
        hom = [basis[:, j].reshape(Z.dim, Y.dim) for j in range(basis.shape[1])]
    return u0, hom, h0


# ----------------------------------------------------------------------
# cohomology


def _degree_blocks(M):
    degs = sorted(set(M.degs.tolist()))
    return {k: M.degree_indices(k) for k in degs}


def cohomology_dims(M):
    """{degree: dim H^degree} for the complex underlying M."""
    F = M.field
    blocks = _degree_blocks(M)
    ranks = {}
    for k, idx in blocks.items():
        nxt = blocks.get(k + 1)
        if nxt is None or len(idx) == 0:
            ranks[k] = 0
        else:
            ranks[k] = F.rank(M.d[np.ix_(nxt, idx)])
    out = {}
    for k, idx in blocks.items():
        h = len(idx) - ranks[k] - ranks.get(k - 1, 0)
        if h:
            out[k] = h
    return out


def is_acyclic(M):
    return not cohomology_dims(M)


def cohomology(M):
    """The cohomology H(M) as a bimodule with zero differential.

    Returns (H, reps) where reps is the (dim M, dim H) matrix of chosen
    cocycle representatives.
    """
    F = M.field
    n = M.dim
    # extend a basis of the coboundaries by homogeneous cocycles
    reps = []
    Zh = _homogeneous_kernel(M)
    Bh = _homogeneous_image(M)
    cur = Bh
    for j in range(Zh.shape[1]):
        v = Zh[:, j:j + 1]
        cand = np.concatenate([cur, v], axis=1)
        if F.rank(cand) > cur.shape[1]:
            cur = cand
            reps.append(j)
    R = Zh[:, reps] if reps else F.zeros((n, 0))
    hdegs = [int(M.degs[np.flatnonzero(R[:, j])[0]]) for j in range(R.shape[1])]
    full = np.concatenate([Bh, R], axis=1)
    coords = Coordinates(F, full) if full.shape[1] else None
    nb = Bh.shape[1]
    h = R.shape[1]

    plain = F.is_zero(M.left.d) and F.is_zero(M.right.d)

    def induced(op):
        if not plain:
            # actions only descend through cocycles of the algebra
            return F.zeros((h, h))
        if h == 0:
            return F.zeros((0, 0))
        img = F.matmul(op, R)
        return coords(img)[nb:]

    lam = np.stack([induced(M.lam[a]) for a in range(M.left.dim)]) if h else F.zeros((M.left.dim, 0, 0))
    rho = np.stack([induced(M.rho[b]) for b in range(M.right.dim)]) if h else F.zeros((M.right.dim, 0, 0))
    H = DgBimodule(M.left, M.right, hdegs, lam, rho, F.zeros((h, h)), check=False)
    return H, R


def _homogeneous_kernel(M):
    F = M.field
    cols = []
    for k, idx in _degree_blocks(M).items():
        nxt = M.degree_indices(k + 1)
        sub = M.d[np.ix_(nxt, idx)] if len(nxt) else F.zeros((0, len(idx)))
        K = F.kernel(sub)
        full = F.zeros((M.dim, K.shape[1]))
        full[idx] = K
        cols.append(full)
    return np.concatenate(cols, axis=1) if cols else M.field.zeros((M.dim, 0))


def _homogeneous_image(M):
    F = M.field
    cols = []
    for k, idx in _degree_blocks(M).items():
        prv = M.degree_indices(k - 1)
        if len(prv) == 0:
            continue
        sub = M.d[np.ix_(idx, prv)]
        I, _ = F.column_space(sub)
        full = F.zeros((M.dim, I.shape[1]))
        full[idx] = I
        cols.append(full)
    return np.concatenate(cols, axis=1) if cols else M.field.zeros((M.dim, 0))


def cone(f: BimoduleMap, check=True):
    """cone(f) = M[1] + N with differential [[-d_M, 0], [f, d_N]]."""
    if f.degree != 0:
        raise InvalidStructure("cone needs a degree 0 map")
    if check and not f.is_closed():
        raise InvalidStructure("cone needs a closed map")
    M, N = f.source, f.target
    F = f.field
    M1 = shift(M, 1)
    C = direct_sum([M1, N])
    d = C.d.copy()
    d[M.dim:, :M.dim] = f.matrix
    out = DgBimodule(M.left, M.right, C.degs, C.lam, C.rho, d, check=check, struct=("cone", f))
    return out


def cone_maps(f: BimoduleMap, C=None):
    """The canonical maps N -> cone(f) and cone(f) -> M[1]."""
    C = C or cone(f)
    M, N = f.source, f.target
    F = f.field
    inc = F.zeros((C.dim, N.dim))
    inc[M.dim:] = F.eye(N.dim)
    pr = F.zeros((M.dim, C.dim))
    pr[:, :M.dim] = F.eye(M.dim)
    M1 = shift(M, 1)
    return BimoduleMap(N, C, 0, inc), BimoduleMap(C, M1, 0, pr)


def is_quasi_iso(f: BimoduleMap):
    """True iff the closed degree-0 map f induces bijections on cohomology."""
    if f.degree != 0 or not f.is_closed():
        raise InvalidStructure("is_quasi_iso needs a closed degree 0 map")
    return is_acyclic(cone(f, check=False))


# ----------------------------------------------------------------------
# one-sided projectivity


def _module_generators(M, side):
    """Greedy homogeneous generators of M as a one-sided module."""
    F = M.field
    alg = M.left if side == "left" else M.right
    act = M.lam if side == "left" else M.rho
    order = sorted(range(M.dim), key=lambda j: (int(M.degs[j]), j))
    gens = []
    span = F.zeros((M.dim, 0))
    rk = 0
    for j in order:
        if rk == M.dim:
            break
        v = F.zeros((M.dim, 1))
        v[j, 0] = F.scalar(1)
        if F.rank(np.concatenate([span, v], axis=1)) == rk:
            continue
        gens.append(j)
        orbit = np.concatenate([act[t][:, j:j + 1] for t in range(alg.dim)], axis=1)
        span, _ = F.column_space(np.concatenate([span, orbit], axis=1))
        rk = span.shape[1]
    return gens


def projective_witness(M, side):
    """Splitting witness for M as a graded left (side='left') or right module.

    Raises NotProjective when the splitting system is inconsistent.
    """
    if side in M._witness:
        w = M._witness[side]
        if w is None:
            raise NotProjective(f"not {side} projective")
        return w
    try:
        w = _derived_witness(M, side)
        if w is None:
            w = _solve_witness(M, side)
    except NotProjective:
        M._witness[side] = None
        raise
    M._witness[side] = w
    return w


def _trivial_witness(M, side):
    F = M.field
    n = M.dim
    C = F.zeros((n, 1, n))
    for l in range(n):
        C[l, 0, l] = F.scalar(1)
    return Witness(side, F.eye(n), M.degs.copy(), C)


def _derived_witness(M, side):
    alg = M.left if side == "left" else M.right
    if alg.is_ground:
        return _trivial_witness(M, side)
    if M.struct is None:
        return None
    kind = M.struct[0]
    F = M.field
    if kind == "shift":
        base, k = M.struct[1], M.struct[2]
        w = projective_witness(base, side)
        if side == "left":
            s = alg.opposite_signs(k)
            C = F.reduce(w.C * s[None, :, None])
        else:
            C = w.C
        return Witness(side, w.gens, w.gdegs - k, C)
    if kind in ("sum", "cone"):
        if kind == "sum":
            mods = M.struct[1]
        else:
            f = M.struct[1]
            mods = [shift(f.source, 1), f.target]
        ws = [projective_witness(m, side) for m in mods]
        gens = block_diag(F, [w.gens for w in ws])
        gdegs = np.concatenate([w.gdegs for w in ws])
        r = gens.shape[1]
        C = F.zeros((r, alg.dim, M.dim))
        ro = co = 0
        for m, w in zip(mods, ws):
            C[ro:ro + w.r, :, co:co + m.dim] = w.C
            ro += w.r
            co += m.dim
        return Witness(side, gens, gdegs, C)
    if kind == "tensor":
        t = M.struct[1]
        if side == "left" and t.mode == "left":
            # slots are copies of the left factor
            w = projective_witness(t.M, "left")
            return _slot_witness(M, t, w, t.M, t.W)
        if side == "right" and t.mode == "right":
            w = projective_witness(t.N, "right")
            return _slot_witness(M, t, w, t.N, t.W)
    return None


def _slot_witness(T, t, w, X, W):
    """Witness for a tensor product whose slots are copies of X, from a
    witness w of X on the side that acts diagonally on the slots."""
    F = T.field
    r, nX = W.r, X.dim
    alg_dim = w.C.shape[1]
    gens_slots = []
    gdegs = []
    # generator (i, k): g_i of X placed in slot k, projected into T
    for k in range(r):
        for i in range(w.r):
            v = F.zeros(r * nX)
            v[k * nX:(k + 1) * nX] = w.gens[:, i]
            gens_slots.append(v)
            gdegs.append(int(w.gdegs[i] + W.gdegs[k]))
    if not gens_slots:
        return Witness(t.mode, F.zeros((T.dim, 0)), np.zeros(0, dtype=int), F.zeros((0, alg_dim, T.dim)))
    S = np.stack(gens_slots, axis=1)
    # slot vectors of basis elements of T
    basis = t.basis
    C = F.zeros((len(gdegs), alg_dim, T.dim))
    for k in range(r):
        blockv = basis[k * nX:(k + 1) * nX]  # (nX, dim T)
        cc = F.matmul(w.C.reshape(w.r * alg_dim, nX), blockv).reshape(w.r, alg_dim, T.dim)
        C[k * w.r:(k + 1) * w.r] = cc
    # generators as elements of T: apply e then coordinates
    gens = t.coords(F.matmul(t.e, S))
    return Witness(t.mode, gens, gdegs, C)


def _solve_witness(M, side):
    F = M.field
    alg = M.left if side == "left" else M.right
    act = M.lam if side == "left" else M.rho
    algact = alg.lam if side == "left" else alg.rho
    gens = _module_generators(M, side)
    r = len(gens)
    sys = _System(F)
    vars_ = []
    for l, g in enumerate(gens):
        vars_.append(sys.variables(alg.degs, M.degs - M.degs[g], 0))
    for a in alg.generators():
        for v in vars_:
            grp = sys.group((alg.dim, M.dim))
            sys.add(grp, v, R=act[a])
            sys.add(grp, v, L=algact[a], alpha=-1)
    grp = sys.group((M.dim, M.dim))
    for l, (g, v) in enumerate(zip(gens, vars_)):
        G = np.stack([act[t][:, g] for t in range(alg.dim)], axis=1)
        sys.add(grp, v, L=G)
    sys.rhs(grp, F.eye(M.dim))
    A, b = sys.build()
    try:
        x = F.solve(A, b)
    except NoSolution:
        raise NotProjective(f"module is not {side} projective")
    C = np.stack([v.to_matrix(F, x) for v in vars_]) if r else F.zeros((0, alg.dim, M.dim))
    gm = F.zeros((M.dim, r))
    for l, g in enumerate(gens):
        gm[g, l] = F.scalar(1)
    return Witness(side, gm, M.degs[gens], C)


def is_projective(M, side):
    """(True, witness) if M splits off a free graded module on that side."""
    try:
        return True, projective_witness(M, side)
    except NotProjective:
        return False, None


# ----------------------------------------------------------------------
# tensor products over the middle algebra


class TensorInfo:
    """Presentation of M (x)_B N as the image of an idempotent on slots.

    mode 'left': N is left B-projective with generators g_k; slot k is a
    copy of M standing for M (x) g_k.  mode 'right': M is right
    B-projective; slot k is a copy of N standing for g_k (x) N.
    """

    def __init__(self, M, N, mode, W):
        self.M, self.N, self.mode, self.W = M, N, mode, W
        F = M.field
        B = M.right
        self.field = F
        r = W.r
        if mode == "left":
            X, act_on_slot = M, M.rho
        else:
            X, act_on_slot = N, N.lam
        self.X = X
        nX = X.dim
        self.nX = nX
        # elements of B as operators on the slot module
        ops = act_on_slot.reshape(B.dim, nX * nX)

        def op_of(coef):
            return F.matmul(coef.reshape(1, -1), ops).reshape(nX, nX)

        self.op_of = op_of
        e = F.zeros((r * nX, r * nX))
        if mode == "left":
            # e(m in slot j) = sum_k m c_k(g_j) in slot k
            for j in range(r):
                for k in range(r):
                    e[k * nX:(k + 1) * nX, j * nX:(j + 1) * nX] = op_of(F.matmul(W.C[k], W.gens[:, j]))
        else:
            for j in range(r):
                for k in range(r):
                    e[k * nX:(k + 1) * nX, j * nX:(j + 1) * nX] = op_of(F.matmul(W.C[k], W.gens[:, j]))
        self.e = e
        slot_degs = np.concatenate([X.degs + W.gdegs[k] for k in range(r)]) if r else np.zeros(0, dtype=np.int64)
        # homogeneous basis of the image, degree by degree
        cols = []
        for dg in sorted(set(slot_degs.tolist())):
            idx = np.flatnonzero(slot_degs == dg)
            sub = e[:, idx]
            _, piv = F.column_space(sub)
            cols.extend(idx[piv].tolist())
        self.basis = e[:, cols] if cols else F.zeros((r * nX, 0))
        self.degs = slot_degs[cols] if cols else np.zeros(0, dtype=np.int64)
        self.coords_obj = Coordinates(F, self.basis)

    def coords(self, v):
        return self.coords_obj(v)

    # one level lift/project: (batch, dim) <-> (batch, dim M, dim N)

    def lift1(self, X):
        F = self.field
        batch = X.shape[0]
        W, nX = self.W, self.nX
        r = W.r
        slots = F.matmul(X, self.basis.T).reshape(batch, r, nX)
        if self.mode == "left":
            # sum_k outer(v_k, g_k)
            t = slots.transpose(0, 2, 1).reshape(batch * nX, r)
            return F.matmul(t, W.gens.T).reshape(batch, nX, self.N.dim)
        t = slots.transpose(1, 0, 2).reshape(r, batch * nX)
        out = F.matmul(W.gens, t).reshape(self.M.dim, batch, nX)
        return out.transpose(1, 0, 2)

    def project1(self, X):
        F = self.field
        batch = X.shape[0]
        W = self.W
        r = W.r
        B = self.M.right
        nB = B.dim
        nM, nN = self.M.dim, self.N.dim
        if batch == 0:
            return F.zeros((0, self.basis.shape[1]))
        if self.mode == "left":
            Cflat = W.C.reshape(r * nB, nN)
            Y = F.matmul(X.reshape(batch * nM, nN), Cflat.T).reshape(batch, nM, r, nB)
            Z = Y.transpose(0, 2, 3, 1).reshape(batch * r, nB * nM)
            RR = self.M.rho.transpose(0, 2, 1).reshape(nB * nM, nM)
            slots = F.matmul(Z, RR).reshape(batch, r * nM)
        else:
            Cflat = W.C.reshape(r * nB, nM)
            Xt = X.transpose(1, 0, 2).reshape(nM, batch * nN)
            Y = F.matmul(Cflat, Xt).reshape(r, nB, batch, nN)
            Z = Y.transpose(2, 0, 1, 3).reshape(batch * r, nB * nN)
            LL = self.N.lam.transpose(0, 2, 1).reshape(nB * nN, nN)
            slots = F.matmul(Z, LL).reshape(batch, r * nN)
        rows = self.coords_obj.rows
        return F.matmul(slots[:, rows], self.coords_obj.inv.T)

    def lift_leaves(self, X):
        F = self.field
        batch = X.shape[0]
        Y = self.lift1(X)  # (batch, nM, nN)
        nM, nN = self.M.dim, self.N.dim
        lm = self.M.leafdims()
        ln = self.N.leafdims()
        t = Y.transpose(0, 2, 1).reshape(batch * nN, nM)
        t = self.M.lift(t)  # (batch*nN, *lm)
        t = t.reshape((batch, nN) + lm)
        t = np.moveaxis(t, 1, -1)  # (batch, *lm, nN)
        pm = int(np.prod(lm))
        t = t.reshape(batch * pm, nN)
        t = self.N.lift(t)
        return t.reshape((batch,) + lm + ln)

    def project_leaves(self, X):
        batch = X.shape[0]
        lm = self.M.leafdims()
        ln = self.N.leafdims()
        pm = int(np.prod(lm))
        nM, nN = self.M.dim, self.N.dim
        t = X.reshape((batch * pm,) + ln)
        t = self.N.project(t)  # (batch*pm, nN)
        t = t.reshape(batch, pm, nN).transpose(0, 2, 1).reshape((batch * nN,) + lm)
        t = self.M.project(t)  # (batch*nN, nM)
        t = t.reshape(batch, nN, nM).transpose(0, 2, 1)
        return self.project1(t)


def tensor_over(M, N, prefer=None, check=False):
    """M (x)_B N for M an (A, B)- and N a (B, C)-bimodule.

    Needs N left B-projective or M right B-projective; raises NotProjective
    otherwise.
    """
    if M.right is not N.left:
        if not (M.right.is_ground and N.left.is_ground):
            raise InvalidStructure("middle algebras differ")
    F = M.field
    B = M.right
    modes = ["left", "right"] if prefer != "right" else ["right", "left"]
    if prefer is None and not B.is_ground and M.dim < N.dim:
        modes = ["right", "left"]
    W = None
    for mode in modes:
        try:
            W = projective_witness(N, "left") if mode == "left" else projective_witness(M, "right")
            break
        except NotProjective:
            continue
    if W is None:
        raise NotProjective("neither factor is one-sided projective over the middle algebra")
    t = TensorInfo(M, N, mode, W)
    A, C = M.left, N.right
    r = W.r
    n = t.basis.shape[1]
    basis, coords = t.basis, t.coords
    nX = t.nX

    def restrict(op):
        if n == 0:
            return F.zeros((0, 0))
        return coords(F.matmul(op, basis))

    sX = _signs(F, t.X.degs)
    if mode == "left":
        lam = np.stack([restrict(block_diag(F, [M.lam[a]] * r)) for a in range(A.dim)]) if A.dim else None
        rho_list = []
        for c in range(C.dim):
            op = F.zeros((r * nX, r * nX))
            for k in range(r):
                gc = F.matmul(N.rho[c], W.gens[:, k])
                for l in range(r):
                    op[l * nX:(l + 1) * nX, k * nX:(k + 1) * nX] = t.op_of(F.matmul(W.C[l], gc))
            rho_list.append(restrict(op))
        rho = np.stack(rho_list)
        D = F.matmul(t.e, block_diag(F, [M.d] * r))
        for k in range(r):
            dg = F.matmul(N.d, W.gens[:, k])
            for l in range(r):
                blk = _scale_cols(F, t.op_of(F.matmul(W.C[l], dg)), sX)
                D[l * nX:(l + 1) * nX, k * nX:(k + 1) * nX] = F.reduce(D[l * nX:(l + 1) * nX, k * nX:(k + 1) * nX] + blk)
    else:
        rho = np.stack([restrict(block_diag(F, [N.rho[c]] * r)) for c in range(C.dim)])
        lam_list = []
        for a in range(A.dim):
            op = F.zeros((r * nX, r * nX))
            for k in range(r):
                ag = F.matmul(M.lam[a], W.gens[:, k])
                for l in range(r):
                    op[l * nX:(l + 1) * nX, k * nX:(k + 1) * nX] = t.op_of(F.matmul(W.C[l], ag))
            lam_list.append(restrict(op))
        lam = np.stack(lam_list)
        D = F.matmul(t.e, block_diag(F, [F.reduce(F.sign(W.gdegs[k]) * N.d) for k in range(r)]))
        for k in range(r):
            dg = F.matmul(M.d, W.gens[:, k])
            for l in range(r):
                blk = t.op_of(F.matmul(W.C[l], dg))
                D[l * nX:(l + 1) * nX, k * nX:(k + 1) * nX] = F.reduce(D[l * nX:(l + 1) * nX, k * nX:(k + 1) * nX] + blk)
    d = restrict(D)
    T = DgBimodule(A, C, t.degs, lam, rho, d, check=check, struct=("tensor", t))
    return T


def tensor_element(T, X):
    """Project representatives (batch, dim M, dim N) into T = M (x) N."""
    return T.struct[1].project1(X)


def tensor_maps(f: BimoduleMap, g: BimoduleMap, S=None, T=None):
    """f (x) g : S = M (x) N -> T = M' (x) N' with the Koszul sign."""
    F = f.field
    S = S or tensor_over(f.source, g.source)
    T = T or tensor_over(f.target, g.target)
    ts = S.struct[1]
    X = ts.lift1(F.eye(S.dim))  # (batch, nM, nN)
    sM = _signs(F, f.source.degs, g.degree)
    X = F.reduce(X * sM[None, :, None])
    # apply f on axis 1 and g on axis 2
    b, nM, nN = X.shape
    Y = F.matmul(X.transpose(0, 2, 1).reshape(b * nN, nM), f.matrix.T).reshape(b, nN, -1).transpose(0, 2, 1)
    b, nM2, _ = Y.shape
    Y = F.matmul(Y.reshape(b * nM2, nN), g.matrix.T).reshape(b, nM2, -1)
    mat = T.struct[1].project1(Y).T
    return BimoduleMap(S, T, f.degree + g.degree, mat)


# ----------------------------------------------------------------------
# leaf calculus: maps between iterated tensor products


class LeafArray:
    """Representatives of elements of an iterated tensor product.

    arr has shape (batch, *dims of leaves); mods lists the leaf modules.
    """

    def __init__(self, field, arr, mods):
        self.field = field
        self.arr = arr
        self.mods = list(mods)

    @classmethod
    def basis_of(cls, T):
        F = T.field
        return cls(F, T.lift(F.eye(T.dim)), T.leaves())

    def _sign_before(self, pos, deg):
        """Array (1, *dims[:pos], 1, ...) of (-1)^(deg * sum of leaf degrees before pos)."""
        F = self.field
        if deg % 2 == 0 or pos == 0:
            return None
        par = np.zeros((), dtype=np.int64)
        for m in self.mods[:pos]:
            par = np.add.outer(par, m.degs % 2) % 2
        s = F.coerce(np.where(par == 1, -1, 1))
        return s.reshape((1,) + s.shape + (1,) * (len(self.mods) - pos))

    def apply(self, pos, f: BimoduleMap, count=None):
        """Apply f at leaves [pos, pos+count) whose tensor is f.source."""
        F = self.field
        src, tgt = f.source, f.target
        count = len(src.leaves()) if count is None else count
        if [m.dim for m in self.mods[pos:pos + count]] != list(src.leafdims()):
            raise InvalidStructure("leaf mismatch when applying a map")
        arr = self.arr
        nl = len(self.mods)
        sub_axes = list(range(pos + 1, pos + 1 + count))
        other = [a for a in range(arr.ndim) if a not in sub_axes]
        t = arr.transpose(other + sub_axes)
        oshape = t.shape[:len(other)]
        N = int(np.prod(oshape))
        t = t.reshape((N,) + tuple(src.leafdims()))
        t = src.project(t)
        t = F.matmul(t, f.matrix.T)
        t = tgt.lift(t)
        tl = tuple(tgt.leafdims())
        t = t.reshape(oshape + tl)
        # move target leaf axes back to position pos
        nt = len(tl)
        k = len(oshape)
        order = list(range(0, 1 + pos)) + list(range(k, k + nt)) + list(range(1 + pos, k))
        t = t.transpose(order)
        mods = self.mods[:pos] + tgt.leaves() + self.mods[pos + count:]
        out = LeafArray(F, t, mods)
        s = out._sign_before(pos, f.degree)
        if s is not None:
            out.arr = F.reduce(out.arr * s)
        return out

    def insert(self, pos, U, u, deg=0):
        """Insert the element u (coordinates in U) before leaf pos."""
        F = self.field
        ul = U.lift(u.reshape(1, -1))[0]
        arr = self.arr
        out = np.multiply.outer(arr, ul)
        # out has axes (batch, leaves..., U-leaves); move U axes to pos
        nu = ul.ndim
        nl = arr.ndim - 1
        order = list(range(0, 1 + pos)) + list(range(1 + nl, 1 + nl + nu)) + list(range(1 + pos, 1 + nl))
        out = F.reduce(out.transpose(order))
        res = LeafArray(F, out, self.mods[:pos] + U.leaves() + self.mods[pos:])
        s = res._sign_before(pos, deg)
        if s is not None:
            res.arr = F.reduce(res.arr * s)
        return res

    def to(self, T):
        if [m.dim for m in self.mods] != list(T.leafdims()):
            raise InvalidStructure("leaf mismatch at the target")
        return T.project(self.arr)


def leaf_map(S, T, ops, degree=0):
    """The map S -> T obtained by running leaf operations on a basis of S.

    ops is a list of ('apply', pos, f) or ('insert', pos, U, u).
    """
    la = LeafArray.basis_of(S)
    for op in ops:
        if op[0] == "apply":
            la = la.apply(op[1], op[2])
        elif op[0] == "insert":
            la = la.insert(op[1], op[2], op[3])
        else:
            raise ValueError(op[0])
    mat = la.to(T).T
    return BimoduleMap(S, T, degree, mat)


def action_map(U, side):
    """The action A (x)_A U -> U (side 'left') or U (x)_B B -> U as maps from
    the corresponding tensor products."""
    F = U.field
    if side == "left":
        A = DgBimodule.diagonal(U.left)
        S = tensor_over(A, U)
        X = S.struct[1].lift1(F.eye(S.dim))  # (batch, nA, nU)
        # a (x) u -> a u
        out = _contract_action(F, X, U.lam, first=True)
        return BimoduleMap(S, U, 0, out.T)
    B = DgBimodule.diagonal(U.right)
    S = tensor_over(U, B)
    X = S.struct[1].lift1(F.eye(S.dim))  # (batch, nU, nB)
    out = _contract_action(F, X, U.rho, first=False)
    return BimoduleMap(S, U, 0, out.T)


def _contract_action(F, X, act, first):
    b = X.shape[0]
    if first:
        nA, nU = X.shape[1], X.shape[2]
        # sum_{a,u} X[b,a,u] act[a][:, u]
        ops = act.transpose(0, 2, 1).reshape(nA * nU, -1)
        return F.matmul(X.reshape(b, nA * nU), ops)
    nU, nB = X.shape[1], X.shape[2]
    ops = act.transpose(0, 2, 1)  # (nB, nU, nU')
    t = X.transpose(0, 2, 1).reshape(b, nB * nU)
    return F.matmul(t, ops.reshape(nB * nU, -1))


def bilinear_map(S, T, tensor):
    """Map M (x) N -> T from a tensor of shape (dim M, dim N, dim T)."""
    F = S.field
    X = S.struct[1].lift1(F.eye(S.dim))
    b, nM, nN = X.shape
    mat = F.matmul(X.reshape(b, nM * nN), tensor.reshape(nM * nN, T.dim))
    return BimoduleMap(S, T, 0, mat.T)


# ----------------------------------------------------------------------
# Hom modules and duals


def _hom_module(M, N, constraints, lam_ops, rho_ops, dfun, left_alg, right_alg):
    """Generic graded Hom bimodule with per-degree bases."""
    F = M.field
    degsN, degsM = N.degs, M.degs
    ps = sorted(set((degsN[:, None] - degsM[None, :]).ravel().tolist())) if M.dim and N.dim else []
    basis = []
    bdegs = []
    for p in ps:
        sys = _System(F)
        var = sys.variables(degsN, degsM, p)
        constraints(sys, var, p)
        A, _ = sys.build()
        K = F.kernel(A) if A.shape[0] else F.eye(len(var))
        for j in range(K.shape[1]):
            basis.append(var.to_matrix(F, K[:, j]).reshape(-1))
            bdegs.append(p)
    n = len(basis)
    if n == 0:
        Z = DgBimodule(left_alg, right_alg, [], F.zeros((left_alg.dim, 0, 0)), F.zeros((right_alg.dim, 0, 0)),
                       F.zeros((0, 0)), check=False)
        Z.hom_basis = F.zeros((N.dim * M.dim, 0))
        return Z
    Bm = np.stack(basis, axis=1)
    coords = Coordinates(F, Bm)
    mats = Bm.T.reshape(n, N.dim, M.dim)

    def induced(fun):
        imgs = np.stack([fun(mats[t]).reshape(-1) for t in range(n)], axis=1)
        return coords(imgs)

    lam = np.stack([induced(lambda X, a=a: lam_ops(a, X)) for a in range(left_alg.dim)])
    rho = np.stack([induced(lambda X, b=b: rho_ops(b, X)) for b in range(right_alg.dim)])
    dm = np.stack([dfun(mats[t], bdegs[t]).reshape(-1) for t in range(n)], axis=1)
    d = coords(dm)
    H = DgBimodule(left_alg, right_alg, bdegs, lam, rho, d, check=True)
    H.hom_basis = Bm
    H.hom_coords = coords
    H.hom_pair = (M, N)
    return H


def hom_right(M, N):
    """Right B-linear maps M -> N, for M in A-B and N in C-B; a C-A bimodule.

    Maps are written on the left: f(m b) = f(m) b, (c f)(m) = c f(m),
    (f a)(m) = f(a m).
    """
    if M.right is not N.right and not (M.right.is_ground and N.right.is_ground):
        raise InvalidStructure("right algebras differ")
    F = M.field

    def constraints(sys, var, p):
        for b in M.right.generators():
            g = sys.group((N.dim, M.dim))
            sys.add(g, var, R=M.rho[b])
            sys.add(g, var, L=N.rho[b], alpha=-1)

    def dfun(X, p):
        return F.reduce(F.matmul(N.d, X) - F.sign(p) * F.matmul(X, M.d))

    H = _hom_module(M, N, constraints,
                    lambda c, X: F.matmul(N.lam[c], X),
                    lambda a, X: F.matmul(X, M.lam[a]),
                    dfun, N.left, M.left)
    H.struct = None
    H.kind = "hom_right"
    return H


def hom_left(M, N):
    """Left A-linear maps M -> N, for M in A-B and N in A-C; a B-C bimodule.

    Maps are written on the right: (a m)f = a (m)f, (m)(b f) = (m b)f,
    (m)(f c) = ((m)f) c.
    """
    if M.left is not N.left and not (M.left.is_ground and N.left.is_ground):
        raise InvalidStructure("left algebras differ")
    F = M.field
    sM = _signs(F, M.degs)

    def constraints(sys, var, p):
        for a in M.left.generators():
            g = sys.group((N.dim, M.dim))
            sys.add(g, var, R=M.lam[a])
            sys.add(g, var, L=N.lam[a], alpha=-1)

    def dfun(X, p):
        return _scale_cols(F, F.reduce(F.matmul(N.d, X) - F.matmul(X, M.d)), sM)

    H = _hom_module(M, N, constraints,
                    lambda b, X: F.matmul(X, M.rho[b]),
                    lambda c, X: F.matmul(N.rho[c], X),
                    dfun, M.right, N.right)
    H.kind = "hom_left"
    return H


def hom_complex(M, N):
    """Bimodule maps M -> N of all degrees, as a complex of vector spaces."""
    if M.left is not N.left or M.right is not N.right:
        raise InvalidStructure("algebra pair mismatch")
    F = M.field
    k = DgAlgebra.ground(F)

    def constraints(sys, var, p):
        _add_bilinear(sys, var, M, N, p)

    def dfun(X, p):
        return F.reduce(F.matmul(N.d, X) - F.sign(p) * F.matmul(X, M.d))

    H = _hom_module(M, N, constraints, lambda a, X: X, lambda b, X: X, dfun, k, k)
    H.kind = "hom"
    return H


def hom_element_map(H, coords, degree=None):
    """The bimodule map represented by a coordinate vector of a hom module."""
    M, N = H.hom_pair
    F = H.field
    v = F.matmul(H.hom_basis, coords.reshape(-1, 1))[:, 0]
    if degree is None:
        nz = np.flatnonzero(coords)
        degree = int(H.degs[nz[0]]) if len(nz) else 0
    return BimoduleMap(M, N, degree, v.reshape(N.dim, M.dim))


def dual_right(E):
    """E^B = Hom_B(E, B) for E in A-B; a B-A bimodule."""
    ok, _ = is_projective(E, "right")
    if not ok:
        raise NotProjective("dual_right needs E right projective")
    R = hom_right(E, DgBimodule.diagonal(E.right))
    R.dual_of = (E, "right")
    return R


def dual_left(E):
    """E^A = Hom_A(E, A) for E in A-B; a B-A bimodule."""
    ok, _ = is_projective(E, "left")
    if not ok:
        raise NotProjective("dual_left needs E left projective")
    L = hom_left(E, DgBimodule.diagonal(E.left))
    L.dual_of = (E, "left")
    return L


def _hom_coords_of(H, mats):
    """Coordinates in the hom module H of maps given as matrices (k, N, M)."""
    F = H.field
    if not len(mats):
        return F.zeros((H.dim, 0))
    imgs = np.stack([m.reshape(-1) for m in mats], axis=1)
    return H.hom_coords(imgs)


def right_trace(E, R=None, RE=None):
    """Evaluation R (x)_A E -> B for R = dual_right(E)."""
    R = R or dual_right(E)
    RE = RE or tensor_over(R, E)
    B = DgBimodule.diagonal(E.right)
    mats = R.hom_basis.T.reshape(R.dim, B.dim, E.dim)  # f_t(e_j) = mats[t][:, j]
    tensor = mats.transpose(0, 2, 1)  # (R, E, B)
    return bilinear_map(RE, B, tensor)


def right_unit(E, R=None, ER=None):
    """Coevaluation A -> E (x)_B R, 1 -> sum g_l (x) c_l."""
    F = E.field
    R = R or dual_right(E)
    ER = ER or tensor_over(E, R)
    W = projective_witness(E, "right")
    cR = _hom_coords_of(R, [W.C[l] for l in range(W.r)])  # (dim R, r)
    X = F.matmul(W.gens, cR.T).reshape(1, E.dim, R.dim)
    u = ER.struct[1].project1(X)[0]
    A = DgBimodule.diagonal(E.left)
    mat = np.stack([F.matmul(ER.lam[a], u) for a in range(A.dim)], axis=1)
    return BimoduleMap(A, ER, 0, mat)


def left_counit(E, L=None, EL=None):
    """Evaluation E (x)_B L -> A for L = dual_left(E)."""
    L = L or dual_left(E)
    EL = EL or tensor_over(E, L)
    A = DgBimodule.diagonal(E.left)
    mats = L.hom_basis.T.reshape(L.dim, A.dim, E.dim)  # (e_j) f_t = mats[t][:, j]
    tensor = mats.transpose(2, 0, 1)  # (E, L, A)
    return bilinear_map(EL, A, tensor)


def left_unit(E, L=None, LE=None):
    """Coevaluation B -> L (x)_A E, 1 -> sum c_l (x) g_l."""
    F = E.field
    L = L or dual_left(E)
    LE = LE or tensor_over(L, E)
    W = projective_witness(E, "left")
    cL = _hom_coords_of(L, [W.C[l] for l in range(W.r)])  # (dim L, r)
    X = F.matmul(cL, W.gens.T).reshape(1, L.dim, E.dim)
    u = LE.struct[1].project1(X)[0]
    B = DgBimodule.diagonal(E.right)
    mat = np.stack([F.matmul(LE.rho[b], u) for b in range(B.dim)], axis=1)
    return BimoduleMap(B, LE, 0, mat)


# ----------------------------------------------------------------------
# isomorphism search


class IsoSearch:
    """Outcome of a search for a quasi-isomorphism in an affine family."""

    def __init__(self, verdict, witness=None, tried=0, dims=0, note=""):
        self.verdict = verdict
        self.witness = witness
        self.tried = tried
        self.dims = dims
        self.note = note

    def __repr__(self):
        return f"IsoSearch({self.verdict}, tried={self.tried}, dims={self.dims})"


SAMPLES = 32
EXHAUSTIVE_DIMS = 16
EXHAUSTIVE_LIMIT = 1 << 16


def search_quasi_iso(M, N, u0=None, family=None, rng=None, samples=SAMPLES):
    """Look for a closed degree-0 quasi-iso M -> N in u0 + span(family).

    With no family, the family is all closed degree-0 bimodule maps.
    """
    F = M.field
    rng = rng if rng is not None else np.random.default_rng(0)
    if family is None:
        if cohomology_dims(M) != cohomology_dims(N):
            return IsoSearch("Fail", note="cohomology dimensions differ")
        fam = map_space(M, N, 0, closed=True)
        family = [fam[j] for j in range(fam.shape[0])]
    base = u0.matrix if isinstance(u0, BimoduleMap) else (u0 if u0 is not None else F.zeros((N.dim, M.dim)))
    k = len(family)
    if cohomology_dims(M) != cohomology_dims(N):
        return IsoSearch("Fail", dims=k, note="cohomology dimensions differ")

    def test(coefs):
        m = base.copy()
        for c, f in zip(coefs, family):
            if c:
                m = F.reduce(m + f * c)
        f = BimoduleMap(M, N, 0, m)
        return f if is_quasi_iso(f) else None

    tried = 0
    if k == 0:
        tried = 1
        f = test([])
        return IsoSearch("Pass", f, 1, 0) if f is not None else IsoSearch("Fail", None, 1, 0, "empty family")
    large = F.char == 0 or F.char > 1000
    for _ in range(samples):
        if F.char == 0:
            coefs = [F.scalar(int(x)) for x in rng.integers(-50, 51, size=k)]
        else:
            coefs = [F.scalar(int(x)) for x in rng.integers(0, F.char, size=k)]
        tried += 1
        f = test(coefs)
        if f is not None:
            return IsoSearch("Pass", f, tried, k)
    if large:
        return IsoSearch("Fail", None, tried, k, "no quasi-isomorphism among random samples")
    if k <= EXHAUSTIVE_DIMS and F.char ** k <= EXHAUSTIVE_LIMIT:
        for coefs in itertools.product(range(F.char), repeat=k):
            tried += 1
            f = test([F.scalar(c) for c in coefs])
            if f is not None:
                return IsoSearch("Pass", f, tried, k)
        return IsoSearch("Fail", None, tried, k, "exhaustive search found none")
    return IsoSearch("Indeterminate", None, tried, k, "family too large for exhaustive search over a small field")
