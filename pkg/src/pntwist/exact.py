"""Exact dense linear algebra over prime fields and the rationals.

Matrices are plain numpy arrays.  Over small primes the dtype is int64 and
entries are kept reduced to [0, p).  Over large primes and over Q the dtype
is object, holding python ints or Fractions.  All equality is exact.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

# above this the int64 products p*p*inner may overflow
_SMALL_P = 1 << 20


class NoSolution(Exception):
    """Raised when a linear system has no exact solution."""


class FieldMismatch(ValueError):
    pass


def _is_prime(p):
    # Miller-Rabin with the first 12 primes as bases, exact below 3.3e24
    if p < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if p % q == 0:
            return p == q
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


class Field:
    """A prime field F_p, or Q when char == 0."""

    _cache: dict = {}

    def __new__(cls, char=0):
        char = int(char)
        if char in cls._cache:
            return cls._cache[char]
        if char != 0 and not _is_prime(char):
            raise ValueError(f"characteristic must be 0 or prime, got {char}")
        self = super().__new__(cls)
        self.char = char
        self.p = char
        self.small = 0 < char < _SMALL_P
        self.dtype = np.int64 if self.small else object
        cls._cache[char] = self
        return self

    def __reduce__(self):
        return (Field, (self.char,))

    def __repr__(self):
        return "QQ" if self.char == 0 else f"GF({self.char})"

    @property
    def is_rational(self):
        return self.char == 0

    # scalars

    def scalar(self, x):
        if self.char == 0:
            if isinstance(x, str):
                return Fraction(x)
            return Fraction(x)
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def inv_scalar(self, x):
        if self.char == 0:
            return 1 / Fraction(x)
        return pow(int(x), -1, self.p)

    def to_str(self, x):
        if self.char == 0:
            x = Fraction(x)
            return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        return str(int(x))

    def from_str(self, s):
        return self.scalar(Fraction(str(s)))

    # arrays

    def array(self, data):
        a = np.array(data, dtype=object)
        if a.size == 0:
            return np.zeros(a.shape, dtype=self.dtype)
        flat = [self.scalar(x) for x in a.ravel()]
        out = np.empty(a.size, dtype=self.dtype)
        out[:] = flat
        return out.reshape(a.shape)

    def zeros(self, shape):
        z = np.zeros(shape, dtype=self.dtype)
        if self.dtype is object:
            z[...] = self.scalar(0)
        return z

    def eye(self, n):
        z = self.zeros((n, n))
        for i in range(n):
            z[i, i] = self.scalar(1)
        return z

    def reduce(self, a):
        if self.char == 0:
            return a
        return a % self.p

    def coerce(self, a):
        """Bring an integer or mixed array into canonical form."""
        a = np.asarray(a)
        if self.small:
            if a.dtype == object:
                return self.array(a)
            return a.astype(np.int64) % self.p
        if self.char == 0:
            return self.array(a)
        return self.array(a)

    def matmul(self, a, b):
        if a.shape[-1] == 0 or (a.ndim > 1 and a.shape[0] == 0) or b.shape[-1] == 0:
            shape = np.empty(a.shape[:-1] + b.shape[1:]).shape if b.ndim > 1 else a.shape[:-1]
            return self.zeros(shape)
        if self.small:
            inner = a.shape[-1]
            if self.p * self.p * inner < (1 << 53) and a.ndim == 2 and b.ndim <= 2:
                # exact in double precision, and BLAS is much faster than int64
                out = a.astype(np.float64) @ b.astype(np.float64)
                return out.astype(np.int64) % self.p
            if self.p * self.p * inner < (1 << 62):
                return (a @ b) % self.p
            out = None
            step = max(1, (1 << 62) // (self.p * self.p))
            for s in range(0, inner, step):
                part = (a[..., s:s + step] @ b[s:s + step]) % self.p
                out = part if out is None else (out + part) % self.p
            return out
        if self.char == 0:
            return _rational_matmul(a, b)
        return np.dot(a, b) % self.p

    def mul(self, *mats):
        out = mats[0]
        for m in mats[1:]:
            out = self.matmul(out, m)
        return out

    def kron(self, a, b):
        return self.reduce(np.kron(a, b))

    def is_zero(self, a):
        return not np.any(a != 0) if a.size else True

    def random(self, shape, rng, low=-3, high=3):
        if self.char == 0:
            vals = rng.integers(low, high + 1, size=shape)
            return self.array(vals)
        if self.small:
            return rng.integers(0, self.p, size=shape).astype(np.int64)
        vals = [int(x) for x in rng.integers(0, 1 << 62, size=int(np.prod(shape)))]
        return self.array(np.array(vals, dtype=object).reshape(shape))

    def sign(self, s):
        """The scalar +1 or -1 for an integer exponent s."""
        return self.scalar(-1 if s % 2 else 1)

    # elimination

    def echelon(self, a, full=True):
        """Row reduce a copy of a.  Returns (reduced, pivot_columns).

        With full=True the result is the reduced row echelon form.
        """
        a = np.array(a, dtype=self.dtype, copy=True)
        rows, cols = a.shape
        piv = []
        r = 0
        p = self.p
        for c in range(cols):
            if r == rows:
                break
            nz = np.flatnonzero(a[r:, c])
            if nz.size == 0:
                continue
            i = r + nz[0]
            if i != r:
                a[[r, i]] = a[[i, r]]
            pv = a[r, c]
            if pv != 1:
                inv = self.inv_scalar(pv)
                a[r, c:] = a[r, c:] * inv
                if p:
                    a[r, c:] %= p
            if full:
                col = a[:, c].copy()
                col[r] = 0
            else:
                col = a[:, c].copy()
                col[:r + 1] = 0
            nzr = np.flatnonzero(col)
            if nzr.size:
                upd = a[nzr, c:] - np.outer(col[nzr], a[r, c:])
                if p:
                    upd %= p
                a[nzr, c:] = upd
            piv.append(c)
            r += 1
        return a, piv

    def rank(self, a):
        a = np.asarray(a)
        if a.size == 0:
            return 0
        if a.shape[0] > a.shape[1]:
            a = a.T
        return len(self.echelon(a, full=False)[1])

    def kernel(self, a):
        """Matrix whose columns form a basis of the null space of a."""
        a = np.asarray(a)
        rows, cols = a.shape
        if rows == 0:
            return self.eye(cols)
        r, piv = self.echelon(a)
        free = [c for c in range(cols) if c not in set(piv)]
        k = self.zeros((cols, len(free)))
        for j, c in enumerate(free):
            k[c, j] = self.scalar(1)
            for i, pc in enumerate(piv):
                if r[i, c] != 0:
                    k[pc, j] = self.reduce(-r[i, c]) if self.p else -r[i, c]
        return k

    def solve(self, a, b):
        """Some x with a @ x == b.  b may be a vector or a matrix."""
        a = np.asarray(a)
        b = np.asarray(b)
        vec = b.ndim == 1
        bb = b.reshape(-1, 1) if vec else b
        rows, cols = a.shape
        if bb.shape[0] != rows:
            raise ValueError("dimension mismatch in solve")
        if rows == 0:
            x = self.zeros((cols, bb.shape[1]))
            return x[:, 0] if vec else x
        aug = np.concatenate([a.astype(self.dtype), bb.astype(self.dtype)], axis=1)
        r, piv = self.echelon(aug)
        if piv and piv[-1] >= cols:
            raise NoSolution("inconsistent system")
        # also catch pivots in rhs columns among later pivots
        if any(c >= cols for c in piv):
            raise NoSolution("inconsistent system")
        x = self.zeros((cols, bb.shape[1]))
        for i, c in enumerate(piv):
            x[c] = r[i, cols:]
        return x[:, 0] if vec else x

    def inv(self, a):
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError("inverse of a non-square matrix")
        if n == 0:
            return self.zeros((0, 0))
        aug = np.concatenate([a.astype(self.dtype), self.eye(n)], axis=1)
        r, piv = self.echelon(aug)
        if len(piv) < n or piv[n - 1] >= n:
            raise NoSolution("matrix is singular")
        return r[:, n:]

    def pivot_rows(self, basis):
        """Row indices where a full column rank matrix is invertible."""
        _, piv = self.echelon(basis.T, full=False)
        return piv

    def column_space(self, a):
        """Columns of a forming a basis of its column space, and their indices."""
        if a.shape[1] == 0:
            return a, []
        _, piv = self.echelon(a, full=False)
        return a[:, piv], piv


_den = np.frompyfunc(lambda x: x.denominator, 1, 1)
_num = np.frompyfunc(lambda x: x.numerator, 1, 1)
_frac = np.frompyfunc(Fraction, 2, 1)
_ZERO = Fraction(0)


def _integer_form(a):
    """(integer object array, common denominator) with a == ints / den."""
    if a.size == 0:
        return a.astype(object), 1
    ints = np.zeros(a.shape, dtype=object)
    nz = a.astype(bool)
    vals = a[nz]
    if vals.size == 0:
        return ints, 1
    dens = _den(vals)
    den = math.lcm(*set(dens.tolist()))
    ints[nz] = _num(vals) * (den // dens) if den != 1 else _num(vals)
    return ints, den


def _max_abs(ints):
    return max(abs(int(ints.max())), abs(int(ints.min()))) if ints.size else 0


def _rational_matmul(a, b):
    # clear denominators, multiply integers (in BLAS when exactly representable)
    ia, da = _integer_form(a)
    ib, db = _integer_form(b)
    bound = _max_abs(ia) * _max_abs(ib) * a.shape[-1]
    if bound < (1 << 53):
        prod = (ia.astype(np.float64) @ ib.astype(np.float64)).astype(np.int64).astype(object)
    else:
        prod = np.dot(ia, ib)
    # only the nonzero entries need fresh Fractions
    out = np.full(prod.shape, _ZERO, dtype=object)
    nz = prod != 0
    if nz.any():
        out[nz] = _frac(prod[nz], da * db)
    return out


class Coordinates:
    """Coordinates with respect to a fixed basis of a subspace.

    Picks rows on which the basis matrix is invertible; coords(v) reads
    off the coordinates from those rows only, so membership is not checked
    unless check=True is passed.
    """

    def __init__(self, field, basis):
        self.field = field
        self.basis = basis
        self.rows = field.pivot_rows(basis) if basis.shape[1] else []
        if len(self.rows) != basis.shape[1]:
            raise ValueError("basis columns are not independent")
        self.inv = field.inv(basis[self.rows]) if basis.shape[1] else field.zeros((0, 0))

    def __call__(self, v, check=False):
        f = self.field
        c = f.matmul(self.inv, v[self.rows])
        if check and not np.array_equal(f.matmul(self.basis, c), f.reduce(v)):
            raise NoSolution("vector not in subspace")
        return c


class ExactMatrix:
    """Dense matrix over a Field.  Immutable by convention."""

    __slots__ = ("field", "a")

    def __init__(self, field, entries, shape=None):
        if not isinstance(field, Field):
            field = Field(field)
        self.field = field
        if isinstance(entries, np.ndarray) and (entries.dtype == field.dtype):
            a = field.reduce(entries) if field.p else entries
        else:
            a = field.array(entries)
        if shape is not None:
            a = a.reshape(shape)
        if a.ndim == 1:
            a = a.reshape(-1, 1) if shape is None else a
        self.a = a

    @classmethod
    def zeros(cls, field, rows, cols):
        return cls(field, Field(field.char).zeros((rows, cols)))

    @classmethod
    def identity(cls, field, n):
        return cls(field, field.eye(n))

    @property
    def rows(self):
        return self.a.shape[0]

    @property
    def cols(self):
        return self.a.shape[1]

    @property
    def shape(self):
        return self.a.shape

    def _check(self, other):
        if not isinstance(other, ExactMatrix):
            raise TypeError("expected ExactMatrix")
        if other.field is not self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __matmul__(self, other):
        self._check(other)
        return ExactMatrix(self.field, self.field.matmul(self.a, other.a))

    def __add__(self, other):
        self._check(other)
        return ExactMatrix(self.field, self.field.reduce(self.a + other.a))

    def __sub__(self, other):
        self._check(other)
        return ExactMatrix(self.field, self.field.reduce(self.a - other.a))

    def __neg__(self):
        return ExactMatrix(self.field, self.field.reduce(-self.a))

    def __mul__(self, s):
        s = self.field.scalar(s)
        return ExactMatrix(self.field, self.field.reduce(self.a * s))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.field is other.field and self.a.shape == other.a.shape and bool(np.all(self.a == other.a))

    def __hash__(self):
        return hash((self.field.char, self.a.shape, tuple(self.a.ravel().tolist())))

    @property
    def T(self):
        return ExactMatrix(self.field, self.a.T.copy())

    def __getitem__(self, idx):
        return self.a[idx]

    def __repr__(self):
        body = [[self.field.to_str(x) for x in row] for row in self.a]
        return f"ExactMatrix({self.field}, {body})"

    def tolist(self):
        return [[self.field.to_str(x) for x in row] for row in self.a]

    def is_zero(self):
        return self.field.is_zero(self.a)


def rank(m: ExactMatrix) -> int:
    return m.field.rank(m.a)


def rref(m: ExactMatrix):
    r, piv = m.field.echelon(m.a)
    return ExactMatrix(m.field, r), piv


def kernel_basis(m: ExactMatrix):
    k = m.field.kernel(m.a)
    return [ExactMatrix(m.field, k[:, j].reshape(-1, 1)) for j in range(k.shape[1])]


def solve(m: ExactMatrix, b):
    if isinstance(b, ExactMatrix):
        b = b.a
    b = np.asarray(b)
    x = m.field.solve(m.a, m.field.coerce(b) if b.dtype != m.field.dtype else b)
    return ExactMatrix(m.field, x.reshape(-1, 1) if x.ndim == 1 else x)


def inverse(m: ExactMatrix):
    return ExactMatrix(m.field, m.field.inv(m.a))


def kron(a: ExactMatrix, b: ExactMatrix):
    a._check(b)
    return ExactMatrix(a.field, a.field.kron(a.a, b.a))


def block(field, blocks):
    """Assemble a block matrix from a nested list; None means a zero block."""
    nr = len(blocks)
    nc = len(blocks[0])
    heights = [None] * nr
    widths = [None] * nc
    for i in range(nr):
        for j in range(nc):
            b = blocks[i][j]
            if b is not None:
                heights[i] = b.shape[0]
                widths[j] = b.shape[1]
    if None in heights or None in widths:
        raise ValueError("cannot infer block sizes")
    rows = []
    for i in range(nr):
        row = []
        for j in range(nc):
            b = blocks[i][j]
            row.append(field.zeros((heights[i], widths[j])) if b is None else b)
        rows.append(np.concatenate(row, axis=1) if row else field.zeros((heights[i], 0)))
    return np.concatenate(rows, axis=0)


def block_diag(field, mats):
    n = sum(m.shape[0] for m in mats)
    k = sum(m.shape[1] for m in mats)
    out = field.zeros((n, k))
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def poly_eval_matrix(field, coeffs, a):
    """p(a) for p given by coefficients low degree first."""
    n = a.shape[0]
    out = field.zeros((n, n))
    for c in reversed(coeffs):
        out = field.reduce(field.matmul(out, a) + field.eye(n) * field.scalar(c))
    return out


def companion_matrix(coeffs, field) -> ExactMatrix:
    """Companion matrix of a monic polynomial.

    coeffs are low degree first, so x^2 + 1 is [1, 0, 1].  Ones sit on the
    subdiagonal and the last column holds -a_0, ..., -a_{n-1}.
    """
    if not isinstance(field, Field):
        field = Field(field)
    cs = [field.scalar(c) for c in coeffs]
    n = len(cs) - 1
    if n < 1:
        raise ValueError("polynomial must have degree at least 1")
    if cs[-1] != 1:
        raise ValueError("polynomial must be monic")
    m = field.zeros((n, n))
    for i in range(1, n):
        m[i, i - 1] = field.scalar(1)
    for i in range(n):
        m[i, n - 1] = field.reduce(-cs[i]) if field.p else -cs[i]
    return ExactMatrix(field, m)
