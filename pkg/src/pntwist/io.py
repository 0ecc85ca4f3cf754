"""JSON instance files and report serialization.

Scalars are strings ("3", "-1/2"), so rationals round trip exactly.  Sparse
matrices are lists of [row, col, value].  An instance file looks like

    {"field": {"char": 65521},
     "algebras": {"k": "ground",
                  "B": {"basis": [{"label": "1", "deg": 0}, ...], "unit": 0,
                        "mult": [[i, j, k, "c"], ...], "diff": [[i, j, "c"], ...]}},
     "bimodules": {"E": {"left": "k", "right": "B", "basis": [...],
                         "left_action": {"a": [[i, j, "c"], ...]},
                         "right_action": {...}, "diff": [...]}},
     "functor": {"A": "k", "B": "B", "E": "E"},
     "structure": {"H": "H", "n": 2, "sigma": [...],
                   "gamma": [{"power": 1, "images": [[[i, j, "c"], ...]]}, ...]},
     "seed": 0}

structure may also be the string "p1" (the canonical n = 1 structure).
gamma[i]["images"] lists, for each basis vector of H^i, the right
B-linear endomorphism of E it maps to.  Bimodule action matrices act on
column vectors: left_action[a][i][j] is the coefficient of basis vector i
in a * e_j.
"""

from __future__ import annotations

import json

import numpy as np

from .dga import BimoduleMap, DgAlgebra, DgBimodule, InvalidStructure
from .exact import Field


class InstanceError(ValueError):
    """A malformed or invalid instance file."""


# ----------------------------------------------------------------------
# scalars and matrices


def scalar_to_json(F, x):
    return F.to_str(x)


def matrix_to_json(F, m):
    m = np.asarray(m)
    if m.ndim == 1:
        return [[int(i), scalar_to_json(F, m[i])] for i in np.nonzero(m)[0]]
    r, c = np.nonzero(m)
    return [[int(i), int(j), scalar_to_json(F, m[i, j])] for i, j in zip(r, c)]


def matrix_from_json(F, data, shape, where="matrix"):
    m = F.zeros(shape)
    try:
        for entry in data:
            *idx, v = entry
            idx = tuple(int(i) for i in idx)
            if len(idx) != len(shape) or any(not 0 <= i < s for i, s in zip(idx, shape)):
                raise InstanceError(f"{where}: index {list(idx)} out of range for shape {list(shape)}")
            m[idx] = F.reduce(m[idx] + F.from_str(v)) if not F.is_rational else m[idx] + F.from_str(v)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        if isinstance(e, InstanceError):
            raise
        raise InstanceError(f"{where}: bad entry ({e})") from None
    return m


def field_to_json(F):
    return {"char": F.char}


def field_from_json(data):
    try:
        return Field(int(data["char"]))
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceError(f"field: {e}") from None


# ----------------------------------------------------------------------
# algebras, bimodules, maps


def algebra_to_json(A):
    F = A.field
    if A.is_ground and A.dim == 1:
        return "ground"
    n = A.dim
    return {
        "basis": [{"label": str(l), "deg": int(d)} for l, d in zip(A.labels, A.degs)],
        "unit": int(A.unit),
        "mult": [[int(i), int(j), int(k), scalar_to_json(F, A.c[i, j, k])] for i, j, k in zip(*np.nonzero(A.c))],
        "diff": matrix_to_json(F, A.d) if n else [],
    }


def algebra_from_json(F, data, name="algebra"):
    if data == "ground":
        return DgAlgebra.ground(F)
    try:
        basis = data["basis"]
        degs = [int(b["deg"]) for b in basis]
        labels = [str(b.get("label", f"e{i}")) for i, b in enumerate(basis)]
        n = len(degs)
        c = matrix_from_json(F, data.get("mult", []), (n, n, n), f"{name}.mult")
        d = matrix_from_json(F, data.get("diff", []), (n, n), f"{name}.diff")
        return DgAlgebra(F, degs, c, d, unit=int(data.get("unit", 0)), labels=labels)
    except InstanceError:
        raise
    except InvalidStructure as e:
        raise InstanceError(f"{name}: {e}") from None
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceError(f"{name}: {e!r}") from None


def bimodule_to_json(M, names):
    F = M.field
    labels = M.labels or [f"m{i}" for i in range(M.dim)]
    return {
        "left": names[id(M.left)],
        "right": names[id(M.right)],
        "basis": [{"label": str(l), "deg": int(d)} for l, d in zip(labels, M.degs)],
        "left_action": {str(a): matrix_to_json(F, M.lam[a]) for a in range(M.left.dim)},
        "right_action": {str(b): matrix_to_json(F, M.rho[b]) for b in range(M.right.dim)},
        "diff": matrix_to_json(F, M.d),
    }


def bimodule_from_json(F, data, algebras, name="bimodule"):
    try:
        A, B = algebras[data["left"]], algebras[data["right"]]
        basis = data["basis"]
        degs = [int(b["deg"]) for b in basis]
        labels = [str(b.get("label", f"m{i}")) for i, b in enumerate(basis)]
        n = len(degs)
        lam = F.zeros((A.dim, n, n))
        rho = F.zeros((B.dim, n, n))
        la, ra = data.get("left_action"), data.get("right_action")
        for a in range(A.dim):
            if la is None or str(a) not in la:
                if a == A.unit:
                    lam[a] = F.eye(n)
                    continue
                raise InstanceError(f"{name}: left action of basis element {a} missing")
            lam[a] = matrix_from_json(F, la[str(a)], (n, n), f"{name}.left_action[{a}]")
        for b in range(B.dim):
            if ra is None or str(b) not in ra:
                if b == B.unit:
                    rho[b] = F.eye(n)
                    continue
                raise InstanceError(f"{name}: right action of basis element {b} missing")
            rho[b] = matrix_from_json(F, ra[str(b)], (n, n), f"{name}.right_action[{b}]")
        d = matrix_from_json(F, data.get("diff", []), (n, n), f"{name}.diff")
        M = DgBimodule(A, B, degs, lam, rho, d, labels=labels)
        M.validate()
        return M
    except InstanceError:
        raise
    except InvalidStructure as e:
        raise InstanceError(f"{name}: {e}") from None
    except KeyError as e:
        raise InstanceError(f"{name}: missing key {e}") from None
    except (TypeError, ValueError) as e:
        raise InstanceError(f"{name}: {e!r}") from None


def map_to_json(f: BimoduleMap):
    return {"degree": int(f.degree), "shape": [int(f.target.dim), int(f.source.dim)],
            "matrix": matrix_to_json(f.field, f.matrix)}


def map_from_json(F, data, source, target, name="map"):
    try:
        deg = int(data.get("degree", 0))
        m = matrix_from_json(F, data["matrix"], (target.dim, source.dim), name)
    except KeyError as e:
        raise InstanceError(f"{name}: missing key {e}") from None
    return BimoduleMap(source, target, deg, m)


# ----------------------------------------------------------------------
# instances


class Instance:
    def __init__(self, field, algebras, bimodules, raw, seed=0):
        self.field = field
        self.algebras = algebras
        self.bimodules = bimodules
        self.raw = raw
        self.seed = seed
        self._fd = None
        self._S = None

    def functor(self):
        from .pnfun import FunctorData
        if self._fd is None:
            spec = self.raw.get("functor")
            if not spec:
                raise InstanceError("instance has no 'functor' section")
            try:
                A, B, E = self.algebras[spec["A"]], self.algebras[spec["B"]], self.bimodules[spec["E"]]
            except KeyError as e:
                raise InstanceError(f"functor: unknown name {e}") from None
            if E.left is not A or E.right is not B:
                raise InstanceError("functor: E must be an (A, B)-bimodule")
            try:
                self._fd = FunctorData(A, B, E)
            except (InvalidStructure, ValueError) as e:
                raise InstanceError(f"functor: {e}") from None
        return self._fd

    def structure(self):
        from . import pnfun
        if self._S is None:
            Fd = self.functor()
            spec = self.raw.get("structure")
            if spec is None:
                raise InstanceError("instance has no 'structure' section")
            if spec == "p1":
                self._S = pnfun.p1_structure(Fd)
            else:
                self._S = structure_from_json(Fd, spec, self.bimodules)
        return self._S


def structure_from_json(Fd, spec, bimodules):
    from .dga import zero_map
    from .pnfun import PreconditionError, structure_from_gammas
    from .twisted import diagonal, tensor_powers
    F = Fd.field
    try:
        H = bimodules[spec["H"]]
        n = int(spec["n"])
    except KeyError as e:
        raise InstanceError(f"structure: missing {e}") from None
    if n < 1:
        raise InstanceError("structure: n must be at least 1")
    if H.left is not Fd.A or H.right is not Fd.A:
        raise InstanceError("structure: H must be an (A, A)-bimodule")
    Ad = diagonal(Fd.A)
    sigma = None
    if spec.get("sigma"):
        sigma = BimoduleMap(H, Ad, 1, matrix_from_json(F, spec["sigma"], (Ad.dim, H.dim), "structure.sigma"))
    powers = tensor_powers(H, n)
    gammas = [None] + [zero_map(powers[i], Fd.RF) for i in range(1, n + 1)]
    seen = set()
    for g in spec.get("gamma", []):
        i = int(g["power"])
        if not 1 <= i <= n:
            raise InstanceError(f"structure.gamma: power {i} out of range")
        imgs = g["images"]
        if len(imgs) != powers[i].dim:
            raise InstanceError(f"structure.gamma[{i}]: expected {powers[i].dim} images, got {len(imgs)}")
        cols = []
        for t, im in enumerate(imgs):
            endo = matrix_from_json(F, im, (Fd.E.dim, Fd.E.dim), f"structure.gamma[{i}][{t}]")
            try:
                cols.append(Fd.rf_element(endo))
            except Exception:
                raise InstanceError(f"structure.gamma[{i}][{t}]: not a right B-linear endomorphism of E") from None
        gammas[i] = BimoduleMap(powers[i], Fd.RF, 0, np.stack(cols, axis=1))
        seen.add(i)
    missing = set(range(1, n + 1)) - seen
    if missing:
        raise InstanceError(f"structure.gamma: powers {sorted(missing)} missing")
    try:
        S = structure_from_gammas(Fd, H, gammas, sigma=sigma)
    except (InvalidStructure, PreconditionError) as e:
        raise InstanceError(f"structure: {e}") from None
    return S


def parse_instance(data):
    if not isinstance(data, dict):
        raise InstanceError("top level must be an object")
    F = field_from_json(data.get("field", {"char": 0}))
    algebras = {}
    for name, a in (data.get("algebras") or {}).items():
        algebras[name] = algebra_from_json(F, a, f"algebras.{name}")
    bimodules = {}
    for name, b in (data.get("bimodules") or {}).items():
        if not isinstance(b, dict):
            raise InstanceError(f"bimodules.{name}: must be an object")
        for side in ("left", "right"):
            if b.get(side) not in algebras:
                raise InstanceError(f"bimodules.{name}: unknown {side} algebra {b.get(side)!r}")
        bimodules[name] = bimodule_from_json(F, b, algebras, f"bimodules.{name}")
    return Instance(F, algebras, bimodules, data, int(data.get("seed", 0)))


def load_instance(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InstanceError(f"{path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    return parse_instance(data)


def functor_instance(Fd, S=None, seed=0, names=None):
    """Instance dict for FunctorData (and a structure with one dimensional
    powers of H, or the string 'p1')."""
    F = Fd.field
    names = dict(names or {})
    algebras, anames = {}, {}
    for A, default in ((Fd.A, "A"), (Fd.B, "B")):
        if id(A) in anames:
            continue
        nm = names.get(default, default)
        anames[id(A)] = nm
        algebras[nm] = algebra_to_json(A)
    out = {"field": field_to_json(F), "algebras": algebras,
           "bimodules": {"E": bimodule_to_json(Fd.E, anames)},
           "functor": {"A": anames[id(Fd.A)], "B": anames[id(Fd.B)], "E": "E"}, "seed": int(seed)}
    if S == "p1":
        out["structure"] = "p1"
    elif S is not None:
        out["bimodules"]["H"] = bimodule_to_json(S.H, anames)
        endo = Fd.end_matrix
        gam = []
        for i in range(1, S.n + 1):
            cols = S.gamma.matrix[:, S.tc.block(-i)]
            imgs = [matrix_to_json(F, F.matmul(endo, cols[:, t:t + 1])[:, 0].reshape(Fd.E.dim, Fd.E.dim))
                    for t in range(cols.shape[1])]
            gam.append({"power": i, "images": imgs})
        st = {"H": "H", "n": S.n, "gamma": gam}
        if not S.is_split:
            st["sigma"] = matrix_to_json(F, S.sigma1.matrix)
        out["structure"] = st
    return out


def dumps(obj):
    """Deterministic JSON text."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
