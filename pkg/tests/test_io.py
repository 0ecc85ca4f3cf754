import json

import numpy as np
import pytest

from pntwist import examples as ex
from pntwist import io
from pntwist import pnfun as pf
from pntwist.dga import DgAlgebra
from pntwist.exact import Field


@pytest.mark.parametrize("p", [2, 65521, 0])
def test_algebra_round_trip(p):
    F = Field(p)
    A = DgAlgebra.truncated_polynomial(F, 3, 2)
    B = io.algebra_from_json(F, json.loads(json.dumps(io.algebra_to_json(A))))
    assert np.array_equal(A.c, B.c) and A.degs.tolist() == B.degs.tolist()


def test_rational_scalars_survive():
    F = Field(0)
    m = F.coerce(np.array([[0, 1], [2, 0]], dtype=object)) / 3
    back = io.matrix_from_json(F, json.loads(json.dumps(io.matrix_to_json(F, m))), (2, 2))
    assert np.array_equal(m, back)
    assert io.matrix_to_json(F, m)[0][2] == "1/3"


@pytest.mark.parametrize("n,m", [(1, 2), (2, 2), (3, 1)])
def test_functor_instance_round_trip(n, m):
    Fd, S = ex.pn_object(n, m)
    inst = io.parse_instance(json.loads(io.dumps(io.functor_instance(Fd, S))))
    Fd2, S2 = inst.functor(), inst.structure()
    assert np.array_equal(Fd2.E.rho, Fd.E.rho)
    assert np.array_equal(S2.gamma.matrix, S.gamma.matrix)
    assert pf.check_pn(Fd2, S2, rng=np.random.default_rng(0)).verdict == pf.PASS


def test_p1_structure_round_trip():
    Fd = ex.spherical_object(1)
    inst = io.parse_instance(io.functor_instance(Fd, "p1"))
    assert inst.structure().n == 1


def test_nonsplit_structure_round_trip():
    Fd = ex.spherical_object(2)
    S = pf.p1_structure(Fd)
    d = io.functor_instance(Fd, S)
    assert "sigma" in d["structure"]
    S2 = io.parse_instance(json.loads(io.dumps(d))).structure()
    assert np.array_equal(S2.sigma1.matrix, S.sigma1.matrix)


def test_dumps_is_deterministic():
    Fd, S = ex.pn_object(2, 2)
    assert io.dumps(io.functor_instance(Fd, S)) == io.dumps(io.functor_instance(Fd, S))


def test_json_error_has_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "field": 5,\n  oops\n}')
    with pytest.raises(io.InstanceError, match="line 3 column 3"):
        io.load_instance(str(p))


@pytest.mark.parametrize("mutate,msg", [
    (lambda d: d["algebras"]["B"]["mult"].append([9, 0, 0, "1"]), "out of range"),
    (lambda d: d["bimodules"]["E"].update(left="nope"), "unknown left algebra"),
    (lambda d: d["bimodules"]["E"]["right_action"].pop("1"), "right action of basis element 1 missing"),
    (lambda d: d["functor"].update(E="missing"), "unknown name"),
])
def test_structural_errors(mutate, msg):
    Fd, S = ex.pn_object(1, 2)
    d = json.loads(io.dumps(io.functor_instance(Fd, S)))
    mutate(d)
    with pytest.raises(io.InstanceError, match=msg):
        io.parse_instance(d).functor()


def test_bad_field():
    with pytest.raises(io.InstanceError):
        io.parse_instance({"field": {"char": 6}})
