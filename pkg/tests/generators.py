"""Random instance generators shared by the property tests."""

import numpy as np

from pntwist.dga import (BimoduleMap, DgAlgebra, DgBimodule, direct_sum, map_space, shift)
from pntwist.exact import Field, block_diag
from pntwist.twisted import diagonal, restrict


def rand_aut(F, degs, rng):
    """Random degree preserving automorphism of a graded vector space."""
    n = len(degs)
    g = F.zeros((n, n))
    for dg in sorted(set(degs.tolist())):
        idx = np.flatnonzero(degs == dg)
        while True:
            b = F.random((len(idx), len(idx)), rng, -3, 4)
            if F.rank(b) == len(idx):
                break
        g[np.ix_(idx, idx)] = b
    return g


def rand_complex(F, rng, lo=-2, hi=2, pieces=3, contractible=False):
    """A complex of vector spaces: a random conjugate of a sum of pieces
    k and (k -> k)."""
    degs, blocks = [], []
    for _ in range(pieces):
        a = int(rng.integers(lo, hi + 1))
        if contractible or rng.random() < 0.6:
            degs += [a - 1, a]
            blocks.append(np.array([[0, 0], [1, 0]]))
        else:
            degs += [a]
            blocks.append(np.zeros((1, 1), dtype=int))
    degs = np.array(degs)
    d = block_diag(F, [F.coerce(b) for b in blocks])
    g = rand_aut(F, degs, rng)
    d = F.mul(g, d, F.inv(g))
    return DgBimodule.free_ground(F, degs, d), g, blocks


def rand_map(F, M, N, p, rng, closed=False):
    sp = map_space(M, N, p, closed=closed)
    m = F.zeros((N.dim, M.dim))
    for i in range(len(sp)):
        m = F.reduce(m + F.scalar(int(rng.integers(-3, 4))) * sp[i])
    return BimoduleMap(M, N, p, m)


def _contractible(F, rng):
    C, gc, blocks = rand_complex(F, rng, pieces=2, contractible=True)
    h0 = block_diag(F, [F.coerce(b.T) for b in blocks])
    return C, F.mul(gc, h0, F.inv(gc))


def replacement_instance(F, rng):
    """(E, qidx, P, alpha, beta, theta_Q, theta_P, phi): a three step complex
    E whose middle piece Q is homotopy equivalent to P through explicit data."""
    P0, _, _ = rand_complex(F, rng, pieces=2)
    C1, h1 = _contractible(F, rng)
    C2, h2 = _contractible(F, rng)
    QC, PC = direct_sum([P0, C1]), direct_sum([P0, C2])
    u = rand_aut(F, QC.degs, rng)
    ui = F.inv(u)
    v = rand_aut(F, PC.degs, rng)
    vi = F.inv(v)
    Q = DgBimodule.free_ground(F, QC.degs, F.mul(u, QC.d, ui))
    P = DgBimodule.free_ground(F, PC.degs, F.mul(v, PC.d, vi))
    n0 = P0.dim
    jq = F.zeros((QC.dim, n0))
    jq[:n0] = F.eye(n0)
    jp = F.zeros((PC.dim, n0))
    jp[:n0] = F.eye(n0)
    A0, B0 = F.matmul(jq, jp.T), F.matmul(jp, jq.T)
    alpha = BimoduleMap(P, Q, 0, F.mul(u, A0, vi))
    beta = BimoduleMap(Q, P, 0, F.mul(v, B0, ui))
    H1 = F.zeros((QC.dim, QC.dim))
    H1[n0:, n0:] = h1
    H2 = F.zeros((PC.dim, PC.dim))
    H2[n0:, n0:] = h2
    tq0 = BimoduleMap(Q, Q, -1, F.mul(u, H1, ui))
    tp0 = BimoduleMap(P, P, -1, F.reduce(-F.mul(v, H2, vi)))
    sQ, sP = rand_map(F, Q, Q, -2, rng), rand_map(F, P, P, -2, rng)
    tq, tp = tq0 + sQ.differential(), tp0 + sP.differential()
    phi = BimoduleMap(Q, P, -2, F.reduce(F.matmul(beta.matrix, sQ.matrix) + F.matmul(sP.matrix, beta.matrix)
                                         + rand_map(F, Q, P, -2, rng, closed=True).matrix))
    X = [rand_complex(F, rng)[0], Q, rand_complex(F, rng)[0]]
    S = direct_sum(X)
    o = np.cumsum([0] + [x.dim for x in X])
    c = rand_map(F, X[0], X[2], 1, rng, closed=True)
    D0 = S.d.copy()
    D0[o[2]:, :o[1]] = c.matrix
    g = F.eye(S.dim)
    for i, j in [(0, 1), (1, 2), (0, 2)]:
        g[o[j]:o[j + 1], o[i]:o[i + 1]] = rand_map(F, X[i], X[j], 0, rng).matrix
    D = F.mul(g, D0, F.inv(g))
    E = DgBimodule(S.left, S.right, S.degs, S.lam, S.rho, D)
    qidx = np.arange(o[1], o[2])
    Qr = restrict(E, qidx)
    return (E, qidx, P, BimoduleMap(P, Qr, 0, alpha.matrix), BimoduleMap(Qr, P, 0, beta.matrix),
            BimoduleMap(Qr, Qr, -1, tq.matrix), tp, BimoduleMap(Qr, P, -2, phi.matrix))


def tta_tuple(F, rng):
    """(H, sigma, sigma2, f, beta) with sigma = sigma2 f + d(beta), over
    A = k[e]/e^2 (deg e = 1); H a sum of shifted copies of A."""
    A = DgAlgebra.truncated_polynomial(F, 1, 1, "e")
    Ad = diagonal(A)
    shifts = [int(s) for s in rng.integers(0, 3, size=int(rng.integers(1, 3)))]
    H = direct_sum([shift(Ad, s) for s in shifts])
    sigma2 = rand_map(F, H, Ad, 1, rng, closed=True)
    # f: a random closed automorphism of H
    while True:
        f = rand_map(F, H, H, 0, rng, closed=True)
        if F.rank(f.matrix) == H.dim:
            break
    beta = rand_map(F, H, Ad, 0, rng)
    sigma = BimoduleMap(H, Ad, 1, F.reduce(F.matmul(sigma2.matrix, f.matrix) + beta.differential().matrix))
    return H, sigma, sigma2, f, beta
