import math

import numpy as np
import pytest

from horolattice.core import IntegerMatrix, SpecialLinearMatrix
from horolattice.fundamental import (
    F_value,
    candidate_bases,
    iota,
    matrix_distance,
    reduce_batch_2x2,
    reduce_matrix,
    x_distance,
    _lex_key,
)
from horolattice.lattices import LatticeDescriptor


def sl2z_box(X):
    def ext(x, y):
        old_r, r = x, y
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        return old_r, old_s, old_t

    mats = []
    for a in range(-X, X + 1):
        for c in range(-X, X + 1):
            if (a, c) == (0, 0) or math.gcd(abs(a), abs(c)) != 1:
                continue
            g, p, q = ext(a, c)
            if g < 0:
                g, p, q = -g, -p, -q
            d0, b0 = p, -q
            lo, hi = -(10**9), 10**9
            ok = True
            for w0, w in ((b0, a), (d0, c)):
                if w == 0:
                    if abs(w0) > X:
                        ok = False
                else:
                    l0, h0 = (-X - w0) / w, (X - w0) / w
                    if l0 > h0:
                        l0, h0 = h0, l0
                    lo = max(lo, math.ceil(l0 - 1e-9))
                    hi = min(hi, math.floor(h0 + 1e-9))
            if not ok:
                continue
            for k in range(lo, hi + 1):
                mats.append(((a, b0 + k * a), (c, d0 + k * c)))
    return np.array(mats, dtype=float)


BOX20 = sl2z_box(20)


def brute_reduce_2d(g, box=BOX20):
    H = np.einsum("ij,kjl->kil", g, box)
    F = np.sqrt((H * H).sum(axis=(1, 2)) / 2.0)
    fmin = float(F.min())
    ties = np.nonzero(F <= fmin + 1e-9)[0]
    pick = min(ties, key=lambda i: _lex_key(H[i]))
    return H[pick], fmin


def random_word(rng, budget=4.0):
    g = np.eye(2)
    left = budget
    for _ in range(int(rng.integers(1, 4))):
        t = rng.uniform(0, left)
        left -= t
        S = (
            np.array([[1.0, rng.uniform(-2, 2)], [0.0, 1.0]])
            if rng.integers(0, 2)
            else np.array([[1.0, 0.0], [rng.uniform(-2, 2), 1.0]])
        )
        g = g @ np.diag([math.exp(t), math.exp(-t)]) @ S
    return g


def test_F_value_identity():
    assert F_value(np.eye(2)) == pytest.approx(1.0)
    assert F_value(np.eye(3)) == pytest.approx(math.sqrt(1.5))


def test_F_value_inverse_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(20):
        g = SpecialLinearMatrix.from_entries(random_word(rng))
        assert F_value(g) == pytest.approx(F_value(g.inv()), rel=1e-12)


def test_reduce_integer_input_gives_signed_permutation():
    for d, gamma in ((2, [[2, 1], [1, 1]]), (3, [[1, 2, 0], [0, 1, 3], [0, 0, 1]])):
        r = reduce_matrix(np.array(gamma, dtype=float))
        assert r.fvalue == pytest.approx(math.sqrt(d / 2.0))
        rep = r.rep.entries
        assert np.abs(np.abs(rep) - np.rint(np.abs(rep))).max() < 1e-9
        assert sorted(np.abs(rep).sum(axis=0).tolist()) == [1.0] * d


def test_reduce_diagonal_matches_brute_force():
    g = np.diag([2.0, 0.5])
    r = reduce_matrix(g)
    hb, fb = brute_reduce_2d(g)
    assert r.fvalue == pytest.approx(fb, abs=1e-12)
    assert np.abs(r.rep.entries - hb).max() < 1e-9
    # the coset element is trivial up to sign: gamma in {Id, -Id}
    assert r.gamma.rows in (((1, 0), (0, 1)), ((-1, 0), (0, -1)))


def test_reduce_shear_example():
    r = reduce_matrix([[1.0, 7.3], [0.0, 1.0]])
    rep = np.abs(r.rep.entries)
    assert rep.max() == pytest.approx(1.0)
    assert sorted(rep.ravel().tolist())[0] == pytest.approx(0.0)
    assert sorted(rep.ravel().tolist())[1] == pytest.approx(0.3)
    # gamma undoes a shear by 7 (up to overall sign)
    assert abs(r.gamma.rows[0][1]) == 7


def test_reduce_idempotent_bit_exact():
    rng = np.random.default_rng(1)
    for _ in range(20):
        r = reduce_matrix(random_word(rng))
        r2 = reduce_matrix(r.rep)
        assert r2.gamma.rows == IntegerMatrix.identity(2).rows
        assert np.array_equal(r2.rep.entries, r.rep.entries)


def test_reduce_gamma_invariance_exact():
    rng = np.random.default_rng(2)
    for _ in range(40):
        g = random_word(rng)
        r = reduce_matrix(g)
        scale = max(1.0, np.abs(r.rep.entries).max(), np.abs(r.rep.inverse).max())
        for _ in range(3):
            rows = np.eye(2, dtype=object)
            for _ in range(int(rng.integers(1, 4))):
                k = int(rng.integers(-3, 4))
                E = (
                    np.array([[1, k], [0, 1]], dtype=object)
                    if rng.integers(0, 2)
                    else np.array([[1, 0], [k, 1]], dtype=object)
                )
                rows = rows @ E
            gam0 = IntegerMatrix.from_rows(rows.tolist())
            r2 = reduce_matrix(g @ gam0.to_array())
            assert r2.gamma.rows == (r.gamma @ gam0).rows
            assert np.abs(r2.rep.entries - r.rep.entries).max() <= 1e-8 * scale


def test_reduce_matches_brute_force_random():
    rng = np.random.default_rng(3)
    for _ in range(40):
        g = random_word(rng, budget=3.0)
        r = reduce_matrix(g)
        hb, fb = brute_reduce_2d(g)
        assert r.fvalue <= fb + 1e-9
        if fb <= r.fvalue + 1e-9:
            assert np.abs(r.rep.entries - hb).max() < 1e-8


def test_reduce_d3_never_worse_than_word_box():
    gens = []
    for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]:
        for k in (1, -1):
            E = np.eye(3, dtype=np.int64)
            E[i, j] = k
            gens.append(E)
    seen = {tuple(np.eye(3, dtype=np.int64).ravel())}
    frontier = [np.eye(3, dtype=np.int64)]
    for _ in range(5):
        new = []
        for M in frontier:
            for G in gens:
                P = M @ G
                if np.abs(P).max() > 3:
                    continue
                key = tuple(P.ravel())
                if key not in seen:
                    seen.add(key)
                    new.append(P)
        frontier = new
    box = np.array([np.array(k).reshape(3, 3) for k in seen], dtype=float)
    rng = np.random.default_rng(4)
    for _ in range(15):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1
        t1, t2 = rng.uniform(-0.7, 0.7, 2)
        S = np.eye(3)
        S[0, 1], S[0, 2], S[1, 2] = rng.uniform(-1.5, 1.5, 3)
        g = q @ np.diag([math.exp(t1), math.exp(t2), math.exp(-t1 - t2)]) @ S
        r = reduce_matrix(g)
        H = np.einsum("ij,kjl->kil", g, box)
        A = (H * H).sum(axis=(1, 2))
        Hinv = np.linalg.inv(H)
        B = (Hinv * Hinv).sum(axis=(1, 2))
        fb = float(np.sqrt(A * B / (A + B)).min())
        assert r.fvalue <= fb + 1e-9


def test_reduce_coset_preservation():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = random_word(rng)
        r = reduce_matrix(g)
        resid = r.rep.inverse @ g
        assert np.abs(resid - np.rint(resid)).max() < 1e-6
        assert np.allclose(r.rep.entries @ r.gamma.to_array(), g, atol=1e-9 * max(1, np.abs(g).max()))


def test_reduce_certificate_holds():
    rng = np.random.default_rng(6)
    for _ in range(10):
        g = random_word(rng)
        r = reduce_matrix(g)
        L = LatticeDescriptor(r.rep)
        for h in candidate_bases(L, r.certificate):
            assert F_value(h) >= r.fvalue - 1e-9


def test_iota_well_defined():
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = random_word(rng)
        rows = np.eye(2, dtype=object)
        for _ in range(2):
            k = int(rng.integers(-5, 6))
            rows = rows @ np.array([[1, k], [0, 1]], dtype=object)
        gam = np.array(rows, dtype=float)
        a = iota(g)
        b = iota(g @ gam)
        assert np.abs(a.entries - b.entries).max() < 1e-8 * max(1.0, np.abs(a.entries).max())


def test_candidate_bases_unit_lattice():
    L = LatticeDescriptor.from_matrix(np.eye(2))
    cands = candidate_bases(L, 1.5)
    mats = sorted(tuple(np.rint(h.entries).astype(int).ravel()) for h in cands)
    assert mats == sorted(
        [(-1, 0, 0, -1), (0, -1, 1, 0), (0, 1, -1, 0), (1, 0, 0, 1)]
    )
    assert candidate_bases(L, 1.2) == []  # below sqrt(d) nothing is unimodular


def test_candidate_bases_monotone():
    rng = np.random.default_rng(8)
    L = LatticeDescriptor.from_matrix(random_word(rng, budget=1.0))
    small = {tuple(np.round(h.entries, 9).ravel()) for h in candidate_bases(L, 2.0)}
    large = {tuple(np.round(h.entries, 9).ravel()) for h in candidate_bases(L, 3.0)}
    assert small <= large


def test_batch_agrees_with_scalar():
    rng = np.random.default_rng(9)
    for s in (4.0, 9.0):
        x0 = np.array([[0.0, -1.0], [1.0, 0.0]])
        us = rng.uniform(-0.5, 0.5, 200)
        P = np.empty((200, 2, 2))
        for i, u in enumerate(us):
            P[i] = np.diag([math.exp(s), math.exp(-s)]) @ np.array([[1.0, u], [0.0, 1.0]]) @ x0
        reps, gammas = reduce_batch_2x2(P)
        for i in range(0, 200, 10):
            r = reduce_matrix(P[i])
            assert np.array_equal(np.array(r.gamma.rows, dtype=np.int64), gammas[i])
            assert np.abs(r.rep.entries - reps[i]).max() < 1e-9


def test_distances():
    g = SpecialLinearMatrix.from_entries(np.eye(2))
    assert matrix_distance(g, g) == pytest.approx(0.0)
    h = SpecialLinearMatrix.from_entries([[1.0, 0.01], [0.0, 1.0]])
    assert matrix_distance(h, g) == pytest.approx(0.01)
    # coset distance sees through an integer shear
    shear = np.array([[1.0, 3.0], [0.0, 1.0]])
    moved = h.entries @ shear
    assert x_distance(reduce_matrix(moved).rep, reduce_matrix(np.eye(2)).rep, 0.5) == pytest.approx(
        0.01, abs=1e-9
    )
