import cmath
import itertools
import math

import numpy as np
import pytest

from conftest import X_GRID, X_PARAMS, XP_GRID, XP_PARAMS, disk, rel
from rashba_green.errors import OutOfRegion, ParameterPole
from rashba_green.oracle import brute_force_x, brute_force_x_prime
from rashba_green.series_engine import horn_h3_confluent, horn_h10, hyp0f1, kampe_de_feriet_x
from rashba_green.xy_series import (
    Rep, SeriesParams, TripleArg, boundary_reps, choose_xprime_rep, classify_xprime_region,
    confluence_xprime, dx_d1, dx_d2, dx_d3, dxp_d3, eval_x, eval_x_prime, xprime_rep_rates,
)

P = SeriesParams
T = TripleArg


def X(a, b, z1, z2, z3, rep=Rep.AUTO):
    return eval_x(P(a, b), T(z1, z2, z3), rep).value


def Xp(a, b, z1, z2, z3, rep=Rep.AUTO):
    return eval_x_prime(P(a, b), T(z1, z2, z3), rep).value


# --- X ------------------------------------------------------------------------

def test_x_examples():
    assert X(1.5, 2.5, 0, 0, 0) == 1
    z3 = -1.3 + 0.6j
    assert rel(X(1.5, 2.5, 0, 0, z3), hyp0f1(1.5, z3).value) < 1e-13
    ref = brute_force_x(P(1.5, 1.5), T(0.01, -0.02, 0.05), 40)
    for rep in (Rep.X1, Rep.X2, Rep.X3):
        assert rel(X(1.5, 1.5, 0.01, -0.02, 0.05, rep), ref) < 1e-12


def test_x_vs_brute_larger():
    z = T(0.4 - 0.3j, 0.9 + 0.2j, -1.5 + 0.5j)
    ref = brute_force_x(P(0.5, 0.5), z, 60)
    assert rel(eval_x(P(0.5, 0.5), z).value, ref) < 1e-12


def test_x_parameter_pole():
    with pytest.raises(ParameterPole):
        eval_x(P(-1, 1.5), T(0.1, 0.1, 0.1))


@pytest.mark.parametrize("ab", X_PARAMS)
def test_x_representations_agree(ab):
    for z in X_GRID:
        vals = [X(*ab, *z, rep) for rep in (Rep.X1, Rep.X2, Rep.X3)]
        for u, v in itertools.combinations(vals, 2):
            assert rel(u, v) < 1e-9


def test_x_auto_choice():
    # only z3 nonzero -> outer sum over z1 or z2 stops at once
    assert eval_x(P(1.5, 1.5), T(0, 0, 3.0)).representation == "X2"
    assert eval_x(P(1.5, 1.5), T(5.0, 5.0, 0)).representation == "X3"


# --- X' -----------------------------------------------------------------------

def test_xprime_examples():
    assert Xp(0.5, 1.5, 0, 0, 0) == 1
    z1, z3 = 0.12 - 0.05j, -0.7 + 0.3j
    assert rel(Xp(0.5, 1.5, z1, 0, z3), horn_h10(0.5, 1.5, z1, z3).value) < 1e-13
    ref = brute_force_x_prime(P(0.5, 1.5), T(0.05, 0.3, -0.2), 60)
    for rep in (Rep.XP1, Rep.XP2, Rep.XP3):
        assert rel(Xp(0.5, 1.5, 0.05, 0.3, -0.2, rep), ref) < 1e-10


def test_xprime_vs_brute_complex():
    z = T(0.08 + 0.04j, -0.9 + 0.5j, 1.1 - 0.3j)
    ref = brute_force_x_prime(P(-0.5, 0.5), z, 80)
    assert rel(eval_x_prime(P(-0.5, 0.5), z).value, ref) < 1e-10


def test_classify_examples():
    p = P(0.5, 1.5)
    assert classify_xprime_region(T(0, 0, 7), p) == {Rep.XP1, Rep.XP2, Rep.XP3}
    assert Rep.XP1 not in classify_xprime_region(T(0.3, 0.1, 0), p)
    got = classify_xprime_region(T(0.2, 1.5, 0), p)
    assert {Rep.XP1, Rep.XP2} <= got
    # |z2| beyond 2 rules out Xp1; Xp2 and Xp3 share this stretch of boundary
    assert classify_xprime_region(T(0.1, 3.0, 0), p) == {Rep.XP2, Rep.XP3}
    assert classify_xprime_region(T(0.24, 3.0, 0), p) == set()


def test_classify_boundaries():
    # |z1| = 1/4 admitted for Xp1 only when Re(a - b - 1/2) < 0
    assert boundary_reps(T(0.25, 1.0, 0), P(0.5, 1.5)) == {Rep.XP1}
    assert Rep.XP1 not in classify_xprime_region(T(0.25, 1.0, 0), P(1.5, 0.5))
    t = 0.1
    edge = (1 + math.sqrt(1 - 4 * t)) / (2 * t)
    assert Rep.XP2 in boundary_reps(T(t, edge, 0), P(0.5, 1.5))
    assert Rep.XP2 not in classify_xprime_region(T(t, edge, 0), P(1.5, 0.5))


def test_xprime_out_of_region():
    with pytest.raises(OutOfRegion):
        eval_x_prime(P(0.5, 1.5), T(0.3, 5.0, 0))
    with pytest.raises(OutOfRegion):
        eval_x_prime(P(0.5, 1.5), T(0.1, 3.0, 0), Rep.XP1)
    with pytest.raises(ParameterPole):
        eval_x_prime(P(2, 1.5), T(0.1, 0.1, 0))


def test_xprime_auto_tie_break():
    # at the origin every rate is zero; Xp2 wins the tie
    assert choose_xprime_rep(T(0, 0, 1), P(0.5, 1.5)) == Rep.XP2
    rates = xprime_rep_rates(T(0.2, 0.1, 0))
    assert rates[Rep.XP1] == pytest.approx(0.8)


@pytest.mark.parametrize("ab", XP_PARAMS)
def test_xprime_representations_agree(ab):
    for z in XP_GRID:
        reps = sorted(classify_xprime_region(T(*z), P(*ab)), key=lambda r: r.value)
        vals = [Xp(*ab, *z, rep) for rep in reps]
        for u, v in itertools.combinations(vals, 2):
            assert rel(u, v) < 1e-9


# --- recurrences and corollaries ---------------------------------------------

def _ab(rng, choices=(0.5, 1.5, 2.5)):
    return (rng.choice(choices) + rng.uniform(-0.1, 0.1), rng.choice(choices) + rng.uniform(-0.1, 0.1))


def test_recurrence_x():
    rng = np.random.default_rng(1)
    for _ in range(30):
        a, b = _ab(rng)
        z1, z2, z3 = (disk(rng, 0.5) for _ in range(3))
        lhs = X(a, b, z1, z2, z3) - z2 / (a * b) * X(a + 1, b + 1, z1, z2, z3)
        rhs = kampe_de_feriet_x(a, b, z1, z3).value
        assert abs(lhs - rhs) <= 1e-9 * (1 + abs(X(a, b, z1, z2, z3)))


def test_recurrence_xprime():
    rng = np.random.default_rng(2)
    for _ in range(30):
        a, b = _ab(rng, (0.5, -0.5, 1.5))
        z1, z2, z3 = disk(rng, 0.24), disk(rng, 1.5), disk(rng, 2)
        xp = Xp(a, b, z1, z2, z3)
        lhs = xp - a / b * z1 * z2 * Xp(a + 1, b + 1, z1, z2, z3)
        assert abs(lhs - horn_h10(a, b, z1, z3).value) <= 1e-9 * (1 + abs(xp))


def test_corollary_x():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a, b = _ab(rng)
        z1, z2, z3 = disk(rng, 0.5), disk(rng, 0.3), disk(rng, 0.5)
        total, coef = 0j, 1 + 0j
        for n in range(1, 21):
            coef *= z2 / ((a + n - 1) * (b + n - 1))
            total += coef * (X(a + n, b + n, z1, z2, z3) - n * kampe_de_feriet_x(a + n, b + n, z1, z3).value)
        assert abs(total) <= 1e-8


def test_corollary_xprime():
    rng = np.random.default_rng(4)
    for _ in range(5):
        a, b = 0.5 + rng.uniform(-0.1, 0.1), 1.5 + rng.uniform(-0.1, 0.1)
        z1 = disk(rng, 0.2, 0.05)
        z2 = disk(rng, 0.2 / abs(z1))
        z3 = disk(rng, 0.5)
        total, coef = 0j, 1 + 0j
        for n in range(1, 21):
            coef *= z1 * z2 * (a + n - 1) / (b + n - 1)
            total += coef * (Xp(a + n, b + n, z1, z2, z3) - n * horn_h10(a + n, b + n, z1, z3).value)
        assert abs(total) <= 1e-8


# --- derivatives ------------------------------------------------------------------

def _fd(f, z, k, h=1e-5):
    e = [0, 0, 0]
    e[k] = h
    zp = T(*(z[i] + e[i] for i in range(3)))
    zm = T(*(z[i] - e[i] for i in range(3)))
    return (f(zp) - f(zm)) / (2 * h)


def test_derivative_examples():
    a, b = 1.5, 2.5
    z0 = T(0, 0, 0)
    assert rel(dx_d1(P(a, b), z0), 1 / (a * b * (a + 1))) < 1e-15
    assert rel(dx_d3(P(1.5, 1.5), z0), 2 / 3) < 1e-15
    assert rel(dx_d2(P(a, b), z0).value, 1 / (a * b)) < 1e-15
    assert rel(dxp_d3(P(0.5, 1.5), z0), 1 / (0.5 - 1)) < 1e-15
    z1, z3 = 0.3 - 0.1j, -0.8 + 0.2j
    expect = kampe_de_feriet_x(a + 1, b + 1, z1, z3).value / (a * b)
    assert rel(dx_d2(P(a, b), T(z1, 0, z3)).value, expect) < 1e-13
    with pytest.raises(ParameterPole):
        dxp_d3(P(1 + 0j, 1.5), z0)


def test_x_derivatives_fd():
    rng = np.random.default_rng(6)
    for _ in range(8):
        a, b = _ab(rng)
        p = P(a, b)
        z = [disk(rng, 0.6) for _ in range(3)]
        f = lambda w: eval_x(p, w).value
        zt = T(*z)
        assert rel(dx_d1(p, zt), _fd(f, z, 0)) < 1e-6
        assert rel(dx_d2(p, zt).value, _fd(f, z, 1)) < 1e-6
        assert rel(dx_d3(p, zt), _fd(f, z, 2)) < 1e-6


def test_xprime_d3_fd():
    rng = np.random.default_rng(7)
    for _ in range(8):
        a, b = 0.5 + rng.uniform(-0.1, 0.1), 1.5 + rng.uniform(-0.1, 0.1)
        p = P(a, b)
        z = [disk(rng, 0.2), disk(rng, 1.5), disk(rng, 1.5)]
        f = lambda w: eval_x_prime(p, w).value
        assert rel(dxp_d3(p, T(*z)), _fd(f, z, 2)) < 1e-6


def test_pde_x():
    rng = np.random.default_rng(8)
    h = 1e-3
    for _ in range(20):
        p = P(*_ab(rng))
        z = [disk(rng, 0.5) for _ in range(3)]
        f = lambda w: eval_x(p, w).value
        d1 = lambda w: _fd(f, w, 0, h)
        d12 = _fd(lambda w: d1([w.z1, w.z2, w.z3]), z, 1, h)
        d23 = _fd(lambda w: _fd(f, [w.z1, w.z2, w.z3], 1, h), z, 2, h)
        residual = d1(z) + z[1] * d12 - d23
        assert abs(residual) < 1e-5 * max(1.0, abs(f(T(*z))))


def test_pde_xprime():
    # ((D3 + D2 - 2 D1 + 1 - a) d3 + 1) X' = 0 with Dj = zj dj
    rng = np.random.default_rng(9)
    h = 1e-4
    for _ in range(5):
        a, b = 0.5 + rng.uniform(-0.1, 0.1), 1.5 + rng.uniform(-0.1, 0.1)
        p = P(a, b)
        z = [disk(rng, 0.15, 0.02), disk(rng, 1.0), disk(rng, 1.0)]
        f = lambda w: eval_x_prime(p, w).value
        g = lambda w: dxp_d3(p, w)  # d3 X'
        zt = T(*z)
        value = (z[2] * _fd(g, z, 2, h) + z[1] * _fd(g, z, 1, h) - 2 * z[0] * _fd(g, z, 0, h)
                 + (1 - a) * g(zt) + f(zt))
        assert abs(value) < 1e-6 * max(1.0, abs(f(zt)))


# --- confluence -------------------------------------------------------------------

def test_confluence():
    assert confluence_xprime(P(0.5, 1.5), 0, 0).value == 1
    a, b = 0.5, 1.5
    z1, z2, z3 = 0.3 + 0.1j, 1.2 - 0.5j, -0.6 + 0.2j
    limit = confluence_xprime(P(a, b), z1 * z2, z3).value
    assert rel(limit, horn_h3_confluent(a, 1, b, z1 * z2, z3).value) == 0
    errs = []
    for eps in (1e-2, 1e-3):
        errs.append(abs(Xp(a, b, eps * z1, z2 / eps, z3) - limit))
    assert errs[1] < 1e-3 and errs[1] < errs[0] / 5
    with pytest.raises(OutOfRegion):
        confluence_xprime(P(a, b), 1.2, 0)
