import pytest
from hypothesis import given, strategies as st

from aklv.coeff_ring import ONE, HalfLaurent
from aklv.compare import kf_from_oracle
from aklv.root_datum import load_pair_spec
from aklv.spherical import (
    SphericalError,
    b_spherical,
    codim_check,
    dominant_rep,
    enumerate_dominant,
    is_dominant,
    lx_connected,
    pole_order_ok,
    rel_kf,
    spherical_closure_leq,
    spherical_recurrence_residuals,
    split_theta,
)

from conftest import pipeline

DEPTH = {"sl2_group": 10, "sl2_t": 8, "gl2_o2": 8, "sl3_group": 8}


def level(name):
    g, D, b, P = pipeline(name, DEPTH[name])
    sph = enumerate_dominant(g, DEPTH[name], P)
    return g, b, P, sph, rel_kf(g, P, sph)


@pytest.mark.parametrize(
    "name,labels",
    [
        ("sl2_group", [((k, k), 2 * k + 1) for k in range(5)]),
        ("sl2_t", [((n,), n + 1) for n in range(8)]),
        ("gl2_o2", [((k, -k), k + 1) for k in range(8)]),
        ("sl3_group", [((0, 0, 0, 0), 3), ((1, 1, 1, 1), 7)]),
    ],
)
def test_labels_and_levels(name, labels):
    _, _, _, sph, _ = level(name)
    assert [(o.lam, o.delta) for o in sph.orbits] == labels


@pytest.mark.parametrize("name", list(DEPTH))
def test_zero_class_holds_the_closed_orbits(name):
    g, _, _, sph, _ = level(name)
    zero = sph.by_lam(tuple(0 for _ in g.spec.datum.simple_coroots[0]))
    assert {v for v in g.order if g.delta(v) == 0} <= set(zero.nodes)
    assert zero.delta == min(o.delta for o in sph.orbits)


def test_group_case_count_with_bound_six():
    g, _, _, _, _ = level("sl2_group")
    sph = enumerate_dominant(g, 6)
    # dominant k with 2k + l(w0) <= 6
    assert [o.lam for o in sph.orbits] == [(0, 0), (1, 1), (2, 2)]


def test_too_shallow():
    g, _, _, _ = pipeline("sl2_t", 3)
    with pytest.raises(SphericalError):
        enumerate_dominant(g, 4)


def test_dominance_helpers():
    d = load_pair_spec("sl3_group").datum
    y = (1, -2, 0, 0)
    r = dominant_rep(d, y)
    assert is_dominant(d, r) and not is_dominant(d, y)
    assert dominant_rep(d, r) == r


@pytest.mark.parametrize("name", list(DEPTH))
def test_rel_kf_diagonal_positive_parity(name):
    g, _, _, sph, R = level(name)
    for o in sph.orbits:
        for chi in o.characters:
            assert R.get(chi, o.lam, chi, o.lam) == ONE
    for (c1, mu, chi, lam), p in R.entries.items():
        assert p.is_q_polynomial()
        assert all(a >= 0 for _, a in p.items())
        if mu != lam and p:
            assert p.max_exp() <= 2 * (sph.by_lam(lam).delta - sph.by_lam(mu).delta) - 2


def test_sl2_group_kostka_foulkes():
    g, _, _, sph, R = level("sl2_group")
    d = g.spec.datum
    n = 0
    for o_l in sph.orbits:
        for o_m in sph.orbits:
            if o_m.delta > o_l.delta:
                continue
            kf = R.kostka_foulkes((), o_m.lam, (), o_l.lam)
            assert kf == kf_from_oracle(d, o_l.lam, o_m.lam)
            assert kf == HalfLaurent.q_pow(2 * (o_l.lam[0] - o_m.lam[0]))
            n += 1
    assert n == 15


def test_sl3_group_kostka_foulkes():
    g, _, _, sph, R = level("sl3_group")
    lam, mu = (1, 1, 1, 1), (0, 0, 0, 0)
    assert R.kostka_foulkes((), mu, (), lam) == kf_from_oracle(g.spec.datum, lam, mu)
    assert R.kostka_foulkes((), mu, (), lam) == HalfLaurent({2: 1, 4: 1})


@pytest.mark.parametrize("name", ["sl2_t", "sl2_group", "sl3_group"])
def test_codim_formula(name):
    g, _, _, sph, _ = level(name)
    assert lx_connected(g.spec.datum, g.spec.inv)
    for o_l in sph.orbits:
        for o_m in sph.orbits:
            if spherical_closure_leq(g.spec.datum, g.spec.inv, o_l.lam, o_m.lam):
                ok, lhs, rhs = codim_check(g.spec.datum, sph, o_l.lam, o_m.lam)
                assert ok, (o_l.lam, o_m.lam, lhs, rhs)
    assert codim_check(g.spec.datum, sph, sph.orbits[0].lam, sph.orbits[0].lam) == (True, 0, 0)


def test_codim_one_step():
    g, _, _, sph, _ = level("sl2_t")
    assert codim_check(g.spec.datum, sph, (2,), (3,))[1:] == (1, 1)


@pytest.mark.parametrize("name,want", [("sl2_t", True), ("sl2_group", True), ("sl3_group", True), ("gl2_o2", False), ("pgl2_group", False)])
def test_connectedness(name, want):
    p = load_pair_spec(name)
    assert lx_connected(p.datum, p.inv) is want


@pytest.mark.parametrize("m", range(6))
def test_gl2o2_closure(m):
    p = load_pair_spec("gl2_o2")
    assert spherical_closure_leq(p.datum, p.inv, (m, 0), (m + 1, -1))
    assert not spherical_closure_leq(p.datum, p.inv, (m + 1, -1), (m, 0))


def test_closure_reflexive_and_components():
    p = load_pair_spec("gl2_o2")
    assert spherical_closure_leq(p.datum, p.inv, (2, -2), (2, -2))
    # a difference outside the coroot lattice never relates two labels
    assert not spherical_closure_leq(p.datum, p.inv, (1, 0), (2, -2))
    assert not spherical_closure_leq(p.datum, p.inv, (2, -2), (1, 0))


def test_split_theta_is_involution():
    from aklv import _lattice as L

    for name in ("sl2_t", "gl2_o2", "sl3_group"):
        p = load_pair_spec(name)
        th = split_theta(p.datum, p.inv)
        assert L.mat_mul(th, th) == L.identity(len(th))


@pytest.mark.parametrize("name", list(DEPTH))
def test_B_diagonal_pole_and_recurrence(name):
    g, b, _, sph, R = level(name)
    B = b_spherical(b, sph)
    for o in sph.orbits:
        for chi in o.characters:
            assert B[(chi, o.lam, chi, o.lam)] == HalfLaurent.q_pow(-2 * o.delta)
    assert pole_order_ok(B, sph)
    assert spherical_recurrence_residuals(B, R) == []


def test_pole_order_detects_violation():
    _, b, _, sph, _ = level("sl2_t")
    B = dict(b_spherical(b, sph))
    o = sph.orbits[1]
    B[((0,), (0,), (0,), o.lam)] = HalfLaurent.q_pow(-2 * o.delta - 2)
    assert not pole_order_ok(B, sph)


@given(st.sampled_from(["sl2_group", "sl3_group"]), st.data())
def test_rel_kf_independent_of_representative(name, data):
    g, _, P, sph, R = level(name)
    o_l = data.draw(st.sampled_from(sph.orbits))
    for o_m in sph.orbits:
        if o_m.delta > o_l.delta:
            continue
        want = R.get((), o_m.lam, (), o_l.lam)
        for u in o_m.nodes:
            assert P.get((), u, (), o_l.open_orbit) == want
