import pytest
from hypothesis import given, strategies as st

from aklv.coeff_ring import ONE, Q, HalfLaurent
from aklv.compare import compare_P, oracle_for
from aklv.duality import BTable
from aklv.klv import (
    CTable,
    KLVError,
    PTable,
    bc_residuals,
    c_from_P,
    c_to_P,
    check_P,
    check_c,
    dump_P_json,
    kl_basis_elt,
    solve_P,
    verify_selfdual,
)
from aklv.orbit_graph import build
from aklv.root_datum import load_pair_spec

from conftest import PRESETS, pipeline

DEPTH = {"sl2_group": 10, "sl3_group": 6, "pgl2_group": 5, "sl2_t": 8, "gl2_o2": 8}


@pytest.mark.parametrize("name", PRESETS)
def test_uniqueness_conditions(name):
    g, D, b, P = pipeline(name, DEPTH[name])
    assert check_P(g, P) == []
    for v, xi in g.basis():
        C = kl_basis_elt(g, P, xi, v)
        assert C.coeff(v, xi) == ONE
        assert verify_selfdual(g, D, C, xi, v).is_zero()


@pytest.mark.parametrize("name", PRESETS)
def test_c_table_and_bc_relation(name):
    g, _, b, P = pipeline(name, DEPTH[name])
    C = c_from_P(g, P)
    assert check_c(C) == []
    assert bc_residuals(g, b, C) == []
    back = c_to_P(g, C)
    assert back == {k: p for k, p in P.entries.items() if k[1] != k[3] and p}


def test_affine_a1_all_one():
    g, _, _, P = pipeline("sl2_group", 10)
    for v in g.order:
        for u in g.down[v]:
            assert P.get((), u, (), v) == ONE
    assert all(p == ONE for p in P.entries.values())


def test_affine_a2_matches_oracle():
    g, _, _, P = pipeline("sl3_group", 6)
    orc, elt = oracle_for(g)
    assert compare_P(g, P, orc, elt) == []
    values = {p for p in P.entries.values()}
    assert values == {ONE, ONE + Q}


def test_sl2t_constants():
    # hand check through delta 6: every P on this pair is a constant
    g, _, _, P = pipeline("sl2_t", 8)
    assert all(p.is_q_polynomial() and p.max_exp() == 0 for p in P.entries.values())


def _fake_graph(delta_v):
    g = build(load_pair_spec("sl2_group"), max_delta=delta_v)
    return g, g.order[-1], g.order[0]


@pytest.mark.parametrize(
    "p,dv,want",
    [
        (ONE, 2, {-2: ONE}),
        (ONE + Q, 3, {-3: ONE, -1: Q}),
        (ONE + Q * Q, 5, {-5: ONE, -1: Q * Q}),
    ],
)
def test_c_from_P_examples(p, dv, want):
    g, v, u = _fake_graph(dv)
    assert g.delta(v) == dv and g.delta(u) == 0
    P = PTable(g, {((), v, (), v): ONE, ((), u, (), v): p})
    C = c_from_P(g, P)
    got = {i: f for (_, _, _, _, i), f in C.entries.items()}
    assert got == want


def test_c_from_P_rejects_parity_violation():
    g, v, u = _fake_graph(2)
    P = PTable(g, {((), u, (), v): HalfLaurent.q_pow(1)})
    with pytest.raises(KLVError):
        c_from_P(g, P)


def test_check_c_flags_odd_slot():
    g, v, u = _fake_graph(2)
    C = CTable(g, {((), u, (), v, -1): HalfLaurent.q_pow(1)})
    assert check_c(C)


def test_check_P_flags_problems():
    g, _, _, P = pipeline("sl2_group", 4)
    v, u = g.order[-1], g.order[0]
    for bad in (HalfLaurent.q_pow(8), HalfLaurent.q_pow(2, -1), HalfLaurent.q_pow(3)):
        Q2 = PTable(g, dict(P.entries))
        Q2.entries[((), u, (), v)] = bad
        assert check_P(g, Q2)


@pytest.mark.parametrize("name", ["sl3_group", "gl2_o2"])
def test_uniqueness_under_perturbation(name):
    # adding any q^j inside the degree window breaks self-duality
    g, D, _, P = pipeline(name, 5)
    for v, xi in g.basis():
        C = kl_basis_elt(g, P, xi, v)
        for (u, eta) in list(C.keys()):
            if u == v:
                continue
            d = g.delta(v) - g.delta(u)
            for j in range(0, (d + 1) // 2):
                pert = C + type(C)({(u, eta): HalfLaurent.q_pow(2 * j)})
                assert not verify_selfdual(g, D, pert, xi, v).is_zero()


def test_window_violation_raises():
    g, _, b, _ = pipeline("sl2_group", 3)
    v, u = g.order[-1], g.order[0]
    bad = BTable(g, dict(b.entries))
    bad.entries[((), u, (), v)] = HalfLaurent.q_pow(-1)
    with pytest.raises(KLVError):
        solve_P(g, bad)


def test_threads_deterministic():
    g, _, b, P = pipeline("sl3_group", 5)
    assert dump_P_json(solve_P(g, b, threads=4)) == dump_P_json(P)


@given(st.sampled_from(PRESETS), st.data())
def test_P_support_in_closure(name, data):
    g, _, _, P = pipeline(name, DEPTH[name])
    v = data.draw(st.sampled_from(g.order))
    for (eta, u, xi, w), p in P.entries.items():
        if w == v:
            assert u in g.down[v]
            assert p.evaluate_at_one() >= 1
