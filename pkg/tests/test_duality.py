import json

import pytest
import sympy
from hypothesis import given, strategies as st

from aklv.coeff_ring import ONE, Q_INV, HalfLaurent
from aklv.compare import compare_b, oracle_for
from aklv.duality import (
    K,
    S,
    DependencyMissing,
    DualityError,
    DualityOperator,
    NoIntegralSolution,
    Underdetermined,
    _from_field,
    _solve,
    check_btable,
    compute_b,
    compute_duality,
    d_base_closed,
    d_block_solve,
    d_step_IIb,
    dump_b_json,
    hecke_residual,
    involution_residual,
    neg,
)
from aklv.hecke_module import ModuleElt
from aklv.orbit_graph import build
from aklv.root_datum import load_pair_spec

from conftest import PRESETS, pipeline

DEPTH = {"sl2_group": 6, "sl3_group": 4, "pgl2_group": 4, "sl2_t": 6, "gl2_o2": 6}


def test_neg_is_identity_on_two_torsion():
    assert neg(()) == ()
    assert neg((1, 0, 1)) == (1, 0, 1)


def test_closed_base():
    g = build(load_pair_spec("sl2_t"), max_delta=0)
    for v in g.order:
        assert d_base_closed(g, (), v) == ModuleElt.basis(v, ())
    bt = compute_b(g)
    assert {(e, u, x, v) for (e, u, x, v) in bt.entries} == {((), v, (), v) for v in g.order}
    assert all(f == ONE for f in bt.entries.values())


def test_base_rejects_open_node():
    g = build(load_pair_spec("sl2_t"), max_delta=1)
    v = next(k for k in g.order if g.delta(k) == 1)
    with pytest.raises(DualityError):
        d_base_closed(g, (0,), v)


def test_dependency_missing():
    g = build(load_pair_spec("sl2_group"), max_delta=1)
    v = next(k for k in g.order if g.delta(k) == 1)
    s = g.b_roots(v)[0]
    with pytest.raises(DependencyMissing):
        d_step_IIb(g, DualityOperator(g), (), v, s)


def test_sl2t_rank_one_block():
    # hand solution of D((T+1)m_u) = q^-1 (T+1) D(m_u) on the closed pair
    g, D, _, _ = pipeline("sl2_t", 1)
    closed = [k for k in g.order if g.delta(k) == 0]
    for v in (k for k in g.order if g.delta(k) == 1):
        assert D.method[v] == "block"
        a = g.nodes[v].edges[g.b_roots(v)[0]].transport["a"]
        for xi, nonzero in a.items():
            want = {(v, xi): Q_INV}
            if not nonzero:
                want.update({(u, ()): Q_INV - ONE for u in closed})
            assert D.of_basis(v, xi).terms == want


def test_block_solve_matches_sweep():
    g, D, _, _ = pipeline("gl2_o2", 4)
    for v in g.order:
        if D.method[v] == "block":
            assert d_block_solve(g, D, v) == {xi: D.of_basis(v, xi) for xi in g.characters(v)}


def test_block_solve_preconditions():
    g, D, _, _ = pipeline("sl2_group", 3)
    for v in g.order:
        with pytest.raises(DualityError):
            d_block_solve(g, D, v)


def test_every_IIb_root_gives_the_same_dual():
    for name in ("sl3_group", "sl2_t", "gl2_o2"):
        g, D, _, _ = pipeline(name, DEPTH[name])
        for v in g.order:
            roots = [s for s in g.roots if g.nodes[v].edges[s].type == "IIb"]
            for s in roots[1:]:
                for xi in g.characters(v):
                    assert d_step_IIb(g, D, xi, v, s) == D.of_basis(v, xi)


def test_solver_diagnostics():
    g = build(load_pair_spec("sl2_t"), max_delta=1)
    v = g.order[-1]
    with pytest.raises(Underdetermined):
        _solve([], 1, g, v)
    one = K.from_sympy(sympy.Integer(1))
    with pytest.raises(Underdetermined):
        _solve([({0: one, 1: one}, one)], 2, g, v)
    with pytest.raises(DualityError):
        _solve([({0: one}, one), ({0: one}, K.zero)], 1, g, v)
    assert _solve([({0: one}, K.from_sympy(S**2 - 1))], 1, g, v) == [HalfLaurent({2: 1, 0: -1})]


@pytest.mark.parametrize("x", [S / 2, 1 / (1 + S), S**3 / (3 * S)])
def test_non_integral_solution_rejected(x):
    with pytest.raises(NoIntegralSolution):
        _from_field(K.from_sympy(x))


@pytest.mark.parametrize("name", PRESETS)
def test_involution(name):
    g, D, _, _ = pipeline(name, DEPTH[name])
    for v, xi in g.basis():
        assert involution_residual(D, v, xi).is_zero()


@pytest.mark.parametrize("name", PRESETS)
def test_hecke_compatibility(name):
    g, D, _, _ = pipeline(name, DEPTH[name])
    checked = 0
    for v, xi in g.basis():
        for s in g.roots:
            r = hecke_residual(D, s, v, xi)
            if r is not None:
                checked += 1
                assert r.is_zero()
    assert checked > len(g.order)


@pytest.mark.parametrize("name", PRESETS)
def test_btable_invariants(name):
    g, _, bt, _ = pipeline(name, DEPTH[name])
    assert check_btable(bt) == []
    for v, xi in g.basis():
        assert bt.get(xi, v, xi, v) == HalfLaurent.q_pow(-2 * g.delta(v))


def test_btable_checker_flags_bad_entries():
    g, _, bt, _ = pipeline("sl2_group", 3)
    v = g.order[-1]
    u = g.order[0]
    bad = type(bt)(g, dict(bt.entries))
    bad.entries[((), u, (), v)] = HalfLaurent.q_pow(-2 * g.delta(v) - 1)
    assert check_btable(bad)
    bad.entries[((), u, (), v)] = HalfLaurent.q_pow(2 * g.delta(v) + 2, 1).shift(-2 * g.delta(v))
    assert check_btable(bad)


@pytest.mark.parametrize("name,depth", [("sl2_group", 6), ("sl3_group", 4)])
def test_group_case_b_is_R_polynomial(name, depth):
    g, _, bt, _ = pipeline(name, depth)
    orc, elt = oracle_for(g)
    assert compare_b(g, bt, orc, elt) == []


def test_deterministic_under_threads():
    g = build(load_pair_spec("gl2_o2"), max_delta=5)
    a = dump_b_json(compute_b(g, compute_duality(g, threads=1)))
    b = dump_b_json(compute_b(g, compute_duality(g, threads=4)))
    assert a == b
    assert json.loads(a)[0]["qdelta_b"] == [[0, 1]]


laurent = st.dictionaries(st.integers(-6, 6), st.integers(-3, 3), max_size=3).map(
    lambda d: HalfLaurent({2 * k: c for k, c in d.items() if c})
)


@given(st.data())
def test_antilinear(data):
    name = data.draw(st.sampled_from(["sl2_t", "gl2_o2", "sl2_group"]))
    g, D, _, _ = pipeline(name, DEPTH[name])
    basis = g.basis()
    terms = data.draw(st.dictionaries(st.sampled_from(basis), laurent, max_size=4))
    f = data.draw(laurent)
    m = ModuleElt(terms)
    assert D.apply(m.scale(f)) == D.apply(m).scale(f.bar())
    n = ModuleElt.basis(*data.draw(st.sampled_from(basis)))
    assert D.apply(m + n) == D.apply(m) + D.apply(n)
