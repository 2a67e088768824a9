"""The anti-linear duality D on M and its coefficient table b.

D(m_{xi,v}) = q^{-delta(v)} m_{xi,v} + sum_{u < v} b_{eta,u;xi,v} m_{eta,u}; characters are
2-torsion so the leading character -xi equals xi. Closed orbits are fixed, a IIb
root gives a one-step recursion, and otherwise a linear system built from the
type-b roots at v is solved exactly.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import sympy
from sympy.polys.matrices import DomainMatrix

from .coeff_ring import ONE, Q, Q_INV, ZERO, HalfLaurent
from .hecke_module import ModuleElt, t_basis, t_simple
from .orbit_graph import B_TYPES, OrbitGraph, OrbitKey, TruncationError

S = sympy.Symbol("s")  # s = q^(1/2)
K = sympy.QQ.frac_field(S)


class DualityError(RuntimeError):
    pass


class DependencyMissing(DualityError):
    pass


class Underdetermined(DualityError):
    pass


class NoIntegralSolution(DualityError):
    pass


def neg(xi: tuple) -> tuple:
    """-xi; every character has order dividing 2."""
    return tuple(xi)


T_INV_CONST = Q_INV - ONE  # q^-1 - 1


class DualityOperator:
    def __init__(self, graph: OrbitGraph):
        self.graph = graph
        self.images: dict[tuple, ModuleElt] = {}
        self.method: dict[OrbitKey, str] = {}

    def known(self, v, xi) -> bool:
        return (v, tuple(xi)) in self.images

    def of_basis(self, v, xi) -> ModuleElt:
        try:
            return self.images[(v, tuple(xi))]
        except KeyError:
            raise DependencyMissing(f"dual of a basis element at delta {self.graph.delta(v)} is not known") from None

    def apply(self, m: ModuleElt) -> ModuleElt:
        acc: dict = {}
        for (v, xi), f in m.terms.items():
            fb = f.bar()
            for k, g in self.of_basis(v, xi).terms.items():
                acc[k] = acc.get(k, ZERO) + fb * g
        return ModuleElt(acc)

    def t_inverse(self, s: int, m: ModuleElt) -> ModuleElt:
        """(q^-1 T_s + q^-1 - 1) m."""
        return t_simple(self.graph, s, m).scale(Q_INV) + m.scale(T_INV_CONST)


def d_base_closed(graph: OrbitGraph, xi, v) -> ModuleElt:
    if not graph.is_closed(v):
        raise DualityError("not closed")
    return ModuleElt.basis(v, neg(xi))


def d_step_IIb(graph: OrbitGraph, D: DualityOperator, xi, v, s: int) -> ModuleElt:
    e = graph.nodes[v].edges[s]
    if e.type != "IIb":
        raise DualityError("root is not of type IIb")
    low = e.neighbors[0]
    up_table = graph.nodes[low].edges[s].transport["cross"]
    src = [eta for eta, img in up_table.items() if img == tuple(xi)]
    if len(src) != 1:
        raise DualityError("IIa transport is not a bijection")
    return D.t_inverse(s, D.of_basis(low, src[0]))


# block solve


def _to_field(f: HalfLaurent):
    return K.from_sympy(sum(c * S**e for e, c in f.items()) if f else sympy.Integer(0))


def _from_field(x) -> HalfLaurent:
    num, den = K.to_sympy(x).as_numer_denom()
    num = sympy.Poly(sympy.expand(num), S)
    den = sympy.Poly(sympy.expand(den), S)
    if len(den.terms()) != 1:
        raise NoIntegralSolution(f"denominator {den.as_expr()} is not a monomial")
    (dexp,), dc = den.terms()[0]
    out = {}
    for (e,), c in num.terms():
        c = sympy.Rational(c, dc)
        if c.q != 1:
            raise NoIntegralSolution(f"non-integral coefficient {c}")
        out[e - dexp] = int(c)
    return HalfLaurent(out)


def _saturation(graph: OrbitGraph, v, J) -> list:
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for s in J:
            e = graph.nodes[u].edges[s]
            if e.type in B_TYPES:
                for w in e.neighbors:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
    return sorted(seen, key=lambda k: (graph.delta(k), k))


def d_block_solve(graph: OrbitGraph, D: DualityOperator, v) -> dict:
    node = graph.nodes[v]
    J = [s for s in graph.roots if node.edges[s].type in ("IIIb", "IVb")]
    if not J:
        raise DualityError("block solve needs a IIIb or IVb root")
    if any(node.edges[s].type == "IIb" for s in graph.roots):
        raise DualityError("block solve called on a node with a IIb root")
    delta = node.delta
    chars = graph.characters(v)
    support = _saturation(graph, v, J)
    # unknowns: coefficient of m_{eta,u} in D(m_{xi,v}), u != v
    unknowns = []
    for xi in chars:
        for u in support:
            if u == v:
                continue
            for eta in graph.characters(u):
                unknowns.append((xi, u, eta))
    uidx = {k: i for i, k in enumerate(unknowns)}
    nunk = len(unknowns)
    rows: list[tuple[dict, object]] = []  # (coeffs over unknowns, rhs) meaning sum = rhs

    def d_generic(xi):
        """D(m_{xi,v}) as (known part, linear part): linear part maps (u,eta)->unknown index."""
        known = ModuleElt({(v, neg(xi)): HalfLaurent.q_pow(-2 * delta)})
        lin = {}
        for u in support:
            if u == v:
                continue
            for eta in graph.characters(u):
                lin[(u, eta)] = uidx[(xi, u, eta)]
        return known, lin

    # cleanness: a nonzero a-value kills the coefficients on that root's lower neighbours
    for s in J:
        e = node.edges[s]
        for xi in chars:
            if e.transport["a"][xi]:
                for u in e.neighbors:
                    for eta in graph.characters(u):
                        rows.append(({uidx[(xi, u, eta)]: K.one}, K.zero))

    for s in J:
        for xi in chars:
            # left side: D(T_s m_{xi,v})
            lhs_known: dict = {}
            lhs_lin: dict = {}
            for (u, eta), f in t_basis(graph, s, v, xi).items():
                fb = f.bar()
                if u == v:
                    kn, lin = d_generic(eta)
                    for k, g in kn.terms.items():
                        lhs_known[k] = lhs_known.get(k, ZERO) + fb * g
                    for k, ui in lin.items():
                        lhs_lin.setdefault(k, {})
                        lhs_lin[k][ui] = lhs_lin[k].get(ui, ZERO) + fb
                else:
                    for k, g in D.of_basis(u, eta).terms.items():
                        lhs_known[k] = lhs_known.get(k, ZERO) + fb * g
            # right side: (q^-1 T_s + q^-1 - 1) D(m_{xi,v})
            rhs_known: dict = {}
            rhs_lin: dict = {}
            kn, lin = d_generic(xi)
            for k, g in D.t_inverse(s, kn).terms.items():
                rhs_known[k] = rhs_known.get(k, ZERO) + g
            for (u, eta), ui in lin.items():
                img = D.t_inverse(s, ModuleElt.basis(u, eta))
                for k, g in img.terms.items():
                    rhs_lin.setdefault(k, {})
                    rhs_lin[k][ui] = rhs_lin[k].get(ui, ZERO) + g
            keys = set(lhs_known) | set(lhs_lin) | set(rhs_known) | set(rhs_lin)
            for k in sorted(keys):
                coeffs: dict = {}
                for ui, g in lhs_lin.get(k, {}).items():
                    coeffs[ui] = coeffs.get(ui, ZERO) + g
                for ui, g in rhs_lin.get(k, {}).items():
                    coeffs[ui] = coeffs.get(ui, ZERO) - g
                rhs = rhs_known.get(k, ZERO) - lhs_known.get(k, ZERO)
                coeffs = {i: c for i, c in coeffs.items() if c}
                if not coeffs and not rhs:
                    continue
                rows.append(({i: _to_field(c) for i, c in coeffs.items()}, _to_field(rhs)))

    sol = _solve(rows, nunk, graph, v)
    out = {}
    for xi in chars:
        terms = {(v, neg(xi)): HalfLaurent.q_pow(-2 * delta)}
        for u in support:
            if u == v:
                continue
            for eta in graph.characters(u):
                c = sol[uidx[(xi, u, eta)]]
                if c:
                    terms[(u, eta)] = c
        out[xi] = ModuleElt(terms)
    return out


def _solve(rows, nunk, graph, v) -> list[HalfLaurent]:
    if nunk == 0:
        for coeffs, rhs in rows:
            if rhs != K.zero:
                raise DualityError("inconsistent block system")
        return []
    mat = [[K.zero] * (nunk + 1) for _ in rows]
    for r, (coeffs, rhs) in enumerate(rows):
        for i, c in coeffs.items():
            mat[r][i] = c
        mat[r][nunk] = rhs
    if not rows:
        raise Underdetermined(f"underdetermined block at delta {graph.delta(v)}: no equations")
    dm = DomainMatrix(mat, (len(rows), nunk + 1), K)
    rref, pivots = dm.rref()
    if nunk in pivots:
        raise DualityError(f"inconsistent block system at delta {graph.delta(v)}")
    if len(pivots) != nunk:
        raise Underdetermined(
            f"underdetermined block at delta {graph.delta(v)}: {nunk - len(pivots)} free parameters"
        )
    out = []
    for r, p in enumerate(pivots):
        out.append(_from_field(rref[r, nunk].element))
    return out


@dataclass
class BTable:
    graph: OrbitGraph
    entries: dict = field(default_factory=dict)  # (eta, u, xi, v) -> HalfLaurent

    def get(self, eta, u, xi, v) -> HalfLaurent:
        return self.entries.get((tuple(eta), u, tuple(xi), v), ZERO)

    def column(self, xi, v) -> dict:
        return {(eta, u): f for (eta, u, x, w), f in self.entries.items() if w == v and x == tuple(xi)}

    def rows(self) -> list[dict]:
        g = self.graph
        idx = g.index()
        out = []
        for (eta, u, xi, v), f in self.entries.items():
            scaled = f.shift(2 * g.delta(v))
            out.append(
                {
                    "u": idx[u],
                    "eta": "".join(map(str, eta)),
                    "v": idx[v],
                    "xi": "".join(map(str, xi)),
                    "qdelta_b": scaled.pairs(),
                }
            )
        out.sort(key=lambda r: (g.delta(g.order[r["v"]]), r["v"], g.delta(g.order[r["u"]]), r["u"], r["xi"], r["eta"]))
        return out


def _compute_node(graph: OrbitGraph, D: DualityOperator, v) -> tuple[str, dict]:
    if graph.is_closed(v):
        return "closed", {xi: d_base_closed(graph, xi, v) for xi in graph.characters(v)}
    iib = [s for s in graph.roots if graph.nodes[v].edges[s].type == "IIb"]
    if iib:
        s = iib[0]
        return f"IIb:{graph.labels[s]}", {xi: d_step_IIb(graph, D, xi, v, s) for xi in graph.characters(v)}
    return "block", d_block_solve(graph, D, v)


def compute_duality(graph: OrbitGraph, threads: int = 1) -> DualityOperator:
    D = DualityOperator(graph)
    levels: dict[int, list] = {}
    for k in graph.order:
        levels.setdefault(graph.delta(k), []).append(k)
    for d in sorted(levels):
        keys = levels[d]
        if threads > 1:
            with ThreadPoolExecutor(threads) as ex:
                results = list(ex.map(lambda k: _compute_node(graph, D, k), keys))
        else:
            results = [_compute_node(graph, D, k) for k in keys]
        for k, (how, imgs) in zip(keys, results):
            D.method[k] = how
            for xi, m in imgs.items():
                D.images[(k, xi)] = m
    return D


def compute_b(graph: OrbitGraph, D: DualityOperator | None = None, threads: int = 1) -> BTable:
    if D is None:
        D = compute_duality(graph, threads)
    bt = BTable(graph)
    for (v, xi), m in sorted(D.images.items()):
        for (u, eta), f in m.terms.items():
            bt.entries[(eta, u, xi, v)] = f
    problems = check_btable(bt)
    if problems:
        raise NoIntegralSolution("; ".join(problems[:5]))
    return bt


def check_btable(bt: BTable) -> list[str]:
    g = bt.graph
    out = []
    for (eta, u, xi, v), f in bt.entries.items():
        dv, du = g.delta(v), g.delta(u)
        if u == v:
            if eta == neg(xi) and f != HalfLaurent.q_pow(-2 * dv):
                out.append(f"diagonal entry at delta {dv} is {f}")
            if eta != neg(xi) and f:
                out.append("off-character diagonal entry is nonzero")
            continue
        if u not in g.down[v]:
            out.append(f"support outside the closure order (delta {du} below {dv})")
        scaled = f.shift(2 * dv)
        if not scaled.is_q_polynomial():
            out.append(f"q^delta b = {scaled} is not a polynomial in q")
        elif scaled and scaled.max_exp() > 2 * (dv - du):
            out.append(f"q^delta b = {scaled} exceeds degree {dv - du}")
    return out


def involution_residual(D: DualityOperator, v, xi) -> ModuleElt:
    m = ModuleElt.basis(v, xi)
    return D.apply(D.apply(m)) - m


def hecke_residual(D: DualityOperator, s: int, v, xi) -> ModuleElt | None:
    """D((T_s+1)m) - q^-1 (T_s+1) D(m), or None when out of bounds."""
    g = D.graph
    m = ModuleElt.basis(v, xi)
    try:
        left_in = t_simple(g, s, m) + m
        left = D.apply(left_in)
        dm = D.apply(m)
        right = (t_simple(g, s, dm) + dm).scale(Q_INV)
    except (TruncationError, DependencyMissing):
        return None
    return left - right


def dump_b_json(bt: BTable) -> str:
    return json.dumps(bt.rows(), sort_keys=True, indent=1)
