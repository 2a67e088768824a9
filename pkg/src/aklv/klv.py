"""Affine Kazhdan-Lusztig-Vogan polynomials P, the basis C and the coefficients c.

For u < v the column recurrence is

    P_{eta,u;xi,v} - q^(d) bar P_{eta,u;xi,v}
        = q^delta(v) * ( b_{eta,u;xi,v} + sum_{u<z<v} b_{eta,u;zeta,z} bar P_{zeta,z;xi,v} )

with d = delta(v) - delta(u); the z = v term comes from the diagonal P_{xi,v;xi,v} = 1.
Characters are 2-torsion, so -xi = xi throughout.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .coeff_ring import ONE, ZERO, HalfLaurent, WindowViolation, kl_extract
from .duality import BTable, DualityOperator, neg
from .hecke_module import ModuleElt
from .orbit_graph import OrbitGraph


class KLVError(RuntimeError):
    pass


@dataclass
class PTable:
    graph: OrbitGraph
    entries: dict = field(default_factory=dict)  # (eta, u, xi, v) -> HalfLaurent

    def get(self, eta, u, xi, v) -> HalfLaurent:
        return self.entries.get((tuple(eta), u, tuple(xi), v), ZERO)

    def rows(self) -> list[dict]:
        g = self.graph
        idx = g.index()
        out = [
            {"u": idx[u], "eta": "".join(map(str, eta)), "v": idx[v], "xi": "".join(map(str, xi)), "P": f.pairs()}
            for (eta, u, xi, v), f in self.entries.items()
        ]
        out.sort(key=lambda r: (g.delta(g.order[r["v"]]), r["v"], g.delta(g.order[r["u"]]), r["u"], r["xi"], r["eta"]))
        return out


@dataclass
class CTable:
    graph: OrbitGraph
    entries: dict = field(default_factory=dict)  # (eta, u, xi, v, i) -> HalfLaurent

    def rows(self) -> list[dict]:
        g = self.graph
        idx = g.index()
        out = [
            {
                "u": idx[u],
                "eta": "".join(map(str, eta)),
                "v": idx[v],
                "xi": "".join(map(str, xi)),
                "i": i,
                "c": f.pairs(),
            }
            for (eta, u, xi, v, i), f in self.entries.items()
        ]
        out.sort(
            key=lambda r: (g.delta(g.order[r["v"]]), r["v"], g.delta(g.order[r["u"]]), r["u"], r["xi"], r["eta"], r["i"])
        )
        return out


def _b_rows(b: BTable) -> dict:
    rows: dict = {}
    for (eta, u, zeta, z), f in b.entries.items():
        if u != z:
            rows.setdefault((u, eta), {})[(z, zeta)] = f
    return rows


def _solve_column(graph: OrbitGraph, brows: dict, xi, v) -> dict:
    dv = graph.delta(v)
    col = {(v, tuple(xi)): ONE}
    lows = sorted((u for u in graph.down[v] if u != v), key=lambda u: (-graph.delta(u), u))
    for u in lows:
        d = dv - graph.delta(u)
        for eta in graph.characters(u):
            acc = ZERO
            for (z, zeta), f in brows.get((u, eta), {}).items():
                p = col.get((z, zeta))
                if p:
                    acc = acc + f * p.bar()
            g = acc.shift(2 * dv)
            try:
                p = kl_extract(g, d)
            except WindowViolation as exc:
                raise KLVError(f"window violation at delta {graph.delta(u)} below {dv}: {exc}") from None
            if p:
                if not p.is_q_polynomial():
                    raise KLVError(f"non-polynomial P {p}")
                col[(u, eta)] = p
    return col


def solve_P(graph: OrbitGraph, b: BTable, threads: int = 1) -> PTable:
    brows = _b_rows(b)
    cols = [(v, xi) for v in graph.order for xi in graph.characters(v)]

    def work(c):
        return _solve_column(graph, brows, c[1], c[0])

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(work, cols))
    else:
        results = [work(c) for c in cols]
    pt = PTable(graph)
    for (v, xi), col in zip(cols, results):
        for (u, eta), p in col.items():
            pt.entries[(eta, u, tuple(xi), v)] = p
    return pt


def kl_basis_elt(graph: OrbitGraph, P: PTable, xi, v) -> ModuleElt:
    xi = tuple(xi)
    return ModuleElt({(u, eta): p for (eta, u, x, w), p in P.entries.items() if w == v and x == xi})


def verify_selfdual(graph: OrbitGraph, D: DualityOperator, C: ModuleElt, xi, v) -> ModuleElt:
    """D(C_{xi,v}) - q^-delta(v) C_{-xi,v}; zero for the KL basis."""
    return D.apply(C) - C.scale(HalfLaurent.q_pow(-2 * graph.delta(v)))


def c_from_P(graph: OrbitGraph, P: PTable) -> CTable:
    ct = CTable(graph)
    for (eta, u, xi, v), p in P.entries.items():
        if u == v:
            continue
        dv = graph.delta(v)
        for e, a in p.items():
            if e % 2 or a < 0:
                raise KLVError(f"parity violation in P = {p}")
            j = e // 2
            ct.entries[(eta, u, xi, v, 2 * j - dv)] = HalfLaurent.q_pow(e, a)
    return ct


def check_P(graph: OrbitGraph, P: PTable) -> list[str]:
    """Diagonal, degree window, support, positivity and parity."""
    out = []
    for v in graph.order:
        for xi in graph.characters(v):
            if P.get(xi, v, xi, v) != ONE:
                out.append(f"diagonal entry at delta {graph.delta(v)} is not 1")
    for (eta, u, xi, v), p in P.entries.items():
        if u == v:
            if eta != xi:
                out.append("off-character diagonal entry")
            continue
        d = graph.delta(v) - graph.delta(u)
        if u not in graph.down[v]:
            out.append("P support outside the closure order")
        if p.max_exp() > d - 1:
            out.append(f"degree window violated: {p} with codim {d}")
        if any(e % 2 for e, _ in p.items()):
            out.append(f"half-integral power in {p}")
        if any(a < 0 for _, a in p.items()):
            out.append(f"negative coefficient in {p}")
    return out


def check_c(C: CTable) -> list[str]:
    g = C.graph
    out = []
    for (eta, u, xi, v, i), f in C.entries.items():
        if (i + g.delta(v)) % 2:
            out.append(f"odd slot {i} is nonzero")
        if f and (f.min_exp() != f.max_exp() or f.min_exp() != i + g.delta(v)):
            out.append(f"slot {i} is not a multiple of q^((i+delta)/2)")
    return out


def c_to_P(graph: OrbitGraph, C: CTable) -> dict:
    """Sum of the c slots; inverts c_from_P off the diagonal."""
    out: dict = {}
    for (eta, u, xi, v, i), f in C.entries.items():
        k = (eta, u, xi, v)
        out[k] = out.get(k, ZERO) + f
    return out


def bc_residuals(graph: OrbitGraph, b: BTable, C: CTable) -> list:
    """Residuals of the b-c relation; each entry is (key, residual) with nonzero residual."""
    alt: dict = {}
    for (eta, u, xi, v, i), f in C.entries.items():
        k = (eta, u, xi, v)
        alt[k] = alt.get(k, ZERO) + (f if i % 2 == 0 else -f)
    brows = _b_rows(b)
    bad = []
    for v in graph.order:
        dv = graph.delta(v)
        qv = HalfLaurent.q_pow(2 * dv)
        for xi in graph.characters(v):
            for u in graph.down[v]:
                if u == v:
                    continue
                d = dv - graph.delta(u)
                for eta in graph.characters(u):
                    lhs = alt.get((eta, u, neg(xi), v), ZERO) - alt.get((neg(eta), u, xi, v), ZERO).bar().shift(2 * d)
                    sign = -1 if dv % 2 else 1
                    rhs = b.get(eta, u, xi, v) * qv * sign
                    for (z, zeta), f in brows.get((u, eta), {}).items():
                        if z == v:
                            continue
                        a = alt.get((zeta, z, xi, v))
                        if a:
                            rhs = rhs + qv * f * a.bar()
                    if lhs != rhs:
                        bad.append(((eta, u, xi, v), lhs - rhs))
    return bad


def dump_P_json(P: PTable) -> str:
    return json.dumps(P.rows(), sort_keys=True, indent=1)
