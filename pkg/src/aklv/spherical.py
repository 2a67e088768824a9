"""Spherical level: L+G-orbits on LX, relative Kostka-Foulkes polynomials and B coefficients.

Iwahori orbits are grouped into L+G-orbits by the moves along finite simple roots. A class is
labelled by the dominant representative of the translation part of its twisted involutions, and
its open Iwahori orbit is the unique node of maximal delta. Dominance and the codimension
formula use the split form theta' = w0 theta, for which Lambda_S is the (-1)-eigenlattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _lattice as L
from .coeff_ring import ONE, ZERO, HalfLaurent
from .duality import BTable, neg
from .hecke_module import ModuleElt, t_simple
from .klv import PTable, kl_basis_elt
from .orbit_graph import B_TYPES, OrbitGraph, OrbitKey
from .root_datum import (
    BasedRootDatum,
    InvolutionDatum,
    LambdaS,
    dominance_leq,
    in_lambda_s,
    lambda_s_basis,
    rho_pair,
)


class SphericalError(RuntimeError):
    pass


def split_theta(datum: BasedRootDatum, inv: InvolutionDatum) -> L.Mat:
    return L.mat_mul(datum.w0, inv.theta_on_cochar)


def split_lambda_s(datum: BasedRootDatum, inv: InvolutionDatum) -> LambdaS:
    return lambda_s_basis(datum, inv, split_theta(datum, inv))


def is_dominant(datum: BasedRootDatum, y) -> bool:
    return all(L.dot(a, y) >= 0 for a in datum.simple_roots)


def dominant_rep(datum: BasedRootDatum, y) -> tuple[int, ...]:
    y = tuple(y)
    while True:
        for i, a in enumerate(datum.simple_roots):
            if L.dot(a, y) < 0:
                y = datum.reflect_y(i, y)
                break
        else:
            return y


@dataclass
class SphericalOrbit:
    lam: tuple[int, ...]
    delta: int
    open_orbit: OrbitKey
    nodes: tuple = ()
    characters: tuple = ()  # spherical characters at the open orbit

    def to_json(self) -> dict:
        return {"lam": list(self.lam), "delta": self.delta, "characters": ["".join(map(str, c)) for c in self.characters]}


@dataclass
class SphericalOrbits:
    graph: OrbitGraph
    orbits: list[SphericalOrbit]
    by_node: dict = field(default_factory=dict)

    def by_lam(self, lam) -> SphericalOrbit:
        for o in self.orbits:
            if o.lam == tuple(lam):
                return o
        raise KeyError(tuple(lam))


def _classes(graph: OrbitGraph):
    finite = [s for s in graph.roots if s < graph.spec.datum.ss_rank]
    seen: dict = {}
    out = []
    for k in graph.order:
        if k in seen:
            continue
        comp, stack, complete = [], [k], True
        seen[k] = len(out)
        while stack:
            u = stack.pop()
            comp.append(u)
            for s in finite:
                for w in graph.nodes[u].edges[s].neighbors:
                    if w is None:
                        complete = False
                    elif w not in seen:
                        seen[w] = len(out)
                        stack.append(w)
        out.append((sorted(comp, key=lambda u: (graph.delta(u), u)), complete))
    return out


def spherical_characters(graph: OrbitGraph, P: PTable | None, v: OrbitKey) -> tuple:
    """Characters xi at the open orbit v with T_s C_{xi,v} = q C_{xi,v} for every finite s."""
    finite = [s for s in graph.roots if s < graph.spec.datum.ss_rank]
    out = []
    for xi in graph.characters(v):
        if P is None:
            out.append(xi)
            continue
        c = kl_basis_elt(graph, P, xi, v)
        if all((t_simple(graph, s, c) - c.scale(HalfLaurent.q_pow(2))).is_zero() for s in finite):
            out.append(xi)
    return tuple(out)


def enumerate_dominant(graph: OrbitGraph, bound: int, P: PTable | None = None) -> SphericalOrbits:
    d = graph.spec.datum
    th = split_theta(d, graph.spec.inv)
    if bound > graph.max_delta:
        raise SphericalError(f"orbit graph too shallow: bound {bound} exceeds max_delta {graph.max_delta}")
    orbits = []
    by_node = {}
    for comp, complete in _classes(graph):
        labels = {dominant_rep(d, graph.nodes[u].key.tw_inv.translation) for u in comp}
        if len(labels) != 1:
            raise SphericalError(f"Iwahori orbits of one L+G-orbit carry labels {sorted(labels)}")
        (lam,) = labels
        if not in_lambda_s(graph.spec.inv, lam, th):
            raise SphericalError(f"label {lam} is not in Lambda_S")
        top = max(graph.delta(u) for u in comp)
        opens = [u for u in comp if graph.delta(u) == top]
        if not complete or top > bound:
            continue
        if len(opens) != 1:
            raise SphericalError(f"L+G-orbit {lam} has {len(opens)} open Iwahori orbits")
        o = SphericalOrbit(lam, top, opens[0], tuple(comp), spherical_characters(graph, P, opens[0]))
        orbits.append(o)
        for u in comp:
            by_node[u] = o
    orbits.sort(key=lambda o: (o.delta, o.lam))
    if len({o.lam for o in orbits}) != len(orbits):
        raise SphericalError("two L+G-orbits share a label")
    return SphericalOrbits(graph, orbits, by_node)


def spherical_closure_leq(datum: BasedRootDatum, inv: InvolutionDatum, mu, lam) -> bool:
    return dominance_leq(datum, inv, mu, lam, split_theta(datum, inv))


# restriction of characters along finite descents


def _restrictions(graph: OrbitGraph, o: SphericalOrbit, chi) -> dict:
    """Restriction of the L+G-equivariant local system chi on o to each Iwahori orbit in o."""
    finite = [s for s in graph.roots if s < graph.spec.datum.ss_rank]
    res = {o.open_orbit: {tuple(chi)}}
    for v in sorted(o.nodes, key=lambda u: (-graph.delta(u), u)):
        for xi in list(res.get(v, ())):
            for s in finite:
                e = graph.nodes[v].edges[s]
                if e.type not in B_TYPES:
                    continue
                tr = e.transport
                if e.type == "IIb":
                    res.setdefault(e.neighbors[0], set()).add(tr["cross"][xi])
                elif e.type == "IIIb":
                    if tr["a"][xi]:
                        continue
                    res.setdefault(e.neighbors[0], set()).add(tr["down1"][xi])
                    res.setdefault(e.neighbors[1], set()).add(tr["down2"][xi])
                elif e.type == "IVb":
                    if tr["a"][xi] or tr["down"][xi] is None:
                        continue
                    res.setdefault(e.neighbors[0], set()).add(tr["down"][xi])
    return res


@dataclass
class RelKFTable:
    sph: SphericalOrbits
    entries: dict = field(default_factory=dict)  # (chi', mu, chi, lam) -> HalfLaurent

    def get(self, chi1, mu, chi, lam) -> HalfLaurent:
        return self.entries.get((tuple(chi1), tuple(mu), tuple(chi), tuple(lam)), ZERO)

    def kostka_foulkes(self, chi1, mu, chi, lam) -> HalfLaurent:
        """q^((delta(lam)-delta(mu))/2) bar P: the normalization of the Kostka-Foulkes polynomial."""
        o_l, o_m = self.sph.by_lam(lam), self.sph.by_lam(mu)
        return self.get(chi1, mu, chi, lam).bar().shift(o_l.delta - o_m.delta)

    def rows(self) -> list[dict]:
        out = [
            {
                "mu": list(mu),
                "chi_mu": "".join(map(str, c1)),
                "lam": list(lam),
                "chi_lam": "".join(map(str, c)),
                "P": f.pairs(),
            }
            for (c1, mu, c, lam), f in self.entries.items()
        ]
        d = {o.lam: o.delta for o in self.sph.orbits}
        out.sort(key=lambda r: (d[tuple(r["lam"])], r["lam"], d[tuple(r["mu"])], r["mu"], r["chi_lam"], r["chi_mu"]))
        return out


def rel_kf(graph: OrbitGraph, P: PTable, sph: SphericalOrbits) -> RelKFTable:
    tab = RelKFTable(sph)
    for ol in sph.orbits:
        for chi in ol.characters:
            for om in sph.orbits:
                if not spherical_closure_leq(graph.spec.datum, graph.spec.inv, om.lam, ol.lam) and om is not ol:
                    if any(P.get(x, om.open_orbit, chi, ol.open_orbit) for x in graph.characters(om.open_orbit)):
                        raise SphericalError("P is nonzero outside the dominance order")
                    continue
                vals = {c1: P.get(c1, om.open_orbit, chi, ol.open_orbit) for c1 in om.characters}
                for x in graph.characters(om.open_orbit):
                    if x not in vals and P.get(x, om.open_orbit, chi, ol.open_orbit):
                        raise SphericalError("IC stalk carries a non-spherical character")
                _check_independence(graph, P, om, ol.open_orbit, chi, vals)
                for c1, f in vals.items():
                    if f or om is ol:
                        tab.entries[(c1, om.lam, chi, ol.lam)] = f
    return tab


def _check_independence(graph, P, om: SphericalOrbit, v, chi, vals):
    expected: dict = {}
    for c1, f in vals.items():
        for u, etas in _restrictions(graph, om, c1).items():
            for eta in etas:
                expected[(u, eta)] = expected.get((u, eta), ZERO) + f
    for (u, eta), f in expected.items():
        if u == om.open_orbit:
            continue
        got = P.get(eta, u, chi, v)
        if got != f:
            raise SphericalError(f"restriction mismatch at delta {graph.delta(u)}: {got} != {f}")


def codim_check(datum: BasedRootDatum, sph: SphericalOrbits, lam, mu) -> tuple[bool, object, object]:
    """Compare delta(mu) - delta(lam) with <rho, mu - lam>; returns (ok, lhs, rhs)."""
    lhs = sph.by_lam(mu).delta - sph.by_lam(lam).delta
    rhs = rho_pair(datum, L.vsub(mu, lam))
    return lhs == rhs, lhs, rhs


def lx_connected(datum: BasedRootDatum, inv: InvolutionDatum) -> bool:
    return split_lambda_s(datum, inv).connected


def b_spherical(b: BTable, sph: SphericalOrbits) -> dict:
    """B_{chi',mu;chi,lam}: the sum of b_{chi',v_mu;xi,v} over the restrictions (xi,v) of chi.

    The value read at the open orbit v_mu is checked against every other Iwahori orbit u of mu,
    where the sum over chi' restricting to eta must match the summed b at (eta,u).
    """
    g = b.graph
    out = {}
    for ol in sph.orbits:
        for chi in ol.characters:
            res_l = [(v, xi) for v, xis in _restrictions(g, ol, chi).items() for xi in xis]
            for om in sph.orbits:
                vals = {}
                for c1 in om.characters:
                    acc = ZERO
                    for v, xi in res_l:
                        acc = acc + b.get(c1, om.open_orbit, xi, v)
                    vals[c1] = acc
                expected: dict = {}
                for c1, f in vals.items():
                    for u, etas in _restrictions(g, om, c1).items():
                        for eta in etas:
                            expected[(u, eta)] = expected.get((u, eta), ZERO) + f
                for (u, eta), f in expected.items():
                    got = ZERO
                    for v, xi in res_l:
                        got = got + b.get(eta, u, xi, v)
                    if got != f:
                        raise SphericalError(f"B depends on the Iwahori representative at delta {g.delta(u)}")
                for c1, f in vals.items():
                    if f or om is ol:
                        out[(c1, om.lam, chi, ol.lam)] = f
    return out


def spherical_recurrence_residuals(B: dict, R: RelKFTable) -> list:
    """Residuals of the L+G-level recurrence; the gamma = lam term carries P_{chi,lam;chi,lam} = 1."""
    sph = R.sph
    bad = []
    for (c1, mu, chi, lam), p in list(R.entries.items()):
        if mu == lam:
            continue
        dl, dm = sph.by_lam(lam).delta, sph.by_lam(mu).delta
        lhs = R.get(c1, mu, neg(chi), lam) - R.get(neg(c1), mu, chi, lam).bar().shift(2 * (dl - dm))
        acc = ZERO
        for og in sph.orbits:
            if og.lam == mu:
                continue
            for c2 in og.characters:
                f = B.get((c1, mu, c2, og.lam))
                pg = R.get(c2, og.lam, chi, lam)
                if f and pg:
                    acc = acc + f * pg.bar()
        rhs = acc.shift(2 * dl)
        if lhs != rhs:
            bad.append(((c1, mu, chi, lam), lhs - rhs))
    return bad


def pole_order_ok(B: dict, sph: SphericalOrbits) -> bool:
    for (c1, mu, chi, lam), f in B.items():
        if f and f.min_exp() < -2 * sph.by_lam(lam).delta:
            return False
    return True
