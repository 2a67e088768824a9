"""Iwahori-orbit parameters on the loop space of a symmetric variety.

A node is a twisted-conjugacy class of Tits elements x with x theta(x) = 1. Its
key is (w_x, fiber tag), the tag being a canonical label of the torus part
modulo twisted conjugation by the constant torus. The builder starts from the
closed orbits and climbs level by level along type-a moves.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from . import _lattice as L
from .affine_weyl import AffineRoot, ExtAffWeylElt, act_on_affine_root, inverse
from .root_datum import BasedRootDatum, InvolutionDatum, PairSpec, validate
from .tits import TitsElt, TitsGroup

TYPES = ("I", "IIa", "IIb", "IIIa", "IIIb", "IVa", "IVb")
B_TYPES = frozenset({"IIb", "IIIb", "IVb"})
A_TYPES = frozenset({"IIa", "IIIa", "IVa"})

Character = tuple  # bits over the component-group basis


class GraphError(RuntimeError):
    """Base class for build failures."""


class DeltaInconsistency(GraphError):
    pass


class SeedUnsupported(GraphError):
    pass


class UntrackedScalar(GraphError):
    pass


class TruncationError(GraphError):
    pass


# component groups


@dataclass(frozen=True)
class ComponentGroup:
    """pi_0 of the fixed torus T^psi, an elementary abelian 2-group."""

    psi: L.Mat
    ann: tuple[tuple[int, ...], ...]
    basis_bits: tuple[tuple[int, ...], ...]
    basis_u: tuple[tuple[Fraction, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.basis_bits)

    @property
    def order(self) -> int:
        return 2 ** self.rank

    def contains(self, u) -> bool:
        d = L.vsub(L.mat_vec(self.psi, u), u)
        return all(Fraction(x).denominator == 1 for x in d)

    def _bits(self, u) -> tuple[int, ...]:
        out = []
        for r in self.ann:
            v = L.frac_mod1(L.dot(r, u))
            if v not in (0, Fraction(1, 2)):
                raise GraphError("torus element is not in the fixed subgroup")
            out.append(int(v != 0))
        return tuple(out)

    def coords(self, u) -> tuple[int, ...]:
        if not self.contains(u):
            raise GraphError(f"{u} is not fixed by psi")
        bits = list(self._bits(u))
        out = []
        for b in self.basis_bits:
            p = b.index(1)
            c = bits[p]
            out.append(c)
            if c:
                bits = [(x + y) % 2 for x, y in zip(bits, b)]
        if any(bits):
            raise GraphError("component bits outside the span of the generators")
        return tuple(out)

    def characters(self) -> list[Character]:
        return [tuple(c) for c in itertools.product((0, 1), repeat=self.rank)]

    def evaluate(self, xi: Character, u) -> int:
        """xi(exp(2 pi i u)) as an exponent of -1."""
        return sum(a * b for a, b in zip(xi, self.coords(u))) % 2

    def elements_u(self) -> list[tuple[Fraction, ...]]:
        out = []
        for c in itertools.product((0, 1), repeat=self.rank):
            u = (Fraction(0),) * len(self.psi)
            for ci, bu in zip(c, self.basis_u):
                if ci:
                    u = L.vadd(u, bu)
            out.append(L.vec_mod1(u))
        return out


@lru_cache(maxsize=None)
def component_group(psi: L.Mat) -> ComponentGroup:
    n = len(psi)
    I = L.identity(n)
    if L.mat_mul(psi, psi) != I:
        raise GraphError("not an involution")
    ker_minus = L.int_kernel(L.mat_sub(I, psi), n)
    ann = tuple(L.annihilator(ker_minus, n))
    gens = L.int_kernel(L.mat_add(I, psi), n)
    rows: list[tuple[list[int], tuple]] = []
    for y in gens:
        u = tuple(Fraction(x, 2) for x in y)
        bits = []
        for r in ann:
            v = L.frac_mod1(L.dot(r, u))
            bits.append(int(v != 0))
        rows.append((bits, u))
    basis: list[tuple[list[int], tuple]] = []
    for bits, u in rows:
        for bb, bu in basis:
            p = bb.index(1)
            if bits[p]:
                bits = [(x + y) % 2 for x, y in zip(bits, bb)]
                u = L.vadd(u, bu)
        if any(bits):
            p = bits.index(1)
            for k, (bb, bu) in enumerate(basis):
                if bb[p]:
                    basis[k] = ([(x + y) % 2 for x, y in zip(bb, bits)], L.vadd(bu, u))
            basis.append((bits, u))
    basis.sort(key=lambda t: t[0].index(1))
    cg = ComponentGroup(
        psi,
        ann,
        tuple(tuple(b) for b, _ in basis),
        tuple(L.vec_mod1(u) for _, u in basis),
    )
    # cross-check: torsion of coker(1 - psi^T) on characters
    m = L.mat_sub(I, L.transpose(psi))
    inv_f = L.smith_invariants(m, n, n)
    tors = 1
    for d in inv_f:
        if d > 1:
            tors *= d
    if tors != cg.order:
        raise GraphError(f"component group order {cg.order} disagrees with Smith form torsion {tors}")
    return cg


@lru_cache(maxsize=None)
def _tag_annihilator(psi: L.Mat) -> tuple[tuple[int, ...], ...]:
    n = len(psi)
    ker_plus = L.int_kernel(L.mat_add(L.identity(n), psi), n)
    return tuple(L.annihilator(ker_plus, n))


def fiber_tag(psi: L.Mat, u) -> tuple[Fraction, ...]:
    return tuple(L.frac_mod1(L.dot(r, u)) for r in _tag_annihilator(psi))


def key_of(inv: InvolutionDatum, x: TitsElt) -> "OrbitKey":
    return OrbitKey(x.weyl(), fiber_tag(L.mat_mul(x.A, inv.theta_on_cochar), x.u))


# graph data


@dataclass(frozen=True, order=True)
class OrbitKey:
    tw_inv: ExtAffWeylElt
    fiber_tag: tuple[Fraction, ...]

    def to_json(self) -> dict:
        return {
            "translation": list(self.tw_inv.translation),
            "finite_part": [list(r) for r in self.tw_inv.finite_part],
            "fiber_tag": [str(x) for x in self.fiber_tag],
        }


@dataclass
class Edge:
    type: str
    neighbors: tuple  # OrbitKey or None (outside the truncation)
    transport: dict = field(default_factory=dict)

    @property
    def truncated(self) -> bool:
        return any(n is None for n in self.neighbors)


@dataclass
class Node:
    key: OrbitKey
    rep: TitsElt
    delta: int
    cg: ComponentGroup
    edges: dict = field(default_factory=dict)

    @property
    def psi(self) -> L.Mat:
        return self.cg.psi


@dataclass
class OrbitGraph:
    spec: PairSpec
    mode: str
    max_delta: int
    roots: list  # indices of simple affine roots in use
    nodes: dict
    order: list
    down: dict
    labels: list
    tits: TitsGroup | None = None

    def key_of(self, x: TitsElt) -> OrbitKey:
        return key_of(self.spec.inv, x)

    def node(self, key: OrbitKey) -> Node:
        return self.nodes[key]

    def delta(self, key) -> int:
        return self.nodes[key].delta

    def characters(self, key) -> list[Character]:
        return self.nodes[key].cg.characters()

    def basis(self) -> list[tuple[OrbitKey, Character]]:
        return [(k, xi) for k in self.order for xi in self.characters(k)]

    def is_closed(self, key) -> bool:
        return not any(e.type in B_TYPES for e in self.nodes[key].edges.values())

    def lower(self, key, s) -> tuple:
        e = self.nodes[key].edges[s]
        return e.neighbors if e.type in B_TYPES else ()

    def b_roots(self, key) -> list[int]:
        return [s for s in self.roots if self.nodes[key].edges[s].type in B_TYPES]

    def index(self) -> dict:
        return {k: i for i, k in enumerate(self.order)}

    def to_json(self) -> dict:
        idx = self.index()
        nodes = []
        for k in self.order:
            nd = self.nodes[k]
            nodes.append({"id": idx[k], "key": k.to_json(), "delta": nd.delta, "component_group_order": nd.cg.order})
        edges = []
        for k in self.order:
            for s in self.roots:
                e = self.nodes[k].edges[s]
                edges.append(
                    {
                        "source": idx[k],
                        "root": self.labels[s],
                        "type": e.type,
                        "neighbors": [None if n is None else idx[n] for n in e.neighbors],
                        "transport": _transport_json(e.transport),
                    }
                )
        return {"pair": self.spec.name, "mode": self.mode, "max_delta": self.max_delta, "nodes": nodes, "edges": edges}


def _bits_str(xi) -> str:
    return "".join(map(str, xi)) if xi else "-"


def _transport_json(tr: dict) -> dict:
    out = {}
    for name in sorted(tr):
        table = tr[name]
        row = {}
        for xi in sorted(table):
            v = table[xi]
            if isinstance(v, bool):
                row[_bits_str(xi)] = v
            elif v is None:
                row[_bits_str(xi)] = None
            elif isinstance(v, tuple) and v and isinstance(v[0], tuple):
                row[_bits_str(xi)] = [_bits_str(c) for c in v]
            else:
                row[_bits_str(xi)] = _bits_str(v)
        out[name] = row
    return out


# builder


class _Builder:
    def __init__(self, spec: PairSpec, mode: str, max_delta: int, threads: int = 1):
        rep = validate(spec.datum, spec.inv)
        if not rep.ok:
            raise GraphError("; ".join(rep.violations))
        if mode not in ("group_case", "general", "finite"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "group_case" and not spec.group_case:
            raise GraphError("group_case mode needs a group-case pair spec")
        if max_delta < 0:
            raise ValueError("max_delta must be non-negative")
        self.spec = spec
        self.mode = mode
        self.max_delta = max_delta
        self.threads = max(1, int(threads))
        self.d: BasedRootDatum = spec.datum
        self.inv: InvolutionDatum = spec.inv
        self.G = TitsGroup(self.d, self.inv)
        self.aw = self.G.aw
        nr = len(self.aw.simple_roots)
        self.roots = list(range(self.d.ss_rank)) if mode == "finite" else list(range(nr))
        self.sig = self.G.affine_sigmas
        self.sig_inv = [self.G.inverse(s) for s in self.sig]
        self.theta_sig = [self.G.theta(s) for s in self.sig]
        self.theta_sig_inv = [self.G.inverse(t) for t in self.theta_sig]

    # classes

    def psi_matrix(self, x: TitsElt) -> L.Mat:
        return L.mat_mul(x.A, self.inv.theta_on_cochar)

    def key(self, x: TitsElt) -> OrbitKey:
        return key_of(self.inv, x)

    def theta_root(self, r: AffineRoot) -> AffineRoot:
        return AffineRoot(self.inv.act_x(r.finite_root), r.level)

    def cross(self, s: int, x: TitsElt) -> TitsElt:
        return self.G.prod(self.sig[s], x, self.theta_sig_inv[s])

    # local analysis of (x, s), independent of the rest of the graph

    def local(self, x: TitsElt, s: int) -> tuple:
        w = x.weyl()
        alpha = self.aw.simple_roots[s]
        img = act_on_affine_root(w, self.theta_root(alpha))
        neg = AffineRoot(tuple(-c for c in alpha.finite_root), -alpha.level)
        positive = self.aw.is_positive(act_on_affine_root(inverse(w), alpha))
        if img == alpha:
            if not positive:
                raise GraphError("imaginary root with negative preimage")
            p = self.G.psi(x, self.sig[s])
            is_c, is_n = p == self.sig[s], p == self.sig_inv[s]
            if is_c and is_n:
                raise UntrackedScalar(f"root {self.aw.labels[s]}: sigma equals its inverse, the pinning scalar cannot be read")
            if is_c:
                return ("I",)
            if not is_n:
                raise UntrackedScalar(f"root {self.aw.labels[s]}: psi does not act by a sign on the root group")
            up1 = self.G.mul(self.sig[s], x)
            up2 = self.G.mul(self.sig_inv[s], x)
            k1, k2 = self.key(up1), self.key(up2)
            if k1 != k2:
                raise GraphError(f"Cayley transform ambiguity at root {self.aw.labels[s]}")
            c = self.cross(s, x)
            kc = self.key(c)
            if kc == self.key(x):
                return ("IVa", up1)
            return ("IIIa", up1, c)
        if img == neg:
            if positive:
                raise GraphError("real root with positive preimage")
            return ("real",)
        c = self.cross(s, x)
        return ("IIa" if positive else "IIb", c)

    # seeds

    def _finite_up(self, start: Iterable[TitsElt]) -> dict:
        seen = {}
        frontier = []
        for x in start:
            k = self.key(x)
            if k not in seen:
                seen[k] = x
                frontier.append(x)
        while frontier:
            nxt = []
            for x in frontier:
                for s in range(self.d.ss_rank):
                    loc = self.local(x, s)
                    for y in loc[1:]:
                        k = self.key(y)
                        if k not in seen:
                            seen[k] = y
                            nxt.append(y)
            frontier = nxt
        return seen

    def seeds(self) -> dict:
        th = self.inv.theta_on_cochar
        n = self.d.rank
        neg = tuple(tuple(-v for v in r) for r in th)
        cands = [self.G.torus(u) for u in component_group(neg).elements_u()]
        for x in cands:
            if not self.G.is_twisted_involution(x):
                raise SeedUnsupported("torus candidate is not a twisted involution")
        base = self._finite_up([self.G.one])
        closed = {k: x for k, x in base.items() if k.tw_inv.finite_part == L.identity(n) and not any(k.tw_inv.translation)}
        for x in cands:
            k = self.key(x)
            if k in closed:
                continue
            reach = self._finite_up([x])
            if any(r in base for r in reach):
                closed[k] = x
        if self.mode != "finite" and self.aw.omega_finite:
            extra = {}
            for om in self.aw.omega:
                g = self.G.lift(om)
                for x in closed.values():
                    y = self.G.twisted_conj(g, x)
                    extra.setdefault(self.key(y), y)
            closed.update(extra)
        return dict(sorted(closed.items()))

    # main loop

    def build(self) -> OrbitGraph:
        nodes: dict[OrbitKey, Node] = {}
        levels: list[list[OrbitKey]] = []
        rev: dict[tuple, list] = {}
        level0 = []
        for k, x in self.seeds().items():
            nodes[k] = Node(k, x, 0, component_group(self.psi_matrix(x)))
            level0.append(k)
        levels.append(sorted(level0))
        d = 0
        while d < len(levels) and levels[d]:
            current = levels[d]
            if self.threads > 1:
                with ThreadPoolExecutor(self.threads) as ex:
                    results = list(ex.map(lambda k: self._expand(nodes[k]), current))
            else:
                results = [self._expand(nodes[k]) for k in current]
            new_level: dict[OrbitKey, TitsElt] = {}
            for k, res in zip(current, results):
                for s, loc in res:
                    self._record(nodes, rev, levels, new_level, d, k, s, loc)
            if new_level and d + 1 <= self.max_delta:
                for k2 in sorted(new_level):
                    x2 = new_level[k2]
                    nodes[k2] = Node(k2, x2, d + 1, component_group(self.psi_matrix(x2)))
                levels.append(sorted(new_level))
            d += 1
        for lev in levels:
            for k in lev:
                self._finish_edges(nodes, rev, k)
        order = [k for lev in levels for k in lev]
        down = {}
        for k in order:
            acc = {k}
            for s in self.roots:
                e = nodes[k].edges[s]
                if e.type in B_TYPES:
                    for u in e.neighbors:
                        acc |= _s_saturate(nodes, down[u], s)
            down[k] = frozenset(acc)
        g = OrbitGraph(self.spec, self.mode, self.max_delta, self.roots, nodes, order, down, self.aw.labels, self.G)
        _check_graph(g)
        return g

    def _expand(self, node: Node):
        return [(s, self.local(node.rep, s)) for s in self.roots]

    def _record(self, nodes, rev, levels, new_level, d, k, s, loc):
        node = nodes[k]
        t = loc[0]
        if t in ("I", "real", "IIb"):
            node.edges[s] = (t, loc[1:])
            return
        up = loc[1]
        ku = self.key(up)
        if ku in nodes:
            if nodes[ku].delta != d + 1:
                raise DeltaInconsistency(
                    f"node reached at delta {d + 1} already has delta {nodes[ku].delta}"
                )
        elif d + 1 <= self.max_delta:
            new_level.setdefault(ku, up)
        else:
            ku = None
        if ku is not None:
            rev.setdefault((ku, s), []).append(k)
        if t == "IIIa":
            kc = self.key(loc[2])
            node.edges[s] = (t, (kc, ku))
        else:
            node.edges[s] = (t, (ku,))

    def _finish_edges(self, nodes, rev, k):
        node = nodes[k]
        for s in self.roots:
            t, nb = node.edges[s]
            if t == "I":
                node.edges[s] = Edge("I", ())
            elif t in ("IIa", "IIb"):
                kc = self.key(nb[0]) if t == "IIb" else nb[0]
                if t == "IIb":
                    if kc not in nodes or nodes[kc].delta != node.delta - 1:
                        raise DeltaInconsistency("IIb partner is not one level below")
                    if rev.get((k, s)) != [kc]:
                        raise GraphError("IIb partner does not match the recorded ascent")
                    node.edges[s] = Edge("IIb", (kc,), {"cross": self._cross_table(node, nodes[kc], s)})
                else:
                    up = kc
                    if up is not None and nodes[up].delta != node.delta + 1:
                        raise DeltaInconsistency("IIa partner is not one level above")
                    tr = {"cross": self._cross_table(node, nodes[up], s)} if up else {}
                    node.edges[s] = Edge("IIa", (up,), tr)
            elif t == "real":
                lows = sorted(set(rev.get((k, s), [])))
                if len(lows) == 2:
                    node.edges[s] = Edge("IIIb", tuple(lows), self._iiib(node, [nodes[u] for u in lows], s))
                elif len(lows) == 1:
                    node.edges[s] = Edge("IVb", tuple(lows), self._ivb(node, nodes[lows[0]], s))
                else:
                    raise SeedUnsupported(
                        f"real root {self.aw.labels[s]} at delta {node.delta} has {len(lows)} lower neighbours"
                    )
            elif t == "IIIa":
                kc, ku = nb
                if kc not in nodes or nodes[kc].delta != node.delta:
                    raise DeltaInconsistency("IIIa partner is not on the same level")
                tr = {"cross": self._cross_table(node, nodes[kc], s)}
                if ku is not None:
                    tr["up"] = self._unique_compatible(node, nodes[ku], s)
                node.edges[s] = Edge("IIIa", (kc, ku), tr)
            elif t == "IVa":
                (ku,) = nb
                tr = {}
                if ku is not None:
                    tr["up2"] = self._compatible_pairs(node, nodes[ku], s)
                node.edges[s] = Edge("IVa", (ku,), tr)
            else:
                raise GraphError(f"unexpected local type {t}")

    # character transports

    def _finite_reflection(self, s: int) -> L.Mat:
        return self.aw.simple_reflections[s].finite_part

    def _cross_table(self, src: Node, dst: Node, s: int) -> dict:
        S = self._finite_reflection(s)
        Sinv = L.mat_inv(S)
        out = {}
        imgs = [L.vec_mod1(L.mat_vec(Sinv, u)) for u in dst.cg.basis_u]
        for xi in src.cg.characters():
            out[xi] = tuple(src.cg.evaluate(xi, u) for u in imgs)
        return out

    def _common_points(self, a: Node, b: Node, s: int) -> list:
        beta = self.aw.simple_roots[s].finite_root
        pts = []
        for y in itertools.product((0, 1), repeat=self.d.rank):
            u = tuple(Fraction(c, 2) for c in y)
            if Fraction(L.dot(beta, u)).denominator != 1:
                continue
            if a.cg.contains(u) and b.cg.contains(u):
                pts.append(u)
        return pts

    def _compatible(self, a: Node, xi, b: Node, eta, pts) -> bool:
        return all(a.cg.evaluate(xi, u) == b.cg.evaluate(eta, u) for u in pts)

    def _unique_compatible(self, src: Node, dst: Node, s: int) -> dict:
        pts = self._common_points(src, dst, s)
        out = {}
        for xi in src.cg.characters():
            c = [eta for eta in dst.cg.characters() if self._compatible(src, xi, dst, eta, pts)]
            if len(c) != 1:
                raise GraphError(f"{len(c)} compatible characters where one is expected")
            out[xi] = c[0]
        return out

    def _compatible_pairs(self, src: Node, dst: Node, s: int) -> dict:
        pts = self._common_points(src, dst, s)
        out = {}
        for xi in src.cg.characters():
            c = [eta for eta in dst.cg.characters() if self._compatible(src, xi, dst, eta, pts)]
            if len(c) != 2:
                raise GraphError(f"{len(c)} compatible characters where two are expected")
            out[xi] = tuple(c)
        return out

    def _a_nonzero(self, node: Node, s: int) -> dict:
        beta = self.aw.simple_roots[s].finite_root
        cor = self.d.coroot_of[tuple(beta)]
        u = tuple(Fraction(c, 2) for c in cor)
        return {xi: bool(node.cg.evaluate(xi, u)) for xi in node.cg.characters()}

    def _iiib(self, node: Node, lows: list, s: int) -> dict:
        a = self._a_nonzero(node, s)
        tr = {"a": a}
        for name, low in zip(("down1", "down2"), lows):
            pts = self._common_points(node, low, s)
            table = {}
            for xi in node.cg.characters():
                c = [eta for eta in low.cg.characters() if self._compatible(node, xi, low, eta, pts)]
                if a[xi]:
                    table[xi] = None
                elif len(c) != 1:
                    raise GraphError(f"IIIb: {len(c)} lower characters compatible with an a=0 character")
                else:
                    table[xi] = c[0]
            tr[name] = table
        return tr

    def _ivb(self, node: Node, low: Node, s: int) -> dict:
        a = self._a_nonzero(node, s)
        pts = self._common_points(node, low, s)
        partner, down = {}, {}
        chars = node.cg.characters()
        for xi in chars:
            if a[xi]:
                partner[xi] = None
                down[xi] = None
                continue
            same = [z for z in chars if z != xi and all(node.cg.evaluate(z, u) == node.cg.evaluate(xi, u) for u in pts)]
            c = [eta for eta in low.cg.characters() if self._compatible(node, xi, low, eta, pts)]
            if len(same) != 1 or len(c) != 1:
                raise GraphError("IVb character data is not uniquely determined")
            partner[xi] = same[0]
            down[xi] = c[0]
        return {"a": a, "partner": partner, "down": down}


def _s_saturate(nodes, keys, s: int) -> set:
    """keys together with all their neighbours along s."""
    out = set(keys)
    for k in keys:
        out.update(n for n in nodes[k].edges[s].neighbors if n is not None)
    return out


def _check_graph(g: OrbitGraph):
    for k in g.order:
        nd = g.nodes[k]
        for s in g.roots:
            e = nd.edges[s]
            for u in e.neighbors:
                if u is None:
                    continue
                du = g.nodes[u].delta
                if e.type in B_TYPES and du != nd.delta - 1:
                    raise DeltaInconsistency("b-type neighbour is not one level below")
        closed = g.is_closed(k)
        if closed != (nd.delta == 0):
            raise DeltaInconsistency(f"closedness and delta disagree at a node of delta {nd.delta}")
        if g.mode == "group_case":
            for s in g.roots:
                if nd.edges[s].type not in ("IIa", "IIb"):
                    raise GraphError("group case produced a non-II edge type")


def build(spec: PairSpec, mode: str = "general", max_delta: int = 4, threads: int = 1) -> OrbitGraph:
    return _Builder(spec, mode, max_delta, threads).build()


def classify(graph: OrbitGraph, v: OrbitKey, s: int) -> str:
    return graph.nodes[v].edges[s].type


def neighbors(graph: OrbitGraph, v: OrbitKey, s: int) -> Edge:
    e = graph.nodes[v].edges[s]
    if e.type in A_TYPES and e.truncated:
        raise TruncationError("neighbor outside truncation")
    return e


def closure_leq(graph: OrbitGraph, u: OrbitKey, v: OrbitKey) -> bool:
    return u in graph.down[v]


def dump_json(graph: OrbitGraph) -> str:
    return json.dumps(graph.to_json(), sort_keys=True, indent=1)
