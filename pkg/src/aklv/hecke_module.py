"""The module M with basis m_{xi,v} and the action of simple reflections and Omega."""

from __future__ import annotations

from typing import Iterable, Mapping

from . import _lattice as L
from .affine_weyl import AffineWeyl, ExtAffWeylElt
from .coeff_ring import ONE, Q, ZERO, HalfLaurent
from .orbit_graph import OrbitGraph, OrbitKey, TruncationError

Q_MINUS_1 = Q - 1
Q_MINUS_2 = Q - 2


class ModuleElt:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        t = {}
        if terms:
            for k, v in terms.items():
                if not isinstance(v, HalfLaurent):
                    v = HalfLaurent.const(v)
                if v:
                    t[k] = v
        self.terms = t

    @classmethod
    def basis(cls, v: OrbitKey, xi) -> "ModuleElt":
        return cls({(v, tuple(xi)): ONE})

    def __add__(self, other: "ModuleElt") -> "ModuleElt":
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, ZERO) + v
        return ModuleElt(t)

    def __sub__(self, other: "ModuleElt") -> "ModuleElt":
        return self + other.scale(HalfLaurent.const(-1))

    def __neg__(self):
        return self.scale(HalfLaurent.const(-1))

    def scale(self, f) -> "ModuleElt":
        if not isinstance(f, HalfLaurent):
            f = HalfLaurent.const(f)
        return ModuleElt({k: v * f for k, v in self.terms.items()})

    def bar_coeffs(self) -> "ModuleElt":
        return ModuleElt({k: v.bar() for k, v in self.terms.items()})

    def coeff(self, v, xi) -> HalfLaurent:
        return self.terms.get((v, tuple(xi)), ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, ModuleElt) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def keys(self):
        return sorted(self.terms)

    def __repr__(self):
        parts = [f"({v}) m[{''.join(map(str, k[1]))}]" for k, v in sorted(self.terms.items(), key=lambda kv: kv[0])]
        return "ModuleElt(" + " + ".join(parts) + ")"


def _add(acc: dict, k, f: HalfLaurent):
    acc[k] = acc.get(k, ZERO) + f


def _need(e, idx: int = 0):
    n = e.neighbors[idx]
    if n is None:
        raise TruncationError("truncation overflow: neighbor above max_delta")
    return n


def t_basis(graph: OrbitGraph, s: int, v: OrbitKey, xi: tuple) -> dict:
    """T_s m_{xi,v} as a dict of terms."""
    e = graph.nodes[v].edges[s]
    t = e.type
    tr = e.transport
    out: dict = {}
    if t == "I":
        _add(out, (v, xi), Q)
    elif t == "IIa":
        _add(out, (_need(e), tr["cross"][xi]), ONE)
    elif t == "IIb":
        _add(out, (v, xi), Q_MINUS_1)
        _add(out, (e.neighbors[0], tr["cross"][xi]), Q)
    elif t == "IIIa":
        up = _need(e, 1)
        _add(out, (e.neighbors[0], tr["cross"][xi]), ONE)
        _add(out, (up, tr["up"][xi]), ONE)
    elif t == "IIIb":
        if tr["a"][xi]:
            _add(out, (v, xi), HalfLaurent.const(-1))
        else:
            _add(out, (v, xi), Q_MINUS_2)
            _add(out, (e.neighbors[0], tr["down1"][xi]), Q_MINUS_1)
            _add(out, (e.neighbors[1], tr["down2"][xi]), Q_MINUS_1)
    elif t == "IVa":
        up = _need(e)
        x1, x2 = tr["up2"][xi]
        _add(out, (v, xi), ONE)
        _add(out, (up, x1), ONE)
        _add(out, (up, x2), ONE)
    elif t == "IVb":
        if tr["a"][xi]:
            _add(out, (v, xi), HalfLaurent.const(-1))
        else:
            _add(out, (v, xi), Q_MINUS_1)
            _add(out, (v, tr["partner"][xi]), HalfLaurent.const(-1))
            _add(out, (e.neighbors[0], tr["down"][xi]), Q_MINUS_1)
    else:
        raise ValueError(f"unknown type {t}")
    return out


def t_simple(graph: OrbitGraph, s: int, m: ModuleElt) -> ModuleElt:
    acc: dict = {}
    for (v, xi), f in m.terms.items():
        for k, g in t_basis(graph, s, v, xi).items():
            _add(acc, k, f * g)
    return ModuleElt(acc)


def omega_image(graph: OrbitGraph, om: ExtAffWeylElt, v: OrbitKey, xi: tuple) -> tuple:
    aw = AffineWeyl(graph.spec.datum)
    if aw.length(om) != 0:
        raise ValueError("not length zero")
    G = graph.tits
    node = graph.nodes[v]
    y = G.twisted_conj(G.lift(om), node.rep)
    k = graph.key_of(y)
    if k not in graph.nodes:
        raise TruncationError("Omega image outside the graph")
    dst = graph.nodes[k]
    Ainv = L.mat_inv(om.finite_part)
    bits = tuple(node.cg.evaluate(xi, L.vec_mod1(L.mat_vec(Ainv, u))) for u in dst.cg.basis_u)
    return k, bits


def omega_act(graph: OrbitGraph, om: ExtAffWeylElt, m: ModuleElt) -> ModuleElt:
    acc: dict = {}
    for (v, xi), f in m.terms.items():
        _add(acc, omega_image(graph, om, v, xi), f)
    return ModuleElt(acc)


def word_act(graph: OrbitGraph, word: Iterable, m: ModuleElt) -> ModuleElt:
    """Apply the letters of ``word`` in order: word[0] acts first."""
    for a in word:
        if isinstance(a, ExtAffWeylElt):
            m = omega_act(graph, a, m)
        else:
            m = t_simple(graph, int(a), m)
    return m


def in_bounds(graph: OrbitGraph, word: Iterable, v: OrbitKey, xi) -> bool:
    try:
        word_act(graph, word, ModuleElt.basis(v, xi))
    except TruncationError:
        return False
    return True


def braid_order(graph: OrbitGraph, s: int, t: int) -> int | None:
    """Order of s t in the affine Weyl group, or None if infinite."""
    aw = AffineWeyl(graph.spec.datum)
    a, b = aw.simple_reflections[s], aw.simple_reflections[t]
    from .affine_weyl import mul

    cur = aw.e
    for k in range(1, 13):
        cur = mul(cur, mul(a, b))
        if cur == aw.e:
            return k
    return None


def quadratic_residual(graph: OrbitGraph, s: int, v: OrbitKey, xi) -> ModuleElt | None:
    """T_s^2 m - (q-1) T_s m - q m, or None when out of bounds."""
    m = ModuleElt.basis(v, xi)
    try:
        t1 = t_simple(graph, s, m)
        t2 = t_simple(graph, s, t1)
    except TruncationError:
        return None
    return t2 - t1.scale(Q_MINUS_1) - m.scale(Q)


def braid_residual(graph: OrbitGraph, s: int, t: int, v: OrbitKey, xi) -> ModuleElt | None:
    k = braid_order(graph, s, t)
    if k is None:
        return ModuleElt()
    w1 = [s, t] * k
    w2 = [t, s] * k
    w1, w2 = w1[:k], w2[:k]
    m = ModuleElt.basis(v, xi)
    try:
        return word_act(graph, w1, m) - word_act(graph, w2, m)
    except TruncationError:
        return None
