"""Group-case comparison of the orbit pipeline with the affine-permutation oracle.

For the diagonal pair (G x G, swap) an orbit is determined by the first-factor part of its
twisted involution. Restricting a reduced word to the letters of the first factor gives an
element of W~(A_{n-1}) as an affine permutation.
"""

from __future__ import annotations

from .affine_weyl import AffineWeyl
from .coeff_ring import HalfLaurent
from .oracles import AffPerm, KLOracleTable, aff_length, from_word, kl_classical


class CompareError(RuntimeError):
    pass


def factor_letters(graph) -> dict[int, int]:
    """Letter of the first factor -> generator index of the affine symmetric group."""
    d = graph.spec.datum
    comp = d.components[0]
    out = {j: p + 1 for p, j in enumerate(comp)}
    out[d.ss_rank] = 0
    return out


def node_to_affperm(graph, key) -> AffPerm:
    d = graph.spec.datum
    aw = AffineWeyl(d)
    om, word = aw.reduced_word(key.tw_inv)
    if om != aw.e:
        raise CompareError("twisted involution has a nontrivial length-zero part")
    letters = factor_letters(graph)
    n = len(d.components[0]) + 1
    return from_word(n, [letters[a] for a in word if a in letters])


def oracle_for(graph) -> tuple[KLOracleTable, dict]:
    if not graph.spec.group_case:
        raise CompareError("not a group-case pair")
    n = len(graph.spec.datum.components[0]) + 1
    orc = kl_classical(n, graph.max_delta)
    elt = {k: node_to_affperm(graph, k) for k in graph.order}
    if len(set(elt.values())) != len(elt):
        raise CompareError("orbit to element map is not injective")
    if set(elt.values()) != set(orc.elements):
        raise CompareError("orbit to element map is not onto the elements of bounded length")
    for k, f in elt.items():
        if aff_length(f) != graph.delta(k):
            raise CompareError("delta differs from the length of the element")
    return orc, elt


def compare_P(graph, P, orc: KLOracleTable, elt: dict) -> list:
    bad = []
    for v in graph.order:
        for u in graph.order:
            got = P.get((), u, (), v)
            want = orc.p(elt[u], elt[v])
            if got != want:
                bad.append((u, v, got, want))
    return bad


def compare_b(graph, b, orc: KLOracleTable, elt: dict) -> list:
    """b_{u,w} = (-1)^(l(w)-l(u)) q^(-l(w)) R_{u,w}."""
    bad = []
    for v in graph.order:
        lv = graph.delta(v)
        for u in graph.order:
            sign = -1 if (lv - graph.delta(u)) % 2 else 1
            want = orc.r(elt[u], elt[v]).shift(-2 * lv) * sign
            got = b.get((), u, (), v)
            if got != want:
                bad.append((u, v, got, want))
    return bad


def factor_labels(datum, lam) -> tuple[int, ...]:
    """Dynkin labels of the first-factor coweight of lam, as a weight of the dual group."""
    comp = datum.components[0]
    return tuple(sum(a * y for a, y in zip(datum.simple_roots[j], lam)) for j in comp)


def dual_cartan(datum) -> list[list[int]]:
    """Cartan matrix of the first factor's dual group: entry (i, j) is <alpha_i, alpha_j check>."""
    comp = datum.components[0]
    r, c = datum.simple_roots, datum.simple_coroots
    return [[sum(a * b for a, b in zip(r[i], c[j])) for j in comp] for i in comp]


def kf_from_oracle(datum, lam, mu) -> HalfLaurent:
    from .oracles import q_weight_mult

    return q_weight_mult(dual_cartan(datum), factor_labels(datum, lam), factor_labels(datum, mu))
