"""The extended affine Weyl group of a based root datum.

An element (A, lam) stands for t^lam * w, where A is the matrix of the finite
Weyl element w on cocharacters. It acts on Y by y -> A y + lam, and on affine
roots (beta, k), viewed as the functions y -> <beta, y> + k.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from . import _lattice as L
from .root_datum import BasedRootDatum, InvolutionDatum


@dataclass(frozen=True, order=True)
class ExtAffWeylElt:
    translation: tuple[int, ...]
    finite_part: L.Mat

    @classmethod
    def make(cls, finite_part, translation) -> "ExtAffWeylElt":
        return cls(tuple(int(x) for x in translation), L.as_mat(finite_part))

    @classmethod
    def identity(cls, n: int) -> "ExtAffWeylElt":
        return cls((0,) * n, L.identity(n))

    @classmethod
    def translation_by(cls, lam: Sequence[int]) -> "ExtAffWeylElt":
        return cls(tuple(lam), L.identity(len(lam)))

    def to_json(self) -> dict:
        return {"finite_part": [list(r) for r in self.finite_part], "translation": list(self.translation)}


@dataclass(frozen=True, order=True)
class AffineRoot:
    finite_root: tuple[int, ...]
    level: int


def mul(a: ExtAffWeylElt, b: ExtAffWeylElt) -> ExtAffWeylElt:
    return ExtAffWeylElt(
        L.vadd(a.translation, L.mat_vec(a.finite_part, b.translation)),
        L.mat_mul(a.finite_part, b.finite_part),
    )


def inverse(a: ExtAffWeylElt) -> ExtAffWeylElt:
    ai = L.mat_inv(a.finite_part)
    return ExtAffWeylElt(tuple(-x for x in L.mat_vec(ai, a.translation)), ai)


def act_on_y(a: ExtAffWeylElt, y: Sequence) -> tuple:
    return L.vadd(L.mat_vec(a.finite_part, y), a.translation)


def act_on_affine_root(a: ExtAffWeylElt, r: AffineRoot) -> AffineRoot:
    g = L.mat_vec(L.inv_transpose(a.finite_part), r.finite_root)
    return AffineRoot(g, r.level - L.dot(a.translation, g))


def theta_twist(inv: InvolutionDatum, a: ExtAffWeylElt) -> ExtAffWeylElt:
    th = inv.theta_on_cochar
    return ExtAffWeylElt(L.mat_vec(th, a.translation), L.mat_mul(L.mat_mul(th, a.finite_part), th))


def is_twisted_involution(inv: InvolutionDatum, a: ExtAffWeylElt) -> bool:
    return theta_twist(inv, a) == inverse(a)


class AffineWeyl:
    """Per-datum data: simple affine roots and reflections, length, Omega."""

    def __init__(self, datum: BasedRootDatum):
        self.datum = datum
        self.n = datum.rank

    @cached_property
    def e(self) -> ExtAffWeylElt:
        return ExtAffWeylElt.identity(self.n)

    @cached_property
    def simple_roots(self) -> list[AffineRoot]:
        """Finite simple roots first, then one affine root (-theta_h, 1) per component."""
        out = [AffineRoot(a, 0) for a in self.datum.simple_roots]
        for h, _ in self.datum.highest_roots:
            out.append(AffineRoot(tuple(-x for x in h), 1))
        return out

    @cached_property
    def simple_reflections(self) -> list[ExtAffWeylElt]:
        d = self.datum
        out = [ExtAffWeylElt((0,) * self.n, d.simple_reflection_matrix(i)) for i in range(d.ss_rank)]
        for h, hc in d.highest_roots:
            out.append(ExtAffWeylElt(tuple(hc), reflection_matrix(h, hc)))
        return out

    @cached_property
    def labels(self) -> list[str]:
        r = self.datum.ss_rank
        names = [f"a{i + 1}" for i in range(r)]
        nc = len(self.datum.highest_roots)
        names += ["a0"] if nc == 1 else [f"a0_{c + 1}" for c in range(nc)]
        return names

    def reflection_in(self, r: AffineRoot) -> ExtAffWeylElt:
        hc = self.datum.coroot_of[tuple(r.finite_root)]
        return ExtAffWeylElt(tuple(-r.level * x for x in hc), reflection_matrix(r.finite_root, hc))

    def is_positive(self, r: AffineRoot) -> bool:
        return r.level > 0 or (r.level == 0 and self.datum.is_positive_root(r.finite_root))

    def length(self, a: ExtAffWeylElt) -> int:
        d = self.datum
        lam = a.finite_part
        tot = 0
        for b in d.all_roots:
            g = d.act_on_root(lam, b)
            m = L.dot(a.translation, g)
            c = m - int(d.is_positive_root(g)) - int(not d.is_positive_root(b)) + 1
            if c > 0:
                tot += c
        return tot

    def is_right_ascent(self, a: ExtAffWeylElt, s: int) -> bool:
        return self.is_positive(act_on_affine_root(a, self.simple_roots[s]))

    def is_left_ascent(self, s: int, a: ExtAffWeylElt) -> bool:
        return self.is_right_ascent(inverse(a), s)

    def reduced_word(self, a: ExtAffWeylElt) -> tuple[ExtAffWeylElt, tuple[int, ...]]:
        """(omega, word) with a = omega * s_word[0] * ... and len(word) = length(a)."""
        word = []
        cur = a
        while True:
            for s in range(len(self.simple_roots)):
                if not self.is_right_ascent(cur, s):
                    cur = mul(cur, self.simple_reflections[s])
                    word.append(s)
                    break
            else:
                return cur, tuple(reversed(word))

    def omega_part(self, a: ExtAffWeylElt) -> tuple[ExtAffWeylElt, ExtAffWeylElt]:
        om, word = self.reduced_word(a)
        return om, mul(inverse(om), a)

    @cached_property
    def omega_finite(self) -> bool:
        return self.datum.coroot_rank_full

    @cached_property
    def omega(self) -> list[ExtAffWeylElt]:
        """Length-zero elements; only the identity when Y/Q is infinite."""
        if not self.omega_finite:
            return [self.e]
        reps = [(0,) * self.n]
        frontier = list(reps)
        while frontier:
            nxt = []
            for y in frontier:
                for i in range(self.n):
                    z = tuple(v + int(j == i) for j, v in enumerate(y))
                    if not any(self.datum.in_coroot_lattice(L.vsub(z, r)) for r in reps):
                        reps.append(z)
                        nxt.append(z)
            frontier = nxt
        out = [self.reduced_word(ExtAffWeylElt.translation_by(y))[0] for y in reps]
        return sorted(set(out))

    def enumerate(self, max_len: int, inv: InvolutionDatum | None = None, filter: str = "all") -> list[ExtAffWeylElt]:
        if max_len < 0:
            raise ValueError("max_len must be non-negative")
        layers = [[self.e]]
        seen = {self.e}
        for _ in range(max_len):
            nxt = set()
            for a in layers[-1]:
                for s in range(len(self.simple_roots)):
                    if self.is_right_ascent(a, s):
                        b = mul(a, self.simple_reflections[s])
                        if b not in seen:
                            nxt.add(b)
            seen |= nxt
            layers.append(sorted(nxt))
        out = []
        for layer in layers:
            out.extend(sorted(mul(om, a) for om in self.omega for a in layer))
        if filter == "twisted_involutions":
            if inv is None:
                raise ValueError("an involution is needed for this filter")
            out = [a for a in out if is_twisted_involution(inv, a)]
        elif filter != "all":
            raise ValueError(f"unknown filter {filter!r}")
        return out


def reflection_matrix(root: Sequence[int], coroot: Sequence[int]) -> L.Mat:
    n = len(root)
    return tuple(tuple(int(r == c) - coroot[r] * root[c] for c in range(n)) for r in range(n))


def length(datum: BasedRootDatum, a: ExtAffWeylElt) -> int:
    return AffineWeyl(datum).length(a)


def omega_part(datum: BasedRootDatum, a: ExtAffWeylElt):
    return AffineWeyl(datum).omega_part(a)


def enumerate_elements(datum: BasedRootDatum, inv: InvolutionDatum, max_len: int, filter: str = "all") -> list[ExtAffWeylElt]:
    return AffineWeyl(datum).enumerate(max_len, inv, filter)


def word_length_bfs(aw: AffineWeyl, max_len: int) -> dict[ExtAffWeylElt, int]:
    """Independent length by BFS on words in all simple reflections (Omega ignored)."""
    dist = {aw.e: 0}
    frontier = [aw.e]
    for k in range(1, max_len + 1):
        nxt = []
        for a in frontier:
            for s in aw.simple_reflections:
                b = mul(a, s)
                if b not in dist:
                    dist[b] = k
                    nxt.append(b)
        frontier = nxt
    return dist


def product(elts: Iterable[ExtAffWeylElt], n: int) -> ExtAffWeylElt:
    out = ExtAffWeylElt.identity(n)
    for a in elts:
        out = mul(out, a)
    return out
