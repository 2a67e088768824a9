"""A model of the Tits extension of the extended affine Weyl group inside the loop group.

An element exp(2 pi i u) * z^m * sigma_A is stored as (u mod Z^n, m, A), where u is a
rational cocharacter, m an integral cocharacter, sigma_A the Tits lift of the
finite Weyl element A built from a reduced word in the pinned elements
sigma_i = x_i(1) x_{-i}(-1) x_i(1). The loop element z^m maps to t^(-m) in W~.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from . import _lattice as L
from .affine_weyl import AffineWeyl, ExtAffWeylElt
from .root_datum import BasedRootDatum, InvolutionDatum, simple_root_permutation


@dataclass(frozen=True, order=True)
class TitsElt:
    u: tuple[Fraction, ...]
    m: tuple[int, ...]
    A: L.Mat

    def weyl(self) -> ExtAffWeylElt:
        return ExtAffWeylElt(tuple(-x for x in self.m), self.A)


class TitsGroup:
    def __init__(self, datum: BasedRootDatum, inv: InvolutionDatum):
        self.datum = datum
        self.inv = inv
        self.n = datum.rank
        self.aw = AffineWeyl(datum)
        self._cocycle: dict = {}
        self._theta_sigma: dict = {}
        self._len: dict = {}
        perm = simple_root_permutation(datum, inv)
        if perm is None:
            raise ValueError("theta does not permute the simple roots")
        self.perm = perm

    # constructors

    @cached_property
    def one(self) -> TitsElt:
        return TitsElt((Fraction(0),) * self.n, (0,) * self.n, L.identity(self.n))

    def torus(self, u) -> TitsElt:
        return TitsElt(L.vec_mod1(u), (0,) * self.n, L.identity(self.n))

    def zpow(self, m) -> TitsElt:
        return TitsElt((Fraction(0),) * self.n, tuple(m), L.identity(self.n))

    def sigma(self, A: L.Mat) -> TitsElt:
        return TitsElt((Fraction(0),) * self.n, (0,) * self.n, A)

    def _flen(self, A) -> int:
        v = self._len.get(A)
        if v is None:
            v = self._len[A] = self.datum.finite_length(A)
        return v

    def cocycle(self, A: L.Mat, B: L.Mat) -> tuple[Fraction, ...]:
        """c with sigma_A sigma_B = exp(2 pi i c) sigma_AB."""
        key = (A, B)
        c = self._cocycle.get(key)
        if c is not None:
            return c
        d = self.datum
        cur = A
        acc = [Fraction(0)] * self.n
        for j in d.reduced_word(B):
            D = L.mat_mul(cur, d.simple_reflection_matrix(j))
            if self._flen(D) < self._flen(cur):
                img = L.mat_vec(D, d.simple_coroots[j])
                acc = [a + Fraction(x, 2) for a, x in zip(acc, img)]
            cur = D
        c = L.vec_mod1(acc)
        self._cocycle[key] = c
        return c

    # group law

    def mul(self, g: TitsElt, h: TitsElt) -> TitsElt:
        u = L.vadd(L.vadd(g.u, L.mat_vec(g.A, h.u)), self.cocycle(g.A, h.A))
        return TitsElt(L.vec_mod1(u), L.vadd(g.m, L.mat_vec(g.A, h.m)), L.mat_mul(g.A, h.A))

    def inverse(self, g: TitsElt) -> TitsElt:
        ai = L.mat_inv(g.A)
        c = self.cocycle(g.A, ai)
        u = tuple(-x for x in L.vadd(L.mat_vec(ai, c), L.mat_vec(ai, g.u)))
        return TitsElt(L.vec_mod1(u), tuple(-x for x in L.mat_vec(ai, g.m)), ai)

    def prod(self, *gs: TitsElt) -> TitsElt:
        out = self.one
        for g in gs:
            out = self.mul(out, g)
        return out

    def simple_sigma(self, i: int) -> TitsElt:
        return self.sigma(self.datum.simple_reflection_matrix(i))

    def theta(self, g: TitsElt) -> TitsElt:
        th = self.inv.theta_on_cochar
        head = TitsElt(L.vec_mod1(L.mat_vec(th, g.u)), L.mat_vec(th, g.m), L.identity(self.n))
        return self.mul(head, self._theta_of_sigma(g.A))

    def _theta_of_sigma(self, A: L.Mat) -> TitsElt:
        out = self._theta_sigma.get(A)
        if out is not None:
            return out
        d = self.datum
        out = self.one
        for i in d.reduced_word(A):
            j = self.perm[i]
            t = self.simple_sigma(j)
            if self.inv.pinning_signs[i] == -1:
                t = self.mul(t, self.torus(tuple(Fraction(x, 2) for x in d.simple_coroots[j])))
            out = self.mul(out, t)
        self._theta_sigma[A] = out
        return out

    # lifts of simple affine reflections

    @cached_property
    def affine_sigmas(self) -> list[TitsElt]:
        """Lifts n_alpha = x_alpha(1) x_-alpha(-1) x_alpha(1) for every simple affine root."""
        d = self.datum
        out = [self.simple_sigma(i) for i in range(d.ss_rank)]
        for h, hc in d.highest_roots:
            n_h = self._root_sigma(h)
            out.append(self.mul(self.zpow(tuple(-x for x in hc)), self.inverse(n_h)))
        return out

    def _root_sigma(self, beta) -> TitsElt:
        """n_beta(1) up to the sign ambiguity beta_check(-1), via sigma_w sigma_i sigma_w^-1."""
        d = self.datum
        for A in d.weyl_group:
            for i in range(d.ss_rank):
                if d.act_on_root(A, d.simple_roots[i]) == tuple(beta):
                    s = self.sigma(A)
                    return self.prod(s, self.simple_sigma(i), self.inverse(s))
        raise ValueError(f"{beta} is not a root")

    def lift(self, w: ExtAffWeylElt) -> TitsElt:
        return TitsElt((Fraction(0),) * self.n, tuple(-x for x in w.translation), w.finite_part)

    def is_twisted_involution(self, x: TitsElt) -> bool:
        return self.mul(x, self.theta(x)) == self.one

    def twisted_conj(self, g: TitsElt, x: TitsElt) -> TitsElt:
        return self.prod(g, x, self.inverse(self.theta(g)))

    def psi(self, x: TitsElt, g: TitsElt) -> TitsElt:
        """psi_x(g) = x theta(g) x^-1."""
        return self.prod(x, self.theta(g), self.inverse(x))
