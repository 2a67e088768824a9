"""Based root data with an involution preserving a Borel pair.

Characters X and cocharacters Y are both Z^n with the standard dot pairing.
The involution is given by its matrix on Y; on X it acts by the transpose.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

from . import _lattice as L


class DatumError(ValueError):
    pass


@dataclass(frozen=True)
class BasedRootDatum:
    rank: int
    simple_roots: tuple[tuple[int, ...], ...]
    simple_coroots: tuple[tuple[int, ...], ...]
    cartan_type_label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "simple_roots", L.as_mat(self.simple_roots))
        object.__setattr__(self, "simple_coroots", L.as_mat(self.simple_coroots))
        if len(self.simple_roots) != len(self.simple_coroots):
            raise DatumError("simple roots and coroots differ in number")
        for v in self.simple_roots + self.simple_coroots:
            if len(v) != self.rank:
                raise DatumError(f"vector {v} does not have length {self.rank}")

    @property
    def ss_rank(self) -> int:
        return len(self.simple_roots)

    def pairing(self, y: Sequence[int], x: Sequence[int]):
        return L.dot(y, x)

    @cached_property
    def cartan(self) -> L.Mat:
        """a_ij = <coroot_i, root_j>."""
        return tuple(
            tuple(L.dot(c, a) for a in self.simple_roots) for c in self.simple_coroots
        )

    def cartan_problems(self) -> list[str]:
        out = []
        c = self.cartan
        r = self.ss_rank
        for i in range(r):
            if c[i][i] != 2:
                out.append(f"bad Cartan matrix: diagonal entry {i} is {c[i][i]}")
            for j in range(r):
                if i != j and c[i][j] > 0:
                    out.append(f"bad Cartan matrix: entry ({i},{j}) is positive")
                if i != j and (c[i][j] == 0) != (c[j][i] == 0):
                    out.append(f"bad Cartan matrix: entries ({i},{j}) and ({j},{i}) disagree on vanishing")
        return out

    def reflect_x(self, i: int, x: Sequence[int]) -> tuple:
        a, ac = self.simple_roots[i], self.simple_coroots[i]
        k = L.dot(x, ac)
        return tuple(xv - k * av for xv, av in zip(x, a))

    def reflect_y(self, i: int, y: Sequence[int]) -> tuple:
        a, ac = self.simple_roots[i], self.simple_coroots[i]
        k = L.dot(a, y)
        return tuple(yv - k * cv for yv, cv in zip(y, ac))

    @cached_property
    def _root_system(self):
        """Positive roots with coroots and simple-root coordinates, by reflection closure."""
        if self.cartan_problems():
            raise DatumError("; ".join(self.cartan_problems()))
        r = self.ss_rank
        limit = 4000
        roots: dict[tuple, tuple] = {}
        coords: dict[tuple, tuple] = {}
        frontier = []
        for i in range(r):
            roots[self.simple_roots[i]] = self.simple_coroots[i]
            coords[self.simple_roots[i]] = tuple(int(j == i) for j in range(r))
            frontier.append(self.simple_roots[i])
        while frontier:
            nxt = []
            for b in frontier:
                for i in range(r):
                    if b == self.simple_roots[i]:
                        continue
                    nb = self.reflect_x(i, b)
                    if nb in roots:
                        continue
                    k = L.dot(b, self.simple_coroots[i])
                    nc = tuple(c - (k if j == i else 0) for j, c in enumerate(coords[b]))
                    if any(c < 0 for c in nc):
                        raise DatumError("positive-root closure produced a non-positive root")
                    roots[nb] = self.reflect_y(i, roots[b])
                    coords[nb] = nc
                    nxt.append(nb)
                    if len(roots) > limit:
                        raise DatumError("positive-root closure is not finite")
            frontier = nxt
        order = sorted(roots, key=lambda b: (sum(coords[b]), coords[b]))
        return [(b, roots[b], coords[b]) for b in order]

    @cached_property
    def positive_roots(self) -> list[tuple[int, ...]]:
        return [b for b, _, _ in self._root_system]

    @cached_property
    def positive_coroots(self) -> list[tuple[int, ...]]:
        return [c for _, c, _ in self._root_system]

    @cached_property
    def root_coords(self) -> dict[tuple, tuple]:
        out = {}
        for b, _, c in self._root_system:
            out[b] = c
            out[tuple(-x for x in b)] = tuple(-x for x in c)
        return out

    @cached_property
    def coroot_of(self) -> dict[tuple, tuple]:
        out = {}
        for b, c, _ in self._root_system:
            out[b] = c
            out[tuple(-x for x in b)] = tuple(-x for x in c)
        return out

    @cached_property
    def all_roots(self) -> list[tuple[int, ...]]:
        return self.positive_roots + [tuple(-x for x in b) for b in self.positive_roots]

    def is_root(self, b) -> bool:
        return tuple(b) in self.coroot_of

    def is_positive_root(self, b) -> bool:
        c = self.root_coords[tuple(b)]
        return any(x > 0 for x in c)

    @cached_property
    def rho(self) -> tuple[Fraction, ...]:
        s = [0] * self.rank
        for b in self.positive_roots:
            s = [x + y for x, y in zip(s, b)]
        return tuple(Fraction(x, 2) for x in s)

    @cached_property
    def components(self) -> list[list[int]]:
        """Connected components of the Dynkin diagram, as sorted index lists."""
        r = self.ss_rank
        seen = [False] * r
        comps = []
        for i in range(r):
            if seen[i]:
                continue
            stack, comp = [i], []
            seen[i] = True
            while stack:
                a = stack.pop()
                comp.append(a)
                for b in range(r):
                    if not seen[b] and self.cartan[a][b] != 0:
                        seen[b] = True
                        stack.append(b)
            comps.append(sorted(comp))
        return sorted(comps)

    @cached_property
    def highest_roots(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """(highest root, its coroot) for each component, in component order."""
        out = []
        for comp in self.components:
            best = None
            for b, c, co in self._root_system:
                if all(co[j] == 0 for j in range(self.ss_rank) if j not in comp):
                    if best is None or sum(co) > sum(best[2]):
                        best = (b, c, co)
            out.append((best[0], best[1]))
        return out

    # finite Weyl group as matrices on Y

    def simple_reflection_matrix(self, i: int) -> L.Mat:
        n = self.rank
        a, ac = self.simple_roots[i], self.simple_coroots[i]
        return tuple(tuple(int(r == c) - ac[r] * a[c] for c in range(n)) for r in range(n))

    def act_on_root(self, A: L.Mat, b: Sequence[int]) -> tuple:
        """Image of a character under the Weyl element with matrix A on Y."""
        return L.mat_vec(L.inv_transpose(A), b)

    def reduced_word(self, A: L.Mat) -> tuple[int, ...]:
        """Reduced word (i1, ..., ik) with A = s_i1 ... s_ik."""
        word = []
        cur = A
        for _ in range(len(self.positive_roots) + 1):
            for i in range(self.ss_rank):
                if not self.is_positive_root(self.act_on_root(cur, self.simple_roots[i])):
                    word.append(i)
                    cur = L.mat_mul(cur, self.simple_reflection_matrix(i))
                    break
            else:
                if cur != L.identity(self.rank):
                    raise DatumError("matrix is not in the Weyl group")
                return tuple(reversed(word))
        raise DatumError("matrix is not in the Weyl group")

    def finite_length(self, A: L.Mat) -> int:
        return sum(
            1 for b in self.positive_roots if not self.is_positive_root(self.act_on_root(A, b))
        )

    @cached_property
    def w0(self) -> L.Mat:
        cur = L.identity(self.rank)
        changed = True
        while changed:
            changed = False
            for i in range(self.ss_rank):
                if self.is_positive_root(self.act_on_root(cur, self.simple_roots[i])):
                    cur = L.mat_mul(cur, self.simple_reflection_matrix(i))
                    changed = True
                    break
        return cur

    @cached_property
    def weyl_group(self) -> list[L.Mat]:
        """All finite Weyl elements, sorted by (length, matrix)."""
        seen = {L.identity(self.rank)}
        frontier = [L.identity(self.rank)]
        while frontier:
            nxt = []
            for A in frontier:
                for i in range(self.ss_rank):
                    B = L.mat_mul(A, self.simple_reflection_matrix(i))
                    if B not in seen:
                        seen.add(B)
                        nxt.append(B)
            frontier = nxt
        return sorted(seen, key=lambda A: (self.finite_length(A), A))

    @cached_property
    def coroot_rank_full(self) -> bool:
        """True iff the coroots span Y over Q (so Y/Q is finite)."""
        return len(L.lattice_basis(self.simple_coroots, self.rank)) == self.rank and self.ss_rank == self.rank

    def in_coroot_lattice(self, y: Sequence[int]) -> bool:
        c = L.rational_coords(self.simple_coroots, y)
        return c is not None and all(x.denominator == 1 for x in c)


@dataclass(frozen=True)
class InvolutionDatum:
    theta_on_cochar: tuple[tuple[int, ...], ...]
    pinning_signs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta_on_cochar", L.as_mat(self.theta_on_cochar))
        object.__setattr__(self, "pinning_signs", tuple(int(s) for s in self.pinning_signs))

    @property
    def theta(self) -> L.Mat:
        return self.theta_on_cochar

    @cached_property
    def theta_on_char(self) -> L.Mat:
        return L.transpose(self.theta_on_cochar)

    def act_y(self, y):
        return L.mat_vec(self.theta_on_cochar, y)

    def act_x(self, x):
        return L.mat_vec(self.theta_on_char, x)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    simple_root_action: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_bad(self):
        if self.violations:
            raise DatumError("; ".join(self.violations))


def simple_root_permutation(datum: BasedRootDatum, inv: InvolutionDatum) -> tuple[int, ...] | None:
    idx = {a: i for i, a in enumerate(datum.simple_roots)}
    perm = []
    for a in datum.simple_roots:
        j = idx.get(inv.act_x(a))
        if j is None:
            return None
        perm.append(j)
    return tuple(perm)


def validate(datum: BasedRootDatum, inv: InvolutionDatum) -> ValidationReport:
    rep = ValidationReport()
    n = datum.rank
    rep.violations.extend(datum.cartan_problems())
    if not rep.violations:
        try:
            datum.positive_roots
        except DatumError as e:
            rep.violations.append(str(e))
    th = inv.theta_on_cochar
    if len(th) != n or any(len(r) != n for r in th):
        rep.violations.append("theta has the wrong shape")
        return rep
    if L.mat_mul(th, th) != L.identity(n):
        rep.violations.append("theta is not involutive")
    if len(inv.pinning_signs) != datum.ss_rank or any(s not in (1, -1) for s in inv.pinning_signs):
        rep.violations.append("pinning signs must be one value in {1, -1} per simple root")
    perm = simple_root_permutation(datum, inv)
    if perm is None:
        rep.violations.append("theta is not Borel-preserving: it does not permute the simple roots")
        return rep
    rep.simple_root_action = perm
    for i, j in enumerate(perm):
        if inv.act_y(datum.simple_coroots[i]) != datum.simple_coroots[j]:
            rep.violations.append(f"theta does not send coroot {i} to coroot {j}")
        if len(inv.pinning_signs) == datum.ss_rank and inv.pinning_signs[i] != inv.pinning_signs[j]:
            rep.violations.append(f"pinning signs of the swapped roots {i},{j} differ")
    if rep.violations:
        return rep
    highs = [h for h, _ in datum.highest_roots]
    for h in highs:
        if inv.act_x(h) not in highs:
            rep.violations.append("theta does not permute the simple affine roots")
    return rep


def rho_pair(datum: BasedRootDatum, lam: Sequence[int]):
    v = L.dot(datum.rho, lam)
    return int(v) if v.denominator == 1 else v


def in_lambda_s(inv: InvolutionDatum, lam: Sequence[int], theta: L.Mat | None = None) -> bool:
    th = theta if theta is not None else inv.theta_on_cochar
    return L.mat_vec(th, lam) == tuple(-x for x in lam)


def coroot_coords(datum: BasedRootDatum, y: Sequence[int]) -> tuple[Fraction, ...] | None:
    return L.rational_coords(datum.simple_coroots, y)


def dominance_leq(datum: BasedRootDatum, inv: InvolutionDatum, mu, lam, theta: L.Mat | None = None) -> bool:
    """mu <= lam iff lam - mu is a non-negative integer combination of simple coroots.

    ``theta`` overrides the matrix used for the membership check.
    """
    for v in (mu, lam):
        if not in_lambda_s(inv, v, theta):
            raise DatumError(f"not in Lambda_S: {tuple(v)}")
    c = coroot_coords(datum, L.vsub(lam, mu))
    if c is None:
        return False
    return all(x.denominator == 1 and x >= 0 for x in c)


@dataclass(frozen=True)
class LambdaS:
    basis: tuple[tuple[int, ...], ...]
    q_basis: tuple[tuple[int, ...], ...]
    quotient_invariants: tuple[int, ...]

    @property
    def connected(self) -> bool:
        return not self.quotient_invariants


def lambda_s_basis(datum: BasedRootDatum, inv: InvolutionDatum, theta: L.Mat | None = None) -> LambdaS:
    n = datum.rank
    th = theta if theta is not None else inv.theta_on_cochar
    one_plus = L.mat_add(L.identity(n), th)
    basis = L.int_kernel(one_plus, n)
    k = len(basis)
    if not basis:
        return LambdaS((), (), ())
    cor = datum.simple_coroots
    # Lambda_S cap Q: kernel of [B | -C]
    big = tuple(
        tuple(b[r] for b in basis) + tuple(-c[r] for c in cor) for r in range(n)
    )
    kern = L.int_kernel(big, k + len(cor))
    gens = []
    for v in kern:
        a = v[:k]
        gens.append(tuple(sum(a[i] * basis[i][r] for i in range(k)) for r in range(n)))
    q_basis = L.lattice_basis(gens, n)
    cols = [tuple(int(x) for x in L.rational_coords(basis, qb)) for qb in q_basis]
    mat = [[col[r] for col in cols] for r in range(k)]
    inv_f = L.smith_invariants(mat, k, len(cols))
    quotient = tuple(sorted(d for d in inv_f if d != 1))
    return LambdaS(tuple(basis), tuple(q_basis), quotient)


@dataclass(frozen=True)
class PairSpec:
    name: str
    datum: BasedRootDatum
    inv: InvolutionDatum
    group_case: bool

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "rank": self.datum.rank,
            "simple_roots": [list(v) for v in self.datum.simple_roots],
            "simple_coroots": [list(v) for v in self.datum.simple_coroots],
            "theta_on_cocharacters": [list(r) for r in self.inv.theta_on_cochar],
            "pinning_signs": list(self.inv.pinning_signs),
            "group_case": self.group_case,
        }


_SPEC_FIELDS = ("rank", "simple_roots", "simple_coroots", "theta_on_cocharacters", "pinning_signs", "group_case", "name")


def pair_spec_from_json(obj: dict) -> PairSpec:
    missing = [f for f in _SPEC_FIELDS if f not in obj]
    if missing:
        raise DatumError(f"pair spec is missing fields {missing}")
    datum = BasedRootDatum(
        int(obj["rank"]),
        obj["simple_roots"],
        obj["simple_coroots"],
        obj.get("cartan_type_label", ""),
    )
    inv = InvolutionDatum(obj["theta_on_cocharacters"], obj["pinning_signs"])
    return PairSpec(str(obj["name"]), datum, inv, bool(obj["group_case"]))


PRESET_DIR = Path(__file__).parent / "presets"


def preset_names() -> list[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.json"))


def load_pair_spec(name_or_path: str) -> PairSpec:
    p = Path(name_or_path)
    if not p.exists():
        p = PRESET_DIR / f"{name_or_path}.json"
    if not p.exists():
        raise FileNotFoundError(name_or_path)
    return pair_spec_from_json(json.loads(p.read_text()))
