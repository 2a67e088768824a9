"""Independent reference computations.

Nothing here imports the orbit pipeline: the Kazhdan-Lusztig oracle works with affine
permutations, the Kostka-Foulkes oracle with a Cartan matrix and Dynkin labels, and the
GL2/O2 sequences with plain fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

from .coeff_ring import ONE, ZERO, HalfLaurent

# affine permutations


@dataclass(frozen=True, order=True)
class AffPerm:
    """Window [f(1), ..., f(n)] of a bijection f of Z with f(i + n) = f(i) + n."""

    window: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.window)

    def __call__(self, i: int) -> int:
        n = self.n
        q, r = divmod(i - 1, n)
        return self.window[r] + q * n


def aff_identity(n: int) -> AffPerm:
    return AffPerm(tuple(range(1, n + 1)))


def aff_length(f: AffPerm) -> int:
    n = f.n
    w = f.window
    return sum(abs((w[j] - w[i]) // n) for i in range(n) for j in range(i + 1, n))


def left_mul(i: int, f: AffPerm) -> AffPerm:
    """s_i f: swap the values congruent to i and i + 1 mod n."""
    n = f.n

    def s(x):
        r = x % n
        if r == i % n:
            return x + 1
        if r == (i + 1) % n:
            return x - 1
        return x

    return AffPerm(tuple(s(x) for x in f.window))


def right_mul(f: AffPerm, i: int) -> AffPerm:
    """f s_i: swap positions i and i + 1."""
    n = f.n
    if i == 0:
        w = list(f.window)
        first, last = w[0], w[-1]
        w[0], w[-1] = last - n, first + n
        return AffPerm(tuple(w))
    w = list(f.window)
    w[i - 1], w[i] = w[i], w[i - 1]
    return AffPerm(tuple(w))


def from_word(n: int, word) -> AffPerm:
    f = aff_identity(n)
    for i in word:
        f = right_mul(f, i)
    return f


def enumerate_affine(n: int, bound: int) -> list[AffPerm]:
    seen = {aff_identity(n)}
    frontier = [aff_identity(n)]
    out = [aff_identity(n)]
    for _ in range(bound):
        nxt = []
        for f in frontier:
            for i in range(n):
                g = right_mul(f, i)
                if g not in seen and aff_length(g) == aff_length(f) + 1:
                    seen.add(g)
                    nxt.append(g)
        nxt.sort(key=lambda g: g.window)
        out.extend(nxt)
        frontier = nxt
    return out


@dataclass
class KLOracleTable:
    n: int
    elements: list
    length: dict
    R: dict = field(default_factory=dict)
    P: dict = field(default_factory=dict)

    def p(self, x, w) -> HalfLaurent:
        return self.P.get((x, w), ZERO)

    def r(self, x, w) -> HalfLaurent:
        return self.R.get((x, w), ZERO)

    def leq(self, x, w) -> bool:
        return (x, w) in self.P


Q = HalfLaurent.q_pow(2)


def kl_classical(n: int, bound: int) -> KLOracleTable:
    """R and P for all pairs of elements of length <= bound in the affine Weyl group of type A~_{n-1}."""
    els = enumerate_affine(n, bound)
    ln = {f: aff_length(f) for f in els}
    tab = KLOracleTable(n, els, ln)
    e = aff_identity(n)
    by_len: dict[int, list] = {}
    for f in els:
        by_len.setdefault(ln[f], []).append(f)

    def descent(w):
        for i in range(n):
            v = left_mul(i, w)
            if ln.get(v, ln[w] + 1) < ln[w] and aff_length(v) < ln[w]:
                return i, v
        raise AssertionError("no left descent")

    for w in els:
        if w == e:
            tab.R[(e, e)] = ONE
            tab.P[(e, e)] = ONE
            continue
        s, v = descent(w)
        lw = ln[w]
        for x in els:
            if ln[x] > lw:
                break
            sx = left_mul(s, x)
            sx_lower = aff_length(sx) < ln[x]
            # R
            if sx_lower:
                r = tab.r(sx, v)
            else:
                r = (Q - 1) * tab.r(x, v) + Q * tab.r(sx, v)
            if r:
                tab.R[(x, w)] = r
            # P
            c = 1 if sx_lower else 0
            p = tab.p(sx, v).shift(2 * (1 - c)) + tab.p(x, v).shift(2 * c)
            for z in els:
                if ln[z] >= ln[v]:
                    break
                if ln[z] < ln[x] or aff_length(left_mul(s, z)) > ln[z]:
                    continue
                pzv = tab.p(z, v)
                if not pzv:
                    continue
                d = ln[v] - ln[z]
                if d % 2 == 0:
                    continue
                mu = pzv.coeff(d - 1)
                if mu:
                    pxz = tab.p(x, z)
                    if pxz:
                        p = p - pxz.shift(lw - ln[z]) * mu
            if p:
                tab.P[(x, w)] = p
    return tab


# Kostka-Foulkes oracle


def _positive_roots(cartan) -> list[tuple[int, ...]]:
    r = len(cartan)
    simple = [tuple(1 if j == i else 0 for j in range(r)) for i in range(r)]
    roots = set(simple)
    layer = list(simple)
    while layer:
        nxt = []
        for b in layer:
            for i in range(r):
                pair = sum(b[j] * cartan[i][j] for j in range(r))
                p = 0
                c = list(b)
                while True:
                    c[i] -= 1
                    if tuple(c) in roots:
                        p += 1
                    else:
                        break
                if p - pair > 0:
                    nb = list(b)
                    nb[i] += 1
                    nb = tuple(nb)
                    if nb not in roots:
                        roots.add(nb)
                        nxt.append(nb)
        layer = nxt
    return sorted(roots, key=lambda b: (sum(b), b))


def _solve(cartan, labels) -> tuple[Fraction, ...]:
    """Root coordinates c with sum_j cartan[i][j] c_j = labels[i]."""
    r = len(cartan)
    m = [[Fraction(cartan[i][j]) for j in range(r)] + [Fraction(labels[i])] for i in range(r)]
    for col in range(r):
        piv = next(k for k in range(col, r) if m[k][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        for k in range(r):
            if k != col and m[k][col] != 0:
                f = m[k][col] / m[col][col]
                m[k] = [a - f * b for a, b in zip(m[k], m[col])]
    return tuple(m[i][r] / m[i][i] for i in range(r))


def _weyl_orbit_signed(cartan, lam) -> list[tuple[tuple[int, ...], int]]:
    r = len(cartan)
    start = tuple(lam)
    seen = {start: 1}
    layer = [start]
    while layer:
        nxt = []
        for v in layer:
            for i in range(r):
                w = tuple(v[j] - v[i] * cartan[j][i] for j in range(r))
                if w not in seen:
                    seen[w] = -seen[v]
                    nxt.append(w)
        layer = nxt
    return sorted(seen.items())


def kostant_q(cartan, coords) -> HalfLaurent:
    """sum over ways of writing coords as a sum of positive roots of q^(number of roots)."""
    roots = _positive_roots(cartan)

    @lru_cache(maxsize=None)
    def count(c: tuple, k: int) -> HalfLaurent:
        if all(x == 0 for x in c):
            return ONE
        if k == len(roots) or any(x < 0 for x in c):
            return ZERO
        out = count(c, k + 1)
        b = roots[k]
        cur = c
        j = 0
        while True:
            cur = tuple(x - y for x, y in zip(cur, b))
            j += 1
            if any(x < 0 for x in cur):
                break
            out = out + count(cur, k + 1).shift(2 * j)
        return out

    return count(tuple(coords), 0)


def q_weight_mult(cartan, lam, mu) -> HalfLaurent:
    """Lusztig's q-analogue of the weight multiplicity of mu in V(lam); weights as Dynkin labels."""
    r = len(cartan)
    rho = (1,) * r
    lr = tuple(a + b for a, b in zip(lam, rho))
    mr = tuple(a + b for a, b in zip(mu, rho))
    out = ZERO
    for w, sign in _weyl_orbit_signed(cartan, lr):
        gamma = tuple(a - b for a, b in zip(w, mr))
        c = _solve(cartan, gamma)
        if any(x.denominator != 1 or x < 0 for x in c):
            continue
        out = out + kostant_q(cartan, tuple(int(x) for x in c)) * sign
    return out


def _symmetrizer(cartan) -> list[Fraction]:
    r = len(cartan)
    d = [None] * r
    for start in range(r):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(r):
                if j != i and cartan[i][j] != 0 and d[j] is None:
                    d[j] = d[i] * cartan[i][j] / cartan[j][i]
                    stack.append(j)
    return d


def freudenthal_mult(cartan, lam, mu) -> int:
    """Classical weight multiplicity by Freudenthal's formula."""
    r = len(cartan)
    d = _symmetrizer(cartan)
    roots = _positive_roots(cartan)

    def form(x, y):
        cx, cy = _solve(cartan, x), _solve(cartan, y)
        return sum(cx[i] * cy[j] * d[i] * cartan[i][j] for i in range(r) for j in range(r))

    def to_labels(c):
        return tuple(sum(cartan[i][j] * c[j] for j in range(r)) for i in range(r))

    root_labels = [to_labels(b) for b in roots]
    rho = (1,) * r
    lam = tuple(lam)
    lr = tuple(a + b for a, b in zip(lam, rho))
    norm = form(lr, lr)

    @lru_cache(maxsize=None)
    def m(nu: tuple) -> int:
        if nu == lam:
            return 1
        c = _solve(cartan, tuple(a - b for a, b in zip(lam, nu)))
        if any(x.denominator != 1 or x < 0 for x in c):
            return 0
        num = Fraction(0)
        for a in root_labels:
            k = 1
            while True:
                nk = tuple(x + k * y for x, y in zip(nu, a))
                ck = _solve(cartan, tuple(p - q for p, q in zip(lam, nk)))
                if any(x < 0 for x in ck):
                    break
                num += m(nk) * form(nk, a)
                k += 1
        nr = tuple(a + b for a, b in zip(nu, rho))
        den = norm - form(nr, nr)
        if den == 0:
            return 0
        val = 2 * num / den
        assert val.denominator == 1
        return int(val)

    return m(tuple(mu))


# GL2/O2 sequences


@dataclass
class GL2O2Seq:
    m: int
    lam: list[Fraction]
    mu: list[Fraction]  # mu_i as rational multiples of the formal root mu_0
    mu0_sq: int

    def mu_prod(self, i: int, j: int) -> Fraction:
        return self.mu[i] * self.mu[j] * self.mu0_sq


def gl2o2_sequences(m: int) -> GL2O2Seq:
    if m < 0:
        raise ValueError("m must be non-negative")
    n = m + 2
    lam = [Fraction(1)]
    # d^2 = s^2 + t: 2 lam_0 lam_i + sum_{0<k<i} lam_k lam_{i-k} = [i == 1]
    for i in range(1, n):
        rest = sum((lam[k] * lam[i - k] for k in range(1, i)), Fraction(0))
        lam.append(((1 if i == 1 else 0) - rest) / (2 * lam[0]))
    mu = [Fraction(1)]
    # bd = mu_0 s^(m+2): sum_{k<=i} mu_k lam_{i-k} = 0 for i >= 1
    for i in range(1, n):
        mu.append(-sum((mu[k] * lam[i - k] for k in range(i)), Fraction(0)) / lam[0])
    return GL2O2Seq(m, lam, mu, (-1) ** (m + 1))


def gl2o2_report(seq: GL2O2Seq) -> dict:
    m, n = seq.m, seq.m + 2
    lam, mu = seq.lam, seq.mu
    d_rec = all(
        sum((lam[k] * lam[i - k] for k in range(i + 1)), Fraction(0)) == (1 if i in (0, 1) else 0) for i in range(n)
    )
    bd_rec = all(sum((mu[k] * lam[i - k] for k in range(i + 1)), Fraction(0)) == (1 if i == 0 else 0) for i in range(n))
    square = all(
        sum((seq.mu_prod(k, i - k) for k in range(i + 1)), Fraction(0)) == (-1) ** (m + 1 - i) for i in range(n)
    )
    total = sum((seq.mu_prod(i, m - i) for i in range(m + 1)), Fraction(0))
    aux = all(mu[i] == sum(((-1) ** k * lam[i - k] for k in range(i + 1)), Fraction(0)) for i in range(n))
    return {
        "d_recursion": d_rec,
        "bd_recursion": bd_rec,
        "square_identity": square,
        "total": total,
        "total_is_minus_one": total == -1,
        "discriminant_proxy": -4 * total,
        "mu_from_lambda": aux,
    }


# finite KL oracle for symmetric groups, used by tests on finite sub-blocks


def finite_perm_length(p: tuple[int, ...]) -> int:
    return sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])


def symmetric_group(n: int) -> list[tuple[int, ...]]:
    return sorted(permutations(range(1, n + 1)), key=lambda p: (finite_perm_length(p), p))
