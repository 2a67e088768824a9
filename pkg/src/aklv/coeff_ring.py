"""Laurent polynomials in q^(1/2) with integer coefficients.

Exponents are stored in half-steps: the key 2 means q, the key 1 means q^(1/2).
"""

from __future__ import annotations

from typing import Iterable, Mapping


class WindowViolation(ValueError):
    """Raised by kl_extract when its input is not of the form P - q^d bar(P)."""


class HalfLaurent:
    __slots__ = ("_c", "_hash")

    def __init__(self, coeffs: Mapping[int, int] | None = None):
        c = {}
        if coeffs:
            for e, v in coeffs.items():
                if v:
                    c[int(e)] = int(v)
        self._c = c
        self._hash = None

    # constructors

    @classmethod
    def const(cls, n: int) -> "HalfLaurent":
        return cls({0: n})

    @classmethod
    def q_pow(cls, half_exp: int, coeff: int = 1) -> "HalfLaurent":
        """coeff * q^(half_exp/2)."""
        return cls({half_exp: coeff})

    @classmethod
    def from_q_poly(cls, coeffs: Iterable[int]) -> "HalfLaurent":
        """Build sum_j coeffs[j] q^j."""
        return cls({2 * j: a for j, a in enumerate(coeffs)})

    @classmethod
    def from_pairs(cls, pairs: Iterable[Iterable[int]]) -> "HalfLaurent":
        out: dict[int, int] = {}
        for e, v in pairs:
            out[int(e)] = out.get(int(e), 0) + int(v)
        return cls(out)

    # views

    @property
    def coeffs(self) -> dict[int, int]:
        return dict(self._c)

    def items(self):
        return sorted(self._c.items())

    def pairs(self) -> list[list[int]]:
        """Serialized form: ascending [half-exponent, coefficient] pairs."""
        return [[e, v] for e, v in sorted(self._c.items())]

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self):
        return bool(self._c)

    def coeff(self, half_exp: int) -> int:
        return self._c.get(half_exp, 0)

    def min_exp(self) -> int:
        return min(self._c)

    def max_exp(self) -> int:
        return max(self._c)

    def is_q_polynomial(self) -> bool:
        """True iff only non-negative integral powers of q occur."""
        return all(e >= 0 and e % 2 == 0 for e in self._c)

    def q_poly_coeffs(self) -> list[int]:
        """Coefficient list [a_0, a_1, ...] of a polynomial in q."""
        if not self.is_q_polynomial():
            raise ValueError(f"not a polynomial in q: {self}")
        if not self._c:
            return []
        out = [0] * (self.max_exp() // 2 + 1)
        for e, v in self._c.items():
            out[e // 2] = v
        return out

    def evaluate_at_one(self) -> int:
        return sum(self._c.values())

    # ring operations

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        c = dict(self._c)
        for e, v in other._c.items():
            c[e] = c.get(e, 0) + v
        return HalfLaurent(c)

    __radd__ = __add__

    def __neg__(self):
        return HalfLaurent({e: -v for e, v in self._c.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        c: dict[int, int] = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                c[e1 + e2] = c.get(e1 + e2, 0) + v1 * v2
        return HalfLaurent(c)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are only defined for monomials; use q_pow")
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def shift(self, half_steps: int) -> "HalfLaurent":
        """Multiply by q^(half_steps/2)."""
        return HalfLaurent({e + half_steps: v for e, v in self._c.items()})

    def bar(self) -> "HalfLaurent":
        return HalfLaurent({-e: v for e, v in self._c.items()})

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self._c.items())))
        return self._hash

    def __repr__(self):
        return f"HalfLaurent({self})"

    def __str__(self):
        if not self._c:
            return "0"
        parts = []
        for e, v in sorted(self._c.items()):
            if e == 0:
                mono = ""
            elif e == 2:
                mono = "q"
            elif e % 2 == 0:
                mono = f"q^{e // 2}"
            else:
                mono = f"q^({e}/2)"
            if not mono:
                parts.append(str(v))
            elif v == 1:
                parts.append(mono)
            elif v == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{v}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _coerce(x):
    if isinstance(x, HalfLaurent):
        return x
    if isinstance(x, int):
        return HalfLaurent.const(x)
    return NotImplemented


ZERO = HalfLaurent()
ONE = HalfLaurent.const(1)
Q = HalfLaurent.q_pow(2)
Q_INV = HalfLaurent.q_pow(-2)


def arith(f: HalfLaurent, g: HalfLaurent, op: str) -> HalfLaurent:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown op {op!r}")


def bar(f: HalfLaurent) -> HalfLaurent:
    return f.bar()


def kl_extract(g: HalfLaurent, d: int) -> HalfLaurent:
    """Recover P from g = P - q^d bar(P), where P is a q-polynomial of degree <= (d-1)/2."""
    if d < 1:
        raise ValueError("d must be positive")
    if g and (g.min_exp() < 0 or g.max_exp() > 2 * d):
        raise WindowViolation(f"support of {g} outside [0, {d}]")
    # half-exponents 0..d-1 correspond to q-degrees 0..(d-1)/2
    p = HalfLaurent({e: v for e, v in g.coeffs.items() if e < d})
    if p - p.bar().shift(2 * d) != g:
        raise WindowViolation(f"{g} is not of the form P - q^{d} bar(P)")
    return p
