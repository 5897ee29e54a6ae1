"""Exact rational combinations of logarithms of primes.

Every entropy, index logarithm and invariant in this package is a finite sum
sum_p c_p * ln(p) with rational coefficients c_p.  Such values add, subtract
and scale exactly, and equality is decidable coefficient-wise (the ln(p) are
linearly independent over the rationals).  Floats appear only on display.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import ShapeError, TreeGroupsError


def factorize(n: int) -> dict:
    """Prime factorization of a positive integer by trial division.

    The integers factored here are orbit sizes, cell counts and their
    divisors, which are small or smooth; trial division is adequate.
    """
    if n <= 0:
        raise TreeGroupsError(f"cannot factorize nonpositive integer {n}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


class LogQuantity:
    """An exact value sum_p coeffs[p] * ln(p), with Fraction coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        clean: dict[int, Fraction] = {}
        for p, c in (coeffs or {}).items():
            c = Fraction(c)
            if c:
                clean[int(p)] = c
        self.coeffs = dict(sorted(clean.items()))

    @classmethod
    def zero(cls) -> "LogQuantity":
        return cls()

    @classmethod
    def of_integer(cls, n: int) -> "LogQuantity":
        """log(n) for an integer n >= 1."""
        if n < 1:
            raise TreeGroupsError(f"log of integer requires n >= 1, got {n}")
        return cls({p: Fraction(e) for p, e in factorize(n).items()})

    @classmethod
    def of_fraction(cls, q: Fraction) -> "LogQuantity":
        """log(q) for a positive rational q."""
        q = Fraction(q)
        if q <= 0:
            raise TreeGroupsError(f"log of nonpositive rational {q}")
        return cls.of_integer(q.numerator) - cls.of_integer(q.denominator)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LogQuantity") -> "LogQuantity":
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out.get(p, 0) + c
        return LogQuantity(out)

    def __sub__(self, other: "LogQuantity") -> "LogQuantity":
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out.get(p, 0) - c
        return LogQuantity(out)

    def __neg__(self) -> "LogQuantity":
        return LogQuantity({p: -c for p, c in self.coeffs.items()})

    def __rmul__(self, scalar) -> "LogQuantity":
        s = Fraction(scalar)
        return LogQuantity({p: s * c for p, c in self.coeffs.items()})

    __mul__ = __rmul__

    def __eq__(self, other) -> bool:
        return isinstance(other, LogQuantity) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs.items()))

    def to_float(self) -> float:
        return float(sum(float(c) * math.log(p) for p, c in self.coeffs.items()))

    def in_base(self, base: int) -> float:
        """Numeric value of the quantity measured in logarithms base ``base``."""
        if base <= 1:
            raise ShapeError(f"display base must exceed 1, got {base}")
        return self.to_float() / math.log(base)

    def as_rational_in_base(self, base: int):
        """Exact value as a multiple of log(base), or None.

        Returns the Fraction t with self == t * log(base) when the quantity is
        a rational multiple of log(base), else None.
        """
        if base <= 1:
            raise ShapeError(f"display base must exceed 1, got {base}")
        blog = LogQuantity.of_integer(base)
        if self.is_zero():
            return Fraction(0)
        if set(self.coeffs) != set(blog.coeffs):
            return None
        items = iter(self.coeffs.items())
        p0, c0 = next(items)
        t = c0 / blog.coeffs[p0]
        for p, c in items:
            if c != t * blog.coeffs[p]:
                return None
        return t

    def proportion_to(self, other: "LogQuantity"):
        """The Fraction t with self == t * other, or None if not proportional."""
        if other.is_zero():
            return None
        if self.is_zero():
            return Fraction(0)
        if set(self.coeffs) != set(other.coeffs):
            return None
        items = iter(self.coeffs.items())
        p0, c0 = next(items)
        t = c0 / other.coeffs[p0]
        for p, c in items:
            if c != t * other.coeffs[p]:
                return None
        return t

    def to_json(self, display_base=None) -> dict:
        out = {
            "coeffs": {str(p): f"{c.numerator}/{c.denominator}" for p, c in self.coeffs.items()},
            "approx": self.to_float(),
        }
        if display_base is not None:
            out["display_base"] = display_base
            t = self.as_rational_in_base(display_base)
            out["display_value"] = (
                f"{t.numerator}/{t.denominator}" if t is not None else self.in_base(display_base)
            )
        return out

    def __repr__(self):
        if not self.coeffs:
            return "LogQuantity(0)"
        terms = " + ".join(f"({c})*log({p})" for p, c in self.coeffs.items())
        return f"LogQuantity({terms})"


def shannon_entropy(measures) -> LogQuantity:
    """Exact Shannon entropy -sum mu_i log(mu_i) of a rational distribution.

    Zero-mass cells contribute nothing; the masses must be nonnegative and
    sum to one.
    """
    total = Fraction(0)
    out = LogQuantity.zero()
    for mu in measures:
        mu = Fraction(mu)
        if mu < 0:
            raise TreeGroupsError(f"negative cell measure {mu}")
        total += mu
        if mu:
            out = out - mu * LogQuantity.of_fraction(mu)
    if total != 1:
        raise TreeGroupsError(f"cell measures sum to {total}, expected 1")
    return out
