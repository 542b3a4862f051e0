"""Exact arithmetic in the ordered field Q(sqrt 2).

A value is stored as a pair of rationals (a, b) meaning a + b*sqrt(2).
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Union

import numpy as np

SQRT2 = math.sqrt(2.0)

Number = Union[int, Fraction, "Scalar"]


@total_ordering
class Scalar:
    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = a if isinstance(a, Fraction) else Fraction(a)
        self.b = b if isinstance(b, Fraction) else Fraction(b)

    @staticmethod
    def coerce(x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return Scalar(x)
        if isinstance(x, (np.integer,)):
            return Scalar(int(x))
        raise TypeError(f"cannot coerce {type(x).__name__} to an exact scalar")

    # arithmetic
    def __add__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return Scalar(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return Scalar(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return Scalar(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conjugate(self) -> "Scalar":
        return Scalar(self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - 2 * self.b * self.b

    def inverse(self) -> "Scalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt2)")
        return Scalar(self.a / n, -self.b / n)

    def __truediv__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out, base = Scalar(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # ordering
    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with 2 b^2
        d = a * a - 2 * b * b
        return sa if d > 0 else (sb if d < 0 else 0)

    def __eq__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            if isinstance(other, float):
                return float(self) == other
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        if isinstance(other, float):
            return float(self) < other
        return (self - Scalar.coerce(other)).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return float(self.a) + float(self.b) * SQRT2

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt2"
        sgn = "+" if self.b > 0 else "-"
        return f"{self.a}{sgn}{abs(self.b)}*sqrt2"

    def to_json(self) -> dict:
        return {"num": self.a.numerator, "den": self.a.denominator,
                "sqrt2num": self.b.numerator, "sqrt2den": self.b.denominator}

    @staticmethod
    def from_json(d) -> "Scalar":
        if isinstance(d, (int, float)) and not isinstance(d, bool):
            if isinstance(d, int):
                return Scalar(d)
            raise TypeError("float entry in exact table")
        return Scalar(Fraction(d["num"], d.get("den", 1)),
                      Fraction(d.get("sqrt2num", 0), d.get("sqrt2den", 1)))


ZERO = Scalar(0)
ONE = Scalar(1)
ROOT2 = Scalar(0, 1)
HALF = Scalar(Fraction(1, 2))


def parse_scalar(text: str) -> Scalar:
    """Parse strings like '3/4', '-1/8+1/16*sqrt2' or 'sqrt2'."""
    s = text.replace(" ", "").replace("√2", "*sqrt2").replace("**sqrt2", "*sqrt2")
    if not s:
        raise ValueError("empty scalar")
    total = Scalar(0)
    # split into signed terms
    terms, cur = [], ""
    for i, ch in enumerate(s):
        if ch in "+-" and i > 0 and s[i - 1] not in "e/*":
            terms.append(cur)
            cur = ch
        else:
            cur += ch
    terms.append(cur)
    for t in terms:
        if not t:
            continue
        if "sqrt2" in t:
            coef = t.replace("sqrt2", "").rstrip("*")
            if coef in ("", "+"):
                c = Fraction(1)
            elif coef == "-":
                c = Fraction(-1)
            else:
                c = Fraction(coef)
            total = total + Scalar(0, c)
        else:
            total = total + Scalar(Fraction(t))
    return total


def snap(x: float, max_den: int = 128, tol: float = 1e-9, max_sqrt2: float = 4.0) -> Scalar | None:
    """Find p/d + q/d*sqrt2 within tol of x, smallest denominator first.

    Returns None when no such value exists.
    """
    if not math.isfinite(x):
        return None
    for d in range(1, max_den + 1):
        qmax = int(max_sqrt2 * d)
        qs = np.arange(-qmax, qmax + 1)
        target = x * d - qs * SQRT2
        ps = np.rint(target)
        err = np.abs(ps - target) / d
        hits = np.nonzero(err <= tol)[0]
        if hits.size:
            best = hits[np.argmin(np.abs(qs[hits]))]
            return Scalar(Fraction(int(ps[best]), d), Fraction(int(qs[best]), d))
    return None


def to_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction, np.integer)):
        return Scalar.coerce(x)
    s = snap(float(x))
    if s is None:
        raise ValueError(f"{x!r} has no small representation in Q(sqrt2)")
    return s
