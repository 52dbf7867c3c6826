"""Exact arithmetic in Q(sqrt(d)) for a square-free d >= 1, plus planar
vector helpers (cross products, sector tests) used by the flat geometry.

Numbers are a + b*sqrt(d) with Fraction components; comparisons are exact
sign computations, never floating point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Tuple


class QuadError(ValueError):
    pass


class QD:
    """Element a + b sqrt(d) of Q(sqrt d)."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 1):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = int(d)
        if self.d < 1:
            raise QuadError("d must be >= 1")
        if self.d == 1 and self.b:
            self.a += self.b
            self.b = Fraction(0)

    def _coerce(self, other) -> "QD":
        if isinstance(other, QD):
            if other.d != self.d and other.b and self.b:
                raise QuadError(f"mixed fields d={self.d} vs d={other.d}")
            return QD(other.a, other.b, self.d if self.b or not other.b
                      else other.d)
        return QD(other, 0, self.d)

    def __add__(self, other):
        o = self._coerce(other)
        return QD(self.a + o.a, self.b + o.b, max(self.d, o.d))

    __radd__ = __add__

    def __neg__(self):
        return QD(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        d = max(self.d, o.d)
        return QD(self.a * o.a + self.b * o.b * d,
                  self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def inverse(self) -> "QD":
        n = self.a * self.a - self.b * self.b * self.d
        if n == 0:
            raise QuadError("division by zero")
        return QD(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def sign(self) -> int:
        """Exact sign of a + b sqrt(d)."""
        a, b, d = self.a, self.b, self.d
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = a * a, b * b * d
        if a > 0:  # b < 0
            return 1 if lhs > rhs else (-1 if lhs < rhs else 0)
        return -1 if lhs > rhs else (1 if lhs < rhs else 0)

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except QuadError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        return (self - self._coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - self._coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - self._coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - self._coerce(other)).sign() >= 0

    def __hash__(self):
        return hash((self.a, self.b if self.b else Fraction(0)))

    def __float__(self):
        return float(self.a) + float(self.b) * (self.d ** 0.5)

    def to_string(self) -> str:
        """Serialize like "3/2+1/2*r" with r = sqrt(d)."""
        if self.b == 0:
            return str(self.a)
        bpart = "r" if self.b == 1 else ("-r" if self.b == -1
                                         else f"{self.b}*r")
        if self.a == 0:
            return bpart
        sep = "+" if self.b > 0 else ""
        return f"{self.a}{sep}{bpart}"

    @staticmethod
    def parse(text: str, d: int) -> "QD":
        """Inverse of to_string."""
        text = text.strip().replace(" ", "")
        if "r" not in text:
            return QD(Fraction(text), 0, d)
        # split into rational part and r-coefficient
        a = Fraction(0)
        b_str = text
        for i in range(1, len(text)):
            if text[i] in "+-" and text[i - 1] not in "+-*/" and \
                    "r" in text[i:]:
                a = Fraction(text[:i])
                b_str = text[i:]
                break
        b_str = b_str.replace("*r", "").replace("r", "")
        if b_str in ("", "+"):
            b = Fraction(1)
        elif b_str == "-":
            b = Fraction(-1)
        else:
            b = Fraction(b_str)
        return QD(a, b, d)

    def __repr__(self):
        return f"QD({self.to_string()}, d={self.d})"


Vec = Tuple[QD, QD]


def vec(x, y, d: int = 1) -> Vec:
    return (x if isinstance(x, QD) else QD(x, 0, d),
            y if isinstance(y, QD) else QD(y, 0, d))


def vadd(u: Vec, v: Vec) -> Vec:
    return (u[0] + v[0], u[1] + v[1])


def vsub(u: Vec, v: Vec) -> Vec:
    return (u[0] - v[0], u[1] - v[1])


def vneg(u: Vec) -> Vec:
    return (-u[0], -u[1])


def vscale(c, u: Vec) -> Vec:
    return (u[0] * c, u[1] * c)


def cross(u: Vec, v: Vec) -> QD:
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Vec, v: Vec) -> QD:
    return u[0] * v[0] + u[1] * v[1]


def norm2(u: Vec) -> QD:
    return dot(u, u)


def is_zero_vec(u: Vec) -> bool:
    return u[0].is_zero() and u[1].is_zero()


def parallel(u: Vec, v: Vec) -> bool:
    return cross(u, v).is_zero()


def same_ray(u: Vec, v: Vec) -> bool:
    """Parallel with positive ratio."""
    return parallel(u, v) and dot(u, v).sign() > 0


def in_open_sector(u: Vec, v: Vec, w: Vec) -> bool:
    """Is w strictly inside the sector from u to v (counterclockwise,
    assumed of angle < pi)?"""
    return cross(u, w).sign() > 0 and cross(w, v).sign() > 0


def rot90(u: Vec) -> Vec:
    """Rotate by +90 degrees (counterclockwise)."""
    return (-u[1], u[0])
