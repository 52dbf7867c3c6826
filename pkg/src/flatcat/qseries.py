"""Exact arithmetic in q^{1/2}: Laurent polynomials, rational functions with
cyclotomic-product denominators, truncated power series, the quantum
dilogarithm, and brute-force finite-field oracles.

All half-integer powers of q are stored as integer powers of t = q^{1/2}.
Denominators of rational functions are kept in the factored form
``prod_j (1 - q^j)^{e_j}`` (times a unit folded into the numerator), which is
the only shape that ever occurs in this problem domain and keeps reduction
cheap and exact.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple


class QSeriesError(ValueError):
    """Raised on invalid exact-arithmetic operations (bad inverse, bounds)."""


# ---------------------------------------------------------------------------
# Laurent polynomials in t = q^{1/2}
# ---------------------------------------------------------------------------


class LaurentQ:
    """Laurent polynomial in q^{1/2} with Fraction coefficients.

    ``coeffs`` maps the integer exponent of q^{1/2} to a nonzero Fraction.
    Instances are treated as immutable.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, Fraction] | None = None):
        clean: Dict[int, Fraction] = {}
        if coeffs:
            for k, v in coeffs.items():
                v = Fraction(v)
                if v != 0:
                    clean[int(k)] = v
        self.coeffs = clean

    # -- constructors

    @staticmethod
    def zero() -> "LaurentQ":
        return LaurentQ()

    @staticmethod
    def one() -> "LaurentQ":
        return LaurentQ({0: Fraction(1)})

    @staticmethod
    def scalar(c) -> "LaurentQ":
        return LaurentQ({0: Fraction(c)})

    @staticmethod
    def monomial(half_exp: int, c=1) -> "LaurentQ":
        """c * q^{half_exp/2}."""
        return LaurentQ({half_exp: Fraction(c)})

    @staticmethod
    def q_power(n: int, c=1) -> "LaurentQ":
        """c * q^n (integer power)."""
        return LaurentQ({2 * n: Fraction(c)})

    # -- ring structure

    def __add__(self, other: "LaurentQ") -> "LaurentQ":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            s = out.get(k, Fraction(0)) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return LaurentQ(out)

    def __neg__(self) -> "LaurentQ":
        return LaurentQ({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "LaurentQ") -> "LaurentQ":
        return self + (-other)

    def __mul__(self, other: "LaurentQ") -> "LaurentQ":
        if not self.coeffs or not other.coeffs:
            return LaurentQ()
        out: Dict[int, Fraction] = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                k = k1 + k2
                s = out.get(k, Fraction(0)) + v1 * v2
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return LaurentQ(out)

    def scale(self, c) -> "LaurentQ":
        c = Fraction(c)
        if c == 0:
            return LaurentQ()
        return LaurentQ({k: v * c for k, v in self.coeffs.items()})

    def shift(self, half_exp: int) -> "LaurentQ":
        """Multiply by q^{half_exp/2}."""
        return LaurentQ({k + half_exp: v for k, v in self.coeffs.items()})

    def __pow__(self, n: int) -> "LaurentQ":
        if n < 0:
            raise QSeriesError("negative power of a Laurent polynomial")
        result = LaurentQ.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- predicates and accessors

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.coeffs == {0: Fraction(1)}

    def is_monomial(self) -> bool:
        return len(self.coeffs) == 1

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.coeffs.values())

    def coeff(self, half_exp: int) -> Fraction:
        return self.coeffs.get(half_exp, Fraction(0))

    def min_exp(self) -> int:
        if not self.coeffs:
            raise QSeriesError("zero polynomial has no valuation")
        return min(self.coeffs)

    def max_exp(self) -> int:
        if not self.coeffs:
            raise QSeriesError("zero polynomial has no degree")
        return max(self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentQ) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    # -- substitutions

    def specialize(self, t_value) -> Fraction:
        """Evaluate at q^{1/2} = t_value (exact rational)."""
        t = Fraction(t_value)
        if t == 0:
            raise QSeriesError("cannot specialize at q^{1/2}=0 (Laurent)")
        total = Fraction(0)
        for k, v in self.coeffs.items():
            total += v * t ** k
        return total

    def specialize_q(self, q_value) -> Fraction:
        """Evaluate at q = q_value; requires integer powers of q only."""
        q = Fraction(q_value)
        total = Fraction(0)
        for k, v in self.coeffs.items():
            if k % 2:
                raise QSeriesError(
                    "half-integer power present; specialize at q^{1/2} instead")
            total += v * q ** (k // 2)
        return total

    def subst_half_power(self, k: int, sign: int = 1) -> "LaurentQ":
        """Substitute q^{1/2} -> sign * q^{k/2}."""
        out: Dict[int, Fraction] = {}
        for m, v in self.coeffs.items():
            c = v if (sign == 1 or m % 2 == 0) else -v
            key = m * k
            s = out.get(key, Fraction(0)) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return LaurentQ(out)

    # -- rendering

    def __repr__(self):
        return f"LaurentQ({self.to_string()!r})"

    def to_string(self) -> str:
        """Render like ``q^{1/2}+q^{-1/2}`` or ``2*q-1``."""
        if not self.coeffs:
            return "0"
        parts: List[str] = []
        for k in sorted(self.coeffs, reverse=True):
            v = self.coeffs[k]
            if k == 0:
                body = str(v)
            else:
                if k % 2 == 0:
                    e = k // 2
                    qpow = "q" if e == 1 else f"q^{e}" if e > 0 else f"q^{e}"
                else:
                    qpow = f"q^{{{k}/2}}"
                if v == 1:
                    body = qpow
                elif v == -1:
                    body = f"-{qpow}"
                else:
                    body = f"{v}*{qpow}"
            if parts and not body.startswith("-"):
                parts.append("+" + body)
            else:
                parts.append(body)
        return "".join(parts)


# ---------------------------------------------------------------------------
# Rational functions with factored denominators
# ---------------------------------------------------------------------------


def _divide_by_one_minus_qpow(num: LaurentQ, j: int) -> LaurentQ | None:
    """Exact quotient num / (1 - q^j), or None if not divisible."""
    if num.is_zero():
        return num
    m = 2 * j  # in t-exponent units
    lo, hi = num.min_exp(), num.max_exp()
    quot: Dict[int, Fraction] = {}
    # (1 - t^m) * s = num  =>  s_k = num_k + s_{k-m}, ascending in k.
    for k in range(lo, hi + 1):
        s = num.coeff(k) + quot.get(k - m, Fraction(0))
        if s:
            quot[k] = s
    # Division is exact iff the would-be coefficients above hi vanish.
    for k in range(hi + 1, hi + m + 1):
        if quot.get(k - m, Fraction(0)) != 0:
            return None
    return LaurentQ(quot)


def _den_poly(den: Mapping[int, int]) -> LaurentQ:
    p = LaurentQ.one()
    for j in sorted(den):
        f = LaurentQ({0: Fraction(1), 2 * j: Fraction(-1)})
        for _ in range(den[j]):
            p = p * f
    return p


class RationalQ:
    """num / prod_j (1-q^j)^{e_j} with num a LaurentQ.

    Reduction cancels factored denominator terms when the numerator is
    exactly divisible; equality falls back to cross-multiplication, so two
    representations of the same value always compare equal.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentQ, den: Mapping[int, int] | None = None,
                 reduce: bool = True):
        self.num = num
        d = {int(j): int(e) for j, e in (den or {}).items() if e}
        if any(e < 0 or j <= 0 for j, e in d.items()):
            raise QSeriesError("denominator exponents must be positive")
        self.den = d
        if reduce:
            self._reduce()

    def _reduce(self) -> None:
        if self.num.is_zero():
            self.den = {}
            return
        for j in sorted(self.den):
            while self.den.get(j, 0) > 0:
                q = _divide_by_one_minus_qpow(self.num, j)
                if q is None:
                    break
                self.num = q
                self.den[j] -= 1
                if self.den[j] == 0:
                    del self.den[j]

    # -- constructors

    @staticmethod
    def zero() -> "RationalQ":
        return RationalQ(LaurentQ.zero())

    @staticmethod
    def one() -> "RationalQ":
        return RationalQ(LaurentQ.one())

    @staticmethod
    def scalar(c) -> "RationalQ":
        return RationalQ(LaurentQ.scalar(c))

    @staticmethod
    def from_laurent(p: LaurentQ) -> "RationalQ":
        return RationalQ(p)

    # -- arithmetic

    def __add__(self, other: "RationalQ") -> "RationalQ":
        den: Dict[int, int] = {}
        for j in set(self.den) | set(other.den):
            den[j] = max(self.den.get(j, 0), other.den.get(j, 0))
        n1 = self.num * _den_poly({j: den[j] - self.den.get(j, 0)
                                   for j in den})
        n2 = other.num * _den_poly({j: den[j] - other.den.get(j, 0)
                                    for j in den})
        return RationalQ(n1 + n2, den)

    def __neg__(self) -> "RationalQ":
        return RationalQ(-self.num, self.den, reduce=False)

    def __sub__(self, other: "RationalQ") -> "RationalQ":
        return self + (-other)

    def __mul__(self, other: "RationalQ") -> "RationalQ":
        den = dict(self.den)
        for j, e in other.den.items():
            den[j] = den.get(j, 0) + e
        return RationalQ(self.num * other.num, den)

    def scale(self, c) -> "RationalQ":
        return RationalQ(self.num.scale(c), self.den, reduce=False)

    def mul_laurent(self, p: LaurentQ) -> "RationalQ":
        return RationalQ(self.num * p, self.den)

    def divide_laurent_factor(self, j: int, e: int = 1) -> "RationalQ":
        """Divide by (1-q^j)^e."""
        den = dict(self.den)
        den[j] = den.get(j, 0) + e
        return RationalQ(self.num, den)

    def inverse(self) -> "RationalQ":
        """Inverse; only defined when the numerator is a unit times a
        product of (1-q^j) factors (the only case the domain needs)."""
        if self.num.is_zero():
            raise QSeriesError("division by zero")
        num, extra_den = _unit_factor(self.num)
        inv_num = _den_poly(self.den) * num
        return RationalQ(inv_num, extra_den)

    def __pow__(self, n: int) -> "RationalQ":
        if n < 0:
            return self.inverse() ** (-n)
        out = RationalQ.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- predicates

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_laurent(self) -> bool:
        return not self.den

    def to_laurent(self) -> LaurentQ:
        if self.den:
            raise QSeriesError(
                f"value is not a Laurent polynomial: {self!r}")
        return self.num

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalQ):
            return NotImplemented
        if self.den == other.den:
            return self.num == other.num
        return self.num * _den_poly(other.den) == other.num * _den_poly(self.den)

    def __hash__(self):
        raise TypeError("RationalQ is unhashable (non-canonical form)")

    def specialize(self, t_value) -> Fraction:
        t = Fraction(t_value)
        den_val = Fraction(1)
        for j, e in self.den.items():
            f = 1 - t ** (2 * j)
            if f == 0:
                raise QSeriesError(f"pole at q^{{1/2}}={t}")
            den_val *= f ** e
        return self.num.specialize(t) / den_val

    def __repr__(self):
        if not self.den:
            return f"RationalQ({self.num.to_string()!r})"
        dstr = "*".join(
            f"(1-q^{j})^{e}" if e > 1 else f"(1-q^{j})"
            for j, e in sorted(self.den.items()))
        return f"RationalQ(({self.num.to_string()}) / {dstr})"


def _unit_factor(p: LaurentQ) -> Tuple[LaurentQ, Dict[int, int]]:
    """Write 1/p as  unit / prod(1-q^j)^{e_j}  i.e. factor p into a monomial
    unit times (1-q^j) factors.  Raises if p is not of that shape."""
    den: Dict[int, int] = {}
    work = p
    changed = True
    while not work.is_monomial():
        changed = False
        # p must contain a (1-q^j) factor; its span gives the candidates.
        span = (work.max_exp() - work.min_exp()) // 2
        for j in range(span, 0, -1):
            q = _divide_by_one_minus_qpow(work, j)
            if q is not None:
                work = q
                den[j] = den.get(j, 0) + 1
                changed = True
                break
        if not changed:
            raise QSeriesError(
                "inverse exists only for units times (1-q^j) products: "
                f"{p!r}")
    (k, c), = work.coeffs.items()
    unit_inv = LaurentQ({-k: 1 / c})
    return unit_inv, den


# ---------------------------------------------------------------------------
# Truncated multivariate power series over RationalQ
# ---------------------------------------------------------------------------


class TruncSeries:
    """Truncated power series in up to 3 commuting variables over RationalQ.

    ``caps`` gives the truncation order per variable: monomials with any
    exponent exceeding its cap are dropped.  All ring operations respect the
    truncation.
    """

    __slots__ = ("nvars", "caps", "coeffs")

    def __init__(self, nvars: int, caps: Sequence[int],
                 coeffs: Mapping[Tuple[int, ...], RationalQ] | None = None):
        if not (1 <= nvars <= 3):
            raise QSeriesError("TruncSeries supports 1 to 3 variables")
        if len(caps) != nvars or any(c < 0 for c in caps):
            raise QSeriesError("need one nonnegative cap per variable")
        self.nvars = nvars
        self.caps = tuple(int(c) for c in caps)
        clean: Dict[Tuple[int, ...], RationalQ] = {}
        if coeffs:
            for mono, c in coeffs.items():
                mono = tuple(int(e) for e in mono)
                if len(mono) != nvars or any(e < 0 for e in mono):
                    raise QSeriesError(f"bad monomial {mono}")
                if self._in_range(mono) and not c.is_zero():
                    clean[mono] = c
        self.coeffs = clean

    def _in_range(self, mono: Tuple[int, ...]) -> bool:
        return all(e <= c for e, c in zip(mono, self.caps))

    @staticmethod
    def one(nvars: int, caps: Sequence[int]) -> "TruncSeries":
        return TruncSeries(nvars, caps,
                           {(0,) * nvars: RationalQ.one()})

    @staticmethod
    def variable(i: int, nvars: int, caps: Sequence[int]) -> "TruncSeries":
        mono = tuple(1 if k == i else 0 for k in range(nvars))
        return TruncSeries(nvars, caps, {mono: RationalQ.one()})

    def _check_compat(self, other: "TruncSeries") -> None:
        if self.nvars != other.nvars or self.caps != other.caps:
            raise QSeriesError("incompatible series shapes")

    def coeff(self, mono: Tuple[int, ...] | int) -> RationalQ:
        if isinstance(mono, int):
            mono = (mono,)
        return self.coeffs.get(tuple(mono), RationalQ.zero())

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check_compat(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(m, None)
            else:
                out[m] = s
        return TruncSeries(self.nvars, self.caps, out)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.nvars, self.caps,
                           {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        self._check_compat(other)
        out: Dict[Tuple[int, ...], RationalQ] = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                if not self._in_range(m):
                    continue
                p = c1 * c2
                s = out.get(m)
                s = p if s is None else s + p
                if s.is_zero():
                    out.pop(m, None)
                else:
                    out[m] = s
        return TruncSeries(self.nvars, self.caps, out)

    def scale(self, c: RationalQ) -> "TruncSeries":
        return TruncSeries(self.nvars, self.caps,
                           {m: v * c for m, v in self.coeffs.items()})

    def inverse(self) -> "TruncSeries":
        """Multiplicative inverse; requires an invertible constant term."""
        zero_m = (0,) * self.nvars
        c0 = self.coeffs.get(zero_m)
        if c0 is None:
            raise QSeriesError("constant term is zero, no inverse")
        c0_inv = c0.inverse()
        # Order monomials by total degree and invert recursively.
        out: Dict[Tuple[int, ...], RationalQ] = {zero_m: c0_inv}
        monos = sorted(
            (m for m in itertools.product(
                *(range(c + 1) for c in self.caps)) if m != zero_m),
            key=lambda m: (sum(m), m))
        for m in monos:
            acc = RationalQ.zero()
            for m1, c1 in self.coeffs.items():
                if m1 == zero_m:
                    continue
                m2 = tuple(a - b for a, b in zip(m, m1))
                if any(e < 0 for e in m2):
                    continue
                b = out.get(m2)
                if b is not None:
                    acc = acc + c1 * b
            val = (-acc) * c0_inv
            if not val.is_zero():
                out[m] = val
        return TruncSeries(self.nvars, self.caps, out)

    def __pow__(self, n: int) -> "TruncSeries":
        if n < 0:
            return self.inverse() ** (-n)
        out = TruncSeries.one(self.nvars, self.caps)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def exp(self) -> "TruncSeries":
        """exp of a series with zero constant term."""
        zero_m = (0,) * self.nvars
        if zero_m in self.coeffs:
            raise QSeriesError("exp needs zero constant term")
        out = TruncSeries.one(self.nvars, self.caps)
        term = TruncSeries.one(self.nvars, self.caps)
        max_total = sum(self.caps)
        for n in range(1, max_total + 1):
            term = term * self
            if not term.coeffs:
                break
            out = out + term.scale(RationalQ.scalar(Fraction(1, _factorial(n))))
        return out

    def substitute(self, i: int, coeff: LaurentQ, power: int) -> "TruncSeries":
        """Substitute variable i -> coeff * (variable i)^power, power >= 1."""
        if power < 1:
            raise QSeriesError("substitution power must be >= 1")
        out: Dict[Tuple[int, ...], RationalQ] = {}
        cr = RationalQ.from_laurent(coeff)
        for m, c in self.coeffs.items():
            e = m[i]
            m2 = list(m)
            m2[i] = e * power
            m2t = tuple(m2)
            if not self._in_range(m2t):
                continue
            val = c * (cr ** e) if e else c
            s = out.get(m2t)
            s = val if s is None else s + val
            if s.is_zero():
                out.pop(m2t, None)
            else:
                out[m2t] = s
        return TruncSeries(self.nvars, self.caps, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        self._check_compat(other)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeff(k) == other.coeff(k) for k in keys)

    def __repr__(self):
        terms = ", ".join(
            f"{m}: {c!r}" for m, c in sorted(self.coeffs.items())[:6])
        more = "..." if len(self.coeffs) > 6 else ""
        return f"TruncSeries({self.nvars} vars, caps={self.caps}, {{{terms}{more}}})"


def _factorial(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


# ---------------------------------------------------------------------------
# q-combinatorics
# ---------------------------------------------------------------------------


def chi_gl(n: int) -> LaurentQ:
    """Serre polynomial of GL_n: prod_{k=0}^{n-1} (q^n - q^k); 1 for n=0."""
    if n < 0:
        raise QSeriesError("chi_gl needs n >= 0")
    out = LaurentQ.one()
    for k in range(n):
        out = out * (LaurentQ.q_power(n) - LaurentQ.q_power(k))
    return out


def qbinom(n: int, k: int) -> LaurentQ:
    """Gaussian binomial coefficient, 0 outside 0 <= k <= n."""
    if k < 0 or k > n:
        return LaurentQ.zero()
    # Pascal recurrence [n,k] = [n-1,k-1] + q^k [n-1,k]; stays polynomial.
    row: List[LaurentQ] = [LaurentQ.one()]
    for m in range(1, n + 1):
        new = [LaurentQ.one()]
        for j in range(1, m):
            new.append(row[j - 1] + row[j].shift(2 * j))
        new.append(LaurentQ.one())
        row = new
    return row[k]


def q_multinomial(n: int, parts: Sequence[int]) -> LaurentQ:
    """q-multinomial coefficient (n choose parts)_q; parts must sum to n."""
    if sum(parts) != n or any(p < 0 for p in parts):
        raise QSeriesError("parts must be nonnegative and sum to n")
    out = LaurentQ.one()
    total = 0
    for p in parts:
        total += p
        out = out * qbinom(total, p)
    return out


def dilog_E(order: int) -> TruncSeries:
    """Quantum dilogarithm E(x) truncated at x^order.

    Coefficient of x^n is (-1)^n q^{n/2} / ((1-q)...(1-q^n)), which also
    equals q^{n^2/2} / chi_gl(n).
    """
    if order < 1:
        raise QSeriesError("order >= 1 required")
    coeffs: Dict[Tuple[int, ...], RationalQ] = {}
    for n in range(order + 1):
        num = LaurentQ.monomial(n, (-1) ** n)  # (-1)^n q^{n/2}
        den = {j: 1 for j in range(1, n + 1)}
        coeffs[(n,)] = RationalQ(num, den, reduce=False)
    return TruncSeries(1, (order,), coeffs)


def dilog_E_scaled(order: int, coeff: LaurentQ, power: int = 1) -> TruncSeries:
    """E(coeff * x^power) truncated at x^order."""
    return dilog_E(order).substitute(0, coeff, power)


def q_exp_and_pochhammer(order: int) -> Tuple[TruncSeries, TruncSeries]:
    """Return (exp_q, (x;q)_infty) truncations.

    exp_q(x) = sum x^n / [n]_q!  with [n]_q = (1-q^n)/(1-q);
    (x;q)_infty = sum (-1)^n q^{n(n-1)/2} x^n / ((1-q)...(1-q^n)).
    """
    if order < 1:
        raise QSeriesError("order >= 1 required")
    exp_coeffs: Dict[Tuple[int, ...], RationalQ] = {}
    poch_coeffs: Dict[Tuple[int, ...], RationalQ] = {}
    for n in range(order + 1):
        den = {j: 1 for j in range(1, n + 1)}
        # 1/[n]_q! = (1-q)^n / prod (1-q^j)
        exp_num = (LaurentQ.one() - LaurentQ.q_power(1)) ** n
        exp_coeffs[(n,)] = RationalQ(exp_num, den)
        poch_num = LaurentQ.q_power(n * (n - 1) // 2, (-1) ** n)
        poch_coeffs[(n,)] = RationalQ(poch_num, den, reduce=False)
    return (TruncSeries(1, (order,), exp_coeffs),
            TruncSeries(1, (order,), poch_coeffs))


# ---------------------------------------------------------------------------
# Sym and the w33 identity
# ---------------------------------------------------------------------------


def sym_series(f: Sequence[LaurentQ], order: int) -> TruncSeries:
    """Sym(sum_n f_n(q^{1/2}) x^n / (q^{1/2}-q^{-1/2})) as a truncated series.

    Implements
      exp( sum_{n>=1} sum_{k|n} (-1)^{k-1}
           f_{n/k}(-(-q^{1/2})^k) x^n / (k (q^{k/2}-q^{-k/2})) ).
    ``f`` lists f_1, f_2, ... ; missing entries count as zero.
    """
    if order < 0:
        raise QSeriesError("order >= 0 required")
    if order == 0:
        return TruncSeries.one(1, (0,))
    arg: Dict[Tuple[int, ...], RationalQ] = {}
    for n in range(1, order + 1):
        total = RationalQ.zero()
        for k in range(1, n + 1):
            if n % k:
                continue
            idx = n // k - 1
            if idx >= len(f) or f[idx].is_zero():
                continue
            # substitute t -> -(-1)^k q^{k/2} in f_{n/k}
            fn = f[idx].subst_half_power(k, -((-1) ** k))
            # (-1)^{k-1} / (k (q^{k/2}-q^{-k/2})) = (-1)^k q^{k/2} / (k (1-q^k))
            num = fn * LaurentQ.monomial(k, Fraction((-1) ** k, k))
            total = total + RationalQ(num, {k: 1})
        if not total.is_zero():
            arg[(n,)] = total
    return TruncSeries(1, (order,), arg).exp()


def sym_as_dilog_product(f: Sequence[LaurentQ], order: int) -> TruncSeries:
    """The product form prod_n prod_k E((-q^{1/2})^k x^n)^{(-1)^k c_{n,k}}
    where f_n = sum_k c_{n,k} t^k; must agree with sym_series."""
    out = TruncSeries.one(1, (order,))
    for n in range(1, order + 1):
        if n - 1 >= len(f):
            break
        for k, c in sorted(f[n - 1].coeffs.items()):
            if c.denominator != 1:
                raise QSeriesError("Sym product form needs integer c_{n,k}")
            sign = 1 if k % 2 == 0 else -1
            exponent = int(c) * sign
            factor = dilog_E_scaled(order, LaurentQ.monomial(k, sign), n)
            out = out * (factor ** exponent)
    return out


def bell_like_B(n: int) -> LaurentQ:
    """B_n = sum_{k=0}^n qbinom(n,k)."""
    out = LaurentQ.zero()
    for k in range(n + 1):
        out = out + qbinom(n, k)
    return out


def w33_lhs(order: int) -> TruncSeries:
    """sum_n B_n^2 q^{n^2/2} / chi_gl(n) x^n."""
    coeffs: Dict[Tuple[int, ...], RationalQ] = {}
    for n in range(order + 1):
        bn = bell_like_B(n)
        num = bn * bn * LaurentQ.monomial(n * n)
        coeffs[(n,)] = RationalQ(num, {}, reduce=False) * _inv_chi_gl(n)
    return TruncSeries(1, (order,), coeffs)


def _inv_chi_gl(n: int) -> RationalQ:
    """1/chi_gl(n) in factored form: chi_gl(n) = (-1)^n q^{n(n-1)/2} (q;q)_n."""
    num = LaurentQ.q_power(-(n * (n - 1) // 2), (-1) ** n)
    return RationalQ(num, {j: 1 for j in range(1, n + 1)}, reduce=False)


def w33_rhs(order: int) -> TruncSeries:
    """E(x)^4 * E(-q^{1/2} x^2)^{-1}."""
    e = dilog_E(order)
    e2 = dilog_E_scaled(order, LaurentQ.monomial(1, -1), 2)
    return (e ** 4) * e2.inverse()


def verify_w33dt(order: int) -> bool:
    """Check sum B_n^2 q^{n^2/2}/chi_gl(n) x^n = E(x)^4 E(-q^{1/2}x^2)^{-1}."""
    if order < 0:
        raise QSeriesError("order >= 0 required")
    if order == 0:
        return True
    return w33_lhs(order) == w33_rhs(order)


# ---------------------------------------------------------------------------
# Finite-field brute force
# ---------------------------------------------------------------------------

_ALLOWED_P = (2, 3, 4, 5)


def _prime_power_field(p: int):
    """Return (elements, add, mul) for F_p, p prime, or F_4."""
    if p in (2, 3, 5):
        els = list(range(p))
        return els, (lambda a, b: (a + b) % p), (lambda a, b: (a * b) % p)
    if p == 4:
        # F_4 = F_2[w]/(w^2+w+1), elements encoded 0,1,2=w,3=w+1.
        els = [0, 1, 2, 3]

        def add(a, b):
            return a ^ b

        mul_table = {}
        for a in els:
            for b in els:
                # polynomial multiply mod w^2+w+1 over F_2
                a0, a1 = a & 1, a >> 1
                b0, b1 = b & 1, b >> 1
                c0 = a0 * b0
                c1 = a0 * b1 + a1 * b0
                c2 = a1 * b1
                # w^2 = w + 1
                c0 = (c0 + c2) % 2
                c1 = (c1 + c2) % 2
                mul_table[(a, b)] = c0 | (c1 << 1)
        return els, add, (lambda a, b: mul_table[(a, b)])
    raise QSeriesError(f"unsupported field size {p}")


def enumerate_subspaces(n: int, p: int) -> List[Tuple[Tuple[int, ...], ...]]:
    """All subspaces of F_p^n as tuples of RREF basis rows (desk-scale)."""
    if n > 4 or p not in _ALLOWED_P:
        raise QSeriesError("bounds: n <= 4 and p in {2,3,4,5}")
    els, add, mul = _prime_power_field(p)
    nonzero = [e for e in els if e != 0]
    subspaces: List[Tuple[Tuple[int, ...], ...]] = [()]
    for k in range(1, n + 1):
        for pivots in itertools.combinations(range(n), k):
            free_positions = []
            for r, pc in enumerate(pivots):
                for c in range(pc + 1, n):
                    if c not in pivots:
                        free_positions.append((r, c))
            for values in itertools.product(els, repeat=len(free_positions)):
                rows = [[0] * n for _ in range(k)]
                for r, pc in enumerate(pivots):
                    rows[r][pc] = 1
                for (r, c), v in zip(free_positions, values):
                    rows[r][c] = v
                subspaces.append(tuple(tuple(r) for r in rows))
    return subspaces


def count_subspace_pairs(n: int, p: int) -> int:
    """Number of ordered pairs (A, B) of subspaces of F_p^n, brute force."""
    if n < 0 or n > 4 or p not in _ALLOWED_P:
        raise QSeriesError("bounds: 0 <= n <= 4 and p in {2,3,4,5}")
    m = len(enumerate_subspaces(n, p))
    return m * m


def two_subspace_rhs(n: int) -> LaurentQ:
    """RHS of the two-subspace identity:
    sum_{i1+..+i4+2j=n} chi_gl(j) * (n choose i1,i2,i3,i4,j,j)_q."""
    out = LaurentQ.zero()
    for j in range(n // 2 + 1):
        rest = n - 2 * j
        for i1 in range(rest + 1):
            for i2 in range(rest - i1 + 1):
                for i3 in range(rest - i1 - i2 + 1):
                    i4 = rest - i1 - i2 - i3
                    out = out + chi_gl(j) * q_multinomial(
                        n, (i1, i2, i3, i4, j, j))
    return out


def gl_order_brute(n: int, p: int) -> int:
    """|GL_n(F_p)| by enumerating invertible matrices (n <= 3, small p)."""
    if n > 3 or p not in (2, 3):
        raise QSeriesError("bounds: n <= 3 and p in {2,3}")
    if n == 0:
        return 1
    els, add, mul = _prime_power_field(p)
    count = 0
    for flat in itertools.product(els, repeat=n * n):
        mat = [list(flat[i * n:(i + 1) * n]) for i in range(n)]
        if _det_nonzero(mat, p):
            count += 1
    return count


def _det_nonzero(mat: List[List[int]], p: int) -> bool:
    m = [row[:] for row in mat]
    n = len(m)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col] % p:
                piv = r
                break
        if piv is None:
            return False
        m[col], m[piv] = m[piv], m[col]
        inv = pow(m[col][col], -1, p)
        for r in range(col + 1, n):
            f = (m[r][col] * inv) % p
            if f:
                for c in range(col, n):
                    m[r][c] = (m[r][c] - f * m[col][c]) % p
    return True
