"""Quantum torus over a charge lattice, DT-spectrum extraction from counting
series, and ordered-product wall-crossing checks.

Monomials multiply by x_a x_b = q^{<a,b>/2} x_{a+b}.  Series are truncated by
a user-supplied positivity functional (positive integer weight on every class
that occurs), capping the weight of retained lattice points.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .qseries import (
    LaurentQ,
    RationalQ,
    TruncSeries,
    dilog_E,
)


class QTorusError(ValueError):
    pass


class NonAdmissibleError(QTorusError):
    """Raised when a series admits no integral dilogarithm factorization."""


class ChargeLattice:
    """Finite rank lattice with an integer antisymmetric pairing."""

    __slots__ = ("rank", "pairing")

    def __init__(self, pairing: Sequence[Sequence[int]]):
        n = len(pairing)
        mat = tuple(tuple(int(x) for x in row) for row in pairing)
        if any(len(row) != n for row in mat):
            raise QTorusError("pairing matrix must be square")
        for i in range(n):
            for j in range(n):
                if mat[i][j] != -mat[j][i]:
                    raise QTorusError("pairing must be antisymmetric")
        self.rank = n
        self.pairing = mat

    def pair(self, a: Sequence[int], b: Sequence[int]) -> int:
        total = 0
        for i, ai in enumerate(a):
            if not ai:
                continue
            row = self.pairing[i]
            for j, bj in enumerate(b):
                if bj:
                    total += ai * row[j] * bj
        return total

    def __eq__(self, other):
        return (isinstance(other, ChargeLattice)
                and self.pairing == other.pairing)

    def __repr__(self):
        return f"ChargeLattice(rank={self.rank})"


class QTorusSeries:
    """Truncated series sum_gamma c_gamma x_gamma in the quantum torus.

    ``weights`` is the positivity functional (one positive integer per basis
    vector); monomials with weight above ``cap`` are dropped.  Only lattice
    points of nonnegative weight may occur.
    """

    __slots__ = ("lattice", "weights", "cap", "coeffs")

    def __init__(self, lattice: ChargeLattice, weights: Sequence[int],
                 cap: int,
                 coeffs: Mapping[Tuple[int, ...], RationalQ] | None = None):
        if len(weights) != lattice.rank:
            raise QTorusError("need one weight per basis vector")
        self.lattice = lattice
        self.weights = tuple(int(w) for w in weights)
        self.cap = int(cap)
        clean: Dict[Tuple[int, ...], RationalQ] = {}
        if coeffs:
            for g, c in coeffs.items():
                g = tuple(int(x) for x in g)
                w = self.weight(g)
                if w < 0:
                    raise QTorusError(f"negative weight class {g}")
                if w <= self.cap and not c.is_zero():
                    clean[g] = c
        self.coeffs = clean

    def weight(self, gamma: Sequence[int]) -> int:
        return sum(w * g for w, g in zip(self.weights, gamma))

    def _check(self, other: "QTorusSeries") -> None:
        if self.lattice != other.lattice:
            raise QTorusError("mismatched lattices")
        if self.weights != other.weights or self.cap != other.cap:
            raise QTorusError("mismatched truncation data")

    @staticmethod
    def one(lattice: ChargeLattice, weights: Sequence[int],
            cap: int) -> "QTorusSeries":
        zero = (0,) * lattice.rank
        return QTorusSeries(lattice, weights, cap, {zero: RationalQ.one()})

    @staticmethod
    def monomial(lattice: ChargeLattice, weights: Sequence[int], cap: int,
                 gamma: Sequence[int],
                 coeff: RationalQ | None = None) -> "QTorusSeries":
        c = coeff if coeff is not None else RationalQ.one()
        return QTorusSeries(lattice, weights, cap, {tuple(gamma): c})

    def coeff(self, gamma: Sequence[int]) -> RationalQ:
        return self.coeffs.get(tuple(gamma), RationalQ.zero())

    def __add__(self, other: "QTorusSeries") -> "QTorusSeries":
        self._check(other)
        out = dict(self.coeffs)
        for g, c in other.coeffs.items():
            s = out.get(g)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(g, None)
            else:
                out[g] = s
        return QTorusSeries(self.lattice, self.weights, self.cap, out)

    def __neg__(self) -> "QTorusSeries":
        return QTorusSeries(self.lattice, self.weights, self.cap,
                            {g: -c for g, c in self.coeffs.items()})

    def __sub__(self, other: "QTorusSeries") -> "QTorusSeries":
        return self + (-other)

    def __mul__(self, other: "QTorusSeries") -> "QTorusSeries":
        self._check(other)
        out: Dict[Tuple[int, ...], RationalQ] = {}
        pair = self.lattice.pair
        for g1, c1 in self.coeffs.items():
            w1 = self.weight(g1)
            for g2, c2 in other.coeffs.items():
                if w1 + other.weight(g2) > self.cap:
                    continue
                g = tuple(a + b for a, b in zip(g1, g2))
                twist = pair(g1, g2)  # q^{twist/2}
                term = (c1 * c2).mul_laurent(LaurentQ.monomial(twist))
                s = out.get(g)
                s = term if s is None else s + term
                if s.is_zero():
                    out.pop(g, None)
                else:
                    out[g] = s
        return QTorusSeries(self.lattice, self.weights, self.cap, out)

    def __pow__(self, n: int) -> "QTorusSeries":
        if n < 0:
            return self.inverse() ** (-n)
        out = QTorusSeries.one(self.lattice, self.weights, self.cap)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverse(self) -> "QTorusSeries":
        zero = (0,) * self.lattice.rank
        c0 = self.coeffs.get(zero)
        if c0 is None:
            raise QTorusError("no constant term, not invertible")
        c0_inv = c0.inverse()
        out: Dict[Tuple[int, ...], RationalQ] = {zero: c0_inv}
        # increasing weight; within a weight, lexicographic for determinism
        monos = sorted((g for g in self.coeffs if g != zero),
                       key=lambda g: (self.weight(g), g))
        # collect all reachable classes up to cap by repeated addition
        frontier = {zero}
        reachable = {zero}
        while True:
            new = set()
            for g in frontier:
                for m in monos:
                    h = tuple(a + b for a, b in zip(g, m))
                    if self.weight(h) <= self.cap and h not in reachable:
                        new.add(h)
            if not new:
                break
            reachable |= new
            frontier = new
        pair = self.lattice.pair
        for h in sorted(reachable - {zero},
                        key=lambda g: (self.weight(g), g)):
            acc = RationalQ.zero()
            for m, cm in self.coeffs.items():
                if m == zero:
                    continue
                rest = tuple(a - b for a, b in zip(h, m))
                b = out.get(rest)
                if b is None:
                    continue
                # term from  x_m-part * inverse-part  ordered as self * out
                twist = pair(m, rest)
                acc = acc + (cm * b).mul_laurent(LaurentQ.monomial(twist))
            val = -(c0_inv * acc)
            if not val.is_zero():
                out[h] = val
        return QTorusSeries(self.lattice, self.weights, self.cap, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QTorusSeries):
            return NotImplemented
        self._check(other)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeff(k) == other.coeff(k) for k in keys)

    def __repr__(self):
        items = ", ".join(f"{g}: {c!r}"
                          for g, c in sorted(self.coeffs.items())[:5])
        more = "..." if len(self.coeffs) > 5 else ""
        return f"QTorusSeries(cap={self.cap}, {{{items}{more}}})"


def dilog_factor(lattice: ChargeLattice, weights: Sequence[int], cap: int,
                 gamma: Sequence[int], k: int = 0,
                 exponent: int = 1) -> QTorusSeries:
    """E((-q^{1/2})^k x_gamma)^exponent as a quantum-torus series.

    Since <gamma,gamma> = 0, powers of x_gamma are x_{n gamma} exactly and
    the one-variable dilogarithm transplants onto the ray through gamma.
    """
    gamma = tuple(int(g) for g in gamma)
    w = sum(a * b for a, b in zip(weights, gamma))
    if w <= 0:
        raise QTorusError("dilog factor needs a positive-weight class")
    order = cap // w
    sign = 1 if k % 2 == 0 else -1
    one_var = dilog_E(max(order, 1)).substitute(
        0, LaurentQ.monomial(k, sign), 1) ** exponent
    coeffs: Dict[Tuple[int, ...], RationalQ] = {}
    for n in range(order + 1):
        c = one_var.coeff(n)
        if not c.is_zero():
            coeffs[tuple(n * g for g in gamma)] = c
    return QTorusSeries(lattice, weights, cap, coeffs)


class DTSpectrum:
    """Map class -> Omega(class) as a Laurent polynomial in q^{1/2}."""

    __slots__ = ("omegas",)

    def __init__(self, omegas: Mapping[Tuple[int, ...], LaurentQ] | None = None):
        self.omegas: Dict[Tuple[int, ...], LaurentQ] = {}
        if omegas:
            for g, om in omegas.items():
                if not om.is_zero():
                    self.omegas[tuple(int(x) for x in g)] = om

    def omega(self, gamma: Sequence[int]) -> LaurentQ:
        return self.omegas.get(tuple(gamma), LaurentQ.zero())

    def classes(self) -> List[Tuple[int, ...]]:
        return sorted(self.omegas)

    def __eq__(self, other):
        return isinstance(other, DTSpectrum) and self.omegas == other.omegas

    def __repr__(self):
        items = ", ".join(f"{g}: {om.to_string()}"
                          for g, om in sorted(self.omegas.items()))
        return f"DTSpectrum({{{items}}})"


def dt_factorize(series: TruncSeries, order: int | None = None) -> DTSpectrum:
    """Extract Omega(n*gamma) from a single-ray counting series.

    Requires series = prod_n prod_k E((-q^{1/2})^k x^n)^{(-1)^k Omega_k(n)}
    with integer Omega_k; greedy from the lowest power of x.  The x^n
    coefficient of the residual at stage n determines Omega(n) via

        Omega(n) = residual_n * (1-q) * (-q^{-1/2}).

    Raises NonAdmissibleError if some stage gives a non-integral or
    non-Laurent value.
    """
    if series.nvars != 1:
        raise QTorusError("dt_factorize expects a one-variable series")
    if order is None:
        order = series.caps[0]
    if not series.coeff(0) == RationalQ.one():
        raise QTorusError("series must have constant term 1")
    lattice = ChargeLattice([[0]])
    weights = (1,)
    qt = QTorusSeries(lattice, weights, order,
                      {(n,): series.coeff(n) for n in range(order + 1)})
    residual = qt
    omegas: Dict[Tuple[int, ...], LaurentQ] = {}
    unit = LaurentQ.one() - LaurentQ.q_power(1)  # (1-q)
    for n in range(1, order + 1):
        cn = residual.coeff((n,))
        if cn.is_zero():
            continue
        om_rat = cn.mul_laurent(unit).mul_laurent(LaurentQ.monomial(-1, -1))
        if not om_rat.is_laurent():
            raise NonAdmissibleError(
                f"stage {n}: coefficient is not Laurent: {om_rat!r}")
        om = om_rat.to_laurent()
        if not om.is_integral():
            raise NonAdmissibleError(
                f"stage {n}: non-integer Omega: {om.to_string()}")
        omegas[(n,)] = om
        # divide off the E-factors at this stage
        divisor = QTorusSeries.one(lattice, weights, order)
        for k, c in sorted(om.coeffs.items()):
            divisor = divisor * dilog_factor(
                lattice, weights, order, (n,), k,
                (1 if k % 2 == 0 else -1) * int(c))
        residual = residual * divisor.inverse()
        if not residual.coeff((n,)).is_zero():
            raise NonAdmissibleError(f"stage {n}: division left a remainder")
    if residual != QTorusSeries.one(lattice, weights, order):
        raise NonAdmissibleError("factorization left a nontrivial residual")
    return DTSpectrum(omegas)


def spectrum_product(lattice: ChargeLattice, weights: Sequence[int], cap: int,
                     factors: Sequence[Tuple[Sequence[int], LaurentQ]]
                     ) -> QTorusSeries:
    """Ordered product prod_i prod_k E((-q^{1/2})^k x_{gamma_i})^{(-1)^k
    Omega_{i,k}} for an ordered list of (class, Omega) pairs."""
    out = QTorusSeries.one(lattice, weights, cap)
    for gamma, om in factors:
        if om.is_zero():
            continue
        if not om.is_integral():
            raise QTorusError("Omega must have integer coefficients")
        for k, c in sorted(om.coeffs.items()):
            sign = 1 if k % 2 == 0 else -1
            out = out * dilog_factor(lattice, weights, cap, gamma, k,
                                     sign * int(c))
    return out


def wallcross_check(lattice: ChargeLattice,
                    side_a: Sequence[Tuple[Sequence[int], LaurentQ]],
                    side_b: Sequence[Tuple[Sequence[int], LaurentQ]],
                    order: int,
                    weights: Sequence[int] | None = None) -> bool:
    """True iff the two ordered products of dilogarithm factors agree up to
    the truncation order (in total positivity weight)."""
    if weights is None:
        weights = _find_positive_functional(
            lattice, [g for g, _ in list(side_a) + list(side_b)])
    pa = spectrum_product(lattice, weights, order, side_a)
    pb = spectrum_product(lattice, weights, order, side_b)
    return pa == pb


def _find_positive_functional(lattice: ChargeLattice,
                              classes: Iterable[Sequence[int]]
                              ) -> Tuple[int, ...]:
    """Small deterministic search for an integer functional positive on
    every given class (coefficients may be negative)."""
    cls = [tuple(int(x) for x in g) for g in classes]
    cls = [g for g in cls if any(g)]
    if not cls:
        return (1,) * lattice.rank
    rank = lattice.rank
    for bound in (1, 2, 3, 5, 8):
        best = None
        stack: List[Tuple[int, ...]] = [()]
        for _ in range(rank):
            stack = [w + (v,) for w in stack
                     for v in range(-bound, bound + 1)]
        for w in stack:
            if all(sum(a * b for a, b in zip(w, g)) > 0 for g in cls):
                key = (sum(abs(x) for x in w), w)
                if best is None or key < best[0]:
                    best = (key, w)
        if best is not None:
            return best[1]
    raise QTorusError("no positive functional found for the given classes")


def pentagon_check(order: int = 6) -> bool:
    """E(x1) E(x2) = E(x2) E(q^{-1/2} x1 x2) E(x1) with <e1,e2> = 1,
    checked coefficient-wise to the given total degree."""
    lat = ChargeLattice([[0, 1], [-1, 0]])
    w = (1, 1)
    e1, e2, e12 = (1, 0), (0, 1), (1, 1)
    lhs = (dilog_factor(lat, w, order, e1)
           * dilog_factor(lat, w, order, e2))
    # q^{-1/2} x_{e1} x_{e2} = x_{e1+e2}
    rhs = (dilog_factor(lat, w, order, e2)
           * dilog_factor(lat, w, order, e12)
           * dilog_factor(lat, w, order, e1))
    return lhs == rhs
