"""The curved A-infinity category of a graded arc system over k[eta].

Objects are arcs with a bidegree shift; morphisms are exact rational
combinations of boundary paths and formal shift morphisms sigma, times
powers of eta (bidegree (-1,1), truncated at a configurable cap).

Structure maps: m_{2,0} is signed concatenation, m_{0,1} the difference of
the two distinguished boundary loops of an arc, and the higher m_{n,k} come
from disk sequences (see diskindex).  All signs follow the component-level
structure equation

    sum (-1)^* m_{i+1+k,r}(a_n,..,m_{j,s}(a_{i+j},..,a_{i+1}),..,a_1) = 0,
    * = (s+1)(||a_1||+..+||a_i||) + s(pi(a_1)+..+pi(a_i)+1)

which the verifier evaluates literally on basis tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .diskindex import DiskIndex, PathKey, Word
from .surfaces import (
    ArcSystem,
    ArcSystemError,
    BoundaryPath,
    GradingAssignment,
    c_loop,
    enumerate_boundary_paths,
)


class AInftyError(ArcSystemError):
    pass


class NonNilpotentDelta(AInftyError):
    pass


@dataclass(frozen=True, order=True)
class ArcObject:
    """An arc with a shift: the object arc[m, n] of the category."""

    arc: int
    m: int = 0
    n: int = 0  # parity shift, mod 2

    def shifted(self, dm: int, dn: int) -> "ArcObject":
        return ArcObject(self.arc, self.m + dm, (self.n + dn) % 2)


# Basis elements: ("p", circle, start, length) for a boundary path,
# ("s",) for the sigma/identity element (determined by source and target).
Elem = Tuple
SIGMA: Elem = ("s",)


def path_elem(p: BoundaryPath) -> Elem:
    return ("p",) + p.key()


class Morphism:
    """Finite sum of (basis element, eta power) with Fraction coefficients,
    from ``source`` to ``target``."""

    __slots__ = ("cat", "source", "target", "terms")

    def __init__(self, cat: "AInftyCategory", source: ArcObject,
                 target: ArcObject,
                 terms: Mapping[Tuple[Elem, int], Fraction] | None = None):
        self.cat = cat
        self.source = source
        self.target = target
        clean: Dict[Tuple[Elem, int], Fraction] = {}
        if terms:
            for (elem, k), c in terms.items():
                c = Fraction(c)
                if c == 0 or k > cat.eta_cap:
                    continue
                if k < 0:
                    raise AInftyError("negative eta power")
                clean[(elem, k)] = clean.get((elem, k), Fraction(0)) + c
                if clean[(elem, k)] == 0:
                    del clean[(elem, k)]
        self.terms = clean

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Morphism") -> "Morphism":
        if (self.source, self.target) != (other.source, other.target):
            raise AInftyError("cannot add morphisms of different type")
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, Fraction(0)) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return Morphism(self.cat, self.source, self.target, out)

    def __neg__(self) -> "Morphism":
        return Morphism(self.cat, self.source, self.target,
                        {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Morphism") -> "Morphism":
        return self + (-other)

    def scale(self, c) -> "Morphism":
        c = Fraction(c)
        return Morphism(self.cat, self.source, self.target,
                        {k: v * c for k, v in self.terms.items()})

    def times_eta(self, k: int = 1) -> "Morphism":
        return Morphism(self.cat, self.source, self.target,
                        {(e, j + k): c for (e, j), c in self.terms.items()})

    def bidegrees(self) -> set:
        out = set()
        for (elem, k), _ in self.terms.items():
            d, p = self.cat.elem_bidegree(elem, self.source, self.target)
            out.add((d - k, (p + k) % 2))
        return out

    def is_homogeneous(self, bidegree: Tuple[int, int] | None = None) -> bool:
        degs = self.bidegrees()
        if not degs:
            return True
        if bidegree is not None:
            return degs == {bidegree}
        return len(degs) == 1

    def __eq__(self, other):
        return (isinstance(other, Morphism)
                and (self.source, self.target) == (other.source, other.target)
                and self.terms == other.terms)

    def __repr__(self):
        bits = []
        for (elem, k), c in sorted(self.terms.items()):
            e = "1" if elem == SIGMA else f"p{elem[1:]}"
            bits.append(f"{c}*{e}" + (f"*eta^{k}" if k else ""))
        return (f"Mor({self.source}->{self.target}: "
                f"{' + '.join(bits) if bits else '0'})")


class AInftyCategory:
    """Structure maps of the arc category for a fixed graded arc system."""

    def __init__(self, arcs: ArcSystem, grading: GradingAssignment,
                 eta_cap: int = 3, max_n: int = 7, max_k: int = 3):
        self.arcs = arcs
        self.grading = grading
        self.eta_cap = eta_cap
        self.max_k = max_k
        self.index = DiskIndex(arcs, max_n, max_k)
        self.disk_degrees = {d.k for d in self.index.disks}
        self._paths: Dict[PathKey, BoundaryPath] = {}
        self._pdata: Dict[PathKey, Tuple[int, int, int, int]] = {}
        self._memo_m: Dict = {}

    # -- element data ------------------------------------------------------

    def path(self, key: PathKey) -> BoundaryPath:
        p = self._paths.get(key)
        if p is None:
            ci, start, length = key
            p = BoundaryPath(self.arcs, self.grading,
                             self.arcs.circles[ci], start, length)
            self._paths[key] = p
        return p

    def _path_data(self, key: PathKey) -> Tuple[int, int, int, int]:
        """(degree, parity, eps_minus, eps_plus) of the bare path."""
        d = self._pdata.get(key)
        if d is None:
            p = self.path(key)
            d = (p.degree, p.parity, p.eps_minus, p.eps_plus)
            self._pdata[key] = d
        return d

    def elem_bidegree(self, elem: Elem, src: ArcObject,
                      tgt: ArcObject) -> Tuple[int, int]:
        """(degree, parity) of a bare element as morphism src -> tgt."""
        if elem == SIGMA:
            base_d, base_p = 0, 0
        else:
            base_d, base_p, _, _ = self._path_data(elem[1:])
        return (base_d + src.m - tgt.m, (base_p + src.n + tgt.n) % 2)

    def elem_eps(self, elem: Elem, src: ArcObject,
                 tgt: ArcObject) -> Tuple[int, int]:
        """(eps_minus, eps_plus) adjusted for the object shifts."""
        if elem == SIGMA:
            raise AInftyError("eps undefined for sigma")
        _, _, em, ep = self._path_data(elem[1:])
        return ((em + src.m + src.n) % 2, (ep + tgt.m + tgt.n) % 2)

    def object_source_end(self, obj: ArcObject) -> int:
        """Index of the end the object's orientation points out of; the
        shift by odd total bidegree reverses the orientation."""
        base = self.grading.source_end(obj.arc)
        if (obj.m + obj.n) % 2:
            return 1 - base
        return base

    # -- morphism constructors ----------------------------------------------

    def zero(self, src: ArcObject, tgt: ArcObject) -> Morphism:
        return Morphism(self, src, tgt)

    def unit(self, obj: ArcObject) -> Morphism:
        return Morphism(self, obj, obj, {(SIGMA, 0): Fraction(1)})

    def sigma(self, obj: ArcObject, m: int, n: int) -> Morphism:
        return Morphism(self, obj, obj.shifted(m, n),
                        {(SIGMA, 0): Fraction(1)})

    def path_morphism(self, p: BoundaryPath, src: ArcObject,
                      tgt: ArcObject, coeff=1, eta: int = 0) -> Morphism:
        if p.source_arc != src.arc or p.target_arc != tgt.arc:
            raise AInftyError("path endpoints do not match objects")
        return Morphism(self, src, tgt,
                        {(path_elem(p), eta): Fraction(coeff)})

    def m0(self, obj: ArcObject) -> Morphism:
        """Curvature m_0(X) = (c_{q,X} - c_{p,X}) eta, X oriented p -> q."""
        src_end = self.object_source_end(obj)
        e_p = (obj.arc, src_end)
        e_q = (obj.arc, 1 - src_end)
        cq = c_loop(self.arcs, self.grading, e_q)
        cp = c_loop(self.arcs, self.grading, e_p)
        return Morphism(self, obj, obj, {
            (path_elem(cq), 1): Fraction(1),
            (path_elem(cp), 1): Fraction(-1),
        })

    def m01_elems(self, obj: ArcObject) -> List[Tuple[Fraction, Elem]]:
        """The eta-free component m_{0,1}(X) as (coeff, elem) pairs."""
        src_end = self.object_source_end(obj)
        cq = c_loop(self.arcs, self.grading, (obj.arc, 1 - src_end))
        cp = c_loop(self.arcs, self.grading, (obj.arc, src_end))
        return [(Fraction(1), path_elem(cq)), (Fraction(-1), path_elem(cp))]

    # -- component structure maps -------------------------------------------
    #
    # Words are given in composition order (a_1, ..., a_n) with a_1 the
    # first (rightmost) input of m_n; objects[i] is the source of a_{i+1},
    # objects[n] the target of a_n.

    def m2_component(self, a1: Elem, a2: Elem,
                     objects: Sequence[ArcObject]
                     ) -> Optional[Tuple[Fraction, Elem]]:
        """m_{2,0}(a2, a1): signed concatenation / sigma rules."""
        x, y, z = objects
        if a1 == SIGMA and a2 == SIGMA:
            # m(sigma_{m,n}, sigma_{r,s}) = (-1)^r sigma_{m+r,n+s}
            r = x.m - y.m
            return (Fraction((-1) ** r), SIGMA)
        if a1 == SIGMA:
            # m(a, sigma_{X,m,n}) = (-1)^{m(eps_-(a)+1)} a ; sigma: x -> y,
            # with eps_- taken in the output view (source x, unshifted).
            m_shift = y.m - x.m
            em, _ = self.elem_eps(a2, x, z)
            return (Fraction((-1) ** (m_shift * (em + 1))), a2)
        if a2 == SIGMA:
            # m(sigma_{Y,m,n}, a) = (-1)^{|a| + m eps_+(a)} a ; sigma: y -> z
            m_shift = z.m - y.m
            d, _ = self.elem_bidegree(a1, x, y)
            _, ep = self.elem_eps(a1, x, y)
            return (Fraction((-1) ** (d + m_shift * ep)), a1)
        p1 = self.path(a1[1:])
        p2 = self.path(a2[1:])
        conc = p1.concat(p2)
        if conc is None:
            return None
        d1, _ = self.elem_bidegree(a1, x, y)
        return (Fraction((-1) ** d1), path_elem(conc))

    def m_component(self, word: Sequence[Elem],
                    objects: Sequence[ArcObject], s: int
                    ) -> List[Tuple[Fraction, Elem]]:
        """m_{n,s}(a_n, ..., a_1) on bare basis elements.

        Returns a list of (coefficient, element) pairs (empty = zero).
        The output element is a morphism objects[0] -> objects[-1].
        """
        n = len(word)
        if n == 0:
            raise AInftyError("use m01_elems for the curvature component")
        memo_key = (tuple(word), tuple(objects), s)
        cached = self._memo_m.get(memo_key)
        if cached is not None:
            return cached
        out = self._m_component_raw(word, objects, s)
        self._memo_m[memo_key] = out
        return out

    def _m_component_raw(self, word, objects, s):
        n = len(word)
        if any(e == SIGMA for e in word):
            if n == 2 and s == 0:
                res = self.m2_component(word[0], word[1], objects)
                return [res] if res else []
            return []
        out: List[Tuple[Fraction, Elem]] = []
        if n == 2 and s == 0:
            res = self.m2_component(word[0], word[1], objects)
            if res:
                out.append(res)
        # disk cases; m_{2,0} has no disk contributions (Euler bound), and
        # degree-s disks contribute to m_{n,s}.
        if s in self.disk_degrees:
            out.extend(self._disk_component(word, objects, s))
        if len(out) > 1 and n != 2:
            raise AInftyError(
                f"disk exclusivity violated on {word}: {out}")
        return out

    def _disk_component(self, word: Sequence[Elem],
                        objects: Sequence[ArcObject], s: int
                        ) -> List[Tuple[Fraction, Elem]]:
        keys: List[PathKey] = [e[1:] for e in word]  # type: ignore[misc]
        n = len(keys)
        out: List[Tuple[Fraction, Elem]] = []
        # case (i): the word itself is a disk sequence -> unit
        k = self.index.lookup(tuple(keys))
        if k == s:
            em, _ = self.elem_eps(word[0], objects[0], objects[1])
            out.append((Fraction((-1) ** (k * em)), SIGMA))
        # case (ii): last input factors as (a_n then b)
        last = self.path(keys[-1])
        for t in range(1, last.length):
            an = last.prefix(t)
            b = last.suffix_from(t)
            cand = tuple(keys[:-1] + [an.key()])
            k = self.index.lookup(cand)
            if k == s:
                em, _ = self.elem_eps(word[0], objects[0], objects[1])
                out.append((Fraction((-1) ** (k * em)), path_elem(b)))
        # case (iii): first input factors as (b then a_1)
        first = self.path(keys[0])
        for t in range(1, first.length):
            b = first.prefix(t)
            a1 = first.suffix_from(t)
            cand = tuple([a1.key()] + keys[1:])
            k = self.index.lookup(cand)
            if k == s:
                # b as morphism objects[0] -> objects[n]
                d, _ = self.elem_bidegree(path_elem(b), objects[0],
                                          objects[-1])
                em, _ = self.elem_eps(path_elem(b), objects[0], objects[-1])
                out.append((Fraction((-1) ** (d + k * em)), path_elem(b)))
        return out

    # -- full structure maps over k[eta] --------------------------------------

    def m_full(self, inputs: Sequence[Morphism]) -> Morphism:
        """m_n extended k[eta]-multilinearly; inputs in composition order
        (inputs[0] = a_1 applied first)."""
        n = len(inputs)
        if n == 0:
            raise AInftyError("m_full needs inputs; use m0 for curvature")
        for i in range(n - 1):
            if inputs[i].target != inputs[i + 1].source:
                raise AInftyError("inputs are not composable")
        objects = [inputs[0].source] + [f.target for f in inputs]
        src, tgt = objects[0], objects[-1]
        acc: Dict[Tuple[Elem, int], Fraction] = {}
        for combo in itertools.product(
                *[sorted(f.terms.items()) for f in inputs]):
            elems = [c[0][0] for c in combo]
            etas = [c[0][1] for c in combo]
            coeff = Fraction(1)
            for c in combo:
                coeff *= c[1]
            ktot = sum(etas)
            if ktot > self.eta_cap:
                continue
            # sign for moving the etas out
            inv = 0
            for i, e in enumerate(elems):
                d, p = self.elem_bidegree(e, objects[i], objects[i + 1])
                inv += (d - 1) + p
            eta_sign = (-1) ** (ktot * ((inv + 1) % 2))
            for s in range(0, min(self.eta_cap - ktot, self.max_k) + 1):
                for c2, elem in self.m_component(elems, objects, s):
                    key = (elem, ktot + s)
                    val = acc.get(key, Fraction(0)) + coeff * eta_sign * c2
                    if val:
                        acc[key] = val
                    else:
                        acc.pop(key, None)
        return Morphism(self, src, tgt, acc)

    def m2(self, a: Morphism, b: Morphism) -> Morphism:
        """m_2(a, b) where b is applied first: b in Hom(X,Y), a in Hom(Y,Z).
        Non-composable inputs give the zero morphism."""
        if b.target != a.source:
            return self.zero(b.source, a.target)
        return self.m_full([b, a])

    # -- basis enumeration ---------------------------------------------------

    def hom_basis(self, src: ArcObject, tgt: ArcObject, max_len: int
                  ) -> List[Elem]:
        out: List[Elem] = []
        if src.arc == tgt.arc:
            out.append(SIGMA)
        for p in enumerate_boundary_paths(self.arcs, self.grading, max_len):
            if p.source_arc == src.arc and p.target_arc == tgt.arc:
                out.append(path_elem(p))
        return out
