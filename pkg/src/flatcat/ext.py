"""Ext computation for arcs, the CY functional tau, the induced pairing,
Euler forms, and the shift-functor checks.

Ext^*(X,Y) of the torsion module of an arc is the quotient of the eta-free
Hom by the image of right multiplication with the curvature: a basis is
given by boundary paths that do not wind a full distinguished loop, plus,
for X = Y, the identity and the common class of the two full loops."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .ainfty import AInftyCategory, AInftyError, ArcObject, Elem, Morphism, SIGMA
from .surfaces import BoundaryPath, c_loop

Label = Tuple  # ("one",) | ("c",) | ("p", circle, start, length)
ONE: Label = ("one",)
CEE: Label = ("c",)


@dataclass
class ExtTable:
    """Basis of Ext(X,Y) with bidegrees and the m_2 multiplication data."""

    source: ArcObject
    target: ArcObject
    basis: List[Label]
    bidegree: Dict[Label, Tuple[int, int]]

    def dims_by_degree(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for b in self.basis:
            d = self.bidegree[b][0]
            out[d] = out.get(d, 0) + 1
        return out

    def dims_tuple(self, lo: int = 0, hi: int = 3) -> Tuple[int, ...]:
        d = self.dims_by_degree()
        if any(k < lo or k > hi for k in d):
            raise AInftyError(f"Ext degrees outside [{lo},{hi}]: {sorted(d)}")
        return tuple(d.get(i, 0) for i in range(lo, hi + 1))

    @property
    def total_dim(self) -> int:
        return len(self.basis)


def ext_basis(cat: AInftyCategory, x: ArcObject, y: ArcObject
              ) -> ExtTable:
    """Basis of Ext(X,Y): paths strictly inside a distinguished loop, plus
    1 and the loop class when X = Y."""
    basis: List[Label] = []
    bide: Dict[Label, Tuple[int, int]] = {}
    if x == y:
        basis.append(ONE)
        bide[ONE] = (0, 0)
        basis.append(CEE)
        cpath = _c_rep(cat, x)
        bide[CEE] = cat.elem_bidegree(("p",) + cpath.key(), x, y)
    arcs = cat.arcs
    for circle in arcs.circles:
        d = len(circle)
        full = circle.winding * d
        for start in range(d):
            if circle.ends[start][0] != x.arc:
                continue
            for length in range(1, full):
                if circle.ends[(start + length) % d][0] != y.arc:
                    continue
                p = BoundaryPath(arcs, cat.grading, circle, start, length)
                label = ("p",) + p.key()
                basis.append(label)
                bide[label] = cat.elem_bidegree(label, x, y)
    return ExtTable(x, y, basis, bide)


def _c_rep(cat: AInftyCategory, x: ArcObject) -> BoundaryPath:
    """Representative full loop for the class [c] in Ext(X,X): the loop at
    the source end of X."""
    end = (x.arc, cat.object_source_end(x))
    return c_loop(cat.arcs, cat.grading, end)


def _label_rep(cat: AInftyCategory, label: Label, x: ArcObject) -> Elem:
    if label == ONE:
        return SIGMA
    if label == CEE:
        return ("p",) + _c_rep(cat, x).key()
    return label


def reduce_elem(cat: AInftyCategory, elem: Elem) -> Optional[Label]:
    """Class of a bare Hom element in the Ext quotient (None = zero)."""
    if elem == SIGMA:
        return ONE
    p = cat.path(elem[1:])
    if not p.winds_full_loop():
        return elem
    if p.is_c_loop():
        return CEE
    return None


def ext_product(cat: AInftyCategory, a: Label, x: ArcObject, y: ArcObject,
                b: Label, z: ArcObject
                ) -> Optional[Tuple[Fraction, Label]]:
    """Class of m_2(a, b) in Ext(Z, Y): b in Ext(Z,X) applied first, then
    a in Ext(X,Y)."""
    ea = _label_rep(cat, a, x)
    eb = _label_rep(cat, b, z)
    res = cat.m2_component(eb, ea, (z, x, y))
    if res is None:
        return None
    coeff, elem = res
    lab = reduce_elem(cat, elem)
    if lab is None:
        return None
    return coeff, lab


def multiplication_table(cat: AInftyCategory, x: ArcObject
                         ) -> Dict[Tuple[Label, Label],
                                   Tuple[Fraction, Label]]:
    """m_2 on the Ext(X,X) basis (pairs with nonzero product only)."""
    table = {}
    et = ext_basis(cat, x, x)
    for a in et.basis:
        for b in et.basis:
            res = ext_product(cat, a, x, x, b, x)
            if res is not None:
                table[(a, b)] = res
    return table


# ---------------------------------------------------------------------------
# tau and the CY pairing
# ---------------------------------------------------------------------------


def tau_label(label: Optional[Label]) -> Fraction:
    return Fraction(1) if label == CEE else Fraction(0)


def tau_elem(cat: AInftyCategory, elem: Elem) -> Fraction:
    """tau on Hom(X,X): 1 on each full distinguished loop, else 0."""
    if elem == SIGMA:
        return Fraction(0)
    return Fraction(1) if cat.path(elem[1:]).is_c_loop() else Fraction(0)


def pairing_matrix(cat: AInftyCategory, x: ArcObject, y: ArcObject
                   ) -> Tuple[List[List[Fraction]], ExtTable, ExtTable]:
    """Matrix of (a, b) -> tau(m_2(a, b)) over the Ext bases."""
    ext_xy = ext_basis(cat, x, y)
    ext_yx = ext_basis(cat, y, x)
    rows = []
    for a in ext_xy.basis:
        row = []
        for b in ext_yx.basis:
            res = ext_product(cat, a, x, y, b, y)
            row.append(res[0] * tau_label(res[1]) if res else Fraction(0))
        rows.append(row)
    return rows, ext_xy, ext_yx


def is_perfect_pairing(matrix: List[List[Fraction]]) -> bool:
    """True iff the matrix is square with exactly one nonzero entry, equal
    to +-1, in every row and column."""
    n = len(matrix)
    if n == 0:
        return True
    if any(len(r) != n for r in matrix):
        return False
    col_used = [False] * n
    for row in matrix:
        nz = [j for j, v in enumerate(row) if v != 0]
        if len(nz) != 1 or abs(row[nz[0]]) != 1 or col_used[nz[0]]:
            return False
        col_used[nz[0]] = True
    return True


def tau_and_pairing(cat: AInftyCategory, x: ArcObject, y: ArcObject) -> dict:
    """Pairing matrix, non-degeneracy verdict, and the Hochschild-boundary
    spot checks of the CY functional."""
    matrix, ext_xy, ext_yx = pairing_matrix(cat, x, y)
    report = {
        "matrix": [[str(v) for v in row] for row in matrix],
        "perfect": is_perfect_pairing(matrix),
        "dim_xy": ext_xy.total_dim,
        "dim_yx": ext_yx.total_dim,
        "hochschild_commutator_ok": _hochschild_commutator_check(cat, x, y),
        "hochschild_disk_ok": _hochschild_disk_check(cat),
    }
    return report


def _hochschild_commutator_check(cat: AInftyCategory, x: ArcObject,
                                 y: ArcObject) -> bool:
    """tau(a b) = tau(b a) whenever both compositions are defined (the
    degree-3 commutator pattern of the cyclic functional)."""
    ext_xy = ext_basis(cat, x, y)
    ext_yx = ext_basis(cat, y, x)
    ok = True
    for a in ext_xy.basis:
        for b in ext_yx.basis:
            ra = _label_rep(cat, a, x)
            rb = _label_rep(cat, b, y)
            if ra == SIGMA or rb == SIGMA:
                continue
            pa, pb = cat.path(ra[1:]), cat.path(rb[1:])
            ab = pb.concat(pa)   # b then a : Y -> Y
            ba = pa.concat(pb)   # a then b : X -> X
            if ab is None or ba is None:
                continue
            if tau_elem(cat, ("p",) + ab.key()) != tau_elem(
                    cat, ("p",) + ba.key()):
                ok = False
    return ok


def _hochschild_disk_check(cat: AInftyCategory) -> bool:
    """For every degree-0 disk word and complementary path b of its first
    path, both closures b*a_1 and a_1*b are full loops, so tau agrees."""
    ok = True
    for disk in cat.index.disks:
        if disk.k != 0:
            continue
        a1 = cat.path(disk.word[0])
        circle = a1.circle
        full = circle.winding * len(circle)
        rest = full - a1.length
        if rest <= 0:
            continue
        d = len(circle)
        b = BoundaryPath(cat.arcs, cat.grading, circle,
                         (a1.start + a1.length) % d, rest)
        ba1 = a1.concat(b)    # a_1 then b: full loop at source of a_1
        a1b = b.concat(a1)    # b then a_1: full loop at source of b
        if ba1 is None or a1b is None:
            ok = False
            continue
        if not (ba1.is_c_loop() and a1b.is_c_loop()):
            ok = False
        if tau_elem(cat, ("p",) + ba1.key()) != tau_elem(
                cat, ("p",) + a1b.key()):
            ok = False
    return ok


# ---------------------------------------------------------------------------
# Euler form
# ---------------------------------------------------------------------------


def euler_form(cat: AInftyCategory, x: ArcObject, y: ArcObject) -> int:
    """chi(X,Y) = sum_i (-1)^i dim Ext^i(X,Y)."""
    et = ext_basis(cat, x, y)
    total = 0
    for b in et.basis:
        d = et.bidegree[b][0]
        total += (-1) ** (d % 2)
    return total


def euler_antisymmetrized(cat: AInftyCategory, x: ArcObject,
                          y: ArcObject) -> int:
    return euler_form(cat, x, y) - euler_form(cat, y, x)


# ---------------------------------------------------------------------------
# Shift functors
# ---------------------------------------------------------------------------


def shift_morphism(cat: AInftyCategory, mor: Morphism, m: int, n: int
                   ) -> Morphism:
    """S_{m,n}(a) = (-1)^{pi(a)(m+n)} a between the shifted objects."""
    src = mor.source.shifted(m, n)
    tgt = mor.target.shifted(m, n)
    terms = {}
    for (elem, k), c in mor.terms.items():
        _, par = cat.elem_bidegree(elem, mor.source, mor.target)
        sign = (-1) ** (par * ((m + n) % 2))
        terms[(elem, k)] = c * sign
    return Morphism(cat, src, tgt, terms)


def shift_functor_check(cat: AInftyCategory, m: int, n: int,
                        max_len: int = 6, max_tuples: int = 400) -> dict:
    """Verify S_{m,n} is a strict functor and sigma_{m,n} natural.

    Checks, on sampled data: compatibility with m_0; strictness on all
    composable pairs and on every disk word; the group law S_m S_r =
    S_{m+r}; and the naturality sign identity for sigma."""
    from .averify import _objects_for

    failures = []
    arcs = cat.arcs
    # m0 compatibility
    for a in range(arcs.n_arcs):
        x = ArcObject(a)
        lhs = shift_morphism(cat, cat.m0(x), m, n)
        rhs = cat.m0(x.shifted(m, n))
        if lhs != rhs:
            failures.append({"check": "m0", "arc": a})
    # strictness on composable pairs and disk words
    words = []
    from .surfaces import enumerate_boundary_paths

    paths = enumerate_boundary_paths(arcs, cat.grading, max_len)
    for p in paths[:40]:
        for q in paths:
            if q.source_arc != p.target_arc:
                continue
            words.append((("p",) + p.key(), ("p",) + q.key()))
            if len(words) > max_tuples // 2:
                break
        if len(words) > max_tuples // 2:
            break
    for disk in cat.index.disks:
        words.append(tuple(("p",) + key for key in disk.word))
    for w in words[:max_tuples]:
        objects = _objects_for(w, cat)
        if objects is None:
            continue
        mors = [Morphism(cat, objects[i], objects[i + 1],
                         {(e, 0): Fraction(1)})
                for i, e in enumerate(w)]
        lhs = shift_morphism(cat, cat.m_full(mors), m, n)
        rhs = cat.m_full([shift_morphism(cat, f, m, n) for f in mors])
        if lhs != rhs:
            failures.append({"check": "strict", "word": [list(e[1:])
                                                         for e in w]})
    # group law on sample morphisms
    for p in paths[:20]:
        x = ArcObject(p.source_arc)
        y = ArcObject(p.target_arc)
        f = cat.path_morphism(p, x, y)
        a_then_b = shift_morphism(cat, shift_morphism(cat, f, m, n), 1, 1)
        direct = shift_morphism(cat, f, m + 1, n + 1)
        if a_then_b != direct:
            failures.append({"check": "group-law", "path": list(p.key())})
    # sigma naturality: 0 = m_2(S(a), sigma_X) + sign m_2(sigma_Y, a)
    t_deg, t_par = -m, n % 2
    for p in paths[:60]:
        x = ArcObject(p.source_arc)
        y = ArcObject(p.target_arc)
        a = cat.path_morphism(p, x, y)
        d, par = cat.elem_bidegree(("p",) + p.key(), x, y)
        first = cat.m_full([cat.sigma(x, m, n), shift_morphism(cat, a, m, n)])
        second = cat.m_full([a, cat.sigma(y, m, n)])
        sign = (-1) ** ((t_deg - 1) * (d - 1) + t_par * par)
        total = first + second.scale(sign)
        if not total.is_zero():
            failures.append({"check": "naturality", "path": list(p.key())})
    return {"checked": len(words[:max_tuples]) + arcs.n_arcs + 80,
            "failures": failures}
