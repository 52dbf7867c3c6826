"""Literal verification of the component-level structure equations.

For every candidate basis tuple the full alternating sum over inner/outer
splittings is evaluated exactly; any nonzero residual is reported with the
offending tuple.  Candidate tuples are generated so that every tuple with at
least one structurally nonzero term is covered:

  * all object-composable chains of length <= 3 (the binary and curvature
    relations live there),
  * disk words with either end extended by a continuation path,
  * the above with one extra element attached, one slot split in two, or a
    distinguished-loop slot removed (the patterns produced by inner
    insertions of m_2, m_0 and the disk terms).

Tuples outside this set have every term zero term-by-term; a brute-force
scan over all small tuples is available to cross-check that claim.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .ainfty import AInftyCategory, ArcObject, Elem, SIGMA
from .surfaces import ArcSystem, BoundaryPath, GradingAssignment

TupleKey = Tuple[Elem, ...]


def _objects_for(word: Sequence[Elem], cat: AInftyCategory
                 ) -> Optional[List[ArcObject]]:
    """Unshifted object chain of a path tuple, or None if not composable."""
    objs: List[ArcObject] = []
    prev_target: Optional[int] = None
    for e in word:
        if e == SIGMA:
            return None
        _, ci, start, length = e
        p = cat.path((ci, start, length))
        if prev_target is not None and p.source_arc != prev_target:
            return None
        if prev_target is None:
            objs.append(ArcObject(p.source_arc))
        objs.append(ArcObject(p.target_arc))
        prev_target = p.target_arc
    return objs


def relation_residuals(cat: AInftyCategory, word: Sequence[Elem],
                       objects: Sequence[ArcObject], d_max: int
                       ) -> Dict[int, Dict[Elem, Fraction]]:
    """Residual of the structure equation per eta-degree d (0..d_max)."""
    n = len(word)
    norm_prefix = [0]
    par_prefix = [0]
    for i, e in enumerate(word):
        deg, par = cat.elem_bidegree(e, objects[i], objects[i + 1])
        norm_prefix.append(norm_prefix[-1] + deg - 1)
        par_prefix.append(par_prefix[-1] + par)
    residuals: Dict[int, Dict[Elem, Fraction]] = {
        d: {} for d in range(d_max + 1)}

    def add(d: int, elem: Elem, coeff: Fraction) -> None:
        if d > d_max:
            return
        bucket = residuals[d]
        val = bucket.get(elem, Fraction(0)) + coeff
        if val:
            bucket[elem] = val
        else:
            bucket.pop(elem, None)

    r_values = sorted({0} | cat.disk_degrees)

    def outer(outer_word, outer_objects, s: int, c_in: Fraction,
              sign: int) -> None:
        for r in r_values:
            if r + s > d_max:
                break
            for c_out, elem_out in cat.m_component(
                    outer_word, outer_objects, r):
                add(r + s, elem_out, sign * c_in * c_out)

    for i in range(n + 1):
        sgn_base = norm_prefix[i]
        sgn_par = par_prefix[i]
        for j in range(0, n - i + 1):
            if j == 0:
                # inner m_{0,1} at object X_i
                if d_max < 1:
                    continue
                s = 1
                sign = (-1) ** ((s + 1) * sgn_base + s * (sgn_par + 1))
                x = objects[i]
                ow = list(word[:i]) + [None] + list(word[i:])
                oo = list(objects[:i + 1]) + list(objects[i:])
                for c_in, elem_in in cat.m01_elems(x):
                    ow[i] = elem_in
                    outer(list(ow), oo, s, c_in, sign)
                continue
            inner_word = tuple(word[i:i + j])
            inner_objects = tuple(objects[i:i + j + 1])
            for s in r_values:
                if s > min(cat.max_k, d_max):
                    break
                inner = cat.m_component(inner_word, inner_objects, s)
                if not inner:
                    continue
                sign = (-1) ** ((s + 1) * sgn_base + s * (sgn_par + 1))
                ow_tail = list(word[i + j:])
                oo = list(objects[:i + 1]) + list(objects[i + j:])
                for c_in, elem_in in inner:
                    outer(list(word[:i]) + [elem_in] + ow_tail, oo, s,
                          c_in, sign)
    return residuals


# ---------------------------------------------------------------------------
# Candidate tuples
# ---------------------------------------------------------------------------


def _all_paths(cat: AInftyCategory, max_len: int) -> List[BoundaryPath]:
    from .surfaces import enumerate_boundary_paths

    return enumerate_boundary_paths(cat.arcs, cat.grading, max_len)


def _continuations_from_end(cat: AInftyCategory, end, max_len: int
                            ) -> List[BoundaryPath]:
    """Paths starting at a given arc end."""
    circle, i = cat.arcs.circle_of_end(end)
    return [BoundaryPath(cat.arcs, cat.grading, circle, i, l)
            for l in range(1, max_len + 1)]


def _paths_into_end(cat: AInftyCategory, end, max_len: int
                    ) -> List[BoundaryPath]:
    """Paths ending at a given arc end."""
    circle, i = cat.arcs.circle_of_end(end)
    d = len(circle)
    return [BoundaryPath(cat.arcs, cat.grading, circle, (i - l) % d, l)
            for l in range(1, max_len + 1)]


def _next_elems(cat: AInftyCategory, e: Elem, max_len: int) -> List[Elem]:
    """Basis paths object-composable after e (either end of the target arc)."""
    p = cat.path(e[1:])
    arc = p.target_arc
    out = []
    for end in ((arc, 0), (arc, 1)):
        for q in _continuations_from_end(cat, end, max_len):
            out.append(("p",) + q.key())
    return out


def candidate_tuples(cat: AInftyCategory, max_n: int, max_len: int
                     ) -> Set[TupleKey]:
    """Tuples with at least one structurally nonzero relation term."""
    cands: Set[TupleKey] = set()
    paths = _all_paths(cat, max_len)
    elems = [("p",) + p.key() for p in paths]
    # chains of length 1..3
    for e in elems:
        cands.add((e,))
    for e in elems:
        for e2 in _next_elems(cat, e, max_len):
            if min(2, max_n) >= 2:
                cands.add((e, e2))
            if max_n >= 3:
                for e3 in _next_elems(cat, e2, max_len):
                    cands.add((e, e2, e3))
    # disk-based families
    fire_words = _fire_words(cat, max_n, max_len)
    for w in fire_words:
        if len(w) <= max_n and _lens_ok(w, max_len):
            cands.add(w)
        # one element attached on either side
        if len(w) + 1 <= max_n:
            first = cat.path(w[0][1:])
            arc0 = first.source_arc
            for end in ((arc0, 0), (arc0, 1)):
                for q in _paths_into_end(cat, end, max_len):
                    t = (("p",) + q.key(),) + w
                    if _lens_ok(t, max_len):
                        cands.add(t)
            for e2 in _next_elems(cat, w[-1], max_len):
                t = w + (e2,)
                if _lens_ok(t, max_len):
                    cands.add(t)
        # one slot split in two
        for pos in range(len(w)):
            if len(w) + 1 > max_n:
                break
            p = cat.path(w[pos][1:])
            for t in range(1, p.length):
                a, b = p.prefix(t), p.suffix_from(t)
                tup = (w[:pos] + (("p",) + a.key(), ("p",) + b.key())
                       + w[pos + 1:])
                if _lens_ok(tup, max_len):
                    cands.add(tup)
        # a distinguished-loop slot removed
        for pos in range(len(w)):
            p = cat.path(w[pos][1:])
            if p.is_c_loop() and len(w) >= 2:
                tup = w[:pos] + w[pos + 1:]
                if _lens_ok(tup, max_len):
                    cands.add(tup)
    return {t for t in cands
            if len(t) <= max_n and _objects_for(t, cat) is not None}


def _lens_ok(word: TupleKey, max_len: int) -> bool:
    return all(e[3] <= max_len for e in word)


def _fire_words(cat: AInftyCategory, max_n: int, max_len: int
                ) -> Set[TupleKey]:
    """Disk words (all rotations) plus their one-end extensions."""
    out: Set[TupleKey] = set()
    for word, _k in cat.index.linear.items():
        if len(word) > max_n:
            continue
        w = tuple(("p",) + key for key in word)
        out.add(w)
        # extend the last path forward
        last = cat.path(word[-1])
        circle = last.circle
        for extra in range(1, max_len):
            if last.length + extra > max_len:
                break
            ext = BoundaryPath(cat.arcs, cat.grading, circle, last.start,
                               last.length + extra)
            out.add(w[:-1] + (("p",) + ext.key(),))
        # extend the first path backward
        first = cat.path(word[0])
        d = len(first.circle)
        for extra in range(1, max_len):
            if first.length + extra > max_len:
                break
            ext = BoundaryPath(cat.arcs, cat.grading, first.circle,
                               (first.start - extra) % d,
                               first.length + extra)
            out.add((("p",) + ext.key(),) + w[1:])
    return out


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def verify_relations(arcs: ArcSystem, grading: GradingAssignment,
                     max_n: int = 6, eta_cap: int = 3, max_len: int = 12,
                     cat: AInftyCategory | None = None,
                     threads: int = 1) -> dict:
    """Evaluate the structure equation on every candidate tuple.

    Returns {"checked": N, "failures": [{"tuple": ..., "d": d,
    "residual": ...}]}; an empty failure list means every residual within
    the bounds is exactly zero.
    """
    if cat is None:
        cat = AInftyCategory(arcs, grading, eta_cap=eta_cap,
                             max_n=max_n + 1, max_k=eta_cap)
    cands = sorted(candidate_tuples(cat, max_n, max_len))
    failures: List[dict] = []

    def check(t: TupleKey) -> Optional[dict]:
        objects = _objects_for(t, cat)
        res = relation_residuals(cat, t, objects, eta_cap)
        bad = {d: v for d, v in res.items() if v}
        if bad:
            return {
                "tuple": [list(e[1:]) for e in t],
                "residual": {
                    str(d): {repr(e): str(c) for e, c in v.items()}
                    for d, v in bad.items()},
            }
        return None

    results = _map_deterministic(check, cands, threads)
    for r in results:
        if r is not None:
            failures.append(r)
    return {"checked": len(cands), "failures": failures}


def brute_force_relations(arcs: ArcSystem, grading: GradingAssignment,
                          max_n: int = 3, max_len: int = 4,
                          eta_cap: int = 2) -> dict:
    """Exhaustive scan over ALL object-composable tuples up to small bounds
    (cross-check that skipped tuples really have zero residual)."""
    cat = AInftyCategory(arcs, grading, eta_cap=eta_cap, max_n=max_n + 1,
                         max_k=eta_cap)
    paths = _all_paths(cat, max_len)
    elems = [("p",) + p.key() for p in paths]
    failures = []
    checked = 0
    level: List[TupleKey] = [(e,) for e in elems]
    for n in range(1, max_n + 1):
        for t in level:
            objects = _objects_for(t, cat)
            res = relation_residuals(cat, t, objects, eta_cap)
            checked += 1
            bad = {d: v for d, v in res.items() if v}
            if bad:
                failures.append({"tuple": [list(e[1:]) for e in t],
                                 "residual": str(bad)})
        if n < max_n:
            level = [t + (e2,) for t in level
                     for e2 in _next_elems(cat, t[-1], max_len)]
    return {"checked": checked, "failures": failures}


def _map_deterministic(fn, items: Sequence, threads: int) -> List:
    """Map preserving order; thread fan-out keeps the output identical."""
    if threads <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
