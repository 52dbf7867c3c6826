"""Twisted complexes over the arc category: matrix morphisms, the
delta-insertion structure maps, Maurer-Cartan residuals, and the double
complex DX = (X + X[2,1], [[0, 1_X eta], [-m_0(X) eta^{-1}, 0]])."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .ainfty import (
    AInftyCategory,
    AInftyError,
    ArcObject,
    Morphism,
    NonNilpotentDelta,
    SIGMA,
)

Entry = Tuple[int, int]  # (target summand, source summand)


class TwistedComplex:
    """Formal sum of shifted arcs with a differential delta whose mod-eta
    part is nilpotent (acyclic on summands)."""

    def __init__(self, cat: AInftyCategory, summands: Sequence[ArcObject],
                 delta: Mapping[Entry, Morphism] | None = None,
                 check: bool = True):
        self.cat = cat
        self.summands = list(summands)
        self.delta: Dict[Entry, Morphism] = {}
        if delta:
            for (i, j), mor in delta.items():
                if mor.is_zero():
                    continue
                if (mor.source != self.summands[j]
                        or mor.target != self.summands[i]):
                    raise AInftyError(
                        f"delta[{i},{j}] endpoints do not match summands")
                self.delta[(i, j)] = mor
        if check:
            self._check_delta()

    def _check_delta(self) -> None:
        for (i, j), mor in self.delta.items():
            if not mor.is_homogeneous((1, 0)):
                raise AInftyError(
                    f"delta[{i},{j}] is not of bidegree (1,0): "
                    f"{sorted(mor.bidegrees())}")
        # mod-eta nilpotence: edges with an eta-free term must be acyclic
        edges = {(i, j) for (i, j), mor in self.delta.items()
                 if any(k == 0 for (_, k) in mor.terms)}
        n = len(self.summands)
        reach = {v: {u for (u, w) in edges if w == v} for v in range(n)}
        order: List[int] = []
        marked = [0] * n

        def visit(v, stack):
            if v in stack:
                raise NonNilpotentDelta(
                    "delta has a mod-eta cycle through summand "
                    f"{v}: not strictly triangular")
            if marked[v]:
                return
            stack.add(v)
            for u in reach[v]:
                visit(u, stack)
            stack.discard(v)
            marked[v] = 1
            order.append(v)

        for v in range(n):
            visit(v, set())

    def __len__(self):
        return len(self.summands)

    def __repr__(self):
        return (f"TwistedComplex({len(self.summands)} summands, "
                f"{len(self.delta)} delta entries)")


class MatrixMorphism:
    """Matrix of morphisms between twisted complexes; entry (i, j) maps
    source summand j to target summand i."""

    def __init__(self, cat: AInftyCategory, source: TwistedComplex,
                 target: TwistedComplex,
                 entries: Mapping[Entry, Morphism] | None = None):
        self.cat = cat
        self.source = source
        self.target = target
        self.entries: Dict[Entry, Morphism] = {}
        if entries:
            for (i, j), mor in entries.items():
                if mor.is_zero():
                    continue
                if (mor.source != source.summands[j]
                        or mor.target != target.summands[i]):
                    raise AInftyError(
                        f"entry [{i},{j}] endpoints do not match summands")
                self.entries[(i, j)] = mor

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.entries.values())

    def __add__(self, other: "MatrixMorphism") -> "MatrixMorphism":
        out = dict(self.entries)
        for key, mor in other.entries.items():
            out[key] = out[key] + mor if key in out else mor
        return MatrixMorphism(self.cat, self.source, self.target, out)

    def __neg__(self) -> "MatrixMorphism":
        return MatrixMorphism(self.cat, self.source, self.target,
                              {k: -m for k, m in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, MatrixMorphism):
            return NotImplemented
        keys = set(self.entries) | set(other.entries)
        for k in keys:
            a = self.entries.get(k)
            b = other.entries.get(k)
            if a is None:
                a = self.cat.zero(self.source.summands[k[1]],
                                  self.target.summands[k[0]])
            if b is None:
                b = self.cat.zero(self.source.summands[k[1]],
                                  self.target.summands[k[0]])
            if a != b:
                return False
        return True

    def __repr__(self):
        return f"MatrixMorphism({len(self.entries)} entries)"


def delta_matrix(tc: TwistedComplex) -> MatrixMorphism:
    return MatrixMorphism(tc.cat, tc, tc, tc.delta)


def matrix_m(mats: Sequence[MatrixMorphism]) -> MatrixMorphism:
    """Plain m_n on matrices (no delta insertions), inputs in composition
    order: mats[0] is applied first."""
    if not mats:
        raise AInftyError("matrix_m needs at least one input")
    cat = mats[0].cat
    src = mats[0].source
    tgt = mats[-1].target
    complexes = [src] + [m.target for m in mats]
    for m, c in zip(mats, complexes):
        if m.source is not c and m.source.summands != c.summands:
            raise AInftyError("matrix chain is not composable")
    out: Dict[Entry, Morphism] = {}
    # iterate over all index chains j = i_0 -> i_1 -> ... -> i_n = i
    def chains(level: int, idx: int, acc: List[Morphism]):
        if level == len(mats):
            key = (idx, acc_start[0])
            mor = cat.m_full(acc)
            if not mor.is_zero():
                prev = out.get(key)
                out[key] = prev + mor if prev is not None else mor
            return
        for (i, j), entry in mats[level].entries.items():
            if j == idx:
                acc.append(entry)
                chains(level + 1, i, acc)
                acc.pop()

    acc_start = [0]
    for j0 in range(len(src.summands)):
        acc_start[0] = j0
        chains(0, j0, [])
    return MatrixMorphism(cat, src, tgt, out)


def twisted_m(mats: Sequence[MatrixMorphism],
              max_insertions: int | None = None) -> MatrixMorphism:
    """Structure maps of the twisted-complex category: sum over all ways of
    inserting the deltas of the intermediate complexes."""
    if not mats:
        raise AInftyError("twisted_m needs at least one input")
    cat = mats[0].cat
    complexes = [mats[0].source] + [m.target for m in mats]
    deltas = [delta_matrix(c) for c in complexes]
    if max_insertions is None:
        max_insertions = sum(len(c) for c in complexes) * (cat.eta_cap + 2)
    total: Optional[MatrixMorphism] = None
    for r_total in range(max_insertions + 1):
        layer: Optional[MatrixMorphism] = None
        for comp in _compositions(r_total, len(complexes)):
            seq: List[MatrixMorphism] = []
            for t, m in enumerate(mats):
                seq.extend([deltas[t]] * comp[t])
                seq.append(m)
            seq.extend([deltas[-1]] * comp[-1])
            term = matrix_m(seq)
            layer = term if layer is None else layer + term
        if layer is not None:
            total = layer if total is None else total + layer
        if r_total > sum(len(c) for c in complexes) and (
                layer is None or layer.is_zero()):
            break
    assert total is not None
    return total


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def mc_residual(tc: TwistedComplex) -> MatrixMorphism:
    """Maurer-Cartan residual sum_{n>=0} m_n(delta, ..., delta), including
    the curvature term of every summand."""
    cat = tc.cat
    out = MatrixMorphism(cat, tc, tc, {
        (i, i): cat.m0(obj) for i, obj in enumerate(tc.summands)})
    delta = delta_matrix(tc)
    n_max = len(tc.summands) * (cat.eta_cap + 2) + 2
    for n in range(1, n_max + 1):
        term = matrix_m([delta] * n)
        if term.is_zero() and n > len(tc.summands) + 1:
            break
        out = out + term
    return out


def double_complex(cat: AInftyCategory, x: ArcObject) -> TwistedComplex:
    """DX = (X + X[2,1], [[0, 1_X eta], [-m_0(X) eta^{-1}, 0]])."""
    xs = x.shifted(2, 1)
    unit_eta = Morphism(cat, xs, x, {(SIGMA, 1): Fraction(1)})
    m0 = cat.m0(x)
    minus_m0_over_eta = Morphism(cat, x, xs, {
        (elem, k - 1): -c for (elem, k), c in m0.terms.items()})
    return TwistedComplex(cat, [x, xs], {
        (0, 1): unit_eta,
        (1, 0): minus_m0_over_eta,
    })


def single_object_complex(cat: AInftyCategory, x: ArcObject
                          ) -> TwistedComplex:
    return TwistedComplex(cat, [x], {})


def disk_word_complex(cat: AInftyCategory, word
                      ) -> Tuple[TwistedComplex, ArcObject,
                                 "MatrixMorphism", "MatrixMorphism"]:
    """From a degree-0 disk word (a_1..a_n), build the shifted complex
    Y = X_1 -> ... -> X_{n-1} with differential a_2..a_{n-1}, where shifts
    are chosen so that |a_1| = |a_n| = 0, middle degrees 1, parities 0.

    Returns (Y, X_n', incl = a_1: X_n' -> Y, proj = a_n: Y -> X_n')."""
    paths = [cat.path(key) for key in word]
    n = len(paths)
    if n < 3:
        raise AInftyError("need a disk word of length >= 3")
    # degree shifts: m_0 = 0, |a_1|' = 0 => m_1 = |a_1|,
    # |a_i|' = 1 (2<=i<=n-1) => m_i = m_{i-1} + |a_i| - 1; m_n must be 0.
    ms = [0]
    ns = [0]
    for i, p in enumerate(paths[:-1], start=1):
        target_deg = 0 if i == 1 else 1
        ms.append(ms[-1] + p.degree - target_deg)
        ns.append((ns[-1] + p.parity) % 2)
    if ms[-1] + paths[-1].degree != 0 or (ns[-1] + paths[-1].parity) % 2:
        raise AInftyError("disk word degrees do not close up")
    objects = []
    for i, p in enumerate(paths):
        arc = p.source_arc
        objects.append(ArcObject(arc, ms[i], ns[i]))
    # objects[0] is X_0 = X_n (shift 0); summands are objects[1..n-1]
    summands = objects[1:]
    delta = {}
    for t in range(1, n - 1):
        mor = cat.path_morphism(paths[t], summands[t - 1], summands[t])
        delta[(t, t - 1)] = mor
    y = TwistedComplex(cat, summands, delta)
    xn = objects[0]
    x_cplx = single_object_complex(cat, xn)
    incl = MatrixMorphism(cat, x_cplx, y, {
        (0, 0): cat.path_morphism(paths[0], xn, summands[0])})
    proj = MatrixMorphism(cat, y, x_cplx, {
        (0, n - 2): cat.path_morphism(paths[-1], summands[-1], xn)})
    return y, xn, incl, proj


def inclusion_matrix(cat: AInftyCategory, mor: Morphism,
                     src: TwistedComplex, tgt: TwistedComplex,
                     i: int = 0, j: int = 0) -> MatrixMorphism:
    return MatrixMorphism(cat, src, tgt, {(i, j): mor})
