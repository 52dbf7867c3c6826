"""Arc systems on decorated surfaces as combinatorial ribbon graphs.

A surface with marked points M+ (cone angle 3*pi) and M- (cone angle pi) is
presented by the polygons of the cut surface: each face is a cyclic word of
directed arc sides.  On the real blow-up every marked point becomes a
boundary circle subdivided by arc endpoints into elementary segments; the
segments are exactly the face corners, and boundary paths (the morphism
basis of the arc category) are runs of consecutive segments along a circle.

Conventions.  Faces are traversed with the interior on the left; boundary
circles are traversed with the surface on the left (clockwise around the
marked point).  Side s of arc a is the traversal from end s to end 1-s, so
the directed side (a, s) starts at end (a, s).  Leaving the corner before a
directed side d crosses the arc end at its tail and arrives at the corner
after the opposite side of d.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

Side = Tuple[int, int]      # (arc index, side in {0,1})
Corner = Tuple[int, int]    # (face index, position)
End = Tuple[int, int]       # (arc index, end in {0,1})


class ArcSystemError(ValueError):
    pass


class NonPolygonFace(ArcSystemError):
    pass


class EulerMismatch(ArcSystemError):
    pass


class DanglingArcEndpoint(ArcSystemError):
    pass


class Infeasible(ArcSystemError):
    pass


@dataclass(frozen=True)
class DecoratedSurface:
    """Genus plus counts of M+ (zeros-to-be) and M- (poles-to-be)."""

    genus: int
    m_plus: int
    m_minus: int

    def __post_init__(self):
        if self.genus < 0 or self.m_plus < 0 or self.m_minus < 0:
            raise ArcSystemError("negative counts")
        if self.m_plus - self.m_minus != 4 * self.genus - 4:
            raise ArcSystemError(
                f"|M+|-|M-| = {self.m_plus - self.m_minus} != 4g-4 = "
                f"{4 * self.genus - 4}")
        if self.genus == 0 and self.m_minus < 4:
            raise ArcSystemError("genus 0 needs at least 4 points in M-")
        if self.genus == 1 and self.m_minus < 2:
            raise ArcSystemError("genus 1 needs at least 2 points in M-")


class Circle:
    """Boundary circle of the real blow-up over one marked point.

    ``segments[i]`` is the i-th elementary segment (a face corner) and
    ``ends[i]`` the arc end crossed when entering it, both in boundary-path
    order.
    """

    __slots__ = ("index", "sign", "segments", "ends")

    def __init__(self, index: int, sign: str, segments: List[Corner],
                 ends: List[End]):
        self.index = index
        self.sign = sign  # '+' for M+, '-' for M-
        self.segments = segments
        self.ends = ends

    def __len__(self):
        return len(self.segments)

    @property
    def winding(self) -> int:
        """Full windings of the distinguished loop c_p: 1 over M+, 3 over M-."""
        return 1 if self.sign == "+" else 3

    def __repr__(self):
        return (f"Circle({self.index}, {self.sign!r}, "
                f"{len(self.segments)} segments)")


class ArcSystem:
    """Validated arc system; immutable after construction."""

    def __init__(self, surface: DecoratedSurface,
                 faces: Sequence[Sequence[Side]],
                 circle_signs: Mapping[Corner, str] | None = None,
                 declared_circles: Sequence[dict] | None = None):
        self.surface = surface
        self.faces: List[Tuple[Side, ...]] = [
            tuple((int(a), int(s)) for a, s in f) for f in faces]
        self._validate_sides()
        self._build_circles(circle_signs, declared_circles)
        self._check_euler()

    # -- construction helpers

    def _validate_sides(self) -> None:
        seniors: Dict[Side, Corner] = {}
        arcs = set()
        for fi, face in enumerate(self.faces):
            if len(face) < 3:
                raise NonPolygonFace(
                    f"face {fi} has {len(face)} arc sides (need >= 3)")
            for pos, (a, s) in enumerate(face):
                if s not in (0, 1):
                    raise ArcSystemError(f"bad side {(a, s)}")
                if (a, s) in seniors:
                    raise DanglingArcEndpoint(
                        f"side {(a, s)} used more than once")
                seniors[(a, s)] = (fi, pos)
                arcs.add(a)
        for a in arcs:
            if (a, 0) not in seniors or (a, 1) not in seniors:
                raise DanglingArcEndpoint(f"arc {a} is missing a side")
        if arcs != set(range(len(arcs))):
            raise ArcSystemError("arcs must be indexed 0..n-1")
        self.n_arcs = len(arcs)
        self.side_loc = seniors

    def _next_corner(self, corner: Corner) -> Tuple[Corner, End]:
        fi, pos = corner
        face = self.faces[fi]
        d_out = face[(pos + 1) % len(face)]
        a, s = d_out
        opp = self.side_loc[(a, 1 - s)]
        return opp, (a, s)

    def _build_circles(self, circle_signs, declared) -> None:
        all_corners = [(fi, pos) for fi, face in enumerate(self.faces)
                       for pos in range(len(face))]
        seen: Dict[Corner, Tuple[int, int]] = {}
        circles_raw: List[Tuple[List[Corner], List[End]]] = []
        for start in all_corners:
            if start in seen:
                continue
            segments: List[Corner] = []
            ends: List[End] = []
            c = start
            while True:
                seen[c] = (len(circles_raw), len(segments))
                segments.append(c)
                nxt, end = self._next_corner(c)
                ends.append(end)  # crossed when leaving c into nxt
                c = nxt
                if c == start:
                    break
            # ends[i] as built is crossed LEAVING segments[i]; shift so that
            # ends[i] is crossed ENTERING segments[i].
            ends = [ends[-1]] + ends[:-1]
            circles_raw.append((segments, ends))
        n = len(circles_raw)
        expected = self.surface.m_plus + self.surface.m_minus
        if n != expected:
            raise EulerMismatch(
                f"{n} boundary circles but {expected} marked points declared")
        signs = self._resolve_signs(circles_raw, circle_signs, declared)
        self.circles = [Circle(i, signs[i], segs, ends)
                        for i, (segs, ends) in enumerate(circles_raw)]
        self.corner_loc: Dict[Corner, Tuple[int, int]] = seen
        self.end_loc: Dict[End, Tuple[int, int]] = {}
        for ci, circle in enumerate(self.circles):
            for i, e in enumerate(circle.ends):
                self.end_loc[e] = (ci, i)
        n_plus = sum(1 for c in self.circles if c.sign == "+")
        n_minus = n - n_plus
        if n_plus != self.surface.m_plus or n_minus != self.surface.m_minus:
            raise ArcSystemError(
                f"circle tags (+:{n_plus} -:{n_minus}) disagree with the "
                f"declared counts (+:{self.surface.m_plus} "
                f"-:{self.surface.m_minus})")

    def _resolve_signs(self, circles_raw, circle_signs, declared) -> List[str]:
        signs: List[str | None] = [None] * len(circles_raw)
        if declared is not None:
            for entry in declared:
                segs = [tuple(map(int, c)) for c in entry["segments"]]
                sign = entry["type"]
                if sign not in "+-" or not segs:
                    raise ArcSystemError(f"bad circle entry {entry!r}")
                matched = None
                for i, (segments, _) in enumerate(circles_raw):
                    if len(segments) != len(segs):
                        continue
                    if set(segments) == set(segs):
                        # require cyclic-order agreement
                        d = len(segments)
                        off = segments.index(segs[0])
                        if all(segments[(off + t) % d] == segs[t]
                               for t in range(d)):
                            matched = i
                            break
                if matched is None:
                    raise ArcSystemError(
                        f"declared circle {segs} does not match any derived "
                        "boundary circle")
                if signs[matched] is not None:
                    raise ArcSystemError("circle declared twice")
                signs[matched] = sign
        elif circle_signs is not None:
            for corner, sign in circle_signs.items():
                for i, (segments, _) in enumerate(circles_raw):
                    if tuple(corner) in segments:
                        signs[i] = sign
                        break
        if any(s is None for s in signs):
            raise ArcSystemError("every boundary circle needs a +/- tag")
        return [s for s in signs]  # type: ignore[misc]

    def _check_euler(self) -> None:
        v = len(self.circles)
        e = self.n_arcs
        f = len(self.faces)
        chi = v - e + f
        if chi != 2 - 2 * self.surface.genus:
            raise EulerMismatch(
                f"V-E+F = {v}-{e}+{f} = {chi} but genus {self.surface.genus} "
                f"needs {2 - 2 * self.surface.genus}")

    # -- queries

    def circle_of_end(self, end: End) -> Tuple[Circle, int]:
        ci, i = self.end_loc[tuple(end)]
        return self.circles[ci], i

    def arc_end_circles(self, arc: int) -> Tuple[int, int]:
        return (self.end_loc[(arc, 0)][0], self.end_loc[(arc, 1)][0])

    def __repr__(self):
        return (f"ArcSystem(g={self.surface.genus}, "
                f"+{self.surface.m_plus}/-{self.surface.m_minus}, "
                f"{self.n_arcs} arcs, {len(self.faces)} faces)")


# ---------------------------------------------------------------------------
# Grading
# ---------------------------------------------------------------------------


class GradingAssignment:
    """Integer degree per elementary segment plus an orientation per arc.

    The degrees satisfy: each face word sums to (number of sides) - 2, and
    each boundary circle sums to 3 over M+ and 1 over M-.  Orientation 0
    means the arc runs from end 0 to end 1.
    """

    __slots__ = ("arcs", "segment_degree", "arc_orientation")

    def __init__(self, arcs: ArcSystem,
                 segment_degree: Mapping[Corner, int],
                 arc_orientation: Mapping[int, int]):
        self.arcs = arcs
        self.segment_degree = dict(segment_degree)
        self.arc_orientation = dict(arc_orientation)
        self._check()

    def _check(self) -> None:
        for fi, face in enumerate(self.arcs.faces):
            total = sum(self.segment_degree[(fi, pos)]
                        for pos in range(len(face)))
            if total != len(face) - 2:
                raise Infeasible(f"face {fi} degree sum {total} != "
                                 f"{len(face) - 2}")
        for circle in self.arcs.circles:
            total = sum(self.segment_degree[c] for c in circle.segments)
            want = 3 if circle.sign == "+" else 1
            if total != want:
                raise Infeasible(
                    f"circle {circle.index} degree sum {total} != {want}")

    def source_end(self, arc: int) -> int:
        return self.arc_orientation[arc]

    def regrade_arc(self, arc: int, shift: int) -> "GradingAssignment":
        """Shift one arc's grading: paths ending at the arc lose ``shift``,
        paths starting there gain it.  Face and circle sums are preserved."""
        deg = dict(self.segment_degree)
        for end in ((arc, 0), (arc, 1)):
            circle, i = self.arcs.circle_of_end(end)
            d = len(circle)
            seg_after = circle.segments[i]
            seg_before = circle.segments[(i - 1) % d]
            deg[seg_after] = deg[seg_after] + shift
            deg[seg_before] = deg[seg_before] - shift
        return GradingAssignment(self.arcs, deg, self.arc_orientation)


def solve_grading(arcs: ArcSystem) -> GradingAssignment:
    """Solve the face and circle constraints for integer segment degrees.

    Gaussian elimination over Q with a fixed pivot order (segments sorted
    lexicographically), free variables set to zero; the incidence structure
    (each segment lies in one face and one circle) makes the basic solution
    integral whenever the system is consistent.
    """
    corners = sorted(self_corners(arcs))
    index = {c: i for i, c in enumerate(corners)}
    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    for fi, face in enumerate(arcs.faces):
        row = [Fraction(0)] * len(corners)
        for pos in range(len(face)):
            row[index[(fi, pos)]] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(len(face) - 2))
    for circle in arcs.circles:
        row = [Fraction(0)] * len(corners)
        for c in circle.segments:
            row[index[c]] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(3 if circle.sign == "+" else 1))
    sol = _solve_integer(rows, rhs, len(corners))
    degree = {c: sol[i] for c, i in index.items()}
    orientation = {a: 0 for a in range(arcs.n_arcs)}
    return GradingAssignment(arcs, degree, orientation)


def self_corners(arcs: ArcSystem) -> List[Corner]:
    return [(fi, pos) for fi, face in enumerate(arcs.faces)
            for pos in range(len(face))]


def _solve_integer(rows: List[List[Fraction]], rhs: List[Fraction],
                   ncols: int) -> List[int]:
    m = [row[:] + [b] for row, b in zip(rows, rhs)]
    nrows = len(m)
    pivots: List[Tuple[int, int]] = []
    r = 0
    for col in range(ncols):
        piv = None
        for rr in range(r, nrows):
            if m[rr][col] != 0:
                piv = rr
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        scale = m[r][col]
        m[r] = [x / scale for x in m[r]]
        for rr in range(nrows):
            if rr != r and m[rr][col] != 0:
                f = m[rr][col]
                m[rr] = [x - f * y for x, y in zip(m[rr], m[r])]
        pivots.append((r, col))
        r += 1
        if r == nrows:
            break
    for rr in range(r, nrows):
        if m[rr][ncols] != 0:
            raise Infeasible("grading constraints are inconsistent")
    sol = [Fraction(0)] * ncols
    for rr, col in pivots:
        sol[col] = m[rr][ncols]
    out: List[int] = []
    for v in sol:
        if v.denominator != 1:
            raise Infeasible(f"non-integral solution component {v}")
        out.append(int(v))
    return out


# ---------------------------------------------------------------------------
# Boundary paths
# ---------------------------------------------------------------------------


class BoundaryPath:
    """Nonempty run of ``length`` segments along one boundary circle,
    starting at the arc end ``circle.ends[start]``."""

    __slots__ = ("arcs", "grading", "circle", "start", "length",
                 "_degree", "_hash")

    def __init__(self, arcs: ArcSystem, grading: GradingAssignment,
                 circle: Circle, start: int, length: int):
        if length < 1:
            raise ArcSystemError("paths are nonempty")
        self.arcs = arcs
        self.grading = grading
        self.circle = circle
        self.start = start % len(circle)
        self.length = length
        self._degree = None
        self._hash = hash((circle.index, self.start, length))

    # -- endpoints

    @property
    def start_end(self) -> End:
        return self.circle.ends[self.start]

    @property
    def end_end(self) -> End:
        return self.circle.ends[(self.start + self.length)
                                % len(self.circle)]

    @property
    def source_arc(self) -> int:
        return self.start_end[0]

    @property
    def target_arc(self) -> int:
        return self.end_end[0]

    def segments(self) -> List[Corner]:
        d = len(self.circle)
        return [self.circle.segments[(self.start + i) % d]
                for i in range(self.length)]

    # -- bidegree data

    @property
    def degree(self) -> int:
        if self._degree is None:
            deg = self.grading.segment_degree
            self._degree = sum(deg[c] for c in self.segments())
        return self._degree

    @property
    def eps_minus(self) -> int:
        arc, end = self.start_end
        return 0 if end == self.grading.source_end(arc) else 1

    @property
    def eps_plus(self) -> int:
        arc, end = self.end_end
        return 0 if end == self.grading.source_end(arc) else 1

    @property
    def parity(self) -> int:
        return (self.degree + self.eps_minus + self.eps_plus) % 2

    # -- structure

    def key(self) -> Tuple[int, int, int]:
        return (self.circle.index, self.start, self.length)

    def __eq__(self, other):
        return (isinstance(other, BoundaryPath)
                and self.key() == other.key())

    def __hash__(self):
        return self._hash

    def concat(self, other: "BoundaryPath") -> "BoundaryPath | None":
        """Path following self then other (other starts where self ends)."""
        if other.circle.index != self.circle.index:
            return None
        if other.start != (self.start + self.length) % len(self.circle):
            return None
        return BoundaryPath(self.arcs, self.grading, self.circle,
                            self.start, self.length + other.length)

    def prefix(self, t: int) -> "BoundaryPath":
        return BoundaryPath(self.arcs, self.grading, self.circle,
                            self.start, t)

    def suffix_from(self, t: int) -> "BoundaryPath":
        return BoundaryPath(self.arcs, self.grading, self.circle,
                            (self.start + t) % len(self.circle),
                            self.length - t)

    def is_c_loop(self) -> bool:
        return self.length == self.circle.winding * len(self.circle)

    def winds_full_loop(self) -> bool:
        return self.length >= self.circle.winding * len(self.circle)

    def __repr__(self):
        return (f"Path(c{self.circle.index},s{self.start},l{self.length};"
                f"deg={self.degree},par={self.parity})")


def c_loop(arcs: ArcSystem, grading: GradingAssignment,
           end: End) -> BoundaryPath:
    """The distinguished loop around the circle at the given arc end: one
    full turn over M+, three over M-; bidegree (3, 1)."""
    circle, i = arcs.circle_of_end(end)
    return BoundaryPath(arcs, grading, circle, i,
                        circle.winding * len(circle))


def enumerate_boundary_paths(arcs: ArcSystem, grading: GradingAssignment,
                             max_len: int) -> List[BoundaryPath]:
    """All boundary paths with at most ``max_len`` segments, ordered by
    (circle, start, length)."""
    out: List[BoundaryPath] = []
    for circle in arcs.circles:
        for start in range(len(circle)):
            for length in range(1, max_len + 1):
                out.append(BoundaryPath(arcs, grading, circle, start, length))
    return out


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------


def build_arc_system(spec: Mapping) -> ArcSystem:
    """Build and validate an arc system from its JSON-style description.

    Schema: {"genus": int, "poles": int, "zeros": int,
             "faces": [[[arc, side], ...], ...],
             "circles": [{"type": "+"|"-", "segments": [[face, pos], ...]}]}
    """
    try:
        genus = int(spec["genus"])
        poles = int(spec["poles"])
        zeros = int(spec["zeros"])
        faces = spec["faces"]
        circles = spec["circles"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ArcSystemError(f"malformed arc-system spec: {exc}") from exc
    surface = DecoratedSurface(genus, zeros, poles)
    return ArcSystem(surface, faces, declared_circles=circles)


def arc_system_to_spec(arcs: ArcSystem) -> dict:
    return {
        "genus": arcs.surface.genus,
        "poles": arcs.surface.m_minus,
        "zeros": arcs.surface.m_plus,
        "faces": [[list(side) for side in face] for face in arcs.faces],
        "circles": [
            {"type": c.sign, "segments": [list(seg) for seg in c.segments]}
            for c in arcs.circles
        ],
    }


def load_arc_system(path: str) -> ArcSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return build_arc_system(json.load(fh))


# ---------------------------------------------------------------------------
# Reference arc systems
# ---------------------------------------------------------------------------


def polygon_pillow(n_corners: int, plus_corners: Sequence[int]) -> dict:
    """Two congruent n-gons glued along all edges (a 'pillow'); corner i is
    tagged '+' iff listed.  Arc i joins marked point i to i+1."""
    n = n_corners
    front = [[i, 0] for i in range(n)]
    back = [[0, 1]] + [[n - i, 1] for i in range(1, n)]
    # circle at point (i+1 mod n): corners (front, i) and (back, n-1-i)
    circles = []
    for i in range(n):
        pt = (i + 1) % n
        sign = "+" if pt in plus_corners else "-"
        circles.append({
            "type": sign,
            "segments": [[0, i], [1, (n - 1 - i) % n]],
        })
    zeros = len(plus_corners)
    return {
        "genus": 0,
        "poles": n - zeros,
        "zeros": zeros,
        "faces": [front, back],
        "circles": circles,
    }


def pillowcase_spec() -> dict:
    """Sphere with four poles cut by four arcs into two squares."""
    return polygon_pillow(4, ())


def hexpillow_spec() -> dict:
    """Sphere with five poles and one zero: two hexagons glued edge-to-edge,
    the zero at marked point 0."""
    return polygon_pillow(6, (0,))


def torus_spec() -> dict:
    """Genus 1 with two zeros and two poles: four squares from the unit
    torus cut along horizontal and vertical circles through four points."""
    # arcs 0..3 horizontal halves, 4..7 vertical halves (see tests)
    faces = [
        [[0, 0], [6, 0], [2, 1], [4, 1]],
        [[1, 0], [4, 0], [3, 1], [6, 1]],
        [[2, 0], [7, 0], [0, 1], [5, 1]],
        [[3, 0], [5, 0], [1, 1], [7, 1]],
    ]
    # Tag the circles at the two endpoints of arc 0 as the zeros, so the
    # system has zero-zero, zero-pole and pole-pole arcs.
    tmp = ArcSystem.__new__(ArcSystem)
    tmp.surface = DecoratedSurface(1, 2, 2)
    tmp.faces = [tuple((a, s) for a, s in f) for f in faces]
    tmp._validate_sides()
    circles_raw = _raw_circles(tmp)
    circles = []
    for segments, ends in circles_raw:
        end_set = set(ends)
        sign = "+" if ((0, 0) in end_set or (0, 1) in end_set) else "-"
        circles.append({"type": sign,
                        "segments": [list(seg) for seg in segments]})
    return {
        "genus": 1,
        "poles": 2,
        "zeros": 2,
        "faces": faces,
        "circles": circles,
    }


def _raw_circles(arcs: ArcSystem):
    all_corners = [(fi, pos) for fi, face in enumerate(arcs.faces)
                   for pos in range(len(face))]
    seen = set()
    out = []
    for start in all_corners:
        if start in seen:
            continue
        segments = []
        ends = []
        c = start
        while True:
            seen.add(c)
            segments.append(c)
            nxt, end = arcs._next_corner(c)
            ends.append(end)
            c = nxt
            if c == start:
                break
        ends = [ends[-1]] + ends[:-1]
        out.append((segments, ends))
    return out
