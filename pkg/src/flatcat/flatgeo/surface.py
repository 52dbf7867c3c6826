"""Half-translation surfaces from exact polygon gluings.

Polygons have vertices in Q(sqrt d)^2 and are glued edge-to-edge by
translations (z -> z + c) or half-turns (z -> -z + c).  The builder
triangulates every polygon by ear clipping (no new vertices), classifies
each vertex class by its exact cone angle (pi = pole, 2*pi = regular
auxiliary vertex, 3*pi = zero) and exposes the developed link fan of every
vertex for the geodesic enumeration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

from ..quadfield import (
    QD,
    Vec,
    cross,
    in_open_sector,
    parallel,
    vadd,
    vneg,
    vsub,
    vec,
)


class FlatSurfaceError(ValueError):
    pass


class AngleNotAllowed(FlatSurfaceError):
    pass


class GluingMismatch(FlatSurfaceError):
    pass


@dataclass(frozen=True)
class Affine:
    """z -> s*z + c with s = +-1."""

    s: int
    c: Vec

    def apply(self, p: Vec) -> Vec:
        if self.s == 1:
            return vadd(p, self.c)
        return vadd(vneg(p), self.c)

    def linear(self, u: Vec) -> Vec:
        return u if self.s == 1 else vneg(u)

    def compose(self, other: "Affine") -> "Affine":
        """self o other."""
        return Affine(self.s * other.s, vadd(self.linear(other.c), self.c))

    def inverse(self) -> "Affine":
        # z = s w + c  =>  w = s z - s c
        return Affine(self.s, vneg(self.c) if self.s == 1
                      else self.c)

    @property
    def flip(self) -> int:
        return 0 if self.s == 1 else 1


IDENTITY = None  # placeholder replaced after Affine defined


def identity_affine(d: int) -> Affine:
    return Affine(1, vec(0, 0, d))


class Triangle:
    __slots__ = ("id", "poly", "verts")

    def __init__(self, tid: int, poly: int, verts: Tuple[Vec, Vec, Vec]):
        self.id = tid
        self.poly = poly
        self.verts = verts

    def edge_vec(self, k: int) -> Vec:
        return vsub(self.verts[(k + 1) % 3], self.verts[k])

    def __repr__(self):
        return f"Tri({self.id})"


@dataclass
class VertexClass:
    index: int
    corners: List[Tuple[int, int]]       # link in CCW cyclic order
    transitions: List[Affine]            # transitions[t]: chart of corner t
    #   -> chart of corner t+1 composed inverse; see link_transition
    angle_multiple: int                  # cone angle = k * pi
    kind: str                            # 'pole' | 'flat' | 'zero'

    @property
    def is_cone(self) -> bool:
        return self.kind != "flat"


class FlatSurface:
    """Validated exact half-translation surface."""

    def __init__(self, d: int, polygons: Sequence[Sequence[Vec]],
                 gluings: Sequence[dict]):
        self.d = int(d)
        self.polygons = [list(p) for p in polygons]
        self.gluing_spec = list(gluings)
        self._validate_polygons()
        self._pair_edges()
        self._triangulate()
        self._build_vertex_classes()
        self._classify()

    # -- validation ----------------------------------------------------------

    def _validate_polygons(self) -> None:
        for pi, poly in enumerate(self.polygons):
            if len(poly) < 3:
                raise FlatSurfaceError(f"polygon {pi} has < 3 vertices")
            area2 = QD(0, 0, self.d)
            for i in range(len(poly)):
                area2 = area2 + cross(poly[i], poly[(i + 1) % len(poly)])
            if area2.sign() <= 0:
                raise FlatSurfaceError(
                    f"polygon {pi} must be positively oriented and "
                    "nondegenerate")
            if len({(v[0].a, v[0].b, v[1].a, v[1].b) for v in poly}) \
                    != len(poly):
                raise FlatSurfaceError(f"polygon {pi} repeats a vertex")

    def _pair_edges(self) -> None:
        self.edge_glue: Dict[Tuple[int, int], Tuple[int, int, Affine]] = {}
        used = set()
        for rec in self.gluing_spec:
            (p1, e1), (p2, e2) = [tuple(map(int, x)) for x in rec["edges"]]
            kind = rec["type"]
            if (p1, e1) in used or (p2, e2) in used:
                raise GluingMismatch(f"edge glued twice: {rec}")
            if (p1, e1) == (p2, e2):
                raise GluingMismatch(
                    "an edge cannot be glued to itself; split it at the "
                    f"fold point first: {rec}")
            used.add((p1, e1))
            used.add((p2, e2))
            a = self.polygons[p1][e1]
            b = self.polygons[p1][(e1 + 1) % len(self.polygons[p1])]
            w1 = self.polygons[p2][e2]
            w2 = self.polygons[p2][(e2 + 1) % len(self.polygons[p2])]
            if kind == "translation":
                # g(a) = w2, g(b) = w1
                g = Affine(1, vsub(w2, a))
                if g.apply(b) != w1:
                    raise GluingMismatch(
                        f"translation gluing must reverse the edge: {rec}")
            elif kind == "halfturn":
                g = Affine(-1, vadd(w2, a))
                if g.apply(b) != w1:
                    raise GluingMismatch(
                        f"half-turn gluing endpoints mismatch: {rec}")
            else:
                raise GluingMismatch(f"unknown gluing type {kind!r}")
            self.edge_glue[(p1, e1)] = (p2, e2, g)
            self.edge_glue[(p2, e2)] = (p1, e1, g.inverse())
        for pi, poly in enumerate(self.polygons):
            for e in range(len(poly)):
                if (pi, e) not in self.edge_glue:
                    raise GluingMismatch(f"edge ({pi},{e}) is unglued")

    # -- triangulation ---------------------------------------------------------

    def _triangulate(self) -> None:
        self.tris: List[Triangle] = []
        # (poly, corner index) of each triangle corner, for vertex classes
        self.tri_corner_origin: Dict[Tuple[int, int], Tuple[int, int]] = {}
        # triangle-level gluing: (tri, edge) -> (tri2, edge2, Affine)
        self.tri_glue: Dict[Tuple[int, int], Tuple[int, int, Affine]] = {}
        poly_edge_to_tri: Dict[Tuple[int, int], Tuple[int, int]] = {}
        for pi, poly in enumerate(self.polygons):
            ears = _ear_clip(poly, self.d)
            for (i, j, k) in ears:
                t = Triangle(len(self.tris), pi,
                             (poly[i], poly[j], poly[k]))
                self.tris.append(t)
                for c, orig in enumerate((i, j, k)):
                    self.tri_corner_origin[(t.id, c)] = (pi, orig)
            # map polygon boundary edges / diagonals to triangle edges
            edge_owner: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
            base = len(self.tris) - len(ears)
            for tlocal, (i, j, k) in enumerate(ears):
                tid = base + tlocal
                for eidx, (a, b) in enumerate(((i, j), (j, k), (k, i))):
                    edge_owner.setdefault(
                        (min(a, b), max(a, b)), []).append((tid, eidx, a, b))
            n = len(poly)
            ident = identity_affine(self.d)
            for key, owners in edge_owner.items():
                if len(owners) == 2:
                    (t1, e1, a1, b1), (t2, e2, a2, b2) = owners
                    if a1 == a2:
                        raise FlatSurfaceError("inconsistent diagonal")
                    self.tri_glue[(t1, e1)] = (t2, e2, ident)
                    self.tri_glue[(t2, e2)] = (t1, e1, ident)
                elif len(owners) == 1:
                    (t1, e1, a1, b1) = owners[0]
                    lo, hi = key
                    if (hi - lo) % n != 1 and (lo - hi) % n != 1:
                        raise FlatSurfaceError(
                            f"unpaired non-boundary edge {key} in polygon "
                            f"{pi}")
                    pe = lo if (hi - lo) % n == 1 else hi
                    poly_edge_to_tri[(pi, pe)] = (t1, e1)
                else:
                    raise FlatSurfaceError("edge owned by 3+ triangles")
        for (p1, e1), (p2, e2, g) in self.edge_glue.items():
            t1, te1 = poly_edge_to_tri[(p1, e1)]
            t2, te2 = poly_edge_to_tri[(p2, e2)]
            self.tri_glue[(t1, te1)] = (t2, te2, g)

    # -- vertex classes ---------------------------------------------------------

    def _link_next(self, tri: int, corner: int
                   ) -> Tuple[int, int, Affine]:
        """Next corner CCW around the vertex, crossing edge (corner-1);
        returns (tri2, corner2, g) with g mapping tri's chart to tri2's."""
        edge = (corner - 1) % 3
        t2, e2, g = self.tri_glue[(tri, edge)]
        return t2, e2, g

    def _build_vertex_classes(self) -> None:
        self.vertices: List[VertexClass] = []
        self.corner_vertex: Dict[Tuple[int, int], Tuple[int, int]] = {}
        seen = set()
        for t in self.tris:
            for c in range(3):
                if (t.id, c) in seen:
                    continue
                corners: List[Tuple[int, int]] = []
                transitions: List[Affine] = []
                cur = (t.id, c)
                while True:
                    seen.add(cur)
                    corners.append(cur)
                    t2, c2, g = self._link_next(*cur)
                    transitions.append(g)
                    cur = (t2, c2)
                    if cur == (t.id, c):
                        break
                k = self._cone_multiple(corners, transitions)
                v = VertexClass(len(self.vertices), corners, transitions,
                                k, "")
                self.vertices.append(v)
                for i, cor in enumerate(corners):
                    self.corner_vertex[cor] = (v.index, i)

    def corner_rays(self, tri: int, corner: int) -> Tuple[Vec, Vec]:
        """(outgoing ray, incoming ray) of the corner wedge, CCW from the
        first to the second, in the triangle's own chart."""
        t = self.tris[tri]
        out_ray = t.edge_vec(corner)
        in_ray = vneg(t.edge_vec((corner - 1) % 3))
        return out_ray, in_ray

    def _cone_multiple(self, corners, transitions) -> int:
        """Total angle around the vertex as a multiple of pi, via exact
        crossing counts of a reference line in the developed link fan."""
        d = self.d
        # develop wedge boundary rays into the chart of corners[0]
        rays: List[Vec] = []
        phi = identity_affine(d)
        for t_idx, (tri, corner) in enumerate(corners):
            out_ray, _ = self.corner_rays(tri, corner)
            rays.append(phi.linear(out_ray))
            # phi_{t+1} = phi_t o g_t^{-1}
            phi = phi.compose(transitions[t_idx].inverse())
        # closing ray: develop corners[0]'s out_ray after the full loop
        out0, _ = self.corner_rays(*corners[0])
        closing = phi.linear(out0)
        if not parallel(rays[0], closing):
            raise FlatSurfaceError("vertex link does not develop flat")
        # choose a reference direction not parallel to any fan ray
        ref = None
        for cand in ((1, 0), (0, 1), (1, 1), (1, 2), (2, 1), (1, 3), (3, 1),
                     (2, 3), (3, 2), (1, 4), (4, 1), (3, 4), (4, 3)):
            r = vec(cand[0], cand[1], d)
            if all(not parallel(r, u) for u in rays):
                ref = r
                break
        if ref is None:
            raise FlatSurfaceError("no reference direction found")
        crossings = 0
        m = len(rays)
        for t_idx in range(m):
            a = rays[t_idx]
            b = rays[(t_idx + 1) % m] if t_idx + 1 < m else closing
            # wedge from a CCW to b, angle < pi: line(ref) inside?
            if in_open_sector(a, b, ref) or in_open_sector(a, b, vneg(ref)):
                crossings += 1
        return crossings

    def _classify(self) -> None:
        zeros = poles = 0
        for v in self.vertices:
            if v.angle_multiple == 1:
                v.kind = "pole"
                poles += 1
            elif v.angle_multiple == 2:
                v.kind = "flat"
            elif v.angle_multiple == 3:
                v.kind = "zero"
                zeros += 1
            else:
                raise AngleNotAllowed(
                    f"vertex {v.index} has cone angle {v.angle_multiple}*pi;"
                    " only pi, 2*pi (auxiliary) and 3*pi are supported")
        if zeros + poles == 0:
            raise AngleNotAllowed(
                "no cone points: not a decorated surface in scope")
        n_edges = len({frozenset(((t, e), self.tri_glue[(t, e)][:2]))
                       for t in range(len(self.tris)) for e in range(3)})
        chi = len(self.vertices) - n_edges + len(self.tris)
        if chi % 2:
            raise FlatSurfaceError("odd Euler characteristic")
        self.genus = (2 - chi) // 2
        self.n_zeros = zeros
        self.n_poles = poles
        if zeros - poles != 4 * self.genus - 4:
            raise AngleNotAllowed(
                f"#zeros - #poles = {zeros - poles} but genus {self.genus} "
                f"requires {4 * self.genus - 4}")

    # -- queries ------------------------------------------------------------------

    def corner_position(self, tri: int, corner: int) -> Vec:
        return self.tris[tri].verts[corner]

    def vertex_of_corner(self, tri: int, corner: int) -> VertexClass:
        return self.vertices[self.corner_vertex[(tri, corner)][0]]

    def edge_classes(self) -> List[Tuple[int, int]]:
        """Canonical representatives (tri, edge) of the glued edge pairs."""
        out = []
        seen = set()
        for t in range(len(self.tris)):
            for e in range(3):
                if (t, e) in seen:
                    continue
                t2, e2, _ = self.tri_glue[(t, e)]
                seen.add((t, e))
                seen.add((t2, e2))
                out.append((t, e))
        return out

    def total_area2(self) -> QD:
        """Twice the total area (sum of triangle cross products)."""
        total = QD(0, 0, self.d)
        for t in self.tris:
            total = total + cross(vsub(t.verts[1], t.verts[0]),
                                  vsub(t.verts[2], t.verts[0]))
        return total

    def __repr__(self):
        return (f"FlatSurface(d={self.d}, genus={self.genus}, "
                f"zeros={self.n_zeros}, poles={self.n_poles}, "
                f"{len(self.tris)} triangles)")


def _ear_clip(poly: Sequence[Vec], d: int) -> List[Tuple[int, int, int]]:
    """Exact ear clipping of a simple CCW polygon; indices into poly."""
    idx = list(range(len(poly)))
    out: List[Tuple[int, int, int]] = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10000:
            raise FlatSurfaceError("ear clipping failed (bad polygon?)")
        found = False
        for t in range(len(idx)):
            i, j, k = (idx[(t - 1) % len(idx)], idx[t],
                       idx[(t + 1) % len(idx)])
            a, b, c = poly[i], poly[j], poly[k]
            if cross(vsub(b, a), vsub(c, b)).sign() <= 0:
                continue  # reflex or straight corner, not an ear tip
            blocked = False
            for other in idx:
                if other in (i, j, k):
                    continue
                if _in_closed_triangle(poly[other], a, b, c):
                    blocked = True
                    break
            if blocked:
                continue
            out.append((i, j, k))
            idx.pop(t)
            found = True
            break
        if not found:
            raise FlatSurfaceError("no ear found (polygon not simple?)")
    out.append((idx[0], idx[1], idx[2]))
    return out


def _in_closed_triangle(p: Vec, a: Vec, b: Vec, c: Vec) -> bool:
    s1 = cross(vsub(b, a), vsub(p, a)).sign()
    s2 = cross(vsub(c, b), vsub(p, b)).sign()
    s3 = cross(vsub(a, c), vsub(p, c)).sign()
    return s1 >= 0 and s2 >= 0 and s3 >= 0


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------


def parse_coord(raw, d: int) -> QD:
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise FlatSurfaceError(f"coordinate must be [rat, coef]: {raw}")
        return QD(Fraction(str(raw[0])), Fraction(str(raw[1])), d)
    return QD(Fraction(str(raw)), 0, d)


def build_surface(spec: Mapping) -> FlatSurface:
    """Build a surface from its JSON description.

    Schema: {"d": int,
             "polygons": [[[xr, xc], [yr, yc]], ...]  (vertex list each),
             "gluings": [{"edges": [[p, e], [p, e]],
                          "type": "translation"|"halfturn"}]}
    """
    try:
        d = int(spec["d"])
        polys_raw = spec["polygons"]
        gluings = spec["gluings"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FlatSurfaceError(f"malformed surface spec: {exc}") from exc
    polygons = []
    for poly in polys_raw:
        verts = []
        for v in poly:
            if len(v) != 2:
                raise FlatSurfaceError(f"vertex needs 2 coordinates: {v}")
            verts.append((parse_coord(v[0], d), parse_coord(v[1], d)))
        polygons.append(verts)
    return FlatSurface(d, polygons, gluings)


def surface_to_spec(surface: FlatSurface) -> dict:
    def coord(q: QD):
        return [str(q.a), str(q.b)]

    return {
        "d": surface.d,
        "polygons": [[[coord(v[0]), coord(v[1])] for v in poly]
                     for poly in surface.polygons],
        "gluings": surface.gluing_spec,
    }


def load_surface(path: str) -> FlatSurface:
    with open(path, "r", encoding="utf-8") as fh:
        return build_surface(json.load(fh))
