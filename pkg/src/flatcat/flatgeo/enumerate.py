"""Complete enumeration of saddle connections and flat cylinders.

Saddle connections are found by breadth-first unfolding of triangle strips
with exact angular-sector pruning: a state carries a developed triangle, the
gate edge through which rays from the source cone point enter, and an open
sector of admissible directions; the far vertex of the gate triangle either
records a connection (cone point), spawns a pass-through ray (auxiliary flat
vertex), or merely splits the sector.  Pruning by the exact squared length
bound makes the search finite and certifiably exhaustive.

Cylinders are found from their boundaries: walking a directed saddle
connection forward and turning by exactly pi (counterclockwise through the
developed vertex fan) yields the successor along a candidate boundary cycle
with the cylinder on the left; a perpendicular first-hit trace pairs the two
boundary cycles and gives the exact height, and a closed middle-leaf trace
certifies the cylinder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from ..quadfield import (
    QD,
    Vec,
    cross,
    dot,
    norm2,
    parallel,
    rot90,
    same_ray,
    vadd,
    vneg,
    vscale,
    vsub,
    vec,
)
from .surface import Affine, FlatSurface, FlatSurfaceError, identity_affine


class EnumerationError(FlatSurfaceError):
    pass


def _canon_dir(u: Vec) -> Tuple:
    """Direction up to positive scale, hashable."""
    if not u[0].is_zero():
        t = u[0] if u[0].sign() > 0 else -u[0]
    elif not u[1].is_zero():
        t = u[1] if u[1].sign() > 0 else -u[1]
    else:
        raise EnumerationError("zero direction")
    a, b = u[0] / t, u[1] / t
    return (a.a, a.b, b.a, b.b)


def canon_corner_ray(surface: FlatSurface, tri: int, corner: int, u: Vec
                     ) -> Tuple[int, int, Vec]:
    """Canonical (triangle, corner, direction) for a ray leaving a vertex.

    A ray along an edge lies on the boundary of two wedges; normalize to
    the corner whose outgoing edge it is."""
    for _ in range(16):
        t = surface.tris[tri]
        in_ray = vneg(t.edge_vec((corner - 1) % 3))
        if not same_ray(u, in_ray):
            return tri, corner, u
        t2, c2, g = surface._link_next(tri, corner)
        u = g.linear(u)
        tri, corner = t2, c2
    raise EnumerationError("corner-ray canonicalization loop")


@dataclass
class SaddleConnection:
    index: int
    v_start: int
    v_end: int
    holonomy: Vec                      # in the chart of the start corner
    length2: QD
    start: Tuple[int, int, Vec]        # (tri, corner, outgoing direction)
    end: Tuple[int, int, Vec]          # (tri, corner, outgoing direction)

    def endpoint_kinds(self, surface: FlatSurface) -> Tuple[str, str]:
        return (surface.vertices[self.v_start].kind,
                surface.vertices[self.v_end].kind)

    def type_tag(self, surface: FlatSurface) -> str:
        kinds = sorted(k for k in self.endpoint_kinds(surface))
        if kinds == ["zero", "zero"]:
            return "++"
        if kinds == ["pole", "zero"]:
            return "+-"
        return "--"

    def corner_dir(self, orientation: int) -> Tuple[int, int, Vec]:
        return self.start if orientation == 0 else self.end

    def __repr__(self):
        return (f"SC({self.index}: v{self.v_start}->v{self.v_end}, "
                f"hol=({self.holonomy[0].to_string()},"
                f"{self.holonomy[1].to_string()}))")


def enumerate_saddle_connections(surface: FlatSurface, lmax2: QD
                                 ) -> List[SaddleConnection]:
    """All saddle connections with squared length <= lmax2, each recorded
    once (up to orientation), sorted by squared length then direction."""
    if lmax2.sign() <= 0:
        return []
    found: Dict[Tuple, dict] = {}

    def record(v_start, v_end, hol, start_data, end_data):
        start_data = canon_corner_ray(surface, *start_data)
        end_data = canon_corner_ray(surface, *end_data)
        key_a = (start_data[0], start_data[1], _canon_dir(start_data[2]),
                 _dir_sign(start_data[2]))
        key_b = (end_data[0], end_data[1], _canon_dir(end_data[2]),
                 _dir_sign(end_data[2]))
        key = min(key_a, key_b)
        if key in found:
            return
        found[key] = {
            "v_start": v_start, "v_end": v_end, "hol": hol,
            "start": start_data, "end": end_data,
        }

    # 1. triangulation edges between cone points
    for (t, e) in surface.edge_classes():
        va = surface.vertex_of_corner(t, e)
        vb = surface.vertex_of_corner(t, (e + 1) % 3)
        if not (va.is_cone and vb.is_cone):
            continue
        u = surface.tris[t].edge_vec(e)
        if (norm2(u) - lmax2).sign() > 0:
            continue
        record(va.index, vb.index, u,
               (t, e, u), (t, (e + 1) % 3, vneg(u)))

    # 2. sector search from every cone corner
    for v in surface.vertices:
        if not v.is_cone:
            continue
        for (t, c) in v.corners:
            _search_from_corner(surface, v, t, c, lmax2, record)

    # 3. rays along edges whose far endpoint is an auxiliary flat vertex
    for v in surface.vertices:
        if not v.is_cone:
            continue
        for (t, c) in v.corners:
            far = surface.vertex_of_corner(t, (c + 1) % 3)
            if far.is_cone:
                continue
            u = surface.tris[t].edge_vec(c)
            psi = Affine(1, vneg(surface.tris[t].verts[c]))
            _follow_edge_ray(surface, v, (t, c, u), t, (c + 1) % 3, psi,
                             u, lmax2, record)

    out: List[SaddleConnection] = []
    for key in sorted(found,
                      key=lambda k: (_qd_sort(norm2(found[k]["hol"])),
                                     k)):
        rec = found[key]
        out.append(SaddleConnection(len(out), rec["v_start"], rec["v_end"],
                                    rec["hol"], norm2(rec["hol"]),
                                    rec["start"], rec["end"]))
    return out


def _qd_sort(q: QD):
    return (float(q), q.a, q.b)


def _search_from_corner(surface, v, t, c, lmax2, record) -> None:
    tri = surface.tris[t]
    psi = Affine(1, vneg(tri.verts[c]))
    out_ray = tri.edge_vec(c)
    in_ray = vneg(tri.edge_vec((c - 1) % 3))
    gate = (c + 1) % 3
    a_pos = psi.apply(tri.verts[(c + 1) % 3])
    b_pos = psi.apply(tri.verts[(c + 2) % 3])
    start_data_of = (t, c)
    stack = [(t, psi, gate, out_ray, in_ray, a_pos, b_pos)]
    guard = 0
    while stack:
        guard += 1
        if guard > 2_000_000:
            raise EnumerationError("sector search runaway")
        t1, psi1, gate1, u, w, a_pos, b_pos = stack.pop()
        # prune: closest point of the gate segment must be within reach
        if (_min_dist2_segment(a_pos, b_pos) - lmax2).sign() > 0:
            continue
        t2, e2, g = surface.tri_glue[(t1, gate1)]
        psi2 = psi1.compose(g.inverse())
        third = (e2 + 2) % 3
        w_pos = psi2.apply(surface.tris[t2].verts[third])
        cu = cross(u, w_pos).sign()
        cv = cross(w_pos, w).sign()
        strict_inside = cu > 0 and cv > 0
        if strict_inside:
            vert = surface.vertex_of_corner(t2, third)
            if (norm2(w_pos) - lmax2).sign() <= 0:
                if vert.is_cone:
                    end_dir = psi2.inverse().linear(vneg(w_pos))
                    src_dir = psi.inverse().linear(w_pos) if False else w_pos
                    record(v.index, vert.index, w_pos,
                           (start_data_of[0], start_data_of[1], w_pos),
                           (t2, third, end_dir))
                else:
                    _ray_through_vertex(surface, v,
                                        (start_data_of[0],
                                         start_data_of[1], w_pos),
                                        t2, third, psi2, w_pos, lmax2,
                                        record)
        # sub-sectors
        if cu > 0:  # sector (u, w_pos) through edge A-W = edge (e2+1)
            new_hi = w_pos if cv > 0 else w
            if cross(u, new_hi).sign() > 0:
                stack.append((t2, psi2, (e2 + 1) % 3, u, new_hi,
                              a_pos, w_pos))
        if cv > 0:  # sector (w_pos, w) through edge W-B = edge (e2+2)
            new_lo = w_pos if cu > 0 else u
            if cross(new_lo, w).sign() > 0:
                stack.append((t2, psi2, (e2 + 2) % 3, new_lo, w,
                              w_pos, b_pos))
        if cu == 0 and cv != 0:
            # w on the lower boundary: whole sector continues past W-B
            stack.append((t2, psi2, (e2 + 2) % 3, u, w, w_pos, b_pos))
        if cv == 0 and cu != 0:
            stack.append((t2, psi2, (e2 + 1) % 3, u, w, a_pos, w_pos))


def _min_dist2_segment(a: Vec, b: Vec) -> QD:
    """min |p|^2 over the segment [a, b]."""
    ab = vsub(b, a)
    denom = dot(ab, ab)
    if denom.is_zero():
        return norm2(a)
    tnum = -dot(a, ab)
    if tnum.sign() <= 0:
        return norm2(a)
    if (tnum - denom).sign() >= 0:
        return norm2(b)
    # |a + (tnum/denom) ab|^2 = |a|^2 - tnum^2/denom
    return norm2(a) - tnum * tnum / denom


def _ray_through_vertex(surface, v, start_data, tri, corner, psi, ray,
                        lmax2, record) -> None:
    """Continue a ray that hits an auxiliary flat vertex exactly.

    (tri, corner) is the hit corner, psi its placement, ray the direction
    from the source (through the hit vertex)."""
    hit_pos = psi.apply(surface.tris[tri].verts[corner])
    # walk the link of the hit vertex to find where the ray continues
    cur_t, cur_c = tri, corner
    cur_psi = psi
    vert = surface.vertex_of_corner(tri, corner)
    for _ in range(2 * len(vert.corners) + 2):
        t3, c3, g = surface._link_next(cur_t, cur_c)
        nxt_psi = cur_psi.compose(g.inverse())
        out_ray = nxt_psi.linear(surface.tris[t3].edge_vec(c3))
        # wedge of (t3, c3): from out_ray CCW to its in_ray
        in_ray = nxt_psi.linear(vneg(surface.tris[t3].edge_vec((c3 - 1) % 3)))
        if same_ray(out_ray, ray):
            # continues along the edge c3 of t3
            far_pos = nxt_psi.apply(
                surface.tris[t3].verts[(c3 + 1) % 3])
            _follow_edge_hit(surface, v, start_data, t3, (c3 + 1) % 3,
                             nxt_psi, ray, far_pos, lmax2, record)
            return
        if cross(out_ray, ray).sign() > 0 and cross(ray, in_ray).sign() > 0:
            _ray_in_triangle(surface, v, start_data, t3, c3, nxt_psi, ray,
                             lmax2, record)
            return
        cur_t, cur_c, cur_psi = t3, c3, nxt_psi
    raise EnumerationError("ray continuation not found around flat vertex")


def _follow_edge_ray(surface, v, start_data, tri, far_corner, psi, ray,
                     lmax2, record) -> None:
    far_pos = psi.apply(surface.tris[tri].verts[far_corner])
    _follow_edge_hit(surface, v, start_data, tri, far_corner, psi, ray,
                     far_pos, lmax2, record)


def _follow_edge_hit(surface, v, start_data, tri, far_corner, psi, ray,
                     far_pos, lmax2, record) -> None:
    """The ray runs along an edge into its far endpoint; record or
    continue through."""
    vert = surface.vertex_of_corner(tri, far_corner)
    if (norm2(far_pos) - lmax2).sign() > 0:
        return
    if vert.is_cone:
        end_dir = psi.inverse().linear(vneg(ray))
        record(v.index, vert.index, far_pos, start_data,
               (tri, far_corner, end_dir))
        return
    _ray_through_vertex(surface, v, start_data, tri, far_corner, psi, ray,
                        lmax2, record)


def _ray_in_triangle(surface, v, start_data, tri, entry_corner, psi, ray,
                     lmax2, record) -> None:
    """Trace a zero-width ray from the source (developed at the origin)
    through triangles; it entered ``tri`` at the vertex of entry_corner."""
    entry_edge: Optional[int] = None  # None: entered at the corner apex
    guard = 0
    while True:
        guard += 1
        if guard > 1_000_000:
            raise EnumerationError("ray trace runaway")
        t = surface.tris[tri]
        if entry_edge is None:
            candidates = [(entry_corner + 1) % 3]
        else:
            candidates = [e for e in range(3) if e != entry_edge]
        hit_vertex = None
        exit_edge = None
        for e in candidates:
            p = psi.apply(t.verts[e])
            q = psi.apply(t.verts[(e + 1) % 3])
            cp = cross(ray, p).sign()
            cq = cross(ray, q).sign()
            if cp == 0 and dot(ray, p).sign() > 0:
                hit_vertex = (e, p)
                break
            if cq == 0 and dot(ray, q).sign() > 0:
                hit_vertex = ((e + 1) % 3, q)
                break
            if cp < 0 < cq:
                exit_edge = (e, p, q)
        if hit_vertex is not None:
            hit, hit_pos = hit_vertex
            vert = surface.vertex_of_corner(tri, hit)
            if (norm2(hit_pos) - lmax2).sign() > 0:
                return
            if vert.is_cone:
                end_dir = psi.inverse().linear(vneg(ray))
                record(v.index, vert.index, hit_pos, start_data,
                       (tri, hit, end_dir))
                return
            _ray_through_vertex(surface, v, start_data, tri, hit, psi, ray,
                                lmax2, record)
            return
        if exit_edge is None:
            raise EnumerationError("ray lost its triangle")
        e, p, q = exit_edge
        if (_min_dist2_segment(p, q) - lmax2).sign() > 0:
            return
        t2, e2, g = surface.tri_glue[(tri, e)]
        psi = psi.compose(g.inverse())
        tri = t2
        entry_edge = e2


# ---------------------------------------------------------------------------
# Straight-line tracer
# ---------------------------------------------------------------------------


def trace_line(surface: FlatSurface, tri: int, point: Vec, direction: Vec,
               entry_edge: Optional[int] = None, max_steps: int = 100000):
    """Trace the line from ``point`` (chart of ``tri``) in ``direction``.

    Yields ("seg", tri, psi, p_in_dev, p_out_dev, entry_edge, exit_edge)
    for each crossed triangle (exit_edge None when the piece ends at a
    vertex) and terminates by yielding ("vertex", tri, psi, corner,
    pos_dev) on an exact vertex hit or ("edgerun", tri, psi) if the line
    lies along an edge.  Developed coordinates are the chart of the first
    triangle."""
    psi = identity_affine(surface.d)
    base = point
    r = direction
    p_in = point
    for _ in range(max_steps):
        t = surface.tris[tri]
        verts_dev = [psi.apply(t.verts[i]) for i in range(3)]
        hit_vertex = None
        exit_edge = None
        candidates = [e for e in range(3) if e != entry_edge]
        for e in candidates:
            a = verts_dev[e]
            b = verts_dev[(e + 1) % 3]
            ca = cross(r, vsub(a, base)).sign()
            cb = cross(r, vsub(b, base)).sign()
            if ca == 0 and cb == 0:
                yield ("edgerun", tri, psi)
                return
            if ca == 0 and dot(r, vsub(a, p_in)).sign() > 0:
                hit_vertex = (e, a)
                break
            if cb == 0 and dot(r, vsub(b, p_in)).sign() > 0:
                hit_vertex = ((e + 1) % 3, b)
                break
            if ca < 0 < cb:
                ab = vsub(b, a)
                denom = cross(r, ab)
                s_val = cross(vsub(a, base), ab) / denom
                pt = vadd(base, vscale(s_val, r))
                if dot(r, vsub(pt, p_in)).sign() > 0:
                    exit_edge = (e, pt)
        if hit_vertex is not None:
            corner, pos = hit_vertex
            yield ("seg", tri, psi, p_in, pos, entry_edge, None)
            yield ("vertex", tri, psi, corner, pos)
            return
        if exit_edge is None:
            raise EnumerationError("trace lost its triangle")
        e, p_out = exit_edge
        yield ("seg", tri, psi, p_in, p_out, entry_edge, e)
        t2, e2, g = surface.tri_glue[(tri, e)]
        psi = psi.compose(g.inverse())
        tri = t2
        entry_edge = e2
        p_in = p_out
    raise EnumerationError("trace exceeded the step budget")


def _edge_of_point(surface: FlatSurface, tri: int, pt: Vec) -> Optional[int]:
    t = surface.tris[tri]
    for e in range(3):
        a, b = t.verts[e], t.verts[(e + 1) % 3]
        if cross(vsub(b, a), vsub(pt, a)).is_zero():
            return e
    return None


def connection_segments(surface: FlatSurface, sc: SaddleConnection
                        ) -> List[Tuple[int, Vec, Vec]]:
    """Straight pieces (tri, p_a, p_b) of the connection in each crossed
    triangle's own chart, oriented from start to end; pieces lying on
    edges are reported in both adjacent charts."""
    t0, c0, u = sc.start
    start = surface.tris[t0].verts[c0]
    pieces: List[Tuple[int, Vec, Vec]] = []
    state = (t0, start, u)
    guard = 0
    while state is not None:
        guard += 1
        if guard > 100000:
            raise EnumerationError("connection_segments runaway")
        tri, pt, r = state
        state = None
        for ev in trace_line(surface, tri, pt, r):
            kind = ev[0]
            if kind == "seg":
                _, tri1, psi, a_dev, b_dev, _ein, _eout = ev
                inv = psi.inverse()
                pieces.append((tri1, inv.apply(a_dev), inv.apply(b_dev)))
            elif kind == "vertex":
                _, tri1, psi, corner, pos_dev = ev
                vert = surface.vertex_of_corner(tri1, corner)
                if vert.is_cone:
                    break  # the far endpoint of the connection
                inv = psi.inverse()
                local_ray = inv.linear(r)
                t2, c2, g = _wedge_after_vertex(surface, tri1, corner,
                                                local_ray)
                if t2 is None:
                    # continues along an edge chain
                    if _edge_chain(surface, tri1, corner, local_ray,
                                   pieces):
                        break
                    raise EnumerationError("edge chain did not terminate")
                state = (t2, surface.tris[t2].verts[c2], g.linear(local_ray))
            else:  # edgerun from the start corner
                if _edge_chain(surface, t0, c0, u, pieces,
                               from_start=True):
                    break
                raise EnumerationError("edge chain did not terminate")
    return pieces


def _edge_chain(surface, tri, corner, ray, pieces, from_start=False) -> bool:
    """Walk a run along triangulation edges starting at the vertex of
    (tri, corner) in direction ``ray``; appends the edge pieces (in both
    adjacent charts) and returns True when a cone vertex is reached."""
    if from_start and same_ray(ray, surface.tris[tri].edge_vec(corner)):
        cur_t, cur_c = tri, corner
    else:
        cur_t, cur_c, _ray2 = _edge_after_vertex(surface, tri, corner, ray)
    guard = 0
    while True:
        guard += 1
        if guard > 10000:
            raise EnumerationError("edge chain runaway")
        vpos = surface.tris[cur_t].verts[cur_c]
        evec = surface.tris[cur_t].edge_vec(cur_c)
        pieces.append((cur_t, vpos, vadd(vpos, evec)))
        t2, e2, g = surface.tri_glue[(cur_t, cur_c)]
        a2 = surface.tris[t2].verts[e2]
        pieces.append((t2, vadd(a2, surface.tris[t2].edge_vec(e2)), a2))
        far = (cur_c + 1) % 3
        if surface.vertex_of_corner(cur_t, far).is_cone:
            return True
        cur_t, cur_c, _ = _edge_after_vertex(surface, cur_t, far, evec)


def _wedge_after_vertex(surface, tri, corner, ray):
    """Wedge of the vertex link strictly containing ``ray`` (based at the
    vertex of (tri, corner), chart of tri); returns (tri2, corner2, g)
    mapping tri's chart to tri2's, or (None, None, None) if the ray lies
    along an edge."""
    vert = surface.vertex_of_corner(tri, corner)
    cur_t, cur_c = tri, corner
    acc = identity_affine(surface.d)  # chart of tri -> chart of cur
    for _ in range(2 * len(vert.corners) + 2):
        t3, c3, g = surface._link_next(cur_t, cur_c)
        acc = g.compose(acc)
        cur_t, cur_c = t3, c3
        out_ray = surface.tris[cur_t].edge_vec(cur_c)
        in_ray = vneg(surface.tris[cur_t].edge_vec((cur_c - 1) % 3))
        ray_here = acc.linear(ray)
        if same_ray(ray_here, out_ray):
            return None, None, None
        if cross(out_ray, ray_here).sign() > 0 and \
                cross(ray_here, in_ray).sign() > 0:
            return cur_t, cur_c, acc
    raise EnumerationError("wedge not found around vertex")


def _edge_after_vertex(surface, tri, corner, ray):
    """The edge continuing ``ray`` through the vertex of (tri, corner);
    returns (tri2, corner2, ray in tri2 chart) with the edge = edge corner2
    of tri2."""
    vert = surface.vertex_of_corner(tri, corner)
    cur_t, cur_c = tri, corner
    acc = identity_affine(surface.d)
    for _ in range(2 * len(vert.corners) + 2):
        t3, c3, g = surface._link_next(cur_t, cur_c)
        acc = g.compose(acc)
        cur_t, cur_c = t3, c3
        ray_here = acc.linear(ray)
        if same_ray(ray_here, surface.tris[cur_t].edge_vec(cur_c)):
            return cur_t, cur_c, ray_here
    raise EnumerationError("edge continuation not found")


def _continue_edge_chain(surface, tri, corner, ray, pieces,
                         from_start=False):
    """Walk a connection that runs along triangulation edges, appending
    edge pieces; returns None when the terminal cone vertex is reached."""
    if from_start:
        # ray leaves (tri, corner) along its outgoing edge
        cur_t, cur_c, cur_ray = tri, corner, ray
        if not same_ray(ray, surface.tris[tri].edge_vec(corner)):
            t2, c2, ray2 = _edge_after_vertex(surface, tri, corner, ray)
            cur_t, cur_c, cur_ray = t2, c2, ray2
    else:
        cur_t, cur_c, cur_ray = tri, corner, ray
    guard = 0
    while True:
        guard += 1
        if guard > 10000:
            raise EnumerationError("edge chain runaway")
        vpos = surface.tris[cur_t].verts[cur_c]
        pieces.append((cur_t, vpos,
                       vadd(vpos, surface.tris[cur_t].edge_vec(cur_c))))
        # register on the neighbouring triangle as well
        t2, e2, g = surface.tri_glue[(cur_t, cur_c)]
        a2 = surface.tris[t2].verts[e2]
        pieces.append((t2, vadd(a2, surface.tris[t2].edge_vec(e2)), a2))
        far = (cur_c + 1) % 3
        vert = surface.vertex_of_corner(cur_t, far)
        if vert.is_cone:
            return None
        nt, nc, nray = _edge_after_vertex(
            surface, cur_t, far, surface.tris[cur_t].edge_vec(cur_c))
        cur_t, cur_c, cur_ray = nt, nc, nray


# ---------------------------------------------------------------------------
# Cylinders
# ---------------------------------------------------------------------------


@dataclass
class FlatCylinder:
    index: int
    circumference2: QD
    height2: QD
    boundary_cycles: Tuple[Tuple[Tuple[int, int], ...],
                           Tuple[Tuple[int, int], ...]]
    boundary_types: Tuple[str, str]
    area_certified: bool

    def __repr__(self):
        return (f"Cyl({self.index}: c2={self.circumference2.to_string()}, "
                f"h2={self.height2.to_string()}, "
                f"types={self.boundary_types})")


def _rotate_pi_ccw(surface: FlatSurface, tri: int, corner: int, ray: Vec
                   ) -> Tuple[int, int, Vec]:
    """Rotate ``ray`` (chart of tri, based at the vertex of the corner) by
    exactly pi counterclockwise around the vertex; the result is given
    as (tri2, corner2, ray2) in the containing (or boundary) wedge."""
    vert = surface.vertex_of_corner(tri, corner)
    cur_t, cur_c = tri, corner
    phi = identity_affine(surface.d)  # chart of start -> chart of cur
    start_ray = ray
    first = True
    for _ in range(3 * len(vert.corners) + 3):
        out_ray_l = surface.tris[cur_t].edge_vec(cur_c)
        in_ray_l = vneg(surface.tris[cur_t].edge_vec((cur_c - 1) % 3))
        ray_here = phi.linear(start_ray)
        lo = ray_here if first else out_ray_l
        for sign_flip in (False, True):
            cand = vneg(ray_here) if sign_flip else ray_here
            if first and not sign_flip:
                continue
            if cross(lo, cand).sign() > 0 and \
                    cross(cand, in_ray_l).sign() > 0:
                return cur_t, cur_c, cand
        if parallel(in_ray_l, ray_here) and \
                not (first and same_ray(in_ray_l, ray_here)):
            t3, c3, g = surface._link_next(cur_t, cur_c)
            return t3, c3, g.linear(in_ray_l)
        t3, c3, g = surface._link_next(cur_t, cur_c)
        phi = g.compose(phi)
        cur_t, cur_c = t3, c3
        first = False
    raise EnumerationError("pi rotation did not terminate")


def _ray_key(surface, tri, corner, u):
    tri, corner, u = canon_corner_ray(surface, tri, corner, u)
    return (tri, corner, _canon_dir(u), _dir_sign(u))


def _dir_sign(u: Vec) -> int:
    if not u[0].is_zero():
        return u[0].sign()
    return u[1].sign()


def _departures_index(surface, conns) -> Dict:
    idx = {}
    for sc in conns:
        for orient in (0, 1):
            t, c, u = sc.corner_dir(orient)
            idx[_ray_key(surface, t, c, u)] = (sc.index, orient)
    return idx


def successor_ccw(surface: FlatSurface, departures: Dict,
                  conns: Sequence[SaddleConnection],
                  directed: Tuple[int, int]) -> Optional[Tuple[int, int]]:
    """Next directed connection along the boundary walk with the cylinder
    on the left (turn by pi counterclockwise at the endpoint)."""
    ci, orient = directed
    sc = conns[ci]
    end_t, end_c, end_dir = sc.corner_dir(1 - orient)
    t2, c2, ray2 = _rotate_pi_ccw(surface, end_t, end_c, end_dir)
    return departures.get(_ray_key(surface, t2, c2, ray2))


def _cycles_of(succ) -> List[Tuple[Tuple[int, int], ...]]:
    cycles = []
    seen = set()
    canon_set = set()
    for start in sorted(succ):
        if start in seen or succ[start] is None:
            continue
        path = [start]
        cur = succ[start]
        ok = True
        while cur is not None and cur != start:
            if cur in seen or len(path) > len(succ):
                ok = False
                break
            path.append(cur)
            cur = succ[cur]
        if ok and cur == start:
            canon = min(tuple(path[i:] + path[:i])
                        for i in range(len(path)))
            if canon not in canon_set:
                canon_set.add(canon)
                cycles.append(canon)
            for p in path:
                seen.add(p)
    return cycles


def _segments_index(surface, conns) -> Dict[int, List]:
    idx: Dict[int, List] = {}
    for sc in conns:
        for (tri, pa, pb) in connection_segments(surface, sc):
            idx.setdefault(tri, []).append((pa, pb, sc.index))
    return idx


def _segment_cross(p1, p2, a, b):
    """Intersection of [p1,p2] with [a,b]: (t, point) with t the fraction
    along [p1,p2], or None (parallel or disjoint)."""
    r = vsub(p2, p1)
    s = vsub(b, a)
    denom = cross(r, s)
    if denom.is_zero():
        return None
    t_val = cross(vsub(a, p1), s) / denom
    u_val = cross(vsub(a, p1), r) / denom
    one = QD(1, 0, t_val.d)
    if t_val.sign() < 0 or (t_val - one).sign() > 0:
        return None
    if u_val.sign() < 0 or (u_val - one).sign() > 0:
        return None
    return t_val, vadd(p1, vscale(t_val, r))


def _interior_point(surface, sc, num, den):
    """Point at fraction num/den along the FIRST straight piece of the
    connection, with its triangle, local coordinates and local direction."""
    pieces = connection_segments(surface, sc)
    tri, pa, pb = pieces[0]
    frac = QD(Fraction(num, den), 0, surface.d)
    pt = vadd(pa, vscale(frac, vsub(pb, pa)))
    return tri, pt, vsub(pb, pa)


def _start_tri_for(surface, tri, pt, w):
    """Triangle in which to start a trace from pt in direction w; steps to
    the glued neighbour when pt lies on an edge pointing out of tri."""
    e = _edge_of_point(surface, tri, pt)
    if e is None:
        return tri, pt
    edge_dir = surface.tris[tri].edge_vec(e)
    if cross(edge_dir, w).sign() > 0:
        return tri, pt
    t2, e2, g = surface.tri_glue[(tri, e)]
    return t2, g.apply(pt)


def _first_parallel_hit(surface, seg_idx, tri, pt, w_dir, leaf_dir,
                        skip_zero, cap2):
    """First crossing of the trace from (tri, pt, w_dir) with a stored
    connection piece parallel to the leaf; returns (conn id, h_vec_dev,
    tri, psi, local piece direction) or None."""
    tri, pt = _start_tri_for(surface, tri, pt, w_dir)
    for ev in trace_line(surface, tri, pt, w_dir):
        if ev[0] != "seg":
            return None  # vertex hit or edge run: caller retries
        _, tri1, psi, a_dev, b_dev, _ein, _eout = ev
        inv = psi.inverse()
        local_in = inv.apply(a_dev)
        local_out = inv.apply(b_dev)
        leaf_local = inv.linear(leaf_dir)
        best = None
        for (pa, pb, cid) in seg_idx.get(tri1, ()):
            if not parallel(vsub(pb, pa), leaf_local):
                continue
            res = _segment_cross(local_in, local_out, pa, pb)
            if res is None:
                continue
            t_val, hit_local = res
            if t_val.is_zero() and skip_zero:
                continue
            if best is None or (t_val - best[0]).sign() < 0:
                best = (t_val, cid, hit_local, vsub(pb, pa))
        if best is not None:
            t_val, cid, hit_local, piece_dir = best
            hit_dev = psi.apply(hit_local)
            h_vec = vsub(hit_dev, pt)
            if norm2(h_vec).is_zero():
                skip_zero = True
                continue
            return cid, h_vec, tri1, psi, piece_dir
        skip_zero = False
        if (norm2(vsub(b_dev, pt)) - cap2).sign() > 0:
            return None
    return None


def _closed_leaf(surface, tri, pt, direction, cap2):
    """Holonomy vector of the leaf through (tri, pt) if it closes up
    exactly, else None."""
    first = True
    for ev in trace_line(surface, tri, pt, direction):
        if ev[0] != "seg":
            return None
        _, tri1, psi, a_dev, b_dev, _ein, _eout = ev
        if not first and tri1 == tri:
            inv = psi.inverse()
            la, lb = inv.apply(a_dev), inv.apply(b_dev)
            seg = vsub(lb, la)
            dpt = vsub(pt, la)
            if parallel(seg, dpt):
                along = dot(seg, dpt)
                if along.sign() >= 0 and (along - dot(seg, seg)).sign() <= 0:
                    w = vsub(psi.apply(pt), pt)
                    if not norm2(w).is_zero():
                        return w
        first = False
        if (norm2(vsub(b_dev, pt)) - cap2).sign() > 0:
            return None
    return None


def _boundary_type(surface, conns, cycle) -> str:
    ids = [ci for ci, _ in cycle]
    kinds = [set(conns[ci].endpoint_kinds(surface)) for ci, _ in cycle]
    if len(cycle) == 1 and kinds[0] == {"zero"}:
        return "closed saddle connection at a zero"
    if len(cycle) == 2 and ids[0] == ids[1] and kinds[0] == {"pole"}:
        return "saddle connection between two poles"
    if len(cycle) == 2 and ids[0] != ids[1] and \
            all(k == {"zero"} for k in kinds):
        return "pair of saddle connections between zeros (flat torus attached)"
    return "non-generic"


def _sqrt_in_qd(q: QD, d: int) -> Optional[QD]:
    """Exact square root of q in Q(sqrt d), if one exists."""
    if q.sign() < 0:
        return None

    def _int_sqrt(n: int) -> Optional[int]:
        if n < 0:
            return None
        r = int(n ** 0.5)
        for cc in (r - 1, r, r + 1, r + 2):
            if cc >= 0 and cc * cc == n:
                return cc
        return None

    def _rat_sqrt(x: Fraction) -> Optional[Fraction]:
        num = _int_sqrt(x.numerator)
        den = _int_sqrt(x.denominator)
        if num is None or den is None:
            return None
        return Fraction(num, den)

    if q.b == 0:
        a = _rat_sqrt(q.a) if q.a >= 0 else None
        if a is not None:
            return QD(a, 0, d)
        b2 = q.a / d
        b = _rat_sqrt(b2) if b2 >= 0 else None
        if b is not None:
            return QD(0, b, d)
        return None
    half = q.b / 2
    disc = q.a * q.a - 4 * (half * half * d)
    if disc < 0:
        return None
    s = _rat_sqrt(disc)
    if s is None:
        return None
    for a2 in ((q.a + s) / 2, (q.a - s) / 2):
        if a2 < 0:
            continue
        a = _rat_sqrt(a2)
        if a is None or a == 0:
            continue
        cand = QD(a, half / a, d)
        if cand * cand == q and cand.sign() > 0:
            return cand
    return None


def find_cylinders(surface: FlatSurface, conns: Sequence[SaddleConnection],
                   lmax2: QD) -> List[FlatCylinder]:
    """All flat cylinders with circumference^2 <= lmax2, from boundary
    cycles of the pi-turn successor walk, certified by a perpendicular
    first-hit and an exactly closing middle leaf."""
    departures = _departures_index(surface, conns)
    succ = {}
    for sc in conns:
        for orient in (0, 1):
            succ[(sc.index, orient)] = successor_ccw(
                surface, departures, conns, (sc.index, orient))
    cycles = _cycles_of(succ)
    seg_idx = _segments_index(surface, conns)
    cap2 = lmax2 * QD(64, 0, surface.d)
    cylinders: List[FlatCylinder] = []
    seen_pairs = set()
    for cyc in cycles:
        got = _certify_cylinder(surface, conns, cycles, seg_idx, cyc, cap2)
        if got is None:
            continue
        opp, h2, w_vec = got
        pair = frozenset((cyc, opp))
        if pair in seen_pairs:
            continue
        c2 = norm2(w_vec)
        if (c2 - lmax2).sign() > 0:
            continue
        seen_pairs.add(pair)
        area_cert = _sqrt_in_qd(c2 * h2, surface.d) is not None
        cylinders.append(FlatCylinder(
            len(cylinders), c2, h2, (cyc, opp),
            (_boundary_type(surface, conns, cyc),
             _boundary_type(surface, conns, opp)),
            area_cert))
    return cylinders


def _certify_cylinder(surface, conns, cycles, seg_idx, cyc, cap2):
    ci, orient = cyc[0]
    sc = conns[ci]
    for num, den in ((1, 2), (1, 3), (2, 3), (1, 5), (2, 5), (3, 5),
                     (4, 5), (1, 7), (2, 7), (3, 7)):
        try:
            tri, pt, seg_dir = _interior_point(surface, sc, num, den)
            u_dir = seg_dir if orient == 0 else vneg(seg_dir)
            w_dir = rot90(u_dir)
            hit = _first_parallel_hit(surface, seg_idx, tri, pt, w_dir,
                                      u_dir, True, cap2)
            if hit is None:
                continue
            cid, h_vec, hit_tri, hit_psi, piece_dir = hit
            h2 = norm2(h_vec)
            # mid leaf
            mid_dev = vadd(pt, vscale(QD(Fraction(1, 2), 0, surface.d),
                                      h_vec))
            mid = _locate_on_trace(surface, tri, pt, w_dir, mid_dev, u_dir)
            if mid is None:
                continue
            mid_tri, mid_pt, mid_dir = mid
            w_vec = _closed_leaf(surface, mid_tri, mid_pt, mid_dir, cap2)
            if w_vec is None:
                return None
            # opposite boundary: hit connection directed so the cylinder
            # lies on its left: direction = rot90 of the local w direction
            w_local = hit_psi.inverse().linear(w_dir)
            b_local = rot90(w_local)
            opp_orient = 0 if same_ray(piece_dir, b_local) else 1
            opp = None
            for cyc2 in cycles:
                if (cid, opp_orient) in cyc2:
                    opp = cyc2
                    break
            if opp is None:
                return None
            return opp, h2, w_vec
        except EnumerationError:
            continue
    return None


def _locate_on_trace(surface, tri, pt, w_dir, target_dev, u_dir):
    tri0, pt0 = _start_tri_for(surface, tri, pt, w_dir)
    for ev in trace_line(surface, tri0, pt0, w_dir):
        if ev[0] != "seg":
            return None
        _, tri1, psi, a_dev, b_dev, _ein, _eout = ev
        t_from = dot(w_dir, vsub(a_dev, pt0))
        t_to = dot(w_dir, vsub(b_dev, pt0))
        t_tgt = dot(w_dir, vsub(target_dev, pt0))
        if (t_from - t_tgt).sign() <= 0 and (t_tgt - t_to).sign() <= 0:
            inv = psi.inverse()
            return tri1, inv.apply(target_dev), inv.linear(u_dir)
    return None
