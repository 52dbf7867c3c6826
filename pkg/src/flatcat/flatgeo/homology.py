"""Twisted homology of a half-translation surface.

The orientation double cover is built combinatorially: triangles and edges
double, sheets swap across half-turn gluings, and cone points (odd cone
angle) are branch points.  The charge lattice is

    Gamma = (1 - sigma) H_1(cover, branch points; Z) / torsion,

the image of the deck anti-invariance operator, with the intersection form
of closed cycles and half the period of the square root differential; with
these normalizations the class of a saddle connection has Z equal to its
holonomy.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..quadfield import QD, Vec, vadd, vneg, vsub
from .enumerate import (
    EnumerationError,
    FlatCylinder,
    SaddleConnection,
    _interior_point,
    trace_line,
)
from .surface import FlatSurface


# ---------------------------------------------------------------------------
# Integer linear algebra
# ---------------------------------------------------------------------------


def smith_normal_form(mat: List[List[int]]):
    """Return (U, S, V) with U mat V = S in Smith normal form; all integer,
    U and V unimodular."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    s = [row[:] for row in mat]
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_op(i, j, c):  # row_i += c row_j   (on s and u)
        s[i] = [a + c * b for a, b in zip(s[i], s[j])]
        u[i] = [a + c * b for a, b in zip(u[i], u[j])]

    def col_op(i, j, c):  # col_i += c col_j
        for r in range(m):
            s[r][i] += c * s[r][j]
        for r in range(n):
            v[r][i] += c * v[r][j]

    def row_swap(i, j):
        s[i], s[j] = s[j], s[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i, j):
        for r in range(m):
            s[r][i], s[r][j] = s[r][j], s[r][i]
        for r in range(n):
            v[r][i], v[r][j] = v[r][j], v[r][i]

    t = 0
    while t < min(m, n):
        # find pivot: smallest nonzero entry in the remaining block
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if s[i][j] != 0 and (piv is None or
                                     abs(s[i][j]) < abs(s[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        row_swap(t, piv[0])
        col_swap(t, piv[1])
        again = True
        while again:
            again = False
            for i in range(t + 1, m):
                if s[i][t]:
                    q = s[i][t] // s[t][t]
                    row_op(i, t, -q)
                    if s[i][t]:
                        row_swap(t, i)
                        again = True
            for j in range(t + 1, n):
                if s[t][j]:
                    q = s[t][j] // s[t][t]
                    col_op(j, t, -q)
                    if s[t][j]:
                        col_swap(t, j)
                        again = True
        if s[t][t] < 0:
            s[t] = [-x for x in s[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return u, s, v


def integer_kernel(mat: List[List[int]], ncols: int) -> List[List[int]]:
    """Saturated integer kernel basis (as rows) of mat x = 0."""
    if not mat:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    u, s, v = smith_normal_form(mat)
    m = len(mat)
    rank = sum(1 for i in range(min(m, ncols)) if s[i][i] != 0)
    # kernel basis = columns of v beyond the rank
    out = []
    for j in range(rank, ncols):
        out.append([v[i][j] for i in range(ncols)])
    return out


def solve_integer(mat_cols: List[List[int]], target: List[int]
                  ) -> Optional[List[int]]:
    """Integral solution x of sum_j x_j col_j = target, or None.

    Uses Smith normal form, so underdetermined systems are handled: an
    integral solution is found whenever one exists."""
    ncols = len(mat_cols)
    nrows = len(target)
    if ncols == 0:
        return [] if all(t == 0 for t in target) else None
    a = [[mat_cols[j][i] for j in range(ncols)] for i in range(nrows)]
    u, s, v = smith_normal_form(a)
    ub = [sum(u[i][k] * target[k] for k in range(nrows))
          for i in range(nrows)]
    y = [0] * ncols
    for i in range(nrows):
        d = s[i][i] if i < min(nrows, ncols) else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d:
                return None
            if i < ncols:
                y[i] = ub[i] // d
    return [sum(v[i][j] * y[j] for j in range(ncols))
            for i in range(ncols)]


def hnf_rows(rows: List[List[int]]) -> List[List[int]]:
    """Row Hermite-style basis of the lattice spanned by the rows."""
    rows = [r[:] for r in rows if any(r)]
    n = len(rows[0]) if rows else 0
    basis: List[List[int]] = []
    for c in range(n):
        work = [r for r in rows if r[c] != 0]
        if not work:
            continue
        while True:
            work.sort(key=lambda r: abs(r[c]))
            pivot = work[0]
            rest = work[1:]
            done = True
            new_rest = []
            for r in rest:
                q = r[c] // pivot[c]
                rr = [a - q * b for a, b in zip(r, pivot)]
                if rr[c] != 0:
                    done = False
                new_rest.append(rr)
            carry = [r for r in new_rest if r[c] != 0]
            passthru = [r for r in new_rest if r[c] == 0]
            rows = [r for r in rows if r[c] == 0] + passthru
            if done:
                if pivot[c] < 0:
                    pivot = [-x for x in pivot]
                basis.append(pivot)
                break
            work = [pivot] + carry
    return basis


# ---------------------------------------------------------------------------
# The double cover complex
# ---------------------------------------------------------------------------


class GammaLattice:
    """Charge lattice of a flat surface, with pairing, periods, and class
    computation for saddle connections and cylinders."""

    def __init__(self, surface: FlatSurface):
        self.surface = surface
        self._build_cells()
        self._build_homology()

    # -- cells

    def _build_cells(self) -> None:
        s = self.surface
        self.edge_reps: List[Tuple[int, int]] = s.edge_classes()
        self.edge_id: Dict[Tuple[int, int], Tuple[int, int, int]] = {}
        for idx, (t, e) in enumerate(self.edge_reps):
            t2, e2, g = s.tri_glue[(t, e)]
            self.edge_id[(t, e)] = (idx, 0, +1)
            # from the partner side: reversed, sheet-shifted by the flip
            self.edge_id[(t2, e2)] = (idx, g.flip, -1)
        # cover vertices: orbits of (tri, corner, sheet)
        parent: Dict[Tuple[int, int, int], Tuple[int, int, int]] = {}

        def find(x):
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        for t in range(len(s.tris)):
            for c in range(3):
                for sheet in (0, 1):
                    t2, c2, g = s._link_next(t, c)
                    union((t, c, sheet), (t2, c2, sheet ^ g.flip))
        self.cover_vertex: Dict[Tuple[int, int, int], int] = {}
        reps: Dict[Tuple[int, int, int], int] = {}
        for t in range(len(s.tris)):
            for c in range(3):
                for sheet in (0, 1):
                    r = find((t, c, sheet))
                    if r not in reps:
                        reps[r] = len(reps)
                    self.cover_vertex[(t, c, sheet)] = reps[r]
        self.n_cover_vertices = len(reps)
        # is the cover vertex over a cone point?
        self.vertex_is_cone = [False] * self.n_cover_vertices
        self.vertex_base = [0] * self.n_cover_vertices
        for (t, c, sheet), idx in self.cover_vertex.items():
            base = s.vertex_of_corner(t, c)
            self.vertex_base[idx] = base.index
            if base.is_cone:
                self.vertex_is_cone[idx] = True

    def edge_coord(self, tri: int, e: int, sheet: int) -> Tuple[int, int]:
        """(column index, sign) of the cover edge copy seen from (tri, e)
        on the given sheet of tri."""
        idx, dflip, sign = self.edge_id[(tri, e)]
        return 2 * idx + (sheet ^ dflip), sign

    def _edge_endpoints(self, col: int) -> Tuple[int, int]:
        """(tail, head) cover vertices of cover edge column index."""
        idx, sheet = divmod(col, 2)
        t, e = self.edge_reps[idx]
        tail = self.cover_vertex[(t, e, sheet)]
        head = self.cover_vertex[(t, (e + 1) % 3, sheet)]
        return tail, head

    # -- homology

    def _build_homology(self) -> None:
        s = self.surface
        ne = 2 * len(self.edge_reps)
        # relative boundary: edges -> flat cover vertices only
        flat_idx = {}
        for i in range(self.n_cover_vertices):
            if not self.vertex_is_cone[i]:
                flat_idx[i] = len(flat_idx)
        d1 = [[0] * ne for _ in range(len(flat_idx))]
        for col in range(ne):
            tail, head = self._edge_endpoints(col)
            if head in flat_idx:
                d1[flat_idx[head]][col] += 1
            if tail in flat_idx:
                d1[flat_idx[tail]][col] -= 1
        z1 = integer_kernel(d1, ne)
        # boundaries of cover triangles
        b_cols: List[List[int]] = []
        for t in range(len(s.tris)):
            for sheet in (0, 1):
                vecb = [0] * ne
                for e in range(3):
                    col, sign = self.edge_coord(t, e, sheet)
                    vecb[col] += sign
                b_cols.append(vecb)
        # express boundaries in the kernel basis
        z1_cols = [list(col) for col in zip(*z1)] if z1 else []
        b_in_z: List[List[int]] = []
        for b in b_cols:
            coeffs = solve_integer([list(row) for row in z1], b)
            if coeffs is None:
                raise EnumerationError("triangle boundary not in kernel")
            b_in_z.append(coeffs)
        k = len(z1)
        # H = Z^k / span(b_in_z); free projection via SNF
        if b_in_z:
            mat = [[b_in_z[j][i] for j in range(len(b_in_z))]
                   for i in range(k)]  # k x nb, columns = relations
        else:
            mat = [[0] for _ in range(k)]
        u, snf, v = smith_normal_form(mat)
        diag = [snf[i][i] if i < len(snf[0]) else 0 for i in range(k)]
        free_rows = [i for i in range(k) if i >= len(snf[0]) or diag[i] == 0]
        # projection pi: kernel coords -> free coords: x -> (U x)_{free}
        self._proj_rows = [u[i] for i in free_rows]
        self.z1 = z1
        # sigma on edge columns: swap sheets
        self._sigma_cols = []
        for col in range(ne):
            idx, sheet = divmod(col, 2)
            self._sigma_cols.append(2 * idx + (1 - sheet))
        # Gamma = lattice spanned by pi((1-sigma) z_j)
        gens = []
        gen_chains = []
        for zrow in z1:
            chain = self._one_minus_sigma(zrow)
            coords = self._project_chain(chain)
            if any(coords):
                gens.append(coords)
                gen_chains.append(chain)
        basis = hnf_rows(gens)
        self.rank = len(basis)
        self.basis = basis
        # chains representing the basis (solve integer combinations)
        self.basis_chains: List[List[int]] = []
        for b in basis:
            coeffs = solve_integer([list(g) for g in gens], b)
            if coeffs is None:
                raise EnumerationError("Gamma basis chain not found")
            chain = [0] * ne
            for cf, gc in zip(coeffs, gen_chains):
                if cf:
                    chain = [a + cf * x for a, x in zip(chain, gc)]
            self.basis_chains.append(chain)
        self._pairing_cache: Optional[List[List[int]]] = None

    def _one_minus_sigma(self, chain: Sequence[int]) -> List[int]:
        out = list(chain)
        for col, c in enumerate(chain):
            if c:
                out[self._sigma_cols[col]] -= c
        return out

    def _project_chain(self, chain: Sequence[int]) -> List[int]:
        coeffs = solve_integer([list(z) for z in self.z1], list(chain))
        if coeffs is None:
            raise EnumerationError("chain is not a relative cycle")
        return [sum(r[j] * coeffs[j] for j in range(len(coeffs)))
                for r in self._proj_rows]

    def class_in_basis(self, chain: Sequence[int]) -> List[int]:
        """Coordinates of pi((1-sigma) chain) in the Gamma basis."""
        target = self._project_chain(self._one_minus_sigma(chain))
        coords = solve_integer([list(b) for b in self.basis], target)
        if coords is None:
            raise EnumerationError("class not in the Gamma lattice")
        return coords

    # -- periods

    def edge_period(self, col: int) -> Vec:
        idx, sheet = divmod(col, 2)
        t, e = self.edge_reps[idx]
        u = self.surface.tris[t].edge_vec(e)
        return u if sheet == 0 else vneg(u)

    def chain_period(self, chain: Sequence[int]) -> Vec:
        d = self.surface.d
        total = (QD(0, 0, d), QD(0, 0, d))
        for col, c in enumerate(chain):
            if c:
                u = self.edge_period(col)
                total = vadd(total, (u[0] * c, u[1] * c))
        return total

    def period(self, gamma: Sequence[int]) -> Vec:
        """Z(gamma): half the period of the representing closed chain."""
        d = self.surface.d
        total = (QD(0, 0, d), QD(0, 0, d))
        for g, chain in zip(gamma, self.basis_chains):
            if g:
                p = self.chain_period(chain)
                total = vadd(total, (p[0] * g, p[1] * g))
        half = QD(Fraction(1, 2), 0, d)
        return (total[0] * half, total[1] * half)

    # -- the pairing

    def pairing_matrix(self) -> List[List[int]]:
        if self._pairing_cache is None:
            self._pairing_cache = [
                [self._intersection(ci, cj) for cj in self.basis_chains]
                for ci in self.basis_chains]
        return self._pairing_cache

    def pair(self, g1: Sequence[int], g2: Sequence[int]) -> int:
        mat = self.pairing_matrix()
        return sum(g1[i] * mat[i][j] * g2[j]
                   for i in range(self.rank) for j in range(self.rank))

    # intersection of closed cover chains by left-push crossing counts

    def _vertex_halfedges(self, vtx: int) -> List[Tuple[int, int]]:
        """CCW cyclic list of half-edges (column, away_sign) at a cover
        vertex, where away_sign is +1 when the vertex is the tail of the
        cover edge."""
        cache = getattr(self, "_halfedge_cache", None)
        if cache is None:
            cache = {}
            self._halfedge_cache = cache
        if vtx in cache:
            return cache[vtx]
        # find a corner copy of this vertex and walk the cover link
        start = next(k for k, i in self.cover_vertex.items() if i == vtx)
        s = self.surface
        out: List[Tuple[int, int]] = []
        cur = start
        while True:
            t, c, sheet = cur
            # the half-edge crossed leaving this wedge CCW: edge (c-1) of t
            e = (c - 1) % 3
            col, sign = self.edge_coord(t, e, sheet)
            # the vertex sits at corner c = the head of edge (c-1) as seen
            # from t, so the half-edge pointing away runs against the local
            # direction; relative to the canonical copy that is -sign
            away = -sign
            out.append((col, away))
            t2, c2, g = s._link_next(t, c)
            cur = (t2, c2, sheet ^ g.flip)
            if cur == start:
                break
        cache[vtx] = out
        return out

    def _decompose_loops(self, chain: Sequence[int]
                         ) -> List[List[Tuple[int, int]]]:
        """Decompose an integer 1-cycle into directed edge loops
        [(column, direction)), ...]."""
        residual = list(chain)
        loops = []
        guard = 0
        while any(residual):
            guard += 1
            if guard > 10000:
                raise EnumerationError("loop decomposition runaway")
            col = next(i for i, c in enumerate(residual) if c)
            direction = 1 if residual[col] > 0 else -1
            loop = [(col, direction)]
            residual[col] -= direction
            tail, head = self._edge_endpoints(col)
            cur = head if direction > 0 else tail
            start = tail if direction > 0 else head
            while cur != start:
                nxt = None
                for col2, c2 in enumerate(residual):
                    if c2 == 0:
                        continue
                    t2, h2 = self._edge_endpoints(col2)
                    d2 = 1 if c2 > 0 else -1
                    if (t2 if d2 > 0 else h2) == cur:
                        nxt = (col2, d2)
                        break
                if nxt is None:
                    raise EnumerationError("cycle decomposition stuck")
                loop.append(nxt)
                residual[nxt[0]] -= nxt[1]
                t2, h2 = self._edge_endpoints(nxt[0])
                cur = h2 if nxt[1] > 0 else t2
            loops.append(loop)
        return loops

    def _intersection(self, chain_x: Sequence[int], chain_y: Sequence[int]
                      ) -> int:
        total = 0
        for loop in self._decompose_loops(chain_x):
            n = len(loop)
            for i in range(n):
                col_in, dir_in = loop[i]
                col_out, dir_out = loop[(i + 1) % n]
                tail_in, head_in = self._edge_endpoints(col_in)
                vtx = head_in if dir_in > 0 else tail_in
                halfedges = self._vertex_halfedges(vtx)
                # positions of h_out (departing) and h_in (arriving back)
                pos_out = pos_in = None
                want_out = 1 if dir_out > 0 else -1
                want_in = -1 if dir_in > 0 else 1
                for pos, (col, away) in enumerate(halfedges):
                    if col == col_out and away == want_out and \
                            pos_out is None:
                        pos_out = pos
                    if col == col_in and away == want_in and pos_in is None:
                        pos_in = pos
                if pos_out is None or pos_in is None:
                    raise EnumerationError(
                        f"half-edge not found at vertex {vtx}: "
                        f"in={col_in},{dir_in} out={col_out},{dir_out} "
                        f"list={halfedges}")
                m = len(halfedges)
                # crossed: strictly CCW-between pos_out and pos_in
                p = (pos_out + 1) % m
                while p != pos_in:
                    col, away = halfedges[p]
                    total += away * chain_y[col]
                    p = (p + 1) % m
        return total

    # -- classes of geometric objects

    def slide_corner(self, tri: int, e: int) -> int:
        """Corner index in ``tri`` of the canonical tail of edge (tri, e):
        the fixed endpoint crossing points slide to."""
        idx, dflip, sign = self.edge_id[(tri, e)]
        return e if sign > 0 else (e + 1) % 3

    def _add_step(self, chain: List[int], tri: int, sheet: int,
                  u: int, v: int) -> None:
        """Add the edge of ``tri`` from corner u to corner v on the given
        sheet (no-op when u == v)."""
        if u == v:
            return
        if (u + 1) % 3 == v:
            e, direction = u, 1
        elif (v + 1) % 3 == u:
            e, direction = v, -1
        else:
            raise EnumerationError("corners not adjacent in a triangle")
        col, sign = self.edge_coord(tri, e, sheet)
        chain[col] += direction * sign

    def _link_flip(self, t1, c1, t2, c2) -> int:
        """Sheet flip accumulated walking the vertex link from (t1, c1)
        to (t2, c2)."""
        s = self.surface
        cur_t, cur_c = t1, c1
        flip = 0
        for _ in range(6 * len(s.tris) + 6):
            if (cur_t, cur_c) == (t2, c2):
                return flip
            nt, nc, g = s._link_next(cur_t, cur_c)
            flip ^= g.flip
            cur_t, cur_c = nt, nc
        raise EnumerationError("link walk did not reach target")

    def _run_edge_chain(self, chain, tri, corner, ray, sheet) -> None:
        """Append a run along triangulation edges starting at the vertex
        of (tri, corner) in direction ``ray`` (which may be the corner's
        own outgoing edge), ending at the first cone vertex."""
        from ..quadfield import same_ray
        from .enumerate import _edge_after_vertex
        s = self.surface
        if same_ray(ray, s.tris[tri].edge_vec(corner)):
            cur_t, cur_c, cur_sheet = tri, corner, sheet
        else:
            nt, nc, _ = _edge_after_vertex(s, tri, corner, ray)
            cur_sheet = sheet ^ self._link_flip(tri, corner, nt, nc)
            cur_t, cur_c = nt, nc
        for _ in range(10000):
            col, sign = self.edge_coord(cur_t, cur_c, cur_sheet)
            chain[col] += sign
            far = (cur_c + 1) % 3
            if s.vertex_of_corner(cur_t, far).is_cone:
                return
            evec = s.tris[cur_t].edge_vec(cur_c)
            nt, nc, _ = _edge_after_vertex(s, cur_t, far, evec)
            cur_sheet ^= self._link_flip(cur_t, far, nt, nc)
            cur_t, cur_c = nt, nc
        raise EnumerationError("edge run did not terminate")

    def _connection_chain(self, sc: SaddleConnection) -> List[int]:
        """Edge chain of the sheet-0 lift, homologous rel endpoints to the
        connection: every interior edge crossing slides to the canonical
        tail of its edge; consecutive targets join inside each triangle."""
        from .enumerate import _edge_after_vertex, _wedge_after_vertex
        s = self.surface
        ne = 2 * len(self.edge_reps)
        chain = [0] * ne
        t0, c0, u = sc.start
        state = (t0, s.tris[t0].verts[c0], u, 0, c0)
        guard = 0
        while state is not None:
            guard += 1
            if guard > 100000:
                raise EnumerationError("chain construction runaway")
            tri0, pt0, r0, sheet_base, entry_target = state
            state = None
            pending_target = entry_target
            for ev in trace_line(s, tri0, pt0, r0):
                if ev[0] == "seg":
                    _, tri1, psi, a_dev, b_dev, e_in, e_out = ev
                    sheet1 = sheet_base ^ (0 if psi.s == 1 else 1)
                    if e_in is not None:
                        et = self.slide_corner(tri1, e_in)
                    else:
                        et = pending_target
                    if e_out is not None:
                        xt = self.slide_corner(tri1, e_out)
                        self._add_step(chain, tri1, sheet1, et, xt)
                        pending_target = None
                    else:
                        pending_target = et  # vertex event follows
                elif ev[0] == "vertex":
                    _, tri1, psi, corner, pos_dev = ev
                    sheet1 = sheet_base ^ (0 if psi.s == 1 else 1)
                    self._add_step(chain, tri1, sheet1, pending_target,
                                   corner)
                    vert = s.vertex_of_corner(tri1, corner)
                    if vert.is_cone:
                        return chain
                    inv = psi.inverse()
                    local_ray = inv.linear(r0)
                    t2, c2, g = _wedge_after_vertex(s, tri1, corner,
                                                    local_ray)
                    if t2 is None:
                        nt, nc, nray = _edge_after_vertex(
                            s, tri1, corner, local_ray)
                        self._run_edge_chain(
                            chain, nt, nc, nray,
                            sheet1 ^ self._link_flip(tri1, corner, nt, nc))
                        return chain
                    flip = self._link_flip(tri1, corner, t2, c2)
                    state = (t2, s.tris[t2].verts[c2],
                             g.linear(local_ray), sheet1 ^ flip, c2)
                    break
                else:  # edgerun from the start corner
                    self._run_edge_chain(chain, tri0, entry_target, r0,
                                         sheet_base)
                    return chain
        return chain

    def class_of_connection(self, sc: SaddleConnection) -> List[int]:
        return self.class_in_basis(self._connection_chain(sc))

    def _leaf_chain(self, tri: int, pt: Vec, direction: Vec) -> List[int]:
        """Edge chain of the sheet-0 lift of the closed leaf through
        (tri, pt); the leaf must close up with trivial derivative."""
        s = self.surface
        ne = 2 * len(self.edge_reps)
        chain = [0] * ne
        steps = []  # (tri, sheet, entry_edge, exit_edge)
        first_exit = None
        closed = False
        for ev in trace_line(s, tri, pt, direction):
            if ev[0] != "seg":
                raise EnumerationError("leaf hits a vertex")
            _, tri1, psi, a_dev, b_dev, e_in, e_out = ev
            sheet1 = 0 if psi.s == 1 else 1
            if first_exit is None:
                if e_out is None:
                    raise EnumerationError("leaf hits a vertex")
                first_exit = self.slide_corner(tri1, e_out)
            else:
                steps.append((tri1, sheet1, e_in, e_out))
            # closure: back in the start triangle on sheet 0 containing pt
            if steps and tri1 == tri and sheet1 == 0:
                inv = psi.inverse()
                la, lb = inv.apply(a_dev), inv.apply(b_dev)
                seg = vsub(lb, la)
                dpt = vsub(pt, la)
                from ..quadfield import dot as qdot, parallel as qpar
                if qpar(seg, dpt) and qdot(seg, dpt).sign() >= 0 and \
                        (qdot(seg, dpt) - qdot(seg, seg)).sign() <= 0:
                    w = vsub(psi.apply(pt), pt)
                    if not (w[0].is_zero() and w[1].is_zero()):
                        closed = True
                        break
            if len(steps) > 50000:
                raise EnumerationError("leaf chain runaway")
        if not closed:
            raise EnumerationError("leaf did not close")
        # the closing visit re-enters the start triangle: its entry target
        # joins back to the first exit target
        last_tri, last_sheet, last_ein, _ = steps[-1]
        for (tri1, sheet1, e_in, e_out) in steps[:-1]:
            et = self.slide_corner(tri1, e_in)
            xt = self.slide_corner(tri1, e_out)
            self._add_step(chain, tri1, sheet1, et, xt)
        et = self.slide_corner(last_tri, last_ein)
        self._add_step(chain, last_tri, last_sheet, et, first_exit)
        return chain

    def class_of_cylinder(self, cyl: FlatCylinder,
                          conns: Sequence[SaddleConnection]) -> List[int]:
        """Class of the core curve, via a closed middle leaf."""
        ci, orient = cyl.boundary_cycles[0][0]
        sc = conns[ci]
        for num, den in ((1, 2), (1, 3), (2, 3), (1, 5), (2, 5), (3, 5)):
            try:
                tri, pt, seg_dir = _interior_point(self.surface, sc, num,
                                                   den)
                u_dir = seg_dir if orient == 0 else vneg(seg_dir)
                from ..quadfield import rot90
                w_dir = rot90(u_dir)
                h_vec = self._half_height_point(cyl, tri, pt, w_dir)
                if h_vec is None:
                    continue
                mid_dev = vadd(pt, h_vec)
                from .enumerate import _locate_on_trace
                mid = _locate_on_trace(self.surface, tri, pt, w_dir,
                                       mid_dev, u_dir)
                if mid is None:
                    continue
                mid_tri, mid_pt, mid_dir = mid
                chain = self._leaf_chain(mid_tri, mid_pt, mid_dir)
                return self.class_in_basis(chain)
            except EnumerationError:
                continue
        raise EnumerationError("cylinder class: no usable middle leaf")

    def _half_height_point(self, cyl, tri, pt, w_dir):
        from fractions import Fraction as F
        from ..quadfield import QD as _QD
        # replicate the certification trace to get the height vector
        from .enumerate import _first_parallel_hit, _segments_index
        seg_idx = getattr(self, "_seg_idx_cache", None)
        if seg_idx is None:
            return None
        hit = _first_parallel_hit(self.surface, seg_idx, tri, pt, w_dir,
                                  rot90_inv(w_dir), True,
                                  cyl.height2 * _QD(16, 0, self.surface.d))
        if hit is None:
            return None
        _, h_vec, _, _, _ = hit
        half = _QD(F(1, 2), 0, self.surface.d)
        return (h_vec[0] * half, h_vec[1] * half)

    def attach_segments_index(self, conns) -> None:
        from .enumerate import _segments_index
        self._seg_idx_cache = _segments_index(self.surface, conns)


def rot90_inv(u: Vec) -> Vec:
    return (u[1], -u[0])
