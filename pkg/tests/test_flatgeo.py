from fractions import Fraction
from math import gcd

import pytest

from flatcat.quadfield import QD, cross, norm2, vec
from flatcat.flatgeo.surface import (
    AngleNotAllowed,
    FlatSurfaceError,
    GluingMismatch,
    build_surface,
)
from flatcat.flatgeo.enumerate import (
    enumerate_saddle_connections,
    find_cylinders,
    _sqrt_in_qd,
)
from flatcat.flatgeo.homology import GammaLattice, smith_normal_form, \
    solve_integer
from flatcat.refdata import (
    lpillow_surface_spec,
    pillowcase_folded_spec,
    pillowcase_surface_spec,
    slit_pillowcase_spec,
    twotorus_genus2_spec,
    unit_torus_spec,
)
from flatcat.dt import analyze_surface


@pytest.fixture(scope="module")
def pillow():
    return build_surface(pillowcase_surface_spec())


# -- building ----------------------------------------------------------------


def test_pillowcase_structure(pillow):
    assert pillow.genus == 0
    assert pillow.n_poles == 4 and pillow.n_zeros == 0
    kinds = sorted(v.kind for v in pillow.vertices)
    assert kinds == ["pole"] * 4


def test_unit_torus_rejected():
    with pytest.raises(AngleNotAllowed):
        build_surface(unit_torus_spec())


def test_slit_pillowcase_is_q05():
    s = build_surface(slit_pillowcase_spec())
    assert (s.genus, s.n_zeros, s.n_poles) == (0, 1, 5)
    # one auxiliary flat vertex at the foot of the vertical cut
    assert sum(1 for v in s.vertices if v.kind == "flat") == 1


def test_genus2_two_slit_tori():
    s = build_surface(twotorus_genus2_spec())
    assert (s.genus, s.n_zeros, s.n_poles) == (2, 4, 0)


def test_bad_gluing_rejected():
    spec = pillowcase_surface_spec()
    spec["gluings"][0]["type"] = "translation"  # fold edges: wrong type
    with pytest.raises(GluingMismatch):
        build_surface(spec)


def test_self_edge_gluing_rejected():
    spec = pillowcase_surface_spec()
    spec["gluings"][0]["edges"] = [[0, 0], [0, 0]]
    with pytest.raises(GluingMismatch):
        build_surface(spec)


# -- saddle connection enumeration -------------------------------------------


def pillowcase_oracle(lmax2: Fraction) -> int:
    """Primitive vectors of the torus double cover, two connections per
    +-class: Lambda = <(1,0),(0,sqrt2)>, v = w/2."""
    count = 0
    seen = set()
    m_bound = 12
    for m in range(-m_bound, m_bound + 1):
        for n in range(-m_bound, m_bound + 1):
            if (m, n) == (0, 0) or gcd(abs(m), abs(n)) != 1:
                continue
            if (m, n) in seen or (-m, -n) in seen:
                continue
            if Fraction(m * m) + 2 * n * n <= 4 * lmax2:
                seen.add((m, n))
                count += 2
    return count


@pytest.mark.parametrize("lmax2", [1, 2, 4, 8])
def test_pillowcase_matches_lattice_oracle(pillow, lmax2):
    conns = enumerate_saddle_connections(pillow, QD(lmax2, 0, 2))
    assert len(conns) == pillowcase_oracle(Fraction(lmax2))


def test_pillowcase_oracle_exact_holonomies(pillow):
    conns = enumerate_saddle_connections(pillow, QD(2, 0, 2))
    got = set()
    for sc in conns:
        h = sc.holonomy
        key = tuple(sorted([(h[0].a, h[0].b, h[1].a, h[1].b),
                            ((-h[0]).a, (-h[0]).b, (-h[1]).a, (-h[1]).b)]))
        got.add((frozenset((sc.v_start, sc.v_end)), key))
    assert len(got) == len(conns)  # each (endpoints, +-holonomy) unique
    # every holonomy is half a lattice vector: (m/2, n/2 * sqrt2)
    for sc in conns:
        assert (2 * sc.holonomy[0].a).denominator == 1
        assert sc.holonomy[0].b == 0
        assert sc.holonomy[1].a == 0
        assert (2 * sc.holonomy[1].b).denominator == 1


def test_folded_pillowcase_oracle():
    s = build_surface(pillowcase_folded_spec())
    for lmax2 in (1, 2, 4):
        conns = enumerate_saddle_connections(s, QD(lmax2, 0, 2))
        count = 0
        seen = set()
        for a in range(-14, 15):
            for b in range(-14, 15):
                if (a, b) == (0, 0) or gcd(abs(a), abs(b)) != 1:
                    continue
                if (a, b) in seen or (-a, -b) in seen:
                    continue
                if Fraction((2 * a + b) ** 2) + Fraction(b * b, 2) \
                        <= 4 * lmax2:
                    seen.add((a, b))
                    count += 2
        assert len(conns) == count, lmax2


def test_counts_monotone_and_empty(pillow):
    c1 = enumerate_saddle_connections(pillow, QD(Fraction(1, 8), 0, 2))
    assert c1 == []  # shortest connection has length^2 = 1/4
    prev = 0
    for lmax2 in (Fraction(1, 4), 1, 2, 4):
        cs = enumerate_saddle_connections(pillow, QD(lmax2, 0, 2))
        assert len(cs) >= prev
        prev = len(cs)


def test_lpillow_connection_types():
    s = build_surface(lpillow_surface_spec())
    conns = enumerate_saddle_connections(s, QD(4, 0, 2))
    tags = {t: sum(1 for c in conns if c.type_tag(s) == t)
            for t in ("++", "+-", "--")}
    assert tags["+-"] > 0  # zero-pole connections exist
    assert tags["--"] > 0


def test_gl2_change_of_coordinates_invariance():
    # shear all polygons by [[1,1],[0,1]]: counts at transformed lengths
    # must match (here: compare cardinalities under the mapped bound).
    spec = pillowcase_surface_spec()
    s = build_surface(spec)
    conns = enumerate_saddle_connections(s, QD(2, 0, 2))
    import copy

    spec2 = copy.deepcopy(spec)
    for poly in spec2["polygons"]:
        for v in poly:
            xr, xc = Fraction(v[0][0]), Fraction(v[0][1])
            yr, yc = Fraction(v[1][0]), Fraction(v[1][1])
            v[0] = [str(xr + yr), str(xc + yc)]  # x' = x + y
    s2 = build_surface(spec2)
    # enumerate far enough on the sheared surface to cover the image of
    # the ball |v|^2 <= 2: |Av|^2 <= 3|v|^2 + eps; take 8 and filter
    conns2 = enumerate_saddle_connections(s2, QD(8, 0, 2))
    mapped = set()
    for sc in conns:
        h = sc.holonomy
        im = (h[0] + h[1], h[1])
        key = tuple(sorted([(im[0].a, im[0].b, im[1].a, im[1].b),
                            ((-im[0]).a, (-im[0]).b,
                             (-im[1]).a, (-im[1]).b)]))
        mapped.add(key)
    got = set()
    for sc in conns2:
        h = sc.holonomy
        key = tuple(sorted([(h[0].a, h[0].b, h[1].a, h[1].b),
                            ((-h[0]).a, (-h[0]).b, (-h[1]).a, (-h[1]).b)]))
        got.add(key)
    assert mapped <= got
    # and multiplicity per holonomy class matches
    from collections import Counter

    cnt = Counter()
    for sc in conns:
        h = sc.holonomy
        im = (h[0] + h[1], h[1])
        key = tuple(sorted([(im[0].a, im[0].b, im[1].a, im[1].b),
                            ((-im[0]).a, (-im[0]).b,
                             (-im[1]).a, (-im[1]).b)]))
        cnt[key] += 1
    cnt2 = Counter()
    for sc in conns2:
        h = sc.holonomy
        key = tuple(sorted([(h[0].a, h[0].b, h[1].a, h[1].b),
                            ((-h[0]).a, (-h[0]).b, (-h[1]).a, (-h[1]).b)]))
        if key in cnt:
            cnt2[key] += 1
    assert cnt == cnt2


# -- cylinders ----------------------------------------------------------------


def test_pillowcase_cylinders(pillow):
    conns = enumerate_saddle_connections(pillow, QD(2, 0, 2))
    cyls = find_cylinders(pillow, conns, QD(2, 0, 2))
    assert len(cyls) == 2
    by_c2 = {(c.circumference2.a, c.circumference2.b): c for c in cyls}
    horizontal = by_c2[(Fraction(1), Fraction(0))]
    vertical = by_c2[(Fraction(2), Fraction(0))]
    assert horizontal.height2 == QD(Fraction(1, 2), 0, 2)
    assert vertical.height2 == QD(Fraction(1, 4), 0, 2)
    for cyl in cyls:
        for t in cyl.boundary_types:
            assert t == "saddle connection between two poles"
        # boundary cycle traverses one connection twice
        for cycle in cyl.boundary_cycles:
            assert len(cycle) == 2
            assert cycle[0][0] == cycle[1][0]
    # area certificate: both cylinders fill the surface in their direction
    area2 = pillow.total_area2()
    for cyl in cyls:
        prod = cyl.circumference2 * cyl.height2
        root = _sqrt_in_qd(prod, 2)
        assert root is not None
        assert root * QD(2, 0, 2) == area2


def test_no_cylinder_off_slope(pillow):
    # tiny bound: no connection pairs, no cylinders
    conns = enumerate_saddle_connections(pillow, QD(Fraction(1, 4), 0, 2))
    cyls = find_cylinders(pillow, conns, QD(Fraction(1, 4), 0, 2))
    assert cyls == []


def test_genus2_torus_attached_boundary():
    s = build_surface(twotorus_genus2_spec())
    conns = enumerate_saddle_connections(s, QD(Fraction(9, 8), 0, 2))
    cyls = find_cylinders(s, conns, QD(Fraction(9, 8), 0, 2))
    types = [t for c in cyls for t in c.boundary_types]
    assert any("flat torus attached" in t for t in types), types


# -- homology -----------------------------------------------------------------


def test_snf_and_solver():
    u, s, v = smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, 4, 16]])
    diag = [s[i][i] for i in range(3)]
    assert diag[0] > 0 and diag[0] == 2
    assert solve_integer([[2, 0]], [4, 0]) == [2]
    assert solve_integer([[2, 0], [3, 1]], [1, 0]) is None  # forces 2x=1
    assert solve_integer([[2, 0], [3, 1]], [5, 1]) == [1, 1]
    assert solve_integer([[2, 0]], [1, 0]) is None
    # underdetermined with integral solution (2x + 3y = 1)
    sol = solve_integer([[2], [3]], [1])
    assert sol is not None and 2 * sol[0] + 3 * sol[1] == 1


@pytest.mark.parametrize("spec,rank", [
    (pillowcase_surface_spec(), 2),
    (pillowcase_folded_spec(), 2),
    (lpillow_surface_spec(), 4),
    (slit_pillowcase_spec(), 4),
    (twotorus_genus2_spec(), 6),
])
def test_gamma_rank(spec, rank):
    gl = GammaLattice(build_surface(spec))
    assert gl.rank == rank
    m = gl.pairing_matrix()
    for i in range(rank):
        for j in range(rank):
            assert m[i][j] == -m[j][i]


def test_z_equals_holonomy_everywhere():
    for spec, lmax2 in [(pillowcase_surface_spec(), 2),
                        (slit_pillowcase_spec(), 1),
                        (twotorus_genus2_spec(), 1)]:
        s = build_surface(spec)
        gl = GammaLattice(s)
        for sc in enumerate_saddle_connections(s, QD(lmax2, 0, 2)):
            gamma = gl.class_of_connection(sc)
            z = gl.period(gamma)
            h = sc.holonomy
            assert (z[0] == h[0] and z[1] == h[1]) or \
                (z[0] == -h[0] and z[1] == -h[1])


def test_pillowcase_cylinder_class_relation(pillow):
    conns = enumerate_saddle_connections(pillow, QD(2, 0, 2))
    cyls = find_cylinders(pillow, conns, QD(2, 0, 2))
    gl = GammaLattice(pillow)
    gl.attach_segments_index(conns)
    for cyl in cyls:
        gamma = gl.class_of_cylinder(cyl, conns)
        ci = cyl.boundary_cycles[0][0][0]
        gb = gl.class_of_connection(conns[ci])
        assert [2 * x for x in gb] == list(gamma) or \
            [-2 * x for x in gb] == list(gamma)
        # Z additivity: cylinder period is +-2x the boundary period
        zc = gl.period(gamma)
        zb = gl.period(gb)
        assert {zc[0], -zc[0]} == {zb[0] + zb[0], -(zb[0] + zb[0])}


def test_pillowcase_pairing_is_symplectic(pillow):
    gl = GammaLattice(pillow)
    m = gl.pairing_matrix()
    assert m in ([[0, 1], [-1, 0]], [[0, -1], [1, 0]])


# -- genericity ----------------------------------------------------------------


def test_pillowcase_sqrt2_generic(pillow):
    data = analyze_surface(pillow, QD(4, 0, 2))
    assert data.generic
    assert data.witnesses == []


def test_square_pillowcase_verdict_recorded():
    spec = pillowcase_surface_spec(h_rat=Fraction(1, 2), h_coef=0)
    s = build_surface(spec)
    data = analyze_surface(s, QD(2, 0, 2))
    # rational aspect ratio: the verdict is recorded either way; with a
    # rank-2 lattice aligned classes stay dependent, so this one is generic
    assert isinstance(data.generic, bool)
    for w in data.witnesses:
        assert w["classes"]


def test_genus2_twin_slits_non_generic():
    s = build_surface(twotorus_genus2_spec())
    data = analyze_surface(s, QD(Fraction(1, 2), 0, 2))
    assert not data.generic
    assert data.witnesses  # the two parallel slit banks of the two tori


def test_retriangulation_invariance():
    # shifting the cut foot is a different polygonalization of a nearby
    # surface; instead re-triangulate the SAME surface by permuting the
    # polygon vertex lists cyclically (ear clipping changes).
    spec = pillowcase_surface_spec()
    s1 = build_surface(spec)
    spec2 = pillowcase_surface_spec()
    poly = spec2["polygons"][0]
    k = 2
    spec2["polygons"][0] = poly[k:] + poly[:k]
    for g in spec2["gluings"]:
        for e in g["edges"]:
            e[1] = (e[1] - k) % len(poly)
    s2 = build_surface(spec2)
    for lmax2 in (1, 2, 4):
        c1 = enumerate_saddle_connections(s1, QD(lmax2, 0, 2))
        c2 = enumerate_saddle_connections(s2, QD(lmax2, 0, 2))
        assert len(c1) == len(c2)
        m1 = sorted((sc.length2.a, sc.length2.b) for sc in c1)
        m2 = sorted((sc.length2.a, sc.length2.b) for sc in c2)
        assert m1 == m2
