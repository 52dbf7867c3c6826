"""Reference surfaces and arc systems used by tests, docs and the CLI."""

from __future__ import annotations

from fractions import Fraction
from .surfaces import hexpillow_spec, pillowcase_spec, torus_spec  # noqa: F401


def _c(x, xr=0):
    """Coordinate [rational, sqrt-coefficient] in string form."""
    return [str(Fraction(x)), str(Fraction(xr))]


def pillowcase_surface_spec(h_rat=0, h_coef=Fraction(1, 2), d: int = 2
                            ) -> dict:
    """1 x h rectangle, bottom and top folded, left glued to right; four
    poles, no auxiliary vertices.  Default h = sqrt(2)/2."""
    h = (h_rat, h_coef)
    return {
        "d": d,
        "polygons": [[
            [_c(0), _c(0)],
            [_c(Fraction(1, 2)), _c(0)],
            [_c(1), _c(0)],
            [_c(1), [str(Fraction(h[0])), str(Fraction(h[1]))]],
            [_c(Fraction(1, 2)), [str(Fraction(h[0])), str(Fraction(h[1]))]],
            [_c(0), [str(Fraction(h[0])), str(Fraction(h[1]))]],
        ]],
        "gluings": [
            {"edges": [[0, 0], [0, 1]], "type": "halfturn"},
            {"edges": [[0, 3], [0, 4]], "type": "halfturn"},
            {"edges": [[0, 5], [0, 2]], "type": "translation"},
        ],
    }


def pillowcase_folded_spec(h_rat=0, h_coef=Fraction(1, 2), d: int = 2
                           ) -> dict:
    """1 x h rectangle with all four sides folded onto themselves; four
    poles at the edge midpoints plus one auxiliary flat vertex class."""
    hh = [str(Fraction(h_rat)), str(Fraction(h_coef))]
    half_h = [str(Fraction(h_rat) / 2), str(Fraction(h_coef) / 2)]
    return {
        "d": d,
        "polygons": [[
            [_c(0), _c(0)],
            [_c(Fraction(1, 2)), _c(0)],
            [_c(1), _c(0)],
            [_c(1), half_h],
            [_c(1), hh],
            [_c(Fraction(1, 2)), hh],
            [_c(0), hh],
            [_c(0), half_h],
        ]],
        "gluings": [
            {"edges": [[0, 0], [0, 1]], "type": "halfturn"},
            {"edges": [[0, 2], [0, 3]], "type": "halfturn"},
            {"edges": [[0, 4], [0, 5]], "type": "halfturn"},
            {"edges": [[0, 6], [0, 7]], "type": "halfturn"},
        ],
    }


def lpillow_surface_spec(a=2, b=1, c=1, dd=(1, Fraction(1, 2)), d: int = 2
                         ) -> dict:
    """Double of an L-shaped polygon: a sphere with five poles and one
    zero at the reflex corner.

    The double is presented unfolded across the bottom edge: one
    plus-shaped polygon with vertices (0,-D), (c,-D), (c,-b), (a,-b),
    (a,0), (a,b), (c,b), (c,D), (0,D), (0,0), where D = dd[0] +
    dd[1]*sqrt(d); opposite boundary edges are identified by the fold
    maps (x,y) ~ (x,-y) on each side, which are half-turns and
    translations.  Requires 0 < c < a and 0 < b < D."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    d0, d1 = Fraction(dd[0]), Fraction(dd[1])
    dpos = [str(d0), str(d1)]
    dneg = [str(-d0), str(-d1)]
    poly = [
        [_c(0), dneg],
        [_c(c), dneg],
        [_c(c), _c(-b)],
        [_c(a), _c(-b)],
        [_c(a), _c(0)],
        [_c(a), _c(b)],
        [_c(c), _c(b)],
        [_c(c), dpos],
        [_c(0), dpos],
        [_c(0), _c(0)],
    ]
    gluings = [
        {"edges": [[0, 0], [0, 7]], "type": "translation"},
        {"edges": [[0, 1], [0, 6]], "type": "halfturn"},
        {"edges": [[0, 2], [0, 5]], "type": "translation"},
        {"edges": [[0, 3], [0, 4]], "type": "halfturn"},
        {"edges": [[0, 8], [0, 9]], "type": "halfturn"},
    ]
    return {"d": d, "polygons": [poly], "gluings": gluings}


def slit_pillowcase_spec(wx=Fraction(1, 5), wy=(Fraction(1, 3), 0),
                         h=(0, Fraction(1, 2)), d: int = 2) -> dict:
    """Sphere with five poles and one zero: a 1 x h pillowcase with a
    straight slit of vector (wx, wy) cut from the bottom-middle pole,
    both banks folded onto themselves.

    The old pole merges with the slit tip into the zero (cone angle
    3*pi); the two bank midpoints become new poles.  An auxiliary
    vertical cut from the tip to the bottom edge keeps the presentation
    polygonal (its foot is an allowed 2*pi vertex).  The slit vector
    (wx, wy) is a free modulus: deforming it across a phase alignment
    produces wall-crossing pairs.  Requires 0 < wx < 1/2 and
    0 < wy < h."""
    wxq = Fraction(wx)
    wy0, wy1 = Fraction(wy[0]), Fraction(wy[1])
    h0, h1 = Fraction(h[0]), Fraction(h[1])
    px = Fraction(1, 2)
    mx = px + wxq / 2
    tx = px + wxq
    if not (0 < wxq and tx < 1):
        raise ValueError("slit must stay inside the rectangle")
    my = (wy0 / 2, wy1 / 2)
    ty = (wy0, wy1)
    hh = (h0, h1)
    zero = (Fraction(0), Fraction(0))

    def pt(x, y):
        return [[str(Fraction(x)), "0"],
                [str(Fraction(y[0])), str(Fraction(y[1]))]]

    rest = [
        pt(0, zero), pt(1 - tx, zero), pt(px, zero), pt(mx, my),
        pt(tx, ty), pt(tx, zero), pt(1, zero), pt(1, hh),
        pt(Fraction(1, 2), hh), pt(0, hh),
    ]
    wedge = [
        pt(px, zero), pt(tx, zero), pt(tx, ty), pt(mx, my),
    ]
    gluings = [
        {"edges": [[0, 0], [0, 5]], "type": "halfturn"},   # bottom outer
        {"edges": [[0, 1], [1, 0]], "type": "halfturn"},   # bottom inner
        {"edges": [[0, 2], [0, 3]], "type": "halfturn"},   # left bank fold
        {"edges": [[1, 2], [1, 3]], "type": "halfturn"},   # right bank fold
        {"edges": [[0, 4], [1, 1]], "type": "translation"},  # vertical cut
        {"edges": [[0, 7], [0, 8]], "type": "halfturn"},   # top fold
        {"edges": [[0, 9], [0, 6]], "type": "translation"},  # left-right
    ]
    return {"d": d, "polygons": [rest, wedge], "gluings": gluings}


def twotorus_genus2_spec(h=(0, Fraction(1, 3)), d: int = 2) -> dict:
    """Genus-2 surface: two square tori, each slit along a horizontal
    segment of length 1/2, joined by a cylinder of height h (default
    sqrt(2)/3).  Four zeros, no poles.  The two slits are parallel of
    equal holonomy with independent classes, so the surface is a
    deliberate non-generic witness."""
    h0, h1 = Fraction(h[0]), Fraction(h[1])
    hh = [str(h0), str(h1)]

    def sq(x0, y0, x1, y1, shift=0):
        return [
            [_c(Fraction(x0) + shift), _c(y0)],
            [_c(Fraction(x1) + shift), _c(y0)],
            [_c(Fraction(x1) + shift), _c(y1)],
            [_c(Fraction(x0) + shift), _c(y1)],
        ]

    p1 = sq(Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(3, 2))
    p2 = sq(Fraction(3, 4), Fraction(1, 2), Fraction(5, 4), Fraction(3, 2))
    p3 = sq(Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(3, 2),
            shift=10)
    p4 = sq(Fraction(3, 4), Fraction(1, 2), Fraction(5, 4), Fraction(3, 2),
            shift=10)
    cyl = [
        [_c(0), _c(0)],
        [_c(Fraction(1, 2)), _c(0)],
        [_c(1), _c(0)],
        [_c(1), hh],
        [_c(Fraction(1, 2)), hh],
        [_c(0), hh],
    ]
    # polygon indices: 0 = P1, 1 = P2, 2 = P3, 3 = P4, 4 = cylinder
    gluings = [
        # torus 1 internal
        {"edges": [[0, 1], [1, 3]], "type": "translation"},
        {"edges": [[0, 3], [1, 1]], "type": "translation"},
        {"edges": [[1, 2], [1, 0]], "type": "translation"},
        # torus 2 internal
        {"edges": [[2, 1], [3, 3]], "type": "translation"},
        {"edges": [[2, 3], [3, 1]], "type": "translation"},
        {"edges": [[3, 2], [3, 0]], "type": "translation"},
        # cylinder sides
        {"edges": [[4, 5], [4, 2]], "type": "translation"},
        # cylinder bottom onto torus-1 slit
        {"edges": [[4, 0], [0, 0]], "type": "halfturn"},
        {"edges": [[4, 1], [0, 2]], "type": "translation"},
        # cylinder top onto torus-2 slit
        {"edges": [[4, 4], [2, 0]], "type": "translation"},
        {"edges": [[4, 3], [2, 2]], "type": "halfturn"},
    ]
    return {"d": d, "polygons": [p1, p2, p3, p4, cyl], "gluings": gluings}


def wallcross_pair() -> dict:
    """The reference Q_{0,5} wall-crossing experiment.

    Two slit pillowcases with slit heights 1/3 and 1/4 straddle the phase
    alignment at wy = sqrt(2)/5 (among others); inside the chosen phase
    sector the surfaces are generic up to one commuting (zero-pairing)
    alignment, and the phase-ordered quantum torus products agree.  The
    weights give the short reordering classes weight 3, so the comparison
    to total degree 6 sees their full interaction, while every class of
    weight <= 6 has period within the enumeration bound."""
    return {
        "surface_a": slit_pillowcase_spec(wx=Fraction(1, 5),
                                          wy=(Fraction(1, 3), 0)),
        "surface_b": slit_pillowcase_spec(wx=Fraction(1, 5),
                                          wy=(Fraction(1, 4), 0)),
        "lmax2": ["4", "0"],
        "order": 6,
        "sector": [[["5", "0"], ["1", "0"]], [["12", "0"], ["7", "0"]]],
        "weights": [0, 3, -3, -2],
    }


def unit_torus_spec(d: int = 1) -> dict:
    """Unit square torus: rejected by the builder (no cone points)."""
    return {
        "d": d,
        "polygons": [[
            [_c(0), _c(0)], [_c(1), _c(0)], [_c(1), _c(1)], [_c(0), _c(1)],
        ]],
        "gluings": [
            {"edges": [[0, 0], [0, 2]], "type": "translation"},
            {"edges": [[0, 3], [0, 1]], "type": "translation"},
        ],
    }
