"""Geodesic counts per charge class, refined DT invariants, the small
quiver counting-series oracles, and wall-crossing experiments on pairs of
deformed surfaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .qseries import (
    LaurentQ,
    RationalQ,
    TruncSeries,
    bell_like_B,
    chi_gl,
    dilog_E,
    dilog_E_scaled,
    gl_order_brute,
    _inv_chi_gl,
)
from .qtorus import (
    ChargeLattice,
    DTSpectrum,
    QTorusSeries,
    _find_positive_functional,
    dt_factorize,
    spectrum_product,
)
from .quadfield import QD, Vec, cross, dot, norm2
from .flatgeo.surface import FlatSurface
from .flatgeo.enumerate import (
    FlatCylinder,
    SaddleConnection,
    enumerate_saddle_connections,
    find_cylinders,
)
from .flatgeo.homology import GammaLattice


class DTError(ValueError):
    pass


class NotGeneric(DTError):
    pass


class ClassMatchFailure(DTError):
    pass


class UnsupportedQuiver(DTError):
    pass


# ---------------------------------------------------------------------------
# Counting classes on a surface
# ---------------------------------------------------------------------------


@dataclass
class CountRecord:
    gamma: Tuple[int, ...]
    z: Vec
    n_pp: int = 0
    n_pm: int = 0
    n_mm: int = 0
    n_c: int = 0
    n_loop: int = 0   # saddle connections with equal endpoints (not counted
    #                   in the DT formula, which requires distinct points)

    def omega(self) -> LaurentQ:
        out = LaurentQ.scalar(self.n_pp + 2 * self.n_pm + 4 * self.n_mm)
        if self.n_c:
            out = out + LaurentQ({1: Fraction(self.n_c),
                                  -1: Fraction(self.n_c)})
        return out

    def omega_num(self) -> Fraction:
        return self.omega().specialize(-1)


def _normalize_sign(gamma: Sequence[int]) -> Tuple[int, ...]:
    for g in gamma:
        if g > 0:
            return tuple(gamma)
        if g < 0:
            return tuple(-x for x in gamma)
    return tuple(gamma)


@dataclass
class SurfaceData:
    surface: FlatSurface
    lmax2: QD
    connections: List[SaddleConnection]
    cylinders: List[FlatCylinder]
    gamma: GammaLattice
    records: List[CountRecord]
    generic: bool
    witnesses: List[dict]


def analyze_surface(surface: FlatSurface, lmax2: QD) -> SurfaceData:
    """Enumerate, classify and count everything up to the length bound."""
    conns = enumerate_saddle_connections(surface, lmax2)
    cyls = find_cylinders(surface, conns, lmax2)
    gl = GammaLattice(surface)
    gl.attach_segments_index(conns)
    by_class: Dict[Tuple[int, ...], CountRecord] = {}

    def rec_for(gamma, z) -> CountRecord:
        key = _normalize_sign(gamma)
        if key not in by_class:
            zz = gl.period(key)
            by_class[key] = CountRecord(gamma=key, z=zz)
        return by_class[key]

    class_of_conn: Dict[int, Tuple[int, ...]] = {}
    for sc in conns:
        gamma = gl.class_of_connection(sc)
        key = _normalize_sign(gamma)
        class_of_conn[sc.index] = key
        r = rec_for(gamma, None)
        k1, k2 = sc.endpoint_kinds(surface)
        if sc.v_start == sc.v_end:
            r.n_loop += 1
        elif (k1, k2) == ("zero", "zero"):
            r.n_pp += 1
        elif "zero" in (k1, k2):
            r.n_pm += 1
        else:
            r.n_mm += 1
    for cyl in cyls:
        gamma = gl.class_of_cylinder(cyl, conns)
        rec_for(gamma, None).n_c += 1
    generic, witnesses = genericity_check(gl, conns, cyls, class_of_conn)
    records = [by_class[k] for k in sorted(by_class)]
    return SurfaceData(surface, lmax2, conns, cyls, gl, records, generic,
                       witnesses)


def genericity_check(gl: GammaLattice, conns, cyls, class_of_conn
                     ) -> Tuple[bool, List[dict]]:
    """Exact check: parallel periods force Q-dependent classes."""
    items: List[Tuple[Tuple[int, ...], Vec, str]] = []
    seen = set()
    for sc in conns:
        key = class_of_conn[sc.index]
        if key not in seen:
            seen.add(key)
            items.append((key, gl.period(key), f"sc{sc.index}"))
    for cyl in cyls:
        key = _normalize_sign(gl.class_of_cylinder(cyl, conns))
        if key not in seen:
            seen.add(key)
            items.append((key, gl.period(key), f"cyl{cyl.index}"))
    witnesses = []
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            g1, z1, tag1 = items[i]
            g2, z2, tag2 = items[j]
            if not cross(z1, z2).is_zero():
                continue
            if _rank2(g1, g2):
                witnesses.append({
                    "classes": [list(g1), list(g2)],
                    "objects": [tag1, tag2],
                    "Z": [[z1[0].to_string(), z1[1].to_string()],
                          [z2[0].to_string(), z2[1].to_string()]],
                })
    return (not witnesses), witnesses


def _rank2(g1: Sequence[int], g2: Sequence[int]) -> bool:
    for i in range(len(g1)):
        for j in range(i + 1, len(g1)):
            if g1[i] * g2[j] - g1[j] * g2[i] != 0:
                return True
    return False


def count_classes(surface: FlatSurface, lmax2: QD) -> List[CountRecord]:
    return analyze_surface(surface, lmax2).records


def omega(record: CountRecord, generic: bool = True) -> LaurentQ:
    """Refined DT invariant of the class:
    N_pp + 2 N_pm + 4 N_mm + (q^{1/2} + q^{-1/2}) N_c."""
    if not generic:
        raise NotGeneric("surface failed the genericity check")
    return record.omega()


def omega_num(record: CountRecord, generic: bool = True) -> Fraction:
    if not generic:
        raise NotGeneric("surface failed the genericity check")
    return record.omega_num()


# ---------------------------------------------------------------------------
# Quiver oracles
# ---------------------------------------------------------------------------

QUIVERS = ("point", "loop", "loop-x3", "twoloop-x3y3", "twovertex")


@dataclass(frozen=True)
class QuiverSpec:
    name: str
    nilpotent: bool = False

    def __post_init__(self):
        if self.name not in QUIVERS:
            raise UnsupportedQuiver(f"unknown quiver {self.name!r}")
        if self.nilpotent and self.name not in ("loop", "twoloop-x3y3",
                                                "twovertex"):
            raise UnsupportedQuiver(
                f"no nilpotent variant for {self.name!r}")


def quiver_series(spec: QuiverSpec, order: int) -> TruncSeries:
    """Closed-form counting series of the five reference quivers with
    potential (optionally the nilpotent variant)."""
    t = LaurentQ.monomial
    e = dilog_E(order)
    # full variant: E(-q^{1/2} x)^{-1} factors; nilpotent: E(-q^{-1/2} x)^{-1}
    twist = 1 if not spec.nilpotent else -1
    if spec.name == "point":
        return e
    if spec.name == "loop":
        return dilog_E_scaled(order, t(twist, -1)).inverse()
    if spec.name == "loop-x3":
        return e * e
    inv2 = dilog_E_scaled(order, t(twist, -1), 2).inverse()
    if spec.name == "twoloop-x3y3":
        return (e ** 4) * inv2
    if spec.name == "twovertex":
        return (e ** 2) * inv2
    raise UnsupportedQuiver(spec.name)


def loop_x3_series_via_flags(order: int) -> TruncSeries:
    """Independent form of the one-loop x^3 series:
    sum_n B_n q^{n^2/2} / chi_gl(n) x^n with B_n = sum_k [n k]_q."""
    coeffs = {}
    for n in range(order + 1):
        bn = bell_like_B(n)
        coeffs[(n,)] = RationalQ(bn * LaurentQ.monomial(n * n), {}) \
            * _inv_chi_gl(n)
    return TruncSeries(1, (order,), coeffs)


def dt_of_quivers(order: int = 6) -> Dict[str, DTSpectrum]:
    """DT spectra of all reference quivers (and nilpotent variants) via
    dt_factorize; non-admissibility would raise."""
    out: Dict[str, DTSpectrum] = {}
    for name in QUIVERS:
        out[name] = dt_factorize(quiver_series(QuiverSpec(name), order))
        try:
            spec_n = QuiverSpec(name, nilpotent=True)
        except UnsupportedQuiver:
            continue
        out[name + "-nilpotent"] = dt_factorize(
            quiver_series(spec_n, order))
    return out


def finite_field_stack_count(quiver: str, n: int, p: int) -> Fraction:
    """#representations over F_p divided by |GL_n(F_p)|, both by direct
    enumeration (point: one representation; loop: all n x n matrices)."""
    if quiver not in ("point", "loop"):
        raise UnsupportedQuiver(quiver)
    if n > 3 or p not in (2, 3):
        raise DTError("bounds: n <= 3 and p in {2, 3}")
    gl = gl_order_brute(n, p)
    if quiver == "point":
        return Fraction(1, gl)
    import itertools

    count = 0
    for _ in itertools.product(range(p), repeat=n * n):
        count += 1
    return Fraction(count, gl)


# ---------------------------------------------------------------------------
# Wall crossing on surfaces
# ---------------------------------------------------------------------------


def _upper_half(z: Vec, gamma: Tuple[int, ...]
                ) -> Tuple[Vec, Tuple[int, ...]]:
    """Flip signs so the phase of Z lies in (0, pi] (the standard slicing
    half-plane: strictly upper, or the negative real axis)."""
    s = z[1].sign()
    if s < 0 or (s == 0 and z[0].sign() > 0):
        return ((-z[0], -z[1]), tuple(-g for g in gamma))
    return (z, gamma)


def _phase_sorted(records: Sequence[CountRecord], gamma: GammaLattice
                  ) -> List[Tuple[Vec, Tuple[int, ...], CountRecord]]:
    """Records with Z normalized to the upper half plane, sorted by
    increasing phase in (0, pi]."""
    items = []
    for r in records:
        z, g = _upper_half(r.z, r.gamma)
        if z[0].is_zero() and z[1].is_zero():
            raise DTError("zero period class")
        items.append((z, g, r))

    import functools

    def compare(a, b):
        za, zb = a[0], b[0]
        c = cross(za, zb).sign()
        if c:
            return -c  # zb counterclockwise after za => phase(a) < phase(b)
        return 0

    items.sort(key=functools.cmp_to_key(compare))
    return items


def ordered_surface_product(data: SurfaceData, order: int,
                            lattice: ChargeLattice,
                            weights: Sequence[int],
                            phase_descending: bool = True,
                            sector: Optional[Tuple[Vec, Vec]] = None
                            ) -> QTorusSeries:
    """Product of dilogarithm factors of all counted classes, ordered by
    phase (descending by default), optionally restricted to the closed
    sector between two directions."""
    items = _phase_sorted(data.records, data.gamma)
    if sector is not None:
        lo, hi = sector
        items = [it for it in items if _in_closed_sector(lo, hi, it[0])]
    if phase_descending:
        items = list(reversed(items))
    factors = []
    for z, g, r in items:
        om = r.omega()
        if not om.is_zero():
            factors.append((g, om))
    return spectrum_product(lattice, weights, order, factors)


def _in_closed_sector(lo: Vec, hi: Vec, z: Vec) -> bool:
    if cross(lo, z).is_zero() and dot(lo, z).sign() > 0:
        return True
    if cross(z, hi).is_zero() and dot(hi, z).sign() > 0:
        return True
    return cross(lo, z).sign() > 0 and cross(z, hi).sign() > 0


def _in_open_sector(lo: Vec, hi: Vec, z: Vec) -> bool:
    return cross(lo, z).sign() > 0 and cross(z, hi).sign() > 0


def _sector_records(data: SurfaceData, sector
                    ) -> List[Tuple[Vec, Tuple[int, ...], CountRecord]]:
    items = _phase_sorted(data.records, data.gamma)
    if sector is None:
        return items
    lo, hi = sector
    return [it for it in items if _in_open_sector(lo, hi, it[0])]


def sector_genericity(data: SurfaceData, sector
                      ) -> Tuple[bool, List[dict], List[dict]]:
    """Inside the sector: no two independent classes with aligned periods
    and nonzero pairing.

    Aligned independent pairs with zero pairing are tolerated: their
    dilogarithm factors commute, so the phase-ordered product remains
    well-defined; they are reported as commuting alignments."""
    items = _sector_records(data, sector)
    witnesses = []
    commuting = []
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            z1, g1, _ = items[i]
            z2, g2, _ = items[j]
            if cross(z1, z2).is_zero() and _rank2(g1, g2):
                entry = {"classes": [list(g1), list(g2)],
                         "pairing": data.gamma.pair(g1, g2)}
                if entry["pairing"] == 0:
                    commuting.append(entry)
                else:
                    witnesses.append(entry)
    return (not witnesses), witnesses, commuting


def surface_wallcross_experiment(surface_a: FlatSurface,
                                 surface_b: FlatSurface,
                                 lmax2: QD, order: int,
                                 sector: Optional[Tuple[Vec, Vec]] = None,
                                 weights: Optional[Sequence[int]] = None
                                 ) -> dict:
    """Compare phase-ordered quantum-torus products of two deformations of
    one combinatorial surface across a wall.

    Classes are matched through the shared combinatorial Gamma basis.
    With ``sector`` given (an open counterclockwise cone of directions),
    only the classes with periods in the sector enter the products and the
    genericity requirement is checked within the sector; without it the
    whole upper half plane is used and full genericity is required."""
    data_a = analyze_surface(surface_a, lmax2)
    data_b = analyze_surface(surface_b, lmax2)
    commuting_report = {}
    for name, data in (("A", data_a), ("B", data_b)):
        if sector is None:
            if not data.generic:
                raise NotGeneric(
                    f"side {name} is not generic: {data.witnesses[:3]}")
        else:
            ok, wit, commuting = sector_genericity(data, sector)
            commuting_report[name] = commuting
            if not ok:
                raise NotGeneric(
                    f"side {name} is not generic in the sector: {wit[:3]}")
    if data_a.gamma.rank != data_b.gamma.rank:
        raise ClassMatchFailure("Gamma ranks differ")
    if data_a.gamma.pairing_matrix() != data_b.gamma.pairing_matrix():
        raise ClassMatchFailure(
            "pairing matrices differ; triangulations do not match")
    items_a = _sector_records(data_a, sector)
    items_b = _sector_records(data_b, sector)
    rays_a = {g for _, g, r in items_a if not r.omega().is_zero()}
    rays_b = {g for _, g, r in items_b if not r.omega().is_zero()}
    lattice = ChargeLattice(data_a.gamma.pairing_matrix())
    if weights is None:
        weights = _find_positive_functional(lattice, sorted(rays_a | rays_b))
    for g in sorted(rays_a | rays_b):
        w = sum(a * b for a, b in zip(weights, g))
        if w <= 0:
            raise ClassMatchFailure(f"weights not positive on class {g}")
        if w > order:
            continue  # the factor is dropped by the truncation anyway
        for name, data in (("A", data_a), ("B", data_b)):
            z = data.gamma.period(g)
            # a class counted on one side only must be within reach on
            # the other side too, so a zero count is honest
            if (norm2(z) - lmax2).sign() > 0:
                raise ClassMatchFailure(
                    f"class {g} has |Z| beyond Lmax on side {name}; "
                    "increase lmax")
            # when 2*gamma is within the truncation order a cylinder in
            # that class would contribute: its circumference 2|Z| must be
            # within the enumeration bound as well
            if 2 * w <= order and \
                    (norm2(z) * QD(4, 0, z[0].d) - lmax2).sign() > 0:
                raise ClassMatchFailure(
                    f"class {g}: possible cylinder at 2*gamma beyond "
                    f"Lmax on side {name}; increase lmax or weights")
    prod_a = _sector_product(items_a, order, lattice, weights)
    prod_b = _sector_product(items_b, order, lattice, weights)
    equal = prod_a == prod_b
    return {
        "equal": equal,
        "order": order,
        "classes": [list(g) for g in sorted(rays_a)],
        "order_a": [list(g) for _, g, r in items_a
                    if not r.omega().is_zero()],
        "order_b": [list(g) for _, g, r in items_b
                    if not r.omega().is_zero()],
        "omegas_a": {str(list(g)): r.omega().to_string()
                     for _, g, r in items_a if not r.omega().is_zero()},
        "omegas_b": {str(list(g)): r.omega().to_string()
                     for _, g, r in items_b if not r.omega().is_zero()},
        "commuting_alignments": commuting_report,
    }


def _sector_product(items, order, lattice, weights) -> QTorusSeries:
    factors = []
    for z, g, r in reversed(items):  # decreasing phase
        om = r.omega()
        if not om.is_zero():
            factors.append((g, om))
    return spectrum_product(lattice, weights, order, factors)


# ---------------------------------------------------------------------------
# JSON report
# ---------------------------------------------------------------------------


def dt_report(data: SurfaceData) -> dict:
    classes = []
    for r in data.records:
        classes.append({
            "gamma": list(r.gamma),
            "Z": [r.z[0].to_string(), r.z[1].to_string()],
            "N": {"pp": r.n_pp, "pm": r.n_pm, "mm": r.n_mm, "c": r.n_c,
                  "loops": r.n_loop},
            "omega": r.omega().to_string(),
            "omega_num": str(r.omega_num()),
        })
    return {
        "generic": data.generic,
        "witnesses": data.witnesses,
        "rank": data.gamma.rank,
        "classes": classes,
    }
