"""Shared handlers behind the HTTP endpoints and the CLI subcommands.

Every handler takes plain JSON-compatible data and returns (exit_code,
report): 0 on success, 1 when a verified mathematical identity fails, 2 on
malformed input.  Reports are JSON-compatible dicts with deterministic
ordering.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence, Tuple

from ..ainfty import AInftyCategory, ArcObject
from ..averify import verify_relations
from ..dt import (
    ClassMatchFailure,
    NotGeneric,
    analyze_surface,
    dt_of_quivers,
    dt_report,
    loop_x3_series_via_flags,
    quiver_series,
    QuiverSpec,
    surface_wallcross_experiment,
)
from ..ext import ext_basis, euler_form, tau_and_pairing
from ..qseries import (
    LaurentQ,
    chi_gl,
    count_subspace_pairs,
    dilog_E,
    dilog_E_scaled,
    q_exp_and_pochhammer,
    qbinom,
    sym_as_dilog_product,
    sym_series,
    two_subspace_rhs,
    verify_w33dt,
    bell_like_B,
    w33_lhs,
    w33_rhs,
)
from ..quadfield import QD, cross, parallel
from ..surfaces import ArcSystemError, build_arc_system, solve_grading
from ..flatgeo.surface import FlatSurfaceError, build_surface
from ..flatgeo.enumerate import enumerate_saddle_connections, find_cylinders


class InputError(ValueError):
    pass


def _fail(items) -> int:
    return 1 if any(not it["pass"] for it in items) else 0


def run_identities(order: int, _mutate_bn: bool = False) -> Tuple[int, dict]:
    """The appendix identity suite: flag identities, Sym/product agreement,
    the squared-flag-count identity, and the subspace-pair counts."""
    if order < 0:
        raise InputError("order must be >= 0")
    items = []

    def check(name, ok):
        items.append({"name": name, "pass": bool(ok)})

    # Gaussian binomial vs GL Serre polynomials, n <= 8
    ok = True
    for n in range(9):
        for k in range(n + 1):
            lhs = LaurentQ.q_power(k * (n - k)) * chi_gl(k) * \
                chi_gl(n - k) * qbinom(n, k)
            if lhs != chi_gl(n):
                ok = False
    check("qbinom_gl_identity_n_le_8", ok)

    # both closed forms of the dilogarithm coefficients, n <= 8
    from ..qseries import RationalQ, _inv_chi_gl

    e = dilog_E(8)
    ok = all(e.coeff(n) ==
             RationalQ(LaurentQ.monomial(n * n), {}) * _inv_chi_gl(n)
             for n in range(9))
    check("dilog_two_closed_forms", ok)

    # exp_q and Pochhammer expressed through the dilogarithm
    if order >= 1:
        exp_q, poch = q_exp_and_pochhammer(max(order, 1))
        check("exp_q_is_twisted_dilog",
              exp_q == dilog_E_scaled(max(order, 1),
                                      LaurentQ.monomial(1)
                                      - LaurentQ.monomial(-1)))
        check("pochhammer_is_inverse_dilog",
              poch == dilog_E_scaled(max(order, 1),
                                     LaurentQ.monomial(-1, -1)).inverse())

    # Sym agrees with the dilogarithm product form
    if order >= 1:
        f = [LaurentQ.one(), LaurentQ.monomial(1, 2), LaurentQ.zero(),
             LaurentQ.monomial(-1)]
        check("sym_matches_dilog_product",
              sym_series(f, order) == sym_as_dilog_product(f, order))

    # squared flag counts
    if _mutate_bn:
        lhs = w33_lhs(max(order, 1))
        from ..qseries import TruncSeries, RationalQ as RQ, _inv_chi_gl as ic

        bad = {}
        for n in range(max(order, 1) + 1):
            bn = bell_like_B(n) + (LaurentQ.one() if n == 1
                                   else LaurentQ.zero())
            bad[(n,)] = RQ(bn * bn * LaurentQ.monomial(n * n), {}) * ic(n)
        lhs = TruncSeries(1, (max(order, 1),), bad)
        check("squared_flag_count_series", lhs == w33_rhs(max(order, 1)))
    else:
        check("squared_flag_count_series", verify_w33dt(order))

    # subspace pairs over small finite fields
    ok = True
    for n in range(5):
        for p in (2, 3):
            pairs = count_subspace_pairs(n, p)
            a_n = sum((qbinom(n, k).specialize_q(p) for k in range(n + 1)),
                      Fraction(0))
            if pairs != a_n * a_n or \
                    pairs != two_subspace_rhs(n).specialize_q(p):
                ok = False
    check("subspace_pair_counts_F2_F3", ok)

    report = {"order": order, "checks": items,
              "ok": all(it["pass"] for it in items)}
    return _fail(items), report


def run_quiver_dt(order: int = 6) -> Tuple[int, dict]:
    if order < 2:
        raise InputError("order must be >= 2")
    table = dt_of_quivers(order)
    flags_ok = quiver_series(QuiverSpec("loop-x3"), order) == \
        loop_x3_series_via_flags(order)
    expected = {
        "point": {"1": "1"},
        "loop": {"1": "q^{1/2}"},
        "loop-nilpotent": {"1": "q^{-1/2}"},
        "loop-x3": {"1": "2"},
        "twoloop-x3y3": {"1": "4", "2": "q^{1/2}"},
        "twoloop-x3y3-nilpotent": {"1": "4", "2": "q^{-1/2}"},
        "twovertex": {"1": "2", "2": "q^{1/2}"},
        "twovertex-nilpotent": {"1": "2", "2": "q^{-1/2}"},
    }
    got = {}
    for name, spec in sorted(table.items()):
        got[name] = {str(g[0]): spec.omega(g).to_string()
                     for g in spec.classes()}
    ok = got == expected and flags_ok
    return (0 if ok else 1), {"order": order, "table": got,
                              "expected": expected,
                              "flag_series_cross_check": flags_ok,
                              "ok": ok}


def run_ainfty_verify(arc_spec: dict, max_n: int = 6, eta_cap: int = 3,
                      max_len: int = 12, threads: int = 1
                      ) -> Tuple[int, dict]:
    try:
        arcs = build_arc_system(arc_spec)
        grading = solve_grading(arcs)
    except ArcSystemError as exc:
        raise InputError(str(exc)) from exc
    report = verify_relations(arcs, grading, max_n=max_n, eta_cap=eta_cap,
                              max_len=max_len, threads=threads)
    report["ok"] = not report["failures"]
    return (0 if report["ok"] else 1), report


def run_ext(arc_spec: dict, arc_x: int, arc_y: int) -> Tuple[int, dict]:
    try:
        arcs = build_arc_system(arc_spec)
        grading = solve_grading(arcs)
        if not (0 <= arc_x < arcs.n_arcs and 0 <= arc_y < arcs.n_arcs):
            raise InputError("arc index out of range")
    except ArcSystemError as exc:
        raise InputError(str(exc)) from exc
    cat = AInftyCategory(arcs, grading, eta_cap=3, max_n=7, max_k=3)
    x, y = ArcObject(arc_x), ArcObject(arc_y)
    table = ext_basis(cat, x, y)
    dims = table.dims_by_degree()
    pairing = tau_and_pairing(cat, x, y)
    report = {
        "arc_x": arc_x,
        "arc_y": arc_y,
        "dims_by_degree": {str(k): v for k, v in sorted(dims.items())},
        "dims": list(table.dims_tuple()) if all(
            0 <= d <= 3 for d in dims) else None,
        "euler_form": euler_form(cat, x, y),
        "pairing_perfect": pairing["perfect"],
        "pairing_matrix": pairing["matrix"],
        "hochschild_ok": pairing["hochschild_commutator_ok"]
        and pairing["hochschild_disk_ok"],
    }
    ok = pairing["perfect"] and report["hochschild_ok"]
    report["ok"] = ok
    return (0 if ok else 1), report


def _parse_lmax(lmax: Optional[str], lmax2: Optional[str], d: int) -> QD:
    if lmax2 is not None:
        return QD(Fraction(str(lmax2)), 0, d)
    if lmax is None:
        raise InputError("need lmax or lmax2")
    val = Fraction(str(lmax))
    return QD(val * val, 0, d)


def _surface(spec: dict):
    try:
        return build_surface(spec)
    except FlatSurfaceError as exc:
        raise InputError(str(exc)) from exc


def run_sc_enum(surface_spec: dict, lmax: Optional[str] = None,
                lmax2: Optional[str] = None,
                direction: Optional[str] = None) -> Tuple[int, dict]:
    surface = _surface(surface_spec)
    bound = _parse_lmax(lmax, lmax2, surface.d)
    conns = enumerate_saddle_connections(surface, bound)
    dir_vec = None
    if direction is not None:
        if direction in ("inf", "vertical"):
            dir_vec = (QD(0, 0, surface.d), QD(1, 0, surface.d))
        else:
            dir_vec = (QD(1, 0, surface.d),
                       QD(Fraction(str(direction)), 0, surface.d))
    out = []
    for sc in conns:
        if dir_vec is not None and not parallel(sc.holonomy, dir_vec):
            continue
        out.append({
            "endpoints": [sc.v_start, sc.v_end],
            "type": sc.type_tag(surface),
            "holonomy": [sc.holonomy[0].to_string(),
                         sc.holonomy[1].to_string()],
            "length2": sc.length2.to_string(),
        })
    cyls = find_cylinders(surface, conns, bound)
    cyl_out = [{
        "circumference2": c.circumference2.to_string(),
        "height2": c.height2.to_string(),
        "boundary_types": list(c.boundary_types),
    } for c in cyls]
    return 0, {"count": len(out), "connections": out,
               "cylinders": cyl_out, "ok": True}


def run_dt(surface_spec: dict, lmax: Optional[str] = None,
           lmax2: Optional[str] = None) -> Tuple[int, dict]:
    surface = _surface(surface_spec)
    bound = _parse_lmax(lmax, lmax2, surface.d)
    data = analyze_surface(surface, bound)
    report = dt_report(data)
    report["ok"] = True
    return 0, report


def run_wallcross(surface_a: dict, surface_b: dict,
                  lmax: Optional[str] = None, lmax2: Optional[str] = None,
                  order: int = 6, sector: Optional[list] = None,
                  weights: Optional[Sequence[int]] = None
                  ) -> Tuple[int, dict]:
    sa = _surface(surface_a)
    sb = _surface(surface_b)
    bound = _parse_lmax(lmax, lmax2, sa.d)
    sec = None
    if sector is not None:
        (l0, l1), (h0, h1) = sector
        sec = ((QD(Fraction(str(l0[0])), Fraction(str(l0[1])), sa.d),
                QD(Fraction(str(l1[0])), Fraction(str(l1[1])), sa.d)),
               (QD(Fraction(str(h0[0])), Fraction(str(h0[1])), sa.d),
                QD(Fraction(str(h1[0])), Fraction(str(h1[1])), sa.d)))
    try:
        report = surface_wallcross_experiment(
            sa, sb, bound, order, sector=sec,
            weights=tuple(weights) if weights else None)
    except (NotGeneric, ClassMatchFailure) as exc:
        raise InputError(str(exc)) from exc
    report["ok"] = report["equal"]
    return (0 if report["equal"] else 1), report
