import json

import pytest

from flatcat.surfaces import (
    ArcSystemError,
    DanglingArcEndpoint,
    DecoratedSurface,
    EulerMismatch,
    Infeasible,
    NonPolygonFace,
    arc_system_to_spec,
    build_arc_system,
    c_loop,
    enumerate_boundary_paths,
    hexpillow_spec,
    pillowcase_spec,
    solve_grading,
    torus_spec,
)


def test_decorated_surface_invariants():
    DecoratedSurface(0, 0, 4)
    DecoratedSurface(1, 2, 2)
    with pytest.raises(ArcSystemError):
        DecoratedSurface(0, 1, 4)  # |M+|-|M-| wrong
    with pytest.raises(ArcSystemError):
        DecoratedSurface(0, 0, 3)  # genus 0 needs >= 4 poles
    with pytest.raises(ArcSystemError):
        DecoratedSurface(1, 1, 1)


def test_pillowcase_builds():
    arcs = build_arc_system(pillowcase_spec())
    assert arcs.surface.genus == 0
    assert len(arcs.circles) == 4
    assert all(len(c) == 2 for c in arcs.circles)
    assert all(c.sign == "-" for c in arcs.circles)


def test_two_gon_face_rejected():
    spec = pillowcase_spec()
    spec["faces"][0] = [[0, 0], [0, 1]]
    spec["faces"][1] = [[1, 0], [2, 0], [3, 0], [3, 1], [2, 1], [1, 1]]
    with pytest.raises(NonPolygonFace):
        build_arc_system(spec)


def test_euler_mismatch_detected():
    spec = pillowcase_spec()
    spec["genus"] = 1
    spec["poles"] = 2
    spec["zeros"] = 2
    with pytest.raises((EulerMismatch, ArcSystemError)):
        build_arc_system(spec)


def test_dangling_side_detected():
    spec = pillowcase_spec()
    spec["faces"][1][0] = [0, 0]  # side (0,0) now used twice
    with pytest.raises(DanglingArcEndpoint):
        build_arc_system(spec)


def test_grading_solution_pillowcase():
    arcs = build_arc_system(pillowcase_spec())
    g = solve_grading(arcs)
    for fi, face in enumerate(arcs.faces):
        assert sum(g.segment_degree[(fi, p)]
                   for p in range(len(face))) == len(face) - 2
    for c in arcs.circles:
        assert sum(g.segment_degree[s] for s in c.segments) == 1


def test_grading_solution_torus():
    arcs = build_arc_system(torus_spec())
    g = solve_grading(arcs)
    for c in arcs.circles:
        want = 3 if c.sign == "+" else 1
        assert sum(g.segment_degree[s] for s in c.segments) == want


def test_c_loops_bidegree():
    for spec in (pillowcase_spec(), hexpillow_spec(), torus_spec()):
        arcs = build_arc_system(spec)
        g = solve_grading(arcs)
        for arc in range(arcs.n_arcs):
            for end in ((arc, 0), (arc, 1)):
                c = c_loop(arcs, g, end)
                assert c.degree == 3
                assert c.parity == 1
                assert c.start_end == c.end_end == end


def test_path_bidegree_additivity():
    arcs = build_arc_system(torus_spec())
    g = solve_grading(arcs)
    paths = enumerate_boundary_paths(arcs, g, 6)
    count = 0
    for p in paths:
        for q in paths:
            pq = p.concat(q)
            if pq is None:
                continue
            assert pq.degree == p.degree + q.degree
            assert pq.parity == (p.parity + q.parity) % 2
            count += 1
    assert count > 100


def test_pillowcase_single_segment_paths():
    arcs = build_arc_system(pillowcase_spec())
    g = solve_grading(arcs)
    paths = enumerate_boundary_paths(arcs, g, 1)
    per_circle = {}
    for p in paths:
        per_circle[p.circle.index] = per_circle.get(p.circle.index, 0) + 1
    assert all(v == 2 for v in per_circle.values())


def test_regrade_shifts_path_degrees():
    arcs = build_arc_system(pillowcase_spec())
    g = solve_grading(arcs)
    g2 = g.regrade_arc(0, 1)
    paths = enumerate_boundary_paths(arcs, g, 4)
    for p in paths:
        from flatcat.surfaces import BoundaryPath

        p2 = BoundaryPath(arcs, g2, p.circle, p.start, p.length)
        delta = 0
        if p.source_arc == 0:
            delta += 1
        if p.target_arc == 0:
            delta -= 1
        assert p2.degree == p.degree + delta, (p, delta)


def test_json_roundtrip():
    spec = torus_spec()
    arcs = build_arc_system(spec)
    spec2 = arc_system_to_spec(arcs)
    arcs2 = build_arc_system(json.loads(json.dumps(spec2)))
    assert arcs2.faces == arcs.faces
    assert [c.sign for c in arcs2.circles] == [c.sign for c in arcs.circles]


def test_wrong_circle_declaration_rejected():
    spec = pillowcase_spec()
    spec["circles"][0]["segments"] = [[0, 0], [1, 0]]  # not a real circle
    with pytest.raises(ArcSystemError):
        build_arc_system(spec)
