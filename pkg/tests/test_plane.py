"""Tests for the plane tracer: refraction geometry, crossing dichotomy,
counter bookkeeping, corner stops, and the CSV export."""

import io
import math

import pytest
from hypothesis import given, settings, strategies as st

from windtree.geom import Vec2, rectangle_corners
from windtree.plane import (
    NotAdmissible,
    SameSide,
    StartInsideObstacle,
    SystemParams,
    admissible,
    classify_crossing,
    export_trajectory_csv,
    trace_plane,
)

UP = math.pi / 2
DOWN = 3 * math.pi / 2


def square_params(spacing=6.0, a=1.0, b=0.5, theta=math.atan(1 / 3)):
    return SystemParams(Vec2(spacing, 0), Vec2(0, spacing), a, b, theta)


def generic_params():
    return SystemParams(
        Vec2(3.0 + math.sqrt(2) / 10, 0.3),
        Vec2(-0.4, 2.8 + math.sqrt(3) / 10),
        1.1, 0.7, 0.61,
    )


class TestClassify:
    def test_opposite_sides_translate(self):
        assert classify_crossing(0, 2) == "Translation"
        assert classify_crossing(2, 0) == "Translation"
        assert classify_crossing(1, 3) == "Translation"
        assert classify_crossing(3, 1) == "Translation"

    def test_adjacent_sides_reverse(self):
        for entry, exit_ in [(0, 1), (0, 3), (1, 0), (1, 2), (2, 1), (2, 3), (3, 0), (3, 2)]:
            assert classify_crossing(entry, exit_) == "Reversal"

    def test_same_side_raises(self):
        with pytest.raises(SameSide):
            classify_crossing(2, 2)

    def test_bad_ids(self):
        with pytest.raises(ValueError):
            classify_crossing(0, 4)


class TestAdmissible:
    def test_sparse_square_lattice(self):
        assert admissible(square_params())

    def test_overlapping(self):
        # spacing smaller than the rectangle diameter in every direction
        p = SystemParams(Vec2(0.5, 0), Vec2(0, 0.5), 1.0, 0.5, 0.4)
        assert not admissible(p)

    def test_touching_along_side_direction(self):
        # neighbors offset exactly a along the long-side direction touch
        th = 0.5
        u = Vec2(math.cos(th), math.sin(th))
        perp = Vec2(-math.sin(th), math.cos(th))
        touching = SystemParams(u.scaled(1.0), perp.scaled(8.0), 1.0, 0.5, th)
        assert not admissible(touching)
        separated = SystemParams(u.scaled(1.01), perp.scaled(8.0), 1.0, 0.5, th)
        assert admissible(separated)
        overlapping = SystemParams(u.scaled(0.95), perp.scaled(8.0), 1.0, 0.5, th)
        assert not admissible(overlapping)

    def test_trace_rejects_inadmissible(self):
        p = SystemParams(Vec2(0.5, 0), Vec2(0, 0.5), 1.0, 0.5, 0.4)
        with pytest.raises(NotAdmissible):
            trace_plane(p, Vec2(0.3, 0.3), True, 10)


class TestRefractionGeometry:
    def test_chord_direction_through_bottom_edge(self):
        # tan(theta) = 1/3 makes the transmitted chord (-0.6, 0.8) exactly
        p = square_params()
        rec = trace_plane(p, Vec2(0.05, -2.0), True, 2)
        enter = rec.events[0]
        assert enter.kind == "Enter"
        assert enter.obstacle_index == (0, 0)
        want = math.atan2(0.8, -0.6) % (2 * math.pi)
        assert abs(enter.dir_after - want) < 1e-12

    def test_event_sequence_and_dichotomy(self):
        p = square_params()
        rec = trace_plane(p, Vec2(0.05, -2.0), True, 4)
        kinds = [e.kind for e in rec.events]
        assert kinds == ["Enter", "Exit", "Enter", "Exit"]
        # first crossing leaves through the opposite side: direction kept
        assert rec.events[1].dir_after == UP
        # second crossing is through adjacent sides: direction negated
        assert rec.events[3].dir_after == DOWN
        assert rec.events[2].obstacle_index == (0, 1)

    def test_exit_directions_exactly_vertical(self):
        rec = trace_plane(generic_params(), Vec2(1.51, 0.05), True, 400)
        for ev in rec.events:
            if ev.kind == "Exit":
                assert ev.dir_after in (UP, DOWN)

    def test_enter_directions_are_the_four_chords(self):
        p = generic_params()
        two = 2 * p.theta
        allowed = {
            round((math.pi / 2 + two) % (2 * math.pi), 12),
            round((two - math.pi / 2) % (2 * math.pi), 12),
            round((two + math.pi / 2 + math.pi) % (2 * math.pi), 12),
            round((two - math.pi / 2 + math.pi) % (2 * math.pi), 12),
        }
        rec = trace_plane(p, Vec2(1.51, 0.05), True, 400)
        seen = {round(e.dir_after, 12) for e in rec.events if e.kind == "Enter"}
        assert seen <= allowed
        assert len(seen) >= 2

    def test_events_alternate_and_share_obstacle(self):
        rec = trace_plane(generic_params(), Vec2(1.51, 0.05), True, 200)
        evs = rec.events
        for k in range(0, len(evs) - 1, 2):
            assert evs[k].kind == "Enter"
            assert evs[k + 1].kind == "Exit"
            assert evs[k].obstacle_index == evs[k + 1].obstacle_index
            assert evs[k + 1].arclength > evs[k].arclength


class TestCounters:
    def test_free_vertical_ray_counts_e1_walls(self):
        # mid-gap column of a sparse square lattice: pure vertical flight
        p = square_params()
        rec = trace_plane(p, Vec2(3.0, -2.0), True, 1,
                          max_free_crossings=100, record_walls=True)
        assert rec.stop_reason == "free_flight_cap"
        n1, n2 = rec.final_counts
        assert n1 == 0
        assert n2 == 101
        arcs = rec.wall_arcs
        assert abs(arcs[0] - 2.0) < 1e-9
        for i in range(1, 5):
            assert abs(arcs[i] - arcs[i - 1] - 6.0) < 1e-9

    def test_downward_ray_counts_negative(self):
        p = square_params()
        rec = trace_plane(p, Vec2(3.0, -2.0), False, 1, max_free_crossings=50)
        assert rec.final_counts[0] == 0
        assert rec.final_counts[1] == -51

    def test_displacement_reconstruction_bounded(self):
        p = generic_params()
        rec = trace_plane(p, Vec2(1.51, 0.05), True, 5000)
        n1, n2 = rec.final_counts
        disp = rec.final_position - rec.start
        resid = disp - p.e1.scaled(n1) - p.e2.scaled(n2)
        bound = p.e1.norm() + p.e2.norm() + math.hypot(p.a, p.b)
        assert resid.norm() < bound

    def test_checkpoint_counts_reconstruct_positions(self):
        p = generic_params()
        rec = trace_plane(p, Vec2(1.51, 0.05), True, 3000, checkpoint_stride=25.0)
        assert len(rec.checkpoints) > 50
        bound = p.e1.norm() + p.e2.norm() + math.hypot(p.a, p.b)
        for (s, pos), (n1, n2) in zip(rec.checkpoints, rec.checkpoint_counts):
            resid = (pos - rec.start) - p.e1.scaled(n1) - p.e2.scaled(n2)
            assert resid.norm() < bound

    def test_wall_series_unit_steps_and_monotone_arcs(self):
        rec = trace_plane(generic_params(), Vec2(1.51, 0.05), True, 2000)
        arcs = rec.wall_arcs
        assert all(arcs[i] <= arcs[i + 1] for i in range(len(arcs) - 1))
        prev = (0, 0)
        for i in range(len(rec.wall_n1)):
            cur = (rec.wall_n1[i], rec.wall_n2[i])
            d = sorted((abs(cur[0] - prev[0]), abs(cur[1] - prev[1])))
            assert d == [0, 1]
            prev = cur

    def test_obstacle_index_in_original_basis(self):
        # e1=(6,0), e2=(6,6) spans the same lattice as the square one; the
        # obstacle above the first is at -e1 + e2
        p = SystemParams(Vec2(6, 0), Vec2(6, 6), 1.0, 0.5, math.atan(1 / 3))
        rec = trace_plane(p, Vec2(0.05, -2.0), True, 4)
        assert rec.events[0].obstacle_index == (0, 0)
        assert rec.events[2].obstacle_index == (-1, 1)


class TestCornerStop:
    def test_ray_aimed_at_lowest_corner(self):
        p = square_params()
        c0 = rectangle_corners(p.a, p.b, p.theta, Vec2(0, 0))[0]
        rec = trace_plane(p, Vec2(c0.x, -3.0), True, 50)
        assert rec.stop_reason == "corner"
        assert rec.corner_hits == 1
        assert rec.events[-1].kind == "CornerStop"
        assert abs(rec.final_arclength - (c0.y + 3.0)) < 1e-9
        assert (rec.events[-1].point - c0).norm() < 1e-8

    def test_near_corner_pass_does_not_stop(self):
        p = square_params()
        tol_corner = 1e-9 * max(p.a, p.b)
        c0 = rectangle_corners(p.a, p.b, p.theta, Vec2(0, 0))[0]
        rec = trace_plane(p, Vec2(c0.x + 20 * tol_corner, -3.0), True, 2)
        kinds = [e.kind for e in rec.events]
        assert kinds == ["Enter", "Exit"]
        # entering the sliver near the lowest corner leaves through the
        # adjacent side, so the direction flips
        assert rec.events[1].dir_after == DOWN

    def test_start_inside_rejected(self):
        p = square_params()
        with pytest.raises(StartInsideObstacle):
            trace_plane(p, Vec2(0.0, 0.0), True, 10)

    def test_start_on_boundary_rejected(self):
        p = square_params()
        s, c = math.sin(p.theta), math.cos(p.theta)
        lx, ly = 0.0, -0.5 * p.b  # midpoint of the bottom edge, local frame
        edge_mid = Vec2(lx * c - ly * s, lx * s + ly * c)
        with pytest.raises(StartInsideObstacle):
            trace_plane(p, edge_mid, True, 10)


class TestDeterminismAndExport:
    def test_bitwise_determinism(self):
        p = generic_params()
        r1 = trace_plane(p, Vec2(1.51, 0.05), True, 2000, checkpoint_stride=10.0)
        r2 = trace_plane(p, Vec2(1.51, 0.05), True, 2000, checkpoint_stride=10.0)
        assert r1.final_position == r2.final_position
        assert r1.final_arclength == r2.final_arclength
        assert r1.final_counts == r2.final_counts
        assert all(
            a.point == b.point and a.arclength == b.arclength and a.kind == b.kind
            for a, b in zip(r1.events, r2.events)
        )

    def test_compensated_matches_plain(self):
        p = generic_params()
        r1 = trace_plane(p, Vec2(1.51, 0.05), True, 2000)
        r2 = trace_plane(p, Vec2(1.51, 0.05), True, 2000, compensated=True)
        assert abs(r1.final_arclength - r2.final_arclength) < 1e-9 * r1.final_arclength
        assert r1.final_counts == r2.final_counts

    def test_ordinal_marks(self):
        rec = trace_plane(generic_params(), Vec2(1.51, 0.05), True, 500)
        assert 100 in rec.ordinal_marks
        assert rec.ordinal_marks[100] > 0

    def test_csv_round_trip(self):
        p = generic_params()
        rec = trace_plane(p, Vec2(1.51, 0.05), True, 60)
        rec.seed = 42
        buf = io.StringIO()
        export_trajectory_csv(rec, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0].startswith("#")
        assert "seed=42" in lines[1]
        assert lines[2] == "arclength,x,y,event_kind,obstacle_i,obstacle_j"
        rows = [ln.split(",") for ln in lines[3:]]
        assert len(rows) == len(rec.events)
        for row, ev in zip(rows, rec.events):
            assert float(row[0]) == ev.arclength
            assert float(row[1]) == ev.point.x
            assert float(row[2]) == ev.point.y
            assert row[3] == ev.kind
            assert (int(row[4]), int(row[5])) == ev.obstacle_index

    def test_checkpoint_arclengths_are_on_stride(self):
        rec = trace_plane(generic_params(), Vec2(1.51, 0.05), True, 500,
                          checkpoint_stride=0.5)
        for i, (s, _) in enumerate(rec.checkpoints):
            assert s == 0.5 * i


@settings(max_examples=20, deadline=None)
@given(
    ex=st.floats(2.6, 3.4),
    ey=st.floats(-0.4, 0.4),
    fy=st.floats(2.6, 3.4),
    a=st.floats(0.7, 1.2),
    b=st.floats(0.4, 0.8),
    theta=st.floats(0.3, 1.2),
    sx=st.floats(1.3, 2.2),
    up=st.booleans(),
)
def test_trace_invariants_random(ex, ey, fy, a, b, theta, sx, up):
    p = SystemParams(Vec2(ex, ey), Vec2(0.31, fy), a, b, theta)
    if not admissible(p):
        return
    try:
        rec = trace_plane(p, Vec2(sx, 0.11), up, 300, checkpoint_stride=7.0,
                          max_free_crossings=5000)
    except StartInsideObstacle:
        return
    # exits exactly vertical, arclengths nondecreasing
    prev = 0.0
    for ev in rec.events:
        assert ev.arclength >= prev - 1e-12
        prev = ev.arclength
        if ev.kind == "Exit":
            assert ev.dir_after in (UP, DOWN)
    # counters reconstruct displacement up to a bounded remainder
    n1, n2 = rec.final_counts
    resid = (rec.final_position - rec.start) - p.e1.scaled(n1) - p.e2.scaled(n2)
    assert resid.norm() < p.e1.norm() + p.e2.norm() + math.hypot(a, b)
