"""The equivalent half-translation surface: a torus with one embedded slit.

Collapsing every rectangle of the plane model perpendicular to its long
diagonal direction turns the obstacle field into a flat torus with a single
slit whose two banks are re-glued in translation and rotation parts. The
vertical flow on this surface reproduces the plane trajectories outside the
obstacles, interaction by interaction, with matching crossing offsets and
direction parities.

Both banks of the slit are parametrized by arclength offset from the left
tip (the slit direction always has positive x component). Each bank splits
into two parts: a translation part glued to the opposite bank with the
direction preserved, and a rotation part glued to itself through its
midpoint with the direction negated. Which arrangement occurs (case 1 or 2)
depends on the sign of a*cos(theta) - b*sin(theta).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple

from .geom import (
    Tolerance,
    Vec2,
    WindtreeError,
    default_tolerance,
    lattice_reduce,
    rectangle_corners,
)
from .plane import TIE_EPS, SystemParams, TraceEvent, TrajectoryRecord, _next_wall


class DegenerateCase3(WindtreeError):
    """a*cos(theta) equals b*sin(theta): the slit parts degenerate."""


class SlitDoesNotEmbed(WindtreeError):
    """No translate of the slit lies inside the open fundamental domain."""


class SingularHit(WindtreeError):
    """The flow reached a singular point of the surface."""


class TbeyondTrace(WindtreeError):
    """Requested arclength exceeds the traced range."""


class DegenerateSlit(WindtreeError):
    """The slit is parallel to the flow direction or to the horizontal."""


@dataclass(frozen=True)
class HomologyVec:
    """Integer homology class of a closed-up trajectory segment in the
    torus basis: counts of signed crossings of the two wall families."""

    n1: int
    n2: int

    def __add__(self, other: "HomologyVec") -> "HomologyVec":
        return HomologyVec(self.n1 + other.n1, self.n2 + other.n2)

    def __sub__(self, other: "HomologyVec") -> "HomologyVec":
        return HomologyVec(self.n1 - other.n1, self.n2 - other.n2)

    def as_tuple(self) -> tuple[int, int]:
        return (self.n1, self.n2)


def intersection_form(u: HomologyVec, v: HomologyVec) -> int:
    """Algebraic intersection number of two homology classes expressed in
    the same basis."""
    return u.n1 * v.n2 - u.n2 * v.n1


def reconstruct_displacement(n: HomologyVec, params: SystemParams) -> Vec2:
    """Develop a homology class back into a plane displacement using the
    basis stored on the record's params."""
    return params.e1.scaled(n.n1) + params.e2.scaled(n.n2)


@dataclass(frozen=True)
class SlitSpec:
    """Geometry of the slit for one parameter tuple, relative to the
    lattice point the collapsed rectangle was centered on.

    x is the length of each translation part, y the length of each rotation
    part, x + y = length. tip0 is the left endpoint (u_hat.x > 0 always).
    """

    case: int
    eta: float
    length: float
    x: float
    y: float
    tip0: Vec2
    tip1: Vec2
    u_hat: Vec2


def build_slit(params: SystemParams, tol: Tolerance | None = None) -> SlitSpec:
    """Construct the slit spec from the parameter tuple.

    The slit joins the two silhouette corners of the rectangle (the corners
    extremal in x). Its direction makes angle eta = theta + atan(a/b) with
    the vertical, its length is the rectangle diagonal, and the translation
    and rotation part lengths follow the two cases of the sign of
    a*cos(theta) - b*sin(theta). The exact balance point is rejected."""
    tol = tol or default_tolerance(params.a, params.b)
    a, b, th = params.a, params.b, params.theta
    ll = math.hypot(a, b)
    ct, st = math.cos(th), math.sin(th)
    gap = a * ct - b * st
    if abs(gap) < tol.eps_geom * ll:
        raise DegenerateCase3(
            "a*cos(theta) = b*sin(theta); slit parts are not well defined"
        )
    eta = th + math.atan2(a, b)
    sin_eta = (a * ct + b * st) / ll
    if gap > 0.0:
        case = 1
        x = gap / sin_eta
        y = 2.0 * b * st / sin_eta
    else:
        case = 2
        x = -gap / sin_eta
        y = 2.0 * a * ct / sin_eta
    corners = rectangle_corners(a, b, th, Vec2(0.0, 0.0))
    tip0, tip1 = corners[3], corners[1]
    u_hat = Vec2((tip1.x - tip0.x) / ll, (tip1.y - tip0.y) / ll)
    return SlitSpec(case, eta, ll, x, y, tip0, tip1, u_hat)


class TransitionResult(NamedTuple):
    offset: float
    side: str
    dir_phi: float
    kind: str


def _rows(spec: SlitSpec) -> list[tuple]:
    """Gluing table: (side, lo, hi, kind, new_side, c, sg) meaning an
    arrival at offset s on `side` with lo < s < hi leaves at c + sg*s on
    `new_side`; kind 'rotation' negates the direction."""
    x, y, ll = spec.x, spec.y, spec.length
    if spec.case == 1:
        return [
            ("above", 0.0, x, "translation", "below", y, 1),
            ("above", x, ll, "rotation", "above", x + ll, -1),
            ("below", 0.0, y, "rotation", "below", y, -1),
            ("below", y, ll, "translation", "above", -y, 1),
        ]
    return [
        ("above", 0.0, y, "rotation", "above", y, -1),
        ("above", y, ll, "translation", "below", -y, 1),
        ("below", 0.0, x, "translation", "above", y, 1),
        ("below", x, ll, "rotation", "below", x + ll, -1),
    ]


def _singular_offsets(spec: SlitSpec) -> dict[str, list[float]]:
    """Per-bank offsets of singular points: part boundaries and rotation
    midpoints (the collapsed images of the other two rectangle corners)."""
    out = {"above": {0.0, spec.length}, "below": {0.0, spec.length}}
    for side, lo, hi, kind, _, _, _ in _rows(spec):
        out[side].add(lo)
        out[side].add(hi)
        if kind == "rotation":
            out[side].add(0.5 * (lo + hi))
    return {side: sorted(vals) for side, vals in out.items()}


class _DSU:
    def __init__(self):
        self.parent = {}

    def find(self, k):
        self.parent.setdefault(k, k)
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _census(spec: SlitSpec) -> list[dict]:
    """Cluster the marked points under the gluing maps and total the cone
    angles: a tip carries a 2 pi neighborhood, an interior bank point a half
    disk of pi. The result for every admissible tuple is two points of
    angle 3 pi and two of angle pi."""

    def key(side: str, s: float):
        if abs(s) < 1e-12 * spec.length:
            return ("tip", 0)
        if abs(s - spec.length) < 1e-12 * spec.length:
            return ("tip", 1)
        return (side, round(s / spec.length, 12))

    dsu = _DSU()
    angles = {("tip", 0): 2.0, ("tip", 1): 2.0}  # units of pi
    labels = {("tip", 0): "tip0", ("tip", 1): "tip1"}
    rows = _rows(spec)
    for side, lo, hi, kind, new_side, c, sg in rows:
        for s in (lo, hi):
            k = key(side, s)
            if k[0] != "tip":
                angles.setdefault(k, 1.0)
                labels.setdefault(k, f"{side}@{s:.6g}")
            img = key(new_side, c + sg * s)
            if img[0] != "tip":
                angles.setdefault(img, 1.0)
                labels.setdefault(img, f"{new_side}@{c + sg * s:.6g}")
            dsu.union(k, img)
        if kind == "rotation":
            mid = 0.5 * (lo + hi)
            k = key(side, mid)
            angles.setdefault(k, 1.0)
            labels.setdefault(k, f"{side}@{mid:.6g}")
            dsu.union(k, k)
    clusters: dict = {}
    for k in angles:
        clusters.setdefault(dsu.find(k), []).append(k)
    out = []
    for members in clusters.values():
        total = sum(angles[m] for m in members)
        out.append({
            "angle_over_pi": int(round(total)),
            "members": sorted(labels[m] for m in members),
        })
    out.sort(key=lambda d: (-d["angle_over_pi"], d["members"]))
    return out


def _germs(spec: SlitSpec) -> list[tuple[str, float, bool]]:
    """The vertical separatrix germs: (side, offset, going_up). Tips carry
    one up and one down germ each; every interior marked point carries one,
    pointing into its half disk. The count equals the angle census total
    over pi."""
    out = [
        ("tip", 0.0, True),
        ("tip", 0.0, False),
        ("tip", spec.length, True),
        ("tip", spec.length, False),
    ]
    seen = set()
    for side, lo, hi, kind, _, _, _ in _rows(spec):
        pts = [lo, hi]
        if kind == "rotation":
            pts.append(0.5 * (lo + hi))
        for s in pts:
            if s <= 1e-12 * spec.length or s >= spec.length * (1 - 1e-12):
                continue
            k = (side, round(s / spec.length, 12))
            if k in seen:
                continue
            seen.add(k)
            out.append((side, s, side == "above"))
    return out


@dataclass
class SlitTorus:
    """The quotient torus with the embedded slit and its coordinate data.

    u1, u2: reduced, oriented torus basis (det > 0, both upper half plane,
    u1 of smaller argument). s_coords holds the eight side coordinates:
    (h1, v1), (h2, v2) the basis components, (h3, v3) the translation part
    extents and (h4, v4) the rotation part extents. The chart origin is
    chosen so the slit sits centered inside one chart cell; anchor0/anchor1
    are the slit tips in chart coordinates. slit is None for a bare torus."""

    u1: Vec2
    u2: Vec2
    params: SystemParams | None
    slit: SlitSpec | None
    anchor0: Vec2 | None
    anchor1: Vec2 | None
    s_coords: dict
    case: int
    family: str
    census: list
    epsilon: float
    in_o_epsilon: bool
    tol: Tolerance
    chart_origin: Vec2 = Vec2(0.0, 0.0)

    def germs(self) -> list[tuple[str, float, bool]]:
        return _germs(self.slit) if self.slit else []

    def germ_point(self, side: str, offset: float) -> Vec2:
        a0 = self.anchor0
        u = self.slit.u_hat
        return Vec2(a0.x + offset * u.x, a0.y + offset * u.y)

    def singular_offsets(self) -> dict[str, list[float]]:
        return _singular_offsets(self.slit) if self.slit else {"above": [], "below": []}

    def wrap(self, p: Vec2) -> Vec2:
        """Translate a point by lattice vectors into the chart cell."""
        det = self.u1.cross(self.u2)
        q = p - self.chart_origin
        al = (q.x * self.u2.y - q.y * self.u2.x) / det
        be = (self.u1.x * q.y - self.u1.y * q.x) / det
        al -= math.floor(al)
        be -= math.floor(be)
        return Vec2(al * self.u1.x + be * self.u2.x, al * self.u1.y + be * self.u2.y)


def _oriented_reduced(e1: Vec2, e2: Vec2, eps: float) -> tuple[Vec2, Vec2]:
    f1, f2, _ = lattice_reduce(e1, e2, eps)
    vs = []
    for f in (f1, f2):
        if f.y < 0.0 or (f.y == 0.0 and f.x < 0.0):
            f = -f
        vs.append(f)
    vs.sort(key=lambda v: math.atan2(v.y, v.x))
    u1, u2 = vs
    return u1, u2


def build_torus(
    params: SystemParams,
    epsilon: float = 0.0,
    tol: Tolerance | None = None,
) -> SlitTorus:
    """Build the quotient torus with the embedded slit.

    Reduces and orients the lattice basis, computes the eight side
    coordinates, picks a chart origin that centers the slit inside one
    chart cell (the slit embeds iff its extent in each lattice coordinate
    is below one cell), classifies the family by the sign of the slit's
    vertical component, and records membership in the parameter region
    O_epsilon."""
    tol = tol or default_tolerance(params.a, params.b)
    spec = build_slit(params, tol)
    u1, u2 = _oriented_reduced(params.e1, params.e2, tol.eps_geom)
    u = spec.u_hat
    if abs(u.y) < tol.eps_geom:
        raise DegenerateSlit("slit is horizontal; side coordinates degenerate")
    if abs(u.x) < tol.eps_geom:
        raise DegenerateSlit("slit is vertical; parallel to the flow")
    family = "S1" if u.y < 0.0 else "S2"
    s_coords = {
        "h1": u1.x, "v1": u1.y,
        "h2": u2.x, "v2": u2.y,
        "h3": spec.x * abs(u.x), "v3": spec.x * abs(u.y),
        "h4": spec.y * abs(u.x), "v4": spec.y * abs(u.y),
    }
    h1, v1, h2, v2 = s_coords["h1"], s_coords["v1"], s_coords["h2"], s_coords["v2"]
    h3, v3, h4, v4 = s_coords["h3"], s_coords["v3"], s_coords["h4"], s_coords["v4"]
    a1 = math.atan2(v1, h1)
    a2 = math.atan2(v2, h2)
    in_o = (
        0.0 < a1 < math.pi / 2 < a2 < math.pi
        and h3 + h4 < h1 - h2
        and v3 + v4 < v2 - v1
        and max(v3, v4) + epsilon < min(v1, v2)
    )
    det = u1.cross(u2)

    def coords(p: Vec2) -> tuple[float, float]:
        return (
            (p.x * u2.y - p.y * u2.x) / det,
            (u1.x * p.y - u1.y * p.x) / det,
        )

    a0, b0 = coords(spec.tip0)
    a1, b1 = coords(spec.tip1)
    ext_a = abs(a1 - a0)
    ext_b = abs(b1 - b0)
    margin = 1e-9
    if ext_a >= 1.0 - 2 * margin or ext_b >= 1.0 - 2 * margin:
        raise SlitDoesNotEmbed(
            f"slit spans {ext_a:.3g} x {ext_b:.3g} lattice cells; it cannot "
            "be placed inside one chart cell"
        )
    ca = min(a0, a1) - 0.5 * (1.0 - ext_a)
    cb = min(b0, b1) - 0.5 * (1.0 - ext_b)
    origin = u1.scaled(ca) + u2.scaled(cb)
    anchor0 = spec.tip0 - origin
    anchor1 = spec.tip1 - origin
    return SlitTorus(
        u1=u1, u2=u2, params=params, slit=spec,
        anchor0=anchor0, anchor1=anchor1, s_coords=s_coords,
        case=spec.case, family=family, census=_census(spec),
        epsilon=epsilon, in_o_epsilon=in_o, tol=tol, chart_origin=origin,
    )


def bare_torus(e1: Vec2, e2: Vec2, tol: Tolerance | None = None) -> SlitTorus:
    """A slitless torus; the vertical flow on it is linear. Used as an
    exactly solvable reference surface."""
    tol = tol or Tolerance()
    u1, u2 = _oriented_reduced(e1, e2, tol.eps_geom)
    s_coords = {
        "h1": u1.x, "v1": u1.y, "h2": u2.x, "v2": u2.y,
        "h3": 0.0, "v3": 0.0, "h4": 0.0, "v4": 0.0,
    }
    return SlitTorus(
        u1=u1, u2=u2, params=None, slit=None, anchor0=None, anchor1=None,
        s_coords=s_coords, case=0, family="", census=[], epsilon=0.0,
        in_o_epsilon=False, tol=tol,
    )


def slit_transition(
    torus: SlitTorus, offset: float, side: str, dir_phi: float
) -> TransitionResult:
    """Map an arrival at (offset, side) through the slit gluing.

    Raises SingularHit when the offset is within the corner tolerance of a
    singular point of that bank. Rotation parts negate the direction."""
    spec = torus.slit
    eps = torus.tol.eps_corner
    for s_sing in _singular_offsets(spec)[side]:
        if abs(offset - s_sing) < eps:
            raise SingularHit(
                f"arrival at {side}@{offset:.12g} is singular"
            )
    for row_side, lo, hi, kind, new_side, c, sg in _rows(spec):
        if row_side == side and lo < offset < hi:
            new_offset = c + sg * offset
            new_phi = dir_phi if kind == "translation" else (dir_phi + math.pi) % (2 * math.pi)
            return TransitionResult(new_offset, new_side, new_phi, kind)
    raise SingularHit(f"arrival at {side}@{offset:.12g} is outside the slit")


_DECADE_MARKS = (100, 1000, 10_000, 100_000, 1_000_000, 10_000_000)

UP_PHI = math.pi / 2
DOWN_PHI = 3 * math.pi / 2


def trace_surface(
    torus: SlitTorus,
    start: Vec2,
    up: bool,
    max_events: int,
    checkpoint_stride: float | None = None,
    *,
    record_events: bool = True,
    record_walls: bool = True,
    transversal=None,
    max_i_crossings: int = 0,
    compensated: bool = False,
    max_free_crossings: int = 200_000,
    record_itinerary: bool = False,
) -> TrajectoryRecord:
    """Trace the vertical flow on the slit torus.

    Slit crossings apply the bank gluing and are recorded as SlitCross
    events; an arrival at a singular offset stops the trace with a
    CornerStop event (these correspond one to one with the plane tracer's
    corner stops). Positions in the record are fundamental-domain points;
    the crossing counters, kept in the torus basis stored on the record's
    params, recover the developed displacement. When `transversal` is given
    (an object with anchor, direction, length), every crossing of it is
    logged as (arclength, offset, vertical sign) in `i_crossings` without
    altering the flow; a positive `max_i_crossings` halts the trace at the
    n-th such crossing with the flow parked on the segment. With
    `record_itinerary` the counter pair is snapshotted at every slit
    crossing and at the stopping hit, giving the discrete word of the
    flight for replay at higher precision."""
    if max_events < 1:
        raise ValueError("max_events must be >= 1")
    u1, u2 = torus.u1, torus.u2
    u1x, u1y, u2x, u2y = u1.x, u1.y, u2.x, u2.y
    det = u1.cross(u2)
    tol = torus.tol
    eps_c = tol.eps_corner
    scale = max(u1.norm(), u2.norm())
    t_eps = tol.eps_geom * scale

    sx = start.x - torus.chart_origin.x
    sy = start.y - torus.chart_origin.y
    al = (sx * u2y - sy * u2x) / det
    be = (u1x * sy - u1y * sx) / det
    aq, bq = al - math.floor(al), be - math.floor(be)

    params = SystemParams(
        u1, u2,
        torus.params.a if torus.params else 1.0,
        torus.params.b if torus.params else 1.0,
        torus.params.theta if torus.params else 0.5,
    )
    sv = 1 if up else -1
    rec = TrajectoryRecord(
        params=params,
        start=Vec2(aq * u1x + bq * u2x, aq * u1y + bq * u2y),
        initial_dir=UP_PHI if up else DOWN_PHI,
        model="surface",
        reduced_basis=(u1, u2),
    )

    slit = torus.slit
    if slit is not None:
        ax_, ay_ = torus.anchor0.x, torus.anchor0.y
        ux_, uy_ = slit.u_hat.x, slit.u_hat.y
        slope = uy_ / ux_
        slit_len = slit.length
        sing = _singular_offsets(slit)
        rows = _rows(slit)
    tr = transversal
    if tr is not None:
        trx, try_ = tr.anchor.x, tr.anchor.y
        tdx, tdy = tr.direction.x, tr.direction.y
        tlen = tr.length

    n1 = 0
    n2 = 0
    arc = 0.0
    arc_c = 0.0
    events = 0
    mark_pos = 0
    free_crossings = 0
    cp_stride = checkpoint_stride if checkpoint_stride and checkpoint_stride > 0 else None
    next_cp = 0.0
    last_cross = -math.inf
    ga_up = -u2x / det
    gb_up = u1x / det

    def add_arc(d: float) -> None:
        nonlocal arc, arc_c
        if compensated:
            yv = d - arc_c
            t = arc + yv
            arc_c = (t - arc) - yv
            arc = t
        else:
            arc += d

    def emit_checkpoints(x0, y0, dy, seg_len, arc0):
        nonlocal next_cp
        if cp_stride is None or next_cp > arc0 + seg_len:
            return
        while next_cp <= arc0 + seg_len:
            t = next_cp - arc0
            if t < 0.0:
                t = 0.0
            rec.checkpoints.append((next_cp, Vec2(x0, y0 + dy * t)))
            rec.checkpoint_counts.append((n1, n2))
            rec.checkpoint_ordinals.append(events)
            next_cp += cp_stride

    def push_event(kind, px, py, dphi) -> None:
        nonlocal events, mark_pos
        events += 1
        if record_events:
            rec.events.append(TraceEvent(kind, (0, 0), Vec2(px, py), dphi, arc))
        if mark_pos < len(_DECADE_MARKS) and events == _DECADE_MARKS[mark_pos]:
            rec.ordinal_marks[events] = arc
            mark_pos += 1

    stop = ""
    while events < max_events:
        qx = aq * u1x + bq * u2x
        qy = aq * u1y + bq * u2y
        ga = ga_up * sv
        gb = gb_up * sv
        ta, sa, wa = _next_wall(aq, ga)
        tb, sb, wb = _next_wall(bq, gb)
        t_wall = ta if ta < tb else tb

        t_slit = math.inf
        if slit is not None and ax_ - eps_c <= qx <= ax_ + slit_len * ux_ + eps_c:
            ys = ay_ + (qx - ax_) * slope
            tt = (ys - qy) * sv
            if tt > t_eps:
                t_slit = tt
        t_adv = t_slit if t_slit < t_wall else t_wall

        if tr is not None and tdx != 0.0:
            xi = (qx - trx) / tdx
            if -1e-12 <= xi <= tlen + 1e-12:
                ti = (try_ + xi * tdy - qy) * sv
                # A crossing may land a hair after a chart wall hop, giving a
                # tiny (even slightly negative) segment-local time; gate on
                # accumulated flight instead, with a dedup guard for hits
                # caught exactly on the preceding wall.
                cross_at = arc + ti
                if -t_eps < ti <= t_adv and cross_at > t_eps and cross_at > last_cross + t_eps:
                    last_cross = cross_at
                    rec.i_crossings.append((cross_at, xi, sv))
                    if max_i_crossings and len(rec.i_crossings) >= max_i_crossings:
                        if record_itinerary:
                            rec.itinerary.append(("x", n1, n2))
                        emit_checkpoints(qx, qy, float(sv), ti, arc)
                        add_arc(ti)
                        aq = ((qx) * u2y - (qy + sv * ti) * u2x) / det
                        bq = (u1x * (qy + sv * ti) - u1y * (qx)) / det
                        stop = "transversal"
                        break

        if t_slit < t_wall:
            emit_checkpoints(qx, qy, float(sv), t_slit, arc)
            add_arc(t_slit)
            s_off = (qx - ax_) / ux_
            hit_x = ax_ + s_off * ux_
            hit_y = ay_ + s_off * uy_
            side = "above" if sv < 0 else "below"
            try:
                res = slit_transition(torus, s_off, side, UP_PHI if sv > 0 else DOWN_PHI)
            except SingularHit:
                push_event("CornerStop", hit_x, hit_y, UP_PHI if sv > 0 else DOWN_PHI)
                rec.singular_hits += 1
                aq, bq = (
                    (hit_x * u2y - hit_y * u2x) / det,
                    (u1x * hit_y - u1y * hit_x) / det,
                )
                stop = "singular"
                break
            sv = sv if res.kind == "translation" else -sv
            push_event("SlitCross", hit_x, hit_y, UP_PHI if sv > 0 else DOWN_PHI)
            rec.slit_crossings += 1
            if record_itinerary:
                rec.itinerary.append(("s", n1, n2))
            free_crossings = 0
            nx = ax_ + res.offset * ux_
            ny = ay_ + res.offset * uy_
            aq = (nx * u2y - ny * u2x) / det
            bq = (u1x * ny - u1y * nx) / det
            continue

        emit_checkpoints(qx, qy, float(sv), t_wall, arc)
        add_arc(t_wall)
        if abs(ta - tb) <= TIE_EPS * max(1.0, t_wall):
            # pass through a chart lattice point within float resolution:
            # both wall families cross together
            aq = wa - sa
            bq = wb - sb
            n1 += sa
            n2 += sb
        elif ta < tb:
            aq = wa - sa
            bq = bq + gb * ta
            n1 += sa
        else:
            bq = wb - sb
            aq = aq + ga * tb
            n2 += sb
        if record_walls:
            rec.wall_arcs.append(arc)
            rec.wall_n1.append(n1)
            rec.wall_n2.append(n2)
        free_crossings += 1
        if free_crossings > max_free_crossings:
            stop = "free_flight_cap"
            break
    else:
        stop = "max_events"

    rec.stop_reason = stop or "max_events"
    rec.final_position = Vec2(aq * u1x + bq * u2x, aq * u1y + bq * u2y)
    rec.final_counts = (n1, n2)
    rec.final_arclength = arc
    rec.event_count = events
    rec.crossings = HomologyVec(n1, n2)
    return rec


def gamma_T(rec: TrajectoryRecord, T: float) -> HomologyVec:
    """Homology class of the trajectory closed up at arclength T, read off
    the cumulative wall-crossing series."""
    if T > rec.final_arclength:
        raise TbeyondTrace(f"T={T} beyond traced arclength {rec.final_arclength}")
    if T <= 0.0 or len(rec.wall_arcs) == 0:
        return HomologyVec(0, 0)
    i = bisect_right(rec.wall_arcs, T) - 1
    if i < 0:
        return HomologyVec(0, 0)
    return HomologyVec(rec.wall_n1[i], rec.wall_n2[i])


def torus_to_json(torus: SlitTorus) -> dict:
    """Serializable summary: basis, side coordinates, case and family tags,
    singular point census, and O_epsilon membership."""
    d = {
        "u1": [torus.u1.x, torus.u1.y],
        "u2": [torus.u2.x, torus.u2.y],
        "s_coords": dict(sorted(torus.s_coords.items())),
        "case": torus.case,
        "family": torus.family,
        "census": torus.census,
        "epsilon": torus.epsilon,
        "in_o_epsilon": torus.in_o_epsilon,
    }
    if torus.slit is not None:
        d["slit"] = {
            "eta": torus.slit.eta,
            "length": torus.slit.length,
            "x": torus.slit.x,
            "y": torus.slit.y,
            "anchor0": [torus.anchor0.x, torus.anchor0.y],
            "anchor1": [torus.anchor1.x, torus.anchor1.y],
        }
    if torus.params is not None:
        p = torus.params
        d["params"] = {
            "e1": [p.e1.x, p.e1.y], "e2": [p.e2.x, p.e2.y],
            "a": p.a, "b": p.b, "theta": p.theta,
        }
    return d
