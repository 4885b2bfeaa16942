"""Renormalization layer for the slit torus.

Builds a horizontal transversal out of a 3 pi cone point, computes the
first-return map of the vertical flow as an interval exchange with flips,
and runs fixed-ratio induction on it. Each induction step hands back a
2x2 integer matrix relating canonical homology generator pairs between
levels; the accumulated product drives the top-exponent estimate and the
contracted direction that predicts the trapping-strip angle.

Conventions. The return map is kept on a single copy of the segment: from
offset xi the flow is restarted upward, continued through the slit gluings
(rotation parts reverse the vertical direction), and stopped at the next
segment hit. That map is a bijection; a branch is flipped exactly when its
return path crosses rotation parts an odd number of times, equivalently
when the arrival is downward. Induced interval exchanges are rescaled to
unit length so that deep induction keeps relative precision; the physical
prefix length survives in `phys_length`.

Precision. Rescaling amplifies endpoint inconsistency by e^dt per level, so
any fixed-precision fuzz in the level-0 data reaches the combinatorics near
t = -log(fuzz); worse, a cut that the geometry binds to land exactly on a
segment endpoint or the side boundary sheds, when off by d, a spurious
sliver branch of width d that widens at the same rate. The level-0 exchange
is therefore built exactly rather than measured: the float tracer only
supplies each branch's discrete return word (the wall-crossing counters at
every slit event), the word is replayed at extended precision (mpmath)
against an exact lift of the chart geometry, which pins every branch
constant to ~40 digits, and the continuity cuts are solved from the
requirement that the branch images tile the section, a small full-rank
linear system certified at replay precision. The transversal trim point is
replayed the same way, so the segment end sits on its separatrix exactly.
Induction then runs its endpoint arithmetic at the same precision and
renormalizes the seed exactly for every level the worklist guards can
reach.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpf

from .geom import Vec2, WindtreeError
from .plane import SystemParams, _next_wall
from .slitsurface import (
    DegenerateSlit,
    HomologyVec,
    SlitTorus,
    trace_surface,
)

DEFAULT_RATIO = math.exp(-0.25)

# Working precision (decimal digits) for induction-chain endpoint
# arithmetic. 40 digits leaves ~1e-22 headroom at t = 40.
_CHAIN_DPS = 40


class SaddleConnectionSuspected(WindtreeError):
    pass


class NonReturningOrbit(WindtreeError):
    pass


class InductionBlowup(WindtreeError):
    pass


class InsufficientTime(WindtreeError):
    pass


class ZeroDirection(WindtreeError):
    pass


class _Sliver(Exception):
    # internal: induction produced an interval below float resolution,
    # retried with a nudged cut before surfacing as InductionBlowup
    pass


# ---------------------------------------------------------------------------
# small exact 2x2 integer matrix helpers

IDENTITY2 = ((1, 0), (0, 1))


def _det2(m) -> int:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def _matmul2(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def _adj2(m):
    return ((m[1][1], -m[0][1]), (-m[1][0], m[0][0]))


def _log_int(n: int) -> float:
    """log of a positive integer that may exceed float range."""
    if n <= 0:
        raise ValueError("need a positive integer")
    k = n.bit_length() - 53
    if k <= 0:
        return math.log(n)
    return math.log(n >> k) + k * math.log(2.0)


def _log_opnorm2(m) -> float:
    """log of the spectral norm of an integer 2x2 matrix, computed exactly
    from frob = sum of squares and det: sigma_max^2 = (frob + sqrt(frob^2 -
    4 det^2)) / 2."""
    a, b = m[0]
    c, d = m[1]
    frob = a * a + b * b + c * c + d * d
    if frob == 0:
        return float("-inf")
    det = a * d - b * c
    disc = frob * frob - 4 * det * det
    s = math.isqrt(disc) if disc > 0 else 0
    return 0.5 * (_log_int(frob + s) - math.log(2.0))


def _float2x2(m) -> np.ndarray:
    """Scale an integer matrix into float range, preserving direction data."""
    mx = max(abs(v) for row in m for v in row)
    if mx == 0:
        return np.zeros((2, 2))
    shift = max(0, mx.bit_length() - 500)
    return np.array([[float(v >> shift) if shift else float(v) for v in row] for row in m])


# ---------------------------------------------------------------------------
# transversal

@dataclass(frozen=True)
class TransversalSegment:
    """Horizontal segment out of a cone point, with the first hits of the
    vertical separatrices recorded as marked points (offsets in (0, length],
    sorted; the largest one is the trim point and equals length).

    length_exact, when set, is the trim point at extended precision. The
    exact level-0 rebuild needs the segment end on its separatrix to replay
    precision: an endpoint off by d seeds a spurious return branch of width
    d, which deep induction amplifies.

    germ_exact pairs each traced germ's direction flag with its first-hit
    offset at the same precision. Continuity cuts of the return map are
    first hits of separatrix prongs (downward prongs cut the upward side,
    upward prongs the downward side) or preimages of the section boundary,
    so these values let the return-map rebuild place every cut exactly."""

    anchor: Vec2
    direction: Vec2
    length: float
    base_singularity: str
    marked_points: tuple
    germ_hits: tuple = ()
    length_exact: object = None
    germ_exact: tuple = ()

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("transversal length must be positive")
        pts = list(self.marked_points)
        if pts != sorted(pts):
            raise ValueError("marked points must be sorted")
        for s in pts:
            if not (0.0 < s <= self.length * (1 + 1e-12)):
                raise ValueError("marked points must lie strictly inside (0, length]")


def _chart_start(torus: SlitTorus, p: Vec2) -> Vec2:
    # trace_surface subtracts chart_origin from its start argument
    return Vec2(p.x + torus.chart_origin.x, p.y + torus.chart_origin.y)


def _wall_distance_x(torus: SlitTorus, p: Vec2) -> float:
    """Distance from chart point p to the first cell wall going +x."""
    u1, u2 = torus.u1, torus.u2
    det = u1.cross(u2)
    al = (p.x * u2.y - p.y * u2.x) / det
    be = (u1.x * p.y - u1.y * p.x) / det
    ta, _, _ = _next_wall(al - math.floor(al), u2.y / det)
    tb, _, _ = _next_wall(be - math.floor(be), -u1.y / det)
    return min(ta, tb)


@dataclass(frozen=True)
class _ExactFrame:
    """Chart geometry lifted to extended precision: the lattice basis, the
    transversal anchor, and (on a slit torus) the slit anchor, direction,
    length, and gluing table, rebuilt at _CHAIN_DPS digits from the exact
    float inputs. The developed x-coordinate of a vertical flight is
    constant between slit events and moves affinely at each gluing, so a
    traced word replayed against this frame recovers return offsets and
    branch constants far below float noise."""

    u1x: object
    u1y: object
    u2x: object
    u2y: object
    det: object
    trx: object
    try_: object
    ax: object = None
    ay: object = None
    ux: object = None
    uy: object = None
    ll: object = None
    rows: tuple = ()


def _exact_frame(torus: SlitTorus, seg: TransversalSegment | None = None) -> _ExactFrame:
    """Build the replay frame; call inside mp.workdps(_CHAIN_DPS).

    With seg omitted, or anchored at the stored left slit tip, the
    transversal anchor is the exact tip; a segment placed elsewhere keeps
    its float anchor, which is exact as given."""
    if seg is not None and (seg.direction.x != 1.0 or seg.direction.y != 0.0):
        raise ValueError("exact replay requires the unit horizontal transversal")
    u1x, u1y = mpf(torus.u1.x), mpf(torus.u1.y)
    u2x, u2y = mpf(torus.u2.x), mpf(torus.u2.y)
    det = u1x * u2y - u1y * u2x
    if torus.slit is None:
        if seg is None:
            raise DegenerateSlit("a bare torus has no slit frame to anchor")
        return _ExactFrame(
            u1x, u1y, u2x, u2y, det, mpf(seg.anchor.x), mpf(seg.anchor.y)
        )
    par = torus.params
    a, b, th = mpf(par.a), mpf(par.b), mpf(par.theta)
    ll = mp.hypot(a, b)
    ct, st = mp.cos(th), mp.sin(th)
    gap = a * ct - b * st
    if (gap > 0) != (torus.slit.case == 1):
        raise DegenerateSlit("slit case is ambiguous at extended precision")
    sin_eta = (a * ct + b * st) / ll
    zero = mpf(0)
    if torus.slit.case == 1:
        x = gap / sin_eta
        y = 2 * b * st / sin_eta
        rows = (
            ("above", zero, x, "translation", y, 1),
            ("above", x, ll, "rotation", x + ll, -1),
            ("below", zero, y, "rotation", y, -1),
            ("below", y, ll, "translation", -y, 1),
        )
    else:
        x = -gap / sin_eta
        y = 2 * a * ct / sin_eta
        rows = (
            ("above", zero, y, "rotation", y, -1),
            ("above", y, ll, "translation", -y, 1),
            ("below", zero, x, "translation", y, 1),
            ("below", x, ll, "rotation", x + ll, -1),
        )
    ha, hb = a / 2, b / 2
    t0x, t0y = -(ha * ct + hb * st), hb * ct - ha * st
    t1x, t1y = ha * ct + hb * st, ha * st - hb * ct
    ux, uy = (t1x - t0x) / ll, (t1y - t0y) / ll
    ca0 = (t0x * u2y - t0y * u2x) / det
    cb0 = (u1x * t0y - u1y * t0x) / det
    ca1 = (t1x * u2y - t1y * u2x) / det
    cb1 = (u1x * t1y - u1y * t1x) / det
    ca = min(ca0, ca1) - (1 - abs(ca1 - ca0)) / 2
    cb = min(cb0, cb1) - (1 - abs(cb1 - cb0)) / 2
    ax = t0x - (ca * u1x + cb * u2x)
    ay = t0y - (ca * u1y + cb * u2y)
    if seg is None or (
        seg.anchor.x == torus.anchor0.x and seg.anchor.y == torus.anchor0.y
    ):
        trx, try_ = ax, ay
    else:
        trx, try_ = mpf(seg.anchor.x), mpf(seg.anchor.y)
    return _ExactFrame(u1x, u1y, u2x, u2y, det, trx, try_, ax, ay, ux, uy, ll, rows)


def _replay(frame: _ExactFrame, word, px, py, up: bool):
    """Replay a traced word from the chart start (px, py); call inside
    mp.workdps(_CHAIN_DPS). Returns (xi_hit, q, sv): the exact transversal
    arrival offset, the product of gluing slopes along the word (the branch
    slope of the return map in the start offset), and the final vertical
    sign. The counter snapshots pin the wrapped chart x at every event, so
    only x arithmetic is needed; y never enters."""
    al = (px * frame.u2y - py * frame.u2x) / frame.det
    be = (frame.u1x * py - frame.u1y * px) / frame.det
    x_dev = px - mp.floor(al) * frame.u1x - mp.floor(be) * frame.u2x
    q = 1
    sv = 1 if up else -1
    for kind, n1, n2 in word:
        qx = x_dev - n1 * frame.u1x - n2 * frame.u2x
        if kind == "x":
            return qx - frame.trx, q, sv
        s = (qx - frame.ax) / frame.ux
        side = "above" if sv < 0 else "below"
        guard = 1e-12 * frame.ll
        row = None
        for rside, lo, hi, rkind, c, sg in frame.rows:
            if rside == side and lo + guard < s < hi - guard:
                row = (rkind, c, sg)
                break
        if row is None:
            raise SaddleConnectionSuspected(
                "a replayed slit arrival sits on a gluing boundary"
            )
        rkind, c, sg = row
        if rkind == "rotation":
            sv = -sv
        x_dev = frame.ax + (c + sg * s) * frame.ux + n1 * frame.u1x + n2 * frame.u2x
        q = sg * q
    raise NonReturningOrbit("traced word carries no transversal hit")


def build_transversal(
    torus: SlitTorus,
    *,
    frac: float = 0.9,
    max_events: int = 50_000,
    max_free_crossings: int = 200_000,
) -> TransversalSegment:
    """Shoot the horizontal separatrix out of the left slit tip, then trim
    the provisional segment at the last first-hit of the vertical
    separatrices of all cone points.

    Raises SaddleConnectionSuspected when a separatrix runs into a cone
    point, or exhausts its search horizon, before it meets the segment."""
    if torus.slit is None:
        raise DegenerateSlit("a bare torus has no cone points to anchor a transversal")
    anchor = torus.anchor0
    d_wall = _wall_distance_x(torus, anchor)
    if not (d_wall > 0.0) or not math.isfinite(d_wall):
        raise SaddleConnectionSuspected("no room for a horizontal segment at the tip")
    l0 = frac * d_wall
    prov = TransversalSegment(anchor, Vec2(1.0, 0.0), l0, "tip0", ())

    hits = []
    with mp.workdps(_CHAIN_DPS):
        frame = _exact_frame(torus)
        offs = [mpf(0), frame.ll]
        for _, lo, hi, rkind, _, _ in frame.rows:
            offs.extend((lo, hi))
            if rkind == "rotation":
                offs.append((lo + hi) / 2)
        exact = []
        for side, offset, going_up in torus.germs():
            p = torus.germ_point(side, offset)
            rec = trace_surface(
                torus,
                _chart_start(torus, p),
                going_up,
                max_events,
                record_events=False,
                record_walls=False,
                transversal=prov,
                max_i_crossings=1,
                max_free_crossings=max_free_crossings,
                record_itinerary=True,
            )
            label = f"{side}@{offset:.6g}{'+' if going_up else '-'}"
            if not rec.i_crossings:
                if rec.stop_reason == "singular":
                    raise SaddleConnectionSuspected(
                        f"vertical separatrix {label} hits a cone point before the segment"
                    )
                raise SaddleConnectionSuspected(
                    f"vertical separatrix {label} found no segment hit within the horizon"
                )
            # replay the germ flight from the exact marked point so the
            # trim and marked offsets inherit replay precision
            off = min(offs, key=lambda v: abs(float(v) - offset))
            xh, _, _ = _replay(
                frame,
                rec.itinerary,
                frame.ax + off * frame.ux,
                frame.ay + off * frame.uy,
                going_up,
            )
            if abs(float(xh) - rec.i_crossings[0][1]) > 1e-7 * l0:
                raise SaddleConnectionSuspected(
                    f"replayed separatrix hit for {label} disagrees with the traced one"
                )
            hits.append((label, float(xh)))
            exact.append((going_up, xh))
        length_x = max(x for _, x in exact)

    length = float(length_x)
    if length < 1e-9 * l0:
        raise SaddleConnectionSuspected("separatrix hits collapse onto the tip")
    marked = []
    for x in sorted(x for _, x in hits):
        if x < 1e-9 * length:
            raise SaddleConnectionSuspected(
                "a vertical separatrix returns to the tip itself"
            )
        if not marked or x - marked[-1] > 1e-11 * length:
            marked.append(x)
    return TransversalSegment(
        anchor, Vec2(1.0, 0.0), length, "tip0", tuple(marked), tuple(hits),
        length_exact=length_x, germ_exact=tuple(exact),
    )


# ---------------------------------------------------------------------------
# first-return interval exchange

@dataclass(frozen=True)
class IETBranch:
    """One continuity branch of the return map: xi in [lo, hi) maps to
    c + eps*xi, carrying the loop homology and the vertical travel."""

    lo: float
    hi: float
    img_lo: float
    img_hi: float
    flip: bool
    homology: HomologyVec
    vlen: float
    eps: int
    c: float


@dataclass(frozen=True)
class IETWithFlips:
    """Interval exchange with flips on [0, total_length); branch domains
    and images both partition the interval. phys_length is the physical
    prefix of the original transversal this level lives on; gen_matrix
    holds the canonical unimodular generator pair drawn from the branch
    homologies (columns), used by the induction cocycle.

    When rotation gluings make some return paths arrive downward, a
    single-sided section cannot carry a bijective return map (an upward
    leaf and a downward leaf can land on the same point). two_sided marks
    the doubled parametrization: [0, half) is the segment traversed
    upward, [half, total_length) the same segment traversed downward, and
    a flip is exactly a change of traversal side (an odd number of
    rotation crossings). Slitless flows keep the single-sided form."""

    total_length: float
    phys_length: float
    branches: tuple
    gens: tuple | None
    gen_matrix: tuple | None
    covol: int
    two_sided: bool = False

    @property
    def half(self) -> float:
        """Domain length of one traversal side of the section."""
        return 0.5 * self.total_length if self.two_sided else self.total_length

    def map(self, xi: float) -> float:
        los = [b.lo for b in self.branches]
        k = bisect_right(los, xi) - 1
        if k < 0 or xi >= self.branches[k].hi:
            raise ValueError(f"offset {xi} outside the domain")
        b = self.branches[k]
        return float(b.c + b.eps * xi)

    def branch_index(self, xi: float) -> int:
        los = [b.lo for b in self.branches]
        k = bisect_right(los, xi) - 1
        if k < 0 or xi >= self.branches[k].hi:
            raise ValueError(f"offset {xi} outside the domain")
        return k

    def validate(self, rtol: float = 1e-10) -> None:
        """Check both partitions; raises InductionBlowup on failure."""
        tol = rtol * self.total_length
        bs = self.branches
        if not bs:
            raise InductionBlowup("empty interval exchange")
        if abs(bs[0].lo) > tol:
            raise InductionBlowup("domain does not start at 0")
        for a, b in zip(bs, bs[1:]):
            if abs(a.hi - b.lo) > tol:
                raise InductionBlowup("gap in the domain partition")
        if abs(bs[-1].hi - self.total_length) > tol:
            raise InductionBlowup("domain does not end at total_length")
        imgs = sorted((b.img_lo, b.img_hi) for b in bs)
        if abs(imgs[0][0]) > tol:
            raise InductionBlowup("image does not start at 0")
        for (_, h), (l2, _) in zip(imgs, imgs[1:]):
            if abs(h - l2) > tol:
                raise InductionBlowup("image intervals do not tile")
        if abs(imgs[-1][1] - self.total_length) > tol:
            raise InductionBlowup("image does not end at total_length")
        for b in bs:
            if not (b.vlen > 0.0):
                raise InductionBlowup("non-positive return vertical length")


def _generator_pair(homs):
    """Canonical unimodular pair among the branch homologies: the pair of
    (distinct, in branch order) classes with |det| equal to the covolume of
    their common span, preferring large classes. Returns (indices, matrix
    with the classes as columns, covol); (None, None, covol) if the span
    has rank < 2 or no branch pair realizes the covolume."""
    vecs = [(h.n1, h.n2) for h in homs]
    covol = 0
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            d = abs(vecs[i][0] * vecs[j][1] - vecs[i][1] * vecs[j][0])
            covol = math.gcd(covol, d)
    if covol == 0:
        return None, None, 0
    best = None
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            d = abs(vecs[i][0] * vecs[j][1] - vecs[i][1] * vecs[j][0])
            if d != covol:
                continue
            size = min(
                abs(vecs[i][0]) + abs(vecs[i][1]),
                abs(vecs[j][0]) + abs(vecs[j][1]),
            )
            if best is None or size > best[0]:
                best = (size, i, j)
    if best is None:
        return None, None, covol
    _, i, j = best
    g = ((vecs[i][0], vecs[j][0]), (vecs[i][1], vecs[j][1]))
    return (i, j), g, covol


def _make_iet(total_length, phys_length, branches, two_sided=False) -> IETWithFlips:
    gens, gmat, covol = _generator_pair([b.homology for b in branches])
    iet = IETWithFlips(
        total_length, phys_length, tuple(branches), gens, gmat, covol, two_sided
    )
    iet.validate()
    return iet


@dataclass(frozen=True)
class _Probe:
    dn: tuple
    eps: int
    c: float
    vlen: float
    xi_arr: float
    sv: int
    xi_in: float
    word: tuple


def _probe(torus, seg, xi, max_events, up=True):
    start = Vec2(seg.anchor.x + xi * seg.direction.x, seg.anchor.y + xi * seg.direction.y)
    rec = trace_surface(
        torus,
        _chart_start(torus, start),
        up,
        max_events,
        record_events=False,
        record_walls=False,
        transversal=seg,
        max_i_crossings=1,
        record_itinerary=True,
    )
    if rec.i_crossings:
        _, xi2, sv = rec.i_crossings[0]
        # slope of the return in segment offset: +1 when the arrival keeps
        # the probing direction (even rotation crossings), -1 otherwise
        eps = sv if up else -sv
        return _Probe(
            rec.final_counts, eps, xi2 - eps * xi, rec.final_arclength, xi2, sv,
            xi, tuple(rec.itinerary),
        )
    if rec.stop_reason == "singular":
        return None
    raise NonReturningOrbit(
        f"orbit from offset {xi:.6g} never returned ({rec.stop_reason})"
    )


def _same_branch(r1: _Probe, r2: _Probe, length: float) -> bool:
    # the words are deliberately not compared: crossing a removable
    # singular leaf changes the word but not the affine return
    return (
        r1.dn == r2.dn
        and r1.eps == r2.eps
        and abs(r1.c - r2.c) <= 1e-9 * length
        and abs(r1.vlen - r2.vlen) <= 1e-6 * (1.0 + max(r1.vlen, r2.vlen))
    )


class _TilingMismatch(Exception):
    # internal: the exact replay and the measured scan disagree; `entry`
    # localizes a suspected missed cut, None means only globally visible
    def __init__(self, entry=None):
        super().__init__()
        self.entry = entry


def _exact_branches(frame, entries, sides, length, H, two_sided, germ_exact=()):
    """Assemble the exact level-0 exchange from the scanned entries; call
    inside mp.workdps(_CHAIN_DPS).

    Each entry's return word is replayed against the frame, which gives its
    branch constant at replay precision. A continuity cut of the return map
    is either the first hit of a separatrix prong (a downward prong cuts
    the upward side, an upward prong the downward side) or the preimage of
    a section boundary under an adjacent branch, so each bisected cut is
    matched against those exact candidates and replaced by the matched
    value. The image tiling is not solved for the cuts (on a doubled
    section time-reversal symmetry leaves it rank-deficient); it serves as
    certification instead: replay must agree with the measured slope, side
    and constant; every cut must match a unique candidate; the exact images
    must tile the section to replay precision inside their arrival sides.
    The exchange is finally rescaled so the stored section length is
    exactly the float one. Raises _TilingMismatch (localized to an entry
    when possible) for disagreements a resample may fix,
    SaddleConnectionSuspected for structural ones. Returns (branches in
    entry order, per-side cut lists as floats)."""
    total = (2.0 if two_sided else 1.0) * length

    consts = []
    o_arrs = []
    for i, (side, lo, hi, r) in enumerate(entries):
        xi_hit, q, sv_fin = _replay(
            frame, r.word, frame.trx + mpf(r.xi_in), frame.try_, side == 0
        )
        if q != r.eps or sv_fin != r.sv:
            raise _TilingMismatch(i)
        cx = xi_hit - q * mpf(r.xi_in)
        if abs(float(cx) - r.c) > 1e-7 * total:
            raise _TilingMismatch(i)
        # constant in doubled coordinates: the arrival side offsets the
        # image, the domain side enters through the slope
        o_arr = mpf(0) if sv_fin > 0 else (H if two_sided else mpf(0))
        consts.append(o_arr + cx - q * H * side)
        o_arrs.append(o_arr)

    nb = {s: 0 for s in sides}
    k_of = []
    for side, _, _, _ in entries:
        k_of.append(nb[side])
        nb[side] += 1

    bnds = [mpf(0), H, 2 * H] if two_sided else [mpf(0), H]
    same_tol = mpf("1e-30") * H
    solved = {}
    for s in sides:
        cuts = [mpf(0)]
        for k in range(1, nb[s]):
            v = next(
                lo for i, (sd, lo, _, _) in enumerate(entries)
                if sd == s and k_of[i] == k
            )
            cands = [x for up, x in germ_exact if up == (s == 1)]
            for i, (sd, _, _, r) in enumerate(entries):
                if sd == s and k_of[i] in (k - 1, k):
                    for bnd in bnds:
                        cands.append(r.eps * (bnd - consts[i]) - H * s)
            found = [x for x in cands if abs(float(x) - v) <= 1e-7 * length]
            if not found:
                raise _TilingMismatch(None)
            for x in found[1:]:
                if abs(x - found[0]) > same_tol:
                    raise SaddleConnectionSuspected(
                        "two distinct singular structures sit within "
                        "measurement resolution of one continuity cut"
                    )
            cuts.append(found[0])
        cuts.append(H)
        solved[s] = cuts
        for b1, b2 in zip(cuts, cuts[1:]):
            if not (b2 - b1 > 0):
                raise SaddleConnectionSuspected(
                    "a resolved branch width is not positive"
                )

    # certification: the exact images must tile the section exactly,
    # each inside its arrival side
    res_tol = mpf("1e-28") * H
    items = []
    for i, (side, lo, hi, r) in enumerate(entries):
        lo_x = H * side + solved[side][k_of[i]]
        hi_x = H * side + solved[side][k_of[i] + 1]
        if r.eps > 0:
            img = (consts[i] + lo_x, consts[i] + hi_x)
        else:
            img = (consts[i] - hi_x, consts[i] - lo_x)
        if img[0] < o_arrs[i] - res_tol or img[1] > o_arrs[i] + H + res_tol:
            raise _TilingMismatch(i)
        items.append(img)
    order = sorted(range(len(entries)), key=lambda i: float(items[i][0]))
    pos = mpf(0)
    for i in order:
        if abs(items[i][0] - pos) > res_tol:
            raise _TilingMismatch(None)
        pos = items[i][1]
    if abs(pos - (2 * H if two_sided else H)) > res_tol:
        raise _TilingMismatch(None)

    # rescale so the stored level-0 section length is exactly the float
    # one; induction then folds sides and places cuts with exact floats
    scale = mpf(length) / H
    sb = {
        s: [mpf(0)] + [v * scale for v in solved[s][1:-1]] + [mpf(length)]
        for s in sides
    }
    widths, los_d, his_d = [], [], []
    for i, (side, lo, hi, r) in enumerate(entries):
        k = k_of[i]
        los_d.append(mpf(length) * side + sb[side][k])
        his_d.append(mpf(length) * side + sb[side][k + 1])
        widths.append(sb[side][k + 1] - sb[side][k])
    branches = [None] * len(entries)
    pos = mpf(0)
    for i in order:
        r = entries[i][3]
        img_lo = pos
        pos = pos + widths[i]
        c = img_lo - los_d[i] if r.eps > 0 else img_lo + his_d[i]
        branches[i] = IETBranch(
            los_d[i], his_d[i], img_lo, pos, r.eps < 0,
            HomologyVec(*r.dn), r.vlen, r.eps, c,
        )
    return branches, {s: [float(v) for v in sb[s]] for s in sides}


def first_return_iet(
    torus: SlitTorus,
    seg: TransversalSegment,
    *,
    grid: int = 64,
    max_events: int = 40_000,
    _retry: bool = True,
) -> IETWithFlips:
    """Compute the first-return map of the vertical flow to the transversal.

    The float scan only locates the structure: probes find the branches and
    bisect their cuts. The exchange itself is then rebuilt exactly, far
    below float noise: each branch's traced return word is replayed at
    extended precision against a lifted chart frame, which pins its
    constant, and the cuts are solved from the requirement that the branch
    images tile the section (see _exact_branches). When some return path
    arrives moving downward the section is doubled (see
    IETWithFlips.two_sided); otherwise the single-sided form is kept. Every
    certified cut must sit on a marked point or map to one (or to an
    endpoint), else the configuration is flagged as a suspected saddle
    connection."""
    length = seg.length

    pts = set((i + 0.5) * length / grid for i in range(grid))
    rail = [0.0] + list(seg.marked_points)
    if rail[-1] < length:
        rail.append(length)
    for a, b in zip(rail, rail[1:]):
        if b - a > 2e-9 * length:
            pts.add(0.5 * (a + b))
    for m in seg.marked_points:
        if m > 4e-9 * length:
            pts.add(m - 2e-9 * length)
        if m < length * (1 - 4e-9):
            pts.add(m + 2e-9 * length)
    xs = sorted(pts)

    results = {}
    woff = 1.7e-9 * length

    def probe_at(side, x):
        key = (side, x)
        if key not in results:
            results[key] = _probe(torus, seg, x, max_events, up=(side == 0))
        return results[key]

    def probe_off_leaf(side, x):
        # The flat-angle germs at the slit tips shed singular leaves the
        # return map is actually continuous across; step off such a leaf
        # sideways. A branch boundary leaf shows up as disagreeing sides.
        r = probe_at(side, x)
        if r is not None:
            return x, r, None
        for cand in (x + woff, x - woff):
            if 0.0 < cand < length:
                rc = probe_at(side, cand)
                if rc is not None:
                    other = x - woff if cand > x else x + woff
                    ro = probe_at(side, other) if 0.0 < other < length else None
                    if ro is not None and not _same_branch(rc, ro, length):
                        return None, rc, (cand, other)
                    return cand, rc, None
        raise SaddleConnectionSuspected(
            f"probes at {x:.6g} sit on a singular leaf"
        )

    def bisect_pair(side, x1, r1, x2):
        # bisect to float exhaustion: branch endpoints must be consistent
        # with the measured translation constants at ulp scale, or later
        # inductions fracture inside the leftover fuzz
        lo, hi = x1, x2
        while True:
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            rm = probe_at(side, mid)
            if rm is None:
                lo = hi = mid
                break
            if _same_branch(r1, rm, length):
                lo = mid
            else:
                hi = mid
        return hi

    def scan_side(side):
        out = []
        for x in xs:
            x_, r, split = probe_off_leaf(side, x)
            if split is not None:
                out.append((split[0], probe_at(side, split[0])))
                out.append((split[1], probe_at(side, split[1])))
            else:
                out.append((x_, r))
        return out

    # Side 0 is the segment traversed upward. Any downward arrival means
    # the section must be doubled with its downward traversal (side 1),
    # else upward and downward leaves land on the same offsets and the
    # measured images overlap.
    samples = {0: scan_side(0)}
    two_sided = any(r.sv < 0 for _, r in samples[0])
    sides = (0, 1) if two_sided else (0,)
    if two_sided:
        samples[1] = scan_side(1)
    total = 2.0 * length if two_sided else length

    with mp.workdps(_CHAIN_DPS):
        frame = _exact_frame(torus, seg)
        h_exact = seg.length_exact if seg.length_exact is not None else mpf(length)

    # Certify cuts, then representatives, refining where a representative
    # lands on a leaf whose two sides disagree (a cut the scan stepped
    # over, such as a narrow long-return branch between two coarse grid
    # points). Each refinement adds samples inside the offending interval.
    for _round in range(8):
        entries = []
        refined = False
        for side in sides:
            samples[side].sort(key=lambda sr: sr[0])
            cuts = []
            for (x1, r1), (x2, r2) in zip(samples[side], samples[side][1:]):
                if _same_branch(r1, r2, length):
                    continue
                cuts.append(bisect_pair(side, x1, r1, x2))
            bounds = [0.0] + cuts + [length]
            for lo, hi in zip(bounds, bounds[1:]):
                if hi - lo < 4.0 * woff:
                    # too narrow to probe beside its own boundary leaves
                    mid = 0.5 * (lo + hi)
                    r = probe_at(side, mid)
                    if r is None:
                        raise SaddleConnectionSuspected(
                            f"branch at {mid:.6g} is narrower than the "
                            "corner resolution"
                        )
                    entries.append((side, lo, hi, r))
                    continue
                x_, r, split = probe_off_leaf(side, 0.5 * (lo + hi))
                if split is not None:
                    samples[side].append((split[0], probe_at(side, split[0])))
                    samples[side].append((split[1], probe_at(side, split[1])))
                    refined = True
                    break
                entries.append((side, lo, hi, r))
            if refined:
                break
        if refined:
            continue

        # Exact assembly: replay each entry's return word against the
        # lifted frame, resolve each cut to the separatrix hit or boundary
        # preimage it measures, and certify with the image tiling. This
        # keeps all measurement noise out of the exchange, which the
        # induction chain would amplify by e^t. A certification mismatch
        # usually means a cut was missed inside some interval, so the
        # suspected intervals are resampled and the scan rerun.
        try:
            with mp.workdps(_CHAIN_DPS):
                branches, solved_bounds = _exact_branches(
                    frame, entries, sides, length, h_exact, two_sided,
                    seg.germ_exact,
                )
            break
        except _TilingMismatch as tm:
            targets = (
                [tm.entry] if tm.entry is not None else range(len(entries))
            )
            wide = [
                i for i in targets
                if entries[i][2] - entries[i][1] >= 16.0 * woff
            ]
            if not wide:
                raise SaddleConnectionSuspected(
                    "return words and measured cuts do not assemble into "
                    "an exact tiling"
                )
            for i in wide:
                side_b, lo_b, hi_b, _ = entries[i]
                for fq in (0.25, 0.75):
                    xq = lo_b + fq * (hi_b - lo_b)
                    x_, rq, split = probe_off_leaf(side_b, xq)
                    if split is not None:
                        samples[side_b].append(
                            (split[0], probe_at(side_b, split[0]))
                        )
                        samples[side_b].append(
                            (split[1], probe_at(side_b, split[1]))
                        )
                    else:
                        samples[side_b].append((x_, rq))
    else:
        raise SaddleConnectionSuspected(
            "return structure did not stabilize under refinement"
        )

    try:
        iet = _make_iet(total, length, branches, two_sided)
    except InductionBlowup:
        if _retry:
            return first_return_iet(
                torus, seg, grid=grid * 4, max_events=max_events, _retry=False
            )
        raise SaddleConnectionSuspected(
            "return structure did not certify: domains and images do not tile"
        )

    tol = 1e-7 * length
    anchors = list(seg.marked_points)

    def on_segment(v):
        # fold a doubled-coordinate position back onto the segment
        s = v - length if two_sided and v > length - tol else v
        return any(abs(s - m) <= tol for m in anchors + [0.0, length])

    offset = 0
    for side in sides:
        bounds = solved_bounds[side]
        n_side = len(bounds) - 1
        for k in range(1, n_side):
            cut = bounds[k]
            if any(abs(cut - m) <= tol for m in anchors):
                continue
            b_left = branches[offset + k - 1]
            b_right = branches[offset + k]
            p = length * side + cut
            ok = any(
                on_segment(float(b.c + b.eps * p)) for b in (b_left, b_right)
            )
            if not ok:
                raise SaddleConnectionSuspected(
                    f"continuity cut at {cut:.6g} matches no separatrix hit"
                )
        offset += n_side
    return iet


# ---------------------------------------------------------------------------
# zippered-rectangle bounds

@dataclass(frozen=True)
class ZipperedBounds:
    K: float
    max_vlen: float
    min_vlen: float
    zeta_vlens: tuple


def zippered_bounds(iet: IETWithFlips, torus: SlitTorus | None = None) -> ZipperedBounds:
    """Uniform return constant: no vertical run longer than K avoids the
    segment, and consecutive hits are at least 1/K apart. Folds in the
    vertical extents of the basis cycle representatives when given."""
    vmax = max(b.vlen for b in iet.branches)
    vmin = min(b.vlen for b in iet.branches)
    if not (vmin > 0.0):
        raise ValueError("return vertical lengths must be positive")
    zeta = ()
    if torus is not None:
        zeta = (torus.s_coords["v1"], torus.s_coords["v2"])
    k = max(vmax, 1.0 / vmin, *(zeta or (0.0,)))
    return ZipperedBounds(k, vmax, vmin, zeta)


# ---------------------------------------------------------------------------
# induction

def _nudge_cut(iet: IETWithFlips, m, allow_snap: bool = True):
    """Place the induction cut in general position. A cut that lands within
    coincidence distance of an existing branch cut or image endpoint is
    snapped onto it exactly, so a self-similar ratio reproduces the clean
    induced exchange instead of growing a spurious sliver branch (the snap
    window absorbs the e^t-amplified drift of a double-precision seed; the
    schedule time moves by at most its width). Otherwise a cut close to an
    image endpoint, a marked-point preimage, is walked off it.

    The cut is a position on the underlying segment, in [0, half). On a
    two-sided section it spawns one window edge per traversal side, so
    branch data from both sides is folded onto the segment before the
    coincidence tests."""
    H = iet.half

    def fold(vals):
        out = []
        for v in vals:
            for s in ((v, v - H) if iet.two_sided else (v,)):
                if 0.0 < s < H:
                    out.append(s)
        return out

    imgs = []
    for b in iet.branches:
        imgs.extend((b.img_lo, b.img_hi))
    imgs = fold(imgs)
    if allow_snap:
        snap = 1e-6 * iet.total_length
        cands = fold([b.lo for b in iet.branches]) + imgs
        near = [v for v in cands if abs(m - v) <= snap]
        if near:
            return min(near, key=lambda v: abs(m - v))
    guard = 1e-9 * iet.total_length
    for _ in range(200):
        if all(abs(m - v) > guard for v in imgs):
            return m
        m -= guard
    raise InductionBlowup("could not place the induction cut off the endpoint set")


def _induce_once(iet, m, max_word, max_items, sliver):
    los = [b.lo for b in iet.branches]
    interior = los[1:]
    L = iet.total_length
    guard = 1e-28 * L
    done_tol = 1e-26 * L
    two = iet.two_sided
    H = mpf(iet.half)
    # downward window piece [H, H + m) lands at new coordinates [m, 2m)
    shift = H - m

    stack = [(0.0, m, 1, 0.0, 0, 0, 0.0, {}, 0)]
    edges = [m]
    if two:
        stack.append((m, 2 * m, 1, shift, 0, 0, 0.0, {}, 0))
        edges.append(H + m)
    done = []
    processed = 0
    while stack:
        processed += 1
        if processed > max_items:
            raise InductionBlowup("induction worklist exploded")
        d_lo, d_hi, eps, c, n1, n2, vl, counts, wl = stack.pop()
        if d_hi - d_lo < sliver:
            raise _Sliver
        if eps > 0:
            p_lo, p_hi = c + d_lo, c + d_hi
        else:
            p_lo, p_hi = c - d_hi, c - d_lo

        if wl > 0:
            if p_hi <= m + done_tol and p_lo >= -done_tol:
                done.append((d_lo, d_hi, eps, c, n1, n2, vl, counts))
                continue
            if two and p_lo >= H - done_tol and p_hi <= H + m + done_tol:
                done.append((d_lo, d_hi, eps, c - shift, n1, n2, vl, counts))
                continue

        splits = [z for z in interior if p_lo + guard < z < p_hi - guard]
        if wl > 0:
            splits.extend(z for z in edges if p_lo + guard < z < p_hi - guard)
        if splits:
            z = min(splits)
            d_split = eps * (z - c)
            if not (d_lo + sliver < d_split < d_hi - sliver):
                raise _Sliver
            stack.append((d_lo, d_split, eps, c, n1, n2, vl, dict(counts), wl))
            stack.append((d_split, d_hi, eps, c, n1, n2, vl, dict(counts), wl))
            continue

        k = bisect_right(los, 0.5 * (p_lo + p_hi)) - 1
        b = iet.branches[k]
        if p_lo < b.lo - 1e-24 * L or p_hi > b.hi + 1e-24 * L:
            raise _Sliver
        wl += 1
        if wl > max_word:
            raise InductionBlowup("return word length exploded")
        counts = dict(counts)
        counts[k] = counts.get(k, 0) + 1
        stack.append((
            d_lo, d_hi, b.eps * eps, b.c + b.eps * c,
            n1 + b.homology.n1, n2 + b.homology.n2, vl + b.vlen, counts, wl,
        ))
    done.sort(key=lambda it: it[0])
    return done


def induce(
    iet: IETWithFlips,
    ratio: float,
    *,
    max_word: int = 10_000,
    max_items: int = 200_000,
) -> tuple:
    """First-return of the exchange to the left prefix of the underlying
    segment of relative size `ratio` (both traversal sides of it, when the
    section is two-sided), rescaled back to unit segment length. Returns
    (new iet, B, dt) where B is the integer change of generator pair
    between the levels and dt = -log of the realized ratio. ratio 1 is the
    identity step."""
    if not (0.0 < ratio <= 1.0):
        raise ValueError("ratio must lie in (0, 1]")
    if ratio == 1.0:
        return iet, IDENTITY2, 0.0

    with mp.workdps(_CHAIN_DPS):
        return _induce_impl(iet, ratio, max_word, max_items)


def _induce_impl(iet, ratio, max_word, max_items):
    L = iet.total_length
    H = mpf(iet.half)
    sliver = 1e-22 * L
    m = _nudge_cut(iet, mpf(ratio) * H)
    done = None
    for attempt in range(3):
        try:
            done = _induce_once(iet, m, max_word, max_items, sliver)
            break
        except _Sliver:
            m = _nudge_cut(iet, m - 8 * (attempt + 1) * sliver, False)
    if done is None:
        raise InductionBlowup("interval shrank beyond float resolution")

    homs = [b.homology for b in iet.branches]
    for d_lo, d_hi, eps, c, n1, n2, vl, counts in done:
        s1 = sum(cnt * homs[k].n1 for k, cnt in counts.items())
        s2 = sum(cnt * homs[k].n2 for k, cnt in counts.items())
        if (s1, s2) != (n1, n2):
            raise InductionBlowup("homology double bookkeeping mismatch")

    # adjacent pieces with the same return data continue each other: the
    # cut between them is the leaf of an earlier window edge, which the
    # flow does not see. The words may differ (the pieces thread different
    # removable cuts of the current level), so words are not compared;
    # without this merge every level leaves two permanent cuts behind.
    merged = []
    for item in done:
        d_lo, d_hi, eps, c, n1, n2, vl, counts = item
        if merged:
            p_lo, p_hi, p_eps, p_c, p_n1, p_n2, p_vl, _ = merged[-1]
            if (
                abs(p_hi - d_lo) <= 1e-26 * L
                and p_eps == eps
                and (p_n1, p_n2) == (n1, n2)
                and abs(p_c - c) <= 1e-24 * L
                and abs(p_vl - vl) <= 1e-6 * (1.0 + max(p_vl, vl))
                and not (iet.two_sided and abs(d_lo - m) <= 1e-26 * L)
            ):
                merged[-1] = (p_lo, d_hi, eps, c, n1, n2, vl, counts)
                continue
        merged.append(item)

    branches = []
    for d_lo, d_hi, eps, c, n1, n2, vl, counts in merged:
        lo, hi, cc = d_lo / m, d_hi / m, c / m
        if eps > 0:
            img_lo, img_hi = cc + lo, cc + hi
        else:
            img_lo, img_hi = cc - hi, cc - lo
        branches.append(
            IETBranch(lo, hi, img_lo, img_hi, eps < 0, HomologyVec(n1, n2), vl, eps, cc)
        )

    new_iet = _make_iet(
        2.0 if iet.two_sided else 1.0,
        float(iet.phys_length * (m / H)),
        branches,
        iet.two_sided,
    )

    if iet.gen_matrix is None or new_iet.gen_matrix is None:
        raise InductionBlowup("branch homologies do not span a rank-2 lattice")
    det_prev = _det2(iet.gen_matrix)
    if abs(det_prev) != 1 or abs(_det2(new_iet.gen_matrix)) != 1:
        raise InductionBlowup("generator pair is not unimodular")
    adj = _adj2(iet.gen_matrix)
    raw = _matmul2(adj, new_iet.gen_matrix)
    b_mat = tuple(tuple(det_prev * v for v in row) for row in raw)
    if abs(_det2(b_mat)) != 1:
        raise InductionBlowup("level transition matrix is not unimodular")

    dt = float(-mp.log(m / H))
    return new_iet, b_mat, dt


# ---------------------------------------------------------------------------
# cocycle accumulation and exponent estimate

@dataclass
class CocycleAccumulator:
    """Ordered log of level-transition matrices with their accumulated
    times; keeps the exact integer product alongside."""

    matrices: list = field(default_factory=list)
    times: list = field(default_factory=lambda: [0.0])
    product: tuple = IDENTITY2

    def push(self, b_mat, dt: float) -> None:
        if not (dt > 0.0):
            raise ValueError("dt must be positive: times are strictly increasing")
        for row in b_mat:
            for v in row:
                if not isinstance(v, int):
                    raise ValueError("transition matrices must be integer")
        if abs(_det2(b_mat)) != 1:
            raise ValueError("transition matrix must have determinant +1 or -1")
        self.matrices.append(tuple(tuple(row) for row in b_mat))
        self.times.append(self.times[-1] + dt)
        self.product = _matmul2(self.product, b_mat)

    @property
    def steps(self) -> int:
        return len(self.matrices)

    @property
    def total_time(self) -> float:
        return self.times[-1]

    @property
    def product_norm_log(self) -> float:
        return _log_opnorm2(self.product)


@dataclass(frozen=True)
class LyapunovEstimate:
    theta_top: float
    theta_bottom: float
    contracted_dir: tuple | None
    contracted_defined: bool
    stderr: float
    steps: int
    total_time: float


def _contracted_of(product):
    mat = _float2x2(product)
    if not np.all(np.isfinite(mat)):
        return None
    _, s, vh = np.linalg.svd(mat)
    if s[1] <= 0.0 or s[0] / max(s[1], 1e-300) < 1.0 + 1e-9:
        return None
    v = vh[1]
    if v[0] < 0.0 or (v[0] == 0.0 and v[1] < 0.0):
        v = -v
    return (float(v[0]), float(v[1]))


def lyapunov_estimate(acc: CocycleAccumulator, *, min_time: float = 5.0) -> LyapunovEstimate:
    """Top exponent log|B_1 ... B_n| / t_n, its symplectic mirror, and the
    most contracted direction of the product. The stderr is half the gap
    between the two disjoint-half estimates."""
    n = acc.steps
    if n == 0 or acc.total_time < min_time:
        raise InsufficientTime(
            f"accumulated time {acc.total_time:.3g} below the floor {min_time:.3g}"
        )
    theta_top = acc.product_norm_log / acc.total_time

    stderr = float("inf")
    if n >= 4:
        h = n // 2
        p1 = IDENTITY2
        for b in acc.matrices[:h]:
            p1 = _matmul2(p1, b)
        p2 = IDENTITY2
        for b in acc.matrices[h:]:
            p2 = _matmul2(p2, b)
        t1 = acc.times[h] - acc.times[0]
        t2 = acc.times[-1] - acc.times[h]
        if t1 > 0.0 and t2 > 0.0:
            th1 = _log_opnorm2(p1) / t1
            th2 = _log_opnorm2(p2) / t2
            stderr = 0.5 * abs(th1 - th2)

    cd = _contracted_of(acc.product)
    return LyapunovEstimate(
        theta_top=theta_top,
        theta_bottom=-theta_top,
        contracted_dir=cd,
        contracted_defined=cd is not None,
        stderr=stderr,
        steps=n,
        total_time=acc.total_time,
    )


@dataclass(frozen=True)
class StripPrediction:
    Theta: float
    direction: Vec2
    normal: Vec2
    v_plane: Vec2


def predict_strip(contracted_dir, params: SystemParams) -> StripPrediction:
    """Push the contracted homology direction to the plane through the
    lattice basis; the strip direction is its angle mod pi and the normal
    is its left-hand unit perpendicular."""
    if contracted_dir is None:
        raise ZeroDirection("no contracted direction available")
    cd1, cd2 = float(contracted_dir[0]), float(contracted_dir[1])
    if math.hypot(cd1, cd2) < 1e-14:
        raise ZeroDirection("contracted direction vanishes")
    e1, e2 = params.e1, params.e2
    v = Vec2(cd1 * e1.x + cd2 * e2.x, cd1 * e1.y + cd2 * e2.y)
    scale = max(e1.norm(), e2.norm())
    if v.norm() < 1e-14 * scale:
        raise ZeroDirection("homology direction maps to the zero vector")
    theta = math.atan2(v.y, v.x) % math.pi
    if theta >= math.pi:
        theta = 0.0
    return StripPrediction(
        Theta=theta,
        direction=Vec2(math.cos(theta), math.sin(theta)),
        normal=Vec2(-math.sin(theta), math.cos(theta)),
        v_plane=v,
    )


# ---------------------------------------------------------------------------
# orchestration

@dataclass(frozen=True)
class RenormLevel:
    k: int
    t: float
    iet: IETWithFlips


@dataclass(frozen=True)
class RenormResult:
    seg: TransversalSegment
    levels: tuple
    acc: CocycleAccumulator


def renormalize(
    torus: SlitTorus,
    *,
    steps: int = 120,
    ratio: float = DEFAULT_RATIO,
    seg: TransversalSegment | None = None,
    grid: int = 64,
    t_target: float | None = None,
) -> RenormResult:
    """Full pipeline: transversal, first-return exchange, then fixed-ratio
    induction with the cocycle accumulated, until `steps` inductions or the
    accumulated time reaches t_target."""
    if seg is None:
        seg = build_transversal(torus)
    iet = first_return_iet(torus, seg, grid=grid)
    acc = CocycleAccumulator()
    levels = [RenormLevel(0, 0.0, iet)]
    for k in range(1, steps + 1):
        iet, b_mat, dt = induce(iet, ratio)
        acc.push(b_mat, dt)
        levels.append(RenormLevel(k, acc.total_time, iet))
        if t_target is not None and acc.total_time >= t_target:
            break
    return RenormResult(seg, tuple(levels), acc)


def renorm_log_rows(result: RenormResult) -> list:
    """One dict per induction step, replaying the running product: level,
    time, the step matrix, the running exponent estimate and contracted
    direction. Suitable for JSON-lines dumping."""
    rows = []
    prod = IDENTITY2
    for k, b_mat in enumerate(result.acc.matrices, start=1):
        prod = _matmul2(prod, b_mat)
        t = result.acc.times[k]
        cd = _contracted_of(prod)
        rows.append({
            "k": k,
            "t": t,
            "B": [list(r) for r in b_mat],
            "theta_top": _log_opnorm2(prod) / t if t > 0 else None,
            "contracted_dir": list(cd) if cd else None,
        })
    return rows
