"""Metric rectification of an imaged plane.

A rectifier maps image coordinates to a frame in which the plane's metric
structure (angles, length ratios) is restored, up to an overall similarity.
It factors as H_S . H_A . H_P:

  H_P sends the plane's vanishing line to the line at infinity,
  H_A = [[1/beta, -alpha/beta, 0], [0, 1, 0], [0, 0, 1]] removes the
      residual affine distortion,
  H_S is a similarity fixed only when an absolute length is known.

The two affine parameters (alpha, beta), beta > 0, are located in the
(alpha, beta) half-plane as the meet of constraint circles, one circle per
metric annotation: a known angle, a pair of equal (unknown) angles, or a
known length ratio. Alternatively, the images of two coplanar world circles
expose the plane's circular points directly and determine H_P and H_A in
one step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CoincidentCircles,
    DegenerateDenominator,
    DegenerateDirections,
    ImaginaryRadius,
    InsufficientConstraints,
    NoConjugatePair,
    NoIntersection,
    NonPositiveBeta,
    NoScale,
    ParallelSegments,
    VerticalLineDirection,
    ZeroAngle,
    ZeroLength,
)
from .geometry import (
    Conic,
    Correspondence,
    HomogLine2,
    HomogPoint2,
    Homography,
    canonical_vector,
    conic_intersections,
    dlt_homography,
    line_through,
    symmetric_transfer_distance,
)
from .raster import ImageRaster, warp_image  # noqa: F401  (re-exported)

VERTICAL_DIRECTION_EPS = 1e-8


# --------------------------------------------------------------------------
# stratified rectifiers
# --------------------------------------------------------------------------

def projective_rectifier(vline: HomogLine2) -> Homography:
    """Map sending the given vanishing line to the line at infinity.

    Uses the minimal form (identity rows above the line) whenever the
    line's third component allows an invertible matrix; otherwise the two
    identity rows are chosen from the remaining basis vectors.
    """
    l = canonical_vector(vline.l)
    if abs(l[2]) > 1e-8:
        m = np.array([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [l[0], l[1], l[2]],
        ])
    else:
        keep = [i for i in range(3) if i != int(np.argmax(np.abs(l)))]
        m = np.vstack([np.eye(3)[keep], l])
    return Homography(m)


def affine_rectifier(alpha: float, beta: float) -> Homography:
    """Affine-to-metric map for the plane's two affine parameters."""
    if not np.isfinite(alpha) or not np.isfinite(beta):
        raise ValueError("non-finite affine parameters")
    if beta <= 0.0:
        raise NonPositiveBeta(f"beta must be positive, got {beta}")
    return Homography(np.array([
        [1.0 / beta, -alpha / beta, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ]))


# --------------------------------------------------------------------------
# constraint circles in the (alpha, beta) half-plane
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintCircle:
    """Circle of (alpha, beta) pairs consistent with one metric annotation."""

    center: tuple[float, float]
    radius: float
    kind: str = "generic"

    def __post_init__(self):
        if not (np.isfinite(self.center).all() and np.isfinite(self.radius)):
            raise ValueError("non-finite constraint circle")
        if self.radius <= 0.0:
            raise ImaginaryRadius("constraint circle needs a positive radius")

    def residual_at(self, alpha: float, beta: float) -> float:
        d = np.hypot(alpha - self.center[0], beta - self.center[1])
        return float(abs(d - self.radius))


def _direction_param(l: HomogLine2) -> float:
    """Direction parameter a = -l2/l1 of a line in the affine frame.

    The parameter is the x-run per unit y of the line's direction vector
    (a, 1). Lines with |l1| below the vertical-direction guard have no
    finite parameter; the caller must rotate the working frame first.
    """
    v = np.asarray(l.l, dtype=float)
    n = np.hypot(v[0], v[1])
    if n == 0.0:
        raise ValueError("ideal line has no direction")
    if abs(v[0]) / n < VERTICAL_DIRECTION_EPS:
        raise VerticalLineDirection(
            "line direction parameter diverges; rotate the working frame")
    return float(-v[1] / v[0])


def circle_from_known_angle(m: HomogLine2, n: HomogLine2, theta: float) -> ConstraintCircle:
    """Constraint circle for a known world angle theta between two lines,
    both expressed in the affine-rectified frame.

    Center ((a+b)/2, (a-b)/2 * cot(theta)), radius |a-b| / (2 sin(theta)),
    where a, b are the direction parameters of the two lines.
    """
    if not (0.0 < theta < np.pi) or abs(np.sin(theta)) < 1e-12:
        raise ZeroAngle(f"known angle must be in (0, pi), got {theta}")
    a = _direction_param(m)
    b = _direction_param(n)
    if abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b)):
        raise DegenerateDirections("lines are parallel in the affine frame")
    c_alpha = 0.5 * (a + b)
    c_beta = 0.5 * (a - b) / np.tan(theta)
    radius = abs(a - b) / (2.0 * np.sin(theta))
    return ConstraintCircle((c_alpha, c_beta), radius, kind="known_angle")


def circle_from_equal_angles(m1: HomogLine2, n1: HomogLine2,
                             m2: HomogLine2, n2: HomogLine2) -> ConstraintCircle:
    """Constraint circle for two line pairs spanning equal (unknown) world
    angles, all four lines in the affine-rectified frame.

    The center lies on the alpha axis at (a1 b2 - b1 a2) / (a1 - b1 - a2 + b2).
    The radius follows from requiring the circle to contain the solutions of
    tan(theta_1) = tan(theta_2); expanding that identity gives
    r^2 = c^2 + ((a2 - b2) a1 b1 - (a1 - b1) a2 b2) / (a1 - b1 - a2 + b2).
    """
    a1, b1 = _direction_param(m1), _direction_param(n1)
    a2, b2 = _direction_param(m2), _direction_param(n2)
    den = a1 - b1 - a2 + b2
    scale = max(1.0, abs(a1), abs(b1), abs(a2), abs(b2))
    if abs(den) <= 1e-12 * scale:
        raise DegenerateDenominator("equal-angle pairs carry no constraint")
    c_alpha = (a1 * b2 - b1 * a2) / den
    r2 = c_alpha**2 + ((a2 - b2) * a1 * b1 - (a1 - b1) * a2 * b2) / den
    if r2 <= 1e-12 * max(1.0, c_alpha**2):
        raise ImaginaryRadius("equal-angle circle has non-positive radius")
    return ConstraintCircle((c_alpha, 0.0), float(np.sqrt(r2)), kind="equal_angles")


def circle_from_length_ratio(p_i: HomogPoint2, q_i: HomogPoint2,
                             p_j: HomogPoint2, q_j: HomogPoint2,
                             rho: float) -> ConstraintCircle:
    """Constraint circle for a known world length ratio rho = |i| / |j|
    between two non-parallel segments in the affine-rectified frame.

    With endpoint differences (di1, di2) and (dj1, dj2):
      center ((di1 di2 - rho^2 dj1 dj2) / (di2^2 - rho^2 dj2^2), 0)
      radius |rho (di1 dj2 - dj1 di2) / (di2^2 - rho^2 dj2^2)|
    The squared ratio appears throughout.
    """
    if rho <= 0.0:
        raise ValueError(f"length ratio must be positive, got {rho}")
    di = q_i.xy() - p_i.xy()
    dj = q_j.xy() - p_j.xy()
    if np.linalg.norm(di) < 1e-12 or np.linalg.norm(dj) < 1e-12:
        raise ZeroLength("ratio segments need distinct endpoints")
    cross = di[0] * dj[1] - dj[0] * di[1]
    if abs(cross) <= 1e-12 * (np.linalg.norm(di) * np.linalg.norm(dj)):
        raise ParallelSegments("ratio segments are parallel in the affine frame")
    den = di[1] ** 2 - rho**2 * dj[1] ** 2
    scale = max(di[1] ** 2, rho**2 * dj[1] ** 2, 1e-30)
    if abs(den) <= 1e-12 * scale:
        raise DegenerateDenominator("length-ratio circle denominator vanishes")
    c_alpha = (di[0] * di[1] - rho**2 * dj[0] * dj[1]) / den
    radius = abs(rho * cross / den)
    return ConstraintCircle((float(c_alpha), 0.0), float(radius), kind="length_ratio")


def intersect_constraint_circles(c1: ConstraintCircle, c2: ConstraintCircle,
                                 slack: float = 1e-9) -> list[tuple[float, float]]:
    """All real meets of two constraint circles (tangency gives one point)."""
    p1 = np.asarray(c1.center)
    p2 = np.asarray(c2.center)
    d = float(np.linalg.norm(p2 - p1))
    span = max(c1.radius, c2.radius, d, 1.0)
    if d <= slack * span and abs(c1.radius - c2.radius) <= slack * span:
        raise CoincidentCircles("constraint circles coincide")
    if d > c1.radius + c2.radius + slack * span or \
       d < abs(c1.radius - c2.radius) - slack * span:
        raise NoIntersection(
            "constraint circles do not meet; annotations are inconsistent")
    if d == 0.0:
        raise CoincidentCircles("concentric circles with distinct radii never meet")
    a = (d * d + c1.radius**2 - c2.radius**2) / (2.0 * d)
    h2 = c1.radius**2 - a * a
    h = float(np.sqrt(max(h2, 0.0)))
    axis = (p2 - p1) / d
    perp = np.array([-axis[1], axis[0]])
    base = p1 + a * axis
    if h <= slack * span:
        return [tuple(base)]
    return [tuple(base + h * perp), tuple(base - h * perp)]


def solve_alpha_beta(c1: ConstraintCircle, c2: ConstraintCircle) -> tuple[float, float]:
    """Meet of two constraint circles in the upper (beta > 0) half-plane.

    When both meets have beta > 0 the one closer to the undistorted
    parameters (0, 1) is returned; a third constraint can disambiguate via
    rectify_vanishing_points.
    """
    roots = [r for r in intersect_constraint_circles(c1, c2) if r[1] > 0.0]
    if not roots:
        raise NoIntersection("no constraint-circle meet with beta > 0")
    roots.sort(key=lambda r: (r[0] ** 2 + (r[1] - 1.0) ** 2))
    return roots[0]


# --------------------------------------------------------------------------
# rectifier decomposition (similarity / affine / projective strata)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DecomposedRectifier:
    """Stratified form R ~ H_S . H_A . H_P of a plane rectifier."""

    scale: float
    rotation: float
    translation: tuple[float, float]
    alpha: float
    beta: float
    vline: HomogLine2
    mirrored: bool = False


def decompose_rectifier(r: np.ndarray) -> DecomposedRectifier:
    """Factor an invertible 3x3 rectifier into similarity, affine shear
    (alpha, beta) and projective (vanishing line) strata.

    A reflection in the affine part is absorbed into a y-flip and flagged
    as mirrored; lengths and angles are unaffected.
    """
    r = np.asarray(r, dtype=float)
    vline = HomogLine2(canonical_vector(r[2, :]))
    hp = projective_rectifier(vline).H
    a = r @ np.linalg.inv(hp)
    if abs(a[2, 2]) < 1e-12 * np.linalg.norm(a):
        raise ValueError("rectifier does not factor over this vanishing line")
    a = a / a[2, 2]
    a2 = a[:2, :2]
    det = np.linalg.det(a2)
    if abs(det) < 1e-15:
        raise ValueError("affine part of the rectifier is singular")
    mirrored = det < 0.0
    if mirrored:
        a2 = np.diag([1.0, -1.0]) @ a2
    n1 = np.hypot(a2[0, 0], a2[1, 0])
    if n1 < 1e-15:
        raise ValueError("degenerate affine part")
    alpha = -(a2[0, 0] * a2[0, 1] + a2[1, 0] * a2[1, 1]) / (n1 * n1)
    col2 = np.array([a2[0, 0] * alpha + a2[0, 1], a2[1, 0] * alpha + a2[1, 1]])
    n2 = np.linalg.norm(col2)
    if n2 < 1e-15:
        raise ValueError("degenerate affine part")
    beta = n2 / n1
    scale = n2
    rotation = float(np.arctan2(a2[1, 0], a2[0, 0]))
    return DecomposedRectifier(
        scale=float(scale),
        rotation=rotation,
        translation=(float(a[0, 2]), float(a[1, 2])),
        alpha=float(alpha),
        beta=float(beta),
        vline=vline,
        mirrored=mirrored,
    )


# --------------------------------------------------------------------------
# rectification results
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RectifyResult:
    """Metric rectification of an imaged plane.

    H_P carries the plane's vanishing line in its last row; H_A is the
    upper-triangular affine correction with unit last row. scale converts
    metric-frame distances to world units and is set only when an absolute
    length was available.
    """

    method: str
    H_P: Homography
    H_A: Homography
    scale: Optional[float] = None
    quality: dict = field(default_factory=dict)

    @property
    def metric_matrix(self) -> np.ndarray:
        """Image -> metric frame (world up to similarity)."""
        return self.H_A.H @ self.H_P.H

    @property
    def rectifier(self) -> Homography:
        """Image -> world units when scale is known, metric frame otherwise."""
        m = self.metric_matrix
        if self.scale is not None:
            m = np.diag([self.scale, self.scale, 1.0]) @ m
        return Homography(m)

    def map_point(self, p: HomogPoint2) -> HomogPoint2:
        return HomogPoint2(canonical_vector(self.metric_matrix @ p.h))

    def with_scale(self, scale: float) -> "RectifyResult":
        return RectifyResult(self.method, self.H_P, self.H_A, scale, dict(self.quality))


def similarity_scale(p_rect: HomogPoint2, q_rect: HomogPoint2,
                     world_length: float) -> float:
    """World units per metric-frame unit from one known segment length."""
    if world_length <= 0.0:
        raise ValueError(f"world length must be positive, got {world_length}")
    if p_rect.is_ideal or q_rect.is_ideal:
        raise ZeroLength("scale reference endpoints must be finite")
    d = float(np.linalg.norm(p_rect.xy() - q_rect.xy()))
    if d < 1e-15:
        raise ZeroLength("scale reference endpoints coincide")
    return world_length / d


def measure_on_plane(rr: RectifyResult, p: HomogPoint2, q: HomogPoint2) -> float:
    """World length of the segment (p, q), both given in image coordinates."""
    if rr.scale is None:
        raise NoScale("no absolute scale; provide a known length first")
    a = rr.map_point(p)
    b = rr.map_point(q)
    if a.is_ideal or b.is_ideal:
        raise ZeroLength("segment endpoint rectifies to an ideal point")
    return float(np.linalg.norm(a.xy() - b.xy())) * rr.scale


KnownLength = tuple[HomogPoint2, HomogPoint2, float]


def _apply_known_length(rr: RectifyResult, known_length: Optional[KnownLength]):
    if known_length is None:
        return rr
    p, q, length = known_length
    scale = similarity_scale(rr.map_point(p), rr.map_point(q), length)
    return rr.with_scale(scale)


# --------------------------------------------------------------------------
# metric constraints in image coordinates
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class KnownAngle:
    """Two image lines spanning a known world angle (radians)."""

    m: HomogLine2
    n: HomogLine2
    theta: float


@dataclass(frozen=True)
class EqualAngles:
    """Two image line pairs spanning equal (unknown) world angles."""

    m1: HomogLine2
    n1: HomogLine2
    m2: HomogLine2
    n2: HomogLine2


@dataclass(frozen=True)
class LengthRatio:
    """Two image segments with a known world length ratio |i| / |j|."""

    p_i: HomogPoint2
    q_i: HomogPoint2
    p_j: HomogPoint2
    q_j: HomogPoint2
    rho: float


MetricConstraint = KnownAngle | EqualAngles | LengthRatio


def _circles_in_frame(constraints: Sequence[MetricConstraint],
                      frame: np.ndarray) -> list[ConstraintCircle]:
    """Build constraint circles with all annotations mapped by frame."""
    h = Homography(frame)
    circles = []
    for c in constraints:
        if isinstance(c, KnownAngle):
            circles.append(circle_from_known_angle(
                h.apply_line(c.m), h.apply_line(c.n), c.theta))
        elif isinstance(c, EqualAngles):
            circles.append(circle_from_equal_angles(
                h.apply_line(c.m1), h.apply_line(c.n1),
                h.apply_line(c.m2), h.apply_line(c.n2)))
        elif isinstance(c, LengthRatio):
            circles.append(circle_from_length_ratio(
                h.apply(c.p_i), h.apply(c.q_i),
                h.apply(c.p_j), h.apply(c.q_j), c.rho))
        else:
            raise TypeError(f"unknown constraint type {type(c)!r}")
    return circles


def _strip_similarity(metric: np.ndarray) -> tuple[Homography, Homography, float]:
    """Rewrite a metric rectifier as H_A . H_P, returning the dropped scale."""
    dec = decompose_rectifier(metric)
    hp = projective_rectifier(dec.vline)
    ha = affine_rectifier(dec.alpha, dec.beta)
    return hp, ha, dec.scale


# --------------------------------------------------------------------------
# rectification front ends
# --------------------------------------------------------------------------

def rectify_polygon(matches: Sequence[Correspondence],
                    known_length: Optional[KnownLength] = None) -> RectifyResult:
    """Rectify from >= 4 image points with known world-plane coordinates.

    matches map image points (x1) to world points (x2). World coordinates
    carry the absolute scale, so measurements work without a separate known
    length; passing one recalibrates the scale.
    """
    h = dlt_homography(matches)
    hp, ha, scale = _strip_similarity(h.H)
    residual = max(symmetric_transfer_distance(h, m) for m in matches)
    rr = RectifyResult(
        method="polygon", H_P=hp, H_A=ha, scale=scale,
        quality={"max_transfer_px": residual},
    )
    if known_length is not None:
        rr = _apply_known_length(rr, known_length)
    return rr


_FALLBACK_FRAME_ANGLES = (0.0, np.pi / 2.0, np.pi / 4.0, np.pi / 6.0)


def rectify_vanishing_points(vps: Sequence[HomogPoint2],
                             constraints: Sequence[MetricConstraint],
                             known_length: Optional[KnownLength] = None) -> RectifyResult:
    """Rectify from the plane's vanishing line plus >= 2 metric constraints.

    The vanishing line comes from two vanishing points (least-squares line
    for more). Each constraint yields a circle in the (alpha, beta)
    half-plane; their meet fixes the affine correction. Near-horizontal
    lines in the affine frame have no finite direction parameter, so the
    working frame is rotated until every constraint is representable; the
    rotation is folded back out of the returned strata.
    """
    if len(vps) < 2:
        raise InsufficientConstraints(f"need >= 2 vanishing points, got {len(vps)}")
    if len(constraints) < 2:
        raise InsufficientConstraints(
            f"need >= 2 metric constraints, got {len(constraints)}")
    if len(vps) == 2:
        vline = line_through(vps[0], vps[1])
    else:
        a = np.stack([canonical_vector(v.h) for v in vps])
        _, _, vt = np.linalg.svd(a)
        vline = HomogLine2(canonical_vector(vt[-1]))

    hp = projective_rectifier(vline)
    last_err: Exception | None = None
    for phi in _FALLBACK_FRAME_ANGLES:
        rot = np.array([
            [np.cos(phi), -np.sin(phi), 0.0],
            [np.sin(phi), np.cos(phi), 0.0],
            [0.0, 0.0, 1.0],
        ])
        frame = rot @ hp.H
        try:
            circles = _circles_in_frame(constraints, frame)
        except VerticalLineDirection as err:
            last_err = err
            continue
        roots = _consistent_root(circles)
        alpha, beta = roots
        metric = affine_rectifier(alpha, beta).H @ frame
        hp_out, ha_out, _ = _strip_similarity(metric)
        quality = {
            "circle_residuals": [c.residual_at(alpha, beta) for c in circles],
            "frame_rotation_rad": float(phi),
        }
        rr = RectifyResult(method="vanishing_points", H_P=hp_out, H_A=ha_out,
                           scale=None, quality=quality)
        return _apply_known_length(rr, known_length)
    raise last_err if last_err is not None else InsufficientConstraints(
        "no usable working frame")


def _consistent_root(circles: Sequence[ConstraintCircle]) -> tuple[float, float]:
    """Meet of the first two circles, disambiguated by any further ones."""
    roots = [r for r in intersect_constraint_circles(circles[0], circles[1])
             if r[1] > 0.0]
    if not roots:
        raise NoIntersection("no constraint-circle meet with beta > 0")
    if len(roots) == 1:
        return roots[0]
    if len(circles) > 2:
        def extra_residual(root):
            return sum(c.residual_at(*root) for c in circles[2:])
        roots.sort(key=extra_residual)
        return roots[0]
    roots.sort(key=lambda r: (r[0] ** 2 + (r[1] - 1.0) ** 2))
    return roots[0]


def _conic_roundness(conic: Conic, metric: np.ndarray) -> float:
    """Deviation of the rectified conic from a circle (0 for true circles)."""
    rect = conic.transform(Homography(metric)).matrix
    block = rect[:2, :2]
    ev = np.linalg.eigvalsh(0.5 * (block + block.T))
    top = max(abs(ev[0]), abs(ev[1]))
    if top == 0.0:
        return float("inf")
    if ev[0] * ev[1] <= 0.0:
        return float("inf")
    return float(abs(ev[0] - ev[1]) / top)


def rectify_circles(c1: Conic, c2: Conic,
                    known_length: Optional[KnownLength] = None) -> RectifyResult:
    """Rectify from the images of two distinct coplanar world circles.

    The conics meet in four points; the images of the plane's circular
    points form a complex-conjugate pair among them. Normalizing that pair
    so its second component is the imaginary unit exposes beta + i alpha in
    the first component and the vanishing line in the third. When two
    conjugate pairs exist (disjoint circles), the pair whose rectifier
    makes both conics round is taken.
    """
    inter = conic_intersections(c1, c2)
    pairs = list(inter.conjugate_pairs)
    if inter.candidate_pair is not None and inter.candidate_pair in pairs:
        pairs.remove(inter.candidate_pair)
        pairs.insert(0, inter.candidate_pair)
    if not pairs:
        raise NoConjugatePair(
            "conic meets contain no complex-conjugate pair; the conics are "
            "not images of coplanar circles")

    best: tuple[float, RectifyResult] | None = None
    for (i, j) in pairs:
        for idx in (i, j):
            p = np.asarray(inter.points[idx])
            if abs(p[1]) < 1e-12:
                continue
            q = p * (1j / p[1])
            beta = float(np.real(q[0]))
            alpha = float(np.imag(q[0]))
            if beta <= 1e-12:
                continue
            u = -float(np.real(q[2])) / beta
            v = -float(np.imag(q[2])) - u * alpha
            try:
                hp = projective_rectifier(HomogLine2(np.array([u, v, 1.0])))
                ha = affine_rectifier(alpha, beta)
            except (NonPositiveBeta, ValueError):
                continue
            metric = ha.H @ hp.H
            score = max(_conic_roundness(c1, metric), _conic_roundness(c2, metric))
            if not np.isfinite(score):
                continue
            rr = RectifyResult(
                method="circles", H_P=hp, H_A=ha, scale=None,
                quality={"roundness": score},
            )
            if best is None or score < best[0]:
                best = (score, rr)
    if best is None:
        raise NoConjugatePair("no conjugate pair yields a valid rectifier")
    return _apply_known_length(best[1], known_length)


# --------------------------------------------------------------------------
# rectified previews
# --------------------------------------------------------------------------

def rectified_preview(src: ImageRaster, rr: RectifyResult,
                      max_dim: int = 1024) -> ImageRaster:
    """Warp the source into the metric frame, framed to at most max_dim."""
    corners = np.array([
        [0.0, 0.0, 1.0],
        [src.width - 1.0, 0.0, 1.0],
        [src.width - 1.0, src.height - 1.0, 1.0],
        [0.0, src.height - 1.0, 1.0],
    ])
    m = rr.metric_matrix
    mapped = (m @ corners.T).T
    with np.errstate(divide="ignore", invalid="ignore"):
        xy = mapped[:, :2] / mapped[:, 2:3]
    xy = xy[np.all(np.isfinite(xy), axis=1)]
    if len(xy) < 3:
        raise NoScale("rectified corners are unbounded; cannot frame preview")
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    s = max_dim / float(span.max())
    out_w = max(2, int(np.ceil(span[0] * s)) + 1)
    out_h = max(2, int(np.ceil(span[1] * s)) + 1)
    frame = np.array([
        [s, 0.0, -s * lo[0]],
        [0.0, s, -s * lo[1]],
        [0.0, 0.0, 1.0],
    ])
    return warp_image(src, Homography(frame @ m), out_size=(out_w, out_h))
