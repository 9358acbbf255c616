"""Homogeneous 2-D geometry: points, lines, conics, cross ratios and the
normalized DLT homography estimator.

Conventions
-----------
Points and lines are homogeneous 3-vectors defined up to nonzero scale; a
point p lies on a line l iff l . p = 0. Pixel coordinates put the origin at
the top-left pixel center, x right, y down. Conics are stored as the six
coefficients (a, b, c, d, e, f) of a x^2 + b xy + c y^2 + d x + e y + f = 0.

Canonical forms: vectors are unit-norm with the largest-magnitude component
positive; matrices are unit Frobenius norm with the first largest-magnitude
entry positive. Equality of projective quantities is always "up to scale".
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import Tolerances
from .errors import (
    CoincidentConics,
    CoincidentLines,
    CoincidentPoints,
    DegenerateBundle,
    DegenerateConfiguration,
    DegenerateConic,
    DegenerateQuadruple,
    InsufficientMatches,
    InsufficientPoints,
    InsufficientSegments,
    NonInvertible,
    NotCollinear,
    NumericalBreakdown,
)

TOL = Tolerances()


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {np.shape(v)}")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite homogeneous vector")
    return a.copy()


def canonical_vector(v: np.ndarray) -> np.ndarray:
    """Unit norm, sign fixed so the largest-magnitude component is positive."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero vector has no canonical form")
    v = v / n
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def canonical_matrix(m: np.ndarray) -> np.ndarray:
    """Unit Frobenius norm, first largest-magnitude entry positive."""
    m = np.asarray(m, dtype=float)
    n = np.linalg.norm(m)
    if n == 0.0:
        raise ValueError("zero matrix has no canonical form")
    m = m / n
    flat = np.abs(m).ravel()
    k = int(np.argmax(flat))
    return -m if m.ravel()[k] < 0 else m


def proportional(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """True when a and b are equal up to nonzero scale."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return False
    a, b = a / na, b / nb
    return min(np.linalg.norm(a - b), np.linalg.norm(a + b)) <= tol


@dataclass(frozen=True, eq=False)
class HomogPoint2:
    """Homogeneous image point (x, y, w)."""

    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", _as_vec3(self.h))
        if np.linalg.norm(self.h) == 0.0:
            raise ValueError("the zero vector is not a projective point")

    @staticmethod
    def from_xy(x: float, y: float) -> "HomogPoint2":
        return HomogPoint2(np.array([x, y, 1.0]))

    @staticmethod
    def ideal(dx: float, dy: float) -> "HomogPoint2":
        if dx == 0.0 and dy == 0.0:
            raise ValueError("ideal point needs a nonzero direction")
        return HomogPoint2(np.array([dx, dy, 0.0]))

    @property
    def is_ideal(self) -> bool:
        u = self.h / np.linalg.norm(self.h)
        return abs(u[2]) <= TOL.eps_w

    def xy(self) -> np.ndarray:
        if self.is_ideal:
            raise ValueError("ideal point has no affine coordinates")
        return self.h[:2] / self.h[2]

    def canonical(self) -> "HomogPoint2":
        return HomogPoint2(canonical_vector(self.h))

    def proportional_to(self, other: "HomogPoint2", tol: float = 1e-9) -> bool:
        return proportional(self.h, other.h, tol)

    def __repr__(self):
        return f"HomogPoint2({self.h[0]:.6g}, {self.h[1]:.6g}, {self.h[2]:.6g})"


@dataclass(frozen=True, eq=False)
class HomogLine2:
    """Homogeneous image line (a, b, c): a x + b y + c w = 0."""

    l: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "l", _as_vec3(self.l))
        if np.linalg.norm(self.l) == 0.0:
            raise ValueError("the zero vector is not a projective line")

    @property
    def is_ideal(self) -> bool:
        u = self.l / np.linalg.norm(self.l)
        return float(np.hypot(u[0], u[1])) <= TOL.eps_w

    def direction(self) -> np.ndarray:
        """Unit direction vector of the line (undefined for the ideal line)."""
        n = np.hypot(self.l[0], self.l[1])
        if n <= TOL.eps_w * np.linalg.norm(self.l):
            raise ValueError("the ideal line has no direction")
        return np.array([-self.l[1], self.l[0]]) / n

    def canonical(self) -> "HomogLine2":
        return HomogLine2(canonical_vector(self.l))

    def proportional_to(self, other: "HomogLine2", tol: float = 1e-9) -> bool:
        return proportional(self.l, other.l, tol)

    def __repr__(self):
        return f"HomogLine2({self.l[0]:.6g}, {self.l[1]:.6g}, {self.l[2]:.6g})"


@dataclass(frozen=True, eq=False)
class Correspondence:
    """A matched point pair (x1 in the first frame, x2 in the second)."""

    x1: HomogPoint2
    x2: HomogPoint2

    @staticmethod
    def from_xy(x1, y1, x2, y2) -> "Correspondence":
        return Correspondence(HomogPoint2.from_xy(x1, y1), HomogPoint2.from_xy(x2, y2))


@dataclass(frozen=True, eq=False)
class Homography:
    """Invertible plane projective map, applied as x' ~ H x."""

    H: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.H, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite homography")
        if abs(np.linalg.det(m / np.linalg.norm(m))) <= TOL.eps_det:
            raise NonInvertible("homography is singular within tolerance")
        object.__setattr__(self, "H", m.copy())

    @staticmethod
    def identity() -> "Homography":
        return Homography(np.eye(3))

    def canonical(self) -> "Homography":
        return Homography(canonical_matrix(self.H))

    def apply(self, p: HomogPoint2) -> HomogPoint2:
        return HomogPoint2(canonical_vector(self.H @ p.h))

    def apply_line(self, l: HomogLine2) -> HomogLine2:
        # lines push forward by the inverse transpose
        return HomogLine2(canonical_vector(np.linalg.solve(self.H.T, l.l)))

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.H))

    def compose(self, other: "Homography") -> "Homography":
        """self after other: (self.compose(other)).apply(p) = self(other(p))."""
        return Homography(self.H @ other.H)

    def proportional_to(self, other: "Homography", tol: float = 1e-9) -> bool:
        return proportional(self.H, other.H, tol)

    def __repr__(self):
        return f"Homography({np.array2string(self.H, precision=5)})"


# --------------------------------------------------------------------------
# joins and meets
# --------------------------------------------------------------------------

def line_through(p: HomogPoint2, q: HomogPoint2) -> HomogLine2:
    """Join of two distinct points."""
    if p.proportional_to(q, 1e-12):
        raise CoincidentPoints("join of coincident points is undefined")
    v = np.cross(p.canonical().h, q.canonical().h)
    if np.linalg.norm(v) <= TOL.eps_w:
        raise CoincidentPoints("join of coincident points is undefined")
    return HomogLine2(canonical_vector(v))


def meet(l: HomogLine2, m: HomogLine2) -> HomogPoint2:
    """Meet of two distinct lines; parallel lines meet at an ideal point."""
    if l.proportional_to(m, 1e-12):
        raise CoincidentLines("meet of coincident lines is undefined")
    v = np.cross(l.canonical().l, m.canonical().l)
    if np.linalg.norm(v) <= TOL.eps_w:
        raise CoincidentLines("meet of coincident lines is undefined")
    return HomogPoint2(canonical_vector(v))


# --------------------------------------------------------------------------
# cross ratio
# --------------------------------------------------------------------------

def _fit_line_canonical(points: Sequence[np.ndarray]) -> np.ndarray:
    """Total-least-squares line through unit-normalized homogeneous points."""
    a = np.stack([canonical_vector(p) for p in points])
    _, s, vt = np.linalg.svd(a)
    return canonical_vector(vt[-1])


def cross_ratio(a: HomogPoint2, b: HomogPoint2, c: HomogPoint2, d: HomogPoint2,
                eps_col: float = TOL.eps_col, eps_den: float = TOL.eps_den) -> float:
    """Cross ratio cr(a, b; c, d) = ((a-c)(b-d)) / ((a-d)(b-c)) of four
    collinear points, with 1-D coordinates taken along the best-fit line.

    Ideal points are handled through homogeneous 1-D coordinates, which
    reproduces the finite limit formulas exactly.
    """
    pts = [p.canonical().h for p in (a, b, c, d)]
    line = _fit_line_canonical(pts)
    for p in pts:
        if abs(np.dot(line, p)) > eps_col:
            raise NotCollinear(
                f"point {p} off the common line by {abs(np.dot(line, p)):.3e}")

    ideal = [abs(p[2]) <= TOL.eps_w for p in pts]
    params = []
    if all(ideal):
        # the common line is the line at infinity; use direction coordinates
        params = [np.array([p[0], p[1]]) for p in pts]
    else:
        normal = np.hypot(line[0], line[1])
        if normal <= TOL.eps_w:
            raise NotCollinear("finite points assigned to the ideal line")
        d_vec = np.array([-line[1], line[0]]) / normal
        x0 = np.array([-line[0] * line[2], -line[1] * line[2]]) / normal**2
        for p, isideal in zip(pts, ideal):
            if isideal:
                params.append(np.array([0.0, float(np.dot(d_vec, p[:2]))]))
            else:
                xy = p[:2] / p[2]
                params.append(np.array([1.0, float(np.dot(d_vec, xy - x0))]))

    # scale-free homogeneous 1-D coordinates
    params = [v / np.linalg.norm(v) for v in params]

    def det2(u, v):
        return u[0] * v[1] - v[0] * u[1]

    pa, pb, pc, pd = params
    num = det2(pa, pc) * det2(pb, pd)
    den_ad, den_bc = det2(pa, pd), det2(pb, pc)
    if abs(den_ad) < eps_den or abs(den_bc) < eps_den:
        raise DegenerateQuadruple("cross-ratio denominator vanishes")
    return float(num / (den_ad * den_bc))


# --------------------------------------------------------------------------
# vanishing geometry
# --------------------------------------------------------------------------

def _hartley_normalization(xy: np.ndarray) -> np.ndarray:
    """Similarity T moving the centroid to the origin and the RMS radius
    to sqrt(2). Returns the 3x3 matrix."""
    centroid = xy.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum((xy - centroid) ** 2, axis=1)))
    if rms <= 1e-15:
        raise DegenerateConfiguration("points are coincident; cannot normalize")
    s = np.sqrt(2.0) / rms
    return np.array([
        [s, 0.0, -s * centroid[0]],
        [0.0, s, -s * centroid[1]],
        [0.0, 0.0, 1.0],
    ])


Segment = tuple[HomogPoint2, HomogPoint2]


def fit_vanishing_point(segments: Sequence[Segment]) -> tuple[HomogPoint2, float]:
    """Least-squares meeting point of the segments' support lines.

    Minimizes the summed squared incidences of unit-normalized lines in a
    Hartley-normalized frame (smallest-singular-vector solution). Returns
    the point and an RMS incidence residual in normalized units.
    """
    if len(segments) < 2:
        raise InsufficientSegments(f"need >= 2 segments, got {len(segments)}")
    endpoints = []
    for p, q in segments:
        if p.is_ideal or q.is_ideal:
            raise DegenerateConfiguration("segment endpoints must be finite")
        endpoints.append(p.xy())
        endpoints.append(q.xy())
    t = _hartley_normalization(np.asarray(endpoints))
    tinv = np.linalg.inv(t)

    rows = []
    for p, q in segments:
        pn = t @ np.append(p.xy(), 1.0)
        qn = t @ np.append(q.xy(), 1.0)
        ln = np.cross(pn, qn)
        norm = np.linalg.norm(ln)
        if norm <= 1e-14:
            raise CoincidentPoints("zero-length segment")
        rows.append(ln / norm)
    a = np.stack(rows)
    _, s, vt = np.linalg.svd(a)
    if s[1] <= 1e-12 * s[0]:
        raise DegenerateBundle("segments share a support line")
    v = vt[-1]
    residual = float(np.sqrt(np.mean((a @ v) ** 2)))
    return HomogPoint2(canonical_vector(tinv @ v)), residual


def vanishing_line(v1: HomogPoint2, v2: HomogPoint2) -> HomogLine2:
    """Join of two vanishing points of a plane."""
    return line_through(v1, v2)


# --------------------------------------------------------------------------
# DLT homography
# --------------------------------------------------------------------------

def dlt_homography(matches: Sequence[Correspondence]) -> Homography:
    """Normalized direct linear transform from >= 4 correspondences.

    Both sides are Hartley-normalized; the result is denormalized and
    returned in canonical form (unit Frobenius, fixed sign).
    """
    if len(matches) < 4:
        raise InsufficientMatches(f"need >= 4 matches, got {len(matches)}")
    for m in matches:
        if m.x1.is_ideal or m.x2.is_ideal:
            raise DegenerateConfiguration("DLT requires finite points")

    src = np.asarray([m.x1.xy() for m in matches])
    dst = np.asarray([m.x2.xy() for m in matches])
    t1 = _hartley_normalization(src)
    t2 = _hartley_normalization(dst)

    rows = []
    for (sx, sy), (dx, dy) in zip(src, dst):
        x, y, _ = t1 @ (sx, sy, 1.0)
        u, v, _ = t2 @ (dx, dy, 1.0)
        rows.append([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v])
        rows.append([x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u])
    a = np.asarray(rows)
    _, s, vt = np.linalg.svd(a)
    if s[7] <= 1e-10 * s[0]:
        raise DegenerateConfiguration(
            "matches under-determine the homography (collinear or repeated points)")
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.solve(t2, hn) @ t1
    if abs(np.linalg.det(h / np.linalg.norm(h))) <= TOL.eps_det:
        raise DegenerateConfiguration("estimated homography is singular")
    return Homography(canonical_matrix(h))


def symmetric_transfer_distance(h: Homography, m: Correspondence) -> float:
    """Forward plus backward pixel transfer error of one correspondence."""
    hinv = np.linalg.inv(h.H)
    fwd = h.H @ m.x1.h
    bwd = hinv @ m.x2.h
    if abs(fwd[2]) <= TOL.eps_w * np.linalg.norm(fwd) or \
       abs(bwd[2]) <= TOL.eps_w * np.linalg.norm(bwd):
        return float("inf")
    d1 = np.linalg.norm(fwd[:2] / fwd[2] - m.x2.xy())
    d2 = np.linalg.norm(bwd[:2] / bwd[2] - m.x1.xy())
    return float(d1 + d2)


# --------------------------------------------------------------------------
# conics
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Conic:
    """Plane conic a x^2 + b xy + c y^2 + d x + e y + f = 0."""

    coeffs: tuple[float, float, float, float, float, float]

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if len(c) != 6:
            raise ValueError("conic needs 6 coefficients")
        if not all(np.isfinite(c)):
            raise ValueError("non-finite conic coefficients")
        if all(v == 0.0 for v in c):
            raise ValueError("zero conic")
        object.__setattr__(self, "coeffs", c)

    @staticmethod
    def from_matrix(m: np.ndarray) -> "Conic":
        m = np.asarray(m, dtype=float)
        m = 0.5 * (m + m.T)
        return Conic((m[0, 0], 2 * m[0, 1], m[1, 1], 2 * m[0, 2], 2 * m[1, 2], m[2, 2]))

    @property
    def matrix(self) -> np.ndarray:
        a, b, c, d, e, f = self.coeffs
        return np.array([
            [a, b / 2.0, d / 2.0],
            [b / 2.0, c, e / 2.0],
            [d / 2.0, e / 2.0, f],
        ])

    def canonical(self) -> "Conic":
        return Conic.from_matrix(canonical_matrix(self.matrix))

    def point_residual(self, p: HomogPoint2) -> float:
        """|p^T C p| with unit-normalized point and unit-Frobenius matrix."""
        m = canonical_matrix(self.matrix)
        v = canonical_vector(p.h)
        return float(abs(v @ m @ v))

    def transform(self, h: Homography) -> "Conic":
        """Image of the conic under x' = H x (C' = H^-T C H^-1)."""
        hinv = np.linalg.inv(h.H)
        return Conic.from_matrix(canonical_matrix(hinv.T @ self.matrix @ hinv))

    def is_degenerate(self, tol: float = 1e-10) -> bool:
        # scale-invariant rank test; a determinant threshold misfires on
        # well-conditioned conics far from the coordinate origin
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        return sv[2] <= tol * sv[0]

    def proportional_to(self, other: "Conic", tol: float = 1e-9) -> bool:
        return proportional(self.matrix, other.matrix, tol)

    def __repr__(self):
        return f"Conic{self.coeffs}"


def fit_conic(points: Sequence[HomogPoint2]) -> tuple[Conic, float]:
    """Algebraic least-squares conic through >= 5 finite points.

    Solves the Hartley-normalized design system by SVD and denormalizes.
    Returns the conic and the RMS algebraic residual in normalized units.
    """
    if len(points) < 5:
        raise InsufficientPoints(f"need >= 5 points, got {len(points)}")
    xy = []
    for p in points:
        if p.is_ideal:
            raise DegenerateConfiguration("conic fit requires finite points")
        xy.append(p.xy())
    xy = np.asarray(xy)
    t = _hartley_normalization(xy)
    pn = (t @ np.column_stack([xy, np.ones(len(xy))]).T).T
    x, y = pn[:, 0], pn[:, 1]
    a = np.column_stack([x * x, x * y, y * y, x, y, np.ones_like(x)])
    _, s, vt = np.linalg.svd(a)
    if s[4] <= 1e-10 * s[0]:
        raise DegenerateConic(
            "points do not determine a unique conic (on <= 2 lines?)")
    coeffs = vt[-1]
    cn = np.array([
        [coeffs[0], coeffs[1] / 2, coeffs[3] / 2],
        [coeffs[1] / 2, coeffs[2], coeffs[4] / 2],
        [coeffs[3] / 2, coeffs[4] / 2, coeffs[5]],
    ])
    c = t.T @ cn @ t
    residual = float(np.sqrt(np.mean((a @ coeffs) ** 2)))
    fitted = Conic.from_matrix(canonical_matrix(c))
    if fitted.is_degenerate():
        raise DegenerateConic("fitted conic is a line pair")
    return fitted, residual


# --------------------------------------------------------------------------
# conic intersections
# --------------------------------------------------------------------------

def _canonical_complex(v: np.ndarray) -> np.ndarray:
    """Scale a complex 3-vector so the largest-|.| component is 1."""
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0.0:
        raise NumericalBreakdown("zero intersection point")
    v = v / v[k]
    return v / np.linalg.norm(v)


def _points_on_line_complex(l: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two independent points spanning a (possibly complex) line."""
    basis = np.eye(3)
    cands = [np.cross(l, e) for e in basis]
    norms = [np.linalg.norm(c) for c in cands]
    order = np.argsort(norms)[::-1]
    p1 = cands[order[0]]
    for k in order[1:]:
        p2 = cands[k]
        if np.linalg.norm(np.cross(p1, p2)) > 1e-12 * (np.linalg.norm(p1) * np.linalg.norm(p2)):
            return p1, p2
    raise NumericalBreakdown("could not span the line")


def _line_conic_points(l: np.ndarray, c: np.ndarray) -> list[np.ndarray]:
    """The two (complex, possibly repeated) meets of line l with conic c."""
    p1, p2 = _points_on_line_complex(l)
    a2 = p2 @ c @ p2
    a1 = 2.0 * (p1 @ c @ p2)
    a0 = p1 @ c @ p1
    scale = max(abs(a2), abs(a1), abs(a0))
    if scale == 0.0:
        raise NumericalBreakdown("line lies on the conic")
    a2, a1, a0 = a2 / scale, a1 / scale, a0 / scale
    if abs(a2) < 1e-13:
        # p2 itself is on the conic; the finite root gives the other point
        if abs(a1) < 1e-13:
            raise NumericalBreakdown("degenerate line-conic intersection")
        return [np.asarray(p2, dtype=complex), p1 + (-a0 / a1) * p2]
    disc = np.lib.scimath.sqrt(a1 * a1 - 4.0 * a2 * a0)
    roots = [(-a1 + disc) / (2 * a2), (-a1 - disc) / (2 * a2)]
    return [p1 + r * p2 for r in roots]


def _split_degenerate_conic(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a rank <= 2 (complex symmetric) conic into its two lines."""
    u, s, vh = np.linalg.svd(d)
    if s[1] <= 1e-10 * s[0]:
        # rank 1: a repeated line
        cols = [d[:, k] for k in range(3)]
        l = max(cols, key=np.linalg.norm)
        return l, l.copy()
    p = np.conj(vh[-1])  # null vector: the meet of the two lines
    # parameterize a line avoiding p, take the conic's two points on it
    basis = list(np.eye(3, dtype=complex))
    best = max(
        [(a, b) for i, a in enumerate(basis) for b in basis[i + 1:]],
        key=lambda ab: abs(np.linalg.det(np.column_stack([ab[0], ab[1], p]))),
    )
    a, b = best
    qa = b @ d @ b
    qb = 2.0 * (a @ d @ b)
    qc = a @ d @ a
    if abs(qa) < 1e-13 * max(1.0, abs(qb), abs(qc)):
        q1 = b
        q2 = a + (-qc / qb) * b if abs(qb) > 1e-13 else a
    else:
        disc = np.lib.scimath.sqrt(qb * qb - 4.0 * qa * qc)
        r1 = (-qb + disc) / (2 * qa)
        r2 = (-qb - disc) / (2 * qa)
        q1, q2 = a + r1 * b, a + r2 * b
    l1 = np.cross(p, q1)
    l2 = np.cross(p, q2)
    if np.linalg.norm(l1) < 1e-13 or np.linalg.norm(l2) < 1e-13:
        raise NumericalBreakdown("conic splitting failed")
    return l1, l2


@dataclass(frozen=True, eq=False)
class ConicIntersections:
    """The four (complex) meets of two conics.

    points: canonicalized complex 3-vectors, length 4 with multiplicity.
    real_indices: indices of points proportional to real vectors.
    conjugate_pairs: index pairs (i, j) with points[i] ~ conj(points[j]).
    candidate_pair: the conjugate pair flagged as the likely image of the
        circular points, or None when two pairs tie (caller disambiguates).
    """

    points: tuple
    real_indices: tuple
    conjugate_pairs: tuple
    candidate_pair: Optional[tuple]


def conic_intersections(c1: Conic, c2: Conic) -> ConicIntersections:
    """All four intersection points of two non-degenerate conics.

    Works in complex arithmetic: finds a degenerate member of the pencil
    det(C1 + t C2) = 0, splits it into two lines and meets them with C1.
    """
    m1 = canonical_matrix(c1.matrix)
    m2 = canonical_matrix(c2.matrix)
    if c1.is_degenerate() or c2.is_degenerate():
        raise DegenerateConic("pencil intersection needs non-degenerate conics")
    if proportional(m1, m2, 1e-12):
        raise CoincidentConics("conics coincide; intersection is the whole conic")

    # cubic det(C1 + t C2) via interpolation at 4 nodes
    nodes = np.array([0.0, 1.0, -1.0, 2.0])
    vals = [np.linalg.det(m1 + t * m2) for t in nodes]
    coeffs = np.polyfit(nodes, vals, 3)
    roots = np.roots(coeffs)
    if len(roots) == 0:
        raise NumericalBreakdown("pencil cubic has no roots")

    # prefer the root giving the cleanest rank-2 member
    def rank2_quality(t):
        d = m1 + complex(t) * m2
        s = np.linalg.svd(d, compute_uv=False)
        return (s[2] / s[0], -(s[1] / s[0]))

    root = min(roots, key=rank2_quality)
    d = m1.astype(complex) + complex(root) * m2.astype(complex)
    l1, l2 = _split_degenerate_conic(d)

    pts = []
    for l in (l1, l2):
        pts.extend(_line_conic_points(l, m1.astype(complex)))
    if len(pts) != 4:
        raise NumericalBreakdown("expected 4 intersection points")
    pts = [_canonical_complex(p) for p in pts]

    real_idx = [i for i, p in enumerate(pts)
                if np.linalg.norm(np.imag(p)) <= 1e-8]
    pairs = []
    used = set()
    for i in range(4):
        if i in used or i in real_idx:
            continue
        for j in range(i + 1, 4):
            if j in used or j in real_idx:
                continue
            if np.linalg.norm(pts[i] - np.conj(pts[j])) <= 1e-6 or \
               np.linalg.norm(pts[i] + np.conj(pts[j])) <= 1e-6:
                pairs.append((i, j))
                used.update((i, j))
                break

    # distinct non-real conjugate pairs; a unique one is the circular-point
    # candidate, two (disjoint-circle case) leave the choice to the caller
    distinct = []
    for (i, j) in pairs:
        if not any(np.linalg.norm(pts[i] - pts[a]) <= 1e-8 and
                   np.linalg.norm(pts[j] - pts[b]) <= 1e-8
                   for (a, b) in distinct):
            distinct.append((i, j))
    candidate = pairs[0] if len(distinct) == 1 and pairs else None

    return ConicIntersections(
        points=tuple(pts),
        real_indices=tuple(real_idx),
        conjugate_pairs=tuple(pairs),
        candidate_pair=candidate,
    )
