"""Cast-shadow consistency via the fixed structure of the shadow map.

Under a point light (finite or at infinity), the tops of upright objects
and the tips of their cast shadows correspond by a plane projective map
with a line of fixed points — the ground trace through the object feet —
and a fixed vertex at the imaged light. Two or more objects overdetermine
that map, so each annotated top/foot/shadow triple can be checked against
the others: the join of tops and the join of shadow tips must meet on the
foot line, and the characteristic cross ratio measured through the vertex
must agree across objects. A pasted object whose shadow was not cast by
the scene's light breaks one or both.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, Thresholds
from .errors import DegenerateTriples, InsufficientTriples, VertexOnAxis
from .geometry import (
    HomogLine2,
    HomogPoint2,
    Homography,
    cross_ratio,
    line_through,
    meet,
)


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ShadowTriple:
    """Annotated upright object: top, foot on the ground, shadow of the top."""

    t: HomogPoint2
    f: HomogPoint2
    s: HomogPoint2
    label: str = ""

    def __post_init__(self):
        pairs = (("t", "f", self.t, self.f), ("t", "s", self.t, self.s),
                 ("f", "s", self.f, self.s))
        for na, nb, a, b in pairs:
            if a.proportional_to(b, 1e-12):
                raise DegenerateTriples(
                    f"triple {self.label!r}: {na} and {nb} coincide")

    @staticmethod
    def from_xy(t, f, s, label: str = "") -> "ShadowTriple":
        return ShadowTriple(HomogPoint2.from_xy(*t), HomogPoint2.from_xy(*f),
                            HomogPoint2.from_xy(*s), label=label)


@dataclass(frozen=True, eq=False)
class PlanarHomology:
    """Fixed vertex, fixed-point line, and characteristic cross ratio."""

    vertex: HomogPoint2
    axis: HomogLine2
    mu: float

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu == 0.0:
            raise ValueError(f"cross ratio must be finite and nonzero, got {self.mu}")
        v = self.vertex.h / np.linalg.norm(self.vertex.h)
        l = self.axis.l / np.linalg.norm(self.axis.l)
        if abs(float(v @ l)) <= 1e-12:
            raise VertexOnAxis("vertex lies on the axis; the map is undefined")

    def to_homography(self) -> Homography:
        return build_homology(self.vertex, self.axis, self.mu)


# --------------------------------------------------------------------------
# constructions
# --------------------------------------------------------------------------

def homology_vertex(t1: ShadowTriple, t2: ShadowTriple) -> HomogPoint2:
    """Meet of the two light rays (top joined to its shadow tip).

    For a light at infinity the image rays are parallel and the vertex
    comes back ideal (check is_ideal), which is still a valid vertex.
    Coincident rays leave the vertex undefined and raise.
    """
    ray1 = line_through(t1.t, t1.s)
    ray2 = line_through(t2.t, t2.s)
    return meet(ray1, ray2)


def axis_consistency_residual(t1: ShadowTriple, t2: ShadowTriple) -> float:
    """How far the joins of tops and of shadow tips meet from the foot line.

    The join of the two tops and the join of the two shadow tips must
    intersect on the line through the two feet. Every factor is unit
    normalized, so the returned magnitude is scale-free in [0, 1] and is
    0 for consistent shadows.
    """
    def unit(v, what):
        n = np.linalg.norm(v)
        if n <= 1e-12:
            raise DegenerateTriples(what)
        return v / n

    tt = [unit(p.h, "zero point") for p in (t1.t, t2.t)]
    ss = [unit(p.h, "zero point") for p in (t1.s, t2.s)]
    ff = [unit(p.h, "zero point") for p in (t1.f, t2.f)]
    tops = unit(np.cross(tt[1], tt[0]), "tops coincide; their join is undefined")
    tips = unit(np.cross(ss[1], ss[0]), "shadow tips coincide; their join is undefined")
    feet = unit(np.cross(ff[1], ff[0]), "feet coincide; their join is undefined")
    crossing = unit(np.cross(tops, tips),
                    "top and shadow joins coincide; no unique crossing")
    return float(abs(crossing @ feet))


def homology_cross_ratio(tr: ShadowTriple, vertex: HomogPoint2,
                         axis: HomogLine2) -> float:
    """Characteristic cross ratio of one triple through a given vertex/axis.

    The light ray through (vertex, top) meets the axis at i; the cross
    ratio of the quadruple (vertex, i, top, shadow) — evaluated with this
    library's cr(a, b; c, d) = (ac)(bd)/((ad)(bc)) convention — recovers
    the mu of the shadow map built from that mu (see build_homology).
    """
    ray = line_through(vertex, tr.t)
    i = meet(ray, axis)
    return cross_ratio(vertex, i, tr.t, tr.s)


def build_homology(vertex: HomogPoint2, axis: HomogLine2, mu: float) -> Homography:
    """Plane map with the given fixed vertex, fixed line, and cross ratio.

    H = I + (mu - 1) v l^T / (v . l): the vertex is an eigenvector with
    eigenvalue mu, every axis point is fixed, det(H) = mu, and mu = 1
    collapses to the identity.
    """
    if not np.isfinite(mu) or mu == 0.0:
        raise ValueError(f"cross ratio must be finite and nonzero, got {mu}")
    v = vertex.h
    l = axis.l
    vl = float(v @ l)
    if abs(vl) <= 1e-12 * np.linalg.norm(v) * np.linalg.norm(l):
        raise VertexOnAxis("vertex lies on the axis; the map is undefined")
    return Homography(np.eye(3) + (mu - 1.0) * np.outer(v, l) / vl)


def feet_axis(triples: Sequence[ShadowTriple]) -> tuple[HomogLine2, np.ndarray]:
    """Total-least-squares line through all feet, with per-foot pixel
    residuals. For two triples this is their exact join."""
    if len(triples) < 2:
        raise InsufficientTriples(f"need >= 2 triples, got {len(triples)}")
    feet = np.stack([tr.f.xy() for tr in triples])
    centroid = feet.mean(axis=0)
    centered = feet - centroid
    _, svals, vt = np.linalg.svd(centered)
    if len(triples) > 2 and svals[0] <= 1e-12:
        raise DegenerateTriples("all feet coincide; the ground trace is undefined")
    normal = vt[-1]
    line = HomogLine2(np.array([normal[0], normal[1],
                                -float(normal @ centroid)]))
    residuals = np.abs(centered @ normal)
    return line, residuals


# --------------------------------------------------------------------------
# the pairwise check
# --------------------------------------------------------------------------

def diff_ratio_pct(mu_a: float, mu_b: float) -> float:
    """|mu_a - mu_b| / max(|mu_a|, |mu_b|) as a percentage (0 when both vanish)."""
    scale = max(abs(mu_a), abs(mu_b))
    if scale == 0.0:
        return 0.0
    return float(abs(mu_a - mu_b) / scale * 100.0)


@dataclass(frozen=True)
class ShadowPairRow:
    """One pairwise comparison: cross ratios, their spread, and a verdict."""

    region_a: str
    region_b: str
    mu_a: float
    mu_b: float
    diff_ratio_pct: float
    axis_residual: float
    verdict: str


@dataclass(frozen=True, eq=False)
class ShadowCheckResult:
    """Pairwise shadow-consistency rows plus the shared ground trace."""

    axis: HomogLine2
    foot_residuals: tuple[float, ...]
    rows: tuple[ShadowPairRow, ...]


def shadow_composite_check(triples: Sequence[ShadowTriple],
                           thresholds: Optional[Thresholds] = None,
                           ) -> ShadowCheckResult:
    """Compare every pair of triples under the shared shadow map.

    The axis is the total-least-squares line through all feet (the exact
    join for two triples). Per pair, the vertex comes from the two light
    rays, both cross ratios are measured against the shared axis, and the
    row is "suspicious" when the cross ratios differ by more than the
    mu_diff_pct threshold (in percent) or the pair's crossing point
    misses the foot line by more than the axis_residual threshold;
    otherwise "consistent".
    """
    if len(triples) < 2:
        raise InsufficientTriples(f"need >= 2 triples, got {len(triples)}")
    th = thresholds if thresholds is not None else DEFAULT_CONFIG.thresholds
    axis, foot_residuals = feet_axis(triples)
    rows = []
    for a in range(len(triples)):
        for b in range(a + 1, len(triples)):
            ta, tb = triples[a], triples[b]
            vertex = homology_vertex(ta, tb)
            residual = axis_consistency_residual(ta, tb)
            mu_a = homology_cross_ratio(ta, vertex, axis)
            mu_b = homology_cross_ratio(tb, vertex, axis)
            diff = diff_ratio_pct(mu_a, mu_b)
            verdict = ("suspicious"
                       if diff > th.mu_diff_pct or residual > th.axis_residual
                       else "consistent")
            rows.append(ShadowPairRow(
                region_a=ta.label or f"object-{a}",
                region_b=tb.label or f"object-{b}",
                mu_a=mu_a, mu_b=mu_b, diff_ratio_pct=diff,
                axis_residual=residual, verdict=verdict))
    return ShadowCheckResult(axis=axis,
                             foot_residuals=tuple(float(r) for r in foot_residuals),
                             rows=tuple(rows))
