"""Composite detection from two photographs of the same scene.

When the camera only rotates or zooms between exposures, the views are
linked by a plane projective map: warping one view onto the other and
correlating windows exposes regions that were edited in. When the camera
moves, corresponding points still obey the epipolar constraint, so
matches far from their epipolar lines flag tampered content. Both
relations are estimated robustly from user-supplied correspondences
(bucket-stratified RANSAC); nothing here detects or matches features.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.ndimage

from .camera import FundamentalMatrix, estimate_fundamental
from .errors import (
    ConfigError,
    DegenerateEpipolarLine,
    EmptyValidRegion,
    GeometryError,
    InsufficientMatches,
    NoConsensus,
    SizeMismatch,
)
from .geometry import Correspondence, HomogPoint2, Homography, dlt_homography
from .raster import ImageRaster, warp_image


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RansacConfig:
    """Sampling policy for the robust two-view estimators.

    Minimal samples are drawn at most one match per bucket of a
    bucket_grid partition of the first image's match cloud, so samples
    spread across the frame instead of clustering. The iteration count
    adapts down from max_iters once the inlier ratio supports the
    requested confidence. Identical seed and inputs give identical
    output.
    """

    max_iters: int = 2000
    inlier_tol: float = 1.5
    bucket_grid: tuple[int, int] = (8, 8)
    confidence: float = 0.995
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (self.inlier_tol > 0.0):
            raise ConfigError(f"inlier_tol must be > 0, got {self.inlier_tol}")
        rows, cols = self.bucket_grid
        if rows < 1 or cols < 1:
            raise ConfigError(f"bucket_grid must be >= 1x1, got {self.bucket_grid}")
        if not (0.0 < self.confidence < 1.0):
            raise ConfigError(
                f"confidence must lie in (0, 1), got {self.confidence}")

    @staticmethod
    def from_config(cfg) -> "RansacConfig":
        """Build from the ransac_* fields of a ForensicConfig."""
        return RansacConfig(
            max_iters=cfg.ransac_max_iters,
            inlier_tol=cfg.ransac_inlier_tol,
            bucket_grid=tuple(cfg.ransac_bucket_grid),
            confidence=cfg.ransac_confidence,
            seed=cfg.seed,
        )


@dataclass(frozen=True, eq=False)
class DifferenceMap:
    """Per-pixel dissimilarity of a warped view against the second view.

    d holds 1 - windowed correlation, in [0, 2]; validity marks pixels
    whose whole correlation window stayed inside both images' valid
    regions. d is zero wherever validity is false.
    """

    width: int
    height: int
    d: np.ndarray
    validity: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        v = np.asarray(self.validity, dtype=bool)
        shape = (int(self.height), int(self.width))
        if d.shape != shape or v.shape != shape:
            raise SizeMismatch(
                f"maps {d.shape}/{v.shape} do not match {self.width}x{self.height}")
        if not np.all(np.isfinite(d)):
            raise ValueError("difference values must be finite")
        if np.any(d < 0.0):
            raise ValueError("difference values must be >= 0")
        d = d.copy()
        d[~v] = 0.0
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "validity", v.copy())


@dataclass(frozen=True)
class RegionComponent:
    """One connected region: inclusive pixel bounds and pixel count."""

    bbox: tuple[int, int, int, int]  # (x0, y0, x1, y1), inclusive
    area: int


@dataclass(frozen=True, eq=False)
class FakeRegionMask:
    """Binary map of suspected regions plus its connected components."""

    width: int
    height: int
    mask: np.ndarray
    components: tuple[RegionComponent, ...]

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (int(self.height), int(self.width)):
            raise SizeMismatch(
                f"mask {m.shape} does not match {self.width}x{self.height}")
        comps = tuple(self.components)
        if sum(c.area for c in comps) != int(m.sum()):
            raise ValueError("components do not partition the mask pixels")
        for c in comps:
            x0, y0, x1, y1 = c.bbox
            if not (0 <= x0 <= x1 < self.width and 0 <= y0 <= y1 < self.height):
                raise ValueError(f"component bbox {c.bbox} out of bounds")
        object.__setattr__(self, "mask", m.copy())
        object.__setattr__(self, "components", comps)


# --------------------------------------------------------------------------
# robust estimation
# --------------------------------------------------------------------------

def _match_arrays(matches: Sequence[Correspondence]) -> tuple[np.ndarray, np.ndarray]:
    x1 = np.stack([m.x1.xy() for m in matches])
    x2 = np.stack([m.x2.xy() for m in matches])
    return x1, x2


def _bucket_ids(pts: np.ndarray, grid: tuple[int, int]) -> np.ndarray:
    """Bucket index of each point on a grid over the cloud's bounding box."""
    rows, cols = grid
    lo = pts.min(axis=0)
    span = np.maximum(pts.max(axis=0) - lo, 1e-12)
    c = np.minimum((pts[:, 0] - lo[0]) / span[0] * cols, cols - 1).astype(int)
    r = np.minimum((pts[:, 1] - lo[1]) / span[1] * rows, rows - 1).astype(int)
    return r * cols + c


def _draw_sample(rng: np.random.Generator, buckets: list[np.ndarray],
                 n: int, k: int) -> np.ndarray:
    """k match indices, at most one per bucket when enough buckets exist."""
    if len(buckets) >= k:
        sizes = np.array([len(b) for b in buckets], dtype=float)
        chosen = rng.choice(len(buckets), size=k, replace=False,
                            p=sizes / sizes.sum())
        return np.array([b[rng.integers(len(b))]
                         for b in (buckets[i] for i in chosen)])
    return rng.choice(n, size=k, replace=False)


def _adaptive_iters(ratio: float, k: int, confidence: float, cap: int) -> int:
    """Samples needed to hit an all-inlier draw with the given confidence."""
    if ratio >= 1.0:
        return 1
    miss = 1.0 - ratio ** k
    if miss >= 1.0 - 1e-15:
        return cap
    need = np.log(1.0 - confidence) / np.log(miss)
    return int(min(cap, np.ceil(need)))


def _ransac(matches: Sequence[Correspondence], cfg: RansacConfig, k: int,
            fit: Callable, distances: Callable) -> np.ndarray:
    """Best-consensus inlier index set for a k-point minimal model."""
    n = len(matches)
    x1, _ = _match_arrays(matches)
    ids = _bucket_ids(x1, cfg.bucket_grid)
    buckets = [np.flatnonzero(ids == b) for b in np.unique(ids)]
    rng = np.random.default_rng(cfg.seed)

    best_count = 0
    best_inliers: Optional[np.ndarray] = None
    needed = cfg.max_iters
    it = 0
    while it < needed:
        it += 1
        sample = _draw_sample(rng, buckets, n, k)
        try:
            model = fit([matches[i] for i in sample])
        except GeometryError:
            continue
        inliers = np.flatnonzero(distances(model) <= cfg.inlier_tol)
        if len(inliers) > best_count:
            best_count = len(inliers)
            best_inliers = inliers
            needed = min(needed, _adaptive_iters(
                best_count / n, k, cfg.confidence, cfg.max_iters))

    # A minimal sample always explains itself; demand genuine consensus
    # beyond that before trusting the model.
    floor = min(1.0, k / n + 0.05)
    if best_inliers is None or best_count / n < floor:
        raise NoConsensus(
            f"best inlier ratio {best_count / n:.3f} below {floor:.3f}")
    return best_inliers


def _transfer_distances(h: Homography, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Vectorized symmetric transfer distance (forward + backward pixels)."""
    m = h.H
    minv = np.linalg.inv(m)
    ones = np.ones((len(x1), 1))
    fwd = np.column_stack([x1, ones]) @ m.T
    bwd = np.column_stack([x2, ones]) @ minv.T
    out = np.full(len(x1), np.inf)
    ok = (np.abs(fwd[:, 2]) > 1e-12 * np.linalg.norm(fwd, axis=1)) & \
         (np.abs(bwd[:, 2]) > 1e-12 * np.linalg.norm(bwd, axis=1))
    d1 = np.linalg.norm(fwd[ok, :2] / fwd[ok, 2:] - x2[ok], axis=1)
    d2 = np.linalg.norm(bwd[ok, :2] / bwd[ok, 2:] - x1[ok], axis=1)
    out[ok] = d1 + d2
    return out


def ransac_homography(matches: Sequence[Correspondence],
                      cfg: RansacConfig) -> tuple[Homography, np.ndarray]:
    """Robust plane projective map between two views of a static scene.

    Minimal 4-point samples are drawn bucket-stratified; the consensus
    model maximizes the count of matches whose symmetric transfer
    distance (forward plus backward pixel error, as in
    geometry.symmetric_transfer_distance) stays within cfg.inlier_tol.
    The returned map is re-fit by dlt_homography on the winning inliers,
    whose sorted indices are returned alongside it.
    """
    if len(matches) < 4:
        raise InsufficientMatches(f"need >= 4 matches, got {len(matches)}")
    x1, x2 = _match_arrays(matches)
    inliers = _ransac(matches, cfg, 4, dlt_homography,
                      lambda h: _transfer_distances(h, x1, x2))
    h = dlt_homography([matches[i] for i in inliers])
    return h, np.sort(inliers)


def _sampson_distances(f: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """First-order geometric distance of each match to the epipolar constraint."""
    h1 = np.column_stack([x1, np.ones(len(x1))])
    h2 = np.column_stack([x2, np.ones(len(x2))])
    fx1 = h1 @ f.T
    ftx2 = h2 @ f
    val = np.einsum("ij,ij->i", h2, fx1)
    g2 = fx1[:, 0] ** 2 + fx1[:, 1] ** 2 + ftx2[:, 0] ** 2 + ftx2[:, 1] ** 2
    return np.abs(val) / np.sqrt(np.maximum(g2, 1e-300))


def _refine_fundamental(f0: np.ndarray, x1: np.ndarray,
                        x2: np.ndarray) -> np.ndarray:
    """Reweighted linear refinement of the summed squared Sampson distance.

    Each pass re-solves the epipolar design system with every match
    weighted by the inverse gradient norm of the current estimate, which
    makes the algebraic least squares track the Sampson cost; stops when
    the cost's relative change drops below 1e-10 or after 100 passes.
    """
    h1 = np.column_stack([x1, np.ones(len(x1))])
    h2 = np.column_stack([x2, np.ones(len(x2))])
    a = np.column_stack([
        h2[:, 0] * h1[:, 0], h2[:, 0] * h1[:, 1], h2[:, 0],
        h2[:, 1] * h1[:, 0], h2[:, 1] * h1[:, 1], h2[:, 1],
        h1[:, 0], h1[:, 1], h1[:, 2],
    ])
    scale = np.linalg.norm(a, axis=0)
    f = f0 / np.linalg.norm(f0)
    cost = float(np.sum(_sampson_distances(f, x1, x2) ** 2))
    for _ in range(100):
        fx1 = h1 @ f.T
        ftx2 = h2 @ f
        g2 = fx1[:, 0] ** 2 + fx1[:, 1] ** 2 + ftx2[:, 0] ** 2 + ftx2[:, 1] ** 2
        w = 1.0 / np.sqrt(np.maximum(g2, 1e-300))
        _, _, vt = np.linalg.svd((a * w[:, None]) / scale)
        cand = (vt[-1] / scale).reshape(3, 3)
        cand = cand / np.linalg.norm(cand)
        new_cost = float(np.sum(_sampson_distances(cand, x1, x2) ** 2))
        if new_cost > cost:
            break
        improved = cost - new_cost
        f, cost = cand, new_cost
        if improved <= 1e-10 * max(cost, 1e-300):
            break
    return f


def ransac_fundamental(matches: Sequence[Correspondence],
                       cfg: RansacConfig) -> tuple[FundamentalMatrix, np.ndarray]:
    """Robust epipolar constraint between two views of a static scene.

    Minimal 8-point samples are drawn bucket-stratified and solved with
    the normalized eight-point estimator; consensus uses the Sampson
    distance against cfg.inlier_tol. The winning inlier set seeds a
    reweighted refinement of the summed squared Sampson distance, and
    the refined matrix is re-projected to rank two.
    """
    if len(matches) < 8:
        raise InsufficientMatches(f"need >= 8 matches, got {len(matches)}")
    x1, x2 = _match_arrays(matches)
    inliers = _ransac(matches, cfg, 8, estimate_fundamental,
                      lambda fm: _sampson_distances(fm.F, x1, x2))
    f0 = estimate_fundamental([matches[i] for i in inliers]).F
    f = _refine_fundamental(f0, x1[inliers], x2[inliers])
    return FundamentalMatrix(f), np.sort(inliers)


# --------------------------------------------------------------------------
# warp-difference pipeline
# --------------------------------------------------------------------------

def difference_map(i1: ImageRaster, i2: ImageRaster, h: Homography,
                   window: int = 7) -> DifferenceMap:
    """Windowed-correlation dissimilarity between h-warped i1 and i2.

    i1 is warped into i2's frame by h; per pixel, d = 1 - NCC of the
    (2*window+1)^2 grayscale neighborhoods, so d is 0 for identical
    content and 2 for anticorrelated content. Pixels whose window
    touches warp-invalid or out-of-frame samples are marked invalid;
    windows with (near-)zero variance in either image count as
    consistent (d = 0).
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if (i1.width, i1.height) != (i2.width, i2.height):
        raise SizeMismatch(
            f"image sizes {i1.width}x{i1.height} and {i2.width}x{i2.height} differ")
    warped = warp_image(i1, h, out_size=(i2.width, i2.height))
    g1 = warped.luma()
    g2 = i2.luma()
    joint = warped.valid & i2.valid

    size = 2 * window + 1
    validity = scipy.ndimage.minimum_filter(
        joint, size=size, mode="constant", cval=False)

    def box(img):
        return scipy.ndimage.uniform_filter(img, size=size, mode="constant")

    m1, m2 = box(g1), box(g2)
    var1 = np.maximum(box(g1 * g1) - m1 * m1, 0.0)
    var2 = np.maximum(box(g2 * g2) - m2 * m2, 0.0)
    cov = box(g1 * g2) - m1 * m2

    flat = (var1 <= 1e-12) | (var2 <= 1e-12)
    denom = np.sqrt(np.where(flat, 1.0, var1 * var2))
    ncc = np.clip(cov / denom, -1.0, 1.0)
    d = 1.0 - ncc
    d[flat] = 0.0
    d[~validity] = 0.0
    return DifferenceMap(width=i2.width, height=i2.height, d=d,
                         validity=validity)


def _components_from_mask(mask: np.ndarray,
                          min_area: int = 0) -> tuple[np.ndarray, tuple[RegionComponent, ...]]:
    """8-connected components; regions below min_area are erased."""
    labels, count = scipy.ndimage.label(mask, structure=np.ones((3, 3)))
    comps = []
    out = mask.copy()
    if count:
        areas = scipy.ndimage.sum_labels(
            np.ones_like(mask, dtype=int), labels, index=np.arange(1, count + 1))
        slices = scipy.ndimage.find_objects(labels)
        for i, (area, sl) in enumerate(zip(areas, slices), start=1):
            if area < min_area:
                out[labels == i] = False
                continue
            comps.append(RegionComponent(
                bbox=(sl[1].start, sl[0].start, sl[1].stop - 1, sl[0].stop - 1),
                area=int(area)))
    return out, tuple(comps)


def fake_mask_from_difference(d: DifferenceMap, c: float = 0.45,
                              min_area: int = 25,
                              d_floor: float = 0.1) -> FakeRegionMask:
    """Threshold a difference map at (its valid maximum minus c).

    Values of c between 0.3 and 0.6 are the calibrated range; anything
    outside is allowed but warned about. When even the largest valid
    difference stays below d_floor the pair counts as authentic and the
    mask is empty (thresholding relative to the maximum would otherwise
    always pick out noise). Connected regions (8-connectivity) smaller
    than min_area pixels are dropped from both the mask and the
    component list.
    """
    if not (0.3 <= c <= 0.6):
        warnings.warn(
            f"threshold offset c={c} lies outside the calibrated range [0.3, 0.6]",
            stacklevel=2)
    valid = d.validity
    if not valid.any():
        raise EmptyValidRegion("difference map has no valid pixels")
    dmax = float(d.d[valid].max())
    if dmax < d_floor:
        empty = np.zeros_like(valid)
        return FakeRegionMask(width=d.width, height=d.height, mask=empty,
                              components=())
    t = dmax - c
    mask = valid & (d.d > t)
    mask, comps = _components_from_mask(mask, min_area=min_area)
    return FakeRegionMask(width=d.width, height=d.height, mask=mask,
                          components=comps)


# --------------------------------------------------------------------------
# epipolar pipeline
# --------------------------------------------------------------------------

def epipolar_distance(x1: HomogPoint2, x2: HomogPoint2,
                      f: FundamentalMatrix) -> float:
    """Pixel distance from x2 to the epipolar line of x1.

    The ratio |x2' F x1| over the line-normal norm is invariant to
    rescaling F or either point. Undefined when x1 sits at the epipole
    (the line vanishes) or maps to the line at infinity.
    """
    l = f.F @ x1.h
    nrm = float(np.hypot(l[0], l[1]))
    if nrm <= 1e-12 * np.linalg.norm(f.F) * np.linalg.norm(x1.h):
        raise DegenerateEpipolarLine(
            "epipolar line has no finite normal (point at the epipole?)")
    xy = x2.xy()
    return float(abs(l[0] * xy[0] + l[1] * xy[1] + l[2]) / nrm)


def fake_candidates(matches: Sequence[Correspondence], f: FundamentalMatrix,
                    t: float = 3.0, dilation_radius: float = 12.0,
                    size: Optional[tuple[int, int]] = None,
                    ) -> tuple[np.ndarray, FakeRegionMask]:
    """Matches breaking the epipolar constraint, dilated into regions.

    Returns the sorted indices of matches whose epipolar distance
    exceeds t, plus a mask that unions a disk of dilation_radius around
    each flagged match's second-view position so dense violations fuse
    into connected regions. size fixes the mask canvas as (width,
    height); when omitted the canvas grows to cover every second-view
    point plus the dilation radius.
    """
    if not (t > 0.0):
        raise ValueError(f"threshold must be > 0, got {t}")
    if not (dilation_radius > 0.0):
        raise ValueError(f"dilation radius must be > 0, got {dilation_radius}")
    dists = np.array([epipolar_distance(m.x1, m.x2, f) for m in matches])
    psi = np.flatnonzero(dists > t)

    if size is not None:
        width, height = int(size[0]), int(size[1])
    elif len(matches):
        _, x2 = _match_arrays(matches)
        width = int(np.ceil(x2[:, 0].max() + dilation_radius)) + 1
        height = int(np.ceil(x2[:, 1].max() + dilation_radius)) + 1
    else:
        width = height = 1
    width, height = max(width, 1), max(height, 1)

    mask = np.zeros((height, width), dtype=bool)
    r = dilation_radius
    for i in psi:
        cx, cy = matches[i].x2.xy()
        xa = max(int(np.floor(cx - r)), 0)
        xb = min(int(np.ceil(cx + r)), width - 1)
        ya = max(int(np.floor(cy - r)), 0)
        yb = min(int(np.ceil(cy + r)), height - 1)
        if xa > xb or ya > yb:
            continue
        ys, xs = np.mgrid[ya:yb + 1, xa:xb + 1]
        disk = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
        mask[ya:yb + 1, xa:xb + 1] |= disk
    mask, comps = _components_from_mask(mask)
    return psi, FakeRegionMask(width=width, height=height, mask=mask,
                               components=comps)
