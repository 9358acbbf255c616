"""Synthetic scene builders for experiments and oracle-style tests.

Everything here constructs ground truth from first principles (explicit
cameras, planes, lights) so recovered quantities can be checked against
known values rather than against the estimators themselves.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import HomogLine2, HomogPoint2, Homography, canonical_vector
from .raster import ImageRaster


# --------------------------------------------------------------------------
# cameras
# --------------------------------------------------------------------------

def intrinsics(f: float, pp: tuple[float, float] = (0.0, 0.0),
               aspect: float = 1.0, skew: float = 0.0) -> np.ndarray:
    return np.array([
        [f, skew, pp[0]],
        [0.0, aspect * f, pp[1]],
        [0.0, 0.0, 1.0],
    ])


def rotation_xyz(rx: float, ry: float, rz: float) -> np.ndarray:
    cx, sx = np.cos(rx), np.sin(rx)
    cy, sy = np.cos(ry), np.sin(ry)
    cz, sz = np.cos(rz), np.sin(rz)
    mx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    my = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    mz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return mz @ my @ mx


def look_at(center: np.ndarray, target: np.ndarray,
            up: np.ndarray = np.array([0.0, 0.0, 1.0])) -> tuple[np.ndarray, np.ndarray]:
    """Camera rotation/translation with +z optical axis toward target.

    Camera frame: x right, y down, z forward; world points map by
    X_cam = R X + t.
    """
    center = np.asarray(center, dtype=float)
    fwd = np.asarray(target, dtype=float) - center
    fwd = fwd / np.linalg.norm(fwd)
    right = np.cross(fwd, up)
    if np.linalg.norm(right) < 1e-12:
        right = np.cross(fwd, np.array([0.0, 1.0, 0.0]))
    right = right / np.linalg.norm(right)
    down = np.cross(fwd, right)
    r = np.stack([right, down, fwd])
    t = -r @ center
    return r, t


@dataclass(frozen=True)
class Camera:
    k: np.ndarray
    r: np.ndarray
    t: np.ndarray

    @property
    def p(self) -> np.ndarray:
        return self.k @ np.hstack([self.r, self.t.reshape(3, 1)])

    def project(self, points_3d: np.ndarray) -> np.ndarray:
        """World points (n, 3) to pixel coordinates (n, 2)."""
        pts = np.asarray(points_3d, dtype=float).reshape(-1, 3)
        hom = self.p @ np.column_stack([pts, np.ones(len(pts))]).T
        return (hom[:2] / hom[2]).T

    def plane_homography(self) -> Homography:
        """World plane z=0 -> image: H = K [r1 r2 t]."""
        h = self.k @ np.column_stack([self.r[:, 0], self.r[:, 1], self.t])
        return Homography(h)


def camera_looking_at_plane(f: float = 1000.0, pp: tuple[float, float] = (320.0, 240.0),
                            height: float = 12.0, distance: float = 18.0,
                            azimuth: float = 0.35, target=(0.0, 0.0, 0.0),
                            aspect: float = 1.0, skew: float = 0.0) -> Camera:
    """A camera above the z=0 ground plane, looking at the target point."""
    center = np.array([
        target[0] + distance * np.cos(azimuth),
        target[1] + distance * np.sin(azimuth),
        height,
    ])
    r, t = look_at(center, np.asarray(target, dtype=float))
    return Camera(intrinsics(f, pp, aspect, skew), r, t)


# --------------------------------------------------------------------------
# rectification ground truth
# --------------------------------------------------------------------------

def stratified_homography(alpha: float, beta: float, vline: np.ndarray,
                          scale: float = 1.0, rotation: float = 0.0,
                          translation: tuple[float, float] = (0.0, 0.0)) -> Homography:
    """World -> image homography whose exact rectifier has the given strata."""
    c, s = np.cos(rotation), np.sin(rotation)
    hs = np.array([
        [scale * c, -scale * s, translation[0]],
        [scale * s, scale * c, translation[1]],
        [0.0, 0.0, 1.0],
    ])
    ha = np.array([
        [1.0 / beta, -alpha / beta, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ])
    l = canonical_vector(np.asarray(vline, dtype=float))
    hp = np.array([
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [l[0], l[1], l[2]],
    ])
    rectifier = hs @ ha @ hp
    return Homography(np.linalg.inv(rectifier))


def segment_image(h: Homography, a_world, b_world) -> tuple[HomogPoint2, HomogPoint2]:
    """Image of a world segment under a world -> image homography."""
    pa = h.apply(HomogPoint2.from_xy(*a_world))
    pb = h.apply(HomogPoint2.from_xy(*b_world))
    return pa, pb


def line_image(h: Homography, a_world, b_world) -> HomogLine2:
    from .geometry import line_through

    pa, pb = segment_image(h, a_world, b_world)
    return line_through(pa, pb)


def circle_conic(cx: float, cy: float, r: float) -> np.ndarray:
    """Conic matrix of the world circle (x-cx)^2 + (y-cy)^2 = r^2."""
    return np.array([
        [1.0, 0.0, -cx],
        [0.0, 1.0, -cy],
        [-cx, -cy, cx * cx + cy * cy - r * r],
    ])


# --------------------------------------------------------------------------
# two-camera ground truth
# --------------------------------------------------------------------------

def fundamental_from_cameras(cam1: Camera, cam2: Camera) -> np.ndarray:
    """Exact fundamental matrix of a camera pair (x2' F x1 = 0)."""
    r_rel = cam2.r @ cam1.r.T
    t_rel = cam2.t - r_rel @ cam1.t
    tx = np.array([
        [0.0, -t_rel[2], t_rel[1]],
        [t_rel[2], 0.0, -t_rel[0]],
        [-t_rel[1], t_rel[0], 0.0],
    ])
    return np.linalg.inv(cam2.k).T @ tx @ r_rel @ np.linalg.inv(cam1.k)


def limbus_points(h: Homography, center_world, n: int = 24,
                  noise: float = 0.0,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Image samples of a unit world circle under a plane homography."""
    ts = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    cx, cy = center_world
    pts = []
    for t in ts:
        p = h.apply(HomogPoint2.from_xy(cx + np.cos(t), cy + np.sin(t)))
        pts.append(p.xy())
    pts = np.asarray(pts)
    if noise > 0.0:
        if rng is None:
            raise ValueError("noise requires an rng")
        pts = pts + rng.normal(0.0, noise, size=pts.shape)
    return pts


def reprojection_chain(obliquity: float, n_views: int = 4,
                       seed: int = 0) -> list[Homography]:
    """Plane views photographed off a screen by a second, oblique camera.

    A zero-skew camera shoots a world plane from n_views poses; each shot
    is displayed flat on a screen plane and re-photographed by a second
    zero-skew camera whose optical axis is tilted by `obliquity` radians
    about an in-screen diagonal axis. The composite homographies look like
    plane views from a single camera whose effective pixel grid is
    sheared: the re-photographing leaves a skew fingerprint that grows
    with the tilt.
    """
    rng = np.random.default_rng(seed)
    first = []
    for _ in range(n_views):
        cam = camera_looking_at_plane(
            f=900.0, pp=(0.0, 0.0),
            height=rng.uniform(6.0, 14.0),
            distance=rng.uniform(10.0, 20.0),
            azimuth=rng.uniform(0.0, 2.0 * np.pi),
        )
        first.append(cam.plane_homography())

    g = screen_reprojection(obliquity)
    return [Homography(g.H @ h.H) for h in first]


def screen_reprojection(obliquity: float, f: float = 1100.0,
                        distance: float = 25.0) -> Homography:
    """Homography of a screen plane seen by a tilted re-photographing camera.

    The screen lies in the z=0 plane; the camera's optical axis is tilted
    by `obliquity` radians about an in-screen diagonal axis, so the induced
    affinity shears rather than just rescaling one direction. Composing
    this map with any displayed image mimics photographing that image off
    the screen.
    """
    axis = np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)
    c, s = np.cos(obliquity), np.sin(obliquity)
    k_ax = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    tilt = np.eye(3) + s * k_ax + (1.0 - c) * (k_ax @ k_ax)
    center = tilt @ np.array([0.0, 0.0, distance])
    r, t = look_at(center, np.array([0.0, 0.0, 0.0]),
                   up=tilt @ np.array([0.0, 1.0, 0.0]))
    second = Camera(intrinsics(f, (0.0, 0.0)), r, t)
    return second.plane_homography()


# --------------------------------------------------------------------------
# textures
# --------------------------------------------------------------------------

def smooth_texture(width: int, height: int, rng: np.random.Generator,
                   components: int = 12) -> ImageRaster:
    """Band-limited random texture: a sum of low-frequency sinusoids.

    Smooth enough for bilinear warps to stay faithful, structured enough
    for windowed correlation to lock on.
    """
    xs, ys = np.meshgrid(np.arange(width, dtype=float),
                         np.arange(height, dtype=float))
    img = np.zeros((height, width))
    for _ in range(components):
        fx, fy = rng.uniform(0.005, 0.05, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(0.3, 1.0)
        img += amp * np.sin(2 * np.pi * (fx * xs + fy * ys) + phase)
    lo, hi = img.min(), img.max()
    img = (img - lo) / max(hi - lo, 1e-9)
    return ImageRaster.from_array(0.05 + 0.9 * img)


def paste_patch(img: ImageRaster, x0: int, y0: int, patch: ImageRaster) -> ImageRaster:
    out = img.samples.copy()
    ph, pw = patch.samples.shape[:2]
    out[y0:y0 + ph, x0:x0 + pw] = patch.samples
    return ImageRaster(out, img.valid.copy())


# --------------------------------------------------------------------------
# shadow scenes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ShadowScene:
    """Vertical sticks on the ground plane lit by one point light."""

    camera: Camera
    light: np.ndarray
    feet: np.ndarray     # (n, 2) ground positions
    heights: np.ndarray  # (n,)

    def world_triples(self) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """(top, foot, shadow-tip) world points per stick."""
        out = []
        lx, ly, lz = self.light
        for (x, y), h in zip(self.feet, self.heights):
            top = np.array([x, y, h])
            foot = np.array([x, y, 0.0])
            s = lz / (lz - h)
            tip = np.array([lx + s * (x - lx), ly + s * (y - ly), 0.0])
            out.append((top, foot, tip))
        return out

    def image_triples(self) -> list[dict]:
        """Projected top/foot/shadow pixel coordinates per stick."""
        out = []
        for top, foot, tip in self.world_triples():
            t, f, s = self.camera.project(np.stack([top, foot, tip]))
            out.append({"top": t, "foot": f, "shadow": s})
        return out


def shadow_scene(rng: np.random.Generator, n_sticks: int = 2,
                 light_height: float = 40.0) -> ShadowScene:
    """Random consistent shadow scene with well-separated sticks."""
    cam = camera_looking_at_plane(
        f=rng.uniform(800, 1400),
        height=rng.uniform(8, 16),
        distance=rng.uniform(14, 24),
        azimuth=rng.uniform(0, 2 * np.pi),
    )
    feet = rng.uniform(-4.0, 4.0, size=(n_sticks, 2))
    while True:
        dists = [np.linalg.norm(feet[i] - feet[j])
                 for i in range(n_sticks) for j in range(i + 1, n_sticks)]
        if min(dists) > 2.0:
            break
        feet = rng.uniform(-4.0, 4.0, size=(n_sticks, 2))
    heights = rng.uniform(1.0, 3.0, size=n_sticks)
    light = np.array([
        rng.uniform(-25.0, 25.0),
        rng.uniform(-25.0, 25.0),
        light_height * rng.uniform(0.8, 1.5),
    ])
    return ShadowScene(camera=cam, light=light, feet=feet, heights=heights)
