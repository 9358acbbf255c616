"""Run configuration: numeric tolerances and forensic decision thresholds.

Every threshold that feeds a verdict lives here so that report files can
echo the exact values a run used.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass(frozen=True)
class Tolerances:
    """Numeric guards shared by the geometry layer.

    eps_w: |third component| below this (after unit normalization) is ideal.
    eps_col: collinearity tolerance on unit-normalized incidences.
    eps_det: singularity threshold for Frobenius-normalized matrices.
    eps_den: cross-ratio denominator guard on normalized 1-D coordinates.
    """

    eps_w: float = 1e-12
    eps_col: float = 1e-6
    eps_det: float = 1e-12
    eps_den: float = 1e-12


@dataclass(frozen=True)
class Thresholds:
    """Decision thresholds used by the check pipelines."""

    # principal-point disagreement flagged beyond this fraction of the
    # image diagonal
    pp_diag_frac: float = 0.10
    # |skew| / f above this is flagged
    skew_ratio: float = 0.01
    # shadow homology: cross-ratio difference (percent) and axis residual
    mu_diff_pct: float = 5.0
    axis_residual: float = 1e-2
    # two-view difference map: threshold offset c, sane range [0.3, 0.6],
    # and the peak floor below which a pair counts as authentic
    diff_c: float = 0.45
    diff_c_range: tuple[float, float] = (0.3, 0.6)
    d_floor: float = 0.1
    # epipolar residual gate (pixels) and candidate-mask morphology
    epipolar_t: float = 3.0
    dilation_radius: int = 12
    min_area: int = 25
    # half-width w of the (2w+1)^2 correlation window
    ncc_window: int = 7


@dataclass(frozen=True)
class ForensicConfig:
    """Top-level configuration for checks, the CLI and the service."""

    tolerances: Tolerances = field(default_factory=Tolerances)
    thresholds: Thresholds = field(default_factory=Thresholds)
    # RANSAC knobs (consumed by twoview.RansacConfig.from_config)
    ransac_max_iters: int = 2000
    ransac_inlier_tol: float = 1.5
    ransac_bucket_grid: tuple[int, int] = (8, 8)
    ransac_confidence: float = 0.995
    seed: int = 0
    # camera checks
    focal_px: float | None = None
    eye_interocular_ratio: float = 11.0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "ForensicConfig":
        def build(cls, payload):
            names = {f.name: f for f in dataclasses.fields(cls)}
            kwargs = {}
            for key, value in payload.items():
                if key not in names:
                    raise ConfigError(f"unknown config key: {key}")
                f = names[key]
                if dataclasses.is_dataclass(f.type) or f.name in ("tolerances", "thresholds"):
                    sub = {"tolerances": Tolerances, "thresholds": Thresholds}[f.name]
                    value = build(sub, value)
                elif isinstance(value, list):
                    value = tuple(value)
                kwargs[key] = value
            return cls(**kwargs)

        return build(ForensicConfig, data)

    @staticmethod
    def from_json(path) -> "ForensicConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        return ForensicConfig.from_dict(data)


DEFAULT_CONFIG = ForensicConfig()
