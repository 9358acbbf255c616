"""Geometric image-forensics workbench.

Consistency checks for composited photographs built on projective geometry:
metric rectification of planes, camera-intrinsics agreement across image
regions, two-view difference and epipolar analysis, cast-shadow homology
constraints and single-view metrology.
"""

__version__ = "0.1.0"

from .config import DEFAULT_CONFIG, ForensicConfig, Thresholds, Tolerances

__all__ = ["DEFAULT_CONFIG", "ForensicConfig", "Thresholds", "Tolerances", "__version__"]
