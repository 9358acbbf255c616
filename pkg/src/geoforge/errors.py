"""Exception types raised by the estimators and the I/O layer."""


class GeoforgeError(Exception):
    """Base class for every library-raised error."""


class GeometryError(GeoforgeError, ValueError):
    """Degenerate or invalid geometric input."""


# ---------------------------------------------------------------- geom core

class NotCollinear(GeometryError):
    """Quadruple does not lie on a common line within tolerance."""


class DegenerateQuadruple(GeometryError):
    """Cross-ratio denominator vanishes (coincident or near-coincident points)."""


class CoincidentPoints(GeometryError):
    """Two points expected to be distinct coincide up to scale."""


class CoincidentLines(GeometryError):
    """Two lines expected to be distinct coincide up to scale."""


class InsufficientSegments(GeometryError):
    """Fewer segments than the estimator needs."""


class DegenerateBundle(GeometryError):
    """All segments lie on one line; the meeting point is not unique."""


class InsufficientMatches(GeometryError):
    """Fewer point correspondences than the estimator needs."""


class DegenerateConfiguration(GeometryError):
    """Input configuration leaves the estimate under-determined."""


class InsufficientPoints(GeometryError):
    """Fewer points than the estimator needs."""


class DegenerateConic(GeometryError):
    """Points do not determine a unique conic."""


class CoincidentConics(GeometryError):
    """The two conics coincide up to scale."""


class NumericalBreakdown(GeometryError):
    """An internal solve failed to produce usable numbers."""


class NonInvertible(GeometryError):
    """Matrix is singular within tolerance."""


# ----------------------------------------------------------------- rectify

class VerticalLineDirection(GeometryError):
    """Line direction has (near-)zero first component; swap coordinate roles."""


class ZeroAngle(GeometryError):
    """Known angle is 0 or pi, which carries no metric constraint."""


class DegenerateDirections(GeometryError):
    """Direction pairs coincide; the constraint circle is undefined."""


class ImaginaryRadius(GeometryError):
    """Constraint-circle radius squared is non-positive."""


class ParallelSegments(GeometryError):
    """Segments are parallel in the affine frame; ratio circle degenerates."""


class DegenerateDenominator(GeometryError):
    """Constraint-circle denominator vanishes."""


class NoIntersection(GeometryError):
    """Constraint circles do not intersect; annotations are inconsistent."""


class CoincidentCircles(GeometryError):
    """Constraint circles coincide; the pair carries one constraint only."""


class NonPositiveBeta(GeometryError):
    """Affine rectifier requires beta > 0."""


class NoConjugatePair(GeometryError):
    """Conic intersections lack the expected complex-conjugate pair."""


class ZeroLength(GeometryError):
    """Segment endpoints coincide."""


class NoScale(GeoforgeError):
    """Measurement requested but no absolute scale was established."""


class InsufficientConstraints(GeometryError):
    """Fewer metric constraints than the rectifier needs."""


# ------------------------------------------------------------------ camera

class NoConvergence(GeoforgeError):
    """Iterative solver failed to converge."""


class EllipseFitFailure(GeometryError):
    """Limbus points do not fit an ellipse."""


class InsufficientViews(GeometryError):
    """Fewer plane views than the linear system needs."""


class RankDeficient(GeometryError):
    """Linear system rank-deficient; solution not unique."""


class ZeroB11(GeometryError):
    """Skew extraction requires a nonzero leading coefficient."""


class ZeroSigma(GeometryError):
    """Essential-matrix singular value underflow in the skew cost."""


class EmptyRange(GeoforgeError):
    """Search range is empty."""


# ----------------------------------------------------------------- twoview

class NoConsensus(GeoforgeError):
    """RANSAC failed to find a model with enough inliers."""


class SizeMismatch(GeoforgeError):
    """Rasters have incompatible dimensions."""


class EmptyValidRegion(GeoforgeError):
    """No pixel survived warp/window validity masking."""


class DegenerateEpipolarLine(GeometryError):
    """Epipolar line has zero normal; distance undefined."""


# ------------------------------------------------------------------ shadow

class DegenerateTriples(GeometryError):
    """Shadow triples coincide or are otherwise unusable."""


class InsufficientTriples(GeometryError):
    """Fewer shadow triples than the check needs."""


class VertexOnAxis(GeometryError):
    """Homology vertex lies on the axis; the map is undefined."""


# --------------------------------------------------------------- metrology

class IndefiniteOmega(GeometryError):
    """Recovered image of the absolute conic is not positive definite."""


class UnderConstrained(GeometryError):
    """Constraints do not pin down the unknowns (e.g. fronto-parallel view)."""


class NegativeFSquared(GeometryError):
    """Focal-length constraint yields a non-positive square."""


class CoincidentVPs(GeometryError):
    """Vanishing points coincide; the orthogonality constraint is void."""


class ReflectionDetected(GeometryError):
    """Rotation recovery produced a reflection that sign fixing cannot repair."""


class BaseOnHorizon(GeometryError):
    """Base point lies on the reference-plane vanishing line."""


class DegenerateVertical(GeometryError):
    """Top point coincides with the vertical vanishing point."""


class DegenerateTrace(GeometryError):
    """Trace line maps to a degenerate plane."""


class NoRoot(GeoforgeError):
    """Root search found no sign change in the scanned interval."""


class RayParallelToPlane(GeometryError):
    """Back-projection ray is parallel to the target plane."""


# ---------------------------------------------------------------------- io

class ParseError(GeoforgeError):
    """Input file is not syntactically valid."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location


class SchemaError(ParseError):
    """Input parses but violates the annotation schema."""


class AnnotationReferenceError(ParseError):
    """An id reference does not resolve."""


class UnsupportedFormat(GeoforgeError):
    """Image format not handled."""


class CorruptData(GeoforgeError):
    """Image file contents are inconsistent with the header."""


class MissingAnnotations(GeoforgeError):
    """Check requires annotations that the set does not provide."""


class ConfigError(GeoforgeError):
    """Configuration value missing or invalid."""


# ----------------------------------------------------------------- service

class UnknownSession(GeoforgeError):
    """Session id does not exist."""


class StaleRevision(GeoforgeError):
    """Annotation write based on an outdated revision."""
