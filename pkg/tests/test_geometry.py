"""Core projective geometry: joins/meets, cross ratios, DLT, conics."""
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from geoforge import errors
from geoforge.geometry import (
    Conic,
    Correspondence,
    HomogLine2,
    HomogPoint2,
    Homography,
    canonical_matrix,
    canonical_vector,
    conic_intersections,
    cross_ratio,
    dlt_homography,
    fit_conic,
    fit_vanishing_point,
    line_through,
    meet,
    proportional,
    symmetric_transfer_distance,
    vanishing_line,
)

P = HomogPoint2.from_xy


def random_homography(rng, scale=1.0):
    """Well-conditioned random projective map."""
    while True:
        h = rng.normal(size=(3, 3))
        h[2, :2] *= 0.1 * scale
        h += np.diag([1.0, 1.0, 2.0])
        if abs(np.linalg.det(h / np.linalg.norm(h))) > 1e-4:
            return Homography(h)


class TestJoinsMeets:
    def test_line_through_axis_points(self):
        l = line_through(P(0, 0), P(1, 0))
        assert l.proportional_to(HomogLine2(np.array([0.0, -1.0, 0.0])))

    def test_join_of_ideal_points_is_line_at_infinity(self):
        l = line_through(HomogPoint2.ideal(1, 0), HomogPoint2.ideal(0, 1))
        assert l.proportional_to(HomogLine2(np.array([0.0, 0.0, 1.0])))

    def test_coincident_points_raise(self):
        with pytest.raises(errors.CoincidentPoints):
            line_through(P(1, 2), P(1, 2))
        with pytest.raises(errors.CoincidentPoints):
            line_through(P(0, 0), HomogPoint2(np.array([1e-13, 0.0, 1.0])))

    def test_meet_of_axes(self):
        x_axis = HomogLine2(np.array([0.0, 1.0, 0.0]))
        y_axis = HomogLine2(np.array([1.0, 0.0, 0.0]))
        assert meet(x_axis, y_axis).proportional_to(HomogPoint2(np.array([0.0, 0.0, 1.0])))

    def test_parallel_lines_meet_at_ideal_point(self):
        p = meet(HomogLine2(np.array([1.0, 0.0, -1.0])),
                 HomogLine2(np.array([1.0, 0.0, -2.0])))
        assert p.is_ideal
        assert p.proportional_to(HomogPoint2.ideal(0, 1))

    def test_coincident_lines_raise(self):
        with pytest.raises(errors.CoincidentLines):
            meet(HomogLine2(np.array([1.0, 2.0, 3.0])),
                 HomogLine2(np.array([-2.0, -4.0, -6.0])))

    def test_incidence_after_join(self, rng):
        for _ in range(50):
            a = P(*rng.normal(size=2) * 10)
            b = P(*rng.normal(size=2) * 10)
            if a.proportional_to(b, 1e-6):
                continue
            l = line_through(a, b)
            assert abs(l.l @ a.canonical().h) < 1e-12
            assert abs(l.l @ b.canonical().h) < 1e-12


class TestCrossRatio:
    def test_evenly_spaced_quadruple(self):
        # ((0-2)(1-3)) / ((0-3)(1-2)) = 4/3
        val = cross_ratio(P(0, 0), P(1, 0), P(2, 0), P(3, 0))
        assert val == pytest.approx(4.0 / 3.0, abs=1e-12)

    def test_harmonic_with_ideal_point(self):
        # midpoint and the ideal point separate the endpoints harmonically
        val = cross_ratio(P(0, 0), P(2, 0), P(1, 0), HomogPoint2.ideal(1, 0))
        assert val == pytest.approx(-1.0, abs=1e-12)

    def test_ideal_point_limit_formula(self, rng):
        # with d ideal the ratio degenerates to (a-c)/(b-c)
        for _ in range(20):
            a, b, c = sorted(rng.uniform(-10, 10, size=3))
            assume_ok = min(abs(a - b), abs(b - c), abs(a - c)) > 1e-3
            if not assume_ok:
                continue
            val = cross_ratio(P(a, 0), P(b, 0), P(c, 0), HomogPoint2.ideal(1, 0))
            assert val == pytest.approx((a - c) / (b - c), rel=1e-9)

    def test_not_collinear_raises(self):
        with pytest.raises(errors.NotCollinear):
            cross_ratio(P(0, 0), P(1, 0), P(2, 1), P(3, 3))

    def test_coincident_denominator_raises(self):
        with pytest.raises(errors.DegenerateQuadruple):
            cross_ratio(P(0, 0), P(1, 0), P(1, 0), P(0, 0))

    def test_all_ideal_quadruple(self):
        # directions on the line at infinity still have a cross ratio
        pts = [HomogPoint2.ideal(1, t) for t in (0.0, 1.0, 2.0, 3.0)]
        assert cross_ratio(*pts) == pytest.approx(4.0 / 3.0, rel=1e-12)

    @settings(max_examples=150, deadline=None)
    @given(st.data())
    def test_projective_invariance(self, data):
        ts = data.draw(
            st.lists(st.floats(-5, 5), min_size=4, max_size=4, unique_by=lambda t: round(t, 2)))
        assume(min(abs(ts[i] - ts[j]) for i in range(4) for j in range(i + 1, 4)) > 5e-2)
        seed = data.draw(st.integers(0, 2**31 - 1))
        rng = np.random.default_rng(seed)
        origin = rng.uniform(-5, 5, size=2)
        direction = rng.normal(size=2)
        assume(np.linalg.norm(direction) > 1e-2)
        direction = direction / np.linalg.norm(direction)
        pts = [P(*(origin + t * direction)) for t in ts]
        h = random_homography(rng)
        mapped = [h.apply(p) for p in pts]
        hp = [np.asarray(m.h) for m in mapped]
        # keep the mapped quadruple away from the degenerate cases
        for i in range(4):
            for j in range(i + 1, 4):
                assume(np.linalg.norm(np.cross(hp[i], hp[j])) > 1e-4)
        before = cross_ratio(*pts)
        after = cross_ratio(*mapped)
        assert after == pytest.approx(before, rel=1e-7, abs=1e-9)

    def test_scale_equivalence(self):
        base = [P(0, 0), P(1, 1), P(2, 2), P(5, 5)]
        ref = cross_ratio(*base)
        for k in (-3.0, 1e-8, 1e8):
            scaled = [HomogPoint2(p.h * k) for p in base]
            assert cross_ratio(*scaled) == pytest.approx(ref, rel=1e-12)


class TestVanishingPoint:
    def test_two_exact_segments(self):
        segs = [(P(0, 0), P(1, 1)), (P(0, 2), P(1, 1.5))]
        v, residual = fit_vanishing_point(segs)
        # both support lines pass through (2, 2) and (4, 0) respectively...
        l1 = line_through(*segs[0])
        l2 = line_through(*segs[1])
        expected = meet(l1, l2)
        assert v.proportional_to(expected, 1e-9)
        assert residual < 1e-12

    def test_concurrent_bundle_exact(self, rng):
        target = np.array([100.0, 50.0])
        segs = []
        for ang in np.linspace(0.1, 2.8, 5):
            d = np.array([np.cos(ang), np.sin(ang)])
            a = target + d * rng.uniform(5, 20)
            b = target + d * rng.uniform(25, 60)
            segs.append((P(*a), P(*b)))
        v, residual = fit_vanishing_point(segs)
        assert np.allclose(v.xy(), target, atol=1e-9)
        assert residual < 1e-12

    def test_noisy_bundle_within_a_pixel(self):
        rng = np.random.default_rng(7)
        target = np.array([100.0, 50.0])
        errs = []
        for _ in range(25):
            segs = []
            for ang in np.linspace(0.2, 2.9, 5):
                d = np.array([np.cos(ang), np.sin(ang)])
                a = target + d * rng.uniform(10, 30) + rng.normal(0, 0.2, 2)
                b = target + d * rng.uniform(40, 90) + rng.normal(0, 0.2, 2)
                segs.append((P(*a), P(*b)))
            v, _ = fit_vanishing_point(segs)
            errs.append(np.linalg.norm(v.xy() - target))
        assert np.median(errs) < 1.0

    def test_parallel_segments_give_ideal_point(self):
        segs = [(P(0, 0), P(1, 1)), (P(0, 5), P(2, 7))]
        v, _ = fit_vanishing_point(segs)
        assert v.is_ideal
        assert v.proportional_to(HomogPoint2.ideal(1, 1), 1e-9)

    def test_collinear_segments_raise(self):
        segs = [(P(0, 0), P(1, 1)), (P(2, 2), P(3, 3)), (P(5, 5), P(7, 7))]
        with pytest.raises(errors.DegenerateBundle):
            fit_vanishing_point(segs)

    def test_insufficient_segments(self):
        with pytest.raises(errors.InsufficientSegments):
            fit_vanishing_point([(P(0, 0), P(1, 1))])

    def test_vanishing_line(self):
        v1 = HomogPoint2.ideal(1, 0)
        v2 = P(400, 100)
        l = vanishing_line(v1, v2)
        assert abs(l.l @ v1.canonical().h) < 1e-12
        assert abs(l.l @ v2.canonical().h) < 1e-12


class TestDLT:
    def test_recovers_exact_homography_minimal(self, rng):
        for _ in range(25):
            h = random_homography(rng)
            src = [P(0, 0), P(100, 0), P(100, 100), P(0, 100)]
            matches = [Correspondence(p, h.apply(p)) for p in src]
            est = dlt_homography(matches)
            assert est.proportional_to(h.canonical(), 1e-9)

    def test_recovers_exact_homography_overdetermined(self, rng):
        h = random_homography(rng)
        src = [P(*rng.uniform(0, 200, size=2)) for _ in range(20)]
        matches = [Correspondence(p, h.apply(p)) for p in src]
        est = dlt_homography(matches)
        assert est.proportional_to(h.canonical(), 1e-9)

    def test_three_collinear_source_points_degenerate(self):
        src = [P(0, 0), P(1, 1), P(2, 2), P(5, 0)]
        dst = [P(0, 0), P(1, 1), P(2, 2), P(5, 0)]
        with pytest.raises(errors.DegenerateConfiguration):
            dlt_homography([Correspondence(a, b) for a, b in zip(src, dst)])

    def test_insufficient_matches(self):
        with pytest.raises(errors.InsufficientMatches):
            dlt_homography([Correspondence(P(0, 0), P(0, 0))] * 3)

    def test_scale_equivalence(self, rng):
        h = random_homography(rng)
        src = [P(0, 0), P(10, 0), P(10, 10), P(0, 10), P(3, 7)]
        matches = [Correspondence(p, h.apply(p)) for p in src]
        ref = dlt_homography(matches).H
        for k in (-3.0, 1e-8, 1e8):
            scaled = [
                Correspondence(HomogPoint2(m.x1.h * k), HomogPoint2(m.x2.h * k))
                for m in matches
            ]
            est = dlt_homography(scaled).H
            assert np.allclose(est, ref, atol=1e-9)

    def test_symmetric_transfer_distance_zero_on_model(self, rng):
        h = random_homography(rng)
        p = P(5, 9)
        m = Correspondence(p, h.apply(p))
        assert symmetric_transfer_distance(h, m) < 1e-9


class TestConics:
    def test_fit_unit_circle(self):
        pts = [P(1, 0), P(-1, 0), P(0, 1), P(0, -1),
               P(np.sqrt(0.5), np.sqrt(0.5))]
        conic, residual = fit_conic(pts)
        expected = Conic.from_matrix(np.diag([1.0, 1.0, -1.0]))
        assert conic.proportional_to(expected, 1e-9)
        assert residual < 1e-12

    def test_fit_general_ellipse_exact(self, rng):
        # sample an ellipse with known parameters and refit
        cx, cy, a, b, th = 40.0, -10.0, 25.0, 9.0, 0.4
        r = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        ts = np.linspace(0, 2 * np.pi, 11)[:-1]
        pts = [P(*(np.array([cx, cy]) + r @ np.array([a * np.cos(t), b * np.sin(t)])))
               for t in ts]
        conic, residual = fit_conic(pts)
        assert residual < 1e-10
        for p in pts:
            assert conic.point_residual(p) < 1e-10

    def test_degenerate_points_on_two_lines(self):
        pts = [P(0, 0), P(1, 0), P(2, 0), P(0, 1), P(0, 2), P(0, 3)]
        with pytest.raises(errors.DegenerateConic):
            fit_conic(pts)

    def test_insufficient_points(self):
        with pytest.raises(errors.InsufficientPoints):
            fit_conic([P(0, 0), P(1, 0), P(0, 1), P(1, 1)])

    def test_conic_transform_roundtrip(self, rng):
        conic = Conic.from_matrix(np.diag([1.0, 2.0, -4.0]))
        h = random_homography(rng)
        back = conic.transform(h).transform(h.inverse())
        assert back.proportional_to(conic, 1e-9)


class TestConicIntersections:
    def test_two_overlapping_circles(self):
        c1 = Conic.from_matrix(np.diag([1.0, 1.0, -1.0]))
        # (x-1)^2 + y^2 = 1
        c2 = Conic((1.0, 0.0, 1.0, -2.0, 0.0, 0.0))
        result = conic_intersections(c1, c2)
        reals = [result.points[i] for i in result.real_indices]
        assert len(reals) == 2
        got = sorted(np.real(p[:2] / p[2]).round(9).tolist() for p in reals)
        expected = sorted([[0.5, -np.sqrt(3) / 2], [0.5, np.sqrt(3) / 2]])
        assert np.allclose(got, expected, atol=1e-9)
        assert result.candidate_pair is not None
        i, j = result.candidate_pair
        ideal = np.array([1.0, 1j, 0.0]) / np.sqrt(2)
        for idx in (i, j):
            p = result.points[idx]
            assert min(np.linalg.norm(p - ideal), np.linalg.norm(p - np.conj(ideal)),
                       np.linalg.norm(p + ideal), np.linalg.norm(p + np.conj(ideal))) < 1e-8

    def test_concentric_circles_circular_points_doubled(self):
        c1 = Conic.from_matrix(np.diag([1.0, 1.0, -1.0]))
        c2 = Conic.from_matrix(np.diag([1.0, 1.0, -4.0]))
        result = conic_intersections(c1, c2)
        assert len(result.real_indices) == 0
        assert result.candidate_pair is not None
        # each circular point appears twice
        ideal = np.array([1.0, 1j, 0.0]) / np.sqrt(2)
        counts = {"I": 0, "J": 0}
        for p in result.points:
            if min(np.linalg.norm(p - ideal), np.linalg.norm(p + ideal)) < 1e-6:
                counts["I"] += 1
            elif min(np.linalg.norm(p - np.conj(ideal)), np.linalg.norm(p + np.conj(ideal))) < 1e-6:
                counts["J"] += 1
        assert counts == {"I": 2, "J": 2}

    def test_mapped_circles_give_mapped_circular_points(self, rng):
        # images of two coplanar circles meet in the mapped circular points
        for _ in range(10):
            h = random_homography(rng, scale=0.05)
            c1 = Conic.from_matrix(np.diag([1.0, 1.0, -1.0]))
            c2 = Conic((1.0, 0.0, 1.0, -1.6, -0.6, 0.1))
            i1 = c1.transform(h)
            i2 = c2.transform(h)
            result = conic_intersections(i1, i2)
            assert result.candidate_pair is not None
            hi = h.H @ np.array([1.0, 1j, 0.0])
            hi = hi / hi[np.argmax(np.abs(hi))]
            hi = hi / np.linalg.norm(hi)
            i, j = result.candidate_pair
            best = min(
                np.linalg.norm(result.points[i] - hi),
                np.linalg.norm(result.points[j] - hi),
                np.linalg.norm(result.points[i] - np.conj(hi)),
                np.linalg.norm(result.points[j] - np.conj(hi)),
            )
            assert best < 1e-6

    def test_coincident_conics_raise(self):
        c1 = Conic.from_matrix(np.diag([1.0, 1.0, -1.0]))
        c2 = Conic.from_matrix(np.diag([-2.0, -2.0, 2.0]))
        with pytest.raises(errors.CoincidentConics):
            conic_intersections(c1, c2)

    def test_degenerate_conic_rejected(self):
        lines = Conic((1.0, 0.0, -1.0, 0.0, 0.0, 0.0))  # x^2 - y^2 = 0
        circle = Conic.from_matrix(np.diag([1.0, 1.0, -1.0]))
        with pytest.raises(errors.DegenerateConic):
            conic_intersections(lines, circle)


class TestCanonicalForms:
    def test_canonical_vector_sign_and_norm(self):
        v = canonical_vector(np.array([0.0, -2.0, 0.0]))
        assert np.allclose(v, [0.0, 1.0, 0.0])

    def test_canonical_matrix_idempotent(self, rng):
        m = rng.normal(size=(3, 3))
        c = canonical_matrix(m)
        assert np.allclose(canonical_matrix(c), c)
        assert np.isclose(np.linalg.norm(c), 1.0)

    def test_proportional(self):
        assert proportional(np.array([1.0, 2.0, 3.0]), np.array([-2.0, -4.0, -6.0]))
        assert not proportional(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 4.0]))

    def test_homography_rejects_singular(self):
        with pytest.raises(errors.NonInvertible):
            Homography(np.array([[1.0, 0, 0], [0, 1, 0], [1, 1, 0]]) * 0
                       + np.outer([1.0, 2, 3], [4.0, 5, 6]))

    def test_apply_line_preserves_incidence(self, rng):
        h = random_homography(rng)
        p = P(3, 4)
        q = P(-2, 9)
        l = line_through(p, q)
        lm = h.apply_line(l)
        assert abs(lm.l @ h.apply(p).h) < 1e-10
        assert abs(lm.l @ h.apply(q).h) < 1e-10
