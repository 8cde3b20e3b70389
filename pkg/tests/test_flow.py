"""Tests for flows, integration, exit times and families."""

import math

import numpy as np
import pytest

from surface_influence.core.constructions import circle_subcomplex
from surface_influence.core.flow import (
    FixedPoint,
    FixedPointKind,
    Flow,
    FlowFamily,
    FlowIntegrator,
    TerminationReason,
    beck_factor,
    beck_freeze,
    entrance_time,
    exit_time,
    integrate,
    time_tau_map,
)
from surface_influence.core.mesh import Subcomplex, annulus_piece, build_sphere, disk_piece

WIDE_RADII = (0.5, 1.0, 1.5, 2.0, 2.5)


def _radius(xy):
    return np.linalg.norm(np.asarray(xy, dtype=float).reshape(-1, 2), axis=1)


def _cells_between(piece, lo, hi):
    r = _radius(piece.centroids)
    return Subcomplex.from_triangles(piece, np.nonzero((r > lo) & (r < hi))[0])


@pytest.fixture(scope="module")
def expanding():
    """Radial field x' = x on a wide annulus; |x(t)| = |x0| e^t."""
    piece = annulus_piece(sides=12, radii=WIDE_RADII)
    return Flow(piece, {0: lambda xy: np.asarray(xy, dtype=float)}, name="expanding")


class TestExitTimes:
    """First exit and entrance times."""

    def test_exit_time_is_log_two(self, expanding):
        N = _cells_between(expanding.complex, 0.0, 2.0)
        t = exit_time(expanding, N, (1.0, 0.0))
        assert t == pytest.approx(math.log(2.0), abs=1e-3)

    def test_entrance_time_runs_backward(self, expanding):
        N = _cells_between(expanding.complex, 1.0, 2.0)
        t = entrance_time(expanding, N, (1.5, 0.0))
        assert t == pytest.approx(math.log(1.5), abs=1e-3)

    def test_point_outside_exits_at_once(self, expanding):
        N = _cells_between(expanding.complex, 0.0, 2.0)
        assert exit_time(expanding, N, (2.3, 0.0)) == 0.0

    def test_fixed_point_never_exits(self):
        piece = annulus_piece(sides=12, radii=WIDE_RADII)
        still = Flow(piece, {})
        assert exit_time(still, Subcomplex.full(piece), (1.0, 0.0)) is None

    def test_horizon_too_short(self, expanding):
        N = _cells_between(expanding.complex, 0.0, 2.0)
        assert exit_time(expanding, N, (1.0, 0.0), t_max=0.1) is None


class TestIntegration:
    """RK4 trajectories with stopping sets and chart changes."""

    def test_rejects_non_positive_step(self, expanding):
        with pytest.raises(ValueError, match="positive"):
            FlowIntegrator(expanding, step=0.0)

    def test_forward_horizon(self, expanding):
        trajectory = integrate(expanding, (1.0, 0.0), 0.5)
        assert trajectory.reason is TerminationReason.HORIZON
        assert len(trajectory) == 26
        chart, end = trajectory.end
        assert chart == 0
        np.testing.assert_allclose(end, [math.exp(0.5), 0.0], atol=1e-6)

    def test_backward_times_decrease(self, expanding):
        trajectory = integrate(expanding, (1.0, 0.0), -0.5)
        assert np.all(np.diff(trajectory.times) < 0)
        assert trajectory.times[-1] == pytest.approx(-0.5)
        np.testing.assert_allclose(trajectory.end[1], [math.exp(-0.5), 0.0], atol=1e-6)

    def test_stops_on_target(self, expanding):
        target = _cells_between(expanding.complex, 2.0, 3.0)
        trajectory = integrate(expanding, (1.0, 0.0), 2.0, target=target)
        assert trajectory.reason is TerminationReason.TARGET
        assert trajectory.times[-1] == pytest.approx(math.log(2.0), abs=0.03)

    def test_stops_when_leaving_domain(self, expanding):
        domain = _cells_between(expanding.complex, 0.0, 2.0)
        trajectory = integrate(expanding, (1.0, 0.0), 2.0, domain=domain)
        assert trajectory.reason is TerminationReason.LEFT_DOMAIN
        assert _radius(trajectory.end[1])[0] >= 2.0

    def test_time_tau_map(self, expanding):
        chart, point = time_tau_map(expanding, (0.0, 1.0), 0.3)
        assert chart == 0
        np.testing.assert_allclose(point, [0.0, math.exp(0.3)], atol=1e-6)

    def test_orbit_crosses_charts(self):
        sphere = build_sphere()
        flow = Flow(
            sphere,
            {0: lambda xy: np.asarray(xy, dtype=float), 1: lambda xy: -np.asarray(xy, dtype=float)},
        )
        trajectory = integrate(flow, (0.2, 0.1), 8.0)
        assert trajectory.charts[0] == 0
        chart, end = trajectory.end
        assert chart == 1
        assert _radius(end)[0] < 0.05
        switches = np.nonzero(np.diff(trajectory.charts))[0]
        assert len(switches) == 1


class TestFlow:
    """Fields, freezing and reversal."""

    def test_beck_factor(self):
        np.testing.assert_allclose(beck_factor(np.array([0.0, 0.05, 0.1, 1.0]), 0.1), [0.0, 0.25, 1.0, 1.0])

    def test_beck_freeze_vanishes_on_set(self):
        disk = disk_piece()
        base = Flow(disk, {0: lambda xy: np.asarray(xy, dtype=float)}, name="radial")
        circle = circle_subcomplex(disk, 0)
        frozen = beck_freeze(base, circle, 0.1)
        assert frozen.frozen.contains(circle)
        np.testing.assert_array_equal(frozen.velocity_in_chart(0, [[1.0, 0.0]]), [[0.0, 0.0]])
        np.testing.assert_allclose(frozen.velocity_in_chart(0, [[0.5, 0.0]]), [[0.5, 0.0]])
        near = frozen.velocity_in_chart(0, [[0.97, 0.0]])
        assert 0.0 < np.linalg.norm(near) < 0.97 * 0.1
        assert frozen.metadata["beck_scale"] == 0.1

    def test_beck_freeze_empty_set_is_copy(self):
        disk = disk_piece()
        base = Flow(disk, {0: lambda xy: np.asarray(xy, dtype=float)})
        same = beck_freeze(base, Subcomplex.empty(disk))
        np.testing.assert_allclose(same.velocity_in_chart(0, [[0.3, 0.4]]), [[0.3, 0.4]])

    def test_reversed(self):
        disk = disk_piece()
        tags = [FixedPoint(0, (0.0, 0.0), FixedPointKind.ATTRACTING, "sink")]
        flow = Flow(disk, {0: lambda xy: -np.asarray(xy, dtype=float)}, fixed_points=tags, name="sink")
        back = flow.reversed()
        assert back.name == "sink-reversed"
        assert back.metadata["reversed"] is True
        assert back.fixed_points[0].kind is FixedPointKind.REPELLING
        np.testing.assert_allclose(back.velocity_in_chart(0, [[0.2, 0.1]]), [[0.2, 0.1]])
        assert back.reversed().metadata["reversed"] is False

    def test_from_vertex_vectors(self):
        disk = disk_piece()
        vectors = np.tile([1.0, 0.0], (disk.n_vertices, 1))
        flow = Flow.from_vertex_vectors(disk, vectors)
        np.testing.assert_allclose(flow.velocity_in_chart(0, [[0.3, 0.2], [-0.6, 0.1]]), [[1.0, 0.0], [1.0, 0.0]])
        pinned = Flow.from_vertex_vectors(disk, vectors, frozen=Subcomplex.from_vertices(disk, [0]))
        np.testing.assert_allclose(pinned.velocity_in_chart(0, [[0.0, 0.0]]), [[0.0, 0.0]], atol=1e-12)

    def test_max_speed_and_missing_chart(self, expanding):
        assert expanding.max_speed() == pytest.approx(2.5)
        np.testing.assert_array_equal(expanding.velocity_in_chart(5, [[1.0, 1.0]]), [[0.0, 0.0]])

    def test_fixed_point_tags(self):
        circle = FixedPoint(0, (0.0, 0.0), FixedPointKind.CIRCLE, "rim", 1.0)
        saddle = FixedPoint(1, (0.2, 0.0), FixedPointKind.HYPERBOLIC_SADDLE, "s")
        assert not circle.is_isolated
        assert saddle.is_isolated
        assert saddle.as_dict()["kind"] == "topologically-hyperbolic-saddle"


class TestFlowFamily:
    """Families over a parameter interval."""

    def setup_method(self):
        """Set up the family λ·x on a disk."""
        self.disk = disk_piece()
        self.family = FlowFamily(
            name="scaled",
            evaluator=lambda lam: Flow(self.disk, {0: lambda xy, lam=lam: lam * np.asarray(xy, dtype=float)}),
            complex=self.disk,
        )

    def test_at_caches(self):
        assert self.family.at(0.5) is self.family.at(0.5)

    def test_at_rejects_outside_interval(self):
        with pytest.raises(ValueError, match="outside"):
            self.family.at(1.5)

    def test_continuity_modulus(self):
        assert self.family.continuity_modulus([0.0, 0.5, 1.0]) == pytest.approx(1.0)
