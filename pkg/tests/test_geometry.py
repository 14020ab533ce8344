import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from selregion.analytic import NetworkConfig, SelectionRegion, hop_distance_cdf
from selregion.errors import InvalidParameterError, NoRelayError
from selregion.geometry import (
    AnnularSector,
    Disk,
    Point2,
    contains,
    nearest_distance_from_uniform,
    place_uniform,
    sample_nearest_in_region,
    sample_ppp,
)

CFG = NetworkConfig(lam=1.0, p=0.05, alpha=3.0, beta=10.0)


@given(st.floats(0, 1e6), st.floats(-math.pi, math.pi, exclude_min=True))
def test_polar_round_trip(r, theta):
    p = Point2.from_polar(r, theta)
    q = Point2.from_polar(*p.polar())
    assert math.hypot(p.x - q.x, p.y - q.y) <= 1e-12 * max(1.0, r)
    assert -math.pi < p.theta <= math.pi


def test_theta_on_negative_axis_is_pi():
    assert Point2(-1.0, -0.0).theta == math.pi


def test_non_finite_point_rejected():
    with pytest.raises(InvalidParameterError):
        Point2(math.nan, 0.0)


def test_contains_boundaries():
    s = AnnularSector(math.pi / 3, 0.5, 2.0)
    assert contains(s, Point2(0.5, 0.0))
    assert not contains(s, Point2(0.25, 0.0))
    assert contains(s, Point2.from_polar(1.0, math.pi / 6))
    assert not contains(s, Point2.from_polar(1.0, math.pi / 6 + 1e-9))
    assert contains(s, Point2(2.0, 0.0)) and not contains(s, Point2(2.0 + 1e-9, 0.0))


def test_full_angle_sector_contains_backward_point():
    assert contains(AnnularSector(2 * math.pi, 0.0), Point2(-3.0, 1e-12))


def test_sector_area():
    assert AnnularSector(math.pi / 2, 1.0, 3.0).area == pytest.approx(0.25 * math.pi * 8)
    assert Disk(2.0).area == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("args", [(0.0, 0.0, 1.0), (7.0, 0.0, 1.0), (1.0, 2.0, 1.0), (1.0, -1.0, 2.0)])
def test_bad_sector_rejected(args):
    with pytest.raises(InvalidParameterError):
        AnnularSector(*args)


def test_ppp_zero_density_is_empty():
    f = sample_ppp(Disk(3.0), 0.0, np.random.default_rng(0))
    assert f.count == 0 and f.points == []


def test_ppp_mean_count_disk():
    rng = np.random.default_rng(11)
    counts = np.array([sample_ppp(Disk(1.0), 10.0, rng).count for _ in range(10_000)])
    mean = 10 * math.pi
    assert abs(counts.mean() - mean) <= 3 * math.sqrt(mean / counts.size)


def test_ppp_points_inside_region():
    s = AnnularSector(math.pi / 4, 1.0, 4.0)
    f = sample_ppp(s, 20.0, np.random.default_rng(3))
    assert f.count > 0
    assert all(contains(s, p) for p in f.points)


def test_ppp_deterministic_given_seed():
    a = sample_ppp(Disk(2.0), 5.0, np.random.default_rng(42))
    b = sample_ppp(Disk(2.0), 5.0, np.random.default_rng(42))
    assert np.array_equal(a.r, b.r) and np.array_equal(a.theta, b.theta)


@pytest.mark.parametrize("density", [math.nan, -1.0, math.inf])
def test_ppp_bad_density(density):
    with pytest.raises(InvalidParameterError):
        sample_ppp(Disk(1.0), density, np.random.default_rng(0))


def test_ppp_infinite_region_rejected():
    with pytest.raises(InvalidParameterError):
        sample_ppp(AnnularSector(1.0, 0.0), 1.0, np.random.default_rng(0))


def test_area_fraction_of_uniform_disk_points():
    n = 200_000
    rng = np.random.default_rng(5)
    r, theta = place_uniform(Disk(2.0), rng.random(n), rng.random(n))
    s = AnnularSector(math.pi / 2, 0.5, 1.5)
    frac = s.contains_polar(r, theta).mean()
    expected = s.area / Disk(2.0).area
    assert abs(frac - expected) <= 3 * math.sqrt(expected * (1 - expected) / n)


def test_inversion_at_zero_gives_reference_distance():
    assert nearest_distance_from_uniform(0.0, 0.7, 1.0, 0.95) == pytest.approx(0.7)


def test_nearest_median():
    rng = np.random.default_rng(8)
    region = SelectionRegion(math.pi / 3, 0.0)
    d = np.array([sample_nearest_in_region(CFG, region, rng)[0] for _ in range(100_000)])
    expected = math.sqrt(2 * math.log(2) / (0.95 * math.pi / 3))
    assert expected == pytest.approx(1.1804609273347913, rel=1e-12)
    assert abs(np.median(d) - expected) < 0.01


def test_nearest_ks_against_cdf():
    rng = np.random.default_rng(9)
    region = SelectionRegion(math.pi / 2, 0.4)
    d = nearest_distance_from_uniform(rng.random(100_000), 0.4, math.pi / 2, 0.95)
    ks = stats.kstest(d, lambda r: hop_distance_cdf(CFG, region, np.maximum(r, 0.4))).statistic
    assert ks < 0.01


def test_nearest_matches_direct_field_simulation():
    # nearest receiver of an explicit PPP in a large sector vs the inversion law
    phi, r_m, radius = math.pi / 2, 0.3, 6.0
    sector = AnnularSector(phi, r_m, radius)
    rng = np.random.default_rng(21)
    direct = []
    while len(direct) < 100_000:
        f = sample_ppp(sector, 0.95, rng)
        if f.count:
            direct.append(f.r.min())
    exact = nearest_distance_from_uniform(np.random.default_rng(22).random(100_000), r_m, phi, 0.95)
    assert stats.ks_2samp(direct, exact).statistic < 0.01


def test_nearest_angle_within_sector():
    rng = np.random.default_rng(1)
    region = SelectionRegion(math.pi / 3, 0.2)
    for _ in range(1000):
        d, theta = sample_nearest_in_region(CFG, region, rng)
        assert d >= 0.2 and abs(theta) <= math.pi / 6


def test_no_relay_when_receiver_density_zero():
    class Degenerate:
        lam, p = 0.0, 0.5

    with pytest.raises(NoRelayError):
        sample_nearest_in_region(Degenerate(), SelectionRegion(1.0, 0.0), np.random.default_rng(0))
