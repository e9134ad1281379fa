from __future__ import annotations

import math

import numpy as np
import pytest

from cislunar.kinematics import (EarthOrbit, EarthSurface, EphemerisConfig,
                                 IntegrationError, MoonSurface,
                                 PotentialField, UnphysicalWorldlineError,
                                 Vec3, Worldline, accumulate_proper_time,
                                 body_position, proper_rate,
                                 proper_rate_excess, proper_time_excess,
                                 proper_time_series, two_body_field)

DAY = 86400.0


class StaticFarClock(Worldline):
    """At rest, far from everything: flat-spacetime reference."""

    def state(self, t, cfg):
        zero = 0.0 * np.asarray(t, dtype=float)
        return Vec3(1e11 + zero, zero, zero), Vec3(zero, zero, zero)


# ---------------------------------------------------------------------------
# body_position
# ---------------------------------------------------------------------------

def test_circular_orbit_separation_is_exact():
    cfg = EphemerisConfig(orbital_eccentricity=0.0)
    for t in (0.0, 1234.5, 9.9e5, 3.3e7):
        sep = (body_position("moon", t, cfg) - body_position("earth", t, cfg)).norm()
        assert sep == pytest.approx(cfg.earth_moon_distance, rel=1e-12)


def test_positions_repeat_after_one_period(cfg):
    for t in (0.0, 54321.0, 8.6e5):
        p1 = body_position("moon", t, cfg)
        p2 = body_position("moon", t + cfg.orbital_period, cfg)
        assert float((p1 - p2).norm()) < 1e-6


def test_eccentric_separation_ratio_matches_ellipse(cfg):
    # closed-form Kepler ellipse: max/min separation = (1+e)/(1-e)
    t = np.linspace(0.0, cfg.orbital_period, 400001)
    sep = (body_position("moon", t, cfg) - body_position("earth", t, cfg)).norm()
    expected = (1 + cfg.orbital_eccentricity) / (1 - cfg.orbital_eccentricity)
    assert float(sep.max() / sep.min()) == pytest.approx(expected, rel=1e-9)
    assert float(sep.max() / sep.min()) == pytest.approx(1.1162, abs=1e-4)


def test_barycenter_stays_fixed(cfg):
    t = np.linspace(0.0, cfg.orbital_period, 1001)
    pe = body_position("earth", t, cfg)
    pm = body_position("moon", t, cfg)
    weighted = pe.scaled(cfg.earth_gm) + pm.scaled(cfg.moon_gm)
    assert float(weighted.norm().max()) / cfg.total_gm < 1e-6


def test_unknown_body_rejected(cfg):
    with pytest.raises(ValueError, match="unknown body"):
        body_position("phobos", 0.0, cfg)


def test_ephemeris_validation():
    with pytest.raises(ValueError, match="strictly positive"):
        EphemerisConfig(earth_gm=-1.0)
    with pytest.raises(ValueError, match="0 <= e < 1"):
        EphemerisConfig(orbital_eccentricity=1.0)


def test_standard_field_potential_is_nonpositive(cfg, field):
    for w in (EarthSurface(45.0, 10.0), MoonSurface(-90.0, 0.0),
              EarthOrbit(2.6561e7)):
        for t in (0.0, 7.7e5):
            pos = w.position(t, cfg)
            assert float(field.potential(pos, t, cfg)) <= 0.0


# ---------------------------------------------------------------------------
# proper_rate
# ---------------------------------------------------------------------------

def test_flat_spacetime_at_rest_rate_is_exactly_one(cfg):
    empty = PotentialField()
    assert proper_rate(StaticFarClock(), 0.0, empty, cfg) == 1.0


def test_earth_equatorial_clock_against_closed_form(cfg):
    # oracle: -GM_E/(R_E c^2) - v^2/(2 c^2) with v = 2 pi R_E / spin period
    earth_only = PotentialField(bodies=(("earth", cfg.earth_gm),))
    excess = float(proper_rate_excess(EarthSurface(0.0, 0.0), 0.0, earth_only, cfg))
    v = 2.0 * math.pi * cfg.earth_radius / cfg.earth_spin_period
    assert v == pytest.approx(465.1, abs=0.1)
    oracle = (-cfg.earth_gm / cfg.earth_radius - 0.5 * v * v) / cfg.c2
    assert excess == pytest.approx(oracle, rel=1e-12)
    assert excess == pytest.approx(-6.97e-10, abs=1e-12)
    # potential and kinematic contributions per the same oracle
    assert -cfg.earth_gm / cfg.earth_radius / cfg.c2 == pytest.approx(-6.95e-10, abs=5e-13)
    assert -0.5 * v * v / cfg.c2 == pytest.approx(-1.2e-12, abs=5e-14)


def test_navigation_orbit_rate_difference(cfg, field):
    surface = EarthSurface(0.0, 0.0)
    orbiter = EarthOrbit(2.6561e7)
    diff = float(proper_rate_excess(orbiter, 0.0, field, cfg)
                 - proper_rate_excess(surface, 0.0, field, cfg))
    assert diff * DAY * 1e6 == pytest.approx(38.0, abs=1.0)


def test_rate_below_one_for_bound_worldlines(cfg, field):
    for w in (EarthSurface(13.0, 45.0), MoonSurface(-60.0, 10.0),
              EarthOrbit(2.6561e7)):
        for t in (0.0, 1.7e5, 2.0e6):
            assert float(proper_rate(w, t, field, cfg)) < 1.0


def test_position_inside_body_is_domain_error(cfg, field):
    with pytest.raises(UnphysicalWorldlineError):
        proper_rate(EarthOrbit(cfg.earth_radius * 0.5), 0.0, field, cfg)


def test_differential_rate_invariant_under_global_potential_shift(cfg):
    base = two_body_field(cfg)
    shifted = PotentialField(bodies=base.bodies, uniform_offset=1.0e6)
    a, b = EarthSurface(0.0, 0.0), MoonSurface(-90.0, 0.0)
    for t in (0.0, 4.4e4, 1.3e6):
        d_base = float(proper_rate_excess(a, t, base, cfg)
                       - proper_rate_excess(b, t, base, cfg))
        d_shift = float(proper_rate_excess(a, t, shifted, cfg)
                        - proper_rate_excess(b, t, shifted, cfg))
        assert abs(d_base - d_shift) < 1e-18


def test_polar_differential_rate_constant_for_circular_orbit():
    # polar sites kill the spin-orbit cross terms, so at e=0 nothing varies
    cfg0 = EphemerisConfig(orbital_eccentricity=0.0)
    fld = two_body_field(cfg0)
    t = np.linspace(0.0, 40 * DAY, 4001)
    diff = (proper_rate_excess(MoonSurface(-90.0, 0.0), t, fld, cfg0)
            - proper_rate_excess(EarthSurface(90.0, 0.0), t, fld, cfg0))
    assert float(np.max(diff) - np.min(diff)) < 1e-16


# ---------------------------------------------------------------------------
# accumulate_proper_time
# ---------------------------------------------------------------------------

def test_unit_rate_integrates_to_duration_exactly(cfg):
    empty = PotentialField()
    assert accumulate_proper_time(StaticFarClock(), 0.0, DAY, 60.0,
                                  empty, cfg) == DAY


def test_lunar_minus_terrestrial_day(cfg, field):
    earth = EarthSurface(0.0, 0.0)
    moon = MoonSurface(-90.0, 0.0)
    delta = (proper_time_excess(moon, 0.0, DAY, 60.0, field, cfg)
             - proper_time_excess(earth, 0.0, DAY, 60.0, field, cfg))
    assert delta * 1e6 == pytest.approx(56.02, abs=0.5)


def test_mascon_anomaly_shifts_rate_linearly(cfg, field):
    # oracle: rate difference = anomaly / c^2, accumulated linearly
    plain = MoonSurface(-90.0, 0.0, 0.0)
    bumped = MoonSurface(-90.0, 0.0, -1000.0)
    d_rate = float(proper_rate_excess(bumped, 0.0, field, cfg)
                   - proper_rate_excess(plain, 0.0, field, cfg))
    assert d_rate == pytest.approx(-1000.0 / cfg.c2, rel=1e-12)
    d_day = (proper_time_excess(bumped, 0.0, DAY, 60.0, field, cfg)
             - proper_time_excess(plain, 0.0, DAY, 60.0, field, cfg))
    assert d_day * 1e9 == pytest.approx(-0.96, abs=0.01)


def test_halving_step_leaves_result_unchanged(cfg, field):
    w = MoonSurface(-90.0, 0.0)
    full = accumulate_proper_time(w, 0.0, DAY, 60.0, field, cfg)
    half = accumulate_proper_time(w, 0.0, DAY, 30.0, field, cfg)
    assert abs(full - half) / full < 1e-13


def test_additivity_within_tolerance(cfg, field):
    # windows under an hour keep the float representation error below 1e-12
    w = MoonSurface(-90.0, 0.0)
    for t0, t1, t2 in ((0.0, 1800.0, 3600.0), (600.0, 2000.0, 3100.0),
                       (100.0, 1900.0, 3500.0)):
        whole = accumulate_proper_time(w, t0, t2, 60.0, field, cfg)
        parts = (accumulate_proper_time(w, t0, t1, 60.0, field, cfg)
                 + accumulate_proper_time(w, t1, t2, 60.0, field, cfg))
        assert abs(whole - parts) < 1e-12


def test_excess_additivity_over_days(cfg, field):
    # the integral itself is additive far below the headline tolerance
    w = EarthSurface(0.0, 0.0)
    e01 = proper_time_excess(w, 0.0, 5 * DAY, 60.0, field, cfg)
    e12 = proper_time_excess(w, 5 * DAY, 10 * DAY, 60.0, field, cfg)
    e02 = proper_time_excess(w, 0.0, 10 * DAY, 60.0, field, cfg)
    assert abs(e02 - (e01 + e12)) < 1e-15


def test_integration_window_validation(cfg, field):
    w = EarthSurface(0.0, 0.0)
    with pytest.raises(ValueError):
        accumulate_proper_time(w, 100.0, 50.0, 10.0, field, cfg)
    with pytest.raises(ValueError):
        accumulate_proper_time(w, 0.0, 50.0, -1.0, field, cfg)
    with pytest.raises(ValueError):
        accumulate_proper_time(w, 0.0, 50.0, 100.0, field, cfg)


def test_proper_time_series_matches_pointwise_integration(cfg, field):
    w = MoonSurface(-88.0, 30.0)
    grid = 600.0 * np.arange(25)
    series = proper_time_series(w, grid, 60.0, field, cfg)
    assert series[0] == 0.0
    for idx in (1, 7, 24):
        direct = proper_time_excess(w, 0.0, float(grid[idx]), 60.0, field, cfg)
        assert series[idx] == pytest.approx(direct, abs=1e-15)


def test_vec3_norm_handles_large_components():
    v = Vec3(1e12, -1e12, 1e12)
    assert np.isfinite(v.norm())
    assert v.norm() == pytest.approx(math.sqrt(3) * 1e12, rel=1e-12)
