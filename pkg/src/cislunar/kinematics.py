"""Earth-Moon system geometry and proper-time integration.

Everything here is expressed in a nonrotating barycentric frame with the
two-body ellipse in the xy plane and both spin axes along +z.  Positions are
meters, velocities m/s, times coordinate seconds.  The clock-rate law is the
weak-field first post-Newtonian form

    dtau/dt = 1 + Phi/c^2 - v^2/(2 c^2),   Phi = -sum GM_i / r_i  (<= 0)

All functions accept scalar or numpy-array times and are pure; there is no
shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DAY_S = 86400.0


class UnphysicalWorldlineError(ValueError):
    """Raised when a worldline position falls inside a body."""


class IntegrationError(ArithmeticError):
    """Raised when proper-time integration produces non-finite values."""


@dataclass(frozen=True)
class Vec3:
    """Cartesian triple; components may be floats or numpy arrays."""

    x: float
    y: float
    z: float

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, k: float) -> "Vec3":
        return Vec3(k * self.x, k * self.y, k * self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self):
        return np.sqrt(self.dot(self))


@dataclass(frozen=True)
class EphemerisConfig:
    """Physical background constants (CODATA/IAU standard values)."""

    earth_gm: float = 3.986004418e14      # m^3/s^2
    moon_gm: float = 4.9028e12            # m^3/s^2
    earth_radius: float = 6.378137e6      # m
    moon_radius: float = 1.7374e6         # m
    earth_moon_distance: float = 3.84399e8  # semi-major axis, m
    orbital_eccentricity: float = 0.0549
    orbital_period: float = 27.321661 * DAY_S  # s
    earth_spin_period: float = 86164.1    # sidereal day, s
    speed_of_light: float = 299792458.0   # m/s

    def __post_init__(self) -> None:
        for name in (
            "earth_gm", "moon_gm", "earth_radius", "moon_radius",
            "earth_moon_distance", "orbital_period", "earth_spin_period",
            "speed_of_light",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not (0 <= self.orbital_eccentricity < 1):
            raise ValueError("orbital_eccentricity must satisfy 0 <= e < 1")

    @property
    def total_gm(self) -> float:
        return self.earth_gm + self.moon_gm

    @property
    def c2(self) -> float:
        return self.speed_of_light ** 2


def _solve_kepler(mean_anomaly, eccentricity: float):
    """Newton iteration for the eccentric anomaly E - e sin E = M."""
    m = np.mod(mean_anomaly, 2.0 * math.pi)
    e = eccentricity
    big_e = m + e * np.sin(m)
    for _ in range(12):
        delta = (big_e - e * np.sin(big_e) - m) / (1.0 - e * np.cos(big_e))
        big_e = big_e - delta
        if np.all(np.abs(delta) < 1e-15):
            break
    return big_e


def _relative_orbit(t, cfg: EphemerisConfig):
    """Earth->Moon separation vector and its time derivative (Kepler ellipse,
    focus at the barycenter of the relative problem, perigee at t = 0)."""
    a = cfg.earth_moon_distance
    e = cfg.orbital_eccentricity
    n = 2.0 * math.pi / cfg.orbital_period
    big_e = _solve_kepler(n * np.asarray(t, dtype=float), e)
    b = a * math.sqrt(1.0 - e * e)
    cos_e, sin_e = np.cos(big_e), np.sin(big_e)
    pos = Vec3(a * (cos_e - e), b * sin_e, np.zeros_like(cos_e))
    e_dot = n / (1.0 - e * cos_e)
    vel = Vec3(-a * sin_e * e_dot, b * cos_e * e_dot, np.zeros_like(cos_e))
    return pos, vel


def body_position(body: str, t, cfg: EphemerisConfig) -> Vec3:
    """Barycentric position of 'earth' or 'moon' at coordinate time t."""
    pos, _ = _body_state(body, t, cfg)
    return pos


def _body_state(body: str, t, cfg: EphemerisConfig):
    rel_pos, rel_vel = _relative_orbit(t, cfg)
    if body == "earth":
        k = -cfg.moon_gm / cfg.total_gm
    elif body == "moon":
        k = cfg.earth_gm / cfg.total_gm
    else:
        raise ValueError(f"unknown body {body!r}")
    return rel_pos.scaled(k), rel_vel.scaled(k)


def _spin_state(lat_rad: float, lon_rad: float, radius: float, spin_rate: float, t):
    """Body-fixed surface point and velocity for uniform rotation about +z."""
    angle = lon_rad + spin_rate * np.asarray(t, dtype=float)
    clat = math.cos(lat_rad)
    pos = Vec3(radius * clat * np.cos(angle),
               radius * clat * np.sin(angle),
               radius * math.sin(lat_rad) * np.ones_like(angle))
    speed = radius * clat * spin_rate
    vel = Vec3(-speed * np.sin(angle), speed * np.cos(angle), np.zeros_like(angle))
    return pos, vel


class Worldline:
    """Base trajectory; subclasses provide position/velocity and an optional
    site potential anomaly (m^2/s^2, added to Phi at the clock)."""

    potential_anomaly: float = 0.0

    def state(self, t, cfg: EphemerisConfig) -> tuple[Vec3, Vec3]:
        raise NotImplementedError

    def position(self, t, cfg: EphemerisConfig) -> Vec3:
        return self.state(t, cfg)[0]

    def velocity(self, t, cfg: EphemerisConfig) -> Vec3:
        return self.state(t, cfg)[1]


@dataclass(frozen=True)
class EarthSurface(Worldline):
    latitude_deg: float
    longitude_deg: float

    def state(self, t, cfg: EphemerisConfig):
        center, center_vel = _body_state("earth", t, cfg)
        spin = 2.0 * math.pi / cfg.earth_spin_period
        local, local_vel = _spin_state(
            math.radians(self.latitude_deg), math.radians(self.longitude_deg),
            cfg.earth_radius, spin, t)
        return center + local, center_vel + local_vel


@dataclass(frozen=True)
class MoonSurface(Worldline):
    latitude_deg: float
    longitude_deg: float
    mascon_anomaly: float = 0.0  # m^2/s^2 potential offset at the site

    @property
    def potential_anomaly(self) -> float:  # type: ignore[override]
        return self.mascon_anomaly

    def state(self, t, cfg: EphemerisConfig):
        center, center_vel = _body_state("moon", t, cfg)
        # synchronous rotation: one spin per orbit
        spin = 2.0 * math.pi / cfg.orbital_period
        local, local_vel = _spin_state(
            math.radians(self.latitude_deg), math.radians(self.longitude_deg),
            cfg.moon_radius, spin, t)
        return center + local, center_vel + local_vel


@dataclass(frozen=True)
class EarthOrbit(Worldline):
    radius: float

    def state(self, t, cfg: EphemerisConfig):
        center, center_vel = _body_state("earth", t, cfg)
        rate = math.sqrt(cfg.earth_gm / self.radius ** 3)
        local, local_vel = _spin_state(0.0, 0.0, self.radius, rate, t)
        return center + local, center_vel + local_vel


@dataclass(frozen=True)
class MoonOrbit(Worldline):
    radius: float

    def state(self, t, cfg: EphemerisConfig):
        center, center_vel = _body_state("moon", t, cfg)
        rate = math.sqrt(cfg.moon_gm / self.radius ** 3)
        local, local_vel = _spin_state(0.0, 0.0, self.radius, rate, t)
        return center + local, center_vel + local_vel


@dataclass(frozen=True)
class PotentialField:
    """Point masses anchored to ephemeris bodies plus an optional uniform
    offset (the offset exists so tests can assert that only potential
    *differences* are observable)."""

    bodies: tuple[tuple[str, float], ...] = ()
    uniform_offset: float = 0.0

    def potential(self, pos: Vec3, t, cfg: EphemerisConfig):
        phi = self.uniform_offset + 0.0 * pos.x
        for body, gm in self.bodies:
            center = body_position(body, t, cfg)
            phi = phi - gm / (pos - center).norm()
        return phi

    def check_outside_bodies(self, pos: Vec3, t, cfg: EphemerisConfig) -> None:
        radii = {"earth": cfg.earth_radius, "moon": cfg.moon_radius}
        for body, _ in self.bodies:
            r = (pos - body_position(body, t, cfg)).norm()
            if np.any(r < radii[body] * (1.0 - 1e-9)):
                raise UnphysicalWorldlineError(
                    f"worldline position inside {body} (r={np.min(r):.3e} m)")


def two_body_field(cfg: EphemerisConfig) -> PotentialField:
    """The standard Earth + Moon point-mass field."""
    return PotentialField(bodies=(("earth", cfg.earth_gm), ("moon", cfg.moon_gm)))


def proper_rate_excess(w: Worldline, t, field: PotentialField, cfg: EphemerisConfig):
    """dtau/dt - 1.  Kept separate from proper_rate because differential
    rates at the 1e-18 level are only representable on the excess."""
    pos, vel = w.state(t, cfg)
    field.check_outside_bodies(pos, t, cfg)
    phi = field.potential(pos, t, cfg) + w.potential_anomaly
    return (phi - 0.5 * vel.dot(vel)) / cfg.c2


def proper_rate(w: Worldline, t, field: PotentialField, cfg: EphemerisConfig):
    """Proper-time rate dtau/dt; strictly < 1 for any bound worldline."""
    return 1.0 + proper_rate_excess(w, t, field, cfg)


def _simpson_increments(w: Worldline, t0: float, t1: float, step: float,
                        field: PotentialField, cfg: EphemerisConfig):
    """Per-step Simpson integrals of (rate - 1) over a uniform grid."""
    if not (t1 > t0):
        raise ValueError("t1 must exceed t0")
    if not (step > 0):
        raise ValueError("step must be positive")
    span = t1 - t0
    n = max(1, int(math.ceil(span / step - 1e-12)))
    h = span / n
    nodes = t0 + h * np.arange(n + 1)
    mids = nodes[:-1] + 0.5 * h
    f_nodes = np.asarray(proper_rate_excess(w, nodes, field, cfg), dtype=float)
    f_mids = np.asarray(proper_rate_excess(w, mids, field, cfg), dtype=float)
    if not (np.all(np.isfinite(f_nodes)) and np.all(np.isfinite(f_mids))):
        raise IntegrationError("non-finite proper rate in integration window")
    increments = (h / 6.0) * (f_nodes[:-1] + 4.0 * f_mids + f_nodes[1:])
    return nodes, increments


def proper_time_excess(w: Worldline, t0: float, t1: float, step: float,
                       field: PotentialField, cfg: EphemerisConfig) -> float:
    """Integral of (rate - 1) over [t0, t1]; magnitude ~ microseconds/day,
    carried at full double precision."""
    _, increments = _simpson_increments(w, t0, t1, step, field, cfg)
    return float(math.fsum(increments))


def accumulate_proper_time(w: Worldline, t0: float, t1: float, step: float,
                           field: PotentialField, cfg: EphemerisConfig) -> float:
    """Proper seconds elapsed along w between coordinate times t0 and t1.

    Fixed-step composite Simpson (fourth order) on the rate excess; the step
    is shrunk uniformly so the grid divides the window exactly, which keeps
    the result deterministic for fixed inputs.
    """
    if step > (t1 - t0) + 1e-12:
        raise ValueError("step must not exceed the integration window")
    return (t1 - t0) + proper_time_excess(w, t0, t1, step, field, cfg)


def proper_time_series(w: Worldline, grid: np.ndarray, step: float,
                       field: PotentialField, cfg: EphemerisConfig) -> np.ndarray:
    """Cumulative proper-time excess at each grid point (grid[0] -> 0).

    The grid must be strictly increasing and uniformly spaced; `step` only
    refines integration inside each grid interval.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be a 1-d array with at least two points")
    dt = np.diff(grid)
    if np.any(dt <= 0):
        raise ValueError("grid must be strictly increasing")
    h = float(dt[0])
    if not np.allclose(dt, h, rtol=0, atol=1e-9 * max(1.0, h)):
        raise ValueError("grid must be uniformly spaced")
    sub = max(1, int(math.ceil(h / step - 1e-12)))
    fine = grid[0] + (h / sub) * np.arange(sub * (grid.size - 1) + 1)
    _, increments = _simpson_increments(w, float(fine[0]), float(fine[-1]),
                                        h / sub, field, cfg)
    cumulative = np.concatenate(([0.0], np.cumsum(increments)))
    return cumulative[::sub].copy()
