"""Channel parameterization and closed-form transverse level structure.

Natural units throughout: hbar = c = 1, energies in eV, angles in radians.
Lengths cross the API boundary in Angstrom and are converted with
hbar*c = 1973.27 eV*A.

For a positron between (110) diamond planes the continuum potential is
close to a parabola V(x) = V0 (2x/d)^2, which in the relativistic
transverse Schroedinger equation (effective mass E) is a harmonic
oscillator with

    Omega(E) = (2/d) * sqrt(2 V0 / E),

equidistant levels eps_n = Omega (n + 1/2) and
n_max = floor(V0/Omega - 1/2) bound states.  The electron channel is
modeled by the anharmonic -V0 cosh^-2(x/b) well, whose analytic spectrum
is used as the non-equidistant contrast case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateWellError,
    InsufficientDataError,
    InvalidHarmonicError,
    UnsupportedShapeError,
)

CHANNEL_SHAPES = ("parabolic", "poschl_teller")


@dataclass(frozen=True)
class PhysConstants:
    """Fixed physical constants (sources in README)."""

    hbar_c: float = 1973.27          # eV * Angstrom
    electron_mass: float = 0.511e6   # eV
    fine_structure: float = 1.0 / 137.036

    def __post_init__(self):
        if not (self.hbar_c > 0 and self.electron_mass > 0 and self.fine_structure > 0):
            raise ValueError("physical constants must be strictly positive")
        if not self.fine_structure < 0.01:
            raise ValueError("fine_structure out of range")


CONSTANTS = PhysConstants()


@dataclass(frozen=True)
class CrystalChannel:
    """Static crystal/channel parameters.

    width_b (Angstrom) only applies to the poschl_teller shape; when left
    None it defaults to spacing_d / 4.
    """

    name: str
    well_depth_V0: float   # eV
    spacing_d: float       # Angstrom
    shape: str = "parabolic"
    width_b: float | None = None

    def __post_init__(self):
        if self.well_depth_V0 <= 0:
            raise ValueError("well_depth_V0 must be > 0")
        if self.spacing_d <= 0:
            raise ValueError("spacing_d must be > 0")
        if self.shape not in CHANNEL_SHAPES:
            raise ValueError(f"unknown channel shape {self.shape!r}")
        if self.width_b is not None and self.width_b <= 0:
            raise ValueError("width_b must be > 0 when given")

    @property
    def effective_width_b(self) -> float:
        """cosh^-2 width in Angstrom (defaults to d/4)."""
        return self.width_b if self.width_b is not None else self.spacing_d / 4.0


DIAMOND_110 = CrystalChannel(name="diamond(110)", well_depth_V0=23.0, spacing_d=1.26)


@dataclass(frozen=True)
class Beam:
    """Incident positron beam: total energy, plane-tilt angle, divergence."""

    energy_E: float                  # eV
    theta_in: float = 0.0            # rad
    sigma_theta: float | None = None  # rad, 1-sigma angular spread

    def __post_init__(self):
        if self.energy_E < 1e8:
            raise ValueError("energy_E must be >= 1e8 eV (relativistic regime)")
        if self.theta_in < 0:
            raise ValueError("theta_in must be >= 0")
        if self.sigma_theta is not None and self.sigma_theta < 0:
            raise ValueError("sigma_theta must be >= 0")


@dataclass(frozen=True)
class LevelStructure:
    """Derived per-beam quantities for the parabolic channel.

    xi_scale = sqrt(E/Omega) converts an entrance angle to the
    dimensionless oscillator displacement xi0 = theta_in * xi_scale.
    """

    omega: float      # eV
    n_max: int
    theta_L: float    # rad
    gamma: float
    xi_scale: float   # per rad


def oscillator_frequency(channel: CrystalChannel, E: float,
                         constants: PhysConstants = CONSTANTS) -> float:
    """Harmonic frequency Omega = (2/d) sqrt(2 V0/E) of the parabolic channel, in eV."""
    if channel.shape != "parabolic":
        raise UnsupportedShapeError(
            f"oscillator_frequency requires a parabolic channel, got {channel.shape!r}")
    if E <= 0:
        raise ValueError("E must be > 0")
    return (2.0 * constants.hbar_c / channel.spacing_d) * math.sqrt(
        2.0 * channel.well_depth_V0 / E)


def lindhard_angle(channel: CrystalChannel, E: float) -> float:
    """Critical channeling angle theta_L = sqrt(2 V0/E), in radians."""
    if E <= 0:
        raise ValueError("E must be > 0")
    return math.sqrt(2.0 * channel.well_depth_V0 / E)


def max_bound_level(channel: CrystalChannel, E: float,
                    constants: PhysConstants = CONSTANTS) -> int:
    """Highest bound oscillator level, floor(V0/Omega - 1/2)."""
    omega = oscillator_frequency(channel, E, constants)
    n_max = math.floor(channel.well_depth_V0 / omega - 0.5)
    if n_max < 1:
        raise DegenerateWellError(
            f"well supports n_max={n_max} < 1 at E={E:g} eV")
    return n_max


def level_structure(channel: CrystalChannel, E: float,
                    constants: PhysConstants = CONSTANTS) -> LevelStructure:
    """Bundle Omega, n_max, theta_L, gamma and xi_scale for one beam energy."""
    omega = oscillator_frequency(channel, E, constants)
    return LevelStructure(
        omega=omega,
        n_max=max_bound_level(channel, E, constants),
        theta_L=lindhard_angle(channel, E),
        gamma=E / constants.electron_mass,
        xi_scale=math.sqrt(E / omega),
    )


def level_energy(ls: LevelStructure, n: int) -> float:
    """Transverse level energy eps_n = Omega (n + 1/2), for 0 <= n <= n_max."""
    if not 0 <= n <= ls.n_max:
        raise IndexError(f"level index n={n} outside 0..{ls.n_max}")
    return ls.omega * (n + 0.5)


def doppler_frequency(ls: LevelStructure, j: int, theta_obs: float) -> float:
    """Forward-boosted photon energy omega_j = 2 gamma^2 j Omega / (1 + gamma^2 theta^2)."""
    if j < 1:
        raise InvalidHarmonicError(f"harmonic order must be >= 1, got {j}")
    if theta_obs < 0:
        raise ValueError("theta_obs must be >= 0")
    g2 = ls.gamma * ls.gamma
    return 2.0 * g2 * j * ls.omega / (1.0 + g2 * theta_obs * theta_obs)


def poschl_teller_levels(channel: CrystalChannel, E: float,
                         constants: PhysConstants = CONSTANTS) -> np.ndarray:
    """Bound-state energies of the -V0 cosh^-2(x/b) well, in eV (negative, ascending).

    eps_n = -(s - n)^2 / (2 E b^2) with s = (-1 + sqrt(1 + 8 E V0 b^2))/2
    and n = 0..floor(s); b is converted from Angstrom via hbar_c.
    """
    if channel.shape != "poschl_teller":
        raise UnsupportedShapeError(
            f"poschl_teller_levels requires a poschl_teller channel, got {channel.shape!r}")
    if E <= 0:
        raise ValueError("E must be > 0")
    b = channel.effective_width_b / constants.hbar_c   # 1/eV
    s = 0.5 * (-1.0 + math.sqrt(1.0 + 8.0 * E * channel.well_depth_V0 * b * b))
    if s < 0:
        return np.empty(0)
    n = np.arange(math.floor(s) + 1)
    return -((s - n) ** 2) / (2.0 * E * b * b)


def equidistance_deviation(levels) -> float:
    """Worst relative spacing irregularity of a level ladder.

    max_n |Delta_{n+1} - Delta_n| / mean(Delta); zero for an exactly
    harmonic (equidistant) ladder.  Needs at least three levels.
    """
    eps = np.asarray(levels, dtype=float)
    if eps.size < 3:
        raise InsufficientDataError(
            f"need >= 3 levels to measure equidistance, got {eps.size}")
    spacing = np.diff(eps)
    return float(np.max(np.abs(np.diff(spacing))) / np.mean(spacing))
