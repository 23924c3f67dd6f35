"""Transition matrix elements, coherent amplitude, enhancement, line shapes.

Every transition n -> n-j of an equidistant ladder radiates at the same
Doppler-shifted frequency, so the amplitudes add before squaring:

    A_j = sum_{n>=j} c_n M_{n,n-j},
    G_j = |A_j|^2 / sum_{n>=j} |c_n|^2 |M_{n,n-j}|^2  >= 1 (aligned phases).

G_j is the coherent/incoherent intensity ratio.  The delta-line spectrum is
resolved analytically: with x = omega/omega_j(0) the angle integration gives

    dI/domega = alpha * j * Omega * W(x) * S,

where S is |A_j|^2 (coherent) or the probability-weighted square sum
(incoherent), and W is the angular weight: W = 1 for the flat reading, or
the classical planar-dipole polarization factor W(x) = 3(1 - 2x + 2x^2)/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CONSTANTS, LevelStructure, PhysConstants, doppler_frequency
from .entry import EntryState
from .errors import (
    DimensionMismatchError,
    EmptyPopulationError,
    InvalidHarmonicError,
)

SPECTRUM_MODELS = ("coherent", "incoherent")
ANGULAR_WEIGHTS = ("flat", "dipole_planar")


@dataclass(frozen=True, eq=False)
class MatrixElementSet:
    """Dimensionless m_n = |M_{n,n-j}| in oscillator units, n = j..n_max."""

    j: int
    values: np.ndarray

    @property
    def n_max(self) -> int:
        return self.j + len(self.values) - 1


@dataclass(frozen=True, eq=False)
class SpectrumSeries:
    """Sampled dI/domega for one harmonic and one model."""

    j: int
    model: str
    angular_weight: str
    omega: np.ndarray        # eV, ascending, last point = omega_cutoff
    intensity: np.ndarray    # eV
    omega_cutoff: float      # eV, forward-direction line energy omega_j(0)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.omega.tolist(), self.intensity.tolist()))


def matrix_elements(ls: LevelStructure, j: int) -> MatrixElementSet:
    """|M_{n,n-j}| for n = j..n_max.

    j=1 is the exact dipole element sqrt(n/2); j>=2 uses the leading
    multipole 2^(-j/2) sqrt(n!/(n-j)!), evaluated in the log domain.
    """
    if not 1 <= j <= ls.n_max:
        raise InvalidHarmonicError(f"harmonic j={j} outside 1..{ls.n_max}")
    n = np.arange(j, ls.n_max + 1, dtype=float)
    if j == 1:
        values = np.sqrt(n / 2.0)
    else:
        log_ff = np.array([math.lgamma(k + 1.0) - math.lgamma(k - j + 1.0)
                           for k in range(j, ls.n_max + 1)])
        values = np.exp(0.5 * log_ff - 0.5 * j * math.log(2.0))
    return MatrixElementSet(j=j, values=values)


def _check_compatible(es: EntryState, me: MatrixElementSet):
    if me.n_max != es.n_max:
        raise DimensionMismatchError(
            f"entry state has n_max={es.n_max}, matrix elements n_max={me.n_max}")


def coherent_amplitude(es: EntryState, me: MatrixElementSet) -> complex:
    """A_j = sum_{n>=j} c_n m_n under the entry state's phase convention.

    literal_in_phase keeps the i^n ladder of the amplitudes;
    magnitude_aligned sums |c_n| m_n, realizing the fully constructive case.
    """
    _check_compatible(es, me)
    c = es.amplitudes[me.j:]
    if es.phase_convention == "magnitude_aligned":
        return complex(np.sum(np.abs(c) * me.values))
    return complex(np.sum(c * me.values))


def enhancement_factor(es: EntryState, me: MatrixElementSet) -> float:
    """G_j = |sum c_n m_n|^2 / sum |c_n|^2 m_n^2 (unity when phases are random)."""
    _check_compatible(es, me)
    pops = es.populations[me.j:]
    denom = float(np.sum(pops * me.values ** 2))
    if denom == 0.0:
        raise EmptyPopulationError(
            f"no populated level with n >= {me.j}; enhancement undefined")
    amp = coherent_amplitude(es, me)
    return float(abs(amp) ** 2 / denom)


def _angular_weight(x: np.ndarray, angular_weight: str) -> np.ndarray:
    if angular_weight == "flat":
        return np.ones_like(x)
    # classical planar-dipole polarization factor, normalized to unit mean
    return 1.5 * (1.0 - 2.0 * x + 2.0 * x * x)


def spectrum(ls: LevelStructure, es: EntryState, j: int, model: str = "coherent",
             angular_weight: str = "flat", grid_size: int = 512,
             constants: PhysConstants = CONSTANTS) -> SpectrumSeries:
    """dI/domega on a uniform grid over (0, omega_j(0)].

    The delta line is integrated over observation angle exactly; the
    Jacobian theta |dtheta/domega| = j Omega / omega^2 cancels the omega^2
    prefactor, so the flat-weight spectrum is a box up to the cutoff.
    """
    if grid_size < 16:
        raise ValueError("grid_size must be >= 16")
    if model not in SPECTRUM_MODELS:
        raise ValueError(f"unknown spectrum model {model!r}")
    if angular_weight not in ANGULAR_WEIGHTS:
        raise ValueError(f"unknown angular weight {angular_weight!r}")
    me = matrix_elements(ls, j)
    if model == "coherent":
        strength = float(abs(coherent_amplitude(es, me)) ** 2)
    else:
        strength = float(np.sum(es.populations[j:] * me.values ** 2))
    cutoff = doppler_frequency(ls, j, 0.0)
    omega = np.linspace(0.0, cutoff, grid_size + 1)[1:]
    x = omega / cutoff
    intensity = constants.fine_structure * j * ls.omega * _angular_weight(x, angular_weight) * strength
    return SpectrumSeries(j=j, model=model, angular_weight=angular_weight,
                          omega=omega, intensity=intensity, omega_cutoff=cutoff)


def harmonic_ratio_table(ls: LevelStructure, es: EntryState, j_max: int) -> list[tuple[int, float]]:
    """(j, G_j/G_1) for j = 1..j_max in the aligned convention."""
    if not 1 <= j_max <= 6:
        raise InvalidHarmonicError(f"j_max={j_max} outside 1..6")
    if es.phase_convention != "magnitude_aligned":
        raise ValueError("harmonic_ratio_table is defined for the magnitude_aligned convention")
    g1 = enhancement_factor(es, matrix_elements(ls, 1))
    out = [(1, 1.0)]
    for j in range(2, j_max + 1):
        out.append((j, enhancement_factor(es, matrix_elements(ls, j)) / g1))
    return out
