"""Sudden-approximation entry state at the crystal boundary.

An incoming plane wave exp(i p_x x) with p_x = E * theta_in projects onto
the oscillator eigenstates.  Two population models are first-class:

  hermite  -- the literal projection c_n = i^n psi_n(xi0), with psi_n the
              normalized oscillator eigenfunction evaluated at
              xi0 = theta_in * sqrt(E/Omega),
  glauber  -- a displaced-Gaussian coherent state |alpha>, alpha = xi0/sqrt(2),
              whose populations are Poisson with mean n0 = xi0^2/2.

Both are renormalized over the bound spectrum n <= n_max so populations are
probabilities.  They do not coincide exactly: the plane-wave projection has
a slowly decaying large-n tail, the coherent state a factorial one; the
population and scan tooling makes both visible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LevelStructure
from .errors import DegenerateWellError

ENTRY_MODELS = ("hermite", "glauber")
PHASE_CONVENTIONS = ("literal_in_phase", "magnitude_aligned")

XI_OVERFLOW_GUARD = 40.0
# amplitudes below this magnitude are stored as exact zero
AMPLITUDE_TRUNCATION = 1e-30


@dataclass(frozen=True, eq=False)
class EntryState:
    """Complex level amplitudes c_n (index n = 0..n_max) for one entrance angle."""

    model: str
    xi0: float
    n0: float
    amplitudes: np.ndarray      # complex128, i^n ladder included
    phase_convention: str

    @property
    def n_max(self) -> int:
        return len(self.amplitudes) - 1

    @property
    def populations(self) -> np.ndarray:
        """P_n = |c_n|^2."""
        return np.abs(self.amplitudes) ** 2


def hermite_function(n: int, xi):
    """Normalized oscillator eigenfunction psi_n(xi).

    psi_n(xi) = (2^n n! sqrt(pi))^(-1/2) H_n(xi) exp(-xi^2/2), evaluated with
    the stable normalized recurrence

        psi_n = xi sqrt(2/n) psi_{n-1} - sqrt((n-1)/n) psi_{n-2},
        psi_0 = pi^(-1/4) exp(-xi^2/2).

    Accepts a scalar or ndarray xi with |xi| < 40 (exp(-xi^2/2) underflows
    beyond); finite for all n up to at least 1000.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    x = np.asarray(xi, dtype=float)
    if np.any(np.abs(x) >= XI_OVERFLOW_GUARD):
        raise ValueError(f"|xi| must be < {XI_OVERFLOW_GUARD:g} (overflow guard)")
    psi_prev = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n == 0:
        return psi_prev if psi_prev.shape else float(psi_prev)
    psi = math.sqrt(2.0) * x * psi_prev
    for k in range(2, n + 1):
        psi_prev, psi = psi, math.sqrt(2.0 / k) * x * psi - math.sqrt((k - 1) / k) * psi_prev
    return psi if psi.shape else float(psi)


def _hermite_ladder(n_max: int, xi: float) -> np.ndarray:
    """psi_n(xi) for all n = 0..n_max at scalar xi (one recurrence pass)."""
    if abs(xi) >= XI_OVERFLOW_GUARD:
        raise ValueError(f"|xi| must be < {XI_OVERFLOW_GUARD:g} (overflow guard)")
    psi = np.empty(n_max + 1)
    psi[0] = math.pi ** -0.25 * math.exp(-0.5 * xi * xi)
    if n_max >= 1:
        psi[1] = math.sqrt(2.0) * xi * psi[0]
    for k in range(2, n_max + 1):
        psi[k] = math.sqrt(2.0 / k) * xi * psi[k - 1] - math.sqrt((k - 1) / k) * psi[k - 2]
    return psi


def _glauber_magnitudes(n_max: int, n0: float) -> np.ndarray:
    """|c_n| of the coherent state, log-domain so n0 up to hundreds is safe."""
    if n0 == 0.0:
        mag = np.zeros(n_max + 1)
        mag[0] = 1.0
        return mag
    n = np.arange(n_max + 1, dtype=float)
    log_mag = 0.5 * (n * math.log(n0) - np.array([math.lgamma(k + 1.0) for k in range(n_max + 1)])) - 0.5 * n0
    return np.exp(log_mag - log_mag.max())


def entry_amplitudes(ls: LevelStructure, theta_in: float, model: str = "glauber",
                     phase_convention: str = "magnitude_aligned") -> EntryState:
    """Entry amplitudes c_n over the bound spectrum for one entrance angle.

    c_n carries the i^n phase ladder of the momentum-space eigenfunctions;
    magnitudes come from the selected population model and are renormalized
    so sum |c_n|^2 = 1 over n <= n_max.
    """
    if theta_in < 0:
        raise ValueError("theta_in must be >= 0")
    if model not in ENTRY_MODELS:
        raise ValueError(f"unknown entry model {model!r}")
    if phase_convention not in PHASE_CONVENTIONS:
        raise ValueError(f"unknown phase convention {phase_convention!r}")
    if ls.n_max < 1:
        raise DegenerateWellError(f"level structure has n_max={ls.n_max} < 1")

    xi0 = theta_in * ls.xi_scale
    n0 = 0.5 * xi0 * xi0
    if model == "hermite":
        mag = _hermite_ladder(ls.n_max, xi0)   # signed reals
    else:
        mag = _glauber_magnitudes(ls.n_max, n0)

    norm = math.sqrt(float(np.sum(mag * mag)))
    mag = mag / norm
    mag[np.abs(mag) < AMPLITUDE_TRUNCATION] = 0.0

    phases = 1j ** np.arange(ls.n_max + 1)
    return EntryState(model=model, xi0=xi0, n0=n0,
                      amplitudes=phases * mag,
                      phase_convention=phase_convention)


def population_distribution(es: EntryState) -> list[tuple[int, float]]:
    """(n, P_n) pairs ordered by n; populations sum to 1."""
    return list(enumerate(es.populations.tolist()))


def mean_occupancy(es: EntryState) -> float:
    """Mean transverse quantum number, sum n P_n."""
    pops = es.populations
    return float(np.sum(np.arange(len(pops)) * pops))
