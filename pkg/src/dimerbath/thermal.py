"""Gibbs initial states for the phonon factors and truncation selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import TotalModel
from .spaces import DensityMatrix, SpaceLayout

#: extra Fock levels kept above the thermal support; the (b^dag + b) coupling
#: displaces population beyond thermal occupancy, so the tail bound alone
#: underestimates the truncation the dynamics need.
DYNAMICAL_HEADROOM = 4


@dataclass(frozen=True)
class ThermalSpec:
    """Inverse temperature and acceptable weight on truncated Fock levels.

    beta = +inf selects the oscillator ground state.
    """

    beta: float
    tail_tol: float = 1e-8

    def __post_init__(self):
        if not (self.beta > 0):
            raise ValueError(f"beta must be positive (or +inf), got {self.beta}")
        if not (0.0 < self.tail_tol < 1.0):
            raise ValueError(f"tail_tol must be in (0, 1), got {self.tail_tol}")


def gibbs_state(omega: float, beta: float, n_max: int) -> DensityMatrix:
    """Thermal state of one truncated mode, diagonal p_n ~ exp(-beta omega n)."""
    if not (omega > 0):
        raise ValueError(f"omega must be positive, got {omega}")
    if not (beta > 0):
        raise ValueError(f"beta must be positive (or +inf), got {beta}")
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    if math.isinf(beta):
        p = np.zeros(n_max)
        p[0] = 1.0
    else:
        p = np.exp(-beta * omega * np.arange(n_max))
        p /= p.sum()
    return DensityMatrix(SpaceLayout.single_fock(n_max),
                         np.diag(p).astype(np.complex128))


def thermal_occupation(omega: float, beta: float) -> float:
    """Bose-Einstein mean occupation 1/(exp(beta omega) - 1)."""
    if not (omega > 0 and beta > 0):
        raise ValueError("omega and beta must be positive")
    if math.isinf(beta):
        return 0.0
    return 1.0 / math.expm1(beta * omega)

def choose_truncation(omega: float, spec: ThermalSpec) -> int:
    """Smallest truncation holding the Gibbs tail below tail_tol, plus headroom.

    The untruncated geometric tail above level n - 1 is bounded by
    exp(-beta omega n); the returned value adds DYNAMICAL_HEADROOM levels
    and never drops below that headroom.
    """
    if not (omega > 0):
        raise ValueError(f"omega must be positive, got {omega}")
    if math.isinf(spec.beta):
        n_thermal = 0
    else:
        # smallest n with exp(-beta omega n) < tail_tol
        n_thermal = math.floor(-math.log(spec.tail_tol) / (spec.beta * omega)) + 1
    return max(DYNAMICAL_HEADROOM, n_thermal + DYNAMICAL_HEADROOM)


def initial_state(rho_e0: DensityMatrix, model: TotalModel,
                  spec: ThermalSpec) -> DensityMatrix:
    """Product state: electronic rho_e0 times one Gibbs factor per mode."""
    if rho_e0.layout != SpaceLayout.electronic_only():
        raise ValueError("rho_e0 must live on the electronic-only layout")
    n_max = model.layout.factors[1].dim
    total = rho_e0.matrix
    for omega in model.factor_frequencies:
        total = np.kron(total, gibbs_state(omega, spec.beta, n_max).matrix)
    return DensityMatrix(model.layout, total)
