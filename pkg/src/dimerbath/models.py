"""Hamiltonian constructors for the dimer exciton-phonon model families.

All energies are angular frequencies (hbar = 1). The electronic space is the
two-dimensional single-exciton manifold spanned by |1> and |2| (site basis);
phonon modes are truncated to their lowest ``n_max`` Fock levels.

Model families:

* shared anti-correlated: one mode per frequency, coupled through
  ``|1><1| - |2><2|``;
* independent local: one mode per site and frequency, coupled through the
  site projectors with a configurable coupling scale (default sqrt(2));
* transformed: the relative/center-of-mass rewriting of the independent
  model, with the center-of-mass mode coupled through the identity;
* correlated alpha: each site's mode also couples to the other site with
  weight alpha (alpha = 0 reduces to independent local at unit scale);
* reduced effective: the shared anti-correlated model with couplings
  rescaled by (1 - alpha)/sqrt(2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .spaces import (
    HERMITICITY_RTOL,
    Operator,
    SpaceLayout,
    annihilation_matrix,
    embed_matrix,
    number_matrix,
)

SQRT2 = math.sqrt(2.0)

# TotalModel.kind values
SHARED_ANTICORRELATED = "shared_anticorrelated"
INDEPENDENT_LOCAL = "independent_local"
TRANSFORMED = "transformed"
CORRELATED_ALPHA = "correlated_alpha"
REDUCED_EFFECTIVE = "reduced_effective"

# bath partition labels, one per Fock factor
SHARED = "shared"
LOCAL_SITE_1 = "local-site-1"
LOCAL_SITE_2 = "local-site-2"
RELATIVE_B = "relative-b"
CENTER_OF_MASS_B = "center-of-mass-B"


@dataclass(frozen=True)
class ElectronicParams:
    """Site energies and electronic coupling of the dimer."""

    eps1: float
    eps2: float
    j: float

    def __post_init__(self):
        for name in ("eps1", "eps2", "j"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class ModeSpec:
    """One phonon mode: frequency omega > 0 and exciton-phonon coupling g."""

    omega: float
    g: float

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"mode frequency must be positive, got {self.omega}")
        if not math.isfinite(self.g):
            raise ValueError("mode coupling must be finite")


@dataclass(frozen=True)
class TotalModel:
    """A labeled total Hamiltonian plus the metadata needed to rebuild it.

    ``bath_partition`` labels each Fock factor; ``factor_frequencies`` gives
    its harmonic frequency (used for thermal initial states). ``modes``
    always stores the *unscaled* input modes so that :meth:`rebuild` can
    re-derive the Hamiltonian at a different truncation.
    """

    hamiltonian: Operator
    kind: str
    electronic: ElectronicParams
    modes: tuple[ModeSpec, ...]
    n_max: int
    bath_partition: tuple[str, ...]
    factor_frequencies: tuple[float, ...]
    alpha: float | None = None
    coupling_scale: float | None = None

    def __post_init__(self):
        if len(self.bath_partition) != len(self.layout.factors) - 1:
            raise ValueError("one partition label per Fock factor required")
        if len(self.factor_frequencies) != len(self.bath_partition):
            raise ValueError("one frequency per Fock factor required")
        if not self.hamiltonian.is_hermitian(HERMITICITY_RTOL):
            raise ValueError("total Hamiltonian is not Hermitian")

    @property
    def layout(self) -> SpaceLayout:
        return self.hamiltonian.layout

    def describe(self) -> str:
        s = self.kind
        if self.alpha is not None:
            s += f"(alpha={self.alpha:g})"
        if self.coupling_scale is not None and self.coupling_scale != SQRT2:
            s += f"(scale={self.coupling_scale:g})"
        return s + f"[M={len(self.modes)}, n_max={self.n_max}]"

    def rebuild(self, n_max: int) -> "TotalModel":
        """Same model family and parameters at a different Fock truncation."""
        if self.kind == SHARED_ANTICORRELATED:
            return build_shared_anticorrelated(self.electronic, self.modes, n_max)
        if self.kind == INDEPENDENT_LOCAL:
            return build_independent_local(self.electronic, self.modes, n_max,
                                           coupling_scale=self.coupling_scale)
        if self.kind == TRANSFORMED:
            return build_transformed(self.electronic, self.modes, n_max)
        if self.kind == CORRELATED_ALPHA:
            return build_correlated_alpha(self.electronic, self.modes, n_max,
                                          self.alpha)
        if self.kind == REDUCED_EFFECTIVE:
            return build_reduced_effective(self.electronic, self.modes, n_max,
                                           self.alpha)
        raise ValueError(f"unknown model kind {self.kind!r}")


def electronic_hamiltonian(p: ElectronicParams) -> Operator:
    """2x2 dimer Hamiltonian [[eps1, j], [j, eps2]] in the site basis."""
    m = np.array([[p.eps1, p.j], [p.j, p.eps2]], dtype=np.complex128)
    return Operator(SpaceLayout.electronic_only(), m)


def _projectors() -> tuple[np.ndarray, np.ndarray]:
    p1 = np.diag([1.0, 0.0]).astype(np.complex128)
    p2 = np.diag([0.0, 1.0]).astype(np.complex128)
    return p1, p2


def _check_modes(modes: Sequence[ModeSpec], n_max: int):
    if not modes:
        raise ValueError("mode list must be non-empty")
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")


def _assemble(p: ElectronicParams, n_fock: int, n_max: int,
              frequencies: Sequence[float],
              couplings: Sequence[tuple[int, np.ndarray, float]]) -> Operator:
    """Sum H_e + harmonic terms + listed (factor, electronic op, g) couplings."""
    layout = SpaceLayout.exciton([n_max] * n_fock)
    dims = layout.dims
    a = annihilation_matrix(n_max).matrix
    x = a + a.conj().T
    num = number_matrix(n_max).matrix
    h = embed_matrix(electronic_hamiltonian(p).matrix, 0, dims)
    for k, omega in enumerate(frequencies):
        h += omega * embed_matrix(num, k + 1, dims)
    for k, el_op, g in couplings:
        if g == 0.0:
            continue
        h += g * np.kron(el_op, embed_matrix(x, k, dims[1:]))
    return Operator(layout, h)


def build_shared_anticorrelated(p: ElectronicParams, modes: Sequence[ModeSpec],
                                n_max: int) -> TotalModel:
    """Shared bath: every mode couples through |1><1| - |2><2|."""
    _check_modes(modes, n_max)
    p1, p2 = _projectors()
    freqs = [m.omega for m in modes]
    couplings = [(k, p1 - p2, m.g) for k, m in enumerate(modes)]
    h = _assemble(p, len(modes), n_max, freqs, couplings)
    return TotalModel(h, SHARED_ANTICORRELATED, p, tuple(modes), n_max,
                      bath_partition=(SHARED,) * len(modes),
                      factor_frequencies=tuple(freqs))


def build_independent_local(p: ElectronicParams, modes: Sequence[ModeSpec],
                            n_max: int,
                            coupling_scale: float | None = None) -> TotalModel:
    """Local baths: per mode frequency, one mode per site with scaled coupling.

    Fock factors are interleaved (site1, xi), (site2, xi) per mode xi.
    """
    _check_modes(modes, n_max)
    scale = SQRT2 if coupling_scale is None else float(coupling_scale)
    p1, p2 = _projectors()
    freqs, couplings, labels = [], [], []
    for k, m in enumerate(modes):
        freqs += [m.omega, m.omega]
        couplings += [(2 * k, p1, scale * m.g), (2 * k + 1, p2, scale * m.g)]
        labels += [LOCAL_SITE_1, LOCAL_SITE_2]
    h = _assemble(p, 2 * len(modes), n_max, freqs, couplings)
    return TotalModel(h, INDEPENDENT_LOCAL, p, tuple(modes), n_max,
                      bath_partition=tuple(labels),
                      factor_frequencies=tuple(freqs),
                      coupling_scale=scale)


def build_transformed(p: ElectronicParams, modes: Sequence[ModeSpec],
                      n_max: int) -> TotalModel:
    """Relative/center-of-mass rewriting of the independent local model.

    Per mode xi the relative factor couples through |1><1| - |2><2| and the
    center-of-mass factor through the electronic identity; factors are
    interleaved (relative, center-of-mass) per xi.
    """
    _check_modes(modes, n_max)
    p1, p2 = _projectors()
    eye = np.eye(2, dtype=np.complex128)
    freqs, couplings, labels = [], [], []
    for k, m in enumerate(modes):
        freqs += [m.omega, m.omega]
        couplings += [(2 * k, p1 - p2, m.g), (2 * k + 1, eye, m.g)]
        labels += [RELATIVE_B, CENTER_OF_MASS_B]
    h = _assemble(p, 2 * len(modes), n_max, freqs, couplings)
    return TotalModel(h, TRANSFORMED, p, tuple(modes), n_max,
                      bath_partition=tuple(labels),
                      factor_frequencies=tuple(freqs))


def build_correlated_alpha(p: ElectronicParams, modes: Sequence[ModeSpec],
                           n_max: int, alpha: float) -> TotalModel:
    """Correlated baths: site mode xi couples to the other site with weight alpha."""
    _check_modes(modes, n_max)
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    if abs(alpha) > 1:
        warnings.warn(f"|alpha| = {abs(alpha):g} > 1 is outside the usual range",
                      stacklevel=2)
    p1, p2 = _projectors()
    freqs, couplings, labels = [], [], []
    for k, m in enumerate(modes):
        freqs += [m.omega, m.omega]
        couplings += [(2 * k, p1 + alpha * p2, m.g),
                      (2 * k + 1, p2 + alpha * p1, m.g)]
        labels += [LOCAL_SITE_1, LOCAL_SITE_2]
    h = _assemble(p, 2 * len(modes), n_max, freqs, couplings)
    return TotalModel(h, CORRELATED_ALPHA, p, tuple(modes), n_max,
                      bath_partition=tuple(labels),
                      factor_frequencies=tuple(freqs), alpha=float(alpha))


def build_reduced_effective(p: ElectronicParams, modes: Sequence[ModeSpec],
                            n_max: int, alpha: float) -> TotalModel:
    """Single-bath model with the alpha-dependent effective coupling.

    Entrywise equal to the shared anti-correlated model with every g
    replaced by g (1 - alpha)/sqrt(2).
    """
    _check_modes(modes, n_max)
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    scaled = tuple(replace(m, g=effective_coupling(m.g, alpha)) for m in modes)
    base = build_shared_anticorrelated(p, scaled, n_max)
    return TotalModel(base.hamiltonian, REDUCED_EFFECTIVE, p, tuple(modes),
                      n_max, bath_partition=base.bath_partition,
                      factor_frequencies=base.factor_frequencies,
                      alpha=float(alpha))


def effective_coupling(g: float, alpha: float) -> float:
    """Effective anti-correlated coupling g (1 - alpha)/sqrt(2)."""
    if not (math.isfinite(g) and math.isfinite(alpha)):
        raise ValueError("g and alpha must be finite")
    return g * (1.0 - alpha) / SQRT2


def ohmic_drude_modes(lambda_reorg: float, gamma_cutoff: float, m: int,
                      omega_max: float) -> list[ModeSpec]:
    """Equally spaced discretization of an Ohmic Drude-Lorentz density.

    J(w) = 2 lambda gamma w / (w^2 + gamma^2) sampled at w_k = k dw on
    (0, omega_max], with g_k = sqrt(J(w_k) dw / pi). The reorganization sum
    sum_k g_k^2 / w_k converges to lambda as m and omega_max grow.
    """
    if lambda_reorg < 0 or gamma_cutoff <= 0 or omega_max <= 0:
        raise ValueError("spectral density parameters must be positive")
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    dw = omega_max / m
    omegas = dw * np.arange(1, m + 1)
    j_w = 2.0 * lambda_reorg * gamma_cutoff * omegas / (omegas**2 + gamma_cutoff**2)
    gs = np.sqrt(j_w * dw / np.pi)
    return [ModeSpec(float(w), float(g)) for w, g in zip(omegas, gs)]
