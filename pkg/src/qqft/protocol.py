"""Assemble the engineered evolution U = V exp(-i H_D T) V^dag.

V is the compiled Fourier transform applied along every spatial dimension
(identity on the orbital factor), and H_D is the block-diagonal momentum
Hamiltonian programmed site by site.  Eigenphases of U give the band
energies; with the default evolution time T = 1/(2 pi) ms and band norms of
2 pi rad/ms (i.e. 2 pi x 1 kHz) all phases stay safely inside the principal
branch.

Energies are in angular frequency units of rad/ms throughout (2 pi rad/ms
corresponds to 2 pi x 1 kHz); times are in ms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import circuit, engine

#: default evolution time, ms
T_DEFAULT = 1.0 / (2.0 * np.pi)

#: recoil energy of the reference lithium setup, angular frequency in rad/ms
RECOIL_RAD_PER_MS = 2.0 * np.pi * 25.12

# substream salts for the independent noise streams of one protocol assembly
_SALT_FORWARD = (1, 2)
_SALT_INVERSE = (3, 4)
_SALT_DIAGONAL = 5


class PhaseWrapError(ValueError):
    """Eigenphases reached the branch cut; the evolution time is too long."""


@dataclass
class MomentumModel:
    """Sampler of the momentum-space Hamiltonian on a uniform grid.

    sampler(m_1, ..., m_d) must return the l x l Hermitian block at grid
    point m; the composite state index is row-major in the grid coordinates
    with the orbital index fastest.
    """

    d: int
    l: int
    grid: int
    sampler: Callable[..., np.ndarray]
    T: float = T_DEFAULT

    def __post_init__(self):
        if self.grid < 2:
            raise ValueError("grid must be >= 2")

    @property
    def dim(self) -> int:
        return self.grid ** self.d * self.l


@dataclass
class SpectrumResult:
    """Band energies extracted from the eigenphases of an evolution.

    `energies` is sorted ascending and split into `n_bands` equal chunks by
    global energy ordering (under noise there is no better quantum number);
    gap and width are recomputed from the stored energies on access.
    """

    energies: np.ndarray
    n_bands: int
    T: float

    def band(self, index: int) -> np.ndarray:
        per = len(self.energies) // self.n_bands
        return self.energies[index * per: (index + 1) * per]

    @property
    def band_gap(self) -> float:
        if self.n_bands < 2:
            raise ValueError("band gap needs at least two bands")
        return float(self.band(1).min() - self.band(0).max())

    @property
    def band_width(self) -> float:
        return float(self.band(0).max() - self.band(0).min())


def _compile_for_grid(N: int) -> circuit.CircuitSequence:
    n = N.bit_length() - 1
    if 1 << n == N:
        return circuit.build_radix2_qqft(n)
    return circuit.build_generic_qqft(N)


def build_protocol_unitary(model: MomentumModel, noise: engine.NoiseModel = None,
                           noise_on_diagonal: bool = False) -> np.ndarray:
    """Compose (noisy) per-dimension Fourier sequences around the diagonal step.

    Every compiled sequence (one forward and one inverse per dimension) draws
    from its own noise substream.  With sigma = 0 the result equals
    V Omega_D V^dag exactly.  Noise on the diagonal step is off by default
    and, when enabled, scales the whole diagonal generator by one draw.
    """
    if model.d not in (1, 2):
        raise ValueError(f"unsupported dimension d={model.d}")
    seq = _compile_for_grid(model.grid)

    def compiled(salt, invert):
        sub = noise.substream(salt) if noise is not None else None
        return engine.apply_noisy_sequence(seq, sub, invert=invert)

    V_f = compiled(_SALT_FORWARD[0], False)
    V_i = compiled(_SALT_INVERSE[0], True)
    for k in range(1, model.d):
        V_f = engine.tensor_product(V_f, compiled(_SALT_FORWARD[k], False))
        V_i = engine.tensor_product(V_i, compiled(_SALT_INVERSE[k], True))
    if model.l > 1:
        eye = np.eye(model.l)
        V_f = engine.tensor_product(V_f, eye)
        V_i = engine.tensor_product(V_i, eye)

    scale = 1.0
    if noise_on_diagonal and noise is not None and noise.sigma > 0:
        scale = 1.0 + noise.substream(_SALT_DIAGONAL).delta(0)
    U_d = engine.diagonal_momentum_evolution(model, scale=scale)
    return V_f @ U_d @ V_i


def extract_spectrum(U: np.ndarray, T: float, l: int,
                     wrap_margin: float = 1e-6) -> SpectrumResult:
    """Energies E = -arg(eigenvalue)/T with arg on the principal branch.

    Raises PhaseWrapError when any eigenphase sits within `wrap_margin` of
    the branch cut, since energies would then be ambiguous mod 2 pi / T.
    """
    ang = np.angle(np.linalg.eigvals(U))
    if np.any(np.abs(ang) >= np.pi - wrap_margin):
        raise PhaseWrapError(
            "eigenphase at the branch cut; choose a shorter evolution time"
        )
    return SpectrumResult(energies=np.sort(-ang / T), n_bands=l, T=T)


def gate_time(j_over_recoil: float) -> float:
    """Single-step duration pi / (2 J) in ms for tunneling J = x * E_R."""
    return math.pi / (2.0 * j_over_recoil * RECOIL_RAD_PER_MS)


def estimate_runtime(n: int, j_over_recoil: float = 0.01) -> float:
    """Wall-clock estimate (ms) of one radix-2 Fourier cycle on N = 2**n sites.

    Calibration, not physics: depth x pi/(2J) reproduces the ~100 ms scale of
    the reference 32-site lithium setup at J = 0.01 E_R.
    """
    return circuit.depth_formula(n) * gate_time(j_over_recoil)
