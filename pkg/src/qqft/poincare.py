"""1+1D spacetime crystal with a discrete Lorentz symmetry.

The integer boost L = [[gamma, 1], [gamma^2 - 1, gamma]] (det L = 1, integer
gamma >= 2) acts on spacetime points (m, n) modulo N and partitions the
N x N lattice into equivalence classes on which the stroboscopic propagator
must be constant.  A compatible dispersion assigns each momentum m an integer
j(m) with E_{k_m} = 2 pi j(m) / (N tau); Lorentz invariance is the statement
that the graph {(m, j(m))} is closed, as a subset of Z_N x Z_N, under the
same integer map.  Linear graphs j = c m work exactly when
c^2 = gamma^2 - 1 (mod N), which is what singles out sizes like N = 33 for
gamma = 2.

The propagator matrix G[n, m] = -i [U(m tau)]_{n, 0} is built from
U(m tau) = V^dag D^m V with V the compiled Fourier transform and
D = diag(exp(-i E_k tau)); gate noise enters through independent streams for
the forward and inverse sequences.  Symmetry breaking is quantified by the
class-variance statistic `s_lorentz` and the clean-vs-noisy RMS `s_total`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import circuit, engine
from .engine import NoiseModel

_SALT_FORWARD = 1
_SALT_INVERSE = 3
_SALT_DIAGONAL = 5


class DispersionError(ValueError):
    """No nontrivial Lorentz-compatible dispersion exists for (N, gamma)."""


def lorentz_map(m: int, n: int, gamma: int, N: int):
    """One boost step: (m, n) -> (gamma m + n, (gamma^2 - 1) m + gamma n) mod N."""
    return (gamma * m + n) % N, ((gamma * gamma - 1) * m + gamma * n) % N


@dataclass(frozen=True)
class LorentzLattice:
    """Equivalence-class partition of the spacetime lattice under the boost."""

    n_sites: int
    gamma: int
    classes: tuple            # tuple of tuples of (m, n) pairs
    class_of: np.ndarray      # [m, n] -> class index

    @property
    def matrix(self) -> np.ndarray:
        g = self.gamma
        return np.array([[g, 1], [g * g - 1, g]])

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.classes])


def equivalence_classes(N: int, gamma: int) -> LorentzLattice:
    """Orbits of the boost on {(m, n)}; their sizes always sum to N^2."""
    if gamma < 2:
        raise ValueError("gamma must be an integer >= 2")
    class_of = np.full((N, N), -1, dtype=int)
    classes = []
    for m0 in range(N):
        for n0 in range(N):
            if class_of[m0, n0] >= 0:
                continue
            index = len(classes)
            orbit = []
            m, n = m0, n0
            while class_of[m, n] < 0:
                class_of[m, n] = index
                orbit.append((m, n))
                m, n = lorentz_map(m, n, gamma, N)
            classes.append(tuple(orbit))
    return LorentzLattice(n_sites=N, gamma=gamma, classes=tuple(classes),
                          class_of=class_of)


@dataclass(frozen=True)
class Dispersion:
    """Integer dispersion table: E_{k_m} = 2 pi j(m) / (N tau)."""

    n_sites: int
    gamma: int
    j_table: tuple
    tau: float = 1.0

    @property
    def energies(self) -> np.ndarray:
        return 2.0 * np.pi * np.array(self.j_table) / (self.n_sites * self.tau)


def graph_is_invariant(j_table: Sequence[int], N: int, gamma: int) -> bool:
    """Whether {(m, j(m))} is closed under the boost acting on (m, j)."""
    graph = {(m, j_table[m] % N) for m in range(N)}
    return all(lorentz_map(m, j, gamma, N) in graph for m, j in graph)


def _linear_dispersions(N: int, gamma: int) -> list:
    target = (gamma * gamma - 1) % N
    tables = []
    for c in range(1, N):
        if (c * c) % N == target:
            tables.append(tuple((c * m) % N for m in range(N)))
    return tables


def _orbit_cover_dispersions(N: int, gamma: int, max_solutions: int = 64) -> list:
    """Exact-cover search: unions of boost orbits in (m, j) space whose
    m-projection hits every momentum exactly once.  Bounded enumeration."""
    lattice = equivalence_classes(N, gamma)
    usable = []
    for orbit in lattice.classes:
        ms = [m for m, _ in orbit]
        if len(set(ms)) == len(ms):
            usable.append(orbit)
    by_m = [[] for _ in range(N)]
    for i, orbit in enumerate(usable):
        for m, _ in orbit:
            by_m[m].append(i)
    solutions = []

    def backtrack(covered, chosen):
        if len(solutions) >= max_solutions:
            return
        m = next((m for m in range(N) if m not in covered), None)
        if m is None:
            table = [None] * N
            for i in chosen:
                for mm, jj in usable[i]:
                    table[mm] = jj
            solutions.append(tuple(table))
            return
        for i in by_m[m]:
            ms = {mm for mm, _ in usable[i]}
            if ms & covered:
                continue
            backtrack(covered | ms, chosen + [i])

    backtrack(frozenset(), [])
    return solutions


def build_dispersion(N: int, gamma: int, tau: float = 1.0) -> Dispersion:
    """Select a Lorentz-compatible dispersion.

    Linear candidates j = c m with c^2 = gamma^2 - 1 (mod N) are searched
    first, then a bounded exact-cover over boost orbits.  The flat table
    j = 0 (a static particle, which picks a rest frame) is rejected; odd
    tables j(-m) = -j(m) are preferred so the noiseless propagator is purely
    imaginary, and ties break to the lexicographically smallest table.
    """
    candidates = _linear_dispersions(N, gamma)
    if not candidates:
        candidates = _orbit_cover_dispersions(N, gamma)
    candidates = [t for t in candidates
                  if any(t) and graph_is_invariant(t, N, gamma)]
    if not candidates:
        sizes = sorted(equivalence_classes(N, gamma).sizes.tolist())
        raise DispersionError(
            f"no nontrivial Lorentz-compatible dispersion for N={N}, "
            f"gamma={gamma}; boost orbit sizes: {sizes}"
        )
    odd = [t for t in candidates
           if all(t[(-m) % N] == (-t[m]) % N for m in range(N))]
    pool = odd or candidates
    return Dispersion(n_sites=N, gamma=gamma, j_table=min(pool), tau=tau)


@dataclass
class GreensResult:
    """Stroboscopic propagator G[n, m] and hopping probabilities P[n1, m, n]."""

    matrix: np.ndarray
    p_tensor: np.ndarray


def greens_function(disp: Dispersion, noise: NoiseModel = None,
                    route: str = "qqft",
                    noise_on_diagonal: bool = False) -> GreensResult:
    """Retarded propagator G[n, m] = -i [U(m tau)]_{n, 0} on the spacetime grid.

    U(m tau) = V^dag D^m V; m = 0 applies no gates, so that column is exactly
    a delta.  route="exact" replaces the compiled V by the exact DFT matrix
    (the independent reference for the compiled route).  P[n1, m, n] is the
    probability of hopping from n1 to n1 + n in m periods; unitarity makes
    every (n1, m) slice sum to one even with noise.
    """
    N = disp.n_sites
    j = np.array(disp.j_table)
    if route == "exact":
        V_f = circuit.dft_matrix(N)
        V_i = V_f.conj().T
    elif route == "qqft":
        n = N.bit_length() - 1
        seq = (circuit.build_radix2_qqft(n) if 1 << n == N
               else circuit.build_generic_qqft(N))
        sub_f = noise.substream(_SALT_FORWARD) if noise is not None else None
        sub_i = noise.substream(_SALT_INVERSE) if noise is not None else None
        V_f = engine.apply_noisy_sequence(seq, sub_f)
        V_i = engine.apply_noisy_sequence(seq, sub_i, invert=True)
    else:
        raise ValueError(f"unknown route {route!r}")

    scale = 1.0
    if noise_on_diagonal and noise is not None and noise.sigma > 0:
        scale = 1.0 + noise.substream(_SALT_DIAGONAL).delta(0)

    G = np.zeros((N, N), dtype=complex)
    P = np.zeros((N, N, N))
    for m in range(N):
        if m == 0:
            U = np.eye(N, dtype=complex)
        else:
            if scale == 1.0:
                phases = np.exp(-2j * np.pi * ((j * m) % N) / N)
            else:
                phases = np.exp(-2j * np.pi * scale * j * m / N)
            U = V_i @ (phases[:, None] * V_f)
        G[:, m] = -1j * U[:, 0]
        prob = np.abs(U) ** 2
        for n1 in range(N):
            P[n1, m, :] = np.roll(prob[:, n1], -n1)
    return GreensResult(matrix=G, p_tensor=P)


def s_lorentz(P: np.ndarray, lattice: LorentzLattice) -> float:
    """Averaged class standard deviation of the hopping probabilities.

    sqrt( (1/N^3) sum_alpha sum_{n1} sum_{(m,n) in C_alpha}
          (P[n1, m, n] - Pbar_alpha)^2 )
    with Pbar_alpha the class- and n1-averaged probability; zero exactly when
    the Lorentz symmetry is unbroken.
    """
    cls = lattice.class_of
    counts = lattice.sizes
    class_mean = np.bincount(
        cls.ravel(), weights=P.mean(axis=0).ravel(), minlength=len(counts)
    ) / counts
    dev = P - class_mean[cls][None, :, :]
    return float(np.sqrt(np.mean(dev ** 2)))


def s_total(P_noisy: np.ndarray, P_clean: np.ndarray) -> float:
    """RMS distance to the clean probabilities (Lorentz plus translation
    symmetry breaking)."""
    if P_noisy.shape != P_clean.shape:
        raise ValueError("probability tensors differ in shape")
    return float(np.sqrt(np.mean((P_noisy - P_clean) ** 2)))


@dataclass
class SymmetryPoint:
    """S_L / S_P statistics at one noise strength."""

    sigma: float
    sl: np.ndarray
    sp: np.ndarray

    @property
    def mean_sl(self) -> float:
        return float(self.sl.mean())

    @property
    def mean_sp(self) -> float:
        return float(self.sp.mean())

    @property
    def stderr_sl(self) -> float:
        return _stderr(self.sl)

    @property
    def stderr_sp(self) -> float:
        return _stderr(self.sp)


def _stderr(x: np.ndarray) -> float:
    if len(x) < 2:
        return 0.0
    return float(x.std(ddof=1) / np.sqrt(len(x)))


def noise_sweep_symmetry(N: int, gamma: int, sigmas: Sequence[float],
                         n_realizations: int, seed: int,
                         workers: int = 1) -> list:
    """Mean S_L and S_P versus noise strength, fixed-order reduction."""
    disp = build_dispersion(N, gamma)
    lattice = equivalence_classes(N, gamma)
    P_clean = greens_function(disp).p_tensor
    points = []
    for sigma in sigmas:
        def one(r, _sigma=sigma):
            noise = NoiseModel(_sigma, seed, stream_id=r)
            P = greens_function(disp, noise).p_tensor
            return s_lorentz(P, lattice), s_total(P, P_clean)
        if workers <= 1:
            results = [one(r) for r in range(n_realizations)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one, range(n_realizations)))
        points.append(SymmetryPoint(
            sigma=sigma,
            sl=np.array([a for a, _ in results]),
            sp=np.array([b for _, b in results]),
        ))
    return points
