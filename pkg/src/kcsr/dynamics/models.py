"""Model, grid, result and density-matrix containers for the dynamics engines."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from ..spin_algebra import ConstraintRule, check_dense_size

OBSERVABLE_NAMES = ("n", "Sz", "Sperp2", "Nadj", "Ntri", "FdagF", "photons", "EN")


@dataclass(frozen=True)
class EffectiveModel:
    """Constrained collective decay ``L = sqrt(Gamma) F`` with ``H = chi F^dag F`` and extras."""

    rule: ConstraintRule
    gamma: float = 1.0
    chi: float = 0.0
    gamma_loss: float = 0.0
    gamma_deph_ind: float = 0.0
    gamma_deph_common: float = 0.0
    v_nnn: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "gamma_loss", "gamma_deph_ind", "gamma_deph_common"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {val!r}")
        for name in ("chi", "v_nnn"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def rate_scale(self) -> float:
        return max(self.gamma, abs(self.chi), self.gamma_loss, self.gamma_deph_ind,
                   self.gamma_deph_common, abs(self.v_nnn), 1e-300)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rule"] = self.rule.to_dict()
        return d


@dataclass(frozen=True)
class FullCavityModel:
    """Spins coupled to one lossy cavity mode.

    ``n_max=None`` requests automatic Fock truncation.  Without the RWA the
    coupling is ``g (a + a^dag)(F + F^dag)`` and the bare frequencies
    ``omega_c`` (cavity) and ``omega_s`` (spin splitting) enter explicitly.
    """

    rule: ConstraintRule
    g: float
    kappa: float
    delta: float = 0.0
    n_max: int | None = None
    rwa: bool = True
    omega_c: float = 0.0
    omega_s: float = 0.0

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.kappa < 0 or self.g < 0:
            raise ValueError("g and kappa must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rule"] = self.rule.to_dict()
        return d


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_points)

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / (self.n_points - 1)


@dataclass
class TrajectoryResult:
    grid: TimeGrid
    observables: dict[str, tuple[np.ndarray, np.ndarray]]
    n_traj: int
    master_seed: int
    snapshots: np.ndarray | None = None  # (n_traj, n_points, dim)
    densities: np.ndarray | None = None  # (n_points, dim, dim), equal-weight mixtures
    meta: dict = field(default_factory=dict)

    def density(self, p: int) -> "DensityMatrix":
        if self.densities is None:
            raise ValueError("run did not accumulate density matrices")
        n = int(round(math.log2(self.densities.shape[-1])))
        return DensityMatrix(n, self.densities[p])

    def mean(self, name: str) -> np.ndarray:
        return self.observables[name][0]

    def sem(self, name: str) -> np.ndarray:
        return self.observables[name][1]

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


def mean_sem(samples: np.ndarray, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    mean = samples.mean(axis=axis)
    if n < 2:
        return mean, np.full(mean.shape, np.nan)
    return mean, samples.std(axis=axis, ddof=1) / np.sqrt(n)


class DensityMatrix:
    """Dense ``2^N x 2^N`` density matrix in the configuration basis."""

    def __init__(self, n_sites: int, entries, *, check: bool = True, tol: float = 1e-10):
        check_dense_size(2 * n_sites)
        rho = np.asarray(entries, dtype=complex)
        dim = 1 << n_sites
        if rho.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {rho.shape}")
        self.n_sites = n_sites
        self.entries = rho
        if check:
            self.validate(tol)

    def validate(self, tol: float = 1e-10, psd_tol: float = 1e-8, check_psd: bool | None = None) -> None:
        rho = self.entries
        herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
        if herm > tol:
            raise ValueError(f"density matrix not Hermitian (deviation {herm:.2e})")
        tr = np.trace(rho).real
        if abs(tr - 1) > tol:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        if check_psd is None:
            check_psd = self.n_sites <= 8
        if check_psd:
            lmin = np.linalg.eigvalsh(rho)[0]
            if lmin < -psd_tol:
                raise ValueError(f"density matrix has negative eigenvalue {lmin:.3e}")

    @classmethod
    def from_pure(cls, state) -> "DensityMatrix":
        from ..spin_algebra import _as_vector

        vec, n = _as_vector(state)
        vec = vec / np.linalg.norm(vec)
        return cls(n, np.outer(vec, vec.conj()))

    @classmethod
    def from_snapshots(cls, states: np.ndarray, weights=None) -> "DensityMatrix":
        """Equal-weight (or weighted) mixture of normalised state vectors (rows)."""
        states = np.atleast_2d(np.asarray(states, dtype=complex))
        if states.shape[0] == 0:
            raise ValueError("need at least one snapshot")
        n = int(round(math.log2(states.shape[1])))
        if 1 << n != states.shape[1]:
            raise ValueError("snapshot length is not a power of two")
        norms = np.linalg.norm(states, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero snapshot")
        states = states / norms[:, None]
        w = np.full(states.shape[0], 1.0 / states.shape[0]) if weights is None else np.asarray(weights, float)
        w = w / w.sum()
        rho = (states.T * w) @ states.conj()
        rho = 0.5 * (rho + rho.conj().T)
        return cls(n, rho)

    @classmethod
    def maximally_mixed(cls, n_sites: int) -> "DensityMatrix":
        dim = 1 << n_sites
        return cls(n_sites, np.eye(dim) / dim)

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.entries, self.entries)))

    def expect_diagonal(self, diag: np.ndarray) -> float:
        return float(np.real(np.diagonal(self.entries)) @ diag)

    def fidelity_pure(self, state) -> float:
        from ..spin_algebra import _as_vector

        vec, _ = _as_vector(state)
        vec = vec / np.linalg.norm(vec)
        return float(np.real(vec.conj() @ self.entries @ vec))
