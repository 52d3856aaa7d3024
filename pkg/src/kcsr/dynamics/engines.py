"""Effective-model trajectories, exact master equation, and the full cavity model."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from ..spin_algebra import (
    ConstraintRule,
    PureState,
    block_count_diagonal,
    check_dense_size,
    collective_lowering,
    lowering_matrix,
    occupation_counts,
    _as_vector,
)
from .jumps import Channel, Generator, NumericError, ResourceError, run_generator, summarise
from .models import DensityMatrix, EffectiveModel, FullCavityModel, TimeGrid, TrajectoryResult, mean_sem

SPIN_OBSERVABLES = ("n", "Sz", "Sperp2", "Nadj", "Ntri", "FdagF")
MAX_MASTER_SITES = 8
DEFAULT_GROUPS = 20


def _site_lowering(n: int, j: int) -> sp.csr_matrix:
    dim = 1 << n
    src = np.nonzero((np.arange(dim) >> j) & 1)[0]
    return sp.csr_matrix((np.ones(src.size), (src ^ (1 << j), src)), shape=(dim, dim))


def nnn_diagonal(n: int, boundary: str) -> np.ndarray:
    """Diagonal of ``sum_j n_j n_{j+2}``."""
    c = np.arange(1 << n)
    out = np.zeros(c.size)
    for j in range(n):
        k = j + 2
        if k >= n:
            if boundary != "periodic":
                continue
            k %= n
        out += ((c >> j) & 1) * ((c >> k) & 1)
    return out


def spin_observables(rule: ConstraintRule, n: int):
    cnt = occupation_counts(n)
    diag = {
        "n": cnt / n,
        "Sz": cnt - n / 2,
        "Nadj": block_count_diagonal(n, 2, rule.boundary).astype(float),
        "Ntri": block_count_diagonal(n, 3, rule.boundary).astype(float),
    }
    sm = collective_lowering(n)
    quad = {
        "Sperp2": [(0.5, sm), (0.5, sm.T.tocsr())],
        "FdagF": [(1.0, lowering_matrix(rule, n))],
    }
    return diag, quad


def effective_operators(model: EffectiveModel, n: int):
    """Hermitian part and jump channels of the effective spin model."""
    check_dense_size(n)
    rule = model.rule
    F = lowering_matrix(rule, n).astype(complex)
    dim = 1 << n
    H = sp.csr_matrix((dim, dim), dtype=complex)
    if model.chi:
        H = H + model.chi * (F.conj().T @ F)
    if model.v_nnn:
        H = H + sp.diags(model.v_nnn * nnn_diagonal(n, rule.boundary))
    channels = []
    if model.gamma > 0:
        channels.append(Channel("F", math.sqrt(model.gamma) * F))
    if model.gamma_loss > 0:
        for j in range(n):
            channels.append(Channel(f"loss{j + 1}", math.sqrt(model.gamma_loss) * _site_lowering(n, j)))
    if model.gamma_deph_ind > 0:
        c = np.arange(dim)
        for j in range(n):
            z = 2.0 * ((c >> j) & 1) - 1
            channels.append(Channel(f"deph{j + 1}", sp.diags(math.sqrt(model.gamma_deph_ind) * z).tocsr()))
    if model.gamma_deph_common > 0:
        sz = occupation_counts(n) - n / 2
        channels.append(Channel("Sz", sp.diags(math.sqrt(model.gamma_deph_common) * sz).tocsr()))
    return H.tocsr(), channels


def effective_generator(model: EffectiveModel, n: int) -> Generator:
    H, channels = effective_operators(model, n)
    diag, quad = spin_observables(model.rule, n)
    return Generator(H, channels, occupation_counts(n), diag, quad)


def _grouped_negativity(dens_groups: np.ndarray, counts: np.ndarray, part=None):
    """Log-negativity of the full mixture and its jackknife standard error."""
    from ..entanglement import log_negativity

    total = dens_groups.sum(axis=0)
    M = counts.sum()
    n_pts = total.shape[0]
    mean = np.zeros(n_pts)
    sem = np.zeros(n_pts)
    G = int(np.sum(counts > 0))
    for p in range(n_pts):
        mean[p] = log_negativity(total[p] / M, part)
        if G > 1:
            vals = np.array([log_negativity((total[p] - dens_groups[g, p]) / (M - counts[g]), part)
                             for g in range(dens_groups.shape[0]) if counts[g] > 0])
            sem[p] = math.sqrt((G - 1) / G * np.sum((vals - vals.mean()) ** 2))
        else:
            sem[p] = np.nan
    return mean, sem


def run_quantum_jumps(model: EffectiveModel, init, grid: TimeGrid, n_traj: int, seed: int, *,
                      record_states: bool = False, observables=None, density_groups: int | None = None,
                      threads: int | None = None, bipartition=None) -> TrajectoryResult:
    """Quantum-jump trajectories of the effective constrained model.

    ``observables`` may include ``EN``; it is evaluated on the equal-weight
    mixture of trajectories at every grid point, with a jackknife error over
    ``density_groups`` groups (default 20).
    """
    vec, n = _as_vector(init)
    if abs(np.linalg.norm(vec) - 1) > 1e-10:
        raise ValueError("initial state must be normalised")
    gen = effective_generator(model, n)
    want = list(observables) if observables is not None else list(SPIN_OBSERVABLES)
    need_rho = "EN" in want or bool(density_groups)
    groups = 0
    if need_rho:
        groups = min(density_groups or DEFAULT_GROUPS, n_traj)
    out = run_generator(gen, vec, grid, n_traj, seed, record_states=record_states,
                        density_groups=groups, threads=threads)
    obs = summarise({k: v for k, v in out.samples.items() if k in want})
    densities = None
    if groups:
        counts = np.bincount(np.arange(n_traj) % groups, minlength=groups)
        densities = out.density_groups.sum(axis=0) / n_traj
        if "EN" in want:
            obs["EN"] = _grouped_negativity(out.density_groups, counts, bipartition)
    meta = {"model": model.to_dict(), "n_sites": n, "channels": [c.name for c in gen.channels],
            "channel_counts": out.channel_counts.tolist(), "mean_jumps": float(out.n_jumps.mean())}
    return TrajectoryResult(grid, obs, n_traj, seed, out.snapshots, densities, meta)


# --------------------------------------------------------------------------
# exact master equation


class DensitySeries:
    def __init__(self, times: np.ndarray, rhos: np.ndarray):
        self.times = times
        self.rhos = rhos
        self.n_sites = int(round(math.log2(rhos.shape[-1])))

    def __len__(self):
        return len(self.times)

    def __getitem__(self, p) -> DensityMatrix:
        return DensityMatrix(self.n_sites, self.rhos[p])

    def expect_diagonal(self, diag: np.ndarray) -> np.ndarray:
        return np.einsum("pii,i->p", self.rhos, diag).real


def lindblad_rhs(model: EffectiveModel, n: int):
    """Function ``rho -> L[rho]`` for the effective model."""
    H, channels = effective_operators(model, n)
    Hd = H.toarray()
    ops = [c.op.toarray() for c in channels]
    K = sum((o.conj().T @ o for o in ops), np.zeros_like(Hd))
    Heff = Hd - 0.5j * K

    def rhs(rho: np.ndarray) -> np.ndarray:
        out = -1j * (Heff @ rho - rho @ Heff.conj().T)
        for o in ops:
            out += o @ rho @ o.conj().T
        return out

    return rhs


def evolve_master_exact(model: EffectiveModel, rho0, grid: TimeGrid, *, rtol: float = 1e-11,
                        atol: float = 1e-13) -> DensitySeries:
    """Dense Lindblad integration (adaptive DOP853) sampled on the grid."""
    if isinstance(rho0, DensityMatrix):
        rho, n = rho0.entries, rho0.n_sites
    elif isinstance(rho0, PureState):
        rho, n = DensityMatrix.from_pure(rho0).entries, rho0.n_sites
    else:
        rho = np.asarray(rho0, dtype=complex)
        n = int(round(math.log2(rho.shape[0])))
    if n > MAX_MASTER_SITES:
        raise ResourceError(f"exact master equation limited to N<={MAX_MASTER_SITES}")
    dim = 1 << n
    rhs = lindblad_rhs(model, n)
    times = grid.times
    if not any(getattr(model, f) for f in ("gamma", "chi", "gamma_loss", "gamma_deph_ind",
                                             "gamma_deph_common", "v_nnn")):
        return DensitySeries(times, np.repeat(rho[None], times.size, axis=0))

    def f(t, y):
        r = rhs(y.view(complex).reshape(dim, dim))
        return r.reshape(-1).view(float)

    y0 = np.ascontiguousarray(rho, dtype=complex).reshape(-1).view(float).copy()
    sol = solve_ivp(f, (times[0], times[-1]), y0, method="DOP853", t_eval=times, rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericError(sol.message)
    rhos = sol.y.T.copy().view(complex).reshape(times.size, dim, dim)
    return DensitySeries(times, rhos)


def population_rate_residual(model: EffectiveModel, series: DensitySeries) -> np.ndarray:
    """``d<S^z>/dt + Gamma <F^dag F>`` evaluated from the generator at each sample."""
    n = series.n_sites
    rhs = lindblad_rhs(model, n)
    sz = occupation_counts(n) - n / 2
    F = lowering_matrix(model.rule, n).toarray()
    FdF = F.T @ F
    out = np.empty(len(series))
    for p, rho in enumerate(series.rhos):
        dsz = np.real(np.diagonal(rhs(rho)) @ sz)
        out[p] = dsz + model.gamma * np.real(np.trace(FdF @ rho))
    return out


# --------------------------------------------------------------------------
# full cavity


def cavity_generator(model: FullCavityModel, n: int, n_max: int) -> Generator:
    check_dense_size(n + math.ceil(math.log2(n_max + 1)))
    ds = 1 << n
    nf = n_max + 1
    a = sp.diags(np.sqrt(np.arange(1, nf)), 1, shape=(nf, nf), format="csr")
    num = sp.diags(np.arange(nf, dtype=float), format="csr")
    Is = sp.identity(ds, format="csr")
    If = sp.identity(nf, format="csr")
    F = lowering_matrix(model.rule, n)
    # index = spin + ds * photons  ->  kron(photon, spin)
    A = sp.kron(a, Is, format="csr")
    Ffull = sp.kron(If, F, format="csr")
    N_ph = sp.kron(num, Is, format="csr")
    if model.rwa:
        H = model.delta * N_ph + model.g * (A.T @ Ffull + Ffull.T @ A)
        labels = np.add.outer(np.arange(nf), occupation_counts(n)).ravel()
    else:
        sz = sp.kron(If, sp.diags(occupation_counts(n) - n / 2), format="csr")
        X = Ffull + Ffull.T
        H = model.omega_c * N_ph + model.omega_s * sz + model.g * ((A + A.T) @ X)
        labels = np.zeros(ds * nf, dtype=np.int64)
    channels = [Channel("a", math.sqrt(model.kappa) * A.astype(complex))] if model.kappa > 0 else []
    diag_s, quad_s = spin_observables(model.rule, n)
    diag = {k: np.tile(v, nf) for k, v in diag_s.items()}
    phot = np.repeat(np.arange(nf, dtype=float), ds)
    diag["photons"] = phot
    diag["top_fock"] = (phot == n_max).astype(float)
    quad = {k: [(c, sp.kron(If, op, format="csr")) for c, op in terms] for k, terms in quad_s.items()}
    return Generator(sp.csr_matrix(H, dtype=complex), channels, labels, diag, quad)


def choose_fock_cutoff(model: FullCavityModel, n: int, grid: TimeGrid, seed: int, *, start: int = 4,
                       pilot_traj: int = 16, target: float = 1e-6, ceiling: int = 64) -> int:
    """Double ``n_max`` from ``start`` until the pilot top-level population is below ``target``."""
    n_max = start
    while n_max <= ceiling:
        res = _cavity_run(model, n, n_max, grid, pilot_traj, seed, tag=1)
        top = float(np.max(res.samples["top_fock"]))
        if top < target:
            return n_max
        n_max *= 2
    raise ResourceError(f"Fock truncation did not converge below n_max={ceiling}")


def _cavity_run(model, n, n_max, grid, n_traj, seed, tag=0, threads=None):
    gen = cavity_generator(model, n, n_max)
    psi0 = np.zeros(gen.dim, dtype=complex)
    psi0[(1 << n) - 1] = 1.0  # fully up, vacuum
    return run_generator(gen, psi0, grid, n_traj, seed, threads=threads, tag=tag)


def run_full_cavity(model: FullCavityModel, n_sites: int, grid: TimeGrid, n_traj: int, seed: int, *,
                    threads: int | None = None, abort_level: float = 1e-4) -> TrajectoryResult:
    """Trajectories of the spin chain plus cavity from fully-up spins and vacuum."""
    n_max = model.n_max
    if n_max is None:
        n_max = choose_fock_cutoff(model, n_sites, grid, seed)
    out = _cavity_run(model, n_sites, n_max, grid, n_traj, seed, threads=threads)
    top = float(np.max(out.samples["top_fock"]))
    if top > abort_level:
        raise ResourceError(f"top Fock level population {top:.2e} > {abort_level:g}; raise n_max above {n_max}")
    obs = summarise({k: v for k, v in out.samples.items() if k != "top_fock"})
    meta = {"model": replace(model, n_max=n_max).to_dict(), "n_sites": n_sites, "n_max": n_max,
            "top_fock_max": top, "mean_jumps": float(out.n_jumps.mean())}
    return TrajectoryResult(grid, obs, n_traj, seed, None, None, meta)


# --------------------------------------------------------------------------
# post-processing


def reconstruct_density(snapshots) -> DensityMatrix:
    """Equal-weight mixture of trajectory states at one time."""
    snaps = np.atleast_2d(np.asarray(snapshots, dtype=complex))
    n = int(round(math.log2(snaps.shape[1])))
    check_dense_size(2 * n)
    return DensityMatrix.from_snapshots(snaps)


def prep_time(times, series, stationary_value: float, fraction: float = 0.7, *, mode: str = "progress"):
    """First time the series has covered ``fraction`` of its approach to the stationary value.

    ``mode="progress"`` measures ``(y(t) - y(0)) / (y_inf - y(0))`` and so also
    handles series that decay towards stationarity; ``mode="level"`` looks for
    the literal level ``fraction * y_inf`` (same answer for series starting at 0).
    Linear interpolation between grid points; ``None`` if never reached.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(series, dtype=float)
    if t.shape != y.shape or t.size < 1:
        raise ValueError("times and series must have the same non-empty shape")
    if mode == "progress":
        span = stationary_value - y[0]
        if span == 0:
            return float(t[0])
        z = (y - y[0]) / span
        target = fraction
    elif mode == "level":
        target = fraction * stationary_value
        sgn = 1.0 if stationary_value >= y[0] else -1.0
        z, target = sgn * y, sgn * target
    else:
        raise ValueError(f"unknown mode {mode!r}")
    reached = z >= target
    if reached[0]:
        return float(t[0])
    hits = np.nonzero(reached)[0]
    if hits.size == 0:
        return None
    i = hits[0]
    frac = (target - z[i - 1]) / (z[i] - z[i - 1])
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))
