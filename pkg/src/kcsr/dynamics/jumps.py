"""Quantum-jump (waiting-time) unravelling on block-diagonal non-Hermitian generators.

``H_nh = H - (i/2) sum_c L_c^dag L_c`` is block diagonal in a conserved label
(excitation number for the effective model, total excitations for the
RWA cavity).  Each block is factorised once; a Schur form that comes out
diagonal gives a unitary eigenbasis and a closed-form norm decay, otherwise
a general eigendecomposition is used, and matrix exponentials as a last
resort.  Between grid points every trajectory is propagated exactly; jump
times are located by bracketed root finding on the squared norm.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import brentq
from threadpoolctl import threadpool_limits

from .models import TimeGrid, mean_sem
from .rng import substream

CHUNK = 128
MAX_SNAPSHOT_BYTES = 2 * 1024**3


class ResourceError(MemoryError):
    """Requested storage exceeds the configured ceiling."""


class NumericError(ArithmeticError):
    """Non-finite values or a failed factorisation."""


@dataclass
class Channel:
    name: str
    op: sp.csr_matrix  # includes the sqrt(rate) prefactor


@dataclass
class _Block:
    idx: np.ndarray
    kind: str  # "unitary", "eig", "expm"
    lam: np.ndarray | None = None
    V: np.ndarray | None = None
    Vinv: np.ndarray | None = None
    H: np.ndarray | None = None
    _cache: dict = field(default_factory=dict)

    def propagator(self, tau: float) -> np.ndarray:
        key = float(tau)
        if key not in self._cache:
            if len(self._cache) > 4:
                self._cache.clear()
            if self.kind == "expm":
                self._cache[key] = sla.expm(-1j * tau * self.H)
            else:
                self._cache[key] = (self.V * np.exp(-1j * self.lam * tau)) @ self.Vinv
        return self._cache[key]

    def evolve(self, vec: np.ndarray, tau: float) -> np.ndarray:
        if self.kind == "expm":
            return sla.expm(-1j * tau * self.H) @ vec
        return self.V @ (np.exp(-1j * self.lam * tau) * (self.Vinv @ vec))

    def norm2_fn(self, vec: np.ndarray) -> Callable[[float], float]:
        if self.kind == "unitary":
            w = np.abs(self.Vinv @ vec) ** 2
            rate = 2 * self.lam.imag
            return lambda t: float(w @ np.exp(rate * t))
        return lambda t: float(np.linalg.norm(self.evolve(vec, t)) ** 2)


def _factorise(Hk: np.ndarray, idx: np.ndarray) -> _Block:
    d = Hk.shape[0]
    scale = max(np.max(np.abs(Hk)), 1e-300)
    if d == 1:
        return _Block(idx, "unitary", Hk.diagonal().copy(), np.ones((1, 1)), np.ones((1, 1)))
    T, Z = sla.schur(Hk, output="complex")
    off = np.max(np.abs(np.triu(T, 1))) if d > 1 else 0.0
    if off < 1e-11 * scale:
        return _Block(idx, "unitary", T.diagonal().copy(), Z, Z.conj().T)
    lam, V = sla.eig(Hk)
    try:
        cond = np.linalg.cond(V)
    except np.linalg.LinAlgError:
        cond = np.inf
    if cond < 1e8:
        Vinv = np.linalg.inv(V)
        if np.max(np.abs((V * lam) @ Vinv - Hk)) < 1e-9 * scale * max(cond, 1.0):
            return _Block(idx, "eig", lam, V, Vinv)
    return _Block(idx, "expm", H=Hk)


class Generator:
    """Compiled non-Hermitian generator with jump channels and observables."""

    def __init__(self, H: sp.spmatrix, channels: list[Channel], labels: np.ndarray,
                 diag_obs: dict[str, np.ndarray], quad_obs: dict[str, list[tuple[float, sp.spmatrix]]] | None = None):
        self.dim = H.shape[0]
        self.labels = np.asarray(labels)
        self.channels = channels
        K = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for ch in channels:
            K = K + (ch.op.conj().T @ ch.op)
        Hnh = (sp.csr_matrix(H, dtype=complex) - 0.5j * K).tocoo()
        if np.any(self.labels[Hnh.row] != self.labels[Hnh.col]):
            raise ValueError("generator couples different label blocks")
        Hnh = Hnh.tocsr()
        self.blocks: dict[int, _Block] = {}
        for lab in np.unique(self.labels):
            idx = np.nonzero(self.labels == lab)[0]
            self.blocks[int(lab)] = _factorise(Hnh[idx][:, idx].toarray(), idx)
        self.diag_obs = diag_obs
        self.quad_obs = quad_obs or {}
        self._ops_T = [ch.op.T.tocsr() for ch in channels]

    # -- single trajectory helpers
    def occupied(self, psi: np.ndarray) -> list[int]:
        out = []
        for lab, blk in self.blocks.items():
            if np.any(psi[blk.idx] != 0):
                out.append(lab)
        return out

    def evolve(self, psi: np.ndarray, tau: float) -> np.ndarray:
        out = np.zeros_like(psi)
        for lab in self.occupied(psi):
            blk = self.blocks[lab]
            out[blk.idx] = blk.evolve(psi[blk.idx], tau)
        return out

    def norm2_fn(self, psi: np.ndarray) -> Callable[[float], float]:
        fns = [self.blocks[lab].norm2_fn(psi[self.blocks[lab].idx]) for lab in self.occupied(psi)]
        return lambda t: sum(f(t) for f in fns)

    def jump(self, psi: np.ndarray, u: float) -> tuple[np.ndarray, int]:
        outs = [ch.op @ psi for ch in self.channels]
        rates = np.array([np.vdot(o, o).real for o in outs])
        total = rates.sum()
        if not total > 0:
            raise NumericError("jump requested with zero total rate")
        c = int(np.searchsorted(np.cumsum(rates), u * total, side="right"))
        c = min(c, len(rates) - 1)
        while rates[c] == 0:  # guard against u*total landing on a boundary
            c -= 1
        new = outs[c]
        return new / np.linalg.norm(new), c

    # -- observables on a batch (rows = trajectories)
    def measure(self, psi: np.ndarray) -> dict[str, np.ndarray]:
        nrm2 = np.einsum("ij,ij->i", psi.conj(), psi).real
        prob = (np.abs(psi) ** 2) / nrm2[:, None]
        out = {name: prob @ d for name, d in self.diag_obs.items()}
        for name, terms in self.quad_obs.items():
            acc = np.zeros(psi.shape[0])
            for coef, op in terms:
                v = op @ psi.T
                acc += coef * np.einsum("ij,ij->j", v.conj(), v).real
            out[name] = acc / nrm2
        return out


@dataclass
class JumpOutput:
    samples: dict[str, np.ndarray]  # name -> (n_traj, n_points)
    snapshots: np.ndarray | None
    density_groups: np.ndarray | None  # (n_groups, n_points, dim, dim)
    n_jumps: np.ndarray
    channel_counts: np.ndarray


def _run_chunk(gen: Generator, psi0: np.ndarray, times: np.ndarray, seed: int, start: int, count: int,
               record_states: bool, group_of: np.ndarray | None, n_groups: int, tag: int):
    m, dim = count, gen.dim
    rngs = [substream(seed, start + i, tag) for i in range(m)]
    Psi = np.tile(psi0.astype(complex), (m, 1))
    thresh = np.array([g.random() for g in rngs])
    n_pts = times.size
    samples = {name: np.zeros((m, n_pts)) for name in list(gen.diag_obs) + list(gen.quad_obs)}
    snaps = np.zeros((m, n_pts, dim), dtype=complex) if record_states else None
    dens = np.zeros((n_groups, n_pts, dim, dim), dtype=complex) if group_of is not None else None
    njump = np.zeros(m, dtype=np.int64)
    ccount = np.zeros(len(gen.channels), dtype=np.int64)
    for p in range(n_pts):
        if p > 0:
            h = times[p] - times[p - 1]
            start_state = Psi.copy()
            nz = np.zeros((m, len(gen.blocks)), dtype=bool)
            labs = list(gen.blocks)
            for b, lab in enumerate(labs):
                blk = gen.blocks[lab]
                sub = start_state[:, blk.idx]
                nz[:, b] = np.any(sub != 0, axis=1)
                rows = np.nonzero(nz[:, b])[0]
                if rows.size:
                    Psi[np.ix_(rows, blk.idx)] = (blk.propagator(h) @ sub[rows].T).T
            nrm2 = np.einsum("ij,ij->i", Psi.conj(), Psi).real
            if not np.all(np.isfinite(nrm2)):
                raise NumericError(f"non-finite state at t={times[p]}")
            for i in np.nonzero(nrm2 <= thresh)[0]:
                psi, remaining = start_state[i], h
                while True:
                    f = gen.norm2_fn(psi)
                    if f(remaining) > thresh[i]:
                        psi = gen.evolve(psi, remaining)
                        break
                    tau = brentq(lambda t: f(t) - thresh[i], 0.0, remaining, xtol=1e-9 * h, rtol=1e-12)
                    psi = gen.evolve(psi, tau)
                    psi, c = gen.jump(psi, rngs[i].random())
                    ccount[c] += 1
                    njump[i] += 1
                    thresh[i] = rngs[i].random()
                    remaining -= tau
                    if remaining <= 0:
                        break
                Psi[i] = psi
        obs = gen.measure(Psi)
        for name, vals in obs.items():
            samples[name][:, p] = vals
        if record_states or dens is not None:
            nrm = np.sqrt(np.einsum("ij,ij->i", Psi.conj(), Psi).real)
            normed = Psi / nrm[:, None]
            if record_states:
                snaps[:, p] = normed
            if dens is not None:
                for g in range(n_groups):
                    sel = normed[group_of[start:start + m] == g]
                    if sel.size:
                        dens[g, p] += sel.T @ sel.conj()
    return samples, snaps, dens, njump, ccount


def run_generator(gen: Generator, psi0: np.ndarray, grid: TimeGrid, n_traj: int, seed: int, *,
                  record_states: bool = False, density_groups: int = 0, threads: int | None = None,
                  tag: int = 0) -> JumpOutput:
    """Sample ``n_traj`` trajectories; results are independent of ``threads``."""
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    psi0 = np.asarray(psi0, dtype=complex)
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1) > 1e-10:
        raise ValueError("initial state must be normalised")
    times = grid.times
    if record_states:
        need = n_traj * times.size * gen.dim * 16
        if need > MAX_SNAPSHOT_BYTES:
            raise ResourceError(f"snapshots need {need / 1e9:.2f} GB > {MAX_SNAPSHOT_BYTES / 1e9:.2f} GB")
    group_of = None
    if density_groups:
        in_flight = 1 + min(threads or int(os.environ.get("KCSR_THREADS", "1")), -(-n_traj // CHUNK))
        need = in_flight * density_groups * times.size * gen.dim**2 * 16
        if need > MAX_SNAPSHOT_BYTES:
            raise ResourceError(f"density accumulation needs {need / 1e9:.2f} GB")
        group_of = np.arange(n_traj) % density_groups
    starts = list(range(0, n_traj, CHUNK))
    args = [(s, min(CHUNK, n_traj - s)) for s in starts]
    threads = threads or int(os.environ.get("KCSR_THREADS", "1"))

    def work(a):
        with threadpool_limits(1):
            return _run_chunk(gen, psi0, times, seed, a[0], a[1], record_states, group_of,
                              density_groups, tag)

    # reduce chunk results in index order as they arrive; at most ``threads``
    # chunks (and their density accumulators) are alive at once
    parts, dens = [], None

    def absorb(part):
        nonlocal dens
        if density_groups:
            if dens is None:
                dens = part[2]
            else:
                dens += part[2]
        parts.append(part[:2] + (None,) + part[3:])

    if threads > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for b in range(0, len(args), threads):
                for part in ex.map(work, args[b:b + threads]):
                    absorb(part)
    else:
        for a in args:
            absorb(work(a))
    names = parts[0][0].keys()
    samples = {k: np.concatenate([p[0][k] for p in parts]) for k in names}
    snaps = np.concatenate([p[1] for p in parts]) if record_states else None
    njump = np.concatenate([p[3] for p in parts])
    ccount = sum(p[4] for p in parts)
    return JumpOutput(samples, snaps, dens, njump, ccount)


def summarise(samples: dict[str, np.ndarray]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    return {k: mean_sem(v, axis=0) for k, v in samples.items()}
