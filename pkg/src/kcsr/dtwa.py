"""Discrete truncated Wigner sampling of constrained spins coupled to a lossy cavity.

Spins are tracked through ``sigma^- = (s^x - i s^y)/2`` and ``s^z`` with
``s^{x,y} = +-1`` sampled at t=0.  The cavity is a complex Wigner variable
with vacuum half-width ``1/2`` and additive Ito noise from cavity loss.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numba
import numpy as np

from .dynamics.jumps import NumericError
from .dynamics.models import TimeGrid, TrajectoryResult, mean_sem
from .dynamics.rng import substream
from .spin_algebra import ConstraintRule

NOISE_BLOCK = 512
RNG_TAG = 7
DTWA_OBSERVABLES = ("n", "Sz", "Sperp2", "Nadj", "photons")


@dataclass(frozen=True)
class DtwaParams:
    n_sites: int
    coefficients: tuple[float, float, float] | None  # (alpha, beta, gamma); None = Dicke
    g: float = 1.0
    kappa: float = 30.0
    delta: float = 0.0
    alpha0: complex = 0.0
    dt: float | None = None
    n_traj: int = 100
    seed: int = 0
    t_end: float = 1.0
    n_points: int = 101
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.boundary not in ("periodic", "open"):
            raise ValueError("boundary must be periodic or open")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")

    @classmethod
    def from_rule(cls, rule: ConstraintRule, n_sites: int, **kw) -> "DtwaParams":
        coeffs = rule.dtwa_coefficients
        if coeffs is None and rule.kind != "dicke":
            raise ValueError(f"rule {rule.kind!r} has no (alpha, beta, gamma) representation")
        return cls(n_sites, coeffs, boundary=rule.boundary, **kw)

    @property
    def is_dicke(self) -> bool:
        return self.coefficients is None or tuple(self.coefficients) == (0.0, 0.0, 0.0)

    @property
    def default_dt(self) -> float:
        return 0.002 / max(self.kappa, self.g * self.n_sites, 1e-12)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(0.0, self.t_end, self.n_points)


@dataclass
class PhasePoint:
    a: np.ndarray  # complex, shape (M,)
    sx: np.ndarray  # real, shape (M, N)
    sy: np.ndarray
    sz: np.ndarray

    @property
    def sm(self) -> np.ndarray:
        return 0.5 * (self.sx - 1j * self.sy)


def sample_initial(params: DtwaParams, index: int | np.ndarray = 0, rng: np.random.Generator | None = None
                   ) -> PhasePoint:
    """Initial Wigner sample(s) for fully-up spins and a coherent cavity state."""
    idx = np.atleast_1d(index)
    n = params.n_sites
    a = np.empty(idx.size, dtype=complex)
    sx = np.empty((idx.size, n))
    sy = np.empty((idx.size, n))
    for r, i in enumerate(idx):
        g = rng if rng is not None else substream(params.seed, int(i), RNG_TAG)
        spins = g.integers(0, 2, size=(2, n)) * 2.0 - 1.0
        eta = g.standard_normal(2)
        sx[r], sy[r] = spins
        a[r] = params.alpha0 + 0.5 * (eta[0] + 1j * eta[1])
    return PhasePoint(a, sx, sy, np.ones((idx.size, n)))


def _shift(x: np.ndarray, k: int, periodic: bool, fill: float) -> np.ndarray:
    """``out[:, j] = x[:, j + k]`` with wrap or constant fill."""
    if periodic:
        return np.roll(x, -k, axis=1)
    out = np.full_like(x, fill)
    n = x.shape[1]
    if k > 0:
        out[:, : n - k] = x[:, k:]
    elif k < 0:
        out[:, -k:] = x[:, : n + k]
    else:
        out[:] = x
    return out


def drift(params: DtwaParams, a: np.ndarray, sm: np.ndarray, sz: np.ndarray):
    """Deterministic part of ``(a, sigma^-, s^z)`` time derivatives."""
    g, per = params.g, params.boundary == "periodic"
    nn = 0.5 * (1.0 + sz)
    ac = a[:, None]
    if params.is_dicke:
        P = np.ones_like(sz)
        sm_dot = 1j * g * ac * sz
    else:
        al, be, ga = params.coefficients
        n_m1, n_p1 = _shift(nn, -1, per, 0.0), _shift(nn, 1, per, 0.0)
        n_m2, n_p2 = _shift(nn, -2, per, 0.0), _shift(nn, 2, per, 0.0)
        P = al * n_m1 + be * n_p1 + ga * n_m1 * n_p1
        sp_p1 = _shift(np.conj(sm), 1, per, 0.0)
        sp_m1 = _shift(np.conj(sm), -1, per, 0.0)
        x_p = 2.0 * np.real(ac * sp_p1)  # a s^+_{j+1} + c.c.
        x_m = 2.0 * np.real(ac * sp_m1)
        sm_dot = 1j * g * ac * P * sz - 1j * g * sm * ((al + ga * n_p2) * x_p + (be + ga * n_m2) * x_m)
    a_dot = -1j * params.delta * a - 1j * g * np.sum(P * sm, axis=1) - 0.5 * params.kappa * a
    sz_dot = -2j * g * P * (ac * np.conj(sm) - np.conj(ac) * sm)
    return a_dot, sm_dot, sz_dot.real


def step(point: PhasePoint, params: DtwaParams, dt: float, noise: np.ndarray | None) -> PhasePoint:
    """One Heun step of the drift plus the additive cavity noise increment.

    ``noise`` holds complex standard normals (``E|z|^2 = 1``) per trajectory.
    """
    a, sm, sz = point.a, point.sm, point.sz
    dW = 0.0
    if params.kappa > 0 and noise is not None:
        dW = -0.5 * math.sqrt(2.0 * params.kappa * dt) * noise
    k1 = drift(params, a, sm, sz)
    a1, sm1, sz1 = a + dt * k1[0] + dW, sm + dt * k1[1], sz + dt * k1[2]
    k2 = drift(params, a1, sm1, sz1)
    a2 = a + 0.5 * dt * (k1[0] + k2[0]) + dW
    sm2 = sm + 0.5 * dt * (k1[1] + k2[1])
    sz2 = sz + 0.5 * dt * (k1[2] + k2[2])
    return PhasePoint(a2, 2.0 * sm2.real, -2.0 * sm2.imag, sz2)


@numba.njit(cache=True)
def _drift1(a, sm, sz, g, kappa, delta, al, be, ga, dicke, periodic, dsm, dsz):
    n = sm.size
    acc = 0j
    for j in range(n):
        if dicke:
            P = 1.0
            dsm[j] = 1j * g * a * sz[j]
        else:
            nm1 = np1 = nm2 = np2 = 0.0
            spm1 = spp1 = 0j
            if periodic or j >= 1:
                nm1 = 0.5 * (1.0 + sz[(j - 1) % n])
                spm1 = np.conj(sm[(j - 1) % n])
            if periodic or j + 1 < n:
                np1 = 0.5 * (1.0 + sz[(j + 1) % n])
                spp1 = np.conj(sm[(j + 1) % n])
            if periodic or j >= 2:
                nm2 = 0.5 * (1.0 + sz[(j - 2) % n])
            if periodic or j + 2 < n:
                np2 = 0.5 * (1.0 + sz[(j + 2) % n])
            P = al * nm1 + be * np1 + ga * nm1 * np1
            xp = 2.0 * (a * spp1).real
            xm = 2.0 * (a * spm1).real
            dsm[j] = 1j * g * a * P * sz[j] - 1j * g * sm[j] * ((al + ga * np2) * xp + (be + ga * nm2) * xm)
        dsz[j] = 4.0 * g * P * (a * np.conj(sm[j])).imag
        acc += P * sm[j]
    return -1j * delta * a - 1j * g * acc - 0.5 * kappa * a


@numba.njit(cache=True)
def _heun_block(a, sm, sz, noise, h, noise_amp, g, kappa, delta, al, be, ga, dicke, periodic):
    """Advance every trajectory by ``noise.shape[1]`` steps in place."""
    m_traj, n = sm.shape
    k1s = np.empty(n, dtype=np.complex128)
    k2s = np.empty(n, dtype=np.complex128)
    k1z = np.empty(n)
    k2z = np.empty(n)
    sm1 = np.empty(n, dtype=np.complex128)
    sz1 = np.empty(n)
    for m in range(m_traj):
        x = a[m]
        s = sm[m]
        z = sz[m]
        for k in range(noise.shape[1]):
            dW = noise_amp * noise[m, k]
            k1a = _drift1(x, s, z, g, kappa, delta, al, be, ga, dicke, periodic, k1s, k1z)
            for j in range(n):
                sm1[j] = s[j] + h * k1s[j]
                sz1[j] = z[j] + h * k1z[j]
            x1 = x + h * k1a + dW
            k2a = _drift1(x1, sm1, sz1, g, kappa, delta, al, be, ga, dicke, periodic, k2s, k2z)
            x = x + 0.5 * h * (k1a + k2a) + dW
            for j in range(n):
                s[j] += 0.5 * h * (k1s[j] + k2s[j])
                z[j] += 0.5 * h * (k1z[j] + k2z[j])
        a[m] = x


def _observables(point: PhasePoint, periodic: bool) -> dict[str, np.ndarray]:
    n = point.sz.shape[1]
    nn = 0.5 * (1.0 + point.sz)
    sx, sy = point.sx, point.sy
    sperp = 0.25 * (sx.sum(1) ** 2 - (sx**2).sum(1) + sy.sum(1) ** 2 - (sy**2).sum(1)) + 0.5 * n
    pairs = nn * (np.roll(nn, -1, axis=1) if periodic else np.c_[nn[:, 1:], np.zeros(nn.shape[0])])
    return {
        "n": nn.mean(1),
        "Sz": 0.5 * point.sz.sum(1),
        "Sperp2": sperp,
        "Nadj": pairs.sum(1),
        "photons": np.abs(point.a) ** 2 - 0.5,
    }


def _complex_normals(rngs, count: int) -> np.ndarray:
    out = np.empty((len(rngs), count), dtype=complex)
    for r, g in enumerate(rngs):
        x = g.standard_normal((count, 2))
        out[r] = (x[:, 0] + 1j * x[:, 1]) / math.sqrt(2.0)
    return out


def run_dtwa(params: DtwaParams, observables=None, *, dt: float | None = None, chunk: int = 4096,
             return_samples: bool = False) -> TrajectoryResult:
    """Ensemble of DTWA trajectories sampled on ``params.grid``."""
    if params.n_traj < 2:
        raise ValueError("n_traj must be >= 2 for standard errors")
    want = list(observables) if observables is not None else list(DTWA_OBSERVABLES)
    unknown = set(want) - set(DTWA_OBSERVABLES)
    if unknown:
        raise ValueError(f"unknown DTWA observables {sorted(unknown)}")
    grid = params.grid
    times = grid.times
    dt_target = dt or params.dt or params.default_dt
    sub = max(1, math.ceil(grid.step / dt_target - 1e-9))
    h = grid.step / sub
    periodic = params.boundary == "periodic"
    amp = -0.5 * math.sqrt(2.0 * params.kappa * h)
    al, be, ga = params.coefficients if not params.is_dicke else (0.0, 0.0, 0.0)
    consts = (float(params.g), float(params.kappa), float(params.delta), float(al), float(be), float(ga),
              params.is_dicke, periodic)
    total = {k: np.zeros((params.n_traj, times.size)) for k in want}
    for start in range(0, params.n_traj, chunk):
        idx = np.arange(start, min(start + chunk, params.n_traj))
        rngs = [substream(params.seed, int(i), RNG_TAG) for i in idx]
        a = np.empty(idx.size, dtype=complex)
        sx = np.empty((idx.size, params.n_sites))
        sy = np.empty_like(sx)
        for r, g in enumerate(rngs):
            single = sample_initial(params, int(idx[r]), rng=g)
            a[r], sx[r], sy[r] = single.a[0], single.sx[0], single.sy[0]
        pt = PhasePoint(a, sx, sy, np.ones_like(sx))
        sm, sz = pt.sm.copy(), pt.sz.copy()
        noise_buf, used = None, NOISE_BLOCK
        obs = _observables(pt, periodic)
        for k in want:
            total[k][idx, 0] = obs[k]
        for p in range(1, times.size):
            left = sub
            while left:
                if used == NOISE_BLOCK:
                    noise_buf = (_complex_normals(rngs, NOISE_BLOCK) if params.kappa > 0
                                 else np.zeros((idx.size, NOISE_BLOCK), dtype=complex))
                    used = 0
                take = min(left, NOISE_BLOCK - used)
                with np.errstate(all="ignore"):
                    _heun_block(a, sm, sz, noise_buf[:, used:used + take], h, amp, *consts)
                used += take
                left -= take
            pt = PhasePoint(a, 2.0 * sm.real, -2.0 * sm.imag, sz)
            bad = ~(np.isfinite(pt.a) & np.all(np.isfinite(pt.sz), axis=1) & np.all(np.isfinite(pt.sx), axis=1))
            if np.any(bad):
                i = int(idx[np.argmax(bad)])
                raise NumericError(f"DTWA trajectory {i} diverged at t={times[p]:.4g} with dt={h:.3g}; "
                                   f"try dt <= {stable_dt(params, h):.3g}")
            obs = _observables(pt, periodic)
            for k in want:
                total[k][idx, p] = obs[k]
    stats = {k: mean_sem(v, axis=0) for k, v in total.items()}
    meta = {"coefficients": params.coefficients, "dt": h, "g": params.g, "kappa": params.kappa,
            "delta": params.delta, "n_sites": params.n_sites, "boundary": params.boundary}
    res = TrajectoryResult(grid, stats, params.n_traj, params.seed, None, None, meta)
    if return_samples:
        res.meta["samples"] = total
    return res


def stable_dt(params: DtwaParams, dt: float, *, pilot_traj: int = 8, bound: float = 1e3) -> float:
    """Largest ``dt / 2^k`` for which a short pilot run stays finite and bounded."""
    trial = dt
    for _ in range(30):
        pilot = replace(params, n_traj=pilot_traj, seed=params.seed + 1)
        a = np.full(pilot_traj, params.alpha0 + 0.5, dtype=complex)
        rng = substream(pilot.seed, 0, RNG_TAG)
        sx = rng.integers(0, 2, (pilot_traj, params.n_sites)) * 2.0 - 1.0
        sy = rng.integers(0, 2, (pilot_traj, params.n_sites)) * 2.0 - 1.0
        pt = PhasePoint(a, sx, sy, np.ones_like(sx))
        ok = True
        with np.errstate(all="ignore"):
            for _ in range(int(min(params.t_end / trial, 20000))):
                z = (rng.standard_normal(pilot_traj) + 1j * rng.standard_normal(pilot_traj)) / math.sqrt(2)
                pt = step(pt, params, trial, z if params.kappa > 0 else None)
                if not (np.all(np.isfinite(pt.a)) and np.max(np.abs(pt.sz)) < bound):
                    ok = False
                    break
        if ok:
            return trial
        trial /= 2
    return trial
