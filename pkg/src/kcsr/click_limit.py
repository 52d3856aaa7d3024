"""Click-limit cascade: layer norms, AND combinatorics and the Boolean bound.

In the click limit the state after ``k`` emissions is ``F^k`` applied to the
fully inverted state.  Layer norms ``B_k`` are accumulated in log space from
per-layer renormalisation factors since the decay-history counts grow like
``(k!)^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .spin_algebra import ConstraintRule, SparseState, SpinConfig, apply_F, popcount

MAX_LAYER_SITES = 28


class SupportOverflow(MemoryError):
    pass


class BoundViolation(AssertionError):
    """A layer intensity fell below the Boolean lower bound."""


@dataclass
class LayerSpectrum:
    rule: ConstraintRule
    n_sites: int
    log_norms: np.ndarray
    intensities: np.ndarray
    k_max: int
    supports: list[int] = field(default_factory=list)

    @property
    def norms(self) -> np.ndarray:
        return np.exp(self.log_norms)


def layer_spectrum(rule: ConstraintRule, n_sites: int, k_max: int | None = None, *,
                   max_support: int = 50_000_000, keep_layers: bool = False):
    """Layer norms ``B_k = ||F^k |up...up>||^2`` for ``k = 0..k_max``.

    Returns a :class:`LayerSpectrum`; with ``keep_layers`` also the list of
    normalised layer states (as :class:`SparseState`).
    """
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    if n_sites > MAX_LAYER_SITES:
        raise SupportOverflow(f"N={n_sites} above the layer ceiling {MAX_LAYER_SITES}")
    k_max = n_sites if k_max is None else int(k_max)
    if not 0 <= k_max <= n_sites:
        raise ValueError("k_max must lie in 0..N")

    state = SparseState(n_sites, np.array([(1 << n_sites) - 1]), np.array([1.0]))
    log_norms = np.full(k_max + 1, -np.inf)
    log_norms[0] = 0.0
    supports = [1]
    layers = [state] if keep_layers else None
    for k in range(k_max):
        nxt = apply_F(rule, state)
        if len(nxt) > max_support:
            raise SupportOverflow(f"layer {k + 1} support {len(nxt)} exceeds {max_support}")
        nsq = nxt.norm_sq
        supports.append(len(nxt))
        if nsq == 0:
            if keep_layers:
                layers.append(nxt)
            break
        log_norms[k + 1] = log_norms[k] + math.log(nsq)
        state = nxt.scaled(1 / math.sqrt(nsq))
        if keep_layers:
            layers.append(state)
    with np.errstate(invalid="ignore", over="ignore"):
        diff = log_norms[1:] - log_norms[:-1]
    intensities = np.where(np.isfinite(diff), np.exp(np.where(np.isfinite(diff), diff, 0.0)), 0.0)
    spec = LayerSpectrum(rule, n_sites, log_norms, intensities, k_max, supports)
    return (spec, layers) if keep_layers else spec


# --------------------------------------------------------------------------
# AND closed forms


def and_count(n_sites: int, k: int) -> int:
    """Number of ``k``-subsets of an ``N``-ring with no two adjacent sites."""
    if k < 0 or k > n_sites // 2:
        return 0
    if k == 0:
        return 1
    return n_sites * math.comb(n_sites - k, k) // (n_sites - k)


def and_intensity(n_sites: int, k: int) -> float:
    """Exact AND layer intensity ``(k+1)(N-2k)(N-2k-1)/(N-k-1)``."""
    if k < 0 or k > n_sites // 2:
        return 0.0
    num = (k + 1) * (n_sites - 2 * k) * (n_sites - 2 * k - 1)
    den = n_sites - k - 1
    if num == 0:
        return 0.0
    return num / den


def g_and(n):
    """Thermodynamic AND scaling function ``(1-n)(2n-1)^2/n`` on ``[1/2, 1]``."""
    n_arr = np.asarray(n, dtype=float)
    inside = (n_arr >= 0.5) & (n_arr <= 1.0)
    safe = np.where(inside, n_arr, 1.0)
    val = np.where(inside, (1 - safe) * (2 * safe - 1) ** 2 / safe, 0.0)
    return float(val) if np.ndim(val) == 0 else val


def g_and_maximizer(tol: float = 1e-12) -> float:
    """Density maximising ``g_and``, located by bounded scalar search."""
    res = optimize.minimize_scalar(lambda x: -g_and(x), bounds=(0.5, 1.0), method="bounded",
                                   options={"xatol": tol})
    return float(res.x)


# --------------------------------------------------------------------------
# Boolean lower bound


def boolean_lower_bound(w: int, n_sites: int, k: int) -> float:
    gap = n_sites - (2 * w + 1) * k
    if gap <= 0 or k < 0:
        return 0.0
    return float((k + 1) * gap)


def ring_distance(i: int, j: int, n_sites: int) -> int:
    d = abs(i - j) % n_sites
    return min(d, n_sites - d)


def isolated_zone_size(decayed: SpinConfig, w: int) -> int:
    """``|G_w(S)|``: sites outside ``S`` at ring distance ``> w`` from all of ``S``."""
    n = decayed.n_sites
    sites = [j - 1 for j in decayed.up_sites()]
    if not sites:
        return n
    blocked = np.zeros(n, dtype=bool)
    for s in sites:
        for d in range(-w, w + 1):
            blocked[(s + d) % n] = True
    return int(n - blocked.sum())


@dataclass
class BoundReport:
    rule: ConstraintRule
    n_sites: int
    ks: np.ndarray
    intensities: np.ndarray
    bounds: np.ndarray
    margins: np.ndarray
    lemma_checks: int
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_bound(rule: ConstraintRule, n_sites: int, *, lemma_samples: int = 200, seed: int = 0,
                 raise_on_violation: bool = True) -> BoundReport:
    """Check every in-window layer intensity against ``(k+1)[N-(2w+1)k]``.

    Also samples reachable decay sets ``S`` from each layer and checks both
    ``|G_w(S)| >= N-(2w+1)k`` and the insertion inequality
    ``a(S u {j}) >= (k+1) a(S)`` for isolated ``j``, where ``a`` counts decay
    histories.
    """
    if rule.boundary != "periodic":
        raise ValueError("the Boolean bound is stated on a ring")
    if not rule.table[-1]:
        raise ValueError("rule must allow emission when all neighbours are up")
    w = rule.w
    c = 2 * w + 1
    k_top = (n_sites - 1) // c  # largest k with N - c k > 0
    spec, layers = layer_spectrum(rule, n_sites, min(k_top + 1, n_sites), keep_layers=True)
    ks = np.arange(k_top + 1)
    inten = spec.intensities[: k_top + 1]
    bounds = np.array([boolean_lower_bound(w, n_sites, k) for k in ks])
    margins = inten - bounds
    violations = []
    for k in ks:
        if not spec.log_norms[k] > -np.inf:
            violations.append(("B_k vanished", int(k)))
        if inten[k] < bounds[k] * (1 - 1e-12):
            violations.append(("intensity", int(k), float(inten[k]), float(bounds[k])))

    rng = np.random.default_rng(seed)
    full = (1 << n_sites) - 1
    checks = 0
    for k in ks:
        layer = layers[k]
        if len(layer) == 0 or k + 1 >= len(layers):
            continue
        nxt = layers[k + 1]
        pick = rng.choice(len(layer), size=min(lemma_samples, len(layer)), replace=False)
        # history counts: a(S) = psi_k(S) sqrt(B_k)
        for idx in pick:
            cfg = int(layer.configs[idx])
            decayed = SpinConfig(full ^ cfg, n_sites)
            g = isolated_zone_size(decayed, w)
            checks += 1
            if g < n_sites - c * k:
                violations.append(("zone", int(k), str(decayed)))
            if g == 0:
                continue
            a_s = layer.amps[idx] * math.exp(0.5 * spec.log_norms[k])
            dec_sites = [j - 1 for j in decayed.up_sites()]
            free = [j for j in range(n_sites)
                    if all(ring_distance(j, s, n_sites) > w for s in dec_sites)]
            j = int(rng.choice(free))
            target = cfg ^ (1 << j)
            pos = np.searchsorted(nxt.configs, target)
            a_t = 0.0
            if pos < len(nxt) and nxt.configs[pos] == target:
                a_t = nxt.amps[pos] * math.exp(0.5 * spec.log_norms[k + 1])
            if a_t < (k + 1) * a_s * (1 - 1e-9):
                violations.append(("insertion", int(k), str(decayed), j + 1))
    report = BoundReport(rule, n_sites, ks, inten, bounds, margins, checks, violations)
    if violations and raise_on_violation:
        raise BoundViolation(f"{len(violations)} violations for {rule} N={n_sites}: {violations[:5]}")
    return report


def random_boolean_rule(w: int, rng: np.random.Generator) -> ConstraintRule:
    """Uniform truth table on ``2w`` neighbours conditioned on allowing all-ones."""
    table = rng.integers(0, 2, size=1 << (2 * w)).astype(bool)
    table[-1] = True
    return ConstraintRule.custom(w, table)


def waiting_time_sum(spec: LayerSpectrum, k_stop: int) -> float:
    """``sum_{k<k_stop} 1/<F^dag F>_k`` (in units of ``1/Gamma``)."""
    inten = spec.intensities[:k_stop]
    if np.any(inten <= 0):
        return math.inf
    return float(np.sum(1.0 / inten))


# --------------------------------------------------------------------------
# rate equation


@dataclass
class DensityTrajectory:
    tau: np.ndarray
    n: np.ndarray
    rule: str


def _scaling(rule_scaling) -> Callable:
    if rule_scaling is None or (isinstance(rule_scaling, str) and rule_scaling.lower() == "and"):
        return g_and
    if callable(rule_scaling):
        return rule_scaling
    raise ValueError(f"unknown scaling function {rule_scaling!r}")


def ode_density(rule_scaling, n0: float, tau_grid) -> DensityTrajectory:
    """Integrate ``dn/dtau = -g(n)`` from ``n(0) = n0`` on ``tau_grid``."""
    g = _scaling(rule_scaling)
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size < 1 or np.any(np.diff(tau) <= 0):
        raise ValueError("tau grid must be strictly increasing")
    if not 0.5 < n0 <= 1.0:
        raise ValueError("n0 must lie in (1/2, 1]")
    if tau.size == 1:
        return DensityTrajectory(tau, np.array([n0]), _name(rule_scaling))
    sol = integrate.solve_ivp(lambda t, y: [-g(y[0])], (tau[0], tau[-1]), [n0], t_eval=tau,
                              method="LSODA", rtol=1e-10, atol=1e-13)
    if not sol.success:
        raise RuntimeError(sol.message)
    n = np.clip(sol.y[0], 0.0, 1.0)
    n = np.minimum.accumulate(n)
    return DensityTrajectory(tau, n, _name(rule_scaling))


def _name(rule_scaling) -> str:
    if rule_scaling is None or isinstance(rule_scaling, str):
        return "and"
    return getattr(rule_scaling, "__name__", "custom")


def quadrature_time(n_target: float, n0: float, rule_scaling=None, *, slope_at_one: float | None = None) -> float:
    """Rescaled time ``tau = int_{n_target}^{n0} dn / g(n)``.

    ``g`` vanishes linearly at ``n = 1``; the integrand is split as
    ``1/g = [1/h(n) - 1/h(1)]/(1-n) + 1/(h(1)(1-n))`` with ``h = g/(1-n)`` and
    the logarithmic piece is integrated in closed form.
    """
    g = _scaling(rule_scaling)
    if not 0.5 < n0 <= 1.0:
        raise ValueError("n0 must lie in (1/2, 1]")
    if not 0.5 < n_target <= n0:
        raise ValueError(f"target {n_target} outside the reachable interval (1/2, {n0}]")
    if n_target == n0:
        return 0.0
    if n0 == 1.0:
        return math.inf
    if slope_at_one is None:
        eps = 1e-7
        slope_at_one = g(1 - eps) / eps if g is not g_and else 1.0
    h1 = slope_at_one

    def regular(x):
        one_minus = 1.0 - x
        if one_minus < 1e-9:
            # limit of [1/h(x) - 1/h1]/(1-x) via a one-sided difference
            x = 1 - 1e-9
            one_minus = 1e-9
        return (one_minus / g(x) - 1.0 / h1) / one_minus

    reg, _ = integrate.quad(regular, n_target, n0, epsabs=1e-13, epsrel=1e-12, limit=200)
    log_part = math.log((1 - n_target) / (1 - n0)) / h1
    return reg + log_part
