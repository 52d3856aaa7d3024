"""Effective spin-model rates from cavity and Raman parameters."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, asdict

VALIDITY_THRESHOLD = 10.0


class CavityValidityWarning(UserWarning):
    """The cavity is not far enough off resonance / lossy for elimination."""


@dataclass(frozen=True)
class CavityParams:
    g: float
    kappa: float
    delta: float = 0.0
    n_atoms: int = 1

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")


@dataclass(frozen=True)
class EffectiveRates:
    gamma: float
    chi: float

    def to_dict(self):
        return asdict(self)


def cavity_alpha(p: CavityParams) -> complex:
    """Bath correlation integral ``g^2 / (kappa/2 + i Delta)``."""
    return p.g**2 / complex(p.kappa / 2, p.delta)


def eliminate_cavity(p: CavityParams) -> EffectiveRates:
    """Collective decay rate and dispersive shift after eliminating the cavity.

    >>> eliminate_cavity(CavityParams(g=1, kappa=2, delta=1))
    EffectiveRates(gamma=1.0, chi=-0.5)
    """
    if p.kappa <= 0:
        raise ValueError("kappa must be positive")
    denom = p.delta**2 + (p.kappa / 2) ** 2
    return EffectiveRates(gamma=p.g**2 * p.kappa / denom, chi=-(p.g**2) * p.delta / denom)


def validity_margin(p: CavityParams) -> float:
    """``(Delta^2 + kappa^2) / (g^2 N)``; ``inf`` for a decoupled cavity.

    Issues a :class:`CavityValidityWarning` when the margin is below 10.
    """
    if p.g == 0:
        return math.inf
    margin = (p.delta**2 + p.kappa**2) / (p.g**2 * p.n_atoms)
    if margin < VALIDITY_THRESHOLD:
        warnings.warn(
            f"adiabatic elimination margin {margin:.3g} < {VALIDITY_THRESHOLD:g}: "
            "cavity excitations are not virtual",
            CavityValidityWarning,
            stacklevel=2,
        )
    return margin


@dataclass(frozen=True)
class RamanParams:
    g: float
    Omega: float
    Delta_e: float
    gamma_e: float
    kappa: float


@dataclass(frozen=True)
class RamanReduction:
    g_eff: float
    gamma_eff: float
    cooperativity: float
    loss_ratio: float
    collective_gamma: float
    light_shift: float
    omega_over_delta: float

    def to_dict(self):
        return asdict(self)


def raman_reduce(r: RamanParams) -> RamanReduction:
    """Two-photon Raman reduction of the three-level scheme.

    ``loss_ratio`` is single-site loss over collective decay on resonance;
    it is evaluated both directly and as ``1/(4C)`` and the two must agree.
    ``light_shift`` is the photon-number dependent shift ``g^2/Delta_e`` per
    photon, reported for reference only.
    """
    if r.Delta_e == 0:
        raise ValueError("intermediate-state detuning must be nonzero")
    if r.gamma_e <= 0 or r.kappa <= 0 or r.g <= 0:
        raise ValueError("g, gamma_e and kappa must be positive")
    ratio = r.Omega / r.Delta_e
    g_eff = r.g * ratio
    gamma_eff = r.gamma_e * ratio**2
    coop = r.g**2 / (r.gamma_e * r.kappa)
    collective = 4 * g_eff**2 / r.kappa
    via_c = 1 / (4 * coop)
    # with Omega = 0 both rates vanish and only the cooperativity form is defined
    if collective and not math.isclose(gamma_eff / collective, via_c, rel_tol=1e-12):
        raise ArithmeticError(f"loss ratio mismatch {gamma_eff / collective!r} vs {via_c!r}")
    return RamanReduction(
        g_eff=g_eff,
        gamma_eff=gamma_eff,
        cooperativity=coop,
        loss_ratio=via_c,
        collective_gamma=collective,
        light_shift=r.g**2 / r.Delta_e,
        omega_over_delta=ratio,
    )
