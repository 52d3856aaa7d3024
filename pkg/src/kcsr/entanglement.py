"""Mixed-state entanglement: log-negativity, mutual information, dark-state witness.

Tensor convention: reshaping a ``2^N`` vector to ``(2,)*N`` puts site ``N``
on axis 0 and site 1 on axis ``N-1`` (site ``j`` is bit ``j-1``).  All
logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics.models import DensityMatrix
from .spin_algebra import ConstraintRule, block_count_diagonal, lowering_matrix

NEG_FLOOR = 1e-10
MAX_ENTANGLEMENT_SITES = 12


@dataclass(frozen=True)
class Bipartition:
    n_sites: int
    subset_a: tuple[int, ...]  # 1-based sites

    def __post_init__(self):
        a = tuple(sorted(set(int(s) for s in self.subset_a)))
        if not a or len(a) >= self.n_sites:
            raise ValueError("subset A must be a nonempty proper subset")
        if a[0] < 1 or a[-1] > self.n_sites:
            raise ValueError(f"sites outside 1..{self.n_sites}")
        object.__setattr__(self, "subset_a", a)

    @classmethod
    def half(cls, n_sites: int) -> "Bipartition":
        """Left half; ``A`` gets the extra site for odd ``N``."""
        return cls(n_sites, tuple(range(1, (n_sites + 1) // 2 + 1)))

    @property
    def subset_b(self) -> tuple[int, ...]:
        return tuple(s for s in range(1, self.n_sites + 1) if s not in self.subset_a)


def _axis(site: int, n: int) -> int:
    return n - site


def _as_matrix(rho) -> tuple[np.ndarray, int]:
    if isinstance(rho, DensityMatrix):
        return rho.entries, rho.n_sites
    m = np.asarray(rho)
    n = int(round(math.log2(m.shape[0])))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or 1 << n != m.shape[0]:
        raise ValueError(f"not a 2^N square matrix: shape {m.shape}")
    return m, n


def partial_transpose(rho, part: Bipartition | None = None) -> np.ndarray:
    """Transpose the subsystem-B indices of ``rho``."""
    m, n = _as_matrix(rho)
    part = part or Bipartition.half(n)
    if part.n_sites != n:
        raise ValueError(f"bipartition is for N={part.n_sites}, matrix has N={n}")
    t = m.reshape((2,) * (2 * n))
    perm = list(range(2 * n))
    for s in part.subset_b:
        ax = _axis(s, n)
        perm[ax], perm[n + ax] = n + ax, ax
    return t.transpose(perm).reshape(m.shape)


def log_negativity(rho, part: Bipartition | None = None, *, herm_tol: float = 1e-10) -> float:
    """``ln || rho^{T_B} ||_1`` from the eigenvalues of the (Hermitian) partial transpose."""
    m, n = _as_matrix(rho)
    if n > MAX_ENTANGLEMENT_SITES:
        raise ValueError(f"N={n} exceeds the negativity ceiling {MAX_ENTANGLEMENT_SITES}")
    dev = np.max(np.abs(m - m.conj().T))
    if dev > herm_tol:
        raise ValueError(f"input is not Hermitian (deviation {dev:.2e})")
    pt = partial_transpose(m, part)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    val = math.log(np.sum(np.abs(ev)))
    if -NEG_FLOOR < val < 0:
        val = 0.0
    return float(val)


def reduced_density(rho, sites: Sequence[int]) -> np.ndarray:
    """Reduced matrix on ``sites`` (1-based); ordering follows the global bit convention."""
    m, n = _as_matrix(rho)
    keep = sorted(set(sites))
    t = m.reshape((2,) * (2 * n))
    traced = [s for s in range(1, n + 1) if s not in keep]
    # trace out from the highest axis down so indices stay valid
    cur_n = n
    order = sorted((_axis(s, n) for s in traced), reverse=True)
    for ax in order:
        t = np.trace(t, axis1=ax, axis2=cur_n + ax)
        cur_n -= 1
    d = 1 << len(keep)
    return t.reshape(d, d)


def von_neumann(rho: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    ev = ev[ev > 1e-15]
    return float(-np.sum(ev * np.log(ev)))


def mutual_information_matrix(rho) -> np.ndarray:
    """``I_ij = S_i + S_j - S_ij`` (natural log), zero diagonal, clipped at 0."""
    m, n = _as_matrix(rho)
    if n > MAX_ENTANGLEMENT_SITES:
        raise ValueError(f"N={n} exceeds the ceiling {MAX_ENTANGLEMENT_SITES}")
    single = [von_neumann(reduced_density(m, [i])) for i in range(1, n + 1)]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            val = single[i] + single[j] - von_neumann(reduced_density(m, [i + 1, j + 1]))
            out[i, j] = out[j, i] = max(val, 0.0) if val > -NEG_FLOOR else val
    return out


@dataclass(frozen=True)
class WitnessReport:
    dark_residual: float
    nadj: float
    verdict: str

    def to_dict(self) -> dict:
        return {"dark_residual": self.dark_residual, "nadj": self.nadj, "verdict": self.verdict}


def witness(rho, rule: ConstraintRule, tol: float = 1e-8) -> WitnessReport:
    """Adjacent-pair witness, meaningful only inside the dark manifold."""
    m, n = _as_matrix(rho)
    F = lowering_matrix(rule, n)
    residual = float(np.real(np.trace((F.conj().T @ (F @ m)))))
    nadj = float(np.real(np.diagonal(m)) @ block_count_diagonal(n, 2, rule.boundary))
    verdict = "Entangled" if residual < tol and nadj > tol else "Inconclusive"
    return WitnessReport(residual, nadj, verdict)


def product_state_FdagF(p, s, *, form: str = "exact") -> float:
    """``<F^dag F>`` for the periodic East rule in a product state.

    ``p_j`` are up-probabilities and ``s_j = <sigma_j^->``.  ``form="exact"``
    keeps only cross terms between sites that do not share a site operator
    (``sigma^+ n = n sigma^- = 0`` on one site).  ``form="two_term"`` returns
    ``|sum p_{j-1} s_j|^2 + sum p_{j-1} p_j^2``, which uses the pure-state
    identity ``|s|^2 = p(1-p)`` but keeps the nearest-neighbour cross terms;
    both are non-negative and vanish together with ``sum p_{j-1} p_j``.
    """
    p = np.asarray(p, dtype=float)
    s = np.asarray(s, dtype=complex)
    if p.shape != s.shape or p.ndim != 1:
        raise ValueError("p and s must be 1-d arrays of equal length")
    n = p.size
    if n < 2:
        raise ValueError("need at least two sites")
    if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
        raise ValueError("p_j must lie in [0, 1]")
    if np.any(np.abs(s) ** 2 > p * (1 - p) + 1e-12):
        raise ValueError("|s_j|^2 must not exceed p_j (1 - p_j)")
    prev = np.roll(p, 1)
    x = prev * s
    if form == "two_term":
        return float(abs(x.sum()) ** 2 + np.sum(prev * p**2))
    if form != "exact":
        raise ValueError(f"unknown form {form!r}")
    idx = np.arange(n)
    diff = (idx[:, None] - idx[None, :]) % n
    mask = (diff != 0) & (diff != 1) & (diff != n - 1)
    cross = np.real(x.conj() @ (mask * 1.0) @ x)
    return float(cross + np.sum(prev * p))
