"""Constrained spin-1/2 operators on bitmask configurations.

Conventions used everywhere in the package:

* Site ``j`` (1-based) is stored in bit ``j - 1`` of a configuration
  integer; bit value 1 means the site is excited (up).
* Printed bitstrings put site 1 leftmost, so ``"11010"`` means sites 1, 2
  and 4 are up.
* Dense states are complex arrays of length ``2**N`` indexed by the
  configuration integer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

MAX_DENSE_SITES = 24
SPARSE_DROP_TOL = 1e-14

RULE_KINDS = ("dicke", "east", "and", "or", "custom")
BOUNDARIES = ("periodic", "open")


class DenseSizeError(ValueError):
    """Raised when a dense 2**N representation would exceed the memory ceiling."""


def check_dense_size(n_sites: int) -> None:
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    if n_sites > MAX_DENSE_SITES:
        raise DenseSizeError(
            f"N={n_sites} exceeds the dense ceiling of {MAX_DENSE_SITES} sites; "
            "use the DTWA solver or the closed-form layer results instead"
        )


# --------------------------------------------------------------------------
# configurations


@dataclass(frozen=True, order=True)
class SpinConfig:
    """Computational basis configuration of an ``n_sites`` chain."""

    bits: int
    n_sites: int

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if not 0 <= self.bits < (1 << self.n_sites):
            raise ValueError(f"bits={self.bits} out of range for N={self.n_sites}")

    @classmethod
    def from_string(cls, s: str) -> "SpinConfig":
        s = s.strip().strip("|⟩>")
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {s!r}")
        return cls(config_from_string(s), len(s))

    @classmethod
    def from_sites(cls, sites: Iterable[int], n_sites: int) -> "SpinConfig":
        bits = 0
        for j in sites:
            if not 1 <= j <= n_sites:
                raise IndexError(f"site {j} outside 1..{n_sites}")
            bits |= 1 << (j - 1)
        return cls(bits, n_sites)

    def occupation(self, j: int) -> int:
        return (self.bits >> ((j - 1) % self.n_sites)) & 1

    def up_sites(self) -> list[int]:
        return [j + 1 for j in range(self.n_sites) if (self.bits >> j) & 1]

    @property
    def n_up(self) -> int:
        return bin(self.bits).count("1")

    def __str__(self) -> str:
        return config_to_string(self.bits, self.n_sites)


def config_from_string(s: str) -> int:
    return sum(1 << i for i, c in enumerate(s) if c == "1")


def config_to_string(bits: int, n_sites: int) -> str:
    return "".join("1" if (bits >> i) & 1 else "0" for i in range(n_sites))


def popcount(arr: np.ndarray) -> np.ndarray:
    """Vectorised bit count of a non-negative integer array."""
    arr = np.asarray(arr, dtype=np.int64)
    out = np.zeros(arr.shape, dtype=np.int64)
    x = arr.copy()
    while np.any(x):
        out += x & 1
        x >>= 1
    return out


# --------------------------------------------------------------------------
# constraint rules

_BUILTIN_TABLES = {
    # neighbour index bit 0 = n_{j-1}, bit 1 = n_{j+1}
    "east": (False, True, False, True),
    "and": (False, False, False, True),
    "or": (False, True, True, True),
}


@dataclass(frozen=True)
class ConstraintRule:
    """Local Boolean gate ``P_j`` deciding whether site ``j`` may emit.

    ``table`` is indexed by the occupations of the ``2w`` neighbours in the
    order ``j-w, ..., j-1, j+1, ..., j+w`` with ``j-w`` as the least
    significant bit.  On an open chain, neighbours outside the chain read as
    ``fill`` (0 by default, so the first site of an open East chain never
    emits).
    """

    kind: str = "east"
    w: int = 1
    table: tuple[bool, ...] = field(default=(), compare=True)
    boundary: str = "periodic"
    fill: int = 0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in RULE_KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.fill not in (0, 1):
            raise ValueError("fill must be 0 or 1")
        if kind == "dicke":
            object.__setattr__(self, "w", 0)
            object.__setattr__(self, "table", (True,))
        elif kind in _BUILTIN_TABLES:
            object.__setattr__(self, "w", 1)
            object.__setattr__(self, "table", _BUILTIN_TABLES[kind])
        else:
            if self.w < 0:
                raise ValueError("range w must be >= 0")
            table = tuple(bool(x) for x in self.table)
            expected = 1 << (2 * self.w)
            if len(table) != expected:
                raise ValueError(
                    f"custom table for w={self.w} must have {expected} entries, got {len(table)}"
                )
            if not table[-1]:
                raise ValueError("custom table must allow emission when all neighbours are up")
            object.__setattr__(self, "table", table)

    @classmethod
    def dicke(cls, boundary="periodic"):
        return cls("dicke", boundary=boundary)

    @classmethod
    def east(cls, boundary="periodic", fill=0):
        return cls("east", boundary=boundary, fill=fill)

    @classmethod
    def and_(cls, boundary="periodic", fill=0):
        return cls("and", boundary=boundary, fill=fill)

    @classmethod
    def or_(cls, boundary="periodic", fill=0):
        return cls("or", boundary=boundary, fill=fill)

    @classmethod
    def custom(cls, w: int, table: Sequence[bool], boundary="periodic", fill=0):
        return cls("custom", w=w, table=tuple(table), boundary=boundary, fill=fill)

    @property
    def neighbour_offsets(self) -> tuple[int, ...]:
        return tuple(range(-self.w, 0)) + tuple(range(1, self.w + 1))

    @property
    def dtwa_coefficients(self) -> tuple[float, float, float] | None:
        """(alpha, beta, gamma) of ``P_j = a n_{j-1} + b n_{j+1} + c n_{j-1} n_{j+1}``."""
        return {
            "dicke": (0.0, 0.0, 0.0),
            "east": (1.0, 0.0, 0.0),
            "and": (0.0, 0.0, 1.0),
            "or": (1.0, 1.0, -1.0),
        }.get(self.kind)

    def with_boundary(self, boundary: str) -> "ConstraintRule":
        return ConstraintRule(self.kind, self.w, self.table, boundary, self.fill)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "boundary": self.boundary, "fill": self.fill}
        if self.kind == "custom":
            d["w"] = self.w
            d["table"] = [int(x) for x in self.table]
        return d


def _neighbour_bits(rule: ConstraintRule, n_sites: int, j: int, configs: np.ndarray) -> np.ndarray:
    """Table index of the neighbourhood of site ``j`` (0-based) for each config."""
    idx = np.zeros(configs.shape, dtype=np.int64)
    for d, off in enumerate(rule.neighbour_offsets):
        k = j + off
        if rule.boundary == "periodic":
            k %= n_sites
            occ = (configs >> k) & 1
        elif 0 <= k < n_sites:
            occ = (configs >> k) & 1
        else:
            occ = np.full(configs.shape, rule.fill, dtype=np.int64)
        idx |= occ << d
    return idx


def allowed_mask(rule: ConstraintRule, n_sites: int, j: int, configs: np.ndarray) -> np.ndarray:
    """Boolean array: does ``P_j`` (``j`` 0-based) evaluate to 1 on each config."""
    configs = np.asarray(configs, dtype=np.int64)
    if rule.kind == "dicke":
        return np.ones(configs.shape, dtype=bool)
    table = np.asarray(rule.table, dtype=bool)
    return table[_neighbour_bits(rule, n_sites, j, configs)]


def constraint_allows(rule: ConstraintRule, config: SpinConfig, j: int) -> bool:
    """True iff site ``j`` (1-based) is facilitated in ``config``."""
    n = config.n_sites
    if not 1 <= j <= n:
        raise IndexError(f"site {j} outside 1..{n}")
    return bool(allowed_mask(rule, n, j - 1, np.array([config.bits]))[0])


# --------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class PureState:
    """Dense state vector over the ``2**N`` configurations."""

    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_sites,):
            raise ValueError(f"expected {1 << self.n_sites} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state has non-finite amplitudes")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def normalized(self) -> bool:
        return abs(self.norm**2 - 1.0) < 1e-12

    def normalize(self) -> "PureState":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalise the zero vector")
        return PureState(self.n_sites, self.amplitudes / nrm)

    @classmethod
    def basis(cls, config: SpinConfig | str) -> "PureState":
        if isinstance(config, str):
            config = SpinConfig.from_string(config)
        check_dense_size(config.n_sites)
        amps = np.zeros(1 << config.n_sites, dtype=complex)
        amps[config.bits] = 1.0
        return cls(config.n_sites, amps)

    @classmethod
    def fully_up(cls, n_sites: int) -> "PureState":
        return cls.basis(SpinConfig((1 << n_sites) - 1, n_sites))

    @classmethod
    def from_terms(cls, n_sites: int, terms: Mapping[str | int, complex]) -> "PureState":
        check_dense_size(n_sites)
        amps = np.zeros(1 << n_sites, dtype=complex)
        for key, val in terms.items():
            bits = config_from_string(key) if isinstance(key, str) else int(key)
            amps[bits] += val
        return cls(n_sites, amps)

    def terms(self, tol: float = 1e-12) -> dict[str, complex]:
        nz = np.nonzero(np.abs(self.amplitudes) > tol)[0]
        return {config_to_string(int(b), self.n_sites): complex(self.amplitudes[b]) for b in nz}


class SparseState:
    """Sparse superposition of configurations.

    Stored as sorted unique configuration integers plus amplitudes so that
    operator application stays vectorised for layer supports of millions of
    configurations.
    """

    def __init__(self, n_sites: int, configs=None, amps=None, *, terms=None, drop_tol=SPARSE_DROP_TOL):
        self.n_sites = int(n_sites)
        if terms is not None:
            keys = [config_from_string(k) if isinstance(k, str) else int(k) for k in terms]
            configs = np.array(keys, dtype=np.int64)
            amps = np.array(list(terms.values()))
        configs = np.asarray(configs if configs is not None else [], dtype=np.int64)
        amps = np.asarray(amps if amps is not None else [])
        if amps.dtype.kind not in "fc":
            amps = amps.astype(float)
        if configs.shape != amps.shape:
            raise ValueError("configs and amplitudes must have equal length")
        if configs.size and (configs.min() < 0 or configs.max() >= (1 << self.n_sites)):
            raise ValueError("configuration out of range")
        configs, amps = _merge(configs, amps)
        if amps.size:
            keep = np.abs(amps) > drop_tol * np.abs(amps).max()
            configs, amps = configs[keep], amps[keep]
        self.configs = configs
        self.amps = amps

    @property
    def terms(self) -> dict[SpinConfig, complex]:
        return {SpinConfig(int(c), self.n_sites): a.item() for c, a in zip(self.configs, self.amps)}

    def __len__(self):
        return int(self.configs.size)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def scaled(self, factor) -> "SparseState":
        out = SparseState.__new__(SparseState)
        out.n_sites, out.configs, out.amps = self.n_sites, self.configs, self.amps * factor
        return out

    def to_dense(self) -> PureState:
        check_dense_size(self.n_sites)
        amps = np.zeros(1 << self.n_sites, dtype=complex)
        amps[self.configs] = self.amps
        return PureState(self.n_sites, amps)

    @classmethod
    def from_dense(cls, state: PureState | np.ndarray, n_sites: int | None = None) -> "SparseState":
        vec, n = _as_vector(state, n_sites)
        nz = np.nonzero(vec)[0]
        return cls(n, nz, vec[nz])


def _merge(configs: np.ndarray, amps: np.ndarray):
    if configs.size == 0:
        return configs, amps
    uniq, inv = np.unique(configs, return_inverse=True)
    if uniq.size == configs.size:
        order = np.argsort(configs, kind="stable")
        return configs[order], amps[order]
    if np.iscomplexobj(amps):
        out = np.bincount(inv, weights=amps.real, minlength=uniq.size) + 1j * np.bincount(
            inv, weights=amps.imag, minlength=uniq.size
        )
    else:
        out = np.bincount(inv, weights=amps, minlength=uniq.size)
    return uniq, out


def _as_vector(state, n_sites=None):
    if isinstance(state, PureState):
        return state.amplitudes, state.n_sites
    vec = np.asarray(state)
    n = int(round(np.log2(vec.shape[0]))) if n_sites is None else n_sites
    if vec.shape[0] != 1 << n:
        raise ValueError(f"vector of length {vec.shape[0]} is not 2**{n}")
    return vec, n


def _wrap(state, vec, n):
    return PureState(n, vec) if isinstance(state, PureState) else vec


# --------------------------------------------------------------------------
# operators


@lru_cache(maxsize=64)
def _site_masks(rule: ConstraintRule, n_sites: int) -> tuple[np.ndarray, ...]:
    """Per site, the source configurations where ``P_j sigma_j^-`` acts nontrivially."""
    check_dense_size(n_sites)
    configs = np.arange(1 << n_sites, dtype=np.int64)
    out = []
    for j in range(n_sites):
        ok = allowed_mask(rule, n_sites, j, configs) & (((configs >> j) & 1) == 1)
        out.append(np.nonzero(ok)[0])
    return tuple(out)


@lru_cache(maxsize=64)
def lowering_matrix(rule: ConstraintRule, n_sites: int) -> sp.csr_matrix:
    """Sparse matrix of ``F = sum_j P_j sigma_j^-`` on the full basis."""
    rows, cols = [], []
    for j, src in enumerate(_site_masks(rule, n_sites)):
        cols.append(src)
        rows.append(src ^ (1 << j))
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    dim = 1 << n_sites
    mat = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(dim, dim))
    mat.sum_duplicates()
    return mat


def collective_lowering(n_sites: int) -> sp.csr_matrix:
    return lowering_matrix(ConstraintRule.dicke(), n_sites)


def apply_F(rule: ConstraintRule, state):
    """``F|state>`` for a dense vector, ``PureState`` or ``SparseState``."""
    if isinstance(state, SparseState):
        return _apply_sparse(rule, state, lower=True)
    vec, n = _as_vector(state)
    out = np.zeros(vec.shape, dtype=np.result_type(vec, float))
    for j, src in enumerate(_site_masks(rule, n)):
        out[src ^ (1 << j)] += vec[src]
    return _wrap(state, out, n)


def apply_Fdag(rule: ConstraintRule, state):
    """``F^dagger|state>``; the adjoint of :func:`apply_F`."""
    if isinstance(state, SparseState):
        return _apply_sparse(rule, state, lower=False)
    vec, n = _as_vector(state)
    out = np.zeros(vec.shape, dtype=np.result_type(vec, float))
    for j, src in enumerate(_site_masks(rule, n)):
        out[src] += vec[src ^ (1 << j)]
    return _wrap(state, out, n)


def _apply_sparse(rule: ConstraintRule, state: SparseState, lower: bool) -> SparseState:
    n = state.n_sites
    new_c, new_a = [], []
    for j in range(n):
        bit = 1 << j
        occ = (state.configs & bit) != 0
        if lower:
            src = occ
            target = state.configs[src] ^ bit
            ok = allowed_mask(rule, n, j, state.configs[src])
        else:
            src = ~occ
            target = state.configs[src] | bit
            # P_j does not read bit j, so it can be evaluated on the raised config
            ok = allowed_mask(rule, n, j, target)
        new_c.append(target[ok])
        new_a.append(state.amps[src][ok])
    if new_c:
        configs = np.concatenate(new_c)
        amps = np.concatenate(new_a)
    else:
        configs, amps = np.zeros(0, dtype=np.int64), np.zeros(0)
    return SparseState(n, configs, amps)


# --------------------------------------------------------------------------
# observables

OBSERVABLES = ("n", "Sz", "Sperp2", "Nadj", "Ntri", "Nell", "FdagF")


def occupation_counts(n_sites: int) -> np.ndarray:
    return popcount(np.arange(1 << n_sites, dtype=np.int64))


def block_count_diagonal(n_sites: int, ell: int, boundary: str = "periodic") -> np.ndarray:
    """Diagonal of ``N_ell``: number of windows of ``ell`` consecutive up sites."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    configs = np.arange(1 << n_sites, dtype=np.int64)
    if boundary == "periodic":
        starts = range(n_sites) if ell <= n_sites else range(0)
    else:
        starts = range(max(n_sites - ell + 1, 0))
    out = np.zeros(configs.shape, dtype=np.int64)
    for s in starts:
        prod = np.ones(configs.shape, dtype=np.int64)
        for a in range(ell):
            prod &= (configs >> ((s + a) % n_sites)) & 1
        out += prod
    return out


@lru_cache(maxsize=64)
def diagonal_observable(name: str, n_sites: int, boundary: str = "periodic") -> np.ndarray:
    """Diagonal entries of ``n`` (density), ``Sz``, ``Nadj`` or ``Ntri``."""
    check_dense_size(n_sites)
    if name == "n":
        return occupation_counts(n_sites) / n_sites
    if name == "Sz":
        return occupation_counts(n_sites) - n_sites / 2
    if name == "Nadj":
        return block_count_diagonal(n_sites, 2, boundary).astype(float)
    if name == "Ntri":
        return block_count_diagonal(n_sites, 3, boundary).astype(float)
    raise KeyError(name)


def expect(observable: str, state, rule: ConstraintRule | None = None, *, boundary: str | None = None,
           ell: int | None = None) -> float:
    """Expectation value of a named observable in a (normalised) state.

    An unnormalised input is divided by its squared norm; that case is
    reported with a ``RuntimeWarning``.
    """
    import warnings

    vec, n = _as_vector(state)
    nrm2 = float(np.vdot(vec, vec).real)
    if nrm2 == 0:
        raise ValueError("zero state")
    if abs(nrm2 - 1) > 1e-10:
        warnings.warn("expect() called on an unnormalised state; dividing by the norm", RuntimeWarning)
    if boundary is None:
        boundary = rule.boundary if rule is not None else "periodic"
    prob = np.abs(vec) ** 2
    if observable in ("n", "Sz", "Nadj", "Ntri"):
        val = prob @ diagonal_observable(observable, n, boundary)
    elif observable == "Nell":
        if ell is None:
            raise ValueError("Nell needs ell")
        val = prob @ block_count_diagonal(n, ell, boundary)
    elif observable == "Sperp2":
        sm = collective_lowering(n)
        val = 0.5 * (np.linalg.norm(sm @ vec) ** 2 + np.linalg.norm(sm.T @ vec) ** 2)
    elif observable == "FdagF":
        if rule is None:
            raise ValueError("FdagF needs a rule")
        val = np.linalg.norm(apply_F(rule, vec)) ** 2
    else:
        raise KeyError(f"unknown observable {observable!r}")
    return float(val / nrm2)
