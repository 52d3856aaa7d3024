"""Dark states of the constrained jump operator and fragmentation structure.

Dark states are zero modes of ``F``.  Since ``[S^z, F] = -F`` the kernel is
computed sector by sector in the excitation number.  The explicit packet
constructions (independent-set bitstrings, dimer and triple packets and the
recursive ``Omega_m`` packets) are specific to the East rule.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.sparse.csgraph import connected_components

from .spin_algebra import (
    ConstraintRule,
    DenseSizeError,
    PureState,
    SparseState,
    SpinConfig,
    apply_F,
    block_count_diagonal,
    lowering_matrix,
    occupation_counts,
    _as_vector,
)

MAX_KERNEL_SITES = 14
MAX_PACKET_SITES = 12
NULL_RTOL = 1e-10
CLASS_TOL = 1e-8
DARK_TOL = 1e-10

CLASSES = ("Bitstring", "Singlet", "Triple+")


class ConstructionError(RuntimeError):
    """A packet construction produced a non-dark vector or had no solution."""


def _check_kernel_size(n_sites: int, limit: int = MAX_KERNEL_SITES) -> None:
    if n_sites > limit:
        raise DenseSizeError(f"N={n_sites} exceeds the dark-manifold ceiling N<={limit}")


# --------------------------------------------------------------------------
# numerical kernel


def nullspace(a: np.ndarray, rtol: float = NULL_RTOL, atol: float | None = None) -> np.ndarray:
    """Orthonormal nullspace basis; relative cutoff, or absolute if ``atol`` given."""
    a = np.asarray(a)
    if a.shape[0] == 0 or not np.any(a):
        return np.eye(a.shape[1], dtype=a.dtype if np.iscomplexobj(a) else float)
    if atol is None:
        return sla.null_space(a, rcond=rtol)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > atol))
    return vh[rank:].conj().T


def sector_indices(n_sites: int, n_up: int) -> np.ndarray:
    cnt = occupation_counts(n_sites)
    return np.nonzero(cnt == n_up)[0]


def sector_lowering(rule: ConstraintRule, n_sites: int, n_up: int) -> sp.csr_matrix:
    """Block of ``F`` mapping the ``n_up`` sector to the ``n_up - 1`` sector."""
    F = lowering_matrix(rule, n_sites)
    cols = sector_indices(n_sites, n_up)
    rows = sector_indices(n_sites, n_up - 1) if n_up > 0 else np.zeros(0, dtype=np.int64)
    return F[rows][:, cols]


@dataclass
class DarkBasis:
    rule: ConstraintRule
    n_sites: int
    boundary: str
    # per sector: (basis config indices, orthonormal columns in that basis)
    blocks: dict[int, tuple[np.ndarray, np.ndarray]]
    labels: list[str]
    nadj: np.ndarray
    ntri: np.ndarray
    excitations: np.ndarray
    _order: list[tuple[int, int]] = field(repr=False, default_factory=list)

    def __len__(self):
        return len(self.labels)

    @property
    def sector(self) -> np.ndarray:
        """Magnetisation ``S^z`` of each vector."""
        return self.excitations - self.n_sites / 2

    def vector(self, i: int) -> PureState:
        m, col = self._order[i]
        idx, cols = self.blocks[m]
        amps = np.zeros(1 << self.n_sites, dtype=complex)
        amps[idx] = cols[:, col]
        return PureState(self.n_sites, amps)

    @property
    def vectors(self) -> list[PureState]:
        return [self.vector(i) for i in range(len(self))]

    def dims(self) -> dict[int, int]:
        return {m: blk[1].shape[1] for m, blk in self.blocks.items()}

    def class_counts(self) -> dict[str, int]:
        return {c: self.labels.count(c) for c in CLASSES}


def _supported_on(K: np.ndarray, allowed: np.ndarray) -> np.ndarray:
    """Coefficient basis of the subspace of span(K) supported on ``allowed`` rows."""
    if K.shape[1] == 0:
        return np.zeros((0, 0))
    if allowed.all():
        return np.eye(K.shape[1])
    # K has orthonormal columns, so the cutoff is absolute
    return nullspace(K[~allowed], atol=NULL_RTOL)


def _split_sector(K: np.ndarray, idx: np.ndarray, nadj: np.ndarray, ntri: np.ndarray, dark_configs: np.ndarray):
    """Rotate a sector kernel so that each column falls into one class."""
    d = K.shape[1]
    if d == 0:
        return [], []
    out, labels = [], []
    # exactly dark basis configurations with no adjacent pair
    singles = np.nonzero(dark_configs & (nadj[idx] == 0))[0]
    E = np.zeros((K.shape[0], singles.size))
    E[singles, np.arange(singles.size)] = 1.0
    out.append(E)
    labels += ["Bitstring"] * singles.size
    # remove them, work in the complement inside the kernel
    if singles.size:
        C = nullspace(E.T @ K, atol=NULL_RTOL)
        K = K @ C
    c1 = _supported_on(K, nadj[idx] == 0)
    V1 = K @ c1 if c1.size else np.zeros((K.shape[0], 0))
    out.append(V1)
    labels += ["Bitstring"] * V1.shape[1]
    c2 = _supported_on(K, ntri[idx] == 0)
    if c2.size and c1.size:
        c2 = c2 @ nullspace(c1.T @ c2, atol=NULL_RTOL)
    V2 = K @ c2 if c2.size else np.zeros((K.shape[0], 0))
    out.append(V2)
    labels += ["Singlet"] * V2.shape[1]
    used = np.hstack([c for c in (c1, c2) if c.size]) if (c1.size or c2.size) else np.zeros((K.shape[1], 0))
    c3 = nullspace(used.T, atol=NULL_RTOL) if used.shape[1] else np.eye(K.shape[1])
    V3 = K @ c3 if c3.size else np.zeros((K.shape[0], 0))
    out.append(V3)
    labels += ["Triple+"] * V3.shape[1]
    return np.hstack(out), labels


def kernel_basis(rule: ConstraintRule, n_sites: int, boundary: str | None = None) -> DarkBasis:
    """Orthonormal, classified basis of ``ker F``."""
    _check_kernel_size(n_sites)
    if boundary is not None and boundary != rule.boundary:
        rule = rule.with_boundary(boundary)
    boundary = rule.boundary
    F = lowering_matrix(rule, n_sites)
    dark_cfg = np.asarray(abs(F).sum(axis=0)).ravel() == 0
    nadj_d = block_count_diagonal(n_sites, 2, boundary)
    ntri_d = block_count_diagonal(n_sites, 3, boundary)
    blocks, labels, nadj, ntri, exc, order = {}, [], [], [], [], []
    for m in range(n_sites + 1):
        idx = sector_indices(n_sites, m)
        if m == 0:
            K = np.ones((1, 1))
        else:
            K = nullspace(sector_lowering(rule, n_sites, m).toarray())
        K, lab = _split_sector(K, idx, nadj_d, ntri_d, dark_cfg[idx])
        if not lab:
            continue
        blocks[m] = (idx, K)
        prob = np.abs(K) ** 2
        nadj.extend(prob.T @ nadj_d[idx])
        ntri.extend(prob.T @ ntri_d[idx])
        labels.extend(lab)
        exc.extend([m] * len(lab))
        order.extend((m, c) for c in range(len(lab)))
    return DarkBasis(rule, n_sites, boundary, blocks, labels, np.array(nadj), np.array(ntri),
                     np.array(exc), order)


def classify(nadj: float, ntri: float, tol: float = CLASS_TOL) -> str:
    if ntri >= tol:
        return "Triple+"
    return "Singlet" if nadj >= tol else "Bitstring"


class DarkCheck(NamedTuple):
    dark: bool
    residual: float


def is_dark(rule: ConstraintRule, state, tol: float = DARK_TOL) -> DarkCheck:
    """``||F psi|| / ||psi||`` and whether it is below ``tol``."""
    if isinstance(state, SparseState):
        nrm = np.sqrt(state.norm_sq)
        res = np.sqrt(apply_F(rule, state).norm_sq) if nrm else 0.0
    else:
        vec, _ = _as_vector(state)
        nrm = np.linalg.norm(vec)
        res = np.linalg.norm(apply_F(rule, vec)) if nrm else 0.0
    if nrm == 0:
        raise ValueError("zero vector")
    r = float(res / nrm)
    return DarkCheck(r < tol, r)


def enumerate_bitstring_dark(n_sites: int, boundary: str = "periodic") -> list[SpinConfig]:
    """Independent sets of the path or cycle graph (no two adjacent up spins)."""
    configs = np.arange(1 << n_sites, dtype=np.int64)
    bad = configs & (configs >> 1)
    if boundary == "periodic" and n_sites > 1:
        bad |= (configs & 1) & (configs >> (n_sites - 1))
    ok = np.nonzero(bad == 0)[0]
    return [SpinConfig(int(c), n_sites) for c in ok]


def independent_set_count(n_sites: int, boundary: str = "periodic") -> int:
    """Fibonacci/Lucas count of independent sets, by transfer matrix."""
    T = np.array([[1, 1], [1, 0]], dtype=object)
    M = np.linalg.matrix_power(T, n_sites)
    if boundary == "periodic" and n_sites > 1:
        return int(M[0, 0] + M[1, 1])
    return int(M[0, 0] + M[0, 1])


# --------------------------------------------------------------------------
# explicit packets (East rule)


@dataclass(frozen=True)
class PacketSpec:
    root: SpinConfig
    kind: str
    sites: tuple[int, ...] = ()
    window: tuple[int, int] | None = None  # (first site, length), 1-based


def _bit(r: SpinConfig, j: int) -> int:
    """Occupation at 1-based site ``j``; wraps on a ring, 0 outside an open chain."""
    n = r.n_sites
    return (r.bits >> ((j - 1) % n)) & 1


def _is_independent(r: SpinConfig, boundary: str) -> bool:
    return not (
        r.bits & (r.bits >> 1)
        or (boundary == "periodic" and r.n_sites > 1 and r.bits & 1 and (r.bits >> (r.n_sites - 1)) & 1)
    )


def _open_bit(r: SpinConfig, j: int, boundary: str) -> int:
    if boundary == "open" and not 1 <= j <= r.n_sites:
        return 0
    return _bit(r, j)


def facilitable_zeros(root: SpinConfig, boundary: str = "open") -> list[int]:
    """Sites ``i`` with ``r_{i-1} r_i r_{i+1} = 100`` (``r_{i+1}`` vacuous at an open end)."""
    n = root.n_sites
    sites = range(1, n + 1) if boundary == "periodic" else range(2, n + 1)
    return [i for i in sites if _bit(root, i - 1) == 1 and _bit(root, i) == 0
            and _open_bit(root, i + 1, boundary) == 0]


def extendable_zeros(root: SpinConfig, boundary: str = "open") -> list[int]:
    """Sites ``i`` with ``r_{i-1..i+2} = 1000``; at an open end ``r_{i+2}`` may lie outside."""
    n = root.n_sites
    sites = range(1, n + 1) if boundary == "periodic" else range(2, n)
    if boundary == "periodic" and n < 4:
        return []
    return [i for i in sites if _bit(root, i - 1) == 1 and _bit(root, i) == 0 and _bit(root, i + 1) == 0
            and _open_bit(root, i + 2, boundary) == 0]


def _flip_up(bits: int, sites, n: int) -> int:
    for s in sites:
        bits |= 1 << ((s - 1) % n)
    return bits


def _packet_state(root: SpinConfig, terms: list[tuple[tuple[int, ...], float]]) -> SparseState:
    n = root.n_sites
    configs = [_flip_up(root.bits, s, n) for s, _ in terms]
    return SparseState(n, np.array(configs, dtype=np.int64), np.array([a for _, a in terms], dtype=complex))


def _assert_dark(rule: ConstraintRule, state: SparseState, what: str) -> None:
    chk = is_dark(rule, state)
    if not chk.dark:
        raise ConstructionError(f"{what} is not dark (residual {chk.residual:.3g})")


def dimer_packet(root: SpinConfig, i: int, j: int, boundary: str = "open") -> PureState:
    """``(sigma_i^+ - sigma_j^+)|root>`` for two facilitable zeros of ``root``."""
    if not _is_independent(root, boundary):
        raise ValueError(f"root {root} is not an independent set")
    s1 = facilitable_zeros(root, boundary)
    if i == j or i not in s1 or j not in s1:
        raise ValueError(f"sites ({i}, {j}) are not distinct facilitable zeros of {root}: {s1}")
    st = _packet_state(root, [((i,), 1.0), ((j,), -1.0)])
    _assert_dark(ConstraintRule.east(boundary), st, "dimer packet")
    return st.to_dense()


def _triple_window(i: int, n: int, boundary: str) -> set[int]:
    w = {i - 1, i, i + 1, i + 2}
    if boundary == "periodic":
        return {(s - 1) % n for s in w}
    return {s - 1 for s in w if 1 <= s <= n}


def triple_packet(root: SpinConfig, i: int, j: int, boundary: str = "open") -> PureState:
    """Five-term packet with run-3 support on two extendable zeros ``i < j``."""
    if not _is_independent(root, boundary):
        raise ValueError(f"root {root} is not an independent set")
    s2 = extendable_zeros(root, boundary)
    if i == j or i not in s2 or j not in s2:
        raise ValueError(f"sites ({i}, {j}) are not extendable zeros of {root}: {s2}")
    n = root.n_sites
    if _triple_window(i, n, boundary) & _triple_window(j, n, boundary):
        raise ValueError("triple windows overlap")
    terms = [((i, i + 1), 1.0), ((j, j + 1), 1.0), ((i, j + 1), -1.0), ((i + 1, j), -1.0), ((i, j), -1.0)]
    st = _packet_state(root, terms)
    _assert_dark(ConstraintRule.east(boundary), st, "triple packet")
    return st.to_dense()


# --------------------------------------------------------------------------
# Omega_m packets


def omega_seed(m: int) -> str:
    return "1" * m + "01" + "0" * (m - 1)


def _max_run(c: int, length: int) -> int:
    best = cur = 0
    for i in range(length):
        cur = cur + 1 if (c >> i) & 1 else 0
        best = max(best, cur)
    return best


def _window_children(c: int, length: int) -> list[int]:
    # open East inside the window; the site left of the window reads as empty
    return [c & ~(1 << j) for j in range(1, length) if (c >> j) & 1 and (c >> (j - 1)) & 1]


@lru_cache(maxsize=32)
def omega_space(m: int, window_length: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Configurations reached by the cancellation recursion from ``t_m`` and the kernel on them.

    Returns ``(configs, K)`` with ``K`` an orthonormal basis (columns) of the
    dark vectors supported on ``configs`` inside the window.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    L = 2 * m + 1 if window_length is None else int(window_length)
    if L < 2 * m + 1:
        raise ValueError(f"window length must be >= {2 * m + 1}")
    if L > 20:
        raise DenseSizeError("window too long")
    k = m + 1
    seed = sum(1 << i for i, ch in enumerate(omega_seed(m)) if ch == "1")
    parents: dict[int, list[int]] = {}
    for c in range(1 << L):
        if bin(c).count("1") == k and _max_run(c, L) <= m:
            for ch in _window_children(c, L):
                parents.setdefault(ch, []).append(c)
    members, todo = {seed}, [seed]
    while todo:
        c = todo.pop()
        for ch in _window_children(c, L):
            for p in parents[ch]:
                if p not in members:
                    members.add(p)
                    todo.append(p)
    configs = np.array(sorted(members), dtype=np.int64)
    children = sorted({ch for c in configs for ch in _window_children(int(c), L)})
    row = {ch: r for r, ch in enumerate(children)}
    A = np.zeros((len(children), configs.size))
    for col, c in enumerate(configs):
        for ch in _window_children(int(c), L):
            A[row[ch], col] += 1
    return configs, nullspace(A)


def build_omega(m: int, window_length: int | None = None) -> PureState:
    """Dark packet grown from the seed ``t_m``, unit amplitude on the seed.

    Among all kernel vectors of the recursion closure the one with smallest
    l1 norm is chosen; for ``m = 2, 3`` the closure kernel is one dimensional.
    """
    L = 2 * m + 1 if window_length is None else int(window_length)
    configs, K = omega_space(m, L)
    seed = sum(1 << i for i, ch in enumerate(omega_seed(m)) if ch == "1")
    si = int(np.searchsorted(configs, seed))
    d = K.shape[1]
    if d == 0 or np.allclose(K[si], 0):
        raise ConstructionError(f"no dark vector contains the seed t_{m}")
    if d == 1:
        x = K[:, 0] / K[si, 0]
    else:
        n = configs.size
        cost = np.r_[np.zeros(d), np.ones(n)]
        eye = np.eye(n)
        A_ub = np.block([[K, -eye], [-K, -eye]])
        res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(2 * n), A_eq=np.r_[K[si], np.zeros(n)][None],
                      b_eq=[1.0], bounds=[(None, None)] * d + [(0, None)] * n, method="highs")
        if not res.success:
            raise ConstructionError(f"seed-pinned selection failed: {res.message}")
        x = K @ res.x[:d]
    x[np.abs(x) < 1e-9] = 0.0
    # snap to the rational grid if the solution is exactly representable
    snapped = np.round(x * 12) / 12
    if np.max(np.abs(snapped - x)) < 1e-9:
        x = snapped
    amps = np.zeros(1 << L, dtype=complex)
    amps[configs] = x
    state = PureState(L, amps)
    chk = is_dark(ConstraintRule.east("open"), state)
    if not chk.dark:
        raise ConstructionError(f"Omega_{m} residual {chk.residual:.3g}")
    return state


# --------------------------------------------------------------------------
# constructed packets and cross-validation


def _embed(configs: np.ndarray, window: list[int]) -> np.ndarray:
    out = np.zeros(configs.shape, dtype=np.int64)
    for i, site in enumerate(window):
        out |= ((configs >> i) & 1) << site
    return out


def constructed_packets(n_sites: int, boundary: str = "periodic") -> Iterator[tuple[PacketSpec, SparseState]]:
    """All explicit packet candidates for the East rule on ``n_sites``.

    Yields bitstrings, pairwise dimer differences and their products on
    disjoint sites, triple packets, and every closure-kernel vector of
    ``Omega_m`` (window lengths ``2m+1`` up to the chain length) placed on
    an arbitrary background.  Candidates are not filtered for darkness.
    """
    _check_kernel_size(n_sites, MAX_PACKET_SITES)
    n = n_sites
    for r in enumerate_bitstring_dark(n, boundary):
        yield PacketSpec(r, "bitstring"), SparseState(n, np.array([r.bits]), np.array([1.0 + 0j]))
        s1 = facilitable_zeros(r, boundary)
        for i, j in itertools.combinations(s1, 2):
            yield PacketSpec(r, "dimer", (i, j)), _packet_state(r, [((i,), 1.0), ((j,), -1.0)])
        for p in range(2, len(s1) // 2 + 1):
            for sel in itertools.combinations(s1, 2 * p):
                terms = [((), 1.0)]
                for a, b in zip(sel[::2], sel[1::2]):
                    terms = [(s + (a,), c) for s, c in terms] + [(s + (b,), -c) for s, c in terms]
                yield PacketSpec(r, "dimer_product", sel), _packet_state(r, terms)
        s2 = extendable_zeros(r, boundary)
        for i, j in itertools.combinations(s2, 2):
            if _triple_window(i, n, boundary) & _triple_window(j, n, boundary):
                continue
            terms = [((i, i + 1), 1.0), ((j, j + 1), 1.0), ((i, j + 1), -1.0), ((i + 1, j), -1.0), ((i, j), -1.0)]
            yield PacketSpec(r, "triple", (i, j)), _packet_state(r, terms)
    # Omega_m spaces; on a ring the window is translated cyclically but
    # must leave at least one site outside so it never closes on itself
    max_len = n if boundary == "open" else n - 1
    for m in range(2, (max_len - 1) // 2 + 1):
        for L in range(2 * m + 1, max_len + 1):
            configs, K = omega_space(m, L)
            offsets = range(n - L + 1) if boundary == "open" else range(n)
            for o in offsets:
                window = [(o + i) % n for i in range(L)]
                inner = _embed(configs, window)
                rest = [s for s in range(n) if s not in window]
                for bg_bits in itertools.product((0, 1), repeat=len(rest)):
                    bg = sum(1 << s for s, b in zip(rest, bg_bits) if b)
                    root = SpinConfig(bg, n)
                    for col in range(K.shape[1]):
                        yield (PacketSpec(root, f"omega{m}", (col,), (o + 1, L)),
                               SparseState(n, inner | bg, K[:, col].astype(complex)))


@dataclass
class KernelCrossCheck:
    n_sites: int
    boundary: str
    kernel_dims: dict[int, int]
    span_dims: dict[int, int]
    n_candidates: int
    n_dark: int
    max_projection_residual: float
    bitstring_count: int
    independent_sets: int

    @property
    def ok(self) -> bool:
        return (self.kernel_dims == self.span_dims and self.max_projection_residual < 1e-8
                and self.bitstring_count == self.independent_sets)


def cross_validate_kernel(n_sites: int, boundary: str = "periodic") -> KernelCrossCheck:
    """Compare the numerical East kernel with the span of constructed packets."""
    rule = ConstraintRule.east(boundary)
    basis = kernel_basis(rule, n_sites)
    F = lowering_matrix(rule, n_sites)
    cnt = occupation_counts(n_sites)
    per_sector: dict[int, list[np.ndarray]] = {m: [] for m in range(n_sites + 1)}
    n_cand = n_dark = 0
    worst = 0.0
    for spec, st in constructed_packets(n_sites, boundary):
        n_cand += 1
        if st.configs.size == 0:
            continue
        norm = np.sqrt(st.norm_sq)
        resid = np.linalg.norm(F[:, st.configs] @ st.amps) / norm
        if resid > DARK_TOL:
            continue
        n_dark += 1
        m = int(cnt[st.configs[0]])
        if np.any(cnt[st.configs] != m):
            raise ConstructionError(f"packet {spec} mixes sectors")
        idx, K = basis.blocks[m]
        pos = np.searchsorted(idx, st.configs)
        v = np.zeros(idx.size, dtype=complex)
        v[pos] = st.amps / norm
        worst = max(worst, float(np.linalg.norm(v - K @ (K.conj().T @ v))))
        per_sector[m].append(v)
    span = {}
    for m, vs in per_sector.items():
        if vs:
            s = np.linalg.svd(np.array(vs).T, compute_uv=False)
            span[m] = int(np.sum(s > NULL_RTOL * s[0] * max(len(vs), 1)))
    kdims = {m: d for m, d in basis.dims().items() if d}
    span = {m: d for m, d in span.items() if d}
    n_bits = basis.labels.count("Bitstring")
    return KernelCrossCheck(n_sites, boundary, kdims, span, n_cand, n_dark, worst, n_bits,
                            independent_set_count(n_sites, boundary))


# --------------------------------------------------------------------------
# fragmentation


@dataclass
class FragmentationReport:
    rule: ConstraintRule
    n_sites: int
    sector_dims: dict[int, int]
    n_components: dict[int, int]
    histograms: dict[int, dict[int, int]]

    def to_dict(self) -> dict:
        return {
            "rule": self.rule.to_dict(),
            "n_sites": self.n_sites,
            "sectors": [
                {"n_up": m, "sz": m - self.n_sites / 2, "dim": self.sector_dims[m],
                 "components": self.n_components[m],
                 "histogram": {str(k): v for k, v in sorted(self.histograms[m].items())}}
                for m in sorted(self.sector_dims)
            ],
        }


def fragmentation_report(rule: ConstraintRule, n_sites: int) -> FragmentationReport:
    """Connected components of the ``F^dag F`` adjacency in every sector."""
    _check_kernel_size(n_sites)
    dims, ncomp, hist = {}, {}, {}
    for m in range(n_sites + 1):
        idx = sector_indices(n_sites, m)
        if m == 0:
            adj = sp.csr_matrix((idx.size, idx.size))
        else:
            Fm = sector_lowering(rule, n_sites, m)
            adj = (Fm.T @ Fm).tocsr()
            adj.setdiag(0)
            adj.eliminate_zeros()
        k, lab = connected_components(adj, directed=False)
        sizes = np.bincount(lab, minlength=k)
        dims[m] = int(idx.size)
        ncomp[m] = int(k)
        h = np.bincount(sizes)
        hist[m] = {int(s): int(c) for s, c in enumerate(h) if c}
    return FragmentationReport(rule, n_sites, dims, ncomp, hist)
