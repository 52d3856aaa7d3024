import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kcsr.dtwa import (
    DtwaParams, PhasePoint, _drift1, _heun_block, drift, run_dtwa, sample_initial, step,
)
from kcsr.dynamics import NumericError
from kcsr.spin_algebra import ConstraintRule

COEFFS = {"dicke": None, "east": (1.0, 0.0, 0.0), "and": (0.0, 0.0, 1.0), "or": (1.0, 1.0, -1.0)}


def printed_drift(p: DtwaParams, a, sx, sy, sz):
    """Site-by-site transcription of the equations of motion for one phase point.

    Ladder variables are ``s^{+-} = (s^x +- i s^y)/2`` so that ``n = (1 + s^z)/2``
    and the spin-1/2 operator identities hold at the sampled corners.
    """
    n = sz.size
    per = p.boundary == "periodic"
    sp = 0.5 * (sx + 1j * sy)
    sm = 0.5 * (sx - 1j * sy)
    al, be, ga = p.coefficients or (0.0, 0.0, 0.0)

    def site(v, j):
        if per:
            return v[j % n]
        return v[j] if 0 <= j < n else 0.0

    nn = 0.5 * (1 + sz)
    P = np.ones(n) if p.is_dicke else np.array(
        [al * site(nn, j - 1) + be * site(nn, j + 1) + ga * site(nn, j - 1) * site(nn, j + 1) for j in range(n)])
    da = -1j * p.delta * a - 1j * p.g * np.sum(P * sm) - 0.5 * p.kappa * a
    dsm = np.empty(n, complex)
    dsz = np.empty(n)
    for j in range(n):
        bracket = 0j
        if not p.is_dicke:
            inner = (al * a * site(sp, j + 1) + be * a * site(sp, j - 1)
                     + ga * a * (site(sp, j + 1) * site(nn, j + 2) + site(nn, j - 2) * site(sp, j - 1)))
            bracket = inner + np.conj(inner)
        dsm[j] = 1j * p.g * a * P[j] * sz[j] - 1j * p.g * sm[j] * bracket
        dsz[j] = (-2j * p.g * P[j] * (a * sp[j] - np.conj(a) * sm[j])).real
    return da, dsm, dsz


def random_point(rng, m, n):
    return PhasePoint(rng.normal(size=m) + 1j * rng.normal(size=m), rng.normal(size=(m, n)),
                      rng.normal(size=(m, n)), rng.uniform(-1, 1, size=(m, n)))


def test_sampling_statistics():
    p = DtwaParams(6, COEFFS["east"], n_traj=4000, seed=3)
    pt = sample_initial(p, np.arange(4000))
    assert set(np.unique(pt.sx)) == {-1.0, 1.0} and set(np.unique(pt.sy)) == {-1.0, 1.0}
    assert np.all(pt.sz == 1.0)
    m = pt.sx.size
    assert abs(pt.sx.mean()) < 3 / math.sqrt(m)
    a2 = np.abs(pt.a) ** 2
    assert abs(a2.mean() - 0.5) < 3 * a2.std() / math.sqrt(a2.size)
    # per-index reproducibility
    again = sample_initial(p, 17)
    assert np.array_equal(again.sx[0], pt.sx[17]) and again.a[0] == pt.a[17]


def test_fixed_point_without_coupling(rng):
    p = DtwaParams(5, COEFFS["and"], g=0.0, kappa=0.0)
    pt = random_point(rng, 3, 5)
    out = step(pt, p, 0.1, None)
    assert np.array_equal(out.a, pt.a) and np.allclose(out.sx, pt.sx) and np.array_equal(out.sz, pt.sz)


@pytest.mark.parametrize("kind", list(COEFFS))
@pytest.mark.parametrize("boundary", ["periodic", "open"])
def test_drift_matches_transcription(kind, boundary, rng):
    p = DtwaParams(7, COEFFS[kind], g=0.8, kappa=3.0, delta=0.4, boundary=boundary)
    pt = random_point(rng, 4, 7)
    da, dsm, dsz = drift(p, pt.a, pt.sm, pt.sz)
    for m in range(4):
        ra, rsm, rsz = printed_drift(p, pt.a[m], pt.sx[m], pt.sy[m], pt.sz[m])
        assert da[m] == pytest.approx(ra, abs=1e-12)
        assert np.allclose(dsm[m], rsm, atol=1e-12) and np.allclose(dsz[m], rsz, atol=1e-12)
        bsm, bsz = np.empty(7, complex), np.empty(7)
        al, be, ga = p.coefficients or (0.0, 0.0, 0.0)
        ba = _drift1(pt.a[m], pt.sm[m].copy(), pt.sz[m].copy(), p.g, p.kappa, p.delta, al, be, ga,
                     p.is_dicke, boundary == "periodic", bsm, bsz)
        assert ba == pytest.approx(ra, abs=1e-12)
        assert np.allclose(bsm, rsm, atol=1e-12) and np.allclose(bsz, rsz, atol=1e-12)


@pytest.mark.parametrize("kind", ["east", "or"])
def test_step_finite_difference(kind, rng):
    p = DtwaParams(6, COEFFS[kind], g=1.0, kappa=2.0, delta=0.3)
    pt = random_point(rng, 1, 6)
    ra, rsm, rsz = printed_drift(p, pt.a[0], pt.sx[0], pt.sy[0], pt.sz[0])
    errs = []
    for dt in (1e-3, 5e-4):
        out = step(pt, p, dt, None)
        fd = np.concatenate([[(out.a[0] - pt.a[0]) / dt], (out.sm[0] - pt.sm[0]) / dt, (out.sz[0] - pt.sz[0]) / dt])
        errs.append(np.max(np.abs(fd - np.concatenate([[ra], rsm, rsz]))))
    # difference quotient of a second-order step deviates from the drift by O(dt)
    assert errs[1] < 0.6 * errs[0] and errs[1] < 1e-2


@settings(max_examples=15)
@given(st.sampled_from(list(COEFFS)), st.sampled_from(["periodic", "open"]), st.integers(0, 2**31 - 1))
def test_numba_block_matches_reference(kind, boundary, seed):
    rng = np.random.default_rng(seed)
    p = DtwaParams(5, COEFFS[kind], g=1.0, kappa=4.0, delta=-0.5, boundary=boundary)
    pt = random_point(rng, 3, 5)
    noise = (rng.normal(size=(3, 6)) + 1j * rng.normal(size=(3, 6))) / math.sqrt(2)
    h = 0.01
    ref = pt
    for k in range(6):
        ref = step(ref, p, h, noise[:, k])
    a, sm, sz = pt.a.copy(), pt.sm.copy(), pt.sz.copy()
    al, be, ga = p.coefficients or (0.0, 0.0, 0.0)
    _heun_block(a, sm, sz, noise, h, -0.5 * math.sqrt(2 * p.kappa * h), p.g, p.kappa, p.delta, al, be, ga,
                p.is_dicke, boundary == "periodic")
    assert np.allclose(a, ref.a, atol=1e-12) and np.allclose(sm, ref.sm, atol=1e-12)
    assert np.allclose(sz, ref.sz, atol=1e-12)


def test_ornstein_uhlenbeck_mean():
    alpha0, kappa = 1.0 + 0.5j, 2.0
    p = DtwaParams(2, None, g=0.0, kappa=kappa, alpha0=alpha0, n_traj=4000, seed=1, t_end=1.0, n_points=5)
    rng = np.random.default_rng(5)
    pt = sample_initial(p, np.arange(4000))
    dt = 0.01
    for _ in range(100):
        z = (rng.normal(size=4000) + 1j * rng.normal(size=4000)) / math.sqrt(2)
        pt = step(pt, p, dt, z)
    target = alpha0 * math.exp(-kappa / 2)
    sem = pt.a.std() / math.sqrt(pt.a.size)
    assert abs(pt.a.mean() - target) < 4 * sem
    # vacuum width is stationary under the loss noise
    assert np.var(pt.a) == pytest.approx(0.5, rel=0.08)
    res = run_dtwa(p, ["photons"])
    ph, se = res.observables["photons"]
    exact = abs(alpha0) ** 2 * np.exp(-kappa * res.grid.times)
    assert np.all(np.abs(ph - exact) <= 4 * se + 1e-12)


def test_zero_kappa_is_deterministic():
    p = DtwaParams(4, COEFFS["east"], kappa=0.0, n_traj=4, seed=2, t_end=0.5, n_points=3)
    a = run_dtwa(p, return_samples=True)
    b = run_dtwa(p, return_samples=True)
    assert np.array_equal(a.meta["samples"]["n"], b.meta["samples"]["n"])
    # the same initial sample evolved by hand with no noise reproduces the ensemble member
    pt = sample_initial(p, 1)
    h = a.meta["dt"]
    for _ in range(round(0.5 / h)):
        pt = step(pt, p, h, None)
    assert np.mean(0.5 * (1 + pt.sz)) == pytest.approx(a.meta["samples"]["n"][1, -1], abs=1e-10)


def test_dt_halving_with_consistent_noise():
    p = DtwaParams(6, COEFFS["east"], g=1.0, kappa=30.0, n_traj=100, seed=4, t_end=2.0)
    dt = p.default_dt
    steps = round(p.t_end / dt)
    rng = np.random.default_rng(8)
    coarse = fine = sample_initial(p, np.arange(p.n_traj))
    for _ in range(steps):
        z1 = (rng.normal(size=p.n_traj) + 1j * rng.normal(size=p.n_traj)) / math.sqrt(2)
        z2 = (rng.normal(size=p.n_traj) + 1j * rng.normal(size=p.n_traj)) / math.sqrt(2)
        fine = step(step(fine, p, dt / 2, z1), p, dt / 2, z2)
        coarse = step(coarse, p, dt, (z1 + z2) / math.sqrt(2))
    n_f = np.mean(0.5 * (1 + fine.sz))
    n_c = np.mean(0.5 * (1 + coarse.sz))
    assert abs(n_f - n_c) < 1e-3


def test_dicke_burst():
    p = DtwaParams(16, None, g=1.0, kappa=30.0, n_traj=200, seed=0, t_end=6.0, n_points=61, dt=0.01 / 30)
    res = run_dtwa(p)
    n = res.mean("n")
    s = res.mean("Sperp2")
    assert n[0] == 1.0 and n[-1] < 0.15
    assert np.all(np.diff(n) < 0.02)
    k = int(np.argmax(s))
    assert 0 < k < len(s) - 1
    assert s[k] > 4 * s[0]


def test_initial_observables():
    alpha0 = 1.5 * np.exp(0.3j)
    p = DtwaParams(8, COEFFS["east"], alpha0=alpha0, n_traj=2000, seed=1, t_end=0.1, n_points=2)
    res = run_dtwa(p)
    assert res.mean("n")[0] == 1.0
    ph, se = res.observables["photons"]
    assert abs(ph[0] - abs(alpha0) ** 2) < 3 * se[0]
    # fully polarised start: <S_perp^2> = N/2, cross terms vanish on average
    s, se = res.observables["Sperp2"]
    assert abs(s[0] - 4.0) < 3 * se[0]


def test_from_rule_and_errors():
    assert DtwaParams.from_rule(ConstraintRule.east(), 4).coefficients == (1.0, 0.0, 0.0)
    assert DtwaParams.from_rule(ConstraintRule.dicke(), 4).is_dicke
    with pytest.raises(ValueError):
        DtwaParams(4, None, dt=-1.0)
    with pytest.raises(ValueError):
        run_dtwa(DtwaParams(4, None, n_traj=1))
    with pytest.raises(ValueError):
        run_dtwa(DtwaParams(4, None, n_traj=2), ["EN"])


def test_instability_is_reported():
    p = DtwaParams(8, COEFFS["east"], g=5.0, kappa=30.0, n_traj=4, t_end=5.0, n_points=2, dt=1.0)
    with pytest.raises(NumericError, match="try dt"):
        run_dtwa(p)
