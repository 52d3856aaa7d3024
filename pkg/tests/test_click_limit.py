import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kcsr.click_limit import (SupportOverflow, and_count, and_intensity, boolean_lower_bound, g_and,
                              g_and_maximizer, isolated_zone_size, layer_spectrum, ode_density,
                              quadrature_time, random_boolean_rule, verify_bound, waiting_time_sum)
from kcsr.spin_algebra import ConstraintRule, SpinConfig


def test_east_n3_layers():
    s = layer_spectrum(ConstraintRule.east(), 3)
    assert np.allclose(s.norms, [1, 3, 3, 0])
    assert np.allclose(s.intensities, [3, 1, 0])


def test_and_n6_layers():
    s = layer_spectrum(ConstraintRule.and_(), 6, 3)
    assert np.allclose(s.norms, [1, 6, 36, 72])
    assert np.allclose(s.intensities, [6, 6, 2])


@pytest.mark.parametrize("n", [1, 2, 5, 9, 14])
def test_dicke_ladder(n):
    s = layer_spectrum(ConstraintRule.dicke(), n)
    k = np.arange(n)
    assert np.allclose(s.intensities, (k + 1) * (n - k), rtol=1e-12)
    assert s.log_norms[0] == 0


def test_support_overflow():
    with pytest.raises(SupportOverflow):
        layer_spectrum(ConstraintRule.east(), 20, max_support=100)


def test_and_count_examples():
    assert [and_count(6, k) for k in range(4)] == [1, 6, 9, 2]
    assert and_count(6, 4) == 0


@given(st.integers(3, 40))
def test_and_count_matches_enumeration(n):
    if n > 16:
        n = n % 14 + 3
    counts = np.zeros(n // 2 + 1, dtype=int)
    for b in range(1 << n):
        rot = ((b >> 1) | ((b & 1) << (n - 1)))
        if b & rot == 0:
            counts[bin(b).count("1")] += 1
    assert [and_count(n, k) for k in range(n // 2 + 1)] == list(counts)


def test_and_intensity_examples():
    assert and_intensity(6, 1) == 6 and and_intensity(6, 3) == 0 and and_intensity(4, 0) == 4


@pytest.mark.parametrize("n", [6, 9, 12, 15])
def test_and_exact_identity(n):
    s = layer_spectrum(ConstraintRule.and_(), n, n // 2)
    for k in range(n // 2 + 1):
        expect = 2 * math.lgamma(k + 1) + math.log(and_count(n, k))
        assert s.log_norms[k] == pytest.approx(expect, rel=1e-9, abs=1e-12)
    for k in range(n // 2):
        assert s.intensities[k] == pytest.approx(and_intensity(n, k), rel=1e-9, abs=1e-12)


def test_g_and_examples():
    assert g_and(1.0) == 0 and g_and(0.5) == 0 and g_and(0.3) == 0
    assert g_and(0.75) == pytest.approx(1 / 12)
    assert g_and_maximizer() == pytest.approx(0.80, abs=0.01)


def test_g_and_asymptotics():
    for n in (40, 80, 160, 400):
        assert abs(and_intensity(n, n // 4) / n**2 - g_and(0.75)) <= 2 / n


def test_lower_bound_examples():
    assert boolean_lower_bound(1, 12, 3) == 12
    assert boolean_lower_bound(1, 12, 4) == 0
    assert boolean_lower_bound(2, 9, 0) == 9


def test_isolated_zone_examples():
    assert isolated_zone_size(SpinConfig(0, 10), 1) == 10
    assert isolated_zone_size(SpinConfig.from_sites([1], 10), 1) == 7
    assert isolated_zone_size(SpinConfig((1 << 10) - 1, 10), 1) == 0


@pytest.mark.parametrize("rule,n", [(ConstraintRule.east(), 12), (ConstraintRule.and_(), 14),
                                    (ConstraintRule.or_(), 12)])
def test_verify_bound_builtin(rule, n):
    rep = verify_bound(rule, n)
    assert rep.passed and np.all(rep.margins >= -1e-12) and rep.lemma_checks > 0


def test_verify_bound_random_tables():
    rng = np.random.default_rng(7)
    for _ in range(50):
        assert verify_bound(random_boolean_rule(1, rng), 10, lemma_samples=20).passed


@given(st.sampled_from(["east", "and", "or"]), st.integers(3, 12))
def test_intensity_bounded_by_N_squared(kind, n):
    s = layer_spectrum(ConstraintRule(kind), n)
    assert np.all(s.intensities <= n * n + 1e-9) and np.all(s.intensities >= 0)


def test_waiting_time_log_over_N():
    vals = []
    for n in range(12, 25):
        s = layer_spectrum(ConstraintRule.east(), n, int(0.2 * n))
        vals.append(waiting_time_sum(s, int(0.2 * n)) * n / math.log(n))
    assert max(vals) < 1.5


def test_ode_monotone_and_bounded():
    tr = ode_density("and", 0.99, np.linspace(0, 50, 201))
    assert tr.n[0] == pytest.approx(0.99) and np.all(np.diff(tr.n) <= 0) and tr.n[-1] > 0.5 - 1e-9


def test_quadrature_examples():
    assert quadrature_time(0.9, 0.9) == 0
    with pytest.raises(ValueError):
        quadrature_time(0.4, 0.9)


def test_quadrature_matches_ode():
    tau = quadrature_time(0.8, 0.99)
    tr = ode_density("and", 0.99, np.array([0.0, tau]))
    assert tr.n[-1] == pytest.approx(0.8, abs=1e-6)


def test_peak_time_law():
    ns = g_and_maximizer()
    t = [quadrature_time(ns, 1 - 1 / n) for n in (100, 1000, 10000)]
    for d in np.diff(t):
        assert abs(d - math.log(10)) / math.log(10) < 0.05
