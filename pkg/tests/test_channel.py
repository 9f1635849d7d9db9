import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irsmimo.channel import (
    PathLossParams,
    RiceanMix,
    aggregate_channel,
    array_response,
    build_segment,
    dirichlet_magnitude,
    los_component,
    path_decomposition,
    sample_link_realization,
    sample_pathloss,
    scattered_component,
    steering_inner_product,
)
from irsmimo.irs import PhaseProfile, optimal_phases, zero_profile
from irsmimo.scenario import ScenarioConfig

angles = st.floats(-math.pi / 2, math.pi / 2, allow_nan=False)


def brute_inner(m, phi1, phi2, spacing=0.5):
    """Explicit element-by-element sum of conj(a(phi1)) * a(phi2)."""
    total = 0j
    for n in range(m):
        total += np.exp(2j * np.pi * spacing * n * (math.sin(phi2) - math.sin(phi1))) / m
    return total


class TestArrayResponse:
    def test_single_element(self):
        np.testing.assert_allclose(array_response(1, 0.7), [1.0])

    def test_broadside(self):
        np.testing.assert_allclose(array_response(4, 0.0), 0.5 * np.ones(4))

    def test_endfire_alternates(self):
        np.testing.assert_allclose(array_response(2, math.pi / 2), [1 / math.sqrt(2), -1 / math.sqrt(2)],
                                   atol=1e-15)

    def test_zero_elements_rejected(self):
        with pytest.raises(ValueError):
            array_response(0, 0.1)

    @given(st.integers(1, 300), angles, st.floats(0.1, 2.0))
    def test_unit_norm_and_phase_progression(self, m, phi, spacing):
        a = array_response(m, phi, spacing)
        assert abs(np.linalg.norm(a) - 1.0) < 1e-12
        n = np.arange(m)
        expected = np.exp(2j * np.pi * n * spacing * math.sin(phi)) / math.sqrt(m)
        np.testing.assert_allclose(a, expected, atol=1e-12)


class TestInnerProduct:
    def test_identical(self):
        a = array_response(17, 0.3)
        assert steering_inner_product(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_two_element_null(self):
        # sum of 1 and exp(j pi) over 2 elements is zero
        value = steering_inner_product(array_response(2, 0.0), array_response(2, math.pi / 2))
        assert abs(value) < 1e-15

    def test_large_array_bound(self):
        m, spacing = 1024, 0.5
        phi1 = 0.1
        phi2 = math.asin(math.sin(phi1) + 0.3)
        value = abs(steering_inner_product(array_response(m, phi1), array_response(m, phi2)))
        # |sin(Mx)/(M sin x)| <= 1/(M |sin x|) and |sin x| >= 2x/pi on [0, pi/2]
        bound = 2.0 / (m * math.pi * spacing * 0.3 * 2.0 / math.pi)
        assert value <= bound
        assert value == pytest.approx(abs(brute_inner(m, phi1, phi2)), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            steering_inner_product(array_response(3, 0.0), array_response(4, 0.0))

    def test_dirichlet_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            m = int(rng.integers(1, 200))
            phi1, phi2 = rng.uniform(-math.pi / 2, math.pi / 2, 2)
            value = abs(steering_inner_product(array_response(m, phi1), array_response(m, phi2)))
            closed = dirichlet_magnitude(m, math.sin(phi2) - math.sin(phi1))
            assert value == pytest.approx(closed, abs=1e-10)


class TestPathLoss:
    def test_deterministic_intercept(self):
        g_db, g_lin = sample_pathloss(PathLossParams(61.4, 20, 10, 0.0), np.random.default_rng(0))
        assert g_db == pytest.approx(81.4)
        assert g_lin == pytest.approx(10 ** 8.14)

    def test_direct_link_median(self):
        g_db, _ = sample_pathloss(PathLossParams(72, 29.2, 51, 0.0), np.random.default_rng(0))
        assert g_db == pytest.approx(72 + 29.2 * math.log10(51))
        assert g_db == pytest.approx(121.86, abs=0.01)

    def test_shadowing_spread(self):
        rng = np.random.default_rng(5)
        params = PathLossParams(72, 29.2, 51, 8.7)
        draws = np.array([sample_pathloss(params, rng)[0] for _ in range(100_000)])
        assert np.std(draws) == pytest.approx(8.7, rel=0.02)
        assert np.mean(draws) == pytest.approx(params.median_db, abs=4 * 8.7 / math.sqrt(1e5))

    def test_invalid(self):
        with pytest.raises(ValueError):
            PathLossParams(0, 20, 0.0)
        with pytest.raises(ValueError):
            PathLossParams(0, 20, 1.0, -1.0)


class TestRiceanMix:
    @given(st.floats(0, 1e6))
    def test_fractions_sum_to_one(self, eta):
        mix = RiceanMix(eta)
        assert mix.los_fraction + mix.scattered_fraction == pytest.approx(1.0)

    def test_blocked_los(self):
        assert RiceanMix(0.0).los_fraction == 0.0

    def test_pure_los_and_db(self):
        assert RiceanMix.from_db(math.inf).scattered_fraction == 0.0
        assert RiceanMix.from_db(0.0).eta == pytest.approx(1.0)
        assert RiceanMix.from_db(5.0).eta == pytest.approx(10 ** 0.5)


class TestComponents:
    def test_los_scalar(self):
        np.testing.assert_allclose(los_component(1, 1, 0.4, -0.2), [[1.0]])

    def test_los_broadside(self):
        np.testing.assert_allclose(los_component(2, 2, 0.0, 0.0), np.ones((2, 2)), atol=1e-15)

    @given(st.integers(1, 40), st.integers(1, 40), angles, angles)
    def test_los_is_rank_one(self, m_r, m_t, phi, theta):
        h = los_component(m_r, m_t, phi, theta)
        s = np.linalg.svd(h, compute_uv=False)
        assert s[0] == pytest.approx(math.sqrt(m_r * m_t), rel=1e-12)
        if s.size > 1:
            assert s[1] < 1e-9 * s[0]
        assert np.linalg.norm(h) == pytest.approx(math.sqrt(m_r * m_t))

    def test_scattered_zero_gain(self):
        h = scattered_component(3, 4, 2, [0.0], [0.2], [0.1])
        assert np.all(h == 0)

    def test_scattered_single_path(self):
        h = scattered_component(2, 2, 2, [1.0], [0.0], [0.0])
        np.testing.assert_allclose(h, np.ones((2, 2)) / math.sqrt(2), atol=1e-15)

    def test_scattered_needs_paths(self):
        with pytest.raises(ValueError):
            scattered_component(2, 2, 1, [], [], [])
        with pytest.raises(ValueError):
            scattered_component(2, 2, 3, [1.0], [0.0], [0.0])

    def test_scattered_energy(self):
        rng = np.random.default_rng(3)
        m_r, m_t, n_paths, trials = 6, 5, 4, 10_000
        energy = np.empty(trials)
        for t in range(trials):
            gains = (rng.standard_normal(n_paths - 1) + 1j * rng.standard_normal(n_paths - 1)) / math.sqrt(2)
            h = scattered_component(m_r, m_t, n_paths, gains,
                                    rng.uniform(-1.5, 1.5, n_paths - 1), rng.uniform(-1.5, 1.5, n_paths - 1))
            energy[t] = np.linalg.norm(h) ** 2
        expected = m_r * m_t * (n_paths - 1) / n_paths
        assert abs(energy.mean() - expected) <= 3 * energy.std() / math.sqrt(trials)


class TestBuildSegment:
    def setup_method(self):
        rng = np.random.default_rng(1)
        self.los = los_component(3, 4, 0.3, -0.5)
        self.sc = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))

    def test_pure_los(self):
        seg = build_segment(RiceanMix(math.inf), 4.0, self.los, self.sc)
        np.testing.assert_allclose(seg.matrix, self.los / 2.0)

    def test_blocked_los(self):
        seg = build_segment(RiceanMix(0.0), 4.0, self.los, self.sc)
        np.testing.assert_allclose(seg.matrix, self.sc / 2.0)

    def test_zero_db_entrywise(self):
        seg = build_segment(RiceanMix(1.0), 4.0, self.los, self.sc)
        for r in range(3):
            for c in range(4):
                expected = math.sqrt(0.5 / 4.0) * self.los[r, c] + math.sqrt(0.5 / 4.0) * self.sc[r, c]
                assert seg.matrix[r, c] == pytest.approx(expected, abs=1e-14)

    def test_errors(self):
        with pytest.raises(ValueError):
            build_segment(RiceanMix(1.0), 4.0, self.los, self.sc[:, :3])
        with pytest.raises(ValueError):
            build_segment(RiceanMix(1.0), 0.0, self.los, self.sc)


def small_config(**kw):
    base = dict(n_t=6, n_r=5, n=4, k=2, trials=1)
    base.update(kw)
    return ScenarioConfig(**base)


class TestRealization:
    def test_deterministic(self):
        config = small_config()
        a = sample_link_realization(config, np.random.default_rng(9))
        b = sample_link_realization(config, np.random.default_rng(9))
        np.testing.assert_array_equal(a.direct.matrix, b.direct.matrix)
        for x, y in zip(a.tx_irs + a.irs_rx, b.tx_irs + b.irs_rx):
            np.testing.assert_array_equal(x.matrix, y.matrix)
            assert x.g_db == y.g_db

    def test_no_irs(self):
        real = sample_link_realization(small_config(k=0), np.random.default_rng(0))
        assert real.k == 0 and real.direct is not None
        np.testing.assert_array_equal(aggregate_channel(real, []), real.direct.matrix)

    def test_direct_link_independent_of_k(self):
        a = sample_link_realization(small_config(k=0), np.random.default_rng(4))
        b = sample_link_realization(small_config(k=3), np.random.default_rng(4))
        np.testing.assert_array_equal(a.direct.matrix, b.direct.matrix)

    def test_dimensions(self):
        real = sample_link_realization(small_config(), np.random.default_rng(0))
        assert real.direct.shape == (5, 6)
        assert all(s.shape == (4, 6) for s in real.tx_irs)
        assert all(s.shape == (5, 4) for s in real.irs_rx)

    def test_segment_recomposes(self):
        real = sample_link_realization(small_config(), np.random.default_rng(2))
        for seg in (real.direct,) + real.tx_irs + real.irs_rx:
            expected = (math.sqrt(seg.mix.los_fraction / seg.g_linear) * seg.los
                        + math.sqrt(seg.mix.scattered_fraction / seg.g_linear) * seg.scattered)
            np.testing.assert_allclose(seg.matrix, expected, rtol=1e-13)
            assert np.linalg.matrix_rank(seg.scattered) <= seg.n_paths - 1

    def test_angle_sines_centered(self):
        config = small_config(k=0, l_direct=10)
        rng = np.random.default_rng(8)
        sines = np.concatenate([
            np.sin(np.concatenate([r.direct.arrival, r.direct.departure]))
            for r in (sample_link_realization(config, rng) for _ in range(5000))
        ])
        assert sines.size == 100_000
        assert abs(sines.mean()) <= 3 * sines.std() / math.sqrt(sines.size)

    def test_scattered_energy_of_direct_link(self):
        config = small_config(k=0, n_t=8, n_r=6, l_direct=3)
        rng = np.random.default_rng(6)
        energy = np.array([np.linalg.norm(sample_link_realization(config, rng).direct.scattered) ** 2
                           for _ in range(10_000)])
        expected = 6 * 8 * 2 / 3
        assert abs(energy.mean() - expected) <= 3 * energy.std() / math.sqrt(energy.size)


class TestAggregateAndDecomposition:
    def test_single_element_surface(self):
        config = small_config(n=1, k=1, l_ti=1, l_ir=1, eta_ti_db=math.inf, eta_ir_db=math.inf)
        real = sample_link_realization(config, np.random.default_rng(0))
        v = 0.9
        h = aggregate_channel(real, [PhaseProfile([v])])
        h_ir = real.irs_rx[0].matrix[:, 0]
        h_ti = real.tx_irs[0].matrix[0, :]
        for r in range(config.n_r):
            for c in range(config.n_t):
                expected = real.direct.matrix[r, c] + np.exp(-1j * v) * h_ir[r] * h_ti[c]
                assert h[r, c] == pytest.approx(expected, abs=1e-15)

    def test_profile_mismatch(self):
        real = sample_link_realization(small_config(), np.random.default_rng(0))
        with pytest.raises(ValueError):
            aggregate_channel(real, [zero_profile(4)])
        with pytest.raises(ValueError):
            aggregate_channel(real, [zero_profile(4), zero_profile(3)])

    def test_blocked_direct_los_gain(self):
        config = small_config(eta_db=-math.inf)
        real = sample_link_realization(config, np.random.default_rng(0))
        dec = path_decomposition(real, [zero_profile(4)] * 2)
        assert dec.direct_gains[0] == 0

    def test_single_pair_gain(self):
        config = small_config(k=1, l_ti=1, l_ir=1, eta_ti_db=math.inf, eta_ir_db=math.inf, n=16)
        real = sample_link_realization(config, np.random.default_rng(1))
        prof = optimal_phases(real.tx_irs[0].arrival[0], real.irs_rx[0].departure[0], 16)
        dec = path_decomposition(real, [prof])
        g1, g2 = real.tx_irs[0].g_linear, real.irs_rx[0].g_linear
        expected = config.n_t * config.n_r * 16 ** 2 / (g1 * g2)
        assert abs(dec.irs_gains[0][0, 0]) ** 2 == pytest.approx(expected, rel=1e-12)

    def test_sorted_and_sized(self):
        config = small_config(l_direct=3, l_ti=2, l_ir=4, k=3)
        real = sample_link_realization(config, np.random.default_rng(0))
        rng = np.random.default_rng(1)
        dec = path_decomposition(real, [PhaseProfile(rng.uniform(0, 6, 4)) for _ in range(3)])
        assert len(dec) == 3 + 3 * 2 * 4
        mags = np.abs(dec.gains)
        assert np.all(mags[:-1] >= mags[1:])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 16), st.integers(1, 16), st.integers(1, 16), st.integers(0, 4),
           st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.booleans(),
           st.integers(0, 2 ** 32 - 1))
    def test_reconstruction_identity(self, n_t, n_r, n, k, l0, l1, l2, direct, seed):
        if k == 0 and not direct:
            direct = True
        config = ScenarioConfig(n_t=n_t, n_r=n_r, n=n, k=k, l_direct=l0, l_ti=l1, l_ir=l2,
                                include_direct=direct, trials=1)
        rng = np.random.default_rng(seed)
        real = sample_link_realization(config, rng)
        profiles = [PhaseProfile(rng.uniform(0, 2 * np.pi, n)) for _ in range(k)]
        h = aggregate_channel(real, profiles)
        rebuilt = path_decomposition(real, profiles).reconstruct()
        assert np.max(np.abs(h - rebuilt)) <= 1e-10 * max(1.0, np.max(np.abs(h)))
