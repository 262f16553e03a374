import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from sparse_nlms.algorithms import (
    ENERGY_FLOOR,
    ISS_NLMS,
    ISS_RZA_NLMS,
    ISS_ZA_NLMS,
    VARIANTS,
    VSS_NLMS,
    AlgorithmSpec,
    FilterState,
    StopCriterion,
    compute_error,
    initial_state,
    run_until_stop,
    rza_penalty,
    sign_vector,
    step,
    vss_step_size,
    vss_update_projection,
    za_penalty,
)
from sparse_nlms.channel import SampleStream, generate_channel, training_pairs
from sparse_nlms.errors import (
    ConfigError,
    DimensionMismatchError,
    StreamExhaustedError,
)
from sparse_nlms.metrics import average_mse

from nlms_oracle import oracle_run

finite_vectors = hnp.arrays(
    dtype=np.float64,
    shape=st.integers(min_value=1, max_value=16),
    elements=st.floats(min_value=-10, max_value=10, allow_nan=False),
)


def make_state(weights, projection=None, **kw):
    w = np.asarray(weights, dtype=float)
    p = np.zeros_like(w) if projection is None else np.asarray(projection, float)
    return FilterState(weights=w, projection=p, **kw)


# ---------------------------------------------------------------- specs


class TestAlgorithmSpec:
    def test_all_variants_construct(self):
        for v in VARIANTS:
            AlgorithmSpec(variant=v)

    def test_unknown_variant_rejected(self):
        with pytest.raises(ConfigError):
            AlgorithmSpec(variant="NLMS")

    @pytest.mark.parametrize(
        "kw",
        [
            {"mu": 0.0},
            {"mu": 1.5},
            {"mu_max": 0.0},
            {"mu_max": 2.5},
            {"rho_za": -1e-9},
            {"rho_rza": -1e-9},
            {"eps_rza": 0.0},
            {"beta": -0.1},
            {"beta": 1.1},
            {"threshold_c": 0.0},
        ],
    )
    def test_bad_parameters_rejected(self, kw):
        with pytest.raises(ConfigError):
            AlgorithmSpec(variant=ISS_NLMS, **kw)

    def test_boundary_values_admitted_by_default(self):
        AlgorithmSpec(variant=ISS_NLMS, mu=1.0, mu_max=2.0)

    def test_strict_level_rejects_boundaries(self):
        spec = AlgorithmSpec(variant=ISS_NLMS, mu=1.0)
        with pytest.raises(ConfigError):
            spec.validate(level="strict")
        spec = AlgorithmSpec(variant=ISS_NLMS, mu_max=2.0)
        with pytest.raises(ConfigError):
            spec.validate(level="strict")
        AlgorithmSpec(variant=ISS_NLMS, mu=0.5, mu_max=1.9).validate(level="strict")

    def test_penalty_kind(self):
        assert AlgorithmSpec(variant=ISS_NLMS).penalty_kind == "none"
        assert AlgorithmSpec(variant=ISS_ZA_NLMS).penalty_kind == "za"
        assert AlgorithmSpec(variant=ISS_RZA_NLMS).penalty_kind == "rza"
        assert not AlgorithmSpec(variant=ISS_NLMS).is_vss
        assert AlgorithmSpec(variant=VSS_NLMS).is_vss


class TestFilterState:
    def test_length_mismatch_rejected(self):
        with pytest.raises(DimensionMismatchError):
            FilterState(weights=np.zeros(3), projection=np.zeros(4))

    def test_negative_step_rejected(self):
        with pytest.raises(ConfigError):
            make_state([0.0], current_step=-0.1)

    def test_initial_state(self):
        spec = AlgorithmSpec(variant=ISS_NLMS, mu=0.3)
        s = initial_state(spec, 5)
        assert np.all(s.weights == 0) and np.all(s.projection == 0)
        assert s.iteration == 0 and s.current_step == 0.3
        assert initial_state(AlgorithmSpec(variant=VSS_NLMS), 5).current_step == 0.0

    def test_initial_state_needs_positive_length(self):
        with pytest.raises(ConfigError):
            initial_state(AlgorithmSpec(variant=ISS_NLMS), 0)


class TestStopCriterion:
    def test_defaults(self):
        stop = StopCriterion()
        assert stop.delta_tolerance == 1e-5
        assert stop.max_iterations == 5000

    def test_validation(self):
        with pytest.raises(ConfigError):
            StopCriterion(delta_tolerance=0.0)
        with pytest.raises(ConfigError):
            StopCriterion(delta_tolerance=-1e-5)
        with pytest.raises(ConfigError):
            StopCriterion(max_iterations=-1)
        StopCriterion(max_iterations=0)  # vacuous loop is legal


# ------------------------------------------------------------- elementals


class TestComputeError:
    def test_zero_estimate_returns_observation(self):
        s = make_state(np.zeros(4))
        assert compute_error(s, np.array([1.0, 2, 3, 4]), 0.7) == 0.7

    def test_perfect_estimate_no_noise(self):
        h = np.array([0.3, -0.5, 0.2])
        x = np.array([1.0, 2.0, -1.0])
        s = make_state(h)
        assert compute_error(s, x, float(h @ x)) == 0.0

    def test_hand_value(self):
        s = make_state([1.0, -1.0])
        assert compute_error(s, np.array([2.0, 3.0]), 0.5) == pytest.approx(1.5, abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            compute_error(make_state([1.0, 2.0]), np.array([1.0]), 0.0)


class TestSignVector:
    def test_three_cases(self):
        np.testing.assert_array_equal(
            sign_vector(np.array([0.5, 0.0, -0.3])), [1.0, 0.0, -1.0]
        )

    def test_all_zero(self):
        np.testing.assert_array_equal(sign_vector(np.zeros(4)), np.zeros(4))

    def test_no_dead_zone(self):
        np.testing.assert_array_equal(sign_vector(np.array([-1e-12])), [-1.0])

    @given(finite_vectors)
    def test_values_and_odd_symmetry(self, v):
        s = sign_vector(v)
        assert set(np.unique(s)).issubset({-1.0, 0.0, 1.0})
        np.testing.assert_array_equal(sign_vector(-v), -s)


class TestZaPenalty:
    def test_hand_value(self):
        np.testing.assert_allclose(
            za_penalty(np.array([0.5, 0.0, -0.2]), 0.1), [0.1, 0.0, -0.1]
        )

    def test_zero_strength(self):
        np.testing.assert_array_equal(za_penalty(np.array([1.0, -2.0]), 0.0), [0, 0])

    def test_zero_weights(self):
        np.testing.assert_array_equal(za_penalty(np.zeros(3), 0.5), np.zeros(3))

    def test_negative_strength_rejected(self):
        with pytest.raises(ConfigError):
            za_penalty(np.ones(2), -0.1)

    @given(finite_vectors, st.floats(min_value=0, max_value=1))
    def test_exact_shrink(self, w, rho):
        # subtracting the penalty moves every |w_i| >= rho down by exactly rho
        pen = za_penalty(w, rho)
        big = np.abs(w) >= rho
        shrunk = np.abs(w[big] - pen[big])
        np.testing.assert_allclose(shrunk, np.abs(w[big]) - rho, atol=1e-15)


class TestRzaPenalty:
    def test_hand_value(self):
        assert rza_penalty(np.array([0.2]), 0.1, 20.0)[0] == pytest.approx(
            0.02, abs=1e-15
        )

    def test_zero_weight(self):
        assert rza_penalty(np.array([0.0]), 0.1, 20.0)[0] == 0.0

    def test_vanishes_for_large_taps(self):
        mags = np.array([1.0, 10.0, 100.0, 1e6])
        pen = rza_penalty(mags, 0.1, 20.0)
        assert np.all(np.diff(pen) < 0)
        assert pen[-1] < 1e-5

    @given(finite_vectors, st.floats(min_value=0, max_value=1))
    def test_bounded_and_sign_aligned(self, w, rho):
        pen = rza_penalty(w, rho, 20.0)
        assert np.all(np.abs(pen) <= rho + 1e-15)
        assert np.all(pen * np.sign(w) >= 0)

    def test_strictly_decreasing_in_magnitude(self):
        mags = np.linspace(0.01, 5.0, 200)
        pen = rza_penalty(mags, 0.3, 20.0)
        assert np.all(np.diff(pen) < 0)


class TestVssProjection:
    def test_hand_value(self):
        out = vss_update_projection(np.zeros(2), np.array([1.0, 0.0]), 2.0, 0.5)
        np.testing.assert_allclose(out, [1.0, 0.0])

    def test_beta_one_keeps_projection(self):
        p = np.array([0.3, -0.4])
        out = vss_update_projection(p, np.array([1.0, 1.0]), 5.0, 1.0)
        np.testing.assert_array_equal(out, p)

    def test_beta_zero_takes_forcing_term(self):
        out = vss_update_projection(np.array([9.0, 9.0]), np.array([0.0, 1.0]), 3.0, 0.0)
        np.testing.assert_allclose(out, [0.0, 3.0])

    def test_zero_energy_rejected(self):
        with pytest.raises(ValueError):
            vss_update_projection(np.zeros(2), np.zeros(2), 1.0, 0.5)

    def test_geometric_contraction(self):
        # constant forcing g: ||p(n) - g|| shrinks by exactly beta each step
        beta = 0.9
        x = np.array([1.0, 2.0, -1.0])
        e = 1.5
        g = (e / float(x @ x)) * x
        p = np.array([5.0, -3.0, 2.0])
        gap0 = np.linalg.norm(p - g)
        for n in range(1, 30):
            p = vss_update_projection(p, x, e, beta)
            assert np.linalg.norm(p - g) == pytest.approx(beta**n * gap0, rel=1e-9)


class TestVssStepSize:
    def test_half_at_threshold(self):
        p = np.array([1.0, 1.0])  # |p|^2 = 2
        assert vss_step_size(p, 1.6, 2.0) == pytest.approx(0.8, abs=1e-15)

    def test_zero_projection(self):
        assert vss_step_size(np.zeros(3), 2.0, 1e-5) == 0.0

    def test_three_c_value(self):
        c = 0.7
        p = np.array([np.sqrt(3 * c)])
        assert vss_step_size(p, 2.0, c) == pytest.approx(1.5, rel=1e-12)

    def test_bounds_and_monotonicity_grid(self):
        mu_max, c = 2.0, 1e-4
        energies = np.linspace(0.0, 1.0, 1000)
        values = [
            vss_step_size(np.array([np.sqrt(pp)]), mu_max, c) for pp in energies
        ]
        values = np.array(values)
        assert np.all(values >= 0.0) and np.all(values < mu_max)
        assert np.all(np.diff(values) > 0)

    @given(
        hnp.arrays(
            dtype=np.float64,
            shape=st.integers(1, 8),
            elements=st.floats(-100, 100, allow_nan=False),
        ),
        st.floats(min_value=0.01, max_value=2.0),
        st.floats(min_value=1e-8, max_value=1.0),
    )
    def test_bounds_property(self, p, mu_max, c):
        mu = vss_step_size(p, mu_max, c)
        assert 0.0 <= mu < mu_max
        # zero exactly when the computed projection energy is zero (the
        # squared norm of a tiny-but-nonzero p can underflow to 0.0)
        assert (mu == 0.0) == (float(p @ p) == 0.0)


# ------------------------------------------------------------------ step


class TestStep:
    def test_unit_step_zeroes_aposteriori_error(self):
        spec = AlgorithmSpec(variant=ISS_NLMS, mu=1.0)
        state = make_state([0.2, -0.4, 0.1], current_step=1.0)
        x = np.array([1.0, 2.0, 3.0])
        y = 0.77
        new, _ = step(state, spec, x, y)
        assert y - float(new.weights @ x) == pytest.approx(0.0, abs=1e-12)

    def test_za_from_zero_state_is_pure_gradient(self):
        spec = AlgorithmSpec(variant=ISS_ZA_NLMS, mu=0.5, rho_za=0.3)
        state = initial_state(spec, 3)
        x = np.array([1.0, -1.0, 2.0])
        y = 1.2
        new, err = step(state, spec, x, y)
        expected = 0.5 * y * x / float(x @ x)
        np.testing.assert_allclose(new.weights, expected, atol=1e-15)
        assert err == y

    @given(
        st.integers(min_value=1, max_value=8),
        st.floats(min_value=0.05, max_value=1.0),
        st.integers(min_value=0, max_value=2**31 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_aposteriori_identity(self, n, mu, seed):
        # penalty-free NLMS: y - w(n+1)'x == (1 - mu) * e(n)
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(n)
        if float(x @ x) < 1e-6:
            x = np.ones(n)
        w = rng.standard_normal(n)
        y = float(rng.standard_normal())
        spec = AlgorithmSpec(variant=ISS_NLMS, mu=mu)
        state = make_state(w, current_step=mu)
        new, err = step(state, spec, x, y)
        posterior = y - float(new.weights @ x)
        assert posterior == pytest.approx((1.0 - mu) * err, abs=1e-12)

    def test_truth_is_fixed_point_for_plain_nlms(self):
        rng = np.random.default_rng(3)
        h = rng.standard_normal(6)
        x = rng.standard_normal(6)
        spec = AlgorithmSpec(variant=ISS_NLMS, mu=0.4)
        state = make_state(h, current_step=0.4)
        new, err = step(state, spec, x, float(h @ x))
        assert err == 0.0
        np.testing.assert_array_equal(new.weights, h)

    @pytest.mark.parametrize("variant", [ISS_ZA_NLMS, ISS_RZA_NLMS])
    def test_zero_error_update_is_negated_penalty(self, variant):
        # sparsity penalties keep acting on nonzero taps even at zero error
        rng = np.random.default_rng(4)
        h = rng.standard_normal(5)
        x = rng.standard_normal(5)
        spec = AlgorithmSpec(variant=variant, mu=0.4, rho_za=0.01, rho_rza=0.01)
        state = make_state(h, current_step=0.4)
        new, err = step(state, spec, x, float(h @ x))
        assert err == 0.0
        if variant == ISS_ZA_NLMS:
            pen = za_penalty(h, spec.rho_za)
        else:
            pen = rza_penalty(h, spec.rho_rza, spec.eps_rza)
        np.testing.assert_allclose(new.weights - h, -pen, atol=1e-15)

    def test_energy_floor_skips_update(self):
        spec = AlgorithmSpec(variant=VSS_NLMS)
        state = make_state([0.5, 0.5], projection=[0.1, 0.1], current_step=0.7)
        x = np.full(2, np.sqrt(ENERGY_FLOOR / 10))
        new, err = step(state, spec, x, 1.0)
        np.testing.assert_array_equal(new.weights, state.weights)
        np.testing.assert_array_equal(new.projection, state.projection)
        assert new.current_step == state.current_step
        assert new.iteration == state.iteration + 1
        assert err == pytest.approx(1.0 - float(state.weights @ x))

    def test_dimension_mismatch(self):
        spec = AlgorithmSpec(variant=ISS_NLMS)
        with pytest.raises(DimensionMismatchError):
            step(initial_state(spec, 3), spec, np.ones(4), 1.0)

    def test_vss_step_recorded_and_bounded(self):
        spec = AlgorithmSpec(variant=VSS_NLMS, mu_max=1.5, threshold_c=1e-3)
        state = initial_state(spec, 4)
        rng = np.random.default_rng(11)
        for _ in range(50):
            x = rng.standard_normal(4)
            state, _ = step(state, spec, x, float(rng.standard_normal()))
            assert 0.0 <= state.current_step < 1.5

    def test_deterministic(self):
        spec = AlgorithmSpec(variant=VSS_NLMS)
        rng = np.random.default_rng(5)
        x = rng.standard_normal(4)
        y = 0.3
        s0 = initial_state(spec, 4)
        a, ea = step(s0, spec, x, y)
        b, eb = step(s0, spec, x, y)
        assert ea == eb
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.projection, b.projection)


class TestOracleAgreement:
    """Spot agreement with the straight-line transcription; the full
    randomized sweep lives in the acceptance suite."""

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_three_iterations_n4(self, variant):
        rng = np.random.default_rng(99)
        xs = [rng.standard_normal(4) for _ in range(3)]
        ys = [float(v) for v in rng.standard_normal(3)]
        params = dict(
            mu=0.3, mu_max=1.2, rho_za=0.01, rho_rza=0.02,
            eps_rza=20.0, beta=0.7, threshold_c=1e-3,
        )
        spec = AlgorithmSpec(variant=variant, **params)
        state = initial_state(spec, 4)
        mine = []
        for x, y in zip(xs, ys):
            state, _ = step(state, spec, x, y)
            mine.append(state.weights.copy())
        theirs = oracle_run(variant, [list(x) for x in xs], ys, **params)
        for got, want in zip(mine, theirs):
            np.testing.assert_allclose(got, np.array(want), atol=1e-12)

    def test_unnormalized_rza_switch(self):
        rng = np.random.default_rng(100)
        xs = [rng.standard_normal(4) for _ in range(3)]
        ys = [float(v) for v in rng.standard_normal(3)]
        params = dict(
            mu=0.1, mu_max=1.2, rho_za=0.0, rho_rza=0.02,
            eps_rza=20.0, beta=0.7, threshold_c=1e-3,
        )
        spec = AlgorithmSpec(
            variant=ISS_RZA_NLMS, unnormalized_rza=True, **params
        )
        state = initial_state(spec, 4)
        mine = []
        for x, y in zip(xs, ys):
            state, _ = step(state, spec, x, y)
            mine.append(state.weights.copy())
        theirs = oracle_run(
            ISS_RZA_NLMS, [list(x) for x in xs], ys,
            unnormalized_rza=True, **params,
        )
        for got, want in zip(mine, theirs):
            np.testing.assert_allclose(got, np.array(want), atol=1e-12)
        # and it genuinely differs from the normalized form
        normalized = oracle_run(
            ISS_RZA_NLMS, [list(x) for x in xs], ys, **params
        )
        assert not np.allclose(mine[-1], np.array(normalized[-1]))


# --------------------------------------------------------- run_until_stop


class TestRunUntilStop:
    def _setup(self, seed=0, n=8, k=2, noise_power=0.0):
        channel = generate_channel(n, k, seed)
        stream = SampleStream(seed + 1, n, noise_power=noise_power)
        return channel, stream

    def test_zero_max_iterations_is_vacuous(self):
        spec = AlgorithmSpec(variant=ISS_NLMS)
        channel, stream = self._setup()
        state0 = initial_state(spec, 8)
        final, trace = run_until_stop(
            state0, spec, StopCriterion(1e-5, 0), training_pairs(stream, channel)
        )
        assert final is state0
        assert len(trace) == 0 and not trace.converged

    def test_huge_tolerance_stops_after_one_iteration(self):
        spec = AlgorithmSpec(variant=ISS_NLMS)
        channel, stream = self._setup(seed=3)  # leading tap on the support
        final, trace = run_until_stop(
            initial_state(spec, 8),
            spec,
            StopCriterion(1e300, 5000),
            training_pairs(stream, channel),
        )
        assert len(trace) == 1 and trace.converged
        assert final.iteration == 1

    def test_noise_free_convergence_via_tolerance(self):
        # well-conditioned noise-free instance (leading tap on the support,
        # frozen at build time): terminates before the cap, lands close to
        # the true channel
        spec = AlgorithmSpec(variant=ISS_NLMS, mu=0.8)
        channel, stream = self._setup(seed=44)
        final, trace = run_until_stop(
            initial_state(spec, 8),
            spec,
            StopCriterion(1e-5, 5000),
            training_pairs(stream, channel),
            metric_hook=lambda s: average_mse(channel.taps, s.weights),
        )
        assert trace.converged and len(trace) < 5000
        assert average_mse(channel.taps, final.weights) < 1e-3

    def test_stream_exhaustion_raises(self):
        import itertools

        spec = AlgorithmSpec(variant=ISS_NLMS)
        channel, stream = self._setup(noise_power=0.01)
        pairs = list(itertools.islice(training_pairs(stream, channel), 3))
        with pytest.raises(StreamExhaustedError):
            run_until_stop(
                initial_state(spec, 8), spec, StopCriterion(1e-300, 10), pairs
            )

    def test_trace_contents_align(self):
        spec = AlgorithmSpec(variant=VSS_NLMS)
        channel, stream = self._setup(seed=5, noise_power=0.01)
        _, trace = run_until_stop(
            initial_state(spec, 8),
            spec,
            StopCriterion(1e-300, 25),
            training_pairs(stream, channel),
            metric_hook=lambda s: float(s.iteration),
        )
        assert len(trace) == 25
        assert trace.errors.shape == trace.step_sizes.shape == (25,)
        assert trace.weight_deltas.shape == (25,)
        np.testing.assert_array_equal(trace.metrics, np.arange(1, 26))
        np.testing.assert_array_equal(trace.squared_errors, trace.errors**2)

    def test_bit_identical_reruns(self):
        spec = AlgorithmSpec(variant=VSS_NLMS)
        results = []
        for _ in range(2):
            channel, stream = self._setup(seed=21, noise_power=0.01)
            final, trace = run_until_stop(
                initial_state(spec, 8),
                spec,
                StopCriterion(1e-300, 40),
                training_pairs(stream, channel),
            )
            results.append((final.weights.copy(), trace.errors.copy()))
        np.testing.assert_array_equal(results[0][0], results[1][0])
        np.testing.assert_array_equal(results[0][1], results[1][1])
