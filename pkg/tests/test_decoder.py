import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from pdecode.channel import ChannelLayout, LayoutParams, Observation, build_layout, transmit, trial_rng
from pdecode.codes import enumerate_codebook
from pdecode.decoder import (DecodeResult, GfDecoderParams, bp_detect, gf_decode, hard_decision,
                             peak_detect, project_gradient)
from pdecode.errors import ConfigError, DimensionError, LayoutError, PdecodeError
from pdecode.solvers.heat import HeatGrid, HeatSolver
from pdecode.solvers.nlse import NlseGrid, NlseSolver

DEMO_WORD = np.array([1, 1, -1, -1, 1, -1, 1])


@pytest.fixture
def heat_solver():
    return HeatSolver(HeatGrid(lam=0.2, h=0.005, ell=0.05, n_x=200, n_t=100))


@pytest.fixture
def layout(heat_solver):
    return build_layout(heat_solver, 7, LayoutParams(t0=0.2))


@pytest.fixture
def identity_solver():
    return HeatSolver(HeatGrid(lam=0.2, h=0.005, ell=0.05, n_x=200, n_t=0))


@pytest.fixture
def nlse_solver():
    return NlseSolver(NlseGrid(s_sign=1, n_sq=1.0, n_tau=256, tau_span=40.0, ell_xi=0.025, n_steps=20))


@pytest.fixture
def nlse_layout(nlse_solver):
    return build_layout(nlse_solver, 15, LayoutParams(t0=1.0, dispersion_length=0.1))


class TestParams:
    def test_defaults(self):
        params = GfDecoderParams()
        assert params.iterations == 20
        assert params.init_sigma == 0.5
        assert params.init_mode == "random"

    @pytest.mark.parametrize("field,value", [("eta", 0.0), ("gamma", -0.1), ("iterations", 0),
                                             ("init_sigma", -1.0), ("init_mode", "zero")])
    def test_validation(self, field, value):
        with pytest.raises(ConfigError) as e:
            GfDecoderParams(**{field: value})
        assert e.value.field == f"decoder.{field}"


class TestProjectGradient:
    def test_zero(self, layout):
        assert_array_equal(project_gradient(np.zeros(199), layout), np.zeros(7))

    def test_unit_vector(self, layout):
        z = np.zeros(199)
        z[layout.center_indices[0]] = 1.0
        assert_array_equal(project_gradient(z, layout), [1, 0, 0, 0, 0, 0, 0])

    def test_complex_takes_real_part(self, layout):
        z = np.zeros(199, dtype=complex)
        z[list(layout.center_indices)] = 2.0 + 3.0j
        assert_array_equal(project_gradient(z, layout), np.full(7, 2.0))

    def test_length(self, layout):
        with pytest.raises(DimensionError):
            project_gradient(np.zeros(10), layout)


def test_hard_decision_ties_to_plus():
    assert_array_equal(hard_decision([0.0, -0.5, 0.5, np.nan]), [1, -1, 1, 1])


class TestGfDecode:
    def test_codewords_are_fixed_points(self, hamming, layout, heat_solver):
        params = GfDecoderParams(eta=0.1, gamma=1.0)
        book = enumerate_codebook(hamming)
        for word in book:
            obs = transmit(word, layout, heat_solver, trial_rng(0), sigma=0.0)
            result = gf_decode(obs, layout, heat_solver, hamming, params, start=word)
            assert_array_equal(result.estimate, word)
            assert_allclose(result.final_state, word)
            assert result.is_codeword
            assert not result.diverged

    def test_squared_error_decreases(self, hamming, layout, heat_solver):
        params = GfDecoderParams(eta=0.1, gamma=0.1, iterations=20)
        obs = transmit(DEMO_WORD, layout, heat_solver, trial_rng(1), sigma=0.1)
        result = gf_decode(obs, layout, heat_solver, hamming, params, trial_rng(2))
        assert len(result.squared_error) == 21
        assert len(result.potential) == 21
        assert result.iterations_run == 20
        assert result.squared_error[-1] < result.squared_error[0]
        assert result.trajectory is result.squared_error

    def test_small_step_descends(self, hamming, layout, heat_solver):
        obs = transmit(DEMO_WORD, layout, heat_solver, trial_rng(4), sigma=0.05)
        start = trial_rng(5).normal(0, 0.5, 7)
        eta = 0.5
        for _ in range(20):
            params = GfDecoderParams(eta=eta, gamma=0.0, iterations=1)
            errors = gf_decode(obs, layout, heat_solver, hamming, params, start=start).squared_error
            if errors[1] < errors[0]:
                break
            eta /= 2
        else:
            pytest.fail("no step size decreased the squared error")

    def test_deterministic(self, hamming, layout, heat_solver):
        obs = transmit(DEMO_WORD, layout, heat_solver, trial_rng(1), sigma=0.1)
        a = gf_decode(obs, layout, heat_solver, hamming, GfDecoderParams(), trial_rng(7))
        b = gf_decode(obs, layout, heat_solver, hamming, GfDecoderParams(), trial_rng(7))
        assert_array_equal(a.final_state, b.final_state)
        assert a.squared_error == b.squared_error

    def test_identity_channel_recovers_codeword(self, hamming, identity_solver):
        layout = build_layout(identity_solver, 7, LayoutParams(t0=0.2))
        word = enumerate_codebook(hamming).words[11]
        obs = transmit(word, layout, identity_solver, trial_rng(0), sigma=0.0)
        result = gf_decode(obs, layout, identity_solver, hamming, GfDecoderParams(), trial_rng(3))
        assert_array_equal(result.estimate, word)

    def test_peak_start(self, hamming, identity_solver):
        layout = build_layout(identity_solver, 7, LayoutParams(t0=0.2))
        word = enumerate_codebook(hamming).words[6]
        obs = transmit(word, layout, identity_solver, trial_rng(0), sigma=0.0)
        result = gf_decode(obs, layout, identity_solver, hamming, GfDecoderParams(init_mode="peak"))
        assert_allclose(result.final_state, word, atol=1e-6)

    def test_waveforms_kept_on_request(self, hamming, layout, heat_solver):
        obs = transmit(DEMO_WORD, layout, heat_solver, trial_rng(1), sigma=0.1)
        result = gf_decode(obs, layout, heat_solver, hamming,
                           GfDecoderParams(iterations=3, keep_waveforms=True), trial_rng(2))
        assert len(result.waveforms) == 4
        assert result.waveforms[0].shape == (199,)

    def test_divergence_is_reported(self, hamming, layout, heat_solver):
        obs = transmit(DEMO_WORD, layout, heat_solver, trial_rng(1), sigma=0.1)
        result = gf_decode(obs, layout, heat_solver, hamming, GfDecoderParams(eta=1e6), trial_rng(2))
        assert result.diverged
        assert not result.is_codeword
        assert result.estimate.shape == (7,)
        assert result.iterations_run < 20

    def test_dimension_mismatch(self, bch15, layout, heat_solver):
        obs = transmit(DEMO_WORD, layout, heat_solver, trial_rng(1), sigma=0.0)
        with pytest.raises(DimensionError):
            gf_decode(obs, layout, heat_solver, bch15, GfDecoderParams())

    def test_observation_length(self, hamming, layout, heat_solver):
        with pytest.raises(DimensionError):
            gf_decode(Observation(y=np.zeros(5)), layout, heat_solver, hamming, GfDecoderParams())

    def test_nlse_channel(self, bch15, nlse_layout, nlse_solver):
        word = enumerate_codebook(bch15).words[37]
        obs = transmit(word, nlse_layout, nlse_solver, trial_rng(0), sigma=0.0)
        result = gf_decode(obs, nlse_layout, nlse_solver, bch15, GfDecoderParams(), start=word)
        assert_array_equal(result.estimate, word)
        assert isinstance(result, DecodeResult)


class TestPeakDetect:
    def test_positive(self, layout):
        assert_array_equal(peak_detect(Observation(y=np.full(199, 0.3)), layout), np.ones(7))

    def test_identity_channel(self, layout, identity_solver):
        layout = build_layout(identity_solver, 7, LayoutParams(t0=0.2))
        obs = transmit(DEMO_WORD, layout, identity_solver, trial_rng(0), sigma=0.0)
        assert_array_equal(peak_detect(obs, layout), DEMO_WORD)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(1e-3, 1e3))
    def test_scale_invariant(self, scale):
        solver = HeatSolver(HeatGrid(lam=0.2, h=0.005, ell=0.05, n_x=200, n_t=100))
        layout = build_layout(solver, 7, LayoutParams(t0=0.2))
        y = trial_rng(8).normal(size=199)
        assert_array_equal(peak_detect(Observation(y=scale * y), layout),
                           peak_detect(Observation(y=y), layout))

    def test_missing_center_sensor(self, heat_solver):
        layout = build_layout(heat_solver, 7, LayoutParams(t0=0.2))
        narrowed = ChannelLayout(layout.t0, layout.pulse_centers, layout.center_indices[:-1],
                                 heat_solver.positions, heat_solver.domain)
        with pytest.raises(LayoutError):
            peak_detect(Observation(y=np.ones(6)), narrowed)


class TestBpDetect:
    def test_noiseless_recovery(self, bch15, nlse_layout, nlse_solver):
        for index in (0, 5, 77, 127):
            word = enumerate_codebook(bch15).words[index]
            obs = transmit(word, nlse_layout, nlse_solver, trial_rng(index), sigma=0.0)
            assert_array_equal(bp_detect(obs, nlse_layout, nlse_solver), word)

    def test_zero_field(self, nlse_layout, nlse_solver):
        obs = Observation(y=np.zeros(256, dtype=complex))
        assert_array_equal(bp_detect(obs, nlse_layout, nlse_solver), np.ones(15))

    def test_scale_invariant_at_zero_nonlinearity(self, bch15):
        solver = NlseSolver(NlseGrid(s_sign=1, n_sq=0.0, n_tau=256, tau_span=40.0, ell_xi=0.025, n_steps=20))
        layout = build_layout(solver, 15, LayoutParams(t0=1.0, dispersion_length=0.1))
        word = enumerate_codebook(bch15).words[3]
        obs = transmit(word, layout, solver, trial_rng(2), sigma=0.2)
        scaled = Observation(y=7.5 * obs.y)
        assert_array_equal(bp_detect(scaled, layout, solver), bp_detect(obs, layout, solver))

    def test_heat_channel_rejected(self, layout, heat_solver):
        with pytest.raises(PdecodeError):
            bp_detect(Observation(y=np.zeros(199)), layout, heat_solver)


@pytest.mark.slow
def test_gf_beats_peak_and_tracks_ml(hamming, layout, heat_solver):
    from pdecode.channel import forward_map
    from pdecode.codes import codebook_images, ml_decode

    book = enumerate_codebook(hamming)
    images = codebook_images(book, forward_map(layout, heat_solver))
    params = GfDecoderParams(eta=0.1, gamma=0.1)
    errors = {"gf": 0, "peak": 0, "ml": 0}
    trials = 200
    for trial in range(trials):
        rng = trial_rng(99, trial)
        word = book.words[rng.integers(len(book))]
        obs = transmit(word, layout, heat_solver, rng, sigma=0.02)
        errors["gf"] += int((gf_decode(obs, layout, heat_solver, hamming, params, rng).estimate != word).any())
        errors["peak"] += int((peak_detect(obs, layout) != word).any())
        errors["ml"] += int((ml_decode(obs.y, None, book, images) != word).any())
    p = errors["ml"] / trials
    assert errors["gf"] <= errors["ml"] + 3 * np.sqrt(trials * p * (1 - p)) + 1
    assert errors["gf"] < errors["peak"]
