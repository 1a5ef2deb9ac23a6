import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import sincount as sc
from sincount.errors import DegenerateStatsError, ValidationError
from sincount.likelihood import FrequencyPlan
from sincount.signal_model import clean_signal

# Fourier frequency: sin/cos sums vanish exactly, so closed forms are exact
W13 = 2 * math.pi * 13 / 64


def one_tone_scenario(phase=0.0, amplitude=1.0, extra=1):
    comp = sc.SinusoidComponent(amplitude=amplitude, frequency=W13,
                                phase=phase, band=sc.default_band(W13, 64))
    extras = tuple(
        sc.CandidateTemplate(frequency=W13 + 2 * math.pi * (k + 2) / 64,
                             band=sc.default_band(
                                 W13 + 2 * math.pi * (k + 2) / 64, 64))
        for k in range(extra))
    return sc.Scenario(components=(comp,), noise_level=1.0, n_samples=64,
                       max_order=1 + extra, extra_candidates=extras)


def test_basis_ordering_sine_before_cosine():
    scen = one_tone_scenario(phase=0.0, extra=0)
    obs = sc.Observation(samples=clean_signal(scen), seed=0)
    stats = sc.sufficient_stats(obs, [W13], scen)
    # cos tone: the sine projection (first slot coordinate) vanishes,
    # the cosine projection equals N_s/2
    assert stats.x_vec[0] == pytest.approx(0.0, abs=1e-9)
    assert stats.x_vec[1] == pytest.approx(32.0, rel=1e-12)
    np.testing.assert_allclose(stats.cov, 32.0 * np.eye(2), atol=1e-9)


def test_amp_phase_mle_recovers_parameters():
    scen = one_tone_scenario(phase=1.25, amplitude=1.7, extra=0)
    obs = sc.Observation(samples=clean_signal(scen), seed=0)
    stats = sc.sufficient_stats(obs, [W13], scen)
    _, amps, phases = sc.amp_phase_mle(stats)
    assert amps[0] == pytest.approx(1.7, rel=1e-10)
    assert phases[0] == pytest.approx(1.25, abs=1e-10)


def test_noise_level_mle_formula():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(64)
    obs = sc.Observation(samples=x, seed=0)
    got = sc.noise_level_mle(obs, np.zeros(64))
    assert got == pytest.approx(2 * math.pi * np.sum(x**2) / 64, rel=1e-12)


def test_profile_loglik_empty_model():
    assert sc.profile_loglik(None) == 0.0


def test_profile_loglik_noise_scaling(scen_m4):
    obs = sc.synthesize(scen_m4, 9)
    doc = sc.scenario_to_dict(scen_m4)
    doc["noise_level"] = 2.0
    loud = sc.scenario_from_dict(doc)
    stats_known = sc.sufficient_stats(obs, scen_m4.all_frequencies, loud)
    l_known = sc.profile_loglik(stats_known)
    l_free = sc.profile_loglik(stats_known, noise_known=False)
    # unknown-noise profile drops the 1/sigma0^2 factor
    assert l_free == pytest.approx(l_known * 4.0, rel=1e-12)


def test_increments_telescope_to_profile(scen_m4):
    obs = sc.synthesize(scen_m4, 17)
    stats = sc.sufficient_stats(obs, scen_m4.all_frequencies, scen_m4)
    l, v = sc.loglik_increments(stats)
    assert l.shape == (10,)
    np.testing.assert_allclose(v, l[0::2] ** 2 + l[1::2] ** 2, rtol=1e-12)
    assert 0.5 * np.sum(v) == pytest.approx(sc.profile_loglik(stats),
                                            rel=1e-9)
    # leading partial sums equal the lower-order profile likelihoods
    for nu in range(1, 6):
        sub = sc.sufficient_stats(obs, scen_m4.all_frequencies[:nu], scen_m4)
        assert 0.5 * np.sum(v[:nu]) == pytest.approx(
            sc.profile_loglik(sub), rel=1e-9)


def test_frequency_plan_matches_stats_path(scen_m4):
    plan = FrequencyPlan.build(scen_m4, scen_m4.all_frequencies)
    rows = np.stack([sc.synthesize(scen_m4, s).samples for s in range(8)])
    batch = plan.logliks_batch(rows)
    for k in range(8):
        obs = sc.Observation(samples=rows[k], seed=k)
        stats = sc.sufficient_stats(obs, scen_m4.all_frequencies, scen_m4)
        _, v = sc.loglik_increments(stats)
        np.testing.assert_allclose(batch[k], 0.5 * np.cumsum(v), rtol=1e-9)


def test_degenerate_frequencies_raise():
    comp = sc.SinusoidComponent(amplitude=1.0, frequency=W13, phase=0.0,
                                band=(W13 - 0.3, W13 + 0.3))
    extra = sc.CandidateTemplate(frequency=W13 + 0.1,
                                 band=(W13 - 0.3, W13 + 0.3))
    scen = sc.Scenario(components=(comp,), noise_level=1.0, n_samples=64,
                       max_order=2, extra_candidates=(extra,))
    obs = sc.synthesize(scen, 1)
    with pytest.raises(DegenerateStatsError) as info:
        sc.sufficient_stats(obs, [W13, W13 + 1e-12], scen)
    assert info.value.pair == (1, 2)


def test_out_of_band_frequency_rejected(scen_m4):
    obs = sc.synthesize(scen_m4, 1)
    freqs = np.array(scen_m4.all_frequencies)
    freqs[2] += 1.0
    with pytest.raises(ValidationError):
        sc.sufficient_stats(obs, freqs, scen_m4)


def test_bl_frequency_rules(scen_m4):
    bands = scen_m4.bands
    centers = sc.bl_frequencies(bands, "center")
    np.testing.assert_allclose(
        centers, [(lo + hi) / 2 for lo, hi in bands], rtol=1e-12)
    nominal = np.array(scen_m4.all_frequencies)
    offset = sc.bl_frequencies(bands, "offset", nominal=nominal, delta=1e-3)
    np.testing.assert_allclose(offset, nominal + 1e-3, rtol=1e-12)
    fixed = sc.bl_frequencies(bands, "fixed", values=nominal)
    np.testing.assert_allclose(fixed, nominal, rtol=1e-12)
    with pytest.raises(ValidationError):
        sc.bl_frequencies(bands, "fixed", values=nominal + 1.0)
    with pytest.raises(ValidationError):
        sc.bl_frequencies(bands, "no-such-rule")


def test_ml_search_finds_strong_tone():
    scen = one_tone_scenario(amplitude=20.0, extra=1)
    obs = sc.synthesize(scen, 5)
    freqs, increments = sc.likelihood.ml_search_increments(obs, 2, scen)
    assert abs(freqs[0] - W13) < 1e-3
    assert increments[0] > increments[1]
    # found increments are at least the nominal-frequency ones
    stats = sc.sufficient_stats(obs, scen.all_frequencies, scen)
    _, v_nominal = sc.loglik_increments(stats)
    assert increments[0] >= v_nominal[0] - 1e-9


def test_approach_labels_and_frequencies(scen_m4):
    assert sc.KNOWN_FREQ.label == "known"
    assert sc.Bl(0.001).label == "bl(0.001)"
    assert sc.Ml().label == "ml"
    assert sc.Ml().params_per_signal == 3
    assert sc.Bl(0.0).params_per_signal == 2
    np.testing.assert_allclose(
        sc.approach_frequencies(scen_m4, sc.Bl(0.002)),
        np.asarray(scen_m4.all_frequencies) + 0.002, rtol=1e-12)


def test_observation_logliks_known_equals_plan(scen_m4):
    obs = sc.synthesize(scen_m4, 23)
    lls, incs, freqs = sc.observation_logliks(obs, scen_m4, sc.KNOWN_FREQ)
    plan = FrequencyPlan.build(scen_m4, scen_m4.all_frequencies)
    np.testing.assert_allclose(lls, plan.logliks_batch(obs.samples)[0],
                               rtol=1e-12)
    np.testing.assert_allclose(freqs, scen_m4.all_frequencies, rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_increment_properties(seed):
    scen = sc.standard_scenario(0.0)
    obs = sc.synthesize(scen, seed)
    lls, incs, _ = sc.observation_logliks(obs, scen, sc.KNOWN_FREQ)
    assert np.all(incs >= 0)
    assert np.all(np.diff(lls) >= -1e-9)
    assert lls[0] >= -1e-9
