"""Ground-truth signal description and synthesis of noisy observations.

The observed data are N_s real samples

    x(t) = sum_i a_i f_i(t) cos(w_i t - phi_i + Psi_i(t)) + sigma0 n(t),

t = 1..N_s, with n(t) iid standard Gaussian.  A Scenario bundles the true
components (first nu0 candidate slots) with templates for the remaining
candidate orders up to max_order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi


def _as_envelope(seq, n_samples, name):
    if seq is None:
        return None
    arr = np.asarray(seq, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != n_samples:
        raise ValidationError(
            f"{name} must be a 1-d sequence of length {n_samples}, got shape {arr.shape}"
        )
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def _check_band(band, frequency, label):
    lo, hi = float(band[0]), float(band[1])
    if not (lo < hi):
        raise ValidationError(f"{label}: band ({lo}, {hi}) is empty")
    if not (lo < frequency < hi):
        raise ValidationError(
            f"{label}: frequency {frequency} outside open band ({lo}, {hi})"
        )
    return (lo, hi)


@dataclass(frozen=True)
class SinusoidComponent:
    """One modulated sinusoid: amplitude, frequency (rad/sample), phase,
    a priori frequency band, and optional envelopes f_i(t), Psi_i(t).

    Envelopes default to None, meaning f = 1 and Psi = 0 (plain tone).
    """

    amplitude: float
    frequency: float
    phase: float
    band: tuple
    amplitude_envelope: np.ndarray | None = None
    phase_envelope: np.ndarray | None = None

    def __post_init__(self):
        if not (self.amplitude > 0) or not math.isfinite(self.amplitude):
            raise ValidationError(f"amplitude must be positive, got {self.amplitude}")
        if not (0.0 <= self.phase < TWO_PI):
            raise ValidationError(f"phase must lie in [0, 2*pi), got {self.phase}")
        object.__setattr__(self, "band", _check_band(self.band, self.frequency, "component"))


@dataclass(frozen=True)
class CandidateTemplate:
    """Frequency slot for a candidate order above nu0: nominal frequency,
    band, optional envelopes (None = plain tone)."""

    frequency: float
    band: tuple
    amplitude_envelope: np.ndarray | None = None
    phase_envelope: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "band", _check_band(self.band, self.frequency, "candidate"))


@dataclass(frozen=True)
class Observation:
    """Observed samples plus the noise seed that produced them."""

    samples: np.ndarray
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)


@dataclass(frozen=True)
class Scenario:
    """Full experiment description.

    components hold the nu0 true sinusoids; extra_candidates supply the
    nominal frequencies/bands for candidate orders nu0+1..max_order.
    noise_level = 0 is accepted as a noiseless override for tests.
    """

    components: tuple
    noise_level: float
    n_samples: int
    max_order: int
    noise_known: bool = True
    extra_candidates: tuple = ()

    def __post_init__(self):
        comps = tuple(self.components)
        extras = tuple(self.extra_candidates)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "extra_candidates", extras)
        if len(comps) < 1:
            raise ValidationError("scenario needs at least one component")
        if not all(isinstance(c, SinusoidComponent) for c in comps):
            raise ValidationError("components must be SinusoidComponent instances")
        if self.noise_level < 0 or not math.isfinite(self.noise_level):
            raise ValidationError(f"noise_level must be >= 0, got {self.noise_level}")
        if self.max_order < len(comps):
            raise ValidationError(
                f"max_order {self.max_order} below component count {len(comps)}"
            )
        if self.n_samples < 2 * self.max_order:
            raise ValidationError(
                f"n_samples {self.n_samples} < 2*max_order {2 * self.max_order}"
            )
        if len(extras) != self.max_order - len(comps):
            raise ValidationError(
                f"need {self.max_order - len(comps)} extra candidate templates, got {len(extras)}"
            )
        for obj in comps + extras:
            for env in (obj.amplitude_envelope, obj.phase_envelope):
                if env is not None and env.shape[0] != self.n_samples:
                    raise ValidationError(
                        f"envelope length {env.shape[0]} != n_samples {self.n_samples}"
                    )

    @property
    def nu0(self):
        return len(self.components)

    @property
    def true_frequencies(self):
        return np.array([c.frequency for c in self.components])

    def candidate_slots(self):
        """Components followed by extra candidates: one slot per order 1..max_order."""
        return self.components + self.extra_candidates

    @property
    def all_frequencies(self):
        return np.array([s.frequency for s in self.candidate_slots()])

    @property
    def bands(self):
        return [s.band for s in self.candidate_slots()]


def default_band(frequency, n_samples):
    """A priori band centered on the nominal frequency, width 2*pi/N_s."""
    half = math.pi / n_samples
    return (frequency - half, frequency + half)


def time_grid(n_samples):
    """Sample times t = 1..N_s as floats."""
    return np.arange(1, n_samples + 1, dtype=float)


def slot_waveforms(slot, frequency, n_samples):
    """Unit-amplitude quadrature pair for a candidate slot at a frequency.

    Returns (c, s) with c(t) = f(t) cos(w t + Psi(t)), s(t) = f(t) sin(w t + Psi(t)).
    """
    t = time_grid(n_samples)
    arg = frequency * t
    if slot.phase_envelope is not None:
        arg = arg + slot.phase_envelope
    c = np.cos(arg)
    s = np.sin(arg)
    if slot.amplitude_envelope is not None:
        c = c * slot.amplitude_envelope
        s = s * slot.amplitude_envelope
    return c, s


def component_waveform(component, n_samples):
    """Noiseless waveform a f(t) cos(w t - phi + Psi(t)) of one component."""
    t = time_grid(n_samples)
    arg = component.frequency * t - component.phase
    if component.phase_envelope is not None:
        arg = arg + component.phase_envelope
    w = component.amplitude * np.cos(arg)
    if component.amplitude_envelope is not None:
        w = w * component.amplitude_envelope
    return w


def clean_signal(scenario):
    """Sum of all component waveforms (no noise)."""
    out = np.zeros(scenario.n_samples)
    for comp in scenario.components:
        out += component_waveform(comp, scenario.n_samples)
    return out


def synthesize(scenario, seed):
    """Draw one observation: clean signal plus sigma0 times white Gaussian noise.

    The generator is counter-based (Philox keyed by the seed), so draws are
    reproducible and independent across seeds regardless of evaluation order.
    """
    if seed < 0:
        raise ValidationError(f"seed must be a nonnegative integer, got {seed}")
    samples = clean_signal(scenario)
    if scenario.noise_level > 0:
        rng = np.random.Generator(np.random.Philox(key=seed))
        samples = samples + scenario.noise_level * rng.standard_normal(scenario.n_samples)
    return Observation(samples=samples, seed=int(seed))


def snr_db(component, noise_level):
    """SNR in dB: 10 log10(a^2 / (2 sigma0^2))."""
    if not (noise_level > 0):
        raise ValidationError(f"noise_level must be positive, got {noise_level}")
    return 10.0 * math.log10(component.amplitude**2 / (2.0 * noise_level**2))


def amplitude_for_snr_db(value_db, noise_level):
    """Amplitude giving the requested SNR: a = sigma0 * sqrt(2) * 10^(dB/20)."""
    return noise_level * math.sqrt(2.0) * 10.0 ** (value_db / 20.0)


def signal_gram(components, n_samples):
    """Pairwise inner products of the full component waveforms.

    Diagonal entries are the signal energies E_i = sum_t s_i(t)^2.
    """
    for comp in components:
        for env in (comp.amplitude_envelope, comp.phase_envelope):
            if env is not None and env.shape[0] != n_samples:
                raise ValidationError(
                    f"envelope length {env.shape[0]} != n_samples {n_samples}"
                )
    waves = np.column_stack([component_waveform(c, n_samples) for c in components])
    return waves.T @ waves


def max_offdiag_ratio(gram):
    """max |G_ij| / sqrt(G_ii G_jj) over i != j; 0 for a 1x1 matrix."""
    g = np.asarray(gram, dtype=float)
    n = g.shape[0]
    if n == 1:
        return 0.0
    d = np.sqrt(np.diag(g))
    scaled = np.abs(g) / np.outer(d, d)
    np.fill_diagonal(scaled, 0.0)
    return float(scaled.max())


_STANDARD_PHASES = (0.0, -math.pi / 8, -math.pi / 6)


def standard_scenario(snr_value_db, nu0=3, max_order=5, n_samples=64,
                      noise_level=1.0, noise_known=True):
    """Equal-amplitude test scenario on a fractional-Fourier comb.

    Candidate frequencies are w_i = 2*pi*(0.2 + (i-1)/N_s) for i = 1..max_order;
    the first nu0 slots carry signals with phases (0, -pi/8, -pi/6, 0, ...) and a
    common amplitude set by snr_value_db; every slot gets the default band.
    """
    if nu0 < 1 or max_order < nu0:
        raise ValidationError(f"need 1 <= nu0 <= max_order, got {nu0}, {max_order}")
    amp = amplitude_for_snr_db(snr_value_db, noise_level) if noise_level > 0 else 1.0
    comps = []
    extras = []
    for i in range(max_order):
        freq = TWO_PI * (0.2 + i / n_samples)
        band = default_band(freq, n_samples)
        if i < nu0:
            phase = _STANDARD_PHASES[i] if i < len(_STANDARD_PHASES) else 0.0
            comps.append(SinusoidComponent(
                amplitude=amp, frequency=freq, phase=phase % TWO_PI, band=band))
        else:
            extras.append(CandidateTemplate(frequency=freq, band=band))
    return Scenario(
        components=tuple(comps),
        noise_level=noise_level,
        n_samples=n_samples,
        max_order=max_order,
        noise_known=noise_known,
        extra_candidates=tuple(extras),
    )


def with_snr_db(scenario, value_db):
    """Copy of the scenario with every component's amplitude set to the SNR."""
    amp = amplitude_for_snr_db(value_db, scenario.noise_level)
    comps = tuple(replace(c, amplitude=amp) for c in scenario.components)
    return replace(scenario, components=comps)


def _env_to_list(env):
    return None if env is None else [float(v) for v in env]


def scenario_to_dict(scenario):
    """JSON-ready dict; inverse of scenario_from_dict."""
    return {
        "n_samples": scenario.n_samples,
        "noise_level": scenario.noise_level,
        "max_order": scenario.max_order,
        "noise_known": scenario.noise_known,
        "components": [
            {
                "amplitude": c.amplitude,
                "frequency": c.frequency,
                "phase": c.phase,
                "band": [c.band[0], c.band[1]],
                "amplitude_envelope": _env_to_list(c.amplitude_envelope),
                "phase_envelope": _env_to_list(c.phase_envelope),
            }
            for c in scenario.components
        ],
        "extra_candidates": [
            {
                "frequency": c.frequency,
                "band": [c.band[0], c.band[1]],
                "amplitude_envelope": _env_to_list(c.amplitude_envelope),
                "phase_envelope": _env_to_list(c.phase_envelope),
            }
            for c in scenario.extra_candidates
        ],
    }


def scenario_from_dict(doc):
    try:
        comps = tuple(
            SinusoidComponent(
                amplitude=float(c["amplitude"]),
                frequency=float(c["frequency"]),
                phase=float(c["phase"]),
                band=tuple(c["band"]),
                amplitude_envelope=_as_envelope(
                    c.get("amplitude_envelope"), int(doc["n_samples"]), "amplitude_envelope"),
                phase_envelope=_as_envelope(
                    c.get("phase_envelope"), int(doc["n_samples"]), "phase_envelope"),
            )
            for c in doc["components"]
        )
        extras = tuple(
            CandidateTemplate(
                frequency=float(c["frequency"]),
                band=tuple(c["band"]),
                amplitude_envelope=_as_envelope(
                    c.get("amplitude_envelope"), int(doc["n_samples"]), "amplitude_envelope"),
                phase_envelope=_as_envelope(
                    c.get("phase_envelope"), int(doc["n_samples"]), "phase_envelope"),
            )
            for c in doc.get("extra_candidates", [])
        )
    except KeyError as exc:
        raise ValidationError(f"scenario document missing field {exc}") from exc
    return Scenario(
        components=comps,
        noise_level=float(doc["noise_level"]),
        n_samples=int(doc["n_samples"]),
        max_order=int(doc["max_order"]),
        noise_known=bool(doc.get("noise_known", True)),
        extra_candidates=extras,
    )
