"""Sufficient statistics and profile log-likelihoods per candidate order.

For a candidate order nu the model is linear in the quadrature amplitudes
once frequencies are fixed: the sufficient statistics are the projections
X of the data onto the 2*nu basis functions f_i(t){sin,cos}(w_i t + Psi_i(t))
together with their Gram matrix C.  Columns interleave as
(sin_1, cos_1, sin_2, cos_2, ...), matching the odd/sine, even/cosine
convention of the quadrature amplitude vector.

The residual recursion (Cholesky forward solve) turns X into per-index
statistics l whose squares sum pairwise to the likelihood increments V_i,
so every candidate order's profile log-likelihood is available from one
full-order factorization: L_nu = sum_{i<=nu} V_i / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky as _cholesky
from scipy.linalg import solve_triangular
from scipy.optimize import minimize_scalar

from .errors import DegenerateStatsError, ValidationError
from .signal_model import slot_waveforms, time_grid

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class SufficientStats:
    """Projections X, their Gram matrix C, and the context that built them."""

    order: int
    x_vec: np.ndarray
    cov: np.ndarray
    frequencies: np.ndarray
    sigma0: float
    noise_known: bool = True

    def __post_init__(self):
        for name in ("x_vec", "cov", "frequencies"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.x_vec.shape[0] != 2 * self.order or self.cov.shape != (2 * self.order,) * 2:
            raise ValidationError("stats dimensions do not match order")


def basis_matrix(scenario, frequencies):
    """Design matrix (N_s x 2*nu) with interleaved sine/cosine columns."""
    slots = scenario.candidate_slots()
    if len(frequencies) > len(slots):
        raise ValidationError(
            f"{len(frequencies)} frequencies exceed max_order {scenario.max_order}")
    cols = []
    for i, freq in enumerate(frequencies):
        c, s = slot_waveforms(slots[i], float(freq), scenario.n_samples)
        cols.append(s)
        cols.append(c)
    return np.column_stack(cols)


def _check_in_band(scenario, frequencies):
    bands = scenario.bands
    for i, freq in enumerate(frequencies):
        lo, hi = bands[i]
        if not (lo < freq < hi):
            raise ValidationError(
                f"frequency {freq} for order slot {i + 1} outside band ({lo}, {hi})")


def _chol_or_degenerate(gram, frequencies):
    try:
        chol = _cholesky(gram, lower=True)
    except np.linalg.LinAlgError:
        chol = None
    if chol is not None:
        diag = np.diag(chol)
        if diag.min() > 0 and (diag.max() / diag.min()) ** 2 < _COND_LIMIT:
            return chol
    freqs = np.asarray(frequencies, dtype=float)
    pair = None
    if freqs.size >= 2:
        ii, jj = np.triu_indices(freqs.size, k=1)
        k = int(np.argmin(np.abs(freqs[ii] - freqs[jj])))
        pair = (int(ii[k]) + 1, int(jj[k]) + 1)
    raise DegenerateStatsError(
        f"covariance is numerically singular; closest frequency pair: {pair}",
        pair=pair)


def sufficient_stats(observation, frequencies, scenario):
    """Build the statistics (X, C) for the given per-slot frequencies."""
    frequencies = np.asarray(frequencies, dtype=float)
    _check_in_band(scenario, frequencies)
    basis = basis_matrix(scenario, frequencies)
    gram = basis.T @ basis
    _chol_or_degenerate(gram, frequencies)
    x_vec = basis.T @ observation.samples
    return SufficientStats(
        order=len(frequencies),
        x_vec=x_vec,
        cov=gram,
        frequencies=frequencies,
        sigma0=scenario.noise_level,
        noise_known=scenario.noise_known,
    )


def amp_phase_mle(stats):
    """Quadrature-amplitude MLE Q = C^{-1} X and per-signal (a, phi).

    Returns (q_hat, amplitudes, phases) with phases mapped to [0, 2*pi).
    """
    try:
        q_hat = np.linalg.solve(stats.cov, stats.x_vec)
    except np.linalg.LinAlgError as exc:
        raise DegenerateStatsError("covariance is singular") from exc
    q_sin = q_hat[0::2]
    q_cos = q_hat[1::2]
    amps = np.hypot(q_sin, q_cos)
    phases = np.mod(np.arctan2(q_sin, q_cos), 2.0 * math.pi)
    return q_hat, amps, phases


def noise_level_mle(observation, fitted_signal):
    """Residual-power statistic (sum (x - s)^2 / 2) / (N_s / (4 pi)).

    The unusual normalization makes the value concentrate near 2 pi sigma0^2
    for pure noise; downstream likelihoods are invariant to it, so it is
    reported as-is and never used as a calibrated variance.
    """
    x = np.asarray(observation.samples, dtype=float)
    s = np.asarray(fitted_signal, dtype=float)
    if x.shape != s.shape:
        raise ValidationError("fitted signal length does not match observation")
    n = x.shape[0]
    return float((np.sum((x - s) ** 2) / 2.0) / (n / (4.0 * math.pi)))


def profile_loglik(stats, noise_known=None):
    """Profile log-likelihood L_nu = X^T C^{-1} X / (2 sigma0^2).

    The unknown-noise variant drops the sigma0 scaling (the sigma-free
    quadratic form).  stats=None encodes the empty model: L_0 = 0.
    """
    if stats is None or stats.order == 0:
        return 0.0
    if noise_known is None:
        noise_known = stats.noise_known
    try:
        sol = np.linalg.solve(stats.cov, stats.x_vec)
    except np.linalg.LinAlgError as exc:
        raise DegenerateStatsError("covariance is singular") from exc
    quad = float(stats.x_vec @ sol)
    if noise_known:
        return quad / (2.0 * stats.sigma0**2)
    return quad / 2.0


def loglik_increments(stats):
    """Residual statistics l and increments V_i from one full-order solve.

    Returns (l, v): l has length 2*order (interleaved sine/cosine residuals,
    unit variance under the noise model), v[i] = l[2i]^2 + l[2i+1]^2, and
    L_nu = sum_{i<=nu} v[i] / 2 for every nu up to stats.order.
    """
    chol = _chol_or_degenerate(stats.cov, stats.frequencies)
    scale = stats.sigma0 if stats.noise_known else 1.0
    if scale <= 0:
        scale = 1.0
    l = solve_triangular(chol, stats.x_vec, lower=True) / scale
    v = l[0::2] ** 2 + l[1::2] ** 2
    return l, v


@dataclass(frozen=True)
class FrequencyPlan:
    """Precomputed design for fixed frequencies, for batched evaluation."""

    scenario: object
    frequencies: np.ndarray
    basis: np.ndarray
    gram: np.ndarray
    chol: np.ndarray

    @classmethod
    def build(cls, scenario, frequencies):
        frequencies = np.asarray(frequencies, dtype=float)
        _check_in_band(scenario, frequencies)
        basis = basis_matrix(scenario, frequencies)
        gram = basis.T @ basis
        chol = _chol_or_degenerate(gram, frequencies)
        return cls(scenario=scenario, frequencies=frequencies, basis=basis,
                   gram=gram, chol=chol)

    def residuals_batch(self, samples):
        """l statistics for a batch of observations (rows)."""
        arr = np.atleast_2d(np.asarray(samples, dtype=float))
        x = arr @ self.basis
        l = solve_triangular(self.chol, x.T, lower=True).T
        scale = self.scenario.noise_level if self.scenario.noise_known else 1.0
        if scale > 0:
            l = l / scale
        return l

    def increments_batch(self, samples):
        """V_i for a batch: shape (n_trials, max order of the plan)."""
        l = self.residuals_batch(samples)
        return l[:, 0::2] ** 2 + l[:, 1::2] ** 2

    def logliks_batch(self, samples):
        """L_nu for nu = 1..order, per trial: half the running sum of V."""
        return 0.5 * np.cumsum(self.increments_batch(samples), axis=1)


def bl_frequencies(bands, rule, values=None, delta=None, nominal=None):
    """Blind (a priori) frequency choices for the quasilikelihood approach.

    rule = "center": band midpoints; "fixed": the given values;
    "offset": nominal + delta per slot (robustness sweeps).
    """
    bands = list(bands)
    if rule == "center":
        out = np.array([(lo + hi) / 2.0 for lo, hi in bands])
    elif rule == "fixed":
        if values is None:
            raise ValidationError("rule 'fixed' needs values")
        out = np.asarray(values, dtype=float)
        if out.shape[0] != len(bands):
            raise ValidationError("values length does not match bands")
    elif rule == "offset":
        if nominal is None or delta is None:
            raise ValidationError("rule 'offset' needs nominal frequencies and delta")
        out = np.asarray(nominal, dtype=float) + float(delta)
    else:
        raise ValidationError(f"unknown rule {rule!r}")
    for freq, (lo, hi) in zip(out, bands):
        if not (lo < freq < hi):
            raise ValidationError(f"frequency {freq} outside band ({lo}, {hi})")
    return out


def _grid_quadrature_increment(x, slot, omegas, q_basis, sigma_sq):
    """Incremental statistic V(omega) over an array of frequencies.

    q_basis holds orthonormal columns of the already-fitted subspace; the
    candidate (sin, cos) pair is residualized against it and V is the
    2x2-solved quadratic form, scaled by sigma_sq when the noise is known.
    """
    t = time_grid(x.shape[0])
    arg = np.outer(omegas, t)
    if slot.phase_envelope is not None:
        arg = arg + slot.phase_envelope[None, :]
    sines = np.sin(arg)
    cosines = np.cos(arg)
    if slot.amplitude_envelope is not None:
        sines = sines * slot.amplitude_envelope[None, :]
        cosines = cosines * slot.amplitude_envelope[None, :]
    if q_basis.shape[1]:
        sines = sines - (sines @ q_basis) @ q_basis.T
        cosines = cosines - (cosines @ q_basis) @ q_basis.T
    g11 = np.einsum("ij,ij->i", sines, sines)
    g22 = np.einsum("ij,ij->i", cosines, cosines)
    g12 = np.einsum("ij,ij->i", sines, cosines)
    p1 = sines @ x
    p2 = cosines @ x
    det = g11 * g22 - g12**2
    det = np.maximum(det, 1e-30)
    quad = (g22 * p1**2 - 2.0 * g12 * p1 * p2 + g11 * p2**2) / det
    return quad / sigma_sq


def _orthonormal_extend(q_basis, slot, omega, n_samples):
    c, s = slot_waveforms(slot, float(omega), n_samples)
    cols = []
    for vec in (s, c):
        v = vec.copy()
        if q_basis.shape[1]:
            v = v - q_basis @ (q_basis.T @ v)
        for prev in cols:
            v = v - prev * (prev @ v)
        norm = np.linalg.norm(v)
        if norm < 1e-9 * np.linalg.norm(vec):
            raise DegenerateStatsError(
                f"candidate at frequency {omega} is linearly dependent on the fit")
        cols.append(v / norm)
    return np.column_stack([q_basis] + [c[:, None] for c in cols])


def ml_search_increments(observation, order, scenario, grid_points=256,
                         refine_tol=1e-6, bands=None):
    """Greedy sequential ML frequency search.

    For each slot in turn the incremental statistic V is maximized over a
    grid in the slot's band and refined to refine_tol; previously found
    frequencies stay fixed.  Returns (frequencies, increments).
    """
    if order < 1:
        raise ValidationError(f"order must be >= 1, got {order}")
    slots = scenario.candidate_slots()
    if bands is None:
        bands = scenario.bands
    bands = list(bands)
    if order > len(bands):
        raise ValidationError(f"order {order} exceeds available bands {len(bands)}")
    x = np.asarray(getattr(observation, "samples", observation), dtype=float)
    sigma_sq = scenario.noise_level**2 if (scenario.noise_known and scenario.noise_level > 0) else 1.0
    q_basis = np.zeros((scenario.n_samples, 0))
    freqs = np.zeros(order)
    incs = np.zeros(order)
    for i in range(order):
        lo, hi = bands[i]
        if not (lo < hi):
            raise ValidationError(f"band {i + 1} is empty")
        pad = (hi - lo) * 1e-9
        grid = np.linspace(lo + pad, hi - pad, grid_points)
        vals = _grid_quadrature_increment(x, slots[i], grid, q_basis, sigma_sq)
        j = int(np.argmax(vals))
        blo = grid[max(j - 1, 0)]
        bhi = grid[min(j + 1, grid_points - 1)]

        def neg_v(w, _slot=slots[i]):
            return -_grid_quadrature_increment(
                x, _slot, np.array([w]), q_basis, sigma_sq)[0]

        res = minimize_scalar(neg_v, bounds=(blo, bhi), method="bounded",
                              options={"xatol": refine_tol})
        if res.fun <= -vals[j]:
            freqs[i], incs[i] = float(res.x), float(-res.fun)
        else:
            freqs[i], incs[i] = float(grid[j]), float(vals[j])
        q_basis = _orthonormal_extend(q_basis, slots[i], freqs[i], scenario.n_samples)
    return freqs, incs


def ml_frequency_search(observation, order, bands, scenario, grid_points=256,
                        refine_tol=1e-6):
    """Frequencies maximizing the incremental statistics (greedy, refined)."""
    freqs, _ = ml_search_increments(
        observation, order, scenario, grid_points=grid_points,
        refine_tol=refine_tol, bands=bands)
    return freqs


@dataclass(frozen=True)
class Ml:
    """Maximum-likelihood approach: per-order greedy frequency search."""

    grid_points: int = 256
    refine_tol: float = 1e-6

    @property
    def label(self):
        return "ml"

    @property
    def params_per_signal(self):
        return 3


@dataclass(frozen=True)
class Bl:
    """Blind/quasilikelihood approach: fixed frequencies.

    delta_omega offsets the nominal candidate frequencies (0 = known
    frequencies); explicit frequencies override the offset rule.
    """

    delta_omega: float = 0.0
    frequencies: tuple | None = None

    @property
    def label(self):
        if self.frequencies is not None:
            return "bl-fixed"
        return "known" if self.delta_omega == 0.0 else f"bl({self.delta_omega:g})"

    @property
    def params_per_signal(self):
        return 2


KNOWN_FREQ = Bl(delta_omega=0.0)


def approach_frequencies(scenario, approach):
    """Candidate frequencies of a Bl approach for all slots."""
    if approach.frequencies is not None:
        return bl_frequencies(scenario.bands, "fixed", values=approach.frequencies)
    return bl_frequencies(scenario.bands, "offset",
                          nominal=scenario.all_frequencies,
                          delta=approach.delta_omega)


def observation_logliks(observation, scenario, approach):
    """Profile log-likelihoods L_1..L_maxorder under the given approach.

    Returns (logliks, increments, frequencies).
    """
    if isinstance(approach, Ml):
        freqs, incs = ml_search_increments(
            observation, scenario.max_order, scenario,
            grid_points=approach.grid_points, refine_tol=approach.refine_tol)
        return 0.5 * np.cumsum(incs), incs, freqs
    freqs = approach_frequencies(scenario, approach)
    stats = sufficient_stats(observation, freqs, scenario)
    _, incs = loglik_increments(stats)
    return 0.5 * np.cumsum(incs), incs, freqs
