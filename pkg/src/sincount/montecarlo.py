"""Seeded Monte Carlo estimation of selection error probabilities.

Trials draw observations with per-trial seeds split from a master seed,
compute one log-likelihood ladder per approach, and evaluate every
criterion on the same statistics, so comparisons between criteria are
paired.  Aggregates are identical for any chunking or worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .criteria import argmin_order, decision_values
from .errors import DegenerateStatsError, ValidationError
from .likelihood import Bl, Ml, FrequencyPlan, approach_frequencies, ml_search_increments
from .signal_model import clean_signal, scenario_to_dict

_CHUNK = 65536
_Z95 = 1.959963984540054


def trial_seed(master_seed, index):
    """Noise seed of one trial, split from the master seed.

    Uses the seed-sequence hash of (master_seed, index), so any trial can
    be regenerated in isolation and the assignment does not depend on how
    trials are batched or scheduled.
    """
    ss = np.random.SeedSequence((int(master_seed), int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def _noise_rows(scenario, master_seed, start, count):
    out = np.empty((count, scenario.n_samples))
    for k in range(count):
        key = trial_seed(master_seed, start + k)
        rng = np.random.Generator(np.random.Philox(key=key))
        out[k] = rng.standard_normal(scenario.n_samples)
    return out


def batch_samples(scenario, master_seed, start, count):
    """Observations for trials start..start+count-1, one per row.

    Row k equals synthesize(scenario, trial_seed(master_seed, start + k)).
    """
    s0 = clean_signal(scenario)
    if scenario.noise_level == 0:
        return np.tile(s0, (count, 1))
    return s0[None, :] + scenario.noise_level * _noise_rows(
        scenario, master_seed, start, count)


def collect_logliks(scenario, approach, trials, master_seed):
    """Log-likelihood ladders L_1..L_N for all trials, shape (trials, N).

    BL/known approaches run fully vectorized; the ML approach runs the
    greedy frequency search per trial.  Trials whose statistics degenerate
    (ML only) come back as NaN rows.
    """
    n_orders = scenario.max_order
    out = np.empty((trials, n_orders))
    if isinstance(approach, Bl):
        plan = FrequencyPlan.build(scenario, approach_frequencies(scenario, approach))
        for start in range(0, trials, _CHUNK):
            count = min(_CHUNK, trials - start)
            samples = batch_samples(scenario, master_seed, start, count)
            out[start:start + count] = plan.logliks_batch(samples)
        return out
    if not isinstance(approach, Ml):
        raise ValidationError("approach must be an Ml or Bl instance")
    for start in range(0, trials, _CHUNK):
        count = min(_CHUNK, trials - start)
        samples = batch_samples(scenario, master_seed, start, count)
        for k in range(count):
            try:
                _, incs = ml_search_increments(
                    samples[k], n_orders, scenario,
                    grid_points=approach.grid_points,
                    refine_tol=approach.refine_tol)
            except DegenerateStatsError:
                out[start + k] = np.nan
                continue
            out[start + k] = 0.5 * np.cumsum(incs)
    return out


def _wilson(p, n):
    if n == 0:
        return (0.0, 1.0)
    z2 = _Z95**2
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = _Z95 * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    return (max(center - half, 0.0), min(center + half, 1.0))


def _normal_ci(p, n):
    if n == 0:
        return (0.0, 1.0)
    half = _Z95 * math.sqrt(p * (1.0 - p) / n)
    return (max(p - half, 0.0), min(p + half, 1.0))


def scenario_fingerprint(scenario):
    doc = json.dumps(scenario_to_dict(scenario), sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class McReport:
    """Error-probability estimates of one criterion on one trial set."""

    criterion: object
    approach_label: str
    trials: int
    p_e: float
    p_e_ci: tuple
    p_e_wilson: tuple
    p_a: float
    p_a_ci: tuple
    p_a_wilson: tuple
    offsets: np.ndarray
    histogram: np.ndarray
    ratio_gt1_eq1: float
    master_seed: int
    degenerate: int
    degenerate_warning: bool
    scenario_key: str
    correct: np.ndarray = field(repr=False, default=None)
    abridged_correct: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        """JSON-ready summary (per-trial indicator arrays omitted)."""
        return {
            "criterion": getattr(self.criterion, "name", str(self.criterion)),
            "approach": self.approach_label,
            "trials": self.trials,
            "p_e": self.p_e,
            "p_e_ci": list(self.p_e_ci),
            "p_e_wilson": list(self.p_e_wilson),
            "p_a": self.p_a,
            "p_a_ci": list(self.p_a_ci),
            "p_a_wilson": list(self.p_a_wilson),
            "histogram": {int(o): int(c) for o, c in zip(self.offsets, self.histogram)},
            "ratio_gt1_eq1": None if math.isnan(self.ratio_gt1_eq1) else self.ratio_gt1_eq1,
            "master_seed": self.master_seed,
            "degenerate": self.degenerate,
            "degenerate_warning": self.degenerate_warning,
        }


def estimate(scenario, specs, approach, trials, master_seed):
    """Estimate p_e and p_a for each criterion over seeded trials.

    All criteria see the same log-likelihood ladders; p_e counts argmin
    mismatches, p_a the two-neighbor abridged event (single available
    neighbor at the boundary orders).
    """
    if trials < 100:
        raise ValidationError(f"need at least 100 trials, got {trials}")
    nu0, n_orders = scenario.nu0, scenario.max_order
    logliks = collect_logliks(scenario, approach, trials, master_seed)
    valid = ~np.isnan(logliks[:, 0])
    degenerate = int(trials - valid.sum())
    logliks = logliks[valid]
    n_eff = logliks.shape[0]
    if n_eff == 0:
        raise ValidationError("all trials degenerated; scenario is ill-posed")
    key = scenario_fingerprint(scenario)
    reports = []
    for spec in specs:
        values = decision_values(spec, logliks,
                                 params_per_signal=approach.params_per_signal)
        nu_hat = argmin_order(values)
        correct = nu_hat == nu0
        under = values[:, nu0 - 1] < values[:, nu0 - 2] if nu0 >= 2 else np.ones(n_eff, bool)
        over = values[:, nu0 - 1] <= values[:, nu0] if nu0 < n_orders else np.ones(n_eff, bool)
        abridged_correct = under & over
        p_e = 1.0 - float(np.mean(correct))
        p_a = 1.0 - float(np.mean(abridged_correct))
        counts = np.bincount(nu_hat, minlength=n_orders + 1)[1:]
        offsets = np.arange(1, n_orders + 1) - nu0
        n_eq1 = int(counts[np.abs(offsets) == 1].sum())
        n_gt1 = int(counts[np.abs(offsets) > 1].sum())
        ratio = n_gt1 / n_eq1 if n_eq1 > 0 else math.nan
        reports.append(McReport(
            criterion=spec,
            approach_label=approach.label,
            trials=n_eff,
            p_e=p_e,
            p_e_ci=_normal_ci(p_e, n_eff),
            p_e_wilson=_wilson(p_e, n_eff),
            p_a=p_a,
            p_a_ci=_normal_ci(p_a, n_eff),
            p_a_wilson=_wilson(p_a, n_eff),
            offsets=offsets,
            histogram=counts,
            ratio_gt1_eq1=ratio,
            master_seed=int(master_seed),
            degenerate=degenerate,
            degenerate_warning=degenerate > 0.01 * trials,
            scenario_key=key,
            correct=correct,
            abridged_correct=abridged_correct,
        ))
    return reports


@dataclass(frozen=True)
class PairedComparison:
    """McNemar-style paired significance record for two matched runs."""

    trials: int
    a_only_correct: int
    b_only_correct: int
    p_e_diff: float
    p_value: float


def paired_compare(report_a, report_b):
    """Paired test of p_e between two reports from the same trial set.

    Only the discordant trials (exactly one report correct) carry
    information; their split is tested against a fair coin.
    """
    for attr in ("trials", "master_seed", "scenario_key"):
        if getattr(report_a, attr) != getattr(report_b, attr):
            raise ValidationError(f"reports differ in {attr}; pairing is invalid")
    if report_a.correct is None or report_b.correct is None:
        raise ValidationError("reports lack per-trial indicators")
    a_only = int(np.sum(report_a.correct & ~report_b.correct))
    b_only = int(np.sum(report_b.correct & ~report_a.correct))
    n_disc = a_only + b_only
    p_value = 1.0 if n_disc == 0 else float(
        binomtest(a_only, n_disc, 0.5, alternative="two-sided").pvalue)
    return PairedComparison(
        trials=report_a.trials,
        a_only_correct=a_only,
        b_only_correct=b_only,
        p_e_diff=report_a.p_e - report_b.p_e,
        p_value=p_value,
    )
