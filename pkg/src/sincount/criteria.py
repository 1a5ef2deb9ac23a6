"""Decision functions and the argmin order-selection rule.

Each criterion maps the profile log-likelihoods L_1..L_N (with L_0 = 0)
to decision values R(1)..R(N); the selected order is the argmin, ties
broken toward the smallest order.  Candidate order 0 (no signal at all)
is not part of the decision grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SelectionError, ValidationError
from .likelihood import Bl, Ml, observation_logliks


def _resolve_kappa(kappa, params_per_signal):
    if kappa is not None:
        return float(kappa)
    return float(params_per_signal)


@dataclass(frozen=True)
class Aic:
    """R(nu) = -L_nu + 2*kappa*nu with kappa = free parameters per signal."""

    kappa: float | None = None

    name = "aic"

    def threshold(self, params_per_signal=2):
        """Increment threshold 4*kappa of the abridged event (GIC at upsilon 2)."""
        return 4.0 * _resolve_kappa(self.kappa, params_per_signal)

    def values(self, logliks, params_per_signal=2):
        logliks = np.asarray(logliks, dtype=float)
        nus = np.arange(1, logliks.shape[-1] + 1, dtype=float)
        return -logliks + 2.0 * _resolve_kappa(self.kappa, params_per_signal) * nus


@dataclass(frozen=True)
class Gic:
    """R(nu) = -L_nu + upsilon*kappa*nu; generalizes AIC (upsilon = 2)."""

    upsilon: float = 2.0
    kappa: float | None = None

    name = "gic"

    def __post_init__(self):
        if not np.isfinite(self.upsilon):
            raise ValidationError("upsilon must be finite")

    def threshold(self, params_per_signal=2):
        """Increment threshold 2*upsilon*kappa of the abridged event."""
        return 2.0 * self.upsilon * _resolve_kappa(self.kappa, params_per_signal)

    def values(self, logliks, params_per_signal=2):
        logliks = np.asarray(logliks, dtype=float)
        nus = np.arange(1, logliks.shape[-1] + 1, dtype=float)
        weight = self.upsilon * _resolve_kappa(self.kappa, params_per_signal)
        return -logliks + weight * nus


@dataclass(frozen=True)
class Eef:
    """Exponentially-embedded-family rule.

    R(nu) = -[L_nu - nu*(ln(L_nu/nu) + 1)] * H(L_nu/nu - 1), H the unit
    step, so the argmin of R maximizes the embedded-family statistic; the
    gate zeroes orders whose average increment is below 1.
    """

    name = "eef"

    def values(self, logliks, params_per_signal=2):
        logliks = np.asarray(logliks, dtype=float)
        nus = np.arange(1, logliks.shape[-1] + 1, dtype=float)
        ratio = logliks / nus
        with np.errstate(divide="ignore", invalid="ignore"):
            stat = logliks - nus * (np.log(ratio) + 1.0)
        return np.where(ratio > 1.0, -stat, 0.0)


@dataclass(frozen=True)
class PmepIr:
    """Invariant-random penalty: R(nu) = -L_nu + kappa_ir*nu*max_i dL_i."""

    kappa_ir: float = 0.25

    name = "pmep-ir"

    def __post_init__(self):
        if not self.kappa_ir > 0:
            raise ValidationError("kappa_ir must be positive")

    def values(self, logliks, params_per_signal=2):
        logliks = np.asarray(logliks, dtype=float)
        nus = np.arange(1, logliks.shape[-1] + 1, dtype=float)
        increments = np.diff(logliks, axis=-1, prepend=0.0)
        max_inc = np.max(increments, axis=-1, keepdims=True)
        return -logliks + self.kappa_ir * nus * max_inc


@dataclass(frozen=True)
class PmepI:
    """Inverse penalty: R(nu) = -L_nu^kappa_i / nu."""

    kappa_i: float = 3.0

    name = "pmep-i"

    def __post_init__(self):
        if not self.kappa_i > 0:
            raise ValidationError("kappa_i must be positive")

    def values(self, logliks, params_per_signal=2):
        logliks = np.asarray(logliks, dtype=float)
        nus = np.arange(1, logliks.shape[-1] + 1, dtype=float)
        return -(logliks**self.kappa_i) / nus


CRITERIA = {cls.name: cls for cls in (Aic, Gic, Eef, PmepIr, PmepI)}


def decision_values(spec, logliks, params_per_signal=2):
    """R(1)..R(N) for one criterion; logliks may be batched (last axis)."""
    logliks = np.asarray(logliks, dtype=float)
    if np.any(logliks < -1e-9):
        raise ValidationError("log-likelihoods must be nonnegative")
    if np.any(np.diff(logliks, axis=-1) < -1e-9):
        raise ValidationError("log-likelihoods must be nondecreasing")
    return spec.values(logliks, params_per_signal=params_per_signal)


def argmin_order(values):
    """Selected order(s): argmin over the last axis, smallest on ties."""
    values = np.asarray(values, dtype=float)
    return np.argmin(values, axis=-1) + 1


@dataclass(frozen=True)
class SelectionResult:
    order: int
    values: np.ndarray
    logliks: np.ndarray
    increments: np.ndarray
    frequencies: np.ndarray
    criterion: object
    approach: object


def select_order(spec, observation, approach, scenario):
    """Pick the order minimizing the criterion's decision values.

    The log-likelihood ladder is computed once per approach (ML: greedy
    frequency search per order; BL/known: fixed frequencies) and the
    criterion is applied to it.
    """
    if not isinstance(approach, (Ml, Bl)):
        raise ValidationError("approach must be an Ml or Bl instance")
    try:
        logliks, increments, freqs = observation_logliks(observation, scenario, approach)
    except Exception as exc:
        raise SelectionError(
            f"could not build log-likelihoods: {exc}",
            diagnostics={"approach": approach.label}) from exc
    values = decision_values(spec, logliks,
                             params_per_signal=approach.params_per_signal)
    if not np.all(np.isfinite(values)):
        raise SelectionError(
            "non-finite decision values",
            diagnostics={"logliks": logliks, "values": values})
    return SelectionResult(
        order=int(argmin_order(values)),
        values=values,
        logliks=logliks,
        increments=increments,
        frequencies=freqs,
        criterion=spec,
        approach=approach,
    )
