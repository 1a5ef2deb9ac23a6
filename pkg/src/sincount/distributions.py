"""Distributions of likelihood increments and the quadrature helpers.

The central objects are Dist records holding a CDF/PDF pair on [0, inf).
Likelihood increments under fixed frequencies follow noncentral chi-square
laws with 2 degrees of freedom; sums of increments follow the even-dof
family; the maximum-over-band increments of the ML approach follow an
extreme-value-type closed form with an atom at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import gammainc, gammaln, ive, ndtr

from .errors import QuadratureError, ValidationError

_TERM_RATIO_CUT = 1e-14
_NORMAL_APPROX_LAMBDA = 1e6


@dataclass(frozen=True)
class Dist:
    """A distribution on [0, inf): vectorized cdf/pdf callables, an upper
    truncation point with 1 - cdf < 1e-12, and the probability mass sitting
    exactly at zero (nonzero only for the truncated ML-approach laws)."""

    cdf: object
    pdf: object
    support_hint: float
    atom0: float = 0.0
    sampler: object = None

    def sample(self, rng, size):
        """Draw `size` variates; exact sampler if available, else inverse CDF."""
        if self.sampler is not None:
            return self.sampler(rng, size)
        grid = np.linspace(0.0, self.support_hint, 8193)
        cg = np.asarray(self.cdf(grid), dtype=float)
        cg = np.maximum.accumulate(cg)
        u = rng.random(size)
        out = np.interp(u, cg, grid)
        if self.atom0 > 0:
            out = np.where(u <= self.atom0, 0.0, out)
        return out


def _pois_window(half_lam):
    """Index range of Poisson(half_lam) terms with weight above the ratio cut."""
    j0 = int(half_lam)
    spread = int(10.0 * math.sqrt(half_lam) + 40.0)
    return max(0, j0 - spread), j0 + spread


def _ncx2_cdf(x, m, lam):
    """CDF of noncentral chi-square with 2m dof, noncentrality lam.

    Poisson-weighted mixture of central gamma CDFs (Marcum-Q series):
    sum_j pois(j; lam/2) P(m + j, x/2), truncated by term ratio.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    pos = x > 0
    if not np.any(pos):
        return out
    xp = x[pos] / 2.0
    if lam <= 1e-300:
        out[pos] = gammainc(m, xp)
        return out
    if lam > _NORMAL_APPROX_LAMBDA:
        mean = 2 * m + lam
        sd = math.sqrt(2.0 * (2 * m + 2.0 * lam))
        out[pos] = ndtr((x[pos] - mean) / sd)
        return out
    h = lam / 2.0
    jlo, jhi = _pois_window(h)
    js = np.arange(jlo, jhi + 1)
    logw = js * math.log(h) - h - gammaln(js + 1)
    w = np.exp(logw)
    keep = w > w.max() * _TERM_RATIO_CUT
    js, w = js[keep], w[keep]
    acc = np.zeros(xp.shape)
    # chunked so the (terms, points) intermediate stays small
    for start in range(0, js.size, 64):
        jb = js[start:start + 64]
        wb = w[start:start + 64]
        acc += wb @ gammainc(m + jb[:, None], xp[None, :])
    out[pos] = np.minimum(acc, 1.0)
    return out


def _ncx2_pdf(x, m, lam):
    """PDF companion of _ncx2_cdf (2m dof)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    if m == 1 and lam <= _NORMAL_APPROX_LAMBDA:
        out[x == 0] = 0.5 * math.exp(-lam / 2.0)
    pos = x > 0
    if not np.any(pos):
        return out
    xp = x[pos]
    if lam <= 1e-300:
        out[pos] = np.exp((m - 1) * np.log(xp) - xp / 2.0 - m * math.log(2.0) - gammaln(m))
        return out
    if lam > _NORMAL_APPROX_LAMBDA:
        mean = 2 * m + lam
        sd = math.sqrt(2.0 * (2 * m + 2.0 * lam))
        z = (xp - mean) / sd
        out[pos] = np.exp(-0.5 * z * z) / (sd * math.sqrt(2 * math.pi))
        return out
    s = np.sqrt(lam * xp)
    log_pref = 0.5 * (m - 1) * (np.log(xp) - math.log(lam))
    out[pos] = 0.5 * np.exp(log_pref - (xp + lam) / 2.0 + s) * ive(m - 1, s)
    return out


def _ncx2_support(m, lam):
    mean = 2 * m + lam
    sd = math.sqrt(2.0 * (2 * m + 2.0 * lam))
    t = mean + 12.0 * sd + 20.0
    for _ in range(80):
        if _ncx2_cdf(np.array([t]), m, lam)[0] >= 1.0 - 1e-12:
            return float(t)
        t *= 1.5
    return float(t)


def nc_chisq2(lam):
    """Noncentral chi-square law with 2 dof: the fixed-frequency increment V_i.

    cdf(x) = 1 - MarcumQ_1(sqrt(lam), sqrt(x)); pdf(x) = exp(-(x+lam)/2) I_0(sqrt(lam x))/2.
    """
    return nc_chisq2_sum(1, lam)


def nc_chisq2_sum(n_terms, lam):
    """Law of the sum of n_terms independent 2-dof increments with total
    noncentrality lam (noncentral chi-square, 2*n_terms dof)."""
    if lam < 0 or not math.isfinite(lam):
        raise ValidationError(f"noncentrality must be finite and >= 0, got {lam}")
    if n_terms < 1:
        raise ValidationError(f"n_terms must be >= 1, got {n_terms}")
    m = int(n_terms)
    lam = float(lam)

    def cdf(x):
        return _ncx2_cdf(x, m, lam)

    def pdf(x):
        return _ncx2_pdf(x, m, lam)

    def sampler(rng, size):
        if lam <= 1e-300:
            return rng.chisquare(2 * m, size)
        return rng.noncentral_chisquare(2 * m, lam, size)

    return Dist(cdf=cdf, pdf=pdf, support_hint=_ncx2_support(m, lam), sampler=sampler)


def ml_component_cdf(dbar_sq, xi, signal_present, gauss_denominator="2d2"):
    """Law of one squared max-over-band residual under the ML approach.

    For a signal index the CDF is Phi((x - d2)/denom) * exp(-(xi/pi) exp(-x/2));
    for a noise index the Gaussian factor is dropped.  The closed form is
    truncated at zero, which leaves an atom there of size cdf(0+).

    gauss_denominator selects denom: "2d2" uses 2*d2 as printed in the source
    formula, "2d" uses 2*sqrt(d2) (the variance-matched alternative).
    """
    if not (xi > 0) or not math.isfinite(xi):
        raise ValidationError(f"xi must be positive and finite, got {xi}")
    if signal_present:
        if dbar_sq is None or not math.isfinite(dbar_sq) or dbar_sq < 0:
            raise ValidationError(f"dbar_sq must be finite and >= 0, got {dbar_sq}")
        if gauss_denominator == "2d2":
            denom = 2.0 * dbar_sq
        elif gauss_denominator == "2d":
            denom = 2.0 * math.sqrt(dbar_sq)
        else:
            raise ValidationError(f"unknown gauss_denominator {gauss_denominator!r}")
        if denom <= 0:
            raise ValidationError("dbar_sq must be positive when a signal is present")
    c = xi / math.pi

    def gumbel(x):
        return np.exp(-c * np.exp(-x / 2.0))

    if signal_present:
        d2 = float(dbar_sq)

        def cdf(x):
            x = np.asarray(x, dtype=float)
            val = ndtr((x - d2) / denom) * gumbel(x)
            return np.where(x < 0, 0.0, val)

        def pdf(x):
            x = np.asarray(x, dtype=float)
            u = (x - d2) / denom
            phi = np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
            g = gumbel(x)
            val = g * (phi / denom + ndtr(u) * 0.5 * c * np.exp(-x / 2.0))
            return np.where(x < 0, 0.0, val)

        atom = float(ndtr(-d2 / denom) * math.exp(-c))
        tail = max(d2 + 7.5 * denom, 2.0 * math.log(c / 5e-13) if c > 5e-13 else 1.0)
    else:

        def cdf(x):
            x = np.asarray(x, dtype=float)
            return np.where(x < 0, 0.0, gumbel(x))

        def pdf(x):
            x = np.asarray(x, dtype=float)
            val = gumbel(x) * 0.5 * c * np.exp(-x / 2.0)
            return np.where(x < 0, 0.0, val)

        atom = float(math.exp(-c))
        tail = 2.0 * math.log(c / 5e-13) if c > 5e-13 else 1.0
    t = max(tail, 1.0)
    while cdf(np.array([t]))[0] < 1.0 - 1e-12:
        t *= 1.5
    return Dist(cdf=cdf, pdf=pdf, support_hint=float(t), atom0=atom)


def _panel_nodes(n_nodes, n_panels):
    """Gauss-Legendre nodes/weights on [0, 1] split into equal panels."""
    xn, wn = np.polynomial.legendre.leggauss(n_nodes)
    starts = np.arange(n_panels) / n_panels
    width = 1.0 / n_panels
    nodes = (starts[:, None] + width * 0.5 * (xn[None, :] + 1.0)).ravel()
    weights = np.tile(width * 0.5 * wn, n_panels)
    return nodes, weights


_CONV_GRID = 4096
_CONV_NODES, _CONV_WEIGHTS = _panel_nodes(48, 4)


def convolve_cdfs(a, b):
    """Law of the sum of independent variables with laws a and b.

    cdf(x) = b.atom0 * a.cdf(x) + integral_0^x a.cdf(x - y) b.pdf(y) dy,
    evaluated on a dense grid by panelled Gauss-Legendre quadrature and
    interpolated monotonically.
    """
    if b.atom0 >= 1.0 - 1e-12 or b.support_hint <= 1e-12:
        return a
    if a.atom0 >= 1.0 - 1e-12 or a.support_hint <= 1e-12:
        return b
    total = a.support_hint + b.support_hint
    xs = np.linspace(0.0, total, _CONV_GRID + 1)
    upper = np.minimum(xs, b.support_hint)
    ys = upper[:, None] * _CONV_NODES[None, :]
    wts = upper[:, None] * _CONV_WEIGHTS[None, :]
    bp = b.pdf(ys)
    cdf_vals = b.atom0 * a.cdf(xs) + np.sum(a.cdf(xs[:, None] - ys) * bp * wts, axis=1)
    pdf_vals = (b.atom0 * a.pdf(xs) + a.atom0 * b.pdf(xs)
                + np.sum(a.pdf(xs[:, None] - ys) * bp * wts, axis=1))
    cdf_vals = np.minimum(np.maximum.accumulate(np.clip(cdf_vals, 0.0, 1.0)), 1.0)
    atom = a.atom0 * b.atom0
    cdf_vals[0] = atom
    cdf_interp = PchipInterpolator(xs, cdf_vals, extrapolate=False)
    pdf_interp = PchipInterpolator(xs, np.maximum(pdf_vals, 0.0), extrapolate=False)
    top = float(cdf_vals[-1])

    def cdf(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        below = x < 0
        above = x > total
        mid = ~(below | above)
        out[below] = 0.0
        out[above] = max(top, 1.0 - 1e-15)
        out[mid] = cdf_interp(x[mid])
        return out

    def pdf(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        mid = (x >= 0) & (x <= total)
        out[mid] = pdf_interp(x[mid])
        return out

    return Dist(cdf=cdf, pdf=pdf, support_hint=total, atom0=atom)


def integrate_semiinfinite(f, tol=1e-8, support_hint=None, return_error=False):
    """Integral of f over [0, inf) for integrands that die beyond a finite point.

    The truncation point comes from support_hint when the caller knows it
    (e.g. a Dist support), otherwise from doubling probes; the finite integral
    uses adaptive Gauss-Kronrod quadrature.  With return_error the result is
    (value, error estimate).
    """
    if support_hint is not None and support_hint > 0:
        t = float(support_hint)
    else:
        t = 16.0
        probe_nodes, probe_wts = _panel_nodes(16, 1)
        while t < 1e12:
            ys = t + t * probe_nodes
            segment = float(np.sum(np.abs(f(ys)) * probe_wts) * t)
            if segment < tol / 100.0 and abs(float(np.max(np.abs(f(np.array([t], dtype=float)))))) < tol:
                break
            t *= 2.0
    value, err = _quad_truncated(f, 0.0, t, tol)
    if return_error:
        return value, err
    return value


def _quad_truncated(f, lo, hi, tol):
    """Adaptive quadrature on [lo, hi]; returns (value, error estimate)."""

    def scalar_f(u):
        return float(np.asarray(f(np.array([u], dtype=float)))[0])

    value, err = quad(scalar_f, lo, hi, epsabs=tol, epsrel=1e-10, limit=400)
    if err > max(tol, abs(value) * 1e-6) * 10.0:
        raise QuadratureError(
            f"quadrature error {err:.2e} exceeds tolerance {tol:.2e}",
            estimate=value, achieved_error=err)
    return value, err
