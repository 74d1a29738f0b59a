"""Spectral zeta pipeline: heat-trace fits, finite parts, det' = exp(-zeta'(0)).

The derivative at 0 of the Mellin transform of the heat trace splits, for
any epsilon inside the asymptotic regime, into

    zeta'(0) = int_eps^inf theta(t)/t dt
             + gamma a_0 + a_0 log(eps) + sum_{n != 0} a_n eps^n / n
             + int_0^eps (theta(t) - sum_n a_n t^n)/t dt,

where theta(t) ~ sum a_n t^n (n over a rational exponent set) as t -> 0 and
gamma is the Euler constant; the gamma a_0 term comes from 1/Gamma(s) =
s + gamma s^2 + O(s^3). The last integral is evaluated from the lower edge
of the fit window instead of 0: replacing exact expansion coefficients by
fitted ones makes the integrand below the window meaningless, while the
dropped true-remainder tail is o(1) in the window edge. For an explicit
finite spectrum the first integral is a sum of exponential integrals,
int_eps^inf e^{-lam t}/t dt = E1(lam eps), which is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad
from scipy.special import exp1

from ._json import canonical_dumps

__all__ = [
    "AsymptoticFit",
    "ZetaResult",
    "ZeroModeError",
    "theta_from_spectrum",
    "fit_asymptotics",
    "finite_part",
    "zeta_prime_zero",
]

EULER_GAMMA = float(np.euler_gamma)


class ZeroModeError(ValueError):
    """Spectrum contains nonpositive eigenvalues; the zeta pipeline needs
    them removed explicitly rather than silently dropped."""


def theta_from_spectrum(spectrum):
    """Heat trace t -> sum exp(-lam t) of an explicit positive spectrum."""
    lam = _checked_spectrum(spectrum)

    def theta(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-np.multiply.outer(t, lam)).sum(axis=-1)

    return theta


def _checked_spectrum(spectrum):
    lam = np.asarray(spectrum, dtype=float).ravel()
    if lam.size == 0:
        raise ZeroModeError("empty spectrum")
    if np.min(lam) <= 0:
        raise ZeroModeError(
            f"nonpositive eigenvalue {np.min(lam):.3e}; drop kernel modes first")
    return lam


@dataclass(frozen=True)
class AsymptoticFit:
    """Least-squares small-t expansion theta(t) ~ sum_e coeff_e t^e."""

    exponents: tuple
    coefficients: tuple
    residual: float
    cond: float

    def coefficient(self, exponent):
        e = Fraction(exponent)
        for ei, ci in zip(self.exponents, self.coefficients):
            if ei == e:
                return ci
        return 0.0

    def term_sum(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for e, c in zip(self.exponents, self.coefficients):
            out = out + c * t ** float(e)
        return out

    def as_dict(self):
        return {str(e): float(c)
                for e, c in zip(self.exponents, self.coefficients)}


def fit_asymptotics(theta, exponents, window, samples=160, cond_cap=1e12):
    """Fit theta(t) ~ sum coeff t^e over log-spaced t in `window`.

    The rows are weighted by 1/|theta(t)| so the fit controls relative
    error across the window. A design-matrix condition number above
    `cond_cap` aborts with advice to change the window (wider windows
    separate nearby exponents; narrower ones reduce model error).
    """
    exps = tuple(Fraction(e) for e in exponents)
    if len(set(exps)) != len(exps):
        raise ValueError("duplicate exponents")
    lo, hi = float(window[0]), float(window[1])
    if not (0 < lo < hi):
        raise ValueError("window must satisfy 0 < lo < hi")
    ts = np.geomspace(lo, hi, samples)
    y = np.asarray(theta(ts), dtype=float)
    scale = np.maximum(np.abs(y), 1e-300)
    A = np.stack([ts ** float(e) for e in exps], axis=1) / scale[:, None]
    b = y / scale
    cond = np.linalg.cond(A)
    if cond > cond_cap:
        raise ValueError(
            f"fit design matrix condition {cond:.2e} exceeds {cond_cap:.0e}; "
            "change the fit window (widen to separate exponents, or drop terms)")
    coeff, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.max(np.abs(A @ coeff - b)))
    return AsymptoticFit(exps, tuple(float(c) for c in coeff), resid, float(cond))


def finite_part(values, divergence_powers=(), window=(1e-3, 1e-1), samples=80):
    """Constant term of F(eps) = sum c_p eps^{-p} + c_log log(eps) + c_0 + o(1).

    `values` is a callable of eps; `divergence_powers` lists the positive
    powers p with a 1/eps^p term. A log term and a cubic Taylor tail are
    always part of the model, so smooth o(1) behavior does not bias c_0.
    """
    lo, hi = float(window[0]), float(window[1])
    eps = np.geomspace(lo, hi, samples)
    F = np.asarray([values(e) for e in eps], dtype=float)
    cols = [eps ** (-float(p)) for p in divergence_powers]
    cols.append(np.log(eps))
    cols.append(np.ones_like(eps))
    cols.extend([eps, eps ** 2, eps ** 3])
    A = np.stack(cols, axis=1)
    coeff, *_ = np.linalg.lstsq(A, F, rcond=None)
    return float(coeff[len(divergence_powers) + 1])


@dataclass(frozen=True)
class ZetaResult:
    zeta_prime_0: float
    det_reg: float
    eps: float
    fit: AsymptoticFit
    residual: float

    def as_dict(self):
        return {
            "zeta_prime_0": self.zeta_prime_0,
            "det_reg": self.det_reg,
            "eps": self.eps,
            "fit": self.fit.as_dict(),
            "residual": self.residual,
        }

    def to_json(self):
        return canonical_dumps(self.as_dict())


def zeta_prime_zero(spectrum=None, theta=None, fit=None, exponents=None,
                    window=None, eps=None):
    """Evaluate zeta'(0) (and det' = exp(-zeta'(0))) by the split formula.

    Supply either an explicit positive `spectrum` or a heat-trace callable
    `theta`. The asymptotic fit may be passed in; otherwise `exponents` and
    `window` are required and the fit is computed here. `eps` defaults to
    the upper window edge and must lie inside the window.
    """
    if (spectrum is None) == (theta is None):
        raise ValueError("pass exactly one of spectrum, theta")
    lam = None
    if spectrum is not None:
        lam = _checked_spectrum(spectrum)
        theta = theta_from_spectrum(lam)
    if fit is None:
        if exponents is None or window is None:
            raise ValueError("without a fit, exponents and window are required")
        fit = fit_asymptotics(theta, exponents, window)
    if window is None:
        raise ValueError("window is required (remainder integral cutoff)")
    lo, hi = float(window[0]), float(window[1])
    if eps is None:
        eps = hi
    eps = float(eps)
    if not (lo <= eps <= hi * (1 + 1e-12)):
        raise ValueError("eps must lie inside the fit window")

    if lam is not None:
        tail = float(np.sum(exp1(lam * eps)))
    else:
        tail, tail_err = quad(lambda t: theta(t) / t, eps, np.inf, limit=200)
        if tail_err > 1e-9 * max(abs(tail), 1.0):
            raise ArithmeticError("tail integral did not converge")

    a0 = fit.coefficient(0)
    series = 0.0
    for e, c in zip(fit.exponents, fit.coefficients):
        if e != 0:
            series += c * eps ** float(e) / float(e)

    def remainder_integrand(t):
        return (theta(t) - fit.term_sum(t)) / t

    rem, rem_err = quad(remainder_integrand, lo, eps, limit=200)

    zp0 = tail + EULER_GAMMA * a0 + a0 * np.log(eps) + series + rem
    return ZetaResult(float(zp0), float(np.exp(-zp0)), eps, fit, fit.residual)
