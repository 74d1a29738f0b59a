"""Green functions of the two surface models and their pairing kernel.

Disc (Dirichlet): g(P,Q) = log|P-Q| - log|1 - P conj(Q)|, normalized so the
short-distance behavior is exactly log|P-Q|. Its renormalization removes
that log in chart coordinates, leaving -log|1 - P conj(Q)|, and the mixed
second derivative d/dP d/dconj(Q) of the renormalized function is the
closed form (1/2) (1 - P conj(Q))^{-2}, whose double expansion around 0 has
coefficients a_{n,m} = ((n+1)/2) delta_{n,m}.

Torus (flat, unit cell): the mean-zero Fourier series
g(w) = -(1/2pi) sum_{k != 0} e^{2 pi i k.w} / |k|^2 is evaluated through its
Ewald split

    sum_{k!=0} e^{2 pi i k.w} e^{-pi |k|^2} / |k|^2
      + pi sum_{n in Z^2} E1(pi |w-n|^2) - pi,

in which both sums converge like e^{-pi R^2}; five shells give machine
precision. The mixed derivative of the renormalized torus Green function
is constant: the Laplacian of the Ewald split is a difference of two
Gaussian theta sums that Poisson summation ties together, leaving pi/2.
The code evaluates both sums rather than hard-coding the constant.
"""

from __future__ import annotations

import csv

import numpy as np
from scipy.special import exp1

__all__ = [
    "GreenModel",
    "green_value",
    "renormalized_green",
    "pair_kernel",
    "coeff_table",
    "reproduction_constant",
    "GreenCoeffTable",
    "AliasingError",
]

_EWALD_SHELLS = 5
_EULER_GAMMA = float(np.euler_gamma)


class AliasingError(ArithmeticError):
    """Coefficient extraction detected angular aliasing; raise sample count."""


class GreenModel:
    """A surface Green-function model bundled with its evaluators."""

    def __init__(self, model):
        if model not in ("disc", "torus"):
            raise ValueError(f"unknown model {model!r}")
        self.model = model
        self.closed_form = model == "disc"

    def value(self, P, Q):
        return green_value(self.model, P, Q)

    def renormalized(self, P, Q):
        return renormalized_green(self.model, P, Q)

    def kernel(self, P, Q):
        return pair_kernel(self.model, P, Q)

    def __repr__(self):
        return f"GreenModel({self.model!r})"


def model_name(model):
    """Accept a GreenModel or a model-name string, return the name."""
    if isinstance(model, GreenModel):
        return model.model
    if model in ("disc", "torus"):
        return model
    raise ValueError(f"unknown model {model!r}")


def _wrap_torus(w):
    x = (np.real(w) + 0.5) % 1.0 - 0.5
    y = (np.imag(w) + 0.5) % 1.0 - 0.5
    return x + 1j * y


def _ewald_series(w):
    """S(w) = sum_{k!=0} e^{2 pi i k.w}/|k|^2 for wrapped w (array)."""
    x, y = np.real(w), np.imag(w)
    rng = np.arange(-_EWALD_SHELLS, _EWALD_SHELLS + 1)
    out = np.full(np.shape(x), -np.pi)
    for kx in rng:
        for ky in rng:
            if kx == 0 and ky == 0:
                continue
            k2 = kx * kx + ky * ky
            out = out + (np.exp(-np.pi * k2) / k2) * np.cos(
                2 * np.pi * (kx * x + ky * y))
    for nx in rng:
        for ny in rng:
            d2 = (x - nx) ** 2 + (y - ny) ** 2
            out = out + np.pi * exp1(np.pi * np.maximum(d2, 1e-300))
    return out


def _ewald_series_regular(w):
    """S(w) + 2 pi log|w|, smooth through w = 0."""
    x, y = np.real(w), np.imag(w)
    rng = np.arange(-_EWALD_SHELLS, _EWALD_SHELLS + 1)
    out = np.full(np.shape(x), -np.pi, dtype=float)
    for kx in rng:
        for ky in rng:
            if kx == 0 and ky == 0:
                continue
            k2 = kx * kx + ky * ky
            out = out + (np.exp(-np.pi * k2) / k2) * np.cos(
                2 * np.pi * (kx * x + ky * y))
    for nx in rng:
        for ny in rng:
            if nx == 0 and ny == 0:
                continue
            d2 = (x - nx) ** 2 + (y - ny) ** 2
            out = out + np.pi * exp1(np.pi * d2)
    # the n = 0 term carries the singularity:
    #   pi E1(pi r^2) + 2 pi log r = pi (E1(u) + log u) - pi log pi, u = pi r^2
    # and E1(u) + log u -> -EulerGamma as u -> 0
    r2 = x * x + y * y
    u = np.pi * r2
    small = u < 1e-280
    with np.errstate(divide="ignore", invalid="ignore"):
        sing = exp1(np.where(small, 1.0, u)) + np.log(np.where(small, 1.0, u))
    sing = np.where(small, -_EULER_GAMMA, sing)
    out = out + np.pi * (sing - np.log(np.pi))
    return out


def green_value(model, P, Q):
    """Green function of the model at chart points P, Q.

    Disc: Dirichlet Green function with log|P-Q| short-distance sign.
    Torus: mean-zero Green function of the flat unit cell (the integral
    over the cell vanishes).
    """
    model = model_name(model)
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if model == "disc":
        return np.log(np.abs(P - Q)) - np.log(np.abs(1.0 - P * np.conj(Q)))
    return -_ewald_series(_wrap_torus(P - Q)) / (2 * np.pi)


def renormalized_green(model, P, Q):
    """g(P,Q) - log|P-Q| in chart coordinates, finite on the diagonal."""
    model = model_name(model)
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if model == "disc":
        return -np.log(np.abs(1.0 - P * np.conj(Q)))
    if model == "torus":
        w = P - Q
        reg = -_ewald_series_regular(_wrap_torus(w)) / (2 * np.pi)
        # chart distance vs wrapped distance differ when the chart points
        # straddle the seam; keep the chart-log convention explicit
        ww = _wrap_torus(w)
        corr = np.zeros(np.shape(w))
        off = np.abs(w - ww) > 1e-12
        if np.any(off):
            corr = np.where(off,
                            np.log(np.abs(np.where(off, ww, 1.0)))
                            - np.log(np.abs(np.where(off, w, 1.0))),
                            0.0)
        return reg + corr
    raise ValueError(f"unknown model {model!r}")


def pair_kernel(model, P, Q):
    """Mixed derivative d/dP d/dconj(Q) of the renormalized Green function."""
    model = model_name(model)
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if model == "disc":
        return 0.5 / (1.0 - P * np.conj(Q)) ** 2
    if model == "torus":
        w = _wrap_torus(P - Q)
        x, y = np.real(w), np.imag(w)
        rng = np.arange(-_EWALD_SHELLS, _EWALD_SHELLS + 1)
        direct = np.zeros(np.shape(x), dtype=float)
        recip = np.zeros(np.shape(x), dtype=float)
        for nx in rng:
            for ny in rng:
                direct = direct + np.exp(-np.pi * ((x - nx) ** 2 + (y - ny) ** 2))
        for kx in rng:
            for ky in rng:
                if kx == 0 and ky == 0:
                    continue
                recip = recip + np.exp(-np.pi * (kx * kx + ky * ky)) * np.cos(
                    2 * np.pi * (kx * x + ky * y))
        return (np.pi / 2.0) * (direct - recip) + 0j
    raise ValueError(f"unknown model {model!r}")


class GreenCoeffTable:
    """Double-series coefficients a_{n,m} of the pairing kernel around 0."""

    def __init__(self, model, order, radius, values):
        self.model = model
        self.order = int(order)
        self.radius = float(radius)
        values = np.asarray(values, dtype=complex)
        values.flags.writeable = False
        self.values = values

    def entry(self, n, m):
        if not (0 <= n <= self.order and 0 <= m <= self.order):
            return 0j
        return complex(self.values[n, m])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["n", "m", "re", "im"])
            for n in range(self.order + 1):
                for m in range(self.order + 1):
                    v = self.values[n, m]
                    wr.writerow([n, m, format(v.real, ".17g"),
                                 format(v.imag, ".17g")])

    @classmethod
    def from_csv(cls, path, model="disc", radius=0.0):
        rows = {}
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd)
            if header != ["n", "m", "re", "im"]:
                raise ValueError("unexpected coefficient CSV header")
            for n, m, re, im in rd:
                rows[(int(n), int(m))] = float(re) + 1j * float(im)
        order = max(n for n, _ in rows)
        vals = np.zeros((order + 1, order + 1), dtype=complex)
        for (n, m), v in rows.items():
            vals[n, m] = v
        return cls(model, order, radius, vals)


def _extract(model, order, radius, samples):
    th = 2 * np.pi * np.arange(samples) / samples
    z = radius * np.exp(1j * th)
    M = pair_kernel(model, z[:, None], z[None, :])
    hat = np.fft.ifft(np.fft.fft(M, axis=0), axis=1) / samples
    n = np.arange(order + 1)
    scale = radius ** (n[:, None] + n[None, :])
    return hat[: order + 1, : order + 1] / scale


def coeff_table(model, order, radius=0.35, samples=None):
    """Extract a_{n,m} for 0 <= n,m <= order by double circle FFT.

    Samples z and t run over one circle |z| = radius; the kernel values on
    the sample grid are Fourier-transformed in both angles and divided by
    radius^{n+m}. Doubling the sample count must reproduce the table to
    rounding, otherwise angular content beyond the band leaked in and an
    AliasingError is raised.
    """
    model = model_name(model)
    if samples is None:
        samples = max(8 * (order + 1), 64)
    if samples < 4 * max(order, 1):
        raise ValueError("need at least 4*order samples")
    a = _extract(model, order, radius, samples)
    a2 = _extract(model, order, radius, 2 * samples)
    scale = max(np.max(np.abs(a2)), 1.0)
    if np.max(np.abs(a - a2)) > 1e-10 * scale:
        raise AliasingError(
            "coefficient extraction not converged in the sample count")
    return GreenCoeffTable(model, order, radius, a2)


def reproduction_constant(model, pairs, resolution=64, kernel=None):
    """Self-reproduction constant kappa of the pairing kernel.

    For each pair (P, Q): kappa_pair = K(P, Q) / int K(P, .) K(., Q) dA,
    integrated with the surface quadrature at `resolution`. Returns
    (mean kappa, relative spread); a spread above 5% means the kernel does
    not reproduce itself and is reported as an error. `kernel` overrides
    the pairing kernel (used by the scaling property test).
    """
    from .surface import build_surface

    model = model_name(model)
    if len(pairs) < 1:
        raise ValueError("need at least one point pair")
    K = kernel if kernel is not None else (lambda P, Q: pair_kernel(model, P, Q))
    surf = build_surface(model, resolution)
    zq = surf.chart_z
    w = surf.node_w
    kappas = []
    for P, Q in pairs:
        left = K(np.asarray(P), zq)
        right = K(zq, np.asarray(Q))
        integral = np.sum(w * left * right)
        direct = complex(np.asarray(K(np.asarray(P), np.asarray(Q))))
        kappas.append((direct / integral).real)
    kappas = np.asarray(kappas)
    mean = float(np.mean(kappas))
    spread = float((np.max(kappas) - np.min(kappas)) / abs(mean)) if len(kappas) > 1 else 0.0
    if spread > 0.05:
        raise ArithmeticError(
            f"reproduction constant spread {spread:.2%} exceeds 5%")
    return mean, spread
