"""Truncated matrix-valued Laurent series on an annulus around 0.

A cocycle here is a finite sum f(z) = sum_k C_k z^k with square complex
matrix coefficients C_k, k ranging over a declared integer degree window.
The window is always explicit: products and exponentials truncate to the
window the caller passes in, never to one inferred from the data.
"""

from __future__ import annotations

import json
import numpy as np

__all__ = [
    "LaurentCocycle",
    "eval_on_circle",
    "laurent_product",
    "exp_cocycle",
    "TruncationError",
]

_TRACE_TOL = 1e-12


class TruncationError(ValueError):
    """Raised when exp_cocycle would silently drop significant mass."""


class LaurentCocycle:
    """Immutable finite Laurent series with (rank x rank) coefficients.

    Parameters
    ----------
    terms : dict[int, array_like]
        Map degree -> coefficient matrix. Matrices must share one shape
        (rank, rank) with rank <= 4.
    window : tuple[int, int], optional
        Declared inclusive degree range. Defaults to the span of `terms`.
        All supplied degrees must lie inside it.
    trace_free : bool
        If set, every coefficient must have |trace| <= 1e-12.
    """

    def __init__(self, terms, window=None, trace_free=False):
        if not terms:
            raise ValueError("at least one term is required")
        degrees = sorted(int(d) for d in terms)
        mats = [np.asarray(terms[d], dtype=complex) for d in degrees]
        rank = mats[0].shape[0]
        for m in mats:
            if m.shape != (rank, rank):
                raise ValueError("coefficient shapes disagree")
        if rank > 4:
            raise ValueError("rank > 4 not supported by the dense layout")
        if window is None:
            window = (degrees[0], degrees[-1])
        lo, hi = int(window[0]), int(window[1])
        if lo > hi:
            raise ValueError("empty degree window")
        if degrees[0] < lo or degrees[-1] > hi:
            raise ValueError("term degree outside declared window")
        if trace_free:
            worst = max(abs(np.trace(m)) for m in mats)
            if worst > _TRACE_TOL:
                raise ValueError(f"trace-free violated: max |tr| = {worst:.3e}")
        coeffs = np.stack(mats)
        coeffs.flags.writeable = False
        self._degrees = tuple(degrees)
        self._coeffs = coeffs
        self._rank = rank
        self._window = (lo, hi)
        self._trace_free = bool(trace_free)

    # -- accessors ---------------------------------------------------------

    @property
    def rank(self):
        return self._rank

    @property
    def degrees(self):
        return self._degrees

    @property
    def window(self):
        return self._window

    @property
    def trace_free(self):
        return self._trace_free

    def coefficient(self, degree):
        """Coefficient matrix at `degree` (zero matrix if absent)."""
        degree = int(degree)
        try:
            i = self._degrees.index(degree)
        except ValueError:
            return np.zeros((self._rank, self._rank), dtype=complex)
        return self._coeffs[i].copy()

    def max_degree(self):
        return self._degrees[-1]

    def min_degree(self):
        return self._degrees[0]

    def terms(self):
        """Iterate (degree, coefficient) pairs in increasing degree order."""
        for d, c in zip(self._degrees, self._coeffs):
            yield d, c

    def __eq__(self, other):
        if not isinstance(other, LaurentCocycle):
            return NotImplemented
        return (self._rank == other._rank
                and self._degrees == other._degrees
                and np.array_equal(self._coeffs, other._coeffs))

    def __repr__(self):
        return (f"LaurentCocycle(rank={self._rank}, degrees={self._degrees}, "
                f"window={self._window})")

    # -- arithmetic helpers --------------------------------------------------

    def scaled(self, c):
        return LaurentCocycle({d: c * m for d, m in self.terms()},
                              window=self._window)

    def plus(self, other, window=None):
        if self._rank != other._rank:
            raise ValueError("rank mismatch")
        acc = {d: m.copy() for d, m in self.terms()}
        for d, m in other.terms():
            acc[d] = acc.get(d, 0) + m
        if window is None:
            window = (min(self._window[0], other._window[0]),
                      max(self._window[1], other._window[1]))
        return LaurentCocycle(acc, window=window)

    def evaluate(self, z):
        """Evaluate the series at points `z` (any array shape, nonzero)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (self._rank, self._rank), dtype=complex)
        for d, c in self.terms():
            out += (z ** d)[..., None, None] * c
        return out

    # -- serialization -------------------------------------------------------

    def to_json(self):
        terms = []
        for d, c in self.terms():
            terms.append({
                "degree": int(d),
                "re": [[float(x) for x in row] for row in c.real],
                "im": [[float(x) for x in row] for row in c.imag],
            })
        return json.dumps({"rank": self._rank,
                           "trace_free": self._trace_free,
                           "terms": terms}, indent=1)

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        degrees = [t["degree"] for t in obj["terms"]]
        if degrees != sorted(set(degrees)):
            raise ValueError("degrees must be strictly increasing")
        terms = {}
        for t in obj["terms"]:
            terms[t["degree"]] = (np.asarray(t["re"], dtype=float)
                                  + 1j * np.asarray(t["im"], dtype=float))
        got = cls(terms, trace_free=obj.get("trace_free", False))
        if got.rank != obj["rank"]:
            raise ValueError("rank field disagrees with coefficient shape")
        return got


def eval_on_circle(f, radius, samples):
    """Sample f on the circle |z| = radius at `samples` uniform angles.

    Returns an array of shape (samples, rank, rank); sample j sits at
    angle 2*pi*j/samples.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if samples < 1:
        raise ValueError("need at least one sample")
    th = 2.0 * np.pi * np.arange(samples) / samples
    return f.evaluate(radius * np.exp(1j * th))


def laurent_product(f, g, window):
    """Coefficientwise product f*g truncated to `window` (silent clipping)."""
    if f.rank != g.rank:
        raise ValueError("rank mismatch")
    lo, hi = int(window[0]), int(window[1])
    acc = {}
    for d1, c1 in f.terms():
        for d2, c2 in g.terms():
            d = d1 + d2
            if lo <= d <= hi:
                acc[d] = acc.get(d, 0) + c1 @ c2
    if not acc:
        acc[lo] = np.zeros((f.rank, f.rank), dtype=complex)
    return LaurentCocycle(acc, window=(lo, hi))


def exp_cocycle(f, window, drop_tol=1e-10):
    """Exponential series of f, truncated to `window` once at the end.

    Powers of f are accumulated without intermediate truncation (the degree
    span of f^m grows linearly in m, and 1/m! kills the tail after a few
    dozen terms), so the only information loss is the final clip. The
    largest coefficient magnitude outside the window is compared against
    drop_tol; exceeding it raises TruncationError instead of returning a
    silently wrong series.
    """
    rank = f.rank
    ident = np.eye(rank, dtype=complex)
    acc = {0: ident.copy()}
    power = {0: ident.copy()}          # f^m / m!
    scale = max(np.max(np.abs(c)) for _, c in f.terms())
    m = 0
    while True:
        m += 1
        nxt = {}
        for d1, c1 in power.items():
            for d2, c2 in f.terms():
                d = d1 + d2
                nxt[d] = nxt.get(d, 0) + (c1 @ c2) / m
        power = nxt
        top = max(np.max(np.abs(c)) for c in power.values())
        for d, c in power.items():
            acc[d] = acc.get(d, 0) + c
        if top < 1e-18 * max(scale, 1.0) or m > 120:
            break
    lo, hi = int(window[0]), int(window[1])
    dropped = 0.0
    kept = {}
    for d, c in acc.items():
        if lo <= d <= hi:
            kept[d] = c
        else:
            dropped = max(dropped, float(np.max(np.abs(c))))
    if dropped > drop_tol:
        raise TruncationError(
            f"exp tail outside window [{lo},{hi}] has magnitude "
            f"{dropped:.3e} > drop_tol={drop_tol:.1e}; widen the window")
    if not kept:
        kept[0] = np.zeros((rank, rank), dtype=complex)
    return LaurentCocycle(kept, window=(lo, hi))
