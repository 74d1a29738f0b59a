"""Formal tensor words of distributions over the smooth-function ring.

A level-n value is a finite sum of words, each word an ordered list of n
atomic distributions with one complex coefficient. Atoms are circle deltas
(optionally carrying the 1/(2 pi) normalization, in which case pairing
with a test function is the plain circle average) and named smooth
densities paired by area integral over the unit disc.

Smooth-function multipliers act as the ring the words form a module over:
in normal form every multiplier is pushed to the first factor of its word,
scalar prefactors are folded into the word coefficient, and words that
agree after pushing are merged. Two values are equal iff their normal
forms are. Evaluation against a tuple of test functions is defined on the
normal form (first factor carries the accumulated multiplier), which makes
it blind to where a multiplier sat before normalization.

Coefficient arithmetic is plain complex multiplication and addition, so
Gaussian-integer inputs stay exact through products, sums and merges.

The textual form is `coeff * atom (x) atom (x) ...`, one word per `+`
separated term; `parse_prodist` inverts `format_prodist` exactly.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "FormalDistribution",
    "ProDistribution",
    "circle_delta",
    "smooth_density",
    "tensor_product",
    "normalize",
    "module_multiply",
    "evaluate",
    "distributional_connection_apply",
    "ConnectionPairing",
    "format_prodist",
    "parse_prodist",
    "SMOOTH_FIELDS",
]

SMOOTH_FIELDS = {
    "one": lambda z: np.ones_like(np.asarray(z, dtype=complex), dtype=complex),
    "re": lambda z: np.asarray(z).real + 0j,
    "im": lambda z: np.asarray(z).imag + 0j,
    "z": lambda z: np.asarray(z, dtype=complex),
    "zbar": lambda z: np.conj(np.asarray(z, dtype=complex)),
    "abs2": lambda z: np.abs(np.asarray(z)) ** 2 + 0j,
    "gauss": lambda z: np.exp(-np.abs(np.asarray(z)) ** 2) + 0j,
}

_CIRCLE_SAMPLES = 512
_RADIAL_ORDER = 48
_ANGULAR_ORDER = 128


def _check_names(names):
    for n in names:
        if n not in SMOOTH_FIELDS:
            raise ValueError(f"unknown smooth field {n!r}")
    return tuple(sorted(names))


class FormalDistribution:
    """One atomic factor: a circle delta or a named smooth density.

    `prefactor` is a plain complex scalar; `multiplier` is a product of
    named smooth fields (strings from SMOOTH_FIELDS). Instances are
    immutable value objects.
    """

    def __init__(self, kind, radius=1.0, field=None, normalized=True,
                 prefactor=1, multiplier=()):
        if kind not in ("circle_delta", "smooth_density"):
            raise ValueError(f"unknown atom kind {kind!r}")
        if kind == "smooth_density":
            if field not in SMOOTH_FIELDS:
                raise ValueError(f"unknown smooth field {field!r}")
        prefactor = complex(prefactor)
        if not np.isfinite(prefactor):
            raise ValueError("prefactor must be finite")
        if isinstance(multiplier, str):
            multiplier = (multiplier,)
        self.kind = kind
        self.radius = float(radius)
        self.field = field
        self.normalized = bool(normalized)
        self.prefactor = prefactor
        self.multiplier = _check_names(multiplier)

    def _shape_key(self):
        return (self.kind, self.radius, self.field, self.normalized)

    def __eq__(self, other):
        if not isinstance(other, FormalDistribution):
            return NotImplemented
        return (self._shape_key() == other._shape_key()
                and self.prefactor == other.prefactor
                and self.multiplier == other.multiplier)

    def __hash__(self):
        return hash((self._shape_key(), self.prefactor, self.multiplier))

    def with_parts(self, prefactor, multiplier):
        return FormalDistribution(self.kind, self.radius, self.field,
                                  self.normalized, prefactor, multiplier)

    def __repr__(self):
        return f"FormalDistribution({_atom_text(self, self.multiplier)!r})"


def circle_delta(radius=1.0, normalized=True, prefactor=1, multiplier=()):
    """Delta distribution on the circle |z| = radius.

    With normalized=True the atom is delta/(2 pi): pairing with a test
    function is the plain average over the circle.
    """
    return FormalDistribution("circle_delta", radius=radius,
                              normalized=normalized, prefactor=prefactor,
                              multiplier=multiplier)


def smooth_density(field, prefactor=1, multiplier=()):
    """Smooth density `field(z) dA` on the unit disc (named field)."""
    return FormalDistribution("smooth_density", field=field,
                              prefactor=prefactor, multiplier=multiplier)


class ProDistribution:
    """Finite sum of level-n tensor words with complex coefficients."""

    def __init__(self, level, words=()):
        level = int(level)
        if level < 1:
            raise ValueError("level must be >= 1")
        packed = []
        for coeff, factors in words:
            factors = tuple(factors)
            if len(factors) != level:
                raise ValueError(
                    f"word length {len(factors)} != level {level}")
            for f in factors:
                if not isinstance(f, FormalDistribution):
                    raise TypeError("word factors must be FormalDistribution")
            packed.append((complex(coeff), factors))
        self.level = level
        self.words = tuple(packed)

    @classmethod
    def from_atom(cls, atom, coeff=1):
        return cls(1, [(coeff, (atom,))])

    def is_zero(self):
        return len(normalize(self).words) == 0

    def __add__(self, other):
        if not isinstance(other, ProDistribution):
            return NotImplemented
        if other.level != self.level:
            raise ValueError("level mismatch in sum")
        return normalize(ProDistribution(
            self.level, self.words + other.words))

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, c):
        if isinstance(c, ProDistribution):
            return tensor_product(self, c)
        return normalize(ProDistribution(
            self.level, [(coeff * complex(c), fs) for coeff, fs in self.words]))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ProDistribution):
            return NotImplemented
        a, b = normalize(self), normalize(other)
        return a.level == b.level and a.words == b.words

    def __hash__(self):
        d = normalize(self)
        return hash((d.level, d.words))

    def __repr__(self):
        return f"ProDistribution({format_prodist(self)!r})"


def _word_key(factors):
    return tuple(
        (f.kind, f.radius, f.field if f.field is not None else "",
         f.normalized, f.multiplier) for f in factors)


def normalize(d):
    """Normal form: prefactors into coefficients, multipliers on the first
    factor, equal words merged, canonical word order, zero words dropped.
    Idempotent."""
    merged = {}
    for coeff, factors in d.words:
        names = []
        for f in factors:
            coeff *= f.prefactor
            names.extend(f.multiplier)
        cleaned = [f.with_parts(1, _check_names(names) if i == 0 else ())
                   for i, f in enumerate(factors)]
        key = _word_key(cleaned)
        if key in merged:
            merged[key] = (merged[key][0] + coeff, merged[key][1])
        else:
            merged[key] = (coeff, tuple(cleaned))
    words = [(c, fs) for key, (c, fs) in sorted(merged.items())
             if c != 0]
    return ProDistribution(d.level, words)


def tensor_product(d1, d2):
    """Word-wise concatenation into a level n+m value, then normal form."""
    words = []
    for c1, f1 in d1.words:
        for c2, f2 in d2.words:
            words.append((c1 * c2, f1 + f2))
    return normalize(ProDistribution(d1.level + d2.level, words))


def module_multiply(d, factor):
    """Multiply by a ring element: a named smooth field or a constant."""
    if isinstance(factor, str):
        words = []
        for coeff, factors in d.words:
            head = factors[0]
            words.append((coeff, (head.with_parts(
                head.prefactor, head.multiplier + (factor,)),) + factors[1:]))
        return normalize(ProDistribution(d.level, words))
    return d * factor


def _as_func(test):
    if callable(test):
        return test
    value = complex(test)
    return lambda z: np.full(np.shape(z), value)


def _pair_atom(atom, names, test):
    tf = _as_func(test)
    if atom.kind == "circle_delta":
        th = 2 * np.pi * np.arange(_CIRCLE_SAMPLES) / _CIRCLE_SAMPLES
        z = atom.radius * np.exp(1j * th)
        vals = np.asarray(tf(z), dtype=complex)
        for n in names:
            vals = vals * SMOOTH_FIELDS[n](z)
        avg = np.mean(vals)
        return avg if atom.normalized else 2 * np.pi * avg
    # smooth density: area integral over the unit disc, Gauss-Legendre
    # in r^2 (exact area element) x trapezoid in angle
    x, wx = np.polynomial.legendre.leggauss(_RADIAL_ORDER)
    r = np.sqrt((x + 1.0) / 2.0)
    wr = wx / 2.0
    th = 2 * np.pi * np.arange(_ANGULAR_ORDER) / _ANGULAR_ORDER
    z = r[:, None] * np.exp(1j * th[None, :])
    vals = SMOOTH_FIELDS[atom.field](z) * np.asarray(tf(z), dtype=complex)
    for n in names:
        vals = vals * SMOOTH_FIELDS[n](z)
    # dA = r dr dtheta = (1/2) du dtheta with u = r^2 on [0, 1]
    return (np.pi / _ANGULAR_ORDER) * np.sum(wr[:, None] * vals)


def evaluate(d, tests):
    """Pair a level-n value against n test functions (callables on complex
    points, or constants). Defined on the normal form; multilinear."""
    tests = list(tests)
    if len(tests) != d.level:
        raise ValueError(f"level {d.level} needs {d.level} test functions, "
                         f"got {len(tests)}")
    d = normalize(d)
    total = 0j
    for coeff, factors in d.words:
        val = coeff
        for i, f in enumerate(factors):
            val *= _pair_atom(f, f.multiplier if i == 0 else (), tests[i])
        total += val
    return complex(total)


class ConnectionPairing(tuple):
    """Coefficient matrices of the dzbar and dz parts of a pairing."""

    def __new__(cls, dzbar, dz):
        return super().__new__(cls, (np.asarray(dzbar), np.asarray(dz)))

    @property
    def dzbar(self):
        return self[0]

    @property
    def dz(self):
        return self[1]


def distributional_connection_apply(f, section, test, samples=512):
    """Distributional part of the cocycle connection applied to a section,
    paired with a test function.

    The delta part of the connection is (f delta dzbar - f^H delta dz)
    divided by 2 pi on the unit circle; applied to the scalar section s
    and paired with the test u it leaves the two coefficient matrices

        dzbar: (1/2pi) oint f s u dtheta,    dz: -(1/2pi) oint f^H s u dtheta.

    For Hermitian-symmetric data the two are conjugate-opposite.
    """
    th = 2 * np.pi * np.arange(samples) / samples
    z = np.exp(1j * th)
    fv = np.asarray(f.evaluate(z), dtype=complex)
    if not np.all(np.isfinite(fv)):
        raise ValueError("cocycle has a pole on the contour")
    su = np.asarray(_as_func(section)(z), dtype=complex) \
        * np.asarray(_as_func(test)(z), dtype=complex)
    if fv.ndim == 1:
        dzbar = np.mean(fv * su)
        dz = -np.mean(np.conj(fv) * su)
        return ConnectionPairing(np.array([[dzbar]]), np.array([[dz]]))
    fH = np.conj(np.swapaxes(fv, -1, -2))
    dzbar = np.mean(fv * su[:, None, None], axis=0)
    dz = -np.mean(fH * su[:, None, None], axis=0)
    return ConnectionPairing(dzbar, dz)


# ---------------------------------------------------------------------------
# textual form
# ---------------------------------------------------------------------------

def _atom_text(atom, names):
    if atom.kind == "circle_delta":
        base = f"delta(r={atom.radius:.17g})"
        if atom.normalized:
            base += "/2pi"
    else:
        base = f"density({atom.field})"
    return "*".join(list(names) + [base])


def format_prodist(d):
    """Canonical one-line text: `coeff * atom (x) atom + ...`."""
    d = normalize(d)
    if not d.words:
        return f"0 [level {d.level}]"
    parts = []
    for coeff, factors in d.words:
        atoms = " (x) ".join(
            _atom_text(f, f.multiplier if i == 0 else ())
            for i, f in enumerate(factors))
        parts.append(f"({coeff.real:.17g}{coeff.imag:+.17g}j) * {atoms}")
    return " + ".join(parts)


_TENSOR_SEPS = (" (x) ", " ⊗ ")


def _parse_atom(text):
    names = text.split("*")
    body = names.pop()
    mult = _check_names(names)
    if body.startswith("delta(r="):
        rest = body[len("delta(r="):]
        normalized = rest.endswith("/2pi")
        if normalized:
            rest = rest[: -len("/2pi")]
        if not rest.endswith(")"):
            raise ValueError(f"bad atom text {text!r}")
        return circle_delta(float(rest[:-1]), normalized, 1, mult)
    if body.startswith("density(") and body.endswith(")"):
        return smooth_density(body[len("density("):-1], 1, mult)
    raise ValueError(f"bad atom text {text!r}")


def parse_prodist(text):
    """Inverse of format_prodist."""
    text = text.strip()
    if text.startswith("0 [level "):
        return ProDistribution(int(text[len("0 [level "):-1]), [])
    words = []
    level = None
    for part in text.split(" + "):
        coeff_text, _, atoms_text = part.partition(" * ")
        if not coeff_text.startswith("(") or not coeff_text.endswith(")"):
            raise ValueError(f"bad word text {part!r}")
        coeff = complex(coeff_text[1:-1])
        for sep in _TENSOR_SEPS[1:]:
            atoms_text = atoms_text.replace(sep, _TENSOR_SEPS[0])
        factors = tuple(_parse_atom(a)
                        for a in atoms_text.split(_TENSOR_SEPS[0]))
        if level is None:
            level = len(factors)
        elif level != len(factors):
            raise ValueError("inconsistent word lengths")
        words.append((coeff, factors))
    return normalize(ProDistribution(level, words))
