"""Grid models of the unit disc and the flat unit torus.

Both models carry quadrature weights and a first-order complex derivative
operator Dbar = d/dx + i d/dy mapping node values to face values. On the
disc the grid is polar (nodes on rings r = (i+1/2)h so that circles are
grid lines), the radial derivative is staggered onto faces at r = ih with
a ghost reflection across r = 1 enforcing the Dirichlet condition, and the
angular derivative is spectral per ring. An extra ring of "pole faces" at
r = h/4 carries the angular energy of the innermost disc; without it the
grid admits spurious near-null modes concentrated at the origin (discrete
relatives of r^{-|m|} e^{i m theta}, which regularity excludes in the
continuum). On the torus the operator is a plain Fourier multiplier and
faces coincide with nodes.

The adjoint of Dbar is taken in the weighted inner products, so
<Dbar u, v>_faces = <u, Dbar* v>_nodes holds to machine precision by
construction.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

__all__ = [
    "DiscretizedSurface",
    "build_surface",
    "bump_function",
    "SmoothBump",
    "gauge_identity_check",
]


class DiscretizedSurface:
    """Container for one grid model; construct via build_surface."""

    def __init__(self, model, resolution):
        self.model = model
        self.resolution = resolution
        self._hat_dense = None
        self._dbar_sparse = None
        if model == "disc":
            self._build_disc(resolution)
        elif model == "torus":
            self._build_torus(resolution)
        else:
            raise ValueError(f"unknown model {model!r}")

    # -- construction --------------------------------------------------------

    def _build_disc(self, N):
        h = 1.0 / N
        Nt = N if N % 2 == 1 else N + 1    # odd angle count: no Nyquist mode
        dth = 2.0 * np.pi / Nt
        self.h = h
        self.n_theta = Nt
        rn = (np.arange(1, N + 1) - 0.5) * h
        rf = np.arange(1, N + 1) * h
        th = np.arange(Nt) * dth
        rp = 0.25 * h                       # pole-face radius
        self.pole_radius = rp
        self.node_r = np.repeat(rn, Nt)
        self.node_z = self.node_r * np.exp(1j * np.tile(th, N))
        self.node_w = np.repeat(rn * h * dth, Nt)
        fr = np.concatenate([np.full(Nt, rp), np.repeat(rf, Nt)])
        self.face_r = fr
        self.face_z = fr * np.exp(1j * np.tile(th, N + 1))
        wf = np.concatenate([np.full(Nt, 0.125 * h * h * dth),
                             np.repeat(rf * h * dth, Nt)])
        wf[-Nt:] = 0.5 * h * dth            # boundary faces own half a cell
        self.face_w = wf
        self.n_nodes = N * Nt
        self.n_faces = (N + 1) * Nt
        self.chart_z = self.node_z
        self.chart_face_z = self.face_z
        self.boundary_nodes = np.arange((N - 1) * Nt, N * Nt)
        k = np.fft.fftfreq(Nt, d=1.0 / Nt)
        self._ik = 1j * k
        self._theta_phase = np.exp(1j * th)

    def _build_torus(self, N):
        self.h = 1.0 / N
        self.n_theta = N
        x = np.arange(N) / N
        X, Y = np.meshgrid(x, x, indexing="ij")   # index = ix*N + iy
        self.node_xy = np.stack([X.ravel(), Y.ravel()], axis=1)
        # chart centered in the cell keeps the marked point off the seam
        self.chart_z = (X.ravel() - 0.5) + 1j * (Y.ravel() - 0.5)
        self.node_z = self.chart_z
        self.node_w = np.full(N * N, 1.0 / (N * N))
        self.face_z = self.node_z
        self.chart_face_z = self.chart_z
        self.face_w = self.node_w
        self.n_nodes = N * N
        self.n_faces = N * N
        self.boundary_nodes = np.arange(0)
        k = np.fft.fftfreq(N, d=1.0 / N)
        kx = k[:, None]
        ky = k[None, :]
        self._multiplier = 2j * np.pi * (kx + 1j * ky)

    # -- Dbar application ----------------------------------------------------

    def apply_dbar(self, u):
        """Dbar of node values; u has shape (n_nodes,) or (n_nodes, m)."""
        u = np.asarray(u, dtype=complex)
        squeeze = u.ndim == 1
        if squeeze:
            u = u[:, None]
        if self.model == "torus":
            N = self.resolution
            m = u.shape[1]
            grid = u.reshape(N, N, m)
            spec = np.fft.fft2(grid, axes=(0, 1))
            spec *= self._multiplier[:, :, None]
            out = np.fft.ifft2(spec, axes=(0, 1)).reshape(N * N, m)
        else:
            out = self._apply_dbar_disc(u)
        return out[:, 0] if squeeze else out

    def _apply_dbar_disc(self, u):
        N = self.resolution
        Nt = self.n_theta
        h = self.h
        m = u.shape[1]
        rings = u.reshape(N, Nt, m)
        spec = np.fft.fft(rings, axis=1)
        ik = self._ik[None, :, None]
        out = np.empty((N + 1, Nt, m), dtype=complex)
        # pole faces: i/r times the angular derivative of the innermost ring
        out[0] = np.fft.ifft((1j * ik / self.pole_radius) * spec[0:1],
                             axis=1)[0]
        # interior faces between rings i and i+1, radius (i+1)h
        rfint = (np.arange(1, N) * h)[:, None, None]
        radial = (rings[1:] - rings[:-1]) / h
        angular = np.fft.ifft(ik * 0.5 * (spec[:-1] + spec[1:]), axis=1)
        out[1:N] = radial + (1j / rfint) * angular
        # boundary faces at r = 1: ghost reflection gives -2u/h, the
        # tangential term vanishes because the reflected average does
        out[N] = -2.0 * rings[N - 1] / h
        out *= self._theta_phase[None, :, None]
        return out.reshape((N + 1) * Nt, m)

    def apply_dbar_adjoint(self, v):
        """Adjoint of Dbar in the weighted inner products."""
        v = np.asarray(v, dtype=complex)
        squeeze = v.ndim == 1
        if squeeze:
            v = v[:, None]
        D = self.dbar_matrix()
        out = (D.conj().T @ (self.face_w[:, None] * v)) / self.node_w[:, None]
        return out[:, 0] if squeeze else out

    def dbar_matrix(self):
        """Sparse Dbar as a (n_faces x n_nodes) matrix."""
        if self._dbar_sparse is not None:
            return self._dbar_sparse
        if self.model == "torus":
            D = self.apply_dbar(np.eye(self.n_nodes, dtype=complex))
            self._dbar_sparse = sp.csr_matrix(D)
            return self._dbar_sparse
        N = self.resolution
        Nt = self.n_theta
        h = self.h
        k = np.fft.fftfreq(Nt, d=1.0 / Nt)
        F = np.fft.fft(np.eye(Nt), axis=0)
        Dth = np.fft.ifft((1j * k)[:, None] * F, axis=0).real
        E = np.diag(self._theta_phase)
        eye = np.eye(Nt)
        blocks = {}
        rp = self.pole_radius
        blocks[(0, 0)] = E @ ((1j / rp) * Dth)
        for i in range(N - 1):
            rfi = (i + 1) * h
            blocks[(i + 1, i)] = E @ (-eye / h + (1j / rfi) * 0.5 * Dth)
            blocks[(i + 1, i + 1)] = E @ (eye / h + (1j / rfi) * 0.5 * Dth)
        blocks[(N, N - 1)] = E @ (-2.0 * eye / h)
        rows = []
        for fi in range(N + 1):
            row = [None] * N
            for (a, b), blk in blocks.items():
                if a == fi:
                    row[b] = sp.csr_matrix(blk)
            rows.append(row)
        self._dbar_sparse = sp.bmat(rows, format="csr")
        return self._dbar_sparse

    # -- symmetrized (hat) operator -------------------------------------------

    def hat_matrix(self, dense=True):
        """W_f^{1/2} Dbar W_n^{-1/2}; dense by default, sparse otherwise."""
        sf = np.sqrt(self.face_w)
        sn = np.sqrt(self.node_w)
        D = self.dbar_matrix()
        T = sp.diags(sf) @ D @ sp.diags(1.0 / sn)
        if not dense:
            return T.tocsr()
        if self._hat_dense is None:
            self._hat_dense = np.asarray(T.todense())
        return self._hat_dense

    def apply_hat(self, X):
        """Apply the hat operator to columns of X without forming it."""
        sn = np.sqrt(self.node_w)
        sf = np.sqrt(self.face_w)
        Y = self.apply_dbar(np.asarray(X, dtype=complex)
                            / (sn[:, None] if np.ndim(X) > 1 else sn))
        return Y * (sf[:, None] if Y.ndim > 1 else sf)

    def node_rings(self):
        """Node radius per node (disc) for masking; torus: chart modulus."""
        if self.model == "disc":
            return self.node_r
        return np.abs(self.chart_z)


def build_surface(model, resolution, options=None):
    """Construct a DiscretizedSurface.

    model : "disc" | "torus"; resolution : rings/angle count (disc) or grid
    side (torus), at least 8. `options` is reserved for future knobs;
    unknown keys are rejected.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    if options:
        unknown = set(options) - set()
        if unknown:
            raise ValueError(f"unknown surface options: {sorted(unknown)}")
    return DiscretizedSurface(model, int(resolution))


# ---------------------------------------------------------------------------
# smooth radial bump
# ---------------------------------------------------------------------------

def _glue(x):
    # exp(-1/x) glue, zero for x <= 0
    out = np.zeros_like(x, dtype=float)
    pos = x > 1e-12
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def _glue_prime(x):
    out = np.zeros_like(x, dtype=float)
    pos = x > 1e-3      # below this the value underflows anyway
    out[pos] = np.exp(-1.0 / x[pos]) / x[pos] ** 2
    return out


class SmoothBump:
    """C-infinity radial plateau: 1 for r <= r1, 0 for r >= r2."""

    def __init__(self, r1, r2):
        if not (0 < r1 < r2):
            raise ValueError("need 0 < r1 < r2")
        self.r1 = float(r1)
        self.r2 = float(r2)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        t = (r - self.r1) / (self.r2 - self.r1)
        t = np.clip(t, 0.0, 1.0)
        a = _glue(1.0 - t)
        b = _glue(t)
        return a / (a + b + 1e-300)

    def derivative(self, r):
        """d rho / d r (analytic, vanishes outside (r1, r2))."""
        r = np.asarray(r, dtype=float)
        t = (r - self.r1) / (self.r2 - self.r1)
        inside = (t > 0.0) & (t < 1.0)
        out = np.zeros_like(r, dtype=float)
        ti = t[inside]
        a = _glue(1.0 - ti)
        b = _glue(ti)
        ap = -_glue_prime(1.0 - ti)
        bp = _glue_prime(ti)
        out[inside] = (ap * b - a * bp) / (a + b) ** 2 / (self.r2 - self.r1)
        return out

    def dbar(self, z):
        """Dbar rho at chart points z: rho'(|z|) * z / |z|."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        safe = np.where(r > 0, r, 1.0)
        return self.derivative(r) * z / safe

    def dzbar(self, z):
        """d rho / d zbar = (1/2) Dbar rho."""
        return 0.5 * self.dbar(z)


def bump_function(surface, r1, r2):
    """Smooth plateau bump in the chart of `surface`.

    The plateau must fit inside the chart: r2 < 1 on the disc, r2 < 1/2
    on the torus (so the support clears the periodic seam).
    """
    limit = 1.0 if surface.model == "disc" else 0.5
    if not (0 < r1 < r2 < limit):
        raise ValueError(f"need 0 < r1 < r2 < {limit} on the {surface.model}")
    return SmoothBump(r1, r2)


# ---------------------------------------------------------------------------
# gauge identity
# ---------------------------------------------------------------------------

def _pointwise_expm(A):
    """expm of a stack (n, k, k); scalar fast path for k = 1."""
    k = A.shape[-1]
    if k == 1:
        return np.exp(A)
    out = np.empty_like(A)
    for i in range(A.shape[0]):
        out[i] = expm(A[i])
    return out


def gauge_identity_check(surface, f, rho, section, r_min=None, r_max=None):
    """Relative residual of exp(-rho f) Dbar exp(rho f) = Dbar + f (Dbar rho).

    Both sides act on `section` (a callable z -> vector of length rank, or
    z -> scalar for rank 1). The residual is measured in the weighted face
    norm over the annulus r_min <= r_face <= r_max; the annulus defaults to
    [rho.r1, 1 - 2h], which keeps the pole of f and the Dirichlet ghost row
    out of the comparison. Node values of exp(rho f) are only needed one
    ring below the annulus, so they stay bounded.
    """
    if surface.model != "disc":
        raise ValueError("the gauge identity check runs on the disc model")
    h = surface.h
    if r_min is None:
        r_min = rho.r1
    if r_max is None:
        r_max = 1.0 - 2.0 * h
    rank = f.rank
    zn = surface.node_z
    zf = surface.face_z
    rn = np.abs(zn)
    rf = np.abs(zf)

    sv = np.asarray([np.atleast_1d(section(z)) for z in zn], dtype=complex)
    if sv.shape[1] != rank:
        raise ValueError("section rank disagrees with cocycle rank")
    svf = np.asarray([np.atleast_1d(section(z)) for z in zf], dtype=complex)

    # nodes feeding only discarded faces can be zeroed; this keeps the
    # exponential away from the pole of f
    cutoff = r_min - 2.0 * h
    live_n = rn >= cutoff
    live_f = rf >= cutoff

    A_n = np.zeros((surface.n_nodes, rank, rank), dtype=complex)
    A_n[live_n] = rho(rn[live_n])[:, None, None] * f.evaluate(zn[live_n])
    A_f = np.zeros((surface.n_faces, rank, rank), dtype=complex)
    A_f[live_f] = rho(rf[live_f])[:, None, None] * f.evaluate(zf[live_f])

    u = np.einsum("nij,nj->ni", _pointwise_expm(A_n), sv)
    u[~live_n] = 0.0
    lhs = surface.apply_dbar(u)
    lhs = np.einsum("nij,nj->ni", _pointwise_expm(-A_f), lhs)

    rhs = surface.apply_dbar(sv)
    fval = np.zeros((surface.n_faces, rank, rank), dtype=complex)
    fval[live_f] = f.evaluate(zf[live_f])
    rhs = rhs + rho.dbar(zf)[:, None] * np.einsum("nij,nj->ni", fval, svf)

    mask = (rf >= r_min) & (rf <= r_max)
    w = surface.face_w[mask][:, None]
    num = np.sqrt(np.sum(w * np.abs(lhs[mask] - rhs[mask]) ** 2))
    den = np.sqrt(np.sum(w * np.abs(rhs[mask]) ** 2))
    if den == 0.0:
        raise ValueError("reference side vanishes on the annulus")
    return float(num / den)
