"""Spherical-harmonic analysis on the 2-sphere.

Coefficient convention: a band-limited field is a table ``c[k, K + m]`` of
complex coefficients for degrees ``0 <= k <= K`` and orders ``|m| <= k`` in
the orthonormal basis

    Y_{k,m}(theta, phi) = Q_{k,|m|}(cos theta) * exp(i m phi) / sqrt(2 pi),

where the Q_{k,m} are fully normalized associated Legendre functions
(``int_{-1}^{1} Q_{k,m}^2 dx = 1``) without the Condon-Shortley phase, so
``conj(Y_{k,m}) = Y_{k,-m}`` and ``int |Y_{k,m}|^2 = 1`` on the area-4pi
sphere.  Grid quadrature is Gauss-Legendre in colatitude (2K+2 nodes) times
equispaced longitudes (4K+2 nodes), which integrates pointwise products of
two band-K fields exactly, so quadratic nonlinearities are alias-free.

The Japanese bracket used for Sobolev weights and dyadic blocks is
``<x> = sqrt(1 + x^2)``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import ConfigurationError

SQRT2PI = np.sqrt(2.0 * np.pi)


def bracket(x):
    """Japanese bracket <x> = (1 + x^2)^(1/2)."""
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


# ---------------------------------------------------------------------------
# spectrum models


@dataclass(frozen=True)
class SpectrumModel:
    """Laplace-Beltrami eigenvalue generator.

    kind="sphere": mu_k = k (k + d - 1) on the d-sphere.
    kind="zoll":   mu_k = (k + z0/4)^2, the cluster midpoints of a synthetic
                   Zoll spectrum whose bands are [(k+z0/4)^2 - E, ... + E].

    ``mu_num``/``mu_den`` expose the eigenvalues as exact integers scaled by
    a common denominator (1 for spheres, 16 for Zoll), which the resonance
    counting uses to avoid floating point entirely.
    """

    kind: str = "sphere"
    dimension: int = 2
    z0: int = 0
    band_halfwidth: float = 0.0

    def __post_init__(self):
        if self.kind not in ("sphere", "zoll"):
            raise ConfigurationError(f"unknown spectrum kind {self.kind!r}")
        if self.kind == "sphere" and self.dimension < 2:
            raise ConfigurationError("sphere dimension must be >= 2")
        if self.kind == "zoll" and self.z0 < 0:
            raise ConfigurationError("Zoll offset z0 must be >= 0")

    @property
    def mu_den(self) -> int:
        return 1 if self.kind == "sphere" else 16

    def mu_num(self, k):
        """Integer numerator of mu_k over ``mu_den``."""
        k = np.asarray(k, dtype=np.int64)
        if self.kind == "sphere":
            return k * (k + self.dimension - 1)
        return (4 * k + self.z0) ** 2

    def eigenvalue(self, k):
        if np.any(np.asarray(k) < 0):
            raise ConfigurationError("degree k must be >= 0")
        return self.mu_num(k) / float(self.mu_den)


SPHERE2 = SpectrumModel("sphere", 2)


def eigenvalue(model: SpectrumModel, k):
    """mu_k for the given model; k(k+d-1) on spheres, (k+z0/4)^2 for Zoll."""
    return model.eigenvalue(k)


def dyadic_degrees(model: SpectrumModel, n_block: int, kmax: int):
    """Degrees k <= kmax with N <= <mu_k>^(1/2) < 2N, decided in integers.

    The window is equivalent to N^4 <= 1 + mu_k^2 < 16 N^4; with mu = num/D
    this is D^2 N^4 <= D^2 + num^2 < 16 D^2 N^4, an exact integer test.
    """
    if n_block < 1 or (n_block & (n_block - 1)) != 0:
        raise ConfigurationError("dyadic block index must be a power of two")
    if kmax > 20000 or n_block > 4096:
        raise ConfigurationError("block test would overflow int64")
    k = np.arange(kmax + 1, dtype=np.int64)
    num = model.mu_num(k)
    d2 = np.int64(model.mu_den) ** 2
    val = d2 + num * num
    n4 = np.int64(n_block) ** 4
    mask = (d2 * n4 <= val) & (val < 16 * d2 * n4)
    return k[mask]


def dyadic_blocks(model: SpectrumModel, kmax: int):
    """All nonempty dyadic blocks covering degrees 0..kmax, as {N: degrees}."""
    out = {}
    n = 1
    while True:
        deg = dyadic_degrees(model, n, kmax)
        if deg.size:
            out[n] = deg
        # <mu_kmax>^(1/2) < 2N for N beyond the last block
        if n > 2 * bracket(model.eigenvalue(kmax)) ** 0.5:
            break
        n *= 2
    return out


# ---------------------------------------------------------------------------
# grid and Legendre tables


def _legendre_tables(kmax: int, x: np.ndarray):
    """Fully normalized associated Legendre functions on the nodes ``x``.

    Returns a list ``tab`` with ``tab[m]`` of shape (kmax - m + 1, len(x)),
    row j holding Q_{m+j, m}(x).  Upward three-term recurrence in the degree
    for each fixed order; stable for kmax into the thousands.
    """
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    tables = []
    qmm = np.full_like(x, 1.0 / np.sqrt(2.0))
    for m in range(kmax + 1):
        nk = kmax - m + 1
        tab = np.empty((nk, x.size))
        tab[0] = qmm
        if nk > 1:
            tab[1] = np.sqrt(2.0 * m + 3.0) * x * qmm
        for k in range(m + 2, kmax + 1):
            a = np.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = np.sqrt(((k - 1.0) ** 2 - m * m) / (4.0 * (k - 1.0) ** 2 - 1.0))
            tab[k - m] = a * (x * tab[k - m - 1] - b * tab[k - m - 2])
        tables.append(tab)
        qmm = qmm * s * np.sqrt((2.0 * m + 3.0) / (2.0 * m + 2.0))
    return tables


class SphereGrid:
    """Colatitude-longitude quadrature grid with precomputed Legendre tables.

    By default n_theta = 2K+2 Gauss-Legendre nodes in x = cos(theta) and
    n_phi = 4K+2 equispaced longitudes, which integrates products of two
    band-K fields exactly (integrands of degree up to 3K during analysis).
    ``quad_degree`` overrides the polynomial degree the quadrature must
    integrate exactly; norm-only consumers pass a smaller value than the
    default 4K+1 to trade analysis headroom for speed.  Immutable after
    construction and shareable.
    """

    def __init__(self, kmax: int, quad_degree: int | None = None):
        if kmax < 1:
            raise ConfigurationError("band limit K must be >= 1")
        self.K = kmax
        if quad_degree is None:
            self.n_theta = 2 * kmax + 2
            self.n_phi = 4 * kmax + 2
        else:
            if quad_degree < 2 * kmax:
                raise ConfigurationError(
                    "quad_degree below 2K would break basis orthonormality")
            self.n_theta = (quad_degree + 2) // 2
            self.n_phi = quad_degree + 2
        x, w = roots_legendre(self.n_theta)
        self.x = x
        self.w = w
        self.theta = np.arccos(x)
        self.phi = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        self.legendre = _legendre_tables(kmax, x)
        # quadrature weight per grid point (theta row i, any phi column)
        self.point_weight = w * (2.0 * np.pi / self.n_phi)

    def integrate(self, values):
        """Quadrature of grid values over the sphere, sum w_i dphi v(i,j)."""
        values = np.asarray(values)
        return np.einsum("...ij,i->...", values, self.point_weight)

    def __repr__(self):
        return f"SphereGrid(K={self.K}, n_theta={self.n_theta}, n_phi={self.n_phi})"


def build_grid(kmax: int) -> SphereGrid:
    return SphereGrid(kmax)


# ---------------------------------------------------------------------------
# spectral fields


class SpectralField:
    """Complex coefficient table over (k, m), k <= K, |m| <= k."""

    __slots__ = ("K", "coeffs")

    def __init__(self, kmax: int, coeffs=None):
        self.K = int(kmax)
        if coeffs is None:
            self.coeffs = np.zeros((self.K + 1, 2 * self.K + 1), dtype=complex)
        else:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != (self.K + 1, 2 * self.K + 1):
                raise ConfigurationError(
                    f"coefficient table must have shape {(self.K + 1, 2 * self.K + 1)}"
                )
            self.coeffs = coeffs.copy()
            self.coeffs *= order_mask(self.K)

    @classmethod
    def zeros(cls, kmax: int):
        return cls(kmax)

    @classmethod
    def basis(cls, kmax: int, k: int, m: int):
        if not (0 <= k <= kmax and abs(m) <= k):
            raise ConfigurationError("basis index out of range")
        f = cls(kmax)
        f.coeffs[k, kmax + m] = 1.0
        return f

    @classmethod
    def random(cls, kmax: int, rng, decay: float = 0.0):
        """Complex Gaussian coefficients, optionally damped by exp(-(k/decay)^2)."""
        f = cls(kmax)
        shape = f.coeffs.shape
        g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if decay > 0:
            g *= np.exp(-((np.arange(kmax + 1) / decay) ** 2))[:, None]
        f.coeffs = g * order_mask(kmax)
        return f

    def copy(self):
        out = SpectralField.__new__(SpectralField)
        out.K = self.K
        out.coeffs = self.coeffs.copy()
        return out

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def scaled(self, c):
        out = self.copy()
        out.coeffs *= c
        return out

    def conjugate_field(self):
        """Coefficients of the pointwise conjugate: c'_{k,m} = conj(c_{k,-m})."""
        out = self.copy()
        out.coeffs = np.conj(self.coeffs[:, ::-1])
        return out

    def pad_to(self, kmax: int):
        if kmax < self.K:
            raise ConfigurationError("cannot pad to a smaller band limit")
        if kmax == self.K:
            return self
        out = SpectralField(kmax)
        out.coeffs[: self.K + 1, kmax - self.K : kmax + self.K + 1] = self.coeffs
        return out

    def __add__(self, other):
        _check_same_band(self, other)
        out = self.copy()
        out.coeffs += other.coeffs
        return out

    def __sub__(self, other):
        _check_same_band(self, other)
        out = self.copy()
        out.coeffs -= other.coeffs
        return out

    def __mul__(self, c):
        return self.scaled(c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField(K={self.K}, |c|={self.l2_norm():.6g})"


def order_mask(kmax: int):
    """Boolean validity mask for the (k, K+m) table: |m| <= k."""
    k = np.arange(kmax + 1)[:, None]
    m = np.arange(-kmax, kmax + 1)[None, :]
    return np.abs(m) <= k


def _check_same_band(f: SpectralField, g: SpectralField):
    if f.K != g.K:
        raise ConfigurationError(f"band-limit mismatch: {f.K} vs {g.K}")


# ---------------------------------------------------------------------------
# transforms (batched over leading axes)


def synthesize_table(coeffs: np.ndarray, grid: SphereGrid) -> np.ndarray:
    """Evaluate coefficient tables on the grid.

    coeffs has shape (..., K+1, 2K+1) with K <= grid.K; returns grid values of
    shape (..., n_theta, n_phi).
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    kfield = coeffs.shape[-2] - 1
    if kfield > grid.K:
        raise ConfigurationError("field band limit exceeds grid band limit")
    lead = coeffs.shape[:-2]
    spec = np.zeros(lead + (grid.n_theta, grid.n_phi), dtype=complex)
    for m in range(-kfield, kfield + 1):
        am = abs(m)
        tab = grid.legendre[am][: kfield - am + 1]  # (nk, n_theta)
        col = coeffs[..., am:, kfield + m]  # (..., nk)
        spec[..., :, m % grid.n_phi] = col @ tab
    return np.fft.ifft(spec, axis=-1) * (grid.n_phi / SQRT2PI)


def analyze_table(values: np.ndarray, grid: SphereGrid) -> np.ndarray:
    """Project grid values onto the basis; inverse of synthesize_table for
    band-limited data.  Returns tables of shape (..., K+1, 2K+1) at K = grid.K.
    """
    values = np.asarray(values, dtype=complex)
    if values.shape[-2:] != (grid.n_theta, grid.n_phi):
        raise ConfigurationError("grid values have wrong shape for this grid")
    kmax = grid.K
    four = np.fft.fft(values, axis=-1)
    four *= (2.0 * np.pi / grid.n_phi / SQRT2PI) * grid.w[:, None]
    out = np.zeros(values.shape[:-2] + (kmax + 1, 2 * kmax + 1), dtype=complex)
    for m in range(-kmax, kmax + 1):
        am = abs(m)
        tab = grid.legendre[am]  # (nk, n_theta)
        out[..., am:, kmax + m] = four[..., :, m % grid.n_phi] @ tab.T
    return out


def synthesize(field: SpectralField, grid: SphereGrid) -> np.ndarray:
    """Grid values of the harmonic expansion (a GridField array)."""
    return synthesize_table(field.coeffs, grid)


def analyze(values: np.ndarray, grid: SphereGrid) -> SpectralField:
    out = SpectralField(grid.K)
    out.coeffs = analyze_table(values, grid)
    return out


# ---------------------------------------------------------------------------
# projectors and norms


def project_degree(field: SpectralField, k: int) -> SpectralField:
    """Keep only the degree-k row."""
    if not 0 <= k <= field.K:
        raise ConfigurationError("degree out of range")
    out = SpectralField(field.K)
    out.coeffs[k] = field.coeffs[k]
    return out


def dyadic_project(field: SpectralField, n_block: int, model: SpectrumModel = SPHERE2):
    """Dyadic Littlewood-Paley block: degrees with N <= <mu_k>^(1/2) < 2N."""
    deg = dyadic_degrees(model, n_block, field.K)
    out = SpectralField(field.K)
    if deg.size:
        out.coeffs[deg] = field.coeffs[deg]
    return out


def sobolev_norm(field: SpectralField, s: float, model: SpectrumModel = SPHERE2):
    """H^s norm (sum_k <mu_k>^s |c_{k,m}|^2)^(1/2)."""
    mu = model.eigenvalue(np.arange(field.K + 1))
    wk = bracket(mu) ** s
    return float(np.sqrt(np.sum(wk[:, None] * np.abs(field.coeffs) ** 2)))


def gradient_norm_sq(field: SpectralField, model: SpectrumModel = SPHERE2):
    """int |grad f|^2 = sum_k mu_k |c_{k,m}|^2, computed spectrally."""
    mu = model.eigenvalue(np.arange(field.K + 1))
    return float(np.sum(mu[:, None] * np.abs(field.coeffs) ** 2))


def l2_inner(f: SpectralField, g: SpectralField) -> complex:
    """Coefficient-space pairing sum conj(c^f) c^g; equals the grid integral
    of conj(f) g for band-limited fields."""
    _check_same_band(f, g)
    return complex(np.vdot(f.coeffs, g.coeffs))
