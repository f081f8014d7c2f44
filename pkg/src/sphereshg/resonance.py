"""Exact Diophantine engine for resonance counting.

Everything here is integer arithmetic.  The resonance window
|m - (mu_k/s - mu_l)| <= 1/2 with s = beta/theta and mu = num/D (D = 1 on
spheres, 16 for the synthetic Zoll midpoints) is cleared by cross
multiplication:

    |2 D beta m - 2 theta num_k + 2 beta num_l| <= D beta.

Dyadic windows on <mu>^(1/2) are half-open, the +-1/2 window is closed.
Degrees start at k = 0.

Hot kernels are numba-compiled when available; pure-numpy fallbacks are
selected by SPHERESHG_NO_NUMBA=1 (see accel.py).  Both paths are exact and
agree bit for bit.
"""

from dataclasses import dataclass
from math import comb, isqrt

import numpy as np

from .accel import USE_NUMBA, maybe_njit
from .errors import ConfigurationError


@dataclass(frozen=True)
class SigmaRational:
    """Dispersion ratio s = beta/theta kept as the literal integer pair.

    No implicit reduction: the transformed Diophantine equation uses beta and
    theta exactly as given.
    """

    beta: int
    theta: int

    def __post_init__(self):
        if self.beta < 1 or self.theta < 1:
            raise ConfigurationError("beta and theta must be positive integers")

    @property
    def value(self) -> float:
        return self.beta / self.theta

    @property
    def is_perfect_square_pair(self) -> bool:
        return isqrt(self.beta) ** 2 == self.beta and isqrt(self.theta) ** 2 == self.theta


def _require_model(model):
    # local import: dynamics imports this module, avoid a cycle at load time
    from .spectral import SPHERE2, SpectrumModel

    if model is None:
        return SPHERE2
    if not isinstance(model, SpectrumModel):
        raise ConfigurationError("model must be a SpectrumModel")
    return model


def block_degree_array(model, n_block: int) -> np.ndarray:
    from .spectral import dyadic_degrees

    # degrees in the block satisfy mu_k < 4N^2, hence k < 2N for both models
    return dyadic_degrees(model, n_block, 2 * n_block + 2).astype(np.int64)


def admissible_m_range(n_block: int, l_block: int, sigma: SigmaRational):
    """Closed integer interval [-4L^2 - 1, floor(4 N^2 / s) + 1] outside of
    which the resonance set is empty."""
    lo = -4 * l_block * l_block - 1
    hi = (4 * n_block * n_block * sigma.theta) // sigma.beta + 1
    return lo, hi


# ---------------------------------------------------------------------------
# counting kernels (numba path: explicit loops; numpy path: vectorized)


def _accumulate_kernel(num_k, num_l, two_theta, two_beta, dbeta, two_dbeta,
                       m_lo, diff):
    # range-add trick: diff[a] += 1, diff[b+1] -= 1, counts = cumsum(diff)
    size = diff.size
    for i in range(num_k.size):
        a = two_theta * num_k[i]
        for j in range(num_l.size):
            c = a - two_beta * num_l[j]
            lo = c - dbeta
            hi = c + dbeta
            mlo = -((-lo) // two_dbeta)
            mhi = hi // two_dbeta
            ia = mlo - m_lo
            ib = mhi - m_lo + 1
            if ia < 0:
                ia = 0
            if ib > size - 1:
                ib = size - 1
            if ia < ib:
                diff[ia] += 1
                diff[ib] -= 1


_accumulate_njit = maybe_njit(_accumulate_kernel)


def _accumulate_numpy(num_k, num_l, two_theta, two_beta, dbeta, two_dbeta,
                      m_lo, diff):
    c = (two_theta * num_k)[:, None] - (two_beta * num_l)[None, :]
    lo = c - dbeta
    hi = c + dbeta
    mlo = -((-lo) // two_dbeta)
    mhi = hi // two_dbeta
    ia = np.clip(mlo.ravel() - m_lo, 0, diff.size - 1)
    ib = np.clip(mhi.ravel() - m_lo + 1, 0, diff.size - 1)
    keep = ia < ib
    np.add.at(diff, ia[keep], 1)
    np.add.at(diff, ib[keep], -1)


def lambda_count_table(n_block: int, l_block: int, sigma: SigmaRational,
                       model=None, use_numba: bool | None = None):
    """Cardinality of the resonance set for every admissible m.

    Returns (m_lo, counts) where counts[m - m_lo] is exact.
    """
    model = _require_model(model)
    _check_dyadic(n_block, l_block)
    num_k = model.mu_num(block_degree_array(model, n_block))
    num_l = model.mu_num(block_degree_array(model, l_block))
    m_lo, m_hi = admissible_m_range(n_block, l_block, sigma)
    diff = np.zeros(m_hi - m_lo + 2, dtype=np.int64)
    d = model.mu_den
    args = (num_k, num_l, np.int64(2 * sigma.theta), np.int64(2 * sigma.beta),
            np.int64(d * sigma.beta), np.int64(2 * d * sigma.beta),
            np.int64(m_lo), diff)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and num_k.size and num_l.size:
        _accumulate_njit(*args)
    else:
        _accumulate_numpy(*args)
    return m_lo, np.cumsum(diff[:-1])


def count_lambda(n_block: int, l_block: int, sigma: SigmaRational,
                 model=None, m: int = 0) -> int:
    """Exact cardinality of the resonance set at a single m."""
    model = _require_model(model)
    _check_dyadic(n_block, l_block)
    num_k = model.mu_num(block_degree_array(model, n_block))
    num_l = model.mu_num(block_degree_array(model, l_block))
    if not (num_k.size and num_l.size):
        return 0
    d = model.mu_den
    c = (2 * sigma.theta * num_k)[:, None] - (2 * sigma.beta * num_l)[None, :]
    window = np.abs(2 * d * sigma.beta * int(m) - c) <= d * sigma.beta
    return int(window.sum())


def lambda_members(n_block: int, l_block: int, sigma: SigmaRational,
                   model=None, m: int = 0):
    """The (k, l) pairs of the resonance set at m."""
    model = _require_model(model)
    deg_k = block_degree_array(model, n_block)
    deg_l = block_degree_array(model, l_block)
    if not (deg_k.size and deg_l.size):
        return []
    num_k = model.mu_num(deg_k)
    num_l = model.mu_num(deg_l)
    d = model.mu_den
    c = (2 * sigma.theta * num_k)[:, None] - (2 * sigma.beta * num_l)[None, :]
    ii, jj = np.nonzero(np.abs(2 * d * sigma.beta * int(m) - c) <= d * sigma.beta)
    return list(zip(deg_k[ii].tolist(), deg_l[jj].tolist()))


def sup_count(n_block: int, l_block: int, sigma: SigmaRational, model=None):
    """(m*, sup) maximizing the per-m cardinality; ties resolved to the
    smallest m."""
    m_lo, counts = lambda_count_table(n_block, l_block, sigma, model)
    j = int(np.argmax(counts))
    return m_lo + j, int(counts[j])


@dataclass(frozen=True)
class CountingResult:
    """Resonance cardinalities of one (N, L) cell over the admissible m."""

    n_block: int
    l_block: int
    dimension: int
    sigma: SigmaRational
    m_lo: int
    counts: np.ndarray
    m_star: int
    sup: int

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def count_cell(n_block: int, l_block: int, sigma: SigmaRational,
               model=None) -> CountingResult:
    """Full per-m cardinality table of one cell plus its maximizer."""
    model = _require_model(model)
    m_lo, counts = lambda_count_table(n_block, l_block, sigma, model)
    j = int(np.argmax(counts))
    dim = model.dimension if model.kind == "sphere" else 2
    return CountingResult(n_block, l_block, dim, sigma, m_lo, counts,
                          m_lo + j, int(counts[j]))


def _check_dyadic(*blocks):
    for b in blocks:
        if b < 1 or (b & (b - 1)) != 0:
            raise ConfigurationError("N and L must be powers of two")


# ---------------------------------------------------------------------------
# transformed (completed-square) form


def transformed_residual(k: int, l: int, m: int, sigma: SigmaRational,
                         dimension: int = 2) -> int:
    """Integer residual T = theta (2k+d-1)^2 - beta (2l+d-1)^2
    - (4 beta m + (theta - beta)(d-1)^2); membership forces |T| <= 2 beta."""
    b, t = sigma.beta, sigma.theta
    d1 = dimension - 1
    kt2 = t * (2 * k + d1) ** 2
    lb2 = b * (2 * l + d1) ** 2
    return kt2 - lb2 - (4 * b * m + (t - b) * d1 * d1)


def check_transformed_members(members, m: int, sigma: SigmaRational,
                              dimension: int = 2):
    """Witnesses (k, l, m, residual) violating the transformed inequality."""
    bad = []
    for k, l in members:
        r = transformed_residual(k, l, m, sigma, dimension)
        if abs(r) > 2 * sigma.beta:
            bad.append((k, l, m, r))
    return bad


def verify_transformed_equation(n_block: int, l_block: int,
                                sigma: SigmaRational, dimension: int = 2,
                                samples: int | None = None, model=None):
    """Check that every enumerated resonance pair satisfies the transformed
    integer inequality, for every admissible m (or a deterministic stride
    subsample of `samples` values).  Returns (ok, witnesses).
    """
    if not sigma.is_perfect_square_pair:
        raise ConfigurationError(
            "transformed equation requires beta and theta to be perfect squares")
    if model is None:
        from .spectral import SpectrumModel

        model = SpectrumModel("sphere", dimension)
    model = _require_model(model)
    if model.kind != "sphere" or model.dimension != dimension:
        raise ConfigurationError(
            "the completed-square inequality is specific to sphere eigenvalues "
            f"in dimension {dimension}")
    m_lo, m_hi = admissible_m_range(n_block, l_block, sigma)
    ms = np.arange(m_lo, m_hi + 1)
    if samples is not None and samples < ms.size:
        ms = ms[:: max(1, ms.size // samples)]
    witnesses = []
    for m in ms.tolist():
        members = lambda_members(n_block, l_block, sigma, model, m)
        witnesses.extend(check_transformed_members(members, m, sigma, dimension))
    return len(witnesses) == 0, witnesses


# ---------------------------------------------------------------------------
# divisor machinery


def _divisor_kernel(n):
    count = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            count += 2
            if d * d == n:
                count -= 1
        d += 1
    return count


_divisor_njit = maybe_njit(_divisor_kernel)


def divisor_count(n: int) -> int:
    """Number of positive divisors, by trial division up to sqrt(n)."""
    if n < 1:
        raise ConfigurationError("divisor count needs n >= 1")
    if USE_NUMBA:
        return int(_divisor_njit(np.int64(n)))
    return _divisor_kernel(int(n))


def _divisor_range_kernel(nmax, out):
    for n in range(1, nmax + 1):
        count = 0
        d = 1
        while d * d <= n:
            if n % d == 0:
                count += 2
                if d * d == n:
                    count -= 1
            d += 1
        out[n] = count


_divisor_range_njit = maybe_njit(_divisor_range_kernel)


def _divisor_range_numpy(nmax, out):
    # vectorized trial division: same pairing logic, no sieve
    n = np.arange(nmax + 1, dtype=np.int64)
    counts = np.zeros(nmax + 1, dtype=np.int64)
    for d in range(1, isqrt(nmax) + 1):
        hit = (n % d == 0) & (n >= d * d)
        counts[hit] += 2
        if d * d <= nmax:
            counts[d * d] -= 1
    counts[0] = 0
    out[:] = counts


def divisor_count_range(nmax: int, use_numba: bool | None = None) -> np.ndarray:
    """divisor_count for every 1 <= n <= nmax; index 0 unused."""
    if nmax < 1:
        raise ConfigurationError("nmax must be >= 1")
    out = np.zeros(nmax + 1, dtype=np.int64)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        _divisor_range_njit(np.int64(nmax), out)
    else:
        _divisor_range_numpy(nmax, out)
    return out


def _lattice_kernel(m, kk, sign):
    # pairs (x, y) in N^2 with K <= x <= 2K and x^2 + sign y^2 = m
    count = 0
    for x in range(kk, 2 * kk + 1):
        t = m - x * x if sign > 0 else x * x - m
        if t < 0:
            continue
        r = int(np.sqrt(t))
        while r * r > t:
            r -= 1
        while (r + 1) * (r + 1) <= t:
            r += 1
        if r * r == t:
            count += 1
    return count


_lattice_njit = maybe_njit(_lattice_kernel)


def lattice_count(m: int, kk: int, sign: str = "-") -> int:
    """Exact count of (x, y) in N^2 with K <= x <= 2K and x^2 +- y^2 = m.

    N includes 0 here; with sign "-" and m = 0 the diagonal x = y gives K+1
    solutions, the degenerate case the divisor bound cannot see.
    """
    if kk < 1:
        raise ConfigurationError("K must be >= 1")
    if sign not in ("+", "-"):
        raise ConfigurationError("sign must be '+' or '-'")
    s = 1 if sign == "+" else -1
    if USE_NUMBA:
        return int(_lattice_njit(np.int64(m), np.int64(kk), np.int64(s)))
    return _lattice_kernel(int(m), int(kk), s)


def lattice_counts_sweep(m_values: np.ndarray, kk: int, sign: str = "-",
                         use_numba: bool | None = None) -> np.ndarray:
    """lattice_count for an array of m values (vectorized fallback path)."""
    if use_numba is None:
        use_numba = USE_NUMBA
    m_values = np.asarray(m_values, dtype=np.int64)
    if use_numba:
        out = np.empty(m_values.size, dtype=np.int64)
        s = np.int64(1 if sign == "+" else -1)
        for i in range(m_values.size):
            out[i] = _lattice_njit(m_values[i], np.int64(kk), s)
        return out
    x = np.arange(kk, 2 * kk + 1, dtype=np.int64)
    if sign == "+":
        t = m_values[:, None] - x[None, :] ** 2
    else:
        t = x[None, :] ** 2 - m_values[:, None]
    ok = t >= 0
    tt = np.where(ok, t, 0)
    r = np.sqrt(tt.astype(np.float64)).astype(np.int64)
    # fix rounding at the edge
    r = np.where(r * r > tt, r - 1, r)
    r = np.where((r + 1) * (r + 1) <= tt, r + 1, r)
    return ((r * r == tt) & ok).sum(axis=1)


# ---------------------------------------------------------------------------
# Zoll spectrum and Weyl counting


@dataclass(frozen=True)
class ZollSpectrum:
    degrees: np.ndarray
    values: np.ndarray     # cluster midpoints (k + z0/4)^2
    intervals: np.ndarray  # (count, 2) band endpoints
    k0: int                # bands with k >= k0 are pairwise disjoint


def zoll_k0(z0: int, e_width: float) -> int:
    """Smallest k with k > E - z0/4 - 1/2 (bands disjoint from there on)."""
    k0 = int(np.floor(e_width - z0 / 4.0 - 0.5)) + 1
    return max(k0, 1)


def zoll_spectrum(z0: int, e_width: float, count: int) -> ZollSpectrum:
    """Perturbed eigenvalues (k + z0/4)^2 for k = 1..count with their bands."""
    if count < 1:
        raise ConfigurationError("count must be >= 1")
    if e_width <= 0:
        raise ConfigurationError("band halfwidth E must be positive")
    ks = np.arange(1, count + 1)
    vals = (ks + z0 / 4.0) ** 2
    intervals = np.stack([vals - e_width, vals + e_width], axis=1)
    return ZollSpectrum(ks, vals, intervals, zoll_k0(z0, e_width))


def harmonic_multiplicity(k: int, dimension: int) -> int:
    """Dimension of spherical harmonics of degree k on S^d (2k+1 for d=2)."""
    d = dimension
    return comb(k + d, d) - comb(k + d - 2, d)


def weyl_ratio(dimension: int, a_cut: float) -> float:
    """Eigenvalue count (with multiplicity) up to a_cut over a_cut^(d/2).

    Guarded at a_cut < 1 (ratio defined to use a_cut = 1 there).
    """
    if dimension < 2:
        raise ConfigurationError("dimension must be >= 2")
    a_cut = max(float(a_cut), 1.0)
    count = 0
    k = 0
    while k * (k + dimension - 1) <= a_cut:
        count += harmonic_multiplicity(k, dimension)
        k += 1
    return count / a_cut ** (dimension / 2.0)
