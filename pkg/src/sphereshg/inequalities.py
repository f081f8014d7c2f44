"""Interpolation inequality checks and the a-priori H^1 ceiling.

The two-term Gagliardo-Nirenberg form on a compact surface (p = q = 2),

    ||f||_{L^r} <= A^(t/2) ||grad f||^t ||f||^(1-t) + B^(t/2) ||f||,
    t = d/2 - d/r,

is probed empirically: gn_ratio returns the scale-free health ratio whose
boundedness over a corpus evidences the inequality, and calibrate_gn_constant
finds the smallest A (B fixed) making it hold on a corpus, by bisection.
The optimal A is not computable in closed form here, so (A, B) are inputs
everywhere downstream.

apriori_h1_bound evaluates the closed-form global H^1 ceiling implied by mass
and energy conservation together with the r = 4 inequality, verbatim:

    |1-a| (4/(4-d)) M0/(2s) + C^(4/(4-d))
        + (4/(4-d)) (B^(d/4) sqrt(2/s) M0^(3/2) + |E0|),
    C = A^(d/4) sqrt(2/s) M0^((6-d)/4),     d in {2, 3}.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .spectral import (
    SPHERE2,
    SpectralField,
    SpectrumModel,
    SphereGrid,
    gradient_norm_sq,
    synthesize_table,
)


def lr_norm(values: np.ndarray, r: float, grid: SphereGrid) -> float:
    """L^r norm of grid values by quadrature."""
    if r < 1:
        raise ConfigurationError("r must be >= 1")
    return float(grid.integrate(np.abs(values) ** r) ** (1.0 / r))


@dataclass(frozen=True)
class GNParams:
    """Exponents of the general two-term interpolation inequality

        ||u||_{L^r}^{p/t} <= (A ||grad u||_{L^p}^p + B ||u||_{L^p}^p)
                             ||u||_{L^q}^{p(1-t)/t},

    with t = d p (r - q) / (r (q (p - d) + d p)).  The checks in this module
    use the p = q = 2 specialization, where t reduces to d/2 - d/r.
    """

    dimension: int
    p: float
    q: float
    r: float
    a_const: float = 1.0
    b_const: float = 1.0

    def __post_init__(self):
        d = self.dimension
        if not 1 < self.p <= 2:
            raise ConfigurationError("need 1 < p <= 2")
        critical = d * self.p / (d - self.p) if self.p < d else np.inf
        if not 1 <= self.q < self.r < critical:
            raise ConfigurationError("need 1 <= q < r < dp/(d-p)")
        if not 0 < self.theta <= 1:
            raise ConfigurationError("interpolation exponent outside (0, 1]")

    @property
    def theta(self) -> float:
        d, p, q, r = self.dimension, self.p, self.q, self.r
        return d * p * (r - q) / (r * (q * (p - d) + d * p))


@dataclass(frozen=True)
class GNRecord:
    lhs: float        # ||f||_{L^r}
    grad_term: float  # ||grad f||^t ||f||^(1-t)
    mass_term: float  # ||f||_{L^2}
    ratio: float      # lhs / (grad_term + mass_term)


def gn_theta(r: float, dimension: int = 2) -> float:
    return dimension / 2.0 - dimension / r


def gn_ratio(f: SpectralField, r: float, grid: SphereGrid,
             model: SpectrumModel = SPHERE2) -> GNRecord:
    """Scale-free interpolation ratio for one field (d = 2, 2 < r < inf)."""
    if not r > 2:
        raise ConfigurationError("need r > 2 for the two-dimensional form")
    t = gn_theta(r, 2)
    lhs = lr_norm(synthesize_table(f.coeffs, grid), r, grid)
    grad = np.sqrt(gradient_norm_sq(f, model))
    l2 = f.l2_norm()
    grad_term = grad**t * l2 ** (1.0 - t)
    denom = grad_term + l2
    return GNRecord(lhs=lhs, grad_term=float(grad_term), mass_term=l2,
                    ratio=float(lhs / denom) if denom > 0 else 0.0)


def gn_holds(records, a_const: float, b_const: float, r: float) -> bool:
    """Does the two-term inequality with constants (A, B) hold on the corpus?"""
    t = gn_theta(r, 2)
    for rec in records:
        rhs = a_const ** (t / 2.0) * rec.grad_term + b_const ** (t / 2.0) * rec.mass_term
        if rec.lhs > rhs * (1.0 + 1e-12):
            return False
    return True


def calibrate_gn_constant(records, r: float, b_const: float = 1.0,
                          tol: float = 1e-6) -> float:
    """Smallest A (to ``tol``) such that the inequality holds on the corpus
    with B fixed, by bisection."""
    hi = 1.0
    for _ in range(200):
        if gn_holds(records, hi, b_const, r):
            break
        hi *= 2.0
    else:
        raise ConfigurationError("corpus not coverable; is B large enough?")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gn_holds(records, mid, b_const, r):
            hi = mid
        else:
            lo = mid
    return hi


def apriori_h1_bound(sigma: float, alpha: float, dimension: int,
                     mass0: float, energy0: float,
                     a_const: float, b_const: float) -> float:
    """Closed-form H^1 ceiling from conserved mass/energy; d in {2, 3} only."""
    if dimension not in (2, 3):
        raise ConfigurationError("the H^1 ceiling degenerates outside d in {2, 3}")
    if sigma <= 0:
        raise ConfigurationError("sigma must be positive")
    d = dimension
    inv_factor = 4.0 / (4.0 - d)
    root = np.sqrt(2.0 / sigma)
    c_const = a_const ** (d / 4.0) * root * mass0 ** ((6.0 - d) / 4.0)
    term1 = abs(1.0 - alpha) * inv_factor * mass0 / (2.0 * sigma)
    term2 = c_const ** (4.0 / (4.0 - d))
    term3 = inv_factor * (b_const ** (d / 4.0) * root * mass0**1.5 + abs(energy0))
    return float(term1 + term2 + term3)


def h1_pair_energy_sq(v: SpectralField, u: SpectralField,
                      model: SpectrumModel = SPHERE2) -> float:
    """||(v,u)||^2 in the gradient form sum (1 + mu_k)|c|^2, the quantity the
    H^1 ceiling actually bounds."""
    out = 0.0
    for f in (v, u):
        out += gradient_norm_sq(f, model) + float(np.sum(np.abs(f.coeffs) ** 2))
    return out
