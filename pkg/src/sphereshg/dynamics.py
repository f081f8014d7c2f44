"""Evolution of the coupled quadratic system on the sphere.

The system evolved (conventional (+,+) signs) is

    i v_t + Lap v - v           = eps1 u conj(v)
    i u_t + Lap u / s - a u / s = eps2 v^2 / (2 s),    s > 0,

with linear groups V(t) = exp(it(Lap - 1)) and U_s(t) = exp(it(Lap/s - a/s))
acting diagonally on coefficients.  Two solvers are provided: fixed-point
iteration on the integral (Duhamel) form, and Strang split-step with exact
linear phases and a pointwise RK4 nonlinear substep on grid values.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, ConfigurationError, PicardConvergenceError
from .resonance import SigmaRational
from .spectral import (
    SPHERE2,
    SpectralField,
    SpectrumModel,
    SphereGrid,
    analyze_table,
    bracket,
    sobolev_norm,
    synthesize_table,
)


@dataclass(frozen=True)
class EvolutionParams:
    """Physical parameters: s = beta/theta > 0 held as an exact rational."""

    sigma: SigmaRational
    alpha: float
    eps1: complex
    eps2: complex
    dispersion_sign: int = 1

    def __post_init__(self):
        if self.dispersion_sign not in (1, -1):
            raise ConfigurationError("dispersion sign must be +1 or -1")

    @property
    def sigma_value(self) -> float:
        return self.sigma.value

    @property
    def conservative(self) -> bool:
        """Mass/energy conservation requires eps1 = conj(eps2)."""
        return complex(self.eps1) == np.conj(complex(self.eps2))


@dataclass(frozen=True)
class GroupSpec:
    """Phase generator exp(it(delta Lap - gamma)): coefficient phase
    exp(-i t (delta mu_k + gamma))."""

    delta: float
    gamma: float


def group_v(p: EvolutionParams) -> GroupSpec:
    return GroupSpec(delta=float(p.dispersion_sign), gamma=1.0)


def group_u(p: EvolutionParams) -> GroupSpec:
    s = p.sigma_value
    return GroupSpec(delta=p.dispersion_sign / s, gamma=p.alpha / s)


def _phases(spec: GroupSpec, t, kmax: int, model: SpectrumModel):
    """Per-degree phase factors exp(-i t (delta mu_k + gamma)); t may be an array."""
    mu = model.eigenvalue(np.arange(kmax + 1))
    rate = spec.delta * mu + spec.gamma
    t = np.asarray(t, dtype=float)
    return np.exp(-1j * t[..., None] * rate)


def linear_propagate(f: SpectralField, spec: GroupSpec, t: float,
                     model: SpectrumModel = SPHERE2) -> SpectralField:
    """Apply the unitary group for time t; moduli of coefficients preserved."""
    out = f.copy()
    out.coeffs *= _phases(spec, float(t), f.K, model)[:, None]
    return out


def nonlinear_terms(v: SpectralField, u: SpectralField, p: EvolutionParams,
                    grid: SphereGrid):
    """Right-hand sides (eps1 u conj(v), eps2 v^2 / (2 s)) as spectral fields,
    evaluated on the grid and truncated at the grid band limit."""
    if v.K > grid.K or u.K > grid.K:
        raise ConfigurationError("grid too small for exact product integration")
    vg = synthesize_table(v.coeffs, grid)
    ug = synthesize_table(u.coeffs, grid)
    f1 = analyze_table(p.eps1 * ug * np.conj(vg), grid)
    f2 = analyze_table(p.eps2 / (2.0 * p.sigma_value) * vg * vg, grid)
    out1 = SpectralField(grid.K)
    out1.coeffs = f1
    out2 = SpectralField(grid.K)
    out2.coeffs = f2
    return out1, out2


@dataclass
class Trajectory:
    """Sampled solution pair: times[j] -> (v_coeffs[j], u_coeffs[j])."""

    times: np.ndarray
    v_coeffs: np.ndarray  # (n_samples, K+1, 2K+1)
    u_coeffs: np.ndarray
    kmax: int
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def v_field(self, j: int) -> SpectralField:
        out = SpectralField(self.kmax)
        out.coeffs = self.v_coeffs[j].copy()
        return out

    def u_field(self, j: int) -> SpectralField:
        out = SpectralField(self.kmax)
        out.coeffs = self.u_coeffs[j].copy()
        return out


def pair_h1_norm(v: SpectralField, u: SpectralField,
                 model: SpectrumModel = SPHERE2) -> float:
    return float(np.hypot(sobolev_norm(v, 1.0, model), sobolev_norm(u, 1.0, model)))


def recommended_panels(kmax: int, p: EvolutionParams, T: float,
                       model: SpectrumModel = SPHERE2) -> int:
    """Panel count for the Duhamel quadrature: at least 64 T f_max where
    f_max is the fastest linear phase rate."""
    mu_top = model.eigenvalue(kmax)
    s = p.sigma_value
    fmax = max(abs(mu_top + 1.0), abs(mu_top / s + p.alpha / s))
    return max(16, int(np.ceil(64.0 * T * fmax)))


def picard_iterate(v0: SpectralField, u0: SpectralField, p: EvolutionParams,
                   T: float, n_t: int, max_iter: int = 25, tol: float = 1e-10,
                   grid: SphereGrid | None = None,
                   model: SpectrumModel = SPHERE2) -> Trajectory:
    """Fixed-point iteration on the integral form of the system.

    The time integrals are composite trapezoid over n_t uniform panels; each
    iterate is computed in twisted variables so the convolution with the
    group reduces to prefix sums.  Iterates until successive sweeps differ by
    less than ``tol`` in sup-over-time H^1 norm of the pair.

    Raises PicardConvergenceError (with the last residual) when max_iter is
    exhausted, the signature of data too large or a horizon too long for the
    contraction to bite.
    """
    if T <= 0 or n_t < 1 or tol <= 0:
        raise ConfigurationError("need T > 0, n_t >= 1, tol > 0")
    if v0.K != u0.K:
        raise ConfigurationError("initial data must share one band limit")
    kmax = v0.K
    if grid is None:
        grid = SphereGrid(kmax)
    times = np.linspace(0.0, T, n_t + 1)
    dt = T / n_t

    gv, gu = group_v(p), group_u(p)
    pv = _phases(gv, times, kmax, model)[:, :, None]   # (B, K+1, 1)
    pu = _phases(gu, times, kmax, model)[:, :, None]
    lin_v = pv * v0.coeffs[None, :, :]
    lin_u = pu * u0.coeffs[None, :, :]

    v_cur, u_cur = lin_v.copy(), lin_u.copy()
    mu = model.eigenvalue(np.arange(kmax + 1))
    h1w = bracket(mu)[None, :, None]

    def sup_h1(dv, du):
        a = np.sum(h1w * np.abs(dv) ** 2, axis=(1, 2))
        b = np.sum(h1w * np.abs(du) ** 2, axis=(1, 2))
        return float(np.sqrt((a + b).max()))

    residual = np.inf
    for it in range(1, max_iter + 1):
        vg = synthesize_table(v_cur, grid)
        ug = synthesize_table(u_cur, grid)
        f1 = analyze_table(p.eps1 * ug * np.conj(vg), grid)
        f2 = analyze_table(p.eps2 / (2.0 * p.sigma_value) * vg * vg, grid)
        del vg, ug
        # twisted integrands: group(-t') applied to the nonlinear terms
        g1 = np.conj(pv) * f1
        g2 = np.conj(pu) * f2
        c1 = np.cumsum(g1, axis=0)
        c2 = np.cumsum(g2, axis=0)
        # composite trapezoid on [0, t_j]: dt (cumsum - (g_0 + g_j)/2)
        i1 = dt * (c1 - 0.5 * (g1[0:1] + g1))
        i2 = dt * (c2 - 0.5 * (g2[0:1] + g2))
        v_new = lin_v - 1j * pv * i1
        u_new = lin_u - 1j * pu * i2
        residual = sup_h1(v_new - v_cur, u_new - u_cur)
        v_cur, u_cur = v_new, u_new
        if residual < tol:
            return Trajectory(times, v_cur, u_cur, kmax,
                              meta={"solver": "picard", "iterations": it,
                                    "residual": residual, "panels": n_t})
    raise PicardConvergenceError(
        f"no contraction after {max_iter} sweeps (residual {residual:.3e}); "
        "reduce T or the data size", residual=residual, iterations=max_iter)


def _rk4_nonlinear(vg, ug, h: float, p: EvolutionParams):
    """One classical RK4 step of the pointwise substep
    v' = -i eps1 u conj(v), u' = -i eps2 v^2 / (2 s)."""
    c1 = -1j * p.eps1
    c2 = -1j * p.eps2 / (2.0 * p.sigma_value)

    def rhs(v, u):
        return c1 * u * np.conj(v), c2 * v * v

    k1v, k1u = rhs(vg, ug)
    k2v, k2u = rhs(vg + 0.5 * h * k1v, ug + 0.5 * h * k1u)
    k3v, k3u = rhs(vg + 0.5 * h * k2v, ug + 0.5 * h * k2u)
    k4v, k4u = rhs(vg + h * k3v, ug + h * k3u)
    return (vg + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v),
            ug + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u))


def splitstep_evolve(v0: SpectralField, u0: SpectralField, p: EvolutionParams,
                     T: float, dt: float, grid: SphereGrid | None = None,
                     model: SpectrumModel = SPHERE2,
                     sample_stride: int = 1) -> Trajectory:
    """Strang splitting: half nonlinear substep, exact linear phases, half
    nonlinear substep; second order in dt.

    Aborts with BlowUpError when a non-finite value appears or the mass grows
    beyond ten times its initial value.
    """
    if dt <= 0 or T <= 0 or dt > T:
        raise ConfigurationError("need 0 < dt <= T")
    if v0.K != u0.K:
        raise ConfigurationError("initial data must share one band limit")
    kmax = v0.K
    if grid is None:
        grid = SphereGrid(kmax)
    n_steps = int(round(T / dt))
    dt = T / n_steps

    gv, gu = group_v(p), group_u(p)
    ph_v = _phases(gv, dt, kmax, model)[:, None]
    ph_u = _phases(gu, dt, kmax, model)[:, None]
    s2 = 2.0 * p.sigma_value

    vc = v0.coeffs.copy()
    uc = u0.coeffs.copy()
    mass0 = np.sum(np.abs(vc) ** 2) + s2 * np.sum(np.abs(uc) ** 2)

    times = [0.0]
    vs = [vc.copy()]
    us = [uc.copy()]
    for step in range(1, n_steps + 1):
        vg = synthesize_table(vc, grid)
        ug = synthesize_table(uc, grid)
        vg, ug = _rk4_nonlinear(vg, ug, 0.5 * dt, p)
        vc = analyze_table(vg, grid)
        uc = analyze_table(ug, grid)
        vc *= ph_v
        uc *= ph_u
        vg = synthesize_table(vc, grid)
        ug = synthesize_table(uc, grid)
        vg, ug = _rk4_nonlinear(vg, ug, 0.5 * dt, p)
        vc = analyze_table(vg, grid)
        uc = analyze_table(ug, grid)

        mass = np.sum(np.abs(vc) ** 2) + s2 * np.sum(np.abs(uc) ** 2)
        if not np.isfinite(mass) or (mass0 > 0 and mass > 10.0 * mass0):
            raise BlowUpError(
                f"blow-up indicator at t ~ {step * dt:.6g}"
                f" (mass {mass:.3e} vs initial {mass0:.3e})",
                t_estimate=step * dt, mass=float(mass), mass0=float(mass0))
        if step % sample_stride == 0 or step == n_steps:
            times.append(step * dt)
            vs.append(vc.copy())
            us.append(uc.copy())

    return Trajectory(np.array(times), np.array(vs), np.array(us), kmax,
                      meta={"solver": "splitstep", "dt": dt, "steps": n_steps})
