"""Per-sample diagnostics and the discrete energy identity.

For the fully parabolic, zero-total-flux, sourceless system the functional

    F_h = chi/2 * int |grad v|^2 + chi/2 * int v^2 - chi * int u*v
        + int u*ln(u) + chi*h/2 * int_boundary v^2

decreases along solutions with dissipation rate

    D = chi * int v_t^2 + int u * |grad(ln u) - chi * grad v|^2,

so the sampled residual rho(t) = (F_h(t+dt) - F_h(t))/dt + D(t+dt) is a
direct consistency check of the scheme: it shrinks at first order in the
sampling interval until the fixed spatial discretisation floor is reached.
Both quadratures deliberately mirror the solver's stencils (face-centered
gradients, extrapolated boundary values) so that the floor stays small.

The moment diagnostic M_n = int_0^R u r^(2n-1) dr feeds the blow-up module's
comparison inequality; theta = mass / omega_n is the normalised mass that
parametrises it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .core import (
    ModelParams,
    RadialGrid,
    RadialState,
    SourceSpec,
    boundary_value,
    entropy_integrand,
    integrate,
    omega_n,
    zero_flux_sourceless,
)

if TYPE_CHECKING:  # pragma: no cover
    from .solver import Trajectory

__all__ = [
    "DiagnosticsRecord",
    "WeightedMassSpec",
    "EnergyResidualSeries",
    "lyapunov",
    "dissipation",
    "moment",
    "weighted_mass",
    "w12_norm",
    "boundary_mass_flux",
    "energy_identity_residual",
    "compute_record",
]

_U_FLOOR = 1e-30  # face densities below this are dropped from the dissipation


@dataclass(frozen=True)
class WeightedMassSpec:
    """Exponentially weighted mass int (u + mu) * exp(m*v).

    Only meaningful in the regime chi <= m < b with mu >= 1/c, where the
    weighted mass admits an a-priori bound; `validate_for` enforces that
    against the active parameters.
    """

    m: float
    mu: float

    def __post_init__(self) -> None:
        if not self.m > 0:
            raise ValueError(f"m must be > 0, got {self.m}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")

    def validate_for(self, params: ModelParams, source: SourceSpec) -> None:
        if source.b <= params.chi:
            raise ValueError(
                f"weighted mass needs b > chi, got b = {source.b}, chi = {params.chi}")
        if source.c <= 0:
            raise ValueError("weighted mass needs c > 0")
        if not params.chi <= self.m < source.b:
            raise ValueError(
                f"need chi <= m < b, got m = {self.m} with chi = {params.chi}, "
                f"b = {source.b}")
        if self.mu < 1.0 / source.c:
            raise ValueError(
                f"need mu >= 1/c = {1.0 / source.c}, got mu = {self.mu}")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass_u: float
    mass_v: float
    linf_u: float
    lp_u: Mapping[int, float]
    boundary_flux: float
    lyapunov: float
    dissipation: float | None
    moment: float
    theta: float
    weighted_mass: float | None
    clipped_mass: float


def _face_gradient(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Central differences at interior faces, length N-1."""
    return np.diff(values) / grid.dr


def lyapunov(state: RadialState, grid: RadialGrid, params: ModelParams) -> float:
    """The energy functional F_h of the state (finite for u, v >= 0)."""
    u, v = state.u, state.v
    om = omega_n(grid.dim)
    vr = _face_gradient(grid, v)
    grad_sq = float(np.dot(grid.face_areas[1:-1] * grid.dr, vr * vr)) * om
    v_sq = integrate(grid, v * v)
    uv = integrate(grid, u * v)
    entropy = integrate(grid, entropy_integrand(u))
    v_b = boundary_value(grid, v)
    boundary = om * grid.face_areas[-1] * v_b * v_b
    chi = params.chi
    return (0.5 * chi * grad_sq + 0.5 * chi * v_sq - chi * uv + entropy
            + 0.5 * chi * params.h * boundary)


def dissipation(
    state: RadialState,
    prev_state: RadialState,
    dt: float,
    grid: RadialGrid,
    params: ModelParams,
) -> float:
    """Discrete dissipation rate paired with `lyapunov`.

    v_t is the backward difference of the two stored states over dt; the
    transport term is assembled at faces as (u_r - chi*u*v_r)^2 / u with the
    arithmetic face mean of u, dropping faces whose density sits below an
    epsilon floor.  The outer face enters through the prescribed total flux,
    which vanishes identically in the zero-total-flux case the energy
    identity belongs to.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    u, v = state.u, state.v
    om = omega_n(grid.dim)
    vt = (v - prev_state.v) / dt
    signal_part = params.chi * integrate(grid, vt * vt)

    ur = _face_gradient(grid, u)
    vr = _face_gradient(grid, v)
    u_face = 0.5 * (u[:-1] + u[1:])
    flux = ur - params.chi * u_face * vr
    keep = u_face > _U_FLOOR
    weights = grid.face_areas[1:-1] * grid.dr
    transport = float(np.dot(weights[keep],
                             flux[keep] ** 2 / u_face[keep])) * om

    u_b = max(0.0, boundary_value(grid, u))
    v_b = max(0.0, boundary_value(grid, v))
    if params.alpha > 0 and u_b > _U_FLOOR:
        total = params.alpha * params.chi * params.h * u_b * v_b
        transport += om * grid.face_areas[-1] * (0.5 * grid.dr) * total * total / u_b

    return signal_part + transport


def moment(state: RadialState, grid: RadialGrid) -> tuple[float, float]:
    """(M_n, theta): radial moment int_0^R u r^(2n-1) dr and mass / omega_n.

    The weight r^(2n-1) is integrated exactly over each shell, so constant
    fields give the closed-form moment exactly.
    """
    n = grid.dim
    shells = np.diff(grid.faces ** (2 * n)) / (2.0 * n)
    m_n = float(np.dot(state.u, shells))
    theta = integrate(grid, state.u) / omega_n(n)
    return m_n, theta


def weighted_mass(state: RadialState, grid: RadialGrid,
                  spec: WeightedMassSpec) -> float:
    return integrate(grid, (state.u + spec.mu) * np.exp(spec.m * state.v))


def w12_norm(values: np.ndarray, grid: RadialGrid) -> float:
    """Discrete W^{1,2} norm: sqrt(int f^2 + int |f_r|^2).

    The gradient is averaged from interior faces back to cell centers
    (one-sided at both ends) so the quadrature uses the exact shell weights;
    affine fields come out exactly.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.cell_count,):
        raise ValueError(
            f"field length {values.shape} does not match grid with "
            f"{grid.cell_count} cells")
    fr = _face_gradient(grid, values)
    g = np.empty_like(values)
    g[0] = fr[0]
    g[-1] = fr[-1]
    g[1:-1] = 0.5 * (fr[:-1] + fr[1:])
    return math.sqrt(integrate(grid, values * values) + integrate(grid, g * g))


def boundary_mass_flux(state: RadialState, grid: RadialGrid,
                       params: ModelParams) -> float:
    """Instantaneous mass growth rate alpha*chi*h * omega_n R^(n-1) u(R) v(R)."""
    u_b = max(0.0, boundary_value(grid, state.u))
    v_b = max(0.0, boundary_value(grid, state.v))
    return (params.alpha * params.chi * params.h * omega_n(grid.dim)
            * grid.face_areas[-1] * u_b * v_b)


def compute_record(
    state: RadialState,
    grid: RadialGrid,
    params: ModelParams,
    prev_state: RadialState | None = None,
    dt: float | None = None,
    weighted_spec: WeightedMassSpec | None = None,
    clipped_mass: float = 0.0,
) -> DiagnosticsRecord:
    """Assemble the standard diagnostics for one sampled state."""
    u = state.u
    mass_u = integrate(grid, u)
    lp = {
        2: integrate(grid, u * u) ** 0.5,
        4: integrate(grid, u ** 4) ** 0.25,
    }
    m_n, theta = moment(state, grid)
    diss = None
    if prev_state is not None:
        if dt is None or not dt > 0:
            raise ValueError("dissipation needs the positive dt between samples")
        diss = dissipation(state, prev_state, dt, grid, params)
    wm = None
    if weighted_spec is not None:
        wm = weighted_mass(state, grid, weighted_spec)
    return DiagnosticsRecord(
        t=state.time,
        mass_u=mass_u,
        mass_v=integrate(grid, state.v),
        linf_u=float(u.max()),
        lp_u=lp,
        boundary_flux=boundary_mass_flux(state, grid, params),
        lyapunov=lyapunov(state, grid, params),
        dissipation=diss,
        moment=m_n,
        theta=theta,
        weighted_mass=wm,
        clipped_mass=clipped_mass,
    )


@dataclass(frozen=True)
class EnergyResidualSeries:
    """rho(t) over the sampled trajectory plus refinement metadata."""

    times: np.ndarray
    rho: np.ndarray
    dt_nominal: float
    dr: float

    def max_abs(self, t_min: float = 0.0) -> float:
        mask = self.times >= t_min
        if not mask.any():
            raise ValueError(f"no residual samples at t >= {t_min}")
        return float(np.max(np.abs(self.rho[mask])))


def energy_identity_residual(trajectory: "Trajectory") -> EnergyResidualSeries:
    """Sampled energy-identity residual rho = dF_h/dt + D of a tau = 1 run.

    Only defined for the zero-total-flux, sourceless, fully parabolic
    system, where F_h decreases with rate D; other configurations are
    rejected.  rho is indexed by the later sample of each consecutive pair.
    """
    cfg = trajectory.config
    if cfg.params.tau != 1:
        raise ValueError("the energy identity applies to tau = 1 runs only")
    if not zero_flux_sourceless(cfg.params, cfg.source):
        raise ValueError(
            "the energy identity applies to the zero-total-flux, sourceless "
            "system (alpha = 0, a = b = c = 0)")
    samples = trajectory.samples
    if len(samples) < 2:
        raise ValueError("need at least two samples to form a residual")
    times = np.array([s.record.t for s in samples])
    energy = np.array([s.record.lyapunov for s in samples])
    dts = np.diff(times)
    diss = np.array([s.record.dissipation for s in samples[1:]], dtype=float)
    rho = np.diff(energy) / dts + diss
    return EnergyResidualSeries(
        times=times[1:],
        rho=rho,
        dt_nominal=float(np.median(dts)),
        dr=cfg.grid.dr,
    )
