"""IMEX finite-volume solver for the radial chemotaxis system.

The cell equation is advanced in conservative flux form.  Writing the total
flux through a face at radius r as

    F = r^(n-1) * (u_r - chi * u * v_r),

diffusion (the u_r part) is implicit backward-Euler and the taxis part is
explicit with the advected u upwinded by the sign of chi * v_r, which keeps
the update positivity-friendly under the advective CFL restriction.  The
outer boundary face carries the prescribed total flux

    F(R) = R^(n-1) * alpha * chi * h * u(R) * v(R) >= 0,

applied explicitly as a whole, so the implicit operator sees zero flux at
both ends and every step changes the discrete mass by exactly
dt * omega_n * F(R) plus interior source terms.  Mass conservation for
alpha = 0 and the mass-growth identity for alpha > 0 are therefore
telescoping identities of the scheme, not approximations.

The signal is advanced by backward Euler on its own equation (tau = 1) with
the old u as source, or re-solved from the quasi-stationary equation after
each u update (tau = 0).  Its Robin condition v_r = -h v enters the last
matrix row through the linear boundary extrapolation of v(R).

Interior sources: + a*u explicit, - b*u^2 linearised as b*u_old*u_new inside
the implicit solve, - c*|u_r|^2 explicit with face-centered gradients.
Negative undershoots are clipped to zero and the clipped mass recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .core import (
    ModelParams,
    RadialGrid,
    RadialState,
    RunConfig,
    SourceSpec,
    boundary_value,
    integrate,
    omega_n,
)
from . import diagnostics as diag

__all__ = [
    "StepController",
    "TerminationStatus",
    "StepInfo",
    "Sample",
    "Trajectory",
    "solve_elliptic_v",
    "chemotactic_flux",
    "step",
    "step_detailed",
    "advance",
    "reconstruct_2d",
]


@dataclass
class StepController:
    """Adaptive time-step state: halve on violation, double on success."""

    dt: float
    dt_min: float
    dt_max: float
    cfl_target: float = 0.4
    growth_cap: float = 0.1

    def __post_init__(self) -> None:
        if not (0 < self.dt_min <= self.dt <= self.dt_max):
            raise ValueError(
                f"need 0 < dt_min <= dt <= dt_max, got "
                f"({self.dt_min}, {self.dt}, {self.dt_max})")
        if not (0 < self.cfl_target <= 1):
            raise ValueError(f"cfl_target must lie in (0, 1], got {self.cfl_target}")
        if not self.growth_cap > 0:
            raise ValueError(f"growth_cap must be > 0, got {self.growth_cap}")

    def halve(self) -> None:
        self.dt = max(0.5 * self.dt, self.dt_min)

    def grow(self) -> None:
        self.dt = min(2.0 * self.dt, self.dt_max)

    @property
    def at_floor(self) -> bool:
        return self.dt <= self.dt_min * (1.0 + 1e-12)


@dataclass(frozen=True)
class TerminationStatus:
    kind: str  # "completed" | "blow_up" | "stalled"
    t_final: float
    reason: str
    estimated_blowup_time: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("completed", "blow_up", "stalled"):
            raise ValueError(f"unknown termination kind {self.kind!r}")
        if (self.kind == "blow_up") != (self.estimated_blowup_time is not None):
            raise ValueError(
                "estimated_blowup_time must be set exactly for blow_up statuses")


@dataclass(frozen=True)
class StepInfo:
    """Per-step bookkeeping the adaptive loop and the diagnostics consume."""

    max_speed: float          # max |chi * v_r| over faces, pre-step
    boundary_mass_rate: float  # omega_n * F(R), the exact d(mass)/dt boundary term
    clipped_mass: float        # mass added by clipping negative undershoots


@dataclass(frozen=True)
class Sample:
    state: RadialState
    record: "diag.DiagnosticsRecord"


@dataclass(frozen=True)
class RunStats:
    steps_accepted: int
    steps_rejected: int
    clipped_mass_total: float
    min_mass_increment: float
    max_flux_identity_error: float


@dataclass(frozen=True)
class Trajectory:
    config: RunConfig
    samples: tuple[Sample, ...]
    status: TerminationStatus
    stats: RunStats

    @property
    def times(self) -> np.ndarray:
        return np.array([s.record.t for s in self.samples])

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(s.record, name) for s in self.samples])


class _Workspace:
    """Precomputed geometry factors and operator bands for one model setup.

    Rebuilding these per step would dominate the runtime of long runs; the
    hot loop in `advance` owns one instance and the public single-step entry
    points build a throwaway one.
    """

    def __init__(self, grid: RadialGrid, params: ModelParams, source: SourceSpec):
        self.grid = grid
        self.params = params
        self.source = source
        n = grid.dim
        self.omega = omega_n(n)
        self.dr = grid.dr
        self.inv_dr = 1.0 / grid.dr
        # shell volumes with the common omega_n factor divided out
        self.shell = np.asarray(grid.cell_weights) / self.omega
        self.inv_shell = 1.0 / self.shell
        fa = np.asarray(grid.face_areas).copy()
        fa[0] = 0.0  # no flux through the center by symmetry, any n
        self.fa = fa
        self.fa_boundary = float(grid.face_areas[-1])
        # interior-face transmissibility for the diffusion stencil
        trans = fa[1:-1] * self.inv_dr  # faces 1..N-1
        self.diff_sub = -trans * self.inv_shell[1:]
        self.diff_sup = -trans * self.inv_shell[:-1]
        diag_d = np.zeros(grid.cell_count)
        diag_d[:-1] += trans * self.inv_shell[:-1]
        diag_d[1:] += trans * self.inv_shell[1:]
        self.diff_diag = diag_d
        # signal operator L = -Laplacian + 1 with the Robin flux -h*v(R)
        # folded into the last row via the boundary extrapolation of v(R)
        robin = params.h * self.fa_boundary * self.inv_shell[-1]
        self.sig_sub = self.diff_sub.copy()
        self.sig_sub[-1] += -0.5 * robin
        self.sig_sup = self.diff_sup
        self.sig_diag = self.diff_diag + 1.0
        self.sig_diag = self.sig_diag.copy()
        self.sig_diag[-1] += 1.5 * robin
        nc = grid.cell_count
        self._ab = np.empty((3, nc))
        self._ab_sig = np.empty((3, nc))
        self._ab_sig[0, 1:] = self.sig_sup
        self._ab_sig[2, :-1] = self.sig_sub
        self._ab[0, 1:] = self.diff_sup
        self._ab[2, :-1] = self.diff_sub
        self.boundary_rate = (params.alpha * params.chi * params.h
                              * self.fa_boundary)

    def solve_signal(self, rhs: np.ndarray, dt_inv: float = 0.0) -> np.ndarray:
        """Solve (dt_inv + L) v = rhs; dt_inv = 0 gives the elliptic problem."""
        self._ab_sig[1, :] = self.sig_diag + dt_inv
        return sla.solve_banded((1, 1), self._ab_sig, rhs,
                                check_finite=False, overwrite_b=True)

    def solve_cells(self, diag_extra: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Solve (diag_extra - Laplacian) u = rhs with zero-flux implicit ends."""
        self._ab[1, :] = self.diff_diag + diag_extra
        return sla.solve_banded((1, 1), self._ab, rhs,
                                check_finite=False, overwrite_b=True)


def _boundary_pair(grid: RadialGrid, u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """Extrapolated boundary values clamped to the nonnegative cone."""
    u_b = max(0.0, 1.5 * u[-1] - 0.5 * u[-2])
    v_b = max(0.0, 1.5 * v[-1] - 0.5 * v[-2])
    return u_b, v_b


def solve_elliptic_v(u: np.ndarray, grid: RadialGrid, h: float) -> np.ndarray:
    """Quasi-stationary signal: solve -Laplacian(v) + v = u, v_r(R) = -h v(R).

    Direct tridiagonal solve of the finite-volume system; the matrix is an
    irreducibly diagonally dominant M-matrix, so v >= 0 whenever u >= 0 and
    the residual of the discrete system is at solver precision.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.cell_count,):
        raise ValueError(
            f"field length {u.shape} does not match grid with {grid.cell_count} cells")
    if h < 0:
        raise ValueError(f"h must be >= 0, got {h}")
    params = ModelParams(chi=1.0, h=h, alpha=0.0, tau=0)
    ws = _Workspace(grid, params, SourceSpec())
    return ws.solve_signal(u.copy())


def chemotactic_flux(state: RadialState, grid: RadialGrid,
                     params: ModelParams) -> np.ndarray:
    """Total face fluxes F = r^(n-1) * (u_r - chi*u*v_r), length N+1.

    Interior faces use the central difference for u_r and v_r with the
    advected u upwinded by the sign of chi*v_r.  The center face is zero by
    symmetry; the outer face carries the prescribed total flux
    R^(n-1) * alpha*chi*h * u(R) * v(R), nonnegative whenever u, v >= 0.
    """
    u, v = state.u, state.v
    n_cells = grid.cell_count
    inv_dr = 1.0 / grid.dr
    flux = np.zeros(n_cells + 1)
    ur = np.diff(u) * inv_dr
    speed = params.chi * np.diff(v) * inv_dr
    u_up = np.where(speed >= 0.0, u[:-1], u[1:])
    flux[1:-1] = grid.face_areas[1:-1] * (ur - speed * u_up)
    u_b, v_b = _boundary_pair(grid, u, v)
    flux[-1] = (grid.face_areas[-1] * params.alpha * params.chi * params.h
                * u_b * v_b)
    return flux


def step_detailed(
    state: RadialState,
    grid: RadialGrid,
    params: ModelParams,
    source: SourceSpec,
    dt: float,
    _ws: _Workspace | None = None,
) -> tuple[RadialState, StepInfo]:
    """One IMEX step; returns the new state plus step bookkeeping."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    ws = _ws if _ws is not None else _Workspace(grid, params, source)
    u, v = state.u, state.v
    inv_dr = ws.inv_dr

    dv = np.diff(v)
    speed = (params.chi * inv_dr) * dv
    max_speed = float(np.max(np.abs(speed))) if speed.size else 0.0
    u_up = np.where(speed >= 0.0, u[:-1], u[1:])
    u_b, v_b = _boundary_pair(grid, u, v)
    flux_b = ws.boundary_rate * u_b * v_b / ws.fa_boundary  # alpha*chi*h*u(R)*v(R)

    # explicit part: taxis divergence + boundary total flux + sources
    adv = np.empty(grid.cell_count + 1)
    adv[0] = 0.0
    adv[1:-1] = -ws.fa[1:-1] * speed * u_up
    adv[-1] = ws.fa_boundary * flux_b
    expl = np.diff(adv) * ws.inv_shell
    if source.a:
        expl = expl + source.a * u
    if source.c:
        grad_face = np.empty(grid.cell_count + 1)
        grad_face[0] = 0.0
        grad_face[1:-1] = np.diff(u) * inv_dr
        # u_r at the wall from the cell-density boundary condition
        grad_face[-1] = (params.alpha - 1.0) * params.chi * params.h * u_b * v_b
        sq = grad_face * grad_face
        expl = expl - source.c * 0.5 * (sq[:-1] + sq[1:])

    dt_inv = 1.0 / dt
    diag_extra = np.full(grid.cell_count, dt_inv)
    if source.b:
        diag_extra = diag_extra + source.b * u
    u_new = ws.solve_cells(diag_extra, u * dt_inv + expl)

    clipped = 0.0
    if u_new.min() < 0.0:
        neg = np.minimum(u_new, 0.0)
        clipped = -float(np.dot(neg, ws.shell)) * ws.omega
        u_new = np.maximum(u_new, 0.0)

    if params.tau == 1:
        v_new = ws.solve_signal(v * dt_inv + u, dt_inv=dt_inv)
    else:
        v_new = ws.solve_signal(u_new.copy())
    v_new = np.maximum(v_new, 0.0)  # M-matrix keeps v >= 0; guard rounding

    new_state = RadialState(time=state.time + dt, u=u_new, v=v_new)
    info = StepInfo(max_speed=max_speed,
                    boundary_mass_rate=ws.omega * ws.fa_boundary * flux_b,
                    clipped_mass=clipped)
    return new_state, info


def step(
    state: RadialState,
    grid: RadialGrid,
    params: ModelParams,
    source: SourceSpec,
    dt: float,
) -> RadialState:
    """One IMEX step of size dt (see module docstring for the splitting)."""
    new_state, _ = step_detailed(state, grid, params, source, dt)
    return new_state


def advance(config: RunConfig) -> Trajectory:
    """Run the adaptive loop from t = 0 to t_end or until blow-up/stall.

    dt is limited by the advective CFL condition cfl_target * dr / max|chi
    v_r| and clipped so steps land exactly on sample times; a step whose
    peak density grows beyond growth_cap is rejected and retried at dt/2.
    Blow-up is declared when the peak exceeds u_max_threshold, or when dt
    has collapsed to dt_min with the growth cap still violated.  Samples are
    recorded at t = 0, at every multiple of sample_interval and at the final
    time.
    """
    grid, params, source = config.grid, config.params, config.source
    ws = _Workspace(grid, params, source)
    state = config.initial_state()
    if params.tau == 0:
        v0 = ws.solve_signal(state.u.copy())
        state = RadialState(time=0.0, u=state.u, v=np.maximum(v0, 0.0))

    wspec = config.weighted_mass
    samples: list[Sample] = []
    clipped_total = 0.0

    def record(st: RadialState, prev: Sample | None) -> None:
        rec = diag.compute_record(
            st, grid, params,
            prev_state=None if prev is None else prev.state,
            dt=None if prev is None else st.time - prev.state.time,
            weighted_spec=wspec, clipped_mass=clipped_total)
        samples.append(Sample(state=st, record=rec))

    record(state, None)

    ctrl = StepController(dt=config.dt_init, dt_min=config.dt_min,
                          dt_max=config.dt_max, cfl_target=config.cfl_target,
                          growth_cap=config.growth_cap)
    t_end = config.t_end
    interval = config.sample_interval
    next_sample = min(interval, t_end)
    tiny = 1e-12 * max(1.0, t_end)

    mass = integrate(grid, state.u)
    min_increment = math.inf
    max_flux_err = 0.0
    accepted = rejected = 0
    status: TerminationStatus | None = None

    # speed bound of the current state, refreshed on every accepted step
    cur_speed = float(np.max(np.abs(np.diff(state.v)))) * params.chi * ws.inv_dr

    while state.time < t_end - tiny:
        dt_ctrl = ctrl.dt
        if cur_speed > 0.0:
            dt_ctrl = min(dt_ctrl, ctrl.cfl_target * grid.dr / cur_speed)
        dt_ctrl = max(dt_ctrl, ctrl.dt_min)
        dt = min(dt_ctrl, t_end - state.time, next_sample - state.time)
        if dt <= 0.0:  # landed on a sample boundary by rounding
            next_sample += interval
            continue

        new_state, info = step_detailed(state, grid, params, source, dt, _ws=ws)

        linf_old = float(state.u.max())
        linf_new = float(new_state.u.max())
        finite = math.isfinite(linf_new) and bool(np.isfinite(new_state.v[-1]))
        grew_too_fast = linf_new > linf_old * (1.0 + ctrl.growth_cap) + 1e-12

        if not finite or grew_too_fast:
            if dt_ctrl > ctrl.dt_min * (1.0 + 1e-12):
                ctrl.dt = max(0.5 * dt, ctrl.dt_min)
                rejected += 1
                continue
            # dt already at the floor: terminal
            if not finite:
                status = TerminationStatus(
                    kind="stalled", t_final=state.time,
                    reason="nonfinite update at the minimum time step")
            else:
                status = TerminationStatus(
                    kind="blow_up", t_final=state.time,
                    reason="time step collapsed to dt_min with the growth "
                           "cap still violated",
                    estimated_blowup_time=state.time)
            break

        accepted += 1
        new_mass = integrate(grid, new_state.u)
        increment = new_mass - mass
        min_increment = min(min_increment, increment)
        if source.is_zero:
            expected = dt * info.boundary_mass_rate + info.clipped_mass
            scale = max(abs(mass), abs(new_mass), 1e-300)
            max_flux_err = max(max_flux_err, abs(increment - expected) / scale)
        mass = new_mass
        clipped_total += info.clipped_mass
        state = new_state
        cur_speed = info.max_speed if info.max_speed > 0.0 else 0.0
        # the step used the pre-step field; refresh against the new one
        cur_speed = max(cur_speed,
                        float(np.max(np.abs(np.diff(state.v)))) * params.chi * ws.inv_dr)

        if linf_new > config.u_max_threshold:
            status = TerminationStatus(
                kind="blow_up", t_final=state.time,
                reason=f"peak density exceeded u_max_threshold = "
                       f"{config.u_max_threshold:g}",
                estimated_blowup_time=state.time)
            break

        if state.time >= next_sample - tiny:
            record(state, samples[-1])
            next_sample += interval

        ctrl.grow()

    if status is None:
        status = TerminationStatus(kind="completed", t_final=state.time,
                                   reason="reached t_end")
    # final instant, whatever the exit path, if the cadence missed it
    if samples[-1].state.time < state.time - tiny:
        record(state, samples[-1])

    stats = RunStats(
        steps_accepted=accepted,
        steps_rejected=rejected,
        clipped_mass_total=clipped_total,
        min_mass_increment=(0.0 if math.isinf(min_increment) else min_increment),
        max_flux_identity_error=max_flux_err,
    )
    return Trajectory(config=config, samples=tuple(samples), status=status,
                      stats=stats)


def reconstruct_2d(state: RadialState, grid: RadialGrid,
                   resolution: int) -> np.ndarray:
    """Rasterise a radial field onto a [-R, R]^2 pixel grid (dim = 2 only).

    Pixel values are the radial profile of u interpolated linearly in the
    pixel radius, extended by the first cell value at the center and by the
    extrapolated boundary value at r = R; pixels outside the disk are NaN.
    """
    if grid.dim != 2:
        raise ValueError(f"2-d reconstruction needs dim = 2, got {grid.dim}")
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    radius = grid.radius
    axis = np.linspace(-radius, radius, resolution)
    rho = np.hypot(axis[None, :], axis[:, None])
    table_r = np.concatenate(([0.0], grid.centers, [radius]))
    table_u = np.concatenate(
        ([state.u[0]], state.u, [max(0.0, boundary_value(grid, state.u))]))
    image = np.interp(rho, table_r, table_u)
    image[rho > radius] = np.nan
    return image
