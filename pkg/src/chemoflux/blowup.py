"""Finite-time blow-up detection and the moment comparison inequality.

For the quasi-stationary, zero-total-flux, sourceless system on a ball, the
weighted radial moment M_n = int_0^R u r^(2n-1) dr obeys the differential
inequality dM_n/dt <= E_theta(M_n), where theta = mass / omega_n and

    E_theta(s) = 2n(n-1) theta^(2/n) s^((n-2)/n) - (n/2) chi theta^2
               + chi n R^(-n) theta s + chi J_theta(s),

    J_theta(s) = theta^(3/2) sqrt(s) / e            (n = 2)
               = n/(2(n-2)) theta^((2n-2)/n) s^(2/n)  (n >= 3),

with the convention s^0 := 1 at n = 2 so E_theta(0) = (4 - chi*theta)*theta
there and -(n/2)*chi*theta^2 for n >= 3.  Whenever E_theta is negative on
[0, M_n(0)] the moment reaches zero in finite time, which is incompatible
with a bounded density: solutions blow up.  In two dimensions that happens
exactly above the critical mass 8*pi/chi; for n >= 3 any positive mass
admits blow-up once concentrated enough, so no threshold is reported.

`moment_odi_residual` checks the inequality along a sampled run, with a
tolerance tied to the measured finite-difference truncation scale of the
moment series itself (a sampled-derivative check cannot be sharper than its
own second differences).  `assess` combines the solver's termination flag
with the moment check, the critical-mass test and, for the fully parabolic
system, the divergence trend of the energy functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .core import zero_flux_sourceless

if TYPE_CHECKING:  # pragma: no cover
    from .solver import Trajectory

__all__ = [
    "MomentBound",
    "MomentOdiResult",
    "BlowupAssessment",
    "j_theta",
    "e_theta",
    "blowup_mass_threshold",
    "theta_exponent",
    "moment_odi_residual",
    "assess",
]


@dataclass(frozen=True)
class MomentBound:
    """Parameters of the moment comparison inequality."""

    theta: float
    chi: float
    radius: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"the moment machinery needs n >= 2, got {self.n}")
        if not self.theta > 0:
            raise ValueError(f"theta must be > 0, got {self.theta}")
        if not self.chi > 0:
            raise ValueError(f"chi must be > 0, got {self.chi}")
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")


def j_theta(s: float, theta: float, n: int) -> float:
    """The nonlinear term of the comparison function (n >= 2, s >= 0)."""
    if n < 2:
        raise ValueError(f"j_theta needs n >= 2, got {n}")
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if theta < 0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    if n == 2:
        return theta ** 1.5 * math.sqrt(s) / math.e
    return n / (2.0 * (n - 2.0)) * theta ** ((2.0 * n - 2.0) / n) * s ** (2.0 / n)


def e_theta(s: float, bound: MomentBound) -> float:
    """Right-hand side of the moment inequality dM_n/dt <= E_theta(M_n)."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    n, theta, chi = bound.n, bound.theta, bound.chi
    if n == 2:
        lead = 4.0 * theta  # s^((n-2)/n) = s^0 := 1, including s = 0
    else:
        lead = 2.0 * n * (n - 1.0) * theta ** (2.0 / n) * s ** ((n - 2.0) / n)
    return (lead - 0.5 * n * chi * theta * theta
            + chi * n * bound.radius ** (-n) * theta * s
            + chi * j_theta(s, theta, n))


def blowup_mass_threshold(n: int, chi: float) -> float | None:
    """Critical mass above which E_theta(0) < 0: 8*pi/chi at n = 2.

    For n >= 3 the comparison argument needs no mass threshold (E_theta(0)
    is negative for every positive theta), so None is returned.
    """
    if n < 2:
        raise ValueError(f"blow-up thresholds need n >= 2, got {n}")
    if not chi > 0:
        raise ValueError(f"chi must be > 0, got {chi}")
    if n == 2:
        return 8.0 * math.pi / chi
    return None


def _theta_exponent_raw(n: int, kappa: float) -> float:
    return 1.0 / (1.0 + n / ((2.0 * n + 4.0) * kappa))


def theta_exponent(n: int, kappa: float) -> float:
    """Interpolation exponent theta(n, kappa) in (1/2, 1).

    Requires kappa > n - 2 for n >= 3 and kappa > 2 for n = 2, the ranges in
    which the pointwise signal bound behind it holds.
    """
    if n < 2:
        raise ValueError(f"theta_exponent needs n >= 2, got {n}")
    if n == 2:
        if not kappa > 2:
            raise ValueError(f"n = 2 needs kappa > 2, got {kappa}")
    elif not kappa > n - 2:
        raise ValueError(f"n = {n} needs kappa > n - 2 = {n - 2}, got {kappa}")
    return _theta_exponent_raw(n, kappa)


@dataclass(frozen=True)
class MomentOdiResult:
    times: np.ndarray      # midpoint-labelled by the earlier sample
    delta: np.ndarray      # measured dM/dt minus E_theta(M)
    tol: np.ndarray        # per-sample allowance
    violations: np.ndarray  # boolean, delta > tol


def moment_odi_residual(trajectory: "Trajectory",
                        tol_discr: float | None = None) -> MomentOdiResult:
    """Check dM_n/dt <= E_theta(M_n) along a sampled quasi-stationary run.

    delta_k = (M(t_{k+1}) - M(t_k))/dt - E_theta(M(t_k)).  The default
    allowance is 10x the local finite-difference truncation scale of the
    sampled moment series, |M_{k+1} - 2 M_k + M_{k-1}| / dt, plus a small
    absolute floor; pass tol_discr for a flat override.
    """
    cfg = trajectory.config
    if cfg.params.tau != 0:
        raise ValueError("the moment inequality applies to tau = 0 runs only")
    if not zero_flux_sourceless(cfg.params, cfg.source):
        raise ValueError(
            "the moment inequality applies to the zero-total-flux, "
            "sourceless system (alpha = 0, a = b = c = 0)")
    n = cfg.grid.dim
    if n < 2:
        raise ValueError(f"the moment inequality needs n >= 2, got n = {n}")
    samples = trajectory.samples
    if len(samples) < 3:
        raise ValueError("need at least three samples to check the inequality")

    times = np.array([s.record.t for s in samples])
    moments = np.array([s.record.moment for s in samples])
    theta0 = samples[0].record.theta
    bound = MomentBound(theta=theta0, chi=cfg.params.chi,
                        radius=cfg.grid.radius, n=n)

    dts = np.diff(times)
    rate = np.diff(moments) / dts
    envelope = np.array([e_theta(m, bound) for m in moments[:-1]])
    delta = rate - envelope

    if tol_discr is not None:
        tol = np.full_like(delta, float(tol_discr))
    else:
        curv = np.abs(moments[2:] - 2.0 * moments[1:-1] + moments[:-2]) / dts[1:]
        local = np.empty_like(delta)
        local[1:] = curv
        local[0] = curv[0] if curv.size else 0.0
        floor = 1e-10 * (1.0 + np.abs(envelope))
        tol = 10.0 * local + floor

    return MomentOdiResult(times=times[:-1], delta=delta, tol=tol,
                           violations=delta > tol)


@dataclass(frozen=True)
class BlowupAssessment:
    verdict: str  # "blew_up" | "bounded_on_horizon" | "inconclusive"
    t_blowup: float | None
    criteria: dict[str, bool | None]
    kappa: float | None
    theta_exponent: float | None

    def __post_init__(self) -> None:
        if self.verdict not in ("blew_up", "bounded_on_horizon", "inconclusive"):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.theta_exponent is not None and not 0.5 < self.theta_exponent < 1.0:
            raise ValueError(
                f"theta_exponent must lie in (1/2, 1), got {self.theta_exponent}")


def _lyapunov_diverging(trajectory: "Trajectory") -> bool:
    """Last-quartile F_h decreasing with -F_h growing more than tenfold."""
    energy = np.array([s.record.lyapunov for s in trajectory.samples])
    if energy.size < 8:
        return False
    tail = energy[3 * energy.size // 4:]
    if tail[-1] >= tail[0]:
        return False
    start, end = float(-tail[0]), float(-tail[-1])
    return start > 0.0 and end > 10.0 * start


def assess(trajectory: "Trajectory") -> BlowupAssessment:
    """Combine the solver flag with the analytic blow-up criteria.

    The verdict mirrors the termination status (a trajectory "blew up" only
    if the solver flagged it).  The criteria map records, where applicable:
    whether the initial mass exceeded the two-dimensional critical mass,
    whether the moment inequality held along the run (tau = 0, n >= 2), and
    whether the energy functional shows a divergence trend (tau = 1).
    Entries that do not apply to the run are None.
    """
    cfg = trajectory.config
    n = cfg.grid.dim
    params = cfg.params

    criteria: dict[str, bool | None] = {
        "supercritical_mass_n2": None,
        "odi_respected": None,
        "lyapunov_diverging": None,
    }
    mass0 = trajectory.samples[0].record.mass_u
    if n == 2:
        criteria["supercritical_mass_n2"] = (
            mass0 > blowup_mass_threshold(2, params.chi))
    if (params.tau == 0 and n >= 2
            and zero_flux_sourceless(params, cfg.source)
            and len(trajectory.samples) >= 3):
        result = moment_odi_residual(trajectory)
        # discretisation noise right at collapse is not evidence against
        # the inequality; ignore the last ten samples
        window = result.violations[:-10] if result.violations.size > 10 \
            else result.violations[:0]
        criteria["odi_respected"] = not bool(window.any())
    if params.tau == 1:
        criteria["lyapunov_diverging"] = _lyapunov_diverging(trajectory)

    kind = trajectory.status.kind
    verdict = {"blow_up": "blew_up", "completed": "bounded_on_horizon",
               "stalled": "inconclusive"}[kind]

    if n == 1:
        kappa: float | None = None
        exponent: float | None = None
    else:
        kappa = 2.0 if (params.tau == 0 and n == 2) else \
            (3.0 if n == 2 else float(n - 1))
        exponent = _theta_exponent_raw(n, kappa)

    return BlowupAssessment(
        verdict=verdict,
        t_blowup=trajectory.status.estimated_blowup_time,
        criteria=criteria,
        kappa=kappa,
        theta_exponent=exponent,
    )
