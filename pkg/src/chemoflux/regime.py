"""Boundedness classification for the radial chemotaxis system.

Three sufficient conditions are checked against the model parameters:

* trace condition -- the quadratic damping b beats the boundary production
  measured through a trace inequality with constant C on the ball, split
  into two branches by the size of the gradient-absorption coefficient c.
  When it holds, an explicit pair (eps1, eps2) certifies it; the pair must
  satisfy three inequalities that the testing-function argument needs, and
  `find_epsilon_witness` constructs one by interval midpoints.
* flux-gap condition (tau = 0) -- alpha*chi < min(b, 4c).
* damping condition (tau = 1) -- b > chi.

A verdict of "bounded" means at least one condition holds; the converse is
not claimed (the conditions are sufficient, not necessary).  Trace constants
may be supplied by the caller or estimated numerically; the numerical
estimate maximises the discrete trace ratio over a fixed test family and is
flagged as a lower bound, never as the sharp constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Literal

import numpy as np
import scipy.linalg as sla

from .core import ModelParams, RadialGrid, SourceSpec, integrate, omega_n

__all__ = [
    "BoundednessCondition",
    "TraceConstantEstimate",
    "EpsilonWitness",
    "RegimeVerdict",
    "classify_tau0",
    "classify_tau1",
    "find_epsilon_witness",
    "witness_inequalities",
    "verify_witness",
    "estimate_trace_constant",
    "principal_robin_eigenvalue",
]


class BoundednessCondition(str, Enum):
    """Sufficient boundedness conditions, named by what they compare."""

    TRACE = "trace_condition"
    FLUX_GAP = "flux_gap_condition"
    DAMPING = "damping_condition"

    def __str__(self) -> str:  # cleaner CLI output
        return self.value


@dataclass(frozen=True)
class TraceConstantEstimate:
    """A constant C with integral(boundary) psi^p <= C * (||psi||_p^p + ||grad psi||_p^p)."""

    p: int
    value: float
    kind: Literal["user-supplied", "numerically-estimated-lower-bound"]

    def __post_init__(self) -> None:
        if self.p not in (1, 2):
            raise ValueError(f"trace exponent p must be 1 or 2, got {self.p}")
        if not self.value > 0:
            raise ValueError(f"trace constant must be > 0, got {self.value}")
        if self.kind not in ("user-supplied", "numerically-estimated-lower-bound"):
            raise ValueError(f"unknown trace-constant kind {self.kind!r}")


@dataclass(frozen=True)
class EpsilonWitness:
    """Certificate pair for the trace condition."""

    eps1: float
    eps2: float

    def __post_init__(self) -> None:
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ValueError(
                f"witness entries must be positive, got ({self.eps1}, {self.eps2})")


@dataclass(frozen=True)
class RegimeVerdict:
    bounded: bool
    satisfied_conditions: tuple[BoundednessCondition, ...]
    witness: EpsilonWitness | None
    notes: str = ""

    def __post_init__(self) -> None:
        if self.bounded != bool(self.satisfied_conditions):
            raise ValueError("bounded must be equivalent to a nonempty condition list")
        if BoundednessCondition.TRACE in self.satisfied_conditions and self.witness is None:
            raise ValueError("a verdict citing the trace condition must carry a witness")


def witness_inequalities(
    params: ModelParams,
    source: SourceSpec,
    trace_c: float,
    witness: EpsilonWitness,
) -> tuple[float, float, float]:
    """The three witness quantities; valid means (< 0, <= 0, > 0)."""
    k = (params.chi * params.alpha) ** 2 * params.h * trace_c
    q1 = k / (4.0 * witness.eps1) + witness.eps2 - source.b
    q2 = k / (4.0 * witness.eps1) - source.c
    q3 = 1.0 - witness.eps1 / (4.0 * witness.eps2)
    return q1, q2, q3


def verify_witness(
    params: ModelParams,
    source: SourceSpec,
    trace_c: float,
    witness: EpsilonWitness,
) -> bool:
    q1, q2, q3 = witness_inequalities(params, source, trace_c, witness)
    return q1 < 0 and q2 <= 0 and q3 > 0


def find_epsilon_witness(
    params: ModelParams,
    source: SourceSpec,
    trace_c: float,
) -> EpsilonWitness | None:
    """Construct a witness pair, or return None when none exists.

    For alpha = 0 every boundary term vanishes and any pair with
    eps2 < b, eps1 < 4*eps2 works; the fixed choice (min(1, b), b/2) is
    returned so the output stays deterministic.  For alpha > 0 the
    admissible eps1 interval is

        2b - sqrt(4b^2 - k) < eps1 < 2b + sqrt(4b^2 - k),   k = (chi*alpha)^2*h*C,

    intersected with eps1 >= k / (4c); eps1 is its midpoint and eps2 the
    midpoint of (eps1/4, b - k/(4*eps1)).  Infeasible whenever 4b^2 <= k or
    the intersection is empty (in particular for c = 0 with k > 0).
    """
    if not trace_c > 0:
        raise ValueError(f"trace constant must be > 0, got {trace_c}")
    b, c = source.b, source.c
    if params.alpha == 0.0:
        if b <= 0:
            return None
        eps1 = min(1.0, b)
        return EpsilonWitness(eps1=eps1, eps2=b / 2.0)

    k = (params.chi * params.alpha) ** 2 * params.h * trace_c
    if k == 0.0:
        # h = 0: boundary production absent, same degenerate picture
        if b <= 0:
            return None
        eps1 = min(1.0, b)
        return EpsilonWitness(eps1=eps1, eps2=b / 2.0)

    disc = 4.0 * b * b - k
    if disc <= 0:
        return None
    root = math.sqrt(disc)
    lo, hi = 2.0 * b - root, 2.0 * b + root
    if c > 0:
        lo = max(lo, k / (4.0 * c))
    else:
        return None  # c = 0 cannot absorb the k/(4 eps1) term
    if not lo < hi:
        return None
    eps1 = 0.5 * (lo + hi)
    upper2 = b - k / (4.0 * eps1)
    lower2 = eps1 / 4.0
    if not lower2 < upper2:
        return None
    witness = EpsilonWitness(eps1=eps1, eps2=0.5 * (lower2 + upper2))
    if not verify_witness(params, source, trace_c, witness):
        return None
    return witness


def _trace_condition_holds(params: ModelParams, source: SourceSpec, trace_c: float) -> bool:
    """Two-branch damping test against the trace-weighted boundary term."""
    s = 0.25 * params.chi * params.alpha * math.sqrt(params.h * trace_c)
    b, c = source.b, source.c
    if params.alpha == 0.0:
        # boundary terms vanish, but gradient absorption must be present
        return b > 0 and c > 0
    if 0 < c < s:
        return b > c + (params.chi * params.alpha) ** 2 * params.h * trace_c / (16.0 * c)
    if c >= s:
        # includes h = 0, where the threshold degenerates to b > 0
        return b > 2.0 * s
    return False  # c = 0 with a genuine boundary term


def _as_estimate(trace_c: TraceConstantEstimate | float) -> TraceConstantEstimate:
    if isinstance(trace_c, TraceConstantEstimate):
        return trace_c
    return TraceConstantEstimate(p=2, value=float(trace_c), kind="user-supplied")


def _classify(
    params: ModelParams,
    source: SourceSpec,
    trace_c: TraceConstantEstimate,
) -> RegimeVerdict:
    conditions: list[BoundednessCondition] = []
    witness = None
    if _trace_condition_holds(params, source, trace_c.value):
        witness = find_epsilon_witness(params, source, trace_c.value)
        if witness is None:
            raise RuntimeError(
                "trace condition holds but no witness was constructible; "
                "this indicates an internal inconsistency")
        conditions.append(BoundednessCondition.TRACE)
    if params.tau == 0:
        if params.alpha * params.chi < min(source.b, 4.0 * source.c):
            conditions.append(BoundednessCondition.FLUX_GAP)
    else:
        if source.b > params.chi:
            conditions.append(BoundednessCondition.DAMPING)
    notes = f"trace constant {trace_c.value:g} ({trace_c.kind})"
    return RegimeVerdict(
        bounded=bool(conditions),
        satisfied_conditions=tuple(conditions),
        witness=witness,
        notes=notes,
    )


def classify_tau0(
    params: ModelParams,
    source: SourceSpec,
    trace_c: TraceConstantEstimate | float,
) -> RegimeVerdict:
    """Classify the quasi-stationary (tau = 0) system.

    A bare number for trace_c is treated as a user-supplied constant.
    """
    if params.tau != 0:
        raise ValueError(f"classify_tau0 needs tau = 0 parameters, got tau = {params.tau}")
    return _classify(params, source, _as_estimate(trace_c))


def classify_tau1(
    params: ModelParams,
    source: SourceSpec,
    trace_c: TraceConstantEstimate | float,
) -> RegimeVerdict:
    """Classify the fully parabolic (tau = 1) system.

    A bare number for trace_c is treated as a user-supplied constant.
    """
    if params.tau != 1:
        raise ValueError(f"classify_tau1 needs tau = 1 parameters, got tau = {params.tau}")
    return _classify(params, source, _as_estimate(trace_c))


# -- numerical trace constant -------------------------------------------------

_POLY_POWERS = tuple(range(7))
_EXP_RATES = (1.0, 2.0, 4.0, 8.0, 16.0)


def _trace_ratio(grid: RadialGrid, psi: np.ndarray, dpsi: np.ndarray,
                 psi_boundary: float, p: int) -> float:
    num = omega_n(grid.dim) * grid.radius ** (grid.dim - 1) * abs(psi_boundary) ** p
    den = integrate(grid, np.abs(psi) ** p) + integrate(grid, np.abs(dpsi) ** p)
    return num / den


def estimate_trace_constant(grid: RadialGrid, p: int) -> TraceConstantEstimate:
    """Lower bound for the trace constant from a fixed radial test family.

    The family is r^k for k = 0..6 plus boundary layers exp(k*(r - R)) for
    k in {1, 2, 4, 8, 16}, evaluated analytically at cell centers and at
    r = R.  The returned value is the largest discrete trace ratio over the
    family, so enlarging the family can only increase it; it is a lower
    bound for the true constant and is flagged as such.
    """
    if p not in (1, 2):
        raise ValueError(f"trace exponent p must be 1 or 2, got {p}")
    r = grid.centers
    radius = grid.radius
    best = 0.0
    for k in _POLY_POWERS:
        psi = r ** k
        dpsi = k * r ** (k - 1) if k > 0 else np.zeros_like(r)
        best = max(best, _trace_ratio(grid, psi, dpsi, radius ** k, p))
    for k in _EXP_RATES:
        psi = np.exp(k * (r - radius))
        dpsi = k * psi
        best = max(best, _trace_ratio(grid, psi, dpsi, 1.0, p))
    return TraceConstantEstimate(p=p, value=best,
                                 kind="numerically-estimated-lower-bound")


# -- principal Robin eigenvalue ----------------------------------------------

_EIG_TOL = 1e-10
_EIG_MAXITER = 10_000


def principal_robin_eigenvalue(grid: RadialGrid, h: float) -> float:
    """Smallest eigenvalue of the radial Laplacian with Robin boundary weight h.

    Discretised through the symmetric quadratic form

        Q(z) = sum_faces r^(n-1) * dr * ((z_{i+1}-z_i)/dr)^2
             + R^(n-1) * h / (1 + h dr / 2) * z_{N-1}^2,

    against the shell-volume mass matrix (the common omega_n factor cancels).
    The boundary weight eliminates the wall value through the one-sided
    half-cell difference (z(R) - z_{N-1}) / (dr/2) = -h z(R); it carries both
    the trace energy and the gradient energy of the half cell next to the
    wall, which keeps the form second-order accurate, and it tends to the
    standard Dirichlet penalty 2 R^(n-1) / dr as h grows.  Solved by inverse
    power iteration on the shifted operator; converged when successive
    Rayleigh quotients agree to 1e-10.  h = 0 returns 0 (constant mode).
    """
    if h < 0:
        raise ValueError(f"h must be >= 0, got {h}")
    n_cells = grid.cell_count
    dr = grid.dr
    trans = grid.face_areas[1:-1] / dr  # interior faces 1..N-1

    diag = np.zeros(n_cells)
    off = -trans.copy()
    diag[:-1] += trans
    diag[1:] += trans
    bw = grid.face_areas[-1] * h / (1.0 + 0.5 * h * dr)
    diag[-1] += bw

    mass = grid.cell_weights / omega_n(grid.dim)

    def rayleigh(z: np.ndarray) -> float:
        dz = np.diff(z)
        quad = float(np.dot(trans, dz * dz))
        quad += bw * z[-1] ** 2
        return quad / float(np.dot(mass, z * z))

    shift = 1.0
    ab = np.zeros((3, n_cells))
    ab[0, 1:] = off
    ab[1, :] = diag + shift * mass
    ab[2, :-1] = off

    z = np.ones(n_cells)
    rho = rayleigh(z)
    for _ in range(_EIG_MAXITER):
        z = sla.solve_banded((1, 1), ab, mass * z,
                             check_finite=False, overwrite_b=True)
        z /= math.sqrt(float(np.dot(mass, z * z)))
        rho_new = rayleigh(z)
        if abs(rho_new - rho) < _EIG_TOL:
            return float(rho_new)
        rho = rho_new
    raise RuntimeError(
        f"inverse power iteration did not converge within {_EIG_MAXITER} sweeps")
