"""Radial geometry, quadrature and initial data for chemotaxis runs on balls.

All fields downstream are radially symmetric and live at the cell centers of
a uniform finite-volume grid on [0, R].  Cell weights are exact shell
volumes, omega_n * (r_{i+1/2}^n - r_{i-1/2}^n) / n, so the discrete measure
of the ball is reproduced exactly and flux-form updates telescope to machine
precision.  That property is what the mass-conservation and mass-growth
checks lean on, so do not replace the weights with a midpoint rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "ModelParams",
    "SourceSpec",
    "DomainSpec",
    "RadialGrid",
    "RadialState",
    "GaussianBump",
    "RunConfig",
    "omega_n",
    "build_grid",
    "gaussian_initial",
    "gaussian_by_mass",
    "integrate",
    "boundary_value",
    "entropy_integrand",
    "zero_flux_sourceless",
]

MIN_CELLS = 8


def omega_n(n: int) -> float:
    """Surface measure of the unit sphere in R^n.

    Exact closed forms for n <= 3 (2, 2*pi, 4*pi); the Gamma-function
    expression 2*pi^(n/2)/Gamma(n/2) otherwise.  n = 0 is rejected: the
    radial reduction below has no meaning there.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"dimension must be an integer, got {n!r}")
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if n == 1:
        return 2.0
    if n == 2:
        return 2.0 * math.pi
    if n == 3:
        return 4.0 * math.pi
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class ModelParams:
    """Sensitivity and boundary parameters of the chemotaxis system.

    chi    chemotactic sensitivity, > 0.
    h      Robin decay rate of the signal at the boundary (v_nu = -h v);
           h = 0 degenerates to the Neumann comparison case.
    alpha  fraction of the taxis-driven boundary transport that survives as
           net inward total flux of cells, in [0, 1].  alpha = 0 is the
           zero-total-flux case; together with a = b = c = 0 it conserves
           cell mass exactly.
    tau    1 for the fully parabolic signal equation, 0 for the
           quasi-stationary (elliptic) one.
    """

    chi: float
    h: float
    alpha: float
    tau: int

    def __post_init__(self) -> None:
        if not self.chi > 0:
            raise ValueError(f"chi must be > 0, got {self.chi}")
        if self.h < 0:
            raise ValueError(f"h must be >= 0, got {self.h}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.tau not in (0, 1):
            raise ValueError(f"tau must be 0 or 1, got {self.tau}")


@dataclass(frozen=True)
class SourceSpec:
    """Logistic-type interior sources: + a*u - b*u^2 - c*|grad u|^2."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "b", "c"):
            if getattr(self, name) < 0:
                raise ValueError(f"source coefficient {name} must be >= 0, "
                                 f"got {getattr(self, name)}")

    @property
    def is_zero(self) -> bool:
        return self.a == 0.0 and self.b == 0.0 and self.c == 0.0


@dataclass(frozen=True)
class DomainSpec:
    """Ball of radius `radius` in R^dim, reduced to the radial coordinate."""

    dim: int
    radius: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.dim, (int, np.integer)) or isinstance(self.dim, bool):
            raise ValueError(f"dim must be an integer, got {self.dim!r}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")

    @property
    def volume(self) -> float:
        return omega_n(self.dim) * self.radius ** self.dim / self.dim


def _readonly(a: np.ndarray) -> np.ndarray:
    # always copy: freezing a view would lock the caller's buffer too
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RadialGrid:
    """Uniform cell-centered grid on [0, R].

    faces        N+1 face radii i*dr, i = 0..N; faces[-1] == R exactly.
    centers      N cell centers (i + 1/2)*dr.
    face_areas   r^(n-1) at faces (geometric area / omega_n).  For n = 1 the
                 center face formally carries area 1; every flux through it
                 is pinned to zero by symmetry instead.
    cell_weights exact shell volumes; they sum to the ball volume exactly.
    """

    spec: DomainSpec
    cell_count: int
    dr: float
    centers: np.ndarray = field(repr=False)
    faces: np.ndarray = field(repr=False)
    face_areas: np.ndarray = field(repr=False)
    cell_weights: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def radius(self) -> float:
        return self.spec.radius


def build_grid(spec: DomainSpec, cell_count: int) -> RadialGrid:
    """Build the uniform radial grid with exact shell-volume weights."""
    if cell_count < MIN_CELLS:
        raise ValueError(f"cell_count must be >= {MIN_CELLS}, got {cell_count}")
    n, radius = spec.dim, spec.radius
    dr = radius / cell_count
    faces = np.linspace(0.0, radius, cell_count + 1)
    # guard against linspace rounding at the outer face
    faces[-1] = radius
    centers = 0.5 * (faces[:-1] + faces[1:])
    face_areas = faces ** (n - 1) if n > 1 else np.ones_like(faces)
    weights = omega_n(n) * np.diff(faces ** n) / n
    return RadialGrid(
        spec=spec,
        cell_count=cell_count,
        dr=dr,
        centers=_readonly(centers),
        faces=_readonly(faces),
        face_areas=_readonly(face_areas),
        cell_weights=_readonly(weights),
    )


@dataclass(frozen=True)
class RadialState:
    """Cell densities (u) and signal (v) at one instant.  Both nonnegative."""

    time: float
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        u = _readonly(self.u)
        v = _readonly(self.v)
        if u.ndim != 1 or u.shape != v.shape:
            raise ValueError("u and v must be 1-d arrays of equal length")
        if self.time < 0:
            raise ValueError(f"time must be >= 0, got {self.time}")
        if u.size and u.min() < 0:
            raise ValueError("cell density u must be nonnegative")
        if v.size and v.min() < 0:
            raise ValueError("signal v must be nonnegative")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


def integrate(grid: RadialGrid, values: np.ndarray) -> float:
    """Discrete integral over the ball: sum of cell values times shell volumes."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.cell_count,):
        raise ValueError(
            f"field length {values.shape} does not match grid with "
            f"{grid.cell_count} cells")
    return float(np.dot(values, grid.cell_weights))


def boundary_value(grid: RadialGrid, values: np.ndarray) -> float:
    """Field value extrapolated to r = R from the two outermost cell centers.

    Linear extrapolation, 1.5*f[-1] - 0.5*f[-2]; exact for affine fields and
    second-order accurate for smooth ones.  Nonnegative fields may
    extrapolate slightly below zero near steep boundary layers; callers that
    feed the result into a flux clamp it there.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.cell_count,):
        raise ValueError(
            f"field length {values.shape} does not match grid with "
            f"{grid.cell_count} cells")
    return float(1.5 * values[-1] - 0.5 * values[-2])


def gaussian_initial(grid: RadialGrid, amplitude: float, width: float) -> RadialState:
    """Shared Gaussian bump A * exp(-r^2 / width^2) for both u and v at t = 0."""
    if not amplitude > 0:
        raise ValueError(f"amplitude must be > 0, got {amplitude}")
    if not width > 0:
        raise ValueError(f"width must be > 0, got {width}")
    profile = amplitude * np.exp(-(grid.centers / width) ** 2)
    return RadialState(time=0.0, u=profile, v=profile.copy())


def gaussian_by_mass(grid: RadialGrid, mass: float, width: float) -> RadialState:
    """Gaussian bump whose *discrete* mass equals `mass` exactly.

    The amplitude is solved from the grid quadrature rather than the
    continuum integral, so integrate(grid, u) == mass to rounding.  Handy
    when a run sits deliberately on one side of a critical-mass threshold.
    """
    if not mass > 0:
        raise ValueError(f"mass must be > 0, got {mass}")
    if not width > 0:
        raise ValueError(f"width must be > 0, got {width}")
    shape = np.exp(-(grid.centers / width) ** 2)
    amplitude = mass / integrate(grid, shape)
    profile = amplitude * shape
    return RadialState(time=0.0, u=profile, v=profile.copy())


def entropy_integrand(u: np.ndarray) -> np.ndarray:
    """u * ln(u) with the continuous extension 0 * ln(0) := 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = u[pos] * np.log(u[pos])
    return out


@dataclass(frozen=True)
class GaussianBump:
    """Initial-data descriptor: Gaussian with either fixed amplitude or mass.

    Exactly one of `amplitude` and `mass` must be set.
    """

    width: float = 1.0
    amplitude: float | None = None
    mass: float | None = None

    def __post_init__(self) -> None:
        if (self.amplitude is None) == (self.mass is None):
            raise ValueError("set exactly one of amplitude and mass")
        if not self.width > 0:
            raise ValueError(f"width must be > 0, got {self.width}")

    def build(self, grid: RadialGrid) -> RadialState:
        if self.amplitude is not None:
            return gaussian_initial(grid, self.amplitude, self.width)
        return gaussian_by_mass(grid, self.mass, self.width)


@dataclass(frozen=True)
class RunConfig:
    """Everything one simulation needs, plus step-control knobs.

    The controller fields mirror StepController defaults; configs may
    override them per run.  `weighted_mass` optionally names the (m, mu)
    pair monitored by the weighted-mass diagnostic; it is validated in the
    diagnostics layer against chi, b and c.
    """

    params: ModelParams
    source: SourceSpec
    grid: RadialGrid
    initial: GaussianBump
    t_end: float
    dt_init: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = 0.5
    u_max_threshold: float = 1e8
    sample_interval: float = 0.5
    cfl_target: float = 0.4
    growth_cap: float = 0.1
    weighted_mass: object | None = None

    def __post_init__(self) -> None:
        if not self.t_end > 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError(
                f"need 0 < dt_min <= dt_init <= dt_max, got "
                f"({self.dt_min}, {self.dt_init}, {self.dt_max})")
        if not self.sample_interval > 0:
            raise ValueError(
                f"sample_interval must be > 0, got {self.sample_interval}")
        if not (0 < self.cfl_target <= 1):
            raise ValueError(f"cfl_target must lie in (0, 1], got {self.cfl_target}")
        if not self.growth_cap > 0:
            raise ValueError(f"growth_cap must be > 0, got {self.growth_cap}")
        u0_max = float(self.initial.build(self.grid).u.max())
        if not self.u_max_threshold > u0_max:
            raise ValueError(
                f"u_max_threshold ({self.u_max_threshold}) must exceed the "
                f"initial peak density ({u0_max})")

    def initial_state(self) -> RadialState:
        return self.initial.build(self.grid)


def zero_flux_sourceless(params: ModelParams, source: SourceSpec) -> bool:
    """True for the conservative comparison system: alpha = 0, no sources."""
    return params.alpha == 0.0 and source.is_zero
