"""RK4 pseudo-spectral time integration on the periodic box.

Advances the incompressible momentum equation with Leray projection at
every substage, recovers the Navier-Stokes pressure from a Poisson solve,
and co-evolves the model pressure driven by viscous dissipation
(dP/dt + u.grad P = (R/c_v)*Phi) for comparison against it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .energy import (
    MATERIAL_DERIVATIVE_MODES,
    MODEL_RHS,
    BlowupState,
    NormSample,
    NormSeries,
    material_derivative,
    norm_E_squared,
)
from .errors import ConfigError, DataError, DivergenceError
from .flow import (
    FlowState,
    ThermoParams,
    dissipation_phi,
    gradient_energy,
    kinetic_energy,
    leray_project,
    regime_check,
)
from .spectral import (
    GridSpec,
    RealField,
    SpectralField,
    backward,
    dealias_mask,
    divergence,
    inv_ksq,
    ksq,
    poisson_solve,
    sobolev_norm,
    derivative_wavevectors,
    wavevectors,
)

IC_KINDS = ("taylor_green_2d", "taylor_green_3d", "random_divfree")

# long-time accumulator limit of the shipped Taylor-Green baseline (~47.8),
# times ten
DEFAULT_BLOWUP_THRESHOLD = 478.0


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    nu: float = 0.1
    scheme: str = "rk4"
    cfl_safety: float = 0.5
    # override for the pressure-model source prefactor (defaults to R/c_v)
    source_prefactor: float | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")
        if self.nu < 0:
            raise ConfigError("nu must be nonnegative")
        if self.scheme != "rk4":
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigError("cfl_safety must lie in (0, 1]")


@dataclass(frozen=True)
class InitialCondition:
    kind: str = "taylor_green_2d"
    amplitude: float = 1.0
    seed: int = 0
    spectrum_peak: int = 4

    def __post_init__(self):
        if self.kind not in IC_KINDS:
            raise ConfigError(f"unknown initial condition {self.kind!r}")
        if self.spectrum_peak < 1:
            raise ConfigError("spectrum_peak must be >= 1")


@dataclass(frozen=True)
class ScenarioConfig:
    """Full experiment description."""

    grid: GridSpec = field(default_factory=lambda: GridSpec(dim=2, n=64))
    ic: InitialCondition = field(default_factory=InitialCondition)
    solver: SolverConfig = field(default_factory=SolverConfig)
    thermo: ThermoParams = field(default_factory=ThermoParams)
    P0: float = 101325.0
    T0: float | None = None
    mode: str = MODEL_RHS
    blowup_threshold: float = DEFAULT_BLOWUP_THRESHOLD
    output_every: int = 10
    output_dir: str = "runs/out"

    def __post_init__(self):
        if self.P0 <= 0:
            raise ConfigError("P0 must be positive")
        if self.mode not in MATERIAL_DERIVATIVE_MODES:
            raise ConfigError(f"unknown diagnostic mode {self.mode!r}")
        if self.output_every < 1:
            raise ConfigError("output_every must be >= 1")
        if self.T0 is None:
            object.__setattr__(
                self, "T0", self.P0 / (self.thermo.rho * self.thermo.R)
            )
        elif self.T0 <= 0:
            raise ConfigError("T0 must be positive")

    @property
    def seed(self) -> int:
        return self.ic.seed


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------


def make_initial(
    ic: InitialCondition, grid: GridSpec, params: ThermoParams | None = None
) -> FlowState:
    """Divergence-free initial state with P from the pressure Poisson solve."""
    params = params if params is not None else ThermoParams()
    if ic.kind == "taylor_green_2d":
        if grid.dim != 2:
            raise ConfigError("taylor_green_2d requires a 2D grid")
        x, y = grid.coordinates()
        u = np.stack(
            [
                ic.amplitude * np.sin(x) * np.cos(y),
                -ic.amplitude * np.cos(x) * np.sin(y),
            ]
        )
    elif ic.kind == "taylor_green_3d":
        if grid.dim != 3:
            raise ConfigError("taylor_green_3d requires a 3D grid")
        x, y, z = grid.coordinates()
        u = np.stack(
            [
                ic.amplitude * np.sin(x) * np.cos(y) * np.cos(z),
                -ic.amplitude * np.cos(x) * np.sin(y) * np.cos(z),
                np.zeros(grid.shape),
            ]
        )
    else:
        u = _random_divfree(ic, grid)
    u_field = leray_project(RealField(grid, u))
    P = pressure_poisson(u_field, params)
    return FlowState(0.0, u_field, P, params)


def _random_divfree(ic: InitialCondition, grid: GridSpec) -> np.ndarray:
    """Band-limited Gaussian modes, solenoidally projected, rms = amplitude."""
    rng = np.random.default_rng(ic.seed)
    raw = rng.standard_normal((grid.dim,) + grid.shape)
    c = np.fft.fftn(raw, axes=tuple(range(1, grid.dim + 1)))
    kk = np.sqrt(ksq(grid))
    envelope = np.exp(-((kk - ic.spectrum_peak) ** 2))
    envelope[kk == 0] = 0.0
    envelope *= dealias_mask(grid)
    u = np.fft.ifftn(c * envelope, axes=tuple(range(1, grid.dim + 1))).real
    proj = leray_project(RealField(grid, u)).data
    rms = np.sqrt(np.mean(np.sum(proj * proj, axis=0)))
    if rms > 0:
        proj = proj * (ic.amplitude / rms)
    return proj


# ---------------------------------------------------------------------------
# spectral kernels (unnormalized fftn layout, shape (comp, n, ..., n))
# ---------------------------------------------------------------------------


def _axes(grid: GridSpec) -> tuple[int, ...]:
    return tuple(range(1, grid.dim + 1))


def _advection_hat(u_hat: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Dealiased fftn(u.grad u)."""
    axes = _axes(grid)
    k = derivative_wavevectors(grid)
    u = np.fft.ifftn(u_hat, axes=axes).real
    adv = np.empty_like(u)
    for i in range(grid.dim):
        g = np.fft.ifftn(1j * k * u_hat[i], axes=axes).real
        adv[i] = np.sum(u * g, axis=0)
    return np.fft.fftn(adv, axes=axes) * dealias_mask(grid)


def _project_hat(v_hat: np.ndarray, grid: GridSpec) -> np.ndarray:
    k = wavevectors(grid)
    kdotv = np.sum(k * v_hat, axis=0)
    return v_hat - k * (kdotv * inv_ksq(grid))


def _momentum_rhs(u_hat: np.ndarray, nu: float, grid: GridSpec) -> np.ndarray:
    adv = _advection_hat(u_hat, grid)
    return _project_hat(-adv, grid) - nu * ksq(grid) * u_hat


def effective_dt(state: FlowState, cfg: SolverConfig) -> float:
    """cfg.dt capped by the CFL condition cfl_safety*h/max|u|."""
    umax = float(np.max(np.abs(state.u.data)))
    if umax == 0.0:
        return cfg.dt
    return min(cfg.dt, cfg.cfl_safety * state.grid.h / umax)


def pressure_poisson(u: RealField, params: ThermoParams) -> RealField:
    """Zero-mean P with lap P = -rho * div(u.grad u), quadratic term dealiased."""
    grid = u.grid
    u_hat = np.fft.fftn(u.data, axes=_axes(grid))
    adv_hat = _advection_hat(u_hat, grid) / grid.n**grid.dim
    div_adv = divergence(SpectralField(grid, adv_hat))
    rhs = SpectralField(grid, -params.rho * div_adv.coeffs)
    return backward(poisson_solve(rhs))


def step(state: FlowState, cfg: SolverConfig, dt: float | None = None) -> FlowState:
    """One RK4 step of the projected momentum equation; recomputes P."""
    grid = state.grid
    dt = effective_dt(state, cfg) if dt is None else dt
    axes = _axes(grid)
    u_hat = np.fft.fftn(state.u.data, axes=axes)

    def f(uh):
        return _momentum_rhs(uh, cfg.nu, grid)

    k1 = f(u_hat)
    k2 = f(u_hat + 0.5 * dt * k1)
    k3 = f(u_hat + 0.5 * dt * k2)
    k4 = f(u_hat + dt * k3)
    u_new_hat = _project_hat(u_hat + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), grid)
    u_new = np.fft.ifftn(u_new_hat, axes=axes).real
    t_new = state.t + dt
    if not np.all(np.isfinite(u_new)) or np.max(np.abs(u_new)) > 1e100:
        raise DivergenceError(t_new)
    u_field = RealField(grid, u_new)
    P = pressure_poisson(u_field, state.params)
    return FlowState(t_new, u_field, P, state.params)


def evolve_pressure_model(
    state: FlowState,
    P_model: RealField,
    cfg: SolverConfig,
    dt: float | None = None,
) -> RealField:
    """One RK4 step of dP/dt = -dealias(u.grad P) + prefactor*(Phi + Q).

    u is frozen at the current solver state for the whole step; the
    prefactor defaults to R/c_v.
    """
    grid = state.grid
    params = state.params
    dt = effective_dt(state, cfg) if dt is None else dt
    pf = (
        params.R / params.c_v
        if cfg.source_prefactor is None
        else cfg.source_prefactor
    )
    source = pf * dissipation_phi(state.u, params).scalar_values()
    if params.Q is not None:
        source = source + pf * params.Q.scalar_values()
    axes = tuple(range(grid.dim))
    k = derivative_wavevectors(grid)
    mask = dealias_mask(grid)
    u = state.u.data

    def f(p):
        p_hat = np.fft.fftn(p, axes=axes)
        adv = np.zeros_like(p)
        for j in range(grid.dim):
            adv += u[j] * np.fft.ifftn(1j * k[j] * p_hat, axes=axes).real
        adv = np.fft.ifftn(np.fft.fftn(adv, axes=axes) * mask, axes=axes).real
        return -adv + source

    p = P_model.scalar_values()
    k1 = f(p)
    k2 = f(p + 0.5 * dt * k1)
    k3 = f(p + 0.5 * dt * k2)
    k4 = f(p + dt * k3)
    p_new = p + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(p_new)):
        raise DivergenceError(state.t + dt)
    return RealField(grid, p_new)


# ---------------------------------------------------------------------------
# experiment driver
# ---------------------------------------------------------------------------


@dataclass
class RunSample:
    """One output sample emitted by simulate()."""

    index: int
    state: FlowState
    p_model: RealField
    dtp: RealField
    sample: NormSample


def _diagnose(
    cfg: ScenarioConfig,
    state: FlowState,
    p_prev: RealField | None,
    dt_step: float,
) -> tuple[NormSample, RealField]:
    """Diagnostics on the Navier-Stokes-consistent pressure state.P."""
    params = state.params
    if cfg.mode == MODEL_RHS or p_prev is None:
        # first sample of a finite_difference run has no snapshot yet;
        # fall back to the model right-hand side there
        dtp = material_derivative(
            None, state.P, state.u, dt_step, MODEL_RHS, params,
            prefactor=cfg.solver.source_prefactor,
        )
    else:
        dtp = material_derivative(
            p_prev, state.P, state.u, dt_step, cfg.mode, params
        )
    total, dtp_term, lap_term = norm_E_squared(state.P, dtp)
    ge = gradient_energy(state.u)
    sample = NormSample(
        t=state.t,
        norm_E_sq=total,
        dtP_term=dtp_term,
        lap_term=lap_term,
        grad_energy=ge,
        ratio=ge / total if total > 1e-14 else None,
        kinetic_energy=kinetic_energy(state.u),
        h2_norm_P=sobolev_norm(state.P, 2),
        hminus1_norm_dtP=sobolev_norm(dtp, -1),
        regime=regime_check(state, cfg.T0),
    )
    return sample, dtp


def simulate(
    cfg: ScenarioConfig, perturb_u0: float = 0.0
) -> Iterator[RunSample]:
    """Yield diagnostics at t=0 and every output_every steps until t_end.

    perturb_u0 multiplies the initial velocity by (1 + perturb_u0), used by
    the twin-run uniqueness probe.  Raises DivergenceError on NaN/Inf.
    """
    state = make_initial(cfg.ic, cfg.grid, cfg.thermo)
    if perturb_u0 != 0.0:
        u = RealField(cfg.grid, (1.0 + perturb_u0) * state.u.data)
        state = FlowState(0.0, u, pressure_poisson(u, cfg.thermo), cfg.thermo)
    p_model = state.P
    dt_step = cfg.solver.dt

    sample, dtp = _diagnose(cfg, state, None, dt_step)
    yield RunSample(0, state, p_model, dtp, sample)

    t_end = cfg.solver.t_end
    step_idx = 0
    while state.t < t_end - 1e-12:
        dt = min(effective_dt(state, cfg.solver), t_end - state.t)
        p_prev = state.P
        p_model = evolve_pressure_model(state, p_model, cfg.solver, dt=dt)
        state = step(state, cfg.solver, dt=dt)
        step_idx += 1
        if step_idx % cfg.output_every == 0 or state.t >= t_end - 1e-12:
            sample, dtp = _diagnose(cfg, state, p_prev, dt)
            yield RunSample(step_idx, state, p_model, dtp, sample)


def run(
    cfg: ScenarioConfig,
    on_sample: Callable[[RunSample], None] | None = None,
) -> NormSeries:
    """Integrate to t_end (or divergence) and collect the diagnostic series."""
    series = NormSeries(
        scenario=cfg, blowup=BlowupState(threshold=cfg.blowup_threshold)
    )
    try:
        for rs in simulate(cfg):
            series.append(rs.sample)
            if on_sample is not None:
                on_sample(rs)
    except DivergenceError as exc:
        series.diverged_at = exc.time
    series.finalize()
    return series


# ---------------------------------------------------------------------------
# checkpoint format: "PEM1" | dim u32 | n u32 | components u32 | time f64,
# little-endian, then float64 samples in row-major order
# ---------------------------------------------------------------------------

CHECKPOINT_MAGIC = b"PEM1"
_HEADER = struct.Struct("<4sIIId")


def save_checkpoint(path, f: RealField, time: float) -> None:
    grid = f.grid
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(CHECKPOINT_MAGIC, grid.dim, grid.n, f.components, time)
        )
        fh.write(np.ascontiguousarray(f.data, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[RealField, float]:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise DataError(f"truncated checkpoint {path}")
        magic, dim, n, components, time = _HEADER.unpack(header)
        if magic != CHECKPOINT_MAGIC:
            raise DataError(f"bad checkpoint magic in {path}")
        grid = GridSpec(dim=dim, n=n)
        count = components * n**dim
        data = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
        field_data = data.reshape((components,) + grid.shape).astype(np.float64)
    return RealField(grid, field_data), time
