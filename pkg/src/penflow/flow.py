"""Physical state and thermodynamic closures.

Velocity/pressure/temperature fields, the ideal-gas closure P = rho*R*T,
the viscous dissipation function Phi = 2*mu*sum_ij (du_i/dx_j)^2, the
Leray projection onto divergence-free fields, and the quasi-incompressible
regime check (relative temperature deviation below 2%).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArityError, ConfigError, RegimeError
from .spectral import (
    GridSpec,
    RealField,
    backward,
    derivative_wavevectors,
    divergence,
    forward,
    gradient,
    integrate,
    laplacian,
    poisson_solve,
    sobolev_norm,
)

DIVERGENCE_TOL = 1e-8
REGIME_LIMIT = 0.02


@dataclass(frozen=True)
class ThermoParams:
    """Constant-density ideal-gas parameters (air-like defaults).

    Q is an optional external heat source field; it only enters the
    pressure-model evolution.
    """

    rho: float = 1.0
    R: float = 287.0
    c_v: float = 717.5
    mu: float = 0.1
    Q: RealField | None = None

    def __post_init__(self):
        for name in ("rho", "R", "c_v", "mu"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.Q is not None and not self.Q.is_scalar:
            raise ArityError("Q must be a scalar field")

    @property
    def nu(self) -> float:
        """Kinematic viscosity mu/rho used by the solver."""
        return self.mu / self.rho


@dataclass(frozen=True)
class RegimeReport:
    """Quasi-incompressibility check: max |T - T0|/T0 against the 2% limit."""

    delta_T_rel: float
    in_regime: bool
    T_h2_norm: float


class FlowState:
    """Coupled (u, P) snapshot at one time.

    u must be divergence-free (max |div u| < 1e-8) and P carries the
    zero-mean gauge; the constant reference pressure lives in the scenario
    configuration.
    """

    __slots__ = ("t", "u", "P", "params")

    def __init__(self, t: float, u: RealField, P: RealField, params: ThermoParams):
        if u.components != u.grid.dim:
            raise ArityError("u must have one component per dimension")
        P.scalar_values()
        if P.grid != u.grid:
            raise ArityError("u and P must share a grid")
        # raw FFTs here: backward()'s Hermitian gate would choke on the
        # cancellation roundoff of a nearly-diverged (huge-amplitude) field
        axes = tuple(range(1, u.grid.dim + 1))
        kd = derivative_wavevectors(u.grid)
        div_hat = np.sum(1j * kd * np.fft.fftn(u.data, axes=axes), axis=0)
        div = np.fft.ifftn(div_hat, axes=tuple(range(u.grid.dim))).real
        u_scale = max(1.0, float(np.max(np.abs(u.data))))
        if np.max(np.abs(div)) >= DIVERGENCE_TOL * u_scale:
            raise ArityError("velocity field is not divergence-free")
        p_scale = max(1.0, float(np.max(np.abs(P.data))))
        if abs(float(np.mean(P.data))) > 1e-8 * p_scale:
            raise ArityError("pressure fluctuation must have zero mean")
        self.t = float(t)
        self.u = u
        self.P = P
        self.params = params

    @property
    def grid(self) -> GridSpec:
        return self.u.grid


def temperature_from_pressure(
    P: RealField, params: ThermoParams, P0: float
) -> RealField:
    """Ideal gas law: T = (P0 + P)/(rho*R), pointwise."""
    if P0 <= 0:
        raise ConfigError("reference pressure P0 must be positive")
    total = P0 + P.scalar_values()
    if np.min(total) <= 0:
        raise RegimeError("total pressure nonpositive somewhere on the grid")
    return RealField(P.grid, total / (params.rho * params.R))


def velocity_gradients(u: RealField) -> np.ndarray:
    """Spectral derivatives du_i/dx_j, shape (components, dim, n, ..., n)."""
    grid = u.grid
    out = np.empty((u.components, grid.dim) + grid.shape)
    for i in range(u.components):
        g = backward(gradient(forward(RealField(grid, u.data[i]))))
        out[i] = g.data
    return out


def dissipation_phi(u: RealField, params: ThermoParams) -> RealField:
    """Phi(x) = 2*mu*sum_ij (du_i/dx_j)^2; nonnegative everywhere."""
    g = velocity_gradients(u)
    return RealField(u.grid, 2.0 * params.mu * np.sum(g * g, axis=(0, 1)))


def gradient_energy(u: RealField) -> float:
    """integral sum_ij (du_i/dx_j)^2 dx, same derivatives as dissipation_phi."""
    g = velocity_gradients(u)
    return float(np.sum(g * g)) * u.grid.cell_volume


def kinetic_energy(u: RealField) -> float:
    """integral |u|^2/2 dx."""
    return 0.5 * float(np.sum(u.data * u.data)) * u.grid.cell_volume


def leray_project(v: RealField) -> RealField:
    """v minus the gradient part: v - grad(poisson_solve(div v)).

    Linear, idempotent, kills pure gradients, keeps the mean modes.
    """
    d = poisson_solve(divergence(forward(v)))
    g = backward(gradient(d))
    return RealField(v.grid, v.data - g.data)


def regime_check(state: FlowState, T0: float) -> RegimeReport:
    """Report max relative temperature deviation and the H^2 norm of T."""
    if T0 <= 0:
        raise ConfigError("reference temperature T0 must be positive")
    params = state.params
    P0 = params.rho * params.R * T0
    T = temperature_from_pressure(state.P, params, P0)
    delta = float(np.max(np.abs(T.scalar_values() - T0))) / T0
    return RegimeReport(
        delta_T_rel=delta,
        in_regime=delta < REGIME_LIMIT,
        T_h2_norm=sobolev_norm(T, 2),
    )


def strain_rate_dissipation(u: RealField, params: ThermoParams) -> RealField:
    """Standard strain-rate form 2*mu*sum_ij S_ij^2, for comparison only."""
    g = velocity_gradients(u)
    s = 0.5 * (g + np.swapaxes(g, 0, 1))
    return RealField(u.grid, 2.0 * params.mu * np.sum(s * s, axis=(0, 1)))


def laplacian_field(f: RealField) -> RealField:
    """Physical-space Laplacian via the spectral operator."""
    return backward(laplacian(forward(f)))


__all__ = [
    "ThermoParams",
    "RegimeReport",
    "FlowState",
    "temperature_from_pressure",
    "velocity_gradients",
    "dissipation_phi",
    "gradient_energy",
    "kinetic_energy",
    "leray_project",
    "regime_check",
    "strain_rate_dissipation",
    "laplacian_field",
    "integrate",
]
