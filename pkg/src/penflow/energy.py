"""Pressure-energy functional diagnostics.

The squared pressure-energy norm

    ||P||_E^2 = integral ( [dP/dt + u.grad P]^2 + (lap P)^2 ) dx,

its inner product, the Sobolev building blocks for the Banach-space norm,
the dissipation-bound fit, the blow-up accumulator, and the variational
residual against static Fourier test modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ArityError, ConfigError, DataError
from .flow import RegimeReport, ThermoParams, dissipation_phi
from .spectral import (
    RealField,
    backward,
    dealias,
    forward,
    gradient,
    l2_norm_sq,
    laplacian,
    sobolev_norm,
)

FINITE_DIFFERENCE = "finite_difference"
MODEL_RHS = "model_rhs"
MATERIAL_DERIVATIVE_MODES = (FINITE_DIFFERENCE, MODEL_RHS)

# samples with ||P||_E^2 at or below this are excluded from ratio fits
DEGENERATE_NORM = 1e-14


@dataclass(frozen=True)
class NormSample:
    """All diagnostics recorded at one output time."""

    t: float
    norm_E_sq: float
    dtP_term: float
    lap_term: float
    grad_energy: float
    ratio: float | None
    kinetic_energy: float
    h2_norm_P: float
    hminus1_norm_dtP: float
    regime: RegimeReport


@dataclass(frozen=True)
class BlowupState:
    """Running time-integral of ||P||_E^2 with a latching threshold trip."""

    threshold: float
    accumulator: float = 0.0
    tripped: bool = False


@dataclass(frozen=True)
class BoundFit:
    """Empirical dissipation-bound constant: grad_energy <= C * ||P||_E^2."""

    c_fit: float | None
    c_max: float | None
    samples_used: int


class NormSeries:
    """Time-ordered diagnostic record of one run."""

    def __init__(self, scenario=None, blowup: BlowupState | None = None):
        self.scenario = scenario
        self.samples: list[NormSample] = []
        self.blowup = blowup if blowup is not None else BlowupState(threshold=math.inf)
        self.blowup_history: list[BlowupState] = []
        self.bound: BoundFit | None = None
        self.diverged_at: float | None = None

    def append(self, sample: NormSample) -> None:
        if self.samples and sample.t <= self.samples[-1].t:
            raise DataError("sample timestamps must be strictly increasing")
        if self.samples:
            dt = sample.t - self.samples[-1].t
            self.blowup = blowup_update(self.blowup, sample, dt)
        self.samples.append(sample)
        self.blowup_history.append(self.blowup)

    def finalize(self) -> None:
        self.bound = bound_check(self)

    @property
    def tripped(self) -> bool:
        return self.blowup.tripped

    def __len__(self) -> int:
        return len(self.samples)


def _check_scalar_pair(a: RealField, b: RealField) -> None:
    a.scalar_values()
    b.scalar_values()
    if a.grid != b.grid:
        raise ArityError("fields must share a grid")


def material_derivative(
    P_prev: RealField | None,
    P_curr: RealField,
    u: RealField,
    dt: float,
    mode: str,
    params: ThermoParams,
    prefactor: float | None = None,
) -> RealField:
    """D_t P = dP/dt + u.grad P.

    finite_difference: backward difference between snapshots plus the
    dealiased convective term.  model_rhs: substitutes the pressure
    evolution equation, prefactor * Phi(u) (prefactor defaults to R/c_v).
    """
    if mode not in MATERIAL_DERIVATIVE_MODES:
        raise ConfigError(f"unknown material-derivative mode {mode!r}")
    if mode == MODEL_RHS:
        pf = params.R / params.c_v if prefactor is None else prefactor
        phi = dissipation_phi(u, params)
        return RealField(u.grid, pf * phi.data)
    if P_prev is None:
        raise DataError("finite_difference mode needs the previous snapshot")
    if dt <= 0:
        raise ConfigError("finite_difference mode needs dt > 0")
    _check_scalar_pair(P_prev, P_curr)
    conv = convective_term(P_curr, u)
    rate = (P_curr.scalar_values() - P_prev.scalar_values()) / dt
    return RealField(P_curr.grid, rate + conv.scalar_values())


def convective_term(P: RealField, u: RealField) -> RealField:
    """dealias(u.grad P), derivatives taken spectrally."""
    if u.grid != P.grid:
        raise ArityError("u and P must share a grid")
    g = backward(gradient(forward(P)))
    adv = np.sum(u.data * g.data, axis=0)
    return backward(dealias(forward(RealField(P.grid, adv))))


def norm_E_squared(P: RealField, DtP: RealField) -> tuple[float, float, float]:
    """(total, integral (DtP)^2 dx, integral (lap P)^2 dx)."""
    _check_scalar_pair(P, DtP)
    lap = backward(laplacian(forward(P)))
    dtp_term = l2_norm_sq(DtP)
    lap_term = l2_norm_sq(lap)
    return dtp_term + lap_term, dtp_term, lap_term


def inner_product_E(
    P1: RealField, DtP1: RealField, P2: RealField, DtP2: RealField
) -> float:
    """integral (DtP1*DtP2 + lapP1*lapP2) dx; symmetric and bilinear."""
    _check_scalar_pair(P1, DtP1)
    _check_scalar_pair(P2, DtP2)
    if P1.grid != P2.grid:
        raise ArityError("fields must share a grid")
    lap1 = backward(laplacian(forward(P1))).scalar_values()
    lap2 = backward(laplacian(forward(P2))).scalar_values()
    value = np.sum(DtP1.scalar_values() * DtP2.scalar_values()) + np.sum(lap1 * lap2)
    return float(value) * P1.grid.cell_volume


def norm_B(samples: Sequence[tuple[RealField, RealField]], dt: float) -> float:
    """Time-aggregated Banach norm: L2(0,T;H2) of P plus L2(0,T;H-1) of dtP.

    Both time integrals use the trapezoidal rule on uniformly spaced samples.
    """
    if len(samples) < 2:
        raise DataError("norm_B needs at least two samples")
    if dt <= 0:
        raise ConfigError("norm_B needs dt > 0")
    h2_sq = [sobolev_norm(p, 2) ** 2 for p, _ in samples]
    hm1_sq = [sobolev_norm(dtp, -1) ** 2 for _, dtp in samples]
    return float(
        np.sqrt(np.trapezoid(h2_sq, dx=dt)) + np.sqrt(np.trapezoid(hm1_sq, dx=dt))
    )


def bound_check(series: NormSeries) -> BoundFit:
    """Fit grad_energy <= C * ||P||_E^2 over a run.

    c_max is the worst pointwise ratio, c_fit the least-squares slope
    through the origin; degenerate samples are excluded.
    """
    if not series.samples:
        raise DataError("bound_check needs a nonempty series")
    xs, ys = [], []
    for s in series.samples:
        if s.norm_E_sq > DEGENERATE_NORM:
            xs.append(s.norm_E_sq)
            ys.append(s.grad_energy)
    if not xs:
        return BoundFit(c_fit=None, c_max=None, samples_used=0)
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    c_max = float(np.max(ys / xs))
    c_fit = float(np.dot(xs, ys) / np.dot(xs, xs))
    return BoundFit(c_fit=c_fit, c_max=c_max, samples_used=len(xs))


def blowup_update(state: BlowupState, sample: NormSample, dt: float) -> BlowupState:
    """accumulator += ||P||_E^2 * dt; the trip latches and never unlatches."""
    if dt <= 0:
        raise ConfigError("blowup_update needs dt > 0")
    acc = state.accumulator + sample.norm_E_sq * dt
    return replace(state, accumulator=acc, tripped=state.tripped or acc > state.threshold)


def variational_residual(
    P: RealField,
    DtP: RealField,
    u: RealField,
    test_modes: Sequence[Sequence[int]],
) -> list[float]:
    """Residual of the weak form against static test modes phi = cos(k.x).

    The test function is advected with the flow: D_t phi = u.grad phi.
    Each mode must lie inside the dealiased band |k_j| <= n/3.
    """
    _check_scalar_pair(P, DtP)
    grid = P.grid
    band = grid.n / 3.0
    coords = grid.coordinates()
    lap_p = backward(laplacian(forward(P))).scalar_values()
    dtp = DtP.scalar_values()
    out = []
    for kvec in test_modes:
        kvec = tuple(int(k) for k in kvec)
        if len(kvec) != grid.dim:
            raise ConfigError(f"test mode {kvec} has wrong dimension")
        if any(abs(k) > band for k in kvec):
            raise ConfigError(f"test mode {kvec} outside the resolved band")
        phase = sum(k * x for k, x in zip(kvec, coords))
        phi = np.cos(phase)
        sin_phase = np.sin(phase)
        dt_phi = sum(-k * u.data[j] * sin_phase for j, k in enumerate(kvec))
        lap_phi = -float(sum(k * k for k in kvec)) * phi
        value = np.sum(dtp * dt_phi + lap_p * lap_phi) * grid.cell_volume
        out.append(float(value))
    return out
