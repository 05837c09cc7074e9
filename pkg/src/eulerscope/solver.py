"""Time integration of the incompressible Euler equations in velocity form.

The state is the divergence-free spectral velocity.  The tendency is the
projected, dealiased convective term; the pressure gradient is implicit
in the projection (the explicit pressure lives in :mod:`.pressure`).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, NumericalInstabilityError
from .spectral import (
    GridSpec,
    RealField,
    SpectralField,
    VECTOR,
    curl,
    dealias,
    forward,
    inverse,
    leray_project,
    max_abs,
    mean_square,
    spectral_inner,
)

CFL_VELOCITY_FLOOR = 1e-12


@dataclass
class SolverState:
    u_hat: SpectralField
    t: float = 0.0
    step_index: int = 0
    dt: float = 0.0
    cfl: float = 0.0

    def copy(self) -> "SolverState":
        return replace(self, u_hat=self.u_hat.copy())


@dataclass
class InitialCondition:
    """Analytic initial-velocity catalog.

    kind is one of taylor_green, abc, shear, random_solenoidal.  Unused
    parameters are ignored by the other kinds.
    """

    kind: str
    amplitude: float = 1.0
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    shear_modes: tuple = (1,)
    shear_amps: tuple = (1.0,)
    spectrum_slope: float = 4.0
    k_max: int = 0          # 0 means n // 4
    seed: int = 0


def velocity_gradient_spectral(u_hat: SpectralField) -> np.ndarray:
    """All nine du_i/dx_j as a (3, 3, n, n, n/2+1) coefficient block."""
    ik = u_hat.grid.ik
    return np.stack([np.stack([u_hat.data[i] * ik[j] for j in range(3)])
                     for i in range(3)])


def velocity_gradient_physical(u_hat: SpectralField) -> np.ndarray:
    """Nodal du_i/dx_j, shape (3, 3, n, n, n)."""
    from scipy import fft as _fft
    g = velocity_gradient_spectral(u_hat)
    return _fft.irfftn(g, s=u_hat.grid.real_shape, axes=(2, 3, 4), norm="forward")


def rhs(u_hat: SpectralField) -> SpectralField:
    """Projected convective tendency -P[(u . grad) u], dealiased."""
    if u_hat.ncomp != VECTOR:
        raise ConfigurationError("rhs expects a vector velocity field")
    u = inverse(u_hat).data
    du = velocity_gradient_physical(u_hat)
    conv = np.einsum("jxyz,ijxyz->ixyz", u, du)
    if not np.isfinite(conv).all():
        raise NumericalInstabilityError("NaN in convective term", state=u_hat)
    tendency = leray_project(dealias(forward(RealField(u_hat.grid, conv))))
    return SpectralField(u_hat.grid, -tendency.data)


def step(state: SolverState, dt: float, umax_abort: float | None = None) -> SolverState:
    """One classical RK4 step; re-projects after the combined stage."""
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    u = state.u_hat
    k1 = rhs(u)
    k2 = rhs(SpectralField(u.grid, u.data + 0.5 * dt * k1.data))
    k3 = rhs(SpectralField(u.grid, u.data + 0.5 * dt * k2.data))
    k4 = rhs(SpectralField(u.grid, u.data + dt * k3.data))
    new_data = u.data + (dt / 6.0) * (k1.data + 2 * k2.data + 2 * k3.data + k4.data)
    u_new = leray_project(SpectralField(u.grid, new_data))
    if umax_abort is not None:
        umax = max_velocity(u_new)
        if umax > umax_abort:
            raise NumericalInstabilityError(
                f"velocity sup {umax:.3e} exceeded the abort threshold {umax_abort:.3e}",
                state=u_new)
    return SolverState(u_hat=u_new, t=state.t + dt, step_index=state.step_index + 1,
                       dt=dt, cfl=state.cfl)


def cfl_dt(u_hat: SpectralField, cfl: float, dt_max: float = np.inf) -> float:
    """Advective time step cfl * h / max|u|, floored and capped."""
    if not 0.0 < cfl <= 1.0:
        raise ConfigurationError(f"cfl must lie in (0, 1], got {cfl}")
    umax = max(max_velocity(u_hat), CFL_VELOCITY_FLOOR)
    return min(cfl * u_hat.grid.h / umax, dt_max)


def max_velocity(u_hat: SpectralField) -> float:
    return max_abs(inverse(u_hat))


def kinetic_energy(u_hat: SpectralField) -> float:
    """E = <|u|^2>/2 via Parseval."""
    return 0.5 * float(mean_square(u_hat).sum())


def helicity(u_hat: SpectralField) -> float:
    """<u . omega>, spectrally exact."""
    return spectral_inner(u_hat, curl(u_hat))


def energy_input(u_hat: SpectralField, tendency: SpectralField) -> float:
    """<u . du/dt>; vanishes for the projected convective term."""
    return spectral_inner(u_hat, tendency)


def _require_band(grid: GridSpec, mode: int):
    if mode > grid.dealias_cutoff:
        raise ConfigurationError(
            f"requested mode {mode} exceeds the dealias cutoff {grid.dealias_cutoff}")


def make_initial(ic: InitialCondition, grid: GridSpec) -> SpectralField:
    """Build a divergence-free, band-limited spectral velocity."""
    x, y, z = grid.mesh()
    if ic.kind == "taylor_green":
        _require_band(grid, 1)
        amp = ic.amplitude
        u = np.stack([
            amp * np.cos(x) * np.sin(y) * np.sin(z),
            -amp * np.sin(x) * np.cos(y) * np.sin(z),
            np.zeros(grid.real_shape),
        ])
    elif ic.kind == "abc":
        _require_band(grid, 1)
        a, b, c = ic.a, ic.b, ic.c
        u = np.stack([
            a * np.sin(z) + c * np.cos(y),
            b * np.sin(x) + a * np.cos(z),
            c * np.sin(y) + b * np.cos(x),
        ])
    elif ic.kind == "shear":
        if len(ic.shear_modes) != len(ic.shear_amps):
            raise ConfigurationError("shear_modes and shear_amps lengths differ")
        f = np.zeros(grid.real_shape)
        for m, a in zip(ic.shear_modes, ic.shear_amps):
            _require_band(grid, int(m))
            f += a * np.sin(m * y)
        u = np.stack([f, np.zeros_like(f), np.zeros_like(f)])
    elif ic.kind == "random_solenoidal":
        return _random_solenoidal(ic, grid)
    else:
        raise ConfigurationError(f"unknown initial-condition kind {ic.kind!r}")
    return leray_project(dealias(forward(RealField(grid, u))))


def _random_solenoidal(ic: InitialCondition, grid: GridSpec) -> SpectralField:
    # white noise shaped so the shell-summed energy spectrum falls like k^-slope
    k_max = ic.k_max if ic.k_max > 0 else grid.n // 4
    _require_band(grid, k_max)
    rng = np.random.default_rng(ic.seed)
    white = RealField(grid, rng.standard_normal((3,) + grid.real_shape))
    W = forward(white)
    kmag = np.sqrt(grid.k2)
    shape = np.zeros_like(kmag)
    band = (kmag >= 1.0) & (kmag <= k_max)
    np.divide(1.0, kmag ** ((ic.spectrum_slope + 2.0) / 2.0), out=shape, where=band)
    U = leray_project(SpectralField(grid, W.data * shape))
    umax = max_velocity(U)
    if umax == 0.0:
        raise ConfigurationError("random initial condition collapsed to zero")
    return SpectralField(grid, U.data * (ic.amplitude / umax))
