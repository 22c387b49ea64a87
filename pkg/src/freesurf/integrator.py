"""Classical RK4 time stepping with CFL control, stop monitors and recording."""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from . import spectral as sp
from .dynamics import EXACT, NumericalBreakdown, RhsVariant, rhs_coeffs
from .spectral import GridSpec, RealField

__all__ = [
    "SERIES_COLUMNS",
    "State",
    "SolverConfig",
    "StopReason",
    "RunRecord",
    "rk4_step",
    "choose_dt",
    "integrate",
]

SERIES_COLUMNS = (
    "t", "H", "Hs_norm", "linf_slope", "inf_slope", "sup_slope",
    "xi_inf", "xi_sup", "slope_integral",
)

TRANSPORT_SPEED = 3.5  # |d(speed)/d eta| of the transport part, 1 + 7/2 |eta|


class StopReason(str, enum.Enum):
    REACHED_T_END = "reached_t_end"
    SLOPE_THRESHOLD = "slope_threshold"
    ENERGY_DRIFT = "energy_drift"
    NONFINITE = "nonfinite"


@dataclass(frozen=True)
class State:
    t: float
    eta: RealField

    def __post_init__(self):
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise ValueError(f"time must be finite and >= 0, got {self.t}")


@dataclass(frozen=True)
class SolverConfig:
    """Time-integration settings.

    ``slope_stop`` is the desk-scale stand-in for the slope blow-up
    criterion; ``energy_drift_stop`` halts runs that no longer resolve
    the solution. With ``record_dt`` set, records land exactly on its
    multiples (in addition to every ``record_every``-th step if that is
    also meant; set ``record_every`` large to disable).
    """

    t_end: float
    dt_init: float
    cfl: float = 0.3
    slope_stop: float = 1e3
    energy_drift_stop: float = 1e-4
    record_every: int = 10
    variant: RhsVariant = EXACT
    record_dt: float | None = None

    def __post_init__(self):
        for name in ("t_end", "dt_init", "cfl", "slope_stop", "energy_drift_stop"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if self.dt_init > self.t_end:
            raise ValueError(f"dt_init={self.dt_init} exceeds t_end={self.t_end}")
        if not (isinstance(self.record_every, (int, np.integer)) and self.record_every >= 1):
            raise ValueError(f"record_every must be a positive integer, got {self.record_every!r}")
        if self.record_dt is not None and not (math.isfinite(self.record_dt) and self.record_dt > 0):
            raise ValueError(f"record_dt must be positive, got {self.record_dt!r}")
        if not isinstance(self.variant, RhsVariant):
            raise TypeError("variant must be a RhsVariant")


@dataclass(eq=False)
class RunRecord:
    grid: GridSpec
    solver: SolverConfig
    sobolev_s: float
    series: dict[str, np.ndarray]
    snapshots: np.ndarray
    stop: StopReason
    wall_time: float = 0.0
    config: Any = None  # ExperimentConfig when produced by the harness
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.series["t"]

    @property
    def stop_time(self) -> float:
        return float(self.series["t"][-1])

    def field(self, i: int) -> RealField:
        return RealField(self.grid, self.snapshots[i])

    def __len__(self):
        return len(self.series["t"])

    def same_as(self, other: "RunRecord") -> bool:
        """Field-by-field bitwise comparison (wall time excluded)."""
        if self.grid != other.grid or self.solver != other.solver:
            return False
        if self.sobolev_s != other.sobolev_s or self.stop != other.stop:
            return False
        if set(self.series) != set(other.series):
            return False
        for k in self.series:
            if not np.array_equal(self.series[k], other.series[k]):
                return False
        return np.array_equal(self.snapshots, other.snapshots)


# ---------------------------------------------------------------------------

def _rk4_coeffs(c: np.ndarray, dt: float, grid: GridSpec, variant: RhsVariant) -> np.ndarray:
    k1 = rhs_coeffs(c, grid, variant)
    k2 = rhs_coeffs(c + 0.5 * dt * k1, grid, variant)
    k3 = rhs_coeffs(c + 0.5 * dt * k2, grid, variant)
    k4 = rhs_coeffs(c + dt * k3, grid, variant)
    return c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(state: State, dt: float, variant: RhsVariant = EXACT) -> State:
    """One classical Runge-Kutta step; raises NumericalBreakdown on non-finite stages."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = state.eta.grid
    c = _rk4_coeffs(sp.to_coeffs(state.eta.samples), dt, g, variant)
    u = sp.to_samples(c, g.n)
    if not np.all(np.isfinite(u)):
        raise NumericalBreakdown("non-finite state after RK4 step")
    return State(state.t + dt, RealField(g, u))


def _cfl_dt(eta_max: float, dx: float, config: SolverConfig) -> float:
    return min(config.dt_init, config.cfl * dx / (1.0 + TRANSPORT_SPEED * eta_max))


def _next_target(t: float, config: SolverConfig) -> float:
    target = config.t_end
    if config.record_dt is not None:
        k = math.floor(t / config.record_dt + 1e-9) + 1
        target = min(target, k * config.record_dt)
    return target


def choose_dt(state: State, config: SolverConfig) -> float:
    """``min(dt_init, cfl*dx/(1 + 7/2 |eta|_inf))``, capped to land on t_end / record times."""
    dt = _cfl_dt(state.eta.max_abs(), state.eta.grid.dx, config)
    return min(dt, _next_target(state.t, config) - state.t)


class _Recorder:
    def __init__(self, grid: GridSpec, sobolev_s: float):
        self.grid = grid
        self.s = sobolev_s
        self.rows: list[tuple] = []
        self.snaps: list[np.ndarray] = []
        self.xi_inf: float | None = None
        self.xi_sup: float | None = None

    def add(self, t: float, u: np.ndarray, slope_integral: float):
        f = RealField(self.grid, u)
        lo = sp.extremum_slope(f, "inf", near=self.xi_inf)
        hi = sp.extremum_slope(f, "sup", near=self.xi_sup)
        self.xi_inf, self.xi_sup = lo.location, hi.location
        linf = max(abs(lo.value), abs(hi.value))
        self.rows.append((t, sp.energy(f), sp.sobolev_norm(f, self.s), linf,
                          lo.value, hi.value, lo.location, hi.location, slope_integral))
        self.snaps.append(np.array(u, copy=True))

    @property
    def last_t(self):
        return self.rows[-1][0] if self.rows else None


def _energy_from_coeffs(c: np.ndarray, grid: GridSpec) -> float:
    w = sp._mode_weights(grid) * (1.0 + grid.xi ** 2)
    return 0.5 * float(np.sum(w * (c.real ** 2 + c.imag ** 2))) * grid.period


def integrate(
    eta0: RealField,
    config: SolverConfig,
    sobolev_s: float = 1.75,
    fixed_dt: float | None = None,
) -> RunRecord:
    """Step ``eta0`` to ``config.t_end`` or until a stop monitor fires.

    ``fixed_dt`` replaces the CFL rule by a constant step (still capped to
    land on record times and t_end); used by convergence studies.
    """
    if not isinstance(config, SolverConfig):
        raise TypeError("config must be a SolverConfig")
    if fixed_dt is not None and not fixed_dt > 0:
        raise ValueError("fixed_dt must be positive")
    if config.variant.mollifier is not None:
        config.variant.mollifier.check_grid(eta0.grid)

    wall0 = time.perf_counter()
    g = eta0.grid
    dx = g.dx
    dsym = sp._derivative_symbol(g, 1)
    c = sp.to_coeffs(eta0.samples)
    u = np.array(eta0.samples, copy=True)
    H0 = _energy_from_coeffs(c, g)
    rec = _Recorder(g, sobolev_s)

    def slope_linf(cc):
        return float(np.max(np.abs(sp.to_samples(cc * dsym, g.n))))

    t = 0.0
    slope_int = 0.0
    prev_slope = slope_linf(c)
    rec.add(t, u, slope_int)
    stop = StopReason.REACHED_T_END
    step = 0
    t_tol = 1e-12 * config.t_end

    while config.t_end - t > t_tol:
        eta_max = float(np.max(np.abs(u)))
        dt = fixed_dt if fixed_dt is not None else _cfl_dt(eta_max, dx, config)
        target = _next_target(t, config)
        landing = dt >= target - t - t_tol
        if landing:
            dt = target - t
        try:
            c_new = _rk4_coeffs(c, dt, g, config.variant)
            u_new = sp.to_samples(c_new, g.n)
            if not np.all(np.isfinite(u_new)):
                raise NumericalBreakdown("non-finite state")
        except NumericalBreakdown:
            stop = StopReason.NONFINITE
            break
        t = target if landing else t + dt
        c, u = c_new, u_new
        step += 1
        cur_slope = slope_linf(c)
        slope_int += 0.5 * dt * (prev_slope + cur_slope)
        prev_slope = cur_slope

        H = _energy_from_coeffs(c, g)
        drift = abs(H - H0) / H0 if H0 > 0 else abs(H)
        if not math.isfinite(H) or not math.isfinite(cur_slope):
            stop = StopReason.NONFINITE
            break
        if cur_slope > config.slope_stop:
            stop = StopReason.SLOPE_THRESHOLD
        elif drift > config.energy_drift_stop:
            stop = StopReason.ENERGY_DRIFT

        on_record_time = (config.record_dt is not None and landing
                          and abs(t / config.record_dt - round(t / config.record_dt)) < 1e-9)
        if (step % config.record_every == 0 or on_record_time
                or stop is not StopReason.REACHED_T_END or config.t_end - t <= t_tol):
            rec.add(t, u, slope_int)
        if stop is not StopReason.REACHED_T_END:
            break

    if stop is StopReason.NONFINITE and rec.last_t != t:
        rec.add(t, u, slope_int)  # last finite state
    series = {name: np.array(col, dtype=float) for name, col in zip(SERIES_COLUMNS, zip(*rec.rows))}
    return RunRecord(
        grid=g,
        solver=config,
        sobolev_s=sobolev_s,
        series=series,
        snapshots=np.array(rec.snaps),
        stop=stop,
        wall_time=time.perf_counter() - wall0,
        meta={"steps": step, "H0": H0},
    )
