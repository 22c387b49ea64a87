"""Quantitative wave-breaking machinery.

* :func:`predict` evaluates the breaking constants of a datum: ``C0``, the
  steepness hypothesis ``M0 > sqrt(2 C0 / 7)``, ``sigma`` and the bound
  ``T0 = 2 / (7 (1 - sigma) M0)``.
* :func:`slope_dynamics_check` rebuilds the extremal-slope trace of a run
  and compares the finite-difference ``dM/dt`` with the Riccati forms.
* :func:`riccati_envelope` is the lower envelope obtained by integrating
  ``dM/dt >= 7/2 (1 - sigma) M^2``.
* :func:`advance_characteristics` integrates ``dq/dt = eta(t, q)`` through
  the recorded snapshots.

On the slope identity: differentiating the right-hand side at a critical
point of ``eta_x`` gives

    dM/dt = 7/2 M^2 + f(xi) + 7/2 g_x*(eta_x eta_xx)(xi)
          = 7/4 M^2 + 7/4 G(eta_x^2)(xi) + f(xi),

where the last convolution term is not part of ``f``. The trace carries
both the two-term form ``7/2 M^2 + f`` and the complete one, so the report
can say which of them the data follow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import spectral as sp
from .dynamics import f_functional, omitted_slope_term
from .integrator import RunRecord
from .spectral import RealField

__all__ = [
    "BreakingPrediction",
    "breaking_constant",
    "predict",
    "SlopeTrace",
    "SlopeReport",
    "SparseRecordingError",
    "slope_dynamics_check",
    "riccati_envelope",
    "CharacteristicSet",
    "advance_characteristics",
    "gronwall_fit",
]

Kind = Literal["inf", "sup"]

RICCATI = 3.5          # coefficient of M^2 in the two-term slope equation
RICCATI_FULL = 1.75    # coefficient of M^2 once the convolution term is kept


def breaking_constant(h1: float) -> float:
    """``C0 = 1/2 + 3 h^2 + 3/16 h^3 + 3/32 h^4`` with ``h = ||eta0||_{H^1}``."""
    return 0.5 + 3.0 * h1 ** 2 + 3.0 / 16.0 * h1 ** 3 + 3.0 / 32.0 * h1 ** 4


@dataclass(frozen=True)
class BreakingPrediction:
    h1_norm: float
    C0: float
    extremum_kind: Kind
    M0: float
    x0: float
    hypothesis_ok: bool
    sigma: float | None = None
    T0_bound: float | None = None

    @property
    def threshold(self) -> float:
        """Smallest initial slope that satisfies the hypothesis."""
        return math.sqrt(2.0 * self.C0 / 7.0)


def _prediction(h1: float, M0: float, x0: float, kind: Kind) -> BreakingPrediction:
    C0 = breaking_constant(h1)
    ok = bool(M0 > math.sqrt(2.0 * C0 / 7.0))
    sigma = T0 = None
    if ok:
        sigma = 2.0 * C0 / (7.0 * M0 * M0)
        T0 = 2.0 / (7.0 * (1.0 - sigma) * M0)
    return BreakingPrediction(h1, C0, kind, M0, x0, ok, sigma, T0)


def predict(eta0: RealField, kind: Kind = "sup") -> BreakingPrediction:
    """Breaking constants of ``eta0`` for the requested slope extremum.

    For data decaying at the box edge the slope has zero mean, so with
    ``kind="inf"`` the hypothesis can never hold; that case is still
    computed and simply reports ``hypothesis_ok=False``.
    """
    if kind not in ("inf", "sup"):
        raise ValueError(f"kind must be 'inf' or 'sup', got {kind!r}")
    h1 = sp.sobolev_norm(eta0, 1.0)
    ext = sp.extremum_slope(eta0, kind)
    return _prediction(h1, float(ext.value), float(ext.location), kind)


def riccati_envelope(pred: BreakingPrediction, t: float) -> float:
    """``M0 / (1 - 7/2 (1 - sigma) t M0)``: the lower bound on ``M(t)``."""
    if not pred.hypothesis_ok:
        raise ValueError("envelope requires a prediction satisfying the hypothesis")
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError(f"t must be finite and >= 0, got {t}")
    denom = 1.0 - 3.5 * (1.0 - pred.sigma) * t * pred.M0
    if denom <= 0:
        raise ValueError(f"t={t} is at or beyond the envelope pole T0={pred.T0_bound}")
    return pred.M0 / denom


# ---------------------------------------------------------------------------
# slope trace


class SparseRecordingError(ValueError):
    """The run was not recorded densely enough to difference M(t)."""


@dataclass
class SlopeTrace:
    times: np.ndarray
    M: np.ndarray
    xi: np.ndarray
    f_at_xi: np.ndarray
    riccati_rhs: np.ndarray        # 7/2 M^2 + f
    full_rhs: np.ndarray           # 7/2 M^2 + f + 7/2 g_x*(eta_x eta_xx)
    dMdt: np.ndarray               # centred differences (one-sided at the ends)

    def __post_init__(self):
        n = len(self.times)
        for name in ("M", "xi", "f_at_xi", "riccati_rhs", "full_rhs", "dMdt"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length differs from times")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


@dataclass
class SlopeReport:
    kind: Kind
    C0: float
    interior: int
    identity_fraction: float          # share of interior points within tolerance
    identity_max_defect: float        # max |dM/dt - (7/2 M^2 + f)| / (1 + |dM/dt|)
    full_identity_fraction: float
    full_identity_max_defect: float
    inequality_margin: float          # min(dM/dt - 7/2 M^2 + C0), interior points
    inequality_margin_full: float     # min(dM/dt - 7/4 M^2 + C0)
    f_lower_margin: float             # min(f_at_xi + C0)
    monotone_violation: float         # largest drop of M between records (sup kind)
    tolerance: float = 1e-3
    passed: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def _build_trace(run: RunRecord, kind: Kind) -> SlopeTrace:
    m = len(run)
    M = np.empty(m)
    xi = np.empty(m)
    fx = np.empty(m)
    omitted = np.empty(m)
    near = None
    for i in range(m):
        eta = run.field(i)
        ext = sp.extremum_slope(eta, kind, near=near)
        near = ext.location
        M[i], xi[i] = ext.value, ext.location
        fx[i] = sp.interpolate(f_functional(eta), ext.location)[0]
        omitted[i] = sp.interpolate(omitted_slope_term(eta), ext.location)[0]
    t = np.asarray(run.times, dtype=float)
    dMdt = np.gradient(M, t) if m > 1 else np.zeros(m)
    rhs2 = RICCATI * M ** 2 + fx
    return SlopeTrace(t, M, xi, fx, rhs2, rhs2 + omitted, dMdt)


def slope_dynamics_check(
    run: RunRecord,
    kind: Kind = "sup",
    C0: float | None = None,
    tolerance: float = 1e-3,
    max_spacing: float | None = None,
) -> tuple[SlopeTrace, SlopeReport]:
    """Compare the recorded extremal-slope evolution with its Riccati forms.

    ``C0`` defaults to the constant of the run's initial snapshot. Records
    must be spaced by at most ``max_spacing`` (default ``1e-3 * t_end``).
    """
    if kind not in ("inf", "sup"):
        raise ValueError(f"kind must be 'inf' or 'sup', got {kind!r}")
    t = np.asarray(run.times, dtype=float)
    if max_spacing is None:
        max_spacing = 1e-3 * run.solver.t_end
    if len(t) > 1 and float(np.max(np.diff(t))) > max_spacing * (1 + 1e-9):
        raise SparseRecordingError(
            f"record spacing {np.max(np.diff(t)):.3g} exceeds {max_spacing:.3g}; "
            "use record_dt or a smaller record_every"
        )
    if C0 is None:
        C0 = breaking_constant(sp.sobolev_norm(run.field(0), 1.0))
    tr = _build_trace(run, kind)

    inner = slice(1, len(t) - 1) if len(t) > 2 else slice(0, 0)
    d = tr.dMdt[inner]
    scale = 1.0 + np.abs(d)
    defect = np.abs(d - tr.riccati_rhs[inner]) / scale
    defect_full = np.abs(d - tr.full_rhs[inner]) / scale
    n_in = len(d)

    def frac(x):
        return float(np.mean(x <= tolerance)) if n_in else 1.0

    def worst(x):
        return float(np.max(x)) if n_in else 0.0

    margin = d - RICCATI * tr.M[inner] ** 2 + C0
    margin_full = d - RICCATI_FULL * tr.M[inner] ** 2 + C0
    drops = -np.diff(tr.M) if kind == "sup" else np.diff(tr.M)
    rep = SlopeReport(
        kind=kind,
        C0=float(C0),
        interior=n_in,
        identity_fraction=frac(defect),
        identity_max_defect=worst(defect),
        full_identity_fraction=frac(defect_full),
        full_identity_max_defect=worst(defect_full),
        inequality_margin=float(np.min(margin)) if n_in else math.inf,
        inequality_margin_full=float(np.min(margin_full)) if n_in else math.inf,
        f_lower_margin=float(np.min(tr.f_at_xi + C0)),
        monotone_violation=float(max(np.max(drops), 0.0)) if len(drops) else 0.0,
        tolerance=tolerance,
    )
    rep.passed = {
        "identity": rep.identity_fraction >= 0.95,
        "inequality": rep.inequality_margin >= -tolerance * C0,
        "f_lower_bound": bool(np.all(tr.f_at_xi >= -C0 * (1 + 1e-6))),
    }
    return tr, rep


# ---------------------------------------------------------------------------
# characteristics


@dataclass
class CharacteristicSet:
    seeds: np.ndarray           # wrapped initial positions
    times: np.ndarray
    trajectories: np.ndarray    # (n_seeds, n_times), wrapped into [-L, L)
    jacobians: np.ndarray       # (n_seeds, n_times), q_x = exp(int eta_x dt)
    unwrapped: np.ndarray       # (n_seeds, n_times), continuous in time

    @property
    def min_jacobian(self) -> float:
        return float(np.min(self.jacobians)) if self.jacobians.size else math.inf


def advance_characteristics(run: RunRecord, seeds, substeps: int = 1) -> CharacteristicSet:
    """Integrate ``dq/dt = eta(t, q)`` for every seed through the recorded run.

    Space: trigonometric interpolation of each snapshot. Time: linear
    interpolation between consecutive snapshots, classical RK4 with
    ``substeps`` steps per record interval. Jacobians come from the
    trapezoidal integral of ``eta_x`` along each path.
    """
    g = run.grid
    q = g.wrap(np.atleast_1d(np.asarray(seeds, dtype=float)))
    seeds_w = q.copy()
    t = np.asarray(run.times, dtype=float)
    m = len(t)
    coeffs = [sp.to_coeffs(run.snapshots[i]) for i in range(m)]

    def vel(i, theta, x, order=0):
        a = sp.eval_trig(coeffs[i], g, x, order)
        if theta == 0.0 or i + 1 >= m:
            return a
        b = sp.eval_trig(coeffs[i + 1], g, x, order)
        return (1.0 - theta) * a + theta * b

    traj = np.empty((len(q), m))
    jac_log = np.zeros((len(q), m))
    traj[:, 0] = q
    x = q.copy()
    slope_prev = vel(0, 0.0, x, 1)
    for i in range(m - 1):
        h = (t[i + 1] - t[i]) / substeps
        for j in range(substeps):
            th0 = j / substeps
            th1 = (j + 0.5) / substeps
            th2 = (j + 1.0) / substeps
            k1 = vel(i, th0, x)
            k2 = vel(i, th1, x + 0.5 * h * k1)
            k3 = vel(i, th1, x + 0.5 * h * k2)
            k4 = vel(i, th2, x + h * k3) if th2 < 1.0 else vel(i + 1, 0.0, x + h * k3)
            x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        slope = vel(i + 1, 0.0, x, 1)
        jac_log[:, i + 1] = jac_log[:, i] + 0.5 * (t[i + 1] - t[i]) * (slope_prev + slope)
        slope_prev = slope
        traj[:, i + 1] = x
    return CharacteristicSet(
        seeds=seeds_w,
        times=t,
        trajectories=g.wrap(traj),
        jacobians=np.exp(jac_log),
        unwrapped=traj,
    )


# ---------------------------------------------------------------------------
# continuation diagnostic


def gronwall_fit(run: RunRecord) -> tuple[float, bool]:
    """Smallest ``C >= 0`` with ``||eta(t)||_{H^s} <= ||eta0||_{H^s} exp(C A(t))``.

    ``A(t) = int_0^t (1 + ||eta_x||_inf) dtau`` is built from the recorded
    running slope integral. Returns ``(C, holds)`` where ``holds`` confirms
    the envelope with that ``C`` bounds every record (to rounding).
    """
    t = np.asarray(run.times, dtype=float)
    A = t + np.asarray(run.series["slope_integral"], dtype=float)
    hs = np.asarray(run.series["Hs_norm"], dtype=float)
    if hs[0] == 0.0:
        return 0.0, bool(np.all(hs == 0.0))
    logr = np.log(hs / hs[0])
    mask = A > 0
    C = float(max(np.max(logr[mask] / A[mask]), 0.0)) if np.any(mask) else 0.0
    envelope = hs[0] * np.exp(C * A)
    holds = bool(math.isfinite(C) and np.all(hs <= envelope * (1 + 1e-12)))
    return C, holds
