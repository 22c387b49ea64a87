"""Experiment configuration, initial data, persistence and study drivers.

Configs are flat ``key=value`` text with dotted keys::

    grid.n = 1024
    grid.half_length = 62.83185307179586
    initial.family = gaussian
    initial.amplitude = 0.1
    initial.width = 2
    solver.t_end = 1
    solver.dt_init = 0.05

Unknown keys are errors. Every persisted run directory holds
``series.csv``, ``snapshot_<i>.csv`` and ``manifest.txt``; the manifest
repeats the full config so :func:`load_run` can rebuild the record.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Literal

import numpy as np

from . import spectral as sp
from .breaking import predict, riccati_envelope, slope_dynamics_check
from .dynamics import COEFFS, RhsVariant, third_order_residual, rhs
from .integrator import SERIES_COLUMNS, RunRecord, SolverConfig, StopReason, integrate
from .mollifier import MollifierSpec, verify_mollifier_properties
from .spectral import GridSpec, RealField

__all__ = [
    "InitialDataSpec",
    "ExperimentConfig",
    "ConfigError",
    "parse_config",
    "load_config",
    "dump_config",
    "make_initial_data",
    "run_simulation",
    "save_run",
    "load_run",
    "convergence_study",
    "ConvergenceReport",
    "equivalence_check",
    "EquivalenceReport",
    "mollifier_check",
    "breaking_sweep",
    "SWEEP_COLUMNS",
]

BOUNDARY_TOL = 1e-12
FAMILIES = ("gaussian", "sech2", "sine_packet", "steep_ramp")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class InitialDataSpec:
    family: Literal["gaussian", "sech2", "sine_packet", "steep_ramp"]
    amplitude: float
    width: float
    center: float = 0.0
    wavenumber: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown initial family {self.family!r}; expected one of {FAMILIES}")
        for name in ("amplitude", "width", "center"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"initial.{name} must be finite")
        if not self.width > 0:
            raise ConfigError(f"initial.width must be positive, got {self.width}")
        if self.family == "sine_packet":
            if self.wavenumber is None or self.wavenumber < 1:
                raise ConfigError("sine_packet needs a positive integer initial.wavenumber")
        elif self.wavenumber is not None:
            raise ConfigError(f"initial.wavenumber is only meaningful for sine_packet, not {self.family}")


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridSpec
    initial: InitialDataSpec
    solver: SolverConfig
    sobolev_s: float = 1.75
    output_dir: str = "runs"
    mollifier: MollifierSpec | None = None

    def __post_init__(self):
        if not self.sobolev_s > 1.5:
            raise ConfigError(f"sobolev_s must exceed 3/2, got {self.sobolev_s}")
        if self.solver.variant.mollifier is not None and self.mollifier is None:
            object.__setattr__(self, "mollifier", self.solver.variant.mollifier)

    @property
    def run_id(self) -> str:
        """Content hash of the physical configuration (``output_dir`` excluded)."""
        text = dump_config(self, include_output_dir=False)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def with_initial(self, **changes) -> "ExperimentConfig":
        return replace(self, initial=replace(self.initial, **changes))

    def with_solver(self, **changes) -> "ExperimentConfig":
        return replace(self, solver=replace(self.solver, **changes))


def _int(v: str) -> int:
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(f)


def _opt_float(v: str):
    return None if v.strip().lower() in ("", "none") else float(v)


def _opt_int(v: str):
    return None if v.strip().lower() in ("", "none") else _int(v)


_SCHEMA: dict[str, tuple[Callable[[str], Any], Any]] = {
    # key: (parser, default); the default "required" marks mandatory keys
    "grid.n": (_int, "required"),
    "grid.half_length": (float, "required"),
    "initial.family": (str, "required"),
    "initial.amplitude": (float, "required"),
    "initial.width": (float, "required"),
    "initial.center": (float, 0.0),
    "initial.wavenumber": (_opt_int, None),
    "solver.t_end": (float, "required"),
    "solver.dt_init": (float, "required"),
    "solver.cfl": (float, 0.3),
    "solver.slope_stop": (float, 1e3),
    "solver.energy_drift_stop": (float, 1e-4),
    "solver.record_every": (_int, 10),
    "solver.record_dt": (_opt_float, None),
    "solver.rhs": (str, "nonlocal_exact"),
    "mollifier.epsilon": (_opt_float, None),
    "mollifier.variant": (str, "bump_convolution"),
    "sobolev_s": (float, 1.75),
    "output_dir": (str, "runs"),
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key=value`` lines (``#`` comments, blank lines allowed)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    vals: dict[str, Any] = {}
    for key, (conv, default) in _SCHEMA.items():
        if key in raw:
            try:
                vals[key] = conv(raw[key])
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        elif isinstance(default, str) and default == "required":
            raise ConfigError(f"missing required key {key!r}")
        else:
            vals[key] = default
    return _build_config(vals)


def _build_config(v: dict[str, Any]) -> ExperimentConfig:
    try:
        grid = GridSpec(v["grid.n"], v["grid.half_length"])
        initial = InitialDataSpec(
            family=v["initial.family"],
            amplitude=v["initial.amplitude"],
            width=v["initial.width"],
            center=v["initial.center"],
            wavenumber=v["initial.wavenumber"],
        )
        moll = None
        if v["mollifier.epsilon"] is not None:
            moll = MollifierSpec(v["mollifier.epsilon"], v["mollifier.variant"])
        kind = v["solver.rhs"]
        if kind != "nonlocal_exact" and moll is None:
            raise ConfigError(f"solver.rhs={kind} needs mollifier.epsilon")
        variant = RhsVariant(kind, moll if kind != "nonlocal_exact" else None)
        solver = SolverConfig(
            t_end=v["solver.t_end"],
            dt_init=v["solver.dt_init"],
            cfl=v["solver.cfl"],
            slope_stop=v["solver.slope_stop"],
            energy_drift_stop=v["solver.energy_drift_stop"],
            record_every=v["solver.record_every"],
            variant=variant,
            record_dt=v["solver.record_dt"],
        )
        if moll is not None:
            moll.check_grid(grid)
        return ExperimentConfig(grid, initial, solver, v["sobolev_s"], v["output_dir"], moll)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    return parse_config(text)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def config_items(cfg: ExperimentConfig, include_output_dir: bool = True) -> list[tuple[str, str]]:
    s = cfg.solver
    items = [
        ("grid.n", cfg.grid.n),
        ("grid.half_length", cfg.grid.half_length),
        ("initial.family", cfg.initial.family),
        ("initial.amplitude", float(cfg.initial.amplitude)),
        ("initial.width", float(cfg.initial.width)),
        ("initial.center", float(cfg.initial.center)),
        ("initial.wavenumber", cfg.initial.wavenumber),
        ("solver.t_end", float(s.t_end)),
        ("solver.dt_init", float(s.dt_init)),
        ("solver.cfl", float(s.cfl)),
        ("solver.slope_stop", float(s.slope_stop)),
        ("solver.energy_drift_stop", float(s.energy_drift_stop)),
        ("solver.record_every", s.record_every),
        ("solver.record_dt", None if s.record_dt is None else float(s.record_dt)),
        ("solver.rhs", s.variant.kind),
        ("mollifier.epsilon", None if cfg.mollifier is None else float(cfg.mollifier.epsilon)),
        ("mollifier.variant", "bump_convolution" if cfg.mollifier is None else cfg.mollifier.variant),
        ("sobolev_s", float(cfg.sobolev_s)),
    ]
    if include_output_dir:
        items.append(("output_dir", cfg.output_dir))
    return [(k, _fmt(v)) for k, v in items]


def dump_config(cfg: ExperimentConfig, include_output_dir: bool = True) -> str:
    return "".join(f"{k}={v}\n" for k, v in config_items(cfg, include_output_dir))


# ---------------------------------------------------------------------------
# initial data


def _profile(spec: InitialDataSpec, x: np.ndarray, half_length: float) -> np.ndarray:
    a, w, c = spec.amplitude, spec.width, spec.center
    z = (x - c) / w
    if spec.family == "gaussian":
        return a * np.exp(-z * z)
    if spec.family == "sech2":
        return a / np.cosh(z) ** 2
    if spec.family == "sine_packet":
        return a * np.sin(spec.wavenumber * np.pi * x / half_length) * np.exp(-z * z)
    # steep_ramp: front of width w inside an envelope ten times wider
    return a * np.tanh(z) * np.exp(-((x - c) / (10.0 * w)) ** 2)


def make_initial_data(spec: InitialDataSpec, grid: GridSpec) -> RealField:
    """Sample the profile at the grid nodes; reject data that do not decay at the box edge.

    Raises
    ------
    ValueError
        If the profile exceeds 1e-12 at either edge node; the message
        carries the measured value.
    """
    x = grid.x
    u = _profile(spec, x, grid.half_length)
    edge = float(max(abs(u[0]), abs(u[-1]),
                     abs(_profile(spec, np.array([grid.half_length]), grid.half_length)[0])))
    if edge > BOUNDARY_TOL:
        raise ValueError(
            f"{spec.family} profile is {edge:.3e} at the box edge (tolerance {BOUNDARY_TOL:g}); "
            "enlarge grid.half_length"
        )
    return RealField(grid, u)


# ---------------------------------------------------------------------------
# persistence


def _csv(header: tuple[str, ...], columns: list[np.ndarray]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*(np.asarray(c, dtype=float).tolist() for c in columns)):
        buf.write(",".join(repr(v) for v in row) + "\n")
    return buf.getvalue()


def _read_csv(path: Path, header: tuple[str, ...]) -> np.ndarray:
    lines = path.read_text().splitlines()
    if not lines or tuple(lines[0].split(",")) != header:
        raise ValueError(f"{path}: unexpected header {lines[:1]!r}, expected {','.join(header)}")
    data = [[float(v) for v in ln.split(",")] for ln in lines[1:] if ln]
    return np.array(data, dtype=float).reshape(len(data), len(header))


def _manifest(rec: RunRecord, cfg: ExperimentConfig) -> str:
    lines = [("run_id", cfg.run_id)]
    lines += [(f"config.{k}", v) for k, v in config_items(cfg)]
    lines += [(f"coefficient.{k}", str(v)) for k, v in COEFFS.items()]
    lines += [
        ("threshold.slope_stop", _fmt(float(cfg.solver.slope_stop))),
        ("threshold.slope_stop_note",
         "desk-scale stand-in for slope blow-up; a crossing is not a proof of breaking"),
        ("threshold.energy_drift_stop", _fmt(float(cfg.solver.energy_drift_stop))),
        ("threshold.boundary_decay", _fmt(BOUNDARY_TOL)),
        ("stop_reason", rec.stop.value),
        ("stop_time", _fmt(rec.stop_time)),
        ("wall_time", _fmt(float(rec.wall_time))),
        ("steps", str(rec.meta.get("steps", 0))),
        ("H0", _fmt(float(rec.meta.get("H0", float("nan"))))),
        ("records", str(len(rec))),
    ]
    return "".join(f"{k}={v}\n" for k, v in lines)


def save_run(rec: RunRecord, cfg: ExperimentConfig, directory: str | os.PathLike) -> Path:
    """Write series, snapshots and manifest of ``rec`` into ``directory``."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
        (d / "series.csv").write_text(
            _csv(SERIES_COLUMNS, [rec.series[c] for c in SERIES_COLUMNS]))
        x = rec.grid.x
        for i in range(len(rec)):
            (d / f"snapshot_{i}.csv").write_text(_csv(("x", "eta"), [x, rec.snapshots[i]]))
        (d / "manifest.txt").write_text(_manifest(rec, cfg))
    except OSError as exc:
        raise OSError(exc.errno, f"writing run to {d}: {exc.strerror}", str(exc.filename)) from exc
    return d


def run_simulation(cfg: ExperimentConfig, output_dir: str | os.PathLike | None = None) -> RunRecord:
    """Integrate the configured experiment and persist it under ``<output_dir>/<run_id>``."""
    eta0 = make_initial_data(cfg.initial, cfg.grid)
    rec = integrate(eta0, cfg.solver, sobolev_s=cfg.sobolev_s)
    rec.config = cfg
    base = Path(output_dir if output_dir is not None else cfg.output_dir)
    save_run(rec, cfg, base / cfg.run_id)
    return rec


def _read_kv(path: Path) -> dict[str, str]:
    out = {}
    for line in path.read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v
    return out


def load_run(directory: str | os.PathLike) -> RunRecord:
    """Rebuild a persisted :class:`RunRecord` (floats round-trip bitwise)."""
    d = Path(directory)
    kv = _read_kv(d / "manifest.txt")
    cfg = parse_config("".join(f"{k[7:]}={v}\n" for k, v in kv.items() if k.startswith("config.")))
    table = _read_csv(d / "series.csv", SERIES_COLUMNS)
    series = {c: table[:, j].copy() for j, c in enumerate(SERIES_COLUMNS)}
    m = int(kv["records"])
    snaps = np.empty((m, cfg.grid.n))
    for i in range(m):
        snaps[i] = _read_csv(d / f"snapshot_{i}.csv", ("x", "eta"))[:, 1]
    return RunRecord(
        grid=cfg.grid,
        solver=cfg.solver,
        sobolev_s=cfg.sobolev_s,
        series=series,
        snapshots=snaps,
        stop=StopReason(kv["stop_reason"]),
        wall_time=float(kv["wall_time"]),
        config=cfg,
        meta={"steps": int(kv["steps"]), "H0": float(kv["H0"])},
    )


# ---------------------------------------------------------------------------
# convergence


@dataclass
class ConvergenceReport:
    ladder: str
    parameters: list
    errors: list
    order: float | None
    ratios: list
    passed: bool
    notes: str = ""
    extra: dict = field(default_factory=dict)

    def table(self) -> str:
        rows = [f"{p!r},{e!r}" for p, e in zip(self.parameters, self.errors)]
        return "parameter,error\n" + "".join(r + "\n" for r in rows)


def _l2(diff: np.ndarray, grid: GridSpec) -> float:
    return math.sqrt(float(np.sum(diff * diff)) * grid.dx)


def _fit(xs, ys) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)
    return float(slope)


def _final(eta0: RealField, solver: SolverConfig, fixed_dt: float | None) -> np.ndarray:
    # ladder members are judged by their error, not by the drift monitor:
    # coarse members are under-resolved on purpose and mollified systems
    # do not conserve H exactly
    solver = replace(solver, record_every=10 ** 9, energy_drift_stop=1e300)
    rec = integrate(eta0, solver, fixed_dt=fixed_dt)
    if rec.stop is not StopReason.REACHED_T_END:
        raise RuntimeError(f"ladder member stopped early: {rec.stop.value} at t={rec.stop_time}")
    return rec.snapshots[-1]


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))   # results in input order


def _spatial_member(args):
    cfg, n, dt = args
    g = GridSpec(n, cfg.grid.half_length)
    return _final(make_initial_data(cfg.initial, g), cfg.solver, dt)


def _temporal_member(args):
    cfg, dt = args
    return _final(make_initial_data(cfg.initial, cfg.grid), cfg.solver, dt)


def _mollifier_member(args):
    cfg, variant, dt = args
    return _final(make_initial_data(cfg.initial, cfg.grid), replace(cfg.solver, variant=variant), dt)


def convergence_study(
    cfg: ExperimentConfig,
    ladder: Literal["spatial", "temporal", "mollifier"],
    *,
    sizes=(256, 512, 1024),
    dt0: float | None = None,
    halvings: int = 4,
    epsilons=(0.4, 0.2, 0.1, 0.05),
    kinds=("mollified_B", "mollified_A"),
    mollifier_variant: str | None = None,
    workers: int = 1,
    output_dir: str | os.PathLike | None = None,
) -> ConvergenceReport | list[ConvergenceReport]:
    """Self-convergence along one ladder, persisted as CSV plus a summary.

    spatial
        errors of n in ``sizes`` against a run at twice the largest n,
        all with one common fixed dt; passes when every pair whose coarse
        error is above the rounding floor improves at least 10x.
    temporal
        fixed steps ``dt0 / 2^j`` (j < ``halvings``) against ``dt0 / 16``;
        passes when the fitted order is 4 +- 0.3.
    mollifier
        ``||eta^eps(T) - eta(T)||_{L2}`` along ``epsilons`` for each kind in
        ``kinds``; passes when every sequence is strictly decreasing with
        a positive fitted order. Returns one report per kind.
    """
    g = cfg.grid
    eta0 = make_initial_data(cfg.initial, g)
    if dt0 is None:
        dt0 = min(cfg.solver.dt_init,
                  cfg.solver.cfl * g.dx / (1.0 + 3.5 * eta0.max_abs()))
    out = Path(output_dir if output_dir is not None else cfg.output_dir) / cfg.run_id

    if ladder == "spatial":
        sizes = tuple(int(s) for s in sizes)
        nref = 2 * max(sizes)
        dt = min(cfg.solver.dt_init,
                 cfg.solver.cfl * (2 * g.half_length / nref) / (1.0 + 3.5 * eta0.max_abs()))
        finals = _map(_spatial_member, [(cfg, n, dt) for n in (*sizes, nref)], workers)
        ref = finals[-1]
        errs = []
        for n, u in zip(sizes, finals[:-1]):
            sub = ref[:: nref // n]
            errs.append(_l2(u - sub, GridSpec(n, g.half_length)))
        floor = 1e-11 * max(_l2(ref, GridSpec(nref, g.half_length)), 1e-300)
        ratios = [errs[i] / errs[i + 1] if errs[i + 1] > 0 else math.inf
                  for i in range(len(errs) - 1)]
        ok = all(r >= 10.0 for e, r in zip(errs, ratios) if e > floor)
        rep = ConvergenceReport("spatial", list(sizes), errs, None, ratios, ok,
                                notes=f"reference n={nref}; common dt={dt!r}; floor={floor:.3g}")
        _persist(rep, out)
        return rep

    if ladder == "temporal":
        dts = [dt0 / 2 ** j for j in range(halvings)]
        finals = _map(_temporal_member, [(cfg, d) for d in (*dts, dt0 / 16)], workers)
        ref = finals[-1]
        errs = [_l2(u - ref, g) for u in finals[:-1]]
        order = _fit(dts, errs)
        ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
        rep = ConvergenceReport("temporal", dts, errs, order, ratios,
                                bool(abs(order - 4.0) <= 0.3),
                                notes=f"reference dt={dt0 / 16!r}")
        _persist(rep, out)
        return rep

    if ladder == "mollifier":
        mv = mollifier_variant or (cfg.mollifier.variant if cfg.mollifier else "bump_convolution")
        specs = [MollifierSpec(float(e), mv) for e in epsilons]
        for s in specs:
            s.check_grid(g)
        ref = _final(eta0, replace(cfg.solver, variant=RhsVariant()), dt0)
        reports = []
        for kind in kinds:
            finals = _map(_mollifier_member,
                          [(cfg, RhsVariant(kind, s), dt0) for s in specs], workers)
            errs = [_l2(u - ref, g) for u in finals]
            order = _fit(epsilons, errs) if all(e > 0 for e in errs) else float("nan")
            ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
            ok = bool(all(errs[i + 1] < errs[i] for i in range(len(errs) - 1)) and order > 0)
            rep = ConvergenceReport(f"mollifier_{kind}", list(epsilons), errs, order, ratios, ok,
                                    notes=f"mollifier={mv}; T={cfg.solver.t_end!r}; dt={dt0!r}")
            _persist(rep, out)
            reports.append(rep)
        return reports

    raise ValueError(f"unknown ladder {ladder!r}")


def _persist(rep: ConvergenceReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"convergence_{rep.ladder}.csv").write_text(rep.table())
    summary = [
        f"ladder={rep.ladder}",
        f"order={_fmt(rep.order)}",
        "ratios=" + ";".join(repr(float(r)) for r in rep.ratios),
        f"passed={rep.passed}",
        f"notes={rep.notes}",
    ]
    (out / f"convergence_{rep.ladder}.txt").write_text("\n".join(summary) + "\n")


# ---------------------------------------------------------------------------
# equivalence


@dataclass
class EquivalenceReport:
    times: list
    residual_max: list
    rhs_max: list
    tolerance_factor: float
    passed: bool

    @property
    def normalised(self) -> list:
        return [r / (1.0 + q) for r, q in zip(self.residual_max, self.rhs_max)]


def equivalence_check(
    cfg: ExperimentConfig,
    tolerance: float = 1e-8,
    output_dir: str | os.PathLike | None = None,
) -> EquivalenceReport:
    """Third-order residual at t=0 and at every record of a run to ``solver.t_end``.

    The pointwise residual profiles are persisted to ``residual_profiles.csv``
    (one column per checked time).
    """
    eta0 = make_initial_data(cfg.initial, cfg.grid)
    rec = integrate(eta0, cfg.solver, sobolev_s=cfg.sobolev_s)
    times, res_max, rhs_max, profiles = [], [], [], []
    for i in range(len(rec)):
        eta = rec.field(i)
        r = third_order_residual(eta).samples
        times.append(float(rec.times[i]))
        res_max.append(float(np.max(np.abs(r))))
        rhs_max.append(rhs(eta).max_abs())
        profiles.append(r)
    ok = all(r <= tolerance * (1.0 + q) for r, q in zip(res_max, rhs_max))
    out = Path(output_dir if output_dir is not None else cfg.output_dir) / cfg.run_id
    out.mkdir(parents=True, exist_ok=True)
    header = ("x",) + tuple(f"t={t!r}" for t in times)
    (out / "residual_profiles.csv").write_text(_csv(header, [cfg.grid.x, *profiles]))
    (out / "equivalence.csv").write_text(
        _csv(("t", "residual_max", "rhs_max"), [times, res_max, rhs_max]))
    return EquivalenceReport(times, res_max, rhs_max, tolerance, ok)


# ---------------------------------------------------------------------------
# mollifier properties


def mollifier_check(cfg: ExperimentConfig, variants=None, output_dir=None) -> dict:
    """Property suite on the configured initial data for each usable variant.

    The bump variant is skipped (and reported as such) when the smallest
    ladder epsilon is below 4 dx.
    """
    eta0 = make_initial_data(cfg.initial, cfg.grid)
    eps = cfg.mollifier.epsilon if cfg.mollifier else 0.1
    variants = variants or ("bump_convolution", "spectral_cutoff")
    reports = {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", "epsilon", "linf_ratio", "commutation_defect", "commutation_tol",
                "order", "growth_k1", "growth_k2", "passed"])
    for v in variants:
        try:
            rep = verify_mollifier_properties(eta0, MollifierSpec(eps, v))
        except ValueError as exc:
            reports[v] = str(exc)
            w.writerow([v, repr(eps), "", "", "", "", "", "", f"skipped: {exc}"])
            continue
        reports[v] = rep
        w.writerow([v, repr(eps), repr(rep.linf_ratio), repr(rep.commutation_defect),
                    repr(rep.commutation_tol), repr(rep.convergence_order),
                    repr(rep.growth_exponents[1]), repr(rep.growth_exponents[2]),
                    ";".join(f"{k}:{p}" for k, p in rep.passed.items())])
    out = Path(output_dir if output_dir is not None else cfg.output_dir) / cfg.run_id
    out.mkdir(parents=True, exist_ok=True)
    (out / "mollifier_check.csv").write_text(buf.getvalue())
    return reports


# ---------------------------------------------------------------------------
# breaking sweep

SWEEP_COLUMNS = (
    "amplitude", "h1_norm", "C0",
    "M0_sup", "hypothesis_sup", "sigma_sup", "T0_sup",
    "M0_inf", "hypothesis_inf",
    "stop_reason", "stop_time", "stop_within_T0",
    "envelope_violations", "riccati_margin", "riccati_margin_full",
    "error",
)


def _sweep_row(args) -> dict:
    base, amp, out = args
    row: dict[str, Any] = {c: "" for c in SWEEP_COLUMNS}
    row["amplitude"] = amp
    try:
        cfg = base.with_initial(amplitude=float(amp))
        eta0 = make_initial_data(cfg.initial, cfg.grid)
        ps, pi_ = predict(eta0, "sup"), predict(eta0, "inf")
        row.update(h1_norm=ps.h1_norm, C0=ps.C0, M0_sup=ps.M0, hypothesis_sup=ps.hypothesis_ok,
                   sigma_sup=ps.sigma, T0_sup=ps.T0_bound, M0_inf=pi_.M0,
                   hypothesis_inf=pi_.hypothesis_ok)
        rec = run_simulation(cfg, out)
        row.update(stop_reason=rec.stop.value, stop_time=rec.stop_time)
        if ps.hypothesis_ok:
            row["stop_within_T0"] = bool(rec.stop is StopReason.SLOPE_THRESHOLD
                                         and rec.stop_time <= ps.T0_bound)
            viol = 0
            for t, M in zip(rec.times, rec.series["sup_slope"]):
                if t < ps.T0_bound:
                    env = riccati_envelope(ps, float(t))
                    viol += int(M < env * (1 - 1e-3))
            row["envelope_violations"] = viol
        if len(rec) > 2:
            _, rep = slope_dynamics_check(rec, "sup", C0=ps.C0, max_spacing=math.inf)
            row["riccati_margin"] = rep.inequality_margin
            row["riccati_margin_full"] = rep.inequality_margin_full
    except Exception as exc:  # recorded per row; the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def breaking_sweep(
    base: ExperimentConfig,
    amplitudes,
    workers: int = 1,
    output_dir: str | os.PathLike | None = None,
) -> list[dict]:
    """One row per amplitude: predictions (both kinds), observed stop, envelope and Riccati checks.

    Rows are written to ``sweep.csv`` in input order. Margins use whatever
    record spacing the base config produces.
    """
    amps = [float(a) for a in amplitudes]
    if any(not a > 0 for a in amps):
        raise ValueError("amplitudes must be positive")
    if any(b <= a for a, b in zip(amps, amps[1:])):
        raise ValueError("amplitudes must be strictly increasing")
    out = Path(output_dir if output_dir is not None else base.output_dir)
    rows = _map(_sweep_row, [(base, a, out) for a in amps], workers)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) if r[c] != "" else "" for c in SWEEP_COLUMNS])
    (out / "sweep.csv").write_text(buf.getvalue())
    return rows
