"""Experiment configs, result tables and the sweep commands behind the CLI.

A run is fully described by an :class:`ExperimentConfig`; every command returns a
:class:`ResultTable` whose CSV form round-trips exactly (floats are written with
17 significant digits).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate

from . import __version__
from .analytic import (
    NetworkConfig,
    SelectionRegion,
    db_to_linear,
    expected_density_numeric,
    expected_density_of_progress,
    incomplete_gamma_3_2,
)
from .errors import InvalidParameterError
from .geometry import Point2
from .optimize import (
    optimal_rm_given_phi,
    optimize_joint,
    optimize_phi_at_rm,
    rm_from_phi_closed_form,
    rm_upper_bound,
    joint_residual,
    stationarity_residual_rm,
)
from .simulate import (
    BEST_PROGRESS,
    EstimateWithCI,
    KINDS,
    NEAREST_NEIGHBOR,
    SELECTION_REGION,
    ProtocolSpec,
    candidate_count_ratio,
    estimate_density_of_progress,
    estimate_success_probability,
    run_hops,
    simulate_route,
    truncation_audit,
)

COMMANDS = ("surface", "optimize", "compare", "validate", "route")
P_GRID = (0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.15, 0.2, 0.25, 0.3)
MODEL_FIELDS = ("lam", "p", "alpha", "beta", "rho", "mu", "eta")
MAX_SEED = 2 ** 64 - 1


class ConfigError(InvalidParameterError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# ---------------------------------------------------------------------------
# result tables


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v!r} cannot be written to a result table")
        return f"{float(v):.16e}"
    return str(v)


def _parse_cell(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


@dataclass
class ResultTable:
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)

    def add(self, **values):
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        row = [values.get(c) for c in self.columns]
        for c, v in zip(self.columns, row):
            if isinstance(v, (float, np.floating)) and not math.isfinite(v):
                raise ValueError(f"column {c!r}: non-finite value {v!r}")
        self.rows.append(row)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def records(self) -> List[Dict[str, Any]]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def normalized(self) -> "ResultTable":
        """The table as it reads back from CSV (bools become 0/1, numpy scalars plain)."""
        return ResultTable.from_csv(self.to_csv())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_format_cell(v) for v in r])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        rows = [[_parse_cell(c) for c in r] for r in reader]
        for r in rows:
            if len(r) != len(header):
                raise ValueError("ragged CSV row")
        return cls(header, rows)

    def to_json(self) -> str:
        rows = [[_parse_cell(_format_cell(v)) for v in r] for r in self.rows]
        return json.dumps({"columns": self.columns, "rows": rows}, indent=1) + "\n"

    def write(self, path, fmt: str = "csv"):
        text = self.to_csv() if fmt == "csv" else self.to_json()
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# configuration


def parse_beta(value) -> Tuple[float, Any]:
    """Linear threshold from ``10dB``/``"10 dB"`` (decibels) or a bare number (linear)."""
    if isinstance(value, bool):
        raise ConfigError("model.beta", f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        return float(value), value
    if isinstance(value, str):
        s = value.strip()
        try:
            if s.lower().endswith("db"):
                return db_to_linear(float(s[:-2])), value
            return float(s), value
        except ValueError:
            pass
    raise ConfigError("model.beta", f"expected a number or '<x>dB', got {value!r}")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: Optional[float] = None
    stop: Optional[float] = None
    points: int = 1
    scale: str = "linear"
    values: Optional[Tuple[float, ...]] = None

    def grid(self) -> List[float]:
        if self.values is not None:
            return [float(v) for v in self.values]
        if self.points == 1:
            return [float(self.start)]
        if self.scale == "log":
            return [float(v) for v in np.geomspace(self.start, self.stop, self.points)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.points)]

    @classmethod
    def from_dict(cls, raw, where: str) -> "SweepAxis":
        if not isinstance(raw, dict):
            raise ConfigError(where, "axis must be an object")
        extra = set(raw) - {"name", "start", "stop", "points", "scale", "values"}
        if extra:
            raise ConfigError(where, f"unknown keys {sorted(extra)}")
        if "name" not in raw:
            raise ConfigError(where + ".name", "missing")
        if "values" in raw:
            vals = raw["values"]
            if not isinstance(vals, list) or not vals:
                raise ConfigError(where + ".values", "must be a non-empty list")
            axis = cls(raw["name"], values=tuple(float(v) for v in vals), points=len(vals))
        else:
            for key in ("start", "points"):
                if key not in raw:
                    raise ConfigError(f"{where}.{key}", "missing")
            points = raw["points"]
            if not isinstance(points, int) or points < 1:
                raise ConfigError(where + ".points", f"must be an integer >= 1, got {points!r}")
            scale = raw.get("scale", "linear")
            if scale not in ("linear", "log"):
                raise ConfigError(where + ".scale", f"must be 'linear' or 'log', got {scale!r}")
            stop = raw.get("stop", raw["start"] if points == 1 else None)
            if stop is None:
                raise ConfigError(where + ".stop", "missing")
            axis = cls(raw["name"], float(raw["start"]), float(stop), points, scale)
            if scale == "log" and (axis.start <= 0 or axis.stop <= 0):
                raise ConfigError(where, "log axes need positive bounds")
        g = axis.grid()
        if not all(math.isfinite(v) for v in g):
            raise ConfigError(where, "axis values must be finite")
        if len(g) > 1 and not (all(b > a for a, b in zip(g, g[1:])) or all(b < a for a, b in zip(g, g[1:]))):
            raise ConfigError(where, "axis values must be strictly monotone")
        return axis

    def to_dict(self) -> dict:
        if self.values is not None:
            return {"name": self.name, "values": list(self.values)}
        return {"name": self.name, "start": self.start, "stop": self.stop, "points": self.points, "scale": self.scale}


SWEEPABLE = {
    "surface": {"phi", "r_m", "p", "lam"},
    "optimize": {"p", "lam"},
    "compare": {"p", "lam"},
    "validate": set(),
    "route": set(),
}


def _default_sweep(command: str) -> List[dict]:
    if command == "surface":
        return [
            {"name": "phi", "start": math.pi / 40, "stop": math.pi, "points": 40},
            {"name": "r_m", "start": 0.0, "stop": 2.0, "points": 40},
        ]
    if command in ("optimize", "compare"):
        return [{"name": "p", "values": list(P_GRID)}]
    return []


def _default_protocols(command: str) -> List[dict]:
    if command == "compare":
        return [
            {"kind": BEST_PROGRESS},
            {"kind": SELECTION_REGION, "phi": "opt", "r_m": "opt"},
            {"kind": NEAREST_NEIGHBOR, "phi": "opt"},
            {"kind": NEAREST_NEIGHBOR, "phi": math.pi / 2},
        ]
    if command == "route":
        return [{"kind": SELECTION_REGION, "phi": "opt", "r_m": "opt"}]
    return []


_DEFAULT_TRIALS = {"compare": 10_000, "validate": 20_000}
_TOP_KEYS = {
    "model", "sweep", "protocols", "trials", "seed", "mode", "workers", "output", "format",
    "route", "tolerance", "fixed_phi",
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    model: NetworkConfig
    beta_input: Any
    sweep: Tuple[SweepAxis, ...]
    protocols: Tuple[dict, ...]
    trials: int
    seed: int
    mode: str = "semi"
    workers: int = 1
    output: Optional[str] = None
    format: str = "csv"
    route: Dict[str, Any] = field(default_factory=dict)
    tolerance: Optional[float] = None
    fixed_phi: Optional[float] = None

    def to_dict(self) -> dict:
        model = {k: getattr(self.model, k) for k in MODEL_FIELDS}
        model["beta"] = self.beta_input
        return {
            "model": model,
            "sweep": [a.to_dict() for a in self.sweep],
            "protocols": [dict(p) for p in self.protocols],
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "workers": self.workers,
            "output": self.output,
            "format": self.format,
            "route": dict(self.route),
            "tolerance": self.tolerance,
            "fixed_phi": self.fixed_phi,
        }


def _check_protocol(raw, where):
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(where, "protocol must be an object with a 'kind'")
    if raw["kind"] not in KINDS:
        raise ConfigError(where + ".kind", f"unknown protocol {raw['kind']!r}; expected one of {KINDS}")
    extra = set(raw) - {"kind", "phi", "r_m", "field_radius"}
    if extra:
        raise ConfigError(where, f"unknown keys {sorted(extra)}")
    for key in ("phi", "r_m"):
        v = raw.get(key)
        if v is not None and v != "opt" and not isinstance(v, (int, float)):
            raise ConfigError(f"{where}.{key}", f"expected a number or 'opt', got {v!r}")
    if raw["kind"] == NEAREST_NEIGHBOR and raw.get("r_m") not in (None, 0, 0.0):
        raise ConfigError(where + ".r_m", "nearest_neighbor has r_m = 0")
    return dict(raw)


def build_config(command: str, raw: Optional[dict] = None, **overrides) -> ExperimentConfig:
    """Resolve a raw config mapping plus CLI overrides into a validated config.

    Missing entries take the command's defaults; ``overrides`` with value None
    are ignored.
    """
    if command not in COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}")
    raw = dict(raw or {})
    if "config" in raw and isinstance(raw["config"], dict):
        raw = dict(raw["config"])
    extra = set(raw) - _TOP_KEYS
    if extra:
        raise ConfigError(sorted(extra)[0], "unknown configuration key")
    raw.update({k: v for k, v in overrides.items() if v is not None})

    model_raw = dict(raw.get("model") or {})
    bad = set(model_raw) - set(MODEL_FIELDS)
    if bad:
        raise ConfigError(f"model.{sorted(bad)[0]}", "unknown model parameter")
    defaults = {"lam": 1.0, "p": 0.01 if command == "surface" else 0.05, "alpha": 3.0, "beta": "10dB"}
    for k, v in defaults.items():
        model_raw.setdefault(k, v)
    beta, beta_input = parse_beta(model_raw.pop("beta"))
    for k, v in model_raw.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"model.{k}", f"expected a number, got {v!r}")
    try:
        model = NetworkConfig(beta=beta, **{k: float(v) for k, v in model_raw.items()})
    except ValueError as exc:
        msg = str(exc)
        name = "alpha" if "alpha" in msg else "eta" if "eta" in msg else msg.split()[0]
        raise ConfigError(f"model.{name}" if name in MODEL_FIELDS else "model", msg) from None

    sweep_raw = raw.get("sweep", _default_sweep(command))
    if not isinstance(sweep_raw, list):
        raise ConfigError("sweep", "must be a list of axes")
    sweep = tuple(SweepAxis.from_dict(a, f"sweep[{i}]") for i, a in enumerate(sweep_raw))
    for i, a in enumerate(sweep):
        if a.name not in SWEEPABLE[command]:
            raise ConfigError(f"sweep[{i}].name", f"{a.name!r} cannot be swept by '{command}'")
    if len({a.name for a in sweep}) != len(sweep):
        raise ConfigError("sweep", "duplicate axis names")

    protocols_raw = raw.get("protocols", _default_protocols(command))
    if not isinstance(protocols_raw, list):
        raise ConfigError("protocols", "must be a list")
    protocols = tuple(_check_protocol(p, f"protocols[{i}]") for i, p in enumerate(protocols_raw))
    if command in ("compare", "route") and not protocols:
        raise ConfigError("protocols", "at least one protocol is required")

    trials = raw.get("trials", _DEFAULT_TRIALS.get(command, 10_000))
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise ConfigError("trials", f"must be a positive integer, got {trials!r}")
    if command == "compare" and trials < 1000:
        raise ConfigError("trials", "compare needs at least 1000 trials")
    seed = raw.get("seed", 1)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= MAX_SEED:
        raise ConfigError("seed", f"must be an unsigned 64-bit integer, got {seed!r}")
    mode = raw.get("mode", "semi")
    if mode not in ("semi", "physical"):
        raise ConfigError("mode", f"must be 'semi' or 'physical', got {mode!r}")
    workers = raw.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers", f"must be a positive integer, got {workers!r}")
    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("format", f"must be 'csv' or 'json', got {fmt!r}")
    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output", "must be a path string")

    route = {"source": [0.0, 0.0], "dest": [30.0, 0.0], "max_hops": 500}
    route_raw = raw.get("route") or {}
    if not isinstance(route_raw, dict) or set(route_raw) - set(route) - {"arrival_radius"}:
        raise ConfigError("route", "expected keys source, dest, max_hops, arrival_radius")
    route.update(route_raw)
    for key in ("source", "dest"):
        pt = route[key]
        if not (isinstance(pt, (list, tuple)) and len(pt) == 2 and all(isinstance(c, (int, float)) for c in pt)):
            raise ConfigError(f"route.{key}", "must be a pair of numbers")
        route[key] = [float(c) for c in pt]
    if not isinstance(route["max_hops"], int) or route["max_hops"] < 1:
        raise ConfigError("route.max_hops", "must be an integer >= 1")

    tolerance = raw.get("tolerance")
    if tolerance is not None and not (isinstance(tolerance, (int, float)) and tolerance >= 0):
        raise ConfigError("tolerance", "must be a non-negative number")
    fixed_phi = raw.get("fixed_phi")
    if fixed_phi is not None and not (isinstance(fixed_phi, (int, float)) and 0 < fixed_phi < 2 * math.pi):
        raise ConfigError("fixed_phi", "must lie in (0, 2pi)")

    return ExperimentConfig(
        command=command,
        model=model,
        beta_input=beta_input,
        sweep=sweep,
        protocols=protocols,
        trials=trials,
        seed=seed,
        mode=mode,
        workers=workers,
        output=output,
        format=fmt,
        route=route,
        tolerance=None if tolerance is None else float(tolerance),
        fixed_phi=None if fixed_phi is None else float(fixed_phi),
    )


def load_config(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("config", f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None


def _cells(config: ExperimentConfig):
    """Sweep cells in deterministic order: cartesian product, first axis slowest."""
    names = [a.name for a in config.sweep]
    for combo in itertools.product(*(a.grid() for a in config.sweep)):
        yield dict(zip(names, combo))


def _model_for(config: ExperimentConfig, cell: dict) -> NetworkConfig:
    changes = {k: v for k, v in cell.items() if k in MODEL_FIELDS}
    return config.model.replace(**changes) if changes else config.model


# ---------------------------------------------------------------------------
# commands


def cmd_surface(config: ExperimentConfig) -> ResultTable:
    """Closed-form expected density of progress over a (phi, r_m) grid."""
    table = ResultTable(["p", "phi", "r_m", "e_density", "status"])
    for cell in _cells(config):
        cfg = _model_for(config, cell)
        phi = cell.get("phi", math.pi / 2)
        r_m = cell.get("r_m", 0.0)
        try:
            e = expected_density_of_progress(cfg, SelectionRegion(phi, r_m))
            table.add(p=cfg.p, phi=phi, r_m=r_m, e_density=e, status="ok")
        except Exception as exc:  # keep sweeping
            table.add(p=cfg.p, phi=phi, r_m=r_m, status=f"error: {exc}")
    return table


def cmd_optimize(config: ExperimentConfig) -> ResultTable:
    """Optimal selection region per sweep cell (joint, or r_m only when ``fixed_phi`` is set)."""
    table = ResultTable(
        ["p", "lam", "phi_star", "rm_star", "rm_upper_bound", "rm_eq19", "e_star",
         "residual_rm", "residual_joint", "boundary", "status"]
    )
    for cell in _cells(config):
        cfg = _model_for(config, cell)
        try:
            if config.fixed_phi is not None:
                phi = config.fixed_phi
                inner = optimal_rm_given_phi(cfg, phi)
                rm, e, boundary = inner.rm_star, inner.e_star, inner.boundary_flag
                res_rm = stationarity_residual_rm(cfg, phi, rm)
                res_joint = joint_residual(cfg, phi, rm)
            else:
                opt = optimize_joint(cfg)
                phi, rm, e, boundary = opt.phi_star, opt.rm_star, opt.e_star, opt.boundary_flag
                res_rm, res_joint = opt.residual_rm, opt.residual_joint
            table.add(
                p=cfg.p, lam=cfg.lam, phi_star=phi, rm_star=rm,
                rm_upper_bound=rm_upper_bound(cfg, phi).upper_bound,
                rm_eq19=rm_from_phi_closed_form(cfg, phi),
                e_star=e, residual_rm=res_rm, residual_joint=res_joint,
                boundary=int(boundary), status="ok",
            )
        except Exception as exc:
            table.add(p=cfg.p, lam=cfg.lam, status=f"error: {exc}")
    return table


def resolve_protocol(cfg: NetworkConfig, raw: dict) -> ProtocolSpec:
    """Turn a protocol entry (possibly with ``"opt"`` parameters) into a concrete ProtocolSpec."""
    kind = raw["kind"]
    radius = raw.get("field_radius")
    if kind == BEST_PROGRESS:
        return ProtocolSpec.best_progress(radius)
    if kind == NEAREST_NEIGHBOR:
        phi = raw.get("phi", math.pi / 2)
        if phi == "opt":
            phi, _ = optimize_phi_at_rm(cfg, 0.0)
        return ProtocolSpec.nearest_neighbor(phi, radius)
    phi, r_m = raw.get("phi", "opt"), raw.get("r_m", "opt")
    if phi == "opt" and r_m == "opt":
        opt = optimize_joint(cfg)
        phi, r_m = opt.phi_star, opt.rm_star
    elif phi == "opt":
        phi, _ = optimize_phi_at_rm(cfg, float(r_m))
    elif r_m == "opt":
        r_m = optimal_rm_given_phi(cfg, float(phi)).rm_star
    return ProtocolSpec.selection_region(phi, r_m, radius)


def _protocol_name(raw: dict) -> str:
    parts = [raw["kind"]]
    for key in ("phi", "r_m"):
        if key in raw:
            v = raw[key]
            parts.append(f"{key}={v if isinstance(v, str) else format(v, '.6g')}")
    return parts[0] if len(parts) == 1 else f"{parts[0]}({';'.join(parts[1:])})"


def cmd_compare(config: ExperimentConfig) -> ResultTable:
    """Monte Carlo expected density of progress per protocol and sweep cell.

    All cells share the master seed, so protocols are compared on common random
    numbers.
    """
    table = ResultTable(
        ["p", "protocol", "phi", "r_m", "e_density", "std_error", "analytic", "mean_candidates", "trials", "status"]
    )
    for cell in _cells(config):
        cfg = _model_for(config, cell)
        for raw in config.protocols:
            name = _protocol_name(raw)
            try:
                proto = resolve_protocol(cfg, raw)
                batch = run_hops(cfg, proto, config.trials, config.mode, config.seed, config.workers)
                est = EstimateWithCI.from_samples(batch.progress, scale=cfg.p * cfg.lam)
                analytic = None
                if proto.kind != BEST_PROGRESS and proto.field_radius is None:
                    analytic = expected_density_of_progress(cfg, proto.region)
                table.add(
                    p=cfg.p, protocol=name,
                    phi=None if proto.kind == BEST_PROGRESS else proto.phi_sel,
                    r_m=None if proto.kind == BEST_PROGRESS else proto.r_m,
                    e_density=est.mean, std_error=est.std_error, analytic=analytic,
                    mean_candidates=math.fsum(batch.candidates) / len(batch),
                    trials=config.trials, status="ok",
                )
            except Exception as exc:
                table.add(p=cfg.p, protocol=name, trials=config.trials, status=f"error: {exc}")
    return table


def _gamma_quadrature(x):
    v, _ = integrate.quad(lambda u: math.exp(-u) * math.sqrt(u), x, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return v


def validation_checks(config: ExperimentConfig):
    """(name, value, target, deviation, threshold) for each built-in oracle check."""
    base = config.model
    n = config.trials
    seed = config.seed
    w = config.workers
    rows = []

    xs = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0]
    dev = max(abs(incomplete_gamma_3_2(x) / _gamma_quadrature(x) - 1.0) for x in xs)
    rows.append(("gamma_3_2_vs_quadrature", incomplete_gamma_3_2(1.0), _gamma_quadrature(1.0), dev, 1e-12))

    worst = 0.0
    for p in (0.01, 0.05, 0.2):
        cfg = base.replace(p=p)
        for phi in (math.pi / 6, math.pi / 3, math.pi / 2, math.pi):
            for r_m in (0.0, 0.3, 1.0):
                region = SelectionRegion(phi, r_m)
                a = expected_density_of_progress(cfg, region)
                b = expected_density_numeric(cfg, region)
                worst = max(worst, abs(a - b) / b)
    rows.append(("density_closed_form_vs_quadrature", None, None, worst, 1e-8))

    for d in (0.2, 0.5, 1.0):
        target = math.exp(-base.lam * base.p * base.t * d * d)
        est = estimate_success_probability(base, d, n, seed=seed, workers=w)
        rows.append((f"success_physical_d={d:g}", est.mean, target, abs(est.z_score(target)), 3.0))
    audit = truncation_audit(base, 1.0, n, seed=seed, workers=w)
    rows.append(("truncation_doubling_d=1", audit.doubled.mean, audit.base.mean, audit.shift_in_sigma, 1.0))

    region = SelectionRegion(math.pi / 3, 0.3)
    target = expected_density_of_progress(base, region)
    est = estimate_density_of_progress(base, ProtocolSpec.selection_region(math.pi / 3, 0.3), n, seed=seed, workers=w)
    rows.append(("density_semi_analytic_vs_closed_form", est.mean, target, abs(est.z_score(target)), 3.0))

    opts = {lam: optimize_joint(base.replace(lam=lam)) for lam in (0.5, 1.0, 2.0, 4.0)}
    e_norm = [o.e_star / math.sqrt(lam) for lam, o in opts.items()]
    r_norm = [o.rm_star * math.sqrt(lam) for lam, o in opts.items()]
    rows.append(("scaling_e_star_sqrt_lambda", e_norm[1], None, (max(e_norm) - min(e_norm)) / e_norm[1], 1e-9))
    rows.append(("scaling_rm_star_inv_sqrt_lambda", r_norm[1], None, (max(r_norm) - min(r_norm)) / r_norm[1], 1e-9))

    for phi in (math.pi / 3, math.pi / 2):
        est = candidate_count_ratio(base, phi, n, seed=seed, workers=w)
        target = phi / (2 * math.pi)
        rows.append((f"candidate_ratio_phi={phi:.6g}", est.mean, target, abs(est.z_score(target)), 3.0))
    return rows


def cmd_validate(config: ExperimentConfig) -> ResultTable:
    """Run the oracle checks; ``tolerance`` in the config replaces every threshold."""
    table = ResultTable(["check", "value", "target", "deviation", "threshold", "status"])
    for name, value, target, dev, thr in validation_checks(config):
        thr = config.tolerance if config.tolerance is not None else thr
        table.add(check=name, value=value, target=target, deviation=dev, threshold=thr,
                  status="pass" if dev <= thr else "fail")
    return table


def cmd_route(config: ExperimentConfig) -> Tuple[ResultTable, dict]:
    """Trace one multi-hop route; returns the hop table and a summary."""
    cfg = config.model
    proto = resolve_protocol(cfg, config.protocols[0])
    rc = config.route
    trace = simulate_route(
        cfg, proto, Point2(*rc["source"]), Point2(*rc["dest"]), rc["max_hops"],
        np.random.default_rng(config.seed), config.mode, rc.get("arrival_radius"),
    )
    table = ResultTable(["index", "x", "y", "progress", "success", "deviation"])
    for i, ((pos, progress, ok), dev) in enumerate(zip(trace.hops, trace.deviations)):
        table.add(index=i, x=pos.x, y=pos.y, progress=progress, success=int(ok), deviation=dev)
    summary = {
        "terminated": trace.terminated,
        "hops": len(trace.hops),
        "protocol": {"kind": proto.kind, "phi": proto.phi_sel, "r_m": proto.r_m},
    }
    return table, summary


def run(config: ExperimentConfig) -> Tuple[ResultTable, dict]:
    """Execute ``config.command``; returns the table and run metadata."""
    meta: Dict[str, Any] = {}
    if config.command == "surface":
        table = cmd_surface(config)
    elif config.command == "optimize":
        table = cmd_optimize(config)
    elif config.command == "compare":
        table = cmd_compare(config)
    elif config.command == "validate":
        table = cmd_validate(config)
        meta["failures"] = sum(1 for s in table.column("status") if s != "pass")
    else:
        table, meta = cmd_route(config)
    return table, meta


def sidecar_path(output) -> Path:
    out = Path(output)
    return out.with_name(out.name + ".json")


def sidecar(config: ExperimentConfig, meta: dict) -> dict:
    return {"command": config.command, "version": __version__, "config": config.to_dict(), "run": meta}
