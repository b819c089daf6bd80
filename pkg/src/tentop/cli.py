"""Scenario runner: parse a config, run one command, write tables and a manifest.

Exit status: 0 on success, 1 if verify-suite has a failing criterion,
2 on a configuration error, 3 on numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .core.functions import (
    BoundaryPower,
    CauchyKernel,
    Constant,
    LogTest,
    RationalKernel,
    kernel_test_family,
    monomial,
    polynomial,
)
from .core.quadrature import NonConvergenceError, QuadratureConfig
from .core.series import DomainError
from .hilbert import IllDefinedError, hilbert_via_composition, imu_apply
from .lab import (
    bound_integrals,
    compactness_probe,
    corpus_seed,
    default_alpha_grid,
    norm_bounds,
    operator_norm_probe,
)
from .measures import classify_carleson, parse_measure
from .tent import RadialGrid, TentParams, rho_pq

COMMANDS = (
    "tent-norm",
    "hilbert-apply",
    "carleson-classify",
    "norm-bounds",
    "probe-norm",
    "probe-compactness",
    "verify-suite",
)
FORMATS = ("csv", "json", "both")

# fixed column order per command
COLUMNS = {
    "tent-norm": ("p", "q", "function", "value", "err_estimate", "levels", "converged"),
    "hilbert-apply": ("measure", "function", "z_re", "z_im", "value_re", "value_im", "err_estimate"),
    "carleson-classify": ("measure", "p", "q", "is_1CM", "cm_constant", "is_1VCM", "moment_growth",
                          "dyadic_condition", "dyadic_last_ratio", "verdict"),
    "norm-bounds": ("p", "q", "lower", "upper", "err_estimate"),
    "probe-norm": ("alpha", "ratio", "lower", "upper", "engine", "err_estimate"),
    "probe-compactness": ("alpha", "norm", "err_estimate"),
    "verify-suite": ("criterion", "name", "passed", "threshold", "measured"),
}
_CONFIG_KEYS = {"command", "params", "measures", "functions", "points", "alphas", "engine",
                "quadrature", "grid", "output", "criteria"}


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    command: str
    params: list = field(default_factory=list)
    measures: list = field(default_factory=list)
    functions: list = field(default_factory=list)
    points: list = field(default_factory=list)
    alphas: list | None = None
    engine: str = "integral"
    rel_tol: float | None = None
    grid: dict = field(default_factory=dict)
    criteria: list | None = None
    out: str = "tentop-out"
    formats: tuple = ("csv", "json")

    def canonical(self) -> dict:
        # everything that can change a number; the output location does not
        d = asdict(self)
        d.pop("out")
        d["formats"] = list(self.formats)
        d["seed"] = corpus_seed()
        return d

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class Table:
    name: str
    columns: tuple
    rows: list
    errors: list            # per row: {column: error estimate}
    notes: dict = field(default_factory=dict)
    plot: list | None = None  # (x, y) pairs


# ---- parsing -------------------------------------------------------------------

def parse_pair(item) -> TentParams:
    try:
        if isinstance(item, dict):
            p, q = item["p"], item["q"]
        elif isinstance(item, str):
            p, q = item.split(",")
        else:
            p, q = item
        return TentParams(_number(p), _number(q))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad (p, q) entry {item!r}: {exc}") from exc


def _number(x) -> float:
    if isinstance(x, str) and "/" in x:
        a, b = x.split("/")
        return float(a) / float(b)
    return float(x)


def parse_function(key: str, tp: TentParams | None = None):
    """Function keys: const:c, z^k, kernel:alpha:beta, power:beta, cauchy,
    logtest, family:alpha (needs p, q), poly:c0,c1,..."""
    head, _, rest = key.partition(":")
    try:
        if key.startswith("z^"):
            return monomial(int(key[2:]))
        if head == "const":
            return Constant(complex(rest or "1"))
        if head == "kernel":
            a, b = rest.split(":")
            return RationalKernel(complex(a.replace(" ", "")), float(b))
        if head == "power":
            return BoundaryPower(float(rest))
        if head == "cauchy" and not rest:
            return CauchyKernel()
        if head == "logtest" and not rest:
            return LogTest()
        if head == "family":
            if tp is None:
                raise ValueError("family functions need (p, q)")
            return kernel_test_family(float(rest), tp)
        if head == "poly":
            return polynomial([complex(c) for c in rest.split(",")], key)
    except ValueError as exc:
        raise ConfigError(f"bad function key {key!r}: {exc}") from exc
    raise ConfigError(f"unknown function key {key!r}")


def _measure(key: str):
    try:
        return parse_measure(key)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _check_regime(command: str, tp: TentParams):
    if command in ("norm-bounds", "probe-norm") and not (tp.strict_regime and tp.p > 2):
        raise ConfigError(f"{command} at {tp} requires 1/p+1/q < 1 and p > 2 (1/p+1/q = {tp.s:.6g})")
    if command == "probe-compactness" and not tp.strict_regime:
        raise ConfigError(f"{command} at {tp} requires 1/p+1/q < 1 (1/p+1/q = {tp.s:.6g})")


def load_yaml(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def build_config(args) -> ScenarioConfig:
    data = load_yaml(args.config) if args.config else {}
    command = args.command or data.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)} (got {command!r})")
    output = data.get("output") or {}
    fmt = args.format or output.get("formats", "both")
    if isinstance(fmt, list):
        fmt = "both" if set(fmt) == {"csv", "json"} else (fmt[0] if len(fmt) == 1 else None)
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
    quad = data.get("quadrature") or {}
    rel_tol = args.tol if args.tol is not None else quad.get("rel_tol")
    if rel_tol is not None and not float(rel_tol) > 0:
        raise ConfigError("tolerance must be positive")
    raw_params = args.pq or data.get("params") or []
    cfg = ScenarioConfig(
        command=command,
        params=[parse_pair(x) for x in raw_params],
        measures=list(args.measure or data.get("measures") or []),
        functions=list(args.function or data.get("functions") or []),
        points=[_point(z) for z in (args.point or data.get("points") or [])],
        alphas=[float(a) for a in (args.alpha or data.get("alphas"))] if (args.alpha or data.get("alphas")) else None,
        engine=args.engine or data.get("engine", "integral"),
        rel_tol=None if rel_tol is None else float(rel_tol),
        grid=dict(data.get("grid") or {}),
        criteria=list(args.criteria or data.get("criteria") or []) or None,
        out=args.out or output.get("dir") or "tentop-out",
        formats=("csv", "json") if fmt == "both" else (fmt,),
    )
    _validate(cfg)
    return cfg


def _point(z) -> complex:
    try:
        return complex(str(z).replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"bad point {z!r}") from exc


def _validate(cfg: ScenarioConfig):
    if cfg.engine not in ("integral", "matrix"):
        raise ConfigError(f"engine must be 'integral' or 'matrix' (got {cfg.engine!r})")
    try:
        RadialGrid(**cfg.grid)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid override: {exc}") from exc
    if cfg.command in ("tent-norm", "hilbert-apply") and not cfg.functions:
        raise ConfigError(f"{cfg.command} needs at least one function")
    if cfg.command == "hilbert-apply" and not cfg.points:
        raise ConfigError("hilbert-apply needs at least one point")
    if any(abs(z) >= 1 for z in cfg.points):
        raise ConfigError("points must lie in the open unit disc")
    if cfg.command == "tent-norm" and not cfg.params:
        raise ConfigError("tent-norm needs at least one (p, q) pair")
    if cfg.command in ("carleson-classify", "probe-compactness") and not cfg.measures:
        raise ConfigError(f"{cfg.command} needs at least one measure key")
    if cfg.command in ("norm-bounds", "probe-norm", "probe-compactness") and not cfg.params:
        raise ConfigError(f"{cfg.command} needs at least one (p, q) pair")
    for tp in cfg.params:
        _check_regime(cfg.command, tp)
    for key in cfg.measures:
        _measure(key)
    for key in cfg.functions:
        parse_function(key, cfg.params[0] if cfg.params else TentParams(4.0, 4.0))
    if cfg.alphas is not None and any(not 0 <= a < 1 for a in cfg.alphas):
        raise ConfigError("alphas must lie in [0, 1)")
    if cfg.criteria is not None:
        from .suite import CHECKS
        bad = [c for c in cfg.criteria if int(c) not in CHECKS]
        if bad:
            raise ConfigError(f"unknown criteria {bad}")
        cfg.criteria = sorted(int(c) for c in cfg.criteria)


# ---- commands ---------------------------------------------------------------------

def _quad(cfg: ScenarioConfig, default: float) -> QuadratureConfig:
    return QuadratureConfig(rel_tol=cfg.rel_tol or default)


class _Unsettled:
    """Collects non-convergence in mandatory computations."""

    def __init__(self):
        self.messages = []


def _tent_norm_task(args):
    tp, key, rel_tol, grid = args
    est = rho_pq(parse_function(key, tp), tp, QuadratureConfig(rel_tol=rel_tol), RadialGrid(**grid))
    return tp, key, est


def cmd_tent_norm(cfg, jobs, unsettled):
    tasks = [(tp, key, cfg.rel_tol or 1e-8, cfg.grid) for tp in cfg.params for key in cfg.functions]
    rows, errs = [], []
    for tp, key, est in _map(_tent_norm_task, tasks, jobs):
        converged = est.diverges or est.detail.get("converged", False)
        if not converged:
            unsettled.messages.append(f"rho_pq of {key} at {tp} did not settle")
        rows.append([tp.p, tp.q, key, est.value, est.error_estimate, len(est.refinement_trace), converged])
        errs.append({"value": est.error_estimate})
    return [Table("tent-norm", COLUMNS["tent-norm"], rows, errs)]


def cmd_hilbert_apply(cfg, jobs, unsettled):
    measures = cfg.measures or ["lebesgue"]
    quad = _quad(cfg, 1e-10)
    rows, errs = [], []
    for mkey in measures:
        mu = _measure(mkey)
        for fkey in cfg.functions:
            f = parse_function(fkey, cfg.params[0] if cfg.params else None)
            try:
                vals = imu_apply(f, mu, cfg.points, quad)
                finer = imu_apply(f, mu, cfg.points, quad.with_tol(quad.rel_tol * 1e-2))
            except IllDefinedError as exc:
                raise ConfigError(f"I_mu is not defined on {fkey} with {mkey}: {exc}") from exc
            if mkey == "lebesgue":
                other = hilbert_via_composition(f, cfg.points, quad)
            else:
                other = finer
            for z, v, v2, v3 in zip(cfg.points, _iter(finer), _iter(vals), _iter(other)):
                err = max(abs(v - v2), abs(v - v3))
                rows.append([mkey, fkey, z.real, z.imag, v.real, v.imag, err])
                errs.append({"value_re": err, "value_im": err})
    return [Table("hilbert-apply", COLUMNS["hilbert-apply"], rows, errs)]


def _iter(v):
    import numpy as np

    return list(np.atleast_1d(v))


def cmd_carleson(cfg, jobs, unsettled):
    params = cfg.params or [TentParams(4.0, 4.0)]
    rows, errs, tables = [], [], []
    for mkey in cfg.measures:
        mu = _measure(mkey)
        for tp in params:
            rep = classify_carleson(mu, tp)
            rows.append([mkey, tp.p, tp.q, rep.is_1CM, rep.cm_constant, rep.is_1VCM, rep.moment_growth,
                         rep.dyadic_condition_value, rep.dyadic_last_term_ratio, rep.verdict])
            errs.append({"cm_constant": 1e-12 * max(1.0, rep.cm_constant), "dyadic_last_ratio": 0.0})
        tables.append(Table(
            f"tail-ratio_{_slug(mkey)}", ("t", "ratio"), [], [],
            plot=[(t, r) for t, r in rep.vanishing_profile],
        ))
    head = Table("carleson-classify", COLUMNS["carleson-classify"], rows, errs,
                 notes={"probe_resolution": rep.probe_resolution})
    return [head] + tables


def cmd_norm_bounds(cfg, jobs, unsettled):
    rows, errs = [], []
    for tp in cfg.params:
        lower, upper = norm_bounds(tp)
        qlo, qhi, _ = bound_integrals(tp)
        err = max(abs(qlo - lower), abs(qhi - upper))
        rows.append([tp.p, tp.q, lower, upper, err])
        errs.append({"lower": err, "upper": err})
    return [Table("norm-bounds", COLUMNS["norm-bounds"], rows, errs)]


def _probe_task(args):
    tp, alphas, engine, rel_tol = args
    return operator_norm_probe(tp, alphas, engine, QuadratureConfig(rel_tol=rel_tol))


def cmd_probe_norm(cfg, jobs, unsettled):
    alphas = cfg.alphas or default_alpha_grid()
    tasks = [(tp, alphas, cfg.engine, cfg.rel_tol or 1e-6) for tp in cfg.params]
    tables = []
    for tp, res in zip(cfg.params, _map(_probe_task, tasks, jobs)):
        rows, errs = [], []
        for a, r, e in zip(res.alpha_grid, res.ratios, res.errors):
            err = e * r if isinstance(e, float) else math.nan
            rows.append([a, r, res.lower_bound, res.upper_bound, res.engine, err if isinstance(e, float) else e])
            errs.append({"ratio": err})
        notes = {"scope": "outside theorem scope (p = q)" if tp.p == tp.q else "within theorem scope",
                 "max_ratio": res.max_ratio, "bound_violations": list(res.bound_violations)}
        tables.append(Table(f"probe-norm_{_tp_slug(tp)}", COLUMNS["probe-norm"], rows, errs, notes,
                            plot=[(a, r) for a, r in zip(res.alpha_grid, res.ratios) if math.isfinite(r)]))
    return tables


def _compact_task(args):
    mkey, tp, alphas, rel_tol = args
    return compactness_probe(parse_measure(mkey), tp, alphas, QuadratureConfig(rel_tol=rel_tol), with_errors=True)


def cmd_probe_compactness(cfg, jobs, unsettled):
    alphas = cfg.alphas or [0.0, 0.5, 0.9, 0.99, 0.999]
    tasks = [(m, tp, alphas, cfg.rel_tol or 1e-6) for m in cfg.measures for tp in cfg.params]
    tables = []
    for (mkey, tp, _, _), vals in zip(tasks, _map(_compact_task, tasks, jobs)):
        rows = [[a, v, e] for a, (v, e) in zip(alphas, vals)]
        errs = [{"norm": e} for _, e in vals]
        tables.append(Table(f"probe-compactness_{_slug(mkey)}_{_tp_slug(tp)}", COLUMNS["probe-compactness"], rows, errs,
                            plot=[(a, v) for a, (v, _) in zip(alphas, vals)]))
    return tables


def _check_task(number):
    from .suite import run_check

    return run_check(number)


def cmd_verify_suite(cfg, jobs, unsettled):
    from .suite import CHECKS, REPEAT_FOR_DETERMINISM, CriterionResult

    numbers = cfg.criteria or sorted(CHECKS)
    results = list(_map(_check_task, numbers, jobs))
    repeat = [n for n in numbers if n in REPEAT_FOR_DETERMINISM]
    if repeat:
        first = [_dump(r.as_dict()) for r in results if r.number in repeat]
        second = [_dump(r.as_dict()) for r in _map(_check_task, repeat, jobs)]
        results.append(CriterionResult(
            13, "determinism", first == second,
            {"rerun_criteria": repeat, "identical": first == second}, "byte-identical rerun",
        ))
    rows, errs = [], []
    for r in results:
        print(r.line(), flush=True)
        rows.append([r.number, r.name, r.passed, r.threshold, _dump(r.as_dict()["measured"])])
        errs.append({})
    table = Table("verify-suite", COLUMNS["verify-suite"], rows, errs,
                  notes={"failed": [r.number for r in results if not r.passed]})
    return [table]


HANDLERS = {
    "tent-norm": cmd_tent_norm,
    "hilbert-apply": cmd_hilbert_apply,
    "carleson-classify": cmd_carleson,
    "norm-bounds": cmd_norm_bounds,
    "probe-norm": cmd_probe_norm,
    "probe-compactness": cmd_probe_compactness,
    "verify-suite": cmd_verify_suite,
}


def _map(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---- output -------------------------------------------------------------------------

def _slug(key: str) -> str:
    return "".join(c if c.isalnum() or c in "-." else "_" for c in key)


def _tp_slug(tp: TentParams) -> str:
    return f"p{tp.p:g}_q{tp.q:g}".replace("/", "_")


def _cell(v) -> str:
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, complex):
        return repr(v)
    return str(v)


def _json_value(v):
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    return v


def _dump(obj) -> str:
    return json.dumps(_json_value(obj), sort_keys=True)


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def render_json(table: Table) -> str:
    rows = [dict(zip(table.columns, (_json_value(v) for v in row))) for row in table.rows]
    return json.dumps({"table": table.name, "columns": list(table.columns), "rows": rows,
                       "notes": _json_value(table.notes)}, indent=2) + "\n"


def render_plot(table: Table) -> str:
    lines = [f"# {table.name}: x y"]
    lines += [f"{_cell(float(x))} {_cell(float(y))}" for x, y in table.plot]
    return "\n".join(lines) + "\n"


def write_outputs(cfg: ScenarioConfig, tables, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}

    def emit(name, text):
        (out_dir / name).write_bytes(text.encode("utf-8"))
        files[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()

    entries = []
    plots = []
    for t in tables:
        if t.rows:
            if "csv" in cfg.formats:
                emit(f"{t.name}.csv", render_csv(t))
            if "json" in cfg.formats:
                emit(f"{t.name}.json", render_json(t))
            for i, (row, err) in enumerate(zip(t.rows, t.errors)):
                values = {c: _json_value(v) for c, v in zip(t.columns, row) if isinstance(v, float)}
                entries.append({"table": t.name, "row": i, "values": values,
                                "error_estimates": _json_value(err)})
        if t.plot:
            name = f"{t.name}.dat"
            emit(name, render_plot(t))
            plots.append(name)
    if plots:
        script = ["plot " + ", ".join(f"'{p}' using 1:2 with linespoints title '{p[:-4]}'" for p in plots)]
        emit("plot.gp", "\n".join(script) + "\n")
    grid = RadialGrid(**cfg.grid)
    manifest = {
        "tool": "tentop",
        "version": __version__,
        "command": cfg.command,
        "config_hash": cfg.digest(),
        "config": _json_value(_canonical_for_json(cfg)),
        "seed": corpus_seed(),
        "grid": {
            "refinement_levels": [grid.refinement_level, grid.max_level],
            "levels": [asdict(grid.rule(k)) for k in range(grid.refinement_level, grid.max_level + 1)],
        },
        "files": files,
        "values": entries,
    }
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (out_dir / "manifest.json").write_bytes(text.encode("utf-8"))
    return manifest


def _canonical_for_json(cfg):
    d = cfg.canonical()
    d["params"] = [[tp.p, tp.q] for tp in cfg.params]
    d["points"] = [[z.real, z.imag] for z in cfg.points]
    return d


# ---- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tentop", description="Hilbert operator experiments on analytic tent spaces.")
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="overrides the config's command")
    ap.add_argument("--config", metavar="PATH", help="YAML scenario file")
    ap.add_argument("--out", metavar="DIR", help="output directory")
    ap.add_argument("--jobs", type=int, default=1, metavar="N")
    ap.add_argument("--tol", type=float, metavar="X", help="relative tolerance")
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("--pq", action="append", metavar="P,Q", help="exponent pair, repeatable")
    ap.add_argument("--measure", action="append", metavar="KEY")
    ap.add_argument("--function", action="append", metavar="KEY")
    ap.add_argument("--point", action="append", metavar="Z")
    ap.add_argument("--alpha", action="append", type=float)
    ap.add_argument("--engine", choices=("integral", "matrix"))
    ap.add_argument("--criteria", type=int, nargs="+", metavar="N")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        cfg = build_config(args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    unsettled = _Unsettled()
    try:
        tables = HANDLERS[cfg.command](cfg, args.jobs, unsettled)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergenceError, IllDefinedError) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 3
    try:
        write_outputs(cfg, tables, Path(cfg.out))
    except OSError as exc:
        print(f"config error: cannot write to {cfg.out}: {exc}", file=sys.stderr)
        return 2
    if unsettled.messages:
        for m in unsettled.messages:
            print(f"non-convergence: {m}", file=sys.stderr)
        return 3
    if cfg.command == "verify-suite" and tables[0].notes["failed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
