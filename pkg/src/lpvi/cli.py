"""Command-line front end.

    lpvi simulate --config run.ini [--out traj.csv] [--json]
    lpvi converge --config run.ini [--h-list 0.04,0.02,0.01] [--out report.json]
    lpvi check --config run.ini [--seed 0]
    lpvi list-systems [--json]

Exit codes: 0 success, 1 configuration error, 2 step failure, 3 acceptance band failure.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import integrator as I
from . import verify as V
from .connection import ParameterError
from .liegroup import ContractError
from .systems import REGISTRY

log = logging.getLogger("lpvi")

EXIT_OK, EXIT_CONFIG, EXIT_STEP, EXIT_BAND = 0, 1, 2, 3

# section -> key -> (type, default); None default means required
_COMMON = {
    "system": {"name": (str, None), "h": (float, None), "N": (int, None)},
    "newton": {"tolerance": (float, 1e-10), "max_iterations": (int, 50), "damping": (float, 1.0),
               "min_damping": (float, 1 / 64), "jacobian": (str, "assembled"), "cond_warning": (float, 1e12)},
    "output": {"trajectory": (str, ""), "report": (str, "")},
    "monitors": {"enabled": (list, ["all"])},
    "converge": {"h_list": (list, [0.04, 0.02, 0.01, 0.005]), "T": (float, 1.0), "band_low": (float, 0.8),
                 "band_high": (float, 1.2), "norm": (str, "sup")},
    "check": {"windows": (int, 50), "derivative_tol": (float, 1e-5), "kkt_starts": (int, 2)},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    system: str
    h: float
    N: int
    params: dict
    initial: dict
    newton: dict
    output: dict
    monitors: list
    converge: dict
    check: dict
    source: str = ""
    raw: dict = field(default_factory=dict)

    @property
    def entry(self):
        return REGISTRY[self.system]

    def settings(self) -> I.NewtonSettings:
        return I.NewtonSettings(**self.newton)


def _convert(section, key, typ, raw):
    where = f"{section}.{key}"
    try:
        if typ is float:
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError
            return val
        if typ is int:
            return int(raw)
        if typ is list:
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if section == "converge":
                return [float(x) for x in items]
            return items
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {typ.__name__}") from None


def _schema(system: str) -> dict:
    entry = REGISTRY[system]
    schema = {s: dict(v) for s, v in _COMMON.items()}
    schema["params"] = {k: (type(v), v) for k, v in entry.params.items()}
    schema["initial"] = {k: (type(v), v) for k, v in entry.initial.items()}
    return schema


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if not cp.has_option("system", "name"):
        raise ConfigError("system.name: required key missing")
    name = cp.get("system", "name").strip()
    if name not in REGISTRY:
        raise ConfigError(f"system.name: unknown system {name!r} (choose from {', '.join(REGISTRY)})")
    schema = _schema(name)
    values = {s: {} for s in schema}
    for section in cp.sections():
        if section not in schema:
            raise ConfigError(f"[{section}]: unknown section")
        for key, raw in cp.items(section):
            if key not in schema[section]:
                raise ConfigError(f"{section}.{key}: unknown key")
            values[section][key] = _convert(section, key, schema[section][key][0], raw)
    for section, keys in schema.items():
        for key, (_, default) in keys.items():
            if key not in values[section]:
                if default is None:
                    raise ConfigError(f"{section}.{key}: required key missing")
                values[section][key] = default
    sysv = values["system"]
    if not sysv["h"] > 0:
        raise ConfigError(f"system.h: must be positive, got {sysv['h']}")
    if sysv["N"] < 1:
        raise ConfigError(f"system.N: must be at least 1, got {sysv['N']}")
    if values["newton"]["jacobian"] not in ("assembled", "finite-difference"):
        raise ConfigError("newton.jacobian: must be assembled or finite-difference")
    if values["converge"]["norm"] not in ("sup", "rms"):
        raise ConfigError("converge.norm: must be sup or rms")
    return RunConfig(name, sysv["h"], sysv["N"], values["params"], values["initial"], values["newton"],
                     values["output"], values["monitors"]["enabled"], values["converge"], values["check"],
                     source, values)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"--config: cannot read {path}: {exc}") from None
    return parse_config(text, path)


# ---------------------------------------------------------------------------
# output


def atomic_write(path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".lpvi-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x) -> str:
    return format(float(x), ".17g")


def csv_header(model) -> str:
    cols = ["n", "t"] + [f"p_{i + 1}" for i in range(model.r)] + [f"omega_{i + 1}" for i in range(model.d)]
    cols += [f"lambda_{i + 1}" for i in range(model.m)] + ["residual", "newton_iters", "cond_estimate"]
    return ",".join(cols)


def trajectory_csv(traj: I.Trajectory) -> str:
    """One row per completed step; row n describes window n (first shape point, group part, multiplier)."""
    model = traj.model
    k = model.k
    lines = [csv_header(model)]
    for s, rep in enumerate(traj.reports):
        j = k + s
        if j >= traj.num_windows:
            break
        w = traj.window(j)
        om = model.omega(w.shape[0], w.shape[1], w.group[0])
        row = [str(j), fmt(j * model.h)] + [fmt(v) for v in w.shape[0]] + [fmt(v) for v in om]
        row += [fmt(v) for v in traj.multipliers[j]]
        row += [fmt(rep.residual), str(rep.iterations), fmt(rep.cond_estimate)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, np.integer):
        return int(x)
    return x


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _report_path(cfg: RunConfig, out: str, default_suffix: str) -> str:
    if cfg.output["report"]:
        return cfg.output["report"]
    return out + default_suffix


# ---------------------------------------------------------------------------
# commands


def _build(cfg: RunConfig, h: float | None = None):
    entry = cfg.entry
    params = entry.make_params(cfg.params)
    model, state = entry.bootstrap(params, h or cfg.h, cfg.initial)
    return params, model, state


def cmd_simulate(cfg: RunConfig, out: str | None, as_json: bool) -> int:
    _, model, state = _build(cfg)
    traj = I.run_trajectory(model, state, cfg.N, cfg.settings())
    path = out or cfg.output["trajectory"] or f"{cfg.system}.csv"
    atomic_write(path, trajectory_csv(traj))
    report = {"system": cfg.system, "h": cfg.h, "N": cfg.N, "steps_completed": traj.num_windows - model.k,
              "failed": traj.failed, "failure": traj.failure,
              "failure_step": traj.failure_step}
    if not traj.failed or traj.num_windows > model.k:
        mon = V.monitor_trajectory(model, traj)
        enabled = cfg.monitors
        report["monitors"] = {k: v for k, v in mon.max_deviation.items() if "all" in enabled or k in enabled}
        report["not_applicable"] = mon.not_applicable
    atomic_write(_report_path(cfg, path, ".report.json"), dump_json(report))
    if as_json:
        sys.stdout.write(dump_json(report))
    if traj.failed:
        print(f"error: step {traj.failure_step} failed: {traj.failure}", file=sys.stderr)
        return EXIT_STEP
    return EXIT_OK


def convergence_for(cfg: RunConfig, h_list, T: float):
    entry = cfg.entry
    params = entry.make_params(cfg.params)
    rhs, y0, extract = entry.oracle(params, cfg.initial)
    h_ref = min(h_list) / 100
    settings = cfg.settings()

    def run(h):
        model, state = entry.bootstrap(params, h, cfg.initial)
        steps = int(round(T / h)) - (2 * model.k - 1) + 1
        return I.run_trajectory(model, state, max(steps, 1), settings)

    return V.convergence_study(run, V.oracle_reference(rhs, y0, h_ref, extract), h_list, T, cfg.converge["norm"])


def cmd_converge(cfg: RunConfig, h_list, out: str | None, as_json: bool) -> int:
    h_list = h_list if h_list is not None else cfg.converge["h_list"]
    if len(h_list) < 2:
        raise ConfigError("converge.h_list: need at least two step sizes")
    if any(not h > 0 for h in h_list) or len(set(h_list)) != len(h_list):
        raise ConfigError("converge.h_list: step sizes must be positive and distinct")
    try:
        rep = convergence_for(cfg, h_list, cfg.converge["T"])
    except ValueError as exc:
        raise ConfigError(f"converge: {exc}") from None
    lo, hi = cfg.converge["band_low"], cfg.converge["band_high"]
    in_band = bool(lo <= rep.fitted_order <= hi)
    result = {"system": cfg.system, "band": [lo, hi], "in_band": in_band, **rep.to_dict()}
    path = out or cfg.output["report"] or f"{cfg.system}.convergence.json"
    atomic_write(path, dump_json(result))
    if as_json:
        sys.stdout.write(dump_json(result))
    else:
        print(f"fitted order {rep.fitted_order:.4f} (band [{lo}, {hi}]): {'ok' if in_band else 'outside band'}")
    if rep.flag and rep.flag.startswith("non-converged"):
        print(f"error: {rep.flag}", file=sys.stderr)
        return EXIT_STEP
    return EXIT_OK if in_band else EXIT_BAND


def run_checks(model, traj: I.Trajectory, tolerance: float, windows: int = 50, derivative_tol: float = 1e-5,
               seed: int = 0, kkt: bool = False, kkt_starts: int = 2, monitors=("all",)) -> dict:
    """Run every verification suite; returns {suite: {"pass": bool, ...}}."""
    out = {}
    worst = V.derivative_check(model, windows, seed)
    bad = V.derivative_failures(worst, derivative_tol)
    out["derivatives"] = {"pass": not bad, "failed_slots": bad, "worst": worst}
    reg = V.regularity_sweep(model, traj)
    out["regularity"] = {"pass": not reg.flagged, "max_cond": float(np.max(reg.cond)) if len(reg.cond) else 0.0,
                         "first_flagged_step": reg.first_flagged}
    mon = V.monitor_trajectory(model, traj)
    limits = {"charge": 0.0}
    mon_res = {}
    for name in V.conserved_quantities(model):
        if "all" not in monitors and name not in monitors:
            continue
        dev = mon.max_deviation[name]
        lim = limits.get(name, 10 * tolerance)
        mon_res[name] = {"max_deviation": dev, "limit": lim, "pass": dev <= lim}
    out["monitors"] = {"pass": all(v["pass"] for v in mon_res.values()), "values": mon_res,
                       "not_applicable": mon.not_applicable}
    if kkt:
        march = V.marching_kkt_residual(traj)
        res = V.kkt_oracle(model, traj, seed=seed, n_starts=kkt_starts)
        interior = V.interior_residuals(model, res) if res.converged else np.array([math.nan])
        ok = res.converged and march <= 1e-8 and float(np.max(interior)) <= 1e-8
        out["kkt"] = {"pass": bool(ok), "marching_residual": march, "oracle_converged": res.converged,
                      "oracle_residual": res.residual, "interior_residual": float(np.max(interior)),
                      "note": res.note}
    else:
        out["kkt"] = {"pass": True, "skipped": "N > 6"}
    return out


def cmd_check(cfg: RunConfig, seed: int, out: str | None, as_json: bool) -> int:
    _, model, state = _build(cfg)
    traj = I.run_trajectory(model, state, cfg.N, cfg.settings())
    if traj.failed:
        print(f"error: step {traj.failure_step} failed: {traj.failure}", file=sys.stderr)
        return EXIT_STEP
    res = run_checks(model, traj, cfg.newton["tolerance"], cfg.check["windows"], cfg.check["derivative_tol"],
                     seed, kkt=kkt_applicable(cfg, model), kkt_starts=cfg.check["kkt_starts"],
                     monitors=cfg.monitors)
    all_ok = all(v["pass"] for v in res.values())
    if out or cfg.output["report"]:
        atomic_write(out or cfg.output["report"], dump_json(res))
    if as_json:
        sys.stdout.write(dump_json(res))
    else:
        for suite, v in res.items():
            status = "pass" if v["pass"] else "FAIL"
            extra = ""
            if suite == "derivatives" and v["failed_slots"]:
                extra = " slots: " + ", ".join(v["failed_slots"])
            if "skipped" in v:
                status, extra = "skipped", f" ({v['skipped']})"
            print(f"{suite}: {status}{extra}")
        for name, note in res["monitors"]["not_applicable"].items():
            print(f"  {name}: {note}")
    return EXIT_OK if all_ok else EXIT_BAND


def kkt_applicable(cfg: RunConfig, model) -> bool:
    """The KKT oracle is run for short trajectories only (system.N <= 6)."""
    return cfg.N <= 6


def registry_listing() -> list:
    out = []
    for name, entry in REGISTRY.items():
        required = [f"system.{k}" for k, (_, d) in _COMMON["system"].items() if d is None]
        optional = {}
        for section, keys in _schema(name).items():
            for key, (_, default) in keys.items():
                if default is not None:
                    optional[f"{section}.{key}"] = default
        out.append({"name": name, "description": entry.description, "required": required, "optional": optional})
    return out


def cmd_list_systems(as_json: bool) -> int:
    listing = registry_listing()
    if as_json:
        sys.stdout.write(dump_json(listing))
        return EXIT_OK
    for item in listing:
        print(f"{item['name']}: {item['description']}")
        print(f"  required: {', '.join(item['required'])}")
        print("  optional: " + ", ".join(f"{k}={v}" for k, v in item["optional"].items()))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpvi", description="Reduced higher-order variational integrators.")
    ap.add_argument("command", choices=["simulate", "converge", "check", "list-systems"])
    ap.add_argument("--config", help="INI run configuration")
    ap.add_argument("--out", help="output path (trajectory CSV or report JSON)")
    ap.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    ap.add_argument("--h-list", help="comma-separated step sizes for converge")
    ap.add_argument("--seed", type=int, default=0, help="seed for oracle random starts")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def main(argv=None) -> int:
    ap = build_parser()
    ap.__class__ = _Parser
    try:
        args = ap.parse_args(argv)
    except _ArgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "list-systems":
        return cmd_list_systems(args.json)
    try:
        if not args.config:
            raise ConfigError("--config: required for this command")
        cfg = load_config(args.config)
        h_list = None
        if args.h_list is not None:
            try:
                h_list = [float(x) for x in args.h_list.split(",") if x.strip()]
            except ValueError:
                raise ConfigError(f"--h-list: cannot parse {args.h_list!r}") from None
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out, args.json)
        if args.command == "converge":
            return cmd_converge(cfg, h_list, args.out, args.json)
        return cmd_check(cfg, args.seed, args.out, args.json)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except I.StepFailure as exc:
        print(f"error: step {exc.step_index} failed: {exc}", file=sys.stderr)
        return EXIT_STEP


if __name__ == "__main__":
    sys.exit(main())
