"""Command-line front end.

One binary, one subcommand per task.  Parameter precedence is CLI flags >
config file > built-in defaults; ``RPWF_SEED`` overrides the default seed
only when neither a flag nor a config entry supplies one.  Every run
prints a manifest (resolved parameters, seed, sha256 of each output) and
writes it next to the primary output, so a run can be reproduced
bit-exactly from the manifest alone.

Exit codes: 0 success, 2 parameter validation failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import io as rio
from .boundary import (
    IntervalProblem,
    classify_boundary,
    dominant_colors,
    group_to_1d,
    hitting_prob,
    is_recessive,
    mean_exit_time,
    stationary_beta_cdf,
)
from .errors import ValidationError
from .rng import StreamKey
from .simplex import check_simplex
from .spectral import transition_density
from .stats import ConvergenceConfig, convergence_experiment, ks_one_sample, stationary_urn_samples
from .urn import UrnParams, simulate_urn
from .wright_fisher import OneDimWf, SdeConfig, WfParams, simulate_wf, simulate_wf_ensemble

DEFAULT_SEED = 0
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3


def _floats(s: str) -> list[float]:
    try:
        return [float(v) for v in str(s).split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ValidationError("value", f"expected a comma list of numbers, got {s!r}") from exc


def _ints(s: str) -> list[int]:
    return [int(v) for v in str(s).split(",") if v.strip() != ""]


@dataclass(frozen=True)
class Opt:
    name: str  # flag name without leading dashes, hyphenated
    conv: Callable
    default: object
    help: str = ""

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_COMMON = [
    Opt("seed", int, None, "master seed (env RPWF_SEED when absent)"),
    Opt("config", str, None, "flat key = value config file"),
    Opt("out", str, None, "output path (default derived from the command)"),
    Opt("format", str, "csv", "csv or json"),
    Opt("workers", int, os.cpu_count() or 1, "replica-chunk worker count"),
]


def _load_config(path: str) -> dict:
    """Flat ``key = value`` file; a TOML-compatible subset."""
    data: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError("config", f"cannot read {path}: {exc}") from exc
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError("config", f"expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip().replace("_", "-").lower()
        val = val.strip()
        if len(val) >= 2 and val[0] == val[-1] and val[0] in "\"'":
            val = val[1:-1]
        data[key] = val
    return data


def _resolve(opts: list[Opt], ns: argparse.Namespace) -> dict:
    """Apply precedence CLI > config > defaults, converting every value once."""
    cli = {k: v for k, v in vars(ns).items() if v is not None and k not in ("command",)}
    cfg = _load_config(cli["config"]) if cli.get("config") else {}
    resolved: dict[str, object] = {}
    raw: dict[str, str] = {}
    for opt in opts:
        if opt.dest in cli:
            value = cli[opt.dest]
        elif opt.name in cfg:
            value = cfg[opt.name]
        elif opt.name == "seed" and os.environ.get("RPWF_SEED"):
            value = os.environ["RPWF_SEED"]
        else:
            value = opt.default
        if value is None:
            resolved[opt.dest] = None
            continue
        raw[opt.name] = ",".join(str(v) for v in value) if isinstance(value, list) else str(value)
        try:
            resolved[opt.dest] = opt.conv(value) if not isinstance(value, (list, bool)) else value
        except (TypeError, ValueError) as exc:
            raise ValidationError(opt.name, f"bad value {value!r}") from exc
    if resolved.get("seed") is None:
        resolved["seed"] = DEFAULT_SEED
        raw["seed"] = str(DEFAULT_SEED)
    if resolved.get("format") not in (None, "csv", "json"):
        raise ValidationError("format", f"expected csv or json, got {resolved['format']!r}")
    resolved["_raw"] = raw
    return resolved


def _wf_params(r: dict) -> WfParams:
    b_vec = np.asarray(r["b"], dtype=float)
    if b_vec.size == 1:
        if r.get("p") is None:
            raise ValidationError("p", "needed when --b is a single total")
        p = np.asarray(r["p"], dtype=float)
        return WfParams(b=float(b_vec[0]), alpha=r["alpha"], p=p)
    p = np.asarray(r["p"], dtype=float) if r.get("p") is not None else b_vec / b_vec.sum()
    return WfParams(b=float(b_vec.sum()), alpha=r["alpha"], p=p)


def _reduced_point(vals: list[float], k: int, name: str) -> np.ndarray:
    v = np.asarray(vals, dtype=float)
    if v.size == k:
        check_simplex(v, name)
        return v[:-1]
    if v.size == k - 1:
        return v
    raise ValidationError(name, f"expected {k} (full) or {k - 1} (reduced) coordinates")


# ---------------------------------------------------------------- commands


def _run_simulate_urn(r: dict) -> list[dict]:
    params = UrnParams(
        alpha=r["alpha"],
        beta=r["beta"],
        b=np.asarray(r["b"], dtype=float),
        B0=np.asarray(r["b0"], dtype=float) if r.get("b0") is not None else np.asarray(r["b"], dtype=float),
    )
    traj = simulate_urn(params, r["steps"], StreamKey(r["seed"], "cli-urn"))
    data = rio.urn_trajectory_csv(traj) if r["format"] == "csv" else rio.urn_trajectory_json(traj)
    out = r.get("out") or f"urn-trajectory.{r['format']}"
    return [rio.write_bytes(out, data)]


def _run_simulate_wf(r: dict) -> list[dict]:
    params = _wf_params(r)
    x0 = np.asarray(r["x0"], dtype=float) if r.get("x0") is not None else params.p.copy()
    cfg = SdeConfig(dt=r["dt"])
    if r["replicas"] <= 1:
        path = simulate_wf(params, x0, r["t_max"], cfg, StreamKey(r["seed"], "cli-wf"))
        data = rio.path_csv(path) if r["format"] == "csv" else rio.path_json(path)
        out = r.get("out") or f"wf-path.{r['format']}"
        return [rio.write_bytes(out, data)]
    values = simulate_wf_ensemble(
        params, x0, r["t_max"], cfg, r["replicas"], seed=r["seed"], label="cli-wf", checkpoints=[r["t_max"]]
    )[0]
    data = rio.ensemble_summary_json(r["t_max"], values, {"seed": r["seed"], "label": "cli-wf"})
    out = r.get("out") or "wf-ensemble.json"
    return [rio.write_bytes(out, data)]


def _run_density(r: dict) -> list[dict]:
    params = _wf_params(r)
    y0 = _reduced_point(r["y0"], params.k, "y0")
    y = _reduced_point(r["y"], params.k, "y")
    result = transition_density(y0, y, r["t"], params, r.get("max_degree"))
    data = rio.canonical_json(result.as_dict())
    out = r.get("out") or "density.json"
    return [rio.write_bytes(out, data)]


def _run_boundary(r: dict) -> list[dict]:
    params = _wf_params(r)
    J = r["j"]
    od = group_to_1d(params, J)
    report = {
        "j": [int(c) for c in J],
        "p_group": float(sum(params.p[c - 1] for c in J)),
        "a0": od.a0,
        "a1": od.a1,
        "boundary_at_0": classify_boundary(od.a0).value,
        "boundary_at_1": classify_boundary(od.a1).value,
        "recessive": is_recessive(params, J),
        "dominant_colors": dominant_colors(params),
    }
    out = r.get("out") or "boundary.json"
    return [rio.write_bytes(out, rio.canonical_json(report))]


def _run_hit_prob(r: dict) -> list[dict]:
    od = OneDimWf(a0=r["a0"], a1=r["a1"])
    ip = IntervalProblem(od=od, a=r["a"], b_pt=r["b_pt"])
    report = {
        "a0": od.a0,
        "a1": od.a1,
        "a": ip.a,
        "b": ip.b_pt,
        "z0": r["z0"],
        "u": hitting_prob(ip, r["z0"]),
        "mean_exit_time": mean_exit_time(ip, r["z0"]),
    }
    out = r.get("out") or "hit-prob.json"
    return [rio.write_bytes(out, rio.canonical_json(report))]


def _run_converge(r: dict) -> list[dict]:
    params = _wf_params(r)
    config = ConvergenceConfig(
        wf=params,
        betas=tuple(r["betas"]),
        times=tuple(r["times"]),
        n_replicas=r["replicas"],
        x0=tuple(r["x0"]) if r.get("x0") is not None else None,
        dt=r["dt"],
        seed=r["seed"],
        workers=r["workers"],
        keep_samples=True,
    )
    report = convergence_experiment(config)
    out = r.get("out") or "converge.json"
    outputs = [rio.write_bytes(out, rio.canonical_json(report.as_dict()))]
    stem = Path(out)
    for (i_beta, i_time), (urn_vals, wf_vals) in sorted(report.samples.items()):
        name = stem.with_suffix("").as_posix() + f".beta{report.betas[i_beta]}_t{report.times[i_time]}.csv"
        outputs.append(rio.write_bytes(name, rio.samples_csv(urn_vals, wf_vals)))
    return outputs


def _run_stationary_test(r: dict) -> list[dict]:
    params = _wf_params(r)
    samples = stationary_urn_samples(params, r["beta"], r["t_long"], r["replicas"], r["seed"], r["workers"])
    reports = []
    for i in range(params.k):
        od = group_to_1d(params, [i + 1])
        ks = ks_one_sample(samples[:, i], stationary_beta_cdf(od))
        reports.append(
            {
                "component": i + 1,
                "beta_params": [2.0 * params.rate * float(params.p[i]), 2.0 * params.rate * (1.0 - float(params.p[i]))],
                "ks": ks.as_dict(),
                "pass_5pct": ks.passes(0.05),
            }
        )
    out = r.get("out") or "stationary-test.json"
    return [rio.write_bytes(out, rio.canonical_json({"n_replicas": r["replicas"], "tests": reports}))]


_COMMANDS: dict[str, tuple[list[Opt], Callable[[dict], list[dict]]]] = {
    "simulate-urn": (
        _COMMON
        + [
            Opt("alpha", float, 1.0),
            Opt("beta", float, 0.5),
            Opt("b", _floats, [1.0, 1.0], "fixed ball counts, comma list"),
            Opt("b0", _floats, None, "initial variable counts (default: b)"),
            Opt("steps", int, 100),
        ],
        _run_simulate_urn,
    ),
    "simulate-wf": (
        _COMMON
        + [
            Opt("alpha", float, 1.0),
            Opt("b", _floats, [1.0, 1.0], "ball vector, or a single total used with --p"),
            Opt("p", _floats, None, "mutation kernel (default b/|b|)"),
            Opt("x0", _floats, None, "start point (default p)"),
            Opt("t-max", float, 1.0),
            Opt("dt", float, 1e-3),
            Opt("replicas", int, 1),
        ],
        _run_simulate_wf,
    ),
    "density": (
        _COMMON
        + [
            Opt("alpha", float, 1.0),
            Opt("b", _floats, [1.0, 1.0]),
            Opt("p", _floats, None),
            Opt("y0", _floats, [0.5], "start point, full or reduced coordinates"),
            Opt("y", _floats, [0.5], "evaluation point"),
            Opt("t", float, 1.0),
            Opt("max-degree", int, None),
        ],
        _run_density,
    ),
    "boundary": (
        _COMMON
        + [
            Opt("alpha", float, 1.0),
            Opt("b", _floats, [1.0, 1.0]),
            Opt("p", _floats, None),
            Opt("j", _ints, [1], "color group, comma list of 1-based colors"),
        ],
        _run_boundary,
    ),
    "hit-prob": (
        _COMMON
        + [
            Opt("a0", float, 0.5),
            Opt("a1", float, 0.5),
            Opt("a", float, 0.25),
            Opt("b-pt", float, 0.75),
            Opt("z0", float, 0.5),
        ],
        _run_hit_prob,
    ),
    "converge": (
        _COMMON
        + [
            Opt("alpha", float, 1.0),
            Opt("b", _floats, [1.0, 1.0]),
            Opt("p", _floats, None),
            Opt("x0", _floats, None),
            Opt("betas", _floats, [0.9, 0.99], "comma list of beta values"),
            Opt("times", _floats, [1.0], "checkpoint times in rescaled units"),
            Opt("replicas", int, 500),
            Opt("dt", float, 1e-3),
        ],
        _run_converge,
    ),
    "stationary-test": (
        _COMMON
        + [
            Opt("alpha", float, 1.0),
            Opt("b", _floats, [1.0, 1.0]),
            Opt("p", _floats, None),
            Opt("beta", float, 0.99),
            Opt("t-long", float, 10.0),
            Opt("replicas", int, 1000),
        ],
        _run_stationary_test,
    ),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rpwf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (opts, _) in _COMMANDS.items():
        p = sub.add_parser(name)
        for opt in opts:
            p.add_argument(f"--{opt.name}", dest=opt.dest, type=str, default=None, help=opt.help)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    opts, runner = _COMMANDS[ns.command]
    try:
        resolved = _resolve(opts, ns)
        raw = resolved.pop("_raw")
        outputs = runner(resolved)
    except ValidationError as exc:
        print(f"error: --{exc.field.lower()}: {exc.reason}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    manifest = rio.build_manifest(ns.command, raw, resolved["seed"], outputs)
    data = rio.canonical_json(manifest)
    try:
        rio.write_bytes(outputs[0]["path"] + ".manifest.json", data)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(data.decode())
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
