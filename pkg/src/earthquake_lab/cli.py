"""Command-line entry point: ``python -m earthquake_lab COMMAND [options]``.

Each command reads a JSON payload (``--input PATH``, or standard input, or
nothing for all-default commands), validates it completely, computes, and
only then writes ``OUT/COMMAND.json`` (plus ``COMMAND.csv`` for tabular
reports) and ``OUT/COMMAND.metadata.json`` (timestamps, argv, timings).
Result files depend only on the payload, the config and the seed.

Exit codes: 0 success, 1 invalid input (error JSON on stderr), 2 numerical
failure (error JSON with diagnostics on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .cocycles import coboundary_reduce, translation_cocycle, xi_push_check
from .config import Config, config_to_dict, load_config, set_tolerances
from .curves import WeightedMulticurve, fills, geometric_intersection, intersection_matrix
from .earthquake import quake
from .errors import EarthquakeLabError, NumericalFailure, ValidationError
from .estimates import main_estimate_sweep, recurrence_report, triangle_theta
from .fixed_point import continuation_solve, direct_solve, newton_solve
from .selftest import run_selftest
from .teichmueller import (PANTS_CURVES, FNCoords, TeichPoint, _check_lengths, curve_length, fn_to_holonomy,
                           lamination_length)
from .words import as_curve

NO_PAYLOAD = {"selftest"}
COMMANDS = ("surface", "length", "intersect", "quake", "fixpoint", "cocycle", "theta",
            "sweep-estimate", "recurrence", "selftest")


# -- payload parsing --------------------------------------------------------------------

def _require(payload: dict, key: str):
    if key not in payload:
        raise ValidationError(f"payload is missing {key!r}")
    return payload[key]


def _number(payload, key, default=None, low=None):
    value = payload.get(key, default)
    if value is None:
        raise ValidationError(f"payload is missing {key!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"{key!r} must be a finite number")
    if low is not None and value < low:
        raise ValidationError(f"{key!r} must be >= {low}")
    return float(value)


def _integer(payload, key, default, low=1):
    value = payload.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < low:
        raise ValidationError(f"{key!r} must be an integer >= {low}")
    return value


def parse_point(obj):
    """A point given as {"fn": {...}} / {"lengths", "twists"} or as {"matrices": ...}."""
    if not isinstance(obj, dict):
        raise ValidationError("a point must be a JSON object")
    if "fn" in obj:
        obj = obj["fn"]
    if "lengths" in obj:
        return fn_to_holonomy(FNCoords.from_dict(obj))
    if "matrices" in obj:
        try:
            return TeichPoint.from_dict(obj)
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"bad holonomy payload: {exc}") from exc
    raise ValidationError("point needs 'fn', 'lengths'/'twists' or 'matrices'")


def parse_multicurve(obj, validate: bool = True):
    if isinstance(obj, str):
        obj = [{"word": obj, "weight": 1.0}]
    if not isinstance(obj, list):
        raise ValidationError("a multicurve is a list of {word, weight} objects")
    lam = WeightedMulticurve.from_list(obj)
    return lam.validate() if validate else lam


def _side(payload, default="right", choices=("left", "right")):
    side = payload.get("side", default)
    if side not in choices:
        raise ValidationError(f"side must be one of {choices}")
    return side


# -- commands ---------------------------------------------------------------------------
# Each command is (prepare, run): prepare validates the payload into arguments,
# run computes and returns (result dict, csv rows or None).

def _prep_surface(p, cfg):
    c = FNCoords.from_dict(p.get("fn", p))
    _check_lengths(c)
    return {"fn": c}


def _run_surface(a, cfg):
    u = fn_to_holonomy(a["fn"])
    return {"fn": a["fn"].to_dict(), "point": u.to_dict(), "relator_residual": u.relator_residual(),
            "pants_lengths": [curve_length(u, c) for c in PANTS_CURVES]}, None


def _prep_length(p, cfg):
    u = parse_point(_require(p, "point"))
    curves = [as_curve(c) for c in p.get("curves", [])]
    lam = parse_multicurve(p["lambda"]) if "lambda" in p else None
    if not curves and lam is None:
        raise ValidationError("payload needs 'curves' or 'lambda'")
    return {"u": u, "curves": curves, "lam": lam}


def _run_length(a, cfg):
    out = {"lengths": {str(c): curve_length(a["u"], c) for c in a["curves"]}}
    if a["lam"] is not None:
        out["lambda_length"] = lamination_length(a["u"], a["lam"])
    return out, [["curve", "length"]] + [[k, v] for k, v in out["lengths"].items()]


def _prep_intersect(p, cfg):
    if "a" in p:
        return {"a": as_curve(_require(p, "a")), "b": as_curve(_require(p, "b"))}
    lam = parse_multicurve(_require(p, "lambda"))
    mu = parse_multicurve(_require(p, "mu"))
    return {"lam": lam, "mu": mu, "fills": bool(p.get("fills", False)),
            "scan_length": _integer(p, "scan_length", 3)}


def _run_intersect(a, cfg):
    if "a" in a:
        n = geometric_intersection(a["a"], a["b"], depth=cfg.depth, max_depth=cfg.max_depth)
        return {"a": str(a["a"]), "b": str(a["b"]), "intersection": n}, None
    M = intersection_matrix(a["lam"], a["mu"], depth=cfg.depth, max_depth=cfg.max_depth)
    out = {"matrix": M.tolist(), "total": float(a["lam"].weights @ M @ a["mu"].weights)}
    if a["fills"]:
        out["fills"] = fills(a["lam"], a["mu"], scan_length=a["scan_length"], depth=cfg.depth).to_dict()
    return out, None


def _prep_quake(p, cfg):
    return {"u": parse_point(_require(p, "point")), "lam": parse_multicurve(_require(p, "lambda")),
            "side": _side(p), "t": _number(p, "t", 1.0, low=0.0)}


def _run_quake(a, cfg):
    v = quake(a["u"], a["lam"], a["side"], a["t"], depth=cfg.depth, max_depth=cfg.max_depth,
              x0=cfg.base_point)
    return {"point": v.to_dict(), "fn": v.fn.to_dict(), "relator_residual": v.relator_residual()}, None


def _prep_fixpoint(p, cfg):
    method = p.get("method", "continuation")
    if method not in ("continuation", "direct", "newton"):
        raise ValidationError("method must be continuation, direct or newton")
    init = FNCoords.from_dict(p["init"]) if "init" in p else None
    return {"lam": parse_multicurve(_require(p, "lambda")), "mu": parse_multicurve(_require(p, "mu")),
            "t": _number(p, "t", 1.0, low=1e-12), "method": method,
            "seeds": _integer(p, "seeds", cfg.multistart), "steps": _integer(p, "steps", cfg.t_steps),
            "init": init}


def _run_fixpoint(a, cfg):
    lam, mu, t = a["lam"], a["mu"], a["t"]
    if a["method"] == "continuation":
        r = continuation_solve(lam, mu, t, a["steps"], init=a["init"], depth=cfg.depth)
    elif a["method"] == "newton":
        r = newton_solve(lam, mu, t, init=a["init"], depth=cfg.depth)
    else:
        r = direct_solve(lam.scaled(t), mu.scaled(t), init=a["init"], seeds=a["seeds"], seed=cfg.seed,
                         depth=cfg.depth)
    rows = [["t", "l1", "l2", "l3", "tau1", "tau2", "tau3"]]
    rows += [[tt, *map(float, v)] for tt, v in zip(r.t_path, r.path)]
    return r.to_dict(), rows


def _prep_cocycle(p, cfg):
    return {"u": parse_point(_require(p, "point")), "lam": parse_multicurve(_require(p, "lambda")),
            "side": _side(p, "+", ("+", "-")), "xi_check": bool(p.get("xi_check", False)),
            "t_step": _number(p, "t_step", 1e-4, low=1e-12)}


def _run_cocycle(a, cfg):
    tau = translation_cocycle(a["u"], a["lam"], cfg.base_point, a["side"], cfg.depth, cfg.max_depth)
    reduced, v = coboundary_reduce(tau)
    out = {"side": a["side"], "cocycle": tau.to_dict(), "reduced": reduced.to_dict(),
           "coboundary_vector": list(map(float, v)), "relator_residual": tau.relator_residual(),
           "frame": np.asarray(tau.frame).tolist()}
    if a["xi_check"]:
        out["xi_push"] = xi_push_check(a["u"], a["lam"], a["t_step"], cfg.base_point, cfg.depth).to_dict()
    rows = [["generator", "x1", "x2", "x3"]] + reduced.csv_rows()
    return out, rows


def _prep_theta(p, cfg):
    k = p.get("kappa", 1.0)
    ks = k if isinstance(k, list) else [k]
    return {"kappa": [_number({"kappa": x}, "kappa", low=0.0) for x in ks]}


def _run_theta(a, cfg):
    vals = [triangle_theta(k) for k in a["kappa"]]
    return {"kappa": a["kappa"], "theta": vals}, [["kappa", "theta"]] + [list(r) for r in zip(a["kappa"], vals)]


def _prep_sweep(p, cfg):
    lo, hi = p.get("weight_range", [0.2, 1.0])
    lo = _number({"lo": lo}, "lo", low=1e-9)
    hi = _number({"hi": hi}, "hi", low=lo)
    return {"n": _integer(p, "n_samples", 50), "weight_range": (lo, hi)}


def _run_sweep(a, cfg):
    r = main_estimate_sweep(a["n"], a["weight_range"], cfg.seed)
    return r.to_dict(), r.csv_rows()


def _prep_recurrence(p, cfg):
    return {"u": parse_point(_require(p, "point")), "c": as_curve(_require(p, "curve")),
            "n": _integer(p, "n_samples", 200)}


def _run_recurrence(a, cfg):
    r = recurrence_report(a["u"], a["c"], a["n"], cfg.depth, cfg.max_depth)
    return r.to_dict(), r.csv_rows()


def _prep_selftest(p, cfg):
    return {}


def _run_selftest(a, cfg):
    report = run_selftest(cfg.seed, echo=lambda line: print(line, file=sys.stderr))
    return report, [["name", "passed", "value", "threshold"]] + \
        [[c["name"], c["passed"], c["value"], c["threshold"]] for c in report["checks"]]


@dataclass(frozen=True)
class Command:
    prepare: object
    run: object


REGISTRY = {
    "surface": Command(_prep_surface, _run_surface),
    "length": Command(_prep_length, _run_length),
    "intersect": Command(_prep_intersect, _run_intersect),
    "quake": Command(_prep_quake, _run_quake),
    "fixpoint": Command(_prep_fixpoint, _run_fixpoint),
    "cocycle": Command(_prep_cocycle, _run_cocycle),
    "theta": Command(_prep_theta, _run_theta),
    "sweep-estimate": Command(_prep_sweep, _run_sweep),
    "recurrence": Command(_prep_recurrence, _run_recurrence),
    "selftest": Command(_prep_selftest, _run_selftest),
}


# -- plumbing -----------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors are validation errors: JSON on stderr and exit 1 (argparse uses 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(json.dumps({"error": "validation", "message": message}), file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="earthquake-lab", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", "-i", help="JSON payload file (default: standard input if piped)")
    ap.add_argument("--config", help="key = value config file")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--depth", type=int)
    ap.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    ap.add_argument("--format", choices=("json", "csv"), default="json", help="what to print on stdout")
    return ap


def resolve_config(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.depth is not None:
        changes["depth"] = args.depth
        changes["max_depth"] = max(cfg.max_depth, args.depth)
    if args.tol:
        pairs = {}
        for item in args.tol:
            if "=" not in item:
                raise ValidationError(f"--tol expects NAME=VALUE, got {item!r}")
            name, value = item.split("=", 1)
            try:
                pairs[name.strip()] = float(value)
            except ValueError as exc:
                raise ValidationError(f"--tol {name}: not a number") from exc
        changes["tolerances"] = cfg.tolerances.updated(**pairs)
    if changes:
        try:
            cfg = replace(cfg, **changes)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(str(exc)) from exc
    return cfg


def read_payload(path, stdin=None) -> dict:
    """JSON object from ``path`` ("-" for standard input) or from piped standard input."""
    stdin = sys.stdin if stdin is None else stdin
    if path == "-":
        text = stdin.read()
    elif path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read input: {exc}") from exc
    elif stdin is not None and not stdin.isatty():
        text = stdin.read()
    else:
        text = ""
    if not text.strip():
        return {}
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"input is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValidationError("input JSON must be an object")
    return payload


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def run(command: str, cfg: Config, payload: dict, argv=None) -> tuple:
    """Validate, compute and write artifacts; returns (result, csv rows, output paths)."""
    cmd = REGISTRY[command]
    old = set_tolerances(cfg.tolerances)
    try:
        args = cmd.prepare(payload, cfg)
        started = time.time()
        result, rows = cmd.run(args, cfg)
        elapsed = time.time() - started
    finally:
        set_tolerances(old)
    settings = config_to_dict(cfg)
    settings.pop("output_dir")      # where results go is not part of what they depend on
    envelope = {"command": command, "seed": cfg.seed, "config": settings, "result": result}
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / f"{command}.json", "metadata": out / f"{command}.metadata.json"}
    paths["json"].write_text(dumps(envelope))
    if rows is not None:
        paths["csv"] = out / f"{command}.csv"
        paths["csv"].write_text(csv_text(rows))
    meta = {"command": command, "argv": list(argv or []), "output_dir": str(out), "seconds": elapsed,
            "finished_utc": datetime.now(timezone.utc).isoformat()}
    paths["metadata"].write_text(dumps(meta))
    return envelope, rows, paths


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        payload = {} if ns.command in NO_PAYLOAD else read_payload(ns.input)
        envelope, rows, _ = run(ns.command, cfg, payload, argv)
    except NumericalFailure as exc:
        print(json.dumps(exc.to_dict(), default=_jsonable), file=sys.stderr)
        return 2
    except (EarthquakeLabError, ValueError) as exc:
        err = exc.to_dict() if isinstance(exc, EarthquakeLabError) else {"error": "validation", "message": str(exc)}
        print(json.dumps(err, default=_jsonable), file=sys.stderr)
        return 1
    if ns.format == "csv" and rows is not None:
        sys.stdout.write(csv_text(rows))
    else:
        sys.stdout.write(dumps(envelope))
    if ns.command == "selftest":
        return 0 if envelope["result"]["passed"] else 1
    return 0


__all__ = ["main", "run", "build_parser", "resolve_config", "read_payload", "parse_point",
           "parse_multicurve", "COMMANDS", "REGISTRY", "cfgmod"]
