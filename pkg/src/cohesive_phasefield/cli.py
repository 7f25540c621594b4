"""Command-line front end.

A single JSON config holds a ``law`` block, an optional ``out`` directory
and one parameter block per command (the ``law`` command reads its block
from ``tabulate``).  Flags override config values.

Exit codes: 0 success, 1 malformed config, 2 validation failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import cohesive_law as cl
from . import experiments as ex
from . import profile_ode as po
from . import sharp_model as sm
from .critical_point_solver import ShootingProblem, build_pair, shoot
from .errors import NumericalFailure
from .material_law import law_from_config, regularize, validate_assumptions

__all__ = ["CONFIG_SCHEMA", "run", "main"]

COMMANDS = ("validate", "law", "ode", "critical", "sweep", "sharp", "figures")
EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int = {"type": "integer", "minimum": 1}


def _block(**props):
    return {"type": "object", "properties": props, "additionalProperties": False}


CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "out": {"type": "string"},
        "law": _block(
            family={"enum": ["prototype_q", "prototype_p"]}, sigma_c=_pos, q=_num, p=_num
        ),
        "validate": _block(grid_size=_int, tol=_pos),
        "tabulate": _block(n=_int),
        "ode": _block(alpha=_pos, m=_num, t_max=_pos, tol=_pos, n_samples=_int),
        "critical": _block(eps=_pos, c=_pos, L=_pos, tol=_pos, n_points=_int),
        "sweep": _block(
            regime={"enum": ["prefractured", "fractured", "elastic"]},
            eps_list={"type": "array", "items": _pos, "minItems": 1},
            L=_pos, c0=_pos, a=_pos, exponent=_pos, tol=_pos, n_points=_int, workers=_int,
        ),
        "sharp": _block(a=_pos, L=_pos, kmax=_int),
        "figures": _block(kinds={"type": "array", "items": {"enum": list(ex.FIGURE_KINDS)}}),
    },
}

DEFAULTS = {
    "law": {"family": "prototype_q", "sigma_c": 1.0},
    "validate": {"grid_size": 1000, "tol": 1e-9},
    "tabulate": {"n": 64},
    "ode": {"alpha": 0.2, "m": 0.3, "t_max": 50.0, "tol": 1e-10, "n_samples": 1001},
    "critical": {"eps": 1e-3, "c": 0.3, "L": 1.0, "tol": 1e-10, "n_points": 2000},
    "sweep": {"regime": "prefractured", "eps_list": list(ex.DEFAULT_EPS), "L": 1.0,
              "c0": 0.3, "a": 0.4, "exponent": 0.25, "tol": 1e-10, "n_points": 2000,
              "workers": 1},
    "sharp": {"a": 0.836255689601493, "L": 1.0, "kmax": 1},
    "figures": {"kinds": list(ex.FIGURE_KINDS)},
}

# flag -> list of (block, key) it overrides
FLAG_TARGETS = {
    "law_family": [("law", "family")],
    "sigma_c": [("law", "sigma_c")],
    "q": [("law", "q")],
    "p": [("law", "p")],
    "eps": [("critical", "eps")],
    "c": [("critical", "c"), ("sweep", "c0")],
    "alpha": [("ode", "alpha")],
    "m": [("ode", "m")],
    "a": [("sharp", "a"), ("sweep", "a")],
    "L": [("critical", "L"), ("sweep", "L"), ("sharp", "L")],
    "kmax": [("sharp", "kmax")],
    "regime": [("sweep", "regime")],
    "tol": [("validate", "tol"), ("ode", "tol"), ("critical", "tol"), ("sweep", "tol")],
}


class ConfigError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cohesive-pf", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path)
    ap.add_argument("--law", dest="law_family", choices=["prototype_q", "prototype_p"])
    ap.add_argument("--sigma-c", dest="sigma_c", type=float)
    for name in ("q", "p", "eps", "c", "alpha", "m", "a", "L", "tol"):
        ap.add_argument(f"--{name}", dest=name, type=float)
    ap.add_argument("--kmax", type=int)
    ap.add_argument("--regime", choices=["prefractured", "fractured", "elastic"])
    return ap


def _schema_path(err: jsonschema.ValidationError) -> str:
    path = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"{path}: {err.message}"


def load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"<file>: {exc}") from exc
    errors = sorted(jsonschema.Draft7Validator(CONFIG_SCHEMA).iter_errors(cfg),
                    key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("; ".join(_schema_path(e) for e in errors))
    return cfg


def resolve(args: argparse.Namespace, cfg: dict) -> dict:
    """Defaults, then config blocks, then flags."""
    merged = {k: dict(v) for k, v in DEFAULTS.items()}
    for key, val in cfg.items():
        if isinstance(val, dict):
            merged[key].update(val)
        else:
            merged[key] = val
    for flag, targets in FLAG_TARGETS.items():
        val = getattr(args, flag)
        if val is not None:
            for block, key in targets:
                merged[block][key] = val
    if args.out is not None:
        merged["out"] = str(args.out)
    merged.setdefault("out", ".")
    return merged


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _cmd_validate(law, cfg, out: Path) -> int:
    blk = cfg["validate"]
    rep = validate_assumptions(law, grid_size=blk["grid_size"], tol=blk["tol"])
    _write_json(out / "validation.json", rep.to_dict())
    if not rep.passed:
        print(f"validation failed: {', '.join(rep.failed)}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_law(law, cfg, out: Path) -> int:
    tab = cl.tabulate(law, n=cfg["tabulate"]["n"])
    sf = cl.s_frac(law)
    rows = [tab.m_grid, tab.s_values, tab.g_values, tab.gprime_values]
    data = np.column_stack(rows)
    if math.isfinite(sf):
        data = np.vstack([data, [0.0, sf, 1.0, 0.0]])
    np.savetxt(out / "law_table.csv", data, delimiter=",", header="m,s,g,gprime",
               comments="", fmt="%.17g")
    fit = cl.asymptotic_exponent(law)
    summary = {
        "law": law.to_config(),
        "s_frac": sf,
        "s_frac_extrapolated": cl.s_frac_extrapolated(law),
        "asymptotic_fit": fit.to_dict(),
    }
    _write_json(out / "law_summary.json", summary)
    return EXIT_OK


def _cmd_ode(law, cfg, out: Path) -> int:
    blk = cfg["ode"]
    params = po.OdeParams(law, blk["alpha"], blk["m"])
    sol = po.solve_ivp(params, t_max=blk["t_max"], tol=blk["tol"], n_samples=blk["n_samples"])
    sol.to_csv(out / "trajectory.csv")
    sol.mirrored().phase_csv(out / "portrait.csv")
    res = sol.first_integral_residual()
    summary = {
        "law": law.to_config(),
        "alpha": params.alpha,
        "m": params.m,
        "classification": sol.classification.value,
        "z_alpha": sol.z_alpha,
        "t0": sol.t0,
        "t1": sol.t1,
        "t2": sol.t2,
        "M": sol.M,
        "first_integral_max": float(res.max()) if res.size else 0.0,
        "message": sol.message,
    }
    _write_json(out / "ode_summary.json", summary)
    return EXIT_OK


def _cmd_critical(law, cfg, out: Path) -> int:
    blk = cfg["critical"]
    prob = ShootingProblem(regularize(law, blk["eps"]), blk["c"], blk["L"])
    pair = build_pair(prob, shoot(prob, tol=blk["tol"]), n_points=blk["n_points"])
    pair.to_csv(out / "pair.csv")
    _write_json(out / "diagnostics.json", pair.diagnostics())
    return EXIT_OK


def _cmd_sweep(law, cfg, out: Path) -> int:
    blk = dict(cfg["sweep"])
    conf = ex.SweepConfig(law=law, **{k: (tuple(v) if k == "eps_list" else v)
                                      for k, v in blk.items()})
    res = ex.run_sweep(conf)
    if conf.regime == "elastic":
        _write_json(out / "sweep_elastic.json", res)
        return EXIT_OK
    res.to_csv(out / f"sweep_{conf.regime}.csv")
    (out / f"sweep_{conf.regime}_summary.json").write_text(res.summary_json() + "\n")
    for name, a in res.assertions.items():
        print(f"{name}: {'pass' if a['passed'] else 'FAIL'}")
    return EXIT_OK


def _cmd_sharp(law, cfg, out: Path) -> int:
    blk = cfg["sharp"]
    pts = sm.enumerate_critical_points(law, blk["a"], blk["L"], blk["kmax"])
    files = []
    for i, p in enumerate(pts):
        name = f"critical_point_{i}_{p.kind.value.lower()}_k{p.k}.csv"
        p.u.to_csv(out / name)
        files.append(name)
    data = [dict(p.to_dict(), csv=f) for p, f in zip(pts, files)]
    _write_json(out / "critical_points.json", data)
    return EXIT_OK


def _cmd_figures(law, cfg, out: Path) -> int:
    written = []
    for kind in cfg["figures"]["kinds"]:
        written += [p.name for p in ex.figure_data(kind, law, out)]
    written.append(ex.write_plot_script(out).name)
    _write_json(out / "figures_manifest.json", sorted(written))
    return EXIT_OK


HANDLERS = {
    "validate": _cmd_validate,
    "law": _cmd_law,
    "ode": _cmd_ode,
    "critical": _cmd_critical,
    "sweep": _cmd_sweep,
    "sharp": _cmd_sharp,
    "figures": _cmd_figures,
}


def run(argv=None) -> int:
    """Parse ``argv``, dispatch and return the exit code."""
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args, load_config(args.config))
    except ConfigError as exc:
        print(f"malformed config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    try:
        law = law_from_config(cfg["law"])
        return HANDLERS[args.command](law, cfg, out)
    except NumericalFailure as exc:
        _write_json(out / "failure.json", {"command": args.command, "error": str(exc)})
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run())
