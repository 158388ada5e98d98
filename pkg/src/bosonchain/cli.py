"""Command-line front end.

Exit codes: 0 success, 1 config or I/O error, 2 a physics check failed
(for example a perfect-transfer configuration below the fidelity bound).
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import BasisSizeError, ConfigError
from .evolve import single_particle_oracle_error
from .fock import FixedTotal, MaxTotal, enumerate_basis
from .functions import function_from_config
from .interference import PathLattice, run_interference
from .model import ChainSpec, Displacement, Squeezing
from .tables import emit_table, to_jsonable
from .transfer import minimal_cap, run_dressed_transfer, run_repulsion_transfer, run_transfer

THREADS_ENV = "BOSONCHAIN_THREADS"

DEFAULT_TOLERANCES = {"fidelity": 1e-9, "dressed_fidelity": 1e-6, "interference": 1e-9, "oracle": 1e-9}


@dataclass
class OracleReport:
    N: int
    J: float
    times: int
    max_error: float

    def to_dict(self):
        return {"N": self.N, "J": self.J, "times": self.times, "max_error": self.max_error}


def load_schema():
    return json.loads(resources.files("bosonchain").joinpath("config.schema.json").read_text())


def _pointer(path):
    return "/" + "/".join(str(p) for p in path)


def validate_config(cfg):
    """Raise :class:`ConfigError` with a JSON pointer for the first schema violation."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigError(err.message, _pointer(err.absolute_path))
    if cfg["experiment"] == "sweep":
        base = cfg["sweep"]["experiment"]
        needed = {"transfer": ["chain", "function"], "repulsion": ["chain", "function"],
                  "dressed": ["chain", "function", "dressing"], "interference": ["paths"]}[base]
        for key in needed:
            if key not in cfg:
                raise ConfigError(f"sweeping '{base}' requires '{key}'", f"/{key}")
        param = cfg["sweep"]["parameter"]
        allowed = {"transfer": {"U", "J", "epsilon", "N"}, "repulsion": {"U", "J", "epsilon", "N"},
                   "dressed": {"J", "epsilon", "N", "beta", "xi"}, "interference": {"J", "path"}}[base]
        if param not in allowed:
            raise ConfigError(f"parameter '{param}' cannot be swept for '{base}'", "/sweep/parameter")
        sweep = cfg["sweep"]
        values = sweep.get("values") or [sweep["start"], sweep["stop"]]
        if not np.all(np.isfinite(values)):
            raise ConfigError("sweep range must be finite", "/sweep")
    return cfg


def _complex(value):
    if isinstance(value, list):
        return complex(value[0], value[1])
    return complex(value)


def _chain(cfg):
    c = cfg["chain"]
    U = c.get("U", 0.0)
    if "N" in c:
        return ChainSpec.engineered(c["N"], J=c.get("J", 1.0), epsilon=c.get("epsilon", 0.0), U=U)
    try:
        return ChainSpec(c["couplings"], c["onsite"], U=U, J=c.get("J", 1.0), epsilon=c.get("epsilon", 0.0))
    except ValueError as exc:
        raise ConfigError(str(exc), "/chain") from exc


def _function(cfg):
    try:
        return function_from_config(cfg["function"])
    except ValueError as exc:
        raise ConfigError(str(exc), "/function") from exc


def _medium(cfg, N):
    m = cfg.get("medium")
    if m is None:
        return None, None
    if "random" in m:
        spec = m["random"]
        lo, hi = spec.get("sites", [1, N])
        if not 1 <= lo <= hi <= N:
            raise ConfigError(f"sites must lie within 1..{N}", "/medium/random/sites")
        basis = enumerate_basis(N, FixedTotal(spec["bosons"]))
        outside = np.ones(N, dtype=bool)
        outside[lo - 1:hi] = False
        allowed = ~np.any(basis.states[:, outside] > 0, axis=1)
        rng = np.random.default_rng(spec.get("seed", 0))
        vec = np.zeros(basis.dim, dtype=complex)
        k = int(allowed.sum())
        vec[allowed] = rng.normal(size=k) + 1j * rng.normal(size=k)
        return vec / np.linalg.norm(vec), basis
    states, amps = m["states"], m["amplitudes"]
    if len(states) != len(amps):
        raise ConfigError("one amplitude per medium state", "/medium/amplitudes")
    if any(len(s) != N for s in states):
        raise ConfigError(f"medium states need {N} occupations", "/medium/states")
    totals = {sum(s) for s in states}
    top = max(totals)
    basis = enumerate_basis(N, MaxTotal(top))
    vec = np.zeros(basis.dim, dtype=complex)
    for s, a in zip(states, amps):
        vec[basis.index(s)] += _complex(a)
    return vec, basis


def _dressing(cfg):
    d = cfg["dressing"]
    if d["kind"] == "displacement":
        return Displacement(_complex(d["beta"]))
    return Squeezing(d["xi"])


def _tol(cfg, key):
    return cfg.get("tolerances", {}).get(key, DEFAULT_TOLERANCES[key])


def run_single(cfg):
    """Run one non-sweep experiment; return ``(reports, failed, key_numbers)``."""
    kind = cfg["experiment"]
    if kind in ("transfer", "repulsion"):
        spec, f = _chain(cfg), _function(cfg)
        if kind == "transfer":
            medium, medium_basis = _medium(cfg, spec.site_count)
            report = run_transfer(spec, f, medium, medium_basis)
        else:
            report = run_repulsion_transfer(spec, f)
        tol = _tol(cfg, "fidelity")
        return [report], not report.passed(tol), {"fidelity": report.fidelity, "signature": report.signature}
    if kind == "dressed":
        spec, f, dressing = _chain(cfg), _function(cfg), _dressing(cfg)
        max_loss = cfg.get("max_loss", 1e-7)
        n_max = cfg.get("n_max", "auto")
        if n_max == "auto":
            n_max = minimal_cap(f, dressing, spec.site_count, max_loss)
        report = run_dressed_transfer(spec, dressing, f, n_max, max_loss=max_loss)
        tol = cfg.get("tolerances", {}).get("fidelity", DEFAULT_TOLERANCES["dressed_fidelity"])
        return [report], not report.passed(tol), {
            "fidelity": report.fidelity, "truncation_loss": report.truncation_loss, "n_max": n_max}
    if kind == "interference":
        amps = cfg.get("amplitudes")
        if amps is not None:
            if len(amps) != len(cfg["paths"]):
                raise ConfigError("one amplitude per path", "/amplitudes")
            amps = [_complex(a) for a in amps]
        lattice = PathLattice.from_lengths(cfg["paths"], J=cfg.get("J", 1.0), amplitudes=amps)
        profile = run_interference(lattice, cfg.get("time"))
        failed = False
        if cfg.get("time") is None:
            failed = abs(profile.interference_factor - profile.closed_form_factor) > _tol(cfg, "interference")
        return [profile], failed, {"interference_factor": profile.interference_factor,
                                   "closed_form_factor": profile.closed_form_factor}
    if kind == "oracle-check":
        o = cfg.get("oracle", {})
        Ns = o.get("N", list(range(2, 13)))
        J = o.get("J", 1.0)
        rng = np.random.default_rng(o.get("seed", 0))
        n_times = o.get("times", 20)
        t_max = o.get("t_max", 2 * np.pi / J)
        reports = []
        for N in Ns:
            times = rng.uniform(0, t_max, size=n_times)
            reports.append(OracleReport(N, J, n_times, single_particle_oracle_error(N, J, times)))
        worst = max(r.max_error for r in reports)
        return reports, worst > _tol(cfg, "oracle"), {"max_error": worst}
    raise ConfigError(f"unknown experiment {kind!r}", "/experiment")


def _sweep_values(sweep):
    if "values" in sweep:
        return [float(v) for v in sweep["values"]]
    return [float(v) for v in np.linspace(sweep["start"], sweep["stop"], sweep["steps"])]


def _point_config(cfg, param, value):
    point = copy.deepcopy(cfg)
    point["experiment"] = cfg["sweep"]["experiment"]
    point.pop("sweep")
    if param in ("U", "J", "epsilon", "N"):
        if point["experiment"] == "interference":
            point["J"] = value
        else:
            if param == "N":
                value = int(round(value))
            point["chain"][param] = value
    elif param == "beta":
        point["dressing"]["beta"] = value
    elif param == "xi":
        point["dressing"]["xi"] = value
    elif param == "path":
        point["paths"] = list(point["paths"][:-1]) + [int(round(value))]
    return point


def run_sweep(cfg, threads=1):
    param = cfg["sweep"]["parameter"]
    points = [_point_config(cfg, param, v) for v in _sweep_values(cfg["sweep"])]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run_single, points))
    reports = [r for rs, _, _ in results for r in rs]
    failed = any(f for _, f, _ in results)
    return reports, failed, {"points": len(points), "failed_points": sum(f for _, f, _ in results)}


def _thread_count(requested):
    cap = os.environ.get(THREADS_ENV)
    threads = requested or 1
    if cap:
        try:
            threads = min(threads, max(1, int(cap)))
        except ValueError:
            pass
    return threads


def execute(cfg, out_dir=None, fmt=None, threads=1):
    """Validate and run ``cfg``; return ``(exit_code, summary)``."""
    validate_config(cfg)
    start = time.perf_counter()
    output = cfg.get("output", {})
    fmt = fmt or output.get("format", "json")
    out_dir = Path(out_dir or output.get("path", "results"))
    if cfg["experiment"] == "sweep":
        reports, failed, numbers = run_sweep(cfg, _thread_count(threads))
    else:
        reports, failed, numbers = run_single(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{cfg['experiment']}.{fmt}"
    emit_table(reports, fmt, path)
    summary = {
        "experiment": cfg["experiment"],
        "status": "physics_check_failed" if failed else "ok",
        "results": to_jsonable(numbers),
        "files": [str(path)],
        "wall_time_s": time.perf_counter() - start,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    return (2 if failed else 0), summary


def _read_config(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def main(argv=None):
    parser = argparse.ArgumentParser(prog="bosonchain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("config")
    run_p.add_argument("--out", help="output directory (overrides output.path)")
    run_p.add_argument("--format", choices=["csv", "json"], help="table format (overrides output.format)")
    run_p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    val_p = sub.add_parser("validate", help="check a config against the schema")
    val_p.add_argument("config")
    sub.add_parser("version", help="print the package version")
    args = parser.parse_args(argv)

    if args.command == "version":
        print(__version__)
        return 0
    try:
        cfg = _read_config(args.config)
        if args.command == "validate":
            validate_config(cfg)
            print(json.dumps({"config": args.config, "valid": True}))
            return 0
        code, summary = execute(cfg, args.out, args.format, args.threads)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "pointer": exc.pointer or "/", "message": str(exc)}))
        return 1
    except BasisSizeError as exc:
        print(json.dumps({"error": "basis_size", "dimension": exc.dim, "cap": exc.cap, "message": str(exc)}))
        return 1
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    print(json.dumps(summary))
    return code


if __name__ == "__main__":
    sys.exit(main())
