"""Command-line front end.

Every subcommand takes an optional JSON config (``--config``) whose keys
are the long flag names with dashes replaced by underscores; flags given on
the command line override it. Rows are computed by a thread pool and
sorted by their sweep key before output, so results do not depend on the
worker count.

Exit codes: 0 success, 2 invalid config, 3 numerical or I/O failure,
4 unstable truncation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import SmilanskyError, TruncationUnstable

SCHEMA = "smilansky-rows/1"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_UNSTABLE = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


def tool_version() -> str:
    from importlib.metadata import PackageNotFoundError, version
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------- parameters

def _grid(value, name):
    if isinstance(value, dict):
        if set(value) != {"linspace"}:
            raise ConfigError(f"{name}: a grid object must be {{'linspace': [lo, hi, n]}}")
        lo, hi, n = value["linspace"]
        value = np.linspace(float(lo), float(hi), int(n)).tolist()
    if isinstance(value, (int, float)):
        value = [value]
    out = [float(v) for v in value]
    if not out:
        raise ConfigError(f"{name}: grid is empty")
    if any(not math.isfinite(v) for v in out):
        raise ConfigError(f"{name}: grid has non-finite entries")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"{name}: grid must be strictly increasing")
    return out


def _complex_grid(value, name):
    if isinstance(value, (str, int, float)):
        value = [value]
    # "a,b" inside one string lets values that start with '-' follow --Lambda=
    value = [p for v in value for p in (v.split(",") if isinstance(v, str) else [v])]
    out = []
    for v in value:
        if isinstance(v, (list, tuple)):
            c = complex(float(v[0]), float(v[1]))
        else:
            try:
                c = complex(str(v).replace(" ", "").replace("i", "j"))
            except ValueError as exc:
                raise ConfigError(f"{name}: cannot read {v!r} as a complex number") from exc
        out.append(c)
    if not out:
        raise ConfigError(f"{name}: grid is empty")
    keys = [(c.real, c.imag) for c in out]
    if any(b <= a for a, b in zip(keys, keys[1:])):
        raise ConfigError(f"{name}: grid must be strictly increasing in (real, imag)")
    return out


def _positive(value, name):
    v = float(value)
    if not v > 0 or not math.isfinite(v):
        raise ConfigError(f"{name} must be positive and finite")
    return v


def _pos_int(value, name, lo=1):
    if isinstance(value, bool) or int(value) != value or int(value) < lo:
        raise ConfigError(f"{name} must be an integer >= {lo}")
    return int(value)


def _choice(options):
    def conv(value, name):
        if value not in options:
            raise ConfigError(f"{name} must be one of {sorted(options)}")
        return value
    return conv


def _ladder(value, name):
    out = [_positive(v, name) for v in value]
    if len(out) < 2 or any(b >= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"{name} must have >= 2 strictly decreasing rungs")
    if out[-1] < 1e-8:
        raise ConfigError(f"{name}: smallest rung must be >= 1e-8")
    return out


def _str_list(options):
    def conv(value, name):
        value = [value] if isinstance(value, str) else list(value)
        if not value or any(v not in options for v in value):
            raise ConfigError(f"{name} must be a non-empty subset of {sorted(options)}")
        return sorted(set(value))
    return conv


@dataclass(frozen=True)
class Param:
    name: str
    convert: object
    default: object = None
    help: str = ""
    nargs: str | None = None
    cli_type: object = float


COMMON = [
    Param("output", lambda v, n: None if v is None else str(v), None, "output path (stdout if omitted)",
          cli_type=str),
    Param("format", _choice({"csv", "json"}), "csv", "csv or json", cli_type=str),
    Param("threads", lambda v, n: _pos_int(v, n), None, "worker threads", cli_type=int),
]

_MU_OR_ALPHA = [
    Param("mu", _grid, None, "coupling grid in mu", nargs="+"),
    Param("alpha", _grid, None, "coupling grid in alpha (mu = 2 / (alpha sqrt 2))", nargs="+"),
    Param("bonds", lambda v, n: _pos_int(v, n), 2, "number of half-lines", cli_type=int),
]

COMMANDS = {
    "spectrum-j0": _MU_OR_ALPHA + [
        Param("N", lambda v, n: _pos_int(v, n, 2), 4096, "truncation size", cli_type=int),
        Param("k", lambda v, n: _pos_int(v, n), 10, "number of lowest eigenvalues", cli_type=int),
        Param("tol", _positive, 1e-10, "bisection tolerance"),
        Param("cauchy_tol", _positive, 1e-8, "N vs 2N agreement for 'converged'"),
    ],
    "density": _MU_OR_ALPHA + [
        Param("E", _grid, None, "energy grid", nargs="+"),
        Param("eps", _ladder, [1e-2, 1e-3, 1e-4], "decreasing eps ladder", nargs="+"),
        Param("stability_tol", _positive, 0.05, "trust threshold"),
        Param("strip", lambda v, n: _pos_int(v, n, 0), 0, "leading rows removed", cli_type=int),
    ],
    "point-spectrum": _MU_OR_ALPHA + [
        Param("N", lambda v, n: _pos_int(v, n, 16), 4096, "truncation size", cli_type=int),
        Param("grid", lambda v, n: _pos_int(v, n, 10), 2000, "determinant scan points",
              cli_type=int),
        Param("tol", _positive, 1e-10, "bisection tolerance"),
    ],
    "recurrence": [
        Param("mu", _grid, None, "coupling grid in mu", nargs="+"),
        Param("Lambda", _complex_grid, None, "spectral parameters, e.g. 0.25 1j -1+0.5j",
              nargs="+", cli_type=str),
        Param("N", lambda v, n: _pos_int(v, n, 200), 20000, "sequence length", cli_type=int),
        Param("method", _choice({"forward", "miller"}), "miller", "forward or miller",
              cli_type=str),
    ],
    "resolvent-check": [
        Param("mu", _grid, None, "coupling grid in mu", nargs="+"),
        Param("Lambda", _complex_grid, None, "spectral parameters", nargs="+", cli_type=str),
        Param("M", lambda v, n: _pos_int(v, n), 8, "source components", cli_type=int),
        Param("h", _positive, 1e-3, "grid step"),
        Param("X", _positive, 20.0, "half-width of the x grid"),
        Param("N_jacobi", lambda v, n: None if v is None else _pos_int(v, n), None,
              "Jacobi truncation (default 4 M)", cli_type=int),
        Param("closure", _choice({"asymptotic", "dirichlet"}), "asymptotic",
              "closure of the Jacobi system", cli_type=str),
    ],
    "multiplicity-map": _MU_OR_ALPHA + [
        Param("E", _grid, None, "energy grid", nargs="+"),
    ],
    "probes": _MU_OR_ALPHA + [
        Param("probe", _str_list({"deficiency", "norm-decay", "stripped"}),
              ["deficiency", "norm-decay", "stripped"], "probes to run", nargs="+", cli_type=str),
        Param("strip", lambda v, n: _pos_int(v, n, 0), 1, "rows removed for the stripped probe",
              cli_type=int),
        Param("E", _grid, [-2.0, -1.0, 0.0, 1.0, 2.0, 4.0], "energies for the stripped probe",
              nargs="+"),
    ],
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    def echo(self) -> dict:
        out = {"command": self.command}
        for k, v in self.params.items():
            if isinstance(v, list) and v and isinstance(v[0], complex):
                v = [[c.real, c.imag] for c in v]
            out[k] = v
        return out


def parse_config(command, raw: dict) -> RunConfig:
    """Validate a mapping of parameters into a :class:`RunConfig`.

    Unknown keys, empty or unsorted grids and non-positive tolerances
    raise :class:`ConfigError`.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    raw = dict(raw)
    cmd = raw.pop("command", command)
    if cmd != command:
        raise ConfigError(f"config is for {cmd!r}, not {command!r}")
    known = {p.name: p for p in COMMANDS[command] + COMMON}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    params = {}
    for name, p in known.items():
        v = raw.get(name, p.default)
        if v is None:
            params[name] = None
            continue
        try:
            params[name] = p.convert(v, name)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{name}: {exc}") from exc
    if "alpha" in known:
        if (params["mu"] is None) == (params["alpha"] is None):
            raise ConfigError("give exactly one of mu and alpha")
    elif params.get("mu") is None:
        raise ConfigError("mu is required")
    for req in ("E", "Lambda"):
        if req in known and params[req] is None:
            raise ConfigError(f"{req} is required")
    if command == "resolvent-check":
        if params["M"] > 64:
            raise ConfigError("M must be <= 64")
        if params["N_jacobi"] is not None and params["N_jacobi"] < 4 * params["M"]:
            raise ConfigError("N_jacobi must be >= 4 M")
        if not math.isclose(round(params["X"] / params["h"]) * params["h"], params["X"],
                            rel_tol=1e-12):
            raise ConfigError("X must be an integer multiple of h")
    return RunConfig(command, params)


def _couplings(params):
    """(alpha, mu) pairs, sorted by mu."""
    from .special import alpha_from_mu, mu_from_alpha
    b = params.get("bonds", 2)
    if params.get("alpha") is not None:
        pairs = [(a, mu_from_alpha(a, b)) for a in params["alpha"]]
    else:
        pairs = [(alpha_from_mu(m, b), m) for m in params["mu"]]
    return sorted(pairs, key=lambda p: p[1])


# --------------------------------------------------------------- work units
# each task returns a list of (sort_key, row) pairs

def _spectrum_j0(mu, p):
    from .jacobi import build, j0, lowest_eigenvalues
    a = lowest_eigenvalues(build(j0(mu), 0, p["N"]), p["k"], p["tol"]).values
    b = lowest_eigenvalues(build(j0(mu), 0, 2 * p["N"]), p["k"], p["tol"]).values
    return [((mu, k), {"mu": mu, "N": p["N"], "k": k, "lambda_k": float(a[k]),
                       "converged": bool(abs(a[k] - b[k]) <= p["cauchy_tol"])})
            for k in range(a.size)]


def _density(mu, E, p):
    from .weyl import tau_density
    est = tau_density(mu, E, p["eps"], p["stability_tol"], strip=p["strip"])
    return [((mu, E), {"mu": mu, "E": E, "tau": est.tau, "stability": est.stability,
                       "trusted": est.trusted})]


def _point_spectrum(alpha, mu, p):
    from .model import point_spectrum
    from .special import ModelParameters
    res = point_spectrum(ModelParameters(alpha, p["bonds"]), N=p["N"], grid=p["grid"],
                         tol=p["tol"])
    base = {"alpha": alpha, "mu": mu, "N": p["N"], "count": res.count}
    if res.count == 0:
        return [((mu, -1), dict(base, index=None, eigenvalue=None))]
    return [((mu, i), dict(base, index=i, eigenvalue=float(e)))
            for i, e in enumerate(res.eigenvalues)]


def _recurrence(mu, lam, p):
    from .recurrence import (Recurrence, Regime, fit_growth, forward_solve, miller_minimal,
                             predict_asymptotics)
    pred = predict_asymptotics(mu, lam)
    rec = Recurrence.channel(mu, lam)
    N = p["N"]
    if p["method"] == "miller" and pred.minimal_branch is not None:
        seq = miller_minimal(rec, N, seed="asymptotic")
    else:
        seq = forward_solve(rec, 1.0, N)
    reg = pred.regime
    minimal = bool(seq.minimal)
    if reg is Regime.CRITICAL:
        model = "critical"
        predicted = (-1.0 if minimal else 1.0) * abs(pred.ratio_or_rate.real)
    elif pred.minimal_branch is None:
        model, predicted = "envelope", -0.5
    else:
        i = 0 if pred.minimal_branch == "+" else 1
        j = i if minimal else 1 - i
        if reg is Regime.SUPER:
            model, predicted = "geometric", abs(pred.ratios[j])
        else:
            model, predicted = "power", pred.powers[j].real
    fit = fit_growth(seq, (N // 10, N), model)
    return [((mu, lam.real, lam.imag), {
        "mu": mu, "Lambda_re": lam.real, "Lambda_im": lam.imag, "regime": reg.value,
        "method": seq.method.value, "model": model, "fitted": float(np.real(fit.rate)),
        "predicted": float(predicted), "fit_residual": float(fit.residual)})]


def standard_sources(M):
    """Sources used by ``resolvent-check``: f_n(x) = e^{-|x|}(1 + (-1)^n x)/(n + 1)."""
    return [(lambda k: (lambda x: np.exp(-np.abs(x)) * (1.0 + (-1) ** k * x) / (k + 1)))(k)
            for k in range(M)]


def _resolvent_check(mu, lam, p):
    from .resolvent import GridFunctionBundle, assemble_resolvent
    from .special import ModelParameters
    F = GridFunctionBundle.from_callables(standard_sources(p["M"]), p["X"], p["h"])
    _, rep = assemble_resolvent(ModelParameters.from_mu(mu), lam, F, p["N_jacobi"],
                                closure=p["closure"])
    return [((mu, lam.real, lam.imag), {
        "mu": mu, "Lambda_re": lam.real, "Lambda_im": lam.imag, "M": p["M"], "h": p["h"],
        "ode_residual": rep.ode_residual, "matching_residual": rep.matching_residual,
        "continuity_residual": rep.continuity_residual, "rhs_norm": rep.rhs_norm})]


def _multiplicity(alpha, mu, E, p):
    from .model import predicted_multiplicity
    from .special import ModelParameters
    m = predicted_multiplicity(E, ModelParameters(alpha, p["bonds"]))
    return [((mu, E), {"mu": mu, "E": E, "base": m.base, "extra": m.extra, "total": m.total,
                       "boundary": m.boundary_flag})]


def _probe(mu, name, p):
    from . import model
    if name == "deficiency":
        r = model.deficiency_probe(mu)
        value, ok = r.floor, r.passed
    elif name == "norm-decay":
        r = model.norm_decay_probe(mu)
        value, ok = r.slope, r.passed
    else:
        r = model.stripped_spectrum_check(mu, p["strip"], p["E"])
        value, ok = float(sum(r.positive_base)), r.passed
    return [((name, mu), {"probe": name, "mu": mu, "value": float(value), "passed": bool(ok)})]


COLUMNS = {
    "spectrum-j0": ["mu", "N", "k", "lambda_k", "converged"],
    "density": ["mu", "E", "tau", "stability", "trusted"],
    "point-spectrum": ["alpha", "mu", "N", "count", "index", "eigenvalue"],
    "recurrence": ["mu", "Lambda_re", "Lambda_im", "regime", "method", "model", "fitted",
                   "predicted", "fit_residual"],
    "resolvent-check": ["mu", "Lambda_re", "Lambda_im", "M", "h", "ode_residual",
                        "matching_residual", "continuity_residual", "rhs_norm"],
    "multiplicity-map": ["mu", "E", "base", "extra", "total", "boundary"],
    "probes": ["probe", "mu", "value", "passed"],
}


def tasks(config: RunConfig):
    p = config.params
    c = config.command
    if c == "spectrum-j0":
        return [(_spectrum_j0, (mu, p)) for _, mu in _couplings(p)]
    if c == "density":
        return [(_density, (mu, E, p)) for _, mu in _couplings(p) for E in p["E"]]
    if c == "point-spectrum":
        return [(_point_spectrum, (a, mu, p)) for a, mu in _couplings(p)]
    if c == "recurrence":
        return [(_recurrence, (mu, lam, p)) for mu in p["mu"] for lam in p["Lambda"]]
    if c == "resolvent-check":
        return [(_resolvent_check, (mu, lam, p)) for mu in p["mu"] for lam in p["Lambda"]]
    if c == "multiplicity-map":
        return [(_multiplicity, (a, mu, E, p)) for a, mu in _couplings(p) for E in p["E"]]
    return [(_probe, (mu, name, p)) for _, mu in _couplings(p) for name in p["probe"]]


# ------------------------------------------------------------------ running

@dataclass
class ResultEnvelope:
    tool_version: str
    config_echo: dict
    started: str
    finished: str
    columns: list
    rows: list
    diagnostics: list
    schema: str = SCHEMA

    def to_json(self) -> str:
        return json.dumps({
            "schema": self.schema, "tool_version": self.tool_version,
            "config_echo": self.config_echo, "started": self.started,
            "finished": self.finished, "columns": self.columns,
            "rows": [[_json_cell(r.get(k)) for k in self.columns] for r in self.rows],
            "diagnostics": self.diagnostics,
        }, indent=1, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema={self.schema} command={self.config_echo['command']}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_csv_cell(r.get(k)) for k in self.columns])
        return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _json_cell(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run(config: RunConfig):
    """Execute ``config``; returns (envelope, exit code)."""
    started = _now()
    work = tasks(config)
    threads = config.params.get("threads") or os.cpu_count() or 1
    results, diagnostics = [], []

    def call(item):
        fn, args = item
        try:
            return fn(*args), None
        except TruncationUnstable as exc:
            return None, (EXIT_UNSTABLE, f"{type(exc).__name__}: {exc}")
        except (SmilanskyError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            return None, (EXIT_NUMERICAL, f"{type(exc).__name__}: {exc}")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(call, work))
    failures = set()
    for rows, err in outcomes:
        if err is None:
            results.extend(rows)
        else:
            diagnostics.append({"level": "error", "message": err[1]})
            failures.add(err[0])
    # a numerical failure outranks an unstable truncation
    code = min(failures, default=EXIT_OK)
    for msg in sorted({f"{w.category.__name__}: {w.message}" for w in caught}):
        diagnostics.append({"level": "warning", "message": msg})
    results.sort(key=lambda kr: kr[0])
    env = ResultEnvelope(tool_version(), config.echo(), started, _now(),
                         COLUMNS[config.command], [r for _, r in results], diagnostics)
    return env, code


def emit(envelope: ResultEnvelope, fmt: str, path=None):
    text = envelope.to_json() if fmt == "json" else envelope.to_csv()
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ------------------------------------------------------------------- argv

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smilansky", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, params in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        for p in params + COMMON:
            kw = {"dest": p.name, "default": argparse.SUPPRESS, "help": p.help,
                  "type": p.cli_type}
            if p.nargs:
                kw["nargs"] = p.nargs
            flags = [f"--{p.name}"]
            if "_" in p.name:
                flags.append(f"--{p.name.replace('_', '-')}")
            sp.add_argument(*flags, **kw)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = vars(parser.parse_args(argv))
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    command = args.pop("command")
    raw = {}
    cfg_path = args.pop("config", None)
    try:
        if cfg_path:
            try:
                with open(cfg_path, encoding="utf-8") as fh:
                    raw = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {cfg_path}: {exc}") from exc
            if not isinstance(raw, dict):
                raise ConfigError("config must be a JSON object")
        raw.update(args)
        config = parse_config(command, raw)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    env, code = run(config)
    for d in env.diagnostics:
        print(f"{d['level']}: {d['message']}", file=sys.stderr)
    try:
        emit(env, config.params["format"], config.params["output"])
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return code


if __name__ == "__main__":
    sys.exit(main())
