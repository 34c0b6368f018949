"""Command-line interface: ``yblab <verb> [flags]``.

Exit status is 0 when every check of the invoked campaign passed, 1 when
at least one failed (reports are still written) and 2 on a configuration
error. Reports are JSON objects holding the resolved configuration and an
array of per-item results; ``--format csv`` writes a flat summary instead.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import asdict, is_dataclass
from enum import Enum
from typing import Any, Sequence

import numpy as np

from . import lattice, specfun, verify
from .errors import YBLabError
from .specfun import EllipticNomes, ModularParam, PrecisionBudget
from .weights import DualSpin, EllipticModel, GammaModel, HyperbolicModel, Spin

# Defaults shared with the acceptance suite.
STR_DEFAULTS = {
    "gamma": {"count": 50, "tol": 1e-6},
    "elliptic": {"count": 20, "tol": 1e-8},
    "hyperbolic": {"count": 20, "tol": 1e-6},
}
POINTWISE_DRAWS = 1000
POINTWISE_TOL = 1e-9
WEAK_TOL = 1e-3
WEAK_POINTS = (0.3, 0.9, 1.2, 1.4708, 2.4)
HYPERBOLIC_LIMIT_EPS = (0.2, 0.1, 0.05)
HYPERBOLIC_LIMIT_PROBES = (
    {"b": 1.0, "alpha": 0.3, "x": 0.4, "y": -0.2},
    {"b": 1.0, "alpha": 0.3, "x": 0.0, "y": 0.0},
    {"b": 1.3, "alpha": 0.3, "x": 0.4, "y": -0.2},
)
HYPERBOLIC_LIMIT_TOL = 0.01
STRONG_LIMIT_DELTA = (0.3, 0.2, 0.1)
STRONG_LIMIT_PROBES = (
    {"beta": 0.5, "m": 0, "n": 1, "x": 0.3, "y": -0.4},
    {"beta": 0.3, "m": 1, "n": -1, "x": 0.2, "y": 0.5},
    {"beta": 0.7, "m": 2, "n": 0, "x": -0.6, "y": 0.1, "sx": 0.4, "sn": 2},
)


class ConfigError(Exception):
    """Invalid command configuration; the message names the offending key."""


def _threads() -> int:
    raw = os.environ.get("YBLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"YBLAB_THREADS: expected an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("YBLAB_THREADS: must be >= 1")
    return n


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def _plain(obj: Any) -> Any:
    """JSON-ready structure with every float kept as a float."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return _plain(asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _fmt(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def dumps(obj: Any) -> str:
    """Deterministic JSON with 17 significant digits for every float."""
    def enc(o, ind):
        pad = "  " * (ind + 1)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(o[k], ind + 1)}" for k in sorted(o)]
            return "{\n" + ",\n".join(items) + "\n" + "  " * ind + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(v, ind + 1) for v in o) + "\n" + "  " * ind + "]"
        if isinstance(o, float):
            return _fmt(o)
        return json.dumps(o)
    return enc(_plain(obj), 0) + "\n"


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_summary(items: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "lhs", "rhs", "rel_residual", "passed"])
    for k, it in enumerate(items):
        w.writerow([it.get("id", k), _fmt(float(it["lhs"])), _fmt(float(it["rhs"])),
                    _fmt(float(it["rel_residual"])), "true" if it["passed"] else "false"])
    return buf.getvalue()


def emit_report(report: dict, out: str | None, fmt: str, csv_text: str | None = None) -> None:
    """Write the report (or print it when ``out`` is None)."""
    if not report.get("results"):
        raise ConfigError("results: nothing to report")
    if fmt == "json":
        text = dumps(report)
    else:
        text = csv_text if csv_text is not None else csv_summary(report["results"])
    if out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _triple(text: str | Sequence) -> tuple:
    vals = text.split(",") if isinstance(text, str) else list(text)
    if len(vals) != 3:
        raise ValueError("expected three comma-separated values")
    return tuple(float(v) for v in vals)


def _complex(text: str) -> complex:
    return complex(str(text).replace(" ", "").replace("i", "j"))


def build_model(cfg: dict):
    name = cfg.get("model")
    if name == "elliptic":
        return EllipticModel(EllipticNomes(float(cfg["p"]), float(cfg["q"])))
    if name == "hyperbolic":
        b = _complex(cfg["b"])
        return HyperbolicModel(ModularParam(b if b.imag else b.real))
    if name == "gamma":
        return GammaModel()
    raise ConfigError(f"model: unknown model {name!r}")


def _load_config(path: str | None, allowed: set) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    for k in data:
        if k.replace("-", "_") not in allowed:
            raise ConfigError(f"{k}: unknown configuration key")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(sub: argparse.ArgumentParser, sub_argv: Sequence[str]) -> dict:
    """Merge parser defaults, the JSON config file and explicit flags (flags win)."""
    actions = [a for a in sub._actions if a.dest != "help"]
    defaults = {a.dest: a.default for a in actions}
    for a in actions:
        a.default = argparse.SUPPRESS
    try:
        given = vars(sub.parse_args(sub_argv))
    finally:
        for a in actions:
            a.default = defaults[a.dest]
    allowed = set(defaults) - {"config"}
    cfg = {k: v for k, v in defaults.items() if k in allowed}
    cfg.update(_load_config(given.get("config"), allowed))
    cfg.update({k: v for k, v in given.items() if k in allowed})
    return cfg


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

SPECFUN = ("log_gamma", "gamma_pm_log", "theta1", "elliptic_gamma", "ncqdl",
           "kappa_elliptic", "kappa_hyperbolic")


def cmd_specfun_eval(cfg: dict) -> tuple[dict, bool]:
    fn = cfg["fn"]

    def need(key):
        if cfg.get(key) is None:
            raise ConfigError(f"{key}: required for --fn {fn}")
        return cfg[key]

    if fn == "log_gamma":
        val = specfun.log_gamma(_complex(need("z")))
    elif fn == "gamma_pm_log":
        val = specfun.gamma_pm_log(_complex(need("z")), _complex(need("c")))
    elif fn == "theta1":
        val = specfun.theta1(_complex(need("z")), _complex(need("q")))
    elif fn == "elliptic_gamma":
        val = specfun.elliptic_gamma(_complex(need("z")),
                                     EllipticNomes(_complex(need("p")), _complex(need("q"))))
    elif fn == "ncqdl":
        b = _complex(need("b"))
        val = specfun.ncqdl(_complex(need("z")), ModularParam(b if b.imag else b.real))
    elif fn == "kappa_elliptic":
        val = specfun.kappa_elliptic(float(need("alpha")),
                                     EllipticNomes(float(need("p")), float(need("q"))))
    elif fn == "kappa_hyperbolic":
        b = _complex(need("b"))
        val = specfun.kappa_hyperbolic(_complex(need("alpha")), ModularParam(b if b.imag else b.real))
    else:
        raise ConfigError(f"fn: unknown function {fn!r}")
    val = complex(val)
    item = {"id": 0, "fn": fn, "value": val}
    if cfg.get("out") is None:
        text = _fmt(val.real) if val.imag == 0 else f"{_fmt(val.real)}{'+' if val.imag >= 0 else '-'}{_fmt(abs(val.imag))}j"
        print(text)
    return {"results": [item]}, True


def cmd_verify_str(cfg: dict) -> tuple[dict, bool]:
    m = build_model(cfg)
    d = STR_DEFAULTS[m.name]
    count = int(cfg["count"] if cfg.get("count") is not None else d["count"])
    tol = float(cfg["tol"] if cfg.get("tol") is not None else d["tol"])
    cfg.update(count=count, tol=tol)
    if count < 1:
        raise ConfigError("count: must be >= 1")
    spectral = None
    key = "beta" if m.name == "gamma" else "alpha"
    if cfg.get(key) is not None:
        spectral = _triple(cfg[key])
    reports = verify.str_campaign(m, count, tol, int(cfg["seed"]), threads=_threads(),
                                  r_expected=float(cfg["r_expected"]), spectral=spectral)
    items = [dict(id=k, **r.to_dict()) for k, r in enumerate(reports)]
    return {"results": items}, all(r.passed for r in reports)


def _test_functions():
    return {
        "one": lambda y: np.ones_like(np.asarray(y, dtype=float)),
        "sin2": lambda y: np.sin(y) ** 2,
        "cos2y": lambda y: np.cos(2 * np.asarray(y)),
        "sin2y": lambda y: np.sin(2 * np.asarray(y)),
        "exp_trig": lambda y: np.exp(np.cos(2 * np.asarray(y)) + 0.5 * np.sin(4 * np.asarray(y))),
    }


def cmd_verify_inversion(cfg: dict) -> tuple[dict, bool]:
    m = build_model(cfg)
    items = []
    if cfg["mode"] == "pointwise":
        tol = float(cfg["tol"] if cfg.get("tol") is not None else POINTWISE_TOL)
        count = int(cfg["count"] if cfg.get("count") is not None else POINTWISE_DRAWS)
        cfg.update(tol=tol, count=count)
        rng = np.random.default_rng(int(cfg["seed"]))
        eta = m.eta
        alpha = rng.uniform(0.05, 0.95, count) * eta
        if m.name == "gamma":
            coords = (rng.uniform(-2, 2, count), rng.integers(-2, 3, count),
                      rng.uniform(-2, 2, count), rng.integers(-2, 3, count))
        elif m.name == "hyperbolic":
            coords = (rng.uniform(-2, 2, count), rng.uniform(-2, 2, count))
        else:
            coords = (rng.uniform(0, math.pi, count), rng.uniform(0, math.pi, count))
        res = verify.inversion_pointwise_batch(m, alpha, *coords)
        for k in range(count):
            items.append({"id": k, "alpha": float(alpha[k]),
                          "spins": [float(c[k]) for c in coords],
                          "lhs": 1.0 + float(res[k]), "rhs": 1.0,
                          "rel_residual": float(res[k]), "passed": bool(res[k] <= tol)})
    else:
        if m.name != "elliptic":
            raise ConfigError("model: the weak inversion check needs the elliptic model")
        tol = float(cfg["tol"] if cfg.get("tol") is not None else WEAK_TOL)
        cfg.update(tol=tol)
        alpha = float(cfg["alpha"]) if cfg.get("alpha") is not None else 0.3 * m.eta
        points = _parse_points(cfg.get("points"))
        cfg.update(alpha=alpha, points=list(points))
        k = 0
        for x in points:
            kern = verify.weak_inversion_kernel(m, alpha, x)
            for name, f in _test_functions().items():
                lhs, rhs = kern.lhs(f), kern.rhs(f)
                r = kern.residual(f)
                items.append({"id": k, "x": x, "f": name, "lhs": lhs.real, "rhs": rhs.real,
                              "rel_residual": r, "passed": bool(r <= tol)})
                k += 1
    return {"results": items}, all(it["passed"] for it in items)


def _parse_points(raw) -> tuple:
    if raw is None:
        return WEAK_POINTS
    vals = raw.split(",") if isinstance(raw, str) else raw
    return tuple(float(v) for v in vals)


def cmd_verify_limit(cfg: dict) -> tuple[dict, bool]:
    kind = cfg["kind"]
    corrected = cfg["form"] == "corrected"
    items = []
    if kind == "hyperbolic":
        control = tuple(cfg["control"]) if cfg.get("control") else HYPERBOLIC_LIMIT_EPS
        probes = cfg.get("probes") or [dict(p) for p in HYPERBOLIC_LIMIT_PROBES]
        tol = float(cfg["tol"] if cfg.get("tol") is not None else HYPERBOLIC_LIMIT_TOL)
        cfg.update(control=list(control), probes=probes, tol=tol)
        for k, pr in enumerate(probes):
            sw = verify.hyperbolic_limit_residual(verify.LimitSchedule(control, pr))
            w = sw.weight_normalized if corrected else sw.weight
            ok = w.monotone and w.deviations[-1] <= tol
            items.append({"id": k, "probe": pr, "control": list(control),
                          "weight_ratios": w.ratios, "site_ratios": sw.site.ratios,
                          "lhs": w.ratios[-1], "rhs": 1.0, "rel_residual": w.deviations[-1],
                          "passed": bool(ok)})
    elif kind == "strong":
        control = tuple(cfg["control"]) if cfg.get("control") else STRONG_LIMIT_DELTA
        probes = cfg.get("probes") or [dict(p) for p in STRONG_LIMIT_PROBES]
        cfg.update(control=list(control), probes=probes)
        for k, pr in enumerate(probes):
            sw = verify.strong_coupling_residual(verify.LimitSchedule(control, pr))
            w = sw.weight_corrected if corrected else sw.weight
            kap = sw.kappa_corrected if corrected else sw.kappa
            ok = w.monotone and sw.site.monotone and kap.monotone
            items.append({"id": k, "probe": pr, "control": list(control),
                          "weight_ratios": w.ratios, "site_ratios": sw.site.ratios,
                          "kappa_ratios": kap.ratios,
                          "lhs": w.ratios[-1], "rhs": 1.0, "rel_residual": w.deviations[-1],
                          "passed": bool(ok)})
    else:
        raise ConfigError(f"kind: unknown limit {kind!r}")
    return {"results": items}, all(it["passed"] for it in items)


def _lattice_spec(cfg: dict, m) -> lattice.LatticeSpec:
    rows, cols = int(cfg["rows"]), int(cfg["cols"])
    if rows < 1 or cols < 1:
        raise ConfigError("rows: rows and cols must be >= 1")
    if cfg.get("alpha") is None:
        alpha = 0.5 * m.eta
    else:
        try:
            alpha = float(cfg["alpha"])
        except (TypeError, ValueError):
            raise ConfigError("alpha: lattice commands take a single spectral value") from None
    cfg["alpha"] = alpha
    zero = DualSpin(0.0, 0) if m.name == "gamma" else Spin(0.0)
    boundary = None
    if cfg.get("boundary") is not None:
        raw = cfg["boundary"]
        if not isinstance(raw, list):
            raise ConfigError("boundary: expected a list of spins")
        boundary = [DualSpin(float(v[0]), int(v[1])) if m.name == "gamma" else Spin(float(v))
                    for v in raw]
    try:
        return lattice.LatticeSpec.square(rows, cols, alpha, m.eta, boundary, zero)
    except ValueError as exc:
        raise ConfigError(f"boundary: {exc}") if "boundary" in str(exc) else ConfigError(f"alpha: {exc}")


def cmd_lattice_exact(cfg: dict) -> tuple[dict, bool]:
    m = build_model(cfg)
    spec = _lattice_spec(cfg, m)
    grid = lattice.GridDiscretization.for_model(m, cfg.get("nodes"), int(cfg["n_max"]))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = lattice.exact_partition(spec, m, grid)
    item = {"id": 0, **_plain(res), "warnings": [str(w.message) for w in caught],
            "internal_sites": len(spec.internal)}
    return {"results": [item]}, True


def cmd_lattice_mc(cfg: dict) -> tuple[dict, bool]:
    m = build_model(cfg)
    if m.name == "elliptic":
        raise ConfigError("model: Monte Carlo runs need the gamma or hyperbolic model")
    spec = _lattice_spec(cfg, m)
    try:
        mc = lattice.MCConfig(sweeps=int(cfg["sweeps"]), burn_in=int(cfg["burn_in"]),
                              x_step=float(cfg["x_step"]), n_step_prob=float(cfg["n_step_prob"]),
                              seed=int(cfg["seed"]), chains=int(cfg["chains"]))
    except ValueError as exc:
        raise ConfigError(f"sweeps: {exc}") from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        obs = lattice.mc_run(spec, m, mc)
    item = {"id": 0, "edge_log_w": obs.edge_log_w, "edge_stderr": obs.edge_stderr,
            "acceptance": obs.acceptance, "autocorr_time": obs.autocorr_time,
            "warnings": [str(w.message) for w in caught]}
    per_sweep = obs.series.mean(axis=1)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sweep"] + [f"edge_{k}" for k in range(per_sweep.shape[1])])
    for t, row in enumerate(per_sweep):
        w.writerow([mc.burn_in + t] + [_fmt(float(v)) for v in row])
    ok = not caught
    return {"results": [item], "_csv": buf.getvalue()}, ok


VERBS = {
    "specfun-eval": cmd_specfun_eval,
    "verify-str": cmd_verify_str,
    "verify-inversion": cmd_verify_inversion,
    "verify-limit": cmd_verify_limit,
    "lattice-exact": cmd_lattice_exact,
    "lattice-mc": cmd_lattice_mc,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="yblab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(sp, model=True):
        sp.add_argument("--config", help="JSON file with default values for any flag")
        sp.add_argument("--out", help="report path (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=0)
        if model:
            sp.add_argument("--model", choices=("elliptic", "hyperbolic", "gamma"), default="gamma")
            sp.add_argument("--p", type=float, default=0.3)
            sp.add_argument("--q", type=float, default=0.3)
            sp.add_argument("--b", default="1.0", help="real b > 0 or a unit-modulus complex, e.g. 0.5+0.8i")

    sp = sub.add_parser("specfun-eval", help="evaluate one special function")
    common(sp, model=False)
    sp.add_argument("--fn", choices=SPECFUN, required=False, default="theta1")
    for k in ("z", "c", "q", "p", "b", "alpha"):
        sp.add_argument(f"--{k}")

    sp = sub.add_parser("verify-str", help="star-triangle campaign over random configurations")
    common(sp)
    sp.add_argument("--count", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--alpha", help="fixed spectral triple a1,a2,a3 (elliptic, hyperbolic)")
    sp.add_argument("--beta", help="fixed spectral triple b1,b2,b3 (gamma)")
    sp.add_argument("--r-expected", dest="r_expected", type=float, default=1.0,
                    help="expected star/triangle ratio (1 for the stated normalisation)")

    sp = sub.add_parser("verify-inversion", help="pointwise or weak-form inversion relation")
    common(sp)
    sp.add_argument("--mode", choices=("pointwise", "weak"), default="pointwise")
    sp.add_argument("--count", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--points", help="comma-separated spins for the weak form")

    sp = sub.add_parser("verify-limit", help="hyperbolic or strong-coupling limit sweep")
    common(sp, model=False)
    sp.add_argument("--kind", choices=("hyperbolic", "strong"), default="hyperbolic")
    sp.add_argument("--form", choices=("corrected", "printed"), default="corrected",
                    help="asymptotic forms to test (see README)")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--control", type=lambda s: [float(v) for v in s.split(",")])
    sp.add_argument("--probes", help=argparse.SUPPRESS)

    for verb, help_ in (("lattice-exact", "discretised partition function of a small lattice"),
                        ("lattice-mc", "Metropolis sampling of a square lattice")):
        sp = sub.add_parser(verb, help=help_)
        common(sp)
        sp.add_argument("--rows", type=int, default=4)
        sp.add_argument("--cols", type=int, default=4)
        sp.add_argument("--alpha", help="spectral value of horizontal edges (default eta/2)")
        sp.add_argument("--beta", dest="alpha", help=argparse.SUPPRESS)
        sp.add_argument("--boundary", help=argparse.SUPPRESS)
        sp.add_argument("--nodes", type=int)
        sp.add_argument("--n-max", dest="n_max", type=int, default=8)
        if verb == "lattice-mc":
            sp.add_argument("--sweeps", type=int, default=4000)
            sp.add_argument("--burn-in", dest="burn_in", type=int, default=500)
            sp.add_argument("--x-step", dest="x_step", type=float, default=0.5)
            sp.add_argument("--n-step-prob", dest="n_step_prob", type=float, default=0.3)
            sp.add_argument("--chains", type=int, default=8)
            sp.add_argument("--csv", help="per-sweep observable CSV path")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        sub = parser._subparsers._group_actions[0].choices[args.verb]
        cfg = resolve(sub, argv[argv.index(args.verb) + 1:])
        threads = _threads()
    except (ConfigError, ValueError) as exc:
        print(f"yblab: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        report, ok = VERBS[args.verb](cfg)
    except (ConfigError, ValueError, KeyError) as exc:
        # DomainError and friends are ValueErrors: a parameter outside its domain
        print(f"yblab: configuration error: {exc}", file=sys.stderr)
        return 2
    except YBLabError as exc:
        print(f"yblab: check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    csv_text = report.pop("_csv", None)
    report = {"command": args.verb, "config": cfg, "threads": threads, "passed": bool(ok), **report}
    try:
        if args.verb == "lattice-mc" and cfg.get("csv"):
            _atomic_write(cfg["csv"], csv_text)
        if args.verb != "specfun-eval" or cfg.get("out"):
            emit_report(report, cfg.get("out"), cfg.get("format", "json"),
                        csv_text if args.verb == "lattice-mc" else None)
    except OSError as exc:
        print(f"yblab: I/O error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
