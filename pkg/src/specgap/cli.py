"""Command-line interface: ``specgap {gap,sweep,flow,verify}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import analysis as an
from .flow import CONVERGED, MAX_STEPS, flat_bound, flow_to_linear
from .linalg import DEFAULT_RESIDUAL_TOL, eigenvalues_lowest
from .operators import (
    GENERATORS,
    build_hypercube_reduced,
    build_operator,
    is_convex,
    potential_from_spec,
    vprime_transform,
)
from .verify import SuiteConfig, format_table, run_suite

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_MAX_STEPS = 3
EXIT_STEP_FAILURE = 4

SEED_ENV = "SPECGAP_SEED_BASE"

CSV_COLUMNS = (
    "N", "alpha_or_seed", "lambda1", "lambda2", "gap", "bound", "margin",
    "node_x", "m", "n", "seed", "value", "status",
)
FLOW_COLUMNS = ("alpha", "gap", "m", "n", "linearity_residual", "gap_rate")

HF_RTOL = 1e-5
FAMILIES = ("bound", "node", "casoratian", "hf", "interlacing", "ordering", "closed-form")
_ALPHA_FAMILIES = {"node", "ordering", "closed-form", "hf"}

DEFAULTS: dict[str, Any] = {
    "graph": "path",
    "n": 10,
    "n_range": "3:20",
    "potential": None,
    "alpha": None,
    "alpha_range": None,
    "seeds": None,
    "tol": None,
    "output": None,
    "format": "json",
    "jobs": 1,
    "quick": False,
    "require_convex": False,
    "adversarial": False,
    "family": "bound",
    "dalpha": 0.05,
    "max_steps": 10_000,
    "lin_tol": 1e-6,
    "progress_every": 0,
}

DEFAULT_TOL = {"margin": 1e-9, "solver": DEFAULT_RESIDUAL_TOL}


class UsageError(ValueError):
    pass


# --- parsing helpers --------------------------------------------------------

def parse_int_range(text: str | int | Sequence[int]) -> list[int]:
    """'3:8' (inclusive), '3,5,9', or a mix such as '2:4,10'."""
    if isinstance(text, int):
        return [text]
    if not isinstance(text, str):
        return [int(v) for v in text]
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi = (int(x) for x in part.split(":", 1))
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise UsageError(f"empty range {text!r}")
    return out


def parse_alpha_range(text: str | Sequence[float]) -> list[float]:
    """'start:stop:count' (inclusive, evenly spaced) or a comma list."""
    if not isinstance(text, str):
        return [float(v) for v in text]
    text = text.strip()
    if text.count(":") == 2:
        a, b, k = text.split(":")
        count = int(k)
        if count < 1:
            raise UsageError("alpha range needs at least one sample")
        return [float(x) for x in np.linspace(float(a), float(b), count)]
    vals = [float(x) for x in text.split(",") if x.strip()]
    if not vals:
        raise UsageError(f"empty alpha range {text!r}")
    return vals


def parse_tol(text: str | float | dict | None) -> dict[str, float]:
    tol = dict(DEFAULT_TOL)
    if text is None:
        return tol
    if isinstance(text, dict):
        items = text.items()
    elif isinstance(text, (int, float)):
        items = [("margin", text)]
    elif "=" in text:
        items = [kv.split("=", 1) for kv in text.split(",") if kv.strip()]
    else:
        items = [("margin", text)]
    for k, v in items:
        k = k.strip()
        if k not in tol:
            raise UsageError(f"unknown tolerance {k!r}; known: {', '.join(tol)}")
        tol[k] = float(v)
        if not tol[k] > 0:
            raise UsageError(f"tolerance {k} must be positive")
    return tol


def parse_potential(text: str | dict | None) -> dict:
    if text is None:
        return {}
    if isinstance(text, dict):
        return dict(text)
    text = text.strip()
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return json.load(fh)
    if text.startswith("{"):
        return json.loads(text)
    if text in GENERATORS:
        return {"generator": text}
    raise UsageError(f"potential must be JSON, @file, or one of {', '.join(GENERATORS)}")


# --- configuration ----------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    graph: str
    n: int
    ns: list[int]
    potential: dict
    alpha: float | None
    alphas: list[float] | None
    seeds: list[int] | None
    tol: dict[str, float]
    output: str | None
    format: str
    jobs: int
    quick: bool
    require_convex: bool
    adversarial: bool
    family: str
    dalpha: float
    max_steps: int
    lin_tol: float
    progress_every: int
    seed_base: int = 0

    @property
    def kind(self) -> str:
        return "path" if self.graph == "path" else "hamming"


def _seed_base() -> int:
    raw = os.environ.get(SEED_ENV, "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV} must be an integer") from exc


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge CLI flags over the JSON config file over built-in defaults."""
    file_cfg: dict[str, Any] = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS) - {"tolerances"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "tolerances" in file_cfg and "tol" not in file_cfg:
            file_cfg["tol"] = file_cfg.pop("tolerances")

    def pick(key: str) -> Any:
        v = getattr(args, key, None)
        if v is not None:
            return v
        return file_cfg.get(key, DEFAULTS[key])

    graph = pick("graph")
    if graph not in ("path", "hypercube"):
        raise UsageError(f"graph must be 'path' or 'hypercube', got {graph!r}")
    fmt = pick("format")
    if fmt not in ("json", "csv"):
        raise UsageError(f"format must be 'json' or 'csv', got {fmt!r}")
    family = pick("family")
    if family not in FAMILIES:
        raise UsageError(f"family must be one of {', '.join(FAMILIES)}")
    base = _seed_base()
    seeds_raw = pick("seeds")
    seeds = [s + base for s in parse_int_range(seeds_raw)] if seeds_raw is not None else None
    alpha_raw = pick("alpha_range")
    alphas = parse_alpha_range(alpha_raw) if alpha_raw is not None else None
    jobs = int(pick("jobs"))
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    alpha = pick("alpha")
    # an explicit size on the command line beats any range from the config file
    if args.n_range is not None:
        n_range = args.n_range
    elif args.n is not None:
        n_range = str(args.n)
    else:
        n_range = file_cfg.get("n_range", file_cfg.get("n"))
    cfg = RunConfig(
        command=args.command,
        graph=graph,
        n=int(pick("n")),
        ns=parse_int_range(n_range if n_range is not None else DEFAULTS["n_range"]),
        potential=parse_potential(pick("potential")),
        alpha=float(alpha) if alpha is not None else None,
        alphas=alphas,
        seeds=seeds,
        tol=parse_tol(pick("tol")),
        output=pick("output"),
        format=fmt,
        jobs=jobs,
        quick=bool(pick("quick")),
        require_convex=bool(pick("require_convex")),
        adversarial=bool(pick("adversarial")),
        family=family,
        dalpha=float(pick("dalpha")),
        max_steps=int(pick("max_steps")),
        lin_tol=float(pick("lin_tol")),
        progress_every=int(pick("progress_every")),
        seed_base=base,
    )
    if cfg.dalpha <= 0 or cfg.lin_tol <= 0 or cfg.max_steps < 0:
        raise UsageError("--dalpha and --lin-tol must be positive, --max-steps nonnegative")
    return cfg


def make_potential(spec: dict, kind: str, n: int, alpha: float | None = None, seed: int | None = None):
    spec = dict(spec) if spec else {"generator": "flat"}
    if "kind" in spec and spec["kind"] != kind:
        raise UsageError(f"potential kind {spec['kind']!r} does not match the graph")
    spec["kind"] = kind
    if "values" not in spec:
        params = dict(spec.get("params", {}))
        params.setdefault("n", n)
        if alpha is not None:
            params["alpha"] = alpha
        if seed is not None:
            params["seed"] = seed
        spec["params"] = params
    return potential_from_spec(spec, kind, n)


def _bound_for(W) -> float:
    return flat_bound(W)


# --- output -----------------------------------------------------------------

def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def _csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _json(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _clean(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output and cfg.output != "-":
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _timestamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


# --- gap ----------------------------------------------------------------------

def cmd_gap(cfg: RunConfig) -> int:
    seed = cfg.seeds[0] if cfg.seeds else None
    W = make_potential(cfg.potential, cfg.kind, cfg.n, cfg.alpha, seed)
    if cfg.require_convex and not is_convex(W.values):
        print("error: potential is not convex (--require-convex)", file=sys.stderr)
        return EXIT_USAGE
    J = build_operator(W)
    report = an.gap_report(J, _bound_for(W), cfg.tol["solver"])
    row = {"N": W.n, "graph": cfg.graph, **report.to_dict(), "convex": is_convex(W.values)}
    if cfg.format == "csv":
        row["alpha_or_seed"] = cfg.alpha if cfg.alpha is not None else seed
        row["seed"] = seed
        row["status"] = "ok" if report.margin >= -cfg.tol["margin"] else "violation"
        _emit(cfg, _csv([row], CSV_COLUMNS))
    else:
        _emit(cfg, _json({**row, "timestamp": _timestamp()}))
    return EXIT_OK if report.margin >= -cfg.tol["margin"] else EXIT_VIOLATION


# --- sweep --------------------------------------------------------------------

@dataclass(frozen=True)
class Case:
    family: str
    graph: str
    n: int
    alpha: float | None
    seed: int | None
    potential: dict
    tol: dict


def _default_potential(family: str, spec: dict, seed: int | None) -> dict:
    if spec:
        return spec
    if family in ("node", "ordering", "closed-form"):
        return {"generator": "unit-linear"}
    if family == "bound" and seed is None:
        return {"generator": "unit-linear"}
    return {"generator": "random-convex"}


def run_case(case: Case) -> dict:
    """Evaluate one grid point; never raises."""
    row: dict[str, Any] = {
        "N": case.n,
        "alpha_or_seed": case.alpha if case.alpha is not None else case.seed,
        "alpha": case.alpha,
        "seed": case.seed,
        "status": "ok",
    }
    kind = "path" if case.graph == "path" else "hamming"
    try:
        spec = _default_potential(case.family, case.potential, case.seed)
        alpha = case.alpha
        if case.family == "hf":
            # the family is H_{alpha W}: the potential itself stays at unit scale
            W = make_potential(spec, kind, case.n, None, case.seed)
            J = build_operator(type(W)(W.values * (alpha or 0.0)))
        else:
            W = make_potential(spec, kind, case.n, alpha, case.seed)
            J = build_operator(W)
        rep = an.gap_report(J, _bound_for(W), case.tol["solver"])
        row.update(rep.to_dict())
        value, bad = _family_value(case, W, J, rep)
        row["value"] = value
        if bad:
            row["status"] = "violation"
    except Exception as exc:
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _family_value(case: Case, W, J, rep: an.GapReport) -> tuple[float, bool]:
    fam = case.family
    if fam == "bound":
        return rep.margin, rep.margin < -case.tol["margin"]
    if fam == "node":
        if case.graph != "path":
            raise UsageError("node family runs on paths")
        x = rep.node_position
        return x, x > (case.n + 1) / 2.0 + an.NODE_SLACK
    if fam == "ordering":
        if case.graph != "path":
            raise UsageError("ordering family runs on paths")
        _, p2 = an.lowest_two(J)
        u = p2.vector
        ok = (
            an.check_ordering(u, an.nodes(u).first)
            and an.check_ordering_interpolated(u)
            and an.check_decreasing_region(u)
        )
        return float(ok), not ok
    if fam == "casoratian":
        p1, p2 = an.lowest_two(J)
        gap = p2.value - p1.value
        if case.graph == "path":
            w = an.casoratian(p2.vector, p1.vector, gap=gap).w
            top = float(np.max(w))
            return top, top > 1e-10
        T = vprime_transform(case.n)
        c = an.casoratian(T.apply(p2.vector), T.apply(p1.vector), weights=T.weights, gap=gap)
        top = float(np.max(c.interior))
        return top, not top < 0.0
    if fam == "hf":
        fam_ = an.DiagonalFamily.scaled_potential(W)
        a = case.alpha or 0.0
        hf = an.gap_derivative(fam_, a)
        fd = an.fd_gap_derivative(fam_, a)
        rel = abs(hf - fd) / max(abs(fd), 1e-300)
        return rel, rel > HF_RTOL
    if fam == "interlacing":
        worst = max(an.interlacing_violation(J, k) for k in range(1, J.n))
        return worst, worst > 1e-9
    if fam == "closed-form":
        if case.graph != "hypercube":
            raise UsageError("closed-form family runs on the hypercube")
        a = case.alpha or 0.0
        n = case.n
        vals = eigenvalues_lowest(build_hypercube_reduced(W, True), n + 1)
        exact = np.array([k - n / 2.0 for k in range(n + 1)]) * math.sqrt(4.0 + a * a)
        dev = float(np.max(np.abs(vals - exact)))
        return dev, dev > 1e-8 * (1.0 + a)
    raise UsageError(f"unknown family {fam!r}")


def sweep_cases(cfg: RunConfig) -> list[Case]:
    fam = cfg.family
    alphas = cfg.alphas
    seeds = cfg.seeds
    if alphas is None and fam in _ALPHA_FAMILIES:
        alphas = parse_alpha_range("0:10:41") if fam != "hf" else [cfg.alpha if cfg.alpha is not None else 0.7]
        if fam == "closed-form":
            alphas = [0.0, 0.5, 1.0, 3.0]
    if seeds is None and fam in ("bound", "casoratian", "interlacing", "hf") and not cfg.potential:
        seeds = [s + cfg.seed_base for s in range(10)]
    if alphas is None and cfg.alpha is not None:
        alphas = [cfg.alpha]
    cases = []
    for n in cfg.ns:
        for a in alphas or [None]:
            for s in seeds or [None]:
                cases.append(Case(fam, cfg.graph, n, a, s, cfg.potential, cfg.tol))
    return cases


def _mark_node_drift(rows: list[dict]) -> None:
    """Node positions must not move right as alpha grows, per N."""
    last: dict[int, tuple[float, float]] = {}
    for r in rows:
        if r["status"] == "error" or r.get("alpha") is None:
            continue
        prev = last.get(r["N"])
        if prev is not None and r["alpha"] >= prev[0] and r["node_x"] > prev[1] + an.NODE_SLACK:
            r["status"] = "violation"
        last[r["N"]] = (r["alpha"], r["node_x"])


def cmd_sweep(cfg: RunConfig) -> int:
    cases = sweep_cases(cfg)
    if not cases:
        raise UsageError("empty sweep grid")
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(run_case, cases, chunksize=max(1, len(cases) // (4 * cfg.jobs))))
    else:
        rows = [run_case(c) for c in cases]
    if cfg.family == "node":
        _mark_node_drift(rows)
    violations = sum(r["status"] == "violation" for r in rows)
    errors = sum(r["status"] == "error" for r in rows)
    summary = {"cases": len(rows), "violations": violations, "errors": errors}
    if cfg.format == "csv":
        _emit(cfg, _csv(rows, CSV_COLUMNS))
    else:
        _emit(cfg, _json({
            "command": "sweep",
            "family": cfg.family,
            "graph": cfg.graph,
            "summary": summary,
            "rows": rows,
            "timestamp": _timestamp(),
        }))
    print(f"sweep {cfg.family}: {len(rows)} cases, {violations} violations, {errors} errors", file=sys.stderr)
    return EXIT_OK if violations == 0 and errors == 0 else EXIT_VIOLATION


# --- flow ---------------------------------------------------------------------

def cmd_flow(cfg: RunConfig) -> int:
    seed = cfg.seeds[0] if cfg.seeds else None
    spec = cfg.potential or {"generator": "random-convex"}
    W = make_potential(spec, cfg.kind, cfg.n, cfg.alpha, seed)
    if not is_convex(W.values):
        print("error: the flow needs a convex starting potential", file=sys.stderr)
        return EXIT_USAGE

    def progress(step: int, state) -> None:
        if cfg.progress_every and step % cfg.progress_every == 0:
            print(
                f"step {step}: alpha={state.alpha:.4f} gap={state.gap:.12g} "
                f"residual={state.linearity_residual:.3e}",
                file=sys.stderr,
            )

    trace = flow_to_linear(W, cfg.dalpha, cfg.max_steps, cfg.lin_tol, on_step=progress)
    if cfg.format == "csv":
        _emit(cfg, _csv([s.to_dict() for s in trace.states], FLOW_COLUMNS))
    else:
        _emit(cfg, trace.to_jsonl())
    increase = trace.max_gap_increase()
    final = trace.final
    print(
        f"flow {trace.terminated_reason}: {len(trace.states)} states, final gap {final.gap:.12g}, "
        f"bound {flat_bound(W):.12g}, max gap increase {increase:.3e}"
        + (f", error: {trace.error}" if trace.error else ""),
        file=sys.stderr,
    )
    if trace.terminated_reason == MAX_STEPS:
        return EXIT_MAX_STEPS
    if trace.terminated_reason != CONVERGED:
        return EXIT_STEP_FAILURE
    if increase > 1e-10 or final.gap < flat_bound(W) - cfg.tol["margin"]:
        return EXIT_VIOLATION
    return EXIT_OK


# --- verify -------------------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> int:
    suite = SuiteConfig(quick=cfg.quick, adversarial=cfg.adversarial, seed_base=cfg.seed_base)
    to_stdout = not cfg.output or cfg.output == "-"

    def live(row) -> None:
        status = "pass" if row.passed else "FAIL"
        print(f"  {row.name}: {status} ({row.cases} cases, {row.seconds:.1f}s)", file=sys.stderr)

    rows = run_suite(suite, live)
    table = format_table(rows)
    dicts = [r.to_dict() for r in rows]
    if to_stdout:
        print(table)
    else:
        if cfg.format == "csv":
            _emit(cfg, _csv(dicts, ("check", "passed", "cases", "violations", "errors", "worst_slack", "detail")))
        else:
            _emit(cfg, _json({"command": "verify", "rows": dicts, "timestamp": _timestamp()}))
        print(table, file=sys.stderr)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VIOLATION


# --- entry point ----------------------------------------------------------------

EPILOG = (
    "CSV columns (sweep, gap): " + ", ".join(CSV_COLUMNS) + ". "
    "alpha_or_seed holds alpha when the grid varies alpha, else the seed. "
    "CSV columns (flow): " + ", ".join(FLOW_COLUMNS) + ". "
    "Floats are written with 17 significant digits. "
    f"Exit codes: {EXIT_OK} ok, {EXIT_VIOLATION} violation, {EXIT_USAGE} usage error, "
    f"{EXIT_MAX_STEPS} flow hit --max-steps, {EXIT_STEP_FAILURE} flow step failed. "
    f"{SEED_ENV} offsets every seed."
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", choices=("path", "hypercube"), help="graph family (default path)")
    common.add_argument("--n", type=int, help="size: path vertices or hypercube dimension")
    common.add_argument("--n-range", help="sizes for sweeps, e.g. 3:50 or 4,8,16")
    common.add_argument(
        "--potential",
        help="generator name (" + ", ".join(GENERATORS) + "), inline JSON, or @file.json",
    )
    common.add_argument("--alpha", type=float, help="slope / scale parameter for generators")
    common.add_argument("--alpha-range", help="start:stop:count or a comma list")
    common.add_argument("--seeds", help="seed range, e.g. 0:99")
    common.add_argument("--tol", help="margin tolerance, or name=value pairs (margin, solver)")
    common.add_argument("--output", help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), help="output format (default json)")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--quick", action="store_true", default=None, help="reduced verify grid")
    common.add_argument("--require-convex", action="store_true", default=None, help="reject non-convex potentials")
    common.add_argument("--adversarial", action="store_true", default=None, help="inject non-convex cases into verify")
    common.add_argument("--family", choices=FAMILIES, help="sweep invariant family (default bound)")
    common.add_argument("--dalpha", type=float, help="flow step size (default 0.05)")
    common.add_argument("--max-steps", type=int, help="flow step limit")
    common.add_argument("--lin-tol", type=float, help="flow linearity tolerance (default 1e-6)")
    common.add_argument("--progress-every", type=int, help="report flow progress every k steps")

    parser = argparse.ArgumentParser(
        prog="specgap",
        description="Fundamental gaps of Schroedinger operators on paths and hypercubes.",
        epilog=EPILOG,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gap", parents=[common], help="gap and diagnostics for one potential", epilog=EPILOG)
    sub.add_parser("sweep", parents=[common], help="run an invariant family over a grid", epilog=EPILOG)
    sub.add_parser("flow", parents=[common], help="flow a convex potential to a line", epilog=EPILOG)
    sub.add_parser("verify", parents=[common], help="lemma-by-lemma verification table", epilog=EPILOG)
    return parser


COMMANDS = {"gap": cmd_gap, "sweep": cmd_sweep, "flow": cmd_flow, "verify": cmd_verify}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
