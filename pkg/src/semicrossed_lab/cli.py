"""Command-line runner: parse a config, run verification tasks, emit a report.

Exit codes: 0 when every verdict is pass or skip, 1 when any task fails,
2 for configuration errors.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys as _sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__
from . import commutant, dynamics, generators, reflexivity, semicrossed, similarity
from .config import TASKS, Config, config_from_dict, parse_config, parse_row
from .errors import ConfigError, LabError
from .fock import ABELIAN, FREE
from .linops import compare_spans

TOOL = "semicrossed-lab"


class Skip(Exception):
    """Raised by a task that does not apply to the configured system."""


def _result(verdict: str, residual: float, tol: float, /, **details) -> dict:
    return {"verdict": verdict, "max_residual": float(residual), "tolerance": tol,
            "details": details}


def _judge(residual: float, tol: float, /, ok: bool = True, **details) -> dict:
    finite = math.isfinite(residual) and residual >= 0
    verdict = "pass" if (finite and ok and residual <= tol) else "fail"
    return _result(verdict, residual if finite else -1.0, tol, **details)


# ---------------------------------------------------------------------------
# tasks; each gets (system, config, tolerance, rng)


def task_covariance(sys, cfg, tol, rng):
    rep = dynamics.check_covariance(sys, tol)
    return _judge(rep.max_residual, tol, **rep.as_dict())


def task_fourier(sys, cfg, tol, rng):
    count = int(cfg.params.get("fourier", {}).get("operators", 10))
    top = sys.fock.max_degree
    quad, resolution = 0.0, 0.0
    for _ in range(count):
        T = generators.random_operator(sys.fock, sys.h, rng)
        total = None
        for m in range(-top, top + 1):
            G = generators.fourier_graded(T, m)
            quad = max(quad, (generators.fourier_quadrature(T, m) - G).norm())
            total = G if total is None else total + G
        resolution = max(resolution, (total - T).norm())
    return _judge(max(quad, resolution), tol, operators=count,
                  quadrature_residual=quad, resolution_residual=resolution)


def task_cesaro(sys, cfg, tol, rng):
    opts = cfg.params.get("cesaro", {})
    count = int(opts.get("operators", 5))
    n_max = int(opts.get("n_max", 64))
    increase, excess = 0.0, 0.0
    for _ in range(count):
        T = generators.random_operator(sys.fock, sys.h, rng)
        prev = None
        for n in range(n_max + 1):
            err = (generators.cesaro(T, n) - T).norm()
            excess = max(excess, err - generators.cesaro_error_bound(T, n))
            if prev is not None:
                increase = max(increase, err - prev)
            prev = err
    return _judge(max(increase, excess, 0.0), tol, operators=count, n_max=n_max,
                  max_increase=increase, max_bound_excess=excess)


def task_membership(sys, cfg, tol, rng):
    trials = int(cfg.params.get("membership", {}).get("trials", 50))
    sides = ["left"] if sys.kind == ABELIAN else ["left", "right"]
    errors, worst, rejected = [], 0.0, {}
    for side in sides:
        for t in range(trials):
            T, _ = semicrossed.random_span_element(sys, rng, side)
            m = semicrossed.membership(sys, T, side, tol)
            worst = max(worst, m.residual)
            if not m.member:
                errors.append({"side": side, "trial": t, **m.as_dict()})
        for name, B in semicrossed.corrupted_battery(sys, rng, side):
            m = semicrossed.membership(sys, B, side, tol)
            rejected[f"{side}:{name}"] = m.condition
            if m.member:
                errors.append({"side": side, "corruption": name})
    return _judge(worst, tol, ok=not errors, trials=trials, misclassified=errors,
                  rejections=rejected)


def task_commutant(sys, cfg, tol, rng):
    if sys.h * sys.fock.size > commutant.MAX_COMMUTANT_DIM:
        raise Skip(f"h*D = {sys.h * sys.fock.size} exceeds the commutant cap")
    Ap = commutant.matrix_commutant(list(sys.algebra), tol)
    exact = commutant.is_exact_instance(sys, commutant.MAX_COMMUTANT_DIM)
    if exact:
        cmp = commutant.compare_graded_spans(sys, 1, tol, "left", Ap)
        ok, res = cmp["relation"] == "equal", cmp["max_residual"]
    else:
        # only the degree <= 1 generators must solve the windowed constraints
        window = sys.window(1) if sys.windowed else None
        cmp = commutant.compare_graded_spans(sys, 1, tol, "left", Ap, depth=1, window=window)
        ok = cmp["relation"] in ("equal", "predicted<graded")
        res = cmp["predicted_in_graded_residual"]
    return _judge(res, tol, ok=ok, exact_instance=exact, commutant_dim=Ap.dim, **cmp)


def task_bicommutant(sys, cfg, tol, rng):
    A = sys.algebra
    App = commutant.bicommutant(A, tol)
    A4 = commutant.bicommutant(App, tol)
    contain = compare_spans(A, App, tol)
    idem = compare_spans(App, A4, tol)
    ok = contain.relation in ("equal", "A<B") and idem.relation == "equal"
    return _judge(max(contain.residual_a_in_b, idem.max_residual), tol, ok=ok,
                  algebra_dim=A.dim, bicommutant_dim=App.dim,
                  bicommutant_property=contain.relation == "equal")


def task_thm41(sys, cfg, tol, rng):
    rep = commutant.verify_thm_4_1(sys, tol)
    return _judge(rep.max_identity_residual, tol, ok=rep.passed, **rep.as_dict())


def task_similarity(sys, cfg, tol, rng):
    if sys.kind != FREE:
        raise Skip("similarity applies to free systems")
    rep = similarity.verify_similarity(sys, tol=tol)
    return _judge(rep.max_residual, tol, ok=rep.bound_ok, **rep.as_dict())


def task_decompose(sys, cfg, tol, rng):
    if sys.kind != ABELIAN or sys.d < 2:
        raise Skip("decomposition applies to abelian systems with d >= 2")
    box = cfg.params.get("decompose", {}).get("L", sys.L)
    rep = semicrossed.decompose_abelian(sys, int(box), tol)
    return _judge(rep.max_residual, tol, **rep.as_dict())


def task_commuting(sys, cfg, tol, rng):
    opts = cfg.params.get("commuting", {})
    if "a" in opts and "b" in opts:
        a = parse_row(opts["a"], "params.commuting.a")
        b = parse_row(opts["b"], "params.commuting.b")
        window = opts.get("window", list(np.intersect1d(a.window_indices, b.window_indices)))
        res = dynamics.check_commuting(a, b, window, tol)
        return _judge(res.residual, tol, worst=res.worst)
    if sys.kind != ABELIAN or sys.d < 2:
        raise Skip("no endomorphism pair declared")
    worst, where = 0.0, None
    for i in range(sys.d):
        for j in range(i + 1, sys.d):
            res = dynamics.check_commuting(sys.rows[i], sys.rows[j], sys.window(2), tol)
            if res.residual >= worst:
                worst, where = res.residual, [i + 1, j + 1, res.worst]
    return _judge(worst, tol, worst=where)


def task_laca(sys, cfg, tol, rng):
    opts = cfg.params.get("laca", {})
    if "s" in opts and "t" in opts:
        s = parse_row(opts["s"], "params.laca.s")
        t = parse_row(opts["t"], "params.laca.t")
        window = opts.get("window", list(np.intersect1d(s.window_indices, t.window_indices)))
    elif sys.kind == ABELIAN and sys.d >= 2:
        s, t, window = sys.rows[0], sys.rows[1], sys.window(2)
    else:
        raise Skip("no family pair declared")
    res = dynamics.laca_intertwiner(s, t, window, tol)
    W = [[[float(z.real), float(z.imag)] for z in row] for row in res.W]
    return _judge(max(res.equation_residual, res.unitarity_residual), tol,
                  equation_residual=res.equation_residual,
                  unitarity_residual=res.unitarity_residual, W=W)


def task_reflexivity(sys, cfg, tol, rng):
    opts = cfg.params.get("reflexivity", {})
    trials = int(opts.get("trials", reflexivity.DEFAULT_TRIALS))
    seed = int(rng.integers(2 ** 32))
    cert = reflexivity.certify(sys.algebra, trials, seed, 1e-9)
    cover = cert.cover
    contain = compare_spans(sys.algebra, cover.basis, tol)
    details = cert.as_dict()
    ok = cover.stabilized and contain.relation in ("equal", "A<B")
    residual = contain.residual_a_in_b
    if sys.kind == FREE:
        T, _ = semicrossed.random_span_element(sys, rng, "left")
        member = reflexivity.ref_necessary_semicrossed(sys, T, tol, cover)
        shift_adj = dynamics.L(sys, (1,)).adjoint()
        adj = reflexivity.ref_necessary_semicrossed(sys, shift_adj, tol, cover)
        details["necessary_on_member"] = member.as_dict()
        details["necessary_on_adjoint"] = adj.as_dict()
        ok = ok and member.passed and not adj.passed
        residual = max(residual, member.block_residual)
    return _judge(residual, tol, ok=ok, **details)


TASK_FUNCS: Dict[str, Callable] = {
    "covariance": task_covariance,
    "fourier": task_fourier,
    "cesaro": task_cesaro,
    "membership": task_membership,
    "commutant": task_commutant,
    "bicommutant": task_bicommutant,
    "thm41": task_thm41,
    "similarity": task_similarity,
    "decompose": task_decompose,
    "commuting": task_commuting,
    "laca": task_laca,
    "reflexivity": task_reflexivity,
}


# ---------------------------------------------------------------------------
# orchestration


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _run_task(name: str, sys, cfg: Config) -> dict:
    tol = cfg.tolerances[name]
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, TASKS.index(name)]))
    try:
        out = TASK_FUNCS[name](sys, cfg, tol, rng)
    except Skip as exc:
        out = _result("skip", 0.0, tol, reason=str(exc))
    except (LabError, ValueError, np.linalg.LinAlgError) as exc:
        out = _result("fail", 0.0, tol, error=f"{type(exc).__name__}: {exc}")
    return {"task": name, **_jsonable(out)}


def run(cfg: Config, parallel: bool = False) -> dict:
    """Execute the configured tasks in canonical order and assemble a report."""
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    system_error = None
    try:
        sys = cfg.build_system()
    except LabError as exc:
        sys, system_error = None, f"{type(exc).__name__}: {exc}"
    runtimes = {}

    def timed(name):
        t0 = time.perf_counter()
        if sys is None:
            res = {"task": name, "verdict": "fail", "max_residual": 0.0,
                   "tolerance": cfg.tolerances[name], "details": {"error": system_error}}
        else:
            res = _run_task(name, sys, cfg)
        runtimes[name] = round(time.perf_counter() - t0, 6)
        return res

    if parallel and len(cfg.tasks) > 1:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(timed, cfg.tasks))
    else:
        results = [timed(name) for name in cfg.tasks]
    summary = {v: sum(r["verdict"] == v for r in results) for v in ("pass", "fail", "skip")}
    return {
        "tool": TOOL,
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.raw,
        "tasks": results,
        "summary": summary,
        # wall-clock data lives here only and is excluded from determinism
        "timestamp": {"started": started, "runtimes": runtimes},
    }


def exit_code(report: dict) -> int:
    return 1 if any(t["verdict"] == "fail" for t in report["tasks"]) else 0


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def render_text(report: dict) -> str:
    lines = [f"{report['tool']} {report['version']}  seed={report['seed']}",
             f"{'task':<12} {'verdict':<7} {'max_residual':>12} {'tolerance':>10}"]
    for t in report["tasks"]:
        lines.append(f"{t['task']:<12} {t['verdict']:<7} {t['max_residual']:>12.3e} "
                     f"{t['tolerance']:>10.1e}")
    s = report["summary"]
    lines.append(f"pass={s['pass']} fail={s['fail']} skip={s['skip']}")
    return "\n".join(lines) + "\n"


def emit(report: dict, path: Optional[str] = None, fmt: str = "json") -> None:
    if fmt not in ("json", "text"):
        raise ValueError(f"unknown format {fmt!r}")
    text = render_json(report) if fmt == "json" else render_text(report)
    if path is None or path == "-":
        _sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="path to the JSON configuration")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "text"), help="report format")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--tol", type=float, help="override every task tolerance")
    p.add_argument("--parallel", action="store_true", help="run independent tasks concurrently")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2 ** 64:
                raise ConfigError("seed must be an unsigned 64-bit integer", "--seed")
            cfg.seed = args.seed
        if args.tol is not None:
            if not args.tol > 0:
                raise ConfigError("tolerance must be positive", "--tol")
            cfg.tolerances = {k: args.tol for k in cfg.tolerances}
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2
    report = run(cfg, args.parallel)
    try:
        emit(report, args.out or cfg.out, args.format or cfg.format)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=_sys.stderr)
        return 2
    return exit_code(report)


if __name__ == "__main__":
    raise SystemExit(main())
