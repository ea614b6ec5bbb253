"""Command-line entry point: ``modtopo <command> ...``.

Exit status is 0 when the command succeeds and every certificate or
threshold it checks passes, 1 when a certificate or threshold fails, and 2
on input errors (unreadable files, metric axiom violations, budgets).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .bilipschitz import lip_bound, lip_exact
from .certify import SUITES, run_certify
from .conformal_density import (DensityExperiment, discretization_error, run_density,
                                write_history_csv)
from .correspondence import gh_bound, gh_exact
from .eps_isometry import eps_bound, eps_exact
from .io import (ParseError, build_manifold, dumps, field_from_dict, load_manifold,
                 load_space, save_manifold, save_result)
from .metric_core import Tolerance, diameter, validate
from .smooth_lipschitz import sl_bound

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _uint(bits: int):
    def parse(text: str) -> int:
        v = int(text, 10)
        if not 0 <= v < 2**bits:
            raise argparse.ArgumentTypeError(f"{text} is not an unsigned {bits}-bit integer")
        return v
    parse.__name__ = f"u{bits}"
    return parse


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"{text} must be a nonnegative number")
    return v


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    tolerance: Tolerance
    out: Path | None
    flags: dict

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        flags = {k: v for k, v in vars(args).items() if k not in ("func",)}
        tol = Tolerance(getattr(args, "tol_abs", 1e-9), getattr(args, "tol_rel", 0.0))
        out = Path(args.out) if getattr(args, "out", None) else None
        cmd = " ".join(str(flags[k]) for k in ("command", "kind") if flags.get(k))
        return cls(cmd, getattr(args, "seed", 0), tol, out, flags)


def _emit(doc: dict, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(dumps(doc) + "\n")
    else:
        save_result(doc, out)


def _cmd_validate(cfg: RunConfig) -> int:
    X = load_space(cfg.flags["path"])
    validate(X.dist, labels=X.labels, tol=cfg.tolerance)
    _emit({"valid": True, "n": X.n, "diameter": diameter(X)}, cfg.out)
    return EXIT_OK


def _cmd_gen(cfg: RunConfig) -> int:
    desc = load_manifold(cfg.flags["manifold"])
    for key in ("n", "mode", "seed", "knn"):
        if cfg.flags.get(key) is not None:
            desc[key] = cfg.flags[key]
            if key != "knn":
                desc["params"] = None
    M = build_manifold(desc, name=Path(cfg.flags["manifold"]).stem)
    side = save_manifold(M, cfg.out)
    print(f"wrote {cfg.out} ({M.n} points) and {side}")
    return EXIT_OK


def _cmd_dist(cfg: RunConfig) -> int:
    f = cfg.flags
    kind, method, budget, seed = f["kind"], f["method"], f["budget"], f["seed"]
    X, Y = load_space(f["x"]), load_space(f["y"])
    start = time.perf_counter()
    if kind == "gh":
        r = gh_exact(X, Y) if method == "exact" else gh_bound(X, Y, budget, seed)
        doc = {"lower": r.lower, "upper": r.upper,
               "witness": [list(p) for p in r.witness.sorted_pairs()]}
    elif kind == "eps":
        r = eps_exact(X, Y) if method == "exact" else eps_bound(X, Y, budget, seed)
        doc = {"value": r.value, "lower": r.value if method == "exact" else 0.0, "upper": r.value,
               "witness": {"xy": list(r.witness_xy.assignment),
                           "yx": list(r.witness_yx.assignment)}}
    else:
        r = lip_exact(X, Y) if method == "exact" or X.n != Y.n else lip_bound(X, Y, budget, seed)
        v = r.value  # written as the string "inf" when no bijection exists
        doc = {"value": v, "lower": v if r.method == "exact" else 0.0, "upper": v,
               "witness": list(r.witness.perm) if r.witness is not None else None}
    doc.update({"distance": kind, "method": method, "seed": seed, "budget": budget,
                "wall_ms": 1000.0 * (time.perf_counter() - start)})
    _emit(doc, cfg.out)
    return EXIT_OK


def _diffeo_to_dict(p) -> dict:
    return {"matrix": [list(r) for r in p.matrix], "translation": list(p.translation),
            "angles": list(p.angles),
            "flow": [[list(a) if isinstance(a, tuple) else a for a in term] for term in p.flow],
            "flow_time": p.flow_time, "inverse": p.inverse}


def _cmd_sl(cfg: RunConfig) -> int:
    f = cfg.flags
    A = build_manifold(load_manifold(f["manifold_x"]))
    B = build_manifold(load_manifold(f["manifold_y"]))
    start = time.perf_counter()
    r = sl_bound(A, B, f["degree"], f["budget"], f["seed"], f["restarts"])
    doc = {"value": r.value, "padding": r.padding,
           "witness": _diffeo_to_dict(r.witness), "snap": list(r.snap),
           "evaluations": r.evaluations, "distance": "sl", "degree": f["degree"],
           "restarts": f["restarts"], "seed": f["seed"], "budget": f["budget"],
           "wall_ms": 1000.0 * (time.perf_counter() - start)}
    _emit(doc, cfg.out)
    return EXIT_OK


def _read_config(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno, path) from None


def _cmd_density(cfg: RunConfig) -> int:
    """Config keys: base, target (manifold fields), search settings, thresholds.

    ``thresholds.max_ratio`` bounds final/initial gh_upper,
    ``thresholds.max_final_upper`` bounds the final gh_upper and
    ``thresholds.max_final_upper_vs_discretization`` bounds it as a multiple
    of the target's own discretization error; all optional.
    """
    conf = _read_config(cfg.flags["config"])
    try:
        base = field_from_dict(conf["base"])
        target = field_from_dict(conf["target"])
    except KeyError as e:
        raise ParseError(f"missing field {e.args[0]!r}", 1, 1, cfg.flags["config"]) from None
    seed = cfg.flags["seed"] if cfg.flags["seed"] is not None else int(conf.get("seed", 0))
    exp = run_density(DensityExperiment(base, target, int(conf.get("degree", 1))),
                      n_samples=int(conf.get("n_samples", 64)), knn=int(conf.get("knn", 8)),
                      budget=int(conf.get("budget", 200)), seed=seed,
                      inner_budget=int(conf.get("inner_budget", 300)),
                      final_budget=int(conf.get("final_budget", 5000)))
    write_history_csv(exp, cfg.out)
    th = conf.get("thresholds", {})
    ratio = exp.final_upper / exp.initial_upper if exp.initial_upper > 0 else 0.0
    ok = True
    if "max_ratio" in th:
        ok &= ratio <= float(th["max_ratio"])
    if "max_final_upper" in th:
        ok &= exp.final_upper <= float(th["max_final_upper"])
    if "max_final_upper_vs_discretization" in th:
        disc = discretization_error(target, int(conf.get("n_samples", 64)),
                                    int(conf.get("knn", 8)))
        print(f"discretization error {disc:.6g}")
        ok &= exp.final_upper <= float(th["max_final_upper_vs_discretization"]) * disc
    print(f"initial gh_upper {exp.initial_upper:.6g}  final gh_upper {exp.final_upper:.6g}  "
          f"ratio {ratio:.4g}  {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_certify(cfg: RunConfig) -> int:
    f = cfg.flags
    report = run_certify(f["suite"], f["trials"], f["seed"], cfg.tolerance)
    _emit(report.to_dict(), cfg.out)
    for e in report.entries:
        print(f"{'PASS' if e.passed else 'FAIL'}  {e.name}  "
              f"n={e.instances}  max_violation={e.max_violation:.3g}",
              file=sys.stderr if cfg.out is None else sys.stdout)
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modtopo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, budget=True, seed=True, out_required=False):
        if seed:
            sp.add_argument("--seed", type=_uint(64), default=0)
        if budget:
            sp.add_argument("--budget", type=_uint(64), default=2000)
        sp.add_argument("--out", required=out_required)

    v = sub.add_parser("validate", help="check a space file against the metric axioms")
    v.add_argument("path")
    v.add_argument("--tol-abs", type=_nonneg_float, default=0.0)
    v.add_argument("--tol-rel", type=_nonneg_float, default=1e-9)
    common(v, budget=False, seed=False)
    v.set_defaults(func=_cmd_validate)

    g = sub.add_parser("gen", help="discretize a manifold description into a space file")
    g.add_argument("--manifold", required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--mode", choices=("grid", "random"))
    g.add_argument("--knn", type=int)
    g.add_argument("--seed", type=_uint(64))
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    d = sub.add_parser("dist", help="distance between two spaces or manifolds")
    dsub = d.add_subparsers(dest="kind", required=True)
    for kind in ("gh", "eps", "lip"):
        k = dsub.add_parser(kind)
        k.add_argument("--x", required=True)
        k.add_argument("--y", required=True)
        k.add_argument("--method", choices=("exact", "anneal"), default="exact")
        common(k)
        k.set_defaults(func=_cmd_dist)
    s = dsub.add_parser("sl")
    s.add_argument("--manifold-x", required=True)
    s.add_argument("--manifold-y", required=True)
    s.add_argument("--degree", type=int, default=1)
    s.add_argument("--restarts", type=int, default=4)
    common(s)
    s.set_defaults(func=_cmd_sl, budget=1000)

    e = sub.add_parser("experiment", help="numerical experiments")
    esub = e.add_subparsers(dest="kind", required=True)
    cd = esub.add_parser("conformal-density")
    cd.add_argument("--config", required=True)
    cd.add_argument("--seed", type=_uint(64), default=None)
    cd.add_argument("--out", required=True)
    cd.set_defaults(func=_cmd_density)

    c = sub.add_parser("certify", help="check every comparison inequality on random instances")
    c.add_argument("--suite", choices=SUITES + ("all",), default="all")
    c.add_argument("--trials", type=_uint(32), default=200)
    c.add_argument("--tol-abs", type=_nonneg_float, default=1e-9)
    c.add_argument("--tol-rel", type=_nonneg_float, default=0.0)
    common(c, budget=False)
    c.set_defaults(func=_cmd_certify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        return args.func(cfg)
    except (ParseError, OSError, ValueError, KeyError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
