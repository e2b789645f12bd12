"""Command-line front end.

Every command prints a JSON summary on stdout; with ``--out DIR`` it also
writes ``<command>.json`` and CSV artifacts there.  Exit codes: 0 success,
2 configuration error, 3 invariant violation, 4 depth cap or budget exceeded.
"""
import argparse
import json
import logging
import math
import os
import sys as _sys

import mpmath
import numpy as np

from . import __version__
from .config import RunConfig
from .errors import (BudgetError, ConfigError, DepthCapError, GapError, InvariantViolation,
                     ParameterError, ValidationError)
from .output import dumps_json, emit_plotdata, write_csv, write_json

log = logging.getLogger("hypercantor")

COMMANDS = ("validate", "levels", "scaling", "ratioset", "dimension", "scenery", "converge",
            "rigidity", "simulate")

EXIT_CONFIG, EXIT_INVARIANT, EXIT_CAP = 2, 3, 4


class CommandFailed(Exception):
    """Raised after artifacts are written when a command's checks did not pass."""


def parse_system(text, params=None):
    """``family[:p1,p2][@base]`` into a system spec; ``params`` overrides the inline list."""
    head, _, base = text.partition("@")
    family, _, inline = head.partition(":")
    spec = {"family": family.strip()}
    plist = params if params is not None else inline
    try:
        spec["params"] = [float(v) for v in plist.split(",") if v.strip()] if plist else []
    except ValueError as exc:
        raise ConfigError(f"bad parameter list {plist!r}") from exc
    if base:
        spec["base"] = parse_system(base)
    return spec


def _random_word(seed, length):
    from .rng import make_rng
    return "".join(str(int(v)) for v in make_rng(seed).integers(0, 2, length))


def _word(text):
    from .symbolic import as_word
    return as_word(text or "")


# commands ------------------------------------------------------------------------

def cmd_validate(cfg, sink):
    from .system import validate
    sys = cfg.build()
    rep = validate(sys)
    sink.result = {"ok": rep.ok, "summary": rep.summary(), "constants": sys.constants(),
                   "beta_tilde": rep.beta_tilde, "c_tilde": rep.c_tilde,
                   "derivative_range": list(rep.derivative_range),
                   "violations": [str(v) for v in rep.violations]}
    if not rep.ok:
        raise CommandFailed(rep.summary())


def cmd_levels(cfg, sink):
    from .hierarchy import level_intervals
    from .symbolic import word_str
    sys = cfg.build()
    depth = 4 if cfg.depth is None else cfg.depth
    rows = [(word_str(iv.word), mpmath.nstr(iv.left, 30), mpmath.nstr(iv.left + iv.length, 30))
            for iv in level_intervals(sys, depth)]
    sink.csv("levels.csv", ["word", "left", "right"], rows)
    sink.result = {"depth": depth, "count": len(rows)}


def cmd_scaling(cfg, sink):
    from .scaling import build_scaling_table, holder_diagnostic
    sys = cfg.build()
    m = 8 if cfg.table_depth is None else cfg.table_depth
    n = max(m, 20 if cfg.est_depth is None else cfg.est_depth)
    table = build_scaling_table(sys, m, n)
    hold = holder_diagnostic(table, raise_on_violation=False)
    sink.plot("scaling.csv", table)
    sink.result = {"m": m, "n": n, "err_bound": table.err_bound, "log_slack": table.log_slack,
                   "holder_max_ratio": hold.max_ratio, "holder_violations": hold.violations}
    if not hold.ok:
        raise CommandFailed(f"Hölder diagnostic found {hold.violations} violations")


def cmd_ratioset(cfg, sink):
    from .metrics import d_H
    from .ratioset import ScalingSource, build_ratio_set
    from .scaling import build_scaling_table
    from .scenery import limit_set
    sys = cfg.build()
    m = 8 if cfg.table_depth is None else cfg.table_depth
    n = max(m, 20 if cfg.est_depth is None else cfg.est_depth)
    depth = 6 if cfg.depth is None else cfg.depth
    y = _word(cfg.dual)
    table = build_scaling_table(sys, m, n)
    rs = build_ratio_set(ScalingSource.from_table(table), y, depth, cfg.precision_bits,
                         sys.depth_cap)
    lim = limit_set(sys, y, depth)
    dist = d_H(rs.as_array(), lim.as_array())
    sink.plot("ratioset.csv", rs)
    sink.result = {"depth": depth, "dual": cfg.dual or "", "table_err_bound": table.err_bound,
                   "hausdorff_to_limit_set": dist.value, "provenance": rs.provenance}


def cmd_dimension(cfg, sink):
    from .thermo import bowen_root
    sys = cfg.build()
    depth = 14 if cfg.depth is None else cfg.depth
    tol = 1e-10 if cfg.tol is None else cfg.tol
    sink.result = bowen_root(sys, depth, tol).to_dict()


def cmd_scenery(cfg, sink):
    from .scenery import scenery_comparison
    sys = cfg.build()
    n_max = 12 if cfg.n_max is None else cfg.n_max
    depth = 6 if cfg.depth is None else cfg.depth
    prefix = cfg.prefix or _random_word(cfg.seed, n_max + depth)
    rep = scenery_comparison(sys, prefix, n_max, depth, cfg.grid or 1025)
    sink.csv("scenery.csv", ["n", "d_C", "d_H", "d_M", "bound"], rep.rows())
    bad = rep.violations()
    sink.result = {"prefix": prefix, "n_max": n_max, "depth": depth, "violations": bad,
                   "slope_d_C": rep.slope("d_c", 2), "route_gap": rep.extra["route_gap"]}
    if bad:
        raise CommandFailed(f"scenery distances exceed bounds at n = {bad}")


def cmd_converge(cfg, sink):
    from .scenery import conjugacy_convergence
    sys = cfg.build()
    n_top = 18 if cfg.depth is None else cfg.depth
    lag = 6
    y = cfg.dual or _random_word(cfg.seed, n_top + lag)
    rep = conjugacy_convergence(sys, y, range(2, n_top + 1), lag, cfg.grid or 1025)
    sink.plot("converge.csv", rep)
    bad = rep.violations()
    slope = rep.slope("d_c")
    sink.result = {"dual": y, "lag": lag, "slope_log_dC": slope,
                   "log_beta": math.log(float(sys.beta)) * float(sys.gamma), "violations": bad,
                   "log_derivative_envelope": rep.extra["log_derivative_envelope"], "K": sys.K}
    if bad:
        raise CommandFailed(f"conjugacy distances exceed bounds at n = {bad}")


def cmd_rigidity(cfg, sink):
    from .maps import quadratic_bump
    from .scenery import (conjugacy_residual, gap_points, map_gap_seed, rigidity_conjugacy,
                          skeleton_endpoints, smoothness_probe)
    a = cfg.build()
    b = cfg.build("system_b")
    depth = 12 if cfg.depth is None else cfg.depth
    psi = None
    if cfg.system_b["family"] == "conjugated" and cfg.system_b.get("base") == cfg.system:
        psi = quadratic_bump(cfg.system_b["params"][0])
    seed = map_gap_seed(a, b, psi) if psi is not None else None
    g = rigidity_conjugacy(a, b, seed, depth, cfg.grid or 1025, cfg.table_depth or 6,
                           cfg.est_depth or 18)
    resid = conjugacy_residual(a, b, g.evaluator, gap_points(a, depth, 1000, cfg.seed))
    probes = {f"k{k}": smoothness_probe(g, k) for k in (1, 2)}
    out = {"depth": depth, "residual": resid,
           "seed": "conjugating map" if psi is not None else "affine",
           "probes": {k: {"stable": p.stable, "growth": p.growth, "constant": p.constant}
                      for k, p in probes.items()}}
    if psi is not None:
        ends = skeleton_endpoints(a, depth).ravel()
        out["endpoint_error"] = float(np.max(np.abs(g.evaluator(ends) - psi(ends))))
    sink.plot("rigidity.csv", g)
    sink.result = out
    if resid > 1e-10:
        raise CommandFailed(f"conjugacy residual {resid:.3g} exceeds 1e-10")


def cmd_simulate(cfg, sink):
    from .ergodic import (RATIO_FUNCTIONALS, birkhoff_ratio_test, builtin_set_functionals,
                          sample_orbit, scenery_process_sim)
    from .scaling import build_scaling_table
    from .thermo import bowen_root, gibbs_weights
    sys = cfg.build()
    steps = 2000 if cfg.steps is None else cfg.steps
    depth = 6 if cfg.depth is None else cfg.depth
    m = 10 if cfg.table_depth is None else cfg.table_depth
    d = bowen_root(sys, 14).d
    gibbs = gibbs_weights(sys, d, m)
    orbit = sample_orbit(gibbs, steps, cfg.seed)
    table = build_scaling_table(sys, m, max(m, cfg.est_depth or 24))
    chosen = cfg.functional or "first_gap"
    set_names = sorted(builtin_set_functionals(sys, depth))
    if chosen not in set_names:
        raise ConfigError(f"functional must be one of {set_names}")
    summary, failed = {"seed": cfg.seed, "generator": orbit.generator, "steps": steps, "d": d}, []
    for name in sorted(RATIO_FUNCTIONALS):
        r = birkhoff_ratio_test(sys, orbit, steps, name, gibbs=gibbs, table=table)
        summary[f"ratio_{name}"] = {"time": r.time_average, "ensemble": r.ensemble_average,
                                    "band": r.band, "ok": r.ok}
        failed += [] if r.ok else [name]
    for name in set_names:
        r = scenery_process_sim(sys, orbit, steps, depth, name, gibbs=gibbs, ensemble_depth=m)
        summary[f"set_{name}"] = {"average": r.average, "limit_vs_actual": r.difference,
                                  "bound": r.bound, "ensemble": r.ensemble_average,
                                  "band": r.band + r.ensemble_bias, "ok": r.ok,
                                  "ensemble_ok": r.ensemble_ok}
        failed += [] if (r.ok and r.ensemble_ok) else [name]
        if name == chosen:
            sink.plot("simulate.csv", r)
    sink.result = summary
    if failed:
        raise CommandFailed(f"averages disagree for {failed}")


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


class Sink:
    """Collects a command's result and writes artifacts with provenance."""

    def __init__(self, cfg, command):
        self.cfg, self.command = cfg, command
        self.provenance = cfg.provenance(command)
        self.result = {}
        self.files = []
        if cfg.out:
            os.makedirs(cfg.out, exist_ok=True)

    def _path(self, name):
        return os.path.join(self.cfg.out, name) if self.cfg.out else None

    def csv(self, name, header, rows):
        path = self._path(name)
        if path:
            write_csv(path, header, list(rows), self.provenance)
            self.files.append(name)

    def plot(self, name, report):
        path = self._path(name)
        if path:
            emit_plotdata(report, path, self.provenance)
            self.files.append(name)

    def finish(self, status):
        payload = {"status": status, "result": self.result, "files": self.files,
                   "config": {k: v for k, v in self.cfg.to_dict().items() if k != "out"}}
        if self.cfg.out:
            write_json(self._path(f"{self.command}.json"), payload, self.provenance)
        _sys.stdout.write(dumps_json(payload, self.provenance))


def build_parser():
    p = argparse.ArgumentParser(prog="hypercantor", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hypercantor {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--system", help="family[:p1,p2][@base], e.g. conjugated:0.3@middle-third")
    p.add_argument("--params", help="comma-separated family parameters")
    p.add_argument("--system-b", help="second system for rigidity, same syntax as --system")
    p.add_argument("--depth", type=int)
    p.add_argument("--est-depth", type=int)
    p.add_argument("--table-depth", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--precision-bits", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--dual", help="dual word, e.g. 0101")
    p.add_argument("--prefix", help="forward word for scenery")
    p.add_argument("--functional", help="set functional plotted by simulate")
    p.add_argument("--out", help="directory for JSON and CSV artifacts")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def make_config(args):
    data = {}
    if args.config:
        data = RunConfig.load(args.config).to_dict()
    if args.system:
        data["system"] = parse_system(args.system, args.params)
    elif args.params is not None:
        base = dict(data.get("system") or {"family": "middle-third"})
        base["params"] = parse_system("x", args.params)["params"]
        data["system"] = base
    if args.system_b:
        data["system_b"] = parse_system(args.system_b)
    for key in ("depth", "est_depth", "table_depth", "tol", "seed", "precision_bits", "grid",
                "steps", "n_max", "dual", "prefix", "functional", "out"):
        v = getattr(args, key)
        if v is not None:
            data[key] = v
    return RunConfig.from_dict(data)


def run(command, cfg):
    """Run one command; returns the exit status."""
    sink = Sink(cfg, command)
    try:
        HANDLERS[command](cfg, sink)
    except CommandFailed as exc:
        log.error("%s", exc)
        sink.finish("failed")
        return EXIT_INVARIANT
    sink.finish("ok")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=_sys.stderr, format="%(levelname)s %(message)s")
    try:
        cfg = make_config(args)
        return run(args.command, cfg)
    except (ConfigError, ParameterError, json.JSONDecodeError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (DepthCapError, BudgetError) as exc:
        log.error("resource cap: %s", exc)
        return EXIT_CAP
    except (InvariantViolation, ValidationError, GapError) as exc:
        log.error("invariant violation: %s", exc)
        return EXIT_INVARIANT


if __name__ == "__main__":
    raise SystemExit(main())
