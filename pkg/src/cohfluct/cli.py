"""Command-line front end.

Each command merges built-in defaults, an optional YAML config file (either
flat or with a section named after the command), ``--param key=value``
overrides and the common flags, in that order. The effective configuration
is hashed into the table metadata.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import acceptance
from .coherent import OscCoherentParams, SpinCoherentParams, default_ncut
from .errors import NumericalCheckError, ValidationError
from .expansion import (
    energy_fluctuation_leading,
    osc_product_series,
    osc_variance_series,
    product_coherent_state,
    su2_product_series,
    su2_variance_series,
)
from .coherent import spin_coherent_state
from .hilbert import SpaceDescriptor, evolve, expectation, spin_ladder, variance
from .intertwiner import (
    coefficients,
    haar_coefficients,
    haar_norm,
    haar_triple_product,
    load_node_file,
    regular_tetrahedron,
    saddle_norm,
    squashed_tetrahedron,
    triple_product_complete,
    triple_product_expectation,
)
from .models import (
    DickeParams,
    LmgParams,
    SpinPolynomial,
    dicke_hamiltonian,
    dicke_omega1,
    dicke_omega2,
    dicke_state_params,
    lmg_ehrenfest_time,
    lmg_hamiltonian,
    lmg_iso_splus,
    lmg_omega1,
    lmg_omega2,
    lmg_revival_time,
)
from .models.classical import ClassicalState
from .opexpr import boson_environment, parse_operator, spin_environment, split_product
from .tables import ResultTable, config_hash, versions

EXIT_OK, EXIT_VALIDATION, EXIT_CHECK = 0, 1, 2

DEFAULTS = {
    "expand": {"space": "spin", "expr": "Sz*Sz", "a": None, "b": None, "variance": False, "two_s": 2,
               "theta": math.pi / 2, "phi": 0.0, "alpha": [1.0, 0.0], "omega": 1.0, "ncut": None,
               "hbar": 1.0, "nmax": 50, "tol": 1e-10},
    "fluct": {"model": "lmg", "two_s": [8, 16, 32, 64, 128], "theta": 1.1, "phi": 0.4, "h": 1.0,
              "gamma_x": 0.8, "gamma_y": -0.5, "hbar": 1.0, "tol": 0.2, "target_slope": -2.0},
    "lmg": {"two_s": [10, 20, 40], "h": 1.0, "gamma_x": 0.8, "gamma_y": -0.5, "hbar": 1.0,
            "states": None, "n_states": 5, "tol": 1e-10},
    "lmg-iso": {"two_s": 40, "h": 0.5, "gamma": 1.0, "hbar": 1.0, "theta": math.pi / 2, "phi": 0.0,
                "t_final": None, "n_times": 101, "tol": 1e-10},
    "dicke": {"two_s": [2, 6, 12], "omega": 1.0, "Omega": 0.7, "lam": 0.9, "hbar": 1.0,
              "alpha_bound": 1.5, "states": None, "n_states": 5, "tol": 1e-8},
    "node": {"node": "regular", "two_s": 2, "z_scale": 0.7, "lambdas": [1, 2, 4], "triple": [0, 1, 2],
             "tol": 1e-12},
    "selfcheck": {"only": None},
}
COMMON = ("seed", "jobs")


# configuration ---------------------------------------------------------------

def _parse_param(text: str):
    if "=" not in text:
        raise ValidationError(f"--param expects key=value, got {text!r}")
    key, val = text.split("=", 1)
    try:
        return key.strip(), yaml.safe_load(val)
    except yaml.YAMLError as exc:
        raise ValidationError(f"--param {key}: cannot parse value {val!r}") from exc


def build_config(command: str, args) -> dict:
    cfg = dict(DEFAULTS[command])
    cfg.update({"seed": 42, "jobs": None})
    if args.config:
        try:
            data = yaml.safe_load(Path(args.config).read_text()) or {}
        except OSError as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ValidationError(f"config {args.config} is not valid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError(f"config {args.config} must be a mapping")
        if isinstance(data.get(command), dict):
            data = {**{k: v for k, v in data.items() if k in COMMON}, **data[command]}
        _merge(cfg, data, command, f"config {args.config}")
    _merge(cfg, dict(_parse_param(p) for p in args.param or []), command, "--param")
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if args.tol is not None:
        if "tol" not in cfg:
            raise ValidationError(f"{command} takes no tolerance")
        cfg["tol"] = args.tol
    if "tol" in cfg and not (isinstance(cfg["tol"], (int, float)) and cfg["tol"] > 0):
        raise ValidationError(f"tolerance must be positive, got {cfg['tol']!r}")
    if not isinstance(cfg["seed"], int):
        raise ValidationError(f"seed must be an integer, got {cfg['seed']!r}")
    return cfg


def _merge(cfg, data, command, origin):
    for k, v in data.items():
        if k not in cfg:
            raise ValidationError(f"{origin}: unknown key {k!r} for {command} "
                                  f"(known: {', '.join(sorted(cfg))})")
        cfg[k] = v


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _jobs(cfg, n_points):
    j = cfg.get("jobs")
    j = os.cpu_count() or 1 if j is None else int(j)
    if j < 1:
        raise ValidationError(f"jobs must be >= 1, got {j}")
    return min(j, n_points)


def _map(fn, items, cfg):
    """Ordered map over sweep points, in a process pool when jobs > 1."""
    items = list(items)
    jobs = _jobs(cfg, len(items))
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _states(cfg, rng):
    if cfg["states"] is not None:
        out = []
        for st in cfg["states"]:
            if not isinstance(st, (list, tuple)) or len(st) != 2:
                raise ValidationError(f"state entries must be [theta, phi], got {st!r}")
            out.append((float(st[0]), float(st[1])))
        return out
    n = int(cfg["n_states"])
    return [(float(math.acos(rng.uniform(-1, 1))), float(rng.uniform(0, 2 * math.pi))) for _ in range(n)]


def _table(command, cfg, columns) -> ResultTable:
    # the worker count never changes results, so it stays out of the recorded config
    rec = {k: v for k, v in cfg.items() if k != "jobs"}
    return ResultTable(columns, metadata={"command": command, "config": rec,
                                          "config_hash": config_hash(rec), "versions": versions()})


# commands ----------------------------------------------------------------------

def cmd_expand(cfg) -> tuple:
    hbar = float(cfg["hbar"])
    if cfg["space"] == "spin":
        two_s = int(cfg["two_s"])
        space = SpaceDescriptor.spin(two_s)
        env = spin_environment(two_s, hbar)
        params = SpinCoherentParams(two_s, float(cfg["theta"]), float(cfg["phi"]))
    elif cfg["space"] == "boson":
        al = cfg["alpha"]
        alpha = complex(*al) if isinstance(al, (list, tuple)) else complex(al)
        params = OscCoherentParams(alpha, float(cfg["omega"]), hbar)
        ncut = int(cfg["ncut"]) if cfg["ncut"] is not None else params.default_ncut()
        space = SpaceDescriptor.boson(ncut)
        env = boson_environment(ncut, hbar, float(cfg["omega"]))
    else:
        raise ValidationError(f"space must be 'spin' or 'boson', got {cfg['space']!r}")
    if cfg["a"] is not None:
        ta, tb = str(cfg["a"]), str(cfg["b"] if cfg["b"] is not None else cfg["a"])
    elif cfg["variance"]:
        ta, tb = str(cfg["expr"]), None
    else:
        # validate the whole text first so error positions refer to it
        parse_operator(str(cfg["expr"]), env, space)
        ta, tb = split_product(str(cfg["expr"]))
    a = parse_operator(ta, env, space)
    if cfg["variance"]:
        rep = (su2_variance_series(a, params, hbar) if cfg["space"] == "spin"
               else osc_variance_series(a, params, int(cfg["nmax"])))
    else:
        b = parse_operator(tb, env, space)
        rep = (su2_product_series(a, b, params, hbar) if cfg["space"] == "spin"
               else osc_product_series(a, b, params, int(cfg["nmax"])))
    terms = np.asarray(rep.terms)
    tiny = 1e-15 * max(1.0, rep.scale)
    last = max([0] + [n for n, t in enumerate(terms) if abs(t) > tiny])
    tab = _table("expand", cfg, ["n", "term", "partial_sum", "residual"])
    for n in range(last + 1):
        tab.add(n, complex(terms[n]), complex(rep.partial_sums[n]), float(rep.residuals[n]))
    tab.metadata.update({"exact": complex(rep.exact), "stop_reason": rep.stop_reason,
                         "final_residual": float(rep.final_residual)})
    ok = float(rep.residuals[last]) <= cfg["tol"] * max(1.0, abs(rep.exact)) or rep.stop_reason == "nmax"
    return tab, ok


def _fluct_point(args):
    model, two_s, cfg = args
    hbar = float(cfg["hbar"])
    if model == "lmg":
        ham = lmg_hamiltonian(LmgParams(two_s, float(cfg["h"]), float(cfg["gamma_x"]),
                                        float(cfg["gamma_y"]), hbar))
    else:
        poly = SpinPolynomial.random(np.random.default_rng(cfg["seed"]))
        ham = poly.operator(two_s, hbar)
    sp = SpinCoherentParams(two_s, float(cfg["theta"]), float(cfg["phi"]))
    exact = variance(spin_coherent_state(sp), ham)
    lead = energy_fluctuation_leading(ham, [sp], hbar)
    return exact, lead


def cmd_fluct(cfg) -> tuple:
    model = cfg["model"]
    if model not in ("lmg", "cubic"):
        raise ValidationError(f"model must be 'lmg' or 'cubic', got {model!r}")
    two_s = [int(t) for t in _as_list(cfg["two_s"])]
    res = _map(_fluct_point, [(model, t, cfg) for t in two_s], cfg)
    tab = _table("fluct", cfg, ["two_s", "exact", "leading", "abs_error", "scaled_error"])
    scaled = []
    for t, (ex, ld) in zip(two_s, res):
        err = abs(ex - ld)
        scaled.append(err / (cfg["hbar"] * t / 2) ** 2)
        tab.add(t, ex, ld, err, scaled[-1])
    ok = True
    if len(two_s) >= 2:
        slope = acceptance.loglog_slope(two_s, scaled)
        tab.metadata["slope"] = slope
        ok = abs(slope - cfg["target_slope"]) <= cfg["tol"]
    return tab, ok


def _lmg_point(args):
    two_s, theta, phi, cfg = args
    p = LmgParams(two_s, float(cfg["h"]), float(cfg["gamma_x"]), float(cfg["gamma_y"]), float(cfg["hbar"]))
    sp = SpinCoherentParams(two_s, theta, phi)
    return lmg_omega1(sp, p), lmg_omega2(sp, p), variance(spin_coherent_state(sp), lmg_hamiltonian(p))


def cmd_lmg(cfg) -> tuple:
    rng = np.random.default_rng(cfg["seed"])
    states = _states(cfg, rng)
    pts = [(int(t), th, ph, cfg) for t in _as_list(cfg["two_s"]) for th, ph in states]
    res = _map(_lmg_point, pts, cfg)
    tab = _table("lmg", cfg, ["two_s", "theta", "phi", "omega1", "omega2", "exact", "residual"])
    worst = 0.0
    for (t, th, ph, _), (o1, o2, ex) in zip(pts, res):
        r = abs(ex - o1 - o2) / max(abs(ex), abs(o1 + o2), 1e-300)
        worst = max(worst, r)
        tab.add(t, th, ph, o1, o2, ex, r)
    tab.metadata["max_residual"] = worst
    return tab, worst <= cfg["tol"]


def cmd_lmg_iso(cfg) -> tuple:
    two_s = int(cfg["two_s"])
    g = float(cfg["gamma"])
    p = LmgParams(two_s, float(cfg["h"]), g, g, float(cfg["hbar"]))
    sp = SpinCoherentParams(two_s, float(cfg["theta"]), float(cfg["phi"]))
    t_rev = lmg_revival_time(p)
    t_ehr = lmg_ehrenfest_time(p, sp)
    t_final = float(cfg["t_final"]) if cfg["t_final"] is not None else 1.25 * t_rev
    n = int(cfg["n_times"])
    if n < 2 or t_final <= 0:
        raise ValidationError("lmg-iso needs n_times >= 2 and t_final > 0")
    times = sorted(set(np.linspace(0, t_final, n).tolist()) | {t for t in (t_rev, t_ehr) if t <= t_final})
    ham = lmg_hamiltonian(p)
    splus, _ = spin_ladder(two_s, p.hbar)
    st0 = spin_coherent_state(sp)
    tab = _table("lmg-iso", cfg, ["t", "closed_abs", "exact_abs", "abs_diff", "marker"])
    worst = 0.0
    for t in times:
        closed = abs(complex(lmg_iso_splus(t, p, sp)))
        exact = abs(expectation(evolve(st0, ham, t, p.hbar), splus))
        d = abs(closed - exact)
        worst = max(worst, d / (p.hbar * p.s))
        marker = "revival" if t == t_rev else "ehrenfest" if t == t_ehr else ""
        tab.add(t, closed, exact, d, marker)
    tab.metadata.update({"revival_time": t_rev, "ehrenfest_time": t_ehr, "max_scaled_diff": worst,
                         "initial_length": p.hbar * p.s * math.sin(sp.theta)})
    return tab, worst <= cfg["tol"]


def _dicke_point(args):
    two_s, theta, phi, alpha, cfg = args
    p = DickeParams.for_amplitude(two_s, float(cfg["omega"]), float(cfg["Omega"]), float(cfg["lam"]),
                                  float(cfg["alpha_bound"]), float(cfg["hbar"]))
    cs = ClassicalState.from_angles([(theta, phi)], [alpha])
    st = product_coherent_state(p.space, dicke_state_params(cs, p))
    return dicke_omega1(cs, p), dicke_omega2(cs, p), variance(st, dicke_hamiltonian(p))


def cmd_dicke(cfg) -> tuple:
    rng = np.random.default_rng(cfg["seed"])
    states = _states(cfg, rng)
    bound = float(cfg["alpha_bound"])
    alphas = [complex(*(rng.uniform(-1, 1, 2) * bound / math.sqrt(2))) for _ in states]
    pts = [(int(t), th, ph, al, cfg) for t in _as_list(cfg["two_s"]) for (th, ph), al in zip(states, alphas)]
    res = _map(_dicke_point, pts, cfg)
    tab = _table("dicke", cfg, ["two_s", "theta", "phi", "alpha", "omega1", "omega2", "exact", "residual"])
    worst = 0.0
    for (t, th, ph, al, _), (o1, o2, ex) in zip(pts, res):
        r = abs(ex - o1 - o2) / max(abs(ex), abs(o1 + o2), 1e-300)
        worst = max(worst, r)
        tab.add(t, th, ph, al, o1, o2, ex, r)
    tab.metadata.update({"max_residual": worst, "ncut": default_ncut(bound)})
    return tab, worst <= cfg["tol"]


def _load_node(cfg):
    name = cfg["node"]
    if name == "regular":
        return regular_tetrahedron(int(cfg["two_s"]))
    if name == "squashed":
        return squashed_tetrahedron(int(cfg["two_s"]), float(cfg["z_scale"]))
    try:
        return load_node_file(name)
    except OSError as exc:
        raise ValidationError(f"cannot read node file {name}: {exc}") from exc


def _node_point(args):
    node, lam, triple = args
    sc = node.scaled(lam)
    rows = []
    q = haar_norm(sc)
    rows.append(("norm", "quadrature", q))
    for order in ("leading", "corrected", "complete"):
        rows.append(("norm", order, saddle_norm(sc, order)))
    c = coefficients(sc)
    cq = haar_coefficients(sc)
    for a in range(sc.n_edges):
        for i, ax in enumerate("xyz"):
            rows.append(("C_closed", f"{a}{ax}", float(c[a, i])))
            rows.append(("C_quadrature", f"{a}{ax}", float(cq[a, i])))
    rows.append(("sum_rule", "max_abs", float(np.max(np.abs(c.sum(axis=0))))))
    if sc.n_edges >= 3:
        lead, corr = triple_product_expectation(sc, triple)
        rows.append(("triple", "quadrature", haar_triple_product(sc, triple)))
        rows.append(("triple", "leading", lead))
        rows.append(("triple", "corrected", corr))
        rows.append(("triple", "complete", triple_product_complete(sc, triple)))
    return rows


def cmd_node(cfg) -> tuple:
    node = _load_node(cfg)
    triple = tuple(int(e) for e in cfg["triple"])
    lams = [int(x) for x in _as_list(cfg["lambdas"])]
    if any(x < 1 for x in lams):
        raise ValidationError("lambdas must be positive integers")
    res = _map(_node_point, [(node, lam, triple) for lam in lams], cfg)
    tab = _table("node", cfg, ["section", "lam", "key", "value"])
    worst = 0.0
    for lam, rows in zip(lams, res):
        for section, key, val in rows:
            tab.add(section, lam, key, float(val))
            if section == "sum_rule":
                worst = max(worst, val)
    tab.metadata.update({"two_s": list(node.two_s), "directions": node.directions,
                         "max_sum_rule": worst})
    return tab, worst <= cfg["tol"] * max(1.0, node.total_spin * max(lams))


def cmd_selfcheck(cfg) -> tuple:
    only = None if cfg["only"] is None else {int(k) for k in _as_list(cfg["only"])}
    results = acceptance.run_all(cfg["seed"], only, report=lambda line: print(line, flush=True))
    tab = _table("selfcheck", cfg, ["criterion", "passed", "detail"])
    for r in results:
        tab.add(r.number, r.passed, r.detail)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return tab, n_fail == 0


COMMANDS = {
    "expand": (cmd_expand, "per-order terms of the coherent-state product series"),
    "fluct": (cmd_fluct, "exact vs leading energy fluctuation over a twoS sweep"),
    "lmg": (cmd_lmg, "LMG variance decomposition Omega1 + Omega2"),
    "lmg-iso": (cmd_lmg_iso, "isotropic LMG <S+(t)> closed form vs exact evolution"),
    "dicke": (cmd_dicke, "Dicke variance decomposition Omega1 + Omega2"),
    "node": (cmd_node, "coherent intertwiner: norms, C_a and triple product"),
    "selfcheck": (cmd_selfcheck, "run every acceptance criterion"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cohfluct", description="Coherent-state fluctuation toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="YAML file with parameters (flat or under a '%s' section)" % name)
        sp.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="override one parameter; VALUE is parsed as YAML")
        sp.add_argument("--out", help="write the CSV table here instead of stdout")
        sp.add_argument("--json", action="store_true", help="also write a JSON mirror next to --out")
        sp.add_argument("--seed", type=int, help="random seed (default 42)")
        sp.add_argument("--jobs", type=int, help="worker processes (default: available CPUs)")
        sp.add_argument("--tol", type=float, help="check tolerance for this command")
    return ap


def _emit(tab: ResultTable, args, command):
    if args.out:
        out = Path(args.out)
        out.write_text(tab.to_csv())
        if args.json:
            out.with_suffix(".json").write_text(tab.to_json())
    elif command != "selfcheck":
        sys.stdout.write(tab.to_json() if args.json else tab.to_csv())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        cfg = build_config(args.command, args)
        tab, ok = fn(cfg)
        _emit(tab, args, args.command)
    except ValidationError as exc:
        print(f"cohfluct {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalCheckError as exc:
        print(f"cohfluct {args.command}: numerical check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    if not ok:
        sys.stdout.flush()
        print(f"cohfluct {args.command}: check failed (see table)", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
