"""Command-line front end: ``zp-lab <subcommand> [options]``.

Exit status is 0 when every invariant checked during the run holds, 1 when
one fails (or a sampler finds only degenerate samples) and 2 on usage or
input errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .biorth_distortion import (BiorthSystem, BiorthValidationError, InevitabilityProbe,
                                PreconditionError, distortion_lower_bound, inevitability_proxy,
                                lift_system, synth_system, validate_biorth)
from .blocks_psp import (PROFILES, block_sum_growth, log_lift, make_disjoint_blocks,
                         normalize_flattened, psp_flatten)
from .kp_centralizer import (DegenerateSampleError, TwistedVector, centralizer_defect,
                             estimate_centralizer_constant, omega_p, quasi_norm,
                             quasi_triangle_defect)
from .report import ExperimentReport, dumps
from .seq_core import PExponent, SeqVector, lp_norm, parse_sparse, pointwise_mul, unit

log = logging.getLogger("zplab")

SUBCOMMANDS = ("omega", "qnorm", "defect", "cconst", "qtri", "loglift", "psp", "growth",
               "validate", "lift", "distort", "probe", "synth", "sweep")
SWEEP_OPS = ("loglift", "growth", "distort", "cconst")


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str
    p: list = field(default_factory=lambda: [2.0])
    seed: int = 0
    out: str | None = None
    format: str = "json"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {self.subcommand!r}")
        if self.format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        try:
            self.p = [PExponent(v).p for v in self.p]
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if not self.p:
            raise UsageError("--p grid is empty")

    @property
    def p1(self) -> float:
        if len(self.p) != 1:
            raise UsageError(f"{self.subcommand} takes a single --p")
        return self.p[0]

    def echo(self) -> dict:
        d = {"subcommand": self.subcommand, "seed": self.seed, "format": self.format}
        d["p"] = self.p if len(self.p) > 1 or self.subcommand == "sweep" else self.p[0]
        d.update({k: v for k, v in sorted(self.options.items()) if v is not None})
        return d


def _close(a, b, rel):
    return abs(a - b) <= rel * max(1.0, abs(b))


def _load_system(path) -> BiorthSystem:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read system file {path}: {exc}") from exc
    if "system" in obj:
        obj = obj["system"]
    return BiorthSystem.from_json(obj)


def _opt(cfg, name, default=None):
    v = cfg.options.get(name)
    return default if v is None else v


def _vec(cfg, name):
    text = cfg.options.get(name)
    if text is None:
        raise UsageError(f"--{name} is required for {cfg.subcommand}")
    return parse_sparse(text)


# --- subcommand bodies: each fills report rows and checks -------------------

def _omega(cfg, rep):
    x, p = _vec(cfg, "vec"), cfg.p1
    w = omega_p(x, p)
    rep.rows.append({"input": x, "value": w})
    rep.checks["support_preserved"] = w.support() <= x.support()


def _qnorm(cfg, rep):
    x, y, p = _vec(cfg, "x"), _vec(cfg, "y"), cfg.p1
    v = quasi_norm(TwistedVector(x, y, p))
    rep.rows.append({"input": {"x": x, "y": y}, "value": v})
    rep.checks["nonnegative"] = v >= 0.0


def _defect(cfg, rep):
    a, x, p = _vec(cfg, "a"), _vec(cfg, "vec"), cfg.p1
    v = centralizer_defect(a, x, p)
    rep.rows.append({"input": {"a": a, "x": x}, "value": v})
    if len(a) and np.all(a.values == 1.0):
        # indicator multiplier: closed form ||1_A x|| log(||x|| / ||1_A x||)
        ax = pointwise_mul(a, x)
        na, nx = lp_norm(ax, p), lp_norm(x, p)
        ref = na * math.log(nx / na) if na > 0 else 0.0
        rep.checks["indicator_closed_form"] = _close(v, ref, 1e-10)


def _cconst(cfg, rep):
    p, dim, trials = cfg.p1, _opt(cfg, "dim", 8), _opt(cfg, "trials", 200)
    v = estimate_centralizer_constant(p, dim, trials, cfg.seed)
    rep.rows.append({"input": {"p": p, "dim": dim, "trials": trials}, "value": v})
    rep.checks["finite"] = math.isfinite(v)


def _qtri(cfg, rep):
    p, dim, trials = cfg.p1, _opt(cfg, "dim", 8), _opt(cfg, "trials", 200)
    v = quasi_triangle_defect(p, dim, trials, cfg.seed)
    rep.rows.append({"input": {"p": p, "dim": dim, "trials": trials}, "value": v,
                     "triangle_violated": v > 1.0})
    rep.checks["finite"] = math.isfinite(v)


def _loglift_row(p, n, profile, width):
    blocks = make_disjoint_blocks(n, width, profile, p, normalize=True)
    v = log_lift(blocks)
    ref = n ** (1.0 / p) * math.log(n) / p
    return {"p": p, "n": n, "profile": profile, "value": v, "closed_form": ref}, _close(v, ref, 1e-10)


def _loglift(cfg, rep):
    ok = True
    for n in _opt(cfg, "n", [4]):
        row, good = _loglift_row(cfg.p1, n, _opt(cfg, "profile", "singleton"), _opt(cfg, "width", 4))
        rep.rows.append(row)
        ok &= good
    rep.checks["closed_form"] = ok


def _pairs_from_input(cfg):
    path = cfg.options.get("input")
    if path:
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read pairs file {path}: {exc}") from exc
        p = PExponent(obj.get("p", cfg.p1))
        return [TwistedVector.from_json(w, p) for w in obj["pairs"]]
    # default family: (x_j, u_j) with ||u_j||_p = 2^-j on a common window
    n = _opt(cfg, "n", [4])[-1]
    p = cfg.p1
    blocks = make_disjoint_blocks(n, _opt(cfg, "width", 4), _opt(cfg, "profile", "flat"), p)
    return [TwistedVector(b, b * 2.0 ** -j, p) for j, b in enumerate(blocks, 1)]


def _psp(cfg, rep):
    pairs = _pairs_from_input(cfg)
    ok = True
    for j, (w, (y, err)) in enumerate(zip(pairs, psp_flatten(pairs)), 1):
        un = lp_norm(w.y, w.p.p)
        rep.rows.append({"j": j, "y": y, "err": err, "u_norm": un})
        ok &= _close(err, un, 1e-12)
    rep.checks["err_equals_u_norm"] = ok


def _growth_pairs(kind, p, n):
    if kind == "second":
        return [TwistedVector(SeqVector(), unit(j), p) for j in range(1, n + 1)]
    if kind == "first":
        return [TwistedVector.first(unit(j), p) for j in range(1, n + 1)]
    if kind == "flattened":
        blocks = make_disjoint_blocks(n, 3, "geometric", p)
        pairs = [TwistedVector(b, b * 2.0 ** -j, p) for j, b in enumerate(blocks, 1)]
        ys, _ = normalize_flattened([y for y, _ in psp_flatten(pairs)], p)
        return [TwistedVector.first(y, p) for y in ys]
    raise UsageError(f"unknown growth kind {kind!r}")


def _growth_rows(p, ns, kind):
    table = block_sum_growth(_growth_pairs(kind, p, max(ns)), sorted(set(ns)))
    ok = True
    rows = []
    for (n, v, r), ratio in zip(table.rows, table.ratios()):
        if kind == "second":
            ok &= _close(ratio, 1.0 + math.log(n) / p, 1e-10)
        else:
            ok &= _close(ratio, 1.0, 1e-12)
        rows.append({"n": n, "value": v, "reference": r, "law": table.law})
    return rows, ok


def _growth(cfg, rep):
    kind = _opt(cfg, "kind", "second")
    rows, ok = _growth_rows(cfg.p1, _opt(cfg, "n", [1, 2, 4, 8, 16]), kind)
    rep.rows.extend(rows)
    rep.checks[f"{kind}_ratio_law"] = ok


def _system(cfg):
    path = cfg.options.get("system")
    if not path:
        raise UsageError("--system is required")
    return _load_system(path)


def _validate(cfg, rep):
    r = validate_biorth(_system(cfg))
    rep.rows.append(r.to_json())
    rep.checks["norms"] = r.norms_ok
    rep.checks["condition2"] = r.condition2_ok
    rep.checks["condition3"] = r.condition3_ok


def _lift(cfg, rep):
    sys_ = _system(cfg)
    lifted = lift_system(sys_)
    before, after = validate_biorth(sys_), validate_biorth(lifted)
    rep.rows.append({"system": lifted.to_json()})
    rep.checks["margins_preserved"] = bool(np.allclose(before.margins(), after.margins(),
                                                       rtol=0, atol=1e-12))
    rep.checks["lifted_valid"] = after.passed


def _distort_rows(sys_, eps_list, index):
    rows, ok = [], True
    for eps in eps_list:
        r = distortion_lower_bound(sys_, eps, index=index)
        rows.append({"p": sys_.p.p, "delta": sys_.delta, "eps": eps, **r.to_json()})
        ok &= r.holds
    return rows, ok


def _distort(cfg, rep):
    rows, ok = _distort_rows(_system(cfg), _opt(cfg, "eps", [0.1]), _opt(cfg, "index", 1))
    rep.rows.extend(rows)
    rep.checks["ratio_at_least_bound"] = ok


def _probe(cfg, rep):
    sys_ = _system(cfg)
    j = _opt(cfg, "family", 1)
    A = sys_.families[j - 1]
    if cfg.options.get("basis"):
        obj = json.loads(Path(cfg.options["basis"]).read_text())
        basis = [SeqVector.from_json(v) for v in obj["basis"]]
    else:
        elems = [a.x if isinstance(a, TwistedVector) else a for a in A]
        n = max(a.max_index() for a in elems)
        rng = np.random.default_rng(cfg.seed)
        basis = [SeqVector.from_dense(rng.standard_normal(n)) for _ in range(_opt(cfg, "dim", 2))]
    probe = InevitabilityProbe(basis, _opt(cfg, "tolerance", 1e-6), _opt(cfg, "budget", 2000), cfg.seed)
    v = inevitability_proxy(A, probe, sys_.p)
    rep.rows.append({"family": j, "value": v, "budget": probe.search_budget,
                     "tolerance": probe.tolerance, "within_tolerance": v <= probe.tolerance})
    rep.checks["finite"] = math.isfinite(v)


def _synth(cfg, rep):
    delta = _opt(cfg, "delta", [0.1])[0]
    sys_ = synth_system(cfg.p1, delta, cfg.seed, _opt(cfg, "families", 3), _opt(cfg, "size", 4),
                        _opt(cfg, "width", 4))
    rep.rows.append({"system": sys_.to_json()})
    rep.checks["valid"] = validate_biorth(sys_).passed


def _sweep(cfg, rep):
    op = _opt(cfg, "op", "loglift")
    if op not in SWEEP_OPS:
        raise UsageError(f"sweep --op must be one of {SWEEP_OPS}")
    grids = {"loglift": ("n",), "growth": ("n",), "distort": ("delta", "eps"), "cconst": ("dim",)}[op]
    for g in grids:
        if not cfg.options.get(g):
            raise UsageError(f"sweep grid --{g} is empty")
    ok = True
    for p in cfg.p:
        if op == "loglift":
            for n in cfg.options["n"]:
                row, good = _loglift_row(p, n, _opt(cfg, "profile", "singleton"), _opt(cfg, "width", 4))
                rep.rows.append(row)
                ok &= good
        elif op == "growth":
            rows, good = _growth_rows(p, cfg.options["n"], _opt(cfg, "kind", "second"))
            rep.rows.extend({"p": p, **r} for r in rows)
            ok &= good
        elif op == "distort":
            for delta in cfg.options["delta"]:
                sys_ = synth_system(p, delta, cfg.seed)
                rows, good = _distort_rows(sys_, cfg.options["eps"], _opt(cfg, "index", 1))
                rep.rows.extend(rows)
                ok &= good
        else:
            for dim in cfg.options["dim"]:
                v = estimate_centralizer_constant(p, dim, _opt(cfg, "trials", 200), cfg.seed)
                rep.rows.append({"p": p, "dim": dim, "value": v})
    rep.checks[f"sweep_{op}"] = ok


_DISPATCH = {"omega": _omega, "qnorm": _qnorm, "defect": _defect, "cconst": _cconst,
             "qtri": _qtri, "loglift": _loglift, "psp": _psp, "growth": _growth,
             "validate": _validate, "lift": _lift, "distort": _distort, "probe": _probe,
             "synth": _synth, "sweep": _sweep}


def run(config: ExperimentConfig) -> ExperimentReport:
    """Execute one subcommand and return its report (nothing is written)."""
    rep = ExperimentReport(config.subcommand, config.echo())
    t0 = time.perf_counter()
    _DISPATCH[config.subcommand](config, rep)
    rep.duration = time.perf_counter() - t0
    return rep


def sweep(config: ExperimentConfig) -> ExperimentReport:
    if config.subcommand != "sweep":
        config = ExperimentConfig("sweep", config.p, config.seed, config.out, config.format,
                                  {**config.options, "op": config.subcommand})
    return run(config)


def render(rep: ExperimentReport, fmt: str) -> str:
    # synth and lift emit the system file itself so it can be fed back via --system
    if rep.command in ("synth", "lift") and fmt == "json":
        return dumps(rep.rows[0]["system"])
    return rep.render(fmt)


# --- argument parsing --------------------------------------------------------

def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zp-lab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_floats, default=[2.0], help="exponent (comma list for sweep)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (fallback: $ZP_LAB_SEED, 0)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, help_, *flags):
        sp = sub.add_parser(name, parents=[common], help=help_)
        for flag in flags:
            spec = FLAGS[flag]
            sp.add_argument(f"--{flag}", **spec)
        return sp

    add("omega", "Kalton-Peck map of a vector", "vec")
    add("qnorm", "Z_p quasi-norm of a pair (x, y)", "x", "y")
    add("defect", "centralizer defect of multiplier a at x", "a", "vec")
    add("cconst", "empirical centralizer constant", "dim", "trials")
    add("qtri", "empirical quasi-triangle ratio", "dim", "trials")
    add("loglift", "log-lift of n disjoint normalized blocks", "n", "profile", "width")
    add("psp", "flatten pairs onto the first coordinate", "input", "n", "profile", "width")
    add("growth", "quasi-norm growth of block sums", "n", "kind")
    add("validate", "check a biorthogonal system", "system")
    add("lift", "lift an l_p system to Z_p", "system")
    add("distort", "distortion ratio of the renorming", "system", "eps", "index")
    add("probe", "finite inevitability proxy", "system", "family", "basis", "dim",
        "budget", "tolerance")
    add("synth", "generate a synthetic system", "delta", "families", "size", "width")
    add("sweep", "grid experiment over p, n, eps, delta", "op", "n", "eps", "delta", "dim",
        "trials", "profile", "width", "kind", "index")
    return parser


FLAGS = {
    "vec": dict(help="sparse vector 'i:v;i:v;...'"),
    "x": dict(help="first coordinate, sparse grammar"),
    "y": dict(help="second coordinate, sparse grammar"),
    "a": dict(help="multiplier, sparse grammar"),
    "dim": dict(type=_ints, default=None, help="dimension(s)"),
    "trials": dict(type=int, default=None),
    "n": dict(type=_ints, default=None, help="block count(s), comma list"),
    "profile": dict(choices=PROFILES, default=None),
    "width": dict(type=int, default=None),
    "input": dict(help="JSON file {p, pairs: [{x, y}, ...]}"),
    "kind": dict(choices=("second", "first", "flattened"), default=None),
    "system": dict(help="BiorthSystem JSON file"),
    "eps": dict(type=_floats, default=None, help="epsilon value(s)"),
    "delta": dict(type=_floats, default=None, help="delta value(s)"),
    "index": dict(type=int, default=None, help="distinguished family (default 1)"),
    "family": dict(type=int, default=None),
    "basis": dict(help="JSON file {basis: [vec, ...]}"),
    "budget": dict(type=int, default=None),
    "tolerance": dict(type=float, default=None),
    "families": dict(type=int, default=None),
    "size": dict(type=int, default=None),
    "op": dict(choices=SWEEP_OPS, default=None),
}


def config_from_args(ns) -> ExperimentConfig:
    seed = ns.seed
    if seed is None:
        env = os.environ.get("ZP_LAB_SEED")
        try:
            seed = int(env) if env else 0
        except ValueError as exc:
            raise UsageError(f"ZP_LAB_SEED must be an integer, got {env!r}") from exc
    options = {k: v for k, v in vars(ns).items()
               if k not in ("p", "seed", "out", "format", "subcommand", "verbose")}
    if ns.subcommand != "sweep" and isinstance(options.get("dim"), list):
        options["dim"] = options["dim"][0]
    return ExperimentConfig(ns.subcommand, ns.p, seed, ns.out, ns.format, options)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
        rep = run(cfg)
    except (UsageError, PreconditionError, BiorthValidationError, KeyError) as exc:
        print(f"zp-lab: error: {exc}", file=sys.stderr)
        return 2
    except DegenerateSampleError as exc:
        print(f"zp-lab: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"zp-lab: error: {exc}", file=sys.stderr)
        return 2
    text = render(rep, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    status = "passed" if rep.passed else "FAILED: " + ", ".join(
        k for k, v in rep.checks.items() if not v)
    print(f"zp-lab {cfg.subcommand}: {status} ({rep.duration:.3f} s, kernels={kernels.BACKEND})",
          file=sys.stderr)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
