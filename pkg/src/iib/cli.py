"""Command-line front end: ``iib <command> [options]``.

Exit codes::

    0  success
    1  a verification ran and failed
    2  invalid input file or arguments
    3  a marginal of p(X, Y) is not fully supported
    4  no input distribution makes p(Y) uniform
    5  group search exceeded its node budget
    6  joint not fully supported, or any other library error

Reports go to stdout (text, or JSON with ``--json``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np

from .equivariance import (
    EquivariancePair,
    Infeasible,
    JointNotFullySupported,
    NoUniformizingInput,
    SearchBudgetExceeded,
    SearchConfig,
    enumerate_group,
    find_uniformizing_input,
    verify_theorem1,
)
from .foundation import EXACT, FLOAT, IIBError, JointDist, Permutation
from .generators import KINDS, GeneratorSpec, generate, random_channel, random_joint
from .info_measures import ExactNats, mutual_information
from .io import (
    InvalidFile,
    channel_document,
    file_digest,
    make_report,
    nats_expression,
    number_to_json,
    read_channel_file,
    read_pair_matrices,
    write_channel_file,
)
from .iterative import SolverConfig, pareto_sweep, solve_iib_at
from .partition import MarginalNotFullSupport, solve_iib_max
from .reductions import verify_ib_identities, verify_sib_identities
from .soft import (
    PerturbationConfig,
    SoftPair,
    SoftSearchConfig,
    is_soft_equivariance,
    kernel_residual,
    perturbation_study,
    search_soft_equivariances,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_MARGINAL = 3
EXIT_NO_UNIFORMIZING = 4
EXIT_BUDGET = 5
EXIT_OTHER = 6


class _Context:
    def __init__(self, args, argv):
        self.args = args
        self.argv = argv
        self.scale = 1.0 / math.log(2) if args.bits else 1.0
        self.units = "bits" if args.bits else "nats"
        self.digest = None

    def info(self, v) -> float:
        """An information quantity in the display unit."""
        return float(v) * self.scale


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def _load(ctx: _Context):
    if not ctx.args.input:
        raise InvalidFile("--input is required for this command")
    cf = read_channel_file(ctx.args.input)
    ctx.digest = file_digest(ctx.args.input)
    return cf


def _joint(ctx: _Context):
    cf = _load(ctx)
    p_x = cf.p_x
    if ctx.args.uniformize or p_x is None:
        if not ctx.args.uniformize:
            raise InvalidFile("the file has no p_x; add one or pass --uniformize")
        p_x = find_uniformizing_input(cf.channel)
        if isinstance(p_x, Infeasible):
            raise NoUniformizingInput("uniform p(Y) is outside the convex hull of the channel columns")
    return cf, p_x, JointDist.from_channel(cf.channel, p_x)


def _pair_json(p: EquivariancePair) -> dict:
    return {"sigma": p.sigma.cycle_notation(), "tau": p.tau.cycle_notation(),
            "sigma_map": list(p.sigma.map), "tau_map": list(p.tau.map)}


def _matrix_json(m: np.ndarray, mode: str) -> list:
    return [[number_to_json(v, mode) for v in row] for row in m]


def _exact_extra(name: str, v) -> dict:
    expr = nats_expression(v)
    return {f"{name}_exact": expr} if expr is not None else {}


def _parse_perm(text: str, n: int, what: str) -> Permutation:
    try:
        p = Permutation(int(t) for t in text.split(","))
    except ValueError as exc:
        raise InvalidFile(f"bad {what} permutation {text!r}: {exc}") from None
    if p.size != n:
        raise InvalidFile(f"{what} permutation has {p.size} entries, expected {n}")
    return p


def _kappa(ctx: _Context, j: JointDist):
    """Closed-form kappa at lambda = I(X;Y), or the iterative solution at --lambda."""
    lam = ctx.args.lam
    if lam is None:
        return solve_iib_max(j).kappa, "closed-form", float(mutual_information(j))
    if len(lam) != 1:
        raise InvalidFile("this command takes a single --lambda value")
    sol = solve_iib_at(j, lam[0], SolverConfig(seed=ctx.args.seed))
    return sol.kappa, "iterative", sol.lambda_achieved


# ---------------------------------------------------------------------------
# commands; each returns (results dict, text lines, exit code)
# ---------------------------------------------------------------------------


def cmd_partition(ctx: _Context):
    cf, p_x, j = _joint(ctx)
    sol = solve_iib_max(j)
    part = sol.partition
    masses = part.class_masses()
    classes = []
    for k, cls in enumerate(part.classes, start=1):
        classes.append({"label": k, "ratio": number_to_json(part.ratios[k - 1], j.mode),
                        "mass": number_to_json(masses.mass[k - 1], j.mode),
                        "cells": [list(divmod(c, j.ny)) for c in cls]})
    labels = part.labels().reshape(j.nx, j.ny).tolist()
    res = {
        "mode": j.mode,
        "p_x": [number_to_json(v, j.mode) for v in p_x.mass],
        "mutual_information": ctx.info(sol.lambda_achieved),
        "class_entropy": ctx.info(sol.objective),
        "n_classes": part.n_classes,
        "classes": classes,
        "complement": [list(divmod(c, j.ny)) for c in part.complement],
        "kappa_labels": labels,
        **_exact_extra("mutual_information", sol.lambda_achieved),
        **_exact_extra("class_entropy", sol.objective),
    }
    lines = [f"classes: {part.n_classes}"]
    for c in classes:
        lines.append(f"  S_{c['label']}: ratio {c['ratio']}, mass {c['mass']}, cells {c['cells']}")
    lines += [f"I(X;Y) = {res['mutual_information']:.6f} {ctx.units}",
              f"H(pi)  = {res['class_entropy']:.6f} {ctx.units}",
              f"kappa labels (row x, column y): {labels}"]
    return res, lines, EXIT_OK


def cmd_group(ctx: _Context):
    cf = _load(ctx)
    cfg = SearchConfig(tol=ctx.args.tol if ctx.args.tol is not None else 1e-12,
                       max_nodes=ctx.args.budget)
    g = enumerate_group(cf.channel, cfg)
    gens = g.generators()
    res = {"order": g.order, "nodes": g.nodes, "pairs": [_pair_json(p) for p in g.pairs],
           "generators": [_pair_json(p) for p in gens]}
    lines = [f"order: {g.order}", "generators: " + (", ".join(str(p) for p in gens) or "none"),
             "pairs:"] + [f"  {p}" for p in g.pairs]
    return res, lines, EXIT_OK


def cmd_verify_theorem1(ctx: _Context):
    cf = _load(ctx)
    rep = verify_theorem1(cf.channel)
    mode = cf.channel.mode

    def listing(s):
        return [_pair_json(p) for p in sorted(s)]

    res = {"passed": rep.passed, "order": rep.order, "summary": rep.summary(), "method": rep.method,
           "p_x": [number_to_json(v, mode) for v in rep.p_x.mass],
           "A": listing(rep.channel_pairs), "B": listing(rep.kappa_pairs),
           "C": listing(rep.ratio_pairs)}
    return res, [rep.summary()], EXIT_OK if rep.passed else EXIT_FAILED


def cmd_verify_reductions(ctx: _Context):
    args = ctx.args
    tol = args.tol if args.tol is not None else 1e-10
    rng = np.random.default_rng(args.seed)
    fixed = None
    if args.input:
        _, _, fixed = _joint(ctx)
    worst_ib = worst_sib = 0.0
    for k in range(args.trials):
        if fixed is not None:
            j = fixed.to_float()
        else:
            j = random_joint(int(rng.integers(2, 5)), int(rng.integers(2, 5)),
                             int(rng.integers(2**32)))
        kx = random_channel(j.nx, int(rng.integers(1, 5)), rng)
        ky = random_channel(j.ny, int(rng.integers(1, 5)), rng)
        worst_ib = max(worst_ib, verify_ib_identities(kx, j, tol).discrepancy)
        worst_sib = max(worst_sib, verify_sib_identities(kx, ky, j, tol).discrepancy)
    passed = max(worst_ib, worst_sib) <= tol
    res = {"trials": args.trials, "tol": tol, "ib_max_discrepancy": ctx.info(worst_ib),
           "sib_max_discrepancy": ctx.info(worst_sib), "passed": passed}
    lines = [f"trials: {args.trials}",
             f"IB  max discrepancy: {res['ib_max_discrepancy']:.3e} {ctx.units}",
             f"SIB max discrepancy: {res['sib_max_discrepancy']:.3e} {ctx.units}",
             ("PASS" if passed else "FAIL") + f" (tol {tol:g})"]
    return res, lines, EXIT_OK if passed else EXIT_FAILED


def _pairs_to_check(ctx: _Context, cf, kappa):
    args = ctx.args
    mode = kappa.mode
    if args.pair:
        mu, eta = read_pair_matrices(args.pair)
        return [("file", SoftPair(mu, eta))]
    if args.perm:
        if "/" not in args.perm:
            raise InvalidFile("--perm takes 'sigma/tau', e.g. 1,0/1,0")
        s, t = args.perm.split("/", 1)
        pair = EquivariancePair(_parse_perm(s, kappa.x_size, "sigma"),
                                _parse_perm(t, kappa.y_size, "tau"))
        return [(str(pair), SoftPair.from_permutations(pair, mode))]
    g = enumerate_group(cf.channel)
    return [(str(p), SoftPair.from_permutations(p, mode)) for p in g.pairs]


def cmd_soft_check(ctx: _Context):
    cf, _, j = _joint(ctx)
    kappa, source, lam = _kappa(ctx, j)
    tol = ctx.args.tol if ctx.args.tol is not None else 0.0
    rows = []
    for name, pair in _pairs_to_check(ctx, cf, kappa):
        ok = is_soft_equivariance(kappa, pair, tol)
        rows.append({"pair": name, "satisfied": ok,
                     "kernel_residual": number_to_json(kernel_residual(kappa, pair), pair.mode)})
    res = {"kappa_source": source, "lambda": ctx.info(lam), "tol": tol, "pairs": rows}
    lines = [f"kappa: {source} at lambda = {res['lambda']:.6f} {ctx.units}"]
    lines += [f"  {r['pair']}: {'yes' if r['satisfied'] else 'no'} (residual {r['kernel_residual']})"
              for r in rows]
    return res, lines, EXIT_OK


def cmd_soft_search(ctx: _Context):
    cf, _, j = _joint(ctx)
    kappa, source, lam = _kappa(ctx, j)
    cfg = SoftSearchConfig(seeds=ctx.args.trials, base_seed=ctx.args.seed,
                           residual_tol=ctx.args.tol if ctx.args.tol is not None else 1e-8)
    found = search_soft_equivariances(kappa, cfg)
    rows = [{"mu": _matrix_json(p.mu.matrix, p.mode), "eta": _matrix_json(p.eta.matrix, p.mode),
             "kernel_residual": float(kernel_residual(kappa, p))} for p in found]
    res = {"kappa_source": source, "lambda": ctx.info(lam), "seeds": cfg.seeds, "found": len(rows),
           "pairs": rows}
    lines = [f"kappa: {source}; {len(rows)} distinct pairs (identity included) from {cfg.seeds} seeds"]
    for k, r in enumerate(rows):
        lines.append(f"  [{k}] mu={r['mu']} eta={r['eta']} residual={r['kernel_residual']:.2e}")
    return res, lines, EXIT_OK


def cmd_solve(ctx: _Context):
    cf, _, j = _joint(ctx)
    if not ctx.args.lam:
        raise InvalidFile("solve needs --lambda (one or more values, in nats)")
    cfg = SolverConfig(seed=ctx.args.seed)
    if len(ctx.args.lam) == 1:
        sol = solve_iib_at(j, ctx.args.lam[0], cfg)
        pts = [{"lambda_target": ctx.info(ctx.args.lam[0]),
                "lambda_achieved": ctx.info(sol.lambda_achieved),
                "objective": ctx.info(sol.objective),
                "beta": sol.diagnostics["beta"], "converged": sol.diagnostics["converged"],
                "kappa": _matrix_json(sol.kappa.matrix, FLOAT)}]
    else:
        pts = [{"lambda_target": ctx.info(p.lambda_target),
                "lambda_achieved": ctx.info(p.lambda_achieved),
                "objective": ctx.info(p.objective), "raw_objective": ctx.info(p.raw_objective)}
               for p in pareto_sweep(j, ctx.args.lam, cfg)]
    res = {"mutual_information": ctx.info(mutual_information(j.to_float())), "points": pts}
    lines = [f"I(X;Y) = {res['mutual_information']:.6f} {ctx.units}"]
    lines += [f"  target {p['lambda_target']:.6f}: achieved {p['lambda_achieved']:.6f}, "
              f"objective {p['objective']:.6f}" for p in pts]
    return res, lines, EXIT_OK


def cmd_gen(ctx: _Context):
    a = ctx.args
    blocks = tuple(int(b) for b in a.blocks.split(",")) if a.blocks else ()
    try:
        spec = GeneratorSpec(a.kind, a.n, a.m, a.epsilon, a.seed, a.mode, blocks)
    except ValueError as exc:
        raise InvalidFile(str(exc)) from None
    ch = generate(spec)
    p_x = None
    if a.uniformize:
        p_x = find_uniformizing_input(ch)
        if isinstance(p_x, Infeasible):
            raise NoUniformizingInput("generated channel has no uniformizing input")
    doc = channel_document(ch, p_x)
    if a.output:
        write_channel_file(a.output, ch, p_x)
    res = {"kind": a.kind, "x_size": ch.n_in, "y_size": ch.n_out, "output": a.output, "channel": doc}
    lines = [f"wrote {a.output}"] if a.output else [json.dumps(doc, indent=2)]
    return res, lines, EXIT_OK


def cmd_perturb(ctx: _Context):
    cf = _load(ctx)
    a = ctx.args
    eps_list = a.epsilon_list or [0.0, 0.01, 0.05]
    fracs = tuple(a.lambda_fractions) if a.lambda_fractions else (1.0,)
    cfg = PerturbationConfig(lambda_fractions=fracs,
                             solver=SolverConfig(restarts=2, seed=a.seed))
    rows = []
    for eps in eps_list:
        for s in range(a.seed, a.seed + a.seeds):
            rep = perturbation_study(cf.channel, eps, s, cfg)
            for lr in rep.results:
                rows.append({"epsilon": eps, "seed": s, "lambda": ctx.info(lr.lambda_target),
                             "residuals": {str(p): lr.residuals[p] for p in rep.pairs}})
    res = {"epsilons": eps_list, "seeds": a.seeds, "lambda_fractions": list(fracs), "rows": rows}
    lines = []
    for eps in eps_list:
        sel = [r for r in rows if r["epsilon"] == eps]
        pairs = sel[0]["residuals"].keys() if sel else []
        for p in pairs:
            mean = sum(r["residuals"][p] for r in sel) / len(sel)
            lines.append(f"epsilon {eps:g}: pair {p} mean residual {mean:.4g}")
    return res, lines, EXIT_OK


COMMANDS = {
    "partition": cmd_partition,
    "group": cmd_group,
    "verify-theorem1": cmd_verify_theorem1,
    "verify-reductions": cmd_verify_reductions,
    "soft-check": cmd_soft_check,
    "soft-search": cmd_soft_search,
    "solve": cmd_solve,
    "gen": cmd_gen,
    "perturb": cmd_perturb,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="channel file (JSON)")
    common.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--budget", type=int, default=10**7, help="group-search node budget")
    common.add_argument("--lambda", dest="lam", type=float, nargs="+", default=None,
                        metavar="F", help="target(s) for the preserved divergence, in nats")
    common.add_argument("--bits", action="store_true", help="report information in bits")
    common.add_argument("--uniformize", action="store_true",
                        help="use an input distribution that makes p(Y) uniform")

    parser = argparse.ArgumentParser(prog="iib", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name in ("verify-reductions", "soft-search"):
            sp.add_argument("--trials", type=int, default=100 if name == "verify-reductions" else 32)
        if name == "soft-check":
            sp.add_argument("--pair", metavar="PATH", help="pair file with mu and eta matrices")
            sp.add_argument("--perm", metavar="S/T", help="permutation pair, e.g. 1,0/1,0")
        if name == "gen":
            sp.add_argument("--kind", choices=KINDS, required=True)
            sp.add_argument("--n", type=int, default=3)
            sp.add_argument("--m", type=int, default=None)
            sp.add_argument("--epsilon", type=float, default=0.0)
            sp.add_argument("--mode", choices=(EXACT, FLOAT), default=EXACT)
            sp.add_argument("--blocks", default=None, help="X-block sizes, e.g. 2,1")
            sp.add_argument("--output", metavar="PATH")
        if name == "perturb":
            sp.add_argument("--epsilon", dest="epsilon_list", type=float, nargs="+")
            sp.add_argument("--seeds", type=int, default=5)
            sp.add_argument("--lambda-fractions", type=float, nargs="+")
    return parser


def _json_default(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (ExactNats, np.floating)):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    ctx = _Context(args, argv)
    start = time.perf_counter()
    try:
        results, lines, code = COMMANDS[args.command](ctx)
    except InvalidFile as exc:
        print(f"iib: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MarginalNotFullSupport as exc:
        print(f"iib: {exc}", file=sys.stderr)
        return EXIT_MARGINAL
    except NoUniformizingInput as exc:
        print(f"iib: {exc}", file=sys.stderr)
        return EXIT_NO_UNIFORMIZING
    except SearchBudgetExceeded as exc:
        print(f"iib: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (JointNotFullySupported, IIBError, ValueError) as exc:
        print(f"iib: {exc}", file=sys.stderr)
        return EXIT_OTHER
    elapsed = time.perf_counter() - start
    if args.json:
        report = make_report(args.command, argv, ctx.digest, results,
                             {"total_seconds": elapsed}, ctx.units)
        print(json.dumps(report, indent=2, default=_json_default, sort_keys=False))
    else:
        print("\n".join(lines))
    return code


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
