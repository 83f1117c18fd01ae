"""Command-line interface.

Commands operate on experiment files (see :mod:`gaugelab.experiment`) and
print deterministic text: running the same command on the same file with
the same seed yields byte-identical output.

Exit codes: 0 success, 1 a verified law failed, 2 unreadable input,
3 a computation exceeded its budget.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import configspace as cs
from . import hamiltonian as ham
from .errors import BackendUnsupported, BudgetExceeded, GaugeLabError, ParseError
from .experiment import Experiment, format_float, parse_experiment
from .graph import validate_graph
from .group import FiniteGroup, default_laplacian_spec, verify_group_axioms, \
    verify_laplacian_spec
from .tower import (
    Tower,
    TowerOptions,
    build_tower,
    pushforward_check,
    sample_projective,
    spectral_flow,
    verify_chain,
    verify_tower,
)

EXIT_OK = 0
EXIT_LAW = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3

SCHEMA = "gaugelab.report.v1"


def _load(path: str) -> Experiment:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError("cannot read %s: %s" % (path, exc.strerror))
    return parse_experiment(text)


def _apply_flags(exp: Experiment, args: argparse.Namespace) -> Experiment:
    from dataclasses import replace
    opts = exp.options
    if getattr(args, "seed", None) is not None:
        opts = replace(opts, seed=args.seed)
    if getattr(args, "tol", None) is not None:
        opts = replace(opts, tol_diagram=args.tol,
                       tol_isometry=min(args.tol, opts.tol_isometry),
                       tol_algebra=min(args.tol, opts.tol_algebra))
    if getattr(args, "budget", None) is not None:
        opts = replace(opts, max_dim=args.budget)
    exp.options = opts
    return exp


def _build(exp: Experiment) -> Tower:
    return build_tower(exp.graph, exp.group, exp.inertias, exp.program,
                       exp.options, exp.laplacian_spec)


def _emit(text: str, out_path: Optional[str]) -> None:
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_validate(args: argparse.Namespace) -> int:
    exp = _apply_flags(_load(args.file), args)
    lines = ["# %s validate" % SCHEMA]
    ok = True

    graph_report = validate_graph(exp.graph)
    lines.append("graph: %s" % ("ok" if graph_report.ok else "invalid"))
    for v in graph_report.violations:
        lines.append("  violation %s: %s" % (v.code, v.detail))
    ok = ok and graph_report.ok

    if isinstance(exp.group, FiniteGroup):
        group_report = verify_group_axioms(exp.group)
        lines.append("group %s: %s" % (exp.group.name,
                                       "ok" if group_report.ok else "invalid"))
        for v in group_report.violations:
            lines.append("  violation %s: %s" % (v.code, v.detail))
        ok = ok and group_report.ok
        spec = exp.laplacian_spec or default_laplacian_spec(exp.group)
        spec_report = verify_laplacian_spec(exp.group, spec)
        lines.append("laplacian generators %s: %s"
                     % (sorted(spec.generators),
                        "ok" if spec_report.ok else "invalid"))
        for v in spec_report.violations:
            lines.append("  violation %s: %s" % (v.code, v.detail))
        ok = ok and spec_report.ok
    else:
        lines.append("group U(1) cutoff %d: ok" % exp.group.cutoff)

    covered = exp.inertias.covers(exp.graph)
    lines.append("inertias: %s" % ("ok" if covered else "incomplete"))
    ok = ok and covered
    lines.append("refinement program: %d steps" % len(exp.program))
    lines.append("result: %s" % ("PASS" if ok else "FAIL"))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_LAW


def cmd_verify(args: argparse.Namespace) -> int:
    exp = _apply_flags(_load(args.file), args)
    tower = _build(exp)
    laws = verify_tower(tower)
    measures = pushforward_check(tower)
    lines = ["# %s verify" % SCHEMA,
             "seed: %d" % exp.options.seed,
             "levels: %d" % tower.depth]
    ok = laws.ok and measures.ok
    for report in (laws, measures):
        for check in report.checks:
            lines.append("%s  %-14s %-40s residual=%s tol=%s"
                         % ("ok  " if check.passed else "FAIL",
                            check.location, check.law,
                            format_float(check.residual),
                            format_float(check.tolerance)))
    failed = len(laws.failures()) + len(measures.failures())
    lines.append("checks: %d" % (len(laws.checks) + len(measures.checks)))
    lines.append("failed: %d" % failed)
    lines.append("result: %s" % ("PASS" if ok else "FAIL"))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_LAW


def cmd_spectrum(args: argparse.Namespace) -> int:
    exp = _apply_flags(_load(args.file), args)
    tower = _build(exp)
    flow = spectral_flow(tower, tol=exp.options.tol_diagram)
    lines = ["# %s spectrum" % SCHEMA,
             "seed: %d" % exp.options.seed,
             "levels: %d" % tower.depth,
             "level,kind,eigenvalue,multiplicity"]
    for level, kind, value, mult in flow.rows():
        lines.append("%d,%s,%s,%d" % (level, kind, format_float(value), mult))
    ok = True
    lines.append("certificates: %d" % len(flow.certificates))
    for cert in flow.certificates:
        ok = ok and cert.ok
        lines.append("%s  link %d eigenvalue=%s residual=%s"
                     % ("ok  " if cert.ok else "FAIL", cert.link,
                        format_float(cert.eigenvalue),
                        format_float(cert.residual)))
    for i, stable in enumerate(flow.stabilization):
        ok = ok and stable
        lines.append("%s  reduced spectrum %d->%d %s"
                     % ("ok  " if stable else "FAIL", i, i + 1,
                        "unchanged" if stable else "changed"))
    lines.append("result: %s" % ("PASS" if ok else "FAIL"))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_LAW


def cmd_orbits(args: argparse.Namespace) -> int:
    exp = _apply_flags(_load(args.file), args)
    if not isinstance(exp.group, FiniteGroup):
        raise ParseError("orbit tables need a finite structure group")
    tower = _build(exp)
    lines = ["# %s orbits" % SCHEMA, "levels: %d" % tower.depth]
    ok = True
    for k, level in enumerate(tower.levels):
        table = level.reduction.orbit_table
        count = burnside = len(table.orbits)
        try:
            burnside = cs.burnside_orbit_count(level.graph, exp.group)
            oracle = "burnside=%d" % burnside
        except BudgetExceeded:
            oracle = "burnside=skipped"
        agree = count == burnside
        ok = ok and agree
        lines.append("%s  level %d orbits=%d %s"
                     % ("ok  " if agree else "FAIL", k, count, oracle))
        for j, orbit in enumerate(table.orbits):
            lines.append("  orbit %d size=%d representative=%s"
                         % (j, orbit.size,
                            ",".join(str(v) for v in orbit.representative.values)))
    lines.append("result: %s" % ("PASS" if ok else "FAIL"))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_LAW


def cmd_sample(args: argparse.Namespace) -> int:
    exp = _apply_flags(_load(args.file), args)
    if not isinstance(exp.group, FiniteGroup):
        raise ParseError("projective sampling needs a finite structure group")
    tower = _build(exp)
    chains = sample_projective(tower, seed=exp.options.seed, count=args.count)
    lines = ["# %s sample" % SCHEMA,
             "seed: %d" % exp.options.seed,
             "count: %d" % args.count]
    ok = True
    for i, chain in enumerate(chains):
        consistent = verify_chain(tower, chain)
        ok = ok and consistent
        lines.append("%s  chain %d %s"
                     % ("ok  " if consistent else "FAIL", i,
                        "consistent" if consistent else "inconsistent"))
        for k, config in enumerate(chain):
            lines.append("  level %d: %s"
                         % (k, ",".join(str(v) for v in config.values)))
    lines.append("result: %s" % ("PASS" if ok else "FAIL"))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_LAW


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaugelab",
        description="Gauge fields on finite oriented graphs: build refinement "
                    "towers from experiment files and verify their laws.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("file", help="experiment file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the experiment seed")
        p.add_argument("--tol", type=float, default=None,
                       help="override the law tolerance")
        p.add_argument("--budget", type=int, default=None,
                       help="cap on any level's dimension")
        p.add_argument("--out", default=None, help="also write the report here")

    common(sub.add_parser("validate", help="check the experiment's structures"))
    common(sub.add_parser("verify", help="verify every law of the tower"))
    common(sub.add_parser("spectrum", help="spectra and flow certificates"))
    common(sub.add_parser("orbits", help="gauge orbit tables per level"))
    p_sample = sub.add_parser("sample", help="projectively consistent samples")
    common(p_sample)
    p_sample.add_argument("--count", type=int, default=1,
                          help="number of chains to draw")
    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "orbits": cmd_orbits,
    "sample": cmd_sample,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    except (BudgetExceeded,) as exc:
        print("budget exceeded: %s" % exc, file=sys.stderr)
        return EXIT_BUDGET
    except BackendUnsupported as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    except GaugeLabError as exc:
        print("law failure: %s" % exc, file=sys.stderr)
        return EXIT_LAW


if __name__ == "__main__":
    sys.exit(main())
