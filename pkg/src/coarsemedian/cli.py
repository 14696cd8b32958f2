"""Command-line front end.

Every analysis subcommand embeds a RunManifest in its JSON report; with a
fixed seed and inputs the report bytes are identical across runs and
thread counts (timestamps are omitted unless --timestamp is given).
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import datetime
import hashlib
import json
import sys
from dataclasses import dataclass

from . import __version__
from .axioms import (bounded_valency_profile, check_4pt, check_m1_m2,
                     check_median_5pt, coarse_params, m3prime_constant,
                     quasi_geodesic_check)
from .core import FiniteTernarySpace
from .errors import (BudgetError, InputError, InsufficientRangeError,
                     StructureError, UnsupportedError)
from .generators import (PerturbationSpec, gen_graph_median, gen_grid,
                         gen_hypercube, gen_product, gen_spiked_line,
                         gen_tree_random, perturb, reference_metric)
from .intervals import (intervals_from_median, roundtrip_interval_defect,
                        roundtrip_median_defect, structure_params)
from .metrics import gromov_delta, induced_metric, quasi_isometry_fit
from .rank import (CoarseCube, cube_decomposition, rank_report,
                   slim_interval_delta)
from .spaceio import (dump_report, jsonable, load_graph, load_metric,
                      load_space, save_metric, save_space)

DEFAULT_BUDGET = 300_000_000
DEFAULT_SAMPLES = 1_000_000


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def make_manifest(args, inputs):
    return {
        "version": __version__,
        "argv": args._argv,
        "seed": getattr(args, "seed", None),
        "budget": getattr(args, "budget", None),
        "samples": getattr(args, "sample", None),
        "threads": getattr(args, "threads", None),
        "inputs": {p: _digest(p) for p in inputs},
        "timestamp": (datetime.datetime.now(datetime.timezone.utc).isoformat()
                      if getattr(args, "timestamp", False) else None),
    }


@contextlib.contextmanager
def _out(args):
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            yield fh
    else:
        yield sys.stdout


def resolve_metric(args, space):
    name = getattr(args, "metric", "induced")
    if name == "induced":
        return induced_metric(space)
    if name == "reference":
        return reference_metric(space)
    return load_metric(name)


def cmd_gen(args):
    kind = args.kind
    if kind == "hypercube":
        space = gen_hypercube(args.n)
    elif kind == "grid":
        space = gen_grid([int(x) for x in args.dims.split(",")])
    elif kind == "tree":
        space = gen_tree_random(args.n, args.seed)
    elif kind == "graph":
        space = gen_graph_median(load_graph(args.file))
    elif kind == "product":
        space = gen_product(load_space(args.a), load_space(args.b))
    elif kind == "spiked-line":
        T, X, _ = gen_spiked_line(args.m)
        space = T if args.part == "T" else X
    elif kind == "perturb":
        base = load_space(args.space)
        d = reference_metric(base)
        space = perturb(base, d, PerturbationSpec(args.radius, args.seed))
    else:
        raise InputError(f"unknown generator {kind!r}")
    if args.output:
        save_space(space, args.output)
    else:
        dump_report({"space": space.label, "n": space.size}, sys.stdout)
    return 0


def cmd_metric(args):
    space = load_space(args.space)
    d = reference_metric(space) if args.reference else induced_metric(space)
    if args.output:
        save_metric(d, args.output)
    else:
        save_metric_stream(d, sys.stdout)
    return 0


def save_metric_stream(d, fh):
    fh.write(f"{d.size}\n")
    for i in range(d.size):
        fh.write(" ".join(str(int(v)) if d.den == 1 else f"{int(v)}/{d.den}"
                          for v in d.num[i]) + "\n")


def cmd_axioms(args):
    space = load_space(args.space)
    d = resolve_metric(args, space)
    report = {
        "manifest": make_manifest(args, [args.space]),
        "space": {"label": space.label, "n": space.size},
        "m1_m2": check_m1_m2(space),
        "four_point": check_4pt(space, args.budget, args.sample, args.seed,
                                args.threads),
        "five_point": check_median_5pt(space, args.budget, args.sample,
                                       args.seed, args.threads),
        "m3prime": m3prime_constant(space, args.budget, args.sample,
                                    args.seed, args.threads),
        "coarse_params": coarse_params(space, d, args.budget, args.sample,
                                       args.seed, args.threads),
        "valency_profile": bounded_valency_profile(space),
        "quasi_geodesic_C1": quasi_geodesic_check(space, 1),
        # (C1) asks for a proper bornologous envelope; properness is vacuous
        # on a finite space, so only the displacement envelope is reported
        "notes": ["properness of the displacement envelope is vacuous at "
                  "finite size"],
    }
    report["quasi_geodesic_C1"] = {
        "connected": report["quasi_geodesic_C1"].connected,
        "fit": report["quasi_geodesic_C1"].fit,
    }
    with _out(args) as fh:
        dump_report(report, fh)
    return 0


def cmd_roundtrip(args):
    space = load_space(args.space)
    d = resolve_metric(args, space)
    istruct = intervals_from_median(space)
    radii = [0] if space.size > 30 else None
    params = structure_params(istruct, d, radii=radii)
    report = {
        "manifest": make_manifest(args, [args.space]),
        "space": {"label": space.label, "n": space.size},
        "median_roundtrip_defect": roundtrip_median_defect(space, d),
        "interval_roundtrip_defect": roundtrip_interval_defect(istruct, d, 0),
        "phi": params.phi,
        "psi": params.psi,
    }
    with _out(args) as fh:
        dump_report(report, fh)
    return 0


def cmd_rank(args):
    space = load_space(args.space)
    d = resolve_metric(args, space)
    ns = tuple(int(x) for x in args.ns.split(","))
    report = rank_report(space, d, ns=ns, lam=args.lam, budget=args.budget,
                         samples=args.sample, seed=args.seed,
                         threads=args.threads)
    doc = {
        "manifest": make_manifest(args, [args.space]),
        "space": {"label": space.label, "n": space.size},
        "rank": report,
    }
    if args.format == "csv":
        with _out(args) as fh:
            w = csv.writer(fh)
            w.writerow(["series", "x", "y"])
            if report.growth:
                for r, v in sorted(report.growth.table.items()):
                    w.writerow(["growth", r, v])
            for n, env in sorted(report.thin_cubes.items()):
                for xi, m in sorted(env.table.items()):
                    w.writerow([f"thin_cubes_n{n}", xi, m])
        return 0
    with _out(args) as fh:
        dump_report(doc, fh)
    return 0


def cmd_hyperbolicity(args):
    space = load_space(args.space)
    d = resolve_metric(args, space)
    report = {
        "manifest": make_manifest(args, [args.space]),
        "space": {"label": space.label, "n": space.size},
        "gromov_delta": gromov_delta(d),
        "slim_interval_delta": slim_interval_delta(space, d),
    }
    with _out(args) as fh:
        dump_report(report, fh)
    return 0


def cmd_decompose(args):
    space = load_space(args.space)
    d = resolve_metric(args, space)
    try:
        with open(args.cube) as fh:
            cobj = json.load(fh)
        cube = CoarseCube(int(cobj["dimension"]),
                          tuple(int(v) for v in cobj["vertices"]))
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"bad cube file {args.cube}: {exc}") from None
    sub = None
    if args.subcube:
        sub = [int(x) for x in args.subcube.split(",")]
    rep = cube_decomposition(space, d, cube, subcube_points=sub,
                             threads=args.threads)
    doc = {
        "manifest": make_manifest(args, [args.space, args.cube]),
        "space": {"label": space.label, "n": space.size},
        "decomposition": rep,
    }
    with _out(args) as fh:
        dump_report(doc, fh)
    return 0


def cmd_report(args):
    space = load_space(args.space)
    d = resolve_metric(args, space)
    qg = quasi_geodesic_check(space, 1)
    doc = {
        "manifest": make_manifest(args, [args.space]),
        "space": {"label": space.label, "n": space.size},
        "m1_m2": check_m1_m2(space),
        "five_point": check_median_5pt(space, args.budget, args.sample,
                                       args.seed, args.threads),
        "m3prime": m3prime_constant(space, args.budget, args.sample,
                                    args.seed, args.threads),
        "gromov_delta": gromov_delta(d),
        "slim_interval_delta": slim_interval_delta(space, d),
        "valency_profile": bounded_valency_profile(space),
        "quasi_geodesic_C1": {"connected": qg.connected, "fit": qg.fit},
        "qi_fit_reference_vs_induced": None,
    }
    try:
        ref = reference_metric(space)
        doc["qi_fit_reference_vs_induced"] = quasi_isometry_fit(
            ref, induced_metric(space))
    except InputError:
        pass
    with _out(args) as fh:
        dump_report(doc, fh)
    return 0


def _add_common(sp, metric=True):
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sample", type=int, default=DEFAULT_SAMPLES,
                    help="sample count when a scan exceeds the budget")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--timestamp", action="store_true",
                    help="include a wall-clock timestamp in the manifest")
    sp.add_argument("-o", "--output")
    if metric:
        sp.add_argument("--metric", default="induced",
                        help="'induced', 'reference', or a metric file path")


def build_parser():
    ap = argparse.ArgumentParser(prog="coarsemedian",
                                 description="Coarse median geometry toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a space file")
    gsub = g.add_subparsers(dest="kind", required=True)
    p = gsub.add_parser("hypercube")
    p.add_argument("--n", type=int, required=True)
    p = gsub.add_parser("grid")
    p.add_argument("--dims", required=True, help="comma-separated, e.g. 4,4")
    p = gsub.add_parser("tree")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p = gsub.add_parser("graph")
    p.add_argument("--file", required=True)
    p = gsub.add_parser("product")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p = gsub.add_parser("spiked-line")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--part", choices=["T", "X"], default="T")
    p = gsub.add_parser("perturb")
    p.add_argument("--space", required=True)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    for sp in gsub.choices.values():
        sp.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("metric", help="emit a metric matrix file")
    m.add_argument("space")
    grp = m.add_mutually_exclusive_group()
    grp.add_argument("--induced", action="store_true", default=True)
    grp.add_argument("--reference", action="store_true", default=False)
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_metric)

    for name, fn in (("axioms", cmd_axioms), ("roundtrip", cmd_roundtrip),
                     ("rank", cmd_rank), ("hyperbolicity", cmd_hyperbolicity),
                     ("report", cmd_report)):
        sp = sub.add_parser(name)
        sp.add_argument("space")
        _add_common(sp)
        if name == "rank":
            sp.add_argument("--ns", default="1,2",
                            help="comma-separated envelope dimensions")
            sp.add_argument("--lam", type=int, default=0,
                            help="lambda for the multi-median condition")
        sp.set_defaults(func=fn)

    dec = sub.add_parser("decompose")
    dec.add_argument("space")
    dec.add_argument("--cube", required=True, help="cube JSON file")
    dec.add_argument("--subcube", help="comma-separated interval points")
    _add_common(dec)
    dec.set_defaults(func=cmd_decompose)
    return ap


def cli_dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args._argv = argv
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StructureError, UnsupportedError, InsufficientRangeError,
            BudgetError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
