"""Command-line entry point ``entropic``.

Exit codes: 0 success, 1 validation failure, 2 solver failure, 64 usage.
``$ENTROPIC_OUT`` overrides the output directory and nothing else.
"""

import argparse
import os
import sys

import numpy as np

from . import io
from .battery import DEFAULT_SEED, run_battery, select
from .dirichlet import DEFAULT_REMAINDER, draw_dirichlet_ferguson, shard_seeds, to_measure
from .domain import Domain
from .entropic_sampling import sample_entropic
from .errors import (ConfigurationError, DomainError, PreconditionError, SolverError,
                     UnsupportedDomainError)
from .measures import Discrete, Empirical
from .metrics import wasserstein_1d
from .transport.one_dim import as_graph, conjugate_measure_1d
from .transport.semidiscrete import conjugate_measure_2d, semidiscrete_weights
from .validation import aggregate, write_json, write_junit

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(value):
    parts = {p.strip() for p in value.split(",") if p.strip()}
    bad = parts - {"json", "csv"}
    if bad or not parts:
        raise argparse.ArgumentTypeError(f"--emit takes json and/or csv, got {value!r}")
    return parts


def _sampling_flags(p):
    p.add_argument("--domain", default="interval", help="interval, circle, square or a domain JSON file")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--truncation-remainder", type=float, default=DEFAULT_REMAINDER)
    p.add_argument("--max-terms", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--emit", type=_emit, default={"json", "csv"})


def build_parser():
    ap = _Parser(prog="entropic", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample-dirichlet", help="draw Dirichlet-Ferguson measures")
    _sampling_flags(p)

    p = sub.add_parser("sample-entropic", help="draw conjugates of Dirichlet-Ferguson measures")
    _sampling_flags(p)
    p.add_argument("--samples", type=int, default=100_000, help="cloud size in 2D")
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("conjugate", help="conjugate a measure file")
    p.add_argument("measure")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None, help="required for planar domains")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--grid-n", type=int, default=None, help="also write distribution functions on n points")
    p.add_argument("--verify-involution", action="store_true")
    p.add_argument("--emit", type=_emit, default={"json", "csv"})

    p = sub.add_parser("tessellate", help="solve for the Laguerre tessellation of sites and masses")
    p.add_argument("sites")
    p.add_argument("--domain", default=None, help="overrides the domain in the sites file")
    p.add_argument("--out", default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=100)

    p = sub.add_parser("validate", help="run the acceptance battery")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--only", default=None, help="comma-separated criterion names or numbers")
    p.add_argument("--out", default=None)
    p.add_argument("--emit", type=_emit, default={"json"})
    p.add_argument("--canary", action="store_true", help=argparse.SUPPRESS)
    return ap


def _check_sampling(args):
    if not args.beta > 0:
        raise ConfigurationError(f"--beta must be positive, got {args.beta!r}")
    if args.count < 1:
        raise ConfigurationError("--count must be at least 1")
    if not 0 < args.truncation_remainder < 1:
        raise ConfigurationError("--truncation-remainder must lie in (0, 1)")


def _manifest(out, command, config, files, failures=()):
    io.write_json(os.path.join(out, "manifest.json"),
                  {"command": command, "config": config, "files": sorted(files),
                   "failures": list(failures)})


def _sampling_config(args, domain):
    return {"beta": args.beta, "seed": args.seed, "count": args.count,
            "truncation_remainder": args.truncation_remainder, "max_terms": args.max_terms,
            "domain": domain.to_json(), "domain_hash": io.domain_hash(domain)}


def cmd_sample_dirichlet(args):
    _check_sampling(args)
    domain = io.parse_domain(args.domain)
    out = io.output_dir(args.out)
    files = []
    for i, s in enumerate(shard_seeds(args.seed, args.count)):
        draw = draw_dirichlet_ferguson(args.beta, domain, np.random.default_rng(s),
                                       args.truncation_remainder, args.max_terms)
        nu = to_measure(draw, domain)
        stem = f"nu_{i:05d}"
        if "csv" in args.emit:
            io.write_csv(os.path.join(out, stem + ".csv"), io.atom_header(domain.dim),
                         io.atom_rows(draw.atoms, draw.weights / draw.weights.sum()))
            files.append(stem + ".csv")
        if "json" in args.emit:
            io.write_json(os.path.join(out, stem + ".json"),
                          dict(io.measure_document(nu), seed=s, remainder=draw.remainder,
                               terms=len(draw)))
            files.append(stem + ".json")
    _manifest(out, "sample-dirichlet", _sampling_config(args, domain), files)
    print(f"wrote {args.count} samples to {out}")
    return EXIT_OK


def cmd_sample_entropic(args):
    _check_sampling(args)
    if args.samples < 1:
        raise ConfigurationError("--samples must be at least 1")
    domain = io.parse_domain(args.domain)
    out = io.output_dir(args.out)
    files, failures = [], []
    for i, s in enumerate(shard_seeds(args.seed, args.count)):
        stem = f"sample_{i:05d}"
        d = os.path.join(out, stem)
        os.makedirs(d, exist_ok=True)
        try:
            smp = sample_entropic(args.beta, domain, seed=s, remainder_below=args.truncation_remainder,
                                  max_terms=args.max_terms, n_samples=args.samples, tol=args.tol)
        except SolverError as exc:
            io.write_json(os.path.join(d, "failure.json"),
                          {"error": str(exc), "residual": exc.residual, "replay": exc.replay})
            failures.append({"sample": i, "seed": s, "residual": exc.residual})
            files.append(f"{stem}/failure.json")
            print(f"sample {i}: solver failure (residual {exc.residual:.3g})", file=sys.stderr)
            continue
        io.write_json(os.path.join(d, "nu.json"), io.measure_document(smp.nu))
        names = ["nu.json"]
        if isinstance(smp.mu, Empirical):
            if "csv" in args.emit:
                io.write_csv(os.path.join(d, "mu.csv"), ["x", "y"], io.cloud_rows(smp.mu.points))
                names.append("mu.csv")
            if "json" in args.emit:
                io.write_json(os.path.join(d, "mu.json"), io.measure_document(smp.mu))
                names.append("mu.json")
            io.write_json(os.path.join(d, "tessellation.json"), smp.tessellation.to_json())
            names.append("tessellation.json")
        else:
            io.write_json(os.path.join(d, "mu.json"), io.measure_document(smp.mu))
            names.append("mu.json")
        io.write_json(os.path.join(d, "holes.json"),
                      {"holes": smp.holes_json(), "truncation": smp.truncation})
        names.append("holes.json")
        files.extend(f"{stem}/{n}" for n in names)
    config = dict(_sampling_config(args, domain), samples=args.samples, tol=args.tol)
    _manifest(out, "sample-entropic", config, files, failures)
    print(f"wrote {args.count - len(failures)} of {args.count} samples to {out}")
    if failures:
        print(f"{len(failures)} solver failures: " + ", ".join(str(f["sample"]) for f in failures),
              file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _involution_gap(mu, conj):
    back = conjugate_measure_1d(conj, keep_graph=True)
    return wasserstein_1d(as_graph(mu), back)


def cmd_conjugate(args):
    mu = io.read_measure(args.measure)
    domain = mu.domain
    out = io.output_dir(args.out)
    files = []
    report = {"input": os.path.basename(args.measure)}
    if domain.dim == 1:
        conj = conjugate_measure_1d(mu)
        io.write_json(os.path.join(out, "conjugate.json"), io.measure_document(conj))
        files.append("conjugate.json")
        if "csv" in args.emit and isinstance(conj, Discrete):
            io.write_csv(os.path.join(out, "conjugate.csv"), io.atom_header(1),
                         io.atom_rows(conj.atoms, conj.weights))
            files.append("conjugate.csv")
        if args.verify_involution:
            gap = _involution_gap(mu, conj)
            report["involution_gap"] = gap
            print(f"involution gap: {gap!r}")
        if args.grid_n:
            if args.grid_n < 2:
                raise ConfigurationError("--grid-n must be at least 2")
            x = np.linspace(0.0, 1.0, args.grid_n)
            fa, fb = as_graph(mu).cdf(x), as_graph(conj).cdf(x)
            io.write_csv(os.path.join(out, "cdf.csv"), ["x", "F_mu", "F_conjugate"], zip(x, fa, fb))
            files.append("cdf.csv")
    else:
        if args.seed is None:
            raise UsageError("--seed is required to conjugate a planar measure")
        if args.verify_involution:
            raise UsageError("--verify-involution is available on 1D domains only")
        if not isinstance(mu, Discrete):
            raise UnsupportedDomainError("planar conjugation takes a discrete measure")
        cloud, tess = conjugate_measure_2d(domain, mu, args.samples, np.random.default_rng(args.seed))
        if "csv" in args.emit:
            io.write_csv(os.path.join(out, "conjugate.csv"), ["x", "y"], io.cloud_rows(cloud.points))
            files.append("conjugate.csv")
        if "json" in args.emit:
            io.write_json(os.path.join(out, "conjugate.json"), io.measure_document(cloud))
            files.append("conjugate.json")
        io.write_json(os.path.join(out, "tessellation.json"), tess.to_json())
        files.append("tessellation.json")
        report.update(seed=args.seed, samples=args.samples, residual=tess.residual)
    io.write_json(os.path.join(out, "report.json"), report)
    files.append("report.json")
    _manifest(out, "conjugate", {"measure": args.measure, "seed": args.seed, "samples": args.samples,
                                 "grid_n": args.grid_n}, files)
    return EXIT_OK


def cmd_tessellate(args):
    doc = io.read_json(args.sites)
    if args.domain is not None:
        domain = io.parse_domain(args.domain)
    elif "domain" in doc:
        domain = Domain.from_json(doc["domain"])
    else:
        domain = Domain.unit_square()
    out = io.output_dir(args.out)
    try:
        tess = semidiscrete_weights(domain, doc["sites"], doc["masses"], tol=args.tol,
                                    max_iter=args.max_iter)
    except SolverError as exc:
        io.write_json(os.path.join(out, "residual.json"),
                      {"converged": False, "residual": exc.residual, "replay": exc.replay})
        print(f"solver did not converge: residual {exc.residual!r}", file=sys.stderr)
        return EXIT_SOLVER
    io.write_json(os.path.join(out, "tessellation.json"), tess.to_json())
    io.write_json(os.path.join(out, "residual.json"),
                  {"converged": True, "residual": tess.residual, "iterations": tess.iterations})
    _manifest(out, "tessellate", {"sites": args.sites, "tol": args.tol, "max_iter": args.max_iter,
                                  "domain": domain.to_json()}, ["tessellation.json", "residual.json"])
    print(f"residual {tess.residual!r} after {tess.iterations} iterations")
    return EXIT_OK


def cmd_validate(args):
    try:
        select(args.only)
    except KeyError as exc:
        raise UsageError(f"unknown criterion {exc.args[0]!r}")
    out = io.output_dir(args.out)
    reports = run_battery(seed=args.seed, only=args.only, canary=args.canary)
    files = []
    for r in reports:
        print(r.line())
        if not r.passed:
            print(f"  replay: {r.replay}")
    if "json" in args.emit:
        write_json(reports, os.path.join(out, "report.json"))
        files.append("report.json")
    if "csv" in args.emit:
        io.write_csv(os.path.join(out, "report.csv"), ["name", "statistic", "threshold", "passed"],
                     [(r.name, r.statistic, r.threshold, int(r.passed)) for r in reports])
        files.append("report.csv")
    write_junit(reports, os.path.join(out, "report.xml"))
    files.append("report.xml")
    _manifest(out, "validate", {"seed": args.seed, "only": args.only}, files)
    return EXIT_OK if aggregate(reports) == 0 else EXIT_VALIDATION


COMMANDS = {
    "sample-dirichlet": cmd_sample_dirichlet,
    "sample-entropic": cmd_sample_entropic,
    "conjugate": cmd_conjugate,
    "tessellate": cmd_tessellate,
    "validate": cmd_validate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"entropic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"entropic: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigurationError, DomainError, PreconditionError, UnsupportedDomainError, OSError, KeyError, ValueError) as exc:
        print(f"entropic: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
