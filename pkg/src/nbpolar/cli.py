"""Command line: ``nbpolar construct | simulate | rates``."""

import argparse
import csv
import logging
import sys

from .ccsk import pn_generate
from .construct import Budgets, construct_code, k_from_rate, wer_bound
from .gf import gf_new
from .rates import effective_rate, estimate_rate_point, normal_approximation
from .sim import (
    RATE_COLUMNS,
    WER_COLUMNS,
    CodeSpecError,
    _write_text,
    dump_code,
    format_csv,
    load_code,
    provenance_lines,
    simulate_point,
    snr_grid,
)

EXIT_USAGE = 2
EXIT_IO = 3

# Flags that do not change any output value; kept out of the provenance record.
_UNRECORDED = {"threads", "out", "dump_candidates", "verbose", "func"}


def _recorded_flags(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in _UNRECORDED}


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", default="-", help="output file (default: stdout)")


def _grid(args):
    if args.snr_db is not None:
        return [args.snr_db]
    if args.snr_start is None or args.snr_stop is None:
        raise ValueError("give --snr-db or both --snr-start and --snr-stop")
    return snr_grid(args.snr_start, args.snr_stop, args.snr_step)


def cmd_construct(args):
    gf = gf_new(args.p)
    N = 1 << args.n
    if (args.rate is None) == (args.k is None):
        raise ValueError("give exactly one of --rate and --k")
    if args.k is not None:
        K = args.k
    else:
        K = k_from_rate(args.rate, args.n)
    budgets = Budgets(args.opt_trials, args.final_trials, args.candidate_subsample)
    pn = pn_generate(args.p)
    table = [] if args.dump_candidates else None
    code, report = construct_code(gf, args.n, K, args.snr_db, budgets, args.seed, pn, args.threads, table)
    dump_code(args.out, code, pn, report, args.seed, budgets.as_dict(), _recorded_flags(args))
    if table is not None:
        with open(args.dump_candidates, "w") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("node", "h", "p_bad", "p_good"))
            w.writerows((node, h, repr(a), repr(b)) for node, h, a, b in table)
    print(f"N={N} K={K} design SNR {args.snr_db} dB: WER_SC bound {wer_bound(report, code.info_set):.4g}",
          file=sys.stderr)


def cmd_simulate(args):
    code, pn, report = load_code(args.code)
    bound = wer_bound(report, code.info_set)
    rows = []
    for snr in _grid(args):
        trials, errors = simulate_point(code, pn, snr, args.trials, args.max_errors, args.seed, args.threads)
        rows.append((snr, trials, errors, errors / trials, bound))
        print(f"{snr:+.2f} dB: {errors}/{trials} word errors", file=sys.stderr)
    header = provenance_lines(seed=args.seed, flags=_recorded_flags(args), gf_poly=code.gf.prim_poly,
                              pn_poly=pn.feedback_poly)
    _write_text(args.out, format_csv(header, WER_COLUMNS, rows))


def cmd_rates(args):
    pn = pn_generate(args.p)
    rows = []
    for i, snr in enumerate(_grid(args)):
        pt = estimate_rate_point(args.p, snr, args.trials, args.seed, pn, args.threads, key=i)
        r_star = normal_approximation(pt.R, pt.V, args.blocklength, args.epsilon)
        rows.append((snr, pt.R, pt.V, float(r_star), effective_rate(pt.R, args.p),
                     float(effective_rate(r_star, args.p))))
    header = provenance_lines(seed=args.seed, flags=_recorded_flags(args), gf_poly=gf_new(args.p).prim_poly,
                              pn_poly=pn.feedback_poly)
    _write_text(args.out, format_csv(header, RATE_COLUMNS, rows))


def build_parser():
    ap = argparse.ArgumentParser(prog="nbpolar", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a code and write its JSON description")
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--rate", type=float)
    c.add_argument("--k", type=int)
    c.add_argument("--snr-db", type=float, required=True)
    c.add_argument("--opt-trials", type=int, default=Budgets.opt_trials)
    c.add_argument("--final-trials", type=int, default=Budgets.final_trials)
    c.add_argument("--candidate-subsample", type=int)
    c.add_argument("--dump-candidates", metavar="CSV")
    _add_common(c)
    c.set_defaults(func=cmd_construct)

    for name, helptext in (("simulate", "Monte-Carlo WER of a constructed code"),
                           ("rates", "capacity, dispersion and normal approximation")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--snr-db", type=float)
        s.add_argument("--snr-start", type=float)
        s.add_argument("--snr-stop", type=float)
        s.add_argument("--snr-step", type=float, default=0.5)
        _add_common(s)
        if name == "simulate":
            s.add_argument("--code", required=True)
            s.add_argument("--trials", type=int, default=1_000_000)
            s.add_argument("--max-errors", type=int, default=100)
            s.set_defaults(func=cmd_simulate)
        else:
            s.add_argument("--p", type=int, required=True)
            s.add_argument("--epsilon", type=float, default=1e-4)
            s.add_argument("--blocklength", type=int, required=True)
            s.add_argument("--trials", type=int, default=100_000)
            s.set_defaults(func=cmd_rates)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (OSError, CodeSpecError) as exc:
        print(f"nbpolar: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"nbpolar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
