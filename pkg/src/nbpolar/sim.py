"""End-to-end WER simulation and the on-disk formats of codes and curves."""

import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .ccsk import channel_posteriors, pn_generate
from .construct import ReliabilityReport, snr_to_sigma2, wer_bound
from .gf import gf_new
from .mc import GENERATOR, TASK_SIMULATE, batch_plan, map_batches, rng_stream, stream_key
from .polar import CoeffTree, PolarCode, encode, sc_decode

SPEC_FORMAT = "nbpolar-code/1"
WER_COLUMNS = ("snr_db", "trials", "word_errors", "wer_measured", "wer_bound")
RATE_COLUMNS = ("snr_db", "R", "V", "R_star", "R_eff", "R_star_eff")


class CodeSpecError(ValueError):
    """A code file is missing fields or internally inconsistent."""


def snr_key(snr_db):
    return int(round((snr_db + 100.0) * 100.0))


def simulate_point(code, pn, snr_db, trials, max_errors=None, seed=0, threads=1):
    """Word error count of SC decoding at one SNR.

    Batches run in order (``threads`` at a time) and the run stops after the
    first batch that brings the error count to ``max_errors``, so the counts
    do not depend on ``threads``.

    Returns
    -------
    (trials_run, word_errors)
    """
    gf = code.gf
    sigma2 = snr_to_sigma2(snr_db)
    sk = stream_key(TASK_SIMULATE, snr_key(snr_db))
    plan = batch_plan(trials, code.N * gf.q)

    def run(b, size):
        rng = rng_stream(seed, (sk << 32) + b)
        info = rng.integers(0, gf.q, size=(size, code.K))
        D = channel_posteriors(pn, encode(code, code.embed(info)), sigma2, rng)
        info_hat, _ = sc_decode(code, D)
        return int(np.any(info_hat != info, axis=1).sum())

    wave = max(1, threads)
    done = errors = 0
    for start in range(0, len(plan), wave):
        chunk = plan[start : start + wave]
        counts = map_batches(lambda i, size: run(start + i, size), chunk, threads)
        for size, e in zip(chunk, counts):
            done += size
            errors += e
            if max_errors is not None and errors >= max_errors:
                return done, errors
    return done, errors


def snr_grid(start, stop, step):
    if step <= 0:
        raise ValueError("SNR step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError("empty SNR grid")
    return [round(start + i * step, 10) for i in range(count)]


def code_to_dict(code, pn, report, seed, budgets, flags=None):
    return {
        "format": SPEC_FORMAT,
        "provenance": {"version": __version__, "generator": GENERATOR, "flags": flags or {}},
        "p": code.gf.p,
        "n": code.n,
        "gf_poly": code.gf.prim_poly,
        "pn_poly": pn.feedback_poly,
        "design_snr_db": code.design_snr_db,
        "coeffs": [int(h) for h in code.tree.coeffs],
        "info_set": list(code.info_set),
        "error_probs": [float(x) for x in report.error_probs],
        "wer_bound": wer_bound(report, code.info_set),
        "trials": report.trials,
        "seed": seed,
        "budgets": budgets,
    }


def dump_code(path, code, pn, report, seed, budgets, flags=None):
    text = json.dumps(code_to_dict(code, pn, report, seed, budgets, flags), indent=1) + "\n"
    _write_text(path, text)


def code_from_dict(d):
    """Rebuild (code, pn, report) from a decoded code file."""
    try:
        p, n = int(d["p"]), int(d["n"])
        gf = gf_new(p, int(d["gf_poly"]))
        pn = pn_generate(p, int(d["pn_poly"]))
        tree = CoeffTree(n, d["coeffs"])
        probs = np.asarray(d["error_probs"], dtype=float)
        if probs.shape != (1 << n,):
            raise CodeSpecError(f"expected {1 << n} error probabilities, got {probs.size}")
        code = PolarCode(gf, tree, tuple(d["info_set"]), 0, float(d["design_snr_db"]))
        report = ReliabilityReport(probs, int(d.get("trials", 0)), snr_to_sigma2(code.design_snr_db), tree)
    except KeyError as exc:
        raise CodeSpecError(f"code file lacks field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise CodeSpecError(f"invalid code file: {exc}") from None
    return code, pn, report


def load_code(path):
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CodeSpecError(f"{path}: not JSON ({exc})") from None
    return code_from_dict(d)


def provenance_lines(**fields):
    lines = [f"# nbpolar {__version__}", f"# generator: {GENERATOR}"]
    lines += [f"# {k}: {v}" for k, v in fields.items()]
    return lines


def format_csv(header_lines, columns, rows):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def read_csv(path):
    """Rows of a CSV written by :func:`format_csv`, as dicts of strings."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
