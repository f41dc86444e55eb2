"""Command-line front end.

    izcorr hciz --x "0,1" --y "0,1"
    izcorr correlators --x "0,1" --y "0,1" --format csv
    izcorr resolvent --x "0,1+2i" --y "0,1" --point "5,7" --point "2i,3"
    izcorr verify --n 3 --trials 25 --seed 42 --tol 1e-9
    izcorr mc --x "0,1" --y "0,1" --samples 200000 --seed 7

Results go to stdout (JSON by default, or CSV); diagnostics go to stderr.
Exit codes: 0 success, 2 invalid input, 3 a check outside tolerance,
4 Monte Carlo failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence, TextIO

import numpy as np

from .correlators import correlator_matrix
from .errors import IZError, MonteCarloError, StochasticityViolation, ValidationError
from .hciz import hciz_probability_normalized, hciz_value
from .oracles import MC_BLOCKS, mc_correlator_matrix, mc_hciz
from .resolvent import ResolventEvaluator
from .spectra import make_pair
from .verify import VerifyConfig, run_verification

COMMANDS = ("hciz", "correlators", "resolvent", "verify", "mc")
THREADS_ENV = "IZCORR_THREADS"

EXIT_OK, EXIT_INVALID, EXIT_CHECK, EXIT_MC = 0, 2, 3, 4


# ------------------------------------------------------------ serialization


def parse_complex(text: str) -> complex:
    """Accept 1, -0.5, 2i, 1+2i, 1-2j."""
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise ValueError(f"cannot parse {text!r} as a complex number") from None


def parse_list(text: str) -> list[complex]:
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def dumps(obj: Any) -> str:
    """JSON with every float at 17 significant digits; complex as [re, im]."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _pairs(values) -> list[list[float]]:
    return [[complex(v).real, complex(v).imag] for v in values]


def _unpairs(values) -> list[complex]:
    return [complex(re, im) for re, im in values]


@dataclass
class JobSpec:
    """One CLI invocation: a command, the spectra and command options."""

    command: str
    x: list[complex] = field(default_factory=list)
    y: list[complex] = field(default_factory=list)
    points: list[tuple[complex, complex]] = field(default_factory=list)
    normalization: str = "unit"
    output_format: str = "json"
    precision: str | int = "auto"
    threads: int | None = None
    samples: int = 200_000
    seed: int = 0
    blocks: int = MC_BLOCKS
    n: int = 3
    trials: int = 25
    tol: float = 1e-9

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.normalization not in ("unit", "haar"):
            raise ValueError("normalization must be 'unit' or 'haar'")
        if self.output_format not in ("json", "csv"):
            raise ValueError("format must be 'json' or 'csv'")
        self.x = [complex(v) for v in self.x]
        self.y = [complex(v) for v in self.y]
        self.points = [(complex(a), complex(b)) for a, b in self.points]

    def to_json(self) -> str:
        d = asdict(self)
        d["x"], d["y"] = _pairs(self.x), _pairs(self.y)
        d["points"] = [_pairs(p) for p in self.points]
        return dumps(d)

    @classmethod
    def from_json(cls, text: str) -> JobSpec:
        d = json.loads(text)
        d["x"], d["y"] = _unpairs(d["x"]), _unpairs(d["y"])
        d["points"] = [tuple(_unpairs(p)) for p in d["points"]]
        return cls(**d)


# ------------------------------------------------------------------ commands


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _split(values) -> list[float]:
    out = []
    for v in values:
        out += [complex(v).real, complex(v).imag]
    return out


def _run_hciz(job: JobSpec, err: TextIO):
    pair = make_pair(job.x, job.y)
    f = hciz_value if job.normalization == "unit" else hciz_probability_normalized
    v = f(pair, job.precision)
    if job.output_format == "csv":
        return _csv(["log_magnitude", "phase_re", "phase_im"], [[v.log_magnitude, v.phase.real, v.phase.imag]])
    return dumps({"log_magnitude": v.log_magnitude, "phase": v.phase}) + "\n"


def _run_correlators(job: JobSpec, err: TextIO):
    pair = make_pair(job.x, job.y)
    p = correlator_matrix(pair, job.precision, threads=job.threads)
    print(f"condition estimate {p.condition:.3g}, working dps {p.dps or 'double'}", file=err)
    if job.output_format == "csv":
        header = [f"j{j}_{part}" for j in range(p.n) for part in ("re", "im")]
        return _csv(header, [_split(row) for row in p.p])
    return dumps({"p": [[complex(v) for v in row] for row in p.p]}) + "\n"


def _run_resolvent(job: JobSpec, err: TextIO):
    pair = make_pair(job.x, job.y)
    if not job.points:
        raise ValueError("resolvent needs at least one --point")
    ev = ResolventEvaluator(pair, job.precision)
    print(f"condition estimate {ev.condition:.3g}, working dps {ev.dps or 'double'}", file=err)
    values = [(x, y, ev.w(x, y)) for x, y in job.points]
    if job.output_format == "csv":
        return _csv(["x_re", "x_im", "y_re", "y_im", "w_re", "w_im"], [_split(v) for v in values])
    return dumps({"values": [{"x": x, "y": y, "w": w} for x, y, w in values]}) + "\n"


def _run_verify(job: JobSpec, err: TextIO):
    report = run_verification(VerifyConfig(n=job.n, trials=job.trials, seed=job.seed, tol=job.tol, precision=job.precision))
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: max error {c.max_error:.3g} (tol {c.tol:g})", file=err)
    if job.output_format == "csv":
        text = _csv(["name", "tol", "max_error", "count", "passed"], [[c.name, c.tol, c.max_error, c.count, c.passed] for c in report.checks])
    else:
        text = dumps(report.to_dict()) + "\n"
    return text, (EXIT_OK if report.passed else EXIT_CHECK)


def _run_mc(job: JobSpec, err: TextIO):
    pair = make_pair(job.x, job.y)
    est = mc_hciz(pair, job.samples, job.seed, job.blocks, job.threads)
    mean, se = mc_correlator_matrix(pair, job.samples, job.seed, job.blocks, job.threads)
    print(f"seed {job.seed}, {job.blocks} blocks, {job.samples} samples", file=err)
    if job.output_format == "csv":
        rows = [["hciz", "", "", est.mean.real, est.mean.imag, est.std_error]]
        rows += [["p", i, j, mean[i, j].real, mean[i, j].imag, float(se[i, j])] for i in range(pair.n) for j in range(pair.n)]
        return _csv(["quantity", "i", "j", "mean_re", "mean_im", "std_error"], rows)
    return dumps(
        {
            "hciz": {"mean": est.mean, "std_error": est.std_error},
            "p": {"mean": [[complex(v) for v in row] for row in mean], "std_error": se},
            "samples": job.samples,
            "seed": job.seed,
            "blocks": job.blocks,
        }
    ) + "\n"


_RUNNERS = {
    "hciz": _run_hciz,
    "correlators": _run_correlators,
    "resolvent": _run_resolvent,
    "verify": _run_verify,
    "mc": _run_mc,
}


def run(job: JobSpec, out: TextIO | None = None, err: TextIO | None = None) -> int:
    """Execute a job; write results to ``out`` (stdout) only when the command succeeds."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        result = _RUNNERS[job.command](job, err)
    except MonteCarloError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_MC
    except StochasticityViolation as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CHECK
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INVALID
    except IZError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CHECK
    text, code = result if isinstance(result, tuple) else (result, EXIT_OK)
    out.write(text)
    return code


# --------------------------------------------------------------------- parse


def _precision(text: str) -> str | int:
    if text in ("auto", "double"):
        return text
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="izcorr", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    common.add_argument("--precision", type=_precision, default="auto", help="auto, double, or an mpmath dps")
    common.add_argument("--threads", type=int, default=None, help=f"worker bound (default from ${THREADS_ENV})")
    spectra = argparse.ArgumentParser(add_help=False)
    spectra.add_argument("--x", help='comma-separated eigenvalues, e.g. "0,1+2i"')
    spectra.add_argument("--y")
    spectra.add_argument("--input", help='JSON file {"x": [[re, im], ...], "y": [[re, im], ...]}')

    p = sub.add_parser("hciz", parents=[common, spectra], help="log of the HCIZ integral")
    p.add_argument("--normalization", choices=("unit", "haar"), default="unit")
    sub.add_parser("correlators", parents=[common, spectra], help="matrix of <|U|^2> correlators")
    p = sub.add_parser("resolvent", parents=[common, spectra], help="W(x, y) at given points")
    p.add_argument("--point", action="append", default=[], help='"x,y", repeatable')
    p = sub.add_parser("verify", parents=[common], help="randomized property battery")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, default=1e-9)
    p = sub.add_parser("mc", parents=[common, spectra], help="Monte Carlo estimates over Haar unitaries")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blocks", type=int, default=MC_BLOCKS)
    return parser


def job_from_args(args: argparse.Namespace) -> JobSpec:
    kw: dict[str, Any] = {
        "command": args.command,
        "output_format": args.output_format,
        "precision": args.precision,
        "threads": args.threads if args.threads is not None else _env_threads(),
    }
    if hasattr(args, "input"):
        if args.input:
            with open(args.input) as fh:
                data = json.load(fh)
            kw["x"], kw["y"] = _unpairs(data["x"]), _unpairs(data["y"])
        elif args.x is not None and args.y is not None:
            kw["x"], kw["y"] = parse_list(args.x), parse_list(args.y)
        else:
            raise ValueError("give both --x and --y, or --input")
    for name in ("normalization", "samples", "seed", "blocks", "n", "trials", "tol"):
        if hasattr(args, name):
            kw[name] = getattr(args, name)
    if hasattr(args, "point"):
        pts = []
        for text in args.point:
            vals = parse_list(text)
            if len(vals) != 2:
                raise ValueError(f"--point needs two values, got {text!r}")
            pts.append((vals[0], vals[1]))
        kw["points"] = pts
    return JobSpec(**kw)


def _env_threads() -> int | None:
    value = os.environ.get(THREADS_ENV)
    return int(value) if value else None


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = job_from_args(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(job)


if __name__ == "__main__":
    sys.exit(main())
