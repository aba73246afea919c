"""Command-line interface: ``phasejumps {simulate,detect,evaluate,experiment,kernel-check}``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import experiments
from .detect import Algorithm, DetectionConfig, detect, read_zeros, write_zeros
from .errors import FormatError, InvalidArgument, OutOfBounds
from .field import PhaseFactor, read_field, write_field
from .gwhf import SimConfig, WindowKind, WindowSpec, empirical_covariance, simulate_field
from .stats import match_zeros

EXIT_OK, EXIT_INVALID, EXIT_ASSERT = 0, 1, 2

DEFAULT_PAIRS = [(0, 0), (1, 0), (1 + 1j, 1), (0.5j, -0.5), (-1 + 0.5j, 0.5 - 0.5j), (2, 1 + 1j)]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def decimal(text: str) -> float:
    """Parse a decimal (or ``p/q``) literal exactly, then round once to float."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}") from None


def _window(args) -> WindowSpec:
    kind = args.window
    if kind == "file":
        if not args.window_file:
            raise InvalidArgument("--window file requires --window-file")
        data = np.loadtxt(args.window_file, ndmin=2)
        if data.shape[1] not in (2, 3):
            raise FormatError("window file rows must be 't re [im]'", path=args.window_file)
        im = data[:, 2] if data.shape[1] == 3 else np.zeros(len(data))
        return WindowSpec(WindowKind.CUSTOM, (data[:, 0], data[:, 1] + 1j * im))
    return WindowSpec(WindowKind(kind))


SIGNALS = {"zero": None, "gaussian": experiments.gaussian_signal}


def cmd_simulate(args) -> int:
    cfg = SimConfig(args.domain_half_width, args.delta, args.sigma, SIGNALS[args.signal],
                    _window(args), args.seed)
    F = simulate_field(cfg, realization=args.realization, pad_steps=args.pad_steps)
    write_field(F, args.out)
    return EXIT_OK


def cmd_detect(args) -> int:
    F = read_field(args.input)
    alg = Algorithm(args.algo.upper())
    cfg = DetectionConfig(factor=PhaseFactor.parse(args.factor), chi_max=args.chi_max)
    zeros = detect(F, alg, cfg, weighted=not args.unweighted)
    write_zeros(zeros, args.out, alg, F.spec.L, F.delta)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ref = read_zeros(args.reference)
    comp = read_zeros(args.computed)
    thr = args.threshold if args.threshold is not None else 2 * math.sqrt(comp.delta)
    res = match_zeros(ref.zeros, comp.zeros, thr)
    res.to_json(args.out)
    return EXIT_OK


def _experiment_kwargs(args) -> dict:
    kw = {"seed": args.seed}
    if args.realizations is not None:
        kw["realizations"] = args.realizations
    if args.domain_half_width is not None:
        kw["L"] = args.domain_half_width
    if args.delta is not None:
        kw["delta_fine" if args.name == "exp1" else "delta"] = args.delta
    if args.sigma is not None:
        if args.name != "exp2":
            raise InvalidArgument("--sigma only applies to exp2")
        kw["sigma"] = args.sigma
    if args.window is not None:
        kw["window"] = _window(args)
    return kw


PLOT_TEMPLATE = '''\
"""Plot empirical vs theoretical charge and counts for {name}."""
import csv
import sys

import matplotlib.pyplot as plt

FILES = {files!r}


def load(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


fig, (ax_q, ax_n) = plt.subplots(1, 2, figsize=(10, 4))
for label, path in FILES.items():
    rows = load(path)
    area = [float(r["area"]) for r in rows]
    ax_q.errorbar(area, [float(r["mean_charge"]) for r in rows],
                  yerr=[float(r["se_charge"] or "nan") for r in rows], label=label, capsize=2)
    ax_n.plot(area, [float(r["mean_count"]) for r in rows], label=label)
theory = [r for r in load(next(iter(FILES.values()))) if r["theory_charge"]]
if theory:
    ax_q.plot([float(r["area"]) for r in theory], [float(r["theory_charge"]) for r in theory],
              "k--", label="expected charge")
ax_q.set_xlabel("area")
ax_q.set_ylabel("charge")
ax_n.set_xlabel("area")
ax_n.set_ylabel("number of zeros")
ax_q.legend()
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "{name}.png", dpi=150)
'''


def write_experiment(result: dict, out_dir: Path) -> None:
    name = result["name"]
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = result.get("reports", {})
    files = {}
    for label, rep in reports.items():
        path = out_dir / f"{name}_{label}.csv"
        rep.to_csv(path)
        files[label] = path.name
        rep.to_json(out_dir / f"{name}_{label}.json")
    summary = {k: v for k, v in result.items() if k != "reports"}
    summary["report_files"] = files
    (out_dir / f"{name}_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if files:
        (out_dir / f"{name}_plot.py").write_text(PLOT_TEMPLATE.format(name=name, files=files))


def cmd_experiment(args) -> int:
    fn = experiments.EXPERIMENTS[args.name]
    result = fn(**_experiment_kwargs(args))
    result.setdefault("name", args.name)
    write_experiment(result, Path(args.out))
    for check, ok in sorted(result.get("checks", {"passed": result.get("passed")}).items()):
        print(f"{'PASS' if ok else 'FAIL'} {args.name}.{check}")
    if args.assert_ and not result.get("passed", False):
        return EXIT_ASSERT
    return EXIT_OK


def _parse_pairs(text):
    pairs = []
    for chunk in text.split(";"):
        z, w = chunk.split(",")
        pairs.append((complex(z.replace(" ", "")), complex(w.replace(" ", ""))))
    return pairs


def cmd_kernel_check(args) -> int:
    pairs = _parse_pairs(args.pairs) if args.pairs else DEFAULT_PAIRS
    cfg = SimConfig(args.domain_half_width, args.delta, 1.0, None, _window(args), args.seed)
    res = empirical_covariance(cfg, pairs, args.realizations)
    bound = 5 / math.sqrt(args.realizations)
    rows = []
    for (z, w), (est, ref, dev) in zip(pairs, res):
        rows.append({"z": [z.real, z.imag], "w": [w.real, w.imag], "estimate": [est.real, est.imag],
                     "reference": [ref.real, ref.imag], "deviation": dev, "bound": bound})
        print(f"{'PASS' if dev <= bound else 'FAIL'} z={z} w={w} deviation={dev:.4f} bound={bound:.4f}")
    if args.out:
        Path(args.out).write_text(json.dumps({"pairs": rows}, indent=2) + "\n")
    if args.assert_ and any(r["deviation"] > bound for r in rows):
        return EXIT_ASSERT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phasejumps", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def window_flags(sp, default="hermite1"):
        sp.add_argument("--window", choices=["gaussian", "hermite0", "hermite1", "file"],
                        default=default)
        sp.add_argument("--window-file", help="text file with rows 't re [im]'")

    s = sub.add_parser("simulate", help="simulate an STFT field and write PJF1")
    s.add_argument("--domain-half-width", type=decimal, default=4.0)
    s.add_argument("--delta", type=decimal, default=2 ** -5)
    s.add_argument("--sigma", type=decimal, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--realization", type=int, default=0)
    s.add_argument("--signal", choices=sorted(SIGNALS), default="zero")
    s.add_argument("--pad-steps", type=int, default=2)
    window_flags(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("detect", help="compute charged zeros of a PJF1 field")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--algo", choices=["pj", "pjc", "mgn"], default="pj")
    d.add_argument("--factor", choices=["identity", "twisted"], default="twisted")
    d.add_argument("--chi-max", type=decimal, default=0.9)
    d.add_argument("--unweighted", action="store_true", help="MGN without the Gaussian weight")
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("evaluate", help="match two PJZ1 zero sets")
    e.add_argument("--reference", required=True)
    e.add_argument("--computed", required=True)
    e.add_argument("--threshold", type=decimal, default=None)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    x = sub.add_parser("experiment", help="run a desk-scale experiment")
    x.add_argument("--name", choices=sorted(experiments.EXPERIMENTS), required=True)
    x.add_argument("--realizations", type=int, default=None)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--domain-half-width", type=decimal, default=None)
    x.add_argument("--delta", type=decimal, default=None)
    x.add_argument("--sigma", type=decimal, default=None)
    x.add_argument("--window", choices=["gaussian", "hermite0", "hermite1", "file"], default=None)
    x.add_argument("--window-file")
    x.add_argument("--assert", dest="assert_", action="store_true")
    x.add_argument("--out", required=True, help="output directory")
    x.set_defaults(func=cmd_experiment)

    k = sub.add_parser("kernel-check", help="Monte-Carlo covariance check of the simulator")
    k.add_argument("--domain-half-width", type=decimal, default=4.0)
    k.add_argument("--delta", type=decimal, default=2 ** -5)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--realizations", type=int, default=2000)
    k.add_argument("--pairs", help="'z,w;z,w;...' complex literals, e.g. '0,0;1+1j,1'")
    window_flags(k, default="gaussian")
    k.add_argument("--assert", dest="assert_", action="store_true")
    k.add_argument("--out")
    k.set_defaults(func=cmd_kernel_check)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "realizations", None) is not None and args.realizations < 1:
        parser.error("--realizations must be >= 1")
    try:
        return args.func(args)
    except (InvalidArgument, FormatError, OutOfBounds, OSError) as exc:
        print(f"phasejumps: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
