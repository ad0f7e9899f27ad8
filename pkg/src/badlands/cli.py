"""Command-line entry point: ``badlands <command> [options]``.

Exit status is 0 on success, 1 on a runtime error (with one diagnostic
line on stderr) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import __version__
from .circuit import build_memory_circuit, parse, serialize
from .experiment import (
    DEFAULT_DRAWS, DEFAULT_SHOTS, EPSILON_THR, HETEROGENEOUS, bads_for, case_config, csv_text,
    dump_json, load_config, pool_draws, read_csv, run_sweep, summary,
)
from .lattice import build_lattice, parse_location
from .noise import apply_defects, heterogeneous_profile, homogeneous_profile
from .report import emit_curves, emit_heatmap
from .sampler import sample, write_shots


def _defect(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected LOCATION=P_DEF, got {text!r}")
    loc, p = text.rsplit("=", 1)
    try:
        return parse_location(loc), float(p)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _distances(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated distances, got {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _add_noise_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-d", "--distance", type=int, required=True, help="odd code distance >= 3")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--p", type=float, help="homogeneous physical error rate")
    g.add_argument("--p-mu", type=float, help="mean rate of a heterogeneous profile")
    p.add_argument("--p-sigma", type=float, default=0.0, help="deviation of the heterogeneous profile")
    p.add_argument("--defect", type=_defect, action="append", default=[],
                   metavar="LOC=P_DEF", help="e.g. 'center data=0.75' or '3,3=0.5' (repeatable)")
    p.add_argument("--seed", type=int, default=0)


def _profile(args):
    lattice = build_lattice(args.distance)
    if args.p is not None:
        if args.p_sigma:
            raise ValueError("--p-sigma needs --p-mu")
        profile = homogeneous_profile(lattice, args.p)
    else:
        profile = heterogeneous_profile(lattice, args.p_mu, args.p_sigma, args.seed)
    return lattice, apply_defects(profile, lattice, args.defect)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="badlands",
        description="Surface-code memory simulations under heterogeneous and defective noise.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("generate", help="write a noisy memory circuit")
    _add_noise_args(p)
    p.add_argument("--rounds", type=int, default=3)
    p.add_argument("--out", help="circuit text file (default: stdout)")
    p.add_argument("--profile-out", help="also write the noise profile as JSON")

    p = sub.add_parser("sample", help="sample detection events from a circuit file")
    p.add_argument("circuit")
    p.add_argument("--shots", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--format", choices=("01", "b8"), default="01")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("sweep", help="run a sweep described by a TOML config")
    p.add_argument("config")
    p.add_argument("--shots", type=_positive_int, help="override shots per point")
    p.add_argument("--seed", type=int, help="override the base seed")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("bad", help="compute BADs from a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--epsilon-thr", type=float, default=EPSILON_THR)
    p.add_argument("--out", help="JSON file (default: stdout)")

    p = sub.add_parser("heatmap", help="draw a noise-profile heatmap")
    _add_noise_args(p)
    p.add_argument("--title")
    p.add_argument("--out", required=True, help="SVG file")

    p = sub.add_parser("curves", help="plot a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--epsilon-thr", type=float, default=EPSILON_THR)
    p.add_argument("--title")
    p.add_argument("--out", required=True, help="SVG file")

    p = sub.add_parser("case", help="run a case-study preset (1-4)")
    p.add_argument("case", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--shots", type=_positive_int, default=DEFAULT_SHOTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--distances", type=_distances, help="comma-separated subset, e.g. 3,5")
    p.add_argument("--draws", type=_positive_int, default=DEFAULT_DRAWS,
                   help="profile draws per heterogeneous point")
    p.add_argument("--out", default=".", help="output directory")
    return parser


def _open_out(path, binary=False):
    if path is None:
        return sys.stdout.buffer if binary else sys.stdout
    return open(path, "wb" if binary else "w", encoding=None if binary else "utf-8",
               newline=None if binary else "\n")


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_generate(args) -> None:
    lattice, profile = _profile(args)
    circuit = build_memory_circuit(lattice, profile, args.rounds)
    _write_text(args.out, serialize(circuit))
    if args.profile_out:
        _write_text(args.profile_out, profile.to_json(lattice))


def _cmd_sample(args) -> None:
    with open(args.circuit, encoding="utf-8") as fh:
        circuit = parse(fh.read())
    result = sample(circuit, args.shots, args.seed, workers=args.threads)
    out = _open_out(args.out, binary=args.format == "b8")
    try:
        write_shots(result, out, args.format)
    finally:
        if args.out is not None:
            out.close()


def _write_sweep(points, config, out_dir: str, stem: str, title: str, x_label: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    doc = summary(points, config.epsilon_thr, config)
    _write_text(os.path.join(out_dir, f"{stem}.csv"), csv_text(points))
    _write_text(os.path.join(out_dir, f"{stem}.json"), dump_json(doc))
    pooled = pool_draws(points)
    emit_curves(pooled, bads_for(pooled, config.epsilon_thr), os.path.join(out_dir, f"{stem}.svg"),
                config.epsilon_thr, title, x_label)


def _x_label(noise_kind: str) -> str:
    return "mean physical error rate p_mu" if noise_kind == HETEROGENEOUS else "physical error rate p"


def _progress(pt) -> None:
    print(f"d={pt.d} p={pt.p:g} sigma={pt.p_sigma:g} defect={pt.defect_loc or '-'}"
          f"{'' if pt.p_def is None else '=' + format(pt.p_def, 'g')} draw={pt.draw_id} "
          f"errors={pt.errors}/{pt.shots}", file=sys.stderr)


def _cmd_sweep(args) -> None:
    config = load_config(args.config)
    if args.shots is not None:
        config.shots = args.shots
    if args.seed is not None:
        config.seed = args.seed
    config.validate()
    points = run_sweep(config, workers=args.threads, progress=_progress)
    _write_sweep(points, config, args.out, "sweep", "sweep", _x_label(config.noise))


def _cmd_bad(args) -> None:
    with open(args.csv, encoding="utf-8", newline="") as fh:
        points = read_csv(fh)
    doc = {"epsilon_thr": args.epsilon_thr,
           "bads": [b.to_dict() for b in bads_for(pool_draws(points), args.epsilon_thr)]}
    _write_text(args.out, dump_json(doc))


def _cmd_heatmap(args) -> None:
    lattice, profile = _profile(args)
    emit_heatmap(profile, lattice, args.out, args.title)


def _cmd_curves(args) -> None:
    with open(args.csv, encoding="utf-8", newline="") as fh:
        points = read_csv(fh)
    pooled = pool_draws(points)
    kinds = {p.noise_kind for p in points}
    emit_curves(pooled, bads_for(pooled, args.epsilon_thr), args.out, args.epsilon_thr, args.title,
                _x_label(kinds.pop() if len(kinds) == 1 else ""))


def _cmd_case(args) -> None:
    config = case_config(args.case, args.shots, args.seed, args.distances, args.draws)
    points = run_sweep(config, workers=args.threads, progress=_progress)
    _write_sweep(points, config, args.out, f"case{args.case}", f"Case {args.case}", _x_label(config.noise))


COMMANDS = {
    "generate": _cmd_generate,
    "sample": _cmd_sample,
    "sweep": _cmd_sweep,
    "bad": _cmd_bad,
    "heatmap": _cmd_heatmap,
    "curves": _cmd_curves,
    "case": _cmd_case,
}


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("badlands: error: a command is required", file=sys.stderr)
        return 2
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"badlands: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
