"""Command line interface: ``sparse-ortho <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 invalid value (domain error).
Every random draw derives from ``--seed``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io as fmt
from .allocators import ALLOCATORS, load_arch, load_profile, validate_profile
from .bench import BENCH_COLUMNS, bench_generation
from .conv import sample_conv
from .density_model import expected_density_curve, monte_carlo_density_curve
from .givens import make_rng, sample_rectangular, scale_weights
from .isometry import SPECTRUM_COLUMNS, MLPSpec, critical_constants, spectrum_sweep

log = logging.getLogger("sparse_ortho")

CURVE_COLUMNS = ("t", "expected_density", "mc_mean", "mc_stderr")
PROFILE_COLUMNS = ("layer", "kind", "params", "density")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _strs(text: str) -> list[str]:
    return [x for x in text.split(",") if x]


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = _Parser(prog="sparse-ortho", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("sample", parents=[common], help="sparse orthogonal matrix")
    p.add_argument("--n", type=int, default=16, help="rows")
    p.add_argument("--m", type=int, default=None, help="columns (default: n)")
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--angle", type=float, default=None, help="fixed rotation angle")
    p.add_argument("--sigma-w", type=float, default=1.0)

    p = sub.add_parser("sample-conv", parents=[common], help="delta-orthogonal kernel")
    p.add_argument("--c-out", type=int, required=True)
    p.add_argument("--c-in", type=int, required=True)
    p.add_argument("--k", type=int, required=True, help="half width; kernel is (2k+1)^2")
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--center", choices=("equal", "sqrt"), default="equal")
    p.add_argument("--center-density", type=float, default=None)
    p.add_argument("--sigma-w", type=float, default=1.0)

    p = sub.add_parser("density-curve", parents=[common], help="expected density vs rotations")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t-max", type=int, required=True)
    p.add_argument("--mc-trials", type=int, default=0)

    p = sub.add_parser("allocate", parents=[common], help="per-layer density profile")
    p.add_argument("--arch", type=Path, required=True)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--method", choices=sorted(ALLOCATORS), default="erk")
    p.add_argument("--profile", type=Path, default=None, help="validate this file instead")

    p = sub.add_parser("spectrum", parents=[common], help="Jacobian singular values")
    p.add_argument("--depth", type=int, default=7)
    p.add_argument("--width", type=int, default=100)
    p.add_argument("--activations", type=_strs, default=["tanh"])
    p.add_argument("--allocators", type=_strs, default=["uniform", "erk"])
    p.add_argument("--schemes", type=_strs, default=["base", "eoi"])
    p.add_argument("--sparsities", type=_floats, default=[0.0, 0.5, 0.9, 0.95, 0.97])
    p.add_argument("--seeds", type=_ints, default=None, help="default: --seed")
    p.add_argument("--inputs", type=int, default=8)
    p.add_argument("--constants", choices=("default", "deep_tanh"), default="default")
    p.add_argument("--ai-iters", type=int, default=10_000)

    p = sub.add_parser("bench", parents=[common], help="generation time and orthogonality")
    p.add_argument("--sizes", type=_ints, default=[16, 32, 64, 128, 256])
    p.add_argument("--densities", type=_floats, default=[0.0625])
    p.add_argument("--schemes", type=_strs, default=["eoi", "ai"])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--ai-iters", type=int, default=10_000)
    p.add_argument("--no-warmup", action="store_true")
    return parser


def _matrix_json(a) -> str:
    r, c = np.nonzero(a.support)
    entries = [[int(i), int(j), float(a.values[i, j])] for i, j in zip(r, c)]
    doc = {"rows": a.rows, "cols": a.cols, "nnz": len(entries), "entries": entries}
    return json.dumps(doc) + "\n"


def _cmd_sample(args) -> str:
    m = args.n if args.m is None else args.m
    a = sample_rectangular(args.n, m, args.density, args.angle, make_rng(args.seed))
    if args.sigma_w != 1.0:
        a = scale_weights(a, args.sigma_w)
    return _matrix_json(a) if args.format == "json" else fmt.dumps_matrix(a)


def _cmd_sample_conv(args) -> str:
    mode = args.center if args.center_density is None else args.center_density
    kernel = sample_conv(
        args.c_out, args.c_in, args.k, args.density, mode, make_rng(args.seed), args.sigma_w
    )
    if args.format == "json":
        doc = {
            "c_out": kernel.c_out,
            "c_in": kernel.c_in,
            "k": kernel.k,
            "mask": np.argwhere(kernel.mask).tolist(),
            "center": [
                [int(i), int(j), float(kernel.weights[i, j, kernel.k, kernel.k])]
                for i, j in np.argwhere(kernel.center_support)
            ],
        }
        return json.dumps(doc) + "\n"
    return fmt.dumps_kernel(kernel)


def _emit(rows, columns, form: str) -> str:
    return fmt.rows_to_json(rows, columns) if form == "json" else fmt.rows_to_csv(rows, columns)


def _cmd_density_curve(args) -> str:
    if args.t_max < 0:
        raise ValueError("--t-max must be nonnegative")
    curve = expected_density_curve(args.n, args.t_max)
    if args.mc_trials > 0:
        mean, stderr = monte_carlo_density_curve(
            args.n, args.t_max, args.mc_trials, make_rng(args.seed)
        )
    else:
        mean = stderr = [None] * len(curve)
    rows = [
        {"t": t, "expected_density": curve[t], "mc_mean": mean[t], "mc_stderr": stderr[t]}
        for t in range(len(curve))
    ]
    return _emit(rows, CURVE_COLUMNS, args.format)


def _cmd_allocate(args) -> str:
    arch = load_arch(args.arch)
    if args.profile is not None:
        profile = load_profile(args.profile, arch)
        diag = validate_profile(profile, arch, args.density)
        doc = {
            "budget_residual": diag.budget_residual,
            "out_of_range": diag.out_of_range,
            "ok": diag.ok,
        }
        return json.dumps(doc) + "\n"
    profile = ALLOCATORS[args.method](arch, args.density)
    if args.format == "json":
        return json.dumps({"d": profile.d, "densities": profile.densities.tolist()}) + "\n"
    rows = [
        {"layer": i, "kind": layer.kind, "params": layer.param_count, "density": dl}
        for i, (layer, dl) in enumerate(zip(arch, profile.densities))
    ]
    return fmt.rows_to_csv(rows, PROFILE_COLUMNS)


def _cmd_spectrum(args) -> str:
    sigma_w, sigma_b = critical_constants(args.constants)
    spec = MLPSpec(args.depth, args.width, args.activations[0], sigma_w, sigma_b)
    seeds = [args.seed] if args.seeds is None else args.seeds
    rows = spectrum_sweep(
        spec, args.allocators, args.schemes, args.sparsities, seeds,
        args.inputs, args.activations, args.ai_iters,
    )
    return _emit(rows, SPECTRUM_COLUMNS, args.format)


def _cmd_bench(args) -> str:
    records = bench_generation(
        args.sizes, args.densities, args.schemes, args.repeats, args.seed,
        args.ai_iters, warmup=not args.no_warmup,
    )
    return _emit([r.as_row() for r in records], BENCH_COLUMNS, args.format)


COMMANDS = {
    "sample": _cmd_sample,
    "sample-conv": _cmd_sample_conv,
    "density-curve": _cmd_density_curve,
    "allocate": _cmd_allocate,
    "spectrum": _cmd_spectrum,
    "bench": _cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        text = COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"sparse-ortho {args.command}: {exc}", file=sys.stderr)
        return 2
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
