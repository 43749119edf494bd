"""Batch command-line interface.  Every run writes one JSON report.

Exit codes: 0 success, 2 bad flags or input, 1 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .lie_basis import NotLieElementError
from .logode import BracketDepthError, LogOdeConfig, VectorFieldSet, solve_cde, uniform_partition
from .signature import log_signature, log_signature_report, signature
from .sigkernel import StaticKernel, gram, min_eigenvalue, mmd2_from_grams
from .stream import (
    PiecewiseLinearPath,
    StreamFormatError,
    embed_counting,
    embed_linear,
    parse_table,
    parse_ticks,
)
from .tensor_algebra import AlgebraShape, dim, word_to_str

TOOL = "sigstream"
INSIDER_LABELS = ("call", "trade", "move")
DELIMITERS = {"comma": ",", "tab": "\t"}


class InputError(Exception):
    """Bad flags or unusable input; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", required=True, help="input file (or directory of files for kernel/mmd)")
    common.add_argument("--output", help="write the JSON report here instead of stdout")
    common.add_argument("--format", choices=["json"], default="json")
    common.add_argument("--delimiter", choices=sorted(DELIMITERS), default="comma")
    common.add_argument("--header", action="store_true", help="first input line is a header")

    embed = _Parser(add_help=False)
    embed.add_argument("--time-augment", action="store_true", help="prepend time as channel 1")
    embed.add_argument("--missing", choices=["ffill"], default="ffill")

    depth = _Parser(add_help=False)
    depth.add_argument("--depth", type=int, default=2)

    kern = _Parser(add_help=False)
    kern.add_argument("--kernel", choices=["linear", "rbf"], default="linear")
    kern.add_argument("--sigma", type=float, default=1.0)
    kern.add_argument("--refine", type=int, default=0)
    kern.add_argument("--jobs", type=int, default=1, help="threads for pairwise PDE solves")

    p = _Parser(prog=TOOL, description="Signatures, log-signatures, log-ODE solves and signature kernels.")
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in [("sig", "truncated signature"), ("logsig", "log-signature in the Lyndon basis")]:
        s = sub.add_parser(name, parents=[common, embed, depth], help=helptext)
        s.add_argument("--verify", help="earlier report whose coefficients must be reproduced exactly")

    s = sub.add_parser("logode", parents=[common, embed, depth], help="log-ODE solve of a linear CDE")
    s.add_argument("--fields", required=True, help="JSON with v, d, matrices (row-major) and optional z0")
    s.add_argument("--steps", type=int, help="uniform partition steps (default: one per path segment)")
    s.add_argument("--substeps", type=int, default=8)

    s = sub.add_parser("kernel", parents=[common, embed, kern], help="signature-kernel Gram matrix")
    s.add_argument("--input-b", help="second collection (default: same as --input)")

    s = sub.add_parser("mmd", parents=[common, embed, kern], help="unbiased signature-kernel MMD^2")
    s.add_argument("--input-b", required=True)

    s = sub.add_parser("demo-insider", parents=[common], help="call/trade/move ordering score from tick data")
    s.add_argument("--depth", type=int, default=3)
    return p


def _digest(path: Path) -> dict:
    data = path.read_bytes()
    return {"path": str(path), "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}


def _files(location: str) -> list[Path]:
    p = Path(location)
    if p.is_dir():
        files = sorted(f for f in p.iterdir() if f.is_file() and not f.name.startswith("."))
        if not files:
            raise InputError(f"directory {location} contains no input files")
        return files
    if not p.is_file():
        raise InputError(f"input {location} does not exist")
    return [p]


def _load_path(f: Path, args) -> PiecewiseLinearPath:
    try:
        stream = parse_table(f.read_bytes(), DELIMITERS[args.delimiter], args.header)
        return embed_linear(stream, args.missing, args.time_augment)
    except StreamFormatError as e:
        raise InputError(f"{f}: {e}") from None


def _check_depth(d: int, n: int, minimum: int = 0):
    if n < minimum:
        raise InputError(f"--depth must be >= {minimum}, got {n}")
    try:
        dim(d, n)
    except OverflowError as e:
        raise InputError(f"--depth {n}: {e}") from None


def _resolved(args) -> dict:
    return {k.replace("_", "-"): v for k, v in sorted(vars(args).items())}


def _cmd_sig(args, inputs):
    f = _files(args.input)
    if len(f) != 1:
        raise InputError("--input must be a single file for sig/logsig")
    inputs.append(_digest(f[0]))
    path = _load_path(f[0], args)
    if args.command == "sig":
        _check_depth(path.dim, args.depth)
        res = signature(path, args.depth)
        result = res.to_dict()
        coeffs = result["coefficients"]
    else:
        _check_depth(path.dim, args.depth, minimum=1)
        coords = log_signature(path, args.depth)
        result = log_signature_report(coords, path.span)
        coeffs = result["coordinates"]
    if args.verify:
        ref_file = Path(args.verify)
        try:
            ref = json.loads(ref_file.read_text())
            key = "coefficients" if args.command == "sig" else "coordinates"
            ref_coeffs = ref["result"][key]
        except (OSError, ValueError, KeyError, TypeError) as e:
            raise InputError(f"--verify {args.verify}: unreadable reference report ({e})") from None
        inputs.append(_digest(ref_file))
        same_keys = set(ref_coeffs) == set(coeffs)
        diff = max((abs(coeffs[k] - ref_coeffs[k]) for k in coeffs if k in ref_coeffs), default=0.0)
        identical = same_keys and all(coeffs[k] == ref_coeffs[k] for k in coeffs)
        result["verification"] = {"reference": str(ref_file), "identical": identical, "max_abs_diff": diff}
    return result


def _load_fields(location: str, inputs) -> tuple[VectorFieldSet, np.ndarray | None]:
    f = Path(location)
    try:
        raw = json.loads(f.read_text())
        v, d = int(raw["v"]), int(raw["d"])
        mats = np.asarray(raw["matrices"], dtype=np.float64).reshape(d, v, v)
        z0 = None if raw.get("z0") is None else np.asarray(raw["z0"], dtype=np.float64).reshape(v)
        vf = VectorFieldSet.linear(mats)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise InputError(f"--fields {location}: {e}") from None
    inputs.append(_digest(f))
    return vf, z0


def _cmd_logode(args, inputs):
    f = _files(args.input)
    if len(f) != 1:
        raise InputError("--input must be a single file for logode")
    inputs.append(_digest(f[0]))
    path = _load_path(f[0], args)
    vf, z0 = _load_fields(args.fields, inputs)
    if vf.d != path.dim:
        raise InputError(f"--fields declares d={vf.d} but the path has {path.dim} channels")
    _check_depth(vf.d, args.depth, minimum=1)
    if args.steps is not None and args.steps < 1:
        raise InputError("--steps must be >= 1")
    if args.substeps < 1:
        raise InputError("--substeps must be >= 1")
    if path.n_vertices < 2:
        raise InputError("log-ODE needs a path with at least two vertices")
    if z0 is None:
        z0 = np.zeros(vf.v)
        z0[0] = 1.0
    partition = uniform_partition(path, args.steps) if args.steps else None
    traj = solve_cde(vf, path, LogOdeConfig(args.depth, partition, args.substeps), z0)
    return {"z0": z0.tolist(), "final": traj.final.tolist(), **traj.to_dict()}


def _static_kernel(args) -> StaticKernel:
    if args.refine < 0:
        raise InputError("--refine must be >= 0")
    try:
        return StaticKernel(args.kernel, args.sigma)
    except ValueError as e:
        raise InputError(f"--sigma: {e}") from None


def _collection(location, args, inputs) -> list[PiecewiseLinearPath]:
    files = _files(location)
    inputs.extend(_digest(f) for f in files)
    paths = [_load_path(f, args) for f in files]
    dims = {p.dim for p in paths}
    if len(dims) != 1:
        raise InputError(f"paths under {location} have mixed dimensions {sorted(dims)}")
    return paths


def _meta(kernel, args, *collections) -> dict:
    return {
        "kernel": kernel.describe(),
        "refine": args.refine,
        "grid_sizes": [[(p.n_vertices - 1) * 2**args.refine for p in c] for c in collections],
    }


def _cmd_kernel(args, inputs):
    kernel = _static_kernel(args)
    A = _collection(args.input, args, inputs)
    B = _collection(args.input_b, args, inputs) if args.input_b else None
    if B is not None and B[0].dim != A[0].dim:
        raise InputError("--input and --input-b paths have different dimensions")
    G = gram(A, B, kernel, args.refine, args.jobs)
    out = {"gram": G.tolist(), **_meta(kernel, args, A, *(B and [B] or []))}
    if B is None:
        out["min_eigenvalue"] = min_eigenvalue(G)
    return out


def _cmd_mmd(args, inputs):
    kernel = _static_kernel(args)
    P = _collection(args.input, args, inputs)
    Q = _collection(args.input_b, args, inputs)
    if len(P) < 2 or len(Q) < 2:
        raise InputError(f"unbiased MMD needs >= 2 paths per sample, got {len(P)} and {len(Q)}")
    if P[0].dim != Q[0].dim:
        raise InputError("--input and --input-b paths have different dimensions")
    kxx = gram(P, None, kernel, args.refine, args.jobs)
    kyy = gram(Q, None, kernel, args.refine, args.jobs)
    kxy = gram(P, Q, kernel, args.refine, args.jobs)
    return {"mmd2": mmd2_from_grams(kxx, kxy, kyy), "m": len(P), "n": len(Q), **_meta(kernel, args, P, Q)}


def _cmd_insider(args, inputs):
    f = _files(args.input)
    if len(f) != 1:
        raise InputError("--input must be a single tick file")
    inputs.append(_digest(f[0]))
    try:
        ticks = parse_ticks(f[0].read_bytes(), INSIDER_LABELS, DELIMITERS[args.delimiter], args.header)
    except StreamFormatError as e:
        raise InputError(f"{f[0]}: {e}") from None
    C = len(INSIDER_LABELS)
    _check_depth(C, args.depth, minimum=3)
    sig = signature(embed_counting(ticks), args.depth).sig
    shape = AlgebraShape(C, args.depth)
    return {
        "score_word": "123",
        "score": sig["123"],
        "labels": {lab: i + 1 for i, lab in enumerate(INSIDER_LABELS)},
        "n_ticks": int(ticks.categories.size),
        "feature_dim": shape.dim,
        "feature_words": [word_to_str(w, C) for w in shape.words()],
        "features": sig.coeffs.tolist(),
        "note": (
            "feature_dim counts every word of length <= depth, (C^(depth+1)-1)/(C-1); "
            "for C=3, depth=3 that is 40, not 3^4 = 81"
        ),
    }


COMMANDS = {
    "sig": _cmd_sig,
    "logsig": _cmd_sig,
    "logode": _cmd_logode,
    "kernel": _cmd_kernel,
    "mmd": _cmd_mmd,
    "demo-insider": _cmd_insider,
}


def run(argv=None) -> tuple[int, dict]:
    """Parse flags, run one job and return (exit code, report)."""
    inputs: list[dict] = []
    args = None
    try:
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as e:  # --help / --version
            return int(e.code or 0), {}
        result = COMMANDS[args.command](args, inputs)
    except InputError as e:
        return 2, _error_report(args, inputs, str(e), 2)
    except (NotLieElementError, ArithmeticError) as e:
        return 1, _error_report(args, inputs, f"numerical failure: {e}", 1)
    except (BracketDepthError, ValueError) as e:
        return 2, _error_report(args, inputs, str(e), 2)
    report = {
        "tool": TOOL,
        "version": __version__,
        "command": args.command,
        "config": _resolved(args),
        "inputs": inputs,
        "result": result,
    }
    code = 0
    if result.get("verification", {}).get("identical") is False:
        code = 1
    return code, report


def _error_report(args, inputs, message, code) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": getattr(args, "command", None),
        "config": _resolved(args) if args is not None else None,
        "inputs": inputs,
        "error": message,
        "exit_code": code,
    }


def main(argv=None):
    code, report = run(argv)
    if report:
        text = json.dumps(report, indent=2)
        if "error" in report:
            print(text, file=sys.stderr)
        elif report["config"].get("output"):
            Path(report["config"]["output"]).write_text(text + "\n")
        else:
            print(text)
    sys.exit(code)
