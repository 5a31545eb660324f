"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 enumeration cap
exceeded, 4 invariant violation or non-finite output.  Each output file gets
an adjacent ``<out>.manifest.json`` recording the command, parameters, tool
version, seed and wall-clock duration; the output itself depends only on the
parameters.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from importlib import metadata

from . import bounds, coding, scenarios, spectrum
from .channel import ChannelFamily, InputDistribution, validate
from .errors import InfospecError, InvariantViolation, ResourceCapError
from .reports import write_json

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_INVARIANT = 0, 2, 3, 4

RATE_KIND_FLAGS = {
    "inf": "inf-compound",
    "per-state": "inf-per-state",
    "sup": "sup-compound",
    "check": "check-rate",
    "eps": "eps-rate",
}


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def parse_input(text: str, nx: int) -> InputDistribution:
    """``iid-uniform``, ``iid:p0,p1,...`` or a path to an input JSON file."""
    if text == "iid-uniform":
        return InputDistribution.uniform(nx)
    if text.startswith("iid:"):
        return InputDistribution.iid(_floats(text[4:]))
    with open(text, encoding="utf-8") as fh:
        return InputDistribution.from_dict(json.load(fh))


def parse_weights(text: str):
    """Comma-separated weights or ``geometric:r``."""
    if text.startswith("geometric:"):
        return bounds.geometric_weights(float(text.split(":", 1)[1]))
    return _floats(text)


def _emit(args, obj: dict | None = None, writer=None) -> None:
    """Write JSON ``obj`` (or call ``writer(path)``) to ``--out`` or stdout."""
    if args.out is None:
        if obj is None:
            raise InfospecError("this command needs --out", "out")
        json.dumps(obj, allow_nan=False)
        sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")
        return
    if writer is not None:
        writer(args.out)
    else:
        write_json(args.out, obj)


def _family(args) -> ChannelFamily:
    return ChannelFamily.from_json(args.family)


def _scale(args) -> float:
    return 1.0 / math.log(2) if args.bits else 1.0


# -- command handlers ------------------------------------------------------

def cmd_validate(args):
    rep = validate(_family(args), _ints(args.n), args.cap)
    _emit(args, rep.to_dict())
    return EXIT_OK if rep.passed else EXIT_USAGE


def cmd_spectrum(args):
    fam = _family(args)
    st = fam.state(args.state)
    inp = parse_input(args.input, fam.nx)
    if args.mc_samples:
        sp = spectrum.spectrum_mc(args.n, st, inp, args.mc_samples, args.seed)
    else:
        sp = spectrum.spectrum_exact(args.n, st, inp, args.cap)
    if args.out is not None and args.out.endswith(".csv"):
        _emit(args, writer=lambda p: sp.to_csv(p, bits=args.bits))
    else:
        s = _scale(args)
        _emit(args, {"n": sp.n, "state_id": sp.state_id, "mode": sp.mode,
                     "atoms": [[v * s, p] for v, p in sp.atoms], "unit": "bits" if args.bits else "nats"})
    return EXIT_OK


def cmd_rate(args):
    fam = _family(args)
    kind = RATE_KIND_FLAGS[args.kind]
    tol = args.eps if kind == "eps-rate" and args.eps is not None else args.tol
    est = spectrum.rate_estimate(kind, fam, parse_input(args.input, fam.nx), _ints(args.ladder), tol,
                                 state_id=args.state, mc_samples=args.mc_samples, seed=args.seed,
                                 workers=args.workers, cap=args.cap)
    _emit(args, est.to_dict(bits=args.bits))
    return EXIT_OK


def cmd_codebook(args):
    fam = _family(args)
    if args.action == "build":
        cb = coding.build_feinstein(args.n, args.M, args.gamma, fam, parse_input(args.input, fam.nx), args.cap)
        _emit(args, cb.to_dict())
        return EXIT_OK
    cb = coding.Codebook.from_json(args.codebook)
    if args.action == "eval":
        _emit(args, coding.error_probabilities(cb, fam, args.cap).to_dict())
    else:
        _emit(args, coding.code_spectrum(cb, fam, args.cap).to_dict(args.delta))
    return EXIT_OK


def cmd_bounds(args):
    fam = _family(args)
    if args.action == "feinstein":
        inp = parse_input(args.input, fam.nx)
        v = bounds.feinstein_bound(args.n, args.rate, args.gamma, fam, inp, args.cap)
        _emit(args, {"bound": "feinstein", "n": args.n, "rate_nats": args.rate, "gamma": args.gamma, "value": v})
        return EXIT_OK
    if args.codebook is None:
        raise InfospecError("--codebook is required", "codebook")
    cb = coding.Codebook.from_json(args.codebook)
    if args.action == "verdu-han":
        v = bounds.verdu_han_bound(cb, args.gamma, fam, args.cap)
        _emit(args, {"bound": "verdu-han", "n": cb.n, "rate_nats": cb.rate, "gamma": args.gamma, "value": v})
        return EXIT_OK
    inp = parse_input(args.input, fam.nx) if args.input else None
    rep = bounds.sandwich_report(cb, fam, _floats(args.gammas), inp, args.cap)
    _emit(args, rep)
    if not rep["all_hold"]:
        raise InvariantViolation("sandwich inequality failed", "gammas")
    return EXIT_OK


def cmd_diag(args):
    fam = _family(args)
    ladder = _ints(args.ladder)
    inputs = [parse_input(t, fam.nx) for t in (args.input or ["iid-uniform"])]
    kw = {"cap": args.cap, "workers": args.workers}
    if args.action == "strong-converse":
        rep = bounds.strong_converse_diag(fam, inputs, ladder, args.tol, reference_rate=args.reference,
                                          delta=args.delta, **kw)
    elif args.action == "uniformity":
        rep = bounds.uniformity_diag(fam, inputs[0], ladder, _floats(args.gammas), args.tol,
                                     reference_rate=args.reference, **kw)
    elif args.action == "worst-case":
        rep = bounds.worst_case_vs_compound(fam, inputs, ladder, args.tol, **kw)
    elif args.action == "mixed":
        if args.weights is None:
            raise InfospecError("--weights is required", "weights")
        rep = bounds.mixed_capacity_estimate(fam, parse_weights(args.weights), inputs, ladder, args.tol, **kw)
    else:
        rep = spectrum.stability_diag(fam, inputs[0], ladder, args.delta, args.reference, **kw)
    if args.out is not None and args.out.endswith(".csv"):
        _emit(args, writer=lambda p: rep.write_csv(p, bits=args.bits))
    else:
        _emit(args, rep.to_dict(bits=args.bits))
    return EXIT_OK


def cmd_scenario(args):
    if args.action == "list":
        _emit(args, scenarios.list_scenarios())
        return EXIT_OK
    params = json.loads(args.params) if args.params else {}
    fam = scenarios.build_scenario(args.name, params)
    _emit(args, fam.to_dict())
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (.json or .csv); stdout when omitted")
    common.add_argument("--bits", action="store_true", help="report rates in bits instead of nats")
    common.add_argument("--seed", type=int, default=0, help="64-bit seed for Monte Carlo streams")
    common.add_argument("--workers", type=int, default=1, help="threads for per-state evaluation")
    common.add_argument("--cap", type=int, default=None, help="enumeration cap in table entries")

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family", required=True, help="channel-family JSON file")

    p = argparse.ArgumentParser(prog="infospec", description="Information-spectrum tools for compound channels")
    p.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("validate", parents=[common, fam], help="check kernels of a family")
    q.add_argument("--n", default="1,2,4", help="comma-separated blocklengths")
    q.set_defaults(func=cmd_validate)

    q = sub.add_parser("spectrum", parents=[common, fam], help="spectrum of one state")
    q.add_argument("--state", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--input", default="iid-uniform")
    q.add_argument("--mc-samples", type=int, default=None)
    q.set_defaults(func=cmd_spectrum)

    q = sub.add_parser("rate", parents=[common, fam], help="ladder estimate of a rate")
    q.add_argument("--kind", choices=sorted(RATE_KIND_FLAGS), required=True)
    q.add_argument("--ladder", required=True)
    q.add_argument("--tol", type=float, default=spectrum.DEFAULT_TOL)
    q.add_argument("--eps", type=float, default=None, help="epsilon for --kind eps (defaults to --tol)")
    q.add_argument("--state", default=None)
    q.add_argument("--input", default="iid-uniform")
    q.add_argument("--mc-samples", type=int, default=None)
    q.set_defaults(func=cmd_rate)

    q = sub.add_parser("codebook", parents=[common, fam], help="build or analyse a codebook")
    q.add_argument("action", choices=["build", "eval", "spectrum"])
    q.add_argument("--n", type=int)
    q.add_argument("--M", type=int)
    q.add_argument("--gamma", type=float, default=0.1)
    q.add_argument("--input", default="iid-uniform")
    q.add_argument("--codebook")
    q.add_argument("--delta", type=float, default=0.05)
    q.set_defaults(func=cmd_codebook)

    q = sub.add_parser("bounds", parents=[common, fam], help="achievability and converse bounds")
    q.add_argument("action", choices=["feinstein", "verdu-han", "sandwich"])
    q.add_argument("--n", type=int)
    q.add_argument("--rate", type=float)
    q.add_argument("--gamma", type=float, default=0.1)
    q.add_argument("--gammas", default=",".join(str(g) for g in bounds.GAMMA_GRID))
    q.add_argument("--input", default=None)
    q.add_argument("--codebook")
    q.set_defaults(func=cmd_bounds)

    q = sub.add_parser("diag", parents=[common, fam], help="capacity diagnostics")
    q.add_argument("action", choices=["strong-converse", "uniformity", "worst-case", "mixed", "stability"])
    q.add_argument("--ladder", required=True)
    q.add_argument("--tol", type=float, default=spectrum.DEFAULT_TOL)
    q.add_argument("--input", action="append", help="repeatable; default iid-uniform")
    q.add_argument("--gammas", default="0.1,0.2,0.3")
    q.add_argument("--delta", type=float, default=0.05)
    q.add_argument("--reference", type=float, default=None)
    q.add_argument("--weights", default=None, help="comma-separated or geometric:r")
    q.set_defaults(func=cmd_diag)

    q = sub.add_parser("scenario", parents=[common], help="built-in families")
    q.add_argument("action", choices=["list", "build"])
    q.add_argument("name", nargs="?")
    q.add_argument("--params", default=None, help="JSON object of scenario parameters")
    q.set_defaults(func=cmd_scenario)
    return p


def _require(args) -> None:
    needs = {
        ("codebook", "build"): ("n", "M"),
        ("codebook", "eval"): ("codebook",),
        ("codebook", "spectrum"): ("codebook",),
        ("bounds", "feinstein"): ("n", "rate"),
        ("bounds", "verdu-han"): ("codebook",),
        ("bounds", "sandwich"): ("codebook",),
        ("scenario", "build"): ("name",),
    }
    for name in needs.get((args.command, getattr(args, "action", None)), ()):
        if getattr(args, name) is None:
            raise InfospecError(f"--{name} is required for {args.command} {args.action}", name)


def write_manifest(args, argv, elapsed: float) -> None:
    record = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {"command": list(argv), "parameters": record, "tool_version": tool_version(),
                "seed": args.seed, "wall_clock_seconds": elapsed}
    write_json(f"{args.out}.manifest.json", manifest)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        _require(args)
        code = args.func(args)
    except ResourceCapError as exc:
        return _fail(exc, EXIT_CAP)
    except InvariantViolation as exc:
        return _fail(exc, EXIT_INVARIANT)
    except ValueError as exc:
        if "NaN" in str(exc) or "Out of range float" in str(exc):
            return _fail(exc, EXIT_INVARIANT)
        return _fail(exc, EXIT_USAGE)
    except (InfospecError, OSError, KeyError) as exc:
        return _fail(exc, EXIT_USAGE)
    if args.out is not None:
        write_manifest(args, argv, time.perf_counter() - start)
    return code


def _fail(exc, code: int) -> int:
    param = getattr(exc, "param", None)
    where = f" [param: {param}]" if param else ""
    sys.stderr.write(f"infospec: error{where}: {exc}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
