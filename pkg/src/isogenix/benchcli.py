"""Command-line front end: compute and verify isogenies, expand the elliptic
function, generate ground-truth instances, and run the scaling benchmark.

Subcommands: wp | isogeny | gen | verify | bench | selftest.

Exit codes are part of the contract:
  0   success
  1   verification of a supplied instance failed
  2   the selected algorithm needs sigma and none was given
  3   post-computation verification / reconstruction failed
  4   characteristic too small for the requested computation
  64  usage error

Instances travel as JSON with every field element a decimal string, so any
consumer can parse them without multiprecision support.  Benchmark output is
CSV with the fixed header ``algo,ell,p_bits,wall_millis,verified,seed``.
"""

from __future__ import annotations

import argparse
import gc
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import median
from typing import Optional

from . import curvelab, isogenylab
from .curvelab import Curve, Isogeny, isogeny_verify
from .errors import (
    CharacteristicTooSmall,
    IsogenixError,
    LoopStall,
    NotFound,
    NotPrime,
    ReconstructionFailed,
    SigmaRequired,
    TooSmall,
    VerificationFailed,
)
from .fieldcore import FieldContext
from .isogenylab import NEEDS_SIGMA, AlgorithmId
from .polyseries import Polynomial

CSV_HEADER = "algo,ell,p_bits,wall_millis,verified,seed"

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_SIGMA_REQUIRED = 2
EXIT_POSTCOMPUTE_FAIL = 3
EXIT_CHAR_TOO_SMALL = 4
EXIT_USAGE = 64


# ---------------------------------------------------------------------------
# instance files
# ---------------------------------------------------------------------------

@dataclass
class InstanceFile:
    """The JSON wire format for isogeny instances (decimal-string scalars)."""

    p: str
    A: str
    B: str
    At: str
    Bt: str
    ell: int
    sigma: Optional[str] = None
    D: Optional[list] = None
    N: Optional[list] = None
    kernel_xs: Optional[list] = None
    seed: Optional[int] = None

    @classmethod
    def from_generated(cls, inst: curvelab.GeneratedInstance) -> "InstanceFile":
        iso = inst.isogeny
        return cls(
            p=str(inst.curve.ctx.p),
            A=str(inst.curve.A),
            B=str(inst.curve.B),
            At=str(inst.target.A),
            Bt=str(inst.target.B),
            ell=iso.ell,
            sigma=str(iso.sigma),
            D=[str(c) for c in iso.D.to_ints()],
            N=[str(c) for c in iso.N.to_ints()],
            kernel_xs=[str(x) for x in inst.kernel_xs],
            seed=inst.seed,
        )

    def to_json(self) -> str:
        payload = {"p": self.p, "A": self.A, "B": self.B,
                   "At": self.At, "Bt": self.Bt, "ell": self.ell}
        for key in ("sigma", "D", "N", "kernel_xs", "seed"):
            value = getattr(self, key)
            if value is not None:
                payload[key] = value
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "InstanceFile":
        raw = json.loads(text)
        return cls(p=raw["p"], A=raw["A"], B=raw["B"], At=raw["At"],
                   Bt=raw["Bt"], ell=int(raw["ell"]),
                   sigma=raw.get("sigma"), D=raw.get("D"), N=raw.get("N"),
                   kernel_xs=raw.get("kernel_xs"), seed=raw.get("seed"))

    def curves(self):
        ctx = FieldContext(int(self.p))
        return ctx, Curve(ctx, int(self.A), int(self.B)), \
            Curve(ctx, int(self.At), int(self.Bt))


@dataclass
class BenchRecord:
    algo: str
    ell: int
    p_bits: int
    wall_millis: float
    verified: bool
    seed: int

    def as_csv_row(self) -> str:
        return (f"{self.algo},{self.ell},{self.p_bits},"
                f"{self.wall_millis:.3f},{str(self.verified).lower()},{self.seed}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_wp(args) -> int:
    try:
        ctx = FieldContext(args.p)
        E = Curve(ctx, args.a, args.b)
        if args.algo == "quadratic":
            exp = curvelab.wp_expand_quadratic(E, args.n)
        else:
            exp = curvelab.wp_expand_fast(E, args.n)
    except CharacteristicTooSmall as exc:
        print(f"error: CharacteristicTooSmall: {exc}", file=sys.stderr)
        return EXIT_CHAR_TOO_SMALL
    except IsogenixError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    if args.json:
        print(json.dumps([str(v) for v in exp.c]))
    else:
        for v in exp.c:
            print(v)
    return EXIT_OK


def _gmode_from_flag(mode: str):
    return {"auto": None, "g": True, "full": False}[mode]


def cmd_isogeny(args) -> int:
    if args.instance:
        with open(args.instance, "r", encoding="utf-8") as fh:
            inst = InstanceFile.from_json(fh.read())
        sigma = int(inst.sigma) if inst.sigma is not None else None
        ell = inst.ell
    else:
        for name in ("p", "a", "b", "at", "bt", "ell"):
            if getattr(args, name) is None:
                print("error: either --instance or all of --p --a --b --at "
                      "--bt --ell are required", file=sys.stderr)
                return EXIT_USAGE
        inst = InstanceFile(p=str(args.p), A=str(args.a), B=str(args.b),
                            At=str(args.at), Bt=str(args.bt), ell=args.ell,
                            sigma=None if args.sigma is None else str(args.sigma))
        sigma = args.sigma
        ell = args.ell
    if args.sigma is not None:
        sigma = args.sigma
    try:
        ctx, E, Et = inst.curves()
        iso = isogenylab.compute_isogeny(
            AlgorithmId(args.algo), E, Et, ell, sigma,
            gmode=_gmode_from_flag(args.mode))
    except SigmaRequired as exc:
        print(f"error: SigmaRequired: {exc}", file=sys.stderr)
        return EXIT_SIGMA_REQUIRED
    except CharacteristicTooSmall as exc:
        print(f"error: CharacteristicTooSmall: {exc}", file=sys.stderr)
        return EXIT_CHAR_TOO_SMALL
    except (VerificationFailed, ReconstructionFailed, LoopStall) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_POSTCOMPUTE_FAIL
    except IsogenixError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    if args.json:
        out = {"N": [str(c) for c in iso.N.to_ints()],
               "D": [str(c) for c in iso.D.to_ints()],
               "sigma": str(iso.sigma)}
        if iso.g is not None:
            out["g"] = [str(c) for c in iso.g.to_ints()]
        print(json.dumps(out, indent=2))
    else:
        print("N =", iso.N.to_ints())
        print("D =", iso.D.to_ints())
        if iso.g is not None:
            print("g =", iso.g.to_ints())
        print("sigma =", iso.sigma)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        inst = curvelab.find_rational_kernel_instance(
            args.p, args.ell, args.seed, budget=args.budget)
    except NotFound as exc:
        print(f"error: NotFound: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    except IsogenixError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    print(InstanceFile.from_generated(inst).to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    with open(args.instance, "r", encoding="utf-8") as fh:
        inst = InstanceFile.from_json(fh.read())
    if inst.D is None or inst.N is None:
        print("error: instance carries no (N, D) to verify", file=sys.stderr)
        return EXIT_USAGE
    ctx, E, Et = inst.curves()
    D = Polynomial(ctx, [int(c) for c in inst.D])
    N = Polynomial(ctx, [int(c) for c in inst.N])
    if inst.sigma is not None:
        sigma = int(inst.sigma)
    elif inst.ell >= 2:
        sigma = (-D.coeff(inst.ell - 2)) % ctx.p
    else:
        sigma = 0
    g = None
    if inst.ell % 2:
        try:
            g = curvelab.kernel_poly_sqrt(D)
        except ValueError:
            g = None
    iso = Isogeny(E, Et, inst.ell, N, D, sigma, g)
    report = isogeny_verify(iso)
    for name, ok in (("differential identity", report.nd_identity),
                     ("shape", report.shape_ok),
                     ("g^2 = D", report.g_square_ok),
                     ("target nonsingular", report.target_nonsingular),
                     ("morphism", report.morphism_ok)):
        print(f"{name}: {'pass' if ok else 'FAIL'}", file=sys.stderr)
    if report.ok:
        return EXIT_OK
    print(f"error: {report.failures[0]}", file=sys.stderr)
    return EXIT_VERIFY_FAIL


_BENCH_RUNNERS = {
    AlgorithmId.Elkies1992: lambda E, Et, ell, sigma, gmode:
        isogenylab.elkies1992(E, Et, ell, sigma),
    AlgorithmId.Elkies1998: lambda E, Et, ell, sigma, gmode:
        isogenylab.elkies1998(E, Et, ell, sigma, gmode=gmode),
    AlgorithmId.FastElkies: lambda E, Et, ell, sigma, gmode:
        isogenylab.fast_elkies(E, Et, ell, sigma, gmode=gmode),
    AlgorithmId.FastElkiesPrime: lambda E, Et, ell, sigma, gmode:
        isogenylab.fast_elkies_prime(E, Et, ell, gmode=gmode),
    AlgorithmId.Stark1972: lambda E, Et, ell, sigma, gmode:
        isogenylab.stark1972(E, Et, ell),
    AlgorithmId.Atkin1992: lambda E, Et, ell, sigma, gmode:
        isogenylab.atkin1992(E, Et, ell, sigma),
    AlgorithmId.AtkinModComp: lambda E, Et, ell, sigma, gmode:
        isogenylab.atkin_modcomp(E, Et, ell, sigma),
}


def _timed_run(algo: AlgorithmId, inst: curvelab.GeneratedInstance, gmode):
    """One garbage-collection-quiet timed run of the bare algorithm."""
    E, Et, truth = inst.curve, inst.target, inst.isogeny
    runner = _BENCH_RUNNERS[algo]
    gc.collect()
    gc.disable()
    try:
        t0 = time.perf_counter_ns()
        iso = runner(E, Et, truth.ell, truth.sigma, gmode)
        elapsed = (time.perf_counter_ns() - t0) / 1e6
    finally:
        gc.enable()
    return elapsed, iso


def bench_cell(algo: AlgorithmId, inst: curvelab.GeneratedInstance, reps: int,
               seed: int, gmode) -> BenchRecord:
    """Time one (algorithm, degree) cell: median wall time of `reps` runs of
    the bare algorithm after one warmup, then a single verification against
    the ground truth.

    Verification is deliberately outside the timed window: the harness
    compares algorithm costs, and the checks are shared bookkeeping.
    """
    E, Et, truth = inst.curve, inst.target, inst.isogeny
    _BENCH_RUNNERS[algo](E, Et, truth.ell, truth.sigma, gmode)  # warmup
    times = []
    iso = None
    for _ in range(reps):
        elapsed, iso = _timed_run(algo, inst, gmode)
        times.append(elapsed)
    verified = (iso.N == truth.N and iso.D == truth.D
                and isogeny_verify(iso).ok)
    return BenchRecord(algo=algo.value, ell=truth.ell,
                       p_bits=E.ctx.p.bit_length(),
                       wall_millis=median(times), verified=verified,
                       seed=seed)


def run_bench(algos, ells, p_bits: int, seed: int, reps: int = 3,
              gmode=False, log=None):
    """Benchmark records for every (algo, ell) cell, plus a skip log.

    Instances come from the known-order family (one shared prime when the
    degree product fits the bit budget).  Sigma enters the sigma-requiring
    algorithms from a fast-elkies-prime pre-pass whose recovered value must
    match the Velu ground truth.
    """
    log = log if log is not None else (lambda s: None)
    m = 3
    for ell in ells:
        g = curvelab._gcd(m, ell)
        m = m // g * ell
    shared_p = None
    if m.bit_length() <= p_bits - 8:
        try:
            shared_p = curvelab.known_order_prime(ells, p_bits, seed)
        except NotFound:
            shared_p = None
    records = []
    skipped = []
    instances = {}
    for ell in ells:
        try:
            inst = curvelab.known_order_instance(ell, p_bits, seed, p=shared_p)
        except (NotFound, IsogenixError) as exc:
            skipped.append((ell, f"{type(exc).__name__}: {exc}"))
            log(f"skip ell={ell}: {exc}")
            continue
        pre = isogenylab.fast_elkies_prime(inst.curve, inst.target, ell,
                                           gmode=gmode)
        if pre.sigma != inst.isogeny.sigma:
            raise VerificationFailed(
                f"sigma pre-pass disagrees with ground truth at ell={ell}")
        instances[ell] = inst
    cells = [(algo, ell) for ell in ells if ell in instances for algo in algos]
    workers = max(1, int(os.environ.get("ISOGENIX_THREADS", "1") or "1"))
    if workers == 1:
        # Round-robin interleaving: each repetition visits every cell once,
        # so slow machine drift biases all cells equally and cross-cell
        # ratios stay meaningful.
        for algo, ell in cells:
            inst = instances[ell]
            _BENCH_RUNNERS[algo](inst.curve, inst.target, ell,
                                 inst.isogeny.sigma, gmode)  # warmup
        times = {cell: [] for cell in cells}
        last = {}
        for _ in range(reps):
            for cell in cells:
                algo, ell = cell
                elapsed, iso = _timed_run(algo, instances[ell], gmode)
                times[cell].append(elapsed)
                last[cell] = iso
        for cell in cells:
            algo, ell = cell
            truth = instances[ell].isogeny
            iso = last[cell]
            verified = (iso.N == truth.N and iso.D == truth.D
                        and isogeny_verify(iso).ok)
            records.append(BenchRecord(
                algo=algo.value, ell=ell,
                p_bits=instances[ell].curve.ctx.p.bit_length(),
                wall_millis=median(times[cell]), verified=verified,
                seed=seed))
            log(f"done {algo.value} ell={ell}: "
                f"{records[-1].wall_millis:.1f} ms")
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            futs = [pool.submit(bench_cell, algo, instances[ell], reps, seed,
                                gmode) for algo, ell in cells]
            records = [f.result() for f in futs]
    return records, skipped


def cmd_bench(args) -> int:
    try:
        algos = [AlgorithmId(token) for token in args.algos.split(",") if token]
        ells = [int(token) for token in args.ells.split(",") if token]
    except (ValueError, KeyError):
        print("error: unknown algorithm or malformed degree list",
              file=sys.stderr)
        return EXIT_USAGE
    if not algos or not ells:
        print("error: --algos and --ells must be non-empty", file=sys.stderr)
        return EXIT_USAGE
    records, skipped = run_bench(
        algos, ells, args.p_bits, args.seed, reps=args.reps,
        gmode=_gmode_from_flag(args.mode),
        log=lambda s: print(s, file=sys.stderr))
    lines = [CSV_HEADER] + [r.as_csv_row() for r in records]
    text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for ell, why in skipped:
        print(f"skipped ell={ell}: {why}", file=sys.stderr)
    if any(not r.verified for r in records):
        print("error: some benchmark cells failed verification",
              file=sys.stderr)
        return EXIT_VERIFY_FAIL
    return EXIT_OK


def cmd_selftest(args) -> int:
    failures = []

    def check(name, fn):
        try:
            ok = fn()
        except Exception as exc:  # a selftest must not crash the harness
            ok = False
            failures.append(f"{name}: {type(exc).__name__}: {exc}")
            print(f"{name}: FAIL ({exc})")
            return
        if ok:
            print(f"{name}: ok")
        else:
            failures.append(name)
            print(f"{name}: FAIL")

    def fixture_f101():
        ctx = FieldContext(101)
        E, Et = Curve(ctx, 1, 1), Curve(ctx, 75, 16)
        want_g = [5, 97, 24, 89, 76, 1]
        want_n = [15, 24, 5, 15, 43, 81, 39, 71, 44, 61, 51, 1]
        for algo in AlgorithmId:
            iso = isogenylab.compute_isogeny(algo, E, Et, 11, 50)
            if iso.N.to_ints() != want_n or iso.g.to_ints() != want_g:
                return False
        return True

    def fixture_f1009():
        ctx = FieldContext(1009)
        E, Et = Curve(ctx, 1, 3), Curve(ctx, 830, 82)
        want_n = [203, 555, 382, 566, 325, 270, 1]
        want_d = [399, 533, 659, 289, 270, 1]
        for algo in AlgorithmId:
            if algo is AlgorithmId.Elkies1992:
                continue  # even degree
            iso = isogenylab.compute_isogeny(algo, E, Et, 6, 739)
            if iso.N.to_ints() != want_n or iso.D.to_ints() != want_d:
                return False
        return True

    def velu_two_torsion():
        ctx = FieldContext(1009)
        E = Curve(ctx, 1, 3)
        pts = [curvelab.PointAffine(x, 0) for x in range(1009)
               if (x ** 3 + x + 3) % 1009 == 0]
        target, iso = curvelab.velu_from_kernel(E, pts)
        return (target.A, target.B) == (16, 192) and \
            iso.N.to_ints() == [1, 985, 1007, 0, 1]

    def random_agreement():
        for i, ell in enumerate((3, 4, 5, 7, 8, 9)):
            inst = curvelab.find_rational_kernel_instance(10007, ell, seed=i)
            truth = inst.isogeny
            for algo in AlgorithmId:
                if algo is AlgorithmId.Elkies1992 and ell % 2 == 0:
                    continue
                iso = isogenylab.compute_isogeny(
                    algo, inst.curve, inst.target, ell, truth.sigma)
                if iso.N != truth.N or iso.D != truth.D:
                    return False
        return True

    def wp_agreement():
        import random as _random
        rng = _random.Random(12345)
        ctx = FieldContext((1 << 31) - 1)
        for _ in range(3):
            try:
                E = Curve(ctx, rng.randrange(ctx.p), rng.randrange(ctx.p))
            except IsogenixError:
                continue
            if curvelab.wp_expand_fast(E, 96) != curvelab.wp_expand_quadratic(E, 96):
                return False
        return True

    t0 = time.perf_counter()
    check("fixture GF(101) l=11 (all seven algorithms)", fixture_f101)
    check("fixture GF(1009) l=6", fixture_f1009)
    check("velu two-torsion kernel", velu_two_torsion)
    check("random cross-algorithm agreement", random_agreement)
    check("wp fast/quadratic agreement", wp_agreement)
    print(f"selftest finished in {time.perf_counter() - t0:.1f}s")
    if failures:
        print("failures: " + "; ".join(failures), file=sys.stderr)
        return EXIT_VERIFY_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="isogenix",
                     description="Isogenies between elliptic curves over "
                                 "large prime fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_wp = sub.add_parser("wp", parents=[], help="expand the elliptic function")
    p_wp.add_argument("--p", type=int, required=True)
    p_wp.add_argument("--a", type=int, required=True)
    p_wp.add_argument("--b", type=int, required=True)
    p_wp.add_argument("--n", type=int, required=True)
    p_wp.add_argument("--algo", choices=("quadratic", "fast"), default="fast")
    p_wp.add_argument("--json", action="store_true")
    p_wp.set_defaults(fn=cmd_wp)

    p_iso = sub.add_parser("isogeny", help="compute a normalized isogeny")
    p_iso.add_argument("--instance", help="JSON instance file")
    p_iso.add_argument("--p", type=int)
    p_iso.add_argument("--a", type=int)
    p_iso.add_argument("--b", type=int)
    p_iso.add_argument("--at", type=int)
    p_iso.add_argument("--bt", type=int)
    p_iso.add_argument("--ell", type=int)
    p_iso.add_argument("--sigma", type=int)
    p_iso.add_argument("--algo", default="fast-elkies",
                       choices=[a.value for a in AlgorithmId])
    p_iso.add_argument("--mode", choices=("auto", "g", "full"), default="auto")
    p_iso.add_argument("--json", action="store_true")
    p_iso.set_defaults(fn=cmd_isogeny)

    p_gen = sub.add_parser("gen", help="generate a ground-truth instance")
    p_gen.add_argument("--p", type=int, required=True)
    p_gen.add_argument("--ell", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--budget", type=int, default=512)
    p_gen.set_defaults(fn=cmd_gen)

    p_ver = sub.add_parser("verify", help="verify an instance file")
    p_ver.add_argument("--instance", required=True)
    p_ver.set_defaults(fn=cmd_verify)

    p_bench = sub.add_parser("bench", help="benchmark the algorithms")
    p_bench.add_argument("--algos", required=True,
                         help="comma-separated algorithm names")
    p_bench.add_argument("--ells", required=True,
                         help="comma-separated degrees")
    p_bench.add_argument("--p-bits", type=int, default=62, dest="p_bits")
    p_bench.add_argument("--csv", help="output CSV path (stdout if omitted)")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--reps", type=int, default=3)
    p_bench.add_argument("--mode", choices=("auto", "g", "full"),
                         default="full")
    p_bench.set_defaults(fn=cmd_bench)

    p_self = sub.add_parser("selftest", help="run the built-in fixtures")
    p_self.set_defaults(fn=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.fn(args)
    except (NotPrime, TooSmall) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
