"""Command-line front end: ``kitecode <command> ...`` or ``kitecode --reproduce TARGET``.

Exit status: 0 on success, 2 on usage errors, 3 on runtime failures
(bad input files, decoding failures, interrupted campaigns).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .bounds import BoundConfig, optimized_bound, refined_bound, union_divsalar_bound
from .bp import LLR_CLAMP, SumProductDecoder, init_llr
from .channel import ChannelConfig, awgn_transmit, bpsk_modulate, frame_rng, simulate_ber
from .concat import ConcatDecoder, ConcatSpec, run_frame
from .de import rate_threshold
from .design import DesignConfig, DesignLog, greedy_design
from .io import InputError, Manifest, read_bits, read_samples, read_spec, write_bits, write_csv, write_samples, write_spec
from .kite import N_WINDOWS, PSEQ_1890, PSEQ_51150, KiteCode, KiteCodeSpec, KiteEncoder, PSequence, max_parity
from .rs import RsCode
from .rs_analysis import log10_mceliece_swanson_cap, log_p_err, log_p_mis
from .wef import ensemble_wef

log = logging.getLogger("kitecode")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
NAMED_PSEQS = {"1890": PSEQ_1890, "51150": PSEQ_51150}
REPRODUCE_TARGETS = ("fig4", "fig6", "table1", "fig9", "fig10", "fig11-spot")
LN10 = math.log(10.0)


class RunFailed(RuntimeError):
    pass


# ---------------------------------------------------------------- helpers


def _grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            a, b, s = (float(x) for x in text.split(":"))
            if s <= 0 or b < a:
                raise ValueError
            count = int(math.floor((b - a) / s + 1e-9)) + 1
            return [round(a + i * s, 10) for i in range(count)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use a:b:step or a comma list") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _pseq_arg(text: str) -> PSequence:
    if text in NAMED_PSEQS:
        return NAMED_PSEQS[text]
    try:
        vals = [float(x) for x in text.split(",")]
        if len(vals) == 1:
            return PSequence.constant(vals[0])
        return PSequence(tuple(vals))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad p-sequence {text!r}: {exc}") from None


def _seed(args, default: int) -> int:
    return default if args.seed is None else args.seed


def _code_spec(args, k: int | None = None, seed_default: int = 1) -> KiteCodeSpec:
    """Kite code from ``--spec`` or from ``--k``/``--pseq``."""
    if getattr(args, "spec", None):
        spec = read_spec(args.spec)
        if k is not None and spec.k != k:
            raise InputError(f"spec file has k={spec.k}, this run needs k={k}")
        if args.seed is not None:
            spec = KiteCodeSpec(spec.k, args.seed, spec.pseq)
        return spec
    k = k if k is not None else getattr(args, "k", None)
    pseq = getattr(args, "pseq", None)
    if k is None or pseq is None:
        raise InputError("give --spec, or both --k and --pseq")
    return KiteCodeSpec(k, _seed(args, seed_default), pseq)


def _config(args) -> dict:
    skip = {"func", "threads", "output", "verbose", "session_log", "log"}
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = val.q if isinstance(val, PSequence) else val
    return out


class Run:
    """Collects rows and writes them with a manifest, marking FAILED on errors."""

    def __init__(self, args, command: str, columns, inputs=()):
        self.args = args
        self.command = command
        self.columns = list(columns)
        self.rows: list = []
        self.inputs = [p for p in inputs if p]
        self.t0 = time.perf_counter()

    def manifest(self, status: str) -> Manifest:
        out = getattr(self.args, "output", None)
        return Manifest(
            self.command,
            _config(self.args),
            seed=getattr(self.args, "seed", None),
            outputs=[out or "-"],
            inputs=self.inputs,
            wall_clock=time.perf_counter() - self.t0,
            status=status,
        )

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "OK" if exc_type is None else "FAILED"
        if exc_type is None or self.rows:
            write_csv(getattr(self.args, "output", None), self.columns, self.rows, self.manifest(status))
        return False


# ---------------------------------------------------------------- commands


def cmd_spec(args) -> int:
    spec = KiteCodeSpec(args.k, _seed(args, 1), args.pseq)
    write_spec(args.output, spec)
    return EXIT_OK


def cmd_encode(args) -> int:
    spec = read_spec(args.spec)
    u = read_bits(args.input)
    if u.size != spec.k:
        raise InputError(f"{args.input}: expected {spec.k} information bits, got {u.size}")
    if not 0 <= args.parity <= max_parity(spec.k):
        raise InputError(f"parity count must lie in [0, {max_parity(spec.k)}]")
    c = np.concatenate([u, KiteEncoder(spec, u).extend(args.parity)])
    if args.snr is None:
        write_bits(args.output, c)
    else:
        cfg = ChannelConfig.from_snr_db(args.snr)
        write_samples(args.output, awgn_transmit(bpsk_modulate(c), cfg, frame_rng(_seed(args, 0), 0)))
    return EXIT_OK


def cmd_decode(args) -> int:
    spec = read_spec(args.spec)
    if args.format == "bits":
        c = read_bits(args.input)
        llr = np.where(c == 0, LLR_CLAMP, -LLR_CLAMP).astype(float)
    else:
        if args.snr is None:
            raise InputError("--snr is required to decode channel samples")
        llr = init_llr(read_samples(args.input), ChannelConfig.from_snr_db(args.snr).sigma2)
    n = llr.size
    if n < spec.k or n - spec.k > max_parity(spec.k):
        raise InputError(f"{args.input}: length {n} is not a valid prefix length for k={spec.k}")
    dec = SumProductDecoder(KiteCode(spec).realization(n))
    out = dec.decode(llr, args.iterations)
    if not out.success:
        print(f"decoding failed after {out.iterations} iterations", file=sys.stderr)
        return EXIT_RUNTIME
    write_bits(args.output, out.hard_bits[: spec.k])
    return EXIT_OK


def _wef_rows(spec: KiteCodeSpec, r: int, D: int | None):
    wef = ensemble_wef(spec.k, spec.pseq, r, D)
    return wef, [(d, s / LN10, sp / LN10) for d, s, sp in zip(range(wef.D + 1), wef.logS, wef.logSprime)]


def cmd_wef(args) -> int:
    spec = _code_spec(args)
    with Run(args, "wef", ["d", "log10_S", "log10_Sprime"], [args.spec]) as run:
        run.rows.extend(_wef_rows(spec, args.r, args.D)[1])
    return EXIT_OK


def _bound_rows(wef, n: int, snrs, mode: str, d_star: int | None):
    rows = []
    for snr in snrs:
        cfg = BoundConfig(n, 10.0 ** (-snr / 10.0), mode)
        opt, best = optimized_bound(wef, cfg, return_dstar=True)
        ds = best if d_star is None else d_star
        ref = opt if d_star is None else refined_bound(wef, cfg, d_star)
        rows.append((snr, union_divsalar_bound(wef, cfg), ref, ds, opt))
    return rows


BOUND_COLUMNS = ["snr_db", "union_bound", "refined_bound", "d_star", "optimized_bound"]


def cmd_bound(args) -> int:
    spec = _code_spec(args)
    n = spec.k + args.r
    with Run(args, "bound", BOUND_COLUMNS, [args.spec]) as run:
        wef = ensemble_wef(spec.k, spec.pseq, args.r)
        run.rows.extend(_bound_rows(wef, n, args.snr, args.mode, args.dstar))
    return EXIT_OK


def _window_of_rate(rate: float) -> int:
    w = int(round(rate * 10))
    if not 1 <= w <= N_WINDOWS or abs(rate * 10 - w) > 1e-9:
        raise InputError(f"rate {rate} is not one of 0.1, 0.2, ..., 0.9")
    return w


def _de_rows(spec: KiteCodeSpec, rates, T_b: float, threads: int):
    windows = [_window_of_rate(x) for x in rates]
    job = lambda w: rate_threshold(spec.k, spec.pseq, w, T_b)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            thr = list(ex.map(job, windows))
    else:
        thr = [job(w) for w in windows]
    return [(w / 10, t) for w, t in zip(windows, thr)]


def cmd_de(args) -> int:
    spec = _code_spec(args)
    with Run(args, "de", ["rate", "threshold_db"], [args.spec]) as run:
        run.rows.extend(_de_rows(spec, args.rates, args.target_ber, args.threads))
    return EXIT_OK


def cmd_design(args) -> int:
    cfg = DesignConfig(
        args.k,
        criterion=args.criterion,
        target_ber=args.target_ber,
        rel_tol=args.rel_tol,
        seed=_seed(args, 1),
        min_errors=args.min_errors,
        max_frames=args.max_frames,
        J=args.iterations,
    )
    dlog = DesignLog()
    with Run(args, "design", ["window", "q", "objective"]) as run:
        try:
            pseq = greedy_design(cfg, dlog)
        finally:
            run.rows.extend(dlog.to_csv_rows())
    write_spec(args.output_spec, KiteCodeSpec(args.k, cfg.seed, pseq))
    return EXIT_OK


def _pb_grid(lo: float, hi: float, per_decade: int) -> list[float]:
    a, b = math.log10(lo), math.log10(hi)
    count = int(math.floor((b - a) * per_decade + 1e-9)) + 1
    pts = [10.0 ** (a + i / per_decade) for i in range(count)]
    if pts[-1] < hi * (1 - 1e-12):
        pts.append(hi)
    return pts


def _rs_rows(N: int, K: int, m: int, pbs):
    cap = log10_mceliece_swanson_cap((N - K) // 2)
    return [(pb, log_p_err(N, K, m, pb) / LN10, log_p_mis(N, K, m, pb) / LN10, cap) for pb in pbs]


RS_COLUMNS = ["P_b", "log10_p_err", "log10_p_mis", "log10_ms_cap"]


def cmd_rs_analyze(args) -> int:
    RsCode(args.m, args.N, args.K)  # validates the parameters
    with Run(args, "rs-analyze", RS_COLUMNS) as run:
        run.rows.extend(_rs_rows(args.N, args.K, args.m, _pb_grid(args.pb_min, args.pb_max, args.per_decade)))
    return EXIT_OK


SIM_COLUMNS = ["snr_db", "n", "frames", "bit_errors", "ber", "fer"]


def cmd_simulate(args) -> int:
    spec = _code_spec(args)
    code = KiteCode(spec)
    seed = _seed(args, 1)
    with Run(args, "simulate", SIM_COLUMNS, [args.spec]) as run:
        for n in args.n:
            if n < spec.k or n - spec.k > max_parity(spec.k):
                raise InputError(f"n={n} is not a valid prefix length for k={spec.k}")
            for snr in args.snr:
                rep = simulate_ber(
                    code, n, ChannelConfig.from_snr_db(snr), args.iterations, args.min_errors, args.max_frames, seed, args.threads
                )
                run.rows.append((snr, n, rep.frames, rep.bit_errors, rep.ber, rep.fer))
                log.info("n=%d snr=%.2f ber=%.3g (%d frames)", n, snr, rep.ber, rep.frames)
    return EXIT_OK


CONCAT_COLUMNS = ["snr_db", "frame", "success", "n", "rate", "inner_attempts", "data_ok"]


def _concat_rows(spec: ConcatSpec, snrs, frames: int, seed: int, session_log=None):
    decoder = ConcatDecoder(spec)
    for snr in snrs:
        cfg = ChannelConfig.from_snr_db(snr)
        for f in range(frames):
            u, res = run_frame(decoder, cfg, seed, f)
            ok = bool(res.success and np.array_equal(res.data, u))
            if session_log is not None:
                for e in res.log:
                    new = ",".join(map(str, e.new)) or "-"
                    session_log.write(f"snr={snr!r} frame={f} n={e.n} iterations={e.iterations} new={new} delta={e.delta}\n")
            rate = spec.k / res.n if res.success else float("nan")
            yield (snr, f, res.success, res.n, rate, len(res.log), ok)


def _concat_spec(args) -> ConcatSpec:
    rs = RsCode(args.m, args.N, args.K)
    k = args.ell * args.m * args.N
    kite = _code_spec(args, k=k)
    return ConcatSpec(rs, args.ell, kite.seed, kite.pseq, args.r0, args.delta_r, args.iterations, args.T, not args.plain_rs)


def _summarize(rows) -> str:
    rates = [r[4] for r in rows if r[2]]
    mean = float(np.mean(rates)) if rates else float("nan")
    return f"frames={len(rows)} successes={len(rates)} mean_rate={mean:.4f}"


def cmd_concat(args) -> int:
    spec = _concat_spec(args)
    fh = open(args.session_log, "w") if args.session_log else None
    try:
        with Run(args, "concat", CONCAT_COLUMNS, [args.spec]) as run:
            for row in _concat_rows(spec, args.snr, args.frames, _seed(args, 0), fh):
                run.rows.append(row)
                log.info("frame %d: success=%s rate=%.4f", row[1], row[2], row[4])
    finally:
        if fh is not None:
            fh.close()
    print(_summarize(run.rows), file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- reproduce


def reproduce(args) -> int:
    target = args.reproduce
    k, r = 1890, 210
    if target == "fig4":
        with Run(args, "reproduce fig4", ["p0", "d", "log10_S", "log10_Sprime"]) as run:
            for p0 in (0.5, 0.025, 0.015):
                _, rows = _wef_rows(KiteCodeSpec(k, 1, PSequence.constant(p0)), r, None)
                run.rows.extend((p0,) + row for row in rows)
    elif target == "fig6":
        with Run(args, "reproduce fig6", ["p0"] + BOUND_COLUMNS) as run:
            for p0 in (0.5, 0.025, 0.015):
                wef = ensemble_wef(k, PSequence.constant(p0), r)
                run.rows.extend((p0,) + row for row in _bound_rows(wef, k + r, _grid("2:8:0.25"), "bit", None))
    elif target == "table1":
        with Run(args, "reproduce table1", ["rate", "threshold_db"]) as run:
            rates = [w / 10 for w in range(N_WINDOWS, 0, -1)]
            run.rows.extend(_de_rows(KiteCodeSpec(k, 1, PSEQ_1890), rates, 1e-4, args.threads))
    elif target in ("fig9", "fig10"):
        with Run(args, f"reproduce {target}", RS_COLUMNS) as run:
            run.rows.extend(_rs_rows(1023, 1000, 10, _pb_grid(1e-5, 0.5, 10)))
    elif target == "fig11-spot":
        spec = ConcatSpec(RsCode(10, 1023, 1000), 5, 1, PSEQ_51150)
        with Run(args, "reproduce fig11-spot", CONCAT_COLUMNS) as run:
            for row in _concat_rows(spec, [2.1], 20, _seed(args, 0)):
                run.rows.append(row)
                log.info("frame %d: success=%s rate=%.4f", row[1], row[2], row[4])
        print(_summarize(run.rows), file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_code_source(p, need_r: bool = False):
    p.add_argument("--spec", help="code-spec file (k, seed, q9..q1)")
    p.add_argument("--k", type=_positive_int, help="information length (with --pseq, instead of --spec)")
    p.add_argument("--pseq", type=_pseq_arg, help="'1890', '51150', one constant p, or nine comma-separated values q9..q1")
    if need_r:
        p.add_argument("--r", type=_positive_int, required=True, help="number of parity bits")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kitecode", description="Kite codes and RS-Kite concatenation toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--seed", type=int, default=None, help="master seed (each command documents its default)")
    ap.add_argument("--threads", type=_positive_int, default=1, help="worker threads; never changes results")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--reproduce", choices=REPRODUCE_TARGETS, help="run a fixed published configuration")
    ap.add_argument("-o", "--output", help="output CSV path (default stdout), used with --reproduce")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("spec", help="write a code-spec file")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--pseq", type=_pseq_arg, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_spec)

    p = sub.add_parser("encode", help="encode an information bit file")
    p.add_argument("--spec", required=True)
    p.add_argument("--input", required=True, help="text file of k bits")
    p.add_argument("--parity", type=int, required=True, help="number of parity bits to emit")
    p.add_argument("--snr", type=float, help="emit noisy BPSK samples at this SNR (dB) instead of bits")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a received prefix")
    p.add_argument("--spec", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("bits", "samples"), default="samples")
    p.add_argument("--snr", type=float, help="channel SNR in dB (samples format)")
    p.add_argument("--iterations", type=_positive_int, default=50)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("wef", help="ensemble weight spectrum CSV")
    _add_code_source(p, need_r=True)
    p.add_argument("--D", type=int, help="spectrum depth (default n)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_wef)

    p = sub.add_parser("bound", help="ML performance bounds CSV")
    _add_code_source(p, need_r=True)
    p.add_argument("--snr", type=_grid, default=_grid("2:8:0.25"), help="SNR grid in dB, a:b:step or list")
    p.add_argument("--mode", choices=("bit", "frame"), default="bit")
    p.add_argument("--dstar", type=int, help="fixed list radius for the refined column (default: optimal)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("de", help="density-evolution thresholds CSV")
    _add_code_source(p)
    p.add_argument("--rates", type=_grid, default=[w / 10 for w in range(N_WINDOWS, 0, -1)])
    p.add_argument("--target-ber", type=float, default=1e-4)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_de)

    p = sub.add_parser("design", help="greedy p-sequence design")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--criterion", choices=("de_threshold", "simulation_ordinal"), default="de_threshold")
    p.add_argument("--target-ber", type=float, default=1e-4)
    p.add_argument("--rel-tol", type=float, default=0.02)
    p.add_argument("--min-errors", type=_positive_int, default=100)
    p.add_argument("--max-frames", type=_positive_int, default=20_000)
    p.add_argument("--iterations", type=_positive_int, default=50)
    p.add_argument("--output-spec", required=True, help="where to write the designed code-spec file")
    p.add_argument("-o", "--output", help="design-log CSV")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("rs-analyze", help="outer RS error and miscorrection probabilities CSV")
    p.add_argument("--N", type=_positive_int, default=1023)
    p.add_argument("--K", type=_positive_int, default=1000)
    p.add_argument("--m", type=_positive_int, default=10)
    p.add_argument("--pb-min", type=float, default=1e-5)
    p.add_argument("--pb-max", type=float, default=0.5)
    p.add_argument("--per-decade", type=_positive_int, default=10)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_rs_analyze)

    p = sub.add_parser("simulate", help="BER Monte-Carlo campaign CSV")
    _add_code_source(p)
    p.add_argument("--n", type=lambda s: [int(x) for x in s.split(",")], required=True, help="prefix length(s)")
    p.add_argument("--snr", type=_grid, required=True)
    p.add_argument("--iterations", type=_positive_int, default=50)
    p.add_argument("--min-errors", type=_positive_int, default=100)
    p.add_argument("--max-frames", type=_positive_int, default=100_000)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("concat", help="RS-Kite incremental-redundancy sessions CSV")
    p.add_argument("--N", type=_positive_int, default=255)
    p.add_argument("--K", type=_positive_int, default=223)
    p.add_argument("--m", type=_positive_int, default=8)
    p.add_argument("--ell", type=_positive_int, default=1)
    p.add_argument("--spec", help="code-spec file whose k equals ell*m*N")
    p.add_argument("--pseq", type=_pseq_arg, default=PSEQ_1890)
    p.add_argument("--r0", type=int)
    p.add_argument("--delta-r", type=_positive_int)
    p.add_argument("--T", type=int)
    p.add_argument("--iterations", type=_positive_int, default=50)
    p.add_argument("--plain-rs", action="store_true", help="disable the GRS symbol scrambler")
    p.add_argument("--snr", type=_grid, required=True)
    p.add_argument("--frames", type=_positive_int, default=10)
    p.add_argument("--session-log", help="write per-attempt session lines here")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_concat)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.reproduce is None and args.command is None:
        ap.print_usage(sys.stderr)
        print("kitecode: error: a command or --reproduce is required", file=sys.stderr)
        return EXIT_USAGE
    if args.reproduce is not None and args.command is not None:
        print("kitecode: error: --reproduce does not combine with a command", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.reproduce is not None:
            return reproduce(args)
        return args.func(args)
    except (InputError, ValueError, OSError) as exc:
        print(f"kitecode: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        print("kitecode: interrupted", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
