"""Command-line interface: ``modrec {gen,fold,recon,sweep,selftest}``.

Exit status is 0 on success, 1 for configuration or usage errors and 2 for
runtime or numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import bench, selftest
from .fsr import FsrParams, reconstruct_fsr
from .lasso import IstaParams, reconstruct_lasso_b2r2
from .signal import (
    FoldedSamples,
    add_awgn,
    generate_test_signal,
    modulo_fold,
    nmse,
    nmse_db,
    read_signal_csv,
    signal_power,
    write_signal_csv,
)
from .spectral import out_of_band_indices

log = logging.getLogger("modrec")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _float_list(text):
    try:
        return [bench.parse_snr(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="only print errors")

    p = _Parser(prog="modrec", description="Modulo-sampling reconstruction toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write a random bandlimited test signal")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--of", type=float, default=6.0, help="oversampling factor")
    g.add_argument("--n", type=int, default=1024, help="number of samples")
    g.add_argument("--tones", type=int, default=5)
    g.add_argument("--off-grid", action="store_true", help="draw continuous tone frequencies")
    g.add_argument("--out", type=Path, required=True, help="output CSV")

    f = sub.add_parser("fold", parents=[common], help="modulo-fold a signal file")
    f.add_argument("input", type=Path)
    f.add_argument("--lambda", dest="lam", type=float, default=0.25)
    f.add_argument("--snr", type=bench.parse_snr, default=math.inf, help="dB, or inf")
    f.add_argument("--seed", type=int, default=0, help="noise seed")
    f.add_argument("--out", type=Path, required=True, help="output CSV")

    r = sub.add_parser("recon", parents=[common], help="reconstruct one instance")
    r.add_argument("--method", choices=bench.METHODS, default="fsr")
    r.add_argument("--input", type=Path, help="folded samples CSV; generated when omitted")
    r.add_argument("--original", type=Path, help="original signal CSV for NMSE")
    r.add_argument("--lambda", dest="lam", type=float, default=0.25)
    r.add_argument("--of", type=float, default=6.0)
    r.add_argument("--snr", type=bench.parse_snr, default=math.inf)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--n", type=int, default=1024)
    r.add_argument("--iters", type=int, default=150)
    r.add_argument("--out", type=Path, help="write the estimate to this CSV")

    s = sub.add_parser("sweep", parents=[common], help="Monte-Carlo NMSE sweep")
    s.add_argument("--config", type=Path, help="JSON ExperimentConfig")
    s.add_argument("--sweep", choices=("snr", "of"), help="variable to sweep")
    s.add_argument("--values", type=_float_list, help="comma-separated sweep values")
    s.add_argument("--of", type=float, help="fixed OF for an SNR sweep")
    s.add_argument("--snr", type=bench.parse_snr, help="fixed SNR for an OF sweep")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int, help="base seed")
    s.add_argument("--method", action="append", choices=bench.METHODS)
    s.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    s.add_argument("--plot", action="store_true", help="also write an SVG plot")

    t = sub.add_parser("selftest", parents=[common], help="dense-oracle equivalence checks")
    t.add_argument("--seed", type=int, default=0)
    return p


def _sweep_config(args) -> bench.ExperimentConfig:
    base = bench.ExperimentConfig.from_json(args.config) if args.config else bench.ExperimentConfig()
    data = base.to_dict()
    if args.sweep or args.values or args.of is not None or args.snr is not None:
        var = args.sweep or base.sweep.var
        if args.values:
            values = args.values
        elif var == base.sweep.var:
            values = list(base.sweep.values)
        else:
            values = bench.DEFAULT_SNR_GRID if var == "snr" else bench.DEFAULT_OF_GRID
        if var == "snr":
            fixed = args.of if args.of is not None else (base.sweep.fixed if base.sweep.var == "snr" else 6.0)
        else:
            fixed = args.snr if args.snr is not None else (base.sweep.fixed if base.sweep.var == "of" else 20.0)
        data["sweep"] = {"var": var, "values": values, "fixed": fixed}
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["base_seed"] = args.seed
    if args.method:
        data["methods"] = list(dict.fromkeys(args.method))
    return bench.ExperimentConfig.from_dict(data)


def cmd_gen(args):
    sig = generate_test_signal(args.seed, args.n, args.of, args.tones, not args.off_grid)
    write_signal_csv(args.out, sig.samples)
    log.info("wrote %d samples to %s", sig.n_samples, args.out)


def cmd_fold(args):
    f = read_signal_csv(args.input)
    folded = modulo_fold(f, args.lam).samples
    if not math.isinf(args.snr):
        folded = add_awgn(folded, args.snr, signal_power(f), args.seed)
    write_signal_csv(args.out, folded)
    log.info("wrote folded samples to %s", args.out)


def cmd_recon(args):
    if args.input:
        samples = read_signal_csv(args.input)
        folded = FoldedSamples(samples, args.lam, noisy=not math.isinf(args.snr))
        original = read_signal_csv(args.original) if args.original else None
    else:
        cfg = bench.ExperimentConfig(
            n_samples=args.n, lam=args.lam, trials=1, base_seed=args.seed,
            sweep=bench.Sweep("snr", [args.snr], args.of),
        )
        inst = bench.make_instance(cfg, args.of, args.snr, 0)
        folded, original = inst.folded, inst.original
    mask = out_of_band_indices(folded.n_samples, args.of)
    if args.method == "fsr":
        res = reconstruct_fsr(folded, mask, FsrParams(max_iters=args.iters, init_seed=args.seed))
    else:
        res = reconstruct_lasso_b2r2(folded, mask, IstaParams(max_iters=args.iters))
    if args.out:
        write_signal_csv(args.out, res.f_est)
    if original is not None:
        if original.shape != res.f_est.shape:
            raise ValueError("original and folded signals differ in length")
        print(f"method={args.method} nmse={nmse(original, res.f_est):.6e} "
              f"nmse_db={nmse_db(original, res.f_est):.2f} runtime_ms={res.runtime_s * 1e3:.1f}")
    else:
        print(f"method={args.method} iterations={res.iterations} runtime_ms={res.runtime_s * 1e3:.1f}")


def cmd_sweep(args):
    config = _sweep_config(args)
    out = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    log.info("running %d points x %d trials", len(config.sweep.values), config.trials)
    records = bench.run_sweep(config)
    summary = bench.summarize(records, config.sweep.var)
    bench.emit_csv(records, out / "raw.csv", kind="raw")
    bench.emit_csv(summary, out / "summary.csv", kind="summary")
    if args.plot:
        bench.emit_plot(summary, out / "nmse.svg")
    if not args.quiet:
        for row in summary:
            print(f"{row['method']:>11} {row['sweep_var']}={row['sweep_value']:g} "
                  f"mean_nmse_db={row['mean_nmse_db']:.2f} exact={row['exact_rate']:.2f}")


def cmd_selftest(args):
    ok = True
    for passed, desc in selftest.run_all(args.seed):
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {desc}")
    if not ok:
        raise ArithmeticError("selftest failed")


COMMANDS = {"gen": cmd_gen, "fold": cmd_fold, "recon": cmd_recon, "sweep": cmd_sweep, "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    try:
        COMMANDS[args.command](args)
    except (bench.ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # bad inputs (mask empty, malformed CSV) are configuration problems
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
