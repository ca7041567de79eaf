"""``bench`` command: run a suite and write runs.csv, summary.csv and plotdata/."""
from __future__ import annotations

import argparse
import logging
import sys

from .bench import DEFAULT_NKP_NOISES, DEFAULTS, MODELS, SMOKE_MODEL, SUITES, SuiteConfig, run_suite, write_outputs
from .gcrf import FitOptions
from .randnet import GRAPH_TYPES
from .spectral import PAIRINGS

log = logging.getLogger("kgcrf.bench")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _sizes(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        a, sep, b = part.strip().lower().partition("x")
        if not sep:
            raise argparse.ArgumentTypeError(f"size {part!r} is not of the form N1xN2")
        out.append((int(a), int(b)))
    return out


def _models(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    bad = [n for n in names if n not in MODELS and n != SMOKE_MODEL]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown models: {', '.join(bad)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description="GCRF benchmark suites on Kronecker graphs.")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--graph", choices=GRAPH_TYPES, default="er")
    p.add_argument("--sizes", type=_sizes, help="comma list like 30x50,50x100")
    p.add_argument("--densities", type=_floats, help="edge densities in (0, 1]")
    p.add_argument("--noises", type=_floats, help="output noise standard deviations")
    p.add_argument("--nkp-noises", type=_floats, help="added-edge fractions (nkp suite)")
    p.add_argument("--models", type=_models, help=f"subset of {','.join(MODELS)}")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairing", choices=PAIRINGS, default="sorted")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="bench_out")
    p.add_argument("--debug-beta0", action="store_true",
                   help="also run a model with beta fixed at 0 (prediction = R)")
    p.add_argument("--tol", type=float, default=FitOptions.tol)
    p.add_argument("--max-iter", type=int, default=FitOptions.max_iter)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> SuiteConfig:
    d = DEFAULTS[args.suite]
    if args.models:
        models = list(args.models)
    elif args.suite == "nkp":
        models = list(MODELS)
    else:
        models = [m for m in MODELS if m != "base_svd"]
    if args.debug_beta0 and SMOKE_MODEL not in models:
        models.append(SMOKE_MODEL)
    nkp = args.nkp_noises if args.nkp_noises is not None else (DEFAULT_NKP_NOISES if args.suite == "nkp" else [0.0])
    return SuiteConfig(
        suite=args.suite, graph_type=args.graph,
        sizes=tuple(args.sizes or d["sizes"]),
        densities=tuple(args.densities or d["densities"]),
        output_noises=tuple(args.noises if args.noises is not None else d["noises"]),
        nkp_noises=tuple(nkp), models=tuple(models), reps=args.reps, base_seed=args.seed,
        pairing_mode=args.pairing, workers=args.workers,
        fit_options=FitOptions(tol=args.tol, max_iter=args.max_iter),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    log.info("running %s on %s: %d sizes, %d reps", cfg.suite, cfg.graph_type, len(cfg.sizes), cfg.reps)
    records = run_suite(cfg)
    rows = write_outputs(args.out, records)
    n_failed = sum(r.failed for r in records)
    for row in rows:
        log.info("%s %dx%d rho=%g sigma=%g frac=%g %-16s mse=%s failed=%d", row["graph_type"], row["n1"], row["n2"],
                 row["rho1"], row["sigma"], row["nkp_noise"], row["model"], row["trimmed_mse"], row["failed"])
    if n_failed:
        print(f"{n_failed} of {len(records)} runs failed; see {args.out}/runs.csv", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
