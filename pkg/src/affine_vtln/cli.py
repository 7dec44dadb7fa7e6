"""Command-line interface: ``python -m affine_vtln <command> ...``.

Every CSV written here starts with a ``#`` line recording the invocation.
"""

from __future__ import annotations

import argparse
import logging
import shlex
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .bayes import GibbsConfig, Hyperparams, run_gibbs, write_trace_csv
from .classical import Clamped, aggregate, estimate_all_pairs
from .data_io import (
    RepetitionPolicy,
    draw_truth,
    generate_synthetic,
    load_database,
    paired_to_database,
    speaker_formant_vector,
    template_vector,
    write_database,
    write_truth_sidecar,
)
from .hyperparams import (
    HyperparamBounds,
    ILGrid,
    axis_scan,
    fit_hyperparams,
    log_integrated_likelihood,
    read_hyperparams,
    scan_values,
    write_hyperparams,
    write_scan_csv,
)
from .model import AffineParams, PairedDataset
from .numerics import OptimizerConfig, RngStream
from .pipeline import BayesSettings
from .recognizer import (
    ALL_METHODS,
    ExperimentConfig,
    ExperimentPlan,
    ExperimentRunner,
    Method,
    gender_dependent_plans,
    group_name,
    parse_group,
    write_confusion_csv,
    write_results_csv,
    write_table_csv,
)
from .spectral import read_spectrum_csv, warp_spectrum, write_spectrum_csv

log = logging.getLogger("affine_vtln")


class CliError(Exception):
    pass


def _stamp(argv: Sequence[str]) -> str:
    return "invocation: affine_vtln " + " ".join(shlex.quote(a) for a in argv)


def _pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'low,high', got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"need low < high, got {text!r}")
    return lo, hi


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return v


# ---------------------------------------------------------------------------
# shared option groups
# ---------------------------------------------------------------------------


def _add_data_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="formant table CSV (speaker_id,category,vowel,repetition,F1,F2,F3)")
    p.add_argument("--format", default="generic", choices=["generic", "pnb", "hil", "synthetic"],
                   help="database label attached to the table")
    p.add_argument("--repetition-policy", default="mean", choices=["mean", "each"],
                   help="average repeated vowel tokens, or keep each as its own entry")


def _add_bayes_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("hyperparameter search box")
    d = HyperparamBounds()
    g.add_argument("--a-bounds", type=_pair, default=d.a, help="kappa prior mean a (Hz)")
    g.add_argument("--b-bounds", type=_pair, default=d.b, help="kappa prior sd b (Hz)")
    g.add_argument("--c-bounds", type=_pair, default=d.c, help="alpha prior mean c")
    g.add_argument("--d-bounds", type=_pair, default=d.d, help="alpha prior sd d")
    g.add_argument("--theta1-bounds", type=_pair, default=d.theta1, help="lower end of the sigma window (Hz)")
    g.add_argument("--theta2-max", type=_positive, default=d.theta2_max, help="upper limit for theta2 (Hz)")
    g.add_argument("--min-gap", type=_positive, default=d.min_gap, help="minimum theta2 - theta1 (Hz)")
    q = p.add_argument_group("integrated-likelihood quadrature")
    q.add_argument("--kappa-nodes", type=_count, default=64, help="Gauss-Legendre nodes along kappa")
    q.add_argument("--sigma-nodes", type=_count, default=32, help="Gauss-Legendre nodes along sigma")
    q.add_argument("--refine", action="store_true",
                   help="double the nodes until successive values agree to 1e-6 (final value only)")
    o = p.add_argument_group("optimizer")
    o.add_argument("--max-iterations", type=_count, default=3000, help="Nelder-Mead iteration cap")
    o.add_argument("--x-tolerance", type=_positive, default=1e-7, help="simplex size tolerance")
    o.add_argument("--f-tolerance", type=_positive, default=1e-9, help="objective spread tolerance")


def _add_gibbs_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("Gibbs sampler")
    g.add_argument("--iterations", type=_count, default=2000, help="total sweeps M")
    g.add_argument("--burn-in", type=int, default=1500, help="discarded sweeps m")
    g.add_argument("--kappa0", type=float, default=None, help="initial kappa (default: prior mean a)")
    g.add_argument("--sigma0", type=float, default=None, help="initial sigma (default: window midpoint)")
    g.add_argument("--seed", type=int, default=0, help="random seed")
    g.add_argument("--stream-id", type=int, default=0, help="random stream id")


def _bounds(args) -> HyperparamBounds:
    return HyperparamBounds(args.a_bounds, args.b_bounds, args.c_bounds, args.d_bounds, args.theta1_bounds,
                            args.theta2_max, args.min_gap)


def _grid(args) -> ILGrid:
    return ILGrid(kappa_nodes=args.kappa_nodes, sigma_nodes=args.sigma_nodes, refine=args.refine)


def _opt(args) -> OptimizerConfig:
    return OptimizerConfig(max_iterations=args.max_iterations, x_tolerance=args.x_tolerance,
                           f_tolerance=args.f_tolerance, max_restarts=3)


def _select(db, spec: str | None, exclude: Sequence[str] = ()) -> list[str]:
    """Speaker ids from a comma list, a category token (M/F/C/all) or None (everyone)."""
    ids = db.speaker_ids()
    if spec is None:
        chosen = ids
    else:
        try:
            group = parse_group(spec)
            chosen = db.speaker_ids(group) if group is not None else ids
        except ValueError:
            chosen = [t.strip() for t in spec.split(",") if t.strip()]
            unknown = [s for s in chosen if s not in ids]
            if unknown:
                raise CliError(f"unknown speaker id(s): {', '.join(unknown)}")
    return [s for s in chosen if s not in exclude]


def _paired(args) -> tuple[PairedDataset, str, list[str]]:
    db = load_database(args.data, args.format)
    subject = args.subject
    if subject not in db.speaker_ids():
        raise CliError(f"subject {subject!r} not found in {args.data}")
    refs = _select(db, args.references, exclude=[subject])
    if not refs:
        raise CliError("no reference speakers selected")
    vowels = db.vowels()
    x = speaker_formant_vector(db, subject, args.repetition_policy, vowels)
    ys = [speaker_formant_vector(db, s, args.repetition_policy, vowels) for s in refs]
    return PairedDataset.from_vectors(x, ys), subject, refs


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_estimate_classical(args, argv) -> int:
    db = load_database(args.data, args.format)
    vowels = db.vowels()
    subjects = _select(db, args.subjects)
    refs = _select(db, args.references)
    vec = {s: speaker_formant_vector(db, s, args.repetition_policy, vowels) for s in dict.fromkeys(subjects + refs)}
    cfg = OptimizerConfig(max_iterations=args.max_iterations, x_tolerance=1e-10, f_tolerance=1e-14, max_restarts=6)
    pairs = estimate_all_pairs([vec[s] for s in subjects], [vec[s] for s in refs], args.criterion, cfg)
    if not pairs:
        raise CliError("no subject/reference pairs to estimate")
    adjustment = Clamped(args.clamp) if args.clamp is not None else None
    est = aggregate(pairs, adjustment, strict=False)
    out = _open_out(args.out)
    try:
        out.write(f"# {_stamp(argv)}\n")
        out.write(f"# criterion={args.criterion} clamp={args.clamp if args.clamp is not None else 'none'}\n")
        out.write("record,subject,reference,alpha,kappa,objective,kappa_unreliable\n")
        for pe in est.pair_estimates:
            out.write(f"pair,{pe.subject_id},{pe.reference_id},{pe.alpha_ij!r},{pe.kappa_ij!r},"
                      f"{pe.objective_value!r},{int(pe.kappa_unreliable)}\n")
        for s, a in est.alpha_by_subject.items():
            k = est.kappa_by_subject.get(s)
            out.write(f"subject,{s},,{a!r},{'' if k is None else repr(k)},,{int(k is None)}\n")
        out.write(f"database,,,,{est.kappa!r},,\n")
    finally:
        _close_out(out)
    for s in est.excluded_subjects:
        print(f"warning: subject {s} excluded from the database kappa (vanishing denominator)", file=sys.stderr)
    return 0


def cmd_estimate_bayes(args, argv) -> int:
    if args.skip_hyperopt and not args.hyperparams:
        raise CliError("--skip-hyperopt needs --hyperparams FILE")
    data, subject, refs = _paired(args)
    log_il = None
    if args.skip_hyperopt:
        hp = read_hyperparams(args.hyperparams)
    else:
        start = read_hyperparams(args.hyperparams) if args.hyperparams else None
        res = fit_hyperparams(data, _bounds(args), _grid(args), _opt(args), x0=start)
        hp, log_il = res.hyperparams, res.log_il
    cfg = GibbsConfig(args.iterations, args.burn_in, args.kappa0, args.sigma0, RngStream(args.seed, args.stream_id))
    est = run_gibbs(data, hp, cfg)
    stamp = _stamp(argv)
    if args.trace:
        write_trace_csv(est.trace, args.trace, stamp)
    out = _open_out(args.out)
    try:
        out.write(f"# {stamp}\n")
        out.write("quantity,reference,value\n")
        for k, v in hp.as_dict().items():
            out.write(f"{k},,{v!r}\n")
        if log_il is not None:
            out.write(f"log_il,,{log_il!r}\n")
        out.write(f"kappa_mean,,{est.kappa_mean!r}\n")
        out.write(f"sigma_mean,,{est.sigma_mean!r}\n")
        out.write(f"alpha_subject,{subject},{est.alpha_subject!r}\n")
        for ref, a in zip(refs, est.alpha_mean):
            out.write(f"alpha_mean,{ref},{float(a)!r}\n")
    finally:
        _close_out(out)
    return 0


def cmd_hyperopt(args, argv) -> int:
    data, _, _ = _paired(args)
    bounds = _bounds(args)
    grid = _grid(args)
    if args.hyperparams and args.no_fit:
        hp = read_hyperparams(args.hyperparams)
        value = log_integrated_likelihood(hp, data, grid)
    else:
        start = read_hyperparams(args.hyperparams) if args.hyperparams else None
        res = fit_hyperparams(data, bounds, grid, _opt(args), x0=start)
        hp, value = res.hyperparams, res.log_il
    if args.out:
        write_hyperparams(hp, args.out)
    print(" ".join(f"{k}={v:.6g}" for k, v in hp.as_dict().items()) + f" logIL={value:.6f}")
    if args.scan:
        names = [t.strip() for t in args.scan.split(",") if t.strip()]
        bad = [n for n in names if n not in Hyperparams.NAMES]
        if bad:
            raise CliError(f"unknown hyperparameter(s) to scan: {', '.join(bad)}")
        rows = []
        for name in names:
            values = scan_values(hp, name, bounds, args.scan_points)
            rows += [(name, v, val) for v, val in axis_scan(data, hp, name, values, bounds, grid)]
        target = args.scan_out or "scan.csv"
        write_scan_csv(rows, target, _stamp(argv))
    return 0


def cmd_vowel_eval(args, argv) -> int:
    dbs = []
    if args.pnb:
        dbs.append(("PnB", load_database(args.pnb, "pnb")))
    if args.hil:
        dbs.append(("Hil", load_database(args.hil, "hil")))
    if not dbs:
        raise CliError("give --pnb and/or --hil")
    methods = [Method.parse(t) for t in args.methods.split(",")] if args.methods else list(ALL_METHODS)
    if any(m.clamped for m in methods) and args.clamp is None:
        raise CliError("clamped methods need an explicit --clamp L (Hz)")
    if Method.BASELINE not in methods:
        methods = [Method.BASELINE] + methods
    gibbs = GibbsConfig(args.iterations, args.burn_in)
    bayes = BayesSettings(gibbs=gibbs)
    config = ExperimentConfig(clamp_L=args.clamp or 500.0, bayes=bayes, seed=args.seed,
                              fit_classes_on=args.fit_classes_on)
    stamp = _stamp(argv)
    table_rows = []
    plan_results = []
    for name, db in dbs:
        runner = ExperimentRunner(db, config)
        for m in methods:
            if args.mode in ("gi", "both"):
                res = runner.run(ExperimentPlan(None, None, m, name))
                table_rows.append((name, m, res.accuracy, res.n_trials))
                plan_results.append(res)
                if args.confusion_dir:
                    Path(args.confusion_dir).mkdir(parents=True, exist_ok=True)
                    write_confusion_csv(res, Path(args.confusion_dir) / f"{name}_AA_{m.value}.csv", stamp)
                _report(res)
            if args.mode in ("gd", "both"):
                for plan in gender_dependent_plans(m, name):
                    res = runner.run(plan)
                    plan_results.append(res)
                    _report(res)
    if table_rows:
        write_table_csv(table_rows, args.out, stamp)
    if args.plans_out or not table_rows:
        write_results_csv(plan_results, args.plans_out or args.out, stamp)
    return 0


def _report(res) -> None:
    p = res.plan
    print(f"{p.database} {group_name(p.subject_category)}/{group_name(p.reference_category)} "
          f"{p.estimator.value}: {100 * res.accuracy:.2f}% of {res.n_trials}"
          + (f" ({len(res.failures)} speakers failed)" if res.failures else ""), file=sys.stderr)


def cmd_warp(args, argv) -> int:
    spec = read_spectrum_csv(args.input)
    out = warp_spectrum(spec, AffineParams(args.alpha, args.kappa), args.f0)
    write_spectrum_csv(out, args.out, _stamp(argv))
    return 0


def cmd_synth(args, argv) -> int:
    if args.template:
        tdb = load_database(args.template)
        sid = args.template_speaker or tdb.speaker_ids()[0]
        x = speaker_formant_vector(tdb, sid, "mean")
        x = type(x)("subject", x.category, x.entries)
    else:
        x = template_vector()
    hp = read_hyperparams(args.hyperparams) if args.hyperparams else None
    truth = draw_truth(args.seed, args.n, args.kappa, args.sigma, args.alpha_mean, args.alpha_sd, hp)
    data = generate_synthetic(x, truth)
    write_database(paired_to_database(data), args.out, _stamp(argv))
    if args.truth:
        write_truth_sidecar(truth, args.truth)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def _close_out(fh):
    if fh is not sys.stdout:
        fh.close()


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="affine_vtln", formatter_class=fmt,
                                     description="Affine vocal-tract-length normalization from formant data.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate-classical", formatter_class=fmt,
                       help="per-pair (alpha, kappa) by squared or absolute error, then averaged",
                       description="Fit alpha and kappa for every subject/reference pair by minimizing squared "
                                   "(mse) or absolute (mae) error, then average: alpha per subject, kappa per "
                                   "database.")
    _add_data_options(p)
    p.add_argument("--subjects", default=None, help="comma list of speaker ids or a category M/F/C/all (default all)")
    p.add_argument("--references", default=None, help="comma list of speaker ids or a category (default all)")
    p.add_argument("--criterion", default="mse", choices=["mse", "mae"], help="error measure")
    p.add_argument("--clamp", type=_positive, default=None, metavar="L",
                   help="clamp each pair kappa to [0, L] Hz before averaging (off unless given)")
    p.add_argument("--max-iterations", type=_count, default=4000, help="Nelder-Mead iteration cap per pair")
    p.add_argument("--out", default="-", help="report CSV ('-' for stdout)")
    p.set_defaults(func=cmd_estimate_classical)

    p = sub.add_parser("estimate-bayes", formatter_class=fmt,
                       help="hyperparameters by integrated likelihood, then Gibbs posterior means",
                       description="Estimate the prior hyperparameters by maximizing the integrated likelihood "
                                   "(unless supplied), then run the Gibbs sampler and report posterior means.")
    _add_data_options(p)
    p.add_argument("--subject", default="subject", help="subject speaker id")
    p.add_argument("--references", default=None, help="comma list of ids or a category (default: all others)")
    p.add_argument("--hyperparams", default=None, help="key=value file with a, b, c, d, theta1, theta2")
    p.add_argument("--skip-hyperopt", action="store_true", help="use --hyperparams as given")
    _add_bayes_options(p)
    _add_gibbs_options(p)
    p.add_argument("--trace", default=None, help="write the full chain to this CSV")
    p.add_argument("--out", default="-", help="report CSV ('-' for stdout)")
    p.set_defaults(func=cmd_estimate_bayes)

    p = sub.add_parser("hyperopt", formatter_class=fmt, help="maximize the integrated likelihood; optional axis scans",
                       description="Maximize the log integrated likelihood over the hyperparameter box and "
                                   "optionally scan it along chosen axes through the optimum.")
    _add_data_options(p)
    p.add_argument("--subject", default="subject", help="subject speaker id")
    p.add_argument("--references", default=None, help="comma list of ids or a category (default: all others)")
    p.add_argument("--hyperparams", default=None, help="start point (or scan centre with --no-fit)")
    p.add_argument("--no-fit", action="store_true", help="skip the maximization and use --hyperparams")
    _add_bayes_options(p)
    p.add_argument("--out", default=None, help="write the optimum as key=value text")
    p.add_argument("--scan", default=None, help="comma list of hyperparameters to scan, e.g. a,b,theta1")
    p.add_argument("--scan-points", type=_count, default=21, help="points per scanned axis")
    p.add_argument("--scan-out", default=None, help="scan CSV path (default scan.csv)")
    p.set_defaults(func=cmd_hyperopt)

    p = sub.add_parser("vowel-eval", formatter_class=fmt, help="vowel recognition with and without normalization",
                       description="Leave-one-speaker-out Mahalanobis vowel recognition. Gender-independent "
                                   "mode (gi) normalizes against all other speakers; gender-dependent mode (gd) "
                                   "runs all nine subject/reference category pairs.")
    p.add_argument("--pnb", default=None, help="converted Peterson-Barney table")
    p.add_argument("--hil", default=None, help="converted Hillenbrand table")
    p.add_argument("--methods", default=None,
                   help="comma list from " + ",".join(m.value for m in Method) + " (default all)")
    p.add_argument("--mode", default="gi", choices=["gi", "gd", "both"], help="experiment family")
    p.add_argument("--clamp", type=_positive, default=None, metavar="L",
                   help="kappa clamp bound in Hz, required by the clamped methods")
    p.add_argument("--fit-classes-on", default="raw", choices=["normalized", "raw"],
                   help="fit vowel classes on normalized or on raw reference tokens")
    p.add_argument("--iterations", type=_count, default=2000, help="Gibbs sweeps per speaker")
    p.add_argument("--burn-in", type=int, default=1500, help="discarded Gibbs sweeps")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", default="table.csv", help="method x database accuracy table CSV")
    p.add_argument("--plans-out", default=None, help="per-plan accuracy CSV (all plans run)")
    p.add_argument("--confusion-dir", default=None, help="directory for confusion-matrix CSVs")
    p.set_defaults(func=cmd_vowel_eval)

    p = sub.add_parser("warp", formatter_class=fmt, help="warp a power spectrum and resample it",
                       description="Warp the frequency axis of a two-column spectrum CSV, bend the band edge "
                                   "back to f_max above f0, and re-interpolate onto the input bins.")
    p.add_argument("--in", dest="input", required=True, help="input CSV freq_hz,amplitude")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--alpha", type=_positive, default=1.0, help="scale factor")
    p.add_argument("--kappa", type=float, default=0.0, help="shift factor (Hz)")
    p.add_argument("--f0", type=_positive, default=None, help="bend point in Hz (default 0.85 f_max)")
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("synth", formatter_class=fmt, help="generate a synthetic subject/reference table",
                       description="Draw reference speakers from the affine model around a subject template "
                                   "and write them as a formant table plus a key=value truth file.")
    p.add_argument("--out", required=True, help="output formant table CSV")
    p.add_argument("--truth", default=None, help="key=value file with the generating values")
    p.add_argument("--n", type=_count, default=20, help="number of reference speakers")
    p.add_argument("--kappa", type=float, default=150.0, help="true kappa (Hz)")
    p.add_argument("--sigma", type=float, default=30.0, help="noise sd (Hz)")
    p.add_argument("--alpha-mean", type=float, default=1.0, help="mean of the reference scales")
    p.add_argument("--alpha-sd", type=float, default=0.05, help="sd of the reference scales")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--template", default=None, help="formant table supplying the subject (default: built-in adult male)")
    p.add_argument("--template-speaker", default=None, help="speaker id in --template")
    p.add_argument("--hyperparams", default=None, help="key=value hyperparameters recorded in the truth file")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "repetition_policy", None) is not None:
        args.repetition_policy = RepetitionPolicy.parse(args.repetition_policy)
    try:
        return args.func(args, argv)
    except (CliError, OSError, ValueError, ArithmeticError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
