"""Command-line interface: ``sasvcal <subcommand> ...``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
Errors print one line ``error: <ErrorClass>: <detail>`` to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

import numpy as np

from . import auxscoring, calibration, metrics, scoreio, synth
from .decision import CostModel, PriorModel, conditional_reject_priors, effective_priors, sasv_llr_array
from .errors import DataError, DuplicateTrialId, MaxIterations, ParseError, SasvError

log = logging.getLogger("sasvcal")

PRESETS = {"asvspoof5": CostModel.asvspoof5()}


def _costs(args, fallback=None) -> CostModel:
    if args.costs is not None and args.preset is not None:
        raise DataError("give either --costs or --preset, not both")
    if args.costs is not None:
        return CostModel(*args.costs)
    if args.preset is not None:
        return PRESETS[args.preset]
    return fallback if fallback is not None else CostModel()


def _add_cost_args(p, required_priors=True):
    p.add_argument("--costs", nargs=4, type=float, metavar=("C_MISS", "C_FA_IMP", "C_FA_SPOOF", "C_FA_SPOOF_IMP"),
                   help="decision costs (default: all 1)")
    p.add_argument("--preset", choices=sorted(PRESETS),
                   help="named cost preset; asvspoof5 = miss 1, false accepts 10")
    p.add_argument("--priors", nargs=4, type=float, required=required_priors,
                   metavar=("P_BT", "P_BN", "P_ST", "P_SN"), help="joint class priors")


def _params_items(res: calibration.CalibrationResult, costs: CostModel, priors: PriorModel):
    p = res.params
    fmt = scoreio.format_score
    return [
        ("a0", fmt(p.a0)), ("a1", fmt(p.a1)), ("c0", fmt(p.c0)), ("c1", fmt(p.c1)),
        ("final_objective", fmt(res.final_objective)),
        ("initial_objective", fmt(res.initial_objective)),
        ("iterations", str(res.iterations)),
        ("converged", str(res.converged).lower()),
        ("gradient_norm", fmt(res.gradient_norm)),
        ("costs", " ".join(fmt(c) for c in costs.as_tuple())),
        ("priors", " ".join(fmt(x) for x in priors.as_tuple())),
    ]


def cmd_calibrate(args):
    costs = _costs(args)
    priors = PriorModel(*args.priors)
    key = scoreio.parse_key_file(args.key)
    joined = scoreio.join_trials(key, scoreio.parse_score_file(args.cm), scoreio.parse_score_file(args.asv))
    data = calibration.CalibrationDataset.from_arrays(joined.cm, joined.asv, joined.classes)
    settings = calibration.OptimizerSettings(gtol=args.gtol, max_iter=args.max_iter)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MaxIterations)
        res = calibration.fit_calibration(data, costs, priors, settings)
    if not res.converged:
        log.warning("calibration did not converge (%s); gradient norm %.3g", res.message, res.gradient_norm)
    log.info("calibrated in %d iterations: objective %.6g -> %.6g",
             res.iterations, res.initial_objective, res.final_objective)
    scoreio.write_key_value(args.out, _params_items(res, costs, priors))
    return 0


def _load_params(path):
    kv = scoreio.read_key_value(path)
    try:
        params = calibration.CalibrationParams(*(float(kv[k]) for k in ("a0", "a1", "c0", "c1")))
    except KeyError as exc:
        raise DataError(f"{path}: missing parameter {exc.args[0]}") from None
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    costs = CostModel(*(float(x) for x in kv["costs"].split())) if "costs" in kv else None
    return params, costs


def cmd_compose(args):
    priors = PriorModel(*args.priors)
    params, stored_costs = (None, None)
    if args.params is not None:
        params, stored_costs = _load_params(args.params)
    costs = _costs(args, fallback=stored_costs)
    ids, cm, asv, _, _ = scoreio.join_scores(scoreio.parse_score_file(args.cm), scoreio.parse_score_file(args.asv))
    cond = conditional_reject_priors(effective_priors(costs, priors))
    if params is None:
        llr = sasv_llr_array(cm, asv, cond)
    else:
        llr = calibration.corrected_sasv_llr_array(cm, asv, params, cond)
    scoreio.write_score_file(args.out, ids, llr)
    return 0


def cmd_evaluate(args):
    costs = _costs(args)
    priors = PriorModel(*args.priors)
    key = scoreio.parse_key_file(args.key).as_dict()
    scores = scoreio.parse_score_file(args.scores).as_dict()
    ids = sorted(t for t in key if t in scores)
    missing = len(key) - len(ids)
    if missing:
        log.warning("evaluate: %d keyed trials have no score", missing)
    if not ids:
        raise DataError("no keyed trial has a score")
    x, n_clamped = scoreio.clamp_scores(np.array([scores[t] for t in ids], dtype=float))
    if n_clamped:
        log.warning("evaluate: clamped %d scores", n_clamped)
    trials = metrics.ScoredTrials.from_classes(x, [key[t] for t in ids])
    report = metrics.evaluate(trials, metrics.ADcfConfig(costs, priors), binary_cm=args.binary_cm,
                              normalize_a_dcf=args.normalize_a_dcf)
    print(report.table())
    print()
    for line in report.as_lines():
        print(line)
    if args.out:
        scoreio.write_key_value(args.out, [tuple(line.split("=", 1)) for line in report.as_lines()])
    return 0


def cmd_simulate(args):
    cfg = synth.SynthConfig(
        seed=args.seed,
        n_per_class=tuple(args.n_per_class) if len(args.n_per_class) == 3 else args.n_per_class[0],
        cm_separation=args.cm_separation,
        asv_separation=args.asv_separation,
        cm_corruption=tuple(args.cm_corruption),
        asv_corruption=tuple(args.asv_corruption),
    )
    sim = synth.generate(cfg)
    t = sim.trials
    scoreio.ensure_dir(args.outdir)
    path = lambda name: os.path.join(args.outdir, name)  # noqa: E731
    scoreio.write_key_file(path("key.tsv"), t.trial_ids, t.classes)
    scoreio.write_score_file(path("cm.tsv"), t.trial_ids, t.cm)
    scoreio.write_score_file(path("asv.tsv"), t.trial_ids, t.asv)
    with open(path("truth.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# seed={cfg.seed} n_per_class={','.join(map(str, cfg.n_per_class))} "
                 f"cm_separation={cfg.cm_separation!r} asv_separation={cfg.asv_separation!r} "
                 f"cm_corruption={cfg.cm_corruption[0]!r},{cfg.cm_corruption[1]!r} "
                 f"asv_corruption={cfg.asv_corruption[0]!r},{cfg.asv_corruption[1]!r}\n")
        fh.write("# trial_id\ttrue_llr_cm\ttrue_llr_asv\n")
        fmt = scoreio.format_score
        for tid, a, b in zip(t.trial_ids, sim.true_llr_cm, sim.true_llr_asv):
            fh.write(f"{tid}\t{fmt(a)}\t{fmt(b)}\n")
    return 0


def cmd_fuse(args):
    systems = [scoreio.parse_score_file(p) for p in args.scores]
    fused = auxscoring.minmax_fuse(systems)
    scoreio.write_score_file(args.out, fused.trial_ids, fused.scores)
    return 0


def _read_likelihood_table(path):
    ids, rows, width = [], [], None
    seen = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    for no, line in enumerate(lines, start=1):
        if line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise ParseError(no, "expected trial id and likelihood columns", path)
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ParseError(no, f"expected {width} columns, got {len(fields)}", path)
        if fields[0] in seen:
            raise DuplicateTrialId(fields[0], no)
        try:
            rows.append([scoreio.parse_decimal(f) for f in fields[1:]])
        except ValueError as exc:
            raise ParseError(no, str(exc), path) from None
        seen.add(fields[0])
        ids.append(fields[0])
    return ids, rows


def _read_priors(path):
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                vals.append(scoreio.parse_decimal(line))
            except ValueError as exc:
                raise ParseError(no, str(exc), path) from None
    return vals


def cmd_aggregate(args):
    scheme = auxscoring.LabelScheme.named(args.scheme, args.n_speakers, args.n_spoof_types)
    priors = _read_priors(args.class_priors) if args.class_priors else None
    ids, rows = _read_likelihood_table(args.likelihoods)
    llrs = [auxscoring.aggregate_group_llr(r, scheme, priors) for r in rows]
    scoreio.write_score_file(args.out, ids, llrs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sasvcal", description="SASV LLR composition, calibration and evaluation")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit joint affine calibration of CM and ASV scores")
    p.add_argument("--key", required=True)
    p.add_argument("--cm", required=True)
    p.add_argument("--asv", required=True)
    _add_cost_args(p)
    p.add_argument("--gtol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--out", required=True, help="parameter file (key=value)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("compose", help="compose CM and ASV scores into SASV LLRs")
    p.add_argument("--cm", required=True)
    p.add_argument("--asv", required=True)
    p.add_argument("--params", help="calibration parameter file; omit for the uncalibrated composition")
    _add_cost_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("evaluate", help="compute EER, minDCF, actDCF, Cllr and min a-DCF")
    p.add_argument("--key", required=True)
    p.add_argument("--scores", required=True)
    _add_cost_args(p)
    p.add_argument("--binary-cm", action="store_true", help="evaluate bona fide vs spoof")
    p.add_argument("--normalize-a-dcf", action="store_true")
    p.add_argument("--out", help="also write the key=value report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", help="write a synthetic key, CM/ASV score files and ground truth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-per-class", type=int, nargs="+", default=[1000], metavar="N",
                   help="one count for all classes, or three for BT BN ST")
    p.add_argument("--cm-separation", type=float, default=3.0)
    p.add_argument("--asv-separation", type=float, default=4.0)
    p.add_argument("--cm-corruption", type=float, nargs=2, default=[1.0, 0.0], metavar=("SCALE", "OFFSET"))
    p.add_argument("--asv-corruption", type=float, nargs=2, default=[1.0, 0.0], metavar=("SCALE", "OFFSET"))
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fuse", help="equal-weight fusion of min-max normalized score files")
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("aggregate", help="bona fide vs spoof LLR from per-class likelihoods")
    p.add_argument("--likelihoods", required=True, help="TSV: trial_id then K likelihood columns")
    p.add_argument("--scheme", required=True, choices=auxscoring.SCHEMES)
    p.add_argument("--n-speakers", type=int, default=400)
    p.add_argument("--n-spoof-types", type=int, default=8)
    p.add_argument("--class-priors", help="one prior per line, K lines")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING)
    if args.command == "simulate" and len(args.n_per_class) not in (1, 3):
        ap.error("--n-per-class takes one or three counts")
    try:
        return args.func(args)
    except SasvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: FileNotFoundError: {exc.filename}", file=sys.stderr)
        return 3
    except UnicodeDecodeError as exc:
        print(f"error: ParseError: not UTF-8: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
