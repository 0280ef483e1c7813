"""Command-line entry point: curve, survey, classify, conventions, report.

Exit codes: 0 success, 2 usage error, 3 data/validation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .io import (
    canonical_json,
    classification_csv,
    curve_csv,
    histogram_csv,
    payload_hash,
    read_curve_csv,
    read_histogram_csv,
    read_match_log,
    write_match_log,
)
from .kernels import BACKEND, get_backend
from .net import Conventions, DamageSpec, ValidationError, apply_damage, parse_bipolar, train
from .recall import CUE_VARIANTS, recall_curve, render5
from .survey import LesionSurvey, SurveyConfig, cut_set_for, histogram_stats, run_survey, series_stats
from .svg import histogram_svg, recall_curves_svg
from .tot import classify_survey, convention_search, intact_equivalent_counts

EXIT_USAGE = 2
EXIT_DATA = 3

SURVEY_DEFAULTS = {
    "n": 9,
    "nd": 10,
    "trials": 100_000,
    "series": 10,
    "seed": 0,
    "tie_policy": "strict_minus",
    "diagonal": "keep",
    "target": "auto-nk4",
    "threads": 1,
    "reference": None,
    "chunk": 10_000,
}


class UsageError(Exception):
    pass


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; keys are flag names with '-' or '_'."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _resolve(args, defaults: dict) -> dict:
    """Flags override the config file, which overrides defaults."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        file_vals = read_config_file(args.config)
        unknown = set(file_vals) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for k, v in file_vals.items():
            cfg[k] = type(defaults[k])(v) if isinstance(defaults[k], int) else v
    for k in defaults:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _conventions(args) -> Conventions:
    return Conventions(args.diagonal or "keep", args.tie_policy or "strict_minus")


def _parse_indices(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"malformed index list {text!r}") from None


def _parse_links(text: str) -> DamageSpec:
    try:
        return DamageSpec.from_line(text)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


# -- curve ------------------------------------------------------------------

def cmd_curve(args) -> int:
    n = args.n
    reference = parse_bipolar(args.reference) if args.reference else [1] * n
    if len(reference) != n:
        raise UsageError(f"reference has length {len(reference)}, expected {n}")
    net = train(reference, _conventions(args))
    chosen = [x is not None for x in (args.delete_inputs, args.cut_links, args.sample_cuts)]
    if sum(chosen) > 1:
        raise UsageError("give at most one of --delete-inputs, --cut-links, --sample-cuts")
    if args.delete_inputs is not None:
        spec = DamageSpec.deletions(_parse_indices(args.delete_inputs))
    elif args.cut_links is not None:
        spec = _parse_links(args.cut_links)
    elif args.sample_cuts is not None:
        spec = DamageSpec.cuts(cut_set_for(args.seed, 0, 0, n, args.sample_cuts))
    else:
        spec = DamageSpec()
    curve = recall_curve(apply_damage(net, spec), args.cue)
    _write(args.out, curve_csv(curve))
    if args.svg:
        _write(args.svg, recall_curves_svg([curve.points], [spec.to_line() or "intact"]))
    return 0


# -- survey -----------------------------------------------------------------

def survey_summary(survey: LesionSurvey, classification=None) -> dict:
    cfg = survey.config
    stats = histogram_stats(survey)
    intact_bin = next((b for b in stats if b.key == survey.intact_key), None)
    ie_counts = intact_equivalent_counts(survey)
    ie_mean, ie_std = series_stats(ie_counts, cfg.trials_per_series)
    payload = survey.payload()
    summary = {
        "distinct_pfr_values": len(stats),
        "published_distinct_pfr_values": 66 if (cfg.n, cfg.n_d) == (9, 10) else None,
        "intact_pfr": f"{survey.intact_key}/{1 << cfg.n}",
        "intact_pfr_bin_freq_pct": 100 * float(intact_bin.mean) if intact_bin else 0.0,
        "intact_equivalent_freq_pct": ie_mean,
        "intact_equivalent_freq_std_pct": ie_std,
        "target_pfr": (f"{survey.target_key}/{1 << cfg.n}"
                       if survey.target_key is not None and survey.target_key >= 0 else None),
        "target_pfr_float": (render5(Fraction(survey.target_key, 1 << cfg.n))
                             if survey.target_key is not None and survey.target_key >= 0 else None),
        "target_matches": len(survey.matches_for(survey.target_key)) if survey.target_key is not None else 0,
    }
    out = {
        "manifest": dict(survey.manifest, payload_hash=payload_hash(payload)),
        "summary": summary,
        "classes": classification_block(classification) if classification else None,
        "payload": payload,
    }
    return out


def classification_block(cl) -> dict:
    return {
        "target_pfr": cl.target_key,
        "matched_total": cl.matched_total,
        "tot_signature_unique": cl.tot_signature.unique,
        "tot_freq_mean_pct": cl.tot_freq_mean_pct,
        "tot_freq_std_pct": cl.tot_freq_std_pct,
        "classes": [
            {
                "class_id": i,
                "label": c.label,
                "members": len(c.member_sets),
                "occurrences": c.multiplicity,
                "freq_mean_pct": c.freq_mean_pct,
                "freq_std_pct": c.freq_std_pct,
                "curve": [f"{p.numerator}/{p.denominator}" for p in c.curve.points],
            }
            for i, c in enumerate(cl.classes)
        ],
        "ratio": cl.ratio.as_dict(),
    }


def cmd_survey(args) -> int:
    v = _resolve(args, SURVEY_DEFAULTS)
    reference = tuple(parse_bipolar(v["reference"])) if v["reference"] else None
    target = None if str(v["target"]).lower() in ("none", "") else str(v["target"])
    config = SurveyConfig(
        n=int(v["n"]), n_d=int(v["nd"]), trials_per_series=int(v["trials"]),
        series=int(v["series"]), seed=int(v["seed"]),
        conventions=Conventions(v["diagonal"], v["tie_policy"]),
        reference=reference, target=target,
    )
    backend = get_backend(args.backend) if args.backend else None

    def progress(done, total):
        if not args.quiet and (done == total or done % max(1, total // 20) == 0):
            print(f"[survey] {done}/{total} chunks", file=sys.stderr)

    survey = run_survey(config, workers=int(v["threads"]), chunk=int(v["chunk"]),
                        backend=backend, progress=progress)
    classification = classify_survey(survey) if target else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "survey.json").write_text(canonical_json(survey_summary(survey, classification)))
    (out / "histogram.csv").write_text(histogram_csv(histogram_stats(survey), config.n, config.series))
    if target and survey.target_key >= 0:
        write_match_log(out / "matches.log", survey, survey.target_key)
    if classification:
        (out / "classification.csv").write_text(classification_csv(classification.classes))
    s = json.loads((out / "survey.json").read_text())["summary"]
    print(f"distinct P_FR values: {s['distinct_pfr_values']}  "
          f"target matches: {s['target_matches']}  "
          f"trials: {survey.total_trials}  "
          f"C({config.n * config.n},{config.n_d}) = {survey.manifest['cut_set_space']['exact_count']}")
    return 0


# -- classify ---------------------------------------------------------------

def load_survey(path: str) -> LesionSurvey:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read survey file {path}: {exc}") from exc
    return LesionSurvey.from_dict(data)


def cmd_classify(args) -> int:
    survey = load_survey(args.survey)
    if survey.target_key is None:
        raise ValidationError(
            "this survey was run without --target, so no matched-set log exists; "
            "re-run `survey` with --target auto-nk4 (or an explicit fraction)"
        )
    log_sets = None
    if args.matches:
        digest, log_sets = read_match_log(Path(args.matches))
        if digest != survey.config.config_hash():
            raise ValidationError("matched-set log belongs to a different survey configuration")
    cl = classify_survey(survey, n_k=args.nk, neuron_loss_pct=args.neuron_loss_pct, log_sets=log_sets)
    block = classification_block(cl)
    block["manifest"] = survey.manifest
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "classification.csv").write_text(classification_csv(cl.classes))
    (out / "classification.json").write_text(canonical_json(block))
    r = cl.ratio
    print(f"classes: {len(cl.classes)}  tot_match freq: {cl.tot_freq_mean_pct:.6f} +- {cl.tot_freq_std_pct:.6f} %")
    if r.defined:
        print(f"measured ratio: {r.ratio:.1f} +- {r.ratio_std:.1f}")
    else:
        print(f"measured ratio: {r.note}")
    print(f"ratio from published pair 4.8 / 7.0e-3: {r.published_pair_ratio:.0f} "
          f"(rel. err {r.published_pair_rel_err:.2f}); published quoted ratio: "
          f"({r.published_quoted_ratio[0]:.0f} +- {r.published_quoted_ratio[1]:.0f})"
          + ("  [published values mutually inconsistent]" if r.published_inconsistent else ""))
    return 0


# -- conventions ------------------------------------------------------------

def cmd_conventions(args) -> int:
    reference = parse_bipolar(args.reference) if args.reference else None
    report = convention_search(args.target, args.n, args.nk, args.m, reference)
    lines = ["diagonal,tie_policy,cue,p_num,p_den,p_float,unique,match"]
    for r in report.rows:
        lines.append(",".join([
            r.conventions.diagonal_policy, r.conventions.tie_policy, r.cue,
            str(r.raw[0]), str(r.raw[1]), r.rendered, str(r.unique).lower(), str(r.match).lower(),
        ]))
    text = "\n".join(lines) + "\n"
    _write(args.out, text)
    print(report.summary(), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    if args.manifest:
        _write(args.manifest, canonical_json({
            "target": report.target, "n": report.n, "n_k": report.n_k, "m": report.m,
            "matches": [
                {"diagonal_policy": r.conventions.diagonal_policy,
                 "tie_policy": r.conventions.tie_policy, "cue": r.cue}
                for r in report.matches
            ],
            "rows": [
                {"diagonal_policy": r.conventions.diagonal_policy,
                 "tie_policy": r.conventions.tie_policy, "cue": r.cue,
                 "p_num": r.raw[0], "p_den": r.raw[1], "rendered": r.rendered}
                for r in report.rows
            ],
            "discrepancy_mode": not report.matches,
            "summary": report.summary(),
            "tool_version": f"lesionnet {__version__}",
        }))
    return 0


# -- report -----------------------------------------------------------------

def cmd_report(args) -> int:
    if not args.curves and not args.histogram:
        raise UsageError("report needs --curves and/or --histogram")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.curves:
            curves = [read_curve_csv(Path(p).read_text()) for p in args.curves]
            labels = args.labels.split(",") if args.labels else [Path(p).stem for p in args.curves]
            (out / "recall_curves.svg").write_text(
                recall_curves_svg([c.points for c in curves], labels))
        if args.histogram:
            rows = read_histogram_csv(Path(args.histogram).read_text())
            (out / "pfr_histogram.svg").write_text(
                histogram_svg([(r["pfr_float"], r["freq_mean_pct"]) for r in rows]))
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    return 0


# -- parser -----------------------------------------------------------------

def _add_net_flags(p, survey=False):
    d = None if survey else "keep"
    t = None if survey else "strict_minus"
    p.add_argument("--n", type=int, default=None if survey else 9, help="neurons per layer")
    p.add_argument("--reference", help="reference pattern, e.g. '+-+' or '1,-1,1' (default all +1)")
    p.add_argument("--diagonal", choices=["keep", "zero"], default=d)
    p.add_argument("--tie-policy", choices=["strict_minus", "lenient_plus", "tie_fails"], default=t)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lesionnet", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"lesionnet {__version__} ({BACKEND})")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="exact recall curve of one (damaged) net")
    _add_net_flags(p)
    p.add_argument("--delete-inputs", help="comma-separated input neurons to delete")
    p.add_argument("--cut-links", help="semicolon-separated 'i,j' links to cut")
    p.add_argument("--sample-cuts", type=int, help="cut this many random links (see --seed)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cue", choices=CUE_VARIANTS, default="averaged")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--svg", help="also write an SVG plot here")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("survey", help="Monte Carlo survey over random cut sets")
    _add_net_flags(p, survey=True)
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--nd", type=int, help="cut links per trial")
    p.add_argument("--trials", type=int, help="trials per series")
    p.add_argument("--series", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--target", help="'auto-nk4' (default), an exact fraction like 146/512, or 'none'")
    p.add_argument("--threads", type=int, help="worker threads (env LESIONNET_MAX_WORKERS caps)")
    p.add_argument("--chunk", type=int, help="trials per work unit")
    p.add_argument("--backend", choices=["cython", "python"])
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("classify", help="group target-P_FR cut sets into signature classes")
    p.add_argument("--survey", required=True, help="survey.json written by `survey`")
    p.add_argument("--matches", help="matched-set log to cross-check")
    p.add_argument("--nk", type=int, default=4, help="deleted inputs defining the TOT signature")
    p.add_argument("--neuron-loss-pct", type=float, default=4.8)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("conventions", help="sweep decoding conventions against a printed P")
    p.add_argument("--target", default="0.28516")
    p.add_argument("--n", type=int, default=9)
    p.add_argument("--nk", type=int, default=4)
    p.add_argument("--m", type=int, default=0, help="cue size (0 = free recall)")
    p.add_argument("--reference")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--manifest", help="write the match set as JSON here")
    p.set_defaults(func=cmd_conventions)

    p = sub.add_parser("report", help="SVG figures from curve/histogram CSVs")
    p.add_argument("--curves", nargs="*", help="curve CSV files")
    p.add_argument("--labels", help="comma-separated legend labels")
    p.add_argument("--histogram", help="histogram CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lesionnet {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"lesionnet {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
