"""Command-line interface: extract, train, score, evaluate, aggregate-pc, inspect.

All randomness flows from --seed (falling back to the SSQP_SEED environment
variable, then 0), so every command is reproducible. Exit codes: 0 on
success, 1 on runtime errors, 2 on usage errors.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .baselines import psnr, ssim
from .boost import load_model, predict_ssqp, save_model, train_ssqp
from .evaluation import split_protocol
from .imgproc import load_image
from .manifest import (
    feature_rows_to_training_set,
    load_manifest,
    read_feature_csv,
    write_feature_csv,
)
from .pipeline import GROUPS, ExtractionConfig, extract_features
from .pcagg import aggregate, read_preference_csv, write_scores_csv
from .svr import SvrHyperparams
from . import report

_MODE_NAMES = {"full": "full_frame", "block": "block_average"}


def _add_seed(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="random seed (default: $SSQP_SEED or 0)")


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SSQP_SEED", "").strip()
    return int(env) if env else 0


def _add_extraction_flags(parser):
    parser.add_argument("--mode", choices=sorted(_MODE_NAMES), default="block",
                        help="feature extraction mode (default: block)")
    parser.add_argument("--svd-block", type=int, default=10, help="structural tile size")
    parser.add_argument("--hist-block", type=int, default=5, help="CoV block size")
    parser.add_argument("--kl-region", type=int, default=10,
                        help="region over which block-mode histograms are compared")
    parser.add_argument("--bins-full", type=int, default=64, help="histogram bins, full-frame mode")
    parser.add_argument("--bins-block", type=int, default=8, help="histogram bins, block mode")


def _extraction_config(args) -> ExtractionConfig:
    return ExtractionConfig(
        svd_block=args.svd_block, hist_block=args.hist_block,
        hist_kl_region=args.kl_region, n_bins_full=args.bins_full,
        n_bins_block=args.bins_block, mode=_MODE_NAMES[args.mode],
    )


def _add_hyper_flags(parser):
    parser.add_argument("--nu", type=float, default=0.5, help="support-vector fraction control")
    parser.add_argument("--c-grid", type=str, default=None,
                        help="comma-separated C values (default: powers of two)")
    parser.add_argument("--gamma-grid", type=str, default=None,
                        help="comma-separated gamma values (default: powers of two)")
    parser.add_argument("--folds", type=int, default=5, help="cross-validation folds")
    parser.add_argument("--stacking", choices=("in_sample", "out_of_fold"), default="in_sample",
                        help="how stage outputs feed the next stage")


def _hyperparams(args) -> SvrHyperparams:
    kwargs = {"nu": args.nu, "cv_folds": args.folds}
    if args.c_grid:
        kwargs["C_grid"] = tuple(float(v) for v in args.c_grid.split(","))
    if args.gamma_grid:
        kwargs["gamma_grid"] = tuple(float(v) for v in args.gamma_grid.split(","))
    return SvrHyperparams(**kwargs)


def _extract_row(payload):
    ref_path, test_path, cfg = payload
    ref = load_image(ref_path)
    test = load_image(test_path)
    return extract_features(ref, test, cfg)


def _extract_records(manifest, cfg, jobs):
    payloads = [(manifest.resolve(r.ref_path), manifest.resolve(r.test_path), cfg)
                for r in manifest.rows]
    results, errors = [None] * len(payloads), []
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = list(pool.map(_guarded_extract, payloads))
        for i, res in enumerate(futures):
            if isinstance(res, str):
                errors.append((i, res))
            else:
                results[i] = res
    else:
        for i, payload in enumerate(payloads):
            res = _guarded_extract(payload)
            if isinstance(res, str):
                errors.append((i, res))
            else:
                results[i] = res
    return results, errors


def _guarded_extract(payload):
    try:
        return _extract_row(payload)
    except Exception as exc:  # per-row errors are reported with their index
        return f"{type(exc).__name__}: {exc}"


def cmd_extract(args):
    manifest = load_manifest(args.manifest)
    cfg = _extraction_config(args)
    results, errors = _extract_records(manifest, cfg, args.jobs)
    records = [
        (row.content_id, row.test_path, row.mos, feats)
        for row, feats in zip(manifest.rows, results)
        if feats is not None
    ]
    write_feature_csv(args.output, records)
    for i, msg in errors:
        print(f"extract: row {i}: {msg}", file=sys.stderr)
    if errors:
        return 1
    print(f"wrote {len(records)} feature rows to {args.output}")
    return 0


def cmd_train(args):
    seed = _resolve_seed(args)
    manifest = load_manifest(args.manifest, require_mos=True)
    cfg = _extraction_config(args)
    results, errors = _extract_records(manifest, cfg, args.jobs)
    for i, msg in errors:
        print(f"train: row {i}: {msg}", file=sys.stderr)
    if errors:
        return 1
    records = [
        (row.content_id, row.test_path, row.mos, feats)
        for row, feats in zip(manifest.rows, results)
    ]
    data = feature_rows_to_training_set(records)
    model = train_ssqp(data, _hyperparams(args), seed=seed,
                       extraction_config=cfg, stacking=args.stacking)
    save_model(model, args.output)
    print(f"trained on {len(data)} rows ({len(data.content_ids())} contents); model -> {args.output}")
    return 0


def cmd_score(args):
    model = load_model(args.model)
    manifest = load_manifest(args.manifest)
    rows = []
    for i, row in enumerate(manifest.rows):
        ref = load_image(manifest.resolve(row.ref_path))
        test = load_image(manifest.resolve(row.test_path))
        rows.append({
            "content_id": row.content_id,
            "test_path": row.test_path,
            "mos": "" if row.mos is None else float(row.mos),
            "ssqp": float(predict_ssqp(model, ref, test)),
            "psnr": float(psnr(ref, test)),
            "ssim": float(ssim(ref, test)),
        })
    report.write_table_csv(args.output, ["content_id", "test_path", "mos", "ssqp", "psnr", "ssim"], rows)
    print(f"scored {len(rows)} pairs -> {args.output}")
    return 0


def cmd_evaluate(args):
    seed = _resolve_seed(args)
    if args.features:
        records = read_feature_csv(args.features)
    else:
        manifest = load_manifest(args.manifest, require_mos=True)
        cfg = _extraction_config(args)
        results, errors = _extract_records(manifest, cfg, args.jobs)
        for i, msg in errors:
            print(f"evaluate: row {i}: {msg}", file=sys.stderr)
        if errors:
            return 1
        records = [
            (row.content_id, row.test_path, row.mos, feats)
            for row, feats in zip(manifest.rows, results)
        ]
    data = feature_rows_to_training_set(records)
    result = split_protocol(
        data, _hyperparams(args), frac_train=args.train_frac,
        n_trials=args.trials, seed=seed, stacking=args.stacking, jobs=args.jobs,
    )
    report.write_report_csv(result, args.output)
    base = os.path.splitext(args.output)[0]
    report.render_eval_figure(result, base + ".png")
    if args.per_trial:
        report.write_trials_csv(result, args.per_trial)
    print(report.format_report_table(result))
    print(f"report -> {args.output}; figure -> {base + '.png'}")
    return 0


def cmd_aggregate_pc(args):
    ids, pref = read_preference_csv(args.preferences, n_assessors=args.assessors)
    scores = aggregate(pref, scale=args.scale)
    write_scores_csv(args.output, ids, scores)
    print(f"aggregated {pref.n_items} items from {pref.n_assessors} assessors -> {args.output}")
    return 0


def cmd_inspect(args):
    model = load_model(args.model)
    cfg = model.extraction_config
    print(f"schema_version: {model.schema_version}")
    print(f"stacking: {model.stacking}")
    print(f"extraction: mode={cfg.mode} svd_block={cfg.svd_block} hist_block={cfg.hist_block} "
          f"kl_region={cfg.hist_kl_region} bins={cfg.n_bins_full}/{cfg.n_bins_block}")
    print("stage I:")
    for g in GROUPS:
        m = model.stage1[g]
        cv = "n/a" if m.cv_mse is None else f"{m.cv_mse:.5g}"
        print(f"  {g:<8} dim={m.dim} n_sv={m.n_support:>4} C={m.c:g} gamma={m.gamma:g} "
              f"eps={m.epsilon:.4g} cv_mse={cv}")
    for name, m in (("stage II svd", model.stage2_svd), ("stage II hist", model.stage2_hist),
                    ("stage III", model.stage3)):
        cv = "n/a" if m.cv_mse is None else f"{m.cv_mse:.5g}"
        print(f"{name}: dim={m.dim} n_sv={m.n_support} C={m.c:g} gamma={m.gamma:g} cv_mse={cv}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ssqp",
        description="Full-reference image quality prediction and evaluation toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract feature rows from a manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True, help="feature CSV path")
    _add_extraction_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel workers over rows")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a model from a manifest with MOS labels")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True, help="model file path")
    _add_extraction_flags(p)
    _add_hyper_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel workers over rows")
    _add_seed(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score manifest pairs with a trained model")
    p.add_argument("model")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True, help="scores CSV path")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="run the repeated train/test split protocol")
    p.add_argument("manifest", nargs="?", help="manifest with MOS (or use --features)")
    p.add_argument("--features", help="precomputed feature CSV (skips extraction)")
    p.add_argument("-o", "--output", required=True, help="report CSV path (figure rendered alongside)")
    p.add_argument("--per-trial", help="optional per-trial CSV path")
    p.add_argument("--trials", type=int, default=50, help="number of train/test splits")
    p.add_argument("--train-frac", type=float, default=0.8, help="content fraction used for training")
    _add_extraction_flags(p)
    _add_hyper_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel workers over trials")
    _add_seed(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("aggregate-pc", help="aggregate pairwise-comparison counts into scores")
    p.add_argument("preferences", help="CSV of (item_i,item_j,wins_ij,wins_ji,ties)")
    p.add_argument("-o", "--output", required=True, help="scores CSV path")
    p.add_argument("--assessors", type=int, default=None, help="assessor count (default: inferred)")
    p.add_argument("--scale", type=float, default=None, help="score for a clean sweep (default: assessors)")
    p.set_defaults(func=cmd_aggregate_pc)

    p = sub.add_parser("inspect", help="describe a trained model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "evaluate" and not args.manifest and not args.features:
        parser.error("evaluate needs a manifest or --features")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"ssqp {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
