"""Command line entry point: ``radiorepeat {extract,compare,phantom,report}``.

Exit codes: 0 success, 2 usage or input error, 3 computation error. Errors
are reported on stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import ComputationError, InputError, RadiomicsError
from .features import extract_features
from .phantom import PhantomSpec, generate_pair, write_pair
from .quantization import DEFAULT_WIDTH, QuantizationSpec
from .report import (build_manifest, compare_tables, load_report, read_table, render_plots,
                     sha256_file, write_manifest, write_report, write_table)
from .volume_io import load_mask, load_volume

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 2, 3
MODALITY_UNIT = {"pet": "SUV", "ct": "HU"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", message)
        sys.exit(EXIT_INPUT)


def _emit_error(kind: str, message: str, path: str | None = None) -> None:
    doc = {"error": kind, "message": message}
    if path is not None:
        doc["path"] = path
    print(json.dumps(doc), file=sys.stderr)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("RADIOMICS_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


def _mirror_paths(out: str) -> tuple[Path, Path]:
    out = Path(out)
    csv_path = out.with_suffix(".csv")
    return csv_path, out.with_suffix(".manifest.json")


def cmd_extract(args) -> int:
    if len(args.image) != len(args.mask):
        raise InputError("give one --mask per --image")
    ids = args.id or [Path(p).name.split(".")[0] for p in args.image]
    if len(ids) != len(args.image) or len(set(ids)) != len(ids):
        raise InputError("lesion ids must be unique, one per --image")
    unit = MODALITY_UNIT[args.modality]
    quant_text = args.quant or ["bins:64", "width"]
    specs = []
    for text in quant_text:
        spec = QuantizationSpec.parse(text, unit)
        if spec not in specs:
            specs.append(spec)

    def one(k):
        vol = load_volume(args.image[k])
        mask = load_mask(args.mask[k])
        return extract_features(vol, mask, specs, mask_id=ids[k])

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        vectors = list(pool.map(one, range(len(ids))))

    columns = ["lesion_id"] + list(vectors[0].values)
    rows = [{"lesion_id": lid, **fv.values} for lid, fv in zip(ids, vectors)]
    csv_path, manifest_path = _mirror_paths(args.out)
    manifest, digest = build_manifest("extract", [*args.image, *args.mask],
                                      [s.tag for s in specs], ids)
    write_manifest(manifest, manifest_path)
    write_table(rows, columns, csv_path, digest)
    return EXIT_OK


def cmd_compare(args) -> int:
    test_cols, test_rows = read_table(args.test)
    retest_cols, retest_rows = read_table(args.retest)
    features = [c for c in test_cols if c != "lesion_id" and c in retest_cols]
    report = compare_tables(test_rows, retest_rows, features, voi_feature=args.voi_feature,
                            voi_rep_sd=args.voi_rep_sd)
    csv_path, manifest_path = _mirror_paths(args.out)
    manifest, digest = build_manifest("compare", [args.test, args.retest],
                                      lesion_ids=[r["lesion_id"] for r in test_rows])
    write_manifest(manifest, manifest_path)
    write_report(report, csv_path, digest)
    if args.plot:
        render_plots(report, args.plot, args.plot_dir or csv_path.parent)
    return EXIT_OK


def cmd_report(args) -> int:
    report = load_report(args.report)
    features = args.plot or [r["feature_id"] for r in report.rows]
    render_plots(report, features, args.out_dir)
    return EXIT_OK


def cmd_phantom(args) -> int:
    if args.spec:
        base = PhantomSpec.from_json(Path(args.spec).read_text())
    else:
        base = PhantomSpec()
    overrides = {k: v for k, v in {
        "dims": tuple(args.dims) if args.dims else None,
        "spacing": tuple(args.spacing) if args.spacing else None,
        "shape": args.shape, "radius_vox": args.radius, "base_intensity": args.base,
        "texture_scale": args.texture_scale, "texture_contrast": args.texture_contrast,
        "noise_sd": args.noise_sd, "seed": args.seed, "unit": args.unit,
    }.items() if v is not None}
    base = replace(base, **overrides)
    out_dir = Path(args.out_dir)
    files = []
    for k in range(args.count):
        spec = replace(base, seed=base.seed + k)
        prefix = "phantom" if args.count == 1 else f"lesion{k:03d}"
        paths = write_pair(generate_pair(spec), out_dir, prefix, args.format)
        files.extend(p for key, p in paths.items() if key != "spec")
    manifest, _ = build_manifest("phantom", files)
    write_manifest(manifest, out_dir / "phantom_manifest.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="radiorepeat", description="Radiomics extraction and test-retest repeatability.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="compute features for one or more lesions")
    p.add_argument("--image", action="append", required=True)
    p.add_argument("--mask", action="append", required=True)
    p.add_argument("--id", action="append", help="lesion id per image (default: file stem)")
    p.add_argument("--quant", action="append", help="bins:<B> or width:<W> (repeatable)")
    p.add_argument("--modality", choices=sorted(MODALITY_UNIT), default="pet",
                   help=f"selects the default bin width {DEFAULT_WIDTH}")
    p.add_argument("--out", required=True, help="output table (.csv; a .json mirror is written too)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("compare", help="test-retest repeatability report")
    p.add_argument("--test", required=True)
    p.add_argument("--retest", required=True)
    p.add_argument("--voi-feature", default="shape.volume_ml")
    p.add_argument("--voi-rep-sd", type=float, help="override the volume repeatability SD (%%)")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="append", help="feature id to plot (repeatable)")
    p.add_argument("--plot-dir")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="re-render Bland-Altman SVGs from a report JSON")
    p.add_argument("--report", required=True)
    p.add_argument("--plot", action="append")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("phantom", help="generate synthetic test-retest lesions")
    p.add_argument("--spec", help="PhantomSpec JSON; flags override its fields")
    p.add_argument("--dims", type=int, nargs=3)
    p.add_argument("--spacing", type=float, nargs=3)
    p.add_argument("--shape", choices=["ball", "ellipsoid", "blob"])
    p.add_argument("--radius", type=float)
    p.add_argument("--base", type=float)
    p.add_argument("--texture-scale", type=float)
    p.add_argument("--texture-contrast", type=float)
    p.add_argument("--noise-sd", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--unit", choices=["SUV", "HU", "arbitrary"])
    p.add_argument("--count", type=int, default=1, help="lesions to generate (seeds seed, seed+1, ...)")
    p.add_argument("--format", choices=["nrrd", "raw_json"], default="nrrd")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_phantom)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _emit_error("file_not_found", str(exc), str(exc.filename) if exc.filename else None)
        return EXIT_INPUT
    except InputError as exc:
        _emit_error(type(exc).__name__, str(exc), exc.path)
        return EXIT_INPUT
    except ComputationError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_COMPUTE
    except RadiomicsError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
