"""Command-line surface. Thin adapters only; numeric logic lives in modules.

Exit codes: 0 success, 1 usage error (usage text on stderr), 2 runtime
error. Numeric output is printed with 9 significant digits. ``--json``
switches machine-readable output on; PSNR of identical images is reported
with the string sentinel "infinite".
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import metrics as metrics_mod
from .camera import DistortionCoefficients, Model, PrincipalPoint, half_diagonal
from .errors import OrdcalError
from .imageops import load_png, save_png
from .ordinal import (
    OrdinalDistortion,
    compute_ordinal,
    ddm,
    ddm_to_csv,
    ddm_to_png16,
    ordinal_to_coefficients,
)
from .rectify import ScalePolicy, rectify_image
from .synth import (
    CoefficientRanges,
    GenerateConfig,
    default_ranges,
    distort_image,
    generate_dataset,
    read_manifest,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise UsageError(message)


def fmt9(x: float) -> str:
    return f"{x:.9g}"


def _num(x: float):
    """JSON-safe numeric value at the printed precision."""
    if math.isinf(x):
        return "infinite"
    return float(fmt9(x))


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _parse_center(text: str) -> PrincipalPoint:
    x, y = _parse_floats(text)
    return PrincipalPoint(x, y)


def _parse_intervals(text: str) -> tuple[tuple[float, float], ...]:
    pairs = []
    for chunk in text.split(","):
        lo, _, hi = chunk.partition(":")
        pairs.append((float(lo), float(hi)))
    return tuple(pairs)


def _coefficients(args, r_norm_default: float) -> DistortionCoefficients:
    r_norm = args.r_norm if args.r_norm is not None else r_norm_default
    return DistortionCoefficients(Model(args.model), _parse_floats(args.k), r_norm)


def _emit(args, payload: dict, table_rows: list[tuple[str, str]]) -> None:
    if args.json:
        print(json.dumps(payload))
    else:
        width = max(len(name) for name, _ in table_rows)
        for name, value in table_rows:
            print(f"{name.ljust(width)}  {value}")


def _add_common(parser):
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--config", type=Path, default=None,
                        help="key=value file providing flag defaults")


def _load_config(path: Path) -> dict:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Fill flags the user did not pass from the config file (flags win)."""
    if getattr(args, "config", None) is None:
        return
    values = _load_config(args.config)
    for action in parser._actions:
        if action.dest in values and getattr(args, action.dest) == action.default:
            raw = values[action.dest]
            if isinstance(action, argparse._StoreTrueAction):
                parsed = raw.lower() in {"1", "true", "yes", "on"}
            elif action.type is not None:
                parsed = action.type(raw)
            else:
                parsed = raw
            setattr(args, action.dest, parsed)


def _build_parser() -> tuple[_Parser, dict]:
    parser = _Parser(prog="ordcal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    commands = {}

    p = sub.add_parser("generate",
                       help="synthesize a labeled distorted-image dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--train", type=int, default=500)
    p.add_argument("--val", type=int, default=100)
    p.add_argument("--test", type=int, default=100)
    p.add_argument("--count", type=int, default=None,
                   help="shorthand: train count with val/test 0")
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", default="division", choices=[m.value for m in Model])
    p.add_argument("--ranges", type=str, default=None,
                   help="per-coefficient lo:hi pairs, comma separated")
    p.add_argument("--delta-lo", type=float, default=1.05)
    p.add_argument("--delta-hi", type=float, default=3.0)
    p.add_argument("--scene-kinds", type=str, default="checker,lines,smooth")
    p.add_argument("--source-dir", type=Path, default=None)
    p.add_argument("--jitter", type=float, default=0.0,
                   help="principal point jitter as a fraction of the diagonal")
    _add_common(p)
    commands["generate"] = (p, _cmd_generate)

    p = sub.add_parser("distort", help="apply a radial model")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--k", type=str, required=True)
    p.add_argument("--model", default="division", choices=[m.value for m in Model])
    p.add_argument("--r-norm", type=float, default=None)
    p.add_argument("--center", type=str, default=None)
    _add_common(p)
    commands["distort"] = (p, _cmd_distort)

    p = sub.add_parser("rectify", help="correct a distorted image")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--k", type=str, default=None)
    p.add_argument("--levels", type=str, default=None, help="ordinal levels")
    p.add_argument("--radii", type=str, default=None, help="normalized sample radii")
    p.add_argument("--model", default="division", choices=[m.value for m in Model])
    p.add_argument("--r-norm", type=float, default=None)
    p.add_argument("--center", type=str, default=None)
    p.add_argument("--scale-policy", default="same-size",
                   choices=[s.value for s in ScalePolicy])
    _add_common(p)
    commands["rectify"] = (p, _cmd_rectify)

    p = sub.add_parser("convert",
                       help="ordinal levels <-> model coefficients")
    p.add_argument("--levels", type=str, default=None)
    p.add_argument("--k", type=str, default=None)
    p.add_argument("--radii", type=str, required=True)
    p.add_argument("--model", default="division", choices=[m.value for m in Model])
    p.add_argument("--r-norm", type=float, default=None)
    _add_common(p)
    commands["convert"] = (p, _cmd_convert)

    p = sub.add_parser("ddm",
                       help="export a distortion distribution map")
    p.add_argument("--k", type=str, required=True)
    p.add_argument("--model", default="division", choices=[m.value for m in Model])
    p.add_argument("--r-norm", type=float, default=None)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--center", type=str, default=None)
    p.add_argument("--csv", type=Path, default=None)
    p.add_argument("--png", type=Path, default=None)
    _add_common(p)
    commands["ddm"] = (p, _cmd_ddm)

    p = sub.add_parser("eval", help="score images or estimates")
    p.add_argument("--a", type=Path, default=None, help="image to compare")
    p.add_argument("--b", type=Path, default=None, help="reference image")
    p.add_argument("--k-est", type=str, default=None)
    p.add_argument("--k-true", type=str, default=None)
    p.add_argument("--model", default="division", choices=[m.value for m in Model])
    p.add_argument("--r-norm", type=float, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--pred", type=Path, default=None,
                   help="JSON-lines with id plus levels or k per sample")
    _add_common(p)
    commands["eval"] = (p, _cmd_eval)

    p = sub.add_parser("lfr",
                       help="learning-friendly rate from a groups CSV")
    p.add_argument("--groups", type=Path, required=True,
                   help="CSV with error,data_count,convergence_epoch columns")
    p.add_argument("--total-data", type=float, required=True)
    p.add_argument("--total-epochs", type=float, required=True)
    p.add_argument("--log10", action="store_true")
    _add_common(p)
    commands["lfr"] = (p, _cmd_lfr)

    p = sub.add_parser("inspect",
                       help="print one manifest record's ground truth")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--id", type=str, required=True)
    _add_common(p)
    commands["inspect"] = (p, _cmd_inspect)

    return parser, commands


def _cmd_generate(args) -> int:
    if args.count is not None:
        counts = {"train": args.count, "val": 0, "test": 0}
    else:
        counts = {"train": args.train, "val": args.val, "test": args.test}
    if args.ranges is not None:
        ranges = CoefficientRanges(_parse_intervals(args.ranges), args.delta_lo, args.delta_hi)
    else:
        base = default_ranges(args.n)
        ranges = CoefficientRanges(base.intervals, args.delta_lo, args.delta_hi)
    cfg = GenerateConfig(
        out_dir=args.out,
        counts=counts,
        width=args.width,
        height=args.height,
        n=args.n,
        ranges=ranges,
        model=Model(args.model),
        seed=args.seed,
        scene_kinds=tuple(args.scene_kinds.split(",")),
        source_dir=args.source_dir,
        jitter_fraction=args.jitter,
    )
    manifest = generate_dataset(cfg)
    payload = {
        "manifest": str(manifest.path),
        "samples": len(manifest.records),
        "counts": counts,
        "seed": args.seed,
    }
    _emit(args, payload, [("manifest", str(manifest.path)),
                          ("samples", str(len(manifest.records)))])
    return 0


def _cmd_distort(args) -> int:
    img = load_png(args.input)
    h, w = img.shape[:2]
    k = _coefficients(args, half_diagonal(w, h))
    center = _parse_center(args.center) if args.center else None
    save_png(distort_image(img, k, center), args.output)
    _emit(args, {"output": str(args.output)}, [("output", str(args.output))])
    return 0


def _cmd_rectify(args) -> int:
    img = load_png(args.input)
    h, w = img.shape[:2]
    if (args.k is None) == (args.levels is None):
        raise UsageError("pass exactly one of --k or --levels(+--radii)")
    if args.k is not None:
        k = _coefficients(args, half_diagonal(w, h))
        condition = None
    else:
        if args.radii is None:
            raise UsageError("--levels requires --radii")
        profile = OrdinalDistortion(_parse_floats(args.radii), _parse_floats(args.levels))
        result = ordinal_to_coefficients(
            profile, Model(args.model),
            args.r_norm if args.r_norm is not None else half_diagonal(w, h),
        )
        k = result.coefficients
        condition = result.condition
    center = _parse_center(args.center) if args.center else None
    out = rectify_image(img, k, center, ScalePolicy(args.scale_policy))
    save_png(out, args.output)
    payload = {"output": str(args.output), "k": [_num(v) for v in k.k]}
    rows = [("output", str(args.output)), ("k", " ".join(fmt9(v) for v in k.k))]
    if condition is not None:
        payload["condition"] = _num(condition)
        rows.append(("condition", fmt9(condition)))
    _emit(args, payload, rows)
    return 0


def _cmd_convert(args) -> int:
    radii = _parse_floats(args.radii)
    if (args.levels is None) == (args.k is None):
        raise UsageError("pass exactly one of --levels or --k")
    if args.levels is not None:
        profile = OrdinalDistortion(radii, _parse_floats(args.levels))
        result = ordinal_to_coefficients(
            profile, Model(args.model), args.r_norm if args.r_norm else 1.0
        )
        payload = {
            "k": [_num(v) for v in result.coefficients.k],
            "condition": _num(result.condition),
            "relative_residual": _num(result.relative_residual),
        }
        rows = [(f"k{i + 1}", fmt9(v)) for i, v in enumerate(result.coefficients.k)]
        rows.append(("condition", fmt9(result.condition)))
        _emit(args, payload, rows)
    else:
        k = DistortionCoefficients(Model(args.model), _parse_floats(args.k),
                                   args.r_norm if args.r_norm else 1.0)
        profile = compute_ordinal(k, radii)
        payload = {"radii": list(radii), "levels": [_num(v) for v in profile.levels]}
        rows = [(f"delta(r={fmt9(r)})", fmt9(v)) for r, v in zip(radii, profile.levels)]
        _emit(args, payload, rows)
    return 0


def _cmd_ddm(args) -> int:
    k = _coefficients(args, half_diagonal(args.width, args.height))
    center = (_parse_center(args.center) if args.center
              else PrincipalPoint(args.width / 2.0, args.height / 2.0))
    dmap = ddm(k, center, args.width, args.height)
    payload = {
        "width": args.width,
        "height": args.height,
        "delta_max": _num(float(np.max(dmap.values))),
        "delta_min": _num(float(np.min(dmap.values))),
    }
    rows = [("delta_max", fmt9(float(np.max(dmap.values)))),
            ("delta_min", fmt9(float(np.min(dmap.values))))]
    if args.csv:
        ddm_to_csv(dmap, args.csv)
        payload["csv"] = str(args.csv)
        rows.append(("csv", str(args.csv)))
    if args.png:
        scale_max = ddm_to_png16(dmap, args.png)
        payload["png"] = str(args.png)
        payload["png_delta_max"] = _num(scale_max)
        rows.append(("png", str(args.png)))
    if not args.csv and not args.png:
        raise UsageError("pass --csv and/or --png")
    _emit(args, payload, rows)
    return 0


def _metric_payload(report: dict) -> tuple[dict, list[tuple[str, str]]]:
    payload = {}
    rows = []
    for name, value in report.items():
        payload[name] = _num(value) if isinstance(value, float) else value
        rows.append((name, fmt9(value) if isinstance(value, float) else str(value)))
    return payload, rows


def _cmd_eval(args) -> int:
    if args.manifest is not None or args.pred is not None:
        return _cmd_eval_batch(args)
    report: dict = {}
    if args.a is not None or args.b is not None:
        if args.a is None or args.b is None:
            raise UsageError("--a and --b go together")
        img_a = load_png(args.a)
        img_b = load_png(args.b)
        report["psnr"] = metrics_mod.psnr(img_a, img_b)
        report["ssim"] = metrics_mod.ssim(img_a, img_b)
    if args.k_est is not None or args.k_true is not None:
        if args.k_est is None or args.k_true is None:
            raise UsageError("--k-est and --k-true go together")
        if args.width is None or args.height is None:
            raise UsageError("--width/--height required for coefficient metrics")
        r_norm = args.r_norm if args.r_norm else half_diagonal(args.width, args.height)
        est = DistortionCoefficients(Model(args.model), _parse_floats(args.k_est), r_norm)
        true = DistortionCoefficients(Model(args.model), _parse_floats(args.k_true), r_norm)
        report["rmse_params"] = metrics_mod.rmse_params(est.k, true.k)
        report["mdld"] = metrics_mod.mdld(est, true, size=(args.width, args.height))
    if not report:
        raise UsageError("nothing to evaluate; pass images or coefficient vectors")
    payload, rows = _metric_payload(report)
    _emit(args, payload, rows)
    return 0


def _cmd_eval_batch(args) -> int:
    if args.manifest is None or args.pred is None:
        raise UsageError("batch mode needs both --manifest and --pred")
    manifest = read_manifest(args.manifest)
    by_id = {record.id: record for record in manifest.records}
    with open(args.pred, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            pred = json.loads(line)
            record = by_id.get(pred["id"])
            if record is None:
                print(json.dumps({"id": pred["id"], "error": "unknown id"}))
                continue
            truth = record.coefficients
            if "k" in pred:
                est = DistortionCoefficients(truth.model, tuple(pred["k"]), truth.r_norm)
            elif "levels" in pred:
                profile = OrdinalDistortion(record.radii, tuple(pred["levels"]))
                est = ordinal_to_coefficients(profile, truth.model, truth.r_norm).coefficients
            else:
                print(json.dumps({"id": pred["id"], "error": "no k or levels"}))
                continue
            img = load_png(manifest.directory / record.distorted_path)
            height, width = img.shape[:2]
            center = PrincipalPoint(record.principal_point.xc + 0.5,
                                    record.principal_point.yc + 0.5)
            value = metrics_mod.mdld(est, truth, size=(width, height), center=center)
            out = {
                "id": pred["id"],
                "mdld": _num(value),
                "rmse_params": _num(metrics_mod.rmse_params(est.k, truth.k)),
            }
            print(json.dumps(out))
    return 0


def _cmd_lfr(args) -> int:
    groups = []
    with open(args.groups, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            groups.append(metrics_mod.LfrGroup(
                float(row["error"]),
                float(row["data_count"]),
                float(row["convergence_epoch"]),
            ))
    value = metrics_mod.learning_friendly_rate(
        groups, args.total_data, args.total_epochs, log_base_10=args.log10
    )
    _emit(args, {"learning_friendly_rate": _num(value)},
          [("learning_friendly_rate", fmt9(value))])
    return 0


def _cmd_inspect(args) -> int:
    manifest = read_manifest(args.manifest)
    for record in manifest.records:
        if record.id == args.id:
            if args.json:
                print(record.to_json())
            else:
                rows = [
                    ("id", record.id),
                    ("split", record.split),
                    ("model", record.coefficients.model.value),
                    ("k", " ".join(fmt9(v) for v in record.coefficients.k)),
                    ("r_norm", fmt9(record.coefficients.r_norm)),
                    ("center", f"{fmt9(record.principal_point.xc)} "
                               f"{fmt9(record.principal_point.yc)}"),
                    ("radii", " ".join(fmt9(v) for v in record.radii)),
                    ("ordinal", " ".join(fmt9(v) for v in record.ordinal)),
                    ("flips", " ".join(f.value for f in record.flips)),
                ]
                width = max(len(name) for name, _ in rows)
                for name, value in rows:
                    print(f"{name.ljust(width)}  {value}")
            return 0
    raise OrdcalError(f"id {args.id!r} not found in {args.manifest}")


def main(argv=None) -> int:
    parser, commands = _build_parser()
    try:
        args = parser.parse_args(argv)
        subparser, handler = commands[args.command]
        _apply_config(subparser, args)
        return handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (OrdcalError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
