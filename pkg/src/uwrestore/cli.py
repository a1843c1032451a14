"""Command-line surface for the degrade/restore/evaluate pipeline.

Subcommands:

* ``coefficients`` - integrate an attenuation curve against camera response
  curves and print/save per-channel coefficients.
* ``degrade`` / ``restore`` - batch forward/inverse imaging over PNG files.
* ``evaluate`` - per-image metric report for prediction/reference
  directories, with optional feature-file FID.
* ``nce`` - patchwise contrastive loss between two feature-stack files.
* ``fid`` - Fréchet distance between two feature files.
* ``manifest validate`` / ``manifest split`` - dataset manifest tooling.

Settings come from a TOML config file overridden by flags (flags win).
Numeric results print to standard output; progress and errors are
line-oriented JSON on standard error so stdout stays pipeable. Exit codes:
0 on full success, 1 when some per-file work failed, 2 for unusable inputs
or configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import dataset, features, losses, metrics, spectra
from .errors import Error
from .imaging import DEFAULT_RANGE_MAP, DEFAULT_T0, RestorationParams, degrade, restore
from .spectra import ChannelCoefficients

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2


def _log(event: str, **fields) -> None:
    print(json.dumps({"event": event, **fields}, sort_keys=True), file=sys.stderr)


@dataclasses.dataclass
class RunConfig:
    """Merged settings: defaults, then config file, then CLI flags."""

    attenuation_curve: str | None = None
    camera_response: str | None = None
    coefficients_file: str | None = None
    lambda_min_nm: float = spectra.DEFAULT_LAMBDA_MIN_NM
    lambda_max_nm: float = spectra.DEFAULT_LAMBDA_MAX_NM
    normalize: bool = True
    distance_m: float = dataset.DEFAULT_DISTANCE_M
    depth_m: float = 0.0
    t0: float = DEFAULT_T0
    range_map: bool = True
    range_lo: float = DEFAULT_RANGE_MAP[0]
    range_hi: float = DEFAULT_RANGE_MAP[1]
    rescale: bool = True
    resize: tuple[int, int] | None = None
    jobs: int = 1
    output_dir: str = "."
    with_ssim: bool = True
    with_uiqm: bool = True

    @classmethod
    def load(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls()
        config_path = getattr(args, "config", None)
        if config_path:
            try:
                with open(config_path, "rb") as fh:
                    doc = tomllib.load(fh)
            except (OSError, tomllib.TOMLDecodeError) as exc:
                raise Error(f"config {config_path}: {exc}") from exc
            for key, value in doc.items():
                if key == "resize":
                    cfg.resize = (int(value[0]), int(value[1]))
                elif hasattr(cfg, key):
                    setattr(cfg, key, value)
                else:
                    raise Error(f"config {config_path}: unknown key {key!r}")
        overrides = {
            "attenuation": "attenuation_curve",
            "camera_response": "camera_response",
            "coefficients": "coefficients_file",
            "lambda_min": "lambda_min_nm",
            "lambda_max": "lambda_max_nm",
            "distance": "distance_m",
            "depth": "depth_m",
            "t0": "t0",
            "jobs": "jobs",
            "out": "output_dir",
        }
        for flag, attr in overrides.items():
            value = getattr(args, flag, None)
            if value is not None:
                setattr(cfg, attr, value)
        if getattr(args, "no_normalize", False):
            cfg.normalize = False
        if getattr(args, "no_range_map", False):
            cfg.range_map = False
        if getattr(args, "no_rescale", False):
            cfg.rescale = False
        if getattr(args, "no_ssim", False):
            cfg.with_ssim = False
        if getattr(args, "no_uiqm", False):
            cfg.with_uiqm = False
        if getattr(args, "resize", None):
            cfg.resize = _parse_resize(args.resize)
        return cfg

    def restoration_params(self, p: ChannelCoefficients, distance_m: float | None = None) -> RestorationParams:
        return RestorationParams(
            p=p,
            distance_m=self.distance_m if distance_m is None else distance_m,
            depth_m=self.depth_m,
            t0=self.t0,
            range_map=(self.range_lo, self.range_hi) if self.range_map else None,
            rescale_output=self.rescale,
        )


def _parse_resize(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise Error(f"--resize expects WxH, got {text!r}") from exc


def _load_coefficients(cfg: RunConfig) -> ChannelCoefficients:
    if cfg.coefficients_file:
        try:
            with open(cfg.coefficients_file, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            return ChannelCoefficients(float(doc["p_r"]), float(doc["p_g"]), float(doc["p_b"]))
        except OSError as exc:
            raise Error(f"coefficients file {cfg.coefficients_file}: {exc}") from exc
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise Error(f"coefficients file {cfg.coefficients_file}: bad contents ({exc})") from exc
    if not (cfg.attenuation_curve and cfg.camera_response):
        raise Error(
            "need either a coefficients file or both an attenuation curve and a camera response"
        )
    return _compute_coefficients(cfg)


def _compute_coefficients(cfg: RunConfig) -> ChannelCoefficients:
    for label, path in (("attenuation curve", cfg.attenuation_curve),
                        ("camera response", cfg.camera_response)):
        if not path or not Path(path).exists():
            raise Error(f"{label} file not found: {path}")
    beta = spectra.load_curve_csv(cfg.attenuation_curve)
    resp_r, resp_g, resp_b = spectra.load_camera_response_csv(cfg.camera_response)
    return spectra.channel_coefficients(
        beta, resp_r, resp_g, resp_b,
        a_nm=cfg.lambda_min_nm, b_nm=cfg.lambda_max_nm, normalize=cfg.normalize,
    )


def _collect_inputs(target: Path) -> list[Path]:
    if target.is_dir():
        return sorted(p for p in target.iterdir() if p.suffix.lower() == ".png")
    if target.exists():
        return [target]
    raise Error(f"input not found: {target}")


def cmd_coefficients(args: argparse.Namespace) -> int:
    cfg = RunConfig.load(args)
    p = _compute_coefficients(cfg)
    payload = {"p_r": p.p_r, "p_g": p.p_g, "p_b": p.p_b}
    print(json.dumps(payload, sort_keys=True))
    sidecar = Path(args.output) if args.output else Path(cfg.output_dir) / "coefficients.json"
    sidecar.parent.mkdir(parents=True, exist_ok=True)
    with sidecar.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _log("coefficients", path=str(sidecar), **payload)
    return EXIT_OK


def _run_batch(args: argparse.Namespace, forward: bool) -> int:
    cfg = RunConfig.load(args)
    p = _load_coefficients(cfg)
    files = _collect_inputs(Path(args.input))
    if not files:
        raise Error(f"no PNG files under {args.input}")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = "_degraded" if forward else "_restored"

    def process(path: Path):
        image = dataset.load_image(path, resize=cfg.resize)
        params = cfg.restoration_params(p)
        if forward:
            result = degrade(image, params)
            stats = {
                "distance_m": params.distance_m,
                "depth_m": params.depth_m,
                "transmission": [float(x) for x in params.transmission()],
            }
        else:
            result, stats = restore(image, params, with_stats=True)
        out_path = out_dir / f"{path.stem}{suffix}.png"
        dataset.save_image(out_path, result)
        return out_path, stats

    results: dict[Path, tuple] = {}
    failures: dict[Path, str] = {}

    def worker(path: Path):
        try:
            results[path] = process(path)
        except (Error, OSError) as exc:
            failures[path] = str(exc)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            list(pool.map(worker, files))
    else:
        for path in files:
            worker(path)

    for path in files:
        if path in results:
            out_path, stats = results[path]
            _log("processed", input=str(path), output=str(out_path), **stats)
        else:
            _log("failed", input=str(path), error=failures[path])
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_degrade(args: argparse.Namespace) -> int:
    return _run_batch(args, forward=True)


def cmd_restore(args: argparse.Namespace) -> int:
    return _run_batch(args, forward=False)


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = RunConfig.load(args)
    pred_dir = Path(args.predictions)
    ref_dir = Path(args.references)
    for d in (pred_dir, ref_dir):
        if not d.is_dir():
            raise Error(f"not a directory: {d}")
    preds = {p.name: p for p in pred_dir.iterdir() if p.suffix.lower() == ".png"}
    refs = {p.name: p for p in ref_dir.iterdir() if p.suffix.lower() == ".png"}
    matched = sorted(preds.keys() & refs.keys())
    unmatched = sorted(preds.keys() ^ refs.keys())
    for name in unmatched:
        _log("unmatched", name=name, side="prediction" if name in preds else "reference")
    if not matched:
        raise Error("no matching file names between the two directories")

    def row(name: str) -> metrics.ImageMetrics:
        pred = dataset.load_image(preds[name], resize=cfg.resize)
        ref = dataset.load_image(refs[name], resize=cfg.resize)
        m = metrics.mse(pred, ref)
        psnr_db = metrics.psnr(pred, ref)
        ssim_val = metrics.ssim(pred, ref) if cfg.with_ssim else math.nan
        if cfg.with_uiqm:
            colorfulness, sharpness, contrast, q = metrics.uiqm(pred)
        else:
            colorfulness = sharpness = contrast = q = math.nan
        return metrics.ImageMetrics(name, m, psnr_db, ssim_val,
                                    colorfulness, sharpness, contrast, q)

    rows: dict[str, metrics.ImageMetrics] = {}
    failures: dict[str, str] = {}

    def worker(name: str):
        try:
            rows[name] = row(name)
        except (Error, OSError) as exc:
            failures[name] = str(exc)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            list(pool.map(worker, matched))
    else:
        for name in matched:
            worker(name)

    report = metrics.MetricReport(rows=[rows[n] for n in matched if n in rows])
    if args.features_pred and args.features_ref:
        ref_stats = features.gaussian_stats(features.load_features(args.features_ref))
        pred_stats = features.gaussian_stats(features.load_features(args.features_pred))
        report.fid = features.fid(ref_stats, pred_stats)

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.write_csv(out_dir / "metrics.csv")
    report.write_json(out_dir / "metrics.json")
    for name in matched:
        if name in failures:
            _log("failed", name=name, error=failures[name])
    _log("report", rows=len(report.rows), failures=len(failures),
         unmatched=len(unmatched), out=str(out_dir))
    return EXIT_PARTIAL if (failures or unmatched) else EXIT_OK


def cmd_nce(args: argparse.Namespace) -> int:
    input_stack = losses.load_feature_stack(args.input_stack)
    output_stack = losses.load_feature_stack(args.output_stack)
    value = losses.patch_nce(input_stack, output_stack, tau=args.tau)
    print(f"{value:.9g}")
    return EXIT_OK


def cmd_fid(args: argparse.Namespace) -> int:
    real = features.gaussian_stats(features.load_features(args.real_features))
    gen = features.gaussian_stats(features.load_features(args.generated_features))
    print(f"{features.fid(real, gen):.9g}")
    return EXIT_OK


def cmd_manifest_validate(args: argparse.Namespace) -> int:
    manifest = dataset.load_manifest(args.manifest)
    totals = manifest.totals()
    print(json.dumps({"sites": len(manifest.sites), "images": len(manifest.images), **totals},
                     sort_keys=True))
    return EXIT_OK


def cmd_manifest_split(args: argparse.Namespace) -> int:
    manifest = dataset.load_manifest(args.manifest)
    split = dataset.build_splits(manifest, seed=args.seed,
                                 test_size=args.test_size, test_site=args.test_site)
    out = Path(args.out) if args.out else Path("splits.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    split.write_json(out)
    print(json.dumps({
        "unpaired_low": len(split.unpaired_low),
        "unpaired_ref": len(split.unpaired_ref),
        "paired_train": len(split.paired_train),
        "test": len(split.test),
        "out": str(out),
    }, sort_keys=True))
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, *, batch: bool) -> None:
    parser.add_argument("--config", help="TOML config file; flags override its values")
    if batch:
        parser.add_argument("--coefficients", help="JSON sidecar with p_r/p_g/p_b")
        parser.add_argument("--attenuation", help="attenuation curve CSV")
        parser.add_argument("--camera-response", dest="camera_response",
                            help="camera response CSV (qe_r/qe_g/qe_b)")
        parser.add_argument("--distance", type=float, help="camera-object distance (m)")
        parser.add_argument("--depth", type=float, help="diving depth (m)")
        parser.add_argument("--t0", type=float, help="transmission lower bound")
        parser.add_argument("--resize", help="load-time resize WxH, e.g. 1680x892")
        parser.add_argument("--jobs", type=int, help="parallel workers")
        parser.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uwrestore",
        description="Physics-based underwater image degradation, restoration and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coefficients", help="per-channel attenuation coefficients from curves")
    p.add_argument("--config")
    p.add_argument("--attenuation", help="attenuation curve CSV")
    p.add_argument("--camera-response", dest="camera_response", help="camera response CSV")
    p.add_argument("--lambda-min", dest="lambda_min", type=float, help="integration start (nm)")
    p.add_argument("--lambda-max", dest="lambda_max", type=float, help="integration end (nm)")
    p.add_argument("--no-normalize", action="store_true",
                   help="raw product integral instead of the response-weighted mean")
    p.add_argument("--output", help="JSON sidecar path")
    p.add_argument("--out", help="output directory for the default sidecar location")
    p.set_defaults(func=cmd_coefficients)

    p = sub.add_parser("degrade", help="apply the forward imaging model to PNGs")
    p.add_argument("input", help="PNG file or directory")
    _add_common(p, batch=True)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("restore", help="invert the imaging model on PNGs")
    p.add_argument("input", help="PNG file or directory")
    _add_common(p, batch=True)
    p.add_argument("--no-range-map", action="store_true", help="skip the pixel-range mapping")
    p.add_argument("--no-rescale", action="store_true", help="skip the global contrast rescale")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("evaluate", help="metric report over prediction/reference directories")
    p.add_argument("predictions", help="directory of predicted/restored PNGs")
    p.add_argument("references", help="directory of reference PNGs with matching names")
    p.add_argument("--config")
    p.add_argument("--resize", help="load-time resize WxH")
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="output directory for metrics.csv/metrics.json")
    p.add_argument("--features-pred", dest="features_pred", help="feature file for predictions")
    p.add_argument("--features-ref", dest="features_ref", help="feature file for references")
    p.add_argument("--no-ssim", action="store_true")
    p.add_argument("--no-uiqm", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("nce", help="patchwise contrastive loss between two feature stacks")
    p.add_argument("input_stack", help="feature-stack file for the source image")
    p.add_argument("output_stack", help="feature-stack file for the translated image")
    p.add_argument("--tau", type=float, default=losses.DEFAULT_TAU)
    p.set_defaults(func=cmd_nce)

    p = sub.add_parser("fid", help="Fréchet distance between two feature files")
    p.add_argument("real_features")
    p.add_argument("generated_features")
    p.set_defaults(func=cmd_fid)

    p = sub.add_parser("manifest", help="dataset manifest tooling")
    msub = p.add_subparsers(dest="manifest_command", required=True)
    mv = msub.add_parser("validate", help="parse and validate a manifest")
    mv.add_argument("manifest")
    mv.set_defaults(func=cmd_manifest_validate)
    ms = msub.add_parser("split", help="build deterministic train/test splits")
    ms.add_argument("manifest")
    ms.add_argument("--seed", type=int, default=dataset.CANONICAL_SPLIT_SEED)
    ms.add_argument("--test-size", dest="test_size", type=int, default=300)
    ms.add_argument("--test-site", dest="test_site", type=int, default=5)
    ms.add_argument("--out", help="output path for the split JSON")
    ms.set_defaults(func=cmd_manifest_split)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (Error, OSError) as exc:
        _log("error", message=str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
