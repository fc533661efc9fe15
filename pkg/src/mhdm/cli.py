"""Command line entry point: ``mhdm degrade | blind | nonblind | compare``.

Exit codes: 0 success, 2 usage or configuration error (including missing
input files), 3 numerical failure, 4 other I/O failure.
"""

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .blind import RunConfig, run_blind
from .degrade import MIXTURE4, RNG_ALGORITHM, degrade, gaussian_kernel, gaussian_mixture_kernel
from .errors import ConfigError, DimensionMismatch, InvalidSigma, InvalidWeights, MhdmError, NoRealRoot
from .imageio import (
    SCHEMA_VERSION,
    atomic_write_text,
    format_float,
    read_image,
    write_array,
    write_json,
    write_png,
)
from .metrics import psnr, rel_l2_error, ssim
from .nonblind import NonBlindConfig, sweep_guessed_kernels
from .spectral import inverse_dft
from .variational import optimize_ratio, run_grid_search

log = logging.getLogger("mhdm")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

RESIDUAL_COLUMNS = ["n", "lambda", "mu", "residual", "tau_delta_sq"]
COMPARE_METRICS = ["PSNR", "SSIM", "err"]


class UsageError(Exception):
    pass


# -- configuration -----------------------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, value):
    kind = _FIELD_TYPES[key]
    if kind in (bool, "bool"):
        low = str(value).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    try:
        if kind in (int, "int"):
            as_float = float(value)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r}") from None


def parse_config_text(text):
    """Parse ``key = value`` lines (``#`` comments) into RunConfig fields."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def format_config(cfg):
    lines = [f"# mhdm run configuration (schema_version {SCHEMA_VERSION})"]
    for key, value in cfg.as_dict().items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = format_float(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def _flag_overrides(args):
    mapping = {
        "r": args.r,
        "s": args.s,
        "lambda0": args.lambda0,
        "mu0": args.mu0,
        "decay": args.decay,
        "tau": args.tau,
        "delta": args.delta,
        "max_iter": args.max_iter,
        "min_iter": args.min_iter,
        "pin_means": args.pin_means,
        "reference_size": args.reference_size,
        "seed": args.seed,
    }
    return {k: v for k, v in mapping.items() if v is not None}


def resolve_config(args, manifest=None, require_delta=True):
    """Defaults < manifest (delta, seed) < config file < command line flags."""
    values = {}
    if manifest:
        values["delta"] = float(manifest["delta"])
        values["seed"] = int(manifest["seed"])
    if args.config:
        path = _existing(args.config)
        values.update(parse_config_text(path.read_text(encoding="utf-8")))
    values.update(_flag_overrides(args))
    if require_delta and "delta" not in values:
        raise UsageError("noise level unknown: pass --delta or provide a manifest")
    return RunConfig(**values)


def _add_config_flags(p):
    g = p.add_argument_group("run configuration (overrides --config)")
    g.add_argument("--config", help="flat 'key = value' configuration file")
    g.add_argument("--r", type=float, help="image Sobolev exponent (default 1)")
    g.add_argument("--s", type=float, help="kernel Sobolev exponent (default 0.1)")
    g.add_argument("--lambda0", type=float, help="initial image weight (default 1.4e-4)")
    g.add_argument("--mu0", type=float, help="initial kernel weight (default 6.3e5)")
    g.add_argument("--decay", type=float, help="per-step divisor (default 4)")
    g.add_argument("--tau", type=float, help="discrepancy factor (default sqrt(1.001))")
    g.add_argument("--delta", type=float, help="noise norm bound; overrides the manifest")
    g.add_argument("--max-iter", type=int, dest="max_iter")
    g.add_argument("--min-iter", type=int, dest="min_iter")
    g.add_argument("--reference-size", type=int, dest="reference_size",
                   help="grid size mu0 is quoted for; 0 disables rescaling (default 512)")
    g.add_argument("--seed", type=int)
    g.add_argument("--pin-means", dest="pin_means", action="store_true", default=None)
    g.add_argument("--no-pin-means", dest="pin_means", action="store_false")


# -- helpers ---------------------------------------------------------------


def _existing(path):
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"input file not found: {path}")
    return path


def _manifest_path_for(path):
    path = Path(path)
    return path.with_name(path.stem + ".manifest.json")


def load_observation(path, manifest_path=None):
    """Observation array and its manifest (or None).

    The manifest's full-precision observation is preferred over the PNG.
    """
    path = _existing(path)
    mpath = Path(manifest_path) if manifest_path else _manifest_path_for(path)
    if manifest_path:
        _existing(mpath)
    manifest = None
    if mpath.is_file():
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
        raw = manifest.get("observation_raw")
        if raw and (mpath.parent / raw).is_file():
            return read_image(mpath.parent / raw), manifest
    return read_image(path), manifest


def load_kernel(spec, shape):
    """Kernel from ``gaussian:VAR``, ``mixture4``, ``mixture:w:var:ci:cj,...`` or a file."""
    m, n = shape
    try:
        if spec.startswith("gaussian:"):
            return gaussian_kernel(m, n, float(spec.split(":", 1)[1]))
        if spec == "mixture4":
            return gaussian_mixture_kernel(m, n, MIXTURE4)
        if spec.startswith("mixture:"):
            comps = []
            for item in spec.split(":", 1)[1].split(","):
                w, var, ci, cj = (float(t) for t in item.split(":"))
                comps.append((w, var, (ci, cj)))
            return gaussian_mixture_kernel(m, n, comps)
    except (InvalidSigma, InvalidWeights):
        raise
    except ValueError:
        raise UsageError(f"cannot parse kernel spec {spec!r}") from None
    k = read_image(_existing(spec))
    if k.shape != shape:
        raise UsageError(f"kernel {spec} has shape {k.shape}, expected {shape}")
    return k / k.sum()


def _resize(img, size):
    h, w = size
    im = Image.fromarray(img.astype(np.float32))
    return np.asarray(im.resize((w, h), Image.Resampling.LANCZOS), dtype=np.float64)


def _parse_size(text):
    parts = text.lower().split("x")
    if len(parts) == 1:
        parts = parts * 2
    try:
        m, n = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size {text!r}") from None
    return m, n


def _parse_floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _parse_range(text):
    try:
        lo, hi, count = text.split(":")
        return list(np.linspace(float(lo), float(hi), int(count)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, expected lo:hi:count") from None


def csv_text(header, rows):
    """CSV with every float in 17-significant-digit form."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [format_float(v) if isinstance(v, (float, np.floating)) else v for v in row]
        )
    return buf.getvalue()


def residual_rows(state):
    return [
        (n, float(lam), float(mu), float(phi), float(state.threshold))
        for n, (lam, mu, phi) in enumerate(zip(state.lambdas, state.mus, state.residuals))
    ]


def _kernel_preview(k):
    return np.fft.fftshift(k)


def image_metrics(image, kernel, truth=None, truth_kernel=None):
    out = {}
    if truth is not None:
        out["psnr"] = psnr(image, truth)
        out["ssim"] = ssim(image, truth) if min(truth.shape) >= 11 else None
    if truth_kernel is not None and kernel is not None:
        out["kernel_err"] = rel_l2_error(kernel, truth_kernel)
    return out


def compare_row(mhdm, var):
    """One table row with per-method metrics and MHDM/variational ratios."""
    row = {}
    for key, name in (("psnr", "PSNR"), ("ssim", "SSIM"), ("kernel_err", "err")):
        row[f"{name}_MHDM"] = mhdm[key]
        row[f"{name}_var"] = var[key]
    for name in COMPARE_METRICS:
        a, b = row[f"{name}_MHDM"], row[f"{name}_var"]
        row[f"{name}_ratio"] = a / b if b != 0 else (1.0 if a == b else float("inf"))
    return row


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# -- commands ----------------------------------------------------------------


def cmd_degrade(args):
    u = read_image(_existing(args.input))
    if args.resize:
        u = _resize(u, args.resize)
    k = load_kernel(args.kernel, u.shape)
    f, delta = degrade(u, k, args.noise_var, args.seed)

    out = Path(args.out)
    stem = out.with_suffix("")
    raw = stem.with_name(stem.name + ".bin")
    kpng = stem.with_name(stem.name + ".kernel.png")
    kraw = stem.with_name(stem.name + ".kernel.bin")
    truth_raw = stem.with_name(stem.name + ".truth.bin")
    write_png(out, f)
    write_array(raw, f)
    write_png(kpng, _kernel_preview(k), normalize=True)
    write_array(kraw, k)
    write_array(truth_raw, u)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "input": str(args.input),
        "resize": list(args.resize) if args.resize else None,
        "kernel_spec": args.kernel,
        "noise_var": float(args.noise_var),
        "seed": int(args.seed),
        "rng": RNG_ALGORITHM,
        "delta": float(delta),
        "shape": list(f.shape),
        "observation_raw": raw.name,
        "kernel_raw": kraw.name,
        "truth_raw": truth_raw.name,
    }
    write_json(_manifest_path_for(out), manifest)
    print(f"wrote {out} (delta = {format_float(delta)})")
    return EXIT_OK


def _load_truth(args, shape):
    truth = truth_kernel = None
    if getattr(args, "truth", None):
        truth = read_image(_existing(args.truth))
        if truth.shape != shape:
            raise UsageError(f"truth image has shape {truth.shape}, expected {shape}")
    if getattr(args, "truth_kernel", None):
        truth_kernel = load_kernel(args.truth_kernel, shape)
    return truth, truth_kernel


def cmd_blind(args):
    f, manifest = load_observation(args.input, args.manifest)
    cfg = resolve_config(args, manifest)
    truth, truth_kernel = _load_truth(args, f.shape)
    state = run_blind(f, cfg)
    U, K = state.image(), state.kernel()

    out = Path(args.out_dir)
    write_png(out / "U.png", U)
    write_array(out / "U.bin", U)
    write_png(out / "K.png", _kernel_preview(K), normalize=True)
    write_array(out / "K.bin", K)
    if not args.no_scales:
        for i, (du, dk) in enumerate(zip(state.scales_u, state.scales_k)):
            u_i, k_i = inverse_dft(du), inverse_dft(dk)
            write_png(out / "scales" / f"u_{i:03d}.png", u_i, normalize=True)
            write_array(out / "scales" / f"u_{i:03d}.bin", u_i)
            write_png(out / "scales" / f"k_{i:03d}.png", _kernel_preview(k_i), normalize=True)
            write_array(out / "scales" / f"k_{i:03d}.bin", k_i)
    atomic_write_text(out / "residuals.csv", csv_text(RESIDUAL_COLUMNS, residual_rows(state)))
    atomic_write_text(out / "config.txt", format_config(cfg))
    summary = {
        "schema_version": SCHEMA_VERSION,
        "stop_index": state.stop_index,
        "stop_reason": state.stop_reason.value,
        "iterations": state.n,
        "residual": state.residuals[-1],
        "tau_delta_sq": state.threshold,
        "config": cfg.as_dict(),
        "metrics": image_metrics(U, K, truth, truth_kernel),
    }
    if truth is not None:
        summary["metrics"]["psnr_observation"] = psnr(f, truth)
    write_json(out / "summary.json", _json_ready(summary))
    print(f"stopped at n = {state.stop_index} ({state.stop_reason.value}); outputs in {out}")
    return EXIT_OK


SWEEP_COLUMNS = ["sigma", "stop_index", "stop_reason", "residual", "psnr", "ssim", "kernel_err"]


def cmd_nonblind(args):
    f, manifest = load_observation(args.input, args.manifest)
    cfg = resolve_config(args, manifest)
    truth, truth_kernel = _load_truth(args, f.shape)
    sigmas = args.sigmas or args.sigma_range
    if not sigmas:
        raise UsageError("give --sigmas or --sigma-range")
    nb_cfg = NonBlindConfig(
        r=cfg.r, lambda0=cfg.lambda0, decay=cfg.decay, tau=cfg.tau, delta=cfg.delta,
        max_iter=cfg.max_iter, min_iter=cfg.min_iter, pin_means=cfg.pin_means,
    )
    rows = []
    best = None
    for sigma, state in sweep_guessed_kernels(f, sigmas, nb_cfg):
        U = state.image()
        met = image_metrics(U, state.kernel(), truth, truth_kernel)
        rows.append((
            float(sigma), state.stop_index, state.stop_reason.value, float(state.residuals[-1]),
            met.get("psnr", ""), met.get("ssim", ""), met.get("kernel_err", ""),
        ))
        score = met.get("psnr", -state.residuals[-1])
        if best is None or score > best[0]:
            best = (score, sigma, U)
    out = Path(args.out_dir)
    atomic_write_text(out / "sweep.csv", csv_text(SWEEP_COLUMNS, rows))
    write_png(out / "U_best.png", best[2])
    write_array(out / "U_best.bin", best[2])
    atomic_write_text(out / "config.txt", format_config(cfg))
    print(f"{len(rows)} guessed kernels; best sigma = {format_float(best[1])}")
    return EXIT_OK


def cmd_compare(args):
    f, manifest = load_observation(args.input, args.manifest)
    cfg = resolve_config(args, manifest)
    truth, truth_kernel = _load_truth(args, f.shape)
    if truth is None or truth_kernel is None:
        raise UsageError("compare needs --truth and --truth-kernel")
    if args.ratios:
        r_m, U_m, K_m = optimize_ratio(f, truth, args.ratios, cfg, method="mhdm")
        r_v, U_v, K_v = optimize_ratio(f, truth, args.ratios, cfg, method="variational")
    else:
        r_m = r_v = cfg.ratio
        state = run_blind(f, cfg)
        U_m, K_m = state.image(), state.kernel()
        acc = run_grid_search(f, cfg.ratio, cfg.lambda0, cfg).accepted
        U_v, K_v = acc.image, acc.kernel
    row = compare_row(
        image_metrics(U_m, K_m, truth, truth_kernel),
        image_metrics(U_v, K_v, truth, truth_kernel),
    )
    row = {"ratio_MHDM": r_m, "ratio_var": r_v, **row}
    out = Path(args.out_dir)
    header = list(row)
    atomic_write_text(out / "compare.csv", csv_text(header, [[row[h] for h in header]]))
    write_png(out / "U_mhdm.png", U_m)
    write_png(out / "U_var.png", U_v)
    write_png(out / "K_mhdm.png", _kernel_preview(K_m), normalize=True)
    write_png(out / "K_var.png", _kernel_preview(K_v), normalize=True)
    atomic_write_text(out / "config.txt", format_config(cfg))
    print(", ".join(f"{k}={format_float(v)}" for k, v in row.items()))
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mhdm", description="Multiscale hierarchical blind deconvolution."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="blur and add noise to an image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kernel", required=True,
                   help="gaussian:VAR | mixture4 | mixture:w:var:ci:cj,... | kernel file")
    p.add_argument("--noise-var", dest="noise_var", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resize", type=_parse_size, help="resample the input to MxN first")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_degrade)

    def observation_args(p):
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--manifest", help="degradation manifest (default: <in>.manifest.json)")
        p.add_argument("--out-dir", dest="out_dir", required=True)
        _add_config_flags(p)

    p = sub.add_parser("blind", help="run the blind MHDM")
    observation_args(p)
    p.add_argument("--truth", help="ground-truth image for metrics")
    p.add_argument("--truth-kernel", dest="truth_kernel", help="ground-truth kernel for metrics")
    p.add_argument("--no-scales", dest="no_scales", action="store_true",
                   help="skip writing per-scale increments")
    p.set_defaults(func=cmd_blind)

    p = sub.add_parser("nonblind", help="sweep the non-blind MHDM over guessed Gaussians")
    observation_args(p)
    p.add_argument("--sigmas", type=_parse_floats, help="comma separated kernel variances")
    p.add_argument("--sigma-range", dest="sigma_range", type=_parse_range, help="lo:hi:count")
    p.add_argument("--truth")
    p.add_argument("--truth-kernel", dest="truth_kernel")
    p.set_defaults(func=cmd_nonblind)

    p = sub.add_parser("compare", help="blind MHDM versus the variational grid search")
    observation_args(p)
    p.add_argument("--truth", required=True)
    p.add_argument("--truth-kernel", dest="truth_kernel", required=True)
    p.add_argument("--ratios", type=_parse_floats,
                   help="mu0/lambda0 values to optimize over (PSNR against truth)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s"
    )
    try:
        return args.func(args)
    except (UsageError, ConfigError, InvalidSigma, InvalidWeights, DimensionMismatch) as exc:
        print(f"mhdm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoRealRoot as exc:
        print(f"mhdm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArithmeticError, MhdmError) as exc:
        print(f"mhdm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"mhdm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
