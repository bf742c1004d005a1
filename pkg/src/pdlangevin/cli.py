"""Experiment runner: config parsing, image IO, and artifact emission.

Scenarios reproduce the benchmark experiments at desk scale: the 1D
Gaussian model, the 2-pixel total-variation posterior with distance-vs-time
curves, TV / TGV image denoising with mean and variance maps, and
step-size / step-ratio sweeps. Outputs are CSV files, 16-bit PGM images,
and a JSON manifest that makes every run reproducible.

Config files are flat ``key = value`` text (UTF-8, ``#`` comments); every
key can be overridden on the command line as trailing ``key=value``
arguments. Exit codes: 0 success, 2 config error, 3 step-size regime
violation, 4 IO error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path

import numpy as np

from .analytic import GaussModel1D, stationary_cov_pd, target_variance
from .coupling import _stationary_flag, bias_sweep_tau, lambda_sweep
from .metrics import EmpiricalMeasure, moments, pixelwise_variance, psnr, w2_exact
from .models import gauss1d_target, tgv_image_target, tv2pixel_target, tv_image_target
from .samplers import SamplerParams, run_ensemble, validate_params


class ConfigError(Exception):
    """Malformed or inconsistent configuration."""


class RegimeError(Exception):
    """Step sizes violate every supported regime."""


# --- image grid and PGM IO ---

@dataclass
class ImageGrid:
    """A grayscale image with intensities in [0, 1], stored row-major."""

    width: int
    height: int
    intensities: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.intensities, dtype=float).reshape(self.width * self.height)
        if not np.all(np.isfinite(a)):
            raise ValueError("intensities must be finite")
        self.intensities = a

    def as_array2d(self) -> np.ndarray:
        return self.intensities.reshape(self.height, self.width)


def load_image_pgm(path) -> ImageGrid:
    """Read a PGM image (P2 ASCII or P5 binary, maxval <= 65535) and scale
    intensities to [0, 1] by exact division by maxval."""
    raw = Path(path).read_bytes()
    magic = raw[:2]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"not a PGM file: magic bytes {magic!r}")

    # tokenize the header, honoring '#' comments
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3 and pos < len(raw):
        ch = raw[pos : pos + 1]
        if ch == b"#":
            nl = raw.find(b"\n", pos)
            pos = len(raw) if nl < 0 else nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(raw) and not raw[end : end + 1].isspace():
                end += 1
            tokens.append(raw[pos:end])
            pos = end
    if len(tokens) < 3:
        raise ValueError("truncated PGM header")
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as e:
        raise ValueError(f"malformed PGM header fields {tokens}") from e
    if width < 1 or height < 1 or not (0 < maxval <= 65535):
        raise ValueError(f"invalid PGM dimensions/maxval {width}x{height}/{maxval}")

    n = width * height
    if magic == b"P2":
        try:
            values = np.array(raw[pos:].split(), dtype=np.int64)
        except ValueError as e:
            raise ValueError("malformed ASCII PGM pixel data") from e
    else:
        pos += 1  # single whitespace after maxval
        data = raw[pos:]
        if maxval > 255:
            if len(data) < 2 * n:
                raise ValueError(f"truncated P5 data: {len(data)} bytes for {n} 16-bit pixels")
            values = np.frombuffer(data[: 2 * n], dtype=">u2").astype(np.int64)
        else:
            if len(data) < n:
                raise ValueError(f"truncated P5 data: {len(data)} bytes for {n} pixels")
            values = np.frombuffer(data[:n], dtype=np.uint8).astype(np.int64)
    if values.size != n:
        raise ValueError(f"PGM pixel count {values.size} != {n}")
    if values.min() < 0 or values.max() > maxval:
        raise ValueError("PGM pixel values out of range")
    return ImageGrid(width=width, height=height, intensities=values / maxval)


def save_image_pgm(path, img: ImageGrid, maxval: int = 65535) -> None:
    """Write a binary (P5) PGM; intensities are clipped to [0, 1] and
    quantized to ``maxval`` levels (16-bit big-endian above 255)."""
    if not (0 < maxval <= 65535):
        raise ValueError("maxval must be in (0, 65535]")
    q = np.clip(np.round(np.clip(img.intensities, 0.0, 1.0) * maxval), 0, maxval)
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    body = q.astype(">u2" if maxval > 255 else np.uint8).tobytes()
    Path(path).write_bytes(header + body)


def add_gaussian_noise(img: ImageGrid, sigma_eps: float, seed: int = 0) -> ImageGrid:
    """Add iid centered Gaussian noise per pixel (no clipping)."""
    if sigma_eps < 0:
        raise ValueError("sigma_eps must be nonnegative")
    rng = np.random.default_rng(seed)
    noisy = img.intensities + sigma_eps * rng.standard_normal(img.intensities.shape)
    return ImageGrid(width=img.width, height=img.height, intensities=noisy)


def synthetic_phantom(width: int, height: int) -> ImageGrid:
    """Piecewise-constant test image: flat background, a bright rectangle,
    and a mid-gray disk."""
    yy, xx = np.mgrid[0:height, 0:width]
    img = np.full((height, width), 0.2)
    img[height // 6 : height // 2, width // 6 : width // 2] = 0.9
    cx, cy, r = 0.68 * width, 0.65 * height, 0.2 * min(width, height)
    img[(xx - cx) ** 2 + (yy - cy) ** 2 <= r**2] = 0.6
    return ImageGrid(width=width, height=height, intensities=img.ravel())


# --- configuration ---

@dataclass
class ScenarioConfig:
    """All knobs of one experiment run."""

    scenario: str = "gauss1d"
    sampler: str = "ulpda_outer"
    tau: float = 0.0          # 0 means "derive from the scenario rule"
    lam: float = 1.0
    theta: float = 1.0
    alpha: float = 10.0
    alpha1: float = 10.0
    alpha0: float = 20.0
    sigma_eps: float = 0.25
    n_chains: int = 100
    n_steps: int = 1000
    burn_in: int = 0
    thinning: int = 1
    seed: int = 0
    input_image: str = ""
    output_dir: str = "out"
    # gauss1d model and step-size rule
    c_f: float = 1.0
    c_g: float = 2.0
    k: float = 1.5
    c: float = 1e-4
    # image scenarios
    width: int = 32
    height: int = 32
    # tv2pixel
    x_obs1: float = 0.0
    x_obs2: float = 1.0
    n_checkpoints: int = 20
    ref_tau_factor: float = 16.0
    ref_samples: int = 2000
    # sweep scenario
    sweep_kind: str = "lambda"
    sweep_values: str = "1,10,100"

    _SCENARIOS = ("gauss1d", "tv2pixel", "tv_image", "tgv_image", "sweep")
    _SAMPLERS = ("ulpda_outer", "ulpda_inner", "ulpda_general", "ula", "prox_sub", "modified_sde")

    def validate(self) -> None:
        if self.scenario not in self._SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {self._SCENARIOS}")
        if self.sampler not in self._SAMPLERS:
            raise ConfigError(f"unknown sampler {self.sampler!r}; choose from {self._SAMPLERS}")
        for name in ("lam", "theta", "sigma_eps", "alpha", "alpha1", "alpha0"):
            if getattr(self, name) < 0 or (name in ("lam",) and getattr(self, name) <= 0):
                raise ConfigError(f"{name} must be positive")
        for name in ("n_chains", "n_steps", "thinning", "width", "height"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be nonnegative")


_CONFIG_TYPES = {f.name: f.type for f in dc_fields(ScenarioConfig)}


def parse_config(path=None, overrides=()) -> ScenarioConfig:
    """Build a config from a flat key=value file plus override pairs."""
    values: dict[str, str] = {}

    def take(line: str, where: str) -> None:
        line = line.split("#", 1)[0].strip()
        if not line:
            return
        if "=" not in line:
            raise ConfigError(f"expected key=value in {where}: {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"unknown config key {key!r} in {where}")
        values[key] = val

    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        for line in text.splitlines():
            take(line, str(path))
    for ov in overrides:
        take(ov, "command line")

    cfg = ScenarioConfig()
    for key, val in values.items():
        kind = _CONFIG_TYPES[key]
        try:
            if kind in ("float", float):
                setattr(cfg, key, float(val))
            elif kind in ("int", int):
                setattr(cfg, key, int(val))
            else:
                setattr(cfg, key, val)
        except ValueError as e:
            raise ConfigError(f"bad value for {key}: {val!r}") from e
    cfg.validate()
    return cfg


def gauss1d_stepsizes(lam: float, k: float, c: float) -> tuple[float, float]:
    """Step sizes solving sigma/tau = lam and sigma*tau*k^2 = c exactly;
    c <= 1 is required for stability of the discrete iteration."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    if k == 0:
        raise ValueError("k must be nonzero")
    if not (0 < c <= 1):
        raise ValueError(f"c must lie in (0, 1], got {c}")
    tau = math.sqrt(c / lam) / abs(k)
    return tau, lam * tau


# --- scenario execution ---

def _sampler_kind_and_params(cfg: ScenarioConfig, tau: float, target) -> tuple[str, SamplerParams]:
    extra = {}
    if cfg.sampler == "ulpda_general":
        d, m = target.dim_primal, target.dim_dual
        extra["B_X"] = np.hstack([math.sqrt(2.0) * np.eye(d), np.zeros((d, m))])
        extra["B_Y"] = np.zeros((m, d + m))
    variant = {"ulpda_outer": "outer", "ulpda_inner": "inner", "ulpda_general": "general"}
    if cfg.sampler in variant:
        kind = "ulpda"
        noise_variant = variant[cfg.sampler]
    else:
        kind = cfg.sampler
        noise_variant = "outer"
    params = SamplerParams(
        tau=tau, lam=cfg.lam, theta=cfg.theta, noise_variant=noise_variant,
        seed=cfg.seed, **extra,
    )
    return kind, params


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)


def _content_hash(cfg: ScenarioConfig, extra_bytes: bytes = b"") -> str:
    payload = json.dumps(
        {f.name: getattr(cfg, f.name) for f in dc_fields(cfg)}, sort_keys=True
    ).encode("utf-8")
    return hashlib.sha256(payload + extra_bytes).hexdigest()


def _write_manifest(outdir: Path, cfg: ScenarioConfig, report, extra: dict, input_bytes: bytes = b"") -> Path:
    manifest = {f.name: getattr(cfg, f.name) for f in dc_fields(cfg)}
    manifest.update(
        {
            "L": report.L if report is not None else None,
            "stability_regime": bool(report.stability_regime) if report else None,
            "contraction_regime": bool(report.contraction_regime) if report else None,
            "bias_regime": bool(report.bias_regime) if report else None,
            "content_hash": _content_hash(cfg, input_bytes),
        }
    )
    manifest.update(extra)
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return path


def _run_gauss1d(cfg: ScenarioConfig, outdir: Path) -> dict:
    model = GaussModel1D(cfg.c_f, cfg.c_g, cfg.k, lam=cfg.lam)
    target = gauss1d_target(model)
    tau = cfg.tau if cfg.tau > 0 else gauss1d_stepsizes(cfg.lam, cfg.k, cfg.c)[0]
    kind, params = _sampler_kind_and_params(cfg, tau, target)
    report = validate_params(target, params)
    store = run_ensemble(
        target, params, n_chains=cfg.n_chains, n_steps=cfg.n_steps,
        burn_in=cfg.burn_in, thinning=cfg.thinning, kind=kind,
    )
    xm, xc = moments(EmpiricalMeasure(store.x_samples))
    ym, yc = moments(EmpiricalMeasure(store.y_samples))
    _write_csv(
        outdir / "summary.csv",
        ["block", "coordinate", "mean", "variance"],
        [["x", 0, xm[0], xc[0, 0]], ["y", 0, ym[0], yc[0, 0]]],
    )
    counts, edges = np.histogram(store.x_samples[:, 0], bins=50)
    _write_csv(
        outdir / "histogram.csv",
        ["bin_left", "bin_right", "count"],
        [[edges[i], edges[i + 1], int(counts[i])] for i in range(counts.size)],
    )
    extra = {
        "tau": tau,
        "sigma": params.sigma,
        "target_variance": target_variance(model),
        "stationary_variance": stationary_cov_pd(model)[0, 0],
        "empirical_variance": float(xc[0, 0]),
    }
    _write_manifest(outdir, cfg, report, extra)
    return extra


def _run_tv2pixel(cfg: ScenarioConfig, outdir: Path) -> dict:
    x_obs = np.array([cfg.x_obs1, cfg.x_obs2])
    target = tv2pixel_target(x_obs, cfg.sigma_eps, cfg.alpha)
    tau = cfg.tau if cfg.tau > 0 else 1e-2
    kind, params = _sampler_kind_and_params(cfg, tau, target)
    report = validate_params(target, params)

    # lam = infinity proxy at a much finer step as the reference cloud
    ref_params = SamplerParams(tau=tau / cfg.ref_tau_factor, lam=cfg.lam, seed=cfg.seed + 1)
    ref_store = run_ensemble(
        target, ref_params, n_chains=cfg.ref_samples,
        n_steps=cfg.n_steps, burn_in=max(cfg.n_steps - 1, 0), kind="prox_sub",
    )
    reference = EmpiricalMeasure(ref_store.final_x)

    checkpoints = np.unique(
        np.linspace(cfg.n_steps / cfg.n_checkpoints, cfg.n_steps, cfg.n_checkpoints).astype(int)
    )
    curve = []

    def on_checkpoint(step, X, Y):
        n = min(X.shape[0], reference.n)
        mu = EmpiricalMeasure(X[:n])
        nu = EmpiricalMeasure(reference.points[:n])
        curve.append((step, w2_exact(mu, nu, cap=max(2000, n))))

    store = run_ensemble(
        target, params, n_chains=cfg.n_chains, n_steps=cfg.n_steps,
        burn_in=cfg.burn_in, thinning=cfg.thinning, kind=kind,
        checkpoints=checkpoints.tolist(), on_checkpoint=on_checkpoint,
    )
    stationary = _stationary_flag(store.xs)
    _write_csv(outdir / "w2_vs_time.csv", ["step", "w2"], curve)
    xm, xc = moments(EmpiricalMeasure(store.x_samples))
    _write_csv(
        outdir / "summary.csv",
        ["block", "coordinate", "mean", "variance"],
        [["x", i, xm[i], xc[i, i]] for i in range(2)],
    )
    extra = {
        "tau": tau,
        "sigma": params.sigma,
        "final_w2": curve[-1][1] if curve else None,
        "stationary": bool(stationary),
    }
    _write_manifest(outdir, cfg, report, extra)
    return extra


def _run_image(cfg: ScenarioConfig, outdir: Path) -> dict:
    if cfg.input_image:
        clean = load_image_pgm(cfg.input_image)
        width, height = clean.width, clean.height
        input_bytes = Path(cfg.input_image).read_bytes()
    else:
        width, height = cfg.width, cfg.height
        clean = synthetic_phantom(width, height)
        input_bytes = b""
    noisy = add_gaussian_noise(clean, cfg.sigma_eps, seed=cfg.seed + 10_000)
    d = width * height

    if cfg.scenario == "tv_image":
        target = tv_image_target(noisy.intensities, cfg.sigma_eps, cfg.alpha, width, height)
    else:
        target = tgv_image_target(
            noisy.intensities, cfg.sigma_eps, cfg.alpha1, cfg.alpha0, width, height
        )
    tau = cfg.tau if cfg.tau > 0 else 0.02
    L = target.K.norm()
    # keep theta * tau * sigma * L^2 <= 1
    if cfg.theta * tau * cfg.lam * tau * L * L > 1.0:
        tau = math.sqrt(1.0 / (cfg.theta * cfg.lam)) / L
    kind, params = _sampler_kind_and_params(cfg, tau, target)
    report = validate_params(target, params)

    if cfg.scenario == "tgv_image" and kind == "ula":
        raise ConfigError("ula is not available for the non-smooth TGV model")
    init = None
    if cfg.scenario == "tgv_image":
        x0 = np.zeros(target.dim_primal)
        x0[:d] = noisy.intensities
        init = ("point", x0, np.zeros(target.dim_dual))
    elif cfg.scenario == "tv_image":
        init = ("point", noisy.intensities, np.zeros(target.dim_dual))

    store = run_ensemble(
        target, params, n_chains=cfg.n_chains, n_steps=cfg.n_steps,
        burn_in=cfg.burn_in, thinning=cfg.thinning, kind=kind, init=init,
    )
    x_cloud = store.x_samples[:, :d]
    mmse = x_cloud.mean(axis=0)
    var = pixelwise_variance(x_cloud)
    dual_var = pixelwise_variance(store.y_samples)

    save_image_pgm(outdir / "mmse.pgm", ImageGrid(width, height, mmse))
    log_var = np.log10(np.maximum(var, 1e-12))
    lo, hi = log_var.min(), log_var.max()
    norm = (log_var - lo) / (hi - lo) if hi > lo else np.zeros_like(log_var)
    save_image_pgm(outdir / "variance_log10.pgm", ImageGrid(width, height, norm))
    save_image_pgm(outdir / "noisy.pgm", ImageGrid(width, height, np.clip(noisy.intensities, 0, 1)))

    psnr_noisy = psnr(clean.intensities, noisy.intensities)
    psnr_mmse = psnr(clean.intensities, mmse)
    _write_csv(
        outdir / "summary.csv",
        ["metric", "value"],
        [
            ["psnr_noisy_db", psnr_noisy],
            ["psnr_mmse_db", psnr_mmse],
            ["mean_pixel_variance", float(var.mean())],
            ["mean_dual_variance", float(dual_var.mean())],
            ["log10_var_min", float(lo)],
            ["log10_var_max", float(hi)],
        ],
    )
    extra = {
        "tau": params.tau,
        "sigma": params.sigma,
        "psnr_noisy_db": psnr_noisy,
        "psnr_mmse_db": psnr_mmse,
        "mean_pixel_variance": float(var.mean()),
        "mean_dual_variance": float(dual_var.mean()),
    }
    _write_manifest(outdir, cfg, report, extra, input_bytes=input_bytes)
    return extra


def _run_sweep(cfg: ScenarioConfig, outdir: Path) -> dict:
    model = GaussModel1D(cfg.c_f, cfg.c_g, cfg.k, lam=cfg.lam)
    target = gauss1d_target(model)
    try:
        values = [float(s) for s in cfg.sweep_values.split(",") if s.strip()]
    except ValueError as e:
        raise ConfigError(f"bad sweep_values {cfg.sweep_values!r}") from e
    if not values:
        raise ConfigError("sweep_values is empty")
    common = dict(
        n_chains=cfg.n_chains, n_steps=cfg.n_steps, burn_in=cfg.burn_in,
        theta=cfg.theta, seed=cfg.seed, thinning=cfg.thinning,
    )
    if cfg.sweep_kind == "lambda":
        reference = (0.0, target_variance(model))
        result = lambda_sweep(
            target, values, lambda lam: gauss1d_stepsizes(lam, cfg.k, cfg.c)[0],
            reference, **common,
        )
    elif cfg.sweep_kind == "tau":
        ref_model = GaussModel1D(cfg.c_f, cfg.c_g, cfg.k, lam=cfg.lam)
        reference = (0.0, stationary_cov_pd(ref_model)[0, 0])
        result = bias_sweep_tau(target, cfg.lam, values, reference, **common)
    else:
        raise ConfigError(f"unknown sweep_kind {cfg.sweep_kind!r}")
    slope = result.loglog_slope()
    _write_csv(
        outdir / "sweep.csv",
        [cfg.sweep_kind, "w2", "stationary", "loglog_slope"],
        [
            [v, w, bool(s), slope]
            for v, w, s in zip(result.values, result.w2, result.stationary)
        ],
    )
    extra = {"loglog_slope": slope, "sweep_kind": cfg.sweep_kind}
    _write_manifest(outdir, cfg, None, extra)
    return extra


def run_scenario(cfg: ScenarioConfig) -> dict:
    """Execute one configured experiment and write its artifacts."""
    cfg.validate()
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    runners = {
        "gauss1d": _run_gauss1d,
        "tv2pixel": _run_tv2pixel,
        "tv_image": _run_image,
        "tgv_image": _run_image,
        "sweep": _run_sweep,
    }
    return runners[cfg.scenario](cfg, outdir)


# --- command-line entry point ---

def _config_and_overrides(args) -> tuple:
    """Allow omitting the config file: a first positional containing '='
    is an override, not a path."""
    config, overrides = args.config, list(args.overrides)
    if config is not None and "=" in str(config):
        overrides.insert(0, config)
        config = None
    return config, overrides


def _cmd_run(args) -> int:
    cfg = parse_config(*_config_and_overrides(args))
    run_scenario(cfg)
    return 0


def _cmd_sweep(args) -> int:
    cfg = parse_config(*_config_and_overrides(args))
    cfg.scenario = "sweep"
    cfg.validate()
    run_scenario(cfg)
    return 0


def _cmd_validate(args) -> int:
    cfg = parse_config(*_config_and_overrides(args))
    if cfg.scenario == "sweep":
        print("sweep configs are validated per point at run time")
        return 0
    model = GaussModel1D(cfg.c_f, cfg.c_g, cfg.k, lam=cfg.lam)
    if cfg.scenario == "gauss1d":
        target = gauss1d_target(model)
        tau = cfg.tau if cfg.tau > 0 else gauss1d_stepsizes(cfg.lam, cfg.k, cfg.c)[0]
    elif cfg.scenario == "tv2pixel":
        target = tv2pixel_target(np.array([cfg.x_obs1, cfg.x_obs2]), cfg.sigma_eps, cfg.alpha)
        tau = cfg.tau if cfg.tau > 0 else 1e-2
    else:
        if cfg.scenario == "tv_image":
            target = tv_image_target(
                np.zeros(cfg.width * cfg.height), cfg.sigma_eps, cfg.alpha, cfg.width, cfg.height
            )
        else:
            target = tgv_image_target(
                np.zeros(cfg.width * cfg.height), cfg.sigma_eps, cfg.alpha1, cfg.alpha0,
                cfg.width, cfg.height,
            )
        tau = cfg.tau if cfg.tau > 0 else 0.02
    kind, params = _sampler_kind_and_params(cfg, tau, target)
    report = validate_params(target, params)
    print(f"L = {report.L:.6g}")
    print(f"tau sigma L^2 = {report.tau_sigma_L2:.6g}")
    print(f"stability_regime = {report.stability_regime}")
    print(f"contraction_regime = {report.contraction_regime} (theta >= {report.theta_min_contraction:.6g})")
    print(f"bias_regime = {report.bias_regime} (theta >= {report.theta_min_bias:.6g})")
    for note in report.notes:
        print(f"note: {note}")
    if not report.any_regime:
        raise RegimeError("parameters satisfy no supported regime")
    return 0


def _cmd_oracle(args) -> int:
    if args.model != "gauss1d":
        raise ConfigError(f"unknown oracle model {args.model!r}")
    m = GaussModel1D(args.cf, args.cg, args.k, lam=getattr(args, "lambda"))
    cov = stationary_cov_pd(m)
    print(f"target_variance = {target_variance(m):.12g}")
    print(f"stationary_cov = [[{cov[0,0]:.12g}, {cov[0,1]:.12g}], [{cov[1,0]:.12g}, {cov[1,1]:.12g}]]")
    print(f"primal_bias_variance = {cov[0,0] - target_variance(m):.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdlangevin",
        description="Primal-dual Langevin sampling experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (("run", _cmd_run), ("sweep", _cmd_sweep), ("validate", _cmd_validate)):
        p = sub.add_parser(name)
        p.add_argument("config", nargs="?", default=None, help="flat key=value config file")
        p.add_argument("overrides", nargs="*", default=[], help="key=value overrides")
        p.set_defaults(func=fn)

    p = sub.add_parser("oracle")
    p.add_argument("model", help="oracle model name (gauss1d)")
    p.add_argument("--cf", type=float, required=True)
    p.add_argument("--cg", type=float, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--lambda", type=float, required=True)
    p.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except RegimeError as e:
        print(f"regime violation: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        # parameter / regime problems surfaced by validation
        print(f"regime violation: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
