"""Command-line drivers.

Exit status: 0 on success, 1 for configuration problems, 2 for failures while
running. ``ZENN_LOG_LEVEL`` (DEBUG, INFO, WARNING, ...) controls log verbosity.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .activations import Activation
from .architectures import ImageModelSpec, build_image_model
from .charfn import charfn_mc, charfn_relu_uniform, charfn_rows_to_csv, relu_uniform_family
from .config import ImageModelConfig, load_config
from .convergence import convergence_tail
from .cumulants import (
    network_cumulant_mc,
    perceptron_cumulant_function,
    reports_to_csv,
    zenn_cumulant_series,
)
from .data import dataset_to_csv, load_jena_csv, load_ppm, random_split, save_ppm, synth1d
from .exceptions import ConfigError, TrainingDivergedError
from .initialization import ShallowArch, init_model
from .kernel import zentk_gram
from .serialization import save_model
from .training import TrainConfig, mse, psnr, train_gd

LOG_ENV = "ZENN_LOG_LEVEL"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("zenn")


def _setup_logging() -> None:
    name = os.environ.get(LOG_ENV, "WARNING").upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.setLevel(level)


class _Context:
    def __init__(self, config_path):
        self.base = Path(config_path).resolve().parent

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base / p

    def out(self, p) -> Path:
        target = self.path(p)
        target.parent.mkdir(parents=True, exist_ok=True)
        return target


def _shallow_arch(m) -> ShallowArch:
    return ShallowArch(m.kind, m.n, Activation.parse(m.activation), alpha=m.alpha, beta=m.beta)


def _load_dataset(cfg, ctx):
    d = cfg.data
    if d.source == "synth1d":
        ds = synth1d(d.n_points, d.x_range, d.seed, d.noise_std)
    elif d.source == "jena":
        ds = load_jena_csv(ctx.path(d.path), d.column, d.max_rows)
    else:
        ds = load_ppm(ctx.path(d.path))
    if d.train_fraction is not None:
        ds = random_split(ds, d.train_fraction, d.split_seed)
    return ds


def _build_model(cfg):
    if isinstance(cfg.model, ImageModelConfig):
        return build_image_model(ImageModelSpec(**cfg.model.model_dump()))
    return init_model(_shallow_arch(cfg.model), cfg.init.to_spec())


def _train(cfg, ctx, image: bool) -> int:
    try:
        dataset = _load_dataset(cfg, ctx)
    except FileNotFoundError as exc:
        raise ConfigError(f"data file not found: {exc.filename}") from None
    model = _build_model(cfg)
    t = cfg.train
    tc = TrainConfig(learning_rate=t.learning_rate, epochs=t.epochs, seed=t.seed, log_interval=t.log_interval,
                     weight_decay=t.weight_decay, psnr=cfg.task == "image",
                     record_wall_time=t.record_wall_time)

    def report(rec):
        extra = "" if rec.psnr is None else f" psnr={rec.psnr:.4f}"
        log.info("epoch %d train_mse=%.6g%s", rec.epoch, rec.train_mse, extra)

    try:
        trained, trace = train_gd(model, dataset, tc, callback=report)
    except TrainingDivergedError as exc:
        if exc.trace is not None and len(exc.trace):
            exc.trace.to_csv(ctx.out(cfg.output.trace))
        print(f"error: training diverged at epoch {exc.epoch}", file=sys.stderr)
        return EXIT_RUNTIME
    trace.to_csv(ctx.out(cfg.output.trace))
    save_model(trained, ctx.out(cfg.output.model))
    final = trace[-1]
    line = f"epochs={final.epoch} train_mse={final.train_mse!r}"
    if final.val_mse is not None:
        line += f" val_mse={final.val_mse!r}"
    if final.psnr is not None:
        line += f" val_psnr={final.psnr!r}"
    if image:
        pred = np.asarray(trained.forward(dataset.X))
        save_ppm(dataset.to_array(pred), ctx.out(cfg.output.image))
        line += f" full_psnr={psnr(np.clip(pred, 0, 1), dataset.Y)!r}"
    print(line)
    return EXIT_OK


def cmd_train(cfg, ctx) -> int:
    return _train(cfg, ctx, image=cfg.task == "image")


def cmd_image_regress(cfg, ctx) -> int:
    if cfg.task != "image":
        raise ConfigError("image-regress needs task: image")
    return _train(cfg, ctx, image=True)


def cmd_zentk(cfg, ctx) -> int:
    model = init_model(_shallow_arch(cfg.model), cfg.init.to_spec())
    K = zentk_gram(model, cfg.points)
    K.to_csv(ctx.out(cfg.output))
    print(f"points={K.size} smallest_eigenvalue={K.smallest_eigenvalue()!r}")
    return EXIT_OK


def cmd_cumulants(cfg, ctx) -> int:
    act = Activation.parse(cfg.activation)
    spec = cfg.init.to_spec()
    k = 0 if cfg.x == 0 else act.growth_order
    if any(math.isinf(n) for n in cfg.width_values()) and cfg.order * (cfg.alpha - k) <= 1:
        raise ConfigError(
            f"the infinite-width cumulant series needs r*(alpha - k) > 1; "
            f"got r={cfg.order}, alpha={cfg.alpha}, k={k}"
        )
    lam = (cfg.perceptron_cumulant if cfg.perceptron_cumulant is not None
           else perceptron_cumulant_function(spec, act, cfg.order, cfg.quadrature_nodes))
    rows = []
    for n in cfg.width_values():
        analytic = zenn_cumulant_series(lam, cfg.order, cfg.alpha, cfg.x, n, growth_order=act.growth_order)
        mc = err = None
        if cfg.samples and not math.isinf(n):
            arch = ShallowArch("zenn", n, act, alpha=cfg.alpha)
            mc, err = network_cumulant_mc(arch, spec, cfg.x, cfg.order, cfg.samples)
        rows.append(("inf" if math.isinf(n) else n, analytic, mc, err))
        log.info("N=%s analytic=%r mc=%r stderr=%r", *rows[-1])
    reports_to_csv(rows, ctx.out(cfg.output))
    print(f"rows={len(rows)} order={cfg.order}")
    return EXIT_OK


def cmd_charfn(cfg, ctx) -> int:
    rows = []
    for x in cfg.x:
        mc = err = None
        if cfg.samples:
            arch, spec = relu_uniform_family(cfg.n, cfg.alpha, cfg.L, cfg.B, cfg.seed)
            mc, err = charfn_mc(arch, spec, x, np.asarray(cfg.t), cfg.samples)
        for i, t in enumerate(cfg.t):
            value = charfn_relu_uniform(x, t, cfg.L, cfg.B, cfg.alpha, cfg.n)
            if mc is None:
                rows.append((x, t, value.real, value.imag, None, None, None))
            else:
                rows.append((x, t, value.real, value.imag, mc[i].real, mc[i].imag, err[i]))
    charfn_rows_to_csv(rows, ctx.out(cfg.output))
    print(f"rows={len(rows)}")
    return EXIT_OK


def cmd_converge(cfg, ctx) -> int:
    arch = _shallow_arch(cfg.model)
    grid = np.linspace(cfg.grid.lo, cfg.grid.hi, cfg.grid.points)
    report = convergence_tail(arch, cfg.widths, grid, cfg.seeds, cfg.init.to_spec())
    report.to_csv(ctx.out(cfg.output))
    print(f"slope={report.slope!r} final_sup_diff={float(report.sup_diff[:, -1].mean())!r}")
    return EXIT_OK


def cmd_synth1d(cfg, ctx) -> int:
    d = cfg.data
    ds = synth1d(d.n_points, d.x_range, d.seed, d.noise_std)
    if d.train_fraction is not None:
        ds = random_split(ds, d.train_fraction, d.split_seed)
    dataset_to_csv(ds, ctx.out(cfg.output))
    print(f"points={len(ds)}")
    return EXIT_OK


COMMANDS = {
    "train": (cmd_train, "train a network on a 1-D or image regression task"),
    "image-regress": (cmd_image_regress, "fit an image with one of the deep first-layer variants"),
    "zentk": (cmd_zentk, "tangent-kernel Gram matrix of a randomly initialized shallow ZeNN"),
    "cumulants": (cmd_cumulants, "cumulant partial sums, optionally against Monte-Carlo k-statistics"),
    "charfn": (cmd_charfn, "closed-form characteristic function of the ReLU-uniform network"),
    "converge": (cmd_converge, "sup-norm differences of nested-width networks"),
    "synth1d": (cmd_synth1d, "emit the synthetic 1-D dataset as CSV"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zenn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("config", help="YAML or JSON experiment file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field, e.g. --set train.epochs=10 (repeatable)")
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    handler = COMMANDS[args.command][0]
    try:
        cfg = load_config(args.command, args.config, args.overrides)
        return handler(cfg, _Context(args.config))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every other failure is a runtime error
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
