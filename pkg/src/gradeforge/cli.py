"""The ``gradeforge`` command line: grade, train, mix-luts, eval, serve."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .config import load_config


def _add_config_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="YAML config file")


def _cmd_grade(args: argparse.Namespace) -> int:
    import numpy as np

    from .diffusion import generate_lut, load_checkpoint
    from .frames import load_clip, save_clip, select_key_frames
    from .lut import apply_lut_clip, write_cube

    cfg = load_config(args.config)
    checkpoint = args.checkpoint or cfg.server.checkpoint
    if not checkpoint:
        print("error: no checkpoint given (--checkpoint or config/server.checkpoint)",
              file=sys.stderr)
        return 2
    params, sched = load_checkpoint(checkpoint)

    input_clip = load_clip(args.input, fps=args.fps)
    ref_path = Path(args.reference)
    if ref_path.is_dir():
        reference = load_clip(ref_path, fps=args.fps)
    else:
        from .frames import VideoClip, frame_from_png_bytes

        reference = VideoClip([frame_from_png_bytes(ref_path.read_bytes())], fps=1.0)

    t0 = time.perf_counter()
    pair = select_key_frames(input_clip, reference)
    lut = generate_lut(
        input_clip.frames[pair.input_index],
        reference.frames[pair.reference_index],
        params,
        sched,
        steps=args.steps,
        seed=args.seed,
    )
    graded = apply_lut_clip(lut, input_clip, workers=args.workers)
    elapsed = time.perf_counter() - t0

    if args.out_cube:
        Path(args.out_cube).write_text(write_cube(lut, title="gradeforge grade"))
    if args.out_dir:
        save_clip(graded, args.out_dir)
    print(
        f"graded {len(graded)} frames in {elapsed:.2f}s; key pair "
        f"(m={pair.input_index}, n={pair.reference_index}, "
        f"cos={pair.similarity:.4f}); mean |offset| "
        f"{float(np.mean(np.abs(lut.offsets))):.4f}"
    )
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    from .dataset import load_catalog, make_training_samples, toy_catalog
    from .diffusion import TrainConfig, make_schedule, save_checkpoint, train, write_loss_trace

    cfg = load_config(args.config)
    if args.steps is not None:
        cfg.training.steps = args.steps
    if args.batch_size is not None:
        cfg.training.batch_size = args.batch_size
    if args.learning_rate is not None:
        cfg.training.learning_rate = args.learning_rate
    if args.samples is not None:
        cfg.training.samples = args.samples
    if args.seed is not None:
        cfg.training.seed = args.seed

    catalog_dir = args.catalog or cfg.catalog.dir
    if catalog_dir:
        catalog = load_catalog(catalog_dir, cfg.catalog.split_ratio, cfg.catalog.seed)
    else:
        catalog = toy_catalog()
    print(f"catalog: {len(catalog.train_names)} train / {len(catalog.test_names)} test bases")

    print(f"synthesizing {cfg.training.samples} training samples ...")
    samples = make_training_samples(
        catalog, cfg.training.samples, seed=cfg.training.sample_seed
    )
    sched = make_schedule(cfg.schedule.steps, cfg.schedule.beta_start, cfg.schedule.beta_end)
    t0 = time.perf_counter()
    params, trace = train(
        samples,
        sched,
        TrainConfig(
            steps=cfg.training.steps,
            batch_size=cfg.training.batch_size,
            learning_rate=cfg.training.learning_rate,
            seed=cfg.training.seed,
            cond_dropout=cfg.training.cond_dropout,
        ),
    )
    save_checkpoint(args.out, params, sched)
    if args.loss_csv:
        write_loss_trace(args.loss_csv, trace)
    print(
        f"trained {cfg.training.steps} steps in {time.perf_counter() - t0:.1f}s; "
        f"final loss {trace[-1][1]:.5f}; checkpoint -> {args.out}"
    )
    return 0


def _cmd_mix_luts(args: argparse.Namespace) -> int:
    import numpy as np

    from .dataset import load_catalog, toy_catalog, synth_random_lut, write_toy_catalog
    from .lut import write_cube

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.catalog:
        catalog = load_catalog(args.catalog, seed=args.seed)
    else:
        catalog = toy_catalog()
        if args.dump_bases:
            write_toy_catalog(out / "bases")
    rng = np.random.default_rng(args.seed)
    for i in range(args.count):
        lut = synth_random_lut(catalog, rng)
        (out / f"mix{i:04d}.cube").write_text(write_cube(lut, title=f"mix {i}"))
    print(f"wrote {args.count} mixed LUTs to {out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    from .frames import load_clip
    from .metrics import evaluate_clip

    output = load_clip(args.output)
    gt = load_clip(args.gt)
    report = evaluate_clip(output, gt, elapsed=args.elapsed)
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    for key, value in report.summary().items():
        print(f"{key}: {value:.6f}" if isinstance(value, float) else f"{key}: {value}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    cfg = load_config(args.config)
    if args.host:
        cfg.server.host = args.host
    if args.port:
        cfg.server.port = args.port
    app = create_app(
        ServiceConfig(
            store_path=cfg.server.store,
            checkpoint_path=cfg.server.checkpoint,
            catalog_dir=cfg.catalog.dir,
            workers=cfg.server.workers,
        )
    )
    uvicorn.run(app, host=cfg.server.host, port=cfg.server.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradeforge")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grade", help="grade an input clip against a reference")
    _add_config_arg(p)
    p.add_argument("--input", required=True, help="directory of input frames")
    p.add_argument("--reference", required=True, help="reference frame dir or single PNG")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--out-cube", default=None, help="write the generated LUT here")
    p.add_argument("--out-dir", default=None, help="write graded frames here")
    p.add_argument("--fps", type=float, default=None)
    p.add_argument("--steps", type=int, default=25, help="DDIM sampling steps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=2)
    p.set_defaults(func=_cmd_grade)

    p = sub.add_parser("train", help="train the LUT denoiser on synthetic triples")
    _add_config_arg(p)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--catalog", default=None, help=".cube base directory (default: bundled)")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--loss-csv", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("mix-luts", help="sample mixed LUTs from a base catalog")
    p.add_argument("--catalog", default=None)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-bases", action="store_true",
                   help="also write the bundled bases when no catalog is given")
    p.set_defaults(func=_cmd_mix_luts)

    p = sub.add_parser("eval", help="PSNR/SSIM/blur report for a graded clip")
    p.add_argument("--output", required=True, help="graded frame directory")
    p.add_argument("--gt", required=True, help="ground-truth frame directory")
    p.add_argument("--csv", default=None)
    p.add_argument("--elapsed", type=float, default=0.0)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the grading HTTP service")
    _add_config_arg(p)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
