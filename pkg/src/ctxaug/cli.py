"""Command-line entry point wiring the pipeline together.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
All randomness is governed by --seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import imaging
from .augment import AugmentPipeline, parse_ops
from .compose import (
    BackgroundImage,
    BackgroundSetup,
    ForegroundLayer,
    PlanEntry,
    enumerate_pairs,
)
from .convnet import (
    build_paper_network,
    evaluate,
    load_weights,
    parse_config,
    preprocess,
    save_weights,
    train,
    train_config_from,
    write_log_csv,
)
from .dataset import (
    generate,
    load_labeled_images,
    load_masked_examples,
    read_manifest,
    schedule_epoch,
    write_manifest,
)
from .errors import CtxaugError
from .experiment import context_network, run_replicated
from .inpaint import BACKEND, InpaintParams, infill
from .seeding import mix64


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CtxaugError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctxaug",
                                     description="segmentation-based context augmentation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infill", help="patch-match fill of masked regions")
    p.add_argument("--images", required=True, help="directory of input PNGs")
    p.add_argument("--masks", required=True, help="directory of <name>_mask.png or <name>.png masks")
    p.add_argument("--out", required=True)
    p.add_argument("--patch-size", type=int, default=7)
    p.add_argument("--iters", type=int, default=5)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_infill)

    p = sub.add_parser("compose", help="recombine foregrounds and backgrounds")
    _compose_args(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("gen", help="compose plus augmentation ops")
    _compose_args(p)
    p.add_argument("--ops", default="", help="comma-separated ops, e.g. hflip,translate,seg-hflip")
    p.add_argument("--epochs", type=int, default=0,
                   help="generate per-epoch unique pairings instead of the full plan")
    p.add_argument("--manifest", default="manifest.tsv", help="manifest filename inside --out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train the ConvNet on a generated or masked set")
    p.add_argument("--config", required=True, help="key = value training config")
    p.add_argument("--data", required=True, help="directory with manifest.tsv or labels.tsv")
    p.add_argument("--manifest", default=None, help="override manifest path")
    p.add_argument("--out", required=True, help="output directory (weights.bin, log.csv)")
    p.add_argument("--test-data", default=None, help="optional held-out directory")
    p.add_argument("--network", choices=["paper", "context"], default="paper")
    p.add_argument("--threads", type=int, choices=[1], default=1,
                   help="reference mode is single-threaded")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate saved weights")
    p.add_argument("--weights", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--network", choices=["paper", "context"], default="paper")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="replicated desk-scale experiments")
    p.add_argument("--config", required=True,
                   help="key = value file; must set experiment = blobs|context-baseline|context-same-category")
    p.add_argument("--replicates", type=int, default=10)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)
    return parser


def _compose_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--setup", required=True,
                   choices=[s.value for s in BackgroundSetup])
    p.add_argument("--fg", required=True, help="masked-example directory (images+masks+labels.tsv)")
    p.add_argument("--bg", default=None, help="infilled-background directory (PNGs+labels.tsv)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patch-size", type=int, default=7)
    p.add_argument("--iters", type=int, default=5)
    p.add_argument("--levels", type=int, default=3)


def _write_run_log(out_dir: Path, args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    lines = [f"{k} = {v}" for k, v in resolved.items()]
    lines.append(f"nnf_backend = {BACKEND}")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run-log.txt").write_text("\n".join(lines) + "\n")


def _mask_for(masks_dir: Path, name: str) -> Path:
    for candidate in (masks_dir / f"{name}_mask.png", masks_dir / f"{name}.png"):
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(f"no mask for {name} in {masks_dir}")


def cmd_infill(args) -> int:
    images_dir, masks_dir, out_dir = Path(args.images), Path(args.masks), Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_run_log(out_dir, args)
    count = 0
    for img_path in sorted(images_dir.glob("*.png")):
        if img_path.name.endswith("_mask.png"):
            continue
        image = imaging.decode_image(img_path.read_bytes())
        mask = imaging.decode_mask(_mask_for(masks_dir, img_path.stem).read_bytes())
        params = InpaintParams(patch_size=args.patch_size, iterations=args.iters,
                               pyramid_levels=args.levels,
                               rng_seed=mix64(args.seed, img_path.stem))
        (out_dir / img_path.name).write_bytes(imaging.encode_image(infill(image, mask, params)))
        count += 1
    print(f"infilled {count} images -> {out_dir}")
    return 0


def _load_layers(args) -> tuple[dict[str, ForegroundLayer], dict[str, BackgroundImage]]:
    examples = load_masked_examples(args.fg)
    foregrounds = {ex.source_id: ForegroundLayer(ex.image, ex.mask, ex.label, ex.source_id)
                   for ex in examples}
    backgrounds: dict[str, BackgroundImage] = {}
    if args.bg is not None:
        for img, label, sid in load_labeled_images(args.bg):
            backgrounds[sid] = BackgroundImage(img, label, sid)
    return foregrounds, backgrounds


def _needs_bg(setup: BackgroundSetup) -> bool:
    return setup in (BackgroundSetup.ONLY_BG, BackgroundSetup.SAME_CATEGORY_BG_WITH_FG,
                     BackgroundSetup.ALL_CATEGORIES_BG_WITH_FG)


def _run_generate(args, ops_spec: str, epochs: int, manifest_name: str) -> int:
    setup = BackgroundSetup.from_name(args.setup)
    if _needs_bg(setup) and args.bg is None:
        raise ValueError(f"setup {setup.value} requires --bg")
    foregrounds, backgrounds = _load_layers(args)
    pipeline = AugmentPipeline(parse_ops(ops_spec), master_seed=args.seed)
    out_dir = Path(args.out)
    _write_run_log(out_dir, args)
    fg_refs = sorted((f.source_id, f.label) for f in foregrounds.values())
    bg_refs = sorted((b.source_id, b.label) for b in backgrounds.values())
    if epochs > 0:
        if setup not in (BackgroundSetup.SAME_CATEGORY_BG_WITH_FG,
                         BackgroundSetup.ALL_CATEGORIES_BG_WITH_FG):
            raise ValueError("--epochs applies to same-category/all setups only")
        entries = []
        index = 0
        for epoch in range(epochs):
            schedule = schedule_epoch(setup, fg_refs, bg_refs, args.seed, epoch)
            items = [PlanEntry(fid, bid, foregrounds[fid].label) for fid, bid in schedule.pairs]
            entries.extend(generate(items, pipeline, out_dir, foregrounds, backgrounds,
                                    setup=setup, start_index=index, manifest_name=None))
            index += len(items)
        write_manifest(entries, out_dir / manifest_name)
        print(f"generated {len(entries)} images over {epochs} epochs -> {out_dir}")
        return 0
    plan = enumerate_pairs(setup, list(foregrounds.values()), list(backgrounds.values()))
    entries = generate(plan, pipeline, out_dir, foregrounds, backgrounds,
                       manifest_name=manifest_name)
    print(f"generated {len(entries)} images -> {out_dir}")
    return 0


def cmd_compose(args) -> int:
    return _run_generate(args, "", 0, "manifest.tsv")


def cmd_gen(args) -> int:
    return _run_generate(args, args.ops, args.epochs, args.manifest)


def _load_dataset(data_dir: str, manifest: str | None):
    if manifest is not None:
        root = Path(data_dir)
        items = [(imaging.decode_image((root / e.path).read_bytes()), e.label, e.output_id)
                 for e in read_manifest(manifest)]
    else:
        items = load_labeled_images(data_dir)
    x = preprocess([img for img, _, _ in items])
    labels = np.asarray([lbl for _, lbl, _ in items])
    return x, labels


def _network(name: str):
    return build_paper_network() if name == "paper" else context_network()


def cmd_train(args) -> int:
    options = parse_config(args.config)
    config = train_config_from(options)
    x, labels = _load_dataset(args.data, args.manifest)
    test = None
    if args.test_data is not None:
        test = _load_dataset(args.test_data, None)
    spec = _network(args.network)
    out_dir = Path(args.out)
    _write_run_log(out_dir, args)
    params, log = train(spec, x, labels, config, test=test)
    save_weights(out_dir / "weights.bin", params)
    write_log_csv(out_dir / "log.csv", log)
    final = log[-1] if log else None
    if final is not None:
        print(f"trained {config.epochs} epochs: loss {final.loss:.4f} "
              f"train_acc {final.train_acc:.4f}")
    return 0


def cmd_eval(args) -> int:
    params = load_weights(args.weights)
    x, labels = _load_dataset(args.data, None)
    acc = evaluate(_network(args.network), params, x, labels)
    print(f"accuracy {acc:.4f}")
    return 0


def cmd_experiment(args) -> int:
    options = parse_config(args.config)
    name = options.get("experiment")
    if not name:
        raise ValueError("config must set 'experiment = <name>'")
    config = train_config_from(options, replicate_count=args.replicates)
    result = run_replicated(name, config)
    print(f"{result.name}: {result.mean:.4f} +/- {result.std:.4f} "
          f"over {len(result.accuracies)} replicates")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .annotate import SessionStore, create_app

    store = SessionStore(args.store)
    uvicorn.run(create_app(store), host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
