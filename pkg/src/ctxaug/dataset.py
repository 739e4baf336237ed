"""STL-10 ingestion, subset selection, epoch-unique pairing, and the
provenance manifest for generated images."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import imaging
from .augment import AugmentPipeline, apply_pipeline
from .compose import (
    BackgroundImage,
    BackgroundSetup,
    CompositePlan,
    ForegroundLayer,
    MaskedExample,
    PlanEntry,
    composite,
    gray_background,
    mean_background,
)
from .errors import (
    CountMismatch,
    DuplicateOutputId,
    InsufficientClassCount,
    LabelOutOfRange,
    MalformedRecord,
    SizeMismatch,
)
from .seeding import generator, mix64

CATEGORY_NAMES = ("airplane", "bird", "car", "cat", "deer",
                  "dog", "horse", "monkey", "ship", "truck")
STL10_SIZE = 96
STL10_RECORD_BYTES = 3 * STL10_SIZE * STL10_SIZE  # 27648

MANIFEST_HEADER = "ctxaug-manifest v1"
MANIFEST_SCHEMA_VERSION = 1
_NULL = "-"


def label_name(label_id: int) -> str:
    if not 0 <= label_id < len(CATEGORY_NAMES):
        raise LabelOutOfRange(f"label id {label_id} outside 0..9")
    return CATEGORY_NAMES[label_id]


def label_id(name: str) -> int:
    try:
        return CATEGORY_NAMES.index(name)
    except ValueError:
        raise LabelOutOfRange(f"unknown category name {name!r}") from None


# -- STL-10 binary layout ------------------------------------------------------

def load_stl10(data_path: str | Path, label_path: str | Path) -> list[tuple[np.ndarray, int]]:
    """Read the published binary layout: per image 3 channel planes of
    96x96 bytes, column-major within each plane; label bytes are 1..10."""
    raw = Path(data_path).read_bytes()
    if len(raw) == 0 or len(raw) % STL10_RECORD_BYTES:
        raise SizeMismatch(
            f"{data_path}: {len(raw)} bytes is not a positive multiple of {STL10_RECORD_BYTES}")
    n = len(raw) // STL10_RECORD_BYTES
    labels_raw = np.frombuffer(Path(label_path).read_bytes(), dtype=np.uint8)
    if len(labels_raw) != n:
        raise SizeMismatch(f"{label_path}: {len(labels_raw)} labels for {n} images")
    if labels_raw.min() < 1 or labels_raw.max() > 10:
        raise LabelOutOfRange("label bytes must be in 1..10")
    planes = np.frombuffer(raw, dtype=np.uint8).reshape(n, 3, STL10_SIZE, STL10_SIZE)
    images = planes.transpose(0, 3, 2, 1).copy()  # (n, y, x, channel)
    return [(images[i], int(labels_raw[i]) - 1) for i in range(n)]


def select_subset(examples: Sequence[tuple[np.ndarray, int]], per_class: int,
                  seed: int) -> list[tuple[np.ndarray, int]]:
    """Seeded per-class shuffle; take the first `per_class` of each class,
    output ordered by (class, draw index)."""
    by_class: dict[int, list[int]] = {}
    for idx, (_, lbl) in enumerate(examples):
        by_class.setdefault(lbl, []).append(idx)
    chosen: list[tuple[np.ndarray, int]] = []
    for lbl in sorted(by_class):
        indices = by_class[lbl]
        if len(indices) < per_class:
            raise InsufficientClassCount(
                f"class {lbl} has {len(indices)} examples, need {per_class}")
        order = generator(seed, lbl).permutation(len(indices))[:per_class]
        chosen.extend(examples[indices[i]] for i in order)
    return chosen


# -- epoch-unique pairing -------------------------------------------------------

@dataclass(frozen=True)
class EpochSchedule:
    epoch: int
    pairs: tuple[tuple[str, str], ...]  # (fg id, bg id)


def schedule_epoch(setup: BackgroundSetup, fgs: Sequence[tuple[str, int]],
                   bgs: Sequence[tuple[str, int]], seed: int, epoch: int) -> EpochSchedule:
    """Pair every foreground with exactly one background for this epoch via a
    seeded permutation (one per category in SameCategory mode)."""
    if setup is BackgroundSetup.SAME_CATEGORY_BG_WITH_FG:
        fg_by_class: dict[int, list[str]] = {}
        bg_by_class: dict[int, list[str]] = {}
        for fid, lbl in fgs:
            fg_by_class.setdefault(lbl, []).append(fid)
        for bid, lbl in bgs:
            bg_by_class.setdefault(lbl, []).append(bid)
        pairs: list[tuple[str, str]] = []
        for lbl in sorted(fg_by_class):
            f_ids = sorted(fg_by_class[lbl])
            b_ids = sorted(bg_by_class.get(lbl, []))
            if len(f_ids) != len(b_ids):
                raise CountMismatch(
                    f"category {lbl}: {len(f_ids)} foregrounds vs {len(b_ids)} backgrounds")
            perm = generator(seed, epoch, lbl).permutation(len(b_ids))
            pairs.extend((fid, b_ids[perm[i]]) for i, fid in enumerate(f_ids))
        return EpochSchedule(epoch, tuple(pairs))
    if len(fgs) != len(bgs):
        raise CountMismatch(f"{len(fgs)} foregrounds vs {len(bgs)} backgrounds")
    f_ids = sorted(fid for fid, _ in fgs)
    b_ids = sorted(bid for bid, _ in bgs)
    perm = generator(seed, epoch).permutation(len(b_ids))
    return EpochSchedule(epoch, tuple((fid, b_ids[perm[i]]) for i, fid in enumerate(f_ids)))


# -- manifest -------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    output_id: str
    fg_source_id: str | None
    bg_source_id: str | None
    setup: str
    label: int
    ops: tuple[str, ...]
    seed: int
    path: str


def write_manifest(entries: Iterable[ManifestEntry], path: str | Path) -> None:
    seen: set[str] = set()
    lines = [MANIFEST_HEADER]
    for e in entries:
        if e.output_id in seen:
            raise DuplicateOutputId(e.output_id)
        seen.add(e.output_id)
        lines.append("\t".join([
            str(MANIFEST_SCHEMA_VERSION),
            e.output_id,
            e.fg_source_id if e.fg_source_id is not None else _NULL,
            e.bg_source_id if e.bg_source_id is not None else _NULL,
            e.setup,
            str(e.label),
            ",".join(e.ops) if e.ops else _NULL,
            str(e.seed),
            e.path,
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0] != MANIFEST_HEADER:
        raise MalformedRecord(f"{path}: missing '{MANIFEST_HEADER}' header")
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 9:
            raise MalformedRecord(f"{path}:{lineno}: expected 9 fields, got {len(fields)}")
        version, output_id, fg, bg, setup, lbl, ops, seed, rel = fields
        if version != str(MANIFEST_SCHEMA_VERSION):
            raise MalformedRecord(f"{path}:{lineno}: unsupported schema version {version}")
        if output_id in seen:
            raise DuplicateOutputId(output_id)
        seen.add(output_id)
        try:
            entries.append(ManifestEntry(
                output_id,
                None if fg == _NULL else fg,
                None if bg == _NULL else bg,
                setup,
                int(lbl),
                () if ops == _NULL else tuple(ops.split(",")),
                int(seed),
                rel,
            ))
        except ValueError as exc:
            raise MalformedRecord(f"{path}:{lineno}: {exc}") from exc
    return entries


# -- generation -----------------------------------------------------------------

def generate(plan_items: Iterable[PlanEntry] | CompositePlan, pipeline: AugmentPipeline,
             out_dir: str | Path, foregrounds: Mapping[str, ForegroundLayer],
             backgrounds: Mapping[str, BackgroundImage], setup: BackgroundSetup | None = None,
             start_index: int = 0, manifest_name: str | None = "manifest.tsv") -> list[ManifestEntry]:
    """Materialize plan items through the pipeline: PNG files plus a manifest
    (suppressed when manifest_name is None, for callers that batch epochs).

    Deterministic given the pipeline's master seed; on failure every file
    written so far is removed.
    """
    if isinstance(plan_items, CompositePlan):
        setup = plan_items.setup
        plan_items = plan_items.entries()
    if setup is None:
        raise ValueError("setup is required when passing raw plan entries")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries: list[ManifestEntry] = []
    written: list[Path] = []
    seen_ids: set[str] = set()
    try:
        for offset, item in enumerate(plan_items):
            item_index = start_index + offset
            base = _base_image(item, setup, foregrounds, backgrounds)
            fg = foregrounds[item.fg_id] if item.fg_id is not None else None
            image, ops_desc = apply_pipeline(pipeline, fg, base, item_index)
            ops_digest = format(mix64(pipeline.master_seed, item_index, *ops_desc), "016x")[:8]
            fg_part = item.fg_id if item.fg_id is not None else "none"
            bg_part = item.bg_id if item.bg_id is not None else "none"
            stem = f"{fg_part}_{bg_part}_{ops_digest}"
            rel = Path(setup.value) / str(item.label) / f"{stem}.png"
            output_id = rel.with_suffix("").as_posix()
            if output_id in seen_ids:
                raise DuplicateOutputId(output_id)
            seen_ids.add(output_id)
            target = out / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(imaging.encode_image(image))
            written.append(target)
            entries.append(ManifestEntry(output_id, item.fg_id, item.bg_id, setup.value,
                                         item.label, tuple(ops_desc),
                                         pipeline.master_seed, rel.as_posix()))
        if manifest_name is not None:
            write_manifest(entries, out / manifest_name)
    except Exception:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return entries


def _base_image(item: PlanEntry, setup: BackgroundSetup,
                foregrounds: Mapping[str, ForegroundLayer],
                backgrounds: Mapping[str, BackgroundImage]) -> np.ndarray:
    if setup is BackgroundSetup.ONLY_BG:
        return backgrounds[item.bg_id].image
    fg = foregrounds[item.fg_id]
    if setup is BackgroundSetup.GRAY_BG_WITH_FG:
        return gray_background(fg)
    if setup is BackgroundSetup.MEAN_BG_WITH_FG:
        return mean_background(fg, fg.image)
    return backgrounds[item.bg_id].image


# -- masked-example directories ---------------------------------------------

def save_masked_examples(examples: Iterable[MaskedExample], out_dir: str | Path) -> int:
    """Write the on-disk masked-example layout: <id>.png, <id>_mask.png and a
    labels.tsv mapping ids to label ids."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for ex in examples:
        (out / f"{ex.source_id}.png").write_bytes(imaging.encode_image(ex.image))
        (out / f"{ex.source_id}_mask.png").write_bytes(imaging.encode_mask(ex.mask))
        rows.append((ex.source_id, ex.label))
    rows.sort()
    (out / "labels.tsv").write_text(
        "".join(f"{sid}\t{lbl}\n" for sid, lbl in rows))
    return len(rows)


def load_masked_examples(in_dir: str | Path) -> list[MaskedExample]:
    root = Path(in_dir)
    labels_file = root / "labels.tsv"
    if not labels_file.is_file():
        raise FileNotFoundError(f"{labels_file} not found")
    examples = []
    for line in labels_file.read_text().splitlines():
        if not line:
            continue
        sid, lbl = line.split("\t")
        image = imaging.decode_image((root / f"{sid}.png").read_bytes())
        mask = imaging.decode_mask((root / f"{sid}_mask.png").read_bytes())
        examples.append(MaskedExample(image, mask, int(lbl), sid))
    return examples


def load_labeled_images(in_dir: str | Path) -> list[tuple[np.ndarray, int, str]]:
    """Load a directory of labeled PNGs: either a generated set (manifest.tsv)
    or a plain labels.tsv directory."""
    root = Path(in_dir)
    manifest = root / "manifest.tsv"
    out: list[tuple[np.ndarray, int, str]] = []
    if manifest.is_file():
        for e in read_manifest(manifest):
            img = imaging.decode_image((root / e.path).read_bytes())
            out.append((img, e.label, e.output_id))
        return out
    labels_file = root / "labels.tsv"
    if not labels_file.is_file():
        raise FileNotFoundError(f"{in_dir} has neither manifest.tsv nor labels.tsv")
    for line in labels_file.read_text().splitlines():
        if not line:
            continue
        sid, lbl = line.split("\t")
        img = imaging.decode_image((root / f"{sid}.png").read_bytes())
        out.append((img, int(lbl), sid))
    return out
