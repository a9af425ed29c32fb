"""Directory-level preprocessing: annotated rasters -> training triples."""

from __future__ import annotations

import json
import logging
import os
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..core.codecs import (
    PALETTE_VERSION,
    decode_outline_png,
    decode_plan_png,
    encode_outline_png,
    encode_plan_png,
)
from ..core.raster import OutlineMask, PlanGrid, grid_to_tensor
from ..core.types import RoomsDocument, ValidationError
from .connections import analyze_connections
from .labeling import LabelingThresholds, assign_labels
from .rasterize import rasterize64
from .vectorize import VectorPlan, vectorize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProcessedSample:
    outline: OutlineMask
    plan: PlanGrid
    document: RoomsDocument
    vector: VectorPlan


def load_annotated_raster(path: str | Path) -> np.ndarray:
    img = Image.open(path)
    if img.mode not in ("L", "P"):
        raise ValidationError(
            f"annotated raster must be single-channel, got mode {img.mode}"
        )
    return np.asarray(img, dtype=np.uint8)


def process_raster(
    raster256: np.ndarray,
    thresholds: LabelingThresholds = LabelingThresholds(),
) -> ProcessedSample:
    """vectorize -> 64x64 rasters -> connections -> labeled document."""
    vp = vectorize(raster256)
    outline, plan = rasterize64(vp)
    links = analyze_connections(vp)
    document = assign_labels(vp, thresholds, links=links)
    return ProcessedSample(outline=outline, plan=plan, document=document, vector=vp)


def _split_of(sample_id: str, val_fraction: float) -> str:
    return "val" if zlib.crc32(sample_id.encode()) % 1000 < val_fraction * 1000 else "train"


def preprocess_directory(
    in_dir: str | Path,
    out_dir: str | Path,
    val_fraction: float = 0.1,
    thresholds: LabelingThresholds = LabelingThresholds(),
) -> Path:
    """Process every PNG in ``in_dir`` into a per-sample bundle.

    Writes <out_dir>/<id>/{outline.png, plan.png, rooms.json} per sample
    (atomically, via a temporary name) and a manifest.json listing ids and
    split assignment. Returns the manifest path.
    """
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    paths = sorted(in_dir.glob("*.png"))
    if not paths:
        raise ValidationError(f"no .png rasters found in {in_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)
    samples = []
    for path in paths:
        sample_id = path.stem
        try:
            processed = process_raster(load_annotated_raster(path), thresholds)
        except ValidationError as exc:
            log.warning("skipping %s: %s", path.name, exc)
            continue
        tmp = out_dir / f".{sample_id}.tmp"
        tmp.mkdir(exist_ok=True)
        (tmp / "outline.png").write_bytes(encode_outline_png(processed.outline))
        (tmp / "plan.png").write_bytes(encode_plan_png(processed.plan))
        (tmp / "rooms.json").write_text(processed.document.to_json(indent=2))
        final = out_dir / sample_id
        if final.exists():
            for old in final.iterdir():
                old.unlink()
            final.rmdir()
        os.replace(tmp, final)
        samples.append({"id": sample_id, "split": _split_of(sample_id, val_fraction)})
    if not samples:
        raise ValidationError("no sample produced a valid triple")
    manifest = {
        "palette_version": PALETTE_VERSION,
        "count": len(samples),
        "samples": samples,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return manifest_path


def load_training_triples(
    manifest_path: str | Path, split: str | None = "train", limit: int | None = None
) -> list[tuple[np.ndarray, OutlineMask, RoomsDocument]]:
    """(plan tensor, outline, document) triples for the requested split."""
    manifest_path = Path(manifest_path)
    data_dir = manifest_path.parent
    manifest = json.loads(manifest_path.read_text())
    triples = []
    for entry in manifest["samples"]:
        if split is not None and entry["split"] != split:
            continue
        d = data_dir / entry["id"]
        outline = decode_outline_png((d / "outline.png").read_bytes())
        plan = decode_plan_png((d / "plan.png").read_bytes())
        document = RoomsDocument.from_json((d / "rooms.json").read_text())
        triples.append((grid_to_tensor(plan), outline, document))
        if limit is not None and len(triples) >= limit:
            break
    return triples
