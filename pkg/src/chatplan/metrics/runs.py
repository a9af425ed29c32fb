"""Batch evaluation of generated plans against a preprocessed dataset."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..core.codecs import decode_plan_png
from ..core.types import ROOM_TYPES, ValidationError
from .iou import IoUReport, iou


@dataclass(frozen=True)
class RunReport:
    mean_micro: float
    mean_macro: float
    evaluated: int
    missing: tuple[str, ...] = field(default=())
    per_sample: dict[str, IoUReport] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "mean_micro": self.mean_micro,
            "mean_macro": self.mean_macro,
            "evaluated": self.evaluated,
            "missing": list(self.missing),
        }


def evaluate_run(manifest_path: str | Path, predictions_dir: str | Path,
                 out_dir: str | Path | None = None) -> RunReport:
    """Mean micro/macro IoU over the manifest's samples.

    Expects ``<predictions_dir>/<sample_id>.png`` for every manifest id;
    missing predictions are listed, excluded, and flagged. Writes the
    per-sample CSV and aggregate JSON when ``out_dir`` is given.
    """
    manifest_path = Path(manifest_path)
    predictions_dir = Path(predictions_dir)
    manifest = json.loads(manifest_path.read_text())
    data_dir = manifest_path.parent

    reports: dict[str, IoUReport] = {}
    missing: list[str] = []
    for entry in manifest["samples"]:
        sample_id = entry["id"]
        pred_path = predictions_dir / f"{sample_id}.png"
        if not pred_path.exists():
            missing.append(sample_id)
            continue
        truth = decode_plan_png((data_dir / sample_id / "plan.png").read_bytes())
        pred = decode_plan_png(pred_path.read_bytes())
        reports[sample_id] = iou(pred, truth)
    if not reports:
        raise ValidationError(
            "no overlap between manifest ids and prediction files"
        )

    run = RunReport(
        mean_micro=sum(r.micro for r in reports.values()) / len(reports),
        mean_macro=sum(r.macro for r in reports.values()) / len(reports),
        evaluated=len(reports),
        missing=tuple(missing),
        per_sample=reports,
    )
    if out_dir is not None:
        write_report(run, out_dir)
    return run


def write_report(run: RunReport, out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["sample_id", "micro", "macro"]
    for t in ROOM_TYPES:
        header += [f"I_{t.value}", f"U_{t.value}"]
    with open(out_dir / "per_sample.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for sample_id in sorted(run.per_sample):
            report = run.per_sample[sample_id]
            row: list = [sample_id, f"{report.micro:.6f}", f"{report.macro:.6f}"]
            for c in range(1, len(ROOM_TYPES) + 1):
                row += [report.intersections.get(c, 0), report.unions.get(c, 0)]
            writer.writerow(row)
    (out_dir / "aggregate.json").write_text(json.dumps(run.to_json_dict(), indent=2))
