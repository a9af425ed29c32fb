import json

import numpy as np
import pytest

from chatplan.core import (
    GRID_SIZE,
    PlanGrid,
    RoomSpec,
    RoomType,
    RoomsDocument,
    SizeType,
    LocationType,
    ValidationError,
    encode_plan_png,
)
from chatplan.metrics import evaluate_run, iou, parsing_accuracy


def plan_from(small: np.ndarray) -> PlanGrid:
    grid = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.uint8)
    grid[: small.shape[0], : small.shape[1]] = small
    return PlanGrid(grid=grid)


def brute_force_iou(a: np.ndarray, b: np.ndarray):
    """Independent oracle: explicit per-pixel loops."""
    inter: dict[int, int] = {}
    union: dict[int, int] = {}
    for category in range(1, 14):
        i_count = 0
        u_count = 0
        for r in range(a.shape[0]):
            for c in range(a.shape[1]):
                pa = a[r, c] == category
                pb = b[r, c] == category
                if pa and pb:
                    i_count += 1
                if pa or pb:
                    u_count += 1
        if u_count:
            inter[category] = i_count
            union[category] = u_count
    if not union:
        return 1.0, 1.0
    micro = sum(inter.values()) / sum(union.values())
    macro = sum(inter[c] / union[c] for c in union) / len(union)
    return micro, macro


class TestIoU:
    def test_identical_plans_score_one(self):
        rng = np.random.default_rng(0)
        plan = plan_from(rng.integers(0, 14, size=(64, 64)).astype(np.uint8))
        report = iou(plan, plan)
        assert report.micro == 1.0 and report.macro == 1.0

    def test_worked_example(self):
        # type1: I=2, U=6; type2: I=3, U=3 on a 4x4 region.
        pred = np.zeros((4, 4), dtype=np.uint8)
        truth = np.zeros((4, 4), dtype=np.uint8)
        pred[0, 0:4] = 1          # pred type1: 4 cells
        truth[0, 2:4] = 1         # overlap 2
        truth[1, 0:2] = 1         # 2 more truth-only cells -> U = 6
        pred[2, 0:3] = 2
        truth[2, 0:3] = 2         # type2 identical: I = U = 3
        report = iou(plan_from(pred), plan_from(truth))
        assert report.micro == pytest.approx(5 / 9, abs=1e-12)
        assert report.macro == pytest.approx((1 / 3 + 1) / 2, abs=1e-12)

    def test_disjoint_single_type_plans(self):
        pred = np.zeros((4, 4), dtype=np.uint8)
        truth = np.zeros((4, 4), dtype=np.uint8)
        pred[0, 0] = 3
        truth[3, 3] = 3
        report = iou(plan_from(pred), plan_from(truth))
        assert report.micro == 0.0 and report.macro == 0.0

    def test_type_absent_from_both_excluded_from_R(self):
        pred = np.zeros((4, 4), dtype=np.uint8)
        truth = np.zeros((4, 4), dtype=np.uint8)
        pred[0, :2] = 1
        truth[0, :2] = 1
        truth[1, :2] = 2  # type 2 only in truth: I=0, U=2 counts toward R
        report = iou(plan_from(pred), plan_from(truth))
        assert report.num_types == 2
        assert report.macro == pytest.approx(0.5)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        a = plan_from(rng.integers(0, 5, size=(64, 64)).astype(np.uint8))
        b = plan_from(rng.integers(0, 5, size=(64, 64)).astype(np.uint8))
        ra, rb = iou(a, b), iou(b, a)
        assert ra.micro == rb.micro and ra.macro == rb.macro

    def test_micro_bounded_by_per_type_extremes(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a = plan_from(rng.integers(0, 4, size=(8, 8)).astype(np.uint8))
            b = plan_from(rng.integers(0, 4, size=(8, 8)).astype(np.uint8))
            report = iou(a, b)
            if report.num_types and all(report.unions.values()):
                ratios = [report.per_type_ratio(c) for c in report.unions]
                assert min(ratios) - 1e-12 <= report.micro <= max(ratios) + 1e-12

    def test_matches_brute_force_on_random_grids(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            a = rng.integers(0, 3, size=(8, 8)).astype(np.uint8)
            b = rng.integers(0, 3, size=(8, 8)).astype(np.uint8)
            report = iou(plan_from(a), plan_from(b))
            micro, macro = brute_force_iou(a, b)
            assert report.micro == micro
            assert report.macro == macro

def doc(*specs):
    return RoomsDocument(rooms=tuple(specs))


class TestParsingAccuracy:
    def test_identity(self):
        d = doc(
            RoomSpec(name="a", type=RoomType.Kitchen, size=SizeType.M,
                     location=LocationType.north),
            RoomSpec(name="b", type=RoomType.Balcony),
        )
        acc = parsing_accuracy(d, d)
        assert (acc.type, acc.size, acc.location) == (1.0, 1.0, 1.0)

    def test_one_of_two_wrong_location(self):
        annotated = doc(
            RoomSpec(name="a", type=RoomType.Kitchen, location=LocationType.north),
            RoomSpec(name="b", type=RoomType.Balcony, location=LocationType.south),
        )
        parsed = doc(
            RoomSpec(name="a", type=RoomType.Kitchen, location=LocationType.north),
            RoomSpec(name="b", type=RoomType.Balcony, location=LocationType.east),
        )
        assert parsing_accuracy(parsed, annotated).location == 0.5

    def test_three_annotated_two_parsed(self):
        annotated = doc(
            RoomSpec(name="a", type=RoomType.Kitchen),
            RoomSpec(name="b", type=RoomType.Balcony),
            RoomSpec(name="c", type=RoomType.Storage),
        )
        parsed = doc(
            RoomSpec(name="a", type=RoomType.Kitchen),
            RoomSpec(name="b", type=RoomType.Balcony),
        )
        assert parsing_accuracy(parsed, annotated).type == pytest.approx(2 / 3)

    def test_fallback_match_by_type_and_order(self):
        annotated = doc(
            RoomSpec(name="bedroom one", type=RoomType.SecondRoom, size=SizeType.M),
            RoomSpec(name="bedroom two", type=RoomType.SecondRoom, size=SizeType.S),
        )
        parsed = doc(
            RoomSpec(name="first bedroom", type=RoomType.SecondRoom, size=SizeType.M),
            RoomSpec(name="second bedroom", type=RoomType.SecondRoom, size=SizeType.S),
        )
        acc = parsing_accuracy(parsed, annotated)
        assert acc.matched == 2
        assert acc.size == 1.0

    def test_empty_annotation_unconstructible(self):
        # parsing_accuracy guards against empty annotations, but the
        # RoomsDocument invariant already makes them unconstructible.
        with pytest.raises(ValidationError):
            RoomsDocument(rooms=())


class TestEvaluateRun:
    def _write_dataset(self, root, grids):
        samples = []
        for i, grid in enumerate(grids):
            sample_id = f"s{i:03d}"
            d = root / sample_id
            d.mkdir(parents=True)
            (d / "plan.png").write_bytes(encode_plan_png(grid))
            samples.append({"id": sample_id, "split": "train"})
        (root / "manifest.json").write_text(json.dumps({"samples": samples}))

    def test_single_sample_aggregate_equals_sample(self, tmp_path):
        rng = np.random.default_rng(0)
        truth = plan_from(rng.integers(0, 4, size=(64, 64)).astype(np.uint8))
        pred = plan_from(rng.integers(0, 4, size=(64, 64)).astype(np.uint8))
        self._write_dataset(tmp_path / "data", [truth])
        pred_dir = tmp_path / "pred"
        pred_dir.mkdir()
        (pred_dir / "s000.png").write_bytes(encode_plan_png(pred))
        run = evaluate_run(tmp_path / "data" / "manifest.json", pred_dir)
        expected = iou(pred, truth)
        assert run.mean_micro == expected.micro
        assert run.evaluated == 1

    def test_two_samples_mean_and_missing_flagged(self, tmp_path):
        a = plan_from(np.full((64, 64), 1, dtype=np.uint8))
        b = plan_from(np.full((64, 64), 2, dtype=np.uint8))
        self._write_dataset(tmp_path / "data", [a, b, a])
        pred_dir = tmp_path / "pred"
        pred_dir.mkdir()
        # s000 perfect, s001 fully wrong (predicts type 1 where truth is 2).
        (pred_dir / "s000.png").write_bytes(encode_plan_png(a))
        (pred_dir / "s001.png").write_bytes(encode_plan_png(a))
        run = evaluate_run(tmp_path / "data" / "manifest.json", pred_dir,
                           out_dir=tmp_path / "out")
        assert run.mean_micro == pytest.approx(0.5)
        assert run.missing == ("s002",)
        assert (tmp_path / "out" / "per_sample.csv").exists()
        assert (tmp_path / "out" / "aggregate.json").exists()

    def test_no_overlap_raises(self, tmp_path):
        a = plan_from(np.full((64, 64), 1, dtype=np.uint8))
        self._write_dataset(tmp_path / "data", [a])
        empty = tmp_path / "pred"
        empty.mkdir()
        with pytest.raises(ValidationError):
            evaluate_run(tmp_path / "data" / "manifest.json", empty)
