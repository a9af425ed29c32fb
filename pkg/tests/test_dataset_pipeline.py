import numpy as np
import pytest

from chatplan.core import CATEGORY_OF_TYPE, RoomType, ValidationError
from chatplan.dataset import (
    DOOR_CATEGORY,
    LabelingThresholds,
    analyze_connections,
    assign_labels,
    generate_annotated_raster,
    load_training_triples,
    preprocess_directory,
    process_raster,
    rasterize64,
    snap_polygon,
    vectorize,
    write_fixture_directory,
)
from chatplan.prompting import validate_document


def blank():
    return np.zeros((256, 256), dtype=np.uint8)


def five_room_fixture():
    """Balcony strip over a 2x2 block of rooms, 4 doors, hand annotated."""
    r = blank()
    r[20:40, 40:216] = CATEGORY_OF_TYPE[RoomType.Balcony]      # E (top strip)
    r[40:140, 40:140] = CATEGORY_OF_TYPE[RoomType.LivingRoom]  # A
    r[40:140, 140:216] = CATEGORY_OF_TYPE[RoomType.Kitchen]    # B
    r[140:216, 40:140] = CATEGORY_OF_TYPE[RoomType.Bathroom]   # C
    r[140:216, 140:216] = CATEGORY_OF_TYPE[RoomType.SecondRoom]  # D
    r[85:95, 139:141] = DOOR_CATEGORY   # A-B
    r[139:141, 85:95] = DOOR_CATEGORY   # A-C
    r[139:141, 173:183] = DOOR_CATEGORY  # B-D
    r[39:41, 85:95] = DOOR_CATEGORY     # E-A
    return r


def downsample_majority(raster256):
    """Independent oracle: majority room category per 4x4 block."""
    out = np.zeros((64, 64), dtype=np.uint8)
    for row in range(64):
        for col in range(64):
            block = raster256[4 * row:4 * row + 4, 4 * col:4 * col + 4]
            rooms = block[(block >= 1) & (block <= 13)]
            if rooms.size == 0:
                continue
            counts = np.bincount(rooms)
            out[row, col] = counts.argmax()
    return out


class TestVectorize:
    def test_perfect_rectangle_four_vertices(self):
        r = blank()
        r[40:80, 60:100] = CATEGORY_OF_TYPE[RoomType.Kitchen]
        vp = vectorize(r)
        assert len(vp.rooms) == 1
        room_type, verts = vp.rooms[0]
        assert room_type is RoomType.Kitchen
        assert len(verts) == 4
        assert set(verts) == {(60, 40), (100, 40), (100, 80), (60, 80)}

    def test_one_pixel_jitter_healed(self):
        r = blank()
        r[40:80, 40:80] = CATEGORY_OF_TYPE[RoomType.Kitchen]
        r[50:55, 80] = CATEGORY_OF_TYPE[RoomType.Kitchen]  # 1-px bump
        vp = vectorize(r)
        _, verts = vp.rooms[0]
        assert len(verts) == 4
        assert set(verts) == {(40, 40), (80, 40), (80, 80), (40, 80)}

    def test_l_shaped_room_six_vertices(self):
        r = blank()
        r[40:120, 40:80] = CATEGORY_OF_TYPE[RoomType.LivingRoom]
        r[80:120, 80:120] = CATEGORY_OF_TYPE[RoomType.LivingRoom]
        vp = vectorize(r)
        _, verts = vp.rooms[0]
        assert len(verts) == 6
        assert set(verts) == {
            (40, 40), (80, 40), (80, 80), (120, 80), (120, 120), (40, 120),
        }

    def test_tiny_component_discarded_with_warning(self, caplog):
        r = blank()
        r[40:80, 40:80] = CATEGORY_OF_TYPE[RoomType.Kitchen]
        r[200, 200] = CATEGORY_OF_TYPE[RoomType.Balcony]  # 1 pixel
        with caplog.at_level("WARNING"):
            vp = vectorize(r)
        assert len(vp.rooms) == 1
        assert "discarding" in caplog.text

    def test_two_rooms_same_type_are_separate_components(self):
        r = blank()
        r[40:80, 40:80] = CATEGORY_OF_TYPE[RoomType.Bathroom]
        r[40:80, 120:160] = CATEGORY_OF_TYPE[RoomType.Bathroom]
        vp = vectorize(r)
        assert len(vp.rooms) == 2

    def test_snap_keeps_distant_axes_apart(self):
        verts = [(0, 0), (8, 0), (8, 8), (16, 8), (16, 16), (0, 16)]
        assert snap_polygon(verts, tol=2) == verts


class TestRasterize64:
    def test_round_trip_matches_majority_downsample(self):
        raster = five_room_fixture()
        outline, plan = rasterize64(vectorize(raster))
        oracle = downsample_majority(raster)
        interior = outline.grid == 1
        agree = (plan.grid[interior] == oracle[interior]).mean()
        assert agree >= 0.98

    def test_round_trip_on_generated_fixtures(self):
        for seed in range(5):
            raster = generate_annotated_raster(seed)
            outline, plan = rasterize64(vectorize(raster))
            oracle = downsample_majority(raster)
            interior = outline.grid == 1
            agree = (plan.grid[interior] == oracle[interior]).mean()
            assert agree >= 0.98, f"seed {seed}: {agree:.4f}"

    def test_partition_property(self):
        outline, plan = rasterize64(vectorize(five_room_fixture()))
        category_cells = int((plan.grid > 0).sum())
        assert category_cells == outline.interior_count

    def test_exterior_stays_background(self):
        outline, plan = rasterize64(vectorize(five_room_fixture()))
        assert np.all(plan.grid[outline.grid == 0] == 0)

    def test_pixel_counts_preserved_within_five_percent(self):
        from chatplan.dataset import polygon_area

        vp = vectorize(five_room_fixture())
        _, plan = rasterize64(vp)
        for room_type, verts in vp.rooms:
            vec_cells = polygon_area(verts) / 16
            grid_cells = int((plan.grid == CATEGORY_OF_TYPE[room_type]).sum())
            assert abs(grid_cells - vec_cells) <= 0.05 * vec_cells


class TestConnections:
    def test_five_room_fixture_matches_hand_annotation(self):
        vp = vectorize(five_room_fixture())
        names = {i: (t.value, verts[0]) for i, (t, verts) in enumerate(vp.rooms)}
        by_type = {t.value: i for i, (t, _) in enumerate(vp.rooms)}
        pairs = analyze_connections(vp)
        expected = {
            tuple(sorted((by_type["LivingRoom"], by_type["Kitchen"]))),
            tuple(sorted((by_type["LivingRoom"], by_type["Bathroom"]))),
            tuple(sorted((by_type["Kitchen"], by_type["SecondRoom"]))),
            tuple(sorted((by_type["Balcony"], by_type["LivingRoom"]))),
        }
        assert set(pairs) == expected
        assert len(pairs) == 4

    def test_two_doors_one_wall_deduplicated(self):
        r = blank()
        r[40:120, 40:120] = CATEGORY_OF_TYPE[RoomType.LivingRoom]
        r[40:120, 120:200] = CATEGORY_OF_TYPE[RoomType.Kitchen]
        r[50:60, 119:121] = DOOR_CATEGORY
        r[90:100, 119:121] = DOOR_CATEGORY
        pairs = analyze_connections(vectorize(r))
        assert pairs == [(0, 1)]

    def test_orphan_door_skipped(self, caplog):
        r = blank()
        r[40:120, 40:120] = CATEGORY_OF_TYPE[RoomType.LivingRoom]
        r[200:210, 200:202] = DOOR_CATEGORY  # door next to nothing
        with caplog.at_level("WARNING"):
            pairs = analyze_connections(vectorize(r))
        assert pairs == []
        assert "skipped" in caplog.text


class TestAssignLabels:
    def test_location_grid_center_and_corners(self):
        r = blank()
        # 3x3 block of rooms over (40..220)^2 at a 60px pitch.
        types = [
            RoomType.LivingRoom, RoomType.Kitchen, RoomType.DiningRoom,
            RoomType.Bathroom, RoomType.MasterRoom, RoomType.SecondRoom,
            RoomType.StudyRoom, RoomType.Balcony, RoomType.Storage,
        ]
        for k, t in enumerate(types):
            row, col = divmod(k, 3)
            r[40 + 60 * row:100 + 60 * row, 40 + 60 * col:100 + 60 * col] = (
                CATEGORY_OF_TYPE[t]
            )
        doc = assign_labels(vectorize(r))
        locations = {room.type.value: room.location.value for room in doc.rooms}
        assert locations["LivingRoom"] == "northwest"
        assert locations["Kitchen"] == "north"
        assert locations["DiningRoom"] == "northeast"
        assert locations["MasterRoom"] == "center"
        assert locations["Storage"] == "southeast"

    def test_size_bucket_worked_example(self):
        thresholds = LabelingThresholds()
        assert thresholds.bucket(0.45).value == "XL"
        assert thresholds.bucket(0.03).value == "XS"
        assert thresholds.bucket(0.07).value == "S"
        assert thresholds.bucket(0.12).value == "M"
        assert thresholds.bucket(0.20).value == "L"

    def test_duplicate_type_names_suffixed_in_scan_order(self):
        r = blank()
        r[40:100, 40:120] = CATEGORY_OF_TYPE[RoomType.Bathroom]
        r[140:200, 40:120] = CATEGORY_OF_TYPE[RoomType.Bathroom]
        doc = assign_labels(vectorize(r))
        assert doc.names == ("Bathroom", "Bathroom_2")

    def test_bad_thresholds_rejected(self):
        with pytest.raises(ValidationError):
            LabelingThresholds(size_bounds=(0.1, 0.05, 0.2, 0.3))


class TestPipeline:
    def test_determinism(self):
        raster = generate_annotated_raster(3)
        a = process_raster(raster)
        b = process_raster(raster)
        assert np.array_equal(a.plan.grid, b.plan.grid)
        assert np.array_equal(a.outline.grid, b.outline.grid)
        assert a.document == b.document

    def test_generated_documents_validate_with_zero_corrections(self):
        for seed in range(8):
            doc = process_raster(generate_annotated_raster(seed)).document
            records = [room.to_json_dict() for room in doc.rooms]
            result = validate_document(records)
            assert result.corrections == ()
            assert result.rejected == ()
            assert result.document == doc

    def test_link_symmetry_by_construction(self):
        doc = process_raster(generate_annotated_raster(5)).document
        for room in doc.rooms:
            for target in room.link:
                other = doc.rooms[doc.index_of(target)]
                assert room.name in other.link

    def test_preprocess_directory_and_reload(self, tmp_path):
        fixture_dir = tmp_path / "raw"
        write_fixture_directory(fixture_dir, count=4, seed=1)
        out_dir = tmp_path / "data"
        manifest = preprocess_directory(fixture_dir, out_dir, val_fraction=0.0)
        triples = load_training_triples(manifest, split="train")
        assert len(triples) == 4
        x0, outline, doc = triples[0]
        assert x0.shape == (13, 64, 64)
        assert set(np.unique(x0)) <= {-1.0, 1.0}
        assert outline.interior_count > 0
        assert len(doc.rooms) >= 4

    def test_empty_directory_rejected(self, tmp_path):
        empty = tmp_path / "nothing"
        empty.mkdir()
        with pytest.raises(ValidationError):
            preprocess_directory(empty, tmp_path / "out")
