from .vectorize import (
    DOOR_CATEGORY,
    DoorSegment,
    VectorPlan,
    point_in_polygon,
    polygon_area,
    polygon_centroid,
    snap_polygon,
    trace_boundary,
    vectorize,
)
from .rasterize import rasterize64
from .connections import analyze_connections
from .labeling import LabelingThresholds, assign_labels
from .synthetic import generate_annotated_raster, write_fixture_directory
from .pipeline import (
    ProcessedSample,
    load_annotated_raster,
    load_training_triples,
    preprocess_directory,
    process_raster,
)

__all__ = [
    "DOOR_CATEGORY",
    "DoorSegment",
    "VectorPlan",
    "vectorize",
    "trace_boundary",
    "snap_polygon",
    "point_in_polygon",
    "polygon_area",
    "polygon_centroid",
    "rasterize64",
    "analyze_connections",
    "LabelingThresholds",
    "assign_labels",
    "generate_annotated_raster",
    "write_fixture_directory",
    "ProcessedSample",
    "process_raster",
    "preprocess_directory",
    "load_annotated_raster",
    "load_training_triples",
]
