from .iou import IoUReport, iou
from .parsing import ParsingAccuracy, parsing_accuracy
from .runs import RunReport, evaluate_run, write_report

__all__ = [
    "IoUReport",
    "iou",
    "ParsingAccuracy",
    "parsing_accuracy",
    "RunReport",
    "evaluate_run",
    "write_report",
]
