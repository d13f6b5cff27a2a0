"""
Dataset filtering: keep videos whose motion strength reaches a threshold.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

from pydantic import ValidationError

from models.report import VideoReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def scan_reports(reports_dir: PathLike) -> Tuple[List[VideoReport], List[Dict[str, str]]]:
    """Valid reports sorted by video id, plus a reject entry per unusable file"""
    reports_dir = Path(reports_dir)
    reports, rejects = [], []
    for path in sorted(reports_dir.glob("*.json")):
        try:
            report = VideoReport.model_validate_json(path.read_bytes())
        except (OSError, ValidationError) as e:
            logger.warning("rejecting malformed report %s: %s", path, e)
            rejects.append({"path": str(path), "reason": f"malformed report: {e}"})
            continue
        if report.status == "failed":
            rejects.append({"path": str(path), "reason": f"annotation failed: {report.error}"})
            continue
        reports.append(report)
    return sorted(reports, key=lambda r: r.video_id), rejects


def filter_reports(reports_dir: PathLike, threshold: float, out_path: PathLike) -> Dict:
    if threshold < 0:
        raise ValueError("threshold must be >= 0")

    reports, rejects = scan_reports(reports_dir)
    accepted = [r.video_id for r in reports if r.motion_strength >= threshold]
    below = [r.video_id for r in reports if r.motion_strength < threshold]

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("".join(f"{video_id}\n" for video_id in accepted), encoding="utf-8")
    logger.info(
        "filter at %.6g: %d accepted, %d below threshold, %d rejected",
        threshold,
        len(accepted),
        len(below),
        len(rejects),
    )
    return {
        "accepted": accepted,
        "below_threshold": below,
        "rejects": rejects,
        "total": len(reports) + len(rejects),
    }
