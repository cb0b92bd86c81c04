"""Write sweep results as CSV or JSON and summarise them."""

import csv
import io
import json
import math
import os
from pathlib import Path
from typing import Any

from rich.table import Table

from .simulation import SweepPoint

CSV_COLUMNS = [
    "ebn0_db", "frames", "frame_errors", "undetected_errors", "fer", "uer", "seed", "scheme", "k",
]
FORMATS = ("csv", "json")


def _csv_row(point: SweepPoint, scheme: str, k: int) -> list[str]:
    return [
        f"{point.ebn0_db:g}",
        str(point.frames_run),
        str(point.frame_errors),
        str(point.undetected_errors),
        f"{point.fer:.6e}",
        f"{point.uer:.6e}",
        str(point.seed),
        scheme,
        str(k),
    ]


def _render_csv(points: list[SweepPoint], scheme: str, k: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in points:
        writer.writerow(_csv_row(p, scheme, k))
    return buf.getvalue()


def _render_json(points: list[SweepPoint], config: dict[str, Any]) -> str:
    doc = {"config": config, "points": [p.to_dict() for p in points]}
    return json.dumps(doc, indent=2) + "\n"


def _write_atomic(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as e:
        raise OSError(f"Cannot write results to {path}: {e.strerror}") from e


def emit(points: list[SweepPoint], fmt: str, path: str | Path, config: dict[str, Any]) -> Path:
    """Write all points to `path`. `config` must carry 'scheme' and 'k'."""
    path = Path(path)
    if fmt == "csv":
        text = _render_csv(points, config["scheme"], config["k"])
    elif fmt == "json":
        text = _render_json(points, config)
    else:
        raise ValueError(f"Unknown format '{fmt}', expected one of {FORMATS}")
    _write_atomic(path, text)
    return path


class ResultWriter:
    """Rewrites the output after every completed point so an interrupted
    sweep leaves the finished points on disk."""

    def __init__(self, path: str | Path, fmt: str, config: dict[str, Any]):
        self.path = Path(path)
        self.fmt = fmt
        self.config = config
        self.points: list[SweepPoint] = []
        emit(self.points, fmt, self.path, config)

    def add(self, point: SweepPoint):
        self.points.append(point)
        emit(self.points, self.fmt, self.path, self.config)


def load_results(path: str | Path) -> tuple[dict[str, Any], list[SweepPoint]]:
    """Read a CSV or JSON result file back into (config, points)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        return doc["config"], [SweepPoint.from_dict(d) for d in doc["points"]]

    rows = list(csv.DictReader(io.StringIO(text)))
    config: dict[str, Any] = {}
    points = []
    for r in rows:
        config = {"scheme": r["scheme"], "k": int(r["k"])}
        frames = int(r["frames"])
        errors = int(r["frame_errors"])
        undetected = int(r["undetected_errors"])
        points.append(SweepPoint(
            ebn0_db=float(r["ebn0_db"]),
            frames_run=frames,
            frame_errors=errors,
            undetected_errors=undetected,
            detected_errors=errors - undetected,
            seed=int(r["seed"]),
        ))
    return config, points


def ebn0_at_fer(points: list[SweepPoint], target: float) -> float | None:
    """Eb/N0 where FER first crosses `target`, interpolated linearly in log10(FER).

    Points with no errors are ignored; returns None when the curve never
    crosses the target.
    """
    pts = sorted((p for p in points if p.fer > 0), key=lambda p: p.ebn0_db)
    for a, b in zip(pts, pts[1:]):
        if a.fer >= target >= b.fer:
            if a.fer == b.fer:
                return a.ebn0_db
            la, lb, lt = math.log10(a.fer), math.log10(b.fer), math.log10(target)
            return a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db)
    return None


def summary_table(points: list[SweepPoint], title: str) -> Table:
    table = Table(title=title)
    table.add_column("Eb/N0 (dB)", style="cyan", justify="right")
    table.add_column("Frames", justify="right")
    table.add_column("Errors", justify="right")
    table.add_column("Undetected", justify="right")
    table.add_column("FER", style="bold", justify="right")
    table.add_column("UER", justify="right")
    for p in points:
        table.add_row(
            f"{p.ebn0_db:g}",
            str(p.frames_run),
            str(p.frame_errors),
            str(p.undetected_errors),
            f"{p.fer:.3e}",
            f"{p.uer:.3e}",
        )
    return table
