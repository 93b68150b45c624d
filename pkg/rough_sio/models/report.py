"""
Check records and the aggregate verification report
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

logger = logging.getLogger(__name__)


def jsonable(value: Any) -> Any:
    """Numbers, arrays and complex values in a stable JSON form"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        if value.imag == 0:
            return jsonable(value.real)
        return {"re": jsonable(value.real), "im": jsonable(value.imag)}
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


@dataclass
class CheckRecord:
    """Outcome of one numerical check."""

    check_id: str
    anchor: str
    passed: bool
    tolerance: float
    computed: Dict[str, Any] = field(default_factory=dict)
    bound: Dict[str, Any] = field(default_factory=dict)
    family: str = "general"
    probe: bool = False
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        """Convert record to dictionary for JSON serialization"""
        data = {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "family": self.family,
            "passed": bool(self.passed),
            "probe": self.probe,
            "tolerance": self.tolerance,
            "computed": jsonable(self.computed),
            "bound": jsonable(self.bound),
        }
        if self.message:
            data["message"] = self.message
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CheckRecord":
        """Create record from dictionary"""
        return cls(
            check_id=data["check_id"],
            anchor=data["anchor"],
            passed=bool(data["passed"]),
            tolerance=float(data["tolerance"]),
            computed=data.get("computed", {}),
            bound=data.get("bound", {}),
            family=data.get("family", "general"),
            probe=bool(data.get("probe", False)),
            message=data.get("message", ""),
        )


@dataclass
class Report:
    """Ordered collection of check records with an aggregate verdict."""

    title: str = "rough-sio verification"
    records: List[CheckRecord] = field(default_factory=list)
    strict: bool = False

    def add(self, record: CheckRecord) -> CheckRecord:
        self.records.append(record)
        level = logging.INFO if record.passed else logging.WARNING
        logger.log(level, "%s %s", record.check_id, "passed" if record.passed else "FAILED")
        return record

    def extend(self, records: Iterable[CheckRecord]) -> None:
        for record in records:
            self.add(record)

    def merge(self, other: "Report") -> None:
        self.records.extend(other.records)

    def sorted_records(self) -> List[CheckRecord]:
        return sorted(self.records, key=lambda r: r.check_id)

    def get(self, check_id: str) -> Optional[CheckRecord]:
        for record in self.records:
            if record.check_id == check_id:
                return record
        return None

    def gating(self) -> List[CheckRecord]:
        return [r for r in self.records if self.strict or not r.probe]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.gating())

    @property
    def failures(self) -> List[str]:
        return sorted(r.check_id for r in self.gating() if not r.passed)

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to dictionary for JSON serialization"""
        records = self.sorted_records()
        return {
            "title": self.title,
            "strict": self.strict,
            "verdict": "pass" if self.passed else "fail",
            "check_count": len(records),
            "failed": self.failures,
            "checks": [r.to_dict() for r in records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write_json(self, path: str) -> None:
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")

    def write_csv_bundle(self, directory: str) -> List[str]:
        """One CSV per check family with flattened computed and bound values"""
        os.makedirs(directory, exist_ok=True)
        families: Dict[str, List[CheckRecord]] = {}
        for record in self.sorted_records():
            families.setdefault(record.family, []).append(record)
        written = []
        for family, records in sorted(families.items()):
            path = os.path.join(directory, f"{family}.csv")
            write_rows(path, [_flatten(r) for r in records])
            written.append(path)
        return written


def _flatten(record: CheckRecord) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        "check_id": record.check_id,
        "passed": record.passed,
        "probe": record.probe,
        "tolerance": record.tolerance,
    }
    for prefix, values in (("computed", record.computed), ("bound", record.bound)):
        for key, value in sorted(values.items()):
            value = jsonable(value)
            if isinstance(value, (dict, list)):
                value = json.dumps(value, sort_keys=True)
            row[f"{prefix}.{key}"] = value
    return row


def write_rows(path: str, rows: List[Dict[str, Any]]) -> None:
    """Write dict rows as CSV with the union of keys as the header (first-seen order)"""
    header: List[str] = []
    for row in rows:
        for key in row:
            if key not in header:
                header.append(key)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=header)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: jsonable(v) for k, v in row.items()})
