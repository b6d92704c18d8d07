"""Inequality check reports shared by the solver modules and the suite runner."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .errors import InvalidInputError

VERDICTS = ("pass", "fail", "inconclusive")
LEDGER_COLUMNS = ("claim_id", "Z", "r", "lhs", "rhs", "margin", "verdict")


def settings_hash(*objs) -> str:
    """Short stable digest of dataclass settings (or plain JSON-able values)."""
    payload = []
    for obj in objs:
        if dataclasses.is_dataclass(obj):
            obj = {"type": type(obj).__name__, **dataclasses.asdict(obj)}
        payload.append(obj)
    text = json.dumps(payload, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Sample:
    """One evaluation of an inequality ``lhs <= rhs`` (margin = rhs - lhs, scaled or not)."""

    param: Mapping[str, Any]
    lhs: float
    rhs: float
    margin: float

    def as_dict(self):
        return {"param": dict(self.param), "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin}


def upper(param, lhs, rhs) -> Sample:
    """Sample of ``lhs <= rhs``."""
    return Sample(dict(param), float(lhs), float(rhs), float(rhs) - float(lhs))


def lower(param, lhs, rhs) -> Sample:
    """Sample of ``lhs >= rhs``."""
    return Sample(dict(param), float(lhs), float(rhs), float(lhs) - float(rhs))


@dataclass(frozen=True)
class BoundReport:
    claim_id: str
    samples: tuple
    worst_margin: float
    verdict: str
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise InvalidInputError(f"unknown verdict {self.verdict!r}")

    @classmethod
    def build(cls, claim_id: str, samples: Sequence[Sample], tolerance: float = 0.0,
              inconclusive: bool = False, **metadata) -> "BoundReport":
        """Assemble a report; pass iff every margin is >= -tolerance."""
        samples = tuple(samples)
        margins = [s.margin for s in samples]
        if any(math.isnan(m) for m in margins):
            inconclusive = True
            margins = [m for m in margins if not math.isnan(m)]
        worst = min(margins) if margins else math.nan
        if not margins or (inconclusive and worst >= -tolerance):
            verdict = "inconclusive"
        else:
            verdict = "pass" if worst >= -tolerance else "fail"
        metadata = {"tolerance": float(tolerance), **metadata}
        return cls(claim_id, samples, float(worst), verdict, metadata)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self):
        return {
            "claim_id": self.claim_id,
            "verdict": self.verdict,
            "worst_margin": _finite_or_none(self.worst_margin),
            "samples": [_clean(s.as_dict()) for s in self.samples],
            "metadata": _clean(dict(self.metadata)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "BoundReport":
        data = json.loads(text)
        try:
            samples = tuple(
                Sample(s["param"], _num(s["lhs"]), _num(s["rhs"]), _num(s["margin"]))
                for s in data["samples"]
            )
            return cls(data["claim_id"], samples, _num(data["worst_margin"]),
                       data["verdict"], data.get("metadata", {}))
        except KeyError as exc:
            raise InvalidInputError(f"report is missing field {exc}") from None

    def ledger_rows(self):
        for s in self.samples:
            yield {
                "claim_id": self.claim_id,
                "Z": s.param.get("Z", ""),
                "r": s.param.get("r", ""),
                "lhs": repr(s.lhs),
                "rhs": repr(s.rhs),
                "margin": repr(s.margin),
                "verdict": self.verdict,
            }


def ledger_csv(reports: Sequence[BoundReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=LEDGER_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerows(rep.ledger_rows())
    return buf.getvalue()


def write_atomic(path, text: str):
    """Write text to path through a temporary file in the same directory and a rename."""
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(v):
    return math.nan if v is None else float(v)


def _finite_or_none(v):
    return v if isinstance(v, float) and math.isfinite(v) else (None if isinstance(v, float) else v)


def _clean(obj):
    # JSON has no inf/nan; they become null
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float):
        return _finite_or_none(obj)
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj
