#!/usr/bin/env python3
"""
Exam report and its JSON form

Schema:

    {
      "exam_id": str,
      "presentation": {
        "label": "cephalic" | "breech" | "abstain",
        "status": "ok" | "no_head_detected" | "tie",
        "votes": {"cephalic": int, "breech": int},
        "per_sweep": [{"sweep_id", "sim_cephalic", "sim_breech", "label"}]
      },
      "lie": {
        "label": "left" | "right" | "abstain",
        "status": "ok" | "no_segmentation" | "criteria_failed" | "indeterminate" | "tie",
        "votes": {"left": int, "right": int},
        "frames": [{"sweep_id", "frame", "method": "dual" | "fallback", "bin", "vector": [r, c]}],
        "abstentions": [{"sweep_id", "frame", "reason"}]
      },
      "criteria": {...QualityCriteria fields...},
      "version": str
    }

`dumps` sorts keys and uses a fixed indent so identical reports serialize
to identical bytes.
"""

import json
from dataclasses import dataclass
from typing import Any, Dict

from app.core.config import QualityCriteria
from app.models import (
    FrameAbstention,
    FrameLie,
    LieBin,
    LieLabel,
    LieMethod,
    LieResult,
    PresentationLabel,
    PresentationResult,
    SweepLabel,
    SweepPresentation,
)


@dataclass(frozen=True)
class ExamReport:
    exam_id: str
    presentation: PresentationResult
    lie: LieResult
    criteria_used: QualityCriteria
    tool_version: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "exam_id": self.exam_id,
            "presentation": _presentation_to_dict(self.presentation),
            "lie": _lie_to_dict(self.lie),
            "criteria": self.criteria_used.to_dict(),
            "version": self.tool_version,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExamReport":
        return cls(
            exam_id=data["exam_id"],
            presentation=_presentation_from_dict(data["presentation"]),
            lie=_lie_from_dict(data["lie"]),
            criteria_used=QualityCriteria.from_dict(data["criteria"]),
            tool_version=data["version"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ExamReport":
        return cls.from_dict(json.loads(text))


def _presentation_to_dict(result: PresentationResult) -> Dict[str, Any]:
    return {
        "label": str(result.exam_label),
        "status": result.status,
        "votes": {"cephalic": result.votes_cephalic, "breech": result.votes_breech},
        "per_sweep": [
            {
                "sweep_id": s.sweep_id,
                "sim_cephalic": s.sim_cephalic,
                "sim_breech": s.sim_breech,
                "label": str(s.label),
            }
            for s in result.per_sweep
        ],
    }


def _presentation_from_dict(data: Dict[str, Any]) -> PresentationResult:
    return PresentationResult(
        per_sweep=tuple(
            SweepPresentation(
                sweep_id=s["sweep_id"],
                sim_cephalic=s["sim_cephalic"],
                sim_breech=s["sim_breech"],
                label=SweepLabel(s["label"]),
            )
            for s in data["per_sweep"]
        ),
        exam_label=PresentationLabel(data["label"]),
        votes_cephalic=data["votes"]["cephalic"],
        votes_breech=data["votes"]["breech"],
        status=data["status"],
    )


def _lie_to_dict(result: LieResult) -> Dict[str, Any]:
    return {
        "label": str(result.exam_label),
        "status": result.status,
        "votes": {"left": result.votes_left, "right": result.votes_right},
        "frames": [
            {
                "sweep_id": f.sweep_id,
                "frame": f.frame_index,
                "method": str(f.method),
                "bin": str(f.bin),
                "vector": [f.vector[0], f.vector[1]],
            }
            for f in result.frames
        ],
        "abstentions": [
            {"sweep_id": a.sweep_id, "frame": a.frame_index, "reason": a.reason}
            for a in result.abstentions
        ],
    }


def _lie_from_dict(data: Dict[str, Any]) -> LieResult:
    return LieResult(
        frames=tuple(
            FrameLie(
                frame_index=f["frame"],
                vector=(f["vector"][0], f["vector"][1]),
                method=LieMethod(f["method"]),
                bin=LieBin(f["bin"]),
                sweep_id=f["sweep_id"],
            )
            for f in data["frames"]
        ),
        exam_label=LieLabel(data["label"]),
        votes_left=data["votes"]["left"],
        votes_right=data["votes"]["right"],
        abstentions=tuple(
            FrameAbstention(sweep_id=a["sweep_id"], frame_index=a["frame"], reason=a["reason"])
            for a in data.get("abstentions", [])
        ),
        status=data["status"],
    )
