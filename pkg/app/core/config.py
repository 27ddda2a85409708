from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List

from app.core.errors import ConfigError


@dataclass(frozen=True)
class QualityCriteria:
    min_pixels: int = 55
    min_solidity: float = 0.82
    min_midpoint_distance: float = 1.09
    require_single_component: bool = True
    detection_threshold: float = 0.5
    min_lateral_ratio: float = 0.05
    trace_noise_floor: float = 0.0  # 0 keeps the templates literal
    max_spur_length: int = 6  # 0 disables skeleton pruning
    flip_lateral: bool = False

    def problems(self) -> List[str]:
        issues = []
        if self.min_pixels <= 0:
            issues.append("min_pixels must be positive")
        if not 0 < self.min_solidity <= 1:
            issues.append("min_solidity must be in (0, 1]")
        if self.min_midpoint_distance <= 0:
            issues.append("min_midpoint_distance must be positive")
        if not 0 < self.detection_threshold < 1:
            issues.append("detection_threshold must be in (0, 1)")
        if not 0 < self.min_lateral_ratio < 1:
            issues.append("min_lateral_ratio must be in (0, 1)")
        if not 0 <= self.trace_noise_floor < self.detection_threshold:
            issues.append("trace_noise_floor must be in [0, detection_threshold)")
        if self.max_spur_length < 0:
            issues.append("max_spur_length must be non-negative")
        return issues

    def validate(self) -> "QualityCriteria":
        issues = self.problems()
        if issues:
            raise ConfigError("invalid quality criteria: " + "; ".join(issues))
        return self

    def with_overrides(self, **overrides: Any) -> "QualityCriteria":
        """Return a copy with the non-None overrides applied, validated"""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes).validate()

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QualityCriteria":
        return cls(**data)


class PresetConfigs:
    @staticmethod
    def standard() -> QualityCriteria:
        return QualityCriteria()

    @staticmethod
    def noisy_acquisition() -> QualityCriteria:
        # gates additive trace noise away from the template tails
        return QualityCriteria(trace_noise_floor=0.3)

    @staticmethod
    def literal() -> QualityCriteria:
        """Standard thresholds with no skeleton pruning"""
        return QualityCriteria(max_spur_length=0)
