from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Named relative residuals compared against one threshold.

    ``to_dict`` gives the flat ``{check_name: residual}`` form used on the
    wire; ``details`` carries anything else worth showing (index sets,
    eigenvalue lists) and never affects the verdict.
    """

    name: str
    residuals: dict[str, float]
    threshold: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v <= self.threshold for v in self.residuals.values())

    @property
    def worst(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def failures(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not v <= self.threshold]

    def to_dict(self) -> dict[str, float]:
        return dict(self.residuals)
