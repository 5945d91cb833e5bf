"""Aggregation game configuration, state and peer sets."""

from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.learner import Model

# Slack for the delta*r <= 1 check, so 0.1 * 10 passes.
BUDGET_TOLERANCE = 1e-9


class GameConfig(BaseModel):
    """Peer-selection threshold and game step settings."""

    model_config = ConfigDict(frozen=True)

    theta: float = Field(default=0.5, ge=0.0, le=1.0, description="Peer accuracy threshold")
    beta: float = Field(default=0.001, ge=0.0, description="Minimum accuracy change to act on")
    delta: float = Field(default=0.1, gt=0.0, le=1.0, description="psi step per game round")
    rounds: int = Field(default=10, gt=0, description="Game rounds r")
    early_exit: bool = Field(default=False, description="Stop after the first rejected proposal")

    @model_validator(mode="after")
    def check_budget(self) -> "GameConfig":
        if self.delta * self.rounds > 1.0 + BUDGET_TOLERANCE:
            raise ValueError(
                f"delta * rounds must not exceed 1 (got {self.delta} * {self.rounds} = "
                f"{self.delta * self.rounds:g})"
            )
        return self


@dataclass(frozen=True)
class GameStep:
    """One game round as recorded in the trace."""

    game_round: int
    psi_x: float
    psi_alpha: float
    candidate_accuracy: float
    accepted: bool


@dataclass
class GameState:
    """Mixing weights, current aggregate and trace for one node's game.

    psi_x starts at 0 and psi_alpha at 1; each accepted step moves delta from
    the peer aggregate to the node's own model, so the pair always sums to 1.
    """

    gamma: Model
    psi_x: float = 0.0
    psi_alpha: float = 1.0
    steps: int = 0
    accuracy: float = 0.0
    initial_accuracy: float = 0.0
    evaluations: int = 0
    trace: List[GameStep] = field(default_factory=list)

    def accepted_steps(self) -> int:
        return sum(1 for step in self.trace if step.accepted)


@dataclass(frozen=True)
class PeerSet:
    """Nodes whose models cleared the accuracy threshold on the selecting node's data."""

    members: FrozenSet[int]
    accuracies: Optional[dict] = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, node: object) -> bool:
        return node in self.members

    def sorted(self) -> List[int]:
        return sorted(self.members)
