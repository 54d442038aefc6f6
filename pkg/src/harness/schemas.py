"""
Pydantic models for experiment specifications and result records.
"""

from __future__ import annotations

from enum import StrEnum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.ghz.verification import StrategyKind
from src.protocols.schemas import ProtocolConfig
from src.utils.config import DEFAULT_MASTER_SEED, DEFAULT_QUESTIONS, DEFAULT_WORKERS


class ProtocolKind(StrEnum):
    ENTANGLED = "entangled"
    CSS = "css"
    PM = "pm"
    EQUIVALENCE = "equivalence"
    VERIFICATION_GAME = "verification_game"


class GameSettings(BaseModel):
    """Verification game parameters; the party count comes from the protocol config."""

    questions: int = Field(DEFAULT_QUESTIONS, ge=1, description="Parity questions per game")
    blocks: int = Field(1, ge=1, description="GHZ blocks held by the prover")
    strategy: StrategyKind = StrategyKind.HONEST
    hidden: Optional[str] = Field(None, description="Prover label for fixed_string / classical_mixture")
    honest_weight: float = Field(0.5, ge=0, le=1, description="Weight of the ideal label in a mixture")
    include_zero: bool = False

    model_config = ConfigDict(frozen=True)

    @field_validator("strategy")
    @classmethod
    def _check_strategy(cls, value: StrategyKind) -> StrategyKind:
        if value == StrategyKind.GENERAL_STATE:
            raise ValueError("general_state provers are built programmatically, not from a config file")
        return value

    @field_validator("hidden")
    @classmethod
    def _check_hidden(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and (not value or any(ch not in "01" for ch in value)):
            raise ValueError(f"hidden must be a bit string, got {value!r}")
        return value

    @model_validator(mode="after")
    def _check_label(self) -> GameSettings:
        if self.strategy != StrategyKind.HONEST and self.hidden is None:
            raise ValueError(f"strategy {self.strategy} needs a hidden label")
        return self


class ExperimentSpec(BaseModel):
    """One batch of seeded sessions."""

    protocol: ProtocolKind
    config: ProtocolConfig = Field(default_factory=ProtocolConfig)
    game: GameSettings = Field(default_factory=GameSettings)
    trials: int = Field(1, ge=1)
    master_seed: int = Field(DEFAULT_MASTER_SEED, ge=0)
    output_path: Optional[str] = None
    workers: int = Field(DEFAULT_WORKERS, description="joblib n_jobs; -1 uses every core")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_game_label(self) -> ExperimentSpec:
        hidden = self.game.hidden
        if self.protocol == ProtocolKind.VERIFICATION_GAME and hidden is not None:
            expected = self.config.num_parties * self.game.blocks
            if len(hidden) != expected:
                raise ValueError(f"hidden label has {len(hidden)} bits, expected N·blocks = {expected}")
        return self


class SessionRecord(BaseModel):
    """One line of a results file."""

    type: Literal["session"] = "session"
    session_index: int
    seed: int
    protocol: ProtocolKind
    aborted: bool
    abort_reason: Optional[str] = None
    qber: Optional[float] = None
    wt_w: Optional[int] = None
    t: Optional[int] = None
    sifted_count: Optional[int] = None
    raw_count: Optional[int] = None
    key_len: int = 0
    keys_equal: bool = False
    code: Optional[str] = None
    error: Optional[str] = None
    accepted: Optional[bool] = None
    cheated: Optional[bool] = None
    max_oracle_diff: Optional[float] = None


class AggregateReport(BaseModel):
    """Summary line; every rate is recomputable from the session records."""

    type: Literal["summary"] = "summary"
    protocol: ProtocolKind
    master_seed: int
    sessions: int = Field(..., ge=0)
    errors: int = Field(0, ge=0)
    abort_rate: float = Field(..., ge=0, le=1)
    mean_qber: Optional[float] = Field(None, ge=0, le=1)
    key_agreement_rate: Optional[float] = Field(
        None, ge=0, le=1, description="Over non-aborted sessions only"
    )
    mean_key_length: float = Field(0.0, ge=0)
    sift_retention: Optional[float] = Field(None, ge=0, le=1)
    acceptance_rate: Optional[float] = Field(None, ge=0, le=1)
    cheat_rate: Optional[float] = Field(None, ge=0, le=1)
    records: list[SessionRecord] = Field(default_factory=list, exclude=True)
