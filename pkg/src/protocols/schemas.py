"""
Configuration and result types shared by the three key distribution
protocols.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.codes.bitstring import BitString
from src.utils.config import DEFAULT_CONFIDENCE, DEFAULT_CSS_CODE


class BackendKind(StrEnum):
    AUTO = "auto"
    DENSE = "dense"
    TABLEAU = "tableau"
    CLASSICAL_BITS = "classical_bits"


class AdversaryKind(StrEnum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    PAULI = "pauli"


class AbortReason(StrEnum):
    THRESHOLD = "threshold"
    NO_CODE = "no_code"
    INSUFFICIENT_SIFT = "insufficient_sift"
    DECODE = "decode"
    BACKEND_ERROR = "backend_error"


class ChannelConfig(BaseModel):
    """Independent Pauli noise on every transmitted qubit of a link."""

    px: float = Field(0.0, ge=0, le=1, description="Probability of an X error")
    py: float = Field(0.0, ge=0, le=1, description="Probability of a Y error")
    pz: float = Field(0.0, ge=0, le=1, description="Probability of a Z error")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_total(self) -> ChannelConfig:
        if self.px + self.py + self.pz > 1 + 1e-12:
            raise ValueError(f"px + py + pz = {self.px + self.py + self.pz} exceeds 1")
        return self

    @property
    def is_noiseless(self) -> bool:
        return self.px == self.py == self.pz == 0


class AdversaryConfig(BaseModel):
    """
    Eavesdropper on a set of receiver links (1..N−1); ``links=None`` means
    every link.
    """

    kind: AdversaryKind = AdversaryKind.NONE
    links: Optional[list[int]] = Field(None, description="Attacked receiver links")
    pauli: Literal["X", "Y", "Z"] = Field("X", description="Pauli applied by a pauli adversary")
    rate: float = Field(1.0, ge=0, le=1, description="Per-qubit attack probability")

    model_config = ConfigDict(frozen=True)

    def attacks(self, link: int) -> bool:
        if self.kind == AdversaryKind.NONE:
            return False
        return self.links is None or link in self.links


class InjectedError(BaseModel):
    """Deterministic error on a receiver's key-block position, in its measurement frame."""

    receiver: int = Field(..., ge=1)
    position: int = Field(..., ge=0)
    pauli: Literal["X", "Y", "Z"] = "X"

    model_config = ConfigDict(frozen=True)


class ProtocolConfig(BaseModel):
    """Parameters of one protocol session."""

    num_parties: int = Field(3, ge=3, alias="N", description="Alice plus N−1 receivers")
    n: int = Field(4, ge=1, description="Check bits; the key block has the same size")
    c: float = Field(DEFAULT_CONFIDENCE, ge=0, description="Confidence factor")
    css: str = Field(DEFAULT_CSS_CODE, description="CSS pair for the CSS protocol and oracles")
    catalog: Optional[list[str]] = Field(None, description="Candidate codes; None = every known pair")
    code_file: Optional[str] = Field(None, description="Extra code definition file")
    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    link_channels: dict[int, ChannelConfig] = Field(default_factory=dict)
    adversary: AdversaryConfig = Field(default_factory=AdversaryConfig)
    backend: BackendKind = BackendKind.AUTO
    seed: int = Field(0, ge=0)
    injected_errors: list[InjectedError] = Field(default_factory=list)
    reveal_phase: bool = True
    extra_permutation: bool = False
    fixed_key: Optional[str] = Field(None, description="Key label to use instead of a random one")
    raw_positions: Optional[int] = Field(None, ge=1, description="Raw P&M positions m; None = 2^{N+1}·n")

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @field_validator("fixed_key")
    @classmethod
    def _check_key(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and any(ch not in "01" for ch in value):
            raise ValueError(f"fixed_key must be a bit string, got {value!r}")
        return value

    @model_validator(mode="after")
    def _check_links(self) -> ProtocolConfig:
        receivers = range(1, self.num_parties)
        for link in list(self.link_channels) + list(self.adversary.links or []):
            if link not in receivers:
                raise ValueError(f"Link {link} is not a receiver (1..{self.num_parties - 1})")
        for error in self.injected_errors:
            if error.receiver not in receivers:
                raise ValueError(f"Injected error on unknown receiver {error.receiver}")
        return self

    def channel_for(self, link: int) -> ChannelConfig:
        return self.link_channels.get(link, self.channel)

    def with_updates(self, **updates) -> ProtocolConfig:
        """Copy with some fields replaced; the result is validated again."""
        return ProtocolConfig.model_validate({**self.model_dump(), **updates})


class Transcript:
    """Append-only log of public announcements (everything here is adversary-visible)."""

    def __init__(self) -> None:
        self._entries: list[tuple[str, str]] = []

    def announce(self, label: str, value) -> None:
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        self._entries.append((label, str(value)))

    @property
    def entries(self) -> tuple[tuple[str, str], ...]:
        return tuple(self._entries)

    def get(self, label: str) -> list[str]:
        return [value for key, value in self._entries if key == label]

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Transcript) and self._entries == other._entries


@dataclass
class SessionResult:
    """
    Outcome of one session.

    ``keys`` is None on abort. ``derived_keys`` keeps whatever each party
    computed, including on a decode abort, for ground-truth analysis.
    """

    protocol: str
    seed: int
    aborted: bool
    abort_reason: Optional[AbortReason]
    keys: Optional[tuple[BitString, ...]]
    qber: Optional[float]
    wt_w: Optional[int]
    t: Optional[int]
    sifted_count: Optional[int]
    transcript: Transcript
    raw_count: Optional[int] = None
    code: Optional[str] = None
    derived_keys: Optional[tuple[BitString, ...]] = None
    ground_truth: dict = field(default_factory=dict)

    @property
    def key_length(self) -> int:
        return self.keys[0].length if self.keys else 0

    @property
    def keys_equal(self) -> bool:
        return bool(self.keys) and len(set(self.keys)) == 1
