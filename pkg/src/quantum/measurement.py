"""Measurement records shared by the dense and tableau backends."""

from dataclasses import dataclass
from typing import Union

import numpy as np

from src.quantum.pauli import PauliProduct

# Probabilities closer than this to 0 or 1 are treated as certain, so the
# dense backend draws from the generator exactly when the tableau does.
DETERMINISM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MeasurementRecord:
    """
    One measurement event.

    ``outcome`` is ±1 for Pauli products and 0/1 for a computational
    measurement of a single qubit.
    """

    observable: Union[PauliProduct, int]
    outcome: int
    deterministic: bool

    @property
    def bit(self) -> int:
        """Outcome as a bit: eigenvalue −1 maps to 1."""
        if isinstance(self.observable, int):
            return self.outcome
        return 0 if self.outcome == 1 else 1


def sample_sign(p_plus: float, rng: np.random.Generator) -> tuple[int, bool]:
    """
    Draw a ±1 outcome with P(+1) = p_plus.

    Returns:
        Tuple (outcome, deterministic). The generator is consumed only for
        genuinely random outcomes.
    """
    if p_plus >= 1.0 - DETERMINISM_TOLERANCE:
        return 1, True
    if p_plus <= DETERMINISM_TOLERANCE:
        return -1, True
    return (1 if rng.random() < p_plus else -1), False
