"""
Binary [n, k, d] linear codes: encoding, syndromes, table decoding,
duals and the coset structure of nested pairs.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional

import numpy as np

from src.codes import gf2
from src.codes.bitstring import BitString
from src.utils import logging
from src.utils.config import MAX_ENUMERATION_DIMENSION
from src.utils.errors import (
    DecodeFailure,
    DimensionError,
    DomainError,
    MembershipError,
    NestingError,
)

DISTANCE_SPOT_CHECKS = 2000


@dataclass(frozen=True, eq=False)
class LinearCode:
    """
    Binary linear code given by a full-rank generator and its parity check.

    Instances are immutable; derived data (minimum distance, syndrome
    table) is computed once and cached on the instance.
    """

    generator: np.ndarray
    parity_check: np.ndarray
    name: str = "code"
    declared_distance: Optional[int] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.generator.setflags(write=False)
        self.parity_check.setflags(write=False)

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def from_generator(cls, generator, name: str = "code", d: Optional[int] = None,
                       length: Optional[int] = None) -> LinearCode:
        """
        Build a code from generator rows; the parity check is the null space.

        Args:
            generator: k x n matrix (rows as strings, BitStrings or arrays)
            name: Catalog name
            d: Declared minimum distance (required when k > 20)
            length: Code length, needed only for the zero code (no rows)

        Raises:
            DimensionError: If the rows are linearly dependent
        """
        g = gf2.as_matrix(generator, cols=length)
        if gf2.rank(g) != g.shape[0]:
            raise DimensionError(f"Generator rows of '{name}' are linearly dependent")
        h = gf2.null_space(g)
        return cls._checked(g, h, name, d)

    @classmethod
    def from_matrices(cls, generator, parity_check, name: str = "code",
                      d: Optional[int] = None) -> LinearCode:
        """Build a code from both matrices and validate G·Hᵀ = 0 and the ranks."""
        g = gf2.as_matrix(generator)
        h = gf2.as_matrix(parity_check, cols=g.shape[1])
        if g.shape[1] != h.shape[1]:
            raise DimensionError(
                f"Generator has {g.shape[1]} columns but parity check has {h.shape[1]}"
            )
        if gf2.rank(g) != g.shape[0]:
            raise DimensionError(f"Generator rows of '{name}' are linearly dependent")
        if gf2.rank(h) != h.shape[0] or h.shape[0] != g.shape[1] - g.shape[0]:
            raise DimensionError(
                f"Parity check of '{name}' must have {g.shape[1] - g.shape[0]} independent rows"
            )
        return cls._checked(g, h, name, d)

    @classmethod
    def _checked(cls, g: np.ndarray, h: np.ndarray, name: str, d: Optional[int]) -> LinearCode:
        if np.any(gf2.matmul(g, h.T)):
            raise DimensionError(f"G·Hᵀ ≠ 0 for code '{name}'")
        code = cls(generator=g, parity_check=h, name=name, declared_distance=d)
        if d is not None and code.k <= MAX_ENUMERATION_DIMENSION:
            computed = code.d
            if computed != d:
                raise DomainError(f"Declared distance {d} of '{name}' differs from computed {computed}")
        elif d is None and code.k > MAX_ENUMERATION_DIMENSION:
            raise DomainError(
                f"Code '{name}' has dimension {code.k}; its minimum distance must be declared"
            )
        return code

    # ------------------------------------------------------------------
    # Parameters
    # ------------------------------------------------------------------
    @property
    def n(self) -> int:
        return int(self.generator.shape[1])

    @property
    def k(self) -> int:
        return int(self.generator.shape[0])

    @cached_property
    def d(self) -> Optional[int]:
        """Minimum distance; None for the zero code."""
        if self.k == 0:
            return None
        if self.k <= MAX_ENUMERATION_DIMENSION:
            return minimum_distance(self)
        return self.declared_distance

    @property
    def t(self) -> int:
        """Error-correction radius ⌊(d−1)/2⌋; the zero code decodes any word."""
        if self.d is None:
            return self.n
        return (self.d - 1) // 2

    @cached_property
    def syndrome_table(self) -> SyndromeTable:
        return build_syndrome_table(self)

    def __repr__(self) -> str:
        return f"LinearCode(name={self.name!r}, n={self.n}, k={self.k}, d={self.d})"


@dataclass(frozen=True)
class SyndromeTable:
    """Map from syndrome to the minimum-weight error of weight ≤ radius."""

    code_name: str
    radius: int
    entries: dict[BitString, BitString]

    def __contains__(self, syndrome: BitString) -> bool:
        return syndrome in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, syndrome: BitString) -> BitString:
        try:
            return self.entries[syndrome]
        except KeyError:
            raise DecodeFailure(str(syndrome)) from None


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------
def encode(code: LinearCode, message: BitString) -> BitString:
    """Return message · G."""
    if message.length != code.k:
        raise DimensionError(f"Message length {message.length} != k = {code.k} for '{code.name}'")
    return BitString.from_array(gf2.matmul(message.to_array().reshape(1, -1), code.generator))


def syndrome(code: LinearCode, word: BitString) -> BitString:
    """Return H · wordᵀ; zero iff the word is a codeword."""
    if word.length != code.n:
        raise DimensionError(f"Word length {word.length} != n = {code.n} for '{code.name}'")
    return BitString.from_array(gf2.matmul(code.parity_check, word.to_array().reshape(-1, 1)))


def contains(code: LinearCode, word: BitString) -> bool:
    return syndrome(code, word).is_zero()


def codewords(code: LinearCode) -> np.ndarray:
    """All 2^k codewords as rows, indexed by message value."""
    return gf2.span(code.generator)


def iter_codewords(code: LinearCode) -> Iterator[BitString]:
    for row in codewords(code):
        yield BitString.from_array(row)


def minimum_distance(code: LinearCode) -> Optional[int]:
    """Brute-force minimum weight over the non-zero codewords."""
    if code.k == 0:
        return None
    if code.k > MAX_ENUMERATION_DIMENSION:
        raise DomainError(f"Enumerating 2^{code.k} codewords of '{code.name}' is not supported")
    weights = codewords(code).sum(axis=1)
    return int(weights[1:].min())


def spot_check_distance(code: LinearCode, rng: np.random.Generator,
                        samples: int = DISTANCE_SPOT_CHECKS) -> bool:
    """
    Probabilistic validation of a declared distance for large codes.

    Draws random non-zero codewords and checks none is lighter than d.
    """
    if code.d is None:
        return True
    for _ in range(samples):
        word = random_codeword(code, rng)
        if not word.is_zero() and word.weight < code.d:
            return False
    return True


def build_syndrome_table(code: LinearCode) -> SyndromeTable:
    """
    Enumerate all errors of weight ≤ t in order of increasing weight.

    Raises:
        DomainError: If two correctable errors share a syndrome, meaning the
            declared distance is wrong
    """
    radius = min(code.t, code.n)
    entries: dict[BitString, BitString] = {}
    for weight in range(radius + 1):
        for positions in itertools.combinations(range(code.n), weight):
            error = BitString.from_positions(code.n, positions)
            key = syndrome(code, error)
            if key in entries:
                raise DomainError(
                    f"Errors {entries[key]} and {error} of '{code.name}' share syndrome {key}"
                )
            entries[key] = error
    logging.debug(f"Built syndrome table for '{code.name}' with {len(entries)} entries")
    return SyndromeTable(code_name=code.name, radius=radius, entries=entries)


def decode(code: LinearCode, table: SyndromeTable, word: BitString) -> tuple[BitString, BitString]:
    """
    Table decoding.

    Returns:
        Tuple (codeword, error) with word = codeword ⊕ error

    Raises:
        DecodeFailure: If the syndrome has no table entry (weight above t)
    """
    error = table.lookup(syndrome(code, word))
    return word ^ error, error


def solve_syndrome(code: LinearCode, target: BitString) -> BitString:
    """Deterministic x with H·xᵀ = target (free coordinates zero)."""
    if target.length != code.n - code.k:
        raise DimensionError(
            f"Syndrome length {target.length} != n − k = {code.n - code.k} for '{code.name}'"
        )
    if target.length == 0:
        return BitString.zeros(code.n)
    solution = gf2.solve_right(code.parity_check, target.to_array())
    if solution is None:
        raise MembershipError(f"Syndrome {target} is not reachable for '{code.name}'")
    return BitString.from_array(solution)


def dual(code: LinearCode) -> LinearCode:
    """[n, n−k] dual code: generator H, parity check G."""
    name = code.name[:-5] if code.name.endswith("-dual") else f"{code.name}-dual"
    return LinearCode._checked(code.parity_check.copy(), code.generator.copy(), name, None)


def renamed(code: LinearCode, name: str) -> LinearCode:
    return dataclasses.replace(code, name=name)


def random_codeword(code: LinearCode, rng: np.random.Generator) -> BitString:
    """Uniform codeword via a uniform message."""
    return encode(code, BitString.random(code.k, rng))


def same_row_space(a: LinearCode, b: LinearCode) -> bool:
    if a.n != b.n or a.k != b.k:
        return False
    return bool(np.array_equal(gf2.row_basis(a.generator), gf2.row_basis(b.generator)))


# ----------------------------------------------------------------------
# Nested pairs and cosets
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class NestingReport:
    is_subset: bool
    is_strict: bool


def nesting_report(c1: LinearCode, c2: LinearCode) -> NestingReport:
    """Subset membership of C2 in C1 plus strictness."""
    if c1.n != c2.n:
        raise DimensionError(f"Codes have different lengths: {c1.n} vs {c2.n}")
    if c2.k == 0:
        is_subset = True
    else:
        is_subset = not np.any(gf2.matmul(c1.parity_check, c2.generator.T))
    return NestingReport(is_subset=is_subset, is_strict=is_subset and c2.k < c1.k)


def validate_nested(c1: LinearCode, c2: LinearCode, strict: bool = True) -> bool:
    """
    True iff every generator row of C2 has zero syndrome under H1.

    With ``strict`` the inclusion must also be proper.
    """
    report = nesting_report(c1, c2)
    return report.is_strict if strict else report.is_subset


@functools.lru_cache(maxsize=64)
def _coset_leader_basis(c1: LinearCode, c2: LinearCode) -> tuple[np.ndarray, np.ndarray]:
    """
    Rows of G1 that extend a basis of C2 to a basis of C1, taken greedily
    in generator order, stacked above the C2 basis.
    """
    if not validate_nested(c1, c2, strict=False):
        raise NestingError(f"'{c2.name}' is not contained in '{c1.name}'")

    base = list(c2.generator)
    leaders: list[np.ndarray] = []
    current_rank = len(base)
    for row in c1.generator:
        if len(leaders) == c1.k - c2.k:
            break
        candidate_rank = gf2.rank(gf2.as_matrix(base + leaders + [row]))
        if candidate_rank > current_rank:
            leaders.append(row)
            current_rank = candidate_rank

    leader_matrix = gf2.as_matrix(leaders, cols=c1.n)
    stacked = gf2.as_matrix(leaders + base, cols=c1.n)
    return leader_matrix, stacked


def coset_label(c1: LinearCode, c2: LinearCode, u: BitString) -> BitString:
    """
    Canonical (k1−k2)-bit label of u ⊕ C2 in C1/C2.

    The label is the coordinate vector of u on the coset-leader rows of G1;
    two elements share a label iff they differ by an element of C2.

    Raises:
        NestingError: If C2 is not contained in C1
        MembershipError: If u is not in C1
    """
    leaders, stacked = _coset_leader_basis(c1, c2)
    if u.length != c1.n:
        raise DimensionError(f"Word length {u.length} != n = {c1.n}")
    if not contains(c1, u):
        raise MembershipError(f"{u} is not a codeword of '{c1.name}'")
    coefficients = gf2.solve_left(stacked, u.to_array())
    if coefficients is None:
        raise MembershipError(f"{u} is outside the span of '{c1.name}'")
    return BitString.from_array(coefficients[: leaders.shape[0]])


def coset_representative(c1: LinearCode, c2: LinearCode, label: BitString) -> BitString:
    """Inverse of ``coset_label``: the combination of coset-leader rows."""
    leaders, _ = _coset_leader_basis(c1, c2)
    if label.length != leaders.shape[0]:
        raise DimensionError(f"Label length {label.length} != k1 − k2 = {leaders.shape[0]}")
    if label.length == 0:
        return BitString.zeros(c1.n)
    return BitString.from_array(gf2.matmul(label.to_array().reshape(1, -1), leaders))
