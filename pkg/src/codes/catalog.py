"""
Built-in codes, the code definition file format and CSS catalog lookup.

Code file format (line oriented, ``#`` starts a comment)::

    code <n> <k> [d] [name=<id>]
    <k generator rows of n bits>
    parity                      # optional, followed by n−k rows
    <n−k parity-check rows>
    css <name> <c1-name> <c2-name>

The parity check is computed by elimination when the block is absent.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from src.codes import gf2
from src.codes.css_codes import CssCode, css_from_pair
from src.codes.linear_codes import LinearCode, dual, renamed
from src.utils import logging
from src.utils.config import DEFAULT_CSS_CODE
from src.utils.errors import ConfigParseError, CssConstructionError, DimensionError, DomainError

# g(x) = 1 + x^2 + x^4 + x^5 + x^6 + x^10 + x^11
GOLAY_POLYNOMIAL = (1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1)


# ----------------------------------------------------------------------
# Classical codes
# ----------------------------------------------------------------------
def repetition_code(n: int = 3) -> LinearCode:
    """[n, 1, n] repetition code with H rows e_i + e_{i+1}."""
    generator = np.ones((1, n), dtype=np.uint8)
    parity = np.zeros((n - 1, n), dtype=np.uint8)
    for i in range(n - 1):
        parity[i, i] = parity[i, i + 1] = 1
    return LinearCode.from_matrices(generator, parity, name=f"repetition{n}")


def hamming_code() -> LinearCode:
    """[7, 4, 3] Hamming code in standard form G = [I4 | P], H = [Pᵀ | I3]."""
    p = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]], dtype=np.uint8)
    generator = np.hstack([np.eye(4, dtype=np.uint8), p])
    parity = np.hstack([p.T, np.eye(3, dtype=np.uint8)])
    return LinearCode.from_matrices(generator, parity, name="hamming7")


def simplex_code() -> LinearCode:
    """[7, 3, 4] simplex code, the dual of the Hamming code."""
    return renamed(dual(hamming_code()), "simplex7")


def golay_code() -> LinearCode:
    """[23, 12, 7] binary Golay code from cyclic shifts of g(x)."""
    n, k = 23, 12
    generator = np.zeros((k, n), dtype=np.uint8)
    for shift in range(k):
        generator[shift, shift:shift + len(GOLAY_POLYNOMIAL)] = GOLAY_POLYNOMIAL
    return LinearCode.from_generator(generator, name="golay23", d=7)


def full_space_code(n: int) -> LinearCode:
    return LinearCode.from_generator(np.eye(n, dtype=np.uint8), name=f"full{n}")


def zero_code(n: int) -> LinearCode:
    return LinearCode.from_generator([], name=f"zero{n}", length=n)


def extended_repetition_code() -> LinearCode:
    """[3, 2, 1] code span{111, 100}, which contains the repetition code."""
    return LinearCode.from_generator(["111", "100"], name="rep3-extended")


# ----------------------------------------------------------------------
# CSS pairs
# ----------------------------------------------------------------------
@functools.lru_cache(maxsize=None)
def builtin_css_codes() -> dict[str, CssCode]:
    """
    Built-in CSS pairs keyed by catalog name.

    trivial: [[1,1]], t = 0 (no protection); rep3: [[3,1]], t = 0, two cosets;
    steane: [[7,1]], t = 1; golay: [[23,1]], t = 3.
    """
    golay = golay_code()
    pairs = {
        "trivial": css_from_pair(full_space_code(1), zero_code(1), name="trivial"),
        "rep3": css_from_pair(extended_repetition_code(), repetition_code(3), name="rep3"),
        "steane": css_from_pair(hamming_code(), simplex_code(), name="steane"),
        "golay": css_from_pair(golay, renamed(dual(golay), "golay23-dual"), name="golay"),
    }
    logging.debug(f"Loaded built-in CSS catalog: {sorted(pairs)}")
    return pairs


def builtin_codes() -> dict[str, LinearCode]:
    """Classical codes of the built-in catalog keyed by name."""
    codes: dict[str, LinearCode] = {}
    for pair in builtin_css_codes().values():
        codes.setdefault(pair.c1.name, pair.c1)
        codes.setdefault(pair.c2.name, pair.c2)
    return codes


def default_catalog() -> list[CssCode]:
    return sorted(builtin_css_codes().values(), key=lambda code: (code.n, code.name))


# ----------------------------------------------------------------------
# Code definition files
# ----------------------------------------------------------------------
@dataclass
class CodeLibrary:
    codes: dict[str, LinearCode] = field(default_factory=dict)
    pairs: dict[str, CssCode] = field(default_factory=dict)


def _parse_rows(lines: list[tuple[int, str]], start: int, count: int, width: int,
                context: str) -> tuple[np.ndarray, int]:
    rows = []
    index = start
    while len(rows) < count:
        if index >= len(lines):
            raise ConfigParseError(f"{context}: expected {count} rows, found {len(rows)}",
                                   line=lines[-1][0] if lines else None)
        line_number, text = lines[index]
        if len(text) != width or any(ch not in "01" for ch in text):
            raise ConfigParseError(f"{context}: row {text!r} is not {width} bits", line=line_number)
        rows.append(text)
        index += 1
    return gf2.as_matrix(rows, cols=width), index


def parse_code_text(text: str) -> CodeLibrary:
    """
    Parse a code definition file.

    Raises:
        ConfigParseError: On malformed lines, unknown code names or invalid pairs
    """
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append((number, content))

    library = CodeLibrary()
    index = 0
    while index < len(lines):
        line_number, content = lines[index]
        tokens = content.split()
        keyword = tokens[0].lower()

        if keyword == "code":
            options = [t for t in tokens[1:] if "=" in t]
            numbers = [t for t in tokens[1:] if "=" not in t]
            if len(numbers) not in (2, 3):
                raise ConfigParseError("header must read 'code n k [d]'", key="code", line=line_number)
            try:
                n, k = int(numbers[0]), int(numbers[1])
                d = int(numbers[2]) if len(numbers) == 3 else None
            except ValueError as e:
                raise ConfigParseError(f"non-integer parameter: {e}", key="code", line=line_number) from e
            name = f"code{len(library.codes) + 1}"
            for option in options:
                option_key, _, option_value = option.partition("=")
                if option_key != "name" or not option_value:
                    raise ConfigParseError(f"unknown header option {option!r}", key="code", line=line_number)
                name = option_value

            generator, index = _parse_rows(lines, index + 1, k, n, f"code '{name}' generator")
            parity = None
            if index < len(lines) and lines[index][1].lower() == "parity":
                parity, index = _parse_rows(lines, index + 1, n - k, n, f"code '{name}' parity")
            try:
                if parity is None:
                    code = LinearCode.from_generator(generator, name=name, d=d, length=n)
                else:
                    code = LinearCode.from_matrices(generator, parity, name=name, d=d)
            except (DimensionError, DomainError) as e:
                raise ConfigParseError(str(e), key="code", line=line_number) from e
            library.codes[name] = code
            continue

        if keyword == "css":
            if len(tokens) != 4:
                raise ConfigParseError("expected 'css <name> <c1> <c2>'", key="css", line=line_number)
            pair_name, c1_name, c2_name = tokens[1:]
            missing = [c for c in (c1_name, c2_name) if c not in library.codes]
            if missing:
                raise ConfigParseError(f"unknown code(s) {missing}", key="css", line=line_number)
            try:
                library.pairs[pair_name] = css_from_pair(
                    library.codes[c1_name], library.codes[c2_name], name=pair_name
                )
            except CssConstructionError as e:
                raise ConfigParseError(str(e), key="css", line=line_number) from e
            index += 1
            continue

        raise ConfigParseError(f"unexpected line {content!r}", line=line_number)

    return library


@functools.lru_cache(maxsize=16)
def load_code_file(path: str) -> CodeLibrary:
    """Load and cache a code definition file."""
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Code file not found: {file_path}")
    try:
        library = parse_code_text(file_path.read_text())
    except ConfigParseError as e:
        logging.error(f"Invalid code file {file_path}: {e}")
        raise
    logging.info(
        f"Loaded {len(library.codes)} codes and {len(library.pairs)} CSS pairs from {file_path}"
    )
    return library


# ----------------------------------------------------------------------
# Lookup
# ----------------------------------------------------------------------
def available_css_codes(code_file: Optional[str] = None) -> dict[str, CssCode]:
    pairs = dict(builtin_css_codes())
    if code_file:
        pairs.update(load_code_file(str(code_file)).pairs)
    return pairs


def resolve_css(name: Optional[str] = None, code_file: Optional[str] = None) -> CssCode:
    """
    Look up a CSS pair by name (built-ins first, then the code file).

    Raises:
        KeyError: If no pair has that name
    """
    name = name or DEFAULT_CSS_CODE
    pairs = available_css_codes(code_file)
    if name not in pairs:
        raise KeyError(f"Unknown CSS code '{name}'; available: {sorted(pairs)}")
    return pairs[name]


def resolve_catalog(names: Optional[Sequence[str]] = None,
                    code_file: Optional[str] = None) -> list[CssCode]:
    """The candidate codes a protocol may choose from, smallest length first."""
    if not names:
        catalog = list(available_css_codes(code_file).values())
    else:
        catalog = [resolve_css(name, code_file) for name in names]
    return sorted(catalog, key=lambda code: (code.n, code.name))
