"""
Design files.

Text format: a header line "q n k", then the blocks separated by blank
lines, each block k lines of n field digits (hex digits for q > 10).
JSON format: {"q": .., "n": .., "k": .., "blocks": [[row, ...], ...]}.
Blocks are canonicalized on load; a block of rank below k is rejected.
"""

import json
from pathlib import Path
from typing import Iterable, List, Union

from qdesigns.error_handling import DesignFormatError, QDesignsError
from qdesigns.logging_config import get_logger
from qdesigns.models import canonical_json
from qdesigns.services.gf_core import make_field
from qdesigns.services.grassmann import SubspaceBasis, parse_rows, subspace_from_rows
from qdesigns.services.verifier import DesignCandidate

logger = get_logger("design_io")


def _blocks_from_rows(q: int, n: int, k: int, blocks: Iterable[List[str]]) -> DesignCandidate:
    field = make_field(q)
    parsed: List[SubspaceBasis] = []
    for number, lines in enumerate(blocks, start=1):
        if len(lines) != k:
            raise DesignFormatError(f"block {number} has {len(lines)} rows, expected {k}")
        if any(len(line) != n for line in lines):
            raise DesignFormatError(f"block {number} has a row whose length is not {n}")
        try:
            rows = parse_rows(field, lines)
        except ValueError as e:
            raise DesignFormatError(f"block {number}: {e}") from e
        block = subspace_from_rows(field, n, rows)
        if block.k != k:
            raise DesignFormatError(f"block {number} has rank {block.k}, expected {k}")
        parsed.append(block)
    return DesignCandidate(field, n, k, tuple(parsed))


def _check_header(q: int, n: int, k: int) -> None:
    if n < 1 or not 1 <= k <= n:
        raise DesignFormatError(f"header needs 1 <= k <= n, got n={n}, k={k}")


def parse_design_text(text: str) -> DesignCandidate:
    lines = [line.strip() for line in text.splitlines()]
    while lines and not lines[0]:
        lines.pop(0)
    if not lines:
        raise DesignFormatError("empty design file")
    try:
        q, n, k = (int(x) for x in lines[0].split())
    except ValueError as e:
        raise DesignFormatError(f"bad header {lines[0]!r}; expected 'q n k'") from e
    _check_header(q, n, k)

    blocks: List[List[str]] = []
    current: List[str] = []
    for line in lines[1:]:
        if line:
            current.append(line)
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    return _blocks_from_rows(q, n, k, blocks)


def parse_design_json(text: str) -> DesignCandidate:
    try:
        document = json.loads(text)
        q, n, k = int(document["q"]), int(document["n"]), int(document["k"])
        blocks = [[str(row) for row in block] for block in document["blocks"]]
    except (ValueError, KeyError, TypeError) as e:
        raise DesignFormatError(f"bad JSON design: {e}") from e
    _check_header(q, n, k)
    return _blocks_from_rows(q, n, k, blocks)


def load_design(path: Union[str, Path]) -> DesignCandidate:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DesignFormatError(f"cannot read design file {path}: {e.strerror or e}") from e
    try:
        if text.lstrip().startswith("{"):
            design = parse_design_json(text)
        else:
            design = parse_design_text(text)
    except QDesignsError:
        logger.warning("design_file_rejected", path=str(path))
        raise
    logger.info("design_loaded", path=str(path), blocks=design.size)
    return design


def format_design_text(design: DesignCandidate) -> str:
    parts = [f"{design.field.q} {design.n} {design.k}"]
    for block in design.blocks:
        parts.append("")
        parts.extend(block.format_rows())
    return "\n".join(parts) + "\n"


def format_design_json(design: DesignCandidate) -> str:
    return canonical_json({
        "q": design.field.q,
        "n": design.n,
        "k": design.k,
        "blocks": [block.format_rows() for block in design.blocks],
    }) + "\n"


def save_design(design: DesignCandidate, path: Union[str, Path], fmt: str = "text") -> None:
    text = format_design_json(design) if fmt == "json" else format_design_text(design)
    Path(path).write_text(text, encoding="utf-8")
    logger.info("design_saved", path=str(path), blocks=design.size, format=fmt)
