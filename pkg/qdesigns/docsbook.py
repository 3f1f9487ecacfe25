"""
Executable documentation.

Every ```console fence in docs/*.md is a transcript: lines starting with
"$ qdesigns" are commands, the lines after them are the expected stdout.
A line holding only "..." matches any run of output lines, and a nonzero
exit status is shown as a final "[exit N]" line. Each fence runs in a fresh
temporary working directory, so files written by one command are visible to
the next command of the same fence only.
"""

import difflib
import io
import os
import re
import shlex
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

from qdesigns.error_handling import UsageError
from qdesigns.logging_config import get_logger
from qdesigns.models import DocsReport, TranscriptResult

logger = get_logger("docsbook")

DEFAULT_DOCS = Path(__file__).resolve().parents[1] / "docs"
FENCE = re.compile(r"^```console[ \t]*\n(.*?)^```[ \t]*$", re.DOTALL | re.MULTILINE)
PROMPT = "$ "
ELLIPSIS = "..."


@dataclass
class Step:
    command: str
    expected: List[str] = field(default_factory=list)


@dataclass
class Transcript:
    page: str
    index: int
    steps: List[Step]


def parse_transcripts(page: str, text: str) -> List[Transcript]:
    transcripts = []
    for index, match in enumerate(FENCE.finditer(text)):
        steps: List[Step] = []
        for line in match.group(1).splitlines():
            if line.startswith(PROMPT):
                steps.append(Step(line[len(PROMPT):].strip()))
            elif steps:
                steps[-1].expected.append(line.rstrip())
        transcripts.append(Transcript(page, index, steps))
    return transcripts


def lines_match(expected: Sequence[str], actual: Sequence[str]) -> bool:
    """Line-by-line equality where an "..." line absorbs zero or more lines."""
    if not expected:
        return not actual
    if expected[0] == ELLIPSIS:
        return any(lines_match(expected[1:], actual[i:]) for i in range(len(actual) + 1))
    return bool(actual) and actual[0] == expected[0] and lines_match(expected[1:], actual[1:])


def run_command(command: str) -> List[str]:
    """Run one `qdesigns ...` line in-process and return its stdout lines."""
    from qdesigns.main import main

    argv = shlex.split(command)
    if not argv or argv[0] != "qdesigns":
        raise UsageError(f"transcript command must start with 'qdesigns': {command!r}")
    buffer = io.StringIO()
    try:
        status = main(argv[1:], stdout=buffer)
    except SystemExit as e:
        status = e.code if isinstance(e.code, int) else 2
    lines = [line.rstrip() for line in buffer.getvalue().splitlines()]
    if status:
        lines.append(f"[exit {status}]")
    return lines


def run_transcript(transcript: Transcript) -> TranscriptResult:
    previous = os.getcwd()
    expected_all: List[str] = []
    actual_all: List[str] = []
    passed = True
    with tempfile.TemporaryDirectory(prefix="qdesigns-docs-") as workdir:
        os.chdir(workdir)
        try:
            for step in transcript.steps:
                actual = run_command(step.command)
                expected = list(step.expected)
                while expected and not expected[-1]:
                    expected.pop()
                if not lines_match(expected, actual):
                    passed = False
                expected_all += [PROMPT + step.command] + expected
                actual_all += [PROMPT + step.command] + actual
        finally:
            os.chdir(previous)

    diff = ""
    if not passed:
        diff = "\n".join(difflib.unified_diff(expected_all, actual_all, "expected", "actual", lineterm=""))
        logger.warning("transcript_drift", page=transcript.page, index=transcript.index)
    return TranscriptResult(
        page=transcript.page,
        index=transcript.index,
        commands=[step.command for step in transcript.steps],
        passed=passed,
        diff=diff,
    )


def doctest_examples(docs_dir: Optional[Union[str, Path]] = None) -> DocsReport:
    """Re-execute every transcript under docs_dir (default: the repo's docs/)."""
    root = Path(docs_dir) if docs_dir else DEFAULT_DOCS
    if not root.is_dir():
        raise UsageError(f"docs directory not found: {root}")
    results: List[TranscriptResult] = []
    with logger.track_performance("doctest_examples", docs=str(root)):
        for page in sorted(root.glob("*.md")):
            for transcript in parse_transcripts(page.name, page.read_text(encoding="utf-8")):
                results.append(run_transcript(transcript))
    if not results:
        raise UsageError(f"no console transcripts under {root}")
    return DocsReport(passed=all(r.passed for r in results), transcripts=results)
