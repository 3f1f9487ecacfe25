"""
Tests for the executable documentation runner.
"""

import pytest

from qdesigns.docsbook import (
    DEFAULT_DOCS,
    doctest_examples,
    lines_match,
    parse_transcripts,
    run_command,
)
from qdesigns.error_handling import UsageError

PAGE = """# Example

Some prose.

```console
$ qdesigns qbinom --q 2 --n 4 --k 2
35
$ qdesigns qbinom --q 2 --n 3 --k 1
7

```

```python
print("not a transcript")
```

```console
$ qdesigns enumerate --q 6 --n 3 --k 1 --count-only
[exit 2]
```
"""


class TestParsing:

    def test_fences_and_steps(self):
        transcripts = parse_transcripts("example.md", PAGE)
        assert [t.index for t in transcripts] == [0, 1]
        first = transcripts[0]
        assert [s.command for s in first.steps] == [
            "qdesigns qbinom --q 2 --n 4 --k 2",
            "qdesigns qbinom --q 2 --n 3 --k 1",
        ]
        assert first.steps[0].expected == ["35"]
        assert first.steps[1].expected == ["7", ""]

    @pytest.mark.parametrize("expected,actual,result", [
        (["a", "b"], ["a", "b"], True),
        (["a"], ["a", "b"], False),
        (["a", "..."], ["a", "b", "c"], True),
        (["...", "c"], ["a", "b", "c"], True),
        (["a", "...", "c"], ["a", "c"], True),
        (["a", "...", "d"], ["a", "b", "c"], False),
        (["..."], [], True),
        ([], [], True),
    ])
    def test_lines_match(self, expected, actual, result):
        assert lines_match(expected, actual) is result


class TestExecution:

    def test_exit_status_line(self):
        assert run_command("qdesigns enumerate --q 6 --n 3 --k 1 --count-only") == ["[exit 2]"]
        assert run_command("qdesigns qbinom --q 1 --n 3 --k 1") == ["[exit 2]"]
        assert run_command("qdesigns qbinom --q 6 --n 3 --k 1") == ["43"]
        assert run_command("qdesigns qbinom --q 2 --n 3") == ["[exit 2]"]

    def test_only_qdesigns_commands(self):
        with pytest.raises(UsageError):
            run_command("ls -l")

    def test_page_in_tmp_dir(self, tmp_path):
        (tmp_path / "page.md").write_text(PAGE)
        report = doctest_examples(tmp_path)
        assert report.passed
        assert len(report.transcripts) == 2

    def test_drift_produces_diff(self, tmp_path):
        (tmp_path / "page.md").write_text("```console\n$ qdesigns qbinom --q 2 --n 4 --k 2\n36\n```\n")
        report = doctest_examples(tmp_path)
        assert not report.passed
        assert "-36" in report.transcripts[0].diff and "+35" in report.transcripts[0].diff

    def test_empty_directory_rejected(self, tmp_path):
        with pytest.raises(UsageError):
            doctest_examples(tmp_path)
        with pytest.raises(UsageError):
            doctest_examples(tmp_path / "missing")

    def test_docs_check_command(self, run_cli, tmp_path):
        (tmp_path / "page.md").write_text(PAGE)
        status, out = run_cli("docs-check", "--docs", str(tmp_path))
        assert status == 0
        assert out.splitlines() == ["PASS page.md#0", "PASS page.md#1", "docs: passed"]

    @pytest.mark.slow
    def test_repository_docs(self):
        report = doctest_examples(DEFAULT_DOCS)
        assert [(t.page, t.index) for t in report.transcripts if not t.passed] == []
