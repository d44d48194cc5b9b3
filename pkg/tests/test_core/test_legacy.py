"""Tests for the legacy syntax rewriter."""

import pytest

from pypi_census.core.legacy import apply_edits, legacy_transform
from pypi_census.core.lexing import mask_source, try_parse


class TestLegacyTransform:
    """Tests for individual rewrites."""

    @pytest.mark.parametrize(
        "source, expected",
        [
            ("print 'hi'\n", "print('hi')\n"),
            ("print\n", "print()\n"),
            ('print >>sys.stderr, "x"\n', 'print("x", file=sys.stderr)\n'),
            ("x = `1`\n", "x = repr(1)\n"),
            ("x = 0755\n", "x = 0o755\n"),
            ("x = 10L\n", "x = 10\n"),
            ("if a <> b: pass\n", "if a != b: pass\n"),
            ('x = ur"abc"\n', 'x = r"abc"\n'),
            ("print 'a',\n", "print('a', end=\" \")\n"),
            ("exec 'x = 1'\n", "exec('x = 1')\n"),
            ("exec code in ns\n", "exec(code, ns)\n"),
            ("exec code in g, l\n", "exec(code, g, l)\n"),
            ("raise ValueError, 'bad'\n", "raise ValueError('bad')\n"),
            ("raise E, v, tb\n", "raise E(v).with_traceback(tb)\n"),
        ],
    )
    def test_rewrites(self, source: str, expected: str) -> None:
        """Test each legacy construct is rewritten to parseable syntax."""
        assert legacy_transform(source) == expected

    def test_except_comma(self) -> None:
        """Test ``except E, v`` becomes ``except E as v``."""
        source = "try:\n    pass\nexcept ValueError, e:\n    pass\n"
        assert "except ValueError as e:" in legacy_transform(source)

    def test_except_tuple_comma(self) -> None:
        """Test a bracketed exception tuple keeps its inner comma."""
        source = "try:\n    pass\nexcept (A, B), e:\n    pass\n"
        assert legacy_transform(source) == "try:\n    pass\nexcept (A, B) as e:\n    pass\n"

    def test_exec_in_brackets_kept(self) -> None:
        """Test an ``in`` inside brackets is not taken as the namespace separator."""
        assert legacy_transform("exec f(x in y) in ns\n") == "exec(f(x in y), ns)\n"

    def test_preserves_line_count(self) -> None:
        """Test every rewrite keeps the number of lines."""
        source = "import os\nprint 'a', 'b'\nx = `os`\nimport sys\n"
        rewritten = legacy_transform(source)

        assert rewritten is not None
        assert rewritten.count("\n") == source.count("\n")
        assert try_parse(rewritten) is not None

    def test_strings_untouched(self) -> None:
        """Test legacy-looking text inside strings is not rewritten."""
        source = "s = 'print x <> 0755'\nprint s\n"
        assert legacy_transform(source) == "s = 'print x <> 0755'\nprint(s)\n"

    def test_nothing_to_rewrite(self) -> None:
        """Test modern source yields None."""
        assert legacy_transform("import os\n") is None

    def test_still_broken(self) -> None:
        """Test None when the rewritten text still fails to parse."""
        assert legacy_transform("print 'x'\ndef f(:\n    pass\n") is None


class TestHelpers:
    """Tests for the masking and edit helpers."""

    def test_mask_keeps_length(self) -> None:
        """Test masking blanks string bodies and comments in place."""
        source = "x = 'abc'  # note\n"
        masked = mask_source(source)

        assert len(masked) == len(source)
        assert masked == "x = 'xxx'  ######\n"

    def test_overlapping_edit_dropped(self) -> None:
        """Test an edit overlapping an earlier one is ignored."""
        assert apply_edits("abcdef", [(0, 3, "X"), (2, 4, "Y"), (4, 4, "-")]) == "Xd-ef"
