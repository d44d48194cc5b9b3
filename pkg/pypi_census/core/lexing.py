"""Character-level helpers shared by the legacy rewriter and the token scanner.

``mask_source`` returns a copy of the text with the same length in which
string bodies become ``x`` and comments become ``#``. Quote delimiters,
newlines and all code characters stay in place, so offsets found in the
mask apply directly to the original text.
"""

import ast
import re
import warnings
from typing import Iterator, Optional

PARSE_FILENAME = "<sdist-source>"

# Compile-time warnings (invalid escapes and the like) from scanned sources
# are noise; the filter is keyed to the pseudo file name used for parsing.
for _category in (SyntaxWarning, DeprecationWarning):
    warnings.filterwarnings("ignore", category=_category, module=re.escape(PARSE_FILENAME))

OPENERS = "([{"
CLOSERS = ")]}"


def try_parse(source: str) -> Optional[ast.Module]:
    """Parse with the running interpreter's grammar; None on any failure."""
    try:
        return ast.parse(source, filename=PARSE_FILENAME)
    except (SyntaxError, ValueError, RecursionError, MemoryError, OverflowError):
        return None


def mask_source(source: str, track_triple_quotes: bool = True) -> str:
    """Blank out string bodies and comments, preserving offsets.

    With ``track_triple_quotes=False`` a triple quote is read as an empty
    string followed by an ordinary quote, and every string ends at the end
    of its physical line. That is the line scanner's view of a file.
    """
    out = list(source)
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "#":
            while i < n and source[i] != "\n":
                out[i] = "#"
                i += 1
            continue
        if ch in "'\"":
            triple = track_triple_quotes and source.startswith(ch * 3, i)
            delimiter = ch * 3 if triple else ch
            i += len(delimiter)
            while i < n:
                c = source[i]
                if c == "\\" and i + 1 < n:
                    if source[i + 1] != "\n":
                        out[i + 1] = "x"
                    out[i] = "x"
                    i += 2
                    continue
                if source.startswith(delimiter, i):
                    i += len(delimiter)
                    break
                if c == "\n":
                    if not triple:
                        break
                else:
                    out[i] = "x"
                i += 1
            continue
        i += 1
    return "".join(out)


def skip_space(masked: str, pos: int, end: int) -> int:
    """First position at or after ``pos`` that is not a space or tab."""
    while pos < end and masked[pos] in " \t":
        pos += 1
    return pos


def rstrip_end(masked: str, start: int, end: int) -> int:
    """End offset of ``masked[start:end]`` with trailing blanks and comments removed."""
    while end > start and masked[end - 1] in " \t\r\n\f#\\":
        end -= 1
    return end


def top_level_positions(masked: str, start: int, end: int, char: str) -> list[int]:
    """Offsets of ``char`` in ``masked[start:end]`` at bracket depth zero."""
    depth = 0
    found = []
    for pos in range(start, end):
        c = masked[pos]
        if c in OPENERS:
            depth += 1
        elif c in CLOSERS:
            depth = max(depth - 1, 0)
        elif c == char and depth == 0:
            found.append(pos)
    return found


def iter_statements(masked: str) -> Iterator[tuple[int, int]]:
    """Yield ``(start, end)`` spans of simple statements in a masked text.

    Statements end at a newline outside brackets that is not escaped by a
    backslash, or at a semicolon outside brackets. Spans exclude trailing
    blanks and comments.
    """
    depth = 0
    start = 0
    n = len(masked)
    for pos in range(n):
        c = masked[pos]
        if c in OPENERS:
            depth += 1
        elif c in CLOSERS:
            depth = max(depth - 1, 0)
        elif depth == 0 and (c == ";" or c == "\n"):
            if c == "\n":
                before = masked[start:pos].rstrip("\r")
                if before.endswith("\\"):
                    continue
            end = rstrip_end(masked, start, pos)
            if end > start:
                yield start, end
            start = pos + 1
    end = rstrip_end(masked, start, n)
    if end > start:
        yield start, end
