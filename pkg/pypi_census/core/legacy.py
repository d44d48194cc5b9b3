"""Bounded rewrites that turn legacy (2.x era) syntax into parseable source.

Only constructs that block parsing of a whole module are rewritten; the
goal is to make import statements reachable, not to port code. Every
rewrite keeps the number of lines, so line numbers reported after the
transform match the original text.

Rewrites:
    print statement        print x, y      -> print(x, y)
    print chevron          print >>f, x    -> print(x, file=f)
    exec statement         exec c in g     -> exec(c, g)
    except comma           except E, v:    -> except E as v:
    raise comma            raise E, V, T   -> raise E(V).with_traceback(T)
    backtick repr          `x`             -> repr(x)
    octal literal          0755            -> 0o755
    long suffix            10L             -> 10
    not-equal              a <> b          -> a != b
    unicode raw prefix     ur"..."         -> r"..."
"""

import re
from typing import Optional

from pypi_census.core.lexing import (
    iter_statements,
    mask_source,
    skip_space,
    top_level_positions,
    try_parse,
)

Edit = tuple[int, int, str]

COMPOUND_KEYWORDS = frozenset(
    {"if", "elif", "else", "for", "while", "try", "except", "finally", "with", "def", "class"}
)

_OCTAL = re.compile(r"(?<![\w.])0+([0-7]+)[lL]?(?![\w.])")
_LONG = re.compile(r"(?<![\w.])(?:[1-9]\d*|0[xX][0-9a-fA-F]+|0)([lL])(?![\w.])")
_UR_PREFIX = re.compile(r"(?<![\w])[uU](?=[rR]['\"])")
_WORD = re.compile(r"[^\W\d]\w*")


def legacy_transform(source: str) -> Optional[str]:
    """Rewrite legacy syntax so the strict grammar accepts the module.

    Returns:
        The rewritten text, or None when no rewrite applies or the result
        still fails to parse.
    """
    masked = mask_source(source)
    edits: list[Edit] = []
    for start, end in iter_statements(masked):
        _rewrite_statement(source, masked, start, end, edits)
    _rewrite_expressions(masked, edits)
    if not edits:
        return None

    rewritten = apply_edits(source, edits)
    if rewritten.count("\n") != source.count("\n"):
        return None
    if try_parse(rewritten) is None:
        return None
    return rewritten


def apply_edits(source: str, edits: list[Edit]) -> str:
    """Apply non-overlapping ``(start, end, replacement)`` edits.

    An edit that overlaps an earlier accepted one is dropped.
    """
    accepted: list[Edit] = []
    for edit in sorted(edits, key=lambda e: (e[0], e[1])):
        if accepted and edit[0] < accepted[-1][1]:
            continue
        accepted.append(edit)

    out = source
    for start, end, replacement in reversed(accepted):
        out = out[:start] + replacement + out[end:]
    return out


def _keyword_at(masked: str, pos: int, end: int) -> str:
    match = _WORD.match(masked, pos, end)
    return match.group(0) if match else ""


def _rewrite_statement(source: str, masked: str, start: int, end: int, edits: list[Edit]) -> None:
    s = skip_space(masked, start, end)
    while s < end and masked[s] in "\r\n\f":
        s = skip_space(masked, s + 1, end)
    word = _keyword_at(masked, s, end)

    if word in COMPOUND_KEYWORDS:
        colons = top_level_positions(masked, s, end, ":")
        if not colons:
            return
        if word == "except":
            _fix_except(masked, s + len(word), colons[0], edits)
        body = skip_space(masked, colons[0] + 1, end)
        if body < end:
            _rewrite_statement(source, masked, body, end, edits)
    elif word == "print":
        _fix_print(source, masked, s, end, edits)
    elif word == "exec":
        _fix_exec(masked, s, end, edits)
    elif word == "raise":
        _fix_raise(masked, s, end, edits)


def _fix_print(source: str, masked: str, s: int, e: int, edits: list[Edit]) -> None:
    kw_end = s + len("print")
    p = skip_space(masked, kw_end, e)
    if p >= e:
        edits.append((kw_end, kw_end, "()"))
        return
    if p == kw_end and masked[p] != ">":
        return
    if masked[p] in "(=.[,);" or masked.startswith("==", p):
        return

    target = None
    args_start = p
    if masked.startswith(">>", p):
        commas = top_level_positions(masked, p, e, ",")
        if commas:
            target = source[p + 2 : commas[0]].strip()
            args_start = skip_space(masked, commas[0] + 1, e)
        else:
            target = source[p + 2 : e].strip()
            args_start = e
        if not target or "\n" in target or "\n" in source[kw_end:args_start]:
            return

    extras = []
    close_start = e
    commas = top_level_positions(masked, args_start, e, ",")
    if commas and commas[-1] == e - 1:
        close_start = e - 1
        extras.append('end=" "')
    if target:
        extras.append(f"file={target}")

    closing = ", ".join(extras)
    if closing and skip_space(masked, args_start, close_start) < close_start:
        closing = ", " + closing
    edits.append((kw_end, args_start, "("))
    edits.append((close_start, e, closing + ")"))


def _fix_exec(masked: str, s: int, e: int, edits: list[Edit]) -> None:
    kw_end = s + len("exec")
    p = skip_space(masked, kw_end, e)
    if p >= e or p == kw_end or masked[p] in "(=.[,)":
        return
    edits.append((kw_end, p, "("))
    for match in re.finditer(r"\s+in\s+", masked[p:e]):
        pos = p + match.start()
        if _depth(masked, p, pos) == 0:
            edits.append((pos, p + match.end(), ", "))
            break
    edits.append((e, e, ")"))


def _fix_except(masked: str, kw_end: int, colon: int, edits: list[Edit]) -> None:
    commas = top_level_positions(masked, kw_end, colon, ",")
    if len(commas) != 1:
        return
    target = masked[commas[0] + 1 : colon].strip()
    if not re.fullmatch(r"[^\W\d][\w.]*", target):
        return
    edits.append((commas[0], commas[0] + 1, " as"))


def _fix_raise(masked: str, s: int, e: int, edits: list[Edit]) -> None:
    kw_end = s + len("raise")
    commas = top_level_positions(masked, kw_end, e, ",")
    if len(commas) not in (1, 2):
        return
    first_end = skip_space(masked, commas[0] + 1, e)
    edits.append((commas[0], first_end, "("))
    if len(commas) == 2:
        second_end = skip_space(masked, commas[1] + 1, e)
        edits.append((commas[1], second_end, ").with_traceback("))
    edits.append((e, e, ")"))


def _depth(masked: str, start: int, end: int) -> int:
    depth = 0
    for c in masked[start:end]:
        if c in "([{":
            depth += 1
        elif c in ")]}":
            depth = max(depth - 1, 0)
    return depth


def _rewrite_expressions(masked: str, edits: list[Edit]) -> None:
    for match in re.finditer("<>", masked):
        edits.append((match.start(), match.end(), "!="))

    ticks = [m.start() for m in re.finditer("`", masked)]
    for opening, closing in zip(ticks[::2], ticks[1::2]):
        edits.append((opening, opening + 1, "repr("))
        edits.append((closing, closing + 1, ")"))

    for match in _OCTAL.finditer(masked):
        edits.append((match.start(), match.end(), "0o" + match.group(1)))
    for match in _LONG.finditer(masked):
        edits.append((match.start(1), match.end(1), ""))
    for match in _UR_PREFIX.finditer(masked):
        edits.append((match.start(), match.end(), ""))
