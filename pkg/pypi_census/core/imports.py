"""Import statement extraction with a three-stage fallback.

1. Strict parse with the running interpreter's grammar, walking every node.
2. Legacy rewrite (see ``legacy.py``) followed by a strict re-parse.
3. A line scanner that reads ``import``/``from`` statements without a parser.

The stage that produced a file's statements is recorded alongside them.
"""

import ast
import keyword
import re
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

from pypi_census.core.legacy import legacy_transform
from pypi_census.core.lexing import CLOSERS, OPENERS, mask_source, top_level_positions, try_parse


class ExtractionStage(Enum):
    STRICT_PARSE = "strict_parse"
    LEGACY_TRANSFORM = "legacy_transform"
    TOKEN_SCAN = "token_scan"


@dataclass(frozen=True)
class ImportStatement:
    """One imported module path.

    ``import a, b`` produces two statements; ``from x import y, z`` produces
    one with both names. ``module`` is empty only for ``from . import x``.
    """

    module: str
    names: tuple[tuple[str, Optional[str]], ...] = ()
    relative_level: int = 0
    is_star: bool = False
    line: int = 1
    stage: ExtractionStage = ExtractionStage.STRICT_PARSE
    alias: Optional[str] = None
    column: int = 0

    def __post_init__(self):
        if self.relative_level < 0:
            raise ValueError("relative_level must be nonnegative")
        if self.relative_level == 0 and not self.module:
            raise ValueError("absolute import requires a module path")
        if self.is_star and self.names:
            raise ValueError("star import carries no names")

    @property
    def is_from(self) -> bool:
        return bool(self.names) or self.is_star or self.relative_level > 0

    def to_dict(self) -> dict:
        return {
            "module": self.module,
            "names": [list(pair) for pair in self.names],
            "relative_level": self.relative_level,
            "is_star": self.is_star,
            "alias": self.alias,
            "line": self.line,
            "column": self.column,
            "stage": self.stage.value,
        }


@dataclass(frozen=True)
class ImportString:
    """Tallying key derived from a statement's module path."""

    value: str
    top_level: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "top_level", top_level_of(self.value))


@dataclass(frozen=True)
class FileExtraction:
    """Statements extracted from one archive entry."""

    path: str
    statements: tuple[ImportStatement, ...]
    stage: ExtractionStage


def grammar_version() -> str:
    """Grammar used for strict parsing, stamped into run metadata."""
    return f"python-{sys.version_info.major}.{sys.version_info.minor}"


def extract_imports(source: str) -> tuple[list[ImportStatement], ExtractionStage]:
    """Run the fallback chain over one source text. Never raises."""
    tree = try_parse(source)
    if tree is not None:
        return _walk(tree, ExtractionStage.STRICT_PARSE), ExtractionStage.STRICT_PARSE

    rewritten = legacy_transform(source)
    if rewritten is not None:
        tree = try_parse(rewritten)
        if tree is not None:
            return _walk(tree, ExtractionStage.LEGACY_TRANSFORM), ExtractionStage.LEGACY_TRANSFORM

    return token_scan(source), ExtractionStage.TOKEN_SCAN


def extract_file_imports(path: str, source: str) -> FileExtraction:
    statements, stage = extract_imports(source)
    return FileExtraction(path=path, statements=tuple(statements), stage=stage)


def _walk(tree: ast.Module, stage: ExtractionStage) -> list[ImportStatement]:
    nodes = [n for n in ast.walk(tree) if isinstance(n, (ast.Import, ast.ImportFrom))]
    nodes.sort(key=lambda n: (n.lineno, n.col_offset))

    statements = []
    for node in nodes:
        if isinstance(node, ast.Import):
            for alias in node.names:
                statements.append(
                    ImportStatement(
                        module=alias.name,
                        alias=alias.asname,
                        line=node.lineno,
                        column=node.col_offset,
                        stage=stage,
                    )
                )
            continue

        is_star = any(alias.name == "*" for alias in node.names)
        names = () if is_star else tuple((a.name, a.asname) for a in node.names)
        statements.append(
            ImportStatement(
                module=node.module or "",
                names=names,
                relative_level=node.level or 0,
                is_star=is_star,
                line=node.lineno,
                column=node.col_offset,
                stage=stage,
            )
        )
    return statements


# Line scanner

_TOKEN = re.compile(r"[^\W\d]\w*|\.|\*|,|\(|\)|\S")
_STATEMENT_START = re.compile(r"(?:import|from)\s")


def _logical_lines(source: str) -> Iterator[tuple[int, int, str]]:
    """Yield ``(line, column, text)`` for each simple statement.

    Comments are cut, backslash and bracket continuations joined and
    top-level semicolons split. Strings end at the end of their line.
    """
    masked_lines = mask_source(source, track_triple_quotes=False).split("\n")
    source_lines = source.split("\n")

    parts: list[str] = []
    mask_parts: list[str] = []
    depth = 0
    start_line = 0
    column = 0

    def flush() -> Iterator[tuple[int, int, str]]:
        text = " ".join(parts)
        mask = " ".join(mask_parts)
        cuts = [-1] + top_level_positions(mask, 0, len(mask), ";") + [len(mask)]
        for left, right in zip(cuts, cuts[1:]):
            piece = text[left + 1 : right]
            if piece.strip():
                offset = column if left < 0 else left + 1 + len(piece) - len(piece.lstrip())
                yield start_line, offset, piece.strip()

    for number, (text, mask) in enumerate(zip(source_lines, masked_lines), start=1):
        text = text.rstrip("\r")
        mask = mask.rstrip("\r")
        cut = mask.find("#")
        if cut >= 0:
            text, mask = text[:cut], mask[:cut]
        # An unindented import always starts a new statement; a stray bracket
        # inside an untracked docstring must not swallow it.
        if parts and depth > 0 and _STATEMENT_START.match(text):
            yield from flush()
            parts, mask_parts, depth = [], [], 0
        if not parts:
            start_line = number
            column = len(text) - len(text.lstrip())

        depth += sum(mask.count(c) for c in OPENERS) - sum(mask.count(c) for c in CLOSERS)
        depth = max(depth, 0)
        continued = mask.rstrip().endswith("\\")
        if continued:
            stripped = mask.rstrip()
            text, mask = text[: len(stripped) - 1], stripped[:-1]
        parts.append(text)
        mask_parts.append(mask)
        if depth > 0 or continued:
            continue
        yield from flush()
        parts, mask_parts = [], []

    if parts:
        yield from flush()


def _dotted(tokens: list[str], i: int) -> tuple[Optional[str], int]:
    segments = []
    while i < len(tokens) and _is_name(tokens[i]):
        segments.append(tokens[i])
        if i + 1 < len(tokens) and tokens[i + 1] == "." and i + 2 < len(tokens):
            i += 2
            continue
        i += 1
        break
    if not segments:
        return None, i
    return ".".join(segments), i


def _is_name(token: str) -> bool:
    return token.isidentifier() and not keyword.iskeyword(token)


def _alias(tokens: list[str], i: int) -> tuple[Optional[str], int, bool]:
    if i < len(tokens) and tokens[i] == "as":
        if i + 1 < len(tokens) and _is_name(tokens[i + 1]):
            return tokens[i + 1], i + 2, True
        return None, i, False
    return None, i, True


def _parse_import(tokens: list[str]) -> Optional[list[tuple[str, Optional[str]]]]:
    modules = []
    i = 1
    while True:
        module, i = _dotted(tokens, i)
        if module is None:
            return None
        alias, i, ok = _alias(tokens, i)
        if not ok:
            return None
        modules.append((module, alias))
        if i == len(tokens):
            return modules
        if tokens[i] != ",":
            return None
        i += 1


def _parse_from(tokens: list[str]) -> Optional[tuple[str, int, tuple, bool]]:
    i = 1
    level = 0
    while i < len(tokens) and tokens[i] == ".":
        level += 1
        i += 1
    module, i = _dotted(tokens, i)
    if module is None:
        if level == 0:
            return None
        module = ""
    if i >= len(tokens) or tokens[i] != "import":
        return None
    i += 1

    if tokens[i:] == ["*"]:
        return module, level, (), True

    closing = None
    if i < len(tokens) and tokens[i] == "(":
        closing = ")"
        i += 1
    names = []
    while i < len(tokens) and _is_name(tokens[i]):
        name = tokens[i]
        alias, i, ok = _alias(tokens, i + 1)
        if not ok:
            return None
        names.append((name, alias))
        if i < len(tokens) and tokens[i] == ",":
            i += 1
            continue
        break
    if closing:
        if i >= len(tokens) or tokens[i] != closing:
            return None
        i += 1
    elif tokens[-1:] == [","]:
        return None
    if not names or i != len(tokens):
        return None
    return module, level, tuple(names), False


def token_scan(source: str) -> list[ImportStatement]:
    """Collect import statements line by line without a parser.

    Lines that do not read as an import statement are ignored. Triple-quoted
    strings are not tracked, so imports written inside docstrings are
    collected too.
    """
    statements = []
    for line, column, text in _logical_lines(source):
        tokens = _TOKEN.findall(text)
        if not tokens:
            continue
        if tokens[0] == "import":
            modules = _parse_import(tokens)
            if modules is None:
                continue
            for module, alias in modules:
                statements.append(
                    ImportStatement(
                        module=module,
                        alias=alias,
                        line=line,
                        column=column,
                        stage=ExtractionStage.TOKEN_SCAN,
                    )
                )
        elif tokens[0] == "from":
            parsed = _parse_from(tokens)
            if parsed is None:
                continue
            module, level, names, is_star = parsed
            statements.append(
                ImportStatement(
                    module=module,
                    names=names,
                    relative_level=level,
                    is_star=is_star,
                    line=line,
                    column=column,
                    stage=ExtractionStage.TOKEN_SCAN,
                )
            )
    return statements


def to_import_string(stmt: ImportStatement) -> list[ImportString]:
    """Tallying keys for one statement; relative imports yield none."""
    if stmt.relative_level > 0 or not stmt.module:
        return []
    return [ImportString(stmt.module)]


def top_level_of(import_string: str) -> str:
    """First dotted segment of an import string."""
    if not import_string:
        raise ValueError("import string must be nonempty")
    return import_string.split(".", 1)[0]
