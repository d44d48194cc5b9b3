"""Hand-checked source files with the imports and stage each must produce.

Expected statements are written ``"<line>: <statement>"``, one entry per
imported module for ``import a, b`` and one per statement for ``from``.
"""

from dataclasses import dataclass

from pypi_census.core.imports import ExtractionStage, ImportStatement

STRICT = ExtractionStage.STRICT_PARSE
LEGACY = ExtractionStage.LEGACY_TRANSFORM
SCAN = ExtractionStage.TOKEN_SCAN


@dataclass(frozen=True)
class CorpusFile:
    name: str
    source: str
    stage: ExtractionStage
    expected: tuple[str, ...]


def describe(statement: ImportStatement) -> str:
    """Render a statement the way corpus entries spell it."""
    if not statement.is_from:
        text = f"import {statement.module}"
        if statement.alias:
            text += f" as {statement.alias}"
        return f"{statement.line}: {text}"
    if statement.is_star:
        names = "*"
    else:
        names = ", ".join(f"{n} as {a}" if a else n for n, a in statement.names)
    module = "." * statement.relative_level + statement.module
    return f"{statement.line}: from {module} import {names}"


CORPUS = (
    # Modern sources
    CorpusFile("plain.py", "import os\nimport sys\n", STRICT, ("1: import os", "2: import sys")),
    CorpusFile(
        "aliases.py",
        "import numpy as np\nimport pandas as pd\n",
        STRICT,
        ("1: import numpy as np", "2: import pandas as pd"),
    ),
    CorpusFile(
        "from_names.py",
        "from os.path import join, exists as file_exists\n",
        STRICT,
        ("1: from os.path import join, exists as file_exists",),
    ),
    CorpusFile(
        "relative.py",
        "from . import views\nfrom ..core import models\nfrom .utils.text import slugify\n",
        STRICT,
        ("1: from . import views", "2: from ..core import models", "3: from .utils.text import slugify"),
    ),
    CorpusFile("star.py", "from tkinter import *\n", STRICT, ("1: from tkinter import *",)),
    CorpusFile(
        "nested.py",
        "def load():\n"
        "    import json\n"
        "    return json\n"
        "\n"
        "class Loader:\n"
        "    def run(self):\n"
        "        from importlib import import_module\n"
        "        return import_module\n",
        STRICT,
        ("2: import json", "7: from importlib import import_module"),
    ),
    CorpusFile(
        "fallback.py",
        "try:\n    import ujson as json\nexcept ImportError:\n    import json\n",
        STRICT,
        ("2: import ujson as json", "4: import json"),
    ),
    CorpusFile(
        "docstring.py",
        '"""Module docs.\n\nimport not_real\n"""\nfrom __future__ import print_function\nimport os\n',
        STRICT,
        ("5: from __future__ import print_function", "6: import os"),
    ),
    CorpusFile(
        "parenthesized.py",
        "from typing import (\n    Any,\n    Optional as Opt,\n)\n",
        STRICT,
        ("1: from typing import Any, Optional as Opt",),
    ),
    CorpusFile(
        "type_checking.py",
        "from typing import TYPE_CHECKING\nif TYPE_CHECKING:\n    from collections.abc import Iterator\n",
        STRICT,
        ("1: from typing import TYPE_CHECKING", "3: from collections.abc import Iterator"),
    ),
    CorpusFile(
        "platform.py",
        "import sys\nif sys.platform == 'win32':\n    import winreg\nelse:\n    import termios\n",
        STRICT,
        ("1: import sys", "3: import winreg", "5: import termios"),
    ),
    CorpusFile(
        "modern_syntax.py",
        "import re\nif (m := re.match('a', 'a')):\n    print(f'{m}')\n",
        STRICT,
        ("1: import re",),
    ),
    CorpusFile("empty.py", "", STRICT, ()),
    CorpusFile(
        "semicolons.py",
        "import a; import b as c; from d import e\n",
        STRICT,
        ("1: import a", "1: import b as c", "1: from d import e"),
    ),
    # A lone chevron print is a valid shift-and-tuple expression today.
    CorpusFile(
        "chevron_only.py",
        "import sys\nprint >>sys.stderr, 'warn'\n",
        STRICT,
        ("1: import sys",),
    ),
    # Legacy sources, one rewrite per file where the rewrite alone blocks parsing
    CorpusFile("print.py", "import os\nprint 'hello', os.sep\n", LEGACY, ("1: import os",)),
    CorpusFile(
        "print_chevron.py",
        "import sys\nprint >>sys.stderr, 'warn'\nprint 'done'\n",
        LEGACY,
        ("1: import sys",),
    ),
    CorpusFile("print_trailing_comma.py", "import os\nprint 'a',\n", LEGACY, ("1: import os",)),
    CorpusFile("exec.py", "import os\nexec 'x = 1'\n", LEGACY, ("1: import os",)),
    CorpusFile(
        "exec_in.py",
        "import os\ncode = 'y = 2'\nexec code in globals()\n",
        LEGACY,
        ("1: import os",),
    ),
    CorpusFile("raise_value.py", "import os\nraise ValueError, 'bad'\n", LEGACY, ("1: import os",)),
    CorpusFile(
        "raise_traceback.py",
        "import sys\n"
        "try:\n"
        "    pass\n"
        "except Exception:\n"
        "    tb = sys.exc_info()[2]\n"
        "    raise ValueError, 'x', tb\n",
        LEGACY,
        ("1: import sys",),
    ),
    CorpusFile(
        "except_comma.py",
        "import os\ntry:\n    import json\nexcept ImportError, e:\n    json = None\n",
        LEGACY,
        ("1: import os", "3: import json"),
    ),
    CorpusFile(
        "except_tuple.py",
        "try:\n    import cPickle as pickle\nexcept (ImportError, NameError), err:\n    import pickle\n",
        LEGACY,
        ("2: import cPickle as pickle", "4: import pickle"),
    ),
    CorpusFile("backticks.py", "import os\nname = `os.sep`\n", LEGACY, ("1: import os",)),
    CorpusFile("octal.py", "import os\nos.chmod('f', 0644)\n", LEGACY, ("1: import os",)),
    CorpusFile("long_suffix.py", "import sys\nlimit = 2147483648L\n", LEGACY, ("1: import sys",)),
    CorpusFile(
        "not_equal.py",
        "import os\nif os.name <> 'nt':\n    pass\n",
        LEGACY,
        ("1: import os",),
    ),
    CorpusFile("ur_prefix.py", "import re\npattern = ur'\\d+'\n", LEGACY, ("1: import re",)),
    CorpusFile(
        "print_after_semicolon.py",
        "import os; print os.getcwd()\n",
        LEGACY,
        ("1: import os",),
    ),
    CorpusFile(
        "print_in_body.py",
        "import sys\nif sys.argv: print 'args'\n",
        LEGACY,
        ("1: import sys",),
    ),
    CorpusFile(
        "print_in_function.py",
        "def main():\n    import optparse\n    print 'usage'\n",
        LEGACY,
        ("2: import optparse",),
    ),
    CorpusFile(
        "mixed_legacy.py",
        "from . import util\nimport os, sys\nprint >>sys.stderr, `os.sep`\nx = 0777\n",
        LEGACY,
        ("1: from . import util", "2: import os", "2: import sys"),
    ),
    # Sources no rewrite can rescue
    CorpusFile(
        "stray_bracket.py",
        "import os\nimport sys\ndef broken(:\n    pass\nfrom collections import defaultdict\n",
        SCAN,
        ("1: import os", "2: import sys", "5: from collections import defaultdict"),
    ),
    CorpusFile("missing_colon.py", "import urllib2\nclass Foo\n    pass\n", SCAN, ("1: import urllib2",)),
    CorpusFile(
        "rewrite_not_enough.py",
        "import os\nprint 'x'\nx = = 1\nfrom os import path\n",
        SCAN,
        ("1: import os", "4: from os import path"),
    ),
    CorpusFile(
        "merge_conflict.py",
        "import json\n<<<<<<< HEAD\nimport yaml\n=======\nimport toml\n>>>>>>> branch\n",
        SCAN,
        ("1: import json", "3: import yaml", "5: import toml"),
    ),
    CorpusFile(
        "template.py",
        "{% if x %}\nimport os\n{% endif %}\n",
        SCAN,
        ("2: import os",),
    ),
    CorpusFile(
        "relative_broken.py",
        "from .models import (User,\n    Group as G)\nfrom .. import *\nimport a.b.c as abc\nif True\n",
        SCAN,
        ("1: from .models import User, Group as G", "3: from .. import *", "4: import a.b.c as abc"),
    ),
    CorpusFile(
        "docstring_broken.py",
        'import os\n"""\nExample:\n    import hidden\n"""\ndef f(:\n',
        SCAN,
        ("1: import os", "4: import hidden"),
    ),
    CorpusFile(
        "unclosed.py",
        "import a; import b.c\nx = (\n",
        SCAN,
        ("1: import a", "1: import b.c"),
    ),
    CorpusFile(
        "continuation_broken.py",
        "from os.path import join, \\\n    exists\nwhile\n",
        SCAN,
        ("1: from os.path import join, exists",),
    ),
)
