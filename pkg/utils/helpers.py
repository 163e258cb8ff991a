import hashlib
import json
import re
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from core.errors import ConfigError

SECTION_RE = re.compile(r'^\[\s*([^\]]+?)\s*\]$')


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, *keys).

    Streams depend only on the key tuple, never on the order in which
    they are requested.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]))


def derive_seed(seed: int, *keys: int) -> int:
    """Plain integer seed derived from (seed, *keys)."""
    state = np.random.SeedSequence([int(seed), *[int(k) for k in keys]]).generate_state(1)
    return int(state[0])


def read_sections(path) -> List[Tuple[Optional[str], int, str]]:
    """Read a sectioned text file into (section, line number, content) triples.

    Blank lines and '#' comments are skipped. Content before the first
    header has section None.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot read file: {e.strerror}", path=str(path))

    entries = []
    section = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        header = SECTION_RE.match(line)
        if header:
            section = header.group(1)
            continue
        entries.append((section, line_no, line))
    return entries


def split_assignment(line: str, path=None, line_no=None) -> Tuple[str, str]:
    """Split 'name = value' into stripped parts."""
    if '=' not in line:
        raise ConfigError("expected 'name = value'", path=path, line=line_no)
    name, value = line.split('=', 1)
    name, value = name.strip(), value.strip()
    if not name:
        raise ConfigError("missing name before '='", path=path, line=line_no)
    return name, value


def stable_hash(payload: Dict, length: int = 12) -> str:
    """Short SHA-256 digest of a JSON-serializable mapping."""
    canonical = json.dumps(payload, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:length]


def strip_header_lines(lines: Iterator[str]) -> Iterator[str]:
    """Drop leading provenance/comment lines starting with '#'."""
    leading = True
    for line in lines:
        if leading and line.startswith('#'):
            continue
        leading = False
        yield line
