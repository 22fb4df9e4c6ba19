"""Subgroup files, serialized cores and prefix directories on disk.

A subgroup file declares its alphabet and lists generators, one per line::

    # comment
    alphabet: x,y
    xyxyX
    xyxxxYX

A file whose first meaningful line starts with ``base=`` is a serialized core
instead; `load_subgroup` accepts either.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from freesub.enumeration import RPrefix
from freesub.errors import FreesubError, ParseError, SubgroupFileError
from freesub.models import StageLog
from freesub.stallings import SubgroupHandle, basis, deserialize, from_generators, serialize
from freesub.words import Alphabet, ReducedWord, format_word, parse_word

logger = logging.getLogger(__name__)

MANIFEST = 'prefix.json'
STAGE_LOG = 'stages.log'


@dataclass(frozen=True)
class SubgroupFile:
    alphabet: Alphabet
    generators: tuple[ReducedWord, ...]
    name: Optional[str] = None

    def subgroup(self) -> SubgroupHandle:
        return from_generators(self.alphabet, self.generators, self.name)

    def format(self) -> str:
        lines = [f'alphabet: {self.alphabet}']
        lines.extend(format_word(w, self.alphabet) for w in self.generators if w)
        return '\n'.join(lines) + '\n'


def _meaningful(text: str) -> list[tuple[int, str]]:
    return [(i, line.strip()) for i, line in enumerate(text.splitlines(), 1)
            if line.strip() and not line.strip().startswith('#')]


def parse_subgroup_file(text: str, name: Optional[str] = None) -> SubgroupFile:
    rows = _meaningful(text)
    if not rows:
        raise SubgroupFileError('missing "alphabet:" header', line=1)
    line_no, header = rows[0]
    if not header.startswith('alphabet:'):
        raise SubgroupFileError('the first line must be "alphabet: x,y"', line=line_no)
    alphabet = Alphabet.parse(header[len('alphabet:'):], line=line_no)
    generators = []
    for line_no, row in rows[1:]:
        try:
            generators.append(parse_word(row, alphabet))
        except ParseError as e:
            raise SubgroupFileError(f'bad generator: {e}', line=line_no, position=e.position) from e
    return SubgroupFile(alphabet, tuple(generators), name)


def is_serialized_core(text: str) -> bool:
    rows = _meaningful(text)
    return bool(rows) and rows[0][1].startswith('base=')


def parse_subgroup(text: str, name: Optional[str] = None) -> SubgroupHandle:
    if is_serialized_core(text):
        return deserialize(text, name)
    return parse_subgroup_file(text, name).subgroup()


def load_subgroup(path) -> SubgroupHandle:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise FreesubError(f'cannot read {path}: {e.strerror}') from e
    handle = parse_subgroup(text, path.stem)
    logger.debug('loaded %s: %s', path, handle.summary())
    return handle


def subgroup_file_of(H: SubgroupHandle) -> SubgroupFile:
    """Generator file listing a free basis of H; re-parses to the same core."""
    return SubgroupFile(H.alphabet, tuple(basis(H)), H.name)


def write_subgroup(path, H: SubgroupHandle, core: bool = True):
    """Write the canonical serialized core, or a generator file when `core` is false."""
    text = serialize(H) if core else subgroup_file_of(H).format()
    Path(path).write_text(text)


def save_prefix(prefix: RPrefix, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names: dict[str, list[str]] = {'R': [], 'L': [], 'H': []}
    for i, (R, L, H) in enumerate(zip(prefix.stages, prefix.processed, prefix.shrunk), 1):
        for key, handle in (('R', R), ('L', L), ('H', H)):
            filename = f'{key}{i}.core'
            (directory / filename).write_text(serialize(handle))
            names[key].append(filename)
    manifest = {
        'alphabet': list(prefix.alphabet.letters),
        'stages': prefix.N,
        'budget': prefix.budget,
        'truncated': prefix.truncated,
        **names,
    }
    (directory / MANIFEST).write_text(json.dumps(manifest, indent=2) + '\n')
    (directory / STAGE_LOG).write_text(prefix.log.report())
    logger.info('saved %d stages to %s', prefix.N, directory)
    return directory


def load_prefix(directory) -> RPrefix:
    """Stages and processed subgroups of a saved prefix; the stage log stays on disk."""
    directory = Path(directory)
    try:
        manifest = json.loads((directory / MANIFEST).read_text())
    except OSError as e:
        raise FreesubError(f'cannot read {directory / MANIFEST}: {e.strerror}') from e
    except json.JSONDecodeError as e:
        raise SubgroupFileError(f'bad manifest: {e.msg}', line=e.lineno, position=e.colno) from e
    alphabet = Alphabet(tuple(manifest['alphabet']))

    def load_all(key: str) -> list[SubgroupHandle]:
        handles = [load_subgroup(directory / filename) for filename in manifest.get(key, [])]
        for handle in handles:
            if handle.alphabet != alphabet:
                raise SubgroupFileError(f'{handle.name} is not over the alphabet {alphabet}')
        return handles

    return RPrefix(alphabet, load_all('R'), load_all('L'), load_all('H'), StageLog(),
                   manifest.get('budget'), manifest.get('truncated'))


def read_words(texts: Sequence[str], alphabet: Alphabet) -> list[ReducedWord]:
    """Parse words given on a command line; commas separate several words in one argument."""
    words = []
    for text in texts:
        for part in text.split(','):
            if part.strip():
                words.append(parse_word(part, alphabet))
    return words
