"""Free-group words over a declared finite alphabet.

A signed letter is stored as a small integer code: generator ``i`` is ``2*i`` and
its inverse is ``2*i + 1``, so inversion is ``code ^ 1``. The resulting order
(x, x^-1, y, y^-1, ...) is the tie-break order of every canonical construction in
the package.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from freesub.errors import ParseError, PreconditionError, WordSyntaxError

_NAME = re.compile(r'[a-z][a-z0-9_]*$')
_TOKEN = re.compile(r'\s*(?:\*\s*)?([A-Za-z][A-Za-z0-9_]*|1)(?:\^(-?\d+))?')


@dataclass(frozen=True)
class Alphabet:
    """Ordered generator names of a free group of rank ``len(letters)``."""

    letters: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, 'letters', tuple(self.letters))
        if not self.letters:
            raise PreconditionError('an alphabet needs at least one generator')
        for name in self.letters:
            if not _NAME.match(name):
                raise PreconditionError(f'invalid generator name {name!r}')
        if len(set(self.letters)) != len(self.letters):
            raise PreconditionError('generator names must be pairwise distinct')

    @classmethod
    def parse(cls, text: str, line: int | None = None) -> 'Alphabet':
        names = [part for part in re.split(r'[\s,]+', text.strip()) if part]
        try:
            return cls(tuple(names))
        except PreconditionError as e:
            raise ParseError(f'bad alphabet declaration: {e}', line=line) from e

    @classmethod
    def standard(cls, rank: int) -> 'Alphabet':
        if rank <= 3:
            return cls(tuple('xyz'[:rank]))
        if rank <= 26:
            return cls(tuple('abcdefghijklmnopqrstuvwxyz'[:rank]))
        return cls.numbered('x', rank)

    @classmethod
    def numbered(cls, prefix: str, rank: int) -> 'Alphabet':
        return cls(tuple(f'{prefix}{i}' for i in range(1, rank + 1)))

    @property
    def rank(self) -> int:
        return len(self.letters)

    @property
    def compact(self) -> bool:
        """True when every name is one lowercase character (compact syntax)."""
        return all(len(name) == 1 for name in self.letters)

    def index(self, name: str) -> int:
        try:
            return self.letters.index(name)
        except ValueError:
            raise PreconditionError(f'generator {name!r} is not in alphabet {self}') from None

    def subset(self, names: Iterable[Union[str, int]]) -> frozenset[int]:
        """Generator indices of a sub-alphabet given by names or indices."""
        chosen = set()
        for name in names:
            if isinstance(name, int):
                if not 0 <= name < self.rank:
                    raise PreconditionError(f'generator index {name} out of range')
                chosen.add(name)
            else:
                chosen.add(self.index(name))
        return frozenset(chosen)

    def generator(self, i: int) -> 'ReducedWord':
        return ReducedWord((2 * i,))

    def generators(self) -> list['ReducedWord']:
        return [self.generator(i) for i in range(self.rank)]

    def code_name(self, code: int) -> str:
        name = self.letters[code >> 1]
        return name.upper() if code & 1 and self.compact else (f'{name}^-1' if code & 1 else name)

    def __str__(self):
        return ','.join(self.letters)


@dataclass(frozen=True, order=True)
class SignedLetter:
    base: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError('sign must be +1 or -1')
        if self.base < 0:
            raise ValueError('base must be a generator index')

    @property
    def code(self) -> int:
        return 2 * self.base + (self.sign < 0)

    @classmethod
    def from_code(cls, code: int) -> 'SignedLetter':
        return cls(code >> 1, -1 if code & 1 else 1)

    def inverse(self) -> 'SignedLetter':
        return SignedLetter(self.base, -self.sign)


@dataclass(frozen=True, order=True)
class ReducedWord:
    """Freely reduced word; build through `reduce` unless the codes are known reduced."""

    codes: tuple[int, ...] = ()

    @property
    def letters(self) -> tuple[SignedLetter, ...]:
        return tuple(SignedLetter.from_code(c) for c in self.codes)

    def __len__(self):
        return len(self.codes)

    def __iter__(self) -> Iterator[SignedLetter]:
        return iter(self.letters)

    def __bool__(self):
        return bool(self.codes)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return ReducedWord(self.codes[item])
        return SignedLetter.from_code(self.codes[item])

    def __mul__(self, other: 'ReducedWord') -> 'ReducedWord':
        return concat(self, other)

    def __invert__(self) -> 'ReducedWord':
        return invert(self)

    def shortlex_key(self):
        return len(self.codes), self.codes

    def is_positive(self) -> bool:
        return not any(c & 1 for c in self.codes)


EMPTY = ReducedWord()

RawLetters = Iterable[Union[SignedLetter, int]]


def _codes(raw: RawLetters) -> Iterator[int]:
    for item in raw:
        yield item.code if isinstance(item, SignedLetter) else int(item)


def reduce(raw: RawLetters) -> ReducedWord:
    """Freely reduce a letter sequence (codes, signed letters or a word)."""
    if isinstance(raw, ReducedWord):
        raw = raw.codes
    stack: list[int] = []
    for c in _codes(raw):
        if stack and stack[-1] == c ^ 1:
            stack.pop()
        else:
            stack.append(c)
    return ReducedWord(tuple(stack))


def invert(w: ReducedWord) -> ReducedWord:
    return ReducedWord(tuple(c ^ 1 for c in reversed(w.codes)))


def concat(*words: ReducedWord) -> ReducedWord:
    stack: list[int] = []
    for w in words:
        for c in w.codes:
            if stack and stack[-1] == c ^ 1:
                stack.pop()
            else:
                stack.append(c)
    return ReducedWord(tuple(stack))


def conjugate(g: ReducedWord, w: ReducedWord) -> ReducedWord:
    """g·w·g⁻¹, reduced."""
    return concat(g, w, invert(g))


def parse_word(text: str, alphabet: Alphabet) -> ReducedWord:
    """Parse compact (``xyX``) or token (``x y^-1``) syntax and reduce."""
    stripped = text.strip()
    if stripped in ('', '1'):
        return EMPTY
    if alphabet.compact and not any(ch.isspace() or ch in '^*' for ch in stripped):
        offset = len(text) - len(text.lstrip())
        codes = []
        for pos, ch in enumerate(stripped):
            lower = ch.lower()
            if lower not in alphabet.letters:
                raise WordSyntaxError(f'unknown letter {ch!r}', position=offset + pos)
            codes.append(2 * alphabet.letters.index(lower) + (ch != lower))
        return reduce(codes)
    return _parse_tokens(text, alphabet)


def _parse_tokens(text: str, alphabet: Alphabet) -> ReducedWord:
    codes: list[int] = []
    pos = 0
    while pos < len(text):
        if not text[pos:].strip():
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise WordSyntaxError(f'unexpected character {text[bad]!r}', position=bad)
        name, exponent = m.group(1), int(m.group(2) or 1)
        if name != '1':
            if name not in alphabet.letters:
                raise WordSyntaxError(f'unknown generator {name!r}', position=m.start(1))
            code = 2 * alphabet.letters.index(name)
            codes.extend([code ^ 1] * -exponent if exponent < 0 else [code] * exponent)
        pos = m.end()
    return reduce(codes)


def format_word(w: ReducedWord, alphabet: Alphabet, compact: bool | None = None,
                empty: str = '') -> str:
    if not w:
        return empty
    if compact is None:
        compact = alphabet.compact
    if compact:
        return ''.join(alphabet.letters[c >> 1].upper() if c & 1 else alphabet.letters[c >> 1]
                       for c in w.codes)
    tokens = []
    i = 0
    while i < len(w.codes):
        j = i
        while j < len(w.codes) and w.codes[j] == w.codes[i]:
            j += 1
        exponent = (j - i) * (-1 if w.codes[i] & 1 else 1)
        name = alphabet.letters[w.codes[i] >> 1]
        tokens.append(name if exponent == 1 else f'{name}^{exponent}')
        i = j
    return ' '.join(tokens)


def iter_reduced_words(alphabet: Alphabet, max_length: int) -> Iterator[ReducedWord]:
    """All reduced words of length <= max_length in shortlex order, ε first."""
    level = [EMPTY]
    yield EMPTY
    for _ in range(max_length):
        nxt = []
        for w in level:
            last = w.codes[-1] if w.codes else None
            for c in range(2 * alphabet.rank):
                if last is not None and c == last ^ 1:
                    continue
                nxt.append(ReducedWord(w.codes + (c,)))
        yield from nxt
        level = nxt
