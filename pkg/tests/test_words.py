import random

import pytest

from freesub.errors import ParseError, PreconditionError, WordSyntaxError
from freesub.words import (
    EMPTY, Alphabet, ReducedWord, SignedLetter, conjugate, format_word, invert,
    iter_reduced_words, parse_word, reduce,
)

# ============================================
# Alphabet
# ============================================

def test_standard_alphabets():
    assert Alphabet.standard(2).letters == ('x', 'y')
    assert Alphabet.standard(3).letters == ('x', 'y', 'z')
    assert Alphabet.standard(4).letters == ('a', 'b', 'c', 'd')
    assert Alphabet.numbered('e', 3).letters == ('e1', 'e2', 'e3')


def test_alphabet_parse_accepts_commas_and_spaces():
    assert Alphabet.parse('x, y').letters == ('x', 'y')
    assert str(Alphabet.parse('a b c')) == 'a,b,c'


@pytest.mark.parametrize('text', ['X', 'x,x', '', '2a'])
def test_alphabet_parse_rejects_bad_names(text):
    with pytest.raises(ParseError):
        Alphabet.parse(text)


def test_alphabet_rejects_duplicates():
    with pytest.raises(PreconditionError):
        Alphabet(('x', 'x'))


def test_subset_by_name_and_index(F3):
    assert F3.subset(['y', 'z']) == frozenset({1, 2})
    assert F3.subset([0]) == frozenset({0})
    with pytest.raises(PreconditionError):
        F3.subset(['w'])

# ============================================
# Reduction and arithmetic
# ============================================

def test_signed_letter_codes():
    assert SignedLetter(1).code == 2
    assert SignedLetter(1, -1).code == 3
    assert SignedLetter.from_code(3).inverse() == SignedLetter(1)


def test_reduce_cancels_adjacent_inverses():
    assert reduce([0, 1, 2]) == ReducedWord((2,))
    assert reduce([0, 2, 3, 1]) == EMPTY
    assert reduce([SignedLetter(0), SignedLetter(1, -1)]) == ReducedWord((0, 3))


def naive_reduce(codes):
    codes = list(codes)
    changed = True
    while changed:
        changed = False
        for i in range(len(codes) - 1):
            if codes[i] == codes[i + 1] ^ 1:
                del codes[i:i + 2]
                changed = True
                break
    return tuple(codes)


def test_reduce_agrees_with_pairwise_cancellation():
    rng = random.Random(7)
    for _ in range(1000):
        raw = [rng.randrange(6) for _ in range(rng.randint(0, 24))]
        reduced = reduce(raw)
        assert reduced.codes == naive_reduce(raw)
        assert reduce(reduced) == reduced


def test_product_and_inverse(F2):
    w = parse_word('xyX', F2)
    assert w * invert(w) == EMPTY
    assert ~w == parse_word('xYX', F2)
    assert w * parse_word('xx', F2) == parse_word('xyx', F2)


def test_conjugate(F2):
    x, y = F2.generators()
    assert conjugate(y, x) == parse_word('yxY', F2)
    assert conjugate(EMPTY, x) == x


def test_slicing_returns_words(F2):
    w = parse_word('xyxY', F2)
    assert w[1:3] == parse_word('yx', F2)
    assert w[0] == SignedLetter(0)
    assert not w.is_positive()
    assert parse_word('xyy', F2).is_positive()

# ============================================
# Parsing and formatting
# ============================================

@pytest.mark.parametrize('text,codes', [
    ('xyX', (0, 2, 1)),
    ('x y^-1', (0, 3)),
    ('x^3', (0, 0, 0)),
    ('x * y', (0, 2)),
    ('xX', ()),
    ('x x^-1', ()),
    ('1', ()),
    ('', ()),
    ('  xy  ', (0, 2)),
])
def test_parse_word(F2, text, codes):
    assert parse_word(text, F2).codes == codes


def test_parse_reports_position(F2):
    with pytest.raises(WordSyntaxError) as e:
        parse_word('xq', F2)
    assert e.value.position == 1
    assert 'position 1' in str(e.value)


def test_multichar_names_use_token_syntax():
    alphabet = Alphabet(('a1', 'a2'))
    assert parse_word('a1 a2^-1', alphabet).codes == (0, 3)
    with pytest.raises(WordSyntaxError):
        parse_word('a1a2', alphabet)


def test_format_word(F2):
    w = parse_word('xxxY', F2)
    assert format_word(w, F2) == 'xxxY'
    assert format_word(w, F2, compact=False) == 'x^3 y^-1'
    assert format_word(EMPTY, F2, empty='1') == '1'
    assert format_word(ReducedWord((0, 3)), Alphabet(('a1', 'a2'))) == 'a1 a2^-1'


@pytest.mark.parametrize('alphabet', [Alphabet(('x', 'y', 'z')), Alphabet(('a1', 'a2'))])
def test_format_then_parse_returns_the_word(alphabet):
    rng = random.Random(11)
    for _ in range(300):
        w = reduce([rng.randrange(2 * alphabet.rank) for _ in range(rng.randint(0, 16))])
        assert parse_word(format_word(w, alphabet), alphabet) == w
        assert parse_word(format_word(w, alphabet, compact=False), alphabet) == w

# ============================================
# Enumeration of reduced words
# ============================================

def test_iter_reduced_words_counts(F2):
    words = list(iter_reduced_words(F2, 3))
    assert len(words) == 1 + 4 + 12 + 36
    assert words[0] == EMPTY
    assert len(set(words)) == len(words)


def test_iter_reduced_words_is_shortlex_and_reduced(F2):
    words = list(iter_reduced_words(F2, 4))
    assert words == sorted(words, key=ReducedWord.shortlex_key)
    assert all(reduce(w.codes) == w for w in words)
