import random

import pytest

from freesub import create_app
from freesub.config import Config
from freesub.stallings import from_generators, index_in_free_group, subgroup_from_adjacency
from freesub.words import Alphabet, ReducedWord, parse_word

SAMPLE_GENERATORS = ('xyxyX', 'xyxxxYX', 'xyXYxyxYX')


class ConfigForTests(Config):
    TESTING = True
    LOG_LEVEL = 'WARNING'


@pytest.fixture
def app():
    return create_app(ConfigForTests)


@pytest.fixture
def F2():
    return Alphabet(('x', 'y'))


@pytest.fixture
def F3():
    return Alphabet(('x', 'y', 'z'))


@pytest.fixture
def word(F2):
    def parse(text, alphabet=None):
        return parse_word(text, alphabet or F2)
    return parse


@pytest.fixture
def sub(F2):
    """Subgroup generated by words in compact syntax."""
    def build(*words, alphabet=None):
        alphabet = alphabet or F2
        return from_generators(alphabet, [parse_word(w, alphabet) for w in words])
    return build


@pytest.fixture
def sample(sub):
    return sub(*SAMPLE_GENERATORS)


def random_word(rng, alphabet, max_length, min_length=1):
    length = rng.randint(min_length, max_length)
    codes = []
    while len(codes) < length:
        code = rng.randrange(2 * alphabet.rank)
        if codes and codes[-1] == code ^ 1:
            continue
        codes.append(code)
    return ReducedWord(tuple(codes))


def random_subgroup(rng, alphabet, max_generators=3, max_length=6):
    count = rng.randint(1, max_generators)
    return from_generators(alphabet, [random_word(rng, alphabet, max_length) for _ in range(count)])


def random_finite_index(rng, alphabet, max_vertices=8):
    """Subgroup whose core is a random permutation graph on at most max_vertices points."""
    n = rng.randint(1, max_vertices)
    adj = {v: {} for v in range(n)}
    for b in range(alphabet.rank):
        image = list(range(n))
        rng.shuffle(image)
        for v, t in enumerate(image):
            adj[v][2 * b] = t
            adj[t][2 * b + 1] = v
    return subgroup_from_adjacency(alphabet, adj, 0)


def random_infinite_index(rng, alphabet, max_generators=2, max_length=4):
    while True:
        H = random_subgroup(rng, alphabet, max_generators, max_length)
        if not H.is_trivial and not index_in_free_group(H).finite:
            return H


@pytest.fixture
def rng():
    return random.Random(20240611)
