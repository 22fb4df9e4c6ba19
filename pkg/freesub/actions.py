"""Right action of F on the cosets R\\F.

Exact orbit sizes come from the index formula [gLg⁻¹ : gLg⁻¹ ∩ R]. Balls of
cosets are finite windows used to cross-check those values; the full coset space
is never built.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import networkx as nx

from freesub.constructions import conjugate_subgroup, intersect, relative_index
from freesub.models import IndexResult
from freesub.stallings import SubgroupHandle, basis, from_generators, index_in_free_group, is_member, rank
from freesub.words import (
    EMPTY, ReducedWord, concat, conjugate, format_word, invert, iter_reduced_words,
)

logger = logging.getLogger(__name__)

CosetKey = Union[tuple[str, int], tuple[str, int, ReducedWord]]


def orbit_size(R: SubgroupHandle, L: SubgroupHandle, g: ReducedWord = EMPTY) -> IndexResult:
    """Size of the orbit (Rg)L."""
    conjugated = conjugate_subgroup(L, g)
    return relative_index(conjugated, intersect(conjugated, R))


def coset_key(R: SubgroupHandle, g: ReducedWord) -> CosetKey:
    """Normal form of the coset Rg: a core vertex, or a hair root and the rest of g."""
    path = R.graph.read(g.codes)
    read = len(path) - 1
    if read == len(g):
        return ('core', path[-1])
    return ('hair', path[-1], g[read:])


@dataclass(frozen=True)
class CosetBall:
    radius: int
    representatives: tuple[ReducedWord, ...]
    keys: dict

    def __len__(self):
        return len(self.representatives)

    def index_of(self, key: CosetKey):
        return self.keys.get(key)


def coset_ball(R: SubgroupHandle, radius: int) -> CosetBall:
    """Shortlex-least representatives of the cosets at distance <= radius from R."""
    reps: list[ReducedWord] = []
    keys: dict = {}
    for w in iter_reduced_words(R.alphabet, radius):
        key = coset_key(R, w)
        if key not in keys:
            keys[key] = len(reps)
            reps.append(w)
    return CosetBall(radius, tuple(reps), keys)


@dataclass(frozen=True)
class OrbitCell:
    representatives: tuple[ReducedWord, ...]
    open: bool

    def __len__(self):
        return len(self.representatives)


def orbits_on_ball(R: SubgroupHandle, L: SubgroupHandle, radius: int) -> list[OrbitCell]:
    """Partition of the ball under the generators of L; open cells reach past the ball."""
    ball = coset_ball(R, radius)
    moves = [m for b in basis(L) for m in (b, invert(b))]
    graph = nx.Graph()
    graph.add_nodes_from(range(len(ball)))
    leaving = set()
    for i, g in enumerate(ball.representatives):
        for m in moves:
            j = ball.index_of(coset_key(R, concat(g, m)))
            if j is None:
                leaving.add(i)
            else:
                graph.add_edge(i, j)
    cells = []
    for component in sorted(nx.connected_components(graph), key=min):
        members = sorted(component)
        cells.append(OrbitCell(tuple(ball.representatives[i] for i in members),
                               any(i in leaving for i in members)))
    logger.debug('%d cells on a ball of %d cosets', len(cells), len(ball))
    return cells


def cosets_distinct(R: SubgroupHandle, words: Sequence[ReducedWord]) -> bool:
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            if is_member(R, concat(words[i], invert(words[j]))):
                return False
    return True


def ball_to_dot(R: SubgroupHandle, ball: CosetBall, title: str = 'cosets') -> str:
    """Schreier graph of the ball: one node per coset, one edge per generator move inside it."""
    alphabet = R.alphabet
    lines = [f'digraph "{title}" {{', '  node [shape=box];']
    for i, g in enumerate(ball.representatives):
        lines.append(f'  {i} [label="R{format_word(g, alphabet, empty="")}"];')
    for i, g in enumerate(ball.representatives):
        for k, generator in enumerate(alphabet.generators()):
            j = ball.index_of(coset_key(R, concat(g, generator)))
            if j is not None:
                lines.append(f'  {i} -> {j} [label="{alphabet.letters[k]}"];')
    lines.append('}')
    return '\n'.join(lines) + '\n'


@dataclass(frozen=True)
class TrendRow:
    depth: int
    rank: int
    index: IndexResult
    orbit: IndexResult


def normal_orbit_trend(R: SubgroupHandle, w: ReducedWord, depth: int) -> list[TrendRow]:
    """Orbit of the base coset under ⟨u·w·u⁻¹ : |u| <= k⟩ for k = 0..depth.

    These subgroups approximate the normal closure of w; growing orbits are
    evidence that a nontrivial normal subgroup acts with infinite orbits.
    """
    rows = []
    for k in range(depth + 1):
        approximant = from_generators(R.alphabet, [conjugate(u, w) for u in iter_reduced_words(R.alphabet, k)])
        rows.append(TrendRow(k, rank(approximant), index_in_free_group(approximant),
                             orbit_size(R, approximant)))
    return rows
