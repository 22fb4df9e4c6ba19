"""Finite prefixes of an increasing union R = R1 ≤ R2 ≤ ... of infinite-index subgroups.

Every finitely generated infinite-index subgroup L is eventually processed as some
L_i, and R_i then contains a finite-index subgroup of L_i, while each R_i keeps
infinite index in F.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional

from freesub.config import Config
from freesub.constructions import certify, intersect, relative_index, shrink_to_infinite_join
from freesub.errors import PreconditionError, ResourceLimitError
from freesub.models import IndexResult, StageLog
from freesub.stallings import SubgroupHandle, from_generators, index_in_free_group, serialize
from freesub.words import Alphabet, ReducedWord, iter_reduced_words

logger = logging.getLogger(__name__)

# x y x^-1 y^-1 on the first two generators
COMMUTATOR = ReducedWord((0, 2, 1, 3))


class SubgroupStream:
    """Distinct infinite-index subgroups generated by multisets of total length <= budget.

    Order: total length, then number of generators, then generator positions in the
    shortlex list of nonempty reduced words. Duplicates are detected by canonical
    serialization.
    """

    def __init__(self, alphabet: Alphabet, budget: int):
        if budget < 1:
            raise PreconditionError(f'the enumeration budget must be at least 1, got {budget}')
        self.alphabet = alphabet
        self.budget = budget
        self.words = [w for w in iter_reduced_words(alphabet, budget) if w]
        self.seen: set[str] = set()
        self.emitted = 0

    def _multisets(self, total: int, count: int, start: int = 0) -> Iterator[tuple[int, ...]]:
        if count == 0:
            if total == 0:
                yield ()
            return
        for i in range(start, len(self.words)):
            length = len(self.words[i])
            if length > total:
                break
            if length * count > total:
                continue
            for rest in self._multisets(total - length, count - 1, i):
                yield (i,) + rest

    def __iter__(self) -> Iterator[SubgroupHandle]:
        for total in range(self.budget + 1):
            for count in range(total + 1):
                for combo in self._multisets(total, count):
                    H = from_generators(self.alphabet, [self.words[i] for i in combo])
                    key = serialize(H)
                    if key in self.seen:
                        continue
                    self.seen.add(key)
                    if index_in_free_group(H).finite:
                        continue
                    self.emitted += 1
                    yield H.named(f'L{self.emitted}')


def enumerate_subgroups(alphabet: Alphabet, budget: Optional[int] = None) -> SubgroupStream:
    return SubgroupStream(alphabet, Config.ENUM_BUDGET if budget is None else budget)


@dataclass
class RPrefix:
    alphabet: Alphabet
    stages: list[SubgroupHandle] = field(default_factory=list)
    processed: list[SubgroupHandle] = field(default_factory=list)
    shrunk: list[SubgroupHandle] = field(default_factory=list)
    log: StageLog = field(default_factory=StageLog)
    budget: Optional[int] = None
    truncated: Optional[str] = None

    @property
    def N(self) -> int:
        return len(self.stages)

    @property
    def last(self) -> SubgroupHandle:
        if not self.stages:
            raise PreconditionError('the prefix has no stages')
        return self.stages[-1]


def build_r_prefix(alphabet: Alphabet, N: int, budget: Optional[int] = None,
                   max_vertices: Optional[int] = None, max_stages: Optional[int] = None,
                   interleave_merges: bool = False) -> RPrefix:
    """Stages R_1 .. R_N, stopping early with a truncation marker when a cap is hit."""
    if N < 1:
        raise PreconditionError(f'the number of stages must be at least 1, got {N}')
    if alphabet.rank < 2:
        raise PreconditionError('the prefix construction needs rank at least 2')
    budget = Config.ENUM_BUDGET if budget is None else budget
    max_vertices = Config.MAX_CORE_VERTICES if max_vertices is None else max_vertices
    max_stages = Config.MAX_STAGES if max_stages is None else max_stages

    log = StageLog(max_vertices=max_vertices)
    prefix = RPrefix(alphabet, log=log, budget=budget)
    stream = iter(enumerate_subgroups(alphabet, budget))
    target = min(N, max_stages)

    try:
        while prefix.N < target:
            L = next(stream, None)
            if L is None:
                prefix.truncated = f'enumeration exhausted at budget {budget} after {prefix.N} stages'
                break
            if L.is_trivial:
                continue
            i = prefix.N + 1
            L = L.named(f'L{i}')
            if not prefix.stages:
                H, R = L, L
            else:
                result = shrink_to_infinite_join(prefix.last, L, log=log)
                H, R = result.H, result.join
            R = R.named(f'R{i}')
            entry = log.record('prefix-stage', {'R_previous': prefix.stages[-1] if prefix.stages else R,
                                                'L': L},
                               {'H': H, 'R': R}, words={'commutator': COMMUTATOR}, stage=i)
            certify(entry, 'index', ('R',), 'infinite')
            certify(entry, 'relative-index', ('L', 'H'), 'finite')
            certify(entry, 'contains', ('R', 'R_previous'), 'yes')
            certify(entry, 'excludes', ('R', 'commutator'), 'yes', evidence_only=True)
            prefix.stages.append(R)
            prefix.processed.append(L)
            prefix.shrunk.append(H)
            if interleave_merges:
                log.placeholder('transitivity-merge', 'merge step for high transitivity; not performed')
    except ResourceLimitError as e:
        prefix.truncated = f'resource cap at stage {prefix.N + 1}: {e}'
        logger.warning('prefix truncated: %s', prefix.truncated)

    if prefix.truncated is None and N > max_stages:
        prefix.truncated = f'stage cap {max_stages} reached before {N} stages'
    return prefix


def verify_r_property(prefix: RPrefix, L: SubgroupHandle) -> IndexResult:
    """[L : L ∩ R_N]; finite for every processed L_i."""
    R = prefix.last
    return relative_index(L, intersect(L, R))


def r_property_is_evidence(L: SubgroupHandle) -> bool:
    """For L of finite index in F the finite-stage answer is evidence only."""
    return index_in_free_group(L).finite
