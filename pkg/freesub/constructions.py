"""Constructions on several subgroups at once.

Products, joins and conjugates; basis changes into a subgroup; finite-index
completions; the separating cover and the saturated pair built on it; shrinking a
family to finite-index subgroups with an infinite-index join; the normalized
extension and the full shrink pipeline; and the small-cancellation witness.

Pipelines append to a `StageLog` and attach certificates to each step. A
certificate names logged handles or words by key, so `verify_log` can re-evaluate
it later from the log alone.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from freesub.config import Config
from freesub.errors import FreesubError, PreconditionError, ResourceLimitError
from freesub.models import INFINITE, FiniteIndex, IndexResult, NOT_SUBGROUP, StageLog, StageRecord, Certificate
from freesub.stallings import (
    Adjacency, CoreGraph, Edge, LabeledGraph, SpanningTree, SubgroupHandle, basis, bridges,
    core_of, deficit_vertices, frame, frame_subgroup, from_generators, index_in_free_group,
    is_member, is_subgroup, morphism, rank, remove_handle, same_alphabet, subgroup_from_adjacency,
)
from freesub.words import (
    EMPTY, Alphabet, ReducedWord, concat, conjugate, format_word, invert,
)

logger = logging.getLogger(__name__)


def _log(log: Optional[StageLog]) -> StageLog:
    return log if log is not None else StageLog(max_vertices=Config.MAX_CORE_VERTICES)


def _require_infinite(H: SubgroupHandle, role: str):
    if index_in_free_group(H).finite:
        raise PreconditionError(f'{role} must have infinite index, got index {index_in_free_group(H)}')


def _word(w: ReducedWord, alphabet: Alphabet) -> str:
    return format_word(w, alphabet, empty='1')


# ============================================
# Products, joins, conjugates
# ============================================

def intersect(A: SubgroupHandle, B: SubgroupHandle) -> SubgroupHandle:
    """Core of A ∩ B: the base component of the product graph, trimmed."""
    alphabet = same_alphabet(A, B)
    ga, gb = A.graph, B.graph
    ids = {(ga.base, gb.base): 0}
    queue = [(ga.base, gb.base)]
    adj: Adjacency = {0: {}}
    for p, q in queue:
        u = ids[(p, q)]
        star_b = gb.star(q)
        for code, pa in ga.star(p).items():
            qb = star_b.get(code)
            if qb is None:
                continue
            key = (pa, qb)
            if key not in ids:
                ids[key] = len(queue)
                queue.append(key)
                adj[ids[key]] = {}
            adj[u][code] = ids[key]
    logger.debug('product graph of %d x %d vertices reached %d pairs',
                 ga.vertex_count, gb.vertex_count, len(queue))
    return subgroup_from_adjacency(alphabet, adj, 0)


def intersect_all(subgroups: Sequence[SubgroupHandle]) -> SubgroupHandle:
    result = subgroups[0]
    for H in subgroups[1:]:
        result = intersect(result, H)
    return result


def join(*subgroups: SubgroupHandle) -> SubgroupHandle:
    """Core of the subgroup generated by all inputs: wedge at the base, fold, trim."""
    alphabet = same_alphabet(*subgroups)
    edges: list[Edge] = []
    count = 1
    for H in subgroups:
        offset = count - 1

        def place(v, offset=offset):
            return 0 if v == 0 else v + offset

        edges.extend((place(u), code, place(v)) for u, code, v in H.graph.edges())
        count += H.graph.vertex_count - 1
    return SubgroupHandle(core_of(LabeledGraph(alphabet, count, tuple(edges))))


def conjugate_subgroup(A: SubgroupHandle, g: ReducedWord) -> SubgroupHandle:
    """Core of g·A·g⁻¹: grow a path labeled g⁻¹ out of the base and move the base to its end."""
    adj = A.graph.adjacency()
    v = A.graph.base
    codes = invert(g).codes
    k = 0
    while k < len(codes) and codes[k] in adj[v]:
        v = adj[v][codes[k]]
        k += 1
    for code in codes[k:]:
        t = len(adj)
        adj[t] = {code ^ 1: v}
        adj[v][code] = t
        v = t
    return subgroup_from_adjacency(A.alphabet, adj, v)


# ============================================
# Basis changes and relative indices
# ============================================

class Rebasing:
    """Rewriting between the ambient alphabet and a free basis of a subgroup E.

    Basis letter k of the rebased alphabet stands for the k-th basis word of the
    spanning tree (code 2k, its inverse 2k+1).
    """

    def __init__(self, ambient: SubgroupHandle, tree: Optional[SpanningTree] = None, prefix: str = 'e'):
        if ambient.is_trivial:
            raise PreconditionError('cannot rebase into the trivial subgroup')
        self.ambient = ambient
        self.tree = tree or ambient.graph.spanning_tree
        self.alphabet = Alphabet.numbered(prefix, len(self.tree.basis))

    @property
    def basis(self) -> tuple[ReducedWord, ...]:
        return self.tree.basis

    def express(self, w: ReducedWord) -> Optional[ReducedWord]:
        return self.tree.express(w)

    def expand(self, word: ReducedWord) -> ReducedWord:
        return self.tree.expand(word)

    def rebase(self, K: SubgroupHandle) -> SubgroupHandle:
        """K ≤ E as a subgroup of the free group on E's basis."""
        words = []
        for b in basis(K):
            inner = self.express(b)
            if inner is None:
                raise PreconditionError(
                    f'{_word(b, K.alphabet)} does not lie in the ambient subgroup')
            words.append(inner)
        return from_generators(self.alphabet, words, K.name)

    def unbase(self, inner: SubgroupHandle) -> SubgroupHandle:
        return from_generators(self.ambient.alphabet, [self.expand(b) for b in basis(inner)], inner.name)

    def wrap(self, K: SubgroupHandle) -> 'RebasedSubgroup':
        return RebasedSubgroup(self, self.rebase(K))


@dataclass(frozen=True)
class RebasedSubgroup:
    rebasing: Rebasing
    inner: SubgroupHandle

    @property
    def ambient(self) -> SubgroupHandle:
        return self.rebasing.ambient

    @property
    def subgroup(self) -> SubgroupHandle:
        return self.rebasing.unbase(self.inner)


def _without_handle(A: SubgroupHandle, B: SubgroupHandle) -> tuple[SubgroupHandle, SubgroupHandle, ReducedWord]:
    """p⁻¹·A·p with its handle cut away, p⁻¹·B·p, and the handle label p."""
    ambient, p = remove_handle(A)
    return ambient, conjugate_subgroup(B, invert(p)), p


def relative_index(A: SubgroupHandle, B: SubgroupHandle) -> IndexResult:
    """[A : B], or NOT_SUBGROUP when B is not contained in A.

    Once A's handle is cut away, B has finite index exactly when the morphism
    core(B) → core(A) is a covering; the index is then its number of sheets.
    """
    same_alphabet(A, B)
    if A.is_trivial:
        return FiniteIndex(1) if B.is_trivial else NOT_SUBGROUP
    ambient, inner, _ = _without_handle(A, B)
    image = morphism(inner, ambient)
    if image is None:
        return NOT_SUBGROUP
    ga, gb = ambient.graph, inner.graph
    if any(gb.degree(u) < ga.degree(v) for u, v in image.items()):
        return INFINITE
    return FiniteIndex(gb.vertex_count // ga.vertex_count)


def transversal(A: SubgroupHandle, B: SubgroupHandle, side: str = 'left') -> list[ReducedWord]:
    """Coset representatives of B in A, ε first.

    Right representatives are the Schreier transversal of the rebased core (prefix
    closed in A's basis); left representatives are their inverses.
    """
    if side not in ('left', 'right'):
        raise PreconditionError(f'side must be left or right, got {side!r}')
    index = relative_index(A, B)
    if index is NOT_SUBGROUP:
        raise PreconditionError('the second subgroup is not contained in the first')
    if not index.finite:
        raise PreconditionError('a transversal needs finite relative index')
    if A.is_trivial:
        return [EMPTY]
    rebasing = Rebasing(A)
    inner = rebasing.rebase(B).graph
    tree = inner.spanning_tree
    right = [rebasing.expand(tree.word_to(v)) for v in range(inner.vertex_count)]
    return right if side == 'right' else [invert(t) for t in right]


def is_normal_in(N: SubgroupHandle, B: SubgroupHandle) -> bool:
    if not is_subgroup(B, N):
        return False
    return normalizes(basis(B), N)


def normalizes(words: Iterable[ReducedWord], N: SubgroupHandle) -> bool:
    """Whether conjugation by each word and its inverse maps N into itself, i.e. a·N·a⁻¹ = N."""
    return all(conjugate_subgroup(N, a) == N for a in words)


def normal_core_in(Q: SubgroupHandle, B1: SubgroupHandle,
                   max_vertices: int = Config.MAX_CORE_VERTICES) -> SubgroupHandle:
    """Largest subgroup of Q normal in B1: the intersection of its conjugates.

    B1 acts on the cosets of Q, i.e. on the fiber of core(Q) over B1's base. The
    core is read off the orbit of the whole fiber under that action.
    """
    index = relative_index(B1, Q)
    if not index.finite:
        raise PreconditionError(f'the normal core needs Q of finite index in B1, got {index}')
    if index.value == 1:
        return Q
    ambient, inner, p = _without_handle(B1, Q)
    image = morphism(inner, ambient)
    g = inner.graph
    start = tuple(sorted(u for u, v in image.items() if v == ambient.graph.base))
    ids = {start: 0}
    states = [start]
    adj: Adjacency = {}
    for i, state in enumerate(states):
        adj[i] = star = {}
        for code in g.star(state[0]):
            nxt = tuple(g.target(u, code) for u in state)
            j = ids.get(nxt)
            if j is None:
                j = ids[nxt] = len(states)
                states.append(nxt)
                if len(states) > max_vertices:
                    raise ResourceLimitError(
                        f'normal core of an index-{index.value} subgroup exceeds {max_vertices} vertices')
            star[code] = j
    logger.debug('normal core: %d cosets, %d vertices', index.value, len(states))
    return conjugate_subgroup(subgroup_from_adjacency(Q.alphabet, adj, 0), p)



# ============================================
# Finite-index completions
# ============================================

def _complete(adj: Adjacency, rank_: int) -> int:
    """Close every letter into a permutation of the vertices; returns edges added."""
    added = 0
    for b in range(rank_):
        code = 2 * b
        sources = sorted(v for v in adj if code not in adj[v])
        sinks = sorted(v for v in adj if code ^ 1 not in adj[v])
        for u, v in zip(sources, sinks):
            adj[u][code] = v
            adj[v][code ^ 1] = u
            added += 1
    return added


def hall_completion(A: SubgroupHandle, exclude: Iterable[ReducedWord] = ()) -> SubgroupHandle:
    """A finite-index M ≥ A containing none of the excluded words."""
    words = list(exclude)
    for s in words:
        if is_member(A, s):
            raise PreconditionError(f'excluded word {_word(s, A.alphabet)} lies in the subgroup')
    adj = A.graph.adjacency()
    for s in words:
        v = A.graph.base
        for code in s.codes:
            t = adj[v].get(code)
            if t is None:
                t = len(adj)
                adj[t] = {}
                adj[v][code] = t
                adj[t][code ^ 1] = v
            v = t
    added = _complete(adj, A.alphabet.rank)
    logger.debug('completed %d vertices with %d edges', len(adj), added)
    return subgroup_from_adjacency(A.alphabet, adj, A.graph.base)


@dataclass(frozen=True)
class FreeFactorEmbedding:
    """A ≤ E with E of finite index and A freely generated by part of E's basis."""

    subgroup: SubgroupHandle
    ambient: SubgroupHandle
    rebasing: Rebasing
    factor_letters: frozenset[int]

    @property
    def factor(self) -> list[ReducedWord]:
        return [self.rebasing.basis[k] for k in sorted(self.factor_letters)]

    @property
    def inner_factor(self) -> SubgroupHandle:
        """A itself, rebased: the free group on the factor letters."""
        return from_generators(self.rebasing.alphabet,
                               [self.rebasing.alphabet.generator(k) for k in sorted(self.factor_letters)])


def free_factor_embedding(A: SubgroupHandle) -> FreeFactorEmbedding:
    if A.is_trivial:
        raise PreconditionError('the trivial subgroup has no free factor embedding')
    adj = A.graph.adjacency()
    _complete(adj, A.alphabet.rank)
    raw = CoreGraph(A.alphabet, [adj[v] for v in range(len(adj))])
    tree = SpanningTree(raw, preferred=A.graph.edges())
    ambient = SubgroupHandle(raw.canonical(), 'E')
    rebasing = Rebasing(ambient, tree)
    letters = frozenset(range(tree.preferred_count))
    logger.debug('free factor of rank %d in a subgroup of rank %d and index %d',
                 len(letters), len(tree.basis), raw.vertex_count)
    return FreeFactorEmbedding(A, ambient, rebasing, letters)


# ============================================
# Separating covers and saturated pairs
# ============================================

@dataclass(frozen=True)
class SeparatingCover:
    """K ≤ H with a full-alphabet deficit vertex outside the frame of K."""

    subgroup: SubgroupHandle
    branch: str
    edge: Edge
    sheets: int
    witness: Optional[int]


def _deficit_outside_frame(K: SubgroupHandle, letters) -> Optional[int]:
    fr = frame(K, letters)
    return next((v for v in deficit_vertices(K).vertices if v not in fr), None)


def separating_cover(H: SubgroupHandle, letters, j: Optional[int] = None,
                     log: Optional[StageLog] = None) -> SeparatingCover:
    """Keep H if a bridge leaves the letters, otherwise take a j-sheeted cyclic cover."""
    j = Config.COVER_INDEX if j is None else j
    if j < 2:
        raise PreconditionError(f'the cover index must be at least 2, got {j}')
    g = H.graph
    allowed = g.alphabet.subset(letters)
    _require_infinite(H, 'H')
    outside = [e for e in g.edges() if e[1] >> 1 not in allowed]
    if not outside:
        raise PreconditionError('H lies in the subgroup generated by the frame letters')
    cut = set(bridges(g))
    bridge = next((e for e in outside if e in cut), None)
    if bridge is not None:
        result = SeparatingCover(H, 'bridge', bridge, 1, _deficit_outside_frame(H, allowed))
    else:
        edge = outside[0]
        n = g.vertex_count
        adj: Adjacency = {v: {} for v in range(j * n)}
        for i in range(j):
            for u, code, v in g.edges():
                src = i * n + u
                dst = ((i + 1) % j) * n + v if (u, code, v) == edge else i * n + v
                adj[src][code] = dst
                adj[dst][code ^ 1] = src
        K = subgroup_from_adjacency(g.alphabet, adj, 0, H.name)
        result = SeparatingCover(K, 'cover', edge, j, _deficit_outside_frame(K, allowed))
    logger.debug('separating cover: %s branch on edge %s', result.branch, result.edge)
    if log is not None:
        entry = log.record('separating-cover', {'H': H}, {'K': result.subgroup},
                           branch=result.branch, edge=result.edge, sheets=result.sheets)
        certify(entry, 'relative-index', ('H', 'K'), str(result.sheets))
        certify(entry, 'deficit-outside-frame', ('K',), 'yes', args=tuple(sorted(allowed)))
    return result


def saturate_frame(adj: Adjacency, base: int, letters: frozenset[int]) -> int:
    """Close the frame letters at every frame vertex without adding vertices.

    A vertex v missing the letter ℓ follows ℓ⁻¹ to the end q of its maximal path
    and receives the edge v -ℓ-> q. Vertices are taken in id order, letters in
    code order. Returns the number of edges added.
    """
    codes = sorted(c for b in letters for c in (2 * b, 2 * b + 1))
    added = 0
    while True:
        seen = {base}
        queue = [base]
        for v in queue:
            for code, t in adj[v].items():
                if code >> 1 in letters and t not in seen:
                    seen.add(t)
                    queue.append(t)
        gap = next(((v, c) for v in sorted(seen) for c in codes if c not in adj[v]), None)
        if gap is None:
            return added
        v, code = gap
        q = v
        while code ^ 1 in adj[q]:
            q = adj[q][code ^ 1]
        adj[v][code] = q
        adj[q][code ^ 1] = v
        added += 1
        logger.debug('saturation edge %d -%d-> %d', v, code, q)


@dataclass
class SaturatedPair:
    """A1 ≤ A and B0 ≤ B of finite index, A1 and B0 inside B1 of infinite index."""

    A1: SubgroupHandle
    B0: SubgroupHandle
    B1: SubgroupHandle
    log: StageLog
    shortcut: bool = False
    cover: Optional[SeparatingCover] = None


def saturated_pair(A: SubgroupHandle, B: SubgroupHandle, j: Optional[int] = None,
                   log: Optional[StageLog] = None) -> SaturatedPair:
    log = _log(log)
    same_alphabet(A, B)
    _require_infinite(A, 'A')
    _require_infinite(B, 'B')
    embedding = free_factor_embedding(A)
    rebasing = embedding.rebasing
    letters = embedding.factor_letters
    entry = log.record('free-factor-embedding', {'A': A}, {'E': embedding.ambient},
                       factor_rank=len(letters), basis_rank=len(rebasing.basis))
    certify(entry, 'index', ('E',), 'finite')
    certify(entry, 'contains', ('E', 'A'), 'yes')

    meet = intersect(B, embedding.ambient)
    inner = rebasing.wrap(meet).inner
    entry = log.record('intersect-with-embedding', {'B': B, 'E': embedding.ambient},
                       {'B_E': meet, 'B_E_rebased': inner})
    certify(entry, 'relative-index', ('B', 'B_E'), 'finite')

    if all(code >> 1 in letters for _, code, _ in inner.graph.edges()):
        pair = SaturatedPair(A, meet, A, log, shortcut=True)
        log.record('frame-shortcut', {'B_E': meet}, {'A1': A, 'B0': meet, 'B1': A},
                   note='B ∩ E lies in the free factor')
    else:
        cover = separating_cover(inner, letters, j, log=log)
        adj = cover.subgroup.graph.adjacency()
        added = saturate_frame(adj, 0, letters)
        inner_b1 = subgroup_from_adjacency(rebasing.alphabet, adj, 0)
        inner_a1 = frame_subgroup(inner_b1, letters)
        entry = log.record('frame-saturation', {'K': cover.subgroup},
                           {'B1_rebased': inner_b1, 'A1_rebased': inner_a1}, edges_added=added)
        certify(entry, 'index', ('B1_rebased',), 'infinite')
        certify(entry, 'contains', ('B1_rebased', 'K'), 'yes')
        pair = SaturatedPair(rebasing.unbase(inner_a1), rebasing.unbase(cover.subgroup),
                             rebasing.unbase(inner_b1), log, cover=cover)

    entry = log.record('saturated-pair', {'A': A, 'B': B},
                       {'A1': pair.A1, 'B0': pair.B0, 'B1': pair.B1}, shortcut=pair.shortcut)
    certify(entry, 'relative-index', ('A', 'A1'), 'finite')
    certify(entry, 'relative-index', ('B', 'B0'), 'finite')
    certify(entry, 'contains', ('B1', 'B0'), 'yes')
    certify(entry, 'contains', ('B1', 'A1'), 'yes')
    certify(entry, 'index', ('B1',), 'infinite')
    return pair


# ============================================
# Families, normal cores, normalized extensions
# ============================================

@dataclass
class ShrunkFamily:
    members: list[SubgroupHandle]
    join: SubgroupHandle
    log: StageLog


def shrink_family(subgroups: Sequence[SubgroupHandle], log: Optional[StageLog] = None) -> ShrunkFamily:
    """Finite-index subgroups of each input whose join has infinite index.

    Subgroups are folded in one at a time; the members so far shrink into the
    finite-index A1 of a saturated pair with the next input.
    """
    log = _log(log)
    if not subgroups:
        raise PreconditionError('the family is empty')
    same_alphabet(*subgroups)
    for i, H in enumerate(subgroups, 1):
        _require_infinite(H, f'H{i}')
    members = [subgroups[0]]
    current = subgroups[0]
    for k, H in enumerate(subgroups[1:], 2):
        if current.is_trivial:
            members.append(H)
            current = join(*members)
            log.record('family-step', {f'H{k}': H}, {'J': current}, note='previous join is trivial')
            continue
        widened = join(current, H)
        if not index_in_free_group(widened).finite:
            members.append(H)
            entry = log.record('family-step', {'J_previous': current, f'H{k}': H}, {'J': widened},
                               note='join already has infinite index')
            certify(entry, 'index', ('J',), 'infinite')
            current = widened
            continue
        pair = saturated_pair(current, H, log=log)
        previous = current
        members = [intersect(P, pair.A1) for P in members] + [pair.B0]
        current = join(*members)
        entry = log.record('family-step', {'J_previous': previous, f'H{k}': H, 'B1': pair.B1},
                           {'J': current})
        certify(entry, 'contains', ('B1', 'J'), 'yes')

    inputs = {f'H{i}': H for i, H in enumerate(subgroups, 1)}
    outputs = {f'H{i}_shrunk': P for i, P in enumerate(members, 1)}
    outputs['J'] = current
    entry = log.record('shrunk-family', inputs, outputs, size=len(subgroups))
    for i in range(1, len(subgroups) + 1):
        certify(entry, 'relative-index', (f'H{i}', f'H{i}_shrunk'), 'finite')
    certify(entry, 'index', ('J',), 'infinite')
    return ShrunkFamily(members, current, log)


@dataclass
class NormalizedExtension:
    """B2 of infinite index normalized by A, containing H of finite index in B."""

    B2: SubgroupHandle
    H: SubgroupHandle
    log: StageLog
    pair: Optional[SaturatedPair] = None
    Q: Optional[SubgroupHandle] = None
    transversal: list[ReducedWord] = field(default_factory=list)


def normalized_extension(A: SubgroupHandle, B: SubgroupHandle,
                         log: Optional[StageLog] = None) -> NormalizedExtension:
    log = _log(log)
    same_alphabet(A, B)
    _require_infinite(A, 'A')
    _require_infinite(B, 'B')
    if B.is_trivial:
        raise PreconditionError('B must be nontrivial')
    if A.is_trivial:
        entry = log.record('normalized-extension', {'A': A, 'B': B}, {'B2': B, 'H': B},
                           note='A is trivial')
        _certify_extension(entry)
        return NormalizedExtension(B, B, log)
    widened = join(A, B)
    if not index_in_free_group(widened).finite:
        entry = log.record('normalized-extension', {'A': A, 'B': B}, {'B2': widened, 'H': B},
                           note='join already has infinite index')
        _certify_extension(entry)
        return NormalizedExtension(widened, B, log)

    pair = saturated_pair(A, B, log=log)
    reps = transversal(A, pair.A1)
    entry = log.record('transversal', {'A': A, 'A1': pair.A1}, {},
                       words={f'a{i}': a for i, a in enumerate(reps, 1)}, size=len(reps))
    certify(entry, 'relative-index', ('A', 'A1'), str(len(reps)))

    conjugates = [conjugate_subgroup(pair.B1, a) for a in reps]
    family = shrink_family(conjugates, log=log)
    pulled_back = [conjugate_subgroup(P, invert(a)) for a, P in zip(reps, family.members)]
    Q0 = intersect_all(pulled_back)
    Q = normal_core_in(Q0, pair.B1)
    entry = log.record('normal-core', {'Q0': Q0, 'B1': pair.B1}, {'Q': Q})
    certify(entry, 'relative-index', ('B1', 'Q'), 'finite')
    certify(entry, 'normal-in', ('Q', 'B1'), 'yes')

    B2 = join(*[conjugate_subgroup(Q, a) for a in reps])
    H = intersect(B, Q)
    entry = log.record('normalized-extension', {'A': A, 'B': B},
                       {'B2': B2, 'H': H, 'AB2': join(A, B2)})
    _certify_extension(entry)
    certify(entry, 'relative-index', ('AB2', 'B2'), 'finite')
    return NormalizedExtension(B2, H, log, pair, Q, reps)


def _certify_extension(entry: StageRecord):
    certify(entry, 'index', ('B2',), 'infinite')
    certify(entry, 'relative-index', ('B', 'H'), 'finite')
    certify(entry, 'contains', ('B2', 'H'), 'yes')
    certify(entry, 'conjugation-invariant', ('B2', 'A'), 'yes')


@dataclass
class ShrinkResult:
    """H of finite index in B whose join with A has infinite index and avoids S."""

    H: SubgroupHandle
    join: SubgroupHandle
    log: StageLog
    extension: Optional[NormalizedExtension] = None
    completion: Optional[SubgroupHandle] = None


def shrink_to_infinite_join(A: SubgroupHandle, B: SubgroupHandle,
                            exclude: Iterable[ReducedWord] = (),
                            log: Optional[StageLog] = None) -> ShrinkResult:
    log = _log(log)
    alphabet = same_alphabet(A, B)
    _require_infinite(A, 'A')
    _require_infinite(B, 'B')
    words = list(exclude)
    for s in words:
        if is_member(A, s):
            raise PreconditionError(f'excluded word {_word(s, alphabet)} lies in A')

    extension = completion = None
    if B.is_trivial:
        H = B
    else:
        extension = normalized_extension(A, B, log=log)
        H = extension.H
        if words:
            completion = hall_completion(A, words)
            entry = log.record('hall-completion', {'A': A}, {'M': completion},
                               words={f's{i}': s for i, s in enumerate(words, 1)})
            certify(entry, 'index', ('M',), 'finite')
            certify(entry, 'contains', ('M', 'A'), 'yes')
            for i in range(1, len(words) + 1):
                certify(entry, 'excludes', ('M', f's{i}'), 'yes')
            H = intersect(H, completion)

    J = join(A, H)
    entry = log.record('shrink', {'A': A, 'B': B}, {'H': H, 'J': J},
                       words={f's{i}': s for i, s in enumerate(words, 1)},
                       note='B is trivial' if B.is_trivial else '')
    certify(entry, 'relative-index', ('B', 'H'), 'finite')
    certify(entry, 'contains', ('B', 'H'), 'yes')
    certify(entry, 'index', ('J',), 'infinite')
    for i in range(1, len(words) + 1):
        certify(entry, 'excludes', ('J', f's{i}'), 'yes')
    return ShrinkResult(H, J, log, extension, completion)


# ============================================
# Small cancellation
# ============================================

@dataclass(frozen=True)
class SmallCancelCheck:
    ok: bool
    witness: str = ''

    def __bool__(self):
        return self.ok


def check_smallcancel(u_words: Sequence[ReducedWord], w_length: int) -> SmallCancelCheck:
    """Every subword of u_i of length ceil(|u_i|/10) occurs once in u_i and never in u_j.

    Longer subwords contain one of that length, so that length is the only one scanned.
    """
    texts = []
    for i, u in enumerate(u_words, 1):
        if not u.is_positive():
            raise PreconditionError(f'u{i} contains an inverse letter')
        texts.append(u.codes)
    for i, text in enumerate(texts, 1):
        if len(text) < 10 * w_length:
            return SmallCancelCheck(False, f'u{i} has length {len(text)}, below {10 * w_length}')
        span = max(1, -(-len(text) // 10))
        first: dict[tuple[int, ...], int] = {}
        for p in range(len(text) - span + 1):
            piece = text[p:p + span]
            if piece in first:
                return SmallCancelCheck(
                    False, f'u{i}: the subword of length {span} at {first[piece]} occurs twice')
            first[piece] = p
        for j, other in enumerate(texts, 1):
            if j == i:
                continue
            for q in range(len(other) - span + 1):
                p = first.get(other[q:q + span])
                if p is not None:
                    return SmallCancelCheck(
                        False, f'u{i}: the subword of length {span} at {p} occurs in u{j} at {q}')
    return SmallCancelCheck(True)


def block_words(count: int, blocks: int) -> list[ReducedWord]:
    """Words x·y^c repeated `blocks` times; word i uses exponents i·blocks+1 .. (i+1)·blocks."""
    words = []
    for i in range(count):
        codes: list[int] = []
        for t in range(1, blocks + 1):
            codes.append(0)
            codes.extend([2] * (i * blocks + t))
        words.append(ReducedWord(tuple(codes)))
    return words


@dataclass
class SmallCancellationWitness:
    """H = ⟨v1..vr⟩ of infinite index with F = H·N, N the normal closure of w."""

    subgroup: SubgroupHandle
    generators: list[ReducedWord]
    u_words: list[ReducedWord]
    blocks: int
    log: StageLog


def small_cancellation_witness(alphabet: Alphabet, w: ReducedWord, max_blocks: Optional[int] = None,
                               log: Optional[StageLog] = None) -> SmallCancellationWitness:
    log = _log(log)
    max_blocks = Config.SMALLCANCEL_MAX_BLOCKS if max_blocks is None else max_blocks
    r = alphabet.rank
    if r < 2:
        raise PreconditionError('the small-cancellation witness needs rank at least 2')
    if not w:
        raise PreconditionError('w must be a nontrivial word')

    blocks = 1
    while True:
        if blocks > max_blocks:
            raise ResourceLimitError(f'no small-cancellation family within {max_blocks} blocks')
        u = block_words(2 * r, blocks)
        check = check_smallcancel(u, len(w))
        if check:
            break
        logger.debug('%d blocks rejected: %s', blocks, check.witness)
        blocks += 1

    generators = []
    words = {'w': w}
    for i in range(1, r + 1):
        x = alphabet.generator(i - 1)
        first, second = u[2 * i - 2], u[2 * i - 1]
        v = concat(first, w, invert(first), x, second, w, invert(second))
        generators.append(v)
        words.update({
            f'x{i}': x,
            f'v{i}': v,
            f'v{i}x{i}^-1': concat(v, invert(x)),
            f'c{i}a': conjugate(first, w),
            f'c{i}b': conjugate(concat(x, second), w),
        })
    words.update({f'u{k}': word for k, word in enumerate(u, 1)})
    H = from_generators(alphabet, generators, 'H')
    entry = log.record('small-cancellation', {}, {'H': H}, words=words, blocks=blocks,
                       u_lengths=[len(word) for word in u])
    certify(entry, 'small-cancellation', tuple(f'u{k}' for k in range(1, 2 * r + 1)), 'yes',
            args=(len(w),))
    certify(entry, 'rank', ('H',), str(r))
    certify(entry, 'index', ('H',), 'infinite')
    for i in range(1, r + 1):
        certify(entry, 'excludes', ('H', f'x{i}'), 'yes')
        certify(entry, 'product', (f'v{i}x{i}^-1', f'c{i}a', f'c{i}b'), 'yes')
    return SmallCancellationWitness(H, generators, u, blocks, log)


# ============================================
# Certificates
# ============================================

def _yes(flag: bool) -> str:
    return 'yes' if flag else 'no'


def evaluate_certificate(entry: StageRecord, kind: str, subjects: tuple, args: tuple = ()) -> str:
    """Observed value of a certificate, computed from the handles and words logged in `entry`."""
    handle = entry.subject
    if kind == 'index':
        return str(index_in_free_group(handle(subjects[0])))
    if kind == 'relative-index':
        return str(relative_index(handle(subjects[0]), handle(subjects[1])))
    if kind == 'contains':
        return _yes(is_subgroup(handle(subjects[0]), handle(subjects[1])))
    if kind == 'excludes':
        return _yes(not is_member(handle(subjects[0]), entry.words[subjects[1]]))
    if kind == 'rank':
        return str(rank(handle(subjects[0])))
    if kind == 'deficit-outside-frame':
        return _yes(_deficit_outside_frame(handle(subjects[0]), args) is not None)
    if kind == 'normal-in':
        return _yes(is_normal_in(handle(subjects[0]), handle(subjects[1])))
    if kind == 'conjugation-invariant':
        return _yes(normalizes(basis(handle(subjects[1])), handle(subjects[0])))
    if kind == 'product':
        target, *factors = (entry.words[key] for key in subjects)
        return _yes(concat(*factors) == target)
    if kind == 'small-cancellation':
        return _yes(bool(check_smallcancel([entry.words[key] for key in subjects], args[0])))
    raise FreesubError(f'unknown certificate kind {kind!r}')


def certify(entry: StageRecord, kind: str, subjects: tuple, expected: str,
            args: tuple = (), evidence_only: bool = False) -> Certificate:
    observed = evaluate_certificate(entry, kind, subjects, args)
    cert = Certificate(kind, tuple(subjects), expected, observed, evidence_only, tuple(args))
    entry.certificates.append(cert)
    if not cert.holds and not evidence_only:
        logger.warning('step %s: %s', entry.step, cert.describe())
    return cert


def verify_log(log: StageLog) -> list[str]:
    """Re-evaluate every certificate; returns a description of each mismatch or failure."""
    problems = []
    for entry, cert in log.certificates():
        observed = evaluate_certificate(entry, cert.kind, cert.subjects, cert.args)
        if observed != cert.observed:
            problems.append(f'step {entry.step}: {cert.kind} now observes {observed}, logged {cert.observed}')
        elif not cert.holds and not cert.evidence_only:
            problems.append(f'step {entry.step}: {cert.describe()}')
    return problems
