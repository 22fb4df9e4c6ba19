"""Core graphs of finitely generated subgroups of a free group.

The core of H keeps its handle: the base point may have degree 1, and every
other vertex has degree at least 2. Vertices are renumbered by a breadth-first
search from the base (stars visited in letter-code order) whenever a core is
built, so two cores describe the same subgroup exactly when their canonical
forms are equal.
"""
from __future__ import annotations

import logging
import re
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence, Union

import networkx as nx

from freesub.errors import GraphFormatError, PreconditionError
from freesub.models import INFINITE, FiniteIndex, IndexResult
from freesub.words import EMPTY, Alphabet, ReducedWord, SignedLetter, invert, reduce

logger = logging.getLogger(__name__)

# (source, letter code, target); the inverse edge is implied
Edge = tuple[int, int, int]
Adjacency = dict[int, dict[int, int]]


def normalize_edge(u: int, code: int, v: int) -> tuple[Edge, int]:
    """Positive representative of a traversed edge and the traversal sign."""
    if code & 1:
        return (v, code ^ 1, u), -1
    return (u, code, v), 1


# ============================================
# Pre-fold graphs and folding
# ============================================

@dataclass(frozen=True)
class LabeledGraph:
    """Finite labeled multigraph with base point 0, possibly not regular."""

    alphabet: Alphabet
    vertex_count: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'edges', tuple(tuple(e) for e in self.edges))
        if self.vertex_count < 1:
            raise PreconditionError('a labeled graph needs at least the base vertex')
        for u, code, v in self.edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise PreconditionError(f'edge {(u, code, v)} leaves the vertex range')
            if not 0 <= code < 2 * self.alphabet.rank:
                raise PreconditionError(f'edge {(u, code, v)} has a label outside the alphabet')

    def half_edges(self) -> dict[int, dict[int, list[int]]]:
        out: dict[int, dict[int, list[int]]] = {v: {} for v in range(self.vertex_count)}
        for u, code, v in self.edges:
            out[u].setdefault(code, []).append(v)
            out[v].setdefault(code ^ 1, []).append(u)
        return out

    def is_regular(self) -> bool:
        return all(len(targets) == 1 for star in self.half_edges().values()
                   for targets in star.values())


class _FoldingWorkspace:
    """Union-find over vertices; each star holds one target per letter and clashes wait in a queue."""

    def __init__(self, vertex_count: int):
        self.parent = list(range(vertex_count))
        self.star: list[dict[int, int]] = [{} for _ in range(vertex_count)]
        self.pending: deque[tuple[int, int]] = deque()

    @classmethod
    def from_graph(cls, graph: LabeledGraph, order: Optional[Sequence[int]] = None) -> '_FoldingWorkspace':
        """Attach half-edges vertex by vertex, `order` first and the rest by number."""
        ws = cls(graph.vertex_count)
        out = graph.half_edges()
        first = dict.fromkeys(order or ())
        sequence = list(first) + [v for v in range(graph.vertex_count) if v not in first]
        for v in sequence:
            for code in sorted(out[v]):
                for t in out[v][code]:
                    ws.attach(v, code, t)
        return ws

    def find(self, v: int) -> int:
        parent = self.parent
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def attach(self, v: int, code: int, t: int) -> None:
        star = self.star[v]
        old = star.get(code)
        if old is None:
            star[code] = t
        elif self.find(old) != self.find(t):
            self.pending.append((old, t))

    def union(self, a: int, b: int) -> int:
        a, b = self.find(a), self.find(b)
        if a == b:
            return a
        keep, gone = min(a, b), max(a, b)
        self.parent[gone] = keep
        moved, self.star[gone] = self.star[gone], {}
        for code, t in moved.items():
            self.attach(keep, code, t)
        return keep

    def fold(self) -> int:
        """Identify clashing targets until every star is regular; returns the fold count."""
        folds = 0
        while self.pending:
            a, b = self.pending.popleft()
            if self.find(a) != self.find(b):
                self.union(a, b)
                folds += 1
        return folds

    def adjacency(self) -> Adjacency:
        return {v: {code: self.find(t) for code, t in self.star[v].items()}
                for v in range(len(self.parent)) if self.find(v) == v}


def bouquet(alphabet: Alphabet, generators: Iterable[ReducedWord]) -> LabeledGraph:
    """Wedge of closed paths at the base, one per nonempty generator."""
    count = 1
    edges: list[Edge] = []
    for w in generators:
        if not w:
            continue
        prev = 0
        for i, code in enumerate(w.codes):
            if i == len(w.codes) - 1:
                nxt = 0
            else:
                nxt = count
                count += 1
            edges.append((prev, code, nxt))
            prev = nxt
    return LabeledGraph(alphabet, count, tuple(edges))


def fold(graph: LabeledGraph, order: Optional[Sequence[int]] = None) -> LabeledGraph:
    """Fold to a regular graph; `order` is the order stars are attached in (any order gives the same result)."""
    ws = _FoldingWorkspace.from_graph(graph, order)
    folds = ws.fold()
    logger.debug('folded %d vertices with %d identifications', graph.vertex_count, folds)
    stars = _canonical_stars(_component(ws.adjacency(), ws.find(0)), ws.find(0))
    return _labeled_from_stars(graph.alphabet, stars)


def fold_step(graph: LabeledGraph) -> Optional[LabeledGraph]:
    """Perform the first identification in (vertex, letter) order; None if already regular."""
    out = graph.half_edges()
    for v in range(graph.vertex_count):
        for code in sorted(out[v]):
            targets = out[v][code]
            if len(targets) < 2:
                continue
            a, b = targets[0], targets[1]
            edges = list(graph.edges)
            # drop one of the two clashing edges
            drop = (v, code, b) if (v, code, b) in edges else (b, code ^ 1, v)
            edges.remove(drop)
            if a == b:
                return LabeledGraph(graph.alphabet, graph.vertex_count, tuple(edges))
            keep, gone = min(a, b), max(a, b)

            def relabel(x):
                if x == gone:
                    return keep
                return x - 1 if x > gone else x

            merged = tuple((relabel(u), c, relabel(w)) for u, c, w in edges)
            return LabeledGraph(graph.alphabet, graph.vertex_count - 1, merged)
    return None


def trim(graph: LabeledGraph) -> LabeledGraph:
    """Remove degree <= 1 vertices other than the base, repeatedly, and other components."""
    if not graph.is_regular():
        raise PreconditionError('trim expects a folded (regular) graph')
    adj = _component(_adjacency_of(graph), 0)
    _trim(adj, 0)
    return _labeled_from_stars(graph.alphabet, _canonical_stars(adj, 0))


def core_of(graph: LabeledGraph, order: Optional[Sequence[int]] = None) -> 'CoreGraph':
    ws = _FoldingWorkspace.from_graph(graph, order)
    ws.fold()
    return CoreGraph.from_adjacency(graph.alphabet, ws.adjacency(), ws.find(0))


def _adjacency_of(graph: LabeledGraph) -> Adjacency:
    return {v: {code: targets[0] for code, targets in star.items()}
            for v, star in graph.half_edges().items()}


def _component(adj: Adjacency, base: int) -> Adjacency:
    seen = {base}
    queue = [base]
    for v in queue:
        for t in adj[v].values():
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return {v: dict(adj[v]) for v in queue}


def _trim(adj: Adjacency, base: int) -> None:
    stack = [v for v in adj if v != base and len(adj[v]) <= 1]
    while stack:
        v = stack.pop()
        if v not in adj or len(adj[v]) > 1:
            continue
        for code, t in adj.pop(v).items():
            star = adj.get(t)
            if star is None:
                continue
            star.pop(code ^ 1, None)
            if t != base and len(star) <= 1:
                stack.append(t)


def _canonical_stars(adj: Adjacency, base: int) -> tuple[dict[int, int], ...]:
    order = {base: 0}
    queue = [base]
    for v in queue:
        for code in sorted(adj[v]):
            t = adj[v][code]
            if t not in order:
                order[t] = len(queue)
                queue.append(t)
    return tuple({code: order[adj[v][code]] for code in sorted(adj[v])} for v in queue)


def _labeled_from_stars(alphabet: Alphabet, stars: Sequence[Mapping[int, int]]) -> LabeledGraph:
    edges = [(u, code, v) for u, star in enumerate(stars) for code, v in star.items() if not code & 1]
    return LabeledGraph(alphabet, len(stars), tuple(edges))


def core_problems(adj: Adjacency, base: int) -> list[str]:
    found = []
    for v, star in adj.items():
        for code, t in star.items():
            if t not in adj:
                found.append(f'vertex {v}: edge {code} leaves the graph')
            elif adj[t].get(code ^ 1) != v:
                found.append(f'vertex {v}: edge {code} has no inverse')
        if v != base and len(star) < 2:
            found.append(f'vertex {v} has degree {len(star)}')
    if found:
        return found
    if len(_component(adj, base)) != len(adj):
        found.append('graph is not connected')
    return found

# ============================================
# Core graphs and subgroup handles
# ============================================

class CoreGraph:
    """Finite connected regular labeled graph with base point 0."""

    base = 0

    def __init__(self, alphabet: Alphabet, stars: Sequence[Mapping[int, int]], canonical: bool = False):
        self.alphabet = alphabet
        self._stars = tuple(MappingProxyType(dict(sorted(star.items()))) for star in stars)
        self._canonical = canonical

    @classmethod
    def from_adjacency(cls, alphabet: Alphabet, adj: Adjacency, base: int = 0,
                       trim: bool = True) -> 'CoreGraph':
        comp = _component(adj, base)
        if trim:
            _trim(comp, base)
        return cls(alphabet, _canonical_stars(comp, base), canonical=True)

    @classmethod
    def trivial(cls, alphabet: Alphabet) -> 'CoreGraph':
        return cls(alphabet, [{}], canonical=True)

    @property
    def vertex_count(self) -> int:
        return len(self._stars)

    @property
    def edge_count(self) -> int:
        return sum(len(star) for star in self._stars) // 2

    def star(self, v: int) -> Mapping[int, int]:
        return self._stars[v]

    def target(self, v: int, code: int) -> Optional[int]:
        return self._stars[v].get(code)

    def degree(self, v: int) -> int:
        return len(self._stars[v])

    def edges(self) -> list[Edge]:
        return [(u, code, v) for u, star in enumerate(self._stars)
                for code, v in star.items() if not code & 1]

    def adjacency(self) -> Adjacency:
        return {v: dict(star) for v, star in enumerate(self._stars)}

    def read(self, codes: Sequence[int], start: int = 0) -> list[int]:
        """Vertices visited while reading `codes` from `start`, stopping where a letter is missing."""
        path = [start]
        v = start
        stars = self._stars
        for code in codes:
            v = stars[v].get(code)
            if v is None:
                break
            path.append(v)
        return path

    def canonical(self) -> 'CoreGraph':
        if self._canonical:
            return self
        return CoreGraph.from_adjacency(self.alphabet, self.adjacency(), self.base, trim=False)

    @cached_property
    def key(self) -> tuple:
        graph = self.canonical()
        return (graph.alphabet.letters,) + tuple(tuple(star.items()) for star in graph._stars)

    @cached_property
    def spanning_tree(self) -> 'SpanningTree':
        return SpanningTree(self)

    def problems(self) -> list[str]:
        """Violations of the core invariants; empty for a valid core."""
        return core_problems(self.adjacency(), self.base)

    def __eq__(self, other):
        if not isinstance(other, CoreGraph):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f'CoreGraph(alphabet={self.alphabet}, vertices={self.vertex_count}, edges={self.edge_count})'


@dataclass(frozen=True)
class SubgroupHandle:
    graph: CoreGraph
    name: Optional[str] = field(default=None, compare=False)

    @classmethod
    def trivial(cls, alphabet: Alphabet, name=None) -> 'SubgroupHandle':
        return cls(CoreGraph.trivial(alphabet), name)

    @classmethod
    def whole(cls, alphabet: Alphabet, name=None) -> 'SubgroupHandle':
        return from_generators(alphabet, alphabet.generators(), name)

    @property
    def alphabet(self) -> Alphabet:
        return self.graph.alphabet

    @property
    def is_trivial(self) -> bool:
        return self.graph.edge_count == 0

    def named(self, name: str) -> 'SubgroupHandle':
        return replace(self, name=name)

    def serialize(self) -> str:
        return serialize(self)

    def summary(self) -> str:
        return (f'vertices={self.graph.vertex_count} edges={self.graph.edge_count} '
                f'rank={rank(self)} index={index_in_free_group(self)}')


SubgroupLike = Union[SubgroupHandle, CoreGraph]


def _graph(H: SubgroupLike) -> CoreGraph:
    return H.graph if isinstance(H, SubgroupHandle) else H


def same_alphabet(*handles: SubgroupLike) -> Alphabet:
    alphabet = _graph(handles[0]).alphabet
    for H in handles[1:]:
        if _graph(H).alphabet != alphabet:
            raise PreconditionError(f'alphabets differ: {alphabet} vs {_graph(H).alphabet}')
    return alphabet


def from_generators(alphabet: Alphabet, generators: Iterable[ReducedWord],
                    name: Optional[str] = None) -> SubgroupHandle:
    """Core of the subgroup generated by `generators` (ε entries ignored)."""
    return SubgroupHandle(core_of(bouquet(alphabet, generators)), name)


def subgroup_from_adjacency(alphabet: Alphabet, adj: Adjacency, base: int = 0,
                            name: Optional[str] = None) -> SubgroupHandle:
    """Handle of a regular graph given as stars: base component, trimmed, canonical."""
    return SubgroupHandle(CoreGraph.from_adjacency(alphabet, adj, base), name)


# ============================================
# Single-subgroup queries
# ============================================

@dataclass(frozen=True)
class GraphPath:
    vertices: tuple[int, ...]
    label: ReducedWord

    def __len__(self):
        return len(self.label)

    @property
    def end(self) -> int:
        return self.vertices[-1]


@dataclass(frozen=True)
class DeficitReport:
    entries: tuple[tuple[int, frozenset[SignedLetter]], ...] = ()

    def __bool__(self):
        return bool(self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.entries)

    @property
    def total(self) -> int:
        return sum(len(missing) for _, missing in self.entries)

    def missing(self, v: int) -> frozenset[SignedLetter]:
        return dict(self.entries).get(v, frozenset())

    def format(self, alphabet: Alphabet) -> str:
        if not self.entries:
            return 'none'
        return '; '.join(
            f"{v}: {' '.join(alphabet.code_name(l.code) for l in sorted(missing, key=lambda l: l.code))}"
            for v, missing in self.entries)


@dataclass(frozen=True)
class Frame:
    letters: frozenset[int]
    vertices: frozenset[int]
    edges: tuple[Edge, ...]

    def __contains__(self, v):
        return v in self.vertices


def accepting_path(H: SubgroupLike, w: ReducedWord) -> Optional[tuple[int, ...]]:
    """The closed base path labeled w, or None when w is not in H."""
    g = _graph(H)
    path = g.read(w.codes)
    if len(path) == len(w) + 1 and path[-1] == g.base:
        return tuple(path)
    return None


def is_member(H: SubgroupLike, w: ReducedWord) -> bool:
    return accepting_path(H, w) is not None


def deficit_vertices(H: SubgroupLike, letters: Optional[Iterable] = None) -> DeficitReport:
    g = _graph(H)
    bases = range(g.alphabet.rank) if letters is None else sorted(g.alphabet.subset(letters))
    codes = [c for b in bases for c in (2 * b, 2 * b + 1)]
    entries = []
    for v in range(g.vertex_count):
        star = g.star(v)
        missing = frozenset(SignedLetter.from_code(c) for c in codes if c not in star)
        if missing:
            entries.append((v, missing))
    return DeficitReport(tuple(entries))


def index_in_free_group(H: SubgroupLike) -> IndexResult:
    g = _graph(H)
    full = 2 * g.alphabet.rank
    if any(g.degree(v) < full for v in range(g.vertex_count)):
        return INFINITE
    return FiniteIndex(g.vertex_count)


def handle(H: SubgroupLike) -> GraphPath:
    g = _graph(H)
    if g.degree(g.base) != 1:
        return GraphPath((g.base,), EMPTY)
    (code, v), = g.star(g.base).items()
    vertices, codes = [g.base, v], [code]
    while g.degree(v) == 2:
        back = codes[-1] ^ 1
        code, v = next((c, t) for c, t in g.star(v).items() if c != back)
        vertices.append(v)
        codes.append(code)
    return GraphPath(tuple(vertices), ReducedWord(tuple(codes)))


def remove_handle(H: SubgroupHandle) -> tuple[SubgroupHandle, ReducedWord]:
    """Core left after deleting the handle, based at its end, and the handle label p.

    The result is the core of p⁻¹·H·p.
    """
    p = handle(H)
    if not p.label:
        return H, EMPTY
    adj = H.graph.adjacency()
    for v in p.vertices[:-1]:
        for code, t in adj.pop(v).items():
            if t in adj:
                adj[t].pop(code ^ 1, None)
    return subgroup_from_adjacency(H.alphabet, adj, p.end), p.label


def frame(H: SubgroupLike, letters: Iterable) -> Frame:
    """Largest connected subgraph through the base with every label in `letters`."""
    g = _graph(H)
    allowed = g.alphabet.subset(letters)
    seen = {g.base}
    queue = [g.base]
    edges = set()
    for v in queue:
        for code, t in g.star(v).items():
            if code >> 1 not in allowed:
                continue
            edges.add(normalize_edge(v, code, t)[0])
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return Frame(allowed, frozenset(seen), tuple(sorted(edges)))


def frame_subgroup(H: SubgroupLike, letters: Iterable) -> SubgroupHandle:
    """Core of H ∩ F(letters): the trimmed frame."""
    g = _graph(H)
    fr = frame(g, letters)
    adj: Adjacency = {v: {} for v in fr.vertices}
    for u, code, v in fr.edges:
        adj[u][code] = v
        adj[v][code ^ 1] = u
    return subgroup_from_adjacency(g.alphabet, adj, g.base)


def rank(H: SubgroupLike) -> int:
    g = _graph(H)
    return g.edge_count - g.vertex_count + 1


def bridges(H: SubgroupLike) -> list[Edge]:
    """Edges whose removal (with their inverses) disconnects the core."""
    g = _graph(H)
    simple = nx.Graph()
    simple.add_nodes_from(range(g.vertex_count))
    multiplicity = Counter()
    for u, _, v in g.edges():
        if u != v:
            multiplicity[(min(u, v), max(u, v))] += 1
            simple.add_edge(u, v)
    cut = {(min(u, v), max(u, v)) for u, v in nx.bridges(simple)}
    return [(u, code, v) for u, code, v in g.edges()
            if u != v and (min(u, v), max(u, v)) in cut and multiplicity[(min(u, v), max(u, v))] == 1]


class SpanningTree:
    """A spanning tree of a core and the free basis of its subgroup it induces.

    Breadth-first from the base; edges in `preferred` are exhausted first, so a tree
    of a connected spanning subgraph extends to a tree of the whole graph and the
    subgraph's co-tree edges come first in the basis.
    """

    def __init__(self, graph: CoreGraph, preferred: Optional[Iterable[Edge]] = None):
        self.graph = graph
        preferred_set = set(preferred or ())
        prefix: dict[int, tuple[int, ...]] = {graph.base: ()}
        tree: set[Edge] = set()
        queue = [graph.base]
        for phase in ((preferred_set,) if preferred is not None else ()) + (None,):
            frontier = list(queue)
            for v in frontier:
                for code, t in graph.star(v).items():
                    if t in prefix:
                        continue
                    edge = normalize_edge(v, code, t)[0]
                    if phase is not None and edge not in phase:
                        continue
                    prefix[t] = prefix[v] + (code,)
                    tree.add(edge)
                    frontier.append(t)
            queue = frontier
        self.prefix = prefix
        self.tree = frozenset(tree)
        cotree = [e for e in graph.edges() if e not in tree]
        cotree.sort(key=lambda e: e not in preferred_set)
        self.cotree: tuple[Edge, ...] = tuple(cotree)
        self.preferred_count = sum(1 for e in cotree if e in preferred_set)
        self._index = {e: i for i, e in enumerate(cotree)}
        self.basis: tuple[ReducedWord, ...] = tuple(
            reduce(prefix[u] + (code,) + invert(ReducedWord(prefix[v])).codes) for u, code, v in cotree)

    def word_to(self, v: int) -> ReducedWord:
        return ReducedWord(self.prefix[v])

    def express(self, w: ReducedWord) -> Optional[ReducedWord]:
        """w as a word in the basis letters (code 2k is basis[k]), or None if w ∉ H."""
        g = self.graph
        v = g.base
        codes = []
        for code in w.codes:
            t = g.target(v, code)
            if t is None:
                return None
            edge, sign = normalize_edge(v, code, t)
            k = self._index.get(edge)
            if k is not None:
                codes.append(2 * k + (sign < 0))
            v = t
        if v != g.base:
            return None
        return reduce(codes)

    def expand(self, word: ReducedWord) -> ReducedWord:
        """Inverse of `express`: substitute basis words for basis letters."""
        out = []
        for code in word.codes:
            b = self.basis[code >> 1]
            out.extend(invert(b).codes if code & 1 else b.codes)
        return reduce(out)


def basis(H: SubgroupLike) -> list[ReducedWord]:
    return list(_graph(H).spanning_tree.basis)


def express(H: SubgroupLike, w: ReducedWord) -> Optional[ReducedWord]:
    """w in the letters b1..bk of `basis(H)`; None means w is not a member."""
    return _graph(H).spanning_tree.express(w)


def basis_alphabet(H: SubgroupLike, prefix: str = 'b') -> Alphabet:
    k = rank(H)
    if k == 0:
        raise PreconditionError('the trivial subgroup has an empty basis')
    return Alphabet.numbered(prefix, k)


def is_isomorphic(H1: SubgroupLike, H2: SubgroupLike) -> bool:
    """Base-pointed labeled isomorphism, i.e. equality of subgroups."""
    same_alphabet(H1, H2)
    return _graph(H1) == _graph(H2)


def morphism(B: SubgroupLike, A: SubgroupLike) -> Optional[dict[int, int]]:
    """The label-preserving map core(B) → core(A) fixing the base, or None when B is not in A."""
    same_alphabet(A, B)
    gb, ga = _graph(B), _graph(A)
    image = {gb.base: ga.base}
    queue = [gb.base]
    for u in queue:
        star = ga.star(image[u])
        for code, t in gb.star(u).items():
            s = star.get(code)
            if s is None:
                return None
            seen = image.get(t)
            if seen is None:
                image[t] = s
                queue.append(t)
            elif seen != s:
                return None
    return image


def is_subgroup(A: SubgroupLike, B: SubgroupLike) -> bool:
    """B ≤ A."""
    return morphism(B, A) is not None


# ============================================
# Serialization
# ============================================

_HEADER = re.compile(r'base=(\d+)\s+vertices=(\d+)\s+alphabet=(\S+)$')


def serialize(H: SubgroupLike) -> str:
    g = _graph(H).canonical()
    lines = [f'base={g.base} vertices={g.vertex_count} alphabet={g.alphabet}']
    lines.extend(f'{u} {g.alphabet.letters[code >> 1]} {v}' for u, code, v in g.edges())
    return '\n'.join(lines) + '\n'


def deserialize(text: str, name: Optional[str] = None) -> SubgroupHandle:
    rows = [(i, line.strip()) for i, line in enumerate(text.splitlines(), 1)
            if line.strip() and not line.strip().startswith('#')]
    if not rows:
        raise GraphFormatError('empty core description', line=1)
    first_line, header = rows[0]
    m = _HEADER.match(header)
    if not m:
        raise GraphFormatError('expected header "base=B vertices=N alphabet=x,y"', line=first_line)
    base, n = int(m.group(1)), int(m.group(2))
    alphabet = Alphabet.parse(m.group(3), line=first_line)
    if n < 1 or base >= n:
        raise GraphFormatError('base must be one of the vertices', line=first_line)
    adj: Adjacency = {v: {} for v in range(n)}
    for line_no, row in rows[1:]:
        parts = row.split()
        if len(parts) != 3 or not parts[0].isdigit() or not parts[2].isdigit():
            raise GraphFormatError('expected "from letter to"', line=line_no)
        u, v = int(parts[0]), int(parts[2])
        if u >= n or v >= n:
            raise GraphFormatError(f'vertex out of range 0..{n - 1}', line=line_no)
        if parts[1] not in alphabet.letters:
            raise GraphFormatError(f'unknown letter {parts[1]!r}', line=line_no)
        code = 2 * alphabet.letters.index(parts[1])
        if code in adj[u] or code ^ 1 in adj[v]:
            raise GraphFormatError('two edges with the same label at one vertex', line=line_no)
        adj[u][code] = v
        adj[v][code ^ 1] = u
    issues = core_problems(adj, base)
    if issues:
        raise GraphFormatError('not a core: ' + '; '.join(issues))
    return SubgroupHandle(CoreGraph.from_adjacency(alphabet, adj, base, trim=False), name)


def to_dot(H: SubgroupLike, title: str = 'core') -> str:
    g = _graph(H).canonical()
    lines = [f'digraph "{title}" {{', '  node [shape=circle];', f'  {g.base} [shape=doublecircle];']
    lines.extend(f'  {v};' for v in range(g.vertex_count) if v != g.base)
    lines.extend(f'  {u} -> {v} [label="{g.alphabet.letters[code >> 1]}"];' for u, code, v in g.edges())
    lines.append('}')
    return '\n'.join(lines) + '\n'
