import math
import random

import pytest

from conftest import (
    SAMPLE_GENERATORS, random_finite_index, random_infinite_index, random_subgroup, random_word,
)
from freesub.errors import PreconditionError
from freesub.models import INFINITE, NOT_SUBGROUP, FiniteIndex, StageLog
from freesub.constructions import (
    Rebasing, block_words, check_smallcancel, conjugate_subgroup, free_factor_embedding,
    hall_completion, intersect, intersect_all, is_normal_in, join, normal_core_in,
    normalized_extension, normalizes, relative_index, saturate_frame, saturated_pair, separating_cover,
    shrink_family, shrink_to_infinite_join, small_cancellation_witness, transversal, verify_log,
)
from freesub.stallings import (
    SubgroupHandle, basis, deficit_vertices, frame, from_generators, index_in_free_group, is_member,
    is_subgroup, rank,
)
from freesub.words import EMPTY, Alphabet, ReducedWord, concat, conjugate, invert, parse_word


def assert_certified(log):
    assert log.ok, [c.describe() for _, c in log.failures()]
    assert verify_log(log) == []


def steps(log):
    return [entry.step for entry in log]

# ============================================
# Intersections and joins
# ============================================

def test_intersect_examples(sub):
    assert intersect(sub('x'), sub('xx', 'y')) == sub('xx')
    assert intersect(sub('x'), sub('y')).is_trivial
    assert intersect(sub('x', 'y'), sub('yxY')) == sub('yxY')


def test_intersection_is_commutative_and_sound(F2):
    rng = random.Random(23)
    for _ in range(40):
        A, B = random_subgroup(rng, F2), random_subgroup(rng, F2)
        meet = intersect(A, B)
        assert meet == intersect(B, A)
        assert is_subgroup(A, meet) and is_subgroup(B, meet)
        for _ in range(10):
            w = random_word(rng, F2, 8)
            assert is_member(meet, w) == (is_member(A, w) and is_member(B, w))


def test_intersection_rank_bound(F2):
    rng = random.Random(29)
    for _ in range(200):
        A, B = random_subgroup(rng, F2), random_subgroup(rng, F2)
        reduced = [max(rank(H) - 1, 0) for H in (intersect(A, B), A, B)]
        assert reduced[0] <= reduced[1] * reduced[2]


def test_intersect_all(sub):
    meet = intersect_all([sub('x', 'y'), sub('xx', 'y'), sub('xxx', 'y')])
    assert meet == sub('x' * 6, 'y')


def test_join_examples(sub, F2):
    assert join(sub('xx'), sub('xxx')) == sub('x')
    assert join(sub('x'), sub('y')) == SubgroupHandle.whole(F2)
    assert join(sub('x'), sub()) == sub('x')
    assert join(sub('xy'), sub('xY'), sub('x')) == SubgroupHandle.whole(F2)


def test_join_contains_inputs(F2):
    rng = random.Random(31)
    for _ in range(30):
        A, B = random_subgroup(rng, F2), random_subgroup(rng, F2)
        J = join(A, B)
        assert is_subgroup(J, A) and is_subgroup(J, B)


def test_conjugate_subgroup(sub, word):
    assert conjugate_subgroup(sub('x'), word('y')) == sub('yxY')
    H = sub(*SAMPLE_GENERATORS)
    g = word('xyY' + 'yx')
    assert conjugate_subgroup(conjugate_subgroup(H, g), invert(g)) == H
    assert conjugate_subgroup(sub(), word('y')).is_trivial


def test_conjugate_subgroup_matches_conjugated_basis(F2):
    rng = random.Random(33)
    for _ in range(100):
        H = random_subgroup(rng, F2)
        g = random_word(rng, F2, 6, min_length=0)
        expected = from_generators(F2, [conjugate(g, b) for b in basis(H)])
        assert conjugate_subgroup(H, g) == expected


def test_conjugating_by_a_member_fixes_the_subgroup(sample):
    for b in basis(sample):
        assert conjugate_subgroup(sample, b) == sample

# ============================================
# Relative indices and transversals
# ============================================

@pytest.mark.parametrize('a,b,expected', [
    (('x', 'y'), ('x', 'yxY', 'yy'), FiniteIndex(2)),
    (('x',), ('xxx',), FiniteIndex(3)),
    (('x',), ('x',), FiniteIndex(1)),
    (('x', 'y'), ('x',), INFINITE),
    (('x',), ('y',), NOT_SUBGROUP),
    ((), (), FiniteIndex(1)),
])
def test_relative_index(sub, a, b, expected):
    assert relative_index(sub(*a), sub(*b)) == expected


def test_relative_index_multiplies(sub):
    A, B, C = sub('x', 'y'), sub('xx', 'y', 'xyX'), sub('xxxx', 'y', 'xyX', 'xxyXX', 'xxxyXXX')
    assert relative_index(A, C).value == relative_index(A, B).value * relative_index(B, C).value


def test_relative_index_matches_the_rebased_core(F2):
    rng = random.Random(35)
    for _ in range(100):
        A = random_subgroup(rng, F2)
        if A.is_trivial:
            continue
        other = random_finite_index(rng, F2, 4) if rng.random() < 0.5 else random_subgroup(rng, F2)
        B = intersect(A, other)
        assert relative_index(A, B) == index_in_free_group(Rebasing(A).rebase(B))
        if not is_subgroup(B, A):
            assert relative_index(B, A) is NOT_SUBGROUP


def test_relative_index_behind_a_handle(sub):
    A = sub('yxY', 'yyxYY')
    assert relative_index(A, sub('yxxY', 'yyxYY', 'yxyxYXY')) == FiniteIndex(2)
    assert relative_index(A, sub('yyxYY')) == INFINITE
    assert relative_index(A, sub()) == INFINITE
    assert relative_index(sub(), sub('x')) is NOT_SUBGROUP


def test_transversal_of_cyclic_subgroups(sub, word):
    assert transversal(sub('x'), sub('xxx')) == [EMPTY, word('X'), word('x')]
    assert transversal(sub('x'), sub('xxx'), side='right') == [EMPTY, word('x'), word('X')]
    assert transversal(sub('x'), sub('x')) == [EMPTY]


def test_transversal_represents_distinct_cosets(sub):
    A, B = sub('x', 'y'), sub('x', 'yxY', 'yy')
    reps = transversal(A, B)
    assert len(reps) == 2
    assert reps[0] == EMPTY
    for i, a in enumerate(reps):
        for b in reps[i + 1:]:
            assert not is_member(B, concat(invert(a), b))


def test_transversal_preconditions(sub):
    with pytest.raises(PreconditionError):
        transversal(sub('x', 'y'), sub('x'))
    with pytest.raises(PreconditionError):
        transversal(sub('x'), sub('y'))
    with pytest.raises(PreconditionError):
        transversal(sub('x'), sub('x'), side='middle')


def test_rebasing_round_trip(sample):
    rebasing = Rebasing(sample)
    assert rebasing.alphabet.letters == ('e1', 'e2', 'e3')
    for b in basis(sample):
        assert rebasing.expand(rebasing.express(b)) == b
    assert rebasing.unbase(rebasing.rebase(sample)) == sample
    wrapped = rebasing.wrap(sample)
    assert wrapped.ambient == sample
    assert wrapped.subgroup == sample
    assert wrapped.inner.alphabet == rebasing.alphabet
    with pytest.raises(PreconditionError):
        rebasing.rebase(from_generators(sample.alphabet, [parse_word('y', sample.alphabet)]))
    with pytest.raises(PreconditionError):
        Rebasing(SubgroupHandle.trivial(sample.alphabet))


def test_normal_cores(sub):
    assert normal_core_in(sub('xxx'), sub('x')) == sub('xxx')
    Q = sub('x', 'yxY', 'yy')
    assert is_normal_in(Q, sub('x', 'y'))
    assert normal_core_in(Q, sub('x', 'y')) == Q
    N = normal_core_in(sub('xx', 'y', 'xyX'), sub('x', 'y'))
    assert is_normal_in(N, sub('x', 'y'))
    assert not is_normal_in(sub('x'), sub('x', 'y'))
    with pytest.raises(PreconditionError):
        normal_core_in(sub('x'), sub('x', 'y'))


def test_normal_core_of_small_index_subgroups(F2):
    rng = random.Random(39)
    checked = 0
    while checked < 30:
        B1 = random_subgroup(rng, F2)
        if B1.is_trivial:
            continue
        rebasing = Rebasing(B1)
        Q = rebasing.unbase(random_finite_index(rng, rebasing.alphabet, 4))
        d = relative_index(B1, Q).value
        N = normal_core_in(Q, B1)
        assert is_normal_in(N, B1)
        assert is_subgroup(Q, N)
        assert math.factorial(d) % relative_index(B1, N).value == 0
        assert N == intersect_all([conjugate_subgroup(Q, t) for t in transversal(B1, Q)])
        checked += 1

# ============================================
# Hall completion and free factors
# ============================================

def test_hall_completion_examples(sub, word):
    M = hall_completion(sub('x'), [word('y')])
    assert M == sub('x', 'yxY', 'yy')
    assert hall_completion(sub('x', 'y')) == sub('x', 'y')
    assert index_in_free_group(hall_completion(sub('x'))) == FiniteIndex(1)


def test_hall_completion_rejects_members(sub, word):
    with pytest.raises(PreconditionError, match='xx'):
        hall_completion(sub('x'), [word('xx')])


def test_hall_completion_random(F2, sample):
    rng = random.Random(37)
    subjects = [sample] + [random_infinite_index(rng, F2) for _ in range(99)]
    for A in subjects:
        exclude = []
        size = rng.randint(1, 3)
        while len(exclude) < size:
            s = random_word(rng, F2, 6)
            if not is_member(A, s):
                exclude.append(s)
        M = hall_completion(A, exclude)
        assert index_in_free_group(M).finite
        assert is_subgroup(M, A)
        assert not any(is_member(M, s) for s in exclude)


def test_free_factor_embedding_of_cyclic(sub, word):
    emb = free_factor_embedding(sub('x'))
    assert emb.ambient == SubgroupHandle.whole(emb.ambient.alphabet)
    assert emb.factor == [word('x')]


def test_free_factor_embedding_of_sample(sample):
    emb = free_factor_embedding(sample)
    index = index_in_free_group(emb.ambient)
    assert index == FiniteIndex(6)
    assert rank(emb.ambient) == 1 + index.value * (2 - 1)
    assert len(emb.factor_letters) == 3
    assert all(is_member(sample, b) for b in emb.factor)
    assert emb.rebasing.unbase(emb.inner_factor) == sample


def test_free_factor_embedding_random(F2):
    rng = random.Random(41)
    for _ in range(25):
        A = random_infinite_index(rng, F2, max_generators=3, max_length=5)
        emb = free_factor_embedding(A)
        assert index_in_free_group(emb.ambient).finite
        assert len(emb.factor_letters) == rank(A)
        assert emb.rebasing.unbase(emb.inner_factor) == A

# ============================================
# Separating covers and saturation
# ============================================

def test_separating_cover_takes_a_bridge(sub):
    H = sub('xyX')
    cover = separating_cover(H, ['y'])
    assert cover.branch == 'bridge'
    assert cover.subgroup == H
    assert cover.witness == 1


def test_separating_cover_builds_a_cover(sub):
    H = sub('x', 'yxY')
    log = StageLog()
    cover = separating_cover(H, ['y'], log=log)
    assert cover.branch == 'cover'
    assert relative_index(H, cover.subgroup) == FiniteIndex(2)
    assert cover.witness == 1
    assert steps(log) == ['separating-cover']
    assert_certified(log)


def test_separating_cover_with_three_sheets(sub):
    H = sub('x', 'yxY')
    cover = separating_cover(H, ['y'], j=3)
    assert relative_index(H, cover.subgroup) == FiniteIndex(3)
    assert cover.witness is not None
    with pytest.raises(PreconditionError):
        separating_cover(H, ['y'], j=1)


def test_separating_cover_needs_an_outside_letter(sub):
    with pytest.raises(PreconditionError):
        separating_cover(sub('y'), ['y'])
    with pytest.raises(PreconditionError):
        separating_cover(sub('x', 'y'), ['y'])


def test_separating_cover_random(F2):
    rng = random.Random(43)
    checked = 0
    while checked < 50:
        H = random_infinite_index(rng, F2, max_generators=3, max_length=5)
        if all(code >> 1 == 1 for _, code, _ in H.graph.edges()):
            continue
        j = rng.choice([2, 3])
        log = StageLog()
        cover = separating_cover(H, ['y'], j=j, log=log)
        expected = FiniteIndex(1) if cover.branch == 'bridge' else FiniteIndex(j)
        assert relative_index(H, cover.subgroup) == expected
        assert cover.witness is not None
        assert cover.witness not in frame(cover.subgroup, ['y'])
        assert cover.witness in deficit_vertices(cover.subgroup).vertices
        assert_certified(log)
        checked += 1


def test_saturate_frame_closes_frame_letters():
    adj = {0: {0: 1}, 1: {1: 0, 2: 1, 3: 1}}
    added = saturate_frame(adj, 0, frozenset({0}))
    assert added == 1
    assert adj[1][0] == 0 and adj[0][1] == 1


def test_saturated_pair_of_generators(sub):
    pair = saturated_pair(sub('x'), sub('y'))
    assert not pair.shortcut
    assert pair.A1 == sub('x')
    assert pair.B0 == sub('yy')
    assert pair.B1 == sub('x', 'yy')
    assert steps(pair.log) == ['free-factor-embedding', 'intersect-with-embedding',
                               'separating-cover', 'frame-saturation', 'saturated-pair']
    assert_certified(pair.log)


def test_saturated_pair_shortcut(sub):
    A = sub('x', 'yxY')
    pair = saturated_pair(A, sub('xx'))
    assert pair.shortcut
    assert pair.A1 == A and pair.B1 == A
    assert pair.B0 == sub('xx')
    assert 'frame-shortcut' in steps(pair.log)
    assert_certified(pair.log)


def test_saturated_pair_sample(sample, sub):
    pair = saturated_pair(sample, sub('y'))
    assert_certified(pair.log)
    assert relative_index(sample, pair.A1).finite
    assert not index_in_free_group(pair.B1).finite


def test_saturated_pair_random(F2):
    rng = random.Random(47)
    for _ in range(30):
        A, B = random_infinite_index(rng, F2), random_infinite_index(rng, F2)
        pair = saturated_pair(A, B)
        assert relative_index(A, pair.A1).finite
        assert relative_index(B, pair.B0).finite
        assert is_subgroup(pair.B1, pair.A1) and is_subgroup(pair.B1, pair.B0)
        assert not index_in_free_group(pair.B1).finite
        assert_certified(pair.log)


def test_saturated_pair_preconditions(sub):
    with pytest.raises(PreconditionError):
        saturated_pair(sub('x', 'y'), sub('y'))
    with pytest.raises(PreconditionError):
        saturated_pair(sub('x'), sub('x', 'yxY', 'yy'))

# ============================================
# Families and normalized extensions
# ============================================

def test_shrink_family_single(sub):
    family = shrink_family([sub('x')])
    assert family.members == [sub('x')]
    assert family.join == sub('x')
    assert_certified(family.log)


def test_shrink_family_of_generators(sub):
    family = shrink_family([sub('x'), sub('y')])
    assert not index_in_free_group(family.join).finite
    assert family.join == sub('x', 'yy')
    assert_certified(family.log)


def test_shrink_family_of_three(sub):
    family = shrink_family([sub('x'), sub('y'), sub('xy')])
    assert len(family.members) == 3
    assert not index_in_free_group(family.join).finite
    assert_certified(family.log)


def test_shrink_family_skips_trivial_join(sub):
    family = shrink_family([sub(), sub('x')])
    assert family.join == sub('x')
    assert_certified(family.log)


def test_shrink_family_preconditions(sub):
    with pytest.raises(PreconditionError):
        shrink_family([])
    with pytest.raises(PreconditionError):
        shrink_family([sub('x'), sub('x', 'y')])


def test_normalized_extension_of_generators(sub):
    ext = normalized_extension(sub('x'), sub('y'))
    assert ext.B2 == sub('x', 'yy')
    assert ext.H == sub('yy')
    assert ext.transversal == [EMPTY]
    assert 'normal-core' in steps(ext.log)
    assert_certified(ext.log)


def test_normalized_extension_same_subgroup(sub):
    ext = normalized_extension(sub('x'), sub('x'))
    assert ext.B2 == sub('x')
    assert ext.H == sub('x')
    assert_certified(ext.log)


def test_normalized_extension_trivial_a(sub):
    ext = normalized_extension(sub(), sub('y'))
    assert ext.B2 == sub('y') and ext.H == sub('y')
    assert_certified(ext.log)
    with pytest.raises(PreconditionError):
        normalized_extension(sub('x'), sub())


def test_normalized_extension_sample(sample, sub):
    ext = normalized_extension(sample, sub('y'))
    assert len(ext.transversal) == relative_index(sample, ext.pair.A1).value
    assert_certified(ext.log)


def test_normalized_extension_skips_work_for_an_infinite_join(sub):
    ext = normalized_extension(sub('x', 'yxY'), sub('xx'))
    assert ext.pair is None
    assert ext.B2 == sub('x', 'yxY') and ext.H == sub('xx')
    assert steps(ext.log) == ['normalized-extension']
    assert_certified(ext.log)


@pytest.mark.slow
def test_normalized_extension_random(F2):
    rng = random.Random(51)
    for _ in range(20):
        A, B = random_infinite_index(rng, F2), random_infinite_index(rng, F2)
        ext = normalized_extension(A, B)
        assert not index_in_free_group(ext.B2).finite
        assert relative_index(B, ext.H).finite
        assert is_subgroup(ext.B2, ext.H)
        assert normalizes(basis(A), ext.B2)
        assert_certified(ext.log)

# ============================================
# Shrink pipeline
# ============================================

def test_shrink_generators(sub):
    result = shrink_to_infinite_join(sub('x'), sub('y'))
    assert result.H == sub('yy')
    assert result.join == sub('x', 'yy')
    assert result.completion is None
    assert_certified(result.log)


def test_shrink_excludes_words(sub, word):
    result = shrink_to_infinite_join(sub('x'), sub('y'), [word('y')])
    assert result.completion == sub('x', 'yxY', 'yy')
    assert not is_member(result.join, word('y'))
    assert relative_index(sub('y'), result.H).finite
    assert steps(result.log)[-2:] == ['hall-completion', 'shrink']
    assert_certified(result.log)


def test_shrink_with_b_inside_a(sub):
    A, B = sub('x', 'yxY'), sub('xx')
    result = shrink_to_infinite_join(A, B)
    assert result.H == B
    assert result.join == A
    assert_certified(result.log)


def test_shrink_trivial_b(sub, word):
    result = shrink_to_infinite_join(sub('x'), sub(), [word('y')])
    assert result.H.is_trivial
    assert result.join == sub('x')
    assert_certified(result.log)


def test_shrink_preconditions(sub, word):
    with pytest.raises(PreconditionError):
        shrink_to_infinite_join(sub('x'), sub('y'), [word('xx')])
    with pytest.raises(PreconditionError):
        shrink_to_infinite_join(sub('x', 'y'), sub('y'))
    with pytest.raises(PreconditionError):
        shrink_to_infinite_join(sub('x'), sub('x', 'yxY', 'yy'))


def test_shrink_sample_against_y(sample, sub, word):
    result = shrink_to_infinite_join(sample, sub('y'), [word('y')])
    assert not index_in_free_group(result.join).finite
    assert_certified(result.log)


@pytest.mark.slow
def test_shrink_random(F2):
    rng = random.Random(53)
    for _ in range(20):
        A, B = random_infinite_index(rng, F2), random_infinite_index(rng, F2)
        exclude = [s for s in (random_word(rng, F2, 4) for _ in range(3)) if not is_member(A, s)]
        result = shrink_to_infinite_join(A, B, exclude)
        assert relative_index(B, result.H).finite
        assert not index_in_free_group(result.join).finite
        assert not any(is_member(result.join, s) for s in exclude)
        assert_certified(result.log)

# ============================================
# Small cancellation
# ============================================

def test_block_words():
    first, second = block_words(2, 2)
    assert first.codes == (0, 2, 0, 2, 2)
    assert second.codes == (0, 2, 2, 2, 0, 2, 2, 2, 2)


def test_check_smallcancel():
    u = block_words(2, 3)
    assert not check_smallcancel(u, 1)
    assert not check_smallcancel([u[0], u[0]], 0)
    assert check_smallcancel(block_words(4, 50), 1)
    with pytest.raises(PreconditionError):
        check_smallcancel([ReducedWord((1,))], 0)


def test_check_smallcancel_on_a_large_alphabet():
    alphabet = Alphabet.numbered('a', 200)
    shifted = [ReducedWord(tuple(300 if c == 0 else 398 for c in u.codes)) for u in block_words(4, 50)]
    assert max(shifted[0].codes) >= 256
    assert alphabet.rank == 200
    assert check_smallcancel(shifted, 1)
    repeated = check_smallcancel([shifted[0], shifted[0]], 1)
    assert not repeated
    assert 'occurs in u2' in repeated.witness


@pytest.mark.parametrize('text', ['x', 'xyXY'])
def test_small_cancellation_witness(F2, text):
    w = parse_word(text, F2)
    result = small_cancellation_witness(F2, w)
    H = result.subgroup
    assert rank(H) == 2
    assert not index_in_free_group(H).finite
    assert not is_member(H, parse_word('x', F2))
    assert not is_member(H, parse_word('y', F2))
    assert len(result.u_words) == 4
    assert_certified(result.log)


def test_small_cancellation_preconditions(F2, word):
    with pytest.raises(PreconditionError):
        small_cancellation_witness(F2, EMPTY)
    with pytest.raises(PreconditionError):
        small_cancellation_witness(Alphabet(('x',)), word('x'))

# ============================================
# Audit trail
# ============================================

def test_verify_log_detects_tampering(sub):
    result = shrink_to_infinite_join(sub('x'), sub('y'))
    entry, cert = next(iter(result.log.certificates()))
    cert.observed = 'tampered'
    problems = verify_log(result.log)
    assert len(problems) == 1
    assert entry.step in problems[0]


def test_report_lists_every_step(sub):
    result = shrink_to_infinite_join(sub('x'), sub('y'))
    report = result.log.report()
    assert report.startswith('# stage log')
    for name in steps(result.log):
        assert f': {name} ==' in report
    assert '[FAILED]' not in report
