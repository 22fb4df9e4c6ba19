"""Command line interface: `python -m freesub COMMAND ...`.

Exit codes: 0 success (and "member" for members), 1 non-member or failed
certificate, 2 precondition violation, 3 resource cap, 4 malformed input.
"""
from __future__ import annotations

from pathlib import Path

import click

from freesub import configure_logging
from freesub.actions import (
    ball_to_dot, coset_ball, cosets_distinct, normal_orbit_trend, orbit_size, orbits_on_ball,
)
from freesub.config import Config
from freesub.constructions import (
    conjugate_subgroup, hall_completion, intersect, join, normalized_extension, saturated_pair,
    separating_cover, shrink_family, shrink_to_infinite_join, small_cancellation_witness,
    verify_log,
)
from freesub.enumeration import build_r_prefix, r_property_is_evidence, verify_r_property
from freesub.errors import FreesubError
from freesub.files import load_prefix, load_subgroup, read_words, save_prefix, write_subgroup
from freesub.models import StageLog
from freesub.stallings import (
    accepting_path, basis, deficit_vertices, handle, index_in_free_group, rank, serialize, to_dot,
)
from freesub.words import Alphabet, format_word, parse_word


class FreesubGroup(click.Group):
    """Maps library exceptions to exit codes in one place."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except FreesubError as e:
            click.echo(f'error: {e}', err=True)
            ctx.exit(e.exit_code)


def _word(w, alphabet):
    return format_word(w, alphabet, empty='1')


def _emit(H, dot=None, output=None, title='core'):
    click.echo(serialize(H), nl=False)
    click.echo(f'# {H.summary()}')
    if dot:
        Path(dot).write_text(to_dot(H, title))
    if output:
        write_subgroup(output, H)


def _finish(log: StageLog, audit=None):
    if audit:
        Path(audit).write_text(log.report())
    problems = verify_log(log)
    click.echo(f'# certificates: {sum(1 for _ in log.certificates())} checked, {len(problems)} failed')
    for problem in problems:
        click.echo(f'# {problem}', err=True)
    if problems:
        raise click.exceptions.Exit(1)


dot_option = click.option('--dot', type=click.Path(dir_okay=False), help='Write the core as DOT.')
output_option = click.option('-o', '--output', type=click.Path(dir_okay=False),
                             help='Write the serialized core.')
audit_option = click.option('--audit', type=click.Path(dir_okay=False), help='Write the stage log report.')
exclude_option = click.option('--exclude', multiple=True,
                              help='Words to keep out (comma separated, repeatable).')


@click.group(cls=FreesubGroup)
@click.option('--log-level', default=None, help='Overrides FREESUB_LOG_LEVEL.')
def cli(log_level):
    """Subgroups of free groups through their core graphs."""
    configure_logging(log_level or Config.LOG_LEVEL)


# ============================================
# Single subgroups
# ============================================

@cli.command()
@click.argument('genfile', type=click.Path(exists=True, dir_okay=False))
@dot_option
@output_option
def core(genfile, dot, output):
    """Canonical core with rank, index, handle and deficit report."""
    H = load_subgroup(genfile)
    _emit(H, dot, output, H.name or 'core')
    p = handle(H)
    click.echo(f'# rank: {rank(H)}')
    click.echo(f'# index: {index_in_free_group(H)}')
    click.echo(f'# handle: length {len(p)} {_word(p.label, H.alphabet)}')
    click.echo(f'# deficit: {deficit_vertices(H).format(H.alphabet)}')


@cli.command()
@click.argument('genfile', type=click.Path(exists=True, dir_okay=False))
@click.argument('word')
def member(genfile, word):
    """Exit 0 with the accepting path when WORD lies in the subgroup, else exit 1."""
    H = load_subgroup(genfile)
    w = parse_word(word, H.alphabet)
    path = accepting_path(H, w)
    if path is None:
        click.echo('not a member')
        raise click.exceptions.Exit(1)
    click.echo('member: path ' + ' '.join(map(str, path)))


@cli.command()
@click.argument('genfile', type=click.Path(exists=True, dir_okay=False))
def index(genfile):
    """Index in the free group."""
    click.echo(str(index_in_free_group(load_subgroup(genfile))))


@cli.command('rank')
@click.argument('genfile', type=click.Path(exists=True, dir_okay=False))
def rank_command(genfile):
    click.echo(str(rank(load_subgroup(genfile))))


@cli.command('basis')
@click.argument('genfile', type=click.Path(exists=True, dir_okay=False))
def basis_command(genfile):
    """Free basis read off the canonical spanning tree."""
    H = load_subgroup(genfile)
    for w in basis(H):
        click.echo(_word(w, H.alphabet))


# ============================================
# Two subgroups
# ============================================

@cli.command('intersect')
@click.argument('a', type=click.Path(exists=True, dir_okay=False))
@click.argument('b', type=click.Path(exists=True, dir_okay=False))
@dot_option
@output_option
def intersect_command(a, b, dot, output):
    _emit(intersect(load_subgroup(a), load_subgroup(b)), dot, output)


@cli.command('join')
@click.argument('a', type=click.Path(exists=True, dir_okay=False))
@click.argument('b', type=click.Path(exists=True, dir_okay=False))
@dot_option
@output_option
def join_command(a, b, dot, output):
    _emit(join(load_subgroup(a), load_subgroup(b)), dot, output)


@cli.command('conjugate')
@click.argument('a', type=click.Path(exists=True, dir_okay=False))
@click.option('-g', 'word', required=True, help='Conjugating word g (result is g·A·g⁻¹).')
@dot_option
@output_option
def conjugate_command(a, word, dot, output):
    A = load_subgroup(a)
    _emit(conjugate_subgroup(A, parse_word(word, A.alphabet)), dot, output)


@cli.command()
@click.argument('a', type=click.Path(exists=True, dir_okay=False))
@exclude_option
@dot_option
@output_option
def hall(a, exclude, dot, output):
    """Finite-index subgroup containing A and none of the excluded words."""
    A = load_subgroup(a)
    _emit(hall_completion(A, read_words(exclude, A.alphabet)), dot, output)


@cli.command()
@click.argument('h', type=click.Path(exists=True, dir_okay=False))
@click.option('--frame', 'letters', required=True, help='Frame letters, comma separated.')
@click.option('--index', 'sheets', type=int, default=None, help='Sheets of the cyclic cover.')
@dot_option
@output_option
@audit_option
def cover(h, letters, sheets, dot, output, audit):
    """Subgroup of H with a deficit vertex outside its frame."""
    H = load_subgroup(h)
    log = StageLog(max_vertices=Config.MAX_CORE_VERTICES)
    result = separating_cover(H, Alphabet.parse(letters).letters, sheets, log=log)
    _emit(result.subgroup, dot, output)
    click.echo(f'# branch: {result.branch}, sheets: {result.sheets}, witness vertex: {result.witness}')
    _finish(log, audit)


@cli.command()
@click.argument('a', type=click.Path(exists=True, dir_okay=False))
@click.argument('b', type=click.Path(exists=True, dir_okay=False))
@audit_option
def pair(a, b, audit):
    """A1, B0, B1 with [A:A1], [B:B0] finite and A1, B0 inside B1 of infinite index."""
    result = saturated_pair(load_subgroup(a), load_subgroup(b))
    for label, H in (('A1', result.A1), ('B0', result.B0), ('B1', result.B1)):
        click.echo(f'# {label}')
        _emit(H)
    _finish(result.log, audit)


@cli.command()
@click.argument('files', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@audit_option
def family(files, audit):
    """Finite-index subgroups of each input with a join of infinite index."""
    result = shrink_family([load_subgroup(f) for f in files])
    for i, H in enumerate(result.members, 1):
        click.echo(f'# H{i} shrunk')
        _emit(H)
    click.echo('# join')
    _emit(result.join)
    _finish(result.log, audit)


@cli.command()
@click.argument('a', type=click.Path(exists=True, dir_okay=False))
@click.argument('b', type=click.Path(exists=True, dir_okay=False))
@audit_option
def normalized(a, b, audit):
    """B2 of infinite index normalized by A, containing a finite-index subgroup of B."""
    result = normalized_extension(load_subgroup(a), load_subgroup(b))
    click.echo('# B2')
    _emit(result.B2)
    click.echo('# H')
    _emit(result.H)
    _finish(result.log, audit)


@cli.command()
@click.argument('a', type=click.Path(exists=True, dir_okay=False))
@click.argument('b', type=click.Path(exists=True, dir_okay=False))
@exclude_option
@dot_option
@output_option
@audit_option
def shrink(a, b, exclude, dot, output, audit):
    """H of finite index in B such that ⟨A, H⟩ has infinite index and avoids the excluded words."""
    A, B = load_subgroup(a), load_subgroup(b)
    result = shrink_to_infinite_join(A, B, read_words(exclude, A.alphabet))
    _emit(result.H, dot, output, 'H')
    click.echo(f'# join: {result.join.summary()}')
    _finish(result.log, audit)


@cli.command()
@click.option('--rank', 'rank_', type=int, default=2, show_default=True)
@click.option('--word', required=True, help='Nontrivial word w.')
@click.option('--alphabet', default=None, help='Generator names; defaults to x,y,... of the rank.')
@output_option
@audit_option
def smallcancel(rank_, word, alphabet, output, audit):
    """Infinite-index H of the given rank with F = H·N, N the normal closure of w."""
    alphabet = Alphabet.parse(alphabet) if alphabet else Alphabet.standard(rank_)
    result = small_cancellation_witness(alphabet, parse_word(word, alphabet))
    click.echo(f'# blocks per u-word: {result.blocks}')
    click.echo('# u-word lengths: ' + ' '.join(str(len(u)) for u in result.u_words))
    _emit(result.subgroup, output=output)
    _finish(result.log, audit)


# ============================================
# Prefixes and actions
# ============================================

@cli.command('build-r')
@click.option('--stages', type=int, required=True)
@click.option('--budget', type=int, default=None, help='Total generator length of the enumeration.')
@click.option('--alphabet', default='x,y', show_default=True)
@click.option('--max-vertices', type=int, default=None)
@click.option('--interleave-merges', is_flag=True, help='Log placeholder merge stages.')
@click.option('--out', 'directory', type=click.Path(file_okay=False), default=None)
def build_r(stages, budget, alphabet, max_vertices, interleave_merges, directory):
    """Stages R_1 ≤ ... ≤ R_N of infinite index absorbing the enumerated subgroups."""
    prefix = build_r_prefix(Alphabet.parse(alphabet), stages, budget, max_vertices,
                            interleave_merges=interleave_merges)
    for i, (L, R) in enumerate(zip(prefix.processed, prefix.stages), 1):
        gens = ', '.join(_word(w, prefix.alphabet) for w in basis(L))
        click.echo(f'stage {i}: L = <{gens}>  R: {R.summary()}')
    if prefix.truncated:
        click.echo(f'truncated: {prefix.truncated}')
    if directory:
        save_prefix(prefix, directory)
    _finish(prefix.log)


@cli.command('verify-r')
@click.argument('directory', type=click.Path(exists=True, file_okay=False))
@click.argument('l', type=click.Path(exists=True, dir_okay=False))
def verify_r(directory, l):
    """[L : L ∩ R_N] for the last saved stage."""
    prefix = load_prefix(directory)
    L = load_subgroup(l)
    result = verify_r_property(prefix, L)
    note = ' (evidence only: L has finite index)' if r_property_is_evidence(L) else ''
    click.echo(f'{result}{note}')


@cli.command()
@click.argument('r', type=click.Path(exists=True, dir_okay=False))
@click.argument('l', type=click.Path(exists=True, dir_okay=False))
@click.option('-g', 'word', default='', help='Coset representative g.')
@click.option('--radius', type=int, default=None, help='Also partition a ball of this radius.')
def orbit(r, l, word, radius):
    """Size of the orbit of Rg under L."""
    R, L = load_subgroup(r), load_subgroup(l)
    click.echo(str(orbit_size(R, L, parse_word(word, R.alphabet))))
    if radius is not None:
        for cell in orbits_on_ball(R, L, radius):
            reps = ' '.join(_word(w, R.alphabet) for w in cell.representatives)
            click.echo(f"{'open' if cell.open else 'closed'} {len(cell)}: {reps}")


@cli.command()
@click.argument('r', type=click.Path(exists=True, dir_okay=False))
@click.option('--radius', type=int, default=None)
@dot_option
def ball(r, radius, dot):
    """Coset representatives within the given distance of R."""
    R = load_subgroup(r)
    found = coset_ball(R, Config.BALL_RADIUS if radius is None else radius)
    for w in found.representatives:
        click.echo(_word(w, R.alphabet))
    if dot:
        Path(dot).write_text(ball_to_dot(R, found))


@cli.command()
@click.argument('r', type=click.Path(exists=True, dir_okay=False))
@click.argument('words', nargs=-1, required=True)
def distinct(r, words):
    """Exit 0 when the cosets R·g are pairwise different."""
    R = load_subgroup(r)
    if not cosets_distinct(R, [parse_word(w, R.alphabet) for w in words]):
        click.echo('not distinct')
        raise click.exceptions.Exit(1)
    click.echo('distinct')


@cli.command()
@click.argument('r', type=click.Path(exists=True, dir_okay=False))
@click.option('--word', required=True)
@click.option('--depth', type=int, default=2, show_default=True)
def trend(r, word, depth):
    """Orbit of R under growing pieces of the normal closure of a word (evidence only)."""
    R = load_subgroup(r)
    click.echo('depth rank index orbit')
    for row in normal_orbit_trend(R, parse_word(word, R.alphabet), depth):
        click.echo(f'{row.depth} {row.rank} {row.index} {row.orbit}')


def main():
    cli(prog_name='freesub')
