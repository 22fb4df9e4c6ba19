from pathlib import Path

import pytest
from click.testing import CliRunner

from freesub.cli import cli
from freesub.config import Config

SAMPLES = Path(__file__).resolve().parent.parent / 'samples'
HANDLE = str(SAMPLES / 'handle.grp')
X = str(SAMPLES / 'x.grp')
Y = str(SAMPLES / 'y.grp')
TRIVIAL = str(SAMPLES / 'trivial.grp')
INDEX2 = str(SAMPLES / 'index2.grp')


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def grp(tmp_path):
    """Write a generator file and return its path."""
    def write(name, *words, alphabet='x,y'):
        path = tmp_path / name
        path.write_text('\n'.join([f'alphabet: {alphabet}', *words]) + '\n')
        return str(path)
    return write


def invoke(runner, *args):
    return runner.invoke(cli, ['--log-level', 'WARNING', *args])

# ============================================
# Single subgroups
# ============================================

def test_core_reports_sample(runner):
    result = invoke(runner, 'core', HANDLE)
    assert result.exit_code == 0
    assert result.output.startswith('base=0 vertices=6 alphabet=x,y\n0 x 1\n')
    assert '# rank: 3' in result.output
    assert '# index: infinite' in result.output
    assert '# handle: length 1 x' in result.output


def test_core_writes_dot_and_core(runner, tmp_path):
    dot, out = tmp_path / 'h.dot', tmp_path / 'h.core'
    result = invoke(runner, 'core', HANDLE, '--dot', str(dot), '-o', str(out))
    assert result.exit_code == 0
    assert dot.read_text().startswith('digraph "handle"')
    assert out.read_text().startswith('base=0 vertices=6')


def test_core_output_is_deterministic(runner):
    first = invoke(runner, 'core', HANDLE).output
    assert invoke(runner, 'core', HANDLE).output == first


def test_member_exit_codes(runner):
    result = invoke(runner, 'member', HANDLE, 'xyxyX')
    assert result.exit_code == 0
    assert result.output.startswith('member: path 0 1 ')
    result = invoke(runner, 'member', HANDLE, 'x')
    assert result.exit_code == 1
    assert 'not a member' in result.output


def test_malformed_word_exits_4(runner):
    result = invoke(runner, 'member', HANDLE, 'xq')
    assert result.exit_code == 4
    assert 'error: unknown letter' in result.output


def test_malformed_file_exits_4(runner, tmp_path):
    bad = tmp_path / 'bad.grp'
    bad.write_text('alphabet: x,y\nx!\n')
    result = invoke(runner, 'index', str(bad))
    assert result.exit_code == 4
    assert 'line 2' in result.output


@pytest.mark.parametrize('path,expected', [(INDEX2, '2'), (X, 'infinite'), (TRIVIAL, 'infinite')])
def test_index(runner, path, expected):
    result = invoke(runner, 'index', path)
    assert result.exit_code == 0
    assert result.output.strip() == expected


def test_rank_and_basis(runner):
    assert invoke(runner, 'rank', HANDLE).output.strip() == '3'
    lines = invoke(runner, 'basis', HANDLE).output.split()
    assert len(lines) == 3

# ============================================
# Two subgroups
# ============================================

def test_intersect_and_join(runner, grp):
    xx = grp('xx.grp', 'xx', 'y')
    result = invoke(runner, 'intersect', X, xx)
    assert result.output.startswith('base=0 vertices=2 alphabet=x,y\n0 x 1\n1 x 0\n')
    result = invoke(runner, 'join', X, Y)
    assert result.output.startswith('base=0 vertices=1 alphabet=x,y\n0 x 0\n0 y 0\n')


def test_conjugate(runner):
    result = invoke(runner, 'conjugate', X, '-g', 'y')
    assert result.exit_code == 0
    assert result.output.startswith('base=0 vertices=2 alphabet=x,y\n0 y 1\n1 x 1\n')


def test_hall(runner):
    result = invoke(runner, 'hall', X, '--exclude', 'y')
    assert result.exit_code == 0
    assert 'index=2' in result.output


def test_hall_rejects_members_with_exit_2(runner):
    result = invoke(runner, 'hall', X, '--exclude', 'xx')
    assert result.exit_code == 2
    assert 'error:' in result.output


def test_cover(runner, grp):
    h = grp('h.grp', 'x', 'yxY')
    result = invoke(runner, 'cover', h, '--frame', 'y')
    assert result.exit_code == 0
    assert '# branch: cover, sheets: 2, witness vertex: 1' in result.output
    assert '0 failed' in result.output


def test_pair_family_normalized(runner):
    for args in (('pair', X, Y), ('family', X, Y), ('normalized', X, Y)):
        result = invoke(runner, *args)
        assert result.exit_code == 0, result.output
        assert '0 failed' in result.output


def test_shrink_with_audit(runner, tmp_path):
    audit = tmp_path / 'audit.log'
    result = invoke(runner, 'shrink', X, Y, '--exclude', 'y', '--audit', str(audit))
    assert result.exit_code == 0, result.output
    assert '# join: vertices=2' in result.output
    report = audit.read_text()
    assert report.startswith('# stage log')
    assert '== step' in report


def test_resource_cap_exits_3(runner, monkeypatch):
    monkeypatch.setattr(Config, 'MAX_CORE_VERTICES', 1)
    result = invoke(runner, 'pair', X, Y)
    assert result.exit_code == 3
    assert 'cap is 1' in result.output


def test_smallcancel(runner):
    result = invoke(runner, 'smallcancel', '--word', 'x')
    assert result.exit_code == 0, result.output
    assert '# blocks per u-word:' in result.output
    assert 'rank=2 index=infinite' in result.output

# ============================================
# Prefixes and actions
# ============================================

def test_build_and_verify_r(runner, tmp_path):
    out = tmp_path / 'prefix'
    result = invoke(runner, 'build-r', '--stages', '2', '--out', str(out))
    assert result.exit_code == 0, result.output
    assert result.output.startswith('stage 1: L = <x>')
    assert 'stage 2: L = <y>' in result.output
    assert (out / 'R2.core').exists()

    result = invoke(runner, 'verify-r', str(out), X)
    assert result.output.strip() == '1'
    result = invoke(runner, 'verify-r', str(out), INDEX2)
    assert 'evidence only' in result.output


def test_build_r_reports_truncation(runner):
    result = invoke(runner, 'build-r', '--stages', '3', '--max-vertices', '1')
    assert result.exit_code == 0
    assert 'truncated: resource cap at stage 2' in result.output


def test_orbit(runner, grp):
    r = grp('r.grp', 'x', 'yy')
    result = invoke(runner, 'orbit', r, Y)
    assert result.output.splitlines()[0] == '2'
    result = invoke(runner, 'orbit', r, Y, '--radius', '2')
    assert 'closed 2: 1 y' in result.output


def test_ball_and_distinct(runner):
    result = invoke(runner, 'ball', X, '--radius', '1')
    assert result.output.split() == ['1', 'y', 'Y']
    assert invoke(runner, 'distinct', X, '1', 'y', 'Y').exit_code == 0
    result = invoke(runner, 'distinct', X, 'y', 'xy')
    assert result.exit_code == 1


def test_trend(runner):
    result = invoke(runner, 'trend', X, '--word', 'y', '--depth', '1')
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == 'depth rank index orbit'
    assert lines[1] == '0 1 infinite infinite'
