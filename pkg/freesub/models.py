import logging
from dataclasses import dataclass, field
from typing import Any, Union

from freesub.errors import ResourceLimitError

logger = logging.getLogger(__name__)

# ============================================
# Index results
# ============================================

@dataclass(frozen=True)
class FiniteIndex:
    value: int
    finite = True

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Infinite:
    finite = False

    def __str__(self):
        return 'infinite'


@dataclass(frozen=True)
class NotSubgroup:
    finite = False

    def __str__(self):
        return 'not a subgroup'


INFINITE = Infinite()
NOT_SUBGROUP = NotSubgroup()

IndexResult = Union[FiniteIndex, Infinite, NotSubgroup]

# ============================================
# Audit trail
# ============================================

def expectation_met(expected, observed):
    """`expected` is a '|'-separated list of literals; 'finite' matches any number."""
    for option in expected.split('|'):
        if option == observed or (option == 'finite' and observed.isdigit()):
            return True
    return False


@dataclass
class Certificate:
    kind: str
    subjects: tuple
    expected: str
    observed: str
    evidence_only: bool = False  # reported, never counted as a failure
    args: tuple = ()

    @property
    def holds(self):
        return expectation_met(self.expected, self.observed)

    def describe(self):
        status = 'ok' if self.holds else ('evidence' if self.evidence_only else 'FAILED')
        return f"{self.kind}({', '.join(map(str, self.subjects + self.args))}) expected={self.expected} observed={self.observed} [{status}]"


@dataclass
class StageRecord:
    step: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    certificates: list = field(default_factory=list)
    words: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    note: str = ''
    placeholder: bool = False

    def subject(self, key):
        if key in self.outputs:
            return self.outputs[key]
        if key in self.inputs:
            return self.inputs[key]
        raise KeyError(f'{key!r} is not logged in step {self.step!r}')


class StageLog:
    """Ordered audit trail of a pipeline run; append-only."""

    def __init__(self, max_vertices=None):
        self.records: list[StageRecord] = []
        self.max_vertices = max_vertices

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def record(self, step, inputs=None, outputs=None, note='', words=None, **params) -> StageRecord:
        outputs = outputs or {}
        if self.max_vertices is not None:
            for key, handle in outputs.items():
                size = handle.graph.vertex_count
                if size > self.max_vertices:
                    raise ResourceLimitError(
                        f'step {step!r} produced a core with {size} vertices ({key}); '
                        f'the cap is {self.max_vertices}', vertices=size, limit=self.max_vertices)
        entry = StageRecord(step, dict(inputs or {}), dict(outputs), words=dict(words or {}),
                            params=params, note=note)
        self.records.append(entry)
        logger.info('stage %d %s: %s', len(self.records), step,
                    ', '.join(f'{k}[{v.graph.vertex_count}v]' for k, v in outputs.items()) or note)
        return entry

    def placeholder(self, step, note) -> StageRecord:
        entry = StageRecord(step, note=note, placeholder=True)
        self.records.append(entry)
        return entry

    def certificates(self):
        for entry in self.records:
            for cert in entry.certificates:
                yield entry, cert

    def failures(self):
        return [(e, c) for e, c in self.certificates() if not c.holds and not c.evidence_only]

    @property
    def ok(self):
        return not self.failures()

    def report(self) -> str:
        lines = ['# stage log', f'steps: {len(self.records)}', '']
        for i, entry in enumerate(self.records, 1):
            lines.append(f'== step {i}: {entry.step} ==')
            if entry.placeholder:
                lines.append(f'placeholder: {entry.note}')
                lines.append('')
                continue
            if entry.note:
                lines.append(f'note: {entry.note}')
            for key, value in sorted(entry.params.items()):
                lines.append(f'param {key}: {value}')
            for role, handles in (('input', entry.inputs), ('output', entry.outputs)):
                for key, handle in handles.items():
                    lines.append(f'{role} {key}: {handle.summary()}')
                    lines.extend('  ' + row for row in handle.serialize().splitlines())
            for key, word in entry.words.items():
                lines.append(f'word {key}: length {len(word)}')
            for cert in entry.certificates:
                lines.append(f'certificate {cert.describe()}')
            lines.append('')
        return '\n'.join(lines)

    def to_dict(self) -> dict[str, Any]:
        return {
            'ok': self.ok,
            'steps': [{
                'step': entry.step,
                'placeholder': entry.placeholder,
                'note': entry.note,
                'inputs': {k: v.summary() for k, v in entry.inputs.items()},
                'outputs': {k: v.summary() for k, v in entry.outputs.items()},
                'certificates': [{
                    'kind': c.kind,
                    'subjects': list(c.subjects),
                    'expected': c.expected,
                    'observed': c.observed,
                    'holds': c.holds,
                    'evidence_only': c.evidence_only,
                    'args': list(c.args),
                } for c in entry.certificates],
            } for entry in self.records],
        }
