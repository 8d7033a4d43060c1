import json

import numpy as np
import pytest

from loanscale.cluster import JobSpec
from loanscale.data import (
    TraceParseError, JobTrace, UtilTrace,
    parse_job_trace, write_job_trace,
    parse_util_trace, write_util_trace,
    parse_loan_plan, write_loan_plan
)
from loanscale.loaning import InstructionKind, LoanInstruction


def write_lines(path, lines):
    path.write_text('\n'.join(lines) + '\n')
    return path


class TestJobTrace:

    def test_valid(self, contention):
        trace = JobTrace(contention)
        assert len(trace) == 2
        assert [job.id for job in trace] == ['A', 'B']

    def test_empty(self):
        assert len(JobTrace()) == 0

    def test_duplicate_id(self):
        with pytest.raises(ValueError):
            JobTrace([JobSpec('A', 0, 1, 1, 1, 1.0), JobSpec('A', 1, 1, 1, 1, 1.0)])

    def test_out_of_order(self):
        with pytest.raises(ValueError):
            JobTrace([JobSpec('A', 5, 1, 1, 1, 1.0), JobSpec('B', 1, 1, 1, 1, 1.0)])

    def test_invalid_jobs(self):
        with pytest.raises(TypeError):
            JobTrace([{'id': 'A'}])


class TestParseJobTrace:

    def test_minimal_record(self, tmp_path):
        path = write_lines(tmp_path / 'jobs.jsonl', [
            '{"id": "a", "submit_s": 0, "gpus_per_worker": 2, "min_workers": 3, "runtime_at_max_s": 60}'
        ])
        job = parse_job_trace(path).jobs[0]
        assert job == JobSpec('a', 0, 2, 3, 3, 60)
        assert not job.is_elastic
        assert not job.gpu_flexible

    def test_full_record(self, tmp_path):
        path = write_lines(tmp_path / 'jobs.jsonl', [
            '{"id": "a", "submit_s": 0, "gpus_per_worker": 1, "min_workers": 2, "max_workers": 6, '
            '"runtime_at_max_s": 50.0, "gpu_flexible": true, "checkpointing": true, "hetero_capable": false}'
        ])
        job = parse_job_trace(path).jobs[0]
        assert job.is_elastic
        assert job.gpu_flexible
        assert job.checkpointing

    def test_blank_lines(self, tmp_path):
        path = write_lines(tmp_path / 'jobs.jsonl', [
            '{"id": "a", "submit_s": 0, "gpus_per_worker": 1, "min_workers": 1, "runtime_at_max_s": 1}',
            '',
            '{"id": "b", "submit_s": 3, "gpus_per_worker": 1, "min_workers": 1, "runtime_at_max_s": 1}',
        ])
        assert [job.id for job in parse_job_trace(path)] == ['a', 'b']

    def test_round_trip(self, tmp_path, mixed_gpu):
        write_job_trace(JobTrace(mixed_gpu), tmp_path / 'jobs.jsonl')
        assert parse_job_trace(tmp_path / 'jobs.jsonl') == JobTrace(mixed_gpu)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_job_trace(tmp_path / 'missing.jsonl')

    @pytest.mark.parametrize('record', [
        'not json',
        '[1, 2]',
        '{"id": "a", "submit_s": 0, "gpus_per_worker": 1, "min_workers": 1}',
        '{"id": "a", "submit_s": 0, "gpus_per_worker": 1, "min_workers": 1, "runtime_at_max_s": 1, "priority": 3}',
        '{"id": "a", "submit_s": 0, "gpus_per_worker": 1, "min_workers": 4, "max_workers": 2, "runtime_at_max_s": 1}',
        '{"id": "a", "submit_s": 0, "gpus_per_worker": 1, "min_workers": 1, "runtime_at_max_s": -1}',
    ])
    def test_malformed(self, tmp_path, record):
        path = write_lines(tmp_path / 'jobs.jsonl', [
            '{"id": "x", "submit_s": 0, "gpus_per_worker": 1, "min_workers": 1, "runtime_at_max_s": 1}',
            record
        ])
        with pytest.raises(TraceParseError) as error:
            parse_job_trace(path)
        assert error.value.line == 2
        assert error.value.path == str(path)
        assert str(error.value).startswith(f'{path}:2:')

    def test_duplicate_id(self, tmp_path):
        line = '{"id": "a", "submit_s": 0, "gpus_per_worker": 1, "min_workers": 1, "runtime_at_max_s": 1}'
        with pytest.raises(TraceParseError) as error:
            parse_job_trace(write_lines(tmp_path / 'jobs.jsonl', [line, line]))
        assert 'duplicate' in error.value.message

    def test_out_of_order(self, tmp_path):
        path = write_lines(tmp_path / 'jobs.jsonl', [
            '{"id": "a", "submit_s": 10, "gpus_per_worker": 1, "min_workers": 1, "runtime_at_max_s": 1}',
            '{"id": "b", "submit_s": 5, "gpus_per_worker": 1, "min_workers": 1, "runtime_at_max_s": 1}',
        ])
        with pytest.raises(TraceParseError) as error:
            parse_job_trace(path)
        assert error.value.line == 2

    def test_parse_error_is_value_error(self):
        assert issubclass(TraceParseError, ValueError)


class TestUtilTrace:

    def test_at(self):
        trace = UtilTrace([0, 300, 600], [0.2, 0.5, 0.8])
        assert trace.at(0) == 0.2
        assert trace.at(299.9) == 0.2
        assert trace.at(300) == 0.5
        assert trace.at(10 ** 6) == 0.8
        assert trace.at(-5) == 0.2
        assert trace.interval_s == 300

    def test_empty(self):
        trace = UtilTrace([], [])
        assert len(trace) == 0
        assert trace.at(100) == 0.0
        assert trace.interval_s == 0.0

    @pytest.mark.parametrize('t_s,utilization', [
        ([0, 300], [0.5]),
        ([0, 300, 300], [0.5, 0.5, 0.5]),
        ([0, 300, 900], [0.5, 0.5, 0.5]),
        ([0, 300], [0.5, 1.5]),
        ([0, 300], [-0.1, 0.5]),
    ])
    def test_invalid(self, t_s, utilization):
        with pytest.raises(ValueError):
            UtilTrace(t_s, utilization)

    def test_equality(self):
        assert UtilTrace([0, 1], [0.1, 0.2]) == UtilTrace(np.array([0.0, 1.0]), [0.1, 0.2])
        assert UtilTrace([0, 1], [0.1, 0.2]) != UtilTrace([0, 1], [0.1, 0.3])
        assert UtilTrace([0, 1], [0.1, 0.2]) != [0.1, 0.2]


class TestParseUtilTrace:

    def test_valid(self, tmp_path):
        path = write_lines(tmp_path / 'util.csv', ['t_s,utilization', '0,0.25', '300,0.5', '600,0.75'])
        trace = parse_util_trace(path)
        assert trace == UtilTrace([0, 300, 600], [0.25, 0.5, 0.75])

    def test_round_trip(self, tmp_path):
        trace = UtilTrace([0, 60, 120, 180], [0.1, 0.9, 0.4, 0.0])
        write_util_trace(trace, tmp_path / 'util.csv')
        assert parse_util_trace(tmp_path / 'util.csv') == trace

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_util_trace(tmp_path / 'util.csv')

    def test_empty_file(self, tmp_path):
        (tmp_path / 'util.csv').write_text('')
        with pytest.raises(TraceParseError) as error:
            parse_util_trace(tmp_path / 'util.csv')
        assert error.value.line == 1

    def test_wrong_header(self, tmp_path):
        path = write_lines(tmp_path / 'util.csv', ['time,util', '0,0.5'])
        with pytest.raises(TraceParseError) as error:
            parse_util_trace(path)
        assert error.value.line == 1

    @pytest.mark.parametrize('rows,line', [
        (['0,0.5', '300,high'], 3),
        (['0,0.5', '300,1.2'], 3),
        (['0,0.5', '0,0.5'], 3),
        (['0,0.5', '300,0.5', '500,0.5'], 4),
    ])
    def test_malformed(self, tmp_path, rows, line):
        path = write_lines(tmp_path / 'util.csv', ['t_s,utilization'] + rows)
        with pytest.raises(TraceParseError) as error:
            parse_util_trace(path)
        assert error.value.line == line


class TestLoanPlan:

    def test_parse(self, tmp_path):
        path = write_lines(tmp_path / 'plan.jsonl', [
            '{"at_s": 0, "kind": "Loan", "n": 2}',
            '{"at_s": 300, "kind": "hold"}',
            '{"at_s": 600, "kind": "RECLAIM", "n": 1}',
        ])
        plan = parse_loan_plan(path)
        assert plan.instructions == [
            LoanInstruction(InstructionKind.LOAN, 2, 0.0),
            LoanInstruction(InstructionKind.HOLD, 0, 300.0),
            LoanInstruction(InstructionKind.RECLAIM, 1, 600.0),
        ]

    def test_round_trip(self, tmp_path):
        instructions = [LoanInstruction(InstructionKind.LOAN, 3, 0.0), LoanInstruction(InstructionKind.RECLAIM, 3, 900.0)]
        write_loan_plan(instructions, tmp_path / 'plan.jsonl')
        assert parse_loan_plan(tmp_path / 'plan.jsonl').instructions == instructions

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_loan_plan(tmp_path / 'plan.jsonl')

    @pytest.mark.parametrize('record', [
        '{"at_s": 10, "kind": "Borrow", "n": 1}',
        '{"at_s": 10, "kind": "Loan", "n": 0}',
        '{"at_s": "ten", "kind": "Loan", "n": 1}',
        '{"at_s": 10, "kind": "Loan", "n": 1, "reason": "peak"}',
        '{"at_s": 10, "kind": "Loan"',
        '{"at_s": 5, "kind": "Loan", "n": 1}',
    ])
    def test_malformed(self, tmp_path, record):
        path = write_lines(tmp_path / 'plan.jsonl', ['{"at_s": 6, "kind": "Hold"}', record])
        with pytest.raises(TraceParseError) as error:
            parse_loan_plan(path)
        assert error.value.line == 2
