import json
import dataclasses
from pathlib import Path
from typing import Iterator, List, Union

import numpy as np
import pandas as pd

from loanscale import utils
from loanscale.cluster import JobSpec
from loanscale.loaning import InstructionKind, LoanInstruction, RecordedLoanPlan

_JOB_FIELDS = [field.name for field in dataclasses.fields(JobSpec)]
_REQUIRED_JOB_FIELDS = ['id', 'submit_s', 'gpus_per_worker', 'min_workers', 'runtime_at_max_s']
_UTIL_COLUMNS = ['t_s', 'utilization']


class TraceParseError(ValueError):
    """
    Raised for a malformed record in a trace file.

    Parameters
    ----------
    path: str
        The trace file.
    line: int
        The line of the malformed record, starting from 1.
    message: str
        What is wrong with the record.
    """

    def __init__(self, path: Union[str, Path], line: int, message: str):
        super().__init__(f'{path}:{line}: {message}')
        self.path = str(path)
        self.line = line
        self.message = message


@dataclasses.dataclass
class JobTrace:
    """
    The jobs submitted to the training cluster, in order of submission.

    Parameters
    ----------
    jobs: list of JobSpec
        The jobs, with unique ids and non-decreasing submission times.
    """
    jobs: List[JobSpec] = dataclasses.field(default_factory=list)

    def __post_init__(self):
        if not utils.is_valid_list(self.jobs, JobSpec):
            raise TypeError('`jobs` should be a list of JobSpec')
        ids = set()
        for index, job in enumerate(self.jobs):
            if job.id in ids:
                raise ValueError(f'Duplicate job id `{job.id}`')
            ids.add(job.id)
            if index > 0 and job.submit_s < self.jobs[index - 1].submit_s:
                raise ValueError(f'Job `{job.id}` is submitted before the job preceding it')

    def __len__(self) -> int:
        return len(self.jobs)

    def __iter__(self) -> Iterator[JobSpec]:
        return iter(self.jobs)


class UtilTrace:
    """
    The utilization of the inference cluster, sampled at a fixed interval.

    Parameters
    ----------
    t_s: array-like
        The sample times, strictly increasing and uniformly spaced.
    utilization: array-like
        The utilization at each sample time, in [0, 1].

    Raises
    ------
    ValueError
        If the times are not strictly increasing and uniformly spaced, or a
        utilization falls outside [0, 1].
    """
    t_s: np.ndarray
    utilization: np.ndarray

    def __init__(self, t_s, utilization):
        t_s = np.asarray(t_s, dtype=float)
        utilization = np.asarray(utilization, dtype=float)
        if t_s.ndim != 1 or t_s.shape != utilization.shape:
            raise ValueError('`t_s` and `utilization` should be one-dimensional and of equal length')
        steps = np.diff(t_s)
        if np.any(steps <= 0):
            raise ValueError('`t_s` should be strictly increasing')
        if steps.shape[0] > 0 and not np.allclose(steps, steps[0]):
            raise ValueError('`t_s` should be uniformly spaced')
        if np.any((utilization < 0) | (utilization > 1)):
            raise ValueError('`utilization` should be in [0, 1]')
        self.t_s = t_s
        self.utilization = utilization

    @property
    def interval_s(self) -> float:
        return float(self.t_s[1] - self.t_s[0]) if self.t_s.shape[0] > 1 else 0.0

    def at(self, t: float) -> float:
        """
        The utilization at time ``t``: the most recent sample at or before
        ``t``. Before the first sample, the first sample applies, and after
        the last sample, the last one. An empty trace has utilization 0.
        """
        if self.t_s.shape[0] == 0:
            return 0.0
        index = max(0, int(np.searchsorted(self.t_s, t, side='right')) - 1)
        return float(self.utilization[index])

    def __len__(self) -> int:
        return self.t_s.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, UtilTrace) and np.array_equal(self.t_s, other.t_s) and np.array_equal(self.utilization, other.utilization)


###################################################################
# JOB TRACES
###################################################################

def parse_job_trace(path: Union[str, Path]) -> JobTrace:
    """
    Read a job trace from a JSON Lines file, with one job per line. Blank
    lines are skipped. A record without ``max_workers`` describes an
    inelastic job, and absent flags are False.

    Parameters
    ----------
    path: str or Path
        The trace file.

    Returns
    -------
    trace: JobTrace
        The jobs in the file.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    TraceParseError
        If a record is malformed, repeats an id, or is submitted before the
        record preceding it.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f'No such file: {path}')

    jobs = []
    ids = set()
    with open(path) as file:
        for line_number, line in enumerate(file, start=1):
            if line.strip() == '':
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as error:
                raise TraceParseError(path, line_number, f'invalid JSON ({error.msg})')
            job = _job_from_record(record, path, line_number)
            if job.id in ids:
                raise TraceParseError(path, line_number, f'duplicate job id `{job.id}`')
            if len(jobs) > 0 and job.submit_s < jobs[-1].submit_s:
                raise TraceParseError(path, line_number, f'submission time {job.submit_s} precedes the previous record ({jobs[-1].submit_s})')
            ids.add(job.id)
            jobs.append(job)
    return JobTrace(jobs)


def _job_from_record(record, path: Path, line_number: int) -> JobSpec:
    if not isinstance(record, dict):
        raise TraceParseError(path, line_number, 'a record should be a JSON object')
    unknown = [key for key in record if key not in _JOB_FIELDS]
    if len(unknown) > 0:
        raise TraceParseError(path, line_number, f'unknown fields {unknown}')
    missing = [key for key in _REQUIRED_JOB_FIELDS if key not in record]
    if len(missing) > 0:
        raise TraceParseError(path, line_number, f'missing fields {missing}')
    record = dict(record)
    record.setdefault('max_workers', record['min_workers'])
    try:
        return JobSpec(**record)
    except (TypeError, ValueError) as error:
        raise TraceParseError(path, line_number, str(error))


def write_job_trace(trace: JobTrace, path: Union[str, Path]) -> None:
    """ Write a job trace as JSON Lines, with every field of every job. """
    with open(path, 'w') as file:
        for job in trace.jobs:
            file.write(json.dumps(dataclasses.asdict(job)) + '\n')


###################################################################
# UTILIZATION TRACES
###################################################################

def parse_util_trace(path: Union[str, Path]) -> UtilTrace:
    """
    Read a utilization trace from a CSV file with header ``t_s,utilization``.

    Parameters
    ----------
    path: str or Path
        The trace file.

    Returns
    -------
    trace: UtilTrace
        The utilization samples in the file.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    TraceParseError
        If the header is wrong, a value is no number or out of range, or the
        times are not strictly increasing with a uniform spacing.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f'No such file: {path}')
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise TraceParseError(path, 1, f'expected the header `{",".join(_UTIL_COLUMNS)}`')
    except pd.errors.ParserError as error:
        raise TraceParseError(path, 1, f'malformed CSV ({error})')
    if list(frame.columns) != _UTIL_COLUMNS:
        raise TraceParseError(path, 1, f'expected the header `{",".join(_UTIL_COLUMNS)}`, got `{",".join(frame.columns)}`')

    t_s, utilization = [], []
    for row, (time, value) in enumerate(zip(frame['t_s'], frame['utilization'])):
        line_number = row + 2
        try:
            time, value = float(time), float(value)
        except ValueError:
            raise TraceParseError(path, line_number, f'`{time}` and `{value}` should be numbers')
        if not 0.0 <= value <= 1.0:
            raise TraceParseError(path, line_number, f'utilization {value} should be in [0, 1]')
        if len(t_s) > 0 and time <= t_s[-1]:
            raise TraceParseError(path, line_number, f'time {time} does not exceed the previous time {t_s[-1]}')
        if len(t_s) > 1 and not np.isclose(time - t_s[-1], t_s[1] - t_s[0]):
            raise TraceParseError(path, line_number, f'time {time} breaks the spacing of {t_s[1] - t_s[0]} s')
        t_s.append(time)
        utilization.append(value)
    return UtilTrace(t_s, utilization)


def write_util_trace(trace: UtilTrace, path: Union[str, Path]) -> None:
    """ Write a utilization trace as CSV with header ``t_s,utilization``. """
    frame = pd.DataFrame({'t_s': trace.t_s, 'utilization': trace.utilization}, columns=_UTIL_COLUMNS)
    frame.to_csv(path, index=False)


###################################################################
# LOAN PLANS
###################################################################

def parse_loan_plan(path: Union[str, Path]) -> RecordedLoanPlan:
    """
    Read recorded loan instructions from a JSON Lines file with records
    ``{"at_s": ..., "kind": "Loan" | "Reclaim" | "Hold", "n": ...}``, in
    chronological order.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    TraceParseError
        If a record is malformed or out of order.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f'No such file: {path}')

    instructions = []
    with open(path) as file:
        for line_number, line in enumerate(file, start=1):
            if line.strip() == '':
                continue
            try:
                record = json.loads(line)
                if not isinstance(record, dict) or set(record) - {'at_s', 'kind', 'n'}:
                    raise ValueError('a record should be an object with fields `at_s`, `kind` and `n`')
                kind = {kind.value.lower(): kind for kind in InstructionKind}.get(str(record.get('kind', '')).lower())
                if kind is None:
                    raise ValueError(f'unknown instruction `{record.get("kind")}`')
                if not utils.is_real(record.get('at_s')):
                    raise ValueError('`at_s` should be numeric')
                instruction = LoanInstruction(kind, record.get('n', 0), float(record['at_s']))
            except json.JSONDecodeError as error:
                raise TraceParseError(path, line_number, f'invalid JSON ({error.msg})')
            except (TypeError, ValueError) as error:
                raise TraceParseError(path, line_number, str(error))
            if len(instructions) > 0 and instruction.at_s < instructions[-1].at_s:
                raise TraceParseError(path, line_number, 'instructions should be in chronological order')
            instructions.append(instruction)
    return RecordedLoanPlan(instructions)


def write_loan_plan(instructions: List[LoanInstruction], path: Union[str, Path]) -> None:
    """ Write loan instructions as JSON Lines, readable by :py:func:`parse_loan_plan`. """
    with open(path, 'w') as file:
        for instruction in instructions:
            file.write(json.dumps({'at_s': instruction.at_s, 'kind': instruction.kind.value, 'n': instruction.n}) + '\n')
