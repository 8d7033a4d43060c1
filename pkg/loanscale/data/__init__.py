"""
This module contains the trace formats, the synthetic trace generator and
the worked examples. It can be imported as follows:

>>> from loanscale import data

Job traces are JSON Lines files with one job per line, utilization traces
are CSV files with header ``t_s,utilization``, and recorded loan plans are
JSON Lines files with one instruction per line.
"""
from .traces import (
    TraceParseError, JobTrace, UtilTrace,
    parse_job_trace, write_job_trace,
    parse_util_trace, write_util_trace,
    parse_loan_plan, write_loan_plan
)
from .synthetic import gen_traces, make_diurnal_utilization, elastic_gpu_share
from .TraceLoader import TraceLoader, FileTraceLoader, SyntheticTraceLoader
from .fixtures import demonstration_reclaim_cluster, contention_jobs, mixed_gpu_jobs, demonstration_mckp_instance

__all__ = [
    # Formats
    'TraceParseError',
    'JobTrace',
    'UtilTrace',
    'parse_job_trace',
    'write_job_trace',
    'parse_util_trace',
    'write_util_trace',
    'parse_loan_plan',
    'write_loan_plan',

    # Synthetic
    'gen_traces',
    'make_diurnal_utilization',
    'elastic_gpu_share',

    # Loaders
    'TraceLoader',
    'FileTraceLoader',
    'SyntheticTraceLoader',

    # Worked examples
    'demonstration_reclaim_cluster',
    'contention_jobs',
    'mixed_gpu_jobs',
    'demonstration_mckp_instance'
]
