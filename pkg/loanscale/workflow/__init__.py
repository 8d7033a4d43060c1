"""
This module contains the comparison workflow and the report files of a
simulation. It can be imported as follows:

>>> from loanscale import workflow

A workflow simulates every combination of traces, allocators, reclaim
policies and scenarios, and collects one summary row per combination:

>>> from loanscale.data import SyntheticTraceLoader
>>> from loanscale.allocation import TwoPhaseAllocator, GandivaAllocator
>>> from loanscale.reclaim import PreemptionCostSelector, RandomSelector
>>> comparison = workflow.Workflow(
...     traces=SyntheticTraceLoader(n_jobs=100, days=0.25, n_training_servers=8),
...     allocators=[TwoPhaseAllocator(), GandivaAllocator()],
...     reclaimers=[PreemptionCostSelector(), RandomSelector(seed=3)]
... )

The same workflow can be described in a JSON file and loaded with
:py:func:`~loanscale.workflow.workflow_from_config`.
"""
from .Workflow import Workflow
from .workflow_from_config import workflow_from_config, interpret_config
from .report import write_report, read_report, METRICS_FILE, EVENTS_FILE, SUMMARY_FILE
from .error_logging import log_error

__all__ = [
    # Comparison
    'Workflow',
    'workflow_from_config',
    'interpret_config',
    'log_error',

    # Reports
    'write_report',
    'read_report',
    'METRICS_FILE',
    'EVENTS_FILE',
    'SUMMARY_FILE'
]
