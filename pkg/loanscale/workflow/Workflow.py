import logging
import multiprocessing
import time
from functools import partial
from typing import Dict, List, TypeVar, Union

import pandas as pd

from loanscale import utils
from loanscale.allocation import Allocator
from loanscale.data import TraceLoader
from loanscale.reclaim import ReclaimSelector, PreemptionCostSelector
from loanscale.simulation import MetricsReport, ScenarioConfig, run
from loanscale.workflow.error_logging import log_error

logger = logging.getLogger(__name__)

T = TypeVar('T')

COLUMNS = ['Traces', 'Allocator', 'Reclaimer', 'Scenario', 'Runtime [s]']


class Workflow:
    """
    Compare scheduling policies by simulating every combination of
    ``traces``, ``allocators``, ``reclaimers`` and ``scenarios``. Every
    combination is a cell of the comparison, and each cell runs its own
    simulation. If a cell fails, the error is written to an error file,
    which is an executable Python file reproducing the error, and the
    metrics of the cell are set to ``'Error'``. The other cells are not
    affected.

    Parameters
    ----------
    traces: TraceLoader or list of TraceLoader
        The traces to simulate.
    allocators: Allocator or list of Allocator
        The allocation policies to compare.
    reclaimers: ReclaimSelector or list of ReclaimSelector, default=None
        The reclaim policies to compare. Defaults to a
        :py:class:`~loanscale.reclaim.PreemptionCostSelector`.
    scenarios: ScenarioConfig or list of ScenarioConfig, default=None
        The scenarios to simulate. Defaults to ``ScenarioConfig()``.
    n_jobs: int, default=1
        Number of processes simulating cells in parallel.
    error_log_path: str, default='./error_logs'
        The directory in which the error files are written.
    seed: int, default=0
        The seed of every simulation.

    Examples
    --------
    >>> from loanscale.data import SyntheticTraceLoader
    >>> from loanscale.allocation import TwoPhaseAllocator, FifoAllocator
    >>> from loanscale.simulation import ScenarioConfig
    >>> from loanscale.workflow import Workflow
    >>> workflow = Workflow(
    ...     traces=SyntheticTraceLoader(n_jobs=50, days=0.1, n_training_servers=4),
    ...     allocators=[TwoPhaseAllocator(), FifoAllocator()],
    ...     scenarios=ScenarioConfig(n_training_servers=4, n_inference_servers=4)
    ... )
    >>> results = workflow.run()  # doctest: +SKIP
    """
    traces: List[TraceLoader]
    allocators: List[Allocator]
    reclaimers: List[ReclaimSelector]
    scenarios: List[ScenarioConfig]
    n_jobs: int
    error_log_path: str
    seed: int

    def __init__(self,
                 traces: Union[TraceLoader, List[TraceLoader]],
                 allocators: Union[Allocator, List[Allocator]],
                 reclaimers: Union[ReclaimSelector, List[ReclaimSelector]] = None,
                 scenarios: Union[ScenarioConfig, List[ScenarioConfig]] = None,
                 n_jobs: int = 1,
                 error_log_path: str = './error_logs',
                 seed: int = 0):
        traces = _as_list(traces)
        allocators = _as_list(allocators)
        reclaimers = _as_list(reclaimers or [PreemptionCostSelector()])
        scenarios = _as_list(scenarios or [ScenarioConfig()])

        if len(traces) == 0:
            raise ValueError('At least one trace loader should be given to the workflow!')
        if len(allocators) == 0:
            raise ValueError('At least one allocator should be given to the workflow!')
        if not utils.is_valid_list(traces, TraceLoader):
            raise TypeError('`traces` should be a list of TraceLoader')
        if not utils.is_valid_list(allocators, Allocator):
            raise TypeError('`allocators` should be a list of Allocator')
        if not utils.is_valid_list(reclaimers, ReclaimSelector):
            raise TypeError('`reclaimers` should be a list of ReclaimSelector')
        if not utils.is_valid_list(scenarios, ScenarioConfig):
            raise TypeError('`scenarios` should be a list of ScenarioConfig')
        utils.check_integer('n_jobs', n_jobs, minimum=1)
        if not isinstance(error_log_path, str):
            raise TypeError('`error_log_path` should be a string')
        utils.check_integer('seed', seed, minimum=0)

        self.traces = traces
        self.allocators = allocators
        self.reclaimers = reclaimers
        self.scenarios = scenarios
        self.n_jobs = n_jobs
        self.error_log_path = error_log_path
        self.seed = seed

    def cells(self) -> list:
        """ All combinations of traces, allocator, reclaimer and scenario, in row order. """
        return [
            (trace_loader, allocator, reclaim_policy, config)
            for trace_loader in self.traces
            for allocator in self.allocators
            for reclaim_policy in self.reclaimers
            for config in self.scenarios
        ]

    def run(self) -> pd.DataFrame:
        """
        Simulate every cell of this workflow.

        Returns
        -------
        results: pd.DataFrame
            One row per cell, in the order of :py:meth:`cells`. The first
            columns identify the cell, the others are the keys of
            :py:meth:`~loanscale.simulation.MetricsReport.summary`. If any
            cell failed, a column ``'Error file'`` holds the path of its
            error file.
        """
        cells = self.cells()
        single_run_function = partial(_single_cell, error_log_path=self.error_log_path, seed=self.seed)
        if self.n_jobs == 1:
            result = [single_run_function(*cell) for cell in cells]
        else:
            with multiprocessing.Pool(processes=self.n_jobs) as pool:
                result = pool.starmap(single_run_function, cells)

        results_df = pd.DataFrame(result)
        return results_df[COLUMNS + [column for column in results_df.columns if column not in COLUMNS]]


def _as_list(value: Union[T, List[T]]) -> List[T]:
    if not isinstance(value, list):
        return [value]
    return value


def _single_cell(trace_loader: TraceLoader,
                 allocator: Allocator,
                 reclaim_policy: ReclaimSelector,
                 config: ScenarioConfig,
                 error_log_path: str,
                 seed: int) -> Dict[str, Union[str, float]]:
    # Every metric is an error until the simulation succeeds
    results = {
        'Traces': str(trace_loader),
        'Allocator': str(allocator),
        'Reclaimer': str(reclaim_policy),
        'Scenario': config.label(),
        'Runtime [s]': 'Error'
    }
    for key in MetricsReport().summary():
        if key != 'policy':
            results[key] = 'Error'

    try:
        jobs, util = trace_loader.load()
    except Exception as exception:
        results['Error file'] = log_error(error_log_path, exception, trace_loader)
        logger.warning('Loading %s failed, see %s', trace_loader, results['Error file'])
        return results

    logger.info('Simulating %s with %s and %s (%s)', trace_loader, allocator, reclaim_policy, config.label())
    start = time.time()
    try:
        report, _ = run(jobs, util, allocator, reclaim_policy, config=config, seed=seed)
        summary = report.summary()
        summary.pop('policy')
        results.update(summary)
    except Exception as exception:
        results['Error file'] = log_error(error_log_path, exception, trace_loader, allocator, reclaim_policy, config, seed)
        logger.warning('Simulating %s with %s failed, see %s', trace_loader, allocator, results['Error file'])
    results['Runtime [s]'] = time.time() - start
    logger.info('Finished %s with %s in %.2fs', trace_loader, allocator, results['Runtime [s]'])
    return results
