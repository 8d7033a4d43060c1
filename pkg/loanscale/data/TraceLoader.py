import abc
from pathlib import Path
from typing import Optional, Tuple, Union

from loanscale.PrettyPrintable import PrettyPrintable
from loanscale.data.traces import JobTrace, UtilTrace, parse_job_trace, parse_util_trace
from loanscale.data.synthetic import gen_traces


class TraceLoader(PrettyPrintable):
    """
    A lazy loader of the traces of a simulation.

    Loaders point towards the traces and only load them once a simulation
    needs them, which keeps the memory of large comparisons limited.

    Parameters
    ----------
    do_caching: bool, default=False
        Whether to cache the loaded traces.

    Attributes
    ----------
    cache_: tuple of (JobTrace, UtilTrace)
        The cached traces. Only available if ``do_caching==True`` and the
        traces have been loaded before.
    """
    do_caching: bool
    cache_: Tuple[JobTrace, Optional[UtilTrace]]

    def __init__(self, do_caching: bool = False):
        self.do_caching = do_caching

    def load(self) -> Tuple[JobTrace, Optional[UtilTrace]]:
        """
        Load the traces. If ``do_caching==True``, the traces are loaded only
        once and cached.

        Returns
        -------
        jobs: JobTrace
            The job trace.
        util: UtilTrace or None
            The utilization trace of the inference cluster, if any.
        """
        if self.do_caching:
            if not hasattr(self, 'cache_'):
                self.cache_ = self._load()
            return self.cache_
        return self._load()

    @abc.abstractmethod
    def _load(self) -> Tuple[JobTrace, Optional[UtilTrace]]:
        """ Effectively load the traces. """


class FileTraceLoader(TraceLoader):
    """
    Load a job trace in JSON Lines and, optionally, a utilization trace in
    CSV from disk.

    Parameters
    ----------
    jobs_path: str or Path
        The job trace.
    util_path: str or Path, default=None
        The utilization trace.
    do_caching: bool, default=False
        Whether to cache the loaded traces.

    Raises
    ------
    FileNotFoundError
        If a given path does not point to an existing file.
    """
    jobs_path: str
    util_path: Optional[str]

    def __init__(self, jobs_path: Union[str, Path], util_path: Union[str, Path] = None, do_caching: bool = False):
        super().__init__(do_caching)
        for path in (jobs_path, util_path):
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(f'No such file: {path}')
        self.jobs_path = str(jobs_path)
        self.util_path = None if util_path is None else str(util_path)

    def _load(self) -> Tuple[JobTrace, Optional[UtilTrace]]:
        util = None if self.util_path is None else parse_util_trace(self.util_path)
        return parse_job_trace(self.jobs_path), util


class SyntheticTraceLoader(TraceLoader):
    """
    Generate synthetic traces with :py:func:`~loanscale.data.gen_traces`.

    Parameters
    ----------
    n_jobs: int
        The number of jobs.
    days: float, default=1.0
        The span of the traces in days.
    seed: int, default=0
        The seed of the generator.
    target_load: float, default=0.9
        The offered GPU-time relative to the capacity of the training cluster.
    n_training_servers: int, default=64
        The size of the training cluster the load is relative to.
    do_caching: bool, default=False
        Whether to cache the generated traces.
    """
    n_jobs: int
    days: float
    seed: int
    target_load: float
    n_training_servers: int

    def __init__(self, n_jobs: int, days: float = 1.0, seed: int = 0, target_load: float = 0.9, n_training_servers: int = 64, do_caching: bool = False):
        super().__init__(do_caching)
        self.n_jobs = n_jobs
        self.days = days
        self.seed = seed
        self.target_load = target_load
        self.n_training_servers = n_training_servers

    def _load(self) -> Tuple[JobTrace, Optional[UtilTrace]]:
        return gen_traces(self.n_jobs, self.days, n_training_servers=self.n_training_servers, seed=self.seed, load=self.target_load)
