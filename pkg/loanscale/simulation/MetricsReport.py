import dataclasses
from typing import Any, Dict, List, Optional

import numpy as np


def percentile(values, q: float) -> float:
    """
    Nearest-rank percentile: the smallest value such that at least ``q``
    percent of the values are smaller than or equal to it. Returns 0 for
    an empty input.

    Examples
    --------
    >>> from loanscale.simulation import percentile
    >>> percentile(list(range(1, 101)), 95)
    95.0
    """
    if len(values) == 0:
        return 0.0
    return float(np.percentile(np.asarray(values, dtype=float), q, method='inverted_cdf'))


def _mean(values) -> float:
    return float(np.mean(values)) if len(values) > 0 else 0.0


def _median(values) -> float:
    return float(np.median(values)) if len(values) > 0 else 0.0


@dataclasses.dataclass
class JobRecord:
    """
    What happened to one job. The completion time equals the queuing time
    plus the running time plus the overheads.
    """
    id: str
    submit_s: float
    first_start_s: Optional[float]
    finish_s: Optional[float]
    queuing_s: float
    running_s: float
    overhead_s: float
    preemptions: int

    @property
    def jct_s(self) -> float:
        return self.finish_s - self.submit_s


@dataclasses.dataclass
class UsageSample:
    at_s: float
    training_usage: float
    overall_usage: float
    on_loan: int


@dataclasses.dataclass
class MetricsReport:
    """
    The metrics of a simulation.

    Attributes
    ----------
    policy: str
        A description of the simulated policies.
    jobs: list of JobRecord
        One record per finished job, in order of completion.
    usage: list of UsageSample
        The GPU usage, sampled at a fixed interval.
    n_submissions: int
        The number of jobs submitted.
    n_preemptions: int
        The number of times a job was preempted.
    collateral_damages: list of float
        The collateral damage of every reclaim that preempted jobs.
    scale_op_count: int
        The number of times the workers of a running job changed.
    loan_count: int
        The number of loan instructions executed.
    reclaim_count: int
        The number of reclaim instructions executed.
    servers_loaned: int
        The number of servers moved to the training cluster.
    servers_reclaimed: int
        The number of servers returned to the inference cluster.
    servers_drained: int
        The part of ``servers_reclaimed`` vacated by scaling in flexible
        workers only.
    """
    policy: str = ''
    jobs: List[JobRecord] = dataclasses.field(default_factory=list)
    usage: List[UsageSample] = dataclasses.field(default_factory=list)
    n_submissions: int = 0
    n_preemptions: int = 0
    collateral_damages: List[float] = dataclasses.field(default_factory=list)
    scale_op_count: int = 0
    loan_count: int = 0
    reclaim_count: int = 0
    servers_loaned: int = 0
    servers_reclaimed: int = 0
    servers_drained: int = 0

    def queuing_times(self) -> np.ndarray:
        return np.array([job.queuing_s for job in self.jobs], dtype=float)

    def jcts(self) -> np.ndarray:
        return np.array([job.jct_s for job in self.jobs], dtype=float)

    @property
    def preemption_ratio(self) -> float:
        return self.n_preemptions / self.n_submissions if self.n_submissions > 0 else 0.0

    @property
    def collateral_damage(self) -> float:
        return _mean(self.collateral_damages)

    @property
    def flexible_share(self) -> float:
        """ The fraction of reclaimed servers that was drained without preemptions. """
        return self.servers_drained / self.servers_reclaimed if self.servers_reclaimed > 0 else 0.0

    def summary(self) -> Dict[str, Any]:
        """
        Summarize the report in a single row, with the mean, median and
        95th percentile of the queuing times and completion times. All
        values are 0 for a report without jobs.
        """
        queuing = self.queuing_times()
        jct = self.jcts()
        return {
            'policy': self.policy,
            'n_jobs': len(self.jobs),
            'mean_queuing_s': _mean(queuing),
            'median_queuing_s': _median(queuing),
            'p95_queuing_s': percentile(queuing, 95),
            'mean_jct_s': _mean(jct),
            'median_jct_s': _median(jct),
            'p95_jct_s': percentile(jct, 95),
            'training_usage': _mean([sample.training_usage for sample in self.usage]),
            'overall_usage': _mean([sample.overall_usage for sample in self.usage]),
            'preemption_ratio': self.preemption_ratio,
            'collateral_damage': self.collateral_damage,
            'scale_ops': self.scale_op_count,
            'flexible_share': self.flexible_share,
            'loan_count': self.loan_count,
            'reclaim_count': self.reclaim_count,
            'servers_loaned': self.servers_loaned,
            'servers_reclaimed': self.servers_reclaimed,
            'mean_on_loan': _mean([sample.on_loan for sample in self.usage]),
        }

    def to_dict(self) -> Dict[str, Any]:
        report = dataclasses.asdict(self)
        report['summary'] = self.summary()
        return report

    @classmethod
    def from_dict(cls, report: Dict[str, Any]) -> 'MetricsReport':
        fields = {field.name for field in dataclasses.fields(cls)}
        values = {key: value for key, value in report.items() if key in fields}
        values['jobs'] = [JobRecord(**job) for job in values.get('jobs', [])]
        values['usage'] = [UsageSample(**sample) for sample in values.get('usage', [])]
        return cls(**values)
