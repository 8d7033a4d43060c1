import enum
import dataclasses
from typing import Dict, List, Optional

from loanscale import utils
from loanscale.cluster.Server import GpuKind

# Numerical slack on worker-second bookkeeping.
WORKLOAD_TOLERANCE = 1e-6


@dataclasses.dataclass(frozen=True)
class JobSpec:
    """
    The demand of a training job, as it appears in a job trace.

    Parameters
    ----------
    id: str
        Unique identifier of the job.
    submit_s: int
        Submission time in seconds.
    gpus_per_worker: int
        The number of GPUs each worker needs, all on one server.
    min_workers: int
        The minimum number of workers (the base demand).
    max_workers: int
        The maximum number of workers. The job is elastic if and only if
        this is larger than ``min_workers``.
    runtime_at_max_s: float
        The running time of the job when it runs with ``max_workers``
        workers on training GPUs.
    gpu_flexible: bool, default=False
        Whether the job may run on inference GPUs.
    checkpointing: bool, default=False
        Whether the job keeps its progress when it is preempted.
    hetero_capable: bool, default=False
        Whether the workers of the job may span training and inference GPUs.
    """
    id: str
    submit_s: int
    gpus_per_worker: int
    min_workers: int
    max_workers: int
    runtime_at_max_s: float
    gpu_flexible: bool = False
    checkpointing: bool = False
    hetero_capable: bool = False

    def __post_init__(self):
        if not isinstance(self.id, str) or self.id == '':
            raise TypeError('`id` should be a non-empty string')
        utils.check_integer('submit_s', self.submit_s, minimum=0)
        utils.check_integer('gpus_per_worker', self.gpus_per_worker, minimum=1)
        utils.check_integer('min_workers', self.min_workers, minimum=1)
        utils.check_integer('max_workers', self.max_workers, minimum=1)
        if self.min_workers > self.max_workers:
            raise ValueError(f'`min_workers` ({self.min_workers}) should not exceed `max_workers` ({self.max_workers})')
        if not utils.is_real(self.runtime_at_max_s):
            raise TypeError('`runtime_at_max_s` should be numeric')
        if self.runtime_at_max_s <= 0:
            raise ValueError('`runtime_at_max_s` should be strictly positive')
        for flag in ('gpu_flexible', 'checkpointing', 'hetero_capable'):
            if not isinstance(getattr(self, flag), bool):
                raise TypeError(f'`{flag}` should be a bool')

    @property
    def is_elastic(self) -> bool:
        return self.min_workers < self.max_workers

    @property
    def total_workload(self) -> float:
        """ The workload in worker-seconds at training speed. """
        return self.runtime_at_max_s * self.max_workers

    @property
    def max_flexible_workers(self) -> int:
        return self.max_workers - self.min_workers


@dataclasses.dataclass
class Workload:
    total: float
    remaining: float

    def __post_init__(self):
        if self.total <= 0:
            raise ValueError('`total` should be strictly positive')
        if not (-WORKLOAD_TOLERANCE <= self.remaining <= self.total + WORKLOAD_TOLERANCE):
            raise ValueError(f'`remaining` should be in [0, {self.total}], got {self.remaining}')

    @property
    def done(self) -> float:
        return self.total - self.remaining


class JobPhase(enum.Enum):
    """
    The life cycle of a job. Valid options are ``QUEUED``, ``RUNNING``,
    ``PREEMPTED`` (waiting again after losing its workers) and ``FINISHED``.
    """
    QUEUED = 'Queued'
    RUNNING = 'Running'
    PREEMPTED = 'Preempted'
    FINISHED = 'Finished'


class WorkerRole(enum.Enum):
    """
    Whether a worker belongs to the base demand or the flexible demand of
    its job. Workers of inelastic jobs are always ``BASE``.
    """
    BASE = 'Base'
    FLEXIBLE = 'Flexible'


@dataclasses.dataclass(frozen=True)
class Worker:
    id: str
    server_id: str
    kind: GpuKind
    speed_factor: float
    role: WorkerRole


class JobState:
    """
    The runtime status of a job.

    Parameters
    ----------
    spec: JobSpec
        The demand of the job.
    estimated_runtime_s: float, default=None
        The estimate of ``spec.runtime_at_max_s`` the scheduler sees. If
        None, the estimate is exact.

    Attributes
    ----------
    workload: Workload
        The total and remaining worker-seconds.
    phase: JobPhase
        Where the job is in its life cycle.
    workers: dict
        Maps worker ids to the :py:class:`Worker` currently running.
    first_start_s: float or None
        The first time the job started running.
    finish_s: float or None
        The time the job finished.
    preempt_count: int
        How often the job has been preempted.
    queuing_s: float
        Total time spent queued, across preemptions.
    service_s: float
        Total time spent holding workers, overheads included.
    overhead_s: float
        Part of ``service_s`` lost to preemption or scaling overheads.
    """
    spec: JobSpec
    workload: Workload
    phase: JobPhase
    workers: Dict[str, Worker]
    first_start_s: Optional[float]
    finish_s: Optional[float]
    preempt_count: int
    estimated_runtime_s: float
    queuing_s: float
    service_s: float
    overhead_s: float

    def __init__(self, spec: JobSpec, estimated_runtime_s: float = None):
        if not isinstance(spec, JobSpec):
            raise TypeError('`spec` should be a JobSpec')
        self.spec = spec
        self.workload = Workload(spec.total_workload, spec.total_workload)
        self.phase = JobPhase.QUEUED
        self.workers = {}
        self.first_start_s = None
        self.finish_s = None
        self.preempt_count = 0
        self.estimated_runtime_s = spec.runtime_at_max_s if estimated_runtime_s is None else float(estimated_runtime_s)
        self.queuing_s = 0.0
        self.service_s = 0.0
        self.overhead_s = 0.0

        # Simulator bookkeeping
        self.phase_since_s = float(spec.submit_s)
        self.progress_since_s = float(spec.submit_s)
        self.paused_until_s = float(spec.submit_s)
        self.pending_overhead_s = 0.0
        self.version = 0
        self._next_worker = 0

    @property
    def id(self) -> str:
        return self.spec.id

    @property
    def is_elastic(self) -> bool:
        return self.spec.is_elastic

    @property
    def is_waiting(self) -> bool:
        return self.phase in (JobPhase.QUEUED, JobPhase.PREEMPTED)

    @property
    def n_workers(self) -> int:
        return len(self.workers)

    def base_workers(self) -> List[Worker]:
        return [worker for worker in self.workers.values() if worker.role == WorkerRole.BASE]

    def flexible_workers(self) -> List[Worker]:
        return [worker for worker in self.workers.values() if worker.role == WorkerRole.FLEXIBLE]

    @property
    def n_flexible(self) -> int:
        return len(self.flexible_workers())

    def gpu_kinds(self) -> List[GpuKind]:
        return sorted({worker.kind for worker in self.workers.values()}, key=lambda kind: kind.value)

    def new_worker_id(self) -> str:
        worker_id = f'{self.id}/w{self._next_worker}'
        self._next_worker += 1
        return worker_id

    def estimated_remaining_workload(self) -> float:
        """ The remaining workload as the scheduler estimates it. """
        return self.workload.remaining * self.estimated_runtime_s / self.spec.runtime_at_max_s

    def max_running_time(self) -> float:
        """
        The estimated remaining running time when the job runs with only
        its base demand on training GPUs. For inelastic jobs, this is simply
        the estimated remaining running time.
        """
        return self.estimated_remaining_workload() / self.spec.min_workers

    def __repr__(self) -> str:
        return f'JobState({self.id}, {self.phase.value}, workers={self.n_workers}, remaining={self.workload.remaining:.3f})'
