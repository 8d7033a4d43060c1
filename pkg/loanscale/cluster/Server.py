import enum
from typing import Dict, Tuple

from loanscale import utils


class GpuKind(enum.Enum):
    """
    The kind of GPUs a server carries. Valid options are:

    - ``TRAINING``: GPUs of the training cluster, the unit of progress.
    - ``INFERENCE``: GPUs of the inference cluster, which can be loaned
      to training jobs but are slower at training.
    """
    TRAINING = 'Training'
    INFERENCE = 'Inference'


class ServerGroup(enum.Enum):
    """
    The group a server belongs to. Valid options are:

    - ``TRAINING_POOL``: a server of the training cluster.
    - ``INFERENCE``: an inference server that is not on loan.
    - ``LOAN_UNGROUPED``: an empty on-loan server.
    - ``LOAN_BASE``: an on-loan server hosting base workers (of elastic
      jobs) or workers of inelastic jobs.
    - ``LOAN_FLEXIBLE``: an on-loan server hosting only flexible workers,
      which can be drained without preempting any job.
    """
    TRAINING_POOL = 'TrainingPool'
    INFERENCE = 'Inference'
    LOAN_UNGROUPED = 'LoanUngrouped'
    LOAN_BASE = 'LoanBase'
    LOAN_FLEXIBLE = 'LoanFlexible'


DEFAULT_SPEED_FACTOR = {
    GpuKind.TRAINING: 1.0,
    GpuKind.INFERENCE: 0.25
}


class Server:
    """
    A physical GPU server, the unit of capacity loaning.

    Parameters
    ----------
    id: str
        Unique identifier of the server.
    kind: GpuKind
        The kind of GPUs on this server.
    total_gpus: int, default=8
        The number of GPUs on this server.
    speed_factor: float, default=None
        Training progress per worker-second relative to a training GPU. If
        None, the default of ``kind`` is used (1.0 for training, 0.25 for
        inference GPUs).

    Attributes
    ----------
    free_gpus: int
        The number of GPUs not used by any worker.
    on_loan: bool
        Whether this (inference) server is currently loaned to training.
    group: ServerGroup
        The group of this server.
    workers: dict
        Maps ``(job_id, worker_id)`` to the number of GPUs that worker uses.
    """
    id: str
    kind: GpuKind
    total_gpus: int
    speed_factor: float
    free_gpus: int
    on_loan: bool
    group: ServerGroup
    workers: Dict[Tuple[str, str], int]

    def __init__(self, id: str, kind: GpuKind, total_gpus: int = 8, speed_factor: float = None):
        if not isinstance(id, str):
            raise TypeError('`id` should be a string')
        if not isinstance(kind, GpuKind):
            raise TypeError('`kind` should be a GpuKind')
        utils.check_integer('total_gpus', total_gpus, minimum=1)
        if speed_factor is None:
            speed_factor = DEFAULT_SPEED_FACTOR[kind]
        utils.check_fraction('speed_factor', speed_factor, allow_zero=False)

        self.id = id
        self.kind = kind
        self.total_gpus = total_gpus
        self.speed_factor = float(speed_factor)
        self.free_gpus = total_gpus
        self.on_loan = False
        self.group = ServerGroup.TRAINING_POOL if kind == GpuKind.TRAINING else ServerGroup.INFERENCE
        self.workers = {}

    @property
    def used_gpus(self) -> int:
        return self.total_gpus - self.free_gpus

    def is_empty(self) -> bool:
        return len(self.workers) == 0

    def job_ids(self):
        """ The ids of the jobs with at least one worker on this server, in order of arrival on the server. """
        return list(dict.fromkeys(job_id for job_id, _ in self.workers))

    def __repr__(self) -> str:
        return f'Server({self.id}, {self.kind.value}, free={self.free_gpus}/{self.total_gpus}, {self.group.value})'
