import abc
import dataclasses
from typing import Callable, Dict, List

from loanscale import utils
from loanscale.PrettyPrintable import PrettyPrintable
from loanscale.cluster import JobSpec, JobState

# Maps a job and a worker count to the scaling efficiency at that count.
Efficiency = Callable[[JobSpec, int], float]


@dataclasses.dataclass
class AllocationPlan:
    """
    The outcome of one scheduling pass.

    Attributes
    ----------
    scheduled: dict
        Maps each waiting job that starts in this pass to its total number
        of workers.
    flexible_grant: dict
        Maps elastic jobs (started in this pass or already running) to the
        number of workers they get beyond their base demand. A running job
        that is not listed keeps its current flexible workers.
    deferred: list of str
        The waiting jobs that remain queued.
    """
    scheduled: Dict[str, int] = dataclasses.field(default_factory=dict)
    flexible_grant: Dict[str, int] = dataclasses.field(default_factory=dict)
    deferred: List[str] = dataclasses.field(default_factory=list)

    def merge(self, other: 'AllocationPlan') -> 'AllocationPlan':
        return AllocationPlan(
            scheduled={**self.scheduled, **other.scheduled},
            flexible_grant={**self.flexible_grant, **other.flexible_grant},
            deferred=self.deferred + other.deferred
        )

    def gpus(self, jobs: Dict[str, JobState]) -> int:
        """
        The GPUs this plan hands out: all workers of the started jobs and
        the flexible workers of the running jobs it lists.
        """
        total = 0
        for job_id, workers in self.scheduled.items():
            total += workers * jobs[job_id].spec.gpus_per_worker
        for job_id, flexible in self.flexible_grant.items():
            if job_id not in self.scheduled:
                total += flexible * jobs[job_id].spec.gpus_per_worker
        return total


class Allocator(PrettyPrintable):
    """
    Abstract base class of the policies deciding how many workers each job
    gets in a scheduling pass. Placement of the workers on servers happens
    afterwards, see :py:func:`~loanscale.placement.place_workers`.
    """

    def allocate(self, queued: List[JobState], running_elastic: List[JobState], capacity: int) -> AllocationPlan:
        """
        Decide the worker counts of a scheduling pass.

        Parameters
        ----------
        queued: list of JobState
            The jobs waiting to start, in arrival order.
        running_elastic: list of JobState
            The elastic jobs currently running.
        capacity: int
            The GPUs available to this pass: the idle GPUs in the training
            whitelist plus the GPUs held by flexible workers of the jobs in
            ``running_elastic``.

        Returns
        -------
        plan: AllocationPlan
            The allocation decided by this policy.

        Raises
        ------
        TypeError
            If the jobs are not lists of JobState or ``capacity`` is no integer.
        ValueError
            If ``capacity`` is negative.
        """
        if not utils.is_valid_list(queued, JobState):
            raise TypeError('`queued` should be a list of JobState')
        if not utils.is_valid_list(running_elastic, JobState):
            raise TypeError('`running_elastic` should be a list of JobState')
        utils.check_integer('capacity', capacity, minimum=0)
        return self._allocate(queued, running_elastic, capacity)

    @abc.abstractmethod
    def _allocate(self, queued: List[JobState], running_elastic: List[JobState], capacity: int) -> AllocationPlan:
        """ Effectively decide the allocation of one pass. """

    def reset(self) -> None:
        """ Forget any state of a previous simulation. """

    def use_scaling_model(self, efficiency: Efficiency) -> None:
        """
        Receive the scaling efficiency of the simulated scenario. Policies
        that do not reason about throughput ignore it.
        """

    def on_completion(self, job_id: str) -> None:
        """ Notify this policy that a job finished. """


def flexible_gpus(jobs: List[JobState]) -> int:
    return sum(job.n_flexible * job.spec.gpus_per_worker for job in jobs)
