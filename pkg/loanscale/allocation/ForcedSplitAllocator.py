from typing import Dict, List

from loanscale import utils
from loanscale.cluster import JobState
from loanscale.allocation.Allocator import Allocator, AllocationPlan
from loanscale.allocation.TwoPhaseAllocator import TwoPhaseAllocator


class ForcedSplitAllocator(Allocator):
    """
    Pin some jobs to a fixed number of workers until the first of them
    finishes, and let another allocator decide everything else. Once a
    pinned job finishes, the pins are lifted, such that the surviving jobs
    are immediately scaled by the wrapped allocator.

    Parameters
    ----------
    initial_split: dict
        Maps job ids to their pinned number of workers.
    allocator: Allocator, default=None
        The allocator for the jobs that are not pinned, and for all jobs once
        the pins are lifted. Defaults to a :py:class:`TwoPhaseAllocator`.

    Examples
    --------
    >>> from loanscale.allocation import ForcedSplitAllocator
    >>> print(ForcedSplitAllocator({'A': 2, 'B': 6}))
    ForcedSplitAllocator(initial_split={'A': 2, 'B': 6})
    """
    initial_split: Dict[str, int]
    allocator: Allocator

    def __init__(self, initial_split: Dict[str, int], allocator: Allocator = None):
        if not isinstance(initial_split, dict) or not all(isinstance(job_id, str) for job_id in initial_split):
            raise TypeError('`initial_split` should be a dictionary with job ids as keys')
        for job_id, workers in initial_split.items():
            utils.check_integer(f'initial_split[{job_id}]', workers, minimum=1)
        if allocator is not None and not isinstance(allocator, Allocator):
            raise TypeError('`allocator` should be an Allocator')
        self.initial_split = initial_split
        self.allocator = allocator
        self._pinned = True
        self._inner = allocator if allocator is not None else TwoPhaseAllocator()

    def reset(self) -> None:
        self._pinned = True
        self._inner.reset()

    def use_scaling_model(self, efficiency) -> None:
        self._inner.use_scaling_model(efficiency)

    def on_completion(self, job_id: str) -> None:
        if job_id in self.initial_split:
            self._pinned = False
        self._inner.on_completion(job_id)

    def _allocate(self, queued: List[JobState], running_elastic: List[JobState], capacity: int) -> AllocationPlan:
        if not self._pinned:
            return self._inner.allocate(queued, running_elastic, capacity)

        plan = AllocationPlan()
        remaining = capacity
        for job in running_elastic:
            if job.id in self.initial_split:
                flexible = self._pinned_workers(job) - job.spec.min_workers
                plan.flexible_grant[job.id] = flexible
                remaining -= flexible * job.spec.gpus_per_worker
        for job in queued:
            if job.id in self.initial_split:
                workers = self._pinned_workers(job)
                if workers * job.spec.gpus_per_worker <= remaining:
                    plan.scheduled[job.id] = workers
                    if job.is_elastic:
                        plan.flexible_grant[job.id] = workers - job.spec.min_workers
                    remaining -= workers * job.spec.gpus_per_worker
                else:
                    plan.deferred.append(job.id)

        others = self._inner.allocate(
            [job for job in queued if job.id not in self.initial_split],
            [job for job in running_elastic if job.id not in self.initial_split],
            max(remaining, 0)
        )
        return plan.merge(others)

    def _pinned_workers(self, job: JobState) -> int:
        workers = self.initial_split[job.id]
        if not job.spec.min_workers <= workers <= job.spec.max_workers:
            raise ValueError(f'Job `{job.id}` cannot run with {workers} workers, its range is [{job.spec.min_workers}, {job.spec.max_workers}]')
        return workers
