import logging
from typing import Dict, List, Tuple

from loanscale import utils
from loanscale.cluster import JobState
from loanscale.allocation.Allocator import Allocator, AllocationPlan
from loanscale.allocation.knapsack import build_mckp, mckp_dp

logger = logging.getLogger(__name__)


def sort_jobs(queued: List[JobState]) -> List[JobState]:
    """
    Order jobs shortest first. The key of a job is its estimated remaining
    running time at base demand, which for an inelastic job is simply its
    estimated remaining running time. Ties are broken by submission time,
    then by id.

    Parameters
    ----------
    queued: list of JobState
        The jobs to sort.

    Returns
    -------
    ordered: list of JobState
        The jobs in ascending order of their key.
    """
    return sorted(queued, key=lambda job: (job.max_running_time(), job.spec.submit_s, utils.natural_key(job.id)))


def allocate_inelastic(sorted_jobs: List[JobState], capacity: int) -> Tuple[Dict[str, int], int]:
    """
    Grant the base demand of jobs in the given order while it fits. A job
    whose base demand exceeds the remaining capacity is skipped, and the
    walk continues with the next job.

    Parameters
    ----------
    sorted_jobs: list of JobState
        The jobs, in the order in which they are served.
    capacity: int
        The available GPUs.

    Returns
    -------
    base_grants: dict
        Maps the served jobs to their number of base workers.
    remaining: int
        The GPUs left after serving the base demands.
    """
    utils.check_integer('capacity', capacity, minimum=0)
    base_grants = {}
    remaining = capacity
    for job in sorted_jobs:
        demand = job.spec.min_workers * job.spec.gpus_per_worker
        if demand <= remaining:
            base_grants[job.id] = job.spec.min_workers
            remaining -= demand
    return base_grants, remaining


def allocate_lyra(queued: List[JobState], running_elastic: List[JobState], capacity: int, reshuffle: bool = True) -> AllocationPlan:
    """
    Allocate resources in two phases. First, the base demands of the
    waiting jobs are served shortest job first. Second, the capacity left
    is spread over the flexible demand of all elastic jobs (those just
    started and those already running) by solving a multiple-choice
    knapsack problem that maximizes the total reduction in running time.

    Parameters
    ----------
    queued: list of JobState
        The waiting jobs.
    running_elastic: list of JobState
        The running elastic jobs.
    capacity: int
        Idle GPUs plus the GPUs held by flexible workers of ``running_elastic``.
    reshuffle: bool, default=True
        Whether flexible workers of running jobs are available to this pass.
        If False, running jobs keep their current flexible workers, and the
        knapsack can only grant them more.

    Returns
    -------
    plan: AllocationPlan
        The started jobs with their worker counts, the flexible workers of
        every elastic job involved, and the jobs left waiting.
    """
    kept = {}
    if not reshuffle:
        kept = {job.id: job.n_flexible for job in running_elastic}
        capacity -= sum(job.n_flexible * job.spec.gpus_per_worker for job in running_elastic)
        if capacity < 0:
            raise ValueError('`capacity` should include the GPUs of the flexible workers of the running jobs')

    # Phase 1: base demands
    ordered = sort_jobs(queued)
    base_grants, remaining = allocate_inelastic(ordered, capacity)

    # Phase 2: flexible demands
    started = [job for job in ordered if job.id in base_grants]
    elastic = [job for job in started if job.is_elastic] + list(running_elastic)
    solution = mckp_dp(build_mckp(elastic, kept), remaining)

    plan = AllocationPlan()
    for job in elastic:
        item = solution.chosen.get(job.id)
        plan.flexible_grant[job.id] = item.flex_workers if item is not None else kept.get(job.id, 0)
    for job in started:
        plan.scheduled[job.id] = base_grants[job.id] + plan.flexible_grant.get(job.id, 0)
    plan.deferred = [job.id for job in ordered if job.id not in base_grants]

    logger.debug('Two-phase pass: %d started, %d deferred, %d flexible GPUs granted',
                 len(plan.scheduled), len(plan.deferred), solution.weight)
    return plan


class TwoPhaseAllocator(Allocator):
    """
    Allocator serving the base demand of waiting jobs shortest job first,
    and the flexible demand of elastic jobs through a multiple-choice
    knapsack. See :py:func:`allocate_lyra`.

    Parameters
    ----------
    reshuffle: bool, default=True
        Whether flexible workers of running jobs may be reassigned in a
        pass, such that they can make room for waiting jobs.
    """
    reshuffle: bool

    def __init__(self, reshuffle: bool = True):
        if not isinstance(reshuffle, bool):
            raise TypeError('`reshuffle` should be a bool')
        self.reshuffle = reshuffle

    def _allocate(self, queued: List[JobState], running_elastic: List[JobState], capacity: int) -> AllocationPlan:
        return allocate_lyra(queued, running_elastic, capacity, self.reshuffle)
