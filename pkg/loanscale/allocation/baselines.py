from typing import Dict, List, Optional

from loanscale import utils
from loanscale.cluster import JobState, JobSpec
from loanscale.allocation.Allocator import Allocator, AllocationPlan, Efficiency, flexible_gpus
from loanscale.allocation.TwoPhaseAllocator import sort_jobs, allocate_inelastic


def _arrival_order(jobs: List[JobState]) -> List[JobState]:
    return sorted(jobs, key=lambda job: (job.spec.submit_s, utils.natural_key(job.id)))


def allocate_fifo(queued: List[JobState], capacity: int) -> AllocationPlan:
    """
    Start jobs in order of arrival with their maximum number of workers,
    until the first job that does not fit. That job, and every job behind
    it, keeps waiting.

    Parameters
    ----------
    queued: list of JobState
        The waiting jobs.
    capacity: int
        The idle GPUs.

    Returns
    -------
    plan: AllocationPlan
        The allocation.
    """
    utils.check_integer('capacity', capacity, minimum=0)
    plan = AllocationPlan()
    remaining = capacity
    ordered = _arrival_order(queued)
    for position, job in enumerate(ordered):
        demand = job.spec.max_workers * job.spec.gpus_per_worker
        if demand > remaining:
            plan.deferred = [other.id for other in ordered[position:]]
            break
        plan.scheduled[job.id] = job.spec.max_workers
        if job.is_elastic:
            plan.flexible_grant[job.id] = job.spec.max_flexible_workers
        remaining -= demand
    return plan


def _linear(spec: JobSpec, n_workers: int) -> float:
    return 1.0


def allocate_afs(queued: List[JobState], running_elastic: List[JobState], capacity: int, efficiency: Optional[Efficiency] = None) -> AllocationPlan:
    """
    Serve the base demands shortest job first, and then repeatedly give one
    more worker to the elastic job whose throughput grows most per GPU.
    Ties are broken by the shortest remaining running time, then by id.

    Parameters
    ----------
    queued: list of JobState
        The waiting jobs.
    running_elastic: list of JobState
        The running elastic jobs, whose flexible workers are part of
        ``capacity``.
    capacity: int
        Idle GPUs plus the GPUs held by flexible workers of ``running_elastic``.
    efficiency: callable, default=None
        The scaling efficiency of a job at a worker count. If None, scaling
        is linear.

    Returns
    -------
    plan: AllocationPlan
        The allocation.
    """
    efficiency = efficiency or _linear
    ordered = sort_jobs(queued)
    base_grants, remaining = allocate_inelastic(ordered, capacity)

    started = [job for job in ordered if job.id in base_grants]
    elastic = [job for job in started if job.is_elastic] + list(running_elastic)
    workers = {job.id: job.spec.min_workers for job in elastic}

    def gain_per_gpu(job: JobState) -> float:
        n = workers[job.id]
        gain = (n + 1) * efficiency(job.spec, n + 1) - n * efficiency(job.spec, n)
        return gain / job.spec.gpus_per_worker

    def remaining_time(job: JobState) -> float:
        return job.estimated_remaining_workload() / workers[job.id]

    while True:
        candidates = [
            job for job in elastic
            if workers[job.id] < job.spec.max_workers and job.spec.gpus_per_worker <= remaining and gain_per_gpu(job) > 0
        ]
        if len(candidates) == 0:
            break
        best = min(candidates, key=lambda job: (-gain_per_gpu(job), remaining_time(job), utils.natural_key(job.id)))
        workers[best.id] += 1
        remaining -= best.spec.gpus_per_worker

    plan = AllocationPlan()
    for job in elastic:
        plan.flexible_grant[job.id] = workers[job.id] - job.spec.min_workers
    for job in started:
        plan.scheduled[job.id] = workers.get(job.id, base_grants[job.id])
    plan.deferred = [job.id for job in ordered if job.id not in base_grants]
    return plan


def allocate_gandiva(running_elastic: List[JobState], idle_gpus: int, pending_empty: bool, current: Dict[str, int] = None) -> Dict[str, int]:
    """
    Scale out elastic jobs while the cluster is under-utilized, i.e., while
    there are idle GPUs but no waiting jobs. Jobs receive one extra worker
    each in turn, in order of id, until no more worker fits.

    Parameters
    ----------
    running_elastic: list of JobState
        The elastic jobs that may grow.
    idle_gpus: int
        The idle GPUs.
    pending_empty: bool
        Whether no job is waiting. If False, nothing is granted.
    current: dict, default=None
        The current number of workers of each job. Defaults to the number of
        running workers.

    Returns
    -------
    grants: dict
        Maps job ids to the number of extra workers they receive. Jobs that
        receive nothing are absent.
    """
    utils.check_integer('idle_gpus', idle_gpus, minimum=0)
    if not pending_empty:
        return {}
    current = current or {job.id: job.n_workers for job in running_elastic}
    ordered = sorted(running_elastic, key=lambda job: utils.natural_key(job.id))
    grants = {}
    granted_in_round = True
    while granted_in_round:
        granted_in_round = False
        for job in ordered:
            headroom = job.spec.max_workers - current[job.id] - grants.get(job.id, 0)
            if headroom > 0 and job.spec.gpus_per_worker <= idle_gpus:
                grants[job.id] = grants.get(job.id, 0) + 1
                idle_gpus -= job.spec.gpus_per_worker
                granted_in_round = True
    return grants


class FifoAllocator(Allocator):
    """
    Baseline allocator starting jobs in order of arrival with their full
    demand, without scaling running jobs. See :py:func:`allocate_fifo`.
    """

    def __init__(self):
        pass

    def _allocate(self, queued: List[JobState], running_elastic: List[JobState], capacity: int) -> AllocationPlan:
        # Running jobs keep their flexible workers.
        return allocate_fifo(queued, capacity - flexible_gpus(running_elastic))


class AfsAllocator(Allocator):
    """
    Baseline allocator giving extra workers one at a time to the job with
    the largest throughput gain per GPU. See :py:func:`allocate_afs`.

    Parameters
    ----------
    efficiency: callable, default=None
        The scaling efficiency of a job at a worker count. If None, the
        scaling model of the simulated scenario is used, or linear scaling
        outside a simulation.
    """

    def __init__(self, efficiency: Optional[Efficiency] = None):
        self.efficiency = efficiency
        self.scaling_model_ = None

    def use_scaling_model(self, efficiency: Efficiency) -> None:
        self.scaling_model_ = efficiency

    def _allocate(self, queued: List[JobState], running_elastic: List[JobState], capacity: int) -> AllocationPlan:
        return allocate_afs(queued, running_elastic, capacity, self.efficiency or self.scaling_model_)


class GandivaAllocator(Allocator):
    """
    Baseline allocator that starts waiting jobs in order of arrival with
    their base demand, and grows elastic jobs opportunistically when no job
    is waiting. Flexible workers of running jobs are given up only when
    waiting jobs need the GPUs.
    """

    def __init__(self):
        pass

    def _allocate(self, queued: List[JobState], running_elastic: List[JobState], capacity: int) -> AllocationPlan:
        plan = AllocationPlan()
        remaining = capacity
        ordered = _arrival_order(queued)
        for position, job in enumerate(ordered):
            demand = job.spec.min_workers * job.spec.gpus_per_worker
            if demand > remaining:
                plan.deferred = [other.id for other in ordered[position:]]
                break
            plan.scheduled[job.id] = job.spec.min_workers
            if job.is_elastic:
                plan.flexible_grant[job.id] = 0
            remaining -= demand

        for job in sorted(running_elastic, key=lambda j: utils.natural_key(j.id)):
            keep = min(job.n_flexible, remaining // job.spec.gpus_per_worker)
            plan.flexible_grant[job.id] = keep
            remaining -= keep * job.spec.gpus_per_worker

        started = [job for job in ordered if job.id in plan.scheduled and job.is_elastic]
        growable = list(running_elastic) + started
        current = {job.id: job.spec.min_workers + plan.flexible_grant[job.id] for job in growable}
        grants = allocate_gandiva(growable, remaining, len(plan.deferred) == 0, current)
        for job_id, extra in grants.items():
            plan.flexible_grant[job_id] += extra
            if job_id in plan.scheduled:
                plan.scheduled[job_id] += extra
        return plan
