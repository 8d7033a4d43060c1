import dataclasses
import logging
from typing import Dict, List, Optional

from loanscale import utils
from loanscale.allocation import AllocationPlan
from loanscale.cluster import ClusterState, JobState, GpuKind, ServerGroup, WorkerRole

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Assignment:
    job_id: str
    worker_index: int
    server_id: str
    role: WorkerRole


@dataclasses.dataclass
class PlacementPlan:
    """
    The servers chosen for the workers of an allocation.

    Attributes
    ----------
    assignments: list of Assignment
        The workers to start, in the order they were placed.
    new_servers_opened: list of str
        Servers that were empty before this placement and host a worker
        after it.
    deferred: list of str
        Jobs for which at least one worker did not fit anywhere. None of
        their workers are placed.
    """
    assignments: List[Assignment] = dataclasses.field(default_factory=list)
    new_servers_opened: List[str] = dataclasses.field(default_factory=list)
    deferred: List[str] = dataclasses.field(default_factory=list)

    def placed_jobs(self) -> List[str]:
        return list(dict.fromkeys(assignment.job_id for assignment in self.assignments))


class _PlacementState:
    """ The free GPUs and groups of the servers, as placement proceeds. """

    def __init__(self, cluster: ClusterState, flexible_group: bool):
        self.cluster = cluster
        self.flexible_group = flexible_group
        self.free = {server_id: cluster.servers[server_id].free_gpus for server_id in utils.sorted_ids(cluster.whitelist_training)}
        self.group = {server_id: cluster.servers[server_id].group for server_id in self.free}
        self.opened = []

    def is_empty(self, server_id: str) -> bool:
        return self.free[server_id] == self.cluster.servers[server_id].total_gpus

    def pools(self, job: JobState, role: WorkerRole) -> List[List[str]]:
        training = [server_id for server_id in self.free if self.group[server_id] == ServerGroup.TRAINING_POOL]
        if not job.spec.gpu_flexible:
            return [training]
        on_loan = [server_id for server_id in self.free if self.group[server_id] != ServerGroup.TRAINING_POOL]
        if not self.flexible_group:
            loan_pool = on_loan
        elif role == WorkerRole.BASE:
            loan_pool = [server_id for server_id in on_loan if self.group[server_id] in (ServerGroup.LOAN_UNGROUPED, ServerGroup.LOAN_BASE)]
        else:
            loan_pool = [server_id for server_id in on_loan if self.group[server_id] in (ServerGroup.LOAN_UNGROUPED, ServerGroup.LOAN_FLEXIBLE)]
        if job.is_elastic:
            return [loan_pool, training]
        return [training, loan_pool]

    def best_fit(self, pool: List[str], gpus: int, kind: Optional[GpuKind]) -> Optional[str]:
        fitting = [
            server_id for server_id in pool
            if self.free[server_id] >= gpus and (kind is None or self.cluster.servers[server_id].kind == kind)
        ]
        non_empty = [server_id for server_id in fitting if not self.is_empty(server_id)]
        if len(non_empty) > 0:
            return min(non_empty, key=lambda server_id: (self.free[server_id] - gpus, utils.natural_key(server_id)))
        if len(fitting) > 0:
            return fitting[0]
        return None

    def assign(self, server_id: str, gpus: int, role: WorkerRole) -> None:
        if self.is_empty(server_id):
            self.opened.append(server_id)
        self.free[server_id] -= gpus
        if self.group[server_id] == ServerGroup.TRAINING_POOL:
            return
        wanted = ServerGroup.LOAN_BASE if role == WorkerRole.BASE else ServerGroup.LOAN_FLEXIBLE
        if self.group[server_id] == ServerGroup.LOAN_UNGROUPED:
            self.group[server_id] = wanted
        elif self.group[server_id] != wanted:
            self.group[server_id] = ServerGroup.LOAN_BASE

    def snapshot(self):
        return dict(self.free), dict(self.group), list(self.opened)

    def restore(self, snapshot) -> None:
        self.free, self.group, self.opened = snapshot


def _requests(plan: AllocationPlan, cluster: ClusterState) -> Dict[str, List[WorkerRole]]:
    requests = {}
    for job_id, workers in plan.scheduled.items():
        job = cluster.job(job_id)
        n_base = job.spec.min_workers
        requests[job_id] = [WorkerRole.BASE] * n_base + [WorkerRole.FLEXIBLE] * (workers - n_base)
    for job_id, flexible in plan.flexible_grant.items():
        if job_id in plan.scheduled:
            continue
        extra = flexible - cluster.job(job_id).n_flexible
        if extra > 0:
            requests[job_id] = [WorkerRole.FLEXIBLE] * extra
    return requests


def place_workers(plan: AllocationPlan, cluster: ClusterState, flexible_group: bool = True) -> PlacementPlan:
    """
    Place the workers of an allocation on servers with best-fit decreasing
    bin packing. Jobs are handled in decreasing order of their per-worker
    GPU demand (ties by id), base workers before flexible workers. Each
    worker goes to the server of its most preferred pool that is already
    in use and leaves the fewest GPUs free; an empty server of that pool is
    only opened if no server in use fits. Pools are preferred as follows:

    - workers of inelastic jobs: training servers, then on-loan servers;
    - base workers of elastic jobs: on-loan servers hosting base workers,
      then training servers;
    - flexible workers of elastic jobs: on-loan servers hosting flexible
      workers, then training servers.

    On-loan servers are only candidates for jobs that may run on inference
    GPUs, and an empty on-loan server qualifies for both groups. Workers of
    a job that cannot span GPU kinds all go to servers of the same kind.

    Parameters
    ----------
    plan: AllocationPlan
        The allocation to place. Started jobs get all their workers, and
        running jobs get the flexible workers they miss with respect to
        their grant.
    cluster: ClusterState
        The cluster, with the scale-ins of the plan already applied. It is
        not modified.
    flexible_group: bool, default=True
        Whether base and flexible workers of elastic jobs are kept on
        separate on-loan servers. If False, any on-loan server is a
        candidate for any worker.

    Returns
    -------
    placement: PlacementPlan
        The assignments. A job for which some worker cannot be placed is
        rolled back entirely and listed as deferred.
    """
    requests = _requests(plan, cluster)
    state = _PlacementState(cluster, flexible_group)
    placement = PlacementPlan()

    order = sorted(requests, key=lambda job_id: (-cluster.job(job_id).spec.gpus_per_worker, utils.natural_key(job_id)))
    for job_id in order:
        job = cluster.job(job_id)
        gpus = job.spec.gpus_per_worker
        kinds = job.gpu_kinds()
        kind = kinds[0] if not job.spec.hetero_capable and len(kinds) == 1 else None

        snapshot = state.snapshot()
        assignments = []
        for index, role in enumerate(requests[job_id]):
            server_id = None
            for pool in state.pools(job, role):
                server_id = state.best_fit(pool, gpus, kind)
                if server_id is not None:
                    break
            if server_id is None:
                break
            state.assign(server_id, gpus, role)
            assignments.append(Assignment(job_id, index, server_id, role))
            if not job.spec.hetero_capable:
                kind = cluster.servers[server_id].kind

        if len(assignments) < len(requests[job_id]):
            state.restore(snapshot)
            placement.deferred.append(job_id)
            logger.debug('Rolled back placement of job %s: %d of %d workers fit', job_id, len(assignments), len(requests[job_id]))
        else:
            placement.assignments.extend(assignments)

    placement.new_servers_opened = state.opened
    return placement
