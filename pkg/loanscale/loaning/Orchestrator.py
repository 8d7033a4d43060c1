import dataclasses
import logging
from typing import Callable, Dict, List, Optional, Tuple

from loanscale import utils
from loanscale.cluster import ClusterState, JobPhase, ServerGroup, WorkerRole
from loanscale.reclaim import ReclaimSelector, ReclaimOutcome, InfeasibleReclaimError, PreemptionCostSelector

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class ReclaimResult:
    """
    The effect of reclaiming servers.

    Attributes
    ----------
    returned: list of str
        All servers handed back to the inference cluster, drained servers
        first.
    drained: list of str
        The servers handed back by scaling in flexible workers only.
    scaled_in: dict
        Maps jobs to the number of flexible workers they lost while draining.
    outcome: ReclaimOutcome
        The servers selected after draining, and the jobs preempted for them.
    """
    returned: List[str] = dataclasses.field(default_factory=list)
    drained: List[str] = dataclasses.field(default_factory=list)
    scaled_in: Dict[str, int] = dataclasses.field(default_factory=dict)
    outcome: ReclaimOutcome = dataclasses.field(default_factory=ReclaimOutcome)


def execute_loan(cluster: ClusterState, n: int) -> Tuple[List[str], int]:
    """
    Move idle inference servers into the training whitelist, lowest ids
    first.

    Parameters
    ----------
    cluster: ClusterState
        The cluster, which is modified.
    n: int
        The number of servers to loan.

    Returns
    -------
    moved: list of str
        The servers that are now on loan.
    shortfall: int
        How many servers could not be loaned because too few inference
        servers were idle.
    """
    utils.check_integer('n', n, minimum=0)
    idle = cluster.idle_inference_servers()
    moved = [server.id for server in idle[:n]]
    for server_id in moved:
        cluster.loan(server_id)
    shortfall = n - len(moved)
    if shortfall > 0:
        logger.warning('Loan shortfall: requested %d servers, only %d inference servers idle', n, len(moved))
    return moved, shortfall


def preempt_job(cluster: ClusterState, job_id: str) -> Dict[str, int]:
    """
    Stop every worker of a job and send it back to the queue. A job without
    checkpoints loses all of its progress.

    Returns
    -------
    freed: dict
        The GPUs freed per server.
    """
    job = cluster.job(job_id)
    freed = cluster.remove_all_workers(job_id)
    job.phase = JobPhase.PREEMPTED
    job.preempt_count += 1
    if not job.spec.checkpointing:
        job.workload.remaining = job.workload.total
    return freed


def execute_reclaim(cluster: ClusterState,
                    n: int,
                    reclaim_policy: ReclaimSelector = None,
                    before_change: Optional[Callable[[str], None]] = None) -> ReclaimResult:
    """
    Return ``n`` on-loan servers to the inference cluster in two stages.
    First, servers of the flexible group are drained by scaling in the
    flexible workers they host, which preempts nothing. Servers using the
    fewest GPUs are drained first. Second, the remaining demand is met by
    the given reclaim policy, and every job on the selected servers is
    preempted.

    Parameters
    ----------
    cluster: ClusterState
        The cluster, which is modified.
    n: int
        The number of servers to return.
    reclaim_policy: ReclaimSelector, default=None
        The policy for the second stage. Defaults to a
        :py:class:`~loanscale.reclaim.PreemptionCostSelector`.
    before_change: callable, default=None
        Called with the id of a job right before any of its workers is
        stopped.

    Returns
    -------
    result: ReclaimResult
        The returned servers, and how they were vacated.

    Raises
    ------
    InfeasibleReclaimError
        If ``n`` exceeds the number of on-loan servers.
    """
    utils.check_integer('n', n, minimum=0)
    n_on_loan = len(cluster.on_loan_servers())
    if n > n_on_loan:
        raise InfeasibleReclaimError(n, n_on_loan)
    reclaim_policy = reclaim_policy or PreemptionCostSelector()
    before_change = before_change or (lambda job_id: None)
    result = ReclaimResult()

    # Stage 1: drain the flexible group
    flexible = [server for server in cluster.on_loan_servers() if server.group == ServerGroup.LOAN_FLEXIBLE]
    flexible.sort(key=lambda server: (server.used_gpus, utils.natural_key(server.id)))
    for server in flexible[:n]:
        for job_id, worker_id in list(server.workers):
            if cluster.jobs[job_id].workers[worker_id].role != WorkerRole.FLEXIBLE:
                raise AssertionError(f'Server `{server.id}` of the flexible group hosts a base worker')
            before_change(job_id)
            cluster.remove_worker(job_id, worker_id)
            result.scaled_in[job_id] = result.scaled_in.get(job_id, 0) + 1
        cluster.return_server(server.id)
        result.drained.append(server.id)
    if len(result.drained) > 0:
        logger.debug('Drained %d servers of the flexible group', len(result.drained))

    # Stage 2: preempt jobs on the selected servers
    result.outcome = reclaim_policy.select(cluster, n - len(result.drained))
    for job_id in result.outcome.preempted_jobs:
        before_change(job_id)
        preempt_job(cluster, job_id)
    for server_id in result.outcome.selected_servers:
        cluster.return_server(server_id)

    result.returned = result.drained + result.outcome.selected_servers
    logger.info('Reclaimed %d servers: %d drained, %d jobs preempted', n, len(result.drained), result.outcome.n_preemptions)
    return result
