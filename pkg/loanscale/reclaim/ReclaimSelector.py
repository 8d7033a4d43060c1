import abc
import dataclasses
from typing import Dict, List

from loanscale import utils
from loanscale.PrettyPrintable import PrettyPrintable
from loanscale.cluster import ClusterState


class InfeasibleReclaimError(ValueError):
    """
    Raised when more servers are requested back than are on loan.

    Parameters
    ----------
    requested: int
        The number of servers requested.
    max_reclaimable: int
        The number of servers currently on loan.
    """

    def __init__(self, requested: int, max_reclaimable: int):
        super().__init__(f'Cannot reclaim {requested} servers, only {max_reclaimable} are on loan')
        self.requested = requested
        self.max_reclaimable = max_reclaimable


@dataclasses.dataclass
class ReclaimOutcome:
    """
    The servers chosen to return to the inference cluster, and the jobs
    that must be preempted to vacate them.

    Attributes
    ----------
    selected_servers: list of str
        The selected servers, in order of selection.
    preempted_jobs: list of str
        The jobs with at least one worker on a selected server, each listed
        once, in natural id order.
    excess_freed_gpus: int
        The GPUs that the preempted jobs vacate on servers that were not
        selected.
    """
    selected_servers: List[str] = dataclasses.field(default_factory=list)
    preempted_jobs: List[str] = dataclasses.field(default_factory=list)
    excess_freed_gpus: int = 0

    @property
    def n_preemptions(self) -> int:
        return len(self.preempted_jobs)

    def collateral_damage(self, gpus_per_server: int, n_requested: int = None) -> float:
        """
        The GPUs vacated in excess of the demand, as a fraction of the
        demanded capacity. Returns 0 for an empty demand.
        """
        n_requested = len(self.selected_servers) if n_requested is None else n_requested
        if n_requested == 0:
            return 0.0
        return self.excess_freed_gpus / (n_requested * gpus_per_server)


def outcome_of_selection(cluster: ClusterState, selected: List[str]) -> ReclaimOutcome:
    """
    Recount the preemptions and the collateral damage of returning the
    given servers, directly from the occupancy of the cluster.
    """
    selected_set = set(selected)
    preempted = set()
    for server_id in selected:
        preempted.update(cluster.server(server_id).job_ids())

    excess = 0
    for job_id in preempted:
        job = cluster.job(job_id)
        excess += sum(job.spec.gpus_per_worker for worker in job.workers.values() if worker.server_id not in selected_set)
    return ReclaimOutcome(list(selected), utils.sorted_ids(preempted), excess)


class ReclaimSelector(PrettyPrintable):
    """
    Abstract base class of the policies that choose which on-loan servers
    to return to the inference cluster, when they cannot be drained without
    preempting jobs.
    """

    def select(self, cluster: ClusterState, n_r: int) -> ReclaimOutcome:
        """
        Select ``n_r`` on-loan servers to return.

        Parameters
        ----------
        cluster: ClusterState
            A snapshot of the cluster. It is not modified.
        n_r: int
            The number of servers to return.

        Returns
        -------
        outcome: ReclaimOutcome
            The selected servers and the preemptions they imply.

        Raises
        ------
        TypeError
            If ``n_r`` is not an integer.
        ValueError
            If ``n_r`` is negative.
        InfeasibleReclaimError
            If ``n_r`` exceeds the number of on-loan servers.
        """
        utils.check_integer('n_r', n_r, minimum=0)
        n_on_loan = len(cluster.on_loan_servers())
        if n_r > n_on_loan:
            raise InfeasibleReclaimError(n_r, n_on_loan)
        if n_r == 0:
            return ReclaimOutcome()
        selected = self._select(cluster, n_r)
        return outcome_of_selection(cluster, selected)

    @abc.abstractmethod
    def _select(self, cluster: ClusterState, n_r: int) -> List[str]:
        """ Effectively select ``0 < n_r <= |on-loan|`` server ids. """


def jobs_per_server(cluster: ClusterState) -> Dict[str, List[str]]:
    """ Map each on-loan server to the ids of the jobs it hosts. """
    return {server.id: server.job_ids() for server in cluster.on_loan_servers()}
