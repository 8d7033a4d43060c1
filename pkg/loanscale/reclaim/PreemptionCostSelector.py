from fractions import Fraction
from typing import Dict, List

from loanscale import utils
from loanscale.cluster import ClusterState
from loanscale.reclaim.ReclaimSelector import ReclaimSelector, ReclaimOutcome, jobs_per_server


class PreemptionCostSelector(ReclaimSelector):
    """
    Select the servers to reclaim greedily by their preemption cost. The
    preemption cost of a server is the sum over the jobs it hosts of the
    fraction of the job's servers it represents, i.e., a job spanning
    :math:`|S_j|` servers contributes :math:`1/|S_j|` to each of them. The
    selector repeatedly takes the cheapest server, preempts its jobs, and
    lowers the costs of the other servers these jobs were running on, as
    these jobs no longer need to be preempted there.

    If only one server is requested, the server hosting the fewest jobs is
    returned instead, as this is exactly the choice with fewest preemptions.

    Ties are broken by the lowest server id.

    Examples
    --------
    >>> from loanscale.data import demonstration_reclaim_cluster
    >>> from loanscale.reclaim import PreemptionCostSelector
    >>> outcome = PreemptionCostSelector().select(demonstration_reclaim_cluster(), 2)
    >>> outcome.selected_servers, outcome.preempted_jobs
    (['s1', 's2'], ['a'])
    """

    def __init__(self):
        pass

    def _select(self, cluster: ClusterState, n_r: int) -> List[str]:
        hosted = jobs_per_server(cluster)
        if n_r == 1:
            return [min(hosted, key=lambda server_id: (len(hosted[server_id]), utils.natural_key(server_id)))]

        span = {
            job_id: len(cluster.servers_of_job(job_id))
            for job_ids in hosted.values()
            for job_id in job_ids
        }
        costs = _exact_costs(hosted, span)
        selected = []
        while len(selected) < n_r:
            best = min(costs, key=lambda server_id: (costs[server_id], utils.natural_key(server_id)))
            selected.append(best)
            del costs[best]
            for job_id in hosted[best]:
                for server_id in costs:
                    if job_id in hosted[server_id]:
                        hosted[server_id].remove(job_id)
                        costs[server_id] -= Fraction(1, span[job_id])
        return selected


def _exact_costs(hosted: Dict[str, List[str]], span: Dict[str, int]) -> Dict[str, Fraction]:
    return {
        server_id: sum((Fraction(1, span[job_id]) for job_id in job_ids), Fraction(0))
        for server_id, job_ids in hosted.items()
    }


def preemption_costs(cluster: ClusterState) -> Dict[str, float]:
    """
    Compute the preemption cost of every on-loan server.

    Parameters
    ----------
    cluster: ClusterState
        The cluster. The servers of each job are counted over both pools.

    Returns
    -------
    costs: dict
        Maps each on-loan server id to its preemption cost. Idle servers
        have cost 0.
    """
    hosted = jobs_per_server(cluster)
    span = {job_id: len(cluster.servers_of_job(job_id)) for job_ids in hosted.values() for job_id in job_ids}
    return {server_id: float(cost) for server_id, cost in _exact_costs(hosted, span).items()}


def select_servers_lyra(cluster: ClusterState, n_r: int) -> ReclaimOutcome:
    """ Select ``n_r`` servers to reclaim with a :py:class:`PreemptionCostSelector`. """
    return PreemptionCostSelector().select(cluster, n_r)
