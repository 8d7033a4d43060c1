import itertools

from loanscale import utils
from loanscale.cluster import ClusterState
from loanscale.reclaim import ReclaimOutcome, InfeasibleReclaimError, outcome_of_selection

MAX_EXHAUSTIVE_SERVERS = 20


class GuardExceededError(ValueError):
    """
    Raised when an instance is too large for an exhaustive oracle.

    Parameters
    ----------
    what: str
        The quantity that is too large.
    size: int
        The size of the instance.
    limit: int
        The largest size the oracle accepts.
    """

    def __init__(self, what: str, size: int, limit: int):
        super().__init__(f'Too many {what} for an exhaustive search: {size} > {limit}')
        self.what = what
        self.size = size
        self.limit = limit


def exhaustive_reclaim(cluster: ClusterState, n_r: int, max_servers: int = MAX_EXHAUSTIVE_SERVERS) -> ReclaimOutcome:
    """
    Find the servers to reclaim that preempt the fewest jobs, by trying
    every subset of ``n_r`` on-loan servers. Among the optimal subsets, the
    first one in lexicographic order of the natural server ids is returned.

    Parameters
    ----------
    cluster: ClusterState
        The cluster. It is not modified.
    n_r: int
        The number of servers to reclaim.
    max_servers: int, default=20
        The largest number of on-loan servers to search over.

    Returns
    -------
    outcome: ReclaimOutcome
        An optimal selection, with ``n_preemptions`` the minimum number of
        preempted jobs.

    Raises
    ------
    GuardExceededError
        If more than ``max_servers`` servers are on loan.
    InfeasibleReclaimError
        If ``n_r`` exceeds the number of on-loan servers.
    """
    utils.check_integer('n_r', n_r, minimum=0)
    on_loan = [server.id for server in cluster.on_loan_servers()]
    if len(on_loan) > max_servers:
        raise GuardExceededError('on-loan servers', len(on_loan), max_servers)
    if n_r > len(on_loan):
        raise InfeasibleReclaimError(n_r, len(on_loan))
    if n_r == 0:
        return ReclaimOutcome()

    # One bit per job
    bits = {job_id: 1 << index for index, job_id in enumerate(utils.sorted_ids(cluster.jobs))}
    masks = {}
    for server_id in on_loan:
        mask = 0
        for job_id in cluster.servers[server_id].job_ids():
            mask |= bits[job_id]
        masks[server_id] = mask

    best_subset, best_count = None, None
    for subset in itertools.combinations(on_loan, n_r):
        mask = 0
        for server_id in subset:
            mask |= masks[server_id]
        count = bin(mask).count('1')
        if best_count is None or count < best_count:
            best_subset, best_count = subset, count
            if count == 0:
                break
    return outcome_of_selection(cluster, list(best_subset))
