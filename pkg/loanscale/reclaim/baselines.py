from typing import List

import numpy as np

from loanscale import utils
from loanscale.cluster import ClusterState
from loanscale.reclaim.ReclaimSelector import ReclaimSelector, ReclaimOutcome, jobs_per_server


class RandomSelector(ReclaimSelector):
    """
    Baseline reclaim policy which returns on-loan servers chosen uniformly
    at random, regardless of the jobs they host.

    The random stream is derived from ``seed`` and the time of the cluster
    snapshot, such that the same snapshot always gives the same selection.

    Parameters
    ----------
    seed: int, default=None
        Seed for the random generator.
    """
    seed: int

    def __init__(self, seed: int = None):
        if seed is not None:
            utils.check_integer('seed', seed, minimum=0)
        self.seed = seed

    def _select(self, cluster: ClusterState, n_r: int) -> List[str]:
        candidates = [server.id for server in cluster.on_loan_servers()]
        entropy = [0 if self.seed is None else self.seed, int(round(cluster.now_s * 1000))]
        rng = np.random.default_rng(entropy)
        chosen = rng.choice(len(candidates), size=n_r, replace=False)
        return [candidates[index] for index in chosen]


class SmallestCountFirst(ReclaimSelector):
    """
    Baseline reclaim policy which returns the on-loan servers hosting the
    fewest jobs, ties broken by the lowest server id.
    """

    def __init__(self):
        pass

    def _select(self, cluster: ClusterState, n_r: int) -> List[str]:
        hosted = jobs_per_server(cluster)
        ranked = sorted(hosted, key=lambda server_id: (len(hosted[server_id]), utils.natural_key(server_id)))
        return ranked[:n_r]


def select_servers_random(cluster: ClusterState, n_r: int, rng_seed: int = None) -> ReclaimOutcome:
    """ Select ``n_r`` servers to reclaim with a :py:class:`RandomSelector`. """
    return RandomSelector(rng_seed).select(cluster, n_r)


def select_servers_scf(cluster: ClusterState, n_r: int) -> ReclaimOutcome:
    """ Select ``n_r`` servers to reclaim with :py:class:`SmallestCountFirst`. """
    return SmallestCountFirst().select(cluster, n_r)
