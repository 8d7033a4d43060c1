import numpy as np
import pytest

from loanscale.cluster import ClusterState, Server, GpuKind, JobSpec, JobState, JobPhase, WorkerRole
from loanscale.data import demonstration_reclaim_cluster, contention_jobs, mixed_gpu_jobs


@pytest.fixture
def reclaim_cluster() -> ClusterState:
    return demonstration_reclaim_cluster()


@pytest.fixture
def contention() -> list:
    return contention_jobs()


@pytest.fixture
def mixed_gpu() -> list:
    return mixed_gpu_jobs()


@pytest.fixture
def small_cluster() -> ClusterState:
    """ Two training servers and two inference servers of 8 GPUs, nothing on loan. """
    return ClusterState.from_sizes(2, 2, 8)


def _start_job(cluster: ClusterState, spec: JobSpec, servers: list, roles: list = None) -> JobState:
    job = JobState(spec)
    cluster.add_job(job)
    job.phase = JobPhase.RUNNING
    roles = roles or [WorkerRole.BASE] * len(servers)
    for server_id, role in zip(servers, roles):
        cluster.place_worker(spec.id, server_id, role)
    return job


@pytest.fixture
def start_job():
    """ Add a running job to a cluster, with one worker on each of the given servers. """
    return _start_job


def _random_on_loan_layout(rng: np.random.Generator, max_servers: int = 12, max_jobs: int = 15, max_span: int = 3) -> ClusterState:
    n_servers = int(rng.integers(2, max_servers + 1))
    servers = [Server(f's{index}', GpuKind.INFERENCE) for index in range(1, n_servers + 1)]
    cluster = ClusterState(servers)
    for server in servers:
        cluster.loan(server.id)

    for index in range(int(rng.integers(1, max_jobs + 1))):
        gpus = int(rng.choice([1, 2, 4]))
        span = int(rng.integers(1, max_span + 1))
        candidates = [server.id for server in cluster.on_loan_servers() if server.free_gpus >= gpus]
        if len(candidates) < span:
            continue
        chosen = sorted(int(position) for position in rng.choice(len(candidates), size=span, replace=False))
        _start_job(cluster, JobSpec(f'j{index}', 0, gpus, span, span, 100.0, gpu_flexible=True), [candidates[position] for position in chosen])
    return cluster


@pytest.fixture
def random_on_loan_layout():
    """ A random cluster of on-loan servers hosting inelastic jobs that span at most three servers. """
    return _random_on_loan_layout
