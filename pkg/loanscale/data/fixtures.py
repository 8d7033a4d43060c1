from typing import List

from loanscale.allocation import MckpInstance, build_mckp
from loanscale.cluster import ClusterState, Server, GpuKind, JobSpec, JobState, JobPhase, WorkerRole


def demonstration_reclaim_cluster() -> ClusterState:
    """
    Build a cluster of six on-loan inference servers ``s1`` to ``s6`` with
    four running inelastic jobs, on which the servers with the fewest jobs
    are not the best ones to reclaim:

    - job ``a``: two workers of 4 GPUs, on ``s1`` and ``s2``;
    - job ``b``: one worker of 8 GPUs, on ``s3``;
    - job ``c``: five workers of 2 GPUs, four on ``s4`` and one on ``s5``;
    - job ``d``: five workers of 2 GPUs, four on ``s6`` and one on ``s5``.

    The preemption costs of ``s1`` to ``s6`` are 0.5, 0.5, 1, 0.5, 1 and 0.5.
    Reclaiming two servers preempts a single job by returning ``s1`` and
    ``s2``.

    Returns
    -------
    cluster: ClusterState
        The cluster.
    """
    servers = [Server(f's{i}', GpuKind.INFERENCE) for i in range(1, 7)]
    cluster = ClusterState(servers)
    for server in servers:
        cluster.loan(server.id)

    layout = {
        'a': (4, ['s1', 's2']),
        'b': (8, ['s3']),
        'c': (2, ['s4'] * 4 + ['s5']),
        'd': (2, ['s6'] * 4 + ['s5']),
    }
    for job_id, (gpus, placement) in layout.items():
        job = JobState(JobSpec(job_id, 0, gpus, len(placement), len(placement), 100.0, gpu_flexible=True))
        cluster.add_job(job)
        job.phase = JobPhase.RUNNING
        for server_id in placement:
            cluster.place_worker(job_id, server_id, WorkerRole.BASE)
    return cluster


def contention_jobs() -> List[JobSpec]:
    """
    Two elastic jobs with one GPU per worker and scaling range [2, 6],
    running 50 s (``A``) and 20 s (``B``) at their maximum demand. On 8 GPUs,
    giving B its maximum demand first yields the lowest average completion
    time.
    """
    return [
        JobSpec('A', 0, 1, 2, 6, 50.0),
        JobSpec('B', 0, 1, 2, 6, 20.0),
    ]


def mixed_gpu_jobs(gpus_per_worker_a: int = 1) -> List[JobSpec]:
    """
    Two elastic jobs on which shortest job first is not optimal: ``A`` with
    range [2, 3] running 100 s at maximum demand, and ``B`` with range
    [2, 6] running 20 s. On 8 GPUs, giving A its maximum demand first
    yields the lowest average completion time.

    Parameters
    ----------
    gpus_per_worker_a: int, default=1
        The GPUs of each worker of A.
    """
    return [
        JobSpec('A', 0, gpus_per_worker_a, 2, 3, 100.0),
        JobSpec('B', 0, 1, 2, 6, 20.0),
    ]


def demonstration_mckp_instance() -> MckpInstance:
    """
    The knapsack instance of the jobs of :py:func:`mixed_gpu_jobs` when each
    worker of A needs 2 GPUs. Group A has the single item (2 GPUs, 50), and
    group B has the items (1, 20), (2, 30), (3, 36) and (4, 40).
    """
    return build_mckp([JobState(spec) for spec in mixed_gpu_jobs(gpus_per_worker_a=2)])
