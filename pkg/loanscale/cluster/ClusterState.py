import copy
from typing import Dict, List, Tuple

from loanscale import utils
from loanscale.cluster.Server import Server, GpuKind, ServerGroup
from loanscale.cluster.JobState import JobState, Worker, WorkerRole


class ClusterState:
    """
    The state of both clusters as the training scheduler sees it: all
    servers, all jobs that have been submitted, and the two whitelists that
    say which servers each cluster scheduler controls. Inference servers on
    loan are in the training whitelist.

    ``ClusterState`` is mutated by a single owner (the simulator, or a test)
    and can be copied with :py:meth:`copy` to hand a snapshot to a policy.

    Parameters
    ----------
    servers: list of Server
        All servers of both clusters.
    now_s: float, default=0.0
        The current time.

    Attributes
    ----------
    servers: dict
        Maps server ids to servers, in natural id order.
    jobs: dict
        Maps job ids to job states, in order of submission.
    whitelist_training: set of str
        Ids of the servers the training scheduler may use.
    whitelist_inference: set of str
        Ids of the servers the inference scheduler controls.
    inference_util: float
        The most recent utilization sample of the inference cluster.
    """
    servers: Dict[str, Server]
    jobs: Dict[str, JobState]
    whitelist_training: set
    whitelist_inference: set
    now_s: float
    inference_util: float

    def __init__(self, servers: List[Server], now_s: float = 0.0):
        if not utils.is_valid_list(servers, Server):
            raise TypeError('`servers` should be a list of Server')
        ids = [server.id for server in servers]
        if len(set(ids)) != len(ids):
            raise ValueError('Server ids should be unique')
        self.servers = {server.id: server for server in sorted(servers, key=lambda s: utils.natural_key(s.id))}
        self.jobs = {}
        self.whitelist_training = {server.id for server in servers if server.kind == GpuKind.TRAINING or server.on_loan}
        self.whitelist_inference = {server.id for server in servers if server.id not in self.whitelist_training}
        self.now_s = float(now_s)
        self.inference_util = 0.0

    @classmethod
    def from_sizes(cls, n_training: int, n_inference: int, gpus_per_server: int = 8, inference_speed_factor: float = 0.25) -> 'ClusterState':
        """
        Build an idle cluster with ``n_training`` training servers (ids
        ``t000``, ``t001``, ...) and ``n_inference`` inference servers (ids
        ``i000``, ...), none of them on loan.
        """
        utils.check_integer('n_training', n_training, minimum=0)
        utils.check_integer('n_inference', n_inference, minimum=0)
        servers = [Server(f't{i:03d}', GpuKind.TRAINING, gpus_per_server) for i in range(n_training)]
        servers += [Server(f'i{i:03d}', GpuKind.INFERENCE, gpus_per_server, inference_speed_factor) for i in range(n_inference)]
        return cls(servers)

    def copy(self) -> 'ClusterState':
        return copy.deepcopy(self)

    ###################################################################
    # LOOKUPS
    ###################################################################

    def server(self, server_id: str) -> Server:
        if server_id not in self.servers:
            raise KeyError(f'Unknown server: {server_id}')
        return self.servers[server_id]

    def job(self, job_id: str) -> JobState:
        if job_id not in self.jobs:
            raise KeyError(f'Unknown job: {job_id}')
        return self.jobs[job_id]

    def training_pool(self) -> List[Server]:
        return [server for server in self.servers.values() if server.kind == GpuKind.TRAINING]

    def on_loan_servers(self) -> List[Server]:
        return [server for server in self.servers.values() if server.on_loan]

    def idle_inference_servers(self) -> List[Server]:
        """ Inference servers that are not on loan, in natural id order. """
        return [server for server in self.servers.values() if server.id in self.whitelist_inference]

    def servers_of_job(self, job_id: str) -> List[str]:
        """ The ids of the servers hosting at least one worker of the job, in natural order. """
        return utils.sorted_ids({worker.server_id for worker in self.job(job_id).workers.values()})

    def free_training_gpus(self) -> int:
        return sum(self.servers[server_id].free_gpus for server_id in self.whitelist_training)

    def running_jobs(self) -> List[JobState]:
        return [job for job in self.jobs.values() if job.n_workers > 0]

    ###################################################################
    # MUTATIONS
    ###################################################################

    def add_job(self, job: JobState) -> None:
        if job.id in self.jobs:
            raise ValueError(f'Job `{job.id}` already exists')
        self.jobs[job.id] = job

    def place_worker(self, job_id: str, server_id: str, role: WorkerRole) -> Worker:
        """
        Start a new worker of a job on a server.

        Parameters
        ----------
        job_id: str
            The job to add a worker to.
        server_id: str
            The server on which the worker runs. It must be in the training
            whitelist and have enough free GPUs.
        role: WorkerRole
            Whether the worker is part of the base or flexible demand.

        Returns
        -------
        worker: Worker
            The new worker.

        Raises
        ------
        KeyError
            If the job or the server does not exist.
        ValueError
            If the server is not available for training or too full.
        """
        job = self.job(job_id)
        server = self.server(server_id)
        if server_id not in self.whitelist_training:
            raise ValueError(f'Server `{server_id}` is not in the training whitelist')
        if server.free_gpus < job.spec.gpus_per_worker:
            raise ValueError(f'Server `{server_id}` has {server.free_gpus} free GPUs, but job `{job_id}` needs {job.spec.gpus_per_worker}')

        worker = Worker(job.new_worker_id(), server_id, server.kind, server.speed_factor, role)
        job.workers[worker.id] = worker
        server.workers[(job_id, worker.id)] = job.spec.gpus_per_worker
        server.free_gpus -= job.spec.gpus_per_worker

        if server.on_loan:
            wanted = ServerGroup.LOAN_BASE if role == WorkerRole.BASE else ServerGroup.LOAN_FLEXIBLE
            if server.group == ServerGroup.LOAN_UNGROUPED:
                server.group = wanted
            elif server.group != wanted:
                # Mixed servers cannot be drained without preemptions.
                server.group = ServerGroup.LOAN_BASE
        return worker

    def remove_worker(self, job_id: str, worker_id: str) -> Worker:
        job = self.job(job_id)
        if worker_id not in job.workers:
            raise KeyError(f'Unknown worker: {worker_id}')
        worker = job.workers.pop(worker_id)
        server = self.servers[worker.server_id]
        server.free_gpus += server.workers.pop((job_id, worker_id))
        if server.on_loan and server.is_empty():
            server.group = ServerGroup.LOAN_UNGROUPED
        return worker

    def remove_all_workers(self, job_id: str) -> Dict[str, int]:
        """ Stop all workers of a job, and return the GPUs freed per server. """
        freed = {}
        for worker_id in list(self.job(job_id).workers):
            worker = self.remove_worker(job_id, worker_id)
            freed[worker.server_id] = freed.get(worker.server_id, 0) + self.jobs[job_id].spec.gpus_per_worker
        return freed

    def loan(self, server_id: str) -> None:
        server = self.server(server_id)
        if server_id not in self.whitelist_inference:
            raise ValueError(f'Server `{server_id}` is not controlled by the inference cluster')
        server.on_loan = True
        server.group = ServerGroup.LOAN_UNGROUPED
        self.whitelist_inference.remove(server_id)
        self.whitelist_training.add(server_id)

    def return_server(self, server_id: str) -> None:
        server = self.server(server_id)
        if not server.on_loan:
            raise ValueError(f'Server `{server_id}` is not on loan')
        if not server.is_empty():
            raise ValueError(f'Server `{server_id}` still hosts {len(server.workers)} workers')
        server.on_loan = False
        server.group = ServerGroup.INFERENCE
        self.whitelist_training.remove(server_id)
        self.whitelist_inference.add(server_id)

    def check_invariants(self) -> None:
        """
        Check the whitelist partition, GPU conservation per server and
        that only inference servers are on loan.

        Raises
        ------
        AssertionError
            If any of the invariants is violated.
        """
        if self.whitelist_training & self.whitelist_inference:
            raise AssertionError('The whitelists overlap')
        if (self.whitelist_training | self.whitelist_inference) != set(self.servers):
            raise AssertionError('The whitelists do not cover all servers')
        for server in self.servers.values():
            if sum(server.workers.values()) + server.free_gpus != server.total_gpus:
                raise AssertionError(f'GPUs of server `{server.id}` are not conserved')
            if not 0 <= server.free_gpus <= server.total_gpus:
                raise AssertionError(f'Server `{server.id}` is overcommitted')
            if server.on_loan and server.kind != GpuKind.INFERENCE:
                raise AssertionError(f'Training server `{server.id}` is on loan')


def occupancy(cluster: ClusterState, server_id: str) -> List[Tuple[str, int]]:
    """
    The GPUs each job uses on a server.

    Parameters
    ----------
    cluster: ClusterState
        The cluster.
    server_id: str
        The server to inspect.

    Returns
    -------
    occupancy: list of (str, int)
        Pairs of job id and number of GPUs used, in natural job id order.

    Raises
    ------
    KeyError
        If the server does not exist.
    """
    server = cluster.server(server_id)
    gpus = {}
    for (job_id, _), used in server.workers.items():
        gpus[job_id] = gpus.get(job_id, 0) + used
    return [(job_id, gpus[job_id]) for job_id in utils.sorted_ids(gpus)]


def usage_metrics(cluster: ClusterState, normalized: bool = False) -> Tuple[float, float]:
    """
    Compute the GPU usage of the training cluster and of both clusters
    together.

    The training usage is the fraction of GPUs in the training whitelist
    that run a worker. The overall usage also counts the inference GPUs
    that serve requests, i.e., the inference utilization times the
    inference fleet, bounded by the inference GPUs that are not on loan.

    Parameters
    ----------
    cluster: ClusterState
        The cluster.
    normalized: bool, default=False
        Whether to weigh every GPU by its speed factor, such that inference
        GPUs count relative to training GPUs.

    Returns
    -------
    training_usage: float
        Usage in [0, 1] of the GPUs in the training whitelist.
    overall_usage: float
        Usage in [0, 1] of all GPUs.
    """
    def weight(server: Server) -> float:
        return server.speed_factor if normalized else 1.0

    training_used = training_total = 0.0
    inference_available = inference_fleet = 0.0
    all_total = 0.0
    for server in cluster.servers.values():
        all_total += server.total_gpus * weight(server)
        if server.id in cluster.whitelist_training:
            training_used += server.used_gpus * weight(server)
            training_total += server.total_gpus * weight(server)
        if server.kind == GpuKind.INFERENCE:
            inference_fleet += server.total_gpus * weight(server)
            if server.id in cluster.whitelist_inference:
                inference_available += server.total_gpus * weight(server)

    inference_used = min(cluster.inference_util * inference_fleet, inference_available)
    training_usage = training_used / training_total if training_total > 0 else 0.0
    overall_usage = (training_used + inference_used) / all_total if all_total > 0 else 0.0
    return training_usage, overall_usage
