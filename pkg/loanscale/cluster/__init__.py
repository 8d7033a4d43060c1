"""
This module contains the domain types shared by all policies and the
simulator. It can be imported as follows:

>>> from loanscale import cluster

A :py:class:`~loanscale.cluster.ClusterState` holds the servers of both
clusters, the jobs submitted to the training cluster, and the whitelists
telling which scheduler controls which server.
"""
from .Server import GpuKind, ServerGroup, Server, DEFAULT_SPEED_FACTOR
from .JobState import JobSpec, Workload, JobPhase, WorkerRole, Worker, JobState, WORKLOAD_TOLERANCE
from .ClusterState import ClusterState, occupancy, usage_metrics

__all__ = [
    # Servers
    'GpuKind',
    'ServerGroup',
    'Server',
    'DEFAULT_SPEED_FACTOR',

    # Jobs
    'JobSpec',
    'Workload',
    'JobPhase',
    'WorkerRole',
    'Worker',
    'JobState',
    'WORKLOAD_TOLERANCE',

    # Cluster
    'ClusterState',
    'occupancy',
    'usage_metrics'
]
