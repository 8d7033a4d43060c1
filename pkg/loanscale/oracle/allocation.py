import dataclasses
import itertools
from typing import Dict, List, Tuple

import numpy as np

from loanscale import utils
from loanscale.allocation import MckpInstance
from loanscale.allocation.knapsack import VALUE_TOLERANCE
from loanscale.cluster import JobSpec
from loanscale.oracle.reclaim import GuardExceededError

MAX_BRUTE_FORCE_JOBS = 4
MAX_BRUTE_FORCE_CAPACITY = 32
MAX_MCKP_COMBINATIONS = 10 ** 7


class RegimeError(ValueError):
    """ Raised when a two-job instance falls outside the regime of the closed form. """


@dataclasses.dataclass(frozen=True)
class TwoJobInstance:
    """
    Two elastic jobs ``p`` and ``q`` with one GPU per worker sharing a
    cluster of ``capacity`` GPUs, such that not both can get their maximum
    demand but both can get their minimum demand. Job ``p`` has the smaller
    maximum demand.

    Parameters
    ----------
    workload_p: float
        The workload of ``p`` in GPU-seconds.
    min_gpus_p: int
        The minimum demand of ``p``.
    max_gpus_p: int
        The maximum demand of ``p``.
    workload_q: float
        The workload of ``q`` in GPU-seconds.
    min_gpus_q: int
        The minimum demand of ``q``.
    max_gpus_q: int
        The maximum demand of ``q``.
    capacity: int
        The GPUs of the cluster.

    Raises
    ------
    RegimeError
        Unless ``max_gpus_p <= max_gpus_q < capacity`` and
        ``min_gpus_p + min_gpus_q < capacity < max_gpus_p + max_gpus_q``.
    """
    workload_p: float
    min_gpus_p: int
    max_gpus_p: int
    workload_q: float
    min_gpus_q: int
    max_gpus_q: int
    capacity: int

    def __post_init__(self):
        for name in ('workload_p', 'workload_q'):
            if not utils.is_real(getattr(self, name)):
                raise TypeError(f'`{name}` should be numeric')
            if getattr(self, name) <= 0:
                raise ValueError(f'`{name}` should be strictly positive')
        for name in ('min_gpus_p', 'max_gpus_p', 'min_gpus_q', 'max_gpus_q', 'capacity'):
            utils.check_integer(name, getattr(self, name), minimum=1)
        if self.min_gpus_p > self.max_gpus_p or self.min_gpus_q > self.max_gpus_q:
            raise ValueError('The minimum demand of a job should not exceed its maximum demand')
        if not self.max_gpus_p <= self.max_gpus_q < self.capacity:
            raise RegimeError(f'Expected max_gpus_p <= max_gpus_q < capacity, got {self.max_gpus_p}, {self.max_gpus_q} and {self.capacity}')
        if not self.min_gpus_p + self.min_gpus_q < self.capacity < self.max_gpus_p + self.max_gpus_q:
            raise RegimeError(f'Expected min_gpus_p + min_gpus_q < capacity < max_gpus_p + max_gpus_q, got capacity {self.capacity}')

    def to_jobs(self) -> List[JobSpec]:
        """ The two jobs, with ids ``'p'`` and ``'q'``. """
        return [
            JobSpec('p', 0, 1, self.min_gpus_p, self.max_gpus_p, self.workload_p / self.max_gpus_p),
            JobSpec('q', 0, 1, self.min_gpus_q, self.max_gpus_q, self.workload_q / self.max_gpus_q),
        ]


def _two_job_average(workloads: Tuple[float, float], gpus: Tuple[int, int], max_gpus: Tuple[int, int]) -> float:
    times = [workloads[0] / gpus[0], workloads[1] / gpus[1]]
    first = int(np.argmin(times))
    survivor = 1 - first
    t_first = times[first]
    remaining = workloads[survivor] - gpus[survivor] * t_first
    t_survivor = t_first + max(0.0, remaining) / max_gpus[survivor]
    return (t_first + t_survivor) / 2


def two_job_optimal(instance: TwoJobInstance) -> Tuple[int, int, float]:
    """
    Compute the initial allocation of two elastic jobs that minimizes their
    average completion time, if the surviving job scales to its maximum
    demand once the other one completes.

    If the cluster can host twice the maximum demand of ``p``, then ``p``
    gets its maximum demand. Otherwise, the job with the smaller workload
    gets its maximum demand. The other job gets the remaining GPUs. The
    rule only holds when either job can get its maximum demand while the
    other keeps its minimum demand.

    Parameters
    ----------
    instance: TwoJobInstance
        The two jobs and the cluster.

    Returns
    -------
    gpus_p: int
        The initial GPUs of ``p``.
    gpus_q: int
        The initial GPUs of ``q``.
    avg_jct: float
        The resulting average completion time.

    Raises
    ------
    RegimeError
        If ``instance`` is no :py:class:`TwoJobInstance`, as the regime is
        checked upon construction of one, or if granting the maximum demand
        of one job leaves less than the minimum demand of the other.

    Examples
    --------
    >>> from loanscale.oracle import TwoJobInstance, two_job_optimal
    >>> gpus_p, gpus_q, avg = two_job_optimal(TwoJobInstance(300, 2, 3, 120, 2, 6, 8))
    >>> gpus_p, gpus_q, round(avg, 2)
    (3, 5, 62.0)
    """
    if not isinstance(instance, TwoJobInstance):
        raise RegimeError('`instance` should be a TwoJobInstance')
    capacity = instance.capacity
    if capacity - instance.max_gpus_p < instance.min_gpus_q or capacity - instance.max_gpus_q < instance.min_gpus_p:
        raise RegimeError(f'Expected both maximum demands to leave the minimum demand of the other job, got capacity {capacity}')
    if capacity >= 2 * instance.max_gpus_p or instance.workload_p <= instance.workload_q:
        gpus_p = instance.max_gpus_p
    else:
        gpus_p = capacity - instance.max_gpus_q
    gpus_q = capacity - gpus_p
    avg = _two_job_average(
        (instance.workload_p, instance.workload_q),
        (gpus_p, gpus_q),
        (instance.max_gpus_p, instance.max_gpus_q)
    )
    return gpus_p, gpus_q, avg


def _simulate_completions(jobs: List[JobSpec], workers: Tuple[int, ...], capacity: int) -> float:
    """
    The average completion time of jobs started with the given workers,
    where the GPUs freed by every completion go to the surviving jobs in
    order of their remaining running time, each up to its maximum demand.
    """
    remaining = [spec.total_workload for spec in jobs]
    current = list(workers)
    alive = set(range(len(jobs)))
    now = 0.0
    finish = [0.0] * len(jobs)
    while len(alive) > 0:
        times = {index: remaining[index] / current[index] for index in alive}
        step = min(times.values())
        now += step
        done = [index for index in alive if times[index] - step <= VALUE_TOLERANCE * max(1.0, times[index])]
        for index in alive:
            remaining[index] -= current[index] * step
        for index in done:
            finish[index] = now
            alive.remove(index)

        free = capacity - sum(current[index] * jobs[index].gpus_per_worker for index in alive)
        for index in sorted(alive, key=lambda i: (remaining[i] / current[i], i)):
            extra = min(jobs[index].max_workers - current[index], free // jobs[index].gpus_per_worker)
            current[index] += extra
            free -= extra * jobs[index].gpus_per_worker
    return float(np.mean(finish))


def brute_force_allocation(jobs: List[JobSpec], capacity: int) -> Tuple[Dict[str, int], float]:
    """
    Find the initial number of workers of every job that minimizes the
    average completion time, by trying every combination within the
    scaling ranges that fits the capacity. Once a job completes, its GPUs
    go to the surviving jobs, shortest remaining running time first, each
    up to its maximum demand. All jobs start at time 0.

    Parameters
    ----------
    jobs: list of JobSpec
        At most four jobs.
    capacity: int
        The GPUs of the cluster, at most 32.

    Returns
    -------
    workers: dict
        The optimal initial number of workers per job. Among optimal
        combinations, the first in lexicographic order is returned.
    avg_jct: float
        The minimal average completion time.

    Raises
    ------
    GuardExceededError
        If there are more than four jobs or more than 32 GPUs.
    ValueError
        If not even the minimum demands fit.
    """
    if not utils.is_valid_list(jobs, JobSpec):
        raise TypeError('`jobs` should be a list of JobSpec')
    utils.check_integer('capacity', capacity, minimum=0)
    if len(jobs) > MAX_BRUTE_FORCE_JOBS:
        raise GuardExceededError('jobs', len(jobs), MAX_BRUTE_FORCE_JOBS)
    if capacity > MAX_BRUTE_FORCE_CAPACITY:
        raise GuardExceededError('GPUs', capacity, MAX_BRUTE_FORCE_CAPACITY)
    if len(jobs) == 0:
        return {}, 0.0

    best_workers, best_avg = None, None
    ranges = [range(spec.min_workers, spec.max_workers + 1) for spec in jobs]
    for workers in itertools.product(*ranges):
        if sum(w * spec.gpus_per_worker for w, spec in zip(workers, jobs)) > capacity:
            continue
        avg = _simulate_completions(jobs, workers, capacity)
        if best_avg is None or avg < best_avg - VALUE_TOLERANCE:
            best_workers, best_avg = workers, avg
    if best_workers is None:
        raise ValueError('The minimum demands of the jobs exceed the capacity')
    return {spec.id: w for spec, w in zip(jobs, best_workers)}, best_avg


def brute_force_mckp(instance: MckpInstance, capacity: int) -> float:
    """
    Solve a multiple-choice knapsack instance by enumerating every
    combination of at most one item per group.

    Parameters
    ----------
    instance: MckpInstance
        The knapsack instance.
    capacity: int
        The capacity of the knapsack.

    Returns
    -------
    value: float
        The optimal total value, which is 0 for an instance without groups.

    Raises
    ------
    GuardExceededError
        If the instance has more than :math:`10^7` combinations.
    """
    utils.check_integer('capacity', capacity, minimum=0)
    combinations = int(np.prod([len(group.items) + 1 for group in instance.groups], dtype=float))
    if combinations > MAX_MCKP_COMBINATIONS:
        raise GuardExceededError('knapsack combinations', combinations, MAX_MCKP_COMBINATIONS)

    weights = np.zeros(1, dtype=int)
    values = np.zeros(1, dtype=float)
    for group in instance.groups:
        item_weights = np.array([0] + [item.weight for item in group.items], dtype=int)
        item_values = np.array([0.0] + [item.value for item in group.items], dtype=float)
        weights = np.add.outer(weights, item_weights).ravel()
        values = np.add.outer(values, item_values).ravel()
        # Weights only grow, so combinations over capacity stay infeasible.
        feasible = weights <= capacity
        weights, values = weights[feasible], values[feasible]
    return float(values.max())
