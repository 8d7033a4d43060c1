import dataclasses
from typing import Dict, List

import numpy as np

from loanscale import utils
from loanscale.cluster import JobState

# Two knapsack values closer than this are considered equal.
VALUE_TOLERANCE = 1e-9


@dataclasses.dataclass(frozen=True)
class MckpItem:
    """
    The choice to give an elastic job ``flex_workers`` extra workers, which
    costs ``weight`` GPUs and reduces its running time by ``value`` seconds.
    """
    flex_workers: int
    weight: int
    value: float


@dataclasses.dataclass(frozen=True)
class MckpGroup:
    job_id: str
    items: List[MckpItem]

    def is_concave(self) -> bool:
        """
        Whether weights and values strictly increase with the number of
        workers while the marginal values strictly decrease.
        """
        values = [0.0] + [item.value for item in self.items]
        weights = [0] + [item.weight for item in self.items]
        marginals = np.diff(values)
        return bool(
            np.all(np.diff(weights) > 0)
            and np.all(marginals > 0)
            and np.all(np.diff(marginals) < VALUE_TOLERANCE)
        )


@dataclasses.dataclass
class MckpInstance:
    """
    A multiple-choice knapsack instance: pick at most one item from each
    group such that the total weight fits the capacity and the total value
    is maximal.
    """
    groups: List[MckpGroup] = dataclasses.field(default_factory=list)

    def __post_init__(self):
        for group in self.groups:
            for item in group.items:
                if not utils.is_integer(item.weight) or item.weight < 1:
                    raise ValueError(f'Item weights should be positive integers, got {item.weight} in group `{group.job_id}`')
                if not utils.is_real(item.value):
                    raise TypeError(f'Item values should be numeric, got {item.value} in group `{group.job_id}`')

    def __len__(self) -> int:
        return len(self.groups)


@dataclasses.dataclass
class MckpSolution:
    chosen: Dict[str, MckpItem] = dataclasses.field(default_factory=dict)
    value: float = 0.0
    weight: int = 0


def flexible_value(max_running_time: float, min_workers: int, flex_workers: int) -> float:
    """
    The reduction in running time when a job with base demand
    ``min_workers`` and running time ``max_running_time`` at its base
    demand gets ``flex_workers`` extra workers, under linear scaling.
    """
    return max_running_time * flex_workers / (flex_workers + min_workers)


def build_mckp(jobs: List[JobState], kept: Dict[str, int] = None) -> MckpInstance:
    """
    Encode the flexible demand of elastic jobs as a multiple-choice
    knapsack instance. Each elastic job is a group with one item per number
    of flexible workers :math:`w`, of weight :math:`w \\cdot D_j` and value
    :math:`T^{max}_j \\cdot w / (w + w^{min}_j)`, with :math:`T^{max}_j` the
    estimated remaining running time at base demand. Inelastic jobs do not
    contribute a group.

    Parameters
    ----------
    jobs: list of JobState
        The jobs whose base demand is granted.
    kept: dict, default=None
        Flexible workers some jobs keep regardless of the knapsack. For such
        a job with :math:`f` kept workers, the items are the increments
        :math:`k = 1, 2, \\dots` beyond :math:`f`, valued by the additional
        reduction in running time.

    Returns
    -------
    instance: MckpInstance
        The knapsack instance, with groups in the order of ``jobs``.
    """
    kept = kept or {}
    groups = []
    for job in jobs:
        if not job.is_elastic:
            continue
        spec = job.spec
        t_max = job.max_running_time()
        base = kept.get(job.id, 0)
        base_value = flexible_value(t_max, spec.min_workers, base)
        items = [
            MckpItem(
                flex_workers=base + k,
                weight=k * spec.gpus_per_worker,
                value=flexible_value(t_max, spec.min_workers, base + k) - base_value
            )
            for k in range(1, spec.max_flexible_workers - base + 1)
        ]
        if len(items) > 0:
            groups.append(MckpGroup(job.id, items))
    return MckpInstance(groups)


def mckp_dp(instance: MckpInstance, capacity: int) -> MckpSolution:
    """
    Solve a multiple-choice knapsack instance exactly by dynamic
    programming over the exact total weight, in pseudo-polynomial time.

    Among optimal solutions, the one with the lowest total weight is
    returned. Remaining ties keep the choice of earlier groups, and within
    a group prefer choosing nothing over choosing an item, and lighter items
    over heavier ones.

    Parameters
    ----------
    instance: MckpInstance
        The knapsack instance.
    capacity: int
        The capacity of the knapsack.

    Returns
    -------
    solution: MckpSolution
        The chosen item per group (groups without a chosen item are absent),
        together with the total value and weight.
    """
    utils.check_integer('capacity', capacity, minimum=0)
    capacity = min(capacity, sum(max((item.weight for item in group.items), default=0) for group in instance.groups))

    best = np.full(capacity + 1, -np.inf)
    best[0] = 0.0
    picks = []
    for group in instance.groups:
        new_best = best.copy()
        pick = np.full(capacity + 1, -1, dtype=int)
        for index, item in enumerate(group.items):
            if item.weight > capacity:
                continue
            candidate = np.full(capacity + 1, -np.inf)
            candidate[item.weight:] = best[:capacity + 1 - item.weight] + item.value
            better = candidate > new_best + VALUE_TOLERANCE
            new_best = np.where(better, candidate, new_best)
            pick = np.where(better, index, pick)
        best = new_best
        picks.append(pick)

    # Lowest weight reaching the optimal value
    optimum = np.max(best)
    weight = int(np.argmax(best >= optimum - VALUE_TOLERANCE))

    solution = MckpSolution(value=float(best[weight]), weight=weight)
    remaining = weight
    for group, pick in zip(reversed(instance.groups), reversed(picks)):
        index = pick[remaining]
        if index >= 0:
            item = group.items[index]
            solution.chosen[group.job_id] = item
            remaining -= item.weight
    solution.chosen = {group.job_id: solution.chosen[group.job_id] for group in instance.groups if group.job_id in solution.chosen}
    return solution
