import math
import dataclasses
from typing import List, Optional

import numpy as np

from loanscale import utils
from loanscale.cluster import JobSpec, JobState, Worker
from loanscale.simulation.Event import Event, EventKind
from loanscale.simulation.ScenarioConfig import ScenarioConfig, ImperfectScaling, Scenario


def scaling_efficiency(spec: JobSpec, n_workers: int, imperfect_scaling: Optional[ImperfectScaling] = None) -> float:
    """
    The fraction of linear throughput a job achieves with ``n_workers``
    workers. Scaling is linear unless ``imperfect_scaling`` is given, in
    which case every worker beyond the midpoint of the scaling range costs
    another ``loss_per_step`` of efficiency.
    """
    if imperfect_scaling is None:
        return 1.0
    midpoint = math.ceil((spec.min_workers + spec.max_workers) / 2)
    steps = max(0, n_workers - midpoint)
    return (1 - imperfect_scaling.loss_per_step) ** steps


def progress_rate(job: JobState, config: ScenarioConfig, workers: List[Worker] = None) -> float:
    """
    Compute the training progress of a job per second, in worker-seconds
    at training speed. Each worker contributes the speed factor of its GPU
    kind, and the sum is multiplied by the scaling efficiency at the
    current number of workers. In the advanced scenario, a job whose
    workers span both GPU kinds additionally runs at ``hetero_efficiency``.

    Parameters
    ----------
    job: JobState
        The job.
    config: ScenarioConfig
        The simulated scenario.
    workers: list of Worker, default=None
        The workers to evaluate. Defaults to the current workers of the job.

    Returns
    -------
    rate: float
        The progress rate, which is 0 for a job without workers.

    Examples
    --------
    >>> from loanscale.cluster import JobSpec, JobState, Worker, GpuKind, WorkerRole
    >>> from loanscale.simulation import ScenarioConfig, progress_rate
    >>> job = JobState(JobSpec('A', 0, 1, 4, 4, 100.0))
    >>> workers = [Worker(f'A/w{i}', 't000', GpuKind.TRAINING, 1.0, WorkerRole.BASE) for i in range(4)]
    >>> progress_rate(job, ScenarioConfig(), workers)
    4.0
    """
    workers = list(job.workers.values()) if workers is None else workers
    if len(workers) == 0:
        return 0.0
    rate = sum(worker.speed_factor for worker in workers)
    rate *= scaling_efficiency(job.spec, len(workers), config.imperfect_scaling)
    if config.scenario == Scenario.ADVANCED and job.spec.hetero_capable and len({worker.kind for worker in workers}) > 1:
        rate *= config.hetero_efficiency
    return rate


def inject_prediction_error(jobs: List[JobState], fraction: float, max_rel: float = 0.25, seed: int = 0) -> List[JobState]:
    """
    Perturb the running time estimates of a seeded selection of jobs.
    Exactly ``round(fraction * len(jobs))`` jobs get an estimate of
    ``true * (1 + u)`` or ``true * (1 - u)``, with ``u`` uniform in
    ``(0, max_rel]`` and the sign chosen uniformly. The other jobs keep an
    exact estimate.

    Parameters
    ----------
    jobs: list of JobState
        The jobs, which are modified.
    fraction: float
        The fraction of jobs with a wrong estimate, in [0, 1].
    max_rel: float, default=0.25
        The largest relative error, in [0, 1).
    seed: int, default=0
        The seed of the random selection and errors.

    Returns
    -------
    jobs: list of JobState
        The given jobs.
    """
    if not utils.is_valid_list(jobs, JobState):
        raise TypeError('`jobs` should be a list of JobState')
    utils.check_fraction('fraction', fraction)
    utils.check_fraction('max_rel', max_rel, allow_one=False)
    utils.check_integer('seed', seed, minimum=0)

    for job in jobs:
        job.estimated_runtime_s = job.spec.runtime_at_max_s
    rng = np.random.default_rng(seed)
    n_perturbed = int(round(fraction * len(jobs)))
    selected = sorted(rng.choice(len(jobs), size=n_perturbed, replace=False)) if n_perturbed > 0 else []
    for index in selected:
        u = max_rel * (1.0 - rng.random())
        sign = 1.0 if rng.random() < 0.5 else -1.0
        jobs[index].estimated_runtime_s = jobs[index].spec.runtime_at_max_s * (1.0 + sign * u)
    return jobs


def apply_scenario(specs: List[JobSpec], config: ScenarioConfig, seed: int = 0) -> List[JobSpec]:
    """
    Adjust the capabilities of the jobs to the simulated scenario.

    - Basic: the jobs are returned unchanged.
    - Advanced: a seeded ``config.hetero_fraction`` of all jobs may run on
      inference GPUs and span GPU kinds.
    - Ideal: every job may run on inference GPUs and span GPU kinds, and an
      inelastic job with ``w`` workers becomes elastic in ``[w, 2w]``
      with the same workload.

    Returns
    -------
    specs: list of JobSpec
        New job specifications, in the given order.
    """
    if config.scenario == Scenario.BASIC:
        return list(specs)

    if config.scenario == Scenario.ADVANCED:
        n_hetero = int(round(config.hetero_fraction * len(specs)))
        rng = np.random.default_rng(seed)
        chosen = set(rng.choice(len(specs), size=n_hetero, replace=False).tolist()) if n_hetero > 0 else set()
        return [
            dataclasses.replace(spec, gpu_flexible=True, hetero_capable=True) if index in chosen else spec
            for index, spec in enumerate(specs)
        ]

    ideal = []
    for spec in specs:
        if spec.is_elastic:
            ideal.append(dataclasses.replace(spec, gpu_flexible=True, hetero_capable=True))
        else:
            ideal.append(dataclasses.replace(
                spec,
                max_workers=2 * spec.min_workers,
                runtime_at_max_s=spec.runtime_at_max_s / 2,
                gpu_flexible=True,
                hetero_capable=True
            ))
    return ideal


@dataclasses.dataclass(frozen=True)
class AllocationStep:
    """
    From ``at_s`` onwards, a job runs with ``workers`` workers of total
    speed ``speed``. A step with ``restart`` set follows a preemption.
    """
    at_s: float
    workers: int
    speed: float
    hetero: bool = False
    restart: bool = False


def allocation_history(events: List[Event], job_id: str) -> List[AllocationStep]:
    """
    Extract the worker timeline of a job from an event log.

    Parameters
    ----------
    events: list of Event
        The event log of a simulation.
    job_id: str
        The job of interest.

    Returns
    -------
    history: list of AllocationStep
        One step for every change in the workers of the job, in order. A
        preemption shows up as a step without workers.
    """
    history = []
    preempted = False
    for event in events:
        if event.job_id != job_id:
            continue
        if event.kind == EventKind.SCALE:
            history.append(AllocationStep(
                at_s=event.at_s,
                workers=event.payload['workers'],
                speed=event.payload['speed'],
                hetero=event.payload.get('hetero', False),
                restart=preempted
            ))
            preempted = False
        elif event.kind == EventKind.PREEMPT:
            history.append(AllocationStep(event.at_s, 0, 0.0))
            preempted = True
    return history


def replay_running_time(spec: JobSpec, history: List[AllocationStep], config: ScenarioConfig) -> float:
    """
    Replay the worker timeline of a job under the progress model of a
    configuration, and return the time from its first start until it
    completes. After the last recorded step, the job keeps its last
    allocation until it completes.

    Parameters
    ----------
    spec: JobSpec
        The job.
    history: list of AllocationStep
        The worker timeline, as extracted by :py:func:`allocation_history`.
    config: ScenarioConfig
        The configuration whose scaling model and overheads are applied.

    Returns
    -------
    running_time: float
        The replayed running time, overheads included.

    Raises
    ------
    ValueError
        If the job never completes under the given timeline.
    """
    if len(history) == 0:
        raise ValueError('The history of the job is empty')
    remaining = spec.total_workload
    paused_until = history[0].at_s

    for index, step in enumerate(history):
        if step.restart:
            paused_until = step.at_s + config.preempt_overhead_s
        elif index > 0 and step.workers > 0 and history[index - 1].workers > 0 and config.scale_overhead_s > 0:
            paused_until = max(paused_until, step.at_s + config.scale_overhead_s)
        if step.workers == 0:
            if not spec.checkpointing:
                remaining = spec.total_workload
            continue

        rate = step.speed * scaling_efficiency(spec, step.workers, config.imperfect_scaling)
        if step.hetero and config.scenario == Scenario.ADVANCED:
            rate *= config.hetero_efficiency
        start = max(step.at_s, paused_until)
        finish = start + remaining / rate
        end = history[index + 1].at_s if index + 1 < len(history) else math.inf
        if finish <= end:
            return finish - history[0].at_s
        if end > start:
            remaining -= rate * (end - start)

    raise ValueError(f'Job `{spec.id}` does not complete under the given history')
