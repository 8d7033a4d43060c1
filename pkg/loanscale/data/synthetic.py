from typing import Tuple

import numpy as np

from loanscale import utils
from loanscale.cluster import JobSpec
from loanscale.data.traces import JobTrace, UtilTrace

SECONDS_PER_DAY = 86400
_GPUS_PER_WORKER = np.array([1, 2, 4, 8])
_GPUS_PER_WORKER_P = np.array([0.45, 0.25, 0.2, 0.1])
_WORKERS = np.array([1, 2, 4, 8, 16])
_WORKERS_P = np.array([0.4, 0.25, 0.2, 0.1, 0.05])


def make_diurnal_utilization(
        days: float,
        mean: float = 0.65,
        peak_to_trough: float = 2.2,
        interval_s: int = 300,
        noise_level: float = 0.005,
        seed: int = None) -> UtilTrace:
    """
    Generate the utilization of an inference cluster with a daily pattern:
    a sinusoid with a period of 24 hours, lowest at 04:00 and highest at
    16:00, plus Gaussian noise clipped at three standard deviations.

    Parameters
    ----------
    days: float
        The length of the trace in days.
    mean: float, default=0.65
        The mean utilization.
    peak_to_trough: float, default=2.2
        The ratio of the highest to the lowest utilization of the sinusoid.
    interval_s: int, default=300
        The interval between samples.
    noise_level: float, default=0.005
        The standard deviation of the noise.
    seed: int, default=None
        The seed of the noise.

    Returns
    -------
    util: UtilTrace
        The utilization trace, clipped to [0, 1].
    """
    utils.check_fraction('mean', mean, allow_zero=False, allow_one=False)
    if peak_to_trough < 1:
        raise ValueError('`peak_to_trough` should be at least 1')
    utils.check_integer('interval_s', interval_s, minimum=1)

    rng = np.random.default_rng(seed)
    amplitude = mean * (peak_to_trough - 1) / (peak_to_trough + 1)
    t = np.arange(0, days * SECONDS_PER_DAY, interval_s, dtype=float)
    wave = mean - amplitude * np.cos(2 * np.pi * (t - 4 * 3600) / SECONDS_PER_DAY)
    noise = np.clip(rng.normal(0, noise_level, t.shape[0]), -3 * noise_level, 3 * noise_level)
    return UtilTrace(t, np.clip(wave + noise, 0.0, 1.0))


def gen_traces(
        n_jobs: int,
        days: float = 1.0,
        n_training_servers: int = 64,
        gpus_per_server: int = 8,
        seed: int = 0,
        load: float = 0.9,
        elastic_fraction: float = 0.05,
        elastic_share: float = 0.36,
        gpu_flexible_fraction: float = 0.21,
        checkpoint_fraction: float = 0.2,
        max_job_gpus: int = 64,
        **kwargs) -> Tuple[JobTrace, UtilTrace]:
    """
    Generate a synthetic job trace and inference utilization trace.

    Jobs arrive as a Poisson process spread over ``days``. Exactly
    ``round(elastic_fraction * n_jobs)`` jobs are elastic, with a scaling
    range of ``[w, 4w]`` capped at ``max_job_gpus`` GPUs, and their running
    times are rescaled such that they hold exactly ``elastic_share`` of the
    GPU-time. All elastic jobs may run on inference GPUs, as do randomly
    chosen other jobs up to ``gpu_flexible_fraction`` of all jobs. Finally,
    all running times are scaled such that the jobs demand ``load`` times
    the GPU-time of the training cluster over the span of the trace.

    Parameters
    ----------
    n_jobs: int
        The number of jobs.
    days: float, default=1.0
        The span of the traces in days.
    n_training_servers: int, default=64
        The size of the training cluster.
    gpus_per_server: int, default=8
        The number of GPUs of every server.
    seed: int, default=0
        The seed of the generator. Equal seeds give equal traces.
    load: float, default=0.9
        The offered GPU-time relative to the capacity of the training cluster.
    elastic_fraction: float, default=0.05
        The fraction of elastic jobs.
    elastic_share: float, default=0.36
        The fraction of GPU-time demanded by elastic jobs.
    gpu_flexible_fraction: float, default=0.21
        The fraction of jobs that may run on inference GPUs.
    checkpoint_fraction: float, default=0.2
        The fraction of jobs that keep their progress when preempted.
    max_job_gpus: int, default=64
        The largest number of GPUs a job may use.
    **kwargs:
        Parameters passed to :py:func:`make_diurnal_utilization`.

    Returns
    -------
    jobs: JobTrace
        The job trace.
    util: UtilTrace
        The utilization trace.
    """
    utils.check_integer('n_jobs', n_jobs, minimum=0)
    if not utils.is_real(days) or days <= 0:
        raise ValueError('`days` should be strictly positive')
    utils.check_integer('n_training_servers', n_training_servers, minimum=1)
    utils.check_integer('gpus_per_server', gpus_per_server, minimum=1)
    utils.check_integer('seed', seed, minimum=0)
    if not utils.is_real(load) or load <= 0:
        raise ValueError('`load` should be strictly positive')
    utils.check_fraction('elastic_fraction', elastic_fraction)
    utils.check_fraction('elastic_share', elastic_share, allow_zero=False, allow_one=False)
    utils.check_fraction('gpu_flexible_fraction', gpu_flexible_fraction)
    utils.check_fraction('checkpoint_fraction', checkpoint_fraction)
    utils.check_integer('max_job_gpus', max_job_gpus, minimum=1)

    rng = np.random.default_rng(seed)
    span_s = days * SECONDS_PER_DAY

    # Arrivals
    gaps = rng.exponential(span_s / max(n_jobs, 1), size=n_jobs)
    submit = np.floor(np.cumsum(gaps)).astype(int)

    # Demands
    gpus = rng.choice(_GPUS_PER_WORKER, size=n_jobs, p=_GPUS_PER_WORKER_P)
    gpus = np.minimum(gpus, min(gpus_per_server, max_job_gpus))
    workers = rng.choice(_WORKERS, size=n_jobs, p=_WORKERS_P)
    cap = np.minimum(max_job_gpus, n_training_servers * gpus_per_server) // gpus
    workers = np.maximum(1, np.minimum(workers, cap))
    runtime = np.clip(rng.lognormal(np.log(1800), 1.2, size=n_jobs), 60, SECONDS_PER_DAY)

    # Elastic jobs
    n_elastic = int(round(elastic_fraction * n_jobs))
    elastic = np.zeros(n_jobs, dtype=bool)
    elastic[rng.choice(n_jobs, size=n_elastic, replace=False)] = True
    max_workers = workers.copy()
    for index in np.flatnonzero(elastic):
        if cap[index] < 2:
            elastic[index] = False
            continue
        workers[index] = max(1, min(workers[index], cap[index] // 2))
        max_workers[index] = min(4 * workers[index], cap[index])

    gpu_time = runtime * max_workers * gpus
    elastic_time, inelastic_time = gpu_time[elastic].sum(), gpu_time[~elastic].sum()
    if elastic_time > 0 and inelastic_time > 0:
        runtime[elastic] *= elastic_share * inelastic_time / ((1 - elastic_share) * elastic_time)
        gpu_time = runtime * max_workers * gpus
    if n_jobs > 0:
        runtime *= load * n_training_servers * gpus_per_server * span_s / gpu_time.sum()

    # Capabilities
    n_flexible = max(int(round(gpu_flexible_fraction * n_jobs)), int(elastic.sum()))
    others = rng.permutation(np.flatnonzero(~elastic))
    gpu_flexible = elastic.copy()
    gpu_flexible[others[:n_flexible - int(elastic.sum())]] = True
    checkpointing = rng.random(n_jobs) < checkpoint_fraction

    jobs = [
        JobSpec(
            id=f'j{index}',
            submit_s=int(submit[index]),
            gpus_per_worker=int(gpus[index]),
            min_workers=int(workers[index]),
            max_workers=int(max_workers[index]),
            runtime_at_max_s=float(runtime[index]),
            gpu_flexible=bool(gpu_flexible[index]),
            checkpointing=bool(checkpointing[index])
        )
        for index in range(n_jobs)
    ]
    util = make_diurnal_utilization(days, seed=seed, **kwargs)
    return JobTrace(jobs), util


def elastic_gpu_share(trace: JobTrace) -> float:
    """ The fraction of GPU-time demanded by the elastic jobs of a trace, at their maximum demand. """
    total = sum(job.runtime_at_max_s * job.max_workers * job.gpus_per_worker for job in trace)
    elastic = sum(job.runtime_at_max_s * job.max_workers * job.gpus_per_worker for job in trace if job.is_elastic)
    return elastic / total if total > 0 else 0.0
