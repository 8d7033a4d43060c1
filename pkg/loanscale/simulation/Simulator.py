import logging
from functools import partial
from typing import Dict, List, Optional, Tuple, Union

from loanscale import utils
from loanscale.allocation import Allocator, AllocationPlan, TwoPhaseAllocator
from loanscale.cluster import ClusterState, JobSpec, JobState, JobPhase, WorkerRole, usage_metrics, WORKLOAD_TOLERANCE
from loanscale.data.traces import JobTrace, UtilTrace
from loanscale.loaning import InstructionKind, LoanController, LoanPolicy, execute_loan, execute_reclaim, preempt_job
from loanscale.placement import place_workers
from loanscale.reclaim import ReclaimSelector, PreemptionCostSelector
from loanscale.simulation.Event import Event, EventKind, EventQueue
from loanscale.simulation.MetricsReport import MetricsReport, JobRecord, UsageSample
from loanscale.simulation.ScenarioConfig import ScenarioConfig
from loanscale.simulation.progress import progress_rate, inject_prediction_error, apply_scenario, scaling_efficiency

logger = logging.getLogger(__name__)

# Events after which an event-driven simulation runs a scheduling pass.
_TRIGGERS = {EventKind.ARRIVAL, EventKind.COMPLETION, EventKind.PREEMPT, EventKind.SCHED_TICK}


class Simulator:
    """
    Discrete-event simulator of a training cluster that borrows idle
    servers from an inference cluster.

    Jobs arrive as given by their submission times. At every scheduling
    tick, and in event-driven mode also right after arrivals, completions,
    preemptions and loans, the allocator decides how many workers each job
    gets and the workers are placed with best-fit decreasing. At every
    orchestrator tick, the loan controller decides how many servers to loan
    or reclaim given the inference utilization. Events at the same time
    are processed together, followed by at most one scheduling pass.

    Parameters
    ----------
    jobs: list of JobSpec
        The jobs to simulate.
    util: UtilTrace, default=None
        The utilization of the inference cluster. If None, the inference
        cluster is considered idle.
    allocator: Allocator, default=None
        The allocation policy. Defaults to a :py:class:`~loanscale.allocation.TwoPhaseAllocator`.
    reclaim_policy: ReclaimSelector, default=None
        The policy choosing which servers to reclaim when flexible workers
        do not suffice. Defaults to a :py:class:`~loanscale.reclaim.PreemptionCostSelector`.
    loan_controller: LoanController, default=None
        The source of loan instructions. Defaults to a
        :py:class:`~loanscale.loaning.LoanPolicy` over the inference cluster.
    config: ScenarioConfig, default=None
        The simulated scenario. Defaults to ``ScenarioConfig()``.
    seed: int, default=0
        The seed of all randomness in the simulation.

    Attributes
    ----------
    cluster: ClusterState
        The state of the cluster, which evolves during :py:meth:`run`.
    """
    cluster: ClusterState

    def __init__(self,
                 jobs: List[JobSpec],
                 util: Optional[UtilTrace] = None,
                 allocator: Allocator = None,
                 reclaim_policy: ReclaimSelector = None,
                 loan_controller: LoanController = None,
                 config: ScenarioConfig = None,
                 seed: int = 0):
        if not utils.is_valid_list(jobs, JobSpec):
            raise TypeError('`jobs` should be a list of JobSpec')
        if util is not None and not isinstance(util, UtilTrace):
            raise TypeError('`util` should be a UtilTrace')
        if allocator is not None and not isinstance(allocator, Allocator):
            raise TypeError('`allocator` should be an Allocator')
        if reclaim_policy is not None and not isinstance(reclaim_policy, ReclaimSelector):
            raise TypeError('`reclaim_policy` should be a ReclaimSelector')
        if loan_controller is not None and not isinstance(loan_controller, LoanController):
            raise TypeError('`loan_controller` should be a LoanController')
        if config is not None and not isinstance(config, ScenarioConfig):
            raise TypeError('`config` should be a ScenarioConfig')
        utils.check_integer('seed', seed, minimum=0)

        self.config = config or ScenarioConfig()
        self.util = util
        self.allocator = allocator or TwoPhaseAllocator()
        self.reclaim_policy = reclaim_policy or PreemptionCostSelector()
        self.loan_controller = loan_controller or LoanPolicy(self.config.n_inference_servers, interval_s=int(self.config.orch_interval_s))
        self.seed = seed
        self.specs = apply_scenario(jobs, self.config, seed)
        self._check_jobs()
        self._preemptions = []

    def _check_jobs(self) -> None:
        ids = [spec.id for spec in self.specs]
        if len(set(ids)) != len(ids):
            raise ValueError('Job ids should be unique')
        for spec in self.specs:
            if spec.gpus_per_worker > self.config.gpus_per_server:
                raise ValueError(f'Job `{spec.id}` needs {spec.gpus_per_worker} GPUs per worker, but servers have {self.config.gpus_per_server}')
            workers_per_server = self.config.gpus_per_server // spec.gpus_per_worker
            if spec.min_workers > self.config.n_training_servers * workers_per_server:
                raise ValueError(f'The base demand of job `{spec.id}` does not fit in the training cluster')

    def schedule_preemption(self, job_id: str, at_s: float) -> None:
        """
        Preempt a job at the given time, as if an operator stopped it. Has
        no effect if the job is not running at that time.
        """
        if job_id not in {spec.id for spec in self.specs}:
            raise KeyError(f'Unknown job: {job_id}')
        if not utils.is_real(at_s):
            raise TypeError('`at_s` should be numeric')
        if at_s < 0:
            raise ValueError('`at_s` should be non-negative')
        self._preemptions.append((job_id, float(at_s)))

    ###################################################################
    # MAIN LOOP
    ###################################################################

    def run(self) -> Tuple[MetricsReport, List[Event]]:
        """
        Simulate until every job has finished.

        Returns
        -------
        report: MetricsReport
            The metrics of the simulation.
        events: list of Event
            The event log: arrivals, completions, preemptions, every change
            in the workers of a job, and every loan or reclaim.
        """
        config = self.config
        self.cluster = ClusterState.from_sizes(config.n_training_servers, config.n_inference_servers, config.gpus_per_server, config.inference_speed_factor)
        self.allocator.reset()
        self.allocator.use_scaling_model(partial(scaling_efficiency, imperfect_scaling=config.imperfect_scaling))
        self.loan_controller.reset()
        self.report = MetricsReport(policy=self._policy_name(), n_submissions=len(self.specs))
        self.events = []
        self._states = {spec.id: JobState(spec) for spec in self.specs}
        if config.predict_error is not None:
            inject_prediction_error(list(self._states.values()), config.predict_error.fraction, config.predict_error.max_rel, config.predict_error.seed)
        self._n_finished = 0

        logger.info('Simulating %d jobs on %d training and %d inference servers (%s)',
                    len(self.specs), config.n_training_servers, config.n_inference_servers, self.report.policy)
        if len(self.specs) == 0:
            return self.report, self.events

        self.queue = EventQueue()
        for spec in self.specs:
            self.queue.push(Event(float(spec.submit_s), EventKind.ARRIVAL, spec.id))
        for job_id, at_s in self._preemptions:
            self.queue.push(Event(at_s, EventKind.PREEMPT, job_id))
        self.queue.push(Event(0.0, EventKind.SCHED_TICK))
        self.queue.push(Event(0.0, EventKind.USAGE_SAMPLE))
        if config.loaning:
            self.queue.push(Event(0.0, EventKind.ORCH_TICK))

        while len(self.queue) > 0 and self._n_finished < len(self.specs):
            batch = self.queue.pop_batch()
            now = batch[0].at_s
            self.cluster.now_s = now
            needs_pass = False
            samples = []
            for event in batch:
                if event.kind == EventKind.USAGE_SAMPLE:
                    samples.append(event)
                    continue
                changed = self._handle(event, now)
                if event.kind == EventKind.SCHED_TICK or (config.event_driven and changed):
                    needs_pass = True
            if needs_pass and self._n_finished < len(self.specs):
                self._schedule(now)
            for _ in samples:
                self._sample_usage(now)
            if config.check_invariants:
                self.cluster.check_invariants()

        logger.info('Simulation finished at %.1f s: %d preemptions, %d loans, %d reclaims',
                    self.cluster.now_s, self.report.n_preemptions, self.report.loan_count, self.report.reclaim_count)
        return self.report, self.events

    def _handle(self, event: Event, now: float) -> bool:
        """ Process a single event, and return whether it calls for a scheduling pass. """
        unfinished = self._n_finished < len(self.specs)
        if event.kind == EventKind.ARRIVAL:
            job = self._states[event.job_id]
            self.cluster.add_job(job)
            self._log(now, EventKind.ARRIVAL, job.id)
            return True
        if event.kind == EventKind.COMPLETION:
            job = self.cluster.jobs.get(event.job_id)
            if job is None or job.version != event.version or job.phase != JobPhase.RUNNING:
                return False
            self._complete(job, now)
            return True
        if event.kind == EventKind.PREEMPT:
            job = self.cluster.jobs.get(event.job_id)
            if job is None or job.phase != JobPhase.RUNNING:
                logger.debug('Ignoring preemption of job %s, it is not running at %.1f s', event.job_id, now)
                return False
            self._advance(job, now)
            preempt_job(self.cluster, job.id)
            self._on_preempted(job, now)
            return True
        if event.kind == EventKind.SCHED_TICK:
            if unfinished:
                self.queue.push(Event(now + self.config.sched_interval_s, EventKind.SCHED_TICK))
            return True
        if event.kind == EventKind.ORCH_TICK:
            if unfinished:
                self.queue.push(Event(now + self.config.orch_interval_s, EventKind.ORCH_TICK))
            return self._orchestrate(now)
        raise ValueError(f'Cannot process an event of kind {event.kind.value}')

    ###################################################################
    # JOB PROGRESS
    ###################################################################

    def _set_phase(self, job: JobState, phase: JobPhase, now: float) -> None:
        elapsed = now - job.phase_since_s
        if job.is_waiting:
            job.queuing_s += elapsed
        elif job.phase == JobPhase.RUNNING:
            job.service_s += elapsed
        job.phase = phase
        job.phase_since_s = now

    def _advance(self, job: JobState, now: float) -> None:
        """ Account for the progress of a job up to ``now``. """
        if job.n_workers > 0 and now > job.progress_since_s:
            paused = max(0.0, min(now, job.paused_until_s) - job.progress_since_s)
            job.overhead_s += paused
            start = max(job.progress_since_s, job.paused_until_s)
            if now > start:
                job.workload.remaining = max(0.0, job.workload.remaining - progress_rate(job, self.config) * (now - start))
        job.progress_since_s = now

    def _project(self, job: JobState, now: float) -> None:
        """ Invalidate the projected completion of a job, and project it anew. """
        job.version += 1
        rate = progress_rate(job, self.config)
        if rate > 0:
            at_s = max(now, job.paused_until_s) + job.workload.remaining / rate
            self.queue.push(Event(at_s, EventKind.COMPLETION, job.id, version=job.version))

    def _complete(self, job: JobState, now: float) -> None:
        self._advance(job, now)
        if job.workload.remaining > WORKLOAD_TOLERANCE * max(1.0, job.workload.total):
            raise AssertionError(f'Job `{job.id}` completes with {job.workload.remaining} worker-seconds left')
        job.workload.remaining = 0.0
        self.cluster.remove_all_workers(job.id)
        self._set_phase(job, JobPhase.FINISHED, now)
        job.finish_s = now
        job.version += 1
        self._n_finished += 1
        self.allocator.on_completion(job.id)
        self._log(now, EventKind.COMPLETION, job.id)
        self.report.jobs.append(JobRecord(
            id=job.id,
            submit_s=float(job.spec.submit_s),
            first_start_s=job.first_start_s,
            finish_s=job.finish_s,
            queuing_s=job.queuing_s,
            running_s=job.service_s - job.overhead_s,
            overhead_s=job.overhead_s,
            preemptions=job.preempt_count
        ))

    def _on_preempted(self, job: JobState, now: float) -> None:
        """ Bookkeeping after :py:func:`~loanscale.loaning.preempt_job` stopped a job. """
        job.service_s += now - job.phase_since_s
        job.phase_since_s = now
        job.pending_overhead_s = self.config.preempt_overhead_s
        job.version += 1
        self.report.n_preemptions += 1
        self._log(now, EventKind.PREEMPT, job.id)

    def _after_scaling(self, job: JobState, delta: int, now: float) -> None:
        if self.config.scale_overhead_s > 0:
            job.paused_until_s = max(job.paused_until_s, now + self.config.scale_overhead_s)
        self.report.scale_op_count += 1
        self._log_scale(job, delta, now)
        self._project(job, now)

    ###################################################################
    # SCHEDULING
    ###################################################################

    def _schedule(self, now: float) -> None:
        running = self.cluster.running_jobs()
        for job in running:
            self._advance(job, now)
        waiting = [job for job in self.cluster.jobs.values() if job.is_waiting]
        running_elastic = [job for job in running if job.is_elastic]
        if len(waiting) == 0 and len(running_elastic) == 0:
            return

        capacity = self.cluster.free_training_gpus() + sum(job.n_flexible * job.spec.gpus_per_worker for job in running_elastic)
        plan = self.allocator.allocate(waiting, running_elastic, capacity)

        # Scale in before placing, such that freed GPUs can be reused.
        for job in running_elastic:
            grant = plan.flexible_grant.get(job.id, job.n_flexible)
            if grant < job.n_flexible and not self.config.reshuffle_flexible:
                plan.flexible_grant[job.id] = job.n_flexible
            elif grant < job.n_flexible:
                self._scale_in(job, job.n_flexible - grant, now)

        self._place(plan, now)

    def _scale_in(self, job: JobState, n: int, now: float) -> None:
        """ Stop ``n`` flexible workers, those on loaned servers and most recently started first. """
        self._advance(job, now)
        flexible = [worker for worker in job.workers.values() if worker.role == WorkerRole.FLEXIBLE]
        order = sorted(
            range(len(flexible)),
            key=lambda index: (not self.cluster.servers[flexible[index].server_id].on_loan, -index)
        )
        for index in order[:n]:
            self.cluster.remove_worker(job.id, flexible[index].id)
        self._after_scaling(job, -n, now)

    def _place(self, plan: AllocationPlan, now: float) -> None:
        placement = place_workers(plan, self.cluster, self.config.flexible_group)
        for job_id in placement.deferred:
            logger.debug('Placement deferred job %s at %.1f s', job_id, now)

        assignments: Dict[str, list] = {}
        for assignment in placement.assignments:
            assignments.setdefault(assignment.job_id, []).append(assignment)

        for job_id, job_assignments in assignments.items():
            job = self.cluster.job(job_id)
            starting = job.is_waiting
            self._advance(job, now)
            for assignment in job_assignments:
                self.cluster.place_worker(job_id, assignment.server_id, assignment.role)
            if starting:
                self._set_phase(job, JobPhase.RUNNING, now)
                if job.first_start_s is None:
                    job.first_start_s = now
                job.paused_until_s = now + job.pending_overhead_s
                job.pending_overhead_s = 0.0
                job.progress_since_s = now
                self._log_scale(job, len(job_assignments), now)
                self._project(job, now)
            else:
                self._after_scaling(job, len(job_assignments), now)

    ###################################################################
    # ORCHESTRATION
    ###################################################################

    def _orchestrate(self, now: float) -> bool:
        util = self.util.at(now) if self.util is not None else 0.0
        self.cluster.inference_util = util
        on_loan = len(self.cluster.on_loan_servers())
        instruction = self.loan_controller.instruction(now, util, on_loan)

        if instruction.kind == InstructionKind.LOAN:
            moved, _ = execute_loan(self.cluster, instruction.n)
            if len(moved) == 0:
                return False
            self.report.loan_count += 1
            self.report.servers_loaned += len(moved)
            self._log(now, EventKind.LOAN_MOVE, payload={'n': len(moved), 'servers': moved})
            logger.info('Loaned %d servers at %.1f s (utilization %.3f)', len(moved), now, util)
            return True

        if instruction.kind == InstructionKind.RECLAIM:
            n = instruction.n
            if n > on_loan:
                logger.warning('Reclaim of %d servers at %.1f s clamped to the %d servers on loan', n, now, on_loan)
                n = on_loan
            if n == 0:
                return False
            for job in self.cluster.running_jobs():
                self._advance(job, now)
            result = execute_reclaim(self.cluster, n, self.reclaim_policy, before_change=lambda job_id: self._advance(self.cluster.jobs[job_id], now))

            for job_id in utils.sorted_ids(result.scaled_in):
                job = self.cluster.jobs[job_id]
                if job_id not in result.outcome.preempted_jobs:
                    self._after_scaling(job, -result.scaled_in[job_id], now)
            for job_id in result.outcome.preempted_jobs:
                self._on_preempted(self.cluster.jobs[job_id], now)

            self.report.reclaim_count += 1
            self.report.servers_reclaimed += len(result.returned)
            self.report.servers_drained += len(result.drained)
            if len(result.outcome.selected_servers) > 0:
                self.report.collateral_damages.append(result.outcome.collateral_damage(self.config.gpus_per_server, n))
            self._log(now, EventKind.RECLAIM_MOVE, payload={
                'n': n,
                'servers': result.returned,
                'drained': len(result.drained),
                'preempted': result.outcome.preempted_jobs
            })
            logger.info('Reclaimed %d servers at %.1f s (utilization %.3f): %d drained, %d jobs preempted',
                        n, now, util, len(result.drained), result.outcome.n_preemptions)
            return True

        return False

    ###################################################################
    # RECORDING
    ###################################################################

    def _log(self, now: float, kind: EventKind, job_id: str = None, payload: dict = None) -> None:
        self.events.append(Event(now, kind, job_id, payload or {}))

    def _log_scale(self, job: JobState, delta: int, now: float) -> None:
        kinds = {worker.kind for worker in job.workers.values()}
        self._log(now, EventKind.SCALE, job.id, {
            'delta': delta,
            'workers': job.n_workers,
            'speed': sum(worker.speed_factor for worker in job.workers.values()),
            'hetero': job.spec.hetero_capable and len(kinds) > 1
        })

    def _sample_usage(self, now: float) -> None:
        if self.util is not None:
            self.cluster.inference_util = self.util.at(now)
        training_usage, overall_usage = usage_metrics(self.cluster)
        self.report.usage.append(UsageSample(now, training_usage, overall_usage, len(self.cluster.on_loan_servers())))
        if self._n_finished < len(self.specs):
            self.queue.push(Event(now + self.config.usage_interval_s, EventKind.USAGE_SAMPLE))

    def _policy_name(self) -> str:
        return f'{self.allocator}/{self.reclaim_policy}/{self.config.label()}'


def run(jobs: Union[JobTrace, List[JobSpec]],
        util: Optional[UtilTrace] = None,
        allocator: Allocator = None,
        reclaim_policy: ReclaimSelector = None,
        loan_controller: LoanController = None,
        config: ScenarioConfig = None,
        seed: int = 0) -> Tuple[MetricsReport, List[Event]]:
    """
    Simulate a job trace. See :py:class:`Simulator` for the parameters.

    Returns
    -------
    report: MetricsReport
        The metrics of the simulation.
    events: list of Event
        The event log.
    """
    if isinstance(jobs, JobTrace):
        jobs = list(jobs.jobs)
    return Simulator(jobs, util, allocator, reclaim_policy, loan_controller, config, seed).run()
