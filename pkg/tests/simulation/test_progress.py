import numpy as np
import pytest

from loanscale.cluster import JobSpec, JobState, Worker, GpuKind, WorkerRole
from loanscale.simulation import (
    Scenario, ScenarioConfig, ImperfectScaling, Event, EventKind,
    scaling_efficiency, progress_rate, inject_prediction_error, apply_scenario,
    AllocationStep, allocation_history, replay_running_time
)


def workers(n_training: int, n_inference: int = 0) -> list:
    return (
        [Worker(f'x/w{i}', 't000', GpuKind.TRAINING, 1.0, WorkerRole.BASE) for i in range(n_training)]
        + [Worker(f'x/w{n_training + i}', 'i000', GpuKind.INFERENCE, 0.25, WorkerRole.FLEXIBLE) for i in range(n_inference)]
    )


class TestScalingEfficiency:

    def test_linear(self):
        assert scaling_efficiency(JobSpec('x', 0, 1, 2, 6, 10.0), 6) == 1.0

    def test_one_step_past_midpoint(self):
        assert scaling_efficiency(JobSpec('x', 0, 1, 2, 6, 10.0), 5, ImperfectScaling()) == pytest.approx(0.9)

    def test_two_steps_past_midpoint(self):
        assert scaling_efficiency(JobSpec('x', 0, 1, 2, 6, 10.0), 6, ImperfectScaling()) == pytest.approx(0.81)

    @pytest.mark.parametrize('n_workers', [2, 3, 4])
    def test_up_to_midpoint(self, n_workers):
        assert scaling_efficiency(JobSpec('x', 0, 1, 2, 6, 10.0), n_workers, ImperfectScaling()) == 1.0

    def test_odd_range(self):
        # Midpoint of [1, 4] rounds up to 3
        spec = JobSpec('x', 0, 1, 1, 4, 10.0)
        assert scaling_efficiency(spec, 3, ImperfectScaling()) == 1.0
        assert scaling_efficiency(spec, 4, ImperfectScaling(0.2)) == pytest.approx(0.8)


class TestProgressRate:

    def test_training_workers(self):
        job = JobState(JobSpec('x', 0, 1, 4, 4, 100.0))
        assert progress_rate(job, ScenarioConfig(), workers(4)) == 4.0

    def test_inference_workers(self):
        job = JobState(JobSpec('x', 0, 1, 2, 4, 100.0, hetero_capable=True))
        assert progress_rate(job, ScenarioConfig(), workers(2, 2)) == pytest.approx(2.5)

    def test_hetero_penalty(self):
        job = JobState(JobSpec('x', 0, 1, 2, 4, 100.0, hetero_capable=True))
        config = ScenarioConfig(scenario=Scenario.ADVANCED)
        assert progress_rate(job, config, workers(2, 2)) == pytest.approx(0.7 * 2.5)

    def test_no_hetero_penalty_on_single_kind(self):
        job = JobState(JobSpec('x', 0, 1, 2, 4, 100.0, hetero_capable=True))
        assert progress_rate(job, ScenarioConfig(scenario=Scenario.ADVANCED), workers(0, 4)) == pytest.approx(1.0)

    def test_imperfect_scaling(self):
        job = JobState(JobSpec('x', 0, 1, 2, 6, 100.0))
        config = ScenarioConfig(imperfect_scaling=ImperfectScaling())
        assert progress_rate(job, config, workers(5)) == pytest.approx(5 * 0.9)

    def test_no_workers(self):
        assert progress_rate(JobState(JobSpec('x', 0, 1, 2, 6, 100.0)), ScenarioConfig()) == 0.0

    def test_current_workers(self, small_cluster, start_job):
        job = start_job(small_cluster, JobSpec('x', 0, 2, 3, 3, 100.0), ['t000', 't000', 't001'])
        assert progress_rate(job, ScenarioConfig()) == 3.0


class TestInjectPredictionError:

    @staticmethod
    def jobs(n: int = 20) -> list:
        return [JobState(JobSpec(f'j{i}', i, 1, 1, 1, 100.0 + i)) for i in range(n)]

    def test_fraction(self):
        jobs = inject_prediction_error(self.jobs(), 0.25, seed=3)
        wrong = [job for job in jobs if job.estimated_runtime_s != job.spec.runtime_at_max_s]
        assert len(wrong) == 5
        for job in wrong:
            assert 0 < abs(job.estimated_runtime_s / job.spec.runtime_at_max_s - 1) <= 0.25 + 1e-12

    def test_no_errors(self):
        jobs = inject_prediction_error(self.jobs(), 0.0)
        assert all(job.estimated_runtime_s == job.spec.runtime_at_max_s for job in jobs)

    def test_resets_estimates(self):
        jobs = self.jobs()
        jobs[0].estimated_runtime_s = 1.0
        inject_prediction_error(jobs, 0.0)
        assert jobs[0].estimated_runtime_s == jobs[0].spec.runtime_at_max_s

    def test_deterministic(self):
        first = [job.estimated_runtime_s for job in inject_prediction_error(self.jobs(), 0.5, seed=7)]
        second = [job.estimated_runtime_s for job in inject_prediction_error(self.jobs(), 0.5, seed=7)]
        assert first == second

    def test_true_runtime_unchanged(self):
        jobs = inject_prediction_error(self.jobs(), 1.0, seed=1)
        assert [job.spec.runtime_at_max_s for job in jobs] == [100.0 + i for i in range(20)]
        assert [job.workload.total for job in jobs] == [100.0 + i for i in range(20)]

    def test_invalid(self):
        with pytest.raises(TypeError):
            inject_prediction_error([JobSpec('x', 0, 1, 1, 1, 1.0)], 0.5)
        with pytest.raises(ValueError):
            inject_prediction_error(self.jobs(), 1.5)
        with pytest.raises(ValueError):
            inject_prediction_error(self.jobs(), 0.5, max_rel=1.0)


class TestApplyScenario:

    @staticmethod
    def specs() -> list:
        return [
            JobSpec('a', 0, 2, 3, 3, 100.0),
            JobSpec('b', 0, 1, 2, 4, 50.0, gpu_flexible=True),
        ] + [JobSpec(f'f{i}', 0, 1, 1, 1, 10.0, gpu_flexible=True) for i in range(9)]

    def test_basic(self):
        specs = self.specs()
        assert apply_scenario(specs, ScenarioConfig()) == specs

    def test_advanced(self):
        specs = apply_scenario(self.specs(), ScenarioConfig(scenario=Scenario.ADVANCED, hetero_fraction=0.3), seed=4)
        hetero = [spec for spec in specs if spec.hetero_capable]
        assert len(hetero) == 3
        assert all(spec.gpu_flexible for spec in hetero)

    def test_advanced_counts_all_jobs(self):
        # Ten jobs, none of which can run on inference GPUs by themselves
        specs = [JobSpec(f'j{i}', 0, 1, 1, 1, 10.0) for i in range(10)]
        adjusted = apply_scenario(specs, ScenarioConfig(scenario=Scenario.ADVANCED), seed=1)
        hetero = [spec for spec in adjusted if spec.hetero_capable]
        assert len(hetero) == 1
        assert hetero[0].gpu_flexible
        assert sum(spec.gpu_flexible for spec in adjusted) == 1

    def test_advanced_deterministic(self):
        config = ScenarioConfig(scenario=Scenario.ADVANCED, hetero_fraction=0.5)
        assert apply_scenario(self.specs(), config, seed=2) == apply_scenario(self.specs(), config, seed=2)

    def test_ideal(self):
        a, b = apply_scenario(self.specs(), ScenarioConfig(scenario=Scenario.IDEAL))[:2]
        assert (a.min_workers, a.max_workers) == (3, 6)
        assert a.runtime_at_max_s == 50.0
        assert a.total_workload == 300.0
        assert a.gpu_flexible and a.hetero_capable
        assert (b.min_workers, b.max_workers, b.runtime_at_max_s) == (2, 4, 50.0)
        assert b.hetero_capable


class TestAllocationHistory:

    def test_history(self):
        events = [
            Event(0.0, EventKind.ARRIVAL, 'x'),
            Event(10.0, EventKind.SCALE, 'x', {'delta': 2, 'workers': 2, 'speed': 2.0}),
            Event(20.0, EventKind.SCALE, 'y', {'delta': 1, 'workers': 1, 'speed': 1.0}),
            Event(30.0, EventKind.PREEMPT, 'x'),
            Event(40.0, EventKind.SCALE, 'x', {'delta': 2, 'workers': 2, 'speed': 0.5, 'hetero': False}),
            Event(50.0, EventKind.SCALE, 'x', {'delta': 1, 'workers': 3, 'speed': 1.5}),
        ]
        assert allocation_history(events, 'x') == [
            AllocationStep(10.0, 2, 2.0),
            AllocationStep(30.0, 0, 0.0),
            AllocationStep(40.0, 2, 0.5, restart=True),
            AllocationStep(50.0, 3, 1.5),
        ]

    def test_unknown_job(self):
        assert allocation_history([Event(0.0, EventKind.ARRIVAL, 'x')], 'y') == []


class TestReplayRunningTime:

    def test_constant(self):
        spec = JobSpec('x', 0, 1, 2, 4, 50.0)
        assert replay_running_time(spec, [AllocationStep(10.0, 4, 4.0)], ScenarioConfig()) == pytest.approx(50.0)

    def test_scale_out(self):
        spec = JobSpec('x', 0, 1, 2, 4, 50.0)
        history = [AllocationStep(0.0, 2, 2.0), AllocationStep(20.0, 4, 4.0)]
        # 40 of 200 worker-seconds done after 20 s, the rest at rate 4
        assert replay_running_time(spec, history, ScenarioConfig()) == pytest.approx(60.0)

    def test_preemption_loses_progress(self):
        spec = JobSpec('x', 0, 1, 1, 1, 100.0)
        history = [AllocationStep(0.0, 1, 1.0), AllocationStep(30.0, 0, 0.0), AllocationStep(30.0, 1, 1.0, restart=True)]
        assert replay_running_time(spec, history, ScenarioConfig()) == pytest.approx(30 + 63 + 100)

    def test_preemption_with_checkpoint(self):
        spec = JobSpec('x', 0, 1, 1, 1, 100.0, checkpointing=True)
        history = [AllocationStep(0.0, 1, 1.0), AllocationStep(30.0, 0, 0.0), AllocationStep(50.0, 1, 1.0, restart=True)]
        assert replay_running_time(spec, history, ScenarioConfig()) == pytest.approx(50 + 63 + 70)

    def test_imperfect_scaling(self):
        spec = JobSpec('x', 0, 1, 2, 6, 10.0)
        history = [AllocationStep(0.0, 6, 6.0)]
        linear = replay_running_time(spec, history, ScenarioConfig())
        imperfect = replay_running_time(spec, history, ScenarioConfig(imperfect_scaling=ImperfectScaling()))
        assert imperfect == pytest.approx(linear / 0.81)

    def test_empty_history(self):
        with pytest.raises(ValueError):
            replay_running_time(JobSpec('x', 0, 1, 1, 1, 10.0), [], ScenarioConfig())

    def test_never_completes(self):
        history = [AllocationStep(0.0, 1, 1.0), AllocationStep(5.0, 0, 0.0)]
        with pytest.raises(ValueError):
            replay_running_time(JobSpec('x', 0, 1, 1, 1, 10.0), history, ScenarioConfig())
