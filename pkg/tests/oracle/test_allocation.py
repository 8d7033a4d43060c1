import numpy as np
import pytest

from loanscale.allocation import MckpInstance, MckpGroup, MckpItem, mckp_dp
from loanscale.data import demonstration_mckp_instance
from loanscale.cluster import JobSpec
from loanscale.oracle import (
    RegimeError, TwoJobInstance, two_job_optimal, GuardExceededError,
    brute_force_allocation, brute_force_mckp
)


def random_two_job_instance(rng: np.random.Generator) -> TwoJobInstance:
    min_p = int(rng.integers(1, 5))
    max_p = int(rng.integers(min_p, 9))
    min_q = int(rng.integers(1, 5))
    max_q = int(rng.integers(max(max_p, min_q), 13))
    # Either job can get its maximum demand next to the minimum demand of the other
    lowest = max(min_p + min_q + 1, max_q + min_p, max_p + min_q)
    highest = max_p + max_q - 1
    if lowest > highest:
        return None
    capacity = int(rng.integers(lowest, highest + 1))
    return TwoJobInstance(
        float(rng.uniform(10, 500)), min_p, max_p,
        float(rng.uniform(10, 500)), min_q, max_q,
        capacity
    )


class TestTwoJobInstance:

    def test_to_jobs(self):
        p, q = TwoJobInstance(300, 2, 3, 120, 2, 6, 8).to_jobs()
        assert (p.id, p.min_workers, p.max_workers) == ('p', 2, 3)
        assert p.total_workload == pytest.approx(300)
        assert (q.id, q.min_workers, q.max_workers) == ('q', 2, 6)
        assert q.total_workload == pytest.approx(120)
        assert p.gpus_per_worker == q.gpus_per_worker == 1

    @pytest.mark.parametrize('arguments', [
        (300, 2, 6, 120, 2, 3, 8),  # p has the larger maximum demand
        (300, 2, 3, 120, 2, 6, 6),  # q alone saturates the cluster
        (300, 2, 3, 120, 2, 6, 9),  # both maximum demands fit
        (300, 4, 6, 120, 4, 6, 8),  # the minimum demands fill the cluster
    ])
    def test_regime(self, arguments):
        with pytest.raises(RegimeError):
            TwoJobInstance(*arguments)

    def test_invalid_workload(self):
        with pytest.raises(ValueError):
            TwoJobInstance(0, 2, 3, 120, 2, 6, 8)
        with pytest.raises(TypeError):
            TwoJobInstance('300', 2, 3, 120, 2, 6, 8)

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            TwoJobInstance(300, 4, 3, 120, 2, 6, 8)

    def test_regime_error_is_value_error(self):
        assert issubclass(RegimeError, ValueError)


class TestTwoJobOptimal:

    def test_smaller_maximum_first(self):
        gpus_p, gpus_q, avg = two_job_optimal(TwoJobInstance(300, 2, 3, 120, 2, 6, 8))
        assert (gpus_p, gpus_q) == (3, 5)
        assert avg == pytest.approx(62.0)

    def test_shorter_job_first(self):
        # Equal maximum demands: the job with less work gets the most GPUs
        gpus_p, gpus_q, avg = two_job_optimal(TwoJobInstance(300, 2, 6, 120, 2, 6, 8))
        assert (gpus_p, gpus_q) == (2, 6)
        assert avg == pytest.approx(41.67, abs=0.01)

    def test_maximum_demand_unattainable(self):
        # Granting q its maximum of 5 leaves 1 GPU, below the minimum of 3 for p
        instance = TwoJobInstance(408.04, 3, 4, 337.27, 1, 5, 6)
        with pytest.raises(RegimeError):
            two_job_optimal(instance)
        workers, _ = brute_force_allocation(instance.to_jobs(), instance.capacity)
        assert workers == {'p': 4, 'q': 2}

    def test_not_an_instance(self):
        with pytest.raises(RegimeError):
            two_job_optimal((300, 2, 3, 120, 2, 6, 8))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        n_checked = 0
        while n_checked < 500:
            instance = random_two_job_instance(rng)
            if instance is None:
                continue
            gpus_p, gpus_q, avg = two_job_optimal(instance)
            assert gpus_p + gpus_q == instance.capacity
            _, optimum = brute_force_allocation(instance.to_jobs(), instance.capacity)
            assert avg == pytest.approx(optimum, rel=1e-6)
            n_checked += 1


class TestBruteForceAllocation:

    def test_contention(self, contention):
        workers, avg = brute_force_allocation(contention, 8)
        assert workers == {'A': 2, 'B': 6}
        assert avg == pytest.approx(41.67, abs=0.01)

    def test_mixed_gpu(self, mixed_gpu):
        workers, avg = brute_force_allocation(mixed_gpu, 8)
        assert workers == {'A': 3, 'B': 5}
        assert avg == pytest.approx(62.0)

    def test_everything_fits(self):
        workers, avg = brute_force_allocation([JobSpec('A', 0, 1, 1, 2, 10.0), JobSpec('B', 0, 2, 1, 2, 20.0)], 8)
        assert workers == {'A': 2, 'B': 2}
        assert avg == pytest.approx(15.0)

    def test_empty(self):
        assert brute_force_allocation([], 8) == ({}, 0.0)

    def test_minimum_does_not_fit(self, contention):
        with pytest.raises(ValueError):
            brute_force_allocation(contention, 3)

    def test_too_many_jobs(self):
        jobs = [JobSpec(f'j{i}', 0, 1, 1, 2, 10.0) for i in range(5)]
        with pytest.raises(GuardExceededError):
            brute_force_allocation(jobs, 8)

    def test_too_many_gpus(self, contention):
        with pytest.raises(GuardExceededError):
            brute_force_allocation(contention, 33)

    def test_invalid_jobs(self):
        with pytest.raises(TypeError):
            brute_force_allocation(['A'], 8)


class TestBruteForceMckp:

    def test_empty(self):
        assert brute_force_mckp(MckpInstance([]), 4) == 0.0

    def test_zero_capacity(self):
        assert brute_force_mckp(demonstration_mckp_instance(), 0) == 0.0

    def test_demonstration(self):
        instance = demonstration_mckp_instance()
        assert brute_force_mckp(instance, 2) == pytest.approx(50.0)
        assert brute_force_mckp(instance, 6) == pytest.approx(90.0)
        assert brute_force_mckp(instance, 6) == pytest.approx(mckp_dp(instance, 6).value)

    def test_guard(self):
        groups = [MckpGroup(f'j{g}', [MckpItem(w, w, 1.0) for w in range(1, 10)]) for g in range(8)]
        with pytest.raises(GuardExceededError):
            brute_force_mckp(MckpInstance(groups), 40)

    def test_negative_capacity(self):
        with pytest.raises(ValueError):
            brute_force_mckp(MckpInstance([]), -1)
