import pytest

from loanscale.cluster import ClusterState, Server, GpuKind, ServerGroup, JobSpec, JobState, WorkerRole, occupancy, usage_metrics


class TestFromSizes:

    def test_ids(self):
        cluster = ClusterState.from_sizes(2, 3)
        assert list(cluster.servers) == ['i000', 'i001', 'i002', 't000', 't001']

    def test_whitelists(self):
        cluster = ClusterState.from_sizes(2, 3)
        assert cluster.whitelist_training == {'t000', 't001'}
        assert cluster.whitelist_inference == {'i000', 'i001', 'i002'}
        cluster.check_invariants()

    def test_inference_speed(self):
        cluster = ClusterState.from_sizes(1, 1, 4, inference_speed_factor=0.5)
        assert cluster.server('i000').speed_factor == 0.5
        assert cluster.server('i000').total_gpus == 4

    def test_free_training_gpus(self):
        assert ClusterState.from_sizes(2, 3, 8).free_training_gpus() == 16

    def test_duplicate_ids(self):
        with pytest.raises(ValueError):
            ClusterState([Server('s', GpuKind.TRAINING), Server('s', GpuKind.INFERENCE)])


class TestLookups:

    def test_unknown_server(self, small_cluster):
        with pytest.raises(KeyError):
            small_cluster.server('nope')

    def test_unknown_job(self, small_cluster):
        with pytest.raises(KeyError):
            small_cluster.job('nope')


class TestPlacement:

    def test_place_worker(self, small_cluster, start_job):
        job = start_job(small_cluster, JobSpec('x', 0, 4, 1, 1, 10.0), ['t000'])
        assert small_cluster.server('t000').free_gpus == 4
        assert job.n_workers == 1
        assert small_cluster.servers_of_job('x') == ['t000']
        small_cluster.check_invariants()

    def test_not_whitelisted(self, small_cluster, start_job):
        with pytest.raises(ValueError, match='whitelist'):
            start_job(small_cluster, JobSpec('x', 0, 4, 1, 1, 10.0), ['i000'])

    def test_too_full(self, small_cluster, start_job):
        with pytest.raises(ValueError):
            start_job(small_cluster, JobSpec('x', 0, 6, 2, 2, 10.0), ['t000', 't000'])

    def test_remove_all_workers(self, small_cluster, start_job):
        start_job(small_cluster, JobSpec('x', 0, 2, 3, 3, 10.0), ['t000', 't000', 't001'])
        assert small_cluster.remove_all_workers('x') == {'t000': 4, 't001': 2}
        assert small_cluster.free_training_gpus() == 16
        assert small_cluster.running_jobs() == []

    def test_unknown_worker(self, small_cluster, start_job):
        start_job(small_cluster, JobSpec('x', 0, 2, 1, 1, 10.0), ['t000'])
        with pytest.raises(KeyError):
            small_cluster.remove_worker('x', 'x/w9')


class TestLoaning:

    def test_loan(self, small_cluster):
        small_cluster.loan('i000')
        server = small_cluster.server('i000')
        assert server.on_loan
        assert server.group == ServerGroup.LOAN_UNGROUPED
        assert 'i000' in small_cluster.whitelist_training
        assert [s.id for s in small_cluster.on_loan_servers()] == ['i000']
        assert [s.id for s in small_cluster.idle_inference_servers()] == ['i001']
        small_cluster.check_invariants()

    def test_loan_twice(self, small_cluster):
        small_cluster.loan('i000')
        with pytest.raises(ValueError):
            small_cluster.loan('i000')

    def test_loan_training_server(self, small_cluster):
        with pytest.raises(ValueError):
            small_cluster.loan('t000')

    def test_groups(self, small_cluster, start_job):
        small_cluster.loan('i000')
        small_cluster.loan('i001')
        start_job(small_cluster, JobSpec('x', 0, 2, 1, 3, 10.0, gpu_flexible=True), ['i000', 'i001'], [WorkerRole.BASE, WorkerRole.FLEXIBLE])
        assert small_cluster.server('i000').group == ServerGroup.LOAN_BASE
        assert small_cluster.server('i001').group == ServerGroup.LOAN_FLEXIBLE

    def test_mixed_server_is_base(self, small_cluster, start_job):
        small_cluster.loan('i000')
        start_job(small_cluster, JobSpec('x', 0, 2, 1, 3, 10.0, gpu_flexible=True), ['i000', 'i000'], [WorkerRole.FLEXIBLE, WorkerRole.BASE])
        assert small_cluster.server('i000').group == ServerGroup.LOAN_BASE

    def test_empty_server_is_ungrouped(self, small_cluster, start_job):
        small_cluster.loan('i000')
        start_job(small_cluster, JobSpec('x', 0, 2, 1, 1, 10.0, gpu_flexible=True), ['i000'])
        small_cluster.remove_all_workers('x')
        assert small_cluster.server('i000').group == ServerGroup.LOAN_UNGROUPED

    def test_return_server(self, small_cluster):
        small_cluster.loan('i000')
        small_cluster.return_server('i000')
        server = small_cluster.server('i000')
        assert not server.on_loan
        assert server.group == ServerGroup.INFERENCE
        assert 'i000' in small_cluster.whitelist_inference
        small_cluster.check_invariants()

    def test_return_occupied_server(self, small_cluster, start_job):
        small_cluster.loan('i000')
        start_job(small_cluster, JobSpec('x', 0, 2, 1, 1, 10.0, gpu_flexible=True), ['i000'])
        with pytest.raises(ValueError):
            small_cluster.return_server('i000')

    def test_return_server_not_on_loan(self, small_cluster):
        with pytest.raises(ValueError):
            small_cluster.return_server('i000')


class TestCheckInvariants:

    def test_overlap(self, small_cluster):
        small_cluster.whitelist_training.add('i000')
        with pytest.raises(AssertionError):
            small_cluster.check_invariants()

    def test_gpus_not_conserved(self, small_cluster):
        small_cluster.server('t000').free_gpus = 7
        with pytest.raises(AssertionError):
            small_cluster.check_invariants()

    def test_copy_is_independent(self, small_cluster, start_job):
        start_job(small_cluster, JobSpec('x', 0, 2, 1, 1, 10.0), ['t000'])
        snapshot = small_cluster.copy()
        small_cluster.remove_all_workers('x')
        assert snapshot.server('t000').free_gpus == 6


class TestOccupancy:

    def test_empty_server(self, small_cluster):
        assert occupancy(small_cluster, 't000') == []

    def test_single_worker(self, small_cluster, start_job):
        start_job(small_cluster, JobSpec('x', 0, 4, 1, 1, 10.0), ['t000'])
        assert occupancy(small_cluster, 't000') == [('x', 4)]

    def test_shared_server(self, reclaim_cluster):
        assert occupancy(reclaim_cluster, 's5') == [('c', 2), ('d', 2)]

    def test_multiple_workers_of_a_job(self, reclaim_cluster):
        assert occupancy(reclaim_cluster, 's4') == [('c', 8)]

    def test_sums_to_used(self, reclaim_cluster):
        for server in reclaim_cluster.servers.values():
            assert sum(gpus for _, gpus in occupancy(reclaim_cluster, server.id)) == server.total_gpus - server.free_gpus

    def test_unknown_server(self, small_cluster):
        with pytest.raises(KeyError):
            occupancy(small_cluster, 'nope')


class TestUsageMetrics:

    def test_idle(self, small_cluster):
        assert usage_metrics(small_cluster) == (0.0, 0.0)

    def test_all_training_busy(self, small_cluster, start_job):
        start_job(small_cluster, JobSpec('x', 0, 8, 2, 2, 10.0), ['t000', 't001'])
        assert usage_metrics(small_cluster) == (1.0, 0.5)

    def test_inference_utilization(self, small_cluster, start_job):
        start_job(small_cluster, JobSpec('x', 0, 8, 1, 1, 10.0), ['t000'])
        small_cluster.inference_util = 0.5
        training_usage, overall_usage = usage_metrics(small_cluster)
        assert training_usage == pytest.approx(0.5)
        assert overall_usage == pytest.approx((8 + 8) / 32)

    def test_on_loan(self, small_cluster, start_job):
        small_cluster.loan('i000')
        start_job(small_cluster, JobSpec('x', 0, 8, 1, 1, 10.0, gpu_flexible=True), ['i000'])
        small_cluster.inference_util = 0.75
        training_usage, overall_usage = usage_metrics(small_cluster)
        assert training_usage == pytest.approx(8 / 24)
        # 12 GPUs serve requests, but only the 8 GPUs of i001 remain
        assert overall_usage == pytest.approx((8 + 8) / 32)

    def test_normalized(self, small_cluster, start_job):
        small_cluster.loan('i000')
        start_job(small_cluster, JobSpec('x', 0, 8, 1, 1, 10.0, gpu_flexible=True), ['i000'])
        training_usage, overall_usage = usage_metrics(small_cluster, normalized=True)
        assert training_usage == pytest.approx(2 / 18)
        assert overall_usage == pytest.approx(2 / 20)

    def test_large_training_cluster(self):
        cluster = ClusterState.from_sizes(443, 0, 8)
        busy = round(0.82 * 443 * 8)
        for index in range(443):
            n_workers = min(8, busy - 8 * index)
            if n_workers <= 0:
                break
            cluster.add_job(JobState(JobSpec(f'j{index}', 0, 1, n_workers, n_workers, 1.0)))
            for _ in range(n_workers):
                cluster.place_worker(f'j{index}', f't{index:03d}', WorkerRole.BASE)
        training_usage, overall_usage = usage_metrics(cluster)
        assert training_usage == pytest.approx(0.82, abs=1e-3)
        assert overall_usage == training_usage
