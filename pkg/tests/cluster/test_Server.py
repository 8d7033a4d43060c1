import pytest

from loanscale.cluster import Server, GpuKind, ServerGroup


class TestServer:

    def test_training_defaults(self):
        server = Server('t0', GpuKind.TRAINING)
        assert server.total_gpus == 8
        assert server.free_gpus == 8
        assert server.used_gpus == 0
        assert server.speed_factor == 1.0
        assert server.group == ServerGroup.TRAINING_POOL
        assert not server.on_loan
        assert server.is_empty()

    def test_inference_defaults(self):
        server = Server('i0', GpuKind.INFERENCE)
        assert server.speed_factor == 0.25
        assert server.group == ServerGroup.INFERENCE

    def test_custom_speed_factor(self):
        assert Server('i0', GpuKind.INFERENCE, 4, speed_factor=0.5).speed_factor == 0.5

    def test_id_not_string(self):
        with pytest.raises(TypeError):
            Server(0, GpuKind.TRAINING)

    def test_invalid_kind(self):
        with pytest.raises(TypeError):
            Server('s', 'Training')

    def test_no_gpus(self):
        with pytest.raises(ValueError):
            Server('s', GpuKind.TRAINING, 0)

    @pytest.mark.parametrize('speed_factor', [0, 1.5, -0.25])
    def test_invalid_speed_factor(self, speed_factor):
        with pytest.raises(ValueError):
            Server('s', GpuKind.INFERENCE, speed_factor=speed_factor)

    def test_job_ids_unique(self):
        server = Server('s', GpuKind.TRAINING)
        server.workers[('x', 'x/w0')] = 2
        server.workers[('y', 'y/w0')] = 2
        server.workers[('x', 'x/w1')] = 2
        assert server.job_ids() == ['x', 'y']
