import pytest

from loanscale.simulation import Scenario, ImperfectScaling, PredictError, ScenarioConfig


class TestImperfectScaling:

    def test_default(self):
        assert ImperfectScaling().loss_per_step == 0.10

    @pytest.mark.parametrize('loss', [-0.1, 1.0, 1.5])
    def test_invalid(self, loss):
        with pytest.raises(ValueError):
            ImperfectScaling(loss)


class TestPredictError:

    def test_defaults(self):
        error = PredictError(0.2)
        assert error.max_rel == 0.25
        assert error.seed == 0

    def test_invalid_fraction(self):
        with pytest.raises(ValueError):
            PredictError(1.5)

    def test_invalid_max_rel(self):
        with pytest.raises(ValueError):
            PredictError(0.2, max_rel=1.0)

    def test_invalid_seed(self):
        with pytest.raises(ValueError):
            PredictError(0.2, seed=-1)


class TestScenarioConfig:

    def test_defaults(self):
        config = ScenarioConfig()
        assert config.scenario == Scenario.BASIC
        assert config.sched_interval_s == 60
        assert config.orch_interval_s == 300
        assert config.preempt_overhead_s == 63
        assert config.hetero_efficiency == 0.7
        assert config.inference_speed_factor == 0.25
        assert config.n_training_servers == 64
        assert config.n_inference_servers == 64
        assert config.gpus_per_server == 8

    def test_invalid_scenario(self):
        with pytest.raises(TypeError):
            ScenarioConfig(scenario='basic')

    @pytest.mark.parametrize('name', ['sched_interval_s', 'orch_interval_s', 'usage_interval_s'])
    def test_invalid_interval(self, name):
        with pytest.raises(ValueError):
            ScenarioConfig(**{name: 0})
        with pytest.raises(TypeError):
            ScenarioConfig(**{name: '60'})

    @pytest.mark.parametrize('name', ['preempt_overhead_s', 'scale_overhead_s'])
    def test_overheads(self, name):
        assert getattr(ScenarioConfig(**{name: 0}), name) == 0
        with pytest.raises(ValueError):
            ScenarioConfig(**{name: -1})

    def test_invalid_hetero_efficiency(self):
        with pytest.raises(ValueError):
            ScenarioConfig(hetero_efficiency=0.0)

    def test_invalid_speed_factor(self):
        with pytest.raises(ValueError):
            ScenarioConfig(inference_speed_factor=1.5)

    def test_invalid_nested(self):
        with pytest.raises(TypeError):
            ScenarioConfig(imperfect_scaling=0.1)
        with pytest.raises(TypeError):
            ScenarioConfig(predict_error={'fraction': 0.2})

    @pytest.mark.parametrize('name', ['event_driven', 'reshuffle_flexible', 'flexible_group', 'loaning', 'check_invariants'])
    def test_invalid_switch(self, name):
        with pytest.raises(TypeError):
            ScenarioConfig(**{name: 1})

    def test_invalid_sizes(self):
        with pytest.raises(ValueError):
            ScenarioConfig(n_training_servers=0)
        assert ScenarioConfig(n_inference_servers=0).n_inference_servers == 0
        with pytest.raises(TypeError):
            ScenarioConfig(gpus_per_server=8.0)

    def test_to_dict(self):
        config = ScenarioConfig(scenario=Scenario.ADVANCED, imperfect_scaling=ImperfectScaling(0.2))
        as_dict = config.to_dict()
        assert as_dict['scenario'] == 'advanced'
        assert as_dict['imperfect_scaling'] == {'loss_per_step': 0.2}
        assert as_dict['predict_error'] is None

    def test_from_dict(self):
        config = ScenarioConfig.from_dict({
            'scenario': 'Ideal',
            'n_training_servers': 4,
            'predict_error': {'fraction': 0.3, 'seed': 2}
        })
        assert config.scenario == Scenario.IDEAL
        assert config.n_training_servers == 4
        assert config.predict_error == PredictError(0.3, seed=2)
        assert config.orch_interval_s == 300

    def test_dict_round_trip(self):
        config = ScenarioConfig(scenario=Scenario.ADVANCED, loaning=False, predict_error=PredictError(0.1))
        assert ScenarioConfig.from_dict(config.to_dict()) == config

    def test_from_dict_empty(self):
        assert ScenarioConfig.from_dict({}) == ScenarioConfig()

    def test_from_dict_unknown_key(self):
        with pytest.raises(ValueError):
            ScenarioConfig.from_dict({'n_servers': 4})

    def test_from_dict_unknown_scenario(self):
        with pytest.raises(ValueError):
            ScenarioConfig.from_dict({'scenario': 'perfect'})

    def test_from_dict_no_dict(self):
        with pytest.raises(TypeError):
            ScenarioConfig.from_dict([('scenario', 'basic')])

    def test_label(self):
        assert ScenarioConfig().label() == 'basic'
        assert ScenarioConfig(scenario=Scenario.IDEAL, loaning=False).label() == 'ideal-noloan'
        config = ScenarioConfig(imperfect_scaling=ImperfectScaling(), predict_error=PredictError(0.2), flexible_group=False)
        assert config.label() == 'basic+imperfect(0.1)+error(0.2)-nogroup'
