import enum
import dataclasses
from typing import Any, Dict, Optional

from loanscale import utils


class Scenario(enum.Enum):
    """
    How capable the training jobs are. Valid options are:

    - ``BASIC``: jobs run as specified in the trace, and never span GPU kinds.
    - ``ADVANCED``: additionally, a fraction of the GPU-flexible jobs can
      train on training and inference GPUs at once, at reduced efficiency.
    - ``IDEAL``: every job is elastic, may run on inference GPUs and may
      span GPU kinds without any efficiency loss.
    """
    BASIC = 'basic'
    ADVANCED = 'advanced'
    IDEAL = 'ideal'


@dataclasses.dataclass(frozen=True)
class ImperfectScaling:
    """
    Scaling loses ``loss_per_step`` of its efficiency for every worker beyond
    the midpoint of the scaling range of a job.
    """
    loss_per_step: float = 0.10

    def __post_init__(self):
        utils.check_fraction('loss_per_step', self.loss_per_step, allow_one=False)


@dataclasses.dataclass(frozen=True)
class PredictError:
    """
    A ``fraction`` of the jobs has its running time estimated wrongly, by a
    relative error of at most ``max_rel``.
    """
    fraction: float
    max_rel: float = 0.25
    seed: int = 0

    def __post_init__(self):
        utils.check_fraction('fraction', self.fraction)
        utils.check_fraction('max_rel', self.max_rel, allow_one=False)
        utils.check_integer('seed', self.seed, minimum=0)


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    """
    All knobs of a simulation.

    Parameters
    ----------
    scenario: Scenario, default=Scenario.BASIC
        The capabilities of the jobs.
    sched_interval_s: float, default=60
        The interval between two scheduling ticks.
    orch_interval_s: float, default=300
        The interval between two orchestrator ticks.
    preempt_overhead_s: float, default=63
        The time a preempted job needs before it makes progress again once
        it is restarted.
    scale_overhead_s: float, default=0
        The time a running job makes no progress after its workers change.
    hetero_efficiency: float, default=0.7
        The efficiency of a job whose workers span both GPU kinds, in the
        advanced scenario.
    hetero_fraction: float, default=0.1
        The fraction of all jobs that can run on inference GPUs and span GPU
        kinds, in the advanced scenario.
    imperfect_scaling: ImperfectScaling, default=None
        If given, scaling beyond the midpoint of a job's range loses
        efficiency. Otherwise, scaling is linear.
    predict_error: PredictError, default=None
        If given, the running times seen by the scheduler contain errors.
    inference_speed_factor: float, default=0.25
        The training speed of an inference GPU relative to a training GPU.
    event_driven: bool, default=True
        Whether arrivals, completions and preemptions trigger a scheduling
        pass on top of the periodic ticks.
    reshuffle_flexible: bool, default=True
        Whether a scheduling pass may take flexible workers from running
        jobs.
    flexible_group: bool, default=True
        Whether base and flexible workers are kept on separate on-loan servers.
    loaning: bool, default=True
        Whether idle inference servers are loaned to the training cluster.
    usage_interval_s: float, default=300
        The interval between two GPU usage samples.
    n_training_servers: int, default=64
        The size of the training cluster.
    n_inference_servers: int, default=64
        The size of the inference cluster.
    gpus_per_server: int, default=8
        The number of GPUs of every server.
    check_invariants: bool, default=False
        Whether to verify the cluster invariants after every event.
    """
    scenario: Scenario = Scenario.BASIC
    sched_interval_s: float = 60
    orch_interval_s: float = 300
    preempt_overhead_s: float = 63
    scale_overhead_s: float = 0
    hetero_efficiency: float = 0.7
    hetero_fraction: float = 0.1
    imperfect_scaling: Optional[ImperfectScaling] = None
    predict_error: Optional[PredictError] = None
    inference_speed_factor: float = 0.25
    event_driven: bool = True
    reshuffle_flexible: bool = True
    flexible_group: bool = True
    loaning: bool = True
    usage_interval_s: float = 300
    n_training_servers: int = 64
    n_inference_servers: int = 64
    gpus_per_server: int = 8
    check_invariants: bool = False

    def __post_init__(self):
        if not isinstance(self.scenario, Scenario):
            raise TypeError('`scenario` should be a Scenario')
        for name in ('sched_interval_s', 'orch_interval_s', 'usage_interval_s'):
            value = getattr(self, name)
            if not utils.is_real(value):
                raise TypeError(f'`{name}` should be numeric')
            if value <= 0:
                raise ValueError(f'`{name}` should be strictly positive')
        for name in ('preempt_overhead_s', 'scale_overhead_s'):
            value = getattr(self, name)
            if not utils.is_real(value):
                raise TypeError(f'`{name}` should be numeric')
            if value < 0:
                raise ValueError(f'`{name}` should be non-negative')
        utils.check_fraction('hetero_efficiency', self.hetero_efficiency, allow_zero=False)
        utils.check_fraction('hetero_fraction', self.hetero_fraction)
        utils.check_fraction('inference_speed_factor', self.inference_speed_factor, allow_zero=False)
        if self.imperfect_scaling is not None and not isinstance(self.imperfect_scaling, ImperfectScaling):
            raise TypeError('`imperfect_scaling` should be an ImperfectScaling')
        if self.predict_error is not None and not isinstance(self.predict_error, PredictError):
            raise TypeError('`predict_error` should be a PredictError')
        for name in ('event_driven', 'reshuffle_flexible', 'flexible_group', 'loaning', 'check_invariants'):
            if not isinstance(getattr(self, name), bool):
                raise TypeError(f'`{name}` should be a bool')
        utils.check_integer('n_training_servers', self.n_training_servers, minimum=1)
        utils.check_integer('n_inference_servers', self.n_inference_servers, minimum=0)
        utils.check_integer('gpus_per_server', self.gpus_per_server, minimum=1)

    def to_dict(self) -> Dict[str, Any]:
        config = dataclasses.asdict(self)
        config['scenario'] = self.scenario.value
        return config

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> 'ScenarioConfig':
        """
        Build a configuration from a dictionary, as found in a JSON config.
        The scenario is given by its name, and the nested settings as
        dictionaries. Absent keys take their default value.

        Raises
        ------
        TypeError
            If ``config`` is not a dictionary.
        ValueError
            If ``config`` has unknown keys, or an unknown scenario.
        """
        if not isinstance(config, dict):
            raise TypeError('`config` should be a dictionary')
        unknown = set(config) - {field.name for field in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f'Unknown scenario settings: {sorted(unknown)}')
        config = dict(config)
        if 'scenario' in config and not isinstance(config['scenario'], Scenario):
            config['scenario'] = Scenario(str(config['scenario']).lower())
        if isinstance(config.get('imperfect_scaling'), dict):
            config['imperfect_scaling'] = ImperfectScaling(**config['imperfect_scaling'])
        if isinstance(config.get('predict_error'), dict):
            config['predict_error'] = PredictError(**config['predict_error'])
        return cls(**config)

    def label(self) -> str:
        """ A short description for result tables. """
        label = self.scenario.value
        if self.imperfect_scaling is not None:
            label += f'+imperfect({self.imperfect_scaling.loss_per_step})'
        if self.predict_error is not None:
            label += f'+error({self.predict_error.fraction})'
        if not self.loaning:
            label += '-noloan'
        if not self.flexible_group:
            label += '-nogroup'
        return label
