"""
This module contains the discrete-event simulator. It can be imported as
follows:

>>> from loanscale import simulation

A simulation is configured through a :py:class:`~loanscale.simulation.ScenarioConfig`
and run with :py:func:`~loanscale.simulation.run`, which returns a
:py:class:`~loanscale.simulation.MetricsReport` and the event log.
"""
from .ScenarioConfig import Scenario, ImperfectScaling, PredictError, ScenarioConfig
from .Event import EventKind, Event, EventQueue
from .progress import scaling_efficiency, progress_rate, inject_prediction_error, apply_scenario, AllocationStep, allocation_history, replay_running_time
from .MetricsReport import JobRecord, UsageSample, MetricsReport, percentile
from .Simulator import Simulator, run

__all__ = [
    # Configuration
    'Scenario',
    'ImperfectScaling',
    'PredictError',
    'ScenarioConfig',

    # Events
    'EventKind',
    'Event',
    'EventQueue',

    # Progress
    'scaling_efficiency',
    'progress_rate',
    'inject_prediction_error',
    'apply_scenario',
    'AllocationStep',
    'allocation_history',
    'replay_running_time',

    # Metrics
    'JobRecord',
    'UsageSample',
    'MetricsReport',
    'percentile',

    # Simulator
    'Simulator',
    'run'
]
