"""
This module contains the policies that choose which on-loan servers are
returned to the inference cluster. It can be imported as follows:

>>> from loanscale import reclaim

Each policy is a :py:class:`~loanscale.reclaim.ReclaimSelector`, and is also
available as a plain function.
"""
from .ReclaimSelector import ReclaimSelector, ReclaimOutcome, InfeasibleReclaimError, outcome_of_selection
from .PreemptionCostSelector import PreemptionCostSelector, preemption_costs, select_servers_lyra
from .baselines import RandomSelector, SmallestCountFirst, select_servers_random, select_servers_scf

__all__ = [
    # Base
    'ReclaimSelector',
    'ReclaimOutcome',
    'InfeasibleReclaimError',
    'outcome_of_selection',

    # Preemption cost
    'PreemptionCostSelector',
    'preemption_costs',
    'select_servers_lyra',

    # Baselines
    'RandomSelector',
    'SmallestCountFirst',
    'select_servers_random',
    'select_servers_scf'
]
