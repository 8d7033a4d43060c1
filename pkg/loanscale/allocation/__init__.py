"""
This module contains the policies deciding how many workers each job
gets. It can be imported as follows:

>>> from loanscale import allocation

Each policy is an :py:class:`~loanscale.allocation.Allocator`. The two-phase
policy and the baselines are also available as plain functions, next to
the multiple-choice knapsack solver the two-phase policy relies on.
"""
from .Allocator import Allocator, AllocationPlan
from .knapsack import MckpItem, MckpGroup, MckpInstance, MckpSolution, flexible_value, build_mckp, mckp_dp
from .TwoPhaseAllocator import TwoPhaseAllocator, sort_jobs, allocate_inelastic, allocate_lyra
from .baselines import FifoAllocator, AfsAllocator, GandivaAllocator, allocate_fifo, allocate_afs, allocate_gandiva
from .ForcedSplitAllocator import ForcedSplitAllocator

__all__ = [
    # Base
    'Allocator',
    'AllocationPlan',

    # Knapsack
    'MckpItem',
    'MckpGroup',
    'MckpInstance',
    'MckpSolution',
    'flexible_value',
    'build_mckp',
    'mckp_dp',

    # Two-phase
    'TwoPhaseAllocator',
    'sort_jobs',
    'allocate_inelastic',
    'allocate_lyra',

    # Baselines
    'FifoAllocator',
    'AfsAllocator',
    'GandivaAllocator',
    'allocate_fifo',
    'allocate_afs',
    'allocate_gandiva',

    # Reproduction
    'ForcedSplitAllocator'
]
