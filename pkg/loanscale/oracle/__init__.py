"""
This module contains exact but exhaustive solutions of the problems the
policies solve heuristically, to verify these policies on small
instances. It can be imported as follows:

>>> from loanscale import oracle
"""
from .reclaim import GuardExceededError, exhaustive_reclaim, MAX_EXHAUSTIVE_SERVERS
from .allocation import (
    RegimeError, TwoJobInstance, two_job_optimal,
    brute_force_allocation, brute_force_mckp,
    MAX_BRUTE_FORCE_JOBS, MAX_BRUTE_FORCE_CAPACITY, MAX_MCKP_COMBINATIONS
)

__all__ = [
    # Errors
    'GuardExceededError',
    'RegimeError',

    # Reclaiming
    'exhaustive_reclaim',
    'MAX_EXHAUSTIVE_SERVERS',

    # Allocation
    'TwoJobInstance',
    'two_job_optimal',
    'brute_force_allocation',
    'brute_force_mckp',
    'MAX_BRUTE_FORCE_JOBS',
    'MAX_BRUTE_FORCE_CAPACITY',
    'MAX_MCKP_COMBINATIONS'
]
