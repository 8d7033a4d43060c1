"""
This module maps allocated workers onto servers. It can be imported as
follows:

>>> from loanscale import placement
"""
from .BestFitDecreasing import Assignment, PlacementPlan, place_workers

__all__ = [
    'Assignment',
    'PlacementPlan',
    'place_workers'
]
