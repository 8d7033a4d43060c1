"""
This module contains the orchestrator moving servers between the
inference and the training cluster. It can be imported as follows:

>>> from loanscale import loaning
"""
from .LoanPolicy import InstructionKind, LoanInstruction, LoanController, LoanPolicy, RecordedLoanPlan, plan_loaning
from .Orchestrator import ReclaimResult, execute_loan, execute_reclaim, preempt_job

__all__ = [
    # Instructions
    'InstructionKind',
    'LoanInstruction',
    'LoanController',
    'LoanPolicy',
    'RecordedLoanPlan',
    'plan_loaning',

    # Orchestration
    'ReclaimResult',
    'execute_loan',
    'execute_reclaim',
    'preempt_job'
]
