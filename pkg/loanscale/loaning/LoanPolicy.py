import abc
import enum
import math
import dataclasses
from typing import List

from loanscale import utils
from loanscale.PrettyPrintable import PrettyPrintable


class InstructionKind(enum.Enum):
    """
    What the orchestrator does at a tick. Valid options are ``LOAN``,
    ``RECLAIM`` and ``HOLD``.
    """
    LOAN = 'Loan'
    RECLAIM = 'Reclaim'
    HOLD = 'Hold'


@dataclasses.dataclass(frozen=True)
class LoanInstruction:
    """
    Move ``n`` servers from the inference to the training cluster (loan),
    move them back (reclaim), or do nothing (hold).
    """
    kind: InstructionKind
    n: int = 0
    at_s: float = 0.0

    def __post_init__(self):
        if not isinstance(self.kind, InstructionKind):
            raise TypeError('`kind` should be an InstructionKind')
        utils.check_integer('n', self.n, minimum=0)
        if self.kind == InstructionKind.HOLD and self.n != 0:
            raise ValueError('A hold instruction moves no servers')
        if self.kind != InstructionKind.HOLD and self.n < 1:
            raise ValueError(f'A {self.kind.value.lower()} instruction should move at least one server')


class LoanController(PrettyPrintable):
    """
    Abstract base class of the sources of loan instructions that stand in
    for the inference cluster scheduler.
    """

    def instruction(self, at_s: float, util: float, on_loan_count: int) -> LoanInstruction:
        """
        The instruction for an orchestrator tick.

        Parameters
        ----------
        at_s: float
            The time of the tick.
        util: float
            The utilization of the inference cluster at the tick.
        on_loan_count: int
            The number of servers currently on loan.

        Returns
        -------
        instruction: LoanInstruction
            What to do at this tick.
        """
        utils.check_fraction('util', util)
        utils.check_integer('on_loan_count', on_loan_count, minimum=0)
        return self._instruction(at_s, util, on_loan_count)

    @abc.abstractmethod
    def _instruction(self, at_s: float, util: float, on_loan_count: int) -> LoanInstruction:
        """ Effectively compute the instruction. """

    def reset(self) -> None:
        """ Forget any state of a previous simulation. """


class LoanPolicy(LoanController):
    """
    Loan every inference server that is not needed to serve the current
    traffic with some headroom. At utilization :math:`u`, the inference
    cluster reserves :math:`\\lceil u \\cdot (1 + headroom) \\cdot n \\rceil` of
    its :math:`n` servers, and the others can be loaned.

    Parameters
    ----------
    total_inference_servers: int
        The size of the inference cluster.
    headroom: float, default=0.1
        Extra capacity reserved on top of the utilization, in [0, 1).
    interval_s: int, default=300
        The interval between orchestrator ticks.
    """
    total_inference_servers: int
    headroom: float
    interval_s: int

    def __init__(self, total_inference_servers: int, headroom: float = 0.1, interval_s: int = 300):
        utils.check_integer('total_inference_servers', total_inference_servers, minimum=0)
        utils.check_fraction('headroom', headroom, allow_one=False)
        utils.check_integer('interval_s', interval_s, minimum=1)
        self.total_inference_servers = total_inference_servers
        self.headroom = headroom
        self.interval_s = interval_s

    def loanable(self, util: float) -> int:
        """ The number of servers that can be on loan at the given utilization. """
        # 0.5 * 1.1 * 100 evaluates to 55.000000000000001 in floating point.
        reserved = math.ceil(round(util * (1 + self.headroom) * self.total_inference_servers, 9))
        return max(0, self.total_inference_servers - min(reserved, self.total_inference_servers))

    def _instruction(self, at_s: float, util: float, on_loan_count: int) -> LoanInstruction:
        difference = self.loanable(util) - on_loan_count
        if difference > 0:
            return LoanInstruction(InstructionKind.LOAN, difference, at_s)
        if difference < 0:
            return LoanInstruction(InstructionKind.RECLAIM, -difference, at_s)
        return LoanInstruction(InstructionKind.HOLD, 0, at_s)


class RecordedLoanPlan(LoanController):
    """
    Replay recorded loan instructions instead of deriving them from the
    utilization. At every tick, the earliest recorded instruction that is
    due and was not replayed yet is returned, or a hold if there is none.

    Parameters
    ----------
    instructions: list of LoanInstruction
        The recorded instructions, in chronological order.
    """
    instructions: List[LoanInstruction]

    def __init__(self, instructions: List[LoanInstruction]):
        if not utils.is_valid_list(instructions, LoanInstruction):
            raise TypeError('`instructions` should be a list of LoanInstruction')
        if any(first.at_s > second.at_s for first, second in zip(instructions, instructions[1:])):
            raise ValueError('`instructions` should be in chronological order')
        self.instructions = instructions
        self._cursor = 0

    def reset(self) -> None:
        self._cursor = 0

    def _instruction(self, at_s: float, util: float, on_loan_count: int) -> LoanInstruction:
        if self._cursor < len(self.instructions) and self.instructions[self._cursor].at_s <= at_s:
            recorded = self.instructions[self._cursor]
            self._cursor += 1
            return recorded
        return LoanInstruction(InstructionKind.HOLD, 0, at_s)

    def __str__(self) -> str:
        return f'RecordedLoanPlan(n_instructions={len(self.instructions)})'


def plan_loaning(util: float, on_loan_count: int, policy: LoanPolicy, at_s: float = 0.0) -> LoanInstruction:
    """ Derive the loan instruction for a utilization sample with the given threshold policy. """
    return policy.instruction(at_s, util, on_loan_count)
