import enum
import heapq
import dataclasses
from typing import Any, Dict, List, Optional

from loanscale import utils


class EventKind(enum.Enum):
    """
    The kinds of events in a simulation. Events at the same time are
    processed in the order ``COMPLETION``, ``PREEMPT``, ``ORCH_TICK``,
    ``SCHED_TICK``, ``ARRIVAL``, ``USAGE_SAMPLE``, and then by job id.

    The kinds ``SCALE``, ``LOAN_MOVE`` and ``RECLAIM_MOVE`` are never
    queued, they only record the effect of processing other events.
    """
    COMPLETION = 'Completion'
    PREEMPT = 'Preempt'
    ORCH_TICK = 'OrchTick'
    SCHED_TICK = 'SchedTick'
    ARRIVAL = 'Arrival'
    USAGE_SAMPLE = 'UsageSample'
    SCALE = 'Scale'
    LOAN_MOVE = 'LoanMove'
    RECLAIM_MOVE = 'ReclaimMove'

    @property
    def priority(self) -> int:
        return _PRIORITY[self]


_PRIORITY = {kind: priority for priority, kind in enumerate(EventKind)}


@dataclasses.dataclass(frozen=True)
class Event:
    """
    Something that happens at a point in time.

    Attributes
    ----------
    at_s: float
        When the event happens.
    kind: EventKind
        What happens.
    job_id: str, default=None
        The job concerned, if any.
    payload: dict
        Kind-specific details, such as the change in workers of a
        ``SCALE`` event or the servers moved by a ``LOAN_MOVE``.
    version: int, default=0
        For a ``COMPLETION``, the version of the job it was projected for.
        Not part of the event log.
    """
    at_s: float
    kind: EventKind
    job_id: Optional[str] = None
    payload: Dict[str, Any] = dataclasses.field(default_factory=dict)
    version: int = 0

    def to_dict(self) -> Dict[str, Any]:
        record = {'at_s': self.at_s, 'kind': self.kind.value}
        if self.job_id is not None:
            record['job'] = self.job_id
        record.update(self.payload)
        return record

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> 'Event':
        payload = {key: value for key, value in record.items() if key not in ('at_s', 'kind', 'job')}
        return cls(float(record['at_s']), EventKind(record['kind']), record.get('job'), payload)


class EventQueue:
    """
    A priority queue of events, ordered by time, then by kind, then by job
    id. Events that tie on all three come out in insertion order.
    """

    def __init__(self):
        self._heap = []
        self._counter = 0

    def push(self, event: Event) -> None:
        key = (event.at_s, event.kind.priority, utils.natural_key(event.job_id or ''), self._counter)
        heapq.heappush(self._heap, (key, event))
        self._counter += 1

    def pop(self) -> Event:
        return heapq.heappop(self._heap)[1]

    def peek_time(self) -> float:
        return self._heap[0][1].at_s

    def pop_batch(self) -> List[Event]:
        """ Pop all events at the earliest time, in processing order. """
        at_s = self.peek_time()
        batch = []
        while len(self._heap) > 0 and self.peek_time() == at_s:
            batch.append(self.pop())
        return batch

    def __len__(self) -> int:
        return len(self._heap)
