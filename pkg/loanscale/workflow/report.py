import json
import os
from pathlib import Path
from typing import List, Tuple, Union

import pandas as pd

from loanscale.simulation import Event, MetricsReport

METRICS_FILE = 'metrics.json'
EVENTS_FILE = 'events.jsonl'
SUMMARY_FILE = 'summary.csv'


def write_report(report: MetricsReport, events: List[Event], out_dir: Union[str, Path]) -> List[str]:
    """
    Write the outcome of a simulation to a directory, which is created if
    it does not exist yet. Three files are written:

    - ``metrics.json``: the full report, including every job record and
      usage sample, with the summary under key ``'summary'``.
    - ``events.jsonl``: the event log, one event per line.
    - ``summary.csv``: a header and a single row with the summary of the
      report.

    Identical reports and event logs give byte-identical files.

    Parameters
    ----------
    report: MetricsReport
        The metrics of the simulation.
    events: list of Event
        The event log of the simulation.
    out_dir: str or Path
        The directory to write to.

    Returns
    -------
    paths: list of str
        The paths of the written files.

    Raises
    ------
    OSError
        If the directory can not be created or written to.
    """
    if not isinstance(report, MetricsReport):
        raise TypeError('`report` should be a MetricsReport')
    os.makedirs(out_dir, exist_ok=True)
    metrics_path = os.path.join(out_dir, METRICS_FILE)
    events_path = os.path.join(out_dir, EVENTS_FILE)
    summary_path = os.path.join(out_dir, SUMMARY_FILE)

    with open(metrics_path, 'w') as metrics_file:
        json.dump(report.to_dict(), metrics_file, indent=2)
        metrics_file.write('\n')

    with open(events_path, 'w') as events_file:
        for event in events:
            events_file.write(json.dumps(event.to_dict()) + '\n')

    pd.DataFrame([report.summary()]).to_csv(summary_path, index=False)
    return [metrics_path, events_path, summary_path]


def read_report(out_dir: Union[str, Path]) -> Tuple[MetricsReport, List[Event]]:
    """
    Read the report and event log written by :py:func:`write_report`.

    Parameters
    ----------
    out_dir: str or Path
        The directory that was written to.

    Returns
    -------
    report: MetricsReport
        The metrics of the simulation.
    events: list of Event
        The event log of the simulation.
    """
    with open(os.path.join(out_dir, METRICS_FILE)) as metrics_file:
        report = MetricsReport.from_dict(json.load(metrics_file))
    with open(os.path.join(out_dir, EVENTS_FILE)) as events_file:
        events = [Event.from_dict(json.loads(line)) for line in events_file if line.strip()]
    return report, events
