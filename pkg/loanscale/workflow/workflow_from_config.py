import os
import json

from loanscale.workflow.Workflow import Workflow
from loanscale import allocation, data, reclaim, simulation


def workflow_from_config(path: str, max_size: int = 1000000):
    """
    Construct a Workflow instance based on a JSON file. The file is
    first parsed, and then interpreted to obtain a :py:class:`~loanscale.workflow.Workflow`.

    Parameters
    ----------
    path: str
        Path to the config file in JSON format.
    max_size: int, optional
        Maximal size of the config file in bytes. Defaults to 1 MB.

    Returns
    -------
    workflow: Workflow
        The parsed workflow from the given config file.

    Raises
    ------
    TypeError
        If the given path is not a string.
    FileNotFoundError
        If the given path does not correspond to an existing file.
    ValueError
        If the given path does not refer to a json file, or if the file
        is larger than ``max_size``.
    """
    if not isinstance(path, str):
        raise TypeError('Path expects a string')
    if not os.path.exists(path):
        raise FileNotFoundError('The given path does not exist!')
    if not path.endswith('.json'):
        raise ValueError('The given path should be a json file!')
    if os.path.getsize(path) > max_size:
        raise ValueError(f'File size exceeds maximum size of {max_size} bytes')

    with open(path, 'r') as file:
        parsed_config = json.load(file)

    return interpret_config(parsed_config)


def interpret_config(config: dict) -> Workflow:
    """
    Interpret a parsed config. The sections ``traces`` and ``allocators``
    are required, ``reclaimers`` and ``scenarios`` are optional. Each
    section is either a single entry or a list of entries. Trace and policy
    entries are dictionaries with a ``'type'`` key naming the class, all
    other keys being passed to its constructor. Scenario entries are
    passed to :py:meth:`~loanscale.simulation.ScenarioConfig.from_dict`.

    Parameters
    ----------
    config: dict
        The config to interpret.

    Returns
    -------
    Workflow
        Containing all the components specified in the config.
    """
    if not isinstance(config, dict):
        raise TypeError('Input should be a dictionary')

    return Workflow(
        traces=interpret_traces(config),
        allocators=interpret_allocators(config),
        reclaimers=interpret_reclaimers(config),
        scenarios=interpret_scenarios(config),
        **interpret_additional_information(config)
    )


def _entries(config: dict, key: str) -> list:
    section = config[key]
    return section if isinstance(section, list) else [section]


def _split_type(entry) -> (str, dict):
    if not isinstance(entry, dict) or 'type' not in entry:
        raise ValueError(f'Entry should be a dictionary with a `type` key: {entry}')
    return entry['type'], {key: value for key, value in entry.items() if key != 'type'}


###################################################################
# TRACES
###################################################################

def interpret_traces(config):
    if 'traces' not in config:
        raise ValueError('No `traces` key in the config')
    return [trace_entry(entry) for entry in _entries(config, 'traces')]


def trace_entry(entry):
    trace_type, entry_without_type = _split_type(entry)

    if trace_type == 'FileTraceLoader':
        return data.FileTraceLoader(**entry_without_type)

    elif trace_type == 'SyntheticTraceLoader':
        return data.SyntheticTraceLoader(**entry_without_type)

    else:
        raise ValueError(f'Invalid trace entry: {entry}')


###################################################################
# ALLOCATORS
###################################################################

def interpret_allocators(config):
    if 'allocators' not in config:
        raise ValueError('No `allocators` key in the config')
    return [allocator_entry(entry) for entry in _entries(config, 'allocators')]


def allocator_entry(entry):
    allocator_type, entry_without_type = _split_type(entry)

    if allocator_type == 'TwoPhaseAllocator':
        return allocation.TwoPhaseAllocator(**entry_without_type)

    elif allocator_type == 'FifoAllocator':
        if len(entry_without_type) > 0:
            raise TypeError(f'Too many parameters given for entry: {entry}')
        return allocation.FifoAllocator()

    elif allocator_type == 'AfsAllocator':
        if len(entry_without_type) > 0:
            raise TypeError(f'Too many parameters given for entry: {entry}')
        return allocation.AfsAllocator()

    elif allocator_type == 'GandivaAllocator':
        if len(entry_without_type) > 0:
            raise TypeError(f'Too many parameters given for entry: {entry}')
        return allocation.GandivaAllocator()

    elif allocator_type == 'ForcedSplitAllocator':
        if 'initial_split' not in entry_without_type:
            raise ValueError(f'ForcedSplitAllocator must have initial_split as key: {entry}')
        if len(set(entry_without_type) - {'initial_split', 'allocator'}) > 0:
            raise TypeError(f'Too many parameters given for entry: {entry}')
        inner = entry_without_type.get('allocator')
        return allocation.ForcedSplitAllocator(
            initial_split=entry_without_type['initial_split'],
            allocator=None if inner is None else allocator_entry(inner)
        )

    else:
        raise ValueError(f'Invalid allocator entry: {entry}')


###################################################################
# RECLAIMERS
###################################################################

def interpret_reclaimers(config):
    if 'reclaimers' not in config:
        return None
    return [reclaimer_entry(entry) for entry in _entries(config, 'reclaimers')]


def reclaimer_entry(entry):
    reclaimer_type, entry_without_type = _split_type(entry)

    if reclaimer_type == 'PreemptionCostSelector':
        if len(entry_without_type) > 0:
            raise TypeError(f'Too many parameters given for entry: {entry}')
        return reclaim.PreemptionCostSelector()

    elif reclaimer_type == 'RandomSelector':
        return reclaim.RandomSelector(**entry_without_type)

    elif reclaimer_type == 'SmallestCountFirst':
        if len(entry_without_type) > 0:
            raise TypeError(f'Too many parameters given for entry: {entry}')
        return reclaim.SmallestCountFirst()

    else:
        raise ValueError(f'Invalid reclaimer entry: {entry}')


###################################################################
# SCENARIOS
###################################################################

def interpret_scenarios(config):
    if 'scenarios' not in config:
        return None
    return [simulation.ScenarioConfig.from_dict(entry) for entry in _entries(config, 'scenarios')]


###################################################################
# ADDITIONAL INFORMATION
###################################################################

def interpret_additional_information(config):
    return {
        feature: config[feature]
        for feature in ['n_jobs', 'error_log_path', 'seed']
        if feature in config
    }
