import os
import datetime
import traceback

import loanscale
from loanscale.allocation import Allocator
from loanscale.data import TraceLoader
from loanscale.reclaim import ReclaimSelector
from loanscale.simulation import ScenarioConfig


def log_error(error_log_path: str,
              exception: Exception,
              trace_loader: TraceLoader,
              allocator: Allocator = None,
              reclaim_policy: ReclaimSelector = None,
              config: ScenarioConfig = None,
              seed: int = 0) -> str:
    """
    Write an error file for a failed simulation. The file is an executable
    Python script that reproduces the failure, with the traceback on top in
    comments. If ``allocator`` is None, the failure happened while loading
    the traces and the script only loads them.

    Returns
    -------
    path: str
        The absolute path of the error file.
    """
    os.makedirs(error_log_path, exist_ok=True)

    base_file_name = trace_loader.__class__.__name__
    if allocator is not None:
        base_file_name += f'-{allocator.__class__.__name__}-{reclaim_policy.__class__.__name__}'

    # Unique file name
    now = datetime.datetime.now().strftime('%Y-%m-%d_%H-%M-%S-%f')
    file_path = os.path.join(error_log_path, f'{base_file_name}-{now}.err')
    counter = 1
    while os.path.exists(file_path):
        file_path = os.path.join(error_log_path, f'{base_file_name}-{now}-{counter}.err')
        counter += 1

    if allocator is None:
        error_message = 'An error occurred while loading the traces!'
    else:
        error_message = 'An error occurred while simulating!'
    error_message += '\nCode to reproduce the error is at the bottom of this error-log.\n\n'
    error_message += 'Traceback (most recent call last):\n\n'
    error_message += '\n'.join(traceback.format_tb(exception.__traceback__))
    error_message += f'\n{exception.__class__.__name__}: {exception}'
    error_message = '# ' + error_message.replace('\n', '\n# ')

    lines = [
        error_message,
        '',
        'import loanscale',
        f"assert loanscale.__version__ == '{loanscale.__version__}'",
        '',
        'from loanscale.data import *',
    ]
    if allocator is not None:
        lines += [
            'from loanscale.allocation import *',
            'from loanscale.reclaim import *',
            'from loanscale.simulation import ScenarioConfig, run',
        ]
    lines += [
        '',
        f'trace_loader = {trace_loader}',
        'jobs, util = trace_loader.load()',
        '',
    ]
    if allocator is not None:
        lines += [
            f'allocator = {allocator}',
            f'reclaim_policy = {reclaim_policy}',
            f'config = ScenarioConfig.from_dict({(config or ScenarioConfig()).to_dict()!r})',
            f'report, events = run(jobs, util, allocator, reclaim_policy, config=config, seed={seed})',
            '',
        ]

    with open(file_path, 'w') as error_file:
        error_file.write('\n'.join(lines))

    return os.path.abspath(file_path)
