"""
Command-line interface of loanscale.

.. code-block:: bash

    loanscale simulate --jobs data/contention_jobs.jsonl --out results --training-servers 1 --inference-servers 0
    loanscale compare --config configs/compare.json --out results
    loanscale gen-trace --n-jobs 2000 --days 1 --out traces
    loanscale oracle twojob 300 2 3 120 2 6 8

Every subcommand takes its default seed from the environment variable
``LYRA_SEED``, or 0 if it is not set.
"""
import argparse
import json
import logging
import os
import sys
from typing import Dict, List, Optional

import pandas as pd

import loanscale
from loanscale.allocation import (
    Allocator, TwoPhaseAllocator, FifoAllocator, AfsAllocator, GandivaAllocator, ForcedSplitAllocator,
    build_mckp, mckp_dp
)
from loanscale.cluster import JobState
from loanscale.data import (
    TraceParseError, parse_job_trace, parse_util_trace, parse_loan_plan,
    write_job_trace, write_util_trace, gen_traces,
    demonstration_reclaim_cluster, demonstration_mckp_instance
)
from loanscale.oracle import (
    GuardExceededError, RegimeError, TwoJobInstance,
    exhaustive_reclaim, two_job_optimal, brute_force_allocation, brute_force_mckp
)
from loanscale.reclaim import InfeasibleReclaimError, PreemptionCostSelector, RandomSelector, SmallestCountFirst, select_servers_lyra
from loanscale.simulation import Scenario, ScenarioConfig, ImperfectScaling, PredictError, run
from loanscale.workflow import workflow_from_config, write_report, SUMMARY_FILE

logger = logging.getLogger(__name__)

SEED_VARIABLE = 'LYRA_SEED'

ALLOCATORS = {
    'lyra': TwoPhaseAllocator,
    'fifo': FifoAllocator,
    'afs': AfsAllocator,
    'gandiva': GandivaAllocator,
}

RECLAIMERS = {
    'lyra': PreemptionCostSelector,
    'random': RandomSelector,
    'scf': SmallestCountFirst,
}

# Reported as a single line with exit code 1. The remaining ValueErrors
# are invalid flag values, e.g. a negative number of servers.
DOMAIN_ERRORS = (TraceParseError, GuardExceededError, RegimeError, InfeasibleReclaimError, FileNotFoundError, ValueError)


def default_seed() -> int:
    value = os.environ.get(SEED_VARIABLE)
    if value is None or value == '':
        return 0
    try:
        seed = int(value)
    except ValueError:
        raise ValueError(f'`{SEED_VARIABLE}` should be a non-negative integer, got {value!r}')
    if seed < 0:
        raise ValueError(f'`{SEED_VARIABLE}` should be a non-negative integer, got {value!r}')
    return seed


def parse_initial_split(value: str) -> Dict[str, int]:
    """ Parse ``'A=2,B=6'`` into ``{'A': 2, 'B': 6}``. """
    split = {}
    for part in value.split(','):
        job_id, separator, workers = part.partition('=')
        if separator != '=' or job_id.strip() == '':
            raise argparse.ArgumentTypeError(f'Expected JOB=WORKERS, got {part!r}')
        try:
            split[job_id.strip()] = int(workers)
        except ValueError:
            raise argparse.ArgumentTypeError(f'Expected an integer number of workers, got {workers!r}')
    return split


###################################################################
# PARSER
###################################################################

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='loanscale',
        description='Simulate a training cluster that borrows idle inference servers.'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {loanscale.__version__}')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='INFO with -v, DEBUG with -vv')
    subparsers = parser.add_subparsers(dest='command')

    simulate = subparsers.add_parser('simulate', help='simulate a job trace')
    simulate.add_argument('--jobs', required=True, help='job trace in JSON Lines')
    simulate.add_argument('--util', help='utilization trace in CSV')
    simulate.add_argument('--scenario', choices=[scenario.value for scenario in Scenario], default='basic')
    simulate.add_argument('--alloc', choices=sorted(ALLOCATORS), default='lyra')
    simulate.add_argument('--reclaim', choices=sorted(RECLAIMERS), default='lyra')
    simulate.add_argument('--seed', type=int, default=None)
    simulate.add_argument('--out', required=True, help='directory of the report files')
    simulate.add_argument('--loan-plan', help='recorded loan instructions in JSON Lines')
    simulate.add_argument('--initial-split', type=parse_initial_split, help='pin jobs until the first of them finishes, e.g. A=2,B=6')
    simulate.add_argument('--training-servers', type=int, default=64)
    simulate.add_argument('--inference-servers', type=int, default=64)
    simulate.add_argument('--gpus-per-server', type=int, default=8)
    simulate.add_argument('--sched-interval', type=float, default=60)
    simulate.add_argument('--orch-interval', type=float, default=300)
    simulate.add_argument('--imperfect-scaling', type=float, metavar='LOSS', help='efficiency loss per step beyond the midpoint of the scaling range')
    simulate.add_argument('--predict-error', type=float, metavar='FRACTION', help='fraction of jobs with a wrong running time estimate')
    simulate.add_argument('--no-loaning', action='store_true')
    simulate.add_argument('--no-flexible-group', action='store_true')
    simulate.add_argument('--no-event-driven', action='store_true')
    simulate.set_defaults(handler=_simulate)

    compare = subparsers.add_parser('compare', help='simulate every combination of a config')
    compare.add_argument('--config', required=True, help='comparison config in JSON')
    compare.add_argument('--out', required=True, help='directory of summary.csv')
    compare.add_argument('--n-jobs', type=int, help='overrides n_jobs of the config')
    compare.set_defaults(handler=_compare)

    gen_trace = subparsers.add_parser('gen-trace', help='generate synthetic traces')
    gen_trace.add_argument('--n-jobs', type=int, required=True)
    gen_trace.add_argument('--days', type=float, default=1.0)
    gen_trace.add_argument('--training-servers', type=int, default=64)
    gen_trace.add_argument('--load', type=float, default=0.9)
    gen_trace.add_argument('--seed', type=int, default=None)
    gen_trace.add_argument('--out', required=True, help='directory of jobs.jsonl and util.csv')
    gen_trace.set_defaults(handler=_gen_trace)

    oracle = subparsers.add_parser('oracle', help='solve small instances exactly')
    oracles = oracle.add_subparsers(dest='oracle')

    oracle_reclaim = oracles.add_parser('reclaim', help='optimal servers to reclaim on the demonstration layout')
    oracle_reclaim.add_argument('--n-r', type=int, default=2)
    oracle_reclaim.set_defaults(handler=_oracle_reclaim)

    oracle_twojob = oracles.add_parser('twojob', help='closed-form optimum of two elastic jobs')
    for name in ('workload_p', 'min_gpus_p', 'max_gpus_p', 'workload_q', 'min_gpus_q', 'max_gpus_q', 'capacity'):
        oracle_twojob.add_argument(name, type=float if name.startswith('workload') else int)
    oracle_twojob.set_defaults(handler=_oracle_twojob)

    oracle_alloc = oracles.add_parser('alloc', help='optimal initial allocation by enumeration')
    oracle_alloc.add_argument('--jobs', required=True, help='job trace in JSON Lines')
    oracle_alloc.add_argument('--capacity', type=int, required=True)
    oracle_alloc.set_defaults(handler=_oracle_alloc)

    oracle_mckp = oracles.add_parser('mckp', help='optimal knapsack value by enumeration')
    oracle_mckp.add_argument('--jobs', help='job trace in JSON Lines, defaults to the demonstration instance')
    oracle_mckp.add_argument('--capacity', type=int, required=True)
    oracle_mckp.set_defaults(handler=_oracle_mckp)

    return parser


###################################################################
# SUBCOMMANDS
###################################################################

def _seed(args: argparse.Namespace) -> int:
    return default_seed() if args.seed is None else args.seed


def _simulate(args: argparse.Namespace) -> int:
    config = ScenarioConfig(
        scenario=Scenario(args.scenario),
        sched_interval_s=args.sched_interval,
        orch_interval_s=args.orch_interval,
        imperfect_scaling=None if args.imperfect_scaling is None else ImperfectScaling(args.imperfect_scaling),
        predict_error=None if args.predict_error is None else PredictError(args.predict_error, seed=_seed(args)),
        event_driven=not args.no_event_driven,
        flexible_group=not args.no_flexible_group,
        loaning=not args.no_loaning,
        n_training_servers=args.training_servers,
        n_inference_servers=args.inference_servers,
        gpus_per_server=args.gpus_per_server
    )
    jobs = parse_job_trace(args.jobs)
    util = None if args.util is None else parse_util_trace(args.util)
    allocator: Allocator = ALLOCATORS[args.alloc]()
    if args.initial_split is not None:
        allocator = ForcedSplitAllocator(args.initial_split, allocator)
    reclaim_policy = RandomSelector(_seed(args)) if args.reclaim == 'random' else RECLAIMERS[args.reclaim]()
    loan_controller = None if args.loan_plan is None else parse_loan_plan(args.loan_plan)

    report, events = run(jobs, util, allocator, reclaim_policy, loan_controller, config, _seed(args))
    write_report(report, events, args.out)
    summary = report.summary()
    print(f"{summary['policy']}: {summary['n_jobs']} jobs, mean JCT {summary['mean_jct_s']:.2f}s, mean queuing {summary['mean_queuing_s']:.2f}s")
    return 0


def _compare(args: argparse.Namespace) -> int:
    workflow = workflow_from_config(args.config)
    if args.n_jobs is not None:
        workflow.n_jobs = args.n_jobs
    results = workflow.run()
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, SUMMARY_FILE)
    results.to_csv(path, index=False)
    with pd.option_context('display.max_columns', None, 'display.width', 200):
        print(results)
    return 0


def _gen_trace(args: argparse.Namespace) -> int:
    jobs, util = gen_traces(args.n_jobs, args.days, n_training_servers=args.training_servers, seed=_seed(args), load=args.load)
    os.makedirs(args.out, exist_ok=True)
    write_job_trace(jobs, os.path.join(args.out, 'jobs.jsonl'))
    write_util_trace(util, os.path.join(args.out, 'util.csv'))
    print(f'Generated {len(jobs)} jobs and {len(util)} utilization samples in {args.out}')
    return 0


def _oracle_reclaim(args: argparse.Namespace) -> int:
    cluster = demonstration_reclaim_cluster()
    optimum = exhaustive_reclaim(cluster, args.n_r)
    heuristic = select_servers_lyra(cluster, args.n_r)
    print(json.dumps({
        'n_r': args.n_r,
        'optimal_preemptions': optimum.n_preemptions,
        'optimal_servers': optimum.selected_servers,
        'lyra_preemptions': heuristic.n_preemptions,
        'lyra_servers': heuristic.selected_servers,
    }))
    return 0


def _oracle_twojob(args: argparse.Namespace) -> int:
    instance = TwoJobInstance(args.workload_p, args.min_gpus_p, args.max_gpus_p, args.workload_q, args.min_gpus_q, args.max_gpus_q, args.capacity)
    gpus_p, gpus_q, avg = two_job_optimal(instance)
    print(json.dumps({'gpus_p': gpus_p, 'gpus_q': gpus_q, 'avg_jct_s': round(avg, 6)}))
    return 0


def _oracle_alloc(args: argparse.Namespace) -> int:
    workers, avg = brute_force_allocation(list(parse_job_trace(args.jobs)), args.capacity)
    print(json.dumps({'workers': workers, 'avg_jct_s': round(avg, 6)}))
    return 0


def _oracle_mckp(args: argparse.Namespace) -> int:
    if args.jobs is None:
        instance = demonstration_mckp_instance()
    else:
        instance = build_mckp([JobState(spec) for spec in parse_job_trace(args.jobs)])
    print(json.dumps({
        'capacity': args.capacity,
        'brute_force': brute_force_mckp(instance, args.capacity),
        'dp': mckp_dp(instance, args.capacity).value,
    }))
    return 0


###################################################################
# ENTRY POINTS
###################################################################

def cli(argv: Optional[List[str]] = None) -> int:
    """
    Run the command line interface.

    Parameters
    ----------
    argv: list of str, default=None
        The arguments, without the program name. Defaults to ``sys.argv[1:]``.

    Returns
    -------
    exit_code: int
        0 on success, 1 if the inputs are invalid, and 2 if no subcommand
        was given. Invalid flags make argparse exit with code 2.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, 'handler', None) is None:
        parser.print_usage(sys.stderr)
        return 2

    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(format='%(asctime)s %(levelname)s %(name)s: %(message)s', level=level)

    try:
        return args.handler(args)
    except DOMAIN_ERRORS as error:
        print(f'loanscale: error: {error}', file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli())
