"""
Command Routes
One handler per subcommand, registered on a router the CLI builds its parser from
"""
import argparse
import asyncio
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from runner.sweep import SeedSweep
from shared.utils import spawn_streams
from specsynth.errors import NotConvergedError
from specsynth.models.envs import GridCase
from specsynth.models.learning import LearnConfig
from specsynth.models.manifest import RunManifest
from specsynth.services.crosscheck import cross_validate
from specsynth.services.envs import make_counterexample
from specsynth.services.experiment import learn_run, load_inputs, resolve_automaton
from specsynth.services.learner import execute_policy, greedy_action, run_learning
from specsynth.services.ltl import parse_ltl
from specsynth.services.product import ProductMDP, enumerate_product
from specsynth.services.verifier import (
    counterexample_margin,
    counterexample_returns,
    counterexample_threshold,
    verify,
)
from storage.repositories.run_repo import RunRepository

EXIT_OK = 0
EXIT_DISAGREE = 1
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3


@dataclass
class Command:
    name: str
    help: str
    handler: Callable[[argparse.Namespace], int]
    arguments: List[Callable[[argparse.ArgumentParser], None]] = field(default_factory=list)


class CommandRouter:
    """Collects subcommands the way a web router collects endpoints"""

    def __init__(self):
        self.commands: Dict[str, Command] = {}

    def command(self, name: str, help: str, arguments: Optional[List[Callable]] = None):
        def register(handler: Callable[[argparse.Namespace], int]):
            self.commands[name] = Command(name, help, handler, arguments or [])
            return handler
        return register

    def build_parser(self, prog: str = "specsynth") -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=prog, description="LTL control synthesis by learning on product MDPs")
        subparsers = parser.add_subparsers(dest="command", required=True)
        for command in self.commands.values():
            sub = subparsers.add_parser(command.name, help=command.help)
            for add in command.arguments:
                add(sub)
            sub.set_defaults(handler=command.handler)
        return parser


command_router = CommandRouter()


def _seed_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def model_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--env", help="Shipped environment name (grid5, grid10, grid3, pacman5) or spec path")
    source.add_argument("--model", help="PL-MDP model file")
    parser.add_argument("--case", choices=[c.value for c in GridCase], default=GridCase.I.value,
                        help="Gridworld case: I deterministic, II noisy")


def automaton_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--automaton", help="LDBA file or shipped name")
    parser.add_argument("--formula", help="LTL formula; alone, picks the shipped automaton recognising it")


def learn_arguments(parser: argparse.ArgumentParser) -> None:
    defaults = LearnConfig()
    parser.add_argument("--gamma", type=float, default=defaults.gamma)
    parser.add_argument("--reward", type=float, default=defaults.reward)
    parser.add_argument("--tau", type=int, default=defaults.tau, help="Episode horizon")
    parser.add_argument("--episodes", type=int, default=defaults.max_episodes)
    parser.add_argument("--window", type=int, default=defaults.window)
    parser.add_argument("--tolerance", type=float, default=defaults.tolerance)
    parser.add_argument("--epsilon-floor", type=float, default=defaults.epsilon_floor)
    parser.add_argument("--q-init", type=float, default=defaults.q_init)
    seeds = parser.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=int, default=defaults.seed)
    seeds.add_argument("--seeds", type=_seed_list, help="Comma-separated seeds run concurrently")
    parser.add_argument("--stride", type=int, default=None, help="Curve recording stride in episodes")
    parser.add_argument("--preread-initial-label", action="store_true")
    parser.add_argument("--frontier-global", action="store_true",
                        help="Carry the accepting frontier across episodes")
    parser.add_argument("--check-time-invariance", action="store_true")
    parser.add_argument("--require-convergence", action=argparse.BooleanOptionalAction, default=True,
                        help="Exit with status 3 when learning does not converge (default)")


def out_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, help="Output directory")


def _config(args: argparse.Namespace) -> LearnConfig:
    return LearnConfig(
        gamma=args.gamma,
        reward=args.reward,
        tau=args.tau,
        max_episodes=args.episodes,
        window=args.window,
        tolerance=args.tolerance,
        seed=args.seed,
        reset_frontier_per_episode=not args.frontier_global,
        epsilon_floor=args.epsilon_floor,
        q_init=args.q_init,
        preread_initial_label=args.preread_initial_label,
        record_stride=args.stride,
        check_time_invariance=args.check_time_invariance,
    )


def _manifest(args: argparse.Namespace, command: str, config: Optional[LearnConfig] = None) -> RunManifest:
    return RunManifest(
        command=command,
        model=args.model,
        env=args.env,
        case=GridCase(args.case),
        automaton=args.automaton,
        formula=args.formula,
        config=config or LearnConfig(),
        out=args.out,
    )


@command_router.command(
    "learn",
    help="Learn a policy and write curve.csv and policy.json",
    arguments=[model_arguments, automaton_arguments, learn_arguments, out_argument],
)
def learn(args: argparse.Namespace) -> int:
    manifest = _manifest(args, "learn", _config(args))
    if args.seeds:
        result = asyncio.run(SeedSweep(manifest).run(args.seeds))
        print(f"{len(result.curves)} seeds, final mean u_s0={result.mean.values[-1]!r}")
        converged = result.converged
    else:
        curve, policy = learn_run(manifest)
        print(f"{curve.episodes} episodes, u_s0={curve.values[-1]!r}, policy covers {len(policy)} states")
        converged = curve.converged
    if args.require_convergence and not converged:
        raise NotConvergedError(f"No convergence within {manifest.config.max_episodes} episodes")
    return EXIT_OK


@command_router.command(
    "verify",
    help="Exact verification of the product and optionally of a policy",
    arguments=[
        model_arguments,
        automaton_arguments,
        lambda p: p.add_argument("--policy", help="policy.json of a learning run"),
        lambda p: p.add_argument("--lenient", action="store_true",
                                 help="States missing from the policy take their first action"),
        lambda p: p.add_argument("--preread-initial-label", action="store_true"),
        out_argument,
    ],
)
def verify_command(args: argparse.Namespace) -> int:
    manifest = _manifest(args, "verify")
    inputs = load_inputs(manifest)
    policy = RunRepository.read_policy(args.policy) if args.policy else None
    preread = policy.preread_initial_label if policy is not None else args.preread_initial_label
    product = enumerate_product(inputs.model, inputs.automaton, preread_initial_label=preread)
    report = verify(product, policy, strict=not args.lenient, model_name=inputs.model_name)
    repo = RunRepository(args.out)
    repo.save_report(report)
    repo.save_manifest(manifest)
    print(f"max_prob={report.max_prob!r} policy_prob={report.policy_prob!r} "
          f"amecs={report.amec_count} closeness={report.closeness}/{report.max_closeness}")
    return EXIT_OK


@command_router.command(
    "simulate",
    help="Run a policy on the model and write trace.json",
    arguments=[
        model_arguments,
        automaton_arguments,
        lambda p: p.add_argument("--policy", required=True, help="policy.json of a learning run"),
        lambda p: p.add_argument("--horizon", type=int, default=100),
        lambda p: p.add_argument("--seed", type=int, default=0),
        out_argument,
    ],
)
def simulate(args: argparse.Namespace) -> int:
    manifest = _manifest(args, "simulate", LearnConfig(seed=args.seed, tau=args.horizon))
    inputs = load_inputs(manifest)
    policy = RunRepository.read_policy(args.policy)
    streams = spawn_streams(args.seed)
    trace = execute_policy(policy, inputs.model, inputs.automaton, streams.env, args.horizon, label_rng=streams.labels)
    repo = RunRepository(args.out)
    repo.save_trace(trace)
    repo.save_manifest(manifest)
    fallback = sum(step.fallback for step in trace.steps)
    print(f"{args.horizon} steps, {len(trace.events)} frontier events, {fallback} fallback actions")
    return EXIT_OK


@command_router.command(
    "xcheck",
    help="Compare a formula with an automaton on random lassos",
    arguments=[
        lambda p: p.add_argument("--formula", required=True),
        lambda p: p.add_argument("--automaton", required=True),
        lambda p: p.add_argument("--n", type=int, default=1000),
        lambda p: p.add_argument("--seed", type=int, default=0),
    ],
)
def xcheck(args: argparse.Namespace) -> int:
    result = cross_validate(parse_ltl(args.formula), resolve_automaton(args.automaton, None), args.n, args.seed)
    print(result.summary())
    for case in result.disagreements:
        print(f"  prefix={case['prefix']} period={case['period']} "
              f"formula={case['formula']} automaton={case['automaton']}")
    return EXIT_OK if result.ok else EXIT_DISAGREE


@command_router.command(
    "counterexample",
    help="Discounted returns of the two-action example and the learned greedy action",
    arguments=[
        lambda p: p.add_argument("--nu", type=float, required=True),
        lambda p: p.add_argument("--gamma", type=float, required=True),
        lambda p: p.add_argument("--reward", type=float, default=1.0),
        lambda p: p.add_argument("--tau", type=int, default=100),
        lambda p: p.add_argument("--episodes", type=int, default=20_000),
        lambda p: p.add_argument("--seed", type=int, default=0),
        lambda p: p.add_argument("--learn", action=argparse.BooleanOptionalAction, default=True),
    ],
)
def counterexample(args: argparse.Namespace) -> int:
    right, left = counterexample_returns(args.gamma, args.nu, args.reward)
    print(f"U_right={right!r} U_left={left!r}")
    print(f"threshold={counterexample_threshold(args.nu)!r} margin={counterexample_margin(args.gamma, args.nu)!r}")
    if args.learn:
        model, automaton = make_counterexample(args.nu)
        config = LearnConfig(
            gamma=args.gamma, reward=args.reward, tau=args.tau,
            max_episodes=args.episodes, window=args.episodes, tolerance=1e-9, seed=args.seed,
        )
        qtable, _ = run_learning(model, automaton, config)
        product = ProductMDP(model, automaton)
        (s0,) = product.initial_distribution()
        print(f"greedy={greedy_action(qtable, s0, product.enabled_actions(s0))}")
    return EXIT_OK
