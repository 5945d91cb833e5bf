"""`pfedgame oracle`: greedy game versus grid maximum on random accuracy landscapes."""

import argparse

from app.models.game import GameConfig
from app.models.simulation import validated
from app.services.game_service import grid_optimum_report, random_landscapes


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "oracle",
        help="Check the game against a direct trace and report how often it finds the grid optimum",
    )
    parser.add_argument("--landscapes", type=int, default=1000, help="Random landscapes to play")
    parser.add_argument("--seed", type=int, default=0, help="Landscape seed")
    parser.add_argument("--beta", type=float, default=0.001, help="Minimum accuracy change")
    parser.add_argument("--delta", type=float, default=0.1, help="psi step per game round")
    parser.add_argument("--game-rounds", dest="game_rounds", type=int, default=10, help="Game rounds r")
    parser.add_argument("--early-exit-game", action="store_true", help="Stop after the first rejection")
    parser.set_defaults(func=cmd_oracle)


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = validated(GameConfig, {
        "beta": args.beta,
        "delta": args.delta,
        "rounds": args.game_rounds,
        "early_exit": args.early_exit_game,
    })
    report = grid_optimum_report(random_landscapes(max(0, args.landscapes), cfg, args.seed), cfg)
    print(f"landscapes:       {report.landscapes}")
    print(f"grid optimum hit: {report.optimal} ({report.hit_rate:.1%})")
    print(f"mean regret:      {report.mean_regret:.4f}")
    print(f"max regret:       {report.max_regret:.4f}")
    print(f"trace mismatches: {report.trace_mismatches}")
    return 0 if report.trace_mismatches == 0 else 1
