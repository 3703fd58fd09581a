"""Command-line front end: ``wsnroute run|sweep|compare``.

Exit codes: 0 ok, 1 internal failure, 2 configuration error, 3 bad compare inputs.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigError, SimConfig, Strategy, coerce, load_config
from .engine import SimState, run, sweep
from .network import write_deployment_csv
from .report import InputError, compare, write_comparison, write_rounds_csv, write_sweep, write_trace_csv

log = logging.getLogger("wsnroute")

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_INPUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _strategy(text: str) -> Strategy:
    try:
        return Strategy(text.strip().lower())
    except ValueError:
        raise ConfigError("strategy", f"invalid value {text!r} (choose he, mecrt or minhop)") from None


def _int_list(key: str, text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(key, f"invalid integer list {text!r}") from None


def _base_config(args) -> SimConfig:
    try:
        config = load_config(args.config) if args.config else SimConfig()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
    changes = {}
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(item, "expected key=value")
        changes[key.strip()] = coerce(key.strip(), value)
    if getattr(args, "strategy", None):
        changes["strategy"] = _strategy(args.strategy)
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    return config.replace(**changes)


def cmd_run(args) -> int:
    config = _base_config(args)
    os.makedirs(args.out, exist_ok=True)
    trace = [] if args.trace else None
    result = run(config, trace=trace)
    write_rounds_csv(result, os.path.join(args.out, "rounds.csv"))
    if trace is not None:
        write_trace_csv(trace, config, os.path.join(args.out, "trace.csv"))
    if args.dump_deployment:
        write_deployment_csv(SimState(config).nodes, os.path.join(args.out, "deployment.csv"))
    print(f"strategy={config.strategy.value} seed={config.seed} n={config.node_count} "
          f"first_death={result.lifetime_first_death} termination={result.lifetime_termination} "
          f"reason={result.termination_reason.value} delivered={result.rounds_delivered}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = _base_config(args)
    nodes = _int_list("nodes", args.nodes) if args.nodes else [base.node_count]
    strategies = [_strategy(s) for s in args.strategies.split(",") if s.strip()]
    if args.seeds < 1:
        raise ConfigError("seeds", "must be >= 1")
    seeds = [base.seed + i for i in range(args.seeds)]
    table = sweep(base, nodes, strategies, seeds, args.checkpoint_every, args.workers)
    write_sweep(table, args.out)
    for a in table.aggregates:
        print(f"n={a.n} strategy={a.strategy.value} runs={a.runs} "
              f"life_fd={a.mean_life_fd:.1f}±{a.sd_life_fd:.1f} life_term={a.mean_life_term:.1f}±{a.sd_life_term:.1f}")
    return EXIT_OK


def cmd_compare(args) -> int:
    comp = compare(args.inputs)
    write_comparison(comp, args.out)
    for line in comp.verdicts:
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wsnroute", description="Energy-aware negotiation routing simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
        sp.add_argument("--out", default=".", help="output directory")

    r = sub.add_parser("run", help="run one simulation")
    common(r)
    r.add_argument("--strategy")
    r.add_argument("--seed", type=int)
    r.add_argument("--trace", action="store_true", help="also write the per-hop trace.csv")
    r.add_argument("--dump-deployment", action="store_true", help="also write deployment.csv")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run node-count x strategy x seed combinations")
    common(s)
    s.add_argument("--nodes", help="comma-separated node counts")
    s.add_argument("--strategies", default="he,mecrt")
    s.add_argument("--seeds", type=int, default=30, help="number of seeds, counting up from the config seed")
    s.add_argument("--checkpoint-every", type=int, default=50)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("compare", help="join run/sweep outputs into figure series")
    c.add_argument("inputs", nargs="+", help="run or sweep output directories")
    c.add_argument("--out", default=".")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = None
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        if getattr(args, "func", None) is cmd_compare:
            print(f"input error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        log.exception("failed")
        return EXIT_INTERNAL
    except Exception:
        log.exception("internal failure")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
