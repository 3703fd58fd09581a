"""CSV outputs with provenance headers, and figure-style comparison series."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

from .config import SimConfig, Strategy, config_items
from .engine import SimResult, SweepTable
from .negotiation import TraceEvent

ROUNDS_HEADER = ["round", "source", "delivered", "consumed_j", "total_residual_j",
                 "alive", "dead_cum", "hops", "latency_s"]
SWEEP_HEADER = ["n", "strategy", "seed", "lifetime_first_death", "lifetime_termination",
                "rounds_delivered", "total_consumed_j"]
AGGREGATE_HEADER = ["n", "strategy", "mean_life_fd", "sd_life_fd", "mean_life_term", "sd_life_term"]
CURVES_HEADER = ["n", "strategy", "round", "mean_residual_j", "mean_dead"]
TRACE_HEADER = ["round", "hop_index", "kind", "sender", "receiver", "joules"]

# Keys that vary inside a sweep and so are not part of its shared config.
SWEPT_KEYS = ("node_count", "strategy", "seed")


class InputError(Exception):
    """Comparison inputs are missing or inconsistent."""


def fmt(x: float) -> str:
    return format(x, ".17g")


def provenance(config: SimConfig, extra=(), skip=()) -> str:
    lines = [f"# {k} = {v}" for k, v in config_items(config) if k not in skip]
    lines += [f"# {k} = {v}" for k, v in extra]
    return "\n".join(lines) + "\n"


def _write(path, header_text: str, columns, rows) -> None:
    buf = io.StringIO()
    buf.write(header_text)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_rounds_csv(result: SimResult, path) -> None:
    rows = (
        [m.round, "" if m.source is None else m.source, int(m.delivered), fmt(m.network_j_consumed),
         fmt(m.total_residual_j), m.alive_count, m.cumulative_dead, m.hops, repr(m.latency_s)]
        for m in result.rounds
    )
    _write(path, provenance(result.config, [("seeds", result.config.seed)]), ROUNDS_HEADER, rows)


def write_trace_csv(events: list[TraceEvent], config: SimConfig, path) -> None:
    rows = ([e.round, e.hop_index, e.kind.value, e.sender, e.receiver, fmt(e.joules)] for e in events)
    _write(path, provenance(config), TRACE_HEADER, rows)


def _sweep_header(table: SweepTable) -> str:
    ns = sorted({r.n for r in table.rows})
    strategies = list(dict.fromkeys(r.strategy.value for r in table.rows))
    extra = [
        ("nodes", ",".join(map(str, ns))),
        ("strategies", ",".join(strategies)),
        ("seeds", ",".join(map(str, table.seeds))),
        ("checkpoint_every", table.checkpoint_every),
    ]
    return provenance(table.base, extra, skip=SWEPT_KEYS)


def write_sweep(table: SweepTable, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    header = _sweep_header(table)
    _write(os.path.join(out_dir, "sweep.csv"), header, SWEEP_HEADER, (
        [r.n, r.strategy.value, r.seed, r.lifetime_first_death, r.lifetime_termination,
         r.rounds_delivered, fmt(r.total_consumed_j)] for r in table.rows))
    _write(os.path.join(out_dir, "aggregate.csv"), header, AGGREGATE_HEADER, (
        [a.n, a.strategy.value, fmt(a.mean_life_fd), fmt(a.sd_life_fd),
         fmt(a.mean_life_term), fmt(a.sd_life_term)] for a in table.aggregates))
    _write(os.path.join(out_dir, "curves.csv"), header, CURVES_HEADER, (
        [a.n, a.strategy.value, rnd, fmt(res), fmt(dead)]
        for a in table.aggregates
        for rnd, res, dead in zip(a.checkpoints, a.mean_residual, a.mean_dead)))


# --- reading back -----------------------------------------------------------


@dataclass
class CsvFile:
    meta: dict[str, str]
    rows: list[dict[str, str]]


def read_csv(path) -> CsvFile:
    meta = {}
    body = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key.strip()] = value.strip()
            else:
                body.append(line)
    return CsvFile(meta, list(csv.DictReader(body)))


def _series(rows, column):
    return {int(r["round"]): float(r[column]) for r in rows}


def _join(series_by_strategy: dict[str, dict[int, float]]) -> list[list]:
    """Align per-strategy round series; a finished run holds its final value."""
    if not all(series_by_strategy.values()):
        raise InputError("a run input has no rounds")
    last = max(max(s) for s in series_by_strategy.values())
    out = []
    for rnd in range(1, last + 1):
        row = [rnd]
        for s in series_by_strategy.values():
            row.append(s[rnd] if rnd in s else s[max(s)])
        out.append(row)
    return out


def _compare_key(meta: dict[str, str], skip) -> dict[str, str]:
    return {k: v for k, v in meta.items() if k not in skip}


@dataclass
class Comparison:
    files: dict[str, list[list]]
    verdicts: list[str]


def _dominance(rows, a_col: int, b_col: int, higher_is_better: bool) -> float:
    """Fraction of rows where column ``a`` is at least as good as column ``b``."""
    good = sum((r[a_col] >= r[b_col]) if higher_is_better else (r[a_col] <= r[b_col]) for r in rows)
    return good / len(rows) if rows else 1.0


def compare(inputs) -> Comparison:
    """Join run directories (rounds.csv) and/or sweep directories (aggregate.csv)."""
    runs: dict[str, CsvFile] = {}
    sweeps: list[CsvFile] = []
    for d in inputs:
        rounds = os.path.join(d, "rounds.csv")
        agg = os.path.join(d, "aggregate.csv")
        if os.path.exists(rounds):
            f = read_csv(rounds)
            strategy = f.meta.get("strategy")
            if strategy is None:
                raise InputError(f"{rounds}: missing provenance header")
            if strategy in runs:
                raise InputError(f"{rounds}: strategy {strategy} given twice")
            runs[strategy] = f
        elif os.path.exists(agg):
            sweeps.append(read_csv(agg))
        else:
            raise InputError(f"{d}: neither rounds.csv nor aggregate.csv found")
    if not runs and not sweeps:
        raise InputError("no inputs")

    _check_consistent([(f.meta, ("strategy",)) for f in runs.values()])
    _check_consistent([(f.meta, SWEPT_KEYS + ("nodes", "strategies", "seeds", "checkpoint_every"))
                       for f in sweeps])
    if runs and sweeps:
        _check_consistent([(f.meta, SWEPT_KEYS + ("nodes", "strategies", "seeds", "checkpoint_every"))
                           for f in [*runs.values(), *sweeps]])

    files: dict[str, list[list]] = {}
    verdicts: list[str] = []
    order = [s.value for s in Strategy if s.value in runs]
    if runs:
        energy = _join({s: _series(runs[s].rows, "total_residual_j") for s in order})
        dead = _join({s: _series(runs[s].rows, "dead_cum") for s in order})
        files["energy.csv"] = [["round", *[f"residual_{s}" for s in order]], *energy]
        files["dead.csv"] = [["round", *[f"dead_{s}" for s in order]], *dead]
        life = {s: len(runs[s].rows) for s in order}
        for name, pair, what in (("fig2_energy.csv", ("minhop", "mecrt"), "residual"),
                                 ("fig3_energy.csv", ("he", "mecrt"), "residual"),
                                 ("fig4_dead.csv", ("he", "mecrt"), "dead")):
            if not all(p in runs for p in pair):
                continue
            src = energy if what == "residual" else dead
            ia, ib = (order.index(p) + 1 for p in pair)
            files[name] = [["round", *[f"{what}_{p}" for p in pair]], *([r[0], r[ia], r[ib]] for r in src)]
            a, b = pair
            if what == "residual":
                frac = _dominance(src, ib, ia, higher_is_better=True)
                verdicts.append(f"{name[:4]} energy: {b} residual >= {a} in {frac:.1%} of rounds; "
                                f"lifetime {b}={life[b]} {a}={life[a]} -> "
                                f"{b if life[b] >= life[a] else a} lasted longer")
            else:
                frac = _dominance(src, ia, ib, higher_is_better=True)
                verdicts.append(f"{name[:4]} deaths: {a} dead count >= {b} in {frac:.1%} of rounds")
    if sweeps:
        rows = [r for f in sweeps for r in f.rows]
        strategies = [s.value for s in Strategy if any(r["strategy"] == s.value for r in rows)]
        table = {(int(r["n"]), r["strategy"]): r for r in rows}
        ns = sorted({n for n, _ in table})
        header = ["n"] + [f"life_term_{s}" for s in strategies] + [f"life_fd_{s}" for s in strategies]
        out = []
        for n in ns:
            cells = [table.get((n, s)) for s in strategies]
            out.append([n] + [c["mean_life_term"] if c else "" for c in cells]
                       + [c["mean_life_fd"] if c else "" for c in cells])
        files["fig5_lifetime.csv"] = [header, *out]
        if "he" in strategies and "mecrt" in strategies:
            for n in ns:
                he, me = table.get((n, "he")), table.get((n, "mecrt"))
                if he and me:
                    a, b = float(he["mean_life_term"]), float(me["mean_life_term"])
                    verdicts.append(f"fig5 n={n}: mean lifetime mecrt={b:g} he={a:g} -> "
                                    f"{'mecrt' if b >= a else 'he'} dominated")
    return Comparison(files, verdicts)


def _check_consistent(entries) -> None:
    if len(entries) < 2:
        return
    ref = _compare_key(*entries[0])
    for meta, skip in entries[1:]:
        other = _compare_key(meta, skip)
        diff = sorted(k for k in set(ref) | set(other) if ref.get(k) != other.get(k))
        if diff:
            raise InputError("inputs come from different configs; mismatched keys: " + ", ".join(diff))


def write_comparison(comp: Comparison, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for name, rows in comp.files.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for row in rows:
                w.writerow([fmt(c) if isinstance(c, float) else c for c in row])
