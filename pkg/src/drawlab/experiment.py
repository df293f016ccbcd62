"""Scenario sweeps, Monte Carlo aggregation, Pareto analysis, persistence.

A cell is one (scenario, mechanism) pair.  Cells aggregate per-trial
outcomes into integer counters (match-count histogram, pair-matrix counts,
proposal totals), so results are exactly mergeable: any sharding of the
trial range, run in any order or process pool, reproduces the serial
result bit for bit.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleScenarioError, ResultFormatError
from .mechanisms import (
    DEFAULT_PROPOSAL_CAP,
    MECHANISMS,
    VectorUniform,
    cell_key,
    get_skip_engine,
)
from .metrics import MatrixAccumulator, PairMatrixSet, pair_matrices, pot_pairs
from .model import Instance, scenario_constraints
from .rng import RngStream, derive_sub

RESULTS_SCHEMA = "drawlab.results/1"
_CHUNK = 1 << 16

CSV_COLUMNS = (
    "scenario",
    "mechanism",
    "trials",
    "seed",
    "mean_unattractive",
    "stderr_unattractive",
    "I",
    "stderr_I",
    "feasible_proportion",
    "elapsed_ms",
)


@dataclass
class ScenarioResult:
    scenario: int
    mechanism: str
    trials: int
    seed: int
    mean_unattractive: float
    stderr_unattractive: float
    i_hat: float
    inequality: float
    stderr_i: float
    feasible_proportion: float | None
    histogram: dict  # unattractive count -> raw trial count
    elapsed_ms: float
    m: int = 0
    n: int = 0
    matrix_counts: np.ndarray | None = field(default=None, repr=False)

    @property
    def histogram_probs(self) -> dict:
        return {k: v / self.trials for k, v in sorted(self.histogram.items())}


@dataclass(frozen=True)
class TradeoffPoint:
    x: float  # mean unattractive matches
    y: float  # inequality I
    scenario: int
    mechanism: str


@dataclass
class ParetoResult:
    frontier: list
    dominated: list  # (point, [dominating points])


# ---------------------------------------------------------------------------
# shard execution
# ---------------------------------------------------------------------------


def _shard_uniform(instance, constraints, seed, lo, hi, max_proposals):
    sampler = VectorUniform(instance, constraints)
    n, m = instance.n, instance.m
    conf = np.array([t.confederation for t in instance.teams], dtype=np.int64)
    nconf = len(instance.confederations)
    acc = MatrixAccumulator(m, n)
    hist = np.zeros(1, dtype=np.int64)
    proposals = 0
    for start in range(lo, hi, _CHUNK):
        stop = min(start + _CHUNK, hi)
        pos, props = sampler.run_trials(seed, start, stop, max_proposals=max_proposals)
        proposals += int(props.sum())
        acc.add_pos_batch(pos)
        T = stop - start
        flat = (
            np.arange(T, dtype=np.int64)[:, None] * (n * nconf)
            + pos.astype(np.int64) * nconf
            + conf[None, :]
        )
        counts = np.bincount(flat.ravel(), minlength=T * n * nconf).reshape(T, -1)
        u = (counts * (counts - 1) // 2).sum(axis=1)
        top = int(u.max()) + 1 if T else 1
        if top > hist.size:
            hist = np.concatenate([hist, np.zeros(top - hist.size, dtype=np.int64)])
        hist += np.bincount(u, minlength=hist.size)
    return acc.counts, acc.trials, hist, proposals


def _shard_skip(instance, constraints, seed, lo, hi):
    engine = get_skip_engine(instance, constraints)
    if not engine.feasible:
        raise InfeasibleScenarioError(
            f"no valid assignment exists for scenario {constraints.scenario}"
        )
    n, m = instance.n, instance.m
    nconf = len(instance.confederations)
    conf = [t.confederation for t in instance.teams]
    pairs = pot_pairs(m)
    npairs = len(pairs)
    flat_counts = [0] * (npairs * n * n)
    hist = {}
    ckey = cell_key(seed, "skip", constraints.scenario)
    draw_pos = engine.draw_pos
    nsq = n * n
    for t in range(lo, hi):
        stream = RngStream.from_key(derive_sub(ckey, t))
        pos, _ = draw_pos(stream)
        cnt = [0] * (n * nconf)
        u = 0
        for tid in range(m * n):
            idx = pos[tid] * nconf + conf[tid]
            u += cnt[idx]
            cnt[idx] += 1
        hist[u] = hist.get(u, 0) + 1
        inv = [0] * (m * n)
        for tid in range(m * n):
            inv[(tid // n) * n + pos[tid]] = tid % n
        for p, (k, l) in enumerate(pairs):
            base = p * nsq
            a = (k - 1) * n
            b = (l - 1) * n
            for g in range(n):
                flat_counts[base + inv[a + g] * n + inv[b + g]] += 1
    counts = np.array(flat_counts, dtype=np.int64).reshape(npairs, n, n)
    top = max(hist) + 1 if hist else 1
    hist_arr = np.zeros(top, dtype=np.int64)
    for k, v in hist.items():
        hist_arr[k] = v
    return counts, hi - lo, hist_arr, None


def _run_shard(args):
    instance, scenario, mechanism, seed, lo, hi, max_proposals = args
    constraints = scenario_constraints(scenario)
    if mechanism == "uniform":
        return _shard_uniform(instance, constraints, seed, lo, hi, max_proposals)
    return _shard_skip(instance, constraints, seed, lo, hi)


def _merge_shards(parts):
    counts = sum(p[0] for p in parts)
    trials = sum(p[1] for p in parts)
    top = max(p[2].size for p in parts)
    hist = np.zeros(top, dtype=np.int64)
    for p in parts:
        hist[: p[2].size] += p[2]
    proposals = None
    if parts[0][3] is not None:
        proposals = sum(p[3] for p in parts)
    return counts, trials, hist, proposals


def _result_from_counts(instance, scenario, mechanism, trials, seed, merged, elapsed_ms):
    counts, _, hist, proposals = merged
    n, m = instance.n, instance.m
    probs = counts.astype(np.float64) / trials
    sq = float(np.square(probs).sum())
    npairs = len(pot_pairs(m))
    i_hat = sq / n * 2.0 / (m * (m - 1))
    lo_bound = 1.0 / n
    ineq = (i_hat - lo_bound) / (1.0 - lo_bound)
    # delta method, covariances ignored (slightly conservative)
    grad_sq = np.square(2.0 * probs * (2.0 / (m * (m - 1)) / n))
    var_ihat = float((grad_sq * probs * (1.0 - probs)).sum()) / trials
    stderr_i = np.sqrt(var_ihat) / (1.0 - lo_bound)
    values = np.nonzero(hist)[0]
    histogram = {int(v): int(hist[v]) for v in values}
    mean_u = float((values * hist[values]).sum()) / trials
    var_u = float((values.astype(np.float64) ** 2 * hist[values]).sum()) / trials - mean_u**2
    stderr_u = np.sqrt(max(var_u, 0.0) / trials)
    feasible = None
    if proposals is not None:
        feasible = trials / proposals
    return ScenarioResult(
        scenario=scenario,
        mechanism=mechanism,
        trials=trials,
        seed=seed,
        mean_unattractive=mean_u,
        stderr_unattractive=float(stderr_u),
        i_hat=i_hat,
        inequality=ineq,
        stderr_i=float(stderr_i),
        feasible_proportion=feasible,
        histogram=histogram,
        elapsed_ms=elapsed_ms,
        m=m,
        n=n,
        matrix_counts=counts,
    )


def run_scenario(
    instance: Instance,
    scenario: int,
    mechanism: str,
    trials: int,
    seed: int,
    workers: int = 1,
    max_proposals: int = DEFAULT_PROPOSAL_CAP,
) -> ScenarioResult:
    """Aggregate ``trials`` deterministic trials of one cell."""
    if mechanism not in MECHANISMS:
        raise ValueError(f"unknown mechanism {mechanism!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    t0 = time.perf_counter()
    shards = _shard_ranges(trials, workers)
    tasks = [
        (instance, scenario, mechanism, seed, lo, hi, max_proposals)
        for lo, hi in shards
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_shard, tasks))
    else:
        parts = [_run_shard(t) for t in tasks]
    merged = _merge_shards(parts)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return _result_from_counts(instance, scenario, mechanism, trials, seed, merged, elapsed_ms)


def _shard_ranges(trials: int, workers: int):
    if workers <= 1:
        return [(0, trials)]
    per = max(1, -(-trials // workers))
    return [(lo, min(lo + per, trials)) for lo in range(0, trials, per)]


def sweep(
    instance: Instance,
    scenarios,
    mechanisms,
    trials: int,
    seed: int,
    workers: int = 1,
    max_proposals: int = DEFAULT_PROPOSAL_CAP,
) -> list:
    """One ScenarioResult per (scenario, mechanism), canonically ordered.

    Trial streams are disjoint across cells, so the sweep equals running
    each cell on its own; workers only change wall time, never values.
    """
    cells = [(s, mech) for s in sorted(scenarios) for mech in sorted(mechanisms)]
    for _, mech in cells:
        if mech not in MECHANISMS:
            raise ValueError(f"unknown mechanism {mech!r}")
    tasks = []
    spans = []
    for s, mech in cells:
        shards = _shard_ranges(trials, workers)
        spans.append((s, mech, len(shards)))
        tasks.extend(
            (instance, s, mech, seed, lo, hi, max_proposals) for lo, hi in shards
        )
    t0 = time.perf_counter()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_shard, tasks))
    else:
        parts = [_run_shard(t) for t in tasks]
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    results = []
    i = 0
    for s, mech, nshards in spans:
        merged = _merge_shards(parts[i : i + nshards])
        i += nshards
        results.append(
            _result_from_counts(instance, s, mech, trials, seed, merged, elapsed_ms)
        )
    return results


def result_matrices(result: ScenarioResult, instance: Instance) -> PairMatrixSet:
    """Empirical pair matrices of a result, with team-name headers."""
    if result.matrix_counts is None:
        raise ValueError("result carries no matrix counts")
    acc = MatrixAccumulator(result.m, result.n)
    acc.add_raw(result.matrix_counts, result.trials)
    names = tuple(
        tuple(t.name for t in instance.pot_teams(k)) for k in range(1, instance.m + 1)
    )
    return pair_matrices(acc, team_names=names)


def distortion_ratio(result_skip: ScenarioResult, result_uniform: ScenarioResult) -> float:
    """I_skip / I_uniform for one scenario."""
    if result_skip.scenario != result_uniform.scenario:
        raise ValueError("distortion ratio needs results for the same scenario")
    if result_uniform.inequality == 0:
        raise ZeroDivisionError("uniform inequality is zero")
    return result_skip.inequality / result_uniform.inequality


def tradeoff_points(results) -> list:
    return [
        TradeoffPoint(r.mean_unattractive, r.inequality, r.scenario, r.mechanism)
        for r in results
    ]


def pareto_frontier(points) -> ParetoResult:
    """Split points into the non-dominated frontier and the dominated rest.

    Both coordinates are minimised.  q dominates p when q <= p in both and
    q < p in at least one; exact ties stay on the frontier.
    """
    points = list(points)
    if not points:
        raise ValueError("no points")
    frontier = []
    dominated = []
    for p in points:
        doms = [
            q
            for q in points
            if (q.x <= p.x and q.y <= p.y) and (q.x < p.x or q.y < p.y)
        ]
        if doms:
            doms.sort(key=lambda q: (q.x, q.y, q.scenario, q.mechanism))
            dominated.append((p, doms))
        else:
            frontier.append(p)
    return ParetoResult(frontier=frontier, dominated=dominated)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def export_results(results, fmt: str = "table") -> str:
    """Render results as delimited text ("table") or JSON ("structured")."""
    results = sorted(results, key=lambda r: (r.scenario, r.mechanism))
    if fmt == "table":
        lines = [f"# {RESULTS_SCHEMA}", ",".join(CSV_COLUMNS)]
        for r in results:
            lines.append(
                ",".join(
                    [
                        str(r.scenario),
                        r.mechanism,
                        str(r.trials),
                        str(r.seed),
                        _fmt(r.mean_unattractive),
                        _fmt(r.stderr_unattractive),
                        _fmt(r.inequality),
                        _fmt(r.stderr_i),
                        _fmt(r.feasible_proportion),
                        _fmt(r.elapsed_ms),
                    ]
                )
            )
        return "\n".join(lines) + "\n"
    if fmt == "structured":
        payload = {"schema": RESULTS_SCHEMA, "results": []}
        for r in results:
            row = {
                "scenario": r.scenario,
                "mechanism": r.mechanism,
                "trials": r.trials,
                "seed": r.seed,
                "mean_unattractive": r.mean_unattractive,
                "stderr_unattractive": r.stderr_unattractive,
                "I_hat": r.i_hat,
                "I": r.inequality,
                "stderr_I": r.stderr_i,
                "feasible_proportion": r.feasible_proportion,
                "histogram": {str(k): v for k, v in sorted(r.histogram.items())},
                "m": r.m,
                "n": r.n,
                "elapsed_ms": r.elapsed_ms,
            }
            if r.matrix_counts is not None:
                row["matrix_counts"] = r.matrix_counts.tolist()
            payload["results"].append(row)
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r} (use 'table' or 'structured')")


def export_histograms(results) -> str:
    """Wide delimited table of histogram masses, one row per cell."""
    results = sorted(results, key=lambda r: (r.scenario, r.mechanism))
    values = sorted({v for r in results for v in r.histogram})
    lines = [f"# {RESULTS_SCHEMA} histograms"]
    lines.append(",".join(["scenario", "mechanism", "trials"] + [str(v) for v in values]))
    for r in results:
        probs = r.histogram_probs
        lines.append(
            ",".join(
                [str(r.scenario), r.mechanism, str(r.trials)]
                + [_fmt(probs.get(v, 0.0)) for v in values]
            )
        )
    return "\n".join(lines) + "\n"


def parse_results(text: str):
    """Read back either export format into ScenarioResult rows."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ResultFormatError(f"malformed structured results: {exc}") from None
        if payload.get("schema") != RESULTS_SCHEMA:
            raise ResultFormatError(f"unknown schema {payload.get('schema')!r}")
        out = []
        for row in payload["results"]:
            counts = row.get("matrix_counts")
            out.append(
                ScenarioResult(
                    scenario=row["scenario"],
                    mechanism=row["mechanism"],
                    trials=row["trials"],
                    seed=row["seed"],
                    mean_unattractive=row["mean_unattractive"],
                    stderr_unattractive=row["stderr_unattractive"],
                    i_hat=row["I_hat"],
                    inequality=row["I"],
                    stderr_i=row["stderr_I"],
                    feasible_proportion=row["feasible_proportion"],
                    histogram={int(k): v for k, v in row["histogram"].items()},
                    elapsed_ms=row["elapsed_ms"],
                    m=row.get("m", 0),
                    n=row.get("n", 0),
                    matrix_counts=np.array(counts, dtype=np.int64) if counts else None,
                )
            )
        return out
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(f"# {RESULTS_SCHEMA}"):
        raise ResultFormatError("missing drawlab results schema header")
    header = lines[1].split(",")
    if tuple(header) != CSV_COLUMNS:
        raise ResultFormatError(f"unexpected columns: {header}")
    out = []
    for ln in lines[2:]:
        parts = ln.split(",")
        row = dict(zip(CSV_COLUMNS, parts))
        out.append(
            ScenarioResult(
                scenario=int(row["scenario"]),
                mechanism=row["mechanism"],
                trials=int(row["trials"]),
                seed=int(row["seed"]),
                mean_unattractive=float(row["mean_unattractive"]),
                stderr_unattractive=float(row["stderr_unattractive"]),
                i_hat=0.0,
                inequality=float(row["I"]),
                stderr_i=float(row["stderr_I"]),
                feasible_proportion=(
                    float(row["feasible_proportion"]) if row["feasible_proportion"] else None
                ),
                histogram={},
                elapsed_ms=float(row["elapsed_ms"]),
            )
        )
    return out


def strip_metadata(document: str) -> str:
    """Drop elapsed-time metadata so deterministic outputs compare equal."""
    stripped = document.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(document)
        for row in payload.get("results", []):
            row.pop("elapsed_ms", None)
        return json.dumps(payload, indent=2) + "\n"
    lines = document.splitlines()
    if len(lines) >= 2 and lines[1].split(",") == list(CSV_COLUMNS):
        keep = [lines[0], ",".join(CSV_COLUMNS[:-1])]
        for ln in lines[2:]:
            if ln.strip():
                keep.append(",".join(ln.split(",")[:-1]))
        return "\n".join(keep) + "\n"
    return document
