"""Exit criteria. Each test prints a single PASS/FAIL line; all of them run in the default suite.

The exhaustive grid (|Omega| in 2..4, K in |Omega|..6, every quota) is swept once
and shared by criteria 2, 3, 6 and 7.
"""

import hashlib
import io
import json
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import redirect_stdout
from itertools import product
from pathlib import Path

import pytest

from quotacycles.cli import main
from quotacycles.core import Alphabet, Message, Profile, iter_message_tuples
from quotacycles.cyclicity import is_cyclic, is_cyclic_definition
from quotacycles.graph import (
    Edge,
    ReportGraph,
    brute_force_balanced_subset,
    build_report_graph,
    decompose_cycles,
    is_balanced,
    max_balanced_subset,
)
from quotacycles.verify import enumerate_quotas, pair_count, sweep

from .strategies import random_balanced_graph, random_pair

GOLDEN = Path(__file__).parent / "golden"
GRID = [(n, k) for n in (2, 3, 4) for k in range(n, 7)]
GRID_SECONDS = 300
WORKERS = os.cpu_count() or 1


def small_grid_pairs(max_n=3, max_k=5):
    for n in range(2, max_n + 1):
        alphabet = Alphabet.of_size(n)
        for k in range(n, max_k + 1):
            for quota in enumerate_quotas(alphabet, k):
                messages = [Message(quota, m) for m in iter_message_tuples(quota.counts)]
                for p in product(range(n), repeat=k):
                    profile = Profile(alphabet, p)
                    for m in messages:
                        yield profile, m


@pytest.fixture(scope="module")
def grid():
    started = time.perf_counter()
    reports = sweep(GRID, workers=WORKERS)
    return reports, time.perf_counter() - started


def test_criterion_1_counterexample(criterion):
    started = time.perf_counter()
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main([
            "check", "--alphabet", "A,B,C,D", "--quota", "1,1,1,1",
            "--profile", "A,A,B,C", "--message", "A,B,C,D",
        ])
    elapsed = time.perf_counter() - started
    d = json.loads(buf.getvalue())
    ok = (
        code == 0
        and d["k"] == 4
        and d["mismatch"] == 3
        and d["deviation"] == 2
        and d["cyclic"] is False
        and d["ineq1_holds"] is False
        and d["ineq2_holds"] is True
        and elapsed < 1.0
    )
    criterion(
        1, "counterexample reproduction", ok,
        f"mismatch {d['mismatch']}/4, deviation {d['deviation']}/4, cyclic={d['cyclic']}, "
        f"ineq1={d['ineq1_holds']}, ineq2={d['ineq2_holds']}, {elapsed:.3f}s",
    )


def test_criterion_2_theorem(grid, criterion):
    reports, elapsed = grid
    complete = all(r.error is None and r.pairs_checked == pair_count(r.quota) for r in reports)
    pairs = sum(r.pairs_checked for r in reports)
    violations = sum(r.theorem_total for r in reports)
    expected_quotas = sum(len(enumerate_quotas(Alphabet.of_size(n), k)) for n, k in GRID)
    ok = complete and len(reports) == expected_quotas and violations == 0 and elapsed < GRID_SECONDS
    criterion(
        2, "no non-cyclic pair breaks the relaxed inequality", ok,
        f"{len(reports)} quotas, {pairs} pairs, {violations} violations, "
        f"{elapsed:.1f}s with {WORKERS} worker(s) (limit {GRID_SECONDS}s)",
    )


def test_criterion_3_sharpness(grid, criterion):
    reports, _ = grid
    golden = json.loads((GOLDEN / "grid_counts.json").read_text())
    mismatched = []
    by_size = {2: 0, 3: 0, 4: 0}
    for r in reports:
        s = r.summary()
        cell = golden[f"{s['alphabet_size']},{s['k']}"][",".join(map(str, s["quota"]))]
        got = {key: s[key] for key in cell}
        if got != cell:
            mismatched.append((s["alphabet_size"], s["k"], s["quota"]))
        by_size[r.alphabet.size] += r.ineq1_total
    four_cells = {
        (n, k): sum(r.ineq1_total for r in reports if (r.alphabet.size, r.k) == (n, k))
        for n, k in GRID if n == 4
    }
    unit = next(r for r in reports if r.alphabet.size == 4 and r.k == 4)
    pair_found = any(
        v.profile.names == ("A", "A", "B", "C") and v.message.names == ("A", "B", "C", "D")
        for v in unit.ineq1_violations
    )
    ok = (
        not mismatched
        and by_size[2] == 0
        and by_size[3] == 0
        and all(c > 0 for c in four_cells.values())
        and pair_found
    )
    criterion(
        3, "weak inequality fails only for |Omega|=4", ok,
        f"violations by |Omega|: {by_size}; |Omega|=4 cells {four_cells}; "
        f"counterexample found={pair_found}; golden mismatches={len(mismatched)}",
    )


def test_criterion_4_cyclicity_oracle(criterion):
    disagreements = 0
    exhaustive = 0
    for profile, message in small_grid_pairs():
        exhaustive += 1
        if is_cyclic(profile, message) != (is_cyclic_definition(profile, message) is not None):
            disagreements += 1
    rng = random.Random(20240601)
    sampled = 0
    for k in (6, 7, 8):
        for _ in range(10_000):
            profile, message = random_pair(rng, 4, k)
            sampled += 1
            if is_cyclic(profile, message) != (is_cyclic_definition(profile, message) is not None):
                disagreements += 1
    ok = disagreements == 0 and sampled >= 10_000
    criterion(
        4, "graph cyclicity equals the definition", ok,
        f"{exhaustive} exhaustive + {sampled} random pairs, {disagreements} disagreements",
    )


def test_criterion_5_matching_oracle(criterion):
    disagreements = 0
    exhaustive = 0
    for profile, message in small_grid_pairs():
        graph = build_report_graph(profile, message)
        exhaustive += 1
        if len(max_balanced_subset(graph)) != len(brute_force_balanced_subset(graph)):
            disagreements += 1
    rng = random.Random(777)
    sampled = 0
    for _ in range(2_000):
        n = rng.randint(2, 5)
        k = rng.randint(n, 12)
        graph = build_report_graph(*random_pair(rng, n, k))
        sampled += 1
        if len(max_balanced_subset(graph)) != len(brute_force_balanced_subset(graph)):
            disagreements += 1
    trap = ReportGraph(3, (Edge(1, 0, 1), Edge(2, 1, 2), Edge(3, 2, 0), Edge(4, 1, 0)), ("A", "B", "C"))
    trap_fast, trap_slow = len(max_balanced_subset(trap)), len(brute_force_balanced_subset(trap))
    ok = disagreements == 0 and sampled >= 1_000 and trap_fast == trap_slow == 3
    criterion(
        5, "maximum balanced subset equals brute force", ok,
        f"{exhaustive} exhaustive + {sampled} random graphs, {disagreements} disagreements, "
        f"greedy trap |T|={trap_fast}",
    )


def test_criterion_6_lemma2_bound(grid, criterion):
    reports, _ = grid
    violations = sum(r.lemma2_total for r in reports)
    equalities = sum(r.lemma2_equalities for r in reports)
    alphabet = Alphabet.of_size(4)
    quota = enumerate_quotas(alphabet, 4)[0]
    graph = build_report_graph(
        Profile.from_names(alphabet, "AABC"), Message.from_names(quota, "ABCD")
    )
    lhs = 2 * (4 - len(max_balanced_subset(graph)))
    rhs = (4 - 1) * 2
    ok = violations == 0 and lhs == rhs == 6
    criterion(
        6, "balanced-subset cardinality bound", ok,
        f"{violations} violations, {equalities} tight pairs, counterexample {lhs} = {rhs}",
    )


def test_criterion_7_proof_replay(grid, criterion):
    reports, _ = grid
    replays = sum(r.ineq2_failures for r in reports)
    failures = sum(r.witness_failure_total for r in reports)
    ok = failures == 0 and replays > 0
    criterion(
        7, "constructive witness for every relaxed-inequality failure", ok,
        f"{replays} constructions, {failures} failures",
    )


def _decompose_batch(seeds):
    out = []
    for seed in seeds:
        graph = random_balanced_graph(random.Random(seed))
        out.append([c.as_list() for c in decompose_cycles(graph)])
    return out


def _digest(batches):
    return hashlib.sha256(json.dumps(batches).encode()).hexdigest()


def test_criterion_8_decomposition(criterion):
    seeds = list(range(10_000))
    bad = 0
    for seed in seeds:
        graph = random_balanced_graph(random.Random(seed))
        cycles = decompose_cycles(graph)
        labels = sorted(lab for c in cycles for lab in c.edge_labels)
        if labels != sorted(graph.labels):
            bad += 1
            continue
        for cycle in cycles:
            edges = [graph.edge(lab) for lab in cycle.edge_labels]
            closed = all(a.head == b.tail for a, b in zip(edges, edges[1:] + edges[:1]))
            simple = len({e.tail for e in edges}) == len(edges)
            if not (closed and simple):
                bad += 1
        if not is_balanced(graph):
            bad += 1
    first = _digest(_decompose_batch(seeds))
    second = _digest(_decompose_batch(seeds))
    chunks = [seeds[i:i + 1000] for i in range(0, len(seeds), 1000)]
    with ProcessPoolExecutor(max_workers=3) as pool:
        parallel = _digest([c for batch in pool.map(_decompose_batch, chunks) for c in batch])
    ok = bad == 0 and first == second == parallel
    criterion(
        8, "decomposition partitions into simple cycles, deterministically", ok,
        f"{len(seeds)} graphs, {bad} defects, digest {first[:12]} (1 worker twice, 3 workers)",
    )
