"""Exhaustive audits over every (profile, message) pair of a quota mechanism.

One pass over a cell checks three things at once:

* theorem: no non-cyclic pair breaks the relaxed inequality, and every pair
  that does break it yields a valid witness by the constructive route;
* weak inequality: non-cyclic pairs that break ``mismatch <= deviation``;
* balanced-subset bound: ``2 * (K - |T_max|) <= (n - 1) * deviation``.

Profiles are split by their leading symbols into independent chunks. Chunks are
merged back in lexicographic order, so reports do not depend on the worker count.
"""

from __future__ import annotations

import os
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from math import comb
from typing import Any

from .core import (
    Alphabet,
    Message,
    Profile,
    Quota,
    check_inequality1,
    check_inequality2,
    count_signals,
    iter_message_tuples,
    message_count,
    mismatch_count,
    quota_deviation,
)
from .cyclicity import (
    CyclicityWitness,
    construct_witness_from_violation,
    extract_witness,
    is_cyclic,
    validate_witness,
)
from .errors import BudgetExceeded, Infeasible, BalancedBoundBroken
from .graph import Edge, ReportGraph, has_nonloop_cycle, max_balanced_subset

__all__ = [
    "DEFAULT_BUDGET",
    "DEFAULT_RECORD_CAP",
    "BUDGET_ENV",
    "ViolationRecord",
    "VerificationReport",
    "enumerate_quotas",
    "pair_count",
    "resolve_budget",
    "verify_theorem",
    "search_ineq1_violations",
    "check_lemma2_bound",
    "sweep",
    "make_record",
]

DEFAULT_BUDGET = 10**9
DEFAULT_RECORD_CAP = 1000
BUDGET_ENV = "QUOTACYCLES_BUDGET"

ALL_CHECKS = frozenset({"theorem", "ineq1", "lemma2"})


@dataclass(frozen=True)
class ViolationRecord:
    profile: Profile
    message: Message
    mismatch: int
    deviation: int
    ineq1_holds: bool
    ineq2_holds: bool
    cyclic: bool
    witness: CyclicityWitness | None = None
    t_max: int | None = None
    note: str = ""

    @property
    def k(self) -> int:
        return len(self.profile)

    def to_dict(self) -> dict[str, Any]:
        n = self.profile.alphabet.size
        out: dict[str, Any] = {
            "profile": list(self.profile.names),
            "message": list(self.message.names),
            "quota": list(self.message.quota.counts),
            "mismatch": self.mismatch,
            "deviation": self.deviation,
            "lhs_times_K": self.mismatch,
            "rhs1_times_K": self.deviation,
            "lhs_times_2K": 2 * self.mismatch,
            "rhs2_times_2K": (n - 1) * self.deviation,
            "ineq1_holds": self.ineq1_holds,
            "ineq2_holds": self.ineq2_holds,
            "cyclic": self.cyclic,
            "witness": self.witness.as_list() if self.witness else None,
        }
        if self.t_max is not None:
            out["t_max"] = self.t_max
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class VerificationReport:
    alphabet: Alphabet
    quota: Quota
    pairs_checked: int = 0
    theorem_violations: list[ViolationRecord] = field(default_factory=list)
    ineq1_violations: list[ViolationRecord] = field(default_factory=list)
    lemma2_violations: list[ViolationRecord] = field(default_factory=list)
    witness_failures: list[ViolationRecord] = field(default_factory=list)
    theorem_total: int = 0
    ineq1_total: int = 0
    lemma2_total: int = 0
    witness_failure_total: int = 0
    ineq2_failures: int = 0
    lemma2_equalities: int = 0
    checks: frozenset[str] = ALL_CHECKS
    error: str | None = None
    elapsed: float = 0.0

    @property
    def k(self) -> int:
        return self.quota.k_total

    @property
    def falsified(self) -> bool:
        return bool(self.theorem_total or self.lemma2_total or self.witness_failure_total)

    def summary(self) -> dict[str, Any]:
        return {
            "alphabet_size": self.alphabet.size,
            "k": self.k,
            "quota": list(self.quota.counts),
            "pairs_checked": self.pairs_checked,
            "ineq2_failures": self.ineq2_failures,
            "theorem_violations": self.theorem_total,
            "ineq1_violations": self.ineq1_total,
            "lemma2_violations": self.lemma2_total,
            "lemma2_equalities": self.lemma2_equalities,
            "witness_failures": self.witness_failure_total,
            "error": self.error,
        }

    def to_dict(self, *, timing: bool = False) -> dict[str, Any]:
        out = self.summary()
        out["alphabet"] = list(self.alphabet.names)
        out["records"] = {
            "theorem": [r.to_dict() for r in self.theorem_violations],
            "ineq1": [r.to_dict() for r in self.ineq1_violations],
            "lemma2": [r.to_dict() for r in self.lemma2_violations],
            "witness": [r.to_dict() for r in self.witness_failures],
        }
        if timing:
            out["elapsed"] = round(self.elapsed, 6)
        return out


def enumerate_quotas(alphabet: Alphabet, k_total: int) -> list[Quota]:
    """Every composition of ``k_total`` into ``|alphabet|`` positive parts, lexicographic."""
    n = alphabet.size
    if k_total < n:
        raise Infeasible(f"K={k_total} is smaller than the alphabet size {n}")

    def parts(total: int, slots: int) -> Iterable[tuple[int, ...]]:
        if slots == 1:
            yield (total,)
            return
        for first in range(1, total - slots + 2):
            for rest in parts(total - first, slots - 1):
                yield (first, *rest)

    quotas = [Quota(alphabet, c) for c in parts(k_total, n)]
    assert len(quotas) == comb(k_total - 1, n - 1)
    return quotas


def pair_count(quota: Quota) -> int:
    return quota.alphabet.size ** quota.k_total * message_count(quota)


def resolve_budget(budget: int | None) -> int:
    if budget is not None:
        return budget
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else DEFAULT_BUDGET


def make_record(
    profile: Profile,
    message: Message,
    *,
    t_max: int | None = None,
    witness: CyclicityWitness | None = None,
    note: str = "",
) -> ViolationRecord:
    """Recompute every compared quantity of a pair from scratch."""
    cyclic = is_cyclic(profile, message)
    if witness is None and cyclic:
        witness = extract_witness(profile, message)
    return ViolationRecord(
        profile=profile,
        message=message,
        mismatch=mismatch_count(profile, message),
        deviation=quota_deviation(count_signals(profile), message.quota),
        ineq1_holds=check_inequality1(profile, message),
        ineq2_holds=check_inequality2(profile, message),
        cyclic=cyclic,
        witness=witness,
        t_max=t_max,
        note=note,
    )


# --- the scanning kernel -----------------------------------------------------


def _pair_facts(n: int, key: tuple[int, ...]) -> tuple[int, bool, int]:
    """(mismatch, cyclic, number of non-loop edges in a maximum balanced subset).

    ``key`` is the sorted multiset of edge codes ``tail * n + head``; every pair
    with the same key has the same report graph up to relabelling of tasks.
    """
    edges = tuple(Edge(k, *divmod(code, n)) for k, code in enumerate(key, start=1))
    graph = ReportGraph(n, edges)
    loops = sum(e.is_loop for e in edges)
    t_max = len(max_balanced_subset(graph))
    return len(edges) - loops, has_nonloop_cycle(graph), t_max - loops


@dataclass
class _Chunk:
    pairs: int = 0
    ineq2_failures: int = 0
    lemma2_equalities: int = 0
    totals: dict[str, int] = field(default_factory=lambda: dict.fromkeys(_LISTS, 0))
    records: dict[str, list[ViolationRecord]] = field(
        default_factory=lambda: {name: [] for name in _LISTS}
    )


_LISTS = ("theorem", "ineq1", "lemma2", "witness")


def _scan_chunk(args: tuple[Quota, tuple[int, ...], frozenset[str], int]) -> _Chunk:
    quota, prefix, checks, cap = args
    alphabet = quota.alphabet
    n, k = alphabet.size, quota.k_total
    b = quota.counts
    messages = list(iter_message_tuples(b))
    facts: dict[tuple[int, ...], tuple[int, bool, int]] = {}
    want_theorem = "theorem" in checks
    want_ineq1 = "ineq1" in checks
    want_lemma2 = "lemma2" in checks
    chunk = _Chunk()
    totals, records = chunk.totals, chunk.records

    def note(kind: str, make: Any) -> None:
        totals[kind] += 1
        if len(records[kind]) < cap:
            records[kind].append(make())

    for tail in product(range(n), repeat=k - len(prefix)):
        p = prefix + tail
        tally = [0] * n
        for s in p:
            tally[s] += 1
        deviation = sum(abs(x - y) for x, y in zip(tally, b))
        rhs1 = deviation
        rhs2 = (n - 1) * deviation
        base = [s * n for s in p]
        profile = Profile(alphabet, p)
        for m in messages:
            key = tuple(sorted(map(int.__add__, base, m)))
            f = facts.get(key)
            if f is None:
                f = facts[key] = _pair_facts(n, key)
            mismatch, cyclic, t_nonloop = f
            fails2 = 2 * mismatch > rhs2
            if fails2:
                chunk.ineq2_failures += 1
            if want_theorem and fails2:
                message = Message(quota, m)
                if not cyclic:
                    note("theorem", lambda: make_record(profile, message))
                try:
                    w = construct_witness_from_violation(profile, message)
                    ok = validate_witness(profile, message, w)
                    reason = "" if ok else "constructed witness fails validation"
                except BalancedBoundBroken as exc:
                    w, ok, reason = None, False, str(exc)
                if not ok:
                    note("witness", lambda: make_record(profile, message, witness=w, note=reason))
            if want_ineq1 and not cyclic and mismatch > rhs1:
                note("ineq1", lambda: make_record(profile, Message(quota, m)))
            if want_lemma2:
                # loops (k - mismatch of them) always belong to T_max
                lhs = 2 * (mismatch - t_nonloop)
                if lhs > rhs2:
                    t_max = k - mismatch + t_nonloop
                    note("lemma2", lambda: make_record(profile, Message(quota, m), t_max=t_max))
                elif lhs == rhs2:
                    chunk.lemma2_equalities += 1
        chunk.pairs += len(messages)
    return chunk


def _prefixes(n: int, k: int) -> list[tuple[int, ...]]:
    depth = min(k, 2)
    return [tuple(p) for p in product(range(n), repeat=depth)]


def _audit(
    alphabet: Alphabet,
    quota: Quota,
    *,
    checks: frozenset[str] = ALL_CHECKS,
    budget: int | None = None,
    workers: int = 1,
    cap: int = DEFAULT_RECORD_CAP,
) -> VerificationReport:
    if quota.alphabet != alphabet:
        raise ValueError("quota belongs to a different alphabet")
    limit = resolve_budget(budget)
    pairs = pair_count(quota)
    if pairs > limit:
        raise BudgetExceeded(pairs, limit)

    started = time.perf_counter()
    jobs = [(quota, prefix, checks, cap) for prefix in _prefixes(alphabet.size, quota.k_total)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_scan_chunk, jobs))
    else:
        chunks = [_scan_chunk(job) for job in jobs]

    report = VerificationReport(alphabet, quota, checks=checks)
    merged: dict[str, list[ViolationRecord]] = {name: [] for name in _LISTS}
    totals = dict.fromkeys(_LISTS, 0)
    for chunk in chunks:  # jobs are in lexicographic prefix order
        report.pairs_checked += chunk.pairs
        report.ineq2_failures += chunk.ineq2_failures
        report.lemma2_equalities += chunk.lemma2_equalities
        for name in _LISTS:
            totals[name] += chunk.totals[name]
            merged[name].extend(chunk.records[name])
    report.theorem_violations = merged["theorem"][:cap]
    report.ineq1_violations = merged["ineq1"][:cap]
    report.lemma2_violations = merged["lemma2"][:cap]
    report.witness_failures = merged["witness"][:cap]
    report.theorem_total = totals["theorem"]
    report.ineq1_total = totals["ineq1"]
    report.lemma2_total = totals["lemma2"]
    report.witness_failure_total = totals["witness"]
    report.elapsed = time.perf_counter() - started
    assert report.pairs_checked == pairs
    return report


def verify_theorem(
    alphabet: Alphabet,
    quota: Quota,
    *,
    budget: int | None = None,
    workers: int = 1,
    cap: int = DEFAULT_RECORD_CAP,
) -> VerificationReport:
    """Full audit of one quota: all three checks in a single pass."""
    return _audit(alphabet, quota, budget=budget, workers=workers, cap=cap)


def search_ineq1_violations(
    alphabet: Alphabet,
    quota: Quota,
    *,
    budget: int | None = None,
    workers: int = 1,
    cap: int = DEFAULT_RECORD_CAP,
) -> list[ViolationRecord]:
    report = _audit(
        alphabet, quota, checks=frozenset({"ineq1"}), budget=budget, workers=workers, cap=cap
    )
    return report.ineq1_violations


def check_lemma2_bound(
    alphabet: Alphabet,
    quota: Quota,
    *,
    budget: int | None = None,
    workers: int = 1,
    cap: int = DEFAULT_RECORD_CAP,
) -> list[ViolationRecord]:
    report = _audit(
        alphabet, quota, checks=frozenset({"lemma2"}), budget=budget, workers=workers, cap=cap
    )
    return report.lemma2_violations


def sweep(
    grid: Sequence[tuple[int, int]],
    *,
    budget: int | None = None,
    workers: int = 1,
    cap: int = DEFAULT_RECORD_CAP,
) -> list[VerificationReport]:
    """Audit every quota of every ``(alphabet size, K)`` cell.

    A quota over budget yields a report with ``error`` set and the sweep moves on.
    """
    reports = []
    for n, k in grid:
        alphabet = Alphabet.of_size(n)
        for quota in enumerate_quotas(alphabet, k):
            try:
                reports.append(
                    verify_theorem(alphabet, quota, budget=budget, workers=workers, cap=cap)
                )
            except BudgetExceeded as exc:
                reports.append(VerificationReport(alphabet, quota, error=str(exc)))
    return reports
