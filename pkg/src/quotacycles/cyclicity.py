"""Cyclic reports: the definitional checker, the graph-based checker, and witnesses.

A report ``m`` is cyclic at profile ``p`` when there are at least two tasks,
with pairwise distinct true signals, ordered so that every task's report is the
next task's true signal (wrapping around). A witness is that ordering, written
as 1-based task labels.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

from .core import Message, Profile, check_inequality2
from .errors import BalancedBoundBroken, LengthMismatch, PreconditionViolated, TooLarge
from .graph import (
    Edge,
    ReportGraph,
    build_report_graph,
    decompose_cycles,
    find_simple_cycle,
    has_nonloop_cycle,
    max_balanced_subset,
)

__all__ = [
    "CyclicityWitness",
    "validate_witness",
    "is_cyclic_definition",
    "is_cyclic",
    "extract_witness",
    "construct_witness_from_violation",
    "DEFINITION_LIMIT",
]

log = logging.getLogger(__name__)

DEFINITION_LIMIT = 8


@dataclass(frozen=True)
class CyclicityWitness:
    tau: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", tuple(self.tau))

    def __len__(self) -> int:
        return len(self.tau)

    @property
    def s_set(self) -> frozenset[int]:
        return frozenset(self.tau)

    def canonical(self) -> CyclicityWitness:
        """The rotation that starts at the smallest label."""
        if not self.tau:
            return self
        i = self.tau.index(min(self.tau))
        return CyclicityWitness(self.tau[i:] + self.tau[:i])

    def as_list(self) -> list[int]:
        return list(self.tau)


def validate_witness(
    profile: Profile, message: Message | Profile, witness: CyclicityWitness | Sequence[int]
) -> bool:
    tau = witness.tau if isinstance(witness, CyclicityWitness) else tuple(witness)
    k = len(profile)
    if len(message) != k:
        log.debug("witness rejected: profile and message lengths differ")
        return False
    if len(tau) < 2:
        log.debug("witness rejected: needs at least two tasks, got %d", len(tau))
        return False
    if len(set(tau)) != len(tau):
        log.debug("witness rejected: repeated labels in %s", tau)
        return False
    if any(not isinstance(t, int) or not 1 <= t <= k for t in tau):
        log.debug("witness rejected: labels %s outside 1..%d", tau, k)
        return False
    signals = [profile[t - 1] for t in tau]
    if len(set(signals)) != len(signals):
        log.debug("witness rejected: true signals %s are not distinct", signals)
        return False
    for pos, t in enumerate(tau):
        nxt = tau[(pos + 1) % len(tau)]
        if message[t - 1] != profile[nxt - 1]:
            log.debug("witness rejected: report of task %d differs from signal of task %d", t, nxt)
            return False
    return True


def is_cyclic_definition(
    profile: Profile, message: Message | Profile, limit: int = DEFINITION_LIMIT
) -> CyclicityWitness | None:
    """Search label sequences directly against the definition.

    Sequences are visited depth-first in lexicographic order. A prefix is
    abandoned as soon as it repeats a true signal or breaks the report chain,
    since no extension could repair either.
    """
    k = len(profile)
    if len(message) != k:
        raise LengthMismatch(f"lengths differ: {k} vs {len(message)}")
    if k > limit:
        raise TooLarge(f"K={k} exceeds the exhaustive bound of {limit}")
    p, m = profile.entries, message.entries

    def extend(seq: list[int], seen: set[int]) -> list[int] | None:
        last = seq[-1]
        if len(seq) >= 2 and m[last] == p[seq[0]]:
            return seq
        for nxt in range(k):
            if nxt in seq or p[nxt] in seen or m[last] != p[nxt]:
                continue
            seq.append(nxt)
            seen.add(p[nxt])
            found = extend(seq, seen)
            if found is not None:
                return found
            seq.pop()
            seen.discard(p[nxt])
        return None

    for first in range(k):
        found = extend([first], {p[first]})
        if found is not None:
            return CyclicityWitness(tuple(i + 1 for i in found))
    return None


def is_cyclic(profile: Profile, message: Message | Profile) -> bool:
    return has_nonloop_cycle(build_report_graph(profile, message))


def extract_witness(profile: Profile, message: Message | Profile) -> CyclicityWitness | None:
    cycle = find_simple_cycle(build_report_graph(profile, message))
    if cycle is None:
        return None
    return CyclicityWitness(cycle.edge_labels)


def construct_witness_from_violation(profile: Profile, message: Message) -> CyclicityWitness:
    """Build a witness for a pair that breaks the relaxed inequality.

    Steps: take a maximum balanced task set ``T`` with its bijection ``pi``;
    pick the smallest ``j`` in ``T`` whose report differs from its signal;
    split the ``T``-edges (task ``k`` goes from its signal to the signal of
    ``pi[k]``) into simple cycles; walk the cycle holding ``j`` from ``j``.
    """
    if check_inequality2(profile, message):
        raise PreconditionViolated("the relaxed inequality holds for this pair")
    graph = build_report_graph(profile, message)
    match = max_balanced_subset(graph)
    p = profile.entries
    j = next((k for k in match.t_set if p[match.pi[k] - 1] != p[k - 1]), None)
    if j is None:
        raise BalancedBoundBroken(
            f"no mismatched task in maximum balanced set {match.t_set} for "
            f"profile {profile.names} and message {message.names}"
        )
    restricted = ReportGraph._trusted(
        graph.n_vertices,
        tuple(Edge(k, p[k - 1], p[match.pi[k] - 1]) for k in match.t_set),
        graph.vertex_names,
    )
    cycle = next(c for c in decompose_cycles(restricted) if j in c.edge_labels)
    tail_of = {k: p[k - 1] for k in cycle.edge_labels}
    by_tail = {tail_of[k]: k for k in cycle.edge_labels}
    tau = [j]
    while len(tau) < len(cycle):
        tau.append(by_tail[p[match.pi[tau[-1]] - 1]])
    return CyclicityWitness(tuple(tau))
