"""Alphabets, quotas, profiles and messages, plus exact evaluation of both inequalities.

Symbols are dense integer indices ``0..n-1`` with display names attached by the
``Alphabet``. Both inequalities are compared after clearing denominators, so the
whole module works in integers:

* weak form:    ``mismatch <= deviation``
* relaxed form: ``2 * mismatch <= (n - 1) * deviation``

where ``mismatch`` counts tasks reported differently from their signal and
``deviation`` is ``sum_w |n(w) - B(w)|``.
"""

from __future__ import annotations

import string
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from math import factorial, prod

from .errors import (
    InvalidAlphabet,
    InvalidSymbol,
    LengthMismatch,
    MessageNotInM,
    NonPositiveCount,
    SizeMismatch,
)

__all__ = [
    "Alphabet",
    "Quota",
    "Profile",
    "Message",
    "SignalCounts",
    "validate_quota",
    "enumerate_messages",
    "iter_message_tuples",
    "message_count",
    "count_signals",
    "mismatch_count",
    "quota_deviation",
    "check_inequality1",
    "check_inequality2",
]


def _default_name(i: int) -> str:
    letters = string.ascii_uppercase
    if i < len(letters):
        return letters[i]
    return f"S{i}"


@dataclass(frozen=True)
class Alphabet:
    """An ordered set of at least two distinct signal names."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) < 2:
            raise InvalidAlphabet(f"alphabet needs at least 2 symbols, got {len(names)}")
        if len(set(names)) != len(names):
            raise InvalidAlphabet(f"duplicate symbols in {names!r}")
        for name in names:
            if not name or "," in name:
                raise InvalidAlphabet(f"invalid symbol name {name!r}")

    @classmethod
    def of_size(cls, n: int) -> Alphabet:
        return cls(tuple(_default_name(i) for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidSymbol(f"{name!r} is not in alphabet {self.names!r}") from None

    def encode(self, names: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.index(name) for name in names)

    def decode(self, indices: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.names[i] for i in indices)


@dataclass(frozen=True)
class Quota:
    """Positive per-symbol counts ``B``; ``k_total`` is their sum."""

    alphabet: Alphabet
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(self.counts)
        object.__setattr__(self, "counts", counts)
        if len(counts) != self.alphabet.size:
            raise SizeMismatch(
                f"quota has {len(counts)} entries for an alphabet of size {self.alphabet.size}"
            )
        for name, c in zip(self.alphabet.names, counts):
            if not isinstance(c, int) or isinstance(c, bool):
                raise NonPositiveCount(f"quota for {name!r} must be an integer, got {c!r}")
            if c < 1:
                raise NonPositiveCount(f"quota for {name!r} is {c}; every count must be >= 1")

    @property
    def k_total(self) -> int:
        return sum(self.counts)

    def __getitem__(self, name: str) -> int:
        return self.counts[self.alphabet.index(name)]


def validate_quota(alphabet: Alphabet, raw_counts: Sequence[int]) -> Quota:
    return Quota(alphabet, tuple(raw_counts))


def _check_entries(alphabet: Alphabet, entries: tuple[int, ...]) -> None:
    n = alphabet.size
    for e in entries:
        if not isinstance(e, int) or not 0 <= e < n:
            raise InvalidSymbol(f"symbol index {e!r} outside alphabet of size {n}")


@dataclass(frozen=True)
class Profile:
    """A vector of true signals. Any vector over the alphabet is allowed."""

    alphabet: Alphabet
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        _check_entries(self.alphabet, self.entries)

    @classmethod
    def from_names(cls, alphabet: Alphabet, names: Sequence[str]) -> Profile:
        return cls(alphabet, alphabet.encode(names))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, k: int) -> int:
        return self.entries[k]

    @property
    def names(self) -> tuple[str, ...]:
        return self.alphabet.decode(self.entries)


@dataclass(frozen=True)
class Message:
    """A reported vector whose signal counts match the quota exactly."""

    quota: Quota
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        _check_entries(self.quota.alphabet, entries)
        if len(entries) != self.quota.k_total:
            raise MessageNotInM(
                f"message has length {len(entries)}, quota requires K={self.quota.k_total}"
            )
        tallies = _tally(entries, self.quota.alphabet.size)
        if tallies != self.quota.counts:
            raise MessageNotInM(
                f"message counts {tallies} differ from quota {self.quota.counts}"
            )

    @classmethod
    def from_names(cls, quota: Quota, names: Sequence[str]) -> Message:
        return cls(quota, quota.alphabet.encode(names))

    @property
    def alphabet(self) -> Alphabet:
        return self.quota.alphabet

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, k: int) -> int:
        return self.entries[k]

    @property
    def names(self) -> tuple[str, ...]:
        return self.alphabet.decode(self.entries)


@dataclass(frozen=True)
class SignalCounts:
    alphabet: Alphabet
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __getitem__(self, name: str) -> int:
        return self.counts[self.alphabet.index(name)]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.alphabet.names, self.counts))


def _tally(entries: Sequence[int], n: int) -> tuple[int, ...]:
    out = [0] * n
    for e in entries:
        out[e] += 1
    return tuple(out)


def iter_message_tuples(counts: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Yield every arrangement of the multiset ``{i: counts[i]}`` in lexicographic order."""
    remaining = list(counts)
    k = sum(remaining)
    n = len(remaining)
    buf = [0] * k

    def fill(pos: int) -> Iterator[tuple[int, ...]]:
        if pos == k:
            yield tuple(buf)
            return
        for s in range(n):
            if remaining[s]:
                remaining[s] -= 1
                buf[pos] = s
                yield from fill(pos + 1)
                remaining[s] += 1

    return fill(0)


def message_count(quota: Quota) -> int:
    """``K! / prod_w B(w)!``, the size of the message space."""
    return factorial(quota.k_total) // prod(factorial(c) for c in quota.counts)


def enumerate_messages(quota: Quota) -> list[Message]:
    return [Message(quota, t) for t in iter_message_tuples(quota.counts)]


def count_signals(profile: Profile) -> SignalCounts:
    return SignalCounts(profile.alphabet, _tally(profile.entries, profile.alphabet.size))


def mismatch_count(profile: Profile | Message, message: Profile | Message) -> int:
    if len(profile) != len(message):
        raise LengthMismatch(f"lengths differ: {len(profile)} vs {len(message)}")
    return sum(a != b for a, b in zip(profile.entries, message.entries))


def quota_deviation(counts: SignalCounts, quota: Quota) -> int:
    if counts.alphabet != quota.alphabet:
        raise SizeMismatch("signal counts and quota use different alphabets")
    return sum(abs(n - b) for n, b in zip(counts.counts, quota.counts))


def _sides(profile: Profile, message: Message) -> tuple[int, int]:
    if len(profile) != message.quota.k_total:
        raise LengthMismatch(
            f"profile has length {len(profile)}, quota requires K={message.quota.k_total}"
        )
    return (
        mismatch_count(profile, message),
        quota_deviation(count_signals(profile), message.quota),
    )


def check_inequality1(profile: Profile, message: Message) -> bool:
    """``mismatch/K <= deviation/K``, compared as integers."""
    mismatch, deviation = _sides(profile, message)
    return mismatch <= deviation


def check_inequality2(profile: Profile, message: Message) -> bool:
    """``mismatch/K <= (n-1)/2 * deviation/K``, compared after multiplying by ``2K``."""
    mismatch, deviation = _sides(profile, message)
    return 2 * mismatch <= (profile.alphabet.size - 1) * deviation
