"""Graded descriptions of Hilbert spaces and finitely supported vectors.

A space is a finite tree built from three node kinds:

- ``Finite(dim)``      -- C^dim with its standard basis
- ``SequenceOf(inner)``-- l^2(inner) = inner (+) inner (+) ...
- ``Sum(parts)``       -- an ordered orthogonal direct sum

A basis vector is addressed by a tuple of ints read against the tree: the part
number at a ``Sum`` node, the copy number at a ``SequenceOf`` node and the
coordinate at a ``Finite`` leaf.  Tuples compare lexicographically, which is the
ordering used for every dense window.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Union

Index = tuple[int, ...]


class SpaceMismatch(ValueError):
    """Raised when an operator or vector is used on the wrong space."""


@dataclass(frozen=True)
class Finite:
    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ValueError(f"Finite dimension must be a positive int, got {self.dim!r}")

    def __str__(self):
        return f"C^{self.dim}"


@dataclass(frozen=True)
class SequenceOf:
    inner: "Space"

    def __str__(self):
        return f"l2({self.inner})"


@dataclass(frozen=True)
class Sum:
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if len(parts) < 2:
            raise ValueError("a Sum needs at least two parts")
        object.__setattr__(self, "parts", parts)

    def __str__(self):
        return " (+) ".join(f"[{p}]" if isinstance(p, Sum) else str(p) for p in self.parts)


Space = Union[Finite, SequenceOf, Sum]


def direct_sum(*parts: Space) -> Sum:
    return Sum(tuple(parts))


@lru_cache(maxsize=None)
def window(space: Space, depth: int) -> tuple[Index, ...]:
    """All basis indices whose copy numbers are ``< depth``, in lexicographic order."""
    if isinstance(space, Finite):
        return tuple((j,) for j in range(space.dim))
    if isinstance(space, SequenceOf):
        inner = window(space.inner, depth)
        return tuple((n,) + rest for n in range(depth) for rest in inner)
    return tuple(
        (k,) + rest for k, part in enumerate(space.parts) for rest in window(part, depth)
    )


def contains(space: Space, idx: Index) -> bool:
    node = space
    for pos, step in enumerate(idx):
        if not isinstance(step, int) or step < 0:
            return False
        if isinstance(node, Finite):
            return step < node.dim and pos == len(idx) - 1
        if isinstance(node, SequenceOf):
            node = node.inner
        else:
            if step >= len(node.parts):
                return False
            node = node.parts[step]
    return False


def has_sequence(space: Space) -> bool:
    if isinstance(space, Finite):
        return False
    if isinstance(space, SequenceOf):
        return True
    return any(has_sequence(p) for p in space.parts)


def max_copy(idx: Index, space: Space) -> int:
    """Largest copy number appearing in ``idx`` (``-1`` when there is none)."""
    node, best = space, -1
    for step in idx:
        if isinstance(node, SequenceOf):
            best = max(best, step)
            node = node.inner
        elif isinstance(node, Sum):
            node = node.parts[step]
    return best


def _drop_zeros(entries: dict) -> dict:
    return {k: v for k, v in entries.items() if v != 0}


class FinVec:
    """A finitely supported vector: a sparse map from basis index to complex."""

    __slots__ = ("space", "entries")

    def __init__(self, space: Space, entries: dict | None = None):
        self.space = space
        self.entries = _drop_zeros({k: complex(v) for k, v in (entries or {}).items()})

    @classmethod
    def basis(cls, space: Space, idx: Index) -> "FinVec":
        idx = tuple(idx)
        if not contains(space, idx):
            raise SpaceMismatch(f"index {idx} is not a basis index of {space}")
        return cls(space, {idx: 1.0})

    @classmethod
    def from_items(cls, space: Space, items: Iterable[tuple[Index, complex]]) -> "FinVec":
        entries: dict = {}
        for k, v in items:
            k = tuple(k)
            if not contains(space, k):
                raise SpaceMismatch(f"index {k} is not a basis index of {space}")
            entries[k] = entries.get(k, 0) + v
        return cls(space, entries)

    def __iter__(self) -> Iterator[tuple[Index, complex]]:
        return iter(sorted(self.entries.items()))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, idx: Index) -> complex:
        return self.entries.get(tuple(idx), 0j)

    def _check(self, other: "FinVec"):
        if other.space != self.space:
            raise SpaceMismatch(f"{self.space} vs {other.space}")

    def __add__(self, other: "FinVec") -> "FinVec":
        self._check(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return FinVec(self.space, out)

    def __sub__(self, other: "FinVec") -> "FinVec":
        return self + (-1.0) * other

    def __rmul__(self, a: complex) -> "FinVec":
        return FinVec(self.space, {k: a * v for k, v in self.entries.items()})

    def __neg__(self):
        return (-1.0) * self

    def __eq__(self, other):
        return isinstance(other, FinVec) and self.space == other.space and self.entries == other.entries

    def inner(self, other: "FinVec") -> complex:
        """<self, other>, linear in the first slot."""
        self._check(other)
        small, big = (self.entries, other.entries)
        return sum(v * big.get(k, 0).conjugate() for k, v in small.items())

    def norm(self) -> float:
        return sum(abs(v) ** 2 for v in self.entries.values()) ** 0.5

    def __repr__(self):
        body = ", ".join(f"{k}: {v:g}" for k, v in self)
        return f"FinVec({self.space}, {{{body}}})"
