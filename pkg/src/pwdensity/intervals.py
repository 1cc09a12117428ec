"""Intervals with endpoint-inclusion flags, and ordered partitions of a domain."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Interval:
    """A real interval with explicit endpoint inclusion.

    Singletons ([x, x]) must be closed on both sides.  Empty intervals are
    rejected at construction.
    """

    left: float
    right: float
    left_closed: bool = True
    right_closed: bool = True

    def __post_init__(self):
        if not (self.left <= self.right):
            raise ValueError(f"interval endpoints out of order: [{self.left}, {self.right}]")
        if self.left == self.right and not (self.left_closed and self.right_closed):
            raise ValueError("zero-length interval must be a closed singleton")

    @property
    def length(self) -> float:
        return self.right - self.left

    @property
    def is_singleton(self) -> bool:
        return self.left == self.right

    def contains(self, x: float) -> bool:
        if x < self.left or x > self.right:
            return False
        if x == self.left and not self.left_closed:
            return False
        if x == self.right and not self.right_closed:
            return False
        return True

    def __str__(self) -> str:
        lb = "[" if self.left_closed else "("
        rb = "]" if self.right_closed else ")"
        return f"{lb}{self.left}, {self.right}{rb}"


def closed(left: float, right: float) -> Interval:
    return Interval(left, right, True, True)


class IntervalPartition:
    """An ordered sequence of pairwise-disjoint intervals covering a domain.

    Adjacent pieces must abut exactly: consecutive pieces share an endpoint
    coordinate, with exactly one of the two touching sides closed (or the
    shared coordinate lies strictly between a closed singleton and an open
    neighbour).
    """

    def __init__(self, pieces: list[Interval], domain: Interval, validate: bool = True):
        self.pieces = list(pieces)
        self.domain = domain
        if validate:
            self._validate()

    def _validate(self):
        if not self.pieces:
            raise ValueError("partition must contain at least one piece")
        dom = self.domain
        first, last = self.pieces[0], self.pieces[-1]
        if first.left != dom.left or first.left_closed != dom.left_closed:
            raise ValueError("partition does not start at the domain's left endpoint")
        if last.right != dom.right or last.right_closed != dom.right_closed:
            raise ValueError("partition does not end at the domain's right endpoint")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if a.right != b.left:
                raise ValueError(f"gap or overlap between {a} and {b}")
            if a.right_closed == b.left_closed:
                raise ValueError(f"pieces {a} and {b} double-cover or miss {a.right}")

    def __len__(self) -> int:
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    def __getitem__(self, i):
        return self.pieces[i]

    def locate(self, x: float) -> int:
        """Index of the piece containing x; raises if x is outside the domain."""
        for i, p in enumerate(self.pieces):
            if p.contains(x):
                return i
        raise ValueError(f"{x} is not covered by the partition")
