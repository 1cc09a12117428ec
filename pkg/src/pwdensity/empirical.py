"""Empirical distributions: sample ingestion, initial partitions, flattenings, A1-errors."""

from __future__ import annotations

import numpy as np

from ._kernels import sorted_unique_stats
from .intervals import Interval, IntervalPartition


class EmpiricalDistribution:
    """Sorted samples with uniform weight 1/n on a closed domain [a, b].

    Treat instances as immutable: every operation in this package reads but
    never mutates the sample arrays, so a single instance can be shared
    across threads.
    """

    def __init__(self, samples: np.ndarray, domain: Interval):
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("need a one-dimensional, nonempty sample array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if not (domain.left_closed and domain.right_closed):
            raise ValueError("domain must be a closed interval")
        if samples[0] < domain.left or samples[-1] > domain.right:
            raise ValueError("sample outside the domain")
        self.samples = samples
        self.n = samples.size
        self.domain = domain
        # Unique positions with multiplicities (one linear pass on sorted
        # input); duplicates collapse into one atom so partition pieces stay
        # disjoint.  cum_counts[i] = number of samples before unique[i].
        self.unique, self.cum_counts, m = sorted_unique_stats(samples)
        if m < 0:
            raise ValueError("samples must be sorted (use build_empirical)")
        self.counts = np.diff(self.cum_counts)
        self.cum_mass = self.cum_counts / self.n

    def count_le(self, x: float) -> int:
        """Number of samples with position <= x."""
        return int(np.searchsorted(self.samples, x, side="right"))

    def count_lt(self, x: float) -> int:
        """Number of samples with position < x."""
        return int(np.searchsorted(self.samples, x, side="left"))

    def count_in(self, J: Interval) -> int:
        lo = self.count_le(J.left) if not J.left_closed else self.count_lt(J.left)
        hi = self.count_le(J.right) if J.right_closed else self.count_lt(J.right)
        return hi - lo

    def mass(self, J: Interval) -> float:
        """Empirical probability mass of J, respecting endpoint inclusion.

        Computed as a difference of the prefix-mass table so that every code
        path (including the batched merging kernels) produces bit-identical
        values.
        """
        lo = np.searchsorted(self.unique, J.left, side="left" if J.left_closed else "right")
        hi = np.searchsorted(self.unique, J.right, side="right" if J.right_closed else "left")
        return float(self.cum_mass[hi] - self.cum_mass[lo])


def build_empirical(samples, domain: Interval | tuple[float, float] | None = None) -> EmpiricalDistribution:
    """Sort samples and wrap them as an empirical distribution.

    When ``domain`` is omitted it defaults to [min(samples), max(samples)];
    densities over the whole real line lose only the tail mass beyond the
    observed range, which shrinks like 1/n.  Already-sorted float64 input is
    used as-is (not copied); treat it as frozen afterwards.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise ValueError("empty sample set")
    if samples.size > 1 and np.any(samples[1:] < samples[:-1]):
        samples = np.sort(samples)
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples must be finite (NaN/Inf rejected)")
    if domain is None:
        dom = Interval(float(samples[0]), float(samples[-1]))
    elif isinstance(domain, Interval):
        dom = domain
    else:
        dom = Interval(float(domain[0]), float(domain[1]))
    return EmpiricalDistribution(samples, dom)


def read_samples(path) -> np.ndarray:
    """Read one decimal per line; NaN/Inf (and non-numbers) are rejected."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                x = float(line)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a decimal number: {line!r}") from None
            if not np.isfinite(x):
                raise ValueError(f"{path}:{lineno}: NaN/Inf rejected")
            values.append(x)
    if not values:
        raise ValueError(f"{path}: no samples")
    return np.asarray(values, dtype=np.float64)


def initial_partition(emp: EmpiricalDistribution) -> IntervalPartition:
    """The finest partition: open gaps between consecutive samples, closed singletons at them.

    With distinct interior samples this has exactly 2n + 1 pieces.  Duplicate
    sample values collapse into a single singleton, and a sample sitting on a
    domain endpoint drops the empty boundary gap.
    """
    a, b = emp.domain.left, emp.domain.right
    u = emp.unique
    pieces: list[Interval] = []
    if a == b:
        return IntervalPartition([Interval(a, a)], emp.domain)
    if u[0] > a:
        pieces.append(Interval(a, float(u[0]), True, False))
    for i, x in enumerate(u):
        x = float(x)
        pieces.append(Interval(x, x))
        right = float(u[i + 1]) if i + 1 < u.size else b
        if right > x:
            closes_domain = i + 1 == u.size
            pieces.append(Interval(x, right, False, closes_domain))
    return IntervalPartition(pieces, emp.domain)


def flatten(emp: EmpiricalDistribution, J: Interval) -> float:
    """Constant with the same total mass as the empirical distribution on J.

    For a singleton J the atom's mass itself is returned, since a
    zero-length piece carries mass but no density.
    """
    m = emp.mass(J)
    if J.is_singleton:
        return m
    return m / J.length


def _cumulative_values(emp: EmpiricalDistribution, J: Interval) -> np.ndarray:
    """F(x) = (mass of J up to and including x) - (flattened mass up to x).

    Evaluated at J's endpoints and each sample in J.  F carries each atom
    with its position, so differences of F are masses of half-open
    cells (u, v] aligned with the sample partition.
    """
    if J.is_singleton:
        return np.zeros(1)
    lo = np.searchsorted(emp.unique, J.left, side="left" if J.left_closed else "right")
    hi = np.searchsorted(emp.unique, J.right, side="right" if J.right_closed else "left")
    # Same arithmetic as the batched merging kernel, so both agree bit for bit.
    mass = emp.cum_mass[hi] - emp.cum_mass[lo]
    rho = mass / J.length
    u = emp.unique[lo:hi]
    inner = (emp.cum_mass[lo + 1 : hi + 1] - emp.cum_mass[lo]) - rho * (u - J.left)
    return np.concatenate(([0.0], inner, [mass - rho * J.length]))


def a1_error(emp: EmpiricalDistribution, J: Interval) -> float:
    """A1-distance between the empirical distribution on J and its flattening.

    Computed as max - min of the cumulative discrepancy F over J's endpoints
    and the samples in J; runs in time linear in the samples inside J.
    """
    vals = _cumulative_values(emp, J)
    return float(np.max(vals) - np.min(vals))
