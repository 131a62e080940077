"""Momentum lattice 2πZ³, its shells, and the fixed-order summation engine.

Momenta are stored as integer vectors n with p = 2πn, so every shell identity
and every degeneracy is an exact integer statement. Energies are formed from
p² = (2π)²·|n|² only at the point of use.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import InvalidArgumentError, NumericError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
TWO_PI_SQ = TWO_PI * TWO_PI

# Shells up to this norm carry their member vectors by default.
DEFAULT_REPRESENTATIVE_CAP = 64


@dataclass(frozen=True, order=True)
class LatticeVector:
    """Integer vector n labelling the momentum p = 2πn."""

    n: Tuple[int, int, int]

    def __post_init__(self):
        if len(self.n) != 3:
            raise InvalidArgumentError(f"lattice vectors have 3 components, got {self.n!r}")
        object.__setattr__(self, 'n', tuple(int(c) for c in self.n))

    @classmethod
    def of(cls, *components: int) -> 'LatticeVector':
        if len(components) == 1 and isinstance(components[0], (tuple, list)):
            components = tuple(components[0])
        return cls(tuple(components))

    @property
    def norm_sq_int(self) -> int:
        return self.n[0] * self.n[0] + self.n[1] * self.n[1] + self.n[2] * self.n[2]

    @property
    def p_squared(self) -> float:
        return TWO_PI_SQ * self.norm_sq_int

    @property
    def p_abs(self) -> float:
        return TWO_PI * math.sqrt(self.norm_sq_int)

    @property
    def is_zero(self) -> bool:
        return self.n == (0, 0, 0)

    def __neg__(self) -> 'LatticeVector':
        return LatticeVector((-self.n[0], -self.n[1], -self.n[2]))

    def __add__(self, other: 'LatticeVector') -> 'LatticeVector':
        return LatticeVector((self.n[0] + other.n[0], self.n[1] + other.n[1], self.n[2] + other.n[2]))

    def __sub__(self, other: 'LatticeVector') -> 'LatticeVector':
        return self + (-other)

    def __str__(self) -> str:
        return f"({self.n[0]},{self.n[1]},{self.n[2]})"


ZERO = LatticeVector((0, 0, 0))


@dataclass(frozen=True)
class Shell:
    """All nonzero lattice vectors sharing the integer norm |n|²."""

    norm_sq_int: int
    degeneracy: int
    representatives: Tuple[LatticeVector, ...] = field(default=(), compare=False, repr=False)

    @property
    def p_squared(self) -> float:
        return TWO_PI_SQ * self.norm_sq_int

    @property
    def p_abs(self) -> float:
        return TWO_PI * math.sqrt(self.norm_sq_int)


@dataclass(frozen=True)
class ShellTable:
    """Complete list of shells 1..n_max in ascending norm."""

    n_max: int
    shells: Tuple[Shell, ...]

    def __iter__(self) -> Iterator[Shell]:
        return iter(self.shells)

    def __len__(self) -> int:
        return len(self.shells)

    def shell(self, norm_sq_int: int) -> Shell:
        if not 1 <= norm_sq_int <= self.n_max:
            raise InvalidArgumentError(f"shell {norm_sq_int} outside table 1..{self.n_max}")
        return self.shells[norm_sq_int - 1]

    def occupied(self) -> List[Shell]:
        """Shells with at least one lattice vector."""
        return [s for s in self.shells if s.degeneracy > 0]

    def truncated(self, n_max: int) -> 'ShellTable':
        if n_max > self.n_max:
            raise InvalidArgumentError(f"cannot extend table from {self.n_max} to {n_max}")
        return ShellTable(n_max=n_max, shells=self.shells[:n_max])

    def to_rows(self) -> List[Tuple[int, int]]:
        return [(s.norm_sq_int, s.degeneracy) for s in self.shells]


def _convolve_truncated(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integer convolution of two count arrays, truncated to len(a)."""
    length = len(a)
    out = np.zeros(length, dtype=np.int64)
    for shift in np.flatnonzero(b):
        out[shift:] += b[shift] * a[:length - shift]
    return out


def count_representations(n_max: int) -> np.ndarray:
    """Number of integer vectors n ∈ Z³ with |n|² = k, for k = 0..n_max."""
    squares = np.zeros(n_max + 1, dtype=np.int64)
    squares[0] = 1
    for x in range(1, math.isqrt(n_max) + 1):
        squares[x * x] = 2
    two = _convolve_truncated(squares, squares)
    return _convolve_truncated(two, squares)


def vectors_up_to(norm_cap: int) -> Dict[int, List[LatticeVector]]:
    """Nonzero lattice vectors with |n|² ≤ norm_cap, bucketed by norm in lexicographic order."""
    radius = math.isqrt(norm_cap)
    buckets: Dict[int, List[LatticeVector]] = {}
    for n in itertools.product(range(-radius, radius + 1), repeat=3):
        k = n[0] * n[0] + n[1] * n[1] + n[2] * n[2]
        if 0 < k <= norm_cap:
            buckets.setdefault(k, []).append(LatticeVector(n))
    return buckets


def enumerate_shells(n_max: int, representative_cap: int = DEFAULT_REPRESENTATIVE_CAP) -> ShellTable:
    """
    Build the shell table of Λ*₊ up to |n|² ≤ n_max.

    Args:
        n_max: Largest integer norm |n|² included
        representative_cap: Shells with norm up to this value list their vectors

    Returns:
        ShellTable with one Shell per integer 1..n_max (degeneracy 0 allowed)
    """
    if not isinstance(n_max, (int, np.integer)) or n_max < 1:
        raise InvalidArgumentError(f"n_max must be an integer >= 1, got {n_max!r}")
    n_max = int(n_max)
    counts = count_representations(n_max)
    members = vectors_up_to(min(representative_cap, n_max)) if representative_cap > 0 else {}
    shells = tuple(
        Shell(norm_sq_int=k, degeneracy=int(counts[k]), representatives=tuple(members.get(k, ())))
        for k in range(1, n_max + 1)
    )
    logger.debug(f"Enumerated {n_max} shells, {int(counts[1:].sum())} nonzero vectors")
    return ShellTable(n_max=n_max, shells=shells)


class CompensatedSum:
    """Neumaier compensated accumulator; the result depends only on the order of add() calls."""

    def __init__(self):
        self._sum = 0.0
        self._compensation = 0.0

    def add(self, x: float) -> None:
        t = self._sum + x
        if abs(self._sum) >= abs(x):
            self._compensation += (self._sum - t) + x
        else:
            self._compensation += (x - t) + self._sum
        self._sum = t

    @property
    def value(self) -> float:
        return self._sum + self._compensation


@dataclass(frozen=True)
class LatticeSum:
    value: float
    partial_sums: Tuple[float, ...]


def _as_table(shells: Union[ShellTable, int]) -> ShellTable:
    if isinstance(shells, ShellTable):
        return shells
    return enumerate_shells(shells, representative_cap=0)


def evaluate_in_order(func: Callable, items: Sequence, threads: int = 1) -> List:
    """Map func over items, optionally on a thread pool; results keep the input order."""
    if threads is None or threads <= 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def lattice_sum(summand: Callable[[Shell], float], shells: Union[ShellTable, int],
                n_max: Optional[int] = None, threads: int = 1) -> LatticeSum:
    """
    Sum degeneracy·summand(shell) over Λ*₊ in ascending-norm order.

    Args:
        summand: Function of a Shell returning the per-vector value
        shells: Shell table, or an integer cutoff to enumerate one
        n_max: Optional smaller cutoff applied to the table
        threads: Worker threads used to evaluate the summand

    Returns:
        LatticeSum with the compensated total and one partial sum per shell
    """
    table = _as_table(shells)
    if n_max is not None:
        table = table.truncated(n_max)
    occupied = table.occupied()
    values = evaluate_in_order(summand, occupied, threads)
    by_norm = {shell.norm_sq_int: value for shell, value in zip(occupied, values)}

    accumulator = CompensatedSum()
    partial: List[float] = []
    for shell in table:
        if shell.degeneracy:
            value = float(by_norm[shell.norm_sq_int])
            if not math.isfinite(value):
                raise NumericError(f"summand is not finite on shell {shell.norm_sq_int}: {value}",
                                   shell=shell.norm_sq_int)
            accumulator.add(shell.degeneracy * value)
        partial.append(accumulator.value)
    return LatticeSum(value=accumulator.value, partial_sums=tuple(partial))
