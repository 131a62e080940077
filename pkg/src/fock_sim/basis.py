"""Occupation-number bases of truncated bosonic Fock spaces."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import InvalidArgumentError, ResourceError
from src.momentum_lattice import ZERO, LatticeVector

logger = logging.getLogger(__name__)

FIXED_TOTAL = 'fixed_total'
EXCITATION_TRUNCATED = 'excitation_truncated'
SECTORS = (FIXED_TOTAL, EXCITATION_TRUNCATED)
DEFAULT_MAX_DIMENSION = 50000


@dataclass(frozen=True)
class ModeSet:
    """Ordered momentum modes; the zero mode, when present, comes first."""

    modes: Tuple[LatticeVector, ...]
    _index: Dict[LatticeVector, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        modes = tuple(v if isinstance(v, LatticeVector) else LatticeVector.of(v) for v in self.modes)
        if len(set(modes)) != len(modes):
            raise InvalidArgumentError("mode set contains duplicate momenta")
        if ZERO in modes and modes[0] != ZERO:
            modes = (ZERO,) + tuple(v for v in modes if v != ZERO)
        object.__setattr__(self, 'modes', modes)
        object.__setattr__(self, '_index', {v: i for i, v in enumerate(modes)})

    @classmethod
    def from_vectors(cls, vectors: Iterable, include_zero: bool = False) -> 'ModeSet':
        vectors = [v if isinstance(v, LatticeVector) else LatticeVector.of(v) for v in vectors]
        vectors = [v for v in vectors if not v.is_zero]
        return cls(tuple(([ZERO] if include_zero else []) + vectors))

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __contains__(self, vector: LatticeVector) -> bool:
        return vector in self._index

    @property
    def has_zero(self) -> bool:
        return ZERO in self._index

    @property
    def nonzero(self) -> Tuple[LatticeVector, ...]:
        return tuple(v for v in self.modes if not v.is_zero)

    @property
    def pairing_closed(self) -> bool:
        return all(-v in self._index for v in self.modes)

    def index(self, vector: LatticeVector) -> int:
        try:
            return self._index[vector]
        except KeyError:
            raise InvalidArgumentError(f"mode {vector} is not in the mode set") from None

    def shell_norms(self) -> Tuple[int, ...]:
        return tuple(sorted({v.norm_sq_int for v in self.nonzero}))

    def without_zero(self) -> 'ModeSet':
        return ModeSet(self.nonzero)

    def with_zero(self) -> 'ModeSet':
        return self if self.has_zero else ModeSet((ZERO,) + self.modes)

    def describe(self) -> List[str]:
        return [str(v) for v in self.modes]


def count_states(n_modes: int, N: int, sector: str, mode_cap: Optional[int] = None) -> int:
    """Dimension of a sector, counting occupation vectors by total with a cap per mode."""
    cap = N if mode_cap is None else min(mode_cap, N)
    ways = np.zeros(N + 1, dtype=object)
    ways[0] = 1
    for _ in range(n_modes):
        nxt = np.zeros(N + 1, dtype=object)
        for occupation in range(cap + 1):
            nxt[occupation:] += ways[:N + 1 - occupation]
        ways = nxt
    return int(ways[N]) if sector == FIXED_TOTAL else int(sum(ways))


def _occupations(n_modes: int, budget: int, cap: int, exact: bool) -> Iterable[Tuple[int, ...]]:
    """Occupation vectors in lexicographic order with total == budget (exact) or ≤ budget."""
    if n_modes == 0:
        if not exact or budget == 0:
            yield ()
        return
    for first in range(min(cap, budget) + 1):
        for rest in _occupations(n_modes - 1, budget - first, cap, exact):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class FockBasis:
    modes: ModeSet
    N: int
    sector: str
    mode_cap: Optional[int]
    states: Tuple[Tuple[int, ...], ...]
    _index: Dict[Tuple[int, ...], int] = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def zero_position(self) -> Optional[int]:
        return 0 if self.modes.has_zero else None

    def index_of(self, state: Sequence[int]) -> Optional[int]:
        return self._index.get(tuple(state))

    def excitation_numbers(self) -> np.ndarray:
        """N₊ of every basis state."""
        occupations = np.asarray(self.states, dtype=np.int64).reshape(self.dimension, len(self.modes))
        total = occupations.sum(axis=1)
        if self.modes.has_zero:
            total = total - occupations[:, 0]
        return total

    def vacuum_index(self) -> int:
        """Index of the state with every particle in the condensate (or no excitations)."""
        if self.sector == FIXED_TOTAL:
            vacuum = (self.N,) + (0,) * (len(self.modes) - 1)
        else:
            vacuum = (0,) * len(self.modes)
        return self._index[vacuum]

    def describe(self) -> Dict:
        return {'sector': self.sector, 'N': self.N, 'mode_cap': self.mode_cap,
                'modes': self.modes.describe(), 'dimension': self.dimension}


def build_basis(modes: ModeSet, N: int, sector: str, mode_cap: Optional[int] = None,
                max_dimension: int = DEFAULT_MAX_DIMENSION) -> FockBasis:
    """
    Enumerate the occupation basis of one sector.

    Args:
        modes: Mode set; fixed_total needs the zero mode, excitation_truncated must not have it
        N: Particle number
        sector: fixed_total (Σ n = N) or excitation_truncated (Σ n ≤ N)
        mode_cap: Optional largest occupation of a single mode
        max_dimension: Resource cap on the number of states

    Returns:
        FockBasis in lexicographic order of occupation vectors
    """
    if sector not in SECTORS:
        raise InvalidArgumentError(f"unknown sector {sector!r}")
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidArgumentError(f"N must be an integer >= 1, got {N!r}")
    if mode_cap is not None and mode_cap < 0:
        raise InvalidArgumentError(f"mode_cap must be >= 0, got {mode_cap}")
    if sector == FIXED_TOTAL and not modes.has_zero:
        raise InvalidArgumentError("fixed_total sector needs the zero mode")
    if sector == EXCITATION_TRUNCATED and modes.has_zero:
        raise InvalidArgumentError("excitation_truncated sector excludes the zero mode")
    if sector == FIXED_TOTAL and mode_cap is not None and mode_cap < N:
        raise InvalidArgumentError("mode_cap below N would remove the pure condensate state")

    dimension = count_states(len(modes), N, sector, mode_cap)
    if dimension > max_dimension:
        raise ResourceError(f"{sector} basis with {len(modes)} modes and N={N} has dimension "
                            f"{dimension} > cap {max_dimension}")
    cap = N if mode_cap is None else mode_cap
    states = tuple(_occupations(len(modes), N, cap, exact=sector == FIXED_TOTAL))
    logger.debug(f"Built {sector} basis: {len(modes)} modes, N={N}, dimension {len(states)}")
    return FockBasis(modes=modes, N=int(N), sector=sector, mode_cap=mode_cap, states=states,
                     _index={s: i for i, s in enumerate(states)})


def stars_and_bars(n_modes: int, N: int, sector: str) -> int:
    """Uncapped sector dimension: C(N+M−1, M−1) for fixed_total, C(N+M, M) for excitation_truncated."""
    if sector == FIXED_TOTAL:
        return math.comb(N + n_modes - 1, n_modes - 1)
    return math.comb(N + n_modes, n_modes)
