import logging
import threading
from collections import OrderedDict
from typing import Hashable, Optional, Tuple

logger = logging.getLogger(__name__)


class FourierCache:
    """Cache for V̂(|p|) values to avoid redundant quadratures."""

    def __init__(self, max_size: Optional[int] = 65536):
        self.cache = OrderedDict()
        self.max_size = max_size  # None means unlimited
        self.lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get_key(self, potential: Hashable, p_abs: float) -> Tuple[Hashable, float]:
        """Generate a cache key from the potential and the momentum modulus."""
        return potential, float(p_abs)

    def get(self, potential: Hashable, p_abs: float) -> Optional[float]:
        """Get cached transform if available."""
        with self.lock:
            key = self.get_key(potential, p_abs)
            if key in self.cache:
                # Move to end (most recently used)
                self.cache.move_to_end(key)
                self.hits += 1
                return self.cache[key]
            self.misses += 1
            return None

    def put(self, potential: Hashable, p_abs: float, value: float):
        """Add a transform value to the cache."""
        with self.lock:
            key = self.get_key(potential, p_abs)
            if key in self.cache:
                self.cache.pop(key)
            elif self.max_size is not None and len(self.cache) >= self.max_size:
                self.cache.popitem(last=False)  # Remove least recently used
            self.cache[key] = value

    def lookup(self, potential, p_abs: float) -> float:
        """Return V̂(|p|), computing and storing it on a miss."""
        value = self.get(potential, p_abs)
        if value is None:
            value = float(potential.fourier(p_abs))
            self.put(potential, p_abs, value)
        return value

    def clear_all(self):
        with self.lock:
            self.cache.clear()
            self.hits = 0
            self.misses = 0
        logger.debug("Cleared Fourier cache")

    def __len__(self) -> int:
        return len(self.cache)


FOURIER_CACHE = FourierCache()
