"""Minimal gym-API-compatible spaces.

Drop-in stand-ins for the Gymnasium space classes this adapter needs
(Discrete, MultiBinary, Box), with the same core surface: ``sample()``,
``contains()`` / ``in``, ``seed()``, ``shape`` and ``dtype``. Kept local
because the adapter has to run where gymnasium is not installable.
"""

from __future__ import annotations

import numpy as np


class Space:
    def __init__(self, shape, dtype):
        self.shape = tuple(shape)
        self.dtype = np.dtype(dtype)
        self._rng = np.random.default_rng()

    def seed(self, seed=None):
        self._rng = np.random.default_rng(seed)
        return [seed]

    def contains(self, x) -> bool:
        raise NotImplementedError

    def __contains__(self, x) -> bool:
        return self.contains(x)


class Discrete(Space):
    """Integers 0..n-1."""

    def __init__(self, n: int):
        if n <= 0:
            raise ValueError("n must be positive")
        super().__init__((), np.int64)
        self.n = int(n)

    def sample(self) -> np.int64:
        return np.int64(self._rng.integers(0, self.n))

    def contains(self, x) -> bool:
        if isinstance(x, (int, np.integer)):
            return 0 <= int(x) < self.n
        if isinstance(x, np.ndarray) and x.shape == () and \
                np.issubdtype(x.dtype, np.integer):
            return 0 <= int(x) < self.n
        return False

    def __repr__(self):
        return f"Discrete({self.n})"


class MultiBinary(Space):
    """Length-n vectors of {0, 1}."""

    def __init__(self, n: int):
        if n <= 0:
            raise ValueError("n must be positive")
        super().__init__((n,), np.int8)
        self.n = int(n)

    def sample(self) -> np.ndarray:
        return self._rng.integers(0, 2, self.n, dtype=np.int8)

    def contains(self, x) -> bool:
        arr = np.asarray(x)
        return arr.shape == (self.n,) and \
            bool(np.isin(arr, (0, 1)).all()) and \
            np.issubdtype(arr.dtype, np.integer)

    def __repr__(self):
        return f"MultiBinary({self.n})"


class Box(Space):
    """Axis-aligned box in R^shape; bounds may be infinite."""

    def __init__(self, low, high, shape, dtype=np.float64):
        super().__init__(shape, dtype)
        self.low = np.full(shape, low, dtype=dtype)
        self.high = np.full(shape, high, dtype=dtype)

    def sample(self) -> np.ndarray:
        # unbounded dimensions sample from a standard normal, as gym does
        finite = np.isfinite(self.low) & np.isfinite(self.high)
        out = self._rng.standard_normal(self.shape)
        out[finite] = self._rng.uniform(self.low[finite], self.high[finite])
        return out.astype(self.dtype)

    def contains(self, x) -> bool:
        arr = np.asarray(x)
        return arr.shape == self.shape and \
            bool(np.all(arr >= self.low)) and bool(np.all(arr <= self.high)) \
            and np.issubdtype(arr.dtype, np.floating)

    def __repr__(self):
        return f"Box{self.shape}"
