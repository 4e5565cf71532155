"""Reference grid and periodic scalar fields.

A field is stored as a plain float ndarray of samples on the uniform
periodic grid; :class:`ParamGrid` carries the resolution and sample
locations.  Arrays handed to the immutable containers are copied and
write-protected, so states can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def frozen_array(values, n=None):
    """Copy to a float ndarray, optionally broadcast to length n, and lock it."""
    arr = np.array(values, dtype=float)
    if arr.ndim == 0:
        if n is None:
            raise ValueError("scalar input requires an explicit length")
        arr = np.full(n, float(arr))
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"expected {n} samples, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field contains non-finite samples")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ParamGrid:
    """Uniform periodic grid of the unit-circumference reference circle."""

    n_points: int

    def __post_init__(self):
        if self.n_points < 16 or self.n_points % 2 != 0:
            raise ValueError("n_points must be even and at least 16")

    @property
    def s_values(self):
        s = np.arange(self.n_points) / self.n_points
        s.setflags(write=False)
        return s

    @property
    def spacing(self):
        return 1.0 / self.n_points

    def field(self, values):
        """Validate samples against this grid and return a locked array."""
        return frozen_array(values, self.n_points)
