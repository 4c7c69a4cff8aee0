"""Uniform 1-D grids on an interval with zero extension outside, plus time grids."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import GridMismatchError


@dataclass(frozen=True)
class Grid:
    """Interior nodes x_i = a + i h, i = 1..n, with h = (b - a)/(n + 1).

    Functions on the grid vanish on the complement of (a, b); the nodes at
    a and b are never stored.
    """

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need an integer n >= 2 interior nodes, got {self.n}")

    @property
    def h(self):
        return (self.b - self.a) / (self.n + 1)

    @property
    def x(self):
        return self.a + self.h * np.arange(1, self.n + 1)

    @property
    def diameter(self):
        return self.b - self.a

    @property
    def measure(self):
        return self.b - self.a

    def function(self, values):
        return GridFunction(self, values)

    def sample(self, func):
        return GridFunction(self, func(self.x))

    def zeros(self):
        return GridFunction(self, np.zeros(self.n))

    def ones(self):
        return GridFunction(self, np.ones(self.n))

    def contains(self, y):
        y = np.asarray(y, dtype=float)
        return (y > self.a) & (y < self.b)


def _same_grid(g1, g2):
    if g1 is not g2 and g1 != g2:
        raise GridMismatchError(f"grid mismatch: {g1} vs {g2}")


class GridFunction:
    """Values at the interior nodes of a grid (zero extension is implicit)."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n,):
            raise GridMismatchError(f"expected {grid.n} nodal values, got shape {values.shape}")
        values.flags.writeable = False
        self.grid = grid
        self.values = values

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.grid.n

    def _other(self, other):
        if isinstance(other, GridFunction):
            _same_grid(self.grid, other.grid)
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.grid, self.values / self._other(other))

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def map(self, func):
        return GridFunction(self.grid, func(self.values))

    def at(self, y):
        """Piecewise-linear interpolant of the zero-extended function at points y."""
        g = self.grid
        xs = np.concatenate([[g.a], g.x, [g.b]])
        vs = np.concatenate([[0.0], self.values, [0.0]])
        return np.interp(y, xs, vs, left=0.0, right=0.0)

    def __repr__(self):
        return f"GridFunction(n={self.grid.n}, max|u|={np.max(np.abs(self.values)):.3g})"


@dataclass(frozen=True)
class TimeGrid:
    T: float
    steps: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"time horizon must be positive, got {self.T}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"need at least one time step, got {self.steps}")

    @property
    def dt(self):
        return self.T / self.steps

    @property
    def times(self):
        return self.dt * np.arange(self.steps + 1)


@dataclass(frozen=True)
class Norms:
    l2: float
    linf: float


def inner_l2(u, w, weight=None):
    """Discrete L2 product h * sum u_i w_i (times weight_i when given)."""
    _same_grid(u.grid, w.grid)
    prod = u.values * w.values
    if weight is not None:
        _same_grid(u.grid, weight.grid)
        prod = prod * weight.values
    return float(u.grid.h * np.sum(prod))


def norms(u):
    return Norms(l2=math.sqrt(max(inner_l2(u, u), 0.0)),
                 linf=float(np.max(np.abs(u.values))))


def l2_norm(u):
    return norms(u).l2
