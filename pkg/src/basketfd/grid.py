"""Uniform tensor grid in transformed coordinates, fields on it, and restriction."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, ValidationError

_REL_TOL = 1e-12


class NodeKind(Enum):
    INTERIOR = "interior"
    EDGE_X1_LOWER = "edge-x1-lower"
    EDGE_X1_UPPER = "edge-x1-upper"
    EDGE_X2_LOWER = "edge-x2-lower"
    EDGE_X2_UPPER = "edge-x2-upper"
    CORNER_LOWER_LOWER = "corner-lower-lower"
    CORNER_LOWER_UPPER = "corner-lower-upper"
    CORNER_UPPER_LOWER = "corner-upper-lower"
    CORNER_UPPER_UPPER = "corner-upper-upper"


@dataclass(frozen=True)
class Grid2:
    """Uniform grid x_i^(k) = xmin_k + i*h with N_k interior steps per direction."""

    xmin1: float
    xmax1: float
    xmin2: float
    xmax2: float
    n1: int
    n2: int
    h: float

    def __post_init__(self):
        if self.h <= 0.0:
            raise ConfigError(f"grid spacing must be positive, got h={self.h}")
        if self.n1 < 4 or self.n2 < 4:
            raise ConfigError(
                f"need at least 4 steps per direction for the compact stencil, got {self.n1}x{self.n2}"
            )
        for xmin, xmax, n, name in (
            (self.xmin1, self.xmax1, self.n1, "x1"),
            (self.xmin2, self.xmax2, self.n2, "x2"),
        ):
            width = xmax - xmin
            if abs(width - n * self.h) > _REL_TOL * max(abs(width), n * self.h):
                raise ConfigError(
                    f"{name} bounds inconsistent with h: {xmax} != {xmin} + {n}*{self.h}"
                )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1 + 1, self.n2 + 1)

    @property
    def n_nodes(self) -> int:
        return (self.n1 + 1) * (self.n2 + 1)

    def coords1(self) -> np.ndarray:
        return self.xmin1 + self.h * np.arange(self.n1 + 1)

    def coords2(self) -> np.ndarray:
        return self.xmin2 + self.h * np.arange(self.n2 + 1)


def build_grid(
    xmin1: float, xmax1: float, xmin2: float, xmax2: float, n1: int, n2: int
) -> Grid2:
    """Build a grid, requiring both directions to share a single spacing h."""
    if n1 < 1 or n2 < 1:
        raise ConfigError("step counts must be positive")
    h1 = (xmax1 - xmin1) / n1
    h2 = (xmax2 - xmin2) / n2
    if h1 <= 0.0 or h2 <= 0.0:
        raise ConfigError("bounds must satisfy xmax > xmin")
    if abs(h1 - h2) > _REL_TOL * max(h1, h2):
        raise ConfigError(
            f"directions disagree on spacing: h1={h1!r} vs h2={h2!r}; "
            "choose bounds and counts with a common h"
        )
    return Grid2(xmin1, xmax1, xmin2, xmax2, n1, n2, h1)


def classify(grid: Grid2, i1: int, i2: int) -> NodeKind:
    """Classify node (i1, i2) as interior, edge or corner."""
    if not (0 <= i1 <= grid.n1 and 0 <= i2 <= grid.n2):
        raise ValidationError(f"node index ({i1}, {i2}) outside grid {grid.shape}")
    lo1, hi1 = i1 == 0, i1 == grid.n1
    lo2, hi2 = i2 == 0, i2 == grid.n2
    if lo1 and lo2:
        return NodeKind.CORNER_LOWER_LOWER
    if lo1 and hi2:
        return NodeKind.CORNER_LOWER_UPPER
    if hi1 and lo2:
        return NodeKind.CORNER_UPPER_LOWER
    if hi1 and hi2:
        return NodeKind.CORNER_UPPER_UPPER
    if lo1:
        return NodeKind.EDGE_X1_LOWER
    if hi1:
        return NodeKind.EDGE_X1_UPPER
    if lo2:
        return NodeKind.EDGE_X2_LOWER
    if hi2:
        return NodeKind.EDGE_X2_UPPER
    return NodeKind.INTERIOR


def boundary_mask(grid: Grid2) -> np.ndarray:
    """Boolean mask over the node array, True on edges and corners."""
    mask = np.zeros(grid.shape, dtype=bool)
    mask[0, :] = mask[-1, :] = True
    mask[:, 0] = mask[:, -1] = True
    return mask


@dataclass
class GridField:
    """Scalar values on every grid node, stored row-major by (i1, i2)."""

    grid: Grid2
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValidationError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("field contains non-finite values")

    @classmethod
    def from_function(cls, grid: Grid2, fn) -> "GridField":
        x1 = grid.coords1()[:, None]
        x2 = grid.coords2()[None, :]
        return cls(grid, np.broadcast_to(fn(x1, x2), grid.shape).copy())

    def copy(self) -> "GridField":
        return GridField(self.grid, self.values.copy())

    def to_csv(self, path_or_buf) -> None:
        """Write `x1,x2,value` rows, row-major, 17 significant digits."""
        if hasattr(path_or_buf, "write"):
            self._write_csv(path_or_buf)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh) -> None:
        fh.write("x1,x2,value\n")
        x1 = self.grid.coords1()
        x2 = self.grid.coords2()
        vals = self.values
        for i1 in range(self.grid.n1 + 1):
            a = x1[i1]
            for i2 in range(self.grid.n2 + 1):
                fh.write(f"{a:.17g},{x2[i2]:.17g},{vals[i1, i2]:.17g}\n")

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self._write_csv(buf)
        return buf.getvalue()


def _check_nested(fine: Grid2, coarse: Grid2) -> int:
    same_bounds = all(
        abs(a - b) <= _REL_TOL * max(1.0, abs(a), abs(b))
        for a, b in (
            (fine.xmin1, coarse.xmin1),
            (fine.xmax1, coarse.xmax1),
            (fine.xmin2, coarse.xmin2),
            (fine.xmax2, coarse.xmax2),
        )
    )
    if not same_bounds:
        raise ConfigError("grids do not share bounds; restriction needs nesting")
    if fine.n1 % coarse.n1 or fine.n2 % coarse.n2:
        raise ConfigError(
            f"fine counts {fine.n1}x{fine.n2} not integer multiples of coarse {coarse.n1}x{coarse.n2}"
        )
    m1 = fine.n1 // coarse.n1
    m2 = fine.n2 // coarse.n2
    if m1 != m2:
        raise ConfigError("refinement factor differs between directions")
    return m1


def restrict(fine: GridField, coarse: Grid2) -> GridField:
    """Inject fine-grid values onto a nested coarse grid (no interpolation)."""
    m = _check_nested(fine.grid, coarse)
    return GridField(coarse, fine.values[::m, ::m].copy())


def interpolate_bicubic(f: GridField, x1: float, x2: float) -> float:
    """Tensor cubic Lagrange interpolation from the 4x4 neighbourhood of (x1, x2).

    The window shifts inward near the boundary; the point must lie inside the
    domain. Exact at nodes, O(h^4) between them.
    """
    g = f.grid
    tol = 4.0 * _REL_TOL * max(1.0, abs(x1), abs(x2))
    if not (g.xmin1 - tol <= x1 <= g.xmax1 + tol and g.xmin2 - tol <= x2 <= g.xmax2 + tol):
        raise ValidationError(f"point ({x1}, {x2}) outside grid domain")

    def axis_setup(x, xmin, n):
        t = (x - xmin) / g.h
        cell = int(np.floor(t))
        start = min(max(cell - 1, 0), n - 3)  # 4 consecutive nodes
        return t, start

    t1, s1 = axis_setup(x1, g.xmin1, g.n1)
    t2, s2 = axis_setup(x2, g.xmin2, g.n2)

    def lagrange_weights(t, start):
        nodes = start + np.arange(4.0)
        w = np.empty(4)
        for j in range(4):
            others = np.delete(nodes, j)
            w[j] = np.prod((t - others) / (nodes[j] - others))
        return w

    w1 = lagrange_weights(t1, s1)
    w2 = lagrange_weights(t2, s2)
    block = f.values[s1 : s1 + 4, s2 : s2 + 4]
    return float(w1 @ block @ w2)
