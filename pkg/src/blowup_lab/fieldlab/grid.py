"""Uniform cell-centred grids and sampled fields."""

from dataclasses import dataclass, field

import numpy as np


class TruncationError(ValueError):
    """Field support reaches the edge of the grid, so integrals are truncated."""


@dataclass(frozen=True)
class Grid:
    """``cells`` cells per axis covering ``[-half_width, half_width]^dim``."""

    dim: int
    cells: int
    half_width: float = 2.0

    @property
    def spacing(self):
        return 2.0 * self.half_width / self.cells

    @property
    def cell_volume(self):
        return self.spacing ** self.dim

    def axis(self):
        h = self.spacing
        return -self.half_width + h * (np.arange(self.cells) + 0.5)

    def points(self, lead=None):
        """Cell centres, shape ``(cells,)*dim + (dim,)``; ``lead`` restricts the first axis."""
        ax = self.axis()
        first = ax if lead is None else ax[lead]
        mesh = np.meshgrid(first, *([ax] * (self.dim - 1)), indexing="ij")
        return np.stack(mesh, axis=-1)

    def chunks(self, size=8):
        for start in range(0, self.cells, size):
            yield slice(start, min(start + size, self.cells))


@dataclass
class GridField:
    """Samples of one or more components on a uniform grid.

    Scalar components have shape ``extents``; vector components have a
    leading axis of length ``dim``.
    """

    dim: int
    origin: tuple
    spacing: float
    extents: tuple
    components: dict = field(default_factory=dict)
    support_radius: float = float("inf")

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @classmethod
    def on_grid(cls, grid, support_radius=float("inf"), **components):
        origin = (-grid.half_width,) * grid.dim
        return cls(grid.dim, origin, grid.spacing, (grid.cells,) * grid.dim, dict(components), support_radius)

    @property
    def cell_volume(self):
        return self.spacing ** self.dim

    def coords(self):
        """Cell-centre coordinates, shape ``extents + (dim,)``."""
        axes = [o + self.spacing * (np.arange(m) + 0.5) for o, m in zip(self.origin, self.extents)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def radius(self):
        return np.linalg.norm(self.coords(), axis=-1)

    def __getitem__(self, name):
        return self.components[name]

    def check_interior(self, names=None, tol=1e-14):
        """Raise TruncationError when a component is non-negligible in a boundary cell."""
        for name in names or self.components:
            arr = np.asarray(self.components[name])
            spatial = arr.ndim - self.dim
            for ax in range(self.dim):
                a = spatial + ax
                edge = max(np.max(np.abs(np.take(arr, 0, axis=a))), np.max(np.abs(np.take(arr, -1, axis=a))))
                if edge > tol:
                    raise TruncationError(f"component {name!r} reaches the grid boundary (|value| = {edge:.3g})")

    def check_support(self, radius=None, tol=1e-14):
        R = self.support_radius if radius is None else radius
        outside = self.radius() > R
        for name, arr in self.components.items():
            arr = np.asarray(arr)
            mag = np.abs(arr) if arr.ndim == self.dim else np.max(np.abs(arr), axis=0)
            if np.any(mag[outside] > tol):
                raise ValueError(f"component {name!r} is not supported in |x| <= {R}")
