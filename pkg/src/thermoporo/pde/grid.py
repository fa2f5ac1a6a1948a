"""Structured grids and the field layouts used on them.

Scalars live at cell centers.  Vector fields live on faces, staggered:
the axis-``a`` component is stored at the lower ``a``-face of each cell.
On a periodic grid every face array therefore has the same shape as a
cell array (the face "above" the last cell wraps to index 0).  On a
bounded grid the axis-``a`` face array has one extra entry along axis
``a`` so that both domain boundary faces are represented.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import LayoutError


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid over a box of unit extent per axis by default.

    ``shape`` is the number of cells per axis, ``lengths`` the physical box
    size, ``periodic`` whether fields wrap.
    """

    shape: tuple
    lengths: tuple = None
    periodic: bool = True

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        if not shape or any(n < 1 for n in shape):
            raise LayoutError(f"grid shape must be positive, got {shape}")
        object.__setattr__(self, "shape", shape)
        if self.lengths is None:
            object.__setattr__(self, "lengths", (1.0,) * len(shape))
        else:
            lengths = tuple(float(x) for x in self.lengths)
            if len(lengths) != len(shape) or any(x <= 0 for x in lengths):
                raise LayoutError(f"bad grid lengths {lengths} for shape {shape}")
            object.__setattr__(self, "lengths", lengths)

    @property
    def dim(self):
        return len(self.shape)

    @property
    def h(self):
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    @property
    def inv_h(self):
        return tuple(n / L for L, n in zip(self.lengths, self.shape))

    @property
    def inv_h2(self):
        return tuple((n / L) ** 2 for L, n in zip(self.lengths, self.shape))

    @property
    def cell_volume(self):
        vol = 1.0
        for x in self.h:
            vol *= x
        return vol

    @property
    def ncells(self):
        n = 1
        for s in self.shape:
            n *= s
        return n

    def face_shape(self, axis):
        if self.periodic:
            return self.shape
        s = list(self.shape)
        s[axis] += 1
        return tuple(s)

    def zeros_cell(self):
        return np.zeros(self.shape)

    def zeros_faces(self):
        return [np.zeros(self.face_shape(a)) for a in range(self.dim)]

    def cell_centers(self, axis):
        """1D coordinate array of cell centers along one axis."""
        n = self.shape[axis]
        h = self.h[axis]
        return (np.arange(n) + 0.5) * h

    def face_coords(self, axis):
        """1D coordinate array of the axis-aligned faces along that axis."""
        n = self.face_shape(axis)[axis]
        h = self.h[axis]
        return np.arange(n) * h

    def cell_center_mesh(self):
        """Cell-center coordinates as ``dim`` broadcastable arrays."""
        axes = [self.cell_centers(a) for a in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)


@dataclass
class GridField:
    """A scalar or staggered vector field bound to a grid.

    ``role`` is ``"cell"`` (scalar at centers) or ``"faces"`` (one array per
    axis on the staggered layout).  ``data`` is the ndarray, respectively the
    list of ndarrays.
    """

    grid: Grid
    role: str
    data: object = field(repr=False)

    def __post_init__(self):
        if self.role == "cell":
            arr = np.asarray(self.data, dtype=float)
            if arr.shape != self.grid.shape:
                raise LayoutError(
                    f"cell field shape {arr.shape} != grid shape {self.grid.shape}"
                )
            self.data = arr
        elif self.role == "faces":
            comps = [np.asarray(c, dtype=float) for c in self.data]
            if len(comps) != self.grid.dim:
                raise LayoutError(
                    f"face field needs {self.grid.dim} components, got {len(comps)}"
                )
            for a, c in enumerate(comps):
                want = self.grid.face_shape(a)
                if c.shape != want:
                    raise LayoutError(
                        f"axis-{a} face array has shape {c.shape}, expected {want}"
                    )
            self.data = comps
        else:
            raise LayoutError(f"unknown field role {self.role!r}")

    @classmethod
    def cell(cls, grid, data):
        return cls(grid, "cell", data)

    @classmethod
    def faces(cls, grid, data):
        return cls(grid, "faces", data)

    def copy(self):
        if self.role == "cell":
            return GridField(self.grid, "cell", self.data.copy())
        return GridField(self.grid, "faces", [c.copy() for c in self.data])
