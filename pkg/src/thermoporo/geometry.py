"""Voxelized periodic unit cells and their scaled tilings.

A unit cell is a ``dim``-dimensional 0/1 voxel array over (0,1)^dim with
periodic wrap-around; value 1 marks the fluid phase, 0 the solid phase.
The interface between phases is the set of voxel faces separating a 1
from a 0.
"""

import re
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import GeometryError


@dataclass(frozen=True)
class UnitCellGeometry:
    """Indicator array of the fluid part of the periodicity cell."""

    chi: np.ndarray

    def __post_init__(self):
        chi = np.asarray(self.chi)
        if chi.ndim not in (2, 3):
            raise GeometryError(f"geometry must be 2- or 3-dimensional, got {chi.ndim}")
        if any(s < 2 for s in chi.shape):
            raise GeometryError(f"need at least 2 voxels per axis, got {chi.shape}")
        vals = np.unique(chi)
        if not np.isin(vals, (0, 1)).all():
            raise GeometryError(f"voxel values must be 0 or 1, found {vals[:5]}")
        chi = np.ascontiguousarray(chi.astype(np.uint8))
        chi.flags.writeable = False
        object.__setattr__(self, "chi", chi)

    @property
    def dim(self):
        return self.chi.ndim

    @property
    def n(self):
        return self.chi.shape

    @property
    def porosity(self):
        return float(self.chi.mean())

    def fluid_mask(self):
        return self.chi.astype(bool)

    def solid_mask(self):
        return ~self.chi.astype(bool)

    def require_two_phases(self):
        m = self.porosity
        if m == 0.0 or m == 1.0:
            raise GeometryError(
                f"cell solver needs both phases present, porosity is {m}"
            )
        return self


@dataclass(frozen=True)
class MacroDomain:
    """The unit-box macroscopic domain with a uniform grid of N^dim cells."""

    dim: int
    N: int
    eps: float = None

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise GeometryError(f"macro domain must be 2- or 3-dimensional, got {self.dim}")
        if self.N < 2:
            raise GeometryError(f"macro resolution must be at least 2, got {self.N}")
        if self.eps is not None:
            k = 1.0 / self.eps
            if abs(k - round(k)) > 1e-9:
                raise GeometryError(f"1/eps must be an integer, got eps={self.eps}")

    def grid(self):
        from .pde.grid import Grid
        return Grid((self.N,) * self.dim, periodic=False)


# ---------------------------------------------------------------------------
# file format


def load_geometry(path):
    """Read a voxel file: header "dim n1 [n2 [n3]]", then the 0/1 values.

    Values are whitespace-separated ASCII digits in row-major order (last
    axis fastest), or, in the binary variant, exactly one raw byte per
    voxel immediately after the header newline.  Errors carry the byte
    offset at which the problem sits.
    """
    with open(path, "rb") as fh:
        data = fh.read()

    nl = data.find(b"\n")
    if nl < 0:
        raise GeometryError("missing header line", offset=0)
    header = data[:nl]
    try:
        fields = [int(tok) for tok in header.split()]
    except ValueError:
        raise GeometryError(f"unparsable header {header[:40]!r}", offset=0)
    if not fields:
        raise GeometryError("empty header line", offset=0)
    dim = fields[0]
    if dim not in (2, 3):
        raise GeometryError(f"dimension must be 2 or 3, got {dim}", offset=0)
    if len(fields) - 1 != dim:
        raise GeometryError(
            f"header declares dim {dim} but lists {len(fields) - 1} axis sizes",
            offset=0,
        )
    shape = tuple(fields[1:])
    if any(s < 1 for s in shape):
        raise GeometryError(f"axis sizes must be positive, got {shape}", offset=0)
    nvox = int(np.prod(shape))

    body = data[nl + 1:]
    if len(body) == nvox and not _looks_ascii(body):
        arr = np.frombuffer(body, dtype=np.uint8)
        bad = np.nonzero(arr > 1)[0]
        if bad.size:
            raise GeometryError(
                f"binary voxel value {arr[bad[0]]} outside {{0,1}}",
                offset=nl + 1 + int(bad[0]),
            )
        chi = arr.reshape(shape)
        return UnitCellGeometry(chi)

    values = np.empty(nvox, dtype=np.uint8)
    count = 0
    for mo in re.finditer(rb"\S+", body):
        tok = mo.group()
        if count >= nvox:
            raise GeometryError(
                f"voxel count mismatch: expected {nvox} values, found more",
                offset=nl + 1 + mo.start(),
            )
        if tok == b"0":
            values[count] = 0
        elif tok == b"1":
            values[count] = 1
        else:
            raise GeometryError(
                f"voxel value {tok[:20]!r} outside {{0,1}}",
                offset=nl + 1 + mo.start(),
            )
        count += 1
    if count != nvox:
        raise GeometryError(
            f"voxel count mismatch: expected {nvox} values, found {count}",
            offset=len(data),
        )
    return UnitCellGeometry(values.reshape(shape))


def _looks_ascii(body):
    # an ASCII body of nvox > 1 values is strictly longer than nvox bytes,
    # so equal length plus non-text bytes means the binary variant
    sample = body[: min(len(body), 4096)]
    return all(b in b"01 \t\r\n" for b in sample)


def save_geometry(geom, path, binary=False):
    """Write a voxel file in the format understood by load_geometry."""
    shape = " ".join(str(s) for s in geom.n)
    header = f"{geom.dim} {shape}\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        if binary:
            fh.write(geom.chi.tobytes())
        else:
            flat = geom.chi.ravel()
            ncol = geom.n[-1]
            for start in range(0, flat.size, ncol):
                row = flat[start:start + ncol]
                fh.write(" ".join(str(int(v)) for v in row).encode())
                fh.write(b"\n")


# ---------------------------------------------------------------------------
# measures


def porosity(geom):
    """Fluid volume fraction of the cell."""
    return geom.porosity


def connectivity(geom, phase="fluid"):
    """Whether the chosen phase is face-connected under periodic wrap."""
    mask = geom.fluid_mask() if phase == "fluid" else geom.solid_mask()
    if not mask.any():
        return False
    return _periodic_component_count(mask) == 1


def percolates(geom, phase="fluid"):
    """Per-axis tuple: does the phase wrap around the torus along that axis?

    A phase percolates along an axis when some face-connected path
    returns to its starting voxel with a net displacement there, i.e.
    the medium conducts along that axis no matter how many periods are
    tiled.
    """
    mask = geom.fluid_mask() if phase == "fluid" else geom.solid_mask()
    dim = mask.ndim
    if not mask.any():
        return (False,) * dim

    idx = -np.ones(mask.shape, dtype=np.int64)
    cells = np.argwhere(mask)
    idx[tuple(cells.T)] = np.arange(len(cells))

    parent = np.arange(len(cells))
    shift = np.zeros((len(cells), dim), dtype=np.int64)  # offset to parent
    winding = [False] * dim

    def find(i):
        # path with accumulated displacement
        root = i
        disp = np.zeros(dim, dtype=np.int64)
        while parent[root] != root:
            disp += shift[root]
            root = parent[root]
        # compress
        node = i
        carry = disp.copy()
        while parent[node] != node:
            nxt = parent[node]
            step = shift[node].copy()
            parent[node] = root
            shift[node] = carry
            carry = carry - step
            node = nxt
        return root, disp

    for a in range(dim):
        nbr = np.roll(idx, -1, axis=a)
        pairs = np.argwhere((idx >= 0) & (nbr >= 0))
        for c in pairs:
            i = idx[tuple(c)]
            j = nbr[tuple(c)]
            delta = np.zeros(dim, dtype=np.int64)
            delta[a] = 1  # j sits one voxel up along a (possibly wrapped)
            ri, di = find(i)
            rj, dj = find(j)
            if ri == rj:
                loop = di + delta - dj
                for b in range(dim):
                    if loop[b] != 0:
                        winding[b] = True
            else:
                parent[rj] = ri
                shift[rj] = di + delta - dj
    return tuple(winding)


def _periodic_component_count(mask):
    structure = ndimage.generate_binary_structure(mask.ndim, 1)
    labels, num = ndimage.label(mask, structure=structure)
    if num <= 1:
        return num

    parent = list(range(num + 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    for a in range(mask.ndim):
        lo = np.take(labels, 0, axis=a)
        hi = np.take(labels, mask.shape[a] - 1, axis=a)
        both = (lo > 0) & (hi > 0)
        for i, j in zip(lo[both].ravel(), hi[both].ravel()):
            union(int(i), int(j))

    roots = {find(i) for i in range(1, num + 1)}
    return len(roots)


# ---------------------------------------------------------------------------
# tiling


def inflate(geom, eps, N):
    """Sample chi(x/eps) on an N-per-axis grid over the unit box.

    Needs 1/eps integer and N divisible by (1/eps)·n along every axis so
    each cell voxel maps to an integer block of macro voxels.
    """
    k = 1.0 / float(eps)
    if abs(k - round(k)) > 1e-9:
        raise GeometryError(f"1/eps must be an integer, got eps={eps}")
    k = int(round(k))
    chi = geom.chi
    blocks = []
    for n_a in geom.n:
        if N % (k * n_a) != 0:
            raise GeometryError(
                f"macro resolution {N} not divisible by (1/eps)*n = {k * n_a}"
            )
        blocks.append(N // (k * n_a))

    out = chi
    for a, b in enumerate(blocks):
        out = np.repeat(out, b, axis=a)
    reps = tuple(k for _ in range(geom.dim))
    return np.tile(out, reps)


# ---------------------------------------------------------------------------
# generators


def generate_laminate(n, fluid_fraction=0.5, axis=0, dim=3):
    """Layered cell: chi=1 where the coordinate along ``axis`` is below
    ``fluid_fraction``; layers are grid-aligned so the layer volume
    fraction is exact when fluid_fraction*n is an integer."""
    nlayers = int(round(fluid_fraction * n))
    if not 0 <= nlayers <= n:
        raise GeometryError(f"bad fluid fraction {fluid_fraction}")
    chi = np.zeros((n,) * dim, dtype=np.uint8)
    idx = [slice(None)] * dim
    idx[axis] = slice(0, nlayers)
    chi[tuple(idx)] = 1
    return UnitCellGeometry(chi)


def generate_checkerboard(n, dim=2):
    """Four-quadrant (eight-octant in 3D) alternating cell; n must be even."""
    if n % 2:
        raise GeometryError(f"checkerboard needs even resolution, got {n}")
    coords = np.meshgrid(*[np.arange(n) < n // 2 for _ in range(dim)],
                         indexing="ij", sparse=False)
    parity = np.zeros((n,) * dim, dtype=int)
    for c in coords:
        parity += c.astype(int)
    chi = (parity % 2).astype(np.uint8)
    return UnitCellGeometry(chi)


def generate_channel(n, width=0.5, axis=0, dim=3):
    """Planar channel along ``axis``: a fluid slab of the given width
    fraction, bounded in the next transverse axis, spanning all others."""
    k = int(round(width * n))
    if not 1 <= k < n:
        raise GeometryError(f"channel width fraction {width} leaves no wall")
    trans = (axis + 1) % dim
    j0 = (n - k) // 2
    chi = np.zeros((n,) * dim, dtype=np.uint8)
    idx = [slice(None)] * dim
    idx[trans] = slice(j0, j0 + k)
    chi[tuple(idx)] = 1
    return UnitCellGeometry(chi)


def generate_cube(n, a=0.5, dim=3):
    """Centered solid cube of side fraction ``a`` in a fluid matrix."""
    if not 0 < a < 1:
        raise GeometryError(f"cube side fraction must be in (0,1), got {a}")
    k = int(round(a * n))
    lo = (n - k) // 2
    chi = np.ones((n,) * dim, dtype=np.uint8)
    idx = tuple(slice(lo, lo + k) for _ in range(dim))
    chi[idx] = 0
    return UnitCellGeometry(chi)


def generate_random_connected(n, dim=3, solid_fraction=0.25, seed=0,
                              max_tries=200):
    """Random solid blobs in a fluid matrix, retried until the fluid phase
    is one periodically connected component that percolates along every
    axis and the solid phase is nonempty.  Deterministic per seed."""
    rng = np.random.default_rng(seed)
    target = int(round(solid_fraction * n ** dim))
    for _ in range(max_tries):
        chi = np.ones((n,) * dim, dtype=np.uint8)
        guard = 0
        while (chi == 0).sum() < target and guard < 10 * n ** dim:
            guard += 1
            center = rng.integers(0, n, size=dim)
            radius = int(rng.integers(1, max(2, n // 5)))
            grids = np.meshgrid(*[np.arange(n) for _ in range(dim)],
                                indexing="ij", sparse=True)
            dist2 = 0
            for a in range(dim):
                d = np.abs(grids[a] - center[a])
                d = np.minimum(d, n - d)  # periodic metric
                dist2 = dist2 + d ** 2
            chi[dist2 <= radius ** 2] = 0
        geom = UnitCellGeometry(chi)
        if geom.porosity in (0.0, 1.0):
            continue
        if not connectivity(geom, "fluid"):
            continue
        if not all(percolates(geom, "fluid")):
            continue
        return geom
    raise GeometryError(
        f"could not draw a percolating geometry in {max_tries} tries"
    )
