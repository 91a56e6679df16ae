"""Observation fields on periodic boxes.

An observation field is a function a : box -> [0, 1] stored as samples on a
uniform grid. The box is [origin, origin + period)^dim and is always treated
as a torus: evaluation wraps around, and averaging kernels wrap around. Sets
that are not genuinely periodic (the inverse-power region, the half-strip
comb) are represented by sampling their indicator on a large centered box;
callers that need boundary-free answers keep their probes away from the box
edge.

Grid convention: values[i] (1d) or values[i, j] (2d) is the sample at
x = origin + i * h, y = origin + j * h with h = period / grid. The first
index runs along the x axis.
"""

from __future__ import annotations

import configparser
import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy import ndimage

_GRID_MAGIC = b"OGRD"
_GRID_VERSION = 1


@dataclass
class ObservationField:
    """Sampled density a : box -> [0, 1] on a uniform periodic grid."""

    dim: int
    period: float
    grid: int
    values: np.ndarray
    origin: float = 0.0
    family: dict = dc_field(default_factory=dict)
    modulus: float = 0.0

    @property
    def h(self) -> float:
        return self.period / self.grid

    def describe(self) -> dict:
        """Plain-dict descriptor for report embedding."""
        return {
            "dim": self.dim,
            "period": self.period,
            "grid": self.grid,
            "origin": self.origin,
            "family": dict(self.family),
            "modulus": self.modulus,
        }


def _check_shape(dim: int, grid: int, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    expected = (grid,) if dim == 1 else (grid, grid)
    if values.shape != expected:
        raise ValueError(
            f"values shape {values.shape} does not match dim={dim}, grid={grid}"
        )
    if np.any(values < -1e-12) or np.any(values > 1 + 1e-12):
        raise ValueError("field values must lie in [0, 1]")
    return np.clip(values, 0.0, 1.0)


def _grid_points(dim: int, period: float, grid: int, origin: float):
    ax = origin + (period / grid) * np.arange(grid)
    if dim == 1:
        return (ax,)
    return np.meshgrid(ax, ax, indexing="ij")


def _member_constant(pts, value=1.0):
    base = pts[0]
    return np.full(np.shape(base), float(value))


def _member_periodic_square(pts, delta):
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    inside = np.ones(np.shape(pts[0]), dtype=bool)
    for coord in pts:
        inside &= np.mod(coord, 1.0) < delta
    return inside.astype(np.float64)


def _parse_intervals(spec):
    """Accept [(lo, hi), ...] or a string 'lo:hi, lo:hi' with 0<=lo<hi<=1."""
    if isinstance(spec, str):
        parts = [p for p in spec.split(",") if p.strip()]
        spec = [tuple(float(v) for v in p.split(":")) for p in parts]
    out = []
    for lo, hi in spec:
        if not (0.0 <= lo < hi <= 1.0):
            raise ValueError(f"interval ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1")
        out.append((float(lo), float(hi)))
    if not out:
        raise ValueError("need at least one interval")
    return out


def _member_intervals_1d(coord, intervals):
    frac = np.mod(coord, 1.0)
    inside = np.zeros(np.shape(coord), dtype=bool)
    for lo, hi in intervals:
        inside |= (frac >= lo) & (frac < hi)
    return inside


def _member_product(pts, intervals_x, intervals_y):
    ex = _parse_intervals(intervals_x)
    fy = _parse_intervals(intervals_y)
    inside = _member_intervals_1d(pts[0], ex) & _member_intervals_1d(pts[1], fy)
    return inside.astype(np.float64)


def _member_e_beta(pts, beta=0.5):
    """Region above inverse-power profiles of the |x| coordinate.

    Outside the unit slab the floor is |x|^(-beta); inside it steepens to
    |x|^(-1/beta), so the set hugs both coordinate axes without touching
    them. Every axis-parallel line through the origin misses the set.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    x, y = pts
    ax, ay = np.abs(x), np.abs(y)
    with np.errstate(divide="ignore", over="ignore"):
        outer = ay > ax ** (-beta)
        inner = ay > ax ** (-1.0 / beta)
    return np.where(ax >= 1.0, outer, inner).astype(np.float64)


def _member_half_strip_comb(pts):
    """Upper half-plane keeps frac(x) < 1/2, lower half-plane the complement.

    The union is 1-periodic in x and meets every non-vertical line, yet any
    vertical line sees only a half-line of it, so sliding vertical windows
    can be made to miss the set entirely.
    """
    x, y = pts
    left = np.mod(x, 1.0) < 0.5
    return np.where(y >= 0.0, left, ~left).astype(np.float64)


_FAMILIES = {
    "constant": {
        "member": _member_constant,
        "dims": (1, 2),
        "params": {"value": 1.0},
        "doc": "a == value everywhere; value in [0, 1], default 1.0",
    },
    "periodic-square": {
        "member": _member_periodic_square,
        "dims": (1, 2),
        "params": {"delta": 0.5},
        "doc": "1-periodic indicator of [0, delta)^dim in each unit cell",
    },
    "product": {
        "member": _member_product,
        "dims": (2,),
        "params": {"intervals_x": "0:0.6", "intervals_y": "0:0.6"},
        "doc": "E x F with E, F 1-periodic interval unions given as 'lo:hi, ...'",
    },
    "e-beta": {
        "member": _member_e_beta,
        "dims": (2,),
        "params": {"beta": 0.5},
        "doc": "region |y| > |x|^(-beta) (|x| >= 1), |y| > |x|^(-1/beta) (|x| < 1); misses both axes",
    },
    "half-strip-comb": {
        "member": _member_half_strip_comb,
        "dims": (2,),
        "params": {},
        "doc": "frac(x) < 1/2 for y >= 0 and frac(x) >= 1/2 for y < 0; defeats vertical combs",
    },
    "custom-grid": {
        "member": None,
        "dims": (1, 2),
        "params": {"grid_file": "<path>"},
        "doc": "samples loaded from a raw grid file (see save_grid / load_grid)",
    },
}


def family_catalog() -> dict:
    """Name -> {dims, params, doc} for every built-in family."""
    return {
        name: {"dims": info["dims"], "params": dict(info["params"]), "doc": info["doc"]}
        for name, info in _FAMILIES.items()
    }


def make_field(
    family: str,
    *,
    dim: int,
    period: float,
    grid: int,
    origin: float | str | None = None,
    values: np.ndarray | None = None,
    **params,
) -> ObservationField:
    """Sample a built-in family on a uniform grid.

    origin may be a float, the string "centered" (box centered at 0), or
    None, which picks "centered" for the truncated families (e-beta,
    half-strip-comb) and 0.0 otherwise.
    """
    if family not in _FAMILIES:
        raise ValueError(
            f"unknown family {family!r}; known: {', '.join(sorted(_FAMILIES))}"
        )
    info = _FAMILIES[family]
    if dim not in info["dims"]:
        raise ValueError(f"family {family!r} supports dim in {info['dims']}, got {dim}")
    if period <= 0 or grid < 2:
        raise ValueError("need period > 0 and grid >= 2")
    if origin is None:
        origin = "centered" if family in ("e-beta", "half-strip-comb") else 0.0
    if origin == "centered":
        origin = -period / 2.0
    origin = float(origin)

    if family == "custom-grid":
        if values is None:
            raise ValueError("custom-grid needs explicit values")
        vals = _check_shape(dim, grid, values)
    else:
        pts = _grid_points(dim, period, grid, origin)
        vals = np.asarray(info["member"](pts, **params), dtype=np.float64)
        vals = _check_shape(dim, grid, vals)
    fam = {"name": family, **{k: (v if np.isscalar(v) else str(v)) for k, v in params.items()}}
    return ObservationField(dim, float(period), int(grid), vals, origin, fam)


def evaluate(field: ObservationField, points) -> np.ndarray:
    """Bilinear interpolation of the samples, periodic in every axis.

    points: array of shape (..., dim) for dim = 2, or (...) for dim = 1.
    Exact at grid nodes. Returns an array of the batch shape.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = field.grid
    h = field.h
    if field.dim == 1:
        u = (pts - field.origin) / h
        i0 = np.floor(u).astype(np.int64)
        f = u - i0
        i0 = np.mod(i0, n)
        i1 = (i0 + 1) % n
        v = field.values
        return (1.0 - f) * v[i0] + f * v[i1]
    if pts.shape[-1] != 2:
        raise ValueError("2d field expects points of shape (..., 2)")
    u = (pts[..., 0] - field.origin) / h
    w = (pts[..., 1] - field.origin) / h
    i0 = np.floor(u).astype(np.int64)
    j0 = np.floor(w).astype(np.int64)
    fu = u - i0
    fw = w - j0
    i0 = np.mod(i0, n)
    j0 = np.mod(j0, n)
    i1 = (i0 + 1) % n
    j1 = (j0 + 1) % n
    v = field.values
    return (
        v[i0, j0] * (1 - fu) * (1 - fw)
        + v[i1, j0] * fu * (1 - fw)
        + v[i0, j1] * (1 - fu) * fw
        + v[i1, j1] * fu * fw
    )


def mollify(field: ObservationField, radius: float) -> ObservationField:
    """Periodic box average of half-width radius along every axis.

    The radius is rounded to a whole number of grid steps; the realized
    half-width is recorded as the field's modulus. Values stay in [0, 1].
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    w = int(round(radius / field.h))
    if w == 0:
        return ObservationField(
            field.dim, field.period, field.grid, field.values.copy(),
            field.origin, dict(field.family), field.modulus,
        )
    size = 2 * w + 1
    vals = field.values
    for axis in range(field.dim):
        vals = ndimage.uniform_filter1d(vals, size=size, axis=axis, mode="wrap")
    vals = np.clip(vals, 0.0, 1.0)
    fam = dict(field.family)
    fam["mollify"] = w * field.h
    return ObservationField(
        field.dim, field.period, field.grid, vals, field.origin, fam, w * field.h
    )


def save_grid(field: ObservationField, path) -> None:
    """Write a raw grid file.

    Layout: 4-byte magic "OGRD", then little-endian u32 version, u32 dim,
    u32 grid, f64 period, f64 origin, then grid^dim float64 samples in row
    major order (x index slowest for dim = 2).
    """
    path = Path(path)
    header = _GRID_MAGIC + struct.pack(
        "<IIIdd", _GRID_VERSION, field.dim, field.grid, field.period, field.origin
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def load_grid(path) -> ObservationField:
    """Read a raw grid file written by save_grid."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != _GRID_MAGIC:
        raise ValueError(f"{path}: not a grid file (bad magic)")
    version, dim, grid, period, origin = struct.unpack("<IIIdd", raw[4 : 4 + 28])
    if version != _GRID_VERSION:
        raise ValueError(f"{path}: unsupported grid file version {version}")
    count = grid ** dim
    body = np.frombuffer(raw[4 + 28 :], dtype="<f8", count=count)
    values = body.reshape((grid,) * dim).astype(np.float64)
    fam = {"name": "custom-grid", "source": str(path)}
    return ObservationField(dim, period, grid, _check_shape(dim, grid, values), origin, fam)


def field_from_config(source) -> ObservationField:
    """Build a field from an INI file or a prepared ConfigParser.

    The [field] section must name the family and the sampling box::

        [field]
        family = periodic-square
        dim = 2
        period = 1.0
        grid = 256
        delta = 0.3
        mollify = 0.05

    Family parameters are the same keywords make_field accepts. For
    custom-grid, grid_file points at a raw grid file and the box keys are
    taken from the file. origin accepts a number or "centered".
    """
    if isinstance(source, configparser.ConfigParser):
        cfg = source
        where = "<config>"
    else:
        cfg = configparser.ConfigParser()
        read = cfg.read(str(source))
        if not read:
            raise ValueError(f"cannot read config file {source}")
        where = str(source)
    if "field" not in cfg:
        raise ValueError(f"{where}: missing [field] section")
    sec = cfg["field"]
    family = sec.get("family")
    if not family:
        raise ValueError(f"{where}: [field] needs a family key")

    if family == "custom-grid":
        grid_file = sec.get("grid_file")
        if not grid_file:
            raise ValueError(f"{where}: custom-grid needs grid_file")
        base = Path(where).parent if where != "<config>" else Path(".")
        fpath = Path(grid_file)
        if not fpath.is_absolute():
            fpath = base / fpath
        fld = load_grid(fpath)
    else:
        known = {"family", "dim", "period", "grid", "origin", "mollify"}
        params = {}
        for key in sec:
            if key in known:
                continue
            raw = sec.get(key)
            try:
                params[key] = float(raw)
            except ValueError:
                params[key] = raw
        origin = sec.get("origin", None)
        if origin is not None and origin != "centered":
            origin = float(origin)
        fld = make_field(
            family,
            dim=sec.getint("dim", 2),
            period=sec.getfloat("period", 1.0),
            grid=sec.getint("grid", 256),
            origin=origin,
            **params,
        )
    r = sec.getfloat("mollify", 0.0)
    if r > 0:
        fld = mollify(fld, r)
    return fld
