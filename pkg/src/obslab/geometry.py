"""Line, rectangle, and comb density functionals for observation fields.

Everything here estimates an infimum of window averages of a sampled field:
over line segments (gcc_constant), over anisotropic rectangles
(rectangle_density_inf), or over sliding windows along a direction
(comb_profile / relative_density_1d). Infima over continuous families are
approximated by explicit grids plus one round of local coordinate descent;
all grid sizes are parameters and are echoed in returned metadata, because
the numbers are only meaningful together with the search resolution.

Conventions: a Direction wraps an angle on the circle; the transverse unit
vector used by comb profiles is perp(theta) = (sin, -cos) rotated so that
the map (x, t) -> x*perp + t*theta is the rotation taking (0, 1) to theta.
Searches run over the field's fundamental domain; for fields that represent
a truncated (non-periodic) set, probes are kept inside the box minus a
margin instead of wrapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import ObservationField, evaluate

TRUNCATED_FAMILIES = ("e-beta", "half-strip-comb")


def is_truncated(field: ObservationField) -> bool:
    """True when the field samples a non-periodic set on a finite box."""
    return field.family.get("name") in TRUNCATED_FAMILIES


@dataclass(frozen=True)
class Direction:
    """Unit direction on the circle, stored as an angle in [0, 2*pi)."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % (2.0 * math.pi))

    @classmethod
    def from_vector(cls, v) -> "Direction":
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (2,) or not np.any(v):
            raise ValueError("direction vector must be a nonzero pair")
        return cls(math.atan2(v[1], v[0]))

    @property
    def vector(self) -> np.ndarray:
        return np.array([math.cos(self.angle), math.sin(self.angle)])

    @property
    def perp(self) -> np.ndarray:
        """Transverse unit vector (theta_2, -theta_1)."""
        return np.array([math.sin(self.angle), -math.cos(self.angle)])

    @property
    def sign(self) -> int:
        """1d reduction: +1 for angles pointing right, -1 otherwise."""
        return 1 if math.cos(self.angle) >= 0 else -1


@dataclass(frozen=True)
class LineSegment:
    start: tuple
    direction: Direction
    length: float

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("segment length must be positive")


@dataclass(frozen=True)
class RectangleSpec:
    """Anisotropically dilated rectangle: anchor z, rotation theta,
    transverse side s = L * lam^((beta-1)/2), long side t = L * lam^beta."""

    theta: Direction
    anchor: tuple
    L: float
    lam: float
    beta: float

    def __post_init__(self):
        if self.L <= 0 or self.lam < 1 or not 0 <= self.beta <= 1:
            raise ValueError("need L > 0, lam >= 1, beta in [0, 1]")

    @property
    def side_s(self) -> float:
        return self.L * self.lam ** ((self.beta - 1.0) / 2.0)

    @property
    def side_t(self) -> float:
        return self.L * self.lam ** self.beta


@dataclass
class CombProfile:
    """Sampled transverse profile x -> inf over t of window averages."""

    theta: Direction
    M: float
    values: np.ndarray
    spacing: float
    x0: float = 0.0
    periodic: bool = True
    meta: dict = dc_field(default_factory=dict)


def _auto_samples(field: ObservationField, length: float) -> int:
    per_cell = 3.0 * length / field.h
    return int(max(64, min(8192, math.ceil(per_cell))))


def line_average(field: ObservationField, segment: LineSegment, n_samples: int | None = None) -> float:
    """Midpoint-rule average of the field along the segment."""
    if n_samples is None:
        n_samples = _auto_samples(field, segment.length)
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    s = (np.arange(n_samples) + 0.5) * (segment.length / n_samples)
    if field.dim == 1:
        pts = segment.start[0] + segment.direction.sign * s
    else:
        pts = np.asarray(segment.start) + s[:, None] * segment.direction.vector
    return float(np.mean(evaluate(field, pts)))


def _anchor_box(field, extent_lo, extent_hi, margin):
    """Anchor bounds so [z + extent_lo, z + extent_hi] stays in the box."""
    lo = field.origin + margin - extent_lo
    hi = field.origin + field.period - margin - extent_hi
    if np.any(hi <= lo):
        raise ValueError("probe does not fit inside the box with this margin")
    return lo, hi


def _anchor_grid(lo, hi, n, dim):
    axes = [lo[i] + (hi[i] - lo[i]) * (np.arange(n) + 0.5) / n for i in range(dim)]
    if dim == 1:
        return axes[0][:, None]
    g = np.meshgrid(*axes, indexing="ij")
    return np.stack([c.ravel() for c in g], axis=-1)


def _segment_means(field, anchors, dvec, length, n_samples):
    s = (np.arange(n_samples) + 0.5) * (length / n_samples)
    if field.dim == 1:
        pts = anchors[:, 0][:, None] + s[None, :] * dvec[0]
    else:
        pts = anchors[:, None, :] + s[None, :, None] * dvec[None, None, :]
    return evaluate(field, pts).mean(axis=1)


def gcc_constant(
    field: ObservationField,
    L: float,
    direction_grid_size: int = 64,
    anchor_grid_size: int = 12,
    n_samples: int | None = None,
    angles: np.ndarray | None = None,
    inside_box: bool | None = None,
    margin: float = 0.0,
    refine: bool = True,
) -> float:
    """Estimated infimum of length-L segment averages.

    Directions come from a uniform grid on the circle (or the explicit
    `angles` override), anchors from a uniform grid over the admissible
    anchor box, and the grid minimizer is polished by coordinate descent.
    With an explicit `angles` list the descent moves anchors only, so the
    result stays an infimum over the requested directions; with the grid
    it also polishes the angle. The result is an upper bound for the true
    infimum. Grids must have at least 8 points each unless `angles` is
    supplied.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    if angles is None and (direction_grid_size < 8 or anchor_grid_size < 8):
        raise ValueError("direction and anchor grids need at least 8 points")
    if inside_box is None:
        inside_box = is_truncated(field)
    if n_samples is None:
        n_samples = _auto_samples(field, L)

    if field.dim == 1:
        angle_list = np.array([0.0])
    elif angles is not None:
        angle_list = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    else:
        angle_list = 2.0 * math.pi * np.arange(direction_grid_size) / direction_grid_size

    best = (np.inf, 0, None, None)  # value, angle index, angle, anchor
    for k, ang in enumerate(angle_list):
        dvec = np.array([math.cos(ang), math.sin(ang)]) if field.dim == 2 else np.array([1.0])
        if inside_box:
            ext = dvec * L
            lo, hi = _anchor_box(field, np.minimum(0.0, ext), np.maximum(0.0, ext), margin)
        else:
            lo = np.full(field.dim, field.origin)
            hi = np.full(field.dim, field.origin + field.period)
        anchors = _anchor_grid(lo, hi, anchor_grid_size, field.dim)
        means = _segment_means(field, anchors, dvec, L, n_samples)
        i = int(np.argmin(means))
        if means[i] < best[0]:
            best = (float(means[i]), k, float(ang), anchors[i].copy())

    value, _, ang, anchor = best
    if not refine or anchor is None:
        return value

    def probe(ang_, z):
        dvec = np.array([math.cos(ang_), math.sin(ang_)]) if field.dim == 2 else np.array([1.0])
        if inside_box:
            ext = dvec * L
            try:
                lo, hi = _anchor_box(field, np.minimum(0.0, ext), np.maximum(0.0, ext), margin)
            except ValueError:
                return np.inf
            z = np.clip(z, lo, hi)
        return _segment_means(field, z[None, :], dvec, L, n_samples)[0]

    ang_step = math.pi / max(len(angle_list), 8)
    z_step = np.full(field.dim, field.period / (2.0 * anchor_grid_size))
    z = np.asarray(anchor, dtype=np.float64)
    move_angle = field.dim == 2 and angles is None
    for _ in range(8):
        if move_angle:
            for cand in (ang - ang_step, ang + ang_step):
                v = probe(cand, z)
                if v < value:
                    value, ang = v, cand
        for axis in range(field.dim):
            for sgn in (-1.0, 1.0):
                zc = z.copy()
                zc[axis] += sgn * z_step[axis]
                v = probe(ang, zc)
                if v < value:
                    value, z = v, zc
        ang_step *= 0.5
        z_step *= 0.5
    return value


def _rect_sample_offsets(side_s, side_t, n_samples, dim):
    """Midpoint lattice in rectangle coordinates, aspect-balanced."""
    if dim == 1:
        u = (np.arange(n_samples) + 0.5) / n_samples
        return u[:, None]
    ratio = side_t / side_s
    n1 = int(max(2, round(math.sqrt(n_samples / ratio))))
    n2 = int(max(2, math.ceil(n_samples / n1)))
    u = (np.arange(n1) + 0.5) / n1
    v = (np.arange(n2) + 0.5) / n2
    uu, vv = np.meshgrid(u, v, indexing="ij")
    return np.stack([uu.ravel(), vv.ravel()], axis=-1)


def rectangle_density(
    field: ObservationField,
    rect: RectangleSpec,
    n_samples: int = 1024,
    method: str = "grid",
    seed: int = 0,
) -> float:
    """Average of the field over one rectangle, by midpoint grid or
    seeded Monte Carlo."""
    s, t = rect.side_s, rect.side_t
    if method == "grid":
        off = _rect_sample_offsets(s, t, n_samples, field.dim)
    elif method == "mc":
        rng = np.random.default_rng(seed)
        off = rng.random((n_samples, field.dim))
    else:
        raise ValueError(f"unknown method {method!r}")
    z = np.asarray(rect.anchor, dtype=np.float64)
    if field.dim == 1:
        pts = z[0] + off[:, 0] * t
    else:
        pts = z + np.outer(off[:, 0] * s, rect.theta.perp) + np.outer(off[:, 1] * t, rect.theta.vector)
    return float(np.mean(evaluate(field, pts)))


def rectangle_density_inf(
    field: ObservationField,
    beta: float,
    L: float,
    lambda_list,
    direction_grid_size: int = 24,
    anchor_grid_size: int = 10,
    n_samples: int = 1024,
    angles: np.ndarray | None = None,
    inside_box: bool | None = None,
    margin: float = 0.0,
    refine: bool = True,
) -> tuple[float, RectangleSpec]:
    """Sweep of rectangle_density over lam in lambda_list, rotations, and
    anchors; returns the minimum and its argmin rectangle.

    Ties break to the first grid point visited, i.e. the lexicographically
    smallest (lam index, direction index, anchor index).
    """
    lambda_list = [float(l) for l in lambda_list]
    if not lambda_list:
        raise ValueError("lambda_list must be non-empty")
    if inside_box is None:
        inside_box = is_truncated(field)
    if field.dim == 1:
        angle_list = np.array([0.0])
    elif angles is not None:
        angle_list = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    else:
        angle_list = math.pi * np.arange(direction_grid_size) / direction_grid_size

    best_val = np.inf
    best = None
    for lam in lambda_list:
        for ang in angle_list:
            theta = Direction(ang)
            spec0 = RectangleSpec(theta, (0.0,) * field.dim, L, lam, beta)
            s, t = spec0.side_s, spec0.side_t
            if field.dim == 2:
                span = np.outer([0, 1], s * theta.perp)[:, None, :] + np.outer([0, 1], t * theta.vector)[None, :, :]
                corners = span.reshape(-1, 2)
                ext_lo, ext_hi = corners.min(axis=0), corners.max(axis=0)
            else:
                ext_lo, ext_hi = np.array([min(0.0, t)]), np.array([max(0.0, t)])
            if inside_box:
                try:
                    lo, hi = _anchor_box(field, ext_lo, ext_hi, margin)
                except ValueError:
                    continue
            else:
                lo = np.full(field.dim, field.origin)
                hi = np.full(field.dim, field.origin + field.period)
            anchors = _anchor_grid(lo, hi, anchor_grid_size, field.dim)
            off = _rect_sample_offsets(s, t, n_samples, field.dim)
            if field.dim == 1:
                pts = anchors[:, 0][:, None] + off[None, :, 0] * t
            else:
                body = np.outer(off[:, 0] * s, theta.perp) + np.outer(off[:, 1] * t, theta.vector)
                pts = anchors[:, None, :] + body[None, :, :]
            means = evaluate(field, pts).mean(axis=1)
            i = int(np.argmin(means))
            if means[i] < best_val:
                best_val = float(means[i])
                best = RectangleSpec(theta, tuple(anchors[i]), L, lam, beta)

    if best is None:
        raise ValueError("no rectangle fits inside the box at the requested sizes")
    if not refine:
        return best_val, best

    lam, L_, beta_ = best.lam, best.L, best.beta
    ang = best.theta.angle
    z = np.asarray(best.anchor, dtype=np.float64)
    spec = RectangleSpec(Direction(ang), tuple(z), L_, lam, beta_)
    s, t = spec.side_s, spec.side_t
    off = _rect_sample_offsets(s, t, n_samples, field.dim)

    def probe(ang_, z_):
        th = Direction(ang_)
        if field.dim == 1:
            pts = z_[0] + off[:, 0] * t
        else:
            pts = z_ + np.outer(off[:, 0] * s, th.perp) + np.outer(off[:, 1] * t, th.vector)
        return float(np.mean(evaluate(field, pts)))

    ang_step = math.pi / max(len(angle_list), 8) / 2.0
    z_step = np.full(field.dim, field.period / (2.0 * anchor_grid_size))
    val = best_val
    for _ in range(8):
        if field.dim == 2:
            for cand in (ang - ang_step, ang + ang_step):
                v = probe(cand, z)
                if v < val:
                    val, ang = v, cand
        for axis in range(field.dim):
            for sgn in (-1.0, 1.0):
                zc = z.copy()
                zc[axis] += sgn * z_step[axis]
                v = probe(ang, zc)
                if v < val:
                    val, z = v, zc
        ang_step *= 0.5
        z_step *= 0.5
    if val < best_val:
        best_val = val
        best = RectangleSpec(Direction(ang), tuple(z), L_, lam, beta_)
    return best_val, best


def comb_profile(
    field: ObservationField,
    theta: Direction,
    M: float,
    x_extent: float | None = None,
    t_extent: float | None = None,
    n_x: int = 256,
    samples_per_unit: float = 64.0,
    periodic_t: bool | None = None,
) -> CombProfile:
    """Transverse profile of infimal length-M window averages along theta.

    For each transverse offset x the lifted function t -> a(x*perp + t*theta)
    is sampled at resolution 1/samples_per_unit over t_extent, and the
    minimum over all window positions of the length-M running mean is taken
    (cumulative-sum sliding windows, so the t search is dense at the sample
    resolution). When periodic_t is true the window slides around the torus;
    callers pass the direction's closing period as t_extent in that case.
    Defaults probe one fundamental domain in both coordinates.
    """
    if M <= 0:
        raise ValueError("window length M must be positive")
    if field.dim != 2:
        raise ValueError("comb profiles are defined for 2d fields")
    P = field.period
    if x_extent is None:
        x_extent = P
    if t_extent is None:
        t_extent = P
    if periodic_t is None:
        periodic_t = not is_truncated(field)
    if not periodic_t and t_extent < M:
        raise ValueError("t_extent must be at least M for a non-periodic search")

    h_t = 1.0 / samples_per_unit
    n_t = int(max(2, round(t_extent / h_t)))
    h_t = t_extent / n_t
    n_w = int(max(1, round(M / h_t)))

    xs = (np.arange(n_x) + 0.5) * (x_extent / n_x)
    ts = (np.arange(n_t) + 0.5) * h_t
    pts = xs[:, None, None] * theta.perp[None, None, :] + ts[None, :, None] * theta.vector[None, None, :]
    g = evaluate(field, pts)  # (n_x, n_t)

    if periodic_t:
        if n_w > 1:
            reps, tail = divmod(n_w - 1, n_t)
            parts = [g] * (1 + reps)
            if tail:
                parts.append(g[:, :tail])
            g_ext = np.concatenate(parts, axis=1)
        else:
            g_ext = g
    else:
        if n_w > n_t:
            raise ValueError("window longer than the search extent")
        g_ext = g
    c = np.cumsum(g_ext, axis=1)
    c = np.concatenate([np.zeros((n_x, 1)), c], axis=1)
    win = (c[:, n_w:] - c[:, :-n_w]) / n_w
    values = win.min(axis=1)
    return CombProfile(
        theta=theta,
        M=M,
        values=values,
        spacing=x_extent / n_x,
        x0=xs[0],
        periodic=True,
        meta={
            "x_extent": x_extent,
            "t_extent": t_extent,
            "h_t": h_t,
            "n_window": n_w,
            "periodic_t": periodic_t,
        },
    )


def relative_density_1d(profile, L: float) -> float:
    """Infimal length-L window average of a 1d profile or 1d field.

    Windows slide at the sample resolution; periodic profiles wrap.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    if isinstance(profile, CombProfile):
        vals, spacing, periodic = profile.values, profile.spacing, profile.periodic
    elif isinstance(profile, ObservationField):
        if profile.dim != 1:
            raise ValueError("relative_density_1d needs a 1d field")
        vals, spacing, periodic = profile.values, profile.h, True
    else:
        vals, spacing = profile
        vals = np.asarray(vals, dtype=np.float64)
        periodic = True
    n = len(vals)
    n_w = int(max(1, round(L / spacing)))
    if periodic:
        ext = np.concatenate([vals, vals[: n_w - 1]]) if n_w > 1 else vals
    else:
        if n_w > n:
            raise ValueError("window longer than the profile")
        ext = vals
    c = np.concatenate([[0.0], np.cumsum(ext)])
    win = (c[n_w:] - c[:-n_w]) / n_w
    return float(win.min())


def comb_gcc_check(
    field: ObservationField,
    theta: Direction,
    M: float,
    L: float,
    floor: float = 1e-3,
    **profile_kwargs,
) -> tuple[float, bool]:
    """eta = relative density of the comb profile at window L; passes when
    eta clears the declared floor."""
    prof = comb_profile(field, theta, M, **profile_kwargs)
    eta = relative_density_1d(prof, L)
    return eta, eta > floor


def threshold_field(field: ObservationField, eps: float) -> ObservationField:
    """Indicator of the super-level set {a >= eps} as a new field.

    Pointwise a <= 1_{a >= eps} + eps, so any window average of the field
    that reaches eta forces the thresholded average to reach eta - eps.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    vals = (field.values >= eps).astype(np.float64)
    fam = dict(field.family)
    fam["level"] = eps
    return ObservationField(field.dim, field.period, field.grid, vals, field.origin, fam, 0.0)


def field_lipschitz(field: ObservationField) -> float:
    """Euclidean gradient bound of the interpolant: hypot of the per-axis
    maximal difference quotients (periodic wrap)."""
    per_axis = []
    for axis in range(field.dim):
        d = np.abs(np.diff(field.values, axis=axis, append=np.take(field.values, [0], axis=axis)))
        per_axis.append(d.max() / field.h)
    return float(np.hypot(*per_axis)) if field.dim == 2 else float(per_axis[0])


def profile_lipschitz(profile: CombProfile) -> float:
    v = profile.values
    d = np.abs(np.diff(v, append=v[0])) if profile.periodic else np.abs(np.diff(v))
    return float(d.max() / profile.spacing)
