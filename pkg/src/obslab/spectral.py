"""Frequency masks and spectral constants on the discrete torus.

The torus [0, P)^d is sampled on N points per axis, so the frequency
lattice is (2*pi/P) * Z^d aliased to [-pi*N/P, pi*N/P). Masks select
lattice subsets (balls, annuli, sectors, rectangles); compressions of a
multiplication operator onto a masked frequency subspace are assembled
exactly through the convolution theorem, and the reported constants are
eigenvalues of those Hermitian matrices.

Conventions. The uncertainty constant C is c^(-1/2) where c is the
smallest eigenvalue of Pi M_w Pi on the mask range, with w the field
itself (weight "sqrt", matching an observation norm ||a^(1/2) u||) or its
square (weight "full", matching ||a u||). The resolvent constant M is the
smallest number with ||u||^2 <= M ||(A - lam) u||^2 + m <a u, u> on the
sampled lattice, A the Fourier multiplier |xi|^gamma; exact kernel modes
of A - lam are deflated through a Schur complement and the value is
infinite when the form I - m M_a is positive on some kernel vector.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .fields import ObservationField

DENSE_RANK_LIMIT = 2000
RESIDUAL_FLOOR = 1e-10


def frequency_axes(grid: int, dim: int, period: float) -> list[np.ndarray]:
    """Per-axis frequency values xi = (2*pi/P) * k in FFT storage order.

    The spacing is computed once so a period of exactly 2*pi yields exact
    integer frequencies, keeping mask boundaries sharp.
    """
    k = np.fft.fftfreq(grid, d=1.0 / grid)
    spacing = 2.0 * math.pi / period
    return [k * spacing for _ in range(dim)]


def aliasing_radius(grid: int, period: float) -> float:
    return math.pi * grid / period


@dataclass
class FrequencyMask:
    grid: int
    dim: int
    period: float
    kind: str
    params: dict
    mask: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.mask.sum())

    def indices(self) -> np.ndarray:
        """Integer lattice indices (rank, dim) of selected frequencies."""
        return np.argwhere(self.mask)

    def xi(self) -> np.ndarray:
        """Frequency vectors (rank, dim) of the selected lattice points."""
        axes = frequency_axes(self.grid, self.dim, self.period)
        idx = self.indices()
        return np.stack([axes[j][idx[:, j]] for j in range(self.dim)], axis=-1)

    def describe(self) -> dict:
        return {
            "grid": self.grid,
            "dim": self.dim,
            "period": self.period,
            "kind": self.kind,
            "params": {k: (v if np.isscalar(v) else list(np.ravel(v))) for k, v in self.params.items()},
            "rank": self.rank,
        }


def _abs_xi(grid: int, dim: int, period: float) -> np.ndarray:
    axes = frequency_axes(grid, dim, period)
    if dim == 1:
        return np.abs(axes[0])
    gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.hypot(gx, gy)


def build_mask(grid: int, dim: int, period: float, kind: str, **params) -> FrequencyMask:
    """Boolean mask over the frequency lattice.

    Kinds and parameters:
      ball: radius (may be inf)
      annulus: lam, delta, beta; band lam - delta*lam^(-beta) <= |xi| <=
        lam + delta*lam^(-beta); must stay below the aliasing radius
      sector: angle, eps0; nonzero xi with |xi/|xi| - theta| <= eps0 (d=2)
      annulus_sector: parameters of both
      rectangle: zeta (scalar or per-axis), sigma; the box
        [zeta_j, zeta_j + sigma] on each axis
    """
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    rad = aliasing_radius(grid, period)
    absxi = _abs_xi(grid, dim, period)

    def annulus_band():
        lam, delta, beta = params["lam"], params["delta"], params.get("beta", 0.0)
        half = delta * lam ** (-beta)
        if lam + half >= rad:
            raise ValueError(
                f"annulus reaches the aliasing radius {rad}: lam + delta*lam^-beta = {lam + half}"
            )
        return (absxi >= lam - half) & (absxi <= lam + half)

    def sector_wedge():
        if dim != 2:
            raise ValueError("sector masks need dim = 2")
        angle, eps0 = params["angle"], params["eps0"]
        axes = frequency_axes(grid, dim, period)
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        r = np.hypot(gx, gy)
        ok = r > 0
        ux = np.where(ok, gx / np.where(ok, r, 1.0), 0.0)
        uy = np.where(ok, gy / np.where(ok, r, 1.0), 0.0)
        d = np.hypot(ux - math.cos(angle), uy - math.sin(angle))
        return ok & (d <= eps0)

    if kind == "ball":
        radius = params["radius"]
        if math.isfinite(radius) and radius >= rad:
            raise ValueError(f"ball radius {radius} reaches the aliasing radius {rad}")
        m = absxi <= radius
    elif kind == "annulus":
        m = annulus_band()
    elif kind == "sector":
        m = sector_wedge()
    elif kind == "annulus_sector":
        m = annulus_band() & sector_wedge()
    elif kind == "rectangle":
        zeta = np.broadcast_to(np.asarray(params["zeta"], dtype=np.float64), (dim,))
        sigma = params["sigma"]
        if np.any(zeta < -rad) or np.any(zeta + sigma >= rad):
            raise ValueError("rectangle leaves the aliased frequency range")
        axes = frequency_axes(grid, dim, period)
        per_axis = [(axes[j] >= zeta[j]) & (axes[j] <= zeta[j] + sigma) for j in range(dim)]
        m = per_axis[0] if dim == 1 else per_axis[0][:, None] & per_axis[1][None, :]
    else:
        raise ValueError(f"unknown mask kind: {kind}")
    if not m.any():
        raise ValueError(f"mask {kind} selects no lattice point")
    return FrequencyMask(grid, dim, period, kind, dict(params), m)


@dataclass
class SpectralReport:
    kind: str
    value: float
    c: float
    residual: float
    rank: int
    mask: dict
    field: dict
    wall_time: float
    extra: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "c": self.c,
            "residual": self.residual,
            "rank": self.rank,
            "mask": self.mask,
            "field": self.field,
            "wall_time": self.wall_time,
            **self.extra,
        }


def _weight_values(field: ObservationField, weight: str) -> np.ndarray:
    if weight == "sqrt":
        return field.values
    if weight == "full":
        return field.values ** 2
    raise ValueError("weight must be 'sqrt' or 'full'")


def compression_matrix(field: ObservationField, mask: FrequencyMask, weight: str = "sqrt") -> np.ndarray:
    """Hermitian matrix of Pi M_w Pi in the orthonormal Fourier basis.

    Entry (j, k) is the (xi_j - xi_k) Fourier coefficient of w, read off a
    single FFT of the weight, so the compression is exact on the lattice.
    """
    w = _weight_values(field, weight)
    what = np.fft.fftn(w) / w.size
    ks = mask.indices()
    n = mask.grid
    diff = np.mod(ks[:, None, :] - ks[None, :, :], n)
    if mask.dim == 1:
        return what[diff[..., 0]]
    return what[diff[..., 0], diff[..., 1]]


def _sandwich_operator(field: ObservationField, mask: FrequencyMask, weight: str):
    """Matrix-free Pi M_w Pi as restrict -> ifft -> multiply -> fft -> restrict."""
    w = _weight_values(field, weight)
    sel = mask.mask

    def matvec(v):
        spec = np.zeros(sel.shape, dtype=complex)
        spec[sel] = v
        u = np.fft.ifftn(spec, norm="ortho")
        spec2 = np.fft.fftn(w * u, norm="ortho")
        return spec2[sel]

    r = mask.rank
    return scipy.sparse.linalg.LinearOperator((r, r), matvec=matvec, dtype=complex), matvec


def _smallest_eig(field, mask, weight):
    """Smallest eigenpair of the compression.

    Dense below the rank limit; above it, shift-invert Lanczos at a small
    negative shift, so the inner conjugate-gradient solves stay well
    conditioned even when the compression is nearly singular. A block of
    Ritz pairs is requested because the smallest eigenvalues of
    concentration operators cluster.
    """
    op, matvec = _sandwich_operator(field, mask, weight)
    r = mask.rank
    if r <= DENSE_RANK_LIMIT:
        mat = compression_matrix(field, mask, weight)
        vals, vecs = scipy.linalg.eigh(mat, subset_by_index=[0, 0])
        c, v = float(vals[0]), vecs[:, 0]
    else:
        sigma = -1e-2
        shifted = scipy.sparse.linalg.LinearOperator(
            (r, r), matvec=lambda x: matvec(x) - sigma * x, dtype=complex)

        def solve(b):
            x, info = scipy.sparse.linalg.cg(shifted, b, rtol=1e-12, atol=0.0, maxiter=5000)
            if info != 0:
                raise RuntimeError(f"inner conjugate-gradient solve failed (info = {info})")
            return x

        opinv = scipy.sparse.linalg.LinearOperator((r, r), matvec=solve, dtype=complex)
        try:
            vals, vecs = scipy.sparse.linalg.eigsh(
                op, k=4, sigma=sigma, which="LM", OPinv=opinv, tol=1e-9, maxiter=1000)
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            vals, vecs = exc.eigenvalues, exc.eigenvectors
            if vals is None or not len(vals):
                raise RuntimeError("eigensolver did not converge and returned no Ritz pairs") from exc
        i = int(np.argmin(vals))
        c, v = float(vals[i]), vecs[:, i]
        residual = float(np.linalg.norm(matvec(v) - c * v))
        if residual > 1e-8:
            raise RuntimeError(f"eigensolver did not converge; residual {residual}")
    residual = float(np.linalg.norm(matvec(v) - c * v))
    return c, v, residual


def uncertainty_constant(field: ObservationField, mask: FrequencyMask, weight: str = "sqrt") -> SpectralReport:
    """C = c^(-1/2) with c the smallest eigenvalue of Pi M_w Pi.

    C is reported as inf when c falls below the residual floor: the masked
    subspace then contains data essentially invisible to the field.
    """
    t0 = time.perf_counter()
    c, _, residual = _smallest_eig(field, mask, weight)
    if c < -1e-10:
        raise RuntimeError(f"compression eigenvalue {c} is negative beyond roundoff")
    c = max(c, 0.0)
    C = float("inf") if c <= RESIDUAL_FLOOR else c ** -0.5
    return SpectralReport(
        kind=f"uncertainty-{weight}",
        value=C,
        c=c,
        residual=residual,
        rank=mask.rank,
        mask=mask.describe(),
        field=field.describe(),
        wall_time=time.perf_counter() - t0,
    )


def annulus_containment(gamma: float, beta: float, delta: float, lam: float,
                        grid: int | None = None, dim: int = 1, period: float = 2.0 * math.pi) -> float:
    """Largest eps <= 1/4 with eps * 2^(|1-gamma|/gamma) / gamma <= delta.

    Frequencies with |xi|^gamma within eps * lam^(gamma-beta-1) of lam^gamma
    then lie in the (lam, delta, beta) annulus. When a grid is given the
    containment is verified on the lattice and a failure raises.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if lam < 1:
        raise ValueError("lam must be at least 1")
    eps = min(0.25, gamma * delta / 2.0 ** (abs(1.0 - gamma) / gamma))
    if grid is not None:
        absxi = _abs_xi(grid, dim, period).ravel()
        half_g = eps * lam ** (gamma - beta - 1.0)
        inner = np.abs(absxi ** gamma - lam ** gamma) <= half_g
        half = delta * lam ** (-beta)
        annulus = (absxi >= lam - half) & (absxi <= lam + half)
        bad = inner & ~annulus
        if bad.any():
            raise ValueError(
                f"containment fails at |xi| = {absxi[bad][0]} for eps = {eps}"
            )
    return eps


def resolvent_constant(field: ObservationField, gamma: float, lam: float, m: float,
                       C_a: np.ndarray | None = None, kernel_tol: float = 1e-9) -> SpectralReport:
    """Smallest M with ||u||^2 <= M ||(A - lam) u||^2 + m <a u, u>.

    A = |xi|^gamma on the full frequency lattice. Exact kernel modes of
    A - lam are deflated: the value is inf if the form I - m M_a is
    positive semidefinite with coupling on the kernel, and otherwise the
    kernel is eliminated by a Schur complement before the generalized
    eigenvalue computation. Pass C_a (the full-lattice compression of the
    field) to reuse it across a lam sweep.
    """
    if m <= 0:
        raise ValueError("m must be positive")
    t0 = time.perf_counter()
    full = FrequencyMask(field.grid, field.dim, field.period, "ball", {"radius": float("inf")},
                         np.ones((field.grid,) * field.dim, dtype=bool))
    if C_a is None:
        C_a = compression_matrix(field, full, "sqrt")
    n = C_a.shape[0]
    absxi = _abs_xi(field.grid, field.dim, field.period).ravel()
    dvec = absxi ** gamma - lam
    Q = -m * C_a
    Q[np.diag_indices(n)] += 1.0
    ker = np.abs(dvec) <= kernel_tol * max(1.0, abs(lam))
    extra = {"kernel_dim": int(ker.sum()), "lam": lam, "gamma": gamma, "m": m}
    if ker.any():
        k_idx = np.where(ker)[0]
        p_idx = np.where(~ker)[0]
        Q00 = Q[np.ix_(k_idx, k_idx)]
        Q01 = Q[np.ix_(k_idx, p_idx)]
        e, V = scipy.linalg.eigh(Q00)
        if e[-1] > 1e-12:
            return SpectralReport(
                kind="resolvent-M", value=float("inf"), c=float(e[-1]), residual=0.0,
                rank=n, mask=full.describe(), field=field.describe(),
                wall_time=time.perf_counter() - t0, extra=extra,
            )
        null = np.abs(e) <= 1e-12
        if null.any():
            coupling = np.linalg.norm(V[:, null].conj().T @ Q01, axis=1)
            if np.any(coupling > 1e-10):
                return SpectralReport(
                    kind="resolvent-M", value=float("inf"), c=0.0, residual=0.0,
                    rank=n, mask=full.describe(), field=field.describe(),
                    wall_time=time.perf_counter() - t0, extra=extra,
                )
        neg = e < -1e-12
        Vn = V[:, neg]
        S = Q[np.ix_(p_idx, p_idx)] - (Q01.conj().T @ Vn) @ np.diag(1.0 / e[neg]) @ (Vn.conj().T @ Q01)
        d1 = dvec[p_idx]
    else:
        S = Q
        d1 = dvec
    scale = 1.0 / np.abs(d1)
    W = S * scale[:, None] * scale[None, :]
    vals, vecs = scipy.linalg.eigh(W, subset_by_index=[W.shape[0] - 1, W.shape[0] - 1])
    M = float(vals[0])
    v = vecs[:, 0]
    residual = float(np.linalg.norm(W @ v - M * v))
    M = max(M, 0.0)
    return SpectralReport(
        kind="resolvent-M", value=M, c=M, residual=residual, rank=n,
        mask=full.describe(), field=field.describe(),
        wall_time=time.perf_counter() - t0, extra=extra,
    )


def calibrate_m(field: ObservationField, gamma: float, lam0: float) -> float:
    """m = 2 / c with c the uncertainty eigenvalue on the ball of radius
    lam0^(1/gamma): kernel modes of any |lam| <= lam0 then satisfy
    m <a u, u> >= 2 ||u||^2, keeping the deflated form negative there."""
    radius = lam0 ** (1.0 / gamma)
    rad = aliasing_radius(field.grid, field.period)
    if radius >= rad:
        raise ValueError(f"calibration ball radius {radius} reaches the aliasing radius {rad}")
    mask = build_mask(field.grid, field.dim, field.period, "ball", radius=radius)
    rep = uncertainty_constant(field, mask, weight="sqrt")
    if rep.c <= RESIDUAL_FLOOR:
        raise ValueError("field is invisible on the calibration ball; cannot set m")
    return 2.0 / rep.c


def resolvent_sweep(field: ObservationField, gamma: float, lambdas, m: float) -> list[SpectralReport]:
    """resolvent_constant across a lam list, reusing the field compression."""
    full = FrequencyMask(field.grid, field.dim, field.period, "ball", {"radius": float("inf")},
                         np.ones((field.grid,) * field.dim, dtype=bool))
    C_a = compression_matrix(field, full, "sqrt")
    return [resolvent_constant(field, gamma, float(lam), m, C_a=C_a) for lam in lambdas]


def low_freq_extension_check(field: ObservationField, gamma: float, lam_lo: float, lam_hi: float,
                             m: float, n_points: int = 12, ceiling: float | None = None,
                             density_scale: float | None = None) -> dict:
    """Sweep M(lam) over [lam_lo, lam_hi] at fixed m and flag the maximum.

    Also measures the field's relative density at density_scale (default an
    eighth of the period) so reports show whether the boundedness premise
    holds; an unbounded or above-ceiling curve is reported, not raised.
    """
    from .geometry import relative_density_1d

    lams = np.linspace(lam_lo, lam_hi, n_points)
    reports = resolvent_sweep(field, gamma, lams, m)
    Ms = [r.value for r in reports]
    finite = [v for v in Ms if math.isfinite(v)]
    M_max = max(Ms) if Ms else float("nan")
    if density_scale is None:
        density_scale = field.period / 8.0
    if field.dim == 1:
        density = relative_density_1d((field.values, field.h), density_scale)
    else:
        density = float(field.values.mean())
    out = {
        "gamma": gamma,
        "m": m,
        "lambdas": [float(x) for x in lams],
        "M": Ms,
        "M_max": M_max,
        "all_finite": len(finite) == len(Ms),
        "density_scale": density_scale,
        "density_measured": density,
    }
    if ceiling is not None:
        out["ceiling"] = ceiling
        out["bounded"] = bool(math.isfinite(M_max) and M_max <= ceiling)
    return out
