"""Uniform cell-centered 3D grids, complex fields, discrete norms, Fourier
services and Green's-function convolution.

Grids are origin-centered cubes [-L, L]^3 sampled at cell centers
x_i = -L + (i + 1/2) h with h = 2L/n, so no node coincides with the kernel
singularity at r = 0.  The continuous-transform sign convention is
f_hat(xi) = int e^{-i xi . x} f(x) dx, fixed project-wide.

Fields are immutable inputs / freshly allocated outputs; reductions go
through numpy's pairwise summation and scipy's pocketfft, so results are
bit-reproducible run to run and independent of the FFT worker count.
"""
from __future__ import annotations

import struct
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import _kernels
from .errors import GridMismatch, KernelTabulationFailed, QuadratureNotConverged
from .greens import DEFAULT_QUAD, QuadratureConfig, cell_self_weight, phi_s_radial
from .params import ScatteringParams

_FFT_WORKERS = -1


def set_fft_workers(n: int) -> None:
    """Cap the worker threads used for FFTs (results are unaffected)."""
    global _FFT_WORKERS
    _FFT_WORKERS = int(n)


def _fftn(a):
    return sfft.fftn(a, workers=_FFT_WORKERS)


def _ifftn(a):
    return sfft.ifftn(a, workers=_FFT_WORKERS)


@dataclass(frozen=True)
class BoxGrid:
    """Cube [-L, L]^3 with n cell-centered samples per axis."""

    L: float
    n: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("box half-width L must be positive")
        if self.n < 8:
            raise ValueError("grid needs at least 8 points per axis")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self):
        return (self.n, self.n, self.n)

    @property
    def axis(self) -> np.ndarray:
        return -self.L + (np.arange(self.n) + 0.5) * self.h

    @property
    def cell_volume(self) -> float:
        return self.h ** 3

    def freq_axis(self) -> np.ndarray:
        """Physical angular frequencies xi of the periodic transform (fft order)."""
        return 2.0 * np.pi * sfft.fftfreq(self.n, d=self.h)

    def meshgrid(self):
        ax = self.axis
        return np.meshgrid(ax, ax, ax, indexing="ij")

    def radii(self) -> np.ndarray:
        x, y, z = self.meshgrid()
        return np.sqrt(x * x + y * y + z * z)

    def points(self) -> np.ndarray:
        """(n^3, 3) array of node coordinates, C order."""
        x, y, z = self.meshgrid()
        return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)


@dataclass
class ComplexField:
    """Complex samples on a BoxGrid."""

    grid: BoxGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise GridMismatch(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values.view(float))):
            raise ValueError("field contains non-finite values")

    @classmethod
    def zeros(cls, grid: BoxGrid) -> "ComplexField":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy())


@dataclass
class Potential:
    """Real bounded compactly supported samples of Q on a BoxGrid.

    The outermost two cell layers must vanish so that supp Q stays strictly
    inside the box.
    """

    grid: BoxGrid
    values: np.ndarray
    sup_norm: float = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridMismatch("potential shape does not match grid")
        rim = np.ones(self.grid.shape, dtype=bool)
        rim[2:-2, 2:-2, 2:-2] = False
        if np.any(self.values[rim] != 0.0):
            raise ValueError("potential must vanish on the outermost 2 cell layers")
        self.sup_norm = float(np.max(np.abs(self.values)))


def _smooth_step(t):
    """C^inf transition: 1 for t <= 0, 0 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        g = np.where(t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return g / (f + g)


def stock_potential(grid: BoxGrid, *, sigma: float = 0.25, r_flat: float = 0.55,
                    r_cut: float = 0.8, height: float = 1.0) -> Potential:
    """Gaussian bump exp(-|x|^2 / 2 sigma^2) smoothly truncated to |x| <= r_cut."""
    r = grid.radii()
    q = height * np.exp(-r ** 2 / (2.0 * sigma ** 2))
    q *= _smooth_step((r - r_flat) / (r_cut - r_flat))
    q[r >= r_cut] = 0.0
    return Potential(grid, q)


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def dft_forward(f: ComplexField) -> ComplexField:
    """Unitary discrete Fourier transform of the samples."""
    return ComplexField(f.grid, sfft.fftn(f.values, norm="ortho", workers=_FFT_WORKERS))


def dft_inverse(f: ComplexField) -> ComplexField:
    return ComplexField(f.grid, sfft.ifftn(f.values, norm="ortho", workers=_FFT_WORKERS))


def frac_laplacian_apply(f: ComplexField, s: float, *, ds: bool = False) -> ComplexField:
    """Spectral fractional Laplacian on the periodic extension of the box.

    Multiplies the spectrum by |xi|^{2s} (or |xi|^s when ds=True, the D^s
    half-order variant).
    """
    xi = f.grid.freq_axis()
    xi2 = xi[:, None, None] ** 2 + xi[None, :, None] ** 2 + xi[None, None, :] ** 2
    power = s if ds else 2.0 * s
    mult = xi2 ** (power / 2.0)
    if xi2.flat[0] == 0.0:
        mult.flat[0] = 0.0
    return ComplexField(f.grid, _ifftn(mult * _fftn(f.values)))


def fourier_at_many(obj, xis) -> np.ndarray:
    """Continuous transform int e^{-i xi . x} f(x) dx by midpoint rule, batched.

    Exact consistency with the reconstruction lattice: at lattice frequencies
    this equals the phased DFT of the samples.
    """
    grid, vals = obj.grid, np.asarray(obj.values, dtype=complex)
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    ax = grid.axis
    px = np.exp(-1j * np.outer(xis[:, 0], ax))
    py = np.exp(-1j * np.outer(xis[:, 1], ax))
    pz = np.exp(-1j * np.outer(xis[:, 2], ax))
    return grid.cell_volume * _kernels.phase_sums(vals, px, py, pz)


def fourier_at(obj, xi) -> complex:
    return complex(fourier_at_many(obj, np.asarray(xi, dtype=float)[None, :])[0])


def lp_norm(f, p) -> float:
    """Grid L^p norm (sum |v|^p h^3)^{1/p}; max |v| for p = inf."""
    vals = f.values if hasattr(f, "values") else np.asarray(f)
    grid = f.grid if hasattr(f, "grid") else None
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(vals)))
    if grid is None:
        raise ValueError("p < inf norm needs a field with a grid")
    return float((np.sum(np.abs(vals) ** p) * grid.cell_volume) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Green's-function convolution
# ---------------------------------------------------------------------------

_KERNEL_CACHE_MAX = 12  # weight-FFT arrays are O((F+1)^3 n^3); keep a short LRU
_kernel_cache: OrderedDict = OrderedDict()


def clear_kernel_cache() -> None:
    _kernel_cache.clear()


def _green_weight_fft(params: ScatteringParams, grid: BoxGrid, out_factor: int,
                      quad_cfg: QuadratureConfig, method: str):
    """FFT of the convolution weights on the enlarged circulant grid.

    Weights are Phi_s(|offset|) h^3 at nonzero offsets and the cell-averaged
    self weight at the origin.  Offsets are laid out mod M = (out_factor+1) n
    so the circular convolution reproduces the exact linear one on the
    out_factor-enlarged output box.
    """
    key = (round(params.s, 14), round(params.k, 14), params.branch,
           grid.n, round(grid.L, 14), out_factor, method,
           quad_cfg.laplace_nodes, quad_cfg.panels, round(quad_cfg.pv_window, 14),
           round(quad_cfg.tail_cut, 14))
    hit = _kernel_cache.get(key)
    if hit is not None:
        _kernel_cache.move_to_end(key)
        return hit

    n, h = grid.n, grid.h
    M = (out_factor + 1) * n
    idx = np.arange(M)
    off = (idx + M // 2) % M - M // 2
    d2 = (off[:, None, None] ** 2 + off[None, :, None] ** 2
          + off[None, None, :] ** 2).astype(np.int64)
    uniq, inv = np.unique(d2, return_inverse=True)
    radii = h * np.sqrt(uniq[1:].astype(float))
    try:
        vals, errs, _ = phi_s_radial(radii, params, quad_cfg, method=method)
    except QuadratureNotConverged as exc:
        raise KernelTabulationFailed(str(exc)) from exc
    if not np.all(np.isfinite(vals)):
        raise KernelTabulationFailed("non-finite kernel sample")
    table = np.empty(len(uniq), dtype=complex)
    table[1:] = vals * grid.cell_volume
    table[0] = cell_self_weight(params, h, quad_cfg)
    weights = table[inv].reshape(M, M, M)
    what = _fftn(weights)
    _kernel_cache[key] = what
    while len(_kernel_cache) > _KERNEL_CACHE_MAX:
        _kernel_cache.popitem(last=False)
    return what


def convolve_green(f: ComplexField, params: ScatteringParams,
                   quad_cfg: QuadratureConfig = DEFAULT_QUAD, *,
                   out_factor: int = 1, method: str = "auto") -> ComplexField:
    """u(x) = int Phi_s(|x-y|) f(y) dy on grid nodes by zero-padded FFT.

    With out_factor > 1 the output is returned on the enlarged box
    [-F L, F L]^3 (same spacing); the transform size (F+1) n guarantees the
    circular convolution equals the exact linear one everywhere on it.
    """
    grid = f.grid
    n = grid.n
    F = int(out_factor)
    if F < 1:
        raise ValueError("out_factor must be >= 1")
    if F > 1 and ((F - 1) * n) % 2:
        raise ValueError("out_factor requires (F-1)*n even")
    what = _green_weight_fft(params, grid, F, quad_cfg, method)
    M = (F + 1) * n
    pad = np.zeros((M, M, M), dtype=complex)
    o = (F - 1) * n // 2
    pad[o:o + n, o:o + n, o:o + n] = f.values
    conv = _ifftn(what * _fftn(pad))
    out_grid = BoxGrid(F * grid.L, F * n) if F > 1 else grid
    return ComplexField(out_grid, np.ascontiguousarray(conv[:F * n, :F * n, :F * n]))


def crop_center(f: ComplexField, target: BoxGrid) -> ComplexField:
    """Restrict a field on an enlarged box to the centered target grid.

    Requires equal spacing and aligned cell centers ((n_src - n_target) even).
    """
    src = f.grid
    if abs(src.h - target.h) > 1e-12 * target.h:
        raise GridMismatch("crop requires equal grid spacing")
    d = src.n - target.n
    if d < 0 or d % 2:
        raise GridMismatch("crop requires (n_src - n_target) even and nonnegative")
    o = d // 2
    sl = slice(o, o + target.n)
    return ComplexField(target, np.ascontiguousarray(f.values[sl, sl, sl]))


# ---------------------------------------------------------------------------
# annulus averages
# ---------------------------------------------------------------------------

def annulus_l2_average(point_evaluator, R: float, k: float, *, nodes: int = 8):
    """(1/R int_{1<|x|<R} |u|^2 dx)^{1/2} by product shell quadrature.

    `point_evaluator` maps an (P, 3) array to P complex values.  Radial
    panels track the oscillation scale of k.  Returns (value, est_error)
    with the error from a coarse/fine quadrature difference.
    """
    if R <= 1:
        raise ValueError("annulus average needs R > 1")

    def estimate(order, rad_scale):
        from .waves import sphere_quadrature
        sq = sphere_quadrature(order)
        n_pan = max(4, int(np.ceil((R - 1.0) * k / np.pi * rad_scale)))
        x0, w0 = np.polynomial.legendre.leggauss(4)
        edges = np.linspace(1.0, R, n_pan + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        radii = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
        wr = (half[:, None] * w0[None, :]).ravel()
        pts = radii[:, None, None] * sq.nodes[None, :, :]
        vals = point_evaluator(pts.reshape(-1, 3)).reshape(len(radii), -1)
        shell = np.abs(vals) ** 2 @ sq.weights
        return float(np.sqrt(np.dot(wr, shell * radii ** 2) / R))

    fine = estimate(nodes, 1.0)
    coarse = estimate(max(2, nodes // 2), 0.6)
    return fine, abs(fine - coarse)


# ---------------------------------------------------------------------------
# field file format
# ---------------------------------------------------------------------------

_MAGIC = b"FHF1"


def write_field(path, f: ComplexField, meta: dict | None = None) -> None:
    """Binary field file: 'FHF1', three u32 LE dims, L as f64 LE, then
    interleaved re/im f64 LE in C order (z fastest).  Metadata goes to a
    plain `key = value` sidecar at path + '.meta'.
    """
    path = str(path)
    vals = np.ascontiguousarray(f.values, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", *f.grid.shape))
        fh.write(struct.pack("<d", f.grid.L))
        if vals.dtype.byteorder not in ("<", "="):
            vals = vals.astype("<c16")
        fh.write(vals.tobytes())
    if meta is not None:
        lines = [f"{key} = {value}" for key, value in meta.items()]
        with open(path + ".meta", "w") as fh:
            fh.write("\n".join(lines) + "\n")


def read_field(path):
    """Read a field file; returns (ComplexField, meta dict or {})."""
    path = str(path)
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a FHF1 field file")
        nx, ny, nz = struct.unpack("<III", fh.read(12))
        (L,) = struct.unpack("<d", fh.read(8))
        raw = fh.read(nx * ny * nz * 16)
    vals = np.frombuffer(raw, dtype="<c16").reshape(nx, ny, nz).copy()
    if not (nx == ny == nz):
        raise ValueError("only cubic fields are supported")
    meta = {}
    try:
        with open(path + ".meta") as fh:
            for line in fh:
                if "=" in line:
                    key, _, value = line.partition("=")
                    meta[key.strip()] = value.strip()
    except FileNotFoundError:
        pass
    return ComplexField(BoxGrid(L, nx), vals), meta
