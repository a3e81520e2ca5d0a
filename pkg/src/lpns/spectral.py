"""Periodic vector fields on [0, 2pi)^3 stored as Fourier coefficients.

Convention: u(x) = sum_k u_hat(k) exp(i k.x), so Parseval reads
sum_x |u(x)|^2 w = (2 pi)^3 sum_k |u_hat(k)|^2 with w = (2 pi / n)^3.
Coefficient cubes use DFT index order: k_j = idx_j for idx_j < n/2,
idx_j - n otherwise.
"""
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import _fft

TWO_PI = 2.0 * np.pi
VOLUME = TWO_PI**3


class FieldError(ValueError):
    """Malformed grid or field."""


@dataclass(frozen=True)
class Grid:
    n: int

    @property
    def h(self):
        return TWO_PI / self.n

    @property
    def weight(self):
        return self.h**3

    @property
    def kmax(self):
        return self.n // 2 - 1

    @property
    def nhalf(self):
        return self.n // 2 + 1

    @cached_property
    def wavenumbers(self):
        """Integer wavenumbers along one axis in DFT order."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(np.int64)

    @cached_property
    def k(self):
        """Broadcastable (kx, ky, kz) integer arrays for the full cube."""
        kk = self.wavenumbers.astype(np.float64)
        return (kk[:, None, None], kk[None, :, None], kk[None, None, :])

    @cached_property
    def k_half(self):
        kk = self.wavenumbers.astype(np.float64)
        kz = np.arange(self.nhalf, dtype=np.float64)
        return (kk[:, None, None], kk[None, :, None], kz[None, None, :])

    @cached_property
    def ik_half(self):
        return tuple(1j * kj for kj in self.k_half)

    @cached_property
    def k2(self):
        kx, ky, kz = self.k
        return kx**2 + ky**2 + kz**2

    @cached_property
    def k2_half(self):
        kx, ky, kz = self.k_half
        return kx**2 + ky**2 + kz**2

    @cached_property
    def kabs(self):
        return np.sqrt(self.k2)

    @cached_property
    def dealias_mask(self):
        kx, ky, kz = self.k
        n = self.n
        return (3 * np.abs(kx) <= n) & (3 * np.abs(ky) <= n) & (3 * np.abs(kz) <= n)

    @cached_property
    def dealias_mask_half(self):
        return self.dealias_mask[..., : self.nhalf]

    def coords(self):
        x = np.arange(self.n) * self.h
        return np.meshgrid(x, x, x, indexing="ij")


@lru_cache(maxsize=None)
def make_grid(n):
    if isinstance(n, bool) or int(n) != n:
        raise FieldError(f"grid size must be an integer, got {n!r}")
    n = int(n)
    if n < 8 or n > 512 or n & (n - 1):
        raise FieldError(f"grid size must be a power of two in [8, 512], got {n}")
    return Grid(n)


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coeffs: np.ndarray
    divergence_free: bool = False
    dealiased: bool = False

    def __post_init__(self):
        n = self.grid.n
        c = np.asarray(self.coeffs)
        if c.shape != (3, n, n, n):
            raise FieldError(f"coefficient cube must have shape (3, {n}, {n}, {n}), got {c.shape}")
        if not np.iscomplexobj(c):
            c = c.astype(np.complex128)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def half(self):
        return self.coeffs[..., : self.grid.nhalf]

    def replace(self, coeffs, divergence_free=None, dealiased=None):
        return SpectralField(
            self.grid,
            coeffs,
            self.divergence_free if divergence_free is None else divergence_free,
            self.dealiased if dealiased is None else dealiased,
        )

    def __add__(self, other):
        return SpectralField(
            self.grid,
            self.coeffs + other.coeffs,
            self.divergence_free and other.divergence_free,
            self.dealiased and other.dealiased,
        )

    def __sub__(self, other):
        return SpectralField(
            self.grid,
            self.coeffs - other.coeffs,
            self.divergence_free and other.divergence_free,
            self.dealiased and other.dealiased,
        )

    def scale(self, a):
        return self.replace(self.coeffs * a)


@dataclass(frozen=True, eq=False)
class PhysicalField:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.grid.n
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (3, n, n, n):
            raise FieldError(f"values must have shape (3, {n}, {n}, {n}), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise FieldError("physical field has non-finite entries")
        object.__setattr__(self, "values", v)


def zeros(grid):
    return SpectralField(grid, np.zeros((3,) + (grid.n,) * 3, complex), True, True)


def expand_half(half, n):
    """Rebuild the full Hermitian cube from its rfft half (last axis)."""
    nh = n // 2 + 1
    full = np.empty(half.shape[:-1] + (n,), dtype=np.complex128)
    full[..., :nh] = half
    neg = (-np.arange(n)) % n
    mirrored = half[..., neg, :, :][..., :, neg, :]
    full[..., nh:] = np.conj(mirrored[..., n - np.arange(nh, n)])
    return full


def to_physical(u):
    return PhysicalField(u.grid, _fft.synth(u.half, u.grid.n))


def to_spectral(v):
    return SpectralField(v.grid, expand_half(_fft.analyze(v.values), v.grid.n))


def physical_values(coeffs_half, n):
    """Real samples of one or more half-spectrum cubes on the n^3 grid."""
    return _fft.synth(coeffs_half, n)


def leray_coeffs(c, k, k2):
    k2 = np.where(k2 == 0, 1.0, k2)
    ratio = k[0] * c[0]
    ratio += k[1] * c[1]
    ratio += k[2] * c[2]
    ratio /= k2
    out = np.empty(np.broadcast_shapes(c.shape, (3,) + ratio.shape), dtype=np.complex128)
    for i in range(3):
        np.subtract(c[i], k[i] * ratio, out=out[i])
    return out


def leray_project(u):
    g = u.grid
    return u.replace(leray_coeffs(u.coeffs, g.k, g.k2), divergence_free=True)


def divergence_defect(u):
    """max_k |k . u_hat(k)| / max_k |u_hat(k)|; 0 for the zero field."""
    k = u.grid.k
    c = u.coeffs
    top = np.abs(c).max()
    if top == 0:
        return 0.0
    return float(np.abs(k[0] * c[0] + k[1] * c[1] + k[2] * c[2]).max() / top)


def dealias(u):
    return u.replace(u.coeffs * u.grid.dealias_mask, dealiased=True)


def gradient(u):
    """Spectral cube of shape (3, 3, n, n, n) with [i, j] = d_i u_j."""
    k = u.grid.k
    return np.stack([1j * k[i] * u.coeffs for i in range(3)])


def _advection_half(half, grid):
    n = grid.n
    stacked = np.empty((12,) + half.shape[1:], dtype=np.complex128)
    stacked[:3] = half
    for j, kj in enumerate(grid.ik_half):
        np.multiply(kj, half, out=stacked[3 + 3 * j : 6 + 3 * j])
    phys = _fft.synth(stacked, n, copy=False)
    vel = phys[:3]
    prod = vel[0] * phys[3:6]  # phys[3 + 3j + i] = d_j u_i
    prod += vel[1] * phys[6:9]
    prod += vel[2] * phys[9:12]
    return _fft.analyze(prod, grid.dealias_mask_half)


_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def _conservative_half(half, grid):
    """Dealiased div(u (x) u), equal to (u.grad)u when div u = 0."""
    n = grid.n
    vel = _fft.synth(half, n, copy=False)
    prods = np.empty((6, n, n, n))
    for a, (i, j) in enumerate(_PAIRS):
        np.multiply(vel[i], vel[j], out=prods[a])
    t = _fft.analyze(prods, grid.dealias_mask_half)
    ikx, iky, ikz = grid.ik_half
    out = np.empty((3,) + t.shape[1:], dtype=np.complex128)
    out[0] = ikx * t[0] + iky * t[3] + ikz * t[4]
    out[1] = ikx * t[3] + iky * t[1] + ikz * t[5]
    out[2] = ikx * t[4] + iky * t[5] + ikz * t[2]
    return out


def nonlinear_advection(u):
    """Dealiased pseudo-spectral (u.grad)u; not Leray-projected."""
    n = u.grid.n
    half = _advection_half(u.half, u.grid)
    return SpectralField(u.grid, expand_half(half, n), divergence_free=False, dealiased=True)


def _pad_axis(a, axis, m):
    n = a.shape[axis]
    big = m * n
    shape = list(a.shape)
    shape[axis] = big
    out = np.zeros(shape, dtype=np.complex128)
    a = np.moveaxis(a, axis, 0)
    o = np.moveaxis(out, axis, 0)
    h = n // 2
    o[:h] = a[:h]
    o[big - h + 1 :] = a[h + 1 :]
    # Nyquist coefficient is split evenly between +n/2 and -n/2.
    o[h] = 0.5 * a[h]
    o[big - h] = 0.5 * a[h]
    return out


def padded_half(coeffs, m):
    """Zero-pad full cubes (..., n, n, n) to the rfft half of an (m n)^3 grid."""
    if m == 1:
        return coeffs[..., : coeffs.shape[-1] // 2 + 1]
    n = coeffs.shape[-1]
    big = m * n
    h = n // 2
    # The -n/2 half of the z-Nyquist split lives in the mirrored (implicit) half.
    z = np.zeros(coeffs.shape[:-1] + (big // 2 + 1,), dtype=np.complex128)
    z[..., :h] = coeffs[..., :h]
    z[..., h] = 0.5 * coeffs[..., h]
    a = _pad_axis(z, -3, m)
    return _pad_axis(a, -2, m)


def oversampled_values(coeffs, m):
    """Real samples on the (m n)^3 grid of full cubes (..., n, n, n)."""
    return _fft.synth(padded_half(coeffs, m), m * coeffs.shape[-1])


def _check_oversample(m):
    if m not in (1, 2, 4):
        raise FieldError(f"oversample must be 1, 2 or 4, got {m}")


def lp_of_magnitude(mag, m, weight):
    if np.isinf(m):
        return float(mag.max()) if mag.size else 0.0
    return float((np.sum(mag**m) * weight) ** (1.0 / m))


def _check_exponent(m):
    m = float(m)
    if not (m >= 1.0):
        raise FieldError(f"Lebesgue exponent must be >= 1 or inf, got {m}")
    return m


def norm_lp(u, m=2, oversample=2):
    m = _check_exponent(m)
    _check_oversample(oversample)
    vals = oversampled_values(u.coeffs, oversample)
    mag = np.sqrt(np.sum(vals**2, axis=0))
    w = (TWO_PI / (oversample * u.grid.n)) ** 3
    return lp_of_magnitude(mag, m, w)


def grad_sup(coeffs, grid, oversample=2):
    """max_x of the Frobenius norm of grad u, sampled on the oversampled grid."""
    n = grid.n
    k = grid.k
    g = np.empty((3,) + coeffs.shape, dtype=np.complex128)
    for i in range(3):
        np.multiply(1j * k[i], coeffs, out=g[i])
    vals = _fft.synth(padded_half(g.reshape((-1, n, n, n)), oversample), oversample * n, copy=False)
    return float(np.sqrt(np.einsum("i...,i...->...", vals, vals).max()))


def energy(u):
    """||u||_2^2 via Parseval."""
    return float(VOLUME * np.sum(np.abs(u.coeffs) ** 2))


def enstrophy(u):
    """||grad u||_2^2 via Parseval."""
    return float(VOLUME * np.sum(u.grid.k2 * np.abs(u.coeffs) ** 2))


def norm_hs(u, s):
    if not -2.0 <= s <= 4.0:
        raise FieldError(f"Sobolev index must lie in [-2, 4], got {s}")
    k2 = u.grid.k2
    nz = k2 > 0
    weight = np.zeros_like(k2)
    weight[nz] = k2[nz] ** s
    return float(np.sqrt(VOLUME * np.sum(weight * np.abs(u.coeffs) ** 2)))


def inner(a, b):
    """L^2 inner product of two spectral fields (real part), via Parseval."""
    return float(VOLUME * np.real(np.sum(np.conj(a.coeffs) * b.coeffs)))


def from_physical_function(grid, func):
    """Sample func(x, y, z) -> (u1, u2, u3) on the grid and transform."""
    x, y, z = grid.coords()
    vals = np.stack([np.broadcast_to(c, x.shape) for c in func(x, y, z)]).astype(float)
    return to_spectral(PhysicalField(grid, vals))
