"""Initial conditions.

Random fields draw every coefficient from a counter-based hash keyed on
(seed, wavevector, component), so the same seed gives the same modes on any
grid large enough to hold them.
"""
import numpy as np

from .spectral import VOLUME, SpectralField, leray_coeffs

RNG_NAME = "splitmix64-counter"

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_OFF = 1 << 20


def splitmix64(x):
    """SplitMix64 finalizer applied elementwise to uint64 input."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def counter_uniform(seed, key, slot):
    """Uniform doubles in [0, 1) from (seed, key, slot); pure function of its inputs."""
    s = splitmix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    with np.errstate(over="ignore"):
        x = np.asarray(key, dtype=np.uint64) * np.uint64(16) + np.uint64(slot)
    h = splitmix64(splitmix64(x) ^ s)
    return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _wave_keys(kx, ky, kz):
    return (
        ((kx.astype(np.int64) + _OFF) << 42) | ((ky.astype(np.int64) + _OFF) << 21) | (kz.astype(np.int64) + _OFF)
    ).astype(np.uint64)


def _gaussian(seed, key, slot):
    u1 = 1.0 - counter_uniform(seed, key, 2 * slot)
    u2 = counter_uniform(seed, key, 2 * slot + 1)
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2 * np.pi * u2) + 1j * r * np.sin(2 * np.pi * u2)


def ic_taylor_green(grid, amplitude=1.0):
    """A (sin x cos y, -cos x sin y, 0), set directly on its eight modes."""
    n = grid.n
    c = np.zeros((3, n, n, n), dtype=np.complex128)
    for s1 in (1, -1):
        for s2 in (1, -1):
            c[0, s1 % n, s2 % n, 0] = -0.25j * s1 * amplitude
            c[1, s1 % n, s2 % n, 0] = 0.25j * s2 * amplitude
    return SpectralField(grid, c, divergence_free=True, dealiased=True)


def ic_random_spectrum(grid, seed=0, slope=-5.0 / 3.0, k_peak=4.0):
    """Random solenoidal field with |u(k)| ~ |k|^{s/2} exp(-(|k|/k_peak)^2), ||u||_2 = 1."""
    if not 0 < k_peak < grid.n / 3:
        raise ValueError(f"k_peak must lie in (0, n/3), got {k_peak}")
    kx, ky, kz = grid.k
    kabs = grid.kabs
    keys = _wave_keys(kx, ky, kz)
    mkeys = _wave_keys(-kx, -ky, -kz)
    c = np.empty((3,) + kabs.shape, dtype=np.complex128)
    for i in range(3):
        c[i] = _gaussian(seed, keys, i) + np.conj(_gaussian(seed, mkeys, i))
    amp = np.zeros_like(kabs)
    nz = kabs > 0
    amp[nz] = kabs[nz] ** (slope / 2.0) * np.exp(-((kabs[nz] / k_peak) ** 2))
    c *= amp * grid.dealias_mask
    c = leray_coeffs(c, grid.k, grid.k2)
    c[:, 0, 0, 0] = 0.0
    norm = np.sqrt(VOLUME * np.sum(np.abs(c) ** 2))
    if norm > 0:
        c /= norm
    return SpectralField(grid, c, divergence_free=True, dealiased=True)


IC_BUILDERS = {"taylor-green": ic_taylor_green, "random": ic_random_spectrum}
