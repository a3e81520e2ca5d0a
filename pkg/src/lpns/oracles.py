"""Slow reference computations: direct DFT sums and explicit convolutions.

These avoid the FFT path entirely and are only meant for small grids
(n <= 16).  They back the verify subcommand and the test-suite.
"""
import numpy as np

TWO_PI = 2.0 * np.pi


def _wavenumbers(n):
    return np.fft.fftfreq(n, 1.0 / n)


def _mode_list(n):
    k = _wavenumbers(n)
    kx, ky, kz = np.meshgrid(k, k, k, indexing="ij")
    return np.stack([kx.ravel(), ky.ravel(), kz.ravel()], axis=1)


def _point_list(n):
    x = TWO_PI * np.arange(n) / n
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)


def dft_matrix(n):
    """E[x, k] = exp(i k . x) over the n^3 grid points and modes (n^6 entries)."""
    if n > 16:
        raise ValueError("direct DFT oracle limited to n <= 16")
    return np.exp(1j * _point_list(n) @ _mode_list(n).T)


def direct_synthesis(coeffs):
    """u(x) = sum_k u_hat(k) exp(i k . x), component by component."""
    n = coeffs.shape[-1]
    E = dft_matrix(n)
    return np.stack([(E @ c.ravel()).reshape(n, n, n) for c in coeffs])


def direct_analysis(values):
    """u_hat(k) = n^-3 sum_x u(x) exp(-i k . x)."""
    n = values.shape[-1]
    E = dft_matrix(n)
    return np.stack([(E.conj().T @ v.ravel().astype(complex)).reshape(n, n, n) / n**3 for v in values])


def _dealiased_modes(n):
    k = _mode_list(n)
    keep = np.all(3 * np.abs(k) <= n, axis=1)
    return k[keep].astype(int)


def _index(k, n):
    return tuple((k % n).T.astype(int))


def convolution_advection(coeffs):
    """(u . grad) u by explicit triad sums over dealiased modes, truncated to the dealiased set.

    N_hat(k) = sum_{p + q = k} (u_hat(p) . i q) u_hat(q).
    """
    n = coeffs.shape[-1]
    modes = _dealiased_modes(n)
    amp = coeffs[(slice(None),) + _index(modes, n)].T  # (M, 3)
    out = np.zeros_like(coeffs, dtype=complex)
    M = len(modes)
    # u(p) . i q for every pair (p, q)
    dot = 1j * amp @ modes.T.astype(float)  # (M_p, M_q)
    for a in range(M):
        k = modes[a] + modes
        keep = np.all(3 * np.abs(k) <= n, axis=1)
        if not np.any(keep):
            continue
        contrib = dot[a, keep][:, None] * amp[keep]  # (., 3)
        idx = _index(k[keep], n)
        for i in range(3):
            np.add.at(out[i], idx, contrib[:, i])
    return out


def pairing(nhat, coeffs, symbol):
    return float(TWO_PI**3 * np.real(np.sum(np.conj(nhat) * symbol * coeffs)))


def direct_product_coeffs(a, b):
    """Fourier coefficients of a_i b_j on the doubled-range mode set, by convolution.

    Returns a dict mapping integer wavevector tuples to 3x3 complex matrices.
    """
    n = a.shape[-1]
    modes = _mode_list(n).astype(int)
    amp_a = a[(slice(None),) + _index(modes, n)].T
    amp_b = b[(slice(None),) + _index(modes, n)].T
    nz_a = np.flatnonzero(np.any(amp_a != 0, axis=1))
    nz_b = np.flatnonzero(np.any(amp_b != 0, axis=1))
    out = {}
    for ia in nz_a:
        for ib in nz_b:
            k = tuple(modes[ia] + modes[ib])
            term = np.outer(amp_a[ia], amp_b[ib])
            if k in out:
                out[k] = out[k] + term
            else:
                out[k] = term
    return out


def synthesize_sparse(table, m):
    """Values on an m^3 grid of sum_k T(k) exp(i k . x) for a sparse dict of 3x3 matrices."""
    x = TWO_PI * np.arange(m) / m
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    out = np.zeros((3, 3, m, m, m), dtype=complex)
    for k, T in table.items():
        ph = np.exp(1j * (k[0] * X + k[1] * Y + k[2] * Z))
        out += T[:, :, None, None, None] * ph
    return out.real


def taylor_green_coeffs(n, amplitude=1.0, decay=1.0):
    c = np.zeros((3, n, n, n), dtype=complex)
    for s1 in (1, -1):
        for s2 in (1, -1):
            c[0, s1 % n, s2 % n, 0] = -0.25j * s1 * amplitude * decay
            c[1, s1 % n, s2 % n, 0] = 0.25j * s2 * amplitude * decay
    return c


def taylor_green_values(n, amplitude=1.0):
    x = TWO_PI * np.arange(n) / n
    X, Y, _ = np.meshgrid(x, x, x, indexing="ij")
    return amplitude * np.stack([np.sin(X) * np.cos(Y), -np.cos(X) * np.sin(Y), 0 * X])
