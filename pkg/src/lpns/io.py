"""Binary snapshots and the flat key = value config format."""
import os
import struct
from pathlib import Path

import numpy as np

from .solver import SolverState
from .spectral import SpectralField, make_grid

MAGIC = b"LPNS"
VERSION = 1
HEADER = struct.Struct("<4sIIdd16x")
HEADER_SIZE = HEADER.size  # 44
PAYLOAD_DTYPE = np.dtype("<c16")


class SnapshotError(OSError):
    pass


def snapshot_size(n):
    return HEADER_SIZE + 3 * n**3 * PAYLOAD_DTYPE.itemsize


def write_snapshot(path, state):
    u = state.u
    n = u.grid.n
    header = HEADER.pack(MAGIC, VERSION, n, float(state.nu), float(state.t))
    payload = np.ascontiguousarray(u.coeffs, dtype=PAYLOAD_DTYPE).tobytes()
    path = Path(path)
    tmp = path.with_name(path.name + ".part")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    os.replace(tmp, path)
    return path


def read_snapshot(path, step_count=0):
    path = Path(path)
    data = path.read_bytes()
    if len(data) < HEADER_SIZE:
        raise SnapshotError(f"{path}: file is {len(data)} bytes, shorter than the {HEADER_SIZE}-byte header")
    magic, version, n, nu, t = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: snapshot version {version} unsupported (expected {VERSION})")
    expected = snapshot_size(n) - HEADER_SIZE
    actual = len(data) - HEADER_SIZE
    if actual != expected:
        raise SnapshotError(f"{path}: payload has {actual} bytes, expected {expected} for n={n}")
    try:
        grid = make_grid(n)
    except ValueError as exc:
        raise SnapshotError(f"{path}: {exc}") from exc
    coeffs = np.frombuffer(data, dtype=PAYLOAD_DTYPE, offset=HEADER_SIZE).reshape(3, n, n, n)
    u = SpectralField(grid, coeffs.astype(np.complex128), divergence_free=True, dealiased=True)
    return SolverState(u, t, nu, step_count)


def snapshot_name(step):
    return f"snap_{step:08d}.lpns"


def list_snapshots(directory):
    """Snapshot paths in directory, ordered by step number."""
    directory = Path(directory)
    if not directory.is_dir():
        raise SnapshotError(f"snapshot directory {directory} does not exist")
    return sorted(directory.glob("snap_*.lpns"))


# -- flat config ---------------------------------------------------------------


class ConfigError(ValueError):
    pass


def parse_config_text(text, source="<config>"):
    """Parse `key = value` lines; '#' starts a comment.  Values stay strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


def read_config_file(path):
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


def read_key_values(path):
    """run_meta.txt and config files share the same format."""
    return read_config_file(path)


def write_key_values(path, items):
    lines = [f"{k} = {v}" for k, v in items]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
