"""Checkpoints, snapshot tables and the diagnostics CSV."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"MCPS1"
VERSION = 1
# magic, version, N, lmax, t, step, config digest
_HEADER = struct.Struct("<5sIIIdQ32s")


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class Checkpoint:
    phi: np.ndarray
    u: np.ndarray
    t: float
    step: int
    digest: bytes

    @property
    def n(self) -> int:
        return self.phi.shape[0]


def save_checkpoint(path, ck: Checkpoint, lmax: int) -> None:
    """Little-endian float64 blocks, phi (N x (lmax+1)^2, mode order) then u."""
    nm = (lmax + 1) ** 2
    if ck.phi.shape != (ck.n, nm) or ck.u.shape != (nm,):
        raise CheckpointError("coefficient shapes do not match lmax")
    if len(ck.digest) != 32:
        raise CheckpointError("config digest must be 32 bytes")
    head = _HEADER.pack(MAGIC, VERSION, ck.n, lmax, float(ck.t), int(ck.step), ck.digest)
    body = np.ascontiguousarray(ck.phi, dtype="<f8").tobytes() + np.ascontiguousarray(ck.u, dtype="<f8").tobytes()
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(head + body)
    tmp.replace(path)


def load_checkpoint(path) -> tuple[Checkpoint, int]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated header")
    magic, version, n, lmax, t, step, digest = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (magic {magic!r})")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    nm = (lmax + 1) ** 2
    need = _HEADER.size + 8 * nm * (n + 1)
    if len(data) != need:
        raise CheckpointError(f"{path}: expected {need} bytes, found {len(data)}")
    arr = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(float)
    phi = arr[: n * nm].reshape(n, nm)
    u = arr[n * nm:]
    return Checkpoint(phi, u, t, step, digest), lmax


# ----------------------------------------------------------------------
# diagnostics CSV


def diagnostics_columns(n: int) -> list[str]:
    return (["t", "E_total", "E_H", "E_CH", "diss_phi", "diss_u", "energy_residual"]
            + [f"mass_{i + 1}" for i in range(n)]
            + ["sum_violation", "min_phi", "max_phi", "sep_delta", "u_l01_leak"]
            + [f"mean_w_{i + 1}" for i in range(n)]
            + ["steady_residual"])


class DiagnosticsWriter:
    """Appends rows; on resume, rows later than the restart time are dropped first."""

    def __init__(self, path, n: int, resume_t: float | None = None):
        self.path = Path(path)
        self.columns = diagnostics_columns(n)
        if resume_t is not None and self.path.exists():
            with open(self.path, newline="") as fh:
                rows = list(csv.reader(fh))
            keep = [r for r in rows[1:] if float(r[0]) <= resume_t * (1 + 1e-12) + 1e-15]
            self._write_all([self.columns] + keep)
        else:
            self._write_all([self.columns])

    def _write_all(self, rows) -> None:
        with open(self.path, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)

    def append(self, row: dict) -> None:
        with open(self.path, "a", newline="") as fh:
            csv.writer(fh).writerow([_fmt(row[c]) for c in self.columns])


def _fmt(x) -> str:
    return repr(float(x))


def read_diagnostics(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    cols = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]]).reshape(-1, len(cols))
    return {c: data[:, j] for j, c in enumerate(cols)}


# ----------------------------------------------------------------------
# snapshots


def write_snapshot(path, t: float, lmax: int, theta, lon, u_vals, phi_vals) -> None:
    """One row per grid point: colatitude, longitude, u, phi_1..phi_N."""
    th, ph = np.meshgrid(theta, lon, indexing="ij")
    cols = [th.ravel(), ph.ravel(), np.asarray(u_vals).ravel()] + [np.asarray(p).ravel() for p in phi_vals]
    table = np.column_stack(cols)
    n = len(phi_vals)
    header = (f"t = {t!r}\nlmax = {lmax}\ngrid = {len(theta)} x {len(lon)}\n"
              + "colatitude longitude u " + " ".join(f"phi_{i + 1}" for i in range(n)))
    np.savetxt(path, table, fmt="%.17g", header=header, comments="# ")


def read_snapshot(path) -> tuple[dict, np.ndarray]:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body:
                k, v = (s.strip() for s in body.split("=", 1))
                meta[k] = v
    return meta, np.loadtxt(path, comments="#")
