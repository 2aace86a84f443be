"""Checkpoint container for ensemble runs.

Layout: 8-byte magic, little-endian u32 version, u64 JSON header length,
JSON header (grid metadata, seed, config hash, completed-trajectory bitmap,
array manifest), raw float64 array payload, sha256 over everything before
the digest.  Resuming requires the same master seed, grid and config hash,
and reproduces accumulators bitwise because commits happen in index order.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct

import numpy as np

MAGIC = b"ATLASCK\x01"
VERSION = 2


class CheckpointError(RuntimeError):
    """Corrupt, mismatched or unreadable checkpoint."""


def _bitmap(committed: int, total: int) -> str:
    bits = bytearray((total + 7) // 8)
    for i in range(committed):
        bits[i >> 3] |= 1 << (i & 7)
    return bytes(bits).hex()


def _bitmap_prefix(hexmap: str, total: int) -> int:
    bits = bytes.fromhex(hexmap)
    n = 0
    for i in range(total):
        if bits[i >> 3] >> (i & 7) & 1:
            if i != n:
                raise CheckpointError("trajectory bitmap is not a prefix; "
                                      "cannot resume in-order accumulation")
            n += 1
    return n


def save(path: str, series, total_trajectories: int, committed: int):
    arrays = {
        "power_sum": series.power_sum,
        "power_sumsq": series.power_sumsq,
        "trapped_sum": series.trapped_sum,
        "beam_sum": series.beam_sum,
        "times": series.times,
    }
    header = {
        "version": VERSION,
        "grid": series.grid_meta,
        "momentum_pad": series.momentum_pad,
        "vacuum_cell": series.vacuum_cell,
        "mode": series.mode,
        "master_seed": series.master_seed,
        "config_hash": series.config_hash,
        "count": series.count,
        "committed": committed,
        "total_trajectories": total_trajectories,
        "excluded": list(series.excluded),
        "bitmap": _bitmap(committed, total_trajectories),
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
    }
    head = json.dumps(header, sort_keys=True).encode()
    blob = MAGIC + struct.pack("<IQ", VERSION, len(head)) + head
    for v in arrays.values():
        blob += np.ascontiguousarray(v, dtype=np.float64).tobytes()
    digest = hashlib.sha256(blob).digest()
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob + digest)
    os.replace(tmp, path)


def read_header(path: str) -> dict:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 12 + 32 or blob[:len(MAGIC)] != MAGIC:
        raise CheckpointError("not a checkpoint file")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError("checksum mismatch: checkpoint is corrupt")
    version, hlen = struct.unpack_from("<IQ", blob, len(MAGIC))
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    off = len(MAGIC) + 12
    header = json.loads(blob[off:off + hlen].decode())
    header["_payload_offset"] = off + hlen
    header["_path"] = path
    return header


def load(path: str, expected_seed=None, expected_grid=None,
         expected_hash=None):
    """Return (SpectrumSeries, committed_count); refuses mismatched runs."""
    from .ensemble import SpectrumSeries   # deferred: avoids an import cycle

    header = read_header(path)
    if expected_seed is not None and header["master_seed"] != expected_seed:
        raise CheckpointError("master seed differs from the checkpointed run")
    if expected_grid is not None and header["grid"] != expected_grid:
        raise CheckpointError("grid differs from the checkpointed run")
    if expected_hash is not None and header["config_hash"] != expected_hash:
        raise CheckpointError("config hash differs from the checkpointed run")

    with open(path, "rb") as fh:
        blob = fh.read()[:-32]
    off = header["_payload_offset"]
    arrays = {}
    for meta in header["arrays"]:
        size = int(np.prod(meta["shape"])) if meta["shape"] else 1
        arr = np.frombuffer(blob, dtype=np.float64, count=size, offset=off)
        arrays[meta["name"]] = arr.reshape(meta["shape"]).copy()
        off += size * 8
    committed = _bitmap_prefix(header["bitmap"], header["total_trajectories"])
    if committed != header["committed"]:
        raise CheckpointError("bitmap and committed count disagree")

    grid_meta = header["grid"]
    pad = header["momentum_pad"]
    extents = grid_meta["extents_m"]
    spacing = [e / n for e, n in zip(extents, grid_meta["points"])]
    k_axes = tuple(2.0 * np.pi * np.fft.fftfreq(pad * n, d=dx)
                   for n, dx in zip(grid_meta["points"], spacing))
    dvk = float(np.prod([2.0 * np.pi / e for e in extents]))
    series = SpectrumSeries(
        grid_meta=grid_meta, k_axes=k_axes,
        momentum_volume_element=dvk / pad**len(grid_meta["points"]),
        times=arrays["times"], mode=header["mode"],
        master_seed=header["master_seed"], vacuum_cell=dvk, momentum_pad=pad,
        config_hash=header["config_hash"],
        power_sum=arrays["power_sum"], power_sumsq=arrays["power_sumsq"],
        trapped_sum=arrays["trapped_sum"], beam_sum=arrays["beam_sum"],
        count=header["count"],
        excluded=[tuple(e) for e in header["excluded"]])
    return series, committed
