"""Versioned binary checkpoint files.

Layout (all integers little-endian):

    magic   4 bytes  b"ZPN1"
    version u32      format version, currently 1
    game id u16 length + utf-8 bytes
    step    u64      training step counter
    elo     u8 flag + f64 (flag 0 means no rating; the float is then 0)
    spec    7 x u32  input_channels, trunk_channels, residual_blocks,
                     kernel_size, policy_channels, value_pool_channels,
                     value_hidden
    weights raw little-endian float32 arrays, canonical parameter order
    crc     u32      CRC-32 of every preceding byte

The round trip is bit-exact; any mismatch in magic, version, length or
checksum raises a distinct error and nothing is partially loaded.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import Network, NetworkSpec, param_shapes

MAGIC = b"ZPN1"
FORMAT_VERSION = 1

_SPEC_FIELDS = ("input_channels", "trunk_channels", "residual_blocks", "kernel_size",
                "policy_channels", "value_pool_channels", "value_hidden")


class CheckpointError(Exception):
    """Base class for checkpoint file problems."""


class BadMagicError(CheckpointError):
    pass


class VersionError(CheckpointError):
    pass


class TruncatedError(CheckpointError):
    pass


class ChecksumError(CheckpointError):
    pass


@dataclass
class Checkpoint:
    spec: NetworkSpec
    weights: dict[str, np.ndarray]
    step: int
    game_id: str
    elo: float | None = None

    def network(self) -> Network:
        return Network(self.spec, {k: v.copy() for k, v in self.weights.items()})

    @classmethod
    def of(cls, net: Network, game_id: str, step: int, elo: float | None = None) -> "Checkpoint":
        return cls(net.spec, {k: v.copy() for k, v in net.params.items()},
                   step, game_id, elo)


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    game_bytes = ckpt.game_id.encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<H", len(game_bytes)),
        game_bytes,
        struct.pack("<Q", ckpt.step),
        struct.pack("<Bd", 1 if ckpt.elo is not None else 0,
                    ckpt.elo if ckpt.elo is not None else 0.0),
        struct.pack("<7I", *(getattr(ckpt.spec, f) for f in _SPEC_FIELDS)),
    ]
    for name, shape in param_shapes(ckpt.spec):
        arr = ckpt.weights[name]
        if arr.shape != shape:
            raise ValueError(f"{name}: expected shape {shape}, got {arr.shape}")
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    body = b"".join(parts)
    blob = body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
    Path(path).write_bytes(blob)


def load_checkpoint(path: str | Path) -> Checkpoint:
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + 8:
        raise TruncatedError(f"{path}: file too short to be a checkpoint")
    if blob[:4] != MAGIC:
        raise BadMagicError(f"{path}: not a checkpoint file")
    body, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise ChecksumError(f"{path}: checksum mismatch, refusing to load")
    off = 4
    (version,) = struct.unpack_from("<I", body, off)
    off += 4
    if version != FORMAT_VERSION:
        raise VersionError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    try:
        (game_len,) = struct.unpack_from("<H", body, off)
        off += 2
        game_id = body[off:off + game_len].decode("utf-8")
        off += game_len
        (step,) = struct.unpack_from("<Q", body, off)
        off += 8
        has_elo, elo = struct.unpack_from("<Bd", body, off)
        off += 9
        spec_values = struct.unpack_from("<7I", body, off)
        off += 28
        spec = NetworkSpec(**dict(zip(_SPEC_FIELDS, spec_values)))
        weights: dict[str, np.ndarray] = {}
        for name, shape in param_shapes(spec):
            count = int(np.prod(shape))
            raw = body[off:off + 4 * count]
            if len(raw) != 4 * count:
                raise TruncatedError(f"{path}: weight data ends inside {name}")
            weights[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
            off += 4 * count
        if off != len(body):
            raise TruncatedError(f"{path}: {len(body) - off} unexpected trailing bytes")
    except struct.error as exc:
        raise TruncatedError(f"{path}: header ends early ({exc})") from exc
    return Checkpoint(spec, weights, step, game_id, elo if has_elo else None)
