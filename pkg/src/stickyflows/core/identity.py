"""Identity utilities for deterministic IDs and random streams.

- config_hash: deterministic hash of a resolved run configuration
- run_id: deterministic hash of run identity
- sha256_file: streaming file hash (artifact ledger)
- substream: numpy Generator that is a pure function of
  (master seed, module tag, indices)
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def compute_config_hash(subcommand: str, params: dict) -> str:
    """Compute deterministic config_hash.

    config_hash = sha256(canonical_json({subcommand, params}))

    Args:
        subcommand: CLI subcommand name (e.g., "theta").
        params: Resolved parameter mapping (JSON-serializable).

    Returns:
        64-character hex string (SHA256)
    """
    obj = {"subcommand": subcommand, "params": params}
    canonical = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def compute_run_id(subcommand: str, config_hash: str, seed: int) -> str:
    """Compute deterministic run_id.

    run_id = sha256(subcommand | config_hash | seed)

    Worker count is deliberately absent: it never changes outputs.
    """
    identity_str = f"{subcommand}|{config_hash}|{seed}"
    return hashlib.sha256(identity_str.encode("utf-8")).hexdigest()


def sha256_file(path: Path, chunk_size: int = 65536) -> str:
    """Compute SHA256 of file using streaming (memory-efficient).

    Args:
        path: Path to file.
        chunk_size: Bytes to read at a time (default 64KB).

    Returns:
        64-character hex string.
    """
    hasher = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def tag_key(tag: str) -> int:
    """32-bit integer derived from a module tag.

    Examples:
        >>> tag_key("theta") == tag_key("theta")
        True
    """
    return int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:4], byteorder="big")


def substream(seed: int, tag: str, *index: int) -> np.random.Generator:
    """Independent generator for (seed, tag, index...).

    Streams for different tags or indices are statistically independent
    (SeedSequence spawn keys), and the same arguments always yield the
    same stream regardless of which process asks for it.
    """
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(tag_key(tag), *map(int, index)))
    return np.random.Generator(np.random.PCG64(seq))


def block_sizes(total: int, block_size: int) -> list[int]:
    """Split total replicas into fixed-size blocks (last one may be short)."""
    if total <= 0:
        return []
    full, rest = divmod(total, block_size)
    return [block_size] * full + ([rest] if rest else [])
