"""Seeding and uniform-draw helpers.

Every stochastic routine in the simulator consumes the raw uniform-double
stream of a PCG64 generator and derives everything else (bounded integers,
Bernoulli trials) from single `random()` calls. The compiled kernels read the
same stream through the bit generator's C interface, so pure-Python and
compiled runs are bit-identical for the same seed.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def randbelow(rng: np.random.Generator, n: int) -> int:
    """Uniform integer in [0, n) consuming exactly one double."""
    return int(rng.random() * n)


def derive_seed(master_seed: int, *indices: int) -> int:
    """Stable per-run seed from a master seed and sweep/seed indices.

    Uses SHA-256 over the decimal rendering so the derivation is identical
    on every platform and independent of execution order.
    """
    key = ":".join(str(x) for x in (master_seed, *indices))
    digest = hashlib.sha256(key.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def config_hash(config_dict: dict) -> str:
    """Platform-stable hash of a JSON-serializable config mapping."""
    canonical = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
