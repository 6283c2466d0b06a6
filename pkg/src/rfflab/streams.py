"""Counter-based random stream derivation for parallel experiments.

Each (experiment, cell, trial) triple gets its own generator so workers never
share a stream. The derivation hashes the triple with SHA-256 and uses the
first 128 bits as a Philox 4x64 key; Philox is counter-based, so derivation
is stateless, order-independent, and stable across platforms for one numpy
build.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_stream(
    root_seed: int, experiment_id: str, cell_index: int, trial_index: int
) -> np.random.Generator:
    """Independent, reproducible generator for one (experiment, cell, trial)."""
    message = f"{root_seed}:{experiment_id}:{cell_index}:{trial_index}".encode()
    key = np.frombuffer(hashlib.sha256(message).digest()[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
