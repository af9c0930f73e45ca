"""Deterministic RNG stream derivation for parallel repetitions.

Each repetition owns a stream derived from the master seed and a label
tuple such as (experiment, testbed, M, rep).  Identical labels always
give the identical stream; any label change gives an unrelated one.
String labels are folded to 64-bit words by a stable hash, so stream
identity does not depend on the process or platform.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _label_word(label) -> int:
    if isinstance(label, (bool, np.bool_)):
        raise TypeError("boolean labels are ambiguous; use int or str")
    if isinstance(label, (int, np.integer)):
        return int(label) & _MASK64
    if isinstance(label, str):
        digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    raise TypeError(f"labels must be int or str, got {type(label).__name__}")


def derive_stream(master_seed: int, labels) -> np.random.Generator:
    """Independent generator for (master_seed, *labels)."""
    words = [int(master_seed) & _MASK64] + [_label_word(lab) for lab in labels]
    return np.random.default_rng(np.random.SeedSequence(words))
