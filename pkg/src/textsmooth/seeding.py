"""Stable seed derivation.

Every stochastic component (subsampling, dropout draws, augmenter RNG,
repetition seeds) derives its seed from a master seed plus context parts via
a cryptographic hash, so runs are reproducible across processes and platforms
and independent draws never share a stream.
"""

import hashlib


def stable_seed(*parts: int | str) -> int:
    """Derive a 63-bit seed from arbitrary (int | str) context parts.

    Unlike the builtin ``hash``, the result does not depend on
    PYTHONHASHSEED or platform word size.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little") & 0x7FFF_FFFF_FFFF_FFFF
