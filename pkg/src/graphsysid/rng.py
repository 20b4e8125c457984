"""Reproducible random streams.

All randomness in this package flows through counter-based Philox4x64-10
generators (NumPy's Philox bit generator). A stream is addressed by a 64-bit
root seed plus a path of tags; the 128-bit Philox key is the first 16 bytes
of SHA-256 over a canonical encoding of (seed, path). Streams addressed by
different paths are independent, and any stream can be re-created from its
address alone, which is what makes experiment outputs a pure function of
their seeds.

Gaussian variates are produced by an explicit Box-Muller transform on 53-bit
uniforms rather than the generator's native ziggurat, so that the exact
sample values are pinned down by this module and reproducible from the
algorithm description alone.
"""

import hashlib

import numpy as np

ALGORITHM = "philox4x64-10/sha256-keyed/v1"

_ENCODING_PREFIX = b"graphsysid-rng-v1"


def _encode_path(seed, path):
    if not (0 <= int(seed) <= 0xFFFFFFFFFFFFFFFF):
        raise ValueError("seed must be an unsigned 64-bit integer")
    parts = [_ENCODING_PREFIX, int(seed).to_bytes(8, "little")]
    for item in path:
        if isinstance(item, (int, np.integer)):
            parts.append(b"i" + int(item).to_bytes(8, "little", signed=True))
        elif isinstance(item, str):
            raw = item.encode("utf-8")
            parts.append(b"s" + len(raw).to_bytes(4, "little") + raw)
        else:
            raise TypeError(f"stream path elements must be int or str, got {type(item)}")
    return b"".join(parts)


def derive_key(seed, *path):
    """128-bit Philox key for the stream addressed by (seed, *path)."""
    digest = hashlib.sha256(_encode_path(seed, path)).digest()
    return np.frombuffer(digest[:16], dtype="<u8").copy()


def derive_seed(seed, *path):
    """A fresh unsigned 64-bit seed derived from (seed, *path).

    Used to hand independent root seeds to sub-experiments (one per trial)
    without coupling them to the parent's stream consumption.
    """
    return int(derive_key(seed, *path)[0])


def stream(seed, *path):
    """Generator for the stream addressed by (seed, *path), counter at zero."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, *path)))


def normals(gen, count):
    """`count` standard normal variates via Box-Muller.

    Draws ceil(count/2) uniform pairs (u1 row, then u2 row), maps pair p to
    z_{2p} = sqrt(-2 ln u1) cos(2 pi u2) and z_{2p+1} = sqrt(-2 ln u1) sin(2 pi u2),
    and truncates to `count`. u1 is floored at the smallest positive double
    so the log is always finite.
    """
    if count == 0:
        return np.zeros(0)
    npairs = (count + 1) // 2
    u = gen.random((2, npairs))
    u1 = np.maximum(u[0], 5e-324)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u[1]
    out = np.empty(2 * npairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count]


def uniforms(gen, count, low=0.0, high=1.0):
    """`count` uniforms on [low, high)."""
    return low + (high - low) * gen.random(count)
