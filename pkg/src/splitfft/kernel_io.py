"""On-disk formats: binary kernel spectra and JSON generator specs.

Kernel file layout (all little-endian)::

    magic     4 bytes  b"SFTK"
    version   uint16   1
    d         uint16
    n_1..n_d  uint32 each
    symmetry  uint8    0 general, 1 symmetric, 2 skew
    storage   uint8    0 full, 1 mirror
    blocks    complex128 (re, im doubles), one block per branch id in
              ascending order, row-major within the block

Block ``b`` has shape ``levels`` in full storage; in mirror storage it is the
stored corner, ``n//2 + 1`` (even parity) or ``(n + 1)//2`` (odd parity)
entries per level.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .kernel import GeneratorSpec, KernelSpectra, Symmetry, block_fold

MAGIC = b"SFTK"
VERSION = 1
_SYMMETRY_CODES = {Symmetry.GENERAL: 0, Symmetry.SYMMETRIC: 1, Symmetry.SKEW: 2}
_STORAGE_CODES = {"full": 0, "mirror": 1}


class KernelFormatError(ValueError):
    pass


def _block_shape(levels, b, storage, symmetry):
    if storage == "full":
        return tuple(levels)
    return block_fold(levels, b, symmetry.sign).stored_shape


def dumps_kernel(k: KernelSpectra) -> bytes:
    parts = [struct.pack("<4sHH", MAGIC, VERSION, k.d),
             struct.pack(f"<{k.d}I", *k.levels),
             struct.pack("<BB", _SYMMETRY_CODES[k.symmetry], _STORAGE_CODES[k.storage])]
    for b in range(k.n_blocks):
        parts.append(np.ascontiguousarray(k.blocks[b], dtype="<c16").tobytes())
    return b"".join(parts)


def loads_kernel(buf: bytes) -> KernelSpectra:
    try:
        magic, version, d = struct.unpack_from("<4sHH", buf, 0)
    except struct.error as exc:
        raise KernelFormatError("truncated header") from exc
    if magic != MAGIC:
        raise KernelFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise KernelFormatError(f"unsupported version {version}")
    offset = 8
    try:
        levels = struct.unpack_from(f"<{d}I", buf, offset)
        offset += 4 * d
        sym_code, storage_code = struct.unpack_from("<BB", buf, offset)
    except struct.error as exc:
        raise KernelFormatError("truncated header") from exc
    offset += 2
    try:
        symmetry = {v: k for k, v in _SYMMETRY_CODES.items()}[sym_code]
        storage = {v: k for k, v in _STORAGE_CODES.items()}[storage_code]
    except KeyError as exc:
        raise KernelFormatError(f"bad mode code {exc}") from None
    blocks = {}
    for b in range(1 << d):
        shape = _block_shape(levels, b, storage, symmetry)
        count = int(np.prod(shape))
        if offset + 16 * count > len(buf):
            raise KernelFormatError(f"truncated data in block {b}")
        data = np.frombuffer(buf, dtype="<c16", count=count, offset=offset)
        blocks[b] = data.astype(np.complex128).reshape(shape)
        offset += 16 * count
    if offset != len(buf):
        raise KernelFormatError(f"{len(buf) - offset} trailing bytes")
    return KernelSpectra(tuple(levels), blocks, symmetry, storage)


def save_kernel(path, k: KernelSpectra):
    with open(path, "wb") as fh:
        fh.write(dumps_kernel(k))


def load_kernel(path) -> KernelSpectra:
    with open(path, "rb") as fh:
        return loads_kernel(fh.read())


def generator_to_json(g: GeneratorSpec) -> dict:
    flat = g.lags.reshape(-1)
    return {
        "levels": list(g.levels),
        "lags": [[float(z.real), float(z.imag)] for z in flat],
        "symmetry": g.symmetry.value,
    }


def generator_from_json(obj) -> GeneratorSpec:
    """Build a generator from the fixture format; validates symmetry."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        levels = tuple(obj["levels"])
        pairs = np.asarray(obj["lags"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise KernelFormatError(f"malformed generator spec: {exc}") from None
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise KernelFormatError("lags must be a list of [re, im] pairs")
    lags = pairs[:, 0] + 1j * pairs[:, 1]
    return GeneratorSpec(levels, lags, obj.get("symmetry", "general"))


def save_generator(path, g: GeneratorSpec):
    with open(path, "w") as fh:
        json.dump(generator_to_json(g), fh)


def load_generator(path) -> GeneratorSpec:
    with open(path) as fh:
        return generator_from_json(json.load(fh))
