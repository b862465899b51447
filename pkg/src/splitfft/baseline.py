"""Reference methods: standard circulant embedding and the dense oracle."""

from __future__ import annotations

import numpy as np

from .kernel import EmbeddedSpectrum, GeneratorSpec
from .tensor import ContractError, Probe, RunMetrics, as_tensor, fft_axis, ifft_axis

DEFAULT_ORACLE_CAP = 4096


class OracleCapError(ContractError):
    pass


def _check_vector(g: GeneratorSpec, v) -> tuple[np.ndarray, bool]:
    v = np.asarray(v)
    flat = v.ndim == 1 and g.d > 1 and v.size == g.size
    if flat:
        v = v.reshape(g.levels)
    if tuple(v.shape) != tuple(g.levels):
        raise ContractError(f"vector shape {v.shape} does not match levels {g.levels}")
    return v, flat


def toe_mul_embed(g: GeneratorSpec, v, *, spectrum: EmbeddedSpectrum | None = None,
                  s0: complex = 0, compress: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """``T @ v`` through a full ``2**d``-fold circulant embedding.

    Zero-pads ``v`` to ``2 * n_l`` per level, transforms every axis, multiplies
    by the embedded generator's spectrum, inverts, and keeps the leading
    ``n_l`` entries per level.  Pass a precomputed ``spectrum`` to keep kernel
    setup out of the run.
    """
    v, flat = _check_vector(g, v)
    if spectrum is None:
        spectrum = EmbeddedSpectrum(g, s0=s0, compress=compress)
    probe = Probe()
    lead = tuple(slice(0, n) for n in g.levels)

    padded = np.zeros(spectrum.embedded_shape, dtype=np.complex128)
    probe.meter.allocate(padded.size)
    padded[lead] = v
    for level in range(1, g.d + 1):
        fft_axis(padded, level, out=padded, probe=probe)

    probe.count("leaf_mults", padded.size)
    if spectrum.fold is None:
        padded *= spectrum.data
    else:
        for i in range(padded.shape[0]):
            slab = spectrum.slab(i)
            probe.scratch.allocate(slab.size)
            padded[i] *= slab
            probe.scratch.free(slab.size)

    for level in range(1, g.d + 1):
        ifft_axis(padded, level, out=padded, probe=probe)
    y = padded[lead].copy()
    probe.meter.allocate(y.size)
    probe.meter.free(padded.size)
    del padded

    metrics = probe.metrics(g.levels, kernel_elems=spectrum.n_elements)
    return (y.reshape(-1) if flat else y), metrics


def dense_toeplitz(g: GeneratorSpec, cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """The ``s x s`` matrix with ``T[j, k] = t[m(j) - m(k)]``, built lag by lag.

    Row/column offsets are row-major multi-indices with level 1 outermost.
    """
    if g.size > cap:
        raise OracleCapError(f"dense oracle capped at s={cap}, got s={g.size}")
    d = g.d
    index = []
    for l, n in enumerate(g.levels):
        diff = np.subtract.outer(np.arange(n), np.arange(n)) + n - 1
        shape = [1] * (2 * d)
        shape[2 * l] = n
        shape[2 * l + 1] = n
        index.append(diff.reshape(shape))
    t = g.lags[tuple(index)]
    order = list(range(0, 2 * d, 2)) + list(range(1, 2 * d, 2))
    return t.transpose(order).reshape(g.size, g.size)


def naive_matvec(g: GeneratorSpec, v, cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """Brute-force ``T @ v``; ``O(s**2)`` time and memory."""
    v, flat = _check_vector(g, v)
    y = dense_toeplitz(g, cap) @ as_tensor(v).reshape(-1)
    return y if flat else y.reshape(g.levels)
