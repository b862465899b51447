"""Complex tensor primitives shared by the split and embedding engines.

Tensors are plain C-ordered ``complex128`` numpy arrays.  Levels are numbered
from 1 (outermost, numpy axis 0) to ``d`` (innermost, numpy axis ``d - 1``).

Conventions:

* the forward transform is the unnormalized DFT with kernel ``exp(-2j*pi*l*k/N)``;
  the inverse carries the ``1/N`` factor (numpy's default ``norm="backward"``);
* the phase operator along a level of length ``n`` is ``P_k = exp(-1j*pi*k/n)``,
  so that ``fft(P*v)`` gives the odd coefficients of ``fft([v, 0])``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_LEVELS = 16
DTYPE = np.complex128


class ContractError(ValueError):
    """Raised when an operation is called outside its preconditions."""


def as_tensor(data, shape=None) -> np.ndarray:
    """Return ``data`` as a fresh C-contiguous complex128 tensor.

    :param data: anything numpy can turn into an array.
    :param shape: optional per-level lengths to reshape to.
    :raises ContractError: on an empty level, a level count outside
        ``1..MAX_LEVELS``, or a size mismatch with ``shape``.
    """
    arr = np.array(data, dtype=DTYPE, order="C", copy=True)
    if shape is not None:
        shape = tuple(int(n) for n in shape)
        if arr.size != int(np.prod(shape)):
            raise ContractError(f"{arr.size} elements cannot fill shape {shape}")
        arr = arr.reshape(shape)
    check_shape(arr.shape)
    return arr


def check_shape(shape) -> tuple[int, ...]:
    shape = tuple(int(n) for n in shape)
    if not 1 <= len(shape) <= MAX_LEVELS:
        raise ContractError(f"level count {len(shape)} outside 1..{MAX_LEVELS}")
    if any(n < 1 for n in shape):
        raise ContractError(f"every level length must be >= 1, got {shape}")
    return shape


def _axis(t: np.ndarray, level: int) -> int:
    if not 1 <= level <= t.ndim:
        raise ContractError(f"level {level} out of range 1..{t.ndim}")
    return level - 1


class AllocationMeter:
    """Thread-safe live/peak counter of complex elements."""

    def __init__(self):
        self._lock = threading.Lock()
        self.current = 0
        self.peak = 0

    def allocate(self, count: int):
        with self._lock:
            self.current += count
            if self.current > self.peak:
                self.peak = self.current

    def free(self, count: int):
        with self._lock:
            if count > self.current:
                raise ContractError(
                    f"freeing {count} elements with only {self.current} live")
            self.current -= count

    def reset(self):
        with self._lock:
            self.current = 0
            self.peak = 0


@dataclass(frozen=True)
class RunMetrics:
    """Counters from one matrix-vector product.

    ``peak_elems`` covers working vectors only; ``kernel_elems`` is the stored
    spectral data and ``scratch_peak`` the transient blocks expanded from
    compressed storage.
    """

    shape: tuple
    fft_fwd: int = 0
    fft_inv: int = 0
    leaf_mults: int = 0
    phase_mults: int = 0
    peak_elems: int = 0
    kernel_elems: int = 0
    scratch_peak: int = 0

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def mults(self) -> int:
        return self.leaf_mults + self.phase_mults

    @property
    def total_peak(self) -> int:
        return self.peak_elems + self.kernel_elems + self.scratch_peak


class Probe:
    """Per-run instrumentation: FFT and multiply counters plus two meters."""

    def __init__(self):
        self._lock = threading.Lock()
        self.fft_fwd = 0
        self.fft_inv = 0
        self.leaf_mults = 0
        self.phase_mults = 0
        self.meter = AllocationMeter()
        self.scratch = AllocationMeter()

    def count(self, field: str, amount: int = 1):
        with self._lock:
            setattr(self, field, getattr(self, field) + amount)

    def metrics(self, shape, kernel_elems: int = 0) -> RunMetrics:
        with self._lock:
            return RunMetrics(
                shape=tuple(shape),
                fft_fwd=self.fft_fwd,
                fft_inv=self.fft_inv,
                leaf_mults=self.leaf_mults,
                phase_mults=self.phase_mults,
                peak_elems=self.meter.peak,
                kernel_elems=kernel_elems,
                scratch_peak=self.scratch.peak,
            )


def fft_axis(t: np.ndarray, level: int, *, out=None, probe: Probe | None = None):
    """Unnormalized forward DFT of every fiber along ``level``.

    Pass ``out=t`` to transform in place.
    """
    axis = _axis(t, level)
    if probe is not None:
        probe.count("fft_fwd")
    return np.fft.fft(t, axis=axis, out=out)


def ifft_axis(t: np.ndarray, level: int, *, out=None, probe: Probe | None = None):
    """Inverse DFT (with the 1/N factor) of every fiber along ``level``."""
    axis = _axis(t, level)
    if probe is not None:
        probe.count("fft_inv")
    return np.fft.ifft(t, axis=axis, out=out)


@lru_cache(maxsize=256)
def phase_vector(n: int, conjugate: bool = False) -> np.ndarray:
    """``exp(-1j*pi*k/n)`` for ``k = 0..n-1`` (conjugated on request)."""
    sign = 1.0 if conjugate else -1.0
    p = np.exp(sign * 1j * np.pi * np.arange(n) / n)
    p.flags.writeable = False
    return p


def _along(vec: np.ndarray, ndim: int, axis: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = vec.size
    return vec.reshape(shape)


def phase_shift_axis(t: np.ndarray, level: int, conjugate: bool = False, *,
                     out=None, probe: Probe | None = None):
    """Multiply the entry at index ``k`` along ``level`` by ``P_k`` (or its conjugate)."""
    axis = _axis(t, level)
    p = _along(phase_vector(t.shape[axis], conjugate), t.ndim, axis)
    if probe is not None:
        probe.count("phase_mults", t.size)
    return np.multiply(t, p, out=out)


def scale_add(a: np.ndarray, b: np.ndarray, alpha: complex = 1.0, *, out=None):
    """Elementwise ``a + alpha*b``."""
    if a.shape != b.shape:
        raise ContractError(f"shape mismatch {a.shape} vs {b.shape}")
    if out is None:
        return a + alpha * b
    if out is not a:
        np.copyto(out, a)
    if alpha == 1:
        out += b
    else:
        out += alpha * b
    return out
