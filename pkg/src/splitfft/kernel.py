"""Multilevel Toeplitz generators and their Fourier data.

A d-level Toeplitz operator on a tensor of shape ``(n_1, ..., n_d)`` is fixed
by its lags ``t_m`` for ``m_l`` in ``[-(n_l - 1), n_l - 1]``.  Lags are kept as
a tensor of shape ``(2*n_1 - 1, ..., 2*n_d - 1)`` with lag ``m`` at index
``m + n - 1`` per level, so ``T[j, k] = t[m(j) - m(k)]``.

Branch identifiers are ints used as bitmasks: bit ``l - 1`` is set when the
branch carries the odd Fourier coefficients along level ``l``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .tensor import DTYPE, ContractError, check_shape


class SymmetryError(ContractError):
    """Generator or spectrum does not have the declared symmetry."""


class KernelIntegrityError(ContractError):
    pass


class Symmetry(str, enum.Enum):
    GENERAL = "general"
    SYMMETRIC = "symmetric"
    SKEW = "skew"

    @property
    def sign(self) -> int:
        return -1 if self is Symmetry.SKEW else 1


def _flip(arr, axis):
    return np.flip(arr, axis=axis)


def symmetrize(lags: np.ndarray, symmetry) -> np.ndarray:
    """Project lags onto the per-level (skew-)symmetric subspace.

    Levels are processed one at a time with ``(t + sign*flip(t)) / 2``, which
    leaves the result exactly mirror (skew-)symmetric in floating point.
    """
    symmetry = Symmetry(symmetry)
    lags = np.array(lags, dtype=DTYPE)
    if symmetry is Symmetry.GENERAL:
        return lags
    for axis in range(lags.ndim):
        lags = (lags + symmetry.sign * _flip(lags, axis)) / 2
    return lags


@dataclass
class GeneratorSpec:
    """Lags of a multilevel Toeplitz operator.

    Symmetric and skew modes are per level: flipping the sign of any single
    lag coordinate leaves ``t`` unchanged (symmetric) or negates it (skew).
    Skew mode therefore forces ``t_m = 0`` whenever some ``m_l = 0``.
    """

    levels: tuple
    lags: np.ndarray
    symmetry: Symmetry = Symmetry.GENERAL

    def __post_init__(self):
        self.levels = check_shape(self.levels)
        self.symmetry = Symmetry(self.symmetry)
        lag_shape = tuple(2 * n - 1 for n in self.levels)
        lags = np.array(self.lags, dtype=DTYPE)
        if lags.size != int(np.prod(lag_shape)):
            raise ContractError(
                f"levels {self.levels} need {int(np.prod(lag_shape))} lags, got {lags.size}")
        self.lags = lags.reshape(lag_shape)
        self.validate_symmetry()

    def validate_symmetry(self):
        if self.symmetry is Symmetry.GENERAL:
            return
        sign = self.symmetry.sign
        for axis in range(self.d):
            if not np.array_equal(self.lags, sign * _flip(self.lags, axis)):
                raise SymmetryError(
                    f"lags are not {self.symmetry.value} along level {axis + 1}")

    @property
    def d(self) -> int:
        return len(self.levels)

    @property
    def size(self) -> int:
        return int(np.prod(self.levels))

    def lag(self, *m) -> complex:
        if len(m) != self.d:
            raise ContractError(f"expected {self.d} lag coordinates, got {len(m)}")
        idx = []
        for ml, n in zip(m, self.levels):
            if not -(n - 1) <= ml <= n - 1:
                raise ContractError(f"lag {ml} outside +-{n - 1}")
            idx.append(ml + n - 1)
        return complex(self.lags[tuple(idx)])

    @classmethod
    def identity(cls, levels):
        levels = check_shape(levels)
        lags = np.zeros([2 * n - 1 for n in levels], dtype=DTYPE)
        lags[tuple(n - 1 for n in levels)] = 1
        return cls(levels, lags, Symmetry.SYMMETRIC)


def embed_generator(g: GeneratorSpec, s0: complex = 0) -> np.ndarray:
    """First column of the multilevel circulant embedding of ``g``.

    Along each level the layout is ``[t_0, ..., t_{n-1}, s0, t_{-(n-1)}, ..., t_{-1}]``.
    """
    maps = []
    for n in g.levels:
        j = np.arange(2 * n)
        # index of lag m in g.lags is m + n - 1; position n is overwritten with s0
        m = np.where(j < n, j, j - 2 * n)
        maps.append(np.clip(m + n - 1, 0, 2 * n - 2))
    e = g.lags[np.ix_(*maps)]
    for axis, n in enumerate(g.levels):
        idx = [slice(None)] * g.d
        idx[axis] = n
        e[tuple(idx)] = s0
    return e


def next_id(b: int, level: int) -> int:
    """Identifier of the odd child created when splitting ``level``."""
    bit = 1 << (level - 1)
    if b & bit:
        raise ContractError(f"branch {b:#b} already odd along level {level}")
    return b | bit


def parity(b: int, level: int) -> int:
    return (b >> (level - 1)) & 1


def parity_slices(b: int, d: int) -> tuple:
    return tuple(slice(parity(b, level), None, 2) for level in range(1, d + 1))


class MirrorFold:
    """Index maps exploiting ``f[k] = sign * f[(c - k) mod L]`` on every axis.

    ``centers[l]`` is the mirror center for axis ``l``.  Stored data is the
    leading ``stored_shape`` corner, which holds one representative of every
    mirror pair.
    """

    def __init__(self, lengths, centers, sign: int = 1):
        self.lengths = tuple(int(n) for n in lengths)
        self.sign = sign
        self.src = []
        self.signs = []
        for n, c in zip(self.lengths, centers):
            k = np.arange(n)
            m = (c - k) % n
            self.src.append(np.minimum(k, m))
            self.signs.append(np.where(k > m, float(sign), 1.0))
        self.stored_shape = tuple(int(s.max()) + 1 for s in self.src)

    def compress(self, full: np.ndarray) -> np.ndarray:
        return full[tuple(slice(0, s) for s in self.stored_shape)].copy()

    def _sign_tensor(self, signs):
        out = np.ones((), dtype=float)
        for s in signs:
            out = np.multiply.outer(out, s)
        return out

    def expand(self, stored: np.ndarray) -> np.ndarray:
        full = stored[np.ix_(*self.src)]
        if self.sign < 0:
            full *= self._sign_tensor(self.signs)
        return full

    def expand_slab(self, stored: np.ndarray, i: int) -> np.ndarray:
        """Expanded sub-tensor at leading index ``i``."""
        row = stored[self.src[0][i]]
        if len(self.lengths) == 1:
            return np.asarray(row * self.signs[0][i])
        slab = row[np.ix_(*self.src[1:])]
        if self.sign < 0:
            slab *= self.signs[0][i] * self._sign_tensor(self.signs[1:])
        return slab


def block_fold(levels, b: int, sign: int) -> MirrorFold:
    # even parity: k <-> n - k (mod n); odd parity: k <-> n - 1 - k
    centers = [0 if parity(b, l + 1) == 0 else n - 1 for l, n in enumerate(levels)]
    return MirrorFold(levels, centers, sign)


@dataclass
class KernelSpectra:
    """Parity blocks ``T[b]`` of the embedded generator's DFT.

    Block ``b`` has shape ``levels`` and holds the DFT entries at index
    ``2*k_l + parity(b, l)`` on every level.  With ``storage == "mirror"``
    each block keeps only its non-redundant corner.
    """

    levels: tuple
    blocks: dict
    symmetry: Symmetry = Symmetry.GENERAL
    storage: str = "full"
    _folds: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.levels = check_shape(self.levels)
        self.symmetry = Symmetry(self.symmetry)
        if self.storage not in ("full", "mirror"):
            raise ContractError(f"unknown storage mode {self.storage!r}")
        if self.storage == "mirror":
            if self.symmetry is Symmetry.GENERAL:
                raise SymmetryError("mirror storage needs a symmetric or skew kernel")
            self._folds = {b: block_fold(self.levels, b, self.symmetry.sign)
                           for b in range(self.n_blocks)}

    @property
    def d(self) -> int:
        return len(self.levels)

    @property
    def size(self) -> int:
        return int(np.prod(self.levels))

    @property
    def n_blocks(self) -> int:
        return 1 << self.d

    @property
    def n_elements(self) -> int:
        return sum(blk.size for blk in self.blocks.values())

    def _stored(self, b: int) -> np.ndarray:
        try:
            return self.blocks[b]
        except KeyError:
            raise KernelIntegrityError(f"kernel has no block {b:#b}") from None

    def block(self, b: int) -> np.ndarray:
        stored = self._stored(b)
        if self.storage == "full":
            return stored
        return self._folds[b].expand(stored)

    def slab(self, b: int, i: int) -> np.ndarray:
        """Block ``b`` at leading index ``i``, expanded if compressed."""
        stored = self._stored(b)
        if self.storage == "full":
            return stored[i]
        return self._folds[b].expand_slab(stored, i)


def expand_block(k: KernelSpectra, b: int) -> np.ndarray:
    return k.block(b)


def _levels_of(e: np.ndarray) -> tuple:
    if any(n % 2 for n in e.shape):
        raise ContractError(f"embedded generator needs even lengths, got {e.shape}")
    return tuple(n // 2 for n in e.shape)


def _branchwise(arr, level, b, d, blocks):
    if level > d:
        blocks[b] = arr
        return
    axis = level - 1
    n = arr.shape[axis] // 2
    lo = np.take(arr, np.arange(n), axis=axis)
    hi = np.take(arr, np.arange(n, 2 * n), axis=axis)
    even = np.fft.fft(lo + hi, axis=axis)
    _branchwise(even, level + 1, b, d, blocks)
    odd = lo - hi
    shape = [1] * d
    shape[axis] = n
    odd *= np.exp(-1j * np.pi * np.arange(n) / n).reshape(shape)
    np.fft.fft(odd, axis=axis, out=odd)
    _branchwise(odd, level + 1, next_id(b, level), d, blocks)


def precompute_spectra(e: np.ndarray, strategy: str = "full-fft",
                       symmetry=Symmetry.GENERAL) -> KernelSpectra:
    """Compute all ``2**d`` parity blocks of ``fftn(e)``.

    ``full-fft`` transforms the whole embedded generator once and
    de-interleaves; ``branchwise`` folds each level into even/odd halves first
    (sum, or phase-shifted difference) so no ``2**d * s`` spectrum is formed.
    """
    levels = _levels_of(e)
    d = len(levels)
    blocks = {}
    if strategy == "full-fft":
        spectrum = np.fft.fftn(e)
        for b in range(1 << d):
            blocks[b] = np.ascontiguousarray(spectrum[parity_slices(b, d)])
    elif strategy == "branchwise":
        _branchwise(np.asarray(e, dtype=DTYPE), 1, 0, d, blocks)
        blocks = {b: np.ascontiguousarray(blocks[b]) for b in sorted(blocks)}
    else:
        raise ContractError(f"unknown strategy {strategy!r}")
    return KernelSpectra(levels, blocks, symmetry, "full")


def compress_spectra(k: KernelSpectra, g: GeneratorSpec, rtol: float = 1e-10) -> KernelSpectra:
    """Mirror-compressed copy of full-storage spectra for a (skew-)symmetric ``g``.

    The spectrum itself is checked too: a skew kernel embedded with a nonzero
    padding value is not skew-mirrored and is rejected.
    """
    if g.symmetry is Symmetry.GENERAL:
        raise SymmetryError("compression needs a symmetric or skew generator")
    if k.storage != "full":
        raise ContractError("spectra are already compressed")
    if tuple(k.levels) != tuple(g.levels):
        raise ContractError(f"kernel levels {k.levels} != generator levels {g.levels}")
    g.validate_symmetry()
    blocks = {}
    scale = max((np.abs(blk).max() for blk in k.blocks.values()), default=0.0)
    for b, full in k.blocks.items():
        fold = block_fold(k.levels, b, g.symmetry.sign)
        stored = fold.compress(full)
        if not np.allclose(fold.expand(stored), full, rtol=0, atol=rtol * max(scale, 1e-300)):
            raise SymmetryError(f"block {b:#b} is not mirror-{g.symmetry.value}")
        blocks[b] = stored
    return KernelSpectra(k.levels, blocks, g.symmetry, "mirror")


def build_kernel(g: GeneratorSpec, s0: complex = 0, strategy: str = "full-fft",
                 compress: bool = False) -> KernelSpectra:
    k = precompute_spectra(embed_generator(g, s0), strategy, g.symmetry)
    if compress:
        k = compress_spectra(k, g)
    return k


class EmbeddedSpectrum:
    """Full ``fftn`` of the embedded generator, as used by the baseline method.

    With ``compress=True`` only the ``prod(n_l + 1)`` non-redundant entries of
    a (skew-)symmetric spectrum are kept (``f[j] = +-f[2n - j]`` per level).
    """

    def __init__(self, g: GeneratorSpec, s0: complex = 0, compress: bool = False):
        self.levels = g.levels
        self.embedded_shape = tuple(2 * n for n in g.levels)
        full = np.fft.fftn(embed_generator(g, s0))
        self.fold = None
        if compress:
            if g.symmetry is Symmetry.GENERAL:
                raise SymmetryError("compression needs a symmetric or skew generator")
            self.fold = MirrorFold(self.embedded_shape, [0] * g.d, g.symmetry.sign)
            self.data = self.fold.compress(full)
            scale = max(np.abs(full).max(), 1e-300)
            if not np.allclose(self.fold.expand(self.data), full, rtol=0, atol=1e-10 * scale):
                raise SymmetryError(f"spectrum is not mirror-{g.symmetry.value}")
        else:
            self.data = full

    @property
    def n_elements(self) -> int:
        return self.data.size

    def slab(self, i: int) -> np.ndarray:
        if self.fold is None:
            return self.data[i]
        return self.fold.expand_slab(self.data, i)

    def full(self) -> np.ndarray:
        return self.data if self.fold is None else self.fold.expand(self.data)
