"""Split-FFT block Toeplitz matrix-vector product.

Each level of the circulant embedding is replaced by a pair of branches: the
even branch reuses the parent's buffer and the odd branch gets a phase-shifted
copy.  Branches are transformed along their level, recursed into, inverse
transformed, and merged back in the spatial domain as
``(v_even + conj(P) * v_odd) / 2``.  Evaluated depth first, at most one odd
child per level is alive at a time, so working memory stays at ``(d + 1) * s``.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .kernel import GeneratorSpec, KernelSpectra, build_kernel, next_id
from .tensor import (ContractError, Probe, RunMetrics, as_tensor, fft_axis,
                     ifft_axis, phase_shift_axis)

LAZY = "lazy-sequential"
PARALLEL = "eager-parallel"
_MODE_ALIASES = {"lazy": LAZY, "parallel": PARALLEL, LAZY: LAZY, PARALLEL: PARALLEL}


@dataclass(frozen=True)
class ExecutionPolicy:
    """How the branch tree is evaluated.

    ``eager-parallel`` hands odd children to a thread pool of ``tasks``
    workers for nodes shallower than ``parallel_depth`` (all levels when
    None); deeper nodes run sequentially.
    """

    mode: str = LAZY
    tasks: int = 1
    parallel_depth: int | None = None

    def __post_init__(self):
        if self.mode not in _MODE_ALIASES:
            raise ContractError(f"unknown execution mode {self.mode!r}")
        object.__setattr__(self, "mode", _MODE_ALIASES[self.mode])
        if self.tasks < 1:
            raise ContractError("task budget must be >= 1")


def spt_brn(v: np.ndarray, level: int, probe: Probe | None = None) -> np.ndarray:
    """Phase-shifted copy of ``v`` whose transform along ``level`` gives the odd coefficients."""
    return phase_shift_axis(v, level, probe=probe)


def mrg_brn(v_even: np.ndarray, v_odd: np.ndarray, level: int, *,
            inplace: bool = False, probe: Probe | None = None) -> np.ndarray:
    """Combine spatial-domain children: ``(v_even + conj(P) * v_odd) / 2``.

    With ``inplace`` the result overwrites ``v_even`` and ``v_odd`` is clobbered.
    """
    if v_even.shape != v_odd.shape:
        raise ContractError(f"shape mismatch {v_even.shape} vs {v_odd.shape}")
    if not inplace:
        v_even = v_even.copy()
        v_odd = v_odd.copy()
    phase_shift_axis(v_odd, level, conjugate=True, out=v_odd, probe=probe)
    v_even += v_odd
    v_even *= 0.5
    return v_even


def mul_brn(v: np.ndarray, k: KernelSpectra, b: int, *, out=None,
            probe: Probe | None = None) -> np.ndarray:
    """Diagonal multiply by parity block ``b``.

    Compressed blocks are expanded one leading-index slab at a time so the
    transient never exceeds ``s / n_1`` elements.
    """
    if probe is not None:
        probe.count("leaf_mults", v.size)
    if k.storage == "full":
        return np.multiply(v, k.block(b), out=out)
    if out is None:
        out = np.empty_like(v)
    for i in range(v.shape[0]):
        slab = k.slab(b, i)
        if probe is not None:
            probe.scratch.allocate(slab.size)
        np.multiply(v[i:i + 1], slab, out=out[i:i + 1])
        if probe is not None:
            probe.scratch.free(slab.size)
    return out


class _Run:
    def __init__(self, k: KernelSpectra, policy: ExecutionPolicy, probe: Probe, trace):
        self.k = k
        self.d = k.d
        self.probe = probe
        self.trace = trace
        self.pool = None
        if policy.mode == PARALLEL:
            self.pool = ThreadPoolExecutor(max_workers=policy.tasks)
            self.slots = threading.Semaphore(policy.tasks)
            self.cutoff = self.d if policy.parallel_depth is None else policy.parallel_depth

    def _task(self, depth, b, v):
        try:
            return self.branch(depth, b, v)
        finally:
            self.slots.release()

    def branch(self, depth: int, b: int, v: np.ndarray) -> np.ndarray:
        probe = self.probe
        if self.trace is not None:
            self.trace.append((depth, b))
        if depth > 0:
            fft_axis(v, depth, out=v, probe=probe)
        if depth < self.d:
            level = depth + 1
            child = spt_brn(v, level, probe)
            probe.meter.allocate(child.size)
            odd_id = next_id(b, level)
            pending = None
            if (self.pool is not None and depth < self.cutoff
                    and self.slots.acquire(blocking=False)):
                pending = self.pool.submit(self._task, level, odd_id, child)
            self.branch(level, b, v)
            if pending is not None:
                pending.result()
            else:
                self.branch(level, odd_id, child)
            mrg_brn(v, child, level, inplace=True, probe=probe)
            del child
            probe.meter.free(v.size)
        else:
            mul_brn(v, self.k, b, out=v, probe=probe)
        if depth > 0:
            ifft_axis(v, depth, out=v, probe=probe)
        return v

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _coerce_input(k: KernelSpectra, v) -> tuple[np.ndarray, bool]:
    v = np.asarray(v)
    flat = v.ndim == 1 and k.d > 1 and v.size == k.size
    if flat:
        v = v.reshape(k.levels)
    if tuple(v.shape) != tuple(k.levels):
        raise ContractError(f"vector shape {v.shape} does not match kernel levels {k.levels}")
    return as_tensor(v), flat


def toe_mul_split(k: KernelSpectra, v, policy: ExecutionPolicy | None = None,
                  trace: list | None = None) -> tuple[np.ndarray, RunMetrics]:
    """Return ``(T @ v, metrics)`` for the operator whose spectra are ``k``.

    ``v`` may have shape ``k.levels`` or be flat of length ``s``; the result
    has the same form.  Pass a list as ``trace`` to record visited
    ``(depth, branch_id)`` nodes.
    """
    policy = policy or ExecutionPolicy()
    y, flat = _coerce_input(k, v)
    probe = Probe()
    probe.meter.allocate(y.size)
    run = _Run(k, policy, probe, trace)
    try:
        run.branch(0, 0, y)
    finally:
        run.close()
    metrics = probe.metrics(k.levels, kernel_elems=k.n_elements)
    return (y.reshape(-1) if flat else y), metrics


class SplitToeplitzOperator:
    """Matrix-free multilevel Toeplitz operator backed by the split algorithm.

    >>> op = SplitToeplitzOperator(GeneratorSpec((2,), [2, 1, 3]))
    >>> op.apply([1, 1]).real.tolist()
    [3.0, 4.0]
    """

    def __init__(self, g: GeneratorSpec, *, s0: complex = 0, compress: bool = False,
                 strategy: str = "full-fft", policy: ExecutionPolicy | None = None):
        self.generator = g
        self.kernel = build_kernel(g, s0=s0, strategy=strategy, compress=compress)
        self.policy = policy or ExecutionPolicy()
        self.metrics: RunMetrics | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return (self.kernel.size, self.kernel.size)

    def apply(self, v) -> np.ndarray:
        y, self.metrics = toe_mul_split(self.kernel, v, self.policy)
        return y

    matvec = apply
