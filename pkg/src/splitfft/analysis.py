"""Closed-form operation-count and peak-memory models, and their reconciliation
with instrumented runs.

All models take a uniform per-level length ``n`` and level count ``d`` with
``s = n**d``.  FFT cost is ``m2 * log2(m1)`` with ``m1`` the transformed length
and ``m2`` the number of elements touched.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal

from .tensor import ContractError, RunMetrics

TABLE1_DIMS = (2, 3, 4, 5, 6)


def _check(n, d):
    if n < 1 or d < 1:
        raise ContractError(f"model needs n >= 1 and d >= 1, got n={n}, d={d}")


def complexity_embed(n, d) -> float:
    """``2**(d+1) s log2(2**d s) + 2**d s``: two full FFTs plus the diagonal multiply."""
    _check(n, d)
    s = n ** d
    return 2 ** (d + 1) * s * (d + d * math.log2(n)) + 2 ** d * s


def complexity_split(n, d) -> float:
    """``2 (2**d - 1) s (2 log2 n + 1) + 2**d s``.

    Counts ``2**l`` forward and ``2**l`` inverse single-axis FFTs at each level
    ``l = 1..d``, the leaf multiplies, and one split plus one merge phase
    multiply per internal node.
    """
    _check(n, d)
    s = n ** d
    return 2 * (2 ** d - 1) * s * (2 * math.log2(n) + 1) + 2 ** d * s


def complexity_ratio(n, d) -> float:
    """``complexity_embed / complexity_split`` in closed form."""
    _check(n, d)
    return (2 * d * math.log2(2 * n) + 1) / (2 * (1 - 2.0 ** -d) * (2 * math.log2(n) + 1) + 1)


def complexity_ratio_printed(n, d) -> float:
    """The commonly quoted simplification ``(d log2(2n) + 1) / ((1 - 2**-d)(2 log2 n + 1) + 1)``.

    It drops a factor 1/2 on both constant terms, so it is not exactly
    ``complexity_embed / complexity_split``; the large-``n`` limit is the same.
    """
    _check(n, d)
    return (d * math.log2(2 * n) + 1) / ((1 - 2.0 ** -d) * (2 * math.log2(n) + 1) + 1)


def complexity_ratio_limit(d) -> float:
    return d / (2 - 2.0 ** (-d + 1))


def memory_ratio(d) -> float:
    """Peak (vector + kernel) memory of embedding over split, general kernels."""
    return 2 / ((d + 1) * 2.0 ** -d + 1)


def memory_ratio_sym(d) -> float:
    """Same as :func:`memory_ratio` when (skew-)symmetric kernels are stored in ``s`` elements."""
    return (2 ** d + 1) / (d + 2)


@dataclass(frozen=True)
class ComplexityReport:
    d: int
    n: float
    c_embed: float
    c_split: float
    r_c: float
    r_c_printed: float
    r_c_limit: float
    r_m: float
    r_m_sym: float
    approximate_n: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def ratios(n, d) -> ComplexityReport:
    """Model report for uniform per-level length ``n``.

    ``n`` may also be a sequence of per-level lengths, in which case the
    geometric mean is used and ``approximate_n`` is set.
    """
    approx = False
    if isinstance(n, (list, tuple)):
        if len(set(n)) > 1:
            approx = True
        d = len(n)
        n = math.prod(n) ** (1 / d)
    if n < 2:
        raise ContractError(f"ratios need n >= 2, got {n}")
    return ComplexityReport(
        d=d,
        n=n,
        c_embed=complexity_embed(n, d),
        c_split=complexity_split(n, d),
        r_c=complexity_ratio(n, d),
        r_c_printed=complexity_ratio_printed(n, d),
        r_c_limit=complexity_ratio_limit(d),
        r_m=memory_ratio(d),
        r_m_sym=memory_ratio_sym(d),
        approximate_n=approx,
    )


def round2(x: float) -> str:
    """Two-decimal rendering with half-up rounding of the exact binary value."""
    return str(Decimal(x).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def table1() -> dict:
    """Asymptotic complexity and peak-memory ratios for d = 2..6, rounded to 2 places."""
    return {
        "dims": list(TABLE1_DIMS),
        "R_c": [round2(complexity_ratio_limit(d)) for d in TABLE1_DIMS],
        "R_m": [round2(memory_ratio(d)) for d in TABLE1_DIMS],
        "R_m_sym": [round2(memory_ratio_sym(d)) for d in TABLE1_DIMS],
    }


@dataclass(frozen=True)
class Reconciliation:
    d: int
    s: int
    split_leaf_mults: int
    split_phase_mults: int
    expected_leaf_mults: int
    expected_phase_mults: int
    split_fft_calls: int
    expected_fft_calls: int
    embed_fft_calls: int
    mult_ratio: float
    fft_call_ratio: float
    working_peak_ratio: float
    peak_ratio: float
    model_r_c: float
    model_r_m: float
    model_r_m_sym: float

    @property
    def counts_exact(self) -> bool:
        return (self.split_leaf_mults == self.expected_leaf_mults
                and self.split_phase_mults == self.expected_phase_mults
                and self.split_fft_calls == self.expected_fft_calls)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["counts_exact"] = self.counts_exact
        return out


def reconcile(model: ComplexityReport, split: RunMetrics, embed: RunMetrics) -> Reconciliation:
    """Line up measured counters of a split and an embed run against the model.

    ``peak_ratio`` includes stored kernel data and expansion scratch, which is
    what the model's memory ratios compare.
    """
    if tuple(split.shape) != tuple(embed.shape):
        raise ContractError(f"runs on different shapes: {split.shape} vs {embed.shape}")
    if len(split.shape) != model.d:
        raise ContractError(f"model has d={model.d}, runs have d={len(split.shape)}")
    d, s = model.d, split.size
    return Reconciliation(
        d=d,
        s=s,
        split_leaf_mults=split.leaf_mults,
        split_phase_mults=split.phase_mults,
        expected_leaf_mults=2 ** d * s,
        expected_phase_mults=2 * (2 ** d - 1) * s,
        split_fft_calls=split.fft_fwd,
        expected_fft_calls=2 ** (d + 1) - 2,
        embed_fft_calls=embed.fft_fwd,
        mult_ratio=embed.mults / split.mults,
        fft_call_ratio=(embed.fft_fwd + embed.fft_inv) / (split.fft_fwd + split.fft_inv),
        working_peak_ratio=embed.peak_elems / split.peak_elems,
        peak_ratio=embed.total_peak / split.total_peak,
        model_r_c=model.r_c,
        model_r_m=model.r_m,
        model_r_m_sym=model.r_m_sym,
    )
