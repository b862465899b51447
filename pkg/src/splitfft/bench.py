"""Seeded instances and the verify / bench / predict drivers behind the CLI.

Instances are reproducible across implementations: for a given ``seed`` and
per-level lengths ``(n_1, ..., n_d)`` the root stream is
``SeedSequence(entropy=seed, spawn_key=(n_1, ..., n_d))``; its first spawned
child drives the lags and the second the input vector, both through PCG64.
Each draws all real parts, then all imaginary parts, row-major, from
``N(0, variance)``.
"""

from __future__ import annotations

import csv
import io
import logging
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .baseline import DEFAULT_ORACLE_CAP, OracleCapError, naive_matvec, toe_mul_embed
from .kernel import (EmbeddedSpectrum, GeneratorSpec, Symmetry, build_kernel,
                     symmetrize)
from .split import ExecutionPolicy, toe_mul_split
from .tensor import ContractError

log = logging.getLogger(__name__)

CSV_FIELDS = ["run_id", "d", "n", "method", "policy", "symmetry", "seed", "rep",
              "wall_ns", "fft_fwd", "fft_inv", "mults", "peak_elems"]
VERIFY_TOL = 1e-10


def _complex_normal(rng, shape, variance):
    scale = np.sqrt(variance)
    re = rng.normal(0.0, scale, size=shape)
    im = rng.normal(0.0, scale, size=shape)
    return re + 1j * im


def make_instance(d, sizes, seed, variance=1.0, symmetry=Symmetry.GENERAL):
    """Random ``(GeneratorSpec, vector)`` pair.

    ``sizes`` is a single length used on every level or one length per level.
    Symmetric and skew modes project the drawn lags with :func:`symmetrize`.
    """
    if np.isscalar(sizes):
        sizes = (int(sizes),) * d
    sizes = tuple(int(n) for n in sizes)
    if len(sizes) != d:
        raise ContractError(f"{len(sizes)} sizes given for d={d}")
    if variance < 0:
        raise ContractError("variance must be >= 0")
    root = np.random.SeedSequence(entropy=int(seed), spawn_key=sizes)
    lag_seq, vec_seq = root.spawn(2)
    lag_rng = np.random.Generator(np.random.PCG64(lag_seq))
    vec_rng = np.random.Generator(np.random.PCG64(vec_seq))
    lags = _complex_normal(lag_rng, [2 * n - 1 for n in sizes], variance)
    v = _complex_normal(vec_rng, sizes, variance)
    symmetry = Symmetry(symmetry)
    return GeneratorSpec(sizes, symmetrize(lags, symmetry), symmetry), v


def rel_err(a, b) -> float:
    diff = np.linalg.norm(np.ravel(a) - np.ravel(b))
    ref = np.linalg.norm(np.ravel(b))
    return float(diff / ref) if ref > 0 else float(diff)


@dataclass
class BenchConfig:
    dims: list = field(default_factory=lambda: [1, 2, 3])
    sizes: list = field(default_factory=lambda: [4, 8])
    seed: int = 0
    variance: float = 1.0
    repetitions: int = 3
    policy: ExecutionPolicy = field(default_factory=ExecutionPolicy)
    symmetry: Symmetry = Symmetry.GENERAL
    oracle_cap: int = DEFAULT_ORACLE_CAP

    def __post_init__(self):
        self.symmetry = Symmetry(self.symmetry)
        if any(n < 2 for n in self.sizes):
            raise ContractError("all sizes must be >= 2")
        if self.repetitions < 1:
            raise ContractError("repetitions must be >= 1")
        if any(d < 1 for d in self.dims):
            raise ContractError("dims must be >= 1")

    @property
    def compress(self) -> bool:
        return self.symmetry is not Symmetry.GENERAL


def verify_instance(g: GeneratorSpec, v, policy=None, oracle_cap=DEFAULT_ORACLE_CAP) -> dict:
    """Cross-check split, embed and (when under the cap) the dense oracle."""
    k = build_kernel(g)
    y_split, _ = toe_mul_split(k, v, policy)
    y_embed, _ = toe_mul_embed(g, v)
    rec = {"levels": list(g.levels), "symmetry": g.symmetry.value,
           "err_split_embed": rel_err(y_split, y_embed)}
    if g.symmetry is not Symmetry.GENERAL:
        y_comp, _ = toe_mul_split(build_kernel(g, compress=True), v, policy)
        rec["err_compressed_split"] = rel_err(y_comp, y_split)
    try:
        y_naive = naive_matvec(g, v, cap=oracle_cap)
    except OracleCapError as exc:
        log.warning("skipping dense oracle for levels %s: %s", g.levels, exc)
        rec["err_split_naive"] = None
    else:
        rec["err_split_naive"] = rel_err(y_split, y_naive)
        rec["err_embed_naive"] = rel_err(y_embed, y_naive)
    errs = [x for key, x in rec.items() if key.startswith("err_") and x is not None]
    rec["max_rel_err"] = max(errs)
    rec["status"] = "PASS" if rec["max_rel_err"] <= VERIFY_TOL else "FAIL"
    return rec


def run_verify(config: BenchConfig) -> tuple[bool, list]:
    records = []
    for d in config.dims:
        for n in config.sizes:
            for rep in range(config.repetitions):
                seed = config.seed + rep
                g, v = make_instance(d, n, seed, config.variance, config.symmetry)
                rec = verify_instance(g, v, config.policy, config.oracle_cap)
                rec.update(d=d, n=n, seed=seed)
                records.append(rec)
    return all(r["status"] == "PASS" for r in records), records


def _row(d, n, method, config, rep, wall_ns, metrics):
    return {
        "run_id": f"{d}-{n}-{rep}",
        "d": d,
        "n": n,
        "method": method,
        "policy": config.policy.mode if method == "split" else "sequential",
        "symmetry": config.symmetry.value,
        "seed": config.seed,
        "rep": rep,
        "wall_ns": wall_ns,
        "fft_fwd": metrics.fft_fwd if metrics else "",
        "fft_inv": metrics.fft_inv if metrics else "",
        "mults": metrics.mults if metrics else "",
        "peak_elems": metrics.peak_elems if metrics else "",
    }


def _stats(values):
    if not values:
        return None
    return {
        "min": min(values),
        "median": statistics.median(values),
        "mean": statistics.fmean(values),
        "variance": statistics.pvariance(values),
    }


def _bench_case(config, d, n, rows):
    g, v = make_instance(d, n, config.seed, config.variance, config.symmetry)
    t0 = time.perf_counter_ns()
    kernel = build_kernel(g, compress=config.compress)
    split_setup = time.perf_counter_ns() - t0
    t0 = time.perf_counter_ns()
    spectrum = EmbeddedSpectrum(g, compress=config.compress)
    embed_setup = time.perf_counter_ns() - t0

    walls = {"split": [], "embed": []}
    metrics = {}
    for rep in range(config.repetitions):
        for method in ("split", "embed"):
            t0 = time.perf_counter_ns()
            if method == "split":
                _, m = toe_mul_split(kernel, v, config.policy)
            else:
                _, m = toe_mul_embed(g, v, spectrum=spectrum)
            wall = time.perf_counter_ns() - t0
            walls[method].append(wall)
            metrics[method] = m
            rows.append(_row(d, n, method, config, rep, wall, m))

    model = analysis.ratios(n, d)
    rec = analysis.reconcile(model, metrics["split"], metrics["embed"])
    split_t, embed_t = _stats(walls["split"]), _stats(walls["embed"])
    return {
        "d": d, "n": n, "status": "ok",
        "split_setup_ns": split_setup, "embed_setup_ns": embed_setup,
        "split_wall_ns": split_t, "embed_wall_ns": embed_t,
        "wall_ratio_median": embed_t["median"] / split_t["median"],
        "split_kernel_elems": metrics["split"].kernel_elems,
        "embed_kernel_elems": metrics["embed"].kernel_elems,
        "reconciliation": rec.as_dict(),
    }


def run_bench(config: BenchConfig) -> tuple[list, list]:
    """Time split and embed products; returns ``(rows, summary)``.

    A case that runs out of memory gets one ``failed`` row per method and the
    run moves on.
    """
    rows, summary = [], []
    for d in config.dims:
        for n in config.sizes:
            start = len(rows)
            try:
                summary.append(_bench_case(config, d, n, rows))
            except MemoryError:
                log.error("out of memory at d=%d n=%d", d, n)
                del rows[start:]
                for method in ("split", "embed"):
                    rows.append(_row(d, n, method, config, 0, "failed", None))
                summary.append({"d": d, "n": n, "status": "failed: out of memory"})
    return rows, summary


def run_predict(dims, sizes) -> list:
    return [analysis.ratios(n, d).as_dict() for d in dims for n in sizes]


def rows_to_csv(rows, fields=CSV_FIELDS) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
