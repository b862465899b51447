import itertools

import numpy as np
import pytest

from splitfft.baseline import (OracleCapError, dense_toeplitz, naive_matvec,
                               toe_mul_embed)
from splitfft.bench import make_instance
from splitfft.kernel import EmbeddedSpectrum, GeneratorSpec

from conftest import random_complex, rel_err

WORKED = GeneratorSpec((2,), [2, 1, 3])


def test_embed_worked_case():
    y, _ = toe_mul_embed(WORKED, [1, 1])
    np.testing.assert_allclose(y, [3, 4], atol=1e-14)


def test_naive_worked_case():
    np.testing.assert_allclose(naive_matvec(WORKED, [1, 1]), [3, 4])
    np.testing.assert_array_equal(dense_toeplitz(WORKED), [[1, 2], [3, 1]])


def test_identity_generator(rng):
    g = GeneratorSpec.identity((3, 2))
    v = random_complex(rng, (3, 2))
    y, _ = toe_mul_embed(g, v)
    np.testing.assert_allclose(y, v, atol=1e-14)
    np.testing.assert_array_equal(dense_toeplitz(g), np.eye(6))


def test_embed_vs_naive_d2():
    g, v = make_instance(2, 3, seed=3)
    assert rel_err(toe_mul_embed(g, v)[0], naive_matvec(g, v)) <= 1e-10


def test_naive_zero_vector():
    g, _ = make_instance(2, 3, seed=3)
    np.testing.assert_array_equal(naive_matvec(g, np.zeros((3, 3))), 0)


def test_symmetric_dense_is_transpose():
    g, _ = make_instance(2, (3, 4), seed=0, symmetry="symmetric")
    t = dense_toeplitz(g)
    np.testing.assert_array_equal(t, t.T)
    skew, _ = make_instance(1, 4, seed=0, symmetry="skew")
    t = dense_toeplitz(skew)
    np.testing.assert_array_equal(t, -t.T)


def test_dense_constant_along_multilevel_diagonals():
    levels = (2, 3, 2)
    g, _ = make_instance(3, levels, seed=8)
    t = dense_toeplitz(g)
    idx = list(itertools.product(*(range(n) for n in levels)))
    for j, mj in enumerate(idx):
        for k, mk in enumerate(idx):
            assert t[j, k] == g.lag(*(a - b for a, b in zip(mj, mk)))


def test_oracle_cap():
    g, v = make_instance(2, 8, seed=0)
    with pytest.raises(OracleCapError):
        naive_matvec(g, v, cap=63)
    naive_matvec(g, v, cap=64)


@pytest.mark.parametrize("levels", [(8,), (4, 4), (3, 4, 5)])
def test_embed_metrics(levels):
    g, v = make_instance(len(levels), levels, seed=1)
    _, m = toe_mul_embed(g, v)
    s, d = int(np.prod(levels)), len(levels)
    assert m.peak_elems >= 2 ** d * s
    assert m.leaf_mults == m.mults == 2 ** d * s
    assert m.fft_fwd == m.fft_inv == d
    assert m.kernel_elems == 2 ** d * s


@pytest.mark.parametrize("symmetry", ["symmetric", "skew"])
def test_embed_compressed(symmetry):
    g, v = make_instance(3, (3, 4, 2), seed=6, symmetry=symmetry)
    spectrum = EmbeddedSpectrum(g, compress=True)
    y, m = toe_mul_embed(g, v, spectrum=spectrum)
    assert rel_err(y, naive_matvec(g, v)) <= 1e-10
    assert m.kernel_elems == 4 * 5 * 3
    assert m.scratch_peak == 8 * 4


def test_embed_padding_independent():
    g, v = make_instance(2, 3, seed=2)
    ys = [toe_mul_embed(g, v, s0=s0)[0] for s0 in (0, 1, 7 + 3j)]
    assert rel_err(ys[1], ys[0]) <= 1e-12 and rel_err(ys[2], ys[0]) <= 1e-12
