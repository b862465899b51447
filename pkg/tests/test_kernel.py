import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitfft.kernel import (EmbeddedSpectrum, GeneratorSpec, KernelSpectra,
                             Symmetry, SymmetryError, build_kernel, compress_spectra,
                             embed_generator, expand_block, next_id, parity_slices,
                             precompute_spectra, symmetrize)
from splitfft.tensor import ContractError

from conftest import direct_dft, random_complex


def direct_dftn(a):
    """Multidimensional DFT as successive direct sums; no numpy.fft."""
    a = np.asarray(a, dtype=complex)
    for axis in range(a.ndim):
        n = a.shape[axis]
        k = np.arange(n)
        w = np.exp(-2j * np.pi * np.outer(k, k) / n)
        a = np.moveaxis(np.tensordot(w, np.moveaxis(a, axis, 0), axes=(1, 0)), 0, axis)
    return a


def circulant(col):
    n = len(col)
    return np.array([[col[(j - k) % n] for k in range(n)] for j in range(n)])


def random_generator(rng, levels, symmetry=Symmetry.GENERAL):
    lags = random_complex(rng, [2 * n - 1 for n in levels])
    return GeneratorSpec(levels, symmetrize(lags, symmetry), symmetry)


def test_embed_matches_display_first_column():
    t11, t21, t12, s0 = 5, 7, 11, 13
    g = GeneratorSpec((2,), [t12, t11, t21])
    e = embed_generator(g, s0)
    np.testing.assert_array_equal(e, [t11, t21, s0, t12])
    display = np.array([[t11, t12, s0, t21],
                        [t21, t11, t12, s0],
                        [s0, t21, t11, t12],
                        [t12, s0, t21, t11]])
    np.testing.assert_array_equal(circulant(e), display)


def test_embed_worked_case_reproduces_dense_block():
    g = GeneratorSpec((2,), [2, 1, 3])
    e = embed_generator(g)
    np.testing.assert_array_equal(e, [1, 3, 0, 2])
    np.testing.assert_array_equal(circulant(e)[:2, :2], [[1, 2], [3, 1]])


def test_embed_symmetric_pattern():
    a, b, c, e_ = 1, 2, 3, 4
    g = GeneratorSpec((4,), [e_, c, b, a, b, c, e_], Symmetry.SYMMETRIC)
    np.testing.assert_array_equal(embed_generator(g), [a, b, c, e_, 0, e_, c, b])


def test_embed_two_level_symmetric_pattern(rng):
    g = random_generator(rng, (4, 4), Symmetry.SYMMETRIC)
    e = embed_generator(g)
    assert e.shape == (8, 8)
    np.testing.assert_array_equal(e[4], 0)
    np.testing.assert_array_equal(e[:, 4], 0)
    mirror = (8 - np.arange(8)) % 8
    np.testing.assert_array_equal(e, e[mirror])
    np.testing.assert_array_equal(e, e[:, mirror])
    np.testing.assert_array_equal(e[:4, :4], g.lags[3:, 3:])


def test_padding_plane_holds_s0(rng):
    g = random_generator(rng, (2, 3, 2))
    e = embed_generator(g, s0=7 + 3j)
    assert np.all(e[2] == 7 + 3j)
    assert np.all(e[:, 3] == 7 + 3j)
    assert np.all(e[:, :, 2] == 7 + 3j)


def test_precompute_worked_case():
    e = embed_generator(GeneratorSpec((2,), [2, 1, 3]))
    np.testing.assert_allclose(direct_dft(e), [6, 1 - 1j, -4, 1 + 1j], atol=1e-14)
    k = precompute_spectra(e)
    np.testing.assert_allclose(k.blocks[0], [6, -4], atol=1e-14)
    np.testing.assert_allclose(k.blocks[1], [1 - 1j, 1 + 1j], atol=1e-14)


def test_precompute_degenerate_level():
    c = 2.5 - 1j
    k = precompute_spectra(np.array([c, 0]))
    np.testing.assert_allclose(k.blocks[0], [c])
    np.testing.assert_allclose(k.blocks[1], [c])


@pytest.mark.parametrize("strategy", ["full-fft", "branchwise"])
@pytest.mark.parametrize("levels", [(2,), (5,), (3, 4), (2, 3, 6), (6, 1, 4)])
def test_deinterleave_matches_direct_dft(levels, strategy, rng):
    e = embed_generator(random_generator(rng, levels), s0=rng.normal())
    full = direct_dftn(e)
    k = precompute_spectra(e, strategy)
    assert sorted(k.blocks) == list(range(2 ** len(levels)))
    for b, block in k.blocks.items():
        assert block.shape == levels
        np.testing.assert_allclose(block, full[parity_slices(b, len(levels))],
                                   rtol=0, atol=1e-12 * np.abs(full).max())


def test_strategies_agree(rng):
    e = embed_generator(random_generator(rng, (3, 3)))
    a = precompute_spectra(e, "full-fft")
    b = precompute_spectra(e, "branchwise")
    for bid in a.blocks:
        np.testing.assert_allclose(a.blocks[bid], b.blocks[bid], rtol=0, atol=1e-12)


def test_unknown_strategy():
    with pytest.raises(ContractError):
        precompute_spectra(np.zeros(4), "magic")


def test_symmetry_validation(rng):
    with pytest.raises(SymmetryError):
        GeneratorSpec((2,), [1, 2, 3], "symmetric")
    with pytest.raises(SymmetryError):
        GeneratorSpec((2,), [-1, 1, 1], "skew")
    GeneratorSpec((2,), [-1, 0, 1], "skew")
    # per level: central symmetry alone is not enough
    lags = rng.normal(size=(3, 3))
    central = lags + lags[::-1, ::-1]
    with pytest.raises(SymmetryError):
        GeneratorSpec((2, 2), central, "symmetric")


def test_generator_shape_validation():
    with pytest.raises(ContractError):
        GeneratorSpec((3,), [1, 2, 3])
    with pytest.raises(ContractError):
        GeneratorSpec((0,), [])


def test_symmetrize_is_exact(rng):
    for sym in (Symmetry.SYMMETRIC, Symmetry.SKEW):
        GeneratorSpec((3, 4, 2), symmetrize(random_complex(rng, (5, 7, 3)), sym), sym)


def test_lag_accessor():
    g = GeneratorSpec((2,), [2, 1, 3])
    assert (g.lag(-1), g.lag(0), g.lag(1)) == (2, 1, 3)
    with pytest.raises(ContractError):
        g.lag(2)


def test_compress_symmetric_d1_example():
    a, b = 1.5, -0.25
    g = GeneratorSpec((2,), [b, a, b], Symmetry.SYMMETRIC)
    e = embed_generator(g)
    np.testing.assert_array_equal(e, [a, b, 0, b])
    np.testing.assert_allclose(direct_dft(e), [a + 2 * b, a, a - 2 * b, a], atol=1e-15)
    kc = compress_spectra(precompute_spectra(e), g)
    assert kc.blocks[0].size == 2 and kc.blocks[1].size == 1
    np.testing.assert_allclose(kc.blocks[1], [a])
    np.testing.assert_allclose(expand_block(kc, 1), [a, a])
    np.testing.assert_allclose(expand_block(kc, 0), [a + 2 * b, a - 2 * b])


def test_skew_spectrum_zero_at_fixed_points(rng):
    for n in (2, 3, 5):
        g = random_generator(rng, (n,), Symmetry.SKEW)
        f = direct_dft(embed_generator(g))
        assert abs(f[0]) < 1e-12 and abs(f[n]) < 1e-12


def test_skew_sign_flip_on_mirrored_index(rng):
    g = random_generator(rng, (4,), Symmetry.SKEW)
    kc = build_kernel(g, compress=True)
    even, odd = expand_block(kc, 0), expand_block(kc, 1)
    np.testing.assert_allclose(even[3], -even[1])
    np.testing.assert_allclose(odd[3], -odd[0])
    np.testing.assert_allclose(odd[2], -odd[1])


def test_expand_zero_kernel():
    g = GeneratorSpec((3, 2), np.zeros((5, 3)), Symmetry.SYMMETRIC)
    kc = build_kernel(g, compress=True)
    for b in range(4):
        np.testing.assert_array_equal(expand_block(kc, b), np.zeros((3, 2)))


@pytest.mark.parametrize("symmetry", [Symmetry.SYMMETRIC, Symmetry.SKEW])
def test_compress_round_trip_d2_n4(symmetry, rng):
    g = random_generator(rng, (4, 4), symmetry)
    full = build_kernel(g)
    kc = compress_spectra(full, g)
    for b in range(4):
        np.testing.assert_allclose(expand_block(kc, b), full.blocks[b], rtol=0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(levels=st.lists(st.integers(1, 6), min_size=1, max_size=3),
       symmetry=st.sampled_from([Symmetry.SYMMETRIC, Symmetry.SKEW]),
       seed=st.integers(0, 2**32 - 1))
def test_compression_exact_and_small(levels, symmetry, seed):
    g = random_generator(np.random.default_rng(seed), tuple(levels), symmetry)
    full = build_kernel(g)
    kc = compress_spectra(full, g)
    assert kc.n_elements <= np.prod([n + 1 for n in levels])
    scale = max(1.0, max(np.abs(b).max() for b in full.blocks.values()))
    for b in full.blocks:
        np.testing.assert_allclose(expand_block(kc, b), full.blocks[b], rtol=0, atol=1e-12 * scale)
        slabs = np.stack([np.reshape(kc.slab(b, i), full.blocks[b].shape[1:])
                          for i in range(levels[0])])
        np.testing.assert_allclose(slabs, full.blocks[b], rtol=0, atol=1e-12 * scale)


def test_compress_rejects_general_and_padded_skew(rng):
    g = random_generator(rng, (3,))
    with pytest.raises(SymmetryError):
        compress_spectra(build_kernel(g), g)
    skew = random_generator(rng, (3, 2), Symmetry.SKEW)
    with pytest.raises(SymmetryError):
        build_kernel(skew, s0=1.0, compress=True)
    sym = random_generator(rng, (3, 2), Symmetry.SYMMETRIC)
    build_kernel(sym, s0=1.0, compress=True)


def test_missing_block_is_integrity_error():
    k = KernelSpectra((2,), {0: np.ones(2)})
    with pytest.raises(ContractError):
        k.block(1)


@pytest.mark.parametrize("symmetry", [Symmetry.SYMMETRIC, Symmetry.SKEW])
def test_embedded_spectrum_compression(symmetry, rng):
    g = random_generator(rng, (3, 4), symmetry)
    full = EmbeddedSpectrum(g)
    comp = EmbeddedSpectrum(g, compress=True)
    assert comp.n_elements == 4 * 5
    np.testing.assert_allclose(comp.full(), full.data, rtol=0, atol=1e-12)
    for i in range(6):
        np.testing.assert_allclose(comp.slab(i), full.data[i], rtol=0, atol=1e-12)


def test_next_id():
    assert next_id(0b000, 1) == 0b001
    assert next_id(0b001, 2) == 0b011
    with pytest.raises(ContractError):
        next_id(0b010, 2)


def test_leaf_ids_enumerate_all_parities():
    # ids reachable by choosing even (keep) or odd (next_id) at each level
    for d in range(1, 5):
        ids = [0]
        for level in range(1, d + 1):
            ids = [x for b in ids for x in (b, next_id(b, level))]
        assert sorted(ids) == list(range(2 ** d))
        assert len(set(ids)) == len(ids)
        assert set(ids) == {sum(bit << i for i, bit in enumerate(bits))
                            for bits in itertools.product((0, 1), repeat=d)}
