import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from wavediag.errors import StructureError
from wavediag.wavelet import (
    WaveletPyramid,
    compress,
    decompose,
    haar_forward_step,
    haar_inverse_step,
    reconstruct,
)

TABLE2_INPUT = [48, 34, 24, 60, 72, 28, 55, 121]
R2 = np.sqrt(2)


def haar_matrix(n):
    """Orthonormal single-step analysis matrix: first n/2 rows averages, last n/2 differences."""
    H = np.zeros((n, n))
    for k in range(n // 2):
        H[k, 2 * k] = H[k, 2 * k + 1] = 1 / R2
        H[n // 2 + k, 2 * k] = 1 / R2
        H[n // 2 + k, 2 * k + 1] = -1 / R2
    return H


def matrix_decompose(x, levels):
    """Oracle: repeated multiplication by explicit Haar matrices."""
    a = np.asarray(x, dtype=float)
    details = []
    for _ in range(levels):
        y = haar_matrix(a.size) @ a
        a, d = y[: a.size // 2], y[a.size // 2:]
        details.append(d)
    return details, a


def test_forward_step_table2():
    a, d = haar_forward_step(TABLE2_INPUT)
    np.testing.assert_allclose(a, [57.9828, 59.3970, 70.7107, 124.4508], atol=1e-3)
    np.testing.assert_allclose(d, [9.8995, -25.4558, 31.1127, -46.6690], atol=1e-3)


def test_forward_step_constant_pair():
    a, d = haar_forward_step([3.5, 3.5])
    assert a[0] == pytest.approx(3.5 * R2)
    assert d[0] == 0


@pytest.mark.parametrize("bad", [[], [1.0], [1.0, 2.0, 3.0]])
def test_forward_step_rejects_odd_or_empty(bad):
    with pytest.raises(ValueError):
        haar_forward_step(bad)


def test_inverse_steps_table2():
    np.testing.assert_allclose(haar_inverse_step([83, 138], [-1, -38]),
                               [57.9828, 59.3970, 70.7107, 124.4508], atol=1e-3)
    np.testing.assert_allclose(haar_inverse_step([156.2706], [-38.8909]), [83, 138], atol=1e-3)
    with pytest.raises(ValueError):
        haar_inverse_step([1.0], [1.0, 2.0])


def test_forward_inverse_random(rng):
    for _ in range(50):
        x = rng.standard_normal(2 * int(rng.integers(1, 100)))
        np.testing.assert_allclose(haar_inverse_step(*haar_forward_step(x)), x, atol=1e-9)


def test_decompose_table2():
    p = decompose(TABLE2_INPUT, 3)
    np.testing.assert_allclose(p.levels[0], [9.8995, -25.4558, 31.1127, -46.6690], atol=1e-3)
    np.testing.assert_allclose(p.levels[1], [-1, -38], atol=1e-3)
    np.testing.assert_allclose(p.levels[2], [-38.8909], atol=1e-3)
    np.testing.assert_allclose(p.approx, [156.2706], atol=1e-3)
    np.testing.assert_allclose(reconstruct(p), TABLE2_INPUT, atol=1e-3)


def test_decompose_matches_matrix_oracle(rng):
    for levels in range(1, 7):
        x = rng.standard_normal(64 * 3)
        details, approx = matrix_decompose(x, levels)
        p = decompose(x, levels)
        for got, want in zip(p.levels, details):
            np.testing.assert_allclose(got, want, atol=1e-12)
        np.testing.assert_allclose(p.approx, approx, atol=1e-12)


def test_decompose_constant():
    p = decompose([2.0] * 8, 3)
    np.testing.assert_allclose(p.approx, [2 * R2 * 2.0])
    for d in p.levels:
        assert np.all(d == 0)


def test_decompose_rejects_indivisible_length():
    with pytest.raises(ValueError, match="2\\*\\*3"):
        decompose(np.zeros(12), 3)
    with pytest.raises(ValueError):
        decompose(np.zeros(4), 3)
    with pytest.raises(ValueError):
        decompose(np.zeros(8), 0)


def test_round_trip_up_to_level_12(rng):
    for levels in range(1, 13):
        x = rng.standard_normal((1 << levels) * int(rng.integers(1, 3)))
        err = np.max(np.abs(reconstruct(decompose(x, levels)) - x))
        assert err < 1e-9 * (1 + np.max(np.abs(x)))


def test_pyramid_round_trip_from_coefficients(rng):
    for levels in range(1, 8):
        n = 1 << (levels + 1)
        pyr = WaveletPyramid(tuple(rng.standard_normal(n >> (k + 1)) for k in range(levels)),
                             rng.standard_normal(n >> levels), n)
        again = decompose(reconstruct(pyr), levels)
        for a, b in zip(again.levels, pyr.levels):
            np.testing.assert_allclose(a, b, atol=1e-9)
        np.testing.assert_allclose(again.approx, pyr.approx, atol=1e-9)


def test_single_level_pyramid_reconstructs_pair():
    c = 1.7
    np.testing.assert_allclose(reconstruct(WaveletPyramid(([0.0],), [c * R2], 2)), [c, c])


def test_pyramid_structure_checked():
    with pytest.raises(StructureError):
        WaveletPyramid(([0.0, 0.0],), [1.0], 2)
    with pytest.raises(StructureError):
        WaveletPyramid(([0.0],), [1.0, 2.0], 2)
    with pytest.raises(StructureError):
        WaveletPyramid((), [1.0], 1)


def test_pyramid_csv_round_trip(rng):
    p = decompose(rng.standard_normal(32), 4)
    q = WaveletPyramid.from_csv(p.to_csv())
    assert q.original_len == 32
    for a, b in zip(p.levels, q.levels):
        assert np.array_equal(a, b)
    assert np.array_equal(p.approx, q.approx)


def test_compress_geometry():
    assert compress(np.zeros(160), 3).shape == (20,)
    assert compress(np.zeros(300_000), 3).shape == (37_500,)
    a, b = 2.0, 5.0
    np.testing.assert_allclose(compress([a, b], 1), [(a + b) / R2])
    with pytest.raises(ValueError):
        compress(np.zeros(8), 0)


def test_compress_works_per_channel(rng):
    x = rng.standard_normal((4, 64))
    c = compress(x, 3)
    for row, got in zip(x, c):
        np.testing.assert_allclose(got, decompose(row, 3).approx, atol=1e-12)


def test_repeated_single_level_equals_multi_level(rng):
    x = rng.standard_normal(256)
    y = x
    for _ in range(5):
        y = compress(y, 1)
    np.testing.assert_allclose(y, compress(x, 5), atol=1e-9)


def test_compress_constant_scales_by_power_of_root_two():
    for L in range(1, 6):
        np.testing.assert_allclose(compress(np.full(64, 3.0), L), 3.0 * 2 ** (L / 2))


lengths = st.integers(1, 6).flatmap(lambda L: st.tuples(st.just(L), st.integers(1, 4).map(lambda m: m << L)))


@settings(max_examples=60, deadline=None)
@given(lengths.flatmap(lambda Ln: st.tuples(
    st.just(Ln[0]),
    hnp.arrays(np.float64, Ln[1], elements=st.floats(-1e6, 1e6)),
    hnp.arrays(np.float64, Ln[1], elements=st.floats(-1e6, 1e6)),
    st.floats(-10, 10), st.floats(-10, 10))))
def test_parseval_linearity_and_round_trip(case):
    L, x, y, alpha, beta = case
    scale = 1 + np.max(np.abs(x))
    assert np.max(np.abs(reconstruct(decompose(x, L)) - x)) < 1e-9 * scale
    a = x
    for _ in range(L):
        na, nd = haar_forward_step(a)
        e0, e1 = np.sum(a ** 2), np.sum(na ** 2) + np.sum(nd ** 2)
        assert abs(e0 - e1) <= 1e-9 * max(e0, 1e-300) + 1e-300
        a = na
    px, py, pz = decompose(x, L), decompose(y, L), decompose(alpha * x + beta * y, L)
    tol = 1e-9 * (1 + abs(alpha) * scale + abs(beta) * (1 + np.max(np.abs(y))))
    for dx, dy, dz in zip(px.levels, py.levels, pz.levels):
        assert np.max(np.abs(alpha * dx + beta * dy - dz)) < tol
    assert np.max(np.abs(alpha * px.approx + beta * py.approx - pz.approx)) < tol
