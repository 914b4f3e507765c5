"""Tensor-algebra tests: transform conventions, product oracles, norms, TSR1."""

import numpy as np
import pytest

from ssmc import t_algebra as ta


def _dft_direct(t):
    # O(d^2) reference transform along depth
    t = np.asarray(t, dtype=np.float64)
    d = t.shape[2]
    k = np.arange(d)
    twiddle = np.exp(-2j * np.pi * np.outer(k, k) / d)
    return np.tensordot(t, twiddle, axes=(2, 0))


# -- fft3 / ifft3 ------------------------------------------------------------


def test_fft3_depth_one_is_identity():
    t = np.array([[[5.0]]])
    assert np.array_equal(ta.fft3(t), t.astype(complex))
    assert np.array_equal(ta.ifft3(ta.fft3(t)), t)


def test_fft3_depth_two_sum_and_difference():
    a, b = 2.0, 7.0
    f = ta.fft3(np.array([[[a, b]]]))
    assert np.allclose(f[0, 0], [a + b, a - b], atol=1e-15)


def test_fft3_matches_direct_dft_and_roundtrips():
    rng = np.random.default_rng(0)
    t = rng.standard_normal((4, 3, 8))
    assert np.abs(ta.fft3(t) - _dft_direct(t)).max() < 1e-12 * np.abs(t).max()
    assert np.abs(ta.ifft3(ta.fft3(t)) - t).max() < 1e-12


def test_ifft3_rejects_non_symmetric_spectrum():
    f = np.zeros((1, 1, 4), dtype=complex)
    f[0, 0, 1] = 1.0  # conjugate partner at frequency 3 missing
    with pytest.raises(ValueError, match="non-real inverse"):
        ta.ifft3(f)


def test_parseval_scaling():
    rng = np.random.default_rng(1)
    t = rng.standard_normal((3, 4, 7))
    assert abs(ta.norm_fro(t) - np.linalg.norm(ta.fft3(t)) / np.sqrt(7)) < 1e-12


# -- tube_conv ---------------------------------------------------------------


def test_tube_conv_identity_is_exact():
    rng = np.random.default_rng(2)
    b = rng.standard_normal(6)
    assert np.array_equal(ta.tube_conv(ta.e_tube(6, 0), b), b)


def test_tube_conv_shift():
    assert np.array_equal(
        ta.tube_conv(ta.e_tube(3, 1), np.array([1.0, 2.0, 3.0])), [3.0, 1.0, 2.0]
    )


def test_tube_conv_commutes_and_associates():
    rng = np.random.default_rng(3)
    a, b, c = rng.standard_normal((3, 5))
    assert np.abs(ta.tube_conv(a, b) - ta.tube_conv(b, a)).max() < 1e-12
    lhs = ta.tube_conv(ta.tube_conv(a, b), c)
    rhs = ta.tube_conv(a, ta.tube_conv(b, c))
    assert np.abs(lhs - rhs).max() < 1e-12


def test_tube_conv_length_mismatch():
    with pytest.raises(ValueError, match="3 vs 4"):
        ta.tube_conv(np.ones(3), np.ones(4))


# -- tprod and the block-circulant oracle ------------------------------------


def test_tprod_depth_one_is_matrix_multiply():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])[:, :, None]
    b = np.array([[1.0], [0.0]])[:, :, None]
    assert np.allclose(ta.tprod(a, b)[:, :, 0], [[1.0], [3.0]], atol=1e-14)


def test_tprod_identity_tensor():
    rng = np.random.default_rng(4)
    b = rng.standard_normal((3, 2, 5))
    assert np.abs(ta.tprod(ta.identity_tensor(3, 5), b) - b).max() < 1e-12


def test_tprod_matches_bcirc_oracle():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 2, 4))
    b = rng.standard_normal((2, 2, 4))
    c = ta.tprod(a, b)
    c_ref = ta.tprod_bcirc_oracle(a, b)
    assert np.linalg.norm(c - c_ref) < 1e-10 * np.linalg.norm(c)


def test_tprod_shape_error_names_both_shapes():
    with pytest.raises(ValueError, match=r"\(3, 2, 4\) vs \(3, 2, 4\)"):
        ta.tprod(np.zeros((3, 2, 4)), np.zeros((3, 2, 4)))
    with pytest.raises(ValueError, match="shape mismatch"):
        ta.tprod(np.zeros((3, 2, 4)), np.zeros((2, 2, 5)))


def test_tprod_zero_annihilates():
    rng = np.random.default_rng(6)
    b = rng.standard_normal((2, 3, 4))
    assert np.abs(ta.tprod(np.zeros((3, 2, 4)), b)).max() < 1e-14


def test_oracle_shift_tube():
    shift = ta.e_tube(3, 1)[None, None, :]
    tube = np.array([1.0, 2.0, 3.0])[None, None, :]
    out = ta.tprod_bcirc_oracle(shift, tube)
    assert np.allclose(out[0, 0], [3.0, 1.0, 2.0], atol=1e-14)


def test_oracle_size_guard():
    with pytest.raises(ValueError, match="oracle too large"):
        ta.bcirc(np.zeros((70, 1, 70)))
    with pytest.raises(ValueError, match="oracle too large"):
        ta.tprod_bcirc_oracle(np.zeros((70, 1, 70)), np.zeros((1, 1, 70)))


def test_bcirc_block_layout():
    a = np.arange(8, dtype=float).reshape(2, 2, 2)
    big = ta.bcirc(a)
    assert np.array_equal(big[:2, :2], a[:, :, 0])
    assert np.array_equal(big[2:, :2], a[:, :, 1])  # block (1, 0) = slice 1
    assert np.array_equal(big[:2, 2:], a[:, :, 1])  # block (0, 1) = slice -1 mod 2
    assert np.array_equal(big[2:, 2:], a[:, :, 0])


def test_unfold_fold_roundtrip():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((3, 4, 5))
    m = ta.unfold(a)
    assert m.shape == (15, 4)
    assert np.array_equal(m[:3], a[:, :, 0])
    assert np.array_equal(ta.fold(m, 3, 4, 5), a)
    with pytest.raises(ValueError, match="cannot fold"):
        ta.fold(m, 3, 4, 4)


# -- transpose ---------------------------------------------------------------


def test_ttranspose_depth_one():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((3, 2, 1))
    assert np.array_equal(ta.ttranspose(a)[:, :, 0], a[:, :, 0].T)


def test_ttranspose_reverses_trailing_slices():
    a = np.arange(12, dtype=float).reshape(2, 2, 3)
    at = ta.ttranspose(a)
    assert np.array_equal(at[:, :, 0], a[:, :, 0].T)
    assert np.array_equal(at[:, :, 1], a[:, :, 2].T)
    assert np.array_equal(at[:, :, 2], a[:, :, 1].T)


def test_ttranspose_involution_and_product_law():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((3, 2, 4))
    b = rng.standard_normal((2, 3, 4))
    assert np.array_equal(ta.ttranspose(ta.ttranspose(a)), a)
    lhs = ta.ttranspose(ta.tprod(a, b))
    rhs = ta.tprod(ta.ttranspose(b), ta.ttranspose(a))
    assert np.linalg.norm(lhs - rhs) < 1e-10 * max(1.0, np.linalg.norm(lhs))


# -- norms -------------------------------------------------------------------


def test_norm_f1_two_tube_example():
    a = np.zeros((2, 1, 3))
    a[0, 0] = [3.0, 4.0, 0.0]
    assert ta.norm_f1(a) == 5.0


def test_norms_coincide_for_single_tube():
    rng = np.random.default_rng(10)
    a = rng.standard_normal((1, 1, 6))
    assert ta.norm_f1(a) == pytest.approx(ta.norm_fro(a), abs=1e-14)
    assert ta.norm_ff1(a) == pytest.approx(ta.norm_fro(a), abs=1e-14)


def test_group_norms_dominate_frobenius():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((4, 3, 5))
    assert ta.norm_f1(a) >= ta.norm_fro(a)
    assert ta.norm_ff1(a) >= ta.norm_fro(a)
    assert ta.norm_f1(np.zeros((2, 2, 2))) == 0.0


# -- tubal angles ------------------------------------------------------------


def _first_face_unit(h, d, row):
    a = np.zeros((h, 1, d))
    a[row, 0, 0] = 1.0
    return a


def test_tubal_angle_self_first_face_is_unit_tube():
    a = _first_face_unit(3, 4, 0)
    tube = ta.tubal_angle_cos(a, a)
    assert np.abs(tube - ta.e_tube(4, 0)).max() < 1e-12


def test_tubal_angle_orthogonal_first_face_is_zero():
    a = _first_face_unit(3, 4, 0)
    b = _first_face_unit(3, 4, 1)
    assert np.abs(ta.tubal_angle_cos(a, b)).max() < 1e-12


def test_tubal_angle_matches_bcirc_oracle_and_is_symmetric():
    rng = np.random.default_rng(12)
    a = rng.standard_normal((4, 1, 3))
    b = rng.standard_normal((4, 1, 3))
    tube = ta.tubal_angle_cos(a, b)
    ref = ta.tprod_bcirc_oracle(ta.ttranspose(a), b) + ta.tprod_bcirc_oracle(
        ta.ttranspose(b), a
    )
    ref = ref[0, 0] / (2.0 * ta.norm_fro(a) * ta.norm_fro(b))
    assert np.abs(tube - ref).max() < 1e-10
    assert np.abs(tube - ta.tubal_angle_cos(b, a)).max() < 1e-14


def test_tubal_angle_rejects_zero_operand():
    a = _first_face_unit(2, 3, 0)
    with pytest.raises(ValueError, match="zero-norm"):
        ta.tubal_angle_cos(a, np.zeros((2, 1, 3)))


# -- block-circulant spectrum ------------------------------------------------


def test_bcirc_singular_values_two_point_tube():
    vals = ta.bcirc_singular_values(np.array([[[3.0, 1.0]]]))
    assert np.allclose(vals, [4.0, 2.0], atol=1e-12)


def test_bcirc_singular_values_depth_one_is_plain_svd():
    rng = np.random.default_rng(13)
    a = rng.standard_normal((4, 3, 1))
    ref = np.linalg.svd(a[:, :, 0], compute_uv=False)
    assert np.abs(ta.bcirc_singular_values(a) - ref).max() < 1e-12


def test_bcirc_singular_values_match_materialized_svd():
    rng = np.random.default_rng(14)
    a = rng.standard_normal((4, 3, 4))
    vals = ta.bcirc_singular_values(a)
    ref = np.linalg.svd(ta.bcirc(a), compute_uv=False)[: vals.size]
    assert np.abs(vals - ref).max() < 1e-8
    assert (np.diff(vals) <= 0).all()


# -- small constructors ------------------------------------------------------


def test_e_tube_bounds():
    assert np.array_equal(ta.e_tube(4, 3), [0.0, 0.0, 0.0, 1.0])
    with pytest.raises(ValueError, match="outside depth range"):
        ta.e_tube(4, 4)
    with pytest.raises(ValueError, match="outside depth range"):
        ta.e_tube(4, -1)


# -- TSR1 container ----------------------------------------------------------


def test_tsr1_roundtrip_is_bitwise(tmp_path):
    rng = np.random.default_rng(15)
    t = rng.standard_normal((3, 5, 2))
    path = tmp_path / "t.tsr1"
    ta.write_tsr1(path, t)
    assert np.array_equal(ta.read_tsr1(path), t)


def test_tsr1_header_layout(tmp_path):
    t = np.array([[[1.5]]])
    path = tmp_path / "t.tsr1"
    ta.write_tsr1(path, t)
    raw = path.read_bytes()
    assert raw[:4] == b"TSR1"
    assert raw[4:16] == (1).to_bytes(4, "little") * 3
    assert len(raw) == 16 + 8


def test_tsr1_error_paths(tmp_path):
    path = tmp_path / "bad.tsr1"
    path.write_bytes(b"TSR")
    with pytest.raises(ta.FormatError, match="truncated"):
        ta.read_tsr1(path)
    path.write_bytes(b"XXXX" + bytes(12))
    with pytest.raises(ta.FormatError, match="magic"):
        ta.read_tsr1(path)
    path.write_bytes(b"TSR1" + bytes(12))
    with pytest.raises(ta.FormatError, match="dimensions"):
        ta.read_tsr1(path)
    ta.write_tsr1(path, np.ones((2, 2, 2)))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ta.FormatError, match="expected"):
        ta.read_tsr1(path)
    ta.write_tsr1(path, np.ones((1, 1, 1)))
    raw = bytearray(path.read_bytes())
    raw[16:24] = np.array([np.nan]).tobytes()
    path.write_bytes(bytes(raw))
    with pytest.raises(ta.FormatError, match="non-finite"):
        ta.read_tsr1(path)
