import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trwopt import io
from trwopt.masks import gen_mask_block, gen_mask_lines, gen_mask_random, missing_rate
from trwopt.metrics import mse, psnr, rse
from trwopt.ring import init_random
from trwopt.synthetic import gen_synthetic, oscillating, synthetic_tensor
from trwopt.tensorize import TensorizationPlan, detensorize_visual, parse_plan, tensorize_visual

# synthetic signal ----------------------------------------------------------


def test_synthetic_at_zero():
    assert gen_synthetic(10)[0] == pytest.approx(np.sqrt(2) / 2, rel=1e-15)


def test_synthetic_bound():
    v = gen_synthetic(5000, scale=40.0)
    assert np.all(np.abs(v) <= np.sin(np.pi / 4) + 1e-15)


def test_synthetic_first_samples():
    v = gen_synthetic(100, scale=1.0)
    x = np.array([0.0, 0.01, 0.02, 0.03, 0.04])
    np.testing.assert_allclose(v[:5], np.sqrt(2) / 2 * np.cos(x**2), rtol=1e-15)


def test_synthetic_alternative_form():
    x = np.array([0.0, 1.0, 2.5])
    np.testing.assert_allclose(oscillating(x, "x4"), np.sin(x / 4) * np.cos(x**2), rtol=1e-15)
    with pytest.raises(ValueError):
        oscillating(x, "other")


def test_synthetic_tensor_reshape():
    x = synthetic_tensor((16, 16, 16, 16))
    assert x.shape == (16,) * 4 and x.size == 65536
    np.testing.assert_array_equal(x.ravel(order="F"), gen_synthetic(65536))


# masks ---------------------------------------------------------------------


def test_random_mask_extremes():
    assert np.all(gen_mask_random((3, 4), 0.0, seed=1) == 1)
    assert np.all(gen_mask_random((3, 4), 1.0, seed=1) == 0)


def test_random_mask_count():
    w = gen_mask_random((10, 10), 0.95, seed=3)
    assert int(w.sum()) == 5
    assert missing_rate(w) == pytest.approx(0.95)


@settings(max_examples=50, deadline=None)
@given(
    dims=st.lists(st.integers(1, 6), min_size=1, max_size=4),
    rate=st.floats(0, 1),
    seed=st.integers(0, 1000),
)
def test_random_mask_count_formula(dims, rate, seed):
    w = gen_mask_random(dims, rate, seed)
    assert set(np.unique(w)) <= {0.0, 1.0}
    assert int(w.sum()) == round((1 - rate) * int(np.prod(dims)))
    assert np.array_equal(w, gen_mask_random(dims, rate, seed))


def test_random_mask_rate_check():
    with pytest.raises(ValueError):
        gen_mask_random((2, 2), 1.5)


def test_block_mask():
    assert not gen_mask_block((3, 4), (1, 1), (3, 4)).any()
    w = gen_mask_block((4, 4, 2), (2, 2, 1), (2, 2, 2))
    assert int((w == 0).sum()) == 8
    assert w[0, 0, 0] == 1 and w[1, 1, 0] == 0 and w[2, 2, 1] == 0 and w[3, 3, 1] == 1
    with pytest.raises(ValueError):
        gen_mask_block((4, 4), (3, 3), (3, 1))


def test_line_mask():
    assert gen_mask_lines((4, 4), 1, []).all()
    w = gen_mask_lines((4, 4), 1, [2, 4])
    assert int((w == 0).sum()) == 8
    assert not w[1].any() and not w[3].any() and w[0].all()
    with pytest.raises(ValueError):
        gen_mask_lines((4, 4), 3, [1])
    with pytest.raises(ValueError):
        gen_mask_lines((4, 4), 2, [5])


# metrics -------------------------------------------------------------------


def test_rse_examples(rng):
    t = rng.standard_normal((3, 4))
    assert rse(t, t) == 0
    assert rse(t, np.zeros_like(t)) == pytest.approx(1.0, rel=1e-15)
    assert rse(t, 2 * t) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        rse(np.zeros(3), np.ones(3))
    with pytest.raises(ValueError):
        rse(t, t[:2])


def test_rse_linear_in_perturbation(rng):
    t = rng.standard_normal((5, 5))
    d = rng.standard_normal((5, 5))
    a, b = rse(t, t + 1e-3 * d), rse(t, t + 3e-3 * d)
    assert b / a == pytest.approx(3.0, abs=1e-9)


def test_psnr_examples():
    t = np.full((4, 4, 3), 0.0)
    assert mse(t, t + 255) == 255**2
    assert psnr(t, t + 255) == 0.0
    assert mse(t, t + 1) == 1.0
    assert psnr(t, t + 1) == pytest.approx(10 * np.log10(65025), abs=1e-12)
    assert psnr(t, t + 1) == pytest.approx(48.1308036, abs=1e-6)
    assert psnr(t, t) == float("inf")


def test_psnr_decreasing_in_mse(rng):
    t = rng.uniform(0, 255, (8, 8, 3))
    d = rng.standard_normal(t.shape)
    vals = [psnr(t, t + s * d) for s in (0.5, 1.0, 2.0)]
    assert vals[0] > vals[1] > vals[2]


# tensorization -------------------------------------------------------------


def test_tensorize_single_level():
    img = np.arange(2 * 3 * 3.0).reshape(2, 3, 3)
    plan = TensorizationPlan((2,), (3,), 3)
    x = tensorize_visual(img, plan)
    assert x.shape == (6, 3)
    np.testing.assert_array_equal(x, img.reshape(6, 3, order="F"))


def test_tensorize_hand_example():
    img = np.zeros((4, 4, 1))
    img[2, 1, 0] = 1.0  # row 3, column 2 (1-based)
    x = tensorize_visual(img, TensorizationPlan((2, 2), (2, 2), 1))
    assert x.shape == (4, 4, 1)
    assert x[2, 1, 0] == 1.0 and x.sum() == 1.0


def brute_tensorize(img, plan):
    out = np.zeros(plan.tensor_shape)
    U, V, C = img.shape
    for i in range(U):
        for j in range(V):
            a, b, ri, rj = [], [], i, j
            for uk, vk in zip(plan.u, plan.v):
                a.append(ri % uk)
                ri //= uk
                b.append(rj % vk)
                rj //= vk
            idx = tuple(ak + uk * bk for ak, bk, uk in zip(a, b, plan.u))
            out[idx + (slice(None),)] = img[i, j, :]
    return out


@pytest.mark.parametrize("u,v", [((2, 3), (3, 2)), ((2, 2, 2), (1, 2, 4)), ((6,), (5,))])
def test_tensorize_matches_index_formula(rng, u, v):
    plan = TensorizationPlan(u, v, 2)
    img = rng.standard_normal(plan.image_shape)
    np.testing.assert_array_equal(tensorize_visual(img, plan), brute_tensorize(img, plan))


@settings(max_examples=40, deadline=None)
@given(
    pairs=st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3)), min_size=1, max_size=4),
    channels=st.integers(1, 3),
    seed=st.integers(0, 1000),
)
def test_tensorize_roundtrip(pairs, channels, seed):
    plan = TensorizationPlan([p[0] for p in pairs], [p[1] for p in pairs], channels)
    img = np.random.default_rng(seed).standard_normal(plan.image_shape)
    x = tensorize_visual(img, plan)
    assert x.shape == plan.tensor_shape
    assert np.array_equal(detensorize_visual(x, plan), img)


def test_tensorize_errors():
    with pytest.raises(ValueError):
        tensorize_visual(np.zeros((4, 4, 3)), TensorizationPlan((2, 3), (2, 2)))
    with pytest.raises(ValueError):
        TensorizationPlan((2,), (2, 2))
    with pytest.raises(ValueError):
        parse_plan("2,2")
    assert parse_plan("4,4,4,4/4,4,4,4").tensor_shape == (16, 16, 16, 16, 3)


# file formats --------------------------------------------------------------


def test_tensor_roundtrip(tmp_path, rng):
    x = rng.standard_normal((3, 4, 5))
    io.write_tensor(tmp_path / "x.trt", x)
    y = io.read_tensor(tmp_path / "x.trt")
    assert y.shape == x.shape and np.array_equal(x, y)


def test_tensor_wire_format(tmp_path):
    x = np.arange(6.0).reshape(2, 3, order="F")
    io.write_tensor(tmp_path / "x.trt", x)
    buf = (tmp_path / "x.trt").read_bytes()
    assert buf[:4] == b"TRT1"
    assert struct.unpack("<3Q", buf[4:28]) == (2, 2, 3)
    assert struct.unpack("<6d", buf[28:]) == (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)


def test_tensor_format_errors(tmp_path):
    good = io.dump_tensor(np.ones((2, 2)))
    cases = {
        "magic": b"XXXX" + good[4:],
        "header": good[:10],
        "payload": good[:-3],
        "trailing": good + b"\0",
        "zero-dim": b"TRT1" + struct.pack("<3Q", 2, 0, 2),
        "nan": b"TRT1" + struct.pack("<2Q", 1, 1) + struct.pack("<d", float("nan")),
    }
    for name, buf in cases.items():
        p = tmp_path / f"{name}.trt"
        p.write_bytes(buf)
        with pytest.raises(io.FormatError):
            io.read_tensor(p)


def test_mask_files(tmp_path):
    w = gen_mask_random((3, 3), 0.5, seed=0)
    io.write_mask(tmp_path / "w.trt", w)
    assert np.array_equal(io.read_mask(tmp_path / "w.trt"), w)
    bad = w.copy()
    bad[1, 2] = 2.0
    io.write_tensor(tmp_path / "bad.trt", bad)
    with pytest.raises(io.FormatError, match=r"\(2, 3\).*2\.0"):
        io.read_mask(tmp_path / "bad.trt")
    with pytest.raises(ValueError):
        io.write_mask(tmp_path / "bad2.trt", bad)


def test_core_files(tmp_path):
    cores = init_random((3, 4, 5), (2, 3, 1), seed=0)
    io.write_cores(tmp_path / "c.trt", cores)
    back = io.read_cores(tmp_path / "c.trt")
    assert back.ranks == cores.ranks
    assert all(np.array_equal(a, b) for a, b in zip(cores.cores, back.cores))


def test_ppm_fixture(tmp_path):
    raster = bytes([255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30])
    (tmp_path / "f.ppm").write_bytes(b"P6\n# tiny\n2 2\n255\n" + raster)
    img = io.read_ppm(tmp_path / "f.ppm")
    assert img.shape == (2, 2, 3)
    np.testing.assert_array_equal(img[0, 0], [255, 0, 0])
    np.testing.assert_array_equal(img[0, 1], [0, 255, 0])
    np.testing.assert_array_equal(img[1, 0], [0, 0, 255])
    np.testing.assert_array_equal(img[1, 1], [10, 20, 30])
    io.write_ppm(tmp_path / "g.ppm", img)
    assert (tmp_path / "g.ppm").read_bytes() == b"P6\n2 2\n255\n" + raster


def test_ppm_clips_and_rounds(tmp_path):
    img = np.array([[[-5.0, 12.4, 12.6], [300.0, 254.5, 0.49]]])
    io.write_ppm(tmp_path / "c.ppm", img)
    np.testing.assert_array_equal(io.read_ppm(tmp_path / "c.ppm"), [[[0, 12, 13], [255, 254, 0]]])


def test_ppm_errors(tmp_path):
    cases = {
        "p3": b"P3\n1 1\n255\n1 2 3",
        "maxval": b"P6\n1 1\n65535\n" + bytes(6),
        "short": b"P6\n2 2\n255\n" + bytes(5),
        "header": b"P6\n2",
    }
    for name, buf in cases.items():
        p = tmp_path / f"{name}.ppm"
        p.write_bytes(buf)
        with pytest.raises(io.FormatError):
            io.read_ppm(p)
