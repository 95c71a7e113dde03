"""LUT lattice algebra, reshape bijections, and the trilinear kernel."""

import numpy as np
import pytest

from gradeforge.errors import InvalidArgumentError, UnsupportedSizeError
from gradeforge.frames import Frame, VideoClip
from gradeforge.lut import (
    DeltaLut,
    Lut3D,
    apply_lut,
    apply_lut_clip,
    apply_to_pixels,
    compose_luts,
    delta_from,
    identity_lut,
    identity_table,
    lut_from_delta,
    mix_luts,
    reshape_delta,
    unreshape,
)

from conftest import (
    invert_lut,
    oracle_trilerp,
    random_clip,
    random_frame,
    random_lut_from_offsets,
    random_lut_from_table,
)


class TestIdentity:
    def test_size2_corners(self):
        lut = identity_lut(2)
        assert np.array_equal(lut.table[0, 0, 0], [0.0, 0.0, 0.0])
        assert np.array_equal(lut.table[1, 1, 1], [1.0, 1.0, 1.0])

    def test_size16_center(self):
        lut = identity_lut(16)
        assert np.allclose(lut.table[8, 8, 8], [8 / 15] * 3, rtol=0, atol=0)

    def test_rejects_degenerate_size(self):
        with pytest.raises(InvalidArgumentError):
            identity_lut(1)
        with pytest.raises(InvalidArgumentError):
            identity_lut(0)

    @pytest.mark.parametrize("size", [2, 16, 33])
    def test_identity_is_bitwise_noop_float(self, size):
        frame = random_frame((77, size))
        out = apply_lut(identity_lut(size), frame)
        assert np.array_equal(out.pixels, frame.pixels)

    @pytest.mark.parametrize("size", [2, 16, 33])
    def test_identity_is_bytewise_noop_8bit(self, size):
        rng = np.random.default_rng(size)
        raw = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
        frame = Frame.from_uint8(raw)
        out = apply_lut(identity_lut(size), frame)
        assert np.array_equal(out.to_uint8(), raw)


class TestApply:
    def test_identity_pixel(self, identity16):
        out = apply_to_pixels(identity16, np.array([[0.25, 0.5, 0.75]]), np.float64)
        assert np.allclose(out[0], [0.25, 0.5, 0.75], atol=1e-12)

    def test_invert_pixel(self):
        out = apply_to_pixels(invert_lut(), np.array([[0.2, 0.4, 0.6]]), np.float64)
        assert np.allclose(out[0], [0.8, 0.6, 0.4], atol=1e-9)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(42)
        lut = random_lut_from_table(1)
        pixels = rng.random((1000, 3))
        got = apply_to_pixels(lut, pixels, np.float64)
        for i in range(0, 1000, 7):
            expected = oracle_trilerp(lut, pixels[i])
            assert np.abs(got[i] - expected).max() < 1e-6

    @pytest.mark.parametrize("size", [2, 33])
    def test_exact_at_lattice_points(self, size):
        # sizes whose lattice coordinates are exactly representable in float32
        lut = random_lut_from_table((3, size), size=size)
        coords = (np.arange(size) / (size - 1)).astype(np.float32)
        rng = np.random.default_rng(size)
        picks = rng.integers(0, size, (50, 3))
        pixels = coords[picks]
        out = apply_to_pixels(lut, pixels, np.float32)
        expected = np.clip(
            lut.table[picks[:, 2], picks[:, 1], picks[:, 0]], 0.0, 1.0
        ).astype(np.float32)
        assert np.array_equal(out, expected)

    def test_out_of_domain_inputs_are_clamped(self, identity16):
        out = apply_to_pixels(
            identity16, np.array([[-0.5, 1.5, 0.5]]), np.float64
        )
        assert np.allclose(out[0], [0.0, 1.0, 0.5], atol=1e-12)

    def test_custom_domain(self):
        lut = identity_lut(16, domain_min=(0.25, 0.25, 0.25), domain_max=(0.75, 0.75, 0.75))
        out = apply_to_pixels(lut, np.array([[0.0, 0.5, 1.0]]), np.float64)
        # inputs clamp to the domain; identity entries span the domain values
        assert np.allclose(out[0], [0.25, 0.5, 0.75], atol=1e-12)

    def test_output_clamped_to_unit_range(self):
        table = identity_table(16) * 2.0 - 0.5  # entries outside [0, 1]
        lut = Lut3D.from_table(table)
        rng = np.random.default_rng(0)
        out = apply_to_pixels(lut, rng.random((500, 3)), np.float64)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_monotone_lut_gives_monotone_gray_ramp(self):
        rng = np.random.default_rng(5)
        n = 16
        curves = np.sort(rng.random((3, n)), axis=1)
        table = np.empty((n, n, n, 3))
        table[..., 0] = curves[0][None, None, :]
        table[..., 1] = curves[1][None, :, None]
        table[..., 2] = curves[2][:, None, None]
        lut = Lut3D.from_table(table)
        ramp = np.linspace(0.0, 1.0, 257)
        out = apply_to_pixels(lut, np.stack([ramp] * 3, axis=1), np.float64)
        assert (np.diff(out, axis=0) >= -1e-12).all()

    def test_numpy_and_numba_paths_agree_bitwise(self):
        import gradeforge.lut as lutmod

        if not lutmod._HAVE_NUMBA:
            pytest.skip("numba unavailable")
        lut = random_lut_from_table(9)
        pixels = np.random.default_rng(9).random((2048, 3))
        table_flat = np.ascontiguousarray(lut.table.reshape(-1, 3))
        scale = (lut.size - 1) / (lut.domain_max - lut.domain_min)
        jit_out = np.empty_like(pixels)
        lutmod._trilerp_jit(
            table_flat, lut.size, lut.domain_min, lut.domain_max, scale, pixels, jit_out
        )
        np_out = lutmod._trilerp_numpy(
            table_flat, lut.size, lut.domain_min, lut.domain_max, scale, pixels
        )
        assert np.array_equal(jit_out, np_out)


class TestClip:
    def test_identity_clip_unchanged(self, identity16):
        clip = random_clip(3)
        out = apply_lut_clip(identity16, clip)
        assert len(out) == len(clip)
        for a, b in zip(out.frames, clip.frames):
            assert np.array_equal(a.pixels, b.pixels)

    def test_identical_frames_identical_outputs(self):
        frames = [random_frame((1, i)) for i in range(10)]
        frames[9] = Frame(frames[5].pixels.copy())
        clip = VideoClip(frames, fps=10)
        out = apply_lut_clip(random_lut_from_table(2), clip)
        assert np.array_equal(out.frames[5].pixels, out.frames[9].pixels)

    def test_matches_per_frame_application_and_partition_invariance(self):
        lut = random_lut_from_table(4)
        clip = random_clip(9)
        serial = [apply_lut(lut, f) for f in clip.frames]
        for workers in (None, 1, 2, 8):
            out = apply_lut_clip(lut, clip, workers=workers)
            assert out.fps == clip.fps
            for a, b in zip(out.frames, serial):
                assert np.array_equal(a.pixels, b.pixels)

    def test_empty_clip_rejected(self):
        with pytest.raises(InvalidArgumentError):
            VideoClip([], fps=24)


class TestDeltaAndReshape:
    def test_identity_delta_is_zero(self, identity16):
        assert not delta_from(identity16).offsets.any()

    def test_zero_delta_is_identity(self, identity16):
        lut = lut_from_delta(DeltaLut(np.zeros((16, 16, 16, 3))))
        assert lut.equals(identity16)

    @pytest.mark.parametrize("builder", [random_lut_from_table, random_lut_from_offsets])
    def test_roundtrip_bit_exact_100_luts(self, builder):
        for seed in range(100):
            lut = builder(seed)
            again = lut_from_delta(delta_from(lut))
            assert again.equals(lut)
            assert np.array_equal(again.table, lut.table)

    def test_delta_roundtrip_bit_exact(self):
        rng = np.random.default_rng(8)
        delta = DeltaLut(rng.normal(0, 0.3, (16, 16, 16, 3)))
        again = delta_from(lut_from_delta(delta))
        assert again.equals(delta)

    def test_reshape_zero(self):
        img = reshape_delta(DeltaLut(np.zeros((16, 16, 16, 3))))
        assert img.shape == (64, 64, 3)
        assert not img.any()

    def test_reshape_corner_mapping(self):
        offsets = np.zeros((16, 16, 16, 3))
        offsets[0, 0, 0, 0] = 0.5  # flat index 0 (red-fastest)
        img = reshape_delta(DeltaLut(offsets))
        assert img[0, 0, 0] == 0.5
        img[0, 0, 0] = 0.0
        assert not img.any()

    def test_reshape_roundtrip_bit_exact(self):
        rng = np.random.default_rng(11)
        for seed in range(20):
            delta = DeltaLut(rng.normal(0, 1, (16, 16, 16, 3)))
            assert unreshape(reshape_delta(delta)).equals(delta)

    def test_reshape_rejects_other_sizes(self):
        with pytest.raises(UnsupportedSizeError):
            reshape_delta(DeltaLut(np.zeros((8, 8, 8, 3))))
        with pytest.raises(UnsupportedSizeError):
            unreshape(np.zeros((32, 32, 3)))


class TestMix:
    def test_single_lut_weight_one(self):
        lut = random_lut_from_table(21)
        out = mix_luts([lut], [1.0])
        assert np.allclose(out.table, lut.table, rtol=0, atol=1e-15)

    def test_identity_plus_invert_halves(self, identity16):
        out = mix_luts([identity16, invert_lut()], [0.5, 0.5])
        assert np.allclose(out.table, 0.5, rtol=0, atol=1e-15)

    def test_extrapolated_identity_pair(self, identity16):
        out = mix_luts([identity16, identity16], [1.5, -0.5])
        assert np.allclose(out.table, identity16.table, rtol=0, atol=1e-12)

    def test_linearity(self):
        a, b = random_lut_from_table(31), random_lut_from_table(32)
        w = 0.3
        out = mix_luts([a, b], [w, 1 - w])
        expected = w * a.table + (1 - w) * b.table
        assert np.allclose(out.table, expected, rtol=0, atol=1e-14)

    def test_extrapolation_clamped(self):
        bright = Lut3D.from_table(np.full((16, 16, 16, 3), 1.0))
        dark = Lut3D.from_table(np.zeros((16, 16, 16, 3)))
        out = mix_luts([bright, dark], [3.0, -2.0])
        assert out.table.max() <= 1.25 and out.table.min() >= -0.25

    def test_errors(self, identity16):
        with pytest.raises(InvalidArgumentError):
            mix_luts([], [])
        with pytest.raises(InvalidArgumentError):
            mix_luts([identity16], [0.5])
        with pytest.raises(InvalidArgumentError):
            mix_luts([identity16, identity_lut(8)], [0.5, 0.5])
        with pytest.raises(InvalidArgumentError):
            mix_luts([identity16, identity16], [0.7, 0.7])


class TestCompose:
    def test_identity_left(self, identity16):
        lut = random_lut_from_table(41)
        out = compose_luts(identity16, lut)
        assert np.abs(out.table - np.clip(lut.table, 0, 1)).max() < 1e-6

    def test_identity_right(self, identity16):
        lut = random_lut_from_table(42)
        out = compose_luts(lut, identity16)
        assert np.abs(out.table - np.clip(lut.table, 0, 1)).max() < 1e-6

    def test_double_invert_is_identity_on_pixels(self):
        inv = invert_lut()
        composed = compose_luts(inv, inv)
        rng = np.random.default_rng(0)
        pixels = rng.random((100, 3))
        out = apply_to_pixels(composed, pixels, np.float64)
        direct = apply_to_pixels(inv, apply_to_pixels(inv, pixels, np.float64), np.float64)
        assert np.abs(out - pixels).max() < 1e-6
        assert np.abs(out - direct).max() < 1e-6

    def test_size_mismatch(self, identity16):
        with pytest.raises(InvalidArgumentError):
            compose_luts(identity16, identity_lut(8))


class TestValidation:
    def test_rejects_nan_offsets(self):
        bad = np.zeros((16, 16, 16, 3))
        bad[0, 0, 0, 0] = np.nan
        with pytest.raises(InvalidArgumentError):
            Lut3D(bad)

    def test_rejects_non_cubic(self):
        with pytest.raises(InvalidArgumentError):
            Lut3D(np.zeros((4, 4, 5, 3)))

    def test_rejects_bad_domain(self):
        with pytest.raises(InvalidArgumentError):
            Lut3D(np.zeros((4, 4, 4, 3)), domain_min=(0, 0, 0), domain_max=(1, 0, 1))
