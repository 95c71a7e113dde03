"""Frame/clip I/O and key-frame selection against the exhaustive oracle."""

import numpy as np
import pytest
from PIL import Image

from gradeforge.errors import ClipIOError, DegenerateEmbeddingError, InvalidArgumentError
from gradeforge.frames import (
    Frame,
    VideoClip,
    load_clip,
    sample_indices,
    save_clip,
    select_key_frames,
)

from conftest import random_clip, random_frame


class TestFrameValidation:
    def test_rejects_nan(self):
        px = np.zeros((4, 4, 3), np.float32)
        px[0, 0, 0] = np.nan
        with pytest.raises(InvalidArgumentError):
            Frame(px)

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            Frame(np.full((4, 4, 3), 1.5, np.float32))

    def test_rejects_empty_and_bad_shape(self):
        with pytest.raises(InvalidArgumentError):
            Frame(np.zeros((0, 4, 3), np.float32))
        with pytest.raises(InvalidArgumentError):
            Frame(np.zeros((4, 4), np.float32))

    def test_uint8_roundtrip(self):
        raw = np.random.default_rng(0).integers(0, 256, (6, 7, 3), dtype=np.uint8)
        assert np.array_equal(Frame.from_uint8(raw).to_uint8(), raw)


class TestClipIO:
    def test_save_load_order_and_quantization(self, tmp_path):
        clip = random_clip(1, n=10, fps=25.0)
        save_clip(clip, tmp_path / "c")
        loaded = load_clip(tmp_path / "c")
        assert len(loaded) == 10
        assert loaded.fps == 25.0
        for a, b in zip(loaded.frames, clip.frames):
            assert np.abs(a.pixels - b.pixels).max() <= 1.0 / 255.0

    def test_fps_argument_overrides_sidecar(self, tmp_path):
        save_clip(random_clip(2, n=2, fps=30.0), tmp_path / "c")
        assert load_clip(tmp_path / "c", fps=12.0).fps == 12.0

    def test_shuffled_creation_order_sorted_by_name(self, tmp_path):
        d = tmp_path / "c"
        d.mkdir()
        rng = np.random.default_rng(3)
        frames = {i: random_frame((3, i), h=8, w=8) for i in range(8)}
        for i in rng.permutation(8):
            Image.fromarray(frames[int(i)].to_uint8(), mode="RGB").save(
                d / f"{int(i) + 1:06d}.png"
            )
        loaded = load_clip(d)
        for i in range(8):
            assert np.array_equal(loaded.frames[i].to_uint8(), frames[i].to_uint8())

    def test_empty_dir_error(self, tmp_path):
        (tmp_path / "c").mkdir()
        with pytest.raises(ClipIOError):
            load_clip(tmp_path / "c")

    def test_missing_dir_error(self, tmp_path):
        with pytest.raises(ClipIOError):
            load_clip(tmp_path / "nope")

    def test_mixed_dimensions_error_names_file(self, tmp_path):
        d = tmp_path / "c"
        d.mkdir()
        Image.fromarray(np.zeros((8, 8, 3), np.uint8), "RGB").save(d / "000001.png")
        Image.fromarray(np.zeros((9, 8, 3), np.uint8), "RGB").save(d / "000002.png")
        with pytest.raises(ClipIOError) as err:
            load_clip(d)
        assert "000002.png" in str(err.value)

    def test_corrupt_file_error_names_file(self, tmp_path):
        d = tmp_path / "c"
        d.mkdir()
        (d / "000001.png").write_bytes(b"not a png")
        with pytest.raises(ClipIOError) as err:
            load_clip(d)
        assert "000001.png" in str(err.value)

    def test_non_numeric_name_error(self, tmp_path):
        d = tmp_path / "c"
        d.mkdir()
        Image.fromarray(np.zeros((8, 8, 3), np.uint8), "RGB").save(d / "frame_a.png")
        with pytest.raises(ClipIOError):
            load_clip(d)


class TestSampling:
    def test_one_per_second_at_30fps(self):
        assert sample_indices(95, fps=30.0, sample_hz=1.0) == [0, 30, 60, 90]

    def test_single_frame(self):
        assert sample_indices(1, fps=30.0, sample_hz=1.0) == [0]

    def test_always_includes_zero(self):
        assert sample_indices(5, fps=2.0, sample_hz=1.0)[0] == 0

    def test_dense_sampling_deduplicates(self):
        idxs = sample_indices(4, fps=0.5, sample_hz=1.0)
        assert idxs == sorted(set(idxs))


class TestKeyFrameSelection:
    def test_identical_clips_pick_diagonal(self):
        clip = random_clip(5, n=4, fps=1.0)
        other = VideoClip([Frame(f.pixels.copy()) for f in clip.frames], fps=1.0)
        pair = select_key_frames(clip, other, sample_hz=1.0)
        assert pair.input_index == pair.reference_index == 0  # tie-break smallest
        assert pair.similarity == pytest.approx(1.0, abs=1e-12)

    def test_single_frame_clips(self):
        a = VideoClip([random_frame(1)], fps=24.0)
        b = VideoClip([random_frame(2)], fps=24.0)
        pair = select_key_frames(a, b)
        assert (pair.input_index, pair.reference_index) == (0, 0)

    def test_matches_exhaustive_oracle_50_instances(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            m, n, d = 10, 12, 6
            a = VideoClip([random_frame((seed, 0, i), h=4, w=4) for i in range(m)], fps=1.0)
            b = VideoClip([random_frame((seed, 1, j), h=4, w=4) for j in range(n)], fps=1.0)
            va = rng.normal(size=(m, d))
            vb = rng.normal(size=(n, d))
            if seed % 5 == 0:
                vb[n // 2] = va[m // 3]  # force an exact-tie candidate
            table = {**{id(f): va[i] for i, f in enumerate(a.frames)},
                     **{id(f): vb[j] for j, f in enumerate(b.frames)}}
            embed = lambda f: table[id(f)]  # noqa: E731

            pair = select_key_frames(a, b, embed=embed, sample_hz=1.0)

            best = (-2.0, None, None)
            for i in range(m):
                for j in range(n):
                    cos = float(
                        va[i] @ vb[j] / (np.linalg.norm(va[i]) * np.linalg.norm(vb[j]))
                    )
                    if cos > best[0]:
                        best = (cos, i, j)
            assert (pair.input_index, pair.reference_index) == (best[1], best[2])
            assert pair.similarity == pytest.approx(best[0], abs=1e-12)

    def test_invariant_to_positive_rescaling(self):
        rng = np.random.default_rng(99)
        a = random_clip(10, n=5, fps=1.0)
        b = random_clip(11, n=7, fps=1.0)
        va = rng.normal(size=(5, 8))
        vb = rng.normal(size=(7, 8))
        table = {**{id(f): va[i] for i, f in enumerate(a.frames)},
                 **{id(f): vb[j] for j, f in enumerate(b.frames)}}
        base = select_key_frames(a, b, embed=lambda f: table[id(f)], sample_hz=1.0)
        scales = rng.uniform(0.1, 50.0, size=len(table))
        scaled_table = {k: v * s for (k, v), s in zip(table.items(), scales)}
        scaled = select_key_frames(a, b, embed=lambda f: scaled_table[id(f)], sample_hz=1.0)
        assert (base.input_index, base.reference_index) == (
            scaled.input_index,
            scaled.reference_index,
        )

    def test_similarity_is_grid_maximum(self):
        rng = np.random.default_rng(7)
        a = random_clip(20, n=6, fps=1.0)
        b = random_clip(21, n=6, fps=1.0)
        table = {id(f): rng.normal(size=5) for f in a.frames + b.frames}
        pair = select_key_frames(a, b, embed=lambda f: table[id(f)], sample_hz=1.0)
        for fa in a.frames:
            for fb in b.frames:
                va, vb = table[id(fa)], table[id(fb)]
                cos = va @ vb / (np.linalg.norm(va) * np.linalg.norm(vb))
                assert cos <= pair.similarity + 1e-12

    def test_zero_norm_embedding_identifies_frame(self):
        a = random_clip(30, n=3, fps=1.0)
        b = random_clip(31, n=3, fps=1.0)

        def embed(f):
            if f is a.frames[1]:
                return np.zeros(4)
            return np.ones(4)

        with pytest.raises(DegenerateEmbeddingError) as err:
            select_key_frames(a, b, embed=embed, sample_hz=1.0)
        assert "frame 1" in str(err.value)

    def test_default_embedding_works(self):
        a = random_clip(40, n=2, h=32, w=32, fps=1.0)
        pair = select_key_frames(a, a, sample_hz=1.0)
        assert pair.similarity == pytest.approx(1.0, abs=1e-9)
