import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaborset.classify import ClassificationDecision, classify_image, classify_raw, decide
from gaborset.errors import NoCandidateFeatures, SkippedImage
from gaborset.gabor import make_bank
from gaborset.network import init_model
from gaborset.preprocess import RawImage
from oracles import algorithm1_loop

GRID = (-1.0, -0.5, 0.0, 0.79, 0.8, 0.9, 1.0)


class TestDecide:
    def test_all_above(self):
        d = decide([0.9, 0.85])
        assert d.verdict == "Matched"
        assert list(d.detection_factors) == [1, 1]
        assert d.overall_matching == 1

    def test_one_below(self):
        d = decide([0.9, 0.79])
        assert d.verdict == "Unmatched"
        assert list(d.detection_factors) == [1, 0]
        assert d.overall_matching == 0

    def test_boundary_inclusive(self):
        d = decide([0.8, 0.8, 0.8])
        assert d.verdict == "Matched"

    def test_single_output(self):
        assert decide([0.81]).verdict == "Matched"
        assert decide([0.5]).verdict == "Unmatched"

    def test_empty_outputs(self):
        with pytest.raises(NoCandidateFeatures):
            decide([])

    def test_nonfinite_outputs(self):
        with pytest.raises(ValueError):
            decide([np.nan])
        with pytest.raises(ValueError):
            decide([0.9, np.inf])

    def test_confident_absence_flag(self):
        d = decide([-0.7, 0.9])
        assert list(d.confident_absence) == [True, False]
        assert d.verdict == "Unmatched"

    def test_absence_never_affects_verdict(self):
        a = decide([0.85, 0.85])
        b = decide([0.85, -0.99])
        assert a.verdict == "Matched"
        assert b.verdict == "Unmatched"  # driven by the threshold, not -0.5

    def test_truth_table_matches_algorithm1(self):
        for n in (1, 2, 3):
            for outs in itertools.product(GRID, repeat=n):
                assert decide(list(outs)).verdict == algorithm1_loop(outs)

    @given(
        st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=4),
        st.integers(0, 3),
        st.floats(0.0, 0.5, allow_nan=False),
    )
    @settings(max_examples=100)
    def test_monotone_in_outputs(self, outs, idx, bump):
        d0 = decide(outs)
        raised = list(outs)
        raised[idx % len(outs)] = min(1.0, raised[idx % len(outs)] + bump)
        d1 = decide(raised)
        if d0.verdict == "Matched":
            assert d1.verdict == "Matched"

    @given(
        st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=4),
        st.floats(-0.9, 0.9, allow_nan=False),
    )
    @settings(max_examples=100)
    def test_threshold_strict_parameter(self, outs, thr):
        d = decide(outs, thr)
        if any(o < thr for o in outs):
            assert d.verdict == "Unmatched"
        else:
            assert d.verdict == "Matched"

    def test_custom_threshold(self):
        assert decide([0.5], threshold=0.4).verdict == "Matched"
        assert decide([0.5], threshold=0.6).verdict == "Unmatched"


class TestClassifyImage:
    def setup_method(self):
        self.bank = make_bank(frequencies=(0.125, 0.25), orientations=(0.0, np.pi / 2), size=9)
        self.model = init_model(8, 3, 2, seed=4)

    def write_png(self, tmp_path, seed=0):
        rng = np.random.default_rng(seed)
        from gaborset import imgio

        p = tmp_path / f"img_{seed}.png"
        imgio.save_gray(p, rng.uniform(0, 255, (32, 32)))
        return p

    def test_returns_decision(self, tmp_path):
        p = self.write_png(tmp_path)
        d = classify_image(p, self.model, self.bank, 16)
        assert isinstance(d, ClassificationDecision)
        assert d.outputs.shape == (2,)

    def test_identical_file_identical_decision(self, tmp_path):
        p = self.write_png(tmp_path, seed=1)
        d1 = classify_image(p, self.model, self.bank, 16)
        d2 = classify_image(p, self.model, self.bank, 16)
        assert np.array_equal(d1.outputs, d2.outputs)
        assert d1.verdict == d2.verdict

    def test_corrupt_file_skipped(self, tmp_path):
        p = tmp_path / "broken.png"
        p.write_bytes(b"this is not a png")
        with pytest.raises(SkippedImage):
            classify_image(p, self.model, self.bank, 16)

    def test_grid3_takes_per_neuron_max(self, tmp_path):
        rng = np.random.default_rng(6)
        raw = RawImage(rng.integers(0, 256, (64, 64), dtype=np.uint8).astype(np.uint8))
        d_off = classify_raw(raw, self.model, self.bank, 16, scan="off")
        d_grid = classify_raw(raw, self.model, self.bank, 16, scan="grid3")
        # the grid picks the max over views, one of which is the whole image
        assert np.all(d_grid.outputs >= d_off.outputs - 1e-12)

    def test_unknown_scan_mode(self):
        raw = RawImage(np.zeros((32, 32), np.uint8))
        with pytest.raises(ValueError):
            classify_raw(raw, self.model, self.bank, 16, scan="grid9")
