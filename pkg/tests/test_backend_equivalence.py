"""The numba and numpy twins must agree bit for bit, and the env flag must
select the fallback path."""

import os
import subprocess
import sys

import numpy as np
import pytest

from gaborset import accel
from gaborset.preprocess import AheParams, RawImage, equalize_adaptive, preprocess_image

needs_numba = pytest.mark.skipif(
    not accel.USE_NUMBA, reason="numba backend not active in this process"
)


def _images(seed=0):
    rng = np.random.default_rng(seed)
    return [
        rng.uniform(0, 255, (16, 16)),
        rng.uniform(0, 255, (24, 17)),
        rng.integers(0, 256, (33, 40)).astype(np.float64),
    ]


@needs_numba
class TestResizeTwins:
    @pytest.mark.parametrize("out_shape", [(16, 16), (31, 12), (20, 20), (7, 50)])
    def test_bit_identical(self, out_shape):
        for img in _images():
            a = accel.resize_bilinear_numpy(np.ascontiguousarray(img), *out_shape)
            b = accel.resize_bilinear_numba(np.ascontiguousarray(img), *out_shape)
            assert a.shape == out_shape
            assert np.array_equal(a, b)


@needs_numba
class TestClaheTwins:
    @pytest.mark.parametrize("tiles", [(1, 1), (2, 2), (4, 3)])
    def test_equalize_bit_identical(self, tiles, monkeypatch):
        params = AheParams(tiles_x=tiles[0], tiles_y=tiles[1], clip_limit=0.02, bins=64)
        rng = np.random.default_rng(3)
        img = rng.integers(0, 256, (40, 56)).astype(np.float64)
        monkeypatch.setattr(accel, "USE_NUMBA", False)
        via_numpy = equalize_adaptive(img, params)
        monkeypatch.setattr(accel, "USE_NUMBA", True)
        via_numba = equalize_adaptive(img, params)
        assert np.array_equal(via_numpy, via_numba)

    def test_degenerate_tile_bit_identical(self, monkeypatch):
        # one constant quadrant exercises the identity-tile branch
        img = np.tile(np.arange(64, dtype=np.float64), (64, 1))
        img[:32, :32] = 93.0
        params = AheParams(tiles_x=2, tiles_y=2, clip_limit=0.05, bins=32)
        monkeypatch.setattr(accel, "USE_NUMBA", False)
        a = equalize_adaptive(img, params)
        monkeypatch.setattr(accel, "USE_NUMBA", True)
        b = equalize_adaptive(img, params)
        assert np.array_equal(a, b)


@needs_numba
def test_full_chain_bit_identical(monkeypatch):
    rng = np.random.default_rng(17)
    color = rng.integers(0, 256, (37, 29, 3), dtype=np.int64).astype(np.uint8)
    raw = RawImage(color)
    params = AheParams(tiles_x=3, tiles_y=2, clip_limit=0.01, bins=128)
    monkeypatch.setattr(accel, "USE_NUMBA", False)
    a = preprocess_image(raw, 24, params)
    monkeypatch.setattr(accel, "USE_NUMBA", True)
    b = preprocess_image(raw, 24, params)
    assert np.array_equal(a, b)


class TestEnvFlag:
    def _probe(self, env_value):
        env = dict(os.environ)
        env.pop("GABORSET_NUMBA", None)
        if env_value is not None:
            env["GABORSET_NUMBA"] = env_value
        out = subprocess.run(
            [
                sys.executable,
                "-c",
                "from gaborset import accel; "
                "print(accel.NUMBA_DISABLED, accel.backend_name())",
            ],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        return out.stdout.split()

    @pytest.mark.parametrize("value", ["0", "false", "off", "no", "False", " OFF "])
    def test_disable_values(self, value):
        disabled, backend = self._probe(value)
        assert disabled == "True"
        assert backend == "numpy"

    def test_unset_prefers_numba(self):
        disabled, backend = self._probe(None)
        assert disabled == "False"
        if accel.HAS_NUMBA:
            assert backend == "numba"

    def test_other_values_do_not_disable(self):
        disabled, _ = self._probe("1")
        assert disabled == "False"

    def test_backend_name_matches_flag(self):
        assert accel.backend_name() == ("numba" if accel.USE_NUMBA else "numpy")
