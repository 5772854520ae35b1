"""Orthonormal Haar transform: exactness, inversion, energy preservation."""

import numpy as np
import pytest

from rawnoise.errors import ShapeError
from rawnoise.wavelets import haar_dwt2, haar_idwt2


class TestForward:
    def test_constant_patch(self):
        """A constant c maps to LL = 2c with vanishing detail bands."""
        out = haar_dwt2(np.full((4, 8, 8), 3.5))
        assert np.all(out[0::4] == 7.0)
        assert np.all(out[1::4] == 0.0)
        assert np.all(out[2::4] == 0.0)
        assert np.all(out[3::4] == 0.0)

    def test_single_block_values(self):
        """Block [[1,2],[3,4]] -> (LL, LH, HL, HH) = (5, -1, -2, 0)."""
        patch = np.tile(np.array([[1.0, 2.0], [3.0, 4.0]]), (4, 1, 1))
        out = haar_dwt2(patch)
        for c in range(4):
            assert out[4 * c + 0, 0, 0] == 5.0
            assert out[4 * c + 1, 0, 0] == -1.0
            assert out[4 * c + 2, 0, 0] == -2.0
            assert out[4 * c + 3, 0, 0] == 0.0

    def test_odd_dims_rejected(self):
        with pytest.raises(ShapeError):
            haar_dwt2(np.zeros((4, 7, 8)))
        with pytest.raises(ShapeError):
            haar_dwt2(np.zeros((4, 8, 9)))

    def test_output_layout(self):
        out = haar_dwt2(np.zeros((4, 16, 10)))
        assert out.shape == (16, 8, 5)


class TestInverse:
    def test_round_trip(self):
        rng = np.random.default_rng(42)
        patch = rng.uniform(-100, 100, size=(4, 64, 64))
        assert np.abs(haar_idwt2(haar_dwt2(patch)) - patch).max() <= 1e-6

    def test_zero_subbands(self):
        assert np.all(haar_idwt2(np.zeros((16, 4, 4))) == 0.0)

    def test_energy_preservation(self):
        """Orthonormality: ||dwt(x)||^2 = ||x||^2 to 1e-6 relative."""
        rng = np.random.default_rng(43)
        patch = rng.normal(0, 10, size=(4, 32, 32))
        energy_in = float(np.sum(patch**2))
        energy_out = float(np.sum(haar_dwt2(patch) ** 2))
        assert abs(energy_out - energy_in) <= 1e-6 * energy_in

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            haar_idwt2(np.zeros((12, 4, 4)))


class TestProperties:
    def test_reconstruction_many_patches(self):
        rng = np.random.default_rng(44)
        for _ in range(100):
            patch = rng.uniform(0, 1023, size=(4, 16, 16))
            assert np.abs(haar_idwt2(haar_dwt2(patch)) - patch).max() <= 1e-6

    def test_linearity(self):
        """dwt(a*x + y) = a*dwt(x) + dwt(y) to 1e-9."""
        rng = np.random.default_rng(45)
        x = rng.normal(size=(4, 16, 16))
        y = rng.normal(size=(4, 16, 16))
        lhs = haar_dwt2(2.75 * x + y)
        rhs = 2.75 * haar_dwt2(x) + haar_dwt2(y)
        assert np.abs(lhs - rhs).max() <= 1e-9
