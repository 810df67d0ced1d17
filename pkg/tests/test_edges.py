"""
Unit tests for the Kirsch, Sobel and Prewitt edge operators.
"""
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from edgeroute.edges import (
    KIRSCH_BASE,
    KIRSCH_SCALE,
    OPERATORS,
    EdgeOperatorKind,
    enhance,
    get_operator,
    gradient_components,
    kirsch_enhance,
    kirsch_kernels,
    kirsch_response,
    prewitt_enhance,
    rotate45,
    sobel_enhance,
)
from edgeroute.imaging import EdgeImage, Image

small_images = arrays(
    np.uint8,
    st.tuples(st.integers(1, 10), st.integers(1, 10)),
    elements=st.integers(0, 255),
)


def brute_force_kirsch(pixels: np.ndarray) -> np.ndarray:
    """Max over the 8 explicit dot products on a replicate-padded window."""
    padded = np.pad(pixels.astype(np.int64), 1, mode="edge")
    out = np.zeros(pixels.shape, dtype=np.int64)
    kernels = kirsch_kernels()
    for r in range(pixels.shape[0]):
        for c in range(pixels.shape[1]):
            window = padded[r : r + 3, c : c + 3]
            out[r, c] = max(int((k * window).sum()) for k in kernels)
    return out


def horizontal_ramp(width=10, height=6) -> Image:
    return Image(np.tile(np.arange(width, dtype=np.uint8), (height, 1)))


class TestKirschKernels:
    """Test the compass kernel family."""

    def test_eight_kernels(self):
        """Test there are 8 distinct kernels."""
        kernels = kirsch_kernels()
        assert len(kernels) == 8
        assert len({k.tobytes() for k in kernels}) == 8

    def test_zero_sum(self):
        """Test every kernel's coefficients sum to 0."""
        assert all(int(k.sum()) == 0 for k in kirsch_kernels())

    def test_rotation_orbit(self):
        """Test the kernels are successive 45 degree rotations and the orbit closes."""
        kernels = kirsch_kernels()
        for a, b in zip(kernels, kernels[1:]):
            np.testing.assert_array_equal(rotate45(a), b)
        np.testing.assert_array_equal(rotate45(kernels[-1]), KIRSCH_BASE)

    def test_two_rotations_are_ninety_degrees(self):
        """Test two ring steps equal a clockwise quarter turn."""
        np.testing.assert_array_equal(rotate45(rotate45(KIRSCH_BASE)), np.rot90(KIRSCH_BASE, k=-1))

    def test_gradient_operators_have_two_kernels(self):
        """Test Sobel and Prewitt carry exactly two stencils."""
        assert len(OPERATORS[EdgeOperatorKind.SOBEL].kernels) == 2
        assert len(OPERATORS[EdgeOperatorKind.PREWITT].kernels) == 2


class TestKirschResponse:
    """Test Kirsch filtering."""

    def test_constant_image(self):
        """Test a constant image gives an all-zero edge image."""
        out = kirsch_enhance(Image(np.full((5, 5), 100, dtype=np.uint8)))
        assert isinstance(out, EdgeImage)
        assert not out.pixels.any()

    def test_oracle_random_images(self):
        """Test equivalence with brute-force dot products on 100 random 8x8 images."""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            pixels = rng.integers(0, 256, size=(8, 8), dtype=np.uint8)
            np.testing.assert_array_equal(kirsch_response(Image(pixels)), brute_force_kirsch(pixels))

    def test_three_by_three_step(self):
        """Test the centre of a 0 | 255 255 step against direct evaluation."""
        pixels = np.array([[0, 255, 255]] * 3, dtype=np.uint8)
        window = pixels.astype(np.int64)
        expected = max(int((k * window).sum()) for k in kirsch_kernels())
        assert kirsch_response(Image(pixels))[1, 1] == expected == 8 * 765 - 3 * 1275

    def test_rotation_equivariance(self):
        """Test rotating 20 random images by 90 degrees rotates their response maps exactly."""
        rng = np.random.default_rng(5)
        for _ in range(20):
            pixels = rng.integers(0, 256, size=(9, 7), dtype=np.uint8)
            response = kirsch_response(Image(pixels))
            rotated = kirsch_response(Image(np.ascontiguousarray(np.rot90(pixels))))
            np.testing.assert_array_equal(rotated, np.rot90(response))

    def test_scale_and_clamp(self):
        """Test the fixed 1/15 scale with clamping to [0, 255]."""
        pixels = np.array([[0, 255, 255]] * 3, dtype=np.uint8)
        raw = int(kirsch_response(Image(pixels))[1, 1])
        assert kirsch_enhance(Image(pixels)).pixels[1, 1] == min(255, int(np.floor(raw * KIRSCH_SCALE + 0.5)))
        assert kirsch_enhance(Image(pixels), scale=1.0).pixels[1, 1] == 255

    @settings(max_examples=50, deadline=None)
    @given(small_images)
    def test_same_shape(self, pixels):
        """Test every operator preserves the image shape."""
        for kind in EdgeOperatorKind:
            assert enhance(Image(pixels), kind).shape == pixels.shape

    @settings(max_examples=50, deadline=None)
    @given(small_images, st.integers(0, 55))
    def test_offset_invariance(self, pixels, offset):
        """Test adding a constant without clipping leaves responses unchanged."""
        base = (pixels // 2).astype(np.uint8)
        shifted = (base + offset).astype(np.uint8)
        for kind in EdgeOperatorKind:
            operator = get_operator(kind)
            np.testing.assert_allclose(operator.response(Image(shifted)), operator.response(Image(base)))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 255), st.integers(1, 8), st.integers(1, 8))
    def test_constant_zero_for_all_operators(self, value, h, w):
        """Test constant images give zero response for every operator."""
        image = Image(np.full((h, w), value, dtype=np.uint8))
        for kind in EdgeOperatorKind:
            assert not enhance(image, kind).pixels.any()

    @pytest.mark.slow
    def test_large_image_speed(self):
        """Test a 512x512 Kirsch pass finishes in under 50 ms."""
        image = Image(np.random.default_rng(0).integers(0, 256, size=(512, 512), dtype=np.uint8))
        kirsch_enhance(image)
        start = time.perf_counter()
        kirsch_enhance(image)
        assert time.perf_counter() - start < 0.05


class TestGradientOperators:
    """Test Sobel and Prewitt gradient magnitude."""

    def test_sobel_unit_ramp(self):
        """Test |Gx| = 8 and Gy = 0 inside a unit horizontal ramp."""
        gx, gy = gradient_components(horizontal_ramp(), EdgeOperatorKind.SOBEL)
        assert (gx[1:-1, 1:-1] == 8).all()
        assert not gy.any()
        assert (sobel_enhance(horizontal_ramp()).pixels[:, 1:-1] == 2).all()

    def test_prewitt_unit_ramp(self):
        """Test |Gx| = 6 inside a unit horizontal ramp."""
        gx, _ = gradient_components(horizontal_ramp(), EdgeOperatorKind.PREWITT)
        assert (gx[1:-1, 1:-1] == 6).all()
        assert (prewitt_enhance(horizontal_ramp()).pixels[:, 1:-1] == 2).all()

    def test_rotated_ramp_swaps_axes(self):
        """Test a 90 degree rotated ramp has the same magnitudes on the other axis."""
        ramp = horizontal_ramp()
        rotated = Image(np.ascontiguousarray(ramp.pixels.T))
        gx, gy = gradient_components(ramp)
        rx, ry = gradient_components(rotated)
        np.testing.assert_array_equal(np.abs(ry), np.abs(gx).T)
        np.testing.assert_array_equal(np.abs(rx), np.abs(gy).T)
        np.testing.assert_array_equal(sobel_enhance(rotated).pixels, sobel_enhance(ramp).pixels.T)

    def test_prewitt_antisymmetry(self):
        """Test Gx is antisymmetric about the vertical axis of a mirror-symmetric image."""
        half = np.random.default_rng(5).integers(0, 256, size=(6, 4), dtype=np.uint8)
        symmetric = np.hstack([half, half[:, ::-1]])
        gx, _ = gradient_components(Image(symmetric), EdgeOperatorKind.PREWITT)
        np.testing.assert_array_equal(gx, -gx[:, ::-1])

    def test_kirsch_has_no_components(self):
        """Test asking Kirsch for gradient components is an error."""
        with pytest.raises(ValueError):
            gradient_components(horizontal_ramp(), EdgeOperatorKind.KIRSCH)
