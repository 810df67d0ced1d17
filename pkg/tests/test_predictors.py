"""
Unit tests for predictors and batch prediction.
"""
from pathlib import Path

import numpy as np
import pytest

from edgeroute.edges import EdgeOperatorKind
from edgeroute.errors import PredictionError, PredictorSpecError
from edgeroute.imaging import DatasetManifest, Image, ManifestEntry, Mask, save_image, save_mask
from edgeroute.metrics import dsc
from edgeroute.predictors import (
    EdgeAssistedThreshold,
    PrecomputedMasks,
    ThresholdOtsu,
    otsu_mask,
    parse_predictor,
    predict_batch,
)


def square_image(size=24, lo=40, hi=200, box=(6, 18)) -> Image:
    pixels = np.full((size, size), lo, dtype=np.uint8)
    pixels[box[0] : box[1], box[0] : box[1]] = hi
    return Image(pixels, name="square")


def square_truth(size=24, box=(6, 18)) -> Mask:
    bits = np.zeros((size, size), dtype=np.bool_)
    bits[box[0] : box[1], box[0] : box[1]] = True
    return Mask(bits)


class TestOtsu:
    """Test the raw-input Otsu predictor."""

    def test_two_level_image(self):
        """Test a clean bright square is segmented exactly."""
        assert ThresholdOtsu().predict(square_image()) == square_truth()

    def test_constant_image(self):
        """Test a constant image gives an empty mask."""
        assert not otsu_mask(np.full((5, 5), 9, dtype=np.uint8)).any()

    def test_name_and_shape_kept(self):
        """Test the mask carries the image name and shape."""
        mask = ThresholdOtsu().predict(square_image())
        assert (mask.name, mask.shape) == ("square", (24, 24))


class TestEdgeAssistedThreshold:
    """Test the edge-input predictor."""

    def test_consumes_edge_input(self):
        """Test the edge predictor is flagged as edge-input."""
        assert EdgeAssistedThreshold.edge_input
        assert not ThresholdOtsu.edge_input

    def test_fills_outline(self):
        """Test the filled outline covers the square and stays close to it."""
        mask = EdgeAssistedThreshold().predict(square_image())
        truth = square_truth()
        assert (mask.bits & truth.bits).sum() == truth.area
        assert dsc(mask, truth) > 0.8

    def test_gradient_background(self):
        """Test the edge predictor beats raw Otsu on a strong background ramp."""
        size = 32
        ramp = np.tile(np.linspace(20, 180, size), (size, 1))
        truth = np.zeros((size, size), dtype=np.bool_)
        truth[10:22, 10:22] = True
        pixels = np.clip(np.floor(ramp + 60 * truth + 0.5), 0, 255).astype(np.uint8)
        image, gt = Image(pixels), Mask(truth)
        assert dsc(EdgeAssistedThreshold().predict(image), gt) > dsc(ThresholdOtsu().predict(image), gt)

    def test_operator_choice(self):
        """Test Sobel and Prewitt variants also produce same-shape masks."""
        for kind in (EdgeOperatorKind.SOBEL, EdgeOperatorKind.PREWITT):
            assert EdgeAssistedThreshold(operator=kind).predict(square_image()).shape == (24, 24)


class TestPrecomputedMasks:
    """Test masks produced elsewhere."""

    def test_directory_lookup(self, tmp_path):
        """Test masks are found as <dir>/<image-stem>.png."""
        save_mask(square_truth(), tmp_path / "square.png")
        assert PrecomputedMasks(directory=tmp_path).predict(square_image()) == square_truth()

    def test_missing_mask(self, tmp_path):
        """Test a missing mask is a prediction error naming the image."""
        with pytest.raises(PredictionError, match="square") as info:
            PrecomputedMasks(directory=tmp_path).predict(square_image())
        assert info.value.image_id == "square"

    def test_shape_mismatch(self, tmp_path):
        """Test a mask of the wrong shape is a prediction error."""
        save_mask(Mask.empty((5, 5)), tmp_path / "square.png")
        with pytest.raises(PredictionError):
            PrecomputedMasks(directory=tmp_path).predict(square_image())

    def test_from_manifest_column(self, tmp_path):
        """Test lookup through a manifest prediction column."""
        mask_path = save_mask(square_truth(), tmp_path / "preds" / "anything.png")
        entry = ManifestEntry(Path("square.png"), Path("gt.png"), "OCT", pred_edge=mask_path)
        predictor = PrecomputedMasks.from_manifest(DatasetManifest((entry,)), "pred_edge")
        assert predictor.predict(square_image()) == square_truth()


class TestParsePredictor:
    """Test predictor spec strings."""

    def test_builtins(self):
        """Test otsu and edge-otsu specs."""
        assert isinstance(parse_predictor("otsu"), ThresholdOtsu)
        edge = parse_predictor("edge-otsu", operator=EdgeOperatorKind.SOBEL, scale=0.5)
        assert isinstance(edge, EdgeAssistedThreshold)
        assert (edge.operator, edge.scale) == (EdgeOperatorKind.SOBEL, 0.5)

    def test_masks_dir(self, tmp_path):
        """Test masks:<dir> and bare directories."""
        assert parse_predictor(f"masks:{tmp_path}").directory == tmp_path
        assert parse_predictor(str(tmp_path)).directory == tmp_path

    def test_column_needs_manifest(self):
        """Test column specs without a manifest are rejected."""
        with pytest.raises(PredictorSpecError):
            parse_predictor("column:pred_raw")

    def test_unknown_column(self):
        """Test unknown manifest columns are rejected."""
        with pytest.raises(PredictorSpecError):
            parse_predictor("column:pred_other", DatasetManifest())

    def test_unknown(self):
        """Test unknown specs are rejected."""
        with pytest.raises(PredictorSpecError):
            parse_predictor("unet")


class TestPredictBatch:
    """Test batch prediction over a manifest."""

    @pytest.fixture
    def manifest(self, tmp_path):
        entries = []
        for i in range(4):
            path = save_image(square_image(lo=30 + i).renamed(f"img{i}"), tmp_path / f"img{i}.png")
            entries.append(ManifestEntry(path, path, "US"))
        entries.append(ManifestEntry(tmp_path / "missing.png", tmp_path / "missing.png", "US"))
        return DatasetManifest(tuple(entries))

    def test_order_and_failures(self, manifest):
        """Test results keep manifest order and failures are collected."""
        result = predict_batch(ThresholdOtsu(), manifest)
        assert [image_id for image_id, _ in result.masks] == ["img0", "img1", "img2", "img3"]
        assert [image_id for image_id, _ in result.failures] == ["missing"]

    def test_threaded_matches_serial(self, manifest):
        """Test a thread pool gives the same ordered result."""
        serial = predict_batch(ThresholdOtsu(), manifest)
        threaded = predict_batch(ThresholdOtsu(), manifest, workers=3)
        assert threaded.masks == serial.masks
        assert threaded.failures == serial.failures
