"""
Unit tests for evaluation records, routing rules, training and persistence.
"""
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgeroute.errors import PredictionError, ReportError, RuleFormatError, TrainingError
from edgeroute.features import Feature, FeatureVector, extract_features
from edgeroute.imaging import DatasetManifest, Image, ManifestEntry, Mask, save_image, save_mask
from edgeroute.predictors import EdgeAssistedThreshold, PrecomputedMasks, ThresholdOtsu
from edgeroute.router import (
    ALWAYS_EDGE,
    ALWAYS_RAW,
    EDGE,
    RAW,
    Direction,
    EvalRecord,
    ModalityRule,
    RoutingRule,
    RuleKind,
    build_eval_records,
    candidate_rules,
    load_rule,
    meta_performances,
    meta_predict,
    oracle_performance,
    read_records,
    realized_performance,
    route,
    route_image,
    save_rule,
    train_modality,
    train_router,
    write_records,
)


def record(image_id, modality, entropy, perf_raw, perf_edge, sigma=10.0, **kwargs):
    return EvalRecord(image_id, modality, FeatureVector(sigma, entropy), perf_raw, perf_edge, **kwargs)


@pytest.fixture
def entropy_split_records():
    """Entropy [2, 3, 6, 7] with delta [-5, -5, +5, +5]."""
    return [
        record("a", "OCT", 2.0, 50.0, 45.0),
        record("b", "OCT", 3.0, 50.0, 45.0),
        record("c", "OCT", 6.0, 50.0, 55.0),
        record("d", "OCT", 7.0, 50.0, 55.0),
    ]


records_strategy = st.lists(
    st.tuples(
        st.sampled_from(["US", "OCT"]),
        st.floats(0, 100),
        st.floats(0, 8),
        st.floats(0, 100),
        st.floats(0, 100),
    ),
    min_size=1,
    max_size=12,
).map(
    lambda rows: [
        EvalRecord(f"r{i}", m, FeatureVector(s, e), pr, pe) for i, (m, s, e, pr, pe) in enumerate(rows)
    ]
)


class TestEvalRecord:
    """Test per-image record arithmetic."""

    def test_raw_better(self):
        """Test 53.03 vs 32.38 gives delta -20.65 and label 0."""
        r = record("x", "Dermoscopy", 1.0, 53.03, 32.38)
        assert r.delta == pytest.approx(-20.65)
        assert r.label == RAW

    def test_edge_better(self):
        """Test 1.29 vs 25.87 gives delta +24.58 and label 1."""
        r = record("x", "OCT", 1.0, 1.29, 25.87)
        assert r.delta == pytest.approx(24.58)
        assert r.label == EDGE

    def test_tie_goes_to_raw(self):
        """Test equal performance is labelled raw."""
        assert record("x", "US", 1.0, 40.0, 40.0).label == RAW


class TestBuildEvalRecords:
    """Test scoring both predictors on a manifest."""

    def test_both_perfect(self, tmp_path):
        """Test two predictors emitting the ground truth give delta 0."""
        pixels = np.full((16, 16), 30, dtype=np.uint8)
        pixels[4:12, 4:12] = 220
        truth = Mask(pixels > 100)
        image_path = save_image(Image(pixels), tmp_path / "img.png")
        gt_path = save_mask(truth, tmp_path / "gt" / "img.png")
        manifest = DatasetManifest((ManifestEntry(image_path, gt_path, "US"),))
        gt_pred = PrecomputedMasks(directory=tmp_path / "gt")

        (r,) = build_eval_records(manifest, ThresholdOtsu(), gt_pred)
        assert (r.perf_raw, r.perf_edge, r.delta, r.label) == (100.0, 100.0, 0.0, RAW)
        assert r.features == extract_features(Image(pixels))
        assert r.loss_raw == pytest.approx(r.loss_edge)

    def test_errors_carry_image_id(self, tmp_path):
        """Test a missing mask surfaces as a prediction error with the image id."""
        image_path = save_image(Image(np.zeros((4, 4), dtype=np.uint8)), tmp_path / "lonely.png")
        manifest = DatasetManifest((ManifestEntry(image_path, image_path, "US"),))
        with pytest.raises(PredictionError) as info:
            build_eval_records(manifest, ThresholdOtsu(), PrecomputedMasks(directory=tmp_path / "none"))
        assert info.value.image_id == "lonely"


class TestRules:
    """Test rule evaluation and routing."""

    def test_constant_rules(self):
        """Test constant rules ignore features."""
        for fv in (FeatureVector(0.0, 0.0), FeatureVector(100.0, 8.0)):
            assert ALWAYS_RAW.decide(fv) == RAW
            assert ALWAYS_EDGE.decide(fv) == EDGE

    def test_threshold_rule(self):
        """Test entropy >= 4.5 routes to edge."""
        rule = RoutingRule({"OCT": ModalityRule(RuleKind.THRESHOLD, Feature.ENTROPY, 4.5, Direction.EDGE_ABOVE)})
        assert route(rule, "OCT", FeatureVector(1.0, 6.0)) == EDGE
        assert route(rule, "OCT", FeatureVector(1.0, 4.5)) == EDGE
        assert route(rule, "OCT", FeatureVector(1.0, 3.0)) == RAW

    def test_raw_above(self):
        """Test the reversed direction."""
        rule = ModalityRule(RuleKind.THRESHOLD, Feature.SIGMA, 20.0, Direction.RAW_ABOVE)
        assert rule.decide(FeatureVector(25.0, 0.0)) == RAW
        assert rule.decide(FeatureVector(15.0, 0.0)) == EDGE

    def test_unknown_modality_falls_back_to_raw(self):
        """Test modalities without a rule route to raw."""
        rule = RoutingRule({"OCT": ALWAYS_EDGE})
        assert route(rule, "Fundus", FeatureVector(50.0, 7.0)) == RAW

    def test_threshold_needs_fields(self):
        """Test a threshold rule without a cutoff is rejected."""
        with pytest.raises(ValueError):
            ModalityRule(RuleKind.THRESHOLD, Feature.SIGMA)


class TestMetaPredict:
    """Test inference-time routing."""

    @pytest.fixture
    def images(self):
        flat = np.full((20, 20), 40, dtype=np.uint8)
        flat[6:14, 6:14] = 200
        busy = np.random.default_rng(0).integers(0, 256, size=(20, 20), dtype=np.uint8)
        return Image(flat, "flat"), Image(busy, "busy")

    def test_constant_rules_match_predictors(self, images):
        """Test always-raw and always-edge reproduce each predictor bit for bit."""
        raw, edge = ThresholdOtsu(), EdgeAssistedThreshold()
        for image in images:
            assert meta_predict(RoutingRule({"US": ALWAYS_RAW}), raw, edge, image, "US") == raw.predict(image)
            assert meta_predict(RoutingRule({"US": ALWAYS_EDGE}), raw, edge, image, "US") == edge.predict(image)

    def test_threshold_splits_images(self, images):
        """Test images on either side of an entropy cutoff use different predictors."""
        flat, busy = images
        cutoff = (extract_features(flat).entropy + extract_features(busy).entropy) / 2
        rule = RoutingRule({"US": ModalityRule(RuleKind.THRESHOLD, Feature.ENTROPY, cutoff, Direction.EDGE_ABOVE)})
        raw, edge = ThresholdOtsu(), EdgeAssistedThreshold()
        assert meta_predict(rule, raw, edge, flat, "US") == raw.predict(flat)
        assert meta_predict(rule, raw, edge, busy, "US") == edge.predict(busy)

    def test_route_image(self, images):
        """Test route_image returns the routed choice with the image's own features."""
        flat, busy = images
        cutoff = (extract_features(flat).entropy + extract_features(busy).entropy) / 2
        rule = RoutingRule({"US": ModalityRule(RuleKind.THRESHOLD, Feature.ENTROPY, cutoff, Direction.EDGE_ABOVE)})
        assert route_image(rule, flat, "US") == (RAW, extract_features(flat))
        assert route_image(rule, busy, "US") == (EDGE, extract_features(busy))
        assert route_image(rule, busy, "OCT")[0] == RAW


class TestTraining:
    """Test exhaustive stump training."""

    def test_edge_dominant(self):
        """Test a modality where edge always wins trains always-edge."""
        records = [record(str(i), "US", float(i), 10.0, 20.0 + i) for i in range(5)]
        assert train_router(records).rule_for("US") == ALWAYS_EDGE

    def test_raw_dominant(self):
        """Test a modality where raw always wins trains always-raw."""
        records = [record(str(i), "US", float(i), 30.0, 20.0) for i in range(5)]
        assert train_router(records).rule_for("US") == ALWAYS_RAW

    def test_all_ties_prefer_raw(self):
        """Test identical performances keep always-raw."""
        records = [record(str(i), "US", float(i), 30.0, 30.0) for i in range(4)]
        assert train_router(records).rule_for("US") == ALWAYS_RAW

    def test_entropy_threshold(self, entropy_split_records):
        """Test entropy [2, 3, 6, 7] with delta [-5, -5, 5, 5] trains entropy >= 4.5 -> edge."""
        rule = train_router(entropy_split_records).rule_for("OCT")
        assert rule == ModalityRule(RuleKind.THRESHOLD, Feature.ENTROPY, 4.5, Direction.EDGE_ABOVE)
        realized = realized_performance(rule, entropy_split_records)
        assert realized == pytest.approx(52.5)
        assert realized > realized_performance(ALWAYS_RAW, entropy_split_records)
        assert realized > realized_performance(ALWAYS_EDGE, entropy_split_records)

    def test_candidate_order(self, entropy_split_records):
        """Test constants come first and thresholds ascend by cutoff."""
        candidates = candidate_rules(entropy_split_records)
        assert candidates[:2] == [ALWAYS_RAW, ALWAYS_EDGE]
        cutoffs = [c.cutoff for c in candidates[2:]]
        assert cutoffs == sorted(cutoffs)
        # sigma is constant in this fixture: only entropy midpoints, both directions
        assert cutoffs == [2.5, 2.5, 4.5, 4.5, 6.5, 6.5]
        assert candidates[2].direction is Direction.EDGE_ABOVE

    def test_per_modality(self, entropy_split_records):
        """Test each modality gets its own rule."""
        extra = [record("u1", "US", 1.0, 80.0, 10.0), record("u2", "US", 2.0, 70.0, 10.0)]
        rule = train_router(entropy_split_records + extra)
        assert set(rule.rules) == {"OCT", "US"}
        assert rule.rule_for("US") == ALWAYS_RAW

    def test_empty(self):
        """Test training on nothing is an error."""
        with pytest.raises(TrainingError):
            train_router([])

    def test_deterministic(self, entropy_split_records):
        """Test retraining yields the identical rule."""
        assert train_router(entropy_split_records) == train_router(list(entropy_split_records))

    @settings(max_examples=60, deadline=None)
    @given(records_strategy)
    def test_optimality_and_oracle_bound(self, records):
        """Test trained rules beat both constants and never exceed the oracle."""
        rule = train_router(records)
        for modality in {r.modality for r in records}:
            group = [r for r in records if r.modality == modality]
            realized = realized_performance(rule.rule_for(modality), group)
            assert realized >= realized_performance(ALWAYS_RAW, group) - 1e-9
            assert realized >= realized_performance(ALWAYS_EDGE, group) - 1e-9
            assert realized <= oracle_performance(group) + 1e-9

    def test_train_modality_matches_router(self, entropy_split_records):
        """Test the single-modality trainer agrees with the router."""
        assert train_modality(entropy_split_records) == train_router(entropy_split_records).rule_for("OCT")

    def test_meta_performances(self, entropy_split_records):
        """Test per-record routed performance."""
        rule = train_router(entropy_split_records)
        assert meta_performances(rule, entropy_split_records) == [50.0, 50.0, 55.0, 55.0]


class TestPersistence:
    """Test rule and record files."""

    def test_rule_round_trip(self, tmp_path, entropy_split_records):
        """Test a saved rule loads back identically."""
        rule = RoutingRule({"OCT": train_modality(entropy_split_records), "US": ALWAYS_EDGE})
        path = save_rule(rule, tmp_path / "rule.json")
        data = json.loads(path.read_text())
        assert data["format"] == "edgeroute.routing-rule"
        assert data["schema_version"] == 1
        assert data["rules"]["OCT"] == {"kind": "threshold", "feature": "entropy", "cutoff": 4.5, "direction": "edge-above"}
        assert load_rule(path) == rule

    def test_rule_without_format_tag(self, tmp_path):
        """Test files without the format tag are rejected."""
        (tmp_path / "rule.json").write_text(json.dumps({"rules": {}}))
        with pytest.raises(RuleFormatError):
            load_rule(tmp_path / "rule.json")

    def test_malformed_rule(self, tmp_path):
        """Test unknown rule kinds are rejected."""
        payload = {"format": "edgeroute.routing-rule", "rules": {"US": {"kind": "coin-flip"}}}
        (tmp_path / "rule.json").write_text(json.dumps(payload))
        with pytest.raises(RuleFormatError):
            load_rule(tmp_path / "rule.json")

    def test_invalid_json(self, tmp_path):
        """Test non-JSON files are rejected."""
        (tmp_path / "rule.json").write_text("{not json")
        with pytest.raises(RuleFormatError):
            load_rule(tmp_path / "rule.json")

    def test_records_round_trip(self, tmp_path, entropy_split_records):
        """Test records survive CSV at full precision."""
        records = entropy_split_records + [record("e", "US", 1.0 / 3.0, 12.345678901234, 0.1, loss_raw=0.5, loss_edge=0.25)]
        path = write_records(records, tmp_path / "records.csv")
        header = path.read_text().splitlines()[0]
        assert header == "image,modality,sigma,entropy,perf_raw,perf_edge,delta,label,loss_raw,loss_edge"
        assert read_records(path) == records

    def test_records_missing_column(self, tmp_path):
        """Test record files without performance columns are rejected."""
        (tmp_path / "records.csv").write_text("image,modality,sigma\na,US,1.0\n")
        with pytest.raises(ReportError):
            read_records(tmp_path / "records.csv")

    def test_records_bad_number(self, tmp_path):
        """Test unparsable numbers name the row."""
        (tmp_path / "records.csv").write_text("image,modality,sigma,entropy,perf_raw,perf_edge\na,US,x,1,2,3\n")
        with pytest.raises(ReportError, match="row 2"):
            read_records(tmp_path / "records.csv")
