"""
Tests for forest JSON persistence
"""

import json

import numpy as np
import pytest

from src.classifier.forest import classify_image
from src.classifier.serialization import forest_from_json, forest_to_json, load_forest, save_forest
from src.errors import ModelFormatError
from src.models.imaging import CLASS_NAMES


class TestForestJson:

    def test_reloaded_forest_classifies_identically(self, tiny_forest, two_class_image, tmp_path):
        path = tmp_path / "forest.json"
        save_forest(tiny_forest, path)
        loaded = load_forest(path)
        xs, ys = two_class_image.labeled_pixels()
        np.testing.assert_array_equal(
            classify_image(loaded, two_class_image.depth, xs, ys),
            classify_image(tiny_forest, two_class_image.depth, xs, ys),
        )
        assert loaded.training_config == tiny_forest.training_config
        assert loaded.class_names == CLASS_NAMES

    def test_encoding_is_stable(self, tiny_forest):
        text = forest_to_json(tiny_forest)
        assert forest_to_json(forest_from_json(text)) == text

    def test_document_layout(self, tiny_forest):
        document = json.loads(forest_to_json(tiny_forest))
        assert document["format_version"] == 1
        assert document["class_names"] == ["left_hand", "right_hand", "head", "body"]
        assert len(document["trees"]) == tiny_forest.n_trees
        assert document["training_config"]["rng_seed"] == tiny_forest.training_config.rng_seed


class TestMalformedDocuments:

    @pytest.fixture
    def document(self, tiny_forest):
        return json.loads(forest_to_json(tiny_forest))

    def test_not_json(self):
        with pytest.raises(ModelFormatError):
            forest_from_json("{not json")

    def test_not_an_object(self):
        with pytest.raises(ModelFormatError):
            forest_from_json("[1, 2]")

    def test_unknown_version(self, document):
        document["format_version"] = 99
        with pytest.raises(ModelFormatError):
            forest_from_json(json.dumps(document))

    def test_other_class_set(self, document):
        document["class_names"] = ["hand", "head", "body"]
        with pytest.raises(ModelFormatError):
            forest_from_json(json.dumps(document))

    def test_leaf_pdf_must_sum_to_one(self, document):
        document["trees"] = [{"leaf": [0.5, 0.5, 0.5, 0.0]}]
        with pytest.raises(ModelFormatError):
            forest_from_json(json.dumps(document))

    def test_split_without_children(self, document):
        document["trees"] = [{"split": {"u": [1.0, 0.0], "v": [0.0, 0.0], "tau": 0.1}}]
        with pytest.raises(ModelFormatError):
            forest_from_json(json.dumps(document))

    def test_no_trees(self, document):
        document["trees"] = []
        with pytest.raises(ModelFormatError):
            forest_from_json(json.dumps(document))

    def test_invalid_training_config(self, document):
        document["training_config"]["n_trees"] = 0
        with pytest.raises(ModelFormatError):
            forest_from_json(json.dumps(document))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelFormatError):
            load_forest(tmp_path / "absent.json")
