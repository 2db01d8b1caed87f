"""
JSON serialization of decision forests
"""

from pathlib import Path
from typing import Any, Dict, Union
import json
import logging

import numpy as np
from pydantic import ValidationError

from ..errors import ModelFormatError
from ..models.forest import (
    DecisionForest, LeafNode, OffsetPair, SplitCandidate, SplitNode,
    TrainingConfig, TreeNode,
)
from ..models.imaging import CLASS_NAMES, NUM_CLASSES

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def _node_to_record(node: TreeNode) -> Dict[str, Any]:
    if isinstance(node, LeafNode):
        return {"leaf": [float(p) for p in node.pdf]}
    candidate = node.candidate
    return {
        "split": {
            "u": [float(candidate.offsets.u[0]), float(candidate.offsets.u[1])],
            "v": [float(candidate.offsets.v[0]), float(candidate.offsets.v[1])],
            "tau": float(candidate.tau),
        },
        "left": _node_to_record(node.left),
        "right": _node_to_record(node.right),
    }


def _node_from_record(record: Dict[str, Any]) -> TreeNode:
    if "leaf" in record:
        pdf = np.array(record["leaf"], dtype=np.float64)
        if pdf.shape != (NUM_CLASSES,) or np.any(pdf < 0) or abs(pdf.sum() - 1.0) > 1e-9:
            raise ModelFormatError(f"Invalid leaf PDF {record['leaf']}")
        return LeafNode(pdf=pdf)
    try:
        split = record["split"]
        candidate = SplitCandidate(
            offsets=OffsetPair(
                u=(float(split["u"][0]), float(split["u"][1])),
                v=(float(split["v"][0]), float(split["v"][1])),
            ),
            tau=float(split["tau"]),
        )
        return SplitNode(
            candidate=candidate,
            left=_node_from_record(record["left"]),
            right=_node_from_record(record["right"]),
        )
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ModelFormatError(f"Malformed tree node record: {e}") from e


def forest_to_json(forest: DecisionForest) -> str:
    """Encode a forest; floats keep their full repr so decoding is exact"""
    document = {
        "format_version": FORMAT_VERSION,
        "class_names": list(forest.class_names or CLASS_NAMES),
        "training_config": forest.training_config.model_dump(mode="json"),
        "trees": [_node_to_record(tree) for tree in forest.trees],
    }
    return json.dumps(document, separators=(",", ":")) + "\n"


def forest_from_json(text: str) -> DecisionForest:
    """Decode a document written by :func:`forest_to_json`"""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"Forest document is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise ModelFormatError("Forest document must be a JSON object")
    if document.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"Unsupported forest format_version {document.get('format_version')}")
    if document.get("class_names") != CLASS_NAMES:
        raise ModelFormatError(f"Unexpected class set {document.get('class_names')}")
    try:
        config = TrainingConfig(**document["training_config"])
    except (KeyError, ValidationError) as e:
        raise ModelFormatError(f"Invalid training_config: {e}") from e
    trees = [_node_from_record(record) for record in document.get("trees", [])]
    if not trees:
        raise ModelFormatError("Forest document has no trees")
    return DecisionForest(trees=trees, training_config=config, class_names=list(CLASS_NAMES))


def save_forest(forest: DecisionForest, path: Union[str, Path]) -> None:
    Path(path).write_text(forest_to_json(forest), encoding="utf-8")
    logger.info(f"Saved forest with {forest.n_trees} trees to {path}")


def load_forest(path: Union[str, Path]) -> DecisionForest:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFormatError(f"Cannot read forest {path}: {e}") from e
    forest = forest_from_json(text)
    logger.info(f"Loaded forest with {forest.n_trees} trees from {path}")
    return forest
