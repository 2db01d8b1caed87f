"""
Tests for CSV report writers
"""

import numpy as np
import pandas as pd
import pytest

from src.errors import InvalidInputError
from src.evaluation.reports import (
    read_eer_thresholds,
    step_confusion_frame,
    write_action_part_report,
    write_ap_summary,
    write_confusion,
    write_pr_curves,
    write_proposal_counts,
    write_sweep,
    write_timeline,
    write_uar_report,
)
from src.models.activity import Action, Activity, STEPS, Step
from src.models.evaluation import BinaryCounts, ConfusionMatrix, PRCurve, PRPoint
from src.models.imaging import BodyPart, CLASS_NAMES, TRACKED_PARTS
from src.tracking.activity import TimelineRow


def simple_curve():
    return PRCurve([
        PRPoint(0.0, 0.5, 1.0, BinaryCounts(tp=2, fp=2)),
        PRPoint(1.0, 1.0, 0.0, BinaryCounts(fn=2)),
    ])


class TestProposalReports:

    def test_pr_curve_files(self, tmp_path):
        paths = write_pr_curves({part: simple_curve() for part in TRACKED_PARTS}, tmp_path)
        assert [p.name for p in paths] == ["pr_left_hand.csv", "pr_right_hand.csv", "pr_head.csv"]
        lines = paths[0].read_text().splitlines()
        assert lines == ["threshold,precision,recall", "0.000000,0.500000,1.000000", "1.000000,1.000000,0.000000"]

    def test_summary_round_trip(self, tmp_path):
        aps = {BodyPart.LEFT_HAND: 0.802, BodyPart.RIGHT_HAND: 0.805, BodyPart.HEAD: 0.931}
        eers = {BodyPart.LEFT_HAND: 0.65, BodyPart.RIGHT_HAND: 0.6, BodyPart.HEAD: 0.95}
        path = write_ap_summary(aps, eers, tmp_path / "summary.csv")
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["part", "ap", "eer_threshold"]
        assert frame["part"].tolist() == ["left_hand", "right_hand", "head", "mAP"]
        assert frame["ap"].iloc[-1] == pytest.approx(0.846, abs=1e-3)
        assert read_eer_thresholds(path) == {"left_hand": 0.65, "right_hand": 0.6, "head": 0.95}

    def test_summary_missing_columns(self, tmp_path):
        path = tmp_path / "summary.csv"
        path.write_text("part,ap\nhead,0.9\n")
        with pytest.raises(InvalidInputError):
            read_eer_thresholds(path)

    def test_summary_threshold_out_of_range(self, tmp_path):
        path = tmp_path / "summary.csv"
        path.write_text("part,ap,eer_threshold\nhead,0.9,1.5\n")
        with pytest.raises(InvalidInputError):
            read_eer_thresholds(path)

    def test_proposal_counts(self, tmp_path):
        counts = {BodyPart.HEAD: BinaryCounts(tp=3, fp=1, tn=2, fn=0)}
        path = write_proposal_counts(counts, {BodyPart.HEAD: 0.95}, tmp_path / "counts.csv")
        assert path.read_text().splitlines() == ["part,threshold,tp,fp,tn,fn", "head,0.950000,3,1,2,0"]


class TestPixelReports:

    def test_confusion(self, tmp_path):
        cm = ConfusionMatrix(np.diag([1, 2, 3, 4]), tuple(CLASS_NAMES))
        frame = pd.read_csv(write_confusion(cm, tmp_path / "confusion.csv"))
        assert list(frame.columns) == ["truth", *CLASS_NAMES]
        assert frame["truth"].tolist() == CLASS_NAMES
        assert frame["body"].tolist() == [0, 0, 0, 4]

    def test_uar_report(self, tmp_path):
        cm = ConfusionMatrix(np.array([[8, 2], [1, 9]]), ("a", "b"))
        frame = pd.read_csv(write_uar_report(cm, 0.85, tmp_path / "uar.csv"))
        assert frame["class"].tolist() == ["a", "b", "uar"]
        np.testing.assert_allclose(frame["recall"], [0.8, 0.9, 0.85])

    def test_sweep(self, tmp_path):
        rows = [{"param_value": 8.0, "uar": 0.5}, {"param_value": 12.0, "uar": 0.625}]
        text = write_sweep(rows, tmp_path / "sweep.csv").read_text()
        assert text == "param_value,uar\n8.000000,0.500000\n12.000000,0.625000\n"

    def test_rewrite_is_byte_identical(self, tmp_path):
        cm = ConfusionMatrix(np.array([[3, 1], [2, 5]]), ("a", "b"))
        first = write_uar_report(cm, 0.6, tmp_path / "one.csv").read_bytes()
        second = write_uar_report(cm, 0.6, tmp_path / "two.csv").read_bytes()
        assert first == second


class TestTrackingReports:

    def test_timeline(self, tmp_path):
        rows = [
            TimelineRow(frame=1, left_activity=Activity.AWAY, right_activity=Activity.TAP, steps_completed=0),
            TimelineRow(frame=2, left_activity=Activity.SOAP, right_activity=Activity.TAP, steps_completed=1),
        ]
        lines = write_timeline(rows, tmp_path / "timeline.csv").read_text().splitlines()
        assert lines == [
            "frame,left_activity,right_activity,steps_completed",
            "1,away,tap,0",
            "2,soap,tap,1",
        ]

    def test_step_confusion_aggregate(self):
        per_trial = {"a": BinaryCounts(tp=5), "b": BinaryCounts(tp=3, fn=2)}
        flags = {
            "a": {step: True for step in STEPS},
            "b": {Step.TURN_ON_WATER: True, Step.GET_SOAP: True, Step.RINSE_HANDS: True},
        }
        frame = step_confusion_frame(per_trial, flags)
        assert frame["trial"].tolist() == ["a", "b", "all"]
        total = frame.iloc[-1]
        assert (total["tp"], total["fn"]) == (8, 2)
        assert total["recall"] == pytest.approx(0.8)
        assert total["dry_hands"] == 1
        assert frame.iloc[1]["turn_off_water"] == 0

    def test_step_confusion_undefined_scores_are_nan(self):
        frame = step_confusion_frame({"silent": BinaryCounts(tn=5)})
        assert np.isnan(frame.iloc[0]["precision"])
        assert np.isnan(frame.iloc[0]["f1"])

    def test_action_part_report(self, tmp_path):
        scores = {action: {part: 0.5 for part in TRACKED_PARTS} for action in Action}
        overall = {part: 0.75 for part in TRACKED_PARTS}
        shares = {Action.WALK: 0.1, Action.WASH: 0.6, Action.TOWEL: 0.2, Action.TURN: 0.1}
        path = write_action_part_report(scores, overall, shares, tmp_path / "actions.csv")
        frame = pd.read_csv(path)
        assert len(frame) == len(Action) * 3 + 3
        assert list(frame.columns) == ["action", "part", "f_half", "validation_share", "training_share"]
        wash = frame[(frame["action"] == "wash") & (frame["part"] == "head")].iloc[0]
        assert wash["validation_share"] == pytest.approx(0.6)
        assert np.isnan(wash["training_share"])
        assert frame[frame["action"] == "all"]["f_half"].tolist() == [0.75, 0.75, 0.75]
