import json
import logging
import re

import pytest

from src.utils.error_handlers import (
    CheckpointError,
    ConfigError,
    FrameSequenceError,
    PipelineError,
    StageError,
    create_correlation_id,
    log_event,
    run_stage,
)
from src.utils.id_generator import generate_run_id


@pytest.mark.unit
class TestRunStage:
    def test_returns_result_and_logs_events(self, caplog):
        with caplog.at_level(logging.INFO, logger="src.utils.error_handlers"):
            assert run_stage("train", lambda a, b=0: a + b, "run_1", 2, b=3) == 5
        events = [json.loads(r.getMessage())["event_type"] for r in caplog.records]
        assert events == ["stage_start", "stage_complete"]

    def test_wraps_unexpected_errors(self):
        def failing():
            raise FrameSequenceError("missing frame(s): 000007", ["000007"])

        with pytest.raises(StageError) as excinfo:
            run_stage("track", failing, "run_1")
        assert excinfo.value.details["stage"] == "track"
        assert excinfo.value.details["original_error_type"] == "FrameSequenceError"
        assert isinstance(excinfo.value.original_error, FrameSequenceError)

    @pytest.mark.parametrize("error", [ConfigError("bad path"), CheckpointError("mismatch", (8, 3), (4, 3))])
    def test_usage_errors_pass_through(self, error):
        def failing():
            raise error

        with pytest.raises(type(error)):
            run_stage("eval", failing, "run_1")


@pytest.mark.unit
class TestErrors:
    def test_checkpoint_error_carries_both_shapes(self):
        error = CheckpointError("shape mismatch for embed.proj", (8, 6, 8, 8), (16, 6, 8, 8))
        assert error.details == {"expected_shape": [8, 6, 8, 8], "found_shape": [16, 6, 8, 8]}
        assert error.error_code == "CHECKPOINT_INVALID"
        assert isinstance(error, PipelineError)

    def test_log_event_is_single_json_line(self, caplog):
        with caplog.at_level(logging.INFO, logger="src.utils.error_handlers"):
            log_event("epoch_end", "corr_1", phase="dims", loss=0.25)
        (record,) = caplog.records
        event = json.loads(record.getMessage())
        assert event["event_type"] == "epoch_end"
        assert event["correlation_id"] == "corr_1"
        assert (event["phase"], event["loss"]) == ("dims", 0.25)

    def test_correlation_ids(self):
        assert create_correlation_id("run_9").startswith("run_9_")
        assert create_correlation_id().startswith("req_")

    def test_run_id_format(self):
        assert re.fullmatch(r"run_\d{17}", generate_run_id())
