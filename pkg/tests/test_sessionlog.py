"""Session log serialization contract."""

from __future__ import annotations

import json
import math

import pytest

from dancemix.engine.sessionlog import (
    LOG_VERSION,
    SessionLog,
    SessionLogWriter,
    canonical_json,
    make_header,
    read_session_log,
)
from dancemix.errors import InvalidArgumentError


def step_event(step: int, t_ms: float = 0.0) -> dict:
    return {
        "type": "step",
        "step": step,
        "t_ms": t_ms,
        "energy": {"mean": 0.1, "std": 0.0, "min": 0.1, "max": 0.1},
        "energy_series": [[t_ms, 0.1]],
        "clip_id": "clip_a",
        "similarity": 0.5,
        "top5": [["clip_a", 0.5]],
        "latency_ms": 0.0,
        "fault": None,
        "repeated": False,
    }


class TestCanonicalJson:
    def test_sorted_keys_no_spaces(self):
        assert canonical_json({"b": 1, "a": [2, 3]}) == '{"a":[2,3],"b":1}'

    def test_key_order_does_not_change_bytes(self):
        assert canonical_json({"x": 1, "y": 2}) == canonical_json({"y": 2, "x": 1})

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            canonical_json({"v": math.nan})
        with pytest.raises(ValueError):
            canonical_json({"v": math.inf})

    def test_round_trips_through_json(self):
        obj = {"nested": {"q": [1.5, "s", None, True]}}
        assert json.loads(canonical_json(obj)) == obj


class TestHeader:
    def test_fields(self):
        h = make_header({"fps": 30}, "aa" * 32, "bb" * 32, 8, "offline")
        assert h["type"] == "header"
        assert h["version"] == LOG_VERSION
        assert h["mode"] == "offline"
        assert h["config"] == {"fps": 30}
        assert h["n_clips"] == 8

    def test_no_wall_clock_field(self):
        """Headers carry no timestamps, so replays are byte-reproducible."""
        h = make_header({}, "a", "b", 0, "live")
        assert not any("time" in k or "date" in k for k in h)


class TestValidation:
    def header(self) -> dict:
        return make_header({}, "a", "b", 1, "offline")

    def test_valid_log_passes(self):
        log = SessionLog(self.header(), [step_event(1), step_event(2), step_event(3)])
        log.validate()

    def test_missing_header_rejected(self):
        with pytest.raises(InvalidArgumentError, match="header"):
            SessionLog({"type": "step"}, []).validate()

    def test_wrong_version_rejected(self):
        bad = self.header()
        bad["version"] = 99
        with pytest.raises(InvalidArgumentError, match="version"):
            SessionLog(bad, []).validate()

    def test_non_increasing_steps_rejected(self):
        log = SessionLog(self.header(), [step_event(1), step_event(1)])
        with pytest.raises(InvalidArgumentError, match="increase"):
            log.validate()
        log = SessionLog(self.header(), [step_event(2), step_event(1)])
        with pytest.raises(InvalidArgumentError, match="increase"):
            log.validate()

    def test_unknown_event_type_rejected(self):
        log = SessionLog(self.header(), [{"type": "mystery", "step": 1}])
        with pytest.raises(InvalidArgumentError, match="mystery"):
            log.validate()


class TestRoundTrip:
    def test_save_then_read(self, tmp_path):
        log = SessionLog(
            make_header({"fps": 30}, "x", "y", 2, "offline"),
            [step_event(1, 3500.0), step_event(2, 6500.0)],
        )
        path = tmp_path / "session.jsonl"
        log.save(path)
        loaded = read_session_log(path)
        assert loaded.header == log.header
        assert loaded.events == log.events

    def test_writer_matches_save_bytes(self, tmp_path):
        header = make_header({}, "x", "y", 1, "live")
        events = [step_event(1), step_event(2)]
        a = tmp_path / "a.jsonl"
        b = tmp_path / "b.jsonl"
        SessionLog(header, events).save(a)
        with SessionLogWriter(b, header) as writer:
            for event in events:
                writer.append(event)
        assert a.read_bytes() == b.read_bytes()

    def test_one_line_per_event(self, tmp_path):
        path = tmp_path / "s.jsonl"
        SessionLog(make_header({}, "x", "y", 1, "offline"), [step_event(1)]).save(path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert json.loads(lines[0])["type"] == "header"
        assert json.loads(lines[1])["type"] == "step"

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(InvalidArgumentError, match="empty"):
            read_session_log(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"type":"header","version":1}\n{not json}\n')
        with pytest.raises(InvalidArgumentError, match="JSON Lines"):
            read_session_log(path)

    def test_validation_runs_on_read(self, tmp_path):
        header = make_header({}, "x", "y", 1, "offline")
        path = tmp_path / "bad_steps.jsonl"
        path.write_text(
            canonical_json(header) + "\n"
            + canonical_json(step_event(2)) + "\n"
            + canonical_json(step_event(1)) + "\n"
        )
        with pytest.raises(InvalidArgumentError, match="increase"):
            read_session_log(path)
