"""CLI subcommands and exit codes, driven in-process through main()."""

from __future__ import annotations

import json
import shutil
import subprocess

import pytest

from dancemix.cli import (
    EXIT_BUNDLE,
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_ENGINE,
    EXIT_LIBRARY,
    EXIT_OK,
    EXIT_USAGE,
    main,
)
from dancemix.engine import EngineConfig, save_config
from dancemix.pose import write_replay

from .synth import circular_motion_frames


@pytest.fixture(scope="module")
def replay_15s(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli_replay") / "replay.jsonl"
    write_replay(path, circular_motion_frames(15.0))
    return path


@pytest.fixture(scope="module")
def cli_config(tmp_path_factory, std_library_dir, bundle_dir):
    path = tmp_path_factory.mktemp("cli_cfg") / "config.json"
    save_config(
        path,
        EngineConfig(
            library=str(std_library_dir), weights=str(bundle_dir / "weights.dmwb")
        ),
    )
    return path


class TestParsing:
    def test_no_command_is_usage_error(self):
        assert main([]) == EXIT_USAGE

    def test_unknown_command_is_usage_error(self):
        assert main(["transmogrify"]) == EXIT_USAGE

    def test_help_exits_zero(self):
        assert main(["--help"]) == EXIT_OK

    def test_console_script_is_installed(self):
        exe = shutil.which("dancemix")
        assert exe, "console script not on PATH"
        proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "build-db" in proc.stdout


class TestInspect:
    def test_needs_at_least_one_flag(self, capsys):
        assert main(["inspect"]) == EXIT_USAGE
        assert "inspect needs" in capsys.readouterr().err

    def test_gen_random_weights_is_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.dmwb", tmp_path / "b.dmwb"
        assert main(["inspect", "--gen-random-weights", str(a), "--seed", "5"]) == EXIT_OK
        assert main(["inspect", "--gen-random-weights", str(b), "--seed", "5"]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
        assert "sha256" in capsys.readouterr().out

    def test_weights_listing(self, bundle_dir, capsys):
        assert main(["inspect", "--weights", str(bundle_dir / "weights.dmwb")]) == EXIT_OK
        out = capsys.readouterr().out
        assert "movement_encoder" in out
        assert "generator/fc1/w" in out

    def test_missing_weights_file(self, tmp_path):
        assert main(["inspect", "--weights", str(tmp_path / "no.dmwb")]) == EXIT_USAGE

    def test_corrupt_weights_file(self, tmp_path):
        bad = tmp_path / "bad.dmwb"
        bad.write_bytes(b"XXXX" + b"\x00" * 64)
        assert main(["inspect", "--weights", str(bad)]) == EXIT_BUNDLE

    def test_library_listing(self, std_library_dir, capsys):
        assert main(["inspect", "--library", str(std_library_dir)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "8 clips" in out
        assert "sine_196" in out

    def test_pose_to_png(self, replay_15s, tmp_path, capsys):
        png = tmp_path / "window.png"
        assert main(["inspect", "--pose", str(replay_15s), "--png", str(png)]) == EXIT_OK
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        assert "window 0" in capsys.readouterr().out

    def test_pose_without_png_is_usage_error(self, replay_15s):
        assert main(["inspect", "--pose", str(replay_15s)]) == EXIT_USAGE

    def test_window_out_of_range(self, replay_15s, tmp_path):
        args = ["inspect", "--pose", str(replay_15s), "--png", str(tmp_path / "w.png")]
        assert main(args + ["--window", "99"]) == EXIT_USAGE


class TestBuildDb:
    def test_happy_path(self, clip_dir, bundle_dir, tmp_path, capsys):
        out = tmp_path / "lib"
        code = main(
            ["build-db", str(clip_dir), "--weights", str(bundle_dir / "weights.dmwb"),
             "--out", str(out)]
        )
        assert code == EXIT_OK
        assert "built library: 8 clips" in capsys.readouterr().out
        manifest = json.loads((out / "library.json").read_text())
        assert len(manifest["clips"]) == 8

    def test_empty_audio_dir(self, bundle_dir, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        code = main(
            ["build-db", str(empty), "--weights", str(bundle_dir / "weights.dmwb")]
        )
        assert code == EXIT_LIBRARY

    def test_bad_weights(self, clip_dir, tmp_path):
        bad = tmp_path / "bad.dmwb"
        bad.write_bytes(b"XXXX")
        assert main(["build-db", str(clip_dir), "--weights", str(bad)]) == EXIT_BUNDLE


class TestSimulate:
    def test_happy_path(self, replay_15s, cli_config, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(
            ["simulate", "--pose", str(replay_15s), "--config", str(cli_config),
             "--out", str(out)]
        )
        assert code == EXIT_OK
        assert (out / "session.log").is_file()
        assert (out / "render.wav").is_file()
        assert "rendered audio" in capsys.readouterr().out

    def test_missing_config_file(self, replay_15s, tmp_path):
        code = main(
            ["simulate", "--pose", str(replay_15s), "--config", str(tmp_path / "no.json"),
             "--out", str(tmp_path / "run")]
        )
        assert code == EXIT_CONFIG

    def test_short_replay(self, cli_config, tmp_path):
        replay = tmp_path / "short.jsonl"
        write_replay(replay, circular_motion_frames(1.0))
        code = main(
            ["simulate", "--pose", str(replay), "--config", str(cli_config),
             "--out", str(tmp_path / "run")]
        )
        assert code == EXIT_DATA

    def test_missing_library(self, replay_15s, bundle_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        save_config(
            cfg,
            EngineConfig(
                library=str(tmp_path / "nowhere"),
                weights=str(bundle_dir / "weights.dmwb"),
            ),
        )
        code = main(
            ["simulate", "--pose", str(replay_15s), "--config", str(cfg),
             "--out", str(tmp_path / "run")]
        )
        assert code == EXIT_LIBRARY


class TestAnalyze:
    def test_happy_path(self, coupling_world, tmp_path, capsys):
        out = tmp_path / "report"
        code = main(
            ["analyze", str(coupling_world.log_path),
             "--library", str(coupling_world.library_dir),
             "--audio", str(coupling_world.wav_path),
             "--out", str(out), "--trees", "20"]
        )
        assert code == EXIT_OK
        assert (out / "report.json").is_file()
        assert (out / "report.txt").is_file()
        assert (out / "correlations.csv").is_file()
        figures = list((out / "figures").glob("*.png"))
        assert figures, "no figures rendered"
        stdout = capsys.readouterr().out
        assert "json:" in stdout and "figures:" in stdout

    def test_no_figures_flag(self, coupling_world, tmp_path, capsys):
        out = tmp_path / "report"
        code = main(
            ["analyze", str(coupling_world.log_path),
             "--library", str(coupling_world.library_dir),
             "--audio", str(coupling_world.wav_path),
             "--out", str(out), "--trees", "10", "--no-figures"]
        )
        assert code == EXIT_OK
        assert not (out / "figures").exists()
        assert "figures:" not in capsys.readouterr().out

    def test_missing_log(self, coupling_world, tmp_path):
        code = main(
            ["analyze", str(tmp_path / "no.log"),
             "--library", str(coupling_world.library_dir),
             "--audio", str(coupling_world.wav_path),
             "--out", str(tmp_path / "report")]
        )
        assert code == EXIT_USAGE

    def test_log_from_different_library(self, coupling_world, std_library_dir, tmp_path):
        # the log schedules clips the named library has never heard of
        code = main(
            ["analyze", str(coupling_world.log_path),
             "--library", str(std_library_dir),
             "--audio", str(coupling_world.wav_path),
             "--out", str(tmp_path / "report")]
        )
        assert code == EXIT_ENGINE

    def test_missing_library_dir(self, coupling_world, tmp_path):
        code = main(
            ["analyze", str(coupling_world.log_path),
             "--library", str(tmp_path / "nolib"),
             "--audio", str(coupling_world.wav_path),
             "--out", str(tmp_path / "report")]
        )
        assert code == EXIT_LIBRARY
