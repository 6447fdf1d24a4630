"""Shared fixtures: weight bundles, clip libraries, replays, coupled sessions.

The expensive assets (random bundle, encoded libraries, the hand-built
coupling world) are session-scoped; tests must treat them as read-only and
copy what they mutate.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from dancemix.engine import EngineConfig
from dancemix.library import build_library
from dancemix.neural import make_random_bundle, save_weight_bundle
from dancemix.pose import write_replay

from .coupling import CouplingWorld, build_world
from .synth import circular_motion_frames, noise_burst_clip, sine_clip, write_clips


@pytest.fixture(scope="session")
def random_bundle():
    return make_random_bundle(seed=0)


@pytest.fixture(scope="session")
def bundle_dir(tmp_path_factory, random_bundle) -> Path:
    root = tmp_path_factory.mktemp("bundle")
    save_weight_bundle(root / "weights.dmwb", random_bundle)
    return root


@pytest.fixture(scope="session")
def clip_dir(tmp_path_factory) -> Path:
    """Eight 3.5 s source clips: four steady sines, four gated noise bursts."""
    root = tmp_path_factory.mktemp("clips")
    clips = {f"sine_{int(f)}": sine_clip(f) for f in (196.0, 262.0, 330.0, 392.0)}
    clips |= {f"noise_{s}": noise_burst_clip(s) for s in (21, 22, 23, 24)}
    write_clips(root, clips)
    return root


@pytest.fixture(scope="session")
def std_library_dir(tmp_path_factory, clip_dir, random_bundle) -> Path:
    root = tmp_path_factory.mktemp("library")
    build_library(clip_dir, random_bundle, out_dir=root)
    return root


@pytest.fixture(scope="session")
def std_library(std_library_dir, random_bundle):
    from dancemix.library import load_library

    return load_library(std_library_dir, weights=random_bundle)


@pytest.fixture(scope="session")
def replay_70s(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("replay") / "replay_70s.jsonl"
    write_replay(path, circular_motion_frames(70.0))
    return path


@pytest.fixture(scope="session")
def std_config(std_library_dir, bundle_dir) -> EngineConfig:
    return EngineConfig(
        library=str(std_library_dir),
        weights=str(bundle_dir / "weights.dmwb"),
    )


@pytest.fixture(scope="session")
def coupling_world(tmp_path_factory) -> CouplingWorld:
    return build_world(tmp_path_factory.mktemp("coupling"))


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(1234))
