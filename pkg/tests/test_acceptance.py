"""End-to-end acceptance checklist.

One test per release gate, each printing a single PASS or FAIL line (run
with -s to watch them stream). Every check here is also covered in finer
grain by the per-module suites; this file states the headline guarantees:

  * retrieval is exact against a brute-force oracle and scale-invariant
  * crossfades obey the equal-power identity
  * offline replays are byte-reproducible at the expected cadence
  * random weight bundles flow through every model at the right shapes
  * the weight container round-trips and rejects corruption distinctly
  * trajectory rasters are palette-pure, deterministic, and geometric
  * the statistics suite matches its oracles inside a minute
  * an engineered calm/lively session shows the energy-flux coupling
  * one engine step fits the real-time budget over a 1,000-clip library
  * all of the above runs with the engine package alone
"""

from __future__ import annotations

import functools
import sys
import time

import numpy as np

from dancemix.cli import main as cli_main
from dancemix.dsp import ENGINE_SAMPLE_RATE
from dancemix.engine import EngineConfig
from dancemix.engine.core import Engine, run_offline
from dancemix.engine.mixer import crossfade_gains, mix_output
from dancemix.engine.sessionlog import read_session_log
from dancemix.errors import (
    BadMagicError,
    ChecksumMismatchError,
    TruncatedBundleError,
)
from dancemix.library import ClipEntry, ClipLibrary
from dancemix.neural import (
    conv2d,
    dry_run,
    encode,
    generator_forward,
    load_weight_bundle,
    save_weight_bundle,
)
from dancemix.pose import collect_windows
from dancemix.raster import PALETTE, palette_colors, rasterize
from dancemix.retrieval import retrieve
from dancemix.analysis.session import analyze_session
from dancemix.analysis.stats import cca, pca, pearson, pls_regression
from dancemix.analysis.forest import rf_importance

from .oracles import conv2d_loops, equal_power_envelope, match_up_to_sign, pca_reference, retrieve_reference
from .synth import circular_motion_frames
from .test_retrieval import make_library
from .test_raster import _window_from_xy


def criterion(label: str):
    """Print one checklist line per gate, pass or fail."""

    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                print(f"[acceptance] FAIL {label}: {exc}", flush=True)
                raise
            suffix = f" ({detail})" if detail else ""
            print(f"[acceptance] PASS {label}{suffix}", flush=True)

        return wrapper

    return deco


@criterion("retrieval matches the brute-force oracle and is scale-invariant")
def test_retrieval_exactness():
    rng = np.random.Generator(np.random.PCG64(2024))
    library = make_library(rng.standard_normal((200, 128)))
    queries = rng.standard_normal((1000, 128))

    t0 = time.perf_counter()
    picks = [retrieve(q, library) for q in queries]
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"1000 retrievals took {elapsed:.3f} s"

    ids = library.ids()
    for q, (entry, score) in zip(queries, picks):
        ref_id, ref_score = retrieve_reference(q, ids, library.latents)
        assert entry.id == ref_id
        assert abs(score - ref_score) < 1e-9
    for q in queries[:200]:
        base = retrieve(q, library)[0].id
        for alpha in (0.1, 1.0, 10.0):
            assert retrieve(alpha * q, library)[0].id == base
    return f"1000 queries exact in {elapsed * 1000:.0f} ms"


@criterion("crossfade gains satisfy the equal-power identity")
def test_crossfade_identity():
    worst = max(
        abs(sum(g * g for g in crossfade_gains(float(t))) - 1.0)
        for t in np.linspace(0.0, 1.0, 10_000)
    )
    assert worst < 1e-6, f"identity violated by {worst:.2e}"

    n = 500
    fade_ms = n / ENGINE_SAMPLE_RATE * 1000.0
    g_out, g_in = equal_power_envelope(n)
    out = mix_output(np.ones(n), np.zeros(n), fade_ms)
    assert np.max(np.abs(out[:n] - g_out)) < 1e-6
    out = mix_output(np.zeros(n), np.ones(n), fade_ms)
    assert np.max(np.abs(out[:n] - g_in)) < 1e-6
    return f"max identity error {worst:.1e}"


@criterion("offline replays are byte-identical and hit the 3 s cadence")
def test_determinism(std_config, replay_70s, tmp_path):
    log_a, wav_a = run_offline(std_config, replay_70s, tmp_path / "a")
    log_b, wav_b = run_offline(std_config, replay_70s, tmp_path / "b")
    assert log_a.read_bytes() == log_b.read_bytes(), "session logs differ"
    assert wav_a.read_bytes() == wav_b.read_bytes(), "rendered audio differs"
    events = read_session_log(log_a).events
    assert len(events) == 23, f"expected 23 events, got {len(events)}"
    assert [e["t_ms"] for e in events] == [k * 3000.0 for k in range(23)]
    return "23 events, logs and renders byte-identical"


@criterion("random weight bundles flow through every model at spec shapes")
def test_shape_flow(tmp_path):
    bundle_path = tmp_path / "random.dmwb"
    assert cli_main(["inspect", "--gen-random-weights", str(bundle_path)]) == 0
    bundle = load_weight_bundle(bundle_path)

    shapes = dry_run(bundle)
    assert shapes == {
        "audio_encoder": (128, 128),
        "movement_encoder": (128, 128),
        "generator": (128,),
    }, f"dry run shapes {shapes}"
    mu, logvar = encode(np.zeros((224, 224, 1), dtype=np.float32), bundle, "audio_encoder")
    assert mu.shape == (128,) and logvar.shape == (128,)
    mu, _ = encode(np.zeros((256, 256, 3), dtype=np.float32), bundle, "movement_encoder")
    assert mu.shape == (128,)
    z = generator_forward(
        np.zeros(128, dtype=np.float32), np.zeros(128, dtype=np.float32), bundle
    )
    assert z.shape == (128,)

    rng = np.random.Generator(np.random.PCG64(77))
    for case in range(20):
        x = rng.standard_normal((8, 8, 2))
        kernel = rng.standard_normal((rng.integers(2, 5), rng.integers(2, 5), 2, rng.integers(1, 5)))
        stride = int(rng.integers(1, 3))
        padding = int(rng.integers(0, 2))
        got = conv2d(x, kernel, stride=stride, padding=padding)
        want = conv2d_loops(x, kernel, stride=stride, padding=padding)
        assert np.max(np.abs(got - want)) < 1e-5, f"conv case {case}"
    return "3 model flows + 20 conv oracle cases"


@criterion("weight container round-trips bytes and rejects corruption")
def test_weight_format(random_bundle, tmp_path):
    first = tmp_path / "first.dmwb"
    second = tmp_path / "second.dmwb"
    save_weight_bundle(first, random_bundle)
    save_weight_bundle(second, load_weight_bundle(first))
    assert first.read_bytes() == second.read_bytes(), "save-load-save changed bytes"

    blob = first.read_bytes()
    caught = []
    for mutated, expected in (
        (b"XMWB" + blob[4:], BadMagicError),
        (blob[: len(blob) // 2], TruncatedBundleError),
        (blob[:-10] + bytes([blob[-10] ^ 0x01]) + blob[-9:], ChecksumMismatchError),
    ):
        bad = tmp_path / "bad.dmwb"
        bad.write_bytes(mutated)
        try:
            load_weight_bundle(bad)
        except expected as exc:
            caught.append(type(exc))
        else:
            raise AssertionError(f"{expected.__name__} not raised")
    assert len(set(caught)) == 3, "corruption errors are not distinct"
    return "byte identity + 3 distinct corruption errors"


@criterion("trajectory rasters are palette-pure, deterministic, geometric")
def test_raster_properties():
    window = _window_from_xy([(-0.8, -0.5), (0.6, 0.2), (0.0, 0.9)], landmark=2)
    image = rasterize(window)
    colors = {tuple(px) for px in image.reshape(-1, 3)}
    assert colors <= palette_colors() | {(0, 0, 0)}, f"stray colors {colors}"

    again = rasterize(window)
    assert np.array_equal(image, again), "rasterization is not deterministic"

    sweep = rasterize(_window_from_xy([(-1.0, 0.0), (1.0, 0.0)], landmark=0))
    red_rows, red_cols = np.where(np.all(sweep == PALETTE[0], axis=-1))
    assert red_rows.size > 0
    assert set(red_rows) <= {127, 128, 129}, f"red rows {sorted(set(red_rows))}"
    assert red_cols.min() == 0 and red_cols.max() == 255
    return "palette pure, byte-stable, sweep rows 127-129"


@criterion("statistics suite matches its oracles inside the time budget")
def test_statistics_suite():
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(31))

    x = np.arange(10.0)
    r, p = pearson(x, 2.0 * x + 1.0)
    assert abs(r - 1.0) < 1e-12 and p == 0.0
    r, _ = pearson(x, -x)
    assert abs(r + 1.0) < 1e-12
    r, _ = pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
    assert abs(r - 0.8) < 1e-12

    for _ in range(10):
        X = rng.standard_normal((5, 3))
        result = pca(X, k=2)
        ref_comp, ref_ratio = pca_reference(X, k=2, standardize=True)
        for i in range(2):
            assert match_up_to_sign(result.components[i], ref_comp[i], atol=1e-8)
        np.testing.assert_allclose(result.explained_variance_ratio, ref_ratio, atol=1e-8)

    X = rng.standard_normal((40, 4))
    np.testing.assert_allclose(cca(X, X).correlations, 1.0, atol=1e-6)
    shared = rng.standard_normal(150)
    A = np.column_stack([shared + 0.1 * rng.standard_normal(150) for _ in range(3)])
    B = np.column_stack([shared + 0.1 * rng.standard_normal(150) for _ in range(3)])
    assert cca(A, B, k=1).correlations[0] > 0.9

    X = rng.standard_normal((30, 4))
    Y = X @ rng.standard_normal((4, 2))
    np.testing.assert_allclose(
        pls_regression(X, Y, n_components=4, folds=0).r2, 1.0, atol=1e-9
    )

    wins = 0
    for seed in range(100):
        trial_rng = np.random.Generator(np.random.PCG64(seed))
        F = trial_rng.standard_normal((60, 6))
        target = 3.0 * F[:, 0] + 0.1 * trial_rng.standard_normal(60)
        wins += int(np.argmax(rf_importance(F, target, n_trees=25, seed=seed).importances) == 0)
    assert wins >= 95, f"planted feature won {wins}/100"

    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"suite took {elapsed:.1f} s"
    return f"all oracles matched, rf {wins}/100, {elapsed:.1f} s"


@criterion("calm/lively session shows positive energy-flux coupling")
def test_coupling_fixture(coupling_world):
    session = read_session_log(coupling_world.log_path)
    report = analyze_session(session, coupling_world.wav_path, rf_trees=60, seed=0)
    cell = next(
        c for c in report.correlations
        if c["energy_stat"] == "mean_energy" and c["feature"] == "spectral_flux"
    )
    assert cell["r"] is not None and cell["r"] > 0.0, f"r={cell['r']}"
    assert cell["p"] < 0.01, f"p={cell['p']}"
    return f"r={cell['r']:.3f}, p={cell['p']:.2e}"


@criterion("one engine step fits the budget over a 1,000-clip library")
def test_latency_budget(random_bundle):
    rng = np.random.Generator(np.random.PCG64(404))
    entries = [
        ClipEntry(id=f"clip_{i:04d}", file=f"clip_{i:04d}.wav", sha256="0" * 64, duration_s=3.5)
        for i in range(1000)
    ]
    library = ClipLibrary(
        root=".",
        entries=entries,
        latents=rng.standard_normal((1000, 128)).astype(np.float32),
        weights_sha256="",
    )
    engine = Engine(EngineConfig(), library, random_bundle)
    windows = collect_windows(circular_motion_frames(10.0), duration_s=3.5, hop_s=3.0, fps=30.0)

    engine.step(windows[0], t_ms=0.0)  # warm caches before measuring
    event = engine.step(windows[1], t_ms=3000.0, measure_latency=True)
    assert event["latency_ms"] < 250.0, f"step took {event['latency_ms']:.1f} ms"
    return f"step latency {event['latency_ms']:.1f} ms"


@criterion("suite ran against the engine package alone")
def test_runs_without_secondary_components():
    outsiders = [
        name for name in sys.modules
        if name == "trainer" or name.startswith("trainer.")
        or name == "frontend" or name.startswith("frontend.")
    ]
    assert not outsiders, f"secondary modules loaded: {outsiders}"
    return "no secondary packages imported"
