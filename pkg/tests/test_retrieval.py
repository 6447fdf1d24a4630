"""Cosine retrieval: hand cases, oracle agreement, policy behavior."""

from __future__ import annotations

import numpy as np
import pytest

from dancemix.errors import DegenerateVectorError, InvalidArgumentError, PolicyExhaustedError
from dancemix.library import ClipEntry, ClipLibrary
from dancemix.retrieval import RetrievalPolicy, cosine, retrieve, top_k

from .oracles import retrieve_reference


def pad128(v: np.ndarray) -> np.ndarray:
    """Zero-pad trailing dims to 128; cosines are unaffected."""
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    out = np.zeros((v.shape[0], 128))
    out[:, : v.shape[1]] = v
    return out


def make_library(latents: np.ndarray, ids: list[str] | None = None) -> ClipLibrary:
    """In-memory library; retrieval never touches the audio files."""
    latents = pad128(latents)
    n = latents.shape[0]
    ids = ids or [f"clip_{i:04d}" for i in range(n)]
    entries = [
        ClipEntry(id=cid, file=f"{cid}.wav", sha256="0" * 64, duration_s=3.5)
        for cid in ids
    ]
    return ClipLibrary(root=".", entries=entries, latents=latents.astype(np.float32),
                       weights_sha256="")


@pytest.fixture(scope="module")
def scan_library():
    rng = np.random.Generator(np.random.PCG64(99))
    return make_library(rng.standard_normal((200, 128)))


class TestCosine:
    def test_hand_cases(self):
        a = np.array([1.0, 0.0])
        assert cosine(a, a) == 1.0
        assert cosine(a, np.array([0.0, 1.0])) == 0.0
        assert cosine(a, -a) == -1.0
        # 3-4-5 style: cos = (3*5 + 4*0) / (5 * 5)
        assert abs(cosine(np.array([3.0, 4.0]), np.array([5.0, 0.0])) - 0.6) < 1e-15

    def test_zero_vector_rejected(self):
        with pytest.raises(DegenerateVectorError):
            cosine(np.zeros(4), np.ones(4))
        with pytest.raises(DegenerateVectorError):
            cosine(np.ones(4), np.zeros(4))

    def test_scale_invariance(self, rng):
        a = rng.standard_normal(128)
        b = rng.standard_normal(128)
        base = cosine(a, b)
        for alpha in (0.1, 1.0, 10.0):
            assert abs(cosine(alpha * a, b) - base) < 1e-12


class TestRetrieve:
    def test_matches_oracle_on_every_query(self, scan_library):
        rng = np.random.Generator(np.random.PCG64(7))
        queries = rng.standard_normal((1000, 128))
        ids = scan_library.ids()
        for q in queries:
            entry, score = retrieve(q, scan_library)
            ref_id, ref_score = retrieve_reference(q, ids, scan_library.latents)
            assert entry.id == ref_id
            assert abs(score - ref_score) < 1e-9

    def test_scale_invariant_choice(self, scan_library, rng):
        for _ in range(50):
            q = rng.standard_normal(128)
            picks = {retrieve(alpha * q, scan_library)[0].id for alpha in (0.1, 1.0, 10.0)}
            assert len(picks) == 1

    def test_exact_match_scores_one(self, scan_library):
        target = scan_library.latents[17].astype(np.float64)
        entry, score = retrieve(target, scan_library)
        assert entry.id == "clip_0017"
        assert score > 1.0 - 1e-7

    def test_ties_break_to_smallest_id(self):
        latents = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        lib = make_library(latents, ids=["b", "a", "z"])
        entry, score = retrieve(pad128([2.0, 0.0])[0], lib)
        assert entry.id == "a"
        assert score == 1.0

    def test_zero_query_rejected(self, scan_library):
        with pytest.raises(DegenerateVectorError):
            retrieve(np.zeros(128), scan_library)

    def test_zero_library_latent_rejected(self):
        latents = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(DegenerateVectorError):
            retrieve(pad128([1.0, 1.0])[0], make_library(latents))


class TestPolicy:
    def test_anti_repeat_excludes_recent_distinct_ids(self):
        latents = np.eye(3)
        lib = make_library(latents, ids=["a", "b", "c"])
        policy = RetrievalPolicy(anti_repeat_window=1)
        q = pad128([1.0, 0.01, 0.0])[0]
        assert retrieve(q, lib, policy, recent_ids=[])[0].id == "a"
        assert retrieve(q, lib, policy, recent_ids=["a"])[0].id == "b"
        assert retrieve(q, lib, policy, recent_ids=["b", "a"])[0].id == "b"

    def test_window_covers_distinct_ids_not_raw_history(self):
        latents = np.eye(3)
        lib = make_library(latents, ids=["a", "b", "c"])
        policy = RetrievalPolicy(anti_repeat_window=2)
        # "a" repeated many times still only occupies one slot of the window
        entry, _ = retrieve(pad128([1.0, 0.9, 0.0])[0], lib, policy,
                            recent_ids=["b"] + ["a"] * 5)
        assert entry.id == "c"

    def test_exhausted_policy_raises(self):
        lib = make_library(np.eye(2), ids=["a", "b"])
        policy = RetrievalPolicy(anti_repeat_window=2)
        with pytest.raises(PolicyExhaustedError):
            retrieve(pad128([1.0, 0.5])[0], lib, policy, recent_ids=["a", "b"])

    def test_negative_window_rejected(self):
        with pytest.raises(InvalidArgumentError):
            RetrievalPolicy(anti_repeat_window=-1)


class TestTopK:
    def test_sorted_by_score_then_id(self, scan_library, rng):
        q = rng.standard_normal(128)
        best = top_k(q, scan_library, 5)
        assert len(best) == 5
        scores = [s for _, s in best]
        assert scores == sorted(scores, reverse=True)
        assert best[0][0].id == retrieve(q, scan_library)[0].id
        assert abs(best[0][1] - retrieve(q, scan_library)[1]) < 1e-12

    def test_k_clamps_to_library_size(self):
        lib = make_library(np.eye(3))
        assert len(top_k(pad128([1.0, 1.0, 1.0])[0], lib, 10)) == 3

    def test_tie_order_is_lexicographic(self):
        latents = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
        lib = make_library(latents, ids=["m", "a", "z"])
        assert [e.id for e, _ in top_k(pad128([1.0, 0.0])[0], lib, 3)] == ["a", "m", "z"]
