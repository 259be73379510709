import numpy as np
import pytest

from diar.models.core import DiarizerConfig, EmbeddingError, TimedEmbedding
from diar.services.diarizer import (
    DECREASE_MARGIN,
    Decision,
    OnlineDiarizer,
    Phase,
    diarize_stream,
    online_step_times,
)
from diar.services.scoring import der
from diar.services.windows import segments_from_labels
from tests.helpers import timed_stream, unit

E1, E2, E3, E4 = np.eye(4)
# Outlier at cosine distance 0.6 from E1 and 1.0 from E2, E3
OUTLIER = np.array([0.4, 0.0, 0.0, np.sqrt(0.84)])


def random_stream(rng, n, dim=8):
    return timed_stream([unit(rng.standard_normal(dim)) for _ in range(n)])


class TestStackingPhase:
    def test_stacking_returns_nothing(self, small_config):
        """Pushes before N_init only stack the embedding"""
        diarizer = OnlineDiarizer(small_config)
        for te in timed_stream([E1, E2, E3]):
            assert diarizer.push(te) == []
        assert diarizer.phase is Phase.STACKING
        assert len(diarizer.stash) == 3

    def test_transition_releases_all(self, small_config):
        """The N_init-th push returns labels for every stashed window"""
        diarizer = OnlineDiarizer(small_config)
        stream = timed_stream([E1, E2, E1, E2])
        out = []
        for te in stream:
            out = diarizer.push(te)
        assert len(out) == 4
        assert [(seg.start, seg.end) for seg in out] == [(te.start, te.end) for te in stream]
        assert [seg.label for seg in out] == [0, 1, 0, 1]
        assert diarizer.phase is Phase.ONLINE
        assert diarizer.stash == []

    def test_online_push_returns_one(self, small_config):
        """Every online push returns exactly one segment with the window times"""
        diarizer = OnlineDiarizer(small_config)
        stream = timed_stream([E1, E2, E1, E2, E1, E2])
        for te in stream[:4]:
            diarizer.push(te)
        for te in stream[4:]:
            out = diarizer.push(te)
            assert len(out) == 1
            assert (out[0].start, out[0].end) == (te.start, te.end)

    def test_finalize_flushes_partial_stash(self, small_config):
        """A stream shorter than N_init is still labeled at the end"""
        diarizer = OnlineDiarizer(small_config)
        for te in timed_stream([E1, E1]):
            diarizer.push(te)
        out = diarizer.finalize()
        assert [seg.label for seg in out] == [0, 0]
        assert diarizer.finalize() == []

    def test_finalize_noop_when_empty(self, small_config):
        """Nothing to flush on an empty session"""
        assert OnlineDiarizer(small_config).finalize() == []


class TestPushValidation:
    def test_out_of_order_rejected_session_usable(self, small_config):
        """An earlier start is rejected and the session keeps working"""
        diarizer = OnlineDiarizer(small_config)
        diarizer.push(TimedEmbedding(embedding=E1, start=1.0, end=2.5))
        with pytest.raises(ValueError):
            diarizer.push(TimedEmbedding(embedding=E2, start=0.5, end=2.0))
        assert diarizer.n_seen == 1
        diarizer.push(TimedEmbedding(embedding=E2, start=1.5, end=3.0))
        assert diarizer.n_seen == 2

    def test_dimension_mismatch_rejected(self, small_config):
        """A vector of the wrong dimension is rejected without side effects"""
        diarizer = OnlineDiarizer(small_config)
        with pytest.raises(EmbeddingError):
            diarizer.push(TimedEmbedding(embedding=np.ones(3), start=0.0, end=1.5))
        assert diarizer.n_seen == 0 and diarizer.stash == []

    def test_input_is_normalized(self, small_config):
        """Stored embeddings have unit norm"""
        diarizer = OnlineDiarizer(small_config)
        diarizer.push(TimedEmbedding(embedding=E1 * 5.0, start=0.0, end=1.5))
        assert np.linalg.norm(diarizer.stash[0].embedding) == pytest.approx(1.0)


class TestInitialClustering:
    def test_identical_stash_gives_one_speaker(self):
        """A stash of one repeated vector gives k=1 and one centroid"""
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=6, n_ckpt=8, dim=4))
        out = []
        for te in timed_stream([E1] * 6):
            out = diarizer.push(te)
        assert {seg.label for seg in out} == {0}
        assert diarizer.current_k == 1
        assert diarizer.centroids.live_count == 1
        assert diarizer.centroids.centroids[0].usage == 6

    def test_two_groups(self, rng):
        """Two tight groups give k=2 with centroids near the group means"""
        group_a = [unit(E1 + 0.01 * rng.standard_normal(4)) for _ in range(5)]
        group_b = [unit(E2 + 0.01 * rng.standard_normal(4)) for _ in range(5)]
        vectors = [v for pair in zip(group_a, group_b) for v in pair]
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=10, n_ckpt=12, dim=4))
        for te in timed_stream(vectors):
            diarizer.push(te)
        assert diarizer.current_k == 2
        labels, centroids = diarizer.centroids.vectors()
        assert labels == [0, 1]
        np.testing.assert_allclose(centroids[0], unit(np.mean(group_a, axis=0)), atol=1e-9)
        np.testing.assert_allclose(centroids[1], unit(np.mean(group_b, axis=0)), atol=1e-9)
        assert len(diarizer.checkpoint) == 10
        assert diarizer.checkpoint.total_weight == 10

    def test_antipodal_stash_keeps_finite_centroid(self):
        """Opposite stash vectors in one cluster fall back to the first member, later pushes stay finite"""
        e1, e2 = np.eye(2)
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=2, n_ckpt=4, dim=2))
        for te in timed_stream([e1, -e1, e2, e2, e1, e2]):
            diarizer.push(te)
        for centroid in diarizer.centroids.centroids.values():
            assert np.linalg.norm(centroid.mean) > 0.0
        _, vectors = diarizer.centroids.vectors()
        assert np.all(np.isfinite(vectors))
        assert len(diarizer.emitted) == 6

    def test_initial_count_capped(self):
        """Six orthogonal directions still give at most five initial speakers"""
        vectors = [np.eye(6)[i % 6] for i in range(12)]
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=12, n_ckpt=12, dim=6))
        for te in timed_stream(vectors):
            diarizer.push(te)
        assert diarizer.current_k <= 5


class TestDecideK:
    def _online_session(self):
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=6, n_ckpt=8, dim=4))
        for te in timed_stream([E1, E2, E1, E2, E1, E2]):
            diarizer.push(te)
        assert diarizer.current_k == 2
        return diarizer

    def test_candidates_clipped_at_one(self):
        """With k=1 only k=1 and k=2 are evaluated"""
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=4, n_ckpt=6, dim=4))
        for te in timed_stream([E1] * 4):
            diarizer.push(te)
        decision = diarizer.decide_k(E1)
        assert sorted(decision.scores) == [1, 2]

    def test_new_region_increases_k(self):
        """An embedding from an unseen direction chooses k+1"""
        decision = self._online_session().decide_k(E3)
        assert decision.chosen_k == 3
        assert sorted(decision.scores) == [1, 2, 3]

    def test_known_speaker_keeps_k(self):
        """An embedding of a known speaker keeps k"""
        decision = self._online_session().decide_k(E1)
        assert decision.chosen_k == 2

    def test_decide_does_not_mutate(self):
        """decide_k only evaluates; the buffers are untouched"""
        diarizer = self._online_session()
        before = diarizer.checkpoint.snapshot()
        diarizer.decide_k(E3)
        np.testing.assert_array_equal(diarizer.checkpoint.snapshot(), before)
        assert diarizer.current_k == 2


class TestOnlineStep:
    def test_new_speaker_gets_fresh_label(self):
        """An unseen speaker gets the next label and a new centroid"""
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=6, n_ckpt=8, dim=4))
        for te in timed_stream([E1, E2, E1, E2, E1, E2]):
            diarizer.push(te)
        segment = diarizer.push(TimedEmbedding(embedding=E3, start=3.0, end=4.5))[0]
        assert segment.label == 2
        assert diarizer.current_k == 3
        assert diarizer.centroids.live_count == 3

    def test_known_speaker_keeps_label(self):
        """A known speaker is mapped to its label and the centroid usage grows"""
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=6, n_ckpt=8, dim=4))
        for te in timed_stream([E1, E2, E1, E2, E1, E2]):
            diarizer.push(te)
        segment = diarizer.push(TimedEmbedding(embedding=E2, start=3.0, end=4.5))[0]
        assert segment.label == 1
        assert diarizer.centroids.centroids[1].usage == 4

    def test_outlier_then_decrease(self):
        """An outlier adds a speaker, the following in-cluster stream takes it back"""
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=4, n_ckpt=4, dim=4))
        stream = timed_stream([E1, E2, E3, E1, OUTLIER] + [E1] * 6)
        for te in stream:
            diarizer.push(te)

        moves = [d.chosen_k - d.previous_k for d in diarizer.decisions]
        assert moves[0] == 1
        assert -1 in moves[1:]
        assert moves.index(1) < moves.index(-1)
        assert diarizer.centroids.live_count == 3
        assert diarizer.current_k == 3
        # The outlier's label stays in the emitted history
        assert diarizer.emitted[4].label == 3
        assert diarizer.centroids.resolve(3) == 0

    def _three_speaker_session(self):
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=6, n_ckpt=8, dim=4))
        for te in timed_stream([E1, E2, E3, E1, E2, E3]):
            diarizer.push(te)
        assert diarizer.current_k == 3
        return diarizer

    def test_small_decrease_gain_keeps_k(self, mocker):
        """A k-1 win below DECREASE_MARGIN maps to an existing speaker without merging"""
        diarizer = self._three_speaker_session()
        scores = {2: 0.55, 3: 0.50, 4: 0.10}
        assert scores[2] - scores[3] < DECREASE_MARGIN
        mocker.patch.object(diarizer, "decide_k", return_value=Decision(previous_k=3, chosen_k=2, scores=scores))
        segment = diarizer.push(TimedEmbedding(embedding=E1, start=3.0, end=4.5))[0]
        assert segment.label == 0
        assert diarizer.current_k == 3
        assert diarizer.centroids.live_count == 3
        assert diarizer.centroids.alias_map == {}

    def test_large_decrease_gain_merges(self, mocker):
        """A k-1 win of at least DECREASE_MARGIN merges the closest centroids"""
        diarizer = self._three_speaker_session()
        scores = {2: 0.65, 3: 0.50, 4: 0.10}
        assert scores[2] - scores[3] >= DECREASE_MARGIN
        mocker.patch.object(diarizer, "decide_k", return_value=Decision(previous_k=3, chosen_k=2, scores=scores))
        diarizer.push(TimedEmbedding(embedding=E1, start=3.0, end=4.5))
        assert diarizer.current_k == 2
        assert diarizer.centroids.live_count == 2
        assert len(diarizer.centroids.alias_map) == 1

    def test_map_label_prefers_most_used(self):
        """Two centroids within 0.25: the more used one's label is returned"""
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=4, n_ckpt=4, dim=4))
        close = unit([1.0, 0.2, 0.0, 0.0])
        diarizer.centroids.new_centroid(E1, usage=50, weight=50)
        diarizer.centroids.new_centroid(close, usage=3, weight=3)
        assert diarizer.map_label(close) == 0

    def test_map_label_separated_centroids(self):
        """Centroids further apart than 0.25 keep their own labels"""
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=4, n_ckpt=4, dim=4))
        diarizer.centroids.new_centroid(E1, usage=50, weight=50)
        diarizer.centroids.new_centroid(E2, usage=3, weight=3)
        assert diarizer.map_label(E2) == 1

    def test_map_label_single_and_empty(self):
        """One centroid returns its label; none is an error"""
        diarizer = OnlineDiarizer(DiarizerConfig(n_init=4, n_ckpt=4, dim=4))
        with pytest.raises(ValueError):
            diarizer.map_label(E1)
        diarizer.centroids.new_centroid(E2)
        assert diarizer.map_label(E1) == 0


class TestSessionProperties:
    def test_random_stream_invariants(self, rng):
        """Capacity, mass conservation, usage bookkeeping and bounded k changes"""
        config = DiarizerConfig(n_init=10, n_ckpt=20, dim=8)
        diarizer = OnlineDiarizer(config)
        for te in random_stream(rng, 10 * config.n_ckpt):
            diarizer.push(te)
            assert len(diarizer.checkpoint) <= config.n_ckpt
            if diarizer.phase is Phase.ONLINE:
                assert diarizer.checkpoint.total_weight == diarizer.n_seen
                assert diarizer.centroids.total_usage == len(diarizer.emitted)
                assert diarizer.current_k >= 1
                assert diarizer.centroids.live_count == diarizer.current_k
        assert len(diarizer.emitted) == diarizer.n_seen
        assert all(abs(d.chosen_k - d.previous_k) <= 1 for d in diarizer.decisions)
        emitted_labels = {seg.label for seg in diarizer.emitted}
        assert emitted_labels == set(range(len(emitted_labels)))
        assert len(emitted_labels) == diarizer.centroids._next_label

    def test_prefix_replay(self, rng):
        """A replayed prefix emits exactly the same labels"""
        config = DiarizerConfig(n_init=10, n_ckpt=20, dim=8)
        stream = random_stream(rng, 200)
        full = diarize_stream(stream, config).emitted
        for cut in (10, 57, 130):
            prefix = OnlineDiarizer(config)
            for te in stream[:cut]:
                prefix.push(te)
            assert prefix.emitted == full[: len(prefix.emitted)]

    def test_emitted_segments_never_change(self, rng):
        """Segments returned earlier are not modified by later steps"""
        config = DiarizerConfig(n_init=10, n_ckpt=20, dim=8)
        diarizer = OnlineDiarizer(config)
        snapshots = []
        for te in random_stream(rng, 80):
            snapshots.extend(diarizer.push(te))
        assert snapshots == diarizer.emitted

    def test_step_times_recorded(self, small_config):
        """One timing per push; online timings skip the stacking phase"""
        diarizer = diarize_stream(timed_stream([E1, E2, E1, E2, E1, E2]), small_config)
        assert len(diarizer.step_times) == 6
        assert len(online_step_times(diarizer)) == 2
        assert all(t >= 0 for t in diarizer.step_times)


class TestSyntheticSessions:
    @pytest.mark.parametrize("n_speakers,seed", [(2, 3), (3, 11)])
    def test_speakers_recovered(self, synthetic_stream, n_speakers, seed):
        """Sequentially appearing synthetic speakers get one label each"""
        dim, stream, reference = synthetic_stream(n_speakers, 120.0, seed, turn_mean=3.0)
        diarizer = diarize_stream(stream, DiarizerConfig(dim=dim))
        assert len({seg.label for seg in diarizer.emitted}) == n_speakers
        hypothesis = segments_from_labels(diarizer.emitted, uri=reference.uri)
        assert der(reference, hypothesis).der <= 0.05

    @pytest.mark.slow
    def test_default_ten_minute_session(self, synthetic_stream):
        """K=3, 600 s, seed 42 with default settings: three labels, no merges, DER <= 5%"""
        dim, stream, reference = synthetic_stream(3, 600.0, 42)
        diarizer = diarize_stream(stream, DiarizerConfig(dim=dim))
        assert {seg.label for seg in diarizer.emitted} == {0, 1, 2}
        assert diarizer.centroids.live_count == 3
        assert diarizer.centroids.alias_map == {}
        hypothesis = segments_from_labels(diarizer.emitted, uri=reference.uri)
        assert der(reference, hypothesis).der <= 0.05
