import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convsent import audio, diarize, features, synth
from convsent.alignment import DistanceMetric, dtw_distance
from convsent.audio import Chunk, ChunkSpan
from convsent.diarize import DistanceMatrix, Speaker, discriminate_speakers, evaluate_speaker_accuracy
from convsent.errors import LengthMismatch, TooFewChunks

S1, S2 = Speaker.SPEAKER_1, Speaker.SPEAKER_2


def _chunk(x, cid):
    return Chunk(cid, ChunkSpan(0, len(x)), np.asarray(x, float), 16000)


def _random_matrix(rng, n):
    pts = rng.normal(size=(n, 3))
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    return DistanceMatrix(d, list(range(n)))


def brute_force_partition(values):
    """Cheapest exact 2-medoid partition by enumerating medoid pairs."""
    n = len(values)
    costs = {
        (a, b): math.fsum(min(values[i][a], values[i][b]) for i in range(n))
        for a, b in itertools.combinations(range(n), 2)
    }
    lowest = min(costs.values())
    a, b = min(k for k, c in costs.items() if c <= lowest + 1e-9 * max(1.0, lowest))
    groups = [b if (i == b or values[i][b] < values[i][a]) and i != a else a for i in range(n)]
    return [g == groups[0] for g in groups]


matrices = st.integers(2, 9).flatmap(lambda n: st.lists(
    st.floats(0.01, 10), min_size=n * n, max_size=n * n).map(lambda v: (n, v)))


def _sym(n, flat):
    v = np.array(flat).reshape(n, n)
    v = (v + v.T) / 2
    np.fill_diagonal(v, 0)
    return DistanceMatrix(v, list(range(n)))


@pytest.fixture(scope="module")
def tone_feats():
    xs = [synth.tone(300, 0.4, 0.4), synth.tone(2000, 0.5, 0.4), synth.tone(300, 0.6, 0.3)]
    return [features.compute_mfcc(_chunk(x, i)) for i, x in enumerate(xs)]


class TestDistanceMatrix:
    def test_identical_chunks(self):
        x = synth.tone(500, 0.3)
        f = [features.compute_mfcc(_chunk(x, 0)), features.compute_mfcc(_chunk(x, 1))]
        m = diarize.pairwise_distance_matrix(f)
        np.testing.assert_array_equal(m.values, np.zeros((2, 2)))

    def test_entries_are_normalised_dtw(self, tone_feats):
        for metric in DistanceMetric:
            m = diarize.pairwise_distance_matrix(tone_feats, metric)
            for i, j in itertools.combinations(range(3), 2):
                expected = dtw_distance(tone_feats[i], tone_feats[j], metric).normalized_distance
                assert m.values[i, j] == expected == m.values[j, i]
            assert m.chunk_ids == [0, 1, 2]

    def test_tone_matched_pair_is_closest(self, tone_feats):
        m = diarize.pairwise_distance_matrix(tone_feats).values
        assert m[0, 2] < m[0, 1] and m[0, 2] < m[1, 2]

    def test_too_few(self, tone_feats):
        with pytest.raises(TooFewChunks):
            diarize.pairwise_distance_matrix(tone_feats[:1])

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            DistanceMatrix(np.array([[0, 1.0], [2.0, 0]]), [0, 1])


class TestDiscriminate:
    def test_block_matrix(self):
        v = np.full((4, 4), 1.0)
        v[0, 2] = v[2, 0] = v[1, 3] = v[3, 1] = 0.1
        np.fill_diagonal(v, 0)
        lab = discriminate_speakers(DistanceMatrix(v, [0, 1, 2, 3]))
        assert lab.labels == [S1, S2, S1, S2]
        assert lab.medoid_ids == (0, 1)
        assert lab.cost == pytest.approx(0.2)

    @pytest.mark.parametrize("d", [0.0, 0.3, 5.0])
    def test_two_chunks(self, d):
        lab = discriminate_speakers(DistanceMatrix(np.array([[0, d], [d, 0]]), [7, 9]))
        assert lab.labels == [S1, S2]
        assert lab.medoid_ids == (7, 9)

    def test_all_zero_keeps_both_labels(self):
        lab = discriminate_speakers(DistanceMatrix(np.zeros((5, 5)), list(range(5))))
        assert lab.labels == [S1, S2, S1, S1, S1]

    def test_first_chunk_is_speaker1_after_permutation(self):
        v = np.full((4, 4), 1.0)
        v[0, 2] = v[2, 0] = v[1, 3] = v[3, 1] = 0.1
        np.fill_diagonal(v, 0)
        perm = [1, 0, 2, 3]
        lab = discriminate_speakers(DistanceMatrix(v[np.ix_(perm, perm)], [0, 1, 2, 3]))
        assert lab.labels == [S1, S2, S2, S1]

    @given(matrices)
    @settings(max_examples=150, deadline=None)
    def test_matches_brute_force(self, nv):
        m = _sym(*nv)
        lab = discriminate_speakers(m)
        expected = brute_force_partition(m.values.tolist())
        assert [x is S1 for x in lab.labels] == expected
        assert lab.labels[0] is S1
        assert S2 in lab.labels

    @given(matrices, st.sampled_from([0.5, 2.0, 8.0, 1 / 1024]))
    @settings(max_examples=100, deadline=None)
    def test_scale_invariant(self, nv, k):
        m = _sym(*nv)
        scaled = DistanceMatrix(m.values * k, m.chunk_ids)
        assert discriminate_speakers(m).labels == discriminate_speakers(scaled).labels

    def test_scale_invariant_generic_factor(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            m = _random_matrix(rng, 8)
            k = rng.uniform(0.1, 10)
            assert discriminate_speakers(m).labels == discriminate_speakers(
                DistanceMatrix(m.values * k, m.chunk_ids)).labels

    def test_deterministic(self):
        m = _random_matrix(np.random.default_rng(9), 10)
        assert discriminate_speakers(m) == discriminate_speakers(m)

    @given(st.lists(st.booleans(), min_size=2, max_size=12).filter(lambda g: len(set(g)) == 2),
           st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_two_block_structure_is_recovered(self, groups, seed):
        rng = np.random.default_rng(seed)
        n = len(groups)
        v = np.zeros((n, n))
        for i, j in itertools.combinations(range(n), 2):
            same = groups[i] == groups[j]
            v[i, j] = v[j, i] = rng.uniform(0.1, 1.0) if same else rng.uniform(2.0, 3.0)
        lab = discriminate_speakers(DistanceMatrix(v, list(range(n))))
        assert evaluate_speaker_accuracy(lab, groups) == 100.0


class TestAccuracy:
    def test_identity(self):
        assert evaluate_speaker_accuracy([S1, S2, S1], [S1, S2, S1]) == 100.0

    def test_swapped(self):
        assert evaluate_speaker_accuracy([S1, S2, S2], ["B", "A", "A"]) == 100.0

    def test_three_of_four(self):
        assert evaluate_speaker_accuracy([S1, S2, S1, S2], [S1, S2, S1, S1]) == 75.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            evaluate_speaker_accuracy([S1], [S1, S2])

    @given(st.lists(st.sampled_from([S1, S2]), min_size=1, max_size=20), st.data())
    def test_permutation_invariant(self, pred, data):
        ref = data.draw(st.lists(st.sampled_from(["x", "y"]), min_size=len(pred), max_size=len(pred)))
        swapped = [p.other() for p in pred]
        a = evaluate_speaker_accuracy(pred, ref)
        assert a == evaluate_speaker_accuracy(swapped, ref)
        assert 50.0 <= a <= 100.0


class TestSweep:
    def test_shape_and_bounds(self, eight_turns):
        chunks = audio.extract_chunks(eight_turns.signal, eight_turns.spans)
        pts = diarize.feature_count_sweep(chunks, eight_turns.speakers)
        assert [p.n_features for p in pts] == list(range(1, 27))
        assert all(0 <= p.accuracy_percent <= 100 for p in pts)
        acc = {p.n_features: p.accuracy_percent for p in pts}
        assert acc[13] == 100.0
        assert max(acc[n] for n in (12, 13, 14)) >= max(acc[n] for n in (1, 2, 3))
        csv = diarize.sweep_to_csv(pts).splitlines()
        assert csv[0] == "n_features,accuracy" and len(csv) == 27

    def test_identical_pool_is_flat(self):
        x = synth.voiced_segment(synth.SPEAKER_A, 0.4, np.random.default_rng(0))
        chunks = [_chunk(x, i) for i in range(6)]
        pts = diarize.feature_count_sweep(chunks, ["A", "B"] * 3, DistanceMetric.CANBERRA)
        assert len({p.accuracy_percent for p in pts}) == 1

    def test_length_mismatch(self, eight_turns):
        chunks = audio.extract_chunks(eight_turns.signal, eight_turns.spans)
        with pytest.raises(LengthMismatch):
            diarize.feature_count_sweep(chunks, ["A"])
