import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sentinel.attribution import FeatureScore, FeatureSet, fuse, top_k

from helpers import TABLE1_FEATURES

# Test-sample-1 name sets: disjoint top-5 lists from each method.
TS1_SHAP = ["Header_Length", "DNS", "syn_flag_number", "Rate", "ece_flag_number"]
TS1_LIME = ["Protocol Type", "Number", "ICMP", "Weight", "fin_count"]


def ts1_shap_scores():
    """Per-feature scores shaped so |score| ranking yields exactly TS1_SHAP."""
    scores = np.zeros(len(TABLE1_FEATURES))
    for rank, name in enumerate(TS1_SHAP):
        sign = -1.0 if rank % 2 else 1.0  # ranking uses |score|, sign must not matter
        scores[TABLE1_FEATURES.index(name)] = sign * (0.9 - 0.1 * rank)
    rest = [i for i, n in enumerate(TABLE1_FEATURES) if n not in TS1_SHAP]
    for j, i in enumerate(rest):
        scores[i] = 0.01 + 0.001 * j
    return scores


def ts1_lime_scores():
    scores = np.zeros(len(TABLE1_FEATURES))
    for rank, name in enumerate(TS1_LIME):
        scores[TABLE1_FEATURES.index(name)] = 0.8 - 0.1 * rank
    return scores


def test_top_k_reproduces_ts1_shap_set():
    fs = top_k(ts1_shap_scores(), TABLE1_FEATURES, k=5, origin="SHAP")
    assert list(fs.names) == TS1_SHAP
    assert fs.origin == "SHAP"
    assert [abs(e.score) for e in fs.entries] == sorted(
        [abs(e.score) for e in fs.entries], reverse=True
    )


def test_top_k_total_tie_breaks_by_index():
    fs = top_k([0.0] * 8, [f"f{i}" for i in range(8)], k=5)
    assert list(fs.names) == ["f0", "f1", "f2", "f3", "f4"]


def test_top_k_k_exceeding_d_returns_all():
    fs = top_k([0.5, -0.2, 0.1], ["a", "b", "c"], k=5)
    assert list(fs.names) == ["a", "b", "c"]  # |-0.2| outranks 0.1


def test_top_k_rejects_bad_args():
    with pytest.raises(ValueError):
        top_k([1.0], ["a"], k=0)
    with pytest.raises(ValueError):
        top_k([1.0, 2.0], ["a"], k=1)


def test_top_k_membership_invariant_under_input_permutation():
    rng = np.random.default_rng(0)
    scores = rng.normal(size=10)
    names = [f"f{i}" for i in range(10)]
    base = top_k(scores, names, k=4)
    perm = rng.permutation(10)
    shuffled = top_k(scores[perm], [names[i] for i in perm], k=4)
    assert set(base.names) == set(shuffled.names)


def make_set(names, origin="SHAP", start=1.0):
    return FeatureSet(
        entries=tuple(
            FeatureScore(n, start - 0.05 * i, (origin,)) for i, n in enumerate(names)
        ),
        origin=origin,
    )


def test_fuse_ts1_disjoint_sets_union_of_ten():
    fused = fuse(make_set(TS1_SHAP, "SHAP"), make_set(TS1_LIME, "LIME"))
    assert list(fused.names) == TS1_SHAP + TS1_LIME
    assert len(fused.names) == 10
    assert len(set(fused.names)) == 10
    assert fused.origin == "FUSED"


def test_fuse_idempotent():
    f = make_set(["a", "b", "c"], "SHAP")
    fused = fuse(f, make_set(["a", "b", "c"], "LIME"))
    assert list(fused.names) == ["a", "b", "c"]
    assert all(e.sources == ("SHAP", "LIME") for e in fused.entries)


def test_fuse_overlap_by_hand():
    # {A,B,C,D,E} u {C,A,F,G,H} -> A,B,C,D,E then F,G,H
    fused = fuse(make_set(list("ABCDE"), "SHAP"), make_set(list("CAFGH"), "LIME"))
    assert list(fused.names) == list("ABCDEFGH")
    by_name = {e.name: e.sources for e in fused.entries}
    assert by_name["A"] == ("SHAP", "LIME")
    assert by_name["B"] == ("SHAP",)
    assert by_name["F"] == ("LIME",)


def test_fuse_keeps_nominating_scores():
    shap = make_set(["a", "b"], "SHAP", start=0.9)
    lime = make_set(["b", "c"], "LIME", start=0.4)
    fused = fuse(shap, lime)
    scores = {e.name: e.score for e in fused.entries}
    assert scores["a"] == pytest.approx(0.9)
    assert scores["b"] == pytest.approx(0.85)  # SHAP nomination wins the slot
    assert scores["c"] == pytest.approx(0.35)


@settings(max_examples=200, deadline=None)
@given(
    shap_names=st.lists(st.sampled_from(TABLE1_FEATURES), min_size=1, max_size=5, unique=True),
    lime_names=st.lists(st.sampled_from(TABLE1_FEATURES), min_size=1, max_size=5, unique=True),
)
def test_fusion_laws(shap_names, lime_names):
    f_shap = make_set(shap_names, "SHAP")
    f_lime = make_set(lime_names, "LIME")
    fused = fuse(f_shap, f_lime)
    # cardinality and exact-once membership
    assert len(fused.entries) <= len(shap_names) + len(lime_names)
    assert sorted(fused.names) == sorted(set(shap_names) | set(lime_names))
    # SHAP-first ordering, then LIME remainder in LIME order
    expected = list(shap_names) + [n for n in lime_names if n not in shap_names]
    assert list(fused.names) == expected
    # idempotence
    assert list(fuse(f_shap, f_shap).names) == list(shap_names)
