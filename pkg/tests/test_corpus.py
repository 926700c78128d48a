import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socioinfo.corpus import (
    FeatureMatrix,
    apply_scaler,
    extract_features,
    find_duplicates,
    fit_scaler,
    format_number,
    load_manifest,
    read_feature_matrix,
    split_indices,
    train_test_split,
    write_feature_matrix,
    write_manifest,
)
from socioinfo.errors import DataError, EnvironmentFault
from socioinfo.measures import FEATURE_NAMES


def _manifest(tmp_path, rows, header="id,label,score,path"):
    p = tmp_path / "manifest.csv"
    p.write_text(header + "\n" + "".join(r + "\n" for r in rows), encoding="utf-8")
    return p


def test_manifest_large_scale(tmp_path):
    rows = [f"a{i},{1 if i < 671 else 0},,n/a{i}.edges" for i in range(2133)]
    recs = load_manifest(_manifest(tmp_path, rows))
    assert len(recs) == 2133
    share = sum(r.label for r in recs) / len(recs)
    assert round(100 * share, 1) == 31.5
    assert recs[0].path == tmp_path / "n" / "a0.edges"
    assert recs[0].score is None


def test_manifest_empty_data(tmp_path):
    assert load_manifest(_manifest(tmp_path, [])) == []


@pytest.mark.parametrize(
    "row, msg",
    [
        ("x,2,,p", "row 3"),
        ("x,1,1.5,p", "outside"),
        ("x,1,nan,p", "outside"),
        ("x,one,,p", "not an integer"),
        ("x,1,abc,p", "not a number"),
        ("a,1,,p", "duplicate id"),
        ("x,1,p", "expected 4 fields"),
    ],
)
def test_manifest_errors(tmp_path, row, msg):
    with pytest.raises(DataError, match=msg):
        load_manifest(_manifest(tmp_path, ["a,0,0.1,p", row]))


def test_manifest_bad_header(tmp_path):
    with pytest.raises(DataError):
        load_manifest(_manifest(tmp_path, ["a,0,,p"], header="id,label,path"))


def test_manifest_missing_file(tmp_path):
    with pytest.raises(EnvironmentFault):
        load_manifest(tmp_path / "nope.csv")


def test_manifest_round_trip(small_corpus, tmp_path):
    recs = load_manifest(small_corpus)
    out = tmp_path / "copy.csv"
    write_manifest(out, recs)
    again = load_manifest(out)
    assert [(r.id, r.label, r.score, r.path.resolve()) for r in again] == [
        (r.id, r.label, r.score, r.path.resolve()) for r in recs
    ]


def test_format_number():
    assert format_number(3.0) == "3"
    assert format_number(0.1) == "0.1"
    assert float(format_number(1 / 3)) == 1 / 3


def test_split_sizes_and_determinism():
    tr, te = split_indices(100, 0.8, 4)
    assert (len(tr), len(te)) == (80, 20)
    tr2, te2 = split_indices(100, 0.8, 4)
    assert np.array_equal(tr, tr2) and np.array_equal(te, te2)
    with pytest.raises(DataError):
        split_indices(1, 0.8, 0)
    with pytest.raises(ValueError):
        split_indices(10, 1.0, 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 500), st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_split_partition(n, ratio, seed):
    tr, te = split_indices(n, ratio, seed)
    assert len(np.intersect1d(tr, te)) == 0
    assert np.array_equal(np.union1d(tr, te), np.arange(n))
    assert len(tr) == min(max(round(ratio * n), 1), n - 1)


def test_stratified_split_keeps_shares():
    labels = np.r_[np.ones(30), np.zeros(70)].astype(int)
    tr, te = split_indices(100, 0.8, 1, labels, stratified=True)
    assert labels[tr].sum() == 24 and labels[te].sum() == 6


def test_split_shares_may_differ(small_matrix):
    train, test = train_test_split(small_matrix, 0.8, 7)
    assert len(train) + len(test) == len(small_matrix)
    assert set(train.ids).isdisjoint(test.ids)


def _fm(values, columns=("a", "b")):
    n = len(values)
    return FeatureMatrix([f"r{i}" for i in range(n)], columns, values, [0] * n, [np.nan] * n)


def test_scaler_examples():
    m = _fm([[1, 5], [2, 5], [3, 5]])
    s = fit_scaler(m)
    out = apply_scaler(s, m).values
    assert out[:, 0].tolist() == [-1.0, 0.0, 1.0]
    assert out[:, 1].tolist() == [0.0, 0.0, 0.0]
    test = apply_scaler(s, _fm([[10, 1], [11, 2]]))
    assert test.values[:, 0].mean() != 0


def test_scaler_column_mismatch():
    s = fit_scaler(_fm([[1, 2], [3, 4]]))
    with pytest.raises(ValueError):
        apply_scaler(s, _fm([[1, 2]], columns=("a", "c")))


def test_scaler_round_trip_dict():
    s = fit_scaler(_fm([[1, 2], [3, 7], [4, 4]]))
    t = type(s).from_dict(s.to_dict())
    assert t.columns == s.columns and np.array_equal(t.mean, s.mean) and np.array_equal(t.sd, s.sd)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_scaled_train_moments(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 60))
    vals = rng.normal(rng.normal(0, 100, 4), rng.uniform(0.01, 50, 4), size=(n, 4))
    vals[:, 3] = 2.5
    m = _fm(vals, columns=("a", "b", "c", "d"))
    out = apply_scaler(fit_scaler(m), m).values
    assert np.all(np.abs(out[:, :3].mean(axis=0)) <= 1e-9)
    assert np.all(np.abs(out[:, :3].std(axis=0, ddof=1) - 1) <= 1e-9)
    assert np.all(out[:, 3] == 0)


def test_scores_and_labels_not_scaled(small_matrix):
    scaled = apply_scaler(fit_scaler(small_matrix), small_matrix)
    assert np.array_equal(scaled.labels, small_matrix.labels)
    assert np.array_equal(scaled.scores, small_matrix.scores, equal_nan=True)


def test_duplicates_examples():
    assert find_duplicates(_fm([[1, 2], [3, 4]])) == []
    groups = find_duplicates(_fm([[1, 2], [3, 4], [1, 2], [0.0, 0], [-0.0, 0], [0, 0]]))
    assert sorted(map(sorted, groups)) == [["r0", "r2"], ["r3", "r4", "r5"]]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=30))
def test_duplicates_partition(rows):
    m = _fm([list(r) for r in rows])
    groups = find_duplicates(m)
    seen = [rid for g in groups for rid in g]
    assert len(seen) == len(set(seen))
    index = {rid: i for i, rid in enumerate(m.ids)}
    for g in groups:
        first = m.values[index[g[0]]]
        assert all(np.array_equal(m.values[index[r]], first) for r in g)
    singles = set(m.ids) - set(seen)
    for r in singles:
        same = [o for o in m.ids if np.array_equal(m.values[index[o]], m.values[index[r]])]
        assert same == [r]


def test_ego_only_networks_are_duplicates(tmp_path):
    # an ego-only network cannot be written as an edge list; build the matrix directly
    from socioinfo.graph import DirectedGraph, EgoNetwork
    from socioinfo.measures import feature_vector

    fv = [list(feature_vector(EgoNetwork(DirectedGraph([f"e{i}"]), f"e{i}")).values()) for i in range(3)]
    m = FeatureMatrix(["a", "b", "c"], FEATURE_NAMES, fv, [1, 1, 0], [np.nan] * 3)
    assert find_duplicates(m) == [["a", "b", "c"]]


def test_feature_matrix_round_trip(small_matrix, tmp_path):
    p = tmp_path / "features.csv"
    write_feature_matrix(p, small_matrix)
    back = read_feature_matrix(p)
    assert back.ids == small_matrix.ids and back.columns == FEATURE_NAMES
    assert np.array_equal(back.values, small_matrix.values)
    assert np.array_equal(back.scores, small_matrix.scores, equal_nan=True)
    write_feature_matrix(tmp_path / "again.csv", back)
    assert (tmp_path / "again.csv").read_bytes() == p.read_bytes()


def test_feature_matrix_missing_score(tmp_path):
    m = FeatureMatrix(["a", "b"], ("x",), [[1.0], [2.0]], [0, 1], [np.nan, 0.5])
    p = tmp_path / "f.csv"
    write_feature_matrix(p, m)
    assert p.read_text().splitlines()[1] == "a,0,,1"
    assert np.isnan(read_feature_matrix(p).scores[0])


def test_extract_missing_network(tmp_path):
    p = _manifest(tmp_path, ["a,0,,missing.edges"])
    with pytest.raises(EnvironmentFault):
        extract_features(load_manifest(p))


def test_feature_matrix_validation():
    with pytest.raises(DataError):
        FeatureMatrix(["a"], ("x", "x"), [[1, 2]], [0], [np.nan])
