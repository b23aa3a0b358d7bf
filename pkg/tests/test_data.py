import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flipscope.data import (DatasetError, Feature, Item, SparseDataset, TRAIN, TEST,
                            load_dataset, parse_dense_csv, parse_sparse_text,
                            save_dataset, split_dataset)

SAMPLE = """#features 4
#f 0 aspirin
#f 1 ibuprofen
#f 2 saline
#f 3 zinc
1 0:1 3:1
0 2:1
"""


def test_parse_sample():
    d = parse_sparse_text(SAMPLE)
    assert d.n_features == 4
    assert len(d.items) == 2
    assert d.items[0].active == (0, 3)
    assert d.items[0].label is True
    assert d.items[1].active == (2,)
    assert d.items[1].label is False


def test_empty_active_line_is_legal():
    d = parse_sparse_text("#features 2\n#f 0 a\n#f 1 b\n0\n")
    assert d.items[0].active == ()
    assert d.items[0].label is False


def test_round_trip_canonical():
    d = parse_sparse_text(SAMPLE)
    assert d.to_text() == SAMPLE
    assert parse_sparse_text(d.to_text()).to_text() == SAMPLE


def test_load_save_file(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text(SAMPLE, encoding="utf-8")
    d = load_dataset(p)
    out = tmp_path / "copy.txt"
    save_dataset(d, out)
    assert out.read_text(encoding="utf-8") == SAMPLE
    assert load_dataset(out).content_hash() == d.content_hash()


@pytest.mark.parametrize("text, msg", [
    ("#features x\n", "line 1"),
    ("nope\n", "line 1"),
    ("#features 1\n#f 1 a\n", "line 2"),
    ("#features 1\n#f 0 a\n2 0:1\n", "line 3"),
    ("#features 1\n#f 0 a\n1 0:2\n", "line 3"),
    ("#features 2\n#f 0 a\n#f 1 b\n1 5:1\n", "line 4"),
    ("#features 2\n#f 0 a\n#f 1 b\n1 1:1 0:1\n", "line 4"),
])
def test_malformed_lines_report_position(text, msg):
    with pytest.raises(DatasetError, match=msg):
        parse_sparse_text(text)


def test_duplicate_feature_names_rejected():
    with pytest.raises(DatasetError, match="unique"):
        parse_sparse_text("#features 2\n#f 0 a\n#f 1 a \n0\n")


def test_duplicate_item_id_rejected():
    feats = (Feature(0, "a"),)
    items = (Item(0, (), False), Item(0, (0,), True))
    with pytest.raises(DatasetError, match="duplicate item id"):
        SparseDataset(features=feats, items=items, split=(TRAIN, TRAIN))


def test_csv_import():
    d = parse_dense_csv("label,a,b,c\n1,1,0,1\n0,0,0,0\n")
    assert d.feature_names == ("a", "b", "c")
    assert d.items[0].active == (0, 2)
    assert d.items[1].active == ()


def test_csv_rejects_non_binary_cells():
    with pytest.raises(DatasetError, match="line 2"):
        parse_dense_csv("label,a\n2,0\n")
    with pytest.raises(DatasetError, match="line 3"):
        parse_dense_csv("label,a\n1,1\n0,0.5\n")


def test_split_small():
    d = parse_sparse_text("#features 1\n#f 0 a\n" + "0\n" * 10)
    s = split_dataset(d, 0.2, seed=7)
    assert len(s.train_items) == 2
    assert len(s.test_items) == 8
    s2 = split_dataset(d, 0.2, seed=7)
    assert s.split == s2.split
    assert split_dataset(d, 0.2, seed=8).split != s.split


def test_split_rejects_bad_fraction():
    d = parse_sparse_text("#features 1\n#f 0 a\n0\n")
    for f in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DatasetError):
            split_dataset(d, f, seed=0)


def test_case_study_shape():
    # 5980 items at 28% positive, split 0.2 -> 1196 train / 4784 test
    from flipscope.synth import planted_corpus

    corpus = planted_corpus(n_items=5980, n_features=60, seed=1)
    d = corpus.dataset
    assert len(d.items) == 5980
    assert abs(d.positive_rate() - 0.28) < 1e-3
    s = split_dataset(d, 0.2, seed=1)
    assert len(s.train_items) == 1196
    assert len(s.test_items) == 4784


items_strategy = st.lists(
    st.tuples(st.lists(st.integers(0, 7), max_size=8), st.booleans()),
    max_size=20,
)


@given(rows=items_strategy)
@settings(max_examples=50, deadline=None)
def test_round_trip_property(rows):
    feats = tuple(Feature(index=i, name=f"n{i}") for i in range(8))
    items = tuple(Item(id=i, active=tuple(sorted(set(act))), label=lab)
                  for i, (act, lab) in enumerate(rows))
    d = SparseDataset(features=feats, items=items, split=(TRAIN,) * len(items))
    again = parse_sparse_text(d.to_text())
    assert again.to_text() == d.to_text()
    assert [it.active for it in again.items] == [it.active for it in d.items]
    assert [it.label for it in again.items] == [it.label for it in d.items]


def test_split_partitions_and_keeps_everything():
    from flipscope.synth import planted_corpus

    d = planted_corpus(n_items=137, n_features=30, seed=2).dataset
    s = split_dataset(d, 0.33, seed=5)
    assert len(s.train_items) + len(s.test_items) == len(d.items)
    assert {t for t in s.split} <= {TRAIN, TEST}
    # loading never drops items or features
    assert len(s.items) == len(d.items)
    assert s.features == d.features
