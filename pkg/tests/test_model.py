from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smarthome_qa.errors import DatasetError
from smarthome_qa.model import (
    JSONL_FIELDS,
    Dataset,
    Provenance,
    QAPair,
    Version,
    dataset_stats,
    load_dataset,
    load_splits,
    save_dataset,
    save_splits,
    split_dataset,
)
from smarthome_qa.rng import SplitMix64, shuffled

from conftest import make_dataset, make_pair


class TestRng:
    def test_sequence_is_deterministic(self):
        a = SplitMix64(7)
        b = SplitMix64(7)
        assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]

    def test_values_are_64_bit(self):
        rng = SplitMix64(0)
        for _ in range(1000):
            assert 0 <= rng.next_u64() < 1 << 64

    def test_next_below_bounds(self):
        rng = SplitMix64(3)
        assert all(0 <= rng.next_below(10) < 10 for _ in range(1000))
        with pytest.raises(ValueError):
            rng.next_below(0)

    def test_next_float_half_open(self):
        rng = SplitMix64(9)
        assert all(0.0 <= rng.next_float() < 1.0 for _ in range(1000))

    def test_shuffle_is_a_permutation(self):
        items = list(range(50))
        out = shuffled(items, 5)
        assert sorted(out) == items and out != items
        assert shuffled(items, 5) == out


class TestQAPairValidation:
    def test_unknown_source(self):
        with pytest.raises(DatasetError, match="unknown source"):
            make_pair(source="myspace").validate()

    def test_custom_source_allowed(self):
        QAPair(
            id="custom-00001",
            source="custom",
            question="q?",
            answer="a",
            version=Version.V1,
        ).validate()

    def test_empty_question(self):
        with pytest.raises(DatasetError, match="question is empty"):
            make_pair(question="   ").validate()

    def test_empty_answer_rejected_for_original_versions(self):
        with pytest.raises(DatasetError, match="answer is empty"):
            make_pair(answer=" ").validate()

    def test_empty_answer_allowed_for_synthetic(self):
        make_pair(version=Version.SYNTHETIC, answer="").validate()

    def test_v1_must_not_have_parent(self):
        pair = QAPair(
            id="snb-00001", source="snb", question="q?", answer="a",
            version=Version.V1, parent_id="snb-00000",
        )
        with pytest.raises(DatasetError, match="must not have a parent_id"):
            pair.validate()

    def test_derived_versions_need_parent(self):
        pair = QAPair(
            id="snb-00001-v2", source="snb", question="q?", answer="a", version=Version.V2
        )
        with pytest.raises(DatasetError, match="must have a parent_id"):
            pair.validate()

    def test_provenance_must_match_version(self):
        pair = QAPair(
            id="snb-00001-syn", source="snb", question="q?", answer="a",
            version=Version.SYNTHETIC, parent_id="snb-00001", provenance=Provenance.ORIGINAL,
        )
        with pytest.raises(DatasetError, match="provenance"):
            pair.validate()


class TestDataset:
    def test_version_mismatch_rejected(self):
        with pytest.raises(DatasetError, match="dataset is"):
            Dataset(version=Version.V2, pairs=(make_pair(1),))

    def test_duplicate_ids_rejected(self):
        pair = make_pair(1)
        with pytest.raises(DatasetError, match="duplicate pair id"):
            Dataset(version=Version.V1, pairs=(pair, pair))

    def test_lineage_suffix_scheme(self):
        assert make_pair(3, version=Version.V3).parent_id == "smartthings-00003-v2"
        assert make_pair(3, version=Version.SYNTHETIC).parent_id == "smartthings-00003-v3"


class TestSaveLoad:
    def test_round_trip(self, tmp_path):
        dataset = make_dataset(5, context="some context")
        path = tmp_path / "d.jsonl"
        save_dataset(dataset, path)
        loaded = load_dataset(path)
        assert loaded == dataset  # created_at/notes excluded from equality

    def test_empty_dataset_writes_zero_lines(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        save_dataset(Dataset(version=Version.V1, pairs=()), path)
        assert path.read_text() == ""
        assert load_dataset(path).pairs == ()

    def test_field_order_matches_contract(self, tmp_path):
        path = tmp_path / "d.jsonl"
        save_dataset(make_dataset(1), path)
        line = path.read_text().splitlines()[0]
        keys = list(json.loads(line).keys())
        assert tuple(keys) == JSONL_FIELDS

    def test_duplicate_id_reports_line(self, tmp_path):
        path = tmp_path / "dup.jsonl"
        row = json.dumps(make_pair(1).to_json_dict())
        path.write_text(row + "\n" + row + "\n")
        with pytest.raises(DatasetError, match=r":2: duplicate id"):
            load_dataset(path)

    def test_malformed_line_reports_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(make_pair(1).to_json_dict()) + "\n{not json\n")
        with pytest.raises(DatasetError, match=r":2: malformed line"):
            load_dataset(path)

    def test_version_mismatch_on_load(self, tmp_path):
        path = tmp_path / "d.jsonl"
        save_dataset(make_dataset(1), path)
        with pytest.raises(DatasetError, match="does not match expected"):
            load_dataset(path, expected_version=Version.V3)

    def test_invalid_pair_rejected_on_load(self, tmp_path):
        obj = make_pair(1).to_json_dict()
        obj["answer"] = " "
        path = tmp_path / "d.jsonl"
        path.write_text(json.dumps(obj) + "\n")
        with pytest.raises(DatasetError, match="answer is empty"):
            load_dataset(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="no such dataset"):
            load_dataset(tmp_path / "nope.jsonl")


class TestSplitDataset:
    def test_counts_and_disjointness(self):
        dataset = make_dataset(10)
        splits = split_dataset(dataset, (5, 3, 2), seed=0)
        assert (len(splits.train_ids), len(splits.val_ids), len(splits.test_ids)) == (5, 3, 2)
        all_ids = set(splits.train_ids) | set(splits.val_ids) | set(splits.test_ids)
        assert len(all_ids) == 10
        assert all_ids <= {p.id for p in dataset.pairs}

    def test_counts_exceeding_size(self):
        with pytest.raises(DatasetError, match="sum to 4"):
            split_dataset(make_dataset(3), (4, 0, 0), seed=0)

    def test_negative_counts(self):
        with pytest.raises(DatasetError, match="non-negative"):
            split_dataset(make_dataset(3), (-1, 1, 1), seed=0)

    def test_deterministic(self):
        dataset = make_dataset(20)
        assert split_dataset(dataset, (10, 5, 5), seed=7) == split_dataset(
            dataset, (10, 5, 5), seed=7
        )

    def test_partial_split_leaves_remainder_unassigned(self):
        splits = split_dataset(make_dataset(10), (4, 2, 1), seed=1)
        assigned = set(splits.train_ids) | set(splits.val_ids) | set(splits.test_ids)
        assert len(assigned) == 7

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32), perm_seed=st.integers(0, 1000))
    def test_pair_order_does_not_matter(self, seed, perm_seed):
        pairs = tuple(make_pair(i + 1) for i in range(12))
        d1 = Dataset(version=Version.V1, pairs=pairs)
        d2 = Dataset(version=Version.V1, pairs=tuple(shuffled(pairs, perm_seed)))
        s1 = split_dataset(d1, (6, 3, 2), seed)
        s2 = split_dataset(d2, (6, 3, 2), seed)
        assert s1.train_ids == s2.train_ids
        assert s1.val_ids == s2.val_ids
        assert s1.test_ids == s2.test_ids

    def test_splits_file_round_trip(self, tmp_path):
        splits = split_dataset(make_dataset(10), (5, 3, 2), seed=3)
        path = tmp_path / "splits.json"
        save_splits(splits, path)
        assert load_splits(path) == splits
        obj = json.loads(path.read_text())
        assert set(obj) == {"seed", "source_version", "train_ids", "val_ids", "test_ids"}


class TestDatasetStats:
    def test_single_pair(self):
        dataset = Dataset(
            version=Version.V1,
            pairs=(make_pair(1, question="one two three four five", answer="a b c d e f g h i j"),),
        )
        stats = dataset_stats(dataset)
        assert stats.avg_question_len_words == 5.0
        assert stats.avg_answer_len_words == 10.0
        assert stats.total_pairs == 1

    def test_totals_consistent(self):
        dataset = Dataset(
            version=Version.V1,
            pairs=tuple(make_pair(i + 1, source=s) for i, s in enumerate(
                ["snb", "snb", "reddit", "ezlo", "ezlo", "ezlo"]
            )),
        )
        stats = dataset_stats(dataset)
        assert stats.total_pairs == len(dataset.pairs)
        assert stats.total_pairs == sum(stats.per_source_counts.values())
        assert stats.per_source_counts == {"snb": 2, "reddit": 1, "ezlo": 3}

    def test_empty_dataset_rejected(self):
        with pytest.raises(DatasetError, match="empty dataset"):
            dataset_stats(Dataset(version=Version.V1, pairs=()))
