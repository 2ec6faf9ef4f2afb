import json

import pytest

from eventsmith.corpus import (
    CorpusFormatError,
    ValidationError,
    extract_event_sequence,
    load_corpus,
    write_corpus,
)
from eventsmith.synth import random_corpus


def _write_lines(path, lines):
    path.write_text("\n".join(json.dumps(line) for line in lines) + "\n")


def _doc_record(document_id="d1", cluster_sentence=0):
    return {
        "document_id": document_id,
        "sentences": [
            {
                "tokens": ["the", "dog", "barked"],
                "noun_phrases": [
                    {"text": "the dog", "span": [0, 2], "role": "SUBJECT", "cluster_id": "c0"}
                ],
                "events": [{"subject": "the dog", "predicate": "barked", "object": ""}],
            }
        ],
        "clusters": [
            {"cluster_id": "c0", "mentions": [{"sentence": cluster_sentence, "span": [0, 2]}]}
        ],
    }


class TestLoad:
    def test_three_valid_records(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        _write_lines(path, [_doc_record(f"d{i}") for i in range(3)])
        assert len(load_corpus(path)) == 3

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert load_corpus(path) == []

    def test_cluster_outside_document_strict(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        _write_lines(path, [_doc_record(cluster_sentence=7)])
        with pytest.raises(ValidationError):
            load_corpus(path, strict=True)

    def test_cluster_outside_document_lenient_skips(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        _write_lines(path, [_doc_record("good"), _doc_record("bad", cluster_sentence=7)])
        docs = load_corpus(path)
        assert [d.document_id for d in docs] == ["good"]

    def test_malformed_json_strict(self, tmp_path):
        path = tmp_path / "broken.jsonl"
        path.write_text("{not json\n")
        with pytest.raises(CorpusFormatError):
            load_corpus(path, strict=True)

    def test_np_span_outside_tokens(self, tmp_path):
        record = _doc_record()
        record["sentences"][0]["noun_phrases"][0]["span"] = [0, 9]
        path = tmp_path / "bad.jsonl"
        _write_lines(path, [record])
        with pytest.raises(ValidationError):
            load_corpus(path, strict=True)

    def test_cluster_mention_must_match_annotated_np(self, tmp_path):
        record = _doc_record()
        record["clusters"][0]["mentions"][0]["span"] = [1, 3]
        path = tmp_path / "bad.jsonl"
        _write_lines(path, [record])
        with pytest.raises(ValidationError):
            load_corpus(path, strict=True)


class TestRoundTrip:
    def test_write_then_load_is_identity(self, tmp_path):
        documents = random_corpus(20, seed=7)
        path = tmp_path / "round.jsonl"
        write_corpus(documents, path)
        assert load_corpus(path, strict=True) == documents


class TestEventSequence:
    def test_sentence_order_then_emission_order(self, mini_doc):
        seq = extract_event_sequence(mini_doc)
        assert [e.predicate for e in seq] == ["stole", "fled", "arrested"]

    def test_no_events(self, tmp_path):
        record = _doc_record()
        record["sentences"][0]["events"] = []
        record["clusters"] = []
        path = tmp_path / "c.jsonl"
        _write_lines(path, [record])
        doc = load_corpus(path, strict=True)[0]
        assert extract_event_sequence(doc) == []

    def test_matches_sort_oracle_on_random_documents(self):
        # Oracle: stable sort by (sentence_index, within-sentence position).
        for doc in random_corpus(50, seed=13):
            keyed = []
            for sentence_position, sentence in enumerate(doc.sentences):
                for emit_position, event in enumerate(sentence.events):
                    keyed.append(((sentence_position, emit_position), event))
            expected = [event for _, event in sorted(keyed, key=lambda pair: pair[0])]
            assert extract_event_sequence(doc) == expected

    def test_pure_function(self, mini_doc):
        assert extract_event_sequence(mini_doc) == extract_event_sequence(mini_doc)
