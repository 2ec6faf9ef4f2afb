import random

from eventsmith.corpus import extract_event_sequence
from eventsmith.events import QuestionKind, Role, agent_question, theme_question
from eventsmith.mining import (
    AnswerScope,
    PipelineConfig,
    assign_role,
    build_instances,
    corpus_stats,
    detect_noun_phrases,
    find_answer,
    generate_questions,
    instance_to_record,
    read_instances,
    write_instances,
)
from eventsmith.synth import random_annotated_document, random_corpus

from oracle import enumerate_instances


class TestDetectNounPhrases:
    def test_keeps_only_phrases_present_in_event(self, mini_doc):
        event = mini_doc.sentences[0].events[0]
        found = detect_noun_phrases(event, mini_doc.sentences[0])
        assert [np.text for np in found] == ["the thief", "a rifle"]

    def test_substring_at_word_boundary(self, mini_doc):
        # "he" must not be detected inside "the scene"; it matches as the
        # subject token of its own event.
        event = mini_doc.sentences[1].events[0]
        found = detect_noun_phrases(event, mini_doc.sentences[1])
        assert [np.text for np in found] == ["he", "the scene"]

    def test_no_noun_phrases(self, fallback_doc):
        sentence = fallback_doc.sentences[0]
        event = sentence.events[0]
        # strip the annotations: a sentence with zero noun phrases
        bare = type(sentence)(
            tokens=sentence.tokens, noun_phrases=(), events=sentence.events, dependency_roles={}
        )
        assert detect_noun_phrases(event, bare) == []


class TestAssignRole:
    def test_subject_is_agent(self, mini_doc):
        sentence = mini_doc.sentences[0]
        assert assign_role(sentence.noun_phrases[0], sentence) is Role.AGENT

    def test_object_is_theme(self, mini_doc):
        sentence = mini_doc.sentences[2]
        assert assign_role(sentence.noun_phrases[1], sentence) is Role.THEME

    def test_other_is_unassigned(self):
        doc = random_annotated_document(random.Random(3), "d", max_events=6)
        unassigned = [
            assign_role(np, sentence)
            for sentence in doc.sentences
            for np in sentence.noun_phrases
            if sentence.dependency_roles[np.token_span].value == "OTHER"
        ]
        assert all(role is None for role in unassigned)


class TestGenerateQuestions:
    def test_two_questions_agent_first(self, mini_doc):
        np = mini_doc.sentences[0].noun_phrases[0]
        questions = generate_questions(np)
        assert [q.kind for q in questions] == [QuestionKind.AGENT, QuestionKind.THEME]
        assert questions[0].surface == "what else did the thief do?"
        assert questions[1].surface == "what else happened to the thief?"


class TestFindAnswer:
    def test_agent_question_finds_coreferent_subject(self, mini_doc):
        seq = extract_event_sequence(mini_doc)
        thief = mini_doc.sentences[0].noun_phrases[0]
        hit = find_answer(seq, 0, agent_question(thief), mini_doc)
        assert hit is not None and hit[0] == 1 and hit[1].predicate == "fled"

    def test_theme_question_skips_agent_mentions(self, mini_doc):
        seq = extract_event_sequence(mini_doc)
        thief = mini_doc.sentences[0].noun_phrases[0]
        hit = find_answer(seq, 0, theme_question(thief), mini_doc)
        assert hit is not None and hit[0] == 2 and hit[1].predicate == "arrested"

    def test_entity_that_never_recurs(self, mini_doc):
        seq = extract_event_sequence(mini_doc)
        rifle = mini_doc.sentences[0].noun_phrases[1]
        assert find_answer(seq, 0, agent_question(rifle), mini_doc) is None


class TestBuildInstances:
    def test_mini_corpus_golden(self, mini_doc):
        instances = build_instances(mini_doc)
        assert [
            (i.question.kind.value, i.question.entity.text, len(i.context), i.answer.predicate)
            for i in instances
        ] == [
            ("agent", "the thief", 1, "fled"),
            ("theme", "the thief", 1, "arrested"),
            ("theme", "he", 2, "arrested"),
        ]

    def test_single_event_document_yields_nothing(self, mini_doc):
        single = type(mini_doc)(
            document_id="one",
            sentences=mini_doc.sentences[:1],
            clusters=(),
        )
        assert build_instances(single) == []

    def test_disjoint_entities_fall_back_to_generic(self, fallback_doc):
        instances = build_instances(fallback_doc)
        assert len(instances) == 1
        only = instances[0]
        assert only.question.kind is QuestionKind.GENERIC
        assert only.answer.event_index == 1

    def test_fallback_can_be_disabled(self, fallback_doc):
        assert build_instances(fallback_doc, PipelineConfig(emit_fallback=False)) == []

    def test_matches_bruteforce_oracle_first_match(self):
        for doc in random_corpus(40, seed=21):
            assert build_instances(doc) == enumerate_instances(doc)

    def test_matches_bruteforce_oracle_all_matches(self):
        cfg = PipelineConfig(answer_scope=AnswerScope.ALL_MATCHES)
        for doc in random_corpus(40, seed=22):
            assert build_instances(doc, cfg) == enumerate_instances(doc, all_matches=True)

    def test_min_context_len_skips_short_prefixes(self):
        cfg = PipelineConfig(min_context_len=3)
        for doc in random_corpus(20, seed=23):
            assert build_instances(doc, cfg) == enumerate_instances(doc, min_context_len=3)

    def test_deterministic_serialization(self, mini_doc):
        first = [instance_to_record(i) for i in build_instances(mini_doc)]
        second = [instance_to_record(i) for i in build_instances(mini_doc)]
        assert first == second

    def test_no_instance_for_last_event(self):
        for doc in random_corpus(30, seed=24):
            n = sum(len(s.events) for s in doc.sentences)
            for instance in build_instances(doc):
                assert len(instance.context) < n


class TestStats:
    def test_mini_corpus_counts(self, mini_doc):
        stats = corpus_stats(build_instances(mini_doc))
        assert stats == {"total": 3, "generic": 0, "agent": 1, "theme": 2, "documents": 1}

    def test_empty(self):
        assert corpus_stats([]) == {
            "total": 0,
            "generic": 0,
            "agent": 0,
            "theme": 0,
            "documents": 0,
        }


class TestInstanceFiles:
    def test_write_read_preserves_texts(self, tmp_path, mini_doc):
        instances = build_instances(mini_doc)
        path = tmp_path / "instances.jsonl"
        write_instances(instances, path)
        loaded = read_instances(path)
        assert len(loaded) == len(instances)
        for a, b in zip(instances, loaded):
            assert [e.text for e in a.context] == [e.text for e in b.context]
            assert a.question.surface == b.question.surface
            assert a.answer.text == b.answer.text

    def test_golden_file_bytes(self, tmp_path, mini_doc, data_dir):
        path = tmp_path / "instances.jsonl"
        write_instances(build_instances(mini_doc), path)
        assert path.read_bytes() == (data_dir / "mini_instances_golden.jsonl").read_bytes()
