"""Synthetic annotated corpora.

Two generators: `random_annotated_document` produces small adversarial
documents (multi-event sentences, distractor noun phrases, annotation gaps,
mixed clustering) for exercising the mining pipeline against a brute-force
oracle, and `scenario_corpus` produces well-formed multi-actor stories large
enough to fit reference backends on.
"""

from __future__ import annotations

import random

from .corpus import AnnotatedDocument, AnnotatedSentence
from .events import CorefCluster, DependencyRole, Event, NounPhraseMention, Role

_ROLE_OF_DEP = {
    DependencyRole.SUBJECT: Role.AGENT,
    DependencyRole.OBJECT: Role.THEME,
    DependencyRole.OTHER: None,
}

ACTOR_NOUNS = [
    "officer", "suspect", "victim", "mayor", "crowd", "judge", "driver", "witness",
    "doctor", "nurse", "teacher", "student", "farmer", "soldier", "pilot", "sailor",
    "banker", "lawyer", "editor", "reporter", "singer", "dancer", "painter", "poet",
    "hunter", "guard", "clerk", "coach", "priest", "monk", "chef", "waiter",
    "miner", "builder", "plumber", "trader", "broker", "analyst", "agent", "scout",
    "ranger", "warden", "sheriff", "deputy", "inmate", "jury", "tenant", "landlord",
    "vendor", "courier", "captain", "colonel", "general", "senator", "governor",
    "diplomat", "engineer", "operator", "technician", "surveyor",
]

PROP_NOUNS = [
    "car", "building", "weapon", "money", "road", "bridge", "document",
    "package", "warehouse", "ship", "plane", "contract",
]

TRANSITIVE_VERBS = [
    "chased", "arrested", "questioned", "followed", "attacked", "blamed",
    "rescued", "ignored", "found", "helped", "accused", "warned",
    "released", "contacted",
]

INTRANSITIVE_VERBS = [
    "fled", "protested", "collapsed", "arrived", "escaped", "surrendered",
    "resigned", "vanished",
]

ADJUNCT_WORDS = ["yesterday", "downtown", "overnight", "nearby"]

DISTRACTOR_NOUNS = ["station", "corner", "market", "harbor"]

PRONOUN_SURFACES = ["he", "she", "they"]


class _SentenceBuilder:
    def __init__(self, sentence_index: int) -> None:
        self.sentence_index = sentence_index
        self.tokens: list[str] = []
        self.noun_phrases: list[NounPhraseMention] = []
        self.dep_roles: dict[tuple[int, int], DependencyRole] = {}
        self.events: list[Event] = []

    def add_tokens(self, text: str) -> tuple[int, int]:
        parts = text.split()
        start = len(self.tokens)
        self.tokens.extend(parts)
        return (start, len(self.tokens))

    def add_np(self, text: str, dep: DependencyRole, cluster_id: str | None) -> NounPhraseMention:
        span = self.add_tokens(text)
        mention = NounPhraseMention(
            text=text,
            sentence_index=self.sentence_index,
            token_span=span,
            role=_ROLE_OF_DEP[dep],
            cluster_id=cluster_id,
        )
        self.noun_phrases.append(mention)
        self.dep_roles[span] = dep
        return mention

    def build(self) -> AnnotatedSentence:
        return AnnotatedSentence(
            tokens=tuple(self.tokens),
            noun_phrases=tuple(self.noun_phrases),
            events=tuple(self.events),
            dependency_roles=self.dep_roles,
        )


def _collect_clusters(sentences: list[AnnotatedSentence]) -> tuple[CorefCluster, ...]:
    groups: dict[str, list[NounPhraseMention]] = {}
    for sentence in sentences:
        for np in sentence.noun_phrases:
            if np.cluster_id is not None:
                groups.setdefault(np.cluster_id, []).append(np)
    return tuple(
        CorefCluster(cluster_id=cid, mentions=tuple(mentions))
        for cid, mentions in sorted(groups.items())
    )


def random_annotated_document(
    rng: random.Random,
    doc_id: str,
    max_events: int = 10,
    max_nps_per_event: int = 4,
) -> AnnotatedDocument:
    """A messy but valid document: 1-2 events per sentence, distractor noun
    phrases that are absent from the events, adjunct mentions with no
    grammatical role, entities that sometimes miss their cluster annotation,
    plus cluster-less recurring props and occasional annotation-free events.
    """
    n_events = rng.randint(1, max_events)

    n_entities = rng.randint(1, 4)
    entities = []
    nouns = rng.sample(ACTOR_NOUNS, n_entities)
    for i, noun in enumerate(nouns):
        clustered = rng.random() < 0.7
        surfaces = [f"the {noun}"]
        if clustered and rng.random() < 0.5:
            surfaces.append(rng.choice(PRONOUN_SURFACES))
        entities.append(
            {"surfaces": surfaces, "cluster_id": f"{doc_id}-c{i}" if clustered else None}
        )
    props = [f"the {noun}" for noun in rng.sample(PROP_NOUNS, rng.randint(1, 3))]

    sentences: list[AnnotatedSentence] = []
    events_placed = 0
    event_counter = 0
    while events_placed < n_events:
        builder = _SentenceBuilder(len(sentences))
        in_sentence = min(rng.randint(1, 2), n_events - events_placed)
        for _ in range(in_sentence):
            if rng.random() < 0.08:
                # Extraction sometimes yields arguments nobody annotated.
                span_subject = " ".join(rng.choices("0123456789", k=2))
                builder.add_tokens(span_subject)
                verb = rng.choice(INTRANSITIVE_VERBS)
                builder.add_tokens(verb)
                builder.events.append(
                    Event(
                        subject=span_subject,
                        predicate=verb,
                        object="",
                        sentence_index=builder.sentence_index,
                        event_index=event_counter,
                    )
                )
                event_counter += 1
                events_placed += 1
                continue

            entity = rng.choice(entities)
            subject = rng.choice(entity["surfaces"])
            subject_cluster = entity["cluster_id"] if rng.random() < 0.9 else None
            builder.add_np(subject, DependencyRole.SUBJECT, subject_cluster)

            transitive = rng.random() < 0.7
            verb = rng.choice(TRANSITIVE_VERBS if transitive else INTRANSITIVE_VERBS)
            builder.add_tokens(verb)

            obj_text = ""
            if transitive:
                if rng.random() < 0.5 and len(entities) > 1:
                    other = rng.choice([e for e in entities if e is not entity])
                    obj_text = rng.choice(other["surfaces"])
                    obj_cluster = other["cluster_id"] if rng.random() < 0.9 else None
                else:
                    obj_text = rng.choice(props)
                    obj_cluster = None
                builder.add_np(obj_text, DependencyRole.OBJECT, obj_cluster)

            if rng.random() < 0.2:
                adjunct = rng.choice(ADJUNCT_WORDS)
                builder.add_np(adjunct, DependencyRole.OTHER, None)
                obj_text = f"{obj_text} {adjunct}".strip()

            n_nps_here = sum(
                1 for np in builder.noun_phrases if np.sentence_index == builder.sentence_index
            )
            if n_nps_here < max_nps_per_event and rng.random() < 0.3:
                distractor = f"the {rng.choice(DISTRACTOR_NOUNS)}"
                builder.add_np(distractor, rng.choice(list(DependencyRole)), None)

            builder.events.append(
                Event(
                    subject=subject,
                    predicate=verb,
                    object=obj_text,
                    sentence_index=builder.sentence_index,
                    event_index=event_counter,
                )
            )
            event_counter += 1
            events_placed += 1
        sentences.append(builder.build())

    return AnnotatedDocument(
        document_id=doc_id,
        sentences=tuple(sentences),
        clusters=_collect_clusters(sentences),
    )


def scenario_document(
    rng: random.Random,
    doc_id: str,
    cast_size: int = 4,
    min_events: int = 6,
    max_events: int = 10,
) -> AnnotatedDocument:
    """A clean multi-actor story: one event per sentence, every argument
    annotated, a fixed cast whose members recur as subjects and objects."""
    cast = rng.sample(ACTOR_NOUNS, cast_size)
    cast_surfaces = [f"the {noun}" for noun in cast]
    props = [f"the {noun}" for noun in rng.sample(PROP_NOUNS, 2)]

    sentences: list[AnnotatedSentence] = []
    n_events = rng.randint(min_events, max_events)
    for index in range(n_events):
        builder = _SentenceBuilder(index)
        actor_index = rng.randrange(cast_size)
        subject = cast_surfaces[actor_index]
        builder.add_np(subject, DependencyRole.SUBJECT, f"{doc_id}-c{actor_index}")

        if rng.random() < 0.75:
            verb = rng.choice(TRANSITIVE_VERBS)
            builder.add_tokens(verb)
            if rng.random() < 0.5:
                other_index = rng.choice([i for i in range(cast_size) if i != actor_index])
                obj = cast_surfaces[other_index]
                builder.add_np(obj, DependencyRole.OBJECT, f"{doc_id}-c{other_index}")
            else:
                obj = rng.choice(props)
                builder.add_np(obj, DependencyRole.OBJECT, None)
        else:
            verb = rng.choice(INTRANSITIVE_VERBS)
            builder.add_tokens(verb)
            obj = ""

        builder.events.append(
            Event(
                subject=subject,
                predicate=verb,
                object=obj,
                sentence_index=index,
                event_index=index,
            )
        )
        sentences.append(builder.build())

    return AnnotatedDocument(
        document_id=doc_id,
        sentences=tuple(sentences),
        clusters=_collect_clusters(sentences),
    )


def scenario_corpus(num_docs: int, seed: int = 0, **kwargs) -> list[AnnotatedDocument]:
    rng = random.Random(seed)
    return [scenario_document(rng, f"story-{i:04d}", **kwargs) for i in range(num_docs)]


# deliberately absent from ACTOR_NOUNS so a thread protagonist can only
# reappear through an actual thread event
THREAD_ACTORS = ["the marshal", "the smuggler", "the informant"]

ANCHOR_EVENTS = [
    ("the marshal", "inspected", "the ledger"),
    ("the smuggler", "delivered", "the parcel"),
    ("the informant", "revealed", "the plot"),
]


def anchored_document(
    rng: random.Random,
    doc_id: str,
    thread_rate: float = 0.12,
    min_events: int = 8,
    max_events: int = 12,
) -> AnnotatedDocument:
    """A document built around one shared anchor event.

    Fillers use actors that never recur inside the document, so their
    questions stay unanswered and every filler contributes a generic
    fallback. The anchor event text is shared corpus-wide; only a
    `thread_rate` fraction of documents lets its protagonist recur in a
    later event (in a random role), so the anchor's unguided continuation
    distribution is dominated by arbitrary next events while its guided
    continuations stay on the protagonist.
    """
    n_events = rng.randint(min_events, max_events)
    anchor_subject, anchor_verb, anchor_object = rng.choice(ANCHOR_EVENTS)
    anchor_pos = rng.randrange(0, n_events - 3)
    threaded = rng.random() < thread_rate
    thread_role = rng.choice([Role.AGENT, Role.THEME])
    answer_pos = anchor_pos + rng.randint(1, 3) if threaded else None

    filler_actors = [f"the {noun}" for noun in rng.sample(ACTOR_NOUNS, n_events + 2)]
    filler_props = [f"the {noun}" for noun in rng.sample(PROP_NOUNS, len(PROP_NOUNS))]
    cluster_id = f"{doc_id}-thread"

    sentences: list[AnnotatedSentence] = []
    for index in range(n_events):
        builder = _SentenceBuilder(index)
        if index == anchor_pos:
            builder.add_np(anchor_subject, DependencyRole.SUBJECT, cluster_id)
            builder.add_tokens(anchor_verb)
            builder.add_np(anchor_object, DependencyRole.OBJECT, None)
            subject, verb, obj = anchor_subject, anchor_verb, anchor_object
        elif index == answer_pos:
            verb = rng.choice(TRANSITIVE_VERBS)
            if thread_role is Role.AGENT:
                subject, obj = anchor_subject, filler_props.pop()
                builder.add_np(subject, DependencyRole.SUBJECT, cluster_id)
                builder.add_tokens(verb)
                builder.add_np(obj, DependencyRole.OBJECT, None)
            else:
                subject, obj = filler_actors.pop(), anchor_subject
                builder.add_np(subject, DependencyRole.SUBJECT, None)
                builder.add_tokens(verb)
                builder.add_np(obj, DependencyRole.OBJECT, cluster_id)
        else:
            subject = filler_actors.pop()
            builder.add_np(subject, DependencyRole.SUBJECT, None)
            if rng.random() < 0.6:
                verb = rng.choice(TRANSITIVE_VERBS)
                obj = filler_props.pop() if filler_props else ""
                builder.add_tokens(verb)
                if obj:
                    builder.add_np(obj, DependencyRole.OBJECT, None)
            else:
                verb = rng.choice(INTRANSITIVE_VERBS)
                obj = ""
                builder.add_tokens(verb)
        builder.events.append(
            Event(
                subject=subject,
                predicate=verb,
                object=obj,
                sentence_index=index,
                event_index=index,
            )
        )
        sentences.append(builder.build())

    return AnnotatedDocument(
        document_id=doc_id,
        sentences=tuple(sentences),
        clusters=_collect_clusters(sentences),
    )


def anchored_corpus(
    num_docs: int, seed: int = 0, thread_rate: float = 0.12
) -> list[AnnotatedDocument]:
    rng = random.Random(seed)
    return [
        anchored_document(rng, f"case-{i:04d}", thread_rate=thread_rate)
        for i in range(num_docs)
    ]


def random_corpus(
    num_docs: int, seed: int = 0, max_events: int = 10, max_nps_per_event: int = 4
) -> list[AnnotatedDocument]:
    rng = random.Random(seed)
    return [
        random_annotated_document(rng, f"doc-{i:04d}", max_events, max_nps_per_event)
        for i in range(num_docs)
    ]
