import sys

import pytest

from eventsmith.backends.base import BackendFailure
from eventsmith.backends.ngram import fit_reference_backend
from eventsmith.backends.remote import PipeBackend, handle_request, load_backend
from eventsmith.corpus import load_corpus
from eventsmith.generation import Variant, instance_prompt
from eventsmith.mining import build_instances


@pytest.fixture(scope="module")
def model_path(tmp_path_factory, data_dir):
    doc = load_corpus(data_dir / "mini_corpus.jsonl", strict=True)[0]
    model = fit_reference_backend(build_instances(doc), Variant.QGELM)
    path = tmp_path_factory.mktemp("models") / "mini.json"
    model.save(path)
    return path


@pytest.fixture(scope="module")
def data_dir():
    from pathlib import Path

    return Path(__file__).parent / "data"


@pytest.fixture()
def pipe(model_path):
    backend = PipeBackend(f"{sys.executable} -m eventsmith.backends.remote --model {model_path}")
    yield backend
    backend.close()


class TestPipeProtocol:
    def test_handshake_reports_capabilities(self, pipe):
        assert pipe.capabilities == frozenset({"score", "sample", "beam"})

    def test_remote_matches_local(self, pipe, model_path, data_dir):
        from eventsmith.backends.ngram import NgramEventModel

        local = NgramEventModel.load(model_path)
        doc = load_corpus(data_dir / "mini_corpus.jsonl", strict=True)[0]
        instance = build_instances(doc)[1]
        prompt = instance_prompt(instance, Variant.QGELM)
        assert pipe.score(prompt, "police arrested him") == local.score(
            prompt, "police arrested him"
        )
        assert pipe.sample(prompt, 4, 11, 10) == local.sample(prompt, 4, 11, 10)
        assert pipe.beam(prompt, 2, 8) == local.beam(prompt, 2, 8)

    def test_server_side_errors_cross_the_pipe(self, pipe):
        with pytest.raises(BackendFailure):
            pipe._request({"kind": "wat"})

    def test_load_backend_dispatch(self, model_path):
        local = load_backend(str(model_path))
        assert local.supports("score")


class TestHandleRequest:
    def test_unknown_kind(self):
        from helpers import EchoBackend

        response = handle_request(EchoBackend(), {"kind": "nope"})
        assert response["ok"] is False

    def test_exception_becomes_error_payload(self):
        from helpers import GoldScorer

        response = handle_request(
            GoldScorer({}), {"kind": "sample", "input_text": "x", "n": 1, "seed": 0, "max_tokens": 5}
        )
        assert response["ok"] is False
        assert "NotImplementedError" in response["error"]
