from .base import BackendFailure, GeneratorBackend

_NGRAM = {"EmptyTrainingSet", "NgramEventModel", "fit_reference_backend"}
_REMOTE = {"PipeBackend", "load_backend", "serve_stdio"}

__all__ = ["BackendFailure", "GeneratorBackend", *sorted(_NGRAM), *sorted(_REMOTE)]


def __getattr__(name: str):
    # Deferred: ngram/remote import the prompt layer, which imports base.
    if name in _NGRAM:
        from . import ngram

        return getattr(ngram, name)
    if name in _REMOTE:
        from . import remote

        return getattr(remote, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
