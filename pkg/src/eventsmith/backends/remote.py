"""Newline-delimited JSON protocol for out-of-process backends.

Three request kinds mirror the backend contract:

    {"kind": "score",  "input_text": ..., "output_text": ...}
    {"kind": "sample", "input_text": ..., "n": ..., "seed": ..., "max_tokens": ...}
    {"kind": "beam",   "input_text": ..., "beam_size": ..., "max_tokens": ...}

plus a "capabilities" handshake. Responses are {"ok": true, ...} or
{"ok": false, "error": ...}. `PipeBackend` spawns a serving command and talks
to it over stdin/stdout; `serve_stdio` is the other end, letting any process
that wraps a model (this package's n-gram model, or an external neural
system) expose it to the workbench.
"""

from __future__ import annotations

import argparse
import json
import shlex
import subprocess
import sys
from typing import IO, Optional

from .base import BackendFailure, GeneratorBackend
from .ngram import NgramEventModel


def handle_request(backend: GeneratorBackend, request: dict) -> dict:
    kind = request.get("kind")
    try:
        if kind == "capabilities":
            return {
                "ok": True,
                "capabilities": sorted(backend.capabilities),
                "description": backend.description,
            }
        if kind == "score":
            logprobs = backend.score(request["input_text"], request["output_text"])
            return {"ok": True, "logprobs": logprobs}
        if kind == "sample":
            events = backend.sample(
                request["input_text"], request["n"], request["seed"], request["max_tokens"]
            )
            return {"ok": True, "events": events}
        if kind == "beam":
            ranked = backend.beam(
                request["input_text"], request["beam_size"], request["max_tokens"]
            )
            return {"ok": True, "events": [[text, score] for text, score in ranked]}
        return {"ok": False, "error": f"unknown request kind {kind!r}"}
    except Exception as exc:  # errors must cross the pipe, not kill the server
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}"}


def serve_stream(backend: GeneratorBackend, rfile: IO[str], wfile: IO[str]) -> None:
    for line in rfile:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            response = {"ok": False, "error": f"bad request: {exc}"}
        else:
            response = handle_request(backend, request)
        wfile.write(json.dumps(response, ensure_ascii=False) + "\n")
        wfile.flush()


def serve_stdio(backend: GeneratorBackend) -> None:
    serve_stream(backend, sys.stdin, sys.stdout)


class PipeBackend(GeneratorBackend):
    """Client side of the protocol, speaking to a spawned subprocess.

    One pipe, one client: callers must serialize access.
    """

    exclusive = True

    def __init__(self, command: str) -> None:
        self.command = command
        self._proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )
        hello = self._request({"kind": "capabilities"})
        self.capabilities = frozenset(hello["capabilities"])
        self.description = hello.get("description", command)

    def _request(self, payload: dict) -> dict:
        proc = self._proc
        if proc.poll() is not None or proc.stdin is None or proc.stdout is None:
            raise BackendFailure(f"backend process {self.command!r} is not running")
        try:
            proc.stdin.write(json.dumps(payload, ensure_ascii=False) + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise BackendFailure(f"pipe to {self.command!r} broke: {exc}") from exc
        if not line:
            raise BackendFailure(f"backend {self.command!r} closed the pipe")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BackendFailure(f"unparseable response: {line!r}") from exc
        if not response.get("ok"):
            raise BackendFailure(response.get("error", "backend reported failure"))
        return response

    def score(self, input_text: str, output_text: str) -> list[float]:
        response = self._request(
            {"kind": "score", "input_text": input_text, "output_text": output_text}
        )
        return [float(v) for v in response["logprobs"]]

    def sample(self, input_text: str, n: int, seed: int, max_tokens: int) -> list[str]:
        response = self._request(
            {
                "kind": "sample",
                "input_text": input_text,
                "n": n,
                "seed": seed,
                "max_tokens": max_tokens,
            }
        )
        return list(response["events"])

    def beam(self, input_text: str, beam_size: int, max_tokens: int) -> list[tuple[str, float]]:
        response = self._request(
            {
                "kind": "beam",
                "input_text": input_text,
                "beam_size": beam_size,
                "max_tokens": max_tokens,
            }
        )
        return [(text, float(score)) for text, score in response["events"]]

    def close(self) -> None:
        if self._proc.poll() is None:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
            self._proc.wait(timeout=5)

    def __del__(self) -> None:
        try:
            self.close()
        except Exception:
            pass


def load_backend(spec: str) -> GeneratorBackend:
    """Resolve a --backend argument: `cmd:<command>` spawns a protocol server,
    anything else is a saved n-gram model path."""
    if spec.startswith("cmd:"):
        return PipeBackend(spec[len("cmd:"):])
    return NgramEventModel.load(spec)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m eventsmith.backends.remote",
        description="Serve a saved n-gram model over the stdio protocol.",
    )
    parser.add_argument("--model", required=True, help="path to a saved model file")
    args = parser.parse_args(argv)
    serve_stdio(NgramEventModel.load(args.model))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
