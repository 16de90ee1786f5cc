"""Boundary to external neural models: newline-delimited JSON protocol over a
child-process pipe or HTTP POST /infer, plus deterministic mock clients.

Request line:  {"id": ..., "mode": ..., "question": ..., "passage": ...}
Response line: {"id": ..., "result": {...}}, where the result variant is fixed
by the request mode:

    extract_one -> {"span": {"text": str, "score": float} | null}
    tag         -> {"probs": [float, ...]}            one per passage token
    candidates  -> {"candidates": [{"start": int, "end": int, "score": float}]}
    count       -> {"distribution": [float x 8]}      over counts 1..8, sums to 1
    generate    -> {"text": str}

Run ``python -m maqa.model_client --kind {oracle,degenerate,scripted}`` to
serve a mock over stdio (the shape SubprocessClient expects).
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from dataclasses import dataclass

from maqa.core import Instance, normalize, tokenize
from maqa.paradigms import K_MAX, CandidateSpan, gen_serialize

MODES = ("extract_one", "tag", "candidates", "count", "generate")

DEFAULT_TIMEOUT = 30.0


class TransportError(RuntimeError):
    """The model endpoint is unreachable, died, or timed out."""


class ProtocolError(ValueError):
    """The endpoint answered, but not with a legal protocol payload."""


@dataclass(frozen=True)
class ModelRequest:
    request_id: str
    mode: str
    question: str
    passage: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode: {self.mode!r}")


@dataclass(frozen=True)
class ModelResponse:
    """One response variant; exactly the field matching the request mode is set."""

    request_id: str
    span: tuple[str, float] | None = None
    probs: tuple[float, ...] | None = None
    candidates: tuple[CandidateSpan, ...] | None = None
    distribution: tuple[float, ...] | None = None
    text: str | None = None


def encode_request(req: ModelRequest) -> str:
    return json.dumps(
        {
            "id": req.request_id,
            "mode": req.mode,
            "question": req.question,
            "passage": req.passage,
        },
        ensure_ascii=False,
    )


def parse_request(line: str) -> ModelRequest:
    try:
        obj = json.loads(line)
        return ModelRequest(
            request_id=str(obj["id"]),
            mode=obj["mode"],
            question=obj["question"],
            passage=obj["passage"],
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ProtocolError(f"bad request line: {e}: {line!r}") from e


def encode_response(resp: ModelResponse, mode: str) -> str:
    result: dict
    if mode == "extract_one":
        result = {
            "span": None
            if resp.span is None
            else {"text": resp.span[0], "score": resp.span[1]}
        }
    elif mode == "tag":
        result = {"probs": list(resp.probs)}
    elif mode == "candidates":
        result = {
            "candidates": [
                {"start": c.start, "end": c.end, "score": c.score}
                for c in resp.candidates
            ]
        }
    elif mode == "count":
        result = {"distribution": list(resp.distribution)}
    elif mode == "generate":
        result = {"text": resp.text}
    else:
        raise ValueError(f"unknown mode: {mode!r}")
    return json.dumps({"id": resp.request_id, "result": result}, ensure_ascii=False)


def _check_prob(p) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ProtocolError(f"probability out of range: {p}")
    return p


def parse_response(line: str, mode: str) -> ModelResponse:
    """Parse and validate a response line against the request mode."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"bad response line: {e.msg}: {line!r}") from e
    try:
        rid = str(obj["id"])
        result = obj["result"]
        if mode == "extract_one":
            span = result["span"]
            parsed = None if span is None else (span["text"], float(span["score"]))
            return ModelResponse(request_id=rid, span=parsed)
        if mode == "tag":
            return ModelResponse(
                request_id=rid, probs=tuple(_check_prob(p) for p in result["probs"])
            )
        if mode == "candidates":
            cands = tuple(
                CandidateSpan(int(c["start"]), int(c["end"]), float(c["score"]))
                for c in result["candidates"]
            )
            return ModelResponse(request_id=rid, candidates=cands)
        if mode == "count":
            dist = tuple(_check_prob(p) for p in result["distribution"])
            if len(dist) != K_MAX:
                raise ProtocolError(f"count distribution must have {K_MAX} entries")
            if abs(sum(dist) - 1.0) > 1e-6:
                raise ProtocolError(f"count distribution sums to {sum(dist)}")
            return ModelResponse(request_id=rid, distribution=dist)
        if mode == "generate":
            return ModelResponse(request_id=rid, text=str(result["text"]))
        raise ProtocolError(f"unknown mode: {mode!r}")
    except ProtocolError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ProtocolError(f"malformed {mode} response: {e}: {line!r}") from e


class _Validating:
    """Shared query-side checks: id echo and variant validation."""

    def query(self, request: ModelRequest) -> ModelResponse:
        response = self._query(request)
        if response.request_id != request.request_id:
            raise ProtocolError(
                f"response id {response.request_id!r} does not echo "
                f"request id {request.request_id!r}"
            )
        return response


class SubprocessClient(_Validating):
    """Newline-delimited JSON over a child process's stdin/stdout.

    Safe to share across workers: writes are serialized and responses are
    matched in order under one lock; ``max_inflight`` bounds concurrent
    callers when set.
    """

    def __init__(self, argv, timeout: float = DEFAULT_TIMEOUT, max_inflight: int | None = None):
        self.timeout = timeout
        self._lock = threading.Lock()
        self._sem = threading.Semaphore(max_inflight) if max_inflight else None
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as e:
            raise TransportError(f"cannot start model process {argv!r}: {e}") from e
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def _query(self, request: ModelRequest) -> ModelResponse:
        if self._sem:
            self._sem.acquire()
        try:
            with self._lock:
                try:
                    self._proc.stdin.write(encode_request(request) + "\n")
                    self._proc.stdin.flush()
                except (BrokenPipeError, OSError) as e:
                    raise TransportError(f"model process pipe closed: {e}") from e
                try:
                    line = self._lines.get(timeout=self.timeout)
                except queue.Empty:
                    raise TransportError(
                        f"model process response timed out after {self.timeout}s"
                    ) from None
                if line is None:
                    raise TransportError("model process closed its output stream")
                return parse_response(line, request.mode)
        finally:
            if self._sem:
                self._sem.release()

    def close(self):
        try:
            self._proc.stdin.close()
        except OSError:
            pass
        self._proc.terminate()
        self._proc.wait(timeout=5)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class HTTPClient(_Validating):
    """Same payloads as the pipe transport, POSTed to <base_url>/infer."""

    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT, max_inflight: int | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._sem = threading.Semaphore(max_inflight) if max_inflight else None

    def _query(self, request: ModelRequest) -> ModelResponse:
        import requests

        if self._sem:
            self._sem.acquire()
        try:
            try:
                resp = requests.post(
                    self.base_url + "/infer",
                    data=encode_request(request).encode("utf-8"),
                    headers={"Content-Type": "application/json"},
                    timeout=self.timeout,
                )
            except requests.RequestException as e:
                raise TransportError(f"model endpoint unreachable: {e}") from e
            if resp.status_code != 200:
                raise TransportError(
                    f"model endpoint returned status {resp.status_code}"
                )
            return parse_response(resp.text, request.mode)
        finally:
            if self._sem:
                self._sem.release()


def _one_hot(k: int) -> tuple[float, ...]:
    k = max(1, min(k, K_MAX))
    return tuple(1.0 if i == k - 1 else 0.0 for i in range(K_MAX))


class OracleClient(_Validating):
    """Answers every mode perfectly from a gold corpus (for tests and CI).

    Instances are looked up by passage text, disambiguated by the longest
    instance question that prefixes the request question (iterative rewrites
    append to the question, so the original is always a prefix).
    """

    def __init__(self, corpus):
        self._by_passage: dict[str, list[Instance]] = {}
        for inst in corpus:
            self._by_passage.setdefault(inst.passage.raw, []).append(inst)

    def _find(self, request: ModelRequest) -> Instance | None:
        candidates = self._by_passage.get(request.passage, [])
        best = None
        for inst in candidates:
            q = inst.question.raw
            if request.question == q or request.question.startswith(q + " "):
                if best is None or len(q) > len(best.question.raw):
                    best = inst
        return best

    def _query(self, request: ModelRequest) -> ModelResponse:
        inst = self._find(request)
        if inst is None:
            raise ProtocolError(f"oracle knows no instance for question {request.question!r}")
        rid = request.request_id
        gold = inst.gold.spans
        if request.mode == "extract_one":
            excluded: set[str] = set()
            marker = " except "
            if marker in request.question:
                tail = request.question.rsplit(marker, 1)[1]
                excluded = {normalize(a) for a in tail.split(", ")}
            for span in gold:
                if normalize(span.text) not in excluded:
                    return ModelResponse(request_id=rid, span=(span.text, 1.0))
            return ModelResponse(request_id=rid, span=None)
        if request.mode == "tag":
            tokens = tokenize(request.passage).tokens
            probs = [0.0] * len(tokens)
            for span in gold:
                if span.token_range is not None:
                    for i in range(*span.token_range):
                        probs[i] = 1.0
            return ModelResponse(request_id=rid, probs=tuple(probs))
        if request.mode == "candidates":
            cands = tuple(
                CandidateSpan(s, e, 1.0)
                for s, e in sorted(
                    span.token_range for span in gold if span.token_range is not None
                )
            )
            return ModelResponse(request_id=rid, candidates=cands)
        if request.mode == "count":
            return ModelResponse(request_id=rid, distribution=_one_hot(len(gold)))
        if request.mode == "generate":
            return ModelResponse(
                request_id=rid, text=gen_serialize([s.text for s in gold])
            )
        raise ProtocolError(f"unknown mode: {request.mode!r}")


class DegenerateClient(_Validating):
    """Predicts nothing: empty span, all-zero tags, no candidates, count 1."""

    def _query(self, request: ModelRequest) -> ModelResponse:
        rid = request.request_id
        if request.mode == "extract_one":
            return ModelResponse(request_id=rid, span=None)
        if request.mode == "tag":
            n = len(tokenize(request.passage).tokens)
            return ModelResponse(request_id=rid, probs=(0.0,) * n)
        if request.mode == "candidates":
            return ModelResponse(request_id=rid, candidates=())
        if request.mode == "count":
            return ModelResponse(request_id=rid, distribution=_one_hot(1))
        if request.mode == "generate":
            return ModelResponse(request_id=rid, text="No answer")
        raise ProtocolError(f"unknown mode: {request.mode!r}")


class ScriptedClient(_Validating):
    """Replays fixture responses keyed by (mode, question); a miss is an error.

    Fixture values use the wire "result" shapes, e.g.
    {"generate": {"who ...": {"text": "There are 2 answers: English; French"}}}.
    """

    def __init__(self, fixtures: dict):
        self.fixtures = fixtures

    def _query(self, request: ModelRequest) -> ModelResponse:
        by_question = self.fixtures.get(request.mode, {})
        if request.question not in by_question:
            raise ProtocolError(
                f"no scripted fixture for mode={request.mode!r} "
                f"question={request.question!r}"
            )
        result = by_question[request.question]
        line = json.dumps({"id": request.request_id, "result": result})
        return parse_response(line, request.mode)


def serve_stdio(client, stdin, stdout) -> None:
    """Serve a client over newline-delimited JSON (the SubprocessClient shape)."""
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        request = parse_request(line)
        response = client.query(request)
        stdout.write(encode_response(response, request.mode) + "\n")
        stdout.flush()


def make_mock(kind: str, corpus=None, fixtures=None):
    """Build one of the deterministic mock clients."""
    if kind == "oracle":
        if corpus is None:
            raise ValueError("oracle mock requires a corpus")
        return OracleClient(corpus)
    if kind == "degenerate":
        return DegenerateClient()
    if kind == "scripted":
        if fixtures is None:
            raise ValueError("scripted mock requires fixtures")
        return ScriptedClient(fixtures)
    raise ValueError(f"unknown mock kind: {kind!r}")


def _main(argv=None) -> int:
    import argparse
    import sys

    parser = argparse.ArgumentParser(
        prog="python -m maqa.model_client",
        description="Serve a deterministic mock model over stdio.",
    )
    parser.add_argument("--kind", required=True, choices=["oracle", "degenerate", "scripted"])
    parser.add_argument("--corpus", help="unified corpus JSONL (oracle)")
    parser.add_argument("--fixtures", help="fixture JSON file (scripted)")
    args = parser.parse_args(argv)

    corpus = None
    if args.corpus:
        from maqa.ingest import load_path

        corpus, _ = load_path(args.corpus, "unified")
    fixtures = None
    if args.fixtures:
        with open(args.fixtures, encoding="utf-8") as f:
            fixtures = json.load(f)
    client = make_mock(args.kind, corpus=corpus, fixtures=fixtures)
    serve_stdio(client, sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    raise SystemExit(_main())
