import http.server
import json
import random
import sys
import threading

import pytest

from maqa import model_client as mc
from maqa.paradigms import CandidateSpan, K_MAX
from conftest import build_instance


def random_request(rng):
    mode = rng.choice(mc.MODES)
    return mc.ModelRequest(
        request_id=f"r{rng.randint(0, 999)}",
        mode=mode,
        question=" ".join(rng.choice("who what when or and".split()) for _ in range(4)),
        passage=" ".join(rng.choice("x y z w".split()) for _ in range(6)),
    )


def random_response(rng, request):
    rid = request.request_id
    if request.mode == "extract_one":
        span = None if rng.random() < 0.3 else ("some answer", round(rng.random(), 3))
        return mc.ModelResponse(request_id=rid, span=span)
    if request.mode == "tag":
        return mc.ModelResponse(
            request_id=rid, probs=tuple(round(rng.random(), 3) for _ in range(6))
        )
    if request.mode == "candidates":
        cands = tuple(
            CandidateSpan(i, i + rng.randint(1, 3), round(rng.random(), 3))
            for i in range(rng.randint(0, 4))
        )
        return mc.ModelResponse(request_id=rid, candidates=cands)
    if request.mode == "count":
        weights = [rng.random() + 1e-9 for _ in range(K_MAX)]
        total = sum(weights)
        dist = [w / total for w in weights]
        dist[-1] = 1.0 - sum(dist[:-1])
        return mc.ModelResponse(request_id=rid, distribution=tuple(dist))
    return mc.ModelResponse(request_id=rid, text="There are 2 answers: a; b")


class TestProtocolRoundTrip:
    def test_request_round_trip_fuzz(self):
        rng = random.Random(5)
        for _ in range(200):
            req = random_request(rng)
            assert mc.parse_request(mc.encode_request(req)) == req

    def test_response_round_trip_fuzz(self):
        rng = random.Random(6)
        for _ in range(200):
            req = random_request(rng)
            resp = random_response(rng, req)
            parsed = mc.parse_response(mc.encode_response(resp, req.mode), req.mode)
            if req.mode == "count":
                assert parsed.distribution == pytest.approx(resp.distribution)
            else:
                assert parsed == resp

    def test_bad_request_line(self):
        with pytest.raises(mc.ProtocolError):
            mc.parse_request("{nope")
        with pytest.raises(mc.ProtocolError):
            mc.parse_request('{"id": "1", "mode": "levitate", "question": "q", "passage": "p"}')

    def test_bad_response_payloads(self):
        with pytest.raises(mc.ProtocolError, match="probability"):
            mc.parse_response('{"id": "1", "result": {"probs": [1.5]}}', "tag")
        with pytest.raises(mc.ProtocolError, match="sums"):
            dist = [0.5] * K_MAX
            mc.parse_response(json.dumps({"id": "1", "result": {"distribution": dist}}), "count")
        with pytest.raises(mc.ProtocolError, match="entries"):
            mc.parse_response('{"id": "1", "result": {"distribution": [1.0]}}', "count")
        with pytest.raises(mc.ProtocolError):
            mc.parse_response('{"id": "1", "result": {}}', "generate")


@pytest.fixture
def corpus():
    return [
        build_instance(
            "c1",
            "What languages are official?",
            "x English and French y",
            ["English", "French"],
        ),
        build_instance("c2", "Who won?", "the Patriots won again", ["Patriots"]),
    ]


class TestOracle:
    def test_extract_one_respects_exclusions(self, corpus):
        oracle = mc.OracleClient(corpus)
        req = mc.ModelRequest(
            request_id="r1",
            mode="extract_one",
            question="What languages are official? except English",
            passage=corpus[0].passage.raw,
        )
        assert oracle.query(req).span[0] == "French"

    def test_extract_one_exhausted(self, corpus):
        oracle = mc.OracleClient(corpus)
        req = mc.ModelRequest(
            request_id="r1",
            mode="extract_one",
            question="What languages are official? except English, French",
            passage=corpus[0].passage.raw,
        )
        assert oracle.query(req).span is None

    def test_first_gold_without_exclusions(self, corpus):
        oracle = mc.OracleClient(corpus)
        req = mc.ModelRequest(
            request_id="r1",
            mode="extract_one",
            question="What languages are official?",
            passage=corpus[0].passage.raw,
        )
        assert oracle.query(req).span[0] == "English"

    def test_tag_marks_gold_tokens(self, corpus):
        oracle = mc.OracleClient(corpus)
        req = mc.ModelRequest(
            request_id="r1", mode="tag", question="What languages are official?", passage=corpus[0].passage.raw
        )
        assert oracle.query(req).probs == (0.0, 1.0, 0.0, 1.0, 0.0)

    def test_count_one_hot(self, corpus):
        oracle = mc.OracleClient(corpus)
        req = mc.ModelRequest(
            request_id="r1", mode="count", question="What languages are official?", passage=corpus[0].passage.raw
        )
        dist = oracle.query(req).distribution
        assert dist[1] == 1.0 and sum(dist) == 1.0

    def test_unknown_instance_is_protocol_error(self, corpus):
        oracle = mc.OracleClient(corpus)
        req = mc.ModelRequest(request_id="r1", mode="generate", question="??", passage="??")
        with pytest.raises(mc.ProtocolError):
            oracle.query(req)


class TestDegenerate:
    def test_all_modes(self):
        client = mc.DegenerateClient()
        passage = "one two three four five"
        q = "whatever"
        assert client.query(mc.ModelRequest("1", "extract_one", q, passage)).span is None
        assert client.query(mc.ModelRequest("2", "tag", q, passage)).probs == (0.0,) * 5
        assert client.query(mc.ModelRequest("3", "candidates", q, passage)).candidates == ()
        dist = client.query(mc.ModelRequest("4", "count", q, passage)).distribution
        assert dist[0] == 1.0
        assert client.query(mc.ModelRequest("5", "generate", q, passage)).text == "No answer"


class TestScripted:
    def test_lookup_and_miss(self):
        fixtures = {"generate": {"q1": {"text": "There are 2 answers: English; French"}}}
        client = mc.ScriptedClient(fixtures)
        resp = client.query(mc.ModelRequest("1", "generate", "q1", "p"))
        assert resp.text == "There are 2 answers: English; French"
        with pytest.raises(mc.ProtocolError, match="fixture"):
            client.query(mc.ModelRequest("1", "generate", "q2", "p"))


class TestEchoValidation:
    def test_id_mismatch_raises(self):
        class Wrong(mc._Validating):
            def _query(self, request):
                return mc.ModelResponse(request_id="other", span=None)

        with pytest.raises(mc.ProtocolError, match="echo"):
            Wrong().query(mc.ModelRequest("mine", "extract_one", "q", "p"))


class TestSubprocessClient:
    def test_degenerate_over_stdio(self):
        argv = [sys.executable, "-m", "maqa.model_client", "--kind", "degenerate"]
        with mc.SubprocessClient(argv, timeout=30) as client:
            resp = client.query(mc.ModelRequest("77", "tag", "q", "a b c"))
            assert resp.probs == (0.0, 0.0, 0.0)
            resp = client.query(mc.ModelRequest("78", "generate", "q", "p"))
            assert resp.text == "No answer"

    def test_timeout_is_transport_error(self):
        argv = [sys.executable, "-c", "import time; time.sleep(30)"]
        client = mc.SubprocessClient(argv, timeout=0.2)
        try:
            with pytest.raises(mc.TransportError, match="timed out"):
                client.query(mc.ModelRequest("1", "generate", "q", "p"))
        finally:
            client.close()

    def test_dead_process_is_transport_error(self):
        argv = [sys.executable, "-c", "pass"]
        client = mc.SubprocessClient(argv, timeout=5)
        try:
            client._proc.wait(timeout=10)
            with pytest.raises(mc.TransportError):
                client.query(mc.ModelRequest("1", "generate", "q", "p"))
        finally:
            client.close()


class _InferHandler(http.server.BaseHTTPRequestHandler):
    client_impl = mc.DegenerateClient()

    def do_POST(self):
        assert self.path == "/infer"
        length = int(self.headers["Content-Length"])
        request = mc.parse_request(self.rfile.read(length).decode("utf-8"))
        response = self.client_impl.query(request)
        body = mc.encode_response(response, request.mode).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_endpoint():
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _InferHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


class TestHTTPClient:
    def test_same_payloads_as_pipe(self, http_endpoint):
        client = mc.HTTPClient(http_endpoint)
        resp = client.query(mc.ModelRequest("9", "tag", "q", "a b"))
        assert resp.probs == (0.0, 0.0)

    def test_unreachable_is_transport_error(self):
        client = mc.HTTPClient("http://127.0.0.1:1", timeout=0.5)
        with pytest.raises(mc.TransportError):
            client.query(mc.ModelRequest("9", "tag", "q", "a b"))
