"""TCP services realizing the three roles as separate processes.

Transport is newline-delimited JSON envelopes (see serial.envelope_json)
over plain TCP; ciphertexts are safe on an untrusted wire by construction,
and transport security is explicitly out of scope.  Replies are idempotent
per correlation id so client retries are safe.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
import time
import uuid
from dataclasses import dataclass, field

from . import pipeline, serial
from .errors import DlogOutOfRangeError, ProtocolError, ServiceConnectionError
from .pairing import GroupContext, get_table
from .preprocess import QuantizedRecord
from .serial import FormatError, envelope_json, envelope_parse

PROTOCOL_VERSION = 1

MSG_HELLO = "hello"
MSG_HELLO_ACK = "hello_ack"
MSG_GET_CLIENT_BUNDLE = "get_client_bundle"
MSG_GET_EVAL_BUNDLE = "get_eval_bundle"
MSG_BUNDLE = "bundle"
MSG_SUBMIT = "submit_ciphertext"
MSG_SCORE = "score_result"
MSG_ERROR = "error"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 0                    # 0 = pick an ephemeral port
    client_token: str | None = None  # required for get_client_bundle when set
    retries: int = 2
    retry_delay_s: float = 0.2


def _error_payload(code: str, message: str) -> bytes:
    return json.dumps({"code": code, "message": message}, sort_keys=True).encode()


class _LineService(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        while True:
            line = self.rfile.readline()
            if not line:
                return
            line = line.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            try:
                msg_type, payload, cid = envelope_parse(line)
            except FormatError as exc:
                self._send(envelope_json(MSG_ERROR, _error_payload("malformed", str(exc)), "unknown"))
                continue
            try:
                reply = self.server.service.handle_message(msg_type, payload, cid)
            except Exception as exc:  # noqa: BLE001 - reply instead of dropping the line
                reply = envelope_json(MSG_ERROR, _error_payload("internal", str(exc)), cid)
            self._send(reply)

    def _send(self, line: str):
        self.wfile.write(line.encode() + b"\n")
        self.wfile.flush()


class _ServiceBase:
    """Shared lifecycle: bind, serve on a thread, report address, shut down."""

    name = "service"

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._server = _LineService((config.host, config.port), _Handler)
        self._server.service = self
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address

    def start(self) -> "Self":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self):
        self._server.serve_forever()

    def shutdown(self):
        self._server.shutdown()
        self._server.server_close()

    def _hello_ack(self, cid: str) -> str:
        body = json.dumps({"protocol": PROTOCOL_VERSION, "service": self.name}).encode()
        return envelope_json(MSG_HELLO_ACK, body, cid)


class AuthorityService(_ServiceBase):
    """Hands the client bundle to authenticated clients and the evaluator
    bundle (which never contains master-key material) to anyone who asks."""

    name = "authority"

    def __init__(self, client_bundle: pipeline.ClientBundle,
                 evaluator_bundle: pipeline.EvaluatorBundle,
                 config: ServiceConfig = ServiceConfig()):
        super().__init__(config)
        self._client_json = pipeline.client_bundle_to_json(client_bundle).encode()
        self._eval_json = pipeline.evaluator_bundle_to_json(evaluator_bundle).encode()

    def handle_message(self, msg_type: str, payload: bytes, cid: str) -> str:
        if msg_type == MSG_HELLO:
            return self._hello_ack(cid)
        if msg_type == MSG_GET_CLIENT_BUNDLE:
            if self.config.client_token is not None:
                try:
                    token = json.loads(payload.decode() or "{}").get("token")
                except json.JSONDecodeError:
                    token = None
                if token != self.config.client_token:
                    return envelope_json(MSG_ERROR, _error_payload("auth", "bad client token"), cid)
            return envelope_json(MSG_BUNDLE, self._client_json, cid)
        if msg_type == MSG_GET_EVAL_BUNDLE:
            return envelope_json(MSG_BUNDLE, self._eval_json, cid)
        return envelope_json(MSG_ERROR, _error_payload("unknown_type", f"unsupported message {msg_type!r}"), cid)


class EvaluatorService(_ServiceBase):
    """Accepts projected ciphertexts and replies with score reports."""

    name = "evaluator"

    def __init__(self, bundle: pipeline.EvaluatorBundle, ctx: GroupContext,
                 config: ServiceConfig = ServiceConfig()):
        super().__init__(config)
        self.bundle = bundle
        self.ctx = ctx
        get_table(ctx.gt, bundle.dlog_bound)  # warm the dlog table once
        self._replies: dict[str, str] = {}
        self._lock = threading.Lock()

    def handle_message(self, msg_type: str, payload: bytes, cid: str) -> str:
        if msg_type == MSG_HELLO:
            return self._hello_ack(cid)
        if msg_type != MSG_SUBMIT:
            return envelope_json(MSG_ERROR, _error_payload("unknown_type", f"unsupported message {msg_type!r}"), cid)
        with self._lock:
            cached = self._replies.get(cid)
        if cached is not None:
            return cached
        try:
            doc = json.loads(payload.decode())
            borrower_id = doc["borrower_id"]
            ct = serial.ciphertext_from_bytes(bytes.fromhex(doc["ciphertext_hex"]))
        except (KeyError, ValueError, FormatError) as exc:
            return envelope_json(MSG_ERROR, _error_payload("bad_submission", str(exc)), cid)
        try:
            raw = pipeline.evaluator_score(ct, self.bundle, self.ctx)
        except DlogOutOfRangeError as exc:
            return envelope_json(
                MSG_ERROR, _error_payload("dlog_out_of_range", f"borrower {borrower_id}: {exc}"), cid)
        report = pipeline.ScoreReport(
            borrower_id=borrower_id, raw_scores=raw,
            probabilities=pipeline.probabilities(raw, self.bundle.cfg))
        reply = envelope_json(MSG_SCORE, report.canonical_json().encode(), cid)
        with self._lock:
            self._replies.setdefault(cid, reply)
        return reply


# -- Client side ---------------------------------------------------------------

class WireClient:
    """One NDJSON request/reply connection with retry-on-connect."""

    def __init__(self, address: tuple[str, int], retries: int = 2, retry_delay_s: float = 0.2,
                 timeout_s: float = 30.0):
        self.address = (address[0], int(address[1]))
        last = None
        for attempt in range(retries + 1):
            try:
                self._sock = socket.create_connection(self.address, timeout=timeout_s)
                break
            except OSError as exc:
                last = exc
                if attempt < retries:
                    time.sleep(retry_delay_s)
        else:
            raise ServiceConnectionError(f"cannot reach {self.address[0]}:{self.address[1]}: {last}")
        self._rfile = self._sock.makefile("r", encoding="utf-8")

    def request(self, msg_type: str, payload: bytes, cid: str | None = None) -> tuple[str, bytes, str]:
        cid = cid or uuid.uuid4().hex
        line = envelope_json(msg_type, payload, cid)
        try:
            self._sock.sendall(line.encode() + b"\n")
            reply = self._rfile.readline()
        except OSError as exc:
            raise ServiceConnectionError(f"connection to {self.address} lost: {exc}") from exc
        if not reply:
            raise ServiceConnectionError(f"connection to {self.address} closed by peer")
        return envelope_parse(reply.strip())

    def hello(self) -> dict:
        msg_type, payload, _ = self.request(MSG_HELLO, b"")
        if msg_type != MSG_HELLO_ACK:
            raise ProtocolError(f"expected {MSG_HELLO_ACK}, got {msg_type}")
        return json.loads(payload.decode())

    def close(self):
        try:
            self._rfile.close()
            self._sock.close()
        except OSError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def fetch_client_bundle(address, token: str | None = None, retries: int = 2) -> pipeline.ClientBundle:
    with WireClient(address, retries=retries) as wc:
        body = json.dumps({"token": token}).encode() if token is not None else b"{}"
        msg_type, payload, _ = wc.request(MSG_GET_CLIENT_BUNDLE, body)
        _expect(msg_type, MSG_BUNDLE, payload)
        return pipeline.client_bundle_from_json(payload.decode())


def fetch_eval_bundle(address, retries: int = 2) -> pipeline.EvaluatorBundle:
    with WireClient(address, retries=retries) as wc:
        msg_type, payload, _ = wc.request(MSG_GET_EVAL_BUNDLE, b"")
        _expect(msg_type, MSG_BUNDLE, payload)
        return pipeline.evaluator_bundle_from_json(payload.decode())


def _expect(msg_type: str, wanted: str, payload: bytes):
    if msg_type == MSG_ERROR:
        doc = json.loads(payload.decode() or "{}")
        raise ProtocolError(f"service error {doc.get('code')}: {doc.get('message')}")
    if msg_type != wanted:
        raise ProtocolError(f"expected {wanted}, got {msg_type}")


def client_submit(evaluator_address, records, client_bundle: pipeline.ClientBundle,
                  ctx: GroupContext, rng, retries: int = 2) -> list[pipeline.ScoreReport]:
    """Encrypt records locally, submit them, collect reports by borrower id.

    records: iterable of (borrower_id, QuantizedRecord).  Encryption happens
    entirely on the client; only projected ciphertexts go over the wire.
    """
    items = sorted(records, key=lambda kv: str(kv[0]))
    if not items:
        return []
    session = uuid.uuid4().hex
    reports = []
    with WireClient(evaluator_address, retries=retries) as wc:
        wc.hello()
        for borrower_id, record in items:
            if not isinstance(record, QuantizedRecord):
                raise ProtocolError("records must be quantized before submission")
            ct = pipeline.client_encrypt(record, client_bundle, ctx, rng)
            body = json.dumps({
                "borrower_id": borrower_id,
                "ciphertext_hex": serial.ciphertext_to_bytes(ct).hex(),
            }, sort_keys=True).encode()
            msg_type, payload, _ = wc.request(MSG_SUBMIT, body, cid=f"{session}:{borrower_id}")
            _expect(msg_type, MSG_SCORE, payload)
            reports.append(pipeline.ScoreReport.from_json(payload.decode()))
    return reports
