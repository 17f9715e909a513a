"""Three-role scoring pipeline: trusted authority, client, untrusted evaluator.

The authority owns the master key, projects it through the quantized
first-layer weights and derives one function key per label from the
diagonalized output columns.  The client receives the master key and the
first-layer weights, encrypts each record against itself and sends only the
projected ciphertext out.  The evaluator holds the function keys and learns
exactly the two raw integer scores per borrower, nothing else.
"""

from __future__ import annotations

import base64
import json
import multiprocessing
import time
from dataclasses import dataclass

import numpy as np

from . import serial, sgp
from .errors import ConfigDigestMismatch, DimensionMismatch, DlogOutOfRangeError
from .network import NetworkParams, export_quantized
from .pairing import GroupContext, dlog_bounded, get_table, setup
from .preprocess import QuantConfig, QuantizedRecord, _max_quantized, dequantize_score, quantize_record, score_bound

BUNDLE_FORMAT = "fescore-bundle"
BUNDLE_VERSION = 1


@dataclass
class AuthorityState:
    msk: sgp.MasterKey
    proj_sec_key: sgp.MasterKey
    fe_keys: tuple[sgp.FeKey, ...]
    diags: tuple[sgp.FMatrix, ...]
    quant_digest: str


@dataclass
class ClientBundle:
    msk: sgp.MasterKey
    pr_int: tuple[tuple[int, ...], ...]
    cfg: QuantConfig

    @property
    def input_dim(self) -> int:
        return len(self.pr_int)

    @property
    def proj_dim(self) -> int:
        return len(self.pr_int[0])


@dataclass
class EvaluatorBundle:
    fe_keys: tuple[sgp.FeKey, ...]
    diags: tuple[sgp.FMatrix, ...]
    dlog_bound: int
    cfg: QuantConfig

    @property
    def proj_dim(self) -> int:
        return self.diags[0].dim

    @property
    def n_labels(self) -> int:
        return len(self.fe_keys)


@dataclass
class ScoreReport:
    borrower_id: int | str
    raw_scores: tuple[int, int]
    probabilities: tuple[float, float]
    timings: dict | None = None

    def canonical_json(self) -> str:
        """Deterministic content form: identical inputs give identical bytes
        regardless of worker count or transport (timings excluded)."""
        return json.dumps(
            {
                "borrower_id": self.borrower_id,
                "raw_scores": list(self.raw_scores),
                "probabilities": list(self.probabilities),
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    def to_json(self) -> str:
        doc = json.loads(self.canonical_json())
        if self.timings is not None:
            doc["timings"] = self.timings
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ScoreReport":
        doc = json.loads(text)
        return cls(
            borrower_id=doc["borrower_id"],
            raw_scores=tuple(int(v) for v in doc["raw_scores"]),
            probabilities=tuple(float(v) for v in doc["probabilities"]),
            timings=doc.get("timings"),
        )


def authority_setup(pr_int, d_int, cfg: QuantConfig, ctx: GroupContext, rng,
                    ) -> tuple[AuthorityState, ClientBundle, EvaluatorBundle]:
    """Generate and partition all key material along the trust boundaries."""
    pr_rows = [tuple(int(v) for v in row) for row in np.asarray(pr_int)]
    d_rows = [tuple(int(v) for v in row) for row in np.asarray(d_int)]
    n = len(pr_rows)
    d = len(pr_rows[0])
    if len(d_rows) != d:
        raise DimensionMismatch(f"first-layer output dim {d} != output-weight rows {len(d_rows)}")
    n_labels = len(d_rows[0])
    if n_labels != 2:
        raise DimensionMismatch(f"pipeline expects exactly 2 labels, got {n_labels}")

    msk = sgp.generate_master_key(n, ctx, rng)
    proj = sgp.project_secret_key(msk, pr_rows)
    diags = tuple(sgp.FMatrix.diagonal([d_rows[j][i] for j in range(d)]) for i in range(n_labels))
    fe_keys = tuple(sgp.derive_key(proj, diag, ctx) for diag in diags)
    bound = score_bound(cfg, n, d)

    auth = AuthorityState(msk=msk, proj_sec_key=proj, fe_keys=fe_keys, diags=diags,
                          quant_digest=cfg.digest())
    client = ClientBundle(msk=msk, pr_int=tuple(pr_rows), cfg=cfg)
    evaluator = EvaluatorBundle(fe_keys=fe_keys, diags=diags, dlog_bound=bound, cfg=cfg)
    return auth, client, evaluator


def client_encrypt(record: QuantizedRecord, bundle: ClientBundle, ctx: GroupContext, rng,
                   timings: dict | None = None) -> sgp.Ciphertext:
    """Encrypt a quantized record against itself and project to dimension d."""
    if record.config_id != bundle.cfg.digest():
        raise ConfigDigestMismatch(
            "record was quantized under a different configuration than the bundle")
    if record.dim != bundle.input_dim:
        raise DimensionMismatch(
            f"record has {record.dim} entries, bundle expects {bundle.input_dim}")
    msg_bound = _max_quantized(bundle.cfg.scale_x, bundle.cfg.clip)
    t0 = time.perf_counter()
    c = sgp.encrypt(record.values, record.values, bundle.msk, ctx, rng, message_bound=msg_bound)
    t1 = time.perf_counter()
    proj = sgp.project_encryption(c, bundle.pr_int)
    t2 = time.perf_counter()
    if timings is not None:
        timings["encrypt_s"] = timings.get("encrypt_s", 0.0) + (t1 - t0)
        timings["project_s"] = timings.get("project_s", 0.0) + (t2 - t1)
    return proj


def evaluator_score(proj_c: sgp.Ciphertext, bundle: EvaluatorBundle, ctx: GroupContext,
                    timings: dict | None = None) -> tuple[int, int]:
    """Decrypt one raw integer score per label; sees only ciphertext and keys."""
    scores = []
    for i, (fek, diag) in enumerate(zip(bundle.fe_keys, bundle.diags)):
        t0 = time.perf_counter()
        gt_val = sgp.decrypt_pairing(proj_c, fek, diag)
        t1 = time.perf_counter()
        try:
            v = dlog_bounded(gt_val, ctx.gt, bundle.dlog_bound)
        except DlogOutOfRangeError as exc:
            raise DlogOutOfRangeError(f"label {i}: {exc}") from exc
        t2 = time.perf_counter()
        if timings is not None:
            timings["decrypt_s"] = timings.get("decrypt_s", 0.0) + (t1 - t0)
            timings["dlog_s"] = timings.get("dlog_s", 0.0) + (t2 - t1)
        scores.append(v)
    return tuple(scores)


def probabilities(raw_scores, cfg: QuantConfig) -> tuple[float, float]:
    """Softmax over the dequantized scores, max-stabilized."""
    z = np.array([dequantize_score(int(v), cfg) for v in raw_scores], dtype=float)
    z -= z.max()
    e = np.exp(z)
    p = e / e.sum()
    return (float(p[0]), float(p[1]))


def end_to_end(record_float, params: NetworkParams, cfg: QuantConfig, ctx: GroupContext, rng,
               borrower_id: int | str = 0) -> ScoreReport:
    """Full trip: quantize, set up roles, encrypt, blind-score, normalize."""
    timings: dict = {}
    t0 = time.perf_counter()
    pr_int, d_int = export_quantized(params, cfg)
    record = quantize_record(record_float, cfg)
    timings["quantize_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    _, client, evaluator = authority_setup(pr_int, d_int, cfg, ctx, rng)
    timings["keygen_s"] = time.perf_counter() - t0
    proj_c = client_encrypt(record, client, ctx, rng, timings=timings)
    raw = evaluator_score(proj_c, evaluator, ctx, timings=timings)
    probs = probabilities(raw, cfg)
    return ScoreReport(borrower_id=borrower_id, raw_scores=raw, probabilities=probs,
                       timings={k: round(v * 1000.0, 3) for k, v in timings.items()})


# -- Batch scoring with a worker pool -----------------------------------------

_POOL_STATE: dict = {}


def _pool_score_one(item):
    borrower_id, ct_bytes = item
    bundle: EvaluatorBundle = _POOL_STATE["bundle"]
    ctx: GroupContext = _POOL_STATE["ctx"]
    ct = serial.ciphertext_from_bytes(ct_bytes)
    raw = evaluator_score(ct, bundle, ctx)
    probs = probabilities(raw, bundle.cfg)
    return ScoreReport(borrower_id=borrower_id, raw_scores=raw, probabilities=probs)


def score_batch(items, bundle: EvaluatorBundle, ctx: GroupContext, workers: int = 1,
                ) -> list[ScoreReport]:
    """Score [(borrower_id, Ciphertext), ...]; output ordered by borrower id.

    Scoring is pure per borrower, so any worker count gives byte-identical
    reports.  Workers fork after the dlog table is warmed, sharing it
    copy-on-write.
    """
    items = sorted(items, key=lambda kv: str(kv[0]))
    if workers <= 1 or len(items) <= 1:
        out = []
        for borrower_id, ct in items:
            raw = evaluator_score(ct, bundle, ctx)
            out.append(ScoreReport(borrower_id=borrower_id, raw_scores=raw,
                                   probabilities=probabilities(raw, bundle.cfg)))
        return out
    get_table(ctx.gt, bundle.dlog_bound)  # warm before fork
    payload = [(bid, serial.ciphertext_to_bytes(ct)) for bid, ct in items]
    _POOL_STATE["bundle"] = bundle
    _POOL_STATE["ctx"] = ctx
    try:
        mp = multiprocessing.get_context("fork")
        with mp.Pool(processes=workers) as pool:
            return list(pool.imap(_pool_score_one, payload))
    finally:
        _POOL_STATE.clear()


# -- Role-bundle files ---------------------------------------------------------

def client_bundle_to_json(bundle: ClientBundle) -> str:
    doc = {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "role": "client",
        "input_dim": bundle.input_dim,
        "proj_dim": bundle.proj_dim,
        "quant_config": json.loads(bundle.cfg.to_json()),
        "quant_digest": bundle.cfg.digest(),
        "master_key": base64.b64encode(serial.master_key_to_bytes(bundle.msk)).decode(),
        "pr_int": [list(row) for row in bundle.pr_int],
    }
    assert "fe_keys" not in doc  # clients never hold function keys
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def client_bundle_from_json(text: str) -> ClientBundle:
    doc = json.loads(text)
    _check_bundle_header(doc, "client")
    msk = serial.master_key_from_bytes(base64.b64decode(doc["master_key"]))
    return ClientBundle(
        msk=msk,
        pr_int=tuple(tuple(int(v) for v in row) for row in doc["pr_int"]),
        cfg=QuantConfig.from_json(json.dumps(doc["quant_config"])),
    )


def evaluator_bundle_to_json(bundle: EvaluatorBundle) -> str:
    doc = {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "role": "evaluator",
        "proj_dim": bundle.proj_dim,
        "labels": bundle.n_labels,
        "dlog_bound": int(bundle.dlog_bound),
        "quant_config": json.loads(bundle.cfg.to_json()),
        "quant_digest": bundle.cfg.digest(),
        "fe_keys": [base64.b64encode(serial.fe_key_to_bytes(k)).decode() for k in bundle.fe_keys],
        "diag_weights": [[int(f.entries[i][i]) for i in range(f.dim)] for f in bundle.diags],
    }
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    # Trust boundary: nothing master-key shaped may ever reach the evaluator.
    assert "master_key" not in doc and "master_key" not in text
    return text


def evaluator_bundle_from_json(text: str) -> EvaluatorBundle:
    doc = json.loads(text)
    _check_bundle_header(doc, "evaluator")
    fe_keys = tuple(serial.fe_key_from_bytes(base64.b64decode(b)) for b in doc["fe_keys"])
    diags = tuple(sgp.FMatrix.diagonal(w) for w in doc["diag_weights"])
    return EvaluatorBundle(
        fe_keys=fe_keys,
        diags=diags,
        dlog_bound=int(doc["dlog_bound"]),
        cfg=QuantConfig.from_json(json.dumps(doc["quant_config"])),
    )


def _check_bundle_header(doc: dict, role: str) -> None:
    if doc.get("format") != BUNDLE_FORMAT or doc.get("version") != BUNDLE_VERSION:
        raise serial.FormatError("not a recognizable bundle file")
    if doc.get("role") != role:
        raise serial.FormatError(f"expected a {role} bundle, found {doc.get('role')!r}")
