"""Benchmark harness: encryption/scoring latency curves over (dim, borrowers).

Each cell times the client encryption phase (encrypt + project) and the
evaluator scoring phase (pairing decrypt + bounded dlog) for a batch of
synthetic borrowers, repeated ``repetitions`` times with fresh seeded data.
Results land in a CSV with the frozen schema

    dim,borrowers,rep,encrypt_ms,score_ms,keygen_ms,project_ms,decrypt_ms,dlog_ms

plus a least-squares summary of encryption time against borrower count per
dimension.  Cells whose derived score bound exceeds the dlog ceiling are
flagged as failures and skipped; the run continues.
"""

from __future__ import annotations

import csv
import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from . import pipeline
from .errors import BoundConfigError, DimensionMismatch, FescoreError
from .pairing import GroupContext
from .preprocess import QuantConfig, _max_quantized, quantize_record

CSV_HEADER = ["dim", "borrowers", "rep", "encrypt_ms", "score_ms",
              "keygen_ms", "project_ms", "decrypt_ms", "dlog_ms"]


@dataclass(frozen=True)
class BenchPlan:
    attribute_dims: tuple[int, ...] = (5, 10, 15, 20, 25, 50)
    borrower_counts: tuple[int, ...] = (1, 10, 50, 100, 200, 500, 1000)
    repetitions: int = 5
    seed: int = 0
    input_dim: int = 130

    def __post_init__(self):
        if not self.attribute_dims or not self.borrower_counts:
            raise DimensionMismatch("benchmark plan must name at least one cell")
        if min(self.attribute_dims) < 1 or min(self.borrower_counts) < 1:
            raise DimensionMismatch("dims and borrower counts must be positive")
        if self.repetitions < 1:
            raise DimensionMismatch("repetitions must be >= 1")
        if max(self.attribute_dims) > self.input_dim:
            raise DimensionMismatch("attribute dim cannot exceed the input dim")


@dataclass
class BenchRow:
    dim: int
    borrowers: int
    rep: int
    encrypt_ms: float
    score_ms: float
    keygen_ms: float
    project_ms: float
    decrypt_ms: float
    dlog_ms: float

    def as_csv(self) -> list:
        return [self.dim, self.borrowers, self.rep,
                f"{self.encrypt_ms:.3f}", f"{self.score_ms:.3f}", f"{self.keygen_ms:.3f}",
                f"{self.project_ms:.3f}", f"{self.decrypt_ms:.3f}", f"{self.dlog_ms:.3f}"]


@dataclass
class BenchResult:
    rows: list[BenchRow] = field(default_factory=list)
    failures: list[tuple[int, int, str]] = field(default_factory=list)  # (dim, borrowers, reason)
    fits: dict[int, dict] = field(default_factory=dict)                 # dim -> slope/intercept/r2


def _synthetic_weights(n: int, d: int, cfg: QuantConfig, rng: np.random.Generator):
    p_max = _max_quantized(cfg.scale_p, cfg.clip)
    d_max = _max_quantized(cfg.scale_d, cfg.clip)
    pr_int = rng.integers(-p_max, p_max + 1, size=(n, d))
    d_int = rng.integers(-d_max, d_max + 1, size=(d, 2))
    return pr_int, d_int


def run_bench(plan: BenchPlan, ctx: GroupContext, cfg: QuantConfig = QuantConfig(),
              out_csv=None, rng_factory=None, log=None) -> BenchResult:
    """Execute the plan cell by cell (sequentially, to keep timings clean)."""
    from .pairing import new_rng
    result = BenchResult()
    say = log or (lambda msg: None)
    for d in plan.attribute_dims:
        per_count_encrypt: dict[int, list[float]] = {}
        for borrowers in plan.borrower_counts:
            cell_failed = None
            for rep in range(plan.repetitions):
                seed = hash((plan.seed, d, borrowers, rep)) & 0x7FFFFFFF
                nprng = np.random.default_rng(seed)
                crypto_rng = (rng_factory or new_rng)(seed)
                pr_int, d_int = _synthetic_weights(plan.input_dim, d, cfg, nprng)
                try:
                    t0 = time.perf_counter()
                    _, client, evaluator = pipeline.authority_setup(pr_int, d_int, cfg, ctx, crypto_rng)
                    keygen_s = time.perf_counter() - t0
                    timings: dict = {}
                    cts = []
                    for b in range(borrowers):
                        rec = quantize_record(nprng.uniform(0.0, 1.0, plan.input_dim), cfg)
                        cts.append(pipeline.client_encrypt(rec, client, ctx, crypto_rng, timings=timings))
                    for ct in cts:
                        pipeline.evaluator_score(ct, evaluator, ctx, timings=timings)
                except (BoundConfigError, FescoreError) as exc:
                    cell_failed = f"{type(exc).__name__}: {exc}"
                    break
                row = BenchRow(
                    dim=d, borrowers=borrowers, rep=rep,
                    encrypt_ms=timings.get("encrypt_s", 0.0) * 1e3,
                    score_ms=(timings.get("decrypt_s", 0.0) + timings.get("dlog_s", 0.0)) * 1e3,
                    keygen_ms=keygen_s * 1e3,
                    project_ms=timings.get("project_s", 0.0) * 1e3,
                    decrypt_ms=timings.get("decrypt_s", 0.0) * 1e3,
                    dlog_ms=timings.get("dlog_s", 0.0) * 1e3,
                )
                result.rows.append(row)
                per_count_encrypt.setdefault(borrowers, []).append(row.encrypt_ms + row.project_ms)
            if cell_failed:
                result.failures.append((d, borrowers, cell_failed))
                say(f"cell dim={d} borrowers={borrowers} FAILED: {cell_failed}")
            else:
                say(f"cell dim={d} borrowers={borrowers} done")
        result.fits[d] = _linear_fit(per_count_encrypt)
    if out_csv is not None:
        write_csv(out_csv, result.rows)
    return result


def _linear_fit(per_count: dict[int, list[float]]) -> dict:
    """Least-squares line of mean encryption-phase time against borrowers."""
    counts = sorted(per_count)
    if len(counts) < 2:
        return {"slope_ms": None, "intercept_ms": None, "r2": None}
    xs = np.array(counts, dtype=float)
    ys = np.array([float(np.mean(per_count[c])) for c in counts])
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return {"slope_ms": float(slope), "intercept_ms": float(intercept), "r2": r2}


def write_csv(path, rows: list[BenchRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())


def parallel_speedup(input_dim: int, d: int, borrowers: int, worker_counts,
                     ctx: GroupContext, cfg: QuantConfig = QuantConfig(), seed: int = 0,
                     rng_factory=None) -> list[dict]:
    """Scoring wall time per worker count over one fixed encrypted batch.

    The reports must be identical whatever the worker count; the returned
    rows carry a digest over the canonical report lines so callers can
    assert it.
    """
    from .pairing import new_rng
    if min(worker_counts) < 1:
        raise DimensionMismatch("worker counts must be >= 1")
    nprng = np.random.default_rng(seed)
    crypto_rng = (rng_factory or new_rng)(seed)
    pr_int, d_int = _synthetic_weights(input_dim, d, cfg, nprng)
    _, client, evaluator = pipeline.authority_setup(pr_int, d_int, cfg, ctx, crypto_rng)
    items = []
    for b in range(borrowers):
        rec = quantize_record(nprng.uniform(0.0, 1.0, input_dim), cfg)
        items.append((f"b{b:05d}", pipeline.client_encrypt(rec, client, ctx, crypto_rng)))
    rows = []
    base_wall = None
    for workers in worker_counts:
        t0 = time.perf_counter()
        reports = pipeline.score_batch(items, evaluator, ctx, workers=workers)
        wall = time.perf_counter() - t0
        digest = hashlib.sha256("\n".join(r.canonical_json() for r in reports).encode()).hexdigest()
        if base_wall is None:
            base_wall = wall
        rows.append({"workers": int(workers), "wall_s": wall,
                     "speedup": base_wall / wall if wall > 0 else float("inf"),
                     "reports_sha256": digest})
    return rows
