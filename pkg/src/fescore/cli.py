"""Operator command line: train, key management, encryption, scoring,
services and the benchmark harness.

Service addresses may come from flags, a JSON/TOML config file (--config)
or the environment variables FESCORE_AUTHORITY_ADDR / FESCORE_EVALUATOR_ADDR.
Exit codes: 0 success, 1 typed runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import base64
import json
import os
import sys

import numpy as np
import pandas as pd

from . import bench, network, pipeline, preprocess, serial, wire
from .errors import FescoreError
from .pairing import new_rng, setup


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    if path.endswith(".toml"):
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            try:
                import tomli as tomllib  # type: ignore
            except ModuleNotFoundError as exc:
                raise FescoreError("TOML config needs Python 3.11+ or the tomli package; "
                                   "use a JSON config instead") from exc
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _quant_config(args, file_cfg: dict) -> preprocess.QuantConfig:
    block = dict(file_cfg.get("quant", {}))
    if getattr(args, "scales", None) is not None:
        block.setdefault("scale_x", args.scales)
        block.setdefault("scale_p", args.scales)
        block.setdefault("scale_d", args.scales)
        block.update({k: args.scales for k in ("scale_x", "scale_p", "scale_d")})
    if getattr(args, "clip", None) is not None:
        block["clip"] = args.clip
    return preprocess.QuantConfig(
        scale_x=int(block.get("scale_x", 16)),
        scale_p=int(block.get("scale_p", 16)),
        scale_d=int(block.get("scale_d", 16)),
        clip=float(block.get("clip", 1.0)),
    )


def _addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"address must look like host:port, got {text!r}")
    return (host, int(port))


def _read_records_csv(path) -> tuple[list, np.ndarray]:
    frame = pd.read_csv(path)
    if "borrower_id" in frame.columns:
        ids = [str(v) for v in frame["borrower_id"]]
        feats = frame.drop(columns=["borrower_id"]).to_numpy(float)
    else:
        ids = [f"row{i:06d}" for i in range(len(frame))]
        feats = frame.to_numpy(float)
    return ids, feats


# -- Subcommands ----------------------------------------------------------------

def _cmd_train(args) -> int:
    file_cfg = _load_config(args.config)
    qcfg = _quant_config(args, file_cfg)
    raw = preprocess.RawDataset.from_csv(args.data, label_column=args.label_column)
    clean = preprocess.preprocess(raw)
    tcfg = network.TrainConfig(
        learning_rate=args.lr, batch_size=args.batch_size, epochs=args.epochs,
        hidden_dim=args.hidden_dim, seed=args.seed)
    result = network.train(clean, tcfg)
    preprocess.score_bound(qcfg, clean.n_features, args.hidden_dim)  # fail fast on bad scales
    network.save_model(args.out, result.params, qcfg=qcfg,
                       feature_names=clean.feature_names, label_classes=clean.label_classes)
    print(f"trained dims={result.params.dims} "
          f"loss {result.epoch_losses[0]:.4f} -> {result.epoch_losses[-1]:.4f}; wrote {args.out}")
    return 0


def _load_model_quantized(path):
    doc = network.load_model(path)
    if "quantized" not in doc:
        raise FescoreError("model file has no quantized export; re-run train")
    q = doc["quantized"]
    cfg = preprocess.QuantConfig.from_json(json.dumps(q["config"]))
    return doc, np.array(q["pr_int"], dtype=np.int64), np.array(q["d_int"], dtype=np.int64), cfg


def _cmd_keygen(args) -> int:
    _, pr_int, d_int, cfg = _load_model_quantized(args.model)
    ctx = setup()
    rng = new_rng(args.seed)
    auth, client, evaluator = pipeline.authority_setup(pr_int, d_int, cfg, ctx, rng)
    os.makedirs(args.out_dir, exist_ok=True)
    client_path = os.path.join(args.out_dir, "bundle.client")
    eval_path = os.path.join(args.out_dir, "bundle.eval")
    msk_path = os.path.join(args.out_dir, "authority.msk")
    with open(client_path, "w", encoding="utf-8") as fh:
        fh.write(pipeline.client_bundle_to_json(client) + "\n")
    with open(eval_path, "w", encoding="utf-8") as fh:
        fh.write(pipeline.evaluator_bundle_to_json(evaluator) + "\n")
    with open(msk_path, "wb") as fh:
        fh.write(serial.master_key_to_bytes(auth.msk))
    print(f"wrote {client_path}, {eval_path}, {msk_path}")
    return 0


def _cmd_encrypt(args) -> int:
    with open(args.client, encoding="utf-8") as fh:
        client = pipeline.client_bundle_from_json(fh.read())
    ids, feats = _read_records_csv(args.records)
    ctx = setup()
    rng = new_rng(args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        for bid, row in zip(ids, feats):
            rec = preprocess.quantize_record(row, client.cfg)
            ct = pipeline.client_encrypt(rec, client, ctx, rng)
            fh.write(json.dumps({
                "borrower_id": bid,
                "ct": base64.b64encode(serial.ciphertext_to_bytes(ct)).decode(),
            }, sort_keys=True) + "\n")
    print(f"encrypted {len(ids)} records -> {args.out}")
    return 0


def _cmd_score(args) -> int:
    with open(args.eval, encoding="utf-8") as fh:
        evaluator = pipeline.evaluator_bundle_from_json(fh.read())
    ctx = setup()
    items = []
    with open(args.cts, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                doc = json.loads(line)
                items.append((doc["borrower_id"],
                              serial.ciphertext_from_bytes(base64.b64decode(doc["ct"]))))
    reports = pipeline.score_batch(items, evaluator, ctx, workers=args.workers)
    with open(args.out, "w", encoding="utf-8") as fh:
        for rep in reports:
            fh.write(rep.to_json() + "\n")
    print(f"scored {len(reports)} borrowers -> {args.out}")
    return 0


def _cmd_serve_authority(args) -> int:
    _, pr_int, d_int, cfg = _load_model_quantized(args.model)
    ctx = setup()
    rng = new_rng(args.seed)
    _, client, evaluator = pipeline.authority_setup(pr_int, d_int, cfg, ctx, rng)
    service = wire.AuthorityService(
        client, evaluator,
        wire.ServiceConfig(host=args.host, port=args.port, client_token=args.client_token))
    print(f"authority listening on {service.address[0]}:{service.address[1]}", flush=True)
    service.serve_forever()
    return 0


def _cmd_serve_evaluator(args) -> int:
    ctx = setup()
    if args.eval:
        with open(args.eval, encoding="utf-8") as fh:
            bundle = pipeline.evaluator_bundle_from_json(fh.read())
    else:
        if not args.authority:
            raise FescoreError("serve-evaluator needs --eval FILE or --authority HOST:PORT")
        bundle = wire.fetch_eval_bundle(args.authority)
    service = wire.EvaluatorService(bundle, ctx, wire.ServiceConfig(host=args.host, port=args.port))
    print(f"evaluator listening on {service.address[0]}:{service.address[1]}", flush=True)
    service.serve_forever()
    return 0


def _cmd_submit(args) -> int:
    ctx = setup()
    rng = new_rng(args.seed)
    if not args.authority:
        raise FescoreError("submit needs --authority HOST:PORT (or FESCORE_AUTHORITY_ADDR)")
    if not args.evaluator:
        raise FescoreError("submit needs --evaluator HOST:PORT (or FESCORE_EVALUATOR_ADDR)")
    client = wire.fetch_client_bundle(args.authority, token=args.client_token)
    ids, feats = _read_records_csv(args.records)
    records = [(bid, preprocess.quantize_record(row, client.cfg)) for bid, row in zip(ids, feats)]
    reports = wire.client_submit(args.evaluator, records, client, ctx, rng)
    with open(args.out, "w", encoding="utf-8") as fh:
        for rep in reports:
            fh.write(rep.to_json() + "\n")
    print(f"submitted {len(reports)} records -> {args.out}")
    return 0


def _cmd_bench(args) -> int:
    file_cfg = _load_config(args.config)
    qcfg = _quant_config(args, file_cfg)
    plan = bench.BenchPlan(
        attribute_dims=tuple(int(v) for v in args.dims.split(",")),
        borrower_counts=tuple(int(v) for v in args.borrowers.split(",")),
        repetitions=args.reps, seed=args.seed, input_dim=args.input_dim)
    ctx = setup()
    result = bench.run_bench(plan, ctx, cfg=qcfg, out_csv=args.out,
                             log=lambda msg: print(msg, flush=True))
    for d, fit in sorted(result.fits.items()):
        if fit["r2"] is None:
            print(f"dim {d}: not enough borrower counts for a fit")
        else:
            print(f"dim {d}: encrypt_ms ~= {fit['slope_ms']:.2f}*borrowers + "
                  f"{fit['intercept_ms']:.2f}  (R^2 = {fit['r2']:.5f})")
    for d, borrowers, reason in result.failures:
        print(f"FAILED cell dim={d} borrowers={borrowers}: {reason}")
    if args.workers_sweep:
        counts = [int(v) for v in args.workers_sweep.split(",")]
        rows = bench.parallel_speedup(args.input_dim, plan.attribute_dims[0],
                                      plan.borrower_counts[-1], counts, ctx, cfg=qcfg,
                                      seed=args.seed)
        digests = {r["reports_sha256"] for r in rows}
        for r in rows:
            print(f"workers={r['workers']}: {r['wall_s']:.2f}s speedup={r['speedup']:.2f}")
        print(f"reports identical across worker counts: {len(digests) == 1}")
    print(f"wrote {len(result.rows)} rows -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fescore",
                                     description="Quadratic functional encryption credit scoring")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="preprocess a CSV dataset and train the square-activation net")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="defaulted")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--hidden-dim", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scales", type=int, default=None, help="set all three quantization scales")
    p.add_argument("--clip", type=float, default=None)
    p.add_argument("--config", default=None, help="JSON/TOML config file")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("keygen", help="derive role bundles from a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None, help="seeded keys are for testing only")
    p.set_defaults(func=_cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt preprocessed records with a client bundle")
    p.add_argument("--records", required=True, help="CSV of cleaned feature rows")
    p.add_argument("--client", required=True, help="bundle.client path")
    p.add_argument("--out", required=True, help="output ciphertext JSONL")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_encrypt)

    p = sub.add_parser("score", help="score encrypted records with an evaluator bundle")
    p.add_argument("--cts", required=True, help="ciphertext JSONL")
    p.add_argument("--eval", required=True, help="bundle.eval path")
    p.add_argument("--out", required=True, help="output report JSONL")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("serve-authority", help="serve role bundles over TCP")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7701)
    p.add_argument("--client-token", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_serve_authority)

    p = sub.add_parser("serve-evaluator", help="serve blind scoring over TCP")
    p.add_argument("--eval", default=None, help="bundle.eval path")
    p.add_argument("--authority", type=_addr,
                   default=os.environ.get("FESCORE_AUTHORITY_ADDR"))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7702)
    p.set_defaults(func=_cmd_serve_evaluator)

    p = sub.add_parser("submit", help="fetch bundle, encrypt records, submit for scoring")
    p.add_argument("--records", required=True)
    p.add_argument("--authority", type=_addr,
                   default=os.environ.get("FESCORE_AUTHORITY_ADDR"))
    p.add_argument("--evaluator", type=_addr,
                   default=os.environ.get("FESCORE_EVALUATOR_ADDR"))
    p.add_argument("--client-token", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_submit)

    p = sub.add_parser("bench", help="latency curves over (dim, borrowers) cells")
    p.add_argument("--dims", default="5,10,15,20,25,50")
    p.add_argument("--borrowers", default="1,10,50,100,200,500,1000")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input-dim", type=int, default=130)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--scales", type=int, default=None)
    p.add_argument("--clip", type=float, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--workers-sweep", default=None,
                   help="comma-separated worker counts for a scoring speedup table")
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if isinstance(getattr(args, "authority", None), str):
        args.authority = _addr(args.authority)
    if isinstance(getattr(args, "evaluator", None), str):
        args.evaluator = _addr(args.evaluator)
    try:
        return args.func(args)
    except FescoreError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
