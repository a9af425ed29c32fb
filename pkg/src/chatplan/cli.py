"""Command-line entry points.

Exit codes: 0 success, 1 usage, 2 validation failure, 3 runtime failure.
Failures print a machine-readable JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import zlib
from pathlib import Path

from .core.codecs import encode_plan_png, load_outline
from .core.types import ChatplanError, RoomsDocument, ValidationError

ENV_SESSION_DIR = "CHD_SESSION_DIR"
ENV_PORT = "CHD_PORT"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage failures exit 1, not argparse's 2
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chatplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-fixtures", help="generate synthetic annotated rasters")
    p.add_argument("out_dir")
    p.add_argument("--count", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("preprocess", help="annotated rasters -> training bundles")
    p.add_argument("rplan_dir")
    p.add_argument("out_dir")
    p.add_argument("--val-fraction", type=float, default=0.1)

    p = sub.add_parser("train", help="train the diffusion model")
    p.add_argument("data_dir", help="directory containing manifest.json")
    p.add_argument("--steps", type=int, default=4000)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--base-width", type=int, default=64)
    p.add_argument("--d-model", type=int, default=256)
    p.add_argument("--t-steps", type=int, default=1000)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--p-uncond", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=None, help="cap training samples")
    p.add_argument("--log-every", type=int, default=100)
    p.add_argument("--resume", help="checkpoint to continue from")

    p = sub.add_parser("generate", help="sample a plan for an outline")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--outline", required=True, help="outline PNG or polygon JSON file")
    p.add_argument("--rooms-json", help="rooms JSON file")
    p.add_argument("--text", help="natural-language description")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--guidance", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--out", default="plan.png")
    p.add_argument("--dump-session", help="directory for the editable session dump")
    p.add_argument("--llm-fixture", help="file with a canned completion (testing)")

    p = sub.add_parser("edit", help="edit a previously generated plan")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--session-dump", required=True)
    p.add_argument("--rooms-json")
    p.add_argument("--text")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--out", default="plan_edited.png")
    p.add_argument("--dump-session", help="directory for the new session dump")
    p.add_argument("--llm-fixture")

    p = sub.add_parser("eval", help="IoU of generated plans against a dataset")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--guidance", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=50)

    p = sub.add_parser("parse", help="text -> validated rooms JSON")
    p.add_argument("--text", required=True)
    p.add_argument("--previous", help="previous rooms JSON file (edit mode)")
    p.add_argument("--max-distance", type=int, default=3)
    p.add_argument("--llm-fixture")

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--port", type=int,
                   default=int(os.environ.get(ENV_PORT, "8080")))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--session-dir",
                   default=os.environ.get(ENV_SESSION_DIR, "sessions"))
    p.add_argument("--sample-steps", type=int, default=50)
    return parser


def _transport(fixture_path: str | None):
    from .prompting import FixtureTransport, HttpTransport

    if fixture_path:
        return FixtureTransport(Path(fixture_path).read_text())
    return HttpTransport()


def _resolve_document(args, previous: RoomsDocument | None = None) -> RoomsDocument:
    from .prompting import LlmConfig, extract
    from .prompting.validate import validate_document

    if bool(args.rooms_json) == bool(args.text):
        raise ValidationError("provide exactly one of --rooms-json or --text")
    if args.rooms_json:
        data = json.loads(Path(args.rooms_json).read_text())
        if "rooms" not in data:
            raise ValidationError('rooms JSON must carry a "rooms" key')
        return validate_document(data["rooms"]).document
    cfg = LlmConfig.from_env()
    result = extract(args.text, cfg, _transport(args.llm_fixture),
                     previous_document=previous)
    return result.document


def _dump_session(directory: str, document: RoomsDocument, plan, store) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "rooms.json").write_text(document.to_json(indent=2))
    (out / "plan.png").write_bytes(encode_plan_png(plan))
    store.save(out / "attention.pt")


def cmd_make_fixtures(args) -> dict:
    from .dataset import write_fixture_directory

    paths = write_fixture_directory(args.out_dir, count=args.count, seed=args.seed)
    return {"written": len(paths), "out_dir": args.out_dir}


def cmd_preprocess(args) -> dict:
    from .dataset import preprocess_directory

    manifest = preprocess_directory(args.rplan_dir, args.out_dir,
                                    val_fraction=args.val_fraction)
    count = json.loads(Path(manifest).read_text())["count"]
    return {"manifest": str(manifest), "samples": count}


def cmd_train(args) -> dict:
    import torch

    from .dataset import load_training_triples
    from .diffusion import DiffusionEngine, build_engine

    manifest = Path(args.data_dir) / "manifest.json"
    if not manifest.exists():
        raise ValidationError(f"no manifest.json in {args.data_dir}")
    triples = load_training_triples(manifest, split="train", limit=args.limit)
    if not triples:
        raise ValidationError("no training samples in the manifest")
    if args.resume:
        engine = DiffusionEngine.load(args.resume, lr=args.lr)
    else:
        engine = build_engine(
            base_width=args.base_width, d_model=args.d_model,
            t_steps=args.t_steps, p_uncond=args.p_uncond, lr=args.lr,
            seed=args.seed,
        )
    rng = torch.Generator().manual_seed(args.seed)
    start = time.time()
    last = float("nan")
    for step in range(1, args.steps + 1):
        idx = torch.randint(len(triples), (min(args.batch, len(triples)),),
                            generator=rng)
        batch = [triples[int(i)] for i in idx]
        last = engine.train_step(batch, rng)
        if args.log_every and step % args.log_every == 0:
            rate = step / (time.time() - start)
            print(f"step {step}/{args.steps} loss {last:.4f} "
                  f"({rate:.2f} steps/s)", file=sys.stderr)
    engine.save(args.ckpt)
    return {"ckpt": args.ckpt, "steps": args.steps, "final_loss": last,
            "samples": len(triples)}


def _load_outline_file(path: str):
    data = Path(path).read_bytes()
    return load_outline(data)


def cmd_generate(args) -> dict:
    import secrets

    from .diffusion import DiffusionEngine, SampleRequest

    engine = DiffusionEngine.load(args.ckpt)
    outline = _load_outline_file(args.outline)
    document = _resolve_document(args)
    seed = args.seed if args.seed is not None else secrets.randbits(31)
    request = SampleRequest(
        outline=outline, conditioning=engine.condition(document),
        seed=seed, guidance_scale=args.guidance, steps=args.steps,
    )
    plan, store = engine.sample(request)
    Path(args.out).write_bytes(encode_plan_png(plan))
    if args.dump_session:
        _dump_session(args.dump_session, document, plan, store)
    return {"out": args.out, "seed": seed,
            "rooms": document.to_json_dict()["rooms"]}


def cmd_edit(args) -> dict:
    from .diffusion import DiffusionEngine
    from .editing import AttentionStore, EditRequest, edit

    engine = DiffusionEngine.load(args.ckpt)
    dump = Path(args.session_dump)
    store = AttentionStore.load(dump / "attention.pt")
    previous = RoomsDocument.from_json((dump / "rooms.json").read_text())
    document = _resolve_document(args, previous=previous)
    plan, new_store = edit(
        engine,
        EditRequest(store=store, new_doc=document, tau=args.tau, seed=store.seed),
    )
    Path(args.out).write_bytes(encode_plan_png(plan))
    if args.dump_session:
        _dump_session(args.dump_session, document, plan, new_store)
    return {"out": args.out, "seed": store.seed, "tau": args.tau,
            "rooms": document.to_json_dict()["rooms"]}


def cmd_eval(args) -> dict:
    import json as _json

    from .core.codecs import decode_outline_png
    from .diffusion import DiffusionEngine, SampleRequest
    from .metrics import evaluate_run

    engine = DiffusionEngine.load(args.ckpt)
    manifest_path = Path(args.manifest)
    data_dir = manifest_path.parent
    manifest = _json.loads(manifest_path.read_text())
    out_dir = Path(args.out)
    pred_dir = out_dir / "predictions"
    pred_dir.mkdir(parents=True, exist_ok=True)
    produced = 0
    for entry in manifest["samples"]:
        if args.split and entry["split"] != args.split:
            continue
        if args.limit is not None and produced >= args.limit:
            break
        sample_id = entry["id"]
        sample_dir = data_dir / sample_id
        outline = decode_outline_png((sample_dir / "outline.png").read_bytes())
        document = RoomsDocument.from_json((sample_dir / "rooms.json").read_text())
        request = SampleRequest(
            outline=outline, conditioning=engine.condition(document),
            seed=zlib.crc32(sample_id.encode()), guidance_scale=args.guidance,
            steps=args.steps,
        )
        plan, _ = engine.sample(request)
        (pred_dir / f"{sample_id}.png").write_bytes(encode_plan_png(plan))
        produced += 1
    run = evaluate_run(manifest_path, pred_dir, out_dir=out_dir)
    return {"out": str(out_dir), "evaluated": run.evaluated,
            "mean_micro": run.mean_micro, "mean_macro": run.mean_macro,
            "missing": list(run.missing)}


def cmd_parse(args) -> dict:
    from .prompting import LlmConfig, extract

    previous = None
    if args.previous:
        previous = RoomsDocument.from_json(Path(args.previous).read_text())
    cfg = LlmConfig.from_env()
    result = extract(args.text, cfg, _transport(args.llm_fixture),
                     previous_document=previous, max_distance=args.max_distance)
    return {
        "rooms": result.document.to_json_dict()["rooms"],
        "corrections": [c._asdict() for c in result.corrections],
        "rejected": [r._asdict() for r in result.rejected],
    }


def cmd_serve(args) -> dict:
    import uvicorn

    from .diffusion import DiffusionEngine
    from .service import ServiceConfig, create_app

    engine = DiffusionEngine.load(args.ckpt)
    app = create_app(engine, args.session_dir,
                     config=ServiceConfig(sample_steps=args.sample_steps))
    uvicorn.run(app, host=args.host, port=args.port)
    return {}


COMMANDS = {
    "make-fixtures": cmd_make_fixtures,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "generate": cmd_generate,
    "edit": cmd_edit,
    "eval": cmd_eval,
    "parse": cmd_parse,
    "serve": cmd_serve,
}


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": {"kind": kind, "message": message}}),
          file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _fail(1, "usage", str(exc))
    try:
        result = COMMANDS[args.command](args)
    except ValidationError as exc:
        return _fail(2, "validation", str(exc))
    except ChatplanError as exc:
        return _fail(3, type(exc).__name__, str(exc))
    except FileNotFoundError as exc:
        return _fail(2, "missing_file", str(exc))
    except (NotImplementedError, RuntimeError, OSError) as exc:
        return _fail(3, type(exc).__name__, str(exc))
    print(json.dumps(result, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
