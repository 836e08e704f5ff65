"""Command-line entry point: ``pinchlab <command> [options]``.

Every JSON report carries a ``manifest`` (command, argv, input digests,
seed, search config, version) so reruns are reproducible byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .curvature import invariant_summary
from .errors import PinchlabError
from .fileio import (
    builder_catalog,
    dumps,
    immersion_from_obj,
    is_immersion,
    read_source,
    tensor_from_obj,
)
from .frames import DEFAULT_SEED, SearchConfig
from .identities import run_identity_suite
from .isotropic import cone_minimum
from .pinching import (
    SWEEP_ETA_MAX,
    TheoremId,
    check_intrinsic,
    check_submanifold,
    implication_sweep,
    threshold_table,
    verify_implication,
)

SEED_ENV = "PINCHLAB_SEED"


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    seed: int
    config: dict
    inputs: dict[str, str] = field(default_factory=dict)
    version: str = __version__
    wall_time: float | None = None

    def to_dict(self) -> dict:
        d = {
            "command": self.command,
            "argv": self.argv,
            "inputs": self.inputs,
            "seed": self.seed,
            "config": self.config,
            "version": self.version,
        }
        if self.wall_time is not None:
            d["wall_time"] = self.wall_time
        return d


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def resolve_seed(cli_seed: int | None, fallback: int | None = None) -> int:
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise PinchlabError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_SEED if fallback is None else fallback


def load_config(args) -> SearchConfig:
    cfg, file_seed = SearchConfig(), None
    if args.config:
        obj, _ = read_source(args.config)
        if not isinstance(obj, dict):
            raise PinchlabError(f"{args.config}: search config must be a JSON object")
        try:
            cfg = SearchConfig.from_dict(obj)
        except (TypeError, ValueError) as e:
            raise PinchlabError(f"{args.config}: {e}") from None
        file_seed = obj.get("seed")
    return cfg.with_seed(resolve_seed(args.seed, file_seed))


def parse_range(text: str) -> list[int]:
    """'4..12' -> 4, ..., 12; '4,6,8' and '5' also accepted."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N, N..M or N,M,..., got {text!r}") from None


# commands ---------------------------------------------------------------

def _input(args, manifest: RunManifest):
    if not args.input:
        raise PinchlabError(f"{args.command} needs --input")
    obj, src = read_source(args.input)
    manifest.inputs[args.input] = sha256_file(args.input)
    return obj, src


def cmd_invariants(args, config, manifest):
    obj, src = _input(args, manifest)
    return {"summary": invariant_summary(tensor_from_obj(obj, src), config)}


def cmd_certify(args, config, manifest):
    obj, src = _input(args, manifest)
    R = tensor_from_obj(obj, src)
    return {"certificate": cone_minimum(R, args.cone, config)}


def cmd_check_theorem(args, config, manifest):
    th = TheoremId.parse(args.id)
    obj, src = _input(args, manifest)
    if th.intrinsic:
        if is_immersion(obj):
            raise PinchlabError(f"{th.value} is intrinsic but the input describes an immersion")
        report = check_intrinsic(tensor_from_obj(obj, src), th, config)
    else:
        if not is_immersion(obj):
            raise PinchlabError(f"{th.value} needs an immersion input with \"ambient\" and \"B\"")
        ambient, B = immersion_from_obj(obj, src, config)
        report = check_submanifold(ambient, B, th, config, eps=args.eps)
    return {"report": report}


def cmd_verify_implication(args, config, manifest):
    th = TheoremId.parse(args.id)
    if args.corpus:
        obj, _ = read_source(args.corpus)
        manifest.inputs[args.corpus] = sha256_file(args.corpus)
        if not isinstance(obj, dict) or "n" not in obj or "count" not in obj:
            raise PinchlabError(f'{args.corpus}: corpus needs "n" and "count"')
        ns = obj["n"] if isinstance(obj["n"], list) else [obj["n"]]
        reports = []
        for n in ns:
            reports += implication_sweep(
                th, int(n), int(obj["count"]), seed=int(obj.get("seed", config.seed)),
                config=config, eta_max=float(obj.get("eta_max", SWEEP_ETA_MAX)),
            )
    else:
        obj, src = _input(args, manifest)
        if th.intrinsic:
            data = tensor_from_obj(obj, src)
        else:
            data = immersion_from_obj(obj, src, config)
        reports = [verify_implication(data, th, config, eps=args.eps)]
    return {
        "reports": reports,
        "inconsistent": sum(not r.consistent for r in reports),
        "nonvacuous": sum(r.hypothesis.strict for r in reports),
    }


def cmd_verify_identities(args, config, manifest):
    reports = run_identity_suite(args.trials, tuple(args.dim), config.seed)
    return {"reports": reports, "all_passed": all(r.passed for r in reports)}


def cmd_thresholds(args, config, manifest):
    return {"rows": threshold_table(args.n, args.codim)}


def cmd_builders(args, config, manifest):
    return {"builders": builder_catalog()}


COMMANDS = {
    "invariants": cmd_invariants,
    "certify": cmd_certify,
    "check-theorem": cmd_check_theorem,
    "verify-implication": cmd_verify_implication,
    "verify-identities": cmd_verify_identities,
    "thresholds": cmd_thresholds,
    "builders": cmd_builders,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pinchlab", description="Curvature pinching and isotropic-curvature toolkit.")
    p.add_argument("--version", action="version", version=f"pinchlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"search seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    common.add_argument("--config", help="JSON file with search settings")
    common.add_argument("--threads", type=int, default=None, help="cap BLAS threads")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--timing", action="store_true", help="record wall time in the manifest")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("invariants", parents=[common], help="sectional extremes, scalar and Ricci data")
    s.add_argument("--input", required=True)
    s = sub.add_parser("certify", parents=[common], help="minimize the isotropic functional for a cone")
    s.add_argument("--input", required=True)
    s.add_argument("--cone", default="pic", type=str.lower, choices=["pic", "pic1", "pic2"])
    s = sub.add_parser("check-theorem", parents=[common], help="evaluate one pinching hypothesis")
    s.add_argument("--id", required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--eps", type=float, default=None, help="epsilon for EPSILON")
    s = sub.add_parser("verify-implication", parents=[common], help="hypothesis plus promised cone certificate")
    s.add_argument("--id", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--input")
    g.add_argument("--corpus", help='JSON {"n": ..., "count": ..., "eta_max": ..., "seed": ...}')
    s.add_argument("--eps", type=float, default=None)
    s = sub.add_parser("verify-identities", parents=[common], help="seeded residual checks of every identity")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--dim", type=int, nargs="+", default=[4, 5, 6])
    s = sub.add_parser("thresholds", parents=[common], help="table of pinching constants")
    s.add_argument("--n", type=parse_range, default=list(range(4, 13)))
    s.add_argument("--codim", type=int, default=1, help="N - n for the |B|^2 bounds")
    s.add_argument("--format", choices=["json", "csv"], default="json")
    sub.add_parser("builders", parents=[common], help="list tensor builders and parameters")
    return p


def _csv(rows: list[dict]) -> str:
    cols = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _threads(n):
    if n is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        config = load_config(args)
        manifest = RunManifest(args.command, argv, config.seed, config.to_dict())
        if args.config:
            manifest.inputs[args.config] = sha256_file(args.config)
        with _threads(args.threads):
            body = COMMANDS[args.command](args, config, manifest)
        if getattr(args, "format", "json") == "csv":
            text = _csv(body["rows"])
        else:
            if args.timing:
                manifest.wall_time = time.perf_counter() - t0
            text = dumps({"manifest": manifest, **body})
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    except (PinchlabError, ValueError, KeyError, TypeError, json.JSONDecodeError) as e:
        print(f"pinchlab {args.command}: error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
