"""Command-line interface.

    diffstego keygen    --out k.key
    diffstego capacity  img.png --mode cdjb
    diffstego hide      secret.png --out stego.png --kpri .. --kpub .. --key k.key
    diffstego reveal    stego.png --out secret.png --key k.key
    diffstego verify    stego.png --key k.key
    diffstego attack-sim stego.png replacement.png --key k.key
    diffstego histogram img.png --out hist.csv

Exit codes: 0 success/authentic, 1 usage error, 2 tampered, 3 malformed,
4 capacity error.  Option precedence: flags > STEGANO_BACKEND > config
file > defaults; config files are flat key=value lines.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import integrity, pipeline, rdh
from .chaos import RealKey, codeword_bits, encode_key
from .errors import (
    CapacityError,
    InvalidKeyError,
    MalformedStegoError,
    SteganoError,
)
from .images import PixelGrid, load_planes, partition, predict_errors

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TAMPERED = 2
EXIT_MALFORMED = 3
EXIT_CAPACITY = 4

_VERDICT_EXIT = {
    integrity.AUTHENTIC: EXIT_OK,
    integrity.TAMPERED: EXIT_TAMPERED,
    integrity.MALFORMED: EXIT_MALFORMED,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_config_file(path: str) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _build_pipeline_config(args) -> pipeline.PipelineConfig:
    cfg = pipeline.PipelineConfig()
    file_cfg = _read_config_file(args.config) if getattr(args, "config", None) else {}
    if "steps" in file_cfg:
        cfg.total_steps = int(file_cfg["steps"])
    if "beta_start" in file_cfg:
        cfg.beta_start = float(file_cfg["beta_start"])
    if "beta_end" in file_cfg:
        cfg.beta_end = float(file_cfg["beta_end"])
    if "sub_steps" in file_cfg:
        cfg.sub_steps = int(file_cfg["sub_steps"])
    if "backend" in file_cfg:
        cfg.backend = file_cfg["backend"]
    if "scale" in file_cfg:
        cfg.latent_scale = float(file_cfg["scale"])
    if "strict" in file_cfg:
        cfg.strict = file_cfg["strict"].lower() in ("1", "true", "yes")
    env_backend = os.environ.get("STEGANO_BACKEND")
    if env_backend:
        cfg.backend = env_backend
    # explicit flags win over everything
    for flag, attr in (
        ("steps", "total_steps"),
        ("beta_start", "beta_start"),
        ("beta_end", "beta_end"),
        ("sub_steps", "sub_steps"),
        ("backend", "backend"),
        ("scale", "latent_scale"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, attr, v)
    if getattr(args, "permissive", False):
        cfg.strict = False
    return cfg


def _load_key(args) -> RealKey | None:
    path = getattr(args, "key", None)
    if path is None:
        return None
    return RealKey.from_file_text(Path(path).read_text())


def _load_ledger(path: str | None) -> pipeline.SessionLedger:
    if path and Path(path).exists():
        data = json.loads(Path(path).read_text())
        return pipeline.SessionLedger(
            negotiations=data.get("negotiations", 0), images=data.get("images", 0)
        )
    return pipeline.SessionLedger()


def _save_ledger(path: str | None, ledger: pipeline.SessionLedger) -> None:
    if path:
        Path(path).write_text(json.dumps(ledger.report(), indent=2) + "\n")


def _cmd_keygen(args) -> int:
    if args.mu and args.a0:
        key = RealKey.from_decimals(args.mu, args.a0)
    else:
        import random

        rng = random.Random(args.seed) if args.seed is not None else None
        key = RealKey.random(rng)
    text = key.to_file_text()
    codeword = encode_key(key)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    print(f"codeword: {codeword.hex()} ({len(codeword_bits(codeword))} bits)")
    if args.session:
        ledger = _load_ledger(args.session)
        ledger.negotiate()
        _save_ledger(args.session, ledger)
    return EXIT_OK


def _cmd_capacity(args) -> int:
    planes = load_planes(args.image)
    per_plane = [rdh.image_capacity(p, args.mode) for p in planes]
    report = {
        "image": args.image,
        "mode": args.mode,
        "planes": len(planes),
        "eligible": sum(c["eligible"] for c in per_plane),
        "payload_bits": sum(c["gross"] for c in per_plane),
        "net_payload_bits": sum(c["net"] for c in per_plane),
        "required_per_bit": 5 if args.mode == rdh.CDJB else 1,
    }
    print(json.dumps(report))
    return EXIT_OK


def _cmd_hide(args) -> int:
    key = _load_key(args)
    mode = args.mode or ("real-key" if key is not None else None)
    if mode == "real-key" and key is None:
        print("error: --mode real-key requires --key", file=sys.stderr)
        return EXIT_USAGE
    if mode is None:
        mode = "real-key" if key is not None else "without-key"
    if mode == "without-key":
        key = None
        print(
            "warning: without-key scheme embeds conditions at sequential positions; "
            "anyone aware of the method can extract them",
            file=sys.stderr,
        )
    cfg = _build_pipeline_config(args)
    req = pipeline.HideRequest(
        secret=PixelGrid.load(args.secret),
        k_pri=args.kpri,
        k_pub=args.kpub,
        real_key=key,
        config=cfg,
    )
    stego, report = pipeline.hide_with_report(req)
    stego.save(args.out)
    report["stego"] = args.out
    if args.session:
        ledger = _load_ledger(args.session)
        ledger.record_hide()
        _save_ledger(args.session, ledger)
        report["session"] = ledger.report()
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report))
    return EXIT_OK


def _cmd_reveal(args) -> int:
    key = _load_key(args)
    cfg = _build_pipeline_config(args)
    stego = PixelGrid.load(args.stego)
    result = pipeline.reveal(stego, key, cfg)
    report = {
        "verdict": result.verdict,
        "k_pri": result.k_pri,
        "k_pub": result.k_pub,
        "secret": None,
    }
    if result.secret is not None:
        result.secret.save(args.out)
        report["secret"] = args.out
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report))
    return _VERDICT_EXIT[result.verdict]


def _cmd_verify(args) -> int:
    key = _load_key(args)
    verdict = integrity.verify(PixelGrid.load(args.stego), key)
    print(json.dumps({"stego": args.stego, "verdict": verdict}))
    return _VERDICT_EXIT[verdict]


def _cmd_attack_sim(args) -> int:
    key = _load_key(args)
    cfg = _build_pipeline_config(args)
    stego = PixelGrid.load(args.stego)
    replacement = PixelGrid.load(args.replacement)
    report = pipeline.substitution_attack(stego, replacement, key, cfg)
    print(json.dumps({"verdict": report.verdict, "detected": report.detected}))
    return EXIT_OK


def _cmd_histogram(args) -> int:
    grid = PixelGrid.load(args.image)
    pem = predict_errors(grid, partition(grid))
    lines = ["value,count"]
    for v in range(-255, 256):
        c = pem.hist_count(v)
        if c or v == 0:
            lines.append(f"{v},{c}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_pipeline_flags(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--backend", help="toy:<name> or external:<command>")
    p.add_argument("--steps", type=int, help="total schedule steps")
    p.add_argument("--beta-start", dest="beta_start", type=float)
    p.add_argument("--beta-end", dest="beta_end", type=float)
    p.add_argument("--sub-steps", dest="sub_steps", type=int)
    p.add_argument("--scale", type=float, help="secret latent scale")
    p.add_argument("--permissive", action="store_true", help="continue past failed verification")


def build_parser() -> _Parser:
    parser = _Parser(prog="diffstego", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a real key")
    p.add_argument("--out", help="key file to write")
    p.add_argument("--mu", help="15-decimal mu (with --a0)")
    p.add_argument("--a0", help="16-decimal a0 (with --mu)")
    p.add_argument("--seed", type=int, help="deterministic generation")
    p.add_argument("--session", help="session ledger JSON to update")
    p.set_defaults(func=_cmd_keygen)

    p = sub.add_parser("capacity", help="embedding capacity report")
    p.add_argument("image")
    p.add_argument("--mode", choices=[rdh.SEQUENTIAL, rdh.CDJB], default=rdh.CDJB)
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("hide", help="secret image -> stego image")
    p.add_argument("secret")
    p.add_argument("--out", required=True)
    p.add_argument("--kpri", required=True, help="private condition string")
    p.add_argument("--kpub", required=True, help="public condition string")
    p.add_argument("--key", help="real-key file (mu=..;a0=.. or 26-hex codeword)")
    p.add_argument("--mode", choices=["real-key", "without-key"])
    p.add_argument("--session", help="session ledger JSON to update")
    p.add_argument("--report", help="write the JSON run report here too")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_hide)

    p = sub.add_parser("reveal", help="stego image -> secret image")
    p.add_argument("stego")
    p.add_argument("--out", required=True)
    p.add_argument("--key", help="real-key file")
    p.add_argument("--report")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_reveal)

    p = sub.add_parser("verify", help="authenticity verdict for a stego image")
    p.add_argument("stego")
    p.add_argument("--key", help="real-key file")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("attack-sim", help="simulate a substitution attack")
    p.add_argument("stego")
    p.add_argument("replacement")
    p.add_argument("--key", help="real-key file")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_attack_sim)

    p = sub.add_parser("histogram", help="prediction-error histogram as CSV")
    p.add_argument("image")
    p.add_argument("--out", help="CSV file (stdout when omitted)")
    p.set_defaults(func=_cmd_histogram)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except MalformedStegoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except (InvalidKeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SteganoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
