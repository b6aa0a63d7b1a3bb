"""CLI: encode prompt documents and image manifests into ZSEB files."""

from __future__ import annotations

import argparse
import sys

from .errors import ExporterError
from .export import encode_images, encode_prompts
from .providers import make_provider


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeroleaf-export",
        description="Export text and image embeddings as ZSEB exchange files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--provider", default="stub",
                        help="'stub' or a pretrained CLIP model id")
    common.add_argument("--dim", type=int, default=8,
                        help="output dimension (stub provider only)")
    common.add_argument("--seed", type=int, default=0,
                        help="derivation seed (stub provider only)")
    common.add_argument("--out", required=True, help="output ZSEB path")

    p = sub.add_parser("prompts", parents=[common],
                       help="encode a prompt-definition document")
    p.add_argument("--prompts", required=True)
    p.set_defaults(func=_cmd_prompts)

    p = sub.add_parser("images", parents=[common],
                       help="encode an image-path manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--batch-size", type=int, default=16)
    p.set_defaults(func=_cmd_images)
    return parser


def _cmd_prompts(args) -> int:
    provider = make_provider(args.provider, dim=args.dim, seed=args.seed)
    n = encode_prompts(provider, args.prompts, args.out)
    print(f"prompts: {n} descriptions, dim {provider.dim}, "
          f"provider {provider.provider_id} -> {args.out}")
    return 0


def _cmd_images(args) -> int:
    provider = make_provider(args.provider, dim=args.dim, seed=args.seed)
    n = encode_images(provider, args.manifest, args.out, batch_size=args.batch_size)
    print(f"images: {n} items, dim {provider.dim}, "
          f"provider {provider.provider_id} -> {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ExporterError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IoFailure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
