"""gan-enhancer CLI: train on a measured/missing PSTK pair, infer on stacks.

The infer subcommand matches the template the reconstruction pipeline's
external enhancer invokes:

    gan-enhancer infer --model MODEL_DIR --in IN.pstk --out OUT
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .inference import enhance_stack_file
from .training import PROFILES, TrainConfig, train


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gan-enhancer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the enhancer on two PSTK stacks")
    p.add_argument("--measured", required=True, help="clean-distribution PSTK")
    p.add_argument("--missing", required=True, help="degraded-distribution PSTK")
    p.add_argument("--out", required=True, help="model bundle directory")
    p.add_argument("--profile", choices=sorted(PROFILES), default="cells")
    p.add_argument("--epochs", type=int)
    p.add_argument("--patch", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--lambda-cycle", type=float, dest="lambda_cycle")
    p.add_argument("--steps-per-epoch", type=int, dest="steps_per_epoch")
    p.add_argument("--lr", type=float)

    p = sub.add_parser("infer", help="enhance a PSTK stack with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tile", type=int, default=512,
                   help="tile size for frames larger than this budget")

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cfg = TrainConfig(**PROFILES[args.profile])
            overrides = {k: getattr(args, k) for k in
                         ("epochs", "patch", "seed", "lambda_cycle",
                          "steps_per_epoch", "lr")
                         if getattr(args, k) is not None}
            cfg = replace(cfg, **overrides)
            out = train(args.measured, args.missing, cfg, args.out)
            print(f"model bundle written to {out}")
        else:
            stack = enhance_stack_file(args.model, args.input, args.out,
                                       tile=args.tile)
            print(f"enhanced {stack.n_frames} frames -> {args.out}")
        return 0
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
