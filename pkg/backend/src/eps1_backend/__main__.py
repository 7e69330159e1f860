import argparse
import sys

from .models import load_model
from .server import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="eps1-backend",
        description="Serve a noise estimator over the EPS1 stdin/stdout protocol",
    )
    parser.add_argument(
        "--model",
        default="echo-zero",
        help="echo-zero | pseudo[:seed] | torchscript:<path>",
    )
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)
    model = load_model(args.model, device=args.device)
    return serve(sys.stdin.buffer, sys.stdout.buffer, model)


if __name__ == "__main__":
    sys.exit(main())
