"""Serve a scorer over the reward wire protocol."""

from __future__ import annotations

import argparse
import sys

from .app import DEFAULT_MAX_BATCH, create_server
from .models import ModelError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="reward-server",
        description="Score base64 PNGs over HTTP: POST /score, GET /health.")
    parser.add_argument("--model", default="constant:0.5",
                        help="constant:<x> stub or meangray (default %(default)s)")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765,
                        help="0 picks a free port (default %(default)s)")
    parser.add_argument("--max-batch", type=int, default=DEFAULT_MAX_BATCH,
                        help="largest accepted images list (default %(default)s)")
    args = parser.parse_args(argv)
    try:
        server = create_server(args.model, args.host, args.port,
                               args.max_batch)
    except (ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    host, port = server.server_address[:2]
    print(f"serving {server.model.spec} on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
