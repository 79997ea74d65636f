"""Line-protocol perplexity server.

One UTF-8 sentence per input line, one decimal perplexity per output line in
the same order; the literal line "##END##" shuts the session down cleanly.
A line that cannot be scored gets the literal reply "ERR". Runs over
stdin/stdout by default or serves one TCP connection with --port.
"""

from __future__ import annotations

import argparse
import socket
import sys

from .scoring import ScoringSession

END_SENTINEL = "##END##"


def serve_stream(session: ScoringSession, reader, writer, log=sys.stderr) -> None:
    for raw in reader:
        line = raw.rstrip("\n")
        if line == END_SENTINEL:
            break
        try:
            # perplexity is always >= 1, so six decimals keep >= 7
            # significant digits
            reply = f"{session.sentence_ppl(line):.6f}"
        except Exception as exc:
            print(f"scoring failed: {exc}", file=log)
            reply = "ERR"
        writer.write(reply + "\n")
        writer.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pplserve",
        description="Score sentences by causal-LM perplexity over a line protocol.",
    )
    parser.add_argument(
        "--model", required=True,
        help="model directory or hub identifier resolvable by transformers",
    )
    parser.add_argument("--device", default="cpu")
    parser.add_argument(
        "--port", type=int,
        help="serve one TCP connection on this port instead of stdio (0 picks a free port)",
    )
    args = parser.parse_args(argv)

    try:
        from transformers.utils import logging as hf_logging

        hf_logging.set_verbosity_error()
        hf_logging.disable_progress_bar()
    except Exception:
        pass  # cosmetic only; stderr noise does not break the protocol
    try:
        session = ScoringSession(args.model, args.device)
    except Exception as exc:
        print(f"cannot load model {args.model!r}: {exc}", file=sys.stderr)
        return 1

    if args.port is None:
        serve_stream(session, sys.stdin, sys.stdout)
        return 0

    with socket.create_server(("127.0.0.1", args.port)) as server:
        print(f"listening on {server.getsockname()[1]}", file=sys.stderr, flush=True)
        conn, _ = server.accept()
        with conn:
            reader = conn.makefile("r", encoding="utf-8", newline="\n")
            writer = conn.makefile("w", encoding="utf-8", newline="\n")
            with reader, writer:
                serve_stream(session, reader, writer)
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
