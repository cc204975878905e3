#!/usr/bin/env python3
"""Echo-style conformance stub for the scoring wire protocol.

Answers every request with log probabilities derived deterministically from
the request id. Fault-injection flags let the harness tests exercise each
protocol violation:

  --nan-at N        respond with a NaN logprob to request N
  --wrong-id-at N   respond to request N with a shifted id
  --garbage-at N    emit a non-JSON line for request N
  --die-at N        exit (status 3) instead of answering request N
  --exit-code C     exit status after stdin closes (default 0)
  --no-perplexity   handshake with "perplexity": null
"""

import argparse
import json
import sys


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--nan-at", type=int, default=-1)
    parser.add_argument("--wrong-id-at", type=int, default=-1)
    parser.add_argument("--garbage-at", type=int, default=-1)
    parser.add_argument("--die-at", type=int, default=-1)
    parser.add_argument("--exit-code", type=int, default=0)
    parser.add_argument("--no-perplexity", action="store_true")
    args = parser.parse_args()

    handshake = {
        "name": "stub",
        "perplexity": None if args.no_perplexity else 123.4,
    }
    print(json.dumps(handshake), flush=True)

    n = 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        if n == args.die_at:
            return 3
        if n == args.garbage_at:
            print("this is not json", flush=True)
        elif n == args.wrong_id_at:
            print(
                json.dumps({"id": request["id"] + 1000, "logprobs": [-1.0, -2.0]}),
                flush=True,
            )
        elif n == args.nan_at:
            print(json.dumps({"id": request["id"], "logprobs": [float("nan"), -2.0]}), flush=True)
        else:
            a = -1.0 - (request["id"] % 7) * 0.25
            b = -1.0 - (request["id"] % 5) * 0.5
            print(json.dumps({"id": request["id"], "logprobs": [a, b]}), flush=True)
        n += 1
    return args.exit_code


if __name__ == "__main__":
    sys.exit(main())
