"""Request loop speaking the scoring wire protocol on stdin/stdout.

handshake:  {"name": "tinylm", "perplexity": <validation ppl>}
request:    {"id": int, "prefix": [str, ...], "candidates": [str, str]}
response:   {"id": int, "logprobs": [float, float]}   (natural logs)

Requests are answered strictly in order. Candidates outside the vocabulary
are scored through the unknown marker and flagged on stderr. EOF on stdin
ends the loop with status 0.
"""

from __future__ import annotations

import json
import sys

from .model import UNK, TinyLM, load_checkpoint


def score_candidates(model: TinyLM, prefix: list[str], candidates: list[str]):
    logprobs = model.next_token_logprobs(prefix)
    out = []
    for candidate in candidates:
        if candidate not in model.stoi:
            print(f"unknown candidate scored as {UNK}: {candidate}", file=sys.stderr)
        out.append(float(logprobs[model.token_id(candidate)].item()))
    return out


def serve(checkpoint_path: str, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    model, val_ppl = load_checkpoint(checkpoint_path)
    stdout.write(json.dumps({"name": "tinylm", "perplexity": val_ppl}) + "\n")
    stdout.flush()
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        logprobs = score_candidates(model, request["prefix"], request["candidates"])
        stdout.write(json.dumps({"id": request["id"], "logprobs": logprobs}) + "\n")
        stdout.flush()
    return 0
