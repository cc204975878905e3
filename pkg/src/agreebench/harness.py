"""Scoring harness: native scorers, subprocess scorers, and evaluation.

External scorers speak newline-delimited JSON over stdin/stdout:
  handshake (scorer -> harness, first line): {"name": str, "perplexity": num|null}
  request   (harness -> scorer): {"id": int, "prefix": [str, ...], "candidates": [str, str]}
  response  (scorer -> harness): {"id": int, "logprobs": [num, num]}   # natural logs
  shutdown: the harness closes the scorer's stdin; the scorer exits 0.
"""

from __future__ import annotations

import json
import logging
import math
import os
import random
import shlex
import subprocess
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .miner import TestItem
from .ngram import KNModel, BOS

log = logging.getLogger(__name__)

OUTCOME_CORRECT = "correct"
OUTCOME_INCORRECT = "incorrect"
OUTCOME_TIE = "tie"
OUTCOME_ERROR = "error"


class ProtocolError(RuntimeError):
    """External scorer broke the wire protocol; evaluation cannot continue."""


@dataclass(frozen=True)
class EvalRecord:
    item_id: str
    construction_id: str
    kind: str
    n_attractors: int
    logprob_correct: float | None
    logprob_wrong: float | None
    outcome: str

    def to_json_obj(self) -> dict:
        return {
            "item_id": self.item_id,
            "construction_id": self.construction_id,
            "kind": self.kind,
            "n_attractors": self.n_attractors,
            "logprob_correct": self.logprob_correct,
            "logprob_wrong": self.logprob_wrong,
            "outcome": self.outcome,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "EvalRecord":
        return cls(
            item_id=obj["item_id"],
            construction_id=obj["construction_id"],
            kind=obj["kind"],
            n_attractors=obj["n_attractors"],
            logprob_correct=obj["logprob_correct"],
            logprob_wrong=obj["logprob_wrong"],
            outcome=obj["outcome"],
        )


def write_records(path: str, records: Iterable[EvalRecord]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_json_obj(), ensure_ascii=False))
            handle.write("\n")


def read_records(path: str) -> list[EvalRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(EvalRecord.from_json_obj(json.loads(line)))
    return records


class Scorer:
    """Maps (prefix, two candidate forms) to two natural-log probabilities."""

    def score(
        self, prefix: Sequence[str], candidates: tuple[str, str]
    ) -> tuple[float, float]:
        raise NotImplementedError

    def metadata(self) -> tuple[str, float | None]:
        """(name, reported validation perplexity or None)."""
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self) -> "Scorer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class KNScorer(Scorer):
    """Scores with the n-gram model, padding short prefixes with start
    symbols. Item prefixes genuinely begin at the sentence start, so padding
    is exact there; under a window smaller than the model order the padding
    overstates sentence-initial context."""

    def __init__(self, model: KNModel, name: str = "kn"):
        self.model = model
        self.name = name

    def score(self, prefix, candidates):
        history = list(prefix)
        if len(history) < self.model.order - 1:
            history = [BOS] * (self.model.order - 1 - len(history)) + history
        return (
            self.model.logprob(history, candidates[0]),
            self.model.logprob(history, candidates[1]),
        )

    def metadata(self):
        return (self.name, None)


class UnigramScorer(Scorer):
    """Add-one smoothed corpus frequencies; the prefix is ignored.

    Equal frequencies yield equal log probabilities, which the harness
    records as a tie (counted incorrect); unigram_choose keeps its own
    alphabetical tie-break for the standalone baseline decision.
    """

    def __init__(self, frequencies: Mapping[str, int], name: str = "unigram"):
        self.frequencies = dict(frequencies)
        self._log_z = math.log(sum(self.frequencies.values()) + len(self.frequencies) + 1)
        self.name = name

    def score(self, prefix, candidates):
        return (
            math.log(self.frequencies.get(candidates[0], 0) + 1) - self._log_z,
            math.log(self.frequencies.get(candidates[1], 0) + 1) - self._log_z,
        )

    def metadata(self):
        return (self.name, None)


class ExternalScorer(Scorer):
    """Subprocess scorer driven over the line protocol, strictly serialized."""

    def __init__(self, command: str | Sequence[str], env: Mapping[str, str] | None = None):
        args = shlex.split(command) if isinstance(command, str) else list(command)
        full_env = dict(os.environ)
        if env:
            full_env.update(env)
        self.command = command
        self._proc = subprocess.Popen(
            args,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            env=full_env,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._next_id = 0
        self._closed = False
        handshake = self._read_line("handshake")
        try:
            obj = json.loads(handshake)
        except json.JSONDecodeError as err:
            raise ProtocolError(f"handshake is not valid JSON: {handshake!r}") from err
        if not isinstance(obj, dict) or not isinstance(obj.get("name"), str):
            raise ProtocolError(f"handshake missing string 'name': {handshake!r}")
        ppl = obj.get("perplexity")
        if ppl is not None and not isinstance(ppl, (int, float)):
            raise ProtocolError(f"handshake 'perplexity' must be a number or null: {handshake!r}")
        if isinstance(ppl, float) and not math.isfinite(ppl):
            raise ProtocolError("handshake 'perplexity' is not finite")
        self._name = obj["name"]
        self._perplexity = float(ppl) if ppl is not None else None

    def _read_line(self, what: str) -> str:
        line = self._proc.stdout.readline()
        if line == "":
            code = self._proc.poll()
            raise ProtocolError(f"scorer exited while harness awaited {what} (status {code})")
        return line.rstrip("\n")

    def score(self, prefix, candidates):
        request_id = self._next_id
        self._next_id += 1
        request = {
            "id": request_id,
            "prefix": list(prefix),
            "candidates": [candidates[0], candidates[1]],
        }
        try:
            self._proc.stdin.write(json.dumps(request, ensure_ascii=False) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as err:
            raise ProtocolError(f"scorer pipe closed: {err}") from err
        line = self._read_line(f"response {request_id}")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            raise ProtocolError(f"malformed response line: {line!r}") from err
        if not isinstance(obj, dict) or obj.get("id") != request_id:
            raise ProtocolError(
                f"response id mismatch: expected {request_id}, got {obj.get('id')!r}"
            )
        logprobs = obj.get("logprobs")
        if (
            not isinstance(logprobs, list)
            or len(logprobs) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in logprobs)
        ):
            raise ProtocolError(f"response 'logprobs' must be two numbers: {line!r}")
        values = (float(logprobs[0]), float(logprobs[1]))
        if not all(math.isfinite(v) for v in values):
            raise ProtocolError(f"non-finite logprob in response: {line!r}")
        return values

    def metadata(self):
        return (self._name, self._perplexity)

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._proc.stdin.close()
        except OSError:
            pass
        try:
            code = self._proc.wait(timeout=60)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            raise ProtocolError("scorer did not exit after shutdown")
        if code != 0:
            raise ProtocolError(f"scorer exited with status {code}")


def external_scorer(
    command: str | Sequence[str], env: Mapping[str, str] | None = None
) -> ExternalScorer:
    return ExternalScorer(command, env=env)


def evaluate(
    testset: Sequence[TestItem], scorer: Scorer, window: int | None = None
) -> list[EvalRecord]:
    """Score every item; ties and per-item scorer failures count against the
    scorer downstream. A window of k truncates prefixes to their last k-1
    tokens before scoring. Protocol breakdowns abort the run."""
    if window is not None and window < 1:
        raise ValueError("window must be a positive integer")
    records = []
    errors = 0
    for item in testset:
        prefix = list(item.prefix)
        if window is not None:
            prefix = prefix[max(0, len(prefix) - (window - 1)) :]
        try:
            logprob_correct, logprob_wrong = scorer.score(
                prefix, (item.correct_form, item.wrong_form)
            )
            if not (math.isfinite(logprob_correct) and math.isfinite(logprob_wrong)):
                raise ValueError("scorer returned a non-finite log probability")
        except ProtocolError:
            raise
        except Exception as err:
            errors += 1
            log.warning("scorer failed on item %s: %s", item.item_id, err)
            records.append(
                EvalRecord(
                    item_id=item.item_id,
                    construction_id=item.construction_id,
                    kind=item.kind,
                    n_attractors=item.n_attractors,
                    logprob_correct=None,
                    logprob_wrong=None,
                    outcome=OUTCOME_ERROR,
                )
            )
            continue
        if logprob_correct > logprob_wrong:
            outcome = OUTCOME_CORRECT
        elif logprob_correct == logprob_wrong:
            outcome = OUTCOME_TIE
        else:
            outcome = OUTCOME_INCORRECT
        records.append(
            EvalRecord(
                item_id=item.item_id,
                construction_id=item.construction_id,
                kind=item.kind,
                n_attractors=item.n_attractors,
                logprob_correct=logprob_correct,
                logprob_wrong=logprob_wrong,
                outcome=outcome,
            )
        )
    if errors:
        log.warning("%d of %d items errored during evaluation", errors, len(testset))
    return records


def batch_evaluate(
    testset: Sequence[TestItem],
    scorers: Sequence[Scorer],
    windows: Mapping[str, int | None] | None = None,
) -> dict[str, list[EvalRecord]]:
    """Evaluate each scorer independently, keyed by scorer name."""
    if not scorers:
        raise ValueError("batch_evaluate requires at least one scorer")
    results: dict[str, list[EvalRecord]] = {}
    for scorer in scorers:
        name = scorer.metadata()[0]
        if name in results:
            raise ValueError(f"duplicate scorer name: {name!r}")
        window = windows.get(name) if windows else None
        results[name] = evaluate(testset, scorer, window=window)
    return results


def check_protocol_conformance(
    command: str | Sequence[str],
    n_requests: int = 100,
    seed: int = 0,
    env: Mapping[str, str] | None = None,
    words: Sequence[str] = ("alpha", "beta", "gamma", "delta"),
) -> list[str]:
    """Drive a scorer over randomized requests and report protocol violations.

    Checks: handshake shape, id matching in order, two finite logprobs per
    response, and clean exit (status 0) after stdin closes. Returns a list of
    violation descriptions; an empty list means full conformance.
    """
    rng = random.Random(seed)
    violations: list[str] = []
    scorer = None
    try:
        scorer = ExternalScorer(command, env=env)
    except ProtocolError as err:
        return [f"handshake: {err}"]
    try:
        for i in range(n_requests):
            prefix = [words[rng.randrange(len(words))] for _ in range(rng.randrange(1, 8))]
            candidates = (
                words[rng.randrange(len(words))],
                words[rng.randrange(len(words))],
            )
            try:
                scorer.score(prefix, candidates)
            except ProtocolError as err:
                violations.append(f"request {i}: {err}")
                return violations
    finally:
        try:
            if scorer is not None:
                scorer.close()
        except ProtocolError as err:
            violations.append(f"shutdown: {err}")
    return violations
