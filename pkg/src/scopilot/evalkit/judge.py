"""Client for the external generation-quality judge.

The scoring prompt is fixed verbatim; only the four material slots vary.
Responses are parsed from the [Scores] block, cached on disk by input hash,
and never fetched over the network when a cached transcript exists.
"""

import hashlib
import json
import logging
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx

from ..errors import JudgeParseError, TransportError, ValidationError

log = logging.getLogger(__name__)

JUDGE_PROMPT_TEMPLATE = """You are a senior computer science scholar. Please evaluate the AI-generated content using the ground truth as reference.

Evaluate the following five dimensions by comparing the AI-generated content with the ground truth:

[Detailed Evaluation]
1. Content Relevance:
- Key strengths:
- Main gaps:
- Comparison with ground truth:

2. Logical Coherence:
- Key strengths:
- Main gaps:
- Comparison with ground truth:

3. Academic Standards:
- Key strengths:
- Main gaps:
- Comparison with ground truth:

4. Background Completeness:
- Key strengths:
- Main gaps:
- Comparison with ground truth:

5. Innovation Statement:
- Key strengths:
- Main gaps:
- Comparison with ground truth:
[End Evaluation]

[Improvement Suggestions]
1.
2.
3.
[End Suggestions]

Based on your above analysis, provide numerical scores in the following format:
[Scores]
Relevance: <score>/5
Coherence: <score>/5
Academic: <score>/5
Completeness: <score>/5
Innovation: <score>/5
Total: <sum>/25
[End Scores]

Below are the materials for evaluation:

Paper Title:
{title}

Abstract:
{abstract}

Ground Truth Content:
{ground_truth}

AI Generated Content:
{generated_text}

Remember to first provide detailed evaluation, then improvement suggestions, and finally the numerical scores in the exact format specified above."""

_DIMENSIONS = ("relevance", "coherence", "academic", "completeness", "innovation")


@dataclass
class JudgeScores:
    relevance: int
    coherence: int
    academic: int
    completeness: int
    innovation: int
    total: int

    def components(self) -> tuple[int, ...]:
        return tuple(getattr(self, d) for d in _DIMENSIONS)

    def to_json(self) -> dict:
        return {d: getattr(self, d) for d in _DIMENSIONS} | {"total": self.total}


@dataclass
class JudgeConfig:
    endpoint: str
    model: str
    credential_env: str = "SCOPILOT_JUDGE_KEY"
    max_retries: int = 2
    timeout: float = 30.0
    cache_dir: str | None = None
    concurrency: int = 2


def parse_scores(text: str) -> tuple[JudgeScores, str | None]:
    """Extract the [Scores] block; returns (scores, consistency warning)."""
    m = re.search(r"\[Scores\](.*?)\[End Scores\]", text, re.DOTALL)
    if not m:
        raise JudgeParseError("response has no [Scores]...[End Scores] block", raw=text)
    block = m.group(1)
    values = {}
    for dim in _DIMENSIONS:
        dm = re.search(rf"{dim}:\s*(\d+)\s*/\s*5", block, re.IGNORECASE)
        if not dm:
            raise JudgeParseError(f"score block is missing the {dim} line", raw=block)
        v = int(dm.group(1))
        if not 1 <= v <= 5:
            raise JudgeParseError(f"{dim} score {v} outside 1..5", raw=block)
        values[dim] = v
    tm = re.search(r"total:\s*(\d+)\s*/\s*25", block, re.IGNORECASE)
    if not tm:
        raise JudgeParseError("score block is missing the total line", raw=block)
    stated = int(tm.group(1))
    computed = sum(values.values())
    warning = None
    if stated != computed:
        warning = f"stated total {stated} != component sum {computed}; using {computed}"
    return JudgeScores(**values, total=computed), warning


def render_prompt(title: str, abstract: str, ground_truth: str, generated_text: str) -> str:
    for name, value in (
        ("title", title), ("abstract", abstract),
        ("ground_truth", ground_truth), ("generated_text", generated_text),
    ):
        if not value.strip():
            raise ValidationError(f"judge input {name} must be non-empty")
    return JUDGE_PROMPT_TEMPLATE.format(
        title=title, abstract=abstract,
        ground_truth=ground_truth, generated_text=generated_text,
    )


def _cache_path(config: JudgeConfig, payload: dict) -> str | None:
    if not config.cache_dir:
        return None
    key = hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()
    return os.path.join(config.cache_dir, f"{key}.json")


def _fetch(prompt: str, config: JudgeConfig, transport=None) -> str:
    credential = os.environ.get(config.credential_env)
    if not credential:
        raise TransportError(
            f"credential environment variable {config.credential_env} is not set", retries=0
        )
    body = {"model": config.model, "messages": [{"role": "user", "content": prompt}]}
    headers = {"Authorization": f"Bearer {credential}"}
    last = None
    with httpx.Client(transport=transport, timeout=config.timeout) as client:
        for attempt in range(config.max_retries + 1):
            try:
                r = client.post(config.endpoint, json=body, headers=headers)
                r.raise_for_status()
                return r.json()["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last = exc
                log.warning("judge call attempt %d failed: %s", attempt + 1, exc)
    raise TransportError(f"judge endpoint failed: {last}", retries=config.max_retries)


def judge(
    title: str,
    abstract: str,
    ground_truth: str,
    generated_text: str,
    config: JudgeConfig,
    transport=None,
) -> JudgeScores:
    prompt = render_prompt(title, abstract, ground_truth, generated_text)
    payload = {
        "model": config.model, "title": title, "abstract": abstract,
        "ground_truth": ground_truth, "generated_text": generated_text,
    }
    cache = _cache_path(config, payload)
    if cache and os.path.exists(cache):
        with open(cache, encoding="utf-8") as f:
            content = json.load(f)["response"]
    else:
        content = _fetch(prompt, config, transport=transport)
        if cache:
            os.makedirs(config.cache_dir, exist_ok=True)
            tmp = cache + ".tmp"
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump({"response": content}, f)
            os.replace(tmp, cache)
    scores, warning = parse_scores(content)
    if warning:
        log.warning("judge response for %r: %s", title, warning)
    return scores


def judge_many(items, config: JudgeConfig, transport=None) -> list[JudgeScores]:
    """items: iterables of (title, abstract, ground_truth, generated_text)."""
    items = list(items)
    with ThreadPoolExecutor(max_workers=max(config.concurrency, 1)) as pool:
        futs = [pool.submit(judge, *item, config, transport) for item in items]
        return [f.result() for f in futs]
