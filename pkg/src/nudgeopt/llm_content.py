"""Turn numeric content policies into chat-completion prompts and requests.

The instruction and prompt templates are fixed strings with substitution
slots for the campaign topic, the content type, and the opinion expressed on
an integer scale. Opinions from the dynamics live on [0, 1] and are mapped
onto the prompt scale by a linear transform that aligns the extreme points
and the center; a zero-centered scale is the default since it elicits the
correct valence most reliably.
"""

from __future__ import annotations

import json
import os
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

__all__ = [
    "PromptSpec",
    "EndpointConfig",
    "EndpointError",
    "build_instruction",
    "build_prompt",
    "scale_opinion",
    "generate_content",
    "render_policy",
]

_INSTRUCTION = (
    "You are going to help create content for a social media account.  "
    "You will be asked to write persuasive content that has the given "
    "opinion on the given topic.  Return only the text of the content."
)

_PROMPT_TEMPLATE = (
    'Write a {content} about "{topic}" that has an opinion of {opinion}, '
    "where {umin} is total disagreement and {umax} is total agreement."
)

DEFAULT_SCALE = (-100, 100)


@dataclass(frozen=True)
class PromptSpec:
    """One piece of content to request: topic, type, and scaled opinion."""

    topic: str
    content_type: str
    opinion: int
    scale: tuple[int, int] = DEFAULT_SCALE

    def __post_init__(self):
        lo, hi = self.scale
        if not lo < hi:
            raise ValueError(f"scale lower bound {lo} must be below upper bound {hi}")
        if not lo <= self.opinion <= hi:
            raise ValueError(f"opinion {self.opinion} outside scale [{lo}, {hi}]")


@dataclass
class EndpointConfig:
    """Chat-completion endpoint wiring; the API key comes from the environment."""

    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-mini"
    api_key_env: str = "LLM_API_KEY"
    timeout: float = 30.0
    dry_run: bool = True


class EndpointError(RuntimeError):
    """Request could not produce a completion; carries the HTTP status if any."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


def build_instruction() -> str:
    """The fixed system instruction for content generation."""
    return _INSTRUCTION


def build_prompt(spec: PromptSpec) -> str:
    """The user prompt with topic, content type, opinion, and scale filled in."""
    return _PROMPT_TEMPLATE.format(content=spec.content_type, topic=spec.topic,
                                   opinion=spec.opinion, umin=spec.scale[0],
                                   umax=spec.scale[1])


def scale_opinion(u: float, dst: tuple[int, int] = DEFAULT_SCALE) -> int:
    """Map an opinion from [0, 1] onto an integer scale, preserving center
    and extremes: 0 -> lo, 0.5 -> midpoint, 1 -> hi."""
    lo, hi = dst
    if not lo < hi:
        raise ValueError("destination scale must have lo < hi")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"opinion {u} outside [0, 1]")
    return int(round(lo + u * (hi - lo)))


def _urllib_transport(url: str, headers: dict, payload: dict, timeout: float):
    data = json.dumps(payload).encode("utf-8")
    req = urllib.request.Request(url, data=data, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.status, json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read().decode("utf-8", errors="replace")


def generate_content(spec: PromptSpec, endpoint: EndpointConfig, transport=None) -> str:
    """Produce content for one prompt.

    With ``dry_run`` the assembled instruction and prompt are returned as-is
    and nothing touches the network. Otherwise a single chat-completion
    request is issued with the instruction as the system message and the
    prompt as the user message; the completion text is returned verbatim.

    ``transport`` is a callable ``(url, headers, payload, timeout) ->
    (status, body)``, injectable for tests; the default posts JSON over
    urllib.
    """
    instruction = build_instruction()
    prompt = build_prompt(spec)
    if endpoint.dry_run:
        return f"{instruction}\n\n{prompt}"

    key = os.environ.get(endpoint.api_key_env, "")
    if not key:
        raise EndpointError(
            f"credential environment variable {endpoint.api_key_env!r} is not set")
    url = endpoint.base_url.rstrip("/") + "/chat/completions"
    headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}
    payload = {
        "model": endpoint.model,
        "messages": [
            {"role": "system", "content": instruction},
            {"role": "user", "content": prompt},
        ],
    }
    send = transport or _urllib_transport
    status, body = send(url, headers, payload, endpoint.timeout)
    if not 200 <= status < 300:
        raise EndpointError(f"chat completion request failed with HTTP {status}",
                            status=status)
    try:
        text = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise EndpointError("response carried no completion text") from None
    if not text:
        raise EndpointError("endpoint returned an empty completion")
    return text


def render_policy(steps, topic: str, content_type: str,
                  scale: tuple[int, int] = DEFAULT_SCALE,
                  endpoint: EndpointConfig | None = None, stride: int = 1,
                  max_concurrency: int = 4, transport=None) -> list[dict]:
    """Render a (time, opinion) policy into prompt rows, optionally completed.

    ``steps`` is an iterable of (t, u) pairs with u in [0, 1]; ``stride``
    subsamples long trajectories. When an endpoint with ``dry_run=False`` is
    given, completions are fetched concurrently (bounded by
    ``max_concurrency``) and rows come back in time order regardless of
    completion order.
    """
    if stride < 1:
        raise ValueError("stride must be at least 1")
    picked = list(steps)[::stride]
    rows = []
    for t, u in picked:
        opinion = scale_opinion(float(u), scale)
        spec = PromptSpec(topic=topic, content_type=content_type,
                          opinion=opinion, scale=scale)
        rows.append({"t": t, "opinion_scaled": opinion, "prompt": build_prompt(spec),
                     "_spec": spec})
    live = endpoint is not None and not endpoint.dry_run
    if live:
        with ThreadPoolExecutor(max_workers=max(1, max_concurrency)) as pool:
            completions = list(pool.map(
                lambda spec: generate_content(spec, endpoint, transport),
                [row["_spec"] for row in rows]))
        for row, text in zip(rows, completions):
            row["completion"] = text
    for row in rows:
        del row["_spec"]
    return rows
