"""Chat-completion clients: a cached/retrying base, a deterministic mock,
and a thin HTTP client for OpenAI-style endpoints.

Responses are cached on disk keyed by sha256(model | temperature | prompt),
so identical requests are served without a second network call and a whole
evaluation report can be regenerated from a warm cache.  Cache writes are
atomic (temp file + rename), making clients safe for bounded concurrency.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass

from .errors import (
    DegenerateOutputError,
    TransientClientError,
    TransportError,
)


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_delay: float = 0.1
    max_delay: float = 2.0

    def delay(self, attempt: int) -> float:
        return min(self.base_delay * (2 ** attempt), self.max_delay)


class LLMClient(ABC):
    """Base client: subclasses implement a single uncached completion."""

    def __init__(self, model: str = "", temperature: float = 0.0,
                 cache_dir=None, retry: RetryPolicy | None = None,
                 max_concurrency: int = 4):
        self.model = model
        self.temperature = temperature
        self.cache_dir = str(cache_dir) if cache_dir is not None else None
        self.retry = retry or RetryPolicy()
        self.max_concurrency = max_concurrency
        self._lock = threading.Lock()
        self.calls = 0          # completions actually executed (cache misses)
        self.requests = 0       # complete() invocations

    @property
    def client_id(self) -> str:
        return f"{type(self).__name__}:{self.model}"

    def cache_key(self, prompt: str) -> str:
        payload = f"{self.model}\x00{self.temperature!r}\x00{prompt}"
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def _cache_path(self, key: str) -> str | None:
        if self.cache_dir is None:
            return None
        return os.path.join(self.cache_dir, key[:2], key + ".json")

    def _cache_read(self, key: str) -> str | None:
        path = self._cache_path(key)
        if path is None or not os.path.exists(path):
            return None
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)["text"]

    def _cache_write(self, key: str, prompt: str, text: str) -> None:
        path = self._cache_path(key)
        if path is None:
            return
        os.makedirs(os.path.dirname(path), exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump({"key": key, "model": self.model,
                       "temperature": self.temperature,
                       "prompt": prompt, "text": text}, fh)
        os.replace(tmp, path)

    def complete(self, prompt: str) -> str:
        """Cached, retrying completion; the only public entry point."""
        with self._lock:
            self.requests += 1
        key = self.cache_key(prompt)
        cached = self._cache_read(key)
        if cached is not None:
            return cached
        last: Exception | None = None
        for attempt in range(self.retry.max_attempts):
            try:
                with self._lock:
                    self.calls += 1
                text = self._complete_once(prompt)
                break
            except TransientClientError as exc:
                last = exc
                time.sleep(self.retry.delay(attempt))
        else:
            raise TransportError(
                f"{self.client_id}: {self.retry.max_attempts} attempts failed") from last
        if not text or not text.strip():
            raise DegenerateOutputError(f"{self.client_id}: empty completion")
        self._cache_write(key, prompt, text)
        return text

    @abstractmethod
    def _complete_once(self, prompt: str) -> str:
        """One uncached completion attempt; may raise TransientClientError."""


class OpenAIStyleClient(LLMClient):
    """Minimal chat-completions client for OpenAI-compatible endpoints.

    The API key comes from the environment (FACEMOTION_API_KEY); nothing in
    the repository talks to a network unless this client is selected.
    """

    API_KEY_VAR = "FACEMOTION_API_KEY"

    def __init__(self, model: str, endpoint: str = "https://api.openai.com/v1/chat/completions",
                 temperature: float = 0.0, timeout: float = 60.0, **kwargs):
        super().__init__(model=model, temperature=temperature, **kwargs)
        self.endpoint = endpoint
        self.timeout = timeout

    def _complete_once(self, prompt: str) -> str:
        import requests

        key = os.environ.get(self.API_KEY_VAR)
        if not key:
            raise TransportError(f"set {self.API_KEY_VAR} to use {type(self).__name__}")
        try:
            resp = requests.post(
                self.endpoint,
                headers={"Authorization": f"Bearer {key}"},
                json={"model": self.model, "temperature": self.temperature,
                      "messages": [{"role": "user", "content": prompt}]},
                timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransientClientError(str(exc)) from exc
        if resp.status_code in (429, 500, 502, 503, 504):
            raise TransientClientError(f"HTTP {resp.status_code}")
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        return resp.json()["choices"][0]["message"]["content"]


# --- Deterministic mock -----------------------------------------------------

_FACIAL_KEYWORDS = (
    "brow", "brows", "eye", "eyes", "eyelid", "eyelids", "gaze", "blink",
    "lip", "lips", "mouth", "jaw", "cheek", "cheeks", "nose", "nostril",
    "chin", "head", "frown", "smile", "squint", "wink", "stare", "face",
    "facial", "forehead", "dimple", "tongue",
)

_PLAN_PHRASES = (
    "the brows draw together into a tight furrow",
    "the inner brows raise slowly",
    "the eyes widen and hold",
    "the eyelids tighten into a squint",
    "a rapid blink breaks into a steady stare",
    "the gaze drifts down and to the left",
    "the gaze snaps back to center",
    "the lip corners pull into a slight smile",
    "the lips press together firmly",
    "the jaw drops a little before closing",
    "the head tilts right a few degrees",
    "the head turns slowly toward the left",
    "a small nod punctuates the moment",
    "the nostrils flare briefly",
    "the cheeks raise, crinkling the lower eyelids",
)


def _stable_int(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def _content_words(text: str) -> list[str]:
    return re.findall(r"[a-z']+", text.lower())


def _token_f1(a: str, b: str) -> float:
    wa, wb = _content_words(a), _content_words(b)
    if not wa or not wb:
        return 0.0
    common = 0
    pool = list(wb)
    for w in wa:
        if w in pool:
            pool.remove(w)
            common += 1
    if common == 0:
        return 0.0
    precision, recall = common / len(wa), common / len(wb)
    return 2 * precision * recall / (precision + recall)


class MockClient(LLMClient):
    """Deterministic stand-in that understands the stock prompt templates.

    Every handler is a pure function of the prompt text, so repeated runs
    (and cache-less runs) produce byte-identical outputs.  It dispatches on
    the sentinel first lines of the templates shipped under assets/templates.
    """

    def __init__(self, model: str = "mock", failures_before_success: int = 0, **kwargs):
        super().__init__(model=model, **kwargs)
        self._failures_left = failures_before_success

    def _complete_once(self, prompt: str) -> str:
        with self._lock:
            if self._failures_left > 0:
                self._failures_left -= 1
                raise TransientClientError("mock transient failure")
        for sentinel, handler in _HANDLERS:
            if sentinel in prompt:
                return handler(prompt)
        # fallback: echo a deterministic description
        return _plan(prompt)


def _field(prompt: str, name: str) -> str:
    match = re.search(rf"^{name}: (.*)$", prompt, re.MULTILINE)
    return match.group(1).strip() if match else ""


def _block(prompt: str, header: str) -> list[str]:
    """Lines between `header` and the next blank line (or end)."""
    lines = prompt.splitlines()
    try:
        start = next(i for i, line in enumerate(lines) if line.strip() == header)
    except StopIteration:
        return []
    out = []
    for line in lines[start + 1:]:
        if not line.strip():
            break
        out.append(line.strip())
    return out


def _situations(prompt: str) -> str:
    emotion = re.search(r"feel (\w+)", prompt).group(1)
    count = int(re.search(r"exactly (\d+)", prompt).group(1))
    scenes = (
        "waiting alone at {place} as {event}",
        "standing in {place} while {event}",
        "arriving at {place} just as {event}",
        "sitting quietly in {place} when {event}",
        "walking through {place} where {event}",
    )
    places = ("a crowded station", "an empty office", "the kitchen at dawn",
              "a narrow stairwell", "the old family house")
    events = ("a stranger calls their name", "the lights suddenly go out",
              "a long-awaited letter arrives", "their phone starts ringing",
              "someone drops a glass nearby")
    out = []
    for i in range(count):
        scene = scenes[i % len(scenes)]
        place = places[(i // len(scenes)) % len(places)]
        event = events[(i + _stable_int(emotion)) % len(events)]
        out.append(f"{i + 1}. A person who would feel {emotion} is "
                   + scene.format(place=place, event=event)
                   + f" (variation {i + 1}).")
    return "\n".join(out)


def _persona(prompt: str) -> str:
    trait = re.search(r"main trait is (\w+)", prompt).group(1)
    flavors = {
        "brave": "meets trouble head-on and rarely flinches",
        "timid": "avoids attention and startles easily",
        "calm": "keeps an even keel whatever happens",
        "sensitive": "notices every shift in mood around them",
        "pessimist": "expects the worst outcome of any situation",
        "optimistic": "assumes things will work out in the end",
    }
    return (f"A {trait} person who "
            + flavors.get(trait, "behaves in a distinctive way") + ".")


def _plan(prompt: str) -> str:
    seed = _stable_int(prompt)
    picks = []
    remaining = list(_PLAN_PHRASES)
    for i in range(4):
        idx = (seed >> (i * 8)) % len(remaining)
        picks.append(remaining.pop(idx))
    sentence = picks[0].capitalize() + ", then " + picks[1] + "."
    sentence += " " + picks[2].capitalize() + " while " + picks[3] + "."
    return sentence


def _describe_window(prompt: str) -> str:
    attrs = _block(prompt, "The attributes observed over one second, in frame order:")
    seen, ordered = set(), []
    for line in attrs:
        text = re.sub(r"^frame \d+: ", "", line)
        if text not in seen:
            seen.add(text)
            ordered.append(text)
    if not ordered:
        return "The face stays still."
    return "The face shows " + ", then ".join(ordered) + "."


def _aggregate(prompt: str) -> str:
    descs = _block(prompt, "Second-by-second descriptions:")
    cleaned = [re.sub(r"^\d+\. ", "", d) for d in descs]
    return " Then ".join(cleaned)


def _leakage_filter(prompt: str) -> str:
    match = re.search(r"Description: (.*?)\nRewritten description:", prompt, re.DOTALL)
    text = match.group(1).strip() if match else ""
    clauses = [c for c in re.split(r"(?<=[.;])\s+|,\s+", text) if c.strip()]
    kept = [c for c in clauses
            if any(k in _content_words(c.lower()) for k in _FACIAL_KEYWORDS)]
    if len(kept) == len(clauses):
        return text  # nothing to remove: pure facial text passes through verbatim
    if not kept:
        return "no facial motion described."
    return ", ".join(c.strip(" .") for c in kept) + "."


def _concise(prompt: str) -> str:
    match = re.search(r"Description: (.*?)\nPhrase:", prompt, re.DOTALL)
    text = match.group(1).strip() if match else ""
    for clause in re.split(r"(?<=[.;])\s+|,\s+", text):
        if any(k in _content_words(clause) for k in _FACIAL_KEYWORDS):
            return clause.strip(" .").lower()
    return "still face"


def _rank(prompt: str) -> str:
    query = _field(prompt, "Query")
    cands = _block(prompt, "Candidates:")
    parsed = []
    for line in cands:
        match = re.match(r"^(\d+)\) (.*)$", line)
        if match:
            parsed.append((int(match.group(1)), match.group(2)))
    scored = sorted(parsed, key=lambda kv: (-_token_f1(query, kv[1]), kv[0]))
    return ", ".join(str(k) for k, _ in scored)


_POSE_WORDS = frozenset((
    "head", "pose", "turn", "turns", "turned", "turning", "tilt", "tilts",
    "tilted", "tilting", "nod", "nods", "nodded", "nodding", "shake",
    "shakes", "shaking", "left", "right", "up", "down", "still", "lot",
    "little", "half",
))

_EXPRESSION_WORDS = frozenset((
    "brow", "brows", "eyebrow", "eyebrows", "eye", "eyes", "eyelid",
    "eyelids", "gaze", "blink", "blinks", "lip", "lips", "mouth", "jaw",
    "cheek", "cheeks", "nose", "nostril", "chin", "frown", "smile",
    "squint", "raiser", "lowerer", "tightener", "puller", "depressor",
    "wrinkler", "deepener", "stretcher", "pucker", "pressor", "dimpler",
    "open", "closed", "wide", "part", "drop", "ahead", "towards", "raise",
    "raised", "widen", "widened", "furrow", "furrowed", "press", "pressed",
    "smiling", "smiles", "frowning", "frowns", "blinking", "squinting",
))


def _aspect_words(text: str, lexicon: frozenset) -> list[str]:
    return [w for w in _content_words(text) if w in lexicon]


def _match_score(prompt: str) -> str:
    """Aspect-restricted overlap: only words from the aspect's motion lexicon
    count, so text with no facial-motion content scores exactly 0."""
    aspect = re.search(r"considering (.+) only", prompt).group(1)
    lexicon = _POSE_WORDS if "pose" in aspect else _EXPRESSION_WORDS
    first = _aspect_words(_field(prompt, "Description A"), lexicon)
    second = _aspect_words(_field(prompt, "Description B"), lexicon)
    if not first and not second:
        return "0"
    f1 = _token_f1(" ".join(first) or "-", " ".join(second) or "-")
    return str(round(100 * f1))


_HANDLERS = (
    ("List situations in which a person would feel", _situations),
    ("Enrich the persona of a character", _persona),
    ("You direct the facial motion", _plan),
    ("You describe one second of facial motion", _describe_window),
    ("You combine the second-by-second descriptions", _aggregate),
    ("Remove any content that is not about facial motion", _leakage_filter),
    ("Extract a single concise motion phrase", _concise),
    ("Rank the candidate descriptions", _rank),
    ("Score how well the two descriptions match", _match_score),
)
