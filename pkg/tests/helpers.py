"""Small scripted clients shared by several test modules."""
from metasynth import prompts
from metasynth.clients import SearchResult
from metasynth.core import Snippet
from metasynth.errors import TransportError


class StaticSearch:
    """Returns canned (url, title, description) lists per query; unknown queries fail."""

    name = "static"
    max_k = 100

    def __init__(self, table, fail=()):
        self.table = table
        self.fail = set(fail)
        self.calls = []

    def search(self, query, k):
        self.calls.append((query, k))
        if query in self.fail or query not in self.table:
            raise TransportError(f"no route for {query!r}")
        return [SearchResult(u, t, d, r) for r, (u, t, d) in enumerate(self.table[query][:k], 1)]


class ScriptedLLM:
    """Returns queued completions in order; an Exception instance in the queue is raised."""

    name = "scripted"

    def __init__(self, outputs):
        self.outputs = list(outputs)
        self.calls = 0
        self.prompts = []

    def send(self, parts):
        self.calls += 1
        self.prompts.append(parts)
        out = self.outputs.pop(0) if len(self.outputs) > 1 else self.outputs[0]
        if isinstance(out, Exception):
            raise out
        return out


TARGET_URL = "https://shop.example/target"


def ranked_target_corpus():
    """Corpus in which the target ranks 1, 3 and 4 for the three returned queries (use K_hit = 3)."""
    from metasynth.clients import SimulatedCorpusDoc as Doc

    corpus = [Doc(TARGET_URL, "Zeta Lamp", "Omega shade.")]
    corpus += [Doc(f"https://o.example/a{i}", f"Alpha Zeta {w}", f"{w} finish.") for i, w in enumerate(["oak", "ash"])]
    corpus += [Doc(f"https://o.example/b{i}", f"Beta Zeta {w}", f"{w} finish.")
               for i, w in enumerate(["elm", "fir", "yew"])]
    return corpus, ["zeta lamp omega", "alpha zeta", "beta zeta"]


FRAGMENTS = ["Red ceramic mug.", "Premium perfect gift.", "Exclusive glaze.", "Shop now.", "Buy now!",
             "Guaranteed quality.", "A miracle mug.", "Acme", "Dishwasher safe."]


class Adversary:
    """Emits a scripted sequence of snippets, malformed replies and failures, ignoring directives."""

    name = "adversary"

    def __init__(self, script):
        self.script = script
        self.calls = 0

    def send(self, parts):
        step = self.script[min(self.calls, len(self.script) - 1)]
        self.calls += 1
        if step == "raise":
            raise TransportError("scripted failure")
        if step == "garbage":
            return "no labels here"
        return prompts.format_snippet(Snippet("Acme Red Ceramic Mug", " ".join(FRAGMENTS[i] for i in step)))
