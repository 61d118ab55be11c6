"""Deterministic synthetic catalog: a simulated search corpus, seed queries and product pages.

Used by the test-suite, the benchmark and the bundled CLI fixture under
``data/fixture``. Everything is derived from one integer seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .clients import SimulatedCorpusDoc
from .core import Guardrails, ProductPage, RequiredElement

# category -> (nouns, materials/adjectives, use phrases, space)
CATEGORIES = {
    "coffee mugs": (["mug", "cup", "tumbler"], ["ceramic", "stoneware", "porcelain", "enamel"],
                    ["for morning coffee", "for hot cocoa", "for tea lovers"], "kitchen"),
    "wall art": (["canvas print", "framed poster", "art print"], ["abstract", "botanical", "vintage", "modern"],
                 ["for living room walls", "for bedroom decor", "for the office"], "home"),
    "storage cabinets": (["cabinet", "sideboard", "storage console"], ["farmhouse", "oak", "walnut", "rustic"],
                         ["with sliding doors", "with adjustable shelves", "for entryway storage"], "living room"),
    "womens t-shirts": (["t-shirt", "tee", "v-neck top"], ["cotton", "jersey", "organic", "relaxed"],
                        ["with a soft hand feel", "for everyday wear", "for the gym"], "wardrobe"),
    "portable bars": (["portable bar", "drink cart", "bar table"], ["folding", "aluminum", "collapsible", "outdoor"],
                      ["for tailgating", "for backyard parties", "for picnics"], "patio"),
    "running shoes": (["running shoe", "trail runner", "sneaker"], ["lightweight", "cushioned", "breathable", "mesh"],
                      ["for long runs", "for daily training", "for trail running"], "routine"),
    "desk lamps": (["desk lamp", "task light", "reading lamp"], ["led", "dimmable", "brass", "adjustable"],
                   ["for home offices", "for late night reading", "for study desks"], "workspace"),
    "yoga mats": (["yoga mat", "exercise mat", "pilates mat"], ["non-slip", "cork", "extra thick", "eco"],
                  ["for hot yoga", "for home workouts", "for studio classes"], "practice"),
    "throw pillows": (["throw pillow", "cushion cover", "lumbar pillow"], ["velvet", "linen", "boho", "woven"],
                      ["for sofas", "for accent chairs", "for guest beds"], "sofa"),
    "chef knives": (["chef knife", "santoku knife", "utility knife"], ["damascus", "carbon steel", "forged", "japanese"],
                    ["for precise slicing", "for home cooks", "for meal prep"], "kitchen"),
    "backpacks": (["backpack", "daypack", "laptop bag"], ["waterproof", "canvas", "leather", "roll-top"],
                  ["for commuting", "for weekend hikes", "for travel"], "commute"),
    "bath towels": (["bath towel", "towel set", "bath sheet"], ["turkish cotton", "plush", "quick-dry", "waffle"],
                    ["for spa days", "for guest bathrooms", "for the beach"], "bathroom"),
    "dog beds": (["dog bed", "pet bed", "bolster bed"], ["orthopedic", "memory foam", "washable", "calming"],
                 ["for large dogs", "for senior pets", "for crate training"], "home"),
    "scented candles": (["candle", "jar candle", "pillar candle"], ["soy", "lavender", "vanilla", "beeswax"],
                        ["for relaxing evenings", "for gifting", "for bath time"], "home"),
    "water bottles": (["water bottle", "flask", "hydration bottle"], ["insulated", "stainless steel", "bpa-free", "glass"],
                      ["for the gym", "for hiking", "for the office"], "routine"),
    "bluetooth speakers": (["bluetooth speaker", "portable speaker", "soundbar"], ["waterproof", "wireless", "compact", "rugged"],
                           ["for pool parties", "for camping trips", "for the shower"], "setup"),
    "cookware sets": (["cookware set", "frying pan", "saucepan"], ["nonstick", "cast iron", "copper", "tri-ply"],
                      ["for everyday cooking", "for induction stoves", "for family dinners"], "kitchen"),
    "area rugs": (["area rug", "runner rug", "round rug"], ["jute", "shag", "moroccan", "washable"],
                  ["for living rooms", "for hallways", "for kids rooms"], "floor"),
    "office chairs": (["office chair", "task chair", "desk chair"], ["ergonomic", "mesh", "swivel", "high-back"],
                      ["with lumbar support", "for long workdays", "for gaming setups"], "workspace"),
    "garden planters": (["planter", "plant pot", "raised bed"], ["terracotta", "self-watering", "cedar", "hanging"],
                        ["for balcony gardens", "for herbs", "for indoor plants"], "garden"),
}

BRANDS = ["Acme", "Northwind", "Fab Funky", "Walker Edison", "Avia", "Evergreen", "Lumen & Co", "Harbor",
          "Oakline", "Brightside", "Copperleaf", "Kestrel"]
STORES = ["HomeHub", "ShopRite Online", "MarketSquare", "DailyDeals", "The Outlet"]
TAGLINES = [
    "Discover premium {cat} for every {space}.",
    "Shop stylish {cat} and save today.",
    "Upgrade your {space} with exclusive {cat}.",
    "Discover the perfect {cat} for your {space}.",
    "Explore our favorite {cat} and elevate your {space}.",
]
CLAIMS = ["Guaranteed to last a lifetime.", "Risk free purchase.", "A miracle for your {space}.",
          "The cheapest {cat} online."]

GUARDRAILS = Guardrails(
    hard_prohibitions=("guaranteed", "risk free", "miracle", "cheapest"),
    required_elements=(RequiredElement("call_to_action", phrases=("shop now", "buy now", "order today")),),
)

RETAILER = "https://shop.example.com/p/"


@dataclass(frozen=True)
class Catalog:
    corpus: list[SimulatedCorpusDoc]
    seeds: list[str]
    pages: list[ProductPage]
    guardrails: Guardrails


def _slug(text: str) -> str:
    return "-".join("".join(ch if ch.isalnum() else " " for ch in text.lower()).split())


def _product(rng: random.Random, category: str):
    nouns, adjs, uses, space = CATEGORIES[category]
    adj = rng.choice(adjs)
    noun = rng.choice(nouns)
    return adj, noun, rng.choice(uses), space


def build_catalog(seed: int = 7, n_docs: int = 200, n_pages: int = 200, duplicate_fraction: float = 0.1,
                  seeded_categories: int = 15, claim_rate: float = 0.25) -> Catalog:
    """Synthesize a corpus of ``n_docs`` search documents and ``n_pages`` target pages.

    Pages cycle through the categories. The first retailer pages of each
    category also appear in the corpus so agentic expansion can find them. A
    ``duplicate_fraction`` of the corpus repeats an earlier document's title and
    description under a reseller URL. About ``claim_rate`` of pages carry a
    prohibited marketing claim in their seller description.
    """
    rng = random.Random(seed)
    cats = list(CATEGORIES)
    pages: list[ProductPage] = []
    for i in range(n_pages):
        cat = cats[i % len(cats)]
        adj, noun, use, space = _product(rng, cat)
        brand = rng.choice(BRANDS)
        name = f"{adj.title()} {noun.title()}"
        desc = f"{adj.capitalize()} {noun} {use}."
        if rng.random() < claim_rate:
            desc = rng.choice(CLAIMS).format(cat=cat, space=space) + " " + desc
        if rng.random() < 0.5:
            desc += f" Made with care by {brand}."
        url = f"{RETAILER}{_slug(brand + ' ' + name)}-{i:04d}"
        pages.append(ProductPage(f"p{i:04d}", url, (("name", name), ("brand", brand),
                                                    ("category", cat.title()), ("description", desc))))

    n_dups = int(round(n_docs * duplicate_fraction))
    n_unique = n_docs - n_dups
    docs: list[SimulatedCorpusDoc] = []
    # retailer pages that are indexed by the engine
    n_retail = min(len(pages), n_unique // 2)
    for page in pages[:n_retail]:
        cat = page.get("category").lower()
        tagline = rng.choice(TAGLINES).format(cat=cat, space=CATEGORIES[cat][3])
        docs.append(SimulatedCorpusDoc(page.url, f"{page.get('brand')} {page.get('name')} | Shop Example",
                                       f"{page.get('name')} from {page.get('brand')}. {tagline}",
                                       popularity=float(rng.randint(0, 50))))
    k = 0
    while len(docs) < n_unique:
        cat = cats[k % len(cats)]
        adj, noun, use, space = _product(rng, cat)
        brand, store = rng.choice(BRANDS), rng.choice(STORES)
        tagline = rng.choice(TAGLINES).format(cat=cat, space=space)
        title = f"{brand} {adj.title()} {noun.title()} | {store}"
        desc = f"{adj.capitalize()} {noun} {use}. {tagline}"
        docs.append(SimulatedCorpusDoc(f"https://{_slug(store)}.example.net/{_slug(cat)}/{k:04d}", title, desc,
                                       popularity=float(rng.randint(0, 500))))
        k += 1
    originals = list(docs)
    for j in range(n_dups):
        src = rng.choice(originals)
        docs.append(SimulatedCorpusDoc(f"https://reseller{j % 7}.example.org/item/{j:04d}", src.title,
                                       src.description, popularity=float(rng.randint(0, 100))))

    seeds = list(cats[:seeded_categories])
    return Catalog(docs, seeds, pages, GUARDRAILS)


def fixture_config(corpus_file: str = "corpus.jsonl") -> dict:
    return {
        "pipeline": {"K_lib": 10, "K_hit": 10, "K_aug": 5, "epsilon_dup": 0.95, "tau_q": 0.35, "m": 3,
                     "lambda": 0.7, "gamma": 0.1, "K_max": 5},
        "guardrails": GUARDRAILS.to_dict(),
        "search": {"kind": "simulated", "corpus": corpus_file},
        "llm": {"kind": "mock"},
        "embedding": {"kind": "hashing"},
        "workers": 1,
    }


def write_fixture(directory, n_pages: int = 10, seed: int = 7) -> None:
    """Materialize the bundled CLI fixture: corpus, seeds, the first ``n_pages`` pages and a config."""
    import json
    from pathlib import Path

    from .clients import save_corpus

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    catalog = build_catalog(seed=seed)
    save_corpus(catalog.corpus, out / "corpus.jsonl")
    (out / "seeds.txt").write_text("\n".join(catalog.seeds) + "\n", encoding="utf-8")
    with open(out / "pages.jsonl", "w", encoding="utf-8") as fh:
        for page in catalog.pages[:n_pages]:
            fh.write(json.dumps(page.to_dict(), ensure_ascii=False) + "\n")
    (out / "config.json").write_text(json.dumps(fixture_config(), indent=2) + "\n", encoding="utf-8")
