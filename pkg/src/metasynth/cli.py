"""Command-line entry point: build-library, generate, judge-metrics, config show.

Errors are printed to stderr as one JSON line ``{"error": CODE, "message": ...}``
and the process exits with the error's stable exit code. ``generate`` exits 0
when every page produced a snippet, 1 on partial failure and 3 when no page did.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import load_config, settings_from_dict
from .core import ProductPage
from .errors import InputError, MetaSynthError
from .library import build_library, load_library, save_library
from .metrics import EXPONENTIAL, LINEAR, compare_methods, load_rankings
from .pipeline import Pipeline, make_embedder, make_evaluator, make_llm, make_search

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_ALL_FAILED = 3

log = logging.getLogger("metasynth")


def _settings(path: str | None):
    return load_config(path) if path else settings_from_dict({})


def read_seeds(path: str | Path) -> list[str]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read seeds file {path}: {exc.strerror}") from exc
    seeds = []
    for line in lines:
        q = " ".join(line.split())
        if q and not q.startswith("#") and q not in seeds:
            seeds.append(q)
    if not seeds:
        raise InputError(f"{path}: no seed queries")
    return seeds


def _pages_from_file(path: Path) -> list[ProductPage]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read page file {path}: {exc.strerror}") from exc
    pages = []
    try:
        if path.suffix == ".jsonl":
            for lineno, line in enumerate(text.splitlines(), 1):
                if line.strip():
                    try:
                        pages.append(ProductPage.from_dict(json.loads(line)))
                    except (ValueError, KeyError, TypeError) as exc:
                        raise InputError(f"{path}:{lineno}: {exc}") from exc
        else:
            pages.append(ProductPage.from_dict(json.loads(text)))
    except (ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{path}: {exc}") from exc
    return pages


def read_pages(path: str | Path) -> list[ProductPage]:
    """One JSON page per ``.json`` file, one per line in ``.jsonl``; a directory is read in name order."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix in (".json", ".jsonl"))
    elif path.is_file():
        files = [path]
    else:
        raise InputError(f"page input not found: {path}")
    pages = [page for f in files for page in _pages_from_file(f)]
    seen = set()
    for page in pages:
        if page.page_id in seen:
            raise InputError(f"duplicate page_id {page.page_id!r}")
        seen.add(page.page_id)
    if not pages:
        raise InputError(f"no pages in {path}")
    return pages


def _result_name(page_id: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in page_id)
    return f"{safe}.json"


def cmd_build_library(args) -> int:
    settings = _settings(args.config)
    embedder = make_embedder(settings)
    search = make_search(settings, embedder)
    lib = build_library(read_seeds(args.seeds), search, settings.pipeline, embedder)
    save_library(lib, args.out)
    r = lib.build_report
    print(f"fetched={r.fetched} deduped={r.duplicates} stored={r.stored} "
          f"queries={len(lib.queries)} skipped={len(r.skipped)}")
    return EXIT_OK


def cmd_generate(args) -> int:
    settings = _settings(args.config)
    embedder = make_embedder(settings)
    lib = load_library(args.library, embedder)
    pages = read_pages(args.page)
    search = make_search(settings, embedder)
    pipeline = Pipeline(lib, search, make_llm(settings), settings.pipeline, settings.guardrails,
                        make_evaluator(settings, embedder))
    workers = args.workers or settings.workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(pipeline.process, pages))
    else:
        results = [pipeline.process(p) for p in pages]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = accepted = 0
    for res in results:
        (out / _result_name(res.page_id)).write_text(
            json.dumps(res.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        if res.snippet is None:
            failed += 1
            print(f"page {res.page_id}: FAILED {res.error}", file=sys.stderr)
        elif res.accepted:
            accepted += 1
        else:
            print(f"page {res.page_id}: not accepted ({res.stop_reason})", file=sys.stderr)

    # single writer, after the batch
    if pipeline.augmented_total and not args.freeze_library:
        save_library(lib, args.library)
    print(f"pages={len(results)} accepted={accepted} failed={failed} augmented={pipeline.augmented_total}")
    if failed == len(results):
        return EXIT_ALL_FAILED
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_judge_metrics(args) -> int:
    table = compare_methods(load_rankings(args.rankings), args.gain)
    Path(args.out).write_text(json.dumps(table.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(table.format_table())
    return EXIT_OK


def cmd_config_show(args) -> int:
    print(json.dumps(_settings(args.config).to_dict(), indent=2, ensure_ascii=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metasynth", description="Exemplar-guided meta title/description generation")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-library", help="harvest a deduplicated exemplar library from seed queries")
    p.add_argument("--seeds", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_library)

    p = sub.add_parser("generate", help="generate snippets for one page, a JSONL file or a directory")
    p.add_argument("--page", required=True)
    p.add_argument("--library", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--freeze-library", action="store_true", help="do not write augmented exemplars back")
    p.add_argument("--workers", type=int, help="override the config worker count")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("judge-metrics", help="NDCG / MRR / average rank from judged rankings")
    p.add_argument("--rankings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--gain", choices=(EXPONENTIAL, LINEAR), default=EXPONENTIAL)
    p.set_defaults(func=cmd_judge_metrics)

    p = sub.add_parser("config", help="inspect configuration")
    config_sub = p.add_subparsers(dest="config_command", required=True)
    show = config_sub.add_parser("show", help="print the effective config after defaults")
    show.add_argument("--config")
    show.set_defaults(func=cmd_config_show)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print(json.dumps({"error": "INVALID_ARGUMENT", "message": "--workers must be >= 1"}), file=sys.stderr)
        return 11
    try:
        return args.func(args)
    except MetaSynthError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}, ensure_ascii=False), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
