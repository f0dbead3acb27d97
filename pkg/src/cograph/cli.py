"""Command-line entry point: `serve` and `replay`."""

from __future__ import annotations

import argparse
import sys

from .oracle import CATEGORIES, ChatHistory, classify
from .provider import HttpProvider, ProviderConfig, ScriptedProvider, load_transcript


def build_provider(args) -> object:
    if args.provider == "scripted":
        entries = load_transcript(args.transcript) if args.transcript else []
        return ScriptedProvider(entries)
    return HttpProvider(ProviderConfig.from_env())


def load_corpus(path: str) -> list[tuple[str, str | None, str]]:
    """Routing corpus: tab-separated `input<TAB>focus_node<TAB>expected_category`
    per line; the focus-node field may be empty. Lines starting with # are
    comments."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"bad corpus line: {line!r}")
            text, focus, expected = parts
            records.append((text, focus or None, expected))
    return records


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(build_provider(args), data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_replay(args) -> int:
    provider = build_provider(args)
    records = load_corpus(args.corpus)
    per_class = {c: {"total": 0, "correct": 0} for c in CATEGORIES}
    failures = []
    for text, _focus, expected in records:
        history = ChatHistory()
        intent = classify(provider, text, history)
        per_class[expected]["total"] += 1
        if intent.category == expected:
            per_class[expected]["correct"] += 1
        else:
            failures.append((text, expected, intent.category))
    total = sum(v["total"] for v in per_class.values())
    correct = sum(v["correct"] for v in per_class.values())
    print(f"{'class':<12}{'n':>6}{'correct':>10}{'accuracy':>10}")
    for cat in CATEGORIES:
        n = per_class[cat]["total"]
        c = per_class[cat]["correct"]
        acc = c / n if n else 0.0
        print(f"{cat:<12}{n:>6}{c:>10}{acc:>10.3f}")
    print(f"{'overall':<12}{total:>6}{correct:>10}{(correct / total if total else 0):>10.3f}")
    for text, expected, got in failures:
        print(f"MISS expected={expected} got={got}: {text}")
    return 0 if not failures else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cograph")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--data-dir", default=None)
    serve.add_argument("--provider", choices=["scripted", "http"], default="http")
    serve.add_argument("--transcript", default=None,
                       help="transcript fixture file (scripted provider)")
    serve.set_defaults(func=cmd_serve)

    replay = sub.add_parser("replay", help="replay a routing corpus and print metrics")
    replay.add_argument("--corpus", required=True)
    replay.add_argument("--provider", choices=["scripted", "http"], default="scripted")
    replay.add_argument("--transcript", default=None)
    replay.set_defaults(func=cmd_replay)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
