"""Command-line pipeline: synth, gender, analyze, match, regress, cite, report.

Each subcommand reads files and writes files; every output gets a
``<output>.manifest.json`` sidecar with input/output hashes and the
policies in force. Exit codes: 0 success, 1 I/O error, 2 bad
specification (arguments, config, model spec, rank deficiency).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import pandas as pd

from . import __version__
from .citation import DENOMINATOR_POLICY, decompose, profiles_to_csv
from .corpus import (
    DocKind,
    Document,
    FilterPolicy,
    MatchResult,
    dumps_jsonl,
    ingest,
    match_sample,
    pairs_to_csv,
    read_pairs_csv,
)
from .gender import (
    DEFAULT_CUTOFF,
    Gender,
    GenderCache,
    GenderizeClient,
    LocalLexiconProvider,
    assign_many,
    propagate,
)
from .manifest import RunManifest, write_manifest
from .report import DEFAULT_BIN_WIDTH, NothingToPlotError, bins_to_csv, histogram_bins, render_svg
from .stats import ROBUST_VARIANT, coefficient_table_csv, fit_ols, margins, parse_formula, results_json
from .stylometry import COUNT_FIELDS, DENOMINATOR_RULE, SCORE_FIELDS, FeatureCounts, compute_scores, count_features
from .tagger import default_lexicon, load_lexicon, tag_document
from .tokenizer import tokenize, word_count

__all__ = ["main", "build_parser", "ANALYZE_COLUMNS", "SpecError"]

log = logging.getLogger("involvedstyle")

EXIT_OK, EXIT_IO, EXIT_SPEC = 0, 1, 2

ANALYZE_COLUMNS = (
    ("id", "kind", "field", "year", "author_gender", "female", "lawyer_gender", "female_lawyer")
    + COUNT_FIELDS + SCORE_FIELDS + ("ratio_undefined", "status")
)

POLICIES = {
    "denominator": DENOMINATOR_RULE,
    "robust_se": ROBUST_VARIANT,
    "matching": MatchResult.policy,
    "citation_denominator": DENOMINATOR_POLICY,
}


class SpecError(ValueError):
    """Invalid user specification; maps to exit code 2."""


# --- table io --------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def _table_text(rows: Iterable[Dict], columns: Sequence[str], path: Path) -> str:
    if path.suffix.lower() in (".jsonl", ".json"):
        return "".join(json.dumps({c: _json_value(r.get(c)) for c in columns}, sort_keys=False) + "\n"
                       for r in rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_table(path) -> pd.DataFrame:
    """Load a CSV or JSONL table; ``id``-like columns stay strings."""
    path = Path(path)
    ids = {"id": str, "doc_id": str, "female_id": str, "male_id": str, "field": str}
    if path.suffix.lower() in (".jsonl", ".json"):
        with open(path, encoding="utf-8") as fh:
            records = [json.loads(line) for line in fh if line.strip()]
        df = pd.DataFrame.from_records(records)
        for c in ids:
            if c in df.columns:
                df[c] = df[c].map(lambda v: None if v is None else str(v))
        return df
    try:
        return pd.read_csv(path, dtype=ids, keep_default_na=True)
    except pd.errors.EmptyDataError:
        return pd.DataFrame()


# --- config ----------------------------------------------------------------

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def read_config(path) -> Dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out: Dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SpecError(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _apply_config(sub: argparse.ArgumentParser, values: Dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in values.items():
        a = actions.get(k)
        if a is None or k in ("config", "help"):
            raise SpecError(f"unknown config key {k!r}")
        if isinstance(a, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            if v.lower() not in _TRUE | _FALSE:
                raise SpecError(f"config key {k!r} expects a boolean, got {v!r}")
            defaults[k] = v.lower() in _TRUE
        elif isinstance(a, argparse._AppendAction) or a.nargs in ("+", "*"):
            defaults[k] = [s.strip() for s in v.split(",") if s.strip()]
        else:
            # string defaults are converted by argparse using the action's type
            defaults[k] = v
    sub.set_defaults(**defaults)


# --- analyze ---------------------------------------------------------------

@lru_cache(maxsize=4)
def _lexicon(path: Optional[str]):
    return default_lexicon() if path is None else load_lexicon(path)


def _score_texts(args) -> List[tuple]:
    texts, lexicon_path = args
    lex = _lexicon(lexicon_path)
    out = []
    for text in texts:
        tokens = tokenize(text)
        counts = count_features(tag_document(tokens, lex))
        out.append((word_count(tokens), counts.as_tuple()))
    return out


def score_corpus(texts: Sequence[str], threads: int = 1, lexicon_path: Optional[str] = None) -> List[tuple]:
    """(word count, count tuple) per text, in input order."""
    if threads <= 1 or len(texts) < 2:
        return _score_texts((list(texts), lexicon_path))
    size = max(1, math.ceil(len(texts) / (threads * 4)))
    chunks = [(list(texts[i:i + size]), lexicon_path) for i in range(0, len(texts), size)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(_score_texts, chunks))
    return [r for part in parts for r in part]


def _gender_flag(g: Optional[Gender]):
    if g is Gender.F:
        return 1
    if g is Gender.M:
        return 0
    return None


def _analysis_row(doc: Document, counts: FeatureCounts, status: str) -> dict:
    row = {
        "id": doc.id,
        "kind": doc.kind.value,
        "field": doc.field,
        "year": doc.year,
        "author_gender": doc.author_gender.value if doc.author_gender else None,
        "female": _gender_flag(doc.author_gender),
        "lawyer_gender": doc.lawyer_gender.value if doc.lawyer_gender else None,
        "female_lawyer": _gender_flag(doc.lawyer_gender),
        "status": status,
    }
    row.update(counts.as_dict())
    if counts.n_tokens:
        s = compute_scores(counts)
        row.update(involved_rate=s.involved_rate, informational_rate=s.informational_rate,
                   ratio=s.ratio, ratio_undefined=int(s.undefined))
    else:
        row.update(involved_rate=None, informational_rate=None, ratio=None, ratio_undefined=1)
    return row


def _policy(args) -> FilterPolicy:
    if args.min_words < 0:
        raise SpecError("--min-words must be non-negative")
    min_year = {}
    if args.min_year_paper is not None:
        min_year[DocKind.PAPER] = args.min_year_paper
    if args.min_year_patent is not None:
        min_year[DocKind.PATENT] = args.min_year_patent
    return FilterPolicy(
        min_words=args.min_words,
        solo_only=args.solo_only,
        require_single_lawyer=args.require_single_lawyer,
        languages=tuple(l.lower() for l in args.language),
        allow_missing_language=not args.require_language,
        min_year=min_year,
    )


def cmd_analyze(args) -> int:
    policy = _policy(args)
    result = ingest(args.input, args.schema)
    for r in result.rejects:
        print(f"reject line {r.line}: {r.reason}" + (f" (id {r.record_id})" if r.record_id else ""),
              file=sys.stderr)
    docs = result.documents
    scored = score_corpus([d.text for d in docs], args.threads, args.lexicon)
    rows = []
    funnel = {"read": len(docs) + len(result.rejects), "rejected": len(result.rejects)}
    for doc, (n_words, counts) in zip(docs, scored):
        reason = policy.drop_reason(doc, n_words)
        status = "kept" if reason is None else f"dropped:{reason.value}"
        funnel[status] = funnel.get(status, 0) + 1
        if reason is None or args.include_dropped:
            rows.append(_analysis_row(doc, FeatureCounts(*counts), status))
    out = Path(args.output)
    _write(out, _table_text(rows, ANALYZE_COLUMNS, out))
    m = _manifest(args, "analyze")
    m.diagnostics = {"funnel": funnel, "undefined_ratio": sum(r["ratio_undefined"] for r in rows),
                     "rejects": [{"line": r.line, "reason": r.reason, "id": r.record_id} for r in result.rejects]}
    _finish(m, [args.input] + ([args.lexicon] if args.lexicon else []), [out])
    return EXIT_OK


# --- match -----------------------------------------------------------------

def _docs_for_matching(df: pd.DataFrame, keep_undefined: bool) -> List[Document]:
    need = ("id", "field", "year", "author_gender")
    missing = [c for c in need if c not in df.columns]
    if missing:
        raise SpecError(f"matching input lacks columns: {', '.join(missing)}")
    if "status" in df.columns:
        df = df[df["status"].fillna("kept") == "kept"]
    if not keep_undefined and "ratio_undefined" in df.columns:
        df = df[df["ratio_undefined"].fillna(0).astype(int) == 0]
    docs = []
    for r in df.itertuples(index=False):
        g = r.author_gender
        gender = Gender.parse(g) if isinstance(g, str) and g else Gender.UNKNOWN
        docs.append(Document(id=str(r.id), kind=DocKind.PAPER, text="", field=str(r.field),
                             year=int(r.year), authors=(), author_gender=gender))
    return docs


def cmd_match(args) -> int:
    df = read_table(args.input)
    out = Path(args.output)
    docs = _docs_for_matching(df, args.keep_undefined) if len(df) else []
    res = match_sample(docs, args.seed, threads=args.threads)
    _write(out, pairs_to_csv(res.pairs))
    m = _manifest(args, "match")
    m.diagnostics = {"pairs": len(res.pairs), "unmatched_female": len(res.unmatched_female),
                     "excluded_unknown_gender": res.excluded_unknown}
    _finish(m, [args.input], [out])
    return EXIT_OK


# --- regress ---------------------------------------------------------------

def _join(df: pd.DataFrame, paths: Sequence[str]) -> pd.DataFrame:
    for p in paths:
        other = read_table(p)
        if "doc_id" in other.columns and "id" not in other.columns:
            other = other.rename(columns={"doc_id": "id"})
        if "id" not in other.columns:
            raise SpecError(f"{p}: join table needs an id or doc_id column")
        dup = [c for c in other.columns if c in df.columns and c != "id"]
        df = df.merge(other.drop(columns=dup), on="id", how="left")
    return df


def _fit_labeled(df: pd.DataFrame, spec, label: str, focal: Optional[str]):
    sub = df.dropna(subset=list(spec.columns))
    res = fit_ols(sub, spec)
    mg = margins(res, sub, focal) if focal else None
    return res, mg, len(df) - len(sub)


def cmd_regress(args) -> int:
    try:
        spec = parse_formula(args.spec, robust=not args.classical)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    df = read_table(args.input)
    inputs = [args.input] + list(args.join)
    df = _join(df, args.join)
    if args.pairs:
        pairs = read_pairs_csv(args.pairs)
        ids = {p.female_id for p in pairs} | {p.male_id for p in pairs}
        df = df[df["id"].isin(ids)] if "id" in df.columns else df.iloc[0:0]
        inputs.append(args.pairs)
    needed = list(spec.columns) + ([args.by] if args.by else [])
    missing = [c for c in needed if c not in df.columns]
    if missing:
        raise SpecError(f"unknown column(s) in spec: {', '.join(missing)}")
    if args.margins and args.margins not in spec.predictors:
        raise SpecError(f"--margins {args.margins!r} is not a predictor")

    fitted = []
    diag: Dict[str, object] = {}
    res, mg, dropped = _fit_labeled(df, spec, "all", args.margins)
    fitted.append(("all", res, mg))
    diag["all"] = {"n": res.n, "dropped_missing": dropped}
    if args.by:
        by_spec = type(spec)(spec.outcome, spec.predictors,
                             tuple(f for f in spec.fixed_effects if f != args.by), spec.robust)
        for level in sorted(df[args.by].dropna().unique(), key=str):
            label = f"{args.by}={level}"
            try:
                r, g, d = _fit_labeled(df[df[args.by] == level], by_spec, label, args.margins)
            except ValueError as exc:
                # per-group failures are reported, the remaining groups still run
                print(f"warning: {label}: {exc}", file=sys.stderr)
                diag[label] = {"error": str(exc)}
                continue
            fitted.append((label, r, g))
            diag[label] = {"n": r.n, "dropped_missing": d}

    out = Path(args.output)
    pairs = [(label, r) for label, r, _ in fitted]
    if out.suffix.lower() == ".json":
        payload = json.loads(results_json(pairs, args.legend))
        for label, _, g in fitted:
            if g is not None:
                payload["models"][label]["margins"] = g.__dict__ | {"undefined": g.undefined}
        _write(out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        _write(out, coefficient_table_csv(pairs, args.legend))
    if args.margins:
        diag["margins"] = {label: g.__dict__ for label, _, g in fitted if g is not None}
    m = _manifest(args, "regress")
    m.diagnostics = diag
    _finish(m, inputs, [out])
    return EXIT_OK


# --- cite ------------------------------------------------------------------

def cmd_cite(args) -> int:
    result = ingest(args.input, args.schema)
    for r in result.rejects:
        print(f"reject line {r.line}: {r.reason}", file=sys.stderr)
    out = Path(args.output)
    profiles = [decompose(d) for d in result.documents]
    _write(out, profiles_to_csv(profiles))
    m = _manifest(args, "cite")
    m.diagnostics = {"documents": len(profiles), "imputed_zero": sum(p.imputed_zero for p in profiles),
                     "self_citations_removed": sum(p.self_citations for p in profiles),
                     "rejects": len(result.rejects)}
    _finish(m, [args.input], [out])
    return EXIT_OK


# --- report ----------------------------------------------------------------

def cmd_report(args) -> int:
    df = read_table(args.input)
    inputs = [args.input]
    if not len(df):
        raise NothingToPlotError()
    for c in ("id", "author_gender", "ratio"):
        if c not in df.columns:
            raise SpecError(f"report input lacks column {c!r}")
    if "status" in df.columns:
        df = df[df["status"].fillna("kept") == "kept"]
    if args.pairs:
        pairs = read_pairs_csv(args.pairs)
        ids = {p.female_id for p in pairs} | {p.male_id for p in pairs}
        df = df[df["id"].isin(ids)]
        inputs.append(args.pairs)
    width = args.bin_width
    if width is None:
        kinds = set(df["kind"].dropna()) if "kind" in df.columns else set()
        width = DEFAULT_BIN_WIDTH["PATENT"] if kinds == {"PATENT"} else DEFAULT_BIN_WIDTH["PAPER"]
    groups = ("F", "M")
    values = {g: pd.to_numeric(df.loc[df["author_gender"] == g, "ratio"], errors="coerce").tolist() for g in groups}
    bins = histogram_bins(values, width)
    out = Path(args.output)
    twin = out.with_suffix(".csv")
    _write(out, render_svg(bins, groups, title=args.title))
    _write(twin, bins_to_csv(bins, groups))
    m = _manifest(args, "report")
    m.config["bin_width"] = width
    m.diagnostics = {"bins": len(bins), "n": {g: sum(b.counts[g] for b in bins) for g in groups}}
    _finish(m, inputs, [out, twin])
    return EXIT_OK


# --- synth -----------------------------------------------------------------

def cmd_synth(args) -> int:
    from .synth import GeneratorConfig, generate

    cfg = GeneratorConfig(n_docs=args.n_docs, gender_shift=args.gender_shift, effect_beta=args.effect_beta,
                          homophily=args.homophily, n_tokens=args.n_tokens, seed=args.seed)
    corpus = generate(cfg)
    out = Path(args.output)
    truth = Path(args.truth) if args.truth else out.with_name(out.stem + ".truth.jsonl")
    _write(out, dumps_jsonl(corpus.documents))
    _write(truth, corpus.truth_jsonl())
    m = _manifest(args, "synth")
    m.config["generator"] = cfg.to_dict()
    m.diagnostics = {"female_shift_per_field": corpus.shifts}
    _finish(m, [], [out, truth])
    return EXIT_OK


# --- gender ----------------------------------------------------------------

def _doc_gender(assigned: List[Gender]) -> Gender:
    known = set(assigned)
    return assigned[0] if len(known) == 1 and assigned else Gender.UNKNOWN


def cmd_gender(args) -> int:
    from dataclasses import replace

    result = ingest(args.input, args.schema)
    docs = result.documents
    if args.provider == "genderize":
        provider = GenderizeClient(api_key=args.api_key)
    else:
        provider = LocalLexiconProvider.from_file(args.names) if args.names else LocalLexiconProvider()
    cache = GenderCache(args.cache) if args.cache else None
    # authors first, lawyers after; slots map back to documents
    names, slots = [], []
    for i, d in enumerate(docs):
        for a in d.authors:
            names.append(a)
            slots.append((i, "author"))
        for lw in d.lawyers:
            names.append(lw)
            slots.append((i, "lawyer"))
    assigned = assign_many(names, args.cutoff, provider, cache, max_workers=args.threads, refresh=args.refresh)
    prop = propagate(names, assigned)
    per_doc: Dict[tuple, List[Gender]] = {}
    for (i, role), a in zip(slots, prop.assignments):
        per_doc.setdefault((i, role), []).append(a.gender)
    coded = []
    for i, d in enumerate(docs):
        ag = _doc_gender(per_doc.get((i, "author"), []))
        lg = _doc_gender(per_doc.get((i, "lawyer"), [])) if d.lawyers else None
        coded.append(replace(d, author_gender=ag, lawyer_gender=lg))
    out = Path(args.output)
    _write(out, dumps_jsonl(coded))
    m = _manifest(args, "gender")
    m.config.pop("api_key", None)
    sources: Dict[str, int] = {}
    for a in prop.assignments:
        key = "RETRYABLE" if a.retryable else a.source.value
        sources[key] = sources.get(key, 0) + 1
    m.diagnostics = {"names": len(names), "sources": dict(sorted(sources.items())),
                     "conflicts": sorted(prop.conflicts), "rejects": len(result.rejects)}
    _finish(m, [args.input], [out])
    return EXIT_OK


# --- plumbing --------------------------------------------------------------

def _manifest(args, command: str) -> RunManifest:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    return RunManifest(command=command, config=config, seed=getattr(args, "seed", None), policies=dict(POLICIES))


def _finish(m: RunManifest, inputs: Sequence, outputs: Sequence[Path]) -> None:
    for p in inputs:
        m.add_input(p)
    if m.config.get("config"):
        m.add_input(m.config["config"])
    for p in outputs:
        m.add_output(p)
    write_manifest(m, outputs[0])


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="involvedstyle", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    subs = p.add_subparsers(dest="command", required=True)

    def sub(name, func, help_):
        s = subs.add_parser(name, help=help_)
        s.add_argument("--config", help="key = value file; command-line flags win")
        s.set_defaults(func=func)
        return s

    a = sub("analyze", cmd_analyze, "score documents")
    a.add_argument("--input", required=True)
    a.add_argument("--output", required=True, help=".csv or .jsonl")
    a.add_argument("--schema", choices=("jsonl", "csv"))
    a.add_argument("--min-words", type=int, default=100)
    a.add_argument("--solo-only", action="store_true")
    a.add_argument("--require-single-lawyer", action="store_true")
    a.add_argument("--min-year-paper", type=int)
    a.add_argument("--min-year-patent", type=int)
    a.add_argument("--language", nargs="+", default=["en"], help="accepted language codes")
    a.add_argument("--require-language", action="store_true", help="drop records with no language")
    a.add_argument("--include-dropped", action="store_true", help="also emit rows for filtered documents")
    a.add_argument("--lexicon")
    a.add_argument("--threads", type=_positive_int, default=1)

    mt = sub("match", cmd_match, "gender-matched pairs per (field, year)")
    mt.add_argument("--input", required=True)
    mt.add_argument("--output", required=True)
    mt.add_argument("--seed", type=int, default=0)
    mt.add_argument("--keep-undefined", action="store_true", help="match documents with undefined ratio too")
    mt.add_argument("--threads", type=_positive_int, default=1)

    r = sub("regress", cmd_regress, "fixed-effects OLS")
    r.add_argument("--input", required=True)
    r.add_argument("--output", required=True, help=".csv coefficient table or .json")
    r.add_argument("--spec", required=True, help='e.g. "ratio ~ female | field + year"')
    r.add_argument("--pairs")
    r.add_argument("--join", action="append", default=[], help="extra table merged on id")
    r.add_argument("--by", help="also fit separately for each level of this column")
    r.add_argument("--margins", help="report predicted means at 0 and 1 of this predictor")
    r.add_argument("--legend", choices=("t4", "t6"), default="t4")
    r.add_argument("--classical", action="store_true", help="classical instead of HC1 errors")

    c = sub("cite", cmd_cite, "citation profiles")
    c.add_argument("--input", required=True)
    c.add_argument("--output", required=True)
    c.add_argument("--schema", choices=("jsonl", "csv"))

    rp = sub("report", cmd_report, "ratio histogram by gender")
    rp.add_argument("--input", required=True, help="analyze output")
    rp.add_argument("--output", required=True, help=".svg; a .csv twin is written beside it")
    rp.add_argument("--pairs")
    rp.add_argument("--bin-width", type=float)
    rp.add_argument("--title", default="")

    s = sub("synth", cmd_synth, "synthetic corpus with known truth")
    s.add_argument("--output", required=True)
    s.add_argument("--truth")
    s.add_argument("--n-docs", type=_positive_int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--gender-shift", type=float, default=0.0)
    s.add_argument("--effect-beta", type=float)
    s.add_argument("--homophily", type=float, default=0.5)
    s.add_argument("--n-tokens", type=_positive_int, default=150)

    g = sub("gender", cmd_gender, "assign author and lawyer gender")
    g.add_argument("--input", required=True)
    g.add_argument("--output", required=True)
    g.add_argument("--schema", choices=("jsonl", "csv"))
    g.add_argument("--provider", choices=("local", "genderize"), default="local")
    g.add_argument("--names", help="name<TAB>gender<TAB>probability table for the local provider")
    g.add_argument("--api-key")
    g.add_argument("--cache")
    g.add_argument("--refresh", action="store_true")
    g.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)
    g.add_argument("--threads", type=_positive_int, default=4)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.config:
            subparser = parser._subparsers._group_actions[0].choices[args.command]
            _apply_config(subparser, read_config(args.config))
            args = parser.parse_args(argv)
        return args.func(args)
    except NothingToPlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
