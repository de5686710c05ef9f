"""Caption tokenization and corpus-level captioning metrics.

Covers the standard DCASE-style evaluation stack: modified n-gram precision
BLEU with brevity penalty, longest-common-subsequence ROUGE-L, the CIDEr-D
variant of CIDEr (TF-IDF n-gram cosine with count clipping and a Gaussian
length penalty, scaled to [0, 10]), and the SPIDEr composition.  SPICE is
never computed here; per-item SPICE scores may be supplied externally and
averaged in, otherwise the CIDEr-only fallback is reported as
``spider_lite``.

Tokenization lowercases, strips ``<sos>``/``<eos>`` padding markers, and
replaces every character outside ``[a-z0-9']`` with whitespace before
splitting, so punctuation separates rather than glues words.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    CorpusFormatError,
    CorpusTooSmall,
    EmptyAfterTokenization,
    MissingSpiceScore,
)

ROUGE_BETA = 1.2     # de-facto captioning-evaluation constant
CIDER_SIGMA = 6.0    # Gaussian length-penalty width
CIDER_MAX_NGRAM = 4

_PAD_TOKENS = re.compile(r"<sos>|<eos>")
_NON_TOKEN = re.compile(r"[^a-z0-9']+")


def tokenize(raw: str) -> list[str]:
    """Lowercase, drop padding markers, strip punctuation, split."""
    text = _PAD_TOKENS.sub(" ", raw.lower())
    tokens = _NON_TOKEN.sub(" ", text).split()
    if not tokens:
        raise EmptyAfterTokenization(f"no tokens left in {raw!r}")
    return tokens


@dataclass
class CaptionRecord:
    """One audio item: hypothesis tokens plus reference token sequences."""

    item_id: str
    hypothesis: list[str]
    references: list[list[str]]

    def __post_init__(self):
        if not self.references:
            raise ValueError(f"item {self.item_id!r} has no references")
        if not self.hypothesis or any(not r for r in self.references):
            raise EmptyAfterTokenization(f"item {self.item_id!r} has an empty sequence")

    @classmethod
    def from_raw(cls, item_id: str, hypothesis: str, references: Sequence[str]):
        return cls(item_id, tokenize(hypothesis), [tokenize(r) for r in references])


def load_corpus(fh) -> list[CaptionRecord]:
    """Read JSONL records {"id", "hyp", "refs": [...]}; tokenizes everything."""
    corpus = []
    for lineno, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            item_id = str(obj["id"])
            hyp = obj["hyp"]
            refs = obj["refs"]
        except (json.JSONDecodeError, KeyError, TypeError) as err:
            raise CorpusFormatError(lineno, str(err)) from err
        if not isinstance(refs, list) or not refs:
            raise CorpusFormatError(lineno, "refs must be a non-empty list")
        try:
            corpus.append(CaptionRecord.from_raw(item_id, hyp, refs))
        except EmptyAfterTokenization as err:
            raise CorpusFormatError(lineno, str(err)) from err
    return corpus


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


# ---------------------------------------------------------------------------
# BLEU


@dataclass
class BleuDetails:
    score: float
    precisions: list[float]
    brevity_penalty: float
    zero_match_orders: list[int] = field(default_factory=list)


def _closest_ref_len(hyp_len: int, refs: Iterable[Sequence[str]]) -> int:
    # closest reference length; ties resolved toward the shorter reference
    # so the result does not depend on reference order
    return min((abs(len(r) - hyp_len), len(r)) for r in refs)[1]


def bleu_details(corpus: Sequence[CaptionRecord], n: int = 4) -> BleuDetails:
    """Corpus-level BLEU-n with per-reference clipping and no smoothing."""
    if n not in (1, 2, 3, 4):
        raise ValueError(f"BLEU order must be 1..4, got {n}")
    matched = [0] * n
    total = [0] * n
    hyp_len_sum = 0
    ref_len_sum = 0
    for rec in corpus:
        hyp_len_sum += len(rec.hypothesis)
        ref_len_sum += _closest_ref_len(len(rec.hypothesis), rec.references)
        for k in range(1, n + 1):
            counts = _ngrams(rec.hypothesis, k)
            if not counts:
                continue
            max_ref = Counter()
            for ref in rec.references:
                for gram, c in _ngrams(ref, k).items():
                    if c > max_ref[gram]:
                        max_ref[gram] = c
            matched[k - 1] += sum(min(c, max_ref[gram]) for gram, c in counts.items())
            total[k - 1] += sum(counts.values())

    precisions = [m / t if t else 0.0 for m, t in zip(matched, total)]
    bp = 1.0 if hyp_len_sum >= ref_len_sum else math.exp(1.0 - ref_len_sum / hyp_len_sum)
    zero_orders = [k + 1 for k, m in enumerate(matched) if m == 0]
    if zero_orders:
        return BleuDetails(0.0, precisions, bp, zero_orders)
    log_avg = sum(math.log(p) for p in precisions) / n
    return BleuDetails(bp * math.exp(log_avg), precisions, bp)


def bleu_n(corpus: Sequence[CaptionRecord], n: int = 4) -> float:
    return bleu_details(corpus, n).score


# ---------------------------------------------------------------------------
# ROUGE-L


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l_item(rec: CaptionRecord, beta: float = ROUGE_BETA) -> float:
    """Max over references of the LCS-based F-measure."""
    best = 0.0
    for ref in rec.references:
        lcs = _lcs_length(rec.hypothesis, ref)
        if lcs == 0:
            continue
        prec = lcs / len(rec.hypothesis)
        rec_ = lcs / len(ref)
        f = (1 + beta**2) * prec * rec_ / (rec_ + beta**2 * prec)
        best = max(best, f)
    return best


def rouge_l(corpus: Sequence[CaptionRecord]) -> float:
    return sum(rouge_l_item(r) for r in corpus) / len(corpus)


# ---------------------------------------------------------------------------
# CIDEr-D


def _tfidf_vector(counts_by_order, doc_freq, log_num_items):
    vec = [defaultdict(float) for _ in range(CIDER_MAX_NGRAM)]
    norm = [0.0] * CIDER_MAX_NGRAM
    for k in range(CIDER_MAX_NGRAM):
        for gram, count in counts_by_order[k].items():
            idf = log_num_items - math.log(max(1.0, doc_freq[gram]))
            w = count * idf
            vec[k][gram] = w
            norm[k] += w * w
    return vec, [math.sqrt(v) for v in norm]


def cider_scores(corpus: Sequence[CaptionRecord]) -> list[float]:
    """Per-item CIDEr-D scores (orders 1..4, clipping, length penalty, x10)."""
    if len(corpus) < 2:
        raise CorpusTooSmall(
            f"CIDEr IDF is degenerate on {len(corpus)} item(s); need >= 2")

    doc_freq: dict = defaultdict(int)
    for rec in corpus:
        seen = set()
        for ref in rec.references:
            for k in range(1, CIDER_MAX_NGRAM + 1):
                seen.update(_ngrams(ref, k).keys())
        for gram in seen:
            doc_freq[gram] += 1
    log_n = math.log(len(corpus))

    scores = []
    for rec in corpus:
        hyp_counts = [_ngrams(rec.hypothesis, k) for k in range(1, CIDER_MAX_NGRAM + 1)]
        hyp_vec, hyp_norm = _tfidf_vector(hyp_counts, doc_freq, log_n)
        acc = [0.0] * CIDER_MAX_NGRAM
        for ref in rec.references:
            ref_counts = [_ngrams(ref, k) for k in range(1, CIDER_MAX_NGRAM + 1)]
            ref_vec, ref_norm = _tfidf_vector(ref_counts, doc_freq, log_n)
            delta = len(rec.hypothesis) - len(ref)
            penalty = math.exp(-(delta * delta) / (2.0 * CIDER_SIGMA**2))
            for k in range(CIDER_MAX_NGRAM):
                num = sum(min(w, ref_vec[k][gram]) * ref_vec[k][gram]
                          for gram, w in hyp_vec[k].items())
                if hyp_norm[k] > 0 and ref_norm[k] > 0:
                    acc[k] += penalty * num / (hyp_norm[k] * ref_norm[k])
        item = 10.0 * sum(acc) / (CIDER_MAX_NGRAM * len(rec.references))
        scores.append(item)
    return scores


def cider(corpus: Sequence[CaptionRecord]) -> float:
    per_item = cider_scores(corpus)
    return sum(per_item) / len(per_item)


# ---------------------------------------------------------------------------
# SPIDEr


def spider(cider_score: float, spice_score: Optional[float] = None) -> float:
    """Mean of CIDEr and SPICE; falls back to CIDEr alone when SPICE absent."""
    if not math.isfinite(cider_score):
        raise ValueError(f"cider score must be finite, got {cider_score}")
    if spice_score is None:
        return cider_score
    return (cider_score + spice_score) / 2.0


# ---------------------------------------------------------------------------
# Report


@dataclass
class MetricReport:
    """Corpus scores plus per-item detail for CIDEr and ROUGE-L."""

    scores: dict[str, float]
    item_ids: list[str]
    per_item: dict[str, list[float]] = field(default_factory=dict)
    diagnostics: dict[str, object] = field(default_factory=dict)


ALL_METRICS = ("bleu1", "bleu2", "bleu3", "bleu4", "rouge_l", "cider")


def score_corpus(
    corpus: Sequence[CaptionRecord],
    metrics: Sequence[str] = ALL_METRICS,
    spice: Optional[dict[str, float]] = None,
) -> MetricReport:
    """Compute the requested metrics; adds spider/spider_lite when CIDEr runs.

    ``spice`` maps item_id to an externally computed SPICE score and must
    cover every corpus item when given.
    """
    scores: dict[str, float] = {}
    per_item: dict[str, list[float]] = {}
    diagnostics: dict[str, object] = {}
    for name in metrics:
        if name.startswith("bleu"):
            details = bleu_details(corpus, int(name[4:]))
            scores[name] = details.score
            if details.zero_match_orders:
                diagnostics[f"{name}_zero_match_orders"] = details.zero_match_orders
        elif name == "rouge_l":
            per_item["rouge_l"] = [rouge_l_item(r) for r in corpus]
            scores["rouge_l"] = sum(per_item["rouge_l"]) / len(corpus)
        elif name == "cider":
            per_item["cider"] = cider_scores(corpus)
            scores["cider"] = sum(per_item["cider"]) / len(corpus)
        else:
            raise ValueError(f"unknown metric {name!r}")

    if "cider" in scores:
        if spice is not None:
            missing = [r.item_id for r in corpus if r.item_id not in spice]
            if missing:
                raise MissingSpiceScore(missing[0])
            spice_mean = sum(spice[r.item_id] for r in corpus) / len(corpus)
            scores["spice"] = spice_mean
            scores["spider"] = spider(scores["cider"], spice_mean)
        else:
            scores["spider_lite"] = spider(scores["cider"])

    return MetricReport(scores, [r.item_id for r in corpus], per_item, diagnostics)
