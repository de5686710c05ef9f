#!/usr/bin/env python3
"""Scoring a small caption corpus with BLEU, ROUGE-L, CIDEr-D and SPIDEr.

Three hypotheses of decreasing quality against the same references show how
each metric reacts; an external SPICE table upgrades spider_lite to spider.
"""

from featstats import CaptionRecord, score_corpus
from featstats.caption_metrics import ALL_METRICS

references = {
    "good": ["rain falls softly on a tin roof",
             "soft rain patters against a metal roof",
             "light rain hits a roof"],
    "fair": ["a car engine idles then revs loudly",
             "an engine idles and then revs",
             "a vehicle engine runs and accelerates"],
    "poor": ["children laugh and shout in a playground",
             "kids are laughing and shouting outside",
             "several children laugh loudly"],
}
hypotheses = {
    "good": "rain falls softly on a tin roof",          # verbatim reference
    "fair": "a car engine revs loudly",                 # partial overlap
    "poor": "a dog barks near a quiet street",          # unrelated
}

corpus = [CaptionRecord.from_raw(key, hypotheses[key], refs)
          for key, refs in references.items()]

report = score_corpus(corpus, ALL_METRICS)
print("corpus scores:")
for name, value in report.scores.items():
    print(f"  {name:12s} {value:.4f}")

print("\nper-item CIDEr-D (good, fair, poor):")
print("  " + "  ".join(f"{v:.3f}" for v in report.per_item["cider"]))
if report.diagnostics:
    print(f"diagnostics: {report.diagnostics}")

spice = {"good": 0.45, "fair": 0.21, "poor": 0.02}
with_spice = score_corpus(corpus, ["cider"], spice)
print(f"\nwith external SPICE: spider={with_spice.scores['spider']:.4f} "
      f"(cider={with_spice.scores['cider']:.4f}, "
      f"spice={with_spice.scores['spice']:.4f})")
