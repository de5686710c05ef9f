#!/usr/bin/env python3
"""Writing and reading feature tensors plus a run manifest.

Shows the `.fst` binary layout, lossless round trips for both dtypes, and
how a manifest links epochs to tensor files and scores.
"""

import io
import tempfile
from pathlib import Path

import numpy as np

from featstats import (
    FeatureTensor,
    ManifestEntry,
    RunManifest,
    load_manifest,
    read_tensor,
    save_manifest,
    write_tensor,
)
from featstats.tensor_store import HEADER_SIZE

rng = np.random.default_rng(1)

t = FeatureTensor(rng.normal(size=(4, 12, 64)).astype(np.float32))
buf = io.BytesIO()
n_bytes = write_tensor(t, buf)
print(f"tensor dims {t.dims} -> {n_bytes} bytes "
      f"({HEADER_SIZE} header + {t.data.size * 4} payload)")
print(f"header starts with: {buf.getvalue()[:4]!r}")

buf.seek(0)
back = read_tensor(buf)
print(f"round trip lossless: {np.array_equal(back.data, t.data)}")

# lenient mode tolerates (and counts) non-finite activations
bad = t.data.copy()
bad[0, 0, 0] = np.nan
buf = io.BytesIO()
write_tensor(FeatureTensor(bad), buf)
buf.seek(0)
lenient = read_tensor(buf, strict=False)
print(f"lenient read flagged {lenient.nonfinite_count} non-finite element(s)")

with tempfile.TemporaryDirectory() as tmp:
    run = Path(tmp)
    entries = []
    for epoch in range(3):
        name = f"ep{epoch:03d}.fst"
        with open(run / name, "wb") as fh:
            write_tensor(FeatureTensor(rng.normal(size=(4, 12, 64))
                                       .astype(np.float32)), fh)
        entries.append(ManifestEntry(epoch, name,
                                     {"spider": 0.1 + 0.05 * epoch}, "cnn10"))
    save_manifest(RunManifest(entries, root=run), run / "manifest.jsonl")

    manifest = load_manifest(run / "manifest.jsonl")
    print(f"\nmanifest epochs: {manifest.epochs()}")
    print(f"spider series:   {manifest.score_series('spider')}")
