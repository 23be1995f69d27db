"""Self-contained HTML report: waveform with crackle windows highlighted."""

from __future__ import annotations

import html
import json

import numpy as np

MAX_POINTS = 4000
_W, _H = 1000, 160

_STYLE = """
body{font-family:system-ui,sans-serif;margin:1.5em;color:#222}
h2{font-size:1.05em;margin:1.4em 0 .3em}
svg{width:100%;height:auto;background:#fafafa;border:1px solid #ddd}
.wave{fill:none;stroke:#36c;stroke-width:.6}
.hit{fill:#e33}
table{border-collapse:collapse;font-size:.85em;margin-top:.4em}
td,th{padding:2px 8px;border-bottom:1px solid #eee;text-align:right}
"""


def envelope(samples, max_points=MAX_POINTS):
    """Min/max pairs over equal buckets, at most ``max_points`` values in total."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size <= max_points:
        return np.arange(x.size), x
    buckets = max_points // 2
    edges = np.linspace(0, x.size, buckets + 1).astype(int)
    idx, val = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        seg = x[a:b]
        lo, hi = int(np.argmin(seg)), int(np.argmax(seg))
        for k in sorted((lo, hi)):
            idx.append(a + k)
            val.append(seg[k])
    return np.array(idx), np.array(val)


def _recording_svg(recording, results):
    n = max(len(recording), 1)
    idx, val = envelope(recording.samples)
    peak = max(float(np.max(np.abs(val))) if val.size else 0.0, 1e-9)
    pts = " ".join(f"{_W * i / n:.2f},{_H / 2 - (_H / 2 - 4) * v / peak:.2f}"
                   for i, v in zip(idx, val))
    rects = []
    for r in results:
        if r.label != "crackle":
            continue
        x0 = _W * r.start_time * recording.sample_rate / n
        w = _W * (r.end_time - r.start_time) * recording.sample_rate / n
        rects.append(
            f'<rect class="hit" x="{x0:.2f}" y="0" width="{w:.2f}" height="{_H}" '
            f'opacity="{0.15 + 0.45 * r.confidence:.3f}">'
            f"<title>{r.start_time:.3f}-{r.end_time:.3f} s, confidence {r.confidence:.2f}</title></rect>"
        )
    return (f'<svg viewBox="0 0 {_W} {_H}" preserveAspectRatio="none">'
            + "".join(rects) + f'<polyline class="wave" points="{pts}"/></svg>')


def render_html(classified, config=None, title="Crackle detection report") -> str:
    """``classified`` is a sequence of ``(AudioRecording, [ClassificationResult])``."""
    parts = [
        "<!DOCTYPE html><html><head><meta charset=\"utf-8\">",
        '<meta name="viewport" content="width=device-width, initial-scale=1">',
        f"<title>{html.escape(title)}</title><style>{_STYLE}</style></head><body>",
        f"<h1>{html.escape(title)}</h1>",
    ]
    for rec, results in classified:
        hits = [r for r in results if r.label == "crackle"]
        parts.append(f"<h2>{html.escape(rec.source_id)} &middot; {rec.duration:.2f} s &middot; "
                     f"{len(hits)} of {len(results)} windows flagged</h2>")
        parts.append(_recording_svg(rec, results))
        if hits:
            parts.append("<table><tr><th>start (s)</th><th>end (s)</th><th>confidence</th></tr>")
            parts += [f"<tr><td>{r.start_time:.3f}</td><td>{r.end_time:.3f}</td>"
                      f"<td>{r.confidence:.3f}</td></tr>" for r in hits]
            parts.append("</table>")
    if config is not None:
        cfg = json.dumps(config, sort_keys=True).replace("</", "<\\/")
        parts.append(f'<script type="application/json" id="run-config">{cfg}</script>')
    parts.append("</body></html>\n")
    return "".join(parts)
