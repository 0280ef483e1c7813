"""CSV/JSON formats and the matched-set log."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .net import DamageSpec, ValidationError
from .recall import RecallCurve, render5
from .survey import BinStat, LesionSurvey

CURVE_HEADER = ["m", "q", "d", "p_num", "p_den", "p_float"]
HISTOGRAM_HEADER = ["pfr_count", "pfr_float", "freq_mean_pct", "freq_std_pct", "series"]
CLASS_HEADER = [
    "label", "class_id", "members", "freq_mean_pct", "freq_std_pct",
    "curve_p_num_list", "curve_p_den_list",
]


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _pct(x: float) -> str:
    return f"{x:.6f}"


def curve_csv(curve: RecallCurve) -> str:
    n = curve.n
    rows = []
    for m, p in enumerate(curve.points):
        q = Fraction(m, n)
        rows.append([m, render5(q), render5(1 - q), p.numerator, p.denominator, render5(p)])
    return _csv_text(CURVE_HEADER, rows)


def read_curve_csv(text: str) -> RecallCurve:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CURVE_HEADER:
        raise ValidationError(f"not a curve CSV (header {reader.fieldnames})")
    rows = sorted(reader, key=lambda r: int(r["m"]))
    points = tuple(Fraction(int(r["p_num"]), int(r["p_den"])) for r in rows)
    return RecallCurve(len(points) - 1, points)


def histogram_csv(stats: Sequence[BinStat], n: int, series: int) -> str:
    rows = [
        [b.key, render5(b.probability(n)), _pct(100 * float(b.mean)), _pct(100 * b.std), series]
        for b in stats
    ]
    return _csv_text(HISTOGRAM_HEADER, rows)


def read_histogram_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != HISTOGRAM_HEADER:
        raise ValidationError(f"not a histogram CSV (header {reader.fieldnames})")
    return [
        {
            "pfr_count": int(r["pfr_count"]),
            "pfr_float": float(r["pfr_float"]),
            "freq_mean_pct": float(r["freq_mean_pct"]),
            "freq_std_pct": float(r["freq_std_pct"]),
            "series": int(r["series"]),
        }
        for r in reader
    ]


def classification_csv(classes) -> str:
    rows = []
    for idx, c in enumerate(classes):
        rows.append([
            c.label, idx, len(c.member_sets), _pct(c.freq_mean_pct), _pct(c.freq_std_pct),
            ";".join(str(p.numerator) for p in c.curve.points),
            ";".join(str(p.denominator) for p in c.curve.points),
        ])
    return _csv_text(CLASS_HEADER, rows)


def write_match_log(path: Path, survey: LesionSurvey, key: int) -> int:
    """One canonical cut set per matched trial, in (series, trial) order."""
    lines = [f"#manifest {survey.config.config_hash()}"]
    ms = survey.matches_for(key)
    lines += [DamageSpec.cuts(survey.cut_set(m)).to_line() for m in ms]
    Path(path).write_text("\n".join(lines) + "\n")
    return len(ms)


def read_match_log(path: Path) -> tuple[str, list[DamageSpec]]:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#manifest "):
        raise ValidationError(f"{path}: missing '#manifest <hash>' header")
    digest = lines[0].split(None, 1)[1].strip()
    return digest, [DamageSpec.from_line(l) for l in lines[1:] if l.strip()]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def payload_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
