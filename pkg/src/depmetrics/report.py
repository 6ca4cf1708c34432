"""Run configuration, corpus loading, and deterministic output rendering.

One run turns input files into a fixed set of CSV tables plus a consolidated
JSON report. Identical inputs and configuration produce byte-identical
outputs: rows are explicitly ordered (ascending length, metric name, valency
class), floats are rendered with fixed formats, and no timestamps are
embedded. Every run also emits a metadata block (tool version, config echo,
input digests) sufficient to reproduce it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import (
    CorrelationPoint,
    SeriesPoint,
    ValencyCell,
    ValencyFit,
    conditional_distributions,
    entropy_by_sl,
    find_intersection,
    fit_valency_models,
    length_histogram,
    mean_metric_by_sl,
    pooled_distribution,
    spearman_by_sl,
    split_gated,
    valency_conditioned_counts,
)
from .errors import ConfigError
from .metrics import MetricRecord, metric_record
from .randtree import RNG_NAME
from .stats import Distribution, significance_stars
from .treebank import FORMATS, Rejection, Sentence, ValencyLexicon, parse

log = logging.getLogger(__name__)

TOOL_NAME = "depmetrics"

ENTROPY_BASES = {"2": 2.0, "e": math.e, "10": 10.0}
LOG_BASES = {"e": math.e, "10": 10.0}


@dataclass
class RunConfig:
    """Declarative settings for one analysis run; see the CLI for defaults."""

    inputs: list[tuple[str, str]] = field(default_factory=list)
    sl_min: int = 2
    sl_max: int = 20
    dist_sls: tuple[int, ...] = (5, 10, 15, 20, 25, 30)
    min_bucket: int = 10
    valency_mode: str = "root-out-degree"
    lexicon_path: str | None = None
    entropy_base: str = "2"
    log_base: str = "e"
    seed: int | None = None
    output_dir: str = "."
    drop_punct: bool = False

    def validate(self) -> None:
        if not 2 <= self.sl_min <= self.sl_max:
            raise ConfigError(f"need 2 <= sl_min <= sl_max, got [{self.sl_min}, {self.sl_max}]")
        if self.min_bucket < 3:
            raise ConfigError(f"min_bucket must be >= 3, got {self.min_bucket}")
        if any(sl < 2 for sl in self.dist_sls):
            raise ConfigError(f"distribution lengths must all be >= 2, got {list(self.dist_sls)}")
        if self.valency_mode not in ("lexicon", "root-out-degree"):
            raise ConfigError(f"unknown valency mode {self.valency_mode!r}")
        if self.valency_mode == "lexicon" and not self.lexicon_path:
            raise ConfigError("valency mode 'lexicon' requires --lexicon PATH")
        if self.entropy_base not in ENTROPY_BASES:
            raise ConfigError(f"entropy base must be one of {sorted(ENTROPY_BASES)}")
        if self.log_base not in LOG_BASES:
            raise ConfigError(f"log base must be one of {sorted(LOG_BASES)}")
        for _, fmt in self.inputs:
            if fmt not in FORMATS:
                raise ConfigError(f"unknown input format {fmt!r}; expected one of {FORMATS}")

    @property
    def entropy_base_value(self) -> float:
        return ENTROPY_BASES[self.entropy_base]

    @property
    def log_base_value(self) -> float:
        return LOG_BASES[self.log_base]

    def to_json_dict(self) -> dict[str, object]:
        # output_dir is deliberately not echoed: the same corpus and settings
        # must produce byte-identical outputs wherever they are written.
        return {
            "inputs": [{"path": path, "format": fmt} for path, fmt in self.inputs],
            "sl_min": self.sl_min,
            "sl_max": self.sl_max,
            "dist_sls": list(self.dist_sls),
            "min_bucket": self.min_bucket,
            "valency_mode": self.valency_mode,
            "lexicon_path": self.lexicon_path,
            "entropy_base": self.entropy_base,
            "log_base": self.log_base,
            "seed": self.seed,
            "drop_punct": self.drop_punct,
        }


@dataclass
class InputSummary:
    path: str
    format: str
    sha256: str
    accepted: int
    rejected: int


@dataclass
class CorpusData:
    """Everything loaded from the configured inputs."""

    sentences: list[Sentence]
    records: list[MetricRecord]  # aligned with record_sentences; n >= 2 only
    record_sentences: list[Sentence]
    rejections: list[Rejection]
    single_node_count: int
    inputs: list[InputSummary]


def load_corpus(config: RunConfig) -> CorpusData:
    """Parse all configured inputs, skipping invalid sentences with a reason."""
    sentences: list[Sentence] = []
    records: list[MetricRecord] = []
    record_sentences: list[Sentence] = []
    rejections: list[Rejection] = []
    single_node = 0
    summaries: list[InputSummary] = []
    for path, fmt in config.inputs:
        data = Path(path).read_bytes()
        digest = hashlib.sha256(data).hexdigest()
        file_rejections: list[Rejection] = []
        parsed = parse(
            data,
            fmt,
            source=os.path.basename(path),
            errors="skip",
            rejections=file_rejections,
            drop_punct=config.drop_punct,
        )
        for sentence in parsed:
            sentences.append(sentence)
            if len(sentence) >= 2:
                records.append(metric_record(sentence))
                record_sentences.append(sentence)
            else:
                single_node += 1
        for rejection in file_rejections:
            log.warning("skipping sentence at %s: %s", rejection.source, rejection.reason)
        rejections.extend(file_rejections)
        summaries.append(
            InputSummary(
                path=path,
                format=fmt,
                sha256=digest,
                accepted=len(parsed),
                rejected=len(file_rejections),
            )
        )
    return CorpusData(
        sentences=sentences,
        records=records,
        record_sentences=record_sentences,
        rejections=rejections,
        single_node_count=single_node,
        inputs=summaries,
    )


@dataclass
class Analyses:
    """All computed tables for one run."""

    length_hist: dict[int, int]  # full corpus, no length window
    pooled: dict[str, Distribution]
    conditional: dict[str, dict[int, Distribution]]
    entropy_points: dict[str, list[SeriesPoint]]
    entropy_gated: dict[str, list[SeriesPoint]]
    mdd_series: list[SeriesPoint]
    mhd_series: list[SeriesPoint]
    crossings: list[tuple[int, int]]
    corr_points: list[CorrelationPoint]
    corr_gated: list[CorrelationPoint]
    valency_cells: list[ValencyCell]
    valency_fits: list[ValencyFit]
    lexicon_misses: int


def compute_analyses(config: RunConfig, corpus: CorpusData) -> Analyses:
    """Run every analysis on the loaded corpus.

    The length histogram covers the full corpus (including single-node
    sentences); everything else is restricted to [sl_min, sl_max].
    """
    hist = length_histogram(corpus.records)
    if corpus.single_node_count:
        hist = {1: corpus.single_node_count, **hist}

    window = [
        (record, sentence)
        for record, sentence in zip(corpus.records, corpus.record_sentences)
        if config.sl_min <= record.sl <= config.sl_max
    ]
    win_records = [record for record, _ in window]
    win_sentences = [sentence for _, sentence in window]

    pooled = {
        metric: pooled_distribution(corpus.records, metric, config.sl_min, config.sl_max)
        for metric in ("dd", "hd")
    }
    conditional = {
        metric: conditional_distributions(win_records, metric, config.dist_sls)
        for metric in ("dd", "hd")
    }
    entropy_points = {}
    entropy_gated = {}
    for metric in ("dd", "hd"):
        points = entropy_by_sl(win_records, metric, base=config.entropy_base_value)
        entropy_points[metric], entropy_gated[metric] = split_gated(points, config.min_bucket)

    mdd_series, mhd_series = mean_metric_by_sl(win_records)
    crossings = find_intersection(mdd_series, mhd_series)
    corr_points, corr_gated = split_gated(spearman_by_sl(win_records), config.min_bucket)

    lexicon = None
    if config.valency_mode == "lexicon":
        lexicon_path = config.lexicon_path
        assert lexicon_path is not None  # enforced by RunConfig.validate
        lexicon = ValencyLexicon.from_tsv(Path(lexicon_path).read_bytes(), source=lexicon_path)
    cells, misses = valency_conditioned_counts(
        win_records, win_sentences, lexicon=lexicon, valency_mode=config.valency_mode
    )
    fits = fit_valency_models(cells, log_base=config.log_base_value)

    return Analyses(
        length_hist=hist,
        pooled=pooled,
        conditional=conditional,
        entropy_points=entropy_points,
        entropy_gated=entropy_gated,
        mdd_series=mdd_series,
        mhd_series=mhd_series,
        crossings=crossings,
        corr_points=corr_points,
        corr_gated=corr_gated,
        valency_cells=cells,
        valency_fits=fits,
        lexicon_misses=misses,
    )


# --- rendering ---------------------------------------------------------------


def _f4(x: float) -> str:
    return f"{x:.4f}"


def _prob(x: float) -> str:
    return f"{x:.6f}"


def _pval(x: float) -> str:
    return f"{x:.6g}"


def render_dist_csv(config: RunConfig, analyses: Analyses) -> str:
    lines = ["metric,sl_bucket,value,count,probability"]
    pooled_bucket = f"{config.sl_min}-{config.sl_max}"
    for metric in ("dd", "hd"):
        dist = analyses.pooled[metric]
        total = dist.total
        for value in dist.support():
            count = dist.counts[value]
            lines.append(f"{metric},{pooled_bucket},{value},{count},{_prob(count / total)}")
        for sl in sorted(analyses.conditional[metric]):
            dist = analyses.conditional[metric][sl]
            total = dist.total
            for value in dist.support():
                count = dist.counts[value]
                lines.append(f"{metric},{sl},{value},{count},{_prob(count / total)}")
    return "\n".join(lines) + "\n"


def _entropy_csv(points_by_metric: dict[str, list[SeriesPoint]]) -> str:
    lines = ["metric,sl,entropy_bits,n"]
    for metric in ("dd", "hd"):
        for point in points_by_metric.get(metric, []):
            lines.append(f"{metric},{point.sl},{_f4(point.value)},{point.n}")
    return "\n".join(lines) + "\n"


def render_entropy_csv(analyses: Analyses) -> str:
    return _entropy_csv(analyses.entropy_points)


def render_entropy_gated_csv(analyses: Analyses) -> str:
    return _entropy_csv(analyses.entropy_gated)


def render_trend_csv(analyses: Analyses) -> str:
    lines = ["sl,mean_mdd,mean_mhd,n"]
    for mdd_point, mhd_point in zip(analyses.mdd_series, analyses.mhd_series):
        lines.append(
            f"{mdd_point.sl},{_f4(mdd_point.value)},{_f4(mhd_point.value)},{mdd_point.n}"
        )
    return "\n".join(lines) + "\n"


def _corr_csv(points: Sequence[CorrelationPoint]) -> str:
    lines = ["sl,rho,p_value,n"]
    for point in points:
        lines.append(f"{point.sl},{_f4(point.rho)},{_pval(point.p_value)},{point.n}")
    return "\n".join(lines) + "\n"


def render_corr_csv(analyses: Analyses) -> str:
    return _corr_csv(analyses.corr_points)


def render_corr_gated_csv(analyses: Analyses) -> str:
    return _corr_csv(analyses.corr_gated)


def render_valency_csv(analyses: Analyses) -> str:
    lines = ["valency,sl,avg_dd1,avg_hd1,n"]
    for cell in analyses.valency_cells:
        lines.append(f"{cell.valency},{cell.sl},{_f4(cell.avg_dd1)},{_f4(cell.avg_hd1)},{cell.n}")
    return "\n".join(lines) + "\n"


def render_valency_fit_csv(analyses: Analyses) -> str:
    lines = [
        "metric,valency,n,slope,se_slope,stars_slope,intercept,se_intercept,stars_intercept,model,adj_r2"
    ]
    for fit in analyses.valency_fits:
        r = fit.result
        lines.append(
            ",".join(
                [
                    fit.metric,
                    str(fit.valency),
                    str(r.n),
                    _f4(r.slope),
                    _f4(r.se_slope),
                    significance_stars(r.p_slope),
                    _f4(r.intercept),
                    _f4(r.se_intercept),
                    significance_stars(r.p_intercept),
                    f'"{r.model_string()}"',
                    _f4(r.adj_r2),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _dist_json(dist: Distribution) -> dict[str, object]:
    return {
        "total": dist.total,
        "counts": {str(v): dist.counts[v] for v in dist.support()},
        "probabilities": {str(v): round(p, 6) for v, p in dist.probabilities().items()},
    }


def run_meta(config: RunConfig, corpus: CorpusData, command: str) -> dict[str, object]:
    meta: dict[str, object] = {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "config": config.to_json_dict(),
        "inputs": [
            {
                "path": s.path,
                "format": s.format,
                "sha256": s.sha256,
                "accepted": s.accepted,
                "rejected": s.rejected,
            }
            for s in corpus.inputs
        ],
        "sentence_counts": {
            "accepted": len(corpus.sentences),
            "rejected": len(corpus.rejections),
            "single_node": corpus.single_node_count,
        },
    }
    if config.seed is not None:
        meta["rng"] = {"name": RNG_NAME, "seed": config.seed}
    return meta


def report_json_dict(config: RunConfig, corpus: CorpusData, analyses: Analyses) -> dict[str, object]:
    return {
        "meta": run_meta(config, corpus, "report"),
        "length_histogram": {str(sl): count for sl, count in analyses.length_hist.items()},
        "pooled_distribution": {m: _dist_json(analyses.pooled[m]) for m in ("dd", "hd")},
        "conditional_distributions": {
            m: {str(sl): _dist_json(d) for sl, d in sorted(analyses.conditional[m].items())}
            for m in ("dd", "hd")
        },
        "entropy_by_sl": {
            "base": config.entropy_base,
            "series": {
                m: [
                    {"sl": p.sl, "entropy": round(p.value, 4), "n": p.n}
                    for p in analyses.entropy_points[m]
                ]
                for m in ("dd", "hd")
            },
        },
        "trend": [
            {"sl": m.sl, "mean_mdd": round(m.value, 4), "mean_mhd": round(h.value, 4), "n": m.n}
            for m, h in zip(analyses.mdd_series, analyses.mhd_series)
        ],
        "crossings": [list(interval) for interval in analyses.crossings],
        "correlation_by_sl": [
            {"sl": p.sl, "rho": round(p.rho, 4), "p_value": p.p_value, "n": p.n}
            for p in analyses.corr_points
        ],
        "valency": {
            "mode": config.valency_mode,
            "lexicon_misses": analyses.lexicon_misses,
            "cells": [
                {
                    "valency": c.valency,
                    "sl": c.sl,
                    "avg_dd1": round(c.avg_dd1, 4),
                    "avg_hd1": round(c.avg_hd1, 4),
                    "n": c.n,
                }
                for c in analyses.valency_cells
            ],
            "fits": [
                {
                    "metric": f.metric,
                    "valency": f.valency,
                    "n": f.result.n,
                    "slope": round(f.result.slope, 4),
                    "se_slope": round(f.result.se_slope, 4),
                    "p_slope": f.result.p_slope,
                    "intercept": round(f.result.intercept, 4),
                    "se_intercept": round(f.result.se_intercept, 4),
                    "p_intercept": f.result.p_intercept,
                    "model": f.result.model_string(),
                    "adj_r2": round(f.result.adj_r2, 4),
                }
                for f in analyses.valency_fits
            ],
        },
        "gated": {
            "min_bucket": config.min_bucket,
            "entropy": {
                m: [
                    {"sl": p.sl, "entropy": round(p.value, 4), "n": p.n}
                    for p in analyses.entropy_gated[m]
                ]
                for m in ("dd", "hd")
            },
            "correlation": [
                {"sl": p.sl, "rho": round(p.rho, 4), "p_value": p.p_value, "n": p.n}
                for p in analyses.corr_gated
            ],
        },
        "rejections": [
            {"source": r.source, "reason": r.reason, "sentence_id": r.sentence_id}
            for r in corpus.rejections
        ],
    }


def json_text(obj: object) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


REPORT_RENDERERS = {
    "dist.csv": lambda cfg, a: render_dist_csv(cfg, a),
    "entropy.csv": lambda cfg, a: render_entropy_csv(a),
    "entropy_gated.csv": lambda cfg, a: render_entropy_gated_csv(a),
    "trend.csv": lambda cfg, a: render_trend_csv(a),
    "corr.csv": lambda cfg, a: render_corr_csv(a),
    "corr_gated.csv": lambda cfg, a: render_corr_gated_csv(a),
    "valency.csv": lambda cfg, a: render_valency_csv(a),
    "valency_fit.csv": lambda cfg, a: render_valency_fit_csv(a),
}


def write_outputs(output_dir: str, files: dict[str, str]) -> list[str]:
    """Write rendered texts into ``output_dir``; remove partial output on failure."""
    directory = Path(output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name, text in files.items():
            target = directory / name
            target.write_bytes(text.encode("utf-8"))
            written.append(target)
    except Exception:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise
    return [str(p) for p in written]
