"""Render benchmark CSVs to figure files.

Three figure kinds, one per CSV schema produced by the beamkm CLI:

  gain_vs_snr     summary.csv (one mean-gain line plus exhaustive/genie
                  references) or results.csv (one line per estimator/solver
                  combination present in the rows)
  timing          bench-bqp CSV: grouped bars of mean solve time per
                  dimension and method
  ks_calibration  calibrate-ks CSV: empirical false-alarm rate vs the
                  target rate, with the y = x reference

CSV files are the only coupling to the producing library. Schema
violations raise SchemaError naming the offending column; empty inputs
raise before any image is written. Rendering is read-only and overwrites
its output idempotently.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

KINDS = ("gain_vs_snr", "timing", "ks_calibration")


class SchemaError(ValueError):
    """The input CSV does not match the documented schema."""


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str
    kind: str
    output: str
    title: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not Path(self.input_csv).is_file():
            raise ValueError(f"input CSV not found: {self.input_csv}")


def _read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        header = reader.fieldnames or []
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return header, rows


def _column(rows, header, name, path, cast=float):
    if name not in header:
        raise SchemaError(f"{path}: missing required column {name!r}")
    try:
        return [cast(row[name]) for row in rows]
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: column {name!r} failed to parse: {exc}") from None


def _gain_figure(spec):
    header, rows = _read_rows(spec.input_csv)
    fig, ax = plt.subplots(figsize=(6.4, 4.4), layout="constrained")
    if "mean_gain_db" in header:  # summary.csv
        snr = _column(rows, header, "snr_db", spec.input_csv)
        km = _column(rows, header, "mean_gain_db", spec.input_csv)
        exh = _column(rows, header, "mean_exhaustive_gain_db", spec.input_csv)
        genie = _column(rows, header, "mean_genie_gain_db", spec.input_csv)
        ax.plot(snr, km, "o-", label="km")
        snr_ticks = snr
    else:  # results.csv: aggregate per (estimator, solver)
        snr_all = _column(rows, header, "snr_db", spec.input_csv)
        gain = _column(rows, header, "gain_db", spec.input_csv)
        exh_all = _column(rows, header, "exhaustive_gain_db", spec.input_csv)
        genie_all = _column(rows, header, "genie_gain_db", spec.input_csv)
        est = _column(rows, header, "estimator", spec.input_csv, cast=str)
        sol = _column(rows, header, "solver", spec.input_csv, cast=str)
        snr_ticks = sorted(set(snr_all))
        mean = lambda vals: sum(vals) / len(vals)
        for combo in sorted(set(zip(est, sol))):
            series = [mean([g for g, s, e, o in zip(gain, snr_all, est, sol)
                            if s == snr and (e, o) == combo])
                      for snr in snr_ticks]
            ax.plot(snr_ticks, series, "o-", label=f"km ({combo[0]}, {combo[1]})")
        exh = [mean([g for g, s in zip(exh_all, snr_all) if s == snr])
               for snr in snr_ticks]
        genie = [mean([g for g, s in zip(genie_all, snr_all) if s == snr])
                 for snr in snr_ticks]
        snr = snr_ticks
    ax.plot(snr, exh, "s--", label="exhaustive")
    ax.plot(snr, genie, "k:", label="genie")
    ax.set_xticks(snr_ticks)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("mean beamforming gain (dB)")
    ax.set_title(spec.title or "Beamforming gain vs SNR")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def _timing_figure(spec):
    header, rows = _read_rows(spec.input_csv)
    dims = _column(rows, header, "d", spec.input_csv, cast=int)
    methods = _column(rows, header, "method", spec.input_csv, cast=str)
    means = _column(rows, header, "mean_ms", spec.input_csv)
    _column(rows, header, "median_ms", spec.input_csv)
    uniq_d = sorted(set(dims))
    uniq_m = sorted(set(methods))
    width = 0.8 / len(uniq_m)
    fig, ax = plt.subplots(figsize=(6.4, 4.4), layout="constrained")
    for k, method in enumerate(uniq_m):
        xs = [i + (k - (len(uniq_m) - 1) / 2) * width
              for i, d in enumerate(uniq_d)]
        ys = [next(m for m, dd, mm in zip(means, dims, methods)
                   if dd == d and mm == method) for d in uniq_d]
        ax.bar(xs, ys, width=width, label=method)
    ax.set_yscale("log")
    ax.set_xticks(range(len(uniq_d)), [str(d) for d in uniq_d])
    ax.set_xlabel("dimension D")
    ax.set_ylabel("mean solve time (ms)")
    ax.set_title(spec.title or "Binary-subproblem solve time")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    return fig


def _calibration_figure(spec):
    header, rows = _read_rows(spec.input_csv)
    alpha = _column(rows, header, "alpha", spec.input_csv)
    fa = _column(rows, header, "empirical_fa", spec.input_csv)
    _column(rows, header, "L", spec.input_csv, cast=int)
    fig, ax = plt.subplots(figsize=(5.2, 4.4), layout="constrained")
    order = sorted(range(len(alpha)), key=lambda i: alpha[i])
    ax.plot([alpha[i] for i in order], [fa[i] for i in order], "o-",
            label="empirical")
    lim = max(alpha + fa) * 1.1 or 1.0
    ax.plot([0.0, lim], [0.0, lim], "k--", alpha=0.6, label="target")
    ax.set_xlabel("target false-alarm rate")
    ax.set_ylabel("empirical false-alarm rate")
    ax.set_title(spec.title or "KS detector calibration")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


_BUILDERS = {"gain_vs_snr": _gain_figure, "timing": _timing_figure,
             "ks_calibration": _calibration_figure}


def build_figure(spec):
    """The matplotlib figure for a spec, without writing anything."""
    return _BUILDERS[spec.kind](spec)


def render(spec):
    """Render the spec to its output path (PNG or SVG by extension)."""
    fig = build_figure(spec)
    try:
        fig.savefig(spec.output)
    finally:
        plt.close(fig)
    return spec.output
