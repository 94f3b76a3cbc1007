"""File formats: signal CSVs with JSON sidecars, epoch directories,
experiment result JSON, and figure/statistics tables.

All numeric text is written at 12 significant digits.  Non-finite values
become ``nan`` in CSV cells and ``null`` in JSON.  Writers iterate in
sorted/deterministic order so identical results produce identical bytes.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict

import numpy as np

from .emd import ImfDecomposition
from .entropy import EntropyProfile, ScaleRange
from .errors import InputFormatError
from .pipeline import ExperimentResult
from .signals import EpochSet, ProtocolSpec, TimeSeries
from .stats import StatReport, TestResult

__all__ = [
    "format_float",
    "write_timeseries_csv",
    "read_timeseries_csv",
    "write_epoch_set",
    "read_epoch_set",
    "write_imfs",
    "write_profile_csv",
    "read_profile_csv",
    "read_table_csv",
    "experiment_to_dict",
    "write_experiment_json",
    "read_experiment_json",
    "write_figure_csvs",
    "write_stats_csv",
]


def format_float(v: float) -> str:
    """12-significant-digit text form; non-finite values become ``nan``/``inf``."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.12g}"


def _j(v):
    """JSON-safe number: 12 significant digits, non-finite -> None."""
    v = float(v)
    if not math.isfinite(v):
        return None
    return float(f"{v:.12g}")


def _jlist(arr):
    return [_j(v) for v in np.asarray(arr, dtype=np.float64).ravel()]


def _sidecar_path(csv_path: str) -> str:
    root, _ = os.path.splitext(csv_path)
    return root + ".json"


def write_timeseries_csv(ts: TimeSeries, path: str,
                         meta_path: str | None = None) -> None:
    """One sample per row under a ``value`` header, plus a JSON sidecar
    carrying ``fs`` and ``label`` (default: same name, ``.json``)."""
    with open(path, "w", newline="") as f:
        f.write("value\n")
        for v in ts.samples:
            f.write(format_float(v) + "\n")
    meta = {"fs": _j(ts.fs), "label": ts.label}
    with open(meta_path or _sidecar_path(path), "w") as f:
        json.dump(meta, f, sort_keys=True, indent=2)
        f.write("\n")


def _read_metadata(meta_path: str) -> dict:
    try:
        with open(meta_path) as f:
            meta = json.load(f)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"metadata is not valid JSON: {exc}",
                               path=meta_path)
    if not isinstance(meta, dict):
        raise InputFormatError("metadata must be a JSON object", path=meta_path)
    return meta


def read_timeseries_csv(path: str, meta_path: str | None = None,
                        fs: float | None = None) -> TimeSeries:
    """Read a signal CSV; the rate comes from the sidecar (or ``fs``).

    Raises ``InputFormatError`` with the offending path and 1-based line
    number for malformed content.
    """
    if not os.path.exists(path):
        raise InputFormatError("no such file", path=path)
    label = None
    side = meta_path or _sidecar_path(path)
    if meta_path is not None or os.path.exists(side):
        if not os.path.exists(side):
            raise InputFormatError("no such metadata file", path=side)
        meta = _read_metadata(side)
        if "fs" in meta:
            try:
                fs = float(meta["fs"])
            except (TypeError, ValueError):
                raise InputFormatError(f"bad fs value {meta['fs']!r}", path=side)
        label = meta.get("label")
    if fs is None:
        raise InputFormatError(
            "sampling rate unknown: no metadata sidecar and no explicit fs",
            path=path)
    values = []
    with open(path, newline="") as f:
        header = f.readline().strip()
        if header != "value":
            raise InputFormatError(
                f"expected header 'value', got {header!r}", path=path, line=1)
        for lineno, raw in enumerate(f, start=2):
            text = raw.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise InputFormatError(f"not a number: {text!r}",
                                       path=path, line=lineno)
    if not values:
        raise InputFormatError("no samples", path=path)
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0]) + 2
        raise InputFormatError("non-finite sample", path=path, line=bad)
    return TimeSeries(arr, fs=fs, label=label)


def write_epoch_set(epochs: EpochSet, dirpath: str) -> None:
    """Write ``baseline_<k>.csv`` / ``stim_<i>.csv`` (1-based) plus one
    shared ``metadata.json`` into a directory."""
    os.makedirs(dirpath, exist_ok=True)
    label = epochs.baseline_epochs[0].label
    for k, ts in enumerate(epochs.baseline_epochs, start=1):
        _write_bare_csv(ts, os.path.join(dirpath, f"baseline_{k}.csv"))
    for i, ts in enumerate(epochs.stimulus_epochs, start=1):
        _write_bare_csv(ts, os.path.join(dirpath, f"stim_{i}.csv"))
    meta = {
        "fs": _j(epochs.fs),
        "label": label,
        "n_baseline": len(epochs.baseline_epochs),
        "n_stimuli": len(epochs.stimulus_epochs),
    }
    with open(os.path.join(dirpath, "metadata.json"), "w") as f:
        json.dump(meta, f, sort_keys=True, indent=2)
        f.write("\n")


def _write_bare_csv(ts: TimeSeries, path: str) -> None:
    with open(path, "w", newline="") as f:
        f.write("value\n")
        for v in ts.samples:
            f.write(format_float(v) + "\n")


def read_epoch_set(dirpath: str) -> EpochSet:
    """Read a directory written by ``write_epoch_set``."""
    meta_path = os.path.join(dirpath, "metadata.json")
    if not os.path.isdir(dirpath):
        raise InputFormatError("no such directory", path=dirpath)
    if not os.path.exists(meta_path):
        raise InputFormatError("missing metadata.json", path=dirpath)
    meta = _read_metadata(meta_path)
    try:
        fs = float(meta["fs"])
        n_base = int(meta["n_baseline"])
        n_stim = int(meta["n_stimuli"])
    except (KeyError, TypeError, ValueError):
        raise InputFormatError(
            "metadata must carry numeric fs, n_baseline, n_stimuli",
            path=meta_path)
    label = meta.get("label")

    def read_one(name: str) -> TimeSeries:
        p = os.path.join(dirpath, name)
        ts = read_timeseries_csv(p, meta_path=None, fs=fs)
        return TimeSeries(ts.samples, fs=fs, label=label)

    baselines = tuple(read_one(f"baseline_{k}.csv") for k in range(1, n_base + 1))
    stims = tuple(read_one(f"stim_{i}.csv") for i in range(1, n_stim + 1))
    return EpochSet(baselines, stims)


def write_imfs(dec: ImfDecomposition, dirpath: str) -> None:
    """Write ``imf_<k>.csv`` (1-based, fastest first), ``residue.csv`` and
    a ``metadata.json`` with the rate and per-mode sift counts."""
    os.makedirs(dirpath, exist_ok=True)
    for k, imf in enumerate(dec.imfs, start=1):
        _write_bare_csv(imf, os.path.join(dirpath, f"imf_{k}.csv"))
    _write_bare_csv(dec.residue, os.path.join(dirpath, "residue.csv"))
    meta = {
        "fs": _j(dec.residue.fs),
        "label": dec.residue.label,
        "n_imfs": dec.n_imfs,
        "sift_counts": list(dec.sift_counts),
    }
    with open(os.path.join(dirpath, "metadata.json"), "w") as f:
        json.dump(meta, f, sort_keys=True, indent=2)
        f.write("\n")


def _test_to_dict(t: TestResult) -> dict:
    df = t.df
    if isinstance(df, tuple):
        df = [_j(v) for v in df]
    elif df is not None:
        df = _j(df)
    return {
        "name": t.name,
        "scale": t.scale,
        "statistic": _j(t.statistic),
        "df": df,
        "p_raw": _j(t.p_raw),
        "p_adjusted": None if t.p_adjusted is None else _j(t.p_adjusted),
        "reject": bool(t.reject),
    }


def _report_to_dict(r: StatReport) -> dict:
    return {
        "family": r.family,
        "alpha": _j(r.alpha),
        "correction": r.correction,
        "tests": [_test_to_dict(t) for t in r.tests],
    }


def _protocol_to_dict(spec: ProtocolSpec) -> dict:
    d = asdict(spec)
    for key, val in d.items():
        if isinstance(val, float):
            d[key] = _j(val)
    return d


def experiment_to_dict(result: ExperimentResult) -> dict:
    """Plain-JSON form of an experiment result (NaN -> null throughout)."""
    conditions = {}
    for lbl in sorted(result.conditions):
        cond = result.conditions[lbl]
        channels = {}
        for ch in sorted(cond.channels):
            cr = cond.channels[ch]
            n_subj, n_stim, n_scales = cr.per_subject.shape
            channels[ch] = {
                "per_subject": [
                    [[_j(v) for v in cr.per_subject[s, i]] for i in range(n_stim)]
                    for s in range(n_subj)
                ],
                "group_mean": [[_j(v) for v in row] for row in cr.group_mean],
                "group_sd": [[_j(v) for v in row] for row in cr.group_sd],
                "failures": dict(sorted(cr.failures.items())),
                "reports": {k: _report_to_dict(r)
                            for k, r in sorted(cr.reports.items())},
            }
        conditions[lbl] = {
            "protocol": _protocol_to_dict(cond.protocol),
            "channels": channels,
        }
    return {
        "schema": "msent-experiment/1",
        "method": result.method,
        "scales": list(result.scales),
        "master_seed": int(result.master_seed),
        "n_subjects": int(result.n_subjects),
        "channels": list(result.channels),
        "conditions": conditions,
        "cross": {k: _report_to_dict(r) for k, r in sorted(result.cross.items())},
    }


def write_experiment_json(result: ExperimentResult | dict, path: str) -> None:
    d = result if isinstance(result, dict) else experiment_to_dict(result)
    with open(path, "w") as f:
        json.dump(d, f, sort_keys=True, indent=2, allow_nan=False)
        f.write("\n")


def read_experiment_json(path: str) -> dict:
    if not os.path.exists(path):
        raise InputFormatError("no such file", path=path)
    try:
        with open(path) as f:
            d = json.load(f)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"not valid JSON: {exc}", path=path)
    if not isinstance(d, dict) or d.get("schema") != "msent-experiment/1":
        raise InputFormatError(
            "not an experiment result (missing schema 'msent-experiment/1')",
            path=path)
    return d


def _none_to_nan(v) -> float:
    return math.nan if v is None else float(v)


def write_figure_csvs(result: ExperimentResult | dict, outdir: str) -> list[str]:
    """Figure-ready tables.

    Per channel (Oz -> ``fig3``, Fpz -> ``fig4``): panel A is the full
    trend (condition, stimulus, scale, mean, sd, and the cross-condition
    paired-t FDR flag per scale); panels B and C give first-vs-last
    stimulus means for the first and second condition (sorted order) with
    the Tukey FDR flag.  Returns the paths written.
    """
    d = result if isinstance(result, dict) else experiment_to_dict(result)
    os.makedirs(outdir, exist_ok=True)
    fig_of_channel = {"Oz": "fig3", "Fpz": "fig4"}
    cond_labels = sorted(d["conditions"])
    written = []
    for ch in d["channels"]:
        base = fig_of_channel.get(ch, f"fig_{ch}")
        cross_sig = {}
        for key, rep in d["cross"].items():
            if key.endswith(f":{ch}"):
                for t in rep["tests"]:
                    cross_sig[t["scale"]] = 1 if t["reject"] else 0
        path_a = os.path.join(outdir, f"{base}A.csv")
        with open(path_a, "w", newline="") as f:
            f.write("condition,stimulus,scale,mean,sd,sig\n")
            for lbl in cond_labels:
                chans = d["conditions"][lbl]["channels"]
                if ch not in chans:
                    continue
                block = chans[ch]
                for i, row in enumerate(block["group_mean"], start=1):
                    for pos, scale in enumerate(d["scales"]):
                        mean = _none_to_nan(row[pos])
                        sd = _none_to_nan(block["group_sd"][i - 1][pos])
                        sig = cross_sig.get(scale, 0)
                        f.write(f"{lbl},{i},{scale},{format_float(mean)},"
                                f"{format_float(sd)},{sig}\n")
        written.append(path_a)
        for panel, lbl in zip(("B", "C"), cond_labels):
            chans = d["conditions"][lbl]["channels"]
            if ch not in chans:
                continue
            block = chans[ch]
            tukey = {t["scale"]: 1 if t["reject"] else 0
                     for t in block["reports"]["tukey_first_vs_last"]["tests"]}
            path = os.path.join(outdir, f"{base}{panel}.csv")
            with open(path, "w", newline="") as f:
                f.write("scale,mean_first,sd_first,mean_last,sd_last,sig\n")
                gm = block["group_mean"]
                gs = block["group_sd"]
                for pos, scale in enumerate(d["scales"]):
                    f.write(",".join([
                        str(scale),
                        format_float(_none_to_nan(gm[0][pos])),
                        format_float(_none_to_nan(gs[0][pos])),
                        format_float(_none_to_nan(gm[-1][pos])),
                        format_float(_none_to_nan(gs[-1][pos])),
                        str(tukey.get(scale, 0)),
                    ]) + "\n")
            written.append(path)
    return written


def write_stats_csv(result: ExperimentResult | dict, path: str) -> None:
    """Flat table of every test in the result: one row per scale and family."""
    d = result if isinstance(result, dict) else experiment_to_dict(result)

    def rows():
        for lbl in sorted(d["conditions"]):
            for ch in sorted(d["conditions"][lbl]["channels"]):
                reports = d["conditions"][lbl]["channels"][ch]["reports"]
                for key in sorted(reports):
                    rep = reports[key]
                    for t in rep["tests"]:
                        yield f"{key}:{lbl}:{ch}", t
        for key in sorted(d["cross"]):
            for t in d["cross"][key]["tests"]:
                yield key, t

    with open(path, "w", newline="") as f:
        f.write("scale,test,statistic,p_raw,p_fdr,reject\n")
        for name, t in rows():
            stat = format_float(_none_to_nan(t["statistic"]))
            p_raw = format_float(_none_to_nan(t["p_raw"]))
            p_fdr = format_float(_none_to_nan(t["p_adjusted"]))
            f.write(f"{t['scale']},{name},{stat},{p_raw},{p_fdr},"
                    f"{1 if t['reject'] else 0}\n")

def write_profile_csv(profile: EntropyProfile, path: str) -> None:
    """Two columns, ``scale,value``, one row per scale factor."""
    with open(path, "w", newline="") as f:
        f.write("scale,value\n")
        for tau, v in zip(profile.scales, profile.values):
            f.write(f"{tau},{format_float(float(v))}\n")


def read_profile_csv(path: str) -> tuple[ScaleRange, np.ndarray]:
    """Read a per-scale profile table back as (scales, values)."""
    if not os.path.exists(path):
        raise InputFormatError("no such file", path=path)
    scales: list[int] = []
    values: list[float] = []
    with open(path, newline="") as f:
        header = f.readline().strip()
        if header != "scale,value":
            raise InputFormatError(
                f"expected header 'scale,value', got {header!r}", path=path, line=1)
        for lineno, raw in enumerate(f, start=2):
            text = raw.strip()
            if not text:
                continue
            parts = text.split(",")
            if len(parts) != 2:
                raise InputFormatError(f"expected 2 cells, got {len(parts)}",
                                       path=path, line=lineno)
            try:
                scales.append(int(parts[0]))
                values.append(float(parts[1]))
            except ValueError:
                raise InputFormatError(f"bad row {text!r}", path=path, line=lineno)
    if not scales:
        raise InputFormatError("no rows", path=path)
    return ScaleRange(tuple(scales)), np.asarray(values, dtype=np.float64)


def read_table_csv(path: str) -> tuple[list[str], list[list]]:
    """Read any table this package writes: header names plus rows whose
    cells are floats where they parse as numbers and strings otherwise."""
    if not os.path.exists(path):
        raise InputFormatError("no such file", path=path)
    with open(path, newline="") as f:
        header_line = f.readline().rstrip("\n")
        if not header_line:
            raise InputFormatError("empty table", path=path, line=1)
        header = header_line.split(",")
        rows = []
        for lineno, raw in enumerate(f, start=2):
            text = raw.rstrip("\n")
            if not text:
                continue
            cells = text.split(",")
            if len(cells) != len(header):
                raise InputFormatError(
                    f"expected {len(header)} cells, got {len(cells)}",
                    path=path, line=lineno)
            parsed = []
            for c in cells:
                try:
                    parsed.append(float(c))
                except ValueError:
                    parsed.append(c)
            rows.append(parsed)
    return header, rows
