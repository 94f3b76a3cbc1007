"""Command-line interface.

Subcommands: ``gen`` (synthetic epoch sets), ``preprocess`` (decimate /
filter / artifact rejection), ``emd`` (mode decomposition), ``entropy``
(one method's multiscale profile), ``experiment`` (the full multi-subject
protocol with statistics), ``stats`` (re-tabulate a result JSON),
``compare`` (every method on identical data).

Exit codes: 0 success, 2 usage or input problems, 3 computation failures
(the stderr line carries the error tag and failing stage).

Every subcommand accepts ``--config FILE``: a JSON object whose keys are
the subcommand's flag names with underscores.  Explicit flags win over
config values, config values win over built-in defaults, and unknown
config keys are rejected.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import io as msio
from .emd import EmdConfig, decompose
from .entropy import DispersionParams, FuzzyParams, SampleParams, ScaleRange
from .entropy import ApproximateParams
from .errors import AnalysisError, InputFormatError, InvalidArgument
from .pipeline import (ExperimentConfig, MethodId, PipelineConfig,
                       run_experiment, method_profile, subject_epochs)
from .signals import ProtocolSpec, decimate, fir_filter, reject_artifacts

METHOD_NAMES = tuple(m.value for m in MethodId)

# experiment-level defaults for the mode band and tolerance handling;
# chosen so the end-to-end habituation effect is expressed at (nearly)
# every scale rather than only below the averaging dead zone
EXPERIMENT_BAND = "1,10"
EXPERIMENT_R_MODE = "per-scale"

_DEFAULTS: dict[str, dict] = {
    "gen": {
        "subjects": 2, "seed": 0, "channel": "Oz", "conditions": "CE:15,OE:20",
        "noise": "white", "snr0": 2.0, "decay": 0.6, "stim_dur": 10.0,
        "baseline_dur": 60.0, "n_stimuli": 5, "n_baselines": 3, "fs": 250.0,
        "frontal_gain": 0.3,
    },
    "preprocess": {
        "artifact_threshold": None, "target_fs": None, "highpass": None,
        "lowpass": None, "fs": None, "meta": None,
    },
    "emd": {
        "max_imfs": 20, "max_sift_iters": 100, "sift_sd": 0.2,
        "fs": None, "meta": None,
    },
    "entropy": {
        "method": "mife", "scales": "1..20", "m": 2, "r": 0.15, "n": 2.0,
        "classes": 6, "delay": 1, "r_mode": "per-scale", "band": "5,10",
        "fs": None, "meta": None,
    },
    "experiment": {
        "subjects": 40, "seed": 0, "method": "mife",
        "conditions": "CE:15,OE:20", "noise": "white", "snr0": 2.0,
        "decay": 0.6, "stim_dur": 10.0, "baseline_dur": 60.0, "n_stimuli": 5,
        "n_baselines": 3, "fs": 250.0, "channels": "Oz,Fpz",
        "frontal_gain": 0.3, "scales": "1..20", "m": 2, "r": 0.15, "n": 2.0,
        "r_mode": EXPERIMENT_R_MODE, "band": EXPERIMENT_BAND, "workers": 1,
        "alpha": 0.05,
    },
    "stats": {},
    "compare": {},
}
_DEFAULTS["compare"] = dict(_DEFAULTS["experiment"])
_DEFAULTS["compare"].pop("method")
_DEFAULTS["compare"]["methods"] = ",".join(METHOD_NAMES)
_DEFAULTS["compare"]["subjects"] = 10


class _Usage(Exception):
    """Bad flag/config values detected before computation starts."""


def _first(*vals):
    for v in vals:
        if v is not None:
            return v
    return None


def _load_config(path: str, allowed) -> dict:
    try:
        with open(path) as f:
            cfg = json.load(f)
    except OSError:
        raise InputFormatError("cannot read config file", path=path)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"config is not valid JSON: {exc}", path=path)
    if not isinstance(cfg, dict):
        raise InputFormatError("config must be a JSON object", path=path)
    unknown = set(cfg) - set(allowed)
    if unknown:
        raise InputFormatError(
            f"unknown config keys: {', '.join(sorted(unknown))}", path=path)
    return cfg


def _resolve(args: argparse.Namespace, command: str) -> argparse.Namespace:
    """Layer explicit flags over config values over built-in defaults."""
    defaults = _DEFAULTS[command]
    cfg = {}
    if getattr(args, "config", None):
        cfg = _load_config(args.config, defaults.keys())
    for dest, builtin in defaults.items():
        value = _first(getattr(args, dest, None), cfg.get(dest), builtin)
        setattr(args, dest, value)
    return args


def _parse_conditions(text: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise _Usage(f"bad condition {part!r}; expected LABEL:FLICKER_HZ")
        label, hz = part.split(":", 1)
        label = label.strip()
        try:
            out[label] = float(hz)
        except ValueError:
            raise _Usage(f"bad flicker frequency {hz!r} for condition {label!r}")
    if not out:
        raise _Usage("no conditions given")
    return out


def _parse_band(text: str) -> tuple[int, int]:
    try:
        lo_s, hi_s = text.split(",", 1)
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise _Usage(f"bad band {text!r}; expected LO,HI")
    return lo, hi


def _parse_scales(text: str) -> ScaleRange:
    try:
        return ScaleRange.from_spec(text)
    except InvalidArgument as exc:
        raise _Usage(str(exc))


def _read_input(args) -> "object":
    return msio.read_timeseries_csv(args.input, meta_path=args.meta, fs=args.fs)


def _protocols(args) -> dict[str, ProtocolSpec]:
    conditions = _parse_conditions(args.conditions)
    try:
        return {
            label: ProtocolSpec(
                condition=label, flicker_hz=hz, n_stimuli=int(args.n_stimuli),
                stim_dur_s=float(args.stim_dur),
                n_baseline_epochs=int(args.n_baselines),
                baseline_dur_s=float(args.baseline_dur), fs=float(args.fs),
                snr0=float(args.snr0), habituation_decay=float(args.decay),
                noise_kind=args.noise, seed=0)
            for label, hz in conditions.items()
        }
    except InvalidArgument as exc:
        raise _Usage(str(exc))


def _pipeline_config(args) -> PipelineConfig:
    try:
        scales = _parse_scales(args.scales)
        m = int(args.m)
        r = float(args.r)
        band = _parse_band(args.band)
        return PipelineConfig(
            emd=EmdConfig(band=band),
            fuzzy=FuzzyParams(m=m, r=r, n=float(args.n)),
            sample=SampleParams(m=m, r=r),
            approximate=ApproximateParams(m=m, r=r),
            dispersion=DispersionParams(
                m=m, n_classes=int(getattr(args, "classes", 6) or 6),
                delay=int(getattr(args, "delay", 1) or 1)),
            scales=scales,
            r_mode=args.r_mode,
        )
    except InvalidArgument as exc:
        raise _Usage(str(exc))


def cmd_gen(args) -> int:
    protocols = _protocols(args)
    if args.channel not in ("Oz", "Fpz"):
        raise _Usage(f"channel must be Oz or Fpz, got {args.channel!r}")
    import os
    for s in range(int(args.subjects)):
        for ci, label in enumerate(sorted(protocols)):
            epochs = subject_epochs(protocols[label], int(args.seed), s, ci,
                                    args.channel, float(args.frontal_gain))
            outdir = os.path.join(args.out, f"subject_{s + 1:02d}", label)
            msio.write_epoch_set(epochs, outdir)
    print(f"wrote {args.subjects} subject(s) x {len(protocols)} condition(s) "
          f"under {args.out}")
    return 0


def cmd_preprocess(args) -> int:
    ts = _read_input(args)
    if args.target_fs is not None:
        target = float(args.target_fs)
        factor = ts.fs / target
        if abs(factor - round(factor)) > 1e-9 or round(factor) < 1:
            raise _Usage(f"fs {ts.fs} is not an integer multiple of "
                         f"target fs {target}")
        ts = decimate(ts, int(round(factor)))
    if args.highpass is not None:
        ts = fir_filter(ts, "highpass", float(args.highpass))
    if args.lowpass is not None:
        ts = fir_filter(ts, "lowpass", float(args.lowpass))
    fraction = 0.0
    if args.artifact_threshold is not None:
        ts, fraction = reject_artifacts(ts, float(args.artifact_threshold))
    msio.write_timeseries_csv(ts, args.out)
    print(f"wrote {args.out}: {len(ts)} samples at {msio.format_float(ts.fs)} Hz, "
          f"rejected fraction {msio.format_float(fraction)}")
    return 0


def cmd_emd(args) -> int:
    ts = _read_input(args)
    try:
        cfg = EmdConfig(max_imfs=int(args.max_imfs),
                        max_sift_iters=int(args.max_sift_iters),
                        sift_sd_threshold=float(args.sift_sd))
    except InvalidArgument as exc:
        raise _Usage(str(exc))
    dec = decompose(ts, cfg)
    msio.write_imfs(dec, args.out)
    print(f"wrote {dec.n_imfs} mode(s) plus residue under {args.out}")
    return 0


def cmd_entropy(args) -> int:
    if args.method not in METHOD_NAMES:
        raise _Usage(f"method must be one of {', '.join(METHOD_NAMES)}")
    ts = _read_input(args)
    cfg = _pipeline_config(args)
    profile = method_profile(ts, args.method, cfg, strict=True)
    msio.write_profile_csv(profile, args.out)
    print(f"wrote {args.out}: {args.method} over {len(profile.scales)} scale(s)")
    return 0


def _experiment_config(args) -> ExperimentConfig:
    channels = tuple(c.strip() for c in args.channels.split(",") if c.strip())
    try:
        return ExperimentConfig(
            pipeline=_pipeline_config(args),
            master_seed=int(args.seed),
            workers=int(args.workers),
            channels=channels,
            frontal_gain=float(args.frontal_gain),
            alpha=float(args.alpha),
        )
    except InvalidArgument as exc:
        raise _Usage(str(exc))


def _summarize(result_dict: dict) -> str:
    lines = []
    for lbl in sorted(result_dict["conditions"]):
        for ch in sorted(result_dict["conditions"][lbl]["channels"]):
            rep = result_dict["conditions"][lbl]["channels"][ch]["reports"]
            n_sig = sum(1 for t in rep["tukey_first_vs_last"]["tests"]
                        if t["reject"])
            n_scales = len(rep["tukey_first_vs_last"]["tests"])
            lines.append(f"  {lbl}/{ch}: first-vs-last significant at "
                         f"{n_sig}/{n_scales} scale(s)")
    for key in sorted(result_dict["cross"]):
        n_sig = sum(1 for t in result_dict["cross"][key]["tests"] if t["reject"])
        n_scales = len(result_dict["cross"][key]["tests"])
        lines.append(f"  {key}: significant at {n_sig}/{n_scales} scale(s)")
    return "\n".join(lines)


def cmd_experiment(args) -> int:
    import os
    if args.method not in METHOD_NAMES:
        raise _Usage(f"method must be one of {', '.join(METHOD_NAMES)}")
    protocols = _protocols(args)
    cfg = _experiment_config(args)
    result = run_experiment(protocols, int(args.subjects), args.method, cfg)
    os.makedirs(args.out, exist_ok=True)
    d = msio.experiment_to_dict(result)
    json_path = os.path.join(args.out, "result.json")
    msio.write_experiment_json(d, json_path)
    msio.write_figure_csvs(d, args.out)
    msio.write_stats_csv(d, os.path.join(args.out, "stats.csv"))
    print(f"wrote {json_path}")
    print(_summarize(d))
    return 0


def cmd_stats(args) -> int:
    d = msio.read_experiment_json(args.input)
    msio.write_stats_csv(d, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_compare(args) -> int:
    import os
    methods = [p.strip() for p in args.methods.split(",") if p.strip()]
    if methods == ["all"]:
        methods = list(METHOD_NAMES)
    for m in methods:
        if m not in METHOD_NAMES:
            raise _Usage(f"unknown method {m!r}")
    protocols = _protocols(args)
    cfg = _experiment_config(args)
    os.makedirs(args.out, exist_ok=True)
    summary_rows = []
    for m in methods:
        result = run_experiment(protocols, int(args.subjects), m, cfg)
        d = msio.experiment_to_dict(result)
        msio.write_experiment_json(d, os.path.join(args.out, f"result_{m}.json"))
        for lbl in sorted(d["conditions"]):
            for ch in sorted(d["conditions"][lbl]["channels"]):
                rep = d["conditions"][lbl]["channels"][ch]["reports"]
                n_tukey = sum(1 for t in rep["tukey_first_vs_last"]["tests"]
                              if t["reject"])
                key = next((k for k in d["cross"] if k.endswith(f":{ch}")), None)
                n_paired = (sum(1 for t in d["cross"][key]["tests"] if t["reject"])
                            if key else 0)
                summary_rows.append((m, lbl, ch, n_tukey, n_paired))
        print(f"{m}: done")
    with open(os.path.join(args.out, "compare_summary.csv"), "w", newline="") as f:
        f.write("method,condition,channel,tukey_sig_scales,paired_sig_scales\n")
        for row in summary_rows:
            f.write(",".join(str(v) for v in row) + "\n")
    print(f"wrote {os.path.join(args.out, 'compare_summary.csv')}")
    return 0


def _add_io_args(sp, with_meta=True):
    sp.add_argument("--input", required=True, help="input signal CSV")
    if with_meta:
        sp.add_argument("--meta", help="metadata sidecar JSON "
                        "(default: <input>.json when present)")
        sp.add_argument("--fs", type=float,
                        help="sampling rate when no sidecar exists")


def _add_protocol_args(sp):
    sp.add_argument("--conditions",
                    help="comma list of LABEL:FLICKER_HZ (default CE:15,OE:20)")
    sp.add_argument("--noise", choices=["white", "pink"], help="noise kind")
    sp.add_argument("--snr0", type=float, help="first-stimulus sine amplitude")
    sp.add_argument("--decay", type=float,
                    help="habituation decay per repetition (1 = none)")
    sp.add_argument("--stim-dur", dest="stim_dur", type=float,
                    help="stimulus epoch seconds")
    sp.add_argument("--baseline-dur", dest="baseline_dur", type=float,
                    help="baseline epoch seconds")
    sp.add_argument("--n-stimuli", dest="n_stimuli", type=int)
    sp.add_argument("--n-baselines", dest="n_baselines", type=int)
    sp.add_argument("--fs", type=float, help="sampling rate")


def _add_kernel_args(sp, with_band=True):
    sp.add_argument("--scales", help="scale factors, e.g. 1..20 or 1,2,5")
    sp.add_argument("--m", type=int, help="embedding dimension")
    sp.add_argument("--r", type=float, help="tolerance as fraction of SD")
    sp.add_argument("--n", type=float, help="fuzzy membership exponent")
    sp.add_argument("--r-mode", dest="r_mode", choices=["per-scale", "fixed"],
                    help="tolerance resolution across scales")
    if with_band:
        sp.add_argument("--band", help="mode band LO,HI (1-based, fastest first)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msent",
        description="Multiscale entropy toolkit for EEG-like signals.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", required=True, help="output file or directory")
        sp.add_argument("--config", help="JSON config file (flags win)")

    sp = sub.add_parser("gen", help="generate synthetic epoch sets")
    sp.add_argument("--subjects", type=int)
    sp.add_argument("--seed", type=int, help="master seed")
    sp.add_argument("--channel", choices=["Oz", "Fpz"])
    sp.add_argument("--frontal-gain", dest="frontal_gain", type=float)
    _add_protocol_args(sp)
    common(sp)
    sp.set_defaults(func=cmd_gen, _command="gen")

    sp = sub.add_parser("preprocess", help="decimate, filter, reject artifacts")
    _add_io_args(sp)
    sp.add_argument("--target-fs", dest="target_fs", type=float,
                    help="decimate to this rate (integer factor)")
    sp.add_argument("--highpass", type=float, help="highpass cutoff Hz")
    sp.add_argument("--lowpass", type=float, help="lowpass cutoff Hz")
    sp.add_argument("--artifact-threshold", dest="artifact_threshold",
                    type=float, help="amplitude threshold for rejection")
    common(sp)
    sp.set_defaults(func=cmd_preprocess, _command="preprocess")

    sp = sub.add_parser("emd", help="decompose into oscillatory modes")
    _add_io_args(sp)
    sp.add_argument("--max-imfs", dest="max_imfs", type=int)
    sp.add_argument("--max-sift-iters", dest="max_sift_iters", type=int)
    sp.add_argument("--sift-sd", dest="sift_sd", type=float)
    common(sp)
    sp.set_defaults(func=cmd_emd, _command="emd")

    sp = sub.add_parser("entropy", help="multiscale profile of one record")
    _add_io_args(sp)
    sp.add_argument("--method", choices=list(METHOD_NAMES))
    _add_kernel_args(sp)
    sp.add_argument("--classes", type=int, help="dispersion class count")
    sp.add_argument("--delay", type=int, help="dispersion embedding delay")
    common(sp)
    sp.set_defaults(func=cmd_entropy, _command="entropy")

    sp = sub.add_parser("experiment", help="full multi-subject protocol")
    sp.add_argument("--subjects", type=int)
    sp.add_argument("--seed", type=int, help="master seed")
    sp.add_argument("--method", choices=list(METHOD_NAMES))
    sp.add_argument("--channels", help="comma list from {Oz,Fpz}")
    sp.add_argument("--frontal-gain", dest="frontal_gain", type=float)
    sp.add_argument("--workers", type=int, help="process workers")
    sp.add_argument("--alpha", type=float, help="significance level")
    _add_protocol_args(sp)
    _add_kernel_args(sp)
    common(sp)
    sp.set_defaults(func=cmd_experiment, _command="experiment")

    sp = sub.add_parser("stats", help="re-tabulate a result JSON")
    sp.add_argument("--input", required=True, help="experiment result JSON")
    common(sp)
    sp.set_defaults(func=cmd_stats, _command="stats")

    sp = sub.add_parser("compare", help="every method on identical data")
    sp.add_argument("--subjects", type=int)
    sp.add_argument("--seed", type=int, help="master seed")
    sp.add_argument("--methods", help="comma list of methods, or all (default: all)")
    sp.add_argument("--channels", help="comma list from {Oz,Fpz}")
    sp.add_argument("--frontal-gain", dest="frontal_gain", type=float)
    sp.add_argument("--workers", type=int, help="process workers")
    sp.add_argument("--alpha", type=float, help="significance level")
    _add_protocol_args(sp)
    _add_kernel_args(sp)
    common(sp)
    sp.set_defaults(func=cmd_compare, _command="compare")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _resolve(args, args._command)
        return args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AnalysisError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        target = getattr(exc, "filename", None)
        where = f" ({target})" if target else ""
        print(f"io error: {exc}{where}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
