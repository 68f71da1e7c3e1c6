"""Command-line entry point: ``python -m specfield <command> [options]``.

Configuration comes from (lowest to highest precedence) built-in defaults, an
optional ``--preset``, an optional INI file ``--config``, and ``--set
section.key=value`` overrides.  Every output embeds the resolved configuration
and the package version.  Exit codes: 0 success, 1 usage or configuration
error, 2 bound violation.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis import (
    InsufficientData,
    SpectrumTrace,
    check_edge_continuity,
    detect_gap_tips,
    estimate_constants,
    fit_loglog,
    fmt_param,
    log_abs,
    p2_modulus,
    report_json,
    report_text,
    spectrum_modulus,
    sweep,
    track_gaps,
    verify_bounds,
)
from .hyperspace import gaps
from .models import (
    INF,
    CounterexampleConfig,
    OperatorField,
    ParameterSpace,
    almost_mathieu,
    as_fraction,
    counterexample_field,
    counterexample_gaps,
    farey,
    field_bound,
    kohmoto,
    substitution_field,
)
from .operators import PeriodicJacobi, spectrum
from .presets import PRESETS, resolve

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def load_config(preset=None, path=None, overrides=()) -> dict:
    try:
        cfg = resolve(preset)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    if path is not None:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for sec in cp.sections():
            cfg.setdefault(sec, {}).update(cp[sec])
    for item in overrides:
        key, sep, value = item.partition("=")
        sec, dot, name = key.strip().partition(".")
        if not sep or not dot or not name:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        cfg.setdefault(sec, {})[name] = value.strip()
    return cfg


def _get(cfg, sec, key):
    try:
        return cfg[sec][key]
    except KeyError:
        raise ConfigError(f"missing config value [{sec}] {key}") from None


def _float(cfg, sec, key, positive=False, allow_none=False, nonneg=False):
    raw = _get(cfg, sec, key).strip()
    if allow_none and raw.lower() in ("none", "auto", ""):
        return None
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not a number") from None
    if positive and not v > 0:
        raise ConfigError(f"[{sec}] {key} must be > 0, got {raw}")
    if nonneg and not v >= 0:
        raise ConfigError(f"[{sec}] {key} must be >= 0, got {raw}")
    return v


def _int(cfg, sec, key):
    raw = _get(cfg, sec, key).strip()
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not an integer") from None


def _frac(cfg, sec, key):
    raw = _get(cfg, sec, key)
    try:
        return as_fraction(raw)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"[{sec}] {key} = {raw!r}: {exc}") from None


def _bool(cfg, sec, key):
    raw = _get(cfg, sec, key).strip().lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{sec}] {key} = {raw!r} is not a boolean")


def counterexample_config(cfg) -> CounterexampleConfig:
    try:
        return CounterexampleConfig(
            c=_float(cfg, "counterexample", "c"),
            m=_float(cfg, "counterexample", "m"),
            kappa=_float(cfg, "counterexample", "kappa"),
            alpha=_float(cfg, "counterexample", "alpha"),
            C=_float(cfg, "counterexample", "C"),
            N=_int(cfg, "counterexample", "N"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[counterexample] {exc}") from None


def build_field(cfg) -> OperatorField:
    name = _get(cfg, "model", "name").strip()
    if name == "almost_mathieu":
        mu = _float(cfg, "model", "mu", nonneg=True)
        raw = _get(cfg, "model", "theta").strip().lower()
        theta = None if raw == "hull" else _float(cfg, "model", "theta")
        return OperatorField(lambda t: almost_mathieu(mu, theta, t), name, {"mu": mu, "theta": raw})
    if name == "kohmoto":
        lam = _float(cfg, "model", "lam")
        theta = _float(cfg, "model", "theta")
        return OperatorField(lambda t: kohmoto(lam, theta, t), name, {"lam": lam, "theta": theta})
    if name == "substitution":
        word = _get(cfg, "model", "word").strip()
        level = _int(cfg, "model", "level")
        try:
            substitution_field(0.0, word, level)
        except ValueError as exc:
            raise ConfigError(f"[model] {exc}") from None
        return OperatorField(lambda lam: substitution_field(float(lam), word, level), name, {"word": word, "level": level})
    if name == "constant":
        try:
            pot = tuple(float(x) for x in _get(cfg, "model", "potential").split(","))
        except ValueError:
            raise ConfigError("[model] potential must be a comma-separated list of numbers") from None
        op = PeriodicJacobi(pot)
        return OperatorField(lambda t: op, name, {"potential": list(pot)})
    if name == "counterexample":
        return counterexample_field(counterexample_config(cfg))
    raise ConfigError(f"[model] name = {name!r} is not a known model")


def build_grid(cfg) -> ParameterSpace:
    kind = _get(cfg, "grid", "kind").strip()
    if kind == "list":
        raw = [x for x in _get(cfg, "grid", "points").split(",") if x.strip()]
        try:
            pts = [as_fraction(x) for x in raw]
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"[grid] points: {exc}") from None
    elif kind == "farey":
        pts = farey(_frac(cfg, "grid", "lo"), _frac(cfg, "grid", "hi"), _int(cfg, "grid", "q_max"))
    elif kind == "closing":
        c = _frac(cfg, "grid", "center")
        qs = list(range(_int(cfg, "grid", "q_min"), _int(cfg, "grid", "q_max") + 1, _int(cfg, "grid", "q_step")))
        left = [c - Fraction(1, 2 * q) for q in qs]
        right = [c + Fraction(1, 2 * q) for q in reversed(qs)]
        pts = left + ([c] if _bool(cfg, "grid", "include_center") else []) + right
    elif kind == "lambda_powers":
        ks = range(_int(cfg, "grid", "k_max"), _int(cfg, "grid", "k_min") - 1, -1)
        pts = ([Fraction(0)] if _bool(cfg, "grid", "include_zero") else []) + [Fraction(1, 2**k) for k in ks]
    elif kind == "counterexample":
        return counterexample_config(cfg).space()
    else:
        raise ConfigError(f"[grid] kind = {kind!r} is not a known grid")
    if not pts:
        raise ConfigError("[grid] the grid is empty")
    try:
        return ParameterSpace(tuple(pts))
    except ValueError as exc:
        raise ConfigError(f"[grid] {exc}") from None


def _tolerances(cfg) -> dict:
    merge = _float(cfg, "tolerances", "merge_tol", positive=True, allow_none=True)
    width = _float(cfg, "tolerances", "width_tol", allow_none=True)
    if width is None:
        width = 10 * merge if merge else 0.0
    if width < 0:
        raise ConfigError("[tolerances] width_tol must be >= 0")
    return {
        "merge_tol": merge,
        "width_tol": width,
        "eps": _float(cfg, "tolerances", "eps", positive=True),
        "match_radius": _float(cfg, "tolerances", "match_radius", positive=True, allow_none=True),
        "isolation_delta": _float(cfg, "tolerances", "isolation_delta", positive=True),
    }


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _header(cfg, command) -> dict:
    return {"command": command, "version": __version__, "config": {s: dict(sorted(v.items())) for s, v in sorted(cfg.items())}}


def _csv_header(cfg, command) -> str:
    return "# " + json.dumps(_header(cfg, command), sort_keys=True) + "\n"


class Output:
    def __init__(self, directory: Path, prefix: str):
        self.dir = directory
        self.prefix = prefix
        self.written: list[Path] = []

    def write(self, suffix: str, text: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / f"{self.prefix}_{suffix}"
        path.write_text(text, encoding="utf-8")
        self.written.append(path)
        return path


def _make_trace(cfg, tol) -> SpectrumTrace:
    fld = build_field(cfg)
    grid = build_grid(cfg)
    if fld.kind == "set" and grid.metric != "ultrametric":
        raise ConfigError("[grid] the counterexample family needs kind = counterexample")
    m = field_bound(fld, grid, tol["merge_tol"])
    return sweep(fld, grid, tol["merge_tol"], m)


def _tracks_and_tips(trace, tol):
    tracks = track_gaps(trace, tol["match_radius"], tol["width_tol"])
    tips = detect_gap_tips(tracks, trace, tol["isolation_delta"])
    return tracks, tips


def analyze(cfg) -> tuple:
    """``(trace, tracks, tips, tolerances)`` for a resolved configuration."""
    tol = _tolerances(cfg)
    trace = _make_trace(cfg, tol)
    tracks, tips = _tracks_and_tips(trace, tol)
    return trace, tracks, tips, tol


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_spectrum(cfg, out: Output) -> int:
    tol = _tolerances(cfg)
    fld = build_field(cfg)
    if fld.kind == "set":
        raise ConfigError("[model] spectrum needs an operator model")
    t = _frac(cfg, "model", "lam" if fld.name == "substitution" else "t")
    F = spectrum(fld(t), tol["merge_tol"])
    data = {**_header(cfg, "spectrum"), "t": fmt_param(t), "spectrum": F.to_dict(), "gaps": [[g.a, g.b] for g in gaps(F)]}
    out.write("spectrum.json", report_json(data))
    out.write("spectrum.csv", _csv_header(cfg, "spectrum") + "lo,hi\n" + F.to_csv())
    print(f"bands: {len(F)}")
    print(f"edges: {F.intervals[0][0]!r} {F.intervals[-1][1]!r}")
    for g in gaps(F):
        print(f"gap: ({g.a!r}, {g.b!r})")
    return EXIT_OK


def cmd_sweep(cfg, out: Output) -> int:
    tol = _tolerances(cfg)
    trace = _make_trace(cfg, tol)
    tracks, tips = _tracks_and_tips(trace, tol)
    out.write("trace.csv", _csv_header(cfg, "sweep") + trace.to_csv())
    out.write("tracks.json", report_json({**_header(cfg, "sweep"), "m": trace.m, "tracks": [tr.to_dict() for tr in tracks]}))
    print(f"grid points: {len(trace)}  tracks: {len(tracks)}")
    return EXIT_OK


def cmd_gaps(cfg, out: Output) -> int:
    tol = _tolerances(cfg)
    trace = _make_trace(cfg, tol)
    tracks, tips = _tracks_and_tips(trace, tol)
    cont = check_edge_continuity(trace, tol["eps"], tracks=tracks)
    data = {
        **_header(cfg, "gaps"),
        "tracks": [tr.to_dict() for tr in tracks],
        "tips": [tp.to_dict() for tp in tips],
        "edge_continuity": cont,
    }
    out.write("gaps.json", report_json(data))
    closed = sum(tr.status == "closed" for tr in tracks)
    print(f"tracks: {len(tracks)} (closed {closed})  tips: {len(tips)}")
    for tp in tips:
        print(f"tip: c={tp.c!r} t0={fmt_param(tp.t0)} isolated={tp.isolated}")
    return EXIT_OK


def _estimate(fn, *args):
    try:
        return fn(*args).to_dict()
    except InsufficientData as exc:
        return {"error": str(exc)}


def cmd_holder(cfg, out: Output) -> int:
    tol = _tolerances(cfg)
    trace = _make_trace(cfg, tol)
    p2 = _estimate(p2_modulus, trace)
    sp = _estimate(spectrum_modulus, trace)
    ratio = None
    a_p2, a_sp = p2.get("alpha"), sp.get("alpha")
    if isinstance(a_p2, float) and isinstance(a_sp, float) and a_p2 != 0:
        ratio = a_sp / a_p2
    data = {**_header(cfg, "holder"), "p2": p2, "spectrum": sp, "ratio_spectrum_over_p2": ratio}
    out.write("holder.json", report_json(data))
    print(f"p2 alpha: {a_p2}  spectrum alpha: {a_sp}  ratio: {ratio}")
    return EXIT_OK


def _inject_fault(cfg, trace: SpectrumTrace) -> SpectrumTrace:
    raw = _get(cfg, "verify", "inject_fault").strip().lower()
    if raw in ("none", ""):
        return trace
    idx, sep, amount = raw.partition(":")
    try:
        k, shift = int(idx), float(amount)
    except ValueError:
        raise ConfigError("[verify] inject_fault must be none or index:shift") from None
    if not (sep and -len(trace) <= k < len(trace)):
        raise ConfigError(f"[verify] inject_fault index {idx} outside the grid")
    entries = list(trace.entries)
    t, F = entries[k]
    entries[k] = (t, F.shifted(type(F.intervals[0][0])(shift) if F.is_exact() else shift))
    return SpectrumTrace(tuple(entries), trace.space, trace.m + abs(shift), trace.merge_tol)


def cmd_verify(cfg, out: Output) -> int:
    tol = _tolerances(cfg)
    trace = _make_trace(cfg, tol)
    raw_alpha = _get(cfg, "verify", "alpha").strip().lower()
    alpha = None if raw_alpha == "auto" else _float(cfg, "verify", "alpha")
    try:
        consts = estimate_constants(trace, alpha)
    except InsufficientData as exc:
        raise ConfigError(f"[verify] alpha = auto needs a usable p2 fit: {exc}") from None
    # constants come from the clean trace; a fault is injected afterwards
    trace = _inject_fault(cfg, trace)
    tracks, tips = _tracks_and_tips(trace, tol)
    rep = verify_bounds(trace, tracks, consts, tips)
    rep["edge_continuity"] = check_edge_continuity(trace, tol["eps"], tracks=tracks)
    rep["tips"] = [tp.to_dict() for tp in tips]
    data = {**_header(cfg, "verify"), **rep}
    out.write("verify.json", report_json(data))
    out.write("verify.txt", report_text(rep))
    sys.stdout.write(report_text(rep))
    if rep["n_violations"]:
        for v in rep["violations"][:20]:
            print(f"violation: {json.dumps(v, sort_keys=True)}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_counterexample(cfg, out: Output) -> int:
    tol = _tolerances(cfg)
    ce = counterexample_config(cfg)
    try:
        gp = counterexample_gaps(ce)
    except ValueError as exc:
        raise ConfigError(f"[counterexample] {exc}") from None
    fld = counterexample_field(ce)
    space = ce.space()
    trace = sweep(fld, space, None, field_bound(fld, space))
    tracks = track_gaps(trace, tol["match_radius"], 0)
    tips = detect_gap_tips(tracks, trace, tol["isolation_delta"])
    rows = ["n,a,b,log_width,log_d_n_inf"]
    for n, (a, b) in enumerate(gp, start=1):
        rows.append(f"{n},{float(a)!r},{float(b)!r},{log_abs(b - a)!r},{space.log_distance(n, INF)!r}")
    widths = [b - a for a, b in gp]
    width_fit = fit_loglog([space.log_distance(n, INF) for n in range(1, ce.N + 1)], [log_abs(w) for w in widths])
    dh_fit = spectrum_modulus(trace)
    data = {
        **_header(cfg, "counterexample"),
        "width_vs_d": width_fit.to_dict(),
        "hausdorff_vs_d": dh_fit.to_dict(),
        "predicted": {"width_exponent": ce.alpha / (2 * ce.kappa), "hausdorff_exponent": ce.alpha / 2},
        "tips": [tp.to_dict() for tp in tips],
        "tracks": [tr.to_dict() for tr in tracks],
    }
    out.write("counterexample.json", report_json(data))
    out.write("counterexample.csv", _csv_header(cfg, "counterexample") + "\n".join(rows) + "\n")
    out.write("trace.csv", _csv_header(cfg, "counterexample") + trace.to_csv())
    print(f"width exponent: {width_fit.alpha!r} (predicted {ce.alpha / (2 * ce.kappa)!r})")
    print(f"hausdorff exponent: {dh_fit.alpha!r} (predicted {ce.alpha / 2!r})")
    for tp in tips:
        print(f"tip: c={tp.c!r} t0={fmt_param(tp.t0)} isolated={tp.isolated}")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "gaps": cmd_gaps,
    "holder": cmd_holder,
    "verify": cmd_verify,
    "counterexample": cmd_counterexample,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specfield", description="Spectra of operator fields and their continuity bounds.")
    p.add_argument("--version", action="version", version=f"specfield {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--preset", choices=sorted(PRESETS))
        s.add_argument("--config", "-c", help="INI file with [model], [grid], [tolerances], ... sections")
        s.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override one config value")
        s.add_argument("--out", help="output directory (default: $SPECFIELD_OUT or ./out)")
        s.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.preset, args.config, args.set)
        out_dir = Path(args.out or os.environ.get("SPECFIELD_OUT") or "out")
        out = Output(out_dir, _get(cfg, "output", "prefix").strip() or "run")
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # per-point failures carry the offending parameter
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
