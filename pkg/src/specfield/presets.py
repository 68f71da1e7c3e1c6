"""Built-in run configurations (same schema as the INI files in ``configs/``)."""

from __future__ import annotations

import copy

DEFAULTS: dict = {
    "model": {"name": "almost_mathieu", "mu": "1.0", "theta": "hull", "lam": "1.0", "word": "period_doubling", "level": "4", "t": "1/3", "potential": "0.0"},
    "grid": {"kind": "list", "points": ""},
    "tolerances": {"merge_tol": "1e-8", "width_tol": "auto", "eps": "1e-3", "match_radius": "auto", "isolation_delta": "1e-3"},
    "verify": {"alpha": "auto", "inject_fault": "none"},
    "counterexample": {"c": "2", "m": "3", "kappa": "2", "alpha": "1", "C": "1", "N": "12"},
    "output": {"prefix": "run"},
}

PRESETS: dict = {
    # central Almost Mathieu gap closing at t = 1/2, phase hull
    "am_closing": {
        "model": {"name": "almost_mathieu", "mu": "1.0", "theta": "hull"},
        "grid": {"kind": "closing", "center": "1/2", "q_min": "16", "q_max": "64", "q_step": "4", "include_center": "true"},
        "verify": {"alpha": "1"},
        "output": {"prefix": "am_closing"},
    },
    # rational grid away from closings, p2 exponent near 1
    "am_lipschitz": {
        "model": {"name": "almost_mathieu", "mu": "1.0", "theta": "hull"},
        "grid": {"kind": "farey", "lo": "9/50", "hi": "11/50", "q_max": "30"},
        "output": {"prefix": "am_lipschitz"},
    },
    "counterexample": {
        "model": {"name": "counterexample"},
        "grid": {"kind": "counterexample"},
        "tolerances": {"merge_tol": "none", "width_tol": "0", "isolation_delta": "1e-6"},
        "verify": {"alpha": "1"},
        "output": {"prefix": "counterexample"},
    },
    # gaps opening from the free Laplacian as lambda grows
    "period_doubling": {
        "model": {"name": "substitution", "word": "period_doubling", "level": "4"},
        "grid": {"kind": "lambda_powers", "k_min": "1", "k_max": "12", "include_zero": "true"},
        "tolerances": {"merge_tol": "1e-10"},
        "verify": {"alpha": "1"},
        "output": {"prefix": "period_doubling"},
    },
    "fibonacci": {
        "model": {"name": "substitution", "word": "fibonacci", "level": "5"},
        "grid": {"kind": "lambda_powers", "k_min": "1", "k_max": "12", "include_zero": "true"},
        "tolerances": {"merge_tol": "1e-10"},
        "verify": {"alpha": "1"},
        "output": {"prefix": "fibonacci"},
    },
    "kohmoto": {
        "model": {"name": "kohmoto", "lam": "1.0", "theta": "0"},
        "grid": {"kind": "farey", "lo": "3/10", "hi": "2/5", "q_max": "24"},
        "output": {"prefix": "kohmoto"},
    },
    # a field that does not depend on t
    "constant": {
        "model": {"name": "constant", "potential": "1.0, -1.0"},
        "grid": {"kind": "list", "points": "0, 1/8, 1/4, 3/8, 1/2"},
        "output": {"prefix": "constant"},
    },
}


def resolve(preset: str | None = None) -> dict:
    """Defaults overlaid with a named preset."""
    cfg = copy.deepcopy(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise KeyError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        for sec, vals in PRESETS[preset].items():
            cfg.setdefault(sec, {}).update(vals)
    return cfg
