"""Characteristic chains and torus experiments for vector-field systems."""

import json

from ._core import (
    BudgetExhausted,
    ConfigError,
    DimensionMismatch,
    Error,
    EvalError,
    ParseError,
    PreconditionError,
    bracket,
    char_step,
    contains_one,
    groebner,
    normalize,
    run_job_json,
)

__all__ = [
    "BudgetExhausted", "ConfigError", "DimensionMismatch", "Error", "EvalError", "ParseError",
    "PreconditionError", "analyze", "bracket", "char_step", "contains_one", "groebner", "normalize",
    "run_job",
]


def run_job(config, timings=False):
    """Run a job described by a dict (or JSON text); returns the report dict."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(run_job_json(text, timings))


def analyze(variables, fields, s=1, **options):
    """Exact analysis of a polynomial system; returns the report dict."""
    cfg = {"mode": "analyze", "variables": list(variables), "fields": [list(f) for f in fields], "s": s}
    cfg.update(options)
    return run_job(cfg)
