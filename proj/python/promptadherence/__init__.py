"""Audio prompt adherence scoring (Python bindings of the C++ core)."""

import json as _json

from ._core import (
    ConfigError,
    DataError,
    Error,
    MathDomainError,
    adherence_score,
    adherence_value,
    cles,
    embed,
    fit_projection,
    frechet_distance,
    known_backend_dim,
    mmd2,
    pitch_shift,
    random_derangement,
    read_embeddings,
    sign_test,
    significance_stars,
    time_shift,
    write_embeddings,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "MathDomainError",
    "adherence_score",
    "adherence_value",
    "cles",
    "embed",
    "fit_projection",
    "frechet_distance",
    "known_backend_dim",
    "mmd2",
    "pitch_shift",
    "random_derangement",
    "read_embeddings",
    "run_experiment",
    "sign_test",
    "significance_stars",
    "time_shift",
    "write_embeddings",
]


def run_experiment(config, experiment, base_dir=""):
    """Run experiment 1, 2 or 3 from a config dict.

    Returns (report dict, records CSV text).
    """
    from ._core import run_experiment as _run

    report, csv = _run(_json.dumps(config), int(experiment), str(base_dir))
    return _json.loads(report), csv
