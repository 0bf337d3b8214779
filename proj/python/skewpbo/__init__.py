"""Skew Gaussian process preference learning and preferential Bayesian optimization."""

import json

import numpy as np

from ._skewpbo import (
    Posterior,
    SkewPboError,
    Sun,
    benchmark,
    benchmark_names,
    fit,
    laplace_log_evidence,
    lin_ess_sample,
    log_marginal_exact,
    log_marginal_lower_bound,
    mvn_cdf,
    skewness_statistic,
)
from . import _skewpbo

__all__ = [
    "Posterior",
    "SessionStore",
    "SkewPboError",
    "Sun",
    "benchmark",
    "benchmark_names",
    "error_kind",
    "export_results",
    "fit",
    "laplace_log_evidence",
    "lin_ess_sample",
    "log_marginal_exact",
    "log_marginal_lower_bound",
    "mvn_cdf",
    "run_experiment",
    "skewness_statistic",
]


def error_kind(err):
    """Kind tag of a SkewPboError, e.g. "InvalidConfig"."""
    return str(err).split(":", 1)[0]


def run_experiment(config):
    """Run every trial of one experiment config (dict); returns a list of record dicts."""
    return json.loads(_skewpbo.run_experiment(json.dumps(config)))


def export_results(records, directory, fmt="csv"):
    return _skewpbo.export_results(json.dumps(records), str(directory), fmt)


class SessionStore:
    """Event-logged preference sessions kept under data_dir."""

    def __init__(self, data_dir):
        self._store = _skewpbo.SessionStore(str(data_dir))

    def create(self, config):
        return self._store.create(json.dumps(config))

    def next(self, session_id):
        return json.loads(self._store.next(session_id))

    def answer(self, session_id, outcome):
        return json.loads(self._store.answer(session_id, outcome))

    def summary(self, session_id, points):
        x = np.asarray(points, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        return json.loads(self._store.summary(session_id, x))

    def snapshot(self, session_id):
        return json.loads(self._store.snapshot(session_id))

    def list(self):
        return self._store.list()
