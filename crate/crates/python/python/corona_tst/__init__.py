"""Corona decompositions, beta numbers and harmonic measure on sampled boundaries."""

import json

from . import _native

__version__ = _native.__version__


def generate_domain(kind, **params):
    """Domain spec as a dict, e.g. ``generate_domain("cantor", j=3)``."""
    pairs = [(k, str(v)) for k, v in params.items()]
    return json.loads(_native.generate_domain(kind, pairs))


def deviation(spec, h=None, k_max=None):
    return json.loads(_native.deviation(json.dumps(spec), h, k_max))


def harmonic_measure(spec, targets, pole=None, walkers=10_000, seed=1729):
    """Masses of boundary balls given as ``(centre, radius)`` pairs."""
    targets = [(list(c), float(r)) for c, r in targets]
    return json.loads(_native.harmonic_measure(json.dumps(spec), targets, pole, walkers, seed))


def log_integral(spec, pole=None, walkers=100_000, seed=1729):
    return _native.log_integral_value(json.dumps(spec), pole, walkers, seed)


def verify(suite="trivial", quick=True, only=(), seed=1729):
    return json.loads(_native.verify(suite, quick, list(only), seed))
