"""Named random sub-streams derived from a single 64-bit seed.

Every source of randomness in a simulation (topology, demands, arrivals,
lifetimes, solver, environment) draws from its own child stream so that
changing one component never perturbs the others.
"""

import numpy as np

STREAMS = {
    "topology": 0,
    "demands": 1,
    "arrivals": 2,
    "lifetimes": 3,
    "solver": 4,
    "environment": 5,
}


def substream(seed, name, index=0):
    """Return a Generator for the named sub-stream of ``seed``.

    ``index`` further splits a stream (e.g. one solver stream per request).
    """
    if name not in STREAMS:
        raise KeyError(f"unknown rng stream {name!r}; expected one of {sorted(STREAMS)}")
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=(STREAMS[name], int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def solver_seed(seed, request_id):
    """Deterministic per-request integer seed for stochastic solvers."""
    return int(substream(seed, "solver", request_id).integers(0, 2**63 - 1))
