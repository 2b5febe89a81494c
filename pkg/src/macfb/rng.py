"""Counter-based random streams for reproducible, order-independent simulation.

Every random draw is a pure function of ``(seed, role, trial, index)``,
computed with the splitmix64 mixing function.  There is no shared generator
state: trials can be evaluated in any order, in chunks, or in parallel and
always produce the same numbers.  Normals come from the inverse CDF applied
to the 53-bit uniforms, so each draw consumes exactly one 64-bit word.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

# Stream roles.  A role keys an independent family of per-trial substreams.
ROLE_STATE = 1
ROLE_STATE_ALT = 2
ROLE_NOISE = 3
ROLE_MESSAGE = 4

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_TWO53 = float(2**53)


def _mix(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer (full 64-bit avalanche)."""
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    return z ^ (z >> np.uint64(31))


def _words(key, index):
    """Output words of the splitmix64 stream keyed by `key` at `index`."""
    key = np.asarray(key, dtype=np.uint64)
    index = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(key + (index + np.uint64(1)) * _GOLDEN)


def _role_key(seed: int, role: int) -> np.ndarray:
    masked = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    return _words(masked, np.uint64(role))


def _trial_keys(seed: int, role: int, trials) -> np.ndarray:
    """One 64-bit key per trial; `trials` is an int or an index array."""
    if np.isscalar(trials):
        trials = np.arange(trials, dtype=np.uint64)
    else:
        trials = np.asarray(trials, dtype=np.uint64)
    return _words(_role_key(seed, role), trials)


def uniforms(seed: int, role: int, trials, n: int) -> np.ndarray:
    """(trials, n) matrix of uniforms on the open interval (0, 1).

    `trials` may be a count or an explicit array of trial indices, which is
    how chunked runs reproduce exactly the same values as a monolithic one.
    """
    keys = _trial_keys(seed, role, trials)
    idx = np.arange(n, dtype=np.uint64)
    words = _words(keys[:, None], idx[None, :])
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) / _TWO53


def normals(seed: int, role: int, trials, n: int) -> np.ndarray:
    """(trials, n) matrix of standard normal draws."""
    return ndtri(uniforms(seed, role, trials, n))


def message_indices(seed: int, role: int, trials, column: int, big_m) -> np.ndarray:
    """Uniform message indices in [0, big_m) for one user (column 0 or 1).

    Exact for big_m up to 2**53; beyond that the 53-bit uniform limits the
    resolution, which only matters for diagnostic runs at huge block lengths.
    """
    u = uniforms(seed, role, trials, 2)[:, column]
    if big_m <= 2**62:
        m = (u * big_m).astype(np.int64)
        return np.minimum(m, big_m - 1)
    return np.array([min(int(x * big_m), big_m - 1) for x in u], dtype=object)
