"""Seeded sampling kernels with a numba fast path and a pure-numpy fallback.

The generator is SplitMix64: a counter-based scheme whose k-th output is
``mix64(seed' + (k+1)*GOLDEN)`` where ``mix64`` is the standard 64-bit
avalanche finalizer and ``seed' = mix64(seed)``.  Everything is unsigned
64-bit integer arithmetic, so both execution paths produce bit-identical
key streams on any platform, and a draw is reproducible from the seed alone.

Sampling m points without replacement from n is done by keying every index
and keeping the m smallest keys.  Keys within one draw are distinct (the
finalizer is a bijection and the counters are distinct), so the selected
subset is well defined and identical across paths.  Per-trial *means* may
differ between paths in the last float ulp because summation order differs;
for integer-valued populations the sums are exact and the paths agree
bit-for-bit.

Set ``STABREG_DISABLE_NUMBA=1`` to force the numpy fallback.  When numba is
not importable the fallback is selected automatically.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "GOLDEN",
    "mix64_int",
    "mix64_array",
    "partition_keys",
    "numba_available",
    "numba_enabled",
    "sample_means_without_replacement",
]

_MASK = (1 << 64) - 1
_GOLDEN_INT = 0x9E3779B97F4A7C15
_M1_INT = 0xBF58476D1CE4E5B9
_M2_INT = 0x94D049BB133111EB

GOLDEN = np.uint64(_GOLDEN_INT)
_M1 = np.uint64(_M1_INT)
_M2 = np.uint64(_M2_INT)

try:  # pragma: no cover - exercised implicitly by the dispatch tests
    import numba
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        """No-op decorator stand-in used when numba is absent."""

        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def numba_available() -> bool:
    """True when numba imported successfully."""
    return _HAS_NUMBA


def numba_enabled() -> bool:
    """True when the jitted path is selected for this call.

    The environment flag is consulted at call time so tests can flip it.
    """
    if not _HAS_NUMBA:
        return False
    flag = os.environ.get("STABREG_DISABLE_NUMBA", "").strip().lower()
    return flag not in {"1", "true", "yes", "on"}


def mix64_int(z: int) -> int:
    """SplitMix64 finalizer on a Python integer (mod 2**64)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1_INT) & _MASK
    z = ((z ^ (z >> 27)) * _M2_INT) & _MASK
    return (z ^ (z >> 31)) & _MASK


def mix64_array(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer applied elementwise to a uint64 array."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def partition_keys(seed: int, n: int) -> np.ndarray:
    """Per-index uint64 keys for one seeded draw over ``n`` items.

    The m smallest keys identify a uniformly random m-subset.  Keys are
    pairwise distinct for any seed and n < 2**64.
    """
    base = np.uint64(mix64_int(int(seed) % (1 << 64)))
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        counters = base + idx * GOLDEN
    return mix64_array(counters)


if _HAS_NUMBA:

    @njit(cache=True)
    def _mix64_nb(z):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    @njit(cache=True)
    def _means_nb(values, m, trials, root):
        # Per trial: regenerate the key stream, quickselect the m smallest
        # keys in place (values co-moved), and average those values.  The
        # scratch buffers are reused across trials, so a trial allocates
        # nothing; keys are distinct, which keeps the subset well defined
        # and the select's middle region at most one element wide.
        n = values.shape[0]
        golden = np.uint64(0x9E3779B97F4A7C15)
        out = np.empty(trials, dtype=np.float64)
        keys = np.empty(n, dtype=np.uint64)
        vals = np.empty(n, dtype=np.float64)
        for t in range(trials):
            base = _mix64_nb(root + np.uint64(t + 1) * golden)
            for i in range(n):
                keys[i] = _mix64_nb(base + np.uint64(i + 1) * golden)
                vals[i] = values[i]
            lo, hi, target = 0, n - 1, m - 1
            while lo < hi:
                pivot = keys[(lo + hi) >> 1]
                i, j = lo, hi
                while i <= j:
                    while keys[i] < pivot:
                        i += 1
                    while keys[j] > pivot:
                        j -= 1
                    if i <= j:
                        keys[i], keys[j] = keys[j], keys[i]
                        vals[i], vals[j] = vals[j], vals[i]
                        i += 1
                        j -= 1
                if target <= j:
                    hi = j
                elif target >= i:
                    lo = i
                else:  # the target slot sits between the halves: done
                    break
            acc = 0.0
            for i in range(m):
                acc += vals[i]
            out[t] = acc / m
        return out


def _means_np(values: np.ndarray, m: int, trials: int, root: int) -> np.ndarray:
    """Vectorized fallback; identical subset selection as the jitted path."""
    n = values.shape[0]
    out = np.empty(trials, dtype=np.float64)
    root64 = np.uint64(root)
    item_off = (np.arange(1, n + 1, dtype=np.uint64) * GOLDEN)[None, :]
    # ~16 MB of keys per chunk
    chunk = max(1, int(2_000_000 // max(n, 1)))
    start = 0
    while start < trials:
        stop = min(start + chunk, trials)
        tidx = np.arange(start + 1, stop + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            base = mix64_array(root64 + tidx * GOLDEN)[:, None]
            keys = mix64_array(base + item_off)
        sel = np.argpartition(keys, m - 1, axis=1)[:, :m]
        out[start:stop] = values[sel].sum(axis=1) / m
        start = stop
    return out


def sample_means_without_replacement(
    values: np.ndarray, m: int, trials: int, seed: int
) -> np.ndarray:
    """Means of ``trials`` seeded m-subsets drawn without replacement.

    Trial t draws the m-subset whose keys are the m smallest of the SplitMix64
    stream rooted at ``mix64(mix64(seed) + (t+1)*GOLDEN)``.

    Args:
        values: 1-d float array, the population.
        m: subset size, 1 <= m <= len(values).
        trials: number of independent draws.
        seed: any integer; draws are a pure function of (seed, t).

    Returns:
        Float array of shape (trials,) with the per-trial sample means.
    """
    values = np.ascontiguousarray(np.asarray(values, dtype=np.float64).ravel())
    n = values.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"subset size {m} outside [1, {n}]")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    root = mix64_int(int(seed) % (1 << 64))
    if numba_enabled():
        return _means_nb(values, m, int(trials), np.uint64(root))
    return _means_np(values, m, int(trials), root)
