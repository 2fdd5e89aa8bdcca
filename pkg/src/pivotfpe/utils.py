"""This module contains some supporting functions."""

import hashlib
import json
import math
import numbers
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any
from typing import Callable
from typing import List
from typing import Sequence
from typing import Tuple

import numpy as np

#: Stream identifiers of the seed derivation, so W draws and simulated samples never share a stream
STREAM_W = 0
STREAM_SIM = 1


def floor_fraction(lam, m: int) -> int:
    """Computes ``floor(lam * m)`` without binary-fraction artifacts.

    The floor is taken in integer arithmetic. Floats are read as the shortest decimal that
    round-trips to them, so ``0.15 * 20`` floors to 3 at any magnitude of ``m``.

    Args:
        lam: Fraction in ``[0, 1]``.
        m: Non-negative integer.

    Returns:
        An integer in ``[0, m]``.
    """
    if not isinstance(lam, Fraction):
        lam = Fraction(repr(float(lam)))
    k = (lam.numerator * int(m)) // lam.denominator
    return min(max(k, 0), m)


def replicate_rng(seed: int, replicate: int, stream: int = STREAM_SIM) -> np.random.Generator:
    """A generator for one replicate, derived from ``(seed, stream, replicate)`` only.

    Replicates therefore do not depend on the order or the worker they are computed in.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(replicate)))
    return np.random.Generator(np.random.PCG64(sequence))


def derive_seed(seed: int, *keys: int) -> int:
    """A 32-bit seed for one configuration of an experiment, derived from ``(seed, *keys)``."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1)[0])


def chunk_ranges(count: int, chunks: int) -> List[Tuple[int, int]]:
    """Splits ``range(count)`` into at most ``chunks`` contiguous ``(start, stop)`` pieces."""
    chunks = max(1, min(chunks, count)) if count else 1
    bounds = np.linspace(0, count, chunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def map_chunks(
    func: Callable[..., Sequence[Any]],
    count: int,
    *args: Any,
    workers: int = 1,
    chunks_per_worker: int = 4,
) -> List[Any]:
    """Calls ``func(start, stop, *args)`` on contiguous chunks and concatenates the results.

    With ``workers > 1`` the chunks run in a process pool; the result is the same list as with a
    single worker as long as ``func`` only depends on its arguments. ``func`` must be picklable.
    """
    if workers <= 1:
        ranges = chunk_ranges(count, 1)
        return [item for start, stop in ranges for item in func(start, stop, *args)]
    ranges = chunk_ranges(count, workers * chunks_per_worker)
    results = []
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(func, start, stop, *args) for start, stop in ranges]
        for future in futures:
            results.extend(future.result())
    return results


def format_real(value: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(value), ".17g")


def _dumps(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, numbers.Integral):
        return str(int(obj))
    if isinstance(obj, numbers.Real):
        value = float(obj)
        if not math.isfinite(value):
            raise ValueError(f"Cannot serialize non-finite value {value!r}")
        return format_real(value)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {_dumps(v, indent, level + 1)}"
            for k, v in sorted(obj.items())
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        values = list(obj)
        if not values:
            return "[]"
        return "[" + ", ".join(_dumps(v, indent, level + 1) for v in values) + "]"
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


def dumps_17g(obj: Any, indent: int = 2) -> str:
    """JSON serialization with sorted keys and every float written with 17 significant digits.

    The output is a pure function of ``obj``, so equal objects give byte-identical files.
    """
    return _dumps(obj, indent, 0) + "\n"


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    return sha256_bytes(Path(path).read_bytes())
