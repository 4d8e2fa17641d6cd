"""Block schemes over sample indices and the block means built from them."""

import hashlib
import itertools
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapacityError, ConsistencyError, ParameterError

__all__ = [
    "BlockScheme",
    "BlockMeans",
    "ENUMERATION_CAP",
    "partition_disjoint",
    "enumerate_subsets",
    "sample_subsets",
    "block_means",
]

ENUMERATION_CAP = 10**6

_KINDS = ("disjoint", "exhaustive_subsets", "sampled_subsets")


@dataclass(frozen=True, eq=False)
class BlockScheme:
    """Index blocks of equal size ``n`` over ``range(N)``.

    ``blocks`` is an integer array of shape ``(k_effective, n)``; row ``j``
    lists the indices of block ``j``.
    """

    kind: str
    blocks: np.ndarray
    n: int
    N: int
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown scheme kind {self.kind!r}")
        blocks = np.asarray(self.blocks, dtype=np.int64)
        if blocks.ndim != 2 or blocks.shape[1] != self.n:
            raise ParameterError("blocks must be a (k, n) index array")
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @property
    def k_effective(self):
        return self.blocks.shape[0]

    @property
    def digest(self):
        """Short SHA-256 of the scheme, for audit trails."""
        h = hashlib.sha256()
        h.update(f"{self.kind}:{self.N}:{self.n}:".encode())
        h.update(np.ascontiguousarray(self.blocks).tobytes())
        return h.hexdigest()[:16]

    def to_dict(self):
        return {
            "kind": self.kind,
            "N": self.N,
            "n": self.n,
            "seed": self.seed,
            "blocks": self.blocks.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        blocks = np.asarray(d["blocks"], dtype=np.int64).reshape(-1, d["n"])
        return cls(d["kind"], blocks, d["n"], d["N"], d.get("seed"))


@dataclass(frozen=True, eq=False)
class BlockMeans:
    """Per-block sample means.

    ``values`` has shape ``(k,)`` for scalar samples and ``(k, d)`` when the
    sample is an ``(N, d)`` matrix.
    """

    values: np.ndarray
    n: int
    scheme_kind: str
    scheme_digest: str = ""

    def __len__(self):
        return self.values.shape[0]


def _check_N(N):
    if int(N) != N or N < 1:
        raise ParameterError(f"sample size must be a positive integer, got {N!r}")
    return int(N)


def partition_disjoint(N, k, seed=0, n=None) -> BlockScheme:
    """Split a seeded random permutation of ``range(N)`` into ``k`` blocks.

    Blocks have size ``n = N // k`` (or the supplied smaller ``n``); the
    trailing ``N - k * n`` permuted indices are dropped. The permutation
    never looks at data values.
    """
    N = _check_N(N)
    if int(k) != k or not 1 <= k <= N:
        raise ParameterError(f"block count k must satisfy 1 <= k <= N={N}, got {k!r}")
    k = int(k)
    if n is None:
        n = N // k
    elif int(n) != n or n < 1 or n * k > N:
        raise ParameterError(f"block size n={n!r} with k={k} needs 1 <= n and k*n <= N={N}")
    n = int(n)
    perm = np.random.default_rng(seed).permutation(N)
    return BlockScheme("disjoint", perm[: k * n].reshape(k, n), n, N, seed)


def enumerate_subsets(N, n, cap=ENUMERATION_CAP) -> BlockScheme:
    """All ``C(N, n)`` index subsets of size ``n`` in lexicographic order."""
    N = _check_N(N)
    if int(n) != n or not 1 <= n <= N:
        raise ParameterError(f"subset size must satisfy 1 <= n <= N={N}, got {n!r}")
    total = math.comb(N, int(n))
    if total > cap:
        raise CapacityError(f"C({N},{n}) = {total} subsets exceeds the enumeration cap {cap}")
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(N), int(n))),
        dtype=np.int64,
        count=total * int(n),
    )
    return BlockScheme("exhaustive_subsets", flat.reshape(total, int(n)), int(n), N)


def sample_subsets(N, n, B, seed=0, complete=False, max_draws=None) -> BlockScheme:
    """Draw ``B`` uniformly random size-``n`` subsets of ``range(N)``.

    Subsets are drawn with replacement from the family of all size-``n``
    subsets (indices within a subset are distinct). With ``complete=True``
    duplicates are discarded and drawing continues until ``B`` distinct
    subsets are found; this mode exists for oracle checks at tiny ``N``.
    """
    N = _check_N(N)
    if int(n) != n or not 1 <= n <= N:
        raise ParameterError(f"subset size must satisfy 1 <= n <= N={N}, got {n!r}")
    if int(B) != B or B < 1:
        raise ParameterError(f"number of subsets B must be a positive integer, got {B!r}")
    n, B = int(n), int(B)
    rng = np.random.default_rng(seed)

    if not complete:
        keys = rng.random((B, N))
        blocks = np.sort(np.argpartition(keys, n - 1, axis=1)[:, :n], axis=1)
        return BlockScheme("sampled_subsets", blocks, n, N, seed)

    total = math.comb(N, n)
    if B > total:
        raise ParameterError(f"only C({N},{n}) = {total} distinct subsets exist, asked for {B}")
    if max_draws is None:
        # coupon-collector bound with generous slack
        max_draws = int(50 * total * (math.log(total) + 1)) + 1000
    seen = set()
    rows = []
    draws = 0
    while len(rows) < B:
        if draws >= max_draws:
            raise ParameterError(f"dedup sampling did not collect {B} subsets in {max_draws} draws")
        row = tuple(sorted(rng.choice(N, size=n, replace=False).tolist()))
        draws += 1
        if row not in seen:
            seen.add(row)
            rows.append(row)
    return BlockScheme("sampled_subsets", np.array(rows, dtype=np.int64), n, N, seed)


def block_means(sample, scheme: BlockScheme) -> BlockMeans:
    """Mean of ``sample`` over each block of ``scheme``."""
    x = np.asarray(sample, dtype=float)
    if x.ndim not in (1, 2):
        raise ParameterError("sample must be a vector or an (N, d) matrix")
    if scheme.blocks.size and scheme.blocks.max() >= x.shape[0]:
        raise ConsistencyError(
            f"scheme references index {int(scheme.blocks.max())} but the sample has {x.shape[0]} rows"
        )
    values = x[scheme.blocks].mean(axis=1)
    return BlockMeans(values, scheme.n, scheme.kind, scheme.digest)
