"""Discrete model instances: product spaces, uniform n-sets, permutations.

Blocks are bitmasks over range(n). Every builder returns a :class:`Model`
holding the space, the kernels, their weights and the canonical metric with
its generating edges.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import all_rational, fraction_array
from .measure import EXACT_MAX_STATES, FiniteSpace, MarkovKernel, Metric, check_weights, conditional_kernel

MAX_PRODUCT_STATES = 10**5
MAX_NSETS_STATES = 10**4
MAX_PERM_N = 7


def members(mask: int, n: int) -> list[int]:
    return [i for i in range(n) if mask >> i & 1]


def mask_of(items) -> int:
    m = 0
    for i in items:
        m |= 1 << int(i)
    return m


@dataclass(frozen=True)
class BlockFamily:
    """Blocks A of [n] (as bitmasks) with weights theta_A."""

    n: int
    blocks: tuple
    theta: tuple

    def __post_init__(self):
        if len(self.blocks) != len(self.theta):
            raise ValueError("one weight per block")
        if len(set(self.blocks)) != len(self.blocks):
            raise ValueError("blocks must be distinct")
        full = (1 << self.n) - 1
        if any(b < 0 or b & ~full for b in self.blocks):
            raise ValueError(f"block outside [0, {self.n})")
        check_weights(self.theta)

    @classmethod
    def uniform(cls, n: int, blocks: Sequence[int], exact: bool = True) -> "BlockFamily":
        m = len(blocks)
        w = [Fraction(1, m)] * m if exact else [1.0 / m] * m
        return cls(n, tuple(blocks), tuple(w))

    @classmethod
    def from_pattern(cls, n: int, pattern: str, theta=None, exact: bool = True) -> "BlockFamily":
        """Named block patterns with uniform (or supplied) weights.

        ``singletons``, ``pairs``, ``all-but-one``, ``full``, ``all``
        (every nonempty subset) and ``size-L`` for all blocks of size L.
        """
        pattern = pattern.strip().lower()
        if pattern == "singletons":
            size = 1
        elif pattern == "pairs":
            size = 2
        elif pattern == "all-but-one":
            size = n - 1
        elif pattern == "full":
            size = n
        elif pattern.startswith("size-"):
            try:
                size = int(pattern[5:])
            except ValueError:
                raise ValueError(f"bad block pattern {pattern!r}") from None
        elif pattern == "all":
            size = None
        else:
            raise ValueError(f"unknown block pattern {pattern!r}")
        if size is None:
            blocks = list(range(1, 1 << n))
        else:
            if not 1 <= size <= n:
                raise ValueError(f"block size {size} out of range for n={n}")
            blocks = [mask_of(c) for c in itertools.combinations(range(n), size)]
        if theta is None:
            return cls.uniform(n, blocks, exact=exact)
        return cls(n, tuple(blocks), tuple(theta))

    @classmethod
    def from_lists(cls, n: int, blocks: Sequence[Sequence[int]], theta=None, exact: bool = True) -> "BlockFamily":
        masks = [mask_of(b) for b in blocks]
        if theta is None:
            return cls.uniform(n, masks, exact=exact)
        return cls(n, tuple(masks), tuple(theta))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, exact: bool = True, max_weight: int = 12,
               include_empty: bool = False) -> "BlockFamily":
        """Random nonempty selection of subsets with random integer-ratio weights."""
        lo = 0 if include_empty else 1
        universe = list(range(lo, 1 << n))
        k = int(rng.integers(1, len(universe) + 1))
        chosen = sorted(rng.choice(universe, size=k, replace=False).tolist())
        raw = rng.integers(1, max_weight + 1, size=k).tolist()
        tot = sum(raw)
        theta = [Fraction(r, tot) for r in raw] if exact else [r / tot for r in raw]
        return cls(n, tuple(chosen), tuple(theta))

    @property
    def exact(self) -> bool:
        return all_rational(self.theta)

    def block_members(self) -> list[list[int]]:
        return [members(b, self.n) for b in self.blocks]

    def indicator(self) -> np.ndarray:
        """(blocks, n) boolean membership matrix."""
        out = np.zeros((len(self.blocks), self.n), dtype=bool)
        for r, b in enumerate(self.blocks):
            out[r, members(b, self.n)] = True
        return out


def theta_star(family: BlockFamily):
    """min_i sum_{A containing i} theta_A."""
    if family.n < 1:
        raise ValueError("need n >= 1")
    return min(sum((t for b, t in zip(family.blocks, family.theta) if b >> i & 1), 0 * family.theta[0])
               for i in range(family.n))


def theta_star_star(family: BlockFamily):
    """min_{i<j} sum_{A containing i and j} theta_A."""
    if family.n < 2:
        raise ValueError("theta_star_star needs n >= 2")
    zero = 0 * family.theta[0]
    return min(sum((t for b, t in zip(family.blocks, family.theta) if b >> i & 1 and b >> j & 1), zero)
               for i, j in itertools.combinations(range(family.n), 2))


@dataclass
class Model:
    name: str
    space: FiniteSpace
    kernels: list
    theta: tuple
    metric: Metric
    family: BlockFamily | None = None
    params: dict = field(default_factory=dict)

    def __iter__(self):
        # unpack as (space, kernels, metric)
        return iter((self.space, self.kernels, self.metric))


def _resolve_exact(exact, n_states):
    if exact is None:
        return n_states <= EXACT_MAX_STATES
    if exact and n_states > EXACT_MAX_STATES:
        raise ValueError(f"exact mode is limited to {EXACT_MAX_STATES} states")
    return exact


# ---------------------------------------------------------------------------
# product spaces
# ---------------------------------------------------------------------------


def hamming_metric(states: Sequence[tuple], sizes: Sequence[int]) -> Metric:
    arr = np.asarray(states)
    dist = (arr[:, None, :] != arr[None, :, :]).sum(axis=2)
    edges = np.argwhere(np.triu(dist == 1))
    return Metric(_ro(dist.astype(float)), _ro(edges.astype(np.int64)), None)


def _ro(a):
    a.setflags(write=False)
    return a


def build_product(sizes: Sequence[int], family: BlockFamily, marginals=None, exact: bool | None = None) -> Model:
    """Product space with one conditional-expectation kernel per block.

    T_A resamples the coordinates in A from their marginals, keeping the rest.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) != family.n:
        raise ValueError("family size does not match number of coordinates")
    total = math.prod(sizes)
    if total > MAX_PRODUCT_STATES:
        raise ValueError(f"product space has {total} states; limit is {MAX_PRODUCT_STATES}")
    states = list(itertools.product(*[range(s) for s in sizes]))
    exact = _resolve_exact(exact, total)
    if marginals is None:
        marginals = [[Fraction(1, s)] * s if exact else [1.0 / s] * s for s in sizes]
    if exact:
        margs = [fraction_array(m) for m in marginals]
        probs = [math.prod((margs[i][x[i]] for i in range(len(sizes))), start=Fraction(1)) for x in states]
    else:
        margs = [np.asarray(m, dtype=float) for m in marginals]
        probs = [float(np.prod([margs[i][x[i]] for i in range(len(sizes))])) for x in states]
    space = FiniteSpace.from_probs(states, probs, exact=exact)
    kernels = []
    for b in family.blocks:
        keep = [i for i in range(family.n) if not b >> i & 1]
        part = [tuple(x[i] for i in keep) for x in states]
        kernels.append(conditional_kernel(space, part, name=f"T_{members(b, family.n)}"))
    metric = hamming_metric(states, sizes)
    return Model("product", space, kernels, family.theta, metric, family, {"sizes": sizes})


# ---------------------------------------------------------------------------
# uniform n-sets and the down-up walk
# ---------------------------------------------------------------------------


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.int64)
    c = np.zeros_like(x)
    while np.any(x):
        c += x & 1
        x >>= 1
    return c


def nsets_states(N: int, n: int) -> list[int]:
    return [mask_of(c) for c in itertools.combinations(range(N), n)]


def downup_counts(N: int, n: int, k: int) -> tuple[np.ndarray, int]:
    """Integer transition counts of the down-up walk and their common denominator.

    Down step: n-set -> (n-k)-subset, each with weight 1. Up step: (n-k)-set
    -> n-superset, each with weight 1. The product counts (removal, addition)
    choices; every row sums to C(n, k) * C(N-n+k, k).
    """
    big = np.asarray(nsets_states(N, n), dtype=np.int64)
    small = np.asarray(nsets_states(N, n - k), dtype=np.int64)
    down = ((big[:, None] & small[None, :]) == small[None, :]).astype(np.int64)
    up = down.T
    counts = down @ up
    denom = math.comb(n, k) * math.comb(N - n + k, k)
    return counts, denom


def build_nsets(N: int, n: int, k: int | None = None, theta_k=None, exact: bool | None = None) -> Model:
    """Uniform n-subsets of [N] with the (n <-> n-k) down-up walk(s).

    Pass ``k`` for a single walk, or ``theta_k`` (length n, weight of each
    k = 1..n) for a weighted family of walks.
    """
    if not 1 <= n < N:
        raise ValueError("need 1 <= n < N")
    total = math.comb(N, n)
    if total > MAX_NSETS_STATES:
        raise ValueError(f"C({N},{n}) = {total} exceeds {MAX_NSETS_STATES}")
    if (k is None) == (theta_k is None):
        raise ValueError("give exactly one of k or theta_k")
    if k is not None:
        if not 1 <= k <= n:
            raise ValueError("need 1 <= k <= n")
        ks = [k]
        theta = (Fraction(1),)
    else:
        if len(theta_k) != n:
            raise ValueError("theta_k needs one weight per k = 1..n")
        w = check_weights(theta_k)
        ks = [i + 1 for i in range(n) if w[i] != 0]
        theta = tuple(w[i - 1] for i in ks)
    exact = _resolve_exact(exact, total)
    states = nsets_states(N, n)
    labels = [tuple(members(s, N)) for s in states]
    space = FiniteSpace.uniform(labels, exact=exact)
    kernels = []
    for kk in ks:
        counts, denom = downup_counts(N, n, kk)
        if exact:
            mat = np.empty(counts.shape, dtype=object)
            for idx, c in np.ndenumerate(counts):
                mat[idx] = Fraction(int(c), denom)
        else:
            mat = counts / denom
        kernels.append(MarkovKernel.from_matrix(space, mat, name=f"T_{kk}"))
    arr = np.asarray(states, dtype=np.int64)
    inter = _popcount(arr[:, None] & arr[None, :])
    dist = (n - inter).astype(float)
    edges = np.argwhere(np.triu(dist == 1))
    metric = Metric(_ro(dist), _ro(edges.astype(np.int64)), None)
    if not exact:
        theta = tuple(float(t) for t in theta)
    return Model("nsets", space, kernels, theta, metric, None, {"N": N, "n": n, "ks": ks})


def downup_theoretical_kappa(N: int, n: int, theta_k):
    """kappa_0 + kappa_1 for weights theta_k over k = 1..n."""
    if len(theta_k) != n:
        raise ValueError("theta_k needs one weight per k = 1..n")
    w = check_weights(theta_k)
    if w.dtype == object:
        return sum((w[k - 1] * (Fraction(k, n) + Fraction(k, N - (n - k)) * (1 - Fraction(k, n)))
                    for k in range(1, n + 1)), Fraction(0))
    return float(sum(w[k - 1] * (k / n + k / (N - (n - k)) * (1 - k / n)) for k in range(1, n + 1)))


# ---------------------------------------------------------------------------
# permutations
# ---------------------------------------------------------------------------


def _cycle_counts(comp: np.ndarray) -> np.ndarray:
    """Number of cycles of each permutation row of ``comp`` (shape (R, n))."""
    R, n = comp.shape
    idx = np.broadcast_to(np.arange(n), (R, n))
    cur = idx.copy()
    low = idx.copy()
    rows = np.arange(R)[:, None]
    for _ in range(n):
        cur = comp[rows, cur]
        low = np.minimum(low, cur)
    return (low == idx).sum(axis=1)


def cayley_distance(sigma, eta) -> int:
    """n minus the number of cycles of sigma o eta^{-1}."""
    sigma = np.asarray(sigma)
    eta = np.asarray(eta)
    inv = np.argsort(eta)
    comp = sigma[inv]
    return int(len(sigma) - _cycle_counts(comp[None, :])[0])


def cayley_metric(perms: np.ndarray) -> Metric:
    N, n = perms.shape
    dist = np.empty((N, N))
    for r in range(N):
        inv = np.argsort(perms[r])
        comp = perms[:, inv]
        dist[:, r] = n - _cycle_counts(comp)
    index = {tuple(p): i for i, p in enumerate(perms.tolist())}
    edges = []
    for r, p in enumerate(perms.tolist()):
        for i, j in itertools.combinations(range(n), 2):
            q = list(p)
            q[i], q[j] = q[j], q[i]
            s = index[tuple(q)]
            if r < s:
                edges.append((r, s))
    return Metric(_ro(dist), _ro(np.asarray(edges, dtype=np.int64)), None)


def build_permutations(n: int, family: BlockFamily, exact: bool | None = None) -> Model:
    """Uniform S_n with position-block shuffles and the transposition metric.

    T_A reshuffles uniformly the entries sitting at the positions in A and
    leaves the other positions untouched.
    """
    if n > MAX_PERM_N:
        raise ValueError(f"n={n} exceeds {MAX_PERM_N}")
    if family.n != n:
        raise ValueError("family size does not match n")
    perms = np.asarray(list(itertools.permutations(range(n))), dtype=np.int64)
    exact = _resolve_exact(exact, len(perms))
    labels = [tuple(p) for p in perms.tolist()]
    space = FiniteSpace.uniform(labels, exact=exact)
    kernels = []
    for b in family.blocks:
        keep = [i for i in range(n) if not b >> i & 1]
        part = [tuple(p[i] for i in keep) for p in labels]
        kernels.append(conditional_kernel(space, part, name=f"T_{members(b, n)}"))
    return Model("permutations", space, kernels, family.theta, cayley_metric(perms), family, {"n": n})
