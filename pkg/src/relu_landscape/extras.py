"""Random-initialization loss bounds and fossilized critical sets.

Adding neurons turns a discrete critical point into a family of critical
points: each row ``w_j`` may be shared out as ``a_1 w_j, ..., a_r w_j`` with
positive weights summing to one.  Positive homogeneity of the pairwise kernel
leaves the loss unchanged, and the gradient stays zero in the interior of the
resulting product of simplices.
"""

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .kernel import gradient, hessian, loss

PARTITION_GUARD = 4


# --- Xavier initialization --------------------------------------------------------


def xavier_bounds(d):
    """Closed-form sandwich ``((1 - 2/pi) d, (1 - 1/pi) d)`` at ``k = d``.

    The bounded quantity is the mean squared output difference
    ``E (sum relu(W x) - sum relu(x))^2``, i.e. twice the loss ``L``, with
    i.i.d. ``N(0, 1/d)`` entries of ``W``.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    return (1 - 2 / np.pi) * d, (1 - 1 / np.pi) * d


def xavier_exact(d):
    """Exact mean squared output difference under ``N(0, 1/d)`` entries, ``k = d``."""
    log_ratio = gammaln(d / 2 + 1) - gammaln((d + 1) / 2)
    return d + d * (d - 1) / np.pi - np.sqrt(2) * d**1.5 * np.exp(log_ratio) / np.pi


@dataclass
class XavierEstimate:
    d: int
    n: int
    seed: int
    estimate: float
    stderr: float
    lo: float
    hi: float

    @property
    def expected_loss(self):
        return 0.5 * self.estimate

    @property
    def within_bounds(self):
        return self.lo - 3 * self.stderr <= self.estimate <= self.hi + 3 * self.stderr

    def as_dict(self):
        out = dict(self.__dict__)
        out.update(expected_loss=self.expected_loss, within_bounds=self.within_bounds, exact=xavier_exact(self.d))
        return out


def xavier_mc(d, n, seed, chunk=2000):
    """Monte-Carlo estimate of the mean squared output difference (``2 E_W L``).

    Each sample draws a fresh ``W`` and a fresh input, so the sample mean of
    ``(sum relu(W x) - sum relu(x))^2`` is unbiased for the double
    expectation.
    """
    if n < 1000:
        raise ValueError("use at least 1000 samples")
    rng = np.random.default_rng(seed)
    total = total_sq = 0.0
    done = 0
    while done < n:
        m = min(chunk, n - done)
        W = rng.standard_normal((m, d, d)) / np.sqrt(d)
        x = rng.standard_normal((m, d))
        student = np.maximum(np.matmul(W, x[:, :, None])[:, :, 0], 0.0).sum(axis=1)
        z = (student - np.maximum(x, 0.0).sum(axis=1)) ** 2
        total += z.sum()
        total_sq += (z * z).sum()
        done += m
    mean = total / n
    se = np.sqrt(max(total_sq / n - mean * mean, 0.0) / n)
    lo, hi = xavier_bounds(d)
    return XavierEstimate(d, n, seed, float(mean), float(se), float(lo), float(hi))


# --- partitions and simplices -----------------------------------------------------


@dataclass(frozen=True)
class FossilPartition:
    """Partition of ``range(k)`` into ``d`` parts with ``j`` in part ``j`` (0-based)."""

    k: int
    d: int
    parts: tuple

    def __post_init__(self):
        parts = tuple(tuple(sorted(p)) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if len(parts) != self.d:
            raise ValueError(f"need exactly {self.d} parts")
        flat = sorted(i for p in parts for i in p)
        if flat != list(range(self.k)):
            raise ValueError("parts must be disjoint and cover range(k)")
        for j, p in enumerate(parts):
            if j not in p or any(i < self.d and i != j for i in p):
                raise ValueError(f"part {j} must contain {j} and no other index below d")

    def matrix(self):
        """0/1 matrix with entry ``(i, j)`` set iff ``i`` is in part ``j``."""
        M = np.zeros((self.k, self.d))
        for j, p in enumerate(self.parts):
            M[list(p), j] = 1.0
        return M

    def vertex_choices(self):
        """Vertices of the cell: one row picked from each part."""
        return list(itertools.product(*self.parts))


def enumerate_partitions(k, d):
    """All partitions with ``j`` in part ``j``; there are ``d^(k-d)`` of them."""
    if not k >= d >= 1:
        raise ValueError("need k >= d >= 1")
    if k - d > PARTITION_GUARD:
        raise ValueError(f"k - d = {k - d} exceeds the enumeration guard {PARTITION_GUARD}")
    out = []
    for assign in itertools.product(range(d), repeat=k - d):
        parts = [[j] for j in range(d)]
        for extra, j in enumerate(assign):
            parts[j].append(d + extra)
        out.append(FossilPartition(k, d, tuple(map(tuple, parts))))
    return out


def split_weights(partition, weights):
    """Map part-wise weights to a ``k x d`` matrix ``delta``.

    ``weights[j]`` lists the weights of the members of part ``j`` in sorted
    order and must sum to one.
    """
    delta = np.zeros((partition.k, partition.d))
    for j, (p, w) in enumerate(zip(partition.parts, weights)):
        w = np.asarray(w, dtype=float)
        if w.shape != (len(p),) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError(f"weights for part {j} must be {len(p)} non-negative numbers summing to 1")
        delta[list(p), j] = w
    return delta


@dataclass
class FossilPoint:
    W: np.ndarray
    loss: float
    interior: bool
    gradient_norm: float = None


def fossil_point(W, partition, weights, check=True):
    """Split the rows of ``W`` (``k x d``) into ``partition.k`` rows.

    ``partition`` has one part per row of ``W``; member ``l`` of part ``j``
    receives ``a_l w_j``.  On the boundary (some weight zero) the new matrix
    has zero rows, the loss is not smooth and the gradient is not evaluated.
    """
    W = np.asarray(W, dtype=float)
    k, d = W.shape
    if partition.d != k:
        raise ValueError("partition must have one part per row of W")
    delta = split_weights(partition, weights)
    Wd = delta @ W
    interior = bool(np.all(delta.sum(axis=1) > 0))
    pt = FossilPoint(Wd, loss(Wd), interior)
    if not interior:
        warnings.warn("boundary weights give zero rows; gradient not evaluated", RuntimeWarning, stacklevel=2)
    elif check:
        pt.gradient_norm = float(np.linalg.norm(gradient(Wd)))
    return pt


def fossil_hessian(W):
    """Hessian at a fossil point, where split rows are parallel."""
    return hessian(W, allow_parallel=True)


# --- the global-minimum complex ---------------------------------------------------


@dataclass
class MinimumComplex:
    k: int
    d: int
    vertices: list
    edges: list
    connected: bool
    max_sampled_loss: float = None
    samples: int = 0

    def as_dict(self):
        return {
            "k": self.k, "d": self.d,
            "n_vertices": len(self.vertices), "n_edges": len(self.edges),
            "connected": self.connected,
            "vertices": [v.ravel().tolist() for v in self.vertices],
            "edges": [list(e) for e in self.edges],
            "max_sampled_loss": self.max_sampled_loss, "samples": self.samples,
        }


def _vertex_matrix(k, d, rows):
    M = np.zeros((k, d))
    M[list(rows), range(d)] = 1.0
    return M


def _connected(n, edges):
    if n == 0:
        return True
    adj = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, stack = {0}, [0]
    while stack:
        for j in adj[stack.pop()] - seen:
            seen.add(j)
            stack.append(j)
    return len(seen) == n


def global_min_complex(k, d, samples=0, seed=0):
    """Vertices and edges of the zero-loss complex, optionally with sampled losses.

    Each cell is a product of simplices (one per column); its edges join
    vertices that differ in one column.  The complex is the union of the cells'
    images under all row and column permutations.  Vertices are identified by
    exact equality of their 0/1 matrices.
    """
    if k - d > 2 or d > 4 or k < d:
        raise ValueError("supported for k - d <= 2 and d <= 4")
    parts = enumerate_partitions(k, d)
    base_edges = set()
    for part in parts:
        choices = part.vertex_choices()
        for a, b in itertools.combinations(choices, 2):
            if sum(x != y for x, y in zip(a, b)) == 1:
                base_edges.add((a, b))
    index = {}
    vertices, edges = [], set()

    def vid(M):
        key = M.astype(np.int8).tobytes()
        if key not in index:
            index[key] = len(vertices)
            vertices.append(M)
        return index[key]

    for rp in itertools.permutations(range(k)):
        for cp in itertools.permutations(range(d)):
            for part in parts:
                for rows in part.vertex_choices():
                    vid(_vertex_matrix(k, d, rows)[list(rp)][:, list(cp)])
            for a, b in base_edges:
                ia = vid(_vertex_matrix(k, d, a)[list(rp)][:, list(cp)])
                ib = vid(_vertex_matrix(k, d, b)[list(rp)][:, list(cp)])
                edges.add((min(ia, ib), max(ia, ib)))
    edges = sorted(edges)
    cx = MinimumComplex(k, d, vertices, edges, _connected(len(vertices), edges))
    if samples:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            part = parts[rng.integers(len(parts))]
            weights = [rng.dirichlet(np.ones(len(p))) for p in part.parts]
            M = split_weights(part, weights)
            M = M[rng.permutation(k)][:, rng.permutation(d)]
            worst = max(worst, loss(M))
        cx.max_sampled_loss, cx.samples = float(worst), samples
    return cx


def loss_spread_on_cell(W, partition, samples, seed=0):
    """``max - min`` of the loss over Dirichlet-sampled points of one cell."""
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(samples):
        weights = [rng.dirichlet(np.ones(len(p))) for p in partition.parts]
        vals.append(fossil_point(W, partition, weights, check=False).loss)
    return float(max(vals) - min(vals))
