"""Ising problem instances, conversions from MaxCut / QUBO, and objective evaluation.

Two scalar functions are defined on a spin configuration ``x`` in {-1, +1}^n:

* the Ising energy ``-sum_i h_i x_i - sum_{i,j} J_ij x_i x_j`` (the double sum
  runs over all ordered pairs, so every edge is counted twice), and
* the maximization objective ``K + h.x/4 + x.J.x/4``, whose maximum equals the
  MaxCut value of a converted graph, or minus the minimum of a converted QUBO.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

MAX_BRUTE_FORCE_SPINS = 24


class SourceKind(str, enum.Enum):
    NATIVE_ISING = "native_ising"
    FROM_MAXCUT = "from_maxcut"
    FROM_QUBO = "from_qubo"


@dataclass(frozen=True, eq=False)
class IsingInstance:
    """Symmetric Ising instance with local fields and an additive constant.

    Parameters
    ----------
    J : array_like or scipy.sparse matrix
        Symmetric (n, n) coupling matrix with zero diagonal. Stored as CSR.
    h : array_like, optional
        Local fields, length n. Defaults to zeros.
    K : float
        Constant added by :func:`objective_value`.
    source_kind : SourceKind
        Where the instance came from.
    """

    J: sp.csr_matrix
    h: np.ndarray = None
    K: float = 0.0
    source_kind: SourceKind = SourceKind.NATIVE_ISING
    _dense: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        J = sp.csr_matrix(self.J, dtype=float)
        J.sum_duplicates()
        J.sort_indices()
        n = J.shape[0]
        if J.shape != (n, n):
            raise ValueError(f"J must be square, got shape {J.shape}")
        if n < 1:
            raise ValueError("an instance needs at least one spin")
        if np.any(J.diagonal() != 0):
            raise ValueError("J must have a zero diagonal")
        asym = J - J.T
        if asym.nnz and np.max(np.abs(asym.data)) != 0:
            raise ValueError("J must be symmetric")
        if not np.all(np.isfinite(J.data)):
            raise ValueError("J must be finite")
        h = np.zeros(n) if self.h is None else np.asarray(self.h, dtype=float).copy()
        if h.shape != (n,):
            raise ValueError(f"h must have length {n}, got shape {h.shape}")
        if not np.all(np.isfinite(h)) or not np.isfinite(self.K):
            raise ValueError("h and K must be finite")
        h.setflags(write=False)
        J.data.setflags(write=False)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "K", float(self.K))
        object.__setattr__(self, "source_kind", SourceKind(self.source_kind))

    @property
    def n(self) -> int:
        return self.J.shape[0]

    def dense_J(self) -> np.ndarray:
        """Dense copy of J (cached; read-only)."""
        if self._dense is None:
            d = self.J.toarray()
            d.setflags(write=False)
            object.__setattr__(self, "_dense", d)
        return self._dense

    def row_abs_sums(self) -> np.ndarray:
        """``sum_{j != i} |J_ij|`` for every row."""
        return np.asarray(abs(self.J).sum(axis=1)).ravel()

    def with_couplings(self, J) -> "IsingInstance":
        return IsingInstance(J, self.h, self.K, self.source_kind)


def _as_config(inst: IsingInstance, cfg) -> np.ndarray:
    x = np.asarray(cfg, dtype=float)
    if x.shape[-1:] != (inst.n,):
        raise ValueError(f"configuration length {x.shape[-1:]} does not match n={inst.n}")
    return x


def ising_energy(inst: IsingInstance, cfg) -> float:
    """Ising energy ``-h.x - sum_ij J_ij x_i x_j`` (ordered-pair double sum)."""
    x = _as_config(inst, cfg)
    return float(-inst.h @ x - x @ (inst.J @ x))


def objective_value(inst: IsingInstance, cfg):
    """Maximization objective ``K + h.x/4 + x.J.x/4``.

    ``cfg`` may be a single configuration or a stack of shape (m, n); in the
    latter case an array of m values is returned.
    """
    x = _as_config(inst, cfg)
    if x.ndim == 1:
        return float(inst.K + 0.25 * (inst.h @ x) + 0.25 * (x @ (inst.J @ x)))
    Jx = (inst.J @ x.T).T
    return inst.K + 0.25 * (x @ inst.h) + 0.25 * np.einsum("ij,ij->i", x, Jx)


def spins_from_amplitudes(a) -> np.ndarray:
    """Sign readout with sign(0) -> +1."""
    return np.where(np.asarray(a) < 0, -1.0, 1.0)


def from_maxcut(n: int, edges) -> IsingInstance:
    """Convert a weighted graph (1-based edge list) to an Ising instance.

    ``J_ij = -w_ij`` and ``K = sum over edges of w / 2``. Duplicate edges are
    summed.
    """
    n = int(n)
    if n < 1:
        raise ValueError("graph must have at least one vertex")
    rows, cols, vals = [], [], []
    for e in edges:
        i, j, w = int(e[0]), int(e[1]), float(e[2])
        if i == j:
            raise ValueError(f"self-loop on vertex {i}")
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
        rows += [i - 1, j - 1]
        cols += [j - 1, i - 1]
        vals += [-w, -w]
    J = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    K = -0.25 * float(np.sum(vals))
    return IsingInstance(J, np.zeros(n), K, SourceKind.FROM_MAXCUT)


def from_qubo(Q) -> IsingInstance:
    """Convert a symmetric QUBO matrix (minimize ``x^T Q x`` over {0,1}^n).

    ``J = -offdiag(Q)``, ``h = -2 Q 1`` and ``K = -(1^T Q 1)/4 - trace(Q)/4``.
    """
    if sp.issparse(Q):
        Qs = sp.csr_matrix(Q, dtype=float)
    else:
        Qs = sp.csr_matrix(np.atleast_2d(np.asarray(Q, dtype=float)))
    n = Qs.shape[0]
    if Qs.shape != (n, n):
        raise ValueError(f"Q must be square, got {Qs.shape}")
    diff = Qs - Qs.T
    if diff.nnz and np.max(np.abs(diff.data)) > 0:
        raise ValueError("Q must be symmetric")
    diag = Qs.diagonal()
    offdiag = (Qs - sp.diags(diag)).tocsr()
    offdiag.eliminate_zeros()
    ones = np.ones(n)
    h = -2.0 * (Qs @ ones)
    K = -0.25 * float(ones @ (Qs @ ones)) - 0.25 * float(diag.sum())
    return IsingInstance(-offdiag, h, K, SourceKind.FROM_QUBO)


def qubo_value(Q, xb) -> float:
    xb = np.asarray(xb, dtype=float)
    return float(xb @ (Q @ xb))


def cut_value(n: int, edges, cfg) -> float:
    x = np.asarray(cfg)
    return float(sum(w for i, j, w in edges if x[int(i) - 1] != x[int(j) - 1]))


def all_configs(n: int) -> np.ndarray:
    """All 2^n configurations in lexicographic order (-1 before +1)."""
    k = np.arange(2**n, dtype=np.int64)[:, None]
    bits = (k >> np.arange(n - 1, -1, -1)) & 1
    return (2.0 * bits - 1.0)


def brute_force_optimum(inst: IsingInstance, chunk_bits: int = 16):
    """Exhaustively maximize :func:`objective_value`.

    Returns the lexicographically smallest maximizer (with -1 < +1) and the
    optimal value. Refuses instances with more than 24 spins.
    """
    n = inst.n
    if n > MAX_BRUTE_FORCE_SPINS:
        raise ValueError(f"brute force refused for n={n} > {MAX_BRUTE_FORCE_SPINS}")
    low = min(n, chunk_bits)
    high = n - low
    tail = all_configs(low)
    best_val, best_cfg = -np.inf, None
    for prefix in (all_configs(high) if high else np.empty((1, 0))):
        block = np.hstack([np.broadcast_to(prefix, (tail.shape[0], high)), tail])
        vals = objective_value(inst, block)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_cfg = float(vals[k]), block[k].copy()
    return best_cfg, best_val
