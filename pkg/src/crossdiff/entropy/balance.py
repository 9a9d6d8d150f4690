"""Detailed-balance weights ``pi`` with ``pi_i a_ij = pi_j a_ji``."""

from dataclasses import dataclass, field

import numpy as np

from .. import models as _models
from ..errors import ContractViolation

CONSTANT_RTOL = 1e-9
SAMPLED_RTOL = 1e-7


@dataclass
class DetailedBalance:
    """Outcome of a detailed-balance solve.

    ``pi`` is always filled (from the spanning forest), even when infeasible.
    ``witness`` is a 0-based pair ``(i, j)`` for a failed pair condition, or
    ``None``; ``sample_index`` names the violating sample for u-dependent data.
    """

    pi: np.ndarray
    feasible: bool
    witness: tuple | None = None
    reason: str = ""
    sample_index: int | None = None
    zero_pairs: list = field(default_factory=list)
    components: int = 1
    max_violation: float = 0.0

    def to_dict(self):
        return {
            "pi": self.pi.tolist(),
            "feasible": self.feasible,
            "witness": None if self.witness is None else [int(i) for i in self.witness],
            "reason": self.reason,
            "sample_index": self.sample_index,
            "zero_pairs": [[int(i), int(j)] for i, j in self.zero_pairs],
            "components": self.components,
            "max_violation": self.max_violation,
        }


def _pair_violation(pi, a, i, j):
    lhs, rhs = pi[i] * a[i, j], pi[j] * a[j, i]
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0 else abs(lhs - rhs) / scale


def solve_detailed_balance_constant(a, rtol=CONSTANT_RTOL):
    """Solve ``pi_i a_ij = pi_j a_ji`` for constant coefficients.

    Pairs with both entries zero impose nothing. A pair with exactly one zero,
    or with entries of opposite sign, is infeasible outright. The remaining
    pairs form a graph; ``pi`` is propagated along a depth-first spanning
    forest (each component's lowest index gets ``pi = 1``) and every non-tree
    edge is checked afterwards.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all(np.isfinite(a)):
        raise ContractViolation("a must be a finite square matrix")
    n = a.shape[0]
    adj = [[] for _ in range(n)]
    zero_pairs, bad = [], None
    for i in range(n):
        for j in range(i + 1, n):
            x, y = a[i, j], a[j, i]
            if x == 0 and y == 0:
                zero_pairs.append((i, j))
            elif x == 0 or y == 0:
                bad = bad or ((i, j), "exactly one of a_ij, a_ji is zero")
            elif x * y < 0:
                bad = bad or ((i, j), "a_ij and a_ji have opposite signs")
            else:
                adj[i].append(j)
                adj[j].append(i)

    pi = np.ones(n)
    seen = np.zeros(n, dtype=bool)
    tree = set()
    components = 0
    for root in range(n):
        if seen[root]:
            continue
        components += 1
        stack = [(root, None)]
        while stack:
            j, i = stack.pop()
            if seen[j]:
                continue
            seen[j] = True
            if i is not None:
                pi[j] = pi[i] * a[i, j] / a[j, i]
                tree.add((min(i, j), max(i, j)))
            # reversed so the lowest-indexed neighbour is explored first
            stack.extend((k, j) for k in reversed(adj[j]) if not seen[k])

    result = DetailedBalance(pi, True, zero_pairs=zero_pairs, components=components)
    if bad is not None:
        result.feasible, result.witness, result.reason = False, bad[0], bad[1]
        result.max_violation = 1.0
        return result
    worst = 0.0
    for i in range(n):
        for j in adj[i]:
            if i < j and (i, j) not in tree:
                v = _pair_violation(pi, a, i, j)
                worst = max(worst, v)
                if v > rtol and result.feasible:
                    result.feasible, result.witness = False, (i, j)
                    result.reason = "cycle condition fails on a non-tree edge"
    result.max_violation = worst
    return result


def solve_detailed_balance_pressures(model, samples, rtol=SAMPLED_RTOL):
    """Detailed balance for the pressure Jacobian ``Q(u)``, uniformly over samples.

    ``pi`` comes from the first sample; every sample is then checked with
    relative tolerance ``rtol`` (pairs whose entries are both below
    ``1e-12 max|pi Q|`` count as zero).
    """
    U = _models.check_domain(model, np.atleast_2d(np.asarray(samples, dtype=float)))
    Q = _models.pressure_jacobian_batch(model, U)
    first = solve_detailed_balance_constant(Q[0], rtol=rtol)
    if not first.feasible:
        first.sample_index = 0
        return first
    pi = first.pi
    W = pi[:, None] * Q
    Wt = np.swapaxes(W, -1, -2)
    floor = 1e-12 * np.max(np.abs(W), axis=(-1, -2), keepdims=True)
    scale = np.maximum(np.maximum(np.abs(W), np.abs(Wt)), floor)
    scale = np.where(scale == 0, 1.0, scale)
    rel = np.abs(W - Wt) / scale
    first.max_violation = float(np.max(rel))
    per_sample = np.max(rel, axis=(-1, -2))
    if np.any(per_sample > rtol):
        k = int(np.argmax(per_sample > rtol))
        i, j = np.unravel_index(np.argmax(rel[k]), rel[k].shape)
        first.feasible = False
        first.sample_index = k
        first.witness = (int(min(i, j)), int(max(i, j)))
        first.reason = "pi from the first sample fails at another sample"
    return first
