"""Kernel weighting functions and adaptive local bandwidths.

All kernels are functions of the normalized distance u = ||r|| / h >= 0 with
K(0) = 1. Compact families vanish for u > 1; the exponential and gaussian
families have infinite support and are truncated at `u_cut` during sparse
assembly (the truncation error is bounded by K(u_cut)).

The local bandwidth at a sample point is mu times the distance to its k-th
nearest neighbor, so bandwidths shrink where sampling is dense and grow where
it is sparse.
"""

import numpy as np


def _step(u):
    # unit step: 1 where u <= 1 (theta(1 - u) with theta(0) = 1)
    return (u <= 1.0).astype(np.float64)


_KERNELS = {
    "uniform": lambda u: _step(u),
    "triangular": lambda u: (1.0 - u) * _step(u),
    "epanechnikov": lambda u: (1.0 - u) ** 2 * _step(u),
    "quadratic": lambda u: (1.0 - u**2) * _step(u),
    "quartic": lambda u: (1.0 - u**2) ** 2 * _step(u),
    "tricube": lambda u: (1.0 - u**3) ** 3 * _step(u),
    "spherical": lambda u: (1.0 - 1.5 * u + 0.5 * u**3) * _step(u),
    # discontinuous at u = 1: K(1-) = 0.5, K(1+) = 0
    "truncated_cauchy": lambda u: _step(u) / (1.0 + u**2),
    "exponential": lambda u: np.exp(-u),
    "gaussian": lambda u: np.exp(-(u**2)),
}

KERNEL_FAMILIES = tuple(_KERNELS)
COMPACT_FAMILIES = tuple(f for f in _KERNELS if f not in ("exponential", "gaussian"))

DEFAULT_U_CUT = 5.0


class KernelSpec:
    """A kernel family selected by name, with its support radius in u-units."""

    def __init__(self, family, u_cut=DEFAULT_U_CUT):
        if family not in _KERNELS:
            raise ValueError(
                f"unknown kernel family {family!r}; choose from {sorted(_KERNELS)}"
            )
        if u_cut <= 0:
            raise ValueError("u_cut must be positive")
        self.family = family
        self.u_cut = float(u_cut)
        self._fn = _KERNELS[family]

    @property
    def compact(self):
        return self.family in COMPACT_FAMILIES

    @property
    def support(self):
        """Normalized cutoff radius used during sparse assembly."""
        return 1.0 if self.compact else self.u_cut

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        if np.any(~np.isfinite(u)) or np.any(u < 0):
            raise ValueError("normalized distance u must be finite and >= 0")
        return self._fn(u)

    def __repr__(self):
        return f"KernelSpec({self.family!r})"

    def __eq__(self, other):
        return (
            isinstance(other, KernelSpec)
            and self.family == other.family
            and self.u_cut == other.u_cut
        )


def eval_kernel(spec, u):
    """Evaluate the kernel at normalized distance(s) u >= 0."""
    if not isinstance(spec, KernelSpec):
        spec = KernelSpec(spec)
    out = spec(u)
    return float(out) if np.isscalar(u) or np.ndim(u) == 0 else out


def local_bandwidths(index, k, mu):
    """Adaptive bandwidths h_i = mu * (k-th neighbor distance) per sample.

    Raises if any point has duplicates up to order k (zero k-th distance),
    naming the offending indices.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    n = index.n
    if not 1 <= k < n:
        raise ValueError(f"k={k} must satisfy 1 <= k < n={n}")
    # one batched query: k+1 neighbors so the self hit can be dropped
    dists, _ = index._tree.query(index.points, k=k + 1)
    dk = dists[:, k]
    if np.any(dk <= 0.0):
        bad = np.nonzero(dk <= 0.0)[0]
        raise ValueError(
            f"duplicate points up to neighbor order {k} at indices {bad.tolist()}"
        )
    return mu * dk


def bandwidth_for_target(target, index, k, mu):
    """Bandwidth at an arbitrary prediction point, by the same k-NN rule.

    A sample coinciding exactly with the target is excluded, so a target on
    top of sample j gets the same bandwidth as sample j.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    d = index.knn_distance(target, k, exclude_self=True)
    if d <= 0.0:
        raise ValueError(f"duplicate samples up to order {k} around target {target}")
    return mu * d
