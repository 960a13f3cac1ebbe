"""Local-interaction spatial model: kernel weights, energy, sparse precision.

The model couples scattered samples through normalized kernel weights

    w[n, m] = K(||s_n - s_m|| / h_n) / Z,

where Z is the global double sum of kernel values over all ordered pairs
(including the n == m diagonal, each contributing K(0) = 1). The weights are
generally asymmetric because bandwidths are local. From the weights, a
quadratic energy

    H(x) = (1 / 2 lambda) [ (x - m)'(x - m) / N + c1 * S1(x) ],
    S1(x) = sum_{n,k} w[n, k] (x_n - x_k)^2,

defines a symmetric sparse precision matrix J with strictly positive
diagonal margin 1 / (N lambda), hence strict positive definiteness for any
lambda, c1 > 0. Prediction at a new point appends one row/column to J and
minimizes the augmented quadratic; the minimizer and curvature give the
predicted value and conditional variance without any matrix inversion.
"""

import math

import numpy as np
import scipy.sparse as sp

from .kernels import KernelSpec, bandwidth_for_target, local_bandwidths
from .spatial import SpatialIndex, as_points


class SampleSet:
    """Scattered observation locations and values."""

    def __init__(self, coords, values):
        self.points = as_points(coords)
        self.values = np.asarray(values, dtype=np.float64).ravel()
        if self.values.shape[0] != self.points.shape[0]:
            raise ValueError("values length must equal point count")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample values must be finite")
        self.n = self.points.shape[0]
        self.dim = self.points.shape[1]

    def index(self):
        return SpatialIndex(self.points)


class SliParams:
    """Model parameter vector: (lambda, m_x, c1, k, mu) plus the kernel."""

    def __init__(self, lam, m_x, c1, k, mu, kernel):
        if lam <= 0 or c1 <= 0 or mu <= 0 or k < 1:
            raise ValueError("require lambda > 0, c1 > 0, mu > 0, k >= 1")
        self.lam = float(lam)
        self.m_x = float(m_x)
        self.c1 = float(c1)
        self.k = int(k)
        self.mu = float(mu)
        self.kernel = kernel if isinstance(kernel, KernelSpec) else KernelSpec(kernel)

    def to_dict(self):
        return {
            "lambda": self.lam,
            "m_x": self.m_x,
            "c1": self.c1,
            "k": self.k,
            "mu": self.mu,
            "kernel": self.kernel.family,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["lambda"], d["m_x"], d["c1"], d["k"], d["mu"], d["kernel"])

    def __repr__(self):
        return (
            f"SliParams(lam={self.lam:g}, m_x={self.m_x:g}, c1={self.c1:g}, "
            f"k={self.k}, mu={self.mu:g}, kernel={self.kernel.family!r})"
        )


class WeightMatrix:
    """Sparse normalized kernel weights and their normalization constant.

    `raw` holds the unnormalized kernel values K(r_nm / h_n) on the support
    graph (diagonal included); dividing by `z` gives the weights.
    """

    def __init__(self, raw, z):
        self.raw = raw.tocsr()
        self.z = float(z)
        self.n = raw.shape[0]

    @property
    def w(self):
        return self.raw / self.z


def compute_weights(samples, bandwidths, kernel, index=None):
    """Assemble the normalized interaction weights for a sample set.

    Row n holds K(||s_n - s_m|| / h_n) for all m within the kernel support
    of h_n; the normalization z is the global sum of all raw entries. The
    double sum is accumulated with compensated summation so the
    normalization stays stable for large N.
    """
    if not isinstance(kernel, KernelSpec):
        kernel = KernelSpec(kernel)
    h = np.asarray(bandwidths, dtype=np.float64).ravel()
    n = samples.n
    if h.shape[0] != n:
        raise ValueError("bandwidths length must equal sample count")
    if np.any(h <= 0):
        raise ValueError("bandwidths must be positive")
    if index is None:
        index = samples.index()
    rows, cols, vals = [], [], []
    row_sums = []
    for i in range(n):
        ids, dists = index.radius_neighbors(samples.points[i], kernel.support * h[i])
        kv = kernel(dists / h[i])
        keep = kv > 0.0
        ids, kv = ids[keep], kv[keep]
        rows.append(np.full(ids.shape, i, dtype=np.intp))
        cols.append(ids)
        vals.append(kv)
        row_sums.append(math.fsum(kv))
    raw = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    z = math.fsum(row_sums)
    return WeightMatrix(raw, z)


def gradient_term(samples, weights):
    """Kernel-weighted average of squared value differences, S1 >= 0."""
    if weights.n != samples.n:
        raise ValueError("weights were built for a different sample count")
    x = samples.values
    coo = weights.raw.tocoo()
    diffs2 = (x[coo.row] - x[coo.col]) ** 2
    return math.fsum(coo.data * diffs2) / weights.z


def energy(samples, params, weights):
    """Quadratic model energy H(x); zero iff all values equal the mean."""
    xp = samples.values - params.m_x
    s1 = gradient_term(samples, weights)
    return (xp @ xp / samples.n + params.c1 * s1) / (2.0 * params.lam)


class SparsePrecision:
    """Symmetric sparse precision matrix J with its source parameters."""

    def __init__(self, matrix, params):
        self.matrix = matrix.tocsr()
        self.params = params
        self.n = matrix.shape[0]

    def sparsity_index(self):
        """Stored-nonzero count over N^2 (structural, diagonal included)."""
        return self.matrix.nnz / self.n**2

    def dump_coo(self, path):
        """Debug dump in (row, col, value) text form; not a stable format."""
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {v!r}\n")


def build_precision(samples, params, weights):
    """Assemble J from the weights: diagonal margin plus symmetrized couplings.

    J[n, n] = 1/(N lam) + (c1/lam) * sum_{m != n} (w[n, m] + w[m, n])
    J[n, m] = -(c1/lam) * (w[n, m] + w[m, n])          for m != n

    Diagonal self-weights cancel between the two terms, so whether the
    weight matrix stores them does not affect J.
    """
    n = samples.n
    a = (weights.raw + weights.raw.T).tolil()
    a.setdiag(0.0)
    a = a.tocsr()
    a.eliminate_zeros()
    scale = params.c1 / (params.lam * weights.z)
    row_sums = np.asarray(a.sum(axis=1)).ravel()
    j = sp.diags(1.0 / (n * params.lam) + scale * row_sums) - scale * a
    return SparsePrecision(j.tocsr(), params)


class PredictionTarget:
    """Cross couplings of one prediction point with the samples.

    Holds the prediction-point bandwidth and the two sparse cross-weight
    lists (sample ids shared): w_pn uses the target bandwidth, w_np the
    per-sample bandwidths. Both share the sample normalization z.
    """

    def __init__(self, location, h_p, ids, w_pn, w_np):
        self.location = np.asarray(location, dtype=np.float64).ravel()
        self.h_p = float(h_p)
        self.ids = ids
        self.w_pn = w_pn
        self.w_np = w_np

    @property
    def coupling(self):
        """Symmetrized weights w_np + w_pn per neighboring sample."""
        return self.w_np + self.w_pn

    @property
    def neighbor_count(self):
        return int(np.count_nonzero(self.coupling > 0.0))


class Prediction:
    """Predicted value, conditional standard deviation, neighbor count."""

    __slots__ = ("value", "std", "neighbor_count", "bandwidth")

    def __init__(self, value, std, neighbor_count, bandwidth):
        self.value = value
        self.std = std
        self.neighbor_count = neighbor_count
        self.bandwidth = bandwidth


def cross_weights(target, index, bandwidths, kernel, z, k, mu, h_max=None):
    """Cross weights between a prediction point and the samples.

    The sample-side normalization z is reused: appending a prediction point
    leaves the sample-sample couplings untouched. Zero entries are dropped.
    """
    if not isinstance(kernel, KernelSpec):
        kernel = KernelSpec(kernel)
    target = np.asarray(target, dtype=np.float64).ravel()
    h = np.asarray(bandwidths, dtype=np.float64).ravel()
    h_p = bandwidth_for_target(target, index, k, mu)
    if h_max is None:
        h_max = h.max()
    reach = kernel.support * max(h_p, h_max)
    ids, dists = index.radius_neighbors(target, reach)
    w_pn = kernel(dists / h_p) / z
    w_np = kernel(dists / h[ids]) / z
    keep = (w_pn > 0.0) | (w_np > 0.0)
    return PredictionTarget(target, h_p, ids[keep], w_pn[keep], w_np[keep])


def predict_point(target, samples, params):
    """Minimize the augmented quadratic at one prediction point.

    The value is independent of lambda (it cancels in the coupling ratio);
    the conditional variance is lambda / (1/N + c1 * W_p). A target with no
    coupled samples falls back to the mean with variance N * lambda.
    """
    n = samples.n
    c = target.coupling
    w_p = math.fsum(c)
    denom = 1.0 / n + params.c1 * w_p
    if target.ids.size:
        num = params.c1 * math.fsum(c * (samples.values[target.ids] - params.m_x))
    else:
        num = 0.0
    value = params.m_x + num / denom
    std = math.sqrt(params.lam / denom)
    return Prediction(value, std, target.neighbor_count, target.h_p)


class SliModel:
    """Precomputed per-sample state shared by all predictions.

    Bundles the spatial index, bandwidth field, weight normalization and
    parameters so that per-target work is a single radius query plus O(m)
    arithmetic on the m coupled samples. Immutable after construction.
    """

    def __init__(self, samples, params):
        self.samples = samples
        self.params = params
        self.index = samples.index()
        self.bandwidths = local_bandwidths(self.index, params.k, params.mu)
        self.weights = compute_weights(
            samples, self.bandwidths, params.kernel, index=self.index
        )
        self._h_max = float(self.bandwidths.max())

    def target(self, location):
        return cross_weights(
            location,
            self.index,
            self.bandwidths,
            self.params.kernel,
            self.weights.z,
            self.params.k,
            self.params.mu,
            h_max=self._h_max,
        )

    def predict(self, location):
        return predict_point(self.target(location), self.samples, self.params)

    def precision(self):
        return build_precision(self.samples, self.params, self.weights)

    def energy(self):
        return energy(self.samples, self.params, self.weights)
