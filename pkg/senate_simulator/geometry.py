# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Distance geometry
-----------------

Euclidean distance matrices (squared distances throughout), their Gram
matrices and the power an embedding leaks out of the plane when a node
forges its distances.
"""
from typing import NamedTuple, Optional
import dataclasses
import logging
import numpy as np
import scipy.linalg
import scipy.spatial.distance
from . import EIGEN_TOLERANCE
from .exception import IncompleteMatrixError

#: Module logger
LOGGER = logging.getLogger(__name__)

#: Number of Monte-Carlo trials decomposed at once
BATCH_SIZE = 1024


def _frozen(array: np.ndarray, dtype: str) -> np.ndarray:
    result = np.array(array, dtype=dtype)
    result.setflags(write=False)
    return result


@dataclasses.dataclass(frozen=True, eq=False)
class Edm:
    """Matrix of squared distances with per-entry validity.

    Args:
        values (numpy.ndarray): S×S squared distances in m².
        valid (numpy.ndarray, optional): S×S flags, False where the entry
            has been discarded. Defaults to every entry valid.
    """
    values: np.ndarray
    valid: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen(self.values, "float64")
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError("an EDM must be a square matrix")
        valid = np.ones(values.shape, dtype=bool) if self.valid is None \
            else np.array(self.valid, dtype=bool)
        if valid.shape != values.shape:
            raise ValueError("the validity flags do not match the EDM")
        np.fill_diagonal(valid, True)
        if np.any(np.diag(values) != 0):
            raise ValueError("the diagonal of an EDM must be zero")
        if np.any(values[valid] < 0) or not np.all(np.isfinite(
                values[valid])):
            raise ValueError("valid EDM entries must be finite and >= 0")
        valid.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def complete(self) -> bool:
        """True if no entry has been discarded."""
        return bool(self.valid.all())

    def invalidate(self, mask: np.ndarray) -> "Edm":
        """Returns a copy where the entries selected by ``mask`` are
        invalid; flags only ever go from valid to invalid."""
        return Edm(self.values, self.valid & ~np.asarray(mask, dtype=bool))

    def subset(self, index: np.ndarray) -> "Edm":
        """Returns the EDM restricted to the candidates in ``index``."""
        index = np.asarray(index, dtype="int64")
        return Edm(self.values[np.ix_(index, index)],
                   self.valid[np.ix_(index, index)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Edm):
            return NotImplemented
        return bool(
            np.array_equal(self.values, other.values)
            and np.array_equal(self.valid, other.valid))

    __hash__ = None  # type: ignore


@dataclasses.dataclass(frozen=True, eq=False)
class CoordinateSet:
    """2-D embedding of the surviving candidates.

    Args:
        points (numpy.ndarray): (n, 2) coordinates.
        error (numpy.ndarray): Local relative error of each candidate.
        index (numpy.ndarray): Position of each candidate in the original
            candidate list.
    """
    points: np.ndarray
    error: np.ndarray
    index: np.ndarray

    def __post_init__(self):
        points = _frozen(self.points, "float64").reshape(-1, 2)
        error = _frozen(self.error, "float64")
        index = _frozen(self.index, "int64")
        if not np.all(np.isfinite(points)):
            raise ValueError("coordinates must be finite")
        if np.any(error < 0):
            raise ValueError("local errors must be non-negative")
        if not points.shape[0] == error.size == index.size:
            raise ValueError("inconsistent coordinate set")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "error", error)
        object.__setattr__(self, "index", index)

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclasses.dataclass(frozen=True)
class LeakageParams:
    """Setting of the seesaw leakage analysis.

    Args:
        m_good (int): Number of good nodes M.
        sigma2 (float): Variance of the coordinates σ² (m²).
        varsigma2 (float): Attack strength ς² (m²).
        dim (int): Dimension L of the deployment.
    """
    m_good: int
    sigma2: float
    varsigma2: float
    dim: int = 2

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("the dimension must be at least 2")
        if self.m_good < self.dim + 1:
            raise ValueError("m_good must be greater than dim")
        if self.sigma2 <= 0 or self.varsigma2 < 0:
            raise ValueError("variances must be positive")


class Embedding(NamedTuple):
    """Coordinates realized from a Gram matrix."""
    #: (n, dim) coordinates.
    points: np.ndarray
    #: Eigenvalues of the Gram matrix in decreasing order.
    eigenvalues: np.ndarray
    #: False when the Gram matrix has a significant negative eigenvalue,
    #: i.e. the distances violate the triangle inequality.
    embeddable: bool


class LeakageEstimate(NamedTuple):
    """Monte-Carlo estimates of the leaked power and their standard
    errors."""
    gram_schmidt: float
    eigen: float
    gram_schmidt_se: float
    eigen_se: float


def _tolerance(eigenvalues: np.ndarray) -> np.ndarray:
    return EIGEN_TOLERANCE * np.abs(eigenvalues).sum(axis=-1, keepdims=True)


def edm_from_coords(points: np.ndarray) -> Edm:
    """Squared distance matrix of a point set.

    Args:
        points (numpy.ndarray): (n, dim) coordinates.

    Returns:
        Edm: The complete EDM.
    """
    points = np.asarray(points, dtype="float64")
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    values = scipy.spatial.distance.cdist(points, points, "sqeuclidean")
    np.fill_diagonal(values, 0)
    return Edm(values)


def gram_from_edm(edm: Edm, anchor: Optional[int] = 0) -> np.ndarray:
    """Gram matrix of the points translated so that ``anchor`` is at the
    origin.

    Args:
        edm (Edm): Complete EDM.
        anchor (int, optional): Index of the point placed at the origin;
            None places the centroid there (double centering).

    Returns:
        numpy.ndarray: The symmetric Gram matrix; its anchor row and column
        are zero, or its rows sum to zero without anchor.

    Raises:
        IncompleteMatrixError: If the EDM holds invalid entries.
    """
    if not edm.complete:
        raise IncompleteMatrixError(
            "the Gram matrix needs an EDM without invalid entries")
    values = edm.values
    if anchor is None:
        centered = values - values.mean(axis=0, keepdims=True)
        centered -= centered.mean(axis=1, keepdims=True)
        gram = -0.5 * centered
        return 0.5 * (gram + gram.T)
    beta = values[anchor, :]
    gram = -0.5 * (values - beta[np.newaxis, :] - beta[:, np.newaxis])
    gram = 0.5 * (gram + gram.T)
    gram[anchor, :] = 0
    gram[:, anchor] = 0
    return gram


def tampered_gram(points: np.ndarray, error: np.ndarray) -> np.ndarray:
    """Gram matrix seen when node 0, at the origin, forges its squared
    distances by ``error``: X X^T + (1 e^T + e 1^T) / 2.

    Args:
        points (numpy.ndarray): (M, dim) coordinates relative to node 0.
        error (numpy.ndarray): Squared-distance forgery of each entry.
    """
    points = np.asarray(points, dtype="float64")
    error = np.broadcast_to(np.asarray(error, dtype="float64"),
                            (points.shape[0], ))
    ones = np.ones_like(error)
    return points @ points.T + 0.5 * (np.outer(ones, error) +
                                      np.outer(error, ones))


def low_rank_leakage(gram: np.ndarray, r: int) -> float:
    """Power left out by the best rank ``r`` approximation of a Gram
    matrix.

    Args:
        gram (numpy.ndarray): Symmetric matrix.
        r (int): Target rank.

    Returns:
        float: Sum of the magnitudes of the eigenvalues beyond the ``r``
        largest ones; eigenvalues under 1e-9 times the total power count as
        zero.
    """
    if r < 0:
        raise ValueError("the target rank must be non-negative")
    eigenvalues = scipy.linalg.eigh(np.asarray(gram, dtype="float64"),
                                    eigvals_only=True)[::-1]
    return float(_tail_power(eigenvalues[np.newaxis, :], r)[0])


def _tail_power(eigenvalues: np.ndarray, r: int) -> np.ndarray:
    """Leakage of a batch of spectra sorted in decreasing order."""
    tail = np.abs(eigenvalues[:, r:])
    tail = np.where(tail > _tolerance(eigenvalues), tail, 0.0)
    return tail.sum(axis=1)


def seesaw_leakage_theory(params: LeakageParams) -> float:
    """Leakage of an optimal forgery: min{(M-L+1)σ², (M-L)ς²}."""
    m_good, dim = params.m_good, params.dim
    return float(
        min((m_good - dim + 1) * params.sigma2,
            (m_good - dim) * params.varsigma2))


def _gram_schmidt_powers(points: np.ndarray, strength: float) -> np.ndarray:
    """Squared norms of the Gram-Schmidt basis of the coordinate columns
    followed by the concentrated forgery √(ς²M)·e1, for each trial."""
    trials, m_good, dim = points.shape
    forgery = np.zeros((trials, m_good))
    forgery[:, 0] = np.sqrt(strength * m_good)
    vectors = np.concatenate([points, forgery[:, :, np.newaxis]], axis=2)

    powers = np.empty((trials, dim + 1))
    basis = []
    for k in range(dim + 1):
        item = vectors[:, :, k].copy()
        for unit in basis:
            item -= np.sum(item * unit, axis=1, keepdims=True) * unit
        powers[:, k] = np.sum(item * item, axis=1)
        norm = np.sqrt(powers[:, k])[:, np.newaxis]
        basis.append(np.divide(item, norm, out=np.zeros_like(item),
                               where=norm > 0))
    return powers


def _standard_error(samples: np.ndarray) -> float:
    if samples.size < 2:
        return 0.0
    return float(samples.std(ddof=1) / np.sqrt(samples.size))


def seesaw_leakage_mc(params: LeakageParams, trials: int,
                      rng: np.random.Generator) -> LeakageEstimate:
    """Monte-Carlo estimate of the leakage of an optimal forgery.

    Coordinates are i.i.d. Gaussian(0, σ²) per axis. The Gram-Schmidt
    estimate is the smallest empirical mean of the squared norms of the
    orthogonal basis built on the coordinate columns and the concentrated
    forgery; the eigen estimate is the mean rank-L leakage of
    X X^T + ς² 1 1^T. Trials are drawn as one block from ``rng`` and
    reduced in trial order.

    Args:
        params (LeakageParams): Setting.
        trials (int): Number of trials.
        rng (numpy.random.Generator): Random stream.

    Returns:
        LeakageEstimate: Both estimates and their standard errors.
    """
    if trials < 1:
        raise ValueError("at least one trial is required")
    m_good, dim = params.m_good, params.dim
    points = rng.normal(0.0,
                        np.sqrt(params.sigma2),
                        size=(trials, m_good, dim))

    powers = _gram_schmidt_powers(points, params.varsigma2)
    means = powers.mean(axis=0)
    best = int(np.argmin(means))

    leakage = np.empty(trials)
    shift = params.varsigma2 * np.ones((m_good, m_good))
    for start in range(0, trials, BATCH_SIZE):
        block = points[start:start + BATCH_SIZE]
        grams = block @ block.transpose(0, 2, 1) + shift
        eigenvalues = np.linalg.eigvalsh(grams)[:, ::-1]
        leakage[start:start + BATCH_SIZE] = _tail_power(eigenvalues, dim)

    LOGGER.debug("seesaw leakage over %d trials: basis powers %s", trials,
                 means)
    return LeakageEstimate(gram_schmidt=float(means[best]),
                           eigen=float(leakage.mean()),
                           gram_schmidt_se=_standard_error(powers[:, best]),
                           eigen_se=_standard_error(leakage))


def classical_mds(gram: np.ndarray, dim: int = 2) -> Embedding:
    """Coordinates whose Gram matrix best matches ``gram``.

    Args:
        gram (numpy.ndarray): Symmetric matrix.
        dim (int): Dimension of the embedding.

    Returns:
        Embedding: Top ``dim`` eigenpairs as coordinates, negative
        eigenvalues being clipped to zero, and the embeddability flag.
    """
    gram = np.asarray(gram, dtype="float64")
    eigenvalues, eigenvectors = scipy.linalg.eigh(gram)
    eigenvalues = eigenvalues[::-1]
    eigenvectors = eigenvectors[:, ::-1]
    tolerance = EIGEN_TOLERANCE * float(np.abs(eigenvalues).sum())
    embeddable = bool(eigenvalues.size == 0
                      or eigenvalues[-1] >= -tolerance)
    if not embeddable:
        LOGGER.debug("Gram matrix is not positive semidefinite: %g",
                     eigenvalues[-1])

    top = min(dim, eigenvalues.size)
    points = np.zeros((gram.shape[0], dim))
    points[:, :top] = eigenvectors[:, :top] * np.sqrt(
        np.clip(eigenvalues[:top], 0, None))
    return Embedding(points, eigenvalues, embeddable)
