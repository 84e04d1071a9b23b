"""Finite-dimensional models of the Hilbert spaces behind the integral construction.

Every vector is stored as coordinates with respect to a fixed reference
basis, and every change of basis is an explicit orthogonal matrix, so
basis-independence claims can be tested as exact float identities rather
than approximations.

Conventions used throughout the package:

* H vectors: ``(dim_h,)`` arrays; the H norm is the Euclidean norm.
* U vectors: ``(dim_u,)`` arrays in the reference basis of U.
* ``CovarianceSpec`` holds the spectral data of the covariance operator
  on U.  Column ``j`` of ``eigenbasis`` holds the reference coordinates
  of the unit eigenvector belonging to ``eigenvalues[j]``.
* Weighted sequences (the coordinate picture of U after the spectral
  isometry): coordinate vectors ``v`` with inner product
  ``sum_j eigenvalues[j] * v[j] * w[j]``.
* Sequences of H vectors: ``(n_modes, dim_h)`` arrays, row ``j`` an H
  vector; the squared norm is the sum of squared row norms.
* Hilbert-Schmidt operators: ``(dim_h, n_modes)`` arrays whose column
  ``j`` is the image of the j-th weighted basis direction, i.e.
  ``sqrt(eigenvalues[j])`` times the unit eigenvector.  The squared
  Hilbert-Schmidt norm is then the squared Frobenius norm.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlockShapeMismatch,
    DimensionMismatch,
    MultisetMismatch,
    NonOrthogonalBasis,
    NonOrthogonalRotation,
    NonPositiveEigenvalue,
    SpecMismatch,
)
from . import rng as _rng

# construction-time validation tolerance for orthogonality defects
GRAM_TOL = 1e-10


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpaceConfig:
    """Dimensions of a finite truncation: dim(H), number of retained modes, horizon."""

    dim_h: int
    n_modes: int
    horizon: float

    def __post_init__(self):
        if self.dim_h < 1 or self.n_modes < 1:
            raise DimensionMismatch("dim_h and n_modes must be at least 1")
        if not self.horizon > 0:
            raise DimensionMismatch("horizon must be positive")


@dataclass(frozen=True)
class CovarianceSpec:
    """Spectral data of a trace-class covariance operator on U.

    ``eigenbasis`` has orthonormal columns; it is square in the typical
    case but may have more rows than columns when U is modelled with
    ambient directions that carry no variance.  Construction through
    :func:`make_covariance` validates orthonormality; building the
    dataclass directly trusts the caller (the verification harness uses
    that route to inject a deliberately broken basis).
    """

    eigenvalues: np.ndarray          # (n_modes,), strictly positive
    eigenbasis: np.ndarray           # (dim_u, n_modes), orthonormal columns
    tail_mass: float = 0.0           # declared spectral mass beyond the truncation
    sqrt_eigenvalues: np.ndarray = field(init=False, repr=False, compare=False)
    identity_basis: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lam = _freeze(self.eigenvalues)
        basis = _freeze(self.eigenbasis)
        if lam.ndim != 1 or lam.size == 0:
            raise DimensionMismatch("eigenvalues must be a nonempty vector")
        if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
            raise NonPositiveEigenvalue("eigenvalues must be finite and > 0")
        if basis.ndim != 2 or basis.shape[1] != lam.size or basis.shape[0] < lam.size:
            raise DimensionMismatch(
                f"eigenbasis shape {basis.shape} incompatible with {lam.size} modes")
        if self.tail_mass < 0:
            raise NonPositiveEigenvalue("tail_mass must be >= 0")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenbasis", basis)
        object.__setattr__(self, "sqrt_eigenvalues", _freeze(np.sqrt(lam)))
        object.__setattr__(
            self, "identity_basis",
            basis.shape[0] == basis.shape[1]
            and np.array_equal(basis, np.eye(basis.shape[0])))

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.size

    @property
    def dim_u(self) -> int:
        return self.eigenbasis.shape[0]

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues)) + self.tail_mass

    def gram_defect(self) -> float:
        g = self.eigenbasis.T @ self.eigenbasis
        return float(np.max(np.abs(g - np.eye(self.n_modes))))


def random_orthogonal(n: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix built from Householder reflections.

    Own implementation rather than a library QR so the result depends only
    on elementary float operations and is bit-stable across linear-algebra
    backends.
    """
    a = gen.standard_normal((n, n))
    q = np.eye(n)
    for k in range(n - 1):
        x = a[k:, k].copy()
        nx = np.sqrt(np.dot(x, x))
        if nx == 0.0:
            continue
        x[0] += nx if x[0] >= 0 else -nx
        w = x / np.sqrt(np.dot(x, x))
        a[k:, k:] -= 2.0 * np.outer(w, w @ a[k:, k:])
        q[:, k:] -= 2.0 * np.outer(q[:, k:] @ w, w)
    d = np.sign(np.diag(a))
    d[d == 0] = 1.0
    return q * d


def make_covariance(eigenvalues, eigenbasis="identity", tail_mass: float = 0.0
                    ) -> CovarianceSpec:
    """Validated construction of a :class:`CovarianceSpec`.

    ``eigenbasis`` may be the string ``"identity"``, an explicit matrix
    with orthonormal columns, or a mapping ``{"seed": n}`` requesting a
    uniformly random orthogonal matrix drawn from the seeded basis stream.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise DimensionMismatch("eigenvalues must be a nonempty vector")
    if isinstance(eigenbasis, str):
        if eigenbasis != "identity":
            raise DimensionMismatch(f"unknown eigenbasis directive {eigenbasis!r}")
        basis = np.eye(lam.size)
    elif isinstance(eigenbasis, dict):
        if set(eigenbasis) != {"seed"}:
            raise DimensionMismatch("eigenbasis mapping must have exactly the key 'seed'")
        basis = random_orthogonal(lam.size, _rng.stream(int(eigenbasis["seed"]),
                                                        0, 0, _rng.BASIS))
    else:
        basis = np.asarray(eigenbasis, dtype=float)
    spec = CovarianceSpec(lam, basis, tail_mass)
    defect = spec.gram_defect()
    if defect > GRAM_TOL:
        raise NonOrthogonalBasis(
            f"eigenbasis Gram defect {defect:.3e} exceeds {GRAM_TOL:.0e}")
    return spec


@dataclass(frozen=True)
class WeightedSeq:
    """Coordinates in the weighted sequence space attached to an eigenvalue list."""

    coords: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        c = _freeze(self.coords)
        w = _freeze(self.weights)
        if c.shape != w.shape or c.ndim != 1:
            raise DimensionMismatch("coords and weights must be vectors of equal length")
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "weights", w)

    def inner(self, other: "WeightedSeq") -> float:
        if not np.array_equal(self.weights, other.weights):
            raise SpecMismatch("weighted sequences carry different weights")
        return float(np.sum(self.weights * self.coords * other.coords))

    def sq_norm(self) -> float:
        return float(np.sum(self.weights * self.coords * self.coords))

    def norm(self) -> float:
        return float(np.sqrt(self.sq_norm()))


def phi_lambda_apply(spec: CovarianceSpec, u) -> WeightedSeq:
    """Coordinates of a U vector in the weighted sequence picture.

    Entry j is the eigenbasis coordinate of ``u`` divided by
    ``sqrt(eigenvalues[j])``; the map preserves norms.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (spec.dim_u,):
        raise DimensionMismatch(f"expected U vector of length {spec.dim_u}")
    if spec.identity_basis:
        coords = u / spec.sqrt_eigenvalues
    else:
        coords = (spec.eigenbasis.T @ u) / spec.sqrt_eigenvalues
    return WeightedSeq(coords, spec.eigenvalues)


def phi_lambda_invert(spec: CovarianceSpec, w: WeightedSeq) -> np.ndarray:
    """Back to U reference coordinates; inverse of :func:`phi_lambda_apply`."""
    if w.coords.size != spec.n_modes:
        raise DimensionMismatch("coordinate length does not match the mode count")
    scaled = spec.sqrt_eigenvalues * w.coords
    return scaled if spec.identity_basis else spec.eigenbasis @ scaled


def psi_lambda_apply(spec: CovarianceSpec, op: np.ndarray) -> np.ndarray:
    """Unroll a Hilbert-Schmidt operator into its sequence of column images.

    Row j of the result is the H image of the j-th weighted basis
    direction; squared norms are preserved by construction.
    """
    op = np.asarray(op, dtype=float)
    if op.ndim != 2 or op.shape[1] != spec.n_modes:
        raise DimensionMismatch(
            f"operator must have {spec.n_modes} columns, got {op.shape}")
    return op.T.copy()


def hs_norm(op: np.ndarray) -> float:
    """Hilbert-Schmidt norm: root of the sum of squared column norms."""
    op = np.asarray(op, dtype=float)
    return float(np.sqrt(np.sum(op * op)))


def seqh_norm(w: np.ndarray) -> float:
    """Norm of a sequence of H vectors: root of the sum of squared row norms."""
    w = np.asarray(w, dtype=float)
    return float(np.sqrt(np.sum(w * w)))


def restrict_bounded_operator(spec: CovarianceSpec, a: np.ndarray) -> np.ndarray:
    """Restrict a bounded operator to the variance-carrying subspace.

    ``a`` is given in eigenvector coordinates: column j holds the H image
    of the j-th unit eigenvector.  The restriction scales column j by
    ``sqrt(eigenvalues[j])``, which makes the result Hilbert-Schmidt with
    squared norm at most ``opnorm(a)**2 * sum(eigenvalues)``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] != spec.n_modes:
        raise DimensionMismatch(
            f"operator must have {spec.n_modes} columns, got {a.shape}")
    return a * spec.sqrt_eigenvalues[None, :]


@dataclass(frozen=True)
class BasisIsometry:
    """Norm-preserving map between two weighted sequence spaces.

    ``coord_map`` acts directly on plain coordinate vectors; it is an
    orthogonal matrix supported on equal-eigenvalue blocks, which makes
    the map isometric for the weighted inner products on both sides and
    keeps eigenvectors of distinct eigenvalues orthogonal.
    """

    source_eigenvalues: np.ndarray
    target_eigenvalues: np.ndarray
    coord_map: np.ndarray            # (n, n) orthogonal, block-supported
    kind: str = "composed"

    def __post_init__(self):
        object.__setattr__(self, "source_eigenvalues", _freeze(self.source_eigenvalues))
        object.__setattr__(self, "target_eigenvalues", _freeze(self.target_eigenvalues))
        object.__setattr__(self, "coord_map", _freeze(self.coord_map))

    def apply_weighted(self, w: WeightedSeq) -> WeightedSeq:
        if not np.array_equal(w.weights, self.source_eigenvalues):
            raise SpecMismatch("sequence weights do not match the isometry source")
        return WeightedSeq(self.coord_map @ w.coords, self.target_eigenvalues)

    def apply_seqh(self, w: np.ndarray) -> np.ndarray:
        """Companion map on sequences of H vectors: the same mixing, entrywise."""
        w = np.asarray(w, dtype=float)
        if w.shape[0] != self.coord_map.shape[1]:
            raise DimensionMismatch("sequence length does not match the isometry")
        return self.coord_map @ w


def build_eigen_isometry(source: CovarianceSpec, target_eigenvalues,
                         block_rotations=None) -> BasisIsometry:
    """Isometry between the weighted pictures of two eigenvalue orderings.

    ``target_eigenvalues`` must be a permutation (with multiplicity) of
    the source eigenvalues; equality of eigenvalues is exact, matching
    how repeated blocks are constructed.  ``block_rotations`` optionally
    maps an eigenvalue to an orthogonal matrix mixing the positions of
    that eigenvalue; omitted blocks use the identity, so the default is
    the pure sorting permutation.
    """
    lam = source.eigenvalues
    mu = np.asarray(target_eigenvalues, dtype=float)
    if mu.shape != lam.shape:
        raise MultisetMismatch("target eigenvalue count differs from source")
    if not np.array_equal(np.sort(lam), np.sort(mu)):
        raise MultisetMismatch(
            "target eigenvalues are not a permutation of the source eigenvalues")
    block_rotations = dict(block_rotations or {})
    n = lam.size
    cmap = np.zeros((n, n))
    for value in np.unique(lam):
        src_idx = np.flatnonzero(lam == value)
        tgt_idx = np.flatnonzero(mu == value)
        rot = block_rotations.pop(value, None)
        if rot is None:
            rot = np.eye(src_idx.size)
        rot = np.asarray(rot, dtype=float)
        if rot.shape != (tgt_idx.size, src_idx.size):
            raise BlockShapeMismatch(
                f"rotation for eigenvalue {value} has shape {rot.shape}, "
                f"block needs {(tgt_idx.size, src_idx.size)}")
        defect = float(np.max(np.abs(rot.T @ rot - np.eye(src_idx.size))))
        if defect > GRAM_TOL:
            raise NonOrthogonalRotation(
                f"rotation for eigenvalue {value} has Gram defect {defect:.3e}")
        cmap[np.ix_(tgt_idx, src_idx)] = rot
    if block_rotations:
        raise BlockShapeMismatch(
            f"rotations given for absent eigenvalues: {sorted(block_rotations)}")
    return BasisIsometry(lam, mu, cmap)


def alternate_decomposition(spec: CovarianceSpec, iso: BasisIsometry
                            ) -> CovarianceSpec:
    """Second eigendecomposition of the same covariance operator.

    The new unit eigenvectors are the block mixes of the old ones encoded
    in ``iso``; the returned spec describes the identical operator, which
    is what the well-definedness checks integrate against.
    """
    if not np.array_equal(iso.source_eigenvalues, spec.eigenvalues):
        raise SpecMismatch("isometry source does not match the covariance spec")
    basis = spec.eigenbasis @ iso.coord_map.T
    return CovarianceSpec(iso.target_eigenvalues, basis, spec.tail_mass)
