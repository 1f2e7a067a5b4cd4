"""Eigenface training, projection and reconstruction.

Two training methods are supported:

* PCA: raw face vectors, eigenfaces from lifted Gram eigenvectors.
* N-PCA: every image is first affinely normalized to a target mean and
  standard deviation (train and probe alike), and the eigenfaces are the
  left singular vectors of the centered data matrix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .errors import DimensionError, TrainingError
from .imageio import FaceVector

DEFAULT_UM = 100.0
DEFAULT_USTD = 80.0
ORTHONORMAL_TOL = 1e-9


class MethodTag(enum.Enum):
    PCA = "pca"
    NPCA = "npca"


@dataclass(frozen=True)
class NPCAParams:
    um: float = DEFAULT_UM
    ustd: float = DEFAULT_USTD
    literal_eq13: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.um) and math.isfinite(self.ustd)):
            raise ValueError("N-PCA targets must be finite")
        if self.ustd <= 0:
            raise ValueError(f"ustd must be positive, got {self.ustd}")


@dataclass(frozen=True)
class Method:
    tag: MethodTag
    npca: Optional[NPCAParams] = None

    def __post_init__(self):
        if (self.tag is MethodTag.NPCA) != (self.npca is not None):
            raise ValueError("N-PCA parameters are required for, and only for, N-PCA")

    @classmethod
    def pca(cls) -> "Method":
        return cls(MethodTag.PCA)

    @classmethod
    def npca_method(cls, um=DEFAULT_UM, ustd=DEFAULT_USTD, literal_eq13=False) -> "Method":
        return cls(MethodTag.NPCA, NPCAParams(float(um), float(ustd), bool(literal_eq13)))

    @classmethod
    def from_name(cls, name: str, **npca_kwargs) -> "Method":
        name = name.strip().lower().replace("-", "")
        if name == "pca":
            return cls.pca()
        if name == "npca":
            return cls.npca_method(**npca_kwargs)
        raise ValueError(f"unknown method {name!r} (expected pca or npca)")

    @property
    def name(self) -> str:
        return "PCA" if self.tag is MethodTag.PCA else "N-PCA"


@dataclass(frozen=True, eq=False)
class EigenModel:
    """A trained face space.

    ``eigenfaces`` is D x k with orthonormal columns, ``train_weights`` is
    k x M with column j the projection of training image j.
    """

    method: Method
    dims: Tuple[int, int]
    mean_face: np.ndarray
    eigenvalues: np.ndarray
    eigenfaces: np.ndarray
    train_weights: np.ndarray
    train_labels: Tuple[str, ...]
    theta_c: float
    theta: float

    def __post_init__(self):
        for name in ("mean_face", "eigenvalues", "eigenfaces", "train_weights"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "train_labels", tuple(self.train_labels))
        object.__setattr__(self, "dims", (int(self.dims[0]), int(self.dims[1])))
        object.__setattr__(self, "theta_c", float(self.theta_c))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def n_pixels(self) -> int:
        return self.mean_face.size

    @property
    def n_components(self) -> int:
        return self.eigenvalues.size

    @property
    def n_train(self) -> int:
        return len(self.train_labels)

    def validate(self) -> None:
        """Raise ``ValueError`` if any structural invariant is violated."""
        w, h = self.dims
        d, k, m = self.n_pixels, self.n_components, self.n_train
        if w < 1 or h < 1 or d != w * h:
            raise ValueError(f"mean face length {d} does not match dims {w}x{h}")
        if k < 1 or m < 1:
            raise ValueError("model needs at least one component and one training image")
        if self.mean_face.shape != (d,) or self.eigenvalues.shape != (k,):
            raise ValueError("mean face or eigenvalue shape mismatch")
        if self.eigenfaces.shape != (d, k):
            raise ValueError(f"eigenfaces shape {self.eigenfaces.shape} != {(d, k)}")
        if self.train_weights.shape != (k, m):
            raise ValueError(f"train weights shape {self.train_weights.shape} != {(k, m)}")
        for name in ("mean_face", "eigenvalues", "eigenfaces", "train_weights"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")
        ev = self.eigenvalues
        if np.any(ev <= 0) or np.any(ev[1:] > ev[:-1]):
            raise ValueError("eigenvalues must be positive and sorted descending")
        gram = self.eigenfaces.T @ self.eigenfaces
        if np.abs(gram - np.eye(k)).max() > ORTHONORMAL_TOL:
            raise ValueError("eigenfaces are not orthonormal")
        for name in ("theta_c", "theta"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be finite and nonnegative")


def _stack(vectors: Sequence[FaceVector]) -> np.ndarray:
    """Rows are face vectors (M x D)."""
    if len(vectors) == 0:
        raise TrainingError("no face vectors given")
    dims = vectors[0].source_dims
    for v in vectors:
        if v.source_dims != dims:
            raise DimensionError(f"dimension mismatch: {v.source_dims} vs {dims}")
    return np.stack([v.values for v in vectors])


def mean_face(vectors: Sequence[FaceVector]) -> FaceVector:
    rows = _stack(vectors)
    return FaceVector(rows.mean(axis=0), vectors[0].source_dims)


def center(vectors: Sequence[FaceVector], psi: FaceVector) -> np.ndarray:
    """Return the D x M matrix whose column j is ``vectors[j] - psi``."""
    rows = _stack(vectors)
    if vectors[0].source_dims != psi.source_dims:
        raise DimensionError("dimension mismatch between images and mean face")
    return (rows - psi.values).T


def image_stats(values, literal_eq13: bool = False) -> Tuple[float, float]:
    """Pixel mean and spread of one image.

    By default the spread is the population standard deviation. With
    ``literal_eq13`` it is the root-mean-square of the raw intensities.
    """
    v = np.asarray(getattr(values, "values", values), dtype=np.float64)
    mean = float(v.mean())
    if literal_eq13:
        spread = math.sqrt(float(np.mean(v * v)))
    else:
        spread = math.sqrt(float(np.mean((v - mean) ** 2)))
    return mean, spread


def normalize_values(v: np.ndarray, params: NPCAParams) -> np.ndarray:
    mean, spread = image_stats(v, params.literal_eq13)
    if spread == 0.0:
        return np.full_like(v, params.um)
    return (v - mean) * (params.ustd / spread) + params.um


def normalize_image(vec: FaceVector, params: NPCAParams) -> FaceVector:
    """Shift and scale one image to mean ``um`` and spread ``ustd``.

    A constant image has zero spread and maps to all ``um``.
    """
    return FaceVector(normalize_values(vec.values, params), vec.source_dims, vec.source)


def _prepare(method: Method, values: np.ndarray) -> np.ndarray:
    if method.tag is MethodTag.NPCA:
        return normalize_values(values, method.npca)
    return values


def _project_centered(eigenfaces: np.ndarray, centered: np.ndarray) -> np.ndarray:
    # one code path for training weights and probes keeps them bit-identical
    return eigenfaces.T @ np.ascontiguousarray(centered)


def _max_pairwise_distance(weights: np.ndarray) -> float:
    cols = np.ascontiguousarray(weights.T)
    best = 0.0
    for j in range(cols.shape[0] - 1):
        d = np.sqrt(np.sum((cols[j + 1:] - cols[j]) ** 2, axis=1))
        best = max(best, float(d.max()))
    return best


def train(
    samples: Sequence[Tuple[FaceVector, str]],
    method: Method,
    components: Optional[int] = None,
    theta: Optional[float] = None,
    rank_tol: float = linalg.DEFAULT_RANK_TOL,
) -> EigenModel:
    """Fit a face space to labeled training images.

    Keeps every eigenpair above ``rank_tol * lam_max`` (at most M - 1,
    the rank of M centered images), or the top ``components`` of them.
    The face/unknown threshold ``theta`` defaults to ``theta_c``, half
    the largest distance between two training projections.
    """
    if len(samples) < 2:
        raise TrainingError(f"need at least 2 training images, got {len(samples)}")
    if components is not None and components < 1:
        raise TrainingError("components must be at least 1")
    vectors = [v for v, _ in samples]
    labels = [str(lab) for _, lab in samples]
    rows = _stack(vectors)
    dims = vectors[0].source_dims
    m = rows.shape[0]

    rows = np.stack([_prepare(method, r) for r in rows])
    psi = rows.mean(axis=0)
    centered = rows - psi  # M x D, row j is Phi_j
    a = centered.T

    if method.tag is MethodTag.PCA:
        pairs = linalg.lift_eigenvectors(a, linalg.sym_eig(linalg.gram(a)), rank_tol)
        eigenvalues, eigenfaces = pairs.values, pairs.vectors
    else:
        u, sigma, _ = linalg.thin_svd_via_gram(a, rank_tol)
        eigenvalues, eigenfaces = sigma ** 2, u

    keep = min(eigenvalues.size, m - 1)
    if components is not None:
        keep = min(keep, components)
    if keep == 0:
        raise TrainingError("training images are all identical; no positive eigenvalue")
    eigenvalues = eigenvalues[:keep]
    eigenfaces = np.ascontiguousarray(eigenfaces[:, :keep])

    weights = np.empty((keep, m))
    for j in range(m):
        weights[:, j] = _project_centered(eigenfaces, centered[j])
    theta_c = 0.5 * _max_pairwise_distance(weights)
    if theta is not None and not theta >= 0:
        raise TrainingError("theta must be nonnegative")

    return EigenModel(
        method=method,
        dims=dims,
        mean_face=psi,
        eigenvalues=eigenvalues,
        eigenfaces=eigenfaces,
        train_weights=weights,
        train_labels=tuple(labels),
        theta_c=theta_c,
        theta=theta_c if theta is None else float(theta),
    )


def _check_dims(model: EigenModel, vec: FaceVector) -> None:
    if vec.source_dims != model.dims or vec.values.size != model.n_pixels:
        raise DimensionError(
            f"dimension mismatch: image is {vec.source_dims[0]}x{vec.source_dims[1]}, "
            f"model expects {model.dims[0]}x{model.dims[1]}"
        )


def prepared(model: EigenModel, vec: FaceVector) -> np.ndarray:
    """The vector as the model sees it: normalized for N-PCA, raw for PCA."""
    _check_dims(model, vec)
    return _prepare(model.method, vec.values)


def project(model: EigenModel, vec: FaceVector) -> np.ndarray:
    return _project_centered(model.eigenfaces, prepared(model, vec) - model.mean_face)


def reconstruct(model: EigenModel, omega) -> FaceVector:
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape != (model.n_components,):
        raise DimensionError(
            f"weight vector has shape {omega.shape}, expected ({model.n_components},)"
        )
    return FaceVector(model.eigenfaces @ omega + model.mean_face, model.dims)
