"""Thresholded nearest-neighbour decisions in face space."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .eigenspace import EigenModel, _project_centered, prepared
from .errors import DimensionError
from .imageio import FaceVector


class Outcome(enum.Enum):
    NOT_A_FACE = "not_a_face"
    UNKNOWN_FACE = "unknown_face"
    IDENTIFIED = "identified"


@dataclass(frozen=True, eq=False)
class Decision:
    """Result of classifying one probe.

    ``epsilon`` is the pixel-space distance between the probe and its
    face-space reconstruction, ``epsilon_k`` the smallest weight-space
    distance to a training image (index ``best_index``).
    """

    outcome: Outcome
    best_label: Optional[str]
    best_index: int
    epsilon: float
    epsilon_k: float
    distances: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "best_label": self.best_label,
            "best_index": self.best_index,
            "epsilon": self.epsilon,
            "epsilon_k": self.epsilon_k,
        }


def euclidean(p, q) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DimensionError(f"length mismatch: {p.shape} vs {q.shape}")
    return float(np.sqrt(np.sum((p - q) ** 2)))


def weight_distances(model: EigenModel, omega: np.ndarray) -> np.ndarray:
    """Distance from ``omega`` to every training projection."""
    cols = model.train_weights.T
    return np.sqrt(np.sum((cols - omega) ** 2, axis=1))


def decide(epsilon: float, epsilon_k: float, theta_c: float, theta: float) -> Outcome:
    if not epsilon < theta_c:
        return Outcome.NOT_A_FACE
    if epsilon_k < theta:
        return Outcome.IDENTIFIED
    return Outcome.UNKNOWN_FACE


def classify(model: EigenModel, vec: FaceVector, keep_distances: bool = False) -> Decision:
    """Run the three-way face / unknown / identified decision on one probe.

    Ties in weight-space distance go to the lowest training index.
    """
    v = prepared(model, vec)
    centered = v - model.mean_face
    omega = _project_centered(model.eigenfaces, centered)
    recon = model.eigenfaces @ omega + model.mean_face
    epsilon = float(np.sqrt(np.sum((v - recon) ** 2)))
    dists = weight_distances(model, omega)
    best = int(np.argmin(dists))
    eps_k = float(dists[best])
    outcome = decide(epsilon, eps_k, model.theta_c, model.theta)
    return Decision(
        outcome=outcome,
        best_label=model.train_labels[best] if outcome is Outcome.IDENTIFIED else None,
        best_index=best,
        epsilon=epsilon,
        epsilon_k=eps_k,
        distances=dists if keep_distances else None,
    )


def rank_subjects(labels, distances, n: int) -> List[Tuple[str, float]]:
    """Best distance per subject, ascending, truncated to ``n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    order = np.argsort(distances, kind="stable")
    seen = set()
    ranked = []
    for i in order:
        lab = labels[i]
        if lab in seen:
            continue
        seen.add(lab)
        ranked.append((lab, float(distances[i])))
        if len(ranked) == n:
            break
    return ranked


def identify_topn(model: EigenModel, vec: FaceVector, n: int) -> List[Tuple[str, float]]:
    d = classify(model, vec, keep_distances=True)
    return rank_subjects(model.train_labels, d.distances, n)
