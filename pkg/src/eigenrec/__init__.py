"""Eigenface face recognition with PCA and normalized PCA (N-PCA)."""

from .classifier import Decision, Outcome, classify, euclidean, identify_topn
from .dataset import Dataset, Layout, Split, SplitSpec, Strategy, load_dataset, split
from .eigenspace import EigenModel, Method, MethodTag, NPCAParams, project, reconstruct, train
from .imageio import FaceVector, GrayImage, flatten, parse_pgm, serialize_pgm, unflatten
from .model_store import load, save

__version__ = "0.1.0"

__all__ = [
    "Decision", "Outcome", "classify", "euclidean", "identify_topn",
    "Dataset", "Layout", "Split", "SplitSpec", "Strategy", "load_dataset", "split",
    "EigenModel", "Method", "MethodTag", "NPCAParams", "project", "reconstruct", "train",
    "FaceVector", "GrayImage", "flatten", "parse_pgm", "serialize_pgm", "unflatten",
    "load", "save",
]
