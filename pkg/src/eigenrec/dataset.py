"""Subject-labeled face collections on disk and deterministic splits.

Two directory layouts are understood:

* ``ORL``: subject directories ``s1`` .. ``sN``, each holding ``1.pgm`` ..
  ``K.pgm`` (the AT&T/Olivetti distribution).
* ``FLAT``: any tree with one directory per subject containing ``.pgm``
  files.

Subjects and images are ordered naturally ("s2" before "s10") so loading
never depends on directory listing order.
"""

from __future__ import annotations

import enum
import hashlib
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from .errors import DatasetError, PGMError
from .imageio import FaceVector, load_face

_ORL_SUBJECT = re.compile(r"s\d+")
_ORL_IMAGE = re.compile(r"\d+\.pgm")


class Layout(enum.Enum):
    ORL = "orl"
    FLAT = "flat"


class Strategy(enum.Enum):
    FIRST_K = "firstk"
    SEEDED_SHUFFLE = "shuffle"


def natural_key(text: str):
    return [(0, int(tok), "") if tok.isdigit() else (1, 0, tok)
            for tok in re.split(r"(\d+)", text) if tok]


@dataclass(frozen=True)
class Subject:
    id: str
    images: Tuple[FaceVector, ...]


@dataclass(frozen=True)
class Dataset:
    name: str
    subjects: Tuple[Subject, ...]
    dims: Tuple[int, int]

    @property
    def n_images(self) -> int:
        return sum(len(s.images) for s in self.subjects)


@dataclass(frozen=True)
class SplitSpec:
    """Per-subject train/test split; ``train_fraction`` is kept exact."""

    train_fraction: Fraction
    seed: int = 0
    strategy: Strategy = Strategy.FIRST_K

    def __init__(self, train_fraction, seed: int = 0, strategy=Strategy.FIRST_K):
        frac = _as_fraction(train_fraction)
        if not 0 < frac < 1:
            raise ValueError("train fraction must leave a test set (0 < fraction < 1)")
        if seed < 0 or seed >= 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "train_fraction", frac)
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "strategy", Strategy(strategy))

    def train_count(self, n_images: int) -> int:
        # round half up, exact in rationals
        k = int((self.train_fraction * n_images + Fraction(1, 2)) // 1)
        if not 1 <= k < n_images:
            raise ValueError(
                f"train fraction {float(self.train_fraction)} gives {k} of {n_images} "
                "images per subject; need at least one train and one test image"
            )
        return k


@dataclass(frozen=True)
class Split:
    train: Tuple[Tuple[FaceVector, str], ...]
    test: Tuple[Tuple[FaceVector, str], ...]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # decimal reading: 0.6 means 3/5, not its binary neighbour
        return Fraction(repr(x))
    return Fraction(x)


def _subject_dirs(root: Path, layout: Layout) -> List[Path]:
    dirs = [p for p in root.iterdir() if p.is_dir()]
    if layout is Layout.ORL:
        dirs = [p for p in dirs if _ORL_SUBJECT.fullmatch(p.name)]
    return sorted(dirs, key=lambda p: natural_key(p.name))


def _image_files(subject_dir: Path, layout: Layout) -> List[Path]:
    files = [p for p in subject_dir.iterdir() if p.is_file()]
    if layout is Layout.ORL:
        files = [p for p in files if _ORL_IMAGE.fullmatch(p.name)]
    else:
        files = [p for p in files if p.suffix.lower() == ".pgm"]
    return sorted(files, key=lambda p: natural_key(p.name))


def load_dataset(root, layout: Union[Layout, str] = Layout.FLAT, name=None,
                 workers: int = 4) -> Dataset:
    """Read every subject directory under ``root``.

    Raises:
        DatasetError: missing root, no subjects, an empty subject
            directory, an unreadable image, or mixed image dimensions.
    """
    root = Path(root)
    layout = Layout(layout)
    if not root.is_dir():
        raise DatasetError(f"dataset directory not found: {root}")
    subject_dirs = _subject_dirs(root, layout)
    if not subject_dirs:
        raise DatasetError(f"no subject directories under {root}")

    listing = []
    for sd in subject_dirs:
        files = _image_files(sd, layout)
        if not files:
            raise DatasetError(f"empty subject directory: {sd}")
        listing.append((sd.name, files))

    paths = [f for _, files in listing for f in files]
    try:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            faces = list(pool.map(load_face, paths))
    except PGMError as exc:
        raise DatasetError(f"unreadable image: {exc}") from exc

    dims = faces[0].source_dims
    for face in faces:
        if face.source_dims != dims:
            raise DatasetError(
                f"mixed image dimensions: {face.source} is "
                f"{face.source_dims[0]}x{face.source_dims[1]}, expected {dims[0]}x{dims[1]}"
            )

    subjects = []
    it = iter(faces)
    for sid, files in listing:
        subjects.append(Subject(sid, tuple(next(it) for _ in files)))
    return Dataset(name or root.name, tuple(subjects), dims)


def _subject_key(subject_id: str) -> int:
    return int.from_bytes(hashlib.sha256(subject_id.encode("utf-8")).digest()[:8], "little")


def _order(subject: Subject, spec: SplitSpec) -> List[int]:
    n = len(subject.images)
    if spec.strategy is Strategy.FIRST_K:
        return list(range(n))
    seq = np.random.SeedSequence(spec.seed, spawn_key=(_subject_key(subject.id),))
    return [int(i) for i in np.random.default_rng(seq).permutation(n)]


def split(ds: Dataset, spec: SplitSpec) -> Split:
    """Per-subject split: the first ``k`` images (after optional shuffle) train.

    ``k`` is ``round_half_up(train_fraction * n)`` for a subject holding
    ``n`` images.
    """
    train, test = [], []
    for subject in ds.subjects:
        k = spec.train_count(len(subject.images))
        order = _order(subject, spec)
        train.extend((subject.images[i], subject.id) for i in order[:k])
        test.extend((subject.images[i], subject.id) for i in order[k:])
    return Split(tuple(train), tuple(test))
