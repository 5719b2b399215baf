"""Normalized dictionaries over a GridSpace.

Builders: real d-variate trigonometric products, tensorized Haar, random
gaussian columns, and user-supplied matrices.  Every element is renormalized
to unit norm in the ambient L_p.  Element order is deterministic so traces
and tie-breaking are reproducible:

* trigonometric: per axis (frequency ascending, constant < cos < sin),
  tensorized lexicographically with the first axis most significant;
* Haar: constant (indexed by [0,1]) first, then (level, position), tensor
  lexicographic.

Dictionaries are dense column matrices; desk scale keeps n in the thousands.
"""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, DomainError, StructuralError
from .space import GridSpace, norm

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Dictionary:
    """Ordered system of unit-norm elements over a space.

    elements is an (n, N) array, one column per element.  labels are unique
    human-readable names (frequency products, dyadic intervals, ...).
    """

    space: GridSpace
    elements: np.ndarray = field(repr=False)
    labels: tuple
    kind: str
    params: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        arr = np.asarray(self.elements, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != self.space.dim:
            raise StructuralError(
                f"elements must be (n, N) with n = {self.space.dim}, got {arr.shape}"
            )
        if len(self.labels) != arr.shape[1]:
            raise StructuralError("one label per element required")
        if len(set(self.labels)) != len(self.labels):
            raise StructuralError("labels must be unique")
        for j in range(arr.shape[1]):
            nj = norm(self.space, arr[:, j])
            if abs(nj - 1.0) > _UNIT_TOL:
                raise StructuralError(f"element {j} has norm {nj!r}, expected 1")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "elements", arr)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def count(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[1]

    def element(self, i: int) -> np.ndarray:
        if not 0 <= i < self.count:
            raise StructuralError(f"element index {i} out of range [0, {self.count})")
        return self.elements[:, i].copy()


@dataclass(frozen=True)
class SparseRepresentation:
    """f = sum_{i in T} x_i g_i.  Zero coefficients are not stored."""

    coefficients: dict

    def __post_init__(self):
        clean = {int(i): float(x) for i, x in self.coefficients.items() if x != 0.0}
        object.__setattr__(self, "coefficients", clean)

    @property
    def support(self) -> frozenset:
        return frozenset(self.coefficients)

    @property
    def sparsity(self) -> int:
        return len(self.coefficients)


def synthesize(dictionary: Dictionary, rep: SparseRepresentation) -> np.ndarray:
    """Exact linear combination sum x_i g_i."""
    out = np.zeros(dictionary.space.dim)
    for i, x in rep.coefficients.items():
        if not 0 <= i < dictionary.count:
            raise StructuralError(f"support index {i} out of range [0, {dictionary.count})")
        out += x * dictionary.elements[:, i]
    return out


def _tensor_grid_side(space: GridSpace, d: int) -> int:
    if d < 1:
        raise ConfigurationError(f"dimension d must be >= 1, got {d}")
    side = round(space.dim ** (1.0 / d))
    # guard against float rounding on the d-th root
    for s in (side - 1, side, side + 1):
        if s >= 1 and s**d == space.dim:
            side = s
            break
    else:
        raise ConfigurationError(f"space dim {space.dim} is not a d={d} tensor grid")
    if not np.allclose(space.weights, 1.0 / space.dim, rtol=1e-12, atol=0):
        raise ConfigurationError("builders require a uniform tensor grid (weights 1/n)")
    return side


def _normalize_columns(space: GridSpace, cols: np.ndarray) -> np.ndarray:
    out = np.array(cols, dtype=float)
    for j in range(out.shape[1]):
        nj = norm(space, out[:, j])
        if nj == 0.0:
            raise DomainError(f"cannot normalize zero element {j}")
        out[:, j] /= nj
    return out


def build_trigonometric(space: GridSpace, d: int, max_freq: int) -> Dictionary:
    """Products of univariate {1, cos 2pi kx, sin 2pi kx}, k <= max_freq.

    Requires per-axis grid size > 2*max_freq so that the discrete pairing is
    exact for products of basis pairs; at p=2 the result is orthonormal.
    """
    if max_freq < 0:
        raise ConfigurationError(f"max_freq must be >= 0, got {max_freq}")
    side = _tensor_grid_side(space, d)
    if side <= 2 * max_freq:
        raise ConfigurationError(
            f"grid too coarse: per-axis size {side} must exceed 2*max_freq = {2 * max_freq}"
        )
    x = np.arange(side) / side
    univ, univ_labels = [np.ones(side)], ["1"]
    for k in range(1, max_freq + 1):
        univ.append(np.cos(2.0 * np.pi * k * x))
        univ_labels.append(f"cos{k}")
        univ.append(np.sin(2.0 * np.pi * k * x))
        univ_labels.append(f"sin{k}")
    cols, labels = [], []
    for combo in itertools.product(range(len(univ)), repeat=d):
        g = np.ones(1)
        for axis in combo:
            g = np.kron(g, univ[axis])
        cols.append(g)
        labels.append("*".join(univ_labels[axis] for axis in combo))
    mat = _normalize_columns(space, np.column_stack(cols))
    return Dictionary(
        space=space,
        elements=mat,
        labels=tuple(labels),
        kind="trigonometric",
        params={"d": d, "max_freq": max_freq},
    )


def _dyadic_label(j: int, k: int) -> str:
    a, b = Fraction(k, 2**j), Fraction(k + 1, 2**j)
    return f"[{a},{b})"


def build_haar(space: GridSpace, d: int, levels: int) -> Dictionary:
    """L_p-normalized tensorized Haar system; (2^levels)^d elements.

    The constant function is indexed by [0,1]; the Haar function on a dyadic
    interval I is +/- on the two halves of I, renormalized in L_p.
    """
    if levels < 1:
        raise ConfigurationError(f"levels must be >= 1, got {levels}")
    side = _tensor_grid_side(space, d)
    if side != 2**levels:
        raise ConfigurationError(
            f"per-axis grid size {side} must equal 2^levels = {2 ** levels}"
        )
    univ, univ_labels = [np.ones(side)], ["[0,1]"]
    for j in range(levels):
        block = side >> j
        half = block >> 1
        for k in range(1 << j):
            g = np.zeros(side)
            g[k * block : k * block + half] = 1.0
            g[k * block + half : (k + 1) * block] = -1.0
            univ.append(g)
            univ_labels.append(_dyadic_label(j, k))
    cols, labels = [], []
    for combo in itertools.product(range(len(univ)), repeat=d):
        g = np.ones(1)
        for axis in combo:
            g = np.kron(g, univ[axis])
        cols.append(g)
        labels.append("x".join(univ_labels[axis] for axis in combo))
    mat = _normalize_columns(space, np.column_stack(cols))
    return Dictionary(
        space=space,
        elements=mat,
        labels=tuple(labels),
        kind="haar",
        params={"d": d, "levels": levels},
    )


def build_gaussian(space: GridSpace, count: int, seed: int) -> Dictionary:
    """count i.i.d. standard normal columns, unit-normalized; deterministic per seed."""
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    mat = _normalize_columns(space, rng.standard_normal((space.dim, count)))
    width = max(3, len(str(count - 1)))
    labels = tuple(f"g{j:0{width}d}" for j in range(count))
    return Dictionary(
        space=space,
        elements=mat,
        labels=labels,
        kind="gaussian",
        params={"count": count, "seed": seed},
    )


def build_custom(space: GridSpace, matrix, labels=None, kind: str = "custom") -> Dictionary:
    """Wrap a user-supplied (n, N) column matrix, renormalizing each column."""
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != space.dim:
        raise StructuralError(f"matrix must be (n, N) with n = {space.dim}, got {mat.shape}")
    if labels is None:
        width = max(3, len(str(mat.shape[1] - 1)))
        labels = tuple(f"c{j:0{width}d}" for j in range(mat.shape[1]))
    return Dictionary(
        space=space,
        elements=_normalize_columns(space, mat),
        labels=tuple(labels),
        kind=kind,
        params={"count": mat.shape[1]},
    )


# ---------------------------------------------------------------------------
# CSV / JSON descriptor interchange


def save_csv(dictionary: Dictionary, path) -> None:
    """One column per element, header row = labels; floats round-trip exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dictionary.labels)
        for row in dictionary.elements:
            writer.writerow([repr(float(v)) for v in row])


def load_csv(space: GridSpace, path, kind: str = "custom") -> Dictionary:
    """Read a dictionary written by save_csv (or any conforming CSV)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            labels = next(reader)
        except StopIteration:
            raise ConfigurationError(f"empty dictionary CSV: {path}") from None
        rows = [[float(v) for v in row] for row in reader if row]
    mat = np.asarray(rows, dtype=float)
    if mat.ndim != 2 or mat.shape[1] != len(labels):
        raise ConfigurationError(f"malformed dictionary CSV: {path}")
    return build_custom(space, mat, labels=tuple(labels), kind=kind)


def save_descriptor(dictionary: Dictionary, path, csv_filename=None) -> None:
    """JSON descriptor {kind, params, seed} for rebuilding the dictionary."""
    desc = {
        "kind": dictionary.kind,
        "params": {k: v for k, v in dictionary.params.items() if k != "seed"},
        "seed": dictionary.params.get("seed"),
        "space": {"dim": dictionary.space.dim, "p": dictionary.space.p},
    }
    if csv_filename is not None:
        desc["csv"] = str(csv_filename)
    with open(path, "w") as fh:
        json.dump(desc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def build_from_descriptor(desc: dict, space: GridSpace = None, base_dir=None) -> Dictionary:
    """Rebuild a dictionary from a descriptor dict (as saved by save_descriptor)."""
    import os

    if space is None:
        sp = desc.get("space")
        if sp is None:
            raise ConfigurationError("descriptor carries no space and none was given")
        space = GridSpace.uniform(int(sp["dim"]), float(sp["p"]))
    kind = desc.get("kind")
    params = desc.get("params", {})
    if kind == "trigonometric":
        return build_trigonometric(space, int(params["d"]), int(params["max_freq"]))
    if kind == "haar":
        return build_haar(space, int(params["d"]), int(params["levels"]))
    if kind == "gaussian":
        return build_gaussian(space, int(params["count"]), int(desc.get("seed", 0)))
    if kind == "custom":
        csv_path = desc.get("csv")
        if csv_path is None:
            raise ConfigurationError("custom descriptor must name its CSV file")
        if base_dir is not None:
            csv_path = os.path.join(base_dir, csv_path)
        return load_csv(space, csv_path)
    raise ConfigurationError(f"unknown dictionary kind {kind!r}")


def load_descriptor(path, space: GridSpace = None) -> Dictionary:
    import os

    with open(path) as fh:
        desc = json.load(fh)
    return build_from_descriptor(desc, space=space, base_dir=os.path.dirname(str(path)))
