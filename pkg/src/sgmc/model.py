"""Problem data and structural matrices for the sGMC sparse least-squares model.

The model couples a primal vector x and a dual vector z of equal length n
through a saddle-point objective.  Everything downstream works on the stacked
extended vector w = [x; z] of length 2n, the stacked observation b = [y; r] of
length 2m, and the structural matrices

    C = blkdiag(A, sqrt(rho) * A)            (2m x 2n)
    D = [[(1 - rho) I,  sqrt(rho) I],
         [-sqrt(rho) I,  I]]                 (2m x 2m)

Index convention (0-based): entries 0..n-1 of w are primal, n..2n-1 are dual,
matching the column order of C.  This convention is recorded in every
serialized artifact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

INDEX_CONVENTION = "0-based; 0..n-1 primal, n..2n-1 dual"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ProblemInstance:
    """One sGMC problem: sensing matrix A, convexity parameter rho in [0, 1),
    observation y, auxiliary observation r (defaults to zero) and lambda > 0.

    Instances are immutable; `with_params` derives a sibling instance sharing
    (A, rho) but carrying a different (b, lambda).
    """

    A: np.ndarray
    rho: float
    y: np.ndarray
    lam: float
    r: np.ndarray | None = None

    def __post_init__(self):
        A = _readonly(np.atleast_2d(self.A))
        y = _readonly(np.ravel(self.y))
        r = np.zeros(A.shape[0]) if self.r is None else np.ravel(self.r)
        r = _readonly(r)
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if y.shape != (A.shape[0],):
            raise ValueError(f"y has shape {y.shape}, expected ({A.shape[0]},)")
        if r.shape != (A.shape[0],):
            raise ValueError(f"r has shape {r.shape}, expected ({A.shape[0]},)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "_b", _readonly(np.concatenate([y, r])))
        object.__setattr__(self, "_matrices", None)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def b(self) -> np.ndarray:
        """Stacked observation [y; r], kept consistent with y and r."""
        return self._b

    @property
    def matrices(self) -> "ModelMatrices":
        # Cached; instances are immutable so one build is enough.
        if self._matrices is None:
            object.__setattr__(self, "_matrices", build_model_matrices(self))
        return self._matrices

    def with_params(self, b: np.ndarray | None = None, lam: float | None = None) -> "ProblemInstance":
        """Same (A, rho), new stacked observation and/or lambda."""
        if b is None:
            y, r = self.y, self.r
        else:
            b = np.ravel(b)
            if b.shape != (2 * self.m,):
                raise ValueError(f"b has shape {b.shape}, expected ({2 * self.m},)")
            y, r = b[: self.m], b[self.m :]
        return ProblemInstance(A=self.A, rho=self.rho, y=y, r=r, lam=self.lam if lam is None else lam)

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "rho": self.rho,
            "y": self.y.tolist(),
            "r": self.r.tolist(),
            "lambda": self.lam,
        }


@dataclass(frozen=True)
class ModelMatrices:
    """The pair (C, D); column i of C is reachable through `column`."""

    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", _readonly(self.C))
        object.__setattr__(self, "D", _readonly(self.D))

    def column(self, i: int) -> np.ndarray:
        return self.C[:, i]


def build_model_matrices(inst: ProblemInstance) -> ModelMatrices:
    """Assemble C = blkdiag(A, sqrt(rho) A) and the 2x2 block matrix D.

    Pure function of the instance; at rho = 0, D is the identity.
    """
    m, n = inst.m, inst.n
    sq = np.sqrt(inst.rho)
    C = np.zeros((2 * m, 2 * n))
    C[:m, :n] = inst.A
    C[m:, n:] = sq * inst.A
    eye = np.eye(m)
    D = np.block([[(1.0 - inst.rho) * eye, sq * eye], [-sq * eye, eye]])
    return ModelMatrices(C=C, D=D)


def slice_columns(C: np.ndarray, indices: Iterable[int]) -> np.ndarray:
    """Columns of C at the given sorted indices; the empty set yields one
    zero column so downstream products are well defined and vanish."""
    idx = list(indices)
    if len(idx) == 0:
        return np.zeros((C.shape[0], 1))
    if any(not 0 <= i < C.shape[1] for i in idx):
        raise IndexError(f"column index out of range for matrix with {C.shape[1]} columns: {idx}")
    if any(idx[k] >= idx[k + 1] for k in range(len(idx) - 1)):
        raise ValueError("column indices must be strictly ascending")
    return C[:, idx]


def saddle_objective(inst: ProblemInstance, x: np.ndarray, z: np.ndarray) -> float:
    """Saddle objective G(x, z): least-squares fit plus l1 terms, the
    nonconvex coupling -(rho/2)||A x - A z||^2 and the auxiliary
    sqrt(rho) r^T A z term."""
    x = np.ravel(x)
    z = np.ravel(z)
    if x.shape != (inst.n,) or z.shape != (inst.n,):
        raise ValueError("x and z must both have length n")
    Ax = inst.A @ x
    Az = inst.A @ z
    return float(
        0.5 * np.dot(inst.y - Ax, inst.y - Ax)
        + inst.lam * np.abs(x).sum()
        - inst.lam * np.abs(z).sum()
        - 0.5 * inst.rho * np.dot(Ax - Az, Ax - Az)
        + np.sqrt(inst.rho) * np.dot(inst.r, Az)
    )


# -- extended vectors -------------------------------------------------------

def split_extended(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split w = [x; z] into its primal and dual halves."""
    w = np.ravel(w)
    if w.size % 2 != 0:
        raise ValueError("extended vector must have even length")
    n = w.size // 2
    return w[:n], w[n:]


def primal_part(w: np.ndarray) -> np.ndarray:
    return split_extended(w)[0]


def dual_part(w: np.ndarray) -> np.ndarray:
    return split_extended(w)[1]


# -- indicators -------------------------------------------------------------

_SIGN_CHARS = {1: "+", -1: "-", 0: "0"}
_CHAR_SIGNS = {"+": 1, "-": -1, "0": 0}


def as_indicator(s: Sequence[int] | np.ndarray) -> np.ndarray:
    """Validate and normalize a sign vector with entries in {-1, 0, +1}."""
    arr = np.asarray(s, dtype=int)
    if arr.ndim != 1:
        raise ValueError("indicator must be one-dimensional")
    if not np.all(np.isin(arr, (-1, 0, 1))):
        raise ValueError("indicator entries must lie in {-1, 0, +1}")
    return arr


def support(s: np.ndarray) -> np.ndarray:
    """Sorted indices of the nonzero entries."""
    return np.flatnonzero(as_indicator(s))


def indicator_to_string(s: np.ndarray) -> str:
    """2n characters over {+,-,0}, primal block then dual block."""
    return "".join(_SIGN_CHARS[int(v)] for v in as_indicator(s))


def indicator_from_string(text: str) -> np.ndarray:
    try:
        return np.array([_CHAR_SIGNS[c] for c in text], dtype=int)
    except KeyError as exc:
        raise ValueError(f"invalid indicator character {exc} in {text!r}") from None


def zero_indicator(n: int) -> np.ndarray:
    """The all-zero indicator of length 2n."""
    return np.zeros(2 * n, dtype=int)


# -- instance files ---------------------------------------------------------

def instance_from_dict(data: dict) -> ProblemInstance:
    missing = {"A", "rho", "y", "lambda"} - set(data)
    if missing:
        raise ValueError(f"instance file missing keys: {sorted(missing)}")
    return ProblemInstance(
        A=np.array(data["A"], dtype=float),
        rho=float(data["rho"]),
        y=np.array(data["y"], dtype=float),
        r=None if data.get("r") is None else np.array(data["r"], dtype=float),
        lam=float(data["lambda"]),
    )


def load_instance(path: str) -> ProblemInstance:
    """Read a JSON instance file {"A": [[...]], "rho": x, "y": [...],
    "r": optional [...], "lambda": x}."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("instance file must contain a JSON object")
    return instance_from_dict(data)


def load_matrix_csv(path: str) -> np.ndarray:
    """Read a sensing matrix from CSV (one row per line)."""
    A = np.loadtxt(path, delimiter=",", ndmin=2)
    return np.asarray(A, dtype=float)
