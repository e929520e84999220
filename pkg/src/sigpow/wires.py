"""Dense complex linear algebra over named tensor wires.

A LabeledOperator is a square matrix acting on an ordered list of named,
dimensioned wires.  The computational basis is fixed throughout the package:
row-major indexing with the leftmost wire most significant.  All operations
are pure and all values are immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateWire,
    NotAPermutation,
    UnknownWire,
)

__all__ = [
    "Wire",
    "LabeledOperator",
    "HermitianCheckReport",
    "identity_operator",
    "operator_from_matrix",
    "check_hermitian_psd",
]


@dataclass(frozen=True)
class Wire:
    """A named tensor factor with a fixed Hilbert-space dimension."""

    name: str
    dim: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValueError("wire name must be a non-empty string")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"wire {self.name!r}: dim must be a positive integer")
        object.__setattr__(self, "dim", int(self.dim))


def _as_names(wires: str | Iterable[str]) -> tuple[str, ...]:
    if isinstance(wires, str):
        return (wires,)
    return tuple(wires)


@dataclass(frozen=True)
class LabeledOperator:
    """Square complex matrix over an ordered tuple of wires."""

    wires: tuple[Wire, ...]
    data: np.ndarray

    def __post_init__(self):
        wires = tuple(self.wires)
        names = [w.name for w in wires]
        if len(set(names)) != len(names):
            raise DuplicateWire(f"duplicate wire names in {names}")
        data = np.asarray(self.data, dtype=np.complex128)
        side = int(np.prod([w.dim for w in wires], dtype=np.int64)) if wires else 1
        if data.shape != (side, side):
            raise DimensionMismatch(
                f"matrix shape {data.shape} does not match wire dims (side {side})"
            )
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "wires", wires)
        object.__setattr__(self, "data", data)

    # -- bookkeeping -------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(w.name for w in self.wires)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(w.dim for w in self.wires)

    def wire(self, name: str) -> Wire:
        for w in self.wires:
            if w.name == name:
                return w
        raise UnknownWire(f"no wire named {name!r} (have {self.names})")

    def axes_of(self, names: Iterable[str]) -> list[int]:
        """Positions of the given wire names within the wire tuple."""
        lookup = {w.name: i for i, w in enumerate(self.wires)}
        out = []
        for n in names:
            if n not in lookup:
                raise UnknownWire(f"no wire named {n!r} (have {self.names})")
            out.append(lookup[n])
        return out

    def _tensor_view(self) -> np.ndarray:
        k = self.dims
        return self.data.reshape(k + k)

    # -- algebra on identical wire sets -------------------------------------

    def _require_same_wires(self, other: "LabeledOperator") -> None:
        if self.wires != other.wires:
            raise DimensionMismatch(
                f"operators live on different wires: {self.names} vs {other.names}"
            )

    def __add__(self, other: "LabeledOperator") -> "LabeledOperator":
        self._require_same_wires(other)
        return LabeledOperator(self.wires, self.data + other.data)

    def __sub__(self, other: "LabeledOperator") -> "LabeledOperator":
        self._require_same_wires(other)
        return LabeledOperator(self.wires, self.data - other.data)

    def __mul__(self, scalar: complex) -> "LabeledOperator":
        return LabeledOperator(self.wires, self.data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "LabeledOperator":
        return LabeledOperator(self.wires, self.data / scalar)

    def __neg__(self) -> "LabeledOperator":
        return LabeledOperator(self.wires, -self.data)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def dagger(self) -> "LabeledOperator":
        return LabeledOperator(self.wires, self.data.conj().T)

    def hermitize(self) -> "LabeledOperator":
        return LabeledOperator(self.wires, (self.data + self.data.conj().T) / 2)

    def max_abs(self) -> float:
        return float(np.abs(self.data).max()) if self.data.size else 0.0

    def is_close(self, other: "LabeledOperator", tol: float = 1e-10) -> bool:
        self._require_same_wires(other)
        return bool(np.abs(self.data - other.data).max() <= tol)

    # -- wire operations ----------------------------------------------------

    def tensor(self, other: "LabeledOperator") -> "LabeledOperator":
        """Kronecker product; wire name sets must be disjoint."""
        overlap = set(self.names) & set(other.names)
        if overlap:
            raise DuplicateWire(f"wires {sorted(overlap)} present on both factors")
        return LabeledOperator(
            self.wires + other.wires, np.kron(self.data, other.data)
        )

    def partial_trace(self, names: str | Iterable[str]) -> "LabeledOperator":
        """Trace out the named wires; tracing everything yields a 0-wire scalar."""
        names = _as_names(names)
        axes = self.axes_of(names)
        t = self._tensor_view()
        k = len(self.wires)
        for ax in sorted(axes, reverse=True):
            t = np.trace(t, axis1=ax, axis2=ax + k)
            k -= 1
        kept = tuple(w for w in self.wires if w.name not in set(names))
        side = int(np.prod([w.dim for w in kept], dtype=np.int64)) if kept else 1
        return LabeledOperator(kept, t.reshape(side, side))

    def partial_transpose(self, names: str | Iterable[str]) -> "LabeledOperator":
        """Transpose the named wires in place; an involution per wire subset."""
        names = _as_names(names)
        axes = self.axes_of(names)
        k = len(self.wires)
        perm = list(range(2 * k))
        for ax in axes:
            perm[ax], perm[ax + k] = perm[ax + k], perm[ax]
        t = self._tensor_view().transpose(perm)
        return LabeledOperator(self.wires, t.reshape(self.dim, self.dim))

    def permute(self, order: Sequence[str]) -> "LabeledOperator":
        """Reorder the wire tuple; entries are relabelled accordingly."""
        order = tuple(order)
        if sorted(order) != sorted(self.names):
            raise NotAPermutation(
                f"{order} is not a permutation of the wire names {self.names}"
            )
        axes = self.axes_of(order)
        k = len(self.wires)
        perm = axes + [a + k for a in axes]
        t = self._tensor_view().transpose(perm)
        wires = tuple(self.wires[a] for a in axes)
        return LabeledOperator(wires, t.reshape(self.dim, self.dim))

    def rename(self, mapping: Mapping[str, str]) -> "LabeledOperator":
        """Rename wires; the data is untouched."""
        for old in mapping:
            self.wire(old)
        wires = tuple(
            Wire(mapping.get(w.name, w.name), w.dim) for w in self.wires
        )
        return LabeledOperator(wires, self.data)

    def drop_trivial_wires(self) -> "LabeledOperator":
        """Remove dimension-1 wires (no data change)."""
        kept = tuple(w for w in self.wires if w.dim > 1)
        return LabeledOperator(kept, self.data)

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "wires": [{"name": w.name, "dim": w.dim} for w in self.wires],
            "re": self.data.real.tolist(),
            "im": self.data.imag.tolist(),
        }

    @classmethod
    def from_json_dict(cls, payload: Mapping) -> "LabeledOperator":
        try:
            wires = tuple(Wire(w["name"], w["dim"]) for w in payload["wires"])
            re = np.asarray(payload["re"], dtype=float)
        except (KeyError, TypeError) as exc:
            raise DimensionMismatch(f"malformed operator payload: {exc}") from exc
        if re.ndim != 2 or re.shape[0] != re.shape[1]:
            raise DimensionMismatch(f"'re' block is not a square matrix: {re.shape}")
        im = payload.get("im")
        if im is None:
            im = np.zeros_like(re)
        else:
            im = np.asarray(im, dtype=float)
        if im.shape != re.shape:
            raise DimensionMismatch("'im' block shape differs from 're'")
        return cls(wires, re + 1j * im)

    def to_json_file(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def from_json_file(cls, path) -> "LabeledOperator":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def identity_operator(*wires: Wire) -> LabeledOperator:
    side = int(np.prod([w.dim for w in wires], dtype=np.int64)) if wires else 1
    return LabeledOperator(tuple(wires), np.eye(side, dtype=np.complex128))


def operator_from_matrix(matrix, wires: Sequence[Wire]) -> LabeledOperator:
    return LabeledOperator(tuple(wires), np.asarray(matrix, dtype=np.complex128))


@dataclass(frozen=True)
class HermitianCheckReport:
    """Hermiticity and positivity diagnostics for one operator."""

    is_hermitian: bool
    max_asymmetry: float
    min_eigenvalue: float

    def is_psd(self, tol: float) -> bool:
        return self.is_hermitian and self.min_eigenvalue >= -tol


def check_hermitian_psd(op: LabeledOperator, tol: float = 1e-9) -> HermitianCheckReport:
    """Report the largest |op - op^dag| entry and the minimum eigenvalue.

    The eigenvalue is computed on the Hermitized operator so it is defined
    even for slightly asymmetric inputs.
    """
    asym = float(np.abs(op.data - op.data.conj().T).max()) if op.dim else 0.0
    herm = (op.data + op.data.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(herm)[0]) if op.dim else 0.0
    return HermitianCheckReport(
        is_hermitian=asym <= tol,
        max_asymmetry=asym,
        min_eigenvalue=min_eig,
    )
