"""Dense complex operators with labeled bases and JSON round-tripping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


def _as_complex_matrix(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"operator entries must be square, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class Operator:
    """A dense complex square matrix over a labeled basis.

    Instances are immutable; ``entries`` is copied on construction and the
    copy is marked read-only so values can be shared across threads.
    """

    entries: np.ndarray
    basis_labels: tuple[str, ...] = field(default=None)

    def __post_init__(self):
        m = _as_complex_matrix(self.entries).copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        labels = self.basis_labels
        if labels is None:
            labels = tuple(str(i) for i in range(m.shape[0]))
        else:
            labels = tuple(str(x) for x in labels)
        if len(labels) != m.shape[0]:
            raise InvalidInputError(
                f"{len(labels)} basis labels for dimension {m.shape[0]}"
            )
        if len(set(labels)) != len(labels):
            raise InvalidInputError("basis labels must be unique")
        object.__setattr__(self, "basis_labels", labels)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def require_finite(self):
        if not np.all(np.isfinite(self.entries.view(float))):
            raise InvalidInputError("operator has non-finite entries")
        return self

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "basis_labels": list(self.basis_labels),
            "re": self.entries.real.ravel().tolist(),
            "im": self.entries.imag.ravel().tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Operator":
        dim = int(d["dim"])
        re = np.asarray(d["re"], dtype=float).reshape(dim, dim)
        im = np.asarray(d["im"], dtype=float).reshape(dim, dim)
        return cls(re + 1j * im, tuple(d["basis_labels"]))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, s: str) -> "Operator":
        return cls.from_json_dict(json.loads(s))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.entries @ other.entries, self.basis_labels)
        return self.entries @ other

    def conj_transpose(self) -> "Operator":
        return Operator(self.entries.conj().T, self.basis_labels)


def as_matrix(op) -> np.ndarray:
    """Accept an Operator or a bare array, return the ndarray view."""
    if isinstance(op, Operator):
        return op.entries
    return _as_complex_matrix(op)
