"""Single-pattern bipolar autoassociative net: training, lesions, one forward pass."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DIAGONAL_POLICIES = ("keep", "zero")
TIE_POLICIES = ("strict_minus", "lenient_plus", "tie_fails")
SUCCESS_RULES = ("full_match",)

# integer codes shared with the kernels
TIE_CODES = {name: code for code, name in enumerate(TIE_POLICIES)}


class ValidationError(ValueError):
    """Bad input to a library operation (out-of-range index, wrong length, ...)."""


def as_bipolar(values: Iterable[int], n: int | None = None) -> np.ndarray:
    """Validate a +/-1 vector and return it as a read-only int8 array."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
    if arr.ndim != 1:
        raise ValidationError("bipolar vector must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise ValidationError(f"expected length {n}, got {arr.shape[0]}")
    if arr.shape[0] < 1:
        raise ValidationError("bipolar vector must have at least one component")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValidationError("bipolar components must be exactly +1 or -1")
    out = arr.astype(np.int8)
    out.flags.writeable = False
    return out


def parse_bipolar(text: str) -> np.ndarray:
    """Parse '+-+-' or '1,-1,1' into a bipolar vector."""
    text = text.strip()
    if text and set(text) <= {"+", "-"}:
        return as_bipolar([1 if c == "+" else -1 for c in text])
    try:
        return as_bipolar(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"cannot parse bipolar vector {text!r}") from exc


def to_mask(u: Sequence[int]) -> int:
    """Pack a bipolar vector as a bitmask, bit i set iff u[i] == +1."""
    mask = 0
    for i, v in enumerate(u):
        if v > 0:
            mask |= 1 << i
    return mask


def from_mask(mask: int, n: int) -> np.ndarray:
    return as_bipolar([1 if (mask >> i) & 1 else -1 for i in range(n)])


@dataclass(frozen=True)
class Conventions:
    diagonal_policy: str = "keep"
    tie_policy: str = "strict_minus"
    success_rule: str = "full_match"

    def __post_init__(self):
        if self.diagonal_policy not in DIAGONAL_POLICIES:
            raise ValidationError(f"unknown diagonal policy {self.diagonal_policy!r}")
        if self.tie_policy not in TIE_POLICIES:
            raise ValidationError(f"unknown tie policy {self.tie_policy!r}")
        if self.success_rule not in SUCCESS_RULES:
            raise ValidationError(f"unknown success rule {self.success_rule!r}")

    @property
    def tie_code(self) -> int:
        return TIE_CODES[self.tie_policy]

    def as_dict(self) -> dict:
        return {
            "diagonal_policy": self.diagonal_policy,
            "tie_policy": self.tie_policy,
            "success_rule": self.success_rule,
        }


Link = tuple[int, int]


@dataclass(frozen=True)
class DamageSpec:
    """Deleted input neurons and/or cut links (i = input, j = output)."""

    deleted_inputs: frozenset[int] = field(default_factory=frozenset)
    cut_links: frozenset[Link] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "deleted_inputs", frozenset(int(i) for i in self.deleted_inputs))
        object.__setattr__(
            self, "cut_links", frozenset((int(i), int(j)) for i, j in self.cut_links)
        )

    @classmethod
    def cuts(cls, links: Iterable[Link]) -> "DamageSpec":
        links = list(links)
        spec = cls(cut_links=frozenset(map(tuple, links)))
        if len(spec.cut_links) != len(links):
            raise ValidationError("duplicate link in cut set")
        return spec

    @classmethod
    def deletions(cls, inputs: Iterable[int]) -> "DamageSpec":
        inputs = list(inputs)
        spec = cls(deleted_inputs=frozenset(inputs))
        if len(spec.deleted_inputs) != len(inputs):
            raise ValidationError("duplicate neuron in deletion set")
        return spec

    def validate(self, n: int) -> None:
        for i in self.deleted_inputs:
            if not 0 <= i < n:
                raise ValidationError(f"deleted input {i} out of range for n={n}")
        for i, j in self.cut_links:
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"link ({i},{j}) out of range for n={n}")

    def canonical_links(self) -> tuple[Link, ...]:
        return tuple(sorted(self.cut_links))

    def to_line(self) -> str:
        return ";".join(f"{i},{j}" for i, j in self.canonical_links())

    @classmethod
    def from_line(cls, line: str) -> "DamageSpec":
        line = line.strip()
        if not line:
            return cls()
        links = []
        for tok in line.split(";"):
            parts = tok.split(",")
            if len(parts) != 2:
                raise ValidationError(f"malformed link {tok!r}")
            try:
                links.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise ValidationError(f"malformed link {tok!r}") from exc
        return cls.cuts(links)


@dataclass(frozen=True, eq=False)
class TrainedNet:
    reference: np.ndarray
    weights: np.ndarray
    conventions: Conventions

    @property
    def n(self) -> int:
        return int(self.reference.shape[0])

    def __eq__(self, other):
        if not isinstance(other, TrainedNet):
            return NotImplemented
        return (
            self.conventions == other.conventions
            and np.array_equal(self.reference, other.reference)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.int8)
    arr.flags.writeable = False
    return arr


def train(reference, conventions: Conventions | None = None) -> TrainedNet:
    """Outer-product Hebbian storage of one pattern."""
    conventions = conventions or Conventions()
    x0 = as_bipolar(reference)
    w = np.outer(x0, x0).astype(np.int8)
    if conventions.diagonal_policy == "zero":
        np.fill_diagonal(w, 0)
    return TrainedNet(x0, _frozen(w), conventions)


def apply_damage(net: TrainedNet, spec: DamageSpec) -> TrainedNet:
    spec.validate(net.n)
    w = np.array(net.weights)
    if spec.deleted_inputs:
        w[sorted(spec.deleted_inputs), :] = 0
    if spec.cut_links:
        ii, jj = zip(*spec.cut_links)
        w[list(ii), list(jj)] = 0
    return TrainedNet(net.reference, _frozen(w), net.conventions)


def local_field(net: TrainedNet, u) -> np.ndarray:
    u = as_bipolar(u, net.n)
    # h_j = sum_i w_ij u_i
    return u.astype(np.int64) @ net.weights.astype(np.int64)


def forward(net: TrainedNet, u) -> tuple[np.ndarray, np.ndarray]:
    """Return the output vector and a per-component tie flag (h_j == 0)."""
    h = local_field(net, u)
    if net.conventions.tie_policy == "lenient_plus":
        y = np.where(h >= 0, 1, -1)
    else:
        y = np.where(h > 0, 1, -1)
    return as_bipolar(y), h == 0


def is_success(net: TrainedNet, y, ties=None) -> bool:
    y = as_bipolar(y, net.n)
    if net.conventions.tie_policy == "tie_fails" and ties is not None and np.any(ties):
        return False
    return bool(np.array_equal(y, net.reference))


def recall_once(net: TrainedNet, u) -> bool:
    y, ties = forward(net, u)
    return is_success(net, y, ties)
