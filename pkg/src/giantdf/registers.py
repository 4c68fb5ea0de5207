"""Atom and time-bin registers and the joint Hilbert space they span.

Factor order of the joint space is ``atom_0, ..., atom_{n-1}, right bin,
left bin`` (the left bin only in bidirectional mode). Each atom uses the
basis ``|g> = 0, |e> = 1`` so that ``sigma = |g><e|``; a time bin is a Fock
ladder truncated at ``d`` levels.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .constants import MAX_DIM
from .tensor import DimensionError, dagger, embed, kron_all

SIGMA = np.array([[0, 1], [0, 0]], dtype=complex)
#: ``|e><e| - |g><g|``
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)


def lowering(d: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on ``d`` Fock levels."""
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)


@dataclass(frozen=True)
class AtomRegister:
    n_atoms: int

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be positive")

    @property
    def dim(self) -> int:
        return 2**self.n_atoms

    @property
    def dims(self) -> list[int]:
        return [2] * self.n_atoms

    def sigma(self, j: int) -> np.ndarray:
        return embed(SIGMA, j, self.dims)

    def sigma_z(self, j: int) -> np.ndarray:
        return embed(SIGMA_Z, j, self.dims)

    def number(self, j: int) -> np.ndarray:
        s = self.sigma(j)
        return dagger(s) @ s

    def basis_index(self, bits) -> int:
        """Index of the product state with atom ``j`` excited iff ``bits[j]``."""
        idx = 0
        for b in bits:
            idx = 2 * idx + int(bool(b))
        return idx

    def product_state(self, label: str) -> np.ndarray:
        """Density matrix for a label such as ``"eg"`` (atom 0 excited)."""
        label = label.strip().lower()
        if len(label) != self.n_atoms or set(label) - {"e", "g"}:
            raise ValueError(f"state label {label!r} must be {self.n_atoms} chars of e/g")
        i = self.basis_index(c == "e" for c in label)
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[i, i] = 1.0
        return rho

    def excitation_count(self) -> np.ndarray:
        return np.array([bin(i).count("1") for i in range(self.dim)])


@dataclass(frozen=True)
class BinRegister:
    """Fock truncation of the right-going (and optionally left-going) bin.

    ``d_left = 0`` means no left-going bin (unidirectional mode).
    """

    d_right: int = 2
    d_left: int = 0

    def __post_init__(self):
        if self.d_right < 2:
            raise ValueError("d_right must be at least 2")
        if self.d_left != 0 and self.d_left < 2:
            raise ValueError("d_left must be 0 or at least 2")

    @property
    def bidirectional(self) -> bool:
        return self.d_left > 0

    @property
    def dims(self) -> list[int]:
        return [self.d_right, self.d_left] if self.bidirectional else [self.d_right]

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def vacuum(self) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def occupations(self) -> np.ndarray:
        """Array of shape ``(dim, n_bins)`` with the Fock number of each bin."""
        return np.array(list(np.ndindex(*self.dims)), dtype=int)


def bins_for(layout, d: int = 2) -> BinRegister:
    """Default bin register: a left bin only when ``gamma_left > 0``."""
    return BinRegister(d, d if layout.gamma_left > 0 else 0)


@dataclass(frozen=True)
class JointSpace:
    """Atoms (x) bins with embedded ladder operators."""

    atoms: AtomRegister
    bins: BinRegister
    max_dim: int = MAX_DIM

    def __post_init__(self):
        if self.dim > self.max_dim:
            raise DimensionError(f"joint dimension {self.dim} exceeds the cap of {self.max_dim}")

    @property
    def dims(self) -> list[int]:
        return self.atoms.dims + self.bins.dims

    @property
    def dim(self) -> int:
        return self.atoms.dim * self.bins.dim

    @property
    def atom_factors(self) -> list[int]:
        return list(range(self.atoms.n_atoms))

    @property
    def bin_factors(self) -> list[int]:
        n = self.atoms.n_atoms
        return list(range(n, n + len(self.bins.dims)))

    def on_atoms(self, op: np.ndarray) -> np.ndarray:
        return kron_all([op, np.eye(self.bins.dim)], max_dim=self.max_dim)

    def on_bins(self, op: np.ndarray) -> np.ndarray:
        return kron_all([np.eye(self.atoms.dim), op], max_dim=self.max_dim)

    @cached_property
    def b_right(self) -> np.ndarray:
        return self.on_bins(embed(lowering(self.bins.d_right), 0, self.bins.dims))

    @cached_property
    def b_left(self) -> np.ndarray:
        if not self.bins.bidirectional:
            raise ValueError("no left-going bin in unidirectional mode")
        return self.on_bins(embed(lowering(self.bins.d_left), 1, self.bins.dims))

    def vacuum_columns(self) -> np.ndarray:
        """Joint basis indices whose bins are all in the vacuum."""
        return np.arange(self.atoms.dim) * self.bins.dim

    def trusted_columns(self) -> np.ndarray:
        """Joint basis indices where every bin holds at most ``d - 2`` photons.

        On these inputs one application of a ladder operator and its adjoint
        never reaches the truncated top level, so bilinear expressions in
        ``b, b^dag`` agree with the untruncated oscillator.
        """
        occ = self.bins.occupations()
        caps = np.array(self.bins.dims) - 2
        ok = np.all(occ <= caps, axis=1)
        cols = [a * self.bins.dim + k for a in range(self.atoms.dim) for k in np.flatnonzero(ok)]
        return np.array(cols, dtype=int)
