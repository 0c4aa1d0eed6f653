"""Core Dicke-Stark model: parameters, Hilbert-space indexing, collective
operators, Dicke states, and exact Hamiltonian builders.

Conventions
-----------
Frequencies are quoted in units of the resonator frequency, so omega_r = 1
fixes the time unit 1/omega_r. The symmetric basis stores amplitudes k-major
with flat index ``k*(n_max+1) + n`` for k atomic excitations and n photons.
The product basis uses ``s*(n_max+1) + n`` where bit j of the integer s marks
qubit j excited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

# Dense matrices only: beyond this the desk-scale design assumptions break.
MAX_DIMENSION = 4096

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-10


class BasisKind(Enum):
    """Which sector of the N-qubit + resonator problem a space indexes."""

    SYMMETRIC = "symmetric"  # Dicke ladder (N+1 levels) x Fock
    PRODUCT = "product"  # full 2^N qubit register x Fock


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the Dicke-Stark Hamiltonian.

    Attributes
    ----------
    n_qubits : int
        Number N of identical two-level systems.
    omega_r : float
        Resonator frequency (the unit frequency).
    omega_q : float
        Qubit transition frequency.
    coupling : float
        Qubit-resonator coupling strength lambda (>= 0; sign conventions are
        absorbed into the states).
    stark_u : float
        Strength U of the photon-number-dependent qubit shift
        (U/2N) a'a sum_j sigma_j^z.
    n_max : int
        Photon-number cutoff of the Fock space.
    """

    n_qubits: int
    omega_r: float = 1.0
    omega_q: float = 1.0
    coupling: float = 0.006
    stark_u: float = -0.5
    n_max: int = 8

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {self.n_max}")
        if self.omega_r <= 0:
            raise ValueError(f"omega_r must be positive, got {self.omega_r}")
        if self.coupling < 0:
            raise ValueError(f"coupling must be >= 0, got {self.coupling}")

    @property
    def ratio(self) -> float:
        """Detuning ratio (omega_r - omega_q) / omega_r for this omega_q."""
        return (self.omega_r - self.omega_q) / self.omega_r


def default_n_max(n_initial: int, n_qubits: int) -> int:
    """Default photon cutoff for a run whose largest initial photon number is
    ``n_initial``: the protocols reach at most n_initial + 2 photons and
    leakage beyond is perturbative, so n_initial + N + 4 leaves a wide margin
    (cutoff-doubling checks confirm 1e-8 stability)."""
    return n_initial + n_qubits + 4


@dataclass(frozen=True)
class HilbertSpace:
    """Indexing of one basis sector, with bijective (labels) <-> flat maps."""

    kind: BasisKind
    n_qubits: int
    n_max: int
    dimension: int

    def index(self, k: int, n: int) -> int:
        """Flat index of |D_N^k> x |n> (symmetric basis only)."""
        if self.kind is not BasisKind.SYMMETRIC:
            raise ValueError("index(k, n) is defined on the symmetric basis")
        if not (0 <= k <= self.n_qubits):
            raise ValueError(f"k={k} outside 0..{self.n_qubits}")
        if not (0 <= n <= self.n_max):
            raise ValueError(f"n={n} outside 0..{self.n_max}")
        return k * (self.n_max + 1) + n

    def label(self, index: int) -> tuple[int, int]:
        """Inverse of :meth:`index`: (k, n) for a symmetric flat index."""
        if self.kind is not BasisKind.SYMMETRIC:
            raise ValueError("label(index) is defined on the symmetric basis")
        if not (0 <= index < self.dimension):
            raise ValueError(f"index {index} outside 0..{self.dimension - 1}")
        return divmod(index, self.n_max + 1)

    def product_index(self, bits: int, n: int) -> int:
        """Flat index of |bits> x |n| (product basis only); bit j of ``bits``
        marks qubit j excited."""
        if self.kind is not BasisKind.PRODUCT:
            raise ValueError("product_index is defined on the product basis")
        if not (0 <= bits < 2**self.n_qubits):
            raise ValueError(f"bits={bits} outside 0..{2 ** self.n_qubits - 1}")
        if not (0 <= n <= self.n_max):
            raise ValueError(f"n={n} outside 0..{self.n_max}")
        return bits * (self.n_max + 1) + n

    def labels(self) -> list[tuple[int, int]]:
        """All (k, n) labels in flat-index order (symmetric basis only)."""
        return [self.label(i) for i in range(self.dimension)]


@dataclass(frozen=True)
class Operator:
    """Dense complex matrix over a HilbertSpace; treated as immutable."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dimension, self.space.dimension):
            raise ValueError(
                f"matrix shape {m.shape} does not match dimension {self.space.dimension}"
            )
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def require_hermitian(self, tol: float = HERMITICITY_TOL) -> None:
        defect = self.hermiticity_defect()
        if defect > tol:
            raise ValueError(f"operator is not Hermitian: max|M - M^dag| = {defect:.3e}")


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector over a HilbertSpace."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.space.dimension,):
            raise ValueError(
                f"amplitude shape {a.shape} does not match dimension {self.space.dimension}"
            )
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 by more than {NORM_TOL}")
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    def population(self, k: int, n: int) -> float:
        return float(abs(self.amplitudes[self.space.index(k, n)]) ** 2)


def build_space(params: ModelParams, kind: BasisKind) -> HilbertSpace:
    """Construct the Hilbert space of the requested kind for these parameters."""
    levels = params.n_max + 1
    if kind is BasisKind.SYMMETRIC:
        dim = (params.n_qubits + 1) * levels
    elif kind is BasisKind.PRODUCT:
        dim = 2**params.n_qubits * levels
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    if dim > MAX_DIMENSION:
        raise ValueError(
            f"dimension {dim} exceeds the supported maximum {MAX_DIMENSION};"
            " reduce n_qubits or n_max"
        )
    return HilbertSpace(kind=kind, n_qubits=params.n_qubits, n_max=params.n_max, dimension=dim)


def ladder_coupling(k: int, n_qubits: int) -> float:
    """Dicke-ladder matrix element f(k) = sqrt((k+1)(N-k)) of the collective
    flip between k and k+1 excitations; zero outside 0 <= k < N, so there is
    no coupling out of the top of the ladder."""
    if k < 0 or k >= n_qubits:
        return 0.0
    return math.sqrt((k + 1) * (n_qubits - k))


def _fock_annihilator(n_max: int) -> np.ndarray:
    a = np.zeros((n_max + 1, n_max + 1))
    for n in range(1, n_max + 1):
        a[n - 1, n] = math.sqrt(n)
    return a


def _dicke_jx(n_qubits: int) -> np.ndarray:
    jx = np.zeros((n_qubits + 1, n_qubits + 1))
    for k in range(n_qubits):
        f = ladder_coupling(k, n_qubits)
        jx[k + 1, k] = f
        jx[k, k + 1] = f
    return jx


def _dicke_jz(n_qubits: int) -> np.ndarray:
    return np.diag([2.0 * k - n_qubits for k in range(n_qubits + 1)])


def collective_ops(space: HilbertSpace) -> tuple[Operator, Operator]:
    """Collective (Jx, Jz) on the symmetric space, acting trivially on the
    Fock factor: Jx couples (k, n) <-> (k+1, n) with element f(k) and Jz is
    diagonal with entries 2k - N."""
    if space.kind is not BasisKind.SYMMETRIC:
        raise ValueError("collective_ops requires the symmetric basis")
    eye_f = np.eye(space.n_max + 1)
    jx = Operator(space, np.kron(_dicke_jx(space.n_qubits), eye_f))
    jz = Operator(space, np.kron(_dicke_jz(space.n_qubits), eye_f))
    return jx, jz


def _pauli_sums(n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """(sum_j sigma_j^x, sum_j sigma_j^z) on the 2^N register, bit j = qubit j."""
    dim = 2**n_qubits
    sx = np.zeros((dim, dim))
    sz = np.zeros((dim, dim))
    for s in range(dim):
        ones = bin(s).count("1")
        sz[s, s] = 2.0 * ones - n_qubits
        for j in range(n_qubits):
            sx[s ^ (1 << j), s] += 1.0
    return sx, sz


def build_hamiltonian(params: ModelParams, space: HilbertSpace) -> Operator:
    """Exact Dicke-Stark Hamiltonian on the given space:

        H = (omega_q/2) Jz + omega_r a'a + (lambda/sqrt(N)) (a + a') Jx
            + (U/2N) a'a Jz

    In the symmetric basis the diagonal entry at (k, n) is
    (omega_q + n U/N)(k - N/2) + n omega_r, and the coupling element between
    (k, n) and (k+1, n+1), and between (k, n+1) and (k+1, n), equals
    lambda f(k) sqrt(n+1) / sqrt(N).
    """
    n = params.n_qubits
    a = _fock_annihilator(params.n_max)
    x = a + a.T
    nph = a.T @ a
    eye_f = np.eye(params.n_max + 1)

    if space.kind is BasisKind.SYMMETRIC:
        jx = _dicke_jx(n)
        jz = _dicke_jz(n)
        eye_q = np.eye(n + 1)
    elif space.kind is BasisKind.PRODUCT:
        jx, jz = _pauli_sums(n)
        eye_q = np.eye(2**n)
    else:
        raise ValueError(f"unknown basis kind {space.kind!r}")

    h = (
        0.5 * params.omega_q * np.kron(jz, eye_f)
        + params.omega_r * np.kron(eye_q, nph)
        + (params.coupling / math.sqrt(n)) * np.kron(jx, x)
        + (params.stark_u / (2 * n)) * np.kron(jz, nph)
    )
    op = Operator(space, h)
    op.require_hermitian()
    return op


def dicke_state(space: HilbertSpace, k: int, n: int) -> StateVector:
    """The state |D_N^k> x |n>: a unit basis vector in the symmetric basis, or
    the equal-amplitude superposition of all C(N, k) bitstrings with k
    excitations in the product basis."""
    if not (0 <= k <= space.n_qubits):
        raise ValueError(f"k={k} outside 0..{space.n_qubits}")
    if not (0 <= n <= space.n_max):
        raise ValueError(f"n={n} outside 0..{space.n_max}")
    amps = np.zeros(space.dimension, dtype=complex)
    if space.kind is BasisKind.SYMMETRIC:
        amps[space.index(k, n)] = 1.0
    else:
        weight = 1.0 / math.sqrt(math.comb(space.n_qubits, k))
        for s in range(2**space.n_qubits):
            if bin(s).count("1") == k:
                amps[space.product_index(s, n)] = weight
    return StateVector(space, amps)


def symmetrization_isometry(sym: HilbertSpace, prod: HilbertSpace) -> np.ndarray:
    """Isometry V (product-dim x symmetric-dim) embedding the symmetric sector
    into the product basis; V^dag V = I and V^dag projects onto the sector."""
    if sym.kind is not BasisKind.SYMMETRIC or prod.kind is not BasisKind.PRODUCT:
        raise ValueError("expected (symmetric, product) spaces")
    if sym.n_qubits != prod.n_qubits or sym.n_max != prod.n_max:
        raise ValueError("spaces differ in n_qubits or n_max")
    v = np.zeros((prod.dimension, sym.dimension))
    for k in range(sym.n_qubits + 1):
        weight = 1.0 / math.sqrt(math.comb(sym.n_qubits, k))
        for s in range(2**sym.n_qubits):
            if bin(s).count("1") == k:
                for n in range(sym.n_max + 1):
                    v[prod.product_index(s, n), sym.index(k, n)] = weight
    return v


def atomic_excitation_operator(space: HilbertSpace) -> Operator:
    """N_q = sum_j sigma_j^+ sigma_j^-, diagonal in either basis."""
    levels = space.n_max + 1
    if space.kind is BasisKind.SYMMETRIC:
        diag = [k for k, _ in space.labels()]
    else:
        diag = [bin(s).count("1") for s in range(2**space.n_qubits) for _ in range(levels)]
    return Operator(space, np.diag(np.asarray(diag, dtype=float)))


def photon_number_operator(space: HilbertSpace) -> Operator:
    """a'a, diagonal in either basis."""
    levels = space.n_max + 1
    blocks = space.dimension // levels
    diag = np.tile(np.arange(levels, dtype=float), blocks)
    return Operator(space, np.diag(diag))
