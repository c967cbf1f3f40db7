"""Exact complex linear algebra for one- and two-qubit objects.

States and operators are stored as dense complex arrays in the computational
(Z) basis.  The X basis is related by |j_z> = [|0_x> + (-1)^j |1_x>]/sqrt(2),
i.e. |0_x>, |1_x> are the +1/-1 eigenvectors of the Pauli X operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ParameterError

ALPHA_SUP = 1.0 / math.sqrt(2.0)

NORM_TOL = 1e-12
HERM_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

KET_0Z = np.array([1.0, 0.0], dtype=complex)
KET_1Z = np.array([0.0, 1.0], dtype=complex)
KET_0X = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
KET_1X = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


def _check_alpha(alpha: float, *, include_sup: bool = False) -> None:
    hi_ok = alpha <= ALPHA_SUP + 1e-15 if include_sup else alpha < ALPHA_SUP
    if not (0.0 < alpha and hi_ok):
        bound = "(0, 1/sqrt(2)]" if include_sup else "(0, 1/sqrt(2))"
        raise ParameterError(f"alpha={alpha!r} outside {bound}")


def projector(ket: np.ndarray) -> np.ndarray:
    """Rank-1 projector |psi><psi| of a state vector."""
    v = np.asarray(ket, dtype=complex)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class StateVector:
    """Unit complex vector of dimension 2 or 4.

    ``basis_label`` is purely documentary; amplitudes are always stored in the
    computational basis.
    """

    amplitudes: np.ndarray
    basis_label: str = "Z"

    def __post_init__(self) -> None:
        amp = _frozen(self.amplitudes)
        if amp.shape not in ((2,), (4,)):
            raise ParameterError(f"state dimension must be 2 or 4, got shape {amp.shape}")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ParameterError(f"state not normalized: |psi|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> "DensityMatrix":
        return DensityMatrix(projector(self.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, PSD complex matrix of dimension 2 or 4."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = _frozen(self.entries)
        if m.shape not in ((2, 2), (4, 4)):
            raise ParameterError(f"density matrix must be 2x2 or 4x4, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERM_TOL:
            raise ParameterError("density matrix not Hermitian")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL or abs(np.trace(m).imag) > TRACE_TOL:
            raise ParameterError(f"density matrix trace {np.trace(m)!r} != 1")
        if np.min(np.linalg.eigvalsh(m)) < -PSD_TOL:
            raise ParameterError("density matrix has a significantly negative eigenvalue")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Povm:
    """Measurement given by PSD elements that sum to the identity."""

    elements: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        elems = tuple(_frozen(e) for e in self.elements)
        if not elems:
            raise ParameterError("POVM needs at least one element")
        d = elems[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for e in elems:
            if e.shape != (d, d):
                raise ParameterError("POVM elements must share one square shape")
            if np.max(np.abs(e - e.conj().T)) > HERM_TOL:
                raise ParameterError("POVM element not Hermitian")
            if np.min(np.linalg.eigvalsh(e)) < -PSD_TOL:
                raise ParameterError("POVM element not positive semidefinite")
            total = total + e
        if np.max(np.abs(total - np.eye(d))) > NORM_TOL:
            raise ParameterError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", elems)

    def __len__(self) -> int:
        return len(self.elements)

    def outcome_probabilities(self, rho: DensityMatrix | np.ndarray) -> np.ndarray:
        m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
        return np.array([np.trace(m @ e).real for e in self.elements])


@dataclass(frozen=True)
class FilterOp:
    """Local filter alpha|0_x><0_x| + beta|1_x><1_x| with beta = sqrt(1-alpha^2)."""

    matrix: np.ndarray
    alpha: float

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def beta(self) -> float:
        return math.sqrt(1.0 - self.alpha**2)

    def squared(self) -> np.ndarray:
        return self.matrix @ self.matrix


@dataclass(frozen=True)
class KrausChannel:
    """Trace-preserving single-qubit channel in Kraus form."""

    kraus_ops: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        ops = tuple(_frozen(k) for k in self.kraus_ops)
        if not ops:
            raise ParameterError("channel needs at least one Kraus operator")
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(2))) > NORM_TOL:
            raise ParameterError("Kraus operators do not satisfy completeness")
        object.__setattr__(self, "kraus_ops", ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        m = np.asarray(rho, dtype=complex)
        return sum(k @ m @ k.conj().T for k in self.kraus_ops)


def identity_channel() -> KrausChannel:
    return KrausChannel((np.eye(2, dtype=complex),))


def ket_x(j: int) -> np.ndarray:
    """X-basis state |j_x> as computational-basis amplitudes."""
    return KET_0X if j == 0 else KET_1X


def ket_z(j: int) -> np.ndarray:
    return KET_0Z if j == 0 else KET_1Z


def signal_state(j: int, alpha: float) -> StateVector:
    """Sender's state beta|0_x> + (-1)^j alpha|1_x> for bit value j."""
    _check_alpha(alpha)
    if j not in (0, 1):
        raise ParameterError("bit value must be 0 or 1")
    beta = math.sqrt(1.0 - alpha**2)
    return StateVector(beta * KET_0X + (-1) ** j * alpha * KET_1X, basis_label="X")


def dual_state(j: int, alpha: float) -> StateVector:
    """Unit state orthogonal to signal_state(j, alpha)."""
    _check_alpha(alpha)
    if j not in (0, 1):
        raise ParameterError("bit value must be 0 or 1")
    beta = math.sqrt(1.0 - alpha**2)
    return StateVector(alpha * KET_0X - (-1) ** j * beta * KET_1X, basis_label="X")


def b92_povm(alpha: float) -> Povm:
    """Receiver's three-outcome measurement, in outcome order (0, 1, null).

    Outcome j fires only on states orthogonal to the opposite signal, so a
    conclusive outcome identifies the sent bit; the null element absorbs the
    rest of the identity.
    """
    _check_alpha(alpha)
    f0 = projector(dual_state(1, alpha).amplitudes) / 2.0
    f1 = projector(dual_state(0, alpha).amplitudes) / 2.0
    f_null = np.eye(2, dtype=complex) - f0 - f1
    if np.min(np.linalg.eigvalsh(f_null)) < -PSD_TOL:
        raise ConsistencyError("null element not PSD; invalid construction")
    return Povm((f0, f1, f_null))


def filter_op(alpha: float) -> FilterOp:
    """Local filter diagonal in the X basis with eigenvalues (alpha, beta)."""
    _check_alpha(alpha)
    beta = math.sqrt(1.0 - alpha**2)
    mat = alpha * projector(KET_0X) + beta * projector(KET_1X)
    return FilterOp(mat, alpha)


def check_pair_basis(alpha: float) -> tuple[StateVector, StateVector, StateVector, StateVector]:
    """Orthonormal two-qubit basis used for the check-pair bookkeeping.

    Index (0,0) is the ideal entangled signal state; (1,1) and (0,1) span the
    error events of the local Z x B92 measurement; (1,0) completes the basis.
    Returned in index order ((0,0), (0,1), (1,0), (1,1)).
    """
    _check_alpha(alpha)
    beta = math.sqrt(1.0 - alpha**2)
    g00 = beta * np.kron(KET_0X, KET_0X) + alpha * np.kron(KET_1X, KET_1X)
    g01 = beta * np.kron(KET_0X, KET_1X) - alpha * np.kron(KET_1X, KET_0X)
    g10 = alpha * np.kron(KET_0X, KET_1X) + beta * np.kron(KET_1X, KET_0X)
    g11 = alpha * np.kron(KET_0X, KET_0X) - beta * np.kron(KET_1X, KET_1X)
    return tuple(StateVector(g, basis_label="X") for g in (g00, g01, g10, g11))


def error_povm_element(alpha: float) -> np.ndarray:
    """Two-qubit POVM element whose weight is the check-pair error probability."""
    g00, g01, g10, g11 = check_pair_basis(alpha)
    return (projector(g11.amplitudes) + projector(g01.amplitudes)) / 2.0


def nonmax_entangled_state(alpha: float) -> StateVector:
    """Source state beta|0_x 0_x> + alpha|1_x 1_x> shared between A and B.

    The maximally entangled point alpha = 1/sqrt(2) is allowed here even
    though the protocol range excludes it.
    """
    _check_alpha(alpha, include_sup=True)
    beta = math.sqrt(1.0 - alpha**2)
    amp = beta * np.kron(KET_0X, KET_0X) + alpha * np.kron(KET_1X, KET_1X)
    return StateVector(amp, basis_label="X")


def depolarizing_channel(p: float) -> KrausChannel:
    """Channel rho -> (1-p) rho + p/3 sum_a sigma_a rho sigma_a."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"depolarizing strength p={p!r} outside [0, 1]")
    ops = [math.sqrt(1.0 - p) * np.eye(2, dtype=complex)]
    ops += [math.sqrt(p / 3.0) * s for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    return KrausChannel(tuple(ops))


def depolarize(rho: DensityMatrix, p: float) -> DensityMatrix:
    """Apply the depolarizing channel of strength p to a single-qubit state."""
    if rho.dim != 2:
        raise ParameterError("depolarize acts on single-qubit states")
    return DensityMatrix(depolarizing_channel(p).apply(rho.entries))


def apply_channel_on_B(psi_ab: StateVector, channel: KrausChannel) -> DensityMatrix:
    """Send qubit B of a two-qubit pure state through a single-qubit channel."""
    if psi_ab.dim != 4:
        raise ParameterError("expected a two-qubit state")
    rho = projector(psi_ab.amplitudes)
    out = np.zeros((4, 4), dtype=complex)
    for k in channel.kraus_ops:
        big = np.kron(np.eye(2, dtype=complex), k)
        out += big @ rho @ big.conj().T
    return DensityMatrix(out)


def measure_sample(rho: DensityMatrix, povm: Povm, rng: np.random.Generator) -> int:
    """Draw one outcome index from the Born distribution Tr[rho F_i]."""
    if povm.elements[0].shape[0] != rho.dim:
        raise ParameterError("POVM dimension does not match the state")
    probs = povm.outcome_probabilities(rho)
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-6:
        raise ConsistencyError(f"outcome probabilities sum to {total!r}")
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    return int(rng.choice(len(probs), p=probs))
