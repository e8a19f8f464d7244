"""Complex-amplitude model of the 4x4 MZI mesh chip.

The chip is four stages in series::

    input -> [Part 1: gates] -> [Part 2: SU(N) core A] -> [Part 3: diagonal]
          -> [Part 4: SU(N) core B] -> output

so the field transfer matrix is ``U_B @ Sigma @ U_A @ G``.  Every function here
is pure and accepts leading batch dimensions on phase arrays, which is how the
spectral code evaluates a whole wavelength grid in one call.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi

PART_GATES = "part1"
PART_CORE_A = "part2"
PART_DIAG = "part3"
PART_CORE_B = "part4"
PARTS = (PART_GATES, PART_CORE_A, PART_DIAG, PART_CORE_B)


class MziPhases(NamedTuple):
    theta: float
    alpha: float
    beta: float

    def wrapped(self) -> "MziPhases":
        return MziPhases(*(float(x) for x in wrap_phase(np.array(self))))


def wrap_phase(x):
    """Wrap phases into [0, 2*pi)."""
    w = np.mod(x, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    return np.where(w >= TWO_PI, 0.0, w)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("phases must be finite")


def mzi_matrix(theta, alpha=0.0, beta=0.0) -> np.ndarray:
    """2x2 MZI transfer matrix with internal phase ``theta`` and output phases.

    ``theta = pi`` is the bar state, ``theta = 0`` the cross state.  Array inputs
    broadcast; the result has shape ``broadcast_shape + (2, 2)``.
    """
    theta, alpha, beta = np.broadcast_arrays(
        np.asarray(theta, dtype=float), np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float)
    )
    _check_finite(theta, alpha, beta)
    e_t = np.exp(1j * theta)
    e_a = np.exp(1j * alpha)
    e_b = np.exp(1j * beta)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = e_a * (e_t - 1.0)
    out[..., 0, 1] = 1j * e_a * (e_t + 1.0)
    out[..., 1, 0] = 1j * e_b * (e_t + 1.0)
    out[..., 1, 1] = e_b * (1.0 - e_t)
    return 0.5 * out


def embed_rotation(n_ports: int, pair_lo: int, m: np.ndarray) -> np.ndarray:
    """Embed a 2x2 block acting on ports ``(pair_lo, pair_lo + 1)`` into an identity."""
    if not (0 <= pair_lo and pair_lo + 1 < n_ports):
        raise ValueError(f"port pair ({pair_lo}, {pair_lo + 1}) outside a {n_ports}-port mesh")
    m = np.asarray(m)
    if m.shape[-2:] != (2, 2):
        raise ValueError("rotation block must be 2x2")
    out = np.broadcast_to(np.eye(n_ports, dtype=complex), m.shape[:-2] + (n_ports, n_ports)).copy()
    out[..., pair_lo : pair_lo + 2, pair_lo : pair_lo + 2] = m
    return out


@dataclass(frozen=True)
class MziSlot:
    """One MZI of a triangular core: plane ``p``, position ``q`` and the port pair it couples."""

    plane: int
    position: int
    pair_lo: int


def triangular_slots(n_ports: int) -> tuple[MziSlot, ...]:
    """Slots of an SU(N) core in the order light meets them.

    Plane ``p`` (1..N-1) holds rotations ``R_{p,p} ... R_{p,1}``; the product is
    ``R_{p,1} R_{p,2} ... R_{p,p}`` so ``R_{p,p}`` acts first.  ``R_{p,q}``
    couples ports ``(N-1-q, N-q)`` (zero based).  For N=4 this yields MZIs
    R(1)..R(6) on pairs 2, 1, 2, 0, 1, 2.
    """
    if n_ports < 2:
        raise ValueError("a mesh needs at least two ports")
    slots = []
    for p in range(1, n_ports):
        for q in range(p, 0, -1):
            slots.append(MziSlot(plane=p, position=q, pair_lo=n_ports - 1 - q))
    return tuple(slots)


def compose_su(slots: Sequence[MziSlot], phases, n_ports: int | None = None) -> np.ndarray:
    """Product of the embedded MZI rotations of one triangular core.

    ``phases`` has shape ``(..., K, 3)`` with columns (theta, alpha, beta) and
    ``K = len(slots)``; slot ``k`` is applied after slots ``0..k-1``.
    """
    phases = np.asarray(phases, dtype=float)
    if n_ports is None:
        n_ports = max(s.pair_lo for s in slots) + 2
    k_expected = n_ports * (n_ports - 1) // 2
    if len(slots) != k_expected or phases.shape[-2:] != (k_expected, 3):
        raise ValueError(
            f"SU({n_ports}) core needs {k_expected} MZI slots, got {len(slots)} slots "
            f"and phases of shape {phases.shape}"
        )
    blocks = mzi_matrix(phases[..., 0], phases[..., 1], phases[..., 2])
    batch = phases.shape[:-2]
    u = np.broadcast_to(np.eye(n_ports, dtype=complex), batch + (n_ports, n_ports)).copy()
    for k, slot in enumerate(slots):
        a = slot.pair_lo
        rows = u[..., a : a + 2, :]
        u[..., a : a + 2, :] = blocks[..., k, :, :] @ rows
    return u


def diag_stage_matrix(thetas, ext_phases) -> np.ndarray:
    """Attenuator stage: ``diag(|sin(theta_j/2)| * exp(i*phi_j))``.

    The unused MZI output is treated as loss.
    """
    thetas = np.asarray(thetas, dtype=float)
    ext_phases = np.asarray(ext_phases, dtype=float)
    if thetas.shape != ext_phases.shape:
        raise ValueError("theta and external-phase vectors differ in length")
    _check_finite(thetas, ext_phases)
    amp = np.abs(np.sin(thetas / 2.0)) * np.exp(1j * ext_phases)
    n = thetas.shape[-1]
    out = np.zeros(thetas.shape + (n,), dtype=complex)
    idx = np.arange(n)
    out[..., idx, idx] = amp
    return out


def gate_stage_matrix(gate_open: Sequence[bool]) -> np.ndarray:
    """0/1 diagonal amplitude matrix for the input gates."""
    return np.diag(np.asarray(gate_open, dtype=bool).astype(complex))


@dataclass(frozen=True)
class MeshTopology:
    """Wiring of the four chip parts and the flat phase-shifter numbering.

    ``shifter_index`` maps ``(part, slot, role)`` to a position in the phase /
    voltage vector.  Roles are ``theta``/``alpha``/``beta`` for SU-core MZIs,
    ``theta``/``phase`` for diagonal-stage MZIs and ``theta`` for gates.
    """

    n_ports: int = 4
    su_core_a: tuple[MziSlot, ...] = ()
    su_core_b: tuple[MziSlot, ...] = ()
    shifter_index: dict = field(default_factory=dict)

    @classmethod
    def default(cls, n_ports: int = 4) -> "MeshTopology":
        slots = triangular_slots(n_ports)
        index = {}
        counter = 0

        def add(part, slot, role):
            nonlocal counter
            index[(part, slot, role)] = counter
            counter += 1

        for j in range(n_ports):
            add(PART_GATES, j, "theta")
        for k in range(len(slots)):
            for role in ("theta", "alpha", "beta"):
                add(PART_CORE_A, k, role)
        for j in range(n_ports):
            add(PART_DIAG, j, "theta")
            add(PART_DIAG, j, "phase")
        for k in range(len(slots)):
            for role in ("theta", "alpha", "beta"):
                add(PART_CORE_B, k, role)
        return cls(n_ports=n_ports, su_core_a=slots, su_core_b=slots, shifter_index=index)

    def __post_init__(self):
        if not self.shifter_index:
            return
        values = sorted(self.shifter_index.values())
        if values != list(range(len(values))):
            raise ValueError("shifter_index must be a bijection onto 0..S-1")
        k = self.n_ports * (self.n_ports - 1) // 2
        if len(self.su_core_a) != k or len(self.su_core_b) != k:
            raise ValueError(f"each SU core must have {k} MZI slots")

    @property
    def n_shifters(self) -> int:
        return len(self.shifter_index)

    @property
    def n_mzis(self) -> int:
        return 2 * self.n_ports + len(self.su_core_a) + len(self.su_core_b)

    def indices(self, part: str, role: str | None = None) -> list[int]:
        """Flat indices of every shifter in ``part`` (optionally one role), in slot order."""
        keys = [k for k in self.shifter_index if k[0] == part and (role is None or k[2] == role)]
        return [self.shifter_index[k] for k in sorted(keys, key=lambda k: self.shifter_index[k])]

    def core_index_array(self, part: str) -> np.ndarray:
        """``(K, 3)`` array of flat indices for (theta, alpha, beta) of each core slot."""
        slots = self.su_core_a if part == PART_CORE_A else self.su_core_b
        return np.array(
            [[self.shifter_index[(part, k, r)] for r in ("theta", "alpha", "beta")] for k in range(len(slots))]
        )

    def theta_mask(self) -> np.ndarray:
        """Boolean mask of shifters that set an MZI's internal (splitting) phase."""
        mask = np.zeros(self.n_shifters, dtype=bool)
        for (part, slot, role), i in self.shifter_index.items():
            mask[i] = role == "theta"
        return mask


def identity_state(topology: MeshTopology) -> np.ndarray:
    """Phase vector that makes every stage transparent (all MZIs in bar state)."""
    values = np.zeros(topology.n_shifters)
    values[topology.theta_mask()] = np.pi
    return values


def check_state(topology: MeshTopology, state) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    if state.shape[-1] != topology.n_shifters:
        raise ValueError(f"phase state has {state.shape[-1]} entries, topology has {topology.n_shifters} shifters")
    _check_finite(state)
    return state


def core_matrix(topology: MeshTopology, state) -> np.ndarray:
    """``U_B @ Sigma @ U_A`` without the input gates; batches over leading axes."""
    state = check_state(topology, state)
    n = topology.n_ports
    u_a = compose_su(topology.su_core_a, state[..., topology.core_index_array(PART_CORE_A)], n)
    u_b = compose_su(topology.su_core_b, state[..., topology.core_index_array(PART_CORE_B)], n)
    sigma = diag_stage_matrix(
        state[..., topology.indices(PART_DIAG, "theta")],
        state[..., topology.indices(PART_DIAG, "phase")],
    )
    return u_b @ sigma @ u_a


def chip_matrix(topology: MeshTopology, state, gates: Sequence[bool] | None = None) -> np.ndarray:
    """Full chip transfer matrix ``U_B @ Sigma @ U_A @ G``.

    ``gates`` defaults to all open.  The Part-1 gate shifters in ``state`` are
    bookkeeping for the drive electronics; the gate stage is purely on/off.
    """
    m = core_matrix(topology, state)
    if gates is None:
        return m
    gates = np.asarray(gates, dtype=bool)
    if gates.shape != (topology.n_ports,):
        raise ValueError(f"expected {topology.n_ports} gate flags")
    return m * gates.astype(float)


def propagate(m, field_in) -> np.ndarray:
    m = np.asarray(m)
    field_in = np.asarray(field_in, dtype=complex)
    if m.shape[-1] != field_in.shape[0]:
        raise ValueError(f"matrix with {m.shape[-1]} inputs cannot act on a {field_in.shape[0]}-vector")
    return m @ field_in


def output_powers(m, field_in) -> np.ndarray:
    return np.abs(propagate(m, field_in)) ** 2


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) < tol)


def decompose_unitary(u, tol: float = 1e-8, slots: Sequence[MziSlot] | None = None) -> np.ndarray:
    """Phases ``(K, 3)`` for a triangular core reproducing ``u`` up to input phases.

    Nulls the lower triangle one element at a time by undoing the left-most
    rotation first: ``compose_su(slots, phases) == u @ D`` for some unit-modulus
    diagonal ``D`` (the core has no input phase screen).  Already-null elements
    map to the bar state, so ``u = I`` yields all bar states.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("expected a square matrix")
    n = u.shape[0]
    if not is_unitary(u, tol):
        raise ValueError("matrix is not unitary within tolerance")
    if slots is None:
        slots = triangular_slots(n)
    phases = np.zeros((len(slots), 3))
    w = u.copy()
    for k in range(len(slots) - 1, -1, -1):
        slot = slots[k]
        a = slot.pair_lo
        col = n - 1 - slot.plane
        ua, ub = w[a, col], w[a + 1, col]
        if abs(ub) < 1e-14:
            theta, alpha = np.pi, 0.0
        else:
            theta = 2.0 * np.arctan2(abs(ua), abs(ub))
            alpha = np.angle(ua) - np.angle(ub) if abs(ua) > 0 else 0.0
        phases[k] = wrap_phase(np.array([theta, alpha, 0.0]))
        r = mzi_matrix(*phases[k])
        w[a : a + 2, :] = np.linalg.inv(r) @ w[a : a + 2, :]
    return phases


def input_phase_residual(u, v) -> tuple[float, np.ndarray]:
    """Distance ``min_D ||v - u D||_F`` over unit-modulus diagonal ``D``, and that ``D``."""
    u = np.asarray(u)
    v = np.asarray(v)
    overlap = np.einsum("ij,ij->j", u.conj(), v)
    d = np.exp(1j * np.angle(overlap))
    return float(np.linalg.norm(v - u * d)), d
