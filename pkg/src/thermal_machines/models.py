"""Hamiltonians of three-level, three-body, engine and clock absorption machines.

Tensor factors are always ordered (c, h, w). Local Hamiltonians are
``sum_n n * omega |n><n|`` so every subsystem has a single transition frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import dag, embed

MAX_DIM = 200
LABELS = ("c", "h", "w")


@dataclass(frozen=True)
class SubsystemSpec:
    label: str
    kind: str  # "qubit" | "ladder" | "oscillator" | "transition"
    omega: float
    levels: int = 2

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown subsystem label {self.label!r}")
        if self.kind not in ("qubit", "ladder", "oscillator", "transition"):
            raise ValueError(f"unknown subsystem kind {self.kind!r}")
        if not self.omega > 0:
            raise ValueError(f"subsystem {self.label}: frequency must be positive")
        if self.kind == "qubit" and self.levels != 2:
            raise ValueError("a qubit has exactly two levels")
        if self.levels < 2:
            raise ValueError(f"subsystem {self.label}: needs at least 2 levels")


def qubit(label, omega):
    return SubsystemSpec(label, "qubit", omega, 2)


def ladder(label, omega, levels):
    return SubsystemSpec(label, "ladder", omega, levels)


def oscillator(label, omega, n_max=3):
    return SubsystemSpec(label, "oscillator", omega, n_max + 1)


def local_hamiltonian(spec: SubsystemSpec) -> np.ndarray:
    return np.diag(spec.omega * np.arange(spec.levels)).astype(complex)


def lowering_operator(spec: SubsystemSpec) -> np.ndarray:
    """sigma^- for qubits, sum |n><n+1| for ladders, truncated a for oscillators."""
    n = spec.levels
    if spec.kind == "oscillator":
        return np.diag(np.sqrt(np.arange(1, n)), k=1).astype(complex)
    return np.diag(np.ones(n - 1), k=1).astype(complex)


@dataclass
class MachineModel:
    """A machine Hamiltonian H = H_free + H_int plus the operators baths attach to.

    ``local_jumps[label]`` lists the lowering operators used by a local
    dissipator on that subsystem; ``bath_coupling_ops[label]`` is the operator a
    global bath couples through.
    """

    subsystems: list
    g: float
    topology: str  # "three-level" | "fridge" | "engine"
    h_free: np.ndarray
    h_int: np.ndarray
    dims: tuple
    frequencies: dict
    local_hamiltonians: dict
    lowering_ops: dict
    local_jumps: dict
    bath_coupling_ops: dict
    interaction_op: np.ndarray | None = None  # B with H_int = g (B + B^dag)

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.h_free + self.h_int

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def labels(self):
        return [s.label for s in self.subsystems]

    def subsystem(self, label) -> SubsystemSpec:
        for s in self.subsystems:
            if s.label == label:
                return s
        raise KeyError(f"machine has no subsystem {label!r}")

    def basis_index(self, *levels) -> int:
        return int(np.ravel_multi_index(levels, self.dims))


@dataclass(frozen=True)
class ClockModel:
    engine: MachineModel
    decay_rate: float
    photon_energy: float
    decay_op: np.ndarray = field(repr=False, default=None)

    @property
    def levels(self) -> int:
        return self.engine.subsystem("w").levels


def _check_frequencies(omega_c, omega_h):
    if not 0 < omega_c < omega_h:
        raise ValueError(f"need 0 < omega_c < omega_h, got {omega_c}, {omega_h}")


def build_three_level(omega_c: float, omega_h: float) -> MachineModel:
    """Three levels with energies (0, omega_c, omega_h); each transition feeds one bath."""
    _check_frequencies(omega_c, omega_h)
    omega_w = omega_h - omega_c
    ket = np.eye(3, dtype=complex)
    a_c = np.outer(ket[0], ket[1])
    a_h = np.outer(ket[0], ket[2])
    a_w = np.outer(ket[1], ket[2])
    h = np.diag([0.0, omega_c, omega_h]).astype(complex)
    lowering = {"c": a_c, "h": a_h, "w": a_w}
    freqs = {"c": omega_c, "h": omega_h, "w": omega_w}
    return MachineModel(
        subsystems=[SubsystemSpec(lab, "transition", freqs[lab]) for lab in LABELS],
        g=0.0,
        topology="three-level",
        h_free=h,
        h_int=np.zeros((3, 3), dtype=complex),
        dims=(3,),
        frequencies=freqs,
        local_hamiltonians={lab: h for lab in LABELS},
        lowering_ops=lowering,
        local_jumps={lab: [op] for lab, op in lowering.items()},
        bath_coupling_ops={lab: op + dag(op) for lab, op in lowering.items()},
    )


def _assemble(specs, g, topology, interaction):
    dims = tuple(s.levels for s in specs)
    if int(np.prod(dims)) > MAX_DIM:
        raise ValueError(f"total Hilbert dimension {int(np.prod(dims))} exceeds {MAX_DIM}")
    h_loc = {s.label: embed(local_hamiltonian(s), dims, i) for i, s in enumerate(specs)}
    low = {s.label: embed(lowering_operator(s), dims, i) for i, s in enumerate(specs)}
    jumps = {}
    for i, s in enumerate(specs):
        if s.kind == "ladder":
            jumps[s.label] = [
                embed(np.outer(np.eye(s.levels)[n], np.eye(s.levels)[n + 1]), dims, i)
                for n in range(s.levels - 1)
            ]
        else:
            jumps[s.label] = [low[s.label]]
    b = interaction(low)
    return MachineModel(
        subsystems=list(specs),
        g=float(g),
        topology=topology,
        h_free=sum(h_loc.values()),
        h_int=g * (b + dag(b)),
        dims=dims,
        frequencies={s.label: s.omega for s in specs},
        local_hamiltonians=h_loc,
        lowering_ops=low,
        local_jumps=jumps,
        bath_coupling_ops={lab: op + dag(op) for lab, op in low.items()},
        interaction_op=b,
    )


def _make_spec(label, kind, omega):
    """``kind`` is "qubit", ("oscillator", n_max) or ("ladder", levels)."""
    if kind == "qubit":
        return qubit(label, omega)
    name, size = kind
    if name == "oscillator":
        if size < 1:
            raise ValueError("oscillator truncation must keep at least 2 levels")
        return oscillator(label, omega, size)
    if name == "ladder":
        return ladder(label, omega, size)
    raise ValueError(f"unknown subsystem kind {kind!r}")


def build_three_body(kinds, omega_c: float, omega_h: float, g: float) -> MachineModel:
    """Three-body fridge with H_int = g (A_c A_h^dag A_w + h.c.).

    ``kinds`` maps each of c, h, w to "qubit", ("oscillator", n_max) or
    ("ladder", levels); a single string applies to all three.
    """
    _check_frequencies(omega_c, omega_h)
    if g < 0:
        raise ValueError("coupling g must be non-negative")
    if isinstance(kinds, (str, tuple)):
        kinds = {lab: kinds for lab in LABELS}
    omegas = {"c": omega_c, "h": omega_h, "w": omega_h - omega_c}
    specs = [_make_spec(lab, kinds[lab], omegas[lab]) for lab in LABELS]
    return _assemble(specs, g, "fridge", lambda a: a["c"] @ dag(a["h"]) @ a["w"])


def build_engine(omega_c: float, omega_h: float, d: int, g: float) -> MachineModel:
    """Two qubits c, h driving a d-level ladder load w.

    H_int = g (A_c^dag A_h A_w^dag + h.c.), which moves |0,1,n> to |1,0,n+1>.
    """
    _check_frequencies(omega_c, omega_h)
    if d < 2:
        raise ValueError("the load ladder needs at least 2 levels")
    if g < 0:
        raise ValueError("coupling g must be non-negative")
    specs = [qubit("c", omega_c), qubit("h", omega_h), ladder("w", omega_h - omega_c, d)]
    return _assemble(specs, g, "engine", lambda a: dag(a["c"]) @ a["h"] @ dag(a["w"]))


def build_clock(omega_c, omega_h, d, g, decay_rate) -> ClockModel:
    """Engine whose top ladder level decays to the ground level, emitting one tick."""
    if d < 3:
        raise ValueError("a clock ladder needs at least 3 levels")
    if not decay_rate > 0:
        raise ValueError("clock decay rate must be positive")
    eng = build_engine(omega_c, omega_h, d, g)
    kets = np.eye(d)
    decay = embed(np.outer(kets[0], kets[d - 1]), eng.dims, 2)
    return ClockModel(eng, float(decay_rate), (d - 1) * (omega_h - omega_c), decay)


def clock_heat_per_tick(clock: ClockModel) -> tuple[float, float]:
    """(Q_h, Q_c): heat drawn from the hot bath and dumped in the cold bath per tick."""
    n = clock.levels - 1
    return n * clock.engine.frequencies["h"], n * clock.engine.frequencies["c"]
