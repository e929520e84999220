"""Truncated Jaynes-Cummings simulator and the quantum-backflow witness.

A two-level atom couples resonantly to a single cavity mode with
H = g (sigma_+ (x) b + sigma_- (x) b^dag) on atom (x) cavity, the cavity
truncated at n_max Fock levels.  The dynamical supermap sandwiches a
trace-and-prepare channel between two stretches of joint evolution:

    M_{t,s}(rho) = Tr_Env U_{t-s} [ prepared (x) Tr_S U_s (rho (x) env) U_s^dag ] U_{t-s}^dag

Any dependence of the output on rho travels through the environment, so
S(M_{t,s}) measures how much the environment remembers; values above
log2(dim atom) = 1 certify quantum memory (the witness plotted by
backflow_scan).  A diagnostic interception replaces the mid-time
environment state by its Fock-basis measure-and-prepare version, which
caps the witness at zero.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import ChannelDescriptor
from .errors import TruncationLeak, ValidationError
from .sdp import DEFAULT_OPTIONS, SolverOptions
from .wires import LabeledOperator, Wire

__all__ = [
    "JcConfig",
    "BackflowGrid",
    "jc_unitary",
    "excitation_number",
    "supermap_output_channel",
    "backflow_scan",
    "write_grid_csv",
]

ATOM_NAME, ENV_NAME = "S", "Env"
LEAK_THRESHOLD = 1e-10


def _fock(n_levels: int, n: int) -> np.ndarray:
    m = np.zeros((n_levels, n_levels), dtype=np.complex128)
    m[n, n] = 1.0
    return m


def _ket_dm(d: int, k: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=np.complex128)
    m[k, k] = 1.0
    return m


@dataclass(frozen=True)
class JcConfig:
    """Coupling, truncation and the three states entering the supermap."""

    g: float = 1.0
    n_max: int = 4
    initial_env: LabeledOperator | None = None  # cavity state at time 0
    initial_atom: LabeledOperator | None = None  # atom state at time 0 (diagnostics)
    prepared_state: LabeledOperator | None = None  # atom state injected at time s

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("coupling g must be nonnegative")
        if self.n_max < 2:
            raise ValueError("cavity truncation n_max must be at least 2")
        levels = self.n_max + 1
        env = self.initial_env
        if env is None:
            env = LabeledOperator((Wire(ENV_NAME, levels),), _fock(levels, 1))
        atom = self.initial_atom
        if atom is None:
            atom = LabeledOperator((Wire(ATOM_NAME, 2),), np.eye(2) / 2)
        prep = self.prepared_state
        if prep is None:
            prep = LabeledOperator((Wire(ATOM_NAME, 2),), _ket_dm(2, 0))
        if env.dim != levels:
            raise ValueError(f"initial_env must have dimension {levels}")
        if atom.dim != 2 or prep.dim != 2:
            raise ValueError("atom states must be qubits")
        object.__setattr__(self, "initial_env", env)
        object.__setattr__(self, "initial_atom", atom)
        object.__setattr__(self, "prepared_state", prep)

    @classmethod
    def fig_defaults(cls, g: float = 1.0, n_max: int = 4) -> "JcConfig":
        """Cavity in the one-photon Fock state, atom maximally mixed."""
        return cls(g=g, n_max=n_max)

    def max_excitation(self) -> int:
        """Largest total excitation reachable, counting the injected state."""
        env_top = _top_support(self.initial_env.data)
        prep_top = _top_support(self.prepared_state.data)
        return 1 + env_top + prep_top

    def check_truncation(self) -> None:
        """The dynamics is exact iff the broken top sector stays unreachable."""
        if self.max_excitation() > self.n_max:
            raise TruncationLeak(
                f"max excitation {self.max_excitation()} exceeds the cavity "
                f"truncation n_max = {self.n_max}"
            )

    def to_json_dict(self) -> dict:
        return {
            "g": self.g,
            "n_max": self.n_max,
            "initial_env": self.initial_env.to_json_dict(),
            "initial_atom": self.initial_atom.to_json_dict(),
            "prepared_state": self.prepared_state.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "JcConfig":
        def state(key, maker):
            raw = payload.get(key)
            if raw is None:
                return None
            if isinstance(raw, dict) and "wires" in raw:
                return LabeledOperator.from_json_dict(raw)
            return maker(raw)

        n_max = int(payload.get("n_max", 4))
        levels = n_max + 1

        def env_maker(raw):
            if isinstance(raw, dict) and "fock" in raw:
                return LabeledOperator(
                    (Wire(ENV_NAME, levels),), _fock(levels, int(raw["fock"]))
                )
            raise ValueError(f"cannot interpret initial_env spec {raw!r}")

        def atom_maker(raw):
            if raw == "maximally_mixed":
                return LabeledOperator((Wire(ATOM_NAME, 2),), np.eye(2) / 2)
            if isinstance(raw, dict) and "ket" in raw:
                return LabeledOperator((Wire(ATOM_NAME, 2),), _ket_dm(2, int(raw["ket"])))
            raise ValueError(f"cannot interpret atom state spec {raw!r}")

        return cls(
            g=float(payload.get("g", 1.0)),
            n_max=n_max,
            initial_env=state("initial_env", env_maker),
            initial_atom=state("initial_atom", atom_maker),
            prepared_state=state("prepared_state", atom_maker),
        )

    @classmethod
    def from_json_file(cls, path) -> "JcConfig":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def _top_support(rho: np.ndarray, tol: float = 1e-12) -> int:
    diag = np.abs(np.diag(rho))
    nz = np.where(diag > tol)[0]
    return int(nz[-1]) if nz.size else 0


class _Engine:
    """Eigendecomposition of the JC Hamiltonian, shared across a scan."""

    def __init__(self, g: float, n_max: int):
        levels = n_max + 1
        lower = np.diag(np.sqrt(np.arange(1, levels)), 1)
        raising = np.array([[0.0, 0.0], [1.0, 0.0]])  # |e><g| with |1> = excited
        h = g * (np.kron(raising, lower) + np.kron(raising.T, lower.T))
        self.n_max = n_max
        self.dim = 2 * levels
        self.evals, self.evecs = np.linalg.eigh(h)
        self._cache: dict[float, np.ndarray] = {}

    def unitary(self, tau: float) -> np.ndarray:
        u = self._cache.get(tau)
        if u is None:
            phases = np.exp(-1j * self.evals * tau)
            u = (self.evecs * phases) @ self.evecs.conj().T
            self._cache[tau] = u
        return u


_ENGINES: dict[tuple[float, int], _Engine] = {}


def _engine(cfg: JcConfig) -> _Engine:
    key = (cfg.g, cfg.n_max)
    if key not in _ENGINES:
        _ENGINES[key] = _Engine(cfg.g, cfg.n_max)
    return _ENGINES[key]


def excitation_number(n_max: int) -> np.ndarray:
    """sigma_+ sigma_- (x) id + id (x) b^dag b on the truncated space."""
    levels = n_max + 1
    atom = np.diag([0.0, 1.0])
    cavity = np.diag(np.arange(levels, dtype=float))
    return np.kron(atom, np.eye(levels)) + np.kron(np.eye(2), cavity)


def jc_unitary(cfg: JcConfig, t1: float, t0: float = 0.0) -> LabeledOperator:
    """exp(-i H (t1 - t0)) on atom (x) cavity (resonant frame, hbar = 1)."""
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    cfg.check_truncation()
    u = _engine(cfg).unitary(t1 - t0)
    wires = (Wire(ATOM_NAME, 2), Wire(ENV_NAME, cfg.n_max + 1))
    return LabeledOperator(wires, u)


def _leak_of(joint: np.ndarray, n_max: int) -> float:
    """Population of the frozen |e, n_max> state, the only mis-evolved one."""
    levels = n_max + 1
    idx = 1 * levels + n_max
    return abs(joint[idx, idx])


def supermap_output_channel(
    cfg: JcConfig,
    s: float,
    t: float,
    intercept: str | None = None,
    tol: float = 1e-8,
) -> ChannelDescriptor:
    """Choi operator of M_{t,s}, the supermap output on the atom.

    The operator basis |i><j| is propagated to time s, the atom is replaced
    by the prepared state, and the joint evolves on to time t.  With
    intercept="dephase" the mid-time environment is measured and reprepared
    in the Fock basis, removing all quantum memory.
    """
    if not 0.0 <= s <= t:
        raise ValueError("need 0 <= s <= t")
    if intercept not in (None, "dephase"):
        raise ValueError(f"unknown intercept mode {intercept!r}")
    cfg.check_truncation()
    engine = _engine(cfg)
    levels = cfg.n_max + 1
    u1 = engine.unitary(s)
    u2 = engine.unitary(t - s)
    env0 = cfg.initial_env.data
    prep = cfg.prepared_state.data

    choi = np.zeros((4, 4), dtype=np.complex128)
    choi_t = choi.reshape(2, 2, 2, 2)
    for i in range(2):
        for j in range(2):
            probe = np.zeros((2, 2), dtype=np.complex128)
            probe[i, j] = 1.0
            joint = u1 @ np.kron(probe, env0) @ u1.conj().T
            if i == j and _leak_of(joint, cfg.n_max) > LEAK_THRESHOLD:
                raise TruncationLeak(
                    "population reached the truncated sector during the first "
                    "evolution stretch"
                )
            env_mid = np.trace(joint.reshape(2, levels, 2, levels), axis1=0, axis2=2)
            if intercept == "dephase":
                env_mid = np.diag(np.diag(env_mid))
            joint2 = u2 @ np.kron(prep, env_mid) @ u2.conj().T
            if i == j and _leak_of(joint2, cfg.n_max) > LEAK_THRESHOLD:
                raise TruncationLeak(
                    "population reached the truncated sector during the second "
                    "evolution stretch"
                )
            out = np.trace(
                joint2.reshape(2, levels, 2, levels), axis1=1, axis2=3
            )
            choi_t[i, :, j, :] = out
    op = LabeledOperator((Wire("A", 2), Wire("B", 2)), choi)
    ch = ChannelDescriptor(op, ("A",), ("B",))
    res = ch.validation_residuals()
    worst = max(res["hermiticity"], max(0.0, -res["min_eigenvalue"]), res["tp"])
    if worst > tol:
        raise ValidationError(
            f"supermap output violates CPTP by {worst:.2e}", residual=worst
        )
    return ch


@dataclass(frozen=True)
class BackflowGrid:
    """Witness values S(M_{t,s}) - log2(dim atom) over an (s, t) grid.

    Entries with s > t are NaN; positive entries certify quantum memory.
    """

    s_values: np.ndarray
    t_values: np.ndarray
    witness: np.ndarray  # shape (len(s_values), len(t_values))

    def max_witness(self) -> float:
        return float(np.nanmax(self.witness))

    def row(self, s_index: int) -> np.ndarray:
        return self.witness[s_index]


def backflow_scan(
    cfg: JcConfig,
    s_grid: Sequence[float],
    t_grid: Sequence[float],
    intercept: str | None = None,
    opts: SolverOptions = DEFAULT_OPTIONS,
    jobs: int = 1,
) -> BackflowGrid:
    """Scan the witness over all grid pairs with s <= t.

    Cells are independent once the unitary cache is warm, so they may be
    evaluated by a small thread pool (jobs > 1); results are written by
    index, keeping the output deterministic.
    """
    from .signalling import signalling_power

    s_values = np.asarray(s_grid, dtype=float)
    t_values = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(s_values) < 0) or np.any(np.diff(t_values) < 0):
        raise ValueError("grids must be sorted")
    cells = [
        (a, b, s, t)
        for a, s in enumerate(s_values)
        for b, t in enumerate(t_values)
        if s <= t
    ]
    for _, _, s, t in cells[:1]:  # warm the eigendecomposition cache
        supermap_output_channel(cfg, s, t, intercept=intercept)

    def value(cell):
        _, _, s, t = cell
        ch = supermap_output_channel(cfg, s, t, intercept=intercept)
        return signalling_power(ch, opts).witness_value

    witness = np.full((s_values.size, t_values.size), np.nan)
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for (a, b, _, _), w in zip(cells, pool.map(value, cells)):
                witness[a, b] = w
    else:
        for cell in cells:
            witness[cell[0], cell[1]] = value(cell)
    return BackflowGrid(s_values=s_values, t_values=t_values, witness=witness)


def write_grid_csv(grid: BackflowGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "t", "witness"])
        for a, s in enumerate(grid.s_values):
            for b, t in enumerate(grid.t_values):
                w = grid.witness[a, b]
                if not np.isnan(w):
                    writer.writerow([f"{s:.9g}", f"{t:.9g}", f"{w:.9g}"])
