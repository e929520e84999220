"""Choi representations, the link product, superchannels and combs.

Wire identity (the name), not position, drives every contraction here.
Callers rename wires explicitly when two objects must share or must not
share a wire.  All Choi operators follow the basis convention fixed in
:mod:`sigpow.wires`: CJ(map) = sum_ij |i><j| (x) map(|i><j|).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    DimConflict,
    DimensionMismatch,
    NotTracePreserving,
    NotCompletelyPositive,
    OutputNotCPTP,
    ValidationError,
    WireMismatch,
)
from .wires import LabeledOperator, Wire, check_hermitian_psd, identity_operator

__all__ = [
    "link",
    "ChannelDescriptor",
    "SuperchannelDescriptor",
    "Instrument",
    "CombReport",
    "apply_channel",
    "apply_superchannel",
    "channel_from_kraus",
    "channel_from_map",
    "channel_from_choi",
    "identity_channel",
    "trace_and_prepare",
    "completely_depolarizing",
    "weyl_unitary_matrix",
    "weyl_unitaries",
    "maximally_entangled_state",
    "choi_identity_block",
    "unitary_channel",
    "identity_superchannel",
    "superchannel_from_parts",
    "is_bistochastic_superchannel",
    "validate_comb",
    "haar_unitary",
    "random_state",
    "random_pure_state",
    "random_cptp",
    "random_povm",
    "random_holevo_channel",
    "random_bistochastic_superchannel",
]

DEFAULT_VALIDATION_TOL = 1e-7  # post-SDP objects carry solver noise


# ---------------------------------------------------------------------------
# link product
# ---------------------------------------------------------------------------

def link(u: LabeledOperator, v: LabeledOperator) -> LabeledOperator:
    """Link product u * v: contraction over the wires u and v share.

    Tr_shared[(u^{T_shared} (x) id) (v (x) id)] on the symmetric difference
    of the wire sets, ordered u-only wires then v-only wires.  For disjoint
    wire sets this is the tensor product; for identical wire sets it is the
    scalar Tr(u^T v) on zero wires.
    """
    shared = [w.name for w in u.wires if w.name in set(v.names)]
    for name in shared:
        if u.wire(name).dim != v.wire(name).dim:
            raise DimConflict(
                f"wire {name!r} has dim {u.wire(name).dim} in one factor "
                f"and {v.wire(name).dim} in the other"
            )
    u_only = [w for w in u.wires if w.name not in set(shared)]
    v_only = [w for w in v.wires if w.name not in set(shared)]

    left = u.partial_transpose(shared)
    for w in v_only:
        left = left.tensor(LabeledOperator((w,), np.eye(w.dim)))
    right = v
    for w in u_only:
        right = right.tensor(LabeledOperator((w,), np.eye(w.dim)))
    right = right.permute(left.names)
    prod = LabeledOperator(left.wires, left.data @ right.data)
    out = prod.partial_trace(shared)
    order = [w.name for w in u_only] + [w.name for w in v_only]
    return out.permute(order)


# ---------------------------------------------------------------------------
# channels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelDescriptor:
    """A CPTP map in Choi form with a declared input/output wire split."""

    op: LabeledOperator
    input_wires: tuple[str, ...]
    output_wires: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "input_wires", tuple(self.input_wires))
        object.__setattr__(self, "output_wires", tuple(self.output_wires))
        declared = set(self.input_wires) | set(self.output_wires)
        if declared != set(self.op.names) or len(self.input_wires) + len(
            self.output_wires
        ) != len(self.op.names):
            raise WireMismatch(
                f"declared wires {self.input_wires}+{self.output_wires} do not "
                f"partition the operator wires {self.op.names}"
            )

    @property
    def dim_in(self) -> int:
        return int(np.prod([self.op.wire(n).dim for n in self.input_wires], dtype=np.int64))

    @property
    def dim_out(self) -> int:
        return int(np.prod([self.op.wire(n).dim for n in self.output_wires], dtype=np.int64))

    def validation_residuals(self) -> dict[str, float]:
        """PSD and trace-preservation residuals of the Choi operator."""
        rep = check_hermitian_psd(self.op)
        marginal = self.op.partial_trace(self.output_wires)
        eye = identity_operator(*marginal.wires)
        return {
            "hermiticity": rep.max_asymmetry,
            "min_eigenvalue": rep.min_eigenvalue,
            "tp": (marginal - eye).max_abs(),
        }

    def validate(self, tol: float = DEFAULT_VALIDATION_TOL) -> "ChannelDescriptor":
        res = self.validation_residuals()
        if res["hermiticity"] > tol or res["min_eigenvalue"] < -tol:
            raise NotCompletelyPositive(
                f"Choi operator is not PSD (asym {res['hermiticity']:.2e}, "
                f"min eig {res['min_eigenvalue']:.2e})",
                residual=min(res["min_eigenvalue"], -res["hermiticity"]),
            )
        if res["tp"] > tol:
            raise NotTracePreserving(
                f"output marginal differs from identity by {res['tp']:.2e}",
                residual=res["tp"],
            )
        return self

    def tensor(self, other: "ChannelDescriptor") -> "ChannelDescriptor":
        return ChannelDescriptor(
            self.op.tensor(other.op),
            self.input_wires + other.input_wires,
            self.output_wires + other.output_wires,
        )

    def rename(self, mapping) -> "ChannelDescriptor":
        return ChannelDescriptor(
            self.op.rename(mapping),
            tuple(mapping.get(n, n) for n in self.input_wires),
            tuple(mapping.get(n, n) for n in self.output_wires),
        )


def channel_from_choi(
    op: LabeledOperator,
    input_wires: str | Sequence[str],
    output_wires: str | Sequence[str],
    tol: float = DEFAULT_VALIDATION_TOL,
) -> ChannelDescriptor:
    if isinstance(input_wires, str):
        input_wires = (input_wires,)
    if isinstance(output_wires, str):
        output_wires = (output_wires,)
    return ChannelDescriptor(op, tuple(input_wires), tuple(output_wires)).validate(tol)


def channel_from_kraus(
    kraus: Sequence[np.ndarray],
    input_wire: Wire,
    output_wire: Wire,
    tol: float = DEFAULT_VALIDATION_TOL,
) -> ChannelDescriptor:
    """Choi operator sum_k ||K_k>><<K_k|| with ||K>> = sum_i |i> (x) K|i>."""
    d_in, d_out = input_wire.dim, output_wire.dim
    mats = [np.asarray(k, dtype=np.complex128) for k in kraus]
    for m in mats:
        if m.shape != (d_out, d_in):
            raise DimensionMismatch(
                f"Kraus operator shape {m.shape}, expected {(d_out, d_in)}"
            )
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    for m in mats:
        vec = m.T.reshape(d_in * d_out)  # ||K>>[(i,o)] = K[o,i]
        choi += np.outer(vec, vec.conj())
    op = LabeledOperator((input_wire, output_wire), choi)
    return ChannelDescriptor(op, (input_wire.name,), (output_wire.name,)).validate(tol)


def channel_from_map(
    fn: Callable[[np.ndarray], np.ndarray],
    input_wire: Wire,
    output_wire: Wire,
    tol: float = DEFAULT_VALIDATION_TOL,
) -> ChannelDescriptor:
    """Choi operator of a map given as a callable on density matrices."""
    d_in, d_out = input_wire.dim, output_wire.dim
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    t = choi.reshape(d_in, d_out, d_in, d_out)
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in), dtype=np.complex128)
            e[i, j] = 1.0
            t[i, :, j, :] = fn(e)
    op = LabeledOperator((input_wire, output_wire), choi)
    return ChannelDescriptor(op, (input_wire.name,), (output_wire.name,)).validate(tol)


def apply_channel(ch: ChannelDescriptor, state: LabeledOperator) -> LabeledOperator:
    """Apply a channel to a state: Tr_in[(rho^T (x) id_out) N]."""
    if set(state.names) != set(ch.input_wires):
        raise WireMismatch(
            f"state wires {state.names} do not match channel inputs {ch.input_wires}"
        )
    return link(ch.op, state)


def identity_channel(
    d: int, input_name: str = "A", output_name: str = "B"
) -> ChannelDescriptor:
    return channel_from_kraus(
        [np.eye(d)], Wire(input_name, d), Wire(output_name, d)
    )


def unitary_channel(
    u: np.ndarray, input_name: str = "A", output_name: str = "B"
) -> ChannelDescriptor:
    d = u.shape[0]
    return channel_from_kraus([u], Wire(input_name, d), Wire(output_name, d))


def trace_and_prepare(
    prepared: LabeledOperator, input_wire: Wire
) -> ChannelDescriptor:
    """The channel rho -> Tr(rho) * prepared, with Choi id_in (x) prepared."""
    op = identity_operator(input_wire).tensor(prepared)
    return ChannelDescriptor(
        op, (input_wire.name,), tuple(prepared.names)
    ).validate()


def completely_depolarizing(
    d: int, input_name: str = "A", output_name: str = "B"
) -> ChannelDescriptor:
    state = LabeledOperator((Wire(output_name, d),), np.eye(d) / d)
    return trace_and_prepare(state, Wire(input_name, d))


def maximally_entangled_state(wire_a: Wire, wire_b: Wire) -> LabeledOperator:
    """Normalized projector onto sum_i |ii> / sqrt(d)."""
    if wire_a.dim != wire_b.dim:
        raise DimConflict("maximally entangled state needs equal dims")
    d = wire_a.dim
    vec = np.eye(d).reshape(d * d) / np.sqrt(d)
    return LabeledOperator((wire_a, wire_b), np.outer(vec, vec.conj()))


def choi_identity_block(wire_a: Wire, wire_b: Wire) -> LabeledOperator:
    """Unnormalized sum_ij |ii><jj| (trace d), the Choi of the identity."""
    if wire_a.dim != wire_b.dim:
        raise DimConflict("identity Choi block needs equal dims")
    d = wire_a.dim
    vec = np.eye(d).reshape(d * d)
    return LabeledOperator((wire_a, wire_b), np.outer(vec, vec))


def weyl_unitary_matrix(d: int, k: int, ell: int) -> np.ndarray:
    """V_{k,l} = X^k Z^l with X|j> = |j+1 mod d>, Z|j> = exp(2 pi i j / d)|j>."""
    x = np.roll(np.eye(d), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return np.linalg.matrix_power(x, k) @ np.linalg.matrix_power(z, ell)


def weyl_unitaries(
    d: int, input_name: str = "A", output_name: str = "B"
) -> list[ChannelDescriptor]:
    """Choi operators of the d^2 Weyl unitaries, a maximally entangled basis."""
    if d < 2:
        raise ValueError("need d >= 2")
    return [
        unitary_channel(weyl_unitary_matrix(d, k, ell), input_name, output_name)
        for k in range(d)
        for ell in range(d)
    ]


# ---------------------------------------------------------------------------
# superchannels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuperchannelDescriptor:
    """Choi operator of a channel transformation with declared wire roles.

    Maps channels from ``inner_in`` to ``inner_out`` into channels from
    ``outer_in`` to ``outer_out``.  The two-comb conditions are
    Tr_outer_out T = id_inner_out (x) L and Tr_inner_in L = id_outer_in,
    with L = Tr_{inner_out, outer_out} T / dim(inner_out).
    """

    op: LabeledOperator
    outer_in: tuple[str, ...]
    inner_in: tuple[str, ...]
    inner_out: tuple[str, ...]
    outer_out: tuple[str, ...]

    def __post_init__(self):
        for name in ("outer_in", "inner_in", "inner_out", "outer_out"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        declared = (
            self.outer_in + self.inner_in + self.inner_out + self.outer_out
        )
        if sorted(declared) != sorted(self.op.names):
            raise WireMismatch(
                f"roles {declared} do not partition operator wires {self.op.names}"
            )

    def _dim(self, names: Iterable[str]) -> int:
        return int(np.prod([self.op.wire(n).dim for n in names], dtype=np.int64))

    def comb_residuals(self) -> dict[str, float]:
        return _two_comb_residuals(
            self.op, self.outer_in, self.inner_in, self.inner_out, self.outer_out
        )

    def validate(self, tol: float = DEFAULT_VALIDATION_TOL) -> "SuperchannelDescriptor":
        res = self.comb_residuals()
        bad = {k: v for k, v in res.items() if v > tol}
        if bad:
            raise ValidationError(
                f"superchannel comb conditions violated: {bad}",
                residual=max(bad.values()),
            )
        return self


def _two_comb_residuals(
    op: LabeledOperator,
    first_in: tuple[str, ...],
    first_out: tuple[str, ...],
    second_in: tuple[str, ...],
    second_out: tuple[str, ...],
) -> dict[str, float]:
    """Residuals of the 2-comb conditions for teeth (first_in -> first_out),
    (second_in -> second_out), in that causal order."""
    rep = check_hermitian_psd(op)
    d_second_in = int(np.prod([op.wire(n).dim for n in second_in], dtype=np.int64))
    reduced = op.partial_trace(second_out)
    low = op.partial_trace(tuple(second_out) + tuple(second_in)) / d_second_in
    expected = low.tensor(identity_operator(*[op.wire(n) for n in second_in]))
    expected = expected.permute(reduced.names)
    low_marginal = low.partial_trace(first_out)
    eye = identity_operator(*[op.wire(n) for n in first_in])
    return {
        "hermiticity": rep.max_asymmetry,
        "psd": max(0.0, -rep.min_eigenvalue),
        "tooth2": (reduced - expected).max_abs(),
        "tooth1": (low_marginal.permute(eye.names) - eye).max_abs(),
    }


def identity_superchannel(
    d: int,
    outer_in: str = "A_pre",
    inner_in: str = "A",
    inner_out: str = "B",
    outer_out: str = "B_post",
) -> SuperchannelDescriptor:
    op = choi_identity_block(Wire(outer_in, d), Wire(inner_in, d)).tensor(
        choi_identity_block(Wire(inner_out, d), Wire(outer_out, d))
    )
    return SuperchannelDescriptor(
        op, (outer_in,), (inner_in,), (inner_out,), (outer_out,)
    ).validate()


def superchannel_from_parts(
    pre: ChannelDescriptor,
    post: ChannelDescriptor,
    memory: ChannelDescriptor | None = None,
) -> SuperchannelDescriptor:
    """Assemble T[N] = post o (N (x) memory) o pre from its parts.

    ``pre`` maps outer_in to inner_in + memory-in wires, ``post`` maps
    inner_out + memory-out wires to outer_out.  Wire names must already
    agree: the memory channel (if any) shares its input wires with pre's
    outputs and its output wires with post's inputs.  Without a memory
    channel, pre's extra output wires are linked directly to post.
    """
    t = link(pre.op, memory.op) if memory is not None else pre.op
    t = link(t, post.op)
    mem_in = tuple(memory.input_wires) if memory is not None else ()
    mem_out = tuple(memory.output_wires) if memory is not None else ()
    inner_in = tuple(n for n in pre.output_wires if n not in mem_in)
    inner_out = tuple(n for n in post.input_wires if n not in mem_out)
    direct = tuple(n for n in pre.output_wires if n in post.input_wires)
    inner_in = tuple(n for n in inner_in if n not in direct)
    inner_out = tuple(n for n in inner_out if n not in direct)
    return SuperchannelDescriptor(
        t, tuple(pre.input_wires), inner_in, inner_out, tuple(post.output_wires)
    ).validate()


def apply_superchannel(
    t: SuperchannelDescriptor, n: ChannelDescriptor, tol: float = DEFAULT_VALIDATION_TOL
) -> ChannelDescriptor:
    """T * N: transform the channel n, validating the output channel."""
    if set(n.input_wires) != set(t.inner_in) or set(n.output_wires) != set(t.inner_out):
        raise WireMismatch(
            f"channel wires ({n.input_wires}->{n.output_wires}) do not match "
            f"the superchannel slot ({t.inner_in}->{t.inner_out})"
        )
    out = link(t.op, n.op)
    out = out.permute(t.outer_in + t.outer_out)
    ch = ChannelDescriptor(out, t.outer_in, t.outer_out)
    res = ch.validation_residuals()
    worst = max(res["hermiticity"], max(0.0, -res["min_eigenvalue"]), res["tp"])
    if worst > tol:
        raise OutputNotCPTP(
            f"superchannel output violates CPTP by {worst:.2e}", residual=worst
        )
    return ch


def is_bistochastic_superchannel(
    t: SuperchannelDescriptor, tol: float = DEFAULT_VALIDATION_TOL
) -> tuple[bool, dict[str, float]]:
    """Check the reversed comb conditions (inner_out -> inner_in direction).

    True iff t also represents a superchannel taking channels inner_out ->
    inner_in into channels outer_out -> outer_in, i.e. the comb hierarchy
    holds with the teeth (outer_out -> inner_out), (inner_in -> outer_in).
    """
    res = _two_comb_residuals(
        t.op, t.outer_out, t.inner_out, t.inner_in, t.outer_in
    )
    return max(res.values()) <= tol, res


# ---------------------------------------------------------------------------
# combs and instruments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CombReport:
    valid: bool
    first_violation: str | None
    residuals: dict[str, float] = field(default_factory=dict)


def validate_comb(
    op: LabeledOperator,
    pairs: Sequence[tuple[Sequence[str] | str | None, Sequence[str] | str | None]],
    tol: float = DEFAULT_VALIDATION_TOL,
) -> CombReport:
    """Validate the comb trace hierarchy for teeth (in_j, out_j) in causal order.

    Level 1 is global normalization Tr(op) = prod of tooth input dims, then
    level j+1 checks Tr_{out_j} R_j = id_{in_j} (x) R_{j-1} from the last
    tooth down.  A tooth leg may be None (or an empty list) for a trivial
    wire.  Diagnostic only: violations are reported, not raised.
    """

    def norm(leg) -> tuple[str, ...]:
        if leg is None:
            return ()
        if isinstance(leg, str):
            return (leg,)
        return tuple(leg)

    teeth = [(norm(i), norm(o)) for i, o in pairs]
    declared = [n for i, o in teeth for n in i + o]
    if sorted(declared) != sorted(op.names):
        raise WireMismatch(
            f"teeth wires {declared} do not partition operator wires {op.names}"
        )

    residuals: dict[str, float] = {}
    rep = check_hermitian_psd(op)
    residuals["psd"] = max(rep.max_asymmetry, max(0.0, -rep.min_eigenvalue))
    first = "psd" if residuals["psd"] > tol else None

    d_in_total = int(
        np.prod([op.wire(n).dim for i, _ in teeth for n in i], dtype=np.int64)
    )
    residuals["trace"] = abs(op.trace() - d_in_total)
    if first is None and residuals["trace"] > tol * max(1, d_in_total):
        first = "trace"

    current = op
    for j in range(len(teeth), 0, -1):
        in_j, out_j = teeth[j - 1]
        d_in_j = int(np.prod([op.wire(n).dim for n in in_j], dtype=np.int64))
        reduced = current.partial_trace(out_j)
        lower = reduced.partial_trace(in_j) / d_in_j
        if in_j:
            expected = lower.tensor(
                identity_operator(*[op.wire(n) for n in in_j])
            ).permute(reduced.names)
        else:
            expected = lower
        residuals[f"tooth{j}"] = (reduced - expected).max_abs()
        if first is None and residuals[f"tooth{j}"] > tol:
            first = f"tooth{j}"
        current = lower
    return CombReport(valid=first is None, first_violation=first, residuals=residuals)


@dataclass(frozen=True)
class Instrument:
    """A collection of CJ-picture instrument effects summing to a channel."""

    effects: tuple[LabeledOperator, ...]
    input_wires: tuple[str, ...]
    output_wires: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "effects", tuple(self.effects))
        object.__setattr__(self, "input_wires", tuple(self.input_wires))
        object.__setattr__(self, "output_wires", tuple(self.output_wires))
        if not self.effects:
            raise ValidationError("instrument needs at least one effect")
        names = self.effects[0].names
        for e in self.effects:
            if e.names != names:
                raise WireMismatch("instrument effects live on different wires")

    def total(self) -> LabeledOperator:
        out = self.effects[0]
        for e in self.effects[1:]:
            out = out + e
        return out

    def validate(self, tol: float = DEFAULT_VALIDATION_TOL) -> "Instrument":
        for k, e in enumerate(self.effects):
            rep = check_hermitian_psd(e)
            if rep.max_asymmetry > tol or rep.min_eigenvalue < -tol:
                raise ValidationError(
                    f"effect {k} is not PSD", residual=rep.min_eigenvalue
                )
        ChannelDescriptor(
            self.total(), self.input_wires, self.output_wires
        ).validate(tol)
        return self


# ---------------------------------------------------------------------------
# random ensembles
# ---------------------------------------------------------------------------

def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_state(wire: Wire, rng: np.random.Generator, rank: int | None = None) -> LabeledOperator:
    """Hilbert-Schmidt random density operator (full rank unless truncated)."""
    d = wire.dim
    k = rank or d
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return LabeledOperator((wire,), rho / np.trace(rho))


def random_cptp(
    input_wire: Wire, output_wire: Wire, rng: np.random.Generator
) -> ChannelDescriptor:
    """Random CPTP map from a Haar pure state on in (x) out (x) out.

    The out (x) out factor is a Stinespring dilation of dimension dim(out);
    the PSD operator is then TP-normalized by the inverse square root of the
    input marginal, giving a full-support Choi ensemble.
    """
    d_in, d_out = input_wire.dim, output_wire.dim
    psi = random_pure_state(d_in * d_out * d_out, rng).reshape(d_in * d_out, d_out)
    rho = psi @ psi.conj().T  # partial trace over the dilation
    marg = np.trace(rho.reshape(d_in, d_out, d_in, d_out), axis1=1, axis2=3)
    evals, vecs = np.linalg.eigh(marg)
    inv_sqrt = vecs @ np.diag(evals ** -0.5) @ vecs.conj().T
    left = np.kron(inv_sqrt, np.eye(d_out))
    choi = left @ rho @ left.conj().T
    op = LabeledOperator((input_wire, output_wire), choi)
    return ChannelDescriptor(
        op, (input_wire.name,), (output_wire.name,)
    ).validate(1e-9)


def random_povm(
    d: int, n_effects: int, rng: np.random.Generator
) -> list[np.ndarray]:
    raw = []
    for _ in range(n_effects):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        raw.append(g @ g.conj().T)
    total = sum(raw)
    evals, vecs = np.linalg.eigh(total)
    inv_sqrt = vecs @ np.diag(evals ** -0.5) @ vecs.conj().T
    return [inv_sqrt @ f @ inv_sqrt for f in raw]


def random_holevo_channel(
    input_wire: Wire,
    output_wire: Wire,
    rng: np.random.Generator,
    n_terms: int | None = None,
) -> ChannelDescriptor:
    """Random measure-and-prepare channel sum_x E_x (x) rho_x (Holevo form)."""
    d_in, d_out = input_wire.dim, output_wire.dim
    n = n_terms or d_in * d_in
    povm = random_povm(d_in, n, rng)
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    for e in povm:
        rho = random_state(output_wire, rng).data
        choi += np.kron(e.T, rho)
    op = LabeledOperator((input_wire, output_wire), choi)
    return ChannelDescriptor(
        op, (input_wire.name,), (output_wire.name,)
    ).validate(1e-9)


def random_bistochastic_superchannel(
    d: int,
    rng: np.random.Generator,
    n_mix: int = 3,
    outer_in: str = "A_pre",
    inner_in: str = "A",
    inner_out: str = "B",
    outer_out: str = "B_post",
) -> SuperchannelDescriptor:
    """Random convex mixture of unitary pre/post superchannels.

    Each term conjugates the input channel by independent Haar unitaries;
    mixtures stay bistochastic (the comb conditions are linear) while being
    noisy enough to make the data-processing inequality strict generically.
    """
    weights = rng.dirichlet(np.ones(n_mix))
    total = None
    for w in weights:
        pre = unitary_channel(haar_unitary(d, rng), outer_in, inner_in)
        post = unitary_channel(haar_unitary(d, rng), inner_out, outer_out)
        term = pre.op.tensor(post.op) * w
        total = term if total is None else total + term
    t = SuperchannelDescriptor(
        total, (outer_in,), (inner_in,), (inner_out,), (outer_out,)
    ).validate()
    return t
