"""Signalling and exclusion power of channels, memory channels and processes.

The signalling power of a channel with Choi operator N is
log2 max Tr(N W) over W >= 0 with Tr_in W = id_out, i.e. over CJ operators
of channels in the opposite causal direction.  The exclusion power replaces
the maximum by a minimum: P = 1 - min Tr(N W).  Both are evaluated by the
sdp engine; reports carry the optimizer, the dual value and the achieved
gap.  The dual value equals, up to normalization and sign, the conditional
min-entropy of the normalized CJ state (see README); that identification is
recorded but not asserted anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    ChannelDescriptor,
    apply_channel,
    link,
    maximally_entangled_state,
    unitary_channel,
    weyl_unitary_matrix,
)
from .errors import (
    InvalidProcessMatrix,
    NonSquareChannel,
    NotAChannelInDeclaredDirection,
)
from .sdp import DEFAULT_OPTIONS, SdpProblem, SdpSolution, SolverOptions, solve
from .wires import LabeledOperator, Wire, identity_operator

__all__ = [
    "SignallingReport",
    "ExclusionReport",
    "SuperdenseStrategy",
    "CausalLoopReport",
    "signalling_power",
    "exclusion_power",
    "p_from_s_relation",
    "extract_superdense_strategy",
    "exclusion_game_value",
    "memory_channel_signalling",
    "quantum_memory_witness",
    "causal_loop_inequality",
    "WITNESS_TOL",
]

WITNESS_TOL = 1e-5  # bit-value margin below which witnesses are inconclusive


@dataclass(frozen=True)
class SignallingReport:
    s_value: float
    raw_primal: float
    dual_value: float
    witness_eb: bool
    w_opt: LabeledOperator
    gap: float
    input_bits: float

    @property
    def witness_value(self) -> float:
        return self.s_value - self.input_bits


@dataclass(frozen=True)
class ExclusionReport:
    p_value: float
    w_min: LabeledOperator
    gap: float
    dual_value: float


@dataclass(frozen=True)
class SuperdenseStrategy:
    encodings: tuple[ChannelDescriptor, ...]
    povm: tuple[LabeledOperator, ...]
    coincidence_sum: float


@dataclass(frozen=True)
class CausalLoopReport:
    term_ab: float
    term_ba: float
    total: float


def _reverse_problem(op: LabeledOperator, input_wires, output_wires, sense):
    out_wires = [op.wire(n) for n in output_wires]
    return SdpProblem(
        objective=op,
        sense=sense,
        constraints=((tuple(input_wires), identity_operator(*out_wires)),),
    )


def signalling_power(
    n: ChannelDescriptor, opts: SolverOptions = DEFAULT_OPTIONS
) -> SignallingReport:
    """Signalling power S(N) in bits, with optimizer and dual certificate."""
    sol = solve(
        _reverse_problem(n.op, n.input_wires, n.output_wires, "max"), opts
    )
    raw = max(sol.primal_value, np.finfo(float).tiny)
    s_bits = float(np.log2(raw))
    input_bits = float(np.log2(n.dim_in))
    return SignallingReport(
        s_value=s_bits,
        raw_primal=sol.primal_value,
        dual_value=sol.dual_value,
        witness_eb=s_bits > input_bits + WITNESS_TOL,
        w_opt=sol.w_opt,
        gap=sol.gap,
        input_bits=input_bits,
    )


def exclusion_power(
    n: ChannelDescriptor, opts: SolverOptions = DEFAULT_OPTIONS
) -> ExclusionReport:
    """Exclusion power P(N) = 1 - min Tr(N W) over the same feasible set."""
    sol = solve(
        _reverse_problem(n.op, n.input_wires, n.output_wires, "min"), opts
    )
    return ExclusionReport(
        p_value=1.0 - sol.primal_value,
        w_min=sol.w_opt,
        gap=sol.gap,
        dual_value=1.0 - sol.dual_value,
    )


def p_from_s_relation(
    n: ChannelDescriptor, opts: SolverOptions = DEFAULT_OPTIONS
) -> tuple[float, float]:
    """Both sides of P(N) = (d_AB - 1) (2^{S(N-hat)} - 1).

    N-hat is the complementary channel mixture (d_A id - N) / (d_AB - 1),
    a valid Choi operator whenever N is one.  Both sides are evaluated by
    independent solves and returned for comparison.
    """
    lhs = exclusion_power(n, opts).p_value
    d_a, d_ab = n.dim_in, n.dim_in * n.dim_out
    eye = identity_operator(*n.op.wires)
    hat = (d_a * eye - n.op) / (d_ab - 1)
    n_hat = ChannelDescriptor(hat, n.input_wires, n.output_wires)
    rhs = (d_ab - 1) * (signalling_power(n_hat, opts).raw_primal - 1.0)
    return lhs, rhs


# ---------------------------------------------------------------------------
# superdense strategies
# ---------------------------------------------------------------------------

def _square_wires(n: ChannelDescriptor) -> tuple[str, str, int]:
    if len(n.input_wires) != 1 or len(n.output_wires) != 1:
        raise NonSquareChannel("strategy extraction needs single-wire channels")
    if n.dim_in != n.dim_out:
        raise NonSquareChannel(
            f"strategy extraction needs dim in == dim out, got "
            f"{n.dim_in} != {n.dim_out}"
        )
    return n.input_wires[0], n.output_wires[0], n.dim_in


def _strategy_parts(n: ChannelDescriptor, w: LabeledOperator):
    """Weyl encodings and the POVM E_x = (u_x * W) / d built from W."""
    in_name, out_name, d = _square_wires(n)
    ref_in, ref_out = in_name + "_ref", out_name + "_ref"
    encodings, povm = [], []
    for k in range(d):
        for ell in range(d):
            v = weyl_unitary_matrix(d, k, ell)
            encodings.append(unitary_channel(v.conj().T, ref_in, in_name))
            u_x = unitary_channel(v, in_name, ref_out)
            povm.append(link(u_x.op, w) / d)
    return encodings, povm, (ref_in, ref_out, in_name, out_name, d)


def _game_probabilities(n, encodings, povm, names) -> list[float]:
    """Simulate the entanglement-assisted protocol and return Pr(B = x | x)."""
    ref_in, ref_out, in_name, out_name, d = names
    shared = maximally_entangled_state(
        Wire(ref_in, d), Wire(ref_out, d)
    )
    probs = []
    for enc, effect in zip(encodings, povm):
        after_enc = link(enc.op, shared)  # acts on the ref_in half
        received = link(n.op, after_enc)  # state on (out, ref_out)
        order = received.names
        p = np.trace(effect.permute(order).data @ received.data).real
        probs.append(float(p))
    return probs


def extract_superdense_strategy(
    n: ChannelDescriptor, opts: SolverOptions = DEFAULT_OPTIONS
) -> SuperdenseStrategy:
    """Optimal encodings and decoding POVM realizing 2^S as a coincidence sum.

    Encodings are the inverse Weyl unitaries applied to half of a maximally
    entangled state; the POVM is E_x = (u_x * W_opt) / d.  The returned
    coincidence sum is computed by simulating the protocol, independently of
    the SDP value it should reproduce.
    """
    report = signalling_power(n, opts)
    encodings, povm, names = _strategy_parts(n, report.w_opt)
    probs = _game_probabilities(n, encodings, povm, names)
    return SuperdenseStrategy(
        encodings=tuple(encodings),
        povm=tuple(povm),
        coincidence_sum=float(sum(probs)),
    )


def exclusion_game_value(
    n: ChannelDescriptor, opts: SolverOptions = DEFAULT_OPTIONS
) -> float:
    """Realized exclusion-game value 1 - |X| + sum_x Pr(B != x | x).

    Uses the minimizing W with the same POVM normalization E_x = (u_x *
    W_min) / d as the coincidence game; the result should reproduce P(N).
    """
    report = exclusion_power(n, opts)
    encodings, povm, names = _strategy_parts(n, report.w_min)
    probs = _game_probabilities(n, encodings, povm, names)
    n_letters = len(probs)
    return 1.0 - n_letters + sum(1.0 - p for p in probs)


# ---------------------------------------------------------------------------
# channels with memory and process marginals
# ---------------------------------------------------------------------------

def memory_channel_signalling(
    sigma: LabeledOperator,
    sender_out: str | tuple[str, ...] = "A_o",
    receiver_wires: tuple[str, ...] = ("A_i", "B_i"),
    opts: SolverOptions = DEFAULT_OPTIONS,
    tol: float = 1e-7,
) -> SignallingReport:
    """Signalling power of a channel with memory (a 2-comb Choi operator).

    sigma is read as a channel from the sender's output wires to the
    combined receiver wires; the precondition Tr_receivers sigma =
    id_sender is validated.  S(sigma) vanishes exactly on common-cause
    operators sigma = eta (x) id_sender.
    """
    sender = (sender_out,) if isinstance(sender_out, str) else tuple(sender_out)
    receivers = tuple(receiver_wires)
    if sorted(sender + receivers) != sorted(sigma.names):
        raise NotAChannelInDeclaredDirection(
            f"declared wires {sender}+{receivers} do not partition {sigma.names}"
        )
    marg = sigma.partial_trace(receivers).permute(sender)
    eye = identity_operator(*[sigma.wire(nm) for nm in sender])
    resid = (marg - eye).max_abs()
    if resid > tol:
        raise NotAChannelInDeclaredDirection(
            f"Tr_receivers sigma differs from id_sender by {resid:.2e}",
            residual=resid,
        )
    ch = ChannelDescriptor(sigma, sender, receivers)
    return signalling_power(ch, opts)


def quantum_memory_witness(
    m: ChannelDescriptor, opts: SolverOptions = DEFAULT_OPTIONS
) -> float:
    """S(M) - log2(dim input); positive values certify quantum memory.

    Entanglement-breaking channels obey S <= log2(dim input), so any
    supermap output violating the bound cannot be simulated with classical
    memory.  Values within WITNESS_TOL of zero are inconclusive.
    """
    return signalling_power(m, opts).witness_value


def causal_loop_inequality(
    upsilon,
    roles: tuple[str, str, str, str] | None = None,
    opts: SolverOptions = DEFAULT_OPTIONS,
    tol: float = 1e-6,
) -> CausalLoopReport:
    """Average exclusion powers of the two marginal channels of a process.

    For a valid bipartite process matrix the two marginals (output of one
    lab to the input of the other, with the remaining wires respectively
    discarded and fed maximally mixed states) are channels whose exclusion
    powers sum to at most one: winning both exclusion games at once would
    close a causal loop.  ``upsilon`` may be a ProcessMatrix or a bare
    operator with the four roles given (default: wire order a_in, a_out,
    b_in, b_out).
    """
    from .processes import ProcessMatrix, validate_process_matrix

    if isinstance(upsilon, LabeledOperator):
        upsilon = ProcessMatrix(upsilon, *(roles or upsilon.names))
    if not isinstance(upsilon, ProcessMatrix):
        raise InvalidProcessMatrix("expected a ProcessMatrix or a LabeledOperator")
    report = validate_process_matrix(
        upsilon.op, (upsilon.a_in, upsilon.a_out, upsilon.b_in, upsilon.b_out)
    )
    if not report.valid:
        raise InvalidProcessMatrix(
            f"process matrix invalid: {report.first_violation} "
            f"(residuals {report.residuals})"
        )
    op = upsilon.op
    d_ao = op.wire(upsilon.a_out).dim
    d_bo = op.wire(upsilon.b_out).dim

    forward = op.partial_trace((upsilon.a_in, upsilon.b_out)) / d_bo
    forward = forward.permute((upsilon.a_out, upsilon.b_in))
    ch_ab = ChannelDescriptor(forward, (upsilon.a_out,), (upsilon.b_in,))

    backward = op.partial_trace((upsilon.b_in, upsilon.a_out)) / d_ao
    backward = backward.permute((upsilon.b_out, upsilon.a_in))
    ch_ba = ChannelDescriptor(backward, (upsilon.b_out,), (upsilon.a_in,))

    term_ab = exclusion_power(ch_ab, opts).p_value
    term_ba = exclusion_power(ch_ba, opts).p_value
    return CausalLoopReport(
        term_ab=term_ab, term_ba=term_ba, total=term_ab + term_ba
    )
