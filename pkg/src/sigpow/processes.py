"""Bipartite process matrices: validity, Born rule, causal mixtures.

A process matrix lives on four wires (a_in, a_out, b_in, b_out) and must be
PSD, carry trace dim(a_out) * dim(b_out), and satisfy three projector
conditions built from the wire-averaging map

    avg_X(W) = Tr_X(W) (x) id_X / dim(X)   (re-inflated in place).

Definite-causal-order combs are the special case where one output wire has
dimension one, so the same validator covers both; b_out is always kept as a
genuine wire.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channels import ChannelDescriptor, link
from .errors import AlphaOutOfRange, InvalidProcessMatrix, WireMismatch
from .sdp import DEFAULT_OPTIONS, SolverOptions
from .wires import LabeledOperator, Wire, check_hermitian_psd, identity_operator

__all__ = [
    "ProcessMatrix",
    "ProcessValidationReport",
    "wire_average",
    "project_to_process_space",
    "validate_process_matrix",
    "born_probability",
    "check_non_signalling",
    "common_cause_process",
    "direct_cause_process",
    "cause_mixture",
    "process_signalling_curve",
    "random_process_matrix",
    "process_from_channel",
    "write_curve_csv",
]

DEFAULT_ROLES = ("A_i", "A_o", "B_i", "B_o")


@dataclass(frozen=True)
class ProcessMatrix:
    """Operator on (a_in, a_out, b_in, b_out) with a declared causal class."""

    op: LabeledOperator
    a_in: str = "A_i"
    a_out: str = "A_o"
    b_in: str = "B_i"
    b_out: str = "B_o"
    causal_class: str = "general"  # definite(A<B) | definite(B<A) | general

    def __post_init__(self):
        roles = (self.a_in, self.a_out, self.b_in, self.b_out)
        if sorted(roles) != sorted(self.op.names):
            raise WireMismatch(
                f"roles {roles} do not match operator wires {self.op.names}"
            )

    @property
    def roles(self) -> tuple[str, str, str, str]:
        return (self.a_in, self.a_out, self.b_in, self.b_out)


def wire_average(op: LabeledOperator, names: str | Iterable[str]) -> LabeledOperator:
    """Replace the named wires by maximally mixed factors, in place.

    avg_X(W) = Tr_X(W) (x) id_X / dim(X), with the original wire order kept.
    """
    names = (names,) if isinstance(names, str) else tuple(names)
    if not names:
        return op
    traced = op.partial_trace(names)
    d = int(np.prod([op.wire(n).dim for n in names], dtype=np.int64))
    eye = identity_operator(*[op.wire(n) for n in names])
    return traced.tensor(eye / d).permute(op.names)


def project_to_process_space(
    op: LabeledOperator, roles: Sequence[str] = DEFAULT_ROLES
) -> LabeledOperator:
    """Orthogonal projection onto the linear span of valid process matrices.

    Composition of the three commuting projectors corresponding to the
    validity conditions; applying it twice equals applying it once.  The
    trace is preserved, so trace normalization is a separate affine step.
    """
    a_in, a_out, b_in, b_out = roles
    w = op
    # no-influence-from-the-future structure
    w = (
        wire_average(w, a_out)
        + wire_average(w, b_out)
        - wire_average(w, (a_out, b_out))
    )
    # Alice's marginal cannot depend on Bob's output choice, and vice versa
    w = w - wire_average(w, (a_in, a_out)) + wire_average(w, (a_in, a_out, b_out))
    w = w - wire_average(w, (b_in, b_out)) + wire_average(w, (b_in, b_out, a_out))
    return w


@dataclass(frozen=True)
class ProcessValidationReport:
    valid: bool
    first_violation: str | None
    residuals: dict[str, float]


def validate_process_matrix(
    op: LabeledOperator,
    roles: Sequence[str] = DEFAULT_ROLES,
    tol: float = 1e-7,
) -> ProcessValidationReport:
    """Diagnostic report of PSD, trace and projector-condition residuals."""
    a_in, a_out, b_in, b_out = roles
    for name in roles:
        op.wire(name)
    rep = check_hermitian_psd(op)
    d_out = op.wire(a_out).dim * op.wire(b_out).dim

    structural = (
        wire_average(op, a_out)
        + wire_average(op, b_out)
        - wire_average(op, (a_out, b_out))
    )
    residuals = {
        "hermiticity": rep.max_asymmetry,
        "psd": max(0.0, -rep.min_eigenvalue),
        "trace": abs(op.trace() - d_out),
        "proj_structure": (op - structural).max_abs(),
        "proj_alice": (
            wire_average(op, (a_in, a_out))
            - wire_average(op, (a_in, a_out, b_out))
        ).max_abs(),
        "proj_bob": (
            wire_average(op, (b_in, b_out))
            - wire_average(op, (b_in, b_out, a_out))
        ).max_abs(),
    }
    first = None
    for key in ("hermiticity", "psd", "trace", "proj_structure", "proj_alice", "proj_bob"):
        scale = d_out if key == "trace" else 1.0
        if residuals[key] > tol * max(1.0, scale):
            first = key
            break
    return ProcessValidationReport(
        valid=first is None, first_violation=first, residuals=residuals
    )


def born_probability(
    upsilon: ProcessMatrix,
    alice_effect: LabeledOperator,
    bob_effect: LabeledOperator,
    shared_state: LabeledOperator | None = None,
) -> float:
    """Pr = Tr[(E^T (x) F^T) (Upsilon (x) rho)] for CJ-picture effects.

    Alice's effect acts on her process wires plus (optionally) her part of
    the shared state, Bob's likewise; wire names tie everything together.
    """
    resource = upsilon.op
    if shared_state is not None:
        resource = resource.tensor(shared_state)
    meas = alice_effect.partial_transpose(alice_effect.names).tensor(
        bob_effect.partial_transpose(bob_effect.names)
    )
    if sorted(meas.names) != sorted(resource.names):
        raise WireMismatch(
            f"effect wires {meas.names} do not match resource wires "
            f"{resource.names}"
        )
    meas = meas.permute(resource.names)
    return float(np.trace(meas.data @ resource.data).real)


def check_non_signalling(
    upsilon: ProcessMatrix, direction: str, tol: float = 1e-9
) -> tuple[bool, float]:
    """Whether one lab's statistics are independent of the other's instrument.

    Signalling from A to B is impossible iff the process is unchanged by
    averaging over Alice's output wire (her influence never leaves the lab),
    and symmetrically for B to A.
    """
    if direction in ("A->B", "ab"):
        resid = (upsilon.op - wire_average(upsilon.op, upsilon.a_out)).max_abs()
    elif direction in ("B->A", "ba"):
        resid = (upsilon.op - wire_average(upsilon.op, upsilon.b_out)).max_abs()
    else:
        raise ValueError(f"direction must be 'A->B' or 'B->A', got {direction!r}")
    return resid <= tol, resid


# ---------------------------------------------------------------------------
# common cause, direct cause, and their mixtures
# ---------------------------------------------------------------------------

def _phi_plus(w1: Wire, w2: Wire) -> LabeledOperator:
    d = w1.dim
    vec = np.eye(d).reshape(d * d) / np.sqrt(d)
    return LabeledOperator((w1, w2), np.outer(vec, vec))


def common_cause_process(roles: Sequence[str] = DEFAULT_ROLES) -> ProcessMatrix:
    """Maximally entangled state shared between the labs; no causal influence."""
    a_in, a_out, b_in, b_out = roles
    op = (
        _phi_plus(Wire(a_in, 2), Wire(b_in, 2))
        .tensor(identity_operator(Wire(a_out, 2)))
        .tensor(identity_operator(Wire(b_out, 1)))
        .permute(roles)
    )
    return ProcessMatrix(op, *roles, causal_class="definite(A<B)")


def direct_cause_process(roles: Sequence[str] = DEFAULT_ROLES) -> ProcessMatrix:
    """Identity channel from Alice's output to Bob's input.

    Written as id_{A_i} (x) phi+ on (A_o, B_i); equivalently the maximally
    mixed state on A_i paired with the trace-d Choi of the identity.
    """
    a_in, a_out, b_in, b_out = roles
    op = (
        identity_operator(Wire(a_in, 2))
        .tensor(_phi_plus(Wire(a_out, 2), Wire(b_in, 2)))
        .tensor(identity_operator(Wire(b_out, 1)))
        .permute(roles)
    )
    return ProcessMatrix(op, *roles, causal_class="definite(A<B)")


def _partial_swap(theta: float) -> np.ndarray:
    swap = np.eye(4)[[0, 2, 1, 3]]
    return np.cos(theta / 2) * np.eye(4) + 1j * np.sin(theta / 2) * swap


def cause_mixture(
    alpha: float,
    kind: str,
    roles: Sequence[str] = DEFAULT_ROLES,
) -> ProcessMatrix:
    """Incoherent or coherent interpolation between direct and common cause.

    incoherent: alpha * common_cause + (1 - alpha) * direct_cause.
    coherent: a maximally entangled pair feeds a partial-swap unitary
    U(pi * alpha) together with Alice's output; one output leg is Bob's
    input and the other (the would-be memory) is discarded.  At alpha = 0
    the swap is absent and the construction reduces to the direct-cause
    process; at alpha = 1 the full swap routes the entangled half straight
    to Bob, the common-cause process.
    """
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {alpha}")
    a_in, a_out, b_in, b_out = roles
    if kind == "incoherent":
        cc = common_cause_process(roles)
        dc = direct_cause_process(roles)
        op = alpha * cc.op + (1.0 - alpha) * dc.op
        return ProcessMatrix(op, *roles, causal_class="definite(A<B)")
    if kind != "coherent":
        raise ValueError(f"kind must be 'coherent' or 'incoherent', got {kind!r}")

    u = _partial_swap(np.pi * alpha)
    # Choi of the unitary as a channel (Aux, a_out) -> (Aux', b_in):
    # under the identity, Aux passes to Aux' and a_out to b_in.
    wires = (Wire("Aux", 2), Wire(a_out, 2), Wire("Aux_out", 2), Wire(b_in, 2))
    vec = u.T.reshape(16)
    choi_u = LabeledOperator(wires, np.outer(vec, vec.conj()))
    entangled = _phi_plus(Wire(a_in, 2), Wire("Aux", 2))
    comb = link(entangled, choi_u).partial_trace("Aux_out")
    op = (
        comb.tensor(identity_operator(Wire(b_out, 1))).permute(roles)
    )
    return ProcessMatrix(op, *roles, causal_class="definite(A<B)")


def process_signalling_curve(
    kind: str,
    alphas: Sequence[float],
    opts: SolverOptions = DEFAULT_OPTIONS,
    jobs: int = 1,
) -> list[tuple[float, float]]:
    """S of the cause mixture along alpha, via the memory-channel program."""
    from .signalling import memory_channel_signalling

    def s_of(alpha: float) -> tuple[float, float]:
        pm = cause_mixture(float(alpha), kind)
        sigma = pm.op.partial_trace(pm.b_out)  # b_out is one-dimensional
        report = memory_channel_signalling(
            sigma,
            sender_out=pm.a_out,
            receiver_wires=(pm.a_in, pm.b_in),
            opts=opts,
        )
        return float(alpha), report.s_value

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(s_of, alphas))
    return [s_of(alpha) for alpha in alphas]


def write_curve_csv(rows: Sequence[tuple[float, float]], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "s_bits"])
        for alpha, s in rows:
            writer.writerow([f"{alpha:.6g}", f"{s:.6g}"])


# ---------------------------------------------------------------------------
# sampling and embeddings
# ---------------------------------------------------------------------------

def random_process_matrix(
    rng: np.random.Generator,
    dims: Sequence[int] = (2, 2, 2, 2),
    roles: Sequence[str] = DEFAULT_ROLES,
    mix: float = 0.9,
) -> ProcessMatrix:
    """Random valid process matrix, possibly without definite causal order.

    A random Hermitian perturbation is projected onto the affine space of
    the validity conditions and mixed with the uniform process until PSD.
    """
    wires = tuple(Wire(n, d) for n, d in zip(roles, dims))
    dim = int(np.prod(dims, dtype=np.int64))
    d_out = dims[1] * dims[3]
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    herm = LabeledOperator(wires, (g + g.conj().T) / 2)
    direction = project_to_process_space(herm, roles)
    direction = direction - (direction.trace() / dim) * identity_operator(*wires)
    uniform_level = d_out / dim
    min_eig = float(np.linalg.eigvalsh(direction.hermitize().data)[0])
    if min_eig < 0:
        eps = mix * uniform_level / (-min_eig)
    else:
        eps = 1.0
    op = eps * direction + uniform_level * identity_operator(*wires)
    return ProcessMatrix(op.hermitize(), *roles, causal_class="general")


def process_from_channel(
    ch: ChannelDescriptor, roles: Sequence[str] = DEFAULT_ROLES
) -> ProcessMatrix:
    """Embed a channel as a process with trivial A_i and B_o wires.

    The channel's inputs become Alice's output wire and its outputs Bob's
    input wire; with nothing flowing back this is a definite-order process.
    """
    a_in, a_out, b_in, b_out = roles
    if len(ch.input_wires) != 1 or len(ch.output_wires) != 1:
        raise WireMismatch("embedding expects a single-wire channel")
    op = ch.op.rename({ch.input_wires[0]: a_out, ch.output_wires[0]: b_in})
    op = (
        identity_operator(Wire(a_in, 1))
        .tensor(op)  # Choi trace d_in already matches dim(a_out) * dim(b_out)
        .tensor(identity_operator(Wire(b_out, 1)))
        .permute(roles)
    )
    return ProcessMatrix(op, *roles, causal_class="definite(A<B)")
