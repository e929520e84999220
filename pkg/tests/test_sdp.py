import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigpow.channels import (
    ChannelDescriptor,
    completely_depolarizing,
    identity_channel,
    random_cptp,
    random_state,
    trace_and_prepare,
)
from sigpow.errors import Infeasible
from sigpow.sdp import (
    SdpProblem,
    SolverOptions,
    diamond_norm_distance,
    from_real_embedding,
    least_dominating_marginal,
    problem_to_json_dict,
    real_embedding,
    solve,
)
from sigpow.wires import LabeledOperator, Wire, identity_operator


def reverse_channel_problem(ch, sense="max"):
    eye = identity_operator(*[ch.op.wire(n) for n in ch.output_wires])
    return SdpProblem(
        objective=ch.op, sense=sense, constraints=((tuple(ch.input_wires), eye),)
    )


@given(seed=st.integers(0, 100_000), n=st.integers(1, 5))
@settings(max_examples=50, deadline=None)
def test_real_embedding_preserves_psd(seed, n):
    gen = np.random.default_rng(seed)
    g = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    h = (g + g.conj().T) / 2
    emb = real_embedding(h)
    assert np.allclose(emb, emb.T, atol=1e-14)
    min_c = np.linalg.eigvalsh(h).min()
    min_r = np.linalg.eigvalsh(emb).min()
    assert abs(min_c - min_r) < 1e-10  # spectra coincide (with doubled multiplicity)
    assert np.allclose(from_real_embedding(emb), h, atol=1e-14)


def test_prop1_value_for_trace_and_prepare(rng):
    prep = random_state(Wire("B", 2), rng)
    ch = trace_and_prepare(prep, Wire("A", 2))
    sol = solve(reverse_channel_problem(ch))
    assert abs(sol.primal_value - 1.0) < 1e-8


def test_identity_channel_value_is_d_squared():
    sol = solve(reverse_channel_problem(identity_channel(2)))
    assert abs(sol.primal_value - 4.0) < 1e-7
    sol3 = solve(reverse_channel_problem(identity_channel(3)))
    assert abs(sol3.primal_value - 9.0) < 1e-7


def test_primal_matches_independent_dual_oracle(rng):
    for _ in range(5):
        ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
        sol = solve(reverse_channel_problem(ch))
        dual = least_dominating_marginal(ch.op, ("B",))
        assert abs(sol.primal_value - dual) < 1e-6


def test_solution_feasibility_and_gap(rng):
    for d_a, d_b in ((2, 2), (2, 4), (4, 4)):
        ch = random_cptp(Wire("A", d_a), Wire("B", d_b), rng)
        sol = solve(reverse_channel_problem(ch))
        assert sol.status == "optimal"
        assert sol.constraint_residual <= 1e-7
        assert sol.min_eigenvalue >= -1e-7
        assert sol.gap <= 1e-6 * max(1.0, abs(sol.primal_value))


def test_dual_multiplier_dominates_objective(rng):
    ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    sol = solve(reverse_channel_problem(ch))
    lam = sol.dual_multiplier
    assert lam is not None
    assert abs(np.trace(lam.data).real - sol.dual_value) < 1e-7
    dom = np.kron(np.eye(2), lam.data) - ch.op.data
    assert np.linalg.eigvalsh((dom + dom.conj().T) / 2).min() > -1e-6


def test_infeasible_constraints_raise():
    ch = identity_channel(2)
    bad_target = identity_operator(Wire("B", 2)) * 3.0
    prob = SdpProblem(
        objective=ch.op,
        sense="max",
        constraints=(
            (("A",), bad_target),
            (("A", "B"), LabeledOperator((), np.array([[2.0]]))),
        ),
    )
    with pytest.raises(Infeasible) as err:
        solve(prob)
    assert err.value.certificate_norm is not None


def test_psd_infeasibility_detected():
    # Tr_B W pinned to a non-PSD-compatible target makes the cone empty
    herm = LabeledOperator((Wire("A", 2), Wire("B", 2)), np.diag([1.0, 1, 1, 1]))
    target = LabeledOperator((Wire("A", 2),), np.diag([1.0, -1.0]).astype(complex))
    prob = SdpProblem(objective=herm, sense="max", constraints=((("B",), target),))
    with pytest.raises(Infeasible):
        solve(prob)


def test_pinned_problem_short_circuits(rng):
    # a constraint that traces only a dim-1 wire pins the variable completely
    state = random_state(Wire("A", 2), rng)
    obj = state.tensor(identity_operator(Wire("T", 1)))
    prob = SdpProblem(
        objective=obj,
        sense="min",
        constraints=((("T",), identity_operator(Wire("A", 2)) * 0.5),),
    )
    sol = solve(prob)
    assert sol.status == "optimal" and sol.gap == 0.0
    assert abs(sol.primal_value - 0.5) < 1e-12  # Tr(state * id/2)


def test_variable_cap_enforced():
    ch = identity_channel(2)
    with pytest.raises(ValueError):
        solve(reverse_channel_problem(ch), SolverOptions(max_variable_side=2))


def test_objective_must_be_hermitian():
    skew = LabeledOperator((Wire("A", 2),), np.array([[0, 1], [0, 0]], complex))
    with pytest.raises(ValueError):
        SdpProblem(objective=skew, sense="max")


def test_constraint_target_wire_order_is_free(rng):
    # targets may list their wires in any order; compilation permutes them
    ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    big = ch.tensor(random_cptp(Wire("A2", 2), Wire("B2", 2), rng))
    eye_fwd = identity_operator(Wire("B", 2), Wire("B2", 2))
    eye_rev = identity_operator(Wire("B2", 2), Wire("B", 2))
    sol_fwd = solve(
        SdpProblem(objective=big.op, sense="max",
                   constraints=((("A", "A2"), eye_fwd),))
    )
    sol_rev = solve(
        SdpProblem(objective=big.op, sense="max",
                   constraints=((("A", "A2"), eye_rev),))
    )
    assert abs(sol_fwd.primal_value - sol_rev.primal_value) < 1e-7


def test_redundant_constraints_are_deduplicated(rng):
    # adding the implied total-trace constraint must not break the solve
    ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    eye = identity_operator(Wire("B", 2))
    total = LabeledOperator((), np.array([[2.0]]))
    sol = solve(
        SdpProblem(
            objective=ch.op,
            sense="max",
            constraints=((("A",), eye), (("A", "B"), total)),
        )
    )
    plain = solve(SdpProblem(objective=ch.op, sense="max", constraints=((("A",), eye),)))
    assert abs(sol.primal_value - plain.primal_value) < 1e-7


# ---------------------------------------------------------------------------
# diamond norm
# ---------------------------------------------------------------------------

def test_diamond_norm_of_identical_channels(rng):
    ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    assert diamond_norm_distance(ch, ch) < 1e-7


def test_diamond_norm_identity_vs_depolarizing():
    # oracle: by covariance the optimum uses the maximally entangled input,
    # where the output difference has trace norm |3/4| + 3 * |1/4| = 3/2
    val = diamond_norm_distance(identity_channel(2), completely_depolarizing(2))
    assert abs(val - 1.5) < 1e-6


def test_diamond_norm_dephasing_family():
    # phase flips commute with the twirl, so the maximally entangled input
    # is optimal and the distance equals the trace norm of half the Choi gap
    z = np.diag([1.0, -1.0])

    def dephasing(p):
        from sigpow.channels import channel_from_kraus

        return channel_from_kraus(
            [np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * z], Wire("A", 2), Wire("B", 2)
        )

    for p in (0.15, 0.4, 0.75):
        val = diamond_norm_distance(identity_channel(2), dephasing(p))
        gap = (identity_channel(2).op.data - dephasing(p).op.data) / 2
        oracle = np.abs(np.linalg.eigvalsh(gap)).sum()
        assert abs(val - oracle) < 1e-7
        assert abs(oracle - 2 * p) < 1e-12


def test_diamond_norm_triangle_and_symmetry(rng):
    chans = [random_cptp(Wire("A", 2), Wire("B", 2), rng) for _ in range(3)]
    d01 = diamond_norm_distance(chans[0], chans[1])
    d12 = diamond_norm_distance(chans[1], chans[2])
    d02 = diamond_norm_distance(chans[0], chans[2])
    assert d01 + d12 - d02 >= -1e-7
    assert abs(d01 - diamond_norm_distance(chans[1], chans[0])) < 1e-7


def test_problem_dump_schema():
    prob = reverse_channel_problem(identity_channel(2))
    payload = problem_to_json_dict(prob)
    assert payload["sense"] == "max"
    assert payload["constraints"][0]["trace_out"] == ["A"]
    emb = np.asarray(payload["embedded_objective_half"])
    w = np.eye(4)
    # documented halving: Tr(emb . embed(W)) == Tr(objective . W)
    assert np.isclose(
        np.trace(emb @ real_embedding(w)),
        np.trace(prob.objective.data @ w).real,
    )
    json.dumps(payload)  # serializable end to end
