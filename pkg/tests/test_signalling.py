import numpy as np
import pytest

from sigpow.channels import (
    ChannelDescriptor,
    channel_from_kraus,
    choi_identity_block,
    completely_depolarizing,
    haar_unitary,
    identity_channel,
    link,
    maximally_entangled_state,
    random_bistochastic_superchannel,
    random_cptp,
    random_holevo_channel,
    random_state,
    apply_superchannel,
    trace_and_prepare,
    unitary_channel,
)
from sigpow.errors import NonSquareChannel, NotAChannelInDeclaredDirection
from sigpow.sdp import diamond_norm_distance
from sigpow.signalling import (
    exclusion_game_value,
    exclusion_power,
    extract_superdense_strategy,
    memory_channel_signalling,
    p_from_s_relation,
    quantum_memory_witness,
    signalling_power,
)
from sigpow.wires import LabeledOperator, Wire, identity_operator

N_EB = LabeledOperator(
    (Wire("A", 2), Wire("B", 2)),
    np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex),
)


def amplitude_damping(lam):
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1 - lam)]])
    k1 = np.array([[0.0, np.sqrt(lam)], [0.0, 0.0]])
    return channel_from_kraus([k0, k1], Wire("A", 2), Wire("B", 2))


# ---------------------------------------------------------------------------
# signalling power values
# ---------------------------------------------------------------------------

def test_trace_and_prepare_has_zero_signalling(rng):
    ch = trace_and_prepare(random_state(Wire("B", 2), rng), Wire("A", 2))
    rep = signalling_power(ch)
    assert abs(rep.s_value) < 1e-7
    assert not rep.witness_eb
    # faithfulness: S ~ 0 only for channels close to id (x) marginal
    marg = ch.op.partial_trace("A") / 2.0
    rebuilt = identity_operator(Wire("A", 2)).tensor(marg)
    assert (ch.op - rebuilt).max_abs() <= 1e-3


def test_identity_qutrit_value():
    rep = signalling_power(identity_channel(3))
    assert abs(rep.s_value - np.log2(9)) < 1e-7


def test_unitary_invariance_of_signalling(rng):
    # any unitary channel reaches the same maximum as the identity
    u = haar_unitary(3, rng)
    rep = signalling_power(unitary_channel(u, "A", "B"))
    assert abs(rep.s_value - np.log2(9)) < 1e-6


def test_amplitude_damping_closed_form():
    # closed form 1 + G^2 + 2 G Gamma_z with G^2 = 1 - lambda, Gamma_z = 1
    lam = 0.75
    rep = signalling_power(amplitude_damping(lam))
    expected = np.log2(1 + (1 - lam) + 2 * np.sqrt(1 - lam))
    assert abs(rep.s_value - expected) < 1e-7
    assert abs(rep.raw_primal - 2.25) < 1e-6


def test_report_consistency(rng):
    ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    rep = signalling_power(ch)
    assert np.isclose(rep.s_value, np.log2(rep.raw_primal))
    assert rep.raw_primal >= 1.0 - 1e-9  # non-negativity of S
    assert rep.gap < 1e-6


# ---------------------------------------------------------------------------
# exclusion power values
# ---------------------------------------------------------------------------

def test_exclusion_of_classical_copy_channel():
    ch = ChannelDescriptor(N_EB, ("A",), ("B",))
    rep = exclusion_power(ch)
    assert abs(rep.p_value - 1.0) < 1e-7


def test_exclusion_of_identity_channel():
    # explicit feasible witness: W = (2/3)(id - phi+) reaches Tr(NW) = 0
    ch = identity_channel(2)
    phi = maximally_entangled_state(Wire("A", 2), Wire("B", 2))
    w = (identity_operator(Wire("A", 2), Wire("B", 2)) - phi) * (2.0 / 3.0)
    assert (w.partial_trace("A") - identity_operator(Wire("B", 2))).max_abs() < 1e-12
    assert abs(np.trace(ch.op.data @ w.data)) < 1e-12
    rep = exclusion_power(ch)
    assert abs(rep.p_value - 1.0) < 1e-7


def test_exclusion_range(rng):
    for _ in range(5):
        ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
        rep = exclusion_power(ch)
        assert -1e-7 <= rep.p_value <= 1.0 + 1e-7
        assert rep.gap <= 1e-6
        assert abs(rep.p_value - rep.dual_value) <= 1e-6


# ---------------------------------------------------------------------------
# the P from S relation
# ---------------------------------------------------------------------------

def test_relation_on_trace_and_prepare():
    prep = LabeledOperator((Wire("B", 2),), np.eye(2) / 2)
    ch = trace_and_prepare(prep, Wire("A", 2))
    lhs, rhs = p_from_s_relation(ch)
    # every trace-and-prepare channel has P = 0 (frozen from the SDP oracle)
    assert abs(lhs) < 1e-7
    assert abs(lhs - rhs) < 1e-7


def test_relation_on_classical_copy():
    ch = ChannelDescriptor(N_EB, ("A",), ("B",))
    lhs, rhs = p_from_s_relation(ch)
    assert abs(lhs - 1.0) < 1e-6
    assert abs(rhs - 1.0) < 1e-6


def test_relation_on_random_channels(rng):
    for _ in range(8):
        ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
        lhs, rhs = p_from_s_relation(ch)
        assert abs(lhs - rhs) < 1e-5


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------

def test_strategy_identity_is_perfect_superdense_coding():
    strat = extract_superdense_strategy(identity_channel(2))
    assert abs(strat.coincidence_sum - 4.0) < 1e-6
    total = sum(e.data for e in strat.povm)
    assert np.abs(total - np.eye(4)).max() < 1e-8
    for effect in strat.povm:
        assert np.linalg.eigvalsh(effect.hermitize().data).min() > -1e-9


def test_strategy_depolarizing_sum_is_one():
    strat = extract_superdense_strategy(completely_depolarizing(2))
    assert abs(strat.coincidence_sum - 1.0) < 1e-6


def test_strategy_random_unitary(rng):
    ch = unitary_channel(haar_unitary(2, rng))
    strat = extract_superdense_strategy(ch)
    assert abs(strat.coincidence_sum - 4.0) < 1e-6


def test_strategy_matches_raw_primal(rng):
    for _ in range(3):
        ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
        rep = signalling_power(ch)
        strat = extract_superdense_strategy(ch)
        assert abs(strat.coincidence_sum - rep.raw_primal) < 1e-6


def test_exclusion_game_matches_p(rng):
    for _ in range(3):
        ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
        assert abs(exclusion_game_value(ch) - exclusion_power(ch).p_value) < 1e-6


def test_strategy_requires_square_channel(rng):
    ch = random_cptp(Wire("A", 2), Wire("B", 4), rng)
    with pytest.raises(NonSquareChannel):
        extract_superdense_strategy(ch)


# ---------------------------------------------------------------------------
# channels with memory
# ---------------------------------------------------------------------------

def test_common_cause_memory_channel_has_zero_signalling(rng):
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    eta = g @ g.conj().T
    eta /= np.trace(eta)
    sigma = LabeledOperator((Wire("A_i", 2), Wire("B_i", 2)), eta).tensor(
        identity_operator(Wire("A_o", 2))
    )
    rep = memory_channel_signalling(sigma)
    assert abs(rep.s_value) < 1e-6


def test_perfect_memory_channel_gives_two_bits():
    sigma = (
        (identity_operator(Wire("A_i", 2)) / 2)
        .tensor(choi_identity_block(Wire("A_o", 2), Wire("B_i", 2)))
    )
    rep = memory_channel_signalling(sigma)
    assert abs(rep.s_value - 2.0) < 1e-6


def test_memory_channel_from_construction_is_bounded(rng):
    g = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    rho = g @ g.conj().T
    sigma0 = LabeledOperator((Wire("A_i", 2), Wire("Aux", 2)), rho / np.trace(rho))
    l_raw = random_cptp(Wire("In", 4), Wire("B_i", 2), rng)
    l_op = LabeledOperator(
        (Wire("Aux", 2), Wire("A_o", 2), Wire("B_i", 2)), l_raw.op.data
    )
    sigma = link(sigma0, l_op)
    rep = memory_channel_signalling(sigma)
    assert -1e-9 <= rep.s_value <= np.log2((2 * 2) ** 2) + 1e-9


def test_memory_channel_validates_direction(rng):
    bad = random_state(Wire("A_i", 2), rng).tensor(
        random_state(Wire("B_i", 2), rng)
    ).tensor(random_state(Wire("A_o", 2), rng))
    with pytest.raises(NotAChannelInDeclaredDirection):
        memory_channel_signalling(bad)


# ---------------------------------------------------------------------------
# quantum memory witness
# ---------------------------------------------------------------------------

def test_witness_nonpositive_for_measure_and_prepare(rng):
    for _ in range(5):
        ch = random_holevo_channel(Wire("A", 2), Wire("B", 2), rng)
        assert quantum_memory_witness(ch) <= 1e-6


def test_witness_of_identity_channel():
    assert abs(quantum_memory_witness(identity_channel(2)) - 1.0) < 1e-6
    assert signalling_power(identity_channel(2)).witness_eb


# ---------------------------------------------------------------------------
# structural properties
# ---------------------------------------------------------------------------

def test_faithfulness_in_both_directions(rng):
    ch = trace_and_prepare(random_state(Wire("B", 2), rng), Wire("A", 2))
    assert signalling_power(ch).s_value < 1e-6

    noise = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    perturbed = ChannelDescriptor(
        0.9 * ch.op + 0.1 * noise.op, ("A",), ("B",)
    )
    assert signalling_power(perturbed).s_value > 1e-3


def test_raw_primal_is_convex(rng):
    n = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    m = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    s_n = signalling_power(n).raw_primal
    s_m = signalling_power(m).raw_primal
    for lam in (0.25, 0.5, 0.75):
        mixed = ChannelDescriptor(lam * n.op + (1 - lam) * m.op, ("A",), ("B",))
        s_mix = signalling_power(mixed).raw_primal
        assert s_mix <= lam * s_n + (1 - lam) * s_m + 1e-7


def test_additivity(rng):
    n = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    m = random_cptp(Wire("A2", 2), Wire("B2", 2), rng)
    joint = n.tensor(m)
    s_sum = signalling_power(n).s_value + signalling_power(m).s_value
    assert abs(signalling_power(joint).s_value - s_sum) < 1e-5


def test_continuity_bound(rng):
    n = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    m = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    ds = abs(signalling_power(n).s_value - signalling_power(m).s_value)
    assert ds <= 4.0 * diamond_norm_distance(n, m) + 1e-6


def test_dpi_for_bistochastic_superchannels(rng):
    for _ in range(10):
        t = random_bistochastic_superchannel(2, rng)
        n = random_cptp(Wire("A", 2), Wire("B", 2), rng)
        before = signalling_power(n).s_value
        after = signalling_power(apply_superchannel(t, n)).s_value
        assert after <= before + 1e-6


def test_eb_bound_on_holevo_channels(rng):
    for _ in range(5):
        ch = random_holevo_channel(Wire("A", 2), Wire("B", 2), rng)
        assert signalling_power(ch).s_value <= 1.0 + 1e-6
