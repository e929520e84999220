import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigpow.errors import DimensionMismatch, DuplicateWire, NotAPermutation, UnknownWire
from sigpow.wires import (
    LabeledOperator,
    Wire,
    check_hermitian_psd,
    identity_operator,
)

SZ = np.diag([1.0, -1.0]).astype(complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)


def op(names_dims, data):
    return LabeledOperator(tuple(Wire(n, d) for n, d in names_dims), np.asarray(data))


def phi_plus():
    vec = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return op([("A", 2), ("B", 2)], np.outer(vec, vec))


def test_tensor_identity_case():
    a = identity_operator(Wire("A", 2))
    b = identity_operator(Wire("B", 3))
    t = a.tensor(b)
    assert t.names == ("A", "B")
    assert np.array_equal(t.data, np.eye(6))


def test_tensor_computational_basis():
    zero = op([("A", 2)], np.diag([1.0, 0.0]))
    one = op([("B", 2)], np.diag([0.0, 1.0]))
    t = zero.tensor(one)
    assert np.array_equal(np.diag(t.data).real, [0, 1, 0, 0])


def test_tensor_against_index_formula():
    # oracle: (i1 i2, j1 j2) entry is a[i1, j1] * b[i2, j2]
    a = op([("A", 2)], SZ)
    b = op([("B", 2)], SX)
    t = a.tensor(b)
    for i1 in range(2):
        for i2 in range(2):
            for j1 in range(2):
                for j2 in range(2):
                    assert t.data[2 * i1 + i2, 2 * j1 + j2] == SZ[i1, j1] * SX[i2, j2]


def test_tensor_rejects_shared_names():
    a = identity_operator(Wire("A", 2))
    with pytest.raises(DuplicateWire):
        a.tensor(a)


def test_partial_trace_product_state(rng):
    rho = op([("A", 2)], np.array([[0.25, 0.1], [0.1, 0.75]]))
    sigma = op([("B", 3)], np.diag([0.5, 0.3, 0.2]) * 2.0)  # trace 2
    joint = rho.tensor(sigma)
    reduced = joint.partial_trace("B")
    assert np.allclose(reduced.data, rho.data * 2.0, atol=1e-14)


def test_partial_trace_entangled_marginal():
    marg = phi_plus().partial_trace("A")
    assert np.allclose(marg.data, np.eye(2) / 2, atol=1e-14)


def test_partial_trace_all_wires_scalar():
    t = phi_plus().partial_trace(["A", "B"])
    assert t.wires == ()
    assert np.allclose(t.data, [[1.0]])


def test_partial_trace_unknown_wire():
    with pytest.raises(UnknownWire):
        phi_plus().partial_trace("C")


def test_partial_transpose_empty_is_identity():
    p = phi_plus()
    assert p.partial_transpose([]).is_close(p, 0.0)


def test_partial_transpose_of_entangled_state():
    # oracle: eigendecomposition; PT(phi+) = SWAP / 2 with min eigenvalue -1/2
    pt = phi_plus().partial_transpose("B")
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(pt.data, swap / 2, atol=1e-15)
    assert np.isclose(np.linalg.eigvalsh(pt.data).min(), -0.5)


def test_partial_transpose_composition_is_full_transpose(rng):
    g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    w = op([("A", 2), ("B", 3)], g)
    double = w.partial_transpose("A").partial_transpose("B")
    assert np.array_equal(double.data, g.T)


def test_permute_identity_and_swap(rng):
    rho = op([("A", 2)], np.array([[0.7, 0], [0, 0.3]]))
    sigma = op([("B", 2)], np.array([[0.2, 0.1], [0.1, 0.8]]))
    joint = rho.tensor(sigma)
    assert joint.permute(("A", "B")).is_close(joint, 0.0)
    swapped = joint.permute(("B", "A"))
    assert swapped.names == ("B", "A")
    assert np.allclose(swapped.data, np.kron(sigma.data, rho.data), atol=1e-15)


def test_permute_requires_permutation():
    with pytest.raises(NotAPermutation):
        phi_plus().permute(("A", "A"))


@given(seed=st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_permute_preserves_eigenvalues(seed):
    gen = np.random.default_rng(seed)
    g = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
    herm = op([("A", 2), ("B", 2)], (g + g.conj().T) / 2)
    before = np.linalg.eigvalsh(herm.data)
    after = np.linalg.eigvalsh(herm.permute(("B", "A")).data)
    assert np.abs(before - after).max() < 1e-10


@given(seed=st.integers(0, 10_000), subset=st.integers(0, 7))
@settings(max_examples=60, deadline=None)
def test_trace_preserved_under_partial_trace(seed, subset):
    gen = np.random.default_rng(seed)
    dims = [2, 3, 2]
    side = 12
    g = gen.standard_normal((side, side)) + 1j * gen.standard_normal((side, side))
    w = op(list(zip("XYZ", dims)), g)
    names = [n for k, n in enumerate("XYZ") if subset & (1 << k)]
    reduced = w.partial_trace(names)
    assert abs(reduced.trace() - w.trace()) < 1e-12 * max(1.0, abs(w.trace()))


@given(seed=st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_partial_transpose_involution(seed):
    gen = np.random.default_rng(seed)
    g = gen.standard_normal((6, 6)) + 1j * gen.standard_normal((6, 6))
    w = op([("A", 2), ("B", 3)], g)
    assert np.abs(w.partial_transpose("B").partial_transpose("B").data - g).max() <= 1e-15


def test_tensor_then_trace_returns_scaled_factor(rng):
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    h = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    a = op([("A", 2)], g)
    b = op([("B", 3)], h)
    back = a.tensor(b).partial_trace("B")
    assert np.abs(back.data - g * np.trace(h)).max() < 1e-12


def test_check_hermitian_psd_reports():
    eye = identity_operator(Wire("A", 2))
    rep = check_hermitian_psd(eye)
    assert rep.is_hermitian and np.isclose(rep.min_eigenvalue, 1.0)

    rep_z = check_hermitian_psd(op([("A", 2)], SZ))
    assert rep_z.is_hermitian and np.isclose(rep_z.min_eigenvalue, -1.0)
    assert not rep_z.is_psd(1e-9)

    skew = op([("A", 2)], np.array([[0.0, 1.0], [0.0, 0.0]]))
    rep_skew = check_hermitian_psd(skew)
    assert not rep_skew.is_hermitian
    assert np.isclose(rep_skew.max_asymmetry, 1.0)


def test_rename_and_drop_trivial():
    w = identity_operator(Wire("A", 2), Wire("T", 1))
    renamed = w.rename({"A": "Q"})
    assert renamed.names == ("Q", "T")
    assert renamed.drop_trivial_wires().names == ("Q",)


def test_json_round_trip_bit_exact(rng):
    g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    w = op([("A", 2), ("B", 3)], g)
    back = LabeledOperator.from_json_dict(json.loads(json.dumps(w.to_json_dict())))
    assert back.wires == w.wires
    assert np.array_equal(back.data, w.data)


def test_json_rejects_bad_payloads():
    with pytest.raises(DimensionMismatch):
        LabeledOperator.from_json_dict({"wires": [{"name": "A", "dim": 2}], "re": [[1, 0, 0]]})
    with pytest.raises(DimensionMismatch):
        LabeledOperator.from_json_dict(
            {"wires": [{"name": "A", "dim": 2}], "re": [[1, 0], [0, 1]], "im": [[0]]}
        )
    with pytest.raises(DimensionMismatch):
        # wire dims disagree with the matrix side
        LabeledOperator.from_json_dict(
            {"wires": [{"name": "A", "dim": 3}], "re": [[1, 0], [0, 1]]}
        )


def test_data_is_immutable():
    w = identity_operator(Wire("A", 2))
    with pytest.raises(ValueError):
        w.data[0, 0] = 5.0
