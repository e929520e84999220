"""Complex-Hermitian semidefinite programs with partial-trace constraints.

Problems are stated over a Hermitian matrix variable W on named wires:
optimize Tr(C W) subject to W >= 0 and Tr_S W = R for declared wire subsets
S.  The complex program is reduced to a real symmetric cone program through
the standard 2x embedding H -> [[Re H, -Im H], [Im H, Re H]] (PSD is
preserved both ways; objectives are halved to compensate for the doubling)
and handed to an interior-point cone solver.  The partial-trace constraints
are compiled once per problem to sparse linear maps on the parameter vector
and cached on the problem object.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers as cvx_solvers
from cvxopt import spmatrix as cvx_spmatrix

from .channels import ChannelDescriptor
from .errors import Infeasible, NumericalTrouble
from .wires import LabeledOperator, Wire

__all__ = [
    "SdpProblem",
    "SdpSolution",
    "SolverOptions",
    "solve",
    "real_embedding",
    "from_real_embedding",
    "least_dominating_marginal",
    "diamond_norm_distance",
    "problem_to_json_dict",
]


@dataclass(frozen=True)
class SolverOptions:
    feasibility_tol: float = 1e-8
    relative_gap_tol: float = 1e-8
    absolute_gap_tol: float = 1e-8
    max_iterations: int = 200
    max_variable_side: int = 64
    accept_tol: float = 1e-6  # residual level still accepted as usable


DEFAULT_OPTIONS = SolverOptions()


# ---------------------------------------------------------------------------
# real embedding and Hermitian parametrization
# ---------------------------------------------------------------------------

def real_embedding(m: np.ndarray) -> np.ndarray:
    """[[Re, -Im], [Im, Re]]: Hermitian m is PSD iff the embedding is PSD."""
    x, y = m.real, m.imag
    return np.block([[x, -y], [y, x]])


def from_real_embedding(s: np.ndarray) -> np.ndarray:
    n = s.shape[0] // 2
    x = (s[:n, :n] + s[n:, n:]) / 2
    y = (s[n:, :n] - s[:n, n:]) / 2
    w = x + 1j * y
    return (w + w.conj().T) / 2


def _herm_basis_entries(n: int) -> list[list[tuple[int, int, complex]]]:
    """Sparse entries of a real basis for n x n Hermitian matrices.

    Order: n diagonal units, then for i<j the symmetric pair, then the
    antisymmetric (imaginary) pair.  Coefficients are the real parameters
    (W_ii, Re W_ij, Im W_ij).
    """
    basis: list[list[tuple[int, int, complex]]] = []
    for i in range(n):
        basis.append([(i, i, 1.0 + 0j)])
    for i in range(n):
        for j in range(i + 1, n):
            basis.append([(i, j, 1.0 + 0j), (j, i, 1.0 + 0j)])
    for i in range(n):
        for j in range(i + 1, n):
            basis.append([(i, j, 1j), (j, i, -1j)])
    return basis


def _herm_from_params(x: np.ndarray, n: int) -> np.ndarray:
    w = np.zeros((n, n), dtype=np.complex128)
    w[np.diag_indices(n)] = x[:n]
    iu = np.triu_indices(n, 1)
    k = len(iu[0])
    w[iu] += x[n : n + k]
    w[iu] += 1j * x[n + k : n + 2 * k]
    w[(iu[1], iu[0])] = w[iu].conj()
    return w


def _embedding_triplets(entries, n):
    """Embedded-matrix nonzeros (row, col, value) for one basis element."""
    out = []
    for a, b, val in entries:
        re, im = val.real, val.imag
        if re:
            out.append((a, b, re))
            out.append((a + n, b + n, re))
        if im:
            out.append((a + n, b, im))
            out.append((a, b + n, -im))
    return out


def _trace_pairing(op_data: np.ndarray, entries) -> float:
    """Tr(C B) for Hermitian C and a sparse Hermitian basis element B."""
    val = sum(op_data[b, a] * v for a, b, v in entries)
    return float(val.real)


# ---------------------------------------------------------------------------
# problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SdpProblem:
    """Optimize Tr(C W) over PSD W with partial-trace equality constraints.

    constraints: tuple of (trace_out wire names, target operator) meaning
    Tr_S W = R.  The variable wires default to the objective's wires.
    """

    objective: LabeledOperator
    sense: str = "max"
    constraints: tuple[tuple[tuple[str, ...], LabeledOperator], ...] = ()
    variable_wires: tuple[Wire, ...] = ()
    _compiled: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        wires = tuple(self.variable_wires) or self.objective.wires
        object.__setattr__(self, "variable_wires", wires)
        cons = tuple(
            (tuple((s,)) if isinstance(s, str) else tuple(s), r)
            for s, r in self.constraints
        )
        object.__setattr__(self, "constraints", cons)
        if tuple(self.objective.names) != tuple(w.name for w in wires):
            raise ValueError("objective must live on the variable wires, in order")
        asym = np.abs(self.objective.data - self.objective.data.conj().T).max()
        if asym > 1e-10 * max(1.0, self.objective.max_abs()):
            raise ValueError(f"objective is not Hermitian (asymmetry {asym:.2e})")


class _Compiled:
    __slots__ = ("n", "m", "basis", "G", "dims", "A", "b", "row_ops", "kept_rows")


def _compile(problem: SdpProblem) -> _Compiled:
    if problem._compiled is not None:
        return problem._compiled
    wires = problem.variable_wires
    n = int(np.prod([w.dim for w in wires], dtype=np.int64)) if wires else 1
    basis = _herm_basis_entries(n)
    m = len(basis)

    rows_i, cols_i, vals = [], [], []
    two_n = 2 * n
    for k, entries in enumerate(basis):
        for r, c, v in _embedding_triplets(entries, n):
            rows_i.append(c * two_n + r)  # column-major storage
            cols_i.append(k)
            vals.append(-v)  # G x + s = 0 with s the embedded matrix
    G = cvx_spmatrix(vals, rows_i, cols_i, size=(two_n * two_n, m))

    # constraint rows: Hermitian-basis pairings of Tr_S W with targets
    strides = {}
    acc = 1
    for w in reversed(wires):
        strides[w.name] = acc
        acc *= w.dim
    name_order = [w.name for w in wires]

    a_rows: list[np.ndarray] = []
    b_vals: list[float] = []
    row_ops: list[LabeledOperator] = []
    for traced, target in problem.constraints:
        traced = tuple(traced)
        rem = [w for w in wires if w.name not in set(traced)]
        rem_names = [w.name for w in rem]
        missing = set(traced) - set(name_order)
        if missing:
            raise ValueError(f"constraint traces unknown wires {sorted(missing)}")
        if sorted(target.names) != sorted(rem_names):
            raise ValueError(
                f"constraint target wires {target.names} do not match the "
                f"untraced variable wires {rem_names}"
            )
        target = target.permute(rem_names)
        d_rem = int(np.prod([w.dim for w in rem], dtype=np.int64)) if rem else 1
        traced_wires = [w for w in wires if w.name in set(traced)]
        d_tr = int(np.prod([w.dim for w in traced_wires], dtype=np.int64)) if traced_wires else 1

        # global offsets of rem and traced multi-indices
        def offsets(group: list[Wire]) -> np.ndarray:
            if not group:
                return np.zeros(1, dtype=np.int64)
            dims = [g.dim for g in group]
            out = np.zeros(int(np.prod(dims)), dtype=np.int64)
            for flat in range(out.size):
                rest, off = flat, 0
                for g, dg in zip(reversed(group), reversed(dims)):
                    off += (rest % dg) * strides[g.name]
                    rest //= dg
                out[flat] = off
            return out

        off_rem = offsets(rem)
        off_tr = offsets(traced_wires)

        contrib: dict[tuple[int, int], list[tuple[int, complex]]] = {}
        rem_basis = _herm_basis_entries(d_rem)
        base_row = len(a_rows)
        for l, entries in enumerate(rem_basis):
            herm = np.zeros((d_rem, d_rem), dtype=np.complex128)
            for p, q, v in entries:
                herm[p, q] += v
            row_ops.append(
                LabeledOperator(tuple(rem), herm) if rem else LabeledOperator((), herm)
            )
            b_vals.append(_trace_pairing(target.data, entries))
            for p, q, v in entries:
                cv = np.conj(v)
                for s in range(d_tr):
                    key = (off_rem[p] + off_tr[s], off_rem[q] + off_tr[s])
                    contrib.setdefault(key, []).append((base_row + l, cv))
            a_rows.append(np.zeros(m))
        for k, entries in enumerate(basis):
            for a, b, v in entries:
                for l, cv in contrib.get((a, b), ()):
                    a_rows[l][k] += (cv * v).real

    comp = _Compiled()
    comp.n, comp.m, comp.basis, comp.G = n, m, basis, G
    comp.dims = {"l": 0, "q": [], "s": [two_n]}
    comp.row_ops = row_ops
    if a_rows:
        A = np.vstack(a_rows)
        b = np.asarray(b_vals)
        # drop linearly dependent rows (multiple constraints may overlap)
        _, r, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        tol = max(A.shape) * np.finfo(float).eps * (diag[0] if diag.size else 1.0)
        rank = int((diag > tol).sum())
        keep = np.sort(piv[:rank])
        x0, *_ = np.linalg.lstsq(A[keep], b[keep], rcond=None)
        resid = np.abs(A @ x0 - b).max() if b.size else 0.0
        if resid > 1e-8 * max(1.0, np.abs(b).max() if b.size else 1.0):
            raise Infeasible(
                f"constraints are linearly inconsistent (residual {resid:.2e})",
                certificate_norm=float(resid),
            )
        comp.A, comp.b, comp.kept_rows = A[keep], b[keep], keep
    else:
        comp.A, comp.b, comp.kept_rows = np.zeros((0, m)), np.zeros(0), np.zeros(0, int)
    object.__setattr__(problem, "_compiled", comp)
    return comp


# ---------------------------------------------------------------------------
# solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SdpSolution:
    primal_value: float
    dual_value: float
    gap: float
    w_opt: LabeledOperator
    status: str  # optimal | infeasible | numerical_trouble
    constraint_residual: float
    min_eigenvalue: float
    dual_multiplier: LabeledOperator | None = None


def _conelp(c, G, h, dims, A, b, opts: SolverOptions):
    options = {
        "show_progress": False,
        "maxiters": opts.max_iterations,
        "abstol": opts.absolute_gap_tol,
        "reltol": opts.relative_gap_tol,
        "feastol": opts.feasibility_tol,
    }
    kwargs = {} if A is None else {"A": A, "b": b}
    sol = cvx_solvers.conelp(c, G, h, dims=dims, options=options, **kwargs)
    if sol["status"] == "unknown":
        relaxed = dict(options, abstol=1e-6, reltol=1e-6, feastol=1e-6)
        retry = cvx_solvers.conelp(c, G, h, dims=dims, options=relaxed, **kwargs)
        if retry["status"] != "unknown":
            retry["relaxed"] = True
            return retry
        sol["relaxed"] = True
    return sol


def solve(problem: SdpProblem, opts: SolverOptions = DEFAULT_OPTIONS) -> SdpSolution:
    """Solve the SDP, returning primal and dual values with a gap certificate."""
    comp = _compile(problem)
    n = comp.n
    if n > opts.max_variable_side:
        raise ValueError(
            f"variable side {n} exceeds the configured cap "
            f"{opts.max_variable_side}"
        )
    sign = -1.0 if problem.sense == "max" else 1.0

    pinned = _pinned_solution(problem, opts)
    if pinned is not None:
        return pinned

    c_np = np.array(
        [sign * _trace_pairing(problem.objective.data, e) for e in comp.basis]
    )
    c = cvx_matrix(c_np)
    h = cvx_matrix(np.zeros((2 * n) ** 2))
    A = cvx_matrix(comp.A) if comp.A.shape[0] else None
    b = cvx_matrix(comp.b) if comp.A.shape[0] else None

    sol = _conelp(c, G=comp.G, h=h, dims=comp.dims, A=A, b=b, opts=opts)
    status = sol["status"]
    if status == "primal infeasible":
        parts = [np.asarray(sol["z"]).ravel()]
        if sol["y"] is not None:
            parts.append(np.asarray(sol["y"]).ravel())
        raise Infeasible(
            "constraint set is empty (interior-point infeasibility certificate)",
            certificate_norm=float(np.linalg.norm(np.concatenate(parts))),
        )
    if status == "dual infeasible":
        raise NumericalTrouble("problem appears unbounded (dual infeasible)")
    if status == "unknown" and sol["x"] is None:
        raise NumericalTrouble("interior-point solver failed to produce an iterate")

    x = np.asarray(sol["x"]).ravel()
    w = _herm_from_params(x, n)
    w_op = LabeledOperator(problem.variable_wires, w)
    primal = float(np.trace(problem.objective.data @ w).real)
    dual = sign * float(sol["dual objective"])
    gap = abs(primal - dual)

    resid = 0.0
    for traced, target in problem.constraints:
        rem_names = [nm for nm in w_op.names if nm not in set(traced)]
        diff = w_op.partial_trace(traced).permute(rem_names) - target.permute(rem_names)
        resid = max(resid, diff.max_abs())
    min_eig = float(np.linalg.eigvalsh(w)[0])

    ok = (
        status == "optimal"
        and resid <= opts.accept_tol
        and min_eig >= -opts.accept_tol
        and gap <= opts.accept_tol * max(1.0, abs(primal))
    )
    usable = resid <= 1e-5 and min_eig >= -1e-5
    if not ok and not usable:
        raise NumericalTrouble(
            f"solver returned status {status!r} with residual {resid:.2e}, "
            f"min eig {min_eig:.2e}, gap {gap:.2e}"
        )

    multiplier = None
    if len(problem.constraints) == 1 and sol["y"] is not None:
        y = np.asarray(sol["y"]).ravel()
        acc = None
        for yk, row in zip(y, (comp.row_ops[i] for i in comp.kept_rows)):
            term = float(yk) * row
            acc = term if acc is None else acc + term
        if acc is not None:
            multiplier = sign * -1.0 * acc  # normalized so Tr(multiplier) = dual value

    return SdpSolution(
        primal_value=primal,
        dual_value=dual,
        gap=gap,
        w_opt=w_op,
        status="optimal" if ok else "numerical_trouble",
        constraint_residual=resid,
        min_eigenvalue=min_eig,
        dual_multiplier=multiplier,
    )


def _pinned_solution(problem: SdpProblem, opts: SolverOptions) -> SdpSolution | None:
    """Direct answer when some constraint traces only trivial wires.

    Tracing a product of dimension-1 wires is the identity, so such a
    constraint pins W completely and no cone program is needed.
    """
    wires = problem.variable_wires
    for traced, target in problem.constraints:
        d_tr = int(
            np.prod([problem.objective.wire(t).dim for t in traced], dtype=np.int64)
        ) if traced else 1
        if d_tr != 1:
            continue
        rem_names = [w.name for w in wires if w.name not in set(traced)]
        pin = target.permute(rem_names).data
        w = np.zeros_like(problem.objective.data)
        w[...] = pin  # dim-1 wires do not change the matrix
        w_op = LabeledOperator(wires, w)
        resid = 0.0
        for tr2, tg2 in problem.constraints:
            rem2 = [nm for nm in w_op.names if nm not in set(tr2)]
            diff = w_op.partial_trace(tr2).permute(rem2) - tg2.permute(rem2)
            resid = max(resid, diff.max_abs())
        min_eig = float(np.linalg.eigvalsh((w + w.conj().T) / 2)[0])
        if resid > opts.accept_tol or min_eig < -opts.accept_tol:
            raise Infeasible(
                "constraints pin the variable to an infeasible operator "
                f"(residual {resid:.2e}, min eig {min_eig:.2e})",
                certificate_norm=float(max(resid, -min_eig)),
            )
        val = float(np.trace(problem.objective.data @ w).real)
        return SdpSolution(
            primal_value=val,
            dual_value=val,
            gap=0.0,
            w_opt=w_op,
            status="optimal",
            constraint_residual=resid,
            min_eigenvalue=min_eig,
        )
    return None


# ---------------------------------------------------------------------------
# the stated dual of the signalling program, as an independent oracle
# ---------------------------------------------------------------------------

def least_dominating_marginal(
    c: LabeledOperator,
    marginal_wires: Sequence[str],
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> float:
    """min Tr(L) over Hermitian L on the given wires with id (x) L >= C.

    This is the dual program of max Tr(C W) subject to W >= 0 and
    Tr_{other} W = id; it is formulated and solved independently of that
    primal so the two can cross-check each other.
    """
    marginal_wires = tuple(marginal_wires)
    other = [w for w in c.wires if w.name not in set(marginal_wires)]
    lam_wires = [c.wire(nm) for nm in marginal_wires]
    d_lam = int(np.prod([w.dim for w in lam_wires], dtype=np.int64))
    n = c.dim
    basis = _herm_basis_entries(d_lam)

    eye = np.eye(int(np.prod([w.dim for w in other], dtype=np.int64)) if other else 1)
    order = [w.name for w in other] + list(marginal_wires)
    dims_order = [c.wire(nm).dim for nm in order]
    perm_back = [order.index(nm) for nm in c.names]

    def inflate(mat: np.ndarray) -> np.ndarray:
        full = np.kron(eye, mat)
        t = full.reshape(dims_order + dims_order)
        k = len(order)
        axes = perm_back + [a + k for a in perm_back]
        return t.transpose(axes).reshape(n, n)

    rows_i, cols_i, vals = [], [], []
    two_n = 2 * n
    cvec = np.zeros(len(basis))
    for l, entries in enumerate(basis):
        mat = np.zeros((d_lam, d_lam), dtype=np.complex128)
        for p, q, v in entries:
            mat[p, q] += v
        emb = real_embedding(inflate(mat))
        nz = np.nonzero(emb)
        for r, ccol in zip(*nz):
            rows_i.append(int(ccol) * two_n + int(r))
            cols_i.append(l)
            vals.append(-float(emb[r, ccol]))
        cvec[l] = float(np.trace(mat).real)
    G = cvx_spmatrix(vals, rows_i, cols_i, size=(two_n * two_n, len(basis)))
    h = cvx_matrix(real_embedding(-c.data).ravel(order="F").astype(float))

    sol = _conelp(cvx_matrix(cvec), G, h, {"l": 0, "q": [], "s": [two_n]}, None, None, DEFAULT_OPTIONS)
    if sol["status"] not in ("optimal",) and sol["x"] is None:
        raise NumericalTrouble(f"dual oracle failed with status {sol['status']!r}")
    return float(sol["primal objective"])


# ---------------------------------------------------------------------------
# diamond norm
# ---------------------------------------------------------------------------

def diamond_norm_distance(
    n: ChannelDescriptor,
    m: ChannelDescriptor,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> float:
    """Diamond-norm distance between two channels via the trace-norm program.

    maximize Tr(J W) over Hermitian W and a density operator rho on the
    input, subject to -(rho (x) id) <= W <= rho (x) id.  J is the Choi
    operator of the difference map; the optimum equals ||N - M||_diamond.
    """
    if n.dim_in != m.dim_in or n.dim_out != m.dim_out:
        raise ValueError("channels must share input and output dimensions")
    order = tuple(n.input_wires) + tuple(n.output_wires)
    m_aligned = m.rename(
        dict(zip(tuple(m.input_wires) + tuple(m.output_wires), order))
    )
    j_op = n.op.permute(order) - m_aligned.op.permute(order)
    j = (j_op.data + j_op.data.conj().T) / 2
    d_in, d_tot = n.dim_in, j.shape[0]
    d_out = d_tot // d_in

    basis_w = _herm_basis_entries(d_tot)
    basis_r = _herm_basis_entries(d_in)
    m_w, m_r = len(basis_w), len(basis_r)
    two_t, two_i = 2 * d_tot, 2 * d_in

    rows_i, cols_i, vals = [], [], []

    def add_block(offset, col, emb, sign):
        nz = np.nonzero(emb)
        side = emb.shape[0]
        for r, c in zip(*nz):
            rows_i.append(offset + int(c) * side + int(r))
            cols_i.append(col)
            vals.append(sign * float(emb[r, c]))

    off1, off2, off3 = 0, two_t**2, 2 * two_t**2
    eye_out = np.eye(d_out)
    for k, entries in enumerate(basis_w):
        mat = np.zeros((d_tot, d_tot), dtype=np.complex128)
        for p, q, v in entries:
            mat[p, q] += v
        emb = real_embedding(mat)
        add_block(off1, k, emb, +1.0)  # s1 = rho (x) id - W
        add_block(off2, k, emb, -1.0)  # s2 = rho (x) id + W
    for l, entries in enumerate(basis_r):
        mat = np.zeros((d_in, d_in), dtype=np.complex128)
        for p, q, v in entries:
            mat[p, q] += v
        emb_full = real_embedding(np.kron(mat, eye_out))
        emb_small = real_embedding(mat)
        add_block(off1, m_w + l, emb_full, -1.0)
        add_block(off2, m_w + l, emb_full, -1.0)
        add_block(off3, m_w + l, emb_small, -1.0)  # s3 = rho

    G = cvx_spmatrix(
        vals, rows_i, cols_i, size=(2 * two_t**2 + two_i**2, m_w + m_r)
    )
    h = cvx_matrix(np.zeros(2 * two_t**2 + two_i**2))
    a_row = np.zeros(m_w + m_r)
    a_row[m_w : m_w + d_in] = 1.0  # Tr rho = 1 (diagonal parameters)
    A = cvx_matrix(a_row.reshape(1, -1))
    b = cvx_matrix([1.0])
    c_np = np.zeros(m_w + m_r)
    for k, entries in enumerate(basis_w):
        c_np[k] = -_trace_pairing(j, entries)

    sol = _conelp(
        cvx_matrix(c_np), G, h, {"l": 0, "q": [], "s": [two_t, two_t, two_i]},
        A, b, opts,
    )
    if sol["status"] == "unknown" and sol["x"] is None:
        raise NumericalTrouble("diamond norm solve failed")
    value = -float(sol["primal objective"])
    return max(0.0, value)


# ---------------------------------------------------------------------------
# problem dump
# ---------------------------------------------------------------------------

def problem_to_json_dict(problem: SdpProblem) -> dict:
    """Documented dump for external verification.

    ``embedded_objective_half`` is the real 2x embedding of the objective
    divided by two, so that Tr(embedded_objective_half . embedded(W)) equals
    Tr(objective . W) exactly.
    """
    return {
        "sense": problem.sense,
        "variable_wires": [
            {"name": w.name, "dim": w.dim} for w in problem.variable_wires
        ],
        "objective": problem.objective.to_json_dict(),
        "constraints": [
            {"trace_out": list(s), "target": r.to_json_dict()}
            for s, r in problem.constraints
        ],
        "embedded_objective_half": (
            real_embedding(problem.objective.data) / 2
        ).tolist(),
    }


def dump_problem(problem: SdpProblem, path) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_json_dict(problem), fh)
