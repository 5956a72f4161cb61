"""The k = 0 synthesis problem solved by an independent SDP solver."""

import numpy as np
import pytest

import etmpc

cp = pytest.importorskip("cvxpy")


def solve_with_cvxpy(c, blocks, solver):
    y = cp.Variable(len(c))
    cons = []
    for _, F0, Fs in blocks:
        expr = F0 + sum(y[i] * F for i, F in enumerate(Fs) if np.any(F))
        # Symmetrise explicitly so cvxpy accepts the PSD constraint.
        cons.append(0.5 * (expr + expr.T) >> 0)
    prob = cp.Problem(cp.Minimize(c @ y), cons)
    prob.solve(solver=solver)
    assert prob.status == cp.OPTIMAL, prob.status
    return prob.value, y.value


def min_eig(blocks, y):
    return min(
        np.linalg.eigvalsh(F0 + sum(y[i] * F for i, F in enumerate(Fs))).min()
        for _, F0, Fs in blocks
    )


def test_initial_gamma_matches_cvxopt(surrogate):
    c, blocks = etmpc.initial_program(surrogate)
    ours = etmpc.solve_initial(surrogate)
    assert ours["relative_gap"] <= 1e-6
    assert min_eig(blocks, ours["values"]) >= -1e-6
    theirs, y = solve_with_cvxpy(np.asarray(c), blocks, cp.CVXOPT)
    assert min_eig(blocks, y) >= -1e-6
    assert ours["gamma"] == pytest.approx(theirs, rel=1e-5)


def test_no_other_feasible_point_beats_ours(surrogate):
    # Clarabel stops early on this problem (about 1e-4 above the optimum),
    # so it only serves as an upper bound.
    c, blocks = etmpc.initial_program(surrogate)
    ours = etmpc.solve_initial(surrogate)
    theirs, y = solve_with_cvxpy(np.asarray(c), blocks, cp.CLARABEL)
    assert min_eig(blocks, y) >= -1e-6
    assert ours["gamma"] <= theirs * (1 + 1e-6)


def test_program_structure(surrogate):
    c, blocks = etmpc.initial_program(surrogate)
    assert c[0] == 1.0 and np.count_nonzero(c) == 1
    tags = [t for t, _, _ in blocks]
    assert tags[0].startswith("cost:")
    assert "state" in tags
    for _, F0, Fs in blocks:
        assert np.allclose(F0, F0.T)
        assert all(np.allclose(F, F.T) for F in Fs)
