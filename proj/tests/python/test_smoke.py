# SPDX-License-Identifier: Apache-2.0
"""End-to-end smoke checks for the Python bindings."""

import numpy as np
import pytest

import bpqp


def _empty(rows, cols):
    return np.zeros((rows, cols))


def test_solve_equality_pinned_scalar():
    problem = bpqp.QpProblem(
        P=np.array([[1.0]]),
        q=np.array([0.0]),
        A=np.array([[1.0]]),
        b=np.array([1.0]),
        G=_empty(0, 1),
        c=np.zeros(0),
    )
    sol = bpqp.solve(problem)
    assert sol.status == "solved"
    assert sol.z[0] == pytest.approx(1.0, abs=1e-8)
    assert sol.nu[0] == pytest.approx(-1.0, abs=1e-8)
    assert bpqp.kkt_residual_norm(problem, sol.z, sol.nu, sol.lam) < 1e-8


def test_qp_layer_roundtrip_matches_oracle():
    problem = bpqp.gen_qp(d=10, m_eq=5, n_ineq=5, seed=3)
    z, tape = bpqp.qp_forward(problem)
    assert z.shape == (10,)
    dl = np.ones(10)
    grads = bpqp.qp_backward(tape, dl)
    assert grads.dq.shape == (10,)
    assert grads.dP.shape == (10, 10)

    # the dense full-system oracle must agree with the active-set path
    sol = bpqp.solve(problem)
    exact = bpqp.exact_backward_oracle(problem, sol, dl)
    assert bpqp.cosine_similarity(grads.dq, exact.dq) > 0.99


def test_attach_external_solution_reproduces_gradients():
    problem = bpqp.gen_qp(seed=11)
    z, tape = bpqp.qp_forward(problem)
    dl = np.ones(problem.dim())
    integrated = bpqp.qp_backward(tape, dl)

    sol = bpqp.solve(problem)
    attached = bpqp.attach_external_solution(problem, sol.z, sol.nu, sol.lam)
    external = bpqp.qp_backward(attached, dl)
    np.testing.assert_allclose(external.dq, integrated.dq, atol=1e-10)


def test_lp_layer_smoothed_box():
    theta = np.array([1.0, -1.0])
    g = np.vstack([np.eye(2), -np.eye(2)])
    h = np.ones(4)
    z, tape = bpqp.lp_forward(
        theta, 0.25, _empty(0, 2), np.zeros(0), g, h
    )
    assert z[0] == pytest.approx(-1.0, abs=1e-4)
    assert z[1] == pytest.approx(1.0, abs=1e-4)
    dtheta = bpqp.lp_backward(tape, np.ones(2))
    assert dtheta.shape == (2,)


def test_socp_layer_closed_form():
    q, a, b = bpqp.gen_socp(d=10, seed=4)
    z, lam, tape = bpqp.socp_forward(q, a, b)
    assert np.linalg.norm(z) == pytest.approx(b[0], abs=1e-8)
    assert lam[0] == pytest.approx(np.linalg.norm(q), rel=1e-8)
    dq, da, db = bpqp.socp_backward(tape, np.ones(10))
    assert dq.shape == (10,)
    assert db.shape == (1,)


def test_mvo_layer_and_gradient():
    sigma = np.eye(2)
    w, tape = bpqp.mvo_forward(np.zeros(2), sigma, gamma=1.0)
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-6)
    dmu = bpqp.mvo_backward(tape, np.array([1.0, 0.0]))
    np.testing.assert_allclose(dmu, [0.5, -0.5], atol=1e-6)


def test_generator_determinism():
    first = bpqp.gen_qp(seed=9)
    second = bpqp.gen_qp(seed=9)
    np.testing.assert_array_equal(first.P, second.P)
    np.testing.assert_array_equal(first.q, second.q)
    assert bpqp.derive_seed(0, 1) == bpqp.derive_seed(0, 1)
    assert bpqp.derive_seed(0, 1) != bpqp.derive_seed(0, 2)


def test_invalid_problem_is_rejected():
    with pytest.raises(Exception):
        bpqp.QpProblem(
            P=np.eye(2),
            q=np.zeros(3),  # mismatched length
            A=_empty(0, 2),
            b=np.zeros(0),
            G=_empty(0, 2),
            c=np.zeros(0),
        )
