"""Conic-solver verification battery.

Three layers of evidence, none trusting the solver's own arithmetic:
analytic anchors with pencil-and-paper optima, a closed-form oracle family
(min Tr(CX) s.t. Tr(AX)=1 with A positive definite reduces to the smallest
eigenvalue of A^(-1/2) C A^(-1/2)), and a randomized battery cross-checked
against an independent convex solver.  Certificates are validated by
re-deriving the Farkas algebra from the returned rays, never by trusting
status strings.
"""

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swipt_alloc.conic import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    ConicError,
    ConicProblem,
    hermitian_coeff,
    hermitian_embed,
    kkt_residuals,
    recover_hermitian,
)
from swipt_alloc.solver import _svec, _svec_maps, _unsvec, solve, solve_batch


def _rand_herm(rng, n, complex_=True):
    a = rng.standard_normal((n, n))
    if complex_:
        a = a + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


# -- real embedding of Hermitian data -----------------------------------------


def test_embed_identity():
    np.testing.assert_array_equal(hermitian_embed(np.eye(2)), np.eye(4))


def test_embed_known_spectrum():
    h = np.array([[1.0, 1j], [-1j, 1.0]])  # eigenvalues 0 and 2
    eigs = np.linalg.eigvalsh(hermitian_embed(h))
    np.testing.assert_allclose(eigs, [0.0, 0.0, 2.0, 2.0], atol=1e-12)


def test_embed_duplicates_spectrum():
    rng = np.random.default_rng(7)
    h = _rand_herm(rng, 4)
    got = np.linalg.eigvalsh(hermitian_embed(h))
    want = np.sort(np.concatenate([np.linalg.eigvalsh(h)] * 2))
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_embed_rejects_nonhermitian():
    with pytest.raises(ConicError):
        hermitian_embed(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_recover_roundtrip_and_trace_pairing():
    rng = np.random.default_rng(11)
    for n in (1, 2, 5):
        h = _rand_herm(rng, n)
        np.testing.assert_allclose(recover_hermitian(hermitian_embed(h)), h, atol=1e-14)
        # coefficient halving makes embedded traces match the complex model
        w = _rand_herm(rng, n)
        lhs = float(np.tensordot(hermitian_coeff(h), hermitian_embed(w)))
        rhs = float(np.real(np.trace(h @ w)))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1, abs(rhs)))


def test_psd_preserved_both_ways():
    rng = np.random.default_rng(5)
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    w = b @ b.conj().T
    assert np.linalg.eigvalsh(hermitian_embed(w))[0] >= -1e-12
    assert np.linalg.eigvalsh(recover_hermitian(hermitian_embed(w)))[0] >= -1e-12


# -- svec coordinates ----------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**31 - 1))
def test_svec_roundtrip_and_inner_product(dim, seed):
    rng = np.random.default_rng(seed)
    maps = _svec_maps(dim)
    a = rng.standard_normal((dim, dim))
    a = (a + a.T) / 2
    b = rng.standard_normal((dim, dim))
    b = (b + b.T) / 2
    np.testing.assert_allclose(_unsvec(_svec(a, maps), dim, maps), a, atol=1e-14)
    np.testing.assert_allclose(
        float(_svec(a, maps) @ _svec(b, maps)), float(np.tensordot(a, b)), atol=1e-12
    )


# -- analytic anchors ----------------------------------------------------------


def test_lp_scalar_bound():
    # min x s.t. x >= 3: optimum 3 with multiplier 1
    p = ConicProblem()
    x = p.add_nonneg()
    p.set_objective(scalars={x: 1.0})
    p.add_constraint(">=", 3.0, scalars={x: 1.0})
    s = solve(p)
    assert s.status == OPTIMAL
    np.testing.assert_allclose(s.objective, 3.0, rtol=1e-7)
    np.testing.assert_allclose(s.scalars, [3.0], rtol=1e-7)
    np.testing.assert_allclose(s.duals, [1.0], rtol=1e-6)


def test_sdp_diag_trace():
    # min Tr(diag(1,2) X) s.t. Tr X = 1: puts all mass on the smaller eigenvalue
    p = ConicProblem()
    blk = p.add_psd_block(2)
    p.set_objective(blocks={blk: np.diag([1.0, 2.0])})
    p.add_constraint("==", 1.0, blocks={blk: np.eye(2)})
    s = solve(p)
    assert s.status == OPTIMAL
    np.testing.assert_allclose(s.objective, 1.0, atol=1e-7)
    np.testing.assert_allclose(s.blocks[0], np.diag([1.0, 0.0]), atol=1e-6)
    np.testing.assert_allclose(s.duals, [1.0], atol=1e-6)


def test_free_scalar_equality():
    # free variable pinned by an equality; optimum and multiplier by inspection
    p = ConicProblem()
    t = p.add_free()
    p.set_objective(scalars={t: 1.0}, constant=0.5)
    p.add_constraint("==", -4.0, scalars={t: 1.0})
    s = solve(p)
    assert s.status == OPTIMAL
    np.testing.assert_allclose(s.scalars, [-4.0], atol=1e-7)
    np.testing.assert_allclose(s.objective, -3.5, atol=1e-7)
    np.testing.assert_allclose(s.duals, [1.0], atol=1e-6)


def test_eigenvalue_oracle_family():
    # min Tr(CX) s.t. Tr(AX) = 1, A > 0 has value lambda_min(A^-1/2 C A^-1/2):
    # substitute Y = A^1/2 X A^1/2 to see it.  Oracle is plain eigh.
    rng = np.random.default_rng(2024)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        c = _rand_herm(rng, n)
        a = _rand_herm(rng, n) + 2.5 * n * np.eye(n)
        assert np.linalg.eigvalsh(a)[0] > 0
        isq = np.linalg.inv(_sqrtm_psd(a))
        want = float(np.linalg.eigvalsh(isq @ c @ isq)[0])
        p = ConicProblem()
        blk = p.add_psd_block(2 * n)
        p.set_objective(blocks={blk: hermitian_coeff(c)})
        p.add_constraint("==", 1.0, blocks={blk: hermitian_coeff(a)})
        s = solve(p)
        assert s.status == OPTIMAL
        np.testing.assert_allclose(s.objective, want, atol=1e-7 * (1 + abs(want)))


def _sqrtm_psd(a):
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


# -- randomized battery vs an independent solver --------------------------------


def _random_instance(rng):
    """Mixed SDP/LP instance, feasible by construction (rhs from a slack point)."""
    n = int(rng.integers(2, 5))
    complex_ = bool(rng.integers(0, 2))
    dim = 2 * n if complex_ else n
    coeff = (lambda mat: hermitian_coeff(mat)) if complex_ else (lambda mat: (mat + mat.T) / 2)
    c = _rand_herm(rng, n, complex_)
    b0 = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if complex_ else 0)
    x0 = b0 @ b0.conj().T / n
    m = int(rng.integers(1, 4))
    p = ConicProblem()
    blk = p.add_psd_block(dim)
    tsc = p.add_nonneg()
    p.set_objective(blocks={blk: coeff(c)}, scalars={tsc: float(rng.uniform(0.1, 1.0))})
    rows = []
    for _ in range(m):
        a = _rand_herm(rng, n, complex_)
        val = float(np.real(np.trace(a @ x0)))
        rel = ("==", "<=", ">=")[int(rng.integers(0, 3))]
        rhs = val + (0.0 if rel == "==" else (0.5 if rel == "<=" else -0.5))
        p.add_constraint(rel, rhs, blocks={blk: coeff(a)})
        rows.append((a, rel, rhs))
    tr0 = float(np.real(np.trace(x0)))
    p.add_constraint("<=", tr0 + 1.0, blocks={blk: coeff(np.eye(n))}, scalars={tsc: 1.0})
    rows.append((np.eye(n), "<=", tr0 + 1.0))
    return p, (n, complex_, c, rows)


def test_random_battery_against_reference():
    # 50 instances; compare full optimal values against an independent solver
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 50:
        p, (n, complex_, c, rows) = _random_instance(rng)
        s = solve(p)
        assert s.status == OPTIMAL, f"instance {checked} unexpectedly {s.status}"
        assert s.gap <= 1e-7
        assert s.primal_res <= 1e-7 and s.dual_res <= 1e-7
        x = cp.Variable((n, n), hermitian=True) if complex_ else cp.Variable(
            (n, n), symmetric=True
        )
        t = cp.Variable(nonneg=True)
        re = (lambda e: cp.real(e)) if complex_ else (lambda e: e)
        cons = [x >> 0]
        for a, rel, rhs in rows[:-1]:
            e = re(cp.trace(a @ x))
            cons.append(e == rhs if rel == "==" else (e <= rhs if rel == "<=" else e >= rhs))
        a_l, _, rhs_l = rows[-1]
        cons.append(re(cp.trace(a_l @ x)) + t <= rhs_l)
        tcoef = p.objective.scalars[0]
        ref = cp.Problem(cp.Minimize(re(cp.trace(c @ x)) + tcoef * t), cons).solve(
            solver=cp.CLARABEL
        )
        np.testing.assert_allclose(s.objective, ref, atol=1e-6 * (1 + abs(ref)))
        report = kkt_residuals(p, s)
        assert report["primal_res"] <= 1e-6
        assert report["dual_res"] <= 1e-6
        assert report["gap"] <= 1e-6
        assert report["min_eig"] >= -1e-9
        # weak duality recomputed from raw data
        dobj = sum(
            (-1.0 if rel == "<=" else 1.0) * lam * rhs
            for (a, rel, rhs), lam in zip(rows, s.duals)
        )
        assert s.objective >= dobj - 1e-6 * (1 + abs(dobj))
        checked += 1


# -- certificates ---------------------------------------------------------------


def _check_farkas(p, sol):
    """Validate an infeasibility certificate from raw problem data."""
    lam = sol.certificate["duals"]
    support = 0.0
    zb = [np.zeros((d, d)) for d in p.block_dims]
    zs = np.zeros(len(p.scalar_kinds))
    for (con, l) in zip(p.constraints, lam):
        s = -1.0 if con.rel == "<=" else 1.0
        if con.rel != "==":
            assert l >= -1e-9
        support += s * l * con.rhs
        for bid, mat in con.fn.blocks.items():
            zb[bid] -= s * l * mat
        for sid, cf in con.fn.scalars.items():
            zs[sid] -= s * l * cf
    np.testing.assert_allclose(support, 1.0, atol=1e-8)  # ray normalized to unit support
    for zmat in zb:
        if zmat.size:
            assert np.linalg.eigvalsh(zmat)[0] >= -1e-7
    assert np.all(zs >= -1e-7)


def test_infeasible_lp_certificate():
    p = ConicProblem()
    x = p.add_nonneg()
    p.set_objective(scalars={x: 1.0})
    p.add_constraint("<=", 1.0, scalars={x: 1.0})
    p.add_constraint(">=", 2.0, scalars={x: 1.0})
    s = solve(p)
    assert s.status == INFEASIBLE
    _check_farkas(p, s)


def test_infeasible_sdp_certificate():
    # Tr X = -1 unsatisfiable on the PSD cone
    p = ConicProblem()
    blk = p.add_psd_block(2)
    p.set_objective(blocks={blk: np.eye(2)})
    p.add_constraint("==", -1.0, blocks={blk: np.eye(2)})
    s = solve(p)
    assert s.status == INFEASIBLE
    _check_farkas(p, s)


def test_unbounded_lp_certificate():
    p = ConicProblem()
    x = p.add_nonneg()
    p.set_objective(scalars={x: -1.0})
    p.add_constraint(">=", 1.0, scalars={x: 1.0})
    s = solve(p)
    assert s.status == UNBOUNDED
    ray = s.certificate
    assert ray["kind"] == "primal_unbounded"
    np.testing.assert_allclose(ray["scalars"], [1.0], atol=1e-7)
    assert ray["residual"] <= 1e-7


def test_unbounded_sdp_certificate():
    # objective has a negative eigendirection the single constraint cannot block
    p = ConicProblem()
    blk = p.add_psd_block(2)
    p.set_objective(blocks={blk: np.diag([1.0, -1.0])})
    p.add_constraint(">=", 0.0, blocks={blk: np.eye(2)})
    s = solve(p)
    assert s.status == UNBOUNDED
    xray = s.certificate["blocks"][0]
    assert np.linalg.eigvalsh(xray)[0] >= -1e-9
    np.testing.assert_allclose(float(np.tensordot(np.diag([1.0, -1.0]), xray)), -1.0, atol=1e-7)


# -- solution-quality accounting -------------------------------------------------


def test_kkt_residuals_hand_built():
    p = ConicProblem()
    blk = p.add_psd_block(2)
    p.set_objective(blocks={blk: np.diag([1.0, 2.0])})
    p.add_constraint("==", 1.0, blocks={blk: np.eye(2)})
    s = solve(p)
    rep = kkt_residuals(p, s)
    assert all(rep[k] < 1e-7 for k in ("primal_res", "dual_res", "gap"))
    assert rep["min_eig"] >= -1e-9
    # perturbing the primal must show up in the recomputed residual
    s.blocks[0] = s.blocks[0] + 1e-3 * np.eye(2)
    rep = kkt_residuals(p, s)
    assert rep["primal_res"] >= 1e-4


def test_determinism_identical_traces():
    rng = np.random.default_rng(3)
    c = _rand_herm(rng, 3, complex_=False)
    p1, p2 = ConicProblem(), ConicProblem()
    for p in (p1, p2):
        blk = p.add_psd_block(3)
        p.set_objective(blocks={blk: c})
        p.add_constraint("==", 1.0, blocks={blk: np.eye(3)})
        p.add_constraint("<=", 0.8, blocks={blk: np.diag([1.0, 0.0, 0.0])})
    s1, s2 = solve(p1), solve(p2)
    np.testing.assert_array_equal(s1.info["mu_trace"], s2.info["mu_trace"])
    np.testing.assert_array_equal(s1.blocks[0], s2.blocks[0])


def test_scale_invariance_of_argmin():
    rng = np.random.default_rng(8)
    c = _rand_herm(rng, 3, complex_=False)
    sols = []
    for scale in (1.0, 7.3):
        p = ConicProblem()
        blk = p.add_psd_block(3)
        p.set_objective(blocks={blk: scale * c})
        p.add_constraint("==", 1.0, blocks={blk: np.eye(3)})
        sols.append(solve(p))
    np.testing.assert_allclose(sols[0].blocks[0], sols[1].blocks[0], atol=1e-6)
    np.testing.assert_allclose(7.3 * sols[0].objective, sols[1].objective, rtol=1e-6)


def test_batch_matches_solo_exactly():
    rng = np.random.default_rng(17)
    probs = []
    for _ in range(8):
        c = _rand_herm(rng, 3, complex_=False)
        a = _rand_herm(rng, 3, complex_=False) + 4 * np.eye(3)
        p = ConicProblem()
        blk = p.add_psd_block(3)
        t = p.add_nonneg()
        p.set_objective(blocks={blk: c}, scalars={t: 0.25})
        p.add_constraint("==", 1.0, blocks={blk: a})
        p.add_constraint("<=", 3.0, blocks={blk: np.eye(3)}, scalars={t: -1.0})
        probs.append(p)
    batched = solve_batch(probs)
    for p, got in zip(probs, batched):
        ref = solve(p)
        assert got.status == ref.status == OPTIMAL
        np.testing.assert_array_equal(got.info["mu_trace"], ref.info["mu_trace"])
        np.testing.assert_array_equal(got.blocks[0], ref.blocks[0])
        np.testing.assert_array_equal(got.duals, ref.duals)


def test_batch_mixed_outcomes():
    # an infeasible member must not perturb its feasible batch-mates
    def feas(rhs):
        p = ConicProblem()
        x = p.add_nonneg()
        p.set_objective(scalars={x: 1.0})
        p.add_constraint("<=", 1.0, scalars={x: 1.0})
        p.add_constraint(">=", rhs, scalars={x: 1.0})
        return p

    probs = [feas(0.5), feas(2.0), feas(0.25)]
    out = solve_batch(probs)
    assert [s.status for s in out] == [OPTIMAL, INFEASIBLE, OPTIMAL]
    for p, got in zip(probs, out):
        ref = solve(p)
        assert got.status == ref.status
        np.testing.assert_array_equal(got.info["mu_trace"], ref.info["mu_trace"])


def test_batch_structure_mismatch_rejected():
    p1 = ConicProblem()
    p1.add_nonneg()
    p1.set_objective(scalars={0: 1.0})
    p1.add_constraint(">=", 1.0, scalars={0: 1.0})
    p2 = ConicProblem()
    p2.add_psd_block(2)
    p2.set_objective(blocks={0: np.eye(2)})
    p2.add_constraint(">=", 1.0, blocks={0: np.eye(2)})
    with pytest.raises(ConicError):
        solve_batch([p1, p2])


# -- builder contracts -----------------------------------------------------------


def test_builder_rejects_bad_input():
    p = ConicProblem()
    blk = p.add_psd_block(2)
    with pytest.raises(ConicError):
        p.add_constraint("==", 0.0, blocks={blk: np.array([[0.0, 1.0], [0.0, 0.0]])})
    with pytest.raises(ConicError):
        p.add_constraint("==", 0.0, blocks={blk + 1: np.eye(2)})
    with pytest.raises(ConicError):
        p.add_constraint("<", 0.0, blocks={blk: np.eye(2)})
    with pytest.raises(ConicError):
        solve(p)  # no constraints
    p.add_constraint("==", 5.0, scalars={})  # empty lhs
    with pytest.raises(ConicError):
        solve(p)


def test_dump_golden():
    p = ConicProblem()
    blk = p.add_psd_block(2)
    t = p.add_nonneg()
    p.set_objective(blocks={blk: np.diag([1.0, 2.0])}, scalars={t: 0.5}, constant=1.0)
    p.add_constraint("<=", 4.0, blocks={blk: np.array([[0.0, 1.0], [1.0, 0.0]])}, name="offdiag")
    buf = io.StringIO()
    p.dump(buf)
    want = (
        "conic-problem v1\n"
        "blocks 2\n"
        "scalars nonneg\n"
        "objective constant=1.0\n"
        "O 0 0 0 1.0\n"
        "O 0 1 1 2.0\n"
        "O s 0 0.5\n"
        "C0 <= 4.0 name=offdiag\n"
        "C0 0 1 0 1.0\n"
    )
    assert buf.getvalue() == want
