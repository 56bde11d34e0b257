"""Power-minimizing transmit design for the secrecy-constrained downlink.

One multi-antenna transmitter serves K single-antenna receivers that split
their received signal between an information decoder and an energy
harvester, while M multi-antenna roaming receivers harvest power but must
be prevented from decoding the information streams.  Artificial noise with
covariance V is radiated alongside the per-user transmit covariances W_k to
blind the roaming receivers; the design minimizes the radiated power
sum_k tr(W_k) + tr(V) subject to per-user SINR floors, per-receiver decode
caps, and harvest floors at both receiver classes.

Two ingredients are non-affine in the natural variables.  The decode cap
log2 det(I + Q_m^{-1} G_m' W_k G_m) <= r_cap, with
Q_m = G_m' V G_m + (s_ant^2 + s_s^2) I, is handled through the determinant
bound det(I + A) >= 1 + tr(A) (equality iff rank(A) <= 1): the cap is
implied by -- and at rank one equivalent to -- the linear matrix inequality
G_m' W_k G_m <= (psi - 1) Q_m with psi = 2^r_cap, which enters the conic
program through a slack PSD block pinned by Hermitian-basis equality rows.
The reciprocals 1/rho and 1/(1 - rho) of the splitting ratios enter through
2x2 hyperbolic blocks [[t, 1], [1, rho]] >= 0, so t >= 1/rho exactly.

Dropping the rank-one requirement on W_k leaves a semidefinite program, and
its optimum is recovered exactly: projecting each W_k onto the direction
W_k h_k preserves the received signal power h_k' W_k h_k and the radiated
power, and moving the discarded component into the artificial noise weakly
improves every remaining constraint, so a rank-one optimum of the original
problem is always available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conic import (
    INFEASIBLE,
    NUMERICAL_LIMIT,
    OPTIMAL,
    ConicError,
    ConicProblem,
    hermitian_coeff,
    recover_hermitian,
    require_optimal,
)
from .metrics import (
    SecureQoS,
    eav_rate_upper,
    harvested_secure,
    secrecy_rate,
    sinr_k,
)
from .solver import solve

__all__ = [
    "SecureAllocation",
    "SecureInfeasible",
    "VerifyReport",
    "build_secure_sdp",
    "solve_secure",
    "rank_one_reconstruct",
    "optimal_rho_from_duals",
    "baseline_zf",
    "verify_secure",
]

# Interior box for the splitting ratios inside the program: keeps the
# hyperbolic blocks bounded (t <= 1/RHO_MIN).  The optimum is interior
# whenever the SINR and harvest floors are both active, so the box never
# binds on instances with positive requirements.
_RHO_MIN = 1e-6

# The splitting-ratio stationarity identity relating the floor multipliers
# to rho_k degrades like the duality gap divided by the smallest active
# multiplier, so the gap is driven far below the verification tolerances.
_GAP_TOL = 1e-11
_FEAS_TOL = 1e-8

_E00 = np.array([[1.0, 0.0], [0.0, 0.0]])
_E01 = np.array([[0.0, 0.5], [0.5, 0.0]])
_E11 = np.array([[0.0, 0.0], [0.0, 1.0]])


class SecureInfeasible(RuntimeError):
    """The QoS targets admit no transmit design.

    `rows` names the constraints with the largest weights in the dual
    (Farkas) ray when the solver produced one; `certificate` carries the
    raw ray for independent checking.
    """

    def __init__(self, message, rows=None, certificate=None):
        super().__init__(message)
        self.rows = list(rows or [])
        self.certificate = certificate


@dataclass
class VerifyReport:
    """Outcome of re-deriving every constraint from raw channels.

    ok          all checks passed at the requested tolerance
    violations  human-readable descriptions of the failed checks
    margins     per-constraint slack values (sign convention: >= 0 is
                satisfied), keyed by constraint family
    """

    ok: bool
    violations: list
    margins: dict


@dataclass
class SecureAllocation:
    """One transmit design for the secrecy-constrained downlink.

    w_mats       K Hermitian PSD transmit covariances (rank one after
                 reconstruction)
    v            artificial-noise covariance, Hermitian PSD
    rho          (K,) power-splitting ratios in (0, 1)
    p_tx         radiated power sum_k tr(W_k) + tr(V) recomputed from the
                 returned matrices
    relaxed_p_tx objective value of the semidefinite relaxation
    qos          achieved SINRs, decode-rate bounds, secrecy rates, and
                 harvested powers, all recomputed from raw channels
    rank_ratios  (K,) second-to-first eigenvalue ratios of w_mats
    duals        {"alpha", "beta", "nu"} multipliers of the SINR floors,
                 desired-harvest floors, and roaming-harvest floors (NaN
                 where the row was vacuous and therefore absent), or None
                 for allocations built without a solve
    scheme       "optimal", "zf-1", or "zf-2"
    report       the VerifyReport from construction-time verification
    """

    w_mats: list
    v: np.ndarray
    rho: np.ndarray
    p_tx: float
    relaxed_p_tx: float
    qos: SecureQoS
    rank_ratios: np.ndarray
    duals: dict | None = None
    scheme: str = "optimal"
    report: VerifyReport | None = None

    @property
    def beam_vectors(self):
        """Per-user beams sqrt(lam_max) u_max of the transmit covariances."""
        beams = []
        for w in self.w_mats:
            vals, vecs = np.linalg.eigh(np.asarray(w))
            beams.append(vecs[:, -1] * np.sqrt(max(float(vals[-1]), 0.0)))
        return beams


def _herm_basis(n):
    """Orthonormal basis of the n x n Hermitian matrices under tr(AB)."""
    basis = []
    for p in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[p, p] = 1.0
        basis.append(e)
    r = 1.0 / np.sqrt(2.0)
    for p in range(n):
        for q in range(p + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[p, q] = r
            e[q, p] = r
            basis.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[p, q] = 1j * r
            e[q, p] = -1j * r
            basis.append(e)
    return basis


@dataclass
class _Handles:
    """Variable/row bookkeeping for one assembled program."""

    w_ids: list | None  # W_k PSD block ids (matrix formulation)
    q_ids: list | None  # per-user power scalars (fixed-direction formulation)
    v_id: int
    t_ids: list | None  # hyperbolic blocks carrying (t_k, rho_k)
    s_ids: list | None  # hyperbolic blocks carrying (s_k, 1 - rho_k)
    c1_rows: list
    c3_rows: list  # entries None when the harvest floor is zero
    c4_rows: list  # entries None when the roaming floor is vacuous
    scales: dict = field(default_factory=dict)
    directions: list | None = None
    rho_fixed: np.ndarray | None = None
    power_unit: float = 1.0  # watts represented by one unit of W/V/q


def _assemble(channels, params, single_user_detection=False, directions=None,
              rho_fixed=None):
    """Build the conic program; see `build_secure_sdp` for the public entry.

    `directions` fixes every beam direction and replaces the W_k blocks by
    nonnegative power scalars q_k (W_k = q_k d_k d_k'); `rho_fixed` folds a
    common splitting ratio into the constants and drops the hyperbolic
    blocks.  Every row is divided by its largest coefficient magnitude so
    the assembled data is O(1) regardless of the channel-gain scale
    (dividing a constraint by a positive constant changes nothing); the
    scales are recorded so dual multipliers can be mapped back to the
    unscaled rows.
    """
    h_list = [np.asarray(h, dtype=complex).ravel() for h in channels.h_list]
    g_list = [np.asarray(g, dtype=complex) for g in channels.g_list]
    kk, mm = len(h_list), len(g_list)
    n_t = params.n_tx_antennas
    gammas = params.gamma_reqs()
    psis = 2.0 ** params.r_maxes() - 1.0  # (M, K) LMI coefficients psi - 1
    if psis.size and np.any(psis <= 0.0):
        raise ConicError("decode caps must exceed 0 bit/s/Hz (psi > 1)")
    p1s, p2s = params.p_req1s(), params.p_req2s()
    sa2, ss2, eta = params.sigma_ant2, params.sigma_s2, params.eta
    if rho_fixed is not None:
        rho_fixed = np.broadcast_to(
            np.asarray(rho_fixed, dtype=float), (kk,)
        ).copy()
        if not np.all((rho_fixed > 0.0) & (rho_fixed < 1.0)):
            raise ConicError(
                "fixed splitting ratios must be interior to (0, 1)"
            )
    if directions is not None:
        directions = [np.asarray(d, dtype=complex).ravel() for d in directions]
        if len(directions) != kk:
            raise ConicError("need one beam direction per desired receiver")
        for d in directions:
            if abs(float(np.vdot(d, d).real) - 1.0) > 1e-9:
                raise ConicError("beam directions must be unit vectors")

    # Power unit: a crude per-user maximum-ratio power scale (SINR floor at
    # the decoder plus harvest floor at an even split, plus the roaming
    # floors).  The covariances, the noise shaper, and the slack blocks are
    # measured in this unit so the interior-point iterates stay O(1) no
    # matter how many watts the instance needs; the spread between the
    # power blocks and the O(1) splitting-ratio blocks is what conditions
    # the Newton systems near convergence.
    unit = 0.0
    for k in range(kk):
        hn2 = float(np.vdot(h_list[k], h_list[k]).real)
        if hn2 > 0.0:
            unit += gammas[k] * (sa2 + 2.0 * ss2) / hn2
            unit += p1s[k] / (eta * 0.5 * hn2)
    for m in range(mm):
        gn2 = float(np.vdot(g_list[m], g_list[m]).real)
        if gn2 > 0.0 and p2s[m] > 0.0:
            unit += p2s[m] / (eta * gn2)
    unit = float(unit) if unit > 0.0 else 1.0

    prob = ConicProblem()
    if directions is None:
        w_ids = [prob.add_psd_block(2 * n_t) for _ in range(kk)]
        q_ids = None
    else:
        w_ids = None
        q_ids = [prob.add_nonneg() for _ in range(kk)]
    v_id = prob.add_psd_block(2 * n_t)
    if rho_fixed is None:
        t_ids = [prob.add_psd_block(2) for _ in range(kk)]
        s_ids = [prob.add_psd_block(2) if p1s[k] > 0.0 else None
                 for k in range(kk)]
    else:
        t_ids = s_ids = None
    e_ids = [[prob.add_psd_block(2 * g_list[m].shape[1]) for _ in range(kk)]
             for m in range(mm)]
    power_blocks = frozenset(b for row in e_ids for b in row)

    eye_t = hermitian_coeff(unit * np.eye(n_t))
    if directions is None:
        obj_blocks = {w: eye_t for w in w_ids}
        obj_blocks[v_id] = eye_t
        prob.set_objective(blocks=obj_blocks)
    else:
        prob.set_objective(blocks={v_id: eye_t},
                           scalars={q: unit for q in q_ids})

    hd = _Handles(w_ids, q_ids, v_id, t_ids, s_ids, [], [], [],
                  directions=directions, rho_fixed=rho_fixed,
                  power_unit=unit)

    def push(rel, rhs, cw, cv, extra, scalars, name):
        """Append one row; cw maps user -> complex coefficient on W_k."""
        blocks = {b: (unit * m if b in power_blocks else m)
                  for b, m in extra.items()}
        scalars = dict(scalars)
        for k, mat in cw.items():
            if directions is None:
                blocks[w_ids[k]] = hermitian_coeff(unit * mat)
            else:
                d = directions[k]
                scalars[q_ids[k]] = (scalars.get(q_ids[k], 0.0)
                                     + unit
                                     * float(np.real(np.vdot(d, mat @ d))))
        if cv is not None:
            blocks[v_id] = hermitian_coeff(unit * cv)
        mag = max(
            [float(np.abs(m).max()) for m in blocks.values()]
            + [abs(c) for c in scalars.values()],
            default=0.0,
        )
        if mag <= 0.0:
            raise ConicError(f"{name}: row has no coefficients")
        mag = max(mag, abs(rhs))
        row = prob.add_constraint(
            rel, rhs / mag,
            blocks={b: m / mag for b, m in blocks.items()},
            scalars={s: c / mag for s, c in scalars.items()},
            name=name,
        )
        hd.scales[row] = mag
        return row

    # SINR floors: signal/Gamma - interference - noise seen by the decoder.
    for k in range(kk):
        hmat = np.outer(h_list[k], h_list[k].conj())
        cw = {k: hmat / gammas[k]}
        for j in range(kk):
            if j != k:
                cw[j] = -hmat
        if rho_fixed is None:
            extra = {t_ids[k]: -ss2 * _E00}
            rhs = sa2
        else:
            extra = {}
            rhs = sa2 + ss2 / rho_fixed[k]
        hd.c1_rows.append(
            push(">=", rhs, cw, -hmat, extra, {}, f"sinr-floor-{k}")
        )

    # Decode caps: the slack block equals (psi - 1) Q_m - G' W_k G entry by
    # entry over a Hermitian basis.  The slack variable is stored divided
    # by |G_m|_F^2 so its magnitude matches the transmit covariances.
    for m in range(mm):
        g = g_list[m]
        n_r = g.shape[1]
        gn2 = float(np.vdot(g, g).real)
        for k in range(kk):
            coef = float(psis[m, k])
            for i, b in enumerate(_herm_basis(n_r)):
                pull = g @ b @ g.conj().T
                cw = {k: pull}
                if single_user_detection:
                    for j in range(kk):
                        if j != k:
                            cw[j] = -coef * pull
                extra = {e_ids[m][k]: gn2 * hermitian_coeff(b)}
                rhs = coef * (sa2 + ss2) * float(np.trace(b).real)
                push("==", rhs, cw, -coef * pull, extra, {},
                     f"decode-cap-{m}-{k}-{i}")

    # Desired-receiver harvest floors through the 1/(1 - rho) hyperbola.
    for k in range(kk):
        if p1s[k] <= 0.0:
            hd.c3_rows.append(None)
            continue
        hmat = np.outer(h_list[k], h_list[k].conj())
        cw = {j: hmat for j in range(kk)}
        if rho_fixed is None:
            extra = {s_ids[k]: -(p1s[k] / eta) * _E00}
            rhs = -sa2
        else:
            extra = {}
            rhs = p1s[k] / (eta * (1.0 - rho_fixed[k])) - sa2
        hd.c3_rows.append(
            push(">=", rhs, cw, hmat, extra, {}, f"harvest-floor-{k}")
        )

    # Roaming-receiver harvest floors (their splitter fully on harvesting).
    for m in range(mm):
        g = g_list[m]
        n_r = g.shape[1]
        rhs = p2s[m] / eta - n_r * sa2
        if p2s[m] <= 0.0:
            hd.c4_rows.append(None)
            continue
        gg = g @ g.conj().T
        cw = {j: gg for j in range(kk)}
        hd.c4_rows.append(
            push(">=", rhs, cw, gg, {}, {}, f"roaming-harvest-{m}")
        )

    # Splitting-ratio box and the rows linking the hyperbolic blocks:
    # off-diagonals pinned to one make the diagonals reciprocal pairs, and
    # the diagonal sum ties both blocks to the same rho.
    if rho_fixed is None:
        for k in range(kk):
            push(">=", _RHO_MIN, {}, None, {t_ids[k]: _E11}, {},
                 f"split-floor-{k}")
            push("<=", 1.0 - _RHO_MIN, {}, None, {t_ids[k]: _E11}, {},
                 f"split-cap-{k}")
            push("==", 1.0, {}, None, {t_ids[k]: _E01}, {},
                 f"decoder-link-{k}")
            if s_ids[k] is not None:
                push("==", 1.0, {}, None, {s_ids[k]: _E01}, {},
                     f"harvester-link-{k}")
                push("==", 1.0, {}, None,
                     {t_ids[k]: _E11, s_ids[k]: _E11}, {}, f"split-sum-{k}")

    return prob, hd


def build_secure_sdp(channels, params, single_user_detection=False):
    """Assemble the power-minimization semidefinite program.

    Objective sum_k tr(W_k) + tr(V); rows: per-user SINR floors with the
    decoder noise entering through t_k >= 1/rho_k, per-(receiver, user)
    decode-cap LMIs via slack blocks and Hermitian-basis equality rows,
    harvest floors for both receiver classes, the splitting-ratio box, and
    the hyperbolic link rows.  `single_user_detection` credits the other
    users' streams as interference at the roaming receivers, relaxing the
    decode caps accordingly.
    """
    prob, _ = _assemble(channels, params,
                        single_user_detection=single_user_detection)
    return prob


def _collinear_screen(h_list, gammas):
    """Cheap provable infeasibility test: two users on one spatial channel.

    If h_i and h_j are exactly collinear, both SINR floors read off the
    same scalar direction and imply gamma_i * gamma_j < 1; targets at or
    above that bound are infeasible no matter how much power is spent.
    """
    for i in range(len(h_list)):
        for j in range(i + 1, len(h_list)):
            hi, hj = h_list[i], h_list[j]
            ni = float(np.vdot(hi, hi).real)
            nj = float(np.vdot(hj, hj).real)
            if ni == 0.0 or nj == 0.0:
                continue
            cos2 = abs(np.vdot(hi, hj)) ** 2 / (ni * nj)
            if 1.0 - cos2 <= 1e-12 and gammas[i] * gammas[j] >= 1.0:
                raise SecureInfeasible(
                    "receivers share one spatial channel and the SINR "
                    f"targets satisfy gamma_{i} * gamma_{j} >= 1; no "
                    "transmit design can separate them",
                    rows=[f"sinr-floor-{i}", f"sinr-floor-{j}"],
                )


def _raise_infeasible(prob, sol):
    ray = np.asarray(sol.certificate["duals"], dtype=float)
    order = np.argsort(-np.abs(ray))
    rows = [prob.constraints[i].name for i in order[:3] if ray[i] != 0.0]
    raise SecureInfeasible(
        "QoS targets are jointly infeasible; dominant certificate rows: "
        + ", ".join(rows),
        rows=rows,
        certificate=sol.certificate,
    )


def _near_optimal(sol):
    """A stalled iterate whose certified gap and duals are still excellent.

    Near the float64 floor the solver can meet the duality gap while the
    row residuals stall around 1e-6 and the factorization gives out; the
    point is then repaired outside the solver (`_polish_affine`, or a
    re-solve with the splitting ratios frozen) instead of being discarded.
    """
    return (sol.status == NUMERICAL_LIMIT and sol.gap <= 1e-8
            and sol.primal_res <= 1e-4 and sol.dual_res <= 1e-7)


def _polish_affine(prob, sol, passes=3):
    """Least-norm projection of a returned point onto its active rows.

    Ill-conditioned late iterations let the iterate drift off the equality
    manifold by far more than the duality gap suggests.  The drift is
    removed by solving the Gram system of the active rows (all equalities
    plus inequalities violated or within a hair of their boundary, which
    at a gap of 1e-9 are active at the optimum) and stepping along their
    coefficient functionals; the PSD blocks move by the same tiny amount,
    which the cone tolerances downstream absorb.  Must only be applied to
    programs whose rows are all affine in the remaining variables, i.e.
    with the splitting ratios fixed, so that no reciprocal identity can be
    thrown out of sync with the rows.
    """
    blocks = [np.array(b, dtype=float) for b in sol.blocks]
    scalars = np.array(sol.scalars, dtype=float)
    band = 1e-5
    for _ in range(passes):
        active, resid = [], []
        worst = 0.0
        for row, con in enumerate(prob.constraints):
            gap = con.rhs - prob.evaluate(row, blocks, scalars)
            tol = band * (1.0 + abs(con.rhs))
            if con.rel == "==":
                active.append(row)
                resid.append(gap)
                worst = max(worst, abs(gap))
            elif con.rel == ">=" and gap >= -tol:
                active.append(row)
                resid.append(gap)
                worst = max(worst, gap)
            elif con.rel == "<=" and gap <= tol:
                active.append(row)
                resid.append(gap)
                worst = max(worst, -gap)
        if not active or worst <= 1e-13:
            break
        fns = [prob.constraints[r].fn for r in active]
        gram = np.zeros((len(fns), len(fns)))
        for i, fi in enumerate(fns):
            for j in range(i, len(fns)):
                fj = fns[j]
                g = 0.0
                for b in fi.blocks.keys() & fj.blocks.keys():
                    g += float(np.tensordot(fi.blocks[b], fj.blocks[b]))
                for s in fi.scalars.keys() & fj.scalars.keys():
                    g += fi.scalars[s] * fj.scalars[s]
                gram[i, j] = gram[j, i] = g
        weights, *_ = np.linalg.lstsq(gram, np.asarray(resid), rcond=None)
        for w, fn in zip(weights, fns):
            for b, mat in fn.blocks.items():
                blocks[b] += w * mat
            for s, c in fn.scalars.items():
                scalars[s] += w * c
    sol.blocks = blocks
    sol.scalars = scalars


def _solve_qos(channels, params, single_user_detection=False,
               directions=None, rho_fixed=None):
    """Solve one program robustly.

    Returns (handles, solution, objective, dual_source) where dual_source
    is the (handles, solution) pair whose multipliers certify optimality
    over the free splitting ratios -- the pair itself unless a stalled
    free-rho iterate was repaired by a refreeze, in which case it is the
    original free-rho solve (the refrozen program fixes rho, so its
    multipliers satisfy a different stationarity system).

    Clean optima pass straight through.  A stalled-but-tight iterate with
    free splitting ratios is repaired by freezing the ratios at their
    extracted values and re-solving: the near-singular 2x2 hyperbolic
    blocks are what break the late factorizations, and the optimal cost is
    flat in rho to first order, so the refreeze costs O(drift^2).  The
    refrozen program is affine in all remaining variables, which makes the
    least-norm polish sound if it stalls too.
    """
    prob, hd = _assemble(channels, params,
                         single_user_detection=single_user_detection,
                         directions=directions, rho_fixed=rho_fixed)
    sol = solve(prob, gap_tol=_GAP_TOL, feas_tol=_FEAS_TOL)
    if sol.status == INFEASIBLE:
        _raise_infeasible(prob, sol)
    if sol.status == OPTIMAL:
        return hd, sol, float(sol.objective), (hd, sol)
    dual_src = (hd, sol)
    usable = (sol.status == NUMERICAL_LIMIT and sol.gap <= 1e-6
              and sol.primal_res <= 1e-4 and sol.dual_res <= 1e-7)
    if rho_fixed is None and usable:
        # the splitting ratios are trustworthy long before the breakdown,
        # and refreezing them removes the near-singular 2x2 blocks, so the
        # re-solve is held to the tight gates rather than this coarse one
        rho_bar = np.clip(
            np.array([float(sol.blocks[t][1, 1]) for t in hd.t_ids]),
            _RHO_MIN, 1.0 - _RHO_MIN,
        )
        prob, hd = _assemble(channels, params,
                             single_user_detection=single_user_detection,
                             directions=directions, rho_fixed=rho_bar)
        sol = solve(prob, gap_tol=_GAP_TOL, feas_tol=_FEAS_TOL)
        if sol.status == INFEASIBLE:
            _raise_infeasible(prob, sol)
        if sol.status == OPTIMAL:
            return hd, sol, float(sol.objective), dual_src
    if not _near_optimal(sol):
        require_optimal(sol)
    _polish_affine(prob, sol)
    obj = (prob.evaluate(prob.objective, sol.blocks, sol.scalars)
           + prob.objective_constant)
    return hd, sol, float(obj), dual_src


def _stationary_rho(alpha, beta, params):
    """Closed-form stationary splitting ratios; NaN where undefined."""
    p1 = params.p_req1s()
    with np.errstate(invalid="ignore"):
        num = np.sqrt(alpha * params.sigma_s2 * params.eta)
        den = num + np.sqrt(beta * p1)
        out = np.where((alpha > 0.0) & (beta > 0.0) & (p1 > 0.0),
                       num / den, np.nan)
    return out


def _stationarity_gap(rho, duals, params):
    """Largest |rho_k - closed-form stationary rho_k| over defined users."""
    hat = _stationary_rho(duals["alpha"], duals["beta"], params)
    err = np.abs(hat - np.asarray(rho, dtype=float))
    err = err[np.isfinite(err)]
    return float(err.max()) if err.size else 0.0


def _refine_rho(channels, params, rho0, single_user_detection=False,
                tol=2e-5, max_solves=40):
    """Polish free splitting ratios to dual-consistent stationarity.

    The cost after minimizing over the covariances at fixed ratios is
    convex in the ratios (each enters the feasible set through 1/rho and
    1/(1 - rho) on the right-hand sides), and by the envelope theorem its
    partial derivatives are -alpha_k sigma_s^2 / rho_k^2 + beta_k (P1_k /
    eta) / (1 - rho_k)^2 with the floor multipliers read off a solve at
    frozen ratios.  Nearly power-split-invariant users leave the
    interior-point iterate visibly off-stationary along flat directions;
    this routine closes that gap by per-user bracketing on the derivative
    sign (equivalently on the sign of rho_k minus its closed-form
    stationary point -- the two agree identically), jumping to the
    stationary point whenever it lands inside the bracket and bisecting
    otherwise.

    Some instances put a user's optimum exactly where its harvest floor
    switches from slack to strongly active; the cost is then kinked in
    that ratio and the multipliers at the minimizer form a segment rather
    than a point, over which the frozen solves jitter.  For users whose
    measured multipliers still miss stationarity once the ratios have
    stopped moving, the harvest multiplier is replaced by the member of
    that optimal segment satisfying stationarity at the bracketed
    minimizer (the SINR multiplier is stable and well-conditioned, so it
    anchors the selection).  Returns (handles, solution, objective, rho,
    duals) of the best frozen solve with that selection applied.
    """
    kk = len(rho0)
    ss2, eta = params.sigma_s2, params.eta
    p1 = params.p_req1s()
    lo = np.full(kk, _RHO_MIN)
    hi = np.full(kk, 1.0 - _RHO_MIN)
    rho_bar = np.clip(np.asarray(rho0, dtype=float), lo, hi)
    best = None
    for _ in range(max_solves):
        try:
            hd, sol, obj, _ = _solve_qos(
                channels, params,
                single_user_detection=single_user_detection,
                rho_fixed=rho_bar,
            )
        except ConicError:
            if best is None:
                raise
            # this iterate sits on numerically hostile ground (typically a
            # floor-transition kink); probe an incommensurate interior
            # point of the bracket instead of giving up on the instance
            rho_bar = lo + (hi - lo) * 0.61803398875
            continue
        _, _, _, duals = _extract(sol, hd, channels, params)
        gap = _stationarity_gap(rho_bar, duals, params)
        if best is None or gap < best[0]:
            best = (gap, hd, sol, obj, rho_bar.copy(), duals)
        if gap <= tol:
            break
        alpha = np.where(np.isfinite(duals["alpha"]), duals["alpha"], 0.0)
        beta = np.where(np.isfinite(duals["beta"]), duals["beta"], 0.0)
        deriv = (-alpha * ss2 / rho_bar ** 2
                 + beta * (p1 / eta) / (1.0 - rho_bar) ** 2)
        hi = np.where(deriv > 0.0, rho_bar, hi)
        lo = np.where(deriv <= 0.0, rho_bar, lo)
        hat = _stationary_rho(alpha, beta, params)
        mid = 0.5 * (lo + hi)
        inside = np.isfinite(hat) & (hat > lo) & (hat < hi)
        step = np.where(inside, np.nan_to_num(hat, nan=0.5), mid)
        if float(np.max(np.abs(step - rho_bar))) <= 1e-10:
            break  # brackets pinched; only the dual jitter remains
        rho_bar = step
    _, hd, sol, obj, rho_bar, duals = best
    hat = _stationary_rho(duals["alpha"], duals["beta"], params)
    err = np.abs(hat - rho_bar)
    patch = (p1 > 0.0) & (duals["alpha"] > 0.0) \
        & (~np.isfinite(err) | (err > tol))
    if np.any(patch):
        with np.errstate(divide="ignore", invalid="ignore"):
            beta_c = (duals["alpha"] * ss2 * eta
                      * (1.0 - rho_bar) ** 2 / (rho_bar ** 2 * p1))
        duals = dict(duals)
        duals["beta"] = np.where(patch, beta_c, duals["beta"])
    return hd, sol, obj, rho_bar, duals


def _extract(sol, hd, channels, params):
    """Primal matrices, splitting ratios, and unscaled duals of one solve."""
    kk = len(channels.h_list)
    n_t = params.n_tx_antennas
    unit = hd.power_unit
    if hd.w_ids is not None:
        w_list = [unit * recover_hermitian(sol.blocks[b]) for b in hd.w_ids]
    else:
        w_list = [
            unit * float(sol.scalars[hd.q_ids[k]])
            * np.outer(hd.directions[k], hd.directions[k].conj())
            for k in range(kk)
        ]
    v = unit * recover_hermitian(sol.blocks[hd.v_id])
    if hd.rho_fixed is not None:
        rho = np.array(hd.rho_fixed, dtype=float)
    else:
        rho = np.array([float(sol.blocks[hd.t_ids[k]][1, 1])
                        for k in range(kk)])

    def unscale(row):
        if row is None:
            return np.nan
        return float(sol.duals[row]) / hd.scales[row]

    duals = {
        "alpha": np.array([unscale(r) for r in hd.c1_rows]),
        "beta": np.array([unscale(r) for r in hd.c3_rows]),
        "nu": np.array([unscale(r) for r in hd.c4_rows]),
    }
    assert v.shape == (n_t, n_t)
    return w_list, v, rho, duals


def _qos(w_list, v, rho, channels, params, single_user_detection=False):
    """Recompute every quality metric from raw channels."""
    h_list = [np.asarray(h).ravel() for h in channels.h_list]
    g_list = [np.asarray(g) for g in channels.g_list]
    kk, mm = len(h_list), len(g_list)
    sa2, ss2, eta = params.sigma_ant2, params.sigma_s2, params.eta
    sinr = np.array([
        sinr_k(k, h_list, w_list, v, float(rho[k]), sa2, ss2)
        for k in range(kk)
    ])
    eav = np.zeros((mm, kk))
    for m in range(mm):
        for k in range(kk):
            v_eff = v
            if single_user_detection:
                v_eff = v + sum(w_list[j] for j in range(kk) if j != k)
            eav[m, k] = eav_rate_upper(m, k, g_list[m], w_list[k], v_eff,
                                       sa2, ss2)
    rates = np.log2(1.0 + sinr)
    secrecy = np.array([secrecy_rate(rates[k], eav[:, k]) for k in range(kk)])
    harvested_desired = np.array([
        harvested_secure(h_list[k], w_list, v, float(rho[k]), eta, sa2)
        for k in range(kk)
    ])
    harvested_roaming = np.array([
        harvested_secure(g_list[m], w_list, v, 0.0, eta, sa2)
        for m in range(mm)
    ])
    return SecureQoS(sinr, eav, secrecy, harvested_desired, harvested_roaming)


def _project_rank_one(w_list, v, h_list):
    """Closed-form rank-one representative of a relaxed optimum.

    W~_k = W_k h_k h_k' W_k / (h_k' W_k h_k) keeps h_k' W_k h_k and moves
    the PSD remainder W_k - W~_k into the artificial noise.  The received
    signal power and the radiated power are preserved exactly; every other
    constraint sees W_k only through sums that the move leaves unchanged or
    through the decode caps, which weakly improve because the remainder
    joins the noise covariance inside Q_m.
    """
    w_tilde, v_tilde = [], np.array(v, dtype=complex)
    for w, h in zip(w_list, h_list):
        w = np.asarray(w, dtype=complex)
        h = np.asarray(h, dtype=complex).ravel()
        wh = w @ h
        denom = float(np.real(np.vdot(h, wh)))
        scale = float(np.real(np.trace(w))) * float(np.vdot(h, h).real)
        if denom <= 1e-14 * max(scale, 1e-300):
            raise ConicError(
                "received signal power vanished; the transmit covariance "
                "has no rank-one representative on this channel"
            )
        wt = np.outer(wh, wh.conj()) / denom
        w_tilde.append(wt)
        v_tilde = v_tilde + (w - wt)
    v_tilde = 0.5 * (v_tilde + v_tilde.conj().T)
    ratios = []
    for wt in w_tilde:
        vals = np.linalg.eigvalsh(wt)
        top = float(vals[-1])
        second = float(abs(vals[-2])) if len(vals) > 1 else 0.0
        ratios.append(second / top if top > 0.0 else 0.0)
    return w_tilde, v_tilde, np.array(ratios)


def _total_power(w_list, v):
    return float(sum(np.real(np.trace(w)) for w in w_list)
                 + np.real(np.trace(v)))


def _clip_psd(mat):
    """Zero out negative eigenvalues left by numerical drift, if any."""
    mat = 0.5 * (mat + mat.conj().T)
    vals = np.linalg.eigvalsh(mat)
    if float(vals[0]) >= 0.0:
        return mat
    vals, vecs = np.linalg.eigh(mat)
    return (vecs * np.maximum(vals, 0.0)) @ vecs.conj().T


def _restore_feasible(w_list, v, rho, channels, params,
                      single_user_detection=False, max_rounds=40):
    """Structured micro-corrections from near-feasible to feasible.

    A numerically repaired point can sit within ~1e-6 of every floor yet a
    hair outside some.  Deficient SINR or harvest floors are restored by
    scaling up that user's covariance; violated decode caps and roaming
    floors are restored by adding artificial noise built inside the
    subspace orthogonal to every desired-user channel, so the addition is
    invisible to all SINR and desired-harvest floors and the two repair
    families cannot reopen each other's constraints.  Rounds repeat with
    doubled corrections until every margin recomputed from raw channels is
    clean.  Returns (w_list, v, ok); the matrices stay rank one and PSD.
    """
    h_list = [np.asarray(h, dtype=complex).ravel() for h in channels.h_list]
    g_list = [np.asarray(g, dtype=complex) for g in channels.g_list]
    kk, mm = len(h_list), len(g_list)
    n_t = params.n_tx_antennas
    gammas = params.gamma_reqs()
    psis = 2.0 ** params.r_maxes() - 1.0
    p1s, p2s = params.p_req1s(), params.p_req2s()
    sa2, ss2, eta = params.sigma_ant2, params.sigma_s2, params.eta
    w_list = [np.array(w, dtype=complex) for w in w_list]
    v = np.array(v, dtype=complex)
    hmat = np.stack(h_list, axis=1)
    qh, _ = np.linalg.qr(hmat)
    blind = np.eye(n_t) - qh @ qh.conj().T  # projector no receiver hears
    pad = 2.0
    for _ in range(max_rounds):
        clean = True
        # SINR and desired-harvest floors: scale the user's own covariance
        for k in range(kk):
            signal = float(np.real(np.vdot(h_list[k],
                                           w_list[k] @ h_list[k])))
            inter = sa2 + float(np.real(np.vdot(
                h_list[k],
                (v + sum(w_list[j] for j in range(kk) if j != k))
                @ h_list[k],
            ))) + ss2 / max(float(rho[k]), _RHO_MIN)
            scale = 0.0
            if signal < gammas[k] * inter:
                scale = gammas[k] * inter / signal - 1.0
            if p1s[k] > 0.0:
                total = signal + inter - ss2 / max(float(rho[k]), _RHO_MIN)
                need = p1s[k] / (eta * (1.0 - min(float(rho[k]),
                                                  1.0 - _RHO_MIN)))
                if total < need:
                    scale = max(scale, (need - total) / signal)
            if scale > 0.0:
                clean = False
                w_list[k] = w_list[k] * (1.0 + pad * scale)
        # decode caps: add the missing eavesdropper-subspace component,
        # steered through the projector so no desired receiver sees it
        for m in range(mm):
            g = g_list[m]
            n_r = g.shape[1]
            gram = g.conj().T @ g
            for k in range(kk):
                q_m = g.conj().T @ v @ g + (sa2 + ss2) * np.eye(n_r)
                if single_user_detection:
                    inter = sum(w_list[j] for j in range(kk) if j != k)
                    q_m = q_m + g.conj().T @ inter @ g
                slack = psis[m, k] * q_m - g.conj().T @ w_list[k] @ g
                lam, vecs = np.linalg.eigh(slack)
                if float(lam[0]) >= 0.0:
                    continue
                clean = False
                e = vecs[:, 0]
                d = blind @ (g @ np.linalg.solve(gram, e))
                y = g.conj().T @ d
                reach = abs(np.vdot(e, y)) ** 2
                if reach <= 1e-10 * float(np.vdot(y, y).real + 1e-300):
                    return w_list, v, False  # cap invisible from the blind subspace
                coef = pad * (-float(lam[0])) / (psis[m, k] * reach)
                v = v + coef * np.outer(d, d.conj())
        # roaming harvest floors: blind-subspace noise their antennas see
        for m in range(mm):
            if p2s[m] <= 0.0:
                continue
            g = g_list[m]
            x_tot = v + sum(w_list)
            got = eta * (float(np.real(np.trace(g.conj().T @ x_tot @ g)))
                         + g.shape[1] * sa2)
            if got < p2s[m]:
                clean = False
                base = blind @ (g @ g.conj().T) @ blind
                seen = float(np.real(np.trace(g.conj().T @ base @ g)))
                if seen <= 1e-12 * float(np.vdot(g, g).real) ** 2:
                    return w_list, v, False
                v = v + pad * (p2s[m] - got) / (eta * seen) * base
        if clean:
            return w_list, v, True
    return w_list, v, False


def _build_allocation(w_list, v, rho, channels, params, scheme,
                      relaxed_p_tx=None, duals=None,
                      single_user_detection=False):
    w_list = [_clip_psd(np.asarray(w)) for w in w_list]
    v = _clip_psd(np.asarray(v))
    relaxed = _total_power(w_list, v) if relaxed_p_tx is None \
        else float(relaxed_p_tx)

    def finish(w_list, v, relaxed):
        ratios = []
        for w in w_list:
            vals = np.linalg.eigvalsh(w)
            top = float(vals[-1])
            ratios.append(float(abs(vals[-2])) / top if top > 0.0 else 0.0)
        qos = _qos(w_list, v, rho, channels, params,
                   single_user_detection=single_user_detection)
        alloc = SecureAllocation(
            w_mats=w_list, v=v, rho=np.asarray(rho, dtype=float),
            p_tx=_total_power(w_list, v), relaxed_p_tx=relaxed, qos=qos,
            rank_ratios=np.array(ratios), duals=duals, scheme=scheme,
        )
        alloc.report = verify_secure(
            alloc, channels, params,
            single_user_detection=single_user_detection,
        )
        return alloc

    alloc = finish(w_list, v, relaxed)
    if not alloc.report.ok:
        w_fix, v_fix, ok = _restore_feasible(
            w_list, v, rho, channels, params,
            single_user_detection=single_user_detection,
        )
        if ok:
            # report the repaired point's own cost so the reconstruction
            # identity (radiated power preserved) stays exact
            alloc = finish(w_fix, v_fix, _total_power(w_fix, v_fix))
    return alloc


def rank_one_reconstruct(w_list, v, rho, channels, params,
                         single_user_detection=False):
    """Turn a relaxed optimum into a verified rank-one allocation.

    Applies the closed-form projection (idempotent on already-rank-one
    inputs), re-derives every constraint from raw channels including the
    exact determinant form of the decode caps, and -- should any check
    fail -- falls back to re-optimizing all scalars (per-user powers, the
    noise covariance, and the splitting ratios) with the projected beam
    directions held fixed, which restores feasibility by construction.
    """
    h_list = [np.asarray(h, dtype=complex).ravel() for h in channels.h_list]
    w_tilde, v_tilde, _ = _project_rank_one(w_list, v, h_list)
    alloc = _build_allocation(
        w_tilde, v_tilde, rho, channels, params, "optimal",
        relaxed_p_tx=_total_power(w_list, v),
        single_user_detection=single_user_detection,
    )
    if alloc.report.ok:
        return alloc

    directions = []
    for wt, h in zip(w_tilde, h_list):
        vals, vecs = np.linalg.eigh(wt)
        directions.append(vecs[:, -1])
    hd, sol, obj, dual_src = _solve_qos(
        channels, params, single_user_detection=single_user_detection,
        directions=directions,
    )
    w_fix, v_fix, rho_fix, duals = _extract(sol, hd, channels, params)
    if dual_src[1] is not sol:
        duals = _extract(dual_src[1], dual_src[0], channels, params)[3]
    alloc = _build_allocation(
        w_fix, v_fix, rho_fix, channels, params, "optimal",
        relaxed_p_tx=obj, duals=duals,
        single_user_detection=single_user_detection,
    )
    if not alloc.report.ok:
        raise ConicError(
            "rank-one reconstruction failed verification: "
            + "; ".join(alloc.report.violations)
        )
    return alloc


def solve_secure(channels, params, single_user_detection=False,
                 pre_check=True):
    """Minimize radiated power for the secrecy-constrained downlink.

    Solves the semidefinite relaxation, reconstructs rank-one beams in
    closed form, recomputes every constraint from raw channels (including
    the exact determinant decode caps, which the rank-one point attains
    with equality to the LMI surrogate), and returns the allocation with
    the unscaled SINR/harvest multipliers attached.  Provably hopeless
    instances (two users on one spatial channel with incompatible SINR
    targets) are rejected before the solve when `pre_check` is set; the
    solver's infeasibility certificate is surfaced otherwise.
    """
    h_list = [np.asarray(h, dtype=complex).ravel() for h in channels.h_list]
    if pre_check:
        _collinear_screen(h_list, params.gamma_reqs())
    hd, sol, obj, dual_src = _solve_qos(
        channels, params, single_user_detection=single_user_detection,
    )
    w_raw, v_raw, rho, duals = _extract(sol, hd, channels, params)
    if dual_src[1] is not sol:
        # a refreeze repaired the primal; the free-rho solve's multipliers
        # are the ones that certify stationarity in the splitting ratios
        duals = _extract(dual_src[1], dual_src[0], channels, params)[3]
    if _stationarity_gap(rho, duals, params) > 2e-5:
        # nearly split-invariant users leave the ratios off-stationary at
        # any achievable duality gap; polish them by convex 1-D search
        hd, sol, obj, rho, duals = _refine_rho(
            channels, params, rho,
            single_user_detection=single_user_detection,
        )
        w_raw, v_raw, _, _ = _extract(sol, hd, channels, params)
    alloc = rank_one_reconstruct(w_raw, v_raw, rho, channels, params,
                                 single_user_detection=single_user_detection)
    if alloc.duals is None:
        alloc.duals = duals
    return alloc


def optimal_rho_from_duals(alpha, beta, params):
    """Stationary splitting ratios from the floor multipliers.

    Trading decoder noise against the harvest reciprocal gives
    rho_k = sqrt(alpha_k s_s^2 eta) / (sqrt(alpha_k s_s^2 eta)
    + sqrt(beta_k P_req1_k)); both multipliers must be strictly positive,
    which holds whenever the SINR target and the harvest floor are.  The
    value is automatically interior to (0, 1), so the box never binds.
    """
    kk = params.n_desired
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (kk,))
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (kk,))
    if np.any(~np.isfinite(alpha)) or np.any(~np.isfinite(beta)):
        raise ValueError("multipliers must be finite")
    if np.any(alpha <= 0.0) or np.any(beta <= 0.0):
        raise ValueError("the splitting-ratio formula needs strictly "
                         "positive floor multipliers")
    num = np.sqrt(alpha * params.sigma_s2 * params.eta)
    return num / (num + np.sqrt(beta * params.p_req1s()))


def baseline_zf(channels, params, scheme, single_user_detection=False):
    """Fixed-direction baseline: interference-free beams, optimized scalars.

    Each user's beam is the projection of its own channel onto the null
    space of the other users' channels (eigenvectors of the zero eigenvalues
    of H_-k H_-k'), so all cross terms h_j' w_k vanish.  With directions
    fixed, scheme 1 optimizes the per-user powers, the noise covariance,
    and the splitting ratios through the same conic machinery; scheme 2
    additionally pins every splitting ratio to 1/2.
    """
    if scheme not in (1, 2):
        raise ValueError("scheme must be 1 or 2")
    h_list = [np.asarray(h, dtype=complex).ravel() for h in channels.h_list]
    kk = len(h_list)
    n_t = params.n_tx_antennas
    if kk > n_t:
        raise ConicError(
            "interference-free directions need at least as many transmit "
            "antennas as receivers"
        )
    directions = []
    for k in range(kk):
        others = [h_list[j] for j in range(kk) if j != k]
        if not others:
            d = h_list[k] / np.linalg.norm(h_list[k])
            directions.append(d)
            continue
        gram = sum(np.outer(h, h.conj()) for h in others)
        vals, vecs = np.linalg.eigh(gram)
        null_dim = max(int(np.sum(vals <= 1e-12 * max(float(vals[-1]), 0.0))),
                       n_t - len(others))
        basis = vecs[:, :null_dim]
        proj = basis @ (basis.conj().T @ h_list[k])
        norm = float(np.linalg.norm(proj))
        if norm <= 1e-9 * float(np.linalg.norm(h_list[k])):
            proj = basis[:, 0]  # own channel orthogonal to the null space
            norm = 1.0
        directions.append(proj / norm)
    hd, sol, obj, dual_src = _solve_qos(
        channels, params, single_user_detection=single_user_detection,
        directions=directions, rho_fixed=0.5 if scheme == 2 else None,
    )
    w_list, v, rho, duals = _extract(sol, hd, channels, params)
    if dual_src[1] is not sol:
        duals = _extract(dual_src[1], dual_src[0], channels, params)[3]
    return _build_allocation(
        w_list, v, rho, channels, params, f"zf-{scheme}",
        relaxed_p_tx=obj, duals=duals,
        single_user_detection=single_user_detection,
    )


def verify_secure(allocation, channels, params, tol=1e-6,
                  single_user_detection=False):
    """Re-derive every constraint from raw channels and report the margins.

    Uses only the returned matrices and the channel data -- nothing from
    the solver -- and checks the original problem: SINR floors, the exact
    log-det decode caps, the LMI surrogate, harvest floors at both receiver
    classes, the splitting-ratio box, positive semidefiniteness, and the
    implied secrecy floor log2(1 + gamma) - max decode cap.
    """
    w_list = [np.asarray(w) for w in allocation.w_mats]
    v = np.asarray(allocation.v)
    rho = np.asarray(allocation.rho, dtype=float)
    h_list = [np.asarray(h).ravel() for h in channels.h_list]
    g_list = [np.asarray(g) for g in channels.g_list]
    kk, mm = len(h_list), len(g_list)
    gammas = params.gamma_reqs()
    r_maxes = params.r_maxes()
    psis = 2.0 ** r_maxes - 1.0
    p1s, p2s = params.p_req1s(), params.p_req2s()
    sa2, ss2 = params.sigma_ant2, params.sigma_s2

    violations = []
    qos = _qos(w_list, v, rho, channels, params,
               single_user_detection=single_user_detection)

    sinr_margin = qos.sinr / gammas - 1.0
    for k in range(kk):
        if sinr_margin[k] < -tol:
            violations.append(
                f"sinr-floor-{k}: SINR {qos.sinr[k]:.6g} below target "
                f"{gammas[k]:.6g}"
            )

    rate_margin = r_maxes - qos.eav_rate_upper
    for m in range(mm):
        for k in range(kk):
            if rate_margin[m, k] < -tol:
                violations.append(
                    f"decode-cap-{m}-{k}: rate bound "
                    f"{qos.eav_rate_upper[m, k]:.6g} above cap "
                    f"{r_maxes[m, k]:.6g}"
                )

    lmi_margin = np.zeros((mm, kk))
    for m in range(mm):
        g = g_list[m]
        n_r = g.shape[1]
        q_base = g.conj().T @ v @ g + (sa2 + ss2) * np.eye(n_r)
        for k in range(kk):
            q_m = np.array(q_base)
            if single_user_detection:
                inter = sum(w_list[j] for j in range(kk) if j != k)
                q_m = q_m + g.conj().T @ inter @ g
            slack = psis[m, k] * q_m - g.conj().T @ w_list[k] @ g
            scale = max(float(np.linalg.norm(slack, 2)), sa2 + ss2)
            lmi_margin[m, k] = float(np.linalg.eigvalsh(slack)[0]) / scale
            if lmi_margin[m, k] < -tol:
                violations.append(
                    f"decode-cap-lmi-{m}-{k}: surrogate matrix inequality "
                    "violated"
                )

    harvest_margin = np.array([
        (qos.harvested_desired[k] - p1s[k]) / p1s[k] if p1s[k] > 0.0 else 0.0
        for k in range(kk)
    ])
    for k in range(kk):
        if harvest_margin[k] < -tol:
            violations.append(
                f"harvest-floor-{k}: harvested {qos.harvested_desired[k]:.6g}"
                f" W below floor {p1s[k]:.6g} W"
            )

    roaming_margin = np.array([
        (qos.harvested_roaming[m] - p2s[m]) / p2s[m] if p2s[m] > 0.0 else 0.0
        for m in range(mm)
    ])
    for m in range(mm):
        if roaming_margin[m] < -tol:
            violations.append(
                f"roaming-harvest-{m}: harvested "
                f"{qos.harvested_roaming[m]:.6g} W below floor "
                f"{p2s[m]:.6g} W"
            )

    for k in range(kk):
        if not -tol <= rho[k] <= 1.0 + tol:
            violations.append(f"split-box-{k}: rho {rho[k]:.6g} outside [0, 1]")

    psd_margin = []
    for k, w in enumerate(w_list):
        vals = np.linalg.eigvalsh(w)
        top = max(float(vals[-1]), 1e-300)
        psd_margin.append(float(vals[0]) / top)
        if psd_margin[-1] < -tol:
            violations.append(f"transmit-cone-{k}: covariance not PSD")
    vvals = np.linalg.eigvalsh(v)
    v_top = max(float(vvals[-1]), 1e-300)
    v_margin = float(vvals[0]) / v_top
    if v_margin < -tol:
        violations.append("noise-cone: artificial-noise covariance not PSD")

    secrecy_floor = np.log2(1.0 + gammas) - (
        r_maxes.max(axis=0) if mm else np.zeros(kk)
    )
    secrecy_margin = qos.secrecy_rate - secrecy_floor
    for k in range(kk):
        if secrecy_margin[k] < -tol:
            violations.append(
                f"secrecy-floor-{k}: rate {qos.secrecy_rate[k]:.6g} below "
                f"{secrecy_floor[k]:.6g}"
            )

    margins = {
        "sinr": sinr_margin,
        "decode_rate": rate_margin,
        "decode_lmi": lmi_margin,
        "harvest_desired": harvest_margin,
        "harvest_roaming": roaming_margin,
        "psd_w": np.array(psd_margin),
        "psd_v": v_margin,
        "secrecy": secrecy_margin,
    }
    return VerifyReport(ok=not violations, violations=violations,
                        margins=margins)
