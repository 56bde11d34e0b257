"""Small dense conic solver: homogeneous self-dual interior-point method.

Solves problems built with `swipt_alloc.conic.ConicProblem`:

    minimize    c . x
    subject to  a_i . x  (<= | == | >=)  b_i ,    x in K,

with K a product of real symmetric PSD blocks and a nonnegative orthant.
Internally everything is put in the equality standard form  A x = b, x in K:
inequality rows get nonnegative slack coordinates, free scalars are split
into differences of nonnegative pairs, and PSD blocks are stored in the
scaled upper-triangle (svec) coordinates that make the trace inner product
an ordinary dot product.

The engine is a Mehrotra predictor-corrector path-following method on the
homogeneous self-dual embedding

    A x - b tau          = 0
    c tau - A' y - z     = 0
    b' y - c' x - kappa  = 0,        x in K, z in K*, tau >= 0, kappa >= 0,

whose strictly complementary solutions encode every outcome at once:
tau > 0 recovers an optimal pair (x, y, z) / tau, while kappa > 0 with
tau -> 0 yields a Farkas ray (primal infeasibility when b.y > 0, an
unbounded improving ray when c.x < 0).

PSD complementarity is linearized with Nesterov-Todd scaling.  Per block,
with Cholesky factors X = Lx Lx', Z = Lz Lz' and the SVD Lz' Lx = U S V',
the factor R = Lx V S^(-1/2) maps both iterates to the same diagonal:
R^-1 X R^-T = R' Z R = S, and Theta = R R' satisfies Theta Z Theta = X.
In scaled coordinates the Newton complementarity equation becomes the
elementwise-solvable  (dXh + dZh)_ij = rhs_ij * 2/(s_i + s_j), which pulls
back to  dX = Vc - Theta dZ Theta.  Eliminating dz and then dy through the
Schur complement S = A Theta A' leaves a 1x1 equation for dtau whose
coefficient  -(c Theta c - q' S^-1 q) - b' S^-1 b - kappa/tau  (q = A Theta c)
is strictly negative, so the reduction never divides by zero.

The reduction is computed through one Cholesky factorization of the
augmented Gram matrix [A; c] Theta [A; c]' = [[S, q], [q', c Theta c]]:
its leading block factors S, its last row holds L^-1 q, and its last pivot
squared equals the Schur complement c Theta c - q' S^-1 q, which keeps that
difference nonnegative by construction instead of leaving it to a
catastrophic cancellation between two separately computed large numbers.

Everything is batched: `solve_batch` advances a family of identically
structured problems in lockstep through vectorized dense linear algebra,
with per-problem residuals, step lengths, centering weights and convergence
tests, so each problem follows exactly the iterates it would follow alone;
converged problems are snapshotted and removed from the working set.  The
iteration sequence is deterministic.
"""

from __future__ import annotations

import numpy as np

from .conic import (
    FREE,
    INFEASIBLE,
    NONNEG,
    NUMERICAL_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    ConicError,
    ConicProblem,
    ConicSolution,
)

_STEP_DAMP = 0.99  # fraction of the distance to the cone boundary taken


# -- symmetric vectorization -------------------------------------------------


def _svec_maps(d):
    iu, ju = np.triu_indices(d)
    w = np.where(iu == ju, 1.0, np.sqrt(2.0))
    return iu, ju, w


def _svec(mats, maps):
    iu, ju, w = maps
    return np.asarray(mats)[..., iu, ju] * w


def _unsvec(vecs, d, maps):
    iu, ju, w = maps
    vecs = np.asarray(vecs)
    vals = vecs / w
    out = np.zeros(vecs.shape[:-1] + (d, d))
    out[..., iu, ju] = vals
    out[..., ju, iu] = vals
    return out


# -- compilation to equality standard form ------------------------------------


class _Layout:
    """Column/row bookkeeping shared by every problem in a batch."""

    def __init__(self, prob: ConicProblem):
        self.block_dims = list(prob.block_dims)
        self.maps = [_svec_maps(d) for d in self.block_dims]
        self.block_cols = []
        col = 0
        for d in self.block_dims:
            sv = d * (d + 1) // 2
            self.block_cols.append(slice(col, col + sv))
            col += sv
        self.n_sv = col
        self.scalar_cols = []
        for kind in prob.scalar_kinds:
            if kind == NONNEG:
                self.scalar_cols.append((col,))
                col += 1
            else:  # FREE: split into a difference of nonnegatives
                self.scalar_cols.append((col, col + 1))
                col += 2
        self.slack_col = []
        for con in prob.constraints:
            if con.rel == "==":
                self.slack_col.append(-1)
            else:
                self.slack_col.append(col)
                col += 1
        self.n = col
        self.m = len(prob.constraints)
        self.n_nonneg = col - self.n_sv
        self.nu = sum(self.block_dims) + self.n_nonneg  # barrier parameter
        self.rels = [con.rel for con in prob.constraints]
        # multiplier sign map: lambda_i = sign_i * y_i is >= 0 for inequalities
        self.dual_sign = np.array([-1.0 if r == "<=" else 1.0 for r in self.rels])

    def fill_row(self, out, fn):
        for bid, mat in fn.blocks.items():
            out[self.block_cols[bid]] = _svec(mat, self.maps[bid])
        for sid, coeff in fn.scalars.items():
            cols = self.scalar_cols[sid]
            out[cols[0]] = coeff
            if len(cols) == 2:
                out[cols[1]] = -coeff

    def identity_point(self):
        e = np.zeros(self.n)
        for bid, d in enumerate(self.block_dims):
            e[self.block_cols[bid]] = _svec(np.eye(d), self.maps[bid])
        e[self.n_sv :] = 1.0
        return e

    def split_blocks(self, xvec):
        return [
            _unsvec(xvec[self.block_cols[bid]], d, self.maps[bid])
            for bid, d in enumerate(self.block_dims)
        ]

    def split_scalars(self, xvec):
        vals = np.empty(len(self.scalar_cols))
        for si, cols in enumerate(self.scalar_cols):
            vals[si] = xvec[cols[0]] if len(cols) == 1 else xvec[cols[0]] - xvec[cols[1]]
        return vals


def _compile(problems):
    lay = _Layout(problems[0])
    sig = problems[0].structure_signature()
    for p in problems[1:]:
        if p.structure_signature() != sig:
            raise ConicError("all problems in a batch must share identical structure")
    if lay.m == 0:
        raise ConicError("problem has no constraints")
    P = len(problems)
    A = np.zeros((P, lay.m, lay.n))
    b = np.zeros((P, lay.m))
    c = np.zeros((P, lay.n))
    const = np.zeros(P)
    for pi, prob in enumerate(problems):
        lay.fill_row(c[pi], prob.objective)
        const[pi] = prob.objective_constant
        for row, con in enumerate(prob.constraints):
            lay.fill_row(A[pi, row], con.fn)
            if lay.slack_col[row] >= 0:
                A[pi, row, lay.slack_col[row]] = 1.0 if con.rel == "<=" else -1.0
            b[pi, row] = con.rhs
    if not (np.isfinite(A).all() and np.isfinite(b).all() and np.isfinite(c).all()):
        raise ConicError("problem data contains non-finite entries")
    empty = np.all(A == 0.0, axis=2)
    if empty.any():
        pi, row = np.argwhere(empty)[0]
        raise ConicError(
            f"constraint {problems[pi].constraints[row].name!r} has an empty left-hand side"
        )
    return lay, A, b, c, const


def _equilibrate(lay, A, b, c):
    """Two Ruiz passes of row/column scaling, kept uniform inside each PSD block
    (a block's svec coordinates must share one scale so the scaling is a positive
    multiple of the block, which preserves the cone), then unit-sup normalization
    of b and c.  Returns scaled data plus the scales needed to undo everything."""
    P, m, n = A.shape
    r = np.ones((P, m))
    dcol = np.ones((P, n))
    absA = np.abs(A)
    for _ in range(2):
        cur = absA * r[:, :, None] * dcol[:, None, :]
        rmax = cur.max(axis=2)
        r /= np.sqrt(np.where(rmax > 0, rmax, 1.0))
        cur = absA * r[:, :, None] * dcol[:, None, :]
        cmax = cur.max(axis=1)
        for sl in lay.block_cols:
            cmax[:, sl] = cmax[:, sl].max(axis=1, keepdims=True)
        dcol /= np.sqrt(np.where(cmax > 0, cmax, 1.0))
    As = A * r[:, :, None] * dcol[:, None, :]
    bs = b * r
    sb = 1.0 / np.maximum(1.0, np.abs(bs).max(axis=1, initial=0.0))
    bs = bs * sb[:, None]
    cs = c * dcol
    sc = 1.0 / np.maximum(1.0, np.abs(cs).max(axis=1, initial=0.0))
    cs = cs * sc[:, None]
    return As, bs, cs, r, dcol, sb, sc


# -- Nesterov-Todd scaling ops -------------------------------------------------


def _nt_scaling(lay, x, z):
    """Per-block NT factors (R, R^-1, scaled spectrum) and nonneg ratios x/z.

    Raises numpy.linalg.LinAlgError when an iterate has drifted off the cone
    numerically (caller handles per-problem retirement).
    """
    blocks = []
    for bid, d in enumerate(lay.block_dims):
        sl = lay.block_cols[bid]
        X = _unsvec(x[:, sl], d, lay.maps[bid])
        Z = _unsvec(z[:, sl], d, lay.maps[bid])
        Lx = np.linalg.cholesky(X)
        Lz = np.linalg.cholesky(Z)
        U, sv, Vt = np.linalg.svd(np.swapaxes(Lz, -1, -2) @ Lx)
        sv = np.maximum(sv, 1e-280)
        V = np.swapaxes(Vt, -1, -2)
        sq = np.sqrt(sv)
        R = Lx @ (V / sq[:, None, :])
        Rinv = sq[:, :, None] * (np.swapaxes(V, -1, -2) @ np.linalg.inv(Lx))
        blocks.append((R, Rinv, sv))
    th = x[:, lay.n_sv :] / z[:, lay.n_sv :]
    return blocks, th


def _theta_op(lay, nt, vecs):
    """Apply the scaling operator  v -> Theta_op(v)  (per block X -> Theta X Theta,
    nonneg coordinates multiplied by x/z).  vecs has shape (P, k, n)."""
    blocks, th = nt
    out = np.empty_like(vecs)
    for bid, d in enumerate(lay.block_dims):
        sl = lay.block_cols[bid]
        R = blocks[bid][0]
        RT = np.swapaxes(R, -1, -2)
        M = _unsvec(vecs[:, :, sl], d, lay.maps[bid])
        inner = RT[:, None] @ M @ R[:, None]
        out[:, :, sl] = _svec(R[:, None] @ inner @ RT[:, None], lay.maps[bid])
    out[:, :, lay.n_sv :] = vecs[:, :, lay.n_sv :] * th[:, None, :]
    return out


def _gram(lay, nt, abar_mats, abar_nn):
    """Gram matrix  Abar Theta_op(Abar')  for the augmented rows [A; c]."""
    blocks, th = nt
    P, k, _ = abar_nn.shape
    gram = (abar_nn * th[:, None, :]) @ np.swapaxes(abar_nn, -1, -2)
    for bid, mats in enumerate(abar_mats):
        R = blocks[bid][0]
        RT = np.swapaxes(R, -1, -2)
        inner = RT[:, None] @ mats @ R[:, None]  # (P, k, d, d)
        flat = inner.reshape(P, k, -1)
        gram += flat @ np.swapaxes(flat, -1, -2)
    return gram


def _chol_gram(gram):
    """Batched Cholesky of the augmented Gram matrices [A; c] Theta [A; c]'.

    The factor is the workhorse of the direction solve: its leading m-by-m
    block factors the Schur complement S = A Theta A', its last row is
    L^-1 q with q = A Theta c, and its last pivot squared equals
    c Theta c - q' S^-1 q, nonnegative by construction.  Gram matrices are
    positive semidefinite up to roundoff; when rounding makes one indefinite
    we escalate a tiny diagonal jitter per problem, and report as `bad` any
    problem that stays unfactorable (which also catches non-finite iterates).
    """
    P, k, _ = gram.shape
    try:
        return np.linalg.cholesky(gram), None
    except np.linalg.LinAlgError:
        pass
    L = np.zeros_like(gram)
    bad = np.zeros(P, dtype=bool)
    eye = np.eye(k)
    for p in range(P):
        g = gram[p]
        scale = float(np.trace(g)) / k
        if not np.isfinite(scale) or scale <= 0.0:
            bad[p] = True
            continue
        for jit in (0.0, 1e-14, 1e-11, 1e-8):
            try:
                L[p] = np.linalg.cholesky(g + (jit * scale) * eye)
                break
            except np.linalg.LinAlgError:
                continue
        else:
            bad[p] = True
    return L, bad


def _scaled_dirs(lay, nt, dx, dz):
    """Per-block scaled directions dXh = R^-1 dX R^-T, dZh = R' dZ R."""
    blocks, _ = nt
    out = []
    for bid, d in enumerate(lay.block_dims):
        sl = lay.block_cols[bid]
        R, Rinv, _ = blocks[bid]
        RinvT = np.swapaxes(Rinv, -1, -2)
        RT = np.swapaxes(R, -1, -2)
        dXh = Rinv @ _unsvec(dx[:, sl], d, lay.maps[bid]) @ RinvT
        dZh = RT @ _unsvec(dz[:, sl], d, lay.maps[bid]) @ R
        out.append((dXh, dZh))
    return out


def _max_step(lay, nt, sdirs, x, z, tau, kap, dx, dz, dtau, dkap):
    """Largest alpha with the full update still inside the (closed) cone.

    A problem whose direction contains non-finite entries gets alpha = 0:
    it makes no progress and is eventually retired at the iteration limit
    rather than poisoning the batched eigenvalue computations.
    """
    blocks, _ = nt
    P = x.shape[0]
    alpha = np.full(P, np.inf)
    for bid, d in enumerate(lay.block_dims):
        _, _, lam = blocks[bid]
        sq = np.sqrt(lam)
        ds = sq[:, :, None] * sq[:, None, :]
        dXh, dZh = sdirs[bid]
        for mat in (dXh, dZh):
            scaled = mat / ds
            finite = np.isfinite(scaled).all(axis=(-2, -1))
            if not finite.all():
                scaled = np.where(finite[:, None, None], scaled, 0.0)
            w = np.linalg.eigvalsh(scaled)[:, 0]
            step = np.where(w < 0, -1.0 / np.minimum(w, -1e-300), np.inf)
            alpha = np.minimum(alpha, np.where(finite, step, 0.0))
    if lay.n_nonneg:
        for vec, dvec in ((x[:, lay.n_sv :], dx[:, lay.n_sv :]), (z[:, lay.n_sv :], dz[:, lay.n_sv :])):
            neg = dvec < 0
            cand = np.where(neg, -vec / np.where(neg, dvec, -1.0), np.inf)
            alpha = np.minimum(alpha, cand.min(axis=1))
    for val, dval in ((tau, dtau), (kap, dkap)):
        step = np.where(dval < 0, -val / np.where(dval < 0, dval, -1.0), np.inf)
        alpha = np.minimum(alpha, step)
    return np.where(np.isnan(alpha), 0.0, alpha)


# -- driver --------------------------------------------------------------------


def solve(problem, *, gap_tol=1e-8, feas_tol=1e-8, max_iters=200, verbose=False):
    """Solve one conic problem; see `solve_batch` for the engine."""
    return solve_batch(
        [problem], gap_tol=gap_tol, feas_tol=feas_tol, max_iters=max_iters, verbose=verbose
    )[0]


def solve_batch(problems, *, gap_tol=1e-8, feas_tol=1e-8, max_iters=200, verbose=False):
    """Solve a batch of identically structured problems in lockstep.

    Structure (block sizes, scalar kinds, constraint relations and sparsity
    pattern of which variables appear where) must match across the batch;
    numeric coefficients are free to differ.  Returns one `ConicSolution`
    per problem, in order.  Per-problem trajectories are identical to what
    `solve` would produce on each problem alone.
    """
    # Interior-point intermediates legitimately produce inf (open step
    # bounds) and, for problems headed to retirement, transient overflow;
    # those states are handled explicitly, so the warnings are noise.
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _solve_batch_core(
            list(problems), gap_tol, feas_tol, max_iters, verbose
        )


def _solve_batch_core(problems, gap_tol, feas_tol, max_iters, verbose):
    if not problems:
        return []
    lay, A0, b0, c0, const = _compile(problems)
    A, b, c, rsc, dsc, sb, sc = _equilibrate(lay, A0, b0, c0)
    P, m, n = A.shape

    # constant augmented rows [A; c], pre-split per PSD block / orthant
    abar = np.concatenate([A, c[:, None, :]], axis=1)
    abar_mats = [
        _unsvec(abar[:, :, lay.block_cols[bid]], d, lay.maps[bid])
        for bid, d in enumerate(lay.block_dims)
    ]
    abar_nn = abar[:, :, lay.n_sv :]

    e = lay.identity_point()
    x = np.tile(e, (P, 1))
    z = np.tile(e, (P, 1))
    y = np.zeros((P, m))
    tau = np.ones(P)
    kap = np.ones(P)

    idx = np.arange(P)  # original indices of the active problems
    results: list[ConicSolution | None] = [None] * P
    mu_traces: list[list[float]] = [[] for _ in range(P)]

    bnrm = 1.0 + np.abs(b).max(axis=1, initial=0.0)
    cnrm = 1.0 + np.abs(c).max(axis=1, initial=0.0)
    bnrm0 = 1.0 + np.abs(b0).max(axis=1, initial=0.0)
    cnrm0 = 1.0 + np.abs(c0).max(axis=1, initial=0.0)

    def snapshot(orig, status, xv, yv, zv, tv, kv, iters, note):
        """Unscale one problem's embedding state into a user-facing solution."""
        dloc, rloc = dsc[orig], rsc[orig]
        sol = ConicSolution(status=status, iterations=iters)
        sol.info = {"mu_trace": np.array(mu_traces[orig]), "termination": note}
        if status in (OPTIMAL, NUMERICAL_LIMIT):
            t = max(tv, 1e-300)
            xs = dloc * xv / t / sb[orig]
            ys = rloc * yv / t / sc[orig]
            zs = zv / dloc / t / sc[orig]
            sol.blocks = lay.split_blocks(xs)
            sol.scalars = lay.split_scalars(xs)
            sol.duals = lay.dual_sign * ys
            pr = np.abs(A0[orig] @ xs - b0[orig]).max(initial=0.0) / bnrm0[orig]
            dr = np.abs(c0[orig] - A0[orig].T @ ys - zs).max(initial=0.0) / cnrm0[orig]
            pobj = float(c0[orig] @ xs) + const[orig]
            dobj = float(b0[orig] @ ys) + const[orig]
            sol.primal_res = float(pr)
            sol.dual_res = float(dr)
            sol.gap = float(abs(pobj - dobj) / (1.0 + max(abs(pobj), abs(dobj))))
            sol.objective = pobj if status == OPTIMAL else None
            if status == NUMERICAL_LIMIT:
                sol.info["approx_objective"] = pobj
        elif status == INFEASIBLE:
            yr = rloc * yv
            zr = zv / dloc
            s = float(b0[orig] @ yr)
            yr, zr = yr / s, zr / s
            sol.duals = lay.dual_sign * yr
            sol.certificate = {
                "kind": "primal_infeasible",
                "duals": lay.dual_sign * yr,
                "dual_cone_ray": zr,
                "residual": float(np.abs(A0[orig].T @ yr + zr).max()),
            }
        elif status == UNBOUNDED:
            xr = dloc * xv
            s = -float(c0[orig] @ xr)
            xr = xr / s
            sol.certificate = {
                "kind": "primal_unbounded",
                "blocks": lay.split_blocks(xr),
                "scalars": lay.split_scalars(xr),
                "residual": float(np.abs(A0[orig] @ xr).max(initial=0.0)),
            }
        results[orig] = sol

    def compact(keep):
        nonlocal idx, x, y, z, tau, kap, A, b, c, abar_nn, abar_mats, bnrm, cnrm
        idx = idx[keep]
        x, y, z = x[keep], y[keep], z[keep]
        tau, kap = tau[keep], kap[keep]
        A, b, c = A[keep], b[keep], c[keep]
        abar_nn = abar_nn[keep]
        abar_mats = [mats[keep] for mats in abar_mats]
        bnrm, cnrm = bnrm[keep], cnrm[keep]

    for it in range(max_iters + 1):
        mu = (np.einsum("pn,pn->p", x, z) + tau * kap) / (lay.nu + 1)
        for k, orig in enumerate(idx):
            mu_traces[orig].append(float(mu[k]))

        # convergence and certificate tests at the current iterate
        xt = x / tau[:, None]
        yt = y / tau[:, None]
        zt = z / tau[:, None]
        pres = np.abs(np.einsum("pmn,pn->pm", A, xt) - b).max(axis=1) / bnrm
        dres = np.abs(c - np.einsum("pmn,pm->pn", A, yt) - zt).max(axis=1) / cnrm
        pobj = np.einsum("pn,pn->p", c, xt)
        dobj = np.einsum("pm,pm->p", b, yt)
        gap = np.abs(pobj - dobj) / (1.0 + np.maximum(np.abs(pobj), np.abs(dobj)))
        opt = (pres <= feas_tol) & (dres <= feas_tol) & (gap <= gap_tol)

        by = np.einsum("pm,pm->p", b, y)
        cx = np.einsum("pn,pn->p", c, x)
        ray_tail = tau <= 1e-3 * kap
        inf_res = np.abs(np.einsum("pmn,pm->pn", A, y) + z).max(axis=1)
        infea = (~opt) & ray_tail & (by > 0) & (inf_res <= feas_tol * by)
        unb_res = np.abs(np.einsum("pmn,pn->pm", A, x)).max(axis=1)
        unbd = (~opt) & (~infea) & ray_tail & (cx < 0) & (unb_res <= feas_tol * (-cx))

        done = opt | infea | unbd
        if it == max_iters:
            done = np.ones_like(done)
        if done.any():
            for k in np.flatnonzero(done):
                if opt[k]:
                    status, note = OPTIMAL, "converged"
                elif infea[k]:
                    status, note = INFEASIBLE, "dual improving ray"
                elif unbd[k]:
                    status, note = UNBOUNDED, "primal improving ray"
                else:
                    status, note = NUMERICAL_LIMIT, "iteration limit"
                snapshot(idx[k], status, x[k], y[k], z[k], tau[k], kap[k], it, note)
            compact(~done)
            mu = mu[~done]
        if len(idx) == 0 or it == max_iters:
            break
        if verbose:
            print(
                f"  it {it:3d}  active {len(idx):4d}  mu [{mu.min():.2e}, {mu.max():.2e}]"
                f"  pres {pres.max():.1e}  dres {dres.max():.1e}  gap {gap.max():.1e}"
            )

        # NT scaling; retire any problem whose iterate lost numerical definiteness
        while True:
            try:
                nt = _nt_scaling(lay, x, z)
                break
            except np.linalg.LinAlgError:
                bad = np.zeros(len(idx), dtype=bool)
                for k in range(len(idx)):
                    try:
                        _nt_scaling(lay, x[k : k + 1], z[k : k + 1])
                    except np.linalg.LinAlgError:
                        bad[k] = True
                        snapshot(
                            idx[k], NUMERICAL_LIMIT, x[k], y[k], z[k], tau[k], kap[k],
                            it, "factorization breakdown",
                        )
                if not bad.any():  # pragma: no cover - defensive
                    raise
                compact(~bad)
                if len(idx) == 0:
                    break
        if len(idx) == 0:
            break

        gram = _gram(lay, nt, abar_mats, abar_nn)
        L, bad = _chol_gram(gram)
        if bad is not None and bad.any():
            for k in np.flatnonzero(bad):
                snapshot(
                    idx[k], NUMERICAL_LIMIT, x[k], y[k], z[k], tau[k], kap[k],
                    it, "normal equations singular",
                )
            keep = ~bad
            compact(keep)
            if len(idx) == 0:
                break
            nt = ([tuple(a[keep] for a in blk) for blk in nt[0]], nt[1][keep])
            gram, L = gram[keep], L[keep]
            mu = mu[keep]
        Ls = L[:, :m, :m]  # Cholesky factor of S = A Theta A'
        LsT = np.swapaxes(Ls, -1, -2)
        wq = L[:, m, :m]  # L^-1 q  with  q = A Theta c
        lmm = L[:, m, m]  # sqrt(c Theta c - q' S^-1 q)
        kot = kap / tau

        wb = np.linalg.solve(Ls, b[:, :, None])[:, :, 0]
        # denominator of the tau pivot: provably negative because the first
        # two terms are squares read off the factorization
        coef = -(lmm**2) - np.einsum("pm,pm->p", wb, wb) - kot

        r_p = np.einsum("pmn,pn->pm", A, x) - b * tau[:, None]
        r_d = c * tau[:, None] - np.einsum("pmn,pm->pn", A, y) - z
        r_g = np.einsum("pn,pn->p", c, x) - np.einsum("pm,pm->p", b, y) + kap

        trd = _theta_op(lay, nt, r_d[:, None, :])[:, 0, :]
        tc = _theta_op(lay, nt, c[:, None, :])[:, 0, :]

        # predictor (affine) direction: gamma = 0, Vc = -x, h_kappa = -kappa
        u_aff = -(x + trd)
        rhs1a = -r_p - np.einsum("pmn,pn->pm", A, u_aff)
        w1a = np.linalg.solve(Ls, rhs1a[:, :, None])[:, :, 0]
        num = (
            -r_g
            + kap
            - np.einsum("pn,pn->p", c, u_aff)
            - np.einsum("pm,pm->p", wq - wb, w1a)
        )
        dtau_a = num / coef
        dy_a = np.linalg.solve(
            LsT, (w1a + (wq + wb) * dtau_a[:, None])[:, :, None]
        )[:, :, 0]
        dz_a = c * dtau_a[:, None] - np.einsum("pmn,pm->pn", A, dy_a) + r_d
        dx_a = u_aff - tc * dtau_a[:, None] + _theta_op(
            lay, nt, np.einsum("pmn,pm->pn", A, dy_a)[:, None, :]
        )[:, 0, :]
        dk_a = -kap - kot * dtau_a

        sdirs_a = _scaled_dirs(lay, nt, dx_a, dz_a)
        a_aff = np.minimum(
            1.0, _max_step(lay, nt, sdirs_a, x, z, tau, kap, dx_a, dz_a, dtau_a, dk_a)
        )
        mu_aff = (
            np.einsum("pn,pn->p", x + a_aff[:, None] * dx_a, z + a_aff[:, None] * dz_a)
            + (tau + a_aff * dtau_a) * (kap + a_aff * dk_a)
        ) / (lay.nu + 1)
        sigma = np.clip((np.maximum(mu_aff, 0.0) / mu) ** 3, 0.0, 1.0)

        # corrector: centered direction with Mehrotra second-order terms
        sigmu = sigma * mu
        vc = np.empty_like(x)
        blocks_nt, th = nt
        for bid, d in enumerate(lay.block_dims):
            R, _, lam = blocks_nt[bid]
            RT = np.swapaxes(R, -1, -2)
            dXh, dZh = sdirs_a[bid]
            prod = dXh @ dZh
            corr = 0.5 * (prod + np.swapaxes(prod, -1, -2))
            rhs_blk = -corr
            ar = np.arange(d)
            rhs_blk[:, ar, ar] += sigmu[:, None] - lam**2
            dmat = 2.0 / (lam[:, :, None] + lam[:, None, :])
            vc[:, lay.block_cols[bid]] = _svec(R @ (rhs_blk * dmat) @ RT, lay.maps[bid])
        if lay.n_nonneg:
            xn, zn = x[:, lay.n_sv :], z[:, lay.n_sv :]
            dxn, dzn = dx_a[:, lay.n_sv :], dz_a[:, lay.n_sv :]
            vc[:, lay.n_sv :] = (sigmu[:, None] - xn * zn - dxn * dzn) / zn

        eta = (1.0 - sigma)[:, None]
        u = vc - eta * trd
        rhs1 = -eta[:, 0][:, None] * r_p - np.einsum("pmn,pn->pm", A, u)
        w1 = np.linalg.solve(Ls, rhs1[:, :, None])[:, :, 0]
        hk = (sigmu - tau * kap - dtau_a * dk_a) / tau
        num = (
            -eta[:, 0] * r_g
            - hk
            - np.einsum("pn,pn->p", c, u)
            - np.einsum("pm,pm->p", wq - wb, w1)
        )
        dtau = num / coef
        dy = np.linalg.solve(
            LsT, (w1 + (wq + wb) * dtau[:, None])[:, :, None]
        )[:, :, 0]
        dz = c * dtau[:, None] - np.einsum("pmn,pm->pn", A, dy) + eta * r_d
        dx = u - tc * dtau[:, None] + _theta_op(
            lay, nt, np.einsum("pmn,pm->pn", A, dy)[:, None, :]
        )[:, 0, :]
        dk = hk - kot * dtau

        sdirs = _scaled_dirs(lay, nt, dx, dz)
        alpha = np.minimum(
            1.0,
            _STEP_DAMP * _max_step(lay, nt, sdirs, x, z, tau, kap, dx, dz, dtau, dk),
        )

        x = x + alpha[:, None] * dx
        y = y + alpha[:, None] * dy
        z = z + alpha[:, None] * dz
        tau = tau + alpha * dtau
        kap = kap + alpha * dk

    return results
