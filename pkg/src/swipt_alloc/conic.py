"""Conic problem container: linear objective/constraints over PSD blocks and scalars.

The variable is a tuple of real symmetric PSD blocks plus nonnegative and free
scalars.  Every functional (objective, constraint left-hand side) is linear:
a set of symmetric coefficient matrices paired with blocks, plus scalar
coefficients.  Constraints compare the functional against a scalar rhs with
one of ``<=``, ``==``, ``>=``.  The solver (`swipt_alloc.solver.solve`)
minimizes the objective.

Complex Hermitian matrix variables enter through the real embedding
``[[Re, -Im], [Im, Re]]`` (`hermitian_embed`).  The embedding doubles traces,
so coefficient matrices built from complex data go through `hermitian_coeff`
(which halves the embedding) to keep reported values equal to the complex
model, and solutions come back via `recover_hermitian`.

Dual multipliers reported in `ConicSolution.duals` are the lambda_i in

    L(x, lambda) = c.x - sum_i s_i * lambda_i * (a_i.x - rhs_i),

with s_i = +1 for ``>=`` and ``==`` rows and s_i = -1 for ``<=`` rows, so
inequality multipliers are nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_LIMIT = "numerical_limit"

RELATIONS = ("<=", "==", ">=")

# scalar kinds
NONNEG = "nonneg"
FREE = "free"


class ConicError(ValueError):
    """Contract violation while building or consuming a conic problem."""


def hermitian_embed(h, tol=1e-12):
    """Real-symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix.

    The embedding is PSD iff the input is, and each eigenvalue of the input
    appears twice.  Raises `ConicError` when the input is not Hermitian
    within ``tol`` (absolute, relative to the largest entry).
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ConicError(f"expected a square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.abs(h).max()) if h.size else 1.0)
    if float(np.abs(h - h.conj().T).max()) > tol * scale:
        raise ConicError("matrix is not Hermitian within tolerance")
    re, im = np.real(h), np.imag(h)
    top = np.concatenate([re, -im], axis=1)
    bot = np.concatenate([im, re], axis=1)
    out = np.concatenate([top, bot], axis=0)
    return 0.5 * (out + out.T)  # kill roundoff asymmetry


def hermitian_coeff(a, tol=1e-12):
    """Embedded coefficient matrix: Tr(hermitian_coeff(A) @ W_emb) == Re Tr(A W)."""
    return 0.5 * hermitian_embed(a, tol=tol)


def recover_hermitian(w):
    """Invert `hermitian_embed` on a (2n x 2n) real matrix, averaging the two copies."""
    w = np.asarray(w, dtype=float)
    n2 = w.shape[0]
    if w.ndim != 2 or w.shape[0] != w.shape[1] or n2 % 2:
        raise ConicError(f"expected an even square matrix, got shape {w.shape}")
    n = n2 // 2
    re = 0.5 * (w[:n, :n] + w[n:, n:])
    im = 0.5 * (w[n:, :n] - w[:n, n:])
    out = re + 1j * im
    return 0.5 * (out + out.conj().T)


def _as_sym(mat, dim, what):
    m = np.asarray(mat, dtype=float)
    if m.shape != (dim, dim):
        raise ConicError(f"{what}: expected shape ({dim}, {dim}), got {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if float(np.abs(m - m.T).max()) > 1e-10 * scale:
        raise ConicError(f"{what}: coefficient matrix is not symmetric")
    return 0.5 * (m + m.T)


@dataclass
class _Functional:
    blocks: dict  # block index -> symmetric coefficient matrix
    scalars: dict  # scalar index -> float coefficient


@dataclass
class _Constraint:
    fn: _Functional
    rel: str
    rhs: float
    name: str


class ConicProblem:
    """Builder/container for one conic program (minimization)."""

    def __init__(self):
        self.block_dims = []
        self.scalar_kinds = []
        self.objective = _Functional({}, {})
        self.objective_constant = 0.0
        self.constraints = []

    # -- variable layout -------------------------------------------------

    def add_psd_block(self, dim):
        """Declare a real symmetric PSD block of size dim; returns its index."""
        dim = int(dim)
        if dim < 1:
            raise ConicError("PSD block dimension must be >= 1")
        self.block_dims.append(dim)
        return len(self.block_dims) - 1

    def add_scalar(self, kind=NONNEG):
        """Declare one scalar variable ('nonneg' or 'free'); returns its index."""
        if kind not in (NONNEG, FREE):
            raise ConicError(f"unknown scalar kind {kind!r}")
        self.scalar_kinds.append(kind)
        return len(self.scalar_kinds) - 1

    def add_nonneg(self):
        return self.add_scalar(NONNEG)

    def add_free(self):
        return self.add_scalar(FREE)

    # -- functionals -----------------------------------------------------

    def _functional(self, blocks, scalars, what):
        fb, fs = {}, {}
        for bid, mat in (blocks or {}).items():
            bid = int(bid)
            if not 0 <= bid < len(self.block_dims):
                raise ConicError(f"{what}: unknown block index {bid}")
            fb[bid] = _as_sym(mat, self.block_dims[bid], what)
        for sid, coeff in (scalars or {}).items():
            sid = int(sid)
            if not 0 <= sid < len(self.scalar_kinds):
                raise ConicError(f"{what}: unknown scalar index {sid}")
            fs[sid] = float(coeff)
        return _Functional(fb, fs)

    def set_objective(self, blocks=None, scalars=None, constant=0.0):
        """Set the (minimized) objective functional."""
        self.objective = self._functional(blocks, scalars, "objective")
        self.objective_constant = float(constant)

    def add_constraint(self, rel, rhs, blocks=None, scalars=None, name=None):
        """Append constraint  <functional> rel rhs ; returns the row index."""
        if rel not in RELATIONS:
            raise ConicError(f"relation must be one of {RELATIONS}, got {rel!r}")
        fn = self._functional(blocks, scalars, name or f"constraint {len(self.constraints)}")
        self.constraints.append(
            _Constraint(fn, rel, float(rhs), name or f"c{len(self.constraints)}")
        )
        return len(self.constraints) - 1

    # -- introspection ---------------------------------------------------

    @property
    def n_constraints(self):
        return len(self.constraints)

    def structure_signature(self):
        """Hashable layout signature; problems sharing it can be batch-solved."""
        rows = tuple(
            (c.rel, tuple(sorted(c.fn.blocks)), tuple(sorted(c.fn.scalars)))
            for c in self.constraints
        )
        obj = (tuple(sorted(self.objective.blocks)), tuple(sorted(self.objective.scalars)))
        return (tuple(self.block_dims), tuple(self.scalar_kinds), obj, rows)

    def evaluate(self, fn_or_row, blocks, scalars):
        """Evaluate a functional (or constraint row index) at a candidate point."""
        fn = self.constraints[fn_or_row].fn if isinstance(fn_or_row, int) else fn_or_row
        val = 0.0
        for bid, mat in fn.blocks.items():
            val += float(np.tensordot(mat, np.asarray(blocks[bid], dtype=float)))
        for sid, coeff in fn.scalars.items():
            val += coeff * float(scalars[sid])
        return val

    # -- debug dump --------------------------------------------------------

    def dump(self, fp: IO[str]):
        """Plain-text sparse-triplet dump: one line per nonzero (block, i, j, value).

        Sections: header, objective (tag O), then one section per constraint
        (tag C<row> with relation and rhs).  Scalar coefficients use block
        tag 's' and column index in place of (i, j).
        """
        fp.write("conic-problem v1\n")
        fp.write("blocks " + " ".join(str(d) for d in self.block_dims) + "\n")
        fp.write("scalars " + " ".join(self.scalar_kinds) + "\n")
        fp.write(f"objective constant={float(self.objective_constant)!r}\n")

        def write_fn(tag, fn):
            for bid in sorted(fn.blocks):
                mat = fn.blocks[bid]
                for i in range(mat.shape[0]):
                    for j in range(i + 1):
                        if mat[i, j] != 0.0:
                            fp.write(f"{tag} {bid} {i} {j} {float(mat[i, j])!r}\n")
            for sid in sorted(fn.scalars):
                if fn.scalars[sid] != 0.0:
                    fp.write(f"{tag} s {sid} {float(fn.scalars[sid])!r}\n")

        write_fn("O", self.objective)
        for row, con in enumerate(self.constraints):
            fp.write(f"C{row} {con.rel} {float(con.rhs)!r} name={con.name}\n")
            write_fn(f"C{row}", con.fn)


@dataclass
class ConicSolution:
    """Solver output.

    status      one of OPTIMAL / INFEASIBLE / UNBOUNDED / NUMERICAL_LIMIT
    objective   primal objective value (None unless optimal)
    blocks      list of primal PSD block values (symmetric ndarrays)
    scalars     primal scalar values in declaration order
    duals       per-constraint multipliers (see module docstring for signs)
    gap         relative primal-dual objective gap at the returned point
    primal_res  relative primal residual (constraint violation)
    dual_res    relative dual residual
    iterations  interior-point iterations spent
    certificate for INFEASIBLE/UNBOUNDED: dict with the normalized ray
    info        diagnostics (mu trace, termination detail)
    """

    status: str
    objective: float | None = None
    blocks: list | None = None
    scalars: np.ndarray | None = None
    duals: np.ndarray | None = None
    gap: float = np.inf
    primal_res: float = np.inf
    dual_res: float = np.inf
    iterations: int = 0
    certificate: dict | None = None
    info: dict = field(default_factory=dict)


def require_optimal(solution: ConicSolution):
    """Pass the solution through unless the solver stopped short of optimal."""
    if solution.status != OPTIMAL:
        note = solution.info.get("termination", "")
        raise ConicError(f"solver returned {solution.status} ({note})")
    return solution


def kkt_residuals(problem: ConicProblem, solution: ConicSolution):
    """Recompute KKT quality measures from problem data and a returned point.

    Independent of solver internals: uses only the user-facing problem and
    solution.  Requires an OPTIMAL solution.  Returns a dict with
    ``primal_res``, ``dual_res``, ``gap`` and ``min_eig`` (most negative
    eigenvalue over primal blocks and nonnegative scalars; >= 0 means the
    point is in the cone).
    """
    if solution.status != OPTIMAL:
        raise ConicError("kkt_residuals requires an optimal solution")
    blocks = solution.blocks
    scalars = solution.scalars
    lam = solution.duals

    primal = 0.0
    for row, con in enumerate(problem.constraints):
        v = problem.evaluate(row, blocks, scalars)
        err = v - con.rhs
        den = 1.0 + abs(con.rhs)
        if con.rel == "<=":
            primal = max(primal, err / den)
        elif con.rel == ">=":
            primal = max(primal, -err / den)
        else:
            primal = max(primal, abs(err) / den)

    min_eig = np.inf
    for bid, x in enumerate(blocks):
        min_eig = min(min_eig, float(np.linalg.eigvalsh(np.asarray(x))[0]))
    for sid, kind in enumerate(problem.scalar_kinds):
        if kind == NONNEG:
            min_eig = min(min_eig, float(scalars[sid]))
    if min_eig is np.inf:
        min_eig = 0.0

    # dual slack Z = C - sum_i s_i lambda_i A_i  must lie in the dual cone
    zb = [np.zeros((d, d)) for d in problem.block_dims]
    zs = np.zeros(len(problem.scalar_kinds))
    cnorm = 1.0
    for bid, mat in problem.objective.blocks.items():
        zb[bid] += mat
        cnorm = max(cnorm, float(np.abs(mat).max()))
    for sid, coeff in problem.objective.scalars.items():
        zs[sid] += coeff
        cnorm = max(cnorm, abs(coeff))
    for row, con in enumerate(problem.constraints):
        s = -1.0 if con.rel == "<=" else 1.0
        w = s * float(lam[row])
        for bid, mat in con.fn.blocks.items():
            zb[bid] -= w * mat
        for sid, coeff in con.fn.scalars.items():
            zs[sid] -= w * coeff
    dual = 0.0
    for bid, z in enumerate(zb):
        if z.shape[0]:
            dual = max(dual, -float(np.linalg.eigvalsh(z)[0]))
    for sid, kind in enumerate(problem.scalar_kinds):
        dual = max(dual, -zs[sid] if kind == NONNEG else abs(zs[sid]))
    dual /= cnorm

    pobj = problem.evaluate(problem.objective, blocks, scalars) + problem.objective_constant
    dobj = problem.objective_constant
    for row, con in enumerate(problem.constraints):
        s = -1.0 if con.rel == "<=" else 1.0
        dobj += s * float(lam[row]) * con.rhs
    gap = abs(pobj - dobj) / (1.0 + max(abs(pobj), abs(dobj)))

    return {
        "primal_res": float(primal),
        "dual_res": float(dual),
        "gap": float(gap),
        "min_eig": float(min_eig),
    }
