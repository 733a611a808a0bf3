"""Structural analysis of factor models: redundancy, equivalence, reduction.

Two models are *observationally equivalent* when their normalized state
price densities coincide, so all prices agree.  The operations here decide
and exploit the three ways an ``m``-factor model can be redundant:

* directions in the *term-structure kernel* (the joint null space of
  ``psi' beta^k``) leave every bond price unchanged and can be quotiented
  out (:func:`reduce_tsk_quotient`);
* a deficient affine support confines the factors to a lower-dimensional
  affine subspace, onto which the model restricts
  (:func:`reduce_affine_support`);
* a strictly-linear-drift process with a deterministic exponential
  direction ``v' Z_t = v' Z_0 e^{lambda t}`` collapses to one dimension
  less (:func:`reducibility` / :func:`reduce`).

A model admitting no translation that kills both the drift constant and
the density intercept is *proper* (:func:`is_proper`); properness is
equivalent to the lifted ``(m+1)``-dim process having an empty
term-structure kernel.  :func:`equivalence_certificate` recovers the
algebraic relation linking any two equivalent models with empty kernels
and verifies it on a validation grid of maturities.

Everything is decided analytically from the spec (drift, density
coefficients, diffusion loadings); simulation-based support estimation
(:func:`estimate_linear_support`) exists for cross-checks on path data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics, pricing
from .models import (
    DiffusionSpec,
    LGProcessSpec,
    LRModelSpec,
)
from .numerics import DEFAULT_TOL, as_matrix, as_vector, kernel_basis

__all__ = [
    "CertificateError",
    "IllConditionedTausError",
    "PreconditionError",
    "StructureReport",
    "ProperResult",
    "ReducibilityResult",
    "EquivalenceCertificate",
    "MinimalRepresentation",
    "term_structure_kernel",
    "is_constant_short_rate",
    "is_proper",
    "reducibility",
    "reduce",
    "reduce_affine_support",
    "reduce_tsk_quotient",
    "minimal_representation",
    "equivalence_certificate",
    "estimate_linear_support",
    "affine_support",
    "linear_support_rank",
    "structure_report",
]


class PreconditionError(ValueError):
    """The operation's structural precondition does not hold."""


class CertificateError(ValueError):
    """A supplied reduction certificate fails verification."""


class IllConditionedTausError(RuntimeError):
    """No well-conditioned maturity stack found; supply different taus."""


# ---------------------------------------------------------------------------
# kernel, constant rate, properness


def _ch_rows(model: LRModelSpec) -> list:
    # psi' beta^k for k < m spans psi' e^{beta tau} by Cayley-Hamilton
    rows, row = [], model.psi.copy()
    for _ in range(model.dim):
        rows.append(row)
        row = model.beta.T @ row
    return rows


def is_constant_short_rate(model: LRModelSpec, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``psi`` is a left eigenvector of ``beta`` with eigenvalue
    ``lambda`` satisfying ``psi.b = lambda phi`` (then ``r = alpha - lambda``)."""
    psi = model.psi
    nrm2 = float(psi @ psi)
    if nrm2 == 0.0:
        return True  # psi = 0: rate is identically alpha
    w = model.beta.T @ psi
    lam = float(psi @ w) / nrm2
    scale = max(1.0, float(np.linalg.norm(model.beta))) * math.sqrt(nrm2)
    if np.linalg.norm(w - lam * psi) > tol * scale:
        return False
    drift_scale = max(1.0, abs(lam) * max(1.0, abs(model.phi)), float(np.linalg.norm(model.b)))
    return abs(float(psi @ model.b) - lam * model.phi) <= tol * drift_scale


def term_structure_kernel(model: LRModelSpec, tol: float = DEFAULT_TOL) -> list:
    """Orthonormal basis of the directions unspanned by every bond price.

    Computed exactly as the joint kernel of ``psi' beta^k``, ``k < m``.
    With a constant short rate every direction is unspanned and the full
    canonical basis of the factor space is returned.
    """
    if is_constant_short_rate(model, tol):
        return [np.eye(model.dim)[:, j].copy() for j in range(model.dim)]
    return kernel_basis(_ch_rows(model), tol)


@dataclass
class ProperResult:
    proper: bool
    witness_q: np.ndarray | None


def is_proper(model: LRModelSpec, tol: float = DEFAULT_TOL) -> ProperResult:
    """Decide solvability of ``b + beta q = 0`` and ``phi + psi.q = 0``.

    A solution ``q`` witnesses that the model is *not* proper: translating
    by ``q`` turns it into a strictly-linear-drift process of the same
    dimension.
    """
    stacked = np.vstack([model.beta, model.psi])
    rhs = np.concatenate([-model.b, [-model.phi]])
    sol = numerics.solve_linear(stacked, rhs, tol)
    if sol is None:
        return ProperResult(True, None)
    return ProperResult(False, sol.solution)


# ---------------------------------------------------------------------------
# reducibility of strictly-linear processes


@dataclass
class ReducibilityResult:
    reducible: bool
    v: np.ndarray | None
    lam: float | None
    defective_caveat: bool = False
    preconditions_hold: bool = True


def reducibility(lg: LGProcessSpec, tol: float = DEFAULT_TOL) -> ReducibilityResult:
    """Scan for a deterministic exponential direction ``v' Z = v' Z0 e^{lam t}``.

    Real left eigenpairs of the drift matrix are tried in order of
    descending eigenvalue; a pair qualifies when ``v`` annihilates every
    diffusion loading (so ``v' Z`` carries no noise) and ``v . z0 != 0``.
    The returned ``v`` is unit-norm with ``v . z0 > 0``.  The findings are
    marked conditional when the kernel/support preconditions of the
    equivalence statement do not hold.
    """
    dec = numerics.eig(lg.beta, tol)
    loadings = lg.diffusion.loadings
    scale = max(1.0, float(np.linalg.norm(lg.beta)))
    z0n = max(1.0, float(np.linalg.norm(lg.z0)))

    pre = (
        len(term_structure_kernel(lg, tol)) == 0
        and linear_support_rank(lg, tol, discounted=True) == lg.dim
    )
    for lam, v in dec.real_left_pairs(tol):
        if np.linalg.norm(lg.beta.T @ v - lam * v) > tol * scale:
            continue
        if loadings.size and np.max(np.abs(loadings @ v)) > tol * max(
            1.0, float(np.linalg.norm(loadings))
        ):
            continue
        inner = float(v @ lg.z0)
        if abs(inner) <= tol * z0n:
            continue
        if inner < 0:
            v = -v
        return ReducibilityResult(True, v, lam, dec.defective, pre)
    return ReducibilityResult(False, None, None, dec.defective, pre)


def _complete_basis(v: np.ndarray) -> np.ndarray:
    """Invertible matrix with first row ``v``, completed by the canonical
    rows most orthogonal to ``v`` (pivoted Gram-Schmidt, for conditioning)."""
    m = v.size
    rows = [v / np.linalg.norm(v)]
    for i in np.argsort(np.abs(v)):
        w = np.eye(m)[i].copy()
        for r in rows:
            w -= (r @ w) * r
        nrm = np.linalg.norm(w)
        if nrm > 1e-10:
            rows.append(w / nrm)
        if len(rows) == m:
            break
    Q = np.vstack(rows)
    Q[0] = v  # keep the caller's scaling on the first row
    return Q


def _check_price_agreement(a: LRModelSpec, b: LRModelSpec, taus, tol: float, what: str):
    for tau in taus:
        la = pricing.log_bond_price(a, a.z0, 0.0, tau)
        lb = pricing.log_bond_price(b, b.z0, 0.0, tau)
        if abs(la - lb) > tol:
            raise CertificateError(
                f"{what}: log-price mismatch {abs(la - lb):.3e} at tau={tau:g}"
            )


def reduce(lg: LGProcessSpec, v, lam: float, tol: float = DEFAULT_TOL) -> LRModelSpec:
    """Collapse a reducible strictly-linear process to one dimension less.

    With ``Q`` invertible whose first row is ``v``, the rescaled process
    ``e^{-lam t} Q Z_t / (v . Z0)`` has a constant unit first coordinate;
    its remaining coordinates follow an ``(m-1)``-dim model with drift data
    read off ``Q (beta - lam I) Q^{-1}``, discount ``alpha - lam`` and
    density coefficients ``(Q^T)^{-1} psi``.  Prices agree with the source
    by construction (verified on a small grid before returning).
    """
    v = as_vector(v, "v")
    if v.size != lg.dim or lg.dim < 2:
        raise CertificateError("certificate dimension mismatch")
    scale = max(1.0, float(np.linalg.norm(lg.beta)))
    ctol = max(tol, 1e-12) * scale * float(np.linalg.norm(v))
    if np.linalg.norm(lg.beta.T @ v - lam * v) > 1e4 * ctol:
        raise CertificateError("v is not a left eigenvector at the given rate")
    if lg.diffusion.loadings.size and np.max(np.abs(lg.diffusion.loadings @ v)) > 1e4 * ctol:
        raise CertificateError("v does not annihilate the diffusion loadings")
    inner = float(v @ lg.z0)
    if inner <= 0.0:
        raise CertificateError("certificate requires v . z0 > 0")

    Q = _complete_basis(v)
    Qinv = np.linalg.inv(Q)
    gen = Q @ (lg.beta - lam * np.eye(lg.dim)) @ Qinv
    if np.max(np.abs(gen[0])) > 1e-6 * scale:
        raise CertificateError("reduced generator has a nonzero first row")

    psi_full = np.linalg.solve(Q.T, lg.psi)
    z_full = (Q @ lg.z0) / inner
    diff = lg.diffusion
    if diff.num_drivers:
        load_full = (diff.loadings @ Q.T) / inner
        slope_full = inner * (diff.vol_slopes @ Qinv)
        new_diff = DiffusionSpec(
            lg.dim - 1,
            load_full[:, 1:],
            diff.vol_offsets + slope_full[:, 0],
            slope_full[:, 1:],
        )
    else:
        new_diff = DiffusionSpec.deterministic(lg.dim - 1)

    reduced = LRModelSpec(
        dim=lg.dim - 1,
        b=gen[1:, 0].copy(),
        beta=gen[1:, 1:].copy(),
        alpha=lg.alpha - lam,
        phi=float(psi_full[0]),
        psi=psi_full[1:].copy(),
        z0=z_full[1:].copy(),
        diffusion=new_diff,
        state_space="whole_space",
        diffusion_time_exponent=lg.diffusion_time_exponent - lam,
    )
    _check_price_agreement(lg, reduced, (1.0, 5.0), 1e-6, "reduce")
    return reduced


# ---------------------------------------------------------------------------
# support computations and the quotient constructions


def _krylov_basis(beta: np.ndarray, generators: list, tol: float) -> list:
    """Orthonormal basis of the smallest beta-invariant subspace containing
    the generators."""
    m = beta.shape[0]
    cols = []
    for g in generators:
        w = np.asarray(g, dtype=float)
        for _ in range(m):
            cols.append(w)
            w = beta @ w
    if not cols:
        return []
    stacked = np.vstack(cols)
    _, s, vh = np.linalg.svd(stacked)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return []
    rank = int(np.sum(s > tol * smax))
    return [vh[i].copy() for i in range(rank)]


def affine_support(model: LRModelSpec, tol: float = DEFAULT_TOL):
    """Analytic affine hull of the paths: ``z0 + span(basis)``.

    The linear part is the smallest drift-invariant subspace containing the
    initial drift ``b + beta z0`` and all diffusion loadings; exact for the
    affine-square-root family when the volatilities do not degenerate.
    """
    gens = [model.b + model.beta @ model.z0]
    gens += [row for row in model.diffusion.loadings]
    basis = _krylov_basis(model.beta, gens, tol)
    return model.z0.copy(), basis


def linear_support_rank(model: LRModelSpec, tol: float = DEFAULT_TOL,
                        discounted: bool = False) -> int:
    """Dimension of the linear span of the paths.

    With ``discounted`` the paths are premultiplied by ``e^{-beta t}``,
    which strips the drift: the span is then ``z0`` plus the invariant
    subspace generated by the loadings alone.
    """
    if discounted:
        gens = [row for row in model.diffusion.loadings]
    else:
        gens = [model.b + model.beta @ model.z0]
        gens += [row for row in model.diffusion.loadings]
    basis = _krylov_basis(model.beta, gens, tol)
    cols = basis + [model.z0]
    stacked = np.vstack(cols)
    s = np.linalg.svd(stacked, compute_uv=False)
    smax = s[0] if s.size else 0.0
    return int(np.sum(s > tol * smax)) if smax > 0 else 0


def reduce_affine_support(model: LRModelSpec, support_basis, support_point,
                          tol: float = DEFAULT_TOL) -> LRModelSpec:
    """Restrict the model to a declared affine support ``q + range(Q)``.

    ``Q`` (columns = ``support_basis``) maps the reduced coordinates back to
    the original ones via ``z = Q z' + q``; the pseudo-inverse ``P`` of
    ``Q`` pushes the dynamics and the density forward.  Observational
    equivalence is by construction, provided the paths do live on the
    declared support.
    """
    Q = as_matrix(support_basis, "support_basis")
    q = as_vector(support_point, "support_point")
    m, mp = Q.shape
    if m != model.dim or q.size != model.dim:
        raise numerics.DimensionError("support data does not match the model dimension")
    s = np.linalg.svd(Q, compute_uv=False)
    if s.size < mp or s[-1] <= tol * s[0]:
        raise ValueError("support basis is rank deficient")
    P = np.linalg.pinv(Q)
    resid = np.linalg.norm((np.eye(m) - Q @ P) @ (model.z0 - q))
    if resid > 1e-8 * max(1.0, float(np.linalg.norm(model.z0 - q))):
        raise PreconditionError("initial state is not on the declared support")

    diff = model.diffusion
    new_diff = DiffusionSpec(
        mp,
        diff.loadings @ P.T,
        diff.vol_offsets + diff.vol_slopes @ q,
        diff.vol_slopes @ Q,
    ) if diff.num_drivers else DiffusionSpec.deterministic(mp)
    cls = LGProcessSpec if isinstance(model, LGProcessSpec) and not np.any(q) else LRModelSpec
    new_phi = model.phi + float(model.psi @ q)
    if cls is LGProcessSpec and new_phi != 0.0:
        cls = LRModelSpec
    return cls(
        dim=mp,
        b=P @ (model.b + model.beta @ q),
        beta=P @ model.beta @ Q,
        alpha=model.alpha,
        phi=new_phi,
        psi=Q.T @ model.psi,
        z0=P @ (model.z0 - q),
        diffusion=new_diff,
        state_space="whole_space",
        diffusion_time_exponent=model.diffusion_time_exponent,
    )


def reduce_tsk_quotient(model: LRModelSpec, tol: float = DEFAULT_TOL) -> LRModelSpec:
    """Quotient out the term-structure kernel.

    Splits the factor space into the kernel and its orthogonal complement;
    the kernel is drift-invariant and unseen by the density, so projecting
    onto the complement yields an observationally equivalent model with an
    empty kernel one or more dimensions down.
    """
    if is_constant_short_rate(model, tol):
        raise PreconditionError("constant short rate: every direction is unspanned")
    kernel = term_structure_kernel(model, tol)
    if not kernel:
        raise PreconditionError("term-structure kernel is already zero")
    rows = _ch_rows(model)
    _, s, vh = np.linalg.svd(np.vstack(rows))
    rank = int(np.sum(s > tol * s[0]))
    P1 = vh[:rank]  # kernel of P1 is exactly the TSK
    Q1 = P1.T

    diff = model.diffusion
    new_diff = DiffusionSpec(
        rank,
        diff.loadings @ Q1,
        diff.vol_offsets.copy(),
        diff.vol_slopes @ Q1,
    ) if diff.num_drivers else DiffusionSpec.deterministic(rank)
    cls = LGProcessSpec if isinstance(model, LGProcessSpec) else LRModelSpec
    reduced = cls(
        dim=rank,
        b=P1 @ model.b,
        beta=P1 @ model.beta @ Q1,
        alpha=model.alpha,
        phi=model.phi,
        psi=Q1.T @ model.psi,
        z0=P1 @ model.z0,
        diffusion=new_diff,
        state_space="whole_space",
        diffusion_time_exponent=model.diffusion_time_exponent,
    )
    if term_structure_kernel(reduced, tol):
        raise RuntimeError("quotient model still has a nonzero term-structure kernel")
    _check_price_agreement(model, reduced, (0.5, 2.0, 10.0), 1e-6, "tsk quotient")
    return reduced


@dataclass
class MinimalRepresentation:
    model: LRModelSpec
    steps: list
    constant_rate: bool = False


def minimal_representation(model: LRModelSpec, tol: float = DEFAULT_TOL) -> MinimalRepresentation:
    """Iterate support and kernel reductions to a minimal equivalent model.

    Terminates because each step strictly lowers the dimension.  Constant
    short-rate models collapse to the canonical one-factor form with
    deterministic exponential factor and are flagged.
    """
    steps = []
    current = model
    if is_constant_short_rate(current, tol):
        psi = current.psi
        nrm2 = float(psi @ psi)
        lam = float(psi @ (current.beta.T @ psi)) / nrm2 if nrm2 > 0 else 0.0
        canonical = LGProcessSpec.create(
            beta=np.array([[lam]]),
            alpha=current.alpha,
            psi=np.array([1.0]),
            z0=np.array([current.zeta0]),
        )
        return MinimalRepresentation(canonical, ["constant_rate_canonical"], True)

    for _ in range(model.dim + 1):
        point, basis = affine_support(current, tol)
        if not basis:
            # frozen paths: the density decays at the constant rate alpha
            canonical = LGProcessSpec.create(
                beta=np.array([[0.0]]),
                alpha=current.alpha,
                psi=np.array([1.0]),
                z0=np.array([current.zeta0]),
            )
            steps.append("frozen_state_canonical")
            return MinimalRepresentation(canonical, steps, True)
        if len(basis) < current.dim:
            current = reduce_affine_support(current, np.column_stack(basis), point, tol)
            steps.append(f"affine_support->{current.dim}")
            continue
        if not is_constant_short_rate(current, tol) and term_structure_kernel(current, tol):
            current = reduce_tsk_quotient(current, tol)
            steps.append(f"tsk_quotient->{current.dim}")
            continue
        break
    return MinimalRepresentation(current, steps, False)


# ---------------------------------------------------------------------------
# algebraic equivalence certificates


@dataclass
class EquivalenceCertificate:
    """Affine relation ``Z + p = ratio * e^{(alpha-alpha') t} (q + Q Z')``.

    ``ratio`` is the initial-density quotient ``zeta0 / zeta0'``;
    ``max_residual`` is the largest relative defect of the matched pricing
    identity over the validation grid.
    """

    p: np.ndarray
    q: np.ndarray
    Q: np.ndarray
    alpha_pair: tuple
    zeta0_ratio: float
    max_residual: float


def _g_of_tau(model: LRModelSpec, tau: float) -> float:
    return model.phi + float(model.psi @ numerics.expm_integral(model.beta, model.b, tau))


def _row_of_tau(model: LRModelSpec, tau: float) -> np.ndarray:
    return numerics.expm(model.beta, tau).T @ model.psi


def _pick_taus(model: LRModelSpec, taus: list | None) -> list:
    m = model.dim
    base = list(taus) if taus is not None else [0.5 * i for i in range(m)]
    if len(base) < m:
        base = base + [0.5 * i for i in range(len(base), m)]
    base = base[:m]
    stack = np.vstack([math.exp(-model.alpha * t) * _row_of_tau(model, t) for t in base])
    if np.linalg.cond(stack) <= 1e12:
        return base
    # augment greedily from a wider candidate pool
    chosen = [0.0]
    pool = [0.1 * i for i in range(1, 40 * m)]
    while len(chosen) < m:
        best, best_sv = None, -1.0
        for c in pool:
            if c in chosen:
                continue
            trial = np.vstack(
                [math.exp(-model.alpha * t) * _row_of_tau(model, t) for t in chosen + [c]]
            )
            sv = np.linalg.svd(trial, compute_uv=False)[-1]
            if sv > best_sv:
                best, best_sv = c, sv
        chosen.append(best)
    stack = np.vstack([math.exp(-model.alpha * t) * _row_of_tau(model, t) for t in chosen])
    if np.linalg.cond(stack) > 1e12:
        raise IllConditionedTausError(
            f"maturity stack condition {np.linalg.cond(stack):.2e} exceeds 1e12"
        )
    return chosen


def equivalence_certificate(a: LRModelSpec, b: LRModelSpec, taus=None,
                            tol: float = 1e-9) -> EquivalenceCertificate | None:
    """Solve for the affine relation between two models and verify it.

    ``a`` must have an empty term-structure kernel so the maturity stack is
    invertible.  The candidate ``(p, q, Q)`` is read off the stacked
    matched conditional expectations; the deterministic pricing identity is
    then re-checked on a validation grid of ``4m`` extra maturities, at
    states spanning the second model's affine support (the relation is only
    claimed along the paths, so directions the process never explores are
    not tested).  Returns ``None`` when any relative residual exceeds
    ``tol``.
    """
    if term_structure_kernel(a):
        raise PreconditionError("first model must have an empty term-structure kernel")
    m = a.dim
    chosen = _pick_taus(a, taus)
    S = np.vstack([math.exp(-a.alpha * t) * _row_of_tau(a, t) for t in chosen])
    g = np.array([math.exp(-a.alpha * t) * _g_of_tau(a, t) for t in chosen])
    Sp = np.vstack([math.exp(-b.alpha * t) * _row_of_tau(b, t) for t in chosen])
    gp = np.array([math.exp(-b.alpha * t) * _g_of_tau(b, t) for t in chosen])

    p = np.linalg.solve(S, g)
    q = np.linalg.solve(S, gp)
    Q = np.linalg.solve(S, Sp)
    ratio = a.zeta0 / b.zeta0

    # validation: initial-state anchor, then the identity at fresh maturities
    max_resid = 0.0
    anchor = a.z0 + p - ratio * (q + Q @ b.z0)
    max_resid = max(
        max_resid,
        float(np.linalg.norm(anchor))
        / max(1.0, float(np.linalg.norm(a.z0)), float(np.linalg.norm(Q @ b.z0))),
    )

    tau_hi = max(chosen) if chosen else 0.5
    validation = [tau_hi + 0.25 * (j + 1) for j in range(4 * m)]
    _, dirs_b = affine_support(b)
    states_b = [b.z0] + [b.z0 + d for d in dirs_b]
    t_samples = (0.0, 0.37)
    for tau in validation:
        row_a = math.exp(-a.alpha * tau) * _row_of_tau(a, tau)
        row_b = math.exp(-b.alpha * tau) * _row_of_tau(b, tau)
        g_a = math.exp(-a.alpha * tau) * _g_of_tau(a, tau)
        g_b = math.exp(-b.alpha * tau) * _g_of_tau(b, tau)
        if dirs_b:
            D = np.column_stack(dirs_b)
            coeff = float(np.linalg.norm((row_a @ Q - row_b) @ D)) / max(
                1.0, float(np.linalg.norm(row_a)), float(np.linalg.norm(row_b))
            )
            max_resid = max(max_resid, coeff)
        for t in t_samples:
            growth = math.exp((a.alpha - b.alpha) * t)
            for zb in states_b:
                za = ratio * growth * (q + Q @ zb) - p
                lhs = math.exp(-a.alpha * t) * (g_a + float(row_a @ za)) / a.zeta0
                rhs = growth * math.exp(-a.alpha * t) * (g_b + float(row_b @ zb)) / b.zeta0
                resid = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-12)
                max_resid = max(max_resid, resid)
    if max_resid > tol:
        return None
    return EquivalenceCertificate(p, q, Q, (a.alpha, b.alpha), ratio, max_resid)


# ---------------------------------------------------------------------------
# path-based support estimation


def estimate_linear_support(batch, beta=None, affine: bool = False,
                            tol: float = DEFAULT_TOL, max_rows: int = 4096) -> dict:
    """Numerical rank and spanning basis of sampled factor states.

    With ``beta`` supplied each state is premultiplied by ``e^{-beta t}``
    before stacking; with ``affine`` the first sample is subtracted, so the
    rank measures the affine hull instead of the linear one.
    """
    states = batch.states
    n_paths, n_times, m = states.shape
    if beta is not None:
        beta = as_matrix(beta, "beta")
        weighted = np.empty_like(states)
        for k, t in enumerate(batch.time_grid):
            weighted[:, k, :] = states[:, k, :] @ numerics.expm(beta, -t).T
        states = weighted
    flat = states.reshape(-1, m)
    if affine:
        flat = flat - flat[0]
    if flat.shape[0] > max_rows:
        stride = flat.shape[0] // max_rows + 1
        flat = flat[::stride]
    s = np.linalg.svd(flat, compute_uv=False)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > max(tol, 1e-8) * smax)) if smax > 0 else 0
    _, _, vh = np.linalg.svd(flat, full_matrices=False)
    return {"rank": rank, "basis": [vh[i].copy() for i in range(rank)]}


# ---------------------------------------------------------------------------
# bundled report


@dataclass
class StructureReport:
    """One-shot structural summary of a model.

    ``reducible``/``v``/``lam`` refer to the deterministic-exponential
    collapse of strictly-linear processes and are ``False``/``None`` for
    models with a drift constant or density intercept.
    """

    tsk_basis: list
    constant_short_rate: bool
    proper: bool
    witness_q: np.ndarray | None
    reducible: bool
    v: np.ndarray | None
    lam: float | None
    lin_support_rank: int
    aff_support_rank: int

    def to_dict(self) -> dict:
        return {
            "tsk_basis": [vec.tolist() for vec in self.tsk_basis],
            "constant_short_rate": self.constant_short_rate,
            "proper": self.proper,
            "witness_q": None if self.witness_q is None else self.witness_q.tolist(),
            "reducible": self.reducible,
            "v": None if self.v is None else self.v.tolist(),
            "lambda": self.lam,
            "lin_rank": self.lin_support_rank,
            "aff_rank": self.aff_support_rank,
        }


def structure_report(model: LRModelSpec, tol: float = DEFAULT_TOL) -> StructureReport:
    """Compute kernel, properness, reducibility and support ranks at once."""
    constant = is_constant_short_rate(model, tol)
    tsk = term_structure_kernel(model, tol)
    prop = is_proper(model, tol)
    red = ReducibilityResult(False, None, None)
    if model.is_lg:
        from .models import as_lg

        red = reducibility(as_lg(model), tol)
    _, aff_basis = affine_support(model, tol)
    return StructureReport(
        tsk_basis=tsk,
        constant_short_rate=constant,
        proper=prop.proper,
        witness_q=prop.witness_q,
        reducible=red.reducible,
        v=red.v,
        lam=red.lam,
        lin_support_rank=linear_support_rank(model, tol),
        aff_support_rank=len(aff_basis),
    )
