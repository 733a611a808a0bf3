"""Closed-form zero-coupon bond prices, yields and long-horizon limits.

For a model ``dZ = (b + beta Z) dt + dM``, ``zeta_t = exp(-alpha t)(phi +
psi.Z_t)`` the time-``t`` price of the bond maturing at ``T`` is

    P(t,T) = exp(-alpha tau) * (phi + psi.J(tau) + psi.exp(beta tau) Z_t)
             / (phi + psi.Z_t),        tau = T - t,

with ``J(tau) = int_0^tau exp(beta s) b ds``.  Prices depend on ``(t, T)``
only through ``tau`` and satisfy ``P(t,t) = 1`` exactly.

Long horizons are evaluated in log space: the affine numerator is expanded
over the spectrum of ``beta`` when the eigenbasis is usable (terms grouped
by dominant real part and combined with a signed log-sum-exp), with a
fallback to repeated squaring of ``exp(beta)`` under running log
normalization when ``beta`` is defective.  This keeps ``log P(t,T)``
accurate out to ``tau`` of order 1e7 and beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .models import LRModelSpec
from .numerics import DEFAULT_TOL, as_vector

__all__ = [
    "InvalidStateError",
    "UnsupportedStateSpaceError",
    "YieldCurve",
    "AlphaStarReport",
    "LongTermYield",
    "bond_price",
    "log_bond_price",
    "short_rate",
    "yield_curve",
    "alpha_star",
    "long_term_yield_analytic",
    "long_term_yield_numeric",
]

_DIRECT_LIMIT = 250.0  # spectral-radius * tau beyond which log-space evaluation kicks in


class InvalidStateError(ValueError):
    """State price density is nonpositive at the supplied state."""


class UnsupportedStateSpaceError(ValueError):
    """Operation requires a different declared state space."""


# ---------------------------------------------------------------------------
# affine numerator phi + psi.J(tau) + psi.exp(beta tau) z, in log space


def _signed_logsumexp(logs, signs):
    logs = np.asarray(logs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    finite = logs > -np.inf
    if not np.any(finite):
        return -np.inf, 0.0
    m = float(np.max(logs[finite]))
    s = float(np.sum(signs[finite] * np.exp(logs[finite] - m)))
    if s == 0.0:
        return -np.inf, 0.0
    return m + math.log(abs(s)), math.copysign(1.0, s)


def _log_term(val: float, rate: float, tau: float):
    """``(log|val| + rate*tau, sign(val))`` for one term ``val * e^{rate tau}``."""
    if val == 0.0:
        return -np.inf, 0.0
    return rate * tau + math.log(abs(val)), math.copysign(1.0, val)


def _spectral_terms(model: LRModelSpec, state: np.ndarray, tau: float, tol: float):
    """Term list (log, sign) for the affine numerator via the eigenbasis.

    Conjugate eigenvalue pairs are folded into single real terms
    ``2 Re(c e^{i Im(lam) tau}) e^{Re(lam) tau}``.  Returns None when the
    eigenbasis is unusable (defective or badly conditioned).
    """
    dec = numerics.eig(model.beta, tol)
    if dec.defective:
        return None
    R = np.column_stack(dec.right_eigenvectors)
    if np.linalg.cond(R) > 1e8:
        return None
    lam = dec.eigenvalues
    psiR = model.psi.astype(complex) @ R
    Rinv = np.linalg.inv(R)
    cz = psiR * (Rinv @ state.astype(complex))
    cb = psiR * (Rinv @ model.b.astype(complex))

    terms = []
    if model.phi != 0.0:
        terms.append((math.log(abs(model.phi)), math.copysign(1.0, model.phi)))
    seen = set()
    for k in range(lam.size):
        if k in seen:
            continue
        lk = lam[k]
        is_pair = abs(lk.imag) > tol * (1.0 + abs(lk))
        if is_pair:
            partner = None
            for j in range(k + 1, lam.size):
                if j not in seen and abs(lam[j] - lk.conjugate()) <= 1e-8 * (1.0 + abs(lk)):
                    partner = j
                    break
            if partner is None:
                return None
            seen.add(partner)
        phase = complex(math.cos(lk.imag * tau), math.sin(lk.imag * tau))

        def fold(c: complex, with_phase: bool) -> float:
            # a real eigenvalue contributes Re(c); a conjugate pair 2 Re(c e^{i Im tau})
            if not is_pair:
                return c.real
            return 2.0 * (c * (phase if with_phase else 1.0)).real

        terms.append(_log_term(fold(cz[k], True), lk.real, tau))
        # drift integral: c (e^{lam tau} - 1)/lam splits into two exponentials
        if cb[k] != 0:
            if abs(lk) * tau < 1e-6:
                series = tau * (1.0 + lk * tau / 2.0 + (lk * tau) ** 2 / 6.0)
                terms.append(_log_term(fold(cb[k] * series, False), 0.0, tau))
            else:
                terms.append(_log_term(fold(cb[k] / lk, True), lk.real, tau))
                terms.append(_log_term(fold(-cb[k] / lk, False), 0.0, tau))
    return terms


def _expm_scaled(M: np.ndarray, tau: float):
    """``(F, logscale)`` with ``exp(M tau) = F * exp(logscale)``, ||F|| ~ 1."""
    norm = np.linalg.norm(M * tau, 1)
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-300) / 1.0))))
    F = numerics.expm(M, tau / 2.0**squarings)
    logscale = 0.0
    for _ in range(squarings):
        F = F @ F
        c = np.max(np.abs(F))
        if c == 0.0 or not np.isfinite(c):
            raise FloatingPointError("matrix power degenerated during log-normalized squaring")
        F /= c
        logscale += math.log(c)
    return F, logscale


def _squaring_terms(model: LRModelSpec, state: np.ndarray, tau: float):
    """Fallback term list using log-normalized squaring of the augmented drift."""
    m = model.dim
    aug = np.zeros((m + 1, m + 1))
    aug[:m, :m] = model.beta
    aug[:m, m] = model.b
    F, logscale = _expm_scaled(aug, tau)
    val = float(model.psi @ (F[:m, m] + F[:m, :m] @ state))
    terms = []
    if model.phi != 0.0:
        terms.append((math.log(abs(model.phi)), math.copysign(1.0, model.phi)))
    if val != 0.0:
        terms.append((logscale + math.log(abs(val)), math.copysign(1.0, val)))
    return terms


def _log_linear_form(model: LRModelSpec, state: np.ndarray, tau: float, tol: float):
    """``(log|n|, sign)`` for ``n = phi + psi.J(tau) + psi.exp(beta tau) state``."""
    radius = float(np.max(np.abs(np.linalg.eigvals(model.beta)))) if model.dim else 0.0
    if radius * tau <= _DIRECT_LIMIT:
        E = numerics.expm(model.beta, tau)
        J = numerics.expm_integral(model.beta, model.b, tau)
        val = float(model.phi + model.psi @ (J + E @ state))
        if val == 0.0:
            return -np.inf, 0.0
        return math.log(abs(val)), math.copysign(1.0, val)
    terms = _spectral_terms(model, state, tau, tol)
    if terms is None:
        terms = _squaring_terms(model, state, tau)
    return _signed_logsumexp([t[0] for t in terms], [t[1] for t in terms])


# ---------------------------------------------------------------------------
# prices, rates and curves


def log_bond_price(model: LRModelSpec, state, t: float, T: float,
                   tol: float = DEFAULT_TOL) -> float:
    """``log P(t,T)``, overflow-safe for very long maturities."""
    if T < t:
        raise ValueError("maturity precedes the valuation time")
    z = as_vector(state, "state")
    denom = model.density_at(z)
    if denom <= 0.0:
        raise InvalidStateError(f"phi + psi.state = {denom:g} is not positive")
    tau = float(T - t)
    if tau == 0.0:
        return 0.0
    lognum, sign = _log_linear_form(model, z, tau, tol)
    if sign <= 0.0:
        raise InvalidStateError("conditional density is nonpositive at this horizon")
    return -model.alpha * tau + lognum - math.log(denom)


def bond_price(model: LRModelSpec, state, t: float, T: float,
               tol: float = DEFAULT_TOL) -> float:
    """Zero-coupon bond price ``P(t,T)``; equals 1 exactly at ``T = t``."""
    z = as_vector(state, "state")
    denom = model.density_at(z)
    if denom <= 0.0:
        raise InvalidStateError(f"phi + psi.state = {denom:g} is not positive")
    tau = float(T - t)
    if T < t:
        raise ValueError("maturity precedes the valuation time")
    radius = float(np.max(np.abs(np.linalg.eigvals(model.beta))))
    if radius * tau <= _DIRECT_LIMIT:
        E = numerics.expm(model.beta, tau)
        J = numerics.expm_integral(model.beta, model.b, tau)
        numer = float(model.phi + model.psi @ (J + E @ z))
        if numer <= 0.0:
            raise InvalidStateError("conditional density is nonpositive at this horizon")
        return math.exp(-model.alpha * tau) * numer / denom
    return math.exp(log_bond_price(model, z, t, T, tol))


def short_rate(model: LRModelSpec, state) -> float:
    """Instantaneous rate ``alpha - psi.(b + beta z) / (phi + psi.z)``."""
    z = as_vector(state, "state")
    denom = model.density_at(z)
    if denom <= 0.0:
        raise InvalidStateError(f"phi + psi.state = {denom:g} is not positive")
    return model.alpha - float(model.psi @ (model.b + model.beta @ z)) / denom


@dataclass
class YieldCurve:
    """Discount factors and continuously compounded yields on a tenor grid.

    ``yields[i]`` is ``-log P(t, T_i) / (T_i - t)`` and is ``None`` at a
    zero tenor (the defined limit there is the short rate).
    """

    t: float
    maturities: list
    discount_factors: list
    yields: list

    def rows(self):
        return list(zip(self.maturities, self.discount_factors, self.yields))


def yield_curve(model: LRModelSpec, state, t: float, maturities) -> YieldCurve:
    """Batched bond prices along a maturity list (order-independent)."""
    mats = [float(T) for T in maturities]
    discounts, ylds = [], []
    for T in mats:
        logp = log_bond_price(model, state, t, T)
        discounts.append(math.exp(logp))
        ylds.append(None if T == t else -logp / (T - t))
    return YieldCurve(t=float(t), maturities=mats, discount_factors=discounts, yields=ylds)


# ---------------------------------------------------------------------------
# nonnegative-rate bound alpha*


@dataclass
class AlphaStarReport:
    """Supremum of the rate spread ``psi.(b + beta z)/(phi + psi.z)``.

    ``finite`` mirrors the sufficient column-sign condition: when every
    column of ``beta`` indexed outside the support of ``psi`` satisfies
    ``psi.beta_i <= 0`` the supremum over the nonnegative orthant is the
    finite max recorded in ``alpha_star``; otherwise the report abstains.
    ``binding_index`` names the attaining term (``"b"`` or ``"beta[i]"``).
    """

    finite: bool
    alpha_star: float | None
    binding_index: str | None
    condition_holds: bool


def alpha_star(model: LRModelSpec, tol: float = DEFAULT_TOL) -> AlphaStarReport:
    """Smallest discount exponent giving nonnegative rates on the orthant.

    Requires the ``nonneg_orthant`` state space, ``psi >= 0`` and
    ``phi > 0``.  With the discount set to the returned value the short
    rate is nonnegative everywhere on the orthant.
    """
    if model.state_space != "nonneg_orthant":
        raise UnsupportedStateSpaceError("alpha_star is defined on the nonnegative orthant")
    if model.phi <= 0.0:
        raise UnsupportedStateSpaceError("alpha_star requires a positive density intercept phi")
    if np.any(model.psi < 0):
        raise UnsupportedStateSpaceError("alpha_star requires componentwise nonnegative psi")

    support = model.psi > 0.0
    col_products = model.beta.T @ model.psi  # psi . beta_i per column i
    scale = max(1.0, float(np.linalg.norm(model.psi) * np.linalg.norm(model.beta)))
    condition = bool(np.all(col_products[~support] <= tol * scale))
    if not condition:
        return AlphaStarReport(False, None, None, False)

    candidates = [(float(model.psi @ model.b) / model.phi, "b")]
    for i in np.flatnonzero(support):
        candidates.append((float(col_products[i] / model.psi[i]), f"beta[{i}]"))
    value, binding = max(candidates, key=lambda c: c[0])
    return AlphaStarReport(True, value, binding, True)


# ---------------------------------------------------------------------------
# long-term yield


@dataclass
class LongTermYield:
    """Analytic long-maturity yield limit, when a criterion certifies one."""

    value: float | None
    rationale: str  # "stable_proper" | "reducible_certificate" | "undetermined"


def long_term_yield_analytic(model: LRModelSpec, tol: float = DEFAULT_TOL) -> LongTermYield:
    """Constant long-term yield when one of two structural criteria applies.

    * proper model whose drift matrix has only eigenvalues with negative
      real part: the yield is ``alpha`` and the reference measure is the
      long forward measure;
    * a strictly-linear (or lifted) process with a deterministic-exponential
      direction ``v`` at the dominant real eigenvalue ``lambda``: the yield
      is ``alpha - lambda``.

    Anything else returns ``undetermined`` (the limit may genuinely not
    exist, e.g. with undamped oscillatory factor components).
    """
    from . import structure  # deferred import: structure builds on pricing

    eigvals = np.linalg.eigvals(model.beta)
    proper = structure.is_proper(model, tol).proper
    if proper and np.all(eigvals.real < -tol):
        return LongTermYield(model.alpha, "stable_proper")

    lg = model if model.is_lg else None
    if lg is None:
        from .models import as_lg, embed_lr_to_lg

        lg = embed_lr_to_lg(model)
    else:
        from .models import as_lg

        lg = as_lg(lg)
    red = structure.reducibility(lg, tol)
    if red.reducible:
        lam = red.lam
        lg_eigs = np.linalg.eigvals(lg.beta)
        # reject when complex components tie or dominate the certificate rate:
        # they oscillate at the leading order and destroy the limit
        blockers = [
            mu for mu in lg_eigs
            if mu.real >= lam - tol * (1.0 + abs(lam)) and abs(mu.imag) > tol * (1.0 + abs(mu))
        ]
        if not blockers:
            return LongTermYield(lg.alpha - lam, "reducible_certificate")
    return LongTermYield(None, "undetermined")


def long_term_yield_numeric(model: LRModelSpec, state, t: float, horizons) -> list:
    """Average yields ``-log P(t,T)/(T-t)`` along increasing horizons.

    No limit is asserted; the caller inspects the sequence.  Values stay
    finite far beyond the overflow range of the plain price formula.
    """
    hs = [float(T) for T in horizons]
    if any(T <= t for T in hs) or any(nxt <= prev for prev, nxt in zip(hs, hs[1:])):
        raise ValueError("horizons must be strictly increasing and exceed t")
    return [-log_bond_price(model, state, t, T) / (T - t) for T in hs]
