"""Model specifications and the conversions between the two factor forms.

An ``m``-factor model consists of a factor process with linear drift,
``dZ = (b + beta Z) dt + dM``, and a state price density that is affine in
the factors times an exponential discount, ``zeta_t = exp(-alpha t) (phi +
psi' Z_t)``.  The martingale part is restricted to affine-square-root
diffusions (:class:`DiffusionSpec`), which covers Brownian, square-root and
deterministic dynamics and keeps structural side conditions decidable in
closed form.

The strictly-linear special case ``b = 0, phi = 0`` (:class:`LGProcessSpec`)
is the form whose conditional deflated linear payoffs stay linear in the
factors; :func:`embed_lr_to_lg` and :func:`embed_lr_to_lg_tilted` convert a
general model into that form one dimension higher.

Specs are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .numerics import DEFAULT_TOL, DimensionError, as_matrix, as_vector

STATE_SPACES = ("nonneg_orthant", "whole_space", "custom_halfspace")

__all__ = [
    "DiffusionSpec",
    "LRModelSpec",
    "LGProcessSpec",
    "KappaBlocks",
    "ValidationItem",
    "ValidationReport",
    "validate",
    "embed_lr_to_lg",
    "embed_lr_to_lg_tilted",
    "lg_kappa_blocks",
    "q_drift_coefficients",
    "translate",
    "as_lg",
    "model_to_dict",
    "model_from_dict",
    "model_to_json",
    "model_from_json",
]


@dataclass(frozen=True, eq=False)
class DiffusionSpec:
    """Affine-square-root martingale part.

    ``d`` independent Brownian drivers, driver ``j`` contributing
    ``loadings[j] * sqrt(max(vol_offsets[j] + vol_slopes[j] . Z, 0)) dW_j``.
    A deterministic model is encoded by ``d = 0``.
    """

    num_factors: int
    loadings: np.ndarray  # (d, m)
    vol_offsets: np.ndarray  # (d,)
    vol_slopes: np.ndarray  # (d, m)

    @property
    def num_drivers(self) -> int:
        return self.loadings.shape[0]

    @property
    def is_deterministic(self) -> bool:
        return self.num_drivers == 0

    @classmethod
    def deterministic(cls, m: int) -> "DiffusionSpec":
        return cls(m, np.zeros((0, m)), np.zeros(0), np.zeros((0, m)))

    @classmethod
    def from_arrays(cls, loadings, vol_offsets, vol_slopes) -> "DiffusionSpec":
        L = np.atleast_2d(np.asarray(loadings, dtype=float))
        a = np.asarray(vol_offsets, dtype=float).reshape(-1)
        C = np.atleast_2d(np.asarray(vol_slopes, dtype=float))
        if L.shape[0] == 0:
            return cls.deterministic(L.shape[1] if L.ndim == 2 else 0)
        m = L.shape[1]
        if C.shape != L.shape or a.size != L.shape[0]:
            raise DimensionError("diffusion arrays have inconsistent shapes")
        if not (np.all(np.isfinite(L)) and np.all(np.isfinite(a)) and np.all(np.isfinite(C))):
            raise ValueError("diffusion spec contains non-finite entries")
        return cls(m, L, a, C)


def _finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class LRModelSpec:
    """Linear-drift factor model with affine state price density.

    Attributes
    ----------
    dim : int
        Number of factors ``m``.
    b, beta : drift constant (1/time) and drift matrix (1/time).
    alpha : exponential discount rate of the density.
    phi, psi : density intercept and factor loading.
    z0 : initial state; ``phi + psi . z0`` must be positive.
    diffusion : martingale-part specification.
    state_space : declared support tag, one of ``nonneg_orthant``,
        ``whole_space``, ``custom_halfspace``.
    diffusion_time_exponent : scalar ``g`` such that the martingale
        increments carry an extra factor ``exp(g t)``; nonzero only for
        specs produced by time-rescaling constructions.
    """

    dim: int
    b: np.ndarray
    beta: np.ndarray
    alpha: float
    phi: float
    psi: np.ndarray
    z0: np.ndarray
    diffusion: DiffusionSpec
    state_space: str = "whole_space"
    diffusion_time_exponent: float = 0.0

    def __post_init__(self):
        m = self.dim
        object.__setattr__(self, "b", _finite("b", as_vector(self.b, "b")))
        object.__setattr__(self, "beta", as_matrix(self.beta, "beta"))
        object.__setattr__(self, "psi", as_vector(self.psi, "psi"))
        object.__setattr__(self, "z0", as_vector(self.z0, "z0"))
        if self.beta.shape != (m, m) or self.b.size != m or self.psi.size != m or self.z0.size != m:
            raise DimensionError("model arrays are inconsistent with dim")
        if self.state_space not in STATE_SPACES:
            raise ValueError(f"unknown state space tag {self.state_space!r}")
        if self.diffusion.loadings.shape[1] != m:
            raise DimensionError("diffusion loadings do not match dim")
        if not np.isfinite(self.alpha) or not np.isfinite(self.phi):
            raise ValueError("alpha/phi must be finite")
        if self.phi == 0.0 and not np.any(self.psi):
            raise ValueError("phi and psi cannot both vanish")
        if self.density_at(self.z0) <= 0.0:
            raise ValueError("initial state price density phi + psi.z0 must be positive")

    def density_at(self, state) -> float:
        return float(self.phi + self.psi @ as_vector(state, "state"))

    @property
    def zeta0(self) -> float:
        return self.density_at(self.z0)

    @property
    def is_lg(self) -> bool:
        return self.phi == 0.0 and not np.any(self.b)


@dataclass(frozen=True, eq=False)
class LGProcessSpec(LRModelSpec):
    """Strictly-linear-drift model: ``b = 0`` and ``phi = 0`` exactly."""

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.b) or self.phi != 0.0:
            raise ValueError("an LG process requires b = 0 and phi = 0 exactly")

    @classmethod
    def create(cls, beta, alpha, psi, z0, diffusion=None, state_space="whole_space",
               diffusion_time_exponent=0.0) -> "LGProcessSpec":
        beta = as_matrix(beta, "beta")
        m = beta.shape[0]
        return cls(
            dim=m,
            b=np.zeros(m),
            beta=beta,
            alpha=float(alpha),
            phi=0.0,
            psi=psi,
            z0=z0,
            diffusion=diffusion if diffusion is not None else DiffusionSpec.deterministic(m),
            state_space=state_space,
            diffusion_time_exponent=diffusion_time_exponent,
        )


def lr_model(b, beta, alpha, phi, psi, z0, diffusion=None, state_space="whole_space",
             diffusion_time_exponent=0.0) -> LRModelSpec:
    """Convenience constructor accepting plain lists/scalars."""
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    m = beta.shape[0]
    return LRModelSpec(
        dim=m,
        b=b,
        beta=beta,
        alpha=float(alpha),
        phi=float(phi),
        psi=psi,
        z0=z0,
        diffusion=diffusion if diffusion is not None else DiffusionSpec.deterministic(m),
        state_space=state_space,
        diffusion_time_exponent=diffusion_time_exponent,
    )


def as_lg(model: LRModelSpec) -> LGProcessSpec:
    """Reinterpret a model with ``b = 0, phi = 0`` as an LG process."""
    if isinstance(model, LGProcessSpec):
        return model
    if not model.is_lg:
        raise ValueError("model has b != 0 or phi != 0; embed it first")
    return LGProcessSpec(**_fields(model))


def _fields(model: LRModelSpec) -> dict:
    return {
        "dim": model.dim,
        "b": model.b,
        "beta": model.beta,
        "alpha": model.alpha,
        "phi": model.phi,
        "psi": model.psi,
        "z0": model.z0,
        "diffusion": model.diffusion,
        "state_space": model.state_space,
        "diffusion_time_exponent": model.diffusion_time_exponent,
    }


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationItem:
    level: str  # "pass" | "warn" | "fail"
    code: str
    message: str


@dataclass
class ValidationReport:
    items: list

    @property
    def passed(self) -> bool:
        return not any(it.level == "fail" for it in self.items)

    @property
    def warnings(self) -> list:
        return [it for it in self.items if it.level == "warn"]

    def lines(self) -> list:
        return [f"{it.level.upper():4s} {it.code}: {it.message}" for it in self.items]


def validate(model: LRModelSpec) -> ValidationReport:
    """Check a spec for density positivity and state-space compatibility.

    Failures mark structurally impossible specs (degenerate density,
    sign-incompatible density coefficients for the declared orthant).
    Orthant drift conditions are heuristic and reported at warning level
    only.
    """
    items = []

    if model.phi == 0.0 and not np.any(model.psi):
        items.append(ValidationItem("fail", "degenerate_density", "phi and psi are both zero"))
    if model.zeta0 <= 0.0:
        items.append(ValidationItem("fail", "nonpositive_density",
                                    f"phi + psi.z0 = {model.zeta0:g} is not positive"))
    if not np.any(model.psi):
        items.append(ValidationItem("warn", "constant_rate",
                                    "psi = 0 forces a constant short rate equal to alpha"))

    if model.state_space == "nonneg_orthant":
        if np.any(model.psi < 0):
            items.append(ValidationItem("fail", "psi_sign",
                                        "psi must be componentwise nonnegative on the orthant"))
        if model.phi < 0:
            items.append(ValidationItem("fail", "phi_sign",
                                        "negative phi cannot keep the density positive on the orthant"))
        elif model.phi == 0.0 and np.any(model.psi):
            items.append(ValidationItem("warn", "phi_zero",
                                        "phi = 0: the density vanishes where psi.Z does"))
        if np.any(model.z0 < 0):
            items.append(ValidationItem("fail", "z0_outside",
                                        "initial state has negative components"))
        if np.any(model.b < 0):
            items.append(ValidationItem("warn", "drift_constant",
                                        "b has negative components; inward drift at the boundary is not guaranteed"))
        off = model.beta - np.diag(np.diag(model.beta))
        if np.any(off < 0):
            items.append(ValidationItem("warn", "drift_matrix",
                                        "beta has negative off-diagonal entries; the orthant may not be invariant"))

    if not items:
        items.append(ValidationItem("pass", "ok", "no findings"))
    elif all(it.level != "fail" for it in items):
        items.append(ValidationItem("pass", "ok", "no failures"))
    return ValidationReport(items)


# ---------------------------------------------------------------------------
# embeddings and block algebra


def _lift_diffusion(diff: DiffusionSpec) -> DiffusionSpec:
    # zero loading and zero slope on the prepended constant coordinate
    d, m = diff.loadings.shape
    L = np.hstack([np.zeros((d, 1)), diff.loadings])
    C = np.hstack([np.zeros((d, 1)), diff.vol_slopes])
    return DiffusionSpec(m + 1, L, diff.vol_offsets.copy(), C)


def _stacked_drift(model: LRModelSpec) -> np.ndarray:
    m = model.dim
    out = np.zeros((m + 1, m + 1))
    out[1:, 0] = model.b
    out[1:, 1:] = model.beta
    return out


def embed_lr_to_lg(model: LRModelSpec) -> LGProcessSpec:
    """Represent an ``m``-factor model as an ``(m+1)``-dim LG process.

    The lifted state is ``(1; Z_t)`` with drift matrix ``[[0, 0], [b, beta]]``
    and density loading ``(phi; psi)``; the first coordinate has zero drift
    and zero volatility, so every simulated path keeps it equal to one and
    bond prices coincide with the source model's.
    """
    return LGProcessSpec.create(
        beta=_stacked_drift(model),
        alpha=model.alpha,
        psi=np.concatenate([[model.phi], model.psi]),
        z0=np.concatenate([[1.0], model.z0]),
        diffusion=_lift_diffusion(model.diffusion),
        state_space=model.state_space if model.state_space == "nonneg_orthant" else "whole_space",
        diffusion_time_exponent=model.diffusion_time_exponent,
    )


def embed_lr_to_lg_tilted(model: LRModelSpec, alpha_prime: float) -> LGProcessSpec:
    """Exponentially tilted ``(m+1)``-dim LG representation.

    The lifted state carries the factor ``exp((alpha - alpha') t)``, so the
    drift matrix is ``(alpha - alpha') I + [[0, 0], [b, beta]]`` and the
    discount exponent becomes ``alpha'``.  The same factor scales the
    martingale part and is recorded in ``diffusion_time_exponent``.  With
    ``alpha' != alpha`` the lifted process escapes the affine hyperplane
    ``{1} x R^m`` and can have full affine support.
    """
    g = model.alpha - float(alpha_prime)
    base = embed_lr_to_lg(model)
    return LGProcessSpec.create(
        beta=g * np.eye(model.dim + 1) + base.beta,
        alpha=float(alpha_prime),
        psi=base.psi,
        z0=base.z0,
        diffusion=base.diffusion,
        state_space=base.state_space,
        diffusion_time_exponent=model.diffusion_time_exponent + g,
    )


def translate(model: LRModelSpec, q) -> LRModelSpec:
    """Shift the factor process to ``Z - q`` without changing the density.

    The shifted model has drift constant ``b + beta q`` and density
    intercept ``phi + psi . q``; with ``phi + psi . q = 0`` this turns a
    non-proper model into an LG process on the same factors.
    """
    q = as_vector(q, "q")
    if q.size != model.dim:
        raise DimensionError("q has the wrong length")
    diff = model.diffusion
    new_diff = DiffusionSpec(
        model.dim,
        diff.loadings.copy(),
        diff.vol_offsets + diff.vol_slopes @ q,
        diff.vol_slopes.copy(),
    )
    new_phi = model.phi + float(model.psi @ q)
    spec_cls = LRModelSpec
    if new_phi == 0.0 and not np.any(model.b + model.beta @ q):
        spec_cls = LGProcessSpec
    return spec_cls(
        dim=model.dim,
        b=model.b + model.beta @ q,
        beta=model.beta.copy(),
        alpha=model.alpha,
        phi=new_phi,
        psi=model.psi.copy(),
        z0=model.z0 - q,
        diffusion=new_diff,
        state_space="whole_space" if np.any(q) else model.state_space,
        diffusion_time_exponent=model.diffusion_time_exponent,
    )


@dataclass(frozen=True, eq=False)
class KappaBlocks:
    """Generator of the deflated moment system with its named blocks.

    ``kappa`` is the ``(n+1) x (n+1)`` matrix whose exponential propagates
    conditional deflated moments; ``A`` (scalar), ``B`` (row), ``C``
    (column), ``D`` (matrix) are its blocks.  The short rate at ratio state
    ``x`` is ``-A - B x``.
    """

    kappa: np.ndarray
    A: float
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def short_rate(self, x) -> float:
        return float(-self.A - self.B @ as_vector(x, "x"))

    def reassemble_beta(self, q_basis, alpha: float) -> np.ndarray:
        Q = as_matrix(q_basis, "q_basis")
        return alpha * np.eye(Q.shape[0]) + Q @ self.kappa @ np.linalg.inv(Q)


def lg_kappa_blocks(lg: LGProcessSpec, q_basis, alpha: float) -> KappaBlocks:
    """Recover ``kappa = Q^{-1} (beta - alpha I) Q`` and its blocks.

    ``q_basis`` is the invertible change of basis relating the LG factors to
    the deflated moment coordinates; choosing it so that the first row of
    its inverse equals ``psi`` makes the block identities (short rate,
    risk-neutral drift) hold literally.
    """
    Q = as_matrix(q_basis, "q_basis")
    n1 = lg.dim
    if Q.shape != (n1, n1):
        raise DimensionError("q_basis must be square with the LG dimension")
    try:
        kappa = np.linalg.solve(Q, (lg.beta - alpha * np.eye(n1)) @ Q)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"q_basis is singular: {exc}")
    return KappaBlocks(
        kappa=kappa,
        A=float(kappa[0, 0]),
        B=kappa[0, 1:].copy(),
        C=kappa[1:, 0].copy(),
        D=kappa[1:, 1:].copy(),
    )


def q_drift_coefficients(blocks: KappaBlocks) -> dict:
    """Coefficients of the quadratic risk-neutral drift of the ratio state.

    Returns ``constant``, ``linear`` and ``quadratic_row`` such that
    ``mu(x) = constant + linear x + (quadratic_row . x) x``; equal to
    ``C + (D - A) x - (B x) x``.  Diagnostic quantity only.
    """
    n = blocks.C.size
    return {
        "constant": blocks.C.copy(),
        "linear": blocks.D - blocks.A * np.eye(n),
        "quadratic_row": -blocks.B.copy(),
    }


# ---------------------------------------------------------------------------
# JSON serialization (schema: dim, b, beta row-major, alpha, phi, psi, z0,
# diffusion {loadings, vol_offsets, vol_slopes}, state_space)


def model_to_dict(model: LRModelSpec) -> dict:
    doc = {
        "dim": model.dim,
        "b": model.b.tolist(),
        "beta": [float(x) for x in model.beta.reshape(-1)],
        "alpha": model.alpha,
        "phi": model.phi,
        "psi": model.psi.tolist(),
        "z0": model.z0.tolist(),
        "diffusion": {
            "loadings": [row.tolist() for row in model.diffusion.loadings],
            "vol_offsets": model.diffusion.vol_offsets.tolist(),
            "vol_slopes": [row.tolist() for row in model.diffusion.vol_slopes],
        },
        "state_space": model.state_space,
    }
    if model.diffusion_time_exponent != 0.0:
        doc["diffusion_time_exponent"] = model.diffusion_time_exponent
    return doc


def model_from_dict(doc: dict) -> LRModelSpec:
    try:
        m = int(doc["dim"])
        diff_doc = doc.get("diffusion", {})
        loadings = np.asarray(diff_doc.get("loadings", []), dtype=float).reshape(-1, m)
        offsets = np.asarray(diff_doc.get("vol_offsets", []), dtype=float)
        slopes = np.asarray(diff_doc.get("vol_slopes", []), dtype=float).reshape(-1, m)
        diff = DiffusionSpec(m, loadings, offsets, slopes)
        if loadings.shape != slopes.shape or offsets.size != loadings.shape[0]:
            raise DimensionError("diffusion arrays have inconsistent shapes")
        beta = np.asarray(doc["beta"], dtype=float).reshape(m, m)
        kwargs = dict(
            dim=m,
            b=np.asarray(doc["b"], dtype=float),
            beta=beta,
            alpha=float(doc["alpha"]),
            phi=float(doc["phi"]),
            psi=np.asarray(doc["psi"], dtype=float),
            z0=np.asarray(doc["z0"], dtype=float),
            diffusion=diff,
            state_space=doc.get("state_space", "whole_space"),
            diffusion_time_exponent=float(doc.get("diffusion_time_exponent", 0.0)),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model document: {exc}")
    spec = LRModelSpec(**kwargs)
    if spec.is_lg:
        return LGProcessSpec(**kwargs)
    return spec


def model_to_json(model: LRModelSpec, indent: int = 2) -> str:
    # json round-trips binary64 exactly through repr
    return json.dumps(model_to_dict(model), indent=indent)


def model_from_json(text: str) -> LRModelSpec:
    return model_from_dict(json.loads(text))
