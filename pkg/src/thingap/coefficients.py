"""Coefficient fields of the elliptic system and their sampled validation.

A system with m unknowns in n dimensions is described by four fields
evaluated pointwise:

    A(x) : (n, n, m, m)   leading part, indexed [alpha, beta, i, j]
    B(x) : (n, m, m)      lower order inside the divergence, [alpha, i, j]
    C(x) : (n, m, m)      first order outside the divergence, [beta, i, j]
    D(x) : (m, m)         zeroth order, [i, j]

The leading part must satisfy the Legendre (strong ellipticity) condition

    sum A[a,b,i,j] xi_a xi_b eta_i eta_j >= lam |xi|^2 |eta|^2,

which holds in particular for the isotropic elasticity tensor.  Validation
is by sampling: it can falsify a claimed constant, not prove it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class EllipticityError(ValueError):
    """Raised when a sampled quadratic form fails to be positive."""


@dataclass(frozen=True)
class LameParameters:
    """Isotropic elasticity constants with the usual positivity requirements."""

    lambda1: float
    mu1: float

    def __post_init__(self):
        if self.mu1 <= 0 or self.lambda1 + self.mu1 <= 0:
            raise EllipticityError(
                f"need mu1 > 0 and lambda1 + mu1 > 0, got ({self.lambda1}, {self.mu1})")


def lame_tensor(p: LameParameters, n: int) -> np.ndarray:
    """Rank-4 isotropic elasticity tensor.

    ``T[i,j,k,l] = lambda1 d_ij d_kl + mu1 (d_ik d_jl + d_il d_jk)`` with the
    full major and minor symmetries.
    """
    d = np.eye(n)
    T = (p.lambda1 * np.einsum("ij,kl->ijkl", d, d)
         + p.mu1 * (np.einsum("ik,jl->ijkl", d, d) + np.einsum("il,jk->ijkl", d, d)))
    return T


@dataclass
class CoefficientSet:
    """Bundle of the four coefficient fields with claimed bounds.

    ``A``, ``B``, ``Cc`` and ``D`` are rules mapping a point (array of shape
    (n,)) to arrays of the shapes listed in the module docstring.  Constant
    fields should set ``constant=True`` so that assembly and checks can
    evaluate once.  ``lam`` is the claimed ellipticity constant, ``Lam`` the
    claimed sup bound on A entries, ``kappa3`` the claimed Holder-norm bound
    of all fields, and ``gamma`` the Holder exponent.
    """

    m: int
    n: int
    A: Callable[[np.ndarray], np.ndarray]
    B: Callable[[np.ndarray], np.ndarray]
    Cc: Callable[[np.ndarray], np.ndarray]
    D: Callable[[np.ndarray], np.ndarray]
    lam: float
    Lam: float
    kappa3: float
    gamma: float = 0.5
    constant: bool = False
    name: str = "custom"

    def eval_A_many(self, X: np.ndarray) -> np.ndarray:
        """A at each row of X, shape (k, n, n, m, m)."""
        X = np.asarray(X, dtype=float)
        if self.constant:
            return np.broadcast_to(self.A(X[0]), (X.shape[0], self.n, self.n, self.m, self.m))
        return np.stack([np.asarray(self.A(x), dtype=float) for x in X])

    def eval_B_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.constant:
            return np.broadcast_to(self.B(X[0]), (X.shape[0], self.n, self.m, self.m))
        return np.stack([np.asarray(self.B(x), dtype=float) for x in X])

    def eval_C_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.constant:
            return np.broadcast_to(self.Cc(X[0]), (X.shape[0], self.n, self.m, self.m))
        return np.stack([np.asarray(self.Cc(x), dtype=float) for x in X])

    def eval_D_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.constant:
            return np.broadcast_to(self.D(X[0]), (X.shape[0], self.m, self.m))
        return np.stack([np.asarray(self.D(x), dtype=float) for x in X])

    def is_zero_lower_order(self) -> bool:
        """True when B, C, D vanish at the origin sample (cheap structural hint)."""
        x0 = np.zeros(self.n)
        return (not np.any(self.B(x0))) and (not np.any(self.Cc(x0))) and (not np.any(self.D(x0)))


def _zero_b(n, m):
    z = np.zeros((n, m, m))
    return lambda x: z


def _zero_d(m):
    z = np.zeros((m, m))
    return lambda x: z


def identity_coefficients(m: int = 1, n: int = 2) -> CoefficientSet:
    """Decoupled Laplace blocks: ``A[a,b,i,j] = d_ab d_ij``, no lower order."""
    A0 = np.einsum("ab,ij->abij", np.eye(n), np.eye(m))
    return CoefficientSet(m=m, n=n, A=lambda x: A0, B=_zero_b(n, m),
                          Cc=_zero_b(n, m), D=_zero_d(m),
                          lam=1.0, Lam=1.0, kappa3=float(m * n), gamma=0.5,
                          constant=True, name="identity")


def lame_as_general(p: LameParameters, n: int) -> CoefficientSet:
    """Isotropic elasticity written in the general-system form.

    The leading field is ``A[alpha,beta,i,j] = T[i,alpha,j,beta]`` with T the
    elasticity tensor; B, C, D vanish.  On rank-one directions the quadratic
    form equals ``mu1 |xi|^2 |eta|^2 + (lambda1+mu1) (xi.eta)^2``, so the
    ellipticity constant is ``mu1``.
    """
    T = lame_tensor(p, n)
    A0 = np.ascontiguousarray(np.transpose(T, (1, 3, 0, 2)))  # [alpha,beta,i,j] = T[i,alpha,j,beta]
    Lam = float(np.max(np.abs(A0)))
    return CoefficientSet(m=n, n=n, A=lambda x: A0, B=_zero_b(n, n),
                          Cc=_zero_b(n, n), D=_zero_d(n),
                          lam=p.mu1, Lam=Lam, kappa3=Lam, gamma=0.5,
                          constant=True, name=f"lame({p.lambda1},{p.mu1})")


def holder_demo_coefficients(gamma: float, m: int = 1, n: int = 2) -> CoefficientSet:
    """Variable-coefficient demo field ``A = (1 + |x|^gamma / 2) I``.

    Not a physical model: a minimal non-smooth field exercising the
    Holder-norm checks and variable-coefficient assembly.
    """
    eye = np.einsum("ab,ij->abij", np.eye(n), np.eye(m))

    def A(x):
        return (1.0 + 0.5 * float(np.linalg.norm(x)) ** gamma) * eye

    # sup of the scalar factor on the unit region is 1.5; quotient of |x|^gamma is 1
    return CoefficientSet(m=m, n=n, A=A, B=_zero_b(n, m), Cc=_zero_b(n, m), D=_zero_d(m),
                          lam=1.0, Lam=1.5, kappa3=2.0 + float(m * n), gamma=gamma,
                          constant=False, name="holder_demo")


@dataclass(frozen=True)
class EllipticityMeasurement:
    """Sampled minimum of the rank-one quadratic form, with near-tie count."""

    value: float
    near_ties: int
    argmin_x: np.ndarray
    argmin_xi: np.ndarray
    argmin_eta: np.ndarray

    def __float__(self):
        return self.value


def _unit_directions(k: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """k quasi-random unit vectors in R^d plus the coordinate axes."""
    v = rng.normal(size=(k, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.concatenate([np.eye(d), -np.eye(d), v])


def check_ellipticity(cs: CoefficientSet, samples: int = 10_000,
                      points: Optional[np.ndarray] = None, seed: int = 0,
                      tol: float = 1e-9) -> EllipticityMeasurement:
    """Sampled ellipticity constant of the leading field.

    Minimizes ``sum A[a,b,i,j] xi_a xi_b eta_i eta_j`` over sampled points
    and unit directions (random plus coordinate axes).  Raises
    :class:`EllipticityError` when the sampled minimum is not positive, and
    when it undercuts the claimed constant by more than ``tol``.  Ties within
    1e-9 of the minimum are counted, not broken.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    if points is None:
        points = np.zeros((1, cs.n)) if cs.constant else rng.uniform(-1, 1, size=(64, cs.n))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    ndir = max(8, int(np.sqrt(samples)))
    xis = _unit_directions(ndir, cs.n, rng)
    etas = _unit_directions(ndir, cs.m, rng)
    Amany = cs.eval_A_many(points)                      # (k, n, n, m, m)
    # values[p, a, e] = form at point p, direction pair (xi_a, eta_e)
    vals = np.einsum("pabij,xa,xb,yi,yj->pxy", Amany, xis, xis, etas, etas, optimize=True)
    idx = np.unravel_index(np.argmin(vals), vals.shape)
    value = float(vals[idx])
    near = int(np.count_nonzero(vals <= value + 1e-9 * max(1.0, abs(value)))) - 1
    if value <= 0.0:
        raise EllipticityError(f"sampled ellipticity constant {value:.3e} is not positive")
    if value < cs.lam - tol:
        raise EllipticityError(
            f"sampled ellipticity constant {value:.6g} undercuts the claimed {cs.lam:.6g}")
    return EllipticityMeasurement(value=value, near_ties=near,
                                  argmin_x=points[idx[0]],
                                  argmin_xi=xis[idx[1]], argmin_eta=etas[idx[2]])


def _field_components(cs: CoefficientSet, X: np.ndarray):
    """Component samples of each field family as (family, values (k, ncomp)) pairs."""
    k = X.shape[0]
    out = []
    out.append(("A", cs.eval_A_many(X).reshape(k, -1)))
    out.append(("B", cs.eval_B_many(X).reshape(k, -1)))
    out.append(("C", cs.eval_C_many(X).reshape(k, -1)))
    out.append(("D", cs.eval_D_many(X).reshape(k, -1)))
    return out


def check_holder(cs: CoefficientSet, pair_samples: int = 10_000,
                 points: Optional[np.ndarray] = None, seed: int = 0) -> float:
    """Sampled Holder norm of the coefficient fields.

    Over ``pair_samples`` point pairs, returns the largest
    ``sup |f| + max_pairs |f(x)-f(y)| / |x-y|^gamma`` over every scalar
    component field of A, B, C, D.  Sampling from below: the true norm is at
    least the returned value.
    """
    if pair_samples < 1:
        raise ValueError("pair_samples must be >= 1")
    rng = np.random.default_rng(seed)
    if points is None:
        points = rng.uniform(-1, 1, size=(max(64, int(np.sqrt(pair_samples)) + 1), cs.n))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    k = points.shape[0]
    ii = rng.integers(0, k, size=pair_samples)
    jj = rng.integers(0, k, size=pair_samples)
    keep = ii != jj
    ii, jj = ii[keep], jj[keep]
    dist = np.linalg.norm(points[ii] - points[jj], axis=1)
    worst = 0.0
    for _family, vals in _field_components(cs, points):
        sup = float(np.max(np.abs(vals))) if vals.size else 0.0
        if ii.size:
            diffs = np.abs(vals[ii] - vals[jj])            # (pairs, ncomp)
            quot = diffs / dist[:, None] ** cs.gamma
            q = float(np.max(quot)) if quot.size else 0.0
        else:
            q = 0.0
        worst = max(worst, sup + q)
    return worst
