"""Finite-dimensional laboratory for complex sesquilinear and quadratic forms.

Conventions fixed once for the whole package: the inner product ``<x, y>`` is
conjugate-linear in the first slot and linear in the second, and the form
induced by a Hermitian matrix M is ``b(x, y) = <x, M y>``.  Infinite functional
values are encoded as ``numpy.inf``.

Everything here is immutable after construction and pure, so concurrent
read-only use is safe.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    InfiniteValueError,
    NonQuadraticError,
    NotBlockError,
    NotPositiveError,
    SingularBlockError,
    SolverFailureError,
    TrivialKernelError,
)
from .eigs import operator_norm

ENTRY_TOL = 1e-12


def _as_square(entries):
    M = np.asarray(entries, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    return M


@dataclass(frozen=True)
class HermitianFormMatrix:
    """Hermitian matrix of a lower-bounded sesquilinear form, b(x, y) = <x, M y>."""

    entries: np.ndarray
    lower_bound: float = 0.0

    def __post_init__(self):
        M = _as_square(self.entries)
        scale = max(1.0, np.abs(M).max()) if M.size else 1.0
        if np.abs(M - M.conj().T).max(initial=0.0) > ENTRY_TOL * scale:
            raise ValueError("entries are not Hermitian within 1e-12")
        object.__setattr__(self, "entries", M)

    @property
    def dim(self):
        return self.entries.shape[0]

    def verify_lower_bound(self):
        """Check the certified bound against the actual spectrum (on demand)."""
        return bool(np.linalg.eigvalsh(self.entries).min() >= self.lower_bound - 1e-10)

    def quadratic(self, x):
        x = np.asarray(x, dtype=complex)
        return float(np.real(np.vdot(x, self.entries @ x)))


@dataclass(frozen=True)
class QuadraticFunctional:
    """Extended-real functional on C^dim; inf marks points outside the form domain."""

    dim: int
    evaluate: callable

    @classmethod
    def from_matrix(cls, M):
        M = _as_square(M)
        return cls(dim=M.shape[0], evaluate=lambda z: float(np.real(np.vdot(z, M @ z))))


@dataclass(frozen=True)
class SubspaceProjector:
    """Hermitian idempotent matrix; its range is the subspace."""

    matrix: np.ndarray

    def __post_init__(self):
        P = _as_square(self.matrix)
        scale = max(1.0, np.abs(P).max()) if P.size else 1.0
        if np.abs(P - P.conj().T).max(initial=0.0) > ENTRY_TOL * scale:
            raise ValueError("projector is not Hermitian within 1e-12")
        if np.abs(P @ P - P).max(initial=0.0) > ENTRY_TOL * max(1.0, scale**2):
            raise ValueError("projector is not idempotent within 1e-12")
        object.__setattr__(self, "matrix", P)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def range_basis(self, tol=0.5):
        w, U = np.linalg.eigh(self.matrix)
        return U[:, w > tol]


@dataclass(frozen=True)
class QuadraticityReport:
    """Per-property verdicts for the quadratic-form axioms a) .. f)."""

    passed: dict
    worst_violation: dict
    has_infinite: bool
    samples: int
    seed: int
    tol: float

    def all_passed(self, properties=("a", "b", "c", "d", "e", "f")):
        return not self.has_infinite and all(self.passed[p] for p in properties)


def check_quadratic(F, sample_count=24, seed=0, tol=1e-8):
    """Test the axioms: a) F(0)=0, b) F(t z) <= t^2 F(z) for t >= 0,
    c) parallelogram inequality, d) F(i z) = F(z), e) F(w z) = |w|^2 F(z),
    f) parallelogram equality.  Violations are measured relative to
    max(1, |values involved|) on seeded random samples.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    n = F.dim
    ev = F.evaluate

    worst = {p: 0.0 for p in "abcdef"}
    has_inf = False

    def rel(violation, *vals):
        return violation / max(1.0, *(abs(v) for v in vals if np.isfinite(v)))

    v0 = ev(np.zeros(n, dtype=complex))
    has_inf |= not np.isfinite(v0)
    worst["a"] = abs(v0) if np.isfinite(v0) else np.inf

    ts = np.concatenate([[0.0, 0.5, 1.0, 1.7, 2.3], rng.uniform(0.0, 3.0, 3)])
    for _ in range(sample_count):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        fz, fy = ev(z), ev(y)
        fzy, fzy2 = ev(z + y), ev(z - y)
        fiz = ev(1j * z)
        w = rng.standard_normal() + 1j * rng.standard_normal()
        fwz = ev(w * z)
        vals = [fz, fy, fzy, fzy2, fiz, fwz]
        if not all(np.isfinite(v) for v in vals):
            has_inf = True
            continue
        for t in ts:
            ftz = ev(t * z)
            if not np.isfinite(ftz):
                has_inf = True
                continue
            worst["b"] = max(worst["b"], rel(ftz - t**2 * fz, ftz, t**2 * fz))
        worst["c"] = max(worst["c"], rel(fzy + fzy2 - 2 * fz - 2 * fy, fzy, fzy2, fz, fy))
        worst["d"] = max(worst["d"], rel(abs(fiz - fz), fiz, fz))
        worst["e"] = max(worst["e"], rel(abs(fwz - abs(w) ** 2 * fz), fwz, fz))
        worst["f"] = max(worst["f"], rel(abs(fzy + fzy2 - 2 * fz - 2 * fy), fzy, fzy2, fz, fy))

    passed = {p: worst[p] <= tol for p in "abcdef"}
    return QuadraticityReport(
        passed=passed, worst_violation=worst, has_infinite=has_inf, samples=sample_count, seed=seed, tol=tol
    )


def polarize(F, sample_count=16, seed=0, tol=1e-8):
    """Recover the sesquilinear-form matrix of a quadratic functional.

    Uses the real polarization B(x, y) = (F(x+y) - F(x-y)) / 4 and its complex
    completion b(x, y) = B(x, y) - i B(x, i y); returns M with <x, M y> = b(x, y),
    evaluated on the standard basis pairs.
    """
    report = check_quadratic(F, sample_count=sample_count, seed=seed, tol=tol)
    if report.has_infinite:
        raise InfiniteValueError("functional returned an infinite value on the sample set")
    if not report.all_passed("abcd"):
        bad = [p for p in "abcd" if not report.passed[p]]
        raise NonQuadraticError(f"quadratic-form properties failed: {bad} (worst {report.worst_violation})")

    n = F.dim
    ev = F.evaluate

    def B(x, y):
        p, q = ev(x + y), ev(x - y)
        if not (np.isfinite(p) and np.isfinite(q)):
            raise InfiniteValueError("functional returned an infinite value at a basis pair")
        return 0.25 * (p - q)

    M = np.empty((n, n), dtype=complex)
    eye = np.eye(n, dtype=complex)
    for j in range(n):
        for k in range(n):
            M[j, k] = B(eye[j], eye[k]) - 1j * B(eye[j], 1j * eye[k])
    return M


def polarized_pairing(F):
    """b(x, y) built directly from F via polarization, as a callable (for diagnostics)."""

    def B(x, y):
        return 0.25 * (F.evaluate(x + y) - F.evaluate(x - y))

    return lambda x, y: B(x, y) - 1j * B(x, 1j * y)


def shifted_energy(M, eta, rho):
    """g(rho) = b(rho) - <eta, rho> - <rho, eta> for the Hermitian form b of M."""
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.vdot(rho, M @ rho)) - 2.0 * np.real(np.vdot(eta, rho)))


def solve_variational(M, eta, P0, tol=1e-10, seed=0, n_checks=8):
    """Minimizer of g(x) = b(x) - <eta, x> - <x, eta> over the projector's range.

    Requires M to commute with P0 (block structure) and to be invertible on the
    range.  The returned point solves M x = P0 eta and is certified against
    seeded perturbations inside the range.
    """
    A = M.entries if isinstance(M, HermitianFormMatrix) else _as_square(M)
    P = P0.matrix
    eta = np.asarray(eta, dtype=complex)
    scale = max(1.0, np.abs(A).max())
    if np.abs(A @ P - P @ A).max(initial=0.0) > 1e-10 * scale:
        raise NotBlockError("matrix does not commute with the projector within 1e-10")

    U = P0.range_basis()
    if U.shape[1] == 0:
        return np.zeros(A.shape[0], dtype=complex)
    Ar = U.conj().T @ A @ U
    w = np.linalg.eigvalsh(Ar)
    if np.abs(w).min() <= 1e-12 * max(1.0, np.abs(w).max()):
        raise SingularBlockError("restricted block is numerically singular")
    z = np.linalg.solve(Ar, U.conj().T @ eta)
    x = U @ z

    resid = np.linalg.norm(A @ x - P @ eta)
    if resid > tol * max(1.0, np.linalg.norm(eta)):
        raise SingularBlockError(f"variational solve residual {resid:.2e} above {tol:.0e}")

    g0 = shifted_energy(A, eta, x)
    rng = np.random.default_rng(seed)
    for _ in range(n_checks):
        d = U @ (rng.standard_normal(U.shape[1]) + 1j * rng.standard_normal(U.shape[1]))
        d *= rng.uniform(1e-3, 1.0) / max(np.linalg.norm(d), 1e-300)
        if shifted_energy(A, eta, x + d) < g0 - 1e-10 * max(1.0, abs(g0)):
            raise SolverFailureError("minimizer certification failed on a sampled perturbation")
    return x


def form_deviation(B, M):
    """Sharp constant q with |b(x) - m(x)| <= q m(x): the extreme generalized
    eigenvalue of (B - M) against M (M positive definite)."""
    Bm = B.entries if isinstance(B, HermitianFormMatrix) else _as_square(B)
    Mm = M.entries if isinstance(M, HermitianFormMatrix) else _as_square(M)
    if Bm.shape != Mm.shape:
        raise ValueError("dimension mismatch")
    if np.linalg.eigvalsh(Mm).min() <= 0.0:
        raise NotPositiveError("reference form must be positive definite")
    mu = sla.eigh(Bm - Mm, Mm, eigvals_only=True)
    return float(np.abs(mu).max())


def resolvent_gap(B, M):
    """Operator norm of B^{-1} - M^{-1}; both matrices must be positive definite."""
    Bm = B.entries if isinstance(B, HermitianFormMatrix) else _as_square(B)
    Mm = M.entries if isinstance(M, HermitianFormMatrix) else _as_square(M)
    for name, X in (("B", Bm), ("M", Mm)):
        if np.linalg.eigvalsh(X).min() <= 0.0:
            raise NotPositiveError(f"{name} must be positive definite")
    eye = np.eye(Bm.shape[0])
    D = np.linalg.solve(Bm, eye) - np.linalg.solve(Mm, eye)
    return operator_norm(D)


def kernel_projector(P, tol=None):
    """Orthogonal projector onto ker P for a Hermitian PSD matrix P."""
    Pm = P.entries if isinstance(P, HermitianFormMatrix) else _as_square(P)
    w, U = np.linalg.eigh(Pm)
    if w.min() < -1e-10 * max(1.0, abs(w).max()):
        raise NotPositiveError("penalty matrix must be positive semidefinite")
    cut = tol if tol is not None else 1e-12 * max(1.0, w.max(initial=0.0))
    K = U[:, w <= cut]
    return SubspaceProjector(matrix=K @ K.conj().T), K


def penalized_resolvent_limit(B0, P, lam, eps_list):
    """Resolvent distance of the penalized family B0 + eps^{-2} P to its limit.

    The limit operator acts on ker P as the compression of B0; outside the
    kernel the limit resolvent (at -lam) is zero.  Returns [(eps, error)] in
    the order supplied; an empty list yields an empty table.
    """
    B = B0.entries if isinstance(B0, HermitianFormMatrix) else _as_square(B0)
    Pm = P.entries if isinstance(P, HermitianFormMatrix) else _as_square(P)
    if lam <= 0:
        raise ValueError("lam must be positive")
    _, K = kernel_projector(P)
    if K.shape[1] == 0:
        raise TrivialKernelError("penalty matrix has trivial kernel")
    Tr = K.conj().T @ B @ K
    if np.linalg.eigvalsh(Tr).min() <= -lam:
        raise NotPositiveError("B0 + lam is not positive on the kernel")
    R_lim = K @ np.linalg.solve(Tr + lam * np.eye(K.shape[1]), K.conj().T)

    eye = np.eye(B.shape[0])
    out = []
    for eps in eps_list:
        A = B + (eps**-2) * Pm + lam * eye
        R = np.linalg.solve(A, eye)
        out.append((float(eps), float(operator_norm(R - R_lim))))
    return out
