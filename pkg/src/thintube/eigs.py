"""Hermitian eigen-kernel: smallest eigenpairs, operator norms, resolvent applications.

Dense problems (dim <= DENSE_CUTOFF) go through LAPACK.  Larger matrices use a
shift-inverted block Lanczos iteration with full reorthogonalization; the block
start (seeded) captures degenerate clusters, which closed-curve spectra produce
routinely.  Every returned eigenpair is certified by an explicit residual
against the original matrix, never against the inverted operator.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NearSingularError, NoConvergenceError, NotHermitianError

DENSE_CUTOFF = 3000
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class SpectrumReport:
    """Ascending eigenvalues with per-pair residuals ||H x - lambda x|| / ||x||."""

    eigenvalues: np.ndarray
    residual_norms: np.ndarray
    iterations: int
    method: str
    metadata: dict = field(default_factory=dict)
    eigenvectors: np.ndarray | None = None


def hermitian_defect(H):
    """Largest entrywise deviation of H from its conjugate transpose."""
    if sp.issparse(H):
        D = (H - H.getH()).tocoo()
        return 0.0 if D.nnz == 0 else float(np.abs(D.data).max())
    H = np.asarray(H)
    return float(np.abs(H - H.conj().T).max())


def _check_hermitian(H):
    scale = max(1.0, _max_abs(H))
    defect = hermitian_defect(H)
    if defect > HERMITIAN_TOL * scale:
        raise NotHermitianError(f"Hermitian defect {defect:.3e} exceeds {HERMITIAN_TOL:.0e} * {scale:.3e}")


def _max_abs(H):
    if sp.issparse(H):
        return 0.0 if H.nnz == 0 else float(np.abs(H.tocoo().data).max())
    return float(np.abs(H).max()) if H.size else 0.0


def _matvec(H, X):
    return H @ X


def _gershgorin_lower(H):
    if sp.issparse(H):
        A = H.tocsr()
        diag = A.diagonal().real
        absrow = np.asarray(abs(A).sum(axis=1)).ravel()
        radii = absrow - np.abs(A.diagonal())
    else:
        A = np.asarray(H)
        diag = np.diag(A).real
        radii = np.abs(A).sum(axis=1) - np.abs(np.diag(A))
    return float((diag - radii).min())


def _shifted_solver(H, sigma):
    n = H.shape[0]
    if sp.issparse(H):
        A = (H - sigma * sp.identity(n, dtype=np.result_type(H.dtype, complex), format="csc")).tocsc()
        lu = spla.splu(A)
        return lambda B: lu.solve(B)
    A = np.asarray(H, dtype=complex) - sigma * np.eye(n)
    lu, piv = sla.lu_factor(A)
    return lambda B: sla.lu_solve((lu, piv), B)


def _dense_smallest(H, m, tol, metadata):
    A = H.toarray() if sp.issparse(H) else np.asarray(H)
    w, X = sla.eigh(A)
    w, X = w[:m], X[:, :m]
    res = np.linalg.norm(A @ X - X * w[None, :], axis=0)
    return SpectrumReport(
        eigenvalues=w.copy(),
        residual_norms=res,
        iterations=1,
        method="dense",
        metadata=dict(metadata or {}, dim=A.shape[0], tol=tol),
        eigenvectors=X.copy(),
    )


def _block_lanczos_smallest(H, m, tol, seed, sigma, max_basis, metadata):
    n = H.shape[0]
    rng = np.random.default_rng(seed)
    block = 2 if m <= 2 else min(m, 4)
    max_basis = min(n, max(max_basis, 8 * m + 40))

    if sigma is None:
        g = _gershgorin_lower(H)
        sigma = g - 1e-6 * max(1.0, abs(g))
    try:
        solve = _shifted_solver(H, sigma)
    except RuntimeError as exc:  # singular factorization: nudge the shift down
        sigma -= 1e-6 * max(1.0, abs(sigma))
        try:
            solve = _shifted_solver(H, sigma)
        except RuntimeError:
            raise NearSingularError(f"factorization of H - sigma I failed at sigma={sigma}") from exc

    V = np.zeros((n, max_basis), dtype=complex)
    T = np.zeros((max_basis, max_basis), dtype=complex)
    X0 = rng.standard_normal((n, block)) + 1j * rng.standard_normal((n, block))
    Q, _ = np.linalg.qr(X0)
    V[:, :block] = Q
    k = block
    filled = 0
    iterations = 0

    while True:
        iterations += 1
        cols = slice(filled, k)
        W = np.asarray(solve(V[:, cols]))
        if W.ndim == 1:
            W = W[:, None]
        tcol = V[:, :k].conj().T @ W
        T[:k, cols] = tcol
        T[cols, :k] = tcol.conj().T
        filled = k

        # Ritz extraction on the shift-inverted projection; certification on H itself.
        if filled >= m:
            theta, Y = np.linalg.eigh(0.5 * (T[:filled, :filled] + T[:filled, :filled].conj().T))
            order = np.argsort(theta)[::-1][:m]
            Xr = V[:, :filled] @ Y[:, order]
            lam = np.einsum("ij,ij->j", Xr.conj(), _matvec(H, Xr)).real
            res = np.linalg.norm(_matvec(H, Xr) - Xr * lam[None, :], axis=0)
            ok = res <= tol * np.maximum(1.0, np.abs(lam))
            if ok.all() and filled >= m + block:
                sort = np.argsort(lam)
                return SpectrumReport(
                    eigenvalues=lam[sort],
                    residual_norms=res[sort],
                    iterations=iterations,
                    method="lanczos",
                    metadata=dict(metadata or {}, dim=n, tol=tol, sigma=sigma, basis=filled, block=block),
                    eigenvectors=Xr[:, sort],
                )

        if k >= max_basis:
            raise NoConvergenceError(
                f"block Lanczos: basis {max_basis} exhausted (residuals "
                f"{np.array2string(res, precision=2)} vs tol {tol:.1e})"
                if filled >= m
                else f"block Lanczos: basis {max_basis} too small for m={m}"
            )

        # Expand: orthogonalize the fresh block against everything (two passes).
        for _ in range(2):
            W -= V[:, :k] @ (V[:, :k].conj().T @ W)
        Qn, R = np.linalg.qr(W)
        rd = np.abs(np.diag(R))
        bad = rd < 1e-10 * max(1.0, rd.max(initial=0.0))
        if bad.any():
            # Krylov space closed early; restart dead directions at random.
            F = rng.standard_normal((n, int(bad.sum()))) + 1j * rng.standard_normal((n, int(bad.sum())))
            Qn[:, bad] = F
            for _ in range(2):
                Qn -= V[:, :k] @ (V[:, :k].conj().T @ Qn)
                Qn, _ = np.linalg.qr(Qn)
        width = min(block, max_basis - k)
        V[:, k : k + width] = Qn[:, :width]
        k += width


def smallest_eigs(H, m, tol=1e-8, seed=0, sigma=None, dense_cutoff=DENSE_CUTOFF, max_basis=200, metadata=None):
    """m smallest eigenpairs of a Hermitian matrix (dense or sparse).

    ``sigma``, when given, must lie strictly below the smallest eigenvalue;
    positive-definite callers pass 0.  The default is a Gershgorin lower bound.
    Deterministic for a fixed seed.
    """
    n = H.shape[0]
    if m < 1 or m > n:
        raise ValueError(f"need 1 <= m <= dim, got m={m}, dim={n}")
    _check_hermitian(H)
    if n <= dense_cutoff:
        return _dense_smallest(H, m, tol, metadata)
    return _block_lanczos_smallest(H, m, tol, seed, sigma, max_basis, metadata)


def operator_norm(M, tol=1e-10, seed=0, dense_cutoff=DENSE_CUTOFF, max_iter=20000):
    """Largest singular value; dense SVD below the cutoff, power iteration above."""
    n = max(M.shape)
    if not sp.issparse(M):
        M = np.asarray(M)
        if not np.isfinite(M).all():
            raise ValueError("operator_norm requires finite entries")
    if n <= dense_cutoff:
        A = M.toarray() if sp.issparse(M) else M
        if A.size == 0:
            return 0.0
        return float(sla.svdvals(A)[0])
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = M @ v
        u = M.conj().T @ w if not sp.issparse(M) else M.getH() @ w
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            return 0.0
        new = float(np.sqrt(np.real(np.vdot(v, u))))
        v = u / nrm
        if abs(new - est) <= tol * max(new, 1e-300):
            return new
        est = new
    raise NoConvergenceError("power iteration for the operator norm did not converge")


def apply_resolvent(H, lam, v, tol=1e-10):
    """Solve (H + lam I) x = v for a Hermitian H with H + lam I positive definite."""
    v = np.asarray(v, dtype=complex)
    n = H.shape[0]
    if sp.issparse(H):
        A = (H + lam * sp.identity(n, dtype=np.result_type(H.dtype, complex), format="csc")).tocsc()
        try:
            lu = spla.splu(A)
        except RuntimeError as exc:
            raise NearSingularError("sparse factorization of H + lam I failed") from exc
        x = lu.solve(v)
        r = v - A @ x
        if np.linalg.norm(r) > tol * max(1.0, np.linalg.norm(v)):
            x = x + lu.solve(r)
            r = v - A @ x
        if np.linalg.norm(r) > tol * max(1.0, np.linalg.norm(v)):
            raise NearSingularError("resolvent solve residual above tolerance")
        return x
    A = np.asarray(H, dtype=complex) + lam * np.eye(n)
    try:
        c, low = sla.cho_factor(A)
    except np.linalg.LinAlgError as exc:
        raise NearSingularError("H + lam I is not positive definite") from exc
    except sla.LinAlgError as exc:  # scipy alias
        raise NearSingularError("H + lam I is not positive definite") from exc
    x = sla.cho_solve((c, low), v)
    r = v - A @ x
    if np.linalg.norm(r) > tol * max(1.0, np.linalg.norm(v)):
        x = x + sla.cho_solve((c, low), r)
        r = v - A @ x
        if np.linalg.norm(r) > tol * max(1.0, np.linalg.norm(v)):
            raise NearSingularError("resolvent solve residual above tolerance")
    return x
