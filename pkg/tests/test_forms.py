import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings, strategies as st

from thintube.errors import (
    InfiniteValueError,
    NonQuadraticError,
    NotBlockError,
    NotPositiveError,
    SingularBlockError,
    TrivialKernelError,
)
from thintube.forms import (
    HermitianFormMatrix,
    QuadraticFunctional,
    SubspaceProjector,
    check_quadratic,
    form_deviation,
    kernel_projector,
    penalized_resolvent_limit,
    polarize,
    polarized_pairing,
    resolvent_gap,
    shifted_energy,
    solve_variational,
)


def random_psd(n, seed, floor=0.0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A @ A.conj().T / n + floor * np.eye(n)


def test_polarize_two_by_two_exact():
    M = np.array([[2.0, 1j], [-1j, 3.0]])
    F = QuadraticFunctional.from_matrix(M)
    assert np.abs(polarize(F) - M).max() <= 1e-10


def test_polarize_zero_functional():
    F = QuadraticFunctional(dim=3, evaluate=lambda z: 0.0)
    assert np.abs(polarize(F)).max() <= 1e-12


def test_polarize_recovers_random_psd_matrix():
    # oracle: direct evaluation of the quadratic form of a known matrix
    M = random_psd(8, seed=42)
    F = QuadraticFunctional.from_matrix(M)
    assert np.abs(polarize(F) - M).max() <= 1e-10


@settings(max_examples=15)
@given(dim=st.integers(min_value=1, max_value=16), seed=st.integers(min_value=0, max_value=10**6))
def test_polarization_round_trip_property(dim, seed):
    M = random_psd(dim, seed)
    F = QuadraticFunctional.from_matrix(M)
    assert np.abs(polarize(F, sample_count=8, seed=seed) - M).max() <= 1e-10


def test_reconstructed_pairing_relations():
    # the complex pairing satisfies b(x, iy) = i b(x, y), b(y, x) = conj b(x, y),
    # b(ix, iy) = b(x, y), straight from the polarization construction
    M = random_psd(5, seed=7)
    F = QuadraticFunctional.from_matrix(M)
    b = polarized_pairing(F)
    rng = np.random.default_rng(11)
    for _ in range(6):
        x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        y = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        assert b(x, 1j * y) == pytest.approx(1j * b(x, y), abs=1e-9)
        assert b(y, x) == pytest.approx(np.conj(b(x, y)), abs=1e-9)
        assert b(1j * x, 1j * y) == pytest.approx(b(x, y), abs=1e-9)


def test_check_quadratic_flags_quartic():
    F = QuadraticFunctional(dim=3, evaluate=lambda z: float(np.linalg.norm(z) ** 4))
    rep = check_quadratic(F, sample_count=12, seed=1)
    assert not rep.passed["b"]
    assert not rep.passed["e"]


def test_check_quadratic_accepts_true_form():
    F = QuadraticFunctional.from_matrix(random_psd(4, seed=3))
    rep = check_quadratic(F, sample_count=12, seed=2)
    assert rep.all_passed()


def test_check_quadratic_flags_real_part_square():
    F = QuadraticFunctional(dim=1, evaluate=lambda z: float(np.real(z[0]) ** 2))
    rep = check_quadratic(F, sample_count=12, seed=3)
    assert not rep.passed["d"]


def test_polarize_rejects_infinite_values():
    F = QuadraticFunctional(dim=2, evaluate=lambda z: np.inf)
    with pytest.raises(InfiniteValueError):
        polarize(F)


def test_polarize_rejects_non_quadratic():
    F = QuadraticFunctional(dim=2, evaluate=lambda z: float(np.linalg.norm(z)))
    with pytest.raises(NonQuadraticError):
        polarize(F)


def test_solve_variational_identity():
    M = HermitianFormMatrix(entries=np.eye(4), lower_bound=1.0)
    P = SubspaceProjector(matrix=np.eye(4))
    eta = np.array([1.0, 2.0, 3.0, 4.0], dtype=complex)
    assert np.allclose(solve_variational(M, eta, P), eta, atol=1e-12)


def test_solve_variational_diagonal_block():
    M = HermitianFormMatrix(entries=np.diag([1.0, 2.0]))
    P = SubspaceProjector(matrix=np.diag([1.0, 0.0]))
    out = solve_variational(M, np.array([3.0, 5.0]), P)
    assert np.allclose(out, [3.0, 0.0], atol=1e-12)


def test_solve_variational_block_oracles():
    # block-diagonal PD matrix commuting with the coordinate projector
    rng = np.random.default_rng(19)
    A = random_psd(3, seed=20, floor=0.5)
    B = random_psd(3, seed=21, floor=0.5)
    M = np.zeros((6, 6), dtype=complex)
    M[:3, :3], M[3:, 3:] = A, B
    Pm = np.zeros((6, 6))
    Pm[:3, :3] = np.eye(3)
    eta = rng.standard_normal(6) + 1j * rng.standard_normal(6)

    x = solve_variational(HermitianFormMatrix(entries=M), eta, SubspaceProjector(matrix=Pm))
    direct = np.zeros(6, dtype=complex)
    direct[:3] = np.linalg.solve(A, eta[:3])
    assert np.abs(x - direct).max() <= 1e-10

    # independent minimization oracle: BFGS on g over the range coordinates
    def g_of(u):
        z = np.zeros(6, dtype=complex)
        z[:3] = u[:3] + 1j * u[3:]
        return shifted_energy(M, eta, z)

    for s in range(20):
        start = np.random.default_rng(s).standard_normal(6)
        res = scipy.optimize.minimize(g_of, start, method="BFGS", options={"gtol": 1e-12})
        zmin = res.x[:3] + 1j * res.x[3:]
        assert np.abs(zmin - x[:3]).max() <= 1e-6


def test_solve_variational_rejects_non_block():
    M = HermitianFormMatrix(entries=np.array([[1.0, 0.5], [0.5, 2.0]]))
    P = SubspaceProjector(matrix=np.diag([1.0, 0.0]))
    with pytest.raises(NotBlockError):
        solve_variational(M, np.ones(2), P)


def test_solve_variational_rejects_singular_block():
    M = HermitianFormMatrix(entries=np.diag([0.0, 1.0]))
    P = SubspaceProjector(matrix=np.diag([1.0, 0.0]))
    with pytest.raises(SingularBlockError):
        solve_variational(M, np.ones(2), P)


def test_form_deviation_proportional():
    M = HermitianFormMatrix(entries=random_psd(5, seed=30, floor=0.5))
    B = HermitianFormMatrix(entries=1.1 * M.entries)
    assert form_deviation(B, M) == pytest.approx(0.1, abs=1e-12)
    assert form_deviation(M, M) == pytest.approx(0.0, abs=1e-13)


def test_form_deviation_matches_generalized_eig_oracle():
    M = random_psd(7, seed=31, floor=0.5)
    B = random_psd(7, seed=32, floor=0.5)
    q = form_deviation(HermitianFormMatrix(entries=B), HermitianFormMatrix(entries=M))
    oracle = np.abs(np.linalg.eigvals(np.linalg.solve(M, B - M))).max()
    assert q == pytest.approx(oracle, abs=1e-10)


def test_form_deviation_requires_positive_reference():
    M = HermitianFormMatrix(entries=np.diag([1.0, -1.0]))
    B = HermitianFormMatrix(entries=np.eye(2))
    with pytest.raises(NotPositiveError):
        form_deviation(B, M)


def test_resolvent_gap_scalar():
    B = HermitianFormMatrix(entries=2.0 * np.eye(4))
    M = HermitianFormMatrix(entries=np.eye(4))
    assert resolvent_gap(B, M) == pytest.approx(0.5, abs=1e-12)
    assert resolvent_gap(M, M) == pytest.approx(0.0, abs=1e-13)


def test_resolvent_gap_matches_svd_oracle():
    B = random_psd(6, seed=40, floor=0.5)
    M = random_psd(6, seed=41, floor=0.5)
    gap = resolvent_gap(HermitianFormMatrix(entries=B), HermitianFormMatrix(entries=M))
    oracle = np.linalg.svd(np.linalg.inv(B) - np.linalg.inv(M), compute_uv=False)[0]
    assert gap == pytest.approx(oracle, abs=1e-10)


def make_nearby_pair(n, seed, q_target):
    """PD pair with form deviation exactly q_target."""
    M = random_psd(n, seed, floor=0.5)
    E = random_psd(n, seed + 1000) - random_psd(n, seed + 2000)
    E = 0.5 * (E + E.conj().T)
    q0 = form_deviation(HermitianFormMatrix(entries=M + E), HermitianFormMatrix(entries=M))
    E *= q_target / q0
    return HermitianFormMatrix(entries=M + E), HermitianFormMatrix(entries=M)


@pytest.mark.parametrize("n,seed,q", [(2, 1, 0.1), (4, 2, 0.3), (8, 3, 0.45), (16, 4, 0.2)])
def test_resolvent_gap_bounded_by_form_deviation(n, seed, q):
    # gap <= q (||B^{-1}||/(1-q) + ||M^{-1}||) for q < 1/2
    B, M = make_nearby_pair(n, seed, q)
    qm = form_deviation(B, M)
    assert qm == pytest.approx(q, rel=1e-10)
    bound = qm * (np.linalg.norm(np.linalg.inv(B.entries), 2) / (1 - qm) + np.linalg.norm(np.linalg.inv(M.entries), 2))
    assert resolvent_gap(B, M) <= bound + 1e-12


def test_penalized_diagonal_example():
    B0 = HermitianFormMatrix(entries=np.diag([1.0, 3.0]))
    P = HermitianFormMatrix(entries=np.diag([0.0, 1.0]))
    table = penalized_resolvent_limit(B0, P, 1.0, [0.1, 0.01])
    for eps, err in table:
        assert err == pytest.approx(1.0 / (4.0 + eps**-2), abs=1e-12)


def test_penalized_coupled_example():
    B0 = HermitianFormMatrix(entries=np.array([[1.0, 1.0], [1.0, 2.0]]))
    P = HermitianFormMatrix(entries=np.diag([0.0, 1.0]))
    table = penalized_resolvent_limit(B0, P, 1.0, [0.1, 0.05, 0.01])
    errs = [e for _, e in table]
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] <= 1e-3


def test_penalized_zero_penalty_is_exact():
    B0 = HermitianFormMatrix(entries=random_psd(4, seed=50, floor=0.5))
    P = HermitianFormMatrix(entries=np.zeros((4, 4)))
    table = penalized_resolvent_limit(B0, P, 1.0, [0.5, 0.1])
    assert all(err <= 1e-12 for _, err in table)


def test_penalized_trivial_kernel_rejected():
    B0 = HermitianFormMatrix(entries=np.eye(3))
    P = HermitianFormMatrix(entries=np.eye(3))
    with pytest.raises(TrivialKernelError):
        penalized_resolvent_limit(B0, P, 1.0, [0.1])


def test_penalized_empty_eps_list():
    B0 = HermitianFormMatrix(entries=np.diag([1.0, 3.0]))
    P = HermitianFormMatrix(entries=np.diag([0.0, 1.0]))
    assert penalized_resolvent_limit(B0, P, 1.0, []) == []


def test_penalized_matches_eigendecomposition_oracle():
    rng = np.random.default_rng(60)
    B0 = random_psd(5, seed=61, floor=0.5)
    U, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    P = U @ np.diag([0.0, 0.0, 1.3, 2.0, 0.7]) @ U.conj().T
    P = 0.5 * (P + P.conj().T)
    lam = 0.8
    table = penalized_resolvent_limit(HermitianFormMatrix(entries=B0), HermitianFormMatrix(entries=P), lam, [0.1, 1e-2, 1e-3, 1e-4])

    # oracle built purely from eigendecompositions
    wp, Up = np.linalg.eigh(P)
    K = Up[:, wp <= 1e-12 * wp.max()]
    wt, Ut = np.linalg.eigh(K.conj().T @ B0 @ K)
    R_lim = K @ Ut @ np.diag(1.0 / (wt + lam)) @ Ut.conj().T @ K.conj().T
    errs = []
    for eps, err in table:
        wa, Ua = np.linalg.eigh(B0 + eps**-2 * P + lam * np.eye(5))
        R = Ua @ np.diag(1.0 / wa) @ Ua.conj().T
        oracle = np.linalg.svd(R - R_lim, compute_uv=False)[0]
        # at eps = 1e-4 the penalized system has condition ~1e8; both routes
        # carry kappa * eps_mach noise, so compare with a matching band
        assert abs(err - oracle) <= max(1e-10, 5e-2 * oracle)
        errs.append(err)
    assert all(errs[i + 1] <= errs[i] + 1e-12 for i in range(len(errs) - 1))
    assert errs[-1] <= 1e-6


def test_kernel_projector_is_projector():
    P = np.diag([0.0, 2.0, 0.0])
    proj, K = kernel_projector(HermitianFormMatrix(entries=P))
    assert K.shape[1] == 2
    assert np.allclose(proj.matrix @ proj.matrix, proj.matrix, atol=1e-12)


def test_dim_one_supported():
    M = HermitianFormMatrix(entries=np.array([[2.0]]))
    F = QuadraticFunctional.from_matrix(M.entries)
    assert polarize(F)[0, 0] == pytest.approx(2.0, abs=1e-12)
    out = solve_variational(M, np.array([4.0]), SubspaceProjector(matrix=np.eye(1)))
    assert out[0] == pytest.approx(2.0, abs=1e-12)
