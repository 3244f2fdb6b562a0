import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from floqsim.basis import parity_project
from floqsim.errors import PeriodicityViolationError, QuadratureNotConvergedError
from floqsim.floquet import (
    MagnusResult,
    TrimerOracle,
    fractional_weight,
    magnus_h0,
    magnus_h1,
    magnus_result,
    resonance_weight,
    rotating_frame_hamiltonian,
    trimer_populations_fractional,
    trimer_populations_integer,
)
from floqsim.models import DriveSpec, build_bose_hubbard

U = 0.4


def riemann_weight(omega, nu, n=200_001):
    """Independent trapezoid oracle for (1/T) int cos(omega t) e^{i nu t} dt."""
    T = 2 * np.pi / omega
    t = np.linspace(0.0, T, n)
    return np.trapezoid(np.cos(omega * t) * np.exp(1j * nu * t), t) / T


def riemann_fractional(omega, Uval, m_j, m_k, m_l, n=1_000_001):
    """Brute-force double Riemann sums for both second-order weights."""
    T = 2 * np.pi / omega
    t = np.linspace(0.0, T, n)
    J = np.cos(omega * t)
    a = Uval * (m_j - m_k)
    b2 = Uval * (m_k - m_l)
    pref = 1.0 / (2.0 * T * 1j)
    inner1 = cumulative_trapezoid(J * np.exp(1j * (Uval + b2) * t), t, initial=0.0)
    inner2 = cumulative_trapezoid(J * np.exp(1j * b2 * t), t, initial=0.0)
    outer = J * np.exp(1j * a * t)
    f1 = pref * np.trapezoid(outer * inner1, t)
    f2 = pref * np.trapezoid(outer * inner2, t)
    return f1, f2


def test_resonant_limit_exactly_half():
    assert resonance_weight(U, U, 1, 1, +1) == pytest.approx(0.5, abs=1e-14)
    # (m_j=2, m_k=0) lands on nu=-U, the mirror image of the same resonance
    w = resonance_weight(U, U, 2, 0, +1)
    assert w == pytest.approx(0.5, abs=1e-14)


def test_zeros_at_unit_fractions():
    for q in (2, 3, 4, 5):
        assert abs(resonance_weight(U / q, U, 1, 1, +1)) < 1e-12


def test_weight_matches_riemann_oracle():
    for omega, m_j, m_k, branch in (
        (0.37 * U, 2, 0, +1),
        (0.83 * U, 1, 1, +1),
        (1.21 * U, 0, 2, -1),
    ):
        nu = U * (branch * (m_k - m_j) + 1)
        got = resonance_weight(omega, U, m_j, m_k, branch)
        ref = riemann_weight(omega, nu)
        assert abs(got - ref) < 1e-8


def test_fractional_weight_matches_riemann_oracle():
    for omega in (0.43 * U, 0.5 * U, 0.71 * U):
        f1, f2 = fractional_weight(omega, U, 0, 1, 2)
        r1, r2 = riemann_fractional(omega, U, 0, 1, 2)
        assert abs(f1 - r1) < 1e-6
        assert abs(f2 - r2) < 1e-6


def test_fractional_f2_vanishes_for_equidistant_labels():
    # m_j - m_k = m_k - m_l makes the second contribution cancel at Omega=U/2
    for labels in ((1, 1, 1), (0, 1, 2), (2, 1, 0)):
        _, f2 = fractional_weight(U / 2, U, *labels)
        assert abs(f2) < 1e-10


def test_fractional_f2_nonequidistant_limits():
    # closed-form limits at Omega = U/2, derived by residue bookkeeping on the
    # two-term antiderivative (checked against the Riemann oracle above)
    _, f2 = fractional_weight(U / 2, U, 0, 1, 1)
    assert f2 == pytest.approx(-1.0 / (4 * U), rel=1e-6)
    _, f2 = fractional_weight(U / 2, U, 0, 2, 1)
    assert f2 == pytest.approx(-1.0 / (12 * U), rel=1e-6)


def test_fractional_weight_zero_tolerance_raises():
    with pytest.raises(QuadratureNotConvergedError):
        fractional_weight(0.43 * U, U, 0, 1, 2, tol=0.0)


@pytest.fixture(scope="module")
def trimer_models():
    mk = lambda om: build_bose_hubbard(
        3, 3, 3, U=U, omega=1.0, drive=DriveSpec(J0=0.01, Omega=om, hop_sign=-1)
    )
    return mk(U), mk(U / 2)


def test_magnus_h0_offresonance_rejected():
    model = build_bose_hubbard(
        3, 3, 3, U=U, omega=1.0,
        drive=DriveSpec(J0=0.01, Omega=0.37 * U, hop_sign=-1),
    )
    with pytest.raises(PeriodicityViolationError):
        magnus_h0(model)


def test_magnus_h0_parity_block_structure(trimer_models):
    integer, fractional = trimer_models
    h0 = magnus_h0(integer)
    basis = integer.basis
    perm = basis.reflect_permutation()
    np.testing.assert_allclose(h0, h0[np.ix_(perm, perm)], atol=1e-12)
    # projection onto the symmetric sector keeps the trimer 6x6 block
    plus = parity_project(basis, +1)
    h0p = magnus_h0(integer, frame=plus)
    assert h0p.shape == (6, 6)
    np.testing.assert_allclose(h0p, h0p.conj().T, atol=1e-12)


def test_magnus_h1_hermitian(trimer_models):
    _, fractional = trimer_models
    h1 = magnus_h1(fractional)
    assert np.linalg.norm(h1 - h1.conj().T) < 1e-10


def test_magnus_h1_integer_norm_bound(trimer_models):
    integer, _ = trimer_models
    h1 = magnus_h1(integer)
    assert np.linalg.norm(h1, 2) <= 10 * 0.01**2 / U


def test_magnus_result_reports(trimer_models):
    _, fractional = trimer_models
    res = magnus_result(fractional)
    assert isinstance(res, MagnusResult)
    assert res.period == pytest.approx(4 * np.pi / U)
    assert set(res.quadrature_report) >= {"h0_panels", "h0_doubling_defect", "h1_nodes"}


def test_rotating_frame_periodicity(trimer_models):
    integer, fractional = trimer_models
    for model in (integer, fractional):
        T = model.drive.period
        h_start = rotating_frame_hamiltonian(model, 0.0)
        h_end = rotating_frame_hamiltonian(model, T)
        assert np.linalg.norm(h_end - h_start) < 1e-8 * np.linalg.norm(h_start)


def test_trimer_oracle_constants():
    oracle = TrimerOracle.from_params(0.01, U)
    j2u = 0.01**2 / U
    assert oracle.a == pytest.approx(16 * j2u / 3)
    assert oracle.b == pytest.approx(3 * j2u)
    assert oracle.c == pytest.approx(4 * j2u / 5)
    lam = np.sqrt((oracle.a - oracle.c) ** 2 + 4 * oracle.b**2) / 2
    assert oracle.lam == pytest.approx(lam)
    # peak height and period of the transfer
    assert oracle.b**2 / oracle.lam**2 == pytest.approx(0.63659, abs=1e-4)


def test_trimer_population_closed_forms():
    t = np.linspace(0.0, 4000.0, 500)
    p0, p1, p2 = trimer_populations_integer(t, 0.01)
    np.testing.assert_allclose(p0 + p1 + p2, 1.0, atol=1e-12)
    np.testing.assert_allclose(p0, np.cos(np.sqrt(2) * 0.01 * t) ** 2, atol=1e-12)
    q0, q3 = trimer_populations_fractional(t, 0.01, U)
    assert q0[0] == pytest.approx(1.0)
    assert q3[0] == pytest.approx(0.0)
    assert np.all(q0 + q3 <= 1.0 + 1e-12)
