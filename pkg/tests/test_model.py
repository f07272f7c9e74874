"""Unit tests for kernels, control weights, and the closed-loop right-hand side."""

import math

import numpy as np
import pytest

from flockform.model import (
    FormationSpec,
    ModelParams,
    SingularityError,
    SwarmState,
    alignment_accel,
    control_signal,
    control_weight_phi,
    distance_matrix,
    kernel_psi,
    pairwise_distances,
    phi_antiderivative,
    phi_antiderivative_inverse,
    rhs,
)


def params(**kw):
    return ModelParams(**kw)


def bisect_phi_inverse(c, beta, hi=10.0):
    """Independent root finder for Phi(s) = c (pure bisection)."""
    while phi_antiderivative(hi, beta) < c:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phi_antiderivative(mid, beta) < c:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# pairwise geometry


def test_pairwise_1d_pair():
    s = SwarmState(0.0, x=[0.0, 1.0], v=[0.0, 0.0])
    r = pairwise_distances(s)
    assert np.array_equal(r, [[0.0, 1.0], [1.0, 0.0]])


def test_pairwise_2d_symmetric_pair():
    s = SwarmState(0.0, x=[(-1.0, 0.0), (1.0, 0.0)], v=np.zeros((2, 2)))
    r = pairwise_distances(s)
    assert r[0, 1] == pytest.approx(2.0, abs=0)
    assert r[1, 0] == r[0, 1]


def test_pairwise_square_vertices():
    x = np.array([(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0), (0.0, -1.0)])
    r = distance_matrix(x)
    assert r[0, 2] == pytest.approx(2.0)
    assert r[1, 3] == pytest.approx(2.0)
    assert r[0, 1] == pytest.approx(math.sqrt(2.0))


def test_pairwise_matrix_properties():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(7, 3))
    r = distance_matrix(x)
    assert np.array_equal(r, r.T)
    assert np.all(np.diag(r) == 0.0)
    # triangle inequality within floating tolerance
    for i in range(7):
        for j in range(7):
            for k in range(7):
                assert r[i, j] <= r[i, k] + r[k, j] + 1e-12


# ---------------------------------------------------------------------------
# kernels


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.5, 2.7])
def test_singular_kernel_is_one_at_unit_distance(alpha):
    assert kernel_psi(1.0, params(alpha=alpha)) == pytest.approx(1.0, abs=0)


def test_singular_kernel_value():
    assert kernel_psi(2.0, params(alpha=1.0)) == pytest.approx(0.5)


def test_regular_kernel_value():
    p = params(alpha=0.5, kernel="regular")
    assert kernel_psi(1.0, p) == pytest.approx(2.0 ** -0.5)


def test_shifted_kernel_value():
    p = params(alpha=2.0, kernel="shifted", delta=0.5)
    assert kernel_psi(1.5, p) == pytest.approx(1.0)
    assert kernel_psi(2.5, p) == pytest.approx(0.25)


def test_singular_kernel_domain_violation():
    with pytest.raises(SingularityError):
        kernel_psi(0.0, params(alpha=1.0))
    with pytest.raises(SingularityError):
        kernel_psi(np.array([1.0, 0.0]), params(alpha=1.0))


def test_shifted_kernel_domain_violation():
    p = params(alpha=1.0, kernel="shifted", delta=0.3)
    with pytest.raises(SingularityError):
        kernel_psi(0.3, p)


def test_regular_kernel_rejects_negative_distance():
    with pytest.raises(ValueError):
        kernel_psi(-0.1, params(kernel="regular"))


@pytest.mark.parametrize("kernel,delta", [("singular", 0.0), ("regular", 0.0), ("shifted", 0.2)])
def test_kernel_strictly_decreasing(kernel, delta):
    p = params(alpha=1.3, kernel=kernel, delta=delta)
    rng = np.random.default_rng(11)
    r = np.sort(delta + 1e-3 + rng.uniform(0.0, 10.0, size=50))
    w = kernel_psi(r, p)
    assert np.all(np.diff(w) < 0)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(K=-1.0)
    with pytest.raises(ValueError):
        ModelParams(alpha=0.0)
    with pytest.raises(ValueError):
        ModelParams(kernel="smooth")
    with pytest.raises(ValueError):
        ModelParams(kernel="shifted", delta=0.0)


# ---------------------------------------------------------------------------
# control weight and its antiderivative


def test_phi_is_one_at_zero():
    for beta in (0.25, 1.0, 3.0):
        assert control_weight_phi(0.0, beta) == 1.0


def test_phi_values():
    assert control_weight_phi(1.0, 0.5) == pytest.approx(2.0 ** -0.5)
    assert control_weight_phi(3.0, 1.0) == pytest.approx(0.25)


def test_phi_rejects_negative_argument():
    with pytest.raises(ValueError):
        control_weight_phi(-1e-9, 0.5)


def test_antiderivative_closed_forms():
    assert phi_antiderivative(3.0, 0.5) == pytest.approx(2.0)
    assert phi_antiderivative(math.e - 1.0, 1.0) == pytest.approx(1.0)
    assert phi_antiderivative(1.0, 2.0) == pytest.approx(0.5)
    assert phi_antiderivative(0.0, 0.7) == 0.0


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.9, 1.0, 1.5, 2.0])
def test_antiderivative_matches_weight_by_finite_differences(beta):
    rng = np.random.default_rng(5)
    for s in rng.uniform(0.0, 20.0, size=20):
        h = 1e-5 * (1.0 + s)
        if s - h < 0:
            continue
        num = (phi_antiderivative(s + h, beta) - phi_antiderivative(s - h, beta)) / (2 * h)
        assert num == pytest.approx(control_weight_phi(s, beta), rel=1e-6)


def test_antiderivative_continuous_across_beta_one():
    for s in (0.3, 1.0, 7.5):
        for beta in (1.0 - 1e-8, 1.0 + 1e-8):
            assert phi_antiderivative(s, beta) == pytest.approx(math.log1p(s), rel=1e-6)


def test_antiderivative_inverse_values():
    assert phi_antiderivative_inverse(2.0, 0.5) == pytest.approx(3.0)
    for beta in (0.5, 1.0, 2.0):
        assert phi_antiderivative_inverse(0.0, beta) == 0.0
    # independent bisection oracle for beta = 0.5, c = 1 gives s = 1.25
    oracle = bisect_phi_inverse(1.0, 0.5)
    assert oracle == pytest.approx(1.25, abs=1e-10)
    assert phi_antiderivative_inverse(1.0, 0.5) == pytest.approx(oracle, abs=1e-10)


@pytest.mark.parametrize("beta", [0.4, 1.0, 1.7])
def test_antiderivative_inverse_round_trip(beta):
    rng = np.random.default_rng(17)
    top = 0.99 / (beta - 1.0) if beta > 1 else 50.0
    for c in rng.uniform(0.0, top, size=25):
        s = phi_antiderivative_inverse(c, beta)
        assert phi_antiderivative(s, beta) == pytest.approx(c, rel=1e-10, abs=1e-12)


def test_antiderivative_inverse_outside_image():
    with pytest.raises(ValueError):
        phi_antiderivative_inverse(1.0, 2.0)  # sup Phi = 1
    with pytest.raises(ValueError):
        phi_antiderivative_inverse(-0.1, 0.5)


# ---------------------------------------------------------------------------
# control signal


def test_control_zero_on_exact_pattern():
    rng = np.random.default_rng(2)
    z = rng.normal(size=(4, 2))
    x = np.zeros((5, 2))
    for i in range(4):
        x[i + 1] = x[i] - z[i]
    s = SwarmState(0.0, x=x, v=np.zeros_like(x))
    u = control_signal(s, FormationSpec(z), beta=0.5)
    assert np.allclose(u, 0.0, atol=1e-15)


def test_control_two_agents_1d():
    s = SwarmState(0.0, x=[2.0, 0.0], v=[0.0, 0.0])
    u = control_signal(s, FormationSpec(np.array([1.0])), beta=0.5)
    assert u[0, 0] == pytest.approx(-(2.0 ** -0.5))
    assert u[1, 0] == pytest.approx(+(2.0 ** -0.5))


def test_control_telescopes_to_zero():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n, d = int(rng.integers(2, 9)), int(rng.integers(1, 4))
        x = rng.normal(scale=5.0, size=(n, d))
        z = rng.normal(scale=2.0, size=(n - 1, d))
        s = SwarmState(0.0, x=x, v=np.zeros_like(x))
        u = control_signal(s, FormationSpec(z), beta=0.8)
        bound = 1e-12 * (1.0 + np.abs(u).max())
        assert np.all(np.abs(u.sum(axis=0)) <= bound)


def test_formation_spec_length_mismatch():
    s = SwarmState(0.0, x=np.zeros((3, 2)), v=np.zeros((3, 2)))
    with pytest.raises(ValueError):
        control_signal(s, FormationSpec(np.zeros((3, 2))), beta=0.5)


def test_shifted_kernel_requires_offsets_past_delta():
    s = SwarmState(0.0, x=[[0.0], [1.0]], v=[[0.0], [0.0]])
    spec = FormationSpec(np.array([0.4]))
    p = params(kernel="shifted", delta=0.5, alpha=2.0)
    with pytest.raises(ValueError):
        spec.check_against(s, p)


# ---------------------------------------------------------------------------
# alignment force


def test_alignment_zero_at_consensus():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(6, 2))
    v = np.tile([0.7, -0.2], (6, 1))
    s = SwarmState(0.0, x=x, v=v)
    a = alignment_accel(s, params(K=3.0, alpha=1.0))
    assert np.allclose(a, 0.0, atol=1e-15)


def test_alignment_two_agents_1d():
    s = SwarmState(0.0, x=[0.0, 1.0], v=[0.0, 2.0])
    a = alignment_accel(s, params(K=1.0, alpha=1.0))
    assert a[0, 0] == pytest.approx(1.0)
    assert a[1, 0] == pytest.approx(-1.0)


def test_alignment_antisymmetric_collinear_triple():
    s = SwarmState(0.0, x=[-1.0, 0.0, 1.0], v=[0.5, 0.0, -0.5])
    a = alignment_accel(s, params(K=2.0, alpha=1.0))
    assert a[1, 0] == pytest.approx(0.0, abs=1e-15)
    assert a.sum() == pytest.approx(0.0, abs=1e-14)


def test_alignment_overlap_raises_with_pair():
    s = SwarmState(0.0, x=[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)], v=np.zeros((3, 2)))
    with pytest.raises(SingularityError) as exc:
        alignment_accel(s, params(K=1.0, alpha=1.5))
    assert exc.value.pair == (0, 1)


def test_alignment_skips_kernel_when_uncoupled():
    # K = 0 never touches the kernel, even on overlapping agents
    s = SwarmState(0.0, x=[(0.0, 0.0), (0.0, 0.0)], v=np.zeros((2, 2)))
    a = alignment_accel(s, params(K=0.0, alpha=1.5))
    assert np.array_equal(a, np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# full right-hand side


def test_rhs_fixed_point_at_consensus_and_pattern():
    z = np.array([(1.0, 1.0), (1.0, -1.0)])
    x = np.zeros((3, 2))
    for i in range(2):
        x[i + 1] = x[i] - z[i]
    v = np.tile([0.3, 0.4], (3, 1))
    s = SwarmState(0.0, x=x, v=v)
    dx, dv = rhs(s, params(K=10.0, M=50.0, alpha=1.1, beta=0.5), FormationSpec(z))
    assert np.array_equal(dx, v)
    assert np.allclose(dv, 0.0, atol=1e-13)


def test_rhs_without_control_reduces_to_alignment():
    s = SwarmState(0.0, x=[0.0, 1.0], v=[0.0, 2.0])
    p = params(K=1.0, M=0.0, alpha=1.0)
    _, dv = rhs(s, p, FormationSpec(np.array([1.0])))
    assert np.allclose(dv, alignment_accel(s, p))


def test_rhs_mean_acceleration_vanishes():
    # oracle: plain coordinate-wise summation of dv over agents
    rng = np.random.default_rng(21)
    for _ in range(30):
        n, d = int(rng.integers(2, 10)), int(rng.integers(1, 4))
        s = SwarmState(0.0, x=rng.normal(scale=3.0, size=(n, d)),
                       v=rng.normal(scale=2.0, size=(n, d)))
        p = params(K=rng.uniform(0.0, 20.0), M=rng.uniform(0.0, 60.0),
                   alpha=1.2, beta=0.6)
        _, dv = rhs(s, p, FormationSpec(rng.normal(size=(n - 1, d))))
        assert np.all(np.abs(dv.mean(axis=0)) <= 1e-12 * (1.0 + np.abs(dv).max()))
        scale = n * max(np.abs(dv).max(), 1e-30)
        assert np.all(np.abs(dv.sum(axis=0)) <= 1e-10 * scale)


def test_swarm_state_validation():
    with pytest.raises(ValueError):
        SwarmState(0.0, x=np.zeros((3, 2)), v=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        SwarmState(0.0, x=[[np.nan, 0.0], [0.0, 0.0]], v=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        SwarmState(0.0, x=np.zeros((1, 2)), v=np.zeros((1, 2)))
    s = SwarmState(0.0, x=[0.0, 1.0], v=[0.5, 0.5])  # 1d convenience
    assert s.x.shape == (2, 1) and s.d == 1
