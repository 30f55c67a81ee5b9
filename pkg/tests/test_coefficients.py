import numpy as np
import pytest

from lapres import build_grid, validate_coefficients, coercivity_probe
from lapres.coefficients import (
    CoefficientError,
    PlasmaParams,
    constant_field,
    expansion_remainder_ratio,
    full_perturbed_tensor,
    identity_field,
    plasma_tensors,
    smooth_field,
    _a_matrix,
    _deltas,
    _t_matrix,
)


@pytest.fixture
def grid():
    return build_grid(1.0, 1.0, 4, 8)


def test_identity_coercivity_exact(grid):
    rep = validate_coefficients(identity_field(grid), identity_field(grid, "T"))
    assert rep.c_A == 1.0 and rep.c_T == 1.0


def test_diagonal_constants_read_off(grid):
    A = constant_field(grid, [[2, 0], [0, 3]])
    rep = validate_coefficients(A, identity_field(grid, "T"))
    assert rep.c_A == pytest.approx(2.0)


def test_non_hermitian_rejected(grid):
    A = identity_field(grid)
    A.values[2, 3, 0, 1] = 0.5j        # without the conjugate mirror entry
    with pytest.raises(CoefficientError, match="Hermitian"):
        validate_coefficients(A, identity_field(grid, "T"))


def test_nonpositive_rejected(grid):
    A = constant_field(grid, [[1, 0], [0, -0.1]])
    with pytest.raises(CoefficientError, match="positive definite"):
        validate_coefficients(A, identity_field(grid, "T"))


def test_grid_mismatch_rejected(grid):
    other = build_grid(1.0, 1.0, 5, 8)
    with pytest.raises(CoefficientError, match="different grids"):
        validate_coefficients(identity_field(grid), identity_field(other, "T"))


def test_probe_identity(grid):
    A, T = identity_field(grid), identity_field(grid, "T")
    out = coercivity_probe(A, T, 0.1, [[1, 0]], grid=grid)
    assert out["im_margin"] == pytest.approx(1.0)
    assert out["re_ratio_min"] == pytest.approx(1.0)
    assert out["re_ratio_max"] == pytest.approx(1.0)


def test_probe_random_hermitian_pair(grid):
    rng = np.random.default_rng(3)
    A = smooth_field(grid, 0.3)
    T = smooth_field(grid, 0.2, "T")
    rep = validate_coefficients(A, T)
    probes = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    out = coercivity_probe(A, T, 0.05, probes, grid=grid)
    assert out["im_margin"] >= rep.c_T - 1e-12


def test_probe_rejects_zero_vector(grid):
    with pytest.raises(ValueError, match="zero probe"):
        coercivity_probe(identity_field(grid), identity_field(grid, "T"), 0.1,
                         [[0, 0]], grid=grid)


def test_a11_real_and_coercive(grid):
    A = smooth_field(grid, 0.3)
    rep = validate_coefficients(A, identity_field(grid, "T"))
    a11 = A.a11(grid)
    assert np.isrealobj(a11)
    assert (a11 >= rep.c_A - 1e-14).all()


# ---------------------------------------------------------------------------
# plasma generator
# ---------------------------------------------------------------------------

def test_admissible_range_endpoints():
    p = PlasmaParams(omega=2.0, omega_c=1.0)
    assert p.D_I == pytest.approx(0.5)
    lo, hi = p.s_range()
    assert lo == pytest.approx(-1.0)
    assert hi == pytest.approx(1.0 / 3.0)


def test_delta_s_at_s_zero():
    p = PlasmaParams(omega=2.0, omega_c=1.0)
    ds, dd = _deltas(p, np.array(0.0))
    assert ds == pytest.approx(5.0 / 6.0)      # (w^2+wc^2)/(w (w^2-wc^2))
    assert dd == pytest.approx(-2.0 / 3.0)


def test_uniform_zero_s_tensors_validate(grid):
    p = PlasmaParams(omega=2.0, omega_c=1.0, S_profile=0.0)
    S, A, T = plasma_tensors(p, grid)
    rep = validate_coefficients(A, T)
    assert rep.c_A > 0 and rep.c_T > 0
    # on the interface the leading tensor is [[1, i D],[-i D, 1]]/D^2 up sign
    d = p.D_I
    expected = np.array([[1.0, 1j * d], [-1j * d, 1.0]]) / d**2
    assert np.allclose(A.values[0, 0], expected)


def test_s_out_of_range_rejected(grid):
    p = PlasmaParams(omega=2.0, omega_c=1.0, S_profile=0.9)
    with pytest.raises(CoefficientError, match="admissible range"):
        plasma_tensors(p, grid)


def test_omega_ordering_rejected(grid):
    with pytest.raises(CoefficientError, match="omega"):
        plasma_tensors(PlasmaParams(omega=1.0, omega_c=2.0), grid)


def test_native_tensors_negative_definite(grid):
    p = PlasmaParams(omega=2.0, omega_c=1.0, S_profile=0.1)
    S = p.validate(grid)
    for m in (_a_matrix(p, S), _t_matrix(p, S)):
        tr = (m[..., 0, 0] + m[..., 1, 1]).real
        det = (m[..., 0, 0] * m[..., 1, 1] - np.abs(m[..., 0, 1]) ** 2).real
        assert (tr < 0).all() and (det > 0).all()


def test_second_order_remainder(grid):
    x = np.broadcast_to(np.linspace(-0.2, 0.2, grid.n_xnodes)[:, None],
                        (grid.n_xnodes, grid.ny))
    p = PlasmaParams(omega=2.0, omega_c=1.0, S_profile=x)
    ratio = expansion_remainder_ratio(p, grid, 1e-2)
    assert 3.5 <= ratio <= 4.5


def test_full_tensor_consistent_at_nu_zero(grid):
    p = PlasmaParams(omega=2.0, omega_c=1.0, S_profile=0.05)
    S = p.validate(grid)
    lead = S[..., None, None] * _a_matrix(p, S)
    assert np.allclose(full_perturbed_tensor(p, grid, 0.0), lead, atol=1e-13)
