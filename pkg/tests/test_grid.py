import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from lapres import build_grid, interface_dofs


def test_uniform_partition():
    g = build_grid(1.0, 1.0, 2, 4)
    assert np.array_equal(g.x_nodes, [-1.0, -0.5, 0.0, 0.5, 1.0])


def test_interface_node_bitwise_zero():
    g = build_grid(1.0, 1.0, 3, 4)
    assert g.x_nodes[3] == 0.0


@pytest.mark.parametrize("bad", [dict(a=1, ell=1, nx_half=0, ny=4),
                                 dict(a=1, ell=1, nx_half=2, ny=5),
                                 dict(a=1, ell=1, nx_half=2, ny=2),
                                 dict(a=-1, ell=1, nx_half=2, ny=4),
                                 dict(a=1, ell=0, nx_half=2, ny=4)])
def test_degenerate_inputs_rejected(bad):
    with pytest.raises(ValueError):
        build_grid(**bad)


def test_interface_dofs_count_and_location():
    for ny in (4, 8):
        g = build_grid(1.0, 1.0, 2, ny)
        d = interface_dofs(g)
        assert len(d) == ny
        x = np.repeat(g.x_nodes, g.ny)
        assert (x[d] == 0.0).all()
        assert set(d) <= set(range(g.n_dofs))


@settings(max_examples=25, deadline=None)
@given(nx=st.integers(2, 40), ny=st.sampled_from([4, 6, 8, 16]),
       a=st.floats(0.1, 10), ell=st.floats(0.1, 10))
def test_grid_invariants(nx, ny, a, ell):
    g = build_grid(a, ell, nx, ny)
    # exactly one x node at zero, separating the two signs
    assert np.count_nonzero(g.x_nodes == 0.0) == 1
    assert (g.x_nodes[:g.ix_interface] < 0).all()
    assert (g.x_nodes[g.ix_interface + 1:] > 0).all()
    # periodic wrap of the dof map
    for i in (0, g.ix_interface, g.n_xnodes - 1):
        assert g.dof(i, ny) == g.dof(i, 0)
    assert g.h_x > 0 and g.h_y > 0
    assert g.n_xnodes == 2 * nx + 1
