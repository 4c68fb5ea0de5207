import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from giantdf.topology import (
    ClassificationError,
    CouplingPoint,
    Layout,
    LayoutError,
    Topology,
    braided,
    classify_two_atom,
    df_residual,
    equally_spaced,
    interference_sums,
    is_df,
    is_interleaved,
    layout_from_phases,
    nested,
    phases_from_positions,
    random_df_layout,
    require_topology,
    serial,
)

PI = math.pi


def test_layout_from_phases_assigns_legs_in_order():
    lay = layout_from_phases([0, 1, 0, 1], [0, 1, 2, 3])
    assert lay.n_atoms == 2
    assert [p.leg for p in lay.points] == [0, 0, 1, 1]
    assert lay.points_of(1) == [1, 3]
    assert lay.legs_per_atom() == [2, 2]
    assert lay.unidirectional


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(points=(CouplingPoint(0, 1, 0.0),), n_atoms=1),
        dict(points=(CouplingPoint(1, 0, 0.0),), n_atoms=1),
        dict(points=(CouplingPoint(0, 0, 0.0),), n_atoms=2),
        dict(points=(CouplingPoint(0, 0, 0.0),), n_atoms=1, gamma_right=-1.0),
    ],
)
def test_layout_validation(kwargs):
    with pytest.raises(LayoutError):
        Layout(**kwargs)


def test_phases_from_positions_sorts_and_scales():
    lay = phases_from_positions(2.0, [(1, 0.5), (0, 0.0), (0, 1.0)])
    assert lay.atom_pattern == (0, 1, 0)
    assert np.allclose(lay.phases, [0.0, 1.0, 2.0])


@pytest.mark.parametrize(
    "k0,pos",
    [(1.0, [(0, 0.0), (1, 0.0)]), (0.0, [(0, 0.0)]), (1.0, [(0, 0.0), (2, 1.0)]), (1.0, [])],
)
def test_phases_from_positions_errors(k0, pos):
    with pytest.raises(LayoutError):
        phases_from_positions(k0, pos)


def test_reduced_phase():
    assert CouplingPoint(0, 0, -0.5).reduced_phase == pytest.approx(2 * PI - 0.5)
    assert CouplingPoint(0, 0, 5 * PI).reduced_phase == pytest.approx(PI)
    assert 0 <= CouplingPoint(0, 0, -1e-18).reduced_phase < 2 * PI


@pytest.mark.parametrize(
    "lay,expected",
    [
        (serial(), True),
        (nested(), True),
        (braided(), True),
        (layout_from_phases([0, 0], [0, PI]), True),
        (layout_from_phases([0, 0], [0, 3 * PI]), True),
        (equally_spaced([0, 0, 0], 2 * PI / 3), True),
        (layout_from_phases([0, 0], [0, PI / 2]), False),
        (layout_from_phases([0], [0.0]), False),
        (serial(step=PI / 2), False),
    ],
)
def test_df_condition(lay, expected):
    assert is_df(lay) is expected


def test_single_point_atom_never_df_and_residual_one():
    rep = df_residual(layout_from_phases([0, 1, 1], [0, 0, PI]))
    assert rep.per_atom_residual[0] == pytest.approx(1.0)
    assert rep.per_atom_residual[1] <= 1e-15
    assert not rep.is_df


def test_interference_sums_are_conjugate():
    lay = layout_from_phases([0, 1, 0], [0.3, 1.1, 2.0])
    assert np.allclose(interference_sums(lay, -1), np.conj(interference_sums(lay, +1)))


@pytest.mark.parametrize(
    "pattern,topo",
    [
        ([0, 0, 1, 1], Topology.SERIAL),
        ([1, 1, 0, 0], Topology.SERIAL),
        ([0, 1, 1, 0], Topology.NESTED),
        ([1, 0, 0, 1], Topology.NESTED),
        ([0, 1, 0, 1], Topology.BRAIDED),
        ([1, 0, 1, 0], Topology.BRAIDED),
        ([0, 1, 1, 1], Topology.OTHER),
    ],
)
def test_classification(pattern, topo):
    lay = equally_spaced(pattern, PI)
    assert classify_two_atom(lay) is topo


def test_classification_errors():
    with pytest.raises(ClassificationError):
        classify_two_atom(layout_from_phases([0, 0], [0, PI]))
    with pytest.raises(ClassificationError):
        require_topology(serial(), Topology.BRAIDED)
    assert require_topology(braided(), Topology.BRAIDED) is Topology.BRAIDED


def test_interleaving():
    assert is_interleaved(braided(), 0) and is_interleaved(braided(), 1)
    assert is_interleaved(nested(), 0) and not is_interleaved(nested(), 1)
    assert not is_interleaved(serial(), 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.booleans())
def test_random_df_layout_is_df(seed, n_atoms, three_legs):
    rng = np.random.default_rng(seed)
    legs = [3 if three_legs and j == 0 else 2 for j in range(n_atoms)]
    lay = random_df_layout(rng, n_atoms, legs)
    assert is_df(lay)
    assert sorted(lay.legs_per_atom()) == sorted(legs)
    # atoms are labelled by first appearance
    firsts = [lay.points_of(j)[0] for j in range(n_atoms)]
    assert firsts == sorted(firsts)


def test_random_df_layout_rejects_many_legs():
    with pytest.raises(LayoutError):
        random_df_layout(np.random.default_rng(0), 1, [4])
