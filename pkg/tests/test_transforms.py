import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import sorted_cloud
from oracles import dense_transform
from ragft.errors import CountMismatchError
from ragft.hierarchy import BlockSchedule, build_binary_tree, build_tree
from ragft.io import VoxelizedCloud
from ragft.synthetic import random_cloud
from ragft.transforms import (
    Backend,
    blockgft_forward,
    blockgft_inverse,
    blockgft_plan,
    canonical_order,
    forward,
    inverse,
    make_plan,
    plan_for,
    raht_forward,
    raht_inverse,
    ragft_forward,
    ragft_inverse,
)


def test_two_level_constant_signal(nine_point_cloud):
    tree = build_tree(nine_point_cloud, BlockSchedule((2, 2)))
    coeffs = ragft_forward(nine_point_cloud, tree)
    assert coeffs.values[0, 0] == pytest.approx(3.0, abs=1e-12)
    np.testing.assert_allclose(coeffs.values[1:], 0, atol=1e-12)
    assert coeffs.level.tolist() == [0, 0, 0, 1, 1, 1, 1, 1, 1]
    assert coeffs.index.tolist() == [0, 1, 2, 1, 2, 1, 2, 3, 1]
    assert coeffs.block.tolist() == [0, 0, 0, 0, 0, 1, 1, 1, 2]
    assert coeffs.is_dc.tolist() == [True] + [False] * 8
    np.testing.assert_allclose(coeffs.weight, [9, 9, 9, 3, 3, 4, 4, 4, 2])


def test_canonical_order(nine_point_cloud):
    tree = build_tree(nine_point_cloud, BlockSchedule((2, 2)))
    assert canonical_order(tree) == [
        (0, 0, 0), (0, 0, 1), (0, 0, 2),
        (1, 0, 1), (1, 0, 2), (1, 1, 1), (1, 1, 2), (1, 1, 3), (1, 2, 1),
    ]


def test_single_point_roundtrip():
    cloud = sorted_cloud(3, [[1, 2, 3]], [[42.0, -1.0]], weights=[4.0])
    tree = build_tree(cloud, BlockSchedule.dyadic(3))
    coeffs = ragft_forward(cloud, tree)
    np.testing.assert_allclose(coeffs.values, [[42.0, -1.0]])  # one-node blocks are the identity
    np.testing.assert_allclose(ragft_inverse(coeffs, tree), cloud.attributes)


schedules = st.lists(st.sampled_from([1, 2, 3]), min_size=1, max_size=3).map(
    lambda logs: BlockSchedule(tuple(1 << k for k in logs)))


@given(schedules, st.integers(1, 200), st.integers(0, 2**32 - 1))
def test_matches_explicit_matrix_product(schedule, n, seed):
    rng = np.random.default_rng(seed)
    cloud = random_cloud(rng, n, schedule.total_bits, 2, random_weights=True)
    tree = build_tree(cloud, schedule)
    T, slot_to_pos = dense_transform(tree)
    np.testing.assert_allclose(T @ T.T, np.eye(cloud.count), atol=1e-9)
    coeffs = forward(make_plan(tree), cloud.attributes)
    np.testing.assert_allclose(coeffs.values, (T @ cloud.attributes)[slot_to_pos], atol=1e-8)


def test_one_sparse_inverse_is_a_basis_row(rng):
    cloud = random_cloud(rng, 150, 4, 1, random_weights=True)
    tree = build_tree(cloud, BlockSchedule((2, 8)))
    T, slot_to_pos = dense_transform(tree)
    plan = make_plan(tree)
    for slot in (0, 1, 17, 149):
        e = np.zeros(cloud.count)
        e[slot] = 1.0
        np.testing.assert_allclose(inverse(plan, e), T[slot_to_pos[slot]], atol=1e-10)


@pytest.mark.parametrize("backend,kw", [
    (Backend.RAGFT, {"schedule": BlockSchedule((4, 2, 4))}),
    (Backend.RAHT, {}),
    (Backend.BLOCKGFT, {"block": 4}),
])
def test_constant_signal_is_sparse(rng, backend, kw):
    cloud = random_cloud(rng, 300, 5)
    const = VoxelizedCloud(5, cloud.coords, np.full((cloud.count, 1), 9.0))
    plan = plan_for(const, backend, **kw)
    coeffs = forward(plan, const.attributes)
    ndc = plan.tree.sizes[0]
    np.testing.assert_allclose(coeffs.values[ndc:], 0, atol=1e-9)
    assert coeffs.is_dc.sum() == ndc


def test_weighted_constant_gives_single_dc(rng):
    cloud = random_cloud(rng, 200, 4, 1, random_weights=True)
    tree = build_tree(cloud, BlockSchedule((4, 4)))
    x = 2.0 * np.sqrt(cloud.weights)
    coeffs = forward(make_plan(tree), x)
    assert coeffs.values[0] == pytest.approx(2.0 * np.sqrt(cloud.weights.sum()))
    np.testing.assert_allclose(coeffs.values[1:], 0, atol=1e-9)


def test_raht_equals_ragft_on_binary_tree(rng):
    cloud = random_cloud(rng, 500, 4, 3, random_weights=True)
    closed = raht_forward(cloud)
    tree = build_binary_tree(cloud)
    eig = forward(make_plan(tree, Backend.RAHT), cloud.attributes)
    np.testing.assert_allclose(closed.values, eig.values, atol=1e-10)
    np.testing.assert_allclose(raht_inverse(closed, cloud), cloud.attributes, atol=1e-10)


def test_raht_butterfly_coefficients():
    cloud = sorted_cloud(1, [[0, 0, 0], [1, 0, 0]], [[10.0], [20.0]], weights=[1.0, 3.0])
    coeffs = raht_forward(cloud)
    a, b = np.sqrt(1 / 4), np.sqrt(3 / 4)
    np.testing.assert_allclose(coeffs.values[:, 0], [a * 10 + b * 20, -b * 10 + a * 20], atol=1e-12)


def test_blockgft_equals_truncated_unit_weight_ragft(rng):
    cloud = random_cloud(rng, 400, 5, 2, random_weights=True)
    coeffs = blockgft_forward(cloud, 8)
    unit = VoxelizedCloud(5, cloud.coords, cloud.attributes)
    tree = build_tree(unit, BlockSchedule.with_leaf_block(5, 8), levels=1)
    ref = forward(make_plan(tree), unit.attributes)
    np.testing.assert_allclose(coeffs.values, ref.values, atol=1e-12)
    assert coeffs.is_dc.sum() == tree.sizes[0] > 1
    np.testing.assert_allclose(blockgft_inverse(coeffs, cloud, 8), cloud.attributes, atol=1e-10)
    assert blockgft_plan(cloud, 8).tree.levels == 1


def test_count_mismatch(nine_point_cloud):
    plan = plan_for(nine_point_cloud, "ragft", BlockSchedule((2, 2)))
    with pytest.raises(CountMismatchError):
        forward(plan, np.ones(8))
    with pytest.raises(CountMismatchError):
        inverse(plan, np.ones(10))
