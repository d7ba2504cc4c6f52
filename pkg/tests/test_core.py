"""Tests for vectors, hyperboxes, system parameters and reliable-broadcast messages."""

import math
from itertools import combinations

import numpy as np
import pytest

from adversary.behaviors import AdversaryKind, AdversarySpec
from core.errors import (
    DimensionMismatchError, EmptyInputError, EquivocationError, InvalidParamsError, NonFiniteError,
)
from core.hyperbox import Hyperbox, bounding_box, box_intersection, e_max
from core.messages import Broadcast, check_reliable
from core.params import AgreementInstance, SystemParams
from core.vector import TAU, as_vector, diameter, euclidean_distance, stack


def random_box(rng, d):
    a, b = rng.uniform(-3, 3, size=d), rng.uniform(-3, 3, size=d)
    return Hyperbox(np.minimum(a, b), np.maximum(a, b))


def intersect(a, b):
    if a is None or b is None:
        return None
    return box_intersection(a, b)


# ── vectors ────────────────────────────────────────────────────────


class TestVectors:

    def test_distance_zero(self):
        assert euclidean_distance((0, 0), (0, 0)) == 0.0

    def test_distance_345(self):
        assert euclidean_distance((0, 0), (3, 4)) == pytest.approx(5.0)

    def test_distance_unit_diagonal(self):
        assert euclidean_distance((1, 1, 1), (2, 2, 2)) == pytest.approx(math.sqrt(3))

    def test_distance_is_symmetric(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=4), rng.normal(size=4)
        assert euclidean_distance(a, b) == euclidean_distance(b, a)

    def test_distance_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            euclidean_distance((0, 0), (0, 0, 0))

    def test_as_vector_rejects_nan_and_inf(self):
        with pytest.raises(NonFiniteError):
            as_vector([0.0, float("nan")])
        with pytest.raises(NonFiniteError):
            as_vector([float("inf")])

    def test_as_vector_rejects_empty(self):
        with pytest.raises(EmptyInputError):
            as_vector([])

    def test_as_vector_is_read_only(self):
        v = as_vector([1.0, 2.0])
        with pytest.raises(ValueError):
            v[0] = 3.0

    def test_stack_rejects_mixed_dimensions(self):
        with pytest.raises(DimensionMismatchError):
            stack([(0, 0), (1, 1, 1)])

    def test_stack_rejects_empty(self):
        with pytest.raises(EmptyInputError):
            stack([])

    def test_stack_treats_flat_array_as_scalars(self):
        assert stack(np.array([1.0, 2.0, 3.0])).shape == (3, 1)


class TestDiameter:

    def test_singleton(self):
        assert diameter([(0, 0)]) == 0.0

    def test_right_triangle(self):
        assert diameter([(0, 0), (1, 0), (0, 1)]) == pytest.approx(math.sqrt(2))

    def test_matches_pair_scan(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(6, 3))
        brute = max(np.linalg.norm(pts[i] - pts[j]) for i, j in combinations(range(6), 2))
        assert diameter(pts) == pytest.approx(brute, rel=1e-12)

    def test_empty_set(self):
        with pytest.raises(EmptyInputError):
            diameter([])


# ── hyperboxes ─────────────────────────────────────────────────────


class TestHyperbox:

    def test_rejects_inverted_bounds(self):
        with pytest.raises(InvalidParamsError):
            Hyperbox([1.0], [0.0])

    def test_rejects_mismatched_bounds(self):
        with pytest.raises(DimensionMismatchError):
            Hyperbox([0.0, 0.0], [1.0])

    def test_membership(self):
        box = Hyperbox.from_intervals([(0, 1), (2, 3)])
        assert box.contains((0.5, 2.0))
        assert box.contains((1.0, 3.0))
        assert not box.contains((1.5, 2.5))
        assert box.contains((1.0 + 1e-10, 3.0), tol=TAU)

    def test_midpoint_and_e_max(self):
        box = Hyperbox.from_intervals([(0, 1), (2, 6)])
        np.testing.assert_array_equal(box.midpoint(), [0.5, 4.0])
        assert e_max(box) == 4.0

    def test_bounding_box(self):
        box = bounding_box([(0, 5), (2, 1), (1, 3)])
        assert box == Hyperbox([0, 1], [2, 5])

    def test_intervals(self):
        assert Hyperbox([0, 1], [2, 3]).intervals == [(0.0, 2.0), (1.0, 3.0)]


class TestBoxIntersection:

    def test_overlapping_squares(self):
        a = Hyperbox.from_intervals([(0, 2), (0, 2)])
        b = Hyperbox.from_intervals([(1, 3), (1, 3)])
        assert box_intersection(a, b) == Hyperbox.from_intervals([(1, 2), (1, 2)])

    def test_disjoint_intervals(self):
        assert box_intersection(Hyperbox([0], [1]), Hyperbox([2], [3])) is None

    def test_idempotent(self):
        box = Hyperbox.from_intervals([(0, 1), (-2, 5)])
        assert box_intersection(box, box) == box

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            box_intersection(Hyperbox([0], [1]), Hyperbox([0, 0], [1, 1]))

    def test_tolerance_collapses_near_miss(self):
        joined = box_intersection(Hyperbox([0], [1.0]), Hyperbox([1.0 + 1e-10], [2]), tol=TAU)
        assert joined is not None
        assert joined.lo[0] == joined.hi[0]
        assert box_intersection(Hyperbox([0], [1.0]), Hyperbox([1.0 + 1e-6], [2]), tol=TAU) is None

    def test_commutative_and_associative(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            a, b, c = (random_box(rng, 3) for _ in range(3))
            assert intersect(a, b) == intersect(b, a)
            assert intersect(intersect(a, b), c) == intersect(a, intersect(b, c))

    def test_membership_matches_both_boxes(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            a, b = random_box(rng, 2), random_box(rng, 2)
            both = box_intersection(a, b)
            for p in rng.uniform(-3, 3, size=(10, 2)):
                inside = both is not None and both.contains(p)
                assert inside == (a.contains(p) and b.contains(p))


# ── parameters and instances ───────────────────────────────────────


class TestSystemParams:

    def test_valid(self):
        params = SystemParams(n=10, t=3, f=2, d=4)
        assert params.quorum == 7
        assert params.honest_count == 8

    @pytest.mark.parametrize("n,t,f,d", [
        (9, 3, 0, 1),   # t = n/3
        (10, 1, 2, 1),  # f > t
        (10, 1, -1, 1),
        (10, 1, 1, 0),
        (0, 0, 0, 1),
    ])
    def test_invalid(self, n, t, f, d):
        with pytest.raises(InvalidParamsError):
            SystemParams(n, t, f, d)

    def test_single_node(self):
        assert SystemParams(1, 0, 0, 1).quorum == 1


class TestAgreementInstance:

    params = SystemParams(n=4, t=1, f=1, d=2)
    spec = AdversarySpec(AdversaryKind.CRASH, 1)

    def test_honest_count(self):
        with pytest.raises(InvalidParamsError):
            AgreementInstance(self.params, ((0, 0), (1, 1)), self.spec)

    def test_dimension(self):
        with pytest.raises(DimensionMismatchError):
            AgreementInstance(self.params, ((0, 0), (1, 1), (2, 2, 2)), self.spec)

    def test_adversary_size(self):
        with pytest.raises(InvalidParamsError):
            AgreementInstance(self.params, ((0, 0), (1, 1), (2, 2)), AdversarySpec.honest_only())

    def test_negative_seed(self):
        with pytest.raises(InvalidParamsError):
            AgreementInstance(self.params, ((0, 0), (1, 1), (2, 2)), self.spec, seed=-1)

    def test_equal_instances(self):
        a = AgreementInstance(self.params, ((0, 0), (1, 1), (2, 2)), self.spec, seed=5)
        assert a.honest_array.shape == (3, 2)
        np.testing.assert_array_equal(a.honest_array[2], [2, 2])


# ── messages ───────────────────────────────────────────────────────


class TestReliableBroadcast:

    def test_rejects_non_finite_vector(self):
        with pytest.raises(NonFiniteError):
            Broadcast(3, [float("nan"), 0.0], frozenset({0}))

    def test_equivocation_rejected(self):
        msgs = [Broadcast(3, [0.0], {0}), Broadcast(3, [1.0], {1})]
        with pytest.raises(EquivocationError):
            check_reliable(msgs, [3])

    def test_unknown_sender_rejected(self):
        with pytest.raises(InvalidParamsError):
            check_reliable([Broadcast(0, [0.0], {1})], [3])

    def test_sorted_by_sender(self):
        msgs = [Broadcast(4, [0.0], {0}), Broadcast(3, [1.0], {0, 1})]
        assert [m.sender for m in check_reliable(msgs, [3, 4])] == [3, 4]
