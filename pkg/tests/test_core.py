import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from draps.core import (
    KINDS,
    Cluster,
    ContainerInstance,
    ContainerState,
    GiB,
    InvalidCapacity,
    ResourceKind,
    ResourceVector,
    ServiceSpec,
    vector_mean,
    vector_normalize,
)
from helpers import worker

amount = st.floats(min_value=0, max_value=1e12, allow_nan=False, allow_infinity=False)
vectors = st.builds(ResourceVector, amount, amount, amount, amount)
limits = st.builds(ResourceVector, *[st.floats(min_value=1e-3, max_value=1e12)] * 4)


def test_kind_order_is_canonical():
    assert [k.label for k in KINDS] == ["Memory", "Cpu", "Network", "BlockIo"]
    assert ResourceKind.parse("block_io") is ResourceKind.BLOCK_IO
    assert ResourceKind.parse("CPU") is ResourceKind.CPU


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_vector_rejects_invalid_components(bad):
    with pytest.raises(ValueError):
        ResourceVector(memory=bad)


def test_normalize_identity_and_zero():
    cap = ResourceVector(4 * GiB, 4.0, 1.0, 1.0)
    assert vector_normalize(cap, cap).tolist() == [1.0, 1.0, 1.0, 1.0]
    assert vector_normalize(ResourceVector(), cap).tolist() == [0.0, 0.0, 0.0, 0.0]


def test_normalize_forced_division():
    v = ResourceVector(2 * GiB, 1.0, 0, 0)
    lim = ResourceVector(4 * GiB, 4.0, 1, 1)
    assert vector_normalize(v, lim).tolist() == [0.5, 0.25, 0.0, 0.0]


def test_normalize_may_exceed_one():
    assert vector_normalize(ResourceVector(cpu=3.0), ResourceVector(1, 1, 1, 1))[1] == 3.0


@pytest.mark.parametrize("lim", [ResourceVector(0, 1, 1, 1), ResourceVector(1, 1, 1, 0)])
def test_normalize_rejects_degenerate_limits(lim):
    with pytest.raises(InvalidCapacity):
        vector_normalize(ResourceVector(1, 1, 1, 1), lim)


@given(vectors, limits, st.floats(min_value=0, max_value=1e3))
def test_normalize_commutes_with_scaling(v, lim, c):
    np.testing.assert_allclose(vector_normalize(c * v, lim), c * vector_normalize(v, lim), rtol=1e-9, atol=1e-300)


def test_mean_singleton_and_pair():
    v = ResourceVector(1, 2, 3, 4)
    assert vector_mean([v]) == v
    got = vector_mean([ResourceVector(2 * GiB), ResourceVector(4 * GiB)])
    assert got == ResourceVector(3 * GiB)


def test_mean_empty_is_an_error():
    with pytest.raises(ValueError):
        vector_mean([])


@given(st.lists(vectors, min_size=1, max_size=12), st.randoms(use_true_random=False))
def test_mean_is_permutation_invariant(vs, rnd):
    shuffled = list(vs)
    rnd.shuffle(shuffled)
    np.testing.assert_allclose(vector_mean(vs).as_array(), vector_mean(shuffled).as_array(), rtol=1e-12)


def test_addition_and_scaling_stay_valid():
    a, b = ResourceVector(1, 2, 3, 4), ResourceVector(4, 3, 2, 1)
    assert (a + b).as_tuple() == (5, 5, 5, 5)
    assert (0.5 * a).as_tuple() == (0.5, 1, 1.5, 2)
    assert a[ResourceKind.NETWORK] == 3


def test_worker_capacity_must_be_positive():
    with pytest.raises(InvalidCapacity):
        worker("w", 4, 0)


def test_cluster_host_and_kill_keep_single_placement():
    cl = Cluster([worker("w1"), worker("w2")], [ServiceSpec("s", "t")])
    cl.add_container(ContainerInstance("c1", "s"))
    cl.host("c1", "w2")
    c = cl.containers["c1"]
    assert c.state is ContainerState.RUNNING and c.worker == "w2"
    assert [w.id for w in cl.workers.values() if "c1" in w.hosted] == ["w2"]
    with pytest.raises(ValueError):
        cl.host("c1", "w1")
    cl.kill("c1")
    assert c.state is ContainerState.KILLED
    assert not cl.workers["w2"].hosted


def test_cluster_rejects_dead_target():
    cl = Cluster([worker("w1", alive=False)], [ServiceSpec("s", "t")])
    cl.add_container(ContainerInstance("c1", "s"))
    with pytest.raises(ValueError):
        cl.host("c1", "w1")
    assert cl.containers["c1"].state is ContainerState.PENDING
