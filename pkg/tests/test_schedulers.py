import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from draps.core import GiB, ResourceKind, ResourceVector, ServiceSpec
from draps.demand import KnownServiceRegistry
from draps.schedulers import (
    FilterSet,
    NoCandidates,
    SchedulerKind,
    apply_filters,
    mean_available_fraction,
    place,
    place_binpack,
    place_draps,
    place_random,
    place_spread,
    system_limits,
)
from helpers import worker


def hosting(w, n):
    w.hosted.update(f"{w.id}-c{i}" for i in range(n))
    return w


def known_registry(service, usage):
    reg = KnownServiceRegistry(warmup_samples=1)
    reg.register(service)
    reg.record_usage(service, "c0", usage, 0)
    return reg


# -- filters ---------------------------------------------------------------

def test_filters_drop_unready_dead_and_mismatched():
    ws = [
        worker("w1", ready=False),
        worker("w2", alive=False),
        worker("w3", labels={"ssd"}),
        worker("w4", plugins={"overlay"}),
        worker("w5", labels={"ssd"}, plugins={"overlay"}),
    ]
    task = ServiceSpec("s", "t", constraints=frozenset({"ssd"}), required_plugins=frozenset({"overlay"}))
    assert [w.id for w in apply_filters(task, ws)] == ["w5"]
    assert [w.id for w in apply_filters(task, ws, filters=FilterSet.none())] == ["w1", "w3", "w4", "w5"]


def test_resource_filter_uses_reservations():
    ws = [worker("w1", 4), worker("w2", 8)]
    task = ServiceSpec("s", "t", reservation=ResourceVector(3 * GiB))
    res = {"w1": ResourceVector(2 * GiB), "w2": ResourceVector(5 * GiB)}
    assert [w.id for w in apply_filters(task, ws, res)] == ["w2"]
    res["w2"] = ResourceVector(5.5 * GiB)
    assert apply_filters(task, ws, res) == []
    # filling a worker exactly to capacity is allowed
    res["w2"] = ResourceVector(5 * GiB)
    assert [w.id for w in apply_filters(task, ws, res)] == ["w2"]


# -- baseline strategies ---------------------------------------------------

def test_spread_picks_fewest_containers_then_lowest_id():
    ws = [hosting(worker("w1"), 3), hosting(worker("w2"), 1), hosting(worker("w3"), 1)]
    assert place_spread(ws) == "w2"
    assert place_spread(list(reversed(ws))) == "w2"


def test_binpack_picks_most_containers_then_lowest_id():
    ws = [hosting(worker("w1"), 1), hosting(worker("w2"), 4), hosting(worker("w3"), 4)]
    assert place_binpack(ws) == "w2"


def test_strategies_reject_empty_candidate_list():
    for fn in (place_spread, place_binpack):
        with pytest.raises(NoCandidates):
            fn([])
    with pytest.raises(NoCandidates):
        place_random([], np.random.default_rng(0))


def test_random_is_uniform():
    ws = [worker(f"w{i}") for i in range(1, 5)]
    rng = np.random.default_rng(12345)
    draws = [place_random(ws, rng) for _ in range(10_000)]
    counts = np.array([draws.count(w.id) for w in ws])
    # 150 is about 3.5 binomial standard deviations (sigma = 43.3)
    assert np.all(np.abs(counts - 2500) <= 150), counts
    chi2 = float(((counts - 2500) ** 2 / 2500).sum())
    assert chi2 < 16.27  # chi-square, 3 dof, p = 0.001


def test_random_is_reproducible():
    ws = [worker(f"w{i}") for i in range(1, 5)]
    a = [place_random(ws, np.random.default_rng(3)) for _ in range(5)]
    b = [place_random(ws, np.random.default_rng(3)) for _ in range(5)]
    assert a == b


# -- DRAPS -----------------------------------------------------------------

def test_draps_known_service_takes_most_available_dominant_kind():
    ws = [worker("w1", 16, 8), worker("w2", 16, 8), worker("w3", 16, 8)]
    reg = known_registry("pi", ResourceVector(0.05 * GiB, 0.9, 0, 0))
    avail = {
        "w1": ResourceVector(2 * GiB, 7.2, 1e8, 1e8),
        "w2": ResourceVector(10 * GiB, 3.1, 1e8, 1e8),
        "w3": ResourceVector(15 * GiB, 0.5, 1e8, 1e8),
    }
    d = place_draps(ServiceSpec("pi", "t"), ws, reg, avail, container="pi-1")
    assert reg.cached_dominant("pi") is ResourceKind.CPU
    assert d.worker == "w1" and d.container == "pi-1"


def test_draps_unknown_service_matches_exhaustive_scan():
    ws = [worker("w1", 4, 1), worker("w2", 8, 4), worker("w3", 16, 8)]
    avail = {
        "w1": ResourceVector(3 * GiB, 0.9, 6e7, 9e7),
        "w2": ResourceVector(2 * GiB, 1.0, 9e7, 1e7),
        "w3": ResourceVector(10 * GiB, 2.0, 2e7, 5e7),
    }
    reg = KnownServiceRegistry()
    reg.register("new")
    got = place_draps(ServiceSpec("new", "t"), ws, reg, avail).worker
    scores = {w.id: sum(avail[w.id].as_array() / w.capacity.as_array()) / 4 for w in ws}
    assert got == max(sorted(scores), key=scores.get)
    assert got == "w1"


def test_draps_ties_go_to_lowest_id():
    ws = [worker("w2"), worker("w1"), worker("w3")]
    reg = KnownServiceRegistry()
    reg.register("new")
    avail = {w.id: w.capacity for w in ws}
    assert place_draps(ServiceSpec("new", "t"), ws, reg, avail).worker == "w1"


def test_draps_reports_rejection_when_all_filtered():
    ws = [worker("w1", ready=False)]
    reg = KnownServiceRegistry()
    reg.register("s")
    d = place_draps(ServiceSpec("s", "t"), ws, reg, {}, container="s-0")
    assert not d.assigned and d.reason == "no-worker"


def test_system_limits_skip_dead_workers():
    ws = [worker("w1", 4, 1), worker("w2", 8, 4, alive=False)]
    assert system_limits(ws) == ws[0].capacity


def test_place_dispatch_needs_its_inputs():
    ws = [worker("w1")]
    task = ServiceSpec("s", "t")
    with pytest.raises(ValueError):
        place(SchedulerKind.DRAPS, task, ws)
    with pytest.raises(ValueError):
        place(SchedulerKind.RANDOM, task, ws)
    assert place(SchedulerKind.SPREAD, task, ws).worker == "w1"
    assert place(SchedulerKind.BINPACK, task, [worker("w1", ready=False)]).reason == "no-worker"


def test_scheduler_kind_parse():
    assert SchedulerKind.parse(" DRAPS ") is SchedulerKind.DRAPS
    with pytest.raises(ValueError, match="spread"):
        SchedulerKind.parse("roundrobin")


# -- invariants ------------------------------------------------------------

frac = st.floats(min_value=0, max_value=1, allow_nan=False)
worker_states = st.lists(
    st.tuples(st.integers(0, 6), st.booleans(), st.booleans(), st.tuples(frac, frac, frac, frac)),
    min_size=1, max_size=6,
)


@settings(max_examples=80, deadline=None)
@given(worker_states, st.sampled_from(list(SchedulerKind)), st.booleans(), st.integers(0, 2**32 - 1))
def test_choice_is_always_a_filtered_candidate(states, kind, known, seed):
    ws, avail = [], {}
    for i, (n, ready, alive, fr) in enumerate(states):
        w = hosting(worker(f"w{i}", 8, 4, 1e8, 2e8, ready=ready, alive=alive), n)
        ws.append(w)
        avail[w.id] = ResourceVector.from_array(np.array(fr) * w.capacity.as_array())
    reg = KnownServiceRegistry(warmup_samples=1)
    reg.register("s")
    if known:
        reg.record_usage("s", "c", ResourceVector(1 * GiB, 0.5, 1e6, 1e6), 0)
    task = ServiceSpec("s", "t")
    d = place(kind, task, ws, registry=reg, availability=avail, rng=np.random.default_rng(seed))
    allowed = {w.id for w in apply_filters(task, ws)}
    if allowed:
        assert d.worker in allowed
    else:
        assert not d.assigned


@settings(max_examples=80, deadline=None)
@given(worker_states)
def test_unknown_draps_choice_maximises_mean_fraction(states):
    ws, avail = [], {}
    for i, (_, _, _, fr) in enumerate(states):
        w = worker(f"w{i}", 8, 4, 1e8, 2e8)
        ws.append(w)
        avail[w.id] = ResourceVector.from_array(np.array(fr) * w.capacity.as_array())
    reg = KnownServiceRegistry()
    reg.register("s")
    got = place_draps(ServiceSpec("s", "t"), ws, reg, avail).worker
    best = max(mean_available_fraction(w, avail[w.id]) for w in ws)
    assert mean_available_fraction(ws[[w.id for w in ws].index(got)], avail[got]) == best
