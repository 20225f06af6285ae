import pytest
from hypothesis import given, settings, strategies as st

from draps.core import Cluster, ContainerInstance, ContainerState, GiB, ResourceKind, ResourceVector, ServiceSpec
from draps.demand import KnownServiceRegistry
from draps.events import EventLog
from draps.migration import (
    AlertMsg,
    DanglingReference,
    MigrationDecision,
    execute_migration,
    handle_alert,
    self_examine,
)
from draps.schedulers import FilterSet
from helpers import worker


def cluster_with(placed, workers=None, services=("s",)):
    """``placed`` maps container id -> (service, worker)."""
    cl = Cluster(workers or [worker("w1", 4, 1), worker("w2", 8, 4), worker("w3", 16, 8)],
                 [ServiceSpec(s, s) for s in services])
    for cid, (svc, wid) in placed.items():
        cl.add_container(ContainerInstance(cid, svc))
        cl.host(cid, wid)
    return cl


def test_self_examine_below_threshold_alerts_on_worst_kind():
    w = worker("w1", 4, 1)
    w.hosted.update({"a", "b"})
    usage = {"a": ResourceVector(1 * GiB, 0.5), "b": ResourceVector(2.8 * GiB, 0.2)}
    alert = self_examine(w, usage, 0.10, tick=7)
    assert alert == AlertMsg("w1", ResourceKind.MEMORY, "b", 7)


def test_self_examine_quiet_at_or_above_threshold():
    w = worker("w1", 4, 1)
    w.hosted.add("a")
    # exactly a quarter of cpu left is not below a 0.25 threshold
    assert self_examine(w, {"a": ResourceVector(0, 0.75)}, 0.25) is None
    assert self_examine(w, {"a": ResourceVector(0, 0.875)}, 0.25) is not None
    assert self_examine(w, {}, 0.10) is None


def test_self_examine_tie_on_usage_picks_lowest_id():
    w = worker("w1", 4, 1)
    w.hosted.update({"b", "a"})
    u = ResourceVector(0, 0.5)
    assert self_examine(w, {"b": u, "a": u}, 0.10).container == "a"


def test_self_examine_cooldown():
    w = worker("w1", 4, 1)
    w.hosted.add("a")
    hot = {"a": ResourceVector(0, 0.99)}
    assert self_examine(w, hot, 0.10, tick=20, last_alert_tick=10, cooldown_ticks=15) is None
    assert self_examine(w, hot, 0.10, tick=25, last_alert_tick=10, cooldown_ticks=15) is not None


@pytest.mark.parametrize("theta", [0.0, 1.0, -0.1])
def test_self_examine_threshold_range(theta):
    w = worker("w1")
    w.hosted.add("a")
    with pytest.raises(ValueError):
        self_examine(w, {"a": ResourceVector()}, theta)


def test_handle_alert_prefers_replica_free_worker():
    cl = cluster_with({"a": ("s", "w1"), "b": ("s", "w3")})
    reg = KnownServiceRegistry()
    reg.register("s")
    avail = {"w2": ResourceVector(1 * GiB, 3, 1, 1), "w3": ResourceVector(10 * GiB, 7, 1, 1)}
    d = handle_alert(AlertMsg("w1", ResourceKind.CPU, "a"), cl, reg, avail)
    # w3 has more cpu but already hosts a replica
    assert d == MigrationDecision("a", "w1", "w2")


def test_handle_alert_global_service_falls_back_to_all_workers():
    cl = cluster_with({"a": ("s", "w1"), "b": ("s", "w2"), "c": ("s", "w3")})
    reg = KnownServiceRegistry(warmup_samples=1)
    reg.register("s")
    reg.record_usage("s", "a", ResourceVector(1 * GiB, 0.01, 0, 0), 0)  # memory dominant
    avail = {"w2": ResourceVector(6 * GiB, 4, 1, 1), "w3": ResourceVector(5 * GiB, 8, 1, 1)}
    d = handle_alert(AlertMsg("w1", ResourceKind.CPU, "a"), cl, reg, avail)
    assert d.target == "w2"


def test_handle_alert_single_worker_has_no_target():
    cl = cluster_with({"a": ("s", "w1")}, workers=[worker("w1")])
    reg = KnownServiceRegistry()
    reg.register("s")
    d = handle_alert(AlertMsg("w1", ResourceKind.CPU, "a"), cl, reg, {})
    assert d.target is None and d.reason == "no-worker"


def test_handle_alert_respects_filters():
    ws = [worker("w1"), worker("w2", ready=False), worker("w3")]
    cl = cluster_with({"a": ("s", "w1")}, workers=ws)
    reg = KnownServiceRegistry()
    reg.register("s")
    avail = {"w2": ResourceVector(4 * GiB, 1, 1e8, 1e8), "w3": ResourceVector(0.1 * GiB, 0.1, 1, 1)}
    assert handle_alert(AlertMsg("w1", ResourceKind.CPU, "a"), cl, reg, avail).target == "w3"
    assert handle_alert(AlertMsg("w1", ResourceKind.CPU, "a"), cl, reg, avail, FilterSet.none()).target == "w2"


def test_handle_alert_dangling_references():
    cl = cluster_with({"a": ("s", "w1")})
    reg = KnownServiceRegistry()
    reg.register("s")
    with pytest.raises(DanglingReference):
        handle_alert(AlertMsg("w9", ResourceKind.CPU, "a"), cl, reg, {})
    with pytest.raises(DanglingReference):
        handle_alert(AlertMsg("w2", ResourceKind.CPU, "a"), cl, reg, {})


def test_decision_cannot_target_source():
    with pytest.raises(ValueError):
        MigrationDecision("a", "w1", "w1")


def test_execute_migration_moves_and_keeps_phase():
    cl = cluster_with({"a": ("s", "w1")})
    cl.containers["a"].phase_offset = 17
    log = EventLog()
    new = execute_migration(cl, MigrationDecision("a", "w1", "w2"), 40, log, "a.m1")
    assert new.worker == "w2" and new.phase_offset == 17
    assert cl.containers["a"].state is ContainerState.KILLED
    assert [e.event for e in log] == ["migrate", "kill"]
    assert log.events[1].detail == "migrated"
    assert len(cl.running()) == 1


def test_execute_migration_aborts_on_dead_target():
    cl = cluster_with({"a": ("s", "w1")})
    cl.workers["w2"].alive = False
    log = EventLog()
    assert execute_migration(cl, MigrationDecision("a", "w1", "w2"), 5, log, "a.m1") is None
    assert [e.event for e in log] == ["migrate_abort"]
    assert cl.containers["a"].worker == "w1" and cl.containers["a"].state is ContainerState.RUNNING
    assert "a.m1" not in cl.containers


def test_execute_migration_aborts_when_container_left():
    cl = cluster_with({"a": ("s", "w1")})
    cl.kill("a")
    log = EventLog()
    assert execute_migration(cl, MigrationDecision("a", "w1", "w3"), 5, log, "a.m1") is None
    assert log.events[0].detail == "container no longer on source"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["w1", "w2", "w3"]), min_size=1, max_size=8), st.data())
def test_migration_conserves_running_containers(hosts, data):
    cl = cluster_with({f"c{i}": ("s", w) for i, w in enumerate(hosts)})
    i = data.draw(st.integers(0, len(hosts) - 1))
    src = hosts[i]
    dst = data.draw(st.sampled_from([w for w in ("w1", "w2", "w3") if w != src]))
    before = len(cl.running())
    execute_migration(cl, MigrationDecision(f"c{i}", src, dst), 0, EventLog(), "moved")
    assert len(cl.running()) == before
    on = [w.id for w in cl.workers.values() for c in w.hosted if c == "moved"]
    assert on == [dst]
    for c in cl.running():
        assert sum(c.id in w.hosted for w in cl.workers.values()) == 1
