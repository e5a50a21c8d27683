"""
Distributed-system consequences of degraded storage: data-node liveness,
database latency, VM lifecycle latency, VM placement and replica migration.
"""

import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from models.calibration_models import VmInflation
from models.distsys_models import (
    Assignment, DbCluster, DbLatencyTable, Host, LEGAL_VM_TRANSITIONS, Node, NodeStatus,
    ReplicaMap, Scheduler, VirtualMachine, VMState,
)
from models.engine_models import EventRecord
from simulators.storage import StorageTarget
from utils.errors import ConfigurationError

NODE_EVENT = "node-event"
VM_EVENT = "vm-event"

# (available, monitored throughput fraction) per host id
HostHealth = Dict[str, Tuple[bool, float]]


def dfs_step(node: Node, storage: StorageTarget, now: float) -> List[EventRecord]:
    """Heartbeat check of one data node against its backing storage"""
    if node.status == NodeStatus.REMOVED or node.storage_id is None:
        return []
    if storage.is_failed(node.storage_id):
        status = NodeStatus.REMOVED
    elif storage.is_stalled(node.storage_id):
        status = NodeStatus.BLOCKED
    else:
        status = NodeStatus.LIVE
    if status == node.status:
        return []
    node.status = status
    return [EventRecord(now, NODE_EVENT, node.node_id, status.value)]


def latency_table(cluster: DbCluster) -> DbLatencyTable:
    try:
        return cluster.latency_model[cluster.underwater_node_count]
    except KeyError:
        known = ", ".join(str(k) for k in sorted(cluster.latency_model))
        raise ConfigurationError(
            f"no database latency table for {cluster.underwater_node_count} underwater nodes (have {known})")


def db_normalized_latency(cluster: DbCluster, delta_spl: float) -> Optional[float]:
    """Latency relative to the unattacked cluster; None once the cluster is out of service"""
    table = latency_table(cluster)
    if delta_spl > table.out_of_service_above_db:
        return None
    level = max(delta_spl, 0.0)
    xs = [x for x, _ in table.knots]
    ys = [y for _, y in table.knots]
    return max(1.0, float(np.interp(level, xs, ys)))


def vm_state_duration(vm_state: VMState, base_duration_s: float, delta_spl: float,
                      inflation: VmInflation = VmInflation(),
                      single_disk: bool = False) -> Optional[float]:
    """Time a VM spends in ``vm_state`` at a given level; None means the VM fails"""
    if base_duration_s <= 0:
        raise ValueError(f"base duration must be positive, got {base_duration_s}")
    if (vm_state == VMState.RUNNING and single_disk
            and delta_spl >= inflation.single_disk_failure_db):
        return None
    peak = inflation.max_inflation.get(vm_state.value, 0.0)
    if peak == 0.0 or delta_spl <= inflation.onset_db:
        return base_duration_s
    span = inflation.max_db - inflation.onset_db
    share = min(1.0, (delta_spl - inflation.onset_db) / span)
    return base_duration_s * (1.0 + peak * share)


def effective_weight(host: Host, storage_weight: float) -> float:
    return host.capacity * (1.0 - storage_weight + storage_weight * host.monitored_fraction)


def place_vm(scheduler: Scheduler, vm_id: str, now: float, available: Set[str],
             load: Dict[str, int]) -> Optional[str]:
    """Smooth weighted round-robin over available, non-full hosts.

    Returns the chosen host id, or None (the VM is queued).
    """
    candidates = [h for h in scheduler.hosts
                  if h.host_id in available and load.get(h.host_id, 0) < h.max_vms]
    if not candidates:
        scheduler.queue.append(vm_id)
        scheduler.assignment_log.append(Assignment(now, vm_id, None))
        return None

    weights = {h.host_id: effective_weight(h, scheduler.storage_weight) for h in candidates}
    total = sum(weights.values())
    for host in candidates:
        host.current_weight += weights[host.host_id]
    chosen = max(candidates, key=lambda h: h.current_weight)
    chosen.current_weight -= total
    load[chosen.host_id] = load.get(chosen.host_id, 0) + 1
    scheduler.assignment_log.append(Assignment(now, vm_id, chosen.host_id))
    return chosen.host_id


def drain_queue(scheduler: Scheduler, now: float, available: Set[str], load: Dict[str, int]) -> List[Tuple[str, str]]:
    """Retry queued VMs; returns (vm_id, host_id) pairs that were placed"""
    placed = []
    waiting, scheduler.queue = scheduler.queue, []
    for vm_id in waiting:
        host_id = place_vm(scheduler, vm_id, now, available, load)
        if host_id is None:
            # place_vm re-queued it; keep a single log entry per attempt
            continue
        placed.append((vm_id, host_id))
    return placed


def schedule_vms(scheduler: Scheduler, vm_batch: Sequence[Tuple[float, str]],
                 host_health_feed: Callable[[float], HostHealth]) -> List[Assignment]:
    """Place a batch of (instantiation_time, vm_id) in time order.

    The health feed is queried at each instantiation and sets every host's
    availability and monitored throughput fraction.
    """
    load: Dict[str, int] = {}
    for now, vm_id in sorted(vm_batch):
        health = host_health_feed(now)
        for host in scheduler.hosts:
            host.monitored_fraction = health.get(host.host_id, (True, 1.0))[1]
        available = {h for h, (ok, _) in health.items() if ok}
        drain_queue(scheduler, now, available, load)
        place_vm(scheduler, vm_id, now, available, load)
    return list(scheduler.assignment_log)


def host_shares(assignments: Iterable[Assignment]) -> Dict[str, int]:
    """Final placement count per host (queued VMs are keyed by '<queued>')"""
    final: Dict[str, Optional[str]] = {}
    for a in assignments:
        final[a.vm_id] = a.host_id
    counts: Dict[str, int] = {}
    for host_id in final.values():
        key = host_id or "<queued>"
        counts[key] = counts.get(key, 0) + 1
    return counts


class VmFleet:
    """Lifecycle of every instantiated VM, advanced per engine tick"""

    def __init__(self, base_durations: Dict[str, float], inflation: VmInflation,
                 logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)
        self.base_durations = {VMState(k): v for k, v in base_durations.items()}
        self.inflation = inflation
        self.vms: Dict[str, VirtualMachine] = {}

    def instantiate(self, vm_id: str, host_id: Optional[str], now: float) -> VirtualMachine:
        vm = VirtualMachine(vm_id=vm_id, host_id=host_id, instantiated_at=now,
                            state_entered_at={VMState.INIT.value: now})
        self.vms[vm_id] = vm
        return vm

    def assign(self, vm_id: str, host_id: str):
        self.vms[vm_id].host_id = host_id

    def _transition(self, vm: VirtualMachine, new_state: VMState, now: float) -> EventRecord:
        if new_state not in LEGAL_VM_TRANSITIONS[vm.state]:
            raise ValueError(f"illegal VM transition {vm.state.value} -> {new_state.value}")
        vm.state = new_state
        vm.progress = 0.0
        vm.state_entered_at[new_state.value] = now
        return EventRecord(now, VM_EVENT, vm.vm_id, new_state.value)

    def step(self, dt: float, now: float, host_level: Dict[str, float], host_stalled: Dict[str, bool],
             host_failed: Dict[str, bool], single_disk: Dict[str, bool]) -> List[EventRecord]:
        """Advance every placed VM by dt; ``now`` is the end of the step"""
        events = []
        for vm_id in sorted(self.vms):
            vm = self.vms[vm_id]
            if vm.is_terminal or vm.host_id is None:
                continue
            host = vm.host_id
            if vm.state == VMState.RUNNING:
                if host_failed.get(host, False):
                    events.append(self._transition(vm, VMState.BLOCKED, now))
                    continue
                if host_stalled.get(host, False):
                    continue
            duration = vm_state_duration(vm.state, self.base_durations[vm.state],
                                         host_level.get(host, 0.0), self.inflation,
                                         single_disk.get(host, False))
            if duration is None:
                events.append(self._transition(vm, VMState.FAILED, now))
                continue
            vm.progress += dt / duration
            if vm.progress >= 1.0 - 1e-12:
                next_state = {VMState.INIT: VMState.PROLOG, VMState.PROLOG: VMState.BOOT,
                              VMState.BOOT: VMState.RUNNING, VMState.RUNNING: VMState.DONE}[vm.state]
                events.append(self._transition(vm, next_state, now))
        return events

    def count_by_state(self) -> Dict[str, int]:
        counts = {s.value: 0 for s in VMState}
        for vm in self.vms.values():
            counts[vm.state.value] += 1
        return counts

    def state_durations(self) -> List[Dict[str, object]]:
        """Per VM, per completed state: the time spent in it"""
        order = [VMState.INIT, VMState.PROLOG, VMState.BOOT, VMState.RUNNING, VMState.DONE]
        rows = []
        for vm_id in sorted(self.vms):
            entered = self.vms[vm_id].state_entered_at
            for state, following in zip(order, order[1:]):
                if state.value in entered and following.value in entered:
                    rows.append({"vm": vm_id, "state": state.value,
                                 "duration_s": entered[following.value] - entered[state.value]})
        return rows


def rereplicate(replica_map: ReplicaMap, removed_node: str, healthy_nodes: Sequence[str],
                flagged: Iterable[str] = (), now: float = 0.0) -> Tuple[ReplicaMap, List[EventRecord]]:
    """Move replicas off a removed node onto healthy nodes the detector has not flagged"""
    if replica_map.replication_factor < 2:
        raise ValueError("re-replication needs a replication factor of at least 2")
    excluded = set(flagged) | {removed_node}
    result = replica_map.copy()
    events: List[EventRecord] = []
    usage: Dict[str, int] = {n: 0 for n in healthy_nodes if n not in excluded}
    lost = sorted(b for b, holders in result.blocks.items() if removed_node in holders)
    for holders in result.blocks.values():
        holders.discard(removed_node)
        for n in holders:
            if n in usage:
                usage[n] += 1

    # Only blocks that had a replica on the removed node
    for block in lost:
        holders = result.blocks[block]
        while len(holders) < result.replication_factor:
            spare = sorted((n for n in usage if n not in holders), key=lambda n: (usage[n], n))
            if not spare:
                events.append(EventRecord(now, NODE_EVENT, block,
                                          f"under-replicated ({len(holders)}/{result.replication_factor})"))
                break
            target = spare[0]
            holders.add(target)
            usage[target] += 1
            events.append(EventRecord(now, NODE_EVENT, block, f"replica {removed_node} -> {target}"))
    return result, events
