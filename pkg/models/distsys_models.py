"""
Distributed-system data models: data nodes, database clusters, VMs, scheduler hosts
and replica placement.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple
from enum import Enum


class NodeLocation(Enum):
    UNDERWATER = "underwater"
    ON_LAND = "on_land"


class NodeStatus(Enum):
    LIVE = "live"
    BLOCKED = "blocked"
    REMOVED = "removed"


class VMState(Enum):
    INIT = "INIT"
    PROLOG = "PROLOG"
    BOOT = "BOOT"
    RUNNING = "RUNNING"
    DONE = "DONE"
    FAILED = "FAILED"
    BLOCKED = "BLOCKED"


LEGAL_VM_TRANSITIONS = {
    VMState.INIT: {VMState.PROLOG},
    VMState.PROLOG: {VMState.BOOT},
    VMState.BOOT: {VMState.RUNNING},
    VMState.RUNNING: {VMState.DONE, VMState.FAILED, VMState.BLOCKED},
    VMState.DONE: set(),
    VMState.FAILED: set(),
    VMState.BLOCKED: set(),
}


@dataclass
class Node:
    """Data node backed by a RAID array (or a single disk modelled as one)"""
    node_id: str
    location: NodeLocation
    storage_id: Optional[str] = None
    status: NodeStatus = NodeStatus.LIVE

    @property
    def is_underwater(self) -> bool:
        return self.location == NodeLocation.UNDERWATER


@dataclass(frozen=True)
class DbLatencyTable:
    """Normalized latency vs dSPL for one node split"""
    underwater_count: int
    knots: Tuple[Tuple[float, float], ...]
    out_of_service_above_db: float = 38.0


@dataclass
class DbCluster:
    nodes: List[Node]
    underwater_node_count: int
    latency_model: Dict[int, DbLatencyTable]


@dataclass
class VirtualMachine:
    vm_id: str
    state: VMState = VMState.INIT
    host_id: Optional[str] = None
    instantiated_at: float = 0.0
    state_entered_at: Dict[str, float] = field(default_factory=dict)
    # Fraction of the current state's base duration already completed
    progress: float = 0.0

    @property
    def is_terminal(self) -> bool:
        return not LEGAL_VM_TRANSITIONS[self.state]


@dataclass
class Host:
    host_id: str
    node_id: str
    capacity: float = 1.0
    max_vms: int = 64
    monitored_fraction: float = 1.0
    current_weight: float = 0.0


@dataclass
class Assignment:
    time_s: float
    vm_id: str
    host_id: Optional[str]      # None = queued


@dataclass
class Scheduler:
    hosts: List[Host]
    storage_weight: float = 0.8
    queue: List[str] = field(default_factory=list)
    assignment_log: List[Assignment] = field(default_factory=list)


@dataclass
class ReplicaMap:
    """Data-block id -> set of node ids holding a replica"""
    blocks: Dict[str, Set[str]]
    replication_factor: int = 2

    def copy(self) -> 'ReplicaMap':
        return ReplicaMap({b: set(n) for b, n in self.blocks.items()}, self.replication_factor)

    def under_replicated(self) -> List[str]:
        return sorted(b for b, nodes in self.blocks.items() if len(nodes) < self.replication_factor)
