# core/forest.py
"""
Builds the cascade forest: who infected whom, and in which generation.

Records are replayed in log order (timestamp, then file order). The first
record that reaches a recipient infects it; later records to the same
recipient are counted as attempts of their sender.
"""
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Tuple

from core.errors import EmptyInputError, NoSeedsError
from core.events import EventLog, EventRecord
from utils.logger import get_logger

logger = get_logger(__name__)


class OrphanPolicy(str, Enum):
    REJECT = "reject"
    AS_SEEDS = "as-seeds"


@dataclass(frozen=True)
class CascadeNode:
    actor_id: str
    generation: int
    infected_at: float
    infector: Optional[str] = None


@dataclass(frozen=True)
class CascadeForest:
    nodes: Mapping[str, CascadeNode]
    orphan_records: Tuple[EventRecord, ...] = ()
    attempt_counts: Mapping[str, int] = field(default_factory=dict)
    promoted_seeds: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def max_generation(self) -> int:
        return max((n.generation for n in self.nodes.values()), default=0)

    @property
    def seeds(self) -> Tuple[CascadeNode, ...]:
        return tuple(n for n in self.nodes.values() if n.infector is None)

    def children(self) -> Dict[str, List[str]]:
        """Map each infector to the actors it infected, in infection order."""
        out: Dict[str, List[str]] = {}
        for node in self.nodes.values():
            if node.infector is not None:
                out.setdefault(node.infector, []).append(node.actor_id)
        return out


def build_forest(log: EventLog, orphan_policy: OrphanPolicy = OrphanPolicy.REJECT) -> CascadeForest:
    """
    Assign generations by replaying the log from its seeds.

    Args:
        log: Parsed event log
        orphan_policy: What to do with records whose sender is not yet infected

    Returns:
        CascadeForest with generation 1 for seeds and infector generation + 1 otherwise

    Raises:
        EmptyInputError: If the log has no records
        NoSeedsError: If the log has no seed record and orphans are rejected
    """
    if len(log) == 0:
        raise EmptyInputError("event log is empty")
    orphan_policy = OrphanPolicy(orphan_policy)
    if orphan_policy is OrphanPolicy.REJECT and not any(r.is_seed for r in log):
        raise NoSeedsError("log has no seed record (empty sender) and orphans are rejected")

    nodes: Dict[str, CascadeNode] = {}
    attempts: Dict[str, int] = {}
    orphans: List[EventRecord] = []
    promoted: List[str] = []

    for record in log:
        if record.is_seed:
            if record.recipient in nodes:
                logger.debug(f"Ignoring repeated seed record for {record.recipient}")
                continue
            nodes[record.recipient] = CascadeNode(record.recipient, 1, record.timestamp)
            continue

        if record.sender not in nodes:
            if orphan_policy is OrphanPolicy.REJECT:
                orphans.append(record)
                continue
            nodes[record.sender] = CascadeNode(record.sender, 1, record.timestamp)
            promoted.append(record.sender)

        if record.recipient in nodes:
            attempts[record.sender] = attempts.get(record.sender, 0) + 1
            continue

        parent = nodes[record.sender]
        nodes[record.recipient] = CascadeNode(
            record.recipient, parent.generation + 1, record.timestamp, record.sender
        )

    if orphans:
        logger.warning(f"Rejected {len(orphans)} orphan records (sender never infected)")
    if promoted:
        logger.info(f"Promoted {len(promoted)} orphan senders to generation-1 seeds")

    return CascadeForest(
        nodes=MappingProxyType(nodes),
        orphan_records=tuple(orphans),
        attempt_counts=MappingProxyType(attempts),
        promoted_seeds=tuple(promoted),
    )
