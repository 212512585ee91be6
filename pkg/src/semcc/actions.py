"""Per-RB schedule actions over a per-TTI entity set.

Each TTI exposes a set of schedulable entities: pending unicast UAVs and the
multicast groups built from them. A schedule assigns one entity id to each
resource block. Ids use a fixed layout so policies can emit flat integers:

    0           -> idle (always legal)
    1 + k       -> unicast to UAV k,       0 <= k < K
    1 + K + g   -> multicast to group g,   0 <= g < len(groups)

A schedule is valid when every id addresses an entity that exists this TTI
and no non-idle entity repeats across RBs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

IDLE_ACTION = 0


@dataclass(frozen=True)
class EntitySet:
    """Schedulable entities for one TTI.

    ``unicast_uavs`` are the pending UAVs not absorbed into any multicast
    group; ``groups`` are the groups built this TTI (tuples of UAV indices,
    each of size >= 2), indexed by position. Candidates and group members are
    disjoint and every listed UAV has a pending message. ``capacity`` is the
    number of RBs available to serve the set.
    """

    n_uav: int
    unicast_uavs: tuple[int, ...] = ()
    groups: tuple[tuple[int, ...], ...] = ()
    capacity: int = 1

    def __post_init__(self):
        if self.capacity < 1:
            raise ContractError(f"capacity must be >= 1, got {self.capacity}")
        seen: set[int] = set()
        for k in self.unicast_uavs:
            if not (0 <= k < self.n_uav):
                raise ContractError(f"unicast candidate {k} outside [0, {self.n_uav})")
            if k in seen:
                raise ContractError(f"UAV {k} listed twice as unicast candidate")
            seen.add(k)
        for g in self.groups:
            if len(g) < 2:
                raise ContractError(f"multicast group {g} smaller than two members")
            for k in g:
                if not (0 <= k < self.n_uav):
                    raise ContractError(f"group member {k} outside [0, {self.n_uav})")
                if k in seen:
                    raise ContractError(f"UAV {k} appears in more than one entity")
                seen.add(k)

    @property
    def pending_uavs(self) -> tuple[int, ...]:
        """All UAVs with a pending message, grouped or not, ascending."""
        members = [k for g in self.groups for k in g]
        return tuple(sorted(set(self.unicast_uavs) | set(members)))

    def __len__(self) -> int:
        return len(self.unicast_uavs) + len(self.groups)

    def unicast_id(self, uav: int) -> int:
        return 1 + uav

    def multicast_id(self, group_idx: int) -> int:
        return 1 + self.n_uav + group_idx

    def legal_ids(self) -> tuple[int, ...]:
        """All entity ids a demand-driven scheduler may place on an RB, idle included."""
        ids = [IDLE_ACTION]
        ids.extend(self.unicast_id(k) for k in self.unicast_uavs)
        ids.extend(self.multicast_id(g) for g in range(len(self.groups)))
        return tuple(ids)

    def describe(self, entity_id: int) -> tuple[str, tuple[int, ...]]:
        """Map an id to its kind and target UAVs: ('idle', ()), ('unicast', (k,)) or ('multicast', members)."""
        if entity_id == IDLE_ACTION:
            return "idle", ()
        if 1 <= entity_id <= self.n_uav:
            return "unicast", (entity_id - 1,)
        g = entity_id - 1 - self.n_uav
        if 0 <= g < len(self.groups):
            return "multicast", self.groups[g]
        raise ContractError(f"entity id {entity_id} addresses nothing this TTI")


@dataclass(frozen=True)
class ScheduleAction:
    """One entity id per resource block."""

    entity_ids: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "entity_ids", tuple(int(e) for e in self.entity_ids))

    @classmethod
    def idle(cls, n_rb: int) -> "ScheduleAction":
        return cls((IDLE_ACTION,) * n_rb)

    def as_array(self) -> np.ndarray:
        return np.array(self.entity_ids, dtype=int)


def validate_action(action: ScheduleAction, entities: EntitySet, n_rb: int) -> None:
    """Raise ContractError unless the schedule satisfies the exclusivity contract.

    Checks the RB count, that every id is in range (a multicast id must name a
    group that exists this TTI), and that no non-idle entity occupies two RBs.
    Unicast ids may address any UAV: restricting targets to pending messages
    is the scheduler's concern (see EntitySet.legal_ids), not a validity rule,
    since the bit-oriented baseline deliberately transmits to everyone.
    """
    if len(action.entity_ids) != n_rb:
        raise ContractError(
            f"schedule names {len(action.entity_ids)} RBs, expected {n_rb}"
        )
    max_id = entities.n_uav + len(entities.groups)
    used: set[int] = set()
    for eid in action.entity_ids:
        if eid == IDLE_ACTION:
            continue
        if not (1 <= eid <= max_id):
            raise ContractError(f"entity id {eid} addresses nothing this TTI")
        if eid in used:
            raise ContractError(f"entity id {eid} assigned to more than one RB")
        used.add(eid)
