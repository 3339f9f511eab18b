""" Sensor field: one node per square segment of a grid, 4-neighbour connectivity, shortest path messaging.

Every message and every sensor activation of a run is accounted in a `MetricsLedger`.
"""
# Std lib
from dataclasses import dataclass, field
from typing import NamedTuple, List, Set, Iterable, Dict
# Local
from uie.utils import PreconditionError


class Segment(NamedTuple):
    x: int
    y: int


class LedgerEntry(NamedTuple):
    kind: str
    hops: int = 0
    activations: int = 0
    deliveries: int = 0


@dataclass
class MetricsLedger:
    """ Cumulative costs of a run. Every mutation goes through `_record` and is journaled.

    >>> ledger = MetricsLedger()
    >>> ledger.add_hops(3, kind="report")
    >>> ledger.deliver()
    >>> ledger.snapshot()
    {'hop_count': 3, 'active_time': 0, 'deliveries_to_sink': 1}
    >>> ledger.replay() == ledger.snapshot()
    True
    """
    hop_count: int = 0
    active_time: int = 0
    deliveries_to_sink: int = 0
    journal: List[LedgerEntry] = field(default_factory=list, repr=False)

    def _record(self, entry: LedgerEntry) -> None:
        if entry.hops < 0 or entry.activations < 0 or entry.deliveries < 0:
            raise PreconditionError(f"Ledger entries cannot be negative: {entry}")
        self.hop_count += entry.hops
        self.active_time += entry.activations
        self.deliveries_to_sink += entry.deliveries
        self.journal.append(entry)

    def add_hops(self, hops: int, kind: str = "hops") -> None:
        self._record(LedgerEntry(kind, hops=int(hops)))

    def activate(self, sensors: int, kind: str = "activation") -> None:
        self._record(LedgerEntry(kind, activations=int(sensors)))

    def deliver(self, hops: int = 0, kind: str = "delivery") -> None:
        self._record(LedgerEntry(kind, hops=int(hops), deliveries=1))

    def snapshot(self) -> Dict[str, int]:
        return {
            "hop_count": self.hop_count,
            "active_time": self.active_time,
            "deliveries_to_sink": self.deliveries_to_sink
        }

    def replay(self) -> Dict[str, int]:
        """ Totals recomputed from the journal alone """
        return {
            "hop_count": sum(entry.hops for entry in self.journal),
            "active_time": sum(entry.activations for entry in self.journal),
            "deliveries_to_sink": sum(entry.deliveries for entry in self.journal)
        }

    def hops_by_kind(self) -> Dict[str, int]:
        """ Hop count split by message kind, kinds in order of first appearance

        >>> ledger = MetricsLedger()
        >>> ledger.add_hops(3, kind="beacon-report")
        >>> ledger.deliver(8, kind="beacon-request")
        >>> ledger.add_hops(2, kind="beacon-report")
        >>> ledger.hops_by_kind()
        {'beacon-report': 5, 'beacon-request': 8}
        """
        split: Dict[str, int] = {}
        for entry in self.journal:
            split[entry.kind] = split.get(entry.kind, 0) + entry.hops
        return split


@dataclass(frozen=True)
class MessageAccounting:
    """ Whether activation queries and absence reports cost hops.

    :param count_queries: Sink-issued collections pay the query and the response of every activated sensor
    :param local_activation: Same for the per-step activations issued in-network by the previous target node
    """
    count_queries: bool = True
    local_activation: bool = True


@dataclass(frozen=True)
class Grid:
    """ Field of `width x height` segments

    >>> Grid(200, 200).hop_distance(Segment(66, 66), Segment(160, 160))
    188
    """
    width: int
    height: int

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise PreconditionError(f"Grid must be at least 2x2, got {self.width}x{self.height}")

    def contains(self, segment: Segment) -> bool:
        return 0 <= segment[0] < self.width and 0 <= segment[1] < self.height

    def require(self, *segments: Segment) -> None:
        for segment in segments:
            if not self.contains(segment):
                raise PreconditionError(f"Segment {tuple(segment)} is outside of the {self.width}x{self.height} grid")

    def clamp(self, x: int, y: int) -> Segment:
        return Segment(min(max(x, 0), self.width - 1), min(max(y, 0), self.height - 1))

    def hop_distance(self, a: Segment, b: Segment) -> int:
        """ Shortest path length on the 4-connected grid """
        self.require(a, b)
        return abs(a[0] - b[0]) + abs(a[1] - b[1])

    def query_sensors(
            self,
            querier: Segment,
            targets: Iterable[Segment],
            truth: Segment,
            acct: MessageAccounting,
            ledger: MetricsLedger,
            local: bool = False
    ) -> Set[Segment]:
        """ Activates the sensors of `targets` on behalf of `querier`. Each activated sensor answers whether the
        target stands on its segment.

        :param local: The query is issued in-network by the previous target node (charged under
            `acct.local_activation`) rather than by the sink (charged under `acct.count_queries`)
        :return: The detecting segments, at most one

        >>> ledger = MetricsLedger()
        >>> Grid(10, 10).query_sensors((0, 0), {(1, 0), (0, 1)}, (1, 0), MessageAccounting(), ledger)
        {Segment(x=1, y=0)}
        >>> ledger.hop_count, ledger.active_time
        (4, 2)
        """
        querier = Segment(*querier)
        targets = {Segment(*target) for target in targets}
        self.require(querier, *targets)
        if not targets:
            return set()
        detected = {target for target in targets if target == truth}
        full = acct.local_activation if local else acct.count_queries
        kind = "local-query" if local else "sink-query"
        ledger.activate(len(targets), kind=kind)
        if full:
            hops = 2 * sum(self.hop_distance(querier, target) for target in targets)
        else:
            hops = sum(self.hop_distance(target, querier) for target in detected)
        ledger.add_hops(hops, kind=kind)
        return detected

    def report_to_beacon(self, target_node: Segment, beacon: Segment, ledger: MetricsLedger) -> None:
        ledger.add_hops(self.hop_distance(target_node, beacon), kind="beacon-report")

    def request_from_beacon(self, sink: Segment, beacon: Segment, ledger: MetricsLedger) -> None:
        """ Request and reply between the sink and the beacon node """
        ledger.deliver(2 * self.hop_distance(sink, beacon), kind="beacon-request")

    def report_to_sink(self, source: Segment, sink: Segment, ledger: MetricsLedger) -> None:
        ledger.deliver(self.hop_distance(source, sink), kind="sink-report")
