"""Solomon VRPTW benchmark text parsing and rescaling into drone instances."""

from typing import List, NamedTuple, Sequence, Tuple

from .model import Customer, Instance, make_instance


class ParseError(ValueError):
    """Malformed benchmark text; carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__("line %d: %s" % (line, reason))


class MissingDepot(ValueError):
    """Node 0 absent from the customer table."""


class DegenerateBoundingBox(ValueError):
    """All x (or all y) coordinates equal; min-max rescaling undefined."""


class SolomonNode(NamedTuple):
    id: int
    x: float
    y: float
    demand: float
    ready: float
    due: float
    service: float


def parse_solomon(text: str) -> List[SolomonNode]:
    """Parse the canonical whitespace-separated layout; node 0 is the depot.

    Returns node records in file order without any unit conversion.
    """
    lines = text.splitlines()
    in_table = False
    header_skipped = False
    nodes: List[SolomonNode] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not in_table:
            if line.upper().startswith("CUSTOMER"):
                in_table = True
            continue
        if not line:
            continue
        if not header_skipped and not line[0].isdigit():
            header_skipped = True  # the CUST NO. / XCOORD. ... column header
            continue
        fields = line.split()
        if len(fields) != 7:
            raise ParseError(lineno, "expected 7 fields, got %d" % len(fields))
        try:
            rec = SolomonNode(int(fields[0]), *(float(v) for v in fields[1:]))
        except ValueError:
            raise ParseError(lineno, "non-numeric field in %r" % line) from None
        nodes.append(rec)
    if not in_table:
        raise ParseError(0, "no CUSTOMER section found")
    if not nodes:
        raise ParseError(len(lines), "customer table is empty")
    if nodes[0].id != 0 and not any(nd.id == 0 for nd in nodes):
        raise MissingDepot("node 0 (depot) absent from the table")
    return nodes


def rescale_solomon(nodes: Sequence[SolomonNode],
                    area_side_km: float = 5.0,
                    mass_range: Tuple[float, float] = (0.5, 2.0),
                    subset_index: int = 1) -> Instance:
    """Min-max rescale a Solomon dataset and extract one 10-customer subset.

    All 101 node coordinates (depot included) are mapped onto
    [0, area_side_km]^2 per axis; customer demands are mapped onto
    mass_range. Subset s keeps the customers with original ids
    10(s-1)+1 .. 10s, renumbered 1..10 in original order.
    """
    if not (area_side_km > 0):
        raise ValueError("area_side_km must be > 0")
    lo, hi = mass_range
    if not (lo < hi):
        raise ValueError("mass_range must satisfy min < max")
    if not (1 <= subset_index <= 10):
        raise ValueError("subset_index must be in 1..10, got %d" % subset_index)

    xs = [nd.x for nd in nodes]
    ys = [nd.y for nd in nodes]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    if xmax == xmin or ymax == ymin:
        raise DegenerateBoundingBox("all x or all y coordinates coincide")

    def map_pos(x: float, y: float) -> Tuple[float, float]:
        return ((x - xmin) / (xmax - xmin) * area_side_km,
                (y - ymin) / (ymax - ymin) * area_side_km)

    demands = [nd.demand for nd in nodes if nd.id != 0]
    dmin, dmax = min(demands), max(demands)

    def map_mass(demand: float) -> float:
        if dmax == dmin:
            return 0.5 * (lo + hi)
        return lo + (demand - dmin) / (dmax - dmin) * (hi - lo)

    by_id = {nd.id: nd for nd in nodes}
    wanted = range(10 * (subset_index - 1) + 1, 10 * subset_index + 1)
    missing = [i for i in wanted if i not in by_id]
    if missing:
        raise ValueError("dataset lacks customer ids %r for subset %d" % (missing, subset_index))

    customers = []
    for new_id, orig_id in enumerate(wanted, start=1):
        nd = by_id[orig_id]
        customers.append(Customer(id=new_id, position=map_pos(nd.x, nd.y),
                                  package_mass=map_mass(nd.demand)))
    depot = by_id.get(0, nodes[0])
    return make_instance(map_pos(depot.x, depot.y), customers)
