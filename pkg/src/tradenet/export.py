"""Graph serialization: edge-list CSV, DOT, and GraphML.

Writers are deterministic (fixed ordering, fixed float formatting) so
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .errors import ValidationError
from .mst import SpanningTree
from .network import CountryTable, WeightedNetwork

__all__ = ["export_graph", "read_network_csv", "network_edges"]

_FLOAT = "{:.12g}".format
_EXACT = "{:.17g}".format


def network_edges(net: WeightedNetwork, top_fraction: float | None = None):
    """Positive links as (i, j, weight), strongest first.

    ``top_fraction`` keeps the ceil(fraction * count) heaviest links; ties
    break on (weight desc, i, j) so the cut is reproducible.
    """
    ii, jj = np.triu_indices(net.n, k=1)
    w = net.weights[ii, jj]
    keep = w > 0
    ii, jj, w = ii[keep], jj[keep], w[keep]
    order = np.lexsort((jj, ii, -w))
    ii, jj, w = ii[order], jj[order], w[order]
    if top_fraction is not None:
        if not 0.0 < top_fraction <= 1.0:
            raise ValidationError("top_fraction must be in (0, 1]")
        count = math.ceil(top_fraction * w.size)
        ii, jj, w = ii[:count], jj[:count], w[:count]
    return [(int(a), int(b), float(x)) for a, b, x in zip(ii, jj, w)]


def _tree_edges(tree: SpanningTree):
    edges = sorted(tree.edges, key=lambda e: (e.distance, e.i, e.j))
    return [(e.i, e.j, e.report_weight) for e in edges]


def _node_attrs(index: int, countries: CountryTable | None):
    if countries is None:
        return {"label": str(index)}
    return {
        "label": countries.acronyms[index],
        "gdp": _FLOAT(countries.gdp[index]),
        "continent": countries.continent[index],
    }


def export_graph(
    obj,
    path,
    fmt: str = "csv",
    *,
    top_fraction: float | None = None,
    countries: CountryTable | None = None,
) -> str:
    """Write a network or spanning tree to ``path`` in the requested format.

    CSV carries (source, target, weight) with a metadata comment line and
    round-trips through :func:`read_network_csv`.  DOT and GraphML embed
    node attributes (label, gdp, continent) when a country table is given;
    tree exports use the report weight as the edge weight attribute.
    """
    if isinstance(obj, WeightedNetwork):
        n = obj.n
        kind = obj.kind
        edges = network_edges(obj, top_fraction)
        weight_name = f"weight_normalized[{kind}]"
        meta = f"kind={kind} normalizer={_EXACT(obj.normalizer)} n={n}"
    elif isinstance(obj, SpanningTree):
        if top_fraction is not None:
            raise ValidationError("top_fraction does not apply to trees")
        n = 1 + max((max(e.i, e.j) for e in obj.edges), default=0)
        kind = "mst"
        edges = _tree_edges(obj)
        weight_name = "report_weight[mst]"
        meta = (
            f"kind=mst components={obj.component_count} "
            f"total_distance={_EXACT(obj.total_distance)} "
            f"rescale_factor={_EXACT(obj.rescale_factor)}"
        )
    else:
        raise ValidationError(f"cannot export object of type {type(obj).__name__}")

    if fmt == "csv":
        lines = [f"# {meta}", f"source,target,{weight_name}"]
        lines += [f"{a},{b},{_EXACT(w)}" for a, b, w in edges]
        text = "\n".join(lines) + "\n"
    elif fmt == "dot":
        text = _to_dot(n, edges, countries, kind)
    elif fmt == "graphml":
        text = _to_graphml(n, edges, countries, kind)
    else:
        raise ValidationError(f"unsupported export format {fmt!r}")

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return str(path)


def _to_dot(n, edges, countries, kind):
    lines = [f"graph {kind} {{", "  node [shape=circle, fixedsize=true];"]
    gdp_max = countries.gdp.max() if countries is not None else None
    for v in range(n):
        attrs = _node_attrs(v, countries)
        if gdp_max is not None and gdp_max > 0:
            # node area proportional to GDP
            attrs["width"] = _FLOAT(0.2 + 1.0 * float(
                np.sqrt(countries.gdp[v] / gdp_max)
            ))
        body = ", ".join(f'{k}="{val}"' for k, val in attrs.items())
        lines.append(f"  {v} [{body}];")
    for a, b, w in edges:
        lines.append(f'  {a} -- {b} [weight="{_FLOAT(w)}", penwidth="{_FLOAT(1 + 4 * w)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _to_graphml(n, edges, countries, kind):
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="d_label" for="node" attr.name="label" attr.type="string"/>',
        '  <key id="d_gdp" for="node" attr.name="gdp" attr.type="double"/>',
        '  <key id="d_cont" for="node" attr.name="continent" attr.type="string"/>',
        '  <key id="d_w" for="edge" attr.name="weight" attr.type="double"/>',
        f'  <graph id={quoteattr(kind)} edgedefault="undirected">',
    ]
    body = []
    for v in range(n):
        attrs = _node_attrs(v, countries)
        body.append(f'    <node id="n{v}">')
        body.append(f'      <data key="d_label">{escape(attrs["label"])}</data>')
        if "gdp" in attrs:
            body.append(f'      <data key="d_gdp">{attrs["gdp"]}</data>')
            body.append(f'      <data key="d_cont">{escape(attrs["continent"])}</data>')
        body.append("    </node>")
    for k, (a, b, w) in enumerate(edges):
        body.append(f'    <edge id="e{k}" source="n{a}" target="n{b}">')
        body.append(f'      <data key="d_w">{_EXACT(w)}</data>')
        body.append("    </edge>")
    tail = ["  </graph>", "</graphml>"]
    return "\n".join(head + body + tail) + "\n"


def read_network_csv(path) -> WeightedNetwork:
    """Rebuild a weighted network from an exported CSV edge list."""
    kind = "original"
    normalizer = 1.0
    n = None
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    key, _, value = token.partition("=")
                    if key == "kind":
                        kind = value
                    elif key == "normalizer":
                        normalizer = float(value)
                    elif key == "n":
                        n = int(value)
                continue
            if line.startswith("source,"):
                continue
            a, b, w = line.split(",")
            edges.append((int(a), int(b), float(w)))
    if n is None:
        n = 1 + max((max(a, b) for a, b, _ in edges), default=0)
    weights = np.zeros((n, n))
    for a, b, w in edges:
        weights[a, b] = weights[b, a] = w
    return WeightedNetwork(
        weights=weights,
        kind=kind,
        normalizer=normalizer,
        degenerate=not edges,
    )
