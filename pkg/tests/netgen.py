"""Seeded random network generator shared by property and acceptance tests."""

from __future__ import annotations

import random

from inquest.calculus import SCALE, SymbolicProbability as SP
from inquest.network import (
    Argument,
    ArgumentationNetwork,
    EvidenceChange,
    EvidenceLink,
    EvidenceRef,
    HypothesisNode,
    NodeRole,
    Side,
)


def random_network(
    rng: random.Random,
    max_nodes: int = 50,
    allow_disfavoring_arguments: bool = True,
    share_items: bool = True,
    with_assumptions: bool = True,
) -> ArgumentationNetwork:
    """Build a random valid DAG.

    Edges always point from lower to higher creation index, which rules
    out cycles by construction; root ids are excluded from reuse so the
    competing-root set stays parentless.
    """
    node_count = rng.randint(1, max_nodes)
    ids = [f"n{i:03d}" for i in range(node_count)]
    created = 0

    def fresh() -> str:
        nonlocal created
        node_id = ids[created]
        created += 1
        return node_id

    roots = [fresh() for _ in range(rng.randint(1, min(3, node_count)))]
    root_set = set(roots)
    frontier = list(roots)
    arguments: list[Argument] = []
    arg_seq = 0

    while frontier:
        parent = frontier.pop(0)
        if rng.random() < 0.30 and parent not in root_set:
            continue  # stays a leaf
        for _ in range(rng.randint(1, 2)):
            children: list[str] = []
            for _ in range(rng.randint(1, 3)):
                parent_index = ids.index(parent)
                reusable = [
                    n for n in ids[:created]
                    if ids.index(n) > parent_index and n not in root_set
                ]
                if reusable and rng.random() < 0.15:
                    children.append(rng.choice(reusable))
                elif created < node_count:
                    child = fresh()
                    children.append(child)
                    frontier.append(child)
            if not children:
                continue
            side = Side.FAVORING
            if allow_disfavoring_arguments and rng.random() < 0.25:
                side = Side.DISFAVORING
            arg_seq += 1
            arguments.append(
                Argument(f"a{arg_seq:03d}", parent, side, rng.choice(SCALE[1:]), tuple(dict.fromkeys(children)))
            )

    node_ids = ids[:created]
    with_children = {a.parent for a in arguments}
    with_parent = {c for a in arguments for c in a.children}

    links: list[EvidenceLink] = []
    refs: dict[str, EvidenceRef] = {}
    link_seq = 0
    item_seq = 0
    for node_id in node_ids:
        if node_id in with_children or rng.random() < 0.25:
            continue
        for _ in range(rng.randint(1, 3)):
            if refs and share_items and rng.random() < 0.2:
                item_id = rng.choice(sorted(refs))
            else:
                item_seq += 1
                item_id = f"item{item_seq:03d}"
                refs[item_id] = EvidenceRef(
                    id=item_id,
                    credibility=rng.choice(SCALE),
                    missing=rng.random() < 0.10,
                    statement=f"fact-{item_id}",
                )
            link_seq += 1
            side = Side.FAVORING if rng.random() < 0.7 else Side.DISFAVORING
            links.append(
                EvidenceLink(f"e{link_seq:03d}", node_id, item_id, side, rng.choice(SCALE[1:]))
            )

    nodes = []
    for node_id in node_ids:
        if node_id not in with_parent:
            role = NodeRole.ROOT
        elif node_id in with_children:
            role = NodeRole.INTERMEDIATE
        else:
            role = NodeRole.LEAF
        assumption = None
        if with_assumptions and rng.random() < 0.08:
            assumption = rng.choice(SCALE)
        nodes.append(HypothesisNode(node_id, f"hypothesis {node_id}", role, assumption))

    return ArgumentationNetwork.build(
        nodes=nodes,
        arguments=arguments,
        evidence_links=links,
        competing_roots=tuple(sorted(n.id for n in nodes if n.role is NodeRole.ROOT)),
        evidence=refs.values(),
    )


def random_change(rng: random.Random, network: ArgumentationNetwork) -> EvidenceChange:
    """Pick one applicable add / revise-credibility / retract mutation."""
    choices = ["add"]
    if network.evidence:
        choices.append("revise-credibility")
    if network.evidence_links:
        choices.append("retract")
    kind = rng.choice(choices)
    if kind == "add":
        leaves = sorted(n for n in network.nodes if network.is_leaf(n))
        leaf = rng.choice(leaves)
        item_id = f"item-new-{rng.randint(0, 999):03d}"
        return EvidenceChange(
            kind="add",
            link=EvidenceLink(
                f"e-new-{rng.randint(0, 999):03d}",
                leaf,
                item_id,
                Side.FAVORING if rng.random() < 0.7 else Side.DISFAVORING,
                rng.choice(SCALE[1:]),
            ),
            ref=EvidenceRef(item_id, rng.choice(SCALE), missing=rng.random() < 0.1),
        )
    if kind == "revise-credibility":
        item_id = rng.choice(sorted(network.evidence))
        return EvidenceChange(
            kind="revise-credibility", evidence_id=item_id, credibility=rng.choice(SCALE)
        )
    return EvidenceChange(kind="retract", link_id=rng.choice(sorted(network.evidence_links)))
