"""Layering discovery from a conditional-entropy oracle.

The graph is never consulted: each round compares conditional entropies
against noise entropies, either given exactly (``KnownNoiseEntropy``) or
exploited through an entropy ordering (``MonotoneEntropy``).

``sour_discover`` peels source groups front-to-back, conditioning each
candidate on everything already removed: a node whose conditional entropy
collapses to its noise entropy has all its parents removed, so it is a
source of the residual graph. ``sir_discover`` peels sink groups back-to-
front, conditioning each candidate on every other remaining node.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .graph import Layering, NodeId
from .oracle import CountingOracle


@dataclass(frozen=True)
class KnownNoiseEntropy:
    """Select nodes whose conditional entropy matches the given noise entropy."""

    entropies: Mapping[NodeId, float]
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class MonotoneEntropy:
    """Select the extreme conditional entropies, grouping ties within ``tol``."""

    tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


DiscoveryMode = KnownNoiseEntropy | MonotoneEntropy


@dataclass(frozen=True)
class IterationTrace:
    """One removal round: who remained, what was measured, what was taken."""

    remaining: frozenset[NodeId]
    entropies: dict[NodeId, float]
    qualifying: frozenset[NodeId]
    selected: frozenset[NodeId]


@dataclass(frozen=True)
class DiscoveryResult:
    layering: Layering
    oracle_calls: int
    trace: tuple[IterationTrace, ...] = field(default=())


class AssumptionViolation(RuntimeError):
    """No remaining node matched its known noise entropy."""

    def __init__(self, message: str, trace: tuple[IterationTrace, ...], iteration: int):
        super().__init__(message)
        self.trace = trace
        self.iteration = iteration


def sour_discover(
    nodes: Iterable[NodeId],
    oracle,
    mode: DiscoveryMode,
    one_at_a_time: bool = False,
) -> DiscoveryResult:
    """Peel residual sources, conditioning on the removed variables."""
    return _peel(nodes, oracle, mode, removal="sources", one_at_a_time=one_at_a_time)


def sir_discover(
    nodes: Iterable[NodeId],
    oracle,
    mode: DiscoveryMode,
    one_at_a_time: bool = False,
) -> DiscoveryResult:
    """Peel residual sinks, conditioning on the other remaining variables."""
    return _peel(nodes, oracle, mode, removal="sinks", one_at_a_time=one_at_a_time)


def _peel(
    nodes: Iterable[NodeId],
    oracle,
    mode: DiscoveryMode,
    removal: str,
    one_at_a_time: bool,
) -> DiscoveryResult:
    all_nodes = frozenset(int(v) for v in nodes)
    scope = set(oracle.variables)
    if not all_nodes <= scope:
        raise ValueError(f"oracle does not cover nodes {sorted(all_nodes - scope)}")
    if isinstance(mode, KnownNoiseEntropy):
        uncovered = all_nodes - set(mode.entropies)
        if uncovered:
            raise ValueError(f"known entropies missing for nodes {sorted(uncovered)}")

    counter = CountingOracle(oracle)
    remaining = set(all_nodes)
    layers: deque[frozenset[int]] = deque()
    trace: list[IterationTrace] = []

    while remaining:
        current = frozenset(remaining)
        entropies: dict[int, float] = {}
        for v in sorted(current):
            given = (all_nodes - current) if removal == "sources" else (current - {v})
            entropies[v] = counter.cond_entropy((v,), given)

        if isinstance(mode, KnownNoiseEntropy):
            qualifying = frozenset(
                v for v in current if abs(entropies[v] - mode.entropies[v]) <= mode.tol
            )
            if not qualifying:
                raise AssumptionViolation(
                    "no remaining node attained its known noise entropy "
                    f"(iteration {len(trace) + 1})",
                    tuple(trace),
                    len(trace) + 1,
                )
        else:
            extreme = (
                min(entropies.values()) if removal == "sources" else max(entropies.values())
            )
            qualifying = frozenset(
                v for v in current if abs(entropies[v] - extreme) <= mode.tol
            )

        selected = frozenset({min(qualifying)}) if one_at_a_time else qualifying
        trace.append(IterationTrace(current, dict(entropies), qualifying, selected))
        if removal == "sources":
            layers.append(selected)
        else:
            layers.appendleft(selected)
        remaining -= selected

    return DiscoveryResult(Layering(tuple(layers)), counter.calls, tuple(trace))


def render_discovery_report(
    result: DiscoveryResult, labels: Mapping[NodeId, str]
) -> str:
    """Layering lines, the call count, and one line per removal round."""
    lines = []
    for i, layer in enumerate(result.layering, start=1):
        lines.append(f"layer {i}: " + ", ".join(sorted(labels[v] for v in layer)))
    lines.append(f"oracle calls: {result.oracle_calls}")
    for k, step in enumerate(result.trace, start=1):
        cands = ", ".join(
            f"{labels[v]}: {step.entropies[v]:.9f}"
            for v in sorted(step.entropies, key=lambda v: labels[v])
        )
        chosen = ", ".join(sorted(labels[v] for v in step.selected))
        lines.append(f"iter {k}: candidates {{{cands}}} selected {{{chosen}}}")
    return "\n".join(lines) + "\n"
