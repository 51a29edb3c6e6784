"""Hand-built SCM instances used by demos and regression tests."""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from itertools import product
from operator import xor

from .graph import Dag, NodeId
from .scm import Pmf, Scm, StructuralTable


def affine_chain3() -> Scm:
    """A -> B -> C with B = A + 2*N_B and C = B + 4*N_C.

    Every structural map is one-to-one jointly in (parent, noise), and each
    value determines the whole noise history, so all the assumption
    validators pass. Noise entropies rise strictly along the chain.
    """
    g = Dag.of("ABC", [("A", "B"), ("B", "C")])
    noise = {
        0: Pmf.bernoulli(Fraction(1, 8)),
        1: Pmf.bernoulli(Fraction(1, 4)),
        2: Pmf.bernoulli(Fraction(1, 2)),
    }
    functions = {
        0: StructuralTable((), {(u,): u for u in (0, 1)}),
        1: StructuralTable(
            (0,), {(a, u): a + 2 * u for a in (0, 1) for u in (0, 1)}
        ),
        2: StructuralTable(
            (1,), {(b, u): b + 4 * u for b in (0, 1, 2, 3) for u in (0, 1)}
        ),
    }
    return Scm(g, noise, functions)


def xor_chain3() -> Scm:
    """A -> B -> C with B = A xor N_B and C = B xor N_C (N_C uniform).

    Noise stays injective and the entropies rise strictly, but the xor with
    uniform noise at C makes C independent of everything upstream, so the
    single-parent injectivity and directed-faithfulness checks both fail.
    """
    return xor_model(
        Dag.of("ABC", [("A", "B"), ("B", "C")]),
        {
            0: Pmf.bernoulli(Fraction(1, 8)),
            1: Pmf.bernoulli(Fraction(1, 4)),
            2: Pmf.bernoulli(Fraction(1, 2)),
        },
    )


def xor_model(graph: Dag, noise: dict[NodeId, Pmf]) -> Scm:
    """Every node is the xor of its parents and its own binary noise."""
    for v, pmf in noise.items():
        if set(pmf.support) != {0, 1}:
            raise ValueError(f"xor model needs {{0, 1}} noise, node {graph.label(v)}")
    functions = {}
    for v in graph.nodes:
        parents = tuple(sorted(graph.parents(v)))
        entries = {}
        for combo in product((0, 1), repeat=len(parents)):
            for u in noise[v].support:
                entries[(*combo, u)] = reduce(xor, combo, u)
        functions[v] = StructuralTable(parents, entries)
    return Scm(graph, noise, functions)
