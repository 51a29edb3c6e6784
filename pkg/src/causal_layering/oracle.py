"""Exact joint distributions by noise enumeration, and entropy queries.

Probability arithmetic stays exact as long as the model's noise is given
as rationals: every table entry is an integer numerator over one shared
denominator, and floats only appear at the final logarithm. Entropies are
in bits throughout.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from collections.abc import Iterable, Mapping
from fractions import Fraction
from itertools import product
from typing import TYPE_CHECKING

from .graph import NodeId

if TYPE_CHECKING:  # pragma: no cover - type-only imports
    from .scm import Dataset, Scm

DEFAULT_ENUMERATION_BUDGET = 1 << 24


class EnumerationBudgetError(RuntimeError):
    """The noise-tuple product is too large to enumerate."""


class JointTable:
    """A finite joint distribution over integer-valued variables.

    Entries map full assignments (tuples aligned with ``variables``) to
    positive probabilities; zero-mass assignments are omitted. Exact tables
    store integer weights over a common denominator.
    """

    __slots__ = ("_variables", "_labels", "_weights", "_denom")

    def __init__(
        self,
        variables: Iterable[NodeId],
        labels: Iterable[str],
        weights: Mapping[tuple[int, ...], int | float],
        denom: int | None,
    ):
        self._variables = tuple(int(v) for v in variables)
        self._labels = tuple(str(s) for s in labels)
        if len(self._variables) != len(self._labels):
            raise ValueError("variables and labels must align")
        if len(set(self._variables)) != len(self._variables):
            raise ValueError("duplicate variables")
        clean: dict[tuple[int, ...], int | float] = {}
        for key, w in weights.items():
            if len(key) != len(self._variables):
                raise ValueError(f"assignment {key} does not match variable count")
            if w < 0:
                raise ValueError(f"negative probability mass at {key}")
            if w:
                clean[tuple(int(x) for x in key)] = w
        self._weights = clean
        self._denom = denom
        total = sum(clean.values())
        if denom is not None:
            if total != denom:
                raise ValueError(f"probabilities sum to {total}/{denom}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @property
    def variables(self) -> tuple[NodeId, ...]:
        return self._variables

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def is_exact(self) -> bool:
        return self._denom is not None

    def __len__(self) -> int:
        return len(self._weights)

    def label_of(self, v: NodeId) -> str:
        return self._labels[self._variables.index(v)]

    def prob(self, assignment: tuple[int, ...]) -> Fraction | float:
        w = self._weights.get(tuple(assignment), 0)
        if self._denom is None:
            return w
        return Fraction(w, self._denom)

    def total(self) -> Fraction | float:
        if self._denom is None:
            return sum(self._weights.values())
        return Fraction(sum(self._weights.values()), self._denom)

    def items(self) -> list[tuple[tuple[int, ...], Fraction | float]]:
        """Entries sorted by assignment, probabilities as Fraction or float."""
        return [(key, self.prob(key)) for key in sorted(self._weights)]

    def marginal(self, keep: Iterable[NodeId]) -> JointTable:
        keep_set = {int(v) for v in keep}
        unknown = keep_set - set(self._variables)
        if unknown:
            raise ValueError(f"unknown variables {sorted(unknown)}")
        kept = tuple(v for v in self._variables if v in keep_set)
        if kept == self._variables:
            return self
        idx = tuple(self._variables.index(v) for v in kept)
        out: dict[tuple[int, ...], int | float] = {}
        for key, w in self._weights.items():
            sub = tuple(key[i] for i in idx)
            prev = out.get(sub)
            out[sub] = w if prev is None else prev + w
        labels = tuple(self._labels[self._variables.index(v)] for v in kept)
        return JointTable(kept, labels, out, self._denom)

    def entropy_bits(self) -> float:
        """Shannon entropy of the full table, in bits; 0 log 0 counts as 0."""
        if self._denom is not None:
            d = self._denom
            acc = 0.0
            for w in self._weights.values():
                if w > 1:
                    acc += w * math.log2(w)
            return math.log2(d) - acc / d
        return -sum(p * math.log2(p) for p in self._weights.values())


def joint_distribution(
    scm: "Scm",
    include_noise: bool = False,
    budget: int | None = None,
) -> JointTable:
    """Enumerate all noise tuples of an SCM into an exact joint table.

    The enumeration size is the product of noise support sizes, capped by
    ``budget`` (default 2**24). With ``include_noise`` the table also covers
    the noise variables, under the ids given by ``scm.noise_node``.
    """
    cap = DEFAULT_ENUMERATION_BUDGET if budget is None else budget
    nodes = sorted(scm.graph.nodes)
    size = 1
    for v in nodes:
        size *= len(scm.noise[v].support)
    if size > cap:
        raise EnumerationBudgetError(
            f"noise-tuple product {size} exceeds enumeration budget {cap}"
        )

    variables = list(nodes)
    labels = [scm.graph.label(v) for v in nodes]
    if include_noise:
        variables += [scm.noise_node(v) for v in nodes]
        labels += [scm.noise_label(v) for v in nodes]

    topo = scm.topological_order
    pmfs = [scm.noise[v] for v in topo]
    exact = all(p.is_exact for p in pmfs)

    supports = [p.support for p in pmfs]
    if exact:
        denoms = [math.lcm(*(q.denominator for q in p.probs)) for p in pmfs]
        weights_per_node = [
            tuple(q.numerator * (d // q.denominator) for q in p.probs)
            for p, d in zip(pmfs, denoms)
        ]
        denom: int | None = math.prod(denoms)
    else:
        weights_per_node = [tuple(float(q) for q in p.probs) for p in pmfs]
        denom = None

    tables = [scm.functions[v] for v in topo]
    acc: dict[tuple[int, ...], int | float] = {}
    for picks in product(*(range(len(s)) for s in supports)):
        w: int | float = 1
        for node_w, i in zip(weights_per_node, picks):
            w *= node_w[i]
        if not w:
            continue
        values: dict[int, int] = {}
        noise_values: dict[int, int] = {}
        for v, table, sup, i in zip(topo, tables, supports, picks):
            u = sup[i]
            noise_values[v] = u
            parent_vals = tuple(values[p] for p in table.parent_order)
            values[v] = table.entries[(*parent_vals, u)]
        key = tuple(values[v] for v in nodes)
        if include_noise:
            key += tuple(noise_values[v] for v in nodes)
        prev = acc.get(key)
        acc[key] = w if prev is None else prev + w
    return JointTable(variables, labels, acc, denom)


def empirical_joint(dataset: "Dataset") -> JointTable:
    """Plug-in joint table from observed rows; exact rationals count/n."""
    if not dataset.rows:
        raise ValueError("dataset has no rows")
    counts = Counter(tuple(row) for row in dataset.rows)
    return JointTable(dataset.variables, dataset.labels, dict(counts), len(dataset.rows))


def render_joint_table(table: JointTable) -> str:
    """Rows ``A=0,B=1 : p`` sorted by assignment; exact probabilities as p/q."""
    lines = []
    for key, p in table.items():
        cells = ",".join(f"{lab}={val}" for lab, val in zip(table.labels, key))
        lines.append(f"{cells} : {p}")
    return "\n".join(lines) + "\n"


class EntropyOracle:
    """Conditional-entropy and independence queries over one joint table.

    Marginal entropies are memoized per variable set; the cache is guarded
    by a lock so concurrent queries never change any answer.
    """

    def __init__(self, table: JointTable):
        self._table = table
        self._scope = frozenset(table.variables)
        self._cache: dict[frozenset[int], float] = {}
        self._lock = threading.Lock()

    @property
    def variables(self) -> tuple[NodeId, ...]:
        return self._table.variables

    def marginal_entropy(self, variables: Iterable[NodeId] = ()) -> float:
        key = frozenset(int(v) for v in variables)
        if not key <= self._scope:
            raise ValueError(f"unknown variables {sorted(key - self._scope)}")
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        value = self._table.marginal(key).entropy_bits()
        with self._lock:
            self._cache.setdefault(key, value)
        return value

    def cond_entropy(
        self, target: Iterable[NodeId], given: Iterable[NodeId] = ()
    ) -> float:
        """H(target | given) in bits, via H(T ∪ G) - H(G)."""
        xs = frozenset(int(v) for v in target)
        ss = frozenset(int(v) for v in given)
        if not xs:
            raise ValueError("target set must be non-empty")
        if xs & ss:
            raise ValueError("target overlaps conditioning set")
        return self.marginal_entropy(xs | ss) - self.marginal_entropy(ss)

    def mutual_information(
        self,
        xs: Iterable[NodeId],
        ys: Iterable[NodeId],
        given: Iterable[NodeId] = (),
    ) -> float:
        """I(X; Y | S) in bits. Tiny negatives are float roundoff."""
        xs = frozenset(int(v) for v in xs)
        ys = frozenset(int(v) for v in ys)
        ss = frozenset(int(v) for v in given)
        if not xs or not ys:
            raise ValueError("both variable sets must be non-empty")
        if xs & ys or xs & ss or ys & ss:
            raise ValueError("variable sets must be pairwise disjoint")
        return (
            self.marginal_entropy(xs | ss)
            + self.marginal_entropy(ys | ss)
            - self.marginal_entropy(ss)
            - self.marginal_entropy(xs | ys | ss)
        )

    def is_independent(
        self,
        xs: Iterable[NodeId],
        ys: Iterable[NodeId],
        given: Iterable[NodeId] = (),
        tol: float = 1e-9,
    ) -> bool:
        """Conditional independence as mutual information at most ``tol`` bits."""
        return self.mutual_information(xs, ys, given) <= tol


class CountingOracle:
    """Wrapper that counts ``cond_entropy`` calls without changing answers."""

    def __init__(self, oracle):
        self._inner = oracle
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    @property
    def variables(self):
        return self._inner.variables

    def cond_entropy(self, target, given=()):
        with self._lock:
            self._calls += 1
        return self._inner.cond_entropy(target, given)

    def marginal_entropy(self, variables=()):
        return self._inner.marginal_entropy(variables)

    def mutual_information(self, xs, ys, given=()):
        return self._inner.mutual_information(xs, ys, given)

    def is_independent(self, xs, ys, given=(), tol: float = 1e-9):
        return self._inner.is_independent(xs, ys, given, tol)
