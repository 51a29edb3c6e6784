"""Discrete structural causal models over finite alphabets.

An SCM couples a DAG with one independent noise distribution per node and
one total structural table per node. Validators report whether a model
satisfies the assumptions the discovery algorithms lean on (injective
noise, noise-entropy orderings, faithfulness variants), and a seeded
generator produces models satisfying a requested assumption profile by
construction, then re-checks rather than trusts the construction.
"""

from __future__ import annotations

import json
import math
import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from . import oracle as _oracle
from .graph import Dag, NodeId, d_separated


@dataclass(frozen=True)
class Pmf:
    """A probability mass function on distinct integer support points.

    Probabilities are either all exact ``Fraction`` values (then they must
    sum to exactly 1) or all floats (sum within 1e-12 of 1).
    """

    support: tuple[int, ...]
    probs: tuple[Fraction, ...] | tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs must align")
        if not self.support:
            raise ValueError("support must be non-empty")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support values must be distinct")
        kinds = {type(p) for p in self.probs}
        if kinds <= {Fraction}:
            exact = True
        elif kinds <= {float}:
            exact = False
        else:
            raise TypeError("probs must be all Fraction or all float")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be non-negative")
        total = sum(self.probs)
        if exact:
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def of(cls, support: Iterable[int], probs: Iterable[Fraction | float | int | str]) -> Pmf:
        """Coerce ints/strings like ``"3/4"`` to Fractions; any float makes all float."""
        sup = tuple(int(v) for v in support)
        raw = list(probs)
        if any(isinstance(p, float) for p in raw):
            return cls(sup, tuple(float(p) for p in raw))
        return cls(sup, tuple(Fraction(p) for p in raw))

    @classmethod
    def from_weights(cls, support: Iterable[int], weights: Sequence[int]) -> Pmf:
        total = sum(weights)
        if total <= 0:
            raise ValueError("weights must have positive sum")
        return cls(tuple(int(v) for v in support), tuple(Fraction(w, total) for w in weights))

    @classmethod
    def bernoulli(cls, p: Fraction | float) -> Pmf:
        if isinstance(p, float):
            return cls((0, 1), (1.0 - p, p))
        p = Fraction(p)
        return cls((0, 1), (1 - p, p))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.probs)

    def positive_support(self) -> tuple[int, ...]:
        return tuple(v for v, p in zip(self.support, self.probs) if p > 0)

    def prob_of(self, value: int) -> Fraction | float:
        for v, p in zip(self.support, self.probs):
            if v == value:
                return p
        return Fraction(0) if self.is_exact else 0.0

    def entropy_bits(self) -> float:
        acc = 0.0
        for p in self.probs:
            q = float(p)
            if q > 0.0:
                acc -= q * math.log2(q)
        return acc

    def sample(self, rng: random.Random) -> int:
        r = rng.random()
        acc = 0.0
        last = self.support[0]
        for v, p in zip(self.support, self.probs):
            q = float(p)
            if q > 0.0:
                last = v
                acc += q
                if r < acc:
                    return v
        return last


@dataclass(frozen=True)
class StructuralTable:
    """A total function (parent values, noise value) -> output value.

    Keys are parent-value tuples in ``parent_order`` with the noise value
    appended. Totality over the parent alphabets and noise support is
    enforced by the owning Scm.
    """

    parent_order: tuple[NodeId, ...]
    entries: Mapping[tuple[int, ...], int]

    def evaluate(self, parent_values: Sequence[int], noise_value: int) -> int:
        key = (*parent_values, noise_value)
        try:
            return self.entries[key]
        except KeyError:
            raise ValueError(f"structural table has no entry for {key}") from None

    def outputs(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.entries.values())))


class Scm:
    """A discrete SCM: graph, per-node noise Pmfs, per-node structural tables.

    Construction validates structure (coverage, canonical parent order,
    table totality) and derives each node's alphabet as the set of values
    its table can output. Assumption checks are separate reporting
    functions so that violating instances can still be built and examined.
    """

    __slots__ = ("_graph", "_noise", "_functions", "_alphabets", "_topo", "meta")

    def __init__(
        self,
        graph: Dag,
        noise: Mapping[NodeId, Pmf],
        functions: Mapping[NodeId, StructuralTable],
        meta: "ScmMeta | None" = None,
    ):
        if set(graph.nodes) != set(range(len(graph.labels))):
            raise ValueError("SCM graph must use every label registry entry")
        nodes = set(graph.nodes)
        if set(noise) != nodes:
            raise ValueError("noise map must cover exactly the graph nodes")
        if set(functions) != nodes:
            raise ValueError("functions map must cover exactly the graph nodes")
        self._graph = graph
        self._noise = dict(noise)
        self._functions = dict(functions)
        self._topo = graph.topological_order()
        alphabets: dict[int, tuple[int, ...]] = {}
        for v in self._topo:
            table = self._functions[v]
            expected_parents = tuple(sorted(graph.parents(v)))
            if table.parent_order != expected_parents:
                raise ValueError(
                    f"node {graph.label(v)}: parent_order {table.parent_order} "
                    f"is not the canonical {expected_parents}"
                )
            outs: set[int] = set()
            count = 0
            for combo in product(*(alphabets[p] for p in table.parent_order)):
                for u in self._noise[v].support:
                    key = (*combo, u)
                    if key not in table.entries:
                        raise ValueError(
                            f"node {graph.label(v)}: table missing entry for {key}"
                        )
                    outs.add(table.entries[key])
                    count += 1
            if count != len(table.entries):
                raise ValueError(
                    f"node {graph.label(v)}: table has entries outside its domain"
                )
            alphabets[v] = tuple(sorted(outs))
        self._alphabets = alphabets
        self.meta = meta

    @property
    def graph(self) -> Dag:
        return self._graph

    @property
    def noise(self) -> dict[NodeId, Pmf]:
        return self._noise

    @property
    def functions(self) -> dict[NodeId, StructuralTable]:
        return self._functions

    @property
    def alphabets(self) -> dict[NodeId, tuple[int, ...]]:
        return self._alphabets

    @property
    def topological_order(self) -> tuple[NodeId, ...]:
        return self._topo

    def label(self, v: NodeId) -> str:
        return self._graph.label(v)

    def noise_node(self, v: NodeId) -> NodeId:
        """Id of the explicit noise variable feeding ``v``."""
        self._graph.label(v)  # membership check
        return len(self._graph.labels) + v

    def noise_label(self, v: NodeId) -> str:
        return "N_" + self._graph.label(v)

    def evaluate(self, noise_values: Mapping[NodeId, int]) -> dict[NodeId, int]:
        """Propagate one noise assignment through the structural tables."""
        values: dict[int, int] = {}
        for v in self._topo:
            table = self._functions[v]
            parent_vals = tuple(values[p] for p in table.parent_order)
            values[v] = table.evaluate(parent_vals, noise_values[v])
        return values


def explicit_noise_graph(m: Scm) -> Dag:
    """The graph extended with one exogenous noise parent per node."""
    base = m.graph
    n = len(base.labels)
    noise_labels = tuple(m.noise_label(v) for v in range(n))
    clash = set(base.labels) & set(noise_labels)
    if clash:
        raise ValueError(f"noise labels collide with node labels: {sorted(clash)}")
    labels = base.labels + noise_labels
    nodes = set(base.nodes) | {n + v for v in base.nodes}
    edges = set(base.edges) | {(n + v, v) for v in base.nodes}
    return Dag(labels, edges, nodes)


def noise_entropy(m: Scm, v: NodeId) -> float:
    """Entropy of the node's noise distribution, in bits."""
    return m.noise[v].entropy_bits()


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of one assumption check; witnesses are non-empty iff it fails."""

    assumption: str
    holds: bool
    witnesses: tuple = ()
    detail: str = ""

    def __post_init__(self) -> None:
        if self.holds and self.witnesses:
            raise ValueError("a holding assumption cannot carry witnesses")
        if not self.holds and not self.witnesses:
            raise ValueError("a failing assumption needs at least one witness")


def check_injective_noise(m: Scm) -> AssumptionReport:
    """For every fixed parent assignment, noise -> output must be one-to-one."""
    witnesses: list[tuple] = []
    for v in sorted(m.graph.nodes):
        table = m.functions[v]
        sup = m.noise[v].support
        found = False
        for combo in product(*(m.alphabets[p] for p in table.parent_order)):
            seen: dict[int, int] = {}
            for u in sup:
                out = table.entries[(*combo, u)]
                if out in seen:
                    witnesses.append((m.label(v), combo, seen[out], u, out))
                    found = True
                    break
                seen[out] = u
            if found:
                break
    return AssumptionReport("injective_noise", not witnesses, tuple(witnesses))


def check_injective_noise_plus_one(m: Scm) -> AssumptionReport:
    """Holding the other parents fixed, (one parent, noise) -> output is one-to-one.

    Vacuous for source nodes.
    """
    witnesses: list[tuple] = []
    for v in sorted(m.graph.nodes):
        table = m.functions[v]
        sup = m.noise[v].support
        pas = table.parent_order
        for j, p in enumerate(pas):
            others = [m.alphabets[o] for k, o in enumerate(pas) if k != j]
            found = False
            for other_combo in product(*others):
                seen: dict[int, tuple[int, int]] = {}
                for pv in m.alphabets[p]:
                    combo = other_combo[:j] + (pv,) + other_combo[j:]
                    for u in sup:
                        out = table.entries[(*combo, u)]
                        if out in seen:
                            witnesses.append(
                                (m.label(v), m.label(p), other_combo, seen[out], (pv, u), out)
                            )
                            found = True
                            break
                        seen[out] = (pv, u)
                    if found:
                        break
                if found:
                    break
            if found:
                break
    return AssumptionReport("injective_noise_plus_one", not witnesses, tuple(witnesses))


def check_nonconstant_noise(m: Scm) -> AssumptionReport:
    """Every noise Pmf must put positive probability on at least two values."""
    witnesses = tuple(
        (m.label(v),)
        for v in sorted(m.graph.nodes)
        if len(m.noise[v].positive_support()) < 2
    )
    return AssumptionReport("nonconstant_noise", not witnesses, witnesses)


def check_noise_entropy_order(m: Scm, mode: str, tol: float = 1e-12) -> AssumptionReport:
    """Noise entropy must not decrease (``weak``) or must increase (``strict``)
    from any node to each of its descendants."""
    if mode not in ("weak", "strict"):
        raise ValueError(f"unknown entropy order mode {mode!r}")
    ent = {v: noise_entropy(m, v) for v in m.graph.nodes}
    witnesses: list[tuple] = []
    for v in sorted(m.graph.nodes):
        for d in sorted(m.graph.descendants(v)):
            if mode == "weak":
                ok = ent[v] <= ent[d] + tol
            else:
                ok = ent[d] - ent[v] > tol
            if not ok:
                witnesses.append((m.label(v), m.label(d), ent[v], ent[d]))
    return AssumptionReport(f"{mode}_entropy_order", not witnesses, tuple(witnesses))


def check_directed_faithfulness(
    m: Scm, tol: float = 1e-9, budget: int | None = None
) -> AssumptionReport:
    """Each noise variable must be dependent on every descendant of its node."""
    table = _oracle.joint_distribution(m, include_noise=True, budget=budget)
    orc = _oracle.EntropyOracle(table)
    witnesses: list[tuple] = []
    for v in sorted(m.graph.nodes):
        for d in sorted(m.graph.descendants(v)):
            mi = orc.mutual_information({m.noise_node(v)}, {d})
            if mi <= tol:
                witnesses.append((m.noise_label(v), m.label(d), mi))
    return AssumptionReport("directed_faithfulness", not witnesses, tuple(witnesses))


def check_faithfulness(
    m: Scm,
    tol: float = 1e-9,
    exhaustive_limit: int = 6,
    budget: int | None = None,
    oracle: "_oracle.EntropyOracle | None" = None,
) -> AssumptionReport:
    """Observed conditional independences must coincide with d-separations.

    Exhaustive over all disjoint X, Y, S triples up to ``exhaustive_limit``
    nodes; beyond that only singleton X, Y pairs are checked and the report
    says so. An independence where the graph is d-connected is a violation;
    the converse would mean broken arithmetic and raises.
    """
    g = m.graph
    nodes = sorted(g.nodes)
    n = len(nodes)
    orc = oracle if oracle is not None else _oracle.EntropyOracle(
        _oracle.joint_distribution(m, budget=budget)
    )
    witnesses: list[tuple] = []
    exhaustive = n <= exhaustive_limit

    def probe(xs: frozenset[int], ys: frozenset[int], ss: frozenset[int]) -> None:
        mi = orc.mutual_information(xs, ys, ss)
        sep = d_separated(g, xs, ys, ss)
        if sep and mi > tol:
            raise RuntimeError(
                f"d-separated sets show mutual information {mi}; "
                "exact arithmetic is broken"
            )
        if not sep and mi <= tol:
            witnesses.append(
                (
                    tuple(m.label(v) for v in sorted(xs)),
                    tuple(m.label(v) for v in sorted(ys)),
                    tuple(m.label(v) for v in sorted(ss)),
                    mi,
                )
            )

    if exhaustive:
        for digits in product(range(4), repeat=n):
            xs = frozenset(v for v, d in zip(nodes, digits) if d == 1)
            ys = frozenset(v for v, d in zip(nodes, digits) if d == 2)
            ss = frozenset(v for v, d in zip(nodes, digits) if d == 3)
            if not xs or not ys:
                continue
            if min(xs) > min(ys):  # (X, Y) and (Y, X) are the same question
                continue
            probe(xs, ys, ss)
        detail = "exhaustive triples"
    else:
        for i, x in enumerate(nodes):
            for y in nodes[i + 1:]:
                rest = [v for v in nodes if v != x and v != y]
                for mask in range(1 << len(rest)):
                    ss = frozenset(v for k, v in enumerate(rest) if mask >> k & 1)
                    probe(frozenset({x}), frozenset({y}), ss)
        detail = "singleton pairs only"
    return AssumptionReport("faithfulness", not witnesses, tuple(witnesses), detail)


# --- generation --------------------------------------------------------------

PROFILES = ("base", "plus_one", "sir_faithful")
ENTROPY_MODES = ("known", "weak", "strict")


class GenerationError(RuntimeError):
    """No SCM satisfying the requested configuration was found."""


@dataclass(frozen=True)
class ScmMeta:
    """How a generated instance was produced and what was verified."""

    profile: str
    entropy_mode: str
    seed: int
    attempts: int
    faithfulness_scope: str


@dataclass(frozen=True)
class GeneratorConfig:
    nodes: int
    edge_prob: float = 0.35
    noise_support_sizes: tuple[int, int] = (2, 3)
    alphabet_sizes: tuple[int, int] = (2, 4)
    profile: str = "base"
    entropy_mode: str = "known"
    max_retries: int = 60
    table_budget: int = 1 << 18
    enumeration_budget: int = _oracle.DEFAULT_ENUMERATION_BUDGET
    faithfulness_exhaustive_limit: int = 6
    strict_entropy_gap: float = 1e-6

    def __post_init__(self) -> None:
        if self.nodes < 1:
            raise ValueError("nodes must be positive")
        if not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError("edge_prob must lie in [0, 1]")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; choose from {PROFILES}")
        if self.entropy_mode not in ENTROPY_MODES:
            raise ValueError(
                f"unknown entropy mode {self.entropy_mode!r}; choose from {ENTROPY_MODES}"
            )
        lo, hi = self.noise_support_sizes
        if not 1 <= lo <= hi:
            raise ValueError("noise_support_sizes must be an ordered positive pair")
        lo, hi = self.alphabet_sizes
        if not 1 <= lo <= hi:
            raise ValueError("alphabet_sizes must be an ordered positive pair")
        if self.max_retries < 1:
            raise ValueError("max_retries must be positive")


class _Retry(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _default_labels(n: int) -> list[str]:
    if n <= 26:
        return [chr(ord("A") + i) for i in range(n)]
    return [f"V{i}" for i in range(n)]


def _sample_pmfs(
    cfg: GeneratorConfig, rng: random.Random, g: Dag, topo: tuple[int, ...]
) -> dict[int, Pmf]:
    smin, smax = cfg.noise_support_sizes
    sizes = {v: rng.randint(smin, smax) for v in topo}
    if cfg.entropy_mode != "known":
        # ascending support sizes along the order keep higher entropies reachable
        ordered = sorted(sizes.values())
        sizes = {v: ordered[i] for i, v in enumerate(topo)}
    pmfs: dict[int, Pmf] = {}
    ent: dict[int, float] = {}
    for v in topo:
        bound = max((ent[a] for a in g.ancestors(v)), default=None)
        size = sizes[v]
        for _ in range(400):
            weights = rng.sample(range(1, 64), size) if size > 1 else [1]
            pmf = Pmf.from_weights(range(size), weights)
            h = pmf.entropy_bits()
            if bound is None or cfg.entropy_mode == "known":
                ok = True
            elif cfg.entropy_mode == "weak":
                ok = h >= bound
            else:
                ok = h >= bound + cfg.strict_entropy_gap
            if ok:
                break
        else:
            raise _Retry(
                f"no noise pmf of support size {size} with entropy above {bound:.4f}"
            )
        pmfs[v] = pmf
        ent[v] = h
    return pmfs


def _plus_one_tables(
    cfg: GeneratorConfig, g: Dag, topo: tuple[int, ...], pmfs: dict[int, Pmf]
) -> dict[int, StructuralTable]:
    # scaled sum: output = sum(parents) + K * noise with K past any parent sum,
    # so the map is one-to-one jointly in (any single parent, noise)
    alphabets: dict[int, tuple[int, ...]] = {}
    tables: dict[int, StructuralTable] = {}
    total = 0
    for v in topo:
        pas = tuple(sorted(g.parents(v)))
        sup = pmfs[v].support
        k = 1 + sum(max(alphabets[p]) for p in pas)
        size = len(sup) * math.prod(len(alphabets[p]) for p in pas)
        total += size
        if total > cfg.table_budget:
            raise _Retry(
                f"structural tables need more than {cfg.table_budget} entries"
            )
        entries: dict[tuple[int, ...], int] = {}
        outs: set[int] = set()
        for combo in product(*(alphabets[p] for p in pas)):
            s = sum(combo)
            for u in sup:
                out = s + k * u
                entries[(*combo, u)] = out
                outs.add(out)
        alphabets[v] = tuple(sorted(outs))
        tables[v] = StructuralTable(pas, entries)
    return tables


def _injection_tables(
    cfg: GeneratorConfig,
    rng: random.Random,
    g: Dag,
    topo: tuple[int, ...],
    pmfs: dict[int, Pmf],
) -> dict[int, StructuralTable]:
    # one random injection of the noise support per parent assignment;
    # re-drawn until every parent actually influences the output somewhere
    amin, amax = cfg.alphabet_sizes
    alphabets: dict[int, tuple[int, ...]] = {}
    tables: dict[int, StructuralTable] = {}
    total = 0
    for v in topo:
        pas = tuple(sorted(g.parents(v)))
        sup = pmfs[v].support
        size = max(len(sup), rng.randint(amin, amax))
        domain = list(product(*(alphabets[p] for p in pas)))
        total += len(domain) * len(sup)
        if total > cfg.table_budget:
            raise _Retry(f"structural tables need more than {cfg.table_budget} entries")
        for _ in range(60):
            maps = {combo: tuple(rng.sample(range(size), len(sup))) for combo in domain}
            if all(_parent_matters(maps, domain, pas, j) for j in range(len(pas))):
                break
        else:
            raise _Retry(f"node {g.label(v)} would not depend on every parent")
        entries = {
            (*combo, u): maps[combo][i]
            for combo in domain
            for i, u in enumerate(sup)
        }
        alphabets[v] = tuple(sorted({out for m in maps.values() for out in m}))
        tables[v] = StructuralTable(pas, entries)
    return tables


def _parent_matters(maps, domain, pas, j: int) -> bool:
    groups: dict[tuple, tuple] = {}
    for combo in domain:
        key = combo[:j] + combo[j + 1:]
        prev = groups.get(key)
        if prev is None:
            groups[key] = maps[combo]
        elif prev != maps[combo]:
            return True
    return False


def generate_scm(cfg: GeneratorConfig, seed: int) -> Scm:
    """Generate an SCM matching the profile and entropy mode, or raise.

    Deterministic in (cfg, seed). Every constructed candidate is re-checked
    with the reporting validators; candidates failing faithfulness (or
    directed faithfulness for the ``sir_faithful`` profile) are discarded
    and regenerated.
    """
    rng = random.Random(seed)
    last = "no attempt ran"
    for attempt in range(1, cfg.max_retries + 1):
        try:
            return _generate_once(cfg, rng, seed, attempt)
        except _Retry as r:
            last = r.reason
    raise GenerationError(
        f"profile={cfg.profile!r} entropy={cfg.entropy_mode!r} nodes={cfg.nodes} "
        f"unsatisfied after {cfg.max_retries} attempts (last failure: {last})"
    )


def _generate_once(
    cfg: GeneratorConfig, rng: random.Random, seed: int, attempt: int
) -> Scm:
    n = cfg.nodes
    labels = _default_labels(n)
    order = list(range(n))
    rng.shuffle(order)
    edges = [
        (order[i], order[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < cfg.edge_prob
    ]
    g = Dag(labels, edges)
    topo = g.topological_order()

    pmfs = _sample_pmfs(cfg, rng, g, topo)
    if cfg.profile == "plus_one":
        tables = _plus_one_tables(cfg, g, topo, pmfs)
    else:
        tables = _injection_tables(cfg, rng, g, topo, pmfs)
    m = Scm(g, pmfs, tables)

    # construction is re-verified, never trusted
    if not check_nonconstant_noise(m).holds:
        raise _Retry("constructed noise was constant")
    if not check_injective_noise(m).holds:
        raise _Retry("constructed table lost noise injectivity")
    if cfg.profile == "plus_one" and not check_injective_noise_plus_one(m).holds:
        raise _Retry("constructed table lost single-parent injectivity")
    if cfg.entropy_mode in ("weak", "strict"):
        if not check_noise_entropy_order(m, cfg.entropy_mode).holds:
            raise _Retry(f"noise entropies lost the {cfg.entropy_mode} order")

    orc = _oracle.EntropyOracle(
        _oracle.joint_distribution(m, budget=cfg.enumeration_budget)
    )
    faith = check_faithfulness(
        m,
        exhaustive_limit=cfg.faithfulness_exhaustive_limit,
        oracle=orc,
    )
    if not faith.holds:
        raise _Retry(f"faithfulness violated ({len(faith.witnesses)} independences)")
    if cfg.profile == "sir_faithful":
        directed = check_directed_faithfulness(m, budget=cfg.enumeration_budget)
        if not directed.holds:
            raise _Retry(
                f"directed faithfulness violated ({len(directed.witnesses)} pairs)"
            )
    m.meta = ScmMeta(cfg.profile, cfg.entropy_mode, seed, attempt, faith.detail)
    return m


# --- sampling ----------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """Rows of full observed assignments, aligned with ``variables``."""

    variables: tuple[NodeId, ...]
    labels: tuple[str, ...]
    rows: tuple[tuple[int, ...], ...]


def sample(m: Scm, seed: int, n: int) -> Dataset:
    """Draw ``n`` independent rows by forward evaluation; deterministic per seed."""
    if n < 0:
        raise ValueError("sample size must be non-negative")
    rng = random.Random(seed)
    variables = tuple(sorted(m.graph.nodes))
    labels = tuple(m.label(v) for v in variables)
    rows = []
    for _ in range(n):
        noise_values = {v: m.noise[v].sample(rng) for v in m.topological_order}
        values = m.evaluate(noise_values)
        rows.append(tuple(values[v] for v in variables))
    return Dataset(variables, labels, tuple(rows))


def render_dataset(d: Dataset) -> str:
    lines = [",".join(d.labels)]
    lines.extend(",".join(str(x) for x in row) for row in d.rows)
    return "\n".join(lines) + "\n"


def parse_dataset(text: str) -> Dataset:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("dataset text is empty")
    labels = tuple(p.strip() for p in lines[0].split(","))
    rows = []
    for ln in lines[1:]:
        cells = tuple(int(p) for p in ln.split(","))
        if len(cells) != len(labels):
            raise ValueError(f"row {ln!r} does not match the header width")
        rows.append(cells)
    return Dataset(tuple(range(len(labels))), labels, tuple(rows))


# --- file format --------------------------------------------------------------


def _prob_to_json(p: Fraction | float):
    if isinstance(p, Fraction):
        return str(p) if p.denominator > 1 else str(p.numerator)
    return p


def _prob_from_json(raw) -> Fraction | float:
    if isinstance(raw, bool):
        raise ValueError(f"invalid probability {raw!r}")
    if isinstance(raw, float):
        return raw
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, str):
        return Fraction(raw)
    raise ValueError(f"invalid probability {raw!r}")


def scm_to_dict(m: Scm) -> dict:
    nodes = [
        {"label": m.label(v), "alphabet": list(m.alphabets[v])}
        for v in sorted(m.graph.nodes)
    ]
    edges = sorted([m.label(u), m.label(v)] for u, v in m.graph.edges)
    noise = {
        m.label(v): {
            "support": list(m.noise[v].support),
            "probs": [_prob_to_json(p) for p in m.noise[v].probs],
        }
        for v in sorted(m.graph.nodes)
    }
    functions = {}
    for v in sorted(m.graph.nodes):
        table = m.functions[v]
        rows = [
            {"parents": list(key[:-1]), "noise": key[-1], "out": out}
            for key, out in sorted(table.entries.items())
        ]
        functions[m.label(v)] = {
            "parent_order": [m.label(p) for p in table.parent_order],
            "table": rows,
        }
    return {"nodes": nodes, "edges": edges, "noise": noise, "functions": functions}


def scm_to_text(m: Scm) -> str:
    return json.dumps(scm_to_dict(m), indent=2, sort_keys=True) + "\n"


def scm_from_dict(data: dict) -> Scm:
    try:
        node_specs = data["nodes"]
        edge_specs = data["edges"]
        noise_specs = data["noise"]
        function_specs = data["functions"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"SCM object is missing section {exc}") from None
    labels = [spec["label"] for spec in node_specs]
    g = Dag.of(labels, [(a, b) for a, b in edge_specs])
    ids = {lab: i for i, lab in enumerate(labels)}
    noise = {}
    functions = {}
    for lab in labels:
        if lab not in noise_specs:
            raise ValueError(f"node {lab!r} has no noise entry")
        if lab not in function_specs:
            raise ValueError(f"node {lab!r} has no function entry")
        spec = noise_specs[lab]
        noise[ids[lab]] = Pmf.of(
            spec["support"], [_prob_from_json(p) for p in spec["probs"]]
        )
        fspec = function_specs[lab]
        parent_order = tuple(ids[p] for p in fspec["parent_order"])
        entries = {}
        for row in fspec["table"]:
            key = (*(int(x) for x in row["parents"]), int(row["noise"]))
            if key in entries:
                raise ValueError(f"node {lab!r} has duplicate table row {key}")
            entries[key] = int(row["out"])
        functions[ids[lab]] = StructuralTable(parent_order, entries)
    m = Scm(g, noise, functions)
    for spec in node_specs:
        declared = tuple(int(x) for x in spec["alphabet"])
        computed = m.alphabets[ids[spec["label"]]]
        if declared != computed:
            raise ValueError(
                f"node {spec['label']!r} declares alphabet {declared} "
                f"but its table yields {computed}"
            )
    return m


def parse_scm(text: str) -> Scm:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"SCM file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError("SCM file must hold a JSON object")
    return scm_from_dict(data)
