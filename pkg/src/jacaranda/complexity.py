"""Exact patch census of a substitution fixed point.

A patch of size n is a depth-n window of the generated tree; kappa_n counts
the distinct ones.  Enumeration walks every address of the generated prefix,
deduplicates windows by their exact bit content, and records per patch the
first witness address overall and per parity class (odd length / positive
even length / the root).  Counts are certified by a stabilization sweep:
the generation depth grows until two successive depths yield the same count,
and anything that never stabilizes under the configured cap is flagged,
never silently reported as exact.

Two independent counters exist for the even side: the witness-parity count
from enumeration and the number of distinct one-step images of the depth-n
patch set (the image construction is depth-doubling and injective, so both
must equal kappa_n; `check_inequalities` and the acceptance suite compare
them).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

from jacaranda.core import (
    JACARANDA,
    TreePrefix,
    TreeSubstitution,
    address_from_index,
    fixed_point,
)

__all__ = [
    "Occurrence",
    "Enumeration",
    "PatchUniverse",
    "KappaRow",
    "KappaTable",
    "BoundCheck",
    "BoundsReport",
    "check_inequalities",
    "MajorantSequence",
    "majorant_sequence",
]

Witness = tuple[int, int]  # (address length, index within level)


@dataclass
class Occurrence:
    """Dedup record for one patch: smallest witnesses per parity class."""

    patch: TreePrefix
    first: Witness
    odd: Witness | None = None
    even: Witness | None = None
    at_root: bool = False

    def visit(self, witness: Witness) -> None:
        if witness < self.first:
            self.first = witness
        length = witness[0]
        if length == 0:
            self.at_root = True
        elif length & 1:
            if self.odd is None or witness < self.odd:
                self.odd = witness
        else:
            if self.even is None or witness < self.even:
                self.even = witness

    def merge(self, other: "Occurrence") -> None:
        self.visit(other.first)
        if other.odd is not None:
            self.visit(other.odd)
        if other.even is not None:
            self.visit(other.even)
        if other.at_root:
            self.at_root = True

    def witness_addresses(self) -> dict:
        def fmt(w: Witness | None):
            return None if w is None else address_from_index(w[0], w[1])

        return {
            "first": fmt(self.first),
            "odd": fmt(self.odd),
            "even": fmt(self.even),
            "at_root": self.at_root,
        }


@dataclass
class Enumeration:
    """Stabilized window census at one patch size."""

    n: int
    occurrences: dict[TreePrefix, Occurrence]
    counts_by_depth: list[tuple[int, int]]  # (generation depth, count)
    depth_used: int
    stabilized: bool

    @property
    def count(self) -> int:
        return len(self.occurrences)

    @property
    def count_odd(self) -> int:
        return sum(1 for occ in self.occurrences.values() if occ.odd is not None)

    @property
    def count_even(self) -> int:
        return sum(1 for occ in self.occurrences.values() if occ.even is not None)

    def patches(self) -> list[TreePrefix]:
        return sorted(self.occurrences, key=TreePrefix.sort_key)


def _scan_level(tree: TreePrefix, n: int, length: int, lo: int, hi: int
                ) -> dict[TreePrefix, Occurrence]:
    found: dict[TreePrefix, Occurrence] = {}
    for i in range(lo, hi):
        patch = tree._window(length, i, n)
        occ = found.get(patch)
        if occ is None:
            found[patch] = Occurrence(patch, (length, i))
        else:
            occ.visit((length, i))
    return found


def _merge(target: dict[TreePrefix, Occurrence],
           parts: Iterable[dict[TreePrefix, Occurrence]]) -> None:
    for part in parts:
        for patch, occ in part.items():
            known = target.get(patch)
            if known is None:
                target[patch] = occ
            else:
                known.merge(occ)


class PatchUniverse:
    """Window enumeration over one generated fixed-point prefix.

    Enumerations are cached per patch size; all counts coming out of this
    object carry their stabilization status.  Worker parallelism partitions
    each address level by its leading letters and merges in a fixed order,
    so results are bit-identical for every worker count.
    """

    def __init__(self, rule: TreeSubstitution = JACARANDA, root_color: int = 0,
                 generation_depth: int = 26, margin: int = 8, workers: int = 1,
                 tree: TreePrefix | None = None):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        if tree is None:
            tree = fixed_point(rule, root_color, generation_depth)
        self.rule = rule
        self.root_color = root_color
        self.tree = tree
        self.generation_depth = tree.depth
        self.margin = margin
        self.workers = workers
        self._enumerations: dict[int, Enumeration] = {}

    # -- enumeration --------------------------------------------------------

    def _schedule(self, n: int) -> list[int]:
        # Two runs must fit under the cap for the agreement test; near the
        # cap the start backs off from n + margin to cap - 2.
        start = min(n + self.margin, self.generation_depth - 2)
        if start <= n:
            raise ValueError(
                f"generation depth {self.generation_depth} is too shallow "
                f"for patches of size {n}")
        return list(range(start, self.generation_depth + 1, 2))

    def _scan(self, n: int, length: int) -> list[dict[TreePrefix, Occurrence]]:
        split = max(self.workers - 1, 0).bit_length()  # ceil(log2(workers))
        if self.workers == 1 or length < split:
            return [_scan_level(self.tree, n, length, 0, 1 << length)]
        step = 1 << (length - split)
        jobs = [(length, q * step, (q + 1) * step) for q in range(1 << split)]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(
                lambda job: _scan_level(self.tree, n, *job), jobs))

    def enumeration(self, n: int) -> Enumeration:
        if n < 1:
            raise ValueError("patch size must be >= 1")
        if n >= self.generation_depth:
            raise ValueError(
                f"patch size {n} needs generation depth > {n}")
        cached = self._enumerations.get(n)
        if cached is not None:
            return cached
        schedule = self._schedule(n)
        occurrences: dict[TreePrefix, Occurrence] = {}
        counts: list[tuple[int, int]] = []
        stabilized = False
        next_length = 0
        depth_used = schedule[0]
        for depth in schedule:
            for length in range(next_length, depth - n + 1):
                _merge(occurrences, self._scan(n, length))
            next_length = depth - n + 1
            counts.append((depth, len(occurrences)))
            depth_used = depth
            if len(counts) >= 2 and counts[-1][1] == counts[-2][1]:
                stabilized = True
                break
        result = Enumeration(n, occurrences, counts, depth_used, stabilized)
        self._enumerations[n] = result
        return result

    # -- counts -------------------------------------------------------------

    def kappa(self, n: int) -> tuple[int, bool]:
        enum = self.enumeration(n)
        return enum.count, enum.stabilized

    def kappa_split(self, n: int) -> tuple[int, int]:
        """(odd-witnessed, even-witnessed) patch counts; classes may overlap."""
        enum = self.enumeration(n)
        return enum.count_odd, enum.count_even

    def patches(self, n: int) -> list[TreePrefix]:
        return self.enumeration(n).patches()

    def images(self, n: int) -> set[TreePrefix]:
        """One-step images of the size-n patch set (each has depth 2n)."""
        return {self.rule.apply(patch) for patch in self.patches(n)}

    def kappa_even_via_images(self, n: int) -> int:
        """Independent counter for the even side of kappa_{2n}."""
        return len(self.images(n))

    def row(self, n: int) -> "KappaRow":
        enum = self.enumeration(n)
        return KappaRow(n, enum.count, enum.count_odd, enum.count_even,
                        enum.depth_used, enum.stabilized)

    def table(self, n_max: int) -> "KappaTable":
        rows = [self.row(n) for n in range(1, n_max + 1)]
        return KappaTable(rows, {
            "rule": repr(self.rule),
            "root_color": self.root_color,
            "generation_depth": self.generation_depth,
            "margin": self.margin,
            "workers": self.workers,
        })


# --------------------------------------------------------------------------
# tables

@dataclass(frozen=True)
class KappaRow:
    n: int
    kappa: int
    kappa_odd: int
    kappa_even: int
    depth_used: int
    stabilized: bool


@dataclass
class KappaTable:
    rows: list[KappaRow]
    config: dict = field(default_factory=dict)

    def row(self, n: int) -> KappaRow:
        for row in self.rows:
            if row.n == n:
                return row
        raise KeyError(f"no row for n={n}")

    def kappa(self, n: int) -> int:
        return self.row(n).kappa

    @property
    def n_max(self) -> int:
        return max(row.n for row in self.rows)

    @property
    def all_stabilized(self) -> bool:
        return all(row.stabilized for row in self.rows)

    def to_csv(self) -> str:
        lines = ["# config: " + json.dumps(self.config, sort_keys=True)]
        lines.append("n,kappa,kappa_odd,kappa_even,N_used,stabilized")
        for r in self.rows:
            lines.append(f"{r.n},{r.kappa},{r.kappa_odd},{r.kappa_even},"
                         f"{r.depth_used},{str(r.stabilized).lower()}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "rows": [
                {"n": r.n, "kappa": r.kappa, "kappa_odd": r.kappa_odd,
                 "kappa_even": r.kappa_even, "N_used": r.depth_used,
                 "stabilized": r.stabilized}
                for r in self.rows
            ],
        }


# --------------------------------------------------------------------------
# growth bounds

@dataclass(frozen=True)
class BoundCheck:
    name: str
    instance: str
    lhs: int
    rhs: int
    ok: bool


@dataclass
class BoundsReport:
    checks: list[BoundCheck] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[BoundCheck]:
        return [c for c in self.checks if not c.ok]

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [c.__dict__ for c in self.checks],
            "skipped": self.skipped,
        }


def check_inequalities(table: KappaTable) -> BoundsReport:
    """Verify every growth law the patch counts must satisfy.

    Strict monotonicity; kappa_n >= n + 2 for n >= 2 (n = 1 is exempt: only
    two colors exist); kappa_{2n} <= kappa_n + kappa_{n+1} for n >= 2; the
    explicit linear bounds kappa_{2n} <= (beta+3)(n-1)+4 and
    kappa_{2n+1} <= (beta+3)n+3 with beta = kappa_3; and the stationarity
    contrapositive (no plateau may precede a strict rise).  Instances that
    would touch an unstabilized row are listed as skipped.
    """
    report = BoundsReport()
    values = {row.n: row.kappa for row in table.rows if row.stabilized}
    for row in table.rows:
        if not row.stabilized:
            report.skipped.append(f"n={row.n} not stabilized")

    def have(*ns: int) -> bool:
        return all(n in values for n in ns)

    def add(name: str, n: int, lhs: int, rhs: int, ok: bool) -> None:
        report.checks.append(BoundCheck(name, f"n={n}", lhs, rhs, ok))

    ns = sorted(values)
    for n in ns:
        if have(n + 1):
            add("strict_monotonicity", n, values[n + 1], values[n],
                values[n + 1] > values[n])
        if n >= 2:
            add("linear_lower", n, values[n], n + 2, values[n] >= n + 2)
        if n >= 2 and have(2 * n, n + 1):
            add("doubling_upper", n, values[2 * n], values[n] + values[n + 1],
                values[2 * n] <= values[n] + values[n + 1])
    if 3 in values:
        beta = values[3]
        for n in ns:
            if n >= 2 and have(2 * n):
                bound = (beta + 3) * (n - 1) + 4
                add("explicit_even", n, values[2 * n], bound,
                    values[2 * n] <= bound)
            if n >= 2 and have(2 * n + 1):
                bound = (beta + 3) * n + 3
                add("explicit_odd", n, values[2 * n + 1], bound,
                    values[2 * n + 1] <= bound)
    else:
        report.skipped.append("explicit bounds skipped: kappa_3 unavailable")
    for n in ns:
        if have(n + 1, n + 2):
            plateau_then_rise = (values[n + 1] == values[n]
                                 and values[n + 2] > values[n + 1])
            add("stationarity", n, values[n + 2], values[n + 1],
                not plateau_then_rise)
    return report


# --------------------------------------------------------------------------
# majorant sequence

@dataclass
class MajorantSequence:
    """The comparison sequence dominating the patch counts.

    v_2 = alpha, v_3 = beta, v_{2n} = v_n + v_{n+1} and
    v_{2n+1} = v_{2n+2} - 1 for n >= 2.  With (alpha, beta) = (4, kappa_3)
    it majorizes kappa and is linear, which is the engine behind the upper
    complexity bound and the entropy collapse.
    """

    alpha: int
    beta: int
    values: dict[int, int]

    def value(self, n: int) -> int:
        return self.values[n]

    def verify(self) -> BoundsReport:
        report = BoundsReport()
        v = self.values
        n_max = max(v)

        def add(name: str, n: int, lhs: int, rhs: int, ok: bool) -> None:
            report.checks.append(BoundCheck(name, f"n={n}", lhs, rhs, ok))

        for n in range(2, n_max):
            add("increasing", n, v[n + 1], v[n], v[n + 1] > v[n])
        for n in range(2, n_max):
            if 4 * n in v:
                add("double_even_identity", n, v[4 * n],
                    v[2 * n] + v[2 * n + 2] - 1,
                    v[4 * n] == v[2 * n] + v[2 * n + 2] - 1)
            if 4 * n + 2 in v:
                add("double_odd_identity", n, v[4 * n + 2],
                    2 * v[2 * n + 2] - 1,
                    v[4 * n + 2] == 2 * v[2 * n + 2] - 1)
        for n in range(1, n_max):
            if 2 * n + 2 in v and 2 * n in v:
                step = v[2 * n + 2] - v[2 * n]
                ok = step in (self.beta, self.beta + self.alpha - 1)
                add("step_property", n, step, self.beta, ok)
            if 2 * n in v:
                bound = (self.beta + self.alpha - 1) * (n - 1) + self.alpha
                add("linear_bound", n, v[2 * n], bound, v[2 * n] <= bound)
        return report


def majorant_sequence(alpha: int, beta: int, n_max: int) -> MajorantSequence:
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if beta < alpha + 1:
        raise ValueError("beta must be >= alpha + 1")
    if n_max < 4:
        raise ValueError("n_max must be >= 4")
    values: dict[int, int] = {2: alpha, 3: beta}

    def v(n: int) -> int:
        if n not in values:
            if n & 1:
                values[n] = v(n + 1) - 1
            else:
                values[n] = v(n // 2) + v(n // 2 + 1)
        return values[n]

    for n in range(2, n_max + 1):
        v(n)
    values = {n: values[n] for n in sorted(values) if n <= n_max + 1}
    return MajorantSequence(alpha, beta, values)
