# Copyright (c) 2025, HUMMBL, LLC
#
# Licensed under the Business Source License 1.1 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://github.com/hummbl-dev/engine-ops/blob/main/LICENSE
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Change Date: 2029-01-01
# Change License: Apache License, Version 2.0

"""
Partitions and Characters

Exact combinatorics: partitions and Frobenius coordinates, symmetric-group
characters by the Murnaghan-Nakayama recursion and by summation over filled
block structures, the finite z-measures, the moments of the controlling
measures and the index sets of injective pair maps.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Dict, Iterator, List, Sequence, Tuple
import math

from .errors import InadmissibleParams, InvalidCoords, SizeGuard, SizeMismatch
from .params import ZParams
from .special_fn import pochhammer

MAX_PARTITION_N = 60
MAX_STRUCTURE_BLOCKS = 8
MAX_STRUCTURE_CHARACTER_N = 14

HOOK = "hook"
HORIZONTAL = "horizontal"
VERTICAL = "vertical"


@dataclass(frozen=True, order=True)
class Partition:
    """Young diagram as a weakly decreasing tuple of positive parts."""

    parts: Tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts) or any(a < b for a, b in zip(parts, parts[1:])):
            raise InvalidCoords(f"not a partition: {parts}", operation="Partition")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(
            tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0]))
        )

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class FrobeniusCoords:
    """Frobenius coordinates (p_1 > ... > p_d >= 0 | q_1 > ... > q_d >= 0)."""

    p: Tuple[int, ...]
    q: Tuple[int, ...]

    def __post_init__(self):
        p, q = tuple(int(v) for v in self.p), tuple(int(v) for v in self.q)
        if len(p) != len(q):
            raise InvalidCoords("p and q must have equal length", operation="FrobeniusCoords")
        for seq in (p, q):
            if any(v < 0 for v in seq) or any(a <= b for a, b in zip(seq, seq[1:])):
                raise InvalidCoords(
                    f"coordinates must strictly decrease to >= 0: {seq}",
                    operation="FrobeniusCoords",
                )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def d(self) -> int:
        return len(self.p)

    @property
    def n(self) -> int:
        return sum(self.p) + sum(self.q) + self.d


def enumerate_partitions(n: int) -> List[Partition]:
    """All partitions of n in reverse lexicographic order."""
    if n > MAX_PARTITION_N:
        raise SizeGuard(f"n={n} exceeds {MAX_PARTITION_N}", operation="enumerate_partitions")
    if n < 0:
        return []
    return [Partition(parts) for parts in _partitions_bounded(n, n)]


def _partitions_bounded(n: int, largest: int) -> Iterator[Tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions_bounded(n - first, first):
            yield (first,) + rest


def frobenius(lam: Partition) -> FrobeniusCoords:
    """Arm and leg lengths along the main diagonal."""
    parts = lam.parts
    conj = lam.conjugate().parts
    d = sum(1 for i, p in enumerate(parts) if p > i)
    return FrobeniusCoords(
        tuple(parts[i] - i - 1 for i in range(d)), tuple(conj[i] - i - 1 for i in range(d))
    )


def from_frobenius(coords: FrobeniusCoords) -> Partition:
    """Inverse of frobenius()."""
    d = coords.d
    if d == 0:
        return Partition(())
    rows = [coords.p[i] + i + 1 for i in range(d)]
    columns = [coords.q[j] + j + 1 for j in range(d)]
    for i in range(d, columns[0]):
        rows.append(sum(1 for c in columns if c > i))
    return Partition(tuple(rows))


def hook_lengths(lam: Partition) -> List[int]:
    conj = lam.conjugate().parts
    return [
        lam.parts[i] - j + conj[j] - i - 1
        for i in range(len(lam.parts))
        for j in range(lam.parts[i])
    ]


def dim(lam: Partition) -> int:
    """Number of standard Young tableaux, by the hook-length formula."""
    if lam.n > MAX_PARTITION_N:
        raise SizeGuard(f"|lambda|={lam.n} exceeds {MAX_PARTITION_N}", operation="dim")
    return math.factorial(lam.n) // math.prod(hook_lengths(lam))


# Murnaghan-Nakayama


@lru_cache(maxsize=200_000)
def _mn_beta(beta: Tuple[int, ...], rho: Tuple[int, ...]) -> int:
    # beta: first-column hook lengths (a beta-set); removing an r-rim hook moves
    # one bead from b to b - r, with sign (-1)^(beads strictly between)
    if not rho:
        return 1
    r, rest = rho[0], rho[1:]
    occupied = set(beta)
    total = 0
    for b in beta:
        target = b - r
        if target < 0 or target in occupied:
            continue
        height = sum(1 for c in beta if target < c < b)
        new_beta = tuple(sorted((c if c != b else target) for c in beta))
        total += (-1) ** height * _mn_beta(new_beta, rest)
    return total


def mn_character(lam: Partition, rho: Sequence[int]) -> int:
    """chi^lambda at cycle type rho, by recursive rim-hook removal."""
    rho = tuple(int(r) for r in rho)
    if lam.n != sum(rho):
        raise SizeMismatch(f"|lambda|={lam.n} but sum(rho)={sum(rho)}", operation="mn_character")
    length = len(lam.parts)
    beta = tuple(sorted(lam.parts[i] + length - 1 - i for i in range(length)))
    return _mn_beta(beta, rho)


def cycle_type_class_size(rho: Sequence[int]) -> int:
    """Number of permutations of cycle type rho."""
    n = sum(rho)
    z = 1
    for r in set(rho):
        k = list(rho).count(r)
        z *= r**k * math.factorial(k)
    return math.factorial(n) // z


# Block structures


@dataclass(frozen=True)
class Fragment:
    """Block positions (in the total order) belonging to one fragment."""

    hook: int
    horizontal: Tuple[int, ...]
    vertical: Tuple[int, ...]


@dataclass(frozen=True)
class Structure:
    """
    Blocks in their total order, each tagged (kind, fragment index).

    Fragments are numbered by the position of their hook block, which
    precedes every other block of the fragment.
    """

    blocks: Tuple[Tuple[str, int], ...]

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def fragments(self) -> List[Fragment]:
        count = sum(1 for kind, _ in self.blocks if kind == HOOK)
        hooks = [0] * count
        horizontal: List[List[int]] = [[] for _ in range(count)]
        vertical: List[List[int]] = [[] for _ in range(count)]
        for pos, (kind, frag) in enumerate(self.blocks):
            if kind == HOOK:
                hooks[frag] = pos
            elif kind == HORIZONTAL:
                horizontal[frag].append(pos)
            else:
                vertical[frag].append(pos)
        return [
            Fragment(hooks[i], tuple(horizontal[i]), tuple(vertical[i])) for i in range(count)
        ]


@dataclass(frozen=True)
class FilledStructure:
    """A structure with hook fillings (p', q') and linear block values."""

    structure: Structure
    hook_fillings: Tuple[Tuple[int, int], ...]
    linear_values: Tuple[int, ...]

    def filling_numbers(self) -> Tuple[List[int], List[int]]:
        """Fragment filling numbers (P_i, Q_i)."""
        frags = self.structure.fragments
        P = [self.hook_fillings[i][0] for i in range(len(frags))]
        Q = [self.hook_fillings[i][1] for i in range(len(frags))]
        linear = iter(self.linear_values)
        for kind, frag in self.structure.blocks:
            if kind == HORIZONTAL:
                P[frag] += next(linear)
            elif kind == VERTICAL:
                Q[frag] += next(linear)
        return P, Q

    def sign(self) -> int:
        P, Q = self.filling_numbers()
        vertical = sum(1 for kind, _ in self.structure.blocks if kind == VERTICAL)
        return _sign(P, Q, vertical)


def _sign(P: Sequence[int], Q: Sequence[int], vertical: int) -> int:
    prod_sign = 1
    for i in range(len(P)):
        for j in range(i + 1, len(P)):
            v = (P[i] - P[j]) * (Q[i] - Q[j])
            if v == 0:
                return 0
            if v < 0:
                prod_sign = -prod_sign
    return prod_sign * (-1) ** ((sum(Q) + vertical) % 2)


def _structures(n: int) -> Iterator[Tuple[Tuple[str, int], ...]]:
    def grow(prefix: Tuple[Tuple[str, int], ...], fragments: int):
        if len(prefix) == n:
            yield prefix
            return
        yield from grow(prefix + ((HOOK, fragments),), fragments + 1)
        for frag in range(fragments):
            yield from grow(prefix + ((HORIZONTAL, frag),), fragments)
            yield from grow(prefix + ((VERTICAL, frag),), fragments)

    if n == 0:
        return
    yield from grow(((HOOK, 0),), 1)


def enumerate_structures(n: int) -> List[Structure]:
    """All structures with n blocks."""
    if n > MAX_STRUCTURE_BLOCKS:
        raise SizeGuard(f"n={n} exceeds {MAX_STRUCTURE_BLOCKS}", operation="enumerate_structures")
    return [Structure(blocks) for blocks in _structures(n)]


@lru_cache(maxsize=None)
def _count_structures(n: int, fragments: int) -> int:
    if n == 1:
        return 1 if fragments == 1 else 0
    if fragments < 1 or fragments > n:
        return 0
    return _count_structures(n - 1, fragments - 1) + 2 * fragments * _count_structures(
        n - 1, fragments
    )


def count_structures(n: int) -> int:
    """Number of n-block structures, by recursion over the fragment count."""
    return sum(_count_structures(n, f) for f in range(1, n + 1))


def filled_structures(structure: Structure, rho: Sequence[int]) -> Iterator[FilledStructure]:
    """All fillings of a structure whose k-th block has cardinality rho[k]."""
    if len(rho) != structure.size:
        raise SizeMismatch("one cardinality per block required", operation="filled_structures")
    hook_sizes = [rho[pos] for pos, (kind, _) in enumerate(structure.blocks) if kind == HOOK]
    linear = tuple(rho[pos] for pos, (kind, _) in enumerate(structure.blocks) if kind != HOOK)
    choices = [[(p, r - 1 - p) for p in range(r)] for r in hook_sizes]
    for fillings in product(*choices):
        yield FilledStructure(structure, tuple(fillings), linear)


def structure_character_table(
    rho: Sequence[int], proper_only: bool = False
) -> Dict[FrobeniusCoords, int]:
    """
    chi^lambda_rho for every lambda with a nonzero value, from one pass over
    filled structures of cardinality rho.

    Blocks take cardinalities in the given order of rho. With proper_only,
    fillings where some prefix has coinciding P's or Q's are skipped.
    """
    rho = tuple(int(r) for r in rho)
    n = sum(rho)
    if n > MAX_STRUCTURE_CHARACTER_N:
        raise SizeGuard(
            f"sum(rho)={n} exceeds {MAX_STRUCTURE_CHARACTER_N}", operation="structure_character"
        )
    table: Dict[FrobeniusCoords, int] = {}
    blocks = len(rho)

    def visit(pos: int, P: List[int], Q: List[int], vertical: int):
        if proper_only and (len(set(P)) < len(P) or len(set(Q)) < len(Q)):
            return
        if pos == blocks:
            sgn = _sign(P, Q, vertical)
            if sgn:
                key = FrobeniusCoords(
                    tuple(sorted(P, reverse=True)), tuple(sorted(Q, reverse=True))
                )
                table[key] = table.get(key, 0) + sgn
            return
        r = rho[pos]
        for p in range(r):
            visit(pos + 1, P + [p], Q + [r - 1 - p], vertical)
        for frag in range(len(P)):
            P[frag] += r
            visit(pos + 1, P, Q, vertical)
            P[frag] -= r
            Q[frag] += r
            visit(pos + 1, P, Q, vertical + 1)
            Q[frag] -= r

    if blocks:
        r = rho[0]
        for p in range(r):
            visit(1, [p], [r - 1 - p], 0)
    else:
        table[FrobeniusCoords((), ())] = 1
    return {k: v for k, v in table.items() if v != 0}


def structure_character(lam: Partition, rho: Sequence[int], proper_only: bool = False) -> int:
    """chi^lambda_rho as a signed sum over filled structures."""
    if lam.n != sum(rho):
        raise SizeMismatch(
            f"|lambda|={lam.n} but sum(rho)={sum(rho)}", operation="structure_character"
        )
    return structure_character_table(rho, proper_only).get(frobenius(lam), 0)


# z-measures


def cauchy_determinant(p: Sequence[int], q: Sequence[int]) -> Fraction:
    """det(1/(p_i + q_j + 1)) by the Cauchy product formula, exactly."""
    num = 1
    den = 1
    d = len(p)
    for i in range(d):
        for j in range(i + 1, d):
            num *= (p[i] - p[j]) * (q[i] - q[j])
        for j in range(d):
            den *= p[i] + q[j] + 1
    return Fraction(num, den)


def _admissible(params: ZParams) -> None:
    if params.is_relaxed:
        raise InadmissibleParams("finite z-measures need admissible (z, z')", operation="z_measure")


def z_measure_prob(params: ZParams, lam: Partition) -> float:
    """P^(n)(lambda) for n = |lambda|."""
    _admissible(params)
    n = lam.n
    if n < 1:
        raise SizeMismatch("need |lambda| >= 1", operation="z_measure_prob")
    coords = frobenius(lam)
    z, zp, t = params.z, params.zprime, params.t
    value = math.factorial(n) * t**coords.d / pochhammer(t, n)
    for p_i, q_i in zip(coords.p, coords.q):
        value *= (
            pochhammer(z + 1, p_i)
            * pochhammer(zp + 1, p_i)
            * pochhammer(1 - z, q_i)
            * pochhammer(1 - zp, q_i)
        ) / (math.factorial(p_i) ** 2 * math.factorial(q_i) ** 2)
    det = float(cauchy_determinant(coords.p, coords.q))
    return float((value * det * det).real)


def z_measure_table(params: ZParams, n: int) -> Dict[Partition, float]:
    """Every partition of n with its z-measure."""
    return {lam: z_measure_prob(params, lam) for lam in enumerate_partitions(n)}


def phi_maps(n: int, d: int) -> List[Tuple[Tuple[int, bool], ...]]:
    """
    Injective maps {1..n} -> {1, 1', ..., d, d'} hitting every pair {m, m'}.

    A map is a tuple of targets (m, primed) for the elements 1..n.
    """
    if d < 1 or not (n <= 2 * d and d <= n):
        return []
    targets = [(m, primed) for m in range(1, d + 1) for primed in (False, True)]
    maps = []
    for image in permutations(targets, n):
        if {m for m, _ in image} == set(range(1, d + 1)):
            maps.append(image)
    return maps


def controlling_moment(params: ZParams, l: Sequence[int]) -> float:
    """
    Mixed moment of the n-th controlling measure,
    int x_1^l_1 ... x_n^l_n sigma_n(dx), as a finite sum over diagrams of size
    sum(l_i + 1) with characters at cycle type (l_1+1, ..., l_n+1).
    """
    _admissible(params)
    l = [int(v) for v in l]
    if len(l) > 4 or any(v > 8 for v in l) or any(v < 0 for v in l):
        raise SizeGuard("need n <= 4 and 0 <= l_i <= 8", operation="controlling_moment")
    rho = tuple(v + 1 for v in l)
    size = sum(rho)
    z, zp, t = params.z, params.zprime, params.t
    total = 0j
    for lam in enumerate_partitions(size):
        chi = mn_character(lam, rho)
        if chi == 0:
            continue
        coords = frobenius(lam)
        term = t**coords.d / pochhammer(t, size)
        for p_i, q_i in zip(coords.p, coords.q):
            term *= (
                pochhammer(z + 1, p_i)
                * pochhammer(zp + 1, p_i)
                * pochhammer(1 - z, q_i)
                * pochhammer(1 - zp, q_i)
            ) / (math.factorial(p_i) * math.factorial(q_i))
        total += chi * term * float(cauchy_determinant(coords.p, coords.q))
    return float(total.real)
