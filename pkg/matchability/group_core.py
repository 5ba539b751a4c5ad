"""
matchability group core
有限アーベル群の演算・部分集合・部分群束・周期性のプリミティブ

群は加法的に書く（単位元は零ベクトル）。元は剰余のタプル、部分集合は辞書式順序で
ソートされた重複なしタプルとして表し、すべての出力を正規形にそろえる。
"""

import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Protocol, Sequence, Tuple

from config.settings import MAX_GROUP_ORDER

from .errors import InvalidInput
from .utils import is_prime, prime_power_parts, smallest_prime_factor

# ログ設定
logger = logging.getLogger(__name__)

GroupElement = Tuple[int, ...]
GroupSubset = Tuple[GroupElement, ...]

# "Z12", "Z2xZ6", "Z/2 x Z/6" のような略記
_SHORTHAND_PATTERN = re.compile(r"^\s*Z\s*/?\s*(\d+)\s*$", re.IGNORECASE)


class AbelianGroupLike(Protocol):
    """判定器が必要とする群のインターフェース（元の群と剰余群の両方が満たす）"""

    @property
    def identity(self) -> GroupElement: ...

    @property
    def order(self) -> int: ...

    def elements(self) -> List[GroupElement]: ...

    def add(self, x: GroupElement, y: GroupElement) -> GroupElement: ...

    def neg(self, x: GroupElement) -> GroupElement: ...

    def contains(self, x: GroupElement) -> bool: ...


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """不変因子 n_1 | n_2 | ... | n_k による有限アーベル群 Z/n_1 × ... × Z/n_k"""

    invariant_factors: Tuple[int, ...]

    def __post_init__(self) -> None:
        factors = tuple(int(n) for n in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", factors)
        for n in factors:
            if n < 2:
                raise InvalidInput(f"Invariant factors must be >= 2, got {list(factors)}")
        for n, n_next in zip(factors, factors[1:]):
            if n_next % n != 0:
                raise InvalidInput(f"Invariant factors must form a divisibility chain, got {list(factors)}")

    @classmethod
    def parse(cls, shorthand: str) -> "FiniteAbelianGroup":
        """
        "Z12" や "Z2xZ6" のような略記から群を作る

        Args:
            shorthand: 略記文字列（"1" または空文字は自明群）

        Returns:
            対応する FiniteAbelianGroup
        """
        text = shorthand.strip()
        if text in {"", "1", "Z1", "trivial"}:
            return cls(())
        factors = []
        for part in re.split(r"[x×*]", text):
            match = _SHORTHAND_PATTERN.match(part)
            if not match:
                raise InvalidInput(f"Cannot parse group shorthand: {shorthand!r}")
            factors.append(int(match.group(1)))
        return cls.from_factors(factors)

    @classmethod
    def from_factors(cls, factors: Sequence[int]) -> "FiniteAbelianGroup":
        """
        任意の巡回因子の積 Z/m_1 × ... × Z/m_r を不変因子の形に直す

        各 m_i を素数冪に分け、素数ごとに大きい冪から順に末尾の因子へ割り当てる。
        例: Z2xZ3 → (6,), Z6xZ2 → (2, 6), Z4xZ2 → (2, 4)

        Raises:
            InvalidInput: 正でない因子を含む
        """
        powers: Dict[int, List[int]] = {}
        for m in factors:
            m = int(m)
            if m < 1:
                raise InvalidInput(f"Cyclic factors must be positive, got {list(factors)}")
            for p, q in prime_power_parts(m).items():
                powers.setdefault(p, []).append(q)
        length = max((len(qs) for qs in powers.values()), default=0)
        invariant = [1] * length
        for qs in powers.values():
            for i, q in enumerate(sorted(qs, reverse=True)):
                invariant[length - 1 - i] *= q
        return cls(tuple(invariant))

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def identity(self) -> GroupElement:
        return (0,) * self.rank

    @property
    def shorthand(self) -> str:
        if not self.invariant_factors:
            return "1"
        return "x".join(f"Z{n}" for n in self.invariant_factors)

    def elements(self) -> List[GroupElement]:
        """全元を辞書式順序で返す"""
        return [tuple(x) for x in itertools.product(*(range(n) for n in self.invariant_factors))]

    def contains(self, x: GroupElement) -> bool:
        return len(x) == self.rank and all(0 <= r < n for r, n in zip(x, self.invariant_factors))

    def element(self, residues: Sequence[int]) -> GroupElement:
        """剰余ベクトルを検証して元を返す"""
        x = tuple(int(r) for r in residues)
        if not self.contains(x):
            raise InvalidInput(f"Element {list(x)} is not in {self.shorthand}")
        return x

    def add(self, x: GroupElement, y: GroupElement) -> GroupElement:
        return tuple((a + b) % n for a, b, n in zip(x, y, self.invariant_factors))

    def neg(self, x: GroupElement) -> GroupElement:
        return tuple((-a) % n for a, n in zip(x, self.invariant_factors))

    def sub(self, x: GroupElement, y: GroupElement) -> GroupElement:
        return tuple((a - b) % n for a, b, n in zip(x, y, self.invariant_factors))


@dataclass(frozen=True)
class Subgroup:
    """部分群（台集合は正規形の部分集合）"""

    carrier: GroupSubset
    _members: FrozenSet[GroupElement] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_members", frozenset(self.carrier))

    @property
    def order(self) -> int:
        return len(self.carrier)

    def __contains__(self, x: object) -> bool:
        return x in self._members

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.carrier)

    def __len__(self) -> int:
        return len(self.carrier)


@dataclass(frozen=True)
class QuotientGroup:
    """
    剰余群 G/H

    各剰余類は辞書式最小の代表元で表す。元の表現は G の元のままなので、
    判定器は元の群と同じように扱える。
    """

    ambient: AbelianGroupLike
    subgroup: Subgroup
    representatives: GroupSubset
    _projection: Dict[GroupElement, GroupElement] = field(repr=False, compare=False)

    @property
    def identity(self) -> GroupElement:
        return self.ambient.identity

    @property
    def order(self) -> int:
        return len(self.representatives)

    def elements(self) -> List[GroupElement]:
        return list(self.representatives)

    def contains(self, x: GroupElement) -> bool:
        return self._projection.get(x) == x

    def project(self, x: GroupElement) -> GroupElement:
        """商写像 π: G → G/H"""
        try:
            return self._projection[x]
        except KeyError:
            raise InvalidInput(f"Element {list(x)} is not in the ambient group") from None

    def add(self, x: GroupElement, y: GroupElement) -> GroupElement:
        return self._projection[self.ambient.add(x, y)]

    def neg(self, x: GroupElement) -> GroupElement:
        return self._projection[self.ambient.neg(x)]


def canonical_subset(G: AbelianGroupLike, elements: Iterable[Sequence[int]]) -> GroupSubset:
    """
    元の集まりを検証し、辞書式順序・重複なしの正規形にする

    Raises:
        InvalidInput: G に属さない元が含まれる
    """
    result = set()
    for residues in elements:
        x = tuple(int(r) for r in residues)
        if not G.contains(x):
            raise InvalidInput(f"Element {list(x)} is not in the group")
        result.add(x)
    return tuple(sorted(result))


def _require_nonempty(X: GroupSubset, name: str) -> None:
    if not X:
        raise InvalidInput(f"{name} must be nonempty")


def _sumset(G: AbelianGroupLike, S: Iterable[GroupElement], R: Iterable[GroupElement]) -> FrozenSet[GroupElement]:
    R = list(R)
    return frozenset(G.add(s, r) for s in S for r in R)


def _cyclic_closure(G: AbelianGroupLike, x: GroupElement) -> FrozenSet[GroupElement]:
    members = {G.identity}
    current = x
    while current not in members:
        members.add(current)
        current = G.add(current, x)
    return frozenset(members)


def subgroup_generated(G: AbelianGroupLike, X: Iterable[GroupElement]) -> Subgroup:
    """
    X が生成する部分群 ⟨X⟩（X = ∅ なら自明群）

    Raises:
        InvalidInput: G に属さない元が含まれる
    """
    members: FrozenSet[GroupElement] = frozenset([G.identity])
    for x in canonical_subset(G, X):
        if x in members:
            continue
        # 部分群と巡回部分群の和集合は再び部分群
        members = _sumset(G, members, _cyclic_closure(G, x))
    return Subgroup(tuple(sorted(members)))


def all_subgroups(G: AbelianGroupLike, max_order: Optional[int] = None) -> List[Subgroup]:
    """
    すべての部分群を（位数, 台集合の辞書式）順で返す

    巡回部分群の結び（join）で閉包をとる。任意の部分群は有限個の巡回部分群の結びなので完全。

    Raises:
        InvalidInput: |G| が上限を超えている
    """
    bound = MAX_GROUP_ORDER if max_order is None else max_order
    if G.order > bound:
        raise InvalidInput(f"Group order {G.order} exceeds the subgroup enumeration bound {bound}")

    cyclic = {_cyclic_closure(G, x) for x in G.elements()}
    found = set(cyclic)
    frontier = list(cyclic)
    while frontier:
        next_frontier = []
        for H in frontier:
            for C in cyclic:
                if C <= H:
                    continue
                joined = _sumset(G, H, C)
                if joined not in found:
                    found.add(joined)
                    next_frontier.append(joined)
        frontier = next_frontier

    subgroups = sorted((tuple(sorted(H)) for H in found), key=lambda carrier: (len(carrier), carrier))
    logger.debug(f"📋 Enumerated {len(subgroups)} subgroups")
    return [Subgroup(carrier) for carrier in subgroups]


def element_order(G: AbelianGroupLike, x: GroupElement) -> int:
    """元の位数 o(x)"""
    if not G.contains(x):
        raise InvalidInput(f"Element {list(x)} is not in the group")
    if isinstance(G, FiniteAbelianGroup):
        return math.lcm(*(n // math.gcd(n, r) for n, r in zip(G.invariant_factors, x))) if G.rank else 1
    return len(_cyclic_closure(G, x))


def product_set(G: AbelianGroupLike, S: GroupSubset, R: GroupSubset) -> GroupSubset:
    """和集合 S + R（乗法記法での SR）"""
    _require_nonempty(S, "S")
    _require_nonempty(R, "R")
    return tuple(sorted(_sumset(G, canonical_subset(G, S), canonical_subset(G, R))))


def is_union_of_cosets(G: AbelianGroupLike, S: GroupSubset, H: Subgroup) -> Tuple[bool, GroupSubset]:
    """
    S が H の剰余類の（交わりのない）和かどうか

    Returns:
        (判定結果, 各剰余類の辞書式最小代表元)。偽のとき代表元は空
    """
    _require_nonempty(S, "S")
    members = set(S)
    representatives = set()
    for s in S:
        coset = [G.add(s, h) for h in H]
        if any(y not in members for y in coset):
            return False, ()
        representatives.add(min(coset))
    return True, tuple(sorted(representatives))


def maximal_periodic_part(G: AbelianGroupLike, A: GroupSubset, H: Subgroup) -> GroupSubset:
    """A に完全に含まれる H-剰余類すべての和（空のこともある）"""
    _require_nonempty(A, "A")
    members = set(A)
    periodic = set()
    for a in A:
        if a in periodic:
            continue
        coset = [G.add(a, h) for h in H]
        if all(y in members for y in coset):
            periodic.update(coset)
    return tuple(sorted(periodic))


def n0_group(G: AbelianGroupLike) -> Optional[int]:
    """
    非自明な真部分群の最小位数 n_0(G)

    Cauchy の定理より |G| の最小素因数 p の位数の元が存在するので、
    |G| が合成数なら n_0 = p、素数または 1 なら存在しない。
    """
    order = G.order
    if order < 2 or is_prime(order):
        return None
    return smallest_prime_factor(order)


def has_matching_property(G: AbelianGroupLike) -> bool:
    """有限アーベル群がマッチング性を持つのは素数位数の巡回群のときに限る"""
    return is_prime(G.order)


def quotient_group(G: AbelianGroupLike, H: Subgroup) -> QuotientGroup:
    """
    剰余群 G/H と商写像

    Raises:
        InvalidInput: H が G の部分群でない
    """
    if G.identity not in H or any(G.add(x, y) not in H for x in H for y in H):
        raise InvalidInput("quotient_group requires a verified subgroup")
    projection: Dict[GroupElement, GroupElement] = {}
    for x in G.elements():
        if x in projection:
            continue
        coset = [G.add(x, h) for h in H]
        representative = min(coset)
        for y in coset:
            projection[y] = representative
    representatives = tuple(sorted(set(projection.values())))
    return QuotientGroup(ambient=G, subgroup=H, representatives=representatives, _projection=projection)
