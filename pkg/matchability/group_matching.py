"""
matchability group matching
アーベル群におけるマッチング可能性の判定器・証明書・構成子・剰余群への転送

記法は加法的: 組 (a, b) が Δ に属するのは a + b ∉ A のとき。
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import networkx as nx
from networkx.algorithms import bipartite

from config.settings import NAIVE_MAX_SIZE

from .errors import InternalInconsistency, InvalidInput, NoSuitableSubgroup, PreconditionViolated
from .group_core import (
    AbelianGroupLike,
    GroupElement,
    GroupSubset,
    QuotientGroup,
    Subgroup,
    all_subgroups,
    canonical_subset,
    element_order,
    is_union_of_cosets,
    maximal_periodic_part,
    n0_group,
    quotient_group,
    subgroup_generated,
)

# ログ設定
logger = logging.getLogger(__name__)

# 判定器の名前（Verdict の "decider" フィールド）
DECIDER_MATCHING = "find_matching"
DECIDER_CERTIFICATE = "find_certificate"
DECIDER_NAIVE = "naive_unmatchability_witness"

# 剰余群への射影結果のフラグ
GUARANTEE_UNMATCHABLE = "unmatchable-in-quotient"
GUARANTEE_NONE = "no-guarantee"


@dataclass(frozen=True)
class MatchingWitness:
    """マッチング f: A → B（A の正規順に並んだ (a, f(a)) の組）"""

    assignment: Tuple[Tuple[GroupElement, GroupElement], ...]


@dataclass(frozen=True)
class NearlyPeriodicCertificate:
    """ほぼ周期的な分解 A = S ⊔ Y, B = R ⊔ Z（S は H = ⟨R⟩ の剰余類の和、|Y| < |R|）"""

    R: GroupSubset
    S: GroupSubset
    Y: GroupSubset
    Z: GroupSubset
    H: Subgroup


@dataclass(frozen=True)
class GroupVerdict:
    """Matchable(witness) | Unmatchable(certificate) のタグ付き共用体"""

    matchable: bool
    decider: str
    witness: Optional[MatchingWitness] = None
    certificate: Optional[NearlyPeriodicCertificate] = None

    def __post_init__(self) -> None:
        if self.matchable != (self.witness is not None) or self.matchable == (self.certificate is not None):
            raise InvalidInput("A verdict carries exactly one payload matching its tag")


@dataclass(frozen=True)
class QuotientProjection:
    """剰余群 G/H への射影の結果"""

    quotient: QuotientGroup
    projected_A: GroupSubset
    projected_B: GroupSubset
    hypothesis_holds: bool
    guarantee: str
    reason: Optional[str] = None
    certificate: Optional[NearlyPeriodicCertificate] = None


def _pair(G: AbelianGroupLike, A: GroupSubset, B: GroupSubset) -> Tuple[GroupSubset, GroupSubset]:
    A = canonical_subset(G, A)
    B = canonical_subset(G, B)
    if not A or not B:
        raise InvalidInput("A and B must be nonempty")
    if len(A) != len(B):
        raise InvalidInput(f"|A| = {len(A)} differs from |B| = {len(B)}")
    return A, B


def delta_relation(G: AbelianGroupLike, A: GroupSubset, B: GroupSubset) -> List[Tuple[GroupElement, GroupElement]]:
    """Δ = {(a, b) ∈ A × B : a + b ∉ A} を正規順で返す"""
    members = set(A)
    return [(a, b) for a in A for b in B if G.add(a, b) not in members]


def _perfect_matching_size(adjacency: Dict[GroupElement, List[GroupElement]]) -> int:
    graph = nx.Graph()
    left = [("a", a) for a in adjacency]
    graph.add_nodes_from(left)
    for a, partners in adjacency.items():
        for b in partners:
            graph.add_edge(("a", a), ("b", b))
    matching = bipartite.hopcroft_karp_matching(graph, top_nodes=left)
    return sum(1 for node in matching if node[0] == "a")


def find_matching(G: AbelianGroupLike, A: GroupSubset, B: GroupSubset) -> Optional[MatchingWitness]:
    """
    Δ の完全マッチングを探す（存在しなければ None）

    複数ある場合は、A の正規順に並べた像の列が辞書式最小になるものを返す。

    Raises:
        InvalidInput: 空集合またはサイズ不一致
    """
    A, B = _pair(G, A, B)
    adjacency: Dict[GroupElement, List[GroupElement]] = {a: [] for a in A}
    for a, b in delta_relation(G, A, B):
        adjacency[a].append(b)

    if _perfect_matching_size(adjacency) < len(A):
        logger.debug(f"🔍 No perfect matching in Δ for |A| = {len(A)}")
        return None

    # 辞書式最小: 各 a について残りが完全マッチングを持つ最小の b を貪欲に選ぶ
    assignment = []
    used = set()
    for index, a in enumerate(A):
        rest = A[index + 1 :]
        for b in adjacency[a]:
            if b in used:
                continue
            trial_used = used | {b}
            residual = {x: [y for y in adjacency[x] if y not in trial_used] for x in rest}
            if _perfect_matching_size(residual) == len(rest):
                assignment.append((a, b))
                used.add(b)
                break
    return MatchingWitness(tuple(assignment))


def naive_unmatchability_witness(
    G: AbelianGroupLike, A: GroupSubset, B: GroupSubset, max_size: Optional[int] = None
) -> Optional[Tuple[GroupSubset, GroupSubset]]:
    """
    部分集合の全列挙による素朴な判定

    S ⊆ A, R ⊆ B ∪ {0} で S + R = S かつ |S| > |B ∖ R| となる組を探す。
    見つからないことはマッチング可能であることと同値。返す R からは単位元を除く。

    Raises:
        PreconditionViolated: 単位元 ∈ B
        InvalidInput: |A| が上限を超えている
    """
    A, B = _pair(G, A, B)
    identity = G.identity
    if identity in B:
        raise PreconditionViolated("The naive criterion requires the identity to be outside B")
    bound = NAIVE_MAX_SIZE if max_size is None else max_size
    if len(A) > bound:
        raise InvalidInput(f"|A| = {len(A)} exceeds the naive enumeration bound {bound}")

    B_members = set(B)
    pool = tuple(sorted(B_members | {identity}))
    for s_size in range(len(A), 0, -1):
        for S in itertools.combinations(A, s_size):
            S_members = set(S)
            for r_size in range(len(pool), 0, -1):
                for R in itertools.combinations(pool, r_size):
                    if not all(G.add(s, r) in S_members for s in S for r in R):
                        continue
                    if len(S) > len(B_members - set(R)):
                        stripped = tuple(r for r in R if r != identity)
                        return S, (stripped or R)
    return None


def find_certificate(G: AbelianGroupLike, A: GroupSubset, B: GroupSubset) -> Optional[NearlyPeriodicCertificate]:
    """
    ほぼ周期的な分解を部分群の走査で探す（マッチング不能なときに限り見つかる）

    各部分群 H について R := B ∩ H, K := ⟨R⟩, S := A の K-周期的極大部分とし、
    S ≠ ∅ かつ |A ∖ S| < |R| なら採用する。

    Raises:
        InvalidInput: 空集合またはサイズ不一致
    """
    A, B = _pair(G, A, B)
    identity = G.identity
    if identity in B:
        # 自明な場合: S = A, Y = ∅, R = {0}
        R = (identity,)
        return NearlyPeriodicCertificate(
            R=R,
            S=A,
            Y=(),
            Z=tuple(b for b in B if b != identity),
            H=subgroup_generated(G, R),
        )

    B_members = set(B)
    for H in all_subgroups(G):
        R = tuple(b for b in H if b in B_members)
        if not R:
            continue
        K = subgroup_generated(G, R)
        S = maximal_periodic_part(G, A, K)
        if S and len(A) - len(S) < len(R):
            S_members = set(S)
            R_members = set(R)
            logger.debug(f"🧩 Certificate found via subgroup of order {K.order}")
            return NearlyPeriodicCertificate(
                R=R,
                S=S,
                Y=tuple(a for a in A if a not in S_members),
                Z=tuple(b for b in B if b not in R_members),
                H=K,
            )
    return None


def verify_certificate(
    cert: NearlyPeriodicCertificate, G: AbelianGroupLike, A: GroupSubset, B: GroupSubset
) -> bool:
    """証明書の不変条件を (A, B) に対して独立に検査する（真ならマッチング不能）"""
    try:
        A = canonical_subset(G, A)
        B = canonical_subset(G, B)
        R, S, Y, Z = (canonical_subset(G, X) for X in (cert.R, cert.S, cert.Y, cert.Z))
    except InvalidInput:
        return False

    if len(A) != len(B) or not R or not S:
        return False
    # 交わりのない和で A, B を再構成できること
    if set(S) & set(Y) or tuple(sorted(set(S) | set(Y))) != A:
        return False
    if set(R) & set(Z) or tuple(sorted(set(R) | set(Z))) != B:
        return False
    if R == (G.identity,) and G.identity not in B:
        return False

    H = subgroup_generated(G, R)
    if H.carrier != cert.H.carrier:
        return False
    periodic, _ = is_union_of_cosets(G, S, H)
    return periodic and len(Y) < len(R)


def decide(G: AbelianGroupLike, A: GroupSubset, B: GroupSubset) -> GroupVerdict:
    """マッチングを探し、なければ証明書を返す"""
    witness = find_matching(G, A, B)
    if witness is not None:
        return GroupVerdict(matchable=True, decider=DECIDER_MATCHING, witness=witness)
    certificate = find_certificate(G, A, B)
    if certificate is None:
        raise InternalInconsistency("No matching and no certificate; deciders disagree")
    return GroupVerdict(matchable=False, decider=DECIDER_CERTIFICATE, certificate=certificate)


def is_chowla_set(G: AbelianGroupLike, B: GroupSubset) -> bool:
    """すべての x ∈ B について o(x) > |B|"""
    B = canonical_subset(G, B)
    if not B:
        raise InvalidInput("B must be nonempty")
    return all(element_order(G, x) > len(B) for x in B)


def generalized_symmetric_sufficient(G: AbelianGroupLike, A: GroupSubset, B: GroupSubset) -> bool:
    """
    一般化対称条件: 空でないすべての R ⊆ B について |⟨R⟩ ∩ A| ≥ |R|

    部分群 H ごとに |H ∩ A| ≥ |B ∩ H| を調べれば十分。真ならマッチング可能、偽は結論なし。

    Raises:
        PreconditionViolated: 単位元 ∈ A
    """
    A, B = _pair(G, A, B)
    if G.identity in A:
        raise PreconditionViolated("The generalized symmetric criterion requires the identity to be outside A")
    A_members = set(A)
    B_members = set(B)
    for H in all_subgroups(G):
        in_B = sum(1 for x in H if x in B_members)
        if in_B and sum(1 for x in H if x in A_members) < in_B:
            return False
    return True


def _check_boundary_range(G: AbelianGroupLike, n: int) -> None:
    n0 = n0_group(G)
    if n0 is None:
        raise InvalidInput("The group has no nontrivial proper subgroup")
    if not n0 <= n < G.order:
        raise InvalidInput(f"n must satisfy n0(G) = {n0} <= n < |G| = {G.order}, got {n}")


def _suitable_subgroups(G: AbelianGroupLike, n: int) -> List[Subgroup]:
    return [H for H in all_subgroups(G) if 2 <= H.order <= n and (n + 1) % H.order != 0]


def exists_unmatchable_group(G: AbelianGroupLike, n: int) -> bool:
    """
    |A| = |B| = n, 0 ∉ B のマッチング不能な組が存在するか

    そのような組が存在するのは |H| ≤ n かつ |H| ∤ (n+1) となる部分群 H があるときに限る。

    Raises:
        InvalidInput: 非自明な真部分群がない、または n0(G) ≤ n < |G| でない
    """
    _check_boundary_range(G, n)
    return bool(_suitable_subgroups(G, n))


def congruence_guarantee(G: AbelianGroupLike, n: int) -> bool:
    """n ≢ n0 − 1 (mod n0) かつ n0 ≤ n < |G| なら存在が保証される"""
    n0 = n0_group(G)
    if n0 is None or not n0 <= n < G.order:
        return False
    return n % n0 != n0 - 1


def construct_unmatchable_group(
    G: AbelianGroupLike, n: int
) -> Tuple[GroupSubset, GroupSubset, NearlyPeriodicCertificate]:
    """
    マッチング不能な組 (A, B) を証明書付きで構成する

    最小の適切な H をとり、R = H ∖ {0}、S は正規順で先頭の q 個の剰余類、
    Y は G ∖ S の先頭 r 個、Z は G ∖ H の先頭 n − |H| + 1 個。

    Raises:
        InvalidInput: n が範囲外
        NoSuitableSubgroup: |H| ≤ n かつ |H| ∤ (n+1) となる H がない
    """
    _check_boundary_range(G, n)
    candidates = _suitable_subgroups(G, n)
    if not candidates:
        raise NoSuitableSubgroup(f"no H with |H| ≤ {n} and |H| ∤ {n + 1}")
    H = candidates[0]
    m = H.order
    q, r = divmod(n, m)

    identity = G.identity
    R = tuple(h for h in H if h != identity)

    # 剰余類は代表元の正規順に並べる
    S_members: set = set()
    cosets_taken = 0
    for x in G.elements():
        if cosets_taken == q:
            break
        if x in S_members:
            continue
        S_members.update(G.add(x, h) for h in H)
        cosets_taken += 1

    Y = tuple(x for x in G.elements() if x not in S_members)[:r]
    Z = tuple(x for x in G.elements() if x not in H)[: n - m + 1]

    A = tuple(sorted(S_members | set(Y)))
    B = tuple(sorted(set(R) | set(Z)))
    certificate = NearlyPeriodicCertificate(R=R, S=tuple(sorted(S_members)), Y=Y, Z=Z, H=H)
    logger.debug(f"🏗️ Constructed unmatchable pair from subgroup of order {m} (q={q}, r={r})")
    return A, B, certificate


def quotient_project(
    G: AbelianGroupLike,
    H: Subgroup,
    A: GroupSubset,
    B: GroupSubset,
    cert: NearlyPeriodicCertificate,
) -> QuotientProjection:
    """
    マッチング不能な組を剰余群 G/H に射影する

    H ∩ ((S − S) ∪ (R − R)) = {0} なら射影した組もマッチング不能
    （サイズ不一致、または射影した証明書による）。

    Raises:
        InvalidInput: 証明書が (A, B) に対して正しくない
    """
    if not verify_certificate(cert, G, A, B):
        raise InvalidInput("quotient_project requires a valid certificate")
    A, B = _pair(G, A, B)

    differences = {G.add(x, G.neg(y)) for X in (cert.S, cert.R) for x in X for y in X}
    hypothesis = all(h == G.identity or h not in differences for h in H)

    Q = quotient_group(G, H)
    projected_A = tuple(sorted({Q.project(a) for a in A}))
    projected_B = tuple(sorted({Q.project(b) for b in B}))

    if not hypothesis:
        return QuotientProjection(Q, projected_A, projected_B, False, GUARANTEE_NONE)
    if len(projected_A) != len(projected_B):
        return QuotientProjection(Q, projected_A, projected_B, True, GUARANTEE_UNMATCHABLE, reason="size-mismatch")

    projected_S = tuple(sorted({Q.project(s) for s in cert.S}))
    projected_R = tuple(sorted({Q.project(r) for r in cert.R}))
    S_members = set(projected_S)
    R_members = set(projected_R)
    certificate = NearlyPeriodicCertificate(
        R=projected_R,
        S=projected_S,
        Y=tuple(x for x in projected_A if x not in S_members),
        Z=tuple(x for x in projected_B if x not in R_members),
        H=subgroup_generated(Q, projected_R),
    )
    if not verify_certificate(certificate, Q, projected_A, projected_B):
        raise InvalidInput("Projected certificate failed verification")
    return QuotientProjection(
        Q,
        projected_A,
        projected_B,
        True,
        GUARANTEE_UNMATCHABLE,
        reason="projected-certificate",
        certificate=certificate,
    )
