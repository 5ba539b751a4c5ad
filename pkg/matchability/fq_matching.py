"""
matchability linear matching
体拡大 F_p ⊊ F_{p^m} における部分空間のマッチング判定器・証明書・構成子

群の場合（group_matching）と対応するように組み立てている:
剰余類 ↔ 単純拡大の平行移動 aK(x)、部分群 ⟨R⟩ ↔ 部分体 K(R)。
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple

from config.settings import ORACLE_MAX_DEGREE, ORACLE_MAX_DIM

from .errors import InternalInconsistency, InvalidInput, NoSuitableField, PreconditionViolated
from .fq_core import (
    ExtensionField,
    FieldElement,
    FqSubspace,
    complement,
    contains_vector,
    enumerate_subspaces,
    field_elements,
    generated_subfield,
    intersect,
    is_subspace,
    minimal_degree,
    minkowski_span,
    multiplier_space,
    scale,
    span,
    stable_core,
    subfield_subspace,
    subspace_sum,
    subspace_vectors,
    whole_space,
    zero_subspace,
)
from .utils import divisors, is_prime

# ログ設定
logger = logging.getLogger(__name__)

# 判定器の名前（Verdict の "decider" フィールド）
DECIDER_LINEAR_CERTIFICATE = "find_linear_certificate"
DECIDER_CRITERION = "criterion_verdict"
DECIDER_ORACLE = "definitional_oracle"


@dataclass(frozen=True)
class LinearCertificate:
    """A = S ⊕ Y, B = R ⊕ Z（S は R の元による積で安定、dim Y < dim R、K(R) = F_{p^d}）"""

    R: FqSubspace
    S: FqSubspace
    Y: FqSubspace
    Z: FqSubspace
    d: int


@dataclass(frozen=True)
class BasisMatchingWitness:
    """マッチした順序付き基底の組"""

    a_basis: Tuple[FieldElement, ...]
    b_basis: Tuple[FieldElement, ...]


@dataclass(frozen=True)
class LinearVerdict:
    """Matchable | Unmatchable(certificate)。定義どおりの判定器が走ったときは基底ごとの証拠を添える"""

    matchable: bool
    decider: str
    certificate: Optional[LinearCertificate] = None
    witnesses: Optional[Tuple[BasisMatchingWitness, ...]] = None

    def __post_init__(self) -> None:
        if self.matchable == (self.certificate is not None):
            raise InvalidInput("An unmatchable verdict carries exactly one certificate")
        if self.witnesses is not None and not self.matchable:
            raise InvalidInput("Basis witnesses only accompany a matchable verdict")


def _pair(L: ExtensionField, A: FqSubspace, B: FqSubspace) -> None:
    if A.ambient != L or B.ambient != L:
        raise InvalidInput("A and B must be subspaces of the given field")
    if A.is_zero() or B.is_zero():
        raise InvalidInput("A and B must be nonzero")
    if A.dim != B.dim:
        raise InvalidInput(f"dim A = {A.dim} differs from dim B = {B.dim}")


def _one_line(L: ExtensionField) -> FqSubspace:
    return span(L, [L.one])


def criterion_verdict(L: ExtensionField, A: FqSubspace, B: FqSubspace) -> Optional[Tuple[FqSubspace, FqSubspace]]:
    """
    部分空間の全列挙による判定

    0 でない S ⊆ A, R ⊆ B ⊕ K で ⟨SR⟩ = S かつ dim S > dim B − dim(R ∩ B) となる組を探す。
    見つからないことは A が B にマッチすることと同値。

    ⟨SR⟩ = S を満たす R は S の乗数空間 {x : xS ⊆ S} に含まれるので、
    S ごとに R の候補をそこ（と B ⊕ K の交わり）に絞って列挙する。

    Raises:
        PreconditionViolated: 1 ∈ B
        InvalidInput: 次元不一致、または列挙上限超過
    """
    _pair(L, A, B)
    if contains_vector(B, L.one):
        raise PreconditionViolated("The linear criterion requires 1 to be outside B")
    n = B.dim
    BK = subspace_sum(B, _one_line(L))
    # 上限チェックを B ⊕ K 全体に対して先に行う
    enumerate_subspaces(BK, dims=[0])

    candidates_S = [S for S in enumerate_subspaces(A) if not S.is_zero()]
    candidates_S.sort(key=lambda S: (-S.dim, S.basis))
    for S in candidates_S:
        T = intersect(multiplier_space(S), BK)
        if T.is_zero():
            continue
        candidates_R = [R for R in enumerate_subspaces(T) if not R.is_zero()]
        candidates_R.sort(key=lambda R: (-R.dim, R.basis))
        for R in candidates_R:
            if minkowski_span(S, R) == S and S.dim > n - intersect(R, B).dim:
                logger.debug(f"🔍 Violating pair found: dim S = {S.dim}, dim R = {R.dim}")
                return S, R
    return None


def find_linear_certificate(L: ExtensionField, A: FqSubspace, B: FqSubspace) -> Optional[LinearCertificate]:
    """
    単純拡大による分解を m の約数の走査で探す（A が B にマッチしないときに限り見つかる）

    d > 1 の各約数について F := F_{p^d}, R := B ∩ F, S := A の F-安定核とし、
    S ≠ 0 かつ dim A − dim S < dim R なら採用する。1 ∈ B なら R = ⟨1⟩, S = A の自明な証明書。

    Raises:
        InvalidInput: 零空間または次元不一致
    """
    _pair(L, A, B)
    if contains_vector(B, L.one):
        R = _one_line(L)
        return LinearCertificate(R=R, S=A, Y=zero_subspace(L), Z=complement(R, B), d=1)

    for d in divisors(L.m):
        if d == 1:
            continue
        F = subfield_subspace(L, d)
        R = intersect(B, F)
        if R.is_zero():
            continue
        S = stable_core(A, F)
        if not S.is_zero() and A.dim - S.dim < R.dim:
            logger.debug(f"🧩 Linear certificate found via subfield of degree {d}")
            return LinearCertificate(
                R=R,
                S=S,
                Y=complement(S, A),
                Z=complement(R, B),
                d=generated_subfield(R),
            )
    return None


def verify_linear_certificate(cert: LinearCertificate, L: ExtensionField, A: FqSubspace, B: FqSubspace) -> bool:
    """証明書の不変条件を (A, B) に対して独立に検査する（真ならマッチングしない）"""
    try:
        parts = (A, B, cert.R, cert.S, cert.Y, cert.Z)
        if any(X.ambient != L for X in parts) or A.dim != B.dim:
            return False
        R, S, Y, Z = cert.R, cert.S, cert.Y, cert.Z
        if R.is_zero() or S.is_zero():
            return False
        # 直和で A, B を再構成できること
        if subspace_sum(S, Y) != A or S.dim + Y.dim != A.dim:
            return False
        if subspace_sum(R, Z) != B or R.dim + Z.dim != B.dim:
            return False
        if R == _one_line(L) and not contains_vector(B, L.one):
            return False
        if any(not is_subspace(scale(S, r), S) for r in R.basis):
            return False
        if Y.dim >= R.dim:
            return False
        return cert.d == generated_subfield(R) and S.dim % cert.d == 0
    except InvalidInput:
        return False


def _ordered_bases(U: FqSubspace) -> List[Tuple[FieldElement, ...]]:
    L = U.ambient
    nonzero = [x for x in subspace_vectors(U) if any(x)]
    bases = []
    for candidate in itertools.permutations(nonzero, U.dim):
        if span(L, candidate).dim == U.dim:
            bases.append(candidate)
    return bases


def oracle_applicable(L: ExtensionField, A: FqSubspace) -> bool:
    """定義どおりの判定器が上限内で走るか"""
    return L.p == 2 and A.dim <= ORACLE_MAX_DIM and L.m <= ORACLE_MAX_DEGREE


def definitional_oracle(
    L: ExtensionField, A: FqSubspace, B: FqSubspace
) -> Tuple[bool, Tuple[BasisMatchingWitness, ...]]:
    """
    定義どおりの判定: A のすべての順序付き基底が B のある順序付き基底にマッチするか

    基底 (a_i), (b_i) がマッチするとは、各 i で a_i⁻¹A ∩ B ⊆ ⟨b_j : j ≠ i⟩ となること。
    真のときは A の基底ごとに一つずつ証拠を返す。

    Raises:
        InvalidInput: p ≠ 2、または n, m が上限を超えている
    """
    _pair(L, A, B)
    if not oracle_applicable(L, A):
        raise InvalidInput(
            f"The definitional oracle needs p = 2, n <= {ORACLE_MAX_DIM}, m <= {ORACLE_MAX_DEGREE}; "
            f"got p = {L.p}, n = {A.dim}, m = {L.m}"
        )
    # 1 ∈ a_i⁻¹A ∩ B がすべての i で起きるので、基底の取り方によらずマッチしない
    if contains_vector(B, L.one):
        return False, ()

    b_bases = _ordered_bases(B)
    hyperplanes: List[Tuple[FrozenSet[FieldElement], ...]] = []
    for b_basis in b_bases:
        hyperplanes.append(
            tuple(
                frozenset(subspace_vectors(span(L, b_basis[:i] + b_basis[i + 1 :]))) for i in range(len(b_basis))
            )
        )

    obstructions: Dict[FieldElement, FrozenSet[FieldElement]] = {}
    witnesses = []
    for a_basis in _ordered_bases(A):
        for a in a_basis:
            if a not in obstructions:
                obstructions[a] = frozenset(subspace_vectors(intersect(scale(A, L.inv(a)), B)))
        needed = [obstructions[a] for a in a_basis]
        match = next(
            (
                b_basis
                for b_basis, planes in zip(b_bases, hyperplanes)
                if all(W <= H for W, H in zip(needed, planes))
            ),
            None,
        )
        if match is None:
            logger.debug(f"🔍 Ordered basis {a_basis} has no matching basis in B")
            return False, ()
        witnesses.append(BasisMatchingWitness(a_basis=a_basis, b_basis=match))
    return True, tuple(witnesses)


def product_span_certificate(L: ExtensionField, A: FqSubspace, B: FqSubspace) -> Optional[LinearCertificate]:
    """⟨AB⟩ = A なら S = A, R = B の証明書（マッチしないことの十分条件）"""
    _pair(L, A, B)
    if minkowski_span(A, B) != A:
        return None
    zero = zero_subspace(L)
    return LinearCertificate(R=B, S=A, Y=zero, Z=zero, d=generated_subfield(B))


def decide_linear(L: ExtensionField, A: FqSubspace, B: FqSubspace, with_oracle: bool = False) -> LinearVerdict:
    """
    証明書を探してマッチングを判定する

    with_oracle が真で上限内なら、定義どおりの判定器も走らせて基底ごとの証拠を添える。

    Raises:
        InternalInconsistency: 定義どおりの判定器と結論が食い違った
    """
    certificate = find_linear_certificate(L, A, B)
    if not with_oracle or not oracle_applicable(L, A):
        if certificate is not None:
            return LinearVerdict(matchable=False, decider=DECIDER_LINEAR_CERTIFICATE, certificate=certificate)
        return LinearVerdict(matchable=True, decider=DECIDER_LINEAR_CERTIFICATE)

    matched, witnesses = definitional_oracle(L, A, B)
    if matched == (certificate is not None):
        raise InternalInconsistency("definitional_oracle and find_linear_certificate disagree")
    if certificate is not None:
        return LinearVerdict(matchable=False, decider=DECIDER_LINEAR_CERTIFICATE, certificate=certificate)
    return LinearVerdict(matchable=True, decider=DECIDER_ORACLE, witnesses=witnesses)


def is_chowla_subspace(L: ExtensionField, B: FqSubspace) -> bool:
    """0 でないすべての x ∈ B について [K(x) : K] ≥ dim B + 1"""
    if B.ambient != L or B.is_zero():
        raise InvalidInput("B must be a nonzero subspace of the given field")
    # subspace_vectors と同じ上限を列挙前にかける
    enumerate_subspaces(B, dims=[0])
    return all(minimal_degree(L, x) >= B.dim + 1 for x in subspace_vectors(B) if any(x))


def n0_linear(L: ExtensionField) -> Optional[int]:
    """
    K ⊊ F ⊆ L となる中間体の最小次数 n_0(K, L)（m の最小素因数）

    Raises:
        InvalidInput: m = 1
    """
    if L.m < 2:
        raise InvalidInput("n0 is undefined for the trivial extension m = 1")
    return divisors(L.m)[1]


def generalized_symmetric_sufficient_linear(L: ExtensionField, A: FqSubspace, B: FqSubspace) -> bool:
    """
    一般化対称条件: 0 でないすべての R ⊆ B について dim(K(R) ∩ A) ≥ dim R

    m の約数 d ごとに dim(F_{p^d} ∩ A) ≥ dim(B ∩ F_{p^d}) を調べれば十分。真ならマッチする。

    Raises:
        PreconditionViolated: 1 ∈ A
    """
    _pair(L, A, B)
    if contains_vector(A, L.one):
        raise PreconditionViolated("The generalized symmetric criterion requires 1 to be outside A")
    for d in divisors(L.m):
        F = subfield_subspace(L, d)
        in_B = intersect(B, F).dim
        if in_B and intersect(F, A).dim < in_B:
            return False
    return True


def _check_boundary_range(L: ExtensionField, n: int) -> int:
    n0 = n0_linear(L)
    if is_prime(L.m):
        raise InvalidInput(f"m = {L.m} is prime; the extension has no proper intermediate field")
    if not n0 <= n < L.m:
        raise InvalidInput(f"n must satisfy n0 = {n0} <= n < m = {L.m}, got {n}")
    return n0


def _suitable_degrees(L: ExtensionField, n: int) -> List[int]:
    return [d for d in divisors(L.m) if 1 < d <= n and (n + 1) % d != 0]


def exists_unmatchable_linear(L: ExtensionField, n: int) -> bool:
    """
    dim A = dim B = n, 1 ∉ B でマッチしない組が存在するか

    存在するのは d ≤ n かつ d ∤ (n+1) となる m の約数 d > 1 があるときに限る。

    Raises:
        InvalidInput: m が素数、または n0 ≤ n < m でない
    """
    _check_boundary_range(L, n)
    return bool(_suitable_degrees(L, n))


def congruence_guarantee_linear(L: ExtensionField, n: int) -> bool:
    """n ≢ n0 − 1 (mod n0) かつ n0 ≤ n < m なら存在が保証される"""
    if L.m < 2:
        return False
    n0 = n0_linear(L)
    if not n0 <= n < L.m:
        return False
    return n % n0 != n0 - 1


def construct_unmatchable_linear(L: ExtensionField, n: int) -> Tuple[FqSubspace, FqSubspace, LinearCertificate]:
    """
    マッチしない組 (A, B) を証明書付きで構成する

    最小の適切な d について F = F_{p^d}、R は F における ⟨1⟩ の正規補空間、
    S = a_1F ⊕ ... ⊕ a_qF（{1, a_1, ..., a_i} が F 上独立になるよう正規順で貪欲に選ぶ）。
    Y は 1 ∉ S ⊕ Y を保って正規順で貪欲に、Z は F の補空間の先頭 n − d + 1 行。

    Raises:
        InvalidInput: m が素数、または n が範囲外
        NoSuitableField: d ≤ n かつ d ∤ (n+1) となる d がない
    """
    _check_boundary_range(L, n)
    degrees = _suitable_degrees(L, n)
    if not degrees:
        raise NoSuitableField(f"no intermediate field of degree d with 1 < d ≤ {n} and d ∤ {n + 1}")
    d = degrees[0]
    q, r = divmod(n, d)

    F = subfield_subspace(L, d)
    one_line = _one_line(L)
    R = complement(one_line, F)

    elements = [x for x in field_elements(L) if any(x)]
    spanned = F
    S = zero_subspace(L)
    for x in elements:
        if S.dim == q * d:
            break
        translate = scale(F, x)
        extended = subspace_sum(spanned, translate)
        if extended.dim == spanned.dim + d:
            spanned = extended
            S = subspace_sum(S, translate)

    A = S
    for y in elements:
        if A.dim == q * d + r:
            break
        extended = subspace_sum(A, span(L, [y]))
        if extended.dim > A.dim and not contains_vector(extended, L.one):
            A = extended
    Y = complement(S, A)

    Z = span(L, complement(F, whole_space(L)).basis[: n - d + 1])
    B = subspace_sum(R, Z)

    certificate = LinearCertificate(R=R, S=S, Y=Y, Z=Z, d=generated_subfield(R))
    logger.debug(f"🏗️ Constructed unmatchable pair from subfield of degree {d} (q={q}, r={r})")
    return A, B, certificate
