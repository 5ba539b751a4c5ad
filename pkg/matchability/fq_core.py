"""
matchability finite field core
F_q ⊊ F_{q^m}（q = p は素数）の演算、部分体、部分空間束のプリミティブ

体の元は基底 1, t, ..., t^{m-1} に関する係数ベクトル（昇順）で表す。
部分空間は F_p 上の既約行階段形（RREF）の基底で表し、構造的な等価性が意味的な等価性になる。
元の正規順は整数符号 Σ c_i p^i の昇順。
"""

import functools
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import galois
import numpy as np

from config.settings import DEFAULT_MODULI, SUBSPACE_MAX_VECTORS

from .errors import InvalidInput
from .utils import divisors, is_prime

# ログ設定
logger = logging.getLogger(__name__)

FieldElement = Tuple[int, ...]

FIELD_OPS = ("add", "mul", "inv", "pow")


@dataclass(frozen=True)
class ExtensionField:
    """既約多項式 modulus による F_{p^m} = F_p[t] / (modulus)"""

    p: int
    m: int
    modulus: Tuple[int, ...]
    _gf: Any = field(init=False, repr=False, compare=False)
    _prime: Any = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        prime_field = galois.GF(self.p)
        if self.m == 1:
            extension = prime_field
        else:
            poly = galois.Poly(list(reversed(self.modulus)), field=prime_field)
            extension = galois.GF(self.p**self.m, irreducible_poly=poly)
        object.__setattr__(self, "_prime", prime_field)
        object.__setattr__(self, "_gf", extension)

    def __reduce__(self) -> Tuple[Any, Tuple[int, int, Tuple[int, ...]]]:
        # galois のクラスは pickle できないので、ワーカー側で作り直す
        return make_extension_field, (self.p, self.m, self.modulus)

    @property
    def order(self) -> int:
        return self.p**self.m

    @property
    def zero(self) -> FieldElement:
        return (0,) * self.m

    @property
    def one(self) -> FieldElement:
        return (1,) + (0,) * (self.m - 1)

    def gen(self) -> FieldElement:
        """t の剰余類"""
        if self.m == 1:
            return ((-self.modulus[0]) % self.p,)
        return (0, 1) + (0,) * (self.m - 2)

    def element(self, coeffs: Sequence[int]) -> FieldElement:
        """係数ベクトルを検証して元を返す"""
        x = tuple(int(c) for c in coeffs)
        if len(x) != self.m or any(not 0 <= c < self.p for c in x):
            raise InvalidInput(f"{list(x)} is not a coefficient vector of length {self.m} over F_{self.p}")
        return x

    def encode(self, x: FieldElement) -> int:
        return sum(c * self.p**i for i, c in enumerate(x))

    def decode(self, n: int) -> FieldElement:
        digits = []
        for _ in range(self.m):
            n, c = divmod(n, self.p)
            digits.append(c)
        return tuple(digits)

    def _lift(self, x: FieldElement) -> Any:
        return self._gf(self.encode(x))

    def _lower(self, y: Any) -> FieldElement:
        return self.decode(int(y))

    def add(self, x: FieldElement, y: FieldElement) -> FieldElement:
        return tuple((a + b) % self.p for a, b in zip(x, y))

    def sub(self, x: FieldElement, y: FieldElement) -> FieldElement:
        return tuple((a - b) % self.p for a, b in zip(x, y))

    def mul(self, x: FieldElement, y: FieldElement) -> FieldElement:
        return self._lower(self._lift(x) * self._lift(y))

    def inv(self, x: FieldElement) -> FieldElement:
        if not any(x):
            raise InvalidInput("Cannot invert zero")
        return self._lower(self._lift(x) ** -1)

    def power(self, x: FieldElement, k: int) -> FieldElement:
        if k < 0:
            return self.power(self.inv(x), -k)
        return self._lower(self._lift(x) ** k)


@dataclass(frozen=True)
class FqSubspace:
    """F_p 部分空間（basis は RREF の行）"""

    ambient: ExtensionField
    basis: Tuple[FieldElement, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def is_zero(self) -> bool:
        return not self.basis


@functools.lru_cache(maxsize=None)
def _make_extension_field(p: int, m: int, modulus: Tuple[int, ...]) -> ExtensionField:
    if not is_prime(p):
        raise InvalidInput(f"p = {p} is not prime")
    if m < 1:
        raise InvalidInput(f"Degree m must be >= 1, got {m}")
    if len(modulus) != m + 1 or modulus[-1] != 1 or any(not 0 <= c < p for c in modulus):
        raise InvalidInput(f"Modulus must be a monic coefficient vector of length {m + 1} over F_{p}")
    poly = galois.Poly(list(reversed(modulus)), field=galois.GF(p))
    if m > 1 and not poly.is_irreducible():
        raise InvalidInput(f"Modulus {poly} is reducible over F_{p}")
    logger.debug(f"🧮 Built F_{p}^{m} with modulus {poly}")
    return ExtensionField(p, m, modulus)


def make_extension_field(p: int, m: int, modulus: Optional[Sequence[int]] = None) -> ExtensionField:
    """
    F_{p^m} の記述を検証して作る

    Args:
        p: 素数
        m: 拡大次数
        modulus: 既約多項式の係数（昇順、長さ m+1）。省略時は組み込みの既定値

    Raises:
        InvalidInput: p が素数でない、modulus が可約など
    """
    if modulus is None:
        if (p, m) not in DEFAULT_MODULI:
            raise InvalidInput(f"No built-in modulus for (p, m) = ({p}, {m}); pass one explicitly")
        modulus = DEFAULT_MODULI[(p, m)]
    return _make_extension_field(int(p), int(m), tuple(int(c) for c in modulus))


def field_arith(L: ExtensionField, op: str, x: FieldElement, y: Any = None) -> FieldElement:
    """
    体演算のディスパッチ（add, mul, inv, pow）

    pow のとき y は整数の指数。

    Raises:
        InvalidInput: 未知の演算、または零の逆元
    """
    if op == "add":
        return L.add(x, y)
    if op == "mul":
        return L.mul(x, y)
    if op == "inv":
        return L.inv(x)
    if op == "pow":
        return L.power(x, int(y))
    raise InvalidInput(f"Unknown field operation {op!r}; expected one of {FIELD_OPS}")


def minimal_degree(L: ExtensionField, x: FieldElement) -> int:
    """[K(x) : K]、すなわち x^{p^d} = x となる m の最小の約数 d"""
    if not any(x):
        raise InvalidInput("minimal_degree is undefined for zero")
    for d in divisors(L.m):
        if L.power(x, L.p**d) == x:
            return d
    return L.m


# ===== 線形代数（F_p 上） =====


def _matrix(L: ExtensionField, rows: Sequence[FieldElement]) -> Any:
    return L._prime(np.array(rows, dtype=np.int64).reshape(len(rows), L.m))


def _rref(L: ExtensionField, rows: Sequence[FieldElement]) -> Tuple[FieldElement, ...]:
    if not rows:
        return ()
    reduced = _matrix(L, rows).row_reduce()
    return tuple(tuple(int(v) for v in row) for row in reduced if np.any(row != 0))


def _rank(L: ExtensionField, rows: Sequence[FieldElement]) -> int:
    return len(_rref(L, rows))


def zero_subspace(L: ExtensionField) -> FqSubspace:
    return FqSubspace(L, ())


def whole_space(L: ExtensionField) -> FqSubspace:
    return FqSubspace(L, tuple(tuple(int(i == j) for j in range(L.m)) for i in range(L.m)))


def span(L: ExtensionField, vectors: Iterable[Sequence[int]]) -> FqSubspace:
    """ベクトルの張る部分空間 ⟨vectors⟩（正規形）"""
    return FqSubspace(L, _rref(L, [L.element(v) for v in vectors]))


def _same_field(U: FqSubspace, V: FqSubspace) -> ExtensionField:
    if U.ambient != V.ambient:
        raise InvalidInput("Subspaces live in different fields")
    return U.ambient


def subspace_sum(U: FqSubspace, V: FqSubspace) -> FqSubspace:
    """U + V"""
    L = _same_field(U, V)
    return FqSubspace(L, _rref(L, U.basis + V.basis))


def intersect(U: FqSubspace, V: FqSubspace) -> FqSubspace:
    """U ∩ V（積み重ねた基底の左零空間から求める）"""
    L = _same_field(U, V)
    if U.is_zero() or V.is_zero():
        return zero_subspace(L)
    stacked = _matrix(L, U.basis + V.basis)
    kernel = stacked.T.null_space()
    if kernel.shape[0] == 0:
        return zero_subspace(L)
    vectors = kernel[:, : U.dim] @ _matrix(L, U.basis)
    return FqSubspace(L, _rref(L, [tuple(int(v) for v in row) for row in vectors]))


def contains_vector(U: FqSubspace, x: FieldElement) -> bool:
    return _rank(U.ambient, U.basis + (x,)) == U.dim


def is_subspace(U: FqSubspace, V: FqSubspace) -> bool:
    """U ⊆ V"""
    return subspace_sum(U, V).basis == V.basis


def complement(U: FqSubspace, W: FqSubspace) -> FqSubspace:
    """
    U ⊕ Y = W となる Y

    W の正規基底の行をピボット順に試し、ランクが増えるものだけを貪欲に加える。

    Raises:
        InvalidInput: U ⊄ W
    """
    L = _same_field(U, W)
    if not is_subspace(U, W):
        raise InvalidInput("complement requires U ⊆ W")
    current = list(U.basis)
    chosen = []
    for w in W.basis:
        if _rank(L, current + [w]) > len(current):
            current.append(w)
            chosen.append(w)
    return FqSubspace(L, _rref(L, chosen))


def scale(U: FqSubspace, x: FieldElement) -> FqSubspace:
    """x·U"""
    L = U.ambient
    return FqSubspace(L, _rref(L, [L.mul(u, x) for u in U.basis]))


def minkowski_span(S: FqSubspace, R: FqSubspace) -> FqSubspace:
    """⟨SR⟩（双線形性より基底同士の積で張れば十分）"""
    L = _same_field(S, R)
    if S.is_zero() or R.is_zero():
        raise InvalidInput("minkowski_span requires nonzero subspaces")
    return FqSubspace(L, _rref(L, [L.mul(s, r) for s in S.basis for r in R.basis]))


def multiplier_space(S: FqSubspace) -> FqSubspace:
    """{x ∈ L : xS ⊆ S} = ∩_{s} s⁻¹S（S の基底 s について）"""
    L = S.ambient
    if S.is_zero():
        raise InvalidInput("multiplier_space requires a nonzero subspace")
    result = whole_space(L)
    for s in S.basis:
        result = intersect(result, scale(S, L.inv(s)))
    return result


def subfield_subspace(L: ExtensionField, d: int) -> FqSubspace:
    """
    部分体 F_{p^d}（x ↦ x^{p^d} の固定空間）

    Raises:
        InvalidInput: d ∤ m
    """
    if d < 1 or L.m % d != 0:
        raise InvalidInput(f"d = {d} does not divide m = {L.m}")
    images = []
    for i in range(L.m):
        e = tuple(int(i == j) for j in range(L.m))
        images.append(L.sub(L.power(e, L.p**d), e))
    kernel = _matrix(L, images).T.null_space()
    return FqSubspace(L, _rref(L, [tuple(int(v) for v in row) for row in kernel]))


def generated_subfield(R: FqSubspace) -> int:
    """K(R) = F_{p^d} となる d（基底元の次数の最小公倍数）"""
    if R.is_zero():
        raise InvalidInput("generated_subfield requires a nonzero subspace")
    return math.lcm(*(minimal_degree(R.ambient, x) for x in R.basis))


def is_subfield(F: FqSubspace) -> bool:
    """F が 1 を含み積で閉じているか"""
    return not F.is_zero() and contains_vector(F, F.ambient.one) and minkowski_span(F, F) == F


def stable_core(A: FqSubspace, F: FqSubspace) -> FqSubspace:
    """
    A に含まれる最大の F-部分加群 ∩_{f} f⁻¹A（F の基底 f について）

    Raises:
        InvalidInput: F が部分体でない
    """
    L = _same_field(A, F)
    if not is_subfield(F):
        raise InvalidInput("stable_core requires a subfield subspace")
    core = A
    for f in F.basis:
        if core.is_zero():
            break
        core = intersect(core, scale(A, L.inv(f)))
    return core


def trace_zero_subspace(L: ExtensionField) -> FqSubspace:
    """トレース Tr(x) = Σ_{i<m} x^{p^i} の核（次元 m−1）"""
    traces = []
    for i in range(L.m):
        e = tuple(int(i == j) for j in range(L.m))
        total = L.zero
        for j in range(L.m):
            total = L.add(total, L.power(e, L.p**j))
        traces.append((total[0],))
    column = L._prime(np.array(traces, dtype=np.int64))
    kernel = column.T.null_space()
    return FqSubspace(L, _rref(L, [tuple(int(v) for v in row) for row in kernel]))


def has_linear_matching_property(L: ExtensionField) -> bool:
    """中間体 K ⊊ F ⊊ L が存在しない、すなわち m が素数のとき"""
    if L.m < 2:
        raise InvalidInput("The extension must be proper (m >= 2)")
    return is_prime(L.m)


# ===== 列挙 =====


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """q-二項係数 [n choose k]_q"""
    if k < 0 or k > n:
        return 0
    numerator = 1
    denominator = 1
    for i in range(k):
        numerator *= q ** (n - i) - 1
        denominator *= q ** (i + 1) - 1
    return numerator // denominator


def _combine(L: ExtensionField, coeffs: Sequence[int], vectors: Sequence[FieldElement]) -> FieldElement:
    total = [0] * L.m
    for c, v in zip(coeffs, vectors):
        if c:
            for j, a in enumerate(v):
                total[j] = (total[j] + c * a) % L.p
    return tuple(total)


def subspace_vectors(U: FqSubspace) -> List[FieldElement]:
    """U のすべての元（正規順）"""
    L = U.ambient
    vectors = {_combine(L, coeffs, U.basis) for coeffs in itertools.product(range(L.p), repeat=U.dim)}
    return sorted(vectors, key=L.encode)


def field_elements(L: ExtensionField) -> List[FieldElement]:
    """L のすべての元（正規順）"""
    return [L.decode(n) for n in range(L.order)]


def _rref_coefficient_matrices(p: int, n: int, k: int) -> Iterable[List[List[int]]]:
    for pivots in itertools.combinations(range(n), k):
        free = [(i, j) for i, pivot in enumerate(pivots) for j in range(pivot + 1, n) if j not in pivots]
        for values in itertools.product(range(p), repeat=len(free)):
            rows = [[int(j == pivot) for j in range(n)] for pivot in pivots]
            for (i, j), value in zip(free, values):
                rows[i][j] = value
            yield rows


def enumerate_subspaces(
    V: FqSubspace, dims: Optional[Iterable[int]] = None, max_vectors: Optional[int] = None
) -> List[FqSubspace]:
    """
    V のすべての部分空間（正規形）を（次元, 基底）順で返す

    Args:
        V: 対象の部分空間
        dims: 次元の絞り込み（None なら全次元）
        max_vectors: q^{dim V} の上限（None なら設定値）

    Raises:
        InvalidInput: q^{dim V} が上限を超えている
    """
    L = V.ambient
    bound = SUBSPACE_MAX_VECTORS if max_vectors is None else max_vectors
    if L.p**V.dim > bound:
        raise InvalidInput(f"{L.p}^{V.dim} vectors exceeds the subspace enumeration bound {bound}")
    wanted = range(V.dim + 1) if dims is None else sorted(set(dims))

    found = set()
    for k in wanted:
        if not 0 <= k <= V.dim:
            continue
        for coefficients in _rref_coefficient_matrices(L.p, V.dim, k):
            vectors = [_combine(L, row, V.basis) for row in coefficients]
            found.add(_rref(L, vectors))
    return [FqSubspace(L, basis) for basis in sorted(found, key=lambda b: (len(b), b))]
