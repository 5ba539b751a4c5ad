"""
matchability harness
問題記述（ProblemSpec）と判定結果（Verdict）の JSON 形式、判定・構成の実行、相互検査

JSON での表現:
  - 群の元は剰余の配列、体の元は係数の配列（昇順）
  - 集合・部分空間は元の配列（読み込み時に正規形にそろえる）
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from config.settings import NAIVE_MAX_SIZE

from .errors import InternalInconsistency, InvalidInput, MatchabilityError
from .fq_core import ExtensionField, FqSubspace, contains_vector, make_extension_field, span
from .fq_matching import (
    BasisMatchingWitness,
    LinearCertificate,
    LinearVerdict,
    construct_unmatchable_linear,
    criterion_verdict,
    decide_linear,
    definitional_oracle,
    generalized_symmetric_sufficient_linear,
    is_chowla_subspace,
    oracle_applicable,
    product_span_certificate,
    verify_linear_certificate,
)
from .group_core import FiniteAbelianGroup, GroupSubset, canonical_subset, subgroup_generated
from .group_matching import (
    GroupVerdict,
    MatchingWitness,
    NearlyPeriodicCertificate,
    construct_unmatchable_group,
    decide,
    find_certificate,
    find_matching,
    generalized_symmetric_sufficient,
    is_chowla_set,
    naive_unmatchability_witness,
    verify_certificate,
)
from .utils import log_disagreements

# ログ設定
logger = logging.getLogger(__name__)

SETTINGS = ("group", "field")

DECIDER_CONSTRUCT_GROUP = "construct_unmatchable_group"
DECIDER_CONSTRUCT_LINEAR = "construct_unmatchable_linear"

Ambient = Union[FiniteAbelianGroup, ExtensionField]
Operand = Union[GroupSubset, FqSubspace]


@dataclass(frozen=True)
class ProblemSpec:
    """判定する組 (A, B) とその環境"""

    setting: str
    ambient: Ambient
    A: Operand
    B: Operand
    options: Dict[str, Any] = field(default_factory=dict, compare=False)


# ===== 群・体・元の読み込み =====


def parse_group(value: Any) -> FiniteAbelianGroup:
    """
    "Z2xZ6" のような略記、または巡回因子の配列

    どちらも不変因子の形に正規化され、元の座標は正規化後の群に対して与える。
    """
    if isinstance(value, str):
        return FiniteAbelianGroup.parse(value)
    if isinstance(value, (list, tuple)):
        return FiniteAbelianGroup.from_factors([int(n) for n in value])
    raise InvalidInput(f"Cannot parse group description: {value!r}")


def parse_group_subset(G: FiniteAbelianGroup, items: Sequence[Any]) -> GroupSubset:
    """元の配列を正規形にする（巡回群では整数の元も受け付ける）"""
    elements = []
    for item in items:
        if isinstance(item, int):
            if G.rank != 1:
                raise InvalidInput(f"Integer element {item} is only allowed in a cyclic group")
            elements.append((item,))
        else:
            elements.append(tuple(item))
    return canonical_subset(G, elements)


def parse_field(value: Dict[str, Any]) -> ExtensionField:
    """{"p": 2, "m": 4, "modulus": [1, 1, 0, 0, 1]}（modulus は省略可）"""
    try:
        return make_extension_field(int(value["p"]), int(value["m"]), value.get("modulus"))
    except (KeyError, TypeError) as e:
        raise InvalidInput(f"Field description needs integer 'p' and 'm': {e}") from None


def parse_subspace(L: ExtensionField, rows: Sequence[Sequence[int]]) -> FqSubspace:
    return span(L, rows)


def group_to_json(G: FiniteAbelianGroup) -> List[int]:
    return list(G.invariant_factors)


def field_to_json(L: ExtensionField) -> Dict[str, Any]:
    return {"p": L.p, "m": L.m, "modulus": list(L.modulus)}


def subset_to_json(X: Sequence[Sequence[int]]) -> List[List[int]]:
    return [list(x) for x in X]


def subspace_to_json(U: FqSubspace) -> List[List[int]]:
    return [list(row) for row in U.basis]


def parse_family(data: Dict[str, Any]) -> Tuple[str, Ambient]:
    """{"setting": "group", "group": ...} または {"setting": "field", "field": {...}}"""
    setting = data.get("setting")
    if setting == "group":
        return setting, parse_group(data.get("group"))
    if setting == "field":
        return setting, parse_field(data.get("field") or {})
    raise InvalidInput(f"setting must be one of {SETTINGS}, got {setting!r}")


def family_to_json(setting: str, ambient: Ambient) -> Dict[str, Any]:
    if setting == "group":
        return {"setting": setting, "group": group_to_json(ambient)}
    return {"setting": setting, "field": field_to_json(ambient)}


def parse_problem(data: Dict[str, Any]) -> ProblemSpec:
    """
    JSON から ProblemSpec を作る

    Raises:
        InvalidInput: 形式が不正、または |A| ≠ |B|（dim A ≠ dim B）
    """
    if not isinstance(data, dict):
        raise InvalidInput("Problem description must be a JSON object")
    setting, ambient = parse_family(data)
    if "A" not in data or "B" not in data:
        raise InvalidInput("Problem description needs both 'A' and 'B'")
    if setting == "group":
        A: Operand = parse_group_subset(ambient, data["A"])
        B: Operand = parse_group_subset(ambient, data["B"])
        sizes = (len(A), len(B))
    else:
        A = parse_subspace(ambient, data["A"])
        B = parse_subspace(ambient, data["B"])
        sizes = (A.dim, B.dim)
    if sizes[0] != sizes[1] or sizes[0] == 0:
        raise InvalidInput(f"A and B must be nonempty of equal size, got {sizes[0]} and {sizes[1]}")
    return ProblemSpec(setting, ambient, A, B, dict(data.get("options") or {}))


def serialize_problem(spec: ProblemSpec) -> Dict[str, Any]:
    data = family_to_json(spec.setting, spec.ambient)
    if spec.setting == "group":
        data["A"] = subset_to_json(spec.A)
        data["B"] = subset_to_json(spec.B)
    else:
        data["A"] = subspace_to_json(spec.A)
        data["B"] = subspace_to_json(spec.B)
    if spec.options:
        data["options"] = dict(spec.options)
    return data


# ===== Verdict の JSON 形式 =====


def group_verdict_to_json(
    G: FiniteAbelianGroup, A: GroupSubset, B: GroupSubset, verdict: GroupVerdict
) -> Dict[str, Any]:
    data = family_to_json("group", G)
    data.update({"A": subset_to_json(A), "B": subset_to_json(B)})
    data["matchable"] = verdict.matchable
    data["decider"] = verdict.decider
    if verdict.witness is not None:
        data["witness"] = [[list(a), list(b)] for a, b in verdict.witness.assignment]
    else:
        cert = verdict.certificate
        data["certificate"] = {
            "R": subset_to_json(cert.R),
            "S": subset_to_json(cert.S),
            "Y": subset_to_json(cert.Y),
            "Z": subset_to_json(cert.Z),
            "H": subset_to_json(cert.H.carrier),
        }
    return data


def field_verdict_to_json(L: ExtensionField, A: FqSubspace, B: FqSubspace, verdict: LinearVerdict) -> Dict[str, Any]:
    data = family_to_json("field", L)
    data.update({"A": subspace_to_json(A), "B": subspace_to_json(B)})
    data["matchable"] = verdict.matchable
    data["decider"] = verdict.decider
    if verdict.certificate is not None:
        cert = verdict.certificate
        data["certificate"] = {
            "R": subspace_to_json(cert.R),
            "S": subspace_to_json(cert.S),
            "Y": subspace_to_json(cert.Y),
            "Z": subspace_to_json(cert.Z),
            "d": cert.d,
        }
    if verdict.witnesses is not None:
        data["witnesses"] = [
            {"a_basis": subset_to_json(w.a_basis), "b_basis": subset_to_json(w.b_basis)} for w in verdict.witnesses
        ]
    return data


def verdict_from_json(data: Dict[str, Any]) -> Tuple[ProblemSpec, Union[GroupVerdict, LinearVerdict]]:
    """
    Verdict の JSON を読み戻す

    Raises:
        InvalidInput: 形式が不正
    """
    spec = parse_problem(data)
    try:
        if spec.setting == "group":
            G = spec.ambient
            if data["matchable"]:
                assignment = tuple(
                    (G.element(a), G.element(b)) for a, b in data["witness"]  # type: ignore[union-attr]
                )
                return spec, GroupVerdict(True, data["decider"], witness=MatchingWitness(assignment))
            raw = data["certificate"]
            R, S, Y, Z = (parse_group_subset(G, raw[key]) for key in ("R", "S", "Y", "Z"))
            H = subgroup_generated(G, parse_group_subset(G, raw["H"]))
            certificate = NearlyPeriodicCertificate(R=R, S=S, Y=Y, Z=Z, H=H)
            return spec, GroupVerdict(False, data["decider"], certificate=certificate)

        L = spec.ambient
        witnesses = None
        if "witnesses" in data:
            witnesses = tuple(
                BasisMatchingWitness(
                    a_basis=tuple(L.element(x) for x in w["a_basis"]),  # type: ignore[union-attr]
                    b_basis=tuple(L.element(x) for x in w["b_basis"]),  # type: ignore[union-attr]
                )
                for w in data["witnesses"]
            )
        if data["matchable"]:
            return spec, LinearVerdict(True, data["decider"], witnesses=witnesses)
        raw = data["certificate"]
        R, S, Y, Z = (parse_subspace(L, raw[key]) for key in ("R", "S", "Y", "Z"))
        certificate = LinearCertificate(R=R, S=S, Y=Y, Z=Z, d=int(raw["d"]))
        return spec, LinearVerdict(False, data["decider"], certificate=certificate)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, MatchabilityError):
            raise
        raise InvalidInput(f"Malformed verdict: {e}") from None


# ===== 判定の実行 =====


def _cross_check_group(G: FiniteAbelianGroup, A: GroupSubset, B: GroupSubset, verdict: GroupVerdict) -> List[str]:
    errors = []
    identity = G.identity
    certificate = find_certificate(G, A, B)
    if verdict.matchable and certificate is not None:
        errors.append("find_certificate produced a certificate for a matchable pair")
    if not verdict.matchable and not verify_certificate(verdict.certificate, G, A, B):
        errors.append("certificate failed independent verification")
    if identity not in B and len(A) <= NAIVE_MAX_SIZE:
        naive = naive_unmatchability_witness(G, A, B)
        if (naive is None) != verdict.matchable:
            errors.append("naive_unmatchability_witness disagrees with find_matching")
    if identity not in A and generalized_symmetric_sufficient(G, A, B) and not verdict.matchable:
        errors.append("generalized symmetric condition holds for an unmatchable pair")
    if is_chowla_set(G, B) and not verdict.matchable:
        errors.append("Chowla set B in an unmatchable pair")
    return errors


def _cross_check_field(L: ExtensionField, A: FqSubspace, B: FqSubspace, verdict: LinearVerdict) -> List[str]:
    errors = []
    if not verdict.matchable and not verify_linear_certificate(verdict.certificate, L, A, B):
        errors.append("linear certificate failed independent verification")
    if not contains_vector(B, L.one):
        try:
            violating = criterion_verdict(L, A, B)
        except InvalidInput as e:
            logger.debug(f"⚠️ criterion_verdict skipped: {e}")
        else:
            if (violating is None) != verdict.matchable:
                errors.append("criterion_verdict disagrees with find_linear_certificate")
    if oracle_applicable(L, A):
        matched, _ = definitional_oracle(L, A, B)
        if matched != verdict.matchable:
            errors.append("definitional_oracle disagrees with find_linear_certificate")
    if product_span_certificate(L, A, B) is not None and verdict.matchable:
        errors.append("⟨AB⟩ = A for a matchable pair")
    if not contains_vector(A, L.one) and generalized_symmetric_sufficient_linear(L, A, B) and not verdict.matchable:
        errors.append("generalized symmetric condition holds for an unmatchable pair")
    try:
        if is_chowla_subspace(L, B) and not verdict.matchable:
            errors.append("Chowla subspace B in an unmatchable pair")
    except InvalidInput as e:
        logger.debug(f"⚠️ is_chowla_subspace skipped: {e}")
    return errors


def run_check(spec: ProblemSpec, xcheck: bool = False) -> Dict[str, Any]:
    """
    組を判定して Verdict の JSON を返す

    Args:
        spec: 問題記述
        xcheck: 適用できるすべての判定器を走らせて結論を照合する

    Raises:
        InternalInconsistency: 相互検査で結論が食い違った
    """
    if spec.setting == "group":
        verdict = decide(spec.ambient, spec.A, spec.B)
        result = group_verdict_to_json(spec.ambient, spec.A, spec.B, verdict)
        errors = _cross_check_group(spec.ambient, spec.A, spec.B, verdict) if xcheck else []
    else:
        verdict = decide_linear(spec.ambient, spec.A, spec.B)
        result = field_verdict_to_json(spec.ambient, spec.A, spec.B, verdict)
        errors = _cross_check_field(spec.ambient, spec.A, spec.B, verdict) if xcheck else []

    if errors:
        label = spec.ambient.shorthand if spec.setting == "group" else f"F_{spec.ambient.p}^{spec.ambient.m}"
        log_disagreements(spec.setting, label, errors)
        raise InternalInconsistency("; ".join(errors))
    if xcheck:
        result["cross_checked"] = True
    return result


def run_construct(setting: str, ambient: Ambient, n: int) -> Dict[str, Any]:
    """
    マッチング不能な組を構成し、証明書と独立な再検証の結果を返す

    Raises:
        NoSuitableSubgroup / NoSuitableField: 約数条件を満たす部分群・部分体がない
        InvalidInput: n が範囲外
    """
    if setting == "group":
        A, B, certificate = construct_unmatchable_group(ambient, n)
        verdict = GroupVerdict(False, DECIDER_CONSTRUCT_GROUP, certificate=certificate)
        result = group_verdict_to_json(ambient, A, B, verdict)
        verified = verify_certificate(certificate, ambient, A, B) and find_matching(ambient, A, B) is None
    else:
        A, B, certificate = construct_unmatchable_linear(ambient, n)
        verdict = LinearVerdict(False, DECIDER_CONSTRUCT_LINEAR, certificate=certificate)
        result = field_verdict_to_json(ambient, A, B, verdict)
        try:
            refuted = criterion_verdict(ambient, A, B) is not None
        except InvalidInput:
            refuted = decide_linear(ambient, A, B).matchable is False
        verified = verify_linear_certificate(certificate, ambient, A, B) and refuted

    result["verified"] = verified
    if verified:
        logger.info(f"✅ Constructed pair verified (n = {n})")
    else:
        logger.error(f"❌ Constructed pair failed re-verification (n = {n})")
    return result


def replay_record(family: Dict[str, Any], record: Dict[str, Any]) -> bool:
    """センサスの記録を識別子から再計算し、判定と証拠が再現されるか"""
    problem = dict(family)
    problem.update(record["id"])
    result = run_check(parse_problem(problem))
    payload_key = "witness" if result["matchable"] else "certificate"
    return (
        result["matchable"] == record.get("matchable")
        and result["decider"] == record.get("decider")
        and result.get(payload_key) == record.get("payload")
    )


def load_problem_file(path: str) -> ProblemSpec:
    """JSON ファイルから ProblemSpec を読み込む"""
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise InvalidInput(f"File not found: {path}") from None
    except json.JSONDecodeError as e:
        raise InvalidInput(f"Invalid JSON in {path}: {e}") from None
    return parse_problem(data)


def make_problem(
    setting: str, ambient: Ambient, A: Sequence[Any], B: Sequence[Any], options: Optional[Dict[str, Any]] = None
) -> ProblemSpec:
    """CLI 引数から ProblemSpec を組み立てる"""
    data = family_to_json(setting, ambient)
    data.update({"A": list(A), "B": list(B)})
    if options:
        data["options"] = options
    return parse_problem(data)
