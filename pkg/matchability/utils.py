"""
matchability utility functions
共通ユーティリティ関数を提供
"""

import logging
from typing import Dict, List

import galois

from .errors import InvalidInput

# ロガー設定
logger = logging.getLogger(__name__)


def log_disagreements(setting: str, ambient: str, disagreements: List[str], max_to_display: int = 3) -> None:
    """
    相互検査で見つかった判定器どうしの食い違いをログに出す

    Args:
        setting: "group" または "field"
        ambient: 群・体の略記（"Z12", "F_2^4" など）
        disagreements: 食い違いの説明
        max_to_display: 個別に表示する最大数
    """
    if not disagreements:
        return
    logger.warning(f"⚠️  {setting} {ambient}: {len(disagreements)} decider disagreement(s)")
    for message in disagreements[:max_to_display]:
        logger.warning(f"      - {message}")
    hidden = len(disagreements) - max_to_display
    if hidden > 0:
        logger.warning(f"      ... and {hidden} more")


def divisors(n: int) -> List[int]:
    """n の正の約数を昇順で返す"""
    if n < 1:
        raise InvalidInput(f"divisors requires a positive integer, got {n}")
    return [int(d) for d in galois.divisors(n)]


def prime_power_parts(n: int) -> Dict[int, int]:
    """n ≥ 1 の素因数分解を {p: p^e} で返す（n = 1 なら空）"""
    if n < 1:
        raise InvalidInput(f"prime_power_parts requires a positive integer, got {n}")
    if n == 1:
        return {}
    primes, exponents = galois.factors(n)
    return {int(p): int(p) ** int(e) for p, e in zip(primes, exponents)}


def smallest_prime_factor(n: int) -> int:
    """n ≥ 2 の最小素因数"""
    if n < 2:
        raise InvalidInput(f"smallest_prime_factor requires n >= 2, got {n}")
    primes, _ = galois.factors(n)
    return int(min(primes))


def is_prime(n: int) -> bool:
    """素数判定"""
    return n >= 2 and bool(galois.is_prime(n))
