"""
matchability exceptions
判定器・構成子・ハーネスで共通に使う例外
"""


class MatchabilityError(Exception):
    """このパッケージが送出する例外の基底クラス"""


class InvalidInput(MatchabilityError, ValueError):
    """入力値が不正、または探索上限を超えている"""


class PreconditionViolated(MatchabilityError):
    """定理の仮定（例: 単位元 ∉ B）が満たされていない"""


class NoSuitableSubgroup(MatchabilityError):
    """|H| ≤ n かつ |H| ∤ (n+1) を満たす部分群が存在しない"""


class NoSuitableField(MatchabilityError):
    """d ≤ n かつ d ∤ (n+1) を満たす中間体が存在しない"""


class InternalInconsistency(MatchabilityError):
    """複数の判定器の結論が食い違った"""
