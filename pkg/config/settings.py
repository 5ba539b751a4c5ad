"""
matchability configuration settings
環境変数から探索上限・ワーカー数などの設定を読み込む
"""

import logging
import os

from dotenv import load_dotenv

# ログ設定（他のモジュールがimportされる前に初期化）
logger = logging.getLogger(__name__)

# .envファイルを読み込み
load_dotenv()

APP_NAME = "matchability"


def _env_int(name: str, default: int) -> int:
    """環境変数を整数として読み込む。未設定・不正値の場合は既定値を返す。"""
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"⚠️ Invalid {name} value '{raw}'; falling back to default ({default}).")
        return default


# 群の設定
MAX_GROUP_ORDER = _env_int("MATCHABILITY_MAX_GROUP_ORDER", 4096)  # 部分群列挙を許す |G| の上限
NAIVE_MAX_SIZE = _env_int("MATCHABILITY_NAIVE_MAX_SIZE", 7)  # 素朴判定（部分集合全列挙）の |A| 上限

# 体拡大の設定
# q^{dim V} の上限（q=2 なら dim ≤ 6、q=3 なら dim ≤ 4）
SUBSPACE_MAX_VECTORS = _env_int("MATCHABILITY_SUBSPACE_MAX_VECTORS", 81)
ORACLE_MAX_DIM = _env_int("MATCHABILITY_ORACLE_MAX_DIM", 3)  # 定義どおりの判定器: n の上限
ORACLE_MAX_DEGREE = _env_int("MATCHABILITY_ORACLE_MAX_DEGREE", 6)  # 定義どおりの判定器: m の上限

# センサス設定
CENSUS_WORKERS = _env_int("MATCHABILITY_CENSUS_WORKERS", 1)
CENSUS_CHUNKSIZE = _env_int("MATCHABILITY_CENSUS_CHUNKSIZE", 64)

LOG_LEVEL = os.getenv("MATCHABILITY_LOG_LEVEL", "INFO").upper()

# 既定の既約多項式（係数は昇順、最高次係数は1）
DEFAULT_MODULI = {
    (2, 1): (0, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 0, 0, 0, 1),
    (3, 1): (0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 1, 0, 0, 1),
}


# 設定の検証
def validate_config() -> bool:
    """探索上限がすべて正の値になっているかチェック"""
    bounds = {
        "MATCHABILITY_MAX_GROUP_ORDER": MAX_GROUP_ORDER,
        "MATCHABILITY_NAIVE_MAX_SIZE": NAIVE_MAX_SIZE,
        "MATCHABILITY_SUBSPACE_MAX_VECTORS": SUBSPACE_MAX_VECTORS,
        "MATCHABILITY_ORACLE_MAX_DIM": ORACLE_MAX_DIM,
        "MATCHABILITY_ORACLE_MAX_DEGREE": ORACLE_MAX_DEGREE,
        "MATCHABILITY_CENSUS_WORKERS": CENSUS_WORKERS,
        "MATCHABILITY_CENSUS_CHUNKSIZE": CENSUS_CHUNKSIZE,
    }

    invalid = [name for name, value in bounds.items() if value <= 0]
    if invalid:
        raise ValueError(f"Non-positive settings: {', '.join(invalid)}")

    if LOG_LEVEL not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
        raise ValueError(f"Unknown MATCHABILITY_LOG_LEVEL: {LOG_LEVEL}")

    logger.debug(f"✅ {APP_NAME} configuration loaded successfully")
    return True


if __name__ == "__main__":
    # 設定テスト実行
    validate_config()
    print(f"✅ {APP_NAME} configuration OK")
