"""
matchability self check
既知の例（Z/12, Z/8, Z/4, F_16）で判定器と構成子が正しく動くかをチェックする
"""

import io
import logging
import time
from typing import Any, Dict, Tuple

from config.settings import APP_NAME

from .census import CensusRunner
from .fq_core import make_extension_field, span
from .fq_matching import construct_unmatchable_linear, criterion_verdict, verify_linear_certificate
from .group_core import FiniteAbelianGroup, subgroup_generated
from .group_matching import find_certificate, find_matching, quotient_project

# ログ設定
logger = logging.getLogger(__name__)

COMPONENTS = {
    "group_unmatchable_pair": "Z/12 unmatchable pair",
    "group_certificate": "Z/8 certificate",
    "group_quotient": "Z/8 → Z/4 projection",
    "group_boundary": "Z/4, n=3 census",
    "field_construction": "F_16, n=2 construction",
    "field_boundary": "F_16, n=3 census",
}


def _cyclic(*residues: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple((r,) for r in residues)


class SelfChecker:
    """判定器の自己診断チェッカー"""

    def __init__(self) -> None:
        """セルフチェッカーを初期化"""
        self.app_name = APP_NAME
        logger.info(f"✅ {self.app_name} Self checker initialized")

    def check_all_components(self) -> Dict[str, bool]:
        """
        全コンポーネントをチェック

        Returns:
            各コンポーネントの結果と全体の結果（"overall"）
        """
        results = {
            "group_unmatchable_pair": self._check_group_unmatchable_pair(),
            "group_certificate": self._check_group_certificate(),
            "group_quotient": self._check_group_quotient(),
            "group_boundary": self._check_group_boundary(),
            "field_construction": self._check_field_construction(),
            "field_boundary": self._check_field_boundary(),
            "overall": True,
        }

        # 全体の結果を判定
        results["overall"] = all(v for k, v in results.items() if k != "overall")

        return results

    def _check_group_unmatchable_pair(self) -> bool:
        """Z/12 の A={0,1,3,6,9}, B={1,2,3,6,9} がマッチング不能か"""
        try:
            G = FiniteAbelianGroup((12,))
            A = _cyclic(0, 1, 3, 6, 9)
            B = _cyclic(1, 2, 3, 6, 9)
            if find_matching(G, A, B) is not None:
                logger.error("❌ Z/12 pair unexpectedly matchable")
                return False
            logger.info("✅ Z/12 pair: unmatchable")
            return True
        except Exception as e:
            logger.error(f"❌ Z/12 pair check failed: {e}")
            return False

    def _check_group_certificate(self) -> bool:
        """Z/8 の組で証明書 R={2,6}, S={0,2,4,6}, Y={1}, Z={1,3,5} が得られるか"""
        try:
            G = FiniteAbelianGroup((8,))
            cert = find_certificate(G, _cyclic(0, 1, 2, 4, 6), _cyclic(1, 2, 3, 5, 6))
            expected = (_cyclic(2, 6), _cyclic(0, 2, 4, 6), _cyclic(1), _cyclic(1, 3, 5))
            if cert is None or (cert.R, cert.S, cert.Y, cert.Z) != expected:
                logger.error(f"❌ Z/8 certificate mismatch: {cert}")
                return False
            logger.info("✅ Z/8 certificate: R={2,6}, S={0,2,4,6}")
            return True
        except Exception as e:
            logger.error(f"❌ Z/8 certificate check failed: {e}")
            return False

    def _check_group_quotient(self) -> bool:
        """Z/8 の組を H={0,4} で割ると Z/4 のマッチング可能な組になるか"""
        try:
            G = FiniteAbelianGroup((8,))
            A = _cyclic(0, 1, 2, 4, 6)
            B = _cyclic(1, 2, 3, 5, 6)
            cert = find_certificate(G, A, B)
            H = subgroup_generated(G, [(4,)])
            projection = quotient_project(G, H, A, B, cert)
            if projection.hypothesis_holds:
                logger.error("❌ Z/8 projection: hypothesis unexpectedly holds")
                return False
            if (projection.projected_A, projection.projected_B) != (_cyclic(0, 1, 2), _cyclic(1, 2, 3)):
                logger.error("❌ Z/8 projection: unexpected image")
                return False
            if find_matching(projection.quotient, projection.projected_A, projection.projected_B) is None:
                logger.error("❌ Z/8 projection: projected pair should be matchable")
                return False
            logger.info("✅ Z/8 → Z/4 projection: matchable")
            return True
        except Exception as e:
            logger.error(f"❌ Z/8 projection check failed: {e}")
            return False

    def _run_census(self, setting: str, ambient: Any, n: int) -> Dict[str, Any]:
        with CensusRunner(setting, ambient, n, workers=1) as runner:
            return runner.run(io.StringIO())

    def _check_group_boundary(self) -> bool:
        """Z/4, n=3 のセンサスでマッチング不能な組がないか"""
        try:
            summary = self._run_census("group", FiniteAbelianGroup((4,)), 3)
            if summary["unmatchable"] != 0:
                logger.error(f"❌ Z/4 census: {summary['unmatchable']} unmatchable pairs")
                return False
            logger.info(f"✅ Z/4 census: {summary['pairs']} pairs, all matchable")
            return True
        except Exception as e:
            logger.error(f"❌ Z/4 census failed: {e}")
            return False

    def _check_field_construction(self) -> bool:
        """F_16, n=2 の構成が既知の組と一致し、検証を通るか"""
        try:
            L = make_extension_field(2, 4)
            A, B, cert = construct_unmatchable_linear(L, 2)
            expected_A = span(L, [(0, 1, 0, 0), (0, 0, 1, 1)])
            expected_B = span(L, [(0, 1, 1, 0), (0, 1, 0, 0)])
            if (A, B, cert.d) != (expected_A, expected_B, 2):
                logger.error("❌ F_16 construction: unexpected pair")
                return False
            if not verify_linear_certificate(cert, L, A, B) or criterion_verdict(L, A, B) is None:
                logger.error("❌ F_16 construction: certificate not confirmed")
                return False
            logger.info("✅ F_16 construction: verified")
            return True
        except Exception as e:
            logger.error(f"❌ F_16 construction check failed: {e}")
            return False

    def _check_field_boundary(self) -> bool:
        """F_16, n=3 のセンサス（120 組）でマッチしない組がないか"""
        try:
            summary = self._run_census("field", make_extension_field(2, 4), 3)
            if summary["pairs"] != 120 or summary["unmatchable"] != 0:
                logger.error(f"❌ F_16 census: {summary}")
                return False
            logger.info("✅ F_16 census: 120 pairs, all matched")
            return True
        except Exception as e:
            logger.error(f"❌ F_16 census failed: {e}")
            return False

    def run_diagnostic(self) -> bool:
        """詳細な診断を実行"""
        print(f"🧮 {self.app_name} - Self Check")
        print("=" * 50)
        started = time.strftime("%Y-%m-%d %H:%M:%S")

        results = self.check_all_components()

        print(f"📊 Overall: {'✅ Healthy' if results['overall'] else '❌ Unhealthy'}")
        for key, label in COMPONENTS.items():
            print(f"   - {label}: {'✅ OK' if results[key] else '❌ Failed'}")
        print(f"\n🕒 Started at {started}")
        print("🎉 Self check completed!")
        return results["overall"]


def run_selftest() -> Dict[str, bool]:
    """既知の例をすべて再実行し、コンポーネントごとの結果を返す"""
    return SelfChecker().check_all_components()
