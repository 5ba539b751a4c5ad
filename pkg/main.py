# -*- coding: utf-8 -*-
"""
matchability - メインエントリーポイント

有限アーベル群の部分集合の組、体拡大の部分空間の組がマッチング可能かを判定し、
マッチング（または証明書）を出力するコマンドラインツール
"""

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional, TextIO

from config.settings import APP_NAME, LOG_LEVEL, validate_config
from matchability.census import FORMATS, CensusRunner
from matchability.errors import InternalInconsistency, InvalidInput, MatchabilityError
from matchability.fq_core import ExtensionField, make_extension_field
from matchability.harness import (
    load_problem_file,
    make_problem,
    parse_group,
    run_check,
    run_construct,
)
from matchability.self_check import SelfChecker

# 終了コード
EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INCONSISTENT = 2

# ロガー設定
logger = logging.getLogger(__name__)


class ArgumentParser(argparse.ArgumentParser):
    """引数エラーを終了コード 1 で報告するパーサー"""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"❌ {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def parse_elements(text: str) -> List[Any]:
    """
    -A / -B の値を読む

    "[" で始まれば JSON（元の配列）、それ以外はカンマ区切りの整数として扱う。
    """
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            value = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise InvalidInput(f"Invalid JSON element list {text!r}: {e}") from None
        if not isinstance(value, list):
            raise InvalidInput(f"Element list must be a JSON array: {text!r}")
        return value
    if not stripped:
        return []
    try:
        return [int(part) for part in stripped.split(",")]
    except ValueError:
        raise InvalidInput(f"Cannot parse element list {text!r}") from None


def _field_operands(L: ExtensionField, values: List[Any]) -> List[Any]:
    # 整数は元の符号 Σ c_i p^i として読む
    return [L.decode(v) if isinstance(v, int) else v for v in values]


def build_ambient(args: argparse.Namespace) -> Any:
    """--group または --p/--m/--modulus から群・体を作る"""
    if args.setting == "group":
        if not args.group:
            raise InvalidInput("--group is required (e.g. Z12 or Z2xZ6)")
        return parse_group(args.group)
    if args.p is None or args.m is None:
        raise InvalidInput("--p and --m are required for the field setting")
    modulus = parse_elements(args.modulus) if args.modulus else None
    return make_extension_field(args.p, args.m, modulus)


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    """--out が指定されていればファイル、なければ標準出力"""
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="\n") as stream:
        yield stream


def render_verdict(result: Dict[str, Any], output_format: str) -> str:
    if output_format == "jsonl":
        return json.dumps(result, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    if output_format == "table":
        verdict = "matchable" if result["matchable"] else "UNMATCHABLE"
        lines = [f"A\t{json.dumps(result['A'])}", f"B\t{json.dumps(result['B'])}", f"verdict\t{verdict}"]
        lines.append(f"decider\t{result['decider']}")
        if "witness" in result:
            lines.append(f"witness\t{json.dumps(result['witness'])}")
        if "certificate" in result:
            lines.append(f"certificate\t{json.dumps(result['certificate'])}")
        if "verified" in result:
            lines.append(f"verified\t{result['verified']}")
        return "\n".join(lines)
    return json.dumps(result, ensure_ascii=False, indent=2)


def check_command(args: argparse.Namespace) -> int:
    """組を判定して Verdict を出力"""
    if args.input:
        spec = load_problem_file(args.input)
        if spec.setting != args.setting:
            raise InvalidInput(f"{args.input} describes a {spec.setting} problem, not {args.setting}")
    else:
        if args.A is None or args.B is None:
            raise InvalidInput("check needs -A and -B (or --input)")
        ambient = build_ambient(args)
        A = parse_elements(args.A)
        B = parse_elements(args.B)
        if args.setting == "field":
            A = _field_operands(ambient, A)
            B = _field_operands(ambient, B)
        spec = make_problem(args.setting, ambient, A, B)

    result = run_check(spec, xcheck=args.xcheck)
    logger.info(f"📊 Verdict: {'matchable' if result['matchable'] else 'unmatchable'} ({result['decider']})")
    with open_output(args.out) as stream:
        stream.write(render_verdict(result, args.format or "json") + "\n")
    return EXIT_OK


def construct_command(args: argparse.Namespace) -> int:
    """マッチング不能な組を構成して出力"""
    if args.n is None:
        raise InvalidInput("construct needs -n")
    ambient = build_ambient(args)
    result = run_construct(args.setting, ambient, args.n)
    with open_output(args.out) as stream:
        stream.write(render_verdict(result, args.format or "json") + "\n")
    if not result["verified"]:
        raise InternalInconsistency("Constructed pair failed independent re-verification")
    return EXIT_OK


def census_command(args: argparse.Namespace) -> int:
    """センサスを実行して JSONL などで出力"""
    if args.n is None:
        raise InvalidInput("census needs -n")
    ambient = build_ambient(args)
    mode = "sample" if args.sample is not None else "exhaustive"
    with CensusRunner(
        args.setting,
        ambient,
        args.n,
        mode=mode,
        seed=args.seed,
        sample=args.sample,
        workers=args.workers,
        xcheck=args.xcheck,
        timing=args.timing,
    ) as runner:
        with open_output(args.out) as stream:
            runner.run(stream, args.format or "jsonl")
    return EXIT_OK


def selftest_command(args: argparse.Namespace) -> int:
    """既知の例で自己診断"""
    return EXIT_OK if SelfChecker().run_diagnostic() else EXIT_INVALID


COMMANDS = {
    "check": check_command,
    "construct": construct_command,
    "census": census_command,
}


def build_parser() -> argparse.ArgumentParser:
    """コマンドラインパーサーを組み立てる"""
    parser = ArgumentParser(
        description=f"{APP_NAME} - アーベル群・体拡大におけるマッチング判定",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用例:
  python main.py group check --group Z12 -A 0,1,3,6,9 -B 1,2,3,6,9       # 判定（証明書を出力）
  python main.py group check --group Z5 -A 1,2 -B 1,2 --xcheck          # すべての判定器で照合
  python main.py group census --group Z4 -n 3                            # 全列挙センサス（JSONL）
  python main.py group census --group Z12 -n 5 --sample 1000 --seed 42   # 乱択センサス
  python main.py group construct --group Z6 -n 2                         # マッチング不能な組を構成
  python main.py field check --p 2 --m 4 -A '[[0,1,0,0],[0,0,1,1]]' -B '[[0,1,0,0],[0,0,1,0]]'
  python main.py field census --p 2 --m 4 -n 3 --workers 4 --out f16.jsonl
  python main.py field construct --p 2 --m 4 -n 2
  python main.py selftest                                                # 既知の例で自己診断
        """,
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="詳細ログを出力")

    # 各サブコマンド共通のオプション
    common = ArgumentParser(add_help=False)
    common.add_argument("--xcheck", action="store_true", help="適用できるすべての判定器で結論を照合")
    common.add_argument("--seed", type=int, help="乱択センサスのシード")
    common.add_argument("--sample", type=int, help="乱択する組の数（指定すると sample モード）")
    common.add_argument("--out", type=str, help="出力ファイル（省略時は標準出力）")
    common.add_argument("--format", choices=FORMATS, help="出力形式（check/construct は json、census は jsonl が既定）")
    common.add_argument("--workers", type=int, help="センサスのプロセス数")
    common.add_argument("--input", type=str, help="問題記述の JSON ファイル（check 用）")
    common.add_argument("--timing", action="store_true", help="センサスの記録に処理時間を含める")
    common.add_argument("-n", type=int, help="|A| = |B|（dim A = dim B）")
    common.add_argument("-A", type=str, help="A の元（カンマ区切りの整数、または JSON 配列）")
    common.add_argument("-B", type=str, help="B の元（カンマ区切りの整数、または JSON 配列）")
    common.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS, help="詳細ログを出力")

    group_options = ArgumentParser(add_help=False)
    group_options.add_argument("--group", type=str, help="群の略記（Z12, Z2xZ6）または不変因子")

    field_options = ArgumentParser(add_help=False)
    field_options.add_argument("--p", type=int, help="標数（素数）")
    field_options.add_argument("--m", type=int, help="拡大次数")
    field_options.add_argument("--modulus", type=str, help="既約多項式の係数（昇順、カンマ区切り）")

    settings = parser.add_subparsers(dest="setting", required=True)
    for setting, options, help_text in (
        ("group", group_options, "有限アーベル群の部分集合"),
        ("field", field_options, "体拡大 F_p ⊊ F_{p^m} の部分空間"),
    ):
        setting_parser = settings.add_parser(setting, help=help_text)
        commands = setting_parser.add_subparsers(dest="command", required=True)
        for command in COMMANDS:
            commands.add_parser(command, parents=[common, options])

    settings.add_parser("selftest", help="既知の例で自己診断", parents=[common])
    return parser


def main(argv: Optional[List[str]] = None) -> None:
    """メイン関数"""
    parser = build_parser()
    args = parser.parse_args(argv)

    # ログレベル設定
    log_level = logging.DEBUG if args.verbose else getattr(logging, LOG_LEVEL, logging.INFO)
    logging.basicConfig(level=log_level, format="%(asctime)s - %(levelname)s - %(message)s")

    # 開始メッセージ
    logger.info(f"🧮 {APP_NAME} started")

    try:
        validate_config()
        if args.setting == "selftest":
            code = selftest_command(args)
        else:
            code = COMMANDS[args.command](args)

        if code == EXIT_OK:
            logger.info("✅ Operation completed successfully")
        else:
            logger.error("❌ Operation failed")
        sys.exit(code)

    except KeyboardInterrupt:
        logger.info("⏹️ Interrupted by user")
        sys.exit(EXIT_OK)
    except InternalInconsistency as e:
        print(f"❌ Internal inconsistency: {e}", file=sys.stderr)
        sys.exit(EXIT_INCONSISTENT)
    except (MatchabilityError, ValueError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


if __name__ == "__main__":
    main()
