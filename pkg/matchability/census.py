"""
matchability census
族（群または体拡大）と n を固定し、すべての組（または乱択した組）を判定して記録する

出力は正規順（全列挙）またはシードで再現できる順（乱択）に並び、
ワーカー数によらず同じバイト列になる。
"""

import itertools
import json
import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, Iterator, List, Optional, TextIO, Tuple

from config.settings import APP_NAME, CENSUS_CHUNKSIZE, CENSUS_WORKERS

from .errors import InvalidInput
from .fq_core import ExtensionField, contains_vector, enumerate_subspaces, span, whole_space
from .group_core import FiniteAbelianGroup
from .harness import Ambient, family_to_json, parse_problem, run_check, subset_to_json, subspace_to_json

# ログ設定
logger = logging.getLogger(__name__)

MODES = ("exhaustive", "sample")
FORMATS = ("jsonl", "json", "table")

# 乱択で 1 ∉ B の部分空間を引き直す回数の上限
MAX_REJECTIONS = 10_000


def evaluate_pair(task: Tuple[Dict[str, Any], List[Any], List[Any], bool, bool]) -> Dict[str, Any]:
    """
    一つの組を判定して CensusRecord を返す（ワーカープロセスから呼ばれる）

    Args:
        task: (族の JSON, A, B, 相互検査するか, 時間を記録するか)
    """
    family, A, B, xcheck, timing = task
    problem = dict(family)
    problem.update({"A": A, "B": B})
    started = time.perf_counter()
    result = run_check(parse_problem(problem), xcheck=xcheck)
    elapsed = time.perf_counter() - started

    record: Dict[str, Any] = {
        "id": {"A": result["A"], "B": result["B"]},
        "matchable": result["matchable"],
        "decider": result["decider"],
        "payload": result["witness"] if result["matchable"] and "witness" in result else result.get("certificate"),
    }
    if timing:
        record["timing_ms"] = round(elapsed * 1000, 3)
    return record


class CensusRunner:
    """センサス実行クラス"""

    def __init__(
        self,
        setting: str,
        ambient: Ambient,
        n: int,
        mode: str = "exhaustive",
        seed: Optional[int] = None,
        sample: Optional[int] = None,
        workers: Optional[int] = None,
        xcheck: bool = False,
        timing: bool = False,
    ) -> None:
        """
        センサスランナーを初期化

        Args:
            setting: "group" または "field"
            ambient: 群または体
            n: |A| = |B|（dim A = dim B）
            mode: "exhaustive" または "sample"
            seed: 乱択のシード（sample では必須）
            sample: 乱択する組の数（sample では必須）
            workers: プロセス数（None なら設定値）
            xcheck: 各組で相互検査を行う
            timing: 記録に処理時間を含める

        Raises:
            InvalidInput: 引数の組み合わせが不正
        """
        if mode not in MODES:
            raise InvalidInput(f"mode must be one of {MODES}, got {mode!r}")
        if mode == "sample" and (seed is None or sample is None):
            raise InvalidInput("sample mode requires both --seed and --sample")
        if sample is not None and sample < 1:
            raise InvalidInput(f"--sample must be positive, got {sample}")
        if n < 1:
            raise InvalidInput(f"n must be positive, got {n}")
        self.setting = setting
        self.ambient = ambient
        self.n = n
        self.mode = mode
        self.seed = seed
        self.sample = sample
        self.workers = workers or CENSUS_WORKERS
        self.xcheck = xcheck
        self.timing = timing
        self.family = family_to_json(setting, ambient)
        self._executor: Optional[ProcessPoolExecutor] = None
        self._closed = False

        self._check_size()
        logger.info(f"✅ {APP_NAME} Census runner initialized ({mode}, n = {n}, workers = {self.workers})")

    def _check_size(self) -> None:
        if self.setting == "group":
            order = self.ambient.order
            if self.n > order - 1:
                raise InvalidInput(f"n = {self.n} is too large for B with 0 ∉ B in a group of order {order}")
        else:
            if self.n >= self.ambient.m:
                raise InvalidInput(f"n = {self.n} must be less than m = {self.ambient.m}")
            # 上限チェック
            enumerate_subspaces(whole_space(self.ambient), dims=[0])

    # ===== 組の列挙 =====

    def _group_pairs(self) -> Iterator[Tuple[List[Any], List[Any]]]:
        G: FiniteAbelianGroup = self.ambient
        elements = G.elements()
        nonidentity = [x for x in elements if x != G.identity]
        if self.mode == "exhaustive":
            for A in itertools.combinations(elements, self.n):
                for B in itertools.combinations(nonidentity, self.n):
                    yield subset_to_json(A), subset_to_json(B)
            return
        rng = random.Random(self.seed)
        for _ in range(self.sample):
            A = sorted(rng.sample(elements, self.n))
            B = sorted(rng.sample(nonidentity, self.n))
            yield subset_to_json(A), subset_to_json(B)

    def _random_subspace(self, rng: random.Random, avoid_one: bool) -> Any:
        L: ExtensionField = self.ambient
        for _ in range(MAX_REJECTIONS):
            U = span(L, [L.decode(rng.randrange(L.order)) for _ in range(self.n)])
            if U.dim == self.n and not (avoid_one and contains_vector(U, L.one)):
                return U
        raise InvalidInput("Could not draw a random subspace within the rejection limit")

    def _field_pairs(self) -> Iterator[Tuple[List[Any], List[Any]]]:
        L: ExtensionField = self.ambient
        if self.mode == "exhaustive":
            subspaces = enumerate_subspaces(whole_space(L), dims=[self.n])
            candidates_B = [U for U in subspaces if not contains_vector(U, L.one)]
            for A in subspaces:
                for B in candidates_B:
                    yield subspace_to_json(A), subspace_to_json(B)
            return
        rng = random.Random(self.seed)
        for _ in range(self.sample):
            A = self._random_subspace(rng, avoid_one=False)
            B = self._random_subspace(rng, avoid_one=True)
            yield subspace_to_json(A), subspace_to_json(B)

    def pairs(self) -> Iterator[Tuple[List[Any], List[Any]]]:
        """判定する組を正規順（またはシード順）で返す"""
        if self.setting == "group":
            return self._group_pairs()
        return self._field_pairs()

    # ===== 実行 =====

    def records(self) -> Iterator[Dict[str, Any]]:
        """
        各組の CensusRecord を入力順で返す

        Raises:
            InternalInconsistency: 相互検査で結論が食い違った
        """
        tasks = ((self.family, A, B, self.xcheck, self.timing) for A, B in self.pairs())
        if self.workers <= 1:
            yield from map(evaluate_pair, tasks)
            return
        if self._executor is None:
            self._executor = ProcessPoolExecutor(max_workers=self.workers)
        # Executor.map は入力順に結果を返す
        yield from self._executor.map(evaluate_pair, tasks, chunksize=CENSUS_CHUNKSIZE)

    def summary(self, pairs: int, unmatchable: int) -> Dict[str, Any]:
        return {
            "family": self.family,
            "n": self.n,
            "mode": self.mode,
            "seed": self.seed,
            "sample": self.sample,
            "pairs": pairs,
            "matchable": pairs - unmatchable,
            "unmatchable": unmatchable,
        }

    def run(self, stream: TextIO, output_format: str = "jsonl") -> Dict[str, Any]:
        """
        センサスを実行して stream に書き出す

        jsonl と table は一件ずつ書き出す。全件を保持するのは json 形式のみ。

        Returns:
            集計（summary フッターと同じ内容）
        """
        if output_format not in FORMATS:
            raise InvalidInput(f"format must be one of {FORMATS}, got {output_format!r}")

        pairs = 0
        unmatchable = 0
        kept: List[Dict[str, Any]] = []
        for record in self.records():
            pairs += 1
            if not record["matchable"]:
                unmatchable += 1
            if output_format == "jsonl":
                stream.write(dumps_record(record) + "\n")
            elif output_format == "table":
                stream.write(format_table_row(record) + "\n")
            else:
                kept.append(record)

        summary = self.summary(pairs, unmatchable)
        if output_format == "jsonl":
            stream.write(dumps_record({"summary": summary}) + "\n")
        elif output_format == "json":
            stream.write(json.dumps({"records": kept, "summary": summary}, ensure_ascii=False, indent=2) + "\n")
        else:
            stream.write(
                f"# pairs={summary['pairs']} matchable={summary['matchable']} "
                f"unmatchable={summary['unmatchable']}\n"
            )

        logger.info(
            f"📊 Census finished: {summary['pairs']} pairs, {summary['unmatchable']} unmatchable "
            f"({summary['matchable']} matchable)"
        )
        return summary

    def close(self) -> None:
        """ワーカープールを閉じる"""
        if self._closed:
            return  # 既にクローズ済み
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None
        self._closed = True
        logger.debug("🔒 Census runner closed")

    def __enter__(self) -> "CensusRunner":
        """コンテキストマネージャー用"""
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        """コンテキストマネージャー用"""
        self.close()


def dumps_record(record: Dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def format_table_row(record: Dict[str, Any]) -> str:
    verdict = "matchable" if record["matchable"] else "UNMATCHABLE"
    return f"{json.dumps(record['id']['A'])}\t{json.dumps(record['id']['B'])}\t{verdict}\t{record['decider']}"


def read_records(stream: TextIO) -> Tuple[List[Dict[str, Any]], Optional[Dict[str, Any]]]:
    """JSONL のセンサス出力を（記録, summary）に分けて読む"""
    records = []
    summary = None
    for line in stream:
        if not line.strip():
            continue
        entry = json.loads(line)
        if "summary" in entry:
            summary = entry["summary"]
        else:
            records.append(entry)
    return records, summary
