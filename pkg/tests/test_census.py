import io
import pathlib
import sys
from typing import Any, Dict, Iterator
from unittest import TestCase, mock

PROJECT_ROOT = pathlib.Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from matchability.census import CensusRunner, read_records  # noqa: E402
from matchability.errors import InvalidInput  # noqa: E402
from matchability.fq_core import make_extension_field  # noqa: E402
from matchability.group_core import FiniteAbelianGroup  # noqa: E402
from matchability.harness import replay_record  # noqa: E402


def run_census(setting: str, ambient: Any, n: int, **kwargs: Any) -> str:
    stream = io.StringIO()
    with CensusRunner(setting, ambient, n, **kwargs) as runner:
        runner.run(stream, "jsonl")
    return stream.getvalue()


class GroupCensusTests(TestCase):
    def test_z4_n3_is_all_matchable(self) -> None:
        records, summary = read_records(io.StringIO(run_census("group", FiniteAbelianGroup((4,)), 3)))
        self.assertEqual(len(records), 4)
        self.assertEqual(summary["pairs"], 4)
        self.assertEqual(summary["unmatchable"], 0)
        self.assertTrue(all(r["decider"] == "find_matching" for r in records))

    def test_z6_n2_counts(self) -> None:
        records, summary = read_records(io.StringIO(run_census("group", FiniteAbelianGroup((6,)), 2)))
        self.assertEqual(summary["pairs"], 15 * 10)
        self.assertGreater(summary["unmatchable"], 0)
        unmatchable_ids = [r["id"] for r in records if not r["matchable"]]
        self.assertIn({"A": [[0], [3]], "B": [[1], [3]]}, unmatchable_ids)

    def test_exhaustive_order_is_canonical(self) -> None:
        records, _ = read_records(io.StringIO(run_census("group", FiniteAbelianGroup((5,)), 2)))
        ids = [(r["id"]["A"], r["id"]["B"]) for r in records]
        self.assertEqual(ids, sorted(ids))
        self.assertTrue(all([0] not in B for _, B in ids))

    def test_output_is_deterministic(self) -> None:
        G = FiniteAbelianGroup((6,))
        self.assertEqual(run_census("group", G, 2), run_census("group", G, 2))

    def test_sample_is_reproducible(self) -> None:
        G = FiniteAbelianGroup((12,))
        first = run_census("group", G, 5, mode="sample", seed=42, sample=200)
        second = run_census("group", G, 5, mode="sample", seed=42, sample=200)
        self.assertEqual(first, second)
        records, summary = read_records(io.StringIO(first))
        self.assertEqual(summary["pairs"], 200)
        self.assertEqual(summary["seed"], 42)
        self.assertEqual(len(records), 200)

    def test_sample_finds_unmatchable_pairs(self) -> None:
        _, summary = read_records(
            io.StringIO(run_census("group", FiniteAbelianGroup((12,)), 5, mode="sample", seed=42, sample=1000))
        )
        self.assertGreaterEqual(summary["unmatchable"], 1)

    def test_records_replay(self) -> None:
        G = FiniteAbelianGroup((6,))
        records, summary = read_records(io.StringIO(run_census("group", G, 2)))
        for record in records[::10]:
            self.assertTrue(replay_record(summary["family"], record))

    def test_timing_is_opt_in(self) -> None:
        G = FiniteAbelianGroup((4,))
        records, _ = read_records(io.StringIO(run_census("group", G, 3)))
        self.assertNotIn("timing_ms", records[0])
        timed, _ = read_records(io.StringIO(run_census("group", G, 3, timing=True)))
        self.assertIn("timing_ms", timed[0])


class FieldCensusTests(TestCase):
    def test_f16_n3_is_all_matchable(self) -> None:
        _, summary = read_records(io.StringIO(run_census("field", make_extension_field(2, 4), 3)))
        self.assertEqual(summary["pairs"], 120)
        self.assertEqual(summary["unmatchable"], 0)

    def test_f16_n2_has_unmatchable_pairs(self) -> None:
        records, summary = read_records(io.StringIO(run_census("field", make_extension_field(2, 4), 2)))
        self.assertEqual(summary["pairs"], 35 * 28)
        self.assertGreater(summary["unmatchable"], 0)
        self.assertIn(
            {"A": [[0, 1, 0, 0], [0, 0, 1, 1]], "B": [[0, 1, 0, 0], [0, 0, 1, 0]]},
            [r["id"] for r in records if not r["matchable"]],
        )

    def test_field_sample(self) -> None:
        L = make_extension_field(2, 4)
        output = run_census("field", L, 2, mode="sample", seed=7, sample=20)
        self.assertEqual(output, run_census("field", L, 2, mode="sample", seed=7, sample=20))
        records, _ = read_records(io.StringIO(output))
        self.assertEqual(len(records), 20)
        self.assertTrue(all([1, 0, 0, 0] not in r["id"]["B"] for r in records))


class CensusRunnerValidationTests(TestCase):
    def test_sample_requires_seed(self) -> None:
        with self.assertRaises(InvalidInput):
            CensusRunner("group", FiniteAbelianGroup((12,)), 5, mode="sample", sample=10)

    def test_unknown_mode(self) -> None:
        with self.assertRaises(InvalidInput):
            CensusRunner("group", FiniteAbelianGroup((12,)), 5, mode="partial")

    def test_n_out_of_range(self) -> None:
        with self.assertRaises(InvalidInput):
            CensusRunner("group", FiniteAbelianGroup((4,)), 4)
        with self.assertRaises(InvalidInput):
            CensusRunner("field", make_extension_field(2, 4), 4)
        with self.assertRaises(InvalidInput):
            CensusRunner("group", FiniteAbelianGroup((4,)), 0)

    def test_unknown_format(self) -> None:
        with CensusRunner("group", FiniteAbelianGroup((4,)), 3) as runner:
            with self.assertRaises(InvalidInput):
                runner.run(io.StringIO(), "xml")

    def test_table_and_json_formats(self) -> None:
        G = FiniteAbelianGroup((4,))
        stream = io.StringIO()
        with CensusRunner("group", G, 3) as runner:
            summary = runner.run(stream, "table")
        lines = stream.getvalue().splitlines()
        self.assertEqual(len(lines), summary["pairs"] + 1)
        self.assertTrue(lines[-1].startswith("# pairs=4"))

        stream = io.StringIO()
        with CensusRunner("group", G, 3) as runner:
            runner.run(stream, "json")
        self.assertIn('"summary"', stream.getvalue())


class ParallelCensusTests(TestCase):
    def test_worker_count_does_not_change_the_bytes(self) -> None:
        for setting, ambient, n in (("field", make_extension_field(2, 4), 2), ("group", FiniteAbelianGroup((8,)), 3)):
            single = run_census(setting, ambient, n, workers=1)
            parallel = run_census(setting, ambient, n, workers=3)
            self.assertEqual(single, parallel, (setting, n))

    def test_seeded_sample_with_workers(self) -> None:
        G = FiniteAbelianGroup((12,))
        single = run_census("group", G, 5, mode="sample", seed=42, sample=300, workers=1)
        parallel = run_census("group", G, 5, mode="sample", seed=42, sample=300, workers=3)
        self.assertEqual(single, parallel)


class StreamingTests(TestCase):
    def test_jsonl_records_are_written_as_they_arrive(self) -> None:
        stream = io.StringIO()
        with CensusRunner("group", FiniteAbelianGroup((6,)), 2) as runner:
            produce = runner.records

            def watched() -> Iterator[Dict[str, Any]]:
                for index, record in enumerate(produce()):
                    self.assertEqual(stream.getvalue().count("\n"), index)
                    yield record

            with mock.patch.object(runner, "records", watched):
                summary = runner.run(stream, "jsonl")
        self.assertEqual(summary["pairs"], 150)
        self.assertEqual(stream.getvalue().count("\n"), 151)

    def test_summary_counts_match_records(self) -> None:
        records, summary = read_records(io.StringIO(run_census("group", FiniteAbelianGroup((8,)), 2)))
        unmatchable = sum(1 for r in records if not r["matchable"])
        self.assertEqual(summary["pairs"], len(records))
        self.assertEqual(summary["unmatchable"], unmatchable)
        self.assertEqual(summary["matchable"], len(records) - unmatchable)
