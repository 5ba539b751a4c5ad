import pathlib
import random
import sys
from typing import List
from unittest import TestCase

PROJECT_ROOT = pathlib.Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from matchability.errors import InvalidInput, NoSuitableField, PreconditionViolated  # noqa: E402
from matchability.fq_core import (  # noqa: E402
    ExtensionField,
    FqSubspace,
    contains_vector,
    enumerate_subspaces,
    is_subspace,
    make_extension_field,
    minimal_degree,
    scale,
    span,
    subfield_subspace,
    subspace_vectors,
    trace_zero_subspace,
    whole_space,
    zero_subspace,
)
from matchability.fq_matching import (  # noqa: E402
    DECIDER_LINEAR_CERTIFICATE,
    DECIDER_ORACLE,
    LinearCertificate,
    LinearVerdict,
    congruence_guarantee_linear,
    construct_unmatchable_linear,
    criterion_verdict,
    decide_linear,
    definitional_oracle,
    exists_unmatchable_linear,
    find_linear_certificate,
    generalized_symmetric_sufficient_linear,
    is_chowla_subspace,
    n0_linear,
    product_span_certificate,
    verify_linear_certificate,
)
from matchability.utils import divisors  # noqa: E402

F4_FIELD = make_extension_field(2, 2)
F8 = make_extension_field(2, 3)
F16 = make_extension_field(2, 4)
F64 = make_extension_field(2, 6)

ONE = (1, 0, 0, 0)
T = (0, 1, 0, 0)
T2 = (0, 0, 1, 0)
OMEGA = (0, 1, 1, 0)

# F_16, n = 2 の既知のマッチしない組
KNOWN_A = span(F16, [T, (0, 0, 1, 1)])
KNOWN_B = span(F16, [T, T2])


class LinearCertificateTests(TestCase):
    def test_known_pair_certificate(self) -> None:
        cert = find_linear_certificate(F16, KNOWN_A, KNOWN_B)
        self.assertIsNotNone(cert)
        self.assertEqual(cert.R, span(F16, [OMEGA]))
        self.assertEqual(cert.S, KNOWN_A)
        self.assertTrue(cert.Y.is_zero())
        self.assertEqual(cert.Z, span(F16, [T]))
        self.assertEqual(cert.d, 2)
        self.assertTrue(verify_linear_certificate(cert, F16, KNOWN_A, KNOWN_B))

    def test_matchable_pair_has_no_certificate(self) -> None:
        A = span(F4_FIELD, [(0, 1)])
        self.assertIsNone(find_linear_certificate(F4_FIELD, A, A))

    def test_one_in_b_gives_trivial_certificate(self) -> None:
        A = span(F4_FIELD, [(0, 1)])
        B = span(F4_FIELD, [(1, 0)])
        cert = find_linear_certificate(F4_FIELD, A, B)
        self.assertEqual((cert.R, cert.S, cert.d), (B, A, 1))
        self.assertTrue(verify_linear_certificate(cert, F4_FIELD, A, B))

    def test_verify_rejects_tampered_certificate(self) -> None:
        cert = find_linear_certificate(F16, KNOWN_A, KNOWN_B)
        wrong_degree = LinearCertificate(R=cert.R, S=cert.S, Y=cert.Y, Z=cert.Z, d=4)
        self.assertFalse(verify_linear_certificate(wrong_degree, F16, KNOWN_A, KNOWN_B))
        not_stable = LinearCertificate(
            R=cert.R, S=span(F16, [T]), Y=span(F16, [(0, 0, 1, 1)]), Z=cert.Z, d=cert.d
        )
        self.assertFalse(verify_linear_certificate(not_stable, F16, KNOWN_A, KNOWN_B))
        trivial_r = LinearCertificate(R=span(F16, [ONE]), S=KNOWN_A, Y=zero_subspace(F16), Z=cert.Z, d=1)
        self.assertFalse(verify_linear_certificate(trivial_r, F16, KNOWN_A, KNOWN_B))

    def test_input_validation(self) -> None:
        with self.assertRaises(InvalidInput):
            find_linear_certificate(F16, KNOWN_A, span(F16, [T]))
        with self.assertRaises(InvalidInput):
            find_linear_certificate(F16, zero_subspace(F16), zero_subspace(F16))

    def test_product_span_certificate(self) -> None:
        F4 = subfield_subspace(F16, 2)
        cert = product_span_certificate(F16, KNOWN_A, F4)
        self.assertIsNotNone(cert)
        self.assertEqual(cert.d, 2)
        self.assertTrue(verify_linear_certificate(cert, F16, KNOWN_A, F4))
        A = span(F4_FIELD, [(0, 1)])
        self.assertIsNone(product_span_certificate(F4_FIELD, A, A))


class CriterionTests(TestCase):
    def test_known_pair(self) -> None:
        found = criterion_verdict(F16, KNOWN_A, KNOWN_B)
        self.assertEqual(found, (KNOWN_A, subfield_subspace(F16, 2)))

    def test_matchable_pair(self) -> None:
        A = span(F4_FIELD, [(0, 1)])
        self.assertIsNone(criterion_verdict(F4_FIELD, A, A))

    def test_one_in_b_is_rejected(self) -> None:
        with self.assertRaises(PreconditionViolated):
            criterion_verdict(F16, KNOWN_A, subfield_subspace(F16, 2))


class OracleTests(TestCase):
    def test_matchable_pair_has_witnesses(self) -> None:
        A = span(F4_FIELD, [(0, 1)])
        matched, witnesses = definitional_oracle(F4_FIELD, A, A)
        self.assertTrue(matched)
        self.assertEqual(len(witnesses), 1)
        self.assertEqual(witnesses[0].a_basis, ((0, 1),))
        self.assertEqual(witnesses[0].b_basis, ((0, 1),))

    def test_known_pair_is_not_matched(self) -> None:
        self.assertEqual(definitional_oracle(F16, KNOWN_A, KNOWN_B), (False, ()))

    def test_prime_degree_always_matches(self) -> None:
        lines = enumerate_subspaces(whole_space(F8), dims=[1])
        for A in lines:
            for B in lines:
                if contains_vector(B, F8.one):
                    continue
                verdict = decide_linear(F8, A, B, with_oracle=True)
                self.assertTrue(verdict.matchable)
                self.assertEqual(verdict.decider, DECIDER_ORACLE)

    def test_bounds(self) -> None:
        F9 = make_extension_field(3, 2)
        A = span(F9, [(0, 1)])
        with self.assertRaises(InvalidInput):
            definitional_oracle(F9, A, A)


class DecideLinearTests(TestCase):
    def test_unmatchable(self) -> None:
        verdict = decide_linear(F16, KNOWN_A, KNOWN_B)
        self.assertFalse(verdict.matchable)
        self.assertEqual(verdict.decider, DECIDER_LINEAR_CERTIFICATE)
        self.assertIsNone(verdict.witnesses)

    def test_matchable_without_oracle(self) -> None:
        A = span(F4_FIELD, [(0, 1)])
        verdict = decide_linear(F4_FIELD, A, A)
        self.assertTrue(verdict.matchable)
        self.assertEqual(verdict.decider, DECIDER_LINEAR_CERTIFICATE)

    def test_verdict_payload_validation(self) -> None:
        with self.assertRaises(InvalidInput):
            LinearVerdict(matchable=False, decider=DECIDER_LINEAR_CERTIFICATE)


class SufficientConditionTests(TestCase):
    def test_chowla_subspace(self) -> None:
        self.assertTrue(is_chowla_subspace(F16, span(F16, [T, (0, 0, 0, 1)])))
        self.assertFalse(is_chowla_subspace(F16, span(F16, [OMEGA, T])))
        with self.assertRaises(InvalidInput):
            is_chowla_subspace(F16, zero_subspace(F16))

    def test_generalized_symmetric(self) -> None:
        self.assertTrue(generalized_symmetric_sufficient_linear(F16, span(F16, [OMEGA]), span(F16, [OMEGA])))
        self.assertFalse(generalized_symmetric_sufficient_linear(F16, span(F16, [T]), span(F16, [OMEGA])))
        with self.assertRaises(PreconditionViolated):
            generalized_symmetric_sufficient_linear(F16, span(F16, [ONE]), span(F16, [T]))


class BoundaryTests(TestCase):
    def test_n0_linear(self) -> None:
        self.assertEqual(n0_linear(F16), 2)
        self.assertEqual(n0_linear(F8), 3)
        with self.assertRaises(InvalidInput):
            n0_linear(make_extension_field(2, 1))

    def test_exists_unmatchable_linear(self) -> None:
        self.assertTrue(exists_unmatchable_linear(F16, 2))
        self.assertFalse(exists_unmatchable_linear(F16, 3))
        self.assertTrue(exists_unmatchable_linear(F64, 3))
        self.assertFalse(exists_unmatchable_linear(F64, 5))

    def test_exists_rejects_prime_degree_and_range(self) -> None:
        with self.assertRaises(InvalidInput):
            exists_unmatchable_linear(F8, 2)
        with self.assertRaises(InvalidInput):
            exists_unmatchable_linear(F16, 4)

    def test_congruence_guarantee_linear(self) -> None:
        self.assertTrue(congruence_guarantee_linear(F16, 2))
        self.assertFalse(congruence_guarantee_linear(F16, 3))
        self.assertTrue(congruence_guarantee_linear(F64, 4))
        self.assertFalse(congruence_guarantee_linear(F64, 5))


class ConstructionTests(TestCase):
    def test_construct_f16(self) -> None:
        A, B, cert = construct_unmatchable_linear(F16, 2)
        self.assertEqual(A, KNOWN_A)
        self.assertEqual(B, KNOWN_B)
        self.assertEqual(cert.R, span(F16, [OMEGA]))
        self.assertEqual(cert.Z, span(F16, [T]))
        self.assertEqual(cert.d, 2)
        self.assertTrue(verify_linear_certificate(cert, F16, A, B))

    def test_constructed_pairs_are_unmatchable(self) -> None:
        for n in (3, 4):
            A, B, cert = construct_unmatchable_linear(F64, n)
            self.assertEqual((A.dim, B.dim), (n, n))
            self.assertFalse(contains_vector(B, F64.one))
            self.assertTrue(verify_linear_certificate(cert, F64, A, B), n)
            self.assertIsNotNone(find_linear_certificate(F64, A, B), n)

    def test_construct_without_suitable_field(self) -> None:
        with self.assertRaises(NoSuitableField):
            construct_unmatchable_linear(F16, 3)
        with self.assertRaises(NoSuitableField):
            construct_unmatchable_linear(F64, 5)


class LinearAgreementTests(TestCase):
    def test_trace_zero_subspace_is_chowla(self) -> None:
        T8 = trace_zero_subspace(F8)
        self.assertTrue(is_chowla_subspace(F8, T8))
        for A in enumerate_subspaces(whole_space(F8), dims=[2]):
            self.assertTrue(decide_linear(F8, A, T8).matchable)


    def test_seeded_chowla_subspaces_are_matchable(self) -> None:
        rng = random.Random(11)
        tested = 0
        for _ in range(400):
            L = rng.choice((F16, F64))
            n = rng.randint(1, L.m // 2)
            B = random_subspace(rng, L, n, avoid_one=True)
            if not is_chowla_subspace(L, B):
                continue
            A = random_subspace(rng, L, n)
            self.assertIsNone(criterion_verdict(L, A, B), (A.basis, B.basis))
            self.assertIsNone(find_linear_certificate(L, A, B), (A.basis, B.basis))
            tested += 1
        self.assertGreater(tested, 50)

    def test_product_span_equal_to_a_is_unmatchable(self) -> None:
        rng = random.Random(5)
        for _ in range(100):
            L = rng.choice((F16, F64))
            d = rng.choice([d for d in divisors(L.m) if d > 1])
            F = subfield_subspace(L, d)
            A = scale(F, L.decode(rng.randrange(1, L.order)))
            cert = product_span_certificate(L, A, F)
            self.assertIsNotNone(cert, (L.m, d, A.basis))
            self.assertTrue(verify_linear_certificate(cert, L, A, F))
            self.assertFalse(decide_linear(L, A, F).matchable)


def subspaces_of_dim(L: ExtensionField, n: int) -> List[FqSubspace]:
    return enumerate_subspaces(whole_space(L), dims=[n])


def random_subspace(rng: random.Random, L: ExtensionField, n: int, avoid_one: bool = False) -> FqSubspace:
    while True:
        U = span(L, [L.decode(rng.randrange(L.order)) for _ in range(n)])
        if U.dim == n and not (avoid_one and contains_vector(U, L.one)):
            return U


class ExhaustiveLinearAgreementTests(TestCase):
    def assert_certificate_laws(self, L: ExtensionField, A: FqSubspace, B: FqSubspace, cert: LinearCertificate) -> None:
        self.assertTrue(verify_linear_certificate(cert, L, A, B), (A.basis, B.basis))
        self.assertEqual(cert.S.dim % cert.d, 0)
        for x in subspace_vectors(cert.R):
            if any(x):
                self.assertTrue(is_subspace(scale(cert.S, x), cert.S))
                self.assertLessEqual(minimal_degree(L, x), cert.S.dim)

    def test_three_deciders_agree(self) -> None:
        for L, dims in ((F4_FIELD, (1,)), (F8, (1, 2)), (F16, (1, 2))):
            for n in dims:
                subspaces = subspaces_of_dim(L, n)
                for A in subspaces:
                    for B in subspaces:
                        if contains_vector(B, L.one):
                            continue
                        matched, _ = definitional_oracle(L, A, B)
                        cert = find_linear_certificate(L, A, B)
                        self.assertEqual(matched, cert is None, (L.m, A.basis, B.basis))
                        self.assertEqual(matched, criterion_verdict(L, A, B) is None, (L.m, A.basis, B.basis))
                        if cert is not None:
                            self.assert_certificate_laws(L, A, B, cert)

    def test_criterion_agrees_with_fast_search_on_f16_solids(self) -> None:
        solids = subspaces_of_dim(F16, 3)
        for A in solids:
            for B in solids:
                if contains_vector(B, F16.one):
                    continue
                self.assertIsNone(find_linear_certificate(F16, A, B))
                self.assertIsNone(criterion_verdict(F16, A, B))

    def test_seeded_pairs_in_f64(self) -> None:
        rng = random.Random(64)
        for _ in range(300):
            n = rng.randint(1, 3)
            A = random_subspace(rng, F64, n)
            B = random_subspace(rng, F64, n, avoid_one=True)
            cert = find_linear_certificate(F64, A, B)
            self.assertEqual(cert is None, criterion_verdict(F64, A, B) is None, (A.basis, B.basis))
            if cert is not None:
                self.assert_certificate_laws(F64, A, B, cert)

    def test_existence_matches_ground_truth(self) -> None:
        for L in (F16, F64):
            for n in range(n0_linear(L), L.m):
                if exists_unmatchable_linear(L, n):
                    A, B, cert = construct_unmatchable_linear(L, n)
                    self.assertFalse(contains_vector(B, L.one))
                    self.assert_certificate_laws(L, A, B, cert)
                    self.assertIsNotNone(criterion_verdict(L, A, B), (L.m, n))
                    continue
                subspaces = subspaces_of_dim(L, n)
                for A in subspaces:
                    for B in subspaces:
                        if not contains_vector(B, L.one):
                            self.assertIsNone(find_linear_certificate(L, A, B), (L.m, n, A.basis, B.basis))
