"""Tests for pseudonyms and accountability-manager assignment."""

import numpy as np
import pytest
from scipy import stats

from coutile.exceptions import ConfigurationError, IdentityError
from coutile.models.identity import Pseudonym, RealId
from coutile.services.identity import (
    assign_accountability_managers,
    derive_pseudonym,
    prove_pseudonym,
)
from tests.helpers import make_pseudonyms

ALICE = RealId(id=b"A")
BOB = RealId(id=b"B")
NONCE_1 = b"nonce-1"
NONCE_2 = b"nonce-2"


class TestDerivePseudonym:
    def test_is_deterministic(self):
        assert derive_pseudonym(ALICE, NONCE_1) == derive_pseudonym(ALICE, NONCE_1)

    def test_fresh_nonce_changes_pseudonym(self):
        assert derive_pseudonym(ALICE, NONCE_1) != derive_pseudonym(ALICE, NONCE_2)

    def test_accepts_raw_bytes(self):
        assert derive_pseudonym(b"A", NONCE_1) == derive_pseudonym(ALICE, NONCE_1)

    def test_empty_nonce_rejected(self):
        with pytest.raises(IdentityError):
            derive_pseudonym(ALICE, b"")

    def test_short_form(self):
        p = derive_pseudonym(ALICE, NONCE_1)
        assert len(p.value) == 32
        assert p.short == p.value.hex()[:16]
        assert str(p) == p.short


class TestProvePseudonym:
    def test_matching_triple(self):
        assert prove_pseudonym(ALICE, NONCE_1, derive_pseudonym(ALICE, NONCE_1))

    def test_wrong_nonce(self):
        assert not prove_pseudonym(ALICE, NONCE_2, derive_pseudonym(ALICE, NONCE_1))

    def test_wrong_identity(self):
        assert not prove_pseudonym(BOB, NONCE_1, derive_pseudonym(ALICE, NONCE_1))

    def test_empty_nonce(self):
        assert not prove_pseudonym(ALICE, b"", derive_pseudonym(ALICE, NONCE_1))


class TestAccountabilityManagers:
    def test_no_managers(self):
        roster = make_pseudonyms(10)
        assert assign_accountability_managers(roster[0], roster, 0).managers == ()

    def test_is_deterministic(self):
        roster = make_pseudonyms(10)
        first = assign_accountability_managers(roster[3], roster, 3)
        assert first == assign_accountability_managers(roster[3], roster, 3)

    @pytest.mark.parametrize("subject", range(6))
    def test_managers_are_distinct_others(self, subject: int):
        roster = make_pseudonyms(6)
        assignment = assign_accountability_managers(roster[subject], roster, 5)
        assert assignment.subject == roster[subject]
        assert len(set(assignment.managers)) == 5
        assert roster[subject] not in assignment.managers

    @pytest.mark.parametrize("managers", [10, 11, -1])
    def test_too_many_managers(self, managers: int):
        roster = make_pseudonyms(10)
        with pytest.raises(ConfigurationError) as exc_info:
            assign_accountability_managers(roster[0], roster, managers)
        assert exc_info.value.field == "managers"

    def test_assignment_spreads_over_roster(self):
        roster = make_pseudonyms(50)
        chosen = {
            manager
            for p in roster
            for manager in assign_accountability_managers(p, roster, 3).managers
        }
        assert len(chosen) > 25

    def test_outsider_picks_each_member_about_m_over_n(self):
        roster = make_pseudonyms(100)
        subjects = [
            derive_pseudonym(RealId(id=f"outsider-{i}".encode()), b"am")
            for i in range(1000)
        ]
        counts = np.zeros(len(roster))
        position = {p: i for i, p in enumerate(roster)}
        for subject in subjects:
            for manager in assign_accountability_managers(subject, roster, 3).managers:
                counts[position[manager]] += 1
        expected = 1000 * 3 / 100
        sigma = np.sqrt(1000 * 0.03 * 0.97)
        assert abs(counts[0] - expected) <= 3 * sigma
        assert counts.sum() == 3000
        assert stats.chisquare(counts).pvalue > 0.001


class TestPseudonymDistribution:
    @pytest.fixture(name="pseudonyms", scope="class")
    def pseudonyms_fixture(self) -> list[Pseudonym]:
        return [
            derive_pseudonym(RealId(id=i.to_bytes(4, "big")), b"fixed-nonce")
            for i in range(100_000)
        ]

    def test_distinct_identities_give_distinct_pseudonyms(self, pseudonyms):
        assert len({p.value for p in pseudonyms}) == len(pseudonyms)

    def test_leading_byte_is_uniform(self, pseudonyms):
        counts = np.bincount([p.value[0] for p in pseudonyms], minlength=256)
        assert stats.chisquare(counts).pvalue > 0.001
