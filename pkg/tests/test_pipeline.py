import json

import pytest

from config import PipelineConfig
from core_groups import alternating_group, cyclic_group, dihedral, element_order
from exceptions import PreconditionError, StageFailure
from group_encodings import alt_encode
from pipeline import (
    PrimeSchedule, base_chain, build_schedule, dihedral_stage, hall_recovery, key_proposition, ore_marking,
    schedule_from_config, step1_involution_lift, theorem1_assemble,
)
from utils import mian_chowla
from wreath import hall_commutator_table, wreath_order


class TestSchedule:
    def test_valid(self):
        PrimeSchedule((2, 4), ((5, 31),)).validate(2)

    @pytest.mark.parametrize("schedule", [
        PrimeSchedule((2, 4), ((2, 31),)),
        PrimeSchedule((2, 4), ((5, 33),)),
        PrimeSchedule((2, 4), ((5, 31), (7, 29))),
        PrimeSchedule((1, 2, 3), ((5, 31),)),
        PrimeSchedule((1, 2, 4, 8, 13, 21), ((22, 37),)),
    ], ids=["exponent-below-span", "not-prime", "decreasing", "not-sidon", "not-sidon-mod-p"])
    def test_invalid(self, schedule):
        with pytest.raises(PreconditionError):
            schedule.validate(len(schedule.sidon))

    def test_length_mismatch(self):
        with pytest.raises(PreconditionError):
            PrimeSchedule((2, 4), ((5, 31),)).validate(3)

    def test_default_schedule(self):
        schedule = build_schedule(2, 3)
        assert schedule.sidon == (1, 2)
        assert schedule.pairs == ((2, 5), (2, 7), (2, 11))

    def test_literal_schedule(self):
        schedule = build_schedule(3, 1, literal=True)
        assert schedule.sidon == (2, 4, 8)
        assert schedule.pairs == ((7, 11),)

    def test_primes_strictly_increase(self):
        primes = build_schedule(6, 5).primes
        assert primes == sorted(set(primes))

    def test_t_equals_u_cubed(self):
        assert PrimeSchedule((2, 4), ((5, 31),)).admits_t_equals_u_cubed()
        assert not PrimeSchedule((1, 2, 4), ((5, 31),)).admits_t_equals_u_cubed()

    def test_from_config(self):
        config = PipelineConfig(prefix_n=2, sidon=(2, 4), primes=((5, 31),))
        with pytest.raises(PreconditionError):
            schedule_from_config(config, 2)
        config = PipelineConfig(prefix_n=1, sidon=(2, 4), primes=((5, 31),))
        assert schedule_from_config(config, 2).pairs == ((5, 31),)


class TestInvolutionLift:
    def test_cyclic_stages(self):
        lift = step1_involution_lift([cyclic_group(4), cyclic_group(4)])
        assert lift.positions == (0,)
        assert lift.iterations == 1
        assert lift.against == "consecutive"
        for stage in lift.stages:
            assert stage.rank == 2
            assert [element_order(s).value for s in stage.marking] == [2, 2]
            assert stage.order().value == 8
        assert lift.radii[0].at_least

    def test_against_finite_limit(self):
        lift = step1_involution_lift([cyclic_group(6)], limit=cyclic_group(6))
        assert lift.against == "limit"
        assert len(lift.radii) == 1

    def test_already_involutions(self):
        lift = step1_involution_lift([dihedral(8), dihedral(10)])
        assert lift.iterations == 0
        assert lift.stages[0] is not None

    def test_infinite_generator(self, z_infinite):
        with pytest.raises(StageFailure):
            step1_involution_lift([z_infinite])

    def test_empty(self):
        with pytest.raises(PreconditionError):
            step1_involution_lift([])


class TestKeyProposition:
    def test_sym3_stage(self, sym3):
        stage = key_proposition([sym3], PrimeSchedule((2, 4), ((5, 31),)), rmax=2)[0]
        assert stage.same_group
        assert stage.t_is_power_of_u
        assert stage.commutators_exact
        assert stage.limit_order == 6
        assert stage.radius_t.value == 2
        assert stage.radius_t.at_least
        assert stage.order_u <= wreath_order(6, 31)

    def test_json(self, sym3):
        stage = key_proposition([sym3], PrimeSchedule((2, 4), ((5, 31),)), rmax=1)[0]
        data = stage.to_json()
        assert data["p"] == 31
        assert data["p_prime"] == 5
        assert data["same_group"]

    def test_against_infinite_dihedral_limit(self, d_infinite):
        stage = key_proposition([dihedral(6)], PrimeSchedule((2, 4), ((5, 31),)), limit=d_infinite, rmax=2)[0]
        assert stage.limit_order == 2
        assert stage.radius_t.value == 2
        assert stage.radius_t.at_least
        assert stage.radius_u.value == 2

    def test_limit_rank_mismatch(self, sym3, z_infinite):
        with pytest.raises(PreconditionError):
            key_proposition([sym3], PrimeSchedule((2, 4), ((5, 31),)), limit=z_infinite)

    def test_schedule_too_short(self, sym3):
        with pytest.raises(PreconditionError):
            key_proposition([sym3, sym3], PrimeSchedule((2, 4), ((5, 31),)))

    def test_empty(self):
        assert key_proposition([], PrimeSchedule((), ())) == []


class TestEncodedStages:
    def test_base_chain(self):
        assert [g.order().value for g in base_chain(3)] == [8, 12, 16]

    def test_ore_marking(self):
        enlarged, witnesses = ore_marking(alt_encode(dihedral(4)))
        assert enlarged.rank == 15
        assert enlarged.family == ("alternating", 8)
        assert all(w.found for w in witnesses)

    def test_hall_recovery(self):
        enlarged, _ = ore_marking(alt_encode(dihedral(4)))
        table = hall_commutator_table(enlarged, mian_chowla(15))
        assert hall_recovery(table, 5)

    def test_dihedral_stage_rejects_overflow(self):
        encoded, _ = ore_marking(alternating_group(5))
        with pytest.raises(PreconditionError):
            dihedral_stage(encoded, 37, (1, 2, 4, 8, 13, 21))

    def test_dihedral_stage_even_prime(self):
        encoded, _ = ore_marking(alternating_group(5))
        with pytest.raises(PreconditionError):
            dihedral_stage(encoded, 2, (1, 2, 4, 8, 13, 21))

    def test_dihedral_stage_uncertified(self):
        encoded, _ = ore_marking(alternating_group(5))
        stage = dihedral_stage(encoded, 41, (1, 2, 4, 8, 13, 21), certify=False)
        assert stage.rank == 3
        assert stage.finite

    @pytest.mark.slow
    def test_dihedral_stage_generates(self):
        encoded, _ = ore_marking(alternating_group(5))
        stage = dihedral_stage(encoded, 41, (1, 2, 4, 8, 13, 21))
        assert stage.rank == 3
        assert stage.ambient_order == 60 ** 82 * 82
        assert stage.generates_ambient()


@pytest.mark.slow
def test_single_stage_assembly():
    report = theorem1_assemble(PipelineConfig(prefix_n=1))
    assert report.completed == 1
    assert report.full_wreath == [True]
    assert report.hall_recovered == [True]
    assert report.dense
    assert report.order_lambda1 == report.order_k
    data = json.loads(report.dumps())
    assert data["l_sequence"] == [8]
    assert len(data["stages"]) == 1
    assert data["limit"] == report.limit
    assert report.stages[0].radius_t.at_least


@pytest.mark.slow
def test_two_stage_assembly():
    report = theorem1_assemble(PipelineConfig(prefix_n=2))
    assert report.completed == 2
    assert report.l_sequence == [8, 12]
    assert len(set(report.p_sequence)) == 2
    assert all(stage.t_is_power_of_u for stage in report.stages)
    assert all(stage.same_group for stage in report.stages)
    assert report.full_wreath == [True, True]
    assert report.dense
    assert report.limit.endswith("[ξ, η, ζ]")
    assert report.stages[-1].radius_u.at_least
