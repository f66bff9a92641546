import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzmill.constraints import (
    DependencyIndex,
    depends,
    enumerate_groups,
    sat_explicit,
    sat_implicit,
)
from fuzzmill.model import ApiGroup, UnknownApiError

from oracles import oracle_enumerate, oracle_rational, oracle_valid, random_small_spec


class TestDepends:
    def test_param_matches_return(self, kv_spec):
        # kv_close takes kv_t*, kv_open returns kv_t*
        index = DependencyIndex(kv_spec)
        assert depends("kv_close", {"kv_open"}, index)

    def test_return_matches_param(self, kv_spec):
        index = DependencyIndex(kv_spec)
        assert depends("kv_open", {"kv_close"}, index)

    def test_param_matches_param(self, kv_spec):
        # kv_put and kv_get both take kv_t* and const char*
        index = DependencyIndex(kv_spec)
        assert depends("kv_put", {"kv_get"}, index)

    def test_return_return_sharing_is_not_a_dependency(self, kv_spec):
        # kv_put and kv_iter_next both return int; that alone links nothing.
        index = DependencyIndex(kv_spec)
        assert not depends("kv_put", {"kv_iter_next"}, index) or any(
            pt in kv_spec.api("kv_iter_next").parameter_types
            for pt in kv_spec.api("kv_put").parameter_types
        )

    def test_int_return_only_pair_is_independent(self, kv_spec):
        # kv_sync (void ret, unsigned param) vs kv_put: nothing shared.
        index = DependencyIndex(kv_spec)
        assert not depends("kv_sync", {"kv_put"}, index)

    def test_void_links_nothing(self, kv_spec):
        index = DependencyIndex(kv_spec)
        # kv_close returns void; kv_iter_free returns void. No link through it.
        assert not depends("kv_sync", {"kv_close"}, index)

    def test_f_in_rest_is_an_error(self, kv_spec):
        index = DependencyIndex(kv_spec)
        with pytest.raises(ValueError):
            depends("kv_open", {"kv_open", "kv_close"}, index)

    def test_unknown_api_raises(self, kv_spec):
        index = DependencyIndex(kv_spec)
        with pytest.raises(UnknownApiError):
            depends("kv_ghost", {"kv_open"}, index)
        with pytest.raises(UnknownApiError):
            depends("kv_open", {"kv_ghost"}, index)

    def test_empty_rest_never_depends(self, kv_spec):
        index = DependencyIndex(kv_spec)
        assert not depends("kv_open", set(), index)


class TestSatExplicit:
    def test_connected_pair(self, kv_spec):
        index = DependencyIndex(kv_spec)
        assert sat_explicit(ApiGroup.of("kv_open", "kv_close"), index)

    def test_singleton_fails(self, kv_spec):
        index = DependencyIndex(kv_spec)
        assert not sat_explicit(ApiGroup.of("kv_open"), index)

    def test_isolated_member_fails_whole_group(self, kv_spec):
        index = DependencyIndex(kv_spec)
        assert not sat_explicit(ApiGroup.of("kv_open", "kv_close", "kv_sync"), index)

    def test_every_member_needs_a_link_not_just_one(self, kv_spec):
        # open+close+iter_next: iter_next's kv_iter* touches nothing here.
        index = DependencyIndex(kv_spec)
        assert not sat_explicit(ApiGroup.of("kv_open", "kv_close", "kv_iter_next"), index)
        assert sat_explicit(
            ApiGroup.of("kv_open", "kv_close", "kv_iter_new", "kv_iter_next"), index
        )

    def test_loose_pointer_match_relaxes_depth(self, kv_spec):
        strict = DependencyIndex(kv_spec)
        loose = DependencyIndex(kv_spec, loose_pointer_match=True)
        group = ApiGroup.of("kv_open", "kv_close")
        assert sat_explicit(group, strict) and sat_explicit(group, loose)


class TestSatImplicit:
    def test_imply_is_material(self, kv_spec):
        c = kv_spec.implicit
        # kv_put present without kv_open: violated.
        assert not sat_implicit(ApiGroup.of("kv_put", "kv_get"), c)
        # kv_put with kv_open: satisfied.
        assert sat_implicit(ApiGroup.of("kv_put", "kv_open"), c)
        # antecedent absent: vacuously satisfied.
        assert sat_implicit(ApiGroup.of("kv_get", "kv_open"), c)

    def test_imply_is_directional(self, kv_spec):
        # kv_open without kv_put is fine; the implication points one way.
        assert sat_implicit(ApiGroup.of("kv_open", "kv_close"), kv_spec.implicit)

    def test_conflict_is_symmetric(self, kv_spec):
        c = kv_spec.implicit
        both = ApiGroup.of("kv_del", "kv_iter_next", "kv_iter_new", "kv_open")
        assert not sat_implicit(both, c)
        assert sat_implicit(ApiGroup.of("kv_del", "kv_open"), c)
        assert sat_implicit(ApiGroup.of("kv_iter_next", "kv_iter_new", "kv_open"), c)

    def test_no_constraints_always_satisfied(self):
        assert sat_implicit(ApiGroup.of("anything"), ())


class TestEnumerate:
    def test_matches_oracle_on_kv(self, kv_spec):
        got = {g.members for g in enumerate_groups(kv_spec, size_range=(2, 5))}
        assert got == oracle_enumerate(kv_spec, (2, 5))

    def test_matches_oracle_on_200_random_specs(self):
        for trial in range(200):
            spec = random_small_spec(random.Random(trial))
            got = {g.members for g in enumerate_groups(spec, size_range=(2, 5), order_seed=trial)}
            want = oracle_enumerate(spec, (2, 5))
            assert got == want, f"trial {trial}: {len(got)} vs {len(want)} groups"

    def test_loose_pointer_match_agrees_with_oracle(self):
        for trial in range(40):
            spec = random_small_spec(random.Random(10_000 + trial))
            got = {
                g.members
                for g in enumerate_groups(
                    spec, size_range=(2, 4), order_seed=trial, loose_pointer_match=True
                )
            }
            assert got == oracle_enumerate(spec, (2, 4), loose_pointer_match=True)

    def test_no_duplicates(self, kv_spec):
        groups = list(enumerate_groups(kv_spec, size_range=(2, 5)))
        assert len(groups) == len({g.members for g in groups})

    def test_deterministic_for_fixed_seed(self, kv_spec):
        a = list(enumerate_groups(kv_spec, size_range=(2, 5), order_seed=7))
        b = list(enumerate_groups(kv_spec, size_range=(2, 5), order_seed=7))
        assert a == b

    def test_seed_changes_order_not_contents(self, kv_spec):
        a = list(enumerate_groups(kv_spec, size_range=(2, 5), order_seed=1))
        b = list(enumerate_groups(kv_spec, size_range=(2, 5), order_seed=2))
        assert a != b
        assert {g.members for g in a} == {g.members for g in b}

    def test_cap_is_a_prefix(self, kv_spec):
        full = list(enumerate_groups(kv_spec, size_range=(2, 5), order_seed=3))
        capped = list(enumerate_groups(kv_spec, size_range=(2, 5), order_seed=3, cap=4))
        assert capped == full[:4]

    def test_cap_larger_than_space_is_fine(self, kv_spec):
        full = list(enumerate_groups(kv_spec, size_range=(2, 5), order_seed=3))
        assert list(enumerate_groups(kv_spec, size_range=(2, 5), order_seed=3, cap=10_000)) == full

    def test_size_range_respected(self, kv_spec):
        for g in enumerate_groups(kv_spec, size_range=(3, 4)):
            assert 3 <= g.size <= 4

    def test_invalid_size_range_rejected(self, kv_spec):
        with pytest.raises(ValueError):
            list(enumerate_groups(kv_spec, size_range=(1, 5)))
        with pytest.raises(ValueError):
            list(enumerate_groups(kv_spec, size_range=(4, 3)))

    def test_invalid_cap_rejected(self, kv_spec):
        with pytest.raises(ValueError):
            list(enumerate_groups(kv_spec, size_range=(2, 5), cap=0))

    def test_checks_disabled_is_plain_subset_enumeration(self, kv_spec_no_constraints):
        n_apis = len(kv_spec_no_constraints.apis)
        count = sum(
            1
            for _ in enumerate_groups(
                kv_spec_no_constraints,
                size_range=(0, n_apis),
                check_explicit=False,
                check_implicit=False,
            )
        )
        assert count == 2**n_apis

    def test_implicit_only_disabled_keeps_validity(self, kv_spec):
        got = {
            g.members
            for g in enumerate_groups(kv_spec, size_range=(2, 5), check_implicit=False)
        }
        want = {
            m
            for m in oracle_enumerate(
                type(kv_spec)(
                    library_name=kv_spec.library_name, apis=kv_spec.apis, implicit=()
                ),
                (2, 5),
            )
        }
        assert got == want
        assert any(not oracle_rational(m, kv_spec.implicit) for m in got)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_every_emitted_group_is_valid_and_rational(self, trial):
        spec = random_small_spec(random.Random(trial), max_apis=8)
        for g in enumerate_groups(spec, size_range=(2, 4), order_seed=trial, cap=64):
            assert oracle_valid(g.members, spec)
            assert oracle_rational(g.members, spec.implicit)
