import itertools

import pytest
from hypothesis import given, settings, strategies as st

from qorseek.design_space import (
    ArrayInfo, DescriptorError, KernelDescriptor, LoopInfo, ParseError,
    SpaceOverflowError, ValidationError, effective_parallelism,
    enumerate_space, parse_kernel_descriptor, partition_choices,
    pipeline_choices, render_design, sample_config,
    serialize_kernel_descriptor, space_dimensions, space_size, unroll_choices,
    validate_config, validate_kernel,
)

MINIMAL = """
kernel m
loop i trip=8 add=1 mul=0 arrays=a
array a words=16 bits=32
"""

NESTED = """
kernel n
loop outer trip=4 add=0 mul=0
loop inner trip=8 parent=outer add=1 mul=1
"""


class TestParse:
    def test_minimal_descriptor(self):
        k = parse_kernel_descriptor(MINIMAL)
        assert k.name == "m"
        assert len(k.loops) == 1 and len(k.arrays) == 1
        assert k.loops[0].trip_count == 8
        assert k.arrays[0].num_words == 16

    def test_undeclared_array_rejected(self):
        bad = "kernel k\nloop i trip=4 arrays=ghost\n"
        with pytest.raises(ValidationError):
            parse_kernel_descriptor(bad)

    def test_nested_parent_assignment(self):
        k = parse_kernel_descriptor(NESTED)
        assert k.loop("inner").parent == "outer"
        assert k.innermost_loops() == (k.loop("inner"),)

    def test_syntax_error_carries_line_number(self):
        with pytest.raises(ParseError) as exc:
            parse_kernel_descriptor("kernel k\nbogus directive\n")
        assert exc.value.line_no == 2

    def test_missing_kernel_line(self):
        with pytest.raises(ParseError):
            parse_kernel_descriptor("loop i trip=4\n")

    def test_comments_and_blank_lines_ignored(self):
        text = "# header\n\nkernel c  # inline\nloop i trip=2\n"
        assert parse_kernel_descriptor(text).name == "c"

    def test_roundtrip_via_serializer(self, demo_kernels):
        for k in demo_kernels:
            again = parse_kernel_descriptor(serialize_kernel_descriptor(k))
            assert again == k

    def test_cyclic_parent_chain_rejected(self):
        k = KernelDescriptor(
            name="cyc",
            loops=(LoopInfo("a", 2, "b"), LoopInfo("b", 2, "a")),
            arrays=())
        with pytest.raises(ValidationError):
            validate_kernel(k)

    def test_bad_word_bits_rejected(self):
        k = KernelDescriptor(
            name="w", loops=(LoopInfo("i", 2),),
            arrays=(ArrayInfo("a", 4, 12),))
        with pytest.raises(ValidationError):
            validate_kernel(k)


class TestChoices:
    def test_unroll_choices_are_pow2_divisors_plus_trip(self):
        assert unroll_choices(8) == (1, 2, 4, 8)
        assert unroll_choices(12) == (1, 2, 4, 12)
        assert unroll_choices(1) == (1,)

    def test_pipeline_choices_ladder(self):
        assert pipeline_choices() == (
            (False, 1), (True, 1), (True, 2), (True, 4))

    def test_partition_choices_fold_full_width_to_complete(self):
        arr = ArrayInfo("a", 4, 32)
        kinds = [(p.partition_kind, p.partition_factor)
                 for p in partition_choices(arr)]
        assert kinds == [("none", 1), ("cyclic", 2), ("block", 2),
                         ("complete", 4)]


class TestEnumerate:
    def test_count_matches_independent_product(self, array_kernel):
        # Oracle: recount the space as the product of per-dimension choice
        # list lengths computed here, independently of space_size.
        dims = space_dimensions(array_kernel)
        expected = 1
        for _, _, choices in dims:
            expected *= len(choices)
        configs = enumerate_space(array_kernel)
        assert len(configs) == expected == space_size(array_kernel)
        assert len({c.key() for c in configs}) == len(configs)

    def test_trip_one_collapses_unroll(self):
        k = KernelDescriptor(
            name="t1", loops=(LoopInfo("i", 1),),
            arrays=(ArrayInfo("a", 2, 8),))
        # unroll has a single choice; space = pipeline ladder x partitions
        assert space_size(k) == 4 * len(partition_choices(k.arrays[0]))

    def test_ordering_stable(self, array_kernel):
        a = [c.key() for c in enumerate_space(array_kernel)]
        b = [c.key() for c in enumerate_space(array_kernel)]
        assert a == b

    def test_overflow_error(self):
        k = KernelDescriptor(
            name="big",
            loops=tuple(LoopInfo(f"l{i}", 1024) for i in range(6)),
            arrays=())
        with pytest.raises(SpaceOverflowError):
            enumerate_space(k, cap=10 ** 6)

    def test_every_config_validates(self, array_kernel):
        for cfg in enumerate_space(array_kernel):
            validate_config(array_kernel, cfg)


class TestSample:
    def test_seed_determinism(self, array_kernel):
        assert sample_config(array_kernel, 7) == sample_config(array_kernel, 7)

    def test_sampled_configs_validate(self, array_kernel):
        for seed in range(50):
            validate_config(array_kernel, sample_config(array_kernel, seed))

    def test_pipeline_flag_roughly_uniform(self, tiny_kernel):
        # pipeline ladder has 4 choices, 3 of which pipeline: expect 0.75.
        n = 10000
        on = sum(
            sample_config(tiny_kernel, s).loop_pragma("i").pipeline
            for s in range(n))
        assert 0.72 <= on / n <= 0.78


class TestRender:
    def test_default_config_has_no_pragmas(self, array_kernel):
        cfg = enumerate_space(array_kernel)[0]
        assert all(lp.unroll_factor == 1 and not lp.pipeline
                   for _, lp in cfg.loops)
        d = render_design(array_kernel, cfg)
        assert "#pragma HLS" not in d.rendered_code

    def test_unroll_pragma_text(self, array_kernel):
        for cfg in enumerate_space(array_kernel):
            if cfg.loop_pragma("i").unroll_factor == 4:
                text = render_design(array_kernel, cfg).rendered_code
                assert "#pragma HLS UNROLL factor=4" in text
                break
        else:
            pytest.fail("no unroll=4 config found")

    def test_one_pragma_line_per_nondefault_choice(self, array_kernel):
        for cfg in enumerate_space(array_kernel):
            expected = 0
            for _, lp in cfg.loops:
                expected += int(lp.unroll_factor > 1) + int(lp.pipeline)
            for _, ap in cfg.arrays:
                expected += int(ap.partition_kind != "none")
            text = render_design(array_kernel, cfg).rendered_code
            assert text.count("#pragma HLS") == expected

    def test_render_deterministic(self, array_kernel):
        cfg = sample_config(array_kernel, 3)
        a = render_design(array_kernel, cfg).rendered_code
        b = render_design(array_kernel, cfg).rendered_code
        assert a == b

    def test_render_injective_over_space(self, array_kernel):
        texts = [render_design(array_kernel, c).rendered_code
                 for c in enumerate_space(array_kernel)]
        assert len(set(texts)) == len(texts)

    def test_dynamic_alloc_renders_malloc(self, array_kernel):
        cfg = enumerate_space(array_kernel)[0]
        d = render_design(array_kernel, cfg, dynamic_alloc=True)
        assert "malloc" in d.rendered_code
        assert d.dynamic_alloc_flag

    def test_illegal_config_rejected(self, array_kernel, tiny_kernel):
        cfg = enumerate_space(tiny_kernel)[0]
        with pytest.raises(ValidationError):
            render_design(array_kernel, cfg)


class TestEffectiveParallelism:
    def test_port_cap_limits_unroll(self, array_kernel):
        for cfg in enumerate_space(array_kernel):
            lp = cfg.loop_pragma("i")
            ap = cfg.array_pragma("a")
            e = effective_parallelism(array_kernel, cfg, "i")
            assert e == max(1, min(lp.unroll_factor, 2 * ap.partition_factor))

    def test_no_arrays_means_unroll(self, tiny_kernel):
        for cfg in enumerate_space(tiny_kernel):
            assert effective_parallelism(tiny_kernel, cfg, "i") \
                == cfg.loop_pragma("i").unroll_factor


@settings(max_examples=40, deadline=None)
@given(trip=st.integers(min_value=1, max_value=512))
def test_unroll_choices_property(trip):
    choices = unroll_choices(trip)
    assert choices[0] == 1
    assert all(trip % c == 0 for c in choices)
    assert all(b > a for a, b in zip(choices, choices[1:]))
    if trip > 1:
        assert choices[-1] == trip
