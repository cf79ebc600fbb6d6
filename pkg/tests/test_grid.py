import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from fillscale import (
    AlignmentError,
    CapacityError,
    ConfigError,
    EMPTY_SCHEME,
    FillingScheme,
    SchemeError,
    ShapeMismatchError,
    TokenGrid,
    apply_filling,
    complete_grid,
    load_grid,
    new_grid,
    random_scheme,
    save_grid,
    segment_blocks,
    stream,
)
from fillscale.grid import GRID_RECORD_HEADER


def grid_with_prefix(width, height, vocab, prefix):
    tokens = np.full(width * height, vocab, dtype=np.int32)
    tokens[: len(prefix)] = prefix
    return TokenGrid(width, height, vocab, tokens, len(prefix))


class TestTokenGrid:
    def test_new_grid_is_all_sentinel(self):
        g = new_grid(4, 3, 7)
        assert g.frontier == 0 and not g.is_complete
        assert np.all(g.tokens == 7)

    def test_frontier_out_of_range_rejected(self):
        tokens = np.zeros(12, dtype=np.int32)
        with pytest.raises(CapacityError):
            TokenGrid(4, 3, 7, tokens, 13)

    def test_generated_token_out_of_vocab_rejected(self):
        with pytest.raises(ConfigError):
            grid_with_prefix(4, 3, 7, [0, 7])

    def test_ungenerated_cells_must_hold_sentinel(self):
        tokens = np.zeros(12, dtype=np.int32)  # past-frontier zeros, not sentinel
        with pytest.raises(ConfigError):
            TokenGrid(4, 3, 7, tokens, 6)

    def test_tokens_are_immutable_and_copied(self):
        src = np.full(12, 7, dtype=np.int32)
        g = TokenGrid(4, 3, 7, src, 0)
        src[0] = 3
        assert g.tokens[0] == 7
        with pytest.raises(ValueError):
            g.tokens[0] = 1

    def test_with_appended_advances_frontier(self):
        g = new_grid(4, 2, 5).with_appended([1, 2, 3, 4])
        assert g.frontier == 4
        assert list(g.tokens[:4]) == [1, 2, 3, 4]
        with pytest.raises(CapacityError):
            g.with_appended(np.zeros(5, dtype=np.int32))

    def test_generated_rows_counts_full_rows_only(self):
        g = grid_with_prefix(4, 3, 7, [0, 1, 2, 3, 4, 5])
        assert g.generated_rows == 1


class TestSegmentBlocks:
    def test_large_grid_partition(self):
        part = segment_blocks(96, 12, 576)
        assert (part.generated_blocks, part.total_blocks) == (8, 48)

    def test_fully_generated(self):
        part = segment_blocks(576, 12, 576)
        assert (part.generated_blocks, part.total_blocks) == (48, 48)

    def test_misaligned_frontier_rejected(self):
        with pytest.raises(AlignmentError):
            segment_blocks(90, 12, 576)

    def test_block_size_must_divide_total(self):
        with pytest.raises(AlignmentError):
            segment_blocks(10, 5, 12)

    def test_nonpositive_block_size_rejected(self):
        with pytest.raises(ConfigError):
            segment_blocks(0, 0, 12)


class TestRandomScheme:
    def test_single_source_block(self):
        scheme = random_scheme(1, 4, stream(0, "t"))
        assert list(scheme.assignments) == [0, 0, 0]

    def test_nothing_to_fill_gives_empty_scheme(self):
        assert len(random_scheme(4, 4, stream(0, "t"))) == 0

    def test_no_generated_blocks_is_an_error(self):
        with pytest.raises(SchemeError):
            random_scheme(0, 4, stream(0, "t"))

    def test_deterministic_given_stream(self):
        a = random_scheme(5, 9, stream(3, "x"))
        b = random_scheme(5, 9, stream(3, "x"))
        assert np.array_equal(a.assignments, b.assignments)

    def test_per_slot_sources_uniform(self):
        """Frequency counts per slot stay inside the chi-square 99% bound."""
        m, total, draws = 4, 8, 100_000
        rng = stream(7, "uniformity")
        counts = np.zeros((total - m, m), dtype=np.int64)
        for _ in range(draws):
            scheme = random_scheme(m, total, rng)
            for slot, src in enumerate(scheme.assignments):
                counts[slot, src] += 1
        crit = stats.chi2.ppf(0.99, df=m - 1)
        expected = draws / m
        for slot in range(total - m):
            chi2 = float(((counts[slot] - expected) ** 2 / expected).sum())
            assert chi2 < crit, f"slot {slot}: chi2 {chi2:.2f} >= {crit:.2f}"

    def test_negative_source_rejected_by_scheme_type(self):
        with pytest.raises(SchemeError):
            FillingScheme(np.array([-1]))


class TestApplyFilling:
    def test_direct_copy_k1(self):
        g = grid_with_prefix(2, 2, 10, [5, 7])
        out = apply_filling(g, FillingScheme(np.array([0, 1])), 1)
        assert list(out.tokens) == [5, 7, 5, 7]
        assert out.is_complete

    def test_complete_grid_with_empty_scheme_is_identity(self):
        g = complete_grid(2, 2, 10, [1, 2, 3, 4])
        out = apply_filling(g, EMPTY_SCHEME, 2)
        assert np.array_equal(out.tokens, g.tokens)

    def test_block_copy_k2(self):
        g = grid_with_prefix(4, 2, 10, [1, 2, 3, 4])
        out = apply_filling(g, FillingScheme(np.array([1, 0])), 2)
        assert list(out.tokens) == [1, 2, 3, 4, 3, 4, 1, 2]

    def test_input_grid_unmodified(self):
        g = grid_with_prefix(2, 2, 10, [5, 7])
        apply_filling(g, FillingScheme(np.array([0, 1])), 1)
        assert g.frontier == 2 and g.tokens[2] == 10

    def test_misaligned_frontier_rejected(self):
        g = grid_with_prefix(2, 2, 10, [5])
        with pytest.raises(AlignmentError):
            apply_filling(g, FillingScheme(np.array([0, 0, 0])), 2)

    def test_dangling_source_rejected(self):
        g = grid_with_prefix(2, 2, 10, [5, 7])
        with pytest.raises(SchemeError):
            apply_filling(g, FillingScheme(np.array([0, 2])), 1)

    def test_wrong_scheme_length_rejected(self):
        g = grid_with_prefix(2, 2, 10, [5, 7])
        with pytest.raises(SchemeError):
            apply_filling(g, FillingScheme(np.array([0])), 1)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_prefix_preserved_and_output_complete(self, seed):
        rng = stream(seed, "prop")
        width, height, vocab, k = 4, 4, 6, 2
        frontier = int(rng.integers(1, width * height // k)) * k
        prefix = rng.integers(0, vocab, size=frontier)
        g = grid_with_prefix(width, height, vocab, prefix)
        part = segment_blocks(frontier, k, g.total)
        scheme = random_scheme(part.generated_blocks, part.total_blocks, rng)
        out = apply_filling(g, scheme, k)
        assert out.is_complete
        assert np.array_equal(out.tokens[:frontier], g.tokens[:frontier])
        # every filled block is a verbatim copy of its named source
        for j, src in enumerate(scheme.assignments):
            dst = (part.generated_blocks + j) * k
            assert np.array_equal(out.tokens[dst: dst + k],
                                  g.tokens[src * k: src * k + k])
        assert segment_blocks(out.frontier, k, out.total).generated_blocks == \
            part.total_blocks


class TestSchemeDigest:
    def test_order_sensitive(self):
        a = FillingScheme(np.array([0, 1]))
        b = FillingScheme(np.array([1, 0]))
        assert a.digest() != b.digest()
        assert a.digest() == FillingScheme(np.array([0, 1])).digest()


class TestGridRecord:
    def test_round_trip_partial(self, tmp_path):
        g = grid_with_prefix(4, 3, 9, [1, 2, 3, 4, 5, 6, 7, 8])
        path = tmp_path / "g.grid"
        save_grid(path, g)
        back = load_grid(path)
        assert (back.width, back.height, back.vocab_size, back.frontier) == \
            (4, 3, 9, 8)
        assert np.array_equal(back.tokens, g.tokens)

    def test_record_header_line(self, tmp_path):
        path = tmp_path / "g.grid"
        save_grid(path, new_grid(2, 2, 3))
        assert path.read_text().splitlines()[0] == GRID_RECORD_HEADER

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "g.grid"
        path.write_text("something-else\n1 1 2 0\n")
        with pytest.raises(ConfigError):
            load_grid(path)

    def test_token_count_mismatch_rejected(self, tmp_path):
        path = tmp_path / "g.grid"
        path.write_text(GRID_RECORD_HEADER + "\n2 2 3 4\n0 1\n")
        with pytest.raises(ConfigError):
            load_grid(path)
