"""Tests for identity utilities.

1. config_hash and run_id are deterministic
2. worker count never enters run identity
3. substream is a pure function of (seed, tag, index)
"""

import numpy as np

from stickyflows.core.identity import (
    block_sizes,
    compute_config_hash,
    compute_run_id,
    sha256_file,
    substream,
    tag_key,
)


class TestConfigHash:
    """Tests for config_hash computation."""

    def test_deterministic_same_inputs(self):
        params = {"nmax": 5, "a": 1.0, "b": 1.0}
        assert compute_config_hash("theta", params) == compute_config_hash("theta", params)

    def test_key_order_irrelevant(self):
        first = compute_config_hash("theta", {"nmax": 5, "a": 1.0})
        second = compute_config_hash("theta", {"a": 1.0, "nmax": 5})
        assert first == second

    def test_subcommand_changes_hash(self):
        params = {"n": 3}
        assert compute_config_hash("cells", params) != compute_config_hash("theta", params)

    def test_hash_format(self):
        value = compute_config_hash("theta", {})
        assert len(value) == 64
        assert all(c in "0123456789abcdef" for c in value)


class TestRunId:
    """Tests for run_id computation."""

    def test_deterministic(self):
        assert compute_run_id("theta", "abc", 7) == compute_run_id("theta", "abc", 7)

    def test_seed_changes_id(self):
        assert compute_run_id("theta", "abc", 7) != compute_run_id("theta", "abc", 8)

    def test_config_changes_id(self):
        assert compute_run_id("theta", "abc", 7) != compute_run_id("theta", "abd", 7)


class TestSubstream:
    """Tests for per-module random streams."""

    def test_same_arguments_same_stream(self):
        first = substream(42, "marttest", 3).standard_normal(8)
        second = substream(42, "marttest", 3).standard_normal(8)
        np.testing.assert_array_equal(first, second)

    def test_index_separates_streams(self):
        first = substream(42, "marttest", 0).standard_normal(8)
        second = substream(42, "marttest", 1).standard_normal(8)
        assert not np.array_equal(first, second)

    def test_tag_separates_streams(self):
        first = substream(42, "exits", 0).standard_normal(8)
        second = substream(42, "sticky", 0).standard_normal(8)
        assert not np.array_equal(first, second)

    def test_tag_key_is_stable_32_bit(self):
        assert tag_key("theta") == tag_key("theta")
        assert 0 <= tag_key("theta") < 2**32


class TestBlockSizes:
    """Tests for replica block splitting."""

    def test_exact_multiple(self):
        assert block_sizes(64, 32) == [32, 32]

    def test_short_last_block(self):
        assert block_sizes(70, 32) == [32, 32, 6]

    def test_empty(self):
        assert block_sizes(0, 32) == []


class TestSha256File:
    """Tests for streaming file hash."""

    def test_matches_known_digest(self, tmp_path):
        path = tmp_path / "empty.bin"
        path.write_bytes(b"")
        expected = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        assert sha256_file(path) == expected
