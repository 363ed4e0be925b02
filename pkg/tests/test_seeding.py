from hypothesis import given
from hypothesis import strategies as st

from betrun.seeding import MASK64, SplitMix64, cell_seed, derive_seed, mix64, stable_hash64

# first outputs of the reference SplitMix64 generator seeded with 0
SPLITMIX_ZERO = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_derive_seed_golden():
    assert derive_seed(0, 0) == 0xE220A8397B1DCDAF
    assert [derive_seed(0, i) for i in range(3)] == SPLITMIX_ZERO


def test_stream_matches_derive_seed():
    g = SplitMix64(12345)
    assert [g.next() for _ in range(5)] == [derive_seed(12345, i) for i in range(5)]


def test_below_range():
    g = SplitMix64(1)
    for n in (1, 2, 3, 7, 1000, 2**31):
        for _ in range(200):
            assert 0 <= g.below(n) < n


@given(st.integers(0, MASK64))
def test_mix64_is_64_bit(z):
    assert 0 <= mix64(z) <= MASK64


@given(st.integers(0, MASK64))
def test_derive_seed_distinct_indices(m):
    seeds = {derive_seed(m, i) for i in range(64)}
    assert len(seeds) == 64


def test_stable_hash_is_fixed():
    # frozen once; guards against accidental changes of the cell-seed scheme
    assert stable_hash64("inst", "restarts:1:100", 0) == 0xD82371B9493B78AD
    assert cell_seed(1, "inst", "restarts:1:100", 0) == 0x593A3EC5FA2C0EAB
    assert stable_hash64("a", "b", 1) != stable_hash64("a", "b", 2)
    assert cell_seed(1, "inst", "restarts:1:100", 0) != cell_seed(2, "inst", "restarts:1:100", 0)
