import math

import numpy as np

from preopt.rng import SplitMix64, derive_seed, mix64


def test_stream_is_deterministic():
    a = SplitMix64(42)
    b = SplitMix64(42)
    assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]


def test_frozen_reference_values():
    # frozen draws pin the stream across platforms and versions
    g = SplitMix64(1)
    assert [g.next_u64() for _ in range(3)] == [
        10451216379200822465,
        13757245211066428519,
        17911839290282890590,
    ]
    assert mix64(0) == 0


def test_seeds_differ():
    assert SplitMix64(0).next_u64() != SplitMix64(1).next_u64()


def test_uniform_in_half_open_interval():
    g = SplitMix64(7)
    draws = [g.uniform() for _ in range(1000)]
    assert all(0.0 < u <= 1.0 for u in draws)


def test_normal_moments():
    g = SplitMix64(3)
    draws = np.array([g.normal() for _ in range(20000)])
    assert abs(draws.mean()) < 0.05
    assert abs(draws.std() - 1.0) < 0.05
    shifted = SplitMix64(3)
    scaled = np.array([shifted.normal(2.0, 0.5) for _ in range(20000)])
    assert abs(scaled.mean() - 2.0) < 0.05
    assert abs(scaled.std() - 0.5) < 0.05


def test_randrange_bounds_and_coverage():
    g = SplitMix64(11)
    draws = [g.randrange(7) for _ in range(2000)]
    assert set(draws) == set(range(7))


def test_derive_seed_is_stable_and_injective_enough():
    assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
    seen = {derive_seed(5, t, k) for t in range(20) for k in range(20)}
    assert len(seen) == 400


def test_normal_consumes_fixed_words():
    g = SplitMix64(9)
    g.normal()
    h = SplitMix64(9)
    h.next_u64()
    h.next_u64()
    assert g.next_u64() == h.next_u64()


def test_normal_finite():
    g = SplitMix64(13)
    assert all(math.isfinite(g.normal()) for _ in range(1000))
