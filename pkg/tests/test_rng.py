import numpy as np
import pytest

from mirrorpdmm.rng import SplitMix64, Xoshiro256StarStar, make_generator


def test_splitmix64_reference_stream():
    mixer = SplitMix64(0)
    assert [mixer.next() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_xoshiro_reference_stream():
    gen = Xoshiro256StarStar(0)
    gen.s = [1, 2, 3, 4]
    assert [gen.next() for _ in range(3)] == [11520, 0, 1509978240]


def test_random_raw_matches_next():
    a, b = Xoshiro256StarStar(42), Xoshiro256StarStar(42)
    raw = a.random_raw(10)
    assert raw.dtype == np.uint64
    assert [int(v) for v in raw] == [b.next() for _ in range(10)]
    assert a.s == b.s


def test_seed_wraps_modulo_2_64():
    assert Xoshiro256StarStar(2**64 + 5).s == Xoshiro256StarStar(5).s


def test_uniform_range():
    u = Xoshiro256StarStar(7).uniform(10_000)
    assert u.min() >= 0.0
    assert u.max() < 1.0


def test_odd_normal_count_drops_last_sine():
    odd = Xoshiro256StarStar(3).standard_normal(5)
    even = Xoshiro256StarStar(3).standard_normal(6)
    np.testing.assert_array_equal(odd, even[:5])


def test_box_muller_pairs():
    gen = Xoshiro256StarStar(11)
    u1, u2 = Xoshiro256StarStar(11).uniform(2)
    z = gen.standard_normal(2)
    r = np.sqrt(-2.0 * np.log1p(-u1))
    np.testing.assert_allclose(
        z, [r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)], rtol=1e-14
    )


def test_stream_is_jumped_generator():
    jumped = Xoshiro256StarStar(9).jump()
    assert make_generator(9, stream=1).s == jumped.s
    assert make_generator(9).s == Xoshiro256StarStar(9).s
    assert make_generator(9, stream=1).s != make_generator(9).s


@pytest.mark.slow
def test_normal_moments():
    z = make_generator(1, stream=1).standard_normal(1_000_000)
    assert -0.01 < z.mean() < 0.01
    assert 0.99 < z.var() < 1.01
