"""
Seeded xorshift64* generator.

Random windows and random bases must be reproducible in any implementation,
so the generator is fully specified here rather than borrowed from numpy:

    state_0   = splitmix64(seed)                      (0 is replaced by GOLDEN)
    x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27        (all mod 2**64)
    output    = (x * 0x2545F4914F6CDD1D) mod 2**64
    uniform   = (output >> 11) * 2**-53               in [0, 1)

splitmix64(z): z += GOLDEN; z = (z ^ z >> 30) * 0xBF58476D1CE4E5B9;
z = (z ^ z >> 27) * 0x94D049BB133111EB; return z ^ z >> 31.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MULTIPLIER = 0x2545F4914F6CDD1D


def splitmix64(seed):
    z = (seed + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    """Deterministic xorshift64* stream."""

    def __init__(self, seed=0):
        self.state = splitmix64(int(seed) & MASK64) or GOLDEN

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * MULTIPLIER) & MASK64

    def uniform(self, size):
        """`size` floats in [0, 1)."""
        return np.array([(self.next_u64() >> 11) * 2.0 ** -53 for _ in range(size)])

    def symmetric(self, size):
        """`size` floats in [-1, 1)."""
        return 2.0 * self.uniform(size) - 1.0

    def complex_symmetric(self, size):
        """Real parts first, then imaginary parts."""
        real = self.symmetric(size)
        imag = self.symmetric(size)
        return real + 1j * imag

    def integers(self, low, high, size):
        """`size` integers in [low, high]."""
        span = high - low + 1
        return np.array([low + self.next_u64() % span for _ in range(size)], dtype=np.int64)
