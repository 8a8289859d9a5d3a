"""Deterministic seed derivation shared by the synthetic generator, the
splitter, and the missingness mechanisms.

Per-sample mask seeds follow the documented rule

    sample_seed = base_seed XOR splitmix64(sample_index)

so masks are reproducible across runs and implementations. The generator and
splitter mix in distinct tags so their random streams never coincide with the
mask streams even when every stage shares one configured seed.
"""

MASK64 = (1 << 64) - 1

# stream-separation tags (arbitrary odd constants, fixed forever)
SYNTH_TAG = 0xA5F3_9D21_7B44_C06E
SPLIT_TAG = 0x1C69_B3F7_4A0D_58E5


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixing function (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def sample_seed(base_seed: int, index: int) -> int:
    """Per-sample mask seed: ``base_seed XOR splitmix64(index)``."""
    return (base_seed ^ splitmix64(index)) & MASK64


def tagged_seed(base_seed: int, tag: int, index: int = 0) -> int:
    """Seed for an auxiliary stream (synthetic generation, splitting)."""
    return (splitmix64(base_seed ^ tag) ^ splitmix64(index)) & MASK64
