import random

import pytest

from epay.numcrypt import ChannelCorrupt, Rc5Params, rc5_block, rc5_cbc

# RC5-32/12/16 single-block examples from Rivest's RC5 paper; each
# plaintext is the previous example's ciphertext.
RIVEST_VECTORS = [
    ("00000000000000000000000000000000", "0000000000000000", "21a5dbee154b8f6d"),
    ("915f4619be41b2516355a50110a9ce91", "21a5dbee154b8f6d", "f7c013ac5b2b8952"),
    ("783348e75aeb0f2fd7b169bb8dc16787", "f7c013ac5b2b8952", "2f42b3b70369fc92"),
    ("dc49db1375a5584f6485b413b5f12baf", "2f42b3b70369fc92", "65c178b284d197cc"),
    ("5269f149d41ba0152497574d7f153125", "65c178b284d197cc", "eb44e415da319824"),
]

# RC5-CBC rows from the RFC 2040 test-vector table: (rounds, key, iv,
# plaintext, ciphertext).  Our CBC always pads, so the table value is the
# ciphertext prefix before the final pad block.
RFC2040_CBC_VECTORS = [
    (0, "00", "0000000000000000", "0000000000000000", "7a7bba4d79111d1e"),
    (0, "00", "0000000000000000", "ffffffffffffffff", "797bba4d78111d1e"),
    (0, "00", "0000000000000001", "0000000000000000", "7a7bba4d79111d1f"),
    (0, "00", "0000000000000000", "0000000000000001", "7a7bba4d79111d1f"),
    (2, "00", "0000000000000000", "0000000000000000", "dca2694bf40e0788"),
    (8, "00", "0000000000000000", "0000000000000000", "dcfe098577eca5ff"),
    (8, "00", "0102030405060708", "1020304050607080", "9646fb77638f9ca8"),
    (12, "00", "0102030405060708", "1020304050607080", "b2b3209db6594da4"),
    (16, "00", "0102030405060708", "1020304050607080", "545f7f32a5fc3836"),
    (8, "01020304", "0000000000000000", "ffffffffffffffff", "8285e7c1b5bc7402"),
]


class TestPublishedVectors:
    @pytest.mark.parametrize("key,pt,ct", RIVEST_VECTORS)
    def test_rivest_block_vectors(self, key, pt, ct):
        params = Rc5Params(key=bytes.fromhex(key))
        assert rc5_block("encrypt", params, bytes.fromhex(pt)).hex() == ct
        assert rc5_block("decrypt", params, bytes.fromhex(ct)).hex() == pt

    @pytest.mark.parametrize("rounds,key,iv,pt,ct", RFC2040_CBC_VECTORS)
    def test_rfc2040_cbc_vectors(self, rounds, key, iv, pt, ct):
        params = Rc5Params(key=bytes.fromhex(key), rounds=rounds, iv=bytes.fromhex(iv))
        out = rc5_cbc("encrypt", params, bytes.fromhex(pt))
        assert out[: len(bytes.fromhex(ct))].hex() == ct
        assert rc5_cbc("decrypt", params, out) == bytes.fromhex(pt)


class TestBlock:
    def test_round_trip_random_keys(self):
        rng = random.Random(5)
        for _ in range(10_000):
            params = Rc5Params(key=rng.randbytes(rng.randrange(0, 20)), rounds=rng.choice((0, 1, 8, 12)))
            block = rng.randbytes(8)
            assert rc5_block("decrypt", params, rc5_block("encrypt", params, block)) == block

    def test_zero_rounds_round_trips(self):
        params = Rc5Params(key=b"abc", rounds=0)
        block = b"12345678"
        assert rc5_block("decrypt", params, rc5_block("encrypt", params, block)) == block

    def test_wrong_block_length(self):
        with pytest.raises(ValueError):
            rc5_block("encrypt", Rc5Params(key=b"k"), b"short")

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            rc5_block("sideways", Rc5Params(key=b"k"), b"8bytes!!")

    def test_key_zero_padding_within_word_is_neutral(self):
        # key bytes pack into 32-bit words; trailing zero bytes inside the
        # last word leave the schedule unchanged
        block = bytes(range(8))
        short = rc5_block("encrypt", Rc5Params(key=b"\x00"), block)
        padded = rc5_block("encrypt", Rc5Params(key=b"\x00\x00\x00"), block)
        assert short == padded


class TestCbc:
    def test_round_trip_lengths_0_to_64(self, rng):
        for length in range(65):
            params = Rc5Params(key=rng.randbytes(16), iv=rng.randbytes(8))
            payload = rng.randbytes(length)
            assert rc5_cbc("decrypt", params, rc5_cbc("encrypt", params, payload)) == payload

    def test_iv_dependence(self, rng):
        key = rng.randbytes(16)
        payload = b"the same payload"
        one = rc5_cbc("encrypt", Rc5Params(key=key, iv=b"\x00" * 8), payload)
        two = rc5_cbc("encrypt", Rc5Params(key=key, iv=b"\x01" + b"\x00" * 7), payload)
        assert one != two

    def test_bit_flip_propagation(self, rng):
        # flipping ciphertext bit j of block i garbles plaintext block i and
        # flips exactly bit j of plaintext block i+1
        params = Rc5Params(key=rng.randbytes(16), iv=rng.randbytes(8))
        payload = rng.randbytes(24)  # 3 blocks + pad block
        ct = bytearray(rc5_cbc("encrypt", params, payload))
        byte_index, bit = 3, 5  # inside block 0
        ct[byte_index] ^= 1 << bit
        # damage in block 0 leaves the pad block intact, so decrypt succeeds
        plain = rc5_cbc("decrypt", params, bytes(ct))
        # block 0 is garbled
        assert plain[:8] != payload[:8]
        # block 1 differs from the original in exactly the flipped bit
        diff = [a ^ b for a, b in zip(plain[8:16], payload[8:16])]
        assert diff[byte_index] == 1 << bit
        assert all(d == 0 for i, d in enumerate(diff) if i != byte_index)
        # block 2 is untouched
        assert plain[16:24] == payload[16:24]

    def test_decrypt_bad_length(self, rng):
        params = Rc5Params(key=b"k", iv=bytes(8))
        with pytest.raises(ChannelCorrupt):
            rc5_cbc("decrypt", params, b"1234567")
        with pytest.raises(ChannelCorrupt):
            rc5_cbc("decrypt", params, b"")

    def test_decrypt_bad_padding(self, rng):
        params = Rc5Params(key=b"k", iv=bytes(8))
        ct = rc5_cbc("encrypt", params, b"x" * 8)
        tampered = ct[:-1] + bytes([ct[-1] ^ 0xFF])
        with pytest.raises(ChannelCorrupt):
            rc5_cbc("decrypt", params, tampered)

    def test_missing_iv(self):
        with pytest.raises(ValueError):
            rc5_cbc("encrypt", Rc5Params(key=b"k"), b"payload")


class TestParams:
    def test_rounds_range(self):
        with pytest.raises(ValueError):
            Rc5Params(key=b"k", rounds=256)

    def test_key_length_cap(self):
        with pytest.raises(ValueError):
            Rc5Params(key=bytes(256))

    def test_iv_length(self):
        with pytest.raises(ValueError):
            Rc5Params(key=b"k", iv=b"short")
