from __future__ import annotations

import pytest
from cryptography.hazmat.primitives import padding as crypto_padding
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from qkdn_orr.crypto import (
    BLOCK_SIZE,
    KEM_CIPHERTEXT_SIZE,
    KEM_PUBLIC_KEY_SIZE,
    KEM_SECRET_KEY_SIZE,
    KEM_SHARED_SECRET_SIZE,
    KemCiphertext,
    RandomSource,
    SymCiphertext,
    kem_decapsulate,
    kem_encapsulate,
    kem_keygen,
    random_bytes,
    sym_ciphertext_length,
    sym_decrypt,
    sym_encrypt,
    xor_otp,
)
from qkdn_orr.errors import (
    BadPadding,
    InvalidPublicKey,
    LengthMismatch,
    MalformedCiphertext,
)


def test_random_bytes_seeded_is_reproducible():
    assert random_bytes(32, RandomSource(42)) == random_bytes(32, RandomSource(42))
    assert random_bytes(32, RandomSource(42)) != random_bytes(32, RandomSource(43))


def test_random_bytes_rejects_empty(rng):
    with pytest.raises(ValueError):
        random_bytes(0, rng)


def test_derived_streams_are_independent():
    a = RandomSource.derive(5, "ORR", "n0").random_bytes(32)
    b = RandomSource.derive(5, "ORR", "n1").random_bytes(32)
    assert a != b
    assert a == RandomSource.derive(5, "ORR", "n0").random_bytes(32)
    assert not RandomSource.derive(None, "x").deterministic


def test_xor_otp_is_an_involution(rng):
    for i in range(10_000):
        size = 1 + i % 64
        s, k = rng.random_bytes(size), rng.random_bytes(size)
        assert xor_otp(xor_otp(s, k), k) == s
        assert xor_otp(s, bytes(size)) == s


def test_xor_otp_length_mismatch():
    with pytest.raises(LengthMismatch):
        xor_otp(bytes(32), bytes(31))


def test_sym_roundtrip_and_length_for_every_size(rng):
    key = rng.random_bytes(32)
    for size in range(1, 513):
        pt = rng.random_bytes(size)
        ct = sym_encrypt(key, pt, rng)
        assert len(ct) == sym_ciphertext_length(size) == 16 + 16 * (size // 16 + 1)
        assert sym_decrypt(key, ct) == pt
        assert sym_decrypt(key, ct.to_bytes()) == pt


def test_sym_32_byte_plaintext_is_64_bytes(rng):
    assert len(sym_encrypt(rng.random_bytes(32), bytes(32), rng)) == 64


def test_sym_matches_independent_aes_implementation(rng):
    key = rng.random_bytes(32)
    pt = b"onion layer under test"
    ct = sym_encrypt(key, pt, rng)

    decryptor = Cipher(algorithms.AES(key), modes.CBC(ct.iv)).decryptor()
    padded = decryptor.update(ct.body) + decryptor.finalize()
    unpadder = crypto_padding.PKCS7(128).unpadder()
    assert unpadder.update(padded) + unpadder.finalize() == pt

    iv = rng.random_bytes(16)
    padder = crypto_padding.PKCS7(128).padder()
    encryptor = Cipher(algorithms.AES(key), modes.CBC(iv)).encryptor()
    body = encryptor.update(padder.update(pt) + padder.finalize()) + encryptor.finalize()
    assert sym_decrypt(key, iv + body) == pt


def test_sym_rejects_bad_inputs(rng):
    key = rng.random_bytes(32)
    with pytest.raises(ValueError):
        sym_encrypt(key, b"", rng)
    with pytest.raises(LengthMismatch):
        sym_encrypt(key[:16], b"x", rng)
    with pytest.raises(MalformedCiphertext):
        sym_decrypt(key, bytes(16))
    with pytest.raises(MalformedCiphertext):
        sym_decrypt(key, bytes(40))
    with pytest.raises(MalformedCiphertext):
        SymCiphertext(iv=bytes(8), body=bytes(16))


def test_wrong_key_rarely_survives_padding(rng):
    failures = 0
    for _ in range(10_000):
        ct = sym_encrypt(rng.random_bytes(32), rng.random_bytes(32), rng)
        try:
            sym_decrypt(rng.random_bytes(32), ct)
        except BadPadding:
            failures += 1
    # a wrong key yields valid PKCS#7 about 0.4% of the time
    assert failures >= 9_900


def test_kem_sizes_and_agreement(rng):
    pair = kem_keygen(rng)
    assert len(pair.public_key) == KEM_PUBLIC_KEY_SIZE
    assert len(pair.secret_key) == KEM_SECRET_KEY_SIZE
    ct, shared = kem_encapsulate(pair.public_key, rng)
    assert len(ct) == KEM_CIPHERTEXT_SIZE
    assert len(shared) == KEM_SHARED_SECRET_SIZE
    assert kem_decapsulate(pair.secret_key, ct) == shared
    assert "hidden" in repr(pair)


def test_kem_seeded_keygen_is_reproducible():
    assert kem_keygen(RandomSource(3)) == kem_keygen(RandomSource(3))


def test_kem_tampered_ciphertext_yields_other_secret(rng):
    pair = kem_keygen(rng)
    ct, shared = kem_encapsulate(pair.public_key, rng)
    tampered = KemCiphertext(bytes([ct.data[0] ^ 1]) + ct.data[1:])
    assert kem_decapsulate(pair.secret_key, tampered) != shared


def test_kem_rejects_short_public_key(rng):
    with pytest.raises(InvalidPublicKey):
        kem_encapsulate(bytes(100), rng)


def test_kem_rejects_out_of_range_public_key(rng):
    # 0xfff coefficients exceed q, so the modulus check fails
    with pytest.raises(InvalidPublicKey):
        kem_encapsulate(b"\xff" * KEM_PUBLIC_KEY_SIZE, rng)


@pytest.mark.slow
def test_kem_roundtrip_many(rng):
    for _ in range(1000):
        pair = kem_keygen(rng)
        ct, shared = kem_encapsulate(pair.public_key, rng)
        assert kem_decapsulate(pair.secret_key, ct) == shared


def test_block_size_is_aes():
    assert BLOCK_SIZE == 16
