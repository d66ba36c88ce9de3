"""
Tests for the crypto suite: PRFs, keyed hash, groups, scalar arithmetic, the RSA
trapdoor permutation, authenticated encryption and operation counters.
"""

import pytest
from Crypto.Hash import HMAC, SHA512
from hypothesis import given, settings
from hypothesis import strategies as st

from src.crypto_suite import (
    CipherKey, HashKey, PermDomainValue, PrfKey, Scalar, ScalarPrfKey, SafePrimeGroup,
    SeededRandomSource, count_operations, get_group, group_exp, keyed_hash, perm_forward,
    perm_inverse, prf_bytes, prf_scalar, reduce_to_scalar, sample_chain_origin, scalar_inv,
    scalar_mul, se_decrypt, se_encrypt,
)
from src.errors import DomainError, IntegrityError, ZeroResidueFault

ED25519 = get_group("ed25519")
TOY = get_group("modp-toy")


def _rng(seed=1):
    return SeededRandomSource(seed)


class TestRandomness:
    def test_seeded_stream_is_reproducible(self):
        assert _rng(5).read(64) == _rng(5).read(64)
        assert _rng(5).read(64) != _rng(6).read(64)

    def test_randrange_stays_in_bounds(self):
        rng = _rng()
        values = [rng.randrange(2, 9) for _ in range(500)]
        assert min(values) >= 2 and max(values) <= 8
        assert set(values) == set(range(2, 9))

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            _rng().randrange(3, 3)
        with pytest.raises(ValueError):
            _rng().randbelow(0)

    def test_large_bound_is_reproducible_and_in_range(self):
        bound = 2 ** 1024 - 105
        first = [_rng(3).randbelow(bound) for _ in range(3)]
        assert first == [_rng(3).randbelow(bound) for _ in range(3)]
        assert all(0 <= value < bound for value in first)

    def test_draws_consume_the_seeded_stream(self):
        rng = _rng(4)
        draws = [rng.randbelow(2 ** 64) for _ in range(50)]
        assert len(set(draws)) == 50


class TestPrf:
    def test_prf_bytes_is_deterministic_and_16_bytes(self):
        key = PrfKey.generate(_rng())
        assert prf_bytes(key, b"ID1") == prf_bytes(key, b"ID1")
        assert len(prf_bytes(key, b"ID1")) == 16

    def test_prf_bytes_no_collisions_on_corpus(self):
        key = PrfKey.generate(_rng())
        outputs = {prf_bytes(key, f"ID{i}".encode()) for i in range(10_000)}
        assert len(outputs) == 10_000

    def test_prf_bytes_rejects_empty_input(self):
        with pytest.raises(DomainError):
            prf_bytes(PrfKey.generate(_rng()), b"")

    def test_keys_are_separated(self):
        rng = _rng()
        k1, k2 = PrfKey.generate(rng), PrfKey.generate(rng)
        corpus = [f"w{i}".encode() for i in range(100)]
        assert all(prf_bytes(k1, w) != prf_bytes(k2, w) for w in corpus)
        s1, s2 = ScalarPrfKey.generate(rng), ScalarPrfKey.generate(rng)
        assert all(prf_scalar(s1, w, ED25519) != prf_scalar(s2, w, ED25519) for w in corpus)

    def test_prf_scalar_deterministic_and_nonzero(self):
        key = ScalarPrfKey.generate(_rng())
        a = prf_scalar(key, b"w1", ED25519)
        assert a == prf_scalar(key, b"w1", ED25519)
        assert 1 <= a.value < ED25519.order

    def test_prf_scalar_rederives_on_zero(self):
        """A first-round digest that reduces to 0 falls through to the next counter."""
        group = SafePrimeGroup(23)
        key = ScalarPrfKey.generate(_rng())

        def reduce(counter, data):
            digest = HMAC.new(key.material, counter.to_bytes(4, "big") + data, digestmod=SHA512).digest()
            return int.from_bytes(digest, "big") % group.order

        hit = next(data for data in (f"in{i}".encode() for i in range(2000)) if reduce(0, data) == 0)
        scalar = prf_scalar(key, hit, group)
        assert scalar.value != 0
        expected = next(reduce(c, hit) for c in range(1, 100) if reduce(c, hit))
        assert scalar.value == expected

    def test_prf_scalar_is_uniform_enough(self):
        key = ScalarPrfKey.generate(_rng())
        order = ED25519.order
        samples = [prf_scalar(key, i.to_bytes(4, "big"), ED25519).value / order for i in range(20_000)]
        assert abs(sum(samples) / len(samples) - 0.5) < 0.01


class TestGroup:
    def test_keyed_hash_width_and_separation(self):
        key = HashKey.generate(_rng())
        g = ED25519.generator
        assert len(keyed_hash(key, g)) == 32
        assert keyed_hash(key, g) == keyed_hash(key, ED25519.decode(g.encode()))
        assert keyed_hash(key, g) != keyed_hash(key, ED25519.exp(g, 2))

    @pytest.mark.parametrize("group", [ED25519, TOY], ids=lambda g: g.name)
    def test_exponent_identities(self, group):
        g = group.generator
        a = Scalar(7, group.order)
        assert group_exp(g, Scalar(1, group.order)) == g
        assert group_exp(group_exp(g, a), scalar_inv(a)) == g

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, TOY.order - 1), st.integers(1, TOY.order - 1), st.integers(1, TOY.order - 1))
    def test_delta_to_label_identity_toy(self, s, t, u):
        order = TOY.order
        g = TOY.generator
        st_, tag_w, tag_id = Scalar(s, order), Scalar(t, order), Scalar(u, order)
        delta = group_exp(g, scalar_mul(scalar_mul(st_, tag_w), scalar_inv(tag_id)))
        assert group_exp(delta, tag_id) == group_exp(g, scalar_mul(st_, tag_w))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, ED25519.order - 1), st.integers(1, ED25519.order - 1),
           st.integers(1, ED25519.order - 1))
    def test_delta_to_label_identity_ed25519(self, s, t, u):
        order = ED25519.order
        g = ED25519.generator
        st_, tag_w, tag_id = Scalar(s, order), Scalar(t, order), Scalar(u, order)
        delta = group_exp(g, scalar_mul(scalar_mul(st_, tag_w), scalar_inv(tag_id)))
        assert group_exp(delta, tag_id) == group_exp(g, scalar_mul(st_, tag_w))

    def test_scalar_inverse(self):
        a = Scalar(123456789, ED25519.order)
        assert scalar_mul(a, scalar_inv(a)).value == 1

    def test_scalar_rejects_zero(self):
        with pytest.raises(DomainError):
            Scalar(0, ED25519.order)

    def test_exponent_from_other_group_rejected(self):
        with pytest.raises(DomainError):
            group_exp(ED25519.generator, Scalar(3, TOY.order))

    def test_ed25519_roundtrip(self):
        rng = _rng()
        for _ in range(20):
            element = ED25519.random_element(rng)
            assert ED25519.decode(element.encode()) == element

    def test_ed25519_generator_encoding(self):
        # standard base point encoding (RFC 8032)
        assert ED25519.generator.encode().hex() == (
            "5866666666666666666666666666666666666666666666666666666666666666")

    def test_ed25519_rejects_non_canonical(self):
        with pytest.raises(DomainError):
            ED25519.decode(b"\xff" * 31 + b"\x7f")

    def test_ed25519_rejects_low_order_point(self):
        # (0, -1) has order 2
        with pytest.raises(DomainError):
            ED25519.decode((2 ** 255 - 20).to_bytes(32, "little"))

    def test_ed25519_rejects_sign_bit_on_zero_x(self):
        # identity with the x sign bit set
        with pytest.raises(DomainError):
            ED25519.decode((1 | (1 << 255)).to_bytes(32, "little"))

    def test_ed25519_identity_roundtrip(self):
        identity = ED25519.exp(ED25519.generator, 0)
        assert identity.encode() == (1).to_bytes(32, "little")
        assert ED25519.decode(identity.encode()) == identity

    def test_ed25519_rejects_wrong_width(self):
        with pytest.raises(DomainError):
            ED25519.decode(bytes(31))

    def test_toy_group_membership(self):
        assert TOY.element_width == 2
        assert TOY.decode(TOY.generator.encode()) == TOY.generator
        with pytest.raises(DomainError):
            TOY.decode((2038).to_bytes(2, "big"))   # -1 is a non-residue mod 2039
        with pytest.raises(DomainError):
            TOY.decode(bytes(2))


class TestPermutation:
    def test_forward_inverts_inverse(self, perm_keys):
        rng = _rng()
        for _ in range(100):
            x = sample_chain_origin(perm_keys.public, rng)
            assert perm_forward(perm_keys.public, perm_inverse(perm_keys.secret, x)) == x
            assert perm_inverse(perm_keys.secret, perm_forward(perm_keys.public, x)) == x

    def test_iterated_chain(self, perm_keys):
        x = sample_chain_origin(perm_keys.public, _rng(3))
        y = x
        for _ in range(5):
            y = perm_inverse(perm_keys.secret, y)
        for _ in range(5):
            y = perm_forward(perm_keys.public, y)
        assert y == x

    def test_fixed_points(self, perm_keys):
        n = perm_keys.modulus
        for value in (0, 1):
            x = PermDomainValue(value, n)
            assert perm_inverse(perm_keys.secret, x) == x

    def test_out_of_domain(self, perm_keys):
        with pytest.raises(DomainError):
            PermDomainValue(perm_keys.modulus, perm_keys.modulus)

    def test_chain_origin_excludes_fixed_points(self, perm_keys):
        rng = _rng()
        assert all(sample_chain_origin(perm_keys.public, rng).value >= 2 for _ in range(200))

    def test_encoding_width(self, perm_keys):
        x = PermDomainValue(5, perm_keys.modulus)
        assert len(x.to_bytes()) == 128
        assert PermDomainValue.from_bytes(x.to_bytes(), perm_keys.modulus) == x

    def test_reduce_to_scalar(self, perm_keys):
        p = ED25519.order
        n = perm_keys.modulus
        assert reduce_to_scalar(PermDomainValue(p + 3, n), ED25519).value == 3
        assert reduce_to_scalar(PermDomainValue(17, n), ED25519).value == 17
        with pytest.raises(ZeroResidueFault):
            reduce_to_scalar(PermDomainValue(3 * p, n), ED25519)


class TestSymmetricEncryption:
    def test_roundtrip_and_randomized(self):
        rng = _rng()
        key = CipherKey.generate(rng)
        first, second = se_encrypt(key, b"ID42", rng), se_encrypt(key, b"ID42", rng)
        assert first != second
        assert se_decrypt(key, first) == b"ID42"
        assert len(first) == 12 + 4 + 16

    def test_wrong_key(self):
        rng = _rng()
        blob = se_encrypt(CipherKey.generate(rng), b"ID42", rng)
        with pytest.raises(IntegrityError):
            se_decrypt(CipherKey.generate(rng), blob)

    def test_tampering_detected(self):
        rng = _rng()
        key = CipherKey.generate(rng)
        blob = bytearray(se_encrypt(key, b"ID42", rng))
        for index in range(len(blob)):
            mutated = bytearray(blob)
            mutated[index] ^= 0x01
            with pytest.raises(IntegrityError):
                se_decrypt(key, bytes(mutated))

    def test_short_ciphertext(self):
        with pytest.raises(IntegrityError):
            se_decrypt(CipherKey.generate(_rng()), b"short")


class TestKeysAndCounters:
    def test_key_width_enforced(self):
        with pytest.raises(DomainError):
            PrfKey(b"\x00" * 15)

    def test_key_repr_hides_material(self):
        key = HashKey(b"\xab" * 32)
        assert "ab" not in repr(key)

    def test_counters_scope(self):
        key = PrfKey.generate(_rng())
        prf_bytes(key, b"outside")
        with count_operations() as counts:
            prf_bytes(key, b"inside")
            keyed_hash(HashKey.generate(_rng()), ED25519.generator)
        prf_bytes(key, b"after")
        assert counts.prf_calls == 1
        assert counts.hashes == 1
        assert counts.total_prfs() == 1
