"""Letter codec: encode, decode, and the exhaustive identity check.

The oracle here is independent of the implementation: legal chains are
enumerated by brute-force product-and-filter over the succession table,
then grouped by their letter form.  A code with exactly one legal
reading must decode to it; a code with several must raise; a code with
none must raise the other way.
"""

from itertools import product

import pytest

from thimac.model import ActionKind
from thimac.events import (
    AmbiguousReading,
    InvalidLetter,
    NoLegalReading,
    chain_legal,
    decode_actions,
    encode_actions,
    iter_legal_chains,
)

KINDS = list(ActionKind)


def oracle_chains(max_len: int):
    """All chain-legal kind sequences of length 1..max_len, brute force."""
    for length in range(1, max_len + 1):
        for seq in product(KINDS, repeat=length):
            if all(chain_legal(a, b) for a, b in zip(seq, seq[1:])):
                yield seq


def test_encode_known_sequence():
    seq = [
        ActionKind.CREATE,
        ActionKind.RELEASE,
        ActionKind.TRANSFER,
        ActionKind.TRANSFER,
        ActionKind.RECEIVE,
        ActionKind.PROCESS,
    ]
    assert encode_actions(seq) == "CRTTRP"


def test_decode_known_sequence():
    assert decode_actions("CRTTRP") == (
        ActionKind.CREATE,
        ActionKind.RELEASE,
        ActionKind.TRANSFER,
        ActionKind.TRANSFER,
        ActionKind.RECEIVE,
        ActionKind.PROCESS,
    )


def test_empty_code_decodes_to_empty():
    assert decode_actions("") == ()
    assert encode_actions([]) == ""


def test_decode_rejects_unknown_letters():
    with pytest.raises(InvalidLetter):
        decode_actions("CRX")
    with pytest.raises(InvalidLetter):
        decode_actions("crttrp")  # letters are upper-case


def test_exhaustive_identity_up_to_six():
    by_code: dict[str, list[tuple]] = {}
    for seq in oracle_chains(6):
        by_code.setdefault(encode_actions(seq), []).append(seq)

    ambiguous = set()
    for code, seqs in by_code.items():
        if len(seqs) == 1:
            assert decode_actions(code) == seqs[0], code
        else:
            ambiguous.add(code)
            with pytest.raises(AmbiguousReading):
                decode_actions(code)
    # the lone letter R (release or receive, both chains of one) is the
    # only ambiguous code at these lengths
    assert ambiguous == {"R"}

    # codes that no legal chain produces must be rejected
    for length in range(1, 5):
        for letters in product("CPRT", repeat=length):
            code = "".join(letters)
            if code in by_code:
                continue
            with pytest.raises(NoLegalReading):
                decode_actions(code)


def test_iter_legal_chains_matches_oracle():
    key = lambda seq: [k.value for k in seq]
    got = sorted(iter_legal_chains(4), key=key)
    want = sorted(oracle_chains(4), key=key)
    assert got == want


def test_decode_handles_long_r_runs_without_blowup():
    # release->transfer->receive->release->... loops legally, and every R
    # in it is forced (after C or receive: release; after T: receive), so
    # the long code has exactly one reading.  Mostly this guards the
    # decoder against exponential backtracking on R-heavy codes.
    code = "C" + "RTR" * 20 + "P"
    seq = decode_actions(code)
    assert encode_actions(seq) == code
    assert all(chain_legal(a, b) for a, b in zip(seq, seq[1:]))
