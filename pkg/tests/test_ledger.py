import os

import pytest

import scenario
from tampering import flip_byte

from latledger.ledger import (
    Ledger, LedgerError, LedgerFile, LedgerIOError, Transaction, TxRejected, append, check_balance,
    create_tx, setup, verify_tx,
)
from latledger.sampling import Rng


@pytest.fixture(scope="module")
def small(params):
    """Two parties, one asset, genesis (10, 0), then a transfer of 5."""
    led, sks = setup(2, [10, 0], params, b"small")
    tx = create_tx(led, [[-5, 5]], {0: sks[0]}, Rng(b"small-tx"))
    return led, sks, tx


def test_setup(small, params):
    led, sks, _ = small
    assert led.n_parties == 2 and led.n_assets == 1 and led.length >= 1
    assert [check_balance(led, sks[i], i, 0) for i in range(2)] == [10, 0]


def test_setup_rejections(params):
    with pytest.raises(LedgerError):
        setup(2, [10, -1], params, b"neg")
    with pytest.raises(LedgerError):
        setup(2, [10, 0, 1], params, b"odd")
    with pytest.raises(LedgerError):
        setup(1, [10], params, b"alone")


def test_setup_deterministic(params):
    a, _ = setup(2, [1, 2], params, b"same")
    b, _ = setup(2, [1, 2], params, b"same")
    assert a.header_bytes() == b.header_bytes()
    assert a.party_bytes(0) == b.party_bytes(0) and a.genesis_bytes() == b.genesis_bytes()


def test_duplicate_participant(small):
    led, _, _ = small
    with pytest.raises(LedgerError):
        led.register(led.participants[0].pk, led.participants[0].pokw)


def test_transfer(small):
    led, sks, tx = small
    assert len(tx.cells) == 1 and len(tx.cells[0]) == 2
    assert tx.cells[0][0].link.kind == tx.cells[0][1].link.kind == "Or"
    assert verify_tx(led, tx)
    assert verify_tx(led, tx.to_bytes())


def test_flipped_balance_proof_is_named(small):
    led, _, tx = small
    bad = Transaction(tx.cells, [flip_byte(tx.balance[0], "u")], tx.timings)
    verdict = verify_tx(led, bad)
    assert not verdict and verdict.failed == "PoB[a=0]"


def test_truncated_transaction_bytes(small):
    led, _, tx = small
    assert verify_tx(led, tx.to_bytes()[:-3]).failed == "format"


def test_builder_guards(small):
    led, sks, _ = small
    with pytest.raises(LedgerError):
        create_tx(led, [[-5, 4]], {0: sks[0]})
    with pytest.raises(LedgerError):
        create_tx(led, [[-5, 5]], {})
    with pytest.raises(LedgerError):
        create_tx(led, [[-11, 11]], {0: sks[0]})


def test_wrong_key_balance(small):
    led, sks, _ = small
    with pytest.raises(LedgerError):
        check_balance(led, sks[1], 0, 0)


def test_append_and_replay(params, tmp_path):
    led, sks = setup(3, [10, 0, 0], params, b"replay")
    tx = create_tx(led, [[-4, 4, 0]], {0: sks[0]}, Rng(1))
    assert append(led, tx) == 0
    assert [check_balance(led, sks[i], i, 0) for i in range(3)] == [6, 4, 0]
    # the OR statement names the column sum, which moved: the same bytes no longer verify
    with pytest.raises(TxRejected) as info:
        append(led, tx)
    assert info.value.verdict.failed.startswith("Or[")
    assert len(led.txs) == 1


def test_zero_transaction_is_all_decoys(params):
    led, sks = setup(2, [3, 3], params, b"decoy")
    tx = create_tx(led, [[0, 0]], {}, Rng(2))
    append(led, tx)
    assert [check_balance(led, sks[i], i, 0) for i in range(2)] == [3, 3]


def test_scenario_short(params):
    rep = scenario.run(params, n_tx=4, seed=b"short")
    assert rep.ok, rep.failures
    assert not rep.rejected["overspend"] and rep.rejected["overspend"].failed.startswith("PoA[")
    assert not rep.rejected["unbalanced"] and rep.rejected["unbalanced"].failed.startswith("PoB[")


def test_scenario_compact(params):
    rep = scenario.run(params, n_tx=3, seed=b"compact", compact=True)
    assert rep.ok, rep.failures
    assert rep.ledger.rows == 1
    assert rep.rejected["overspend"].failed.startswith("PoAc[")
    assert rep.rejected["unbalanced"].failed.startswith("PoB[")


# -- persistence ------------------------------------------------------------------------------

@pytest.fixture
def stored(params, tmp_path):
    led, sks = setup(2, [[10, 2], [0, 9]], params, b"stored")
    path = tmp_path / "ledger.bin"
    store = LedgerFile(path)
    store.create(led)
    tx = create_tx(led, [[-3, 3], [1, -1]], {0: sks[0], 1: sks[1]}, Rng(3))
    append(led, tx)
    store.append_tx(tx)
    return led, sks, store


def test_reload_matches(stored):
    led, sks, store = stored
    again = store.load()
    assert len(again.txs) == 1
    assert again.balances(sks[0], 0) == led.balances(sks[0], 0) == [7, 1]
    assert again.balances(sks[1], 1) == [5, 8]
    assert store.load(verify_txs=False).columns[0][0] == led.columns[0][0]


def test_state_is_a_fold(stored, params):
    led, sks, store = stored
    fresh = LedgerFile(store.path + ".copy")
    fresh.create(led)
    assert open(fresh.path, "rb").read() == open(store.path, "rb").read()


def test_create_refuses_existing(stored):
    led, _, store = stored
    with pytest.raises(LedgerIOError):
        store.create(led)


@pytest.mark.parametrize("offset", [10, -10])
def test_corruption_names_record(stored, offset):
    _, _, store = stored
    data = bytearray(open(store.path, "rb").read())
    data[offset] ^= 0x40
    open(store.path, "wb").write(bytes(data))
    with pytest.raises(LedgerIOError) as info:
        store.load()
    assert info.value.record == (0 if offset > 0 else 4)


def test_truncation_detected(stored):
    _, _, store = stored
    data = open(store.path, "rb").read()
    open(store.path, "wb").write(data[:-5])
    with pytest.raises(LedgerIOError) as info:
        store.load()
    assert info.value.record == 4


def test_index_rebuild(stored):
    led, _, store = stored
    good = store.index()
    assert len(good) == 2 + led.n_parties + 1
    os.remove(store.idx_path)
    assert store.index() == []
    store.load(verify_txs=False)
    assert store.index() == good


def test_invalid_transaction_in_file(stored, params):
    led, sks, store = stored
    bad = create_tx(led, [[0, 1], [0, 0]], {}, Rng(4), force=True)
    store.append_tx(bad)
    with pytest.raises(LedgerIOError) as info:
        store.load()
    assert "PoB" in str(info.value) and info.value.record == 5
    assert len(store.load(verify_txs=False).txs) == 2


def test_missing_file(tmp_path):
    with pytest.raises(LedgerIOError):
        LedgerFile(tmp_path / "none.bin").load()


def test_column_budget(params):
    from latledger.params import with_changes
    tight = with_changes(params, column_budget=2)
    led, sks = setup(2, [5, 5], tight, b"budget")
    append(led, create_tx(led, [[0, 0]], {}, Rng(5)))
    with pytest.raises(LedgerError):
        create_tx(led, [[0, 0]], {}, Rng(6))


def test_ledger_rejects_bad_asset_count(params):
    with pytest.raises(LedgerError):
        Ledger(params, b"x", 2, params.d + 1, compact=True)
