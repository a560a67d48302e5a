from random import Random

import pytest

from shortage.ledger import DemandSet, MaterialLedger, ShortageRecord, check_and_virtualize


def test_task3_shortage_of_m001():
    ledger = MaterialLedger.opening({'m001': 250, 'm002': 1000, 'm004': 1000})
    _, ledger = check_and_virtualize('t002', DemandSet.for_task({'m001': 2, 'm002': 3}, 100), ledger)
    assert ledger.on_hand('m001') == 50

    records, ledger = check_and_virtualize(
        't003', DemandSet.for_task({'m001': 1, 'm002': 2, 'm004': 3}, 150), ledger
    )
    assert records == [ShortageRecord(task_id='t003', material_id='m001', lack_amount=100)]
    assert ledger.on_hand('m001') == 0
    assert ledger.virtualized == {'m001': 100}
    assert ledger.replay() == ledger.stock


def test_zero_demand_changes_nothing():
    ledger = MaterialLedger.opening({'m001': 10})
    records, after = check_and_virtualize('t001', DemandSet.for_task({'m001': 0}, 50), ledger)
    assert records == []
    assert after.stock == ledger.stock
    assert after.virtualized == {}


def test_demand_equal_to_stock_is_no_shortage():
    ledger = MaterialLedger.opening({'m001': 10})
    records, after = check_and_virtualize('t001', DemandSet(demands={'m001': 10}), ledger)
    assert records == []
    assert after.on_hand('m001') == 0


def test_unknown_material_is_all_lack():
    records, after = check_and_virtualize('t001', DemandSet(demands={'m009': 4}), MaterialLedger.opening({}))
    assert records == [ShortageRecord(task_id='t001', material_id='m009', lack_amount=4)]
    assert after.on_hand('m009') == 0


def test_debit_requires_cover():
    ledger = MaterialLedger.opening({'m001': 1})
    assert not ledger.covers(DemandSet(demands={'m001': 2}))
    with pytest.raises(ValueError):
        ledger.debit('t001', DemandSet(demands={'m001': 2}))


def test_negative_quantities_are_rejected():
    with pytest.raises(ValueError):
        DemandSet(demands={'m001': -1})
    with pytest.raises(ValueError):
        MaterialLedger.opening({'m001': -1})
    with pytest.raises(ValueError):
        ShortageRecord(task_id='t001', material_id='m001', lack_amount=0)


def test_history_replays_to_the_stock():
    ledger = MaterialLedger.opening({'m001': 5, 'm002': 5})
    for task_id, demands in (('t001', {'m001': 3}), ('t002', {'m001': 4, 'm002': 1}), ('t003', {'m002': 9})):
        _, ledger = check_and_virtualize(task_id, DemandSet(demands=demands), ledger)
    assert ledger.replay() == pytest.approx(ledger.stock)
    assert ledger.total_virtualized == pytest.approx(2 + 5)


def test_ledger_matches_a_plain_replay_on_random_sequences():
    rng = Random(20240117)
    for _ in range(1000):
        materials = [f'm{i:03d}' for i in range(1, rng.randint(1, 4) + 1)]
        stock = {m: float(rng.randint(0, 300)) for m in materials}
        ledger = MaterialLedger.opening(stock)
        expected_stock = dict(stock)
        emitted = []
        for number in range(1, rng.randint(1, 3) + 1):
            task_id = f't{number:03d}'
            bom = {m: float(rng.randint(0, 4)) for m in materials if rng.random() < 0.7}
            amount = float(rng.randint(1, 100))
            demands = DemandSet.for_task(bom, amount)

            expected = []
            for material_id in sorted(bom):
                demand = bom[material_id] * amount
                lack = max(0.0, demand - expected_stock[material_id])
                if lack > 0:
                    expected.append((task_id, material_id, lack))
                expected_stock[material_id] += lack - demand

            records, ledger = check_and_virtualize(task_id, demands, ledger)
            assert [(r.task_id, r.material_id, r.lack_amount) for r in records] == expected
            emitted.extend(records)
            assert ledger.stock == pytest.approx(expected_stock)
            assert all(quantity >= 0 for quantity in ledger.stock.values())

        assert ledger.total_virtualized == pytest.approx(sum(r.lack_amount for r in emitted))
        assert ledger.replay() == pytest.approx(ledger.stock)
