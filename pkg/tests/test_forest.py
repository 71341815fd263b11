import pytest

from core.errors import EmptyInputError, NoSeedsError
from core.events import EventLog, EventRecord, parse_events
from core.forest import OrphanPolicy, build_forest

HEADER = "sender_id,recipient_id,timestamp\n"


def test_chain_generations():
    forest = build_forest(parse_events(HEADER + ",A,100\nA,B,200\nB,C,300\n"))
    assert {a: n.generation for a, n in forest.nodes.items()} == {"A": 1, "B": 2, "C": 3}
    assert forest.nodes["C"].infector == "B"
    assert forest.max_generation == 3


def test_orphans_rejected_by_default():
    forest = build_forest(parse_events(HEADER + ",A,100\nA,B,200\nC,D,300\n"))
    assert [(r.sender, r.recipient) for r in forest.orphan_records] == [("C", "D")]
    assert "D" not in forest.nodes


def test_orphan_senders_promoted_to_seeds():
    forest = build_forest(parse_events(HEADER + ",A,100\nA,B,200\nC,D,300\n"), OrphanPolicy.AS_SEEDS)
    assert forest.promoted_seeds == ("C",)
    assert forest.nodes["C"].generation == 1
    assert forest.nodes["D"].generation == 2
    assert forest.orphan_records == ()


def test_policy_accepts_plain_string():
    forest = build_forest(parse_events(HEADER + "C,D,300\n"), "as-seeds")
    assert len(forest) == 2


def test_first_infection_wins():
    forest = build_forest(parse_events(HEADER + ",A,100\nA,B,200\nA,B,250\n"))
    assert forest.nodes["B"].infected_at == 200.0
    assert forest.attempt_counts.get("A", 0) == 1
    assert len(forest) == 2


def test_later_infector_only_counts_an_attempt():
    forest = build_forest(parse_events(HEADER + ",A,100\n,X,100\nA,B,200\nX,B,210\n"))
    assert forest.nodes["B"].infector == "A"
    assert forest.attempt_counts.get("X", 0) == 1
    assert forest.attempt_counts.get("A", 0) == 0


def test_repeated_seed_is_ignored():
    forest = build_forest(parse_events(HEADER + ",A,100\n,A,150\n"))
    assert len(forest) == 1
    assert forest.nodes["A"].infected_at == 100.0


def test_no_seeds():
    with pytest.raises(NoSeedsError):
        build_forest(parse_events(HEADER + "A,B,200\n"))


def test_empty_log():
    with pytest.raises(EmptyInputError):
        build_forest(EventLog.from_records([]))


def test_children_lists_in_infection_order():
    log = EventLog.from_records([
        EventRecord(None, "A", 0.0),
        EventRecord("A", "C", 20.0),
        EventRecord("A", "B", 10.0),
    ])
    assert build_forest(log).children() == {"A": ["B", "C"]}
