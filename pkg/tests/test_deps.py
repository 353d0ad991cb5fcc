from hypothesis import given, settings
from hypothesis import strategies as st

import pytest
import random

from nego.deps import connection_candidates, count_solutions, render_candidates, render_dot
from nego.dsl import load_software_model
from nego.model import ModelError, pinned_components
from nego.randsys import random_software_system

from oracles import count_assignments


def test_pre_update_candidates(software_pre):
    candidates = connection_candidates(software_pre, pinned_components(software_pre))
    assert candidates.must == {("P", "trajectory_calculation", "T")}
    assert dict(candidates.may) == {("T", "object_recognition"): ("O1", "O2")}
    assert candidates.unsatisfiable == frozenset()


def test_pre_update_count(software_pre):
    candidates = connection_candidates(software_pre, pinned_components(software_pre))
    assert count_solutions(candidates, software_pre.interfaces) == 2


def test_post_update_candidates(software_post):
    candidates = connection_candidates(software_post, pinned_components(software_post))
    assert candidates.must == {
        ("P", "trajectory_calculation", "T"),
        ("L", "object_masking", "O2"),
        ("L", "steering", "S"),
    }
    assert dict(candidates.may) == {
        ("L", "object_recognition"): ("O1", "O2"),
        ("T", "object_recognition"): ("O1", "O2"),
    }


def test_post_update_count_respects_max_clients(software_post):
    candidates = connection_candidates(software_post, pinned_components(software_post))
    assert count_solutions(candidates, software_post.interfaces) == 2


def test_unsatisfiable_requirement():
    text = "component A services requires ghost threads thread t on time (period=5 jitter=0) task a onto R wcet=1 bcet=1"
    repo = "service ghost method g ()"
    software = load_software_model([text], repo)
    candidates = connection_candidates(software, frozenset({"A"}))
    assert candidates.unsatisfiable == {("A", "ghost")}
    assert count_solutions(candidates, software.interfaces) == 0


def test_pinned_must_exist(software_pre):
    with pytest.raises(ModelError):
        connection_candidates(software_pre, frozenset({"ZZ"}))


def test_render_candidates(software_post):
    candidates = connection_candidates(software_post, pinned_components(software_post))
    text = render_candidates(candidates)
    assert "must P trajectory_calculation T" in text
    assert "may T object_recognition O1|O2" in text


def test_render_dot(software_pre):
    candidates = connection_candidates(software_pre, pinned_components(software_pre))
    dot = render_dot(candidates)
    assert dot.startswith("digraph")
    assert '"P" -> "T"' in dot


def test_reachability_excludes_unrelated():
    texts = [
        "component A services requires s threads thread t on time (period=5 jitter=0) task a onto R wcet=1 bcet=1",
        "component B services provides s threads thread e on RPC s.m() task b onto R wcet=1 bcet=1",
        "component Z threads thread t on initialization task z onto R wcet=1 bcet=1",
    ]
    repo = "service s method m ()"
    software = load_software_model(texts, repo)
    candidates = connection_candidates(software, frozenset({"A"}))
    assert "Z" not in candidates.requirements


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_count_matches_brute_force(seed):
    system = random_software_system(random.Random(seed))
    software = system.software
    pinned = pinned_components(software)
    candidates = connection_candidates(software, pinned)
    expected = count_assignments(software, pinned)
    assert count_solutions(candidates, software.interfaces) == expected
